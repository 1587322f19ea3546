// Copyright 2026 The waitmdl Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//   http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

//! Brute-force references kept apart from the library's code paths: itemset
//! enumeration by subset masks, set-based greedy covering, direct evaluation
//! of the length formulas, and exhaustive pattern-table search.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};

use waitmdl::{Database, Item, ItemSet};

/// All itemsets of size >= 2 contained in some transaction, with support
/// counted by scanning every row.
pub fn all_itemsets(db: &Database, min_support: u64) -> BTreeMap<ItemSet, u64> {
    let mut found = BTreeSet::new();
    for t in db.transactions() {
        let items: Vec<Item> = t.items().collect();
        for mask in 1u32..(1 << items.len()) {
            if mask.count_ones() >= 2 {
                let sub = (0..items.len())
                    .filter(|i| mask >> i & 1 == 1)
                    .map(|i| items[i]);
                found.insert(ItemSet::new(sub).unwrap());
            }
        }
    }
    found
        .into_iter()
        .map(|s| {
            let sup = db
                .transactions()
                .iter()
                .filter(|t| {
                    let row: BTreeSet<Item> = t.items().collect();
                    s.items().iter().all(|it| row.contains(it))
                })
                .count() as u64;
            (s, sup)
        })
        .filter(|&(_, sup)| sup >= min_support)
        .collect()
}

/// Total description length of the table made of every database singleton
/// plus `extra` (itemset, support) patterns, recomputed from scratch.
pub fn description_length(db: &Database, extra: &[(ItemSet, u64)]) -> f64 {
    let mut raw: BTreeMap<Item, u64> = BTreeMap::new();
    for t in db.transactions() {
        for it in t.items() {
            *raw.entry(it).or_default() += 1;
        }
    }
    let mut table: Vec<(Vec<Item>, u64)> = raw
        .iter()
        .map(|(&it, &r)| (vec![it], r))
        .chain(extra.iter().map(|(s, sup)| (s.items().to_vec(), *sup)))
        .collect();
    table.sort_by(|a, b| {
        b.0.len()
            .cmp(&a.0.len())
            .then(b.1.cmp(&a.1))
            .then_with(|| a.0.cmp(&b.0))
    });

    let mut usage = vec![0u64; table.len()];
    let mut covers: Vec<Vec<usize>> = Vec::new();
    for t in db.transactions() {
        let mut left: BTreeSet<Item> = t.items().collect();
        let mut cover = Vec::new();
        for (i, (items, _)) in table.iter().enumerate() {
            if items.iter().all(|it| left.contains(it)) {
                for it in items {
                    left.remove(it);
                }
                cover.push(i);
                usage[i] += 1;
            }
        }
        assert!(left.is_empty(), "oracle cover incomplete");
        covers.push(cover);
    }

    let total: u64 = usage.iter().sum();
    let code = |u: u64| -((u as f64) / (total as f64)).log2();
    let data: f64 = covers
        .iter()
        .map(|c| c.iter().map(|&i| code(usage[i])).sum::<f64>())
        .sum();
    let patterns: f64 = usage.iter().filter(|&&u| u > 0).map(|&u| code(u)).sum();
    let c: u64 = raw.values().sum();
    let alphabet: f64 = raw
        .values()
        .map(|&r| -(r as f64) * ((r as f64) / (c as f64)).log2())
        .sum();
    data + patterns + alphabet
}

/// Minimum description length over every subset of `candidates`, and the
/// subset attaining it.
pub fn exhaustive_optimum(db: &Database, candidates: &[(ItemSet, u64)]) -> (f64, Vec<ItemSet>) {
    assert!(candidates.len() <= 20, "exhaustive search too large");
    let mut best = (f64::INFINITY, Vec::new());
    for mask in 0u32..(1 << candidates.len()) {
        let subset: Vec<(ItemSet, u64)> = (0..candidates.len())
            .filter(|i| mask >> i & 1 == 1)
            .map(|i| candidates[i].clone())
            .collect();
        let len = description_length(db, &subset);
        if len < best.0 {
            best = (len, subset.into_iter().map(|(s, _)| s).collect());
        }
    }
    best
}
