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

//! Dictionary-based compression of a transaction database.
//!
//! A [`PatternTable`] is a code dictionary. Each transaction is covered by a
//! disjoint set of table patterns, chosen greedily in cover order; a
//! pattern's code length is `-log2(usage / total usage)`. [`compress`] grows
//! the table from singletons by trying mined candidates one at a time and
//! keeping those that shrink the total description length
//! `L(DB | PT) + L(PT)`.

use std::cmp::Ordering;
use std::collections::BTreeMap;

use thiserror::Error;

use crate::mining::{frequent_itemsets, FrequentItemset, MiningConfig, MiningError};
use crate::model::{Category, Database, Item, ItemSet, Transaction};
use crate::util::{distinct_rows, DistinctRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum CodecError {
    #[error("cannot build a pattern table from an empty database")]
    EmptyDatabase,
    #[error("item {0} has no pattern in the table")]
    UnknownItem(String),
    #[error("pattern {0} has zero usage and carries no code")]
    ZeroUsage(String),
    #[error("pattern {0} is already in the table")]
    DuplicatePattern(String),
    #[error("empty pattern")]
    EmptyPattern,
    #[error("singleton pattern {0} cannot be removed")]
    SingletonRemoval(String),
    #[error("table attributes {table:?} do not match database attributes {database:?}")]
    AttributeMismatch {
        table: Vec<String>,
        database: Vec<String>,
    },
    #[error(transparent)]
    Mining(#[from] MiningError),
}

/// Code length in bits of a pattern used `usage` times out of `total`.
pub fn code_length_bits(usage: u64, total: u64) -> f64 {
    -(usage as f64 / total as f64).log2()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Pattern {
    pub items: ItemSet,
    /// Number of covers this pattern takes part in.
    pub usage: u64,
    /// Number of transactions containing the pattern. For singletons this is
    /// the raw item count.
    pub support: u64,
}

impl Pattern {
    pub fn is_singleton(&self) -> bool {
        self.items.len() == 1
    }
}

/// Cover order: cardinality desc, support desc, items asc.
pub fn cover_order(a: &Pattern, b: &Pattern) -> Ordering {
    b.items
        .len()
        .cmp(&a.items.len())
        .then(b.support.cmp(&a.support))
        .then_with(|| a.items.cmp(&b.items))
}

/// Indices into [`PatternTable::patterns`] of the patterns covering one
/// transaction, in selection order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Cover(Vec<usize>);

impl Cover {
    pub fn parts(&self) -> &[usize] {
        &self.0
    }

    pub fn patterns<'a>(&'a self, table: &'a PatternTable) -> impl Iterator<Item = &'a Pattern> {
        self.0.iter().map(move |&i| &table.patterns[i])
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PatternTable {
    attributes: Vec<String>,
    /// Kept sorted in cover order.
    patterns: Vec<Pattern>,
    singleton_counts: BTreeMap<Item, u64>,
    total_singleton_count: u64,
}

impl PatternTable {
    /// Singleton-only table. Each item's usage and support equal its raw
    /// occurrence count.
    pub fn init(db: &Database) -> Result<PatternTable, CodecError> {
        if db.is_empty() {
            return Err(CodecError::EmptyDatabase);
        }
        let mut counts: BTreeMap<Item, u64> = BTreeMap::new();
        for t in db.transactions() {
            for item in t.items() {
                *counts.entry(item).or_default() += 1;
            }
        }
        let patterns = counts
            .iter()
            .map(|(&item, &r)| Pattern {
                items: ItemSet::singleton(item),
                usage: r,
                support: r,
            })
            .collect();
        Ok(PatternTable::assemble(db.attributes().to_vec(), patterns, counts))
    }

    /// Rebuilds a table from stored patterns. Singleton supports are taken as
    /// the raw item counts.
    pub fn from_patterns(
        attributes: Vec<String>,
        patterns: Vec<Pattern>,
    ) -> Result<PatternTable, CodecError> {
        let mut counts = BTreeMap::new();
        let mut seen = std::collections::HashSet::new();
        for p in &patterns {
            if p.items.is_empty() {
                return Err(CodecError::EmptyPattern);
            }
            if !seen.insert(p.items.clone()) {
                return Err(CodecError::DuplicatePattern(p.items.label(&attributes)));
            }
            if p.is_singleton() {
                counts.insert(p.items.items()[0], p.support);
            }
        }
        Ok(PatternTable::assemble(attributes, patterns, counts))
    }

    fn assemble(
        attributes: Vec<String>,
        mut patterns: Vec<Pattern>,
        singleton_counts: BTreeMap<Item, u64>,
    ) -> PatternTable {
        patterns.sort_by(cover_order);
        let total_singleton_count = singleton_counts.values().sum();
        PatternTable {
            attributes,
            patterns,
            singleton_counts,
            total_singleton_count,
        }
    }

    pub fn attributes(&self) -> &[String] {
        &self.attributes
    }

    pub fn patterns(&self) -> &[Pattern] {
        &self.patterns
    }

    /// Raw occurrence count `r_i` of each database item.
    pub fn singleton_counts(&self) -> &BTreeMap<Item, u64> {
        &self.singleton_counts
    }

    /// `c`, the sum of all `r_i`.
    pub fn total_singleton_count(&self) -> u64 {
        self.total_singleton_count
    }

    pub fn usage_total(&self) -> u64 {
        self.patterns.iter().map(|p| p.usage).sum()
    }

    pub fn find(&self, items: &ItemSet) -> Option<&Pattern> {
        self.patterns.iter().find(|p| &p.items == items)
    }

    /// Multi-item patterns, in cover order.
    pub fn non_singletons(&self) -> impl Iterator<Item = &Pattern> {
        self.patterns.iter().filter(|p| !p.is_singleton())
    }

    /// Adds a pattern with zero usage at its cover-order position. Usages are
    /// stale until [`recompute_usages`](Self::recompute_usages).
    pub fn insert(&mut self, items: ItemSet, support: u64) -> Result<(), CodecError> {
        if items.is_empty() {
            return Err(CodecError::EmptyPattern);
        }
        if self.find(&items).is_some() {
            return Err(CodecError::DuplicatePattern(items.label(&self.attributes)));
        }
        let pattern = Pattern {
            items,
            usage: 0,
            support,
        };
        let pos = self
            .patterns
            .partition_point(|p| cover_order(p, &pattern) == Ordering::Less);
        self.patterns.insert(pos, pattern);
        Ok(())
    }

    /// Removes a multi-item pattern. Usages are stale until recomputed.
    pub fn remove(&mut self, items: &ItemSet) -> Result<Option<Pattern>, CodecError> {
        if items.len() == 1 {
            return Err(CodecError::SingletonRemoval(items.label(&self.attributes)));
        }
        Ok(self
            .patterns
            .iter()
            .position(|p| &p.items == items)
            .map(|i| self.patterns.remove(i)))
    }

    /// Drops multi-item patterns with zero usage.
    pub fn prune_unused(&mut self) {
        self.patterns.retain(|p| p.is_singleton() || p.usage > 0);
    }

    fn check_attributes(&self, db: &Database) -> Result<(), CodecError> {
        if self.attributes != db.attributes() {
            return Err(CodecError::AttributeMismatch {
                table: self.attributes.clone(),
                database: db.attributes().to_vec(),
            });
        }
        Ok(())
    }

    fn cover_cats(&self, cats: &[Category]) -> Result<Vec<usize>, CodecError> {
        let full = match cats.len() {
            64 => u64::MAX,
            n => (1u64 << n) - 1,
        };
        let mut covered = 0u64;
        let mut parts = Vec::new();
        for (i, p) in self.patterns.iter().enumerate() {
            if covered == full {
                break;
            }
            let mask = p.items.attr_mask();
            if mask & covered != 0 {
                continue;
            }
            let fits = p
                .items
                .items()
                .iter()
                .all(|it| cats.get(it.attr as usize) == Some(&it.cat));
            if fits {
                covered |= mask;
                parts.push(i);
            }
        }
        if covered != full {
            let attr = (0..cats.len())
                .find(|a| covered & (1 << a) == 0)
                .expect("some attribute is uncovered");
            let item = Item::new(attr, cats[attr]);
            return Err(CodecError::UnknownItem(item.label(&self.attributes)));
        }
        Ok(parts)
    }

    /// Greedy disjoint cover: scan patterns in cover order and take each one
    /// whose items are all still uncovered in the transaction.
    pub fn cover(&self, txn: &Transaction) -> Result<Cover, CodecError> {
        self.cover_cats(&txn.cats).map(Cover)
    }

    /// Re-covers every transaction and sets each usage to the number of
    /// covers it appears in.
    pub fn recompute_usages(&mut self, db: &Database) -> Result<(), CodecError> {
        self.check_attributes(db)?;
        self.recompute_from_rows(&distinct_rows(db.transactions()))
    }

    pub(crate) fn recompute_from_rows(&mut self, rows: &[DistinctRow]) -> Result<(), CodecError> {
        let mut usage = vec![0u64; self.patterns.len()];
        for row in rows {
            for i in self.cover_cats(&row.cats)? {
                usage[i] += row.count;
            }
        }
        for (p, u) in self.patterns.iter_mut().zip(usage) {
            p.usage = u;
        }
        Ok(())
    }

    /// Code length of one table pattern under the current usages.
    pub fn pattern_code_length(&self, pattern: &Pattern) -> Result<f64, CodecError> {
        let total = self.usage_total();
        if pattern.usage == 0 || total == 0 {
            return Err(CodecError::ZeroUsage(pattern.items.label(&self.attributes)));
        }
        Ok(code_length_bits(pattern.usage, total))
    }

    /// Sum of the code lengths of the patterns covering `txn`.
    pub fn transaction_code_length(&self, txn: &Transaction) -> Result<f64, CodecError> {
        let cover = self.cover(txn)?;
        self.cover_length(&cover)
    }

    pub fn cover_length(&self, cover: &Cover) -> Result<f64, CodecError> {
        cover
            .patterns(self)
            .map(|p| self.pattern_code_length(p))
            .sum()
    }

    /// `L(DB | PT)`: the sum of all transaction code lengths.
    pub fn database_length(&self, db: &Database) -> Result<f64, CodecError> {
        self.check_attributes(db)?;
        db.transactions()
            .iter()
            .map(|t| self.transaction_code_length(t))
            .sum()
    }

    /// `L(PT)`: code lengths of all in-use patterns plus the cost of the
    /// singleton alphabet, `sum_i -r_i log2(r_i / c)`.
    pub fn table_length(&self) -> f64 {
        self.patterns_length() + self.singleton_alphabet_length()
    }

    fn patterns_length(&self) -> f64 {
        let total = self.usage_total();
        self.patterns
            .iter()
            .filter(|p| p.usage > 0)
            .map(|p| code_length_bits(p.usage, total))
            .sum()
    }

    fn singleton_alphabet_length(&self) -> f64 {
        let c = self.total_singleton_count as f64;
        self.singleton_counts
            .values()
            .filter(|&&r| r > 0)
            .map(|&r| -(r as f64) * (r as f64 / c).log2())
            .sum()
    }

    /// `L(DB | PT) + L(PT)`, covering every transaction.
    pub fn total_length(&self, db: &Database) -> Result<f64, CodecError> {
        Ok(self.database_length(db)? + self.table_length())
    }

    /// `L(DB | PT) + L(PT)` computed as `sum usage * code length`. Equal to
    /// [`total_length`](Self::total_length) whenever usages are current.
    pub fn encoded_length(&self) -> f64 {
        let total = self.usage_total();
        let data: f64 = self
            .patterns
            .iter()
            .filter(|p| p.usage > 0)
            .map(|p| p.usage as f64 * code_length_bits(p.usage, total))
            .sum();
        data + self.table_length()
    }
}

/// One candidate trial of the compression loop.
#[derive(Debug, Clone, PartialEq)]
pub struct Trial {
    pub candidate: ItemSet,
    pub support: u64,
    /// Total length with the candidate tentatively in the table.
    pub length: f64,
    pub accepted: bool,
}

#[derive(Debug, Clone)]
pub struct Compression {
    pub table: PatternTable,
    pub initial_length: f64,
    pub final_length: f64,
    pub trials: Vec<Trial>,
}

impl Compression {
    /// `final / initial`.
    pub fn ratio(&self) -> f64 {
        if self.initial_length == 0.0 {
            1.0
        } else {
            self.final_length / self.initial_length
        }
    }

    pub fn accepted(&self) -> impl Iterator<Item = &Trial> {
        self.trials.iter().filter(|t| t.accepted)
    }
}

/// Mines candidates and runs [`compress_with_candidates`].
pub fn compress(db: &Database, mining: &MiningConfig) -> Result<Compression, CodecError> {
    if db.is_empty() {
        return Err(CodecError::EmptyDatabase);
    }
    let candidates = frequent_itemsets(db, mining)?;
    compress_with_candidates(db, &candidates)
}

/// Starting from the singleton table, tries each candidate once in the given
/// order: insert, re-cover, and keep it only if the total length strictly
/// drops. Multi-item patterns left without usage by an accepted step are
/// pruned.
pub fn compress_with_candidates(
    db: &Database,
    candidates: &[FrequentItemset],
) -> Result<Compression, CodecError> {
    let mut table = PatternTable::init(db)?;
    let rows = distinct_rows(db.transactions());
    let initial_length = table.encoded_length();
    let mut best = initial_length;
    let mut trials = Vec::with_capacity(candidates.len());

    for cand in candidates {
        let mut trial = table.clone();
        trial.insert(cand.items.clone(), cand.support)?;
        trial.recompute_from_rows(&rows)?;
        let length = trial.encoded_length();
        let accepted = length < best;
        if accepted {
            trial.prune_unused();
            table = trial;
            best = length;
        }
        log::debug!(
            "candidate {} -> {length:.6} bits ({})",
            cand.items.label(db.attributes()),
            if accepted { "accepted" } else { "rejected" }
        );
        trials.push(Trial {
            candidate: cand.items.clone(),
            support: cand.support,
            length,
            accepted,
        });
    }

    Ok(Compression {
        table,
        initial_length,
        final_length: best,
        trials,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::{database_from_rows, three_bridge_example};
    use crate::mining::MiningConfig;
    use proptest::prelude::*;

    const EPS: f64 = 1e-9;

    fn set(db: &Database, s: &str) -> ItemSet {
        ItemSet::parse(s, db.attributes()).unwrap()
    }

    /// The illustrative table: PF_1 = {PB:1,LQ:2,RB:1}, PF_2 = {PB:1,LQ:2},
    /// PF_3 = {RB:2}, plus the remaining singletons.
    fn example_table(db: &Database) -> PatternTable {
        let mut t = PatternTable::init(db).unwrap();
        t.insert(set(db, "PB:1,LQ:2,RB:1"), 4).unwrap();
        t.insert(set(db, "PB:1,LQ:2"), 6).unwrap();
        t.recompute_usages(db).unwrap();
        t
    }

    fn usage(t: &PatternTable, db: &Database, s: &str) -> u64 {
        t.find(&set(db, s)).unwrap().usage
    }

    #[test]
    fn init_counts_singletons() {
        let db = three_bridge_example();
        let t = PatternTable::init(&db).unwrap();
        assert_eq!(t.patterns().len(), 4);
        assert_eq!(t.total_singleton_count(), 18);
        for (s, n) in [("PB:1", 6), ("LQ:2", 6), ("RB:1", 4), ("RB:2", 2)] {
            assert_eq!(usage(&t, &db, s), n);
            assert_eq!(t.singleton_counts()[&set(&db, s).items()[0]], n);
        }
    }

    #[test]
    fn init_small_cases() {
        let db = database_from_rows(&["A", "B"], &[vec![1, 1]]);
        let t = PatternTable::init(&db).unwrap();
        assert_eq!(t.total_singleton_count(), 2);
        assert!(t.patterns().iter().all(|p| p.usage == 1));

        let db = database_from_rows(&["A", "B"], &[vec![3, 1], vec![3, 2], vec![3, 4]]);
        let t = PatternTable::init(&db).unwrap();
        assert_eq!(usage(&t, &db, "A:3"), 3);

        let empty = database_from_rows(&["A"], &[]);
        assert_eq!(PatternTable::init(&empty), Err(CodecError::EmptyDatabase));
    }

    #[test]
    fn covers_match_the_illustration() {
        let db = three_bridge_example();
        let t = example_table(&db);
        let txns = db.transactions();
        let labels = |txn: &Transaction| -> Vec<String> {
            t.cover(txn)
                .unwrap()
                .patterns(&t)
                .map(|p| p.items.label(db.attributes()))
                .collect()
        };
        assert_eq!(labels(&txns[0]), vec!["PB:1,LQ:2,RB:1"]);
        assert_eq!(labels(&txns[4]), vec!["PB:1,LQ:2", "RB:2"]);

        let singles = PatternTable::init(&db).unwrap();
        assert_eq!(singles.cover(&txns[4]).unwrap().parts().len(), 3);
    }

    #[test]
    fn cover_reports_unknown_item() {
        let db = three_bridge_example();
        let t = PatternTable::init(&db).unwrap();
        let other = database_from_rows(&["PB", "LQ", "RB"], &[vec![1, 4, 1]]);
        assert_eq!(
            t.cover(&other.transactions()[0]),
            Err(CodecError::UnknownItem("LQ:4".into()))
        );
    }

    #[test]
    fn recomputed_usages() {
        let db = three_bridge_example();
        let t = example_table(&db);
        assert_eq!(usage(&t, &db, "PB:1,LQ:2,RB:1"), 4);
        assert_eq!(usage(&t, &db, "PB:1,LQ:2"), 2);
        assert_eq!(usage(&t, &db, "RB:2"), 2);
        for s in ["PB:1", "LQ:2", "RB:1"] {
            assert_eq!(usage(&t, &db, s), 0);
        }
        assert_eq!(t.usage_total(), 8);
    }

    #[test]
    fn removing_a_pattern_conserves_coverage() {
        let db = database_from_rows(
            &["A", "B", "C"],
            &[vec![1, 1, 1], vec![1, 1, 2], vec![1, 1, 1], vec![2, 1, 1]],
        );
        let mut t = PatternTable::init(&db).unwrap();
        t.insert(set(&db, "A:1,B:1"), 3).unwrap();
        t.recompute_usages(&db).unwrap();
        assert_eq!(usage(&t, &db, "A:1,B:1"), 3);
        assert_eq!(usage(&t, &db, "A:1"), 0);
        assert_eq!(usage(&t, &db, "B:1"), 1);
        let covered = |t: &PatternTable| -> u64 {
            t.patterns()
                .iter()
                .map(|p| p.usage * p.items.len() as u64)
                .sum()
        };
        assert_eq!(covered(&t), 12);

        t.remove(&set(&db, "A:1,B:1")).unwrap().unwrap();
        t.recompute_usages(&db).unwrap();
        // Each row now covered item by item: usage = raw count.
        assert_eq!(usage(&t, &db, "A:1"), 3);
        assert_eq!(usage(&t, &db, "B:1"), 4);
        assert_eq!(covered(&t), 12);
        assert!(matches!(
            t.remove(&set(&db, "A:1")),
            Err(CodecError::SingletonRemoval(_))
        ));
    }

    #[test]
    fn code_lengths() {
        let db = three_bridge_example();
        let t = example_table(&db);
        let len = |s: &str| t.pattern_code_length(t.find(&set(&db, s)).unwrap());
        assert!((len("PB:1,LQ:2,RB:1").unwrap() - 1.0).abs() < EPS);
        assert!((len("PB:1,LQ:2").unwrap() - 2.0).abs() < EPS);
        assert!((len("RB:2").unwrap() - 2.0).abs() < EPS);
        assert!(matches!(len("PB:1"), Err(CodecError::ZeroUsage(_))));

        let db1 = database_from_rows(&["A"], &[vec![1], vec![1]]);
        let t1 = PatternTable::init(&db1).unwrap();
        assert_eq!(t1.pattern_code_length(&t1.patterns()[0]).unwrap(), 0.0);
    }

    #[test]
    fn transaction_and_database_lengths() {
        let db = three_bridge_example();
        let t = example_table(&db);
        let scores: Vec<f64> = db
            .transactions()
            .iter()
            .map(|x| t.transaction_code_length(x).unwrap())
            .collect();
        for (s, want) in scores.iter().zip([1.0, 1.0, 1.0, 1.0, 4.0, 4.0]) {
            assert!((s - want).abs() < EPS);
        }
        assert!((t.database_length(&db).unwrap() - 12.0).abs() < EPS);

        // Uniform singletons: m items, r_i = 1, c = m.
        let one = database_from_rows(&["A", "B", "C"], &[vec![1, 2, 3]]);
        let t1 = PatternTable::init(&one).unwrap();
        let want = 3.0 * -(1.0f64 / 3.0).log2();
        assert!((t1.transaction_code_length(&one.transactions()[0]).unwrap() - want).abs() < EPS);

        let empty = database_from_rows(&["PB", "LQ", "RB"], &[]);
        assert_eq!(t.database_length(&empty).unwrap(), 0.0);
    }

    #[test]
    fn doubled_database_doubles_data_length() {
        let mut rows = vec![vec![1, 2, 1]; 4];
        rows.extend(vec![vec![1, 2, 2]; 2]);
        let doubled_rows: Vec<Vec<u8>> = rows.iter().chain(rows.iter()).cloned().collect();
        let db2 = database_from_rows(&["PB", "LQ", "RB"], &doubled_rows);
        let mut t = PatternTable::init(&db2).unwrap();
        t.insert(set(&db2, "PB:1,LQ:2,RB:1"), 8).unwrap();
        t.insert(set(&db2, "PB:1,LQ:2"), 12).unwrap();
        t.recompute_usages(&db2).unwrap();
        assert!((t.database_length(&db2).unwrap() - 24.0).abs() < EPS);
    }

    #[test]
    fn table_length_terms() {
        let db = three_bridge_example();
        let t = example_table(&db);
        // Independent evaluation of -sum r log2(r/c) for r = 6,6,4,2; c = 18.
        let alphabet = 34.03910001730775;
        assert!((t.singleton_alphabet_length() - alphabet).abs() < EPS);
        assert!((t.patterns_length() - 5.0).abs() < EPS);
        assert!((t.table_length() - (5.0 + alphabet)).abs() < EPS);
        assert!((t.total_length(&db).unwrap() - (17.0 + alphabet)).abs() < EPS);

        let constant = database_from_rows(&["A"], &vec![vec![2]; 5]);
        assert_eq!(PatternTable::init(&constant).unwrap().singleton_alphabet_length(), 0.0);
    }

    #[test]
    fn attribute_mismatch_is_rejected() {
        let db = three_bridge_example();
        let t = PatternTable::init(&db).unwrap();
        let other = database_from_rows(&["PB", "RB", "LQ"], &[vec![1, 1, 2]]);
        assert!(matches!(
            t.database_length(&other),
            Err(CodecError::AttributeMismatch { .. })
        ));
    }

    #[test]
    fn identical_rows_compress_to_one_pattern() {
        let db = database_from_rows(&["A", "B"], &vec![vec![1, 1]; 20]);
        let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
        assert_eq!(c.trials.len(), 1);
        assert!(c.trials[0].accepted);
        assert!(c.final_length < c.initial_length);
        let pattern = c.table.find(&set(&db, "A:1,B:1")).unwrap();
        assert_eq!(pattern.usage, 20);
        // One pattern in use with probability 1: rows cost nothing.
        assert_eq!(c.table.database_length(&db).unwrap(), 0.0);
        // L0 = 20 rows * 2 bits + table (2 codes of 1 bit + alphabet 40 bits).
        assert!((c.initial_length - 82.0).abs() < EPS);
        assert!((c.final_length - 40.0).abs() < EPS);
    }

    #[test]
    fn no_candidates_keeps_singletons() {
        let db = database_from_rows(&["A", "B"], &[vec![1, 1], vec![2, 2], vec![3, 3]]);
        let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
        assert!(c.trials.is_empty());
        assert_eq!(c.table, PatternTable::init(&db).unwrap());
        assert_eq!(c.final_length, c.initial_length);
        assert!((c.initial_length - c.table.total_length(&db).unwrap()).abs() < EPS);
    }

    #[test]
    fn compress_three_bridge_example() {
        let db = three_bridge_example();
        let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
        assert_eq!(c.trials.len(), 7);
        assert!(c.trials[0].accepted);
        assert!(c.table.find(&set(&db, "PB:1,LQ:2,RB:1")).is_some());
        assert!(c.final_length < c.initial_length);
        assert!((c.initial_length - 76.58797503894245).abs() < EPS);
        assert!((c.final_length - c.table.total_length(&db).unwrap()).abs() < EPS);
    }

    #[test]
    fn compress_rejects_empty() {
        let db = database_from_rows(&["A"], &[]);
        assert!(matches!(
            compress(&db, &MiningConfig::absolute(2)),
            Err(CodecError::EmptyDatabase)
        ));
    }

    fn random_db() -> impl Strategy<Value = Database> {
        (1usize..=4, 1u8..=4).prop_flat_map(|(attrs, cats)| {
            prop::collection::vec(prop::collection::vec(1u8..=cats, attrs), 1..=30).prop_map(
                move |rows| database_from_rows(&["A", "B", "C", "D"][..attrs], &rows),
            )
        })
    }

    proptest! {
        #[test]
        fn compressed_table_invariants(db in random_db(), k in 1u64..=4) {
            let c = compress(&db, &MiningConfig::absolute(k)).unwrap();
            let t = &c.table;

            // Singleton completeness.
            for txn in db.transactions() {
                for item in txn.items() {
                    prop_assert!(t.find(&ItemSet::singleton(item)).is_some());
                }
            }

            // Cover exactness and usage accounting.
            let mut cover_parts = 0u64;
            let mut recount = vec![0u64; t.patterns().len()];
            for txn in db.transactions() {
                let cover = t.cover(txn).unwrap();
                let mut mask = 0u64;
                let mut items = Vec::new();
                for p in cover.patterns(t) {
                    prop_assert_eq!(mask & p.items.attr_mask(), 0);
                    mask |= p.items.attr_mask();
                    items.extend_from_slice(p.items.items());
                }
                prop_assert_eq!(ItemSet::new(items).unwrap(), txn.item_set());
                cover_parts += cover.parts().len() as u64;
                for &i in cover.parts() { recount[i] += 1; }
            }
            prop_assert_eq!(t.usage_total(), cover_parts);
            let usages: Vec<u64> = t.patterns().iter().map(|p| p.usage).collect();
            prop_assert_eq!(usages, recount);

            // Both routes to the total length agree.
            prop_assert!((t.total_length(&db).unwrap() - c.final_length).abs() < 1e-9);

            // Probabilities of in-use patterns sum to one.
            let mass: f64 = t.patterns().iter().filter(|p| p.usage > 0)
                .map(|p| (-t.pattern_code_length(p).unwrap()).exp2()).sum();
            prop_assert!((mass - 1.0).abs() < 1e-9);

            // Monotone acceptance.
            prop_assert!(c.final_length <= c.initial_length);
            let mut best = c.initial_length;
            for trial in &c.trials {
                prop_assert_eq!(trial.accepted, trial.length < best);
                if trial.accepted { best = trial.length; }
            }
            prop_assert_eq!(best, c.final_length);
            prop_assert!(t.non_singletons().all(|p| p.usage > 0));
        }

        #[test]
        fn permutation_and_doubling_invariance(db in random_db(), k in 1u64..=3) {
            let cfg = MiningConfig::absolute(k);
            let base = compress(&db, &cfg).unwrap();
            let (attrs, txns) = db.clone().into_parts();

            let mut shuffled = txns.clone();
            shuffled.reverse();
            shuffled.rotate_left(txns.len() / 3);
            let shuffled = Database::new(attrs.clone(), shuffled).unwrap();
            let other = compress(&shuffled, &cfg).unwrap();
            prop_assert_eq!(&base.table, &other.table);
            prop_assert_eq!(base.final_length, other.final_length);

            // Same table, every row twice: usages double, per-row lengths stay.
            let doubled: Vec<Transaction> = txns.iter().chain(txns.iter()).cloned().collect();
            let doubled = Database::new(attrs, doubled).unwrap();
            let mut t2 = base.table.clone();
            t2.recompute_usages(&doubled).unwrap();
            for txn in db.transactions() {
                let a = base.table.transaction_code_length(txn).unwrap();
                let b = t2.transaction_code_length(txn).unwrap();
                prop_assert!((a - b).abs() < 1e-9);
            }
            let d1 = base.table.database_length(&db).unwrap();
            prop_assert!((t2.database_length(&doubled).unwrap() - 2.0 * d1).abs() < 1e-9);
        }
    }
}
