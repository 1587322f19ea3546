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

//! Apriori frequent-itemset mining over attribute-qualified items.
//!
//! Produces the candidate list consumed by the compressor: every itemset of
//! two or more items whose support meets the threshold, in canonical order
//! (larger sets first, then higher support, then lexicographic).

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Database, Item, ItemSet, Transaction};
use crate::util::{ceil_count, distinct_rows, DistinctRow};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MiningError {
    #[error("absolute support threshold must be at least 1")]
    ZeroThreshold,
    #[error("fractional support threshold must lie in (0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("cannot parse support threshold {0:?}")]
    Unparseable(String),
}

/// Minimum support, either as a transaction count or a fraction of the
/// database size. Fractions resolve to `max(ceil(f * n), 2)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SupportThreshold {
    Absolute(u64),
    Fraction(f64),
}

impl SupportThreshold {
    pub const FRACTION_FLOOR: u64 = 2;

    pub fn validate(&self) -> Result<(), MiningError> {
        match *self {
            SupportThreshold::Absolute(0) => Err(MiningError::ZeroThreshold),
            SupportThreshold::Fraction(f) if !(f > 0.0 && f <= 1.0) => {
                Err(MiningError::FractionOutOfRange(f))
            }
            _ => Ok(()),
        }
    }

    /// Absolute count for a database of `n` transactions.
    pub fn resolve(&self, n: usize) -> Result<u64, MiningError> {
        self.validate()?;
        Ok(match *self {
            SupportThreshold::Absolute(k) => k,
            SupportThreshold::Fraction(f) => ceil_count(f, n).max(Self::FRACTION_FLOOR),
        })
    }
}

impl Default for SupportThreshold {
    fn default() -> Self {
        SupportThreshold::Fraction(0.05)
    }
}

impl FromStr for SupportThreshold {
    type Err = MiningError;

    /// `"5"` is an absolute count; `"0.05"` and `"5%"` are fractions.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        let bad = || MiningError::Unparseable(s.to_string());
        let t = if let Some(pct) = s.strip_suffix('%') {
            SupportThreshold::Fraction(pct.trim().parse::<f64>().map_err(|_| bad())? / 100.0)
        } else if let Ok(k) = s.parse::<u64>() {
            SupportThreshold::Absolute(k)
        } else {
            SupportThreshold::Fraction(s.parse::<f64>().map_err(|_| bad())?)
        };
        t.validate()?;
        Ok(t)
    }
}

impl fmt::Display for SupportThreshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SupportThreshold::Absolute(k) => write!(f, "{k}"),
            SupportThreshold::Fraction(x) => write!(f, "{x:?}"),
        }
    }
}

/// How support is compared against the resolved threshold.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Comparison {
    /// support >= T
    #[default]
    AtLeast,
    /// support > T
    Above,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct MiningConfig {
    pub threshold: SupportThreshold,
    #[serde(default)]
    pub comparison: Comparison,
}

impl MiningConfig {
    pub fn absolute(k: u64) -> MiningConfig {
        MiningConfig {
            threshold: SupportThreshold::Absolute(k),
            comparison: Comparison::AtLeast,
        }
    }

    /// Smallest support that qualifies on a database of `n` rows.
    pub fn min_support(&self, n: usize) -> Result<u64, MiningError> {
        let t = self.threshold.resolve(n)?;
        Ok(match self.comparison {
            Comparison::AtLeast => t,
            Comparison::Above => t + 1,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct FrequentItemset {
    pub items: ItemSet,
    pub support: u64,
}

impl FrequentItemset {
    /// Canonical candidate order: cardinality desc, support desc, items asc.
    pub fn canonical_cmp(&self, other: &FrequentItemset) -> Ordering {
        other
            .items
            .len()
            .cmp(&self.items.len())
            .then(other.support.cmp(&self.support))
            .then_with(|| self.items.cmp(&other.items))
    }
}

/// Number of transactions containing every item of `itemset`.
pub fn support(itemset: &ItemSet, transactions: &[Transaction]) -> u64 {
    transactions.iter().filter(|t| t.contains(itemset)).count() as u64
}

fn row_support(itemset: &ItemSet, rows: &[DistinctRow]) -> u64 {
    rows.iter()
        .filter(|r| {
            itemset
                .items()
                .iter()
                .all(|it| r.cats[it.attr as usize] == it.cat)
        })
        .map(|r| r.count)
        .sum()
}

/// All itemsets of size >= 2 meeting the threshold, in canonical order.
pub fn frequent_itemsets(
    db: &Database,
    config: &MiningConfig,
) -> Result<Vec<FrequentItemset>, MiningError> {
    let min_support = config.min_support(db.len())?;
    let rows = distinct_rows(db.transactions());

    let mut singles: BTreeMap<Item, u64> = BTreeMap::new();
    for row in &rows {
        for (attr, &cat) in row.cats.iter().enumerate() {
            *singles.entry(Item::new(attr, cat)).or_default() += row.count;
        }
    }
    let mut level: Vec<ItemSet> = singles
        .into_iter()
        .filter(|&(_, s)| s >= min_support)
        .map(|(it, _)| ItemSet::singleton(it))
        .collect();

    let mut out = Vec::new();
    while level.len() > 1 {
        let candidates = join_and_prune(&level);
        let counted: Vec<FrequentItemset> = candidates
            .into_par_iter()
            .map(|items| {
                let support = row_support(&items, &rows);
                FrequentItemset { items, support }
            })
            .filter(|f| f.support >= min_support)
            .collect();
        level = counted.iter().map(|f| f.items.clone()).collect();
        level.sort_unstable();
        out.extend(counted);
    }
    out.sort_by(FrequentItemset::canonical_cmp);
    Ok(out)
}

/// Apriori candidate generation. `level` holds the frequent (k-1)-sets in
/// lexicographic order; two sets sharing their first k-2 items join when
/// their last items belong to different attributes. Candidates with an
/// infrequent (k-1)-subset are dropped.
fn join_and_prune(level: &[ItemSet]) -> Vec<ItemSet> {
    let known: HashSet<&ItemSet> = level.iter().collect();
    let mut candidates = Vec::new();
    for (i, a) in level.iter().enumerate() {
        let (a_prefix, a_last) = a.items().split_at(a.len() - 1);
        for b in &level[i + 1..] {
            let (b_prefix, b_last) = b.items().split_at(b.len() - 1);
            if a_prefix != b_prefix {
                break;
            }
            if a_last[0].attr == b_last[0].attr {
                continue;
            }
            let mut items = a.items().to_vec();
            items.push(b_last[0]);
            let candidate = ItemSet::from_sorted_unchecked(items);
            let all_subsets_frequent = (0..candidate.len()).all(|skip| {
                let sub: Vec<Item> = candidate
                    .items()
                    .iter()
                    .enumerate()
                    .filter(|&(j, _)| j != skip)
                    .map(|(_, &it)| it)
                    .collect();
                known.contains(&ItemSet::from_sorted_unchecked(sub))
            });
            if all_subsets_frequent {
                candidates.push(candidate);
            }
        }
    }
    candidates
}
