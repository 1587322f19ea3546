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

use std::collections::BTreeMap;

use crate::model::{Category, Transaction};

/// A distinct category row and the number of transactions carrying it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) struct DistinctRow {
    pub cats: Vec<Category>,
    pub count: u64,
}

/// Collapses identical rows. Output is sorted by row, so it does not depend on
/// transaction order.
pub(crate) fn distinct_rows(transactions: &[Transaction]) -> Vec<DistinctRow> {
    let mut counts: BTreeMap<&[Category], u64> = BTreeMap::new();
    for t in transactions {
        *counts.entry(&t.cats).or_default() += 1;
    }
    counts
        .into_iter()
        .map(|(cats, count)| DistinctRow {
            cats: cats.to_vec(),
            count,
        })
        .collect()
}

/// `ceil(fraction * n)`, treating products within 1e-9 of an integer as that
/// integer so that e.g. 0.07 * 100 yields 7 rather than 8.
pub fn ceil_count(fraction: f64, n: usize) -> u64 {
    let x = fraction * n as f64;
    let r = x.round();
    if (x - r).abs() < 1e-9 {
        r as u64
    } else {
        x.ceil() as u64
    }
}
