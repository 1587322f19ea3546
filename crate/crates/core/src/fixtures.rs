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

//! Small reference databases used by tests, benches and documentation.

use chrono::{Duration, NaiveDate, NaiveDateTime};

use crate::model::{Category, Database, Transaction};

/// Midnight, 2016-08-22. Fixture rows are stamped at consecutive hours from
/// here.
pub fn base_time() -> NaiveDateTime {
    NaiveDate::from_ymd_opt(2016, 8, 22)
        .and_then(|d| d.and_hms_opt(0, 0, 0))
        .expect("valid date")
}

/// Builds a database from category-index rows, one row per hour from
/// [`base_time`].
///
/// Panics on indices outside 1..=4 or ragged rows.
pub fn database_from_rows(attributes: &[&str], rows: &[Vec<u8>]) -> Database {
    let txns = rows
        .iter()
        .enumerate()
        .map(|(i, row)| {
            let cats = row
                .iter()
                .map(|&c| Category::from_index(c).expect("category index in 1..=4"))
                .collect();
            Transaction::new(base_time() + Duration::hours(i as i64), cats)
        })
        .collect();
    Database::new(attributes.iter().map(|s| s.to_string()).collect(), txns)
        .expect("well-formed fixture")
}

/// The six-row three-bridge illustration: four hours of
/// `PB:1, LQ:2, RB:1` followed by two hours of `PB:1, LQ:2, RB:2`.
pub fn three_bridge_example() -> Database {
    let mut rows = vec![vec![1, 2, 1]; 4];
    rows.extend(vec![vec![1, 2, 2]; 2]);
    database_from_rows(&["PB", "LQ", "RB"], &rows)
}
