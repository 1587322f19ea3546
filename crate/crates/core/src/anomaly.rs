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

//! Anomaly scoring and ranking.
//!
//! A transaction's anomaly score is its code length under the final pattern
//! table: hours matching common patterns encode in few bits, unusual
//! combinations of site categories need many.

use std::cmp::Ordering;
use std::fmt::{self, Write as _};

use chrono::Timelike;
use thiserror::Error;

use crate::codec::{CodecError, PatternTable};
use crate::model::{Database, ItemSet, Transaction};
use crate::util::ceil_count;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnomalyError {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("no scored transactions")]
    Empty,
    #[error("top fraction must lie in (0, 1], got {0}")]
    FractionOutOfRange(f64),
    #[error("top-k of {k} exceeds the {n} scored transactions")]
    TopKTooLarge { k: usize, n: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredTransaction {
    pub transaction: Transaction,
    /// Covering patterns in selection order.
    pub cover: Vec<ItemSet>,
    /// Code length in bits.
    pub score: f64,
    /// 1-based.
    pub rank: usize,
}

impl ScoredTransaction {
    /// Whether the cover parts are disjoint and together equal the row.
    pub fn cover_is_exact(&self) -> bool {
        let mut mask = 0u64;
        let mut items = Vec::new();
        for part in &self.cover {
            if mask & part.attr_mask() != 0 {
                return false;
            }
            mask |= part.attr_mask();
            items.extend_from_slice(part.items());
        }
        ItemSet::new(items).is_ok_and(|s| s == self.transaction.item_set())
    }
}

/// Ranking order: higher score first, then earlier timestamp.
fn rank_order(a: &ScoredTransaction, b: &ScoredTransaction) -> Ordering {
    b.score
        .total_cmp(&a.score)
        .then(a.transaction.timestamp.cmp(&b.transaction.timestamp))
}

/// Scores every transaction and returns them ranked.
pub fn score_all(
    db: &Database,
    table: &PatternTable,
) -> Result<Vec<ScoredTransaction>, AnomalyError> {
    if table.attributes() != db.attributes() {
        return Err(CodecError::AttributeMismatch {
            table: table.attributes().to_vec(),
            database: db.attributes().to_vec(),
        }
        .into());
    }
    let mut scored = db
        .transactions()
        .iter()
        .map(|txn| {
            let cover = table.cover(txn)?;
            let score = table.cover_length(&cover)?;
            Ok(ScoredTransaction {
                transaction: txn.clone(),
                cover: cover.patterns(table).map(|p| p.items.clone()).collect(),
                score,
                rank: 0,
            })
        })
        .collect::<Result<Vec<_>, CodecError>>()?;
    rank(&mut scored);
    Ok(scored)
}

/// Sorts by rank order and renumbers ranks from 1.
pub fn rank(scored: &mut [ScoredTransaction]) {
    scored.sort_by(rank_order);
    for (i, s) in scored.iter_mut().enumerate() {
        s.rank = i + 1;
    }
}

/// The first `ceil(fraction * n)` entries of a ranked list.
pub fn top_fraction(
    scored: &[ScoredTransaction],
    fraction: f64,
) -> Result<&[ScoredTransaction], AnomalyError> {
    if !(fraction > 0.0 && fraction <= 1.0) {
        return Err(AnomalyError::FractionOutOfRange(fraction));
    }
    if scored.is_empty() {
        return Err(AnomalyError::Empty);
    }
    let k = (ceil_count(fraction, scored.len()) as usize).min(scored.len());
    Ok(&scored[..k])
}

/// Counts per hour of day, 0 to 23.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct HourHistogram {
    pub bins: [u64; 24],
}

impl HourHistogram {
    pub fn total(&self) -> u64 {
        self.bins.iter().sum()
    }

    /// Hour with the highest count; the earliest hour wins ties. `None` when
    /// empty.
    pub fn peak_hour(&self) -> Option<u32> {
        let max = *self.bins.iter().max()?;
        if max == 0 {
            return None;
        }
        self.bins.iter().position(|&b| b == max).map(|h| h as u32)
    }
}

pub fn hour_frequency(selected: &[ScoredTransaction]) -> HourHistogram {
    let mut h = HourHistogram::default();
    for s in selected {
        h.bins[s.transaction.timestamp.hour() as usize] += 1;
    }
    h
}

/// Top-k listing, abnormal set and hour-of-day histogram.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub attributes: Vec<String>,
    pub transactions: usize,
    pub top_k: Vec<ScoredTransaction>,
    pub selected: Vec<ScoredTransaction>,
    pub histogram: HourHistogram,
}

pub const REPORT_HEADER: &str = "# waitmdl report v1";

pub fn report(
    attributes: &[String],
    scored: &[ScoredTransaction],
    selected: &[ScoredTransaction],
    histogram: HourHistogram,
    k: usize,
) -> Result<Report, AnomalyError> {
    if k > scored.len() {
        return Err(AnomalyError::TopKTooLarge {
            k,
            n: scored.len(),
        });
    }
    Ok(Report {
        attributes: attributes.to_vec(),
        transactions: scored.len(),
        top_k: scored[..k].to_vec(),
        selected: selected.to_vec(),
        histogram,
    })
}

impl Report {
    /// Every listed entry has an exact cover of its row.
    pub fn validate(&self) -> bool {
        self.top_k
            .iter()
            .chain(&self.selected)
            .all(ScoredTransaction::cover_is_exact)
    }

    fn write_rows(
        &self,
        out: &mut String,
        rows: &[ScoredTransaction],
        with_cover: bool,
    ) -> fmt::Result {
        write!(out, "rank\ttimestamp")?;
        for a in &self.attributes {
            write!(out, "\t{a}")?;
        }
        write!(out, "\tscore_bits")?;
        if with_cover {
            write!(out, "\tcover")?;
        }
        writeln!(out)?;
        for s in rows {
            write!(
                out,
                "{}\t{}",
                s.rank,
                s.transaction.timestamp.format("%Y-%m-%dT%H:%M")
            )?;
            for c in &s.transaction.cats {
                write!(out, "\t{c}")?;
            }
            write!(out, "\t{:.6}", s.score)?;
            if with_cover {
                let parts: Vec<String> =
                    s.cover.iter().map(|p| p.label(&self.attributes)).collect();
                write!(out, "\t{}", parts.join(" | "))?;
            }
            writeln!(out)?;
        }
        Ok(())
    }
}

impl fmt::Display for Report {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut out = String::new();
        writeln!(out, "{REPORT_HEADER}")?;
        writeln!(out, "attributes\t{}", self.attributes.join(","))?;
        writeln!(out, "transactions\t{}", self.transactions)?;
        writeln!(out, "top_k\t{}", self.top_k.len())?;
        writeln!(out, "selected\t{}", self.selected.len())?;
        writeln!(out, "\n[top_k]")?;
        self.write_rows(&mut out, &self.top_k, true)?;
        writeln!(out, "\n[selected]")?;
        self.write_rows(&mut out, &self.selected, false)?;
        writeln!(out, "\n[hour_histogram]")?;
        writeln!(out, "hour\tcount")?;
        for (h, n) in self.histogram.bins.iter().enumerate() {
            writeln!(out, "{h}\t{n}")?;
        }
        f.write_str(&out)
    }
}
