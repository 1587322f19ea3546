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

//! Text artifacts: transaction files, itemset lists, pattern tables,
//! acceptance logs, score files and raw record files.
//!
//! Every writer is deterministic for a given input.

use std::io::{self, BufRead, Read, Write};

use chrono::NaiveDateTime;
use thiserror::Error;

use crate::anomaly::ScoredTransaction;
use crate::codec::{code_length_bits, Compression, Pattern, PatternTable};
use crate::ingest::{parse_timestamp, WaitTimeRecord};
use crate::mining::FrequentItemset;
use crate::model::{Category, Database, ItemSet, ModelError, Transaction};

#[derive(Debug, Error)]
pub enum FormatError {
    #[error(transparent)]
    Io(#[from] io::Error),
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error(transparent)]
    Model(#[from] ModelError),
}

fn parse_err(line: usize, message: impl Into<String>) -> FormatError {
    FormatError::Parse {
        line,
        message: message.into(),
    }
}

pub const HOUR_FORMAT: &str = "%Y-%m-%dT%H:%M";
pub const PATTERN_TABLE_HEADER: &str = "# waitmdl pattern table v1";
pub const ACCEPTANCE_LOG_HEADER: &str = "# waitmdl acceptance log v1";

fn hour(ts: NaiveDateTime) -> String {
    ts.format(HOUR_FORMAT).to_string()
}

/// `timestamp,<attr>,<attr>...` then one row per hour with category indices.
pub fn write_transactions<W: Write>(mut w: W, db: &Database) -> Result<(), FormatError> {
    writeln!(w, "timestamp,{}", db.attributes().join(","))?;
    for t in db.transactions() {
        write!(w, "{}", hour(t.timestamp))?;
        for c in &t.cats {
            write!(w, ",{c}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_transactions<R: Read>(r: R) -> Result<Database, FormatError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let headers = reader.headers()?.clone();
    if headers.get(0) != Some("timestamp") {
        return Err(parse_err(1, "first column must be `timestamp`"));
    }
    let attributes: Vec<String> = headers.iter().skip(1).map(str::to_string).collect();
    let mut txns = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row?;
        let line = i + 2;
        let ts = parse_timestamp(&row[0])
            .ok_or_else(|| parse_err(line, format!("bad timestamp {:?}", &row[0])))?;
        let cats = row
            .iter()
            .skip(1)
            .map(Category::parse)
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(line, e.to_string()))?;
        txns.push(Transaction::new(ts, cats));
    }
    Ok(Database::new(attributes, txns)?)
}

/// One itemset per line: `attr:cat,attr:cat<TAB>support`.
pub fn write_itemsets<W: Write>(
    mut w: W,
    attributes: &[String],
    itemsets: &[FrequentItemset],
) -> Result<(), FormatError> {
    for f in itemsets {
        writeln!(w, "{}\t{}", f.items.label(attributes), f.support)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_itemsets<R: BufRead>(
    r: R,
    attributes: &[String],
) -> Result<Vec<FrequentItemset>, FormatError> {
    let mut out = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let (items, support) = line
            .split_once('\t')
            .ok_or_else(|| parse_err(i + 1, "expected items<TAB>support"))?;
        out.push(FrequentItemset {
            items: ItemSet::parse(items, attributes).map_err(|e| parse_err(i + 1, e.to_string()))?,
            support: support
                .trim()
                .parse()
                .map_err(|_| parse_err(i + 1, format!("bad support {support:?}")))?,
        });
    }
    Ok(out)
}

/// Pattern table in cover order, one pattern per line:
/// `attr:cat,...<TAB>usage<TAB>code_length_bits<TAB>support`. Zero-usage
/// patterns carry `-` as their code length.
pub fn write_pattern_table<W: Write>(mut w: W, table: &PatternTable) -> Result<(), FormatError> {
    writeln!(w, "{PATTERN_TABLE_HEADER}")?;
    writeln!(w, "# attributes\t{}", table.attributes().join(","))?;
    writeln!(w, "# items<TAB>usage<TAB>code_length_bits<TAB>support")?;
    let total = table.usage_total();
    for p in table.patterns() {
        let len = if p.usage > 0 {
            format!("{:.9}", code_length_bits(p.usage, total))
        } else {
            "-".to_string()
        };
        writeln!(
            w,
            "{}\t{}\t{}\t{}",
            p.items.label(table.attributes()),
            p.usage,
            len,
            p.support
        )?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_pattern_table<R: BufRead>(r: R) -> Result<PatternTable, FormatError> {
    let mut attributes: Option<Vec<String>> = None;
    let mut patterns = Vec::new();
    for (i, line) in r.lines().enumerate() {
        let line = line?;
        let n = i + 1;
        if let Some(comment) = line.strip_prefix('#') {
            if let Some(list) = comment.trim().strip_prefix("attributes") {
                attributes = Some(list.trim().split(',').map(str::to_string).collect());
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let attrs = attributes
            .as_deref()
            .ok_or_else(|| parse_err(n, "pattern before `# attributes` line"))?;
        let cols: Vec<&str> = line.split('\t').collect();
        if cols.len() != 4 {
            return Err(parse_err(n, format!("expected 4 columns, found {}", cols.len())));
        }
        let items = ItemSet::parse(cols[0], attrs).map_err(|e| parse_err(n, e.to_string()))?;
        let number = |s: &str, what: &str| {
            s.trim()
                .parse::<u64>()
                .map_err(|_| parse_err(n, format!("bad {what} {s:?}")))
        };
        patterns.push(Pattern {
            items,
            usage: number(cols[1], "usage")?,
            support: number(cols[3], "support")?,
        });
    }
    let attributes = attributes.ok_or_else(|| parse_err(0, "missing `# attributes` line"))?;
    PatternTable::from_patterns(attributes, patterns).map_err(|e| parse_err(0, e.to_string()))
}

/// `initial`, one `trial` line per candidate, then `final`.
pub fn write_acceptance_log<W: Write>(
    mut w: W,
    attributes: &[String],
    compression: &Compression,
) -> Result<(), FormatError> {
    writeln!(w, "{ACCEPTANCE_LOG_HEADER}")?;
    writeln!(w, "initial\t{:.9}", compression.initial_length)?;
    for (i, t) in compression.trials.iter().enumerate() {
        writeln!(
            w,
            "trial\t{}\t{}\t{}\t{:.9}\t{}",
            i + 1,
            t.candidate.label(attributes),
            t.support,
            t.length,
            if t.accepted { "accepted" } else { "rejected" }
        )?;
    }
    writeln!(w, "final\t{:.9}", compression.final_length)?;
    w.flush()?;
    Ok(())
}

/// Ranked scores, tab-separated:
/// `rank timestamp <attr>... score_bits cover`. Scores are written at full
/// precision; cover parts are joined by ` | `.
pub fn write_scores<W: Write>(
    mut w: W,
    attributes: &[String],
    scored: &[ScoredTransaction],
) -> Result<(), FormatError> {
    writeln!(
        w,
        "rank\ttimestamp\t{}\tscore_bits\tcover",
        attributes.join("\t")
    )?;
    for s in scored {
        write!(w, "{}\t{}", s.rank, hour(s.transaction.timestamp))?;
        for c in &s.transaction.cats {
            write!(w, "\t{c}")?;
        }
        let parts: Vec<String> = s.cover.iter().map(|p| p.label(attributes)).collect();
        writeln!(w, "\t{}\t{}", s.score, parts.join(" | "))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_scores<R: BufRead>(
    r: R,
) -> Result<(Vec<String>, Vec<ScoredTransaction>), FormatError> {
    let mut lines = r.lines();
    let header = lines
        .next()
        .transpose()?
        .ok_or_else(|| parse_err(1, "empty score file"))?;
    let cols: Vec<&str> = header.split('\t').collect();
    let n = cols.len();
    if n < 5 || cols[0] != "rank" || cols[1] != "timestamp" || cols[n - 2] != "score_bits" {
        return Err(parse_err(1, "unexpected score file header"));
    }
    let attributes: Vec<String> = cols[2..n - 2].iter().map(|s| s.to_string()).collect();
    let mut out = Vec::new();
    for (i, line) in lines.enumerate() {
        let line = line?;
        let ln = i + 2;
        if line.trim().is_empty() {
            continue;
        }
        let f: Vec<&str> = line.split('\t').collect();
        if f.len() != n {
            return Err(parse_err(ln, format!("expected {n} columns, found {}", f.len())));
        }
        let bad = |what: &str, v: &str| parse_err(ln, format!("bad {what} {v:?}"));
        let rank = f[0].parse().map_err(|_| bad("rank", f[0]))?;
        let ts = parse_timestamp(f[1]).ok_or_else(|| bad("timestamp", f[1]))?;
        let cats = f[2..n - 2]
            .iter()
            .map(|c| Category::parse(c))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(ln, e.to_string()))?;
        let score = f[n - 2].parse().map_err(|_| bad("score", f[n - 2]))?;
        let cover = f[n - 1]
            .split(" | ")
            .filter(|s| !s.is_empty())
            .map(|p| ItemSet::parse(p, &attributes))
            .collect::<Result<Vec<_>, _>>()
            .map_err(|e| parse_err(ln, e.to_string()))?;
        out.push(ScoredTransaction {
            transaction: Transaction::new(ts, cats),
            cover,
            score,
            rank,
        });
    }
    Ok((attributes, out))
}

/// Raw records in the default input schema.
pub fn write_records<W: Write>(mut w: W, records: &[WaitTimeRecord]) -> Result<(), FormatError> {
    writeln!(w, "timestamp,site,direction,vehicle_class,wait_minutes")?;
    for r in records {
        writeln!(
            w,
            "{},{},{},{},{:.1}",
            hour(r.timestamp),
            r.site,
            r.direction,
            r.vehicle_class,
            r.wait_minutes
        )?;
    }
    w.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anomaly::score_all;
    use crate::codec::compress;
    use crate::fixtures::{database_from_rows, three_bridge_example};
    use crate::ingest::{parse_records, Schema};
    use crate::mining::{frequent_itemsets, MiningConfig};
    use proptest::prelude::*;

    #[test]
    fn transaction_file_layout() {
        let db = three_bridge_example();
        let mut buf = Vec::new();
        write_transactions(&mut buf, &db).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("timestamp,PB,LQ,RB\n2016-08-22T00:00,1,2,1\n"));
        assert_eq!(read_transactions(&buf[..]).unwrap(), db);
    }

    #[test]
    fn transaction_file_errors() {
        assert!(read_transactions("ts,PB\n".as_bytes()).is_err());
        let err = read_transactions("timestamp,PB\n2016-08-22T00:00,9\n".as_bytes()).unwrap_err();
        assert!(matches!(err, FormatError::Parse { line: 2, .. }));
    }

    #[test]
    fn itemset_lines() {
        let db = three_bridge_example();
        let sets = frequent_itemsets(&db, &MiningConfig::absolute(2)).unwrap();
        let mut buf = Vec::new();
        write_itemsets(&mut buf, db.attributes(), &sets).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert_eq!(text.lines().next(), Some("PB:1,LQ:2,RB:1\t4"));
        assert_eq!(read_itemsets(&buf[..], db.attributes()).unwrap(), sets);
    }

    #[test]
    fn pattern_table_reloads_for_scoring() {
        let db = three_bridge_example();
        let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
        let mut buf = Vec::new();
        write_pattern_table(&mut buf, &c.table).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with(PATTERN_TABLE_HEADER));
        let loaded = read_pattern_table(&buf[..]).unwrap();
        assert_eq!(loaded, c.table);
        assert_eq!(score_all(&db, &loaded).unwrap(), score_all(&db, &c.table).unwrap());
    }

    #[test]
    fn pattern_table_rejects_garbage() {
        assert!(read_pattern_table("PB:1\t1\t0\t1\n".as_bytes()).is_err());
        assert!(read_pattern_table("# attributes\tPB\nPB:1\t1\n".as_bytes()).is_err());
        assert!(read_pattern_table("# attributes\tPB\nPB:1\t1\t-\t1\nPB:1\t1\t-\t1\n".as_bytes()).is_err());
    }

    #[test]
    fn acceptance_log_lines() {
        let db = three_bridge_example();
        let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
        let mut buf = Vec::new();
        write_acceptance_log(&mut buf, db.attributes(), &c).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], ACCEPTANCE_LOG_HEADER);
        assert_eq!(lines[1], "initial\t76.587975039");
        assert!(lines[2].starts_with("trial\t1\tPB:1,LQ:2,RB:1\t4\t"));
        assert!(lines[2].ends_with("accepted"));
        assert_eq!(lines.len(), 2 + 7 + 1);
    }

    #[test]
    fn records_file_parses_back() {
        let input = "timestamp,site,direction,vehicle_class,wait_minutes\n\
                     2016-09-05T14:05,LQ,ToCanada,Car,87.0\n";
        let recs = parse_records(input.as_bytes(), &Schema::default()).unwrap().records;
        let mut buf = Vec::new();
        write_records(&mut buf, &recs).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), input);
    }

    proptest! {
        #[test]
        fn scores_round_trip(rows in prop::collection::vec(prop::collection::vec(1u8..=4, 3), 1..25)) {
            let db = database_from_rows(&["PB", "LQ", "RB"], &rows);
            let c = compress(&db, &MiningConfig::absolute(2)).unwrap();
            let scored = score_all(&db, &c.table).unwrap();
            let mut buf = Vec::new();
            write_scores(&mut buf, db.attributes(), &scored).unwrap();
            let (attrs, back) = read_scores(&buf[..]).unwrap();
            prop_assert_eq!(attrs, db.attributes().to_vec());
            prop_assert_eq!(back, scored);

            let mut tbuf = Vec::new();
            write_pattern_table(&mut tbuf, &c.table).unwrap();
            prop_assert_eq!(read_pattern_table(&tbuf[..]).unwrap(), c.table);
        }
    }
}
