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

//! Raw wait-time parsing, hourly aggregation, discretization and assembly of
//! aligned multi-site transactions.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use chrono::{DateTime, NaiveDateTime, Timelike};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{validate_attributes, Category, Database, ModelError, Transaction};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("cannot read input: {0}")]
    Read(#[from] csv::Error),
    #[error("missing mandatory column {0:?}")]
    MissingColumn(String),
    #[error("wait time must be a non-negative number, got {0}")]
    InvalidWait(f64),
    #[error("attribute {0:?} has no records for the selected direction and vehicle class")]
    UnknownAttribute(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Direction {
    ToUS,
    ToCanada,
}

impl FromStr for Direction {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize(s).as_str() {
            "tous" | "us" => Ok(Direction::ToUS),
            "tocanada" | "canada" | "toca" => Ok(Direction::ToCanada),
            _ => Err(format!("unknown direction {s:?}")),
        }
    }
}

impl fmt::Display for Direction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Direction::ToUS => "ToUS",
            Direction::ToCanada => "ToCanada",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum VehicleClass {
    Car,
    Truck,
}

impl FromStr for VehicleClass {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match normalize(s).as_str() {
            "car" | "cars" | "passenger" => Ok(VehicleClass::Car),
            "truck" | "trucks" | "commercial" => Ok(VehicleClass::Truck),
            _ => Err(format!("unknown vehicle class {s:?}")),
        }
    }
}

impl fmt::Display for VehicleClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            VehicleClass::Car => "Car",
            VehicleClass::Truck => "Truck",
        })
    }
}

fn normalize(s: &str) -> String {
    s.trim()
        .chars()
        .filter(|c| !matches!(c, '-' | '_' | ' '))
        .flat_map(char::to_lowercase)
        .collect()
}

/// One raw observation.
#[derive(Debug, Clone, PartialEq)]
pub struct WaitTimeRecord {
    pub timestamp: NaiveDateTime,
    pub site: String,
    pub direction: Direction,
    pub vehicle_class: VehicleClass,
    pub wait_minutes: f64,
}

/// Column mapping for delimiter-separated input.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default)]
pub struct Schema {
    pub delimiter: char,
    pub timestamp: String,
    pub site: String,
    pub direction: String,
    pub vehicle_class: String,
    pub wait_minutes: String,
}

impl Default for Schema {
    fn default() -> Self {
        Schema {
            delimiter: ',',
            timestamp: "timestamp".into(),
            site: "site".into(),
            direction: "direction".into(),
            vehicle_class: "vehicle_class".into(),
            wait_minutes: "wait_minutes".into(),
        }
    }
}

/// A non-fatal problem tied to an input line (1-based, header is line 1).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Diagnostic {
    pub line: u64,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "line {}: {}", self.line, self.message)
    }
}

#[derive(Debug, Clone, Default)]
pub struct ParsedRecords {
    pub records: Vec<WaitTimeRecord>,
    pub diagnostics: Vec<Diagnostic>,
}

/// Parses ISO-8601 date-times at minute (or second) resolution. An explicit
/// UTC offset is accepted and dropped: all timestamps are read as local time
/// of one configured zone.
pub fn parse_timestamp(s: &str) -> Option<NaiveDateTime> {
    let s = s.trim();
    const FORMATS: [&str; 4] = [
        "%Y-%m-%dT%H:%M",
        "%Y-%m-%dT%H:%M:%S",
        "%Y-%m-%d %H:%M",
        "%Y-%m-%d %H:%M:%S",
    ];
    FORMATS
        .iter()
        .find_map(|f| NaiveDateTime::parse_from_str(s, f).ok())
        .or_else(|| DateTime::parse_from_rfc3339(s).ok().map(|d| d.naive_local()))
}

pub fn parse_records<R: Read>(input: R, schema: &Schema) -> Result<ParsedRecords, IngestError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .delimiter(schema.delimiter as u8)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(input);
    let headers = reader.headers()?.clone();
    let column = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| IngestError::MissingColumn(name.to_string()))
    };
    let cols = [
        column(&schema.timestamp)?,
        column(&schema.site)?,
        column(&schema.direction)?,
        column(&schema.vehicle_class)?,
        column(&schema.wait_minutes)?,
    ];

    let mut parsed: Vec<(u64, WaitTimeRecord)> = Vec::new();
    let mut diagnostics = Vec::new();
    for row in reader.records() {
        let row = match row {
            Ok(row) => row,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                let line = e.position().map_or(0, |p| p.line());
                diagnostics.push(Diagnostic {
                    line,
                    message: e.to_string(),
                });
                continue;
            }
        };
        let line = row.position().map_or(0, |p| p.line());
        match parse_row(&row, &cols) {
            Ok(rec) => parsed.push((line, rec)),
            Err(message) => diagnostics.push(Diagnostic { line, message }),
        }
    }

    // Keep the last occurrence of each (site, direction, class, timestamp).
    type Key = (String, Direction, VehicleClass, NaiveDateTime);
    let mut last_seen: HashMap<Key, u64> = HashMap::new();
    let mut keep = vec![false; parsed.len()];
    for (i, (line, rec)) in parsed.iter().enumerate().rev() {
        let key = (
            rec.site.clone(),
            rec.direction,
            rec.vehicle_class,
            rec.timestamp,
        );
        match last_seen.get(&key) {
            Some(&winner) => diagnostics.push(Diagnostic {
                line: *line,
                message: format!(
                    "duplicate record for {} {} {} at {}, superseded by line {}",
                    rec.site,
                    rec.direction,
                    rec.vehicle_class,
                    rec.timestamp.format("%Y-%m-%dT%H:%M"),
                    winner
                ),
            }),
            None => {
                last_seen.insert(key, *line);
                keep[i] = true;
            }
        }
    }
    diagnostics.sort_by_key(|d| d.line);
    let records = parsed
        .into_iter()
        .zip(keep)
        .filter_map(|((_, rec), k)| k.then_some(rec))
        .collect();
    Ok(ParsedRecords {
        records,
        diagnostics,
    })
}

fn parse_row(row: &csv::StringRecord, cols: &[usize; 5]) -> Result<WaitTimeRecord, String> {
    let field = |i: usize| row.get(cols[i]).ok_or_else(|| "missing field".to_string());
    let ts = field(0)?;
    let timestamp = parse_timestamp(ts).ok_or_else(|| format!("bad timestamp {ts:?}"))?;
    let site = field(1)?;
    if site.is_empty() {
        return Err("empty site".into());
    }
    let direction = field(2)?.parse::<Direction>()?;
    let vehicle_class = field(3)?.parse::<VehicleClass>()?;
    let raw = field(4)?;
    let wait_minutes: f64 = raw
        .parse()
        .map_err(|_| format!("bad wait value {raw:?}"))?;
    if !wait_minutes.is_finite() {
        return Err(format!("non-finite wait {raw:?}"));
    }
    if wait_minutes < 0.0 {
        return Err(format!("negative wait {raw:?}"));
    }
    Ok(WaitTimeRecord {
        timestamp,
        site: site.to_string(),
        direction,
        vehicle_class,
        wait_minutes,
    })
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct HourKey {
    pub site: String,
    pub direction: Direction,
    pub vehicle_class: VehicleClass,
    pub hour: NaiveDateTime,
}

pub fn truncate_to_hour(ts: NaiveDateTime) -> NaiveDateTime {
    ts.date()
        .and_hms_opt(ts.hour(), 0, 0)
        .expect("hour of a valid timestamp is valid")
}

/// Mean wait per (site, direction, class, hour). Hours without records are
/// absent.
pub fn aggregate_hourly(records: &[WaitTimeRecord]) -> BTreeMap<HourKey, f64> {
    struct Acc {
        sum: f64,
        n: u32,
        min: f64,
        max: f64,
    }
    let mut acc: BTreeMap<HourKey, Acc> = BTreeMap::new();
    for r in records {
        let key = HourKey {
            site: r.site.clone(),
            direction: r.direction,
            vehicle_class: r.vehicle_class,
            hour: truncate_to_hour(r.timestamp),
        };
        let a = acc.entry(key).or_insert(Acc {
            sum: 0.0,
            n: 0,
            min: f64::INFINITY,
            max: f64::NEG_INFINITY,
        });
        a.sum += r.wait_minutes;
        a.n += 1;
        a.min = a.min.min(r.wait_minutes);
        a.max = a.max.max(r.wait_minutes);
    }
    // Rounding in the sum can push the quotient just outside [min, max].
    acc.into_iter()
        .map(|(k, a)| (k, (a.sum / a.n as f64).clamp(a.min, a.max)))
        .collect()
}

/// Maps a mean wait to its category: 0 is no waiting, (0, 15] slight delay,
/// (15, 30] delay, above 30 heavy delay.
pub fn discretize(mean_wait: f64) -> Result<Category, IngestError> {
    if mean_wait.is_nan() || mean_wait < 0.0 {
        return Err(IngestError::InvalidWait(mean_wait));
    }
    Ok(if mean_wait == 0.0 {
        Category::NoWaiting
    } else if mean_wait <= 15.0 {
        Category::SlightDelay
    } else if mean_wait <= 30.0 {
        Category::Delay
    } else {
        Category::HeavyDelay
    })
}

#[derive(Debug, Clone)]
pub struct TransactionBuild {
    pub database: Database,
    /// Hours with data for some but not all attributes.
    pub excluded_hours: usize,
    pub warnings: Vec<String>,
}

/// Assembles one transaction per hour in which every attribute has a value.
pub fn build_transactions(
    hourly: &BTreeMap<HourKey, f64>,
    attributes: &[String],
    direction: Direction,
    vehicle_class: VehicleClass,
) -> Result<TransactionBuild, IngestError> {
    validate_attributes(attributes)?;
    let mut hours: BTreeMap<NaiveDateTime, Vec<Option<f64>>> = BTreeMap::new();
    let mut seen = vec![false; attributes.len()];
    for (key, &mean) in hourly {
        if key.direction != direction || key.vehicle_class != vehicle_class {
            continue;
        }
        let Some(pos) = attributes.iter().position(|a| *a == key.site) else {
            continue;
        };
        seen[pos] = true;
        hours
            .entry(key.hour)
            .or_insert_with(|| vec![None; attributes.len()])[pos] = Some(mean);
    }
    if let Some(pos) = seen.iter().position(|s| !s) {
        return Err(IngestError::UnknownAttribute(attributes[pos].clone()));
    }

    let mut transactions = Vec::with_capacity(hours.len());
    let mut excluded_hours = 0;
    for (hour, values) in hours {
        if values.iter().any(Option::is_none) {
            excluded_hours += 1;
            continue;
        }
        let cats = values
            .into_iter()
            .map(|v| discretize(v.unwrap_or_default()))
            .collect::<Result<Vec<_>, _>>()?;
        transactions.push(Transaction::new(hour, cats));
    }
    let mut warnings = Vec::new();
    if transactions.is_empty() {
        let msg = format!(
            "no complete hours for {direction} {vehicle_class}; {excluded_hours} hours excluded"
        );
        log::warn!("{msg}");
        warnings.push(msg);
    }
    let database = Database::new(attributes.to_vec(), transactions)?;
    Ok(TransactionBuild {
        database,
        excluded_hours,
        warnings,
    })
}
