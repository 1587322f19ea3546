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

//! End-to-end run: ingest, mine, compress, score and report, with every
//! artifact written to one output directory.

use std::error::Error as StdError;
use std::fmt;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::anomaly::{hour_frequency, report, score_all, top_fraction, ScoredTransaction};
use crate::codec::compress_with_candidates;
use crate::format;
use crate::ingest::{
    aggregate_hourly, build_transactions, parse_records, Direction, Schema, VehicleClass,
};
use crate::mining::{frequent_itemsets, Comparison, MiningConfig, SupportThreshold};

/// Pipeline stage, used to attribute failures.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Mine,
    Compress,
    Score,
    Report,
}

impl Stage {
    pub fn exit_code(self) -> i32 {
        match self {
            Stage::Config => 2,
            Stage::Ingest => 10,
            Stage::Mine => 20,
            Stage::Compress => 30,
            Stage::Score => 40,
            Stage::Report => 50,
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Mine => "mine",
            Stage::Compress => "compress",
            Stage::Score => "score",
            Stage::Report => "report",
        })
    }
}

#[derive(Debug)]
pub struct PipelineError {
    pub stage: Stage,
    pub source: Box<dyn StdError + Send + Sync>,
}

impl PipelineError {
    pub fn new(stage: Stage, source: impl Into<Box<dyn StdError + Send + Sync>>) -> Self {
        PipelineError {
            stage,
            source: source.into(),
        }
    }
}

impl fmt::Display for PipelineError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} stage failed: {}", self.stage, self.source)
    }
}

impl StdError for PipelineError {
    fn source(&self) -> Option<&(dyn StdError + 'static)> {
        Some(self.source.as_ref())
    }
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, PipelineError>;
}

impl<T, E: Into<Box<dyn StdError + Send + Sync>>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, PipelineError> {
        self.map_err(|e| PipelineError::new(stage, e))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub input: PathBuf,
    pub attributes: Vec<String>,
    pub direction: Direction,
    pub vehicle_class: VehicleClass,
    pub threshold: SupportThreshold,
    pub comparison: Comparison,
    pub top_fraction: f64,
    pub top_k: usize,
    pub output_dir: PathBuf,
    pub log_level: String,
    pub schema: Schema,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            input: PathBuf::from("records.csv"),
            attributes: vec!["PB".into(), "LQ".into(), "RB".into()],
            direction: Direction::ToCanada,
            vehicle_class: VehicleClass::Car,
            threshold: SupportThreshold::default(),
            comparison: Comparison::AtLeast,
            top_fraction: 0.05,
            top_k: 3,
            output_dir: PathBuf::from("out"),
            log_level: "info".into(),
            schema: Schema::default(),
        }
    }
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<RunConfig, toml::de::Error> {
        toml::from_str(text)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    pub fn mining(&self) -> MiningConfig {
        MiningConfig {
            threshold: self.threshold,
            comparison: self.comparison,
        }
    }

    pub fn validate(&self) -> Result<(), String> {
        if self.attributes.is_empty() {
            return Err("attribute list is empty".into());
        }
        self.threshold.validate().map_err(|e| e.to_string())?;
        if !(self.top_fraction > 0.0 && self.top_fraction <= 1.0) {
            return Err(format!(
                "top_fraction must lie in (0, 1], got {}",
                self.top_fraction
            ));
        }
        if !self.schema.delimiter.is_ascii() {
            return Err("delimiter must be a single ASCII character".into());
        }
        Ok(())
    }
}

pub const TRANSACTIONS_FILE: &str = "transactions.csv";
pub const DIAGNOSTICS_FILE: &str = "ingest_diagnostics.txt";
pub const ITEMSETS_FILE: &str = "itemsets.txt";
pub const PATTERN_TABLE_FILE: &str = "pattern_table.tsv";
pub const ACCEPTANCE_LOG_FILE: &str = "acceptance.log";
pub const SCORES_FILE: &str = "scores.tsv";
pub const REPORT_FILE: &str = "report.txt";
pub const CONFIG_FILE: &str = "config.toml";

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub rows: usize,
    pub excluded_hours: usize,
    pub diagnostics: usize,
    pub candidates: usize,
    pub accepted: usize,
    pub initial_length: f64,
    pub final_length: f64,
    pub top: Option<ScoredTransaction>,
    pub attributes: Vec<String>,
    pub artifacts: Vec<PathBuf>,
}

impl RunSummary {
    pub fn ratio(&self) -> f64 {
        if self.initial_length == 0.0 {
            1.0
        } else {
            self.final_length / self.initial_length
        }
    }
}

impl fmt::Display for RunSummary {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "rows: {} ({} incomplete hours excluded, {} input diagnostics)",
            self.rows, self.excluded_hours, self.diagnostics
        )?;
        writeln!(
            f,
            "candidates: {} tried, {} accepted",
            self.candidates, self.accepted
        )?;
        writeln!(f, "L0: {:.3} bits", self.initial_length)?;
        writeln!(f, "L: {:.3} bits", self.final_length)?;
        writeln!(f, "ratio L/L0: {:.4}", self.ratio())?;
        if let Some(top) = &self.top {
            let cats: Vec<String> = self
                .attributes
                .iter()
                .zip(&top.transaction.cats)
                .map(|(a, c)| format!("{a}:{c}"))
                .collect();
            writeln!(
                f,
                "top anomaly: {} [{}] {:.3} bits",
                top.transaction.timestamp.format(format::HOUR_FORMAT),
                cats.join(" "),
                top.score
            )?;
        }
        Ok(())
    }
}

fn create(path: &Path) -> std::io::Result<BufWriter<File>> {
    File::create(path).map(BufWriter::new)
}

/// Runs every stage and writes all artifacts to `config.output_dir`.
pub fn run_pipeline(config: &RunConfig) -> Result<RunSummary, PipelineError> {
    config.validate().at(Stage::Config)?;
    let out = &config.output_dir;
    fs::create_dir_all(out).at(Stage::Config)?;
    let mut artifacts = Vec::new();
    let path = |name: &str| out.join(name);

    fs::write(path(CONFIG_FILE), config.to_toml()).at(Stage::Config)?;
    artifacts.push(path(CONFIG_FILE));

    // Ingest
    let input = File::open(&config.input)
        .map_err(|e| format!("cannot open {}: {e}", config.input.display()))
        .at(Stage::Ingest)?;
    let parsed = parse_records(std::io::BufReader::new(input), &config.schema).at(Stage::Ingest)?;
    for d in &parsed.diagnostics {
        log::warn!("{}: {d}", config.input.display());
    }
    let hourly = aggregate_hourly(&parsed.records);
    let built = build_transactions(
        &hourly,
        &config.attributes,
        config.direction,
        config.vehicle_class,
    )
    .at(Stage::Ingest)?;
    let db = built.database;
    {
        let mut w = create(&path(DIAGNOSTICS_FILE)).at(Stage::Ingest)?;
        for d in &parsed.diagnostics {
            writeln!(w, "{d}").at(Stage::Ingest)?;
        }
        for msg in &built.warnings {
            writeln!(w, "warning: {msg}").at(Stage::Ingest)?;
        }
        writeln!(w, "excluded_hours: {}", built.excluded_hours).at(Stage::Ingest)?;
        w.flush().at(Stage::Ingest)?;
    }
    artifacts.push(path(DIAGNOSTICS_FILE));
    format::write_transactions(create(&path(TRANSACTIONS_FILE)).at(Stage::Ingest)?, &db)
        .at(Stage::Ingest)?;
    artifacts.push(path(TRANSACTIONS_FILE));
    if db.is_empty() {
        return Err(PipelineError::new(
            Stage::Ingest,
            format!(
                "no complete hours for {} {}",
                config.direction, config.vehicle_class
            ),
        ));
    }
    log::info!("{} transactions, {} hours excluded", db.len(), built.excluded_hours);

    // Mine
    let candidates = frequent_itemsets(&db, &config.mining()).at(Stage::Mine)?;
    format::write_itemsets(
        create(&path(ITEMSETS_FILE)).at(Stage::Mine)?,
        db.attributes(),
        &candidates,
    )
    .at(Stage::Mine)?;
    artifacts.push(path(ITEMSETS_FILE));
    log::info!("{} candidate itemsets", candidates.len());

    // Compress
    let compression = compress_with_candidates(&db, &candidates).at(Stage::Compress)?;
    format::write_pattern_table(
        create(&path(PATTERN_TABLE_FILE)).at(Stage::Compress)?,
        &compression.table,
    )
    .at(Stage::Compress)?;
    format::write_acceptance_log(
        create(&path(ACCEPTANCE_LOG_FILE)).at(Stage::Compress)?,
        db.attributes(),
        &compression,
    )
    .at(Stage::Compress)?;
    artifacts.push(path(PATTERN_TABLE_FILE));
    artifacts.push(path(ACCEPTANCE_LOG_FILE));

    // Score
    let scored = score_all(&db, &compression.table).at(Stage::Score)?;
    format::write_scores(
        create(&path(SCORES_FILE)).at(Stage::Score)?,
        db.attributes(),
        &scored,
    )
    .at(Stage::Score)?;
    artifacts.push(path(SCORES_FILE));

    // Report
    let selected = top_fraction(&scored, config.top_fraction).at(Stage::Report)?;
    let histogram = hour_frequency(selected);
    let k = config.top_k.min(scored.len());
    if k < config.top_k {
        log::warn!("top_k {} clamped to {k} transactions", config.top_k);
    }
    let rep = report(db.attributes(), &scored, selected, histogram, k).at(Stage::Report)?;
    fs::write(path(REPORT_FILE), rep.to_string()).at(Stage::Report)?;
    artifacts.push(path(REPORT_FILE));

    Ok(RunSummary {
        rows: db.len(),
        excluded_hours: built.excluded_hours,
        diagnostics: parsed.diagnostics.len(),
        candidates: compression.trials.len(),
        accepted: compression.accepted().count(),
        initial_length: compression.initial_length,
        final_length: compression.final_length,
        top: scored.first().cloned(),
        attributes: db.attributes().to_vec(),
        artifacts,
    })
}
