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

//! `waitmdl` command-line front end.

use std::fs::{self, File};
use std::io::{self, BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand};

use waitmdl::format;
use waitmdl::{
    aggregate_hourly, build_transactions, compress, frequent_itemsets, generate_synthetic,
    hour_frequency, parse_records, report, run_pipeline, score_all, top_fraction, Comparison,
    Database, Direction, MiningConfig, RunConfig, Schema, Stage, SupportThreshold, SynthConfig,
    VehicleClass,
};

#[derive(Parser)]
#[command(name = "waitmdl", version, about = "MDL pattern-table anomaly ranking for multi-site wait times")]
struct Cli {
    /// Log filter (error, warn, info, debug, trace)
    #[arg(long, global = true)]
    log_level: Option<String>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Raw records -> hourly discretized transaction file
    Discretize(DiscretizeArgs),
    /// Transaction file -> frequent itemsets
    Mine(MineArgs),
    /// Transaction file -> pattern table and acceptance log
    Compress(CompressArgs),
    /// Transaction file + pattern table -> ranked scores
    Score(ScoreArgs),
    /// Score file -> top-k, top-fraction and hour-of-day report
    Report(ReportArgs),
    /// Full pipeline from a config file and flag overrides
    Run(RunArgs),
    /// Synthetic records with injected anomalous hours
    Synth(SynthArgs),
}

#[derive(Args)]
struct Scenario {
    /// Comma-separated site list, in transaction column order
    #[arg(long, value_delimiter = ',')]
    attributes: Option<Vec<String>>,
    #[arg(long)]
    direction: Option<Direction>,
    #[arg(long = "class")]
    vehicle_class: Option<VehicleClass>,
}

#[derive(Args)]
struct DiscretizeArgs {
    #[arg(long)]
    input: PathBuf,
    #[command(flatten)]
    scenario: Scenario,
    #[arg(long, default_value_t = ',')]
    delimiter: char,
    /// Defaults to stdout
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct Threshold {
    /// Absolute count ("5") or fraction of rows ("0.05", "5%")
    #[arg(long, default_value = "0.05")]
    threshold: SupportThreshold,
    /// Require support strictly above the threshold
    #[arg(long)]
    strict: bool,
}

impl Threshold {
    fn mining(&self) -> MiningConfig {
        MiningConfig {
            threshold: self.threshold,
            comparison: if self.strict {
                Comparison::Above
            } else {
                Comparison::AtLeast
            },
        }
    }
}

#[derive(Args)]
struct MineArgs {
    #[arg(long)]
    transactions: PathBuf,
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct CompressArgs {
    #[arg(long)]
    transactions: PathBuf,
    #[command(flatten)]
    threshold: Threshold,
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    log: PathBuf,
}

#[derive(Args)]
struct ScoreArgs {
    #[arg(long)]
    transactions: PathBuf,
    #[arg(long)]
    table: PathBuf,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct ReportArgs {
    #[arg(long)]
    scored: PathBuf,
    #[arg(long, default_value_t = 3)]
    top_k: usize,
    #[arg(long, default_value_t = 0.05)]
    top_fraction: f64,
    #[arg(long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct RunArgs {
    /// TOML run configuration; flags override its values
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    input: Option<PathBuf>,
    #[command(flatten)]
    scenario: Scenario,
    #[arg(long)]
    threshold: Option<SupportThreshold>,
    #[arg(long)]
    strict: bool,
    #[arg(long)]
    top_fraction: Option<f64>,
    #[arg(long)]
    top_k: Option<usize>,
    #[arg(long)]
    output_dir: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 30)]
    days: u32,
    #[arg(long, default_value_t = 0.95)]
    dominance: f64,
    #[arg(long, default_value_t = 20)]
    anomalies: usize,
    #[arg(long, default_value = "ToCanada")]
    direction: Direction,
    #[arg(long = "class", default_value = "Car")]
    vehicle_class: VehicleClass,
    /// Raw record file
    #[arg(long)]
    output: PathBuf,
    /// Injected hours, in transaction-file layout
    #[arg(long)]
    manifest: PathBuf,
}

struct Failure {
    stage: Stage,
    error: anyhow::Error,
}

trait AtStage<T> {
    fn at(self, stage: Stage) -> Result<T, Failure>;
}

impl<T, E: Into<anyhow::Error>> AtStage<T> for Result<T, E> {
    fn at(self, stage: Stage) -> Result<T, Failure> {
        self.map_err(|e| Failure {
            stage,
            error: e.into(),
        })
    }
}

fn open(path: &Path) -> anyhow::Result<BufReader<File>> {
    File::open(path)
        .map(BufReader::new)
        .with_context(|| format!("cannot open {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .with_context(|| format!("cannot create {}", path.display()))
}

fn sink(path: Option<&Path>) -> anyhow::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(create(p)?),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

fn load_transactions(path: &Path) -> anyhow::Result<Database> {
    format::read_transactions(open(path)?)
        .with_context(|| format!("cannot read transactions from {}", path.display()))
}

fn discretize(args: &DiscretizeArgs) -> Result<(), Failure> {
    let defaults = RunConfig::default();
    let schema = Schema {
        delimiter: args.delimiter,
        ..Schema::default()
    };
    let parsed = parse_records(open(&args.input).at(Stage::Ingest)?, &schema).at(Stage::Ingest)?;
    for d in &parsed.diagnostics {
        log::warn!("{}: {d}", args.input.display());
    }
    let built = build_transactions(
        &aggregate_hourly(&parsed.records),
        args.scenario.attributes.as_ref().unwrap_or(&defaults.attributes),
        args.scenario.direction.unwrap_or(defaults.direction),
        args.scenario.vehicle_class.unwrap_or(defaults.vehicle_class),
    )
    .at(Stage::Ingest)?;
    log::info!(
        "{} transactions, {} incomplete hours excluded",
        built.database.len(),
        built.excluded_hours
    );
    format::write_transactions(sink(args.output.as_deref()).at(Stage::Ingest)?, &built.database)
        .at(Stage::Ingest)
}

fn mine(args: &MineArgs) -> Result<(), Failure> {
    let db = load_transactions(&args.transactions).at(Stage::Mine)?;
    let sets = frequent_itemsets(&db, &args.threshold.mining()).at(Stage::Mine)?;
    format::write_itemsets(sink(args.output.as_deref()).at(Stage::Mine)?, db.attributes(), &sets)
        .at(Stage::Mine)
}

fn compress_cmd(args: &CompressArgs) -> Result<(), Failure> {
    let db = load_transactions(&args.transactions).at(Stage::Compress)?;
    let c = compress(&db, &args.threshold.mining()).at(Stage::Compress)?;
    format::write_pattern_table(create(&args.table).at(Stage::Compress)?, &c.table)
        .at(Stage::Compress)?;
    format::write_acceptance_log(create(&args.log).at(Stage::Compress)?, db.attributes(), &c)
        .at(Stage::Compress)?;
    println!(
        "L0 {:.3} bits, L {:.3} bits, ratio {:.4}, {} of {} candidates accepted",
        c.initial_length,
        c.final_length,
        c.ratio(),
        c.accepted().count(),
        c.trials.len()
    );
    Ok(())
}

fn score(args: &ScoreArgs) -> Result<(), Failure> {
    let db = load_transactions(&args.transactions).at(Stage::Score)?;
    let table = format::read_pattern_table(open(&args.table).at(Stage::Score)?)
        .with_context(|| format!("cannot read pattern table {}", args.table.display()))
        .at(Stage::Score)?;
    let scored = score_all(&db, &table).at(Stage::Score)?;
    format::write_scores(sink(args.output.as_deref()).at(Stage::Score)?, db.attributes(), &scored)
        .at(Stage::Score)
}

fn report_cmd(args: &ReportArgs) -> Result<(), Failure> {
    let (attributes, mut scored) = format::read_scores(open(&args.scored).at(Stage::Report)?)
        .with_context(|| format!("cannot read scores from {}", args.scored.display()))
        .at(Stage::Report)?;
    waitmdl::rank(&mut scored);
    let selected = top_fraction(&scored, args.top_fraction).at(Stage::Report)?;
    let rep = report(
        &attributes,
        &scored,
        selected,
        hour_frequency(selected),
        args.top_k,
    )
    .at(Stage::Report)?;
    let mut out = sink(args.output.as_deref()).at(Stage::Report)?;
    write!(out, "{rep}").at(Stage::Report)?;
    out.flush().at(Stage::Report)
}

fn run(args: &RunArgs) -> Result<(), Failure> {
    let mut cfg = match &args.config {
        Some(path) => {
            let text = fs::read_to_string(path)
                .with_context(|| format!("cannot read {}", path.display()))
                .at(Stage::Config)?;
            let mut cfg = RunConfig::from_toml(&text)
                .with_context(|| format!("invalid config {}", path.display()))
                .at(Stage::Config)?;
            // Relative paths in the file are relative to the file.
            let base = path.parent().unwrap_or(Path::new(""));
            cfg.input = base.join(&cfg.input);
            cfg.output_dir = base.join(&cfg.output_dir);
            cfg
        }
        None => RunConfig::default(),
    };
    if let Some(v) = &args.input {
        cfg.input = v.clone();
    }
    if let Some(v) = &args.scenario.attributes {
        cfg.attributes = v.clone();
    }
    if let Some(v) = args.scenario.direction {
        cfg.direction = v;
    }
    if let Some(v) = args.scenario.vehicle_class {
        cfg.vehicle_class = v;
    }
    if let Some(v) = args.threshold {
        cfg.threshold = v;
    }
    if args.strict {
        cfg.comparison = Comparison::Above;
    }
    if let Some(v) = args.top_fraction {
        cfg.top_fraction = v;
    }
    if let Some(v) = args.top_k {
        cfg.top_k = v;
    }
    if let Some(v) = &args.output_dir {
        cfg.output_dir = v.clone();
    }
    let summary = run_pipeline(&cfg).map_err(|e| Failure {
        stage: e.stage,
        error: anyhow!(e.source),
    })?;
    print!("{summary}");
    println!("artifacts: {}", cfg.output_dir.display());
    Ok(())
}

fn synth(args: &SynthArgs) -> Result<(), Failure> {
    let cfg = SynthConfig {
        seed: args.seed,
        days: args.days,
        dominance: args.dominance,
        anomalies: args.anomalies,
        direction: args.direction,
        vehicle_class: args.vehicle_class,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg).at(Stage::Config)?;
    format::write_records(create(&args.output).at(Stage::Config)?, &data.records)
        .at(Stage::Config)?;
    format::write_transactions(create(&args.manifest).at(Stage::Config)?, &data.injections)
        .at(Stage::Config)?;
    println!(
        "{} records, {} injected hours",
        data.records.len(),
        data.injections.len()
    );
    Ok(())
}

fn configured_log_level(cli: &Cli) -> String {
    if let Some(level) = &cli.log_level {
        return level.clone();
    }
    if let Command::Run(RunArgs {
        config: Some(path), ..
    }) = &cli.command
    {
        if let Some(cfg) = fs::read_to_string(path)
            .ok()
            .and_then(|t| RunConfig::from_toml(&t).ok())
        {
            return cfg.log_level;
        }
    }
    "warn".into()
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    env_logger::Builder::new()
        .parse_filters(&configured_log_level(&cli))
        .init();
    let result = match &cli.command {
        Command::Discretize(a) => discretize(a),
        Command::Mine(a) => mine(a),
        Command::Compress(a) => compress_cmd(a),
        Command::Score(a) => score(a),
        Command::Report(a) => report_cmd(a),
        Command::Run(a) => run(a),
        Command::Synth(a) => synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            eprintln!("error: {} stage: {:#}", f.stage, f.error);
            ExitCode::from(f.stage.exit_code() as u8)
        }
    }
}
