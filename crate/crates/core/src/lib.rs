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

//! Detection of abnormal spatial-temporal patterns in multi-site categorical
//! time series via dictionary-based MDL compression.
//!
//! Raw wait times are averaged per hour, discretized into four delay
//! categories and aligned into one transaction per hour across sites
//! ([`ingest`]). Frequent itemsets ([`mining`]) are offered one by one to a
//! pattern table that keeps a candidate only if it shortens the total
//! description length ([`codec`]). Each hour is then scored by its code
//! length under the final table and ranked ([`anomaly`]).

pub mod anomaly;
pub mod codec;
pub mod fixtures;
pub mod format;
pub mod ingest;
pub mod mining;
pub mod model;
pub mod pipeline;
pub mod synth;
mod util;

pub use anomaly::{
    hour_frequency, rank, report, score_all, top_fraction, AnomalyError, HourHistogram, Report,
    ScoredTransaction,
};
pub use codec::{
    compress, compress_with_candidates, Compression, CodecError, Cover, Pattern, PatternTable,
    Trial,
};
pub use ingest::{
    aggregate_hourly, build_transactions, discretize, parse_records, Direction, IngestError,
    Schema, VehicleClass, WaitTimeRecord,
};
pub use mining::{
    frequent_itemsets, support, Comparison, FrequentItemset, MiningConfig, MiningError,
    SupportThreshold,
};
pub use model::{Category, Database, Item, ItemSet, ModelError, Transaction};
pub use pipeline::{run_pipeline, PipelineError, RunConfig, RunSummary, Stage};
pub use synth::{generate_synthetic, SynthConfig, SynthData};
pub use util::ceil_count;
