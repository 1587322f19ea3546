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

//! Inputs shared by the criterion benchmarks.

use waitmdl::{aggregate_hourly, build_transactions, generate_synthetic, Database, SynthConfig};

/// Hourly transactions from the synthetic generator.
pub fn synthetic_database(days: u32, seed: u64) -> Database {
    let cfg = SynthConfig {
        seed,
        days,
        ..SynthConfig::default()
    };
    let data = generate_synthetic(&cfg).expect("valid generator config");
    build_transactions(
        &aggregate_hourly(&data.records),
        &cfg.sites,
        cfg.direction,
        cfg.vehicle_class,
    )
    .expect("all sites present")
    .database
}
