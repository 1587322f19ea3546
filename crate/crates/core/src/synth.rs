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

//! Seeded synthetic wait-time generator with planted anomalous hours.
//!
//! Each hour of day has a dominant category combination across sites. An
//! hour follows it with probability `dominance`; otherwise one site drifts by
//! one category. Injected hours put heavy delay on most sites at once, a
//! combination the background regime never produces. Five-minute sites emit
//! twelve readings per hour, hourly sites one.

use chrono::{Duration, NaiveDate, NaiveDateTime, Timelike};
use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::ingest::{Direction, VehicleClass, WaitTimeRecord};
use crate::model::{Category, Database, ModelError, Transaction};

#[derive(Debug, Error)]
pub enum SynthError {
    #[error("dominance must lie in [0, 1], got {0}")]
    Dominance(f64),
    #[error("cannot inject {anomalies} anomalies into {hours} hours")]
    TooManyAnomalies { anomalies: usize, hours: usize },
    #[error("need at least one day")]
    NoDays,
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SynthConfig {
    pub seed: u64,
    pub days: u32,
    pub start: NaiveDate,
    /// Probability that an hour follows its dominant combination.
    pub dominance: f64,
    pub anomalies: usize,
    pub sites: Vec<String>,
    /// Sites reporting once per hour instead of every five minutes.
    pub hourly_sites: Vec<String>,
    pub direction: Direction,
    pub vehicle_class: VehicleClass,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            seed: 0,
            days: 30,
            start: NaiveDate::from_ymd_opt(2016, 8, 22).expect("valid date"),
            dominance: 0.95,
            anomalies: 20,
            sites: vec!["PB".into(), "LQ".into(), "RB".into()],
            hourly_sites: vec!["RB".into()],
            direction: Direction::ToCanada,
            vehicle_class: VehicleClass::Car,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SynthData {
    pub records: Vec<WaitTimeRecord>,
    /// The injected hours and their categories, in time order.
    pub injections: Database,
}

/// Dominant category index for `site` at `hour`: quiet nights, a morning
/// peak at the first site, a lighter midday, an evening peak at the second.
fn dominant(site: usize, hour: u32) -> u8 {
    let by_site: [u8; 3] = match hour {
        0..=6 | 22..=23 => [1, 1, 1],
        7..=11 => [3, 2, 2],
        12..=15 => [2, 2, 1],
        16..=19 => [2, 3, 2],
        _ => [2, 1, 1],
    };
    by_site[site % 3]
}

fn anomalous_combo(rng: &mut impl Rng, n: usize) -> Vec<u8> {
    if n == 1 {
        return vec![4];
    }
    let mut cats = vec![4u8; n];
    if rng.gen_bool(2.0 / 3.0) {
        // One site stays clear while the others jam.
        cats[rng.gen_range(0..n)] = 1;
    }
    cats
}

fn sample_wait(rng: &mut impl Rng, cat: u8) -> f64 {
    let (lo, hi) = match cat {
        1 => return 0.0,
        2 => (1.0, 14.0),
        3 => (16.0, 29.0),
        _ => (31.0, 120.0),
    };
    // One decimal, as written to disk.
    (rng.gen_range(lo..hi) * 10.0f64).round() / 10.0
}

pub fn generate_synthetic(config: &SynthConfig) -> Result<SynthData, SynthError> {
    if !(0.0..=1.0).contains(&config.dominance) {
        return Err(SynthError::Dominance(config.dominance));
    }
    if config.days == 0 {
        return Err(SynthError::NoDays);
    }
    let hours = config.days as usize * 24;
    if config.anomalies > hours {
        return Err(SynthError::TooManyAnomalies {
            anomalies: config.anomalies,
            hours,
        });
    }
    let n = config.sites.len();
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let start: NaiveDateTime = config.start.and_hms_opt(0, 0, 0).expect("midnight");

    let mut injected: Vec<usize> = sample(&mut rng, hours, config.anomalies).into_vec();
    injected.sort_unstable();

    let mut records = Vec::new();
    let mut injections = Vec::new();
    let mut next_injection = injected.iter().peekable();
    for h in 0..hours {
        let ts = start + Duration::hours(h as i64);
        let cats: Vec<u8> = if next_injection.peek() == Some(&&h) {
            next_injection.next();
            let cats = anomalous_combo(&mut rng, n);
            injections.push(Transaction::new(
                ts,
                cats.iter()
                    .map(|&c| Category::from_index(c).expect("1..=4"))
                    .collect(),
            ));
            cats
        } else {
            let mut cats: Vec<u8> = (0..n).map(|s| dominant(s, ts.hour())).collect();
            if !rng.gen_bool(config.dominance) {
                let s = rng.gen_range(0..n);
                cats[s] = match cats[s] {
                    1 => 2,
                    3 => 2,
                    c => {
                        if rng.gen_bool(0.5) {
                            c - 1
                        } else {
                            c + 1
                        }
                    }
                };
            }
            cats
        };

        for (s, site) in config.sites.iter().enumerate() {
            let readings = if config.hourly_sites.contains(site) { 1 } else { 12 };
            for k in 0..readings {
                records.push(WaitTimeRecord {
                    timestamp: ts + Duration::minutes(5 * k),
                    site: site.clone(),
                    direction: config.direction,
                    vehicle_class: config.vehicle_class,
                    wait_minutes: sample_wait(&mut rng, cats[s]),
                });
            }
        }
    }
    Ok(SynthData {
        records,
        injections: Database::new(config.sites.clone(), injections)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ingest::{aggregate_hourly, build_transactions};

    fn hourly_db(cfg: &SynthConfig, data: &SynthData) -> Database {
        build_transactions(
            &aggregate_hourly(&data.records),
            &cfg.sites,
            cfg.direction,
            cfg.vehicle_class,
        )
        .unwrap()
        .database
    }

    #[test]
    fn manifest_size_matches_injections() {
        let cfg = SynthConfig::default();
        let data = generate_synthetic(&cfg).unwrap();
        assert_eq!(data.injections.len(), 20);
        // 720 hours: PB and LQ every five minutes, RB hourly.
        assert_eq!(data.records.len(), 720 * 25);
    }

    #[test]
    fn injected_hours_round_trip_through_ingest() {
        let cfg = SynthConfig {
            seed: 3,
            ..SynthConfig::default()
        };
        let data = generate_synthetic(&cfg).unwrap();
        let db = hourly_db(&cfg, &data);
        assert_eq!(db.len(), 720);
        for inj in data.injections.transactions() {
            let row = db
                .transactions()
                .iter()
                .find(|t| t.timestamp == inj.timestamp)
                .unwrap();
            assert_eq!(row.cats, inj.cats);
        }
    }

    #[test]
    fn full_dominance_without_injections_is_periodic() {
        let cfg = SynthConfig {
            dominance: 1.0,
            anomalies: 0,
            ..SynthConfig::default()
        };
        let data = generate_synthetic(&cfg).unwrap();
        assert!(data.injections.is_empty());
        let db = hourly_db(&cfg, &data);
        for t in db.transactions() {
            let want: Vec<u8> = (0..3).map(|s| dominant(s, t.timestamp.hour())).collect();
            let got: Vec<u8> = t.cats.iter().map(|c| c.index()).collect();
            assert_eq!(got, want);
        }
    }

    #[test]
    fn same_seed_same_output() {
        let cfg = SynthConfig {
            seed: 42,
            ..SynthConfig::default()
        };
        let a = generate_synthetic(&cfg).unwrap();
        let b = generate_synthetic(&cfg).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.injections, b.injections);
        let c = generate_synthetic(&SynthConfig { seed: 43, ..cfg }).unwrap();
        assert_ne!(a.records, c.records);
    }

    #[test]
    fn rejects_bad_config() {
        let bad = SynthConfig {
            dominance: 1.5,
            ..SynthConfig::default()
        };
        assert!(matches!(generate_synthetic(&bad), Err(SynthError::Dominance(_))));
        let bad = SynthConfig {
            days: 1,
            anomalies: 25,
            ..SynthConfig::default()
        };
        assert!(matches!(
            generate_synthetic(&bad),
            Err(SynthError::TooManyAnomalies { .. })
        ));
    }
}
