//! Seeded, parallel Monte-Carlo experiments producing flat result records.

mod concentration;
pub mod config;
mod indistinguishability;
mod purity_scaling;
mod r1_decay;
pub mod record;
pub mod stats;
mod u1_pipeline;

use std::time::Instant;

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use concentration::run_concentration;
pub use config::{ConfigOverrides, ExperimentConfig, OutputFormat, RandomnessMode, Tolerances};
pub use indistinguishability::run_indistinguishability;
pub use purity_scaling::run_purity_scaling;
pub use r1_decay::run_r1_decay;
pub use record::{emit_results, format_number, write_results, Check, ResultRecord};
pub use u1_pipeline::run_u1_pipeline;

use crate::ensembles::rng::{mix64, stream_rng};
use crate::ensembles::Randomness;
use crate::error::{Error, Result};

/// Tolerance on symmetry residuals of individual draws.
pub const RESIDUAL_TOLERANCE: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Experiment {
    R1Decay,
    Indistinguishability,
    U1Pipeline,
    PurityScaling,
    Concentration,
}

impl Experiment {
    pub const ALL: [Experiment; 5] = [
        Experiment::R1Decay,
        Experiment::Indistinguishability,
        Experiment::U1Pipeline,
        Experiment::PurityScaling,
        Experiment::Concentration,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Experiment::R1Decay => "r1_decay",
            Experiment::Indistinguishability => "indistinguishability",
            Experiment::U1Pipeline => "u1_pipeline",
            Experiment::PurityScaling => "purity_scaling",
            Experiment::Concentration => "concentration",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            Experiment::R1Decay => "Monte-Carlo R1 of low-rank Z2 ensembles vs exact 2-design values and Markov tails",
            Experiment::Indistinguishability => "trace distance of k-copy ensemble moments from the symmetric reference",
            Experiment::U1Pipeline => "charge statistics, acceptance and postselected correlators of U(1) ensembles",
            Experiment::PurityScaling => "SWAP-test shots needed to tell purity 1/r from the reference purity",
            Experiment::Concentration => "trace and purity concentration of the projected U(1) state",
        }
    }
}

impl std::str::FromStr for Experiment {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Experiment::ALL
            .into_iter()
            .find(|e| e.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment '{s}'")))
    }
}

impl std::fmt::Display for Experiment {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// Validates the configuration, then dispatches.
pub fn run_experiment(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    match config.experiment {
        Experiment::R1Decay => run_r1_decay(config),
        Experiment::Indistinguishability => run_indistinguishability(config),
        Experiment::U1Pipeline => run_u1_pipeline(config),
        Experiment::PurityScaling => run_purity_scaling(config),
        Experiment::Concentration => run_concentration(config),
    }
}

/// Seed bookkeeping shared by the runners.
pub(crate) struct RunContext<'a> {
    pub config: &'a ExperimentConfig,
    seed: u64,
}

impl<'a> RunContext<'a> {
    pub fn new(config: &'a ExperimentConfig) -> Self {
        let seed = match config.randomness {
            RandomnessMode::Keyed => config.seed,
            RandomnessMode::Fresh => rand::rng().random(),
        };
        log::info!("{}: master seed {seed}", config.experiment.name());
        Self { config, seed }
    }

    fn sub_seed(&self, label: u64) -> u64 {
        mix64(self.seed ^ mix64(label))
    }

    /// Ensemble randomness for grid point `label`.
    pub fn randomness(&self, label: u64) -> Randomness {
        match self.config.randomness {
            RandomnessMode::Keyed => Randomness::Keyed(self.sub_seed(label)),
            RandomnessMode::Fresh => Randomness::Fresh,
        }
    }

    /// Stream `index` of `domain` at grid point `label`.
    pub fn stream(&self, domain: u64, label: u64, index: u64) -> ChaCha8Rng {
        stream_rng(self.sub_seed(label), domain, index)
    }

    pub fn map<T: Send>(&self, count: usize, f: impl Fn(u64) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
        stats::map_indexed(count as u64, self.config.workers, f)
    }

    pub fn name(&self) -> &'static str {
        self.config.experiment.name()
    }

    pub fn params(&self, r: Option<usize>) -> String {
        let c = self.config;
        let mut p = format!("N={}", c.n);
        if let Some(q) = c.q {
            p.push_str(&format!(";Q={q}"));
        }
        if let Some(r) = r {
            p.push_str(&format!(";r={r}"));
        }
        p.push_str(&format!(";mode={}", c.unitary_mode.name()));
        p
    }
}

/// Runs `body`, stamping the records it appends with the elapsed time.
pub(crate) fn timed(
    records: &mut Vec<ResultRecord>,
    body: impl FnOnce(&mut Vec<ResultRecord>) -> Result<()>,
) -> Result<()> {
    let start = Instant::now();
    let first = records.len();
    body(records)?;
    let ms = start.elapsed().as_secs_f64() * 1e3;
    for r in &mut records[first..] {
        r.wall_time_ms = ms;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for e in Experiment::ALL {
            assert_eq!(e.name().parse::<Experiment>().unwrap(), e);
            assert_eq!(serde_json::to_string(&e).unwrap(), format!("\"{}\"", e.name()));
        }
        assert!("nope".parse::<Experiment>().is_err());
    }
}
