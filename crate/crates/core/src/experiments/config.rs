use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::Experiment;
use crate::ensembles::{Randomness, Symmetry, UnitaryMode};
use crate::error::{Error, Result};
use crate::sectors::MAX_QUBITS;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum RandomnessMode {
    #[default]
    Keyed,
    Fresh,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Csv,
    Json,
}

/// Acceptance bands used to turn estimates into pass/fail flags.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Standard errors allowed between a Monte-Carlo mean and its reference.
    pub sigma: f64,
    /// Half-width of the accepted window around a target log-log slope.
    pub slope_window: f64,
    /// Ensemble-to-reference ratio below which the strong symmetry counts as unbroken.
    pub ratio_threshold: f64,
    /// Aggregate R1 counts as decayed when at most `absent_factor * r / dim_sector`.
    pub absent_factor: f64,
    /// Absolute tolerance for exact (stderr 0) comparisons.
    pub exact: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self { sigma: 3.0, slope_window: 0.15, ratio_threshold: 0.1, absent_factor: 10.0, exact: 1e-10 }
    }
}

/// Fully resolved experiment parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub experiment: Experiment,
    pub symmetry: Symmetry,
    #[serde(rename = "N")]
    pub n: usize,
    pub r_grid: Vec<usize>,
    pub k: usize,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    pub samples: usize,
    /// Draws used for correlator diagnostics where `samples` drives a cheaper statistic.
    pub diagnostic_samples: usize,
    pub seed: u64,
    pub unitary_mode: UnitaryMode,
    pub randomness: RandomnessMode,
    pub output: Option<PathBuf>,
    pub format: OutputFormat,
    pub workers: usize,
    /// Emit per-record wall time (makes output non-reproducible).
    pub timings: bool,
    #[serde(flatten)]
    pub tolerances: Tolerances,
}

/// Partial configuration as read from a file or command-line flags.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigOverrides {
    pub experiment: Option<Experiment>,
    pub symmetry: Option<Symmetry>,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    pub r_grid: Option<Vec<usize>>,
    pub k: Option<usize>,
    #[serde(rename = "Q")]
    pub q: Option<usize>,
    pub samples: Option<usize>,
    pub diagnostic_samples: Option<usize>,
    pub seed: Option<u64>,
    pub unitary_mode: Option<UnitaryMode>,
    pub randomness: Option<RandomnessMode>,
    pub output: Option<PathBuf>,
    pub format: Option<OutputFormat>,
    pub workers: Option<usize>,
    pub timings: Option<bool>,
    pub sigma: Option<f64>,
    pub slope_window: Option<f64>,
    pub ratio_threshold: Option<f64>,
    pub absent_factor: Option<f64>,
    pub exact: Option<f64>,
}

impl ConfigOverrides {
    pub fn from_json_str(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        Self::from_json_str(&std::fs::read_to_string(path)?)
    }

    /// Fields set in `other` take precedence.
    pub fn merge(self, other: Self) -> Self {
        macro_rules! pick {
            ($($f:ident),*) => { Self { $($f: other.$f.or(self.$f)),* } };
        }
        pick!(
            experiment, symmetry, n, r_grid, k, q, samples, diagnostic_samples, seed, unitary_mode,
            randomness, output, format, workers, timings, sigma, slope_window, ratio_threshold, absent_factor,
            exact
        )
    }
}

impl ExperimentConfig {
    /// Default grid of an experiment.
    pub fn defaults(experiment: Experiment) -> Self {
        let base = Self {
            experiment,
            symmetry: Symmetry::Z2,
            n: 8,
            r_grid: vec![2, 4, 8, 16],
            k: 2,
            q: None,
            samples: 500,
            diagnostic_samples: 200,
            seed: 2024,
            unitary_mode: UnitaryMode::Haar,
            randomness: RandomnessMode::Keyed,
            output: None,
            format: OutputFormat::Csv,
            workers: 1,
            timings: false,
            tolerances: Tolerances::default(),
        };
        match experiment {
            Experiment::R1Decay => base,
            Experiment::Indistinguishability => Self { n: 6, ..base },
            Experiment::U1Pipeline => Self {
                symmetry: Symmetry::U1,
                n: 10,
                q: Some(5),
                r_grid: vec![16],
                samples: 10_000,
                ..base
            },
            Experiment::PurityScaling => Self {
                r_grid: vec![2, 4, 8],
                samples: 201,
                tolerances: Tolerances { slope_window: 0.3, ..Tolerances::default() },
                ..base
            },
            Experiment::Concentration => Self {
                symmetry: Symmetry::U1,
                n: 10,
                q: Some(5),
                r_grid: vec![8],
                samples: 1000,
                ..base
            },
        }
    }

    /// Defaults for the chosen experiment, then `overrides` on top.
    pub fn resolve(experiment: Experiment, overrides: ConfigOverrides) -> Result<Self> {
        if let Some(e) = overrides.experiment {
            if e != experiment {
                return Err(Error::InvalidConfig(format!(
                    "config names experiment {} but {} was requested",
                    e.name(),
                    experiment.name()
                )));
            }
        }
        let mut c = Self::defaults(experiment);
        let o = overrides;
        if let Some(s) = o.symmetry {
            if s != c.symmetry {
                // switching symmetry resets the symmetry-specific defaults
                c.symmetry = s;
                match s {
                    Symmetry::U1 => {
                        c.n = 8;
                        c.q = Some(4);
                        c.r_grid = vec![4, 8, 16];
                        c.samples = 1000;
                    }
                    Symmetry::Z2 => c.q = None,
                }
            }
        }
        if let Some(n) = o.n {
            c.n = n;
            if c.symmetry == Symmetry::U1 && o.q.is_none() {
                c.q = Some(n / 2);
            }
        }
        c.r_grid = o.r_grid.unwrap_or(c.r_grid);
        c.k = o.k.unwrap_or(c.k);
        c.q = o.q.or(c.q);
        c.samples = o.samples.unwrap_or(c.samples);
        c.diagnostic_samples = o.diagnostic_samples.unwrap_or(c.diagnostic_samples);
        c.seed = o.seed.unwrap_or(c.seed);
        c.unitary_mode = o.unitary_mode.unwrap_or(c.unitary_mode);
        c.randomness = o.randomness.unwrap_or(c.randomness);
        c.output = o.output.or(c.output);
        c.format = o.format.unwrap_or(c.format);
        c.workers = o.workers.unwrap_or(c.workers);
        c.timings = o.timings.unwrap_or(c.timings);
        c.tolerances.sigma = o.sigma.unwrap_or(c.tolerances.sigma);
        c.tolerances.slope_window = o.slope_window.unwrap_or(c.tolerances.slope_window);
        c.tolerances.ratio_threshold = o.ratio_threshold.unwrap_or(c.tolerances.ratio_threshold);
        c.tolerances.absent_factor = o.absent_factor.unwrap_or(c.tolerances.absent_factor);
        c.tolerances.exact = o.exact.unwrap_or(c.tolerances.exact);
        c.validate()?;
        Ok(c)
    }

    pub fn randomness(&self) -> Randomness {
        match self.randomness {
            RandomnessMode::Keyed => Randomness::Keyed(self.seed),
            RandomnessMode::Fresh => Randomness::Fresh,
        }
    }

    /// Checks the whole grid against the preconditions of the experiment.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n < 2 || self.n > MAX_QUBITS {
            return bad(format!("N = {} outside 2..={MAX_QUBITS}", self.n));
        }
        if self.r_grid.is_empty() {
            return bad("r_grid is empty".into());
        }
        if self.samples < 2 {
            return bad("at least two samples are needed for a standard error".into());
        }
        if self.workers == 0 {
            return bad("workers must be at least 1".into());
        }
        if !(self.tolerances.sigma > 0.0 && self.tolerances.slope_window > 0.0) {
            return bad("tolerances must be positive".into());
        }
        let max_rank = match self.symmetry {
            Symmetry::Z2 => 1usize << (self.n - 1),
            Symmetry::U1 => 1usize << self.n,
        };
        for &r in &self.r_grid {
            if !r.is_power_of_two() {
                return Err(Error::RankNotPowerOfTwo(r));
            }
            if r > max_rank {
                return Err(Error::RankTooLarge { rank: r, dim: max_rank });
            }
        }
        match self.symmetry {
            Symmetry::Z2 if self.q.is_some() => return bad("ℤ₂ experiments take no Q".into()),
            Symmetry::U1 => match self.q {
                None => return bad("U(1) experiments need Q".into()),
                Some(q) if q > self.n => return Err(Error::ChargeOutOfRange { q, n: self.n }),
                _ => {}
            },
            _ => {}
        }
        if self.unitary_mode != UnitaryMode::Haar && self.symmetry == Symmetry::U1 && self.n > 10 {
            return bad("structured unitaries are limited to N <= 10 for U(1)".into());
        }
        let needs = |want: Symmetry| {
            if self.symmetry != want {
                bad(format!("{} needs the {:?} symmetry", self.experiment.name(), want))
            } else {
                Ok(())
            }
        };
        match self.experiment {
            Experiment::R1Decay => {
                needs(Symmetry::Z2)?;
                if self.n > 8 {
                    return bad("r1_decay supports N <= 8".into());
                }
            }
            Experiment::Indistinguishability => match (self.symmetry, self.k) {
                (Symmetry::Z2, 1 | 2) => {
                    let d = 1usize << (self.n - 1);
                    if d.pow(self.k as u32) > crate::linalg::MAX_DIM {
                        return Err(Error::DimensionTooLarge {
                            dim: d.pow(self.k as u32),
                            cap: crate::linalg::MAX_DIM,
                        });
                    }
                }
                (Symmetry::Z2, 3) => {
                    if self.unitary_mode != UnitaryMode::Haar {
                        return bad("three copies are Monte-Carlo only, with Haar unitaries".into());
                    }
                    let d = 1usize << (self.n - 1);
                    if d.pow(3) > crate::linalg::MAX_DIM {
                        return Err(Error::DimensionTooLarge { dim: d.pow(3), cap: crate::linalg::MAX_DIM });
                    }
                }
                (Symmetry::U1, 2) => {}
                (s, k) => return bad(format!("k = {k} is not supported for {s:?}")),
            },
            Experiment::U1Pipeline => {
                needs(Symmetry::U1)?;
                if self.n > 10 {
                    return bad("u1_pipeline supports N <= 10".into());
                }
                if self.diagnostic_samples < 2 {
                    return bad("diagnostic_samples must be at least 2".into());
                }
            }
            Experiment::PurityScaling => needs(Symmetry::Z2)?,
            Experiment::Concentration => {
                needs(Symmetry::U1)?;
                let d_q = crate::sectors::binomial(self.n, self.q.unwrap_or(0));
                for &r in &self.r_grid {
                    if r >= d_q {
                        log::warn!("r = {r} is not below d_Q = {d_q}; concentration bounds are vacuous");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid() {
        for e in Experiment::ALL {
            ExperimentConfig::defaults(e).validate().unwrap();
        }
    }

    #[test]
    fn overrides_apply_and_validate() {
        let o = ConfigOverrides::from_json_str(r#"{"N": 6, "r_grid": [2, 4], "seed": 9}"#).unwrap();
        let c = ExperimentConfig::resolve(Experiment::R1Decay, o).unwrap();
        assert_eq!((c.n, c.r_grid.clone(), c.seed), (6, vec![2, 4], 9));
        let o = ConfigOverrides { r_grid: Some(vec![3]), ..Default::default() };
        assert!(matches!(ExperimentConfig::resolve(Experiment::R1Decay, o), Err(Error::RankNotPowerOfTwo(3))));
        let o = ConfigOverrides { n: Some(9), ..Default::default() };
        assert!(ExperimentConfig::resolve(Experiment::R1Decay, o).is_err());
        let o = ConfigOverrides { n: Some(8), ..Default::default() };
        let c = ExperimentConfig::resolve(Experiment::Concentration, o).unwrap();
        assert_eq!(c.q, Some(4));
        assert!(ConfigOverrides::from_json_str(r#"{"bogus": 1}"#).is_err());
    }

    #[test]
    fn later_overrides_win() {
        let a = ConfigOverrides { seed: Some(1), samples: Some(10), ..Default::default() };
        let b = ConfigOverrides { seed: Some(2), ..Default::default() };
        let m = a.merge(b);
        assert_eq!((m.seed, m.samples), (Some(2), Some(10)));
    }

    #[test]
    fn switching_symmetry_resets_grid() {
        let o = ConfigOverrides { symmetry: Some(Symmetry::U1), ..Default::default() };
        let c = ExperimentConfig::resolve(Experiment::Indistinguishability, o).unwrap();
        assert_eq!((c.n, c.q, c.r_grid.clone()), (8, Some(4), vec![4, 8, 16]));
    }
}
