use super::record::{Check, ResultRecord};
use super::stats::loglog_slope;
use super::{timed, RunContext};
use crate::diagnostics::swap_test_from_purity;
use crate::ensembles::rng::domain;
use crate::ensembles::{EnsembleSampler, EnsembleSpec};
use crate::error::{Error, Result};
use crate::experiments::ExperimentConfig;
use crate::linalg::purity;

/// Separation, in standard errors of the SWAP estimate, that counts as distinguishing.
pub const SEPARATION_SIGMAS: f64 = 3.0;

/// Upper limit on the shot search.
pub const MAX_SHOTS: u64 = 1 << 40;

/// Shots for which `P1 - P0` equals `SEPARATION_SIGMAS` binomial standard errors
/// of the SWAP estimate at purity `P1` (variance `(1 - P1^2)/n`).
pub fn analytic_shots(p1: f64, p0: f64) -> f64 {
    SEPARATION_SIGMAS.powi(2) * (1.0 - p1 * p1) / (p1 - p0).powi(2)
}

/// Standard error of `2f - 1` with half a pseudo-count on each outcome, so that
/// all-success or all-failure runs keep a nonzero spread.
pub fn smoothed_stderr(estimate: f64, shots: u64) -> f64 {
    let n = shots as f64;
    let f = ((estimate + 1.0) / 2.0 * n + 0.5) / (n + 1.0);
    2.0 * (f * (1.0 - f) / n).sqrt()
}

pub fn run_purity_scaling(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let ctx = RunContext::new(config);
    let n = config.n;
    let p0 = 2.0 / (1u64 << n) as f64;
    let trials = config.samples;
    if trials >= 1 << 20 {
        return Err(Error::InvalidConfig("purity_scaling supports fewer than 2^20 trials".into()));
    }
    let mut records = Vec::new();
    let mut curve = Vec::new();
    let mut analytic_curve = Vec::new();

    for (idx, &r) in config.r_grid.iter().enumerate() {
        timed(&mut records, |out| {
            let params = ctx.params(Some(r));
            let label = idx as u64;
            let spec = EnsembleSpec::z2(n, r, config.unitary_mode, ctx.randomness(label))?;
            let rho = EnsembleSampler::new(spec)?.factor(0)?.density()?;
            let p1 = purity(&rho);
            out.push(ResultRecord::exact(
                ctx.name(),
                params.clone(),
                "state_purity",
                p1,
                Some(1.0 / r as f64),
                Check::Absolute { tol: config.tolerances.exact },
            ));
            if (p1 - p0).abs() <= config.tolerances.exact {
                out.push(ResultRecord::exact(
                    ctx.name(),
                    params,
                    "shots_to_3sigma",
                    f64::INFINITY,
                    None,
                    Check::Degenerate,
                ));
                return Ok(());
            }
            let analytic = analytic_shots(p1, p0);
            // median z over `trials` independent SWAP tests with `shots` shots each
            let median_z = |shots: u64| -> Result<f64> {
                let mut z = ctx.map(trials, |t| {
                    let mut rng = ctx.stream(domain::SWAP, label, (shots << 20) | t);
                    let (estimate, _) = swap_test_from_purity(p1, shots, &mut rng)?;
                    Ok((estimate - p0) / smoothed_stderr(estimate, shots))
                })?;
                z.sort_by(f64::total_cmp);
                Ok(z[z.len() / 2])
            };
            let separated = |shots: u64| median_z(shots).map(|z| z >= SEPARATION_SIGMAS);
            let mut hi = 1u64;
            while !separated(hi)? {
                hi *= 2;
                if hi > MAX_SHOTS {
                    return Err(Error::InvalidConfig(format!("no separation within {MAX_SHOTS} shots")));
                }
            }
            let mut lo = hi / 2;
            while hi - lo > 1 {
                let mid = lo + (hi - lo) / 2;
                if separated(mid)? {
                    hi = mid;
                } else {
                    lo = mid;
                }
            }
            let empirical = hi as f64;
            // shots scale as z^-2; the sample median of unit-variance z has sd ~ sqrt(pi/2)/sqrt(T)
            let stderr = empirical * 2.0 * (std::f64::consts::PI / 2.0).sqrt()
                / (SEPARATION_SIGMAS * (trials as f64).sqrt());
            out.push(ResultRecord::exact(
                ctx.name(),
                params.clone(),
                "analytic_shots_to_3sigma",
                analytic,
                None,
                Check::Informational,
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                format!("{params};trials={trials}"),
                "shots_to_3sigma",
                empirical,
                stderr,
                Some(analytic),
                Check::InWindow { lo: analytic / 2.0, hi: 2.0 * analytic },
            ));
            curve.push((r as f64, empirical));
            analytic_curve.push((r as f64, analytic));
            Ok(())
        })?;
    }

    timed(&mut records, |out| {
        if curve.len() < 2 {
            return Ok(());
        }
        let grid = format!(
            "N={n};r={};trials={trials}",
            curve.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join("|")
        );
        let split = |c: &[(f64, f64)]| -> (Vec<f64>, Vec<f64>) { c.iter().copied().unzip() };
        let (x, y) = split(&curve);
        let (slope, se) = loglog_slope(&x, &y)?;
        let (xa, ya) = split(&analytic_curve);
        let (analytic_slope, _) = loglog_slope(&xa, &ya)?;
        let w = config.tolerances.slope_window;
        out.push(ResultRecord::exact(
            ctx.name(),
            grid.clone(),
            "analytic_loglog_slope_shots_vs_r",
            analytic_slope,
            None,
            Check::Informational,
        ));
        out.push(ResultRecord::new(
            ctx.name(),
            grid,
            "loglog_slope_shots_vs_r",
            slope,
            se,
            Some(2.0),
            Check::InWindow { lo: 2.0 - w, hi: 2.0 + w },
        ));
        Ok(())
    })?;
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ConfigOverrides, Experiment};

    #[test]
    fn analytic_shots_formula() {
        // P1 = 1/2, P0 = 0: 9 * 0.75 / 0.25
        assert!((analytic_shots(0.5, 0.0) - 27.0).abs() < 1e-12);
    }

    #[test]
    fn full_rank_is_flagged_degenerate() {
        let o = ConfigOverrides { n: Some(4), r_grid: Some(vec![8]), samples: Some(11), ..Default::default() };
        let records = run_purity_scaling(&ExperimentConfig::resolve(Experiment::PurityScaling, o).unwrap()).unwrap();
        let shots = records.iter().find(|r| r.statistic == "shots_to_3sigma").unwrap();
        assert!(shots.estimate.is_infinite());
        assert_eq!(shots.check, Check::Degenerate);
        assert!(shots.pass);
    }

    #[test]
    fn empirical_shots_track_analytic() {
        let o = ConfigOverrides { n: Some(6), r_grid: Some(vec![2, 4]), samples: Some(101), ..Default::default() };
        let records = run_purity_scaling(&ExperimentConfig::resolve(Experiment::PurityScaling, o).unwrap()).unwrap();
        for r in records.iter().filter(|r| r.statistic == "shots_to_3sigma") {
            assert!(r.pass, "{r:?}");
            assert!(r.stderr > 0.0);
        }
    }
}
