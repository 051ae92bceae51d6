use nalgebra::DMatrix;

use super::record::{Check, ResultRecord};
use super::stats::{exceedance, mean_estimate};
use super::{timed, RunContext};
use crate::ensembles::{sample_u1_block, EnsembleSpec};
use crate::error::Result;
use crate::experiments::ExperimentConfig;
use crate::linalg::C64;
use crate::sectors::binomial;
use crate::weingarten::{exact_rho_tilde_purity, f_moment_u1};

/// Per-draw statistics of `ρ̃ = c P_Q U Π_r U† P_Q`, `c = d/(r d_Q)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectedStats {
    pub trace: f64,
    pub purity: f64,
    /// `Σ_i δ_i²` where the nonzero spectrum of `ρ̃` is `{1/r + δ_i}`.
    pub deviation: f64,
}

/// Statistics from the `d_Q x r` block `G = P_Q U Π_r`.
pub fn projected_stats(block: &DMatrix<C64>, n: usize, q: usize) -> Result<ProjectedStats> {
    let r = block.ncols();
    let c = (1u64 << n) as f64 / (r as f64 * binomial(n, q) as f64);
    let gram = (block.adjoint() * block) * C64::new(c, 0.0);
    let (eigenvalues, _) = crate::linalg::symmetric_eigen(gram.clone(), false)?;
    let inv_r = 1.0 / r as f64;
    Ok(ProjectedStats {
        trace: gram.trace().re,
        purity: gram.norm_squared(),
        deviation: eigenvalues.iter().map(|l| (l - inv_r).powi(2)).sum(),
    })
}

pub fn run_concentration(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let ctx = RunContext::new(config);
    let (n, q) = (config.n, config.q.expect("validated"));
    let d_q = binomial(n, q) as f64;
    let sigma = config.tolerances.sigma;
    let mut records = Vec::new();

    for (idx, &r) in config.r_grid.iter().enumerate() {
        timed(&mut records, |out| {
            let params = ctx.params(Some(r));
            let inv_r = 1.0 / r as f64;
            let spec = EnsembleSpec::u1(n, q, r, config.unitary_mode, ctx.randomness(idx as u64))?;
            let sampler = crate::ensembles::EnsembleSampler::new(spec)?;
            let draws = ctx.map(config.samples, |s| {
                let block = sample_u1_block(&spec, &mut sampler.rng(s))?;
                projected_stats(&block, n, q)
            })?;
            let column = |f: fn(&ProjectedStats) -> f64| draws.iter().map(f).collect::<Vec<f64>>();
            let traces = column(|s| s.trace);
            let deviations = column(|s| s.deviation);
            let trace = mean_estimate(&traces);
            let trace_sq = mean_estimate(&traces.iter().map(|t| t * t).collect::<Vec<_>>());
            let purity = mean_estimate(&column(|s| s.purity));
            let deviation = mean_estimate(&deviations);

            let exact_trace = f_moment_u1(n, q, r, 1)?;
            let exact_trace_sq = f_moment_u1(n, q, r, 2)?;
            let exact_purity = exact_rho_tilde_purity(n, q, r)?;
            // E Σ δ² = E Tr ρ̃² - (2/r) E Tr ρ̃ + 1/r
            let exact_deviation = exact_purity - 2.0 * inv_r * exact_trace + inv_r;
            let within = Check::WithinSigma { sigmas: sigma };

            out.push(ResultRecord::exact(
                ctx.name(),
                params.clone(),
                "exact_E_Tr(rho_tilde)",
                exact_trace,
                Some(1.0),
                Check::Absolute { tol: 1e-9 },
            ));
            out.push(ResultRecord::new(ctx.name(), params.clone(), "Tr(rho_tilde)", trace.mean, trace.stderr, Some(1.0), within));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "Tr(rho_tilde)^2",
                trace_sq.mean,
                trace_sq.stderr,
                Some(exact_trace_sq),
                within,
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "Tr(rho_tilde^2)",
                purity.mean,
                purity.stderr,
                Some(exact_purity),
                within,
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "Tr(rho_tilde^2)_window",
                purity.mean,
                purity.stderr,
                Some(exact_purity),
                Check::InWindowSigma { lo: inv_r, hi: inv_r + 10.0 / d_q, sigmas: sigma },
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "sum_delta_sq",
                deviation.mean,
                deviation.stderr,
                Some(exact_deviation),
                within,
            ));
            let threshold = d_q.powf(-0.5);
            let tail = exceedance(&deviations, threshold);
            let bound = exact_deviation / threshold;
            out.push(ResultRecord::new(
                ctx.name(),
                format!("{params};c={threshold}"),
                "Pr(sum_delta_sq>c)",
                tail.mean,
                tail.stderr,
                Some(bound),
                Check::AtMost { bound },
            ));
            Ok(())
        })?;
    }
    Ok(records)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ensembles::haar_isometry;
    use crate::experiments::{ConfigOverrides, Experiment};
    use crate::linalg::{real, ComplexMatrix};
    use crate::sectors::u1_sector;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn stats_match_dense_projected_state() {
        let (n, q, r) = (5, 2, 4);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let w = haar_isometry(1 << n, r, &mut rng).unwrap();
        let sector = u1_sector(n, q).unwrap();
        let block = sector.restrict_columns(&w).unwrap();
        let s = projected_stats(&block, n, q).unwrap();
        let c = 32.0 / (4.0 * 10.0);
        let dense = ComplexMatrix::from_inner(&block * block.adjoint() * real(c)).unwrap();
        assert!((s.trace - dense.trace().re).abs() < 1e-12);
        let sq = ComplexMatrix::from_inner(dense.inner() * dense.inner()).unwrap();
        assert!((s.purity - sq.trace().re).abs() < 1e-12);
        let eig = dense.eigenvalues().unwrap();
        // nonzero spectrum sits at the top; the rest is zero
        let dev: f64 = eig[eig.len() - r..].iter().map(|l| (l - 0.25).powi(2)).sum();
        assert!((s.deviation - dev).abs() < 1e-12);
    }

    #[test]
    fn small_run_passes() {
        let o = ConfigOverrides { n: Some(6), r_grid: Some(vec![2, 4]), samples: Some(400), ..Default::default() };
        let records = run_concentration(&ExperimentConfig::resolve(Experiment::Concentration, o).unwrap()).unwrap();
        assert_eq!(records.len(), 14);
        assert!(records.iter().all(|r| r.pass), "{records:#?}");
    }
}
