use super::record::{Check, ResultRecord};
use super::stats::{chi_square_test, mean_estimate};
use super::{timed, RunContext, RESIDUAL_TOLERANCE};
use crate::diagnostics::{symmetry_residuals_factor, ChargedOperator, CorrelatorEngine};
use crate::ensembles::rng::domain;
use crate::ensembles::{
    charge_distribution, reference_factor, sample_charge, sample_isometry, EnsembleSampler, EnsembleSpec,
    Preparation, Symmetry,
};
use crate::error::Result;
use crate::experiments::ExperimentConfig;
use crate::linalg::real;
use crate::sectors::binomial;

/// Minimum p-value for the charge histogram.
pub const HISTOGRAM_P_VALUE: f64 = 0.01;

pub fn run_u1_pipeline(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let ctx = RunContext::new(config);
    let (n, q) = (config.n, config.q.expect("validated"));
    let op = ChargedOperator::SPlus;
    let tol = config.tolerances;
    let d = 1usize << n;
    let d_q = binomial(n, q);
    let mut records = Vec::new();

    let (ref_edge, ref_aggregate) = {
        let engine = CorrelatorEngine::from_factor(&reference_factor(Symmetry::U1, n, Some(q))?)?;
        (engine.r1(1, n, op)?, engine.aggregate_r1(op)?)
    };
    let formula = (q * (n - q)) as f64 / (n * (n - 1)) as f64;
    timed(&mut records, |out| {
        for (name, value) in [("reference_R1(1,N)", ref_edge), ("reference_aggregate_R1", ref_aggregate)] {
            out.push(ResultRecord::exact(
                ctx.name(),
                ctx.params(None),
                name,
                value,
                Some(formula),
                Check::Absolute { tol: tol.exact },
            ));
        }
        Ok(())
    })?;

    for (idx, &r) in config.r_grid.iter().enumerate() {
        let params = ctx.params(Some(r));
        let label = idx as u64;

        // (a), (b): one charge measurement per fresh draw of U Π_r U† / r
        timed(&mut records, |out| {
            let scale = real(1.0 / (r as f64).sqrt());
            let outcomes = ctx.map(config.samples, |s| {
                let mut rng = ctx.stream(domain::CHARGE, label, s);
                let w = sample_isometry(n, r, config.unitary_mode, ctx.randomness(label), &mut rng)?;
                let probs = charge_distribution(&(w * scale), n);
                Ok((sample_charge(&probs, &mut rng), probs[q]))
            })?;
            let mut counts = vec![0u64; n + 1];
            for &(charge, _) in &outcomes {
                counts[charge] += 1;
            }
            let expected: Vec<f64> = (0..=n).map(|c| binomial(n, c) as f64 / d as f64).collect();
            let test = chi_square_test(&counts, &expected)?;
            out.push(ResultRecord::exact(
                ctx.name(),
                format!("{params};dof={}", test.dof),
                "charge_histogram_chi2",
                test.statistic,
                None,
                Check::Informational,
            ));
            out.push(ResultRecord::exact(
                ctx.name(),
                format!("{params};dof={}", test.dof),
                "charge_histogram_p_value",
                test.p_value,
                None,
                Check::AtLeast { bound: HISTOGRAM_P_VALUE },
            ));
            let acceptance: Vec<f64> = outcomes.iter().map(|o| o.1).collect();
            let acc = mean_estimate(&acceptance);
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "acceptance_probability",
                acc.mean,
                acc.stderr,
                Some(d_q as f64 / d as f64),
                Check::WithinSigma { sigmas: tol.sigma },
            ));
            Ok(())
        })?;

        // (c), (d): postselected draws
        timed(&mut records, |out| {
            let spec = EnsembleSpec::u1(n, q, r, config.unitary_mode, ctx.randomness(label))?
                .with_preparation(Preparation::Postselect);
            let sampler = EnsembleSampler::new(spec)?;
            let draws = ctx.map(config.diagnostic_samples, |s| {
                let draw = sampler.factor(s)?;
                let engine = CorrelatorEngine::from_factor(&draw.factor)?;
                let res = symmetry_residuals_factor(&draw.factor, Symmetry::U1)?;
                Ok((engine.r1(1, n, op)?, engine.aggregate_r1(op)?, draw.attempts as f64, res))
            })?;
            let edge = mean_estimate(&draws.iter().map(|d| d.0).collect::<Vec<_>>());
            let aggregate = mean_estimate(&draws.iter().map(|d| d.1).collect::<Vec<_>>());
            let attempts = mean_estimate(&draws.iter().map(|d| d.2).collect::<Vec<_>>());
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "postselection_attempts",
                attempts.mean,
                attempts.stderr,
                None,
                Check::Informational,
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "R1(1,N)",
                edge.mean,
                edge.stderr,
                Some(ref_edge),
                Check::Informational,
            ));
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "aggregate_R1/reference",
                aggregate.mean / ref_aggregate,
                aggregate.stderr / ref_aggregate,
                None,
                Check::AtMost { bound: tol.ratio_threshold },
            ));
            let absent = tol.absent_factor * r as f64 / d_q as f64;
            out.push(ResultRecord::new(
                ctx.name(),
                params.clone(),
                "aggregate_R1_vs_absent_threshold",
                aggregate.mean,
                aggregate.stderr,
                Some(absent),
                Check::AtMost { bound: absent },
            ));
            let max = |f: fn(&crate::diagnostics::SymmetryResiduals) -> f64| {
                draws.iter().map(|d| f(&d.3)).fold(0.0, f64::max)
            };
            for (name, value) in [
                ("max_strong_residual", max(|r| r.strong)),
                ("max_weak_residual", max(|r| r.weak)),
                ("max_commutator_residual", max(|r| r.commutator)),
            ] {
                out.push(ResultRecord::exact(
                    ctx.name(),
                    params.clone(),
                    name,
                    value,
                    None,
                    Check::AtMost { bound: RESIDUAL_TOLERANCE },
                ));
            }
            Ok(())
        })?;
    }
    Ok(records)
}
