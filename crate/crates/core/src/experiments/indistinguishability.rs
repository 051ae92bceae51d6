use nalgebra::DMatrix;

use super::record::{Check, ResultRecord};
use super::stats::{loglog_slope, mean_estimate};
use super::{timed, RunContext};
use crate::ensembles::rng::domain;
use crate::ensembles::{haar_isometry, EnsembleSampler, EnsembleSpec, Symmetry};
use crate::error::Result;
use crate::experiments::ExperimentConfig;
use crate::linalg::{real, trace_norm, ComplexMatrix, C64};
use crate::sectors::binomial;
use crate::weingarten::{commutant_two_copy_distance, exact_moment_z2, two_copy_distance_z2};

/// Batches used for the spread of three-copy Monte-Carlo distances.
const MC_BATCHES: usize = 5;

pub fn run_indistinguishability(config: &ExperimentConfig) -> Result<Vec<ResultRecord>> {
    config.validate()?;
    let ctx = RunContext::new(config);
    let mut records = Vec::new();
    let mut curve: Vec<(f64, f64)> = Vec::new();
    for (idx, &r) in config.r_grid.iter().enumerate() {
        timed(&mut records, |out| {
            let point = match (config.symmetry, config.k) {
                (Symmetry::Z2, 1 | 2) => z2_exact(&ctx, r, out)?,
                (Symmetry::Z2, _) => z2_three_copy(&ctx, idx, r, out)?,
                (Symmetry::U1, _) => u1_two_copy(&ctx, idx, r, out)?,
            };
            curve.push((r as f64, point));
            Ok(())
        })?;
    }
    timed(&mut records, |out| {
        slope_records(&ctx, &curve, out);
        Ok(())
    })?;
    Ok(records)
}

fn params(ctx: &RunContext, r: usize) -> String {
    format!("{};k={}", ctx.params(Some(r)), ctx.config.k)
}

fn z2_exact(ctx: &RunContext, r: usize, out: &mut Vec<ResultRecord>) -> Result<f64> {
    let (n, k) = (ctx.config.n, ctx.config.k);
    let d = 1usize << (n - 1);
    let moment = exact_moment_z2(n, r, k)?;
    let dk = moment.dim();
    let target = ComplexMatrix::from_real_diagonal(&vec![1.0 / dk as f64; dk]);
    let distance = trace_norm(&ComplexMatrix::from_inner(moment.inner() - target.inner())?);
    let reference = if k == 1 { 0.0 } else { two_copy_distance_z2(n, r)? };
    out.push(ResultRecord::exact(
        ctx.name(),
        params(ctx, r),
        "trace_distance",
        distance,
        Some(reference),
        Check::Absolute { tol: ctx.config.tolerances.exact },
    ));
    log::debug!("exact k={k} distance at d={d}, r={r}: {distance}");
    Ok(distance)
}

/// Monte-Carlo `E ρ^{⊗3}` in the sector basis, Haar draws only.
fn z2_three_copy(ctx: &RunContext, idx: usize, r: usize, out: &mut Vec<ResultRecord>) -> Result<f64> {
    let n = ctx.config.n;
    let d = 1usize << (n - 1);
    let dk = d * d * d;
    let samples = ctx.config.samples;
    let batch_len = samples.div_ceil(MC_BATCHES);
    let target = DMatrix::from_diagonal_element(dk, dk, real(1.0 / dk as f64));
    let mut total = DMatrix::<C64>::zeros(dk, dk);
    let mut batch_distances = Vec::new();
    for start in (0..samples).step_by(batch_len) {
        let stop = (start + batch_len).min(samples);
        let cubes = ctx.map(stop - start, |s| {
            let mut rng = ctx.stream(domain::MOMENT, idx as u64, (start as u64) + s);
            let v = haar_isometry(d, r, &mut rng)?;
            let rho = &v * v.adjoint() * real(1.0 / r as f64);
            Ok(rho.kronecker(&rho).kronecker(&rho))
        })?;
        let mut batch = DMatrix::<C64>::zeros(dk, dk);
        for c in &cubes {
            batch += c;
        }
        total += &batch;
        let mean = batch * real(1.0 / (stop - start) as f64);
        batch_distances.push(trace_norm(&ComplexMatrix::from_inner(mean - &target)?));
    }
    let mean = total * real(1.0 / samples as f64);
    let distance = trace_norm(&ComplexMatrix::from_inner(mean - &target)?);
    let spread = mean_estimate(&batch_distances).stderr;
    out.push(ResultRecord::new(
        ctx.name(),
        params(ctx, r),
        "trace_distance_mc",
        distance,
        spread,
        None,
        Check::Informational,
    ));
    Ok(distance)
}

/// `|E Tr ρ² - 1/d_Q|`: the sector-Haar invariance of the ensemble puts the
/// two-copy moment in the span of identity and swap on the sector.
fn u1_two_copy(ctx: &RunContext, idx: usize, r: usize, out: &mut Vec<ResultRecord>) -> Result<f64> {
    let c = ctx.config;
    let q = c.q.expect("validated");
    let d_q = binomial(c.n, q);
    let spec = EnsembleSpec::u1(c.n, q, r, c.unitary_mode, ctx.randomness(idx as u64))?;
    let sampler = EnsembleSampler::new(spec)?;
    let purities = ctx.map(c.samples, |s| {
        let f = sampler.factor(s)?.factor;
        Ok((f.adjoint() * &f).norm_squared())
    })?;
    let purity = mean_estimate(&purities);
    let distance = commutant_two_copy_distance(d_q, purity.mean);
    out.push(ResultRecord::new(
        ctx.name(),
        params(ctx, r),
        "trace_distance_mc",
        distance,
        purity.stderr,
        None,
        Check::Informational,
    ));
    Ok(distance)
}

fn slope_records(ctx: &RunContext, curve: &[(f64, f64)], out: &mut Vec<ResultRecord>) {
    let c = ctx.config;
    let grid = format!(
        "N={};k={};r={};mode={}",
        c.n,
        c.k,
        curve.iter().map(|p| p.0.to_string()).collect::<Vec<_>>().join("|"),
        c.unitary_mode.name()
    );
    if c.symmetry == Symmetry::U1 {
        let worst = curve.windows(2).map(|w| w[1].1 / w[0].1).fold(f64::NEG_INFINITY, f64::max);
        if curve.len() >= 2 {
            out.push(ResultRecord::new(
                ctx.name(),
                grid.clone(),
                "max_consecutive_distance_ratio",
                worst,
                0.0,
                None,
                Check::AtMost { bound: 1.0 },
            ));
        }
    }
    if c.k == 1 && c.symmetry == Symmetry::Z2 {
        return;
    }
    let points: Vec<_> = curve.iter().filter(|p| p.1 > 0.0).collect();
    if points.len() < 2 {
        return;
    }
    let x: Vec<f64> = points.iter().map(|p| p.0).collect();
    let y: Vec<f64> = points.iter().map(|p| p.1).collect();
    let Ok((slope, se)) = loglog_slope(&x, &y) else { return };
    let exact = c.symmetry == Symmetry::Z2 && c.k <= 2;
    let check = if exact {
        Check::InWindow { lo: -1.0 - c.tolerances.slope_window, hi: -1.0 + c.tolerances.slope_window }
    } else {
        Check::Informational
    };
    out.push(ResultRecord::new(
        ctx.name(),
        grid,
        "loglog_slope_distance_vs_r",
        slope,
        if exact { 0.0 } else { se },
        Some(-1.0),
        check,
    ));
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{ConfigOverrides, Experiment};

    fn run(o: ConfigOverrides) -> Vec<ResultRecord> {
        run_indistinguishability(&ExperimentConfig::resolve(Experiment::Indistinguishability, o).unwrap()).unwrap()
    }

    #[test]
    fn one_copy_distance_vanishes() {
        let records = run(ConfigOverrides { n: Some(4), k: Some(1), r_grid: Some(vec![1, 2, 8]), ..Default::default() });
        assert_eq!(records.len(), 3);
        for r in &records {
            assert!(r.estimate.abs() < 1e-10 && r.stderr == 0.0 && r.pass);
        }
    }

    #[test]
    fn two_copy_dense_matches_closed_form() {
        let records = run(ConfigOverrides { n: Some(4), r_grid: Some(vec![1, 2, 8]), ..Default::default() });
        for r in records.iter().filter(|r| r.statistic == "trace_distance") {
            assert!(r.pass, "{r:?}");
        }
        // r = d: the state is the reference itself
        assert!(records[2].estimate.abs() < 1e-10);
        assert!(records.iter().any(|r| r.statistic == "loglog_slope_distance_vs_r"));
    }

    #[test]
    fn three_copy_mc_decreases() {
        let records = run(ConfigOverrides {
            n: Some(3),
            k: Some(3),
            r_grid: Some(vec![1, 4]),
            samples: Some(400),
            ..Default::default()
        });
        assert!(records[0].estimate > records[1].estimate);
        assert!(records[0].stderr > 0.0);
        // r = d: every draw is exactly maximally mixed
        assert!(records[1].estimate < 1e-12);
    }

    #[test]
    fn u1_two_copy_decreases_in_r() {
        let records = run(ConfigOverrides {
            symmetry: Some(Symmetry::U1),
            n: Some(6),
            r_grid: Some(vec![2, 4, 8]),
            samples: Some(300),
            ..Default::default()
        });
        let ratio = records.iter().find(|r| r.statistic == "max_consecutive_distance_ratio").unwrap();
        assert!(ratio.pass, "{records:#?}");
        assert!(records.iter().filter(|r| r.statistic == "trace_distance_mc").all(|r| r.stderr > 0.0));
    }

    #[test]
    fn rejects_unsupported_copies() {
        let o = ConfigOverrides { n: Some(8), k: Some(2), ..Default::default() };
        assert!(ExperimentConfig::resolve(Experiment::Indistinguishability, o).is_err());
        let o = ConfigOverrides {
            n: Some(4),
            k: Some(3),
            unitary_mode: Some(crate::ensembles::UnitaryMode::Clifford),
            ..Default::default()
        };
        assert!(ExperimentConfig::resolve(Experiment::Indistinguishability, o).is_err());
    }
}
