//! Normalized-maximum traces along growing grids.
//!
//! Grid exponent `e` means `mn = 2^e` cells laid out as `2^{⌈e/2⌉} × 2^{⌊e/2⌋}`.
//! Replicate `r` at exponent `e` draws from master seed `derive_seed(seed, e)`.
//! Maxima run over closed rectangles `1 ≤ u ≤ m`, `1 ≤ v ≤ n`.

use super::stats::{ConvergenceTrace, MeanEstimate, ProportionEstimate, TracePoint};
use super::{per_replicate, require_finite};
use crate::dyadic::{Centering, PrefixSumTable};
use crate::error::{Error, Result};
use crate::ineq::centering_by;
use crate::model::FieldModel;
use crate::rng::derive_seed;

pub const MAX_GRID_EXP: u32 = 22;
pub const MAX_SLLN_EXP: u32 = 11;

/// `(⌈e/2⌉, ⌊e/2⌋)`.
pub fn grid_shape(e: u32) -> (u32, u32) {
    (e.div_ceil(2), e / 2)
}

/// `max_{u ≤ rows, v ≤ cols} |S(u, v)| / norming` over row-major `values`.
pub fn closed_max_statistic(values: &[f64], rows: usize, cols: usize, centering: &Centering, norming: f64) -> Result<f64> {
    let t = PrefixSumTable::build(rows, cols, values, centering)?;
    Ok(t.max_abs(rows, cols) / norming)
}

fn lln_violations(p: f64, grid_exps: &[u32], reps: u64) -> Vec<String> {
    let mut v = Vec::new();
    if !(1.0..2.0).contains(&p) {
        v.push(format!("p must satisfy 1 ≤ p < 2 (got {p})"));
    }
    if grid_exps.is_empty() {
        v.push("grid exponents must be nonempty".into());
    }
    if let Some(e) = grid_exps.iter().find(|&&e| e > MAX_GRID_EXP) {
        v.push(format!("grid exponent {e} exceeds {MAX_GRID_EXP}"));
    }
    if reps == 0 {
        v.push("reps must be positive".into());
    }
    v
}

fn check(v: Vec<String>) -> Result<()> {
    if v.is_empty() {
        Ok(())
    } else {
        Err(Error::Config(v))
    }
}

/// One sample path on `2^K × 2^K`; point `k` is the max over `u, v ≤ 2^k`
/// normed by `(4^k)^{1/p}`, centered at `E X`. Intervals collapse to the value.
pub fn mz_slln_trace(model: &FieldModel, p: f64, max_exp: u32, seed: u64) -> Result<ConvergenceTrace> {
    let mut v = lln_violations(p, &[0], 1);
    if max_exp > MAX_SLLN_EXP {
        v.push(format!("max_exp must be at most {MAX_SLLN_EXP} (got {max_exp})"));
    }
    check(v)?;
    model.validate()?;
    let side = 1usize << max_exp;
    let centering = centering_by(model, side, side, |c| c.mean());
    require_finite(&centering, "E X")?;
    let field = model.sampler(max_exp, max_exp)?.sample(seed, 0);
    let table = PrefixSumTable::from_sample(&field, &centering)?;
    let mut points = Vec::with_capacity(max_exp as usize + 1);
    for k in 0..=max_exp {
        let s = 1usize << k;
        let stat = table.max_abs(s, s) / ((2 * k) as f64 / p).exp2();
        points.push(TracePoint { grid_exp: 2 * k, rows: s, cols: s, statistic: stat, ci_low: stat, ci_high: stat });
    }
    Ok(ConvergenceTrace::from_points(points))
}

/// `P(max |Σ (X − E Z)| / (mn)^{1/p} > ε)` per grid, with `Z = X 1(|X| ≤ (mn)^{1/p})`.
pub fn feller_wlln(
    model: &FieldModel,
    p: f64,
    grid_exps: &[u32],
    epsilon: f64,
    reps: u64,
    seed: u64,
) -> Result<ConvergenceTrace> {
    let mut v = lln_violations(p, grid_exps, reps);
    if !(epsilon > 0.0) {
        v.push(format!("epsilon must be positive (got {epsilon})"));
    }
    check(v)?;
    model.validate()?;
    let mut points = Vec::with_capacity(grid_exps.len());
    for &e in grid_exps {
        let (me, ne) = grid_shape(e);
        let (rows, cols) = (1usize << me, 1usize << ne);
        let b = (e as f64 / p).exp2();
        let centering = centering_by(model, rows, cols, |c| c.truncated_mean(b));
        let sampler = model.sampler(me, ne)?;
        let hits: u64 = per_replicate(&sampler, derive_seed(seed, e as u64), reps, |x| {
            let s = closed_max_statistic(x, rows, cols, &centering, b).expect("dimensions match");
            u64::from(s > epsilon)
        })
        .into_iter()
        .sum();
        let est = ProportionEstimate::new(hits, reps, 0.95);
        points.push(TracePoint { grid_exp: e, rows, cols, statistic: est.estimate, ci_low: est.ci_low, ci_high: est.ci_high });
    }
    Ok(ConvergenceTrace::from_points(points))
}

/// `E[(max |Σ (X − E X)| / (mn)^{1/p})^p]` per grid.
pub fn pyke_root_lp(model: &FieldModel, p: f64, grid_exps: &[u32], reps: u64, seed: u64) -> Result<ConvergenceTrace> {
    check(lln_violations(p, grid_exps, reps))?;
    model.validate()?;
    let mut points = Vec::with_capacity(grid_exps.len());
    for &e in grid_exps {
        let (me, ne) = grid_shape(e);
        let (rows, cols) = (1usize << me, 1usize << ne);
        let b = (e as f64 / p).exp2();
        let centering = centering_by(model, rows, cols, |c| c.mean());
        require_finite(&centering, "E X")?;
        let sampler = model.sampler(me, ne)?;
        let stats = per_replicate(&sampler, derive_seed(seed, e as u64), reps, |x| {
            closed_max_statistic(x, rows, cols, &centering, b).expect("dimensions match").powf(p)
        });
        let est = MeanEstimate::from_samples(&stats, 0.95);
        points.push(TracePoint {
            grid_exp: e,
            rows,
            cols,
            statistic: est.mean,
            ci_low: est.ci_low.max(0.0),
            ci_high: est.ci_high,
        });
    }
    Ok(ConvergenceTrace::from_points(points))
}
