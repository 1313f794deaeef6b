use serde::{Deserialize, Serialize};

use super::stats::{slope_fit, ProportionEstimate, SlopeFit, Verdict, VERDICT_LEVEL};
use crate::dyadic::{LadderKind, PrefixSumTable, TruncationLadder};
use crate::error::{Error, Result};
use crate::ineq::centering_by;
use crate::model::FieldModel;
use crate::rng::derive_seed;
use crate::varying::SlowlyVarying;

pub const MAX_BLOCK: u32 = 12;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesRow {
    pub k: u32,
    pub l: u32,
    /// `2^{(k+ℓ)(αp−1)}`.
    pub block_weight: f64,
    pub tail_prob_estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub weighted_term: f64,
    pub running_partial_sum: f64,
}

/// Dyadic block estimates of the complete-convergence series.
///
/// Rows are ordered by diagonal `k + ℓ`, then by `k`. The decay fit regresses
/// `ln D(d)` on `d`, where `D(d)` sums the weighted terms of diagonal `d`,
/// from the largest diagonal sum onward and skipping zero sums. When fewer
/// than three diagonals follow the peak, every positive diagonal is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesEstimate {
    pub p: f64,
    pub alpha: f64,
    pub epsilon: f64,
    pub reps: u64,
    pub master_seed: u64,
    pub rows: Vec<SeriesRow>,
    pub diagonal_sums: Vec<(u32, f64)>,
    pub decay: Option<SlopeFit>,
    pub verdict: Verdict,
}

impl SeriesEstimate {
    pub fn partial_sum(&self) -> f64 {
        self.rows.last().map(|r| r.running_partial_sum).unwrap_or(0.0)
    }
}

/// Every violated parameter constraint of the series experiments.
pub fn series_violations(p: f64, alpha: f64, epsilon: f64, max_block: u32) -> Vec<String> {
    let mut v = Vec::new();
    if !(p >= 1.0 && p.is_finite()) {
        v.push(format!("p must satisfy p ≥ 1 (got {p})"));
    }
    if !(alpha > 0.5 && alpha <= 1.0) {
        v.push(format!("alpha must lie in (1/2, 1] (got {alpha})"));
    }
    if !(alpha * p >= 1.0 - 1e-12) {
        v.push(format!("series requires αp ≥ 1 (got αp = {})", alpha * p));
    }
    if !(epsilon > 0.0) {
        v.push(format!("epsilon must be positive (got {epsilon})"));
    }
    if !(2..=MAX_BLOCK).contains(&max_block) {
        v.push(format!("max_block must lie in 2..={MAX_BLOCK} (got {max_block})"));
    }
    v
}

fn diagonal_fit(diag: &[(u32, f64)]) -> (Option<SlopeFit>, Verdict) {
    let peak = diag
        .iter()
        .enumerate()
        .fold(None, |best: Option<(usize, f64)>, (i, &(_, v))| match best {
            Some((_, bv)) if bv >= v => best,
            _ => Some((i, v)),
        });
    let Some((start, peak_val)) = peak else { return (None, Verdict::DecreasingToZero) };
    if peak_val == 0.0 {
        return (None, Verdict::DecreasingToZero);
    }
    // a peak at the far end leaves nothing to fit; use the whole trace
    let tail = if diag.len() - start >= 3 { &diag[start..] } else { diag };
    let xs: Vec<f64> = tail.iter().filter(|(_, v)| *v > 0.0).map(|(d, _)| *d as f64).collect();
    let ys: Vec<f64> = tail.iter().filter(|(_, v)| *v > 0.0).map(|(_, v)| v.ln()).collect();
    let fit = slope_fit(&xs, &ys, VERDICT_LEVEL);
    let verdict = if tail.last().map(|t| t.1 == 0.0).unwrap_or(false) {
        Verdict::DecreasingToZero
    } else {
        match fit {
            Some(f) if f.ci_high < 0.0 => Verdict::DecreasingToZero,
            Some(f) if f.ci_low > 0.0 => Verdict::Increasing,
            _ => Verdict::Flat,
        }
    };
    (fit, verdict)
}

/// The series with norming `ε · b(2^{k+ℓ})` for an arbitrary ladder.
#[allow(clippy::too_many_arguments)]
pub fn dyadic_series(
    model: &FieldModel,
    p: f64,
    alpha: f64,
    epsilon: f64,
    ladder: &TruncationLadder,
    max_block: u32,
    reps: u64,
    seed: u64,
) -> Result<SeriesEstimate> {
    let v = series_violations(p, alpha, epsilon, max_block);
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    model.validate()?;
    let mut blocks = Vec::new();
    for d in 2..=max_block {
        for k in 1..d {
            blocks.push((k, d - k));
        }
    }
    let estimates: Result<Vec<ProportionEstimate>> = blocks
        .iter()
        .map(|&(k, l)| {
            let (rows, cols) = (1usize << k, 1usize << l);
            let centering = centering_by(model, rows, cols, |c| c.mean());
            super::require_finite(&centering, "E X")?;
            let sampler = model.sampler(k, l)?;
            let level = epsilon * ladder.b_dyadic(k + l);
            let block_seed = derive_seed(seed, ((k as u64) << 32) | l as u64);
            let hits: u64 = super::per_replicate(&sampler, block_seed, reps, |x| {
                let t = PrefixSumTable::build(rows, cols, x, &centering).expect("dimensions match");
                u64::from(t.max_abs(rows - 1, cols - 1) > level)
            })
            .into_iter()
            .sum();
            Ok(ProportionEstimate::new(hits, reps, 0.95))
        })
        .collect();
    let estimates = estimates?;
    let mut rows = Vec::with_capacity(blocks.len());
    let mut running = 0.0;
    let mut diagonal_sums: Vec<(u32, f64)> = Vec::new();
    for (&(k, l), e) in blocks.iter().zip(&estimates) {
        let block_weight = ((k + l) as f64 * (alpha * p - 1.0)).exp2();
        let weighted_term = block_weight * e.estimate;
        running += weighted_term;
        match diagonal_sums.last_mut() {
            Some((d, s)) if *d == k + l => *s += weighted_term,
            _ => diagonal_sums.push((k + l, weighted_term)),
        }
        rows.push(SeriesRow {
            k,
            l,
            block_weight,
            tail_prob_estimate: e.estimate,
            ci_low: e.ci_low,
            ci_high: e.ci_high,
            weighted_term,
            running_partial_sum: running,
        });
    }
    let (decay, verdict) = diagonal_fit(&diagonal_sums);
    Ok(SeriesEstimate { p, alpha, epsilon, reps, master_seed: seed, rows, diagonal_sums, decay, verdict })
}

/// Norming `ε (mn)^α`.
#[allow(clippy::too_many_arguments)]
pub fn baum_katz_series(
    model: &FieldModel,
    p: f64,
    alpha: f64,
    epsilon: f64,
    max_block: u32,
    reps: u64,
    seed: u64,
) -> Result<SeriesEstimate> {
    let ladder = TruncationLadder::power(alpha)?;
    dyadic_series(model, p, alpha, epsilon, &ladder, max_block, reps, seed)
}

/// Norming `ε (mn)^α L̃((mn)^α)` with `L̃` the de Bruijn conjugate of `family`.
#[allow(clippy::too_many_arguments)]
pub fn regular_norming_series(
    model: &FieldModel,
    p: f64,
    alpha: f64,
    epsilon: f64,
    family: &SlowlyVarying,
    max_block: u32,
    reps: u64,
    seed: u64,
) -> Result<SeriesEstimate> {
    let ladder = TruncationLadder::new(LadderKind::PowerWithConjugate { alpha, family: family.clone() })?;
    dyadic_series(model, p, alpha, epsilon, &ladder, max_block, reps, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::MarginalSpec;

    #[test]
    fn zero_model_series_vanishes() {
        let model = FieldModel::iid(MarginalSpec::constant(0.0));
        let s = baum_katz_series(&model, 1.5, 2.0 / 3.0, 1.0, 6, 20, 1).unwrap();
        assert!(s.rows.iter().all(|r| r.tail_prob_estimate == 0.0));
        assert_eq!(s.partial_sum(), 0.0);
        assert_eq!(s.verdict, Verdict::DecreasingToZero);
    }

    #[test]
    fn block_weights_are_exact() {
        let model = FieldModel::iid(MarginalSpec::rademacher());
        let s = baum_katz_series(&model, 2.0, 0.75, 1.0, 5, 10, 1).unwrap();
        for r in &s.rows {
            assert_eq!(r.block_weight, 2f64.powf(0.5 * (r.k + r.l) as f64));
        }
        assert!(s.rows.windows(2).all(|w| w[1].running_partial_sum >= w[0].running_partial_sum));
    }

    #[test]
    fn constant_family_matches_plain_series() {
        let model = FieldModel::iid(MarginalSpec::rademacher());
        let a = baum_katz_series(&model, 1.5, 2.0 / 3.0, 0.5, 6, 100, 9).unwrap();
        let b = regular_norming_series(&model, 1.5, 2.0 / 3.0, 0.5, &SlowlyVarying::constant(), 6, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn rejects_bad_parameters() {
        let model = FieldModel::iid(MarginalSpec::rademacher());
        let e = baum_katz_series(&model, 1.0, 0.6, -1.0, 13, 10, 1).unwrap_err().to_string();
        assert!(e.contains("αp ≥ 1") && e.contains("epsilon") && e.contains("max_block"), "{e}");
    }
}
