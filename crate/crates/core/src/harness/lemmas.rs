//! Diagnostics for the max-tail comparison and the moment-series equivalences.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::per_replicate;
use super::stats::{slope_fit, ProportionEstimate, SlopeFit, VERDICT_LEVEL};
use super::traces::grid_shape;
use crate::dyadic::TruncationLadder;
use crate::error::{Error, Result};
use crate::law::{CellLaw, MarginalKind, MarginalSpec, Part};
use crate::model::{DependenceSpec, FieldModel};
use crate::rng::derive_seed;
use crate::varying::{log2v, tail_functional};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Point {
    pub grid_exp: u32,
    pub rows: usize,
    pub cols: usize,
    /// `mn · P(|X| > b ε)`, exact.
    pub numerator: f64,
    /// `P(max |X_ij| > b ε)`.
    pub denominator: f64,
    pub denominator_ci_low: f64,
    pub denominator_ci_high: f64,
    /// Whether the denominator is exact (independent cells) or simulated.
    pub exact: bool,
    /// NaN when both sides vanish.
    pub ratio: f64,
    pub ratio_ci_low: f64,
    pub ratio_ci_high: f64,
}

/// `bounded` asks that the upper half of the grids has finite ratios with no
/// significant upward log-slope; `bound` is the largest ratio there.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct A1Trace {
    pub epsilon: f64,
    pub points: Vec<A1Point>,
    pub bound: f64,
    pub bounded: bool,
}

/// Ratio `mn P(|X| > b ε) / P(max |X_ij| > b ε)` with `b = b(mn)` from `ladder`.
pub fn lemma_a1_ratio(
    model: &FieldModel,
    ladder: &TruncationLadder,
    grid_exps: &[u32],
    epsilon: f64,
    reps: u64,
    seed: u64,
) -> Result<A1Trace> {
    let mut v = Vec::new();
    if model.is_modulated() {
        v.push("the ratio needs identically distributed cells".into());
    }
    if !(epsilon > 0.0) {
        v.push(format!("epsilon must be positive (got {epsilon})"));
    }
    if grid_exps.is_empty() {
        v.push("grid exponents must be nonempty".into());
    }
    if let Some(e) = grid_exps.iter().find(|&&e| e > super::traces::MAX_GRID_EXP) {
        v.push(format!("grid exponent {e} is too large"));
    }
    if reps == 0 {
        v.push("reps must be positive".into());
    }
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    model.validate()?;
    let law = model.marginal.law();
    let iid = matches!(model.dependence, DependenceSpec::Iid);
    let mut points = Vec::with_capacity(grid_exps.len());
    for &e in grid_exps {
        let (me, ne) = grid_shape(e);
        let (rows, cols) = (1usize << me, 1usize << ne);
        let mn = (rows * cols) as f64;
        let level = ladder.b_dyadic(e) * epsilon;
        let t = law.part_sf(Part::Abs, level);
        let numerator = mn * t;
        let (den, lo, hi) = if rows * cols == 1 {
            (t, t, t)
        } else if iid {
            let d = -(mn * (-t).ln_1p()).exp_m1();
            (d, d, d)
        } else {
            let sampler = model.sampler(me, ne)?;
            let hits: u64 = per_replicate(&sampler, derive_seed(seed, e as u64), reps, |x| {
                u64::from(x.iter().any(|y| y.abs() > level))
            })
            .into_iter()
            .sum();
            let p = ProportionEstimate::new(hits, reps, 0.95);
            (p.estimate, p.ci_low, p.ci_high)
        };
        let div = |n: f64, d: f64| if n == 0.0 && d == 0.0 { f64::NAN } else { n / d };
        points.push(A1Point {
            grid_exp: e,
            rows,
            cols,
            numerator,
            denominator: den,
            denominator_ci_low: lo,
            denominator_ci_high: hi,
            exact: iid || rows * cols == 1,
            ratio: div(numerator, den),
            ratio_ci_low: div(numerator, hi),
            ratio_ci_high: div(numerator, lo),
        });
    }
    let upper = &points[points.len() / 2..];
    let bound = upper.iter().map(|p| p.ratio).filter(|r| !r.is_nan()).fold(0.0, f64::max);
    let finite = upper.iter().all(|p| p.ratio.is_nan() || p.ratio.is_finite());
    let xs: Vec<f64> = upper.iter().filter(|p| p.ratio > 0.0).map(|p| p.grid_exp as f64).collect();
    let ys: Vec<f64> = upper.iter().filter(|p| p.ratio > 0.0).map(|p| p.ratio.ln()).collect();
    let rising = slope_fit(&xs, &ys, VERDICT_LEVEL).map(|f| f.ci_low > 0.0).unwrap_or(false);
    Ok(A1Trace { epsilon, points, bound, bounded: finite && !rising })
}

/// One of the four series, summed over `m, n` in the truncated range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeries {
    pub item: String,
    pub partial_sum: f64,
    /// `(d, D(d))` over the complete diagonals.
    pub diagonal_sums: Vec<(u32, f64)>,
    /// Line through `ln(D(d) / (d − 1))` over the classification window.
    pub fit: Option<SlopeFit>,
    pub convergent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MomentSeriesReport {
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
    pub max_term: u32,
    /// `E |X|^p log |X|` with the `log(max(x, 2))` convention.
    pub item_i: f64,
    pub item_i_finite: bool,
    pub series: Vec<MomentSeries>,
    /// Whether every classification matches the finiteness of item (i).
    pub consistent: bool,
}

pub const MAX_TERM: u32 = 13;
/// Per-diagonal log decay of the mean block below which a series counts as summable.
pub const DECAY_THRESHOLD: f64 = -0.05;

fn classify(diag: &[(u32, f64)], max_term: u32) -> (Option<SlopeFit>, bool) {
    let top = max_term + 1;
    let window: Vec<(u32, f64)> = diag.iter().copied().filter(|(d, _)| *d >= top.div_ceil(2) && *d <= top).collect();
    if window.last().map(|w| w.1 == 0.0).unwrap_or(true) {
        return (None, true);
    }
    // a diagonal holds d − 1 blocks; fit the mean block on log scale
    let pos: Vec<&(u32, f64)> = window.iter().filter(|w| w.1 > 0.0).collect();
    let ds: Vec<f64> = pos.iter().map(|w| w.0 as f64).collect();
    let ys: Vec<f64> = pos.iter().map(|w| (w.1 / (w.0 - 1) as f64).ln()).collect();
    let fit = slope_fit(&ds, &ys, VERDICT_LEVEL);
    let convergent = fit.map(|f| f.slope < DECAY_THRESHOLD).unwrap_or(false);
    (fit, convergent)
}

fn diag_series(item: &str, diag: Vec<(u32, f64)>, partial_sum: f64, max_term: u32) -> MomentSeries {
    let (fit, convergent) = classify(&diag, max_term);
    MomentSeries { item: item.into(), partial_sum, diagonal_sums: diag, fit, convergent }
}

/// `Σ_{m ∈ [2^{k−1}, 2^k)} Σ_{n ∈ [2^{l−1}, 2^l)} f(mn)`.
fn block_sum<F: Fn(f64) -> f64 + Sync>(f: &F, k: u32, l: u32) -> f64 {
    ((1u64 << (k - 1))..(1u64 << k))
        .into_par_iter()
        .map(|m| ((1u64 << (l - 1))..(1u64 << l)).map(|n| f((m * n) as f64)).sum::<f64>())
        .collect::<Vec<f64>>()
        .iter()
        .sum()
}

/// Dyadic blocks of `Σ_{m,n < 2^K} f(mn)`, grouped into diagonals `k + l`.
fn product_series<F: Fn(f64) -> f64 + Sync>(f: F, max_term: u32) -> (Vec<(u32, f64)>, f64) {
    let mut diag = Vec::new();
    let mut total = 0.0;
    for d in 2..=2 * max_term {
        let mut s = 0.0;
        for k in 1..d {
            let l = d - k;
            if k > max_term || l > max_term || l < k {
                continue;
            }
            let b = block_sum(&f, k, l);
            s += if l == k { b } else { 2.0 * b };
        }
        total += s;
        if d <= max_term + 1 {
            diag.push((d, s));
        }
    }
    (diag, total)
}

/// `Σ_{m,n ≤ K} g(m + n)`, diagonal `d` holding `d − 1` equal terms.
fn index_series<G: Fn(u32) -> f64>(g: G, max_term: u32) -> (Vec<(u32, f64)>, f64) {
    let mut diag = Vec::new();
    let mut total = 0.0;
    for d in 2..=2 * max_term {
        let count = (d - 1).min(2 * max_term + 1 - d) as f64;
        let s = count * g(d);
        total += s;
        if d <= max_term + 1 {
            diag.push((d, s));
        }
    }
    (diag, total)
}

/// `E |X|^p log(max(|X|, 2))`.
fn item_i(marginal: &MarginalSpec, p: f64) -> f64 {
    if let (MarginalKind::Pareto { tail_index: beta }, 0.0, 1.0) = (&marginal.kind, marginal.shift, marginal.scale) {
        let (beta, ln2) = (*beta, std::f64::consts::LN_2);
        if beta <= p {
            return f64::INFINITY;
        }
        let g = beta - p;
        let below = beta * ln2 * (1.0 - (-g).exp2()) / g;
        let above = beta * ((-g).exp2() * ln2 / g + (-g).exp2() / (g * g));
        return below + above;
    }
    tail_functional(&marginal.law(), -1.0, |x| x.powf(p) * log2v(x), p)
}

/// Partial sums of the four equivalent series truncated at `max_term`,
/// each classified on its late diagonal sums, against the finiteness of
/// `E |X|^p log |X|`.
///
/// Items (ii) and (iv) sum `f(mn)` over `1 ≤ m, n < 2^K` in dyadic blocks;
/// (iii) and (v) sum over `1 ≤ m, n ≤ K`. Diagonal `d` then holds `d − 1`
/// blocks (or terms) for `d ≤ K + 1`. A series is classified convergent when
/// the least-squares slope of `ln(D(d)/(d − 1))` over `d ∈ ⌈(K+1)/2⌉..=K+1`
/// is below `DECAY_THRESHOLD`, or when the last diagonal sum is zero.
pub fn moment_series_check(marginal: &MarginalSpec, p: f64, alpha: f64, q: f64, max_term: u32) -> Result<MomentSeriesReport> {
    let mut v = Vec::new();
    if !(p > 0.0 && q > p && q.is_finite()) {
        v.push(format!("need 0 < p < q (got p = {p}, q = {q})"));
    }
    if !(alpha > 0.0 && alpha.is_finite()) {
        v.push(format!("alpha must be positive (got {alpha})"));
    }
    if !(4..=MAX_TERM).contains(&max_term) {
        v.push(format!("max_term must lie in 4..={MAX_TERM} (got {max_term})"));
    }
    v.extend(marginal.violations());
    if !v.is_empty() {
        return Err(Error::Config(v));
    }
    let law: CellLaw<'_> = marginal.law();
    let tail = |y: f64| law.part_sf(Part::Abs, y);
    let trunc = |y: f64| law.truncated_moment(q, y);

    let (d2, s2) = product_series(|x| x.powf(alpha * p - 1.0) * tail(x.powf(alpha)), max_term);
    let (d4, s4) = product_series(|x| x.powf(alpha * (p - q) - 1.0) * trunc(x.powf(alpha)), max_term);
    let (d3, s3) = index_series(|d| (d as f64 * alpha * p).exp2() * tail((d as f64 * alpha).exp2()), max_term);
    let (d5, s5) = index_series(|d| (d as f64 * alpha * (p - q)).exp2() * trunc((d as f64 * alpha).exp2()), max_term);
    let series = vec![
        diag_series("ii", d2, s2, max_term),
        diag_series("iii", d3, s3, max_term),
        diag_series("iv", d4, s4, max_term),
        diag_series("v", d5, s5, max_term),
    ];
    let i = item_i(marginal, p);
    let finite = i.is_finite();
    let consistent = series.iter().all(|s| s.convergent == finite);
    Ok(MomentSeriesReport { p, alpha, q, max_term, item_i: i, item_i_finite: finite, series, consistent })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_cell_ratio_is_one() {
        let m = FieldModel::iid(MarginalSpec::pareto(3.0));
        let t = lemma_a1_ratio(&m, &TruncationLadder::power(0.5).unwrap(), &[0], 0.5, 10, 1).unwrap();
        assert_eq!(t.points[0].ratio, 1.0);
    }

    #[test]
    fn iid_ratio_approaches_one() {
        let m = FieldModel::iid(MarginalSpec::pareto(3.0));
        let t = lemma_a1_ratio(&m, &TruncationLadder::power(0.5).unwrap(), &[2, 6, 10, 14], 1.0, 10, 1).unwrap();
        let last = t.points.last().unwrap().ratio;
        assert!((1.0..1.01).contains(&last), "{last}");
        assert!(t.bounded);
    }

    #[test]
    fn pareto_item_i_matches_quadrature() {
        let spec = MarginalSpec::pareto(3.0);
        let closed = item_i(&spec, 1.5);
        let quad = tail_functional(&spec.law(), -1.0, |x| x.powf(1.5) * log2v(x), 1.5);
        assert!((closed - quad).abs() < 1e-7 * closed, "{closed} {quad}");
    }

    #[test]
    fn bounded_marginal_converges() {
        let r = moment_series_check(&MarginalSpec::rademacher(), 1.5, 2.0 / 3.0, 2.0, 8).unwrap();
        assert!(r.item_i_finite && r.consistent);
        // P(|X| > x^α) vanishes once x^α ≥ 1, i.e. from mn = 1 on
        assert_eq!(r.series[0].diagonal_sums.iter().skip(1).map(|d| d.1).sum::<f64>(), 0.0);
    }

    #[test]
    fn harmonic_boundary_diverges() {
        let r = moment_series_check(&MarginalSpec::pareto(1.5), 1.5, 2.0 / 3.0, 2.0, 10).unwrap();
        assert!(!r.item_i_finite);
        assert!(r.series.iter().all(|s| !s.convergent), "{:?}", r.series);
    }
}
