use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::WeightScheme;
use crate::dyadic::{Centering, PrefixSumTable, TruncationLadder};
use crate::error::{Error, Result};
use crate::harness::stats::{MeanEstimate, ProportionEstimate};
use crate::law::{CellLaw, Part};
use crate::model::FieldModel;

/// Which partial-sum rectangles enter the maximum.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RectConvention {
    /// `1 ≤ u < 2^m`, `1 ≤ v < 2^n`.
    #[default]
    Strict,
    /// `1 ≤ u ≤ 2^m`, `1 ≤ v ≤ 2^n`.
    Closed,
}

/// Nonnegative models are handled as they are; signed ones through `|X|`.
pub(crate) fn working_part(model: &FieldModel) -> Part {
    if model.marginal.law().is_nonnegative() {
        Part::Positive
    } else {
        Part::Abs
    }
}

/// Per-cell values of `f` as a centering, evaluated once per distinct scale.
pub(crate) fn centering_by<F: Fn(&CellLaw<'_>) -> f64>(model: &FieldModel, rows: usize, cols: usize, f: F) -> Centering {
    let base = model.marginal.law();
    if !model.is_modulated() {
        return Centering::Uniform(f(&base));
    }
    let mut cache: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let c = model.modulation.scale(i, j);
            let v = match cache.iter().find(|(k, _)| *k == c) {
                Some((_, v)) => *v,
                None => {
                    let v = f(&base.scaled(c));
                    cache.push((c, v));
                    v
                }
            };
            out.push(v);
        }
    }
    Centering::PerCell(out)
}

/// `Σ_{cells} f(law of the cell)`.
pub(crate) fn sum_over_cells<F: Fn(&CellLaw<'_>) -> f64>(model: &FieldModel, rows: usize, cols: usize, f: F) -> f64 {
    match centering_by(model, rows, cols, f) {
        Centering::Uniform(v) => v * (rows * cols) as f64,
        Centering::PerCell(v) => v.iter().sum(),
        Centering::Zero => 0.0,
    }
}

/// `E clamp(X, −b, b)`.
pub(crate) fn signed_clamp_mean(law: &CellLaw<'_>, b: f64) -> f64 {
    law.truncated_mean(b) + b * law.sf(b) - b * law.cdf_left(-b)
}

/// `Σ_{s ≤ m, t ≤ n} 2^{s+t} b(2^{s+t}) max_{cells} P(Z > b(2^{s+t−2}))`.
pub(crate) fn tail_sum(model: &FieldModel, part: Part, m: u32, n: u32, ladder: &TruncationLadder) -> f64 {
    let family = model.cell_family(1 << m, 1 << n);
    let mut total = 0.0;
    for s in 1..=m {
        for t in 1..=n {
            let l = s + t;
            let p = family.iter().map(|c| c.part_sf(part, ladder.b_dyadic(l - 2))).fold(0.0, f64::max);
            total += (l as f64).exp2() * ladder.b_dyadic(l) * p;
        }
    }
    total
}

/// `Σ 2^{m+n} (a/λ)^{2q} (max E Z_{s+t}^{2q} + 2^{(s+t)(q−1)} max (E Z_{s+t}^2)^q)`
/// with `Z_{s+t} = min(Z, b(2^{s+t}))`, scaled by `a_{m,n}^{2q}/scale^{2q}`.
fn moment_sum(model: &FieldModel, part: Part, m: u32, n: u32, scheme: &WeightScheme, ladder: &TruncationLadder, scale: f64) -> f64 {
    let family = model.cell_family(1 << m, 1 << n);
    let q = scheme.q;
    let mut total = 0.0;
    for s in 1..=m {
        for t in 1..=n {
            let l = s + t;
            let b = ladder.b_dyadic(l);
            let m2q = family.iter().map(|c| c.clamp_moment(part, 2.0 * q, b)).fold(0.0, f64::max);
            let m2 = family.iter().map(|c| c.clamp_moment(part, 2.0, b)).fold(0.0, f64::max);
            let ratio = (scale / scheme.lambda(m, n, s, t)).powf(2.0 * q);
            total += ((m + n) as f64).exp2() * ratio * (m2q + ((l as f64) * (q - 1.0)).exp2() * m2.powf(q));
        }
    }
    total
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RosenthalRhs {
    /// `(Σ 2^{s+t} b(2^{s+t}) max P(Z > b(2^{s+t−2})))^{2q}`.
    pub tail_term: f64,
    pub moment_term: f64,
    pub total: f64,
}

/// Right side of the Rosenthal-type maximal inequality with `C(q) = 1`.
pub fn rosenthal_rhs(model: &FieldModel, m: u32, n: u32, scheme: &WeightScheme, ladder: &TruncationLadder) -> Result<RosenthalRhs> {
    model.validate()?;
    let part = working_part(model);
    let tail_term = tail_sum(model, part, m, n, ladder).powf(2.0 * scheme.q);
    let a = scheme.weight_total(m, n)?;
    let moment_term = moment_sum(model, part, m, n, scheme, ladder, a);
    let total = tail_term + moment_term;
    if total.is_nan() {
        return Err(Error::Numeric("rosenthal right side is NaN".into()));
    }
    Ok(RosenthalRhs { tail_term, moment_term, total })
}

/// Truncates at `b` and returns the centering for the truncated field.
fn truncation(model: &FieldModel, rows: usize, cols: usize, b: f64) -> (bool, Centering) {
    let signed = !model.marginal.law().is_nonnegative();
    let c = if signed {
        centering_by(model, rows, cols, |l| signed_clamp_mean(l, b))
    } else {
        centering_by(model, rows, cols, |l| l.clamp_mean(Part::Positive, b))
    };
    (signed, c)
}

fn max_abs(table: &PrefixSumTable, conv: RectConvention) -> f64 {
    let (r, c) = (table.rows(), table.cols());
    match conv {
        RectConvention::Strict => table.max_abs(r.saturating_sub(1), c.saturating_sub(1)),
        RectConvention::Closed => table.max_abs(r, c),
    }
}

/// Monte Carlo mean of `max |Σ_{i≤u, j≤v} (X_{m+n,i,j} − E X_{m+n,i,j})|^{2q}`.
#[allow(clippy::too_many_arguments)]
pub fn rosenthal_lhs_mc(
    model: &FieldModel,
    m: u32,
    n: u32,
    q: f64,
    ladder: &TruncationLadder,
    reps: u64,
    seed: u64,
    conv: RectConvention,
    level: f64,
) -> Result<MeanEstimate> {
    if reps < 2 {
        return Err(Error::Domain(format!("need at least 2 replicates (got {reps})")));
    }
    let sampler = model.sampler(m, n)?;
    let (rows, cols) = (1usize << m, 1usize << n);
    let b = ladder.b_dyadic(m + n);
    let (signed, centering) = truncation(model, rows, cols, b);
    let vals: Vec<f64> = (0..reps)
        .into_par_iter()
        .map_init(Vec::new, |buf, rep| {
            sampler.sample_into(seed, rep, buf);
            for x in buf.iter_mut() {
                *x = if signed { x.clamp(-b, b) } else { x.min(b) };
            }
            let t = PrefixSumTable::build(rows, cols, buf, &centering).expect("dimensions match");
            max_abs(&t, conv).powf(2.0 * q)
        })
        .collect();
    Ok(MeanEstimate::from_samples(&vals, level))
}

/// Exact `E max |Σ …|^{2q}` by enumerating every joint outcome of an i.i.d.
/// discrete field; at most `2^20` outcomes.
pub fn rosenthal_lhs_exact(
    model: &FieldModel,
    m: u32,
    n: u32,
    q: f64,
    ladder: &TruncationLadder,
    conv: RectConvention,
) -> Result<f64> {
    model.validate()?;
    if !matches!(model.dependence, crate::model::DependenceSpec::Iid) || !model.marginal.kind.is_discrete() {
        return Err(Error::Unsupported("exact enumeration needs an i.i.d. discrete model".into()));
    }
    let (rows, cols) = (1usize << m, 1usize << n);
    let cells = rows * cols;
    let b = ladder.b_dyadic(m + n);
    let (signed, centering) = truncation(model, rows, cols, b);
    let laws: Vec<Vec<(f64, f64)>> =
        (0..cells).map(|idx| model.cell_law(idx / cols, idx % cols).atoms()).collect();
    let total: f64 = laws.iter().map(|a| (a.len() as f64).log2()).sum();
    if total > 20.0 {
        return Err(Error::Unsupported(format!("{cells} cells give more than 2^20 outcomes")));
    }
    let mut digits = vec![0usize; cells];
    let mut vals = vec![0.0; cells];
    let mut acc = 0.0;
    loop {
        let mut prob = 1.0;
        for k in 0..cells {
            let (x, p) = laws[k][digits[k]];
            prob *= p;
            vals[k] = if signed { x.clamp(-b, b) } else { x.min(b) };
        }
        let t = PrefixSumTable::build(rows, cols, &vals, &centering)?;
        acc += prob * max_abs(&t, conv).powf(2.0 * q);
        let mut k = 0;
        loop {
            if k == cells {
                return Ok(acc);
            }
            digits[k] += 1;
            if digits[k] < laws[k].len() {
                break;
            }
            digits[k] = 0;
            k += 1;
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailBoundReport {
    pub m_exp: u32,
    pub n_exp: u32,
    pub epsilon: f64,
    pub a_mn: f64,
    /// `Σ_{cells} E(Z 1(Z > b(2^{m+n})))`.
    pub excess_sum: f64,
    pub excess_ok: bool,
    /// `6 Σ 2^{s+t} b(2^{s+t}) max P(Z > b(2^{s+t−2}))`.
    pub deterministic_tail: f64,
    pub tail_ok: bool,
    pub preconditions_met: bool,
    /// `3 a ε` for nonnegative models, `6 a ε` otherwise.
    pub threshold: f64,
    pub lhs_tail: ProportionEstimate,
    /// `Σ P(Z > b(2^{m+n})) + ε^{−2q} Σ 2^{m+n} λ^{−2q}(…)` with `C(q) = 1`.
    pub rhs_bound: f64,
}

/// Both preconditions of the tail bound, its right side, and a Monte Carlo
/// estimate of `P(max |Σ (X − E X)| ≥ threshold)` over strict rectangles.
#[allow(clippy::too_many_arguments)]
pub fn tailbound_check(
    model: &FieldModel,
    m: u32,
    n: u32,
    scheme: &WeightScheme,
    ladder: &TruncationLadder,
    epsilon: f64,
    reps: u64,
    seed: u64,
) -> Result<TailBoundReport> {
    if !(epsilon > 0.0) {
        return Err(Error::Domain(format!("epsilon must be positive (got {epsilon})")));
    }
    model.validate()?;
    let part = working_part(model);
    let (rows, cols) = (1usize << m, 1usize << n);
    let a_mn = scheme.weight_total(m, n)?;
    let b_top = ladder.b_dyadic(m + n);
    let excess_sum = sum_over_cells(model, rows, cols, |l| l.excess_mean(part, b_top));
    let deterministic_tail = 6.0 * tail_sum(model, part, m, n, ladder);
    let excess_ok = excess_sum <= epsilon * a_mn;
    let tail_ok = deterministic_tail <= epsilon * a_mn;
    let tail_mass = sum_over_cells(model, rows, cols, |l| l.part_sf(part, b_top));
    let rhs_bound = tail_mass + moment_sum(model, part, m, n, scheme, ladder, 1.0 / epsilon);
    let threshold = if part == Part::Positive { 3.0 } else { 6.0 } * a_mn * epsilon;
    let centering = centering_by(model, rows, cols, |l| l.mean());
    if let Centering::Uniform(c) = centering {
        if !c.is_finite() {
            return Err(Error::Domain("tail bound needs integrable cells".into()));
        }
    }
    let successes = if reps == 0 || threshold.is_infinite() {
        0
    } else {
        let sampler = model.sampler(m, n)?;
        (0..reps)
            .into_par_iter()
            .map_init(Vec::new, |buf, rep| {
                sampler.sample_into(seed, rep, buf);
                let t = PrefixSumTable::build(rows, cols, buf, &centering).expect("dimensions match");
                u64::from(max_abs(&t, RectConvention::Strict) >= threshold)
            })
            .sum()
    };
    Ok(TailBoundReport {
        m_exp: m,
        n_exp: n,
        epsilon,
        a_mn,
        excess_sum,
        excess_ok,
        deterministic_tail,
        tail_ok,
        preconditions_met: excess_ok && tail_ok,
        threshold,
        lhs_tail: ProportionEstimate::new(successes, reps, 0.95),
        rhs_bound,
    })
}
