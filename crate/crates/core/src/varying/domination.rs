use serde::Serialize;

use super::{log_nu_sq, SlowlyVarying};
use crate::error::{Error, Result};
use crate::law::{CellLaw, MarginalSpec, Part};
use crate::model::dominator_model;
use crate::quad;

/// Tails of a family against a candidate dominator on a grid of `x` values.
#[derive(Debug, Clone, Serialize)]
pub struct DominationReport {
    pub x_grid: Vec<f64>,
    /// `cell_tails[λ][k] = P(|X_λ| > x_k)`.
    pub cell_tails: Vec<Vec<f64>>,
    pub sup_tail: Vec<f64>,
    pub candidate_tail: Vec<f64>,
    /// The tabulated pointwise supremum, read back on the grid.
    pub dominator_tail: Vec<f64>,
    /// `max_k (sup_λ P(|X_λ| > x_k) − P(|X| > x_k))`.
    pub max_violation: f64,
    pub ui_trace: Option<UiTrace>,
}

impl DominationReport {
    pub fn dominated(&self) -> bool {
        self.max_violation <= 0.0
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct UiTrace {
    pub k_grid: Vec<f64>,
    /// `sup_λ E[g(|X_λ|) 1(g(|X_λ|) > K)]`, possibly infinite.
    pub values: Vec<f64>,
    pub tends_to_zero: bool,
}

pub fn domination_check(cells: &[CellLaw<'_>], candidate: &MarginalSpec, x_grid: &[f64]) -> Result<DominationReport> {
    if cells.is_empty() {
        return Err(Error::Domain("domination check needs at least one cell law".into()));
    }
    candidate.validate()?;
    let cand = candidate.law();
    let cell_tails: Vec<Vec<f64>> =
        cells.iter().map(|c| x_grid.iter().map(|&x| c.part_sf(Part::Abs, x)).collect()).collect();
    let sup_tail: Vec<f64> =
        (0..x_grid.len()).map(|k| cell_tails.iter().map(|t| t[k]).fold(0.0, f64::max)).collect();
    let candidate_tail: Vec<f64> = x_grid.iter().map(|&x| cand.part_sf(Part::Abs, x)).collect();
    let dom = dominator_model(cells)?;
    let dominator_tail = x_grid.iter().map(|&x| dom.law().sf(x)).collect();
    let max_violation = sup_tail
        .iter()
        .zip(&candidate_tail)
        .map(|(s, c)| s - c)
        .fold(f64::NEG_INFINITY, f64::max);
    Ok(DominationReport { x_grid: x_grid.to_vec(), cell_tails, sup_tail, candidate_tail, dominator_tail, max_violation, ui_trace: None })
}

/// Smallest `x ≥ 0` with `P(|X| > x) ≤ w`.
fn abs_tail_quantile(law: &CellLaw<'_>, w: f64) -> f64 {
    if law.is_nonnegative() {
        return law.tail_quantile(w).max(0.0);
    }
    if law.loc == 0.0 && law.base.is_symmetric() {
        return law.tail_quantile(0.5 * w).max(0.0);
    }
    let mut hi = 1.0f64;
    while law.part_sf(Part::Abs, hi) > w {
        hi *= 2.0;
        if hi > 1e300 {
            return hi;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        if law.part_sf(Part::Abs, mid) > w {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    hi
}

/// `E[h(|X|) 1(|X| > t)]` for nondecreasing `h ≥ 0`.
///
/// Discrete laws are summed over atoms. Otherwise the expectation is written
/// as `∫_0^{P(|X|>t)} h(Q(w)) dw` with `Q` the tail quantile of `|X|`, and the
/// substitution `w = P(|X|>t)·e^{−s}` maps it onto `[0, ∞)`. `grows_like` is
/// the power growth of `h`; an unbounded tail with index at most that power
/// gives `∞`.
pub fn tail_functional<H: Fn(f64) -> f64>(law: &CellLaw<'_>, t: f64, h: H, grows_like: f64) -> f64 {
    if law.base.is_discrete() {
        return law.atoms().iter().filter(|(x, _)| x.abs() > t).map(|(x, p)| p * h(x.abs())).sum();
    }
    let pt = law.part_sf(Part::Abs, t);
    if pt <= 0.0 {
        return 0.0;
    }
    let unbounded = law.upper_bound().is_infinite() || law.lower_bound().is_infinite();
    if unbounded {
        if let Some(beta) = law.base.tail_index() {
            if beta <= grows_like {
                return f64::INFINITY;
            }
        }
    }
    let f = |s: f64| {
        let w = pt * (-s).exp();
        if w <= 0.0 {
            return 0.0;
        }
        let x = abs_tail_quantile(law, w).max(t);
        h(x) * w
    };
    let scale = h(t.max(abs_tail_quantile(law, pt))).max(1e-300) * pt;
    quad::integrate_to_inf(f, 0.0, 1e-10 * scale)
}

fn g_weight(p: f64, family: &SlowlyVarying) -> impl Fn(f64) -> f64 + '_ {
    move |x: f64| {
        let xp = x.powf(p);
        xp * family.eval(xp)
    }
}

/// Largest `x` with `g(x) ≤ k` for nondecreasing continuous `g`.
fn g_inverse<G: Fn(f64) -> f64>(g: &G, k: f64) -> f64 {
    if g(0.0) > k {
        return 0.0;
    }
    let mut hi = 1.0f64;
    while g(hi) <= k {
        hi *= 2.0;
        if hi > 1e300 {
            return f64::INFINITY;
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = if lo > 0.0 { (lo * hi).sqrt() } else { 0.5 * hi };
        if g(mid) <= k {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo
}

/// `sup_λ E[g(|X_λ|) 1(g(|X_λ|) > K)]` with `g(x) = x^p L(x^p)` along `k_grid`.
///
/// `tends_to_zero` holds when the trace is finite and either ends at zero or
/// has a least-squares log-log slope below `−0.01` over its positive part.
pub fn uniform_integrability_trace(
    cells: &[CellLaw<'_>],
    p: f64,
    family: &SlowlyVarying,
    k_grid: &[f64],
) -> Result<UiTrace> {
    if cells.is_empty() || k_grid.is_empty() {
        return Err(Error::Domain("uniform integrability trace needs cells and a K grid".into()));
    }
    if !(p > 0.0) {
        return Err(Error::Domain(format!("weight exponent must be positive (got {p})")));
    }
    if !family.is_nondecreasing() {
        return Err(Error::Unsupported("weight g must be nondecreasing".into()));
    }
    let g = g_weight(p, family);
    let mut values = Vec::with_capacity(k_grid.len());
    for &k in k_grid {
        let t = g_inverse(&g, k);
        let v = cells.iter().map(|c| tail_functional(c, t, &g, p)).fold(0.0, f64::max);
        values.push(v);
    }
    // monotone convergence: enforce the running minimum against quadrature noise
    for i in 1..values.len() {
        values[i] = values[i].min(values[i - 1]);
    }
    let tends_to_zero = trace_tends_to_zero(k_grid, &values);
    Ok(UiTrace { k_grid: k_grid.to_vec(), values, tends_to_zero })
}

fn trace_tends_to_zero(k: &[f64], v: &[f64]) -> bool {
    if v.iter().any(|x| !x.is_finite()) {
        return false;
    }
    if *v.last().unwrap() == 0.0 {
        return true;
    }
    let pts: Vec<(f64, f64)> = k.iter().zip(v).filter(|(k, v)| **k > 0.0 && **v > 0.0).map(|(k, v)| (k.ln(), v.ln())).collect();
    if pts.len() < 2 {
        return false;
    }
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    sxx > 0.0 && sxy / sxx < -0.01
}

/// `E[|X|^p L(|X|^p) · log_ν^{(2)}(|X|)]`, the last factor only when `nu` is given.
pub fn weighted_moment(law: &CellLaw<'_>, p: f64, family: &SlowlyVarying, nu: Option<u32>) -> f64 {
    let g = g_weight(p, family);
    match nu {
        None => tail_functional(law, -1.0, &g, p),
        Some(nu) => tail_functional(law, -1.0, |x| g(x) * log_nu_sq(x, nu), p),
    }
}

/// `E[|X|^p L(|X|^p)]` for the tabulated supremum of the family's tails.
pub fn dominator_weighted_moment(cells: &[CellLaw<'_>], p: f64, family: &SlowlyVarying) -> Result<f64> {
    let dom = dominator_model(cells)?;
    Ok(weighted_moment(&dom.law(), p, family, None))
}
