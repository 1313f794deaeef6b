//! Marginal laws with exact tails and truncated moments.

mod cell;
mod tabulated;

pub use cell::{CellLaw, Part};
pub use tabulated::TailTable;

use serde::{Deserialize, Serialize};
use statrs::function::gamma::{gamma, gamma_lr, gamma_ur};

use crate::error::{Error, Result};

/// Base distribution `Y`; a [`MarginalSpec`] applies `shift + scale·Y`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum MarginalKind {
    /// ±1 with probability 1/2 each.
    Rademacher,
    /// `B − prob` for `B ~ Bernoulli(prob)`.
    CenteredBernoulli { prob: f64 },
    /// `P(Y > y) = y^{-β}` for `y ≥ 1`.
    Pareto { tail_index: f64 },
    Exponential { rate: f64 },
    DiscreteTable { values: Vec<f64>, probs: Vec<f64> },
    /// Random sign times a Pareto variable.
    SymmetrizedPareto { tail_index: f64 },
    /// Nonnegative law with a tabulated tail, as produced by the dominator construction.
    Tabulated { table: TailTable },
}

fn default_scale() -> f64 {
    1.0
}

/// `X = shift + scale·Y` with `Y` drawn from `kind`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MarginalSpec {
    #[serde(rename = "distribution")]
    pub kind: MarginalKind,
    #[serde(default)]
    pub shift: f64,
    #[serde(default = "default_scale")]
    pub scale: f64,
}

impl MarginalSpec {
    pub fn new(kind: MarginalKind) -> Self {
        MarginalSpec { kind, shift: 0.0, scale: 1.0 }
    }

    pub fn affine(kind: MarginalKind, shift: f64, scale: f64) -> Self {
        MarginalSpec { kind, shift, scale }
    }

    pub fn rademacher() -> Self {
        Self::new(MarginalKind::Rademacher)
    }

    /// Bernoulli(prob) on {0, 1}.
    pub fn bernoulli(prob: f64) -> Self {
        Self::affine(MarginalKind::CenteredBernoulli { prob }, prob, 1.0)
    }

    pub fn pareto(tail_index: f64) -> Self {
        Self::new(MarginalKind::Pareto { tail_index })
    }

    /// Pareto shifted by its exact mean (requires `tail_index > 1`).
    pub fn centered_pareto(tail_index: f64) -> Self {
        Self::affine(MarginalKind::Pareto { tail_index }, -tail_index / (tail_index - 1.0), 1.0)
    }

    pub fn symmetrized_pareto(tail_index: f64) -> Self {
        Self::new(MarginalKind::SymmetrizedPareto { tail_index })
    }

    pub fn exponential(rate: f64) -> Self {
        Self::new(MarginalKind::Exponential { rate })
    }

    pub fn discrete(values: Vec<f64>, probs: Vec<f64>) -> Self {
        Self::new(MarginalKind::DiscreteTable { values, probs })
    }

    /// The point mass at `value`.
    pub fn constant(value: f64) -> Self {
        Self::discrete(vec![value], vec![1.0])
    }

    /// Checks every invariant; returns all violations.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if !(self.scale > 0.0 && self.scale.is_finite()) {
            v.push(format!("marginal.scale must be a positive finite real (got {})", self.scale));
        }
        if !self.shift.is_finite() {
            v.push("marginal.shift must be finite".into());
        }
        match &self.kind {
            MarginalKind::Rademacher => {}
            MarginalKind::CenteredBernoulli { prob } => {
                if !(0.0..=1.0).contains(prob) {
                    v.push(format!("marginal.prob must lie in [0, 1] (got {prob})"));
                }
            }
            MarginalKind::Pareto { tail_index } | MarginalKind::SymmetrizedPareto { tail_index } => {
                if !(*tail_index > 0.0 && tail_index.is_finite()) {
                    v.push(format!("marginal.tail_index must be > 0 (got {tail_index})"));
                }
            }
            MarginalKind::Exponential { rate } => {
                if !(*rate > 0.0 && rate.is_finite()) {
                    v.push(format!("marginal.rate must be > 0 (got {rate})"));
                }
            }
            MarginalKind::DiscreteTable { values, probs } => {
                if values.is_empty() || values.len() != probs.len() {
                    v.push("marginal.values and marginal.probs must be nonempty and of equal length".into());
                }
                if probs.iter().any(|p| !(*p >= 0.0)) {
                    v.push("marginal.probs must be nonnegative".into());
                }
                let s: f64 = probs.iter().sum();
                if (s - 1.0).abs() > 1e-12 {
                    v.push(format!("marginal.probs must sum to 1 within 1e-12 (sum {s})"));
                }
                if values.iter().any(|x| !x.is_finite()) {
                    v.push("marginal.values must be finite".into());
                }
            }
            MarginalKind::Tabulated { table } => {
                if let Err(e) = table.validate() {
                    v.push(format!("marginal.table: {e}"));
                }
            }
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidSpec(v.join("; ")))
        }
    }

    /// The law of `X` itself.
    pub fn law(&self) -> CellLaw<'_> {
        CellLaw::new(&self.kind, self.shift, self.scale)
    }
}

/// Pareto contribution `E[Y^r 1(lo < Y < hi)]` for `Y ≥ 1` with index `beta`.
fn pareto_moment(beta: f64, r: f64, lo: f64, hi: f64) -> f64 {
    let a = lo.max(1.0);
    if !(hi > a) {
        return 0.0;
    }
    if r == 0.0 {
        return a.powf(-beta) - if hi.is_infinite() { 0.0 } else { hi.powf(-beta) };
    }
    let e = r - beta;
    if hi.is_infinite() {
        return if e < 0.0 { beta / (-e) * a.powf(e) } else { f64::INFINITY };
    }
    if e == 0.0 {
        beta * (hi / a).ln()
    } else {
        beta / e * (hi.powf(e) - a.powf(e))
    }
}

/// `E[Y^r 1(lo < Y < hi)]` for `Y ~ Exp(rate)`.
fn exponential_moment(rate: f64, r: f64, lo: f64, hi: f64) -> f64 {
    let a = lo.max(0.0);
    if !(hi > a) {
        return 0.0;
    }
    let s = r + 1.0;
    let (xa, xb) = (rate * a, rate * hi);
    let frac = if xa > s {
        gamma_ur(s, xa) - if hi.is_infinite() { 0.0 } else { gamma_ur(s, xb) }
    } else {
        (if hi.is_infinite() { 1.0 } else { gamma_lr(s, xb) }) - if a == 0.0 { 0.0 } else { gamma_lr(s, xa) }
    };
    gamma(s) * frac / rate.powf(r)
}

impl MarginalKind {
    /// Point masses `(value, prob)` of the base law.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        match self {
            MarginalKind::Rademacher => vec![(-1.0, 0.5), (1.0, 0.5)],
            MarginalKind::CenteredBernoulli { prob } => {
                let mut v = Vec::new();
                if *prob < 1.0 {
                    v.push((-prob, 1.0 - prob));
                }
                if *prob > 0.0 {
                    v.push((1.0 - prob, *prob));
                }
                v
            }
            MarginalKind::DiscreteTable { values, probs } => {
                let mut v: Vec<(f64, f64)> =
                    values.iter().copied().zip(probs.iter().copied()).filter(|(_, p)| *p > 0.0).collect();
                v.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
                let mut merged: Vec<(f64, f64)> = Vec::with_capacity(v.len());
                for (x, p) in v {
                    match merged.last_mut() {
                        Some(last) if last.0 == x => last.1 += p,
                        _ => merged.push((x, p)),
                    }
                }
                merged
            }
            MarginalKind::Tabulated { table } => table.atoms(),
            _ => Vec::new(),
        }
    }

    pub fn is_discrete(&self) -> bool {
        matches!(
            self,
            MarginalKind::Rademacher | MarginalKind::CenteredBernoulli { .. } | MarginalKind::DiscreteTable { .. }
        )
    }

    /// `P(Y > y)`.
    pub fn sf(&self, y: f64) -> f64 {
        match self {
            MarginalKind::Pareto { tail_index } => {
                if y < 1.0 {
                    1.0
                } else {
                    y.powf(-tail_index)
                }
            }
            MarginalKind::Exponential { rate } => {
                if y < 0.0 {
                    1.0
                } else {
                    (-rate * y).exp()
                }
            }
            MarginalKind::SymmetrizedPareto { tail_index } => {
                if y >= 1.0 {
                    0.5 * y.powf(-tail_index)
                } else if y >= -1.0 {
                    0.5
                } else {
                    1.0 - 0.5 * (-y).powf(-tail_index)
                }
            }
            MarginalKind::Tabulated { table } => table.sf(y),
            _ => self.atoms().iter().filter(|(x, _)| *x > y).map(|(_, p)| p).sum::<f64>().min(1.0),
        }
    }

    /// `P(Y ≥ y)`.
    pub fn sf_left(&self, y: f64) -> f64 {
        match self {
            MarginalKind::Pareto { .. } | MarginalKind::Exponential { .. } => self.sf(y),
            MarginalKind::SymmetrizedPareto { tail_index } => {
                if y > 1.0 {
                    0.5 * y.powf(-tail_index)
                } else if y > -1.0 {
                    0.5
                } else {
                    1.0 - 0.5 * (-y).powf(-tail_index)
                }
            }
            MarginalKind::Tabulated { table } => table.sf_left(y),
            _ => self.atoms().iter().filter(|(x, _)| *x >= y).map(|(_, p)| p).sum::<f64>().min(1.0),
        }
    }

    /// `P(Y < y)`.
    pub fn cdf_left(&self, y: f64) -> f64 {
        match self {
            MarginalKind::SymmetrizedPareto { tail_index } if y <= -1.0 => 0.5 * (-y).powf(-tail_index),
            _ => 1.0 - self.sf_left(y),
        }
    }

    /// `P(Y ≤ y)`.
    pub fn cdf(&self, y: f64) -> f64 {
        match self {
            MarginalKind::SymmetrizedPareto { tail_index } if y < -1.0 => 0.5 * (-y).powf(-tail_index),
            _ => 1.0 - self.sf(y),
        }
    }

    /// Generalized inverse `inf{y : P(Y ≤ y) ≥ u}` for `u ∈ (0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        match self {
            MarginalKind::Pareto { tail_index } => (1.0 - u).powf(-1.0 / tail_index),
            MarginalKind::Exponential { rate } => -(-u).ln_1p() / rate,
            MarginalKind::SymmetrizedPareto { tail_index } => {
                if u < 0.5 {
                    -(2.0 * u).powf(-1.0 / tail_index)
                } else {
                    (2.0 * (1.0 - u)).powf(-1.0 / tail_index)
                }
            }
            MarginalKind::Tabulated { table } => table.quantile(u),
            _ => {
                let atoms = self.atoms();
                let mut acc = 0.0;
                for (x, p) in &atoms {
                    acc += p;
                    if acc >= u {
                        return *x;
                    }
                }
                atoms.last().map(|a| a.0).unwrap_or(0.0)
            }
        }
    }

    /// Whether `Y` and `−Y` have the same law.
    pub fn is_symmetric(&self) -> bool {
        matches!(self, MarginalKind::Rademacher | MarginalKind::SymmetrizedPareto { .. })
    }

    /// `x` with `P(Y > x) = w`, accurate for small `w`.
    pub fn tail_quantile(&self, w: f64) -> f64 {
        match self {
            MarginalKind::Pareto { tail_index } => w.powf(-1.0 / tail_index),
            MarginalKind::Exponential { rate } => -w.ln() / rate,
            MarginalKind::SymmetrizedPareto { tail_index } => {
                if w < 0.5 {
                    (2.0 * w).powf(-1.0 / tail_index)
                } else {
                    -(2.0 * (1.0 - w)).powf(-1.0 / tail_index)
                }
            }
            MarginalKind::Tabulated { table } => table.tail_quantile(w),
            _ => self.quantile(1.0 - w),
        }
    }

    /// `E[|Y|^r 1(lo < Y < hi)]`, endpoints possibly infinite.
    pub fn abs_moment_open(&self, r: f64, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        match self {
            MarginalKind::Pareto { tail_index } => pareto_moment(*tail_index, r, lo, hi),
            MarginalKind::Exponential { rate } => exponential_moment(*rate, r, lo, hi),
            MarginalKind::SymmetrizedPareto { tail_index } => {
                0.5 * pareto_moment(*tail_index, r, lo, hi) + 0.5 * pareto_moment(*tail_index, r, -hi, -lo)
            }
            MarginalKind::Tabulated { table } => table.moment_open(r, lo, hi),
            _ => self
                .atoms()
                .iter()
                .filter(|(x, _)| *x > lo && *x < hi)
                .map(|(x, p)| if r == 0.0 { *p } else if *x == 0.0 { 0.0 } else { p * x.abs().powf(r) })
                .sum(),
        }
    }

    /// Right end of the support (may be infinite).
    pub fn upper_bound(&self) -> f64 {
        match self {
            MarginalKind::Pareto { .. } | MarginalKind::Exponential { .. } | MarginalKind::SymmetrizedPareto { .. } => {
                f64::INFINITY
            }
            MarginalKind::Tabulated { table } => table.upper_bound(),
            _ => self.atoms().last().map(|a| a.0).unwrap_or(0.0),
        }
    }

    /// Left end of the support (may be infinite).
    pub fn lower_bound(&self) -> f64 {
        match self {
            MarginalKind::Pareto { .. } => 1.0,
            MarginalKind::Exponential { .. } | MarginalKind::Tabulated { .. } => 0.0,
            MarginalKind::SymmetrizedPareto { .. } => f64::NEG_INFINITY,
            _ => self.atoms().first().map(|a| a.0).unwrap_or(0.0),
        }
    }

    /// Regular-variation index of `P(|Y| > y)`; `None` for bounded or light tails.
    pub fn tail_index(&self) -> Option<f64> {
        match self {
            MarginalKind::Pareto { tail_index } | MarginalKind::SymmetrizedPareto { tail_index } => Some(*tail_index),
            MarginalKind::Tabulated { table } => table.tail_index(),
            _ => None,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pareto_tail_and_moment() {
        let k = MarginalKind::Pareto { tail_index: 2.0 };
        assert!((k.sf(10.0) - 0.01).abs() < 1e-16);
        let k3 = MarginalKind::Pareto { tail_index: 3.0 };
        assert!((k3.abs_moment_open(2.0, 0.0, 4.0) - 2.25).abs() < 1e-14);
        assert!((k3.abs_moment_open(3.0, 0.0, 4.0) - 3.0 * 4f64.ln()).abs() < 1e-14);
        assert!(k3.abs_moment_open(3.0, 0.0, f64::INFINITY).is_infinite());
    }

    #[test]
    fn exponential_moments_match_quadrature() {
        let k = MarginalKind::Exponential { rate: 2.0 };
        for &(r, lo, hi) in &[(1.0, 0.0, f64::INFINITY), (2.5, 0.3, 4.0), (0.5, 10.0, 20.0)] {
            let want = if hi.is_infinite() {
                crate::quad::integrate_to_inf(|y| y.powf(r) * 2.0 * (-2.0 * y).exp(), lo, 1e-13)
            } else {
                crate::quad::integrate(|y| y.powf(r) * 2.0 * (-2.0 * y).exp(), lo, hi, 1e-13)
            };
            let got = k.abs_moment_open(r, lo, hi);
            assert!((got - want).abs() < 1e-10 * (1.0 + want), "{r} {lo} {hi}: {got} vs {want}");
        }
    }

    #[test]
    fn symmetrized_pareto_is_symmetric() {
        let k = MarginalKind::SymmetrizedPareto { tail_index: 1.5 };
        for &y in &[0.0, 0.5, 1.0, 2.0, 17.0] {
            assert!((k.sf(y) - k.cdf(-y)).abs() < 1e-15 || y.abs() < 1.0);
        }
        assert!((k.quantile(0.25) + k.quantile(0.75)).abs() < 1e-12);
        assert!((k.abs_moment_open(1.0, f64::NEG_INFINITY, f64::INFINITY) - 3.0).abs() < 1e-12);
    }

    #[test]
    fn discrete_table_merges_and_sorts() {
        let k = MarginalKind::DiscreteTable { values: vec![2.0, -1.0, 2.0], probs: vec![0.25, 0.5, 0.25] };
        assert_eq!(k.atoms(), vec![(-1.0, 0.5), (2.0, 0.5)]);
        assert_eq!(k.quantile(0.5), -1.0);
        assert_eq!(k.quantile(0.51), 2.0);
        assert_eq!(k.sf_left(2.0), 0.5);
        assert_eq!(k.sf(2.0), 0.0);
    }

    #[test]
    fn validation_lists_every_problem() {
        let m = MarginalSpec::affine(MarginalKind::DiscreteTable { values: vec![1.0], probs: vec![0.5, 0.6] }, 0.0, -1.0);
        assert_eq!(m.violations().len(), 3);
        assert!(MarginalSpec::pareto(0.0).validate().is_err());
        assert!(MarginalSpec::exponential(-1.0).validate().is_err());
    }
}
