//! Slowly varying functions and stochastic domination.
//!
//! Every logarithm here follows the convention `log a = ln(max(a, 2))`.

mod domination;

pub use domination::{
    domination_check, dominator_weighted_moment, tail_functional, uniform_integrability_trace, weighted_moment,
    DominationReport, UiTrace,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `ln(max(a, 2))`.
#[inline]
pub fn log2v(a: f64) -> f64 {
    a.max(2.0).ln()
}

/// The `k`-fold iterated logarithm (`k ≥ 1`), each step under the convention.
pub fn iterated_log(x: f64, k: u32) -> f64 {
    let mut y = x;
    for _ in 0..k {
        y = log2v(y);
    }
    y
}

/// `(log x)(log log x)⋯` with `nu` factors.
pub fn log_nu(x: f64, nu: u32) -> f64 {
    let mut y = x;
    let mut prod = 1.0;
    for _ in 0..nu {
        y = log2v(y);
        prod *= y;
    }
    prod
}

/// `log_nu` with its last factor squared.
pub fn log_nu_sq(x: f64, nu: u32) -> f64 {
    log_nu(x, nu) * iterated_log(x, nu)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum SlowlyVarying {
    Constant {
        #[serde(default = "one")]
        value: f64,
    },
    /// `(log x)^γ`.
    LogPower { gamma: f64 },
    /// `(log log x)^γ`.
    LogLogPower { gamma: f64 },
    IteratedLogProduct { nu: u32 },
    IteratedLogProductSquaredLast { nu: u32 },
}

fn one() -> f64 {
    1.0
}

impl SlowlyVarying {
    pub fn constant() -> Self {
        SlowlyVarying::Constant { value: 1.0 }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            SlowlyVarying::Constant { value } => value,
            SlowlyVarying::LogPower { gamma } => log2v(x).powf(gamma),
            SlowlyVarying::LogLogPower { gamma } => iterated_log(x, 2).powf(gamma),
            SlowlyVarying::IteratedLogProduct { nu } => log_nu(x, nu),
            SlowlyVarying::IteratedLogProductSquaredLast { nu } => log_nu_sq(x, nu),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        match *self {
            SlowlyVarying::Constant { value } if !(value > 0.0 && value.is_finite()) => {
                vec![format!("constant slowly varying function must be positive (got {value})")]
            }
            SlowlyVarying::LogPower { gamma } | SlowlyVarying::LogLogPower { gamma } if !gamma.is_finite() => {
                vec!["slowly varying exponent must be finite".into()]
            }
            SlowlyVarying::IteratedLogProduct { nu } | SlowlyVarying::IteratedLogProductSquaredLast { nu } if nu == 0 => {
                vec!["iterated log products need nu ≥ 1".into()]
            }
            _ => Vec::new(),
        }
    }

    /// Whether `x ↦ eval(x)` is nondecreasing on `[0, ∞)`.
    pub fn is_nondecreasing(&self) -> bool {
        match *self {
            SlowlyVarying::Constant { .. } => true,
            SlowlyVarying::LogPower { gamma } | SlowlyVarying::LogLogPower { gamma } => gamma >= 0.0,
            _ => true,
        }
    }

    /// The de Bruijn conjugate, for the families with a closed form.
    pub fn conjugate(&self) -> Result<SlowlyVarying> {
        match *self {
            SlowlyVarying::Constant { value } => Ok(SlowlyVarying::Constant { value: 1.0 / value }),
            SlowlyVarying::LogPower { gamma } => Ok(SlowlyVarying::LogPower { gamma: -gamma }),
            SlowlyVarying::LogLogPower { gamma } => Ok(SlowlyVarying::LogLogPower { gamma: -gamma }),
            _ => Err(Error::Unsupported(format!("no closed-form de Bruijn conjugate for {self:?}"))),
        }
    }
}

/// Alias with the name used in the operation list.
pub fn debruijn_conjugate(family: &SlowlyVarying) -> Result<SlowlyVarying> {
    family.conjugate()
}

/// `|L(x) · L̃(x L(x)) − 1|`.
pub fn debruijn_residual(family: &SlowlyVarying, x: f64) -> Result<f64> {
    let c = family.conjugate()?;
    let l = family.eval(x);
    Ok((l * c.eval(x * l) - 1.0).abs())
}

/// `|L̃(x) · L(x L̃(x)) − 1|`.
pub fn debruijn_residual_swapped(family: &SlowlyVarying, x: f64) -> Result<f64> {
    let c = family.conjugate()?;
    let lt = c.eval(x);
    Ok((lt * family.eval(x * lt) - 1.0).abs())
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::E;

    #[test]
    fn log_nu_examples() {
        assert!((log_nu(E, 1) - 1.0).abs() < 1e-15);
        assert!((log_nu(0.0, 1) - 2f64.ln()).abs() < 1e-15);
        assert!((log_nu(E.powf(E), 2) - E).abs() < 1e-12);
        assert!((log_nu_sq(E, 1) - 1.0).abs() < 1e-15);
        assert!((log_nu_sq(E.powf(E), 2) - E).abs() < 1e-12);
    }

    #[test]
    fn conjugates() {
        assert_eq!(SlowlyVarying::constant().conjugate().unwrap(), SlowlyVarying::constant());
        assert_eq!(
            SlowlyVarying::LogPower { gamma: 2.0 }.conjugate().unwrap(),
            SlowlyVarying::LogPower { gamma: -2.0 }
        );
        let c = SlowlyVarying::LogLogPower { gamma: 1.0 }.conjugate().unwrap();
        let x = 1e9;
        assert!((c.eval(x) - 1.0 / iterated_log(x, 2)).abs() < 1e-15);
        assert!(SlowlyVarying::IteratedLogProduct { nu: 2 }.conjugate().is_err());
    }

    #[test]
    fn residual_value_at_a_million() {
        let r = debruijn_residual(&SlowlyVarying::LogPower { gamma: 1.0 }, 1e6).unwrap();
        let l = 1e6f64.ln();
        assert!((r - (l / (1e6 * l).ln() - 1.0).abs()).abs() < 1e-15);
        assert!((r - 0.16).abs() < 0.01);
        assert_eq!(debruijn_residual(&SlowlyVarying::constant(), 1e6).unwrap(), 0.0);
    }
}
