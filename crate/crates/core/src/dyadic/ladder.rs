use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::varying::SlowlyVarying;

/// Number of precomputed dyadic rungs `b(2^s)`, `s = 0..LEVELS`.
pub const LEVELS: usize = 63;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum LadderKind {
    /// `b(n) = n^α`.
    PowerAlpha { alpha: f64 },
    /// `b(n) = n^α · L̃(n^α)` with `L̃` the de Bruijn conjugate of `family`.
    PowerWithConjugate { alpha: f64, family: SlowlyVarying },
}

/// Increasing positive truncation levels `b(n)`.
#[derive(Debug, Clone, PartialEq)]
pub struct TruncationLadder {
    kind: LadderKind,
    conjugate: Option<SlowlyVarying>,
    dyadic: Vec<f64>,
}

impl TruncationLadder {
    pub fn new(kind: LadderKind) -> Result<Self> {
        let (alpha, conjugate) = match &kind {
            LadderKind::PowerAlpha { alpha } => (*alpha, None),
            LadderKind::PowerWithConjugate { alpha, family } => (*alpha, Some(family.conjugate()?)),
        };
        if !(alpha > 0.0 && alpha.is_finite()) {
            return Err(Error::InvalidSpec(format!("ladder exponent must be positive (got {alpha})")));
        }
        let mut ladder = TruncationLadder { kind, conjugate, dyadic: Vec::with_capacity(LEVELS) };
        for s in 0..LEVELS {
            let x = (alpha * s as f64).exp2();
            let b = match &ladder.conjugate {
                None => x,
                Some(c) => x * c.eval(x),
            };
            ladder.dyadic.push(b);
        }
        for (s, w) in ladder.dyadic.windows(2).enumerate() {
            if !(w[0] > 0.0 && w[1] > w[0]) {
                return Err(Error::InvalidSpec(format!(
                    "ladder is not strictly increasing and positive at b(2^{s}) = {}, b(2^{}) = {}",
                    w[0],
                    s + 1,
                    w[1]
                )));
            }
        }
        Ok(ladder)
    }

    /// `b(n) = n^α`.
    pub fn power(alpha: f64) -> Result<Self> {
        Self::new(LadderKind::PowerAlpha { alpha })
    }

    pub fn kind(&self) -> &LadderKind {
        &self.kind
    }

    pub fn alpha(&self) -> f64 {
        match self.kind {
            LadderKind::PowerAlpha { alpha } | LadderKind::PowerWithConjugate { alpha, .. } => alpha,
        }
    }

    /// `b(n)` for real `n ≥ 1`.
    pub fn b(&self, n: f64) -> f64 {
        let x = n.powf(self.alpha());
        match &self.conjugate {
            None => x,
            Some(c) => x * c.eval(x),
        }
    }

    /// `b(2^s)`.
    #[inline]
    pub fn b_dyadic(&self, s: u32) -> f64 {
        self.dyadic[s as usize]
    }
}
