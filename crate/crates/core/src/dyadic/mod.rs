//! Dyadic index arithmetic, truncation ladders, prefix tables and the
//! telescoping decomposition of rectangular partial sums.

mod decomp;
mod ladder;
mod prefix;

pub use decomp::{telescoping_decompose, telescoping_decompose_signed, DecompositionReport, SignedDecomposition};
pub use ladder::{LadderKind, TruncationLadder};
pub use prefix::{Centering, PrefixSumTable};

use crate::error::{Error, Result};
use crate::model::FieldSample;

/// `⌊u / 2^s⌋ · 2^s`.
#[inline]
pub fn dyadic_floor(u: u64, s: u32) -> u64 {
    if s >= 64 {
        0
    } else {
        (u >> s) << s
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ClampMode {
    /// `min(x, b)` for `x ≥ 0`.
    Nonnegative,
    /// `max(−b, min(x, b))`.
    Signed,
}

/// Truncation at level `b`.
pub fn clamp_truncate(x: f64, b: f64, mode: ClampMode) -> Result<f64> {
    if !(b > 0.0) {
        return Err(Error::Domain(format!("truncation level must be positive (got {b})")));
    }
    match mode {
        ClampMode::Nonnegative => {
            if x < 0.0 {
                Err(Error::Domain(format!("nonnegative truncation applied to {x}")))
            } else {
                Ok(x.min(b))
            }
        }
        ClampMode::Signed => Ok(x.clamp(-b, b)),
    }
}

/// `min(x, b(2^s)) − min(x, b(2^{s−1}))` for `x ≥ 0`, `s ≥ 1`.
pub fn ladder_increment(x: f64, s: u32, ladder: &TruncationLadder) -> Result<f64> {
    if s == 0 {
        return Err(Error::Domain("ladder increments start at s = 1".into()));
    }
    let hi = clamp_truncate(x, ladder.b_dyadic(s), ClampMode::Nonnegative)?;
    let lo = clamp_truncate(x, ladder.b_dyadic(s - 1), ClampMode::Nonnegative)?;
    Ok(hi - lo)
}

/// `max_{1≤u≤rows, 1≤v≤cols} |Σ_{i≤u, j≤v} (x_{ij} − c_{ij})| / norming`.
pub fn max_normalized_sum(field: &FieldSample, centering: &Centering, norming: f64) -> Result<f64> {
    if !(norming > 0.0) {
        return Err(Error::Domain(format!("norming must be positive (got {norming})")));
    }
    let t = PrefixSumTable::from_sample(field, centering)?;
    Ok(t.max_abs(field.rows(), field.cols()) / norming)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floor_examples() {
        assert_eq!(dyadic_floor(5, 1), 4);
        assert_eq!(dyadic_floor(5, 3), 0);
        assert_eq!(dyadic_floor(8, 2), 8);
        assert_eq!(dyadic_floor(5, 0), 5);
    }

    #[test]
    fn clamp_examples() {
        assert_eq!(clamp_truncate(3.0, 2.0, ClampMode::Nonnegative).unwrap(), 2.0);
        assert_eq!(clamp_truncate(1.5, 2.0, ClampMode::Nonnegative).unwrap(), 1.5);
        assert_eq!(clamp_truncate(-5.0, 2.0, ClampMode::Signed).unwrap(), -2.0);
        assert!(clamp_truncate(-1.0, 2.0, ClampMode::Nonnegative).is_err());
    }

    #[test]
    fn increment_examples() {
        let lad = TruncationLadder::power(1.0).unwrap();
        assert_eq!(ladder_increment(1.0, 2, &lad).unwrap(), 0.0);
        assert_eq!(ladder_increment(3.0, 2, &lad).unwrap(), 1.0);
        assert_eq!(ladder_increment(100.0, 2, &lad).unwrap(), 2.0);
    }

    #[test]
    fn normalized_sum_examples() {
        let f = FieldSample::from_values(0, 0, vec![3.0]).unwrap();
        assert_eq!(max_normalized_sum(&f, &Centering::Uniform(1.0), 2.0).unwrap(), 1.0);
        let z = FieldSample::from_values(1, 1, vec![0.0; 4]).unwrap();
        assert_eq!(max_normalized_sum(&z, &Centering::Zero, 1.0).unwrap(), 0.0);
    }
}
