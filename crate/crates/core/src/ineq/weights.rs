use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Parameters `(p, α, q, a)` of the weights
/// `λ_{m,n,s,t} = 2^{a(m+n) + (α−a)(s+t)}`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightScheme {
    pub p: f64,
    pub alpha: f64,
    pub q: f64,
    pub a: f64,
}

impl WeightScheme {
    pub fn new(p: f64, alpha: f64, q: f64, a: f64) -> Result<Self> {
        let v = Self::violations(p, alpha, q, a);
        if v.is_empty() {
            Ok(WeightScheme { p, alpha, q, a })
        } else {
            Err(Error::Config(v))
        }
    }

    /// The scheme with `a` at [`WeightScheme::default_a`].
    pub fn with_default_a(p: f64, alpha: f64, q: f64) -> Result<Self> {
        let v = Self::param_violations(p, alpha, q);
        if !v.is_empty() {
            return Err(Error::Config(v));
        }
        Self::new(p, alpha, q, Self::default_a(p, alpha, q))
    }

    /// Midpoint of `(αp/(2q), α)`; for `p ≥ 2` the midpoint of
    /// `(α − (q−1)/(2q), α)`.
    pub fn default_a(p: f64, alpha: f64, q: f64) -> f64 {
        let lo = if p >= 2.0 { alpha - (q - 1.0) / (2.0 * q) } else { alpha * p / (2.0 * q) };
        0.5 * (lo + alpha)
    }

    fn param_violations(p: f64, alpha: f64, q: f64) -> Vec<String> {
        let mut v = Vec::new();
        if !(p >= 1.0 && p.is_finite()) {
            v.push(format!("p must satisfy p ≥ 1 (got {p})"));
        }
        if !(alpha > 0.5 && alpha <= 1.0) {
            v.push(format!("alpha must lie in (1/2, 1] (got {alpha})"));
        }
        if !(q >= 1.0 && q.is_finite()) {
            v.push(format!("q must satisfy q ≥ 1 (got {q})"));
        }
        if v.is_empty() && p >= 2.0 {
            let need = (alpha * p - 1.0) / (2.0 * alpha - 1.0);
            if !(q > need) {
                v.push(format!("p ≥ 2 requires q>(αp−1)/(2α−1) = {need} (got q = {q})"));
            }
        }
        v
    }

    /// Every violated constraint, not just the first.
    pub fn violations(p: f64, alpha: f64, q: f64, a: f64) -> Vec<String> {
        let mut v = Self::param_violations(p, alpha, q);
        if v.is_empty() {
            let lo = alpha * p / (2.0 * q);
            if !(a > lo && a < alpha) {
                v.push(format!("a must satisfy αp/(2q) < a < α, i.e. {lo} < a < {alpha} (got {a})"));
            }
        }
        v
    }

    /// `λ_{m,n,s,t}` for `1 ≤ s ≤ m`, `1 ≤ t ≤ n`.
    pub fn weight(&self, m: u32, n: u32, s: u32, t: u32) -> Result<f64> {
        if s == 0 || t == 0 || s > m || t > n {
            return Err(Error::Domain(format!("weight index (s, t) = ({s}, {t}) outside 1..={m} × 1..={n}")));
        }
        Ok(self.lambda(m, n, s, t))
    }

    /// Unchecked `λ`; the exponent is split so that `λ_{m,n,m,n} = 2^{α(m+n)}` exactly.
    #[inline]
    pub(crate) fn lambda(&self, m: u32, n: u32, s: u32, t: u32) -> f64 {
        (self.alpha * (s + t) as f64 + self.a * (m + n - s - t) as f64).exp2()
    }

    /// `a_{m,n} = Σ_{s ≤ m, t ≤ n} λ_{m,n,s,t}`.
    pub fn weight_total(&self, m: u32, n: u32) -> Result<f64> {
        if m == 0 || n == 0 {
            return Err(Error::Domain("weight_total needs m, n ≥ 1".into()));
        }
        let mut total = 0.0;
        // smallest terms first
        for s in 1..=m {
            for t in 1..=n {
                total += self.lambda(m, n, s, t);
            }
        }
        Ok(total)
    }

    /// `C₁ = (2^{α−a} / (2^{α−a} − 1))²`.
    pub fn c1(&self) -> f64 {
        let r = (self.alpha - self.a).exp2();
        (r / (r - 1.0)).powi(2)
    }

    /// `Σ λ^{2q/(2q−1)}`; only meaningful for `q > 1/2`.
    pub fn holder_sum(&self, m: u32, n: u32) -> f64 {
        let e = 2.0 * self.q / (2.0 * self.q - 1.0);
        let mut total = 0.0;
        for s in 1..=m {
            for t in 1..=n {
                total += self.lambda(m, n, s, t).powf(e);
            }
        }
        total
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weight_examples() {
        // a = 0.5 sits on the boundary for p = q = 1 but the evaluators do not care
        let w = WeightScheme { p: 1.0, alpha: 1.0, q: 1.0, a: 0.5 };
        assert!(WeightScheme::new(1.0, 1.0, 1.0, 0.5).is_err());
        assert_eq!(w.weight(1, 1, 1, 1).unwrap(), 4.0);
        assert_eq!(w.weight(2, 1, 1, 1).unwrap(), 2f64.powf(2.5));
        assert_eq!(w.weight(5, 7, 5, 7).unwrap(), 2f64.powi(12));
        assert!(w.weight(2, 2, 3, 1).is_err());
        assert!(w.weight(2, 2, 0, 1).is_err());
    }

    #[test]
    fn total_examples() {
        let w = WeightScheme { p: 1.0, alpha: 1.0, q: 1.0, a: 0.5 };
        assert_eq!(w.weight_total(1, 1).unwrap(), 4.0);
        let expect = 4.0 * (2f64.sqrt() + 2.0).powi(2);
        assert!((w.weight_total(2, 2).unwrap() - expect).abs() < 1e-12);
        assert!((w.c1() - 11.656854249492381).abs() < 1e-12);
    }

    #[test]
    fn constraint_messages() {
        let v = WeightScheme::violations(2.0, 1.0, 1.0, 0.9);
        assert!(v.iter().any(|s| s.contains("q>(αp−1)/(2α−1)")), "{v:?}");
        assert_eq!(WeightScheme::violations(0.5, 0.2, 0.5, 0.1).len(), 3);
        let d = WeightScheme::with_default_a(1.5, 2.0 / 3.0, 1.0).unwrap();
        assert!((d.a - 0.5 * (0.5 + 2.0 / 3.0)).abs() < 1e-15);
        let d = WeightScheme::with_default_a(2.0, 1.0, 2.0).unwrap();
        assert!((d.a - 0.875).abs() < 1e-15);
    }
}
