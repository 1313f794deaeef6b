use super::MarginalKind;
use crate::quad;

/// Which nonnegative functional of `X` a pipeline works with.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Part {
    /// `X⁺ = max(X, 0)`; equals `X` for nonnegative laws.
    Positive,
    /// `X⁻ = max(−X, 0)`.
    Negative,
    /// `|X|`.
    Abs,
}

/// The law of `loc + sc·Y` for a base law `Y` and `sc > 0`.
#[derive(Debug, Clone, Copy)]
pub struct CellLaw<'a> {
    pub base: &'a MarginalKind,
    pub loc: f64,
    pub sc: f64,
}

fn binom(n: u32, k: u32) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (n - i) as f64 / (i + 1) as f64;
    }
    c
}

impl<'a> CellLaw<'a> {
    pub fn new(base: &'a MarginalKind, loc: f64, sc: f64) -> Self {
        CellLaw { base, loc, sc }
    }

    /// The same law multiplied by `c > 0`.
    pub fn scaled(&self, c: f64) -> Self {
        CellLaw { base: self.base, loc: self.loc * c, sc: self.sc * c }
    }

    #[inline]
    fn base_coord(&self, x: f64) -> f64 {
        (x - self.loc) / self.sc
    }

    /// `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        self.base.sf(self.base_coord(x))
    }

    /// `P(X ≥ x)`.
    pub fn sf_left(&self, x: f64) -> f64 {
        self.base.sf_left(self.base_coord(x))
    }

    /// `P(X ≤ x)`.
    pub fn cdf(&self, x: f64) -> f64 {
        self.base.cdf(self.base_coord(x))
    }

    /// `P(X < x)`.
    pub fn cdf_left(&self, x: f64) -> f64 {
        self.base.cdf_left(self.base_coord(x))
    }

    /// `P(X = x)`.
    pub fn atom(&self, x: f64) -> f64 {
        (self.sf_left(x) - self.sf(x)).max(0.0)
    }

    pub fn quantile(&self, u: f64) -> f64 {
        self.loc + self.sc * self.base.quantile(u)
    }

    /// `x` with `P(X > x) = w`.
    pub fn tail_quantile(&self, w: f64) -> f64 {
        self.loc + self.sc * self.base.tail_quantile(w)
    }

    pub fn upper_bound(&self) -> f64 {
        self.loc + self.sc * self.base.upper_bound()
    }

    pub fn lower_bound(&self) -> f64 {
        self.loc + self.sc * self.base.lower_bound()
    }

    pub fn is_nonnegative(&self) -> bool {
        self.lower_bound() >= 0.0
    }

    /// Point masses of `X`.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        self.base.atoms().into_iter().map(|(y, p)| (self.loc + self.sc * y, p)).collect()
    }

    /// `P(lo < X < hi)`.
    fn prob_open(&self, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        (self.cdf_left(hi) - self.cdf(lo)).max(0.0)
    }

    /// Signed raw moment `E[Y^k 1(lo < Y < hi)]` of the base law.
    fn base_raw_moment(&self, k: u32, lo: f64, hi: f64) -> f64 {
        if k == 0 {
            return (self.base.cdf_left(hi) - self.base.cdf(lo)).max(0.0);
        }
        let pos = self.base.abs_moment_open(k as f64, lo.max(0.0), hi);
        let neg = self.base.abs_moment_open(k as f64, lo, hi.min(0.0));
        if k.is_multiple_of(2) {
            pos + neg
        } else {
            pos - neg
        }
    }

    /// `E[|X|^r 1(lo < X < hi)]` where `lo`, `hi` may be infinite.
    pub fn abs_moment_open(&self, r: f64, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        if r == 0.0 {
            return self.prob_open(lo, hi);
        }
        if self.loc == 0.0 {
            return self.sc.powf(r) * self.base.abs_moment_open(r, lo / self.sc, hi / self.sc);
        }
        if self.base.is_discrete() {
            return self
                .atoms()
                .iter()
                .filter(|(x, _)| *x > lo && *x < hi)
                .map(|(x, p)| if *x == 0.0 { 0.0 } else { p * x.abs().powf(r) })
                .sum();
        }
        if r.fract() == 0.0 && r <= 8.0 {
            let n = r as u32;
            let mut total = 0.0;
            for (a, b, sign) in [(lo, hi.min(0.0), -1.0f64), (lo.max(0.0), hi, 1.0)] {
                if !(b > a) {
                    continue;
                }
                let (ya, yb) = (self.base_coord(a), self.base_coord(b));
                let top = self.base_raw_moment(n, ya, yb);
                if top.is_infinite() {
                    return f64::INFINITY;
                }
                // (sign·X)^n = sign^n Σ C(n,k) loc^{n−k} sc^k Y^k
                let mut piece = 0.0;
                for k in 0..=n {
                    let m = if k == n { top } else { self.base_raw_moment(k, ya, yb) };
                    piece += binom(n, k) * self.loc.powi((n - k) as i32) * self.sc.powi(k as i32) * m;
                }
                total += sign.powi(n as i32) * piece;
            }
            return total.max(0.0);
        }
        self.quadrature_moment(r, lo, hi)
    }

    /// `∫ |Q(u)|^r du` over the quantile range of `(lo, hi)`.
    fn quadrature_moment(&self, r: f64, lo: f64, hi: f64) -> f64 {
        if let Some(beta) = self.base.tail_index() {
            let unbounded = (hi.is_infinite() && self.base.upper_bound().is_infinite())
                || (lo.is_infinite() && self.base.lower_bound().is_infinite());
            if unbounded && r >= beta {
                return f64::INFINITY;
            }
        }
        let (ua, ub) = (self.cdf(lo), self.cdf_left(hi));
        if !(ub > ua) {
            return 0.0;
        }
        let f = |u: f64| {
            let x = self.quantile(u);
            if x > lo && x < hi {
                x.abs().powf(r)
            } else {
                0.0
            }
        };
        quad::integrate(f, ua, ub, 1e-11)
    }

    /// `E[|X|^r 1(|X| ≤ a)]`.
    pub fn truncated_moment(&self, r: f64, a: f64) -> f64 {
        let inner = self.abs_moment_open(r, -a, a);
        let edge = if r == 0.0 { 1.0 } else { a.powf(r) };
        let ends = if a == 0.0 { self.atom(0.0) } else { self.atom(a) + self.atom(-a) };
        inner + edge * ends
    }

    /// `E[X 1(|X| ≤ t)]`.
    pub fn truncated_mean(&self, t: f64) -> f64 {
        let pos = self.abs_moment_open(1.0, 0.0, t) + t * self.atom(t);
        let neg = self.abs_moment_open(1.0, -t, 0.0) + if t > 0.0 { t * self.atom(-t) } else { 0.0 };
        pos - neg
    }

    /// `E X`; infinite or NaN when it does not exist.
    pub fn mean(&self) -> f64 {
        let pos = self.abs_moment_open(1.0, 0.0, f64::INFINITY);
        let neg = self.abs_moment_open(1.0, f64::NEG_INFINITY, 0.0);
        pos - neg
    }

    /// `P(Z > x)` for the chosen part `Z`.
    pub fn part_sf(&self, part: Part, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        match part {
            Part::Positive => self.sf(x),
            Part::Negative => self.cdf_left(-x),
            Part::Abs => (self.sf(x) + self.cdf_left(-x)).min(1.0),
        }
    }

    /// `P(Z ≥ x)` for `x > 0`.
    pub fn part_sf_left(&self, part: Part, x: f64) -> f64 {
        match part {
            Part::Positive => self.sf_left(x),
            Part::Negative => self.cdf(-x),
            Part::Abs => (self.sf_left(x) + self.cdf(-x)).min(1.0),
        }
    }

    /// `E[Z^r 1(0 < Z < b)]`.
    fn part_moment_below(&self, part: Part, r: f64, b: f64) -> f64 {
        match part {
            Part::Positive => self.abs_moment_open(r, 0.0, b),
            Part::Negative => self.abs_moment_open(r, -b, 0.0),
            Part::Abs => self.abs_moment_open(r, 0.0, b) + self.abs_moment_open(r, -b, 0.0),
        }
    }

    /// `E[min(Z, b)^r]` for `b > 0`, `r > 0`.
    pub fn clamp_moment(&self, part: Part, r: f64, b: f64) -> f64 {
        self.part_moment_below(part, r, b) + b.powf(r) * self.part_sf_left(part, b)
    }

    /// `E[min(Z, b)]`.
    pub fn clamp_mean(&self, part: Part, b: f64) -> f64 {
        self.clamp_moment(part, 1.0, b)
    }

    /// `E[Z 1(Z > b)]`.
    pub fn excess_mean(&self, part: Part, b: f64) -> f64 {
        match part {
            Part::Positive => self.abs_moment_open(1.0, b, f64::INFINITY),
            Part::Negative => self.abs_moment_open(1.0, f64::NEG_INFINITY, -b),
            Part::Abs => {
                self.abs_moment_open(1.0, b, f64::INFINITY) + self.abs_moment_open(1.0, f64::NEG_INFINITY, -b)
            }
        }
    }

    /// `E[Z]`.
    pub fn part_mean(&self, part: Part) -> f64 {
        self.excess_mean(part, 0.0)
    }

    /// Value of `Z` given a draw `x` of `X`.
    #[inline]
    pub fn part_value(part: Part, x: f64) -> f64 {
        match part {
            Part::Positive => x.max(0.0),
            Part::Negative => (-x).max(0.0),
            Part::Abs => x.abs(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::law::MarginalSpec;

    #[test]
    fn spec_examples_for_truncated_moment() {
        let r = MarginalSpec::rademacher();
        assert_eq!(r.law().truncated_moment(2.0, 0.5), 0.0);
        assert_eq!(r.law().truncated_moment(2.0, 2.0), 1.0);
        let p = MarginalSpec::pareto(3.0);
        assert!((p.law().truncated_moment(2.0, 4.0) - 2.25).abs() < 1e-14);
    }

    #[test]
    fn shifted_pareto_binomial_matches_quadrature() {
        let spec = MarginalSpec::centered_pareto(3.0);
        let law = spec.law();
        for &(r, lo, hi) in &[(1.0, -0.3, 5.0), (2.0, -1.0, 2.5), (2.0, 0.0, 40.0), (1.0, f64::NEG_INFINITY, 0.0)] {
            let exact = law.abs_moment_open(r, lo, hi);
            let q = law.quadrature_moment(r, lo, hi);
            assert!((exact - q).abs() < 1e-8, "{r} {lo} {hi}: {exact} vs {q}");
        }
        assert!(law.mean().abs() < 1e-12);
    }

    #[test]
    fn parts_of_rademacher() {
        let spec = MarginalSpec::rademacher();
        let law = spec.law();
        assert_eq!(law.part_sf(Part::Positive, 0.5), 0.5);
        assert_eq!(law.part_sf(Part::Negative, 0.5), 0.5);
        assert_eq!(law.part_sf(Part::Abs, 0.5), 1.0);
        assert_eq!(law.clamp_mean(Part::Positive, 0.25), 0.125);
        assert_eq!(law.clamp_mean(Part::Abs, 2.0), 1.0);
        assert_eq!(law.excess_mean(Part::Negative, 0.5), 0.5);
    }

    #[test]
    fn clamp_moment_of_bernoulli() {
        let spec = MarginalSpec::bernoulli(0.5);
        let law = spec.law();
        assert_eq!(law.clamp_moment(Part::Positive, 2.0, 4.0), 0.5);
        assert_eq!(law.clamp_moment(Part::Positive, 2.0, 0.5), 0.125);
        assert!(law.is_nonnegative());
    }

    #[test]
    fn truncated_mean_of_symmetric_law_vanishes() {
        let spec = MarginalSpec::symmetrized_pareto(1.5);
        for &t in &[0.5, 1.0, 3.0, 1e4] {
            assert!(spec.law().truncated_mean(t).abs() < 1e-12);
        }
    }
}
