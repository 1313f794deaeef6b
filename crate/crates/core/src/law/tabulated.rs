//! Nonnegative laws given by a tabulated tail function.
//!
//! The tail `T(x) = P(X > x)` is stored at points `0 = x_0 < x_1 < … < x_K`.
//! On `[x_0, x_1)` the tail is flat at `T_0`. On `[x_k, x_{k+1})` with `k ≥ 1`
//! it is a power law interpolating `T_k` and `T_{k+1}` (linear in log-log
//! space) unless `T_{k+1} = 0`, in which case it stays flat and drops to zero
//! at `x_{k+1}`. Past `x_K` the last power-law exponent is extended. Flat
//! segments carry an atom at their right end.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TailTable {
    pub xs: Vec<f64>,
    pub tails: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Seg {
    /// Constant tail on `[x_k, x_{k+1})`, atom of mass `T_k − T_{k+1}` at `x_{k+1}`.
    Flat,
    /// `T(x) = T_k (x/x_k)^{-gamma}`.
    Power(f64),
}

impl TailTable {
    pub fn new(xs: Vec<f64>, tails: Vec<f64>) -> Result<Self> {
        let t = TailTable { xs, tails };
        t.validate()?;
        Ok(t)
    }

    pub fn validate(&self) -> Result<()> {
        if self.xs.len() < 2 || self.xs.len() != self.tails.len() {
            return Err(Error::InvalidSpec(
                "tabulated tail needs at least two points and matching lengths".into(),
            ));
        }
        if self.xs[0] != 0.0 {
            return Err(Error::InvalidSpec("tabulated tail must start at x = 0".into()));
        }
        for w in self.xs.windows(2) {
            if !(w[1] > w[0]) || !w[1].is_finite() {
                return Err(Error::InvalidSpec("tabulated x grid must be strictly increasing and finite".into()));
            }
        }
        for w in self.tails.windows(2) {
            if w[1] > w[0] {
                return Err(Error::InvalidSpec("tabulated tail must be nonincreasing".into()));
            }
        }
        if self.tails.iter().any(|t| !(0.0..=1.0).contains(t)) {
            return Err(Error::InvalidSpec("tabulated tail values must lie in [0, 1]".into()));
        }
        let n = self.xs.len();
        if self.tails[n - 1] > 0.0 && !matches!(self.seg(n - 1), Seg::Power(_)) {
            return Err(Error::InvalidSpec(
                "tabulated tail must reach zero or end on a decaying power-law segment".into(),
            ));
        }
        Ok(())
    }

    fn seg(&self, k: usize) -> Seg {
        let n = self.xs.len();
        if k == 0 {
            return Seg::Flat;
        }
        if k >= n - 1 {
            // extension past the last point reuses the last interior segment
            if n < 3 || self.tails[n - 1] == 0.0 {
                return Seg::Flat;
            }
            return match self.seg(n - 2) {
                Seg::Power(g) if g > 0.0 => Seg::Power(g),
                _ => Seg::Flat,
            };
        }
        let (t0, t1) = (self.tails[k], self.tails[k + 1]);
        if t1 == 0.0 {
            Seg::Flat
        } else {
            Seg::Power((t0 / t1).ln() / (self.xs[k + 1] / self.xs[k]).ln())
        }
    }

    fn last_is_terminal(&self) -> bool {
        let n = self.xs.len();
        self.tails[n - 1] == 0.0 || !matches!(self.seg(n - 1), Seg::Power(_))
    }

    /// `P(X > x)`.
    pub fn sf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return 1.0;
        }
        let n = self.xs.len();
        let k = match self.xs.partition_point(|&p| p <= x) {
            0 => return 1.0,
            i => i - 1,
        };
        if k == n - 1 {
            if x == self.xs[k] {
                return self.tails[k];
            }
            return match self.seg(k) {
                Seg::Power(g) if !self.last_is_terminal() => self.tails[k] * (x / self.xs[k]).powf(-g),
                _ => 0.0,
            };
        }
        match self.seg(k) {
            Seg::Flat => self.tails[k],
            Seg::Power(g) => self.tails[k] * (x / self.xs[k]).powf(-g),
        }
    }

    /// `P(X ≥ x)`.
    pub fn sf_left(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 1.0;
        }
        // an atom sits at x_{k+1} when segment k is flat, or at x_0 = 0
        match self.xs.binary_search_by(|p| p.partial_cmp(&x).unwrap()) {
            Ok(i) if i >= 1 => {
                if self.seg(i - 1) == Seg::Flat {
                    self.tails[i - 1]
                } else {
                    self.tails[i]
                }
            }
            _ => self.sf(x),
        }
    }

    /// Atoms of the law: the mass at zero and the jumps at flat-segment ends.
    pub fn atoms(&self) -> Vec<(f64, f64)> {
        let mut out = Vec::new();
        if self.tails[0] < 1.0 {
            out.push((0.0, 1.0 - self.tails[0]));
        }
        let n = self.xs.len();
        for k in 0..n - 1 {
            if self.seg(k) == Seg::Flat && self.tails[k] > self.tails[k + 1] {
                out.push((self.xs[k + 1], self.tails[k] - self.tails[k + 1]));
            }
        }
        out
    }

    /// `E[X^r 1(lo < X < hi)]` with `lo` and `hi` possibly infinite.
    pub fn moment_open(&self, r: f64, lo: f64, hi: f64) -> f64 {
        if !(hi > lo) {
            return 0.0;
        }
        let mut total = 0.0;
        for (v, p) in self.atoms() {
            if v > lo && v < hi {
                total += if v == 0.0 { if r == 0.0 { p } else { 0.0 } } else { p * v.powf(r) };
            }
        }
        let n = self.xs.len();
        for k in 1..n {
            let Seg::Power(g) = self.seg(k) else { continue };
            if k == n - 1 && self.last_is_terminal() {
                continue;
            }
            let a = self.xs[k].max(lo);
            let b = if k + 1 < n { self.xs[k + 1].min(hi) } else { hi };
            if !(b > a) {
                continue;
            }
            // density g T_k x_k^g x^{-g-1}
            let c = g * self.tails[k] * self.xs[k].powf(g);
            let e = r - g;
            total += if e == 0.0 {
                c * (b / a).ln()
            } else if b.is_infinite() {
                if e < 0.0 {
                    c * (-a.powf(e)) / e
                } else {
                    f64::INFINITY
                }
            } else {
                c * (b.powf(e) - a.powf(e)) / e
            };
        }
        total
    }

    /// Generalized inverse of the distribution function.
    pub fn quantile(&self, u: f64) -> f64 {
        self.tail_quantile(1.0 - u)
    }

    /// Smallest `x` with `T(x) ≤ v`.
    pub fn tail_quantile(&self, v: f64) -> f64 {
        if v >= self.tails[0] {
            return 0.0;
        }
        let n = self.xs.len();
        let mut k = 0;
        while k + 1 < n && self.tails[k + 1] > v {
            k += 1;
        }
        if k + 1 < n {
            match self.seg(k) {
                Seg::Flat => self.xs[k + 1],
                Seg::Power(g) => (self.xs[k] * (self.tails[k] / v).powf(1.0 / g)).min(self.xs[k + 1]),
            }
        } else {
            match self.seg(k) {
                Seg::Power(g) if !self.last_is_terminal() => self.xs[k] * (self.tails[k] / v).powf(1.0 / g),
                _ => self.xs[k],
            }
        }
    }

    /// Tail exponent of the extrapolated power law, if the tail is unbounded.
    pub fn tail_index(&self) -> Option<f64> {
        let n = self.xs.len();
        if self.last_is_terminal() {
            return None;
        }
        match self.seg(n - 1) {
            Seg::Power(g) => Some(g),
            Seg::Flat => None,
        }
    }

    pub fn upper_bound(&self) -> f64 {
        if self.last_is_terminal() {
            let n = self.xs.len();
            // last point with positive mass to its left
            let mut k = n - 1;
            while k > 0 && self.tails[k - 1] == 0.0 {
                k -= 1;
            }
            self.xs[k]
        } else {
            f64::INFINITY
        }
    }
}
