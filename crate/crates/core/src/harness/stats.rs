//! Interval estimates and the log-scale slope rule behind trace verdicts.

use serde::{Deserialize, Serialize};
use statrs::distribution::{ContinuousCDF, Normal, StudentsT};

/// Two-sided standard normal quantile for confidence `level`.
pub fn z_value(level: f64) -> f64 {
    Normal::new(0.0, 1.0).unwrap().inverse_cdf(0.5 + 0.5 * level)
}

/// Wilson score interval for `successes` out of `n`.
pub fn wilson(successes: u64, n: u64, level: f64) -> (f64, f64) {
    if n == 0 {
        return (0.0, 1.0);
    }
    let z = z_value(level);
    let nf = n as f64;
    let ph = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let centre = (ph + z2 / (2.0 * nf)) / denom;
    let half = z * (ph * (1.0 - ph) / nf + z2 / (4.0 * nf * nf)).sqrt() / denom;
    let lo = if successes == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if successes == n { 1.0 } else { (centre + half).min(1.0) };
    (lo, hi)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProportionEstimate {
    pub successes: u64,
    pub reps: u64,
    pub estimate: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl ProportionEstimate {
    pub fn new(successes: u64, reps: u64, level: f64) -> Self {
        let (ci_low, ci_high) = wilson(successes, reps, level);
        let estimate = if reps == 0 { 0.0 } else { successes as f64 / reps as f64 };
        ProportionEstimate { successes, reps, estimate, ci_low, ci_high }
    }
}

/// Sample mean with a normal-approximation interval.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MeanEstimate {
    pub reps: u64,
    pub mean: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

impl MeanEstimate {
    /// Summation runs in the given order, so results do not depend on scheduling.
    pub fn from_samples(xs: &[f64], level: f64) -> Self {
        let n = xs.len();
        if n == 0 {
            return MeanEstimate { reps: 0, mean: 0.0, std_err: f64::INFINITY, ci_low: f64::NEG_INFINITY, ci_high: f64::INFINITY };
        }
        let mean = xs.iter().sum::<f64>() / n as f64;
        let var = if n > 1 { xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64 } else { 0.0 };
        let std_err = (var / n as f64).sqrt();
        let z = z_value(level);
        MeanEstimate { reps: n as u64, mean, std_err, ci_low: mean - z * std_err, ci_high: mean + z * std_err }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.ci_low <= x && x <= self.ci_high
    }
}

/// Least-squares line with a Student-t interval on the slope.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SlopeFit {
    pub points: usize,
    pub slope: f64,
    pub intercept: f64,
    pub std_err: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

pub fn slope_fit(xs: &[f64], ys: &[f64], level: f64) -> Option<SlopeFit> {
    let n = xs.len().min(ys.len());
    if n < 2 {
        return None;
    }
    let nf = n as f64;
    let mx = xs[..n].iter().sum::<f64>() / nf;
    let my = ys[..n].iter().sum::<f64>() / nf;
    let sxx: f64 = xs[..n].iter().map(|x| (x - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let (std_err, half) = if n > 2 {
        let rss: f64 = xs[..n].iter().zip(&ys[..n]).map(|(x, y)| (y - intercept - slope * x).powi(2)).sum();
        let se = (rss / (nf - 2.0) / sxx).sqrt();
        let t = StudentsT::new(0.0, 1.0, nf - 2.0).unwrap().inverse_cdf(0.5 + 0.5 * level);
        (se, t * se)
    } else {
        (f64::INFINITY, f64::INFINITY)
    };
    Some(SlopeFit { points: n, slope, intercept, std_err, ci_low: slope - half, ci_high: slope + half })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    DecreasingToZero,
    Flat,
    Increasing,
}

impl std::fmt::Display for Verdict {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Verdict::DecreasingToZero => "decreasing-to-zero",
            Verdict::Flat => "flat",
            Verdict::Increasing => "increasing",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TracePoint {
    /// `log2` of the number of cells.
    pub grid_exp: u32,
    pub rows: usize,
    pub cols: usize,
    pub statistic: f64,
    pub ci_low: f64,
    pub ci_high: f64,
}

/// A statistic along growing grids with a slope verdict.
///
/// The verdict fits `ln statistic` against `grid_exp` over the points with a
/// positive statistic: a 95% interval entirely below zero reads as
/// decreasing-to-zero, entirely above zero as increasing, otherwise flat. An
/// all-zero trace is decreasing-to-zero. A trace whose last point is exactly
/// zero after positive values also counts as decreasing-to-zero.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceTrace {
    pub points: Vec<TracePoint>,
    pub slope: Option<SlopeFit>,
    pub verdict: Verdict,
}

pub const VERDICT_LEVEL: f64 = 0.95;

impl ConvergenceTrace {
    pub fn from_points(points: Vec<TracePoint>) -> Self {
        let pos: Vec<&TracePoint> = points.iter().filter(|p| p.statistic > 0.0 && p.statistic.is_finite()).collect();
        let xs: Vec<f64> = pos.iter().map(|p| p.grid_exp as f64).collect();
        let ys: Vec<f64> = pos.iter().map(|p| p.statistic.ln()).collect();
        let slope = slope_fit(&xs, &ys, VERDICT_LEVEL);
        let last_zero = points.last().map(|p| p.statistic == 0.0).unwrap_or(true);
        let any_inf = points.iter().any(|p| p.statistic.is_infinite());
        let verdict = if any_inf {
            Verdict::Increasing
        } else if pos.is_empty() || last_zero {
            Verdict::DecreasingToZero
        } else {
            match slope {
                Some(f) if f.ci_high < 0.0 => Verdict::DecreasingToZero,
                Some(f) if f.ci_low > 0.0 => Verdict::Increasing,
                _ => Verdict::Flat,
            }
        };
        ConvergenceTrace { points, slope, verdict }
    }

    pub fn statistics(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.statistic).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn wilson_matches_reference_values() {
        // 0 of 10 at 95%: upper bound z²/(n+z²)
        let (lo, hi) = wilson(0, 10, 0.95);
        let z = z_value(0.95);
        assert_eq!(lo, 0.0);
        assert!((hi - z * z / (10.0 + z * z)).abs() < 1e-12);
        let (lo, hi) = wilson(50, 100, 0.95);
        assert!((lo - 0.4038).abs() < 1e-3 && (hi - 0.5962).abs() < 1e-3);
    }

    #[test]
    fn slope_of_exact_line() {
        let xs = [1.0, 2.0, 3.0, 4.0];
        let ys = [3.0, 1.0, -1.0, -3.0];
        let f = slope_fit(&xs, &ys, 0.95).unwrap();
        assert!((f.slope + 2.0).abs() < 1e-12);
        assert!(f.ci_high < 0.0);
    }

    #[test]
    fn verdicts() {
        let mk = |vals: &[f64]| {
            ConvergenceTrace::from_points(
                vals.iter()
                    .enumerate()
                    .map(|(i, &v)| TracePoint { grid_exp: i as u32 + 4, rows: 1, cols: 1, statistic: v, ci_low: v, ci_high: v })
                    .collect(),
            )
        };
        assert_eq!(mk(&[0.0, 0.0, 0.0]).verdict, Verdict::DecreasingToZero);
        assert_eq!(mk(&[1.0, 0.5, 0.25, 0.125]).verdict, Verdict::DecreasingToZero);
        assert_eq!(mk(&[1.0, 2.0, 4.0, 8.0]).verdict, Verdict::Increasing);
        assert_eq!(mk(&[1.0, 1.1, 0.9, 1.0]).verdict, Verdict::Flat);
    }
}
