//! Field models and reproducible sampling on `2^m × 2^n` grids.
//!
//! Cells are addressed by zero-based `(i, j)`: `i` is the row (first axis,
//! `0 ≤ i < 2^m`), `j` the column. Values are stored row-major.

use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use rand::RngCore;
use rand_distr::{Distribution, StandardNormal};
use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::error::{Error, Result};
use crate::law::{CellLaw, MarginalKind, MarginalSpec, Part, TailTable};
use crate::rng::{open_unit, StreamKey};

/// Dependence structure across cells.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
pub enum DependenceSpec {
    #[default]
    Iid,
    /// Tiles of `2^g − 1` row-major cells built from `g` independent generators.
    PairwiseWalsh { generators: u32 },
    /// Gaussian copula with correlation `correlation ≤ 0` between distinct cells
    /// at Chebyshev distance at most `radius`.
    GaussianCopulaNegative { correlation: f64, radius: u32 },
    /// Gaussian copula of a normalized `window × window` moving sum of white noise.
    MovingAverage { window: u32 },
}

impl DependenceSpec {
    /// Smallest admissible correlation for the copula at `radius`.
    pub fn copula_min_correlation(radius: u32) -> f64 {
        let side = 2.0 * radius as f64 + 1.0;
        -1.0 / (side * side - 1.0)
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        match self {
            DependenceSpec::Iid => {}
            DependenceSpec::PairwiseWalsh { generators } => {
                if !(1..=20).contains(generators) {
                    v.push(format!("dependence.generators must lie in 1..=20 (got {generators})"));
                }
            }
            DependenceSpec::GaussianCopulaNegative { correlation, radius } => {
                if *radius == 0 {
                    v.push("dependence.radius must be at least 1".into());
                }
                if !(*correlation <= 0.0) {
                    v.push(format!("dependence.correlation must be ≤ 0 (got {correlation})"));
                } else if *radius > 0 && *correlation < Self::copula_min_correlation(*radius) {
                    v.push(format!(
                        "dependence.correlation {correlation} makes the copula covariance not positive semidefinite; \
                         radius {radius} requires correlation ≥ {}",
                        Self::copula_min_correlation(*radius)
                    ));
                }
            }
            DependenceSpec::MovingAverage { window } => {
                if *window == 0 {
                    v.push("dependence.window must be at least 1".into());
                }
            }
        }
        v
    }
}

/// Per-cell scale factor `c(i, j) ∈ [c_lo, c_hi]`.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(try_from = "String", into = "String")]
pub enum Modulation {
    #[default]
    None,
    /// `c_lo` where `i + j` is even, `c_hi` elsewhere.
    Checkerboard { c_lo: f64, c_hi: f64 },
    /// `c_lo + (c_hi − c_lo)·r/(1 + r)` with `r` the Euclidean distance of `(i, j)` from the origin.
    Radial { c_lo: f64, c_hi: f64 },
}

impl Modulation {
    pub fn scale(&self, i: usize, j: usize) -> f64 {
        match *self {
            Modulation::None => 1.0,
            Modulation::Checkerboard { c_lo, c_hi } => {
                if (i + j).is_multiple_of(2) {
                    c_lo
                } else {
                    c_hi
                }
            }
            Modulation::Radial { c_lo, c_hi } => {
                let r = ((i * i + j * j) as f64).sqrt();
                c_lo + (c_hi - c_lo) * r / (1.0 + r)
            }
        }
    }

    pub fn bounds(&self) -> (f64, f64) {
        match *self {
            Modulation::None => (1.0, 1.0),
            Modulation::Checkerboard { c_lo, c_hi } | Modulation::Radial { c_lo, c_hi } => (c_lo, c_hi),
        }
    }

    pub fn violations(&self) -> Vec<String> {
        let (lo, hi) = self.bounds();
        if lo > 0.0 && lo <= hi && hi.is_finite() {
            Vec::new()
        } else {
            vec![format!("modulation bounds must satisfy 0 < c_lo ≤ c_hi < ∞ (got {lo}, {hi})")]
        }
    }
}

impl fmt::Display for Modulation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Modulation::None => write!(f, "none"),
            Modulation::Checkerboard { c_lo, c_hi } => write!(f, "checkerboard({c_lo},{c_hi})"),
            Modulation::Radial { c_lo, c_hi } => write!(f, "radial({c_lo},{c_hi})"),
        }
    }
}

impl FromStr for Modulation {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let t = s.trim();
        if t == "none" {
            return Ok(Modulation::None);
        }
        let (name, rest) = t
            .split_once('(')
            .ok_or_else(|| format!("unknown modulation preset `{t}` (expected none, checkerboard(a,b) or radial(a,b))"))?;
        let args = rest
            .strip_suffix(')')
            .ok_or_else(|| format!("modulation preset `{t}` is missing `)`"))?;
        let nums: Vec<f64> = args
            .split(',')
            .map(|a| a.trim().parse::<f64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| format!("modulation preset `{t}`: {e}"))?;
        if nums.len() != 2 {
            return Err(format!("modulation preset `{t}` takes two arguments"));
        }
        match name.trim() {
            "checkerboard" => Ok(Modulation::Checkerboard { c_lo: nums[0], c_hi: nums[1] }),
            "radial" => Ok(Modulation::Radial { c_lo: nums[0], c_hi: nums[1] }),
            other => Err(format!("unknown modulation preset `{other}`")),
        }
    }
}

impl TryFrom<String> for Modulation {
    type Error = String;
    fn try_from(s: String) -> std::result::Result<Self, String> {
        s.parse()
    }
}

impl From<Modulation> for String {
    fn from(m: Modulation) -> String {
        m.to_string()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FieldModel {
    pub marginal: MarginalSpec,
    #[serde(default)]
    pub dependence: DependenceSpec,
    #[serde(default)]
    pub modulation: Modulation,
}

impl FieldModel {
    pub fn iid(marginal: MarginalSpec) -> Self {
        FieldModel { marginal, dependence: DependenceSpec::Iid, modulation: Modulation::None }
    }

    pub fn with_dependence(mut self, dependence: DependenceSpec) -> Self {
        self.dependence = dependence;
        self
    }

    pub fn with_modulation(mut self, modulation: Modulation) -> Self {
        self.modulation = modulation;
        self
    }

    pub fn violations(&self) -> Vec<String> {
        let mut v = self.marginal.violations();
        v.extend(self.dependence.violations());
        v.extend(self.modulation.violations());
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

    pub fn is_modulated(&self) -> bool {
        self.modulation != Modulation::None
    }

    /// Law of cell `(i, j)`.
    pub fn cell_law(&self, i: usize, j: usize) -> CellLaw<'_> {
        self.marginal.law().scaled(self.modulation.scale(i, j))
    }

    /// `P(X_{i,j} > x)`.
    pub fn tail_prob(&self, cell: (usize, usize), x: f64) -> f64 {
        self.cell_law(cell.0, cell.1).sf(x)
    }

    /// `E[|X_{i,j}|^r 1(|X_{i,j}| ≤ a)]`.
    pub fn truncated_moment(&self, cell: (usize, usize), r: f64, a: f64) -> f64 {
        self.cell_law(cell.0, cell.1).truncated_moment(r, a)
    }

    /// Distinct scale factors over the cells `0 ≤ i < rows`, `0 ≤ j < cols`, sorted.
    pub fn distinct_scales(&self, rows: usize, cols: usize) -> Vec<f64> {
        if rows == 0 || cols == 0 {
            return Vec::new();
        }
        match self.modulation {
            Modulation::None => vec![1.0],
            Modulation::Checkerboard { c_lo, c_hi } => {
                if rows * cols == 1 || c_lo == c_hi {
                    vec![c_lo]
                } else {
                    vec![c_lo, c_hi]
                }
            }
            Modulation::Radial { .. } => {
                let mut v: Vec<f64> =
                    (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| self.modulation.scale(i, j)).collect();
                v.sort_by(|a, b| a.partial_cmp(b).unwrap());
                v.dedup();
                v
            }
        }
    }

    /// Distinct cell laws over a rectangle of cells.
    pub fn cell_family(&self, rows: usize, cols: usize) -> Vec<CellLaw<'_>> {
        let base = self.marginal.law();
        self.distinct_scales(rows, cols).into_iter().map(|c| base.scaled(c)).collect()
    }

    /// Largest value of `f` over the distinct cell laws of the rectangle.
    pub fn max_over_cells<F: Fn(&CellLaw<'_>) -> f64>(&self, rows: usize, cols: usize, f: F) -> f64 {
        self.cell_family(rows, cols).iter().map(f).fold(f64::NEG_INFINITY, f64::max)
    }

    pub fn sampler(&self, m_exp: u32, n_exp: u32) -> Result<Sampler> {
        Sampler::new(self.clone(), m_exp, n_exp)
    }
}

/// One realization on a `2^m_exp × 2^n_exp` grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldSample {
    pub m_exp: u32,
    pub n_exp: u32,
    pub values: Vec<f64>,
    pub master_seed: u64,
    pub replicate: u64,
}

impl FieldSample {
    pub fn rows(&self) -> usize {
        1usize << self.m_exp
    }

    pub fn cols(&self) -> usize {
        1usize << self.n_exp
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.cols() + j]
    }

    /// A sample with given values, for tests and hand-built fields.
    pub fn from_values(m_exp: u32, n_exp: u32, values: Vec<f64>) -> Result<Self> {
        if values.len() != 1usize << (m_exp + n_exp) {
            return Err(Error::Dimension(format!(
                "{} values cannot fill a 2^{m_exp} × 2^{n_exp} grid",
                values.len()
            )));
        }
        Ok(FieldSample { m_exp, n_exp, values, master_seed: 0, replicate: 0 })
    }

    /// Multiplies every value by `c`.
    pub fn scaled(mut self, c: f64) -> Self {
        for v in &mut self.values {
            *v *= c;
        }
        self
    }
}

/// Fast inverse-CDF evaluation for the base law.
#[derive(Debug, Clone)]
enum Quantile {
    Atoms { cum: Vec<f64>, vals: Vec<f64> },
    Pareto { inv_beta: f64 },
    General,
}

enum Gauss {
    None,
    Copula { fft: Arc<dyn Fft<f64>>, fft_cols: Arc<dyn Fft<f64>>, sqrt_eig: Vec<f64>, dims: (usize, usize) },
    Moving { window: usize },
}

/// Precomputed sampling state for one model and grid size.
pub struct Sampler {
    model: FieldModel,
    m_exp: u32,
    n_exp: u32,
    quantile: Quantile,
    gauss: Gauss,
    scales: Vec<f64>,
}

impl fmt::Debug for Sampler {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Sampler").field("model", &self.model).field("m_exp", &self.m_exp).field("n_exp", &self.n_exp).finish()
    }
}

fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z / std::f64::consts::SQRT_2)
}

/// Sum of `cos(2π k h / n)` over `h = −r..=r`.
fn dirichlet(k: usize, n: usize, r: usize) -> f64 {
    let mut s = 1.0;
    for h in 1..=r {
        s += 2.0 * (2.0 * std::f64::consts::PI * (k * h % n) as f64 / n as f64).cos();
    }
    s
}

impl Sampler {
    pub fn new(model: FieldModel, m_exp: u32, n_exp: u32) -> Result<Self> {
        model.validate()?;
        if m_exp + n_exp > 30 {
            return Err(Error::Domain(format!("grid 2^{m_exp} × 2^{n_exp} is too large")));
        }
        let rows = 1usize << m_exp;
        let cols = 1usize << n_exp;
        let quantile = match &model.marginal.kind {
            k if k.is_discrete() => {
                let atoms = k.atoms();
                let mut acc = 0.0;
                let cum = atoms.iter().map(|a| {
                    acc += a.1;
                    acc
                });
                let cum: Vec<f64> = cum.collect();
                Quantile::Atoms { cum, vals: atoms.iter().map(|a| a.0).collect() }
            }
            MarginalKind::Pareto { tail_index } => Quantile::Pareto { inv_beta: 1.0 / tail_index },
            _ => Quantile::General,
        };
        let gauss = match model.dependence {
            DependenceSpec::GaussianCopulaNegative { correlation, radius } => {
                let r = radius as usize;
                let n1 = (rows + r).max(2 * r + 1);
                let n2 = (cols + r).max(2 * r + 1);
                let d1: Vec<f64> = (0..n1).map(|k| dirichlet(k, n1, r)).collect();
                let d2: Vec<f64> = (0..n2).map(|k| dirichlet(k, n2, r)).collect();
                let mut sqrt_eig = Vec::with_capacity(n1 * n2);
                for a in &d1 {
                    for b in &d2 {
                        let lam = 1.0 + correlation * (a * b - 1.0);
                        if lam < -1e-9 {
                            return Err(Error::InvalidSpec(format!(
                                "copula covariance is not positive semidefinite (eigenvalue {lam})"
                            )));
                        }
                        sqrt_eig.push((lam.max(0.0) / (n1 * n2) as f64).sqrt());
                    }
                }
                let mut planner = FftPlanner::new();
                Gauss::Copula {
                    fft: planner.plan_fft_forward(n2),
                    fft_cols: planner.plan_fft_forward(n1),
                    sqrt_eig,
                    dims: (n1, n2),
                }
            }
            DependenceSpec::MovingAverage { window } => Gauss::Moving { window: window as usize },
            _ => Gauss::None,
        };
        let scales = if model.is_modulated() {
            (0..rows).flat_map(|i| (0..cols).map(move |j| (i, j))).map(|(i, j)| model.modulation.scale(i, j)).collect()
        } else {
            Vec::new()
        };
        Ok(Sampler { model, m_exp, n_exp, quantile, gauss, scales })
    }

    pub fn model(&self) -> &FieldModel {
        &self.model
    }

    #[inline]
    fn base_quantile(&self, u: f64) -> f64 {
        match &self.quantile {
            Quantile::Atoms { cum, vals } => {
                let k = cum.partition_point(|&c| c < u);
                vals[k.min(vals.len() - 1)]
            }
            Quantile::Pareto { inv_beta } => (1.0 - u).powf(-inv_beta),
            Quantile::General => self.model.marginal.kind.quantile(u),
        }
    }

    #[inline]
    fn value(&self, idx: usize, u: f64) -> f64 {
        let spec = &self.model.marginal;
        let x = spec.shift + spec.scale * self.base_quantile(u);
        if self.scales.is_empty() {
            x
        } else {
            x * self.scales[idx]
        }
    }

    /// Fills `out` with the draw for `(master_seed, replicate)`.
    pub fn sample_into(&self, master_seed: u64, replicate: u64, out: &mut Vec<f64>) {
        let rows = 1usize << self.m_exp;
        let cols = 1usize << self.n_exp;
        let len = rows * cols;
        out.clear();
        out.reserve(len);
        let key = StreamKey::new(master_seed, replicate);
        let mut rng = key.stream(0);
        match (&self.model.dependence, &self.gauss) {
            (DependenceSpec::Iid, _) => {
                for idx in 0..len {
                    let u = open_unit(rng.next_u64());
                    out.push(self.value(idx, u));
                }
            }
            (DependenceSpec::PairwiseWalsh { generators }, _) => {
                let g = *generators as usize;
                let tile = (1usize << g) - 1;
                let mut gens = vec![0u64; g];
                for idx in 0..len {
                    let pos = idx % tile;
                    if pos == 0 {
                        for w in gens.iter_mut() {
                            *w = rng.next_u64();
                        }
                    }
                    let mask = pos + 1;
                    let mut word = 0u64;
                    for (b, w) in gens.iter().enumerate() {
                        if mask >> b & 1 == 1 {
                            word ^= w;
                        }
                    }
                    if mask.count_ones().is_multiple_of(2) {
                        word = !word;
                    }
                    out.push(self.value(idx, open_unit(word)));
                }
            }
            (_, Gauss::Copula { fft, fft_cols, sqrt_eig, dims }) => {
                let (n1, n2) = *dims;
                let mut buf: Vec<Complex<f64>> = (0..n1 * n2)
                    .map(|k| {
                        let a: f64 = StandardNormal.sample(&mut rng);
                        let b: f64 = StandardNormal.sample(&mut rng);
                        Complex::new(a * sqrt_eig[k], b * sqrt_eig[k])
                    })
                    .collect();
                for row in buf.chunks_mut(n2) {
                    fft.process(row);
                }
                let mut col = vec![Complex::new(0.0, 0.0); n1];
                for j in 0..n2 {
                    for i in 0..n1 {
                        col[i] = buf[i * n2 + j];
                    }
                    fft_cols.process(&mut col);
                    for i in 0..n1 {
                        buf[i * n2 + j] = col[i];
                    }
                }
                for i in 0..rows {
                    for j in 0..cols {
                        let z = buf[i * n2 + j].re;
                        out.push(self.value(i * cols + j, std_normal_cdf(z).clamp(1e-300, 1.0 - 1e-16)));
                    }
                }
            }
            (_, Gauss::Moving { window }) => {
                let w = *window;
                let (r2, c2) = (rows + w - 1, cols + w - 1);
                let noise: Vec<f64> = (0..r2 * c2).map(|_| StandardNormal.sample(&mut rng)).collect();
                // window sums by a summed-area table
                let mut sat = vec![0.0; (r2 + 1) * (c2 + 1)];
                for i in 0..r2 {
                    for j in 0..c2 {
                        sat[(i + 1) * (c2 + 1) + j + 1] =
                            noise[i * c2 + j] + sat[i * (c2 + 1) + j + 1] + sat[(i + 1) * (c2 + 1) + j] - sat[i * (c2 + 1) + j];
                    }
                }
                let at = |i: usize, j: usize| sat[i * (c2 + 1) + j];
                for i in 0..rows {
                    for j in 0..cols {
                        let s = at(i + w, j + w) - at(i, j + w) - at(i + w, j) + at(i, j);
                        let z = s / w as f64;
                        out.push(self.value(i * cols + j, std_normal_cdf(z).clamp(1e-300, 1.0 - 1e-16)));
                    }
                }
            }
            _ => unreachable!("sampler state matches dependence"),
        }
    }

    pub fn sample(&self, master_seed: u64, replicate: u64) -> FieldSample {
        let mut values = Vec::new();
        self.sample_into(master_seed, replicate, &mut values);
        FieldSample { m_exp: self.m_exp, n_exp: self.n_exp, values, master_seed, replicate }
    }
}

/// Draws one field; deterministic in every argument.
pub fn sample_field(model: &FieldModel, m_exp: u32, n_exp: u32, master_seed: u64, replicate: u64) -> Result<FieldSample> {
    Ok(model.sampler(m_exp, n_exp)?.sample(master_seed, replicate))
}

fn sup_tail(cells: &[CellLaw<'_>], x: f64) -> f64 {
    cells.iter().map(|c| c.part_sf(Part::Abs, x)).fold(0.0, f64::max)
}

/// Law of a nonnegative `X` with `P(X > x) = sup_λ P(|X_λ| > x)`.
///
/// The tail is tabulated on a log-spaced grid that includes every atom of the
/// family (and a point just to its left), refined where log-log interpolation
/// misses the true supremum at interval midpoints.
pub fn dominator_model(cells: &[CellLaw<'_>]) -> Result<MarginalSpec> {
    if cells.is_empty() {
        return Err(Error::Domain("dominator needs at least one cell law".into()));
    }
    let bound = cells
        .iter()
        .map(|c| c.upper_bound().abs().max(c.lower_bound().abs()))
        .fold(0.0, f64::max);
    let x_hi = if bound.is_finite() {
        bound
    } else {
        let mut x = 1.0f64;
        while sup_tail(cells, x) > 1e-15 && x < 1e300 {
            x *= 2.0;
        }
        x
    };
    let mut x_lo = 1.0f64.min(x_hi);
    for _ in 0..60 {
        if sup_tail(cells, x_lo) >= 1.0 - 1e-12 || x_lo < 1e-300 {
            break;
        }
        x_lo *= 0.5;
    }
    let mut atoms: Vec<f64> = Vec::new();
    for c in cells {
        for (x, _) in c.atoms() {
            let a = x.abs();
            if a > 0.0 {
                atoms.push(a);
            }
        }
    }
    let mut xs: Vec<f64> = Vec::new();
    if x_hi > 0.0 {
        let decades = (x_hi / x_lo).log10().max(0.0);
        let steps = ((decades * 32.0).ceil() as usize).max(1);
        for k in 0..=steps {
            xs.push(x_lo * (x_hi / x_lo).powf(k as f64 / steps as f64));
        }
        for &a in &atoms {
            xs.push(a);
            xs.push(a * (1.0 - 1e-12));
        }
    }
    xs.retain(|x| *x > 0.0 && x.is_finite());
    xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
    xs.dedup();
    // refine where interpolation disagrees with the supremum
    for _ in 0..8 {
        let mut extra = Vec::new();
        for w in xs.windows(2) {
            let (t0, t1) = (sup_tail(cells, w[0]), sup_tail(cells, w[1]));
            if t1 <= 0.0 || t0 <= 0.0 || w[1] / w[0] < 1.0 + 1e-9 {
                continue;
            }
            let mid = (w[0] * w[1]).sqrt();
            let interp = (t0 * t1).sqrt();
            let truth = sup_tail(cells, mid);
            if (interp - truth).abs() > 1e-3 * truth + 1e-15 {
                extra.push(mid);
            }
        }
        if extra.is_empty() {
            break;
        }
        xs.extend(extra);
        xs.sort_by(|a, b| a.partial_cmp(b).unwrap());
        xs.dedup();
    }
    let mut grid = vec![0.0];
    grid.extend(xs);
    let mut tails: Vec<f64> = grid.iter().map(|&x| sup_tail(cells, x)).collect();
    for k in 1..tails.len() {
        tails[k] = tails[k].min(tails[k - 1]);
    }
    // close the table: the tail must vanish or keep decaying past the last point
    let n = tails.len();
    if n >= 3 && tails[n - 1] > 0.0 && !(tails[n - 2] > tails[n - 1]) {
        tails[n - 1] = 0.0;
    }
    if n < 3 && tails[n - 1] > 0.0 {
        tails[n - 1] = 0.0;
    }
    let table = TailTable::new(grid, tails)?;
    Ok(MarginalSpec::new(MarginalKind::Tabulated { table }))
}
