use serde::{Deserialize, Serialize};

use super::{dyadic_floor, Centering, PrefixSumTable, TruncationLadder};
use crate::error::{Error, Result};
use crate::law::{CellLaw, Part};
use crate::model::{FieldModel, FieldSample};

/// Terms of the telescoping decomposition for one sample.
///
/// `max_abs_centered_sum` is taken over `1 ≤ u < 2^m, 1 ≤ v < 2^n`;
/// `max_abs_centered_sum_closed` over `1 ≤ u ≤ 2^m, 1 ≤ v ≤ 2^n`. The bound
/// `Σ R + deterministic_tail` applies to the former.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DecompositionReport {
    pub m_exp: u32,
    pub n_exp: u32,
    pub part: Part,
    pub max_abs_centered_sum: f64,
    pub max_abs_centered_sum_closed: f64,
    /// `max_{u,v} |I_k(u, v)|` for `k = 1..4`.
    pub i_terms: [f64; 4],
    pub r_terms: [f64; 4],
    pub deterministic_tail: f64,
    /// `max_{u,v} |S − (I_1 + I_2 + I_3 + I_4)| / (1 + |S|)`.
    pub identity_residual: f64,
    /// `Σ R + deterministic_tail − max_abs_centered_sum`.
    pub bound_slack: f64,
    /// `1 + Σ R + deterministic_tail`, the scale for slack tolerances.
    pub bound_scale: f64,
}

impl DecompositionReport {
    pub fn bound(&self) -> f64 {
        self.r_terms.iter().sum::<f64>() + self.deterministic_tail
    }

    /// Whether the pathwise bound holds up to `tol · bound_scale`.
    pub fn bound_holds(&self, tol: f64) -> bool {
        self.bound_slack >= -tol * self.bound_scale
    }
}

/// Decompositions of `X⁺` and `X⁻` for a signed field.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SignedDecomposition {
    pub positive: DecompositionReport,
    pub negative: DecompositionReport,
    /// Strict-range maximum for the signed field truncated at level `m + n`.
    pub max_abs_centered_sum: f64,
    pub identity_residual: f64,
    /// `bound(X⁺) + bound(X⁻) − max_abs_centered_sum`.
    pub bound_slack: f64,
    pub bound_scale: f64,
}

/// Per-cell means `E min(Z_{ij}, b)` as a centering array.
fn level_centering(model: &FieldModel, part: Part, rows: usize, cols: usize, b: f64) -> Centering {
    let base = model.marginal.law();
    if !model.is_modulated() {
        return Centering::Uniform(base.clamp_mean(part, b));
    }
    let mut cache: Vec<(f64, f64)> = Vec::new();
    let mut out = Vec::with_capacity(rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let c = model.modulation.scale(i, j);
            let mean = match cache.iter().find(|(k, _)| *k == c) {
                Some((_, m)) => *m,
                None => {
                    let m = base.scaled(c).clamp_mean(part, b);
                    cache.push((c, m));
                    m
                }
            };
            out.push(mean);
        }
    }
    Centering::PerCell(out)
}

fn max_tail(family: &[CellLaw<'_>], part: Part, x: f64) -> f64 {
    family.iter().map(|c| c.part_sf(part, x)).fold(0.0, f64::max)
}

fn decompose_part(z: &[f64], model: &FieldModel, ladder: &TruncationLadder, part: Part, m: u32, n: u32) -> Result<DecompositionReport> {
    if m == 0 || n == 0 {
        return Err(Error::Domain("the decomposition needs m, n ≥ 1".into()));
    }
    if (m + n) as usize >= super::ladder::LEVELS - 2 {
        return Err(Error::Domain(format!("grid 2^{m} × 2^{n} exceeds the ladder range")));
    }
    let rows = 1usize << m;
    let cols = 1usize << n;
    let top = (m + n) as usize;
    let mut tables = Vec::with_capacity(top + 1);
    let mut buf = vec![0.0; z.len()];
    for level in 0..=top {
        let b = ladder.b_dyadic(level as u32);
        for (o, &x) in buf.iter_mut().zip(z) {
            *o = x.min(b);
        }
        let c = level_centering(model, part, rows, cols, b);
        tables.push(PrefixSumTable::build(rows, cols, &buf, &c)?);
    }
    let s_at = |level: usize, x: usize, y: usize| tables[level].at(x, y);
    // T_{a,b,x,y} = S_{a,b,x,y} − S_{a,b,x_{a+1},y}
    let t_fn = |a: u32, b: u32, x: usize, y: usize| {
        let l = (a + b) as usize;
        s_at(l, x, y) - s_at(l, dyadic_floor(x as u64, a + 1) as usize, y)
    };
    // T*_{a,b,x,y} = S_{a,b,x,y} − S_{a−1,b,x,y} − S_{a,b,x_a,y} + S_{a−1,b,x_a,y}
    let ts_fn = |a: u32, b: u32, x: usize, y: usize| {
        let l = (a + b) as usize;
        let xa = dyadic_floor(x as u64, a) as usize;
        s_at(l, x, y) - s_at(l - 1, x, y) - s_at(l, xa, y) + s_at(l - 1, xa, y)
    };

    let mut i_max = [0.0f64; 4];
    let mut residual = 0.0f64;
    let mut us = vec![0usize; m as usize + 1];
    let mut vs = vec![0usize; n as usize + 1];
    for u in 1..rows {
        for (s, slot) in us.iter_mut().enumerate() {
            *slot = dyadic_floor(u as u64, s as u32) as usize;
        }
        for v in 1..cols {
            for (t, slot) in vs.iter_mut().enumerate() {
                *slot = dyadic_floor(v as u64, t as u32) as usize;
            }
            let mut terms = [0.0f64; 4];
            for s in 1..=m {
                let u_s1 = us[s as usize - 1];
                for t in 1..=n {
                    let (v_t, v_t1) = (vs[t as usize], vs[t as usize - 1]);
                    terms[0] += t_fn(s - 1, t - 1, u_s1, v_t1) - t_fn(s - 1, t - 1, u_s1, v_t);
                    terms[1] += t_fn(s - 1, t, u_s1, v) - t_fn(s - 1, t - 1, u_s1, v) - t_fn(s - 1, t, u_s1, v_t)
                        + t_fn(s - 1, t - 1, u_s1, v_t);
                    terms[2] += ts_fn(s, t - 1, u, v_t1) - ts_fn(s, t - 1, u, v_t);
                    terms[3] += ts_fn(s, t, u, v) - ts_fn(s, t - 1, u, v) - ts_fn(s, t, u, v_t) + ts_fn(s, t - 1, u, v_t);
                }
            }
            let total = s_at(top, u, v);
            let dev = (total - terms.iter().sum::<f64>()).abs() / (1.0 + total.abs());
            residual = residual.max(dev);
            for k in 0..4 {
                i_max[k] = i_max[k].max(terms[k].abs());
            }
        }
    }

    let mut r = [0.0f64; 4];
    for s in 1..=m {
        let hs = 1usize << (s - 1);
        let fs = 1usize << s;
        for t in 1..=n {
            let ht = 1usize << (t - 1);
            let ft = 1usize << t;
            let l = (s + t) as usize;
            let (t0, t1, t2) = (&tables[l - 2], &tables[l - 1], &tables[l]);
            let mut best = [0.0f64; 4];
            for k in 0..(rows >> s) {
                let r0 = k * fs;
                for j in 0..(cols >> t) {
                    let c0 = j * ft;
                    let b1 = t0.rect(r0, r0 + hs, c0, c0 + ht);
                    let b2 = t1.rect(r0, r0 + hs, c0, c0 + ft) - t0.rect(r0, r0 + hs, c0, c0 + ft);
                    let b3 = t1.rect(r0, r0 + fs, c0, c0 + ht) - t0.rect(r0, r0 + fs, c0, c0 + ht);
                    let b4 = t2.rect(r0, r0 + fs, c0, c0 + ft) - t0.rect(r0, r0 + fs, c0, c0 + ft);
                    for (bb, val) in best.iter_mut().zip([b1, b2, b3, b4]) {
                        *bb = bb.max(val.abs());
                    }
                }
            }
            for k in 0..4 {
                r[k] += best[k];
            }
        }
    }

    // tails over the whole grid, which covers every cell the R blocks touch
    let family = model.cell_family(rows, cols);
    let mut tail = 0.0;
    for s in 1..=m {
        for t in 1..=n {
            let l = s + t;
            tail += (l as f64).exp2() * ladder.b_dyadic(l) * max_tail(&family, part, ladder.b_dyadic(l - 2));
        }
    }
    tail *= 6.0;

    let strict = tables[top].max_abs(rows - 1, cols - 1);
    let closed = tables[top].max_abs(rows, cols);
    let bound = r.iter().sum::<f64>() + tail;
    Ok(DecompositionReport {
        m_exp: m,
        n_exp: n,
        part,
        max_abs_centered_sum: strict,
        max_abs_centered_sum_closed: closed,
        i_terms: i_max,
        r_terms: r,
        deterministic_tail: tail,
        identity_residual: residual,
        bound_slack: bound - strict,
        bound_scale: 1.0 + bound,
    })
}

fn check_dims(field: &FieldSample, m: u32, n: u32) -> Result<()> {
    if field.m_exp != m || field.n_exp != n || field.values.len() != 1usize << (m + n) {
        return Err(Error::Dimension(format!(
            "field is 2^{} × 2^{} with {} values; expected 2^{m} × 2^{n}",
            field.m_exp,
            field.n_exp,
            field.values.len()
        )));
    }
    Ok(())
}

/// Decomposition of a nonnegative field truncated at level `m + n`.
pub fn telescoping_decompose(
    field: &FieldSample,
    model: &FieldModel,
    ladder: &TruncationLadder,
    m_exp: u32,
    n_exp: u32,
) -> Result<DecompositionReport> {
    check_dims(field, m_exp, n_exp)?;
    if !model.marginal.law().is_nonnegative() {
        return Err(Error::Domain("model takes negative values; use the signed decomposition".into()));
    }
    if let Some(x) = field.values.iter().find(|x| !(**x >= 0.0)) {
        return Err(Error::Domain(format!("negative cell value {x} in nonnegative mode")));
    }
    decompose_part(&field.values, model, ladder, Part::Positive, m_exp, n_exp)
}

/// Runs the nonnegative pipeline on `X⁺` and `X⁻` and combines them.
pub fn telescoping_decompose_signed(
    field: &FieldSample,
    model: &FieldModel,
    ladder: &TruncationLadder,
    m_exp: u32,
    n_exp: u32,
) -> Result<SignedDecomposition> {
    check_dims(field, m_exp, n_exp)?;
    let pos: Vec<f64> = field.values.iter().map(|&x| CellLaw::part_value(Part::Positive, x)).collect();
    let neg: Vec<f64> = field.values.iter().map(|&x| CellLaw::part_value(Part::Negative, x)).collect();
    let positive = decompose_part(&pos, model, ladder, Part::Positive, m_exp, n_exp)?;
    let negative = decompose_part(&neg, model, ladder, Part::Negative, m_exp, n_exp)?;
    let rows = field.rows();
    let cols = field.cols();
    let b = ladder.b_dyadic(m_exp + n_exp);
    let clamped: Vec<f64> = field.values.iter().map(|x| x.clamp(-b, b)).collect();
    let cp = level_centering(model, Part::Positive, rows, cols, b);
    let cn = level_centering(model, Part::Negative, rows, cols, b);
    let centers: Vec<f64> = (0..rows * cols)
        .map(|k| {
            let a = match &cp {
                Centering::Uniform(c) => *c,
                Centering::PerCell(v) => v[k],
                Centering::Zero => 0.0,
            };
            let d = match &cn {
                Centering::Uniform(c) => *c,
                Centering::PerCell(v) => v[k],
                Centering::Zero => 0.0,
            };
            a - d
        })
        .collect();
    let table = PrefixSumTable::build(rows, cols, &clamped, &Centering::PerCell(centers))?;
    let strict = table.max_abs(rows - 1, cols - 1);
    let bound = positive.bound() + negative.bound();
    Ok(SignedDecomposition {
        identity_residual: positive.identity_residual.max(negative.identity_residual),
        max_abs_centered_sum: strict,
        bound_slack: bound - strict,
        bound_scale: 1.0 + bound,
        positive,
        negative,
    })
}
