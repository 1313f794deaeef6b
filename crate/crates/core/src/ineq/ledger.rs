use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{rosenthal_lhs_mc, rosenthal_rhs, RectConvention, WeightScheme};
use crate::dyadic::TruncationLadder;
use crate::error::Result;
use crate::model::FieldModel;
use crate::rng::derive_seed;

/// One row of the inequality ledger: both sides at one grid size.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LedgerRow {
    pub m: u32,
    pub n: u32,
    pub q: f64,
    pub alpha: f64,
    pub a: f64,
    pub lhs: f64,
    pub lhs_ci_low: f64,
    pub lhs_ci_high: f64,
    pub rhs: f64,
    /// `lhs / rhs`, 0 when both vanish.
    pub implied_constant: f64,
    /// Left empty for Rosenthal rows, which carry no preconditions.
    pub preconditions_met: Option<bool>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct InequalityLedger {
    pub rows: Vec<LedgerRow>,
}

impl InequalityLedger {
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut wr = csv::Writer::from_writer(w);
        for r in &self.rows {
            wr.serialize(r)?;
        }
        if self.rows.is_empty() {
            wr.write_record(CSV_HEADER)?;
        }
        wr.flush()?;
        Ok(())
    }
}

pub const CSV_HEADER: [&str; 11] =
    ["m", "n", "q", "alpha", "a", "lhs", "lhs_ci_low", "lhs_ci_high", "rhs", "implied_constant", "preconditions_met"];

pub fn implied_constant(lhs: f64, rhs: f64) -> f64 {
    if lhs == 0.0 {
        0.0
    } else {
        (lhs / rhs).max(0.0)
    }
}

/// Rosenthal ledger rows for each `(m, n)` over strict rectangles with 95%
/// intervals; every size draws from its own seed.
pub fn rosenthal_ledger(
    model: &FieldModel,
    sizes: &[(u32, u32)],
    scheme: &WeightScheme,
    ladder: &TruncationLadder,
    reps: u64,
    seed: u64,
) -> Result<InequalityLedger> {
    rosenthal_ledger_with(model, sizes, scheme, ladder, reps, seed, RectConvention::Strict, 0.95)
}

/// Master seed of one ledger size.
pub fn size_seed(seed: u64, m: u32, n: u32) -> u64 {
    derive_seed(seed, ((m as u64) << 32) | n as u64)
}

#[allow(clippy::too_many_arguments)]
pub fn rosenthal_ledger_with(
    model: &FieldModel,
    sizes: &[(u32, u32)],
    scheme: &WeightScheme,
    ladder: &TruncationLadder,
    reps: u64,
    seed: u64,
    conv: RectConvention,
    level: f64,
) -> Result<InequalityLedger> {
    let rows: Result<Vec<LedgerRow>> = sizes
        .par_iter()
        .map(|&(m, n)| {
            let lhs = rosenthal_lhs_mc(model, m, n, scheme.q, ladder, reps, size_seed(seed, m, n), conv, level)?;
            let rhs = rosenthal_rhs(model, m, n, scheme, ladder)?.total;
            Ok(LedgerRow {
                m,
                n,
                q: scheme.q,
                alpha: scheme.alpha,
                a: scheme.a,
                lhs: lhs.mean,
                lhs_ci_low: lhs.ci_low,
                lhs_ci_high: lhs.ci_high,
                rhs,
                implied_constant: implied_constant(lhs.mean, rhs),
                preconditions_met: None,
            })
        })
        .collect();
    Ok(InequalityLedger { rows: rows? })
}
