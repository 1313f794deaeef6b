//! Monte Carlo checks of the limit theorems for fields.

use rayon::prelude::*;

use crate::dyadic::Centering;
use crate::error::{Error, Result};
use crate::model::Sampler;

pub mod lemmas;
pub mod series;
pub mod stats;
pub mod traces;

pub use lemmas::{lemma_a1_ratio, moment_series_check, A1Point, A1Trace, MomentSeries, MomentSeriesReport};
pub use series::{baum_katz_series, dyadic_series, regular_norming_series, series_violations, SeriesEstimate, SeriesRow};
pub use stats::{ConvergenceTrace, MeanEstimate, ProportionEstimate, SlopeFit, TracePoint, Verdict};
pub use traces::{closed_max_statistic, feller_wlln, grid_shape, mz_slln_trace, pyke_root_lp};

/// Applies `f` to every replicate field; results come back in replicate order.
pub(crate) fn per_replicate<T, F>(sampler: &Sampler, seed: u64, reps: u64, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(&[f64]) -> T + Sync + Send,
{
    (0..reps)
        .into_par_iter()
        .map_init(Vec::new, |buf, rep| {
            sampler.sample_into(seed, rep, buf);
            f(buf)
        })
        .collect()
}

pub(crate) fn require_finite(c: &Centering, what: &str) -> Result<()> {
    let ok = match c {
        Centering::Zero => true,
        Centering::Uniform(v) => v.is_finite(),
        Centering::PerCell(v) => v.iter().all(|x| x.is_finite()),
    };
    if ok {
        Ok(())
    } else {
        Err(Error::Domain(format!("{what} is not finite for this model")))
    }
}
