//! Weight schemes, both sides of the Rosenthal-type maximal inequality and
//! its tail-bound form, and the `H_2q` brute force.

mod h2q;
mod ledger;
mod rosenthal;
mod weights;

pub use h2q::{
    h2q_min_constant, h2q_min_constant_over_subsets, h2q_sides, walsh_instance, H2qInstance, H2qSides, Transform,
    MAX_OUTCOMES, MAX_VARIABLES,
};
pub use ledger::{
    implied_constant, rosenthal_ledger, rosenthal_ledger_with, size_seed, InequalityLedger, LedgerRow, CSV_HEADER,
};
pub use rosenthal::{
    rosenthal_lhs_exact, rosenthal_lhs_mc, rosenthal_rhs, tailbound_check, RectConvention, RosenthalRhs, TailBoundReport,
};
pub use weights::WeightScheme;

pub(crate) use rosenthal::centering_by;
