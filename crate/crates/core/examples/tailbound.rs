// Preconditions of the tail bound switching on as the grid grows.

use dyadic_field::dyadic::TruncationLadder;
use dyadic_field::ineq::{tailbound_check, WeightScheme};
use dyadic_field::{FieldModel, MarginalSpec};

pub fn run_example() -> dyadic_field::Result<()> {
    let (p, alpha, q) = (1.5, 2.0 / 3.0, 1.0);
    let model = FieldModel::iid(MarginalSpec::pareto(3.0));
    let scheme = WeightScheme::with_default_a(p, alpha, q)?;
    let ladder = TruncationLadder::power(alpha)?;
    for k in [1, 3, 5, 7] {
        let r = tailbound_check(&model, k, k, &scheme, &ladder, 1.0, 500, 9)?;
        println!(
            "{k}x{k} exps: excess {:.3e} ({}), tail {:.3e} ({}), P(max ≥ {:.1}) ≈ {:.4} vs bound {:.3e}",
            r.excess_sum, r.excess_ok, r.deterministic_tail, r.tail_ok, r.threshold, r.lhs_tail.estimate, r.rhs_bound
        );
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
