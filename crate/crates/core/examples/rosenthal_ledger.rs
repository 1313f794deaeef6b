// Both sides of the Rosenthal-type maximal inequality across grid sizes.

use dyadic_field::dyadic::TruncationLadder;
use dyadic_field::ineq::{rosenthal_ledger, rosenthal_lhs_exact, RectConvention, WeightScheme};
use dyadic_field::{FieldModel, MarginalSpec};

pub fn run_example() -> dyadic_field::Result<()> {
    let model = FieldModel::iid(MarginalSpec::bernoulli(0.5));
    let scheme = WeightScheme::with_default_a(1.0, 1.0, 1.0)?;
    let ladder = TruncationLadder::power(1.0)?;
    let ledger = rosenthal_ledger(&model, &[(1, 1), (2, 2), (3, 3), (4, 4)], &scheme, &ladder, 2000, 3)?;
    ledger.write_csv(std::io::stdout())?;
    let exact = rosenthal_lhs_exact(&model, 1, 1, 1.0, &ladder, RectConvention::Strict)?;
    println!("exact 2x2 left side: {exact}");
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
