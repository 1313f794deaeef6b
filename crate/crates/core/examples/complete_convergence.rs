// Dyadic series of tail probabilities, plain and with slowly varying norming.

use dyadic_field::harness::{baum_katz_series, regular_norming_series};
use dyadic_field::varying::SlowlyVarying;
use dyadic_field::{FieldModel, MarginalSpec};

pub fn run_example() -> dyadic_field::Result<()> {
    let model = FieldModel::iid(MarginalSpec::rademacher());
    let est = baum_katz_series(&model, 1.5, 2.0 / 3.0, 1.0, 8, 400, 1)?;
    for (d, s) in &est.diagonal_sums {
        println!("k+l = {d:2}: {s:.5}");
    }
    println!("partial sum {:.4}, verdict {}", est.partial_sum(), est.verdict);
    let log = regular_norming_series(&model, 1.5, 2.0 / 3.0, 1.0, &SlowlyVarying::LogPower { gamma: 1.0 }, 8, 400, 1)?;
    println!("with log norming: partial sum {:.4}, verdict {}", log.partial_sum(), log.verdict);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
