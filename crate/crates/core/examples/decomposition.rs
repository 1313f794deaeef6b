// Telescoping decomposition of rectangular sums and its pathwise bound.

use dyadic_field::dyadic::{telescoping_decompose, telescoping_decompose_signed, TruncationLadder};
use dyadic_field::{sample_field, FieldModel, MarginalSpec};

pub fn run_example() -> dyadic_field::Result<()> {
    let ladder = TruncationLadder::power(0.8)?;
    let model = FieldModel::iid(MarginalSpec::pareto(3.0));
    for rep in 0..3 {
        let f = sample_field(&model, 5, 4, 7, rep)?;
        let r = telescoping_decompose(&f, &model, &ladder, 5, 4)?;
        println!(
            "rep {rep}: max|S| = {:.3}, bound = {:.3}, residual = {:.1e}, I = {:.3?}",
            r.max_abs_centered_sum,
            r.bound(),
            r.identity_residual,
            r.i_terms
        );
        assert!(r.bound_holds(1e-9));
    }
    let signed = FieldModel::iid(MarginalSpec::symmetrized_pareto(2.5));
    let f = sample_field(&signed, 4, 4, 7, 0)?;
    let s = telescoping_decompose_signed(&f, &signed, &ladder, 4, 4)?;
    println!("signed: max|S| = {:.3}, slack = {:.3}", s.max_abs_centered_sum, s.bound_slack);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
