// Classifying the equivalent moment series for Pareto tails.

use dyadic_field::harness::moment_series_check;
use dyadic_field::MarginalSpec;

pub fn run_example() -> dyadic_field::Result<()> {
    for beta in [1.5, 2.0, 3.0] {
        let r = moment_series_check(&MarginalSpec::pareto(beta), 1.5, 2.0 / 3.0, 2.0, 10)?;
        let classes: Vec<&str> = r.series.iter().map(|s| if s.convergent { "conv" } else { "div" }).collect();
        println!("β = {beta}: E|X|^p log|X| = {:.4} (finite {}), series {classes:?}, consistent {}", r.item_i, r.item_i_finite, r.consistent);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
