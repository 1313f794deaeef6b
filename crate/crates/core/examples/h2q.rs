// Exact minimal constants of the H_2q moment condition by enumeration.

use dyadic_field::ineq::{h2q_min_constant, h2q_min_constant_over_subsets, walsh_instance, H2qInstance, Transform};

pub fn run_example() -> dyadic_field::Result<()> {
    let triple = walsh_instance(2)?;
    println!("Walsh triple, q=1: C = {}", h2q_min_constant(&triple, 1.0)?);
    let pair = H2qInstance::uniform(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]])?;
    println!("independent pair, q=2: C = {}", h2q_min_constant(&pair, 2.0)?);
    let mut stepped = walsh_instance(2)?;
    stepped.transforms[0] = Transform::Step { at: 0.0, below: 0.0, above: 5.0 };
    println!("stepped triple, worst subset at q=1: C = {}", h2q_min_constant_over_subsets(&stepped, 1.0)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
