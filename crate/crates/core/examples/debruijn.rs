// Slowly varying functions and their de Bruijn conjugates.

use dyadic_field::varying::{debruijn_residual, debruijn_residual_swapped, SlowlyVarying};

pub fn run_example() -> dyadic_field::Result<()> {
    for fam in [SlowlyVarying::constant(), SlowlyVarying::LogPower { gamma: 1.0 }, SlowlyVarying::LogLogPower { gamma: 2.0 }] {
        println!("{fam:?}, conjugate {:?}", fam.conjugate()?);
        for k in [3, 6, 9, 12] {
            let x = 10f64.powi(k);
            println!("  x = 1e{k:<2}  residual {:.5}  swapped {:.5}", debruijn_residual(&fam, x)?, debruijn_residual_swapped(&fam, x)?);
        }
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
