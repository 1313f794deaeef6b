// Stochastic domination of a modulated family and uniform integrability.

use dyadic_field::varying::{dominator_weighted_moment, domination_check, uniform_integrability_trace, SlowlyVarying};
use dyadic_field::{FieldModel, MarginalSpec, Modulation};

pub fn run_example() -> dyadic_field::Result<()> {
    let model = FieldModel::iid(MarginalSpec::pareto(3.0)).with_modulation(Modulation::Radial { c_lo: 0.5, c_hi: 2.0 });
    let cells = model.cell_family(3, 3);
    let candidate = MarginalSpec { scale: 2.0, ..MarginalSpec::pareto(3.0) };
    let xs: Vec<f64> = (0..30).map(|k| 0.5 * 2f64.powf(k as f64 / 4.0)).collect();
    let rep = domination_check(&cells, &candidate, &xs)?;
    println!("dominated by 2·Pareto(3): {} (max violation {:.2e})", rep.dominated(), rep.max_violation);
    let one = SlowlyVarying::constant();
    println!("E|X|^2 for the tabulated dominator: {:.4}", dominator_weighted_moment(&cells, 2.0, &one)?);
    let ks: Vec<f64> = (0..6).map(|k| 4f64.powi(k)).collect();
    let ui = uniform_integrability_trace(&cells, 2.0, &one, &ks)?;
    println!("UI trace {:?}, tends to zero {}", ui.values, ui.tends_to_zero);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
