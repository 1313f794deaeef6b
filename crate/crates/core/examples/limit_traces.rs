// Strong-law, weak-law and L_p traces for a light and a heavy tail.

use dyadic_field::harness::{feller_wlln, mz_slln_trace, pyke_root_lp, ConvergenceTrace};
use dyadic_field::{FieldModel, MarginalSpec};

fn show(label: &str, t: &ConvergenceTrace) {
    let s: Vec<String> = t.statistics().iter().map(|x| format!("{x:.3}")).collect();
    println!("{label:>28}: {} [{}]", t.verdict, s.join(" "));
}

pub fn run_example() -> dyadic_field::Result<()> {
    let p = 1.5;
    let grids: Vec<u32> = (4..=10).step_by(2).collect();
    let light = FieldModel::iid(MarginalSpec::rademacher());
    let heavy = FieldModel::iid(MarginalSpec::symmetrized_pareto(1.2));
    show("SLLN Rademacher", &mz_slln_trace(&light, p, 9, 5)?);
    show("SLLN sym. Pareto 1.2", &mz_slln_trace(&heavy, p, 9, 5)?);
    show("WLLN sym. Pareto 1.5", &feller_wlln(&FieldModel::iid(MarginalSpec::symmetrized_pareto(p)), p, &grids, 1.0, 300, 5)?);
    show("L_p Rademacher", &pyke_root_lp(&light, p, &grids, 300, 5)?);
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
