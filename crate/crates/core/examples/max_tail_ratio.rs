// Ratio of the summed marginal tail to the tail of the maximum.

use dyadic_field::dyadic::TruncationLadder;
use dyadic_field::harness::lemma_a1_ratio;
use dyadic_field::model::DependenceSpec;
use dyadic_field::{FieldModel, MarginalSpec};

pub fn run_example() -> dyadic_field::Result<()> {
    let ladder = TruncationLadder::power(0.5)?;
    let grids: Vec<u32> = (2..=10).step_by(2).collect();
    let iid = FieldModel::iid(MarginalSpec::pareto(2.0));
    let walsh = iid.clone().with_dependence(DependenceSpec::PairwiseWalsh { generators: 3 });
    for (label, model) in [("iid", iid), ("Walsh", walsh)] {
        let t = lemma_a1_ratio(&model, &ladder, &grids, 1.0, 1000, 2)?;
        let r: Vec<String> = t.points.iter().map(|p| format!("{:.3}", p.ratio)).collect();
        println!("{label:>6}: ratios [{}], bounded {}", r.join(" "), t.bounded);
    }
    Ok(())
}

#[allow(dead_code)]
fn main() -> dyadic_field::Result<()> {
    run_example()
}
