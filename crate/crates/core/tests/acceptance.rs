//! End-to-end acceptance checks, one test per criterion. Each prints a single
//! `[acceptance] #k PASS|FAIL ...` line with its measured quantity and runtime.

use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use dyadic_field::dyadic::{telescoping_decompose, telescoping_decompose_signed, TruncationLadder};
use dyadic_field::harness::{baum_katz_series, feller_wlln, moment_series_check, mz_slln_trace, pyke_root_lp, Verdict};
use dyadic_field::ineq::{
    h2q_min_constant, h2q_min_constant_over_subsets, rosenthal_lhs_exact, rosenthal_lhs_mc, walsh_instance, H2qInstance,
    RectConvention, Transform, WeightScheme,
};
use dyadic_field::runner::{self, Format, RunOptions, MANIFEST_NAME};
use dyadic_field::varying::{debruijn_residual, SlowlyVarying};
use dyadic_field::{sample_field, DependenceSpec, FieldModel, MarginalSpec, Modulation};

fn report(k: u32, pass: bool, detail: &str, elapsed: Duration, budget: Duration) -> bool {
    let ok = pass && elapsed <= budget;
    let line = format!(
        "[acceptance] #{k:<2} {} {detail} ({:.2}s, budget {:.0}s)\n",
        if ok { "PASS" } else { "FAIL" },
        elapsed.as_secs_f64(),
        budget.as_secs_f64()
    );
    // straight to the handle: `println!` output is swallowed by the harness for passing tests
    let mut out = std::io::stdout().lock();
    let _ = out.write_all(line.as_bytes());
    let _ = out.flush();
    ok
}

fn mixed_models() -> Vec<FieldModel> {
    vec![
        FieldModel::iid(MarginalSpec::bernoulli(0.5)),
        FieldModel::iid(MarginalSpec::pareto(3.0)),
        FieldModel::iid(MarginalSpec::pareto(1.5)),
        FieldModel::iid(MarginalSpec::exponential(1.0)),
        FieldModel::iid(MarginalSpec::rademacher()),
        FieldModel::iid(MarginalSpec::symmetrized_pareto(2.5)),
        FieldModel::iid(MarginalSpec::rademacher()).with_dependence(DependenceSpec::PairwiseWalsh { generators: 3 }),
        FieldModel::iid(MarginalSpec::exponential(2.0))
            .with_dependence(DependenceSpec::GaussianCopulaNegative { correlation: -0.1, radius: 1 }),
        FieldModel::iid(MarginalSpec::pareto(3.0)).with_modulation(Modulation::Checkerboard { c_lo: 0.5, c_hi: 2.0 }),
        FieldModel::iid(MarginalSpec::centered_pareto(2.2)).with_dependence(DependenceSpec::MovingAverage { window: 2 }),
    ]
}

#[test]
fn criterion_01_decomposition_identity() {
    let t0 = Instant::now();
    let models = mixed_models();
    let ladder = TruncationLadder::power(0.75).unwrap();
    let mut worst = 0.0f64;
    let mut count = 0;
    for k in 0..500u64 {
        let model = &models[k as usize % models.len()];
        let m = 1 + (k % 6) as u32;
        let n = 1 + ((k / 6) % 6) as u32;
        let field = sample_field(model, m, n, 0xACCE_0001, k).unwrap();
        let residual = if model.marginal.law().is_nonnegative() {
            telescoping_decompose(&field, model, &ladder, m, n).unwrap().identity_residual
        } else {
            let s = telescoping_decompose_signed(&field, model, &ladder, m, n).unwrap();
            s.identity_residual.max(s.positive.identity_residual).max(s.negative.identity_residual)
        };
        worst = worst.max(residual);
        count += 1;
    }
    let pass = count == 500 && worst <= 1e-9;
    assert!(report(1, pass, &format!("{count} fields, max relative residual {worst:.3e}"), t0.elapsed(), Duration::from_secs(120)));
}

#[test]
fn criterion_02_pathwise_bound() {
    let t0 = Instant::now();
    let ladder = TruncationLadder::power(1.0).unwrap();
    let mut held = 0;
    let mut min_rel = f64::INFINITY;
    for (tag, model) in [(1u64, FieldModel::iid(MarginalSpec::bernoulli(0.5))), (2, FieldModel::iid(MarginalSpec::pareto(3.0)))] {
        for r in 0..200u64 {
            let field = sample_field(&model, 5, 5, 0xACCE_0002 + tag, r).unwrap();
            let rep = telescoping_decompose(&field, &model, &ladder, 5, 5).unwrap();
            min_rel = min_rel.min(rep.bound_slack / rep.bound_scale);
            held += usize::from(rep.bound_holds(1e-9));
        }
    }
    let pass = held == 400;
    assert!(report(2, pass, &format!("{held}/400 bounds hold, min slack/scale {min_rel:.4}"), t0.elapsed(), Duration::from_secs(180)));
}

#[test]
fn criterion_03_weight_envelope() {
    let t0 = Instant::now();
    let mut checked = 0;
    let mut failures = Vec::new();
    for (alpha, a) in [(1.0, 0.75), (0.8, 0.6), (2.0 / 3.0, 0.55)] {
        let scheme = WeightScheme::new(1.0, alpha, 1.0, a).unwrap();
        let ladder = TruncationLadder::power(alpha).unwrap();
        let c1 = scheme.c1();
        let r = f64::exp2(alpha - a);
        assert_eq!(c1, (r / (r - 1.0)).powi(2));
        for m in 1..=12 {
            for n in 1..=12 {
                let total = scheme.weight_total(m, n).unwrap();
                let b = ladder.b_dyadic(m + n);
                if !(b <= total && total <= c1 * b) {
                    failures.push((alpha, a, m, n));
                }
                checked += 1;
            }
        }
    }
    let pass = failures.is_empty();
    assert!(report(3, pass, &format!("{checked} (α, a, m, n) cases, {} failures", failures.len()), t0.elapsed(), Duration::from_secs(1)), "{failures:?}");
}

/// Nondecreasing transforms of independent or pairwise-independent variables.
fn pairwise_instances() -> Vec<H2qInstance> {
    let mut out = Vec::new();
    let steps = [
        Transform::Identity,
        Transform::Clamp { lo: -0.5, hi: 0.25 },
        Transform::Step { at: 0.0, below: -2.0, above: 3.0 },
        Transform::Affine { slope: 2.5, intercept: 1.0 },
    ];
    let w = walsh_instance(2).unwrap();
    for t0 in &steps {
        for t1 in &steps {
            for t2 in &steps {
                let mut inst = w.clone();
                inst.transforms = vec![t0.clone(), t1.clone(), t2.clone()];
                out.push(inst);
            }
        }
    }
    // product law of a 3-point and a 2-point variable and a 2-point variable
    let (a, pa) = ([-1.0, 0.5, 4.0], [0.2, 0.5, 0.3]);
    let (b, pb) = ([0.0, 1.0], [0.7, 0.3]);
    let (c, pc) = ([-3.0, 2.0], [0.4, 0.6]);
    let mut outcomes = Vec::new();
    let mut probs = Vec::new();
    for i in 0..3 {
        for j in 0..2 {
            for k in 0..2 {
                outcomes.push(vec![a[i], b[j], c[k]]);
                probs.push(pa[i] * pb[j] * pc[k]);
            }
        }
    }
    for t in &steps {
        out.push(H2qInstance::new(outcomes.clone(), probs.clone(), vec![t.clone(), Transform::Identity, t.clone()]).unwrap());
    }
    out
}

#[test]
fn criterion_04_h2q_oracle() {
    let t0 = Instant::now();
    let triple = h2q_min_constant(&walsh_instance(2).unwrap(), 1.0).unwrap();
    let pair = H2qInstance::uniform(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
    let pair_q2 = h2q_min_constant(&pair, 2.0).unwrap();
    let instances = pairwise_instances();
    let mut worst = 0.0f64;
    for inst in &instances {
        assert!(inst.is_pairwise_independent(1e-12));
        worst = worst.max(h2q_min_constant_over_subsets(inst, 1.0).unwrap());
    }
    let pass = triple == 0.5 && (pair_q2 - 4.0 / 3.0).abs() < 1e-15 && worst <= 1.0 + 1e-12;
    let detail = format!("triple q=1: {triple}, pair q=2: {pair_q2:.15}, worst over {} pairwise instances: {worst:.6}", instances.len());
    assert!(report(4, pass, &detail, t0.elapsed(), Duration::from_secs(1)));
}

#[test]
fn criterion_05_rosenthal_lhs_oracle() {
    let t0 = Instant::now();
    let cases = [
        (MarginalSpec::bernoulli(0.5), 1.0, 1.0),
        (MarginalSpec::discrete(vec![0.0, 1.0, 3.0], vec![0.5, 0.3, 0.2]), 1.5, 0.8),
        (MarginalSpec::discrete(vec![-2.0, 0.5, 1.0], vec![0.25, 0.5, 0.25]), 1.0, 1.0),
        (MarginalSpec::rademacher(), 2.0, 2.0 / 3.0),
    ];
    let mut lines = Vec::new();
    let mut pass = true;
    for (i, (marginal, q, alpha)) in cases.into_iter().enumerate() {
        let model = FieldModel::iid(marginal);
        let ladder = TruncationLadder::power(alpha).unwrap();
        for conv in [RectConvention::Strict, RectConvention::Closed] {
            let exact = rosenthal_lhs_exact(&model, 1, 1, q, &ladder, conv).unwrap();
            let mc = rosenthal_lhs_mc(&model, 1, 1, q, &ladder, 10_000, 0xACCE_0005 + i as u64, conv, 0.99).unwrap();
            let inside = mc.contains(exact) || (mc.std_err == 0.0 && (mc.mean - exact).abs() < 1e-12);
            pass &= inside;
            lines.push(format!("{exact:.4}∈[{:.4},{:.4}]", mc.ci_low, mc.ci_high));
        }
    }
    assert!(report(5, pass, &lines.join(" "), t0.elapsed(), Duration::from_secs(30)));
}

#[test]
fn criterion_06_baum_katz_positive() {
    let t0 = Instant::now();
    let model = FieldModel::iid(MarginalSpec::rademacher());
    let est = baum_katz_series(&model, 1.5, 2.0 / 3.0, 1.0, 10, 2000, 20240601).unwrap();
    let fit = est.decay.expect("decay fit");
    let pass = fit.ci_high < 0.0 && est.verdict == Verdict::DecreasingToZero;
    let detail = format!("slope {:.3}, 95% CI [{:.3}, {:.3}], partial sum {:.4}", fit.slope, fit.ci_low, fit.ci_high, est.partial_sum());
    assert!(report(6, pass, &detail, t0.elapsed(), Duration::from_secs(600)));
}

#[test]
fn criterion_07_necessity_probes() {
    let t0 = Instant::now();
    let heavy = FieldModel::iid(MarginalSpec::symmetrized_pareto(1.2));
    let mz = mz_slln_trace(&heavy, 1.5, 10, 7).unwrap();
    let grids: Vec<u32> = (4..=12).collect();
    let boundary = FieldModel::iid(MarginalSpec::symmetrized_pareto(1.5));
    let fel = feller_wlln(&boundary, 1.5, &grids, 1.0, 2000, 7).unwrap();
    let min_low = fel.points.iter().map(|p| p.ci_low).fold(f64::INFINITY, f64::min);
    let pass = mz.verdict != Verdict::DecreasingToZero && fel.verdict != Verdict::DecreasingToZero && min_low >= 0.5;
    let detail = format!("MZ trace verdict {}, Feller verdict {} with min Wilson low {min_low:.3}", mz.verdict, fel.verdict);
    assert!(report(7, pass, &detail, t0.elapsed(), Duration::from_secs(600)));
}

#[test]
fn criterion_08_pyke_root() {
    let t0 = Instant::now();
    let grids: Vec<u32> = (4..=12).collect();
    let light = pyke_root_lp(&FieldModel::iid(MarginalSpec::rademacher()), 1.5, &grids, 2000, 7).unwrap();
    let heavy = pyke_root_lp(&FieldModel::iid(MarginalSpec::centered_pareto(1.2)), 1.5, &grids, 2000, 7).unwrap();
    let pass = light.verdict == Verdict::DecreasingToZero && heavy.verdict != Verdict::DecreasingToZero;
    let s = light.statistics();
    let detail = format!(
        "Rademacher {} ({:.3} → {:.3}), centered Pareto 1.2 {}",
        light.verdict,
        s[0],
        s[s.len() - 1],
        heavy.verdict
    );
    assert!(report(8, pass, &detail, t0.elapsed(), Duration::from_secs(600)));
}

#[test]
fn criterion_09_moment_series_consistency() {
    let t0 = Instant::now();
    let mut pass = true;
    let mut parts = Vec::new();
    for beta in [1.5, 2.0, 3.0] {
        let rep = moment_series_check(&MarginalSpec::pareto(beta), 1.5, 2.0 / 3.0, 2.0, 12).unwrap();
        let finite = beta > 1.5;
        let classes: Vec<bool> = rep.series.iter().map(|s| s.convergent).collect();
        let agree = classes.len() == 4 && classes.iter().all(|&c| c == classes[0]);
        pass &= agree && rep.item_i_finite == finite && classes[0] == finite && rep.consistent;
        parts.push(format!("β={beta}: (i) finite {}, (ii)-(v) {classes:?}", rep.item_i_finite));
    }
    assert!(report(9, pass, &parts.join("; "), t0.elapsed(), Duration::from_secs(60)));
}

#[test]
fn criterion_10_debruijn() {
    let t0 = Instant::now();
    let xs: Vec<f64> = (3..=12).map(|k| 10f64.powi(k)).collect();
    let mut pass = true;
    let mut parts = Vec::new();
    for gamma in [1.0, 2.0] {
        let fam = SlowlyVarying::LogPower { gamma };
        let r: Vec<f64> = xs.iter().map(|&x| debruijn_residual(&fam, x).unwrap()).collect();
        pass &= r.windows(2).all(|w| w[1] <= w[0]);
        parts.push(format!("log^{gamma}: {:.4} → {:.4}", r[0], r[r.len() - 1]));
    }
    let constant = SlowlyVarying::constant();
    let zero = xs.iter().chain(&[2.0, 1e100]).all(|&x| debruijn_residual(&constant, x).unwrap() == 0.0);
    pass &= zero;
    parts.push(format!("constant identically zero: {zero}"));
    assert!(report(10, pass, &parts.join(", "), t0.elapsed(), Duration::from_secs(1)));
}

fn scenario_files() -> Vec<PathBuf> {
    let dir = Path::new(env!("CARGO_MANIFEST_DIR")).join("scenarios");
    let mut v: Vec<PathBuf> = std::fs::read_dir(dir).unwrap().map(|e| e.unwrap().path()).collect();
    v.sort();
    v
}

fn output_files(dir: &Path) -> Vec<(String, Vec<u8>)> {
    let mut v: Vec<(String, Vec<u8>)> = std::fs::read_dir(dir)
        .unwrap()
        .map(|e| e.unwrap().path())
        .filter(|p| p.file_name().unwrap() != MANIFEST_NAME)
        .map(|p| (p.file_name().unwrap().to_string_lossy().into_owned(), std::fs::read(&p).unwrap()))
        .collect();
    v.sort();
    v
}

#[test]
fn criterion_11_determinism() {
    let t0 = Instant::now();
    let tmp = tempfile::tempdir().unwrap();
    let mut mismatched = Vec::new();
    let files = scenario_files();
    for path in &files {
        let sc = runner::parse_scenario(path).unwrap();
        let mut outs = Vec::new();
        for threads in [1usize, 8] {
            let out = tmp.path().join(format!("{}-{threads}", sc.name));
            let opts = RunOptions { out: Some(out.clone()), threads: Some(threads), format: Format::Both, ..Default::default() };
            let m = runner::run(&sc, &opts).unwrap();
            assert!(!m.files.is_empty());
            outs.push(output_files(&out));
        }
        if outs[0] != outs[1] {
            mismatched.push(sc.name.clone());
        }
    }
    let pass = mismatched.is_empty();
    let detail = format!("{} scenarios at 1 and 8 threads, differing: {mismatched:?}", files.len());
    assert!(report(11, pass, &detail, t0.elapsed(), Duration::from_secs(120)));
}
