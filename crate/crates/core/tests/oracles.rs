//! Frozen reference values. Each check compares library output against an
//! independent computation done here (closed form, brute force or enumeration).

use approx::assert_relative_eq;
use dyadic_field::dyadic::{
    clamp_truncate, ladder_increment, telescoping_decompose, Centering, ClampMode, LadderKind, PrefixSumTable,
    TruncationLadder,
};
use dyadic_field::harness::{
    feller_wlln, lemma_a1_ratio, moment_series_check, mz_slln_trace, regular_norming_series, series_violations,
    baum_katz_series, Verdict,
};
use dyadic_field::ineq::{
    h2q_sides, rosenthal_lhs_exact, tailbound_check, walsh_instance, RectConvention, WeightScheme,
};
use dyadic_field::model::DependenceSpec;
use dyadic_field::varying::{
    debruijn_residual, debruijn_residual_swapped, domination_check, log_nu, log_nu_sq, uniform_integrability_trace,
    SlowlyVarying,
};
use dyadic_field::{dominator_model, sample_field, FieldModel, FieldSample, MarginalSpec, Modulation};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

#[test]
fn walsh_triple_has_zero_pairwise_covariance() {
    let model = FieldModel::iid(MarginalSpec::rademacher()).with_dependence(DependenceSpec::PairwiseWalsh { generators: 2 });
    let mut seen = std::collections::BTreeSet::new();
    for r in 0..64 {
        let f = sample_field(&model, 0, 2, 5, r).unwrap();
        seen.insert((f.values[0] as i32, f.values[1] as i32, f.values[2] as i32));
    }
    // the four generator outcomes, each with its product
    let expected: std::collections::BTreeSet<_> =
        [(1, 1, 1), (1, -1, -1), (-1, 1, -1), (-1, -1, 1)].into_iter().collect();
    assert_eq!(seen, expected);
    let inst = walsh_instance(2).unwrap();
    for a in 0..3 {
        for b in (a + 1)..3 {
            let cov: f64 = inst.outcomes.iter().map(|o| o[a] * o[b]).sum::<f64>() / 4.0;
            assert_eq!(cov, 0.0);
        }
    }
}

#[test]
fn pareto_truncated_second_moment() {
    let law = MarginalSpec::pareto(3.0);
    assert_relative_eq!(law.law().truncated_moment(2.0, 4.0), 2.25, max_relative = 1e-12);
    let quad = dyadic_field::quad::integrate(|x| x * x * 3.0 * x.powi(-4), 1.0, 4.0, 1e-12);
    assert_relative_eq!(quad, 2.25, max_relative = 1e-10);
}

#[test]
fn dominators() {
    let p2 = MarginalSpec::pareto(2.0);
    let p3 = MarginalSpec::pareto(3.0);
    let dom = dominator_model(&[p2.law(), p3.law()]).unwrap();
    for x in [1.0f64, 1.5, 3.0, 10.0, 100.0] {
        assert_relative_eq!(dom.law().sf(x), x.powi(-2), max_relative = 1e-9);
    }
    let model = FieldModel::iid(MarginalSpec::rademacher()).with_modulation(Modulation::Checkerboard { c_lo: 0.5, c_hi: 2.0 });
    let cells = model.cell_family(4, 4);
    let doubled = MarginalSpec { scale: 2.0, ..MarginalSpec::rademacher() };
    let xs: Vec<f64> = (0..40).map(|k| 0.1 * k as f64).collect();
    let rep = domination_check(&cells, &doubled, &xs).unwrap();
    assert!(rep.max_violation <= 0.0, "{}", rep.max_violation);
    for (x, t) in xs.iter().zip(&rep.sup_tail) {
        let two_abs = if *x < 2.0 { 1.0 } else { 0.0 };
        assert_eq!(*t, two_abs, "x = {x}");
    }
}

#[test]
fn clamp_and_increment_by_hand() {
    let ladder = TruncationLadder::power(1.0).unwrap();
    assert_eq!(ladder_increment(3.0, 2, &ladder).unwrap(), 1.0);
    assert_eq!(ladder_increment(100.0, 2, &ladder).unwrap(), 2.0);
    assert_eq!(ladder.b_dyadic(2) - ladder.b_dyadic(1), 2.0);
    assert_eq!(clamp_truncate(-7.0, 3.0, ClampMode::Signed).unwrap(), -3.0);
    assert!(clamp_truncate(-7.0, 3.0, ClampMode::Nonnegative).is_err());
}

fn naive_sum(vals: &[f64], cols: usize, u: usize, v: usize, c: f64) -> f64 {
    let mut s = 0.0;
    for i in 0..u {
        for j in 0..v {
            s += vals[i * cols + j] - c;
        }
    }
    s
}

#[test]
fn prefix_table_matches_double_loop() {
    let mut rng = ChaCha8Rng::seed_from_u64(99);
    let vals: Vec<f64> = (0..64).map(|_| rng.gen_range(-5.0..5.0)).collect();
    let t = PrefixSumTable::build(8, 8, &vals, &Centering::Uniform(0.25)).unwrap();
    for _ in 0..20 {
        let (u, v) = (rng.gen_range(0..=8), rng.gen_range(0..=8));
        assert_relative_eq!(t.at(u, v), naive_sum(&vals, 8, u, v, 0.25), epsilon = 1e-12);
    }
    let ints: Vec<f64> = (0..16).map(|k| ((k * 7) % 11) as f64 - 4.0).collect();
    let t = PrefixSumTable::build(4, 4, &ints, &Centering::Zero).unwrap();
    for r0 in 0..4 {
        for r1 in r0..=4 {
            for c0 in 0..4 {
                for c1 in c0..=4 {
                    let mut s = 0.0;
                    for i in r0..r1 {
                        for j in c0..c1 {
                            s += ints[i * 4 + j];
                        }
                    }
                    assert_eq!(t.rect(r0, r1, c0, c1), s);
                }
            }
        }
    }
}

#[test]
fn two_by_two_decomposition() {
    let model = FieldModel::iid(MarginalSpec::discrete(vec![1.0, 2.0, 3.0, 4.0], vec![0.25; 4]));
    let ladder = TruncationLadder::power(1.0).unwrap();
    let f = FieldSample::from_values(1, 1, vec![1.0, 2.0, 3.0, 4.0]).unwrap();
    let rep = telescoping_decompose(&f, &model, &ladder, 1, 1).unwrap();
    assert_eq!(rep.max_abs_centered_sum, 1.5);
    assert_eq!(rep.identity_residual, 0.0);
}

#[test]
fn bernoulli_pathwise_bound_on_16x16() {
    let model = FieldModel::iid(MarginalSpec::bernoulli(0.5));
    let ladder = TruncationLadder::power(1.0).unwrap();
    for r in 0..200 {
        let f = sample_field(&model, 4, 4, 31, r).unwrap();
        let rep = telescoping_decompose(&f, &model, &ladder, 4, 4).unwrap();
        assert!(rep.bound_slack >= 0.0, "replicate {r}: {}", rep.bound_slack);
    }
}

#[test]
fn weight_values() {
    let s = WeightScheme::new(1.0, 1.0, 1.0, 0.5 + 1e-12).unwrap();
    // a sits just above αp/(2q) = 1/2; compare against the exact a = 1/2 formulas
    assert_relative_eq!(s.weight(2, 1, 1, 1).unwrap(), 2f64.powf(2.5), max_relative = 1e-10);
    let r = 2f64.sqrt();
    assert_relative_eq!(s.c1(), (r / (r - 1.0)).powi(2), max_relative = 1e-10);
    assert_relative_eq!(s.c1(), 11.656854, max_relative = 1e-6);
    let total = s.weight_total(2, 2).unwrap();
    assert_relative_eq!(total, 4.0 * (r + 2.0).powi(2), max_relative = 1e-10);
    assert_relative_eq!(total / 16.0, 2.9142136, max_relative = 1e-6);
    let ladder = TruncationLadder::power(1.0).unwrap();
    for m in 1..=10 {
        for n in 1..=10 {
            assert!(s.weight_total(m, n).unwrap() / ladder.b_dyadic(m + n) <= s.c1());
        }
    }
}

fn enumerate_bernoulli_closed() -> f64 {
    // E max_{u,v ≤ 2} |S(u,v)|² over the 16 outcomes of a 2×2 Bernoulli(1/2) field
    let mut acc = 0.0;
    for w in 0..16u32 {
        let x: Vec<f64> = (0..4).map(|k| f64::from(w >> k & 1) - 0.5).collect();
        let sums = [x[0], x[0] + x[1], x[0] + x[2], x[0] + x[1] + x[2] + x[3]];
        let m = sums.iter().fold(0.0f64, |a, s| a.max(s.abs()));
        acc += m * m / 16.0;
    }
    acc
}

#[test]
fn bernoulli_lhs_by_enumeration() {
    let model = FieldModel::iid(MarginalSpec::bernoulli(0.5));
    let ladder = TruncationLadder::power(1.0).unwrap();
    let closed = rosenthal_lhs_exact(&model, 1, 1, 1.0, &ladder, RectConvention::Closed).unwrap();
    assert_relative_eq!(closed, enumerate_bernoulli_closed(), max_relative = 1e-14);
    let strict = rosenthal_lhs_exact(&model, 1, 1, 1.0, &ladder, RectConvention::Strict).unwrap();
    assert_eq!(strict, 0.25);
}

#[test]
fn tailbound_preconditions_switch_on() {
    let model = FieldModel::iid(MarginalSpec::pareto(3.0));
    let (p, alpha, q) = (1.5, 1.0 / 1.5, 1.0);
    let scheme = WeightScheme::with_default_a(p, alpha, q).unwrap();
    let ladder = TruncationLadder::power(alpha).unwrap();
    let flags: Vec<bool> = (1..=8)
        .map(|k| tailbound_check(&model, k, k, &scheme, &ladder, 1.0, 0, 1).unwrap().preconditions_met)
        .collect();
    assert!(flags[7], "{flags:?}");
    let first = flags.iter().position(|&f| f).unwrap();
    assert!(flags[first..].iter().all(|&f| f), "{flags:?}");
}

#[test]
fn h2q_enumerations() {
    let triple = walsh_instance(2).unwrap();
    let s = h2q_sides(&triple, 1.0, &[0, 1, 2]).unwrap();
    assert_eq!((s.lhs, s.bracket, s.constant()), (3.0, 6.0, 0.5));
    let pair = dyadic_field::ineq::H2qInstance::uniform(vec![vec![1.0, 1.0], vec![1.0, -1.0], vec![-1.0, 1.0], vec![-1.0, -1.0]]).unwrap();
    let s = h2q_sides(&pair, 2.0, &[0, 1]).unwrap();
    assert_eq!((s.lhs, s.bracket), (8.0, 6.0));
}

#[test]
fn rademacher_slln_trace_falls_below_threshold() {
    let tr = mz_slln_trace(&FieldModel::iid(MarginalSpec::rademacher()), 1.5, 10, 1).unwrap();
    let last = tr.points.last().unwrap();
    assert_eq!(last.grid_exp, 20);
    assert!(last.statistic < 0.15, "{}", last.statistic);
    assert_eq!(tr.verdict, Verdict::DecreasingToZero);
}

#[test]
fn feller_light_side_tends_to_zero() {
    let grids: Vec<u32> = (4..=12).collect();
    let tr = feller_wlln(&FieldModel::iid(MarginalSpec::symmetrized_pareto(1.3)), 1.2, &grids, 1.0, 2000, 7).unwrap();
    assert_eq!(tr.verdict, Verdict::DecreasingToZero);
    let rad = feller_wlln(&FieldModel::iid(MarginalSpec::rademacher()), 1.5, &grids, 1.0, 500, 7).unwrap();
    assert_eq!(rad.points.last().unwrap().statistic, 0.0);
}

#[test]
fn heavy_tailed_series_keeps_growing() {
    let est = baum_katz_series(&FieldModel::iid(MarginalSpec::symmetrized_pareto(1.2)), 1.5, 2.0 / 3.0, 1.0, 10, 400, 3).unwrap();
    assert_ne!(est.verdict, Verdict::DecreasingToZero);
    let d = &est.diagonal_sums;
    let tail: Vec<f64> = d[d.len() - 4..].iter().map(|x| x.1).collect();
    assert!(tail.windows(2).all(|w| w[1] > 0.5 * w[0]), "{tail:?}");
}

#[test]
fn log_norming_divides_by_log() {
    let fam = SlowlyVarying::LogPower { gamma: 1.0 };
    let ladder = TruncationLadder::new(LadderKind::PowerWithConjugate { alpha: 0.8, family: fam.clone() }).unwrap();
    for s in [4u32, 10, 20] {
        let x = (0.8 * s as f64).exp2();
        assert_relative_eq!(ladder.b_dyadic(s), x / x.ln(), max_relative = 1e-12);
    }
    let bounded = FieldModel::iid(MarginalSpec::rademacher());
    let est = regular_norming_series(&bounded, 1.5, 2.0 / 3.0, 1.0, &fam, 10, 500, 4).unwrap();
    assert!(est.partial_sum().is_finite());
    assert!(series_violations(1.5, 2.0 / 3.0, 1.0, 10).is_empty());
}

#[test]
fn walsh_ratio_stays_bounded() {
    let model = FieldModel::iid(MarginalSpec::pareto(2.0)).with_dependence(DependenceSpec::PairwiseWalsh { generators: 3 });
    let ladder = TruncationLadder::power(0.5).unwrap();
    let grids: Vec<u32> = (2..=10).collect();
    let tr = lemma_a1_ratio(&model, &ladder, &grids, 1.0, 2000, 8).unwrap();
    assert!(tr.bounded, "{:?}", tr.points.iter().map(|p| p.ratio).collect::<Vec<_>>());
    assert!(tr.bound.is_finite() && tr.bound < 5.0, "{}", tr.bound);
}

#[test]
fn moment_series_boundary_cases() {
    let two = moment_series_check(&MarginalSpec::pareto(2.0), 1.5, 2.0 / 3.0, 2.0, 10).unwrap();
    assert!(two.item_i_finite && two.series.iter().all(|s| s.convergent));
    let edge = moment_series_check(&MarginalSpec::pareto(1.5), 1.5, 2.0 / 3.0, 2.0, 10).unwrap();
    assert!(!edge.item_i_finite && edge.series.iter().all(|s| !s.convergent));
}

#[test]
fn iterated_logs_at_e_to_the_e() {
    let x = std::f64::consts::E.exp();
    assert_relative_eq!(log_nu(x, 2), std::f64::consts::E, max_relative = 1e-14);
    assert_relative_eq!(log_nu_sq(x, 2), std::f64::consts::E, max_relative = 1e-14);
}

#[test]
fn debruijn_residual_values() {
    let fam = SlowlyVarying::LogPower { gamma: 1.0 };
    let x = 1e6f64;
    let direct = (x.ln() / (x * x.ln()).ln() - 1.0).abs();
    assert_relative_eq!(debruijn_residual(&fam, x).unwrap(), direct, max_relative = 1e-12);
    assert!((direct - 0.16).abs() < 0.01);
    assert!(debruijn_residual(&fam, 1e12).unwrap() < direct);
    let swapped: Vec<f64> = (3..=12).map(|k| debruijn_residual_swapped(&fam, 10f64.powi(k)).unwrap()).collect();
    assert!(swapped.windows(2).all(|w| w[1] <= w[0]), "{swapped:?}");
}

#[test]
fn uniform_integrability_of_paretos() {
    let ks: Vec<f64> = (0..=8).map(|k| 0.25 * 4f64.powi(k)).collect();
    let one = SlowlyVarying::constant();
    let p3 = MarginalSpec::pareto(3.0);
    let p2 = MarginalSpec::pareto(2.0);
    let light = uniform_integrability_trace(&[p3.law()], 2.0, &one, &ks).unwrap();
    // E[X² 1(X² > K)] = 3 K^{-1/2} for K ≥ 1
    for (k, v) in ks.iter().zip(&light.values).filter(|(k, _)| **k >= 1.0) {
        assert_relative_eq!(*v, 3.0 / k.sqrt(), max_relative = 1e-6);
    }
    assert!(light.tends_to_zero);
    let edge = uniform_integrability_trace(&[p2.law()], 2.0, &one, &ks).unwrap();
    assert!(!edge.tends_to_zero);
}
