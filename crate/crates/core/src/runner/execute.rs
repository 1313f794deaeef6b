//! Runs a resolved plan and renders its artifacts in memory.

use rayon::prelude::*;
use serde::Serialize;
use serde_json::json;

use super::scenario::{Plan, Scenario};
use crate::dyadic::{telescoping_decompose, telescoping_decompose_signed, DecompositionReport};
use crate::error::Result;
use crate::harness::{
    feller_wlln, moment_series_check, mz_slln_trace, pyke_root_lp, regular_norming_series, ConvergenceTrace,
};
use crate::ineq::{
    h2q_min_constant_over_subsets, h2q_sides, implied_constant, rosenthal_ledger_with, size_seed, tailbound_check,
    InequalityLedger, LedgerRow,
};
use crate::model::{dominator_model, sample_field};
use crate::varying::{
    debruijn_residual, debruijn_residual_swapped, dominator_weighted_moment, domination_check,
    uniform_integrability_trace,
};

/// One output file: name relative to the output directory and its bytes.
#[derive(Debug, Clone, PartialEq)]
pub struct Artifact {
    pub name: String,
    pub bytes: Vec<u8>,
}

/// Relative slack tolerance for the pathwise bound.
pub const BOUND_TOL: f64 = 1e-9;

fn csv_artifact<T: Serialize>(name: &str, rows: &[T]) -> Result<Artifact> {
    let mut w = csv::Writer::from_writer(Vec::new());
    for r in rows {
        w.serialize(r)?;
    }
    Ok(Artifact { name: name.into(), bytes: w.into_inner().map_err(|e| crate::Error::Serde(e.to_string()))? })
}

fn json_artifact(name: &str, value: &serde_json::Value) -> Result<Artifact> {
    let mut bytes = serde_json::to_vec_pretty(value)?;
    bytes.push(b'\n');
    Ok(Artifact { name: name.into(), bytes })
}

#[derive(Serialize, Clone)]
struct DecomposeRow {
    replicate: u64,
    part: &'static str,
    max_abs_centered_sum: f64,
    identity_residual: f64,
    i1: Option<f64>,
    i2: Option<f64>,
    i3: Option<f64>,
    i4: Option<f64>,
    r1: Option<f64>,
    r2: Option<f64>,
    r3: Option<f64>,
    r4: Option<f64>,
    deterministic_tail: Option<f64>,
    bound_slack: f64,
    bound_scale: f64,
    bound_holds: bool,
}

fn part_row(rep: u64, part: &'static str, r: &DecompositionReport) -> DecomposeRow {
    DecomposeRow {
        replicate: rep,
        part,
        max_abs_centered_sum: r.max_abs_centered_sum,
        identity_residual: r.identity_residual,
        i1: Some(r.i_terms[0]),
        i2: Some(r.i_terms[1]),
        i3: Some(r.i_terms[2]),
        i4: Some(r.i_terms[3]),
        r1: Some(r.r_terms[0]),
        r2: Some(r.r_terms[1]),
        r3: Some(r.r_terms[2]),
        r4: Some(r.r_terms[3]),
        deterministic_tail: Some(r.deterministic_tail),
        bound_slack: r.bound_slack,
        bound_scale: r.bound_scale,
        bound_holds: r.bound_holds(BOUND_TOL),
    }
}

#[derive(Serialize)]
struct H2qRow {
    subset: String,
    size: usize,
    lhs: f64,
    bracket: f64,
    constant: f64,
}

#[derive(Serialize)]
struct VaryingRow {
    x: f64,
    l: f64,
    conjugate: f64,
    residual: f64,
    residual_swapped: f64,
}

#[derive(Serialize)]
struct MomentRow<'a> {
    item: &'a str,
    d: u32,
    diagonal_sum: f64,
}

fn trace_artifacts(sc: &Scenario, trace: &ConvergenceTrace) -> Result<Vec<Artifact>> {
    let name = sc.command.name();
    Ok(vec![
        csv_artifact(&format!("{name}_trace.csv"), &trace.points)?,
        json_artifact(
            &format!("{name}.json"),
            &json!({ "scenario": sc, "verdict": trace.verdict, "slope": trace.slope, "points": trace.points }),
        )?,
    ])
}

fn ledger_csv(ledger: &InequalityLedger) -> Result<Artifact> {
    let mut bytes = Vec::new();
    ledger.write_csv(&mut bytes)?;
    Ok(Artifact { name: "ledger.csv".into(), bytes })
}

/// Runs `plan` for `sc`; artifacts come back in a fixed order.
pub fn execute(sc: &Scenario, plan: &Plan) -> Result<Vec<Artifact>> {
    let model = &sc.model;
    let seed = sc.seed;
    match plan {
        Plan::Decompose { ladder, m_exp, n_exp, reps } => {
            let signed = !model.marginal.law().is_nonnegative();
            let per_rep: Result<Vec<(Vec<DecomposeRow>, serde_json::Value)>> = (0..*reps)
                .into_par_iter()
                .map(|rep| {
                    let field = sample_field(model, *m_exp, *n_exp, seed, rep)?;
                    if signed {
                        let d = telescoping_decompose_signed(&field, model, ladder, *m_exp, *n_exp)?;
                        let rows = vec![
                            part_row(rep, "positive", &d.positive),
                            part_row(rep, "negative", &d.negative),
                            DecomposeRow {
                                replicate: rep,
                                part: "signed",
                                max_abs_centered_sum: d.max_abs_centered_sum,
                                identity_residual: d.identity_residual,
                                i1: None,
                                i2: None,
                                i3: None,
                                i4: None,
                                r1: None,
                                r2: None,
                                r3: None,
                                r4: None,
                                deterministic_tail: None,
                                bound_slack: d.bound_slack,
                                bound_scale: d.bound_scale,
                                bound_holds: d.bound_slack >= -BOUND_TOL * d.bound_scale,
                            },
                        ];
                        Ok((rows, serde_json::to_value(&d)?))
                    } else {
                        let d = telescoping_decompose(&field, model, ladder, *m_exp, *n_exp)?;
                        Ok((vec![part_row(rep, "nonnegative", &d)], serde_json::to_value(&d)?))
                    }
                })
                .collect();
            let per_rep = per_rep?;
            let rows: Vec<DecomposeRow> = per_rep.iter().flat_map(|(r, _)| r.iter()).cloned().collect();
            let max_residual = rows.iter().map(|r| r.identity_residual).fold(0.0, f64::max);
            let min_rel_slack = rows.iter().map(|r| r.bound_slack / r.bound_scale).fold(f64::INFINITY, f64::min);
            let all_hold = rows.iter().all(|r| r.bound_holds);
            let reports: Vec<&serde_json::Value> = per_rep.iter().map(|(_, j)| j).collect();
            Ok(vec![
                csv_artifact("decompose.csv", &rows)?,
                json_artifact(
                    "decompose.json",
                    &json!({
                        "scenario": sc,
                        "max_identity_residual": max_residual,
                        "min_relative_slack": min_rel_slack,
                        "all_bounds_hold": all_hold,
                        "reports": reports,
                    }),
                )?,
            ])
        }
        Plan::Rosenthal { scheme, ladder, sizes, reps, convention, level } => {
            let ledger = rosenthal_ledger_with(model, sizes, scheme, ladder, *reps, seed, *convention, *level)?;
            let max_c = ledger.rows.iter().map(|r| r.implied_constant).fold(0.0, f64::max);
            Ok(vec![
                ledger_csv(&ledger)?,
                json_artifact(
                    "rosenthal.json",
                    &json!({ "scenario": sc, "c1": scheme.c1(), "max_implied_constant": max_c, "rows": ledger.rows }),
                )?,
            ])
        }
        Plan::Tailbound { scheme, ladder, sizes, epsilon, reps } => {
            let reports: Result<Vec<_>> = sizes
                .par_iter()
                .map(|&(m, n)| tailbound_check(model, m, n, scheme, ladder, *epsilon, *reps, size_seed(seed, m, n)))
                .collect();
            let reports = reports?;
            let rows = reports
                .iter()
                .map(|r| LedgerRow {
                    m: r.m_exp,
                    n: r.n_exp,
                    q: scheme.q,
                    alpha: scheme.alpha,
                    a: scheme.a,
                    lhs: r.lhs_tail.estimate,
                    lhs_ci_low: r.lhs_tail.ci_low,
                    lhs_ci_high: r.lhs_tail.ci_high,
                    rhs: r.rhs_bound,
                    implied_constant: implied_constant(r.lhs_tail.estimate, r.rhs_bound),
                    preconditions_met: Some(r.preconditions_met),
                })
                .collect();
            Ok(vec![
                ledger_csv(&InequalityLedger { rows })?,
                json_artifact("tailbound.json", &json!({ "scenario": sc, "reports": reports }))?,
            ])
        }
        Plan::H2q { instance, q } => {
            let d = instance.dim();
            let mut rows = Vec::new();
            for mask in 1u32..(1 << d) {
                let subset: Vec<usize> = (0..d).filter(|l| mask >> l & 1 == 1).collect();
                let s = h2q_sides(instance, *q, &subset)?;
                let label: Vec<String> = subset.iter().map(|l| l.to_string()).collect();
                rows.push(H2qRow { subset: label.join(" "), size: subset.len(), lhs: s.lhs, bracket: s.bracket, constant: s.constant() });
            }
            let full = rows.last().map(|r| r.constant).unwrap_or(0.0);
            Ok(vec![
                csv_artifact("h2q.csv", &rows)?,
                json_artifact(
                    "h2q.json",
                    &json!({
                        "scenario": sc,
                        "pairwise_independent": instance.is_pairwise_independent(1e-12),
                        "min_constant": full,
                        "min_constant_over_subsets": h2q_min_constant_over_subsets(instance, *q)?,
                    }),
                )?,
            ])
        }
        Plan::Series { p, alpha, epsilon, family, max_block, reps } => {
            let s = regular_norming_series(model, *p, *alpha, *epsilon, family, *max_block, *reps, seed)?;
            Ok(vec![
                csv_artifact("series.csv", &s.rows)?,
                json_artifact(
                    "series.json",
                    &json!({
                        "scenario": sc,
                        "partial_sum": s.partial_sum(),
                        "diagonal_sums": s.diagonal_sums,
                        "decay": s.decay,
                        "verdict": s.verdict,
                    }),
                )?,
            ])
        }
        Plan::Slln { p, max_exp } => trace_artifacts(sc, &mz_slln_trace(model, *p, *max_exp, seed)?),
        Plan::Wlln { p, grid_exps, epsilon, reps } => {
            trace_artifacts(sc, &feller_wlln(model, *p, grid_exps, *epsilon, *reps, seed)?)
        }
        Plan::Lp { p, grid_exps, reps } => trace_artifacts(sc, &pyke_root_lp(model, *p, grid_exps, *reps, seed)?),
        Plan::Varying { family, x_exps } => {
            let conj = family.conjugate()?;
            let mut rows = Vec::with_capacity(x_exps.len());
            for &k in x_exps {
                let x = 10f64.powi(k);
                rows.push(VaryingRow {
                    x,
                    l: family.eval(x),
                    conjugate: conj.eval(x),
                    residual: debruijn_residual(family, x)?,
                    residual_swapped: debruijn_residual_swapped(family, x)?,
                });
            }
            let nonincreasing = rows.windows(2).all(|w| w[1].residual <= w[0].residual);
            Ok(vec![
                csv_artifact("varying.csv", &rows)?,
                json_artifact(
                    "varying.json",
                    &json!({ "scenario": sc, "conjugate": conj, "residual_nonincreasing": nonincreasing }),
                )?,
            ])
        }
        Plan::Dominate { m_exp, n_exp, candidate, x_grid, p, family, k_grid } => {
            let cells = model.cell_family(1 << m_exp, 1 << n_exp);
            let cand = match candidate {
                Some(c) => c.clone(),
                None => dominator_model(&cells)?,
            };
            let mut report = domination_check(&cells, &cand, x_grid)?;
            report.ui_trace = Some(uniform_integrability_trace(&cells, *p, family, k_grid)?);
            let weighted = dominator_weighted_moment(&cells, *p, family)?;
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["x".to_string()];
            header.extend((0..cells.len()).map(|i| format!("cell_{i}")));
            header.extend(["sup_tail", "candidate_tail", "dominator_tail"].map(String::from));
            w.write_record(&header)?;
            for (k, x) in report.x_grid.iter().enumerate() {
                let mut rec = vec![x.to_string()];
                rec.extend(report.cell_tails.iter().map(|t| t[k].to_string()));
                rec.push(report.sup_tail[k].to_string());
                rec.push(report.candidate_tail[k].to_string());
                rec.push(report.dominator_tail[k].to_string());
                w.write_record(&rec)?;
            }
            let bytes = w.into_inner().map_err(|e| crate::Error::Serde(e.to_string()))?;
            let scales: Vec<f64> = cells.iter().map(|c| c.sc).collect();
            Ok(vec![
                Artifact { name: "dominate.csv".into(), bytes },
                json_artifact(
                    "dominate.json",
                    &json!({
                        "scenario": sc,
                        "cell_scales": scales,
                        "dominated": report.dominated(),
                        "max_violation": report.max_violation,
                        "ui_trace": report.ui_trace,
                        "dominator_weighted_moment": weighted,
                    }),
                )?,
            ])
        }
        Plan::MomentSeries { p, alpha, q, max_term } => {
            let r = moment_series_check(&model.marginal, *p, *alpha, *q, *max_term)?;
            let rows: Vec<MomentRow> = r
                .series
                .iter()
                .flat_map(|s| s.diagonal_sums.iter().map(move |&(d, v)| MomentRow { item: &s.item, d, diagonal_sum: v }))
                .collect();
            Ok(vec![
                csv_artifact("moment_series.csv", &rows)?,
                json_artifact("moment_series.json", &json!({ "scenario": sc, "report": r }))?,
            ])
        }
    }
}
