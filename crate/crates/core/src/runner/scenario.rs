//! Scenario files: parsing, defaults and validation.

use std::path::{Path, PathBuf};

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::dyadic::{LadderKind, TruncationLadder};
use crate::error::{Error, Result};
use crate::harness::series_violations;
use crate::ineq::{H2qInstance, RectConvention, WeightScheme};
use crate::law::MarginalSpec;
use crate::model::{DependenceSpec, FieldModel, Modulation};
use crate::varying::SlowlyVarying;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    Decompose,
    Rosenthal,
    Tailbound,
    H2q,
    Series,
    Slln,
    Wlln,
    Lp,
    Varying,
    Dominate,
    MomentSeries,
}

impl Command {
    pub fn name(self) -> &'static str {
        match self {
            Command::Decompose => "decompose",
            Command::Rosenthal => "rosenthal",
            Command::Tailbound => "tailbound",
            Command::H2q => "h2q",
            Command::Series => "series",
            Command::Slln => "slln",
            Command::Wlln => "wlln",
            Command::Lp => "lp",
            Command::Varying => "varying",
            Command::Dominate => "dominate",
            Command::MomentSeries => "moment-series",
        }
    }

    fn uses_model(self) -> bool {
        !matches!(self, Command::H2q | Command::Varying)
    }
}

/// Every tunable of every command; each command reads the subset it needs.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Params {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub alpha: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub q: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub a: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub epsilon: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub m_exp: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub n_exp: Option<u32>,
    /// `[m, n]` pairs for ledger runs.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sizes: Option<Vec<[u32; 2]>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid_exps: Option<Vec<u32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub reps: Option<u64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_block: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_exp: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub max_term: Option<u32>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub level: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub convention: Option<RectConvention>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ladder: Option<LadderKind>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub family: Option<SlowlyVarying>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub instance: Option<H2qInstance>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub walsh_generators: Option<u32>,
    /// Evaluation points `x = 10^k`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_exps: Option<Vec<i32>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub x_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub k_grid: Option<Vec<f64>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub candidate: Option<MarginalSpec>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub command: Command,
    pub seed: u64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
    pub model: FieldModel,
    pub params: Params,
}

/// A scenario with every default filled in, ready to run.
#[derive(Debug, Clone)]
pub enum Plan {
    Decompose { ladder: TruncationLadder, m_exp: u32, n_exp: u32, reps: u64 },
    Rosenthal { scheme: WeightScheme, ladder: TruncationLadder, sizes: Vec<(u32, u32)>, reps: u64, convention: RectConvention, level: f64 },
    Tailbound { scheme: WeightScheme, ladder: TruncationLadder, sizes: Vec<(u32, u32)>, epsilon: f64, reps: u64 },
    H2q { instance: H2qInstance, q: f64 },
    Series { p: f64, alpha: f64, epsilon: f64, family: SlowlyVarying, max_block: u32, reps: u64 },
    Slln { p: f64, max_exp: u32 },
    Wlln { p: f64, grid_exps: Vec<u32>, epsilon: f64, reps: u64 },
    Lp { p: f64, grid_exps: Vec<u32>, reps: u64 },
    Varying { family: SlowlyVarying, x_exps: Vec<i32> },
    Dominate { m_exp: u32, n_exp: u32, candidate: Option<MarginalSpec>, x_grid: Vec<f64>, p: f64, family: SlowlyVarying, k_grid: Vec<f64> },
    MomentSeries { p: f64, alpha: f64, q: f64, max_term: u32 },
}

const TOP_KEYS: [&str; 6] = ["name", "command", "seed", "output", "model", "params"];
const MODEL_KEYS: [&str; 3] = ["marginal", "dependence", "modulation"];

fn field<T: DeserializeOwned>(v: Option<&Value>, path: &str, errs: &mut Vec<String>) -> Option<T> {
    let v = v?;
    match serde_json::from_value::<T>(v.clone()) {
        Ok(t) => Some(t),
        Err(e) => {
            errs.push(format!("{path}: {e}"));
            None
        }
    }
}

fn unknown_keys(obj: &serde_json::Map<String, Value>, known: &[&str], path: &str, errs: &mut Vec<String>) {
    for k in obj.keys() {
        if !known.contains(&k.as_str()) {
            let at = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
            errs.push(format!("{at}: unknown field, expected one of {}", known.join(", ")));
        }
    }
}

/// Reads TOML (any extension but `.json`) or JSON.
pub fn parse_scenario(path: &Path) -> Result<Scenario> {
    let text = std::fs::read_to_string(path)?;
    let is_json = path.extension().and_then(|e| e.to_str()) == Some("json");
    parse_scenario_str(&text, is_json, None)
}

/// Parses and validates; `command` fills in a missing `command` key and must
/// agree with it when present.
pub fn parse_scenario_str(text: &str, is_json: bool, command: Option<Command>) -> Result<Scenario> {
    let root: Value = if is_json {
        serde_json::from_str(text).map_err(|e| Error::Config(vec![format!("json: {e}")]))?
    } else {
        toml::from_str(text).map_err(|e| Error::Config(vec![format!("toml: {e}")]))?
    };
    let Value::Object(obj) = &root else {
        return Err(Error::Config(vec!["scenario must be a table".into()]));
    };
    let mut errs = Vec::new();
    unknown_keys(obj, &TOP_KEYS, "", &mut errs);
    let name: String = field(obj.get("name"), "name", &mut errs).unwrap_or_else(|| "scenario".into());
    let file_cmd: Option<Command> = field(obj.get("command"), "command", &mut errs);
    let cmd = match (file_cmd, command) {
        (Some(a), Some(b)) if a != b => {
            errs.push(format!("command: file says {} but {} was requested", a.name(), b.name()));
            None
        }
        (a, b) => a.or(b),
    };
    if cmd.is_none() && !obj.contains_key("command") {
        errs.push("command: missing".into());
    }
    let seed: u64 = field(obj.get("seed"), "seed", &mut errs).unwrap_or(0);
    let output: Option<PathBuf> = field(obj.get("output"), "output", &mut errs);

    let mut model = FieldModel::iid(MarginalSpec::rademacher());
    match obj.get("model") {
        Some(Value::Object(m)) => {
            unknown_keys(m, &MODEL_KEYS, "model", &mut errs);
            match field::<MarginalSpec>(m.get("marginal"), "model.marginal", &mut errs) {
                Some(spec) => model.marginal = spec,
                None if !m.contains_key("marginal") => errs.push("model.marginal: missing".into()),
                None => {}
            }
            if let Some(d) = field::<DependenceSpec>(m.get("dependence"), "model.dependence", &mut errs) {
                model.dependence = d;
            }
            if let Some(d) = field::<Modulation>(m.get("modulation"), "model.modulation", &mut errs) {
                model.modulation = d;
            }
        }
        Some(_) => errs.push("model: expected a table".into()),
        None if cmd.map(Command::uses_model).unwrap_or(false) => errs.push("model: missing".into()),
        None => {}
    }
    let params: Params = match obj.get("params") {
        Some(v) => field(Some(v), "params", &mut errs).unwrap_or_default(),
        None => Params::default(),
    };
    if !errs.is_empty() {
        return Err(Error::Config(errs));
    }
    let mut sc = Scenario { name, command: cmd.expect("checked above"), seed, output, model, params };
    sc.fill_defaults();
    let v = sc.violations();
    if v.is_empty() {
        Ok(sc)
    } else {
        Err(Error::Config(v))
    }
}

fn range_exps(lo: u32, hi: u32) -> Vec<u32> {
    (lo..=hi).collect()
}

impl Scenario {
    /// Writes resolved defaults back into `params` so outputs record them.
    pub fn fill_defaults(&mut self) {
        let p = &mut self.params;
        match self.command {
            Command::Decompose => {
                p.m_exp.get_or_insert(4);
                p.n_exp.get_or_insert(4);
                p.reps.get_or_insert(1);
                if p.ladder.is_none() {
                    p.ladder = Some(LadderKind::PowerAlpha { alpha: p.alpha.unwrap_or(1.0) });
                }
            }
            Command::Rosenthal | Command::Tailbound => {
                p.p.get_or_insert(1.0);
                p.alpha.get_or_insert(1.0);
                p.q.get_or_insert(1.0);
                if p.a.is_none() {
                    p.a = Some(WeightScheme::default_a(p.p.unwrap(), p.alpha.unwrap(), p.q.unwrap()));
                }
                if p.sizes.is_none() {
                    p.sizes = Some(vec![[p.m_exp.unwrap_or(2), p.n_exp.unwrap_or(2)]]);
                }
                p.reps.get_or_insert(10_000);
                if self.command == Command::Rosenthal {
                    p.convention.get_or_insert(RectConvention::Strict);
                    p.level.get_or_insert(0.95);
                } else {
                    p.epsilon.get_or_insert(1.0);
                }
                if p.ladder.is_none() {
                    p.ladder = Some(LadderKind::PowerAlpha { alpha: p.alpha.unwrap() });
                }
            }
            Command::H2q => {
                p.q.get_or_insert(1.0);
                if p.instance.is_none() {
                    p.walsh_generators.get_or_insert(2);
                }
            }
            Command::Series => {
                p.epsilon.get_or_insert(1.0);
                p.max_block.get_or_insert(10);
                p.reps.get_or_insert(2000);
                p.family.get_or_insert(SlowlyVarying::constant());
                if let (Some(pp), Some(al)) = (p.p, p.alpha) {
                    if pp >= 2.0 && p.q.is_none() && al > 0.5 {
                        let need = (al * pp - 1.0) / (2.0 * al - 1.0);
                        p.q = Some((need.floor() + 1.0).max(1.0));
                    }
                }
            }
            Command::Slln => {
                p.max_exp.get_or_insert(10);
            }
            Command::Wlln | Command::Lp => {
                p.grid_exps.get_or_insert_with(|| range_exps(4, 12));
                p.reps.get_or_insert(2000);
                if self.command == Command::Wlln {
                    p.epsilon.get_or_insert(1.0);
                }
            }
            Command::Varying => {
                p.family.get_or_insert(SlowlyVarying::LogPower { gamma: 1.0 });
                p.x_exps.get_or_insert_with(|| (3..=12).collect());
            }
            Command::Dominate => {
                p.m_exp.get_or_insert(3);
                p.n_exp.get_or_insert(3);
                p.p.get_or_insert(1.0);
                p.family.get_or_insert(SlowlyVarying::constant());
                p.x_grid.get_or_insert_with(|| (0..=40).map(|k| (k as f64 * 0.25).exp2() * 0.5).collect());
                p.k_grid.get_or_insert_with(|| (0..=8).map(|k| 0.25 * 4f64.powi(k)).collect());
            }
            Command::MomentSeries => {
                p.q.get_or_insert(2.0);
                p.max_term.get_or_insert(12);
            }
        }
    }

    /// Every problem with the scenario, not only the first.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.command.uses_model() {
            v.extend(self.model.violations().into_iter().map(|s| format!("model: {s}")));
        }
        if let Err(e) = self.plan_inner(&mut v) {
            v.push(e);
        }
        v
    }

    pub fn plan(&self) -> Result<Plan> {
        let mut v = Vec::new();
        match self.plan_inner(&mut v) {
            Ok(Some(p)) if v.is_empty() => Ok(p),
            Ok(_) => Err(Error::Config(v)),
            Err(e) => {
                v.push(e);
                Err(Error::Config(v))
            }
        }
    }

    fn plan_inner(&self, v: &mut Vec<String>) -> std::result::Result<Option<Plan>, String> {
        let p = &self.params;
        let need = |name: &str, x: Option<f64>, v: &mut Vec<String>| -> f64 {
            x.unwrap_or_else(|| {
                v.push(format!("params.{name}: required for {}", self.command.name()));
                f64::NAN
            })
        };
        let ladder = |v: &mut Vec<String>| -> Option<TruncationLadder> {
            match TruncationLadder::new(p.ladder.clone()?) {
                Ok(l) => Some(l),
                Err(e) => {
                    v.push(format!("params.ladder: {e}"));
                    None
                }
            }
        };
        let reps = p.reps.unwrap_or(0);
        let before = v.len();
        let plan = match self.command {
            Command::Decompose => {
                let (m, n) = (p.m_exp.unwrap(), p.n_exp.unwrap());
                if m + n > 14 {
                    v.push(format!("params: decomposition grid 2^{m} × 2^{n} is too large (m_exp + n_exp ≤ 14)"));
                }
                if reps == 0 {
                    v.push("params.reps: must be positive".into());
                }
                let l = ladder(v);
                l.map(|ladder| Plan::Decompose { ladder, m_exp: m, n_exp: n, reps })
            }
            Command::Rosenthal | Command::Tailbound => {
                let (pp, al, q, a) = (p.p.unwrap(), p.alpha.unwrap(), p.q.unwrap(), p.a.unwrap());
                v.extend(WeightScheme::violations(pp, al, q, a).into_iter().map(|s| format!("params: {s}")));
                let sizes: Vec<(u32, u32)> = p.sizes.clone().unwrap().into_iter().map(|[m, n]| (m, n)).collect();
                if sizes.is_empty() || sizes.iter().any(|&(m, n)| m + n > 22) {
                    v.push("params.sizes: need at least one [m, n] with m + n ≤ 22".into());
                }
                if reps < 2 {
                    v.push("params.reps: need at least 2".into());
                }
                let scheme = WeightScheme { p: pp, alpha: al, q, a };
                let l = ladder(v);
                if self.command == Command::Rosenthal {
                    let level = p.level.unwrap();
                    if !(level > 0.0 && level < 1.0) {
                        v.push(format!("params.level: must lie in (0, 1) (got {level})"));
                    }
                    l.map(|ladder| Plan::Rosenthal { scheme, ladder, sizes, reps, convention: p.convention.unwrap(), level })
                } else {
                    let epsilon = p.epsilon.unwrap();
                    if !(epsilon > 0.0) {
                        v.push(format!("params.epsilon: must be positive (got {epsilon})"));
                    }
                    l.map(|ladder| Plan::Tailbound { scheme, ladder, sizes, epsilon, reps })
                }
            }
            Command::H2q => {
                let q = p.q.unwrap();
                if !(q >= 1.0) {
                    v.push(format!("params.q: must satisfy q ≥ 1 (got {q})"));
                }
                let inst = match (&p.instance, p.walsh_generators) {
                    (Some(i), _) => Some(i.clone()),
                    (None, Some(g)) => crate::ineq::walsh_instance(g).map_err(|e| v.push(format!("params.walsh_generators: {e}"))).ok(),
                    (None, None) => None,
                };
                if let Some(i) = &inst {
                    v.extend(i.violations().into_iter().map(|s| format!("params.instance: {s}")));
                }
                inst.map(|instance| Plan::H2q { instance, q })
            }
            Command::Series => {
                let pp = need("p", p.p, v);
                let al = need("alpha", p.alpha, v);
                let (eps, mb) = (p.epsilon.unwrap(), p.max_block.unwrap());
                if pp.is_nan() || al.is_nan() {
                    None
                } else {
                    v.extend(series_violations(pp, al, eps, mb).into_iter().map(|s| format!("params: {s}")));
                    if pp >= 2.0 {
                        let q = p.q.unwrap_or(1.0);
                        let need = (al * pp - 1.0) / (2.0 * al - 1.0);
                        if !(q > need) {
                            v.push(format!("params.q: p ≥ 2 requires q>(αp−1)/(2α−1) = {need} (got q = {q})"));
                        }
                    }
                    let family = p.family.clone().unwrap();
                    v.extend(family.violations().into_iter().map(|s| format!("params.family: {s}")));
                    if reps == 0 {
                        v.push("params.reps: must be positive".into());
                    }
                    Some(Plan::Series { p: pp, alpha: al, epsilon: eps, family, max_block: mb, reps })
                }
            }
            Command::Slln | Command::Wlln | Command::Lp => {
                let pp = need("p", p.p, v);
                if !pp.is_nan() && !(1.0..2.0).contains(&pp) {
                    v.push(format!("params.p: requires 1 ≤ p < 2 (got {pp})"));
                }
                match self.command {
                    Command::Slln => {
                        let me = p.max_exp.unwrap();
                        if me > crate::harness::traces::MAX_SLLN_EXP {
                            v.push(format!("params.max_exp: at most {} (got {me})", crate::harness::traces::MAX_SLLN_EXP));
                        }
                        Some(Plan::Slln { p: pp, max_exp: me })
                    }
                    _ => {
                        let g = p.grid_exps.clone().unwrap();
                        if g.is_empty() || g.iter().any(|&e| e > crate::harness::traces::MAX_GRID_EXP) {
                            v.push(format!("params.grid_exps: need at least one exponent, each ≤ {}", crate::harness::traces::MAX_GRID_EXP));
                        }
                        if reps == 0 {
                            v.push("params.reps: must be positive".into());
                        }
                        if self.command == Command::Wlln {
                            let eps = p.epsilon.unwrap();
                            if !(eps > 0.0) {
                                v.push(format!("params.epsilon: must be positive (got {eps})"));
                            }
                            Some(Plan::Wlln { p: pp, grid_exps: g, epsilon: eps, reps })
                        } else {
                            Some(Plan::Lp { p: pp, grid_exps: g, reps })
                        }
                    }
                }
            }
            Command::Varying => {
                let family = p.family.clone().unwrap();
                v.extend(family.violations().into_iter().map(|s| format!("params.family: {s}")));
                if let Err(e) = family.conjugate() {
                    v.push(format!("params.family: {e}"));
                }
                let x_exps = p.x_exps.clone().unwrap();
                if x_exps.is_empty() || x_exps.iter().any(|k| k.abs() > 300) {
                    v.push("params.x_exps: need at least one exponent with |k| ≤ 300".into());
                }
                Some(Plan::Varying { family, x_exps })
            }
            Command::Dominate => {
                let (m, n) = (p.m_exp.unwrap(), p.n_exp.unwrap());
                if m + n > 22 {
                    v.push("params: m_exp + n_exp must be at most 22".into());
                }
                let x_grid = p.x_grid.clone().unwrap();
                if x_grid.is_empty() || x_grid.iter().any(|x| !(x.is_finite() && *x >= 0.0)) {
                    v.push("params.x_grid: need nonnegative finite points".into());
                }
                let k_grid = p.k_grid.clone().unwrap();
                if k_grid.is_empty() || k_grid.iter().any(|x| !(x.is_finite() && *x > 0.0)) {
                    v.push("params.k_grid: need positive finite points".into());
                }
                let pp = p.p.unwrap();
                if !(pp > 0.0) {
                    v.push(format!("params.p: must be positive (got {pp})"));
                }
                let family = p.family.clone().unwrap();
                v.extend(family.violations().into_iter().map(|s| format!("params.family: {s}")));
                if let Some(c) = &p.candidate {
                    v.extend(c.violations().into_iter().map(|s| format!("params.candidate: {s}")));
                }
                Some(Plan::Dominate { m_exp: m, n_exp: n, candidate: p.candidate.clone(), x_grid, p: pp, family, k_grid })
            }
            Command::MomentSeries => {
                let pp = need("p", p.p, v);
                let al = need("alpha", p.alpha, v);
                let (q, mt) = (p.q.unwrap(), p.max_term.unwrap());
                if !pp.is_nan() && !(pp > 0.0 && q > pp) {
                    v.push(format!("params: need 0 < p < q (got p = {pp}, q = {q})"));
                }
                if !al.is_nan() && !(al > 0.0) {
                    v.push(format!("params.alpha: must be positive (got {al})"));
                }
                if !(4..=crate::harness::lemmas::MAX_TERM).contains(&mt) {
                    v.push(format!("params.max_term: must lie in 4..={} (got {mt})", crate::harness::lemmas::MAX_TERM));
                }
                Some(Plan::MomentSeries { p: pp, alpha: al, q, max_term: mt })
            }
        };
        if v.len() > before {
            return Ok(None);
        }
        Ok(plan)
    }
}
