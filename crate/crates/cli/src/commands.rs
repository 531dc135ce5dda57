use std::collections::BTreeMap;
use std::fmt;
use std::fs;
use std::path::Path;

use lclr_core::encode_ab::{
    decode_ab, encode_ab, lift_out_a_to_b, lift_out_b_to_a, to_decoded_ids, to_original_ids, AbScheme, ProblemBContext,
};
use lclr_core::formalisms::{brute_force_solve, verify, verify_lcl, verify_re, LclProblem, OutputLabeling, Problem, SolveOutcome, Verdict};
use lclr_core::gadget_bd::{
    auto_edge_coloring, check_coloring_theorem_with, contract_db, gadget_bd, lift_b_to_d, theta_fixture, twin_chain_fixture,
    DConstants, DContext, GadgetedGraph, H2Reading, TheoremCheck,
};
use lclr_core::graph::{edge_name, parse_edge_name, to_dot, EdgeKey};
use lclr_core::io::{formalism_of, LabelingJson, ProblemJson, LCL_BUILTINS, PN_BUILTINS, RE_BUILTINS};
use lclr_core::local_sim::{
    builtin, run_local, run_slocal, simulate_a1_prime, simulate_a2_prime, RunRecord, SimInstance,
};
use lclr_core::pipeline::{instance_fixture, run_pipeline, PipelineConfig, StageOutcome, INSTANCE_FIXTURES};
use lclr_core::re_compile::{export_half_edges, import_half_edges, EContext, HalfEdgeJson};
use lclr_core::{Error, LabeledGraph, Label, VertexId};
use serde::Serialize;
use serde_json::json;

use crate::{Command, Direction, ExportFormat, Reading, SchemeArgs, SimMode};

/// Environment variable overriding solver and search budgets.
pub const BUDGET_ENV: &str = "LCLR_BUDGET";

#[derive(Debug)]
pub enum Failure {
    Verify(String),
    Input(String),
    Budget(String),
}

impl fmt::Display for Failure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Failure::Verify(m) => write!(f, "verification failed: {m}"),
            Failure::Input(m) => write!(f, "input error: {m}"),
            Failure::Budget(m) => write!(f, "budget exceeded: {m}"),
        }
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        match e {
            Error::BudgetExceeded(m) => Failure::Budget(m),
            other => Failure::Input(other.to_string()),
        }
    }
}

type Res<T> = Result<T, Failure>;

fn read(path: &Path) -> Res<String> {
    fs::read_to_string(path).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn parse<T: serde::de::DeserializeOwned>(path: &Path) -> Res<T> {
    serde_json::from_str(&read(path)?).map_err(|e| Failure::Input(format!("{}: {e}", path.display())))
}

fn emit(path: Option<&Path>, text: &str) -> Res<()> {
    let text = if text.ends_with('\n') { text.to_string() } else { format!("{text}\n") };
    match path {
        Some(p) => fs::write(p, text).map_err(|e| Failure::Input(format!("{}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn emit_json<T: Serialize>(path: Option<&Path>, value: &T) -> Res<()> {
    emit(path, &serde_json::to_string_pretty(value).expect("values serialize"))
}

/// A plain graph, or a gadgeted graph with its classification.
fn read_graph(path: &Path) -> Res<(LabeledGraph, Option<GadgetedGraph>)> {
    let v: serde_json::Value = parse(path)?;
    let bad = |e: serde_json::Error| Failure::Input(format!("{}: {e}", path.display()));
    if v.get("graph").is_some() && v.get("classes").is_some() {
        let gg: GadgetedGraph = serde_json::from_value(v).map_err(bad)?;
        Ok((gg.graph.clone(), Some(gg)))
    } else {
        Ok((serde_json::from_value(v).map_err(bad)?, None))
    }
}

fn read_gadgeted(path: &Path) -> Res<GadgetedGraph> {
    match read_graph(path)? {
        (_, Some(gg)) => Ok(gg),
        _ => Err(Failure::Input(format!("{}: expected a gadgeted graph as written by gadget-bd", path.display()))),
    }
}

fn read_problem(path: &Path) -> Res<Problem> {
    Ok(ProblemJson::from_json(&read(path)?)?.to_problem()?)
}

fn read_lcl(path: &Path) -> Res<LclProblem> {
    match read_problem(path)? {
        Problem::Lcl(p) if p.node_outputs && !p.edge_outputs => Ok(p),
        _ => Err(Failure::Input("expected an LCL problem with node outputs".into())),
    }
}

fn read_nodes(path: &Path) -> Res<BTreeMap<VertexId, Label>> {
    Ok(parse::<LabelingJson>(path)?.nodes()?)
}

fn budget_override(default: u64) -> Res<u64> {
    match std::env::var(BUDGET_ENV) {
        Ok(s) => s.trim().parse().map_err(|_| Failure::Input(format!("{BUDGET_ENV}={s:?} is not a number"))),
        Err(_) => Ok(default),
    }
}

fn scheme(s: SchemeArgs) -> AbScheme {
    AbScheme { max_degree: s.max_degree, max_label: s.max_label }
}

fn require(v: &Verdict, what: &str) -> Res<()> {
    if v.overall {
        Ok(())
    } else {
        Err(Failure::Verify(format!("{what}: {} failing sites, first {:?}", v.failures.len(), v.failures.first())))
    }
}

fn lcl_verdict(p: &LclProblem, g: &LabeledGraph, sigma: &BTreeMap<VertexId, Label>) -> Verdict {
    verify_lcl(p, g, &OutputLabeling::from_nodes(sigma.clone()))
}

/// Precondition failures of lifts mean the input labeling was not legal.
fn lift_failure(e: Error) -> Failure {
    match e {
        Error::Precondition(m) => Failure::Verify(m),
        other => other.into(),
    }
}

fn gadgeted_fixture(spec: &str) -> Res<Option<GadgetedGraph>> {
    let lengths = |s: &str| -> Res<Vec<u32>> {
        s.split(',')
            .map(|x| x.trim().parse().map_err(|_| Failure::Input(format!("bad chain length in {spec:?}"))))
            .collect()
    };
    Ok(match spec.split_once(':') {
        Some(("theta", l)) => Some(theta_fixture(&lengths(l)?)?),
        Some(("twin", l)) => match lengths(l)?.as_slice() {
            [len] => Some(twin_chain_fixture(*len)?),
            _ => return Err(Failure::Input("twin takes one chain length".into())),
        },
        _ => None,
    })
}

fn record_json(alg: &str, mode: &str, rec: &RunRecord) -> serde_json::Value {
    json!({
        "algorithm": alg,
        "mode": mode,
        "outputs": rec.outputs,
        "radius": rec.radius,
        "max_radius": rec.max_radius(),
    })
}

pub fn run(cmd: Command) -> Res<()> {
    match cmd {
        Command::EncodeAb { instance, scheme: s, output, map } => {
            let (g, _) = read_graph(&instance)?;
            let enc = encode_ab(&g, &scheme(s))?;
            if let Some(m) = map {
                emit_json(Some(&m), &enc.map.to_json_value())?;
            }
            emit(output.as_deref(), &enc.graph.to_json())
        }
        Command::DecodeAb { instance, scheme: s, output, map } => {
            let (g, _) = read_graph(&instance)?;
            let (m, dm) = decode_ab(&g, &scheme(s));
            let (simple, collapsed) = m.to_simple();
            if !dm.is_clean() || collapsed > 0 {
                eprintln!(
                    "{} malformed vertices, {} malformed edges, {collapsed} parallel edges or loops collapsed",
                    dm.malformed_vertices.len(),
                    dm.malformed_edge_count()
                );
            }
            if let Some(p) = map {
                emit_json(Some(&p), &dm.to_json_value())?;
            }
            emit(output.as_deref(), &simple.to_json())
        }
        Command::LiftAb { problem, instance, labeling, direction, scheme: s, output } => {
            let a = read_lcl(&problem)?;
            let (g, _) = read_graph(&instance)?;
            let enc = encode_ab(&g, &scheme(s))?;
            let sigma = read_nodes(&labeling)?;
            let lifted = match direction {
                Direction::Forward => {
                    let b = ProblemBContext::new(a, scheme(s))?.problem();
                    let out = lift_out_a_to_b(&to_decoded_ids(&sigma, &enc), &enc.map);
                    emit_json(output.as_deref(), &LabelingJson::from_nodes(&out))?;
                    lcl_verdict(&b, &enc.graph, &out)
                }
                Direction::Back => {
                    let out = to_original_ids(&lift_out_b_to_a(&sigma, &enc.map), &enc);
                    emit_json(output.as_deref(), &LabelingJson::from_nodes(&out))?;
                    lcl_verdict(&a, &g, &out)
                }
            };
            require(&lifted, "lifted labeling")
        }
        Command::GadgetBd { instance, coloring, radius, output } => {
            let (g, _) = read_graph(&instance)?;
            let x: BTreeMap<EdgeKey, u32> = if coloring == "auto" {
                auto_edge_coloring(&g, radius)?
            } else {
                let named: BTreeMap<String, u32> = parse(Path::new(&coloring))?;
                named.iter().map(|(k, &c)| Ok((parse_edge_name(k)?, c))).collect::<Result<_, Error>>()?
            };
            let gg = gadget_bd(&g, &x, radius)?;
            emit_json(output.as_deref(), &gg)
        }
        Command::ContractDb { instance, output, coloring_out } => {
            let (g, _) = read_graph(&instance)?;
            let c = contract_db(&g);
            if c.reversed > 0 {
                eprintln!("{} chains left expanded", c.reversed);
            }
            if let Some(p) = coloring_out {
                let named: BTreeMap<String, u32> = c.coloring.iter().map(|(&(u, v), &l)| (edge_name(u, v), l)).collect();
                emit_json(Some(&p), &named)?;
            }
            emit(output.as_deref(), &c.graph.to_json())
        }
        Command::CheckTheorem { instance, fixture, radius, max_vertices, budget, reading, output } => {
            let gg = match (instance, fixture) {
                (Some(p), _) => read_gadgeted(&p)?,
                (None, Some(f)) => gadgeted_fixture(&f)?.ok_or_else(|| Failure::Input(format!("unknown fixture {f:?}")))?,
                (None, None) => return Err(Failure::Input("give --instance or --fixture".into())),
            };
            let n = gg.graph.vertex_count();
            if n > max_vertices {
                return Err(Failure::Budget(format!("{n} vertices, cap is {max_vertices}")));
            }
            let reading = match reading {
                Reading::Shared => H2Reading::SharedGball,
                Reading::Literal => H2Reading::Literal,
            };
            let res = check_coloring_theorem_with(&gg, radius, budget_override(budget)?, reading)?;
            emit_json(output.as_deref(), &res)?;
            match res {
                TheoremCheck::ExhaustedOk { .. } => Ok(()),
                TheoremCheck::Counterexample { original, .. } => Err(Failure::Verify(format!("counterexample at original {original}"))),
                TheoremCheck::BudgetExceeded { nodes } => Err(Failure::Budget(format!("{nodes} search nodes"))),
            }
        }
        Command::LiftBd { problem, instance, labeling, chi, output } => {
            let b = read_lcl(&problem)?;
            let gg = read_gadgeted(&instance)?;
            let d = DContext::new(b)?;
            let chi: BTreeMap<VertexId, u64> = match chi {
                Some(p) => parse::<BTreeMap<String, u64>>(&p)?
                    .into_iter()
                    .map(|(k, c)| Ok((lclr_core::graph::parse_vertex_name(&k)?, c)))
                    .collect::<Result<_, Error>>()?,
                None => gg.graph.vertices().map(|v| (v, v as u64 + 1)).collect(),
            };
            let sigma_d = lift_b_to_d(&read_nodes(&labeling)?, &chi, &gg, d.r_d()?)?;
            emit_json(output.as_deref(), &LabelingJson::from_nodes(&sigma_d))?;
            let e = EContext::new(d.clone());
            let v = lclr_core::formalisms::verify_pn_in(&mut e.arena.lock().unwrap(), &d.problem()?, &gg.graph, &sigma_d);
            require(&v, "lifted labeling")
        }
        Command::CompileRe { problem, output } => {
            let b = read_lcl(&problem)?;
            let k = DConstants::new(b.radius)?;
            let r_d = k.r_d_u32()?;
            let e = EContext::new(DContext::new(b.clone())?).problem();
            emit_json(
                output.as_deref(),
                &json!({
                    "problem": e.name,
                    "source": b.name,
                    "r_b": b.radius,
                    "k": k.k.to_string(),
                    "r_d": r_d,
                    "zeta": k.zeta_string(),
                    "labels": "view:port",
                }),
            )
        }
        Command::LiftDe { problem, instance, labeling, output } => {
            let e = EContext::new(DContext::new(read_lcl(&problem)?)?);
            let (g, _) = read_graph(&instance)?;
            let hel = e.lift_d_to_e(&g, &read_nodes(&labeling)?).map_err(lift_failure)?;
            emit_json(output.as_deref(), &export_half_edges(&e.arena.lock().unwrap(), &hel))?;
            require(&verify_re(&e.problem(), &g, &hel)?, "lifted labeling")
        }
        Command::LiftEd { problem, instance, labeling, output } => {
            let e = EContext::new(DContext::new(read_lcl(&problem)?)?);
            let (g, _) = read_graph(&instance)?;
            let j: HalfEdgeJson = parse(&labeling)?;
            let hel = import_half_edges(&mut e.arena.lock().unwrap(), &j)?;
            let d = e.lift_e_to_d(&g, &hel).map_err(lift_failure)?;
            emit_json(output.as_deref(), &LabelingJson::from_nodes(&d))
        }
        Command::Verify { problem, instance, output, report } => {
            let p = read_problem(&problem)?;
            let (g, _) = read_graph(&instance)?;
            let s = parse::<LabelingJson>(&output)?.solution(formalism_of(&p))?;
            let v = verify(&p, &g, &s)?;
            emit_json(report.as_deref(), &v)?;
            require(&v, p.name())
        }
        Command::Solve { problem, instance, budget, output } => {
            let p = read_problem(&problem)?;
            let (g, _) = read_graph(&instance)?;
            let b = budget_override(budget.unwrap_or(lclr_core::formalisms::DEFAULT_SOLVE_BUDGET))?;
            match brute_force_solve(&p, &g, b)? {
                SolveOutcome::Found(s) => emit_json(output.as_deref(), &LabelingJson::from_solution(&s)),
                SolveOutcome::Unsolvable => Err(Failure::Verify(format!("{} has no solution on this instance", p.name()))),
                SolveOutcome::BudgetExceeded => Err(Failure::Budget(format!("{b} search nodes"))),
            }
        }
        Command::Simulate { mode, alg, instance, rounds, seed, order, scheme: s, output } => {
            let name = alg.strip_prefix("builtin:").unwrap_or(&alg);
            let a = builtin(name)?;
            let (g, _) = read_graph(&instance)?;
            let inst = SimInstance::new(g, rounds.unwrap_or(a.locality), seed)?;
            let (rec, mode) = match mode {
                SimMode::Local => (run_local(&a, &inst)?, "local"),
                SimMode::Slocal => {
                    let order: Vec<VertexId> = match order {
                        Some(p) => parse(&p)?,
                        None => {
                            let mut o: Vec<VertexId> = inst.graph.vertices().collect();
                            o.sort_by_key(|v| inst.ids[v]);
                            o
                        }
                    };
                    (run_slocal(&a, &inst, &order)?, "slocal")
                }
                SimMode::A1 => (simulate_a1_prime(&a, &inst, &scheme(s))?, "a1"),
                SimMode::A2 => (simulate_a2_prime(&a, &inst, &scheme(s))?, "a2"),
            };
            emit_json(output.as_deref(), &record_json(&a.name, mode, &rec))
        }
        Command::Pipeline { config, problem, instance, fixture, stages, seed, no_timings, write_config, output } => {
            let mut cfg = match config {
                Some(p) => PipelineConfig::from_json(&read(&p)?)?,
                None => PipelineConfig::new(
                    lclr_core::io::ProblemJson::builtin(lclr_core::io::Formalism::Lcl, "coloring", &[("colors", 4)]),
                    "A-B",
                )?,
            };
            if let Some(p) = problem {
                cfg.problem = ProblemJson::from_json(&read(&p)?)?;
            }
            if let Some(s) = stages {
                cfg.stages = s;
            }
            if let Some(s) = seed {
                cfg.seed = s;
            }
            if let Some(f) = fixture {
                cfg.instance = Some(f);
            }
            cfg.budgets.solve = budget_override(cfg.budgets.solve)?;
            cfg.constants = Some(cfg.derived()?);
            let g = match instance {
                Some(p) => read_graph(&p)?.0,
                None => instance_fixture(cfg.instance.as_deref().unwrap_or("k4"), cfg.seed)?,
            };
            if let Some(p) = write_config {
                emit(Some(&p), &cfg.to_json())?;
            }
            let report = run_pipeline(&cfg, &g)?;
            if no_timings {
                emit(output.as_deref(), &report.stable_json())?;
            } else {
                emit_json(output.as_deref(), &report)?;
            }
            match report.overall {
                StageOutcome::Pass | StageOutcome::Skipped => Ok(()),
                StageOutcome::Fail => Err(Failure::Verify(stage_summary(&report.stages))),
                StageOutcome::BudgetExceeded => Err(Failure::Budget(stage_summary(&report.stages))),
            }
        }
        Command::Export { instance, format, output } => {
            let (g, gg) = read_graph(&instance)?;
            match (format, gg) {
                (ExportFormat::Json, Some(gg)) => emit_json(output.as_deref(), &gg),
                (ExportFormat::Json, None) => emit(output.as_deref(), &g.to_json()),
                (ExportFormat::Dot, gg) => emit(output.as_deref(), &to_dot(&g, gg.as_ref().map(|x| &x.classes))),
            }
        }
        Command::Fixture { name, list, seed, output } => {
            if list || name.is_none() {
                let text = format!(
                    "graphs: {}, theta:L1,L2,..., twin:L\nlcl problems: {}\npn problems: {}\nre problems: {}\n",
                    INSTANCE_FIXTURES.join(", "),
                    LCL_BUILTINS.join(", "),
                    PN_BUILTINS.join(", "),
                    RE_BUILTINS.join(", ")
                );
                return emit(output.as_deref(), &text);
            }
            let name = name.expect("checked above");
            match gadgeted_fixture(&name)? {
                Some(gg) => emit_json(output.as_deref(), &gg),
                None => {
                    let mut g = instance_fixture(&name, seed)?;
                    for v in g.vertices().collect::<Vec<_>>() {
                        g.set_node_label(v, 0)?;
                    }
                    emit(output.as_deref(), &g.to_json())
                }
            }
        }
    }
}

fn stage_summary(stages: &[lclr_core::pipeline::StageReport]) -> String {
    stages
        .iter()
        .find(|s| !matches!(s.outcome, StageOutcome::Pass | StageOutcome::Skipped))
        .map(|s| format!("stage {}: {}", s.stage, s.detail))
        .unwrap_or_default()
}
