//! End-to-end runs of the reduction chain with a verifier at every boundary.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::encode_ab::{
    encode_ab, lambda, lift_out_a_to_b, lift_out_b_to_a, to_decoded_ids, to_original_ids, AbScheme, ProblemBContext,
};
use crate::error::{Error, Result};
use crate::formalisms::{
    brute_force_solve, verify_lcl, verify_pn_in, verify_re, LclProblem, OutputLabeling, Problem, Solution, SolveOutcome,
    Verdict, DEFAULT_SOLVE_BUDGET,
};
use crate::gadget_bd::{auto_edge_coloring, gadget_bd, lift_b_to_d, lift_d_to_b, DConstants, DContext};
use crate::graph::{gen, LabeledGraph, Label, VertexId};
use crate::io::ProblemJson;
use crate::re_compile::EContext;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Stage {
    A,
    B,
    D,
    E,
}

impl FromStr for Stage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Stage> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(Stage::A),
            "B" => Ok(Stage::B),
            "D" => Ok(Stage::D),
            "E" => Ok(Stage::E),
            _ => Err(Error::Parse(format!("unknown stage {s:?}"))),
        }
    }
}

impl fmt::Display for Stage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self:?}")
    }
}

/// Parses `"A-E"` style stage ranges; a single stage runs alone. Runs start at A or B.
pub fn parse_stage_range(s: &str) -> Result<(Stage, Stage)> {
    let (a, b) = s.split_once('-').unwrap_or((s, s));
    let (from, to): (Stage, Stage) = (a.parse()?, b.parse()?);
    if !matches!(from, Stage::A | Stage::B) || to < from {
        return Err(Error::InvalidArgument(format!("unsupported stage range {s:?}")));
    }
    Ok((from, to))
}

/// Radii and palette bounds implied by a problem and a starting stage.
/// Large values are kept as decimal strings.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Constants {
    pub r_a: Option<u32>,
    pub lambda: Option<u32>,
    pub r_b: u32,
    pub k: Option<String>,
    pub r_d: Option<String>,
    pub zeta: Option<String>,
}

impl Constants {
    pub fn derive(problem_radius: u32, from: Stage, scheme: &AbScheme) -> Constants {
        let (r_a, lam, r_b) = match from {
            Stage::A => {
                let l = lambda(scheme);
                (Some(problem_radius), Some(l), l.saturating_mul(problem_radius))
            }
            _ => (None, None, problem_radius),
        };
        let d = DConstants::new(r_b).ok();
        Constants {
            r_a,
            lambda: lam,
            r_b,
            k: d.as_ref().map(|d| d.k.to_string()),
            r_d: d.as_ref().map(|d| d.r_d.to_string()),
            zeta: d.as_ref().map(|d| d.zeta_string()),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Budgets {
    /// Search nodes for the brute-force solver.
    pub solve: u64,
    /// Vertex cap for gadgeted graphs in the D and E stages.
    pub max_vertices: usize,
}

impl Default for Budgets {
    fn default() -> Self {
        Budgets { solve: DEFAULT_SOLVE_BUDGET, max_vertices: 2000 }
    }
}

fn default_scheme() -> AbScheme {
    AbScheme { max_degree: 3, max_label: 2 }
}

fn default_stages() -> String {
    "A-B".into()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PipelineConfig {
    pub problem: ProblemJson,
    /// Instance fixture used when no instance file is supplied.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub instance: Option<String>,
    #[serde(default = "default_stages")]
    pub stages: String,
    #[serde(default = "default_scheme")]
    pub scheme: AbScheme,
    #[serde(default)]
    pub budgets: Budgets,
    /// Seed for generated instances.
    #[serde(default)]
    pub seed: u64,
    /// Derived; recomputed on load and compared when present.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub constants: Option<Constants>,
}

impl PipelineConfig {
    pub fn new(problem: ProblemJson, stages: &str) -> Result<PipelineConfig> {
        let mut c = PipelineConfig {
            problem,
            instance: None,
            stages: stages.into(),
            scheme: default_scheme(),
            budgets: Budgets::default(),
            seed: 0,
            constants: None,
        };
        c.constants = Some(c.derived()?);
        Ok(c)
    }

    pub fn stage_range(&self) -> Result<(Stage, Stage)> {
        parse_stage_range(&self.stages)
    }

    pub fn lcl_problem(&self) -> Result<LclProblem> {
        match self.problem.to_problem()? {
            Problem::Lcl(p) if p.node_outputs && !p.edge_outputs => Ok(p),
            _ => Err(Error::InvalidArgument("the pipeline needs an LCL with node outputs".into())),
        }
    }

    pub fn derived(&self) -> Result<Constants> {
        Ok(Constants::derive(self.lcl_problem()?.radius, self.stage_range()?.0, &self.scheme))
    }

    /// Parses a config and rejects stale derived constants.
    pub fn from_json(text: &str) -> Result<PipelineConfig> {
        let mut c: PipelineConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
        let fresh = c.derived()?;
        if let Some(old) = &c.constants {
            if *old != fresh {
                return Err(Error::InvalidArgument(format!(
                    "stale derived constants: file has {}, recomputed {}",
                    serde_json::to_string(old).unwrap_or_default(),
                    serde_json::to_string(&fresh).unwrap_or_default()
                )));
            }
        }
        c.constants = Some(fresh);
        Ok(c)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

pub const INSTANCE_FIXTURES: [&str; 8] = ["k4", "prism", "k33", "cube", "petersen", "path3", "cycle5", "random"];

/// Named instances; `random` draws a labeled graph from the seed.
pub fn instance_fixture(id: &str, seed: u64) -> Result<LabeledGraph> {
    Ok(match id {
        "k4" => gen::complete(4),
        "prism" => gen::prism(),
        "k33" => gen::complete_bipartite(3, 3),
        "cube" => gen::cube(),
        "petersen" => gen::petersen(),
        "path3" => gen::path(3),
        "cycle5" => gen::cycle(5),
        "random" => gen::random_labeled(&mut ChaCha8Rng::seed_from_u64(seed), 6, 3, 2),
        _ => {
            return Err(Error::InvalidArgument(format!(
                "unknown instance fixture {id:?}; known: {}",
                INSTANCE_FIXTURES.join(", ")
            )))
        }
    })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StageOutcome {
    Pass,
    BudgetExceeded,
    Fail,
    Skipped,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct StageReport {
    pub stage: String,
    pub outcome: StageOutcome,
    pub detail: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub counterexample: Option<serde_json::Value>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RunReport {
    pub problem: String,
    pub stages_requested: String,
    pub constants: Constants,
    /// Checkability radius of each problem that was built.
    pub locality: BTreeMap<String, u32>,
    pub stages: Vec<StageReport>,
    pub overall: StageOutcome,
    /// Wall-clock milliseconds per stage; excluded from reproducibility comparisons.
    pub timings_ms: BTreeMap<String, u64>,
}

impl RunReport {
    /// The report without timings, for byte-level comparison.
    pub fn stable_json(&self) -> String {
        let mut r = self.clone();
        r.timings_ms.clear();
        serde_json::to_string_pretty(&r).expect("report serializes")
    }
}

const MAX_LISTED_FAILURES: usize = 10;

fn failures(v: &Verdict) -> serde_json::Value {
    serde_json::json!(v.failures.iter().take(MAX_LISTED_FAILURES).collect::<Vec<_>>())
}

struct StageResult {
    outcome: StageOutcome,
    detail: String,
    counterexample: Option<serde_json::Value>,
}

fn pass(detail: String) -> StageResult {
    StageResult { outcome: StageOutcome::Pass, detail, counterexample: None }
}

fn fail(detail: String, v: Option<&Verdict>) -> StageResult {
    StageResult { outcome: StageOutcome::Fail, detail, counterexample: v.map(failures) }
}

fn budget(detail: String) -> StageResult {
    StageResult { outcome: StageOutcome::BudgetExceeded, detail, counterexample: None }
}

/// The instance, the problem it is solved for and the current solution.
struct Level {
    graph: LabeledGraph,
    problem: LclProblem,
    sigma: BTreeMap<VertexId, Label>,
}

struct DLevel {
    graph: LabeledGraph,
    e: EContext,
    sigma: BTreeMap<VertexId, Label>,
}

#[derive(Default)]
struct State {
    a: Option<Level>,
    b: Option<Level>,
    d: Option<DLevel>,
}

fn legal(p: &LclProblem, g: &LabeledGraph, sigma: &BTreeMap<VertexId, Label>) -> Verdict {
    verify_lcl(p, g, &OutputLabeling::from_nodes(sigma.clone()))
}

fn solve(p: &LclProblem, g: &LabeledGraph, budget_nodes: u64) -> Result<std::result::Result<BTreeMap<VertexId, Label>, StageResult>> {
    Ok(match brute_force_solve(&Problem::Lcl(p.clone()), g, budget_nodes)? {
        SolveOutcome::Found(Solution::Lcl(o)) => {
            let v = verify_lcl(p, g, &o);
            if !v.overall {
                return Ok(Err(fail(format!("solver output for {} rejected", p.name), Some(&v))));
            }
            Ok(o.nodes)
        }
        SolveOutcome::Found(_) => unreachable!("LCL solver returns LCL solutions"),
        SolveOutcome::Unsolvable => Err(fail(format!("{} has no solution on this instance", p.name), None)),
        SolveOutcome::BudgetExceeded => Err(budget(format!("solver budget of {budget_nodes} nodes exhausted"))),
    })
}

fn stage_solve(st: &mut State, which: Stage, p: &LclProblem, g: &LabeledGraph, cfg: &PipelineConfig) -> Result<StageResult> {
    Ok(match solve(p, g, cfg.budgets.solve)? {
        Ok(sigma) => {
            let detail = format!("{} solved and verified on {} vertices", p.name, g.vertex_count());
            let level = Level { graph: g.clone(), problem: p.clone(), sigma };
            match which {
                Stage::A => st.a = Some(level),
                _ => st.b = Some(level),
            }
            pass(detail)
        }
        Err(r) => r,
    })
}

fn stage_ab(st: &mut State, cfg: &PipelineConfig) -> Result<StageResult> {
    let a = st.a.as_ref().expect("A stage ran");
    let enc = encode_ab(&a.graph, &cfg.scheme)?;
    let b = ProblemBContext::new(a.problem.clone(), cfg.scheme)?.problem();
    let sigma_b = lift_out_a_to_b(&to_decoded_ids(&a.sigma, &enc), &enc.map);
    let v = legal(&b, &enc.graph, &sigma_b);
    if !v.overall {
        return Ok(fail("forward lift rejected by the encoded problem".into(), Some(&v)));
    }
    let back = to_original_ids(&lift_out_b_to_a(&sigma_b, &enc.map), &enc);
    let v = legal(&a.problem, &a.graph, &back);
    if !v.overall {
        return Ok(fail("backward lift rejected by the source problem".into(), Some(&v)));
    }
    let detail = format!(
        "encoded into {} vertices, radius {} -> {}; both lifts verified",
        enc.graph.vertex_count(),
        a.problem.radius,
        b.radius
    );
    st.b = Some(Level { graph: enc.graph, problem: b, sigma: sigma_b });
    Ok(pass(detail))
}

fn stage_bd(st: &mut State, cfg: &PipelineConfig) -> Result<StageResult> {
    let b = st.b.as_ref().expect("B stage ran");
    let d = DContext::new(b.problem.clone())?;
    let r_d = match d.r_d() {
        Ok(r) => r,
        Err(Error::BudgetExceeded(m)) => return Ok(budget(m)),
        Err(e) => return Err(e),
    };
    b.graph.check_cubic()?;
    let x = auto_edge_coloring(&b.graph, b.problem.radius)?;
    let size = b.graph.vertex_count() + 6 * x.values().map(|&c| c as usize).sum::<usize>();
    if size > cfg.budgets.max_vertices {
        return Ok(budget(format!("gadgeted graph would have {size} vertices, cap is {}", cfg.budgets.max_vertices)));
    }
    let gg = gadget_bd(&b.graph, &x, b.problem.radius)?;
    let chi: BTreeMap<VertexId, u64> = gg.graph.vertices().map(|v| (v, v as u64 + 1)).collect();
    let sigma_d = lift_b_to_d(&b.sigma, &chi, &gg, r_d)?;
    let e = EContext::new(d.clone());
    let pd = d.problem()?;
    let v = verify_pn_in(&mut e.arena.lock().unwrap(), &pd, &gg.graph, &sigma_d);
    if !v.overall {
        return Ok(fail("forward lift rejected by the gadgeted problem".into(), Some(&v)));
    }
    let v = legal(&b.problem, &b.graph, &lift_d_to_b(&sigma_d, &gg));
    if !v.overall {
        return Ok(fail("backward lift rejected by B".into(), Some(&v)));
    }
    let detail = format!("gadgeted into {} vertices, view radius {r_d}; both lifts verified", gg.graph.vertex_count());
    st.d = Some(DLevel { graph: gg.graph, e, sigma: sigma_d });
    Ok(pass(detail))
}

fn stage_de(st: &mut State) -> Result<StageResult> {
    let d = st.d.as_ref().expect("D stage ran");
    let hel = d.e.lift_d_to_e(&d.graph, &d.sigma)?;
    let v = verify_re(&d.e.problem(), &d.graph, &hel)?;
    if !v.overall {
        return Ok(fail("forward lift rejected by the node-edge problem".into(), Some(&v)));
    }
    if let Some((x, k)) = d.e.t_good(&d.graph, &hel)? {
        return Ok(StageResult {
            outcome: StageOutcome::Fail,
            detail: format!("carried view of {x} differs from the real one at depth {k}"),
            counterexample: Some(serde_json::json!({"vertex": x, "depth": k})),
        });
    }
    let back = d.e.lift_e_to_d(&d.graph, &hel)?;
    if back != d.sigma {
        return Ok(fail("backward lift changed the D labeling".into(), None));
    }
    Ok(pass(format!("{} half-edges labeled and verified; carried views match at every depth", hel.len())))
}

/// Fills missing input labels with 0 when the problem ignores inputs.
pub fn prepare_instance(p: &LclProblem, g: &LabeledGraph) -> LabeledGraph {
    let mut g = g.clone();
    if p.input_alphabet.is_none() {
        for v in g.vertices().collect::<Vec<_>>() {
            if g.node_label(v).is_none() {
                g.set_node_label(v, 0).expect("vertex exists");
            }
        }
    }
    g
}

/// Runs the requested stages on `g`. Errors are input errors; verification
/// failures and budget overruns are reported in the returned report.
pub fn run_pipeline(cfg: &PipelineConfig, g: &LabeledGraph) -> Result<RunReport> {
    let (from, to) = cfg.stage_range()?;
    let p = cfg.lcl_problem()?;
    let constants = cfg.derived()?;
    let g = prepare_instance(&p, g);
    if g.max_degree() > cfg.scheme.max_degree {
        return Err(Error::InvalidArgument(format!("instance degree {} exceeds {}", g.max_degree(), cfg.scheme.max_degree)));
    }
    if from == Stage::B {
        g.check_cubic()?;
    }
    let mut plan: Vec<&str> = vec![];
    if from == Stage::A {
        plan.push("A");
        if to >= Stage::B {
            plan.push("A-B");
        }
    } else {
        plan.push("B");
    }
    if to >= Stage::D {
        plan.push("B-D");
    }
    if to >= Stage::E {
        plan.push("D-E");
    }

    let mut locality = BTreeMap::new();
    match from {
        Stage::A => {
            locality.insert("A".to_string(), p.radius);
            if to >= Stage::B {
                locality.insert("B".to_string(), constants.r_b);
            }
        }
        _ => {
            locality.insert("B".to_string(), p.radius);
        }
    }
    if to >= Stage::D {
        if let Some(r) = constants.r_d.as_ref().and_then(|r| r.parse::<u32>().ok()) {
            locality.insert("D".to_string(), r);
        }
    }

    let mut st = State::default();
    let mut stages = vec![];
    let mut timings = BTreeMap::new();
    let mut blocked = false;
    for name in plan {
        if blocked {
            stages.push(StageReport { stage: name.into(), outcome: StageOutcome::Skipped, detail: "earlier stage did not pass".into(), counterexample: None });
            continue;
        }
        let start = Instant::now();
        let r = match name {
            "A" => stage_solve(&mut st, Stage::A, &p, &g, cfg)?,
            "B" => stage_solve(&mut st, Stage::B, &p, &g, cfg)?,
            "A-B" => stage_ab(&mut st, cfg)?,
            "B-D" => stage_bd(&mut st, cfg)?,
            _ => stage_de(&mut st)?,
        };
        timings.insert(name.to_string(), start.elapsed().as_millis() as u64);
        blocked = r.outcome != StageOutcome::Pass;
        stages.push(StageReport { stage: name.into(), outcome: r.outcome, detail: r.detail, counterexample: r.counterexample });
    }
    let overall = stages.iter().map(|s| s.outcome).filter(|&o| o != StageOutcome::Skipped).max().unwrap_or(StageOutcome::Pass);
    Ok(RunReport {
        problem: p.name.clone(),
        stages_requested: cfg.stages.clone(),
        constants,
        locality,
        stages,
        overall,
        timings_ms: timings,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::Formalism;

    fn coloring_config(stages: &str) -> PipelineConfig {
        PipelineConfig::new(ProblemJson::builtin(Formalism::Lcl, "coloring", &[("colors", 4)]), stages).unwrap()
    }

    #[test]
    fn stage_ranges() {
        assert_eq!(parse_stage_range("A-E").unwrap(), (Stage::A, Stage::E));
        assert_eq!(parse_stage_range("b-d").unwrap(), (Stage::B, Stage::D));
        assert!(parse_stage_range("D-E").is_err());
        assert!(parse_stage_range("B-A").is_err());
        assert!(parse_stage_range("AE").is_err());
        assert_eq!(parse_stage_range("B").unwrap(), (Stage::B, Stage::B));
    }

    #[test]
    fn constants_are_recomputed_on_load() {
        let c = coloring_config("A-E");
        let k = c.constants.clone().unwrap();
        assert_eq!((k.lambda, k.r_b), (Some(39), 39));
        assert_eq!(PipelineConfig::from_json(&c.to_json()).unwrap(), c);
        let mut stale = c.clone();
        stale.constants.as_mut().unwrap().r_b = 40;
        assert!(matches!(PipelineConfig::from_json(&stale.to_json()), Err(Error::InvalidArgument(_))));
        let b = coloring_config("B-E").constants.unwrap();
        assert_eq!((b.r_b, b.k.as_deref(), b.r_d.as_deref()), (1, Some("7"), Some("30")));
    }

    #[test]
    fn a_to_b_on_the_prism() {
        let r = run_pipeline(&coloring_config("A-B"), &gen::prism()).unwrap();
        assert_eq!(r.overall, StageOutcome::Pass, "{r:?}");
        assert_eq!(r.stages.len(), 2);
        assert_eq!(r.locality["B"], 39);
    }

    #[test]
    fn a_to_e_stops_at_the_view_radius() {
        let r = run_pipeline(&coloring_config("A-E"), &gen::complete(4)).unwrap();
        assert_eq!(r.overall, StageOutcome::BudgetExceeded);
        assert_eq!(r.stages[2].outcome, StageOutcome::BudgetExceeded);
        assert_eq!(r.stages[3].outcome, StageOutcome::Skipped);
    }

    #[test]
    fn b_to_e_on_k4() {
        let r = run_pipeline(&coloring_config("B-E"), &gen::complete(4)).unwrap();
        assert_eq!(r.overall, StageOutcome::Pass, "{r:?}");
        assert_eq!(r.locality["D"], 30);
        assert!(run_pipeline(&coloring_config("B-E"), &gen::path(3)).is_err());
    }

    #[test]
    fn unsolvable_instances_fail() {
        let cfg = PipelineConfig::new(ProblemJson::builtin(Formalism::Lcl, "coloring", &[("colors", 3)]), "A-B").unwrap();
        let r = run_pipeline(&cfg, &gen::complete(4)).unwrap();
        assert_eq!(r.overall, StageOutcome::Fail);
        assert_eq!(r.stages[1].outcome, StageOutcome::Skipped);
    }
}
