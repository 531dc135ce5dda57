//! JSON schemas for problems and labelings.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fixtures;
use crate::formalisms::{
    Alphabet, HalfEdgeLabeling, LclConstraint, LclProblem, MultisetConstraint, OutputLabeling, PnConstraint, PnProblem,
    Problem, ReProblem, Solution,
};
use crate::graph::{edge_name, parse_edge_name, parse_vertex_name, CenteredGraph, Label, VertexId};
use crate::re_compile::{half_edge_key, parse_half_edge_key};
use crate::view::{ViewArena, ViewDag};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Formalism {
    Lcl,
    Pn,
    Re,
}

/// Node, edge and half-edge outputs keyed by `"v"`, `"u-v"` and `"v-u@v"`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LabelingJson {
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub nodes: BTreeMap<String, Label>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edges: BTreeMap<String, Label>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub half_edges: BTreeMap<String, Label>,
}

impl LabelingJson {
    pub fn from_nodes(nodes: &BTreeMap<VertexId, Label>) -> Self {
        LabelingJson { nodes: nodes.iter().map(|(v, &l)| (v.to_string(), l)).collect(), ..Default::default() }
    }

    pub fn from_output(o: &OutputLabeling) -> Self {
        LabelingJson {
            edges: o.edges.iter().map(|(&(u, v), &l)| (edge_name(u, v), l)).collect(),
            ..LabelingJson::from_nodes(&o.nodes)
        }
    }

    pub fn from_half_edges(h: &HalfEdgeLabeling) -> Self {
        LabelingJson {
            half_edges: h.iter().map(|(&(v, u), &l)| (half_edge_key(v, u), l)).collect(),
            ..Default::default()
        }
    }

    pub fn from_solution(s: &Solution) -> Self {
        match s {
            Solution::Lcl(o) => LabelingJson::from_output(o),
            Solution::Pn(n) => LabelingJson::from_nodes(n),
            Solution::Re(h) => LabelingJson::from_half_edges(h),
        }
    }

    pub fn nodes(&self) -> Result<BTreeMap<VertexId, Label>> {
        self.nodes.iter().map(|(k, &l)| Ok((parse_vertex_name(k)?, l))).collect()
    }

    pub fn output(&self) -> Result<OutputLabeling> {
        let edges = self.edges.iter().map(|(k, &l)| Ok((parse_edge_name(k)?, l))).collect::<Result<_>>()?;
        Ok(OutputLabeling { nodes: self.nodes()?, edges })
    }

    pub fn half_edges(&self) -> Result<HalfEdgeLabeling> {
        self.half_edges.iter().map(|(k, &l)| Ok((parse_half_edge_key(k)?, l))).collect()
    }

    pub fn solution(&self, f: Formalism) -> Result<Solution> {
        Ok(match f {
            Formalism::Lcl => Solution::Lcl(self.output()?),
            Formalism::Pn => Solution::Pn(self.nodes()?),
            Formalism::Re => Solution::Re(self.half_edges()?),
        })
    }
}

/// One accepted labeled ball of an explicit LCL.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AcceptedBall {
    pub ball: CenteredGraph,
    pub outputs: LabelingJson,
}

/// A problem given either by a built-in name with parameters or by explicit
/// constraint lists. Which explicit fields apply depends on `formalism`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProblemJson {
    pub formalism: Formalism,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub builtin: Option<String>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub params: BTreeMap<String, u64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub radius: Option<u32>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub max_degree: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub input_alphabet: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output_alphabet: Option<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub edge_outputs: Option<bool>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accepted_balls: Vec<AcceptedBall>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub views: Option<ViewDag>,
    /// Indices into `views` of the accepted PN views.
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub accepted_views: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub node_constraint: Vec<Vec<Label>>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub edge_constraint: Vec<Vec<Label>>,
}

pub const LCL_BUILTINS: [&str; 3] = ["coloring", "list-coloring", "maximal-matching"];
pub const PN_BUILTINS: [&str; 1] = ["coloring"];
pub const RE_BUILTINS: [&str; 3] = ["coloring", "maximal-matching", "sinkless-orientation"];

impl ProblemJson {
    pub fn builtin(formalism: Formalism, name: &str, params: &[(&str, u64)]) -> ProblemJson {
        ProblemJson {
            formalism,
            builtin: Some(name.into()),
            params: params.iter().map(|&(k, v)| (k.to_string(), v)).collect(),
            name: None,
            radius: None,
            max_degree: None,
            input_alphabet: None,
            output_alphabet: None,
            edge_outputs: None,
            accepted_balls: vec![],
            views: None,
            accepted_views: vec![],
            node_constraint: vec![],
            edge_constraint: vec![],
        }
    }

    pub fn from_json(s: &str) -> Result<ProblemJson> {
        serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))
    }

    fn colors(&self) -> Result<Label> {
        let c = self.params.get("colors").copied().unwrap_or(4);
        if c == 0 {
            return Err(Error::InvalidArgument("colors must be positive".into()));
        }
        Ok(c)
    }

    fn check_params(&self, allowed: &[&str]) -> Result<()> {
        match self.params.keys().find(|k| !allowed.contains(&k.as_str())) {
            Some(k) => Err(Error::InvalidArgument(format!("unknown parameter {k:?}"))),
            None => Ok(()),
        }
    }

    fn from_builtin(&self, name: &str) -> Result<Problem> {
        let unknown = |known: &[&str]| {
            Error::InvalidArgument(format!("unknown {:?} builtin {name:?}; known: {}", self.formalism, known.join(", ")))
        };
        let params: &[&str] = if name == "coloring" { &["colors"] } else { &[] };
        self.check_params(params)?;
        Ok(match (self.formalism, name) {
            (Formalism::Lcl, "coloring") => Problem::Lcl(fixtures::coloring_lcl(self.colors()?)),
            (Formalism::Lcl, "list-coloring") => Problem::Lcl(fixtures::list_coloring_lcl()),
            (Formalism::Lcl, "maximal-matching") => Problem::Lcl(fixtures::maximal_matching_lcl()),
            (Formalism::Lcl, _) => return Err(unknown(&LCL_BUILTINS)),
            (Formalism::Pn, "coloring") => Problem::Pn(fixtures::coloring_pn(self.colors()?)),
            (Formalism::Pn, _) => return Err(unknown(&PN_BUILTINS)),
            (Formalism::Re, "coloring") => Problem::Re(fixtures::coloring_re(self.colors()?)),
            (Formalism::Re, "maximal-matching") => Problem::Re(fixtures::maximal_matching_re()),
            (Formalism::Re, "sinkless-orientation") => Problem::Re(fixtures::sinkless_orientation_re()),
            (Formalism::Re, _) => return Err(unknown(&RE_BUILTINS)),
        })
    }

    fn alphabet(&self, field: &str, v: &Option<Vec<Label>>) -> Result<Alphabet> {
        match v {
            Some(ls) if !ls.is_empty() => Ok(Alphabet::Finite(ls.iter().copied().collect())),
            _ => Err(Error::Parse(format!("explicit problem needs a non-empty {field}"))),
        }
    }

    pub fn to_problem(&self) -> Result<Problem> {
        if let Some(b) = &self.builtin {
            return self.from_builtin(b);
        }
        let name = self.name.clone().unwrap_or_else(|| "explicit".into());
        Ok(match self.formalism {
            Formalism::Lcl => {
                let radius = self.radius.ok_or_else(|| Error::Parse("explicit LCL needs a radius".into()))?;
                let mut list = Vec::new();
                for a in &self.accepted_balls {
                    if !a.ball.is_ball() {
                        return Err(Error::Parse(format!("accepted ball around {} is not a ball", a.ball.center)));
                    }
                    list.push((a.ball.clone(), a.outputs.output()?));
                }
                let edge_outputs = self.edge_outputs.unwrap_or(false);
                Problem::Lcl(LclProblem {
                    name,
                    max_degree: self.max_degree.unwrap_or(3),
                    input_alphabet: self.input_alphabet.as_ref().map(|ls| Alphabet::Finite(ls.iter().copied().collect())),
                    output_alphabet: self.alphabet("output_alphabet", &self.output_alphabet)?,
                    radius,
                    node_outputs: !edge_outputs,
                    edge_outputs,
                    constraint: LclConstraint::Explicit(list),
                })
            }
            Formalism::Pn => {
                let radius = self.radius.ok_or_else(|| Error::Parse("explicit PN problem needs a radius".into()))?;
                let dag = self.views.as_ref().ok_or_else(|| Error::Parse("explicit PN problem needs views".into()))?;
                let mut arena = ViewArena::new();
                let ids = arena.import_dag(dag)?;
                let mut list = Vec::new();
                for &i in &self.accepted_views {
                    let id = *ids.get(i).ok_or_else(|| Error::Parse(format!("view {i} not in table")))?;
                    list.push(arena.export(id, arena.height(id)));
                }
                Problem::Pn(PnProblem {
                    name,
                    output_alphabet: self.alphabet("output_alphabet", &self.output_alphabet)?,
                    radius,
                    constraint: PnConstraint::Explicit(list),
                })
            }
            Formalism::Re => {
                let arity = |sets: &[Vec<Label>], n: usize, what: &str| -> Result<()> {
                    match sets.iter().find(|s| s.len() != n) {
                        Some(s) => Err(Error::Parse(format!("{what} entry {s:?} must have {n} labels"))),
                        None => Ok(()),
                    }
                };
                arity(&self.node_constraint, 3, "node_constraint")?;
                arity(&self.edge_constraint, 2, "edge_constraint")?;
                let alphabet = match &self.output_alphabet {
                    Some(_) => self.alphabet("output_alphabet", &self.output_alphabet)?,
                    None => Alphabet::Finite(
                        self.node_constraint.iter().chain(&self.edge_constraint).flatten().copied().collect::<BTreeSet<_>>(),
                    ),
                };
                Problem::Re(ReProblem {
                    name,
                    alphabet,
                    node_constraint: MultisetConstraint::explicit(self.node_constraint.clone()),
                    edge_constraint: MultisetConstraint::explicit(self.edge_constraint.clone()),
                })
            }
        })
    }
}

pub fn formalism_of(p: &Problem) -> Formalism {
    match p {
        Problem::Lcl(_) => Formalism::Lcl,
        Problem::Pn(_) => Formalism::Pn,
        Problem::Re(_) => Formalism::Re,
    }
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::formalisms::{brute_force_solve, verify, SolveOutcome, DEFAULT_SOLVE_BUDGET};
    use crate::graph::{ball, gen};

    #[test]
    fn builtins_parse_and_solve() {
        let text = r#"{"formalism":"lcl","builtin":"coloring","params":{"colors":3}}"#;
        let p = ProblemJson::from_json(text).unwrap().to_problem().unwrap();
        assert_eq!(p.name(), "3-coloring");
        let g = gen::cycle(5);
        let SolveOutcome::Found(s) = brute_force_solve(&p, &g, DEFAULT_SOLVE_BUDGET).unwrap() else {
            panic!()
        };
        let j = LabelingJson::from_solution(&s);
        assert_eq!(j.solution(Formalism::Lcl).unwrap(), s);
        assert!(ProblemJson::from_json(r#"{"formalism":"re","builtin":"nope"}"#).unwrap().to_problem().is_err());
        assert!(ProblemJson::from_json(r#"{"formalism":"lcl","builtin":"coloring","params":{"k":1}}"#).unwrap().to_problem().is_err());
        assert!(ProblemJson::from_json(r#"{"formalism":"lcl","extra":1}"#).is_err());
    }

    #[test]
    fn explicit_re_problem() {
        let text = r#"{"formalism":"re","name":"orient","node_constraint":[[1,2,2],[1,1,2],[1,1,1]],"edge_constraint":[[1,2]]}"#;
        let p = ProblemJson::from_json(text).unwrap().to_problem().unwrap();
        let g = gen::complete(4);
        let s = brute_force_solve(&p, &g, DEFAULT_SOLVE_BUDGET).unwrap().found().unwrap();
        assert!(verify(&p, &g, &s).unwrap().overall);
        let bad = r#"{"formalism":"re","node_constraint":[[1,2]],"edge_constraint":[[1,2]]}"#;
        assert!(ProblemJson::from_json(bad).unwrap().to_problem().is_err());
    }

    #[test]
    fn explicit_lcl_round_trip() {
        // Radius-0 LCL on paths: every vertex outputs 7.
        let g = gen::path(3);
        let b = ball(&g, 1, 0).unwrap();
        let mut pj = ProblemJson::builtin(Formalism::Lcl, "x", &[]);
        pj.builtin = None;
        pj.radius = Some(0);
        pj.output_alphabet = Some(vec![7]);
        pj.accepted_balls = vec![AcceptedBall { ball: b, outputs: LabelingJson::from_nodes(&BTreeMap::from([(1, 7)])) }];
        let back = ProblemJson::from_json(&serde_json::to_string(&pj).unwrap()).unwrap();
        assert_eq!(back, pj);
        let p = back.to_problem().unwrap();
        let s = brute_force_solve(&p, &g, DEFAULT_SOLVE_BUDGET).unwrap().found().unwrap();
        assert_eq!(s, Solution::Lcl(OutputLabeling::from_nodes((0..3).map(|v| (v, 7)).collect())));
    }

    #[test]
    fn half_edge_labelings_use_string_keys() {
        let h = HalfEdgeLabeling::from([((2, 1), 5), ((1, 2), 6)]);
        let j = LabelingJson::from_half_edges(&h);
        assert_eq!(j.half_edges.keys().collect::<Vec<_>>(), ["1-2@1", "1-2@2"]);
        assert_eq!(j.half_edges().unwrap(), h);
    }
}
