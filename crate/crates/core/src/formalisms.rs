//! Problem formalisms, verifiers and a brute-force solver.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{ball, edge_key, CenteredGraph, EdgeKey, LabeledGraph, Label, VertexId};
use crate::iso::{find_isomorphism, IsoOptions};
use crate::view::{ViewArena, ViewId};

/// Node and edge outputs.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct OutputLabeling {
    pub nodes: BTreeMap<VertexId, Label>,
    pub edges: BTreeMap<EdgeKey, Label>,
}

impl OutputLabeling {
    pub fn from_nodes(nodes: BTreeMap<VertexId, Label>) -> Self {
        OutputLabeling { nodes, edges: BTreeMap::new() }
    }

    pub fn restrict(&self, g: &LabeledGraph) -> OutputLabeling {
        OutputLabeling {
            nodes: self
                .nodes
                .iter()
                .filter(|(v, _)| g.contains(**v))
                .map(|(&v, &l)| (v, l))
                .collect(),
            edges: self
                .edges
                .iter()
                .filter(|((u, v), _)| g.has_edge(*u, *v))
                .map(|(&k, &l)| (k, l))
                .collect(),
        }
    }

    pub fn edge(&self, u: VertexId, v: VertexId) -> Option<Label> {
        self.edges.get(&edge_key(u, v)).copied()
    }
}

/// Half-edge labels keyed by (endpoint, other endpoint).
pub type HalfEdgeLabeling = BTreeMap<(VertexId, VertexId), Label>;

/// A label set, either listed or given by a predicate.
#[derive(Clone)]
pub enum Alphabet {
    Finite(BTreeSet<Label>),
    Predicate(Arc<dyn Fn(Label) -> bool + Send + Sync>),
}

impl Alphabet {
    pub fn range(lo: Label, hi: Label) -> Alphabet {
        Alphabet::Finite((lo..=hi).collect())
    }

    pub fn contains(&self, l: Label) -> bool {
        match self {
            Alphabet::Finite(s) => s.contains(&l),
            Alphabet::Predicate(f) => f(l),
        }
    }

    pub fn finite(&self) -> Option<&BTreeSet<Label>> {
        match self {
            Alphabet::Finite(s) => Some(s),
            Alphabet::Predicate(_) => None,
        }
    }
}

impl fmt::Debug for Alphabet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Alphabet::Finite(s) => write!(f, "Finite({s:?})"),
            Alphabet::Predicate(_) => write!(f, "Predicate"),
        }
    }
}

pub type BallOracle = Arc<dyn Fn(&CenteredGraph, &OutputLabeling) -> bool + Send + Sync>;
pub type ViewOracle = Arc<dyn Fn(&mut ViewArena, ViewId) -> bool + Send + Sync>;
pub type MultisetOracle = Arc<dyn Fn(&[Label]) -> bool + Send + Sync>;

#[derive(Clone)]
pub enum LclConstraint {
    Oracle(BallOracle),
    /// Accepted centered graphs; node labels are inputs, outputs alongside.
    Explicit(Vec<(CenteredGraph, OutputLabeling)>),
}

#[derive(Clone)]
pub struct LclProblem {
    pub name: String,
    pub max_degree: usize,
    /// `None` means input labels are ignored.
    pub input_alphabet: Option<Alphabet>,
    pub output_alphabet: Alphabet,
    pub radius: u32,
    pub node_outputs: bool,
    pub edge_outputs: bool,
    pub constraint: LclConstraint,
}

impl LclProblem {
    pub fn accepts(&self, b: &CenteredGraph, out: &OutputLabeling) -> bool {
        match &self.constraint {
            LclConstraint::Oracle(f) => f(b, out),
            LclConstraint::Explicit(list) => list.iter().any(|(c, o)| labeled_centered_iso(b, out, c, o)),
        }
    }
}

impl fmt::Debug for LclProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("LclProblem")
            .field("name", &self.name)
            .field("max_degree", &self.max_degree)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub enum PnConstraint {
    Oracle(ViewOracle),
    Explicit(Vec<crate::view::RootedView>),
}

#[derive(Clone)]
pub struct PnProblem {
    pub name: String,
    pub output_alphabet: Alphabet,
    pub radius: u32,
    pub constraint: PnConstraint,
}

impl PnProblem {
    pub fn accepts(&self, arena: &mut ViewArena, view: ViewId) -> bool {
        match &self.constraint {
            PnConstraint::Oracle(f) => f(arena, view),
            PnConstraint::Explicit(list) => list.iter().any(|t| arena.import(t) == view),
        }
    }
}

impl fmt::Debug for PnProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PnProblem")
            .field("name", &self.name)
            .field("radius", &self.radius)
            .finish_non_exhaustive()
    }
}

#[derive(Clone)]
pub enum MultisetConstraint {
    Oracle(MultisetOracle),
    /// Sorted multisets.
    Explicit(BTreeSet<Vec<Label>>),
}

impl MultisetConstraint {
    pub fn explicit<I: IntoIterator<Item = Vec<Label>>>(sets: I) -> Self {
        MultisetConstraint::Explicit(
            sets.into_iter()
                .map(|mut s| {
                    s.sort_unstable();
                    s
                })
                .collect(),
        )
    }

    /// `labels` must be sorted.
    pub fn contains(&self, labels: &[Label]) -> bool {
        match self {
            MultisetConstraint::Oracle(f) => f(labels),
            MultisetConstraint::Explicit(s) => s.contains(labels),
        }
    }
}

#[derive(Clone)]
pub struct ReProblem {
    pub name: String,
    pub alphabet: Alphabet,
    pub node_constraint: MultisetConstraint,
    pub edge_constraint: MultisetConstraint,
}

impl fmt::Debug for ReProblem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("ReProblem").field("name", &self.name).finish_non_exhaustive()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Site {
    Vertex(VertexId),
    Edge(VertexId, VertexId),
    HalfEdge(VertexId, VertexId),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Reason {
    AlphabetViolation,
    ConstraintRejection,
    DegreeViolation,
    MissingLabel,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Verdict {
    pub overall: bool,
    pub failures: Vec<(Site, Reason)>,
}

impl Verdict {
    fn from_failures(mut failures: Vec<(Site, Reason)>) -> Verdict {
        failures.sort();
        failures.dedup();
        Verdict { overall: failures.is_empty(), failures }
    }

    /// Sites rejected for the given reason.
    pub fn sites(&self, reason: Reason) -> Vec<Site> {
        self.failures.iter().filter(|f| f.1 == reason).map(|f| f.0).collect()
    }
}

/// Isomorphism of centered graphs that also respects outputs.
pub fn labeled_centered_iso(a: &CenteredGraph, ao: &OutputLabeling, b: &CenteredGraph, bo: &OutputLabeling) -> bool {
    if a.radius != b.radius {
        return false;
    }
    let mut node_keys = BTreeSet::new();
    let mut edge_keys = BTreeSet::new();
    for (g, o) in [(&a.graph, ao), (&b.graph, bo)] {
        for v in g.vertices() {
            node_keys.insert((g.node_label(v), o.nodes.get(&v).copied()));
        }
        for (u, v) in g.edges() {
            edge_keys.insert((g.edge_label(u, v), o.edge(u, v)));
        }
    }
    let ni: HashMap<_, Label> = node_keys.into_iter().enumerate().map(|(i, k)| (k, i as Label)).collect();
    let ei: HashMap<_, Label> = edge_keys.into_iter().enumerate().map(|(i, k)| (k, i as Label)).collect();
    let combine = |g: &LabeledGraph, o: &OutputLabeling| {
        let mut h = g.unlabeled();
        for v in g.vertices() {
            h.set_node_label(v, ni[&(g.node_label(v), o.nodes.get(&v).copied())]).unwrap();
        }
        for (u, v) in g.edges() {
            h.set_edge_label(u, v, ei[&(g.edge_label(u, v), o.edge(u, v))]).unwrap();
        }
        h
    };
    find_isomorphism(
        &combine(&a.graph, ao),
        &combine(&b.graph, bo),
        Some((a.center, b.center)),
        IsoOptions::ALL,
    )
    .is_some()
}

fn check_outputs(
    g: &LabeledGraph,
    alphabet: &Alphabet,
    node_outputs: bool,
    edge_outputs: bool,
    out: &OutputLabeling,
    failures: &mut Vec<(Site, Reason)>,
) {
    if node_outputs {
        for v in g.vertices() {
            match out.nodes.get(&v) {
                None => failures.push((Site::Vertex(v), Reason::MissingLabel)),
                Some(&l) if !alphabet.contains(l) => failures.push((Site::Vertex(v), Reason::AlphabetViolation)),
                _ => {}
            }
        }
    }
    if edge_outputs {
        for (u, v) in g.edges() {
            match out.edge(u, v) {
                None => failures.push((Site::Edge(u, v), Reason::MissingLabel)),
                Some(l) if !alphabet.contains(l) => failures.push((Site::Edge(u, v), Reason::AlphabetViolation)),
                _ => {}
            }
        }
    }
}

/// Per-vertex constraint verdict of an LCL; outputs are assumed present.
pub fn lcl_accepts_at(p: &LclProblem, g: &LabeledGraph, out: &OutputLabeling, v: VertexId) -> Result<bool> {
    let b = ball(g, v, p.radius)?;
    let o = out.restrict(&b.graph);
    Ok(p.accepts(&b, &o))
}

pub fn verify_lcl(p: &LclProblem, g: &LabeledGraph, out: &OutputLabeling) -> Verdict {
    let mut failures = vec![];
    for v in g.vertices() {
        if g.degree(v) > p.max_degree {
            failures.push((Site::Vertex(v), Reason::DegreeViolation));
        }
        if let Some(a) = &p.input_alphabet {
            match g.node_label(v) {
                Some(l) if a.contains(l) => {}
                _ => failures.push((Site::Vertex(v), Reason::AlphabetViolation)),
            }
        }
    }
    check_outputs(g, &p.output_alphabet, p.node_outputs, p.edge_outputs, out, &mut failures);
    if failures.is_empty() {
        for v in g.vertices() {
            if !lcl_accepts_at(p, g, out, v).expect("vertex exists") {
                failures.push((Site::Vertex(v), Reason::ConstraintRejection));
            }
        }
    }
    Verdict::from_failures(failures)
}

/// Verifies a PN problem using a caller-supplied arena so memoized verdicts carry over.
pub fn verify_pn_in(
    arena: &mut ViewArena,
    p: &PnProblem,
    g: &LabeledGraph,
    out: &BTreeMap<VertexId, Label>,
) -> Verdict {
    let mut failures = vec![];
    let o = OutputLabeling::from_nodes(out.clone());
    check_outputs(g, &p.output_alphabet, true, false, &o, &mut failures);
    if failures.is_empty() {
        let views = arena.pn_views(g, Some(out), p.radius);
        let mut vs: Vec<_> = views.into_iter().collect();
        vs.sort();
        for (v, id) in vs {
            if !p.accepts(arena, id) {
                failures.push((Site::Vertex(v), Reason::ConstraintRejection));
            }
        }
    }
    Verdict::from_failures(failures)
}

pub fn verify_pn(p: &PnProblem, g: &LabeledGraph, out: &BTreeMap<VertexId, Label>) -> Verdict {
    verify_pn_in(&mut ViewArena::new(), p, g, out)
}

pub fn verify_re(p: &ReProblem, g: &LabeledGraph, hel: &HalfEdgeLabeling) -> Result<Verdict> {
    g.check_cubic()?;
    let mut failures = vec![];
    for (&(v, u), _) in hel.iter() {
        if !g.has_edge(v, u) {
            return Err(Error::UnknownEdge(v, u));
        }
    }
    for v in g.vertices() {
        let mut labels = vec![];
        for u in g.neighbors(v) {
            match hel.get(&(v, u)) {
                None => failures.push((Site::HalfEdge(v, u), Reason::MissingLabel)),
                Some(&l) if !p.alphabet.contains(l) => failures.push((Site::HalfEdge(v, u), Reason::AlphabetViolation)),
                Some(&l) => labels.push(l),
            }
        }
        if labels.len() == 3 {
            labels.sort_unstable();
            if !p.node_constraint.contains(&labels) {
                failures.push((Site::Vertex(v), Reason::ConstraintRejection));
            }
        }
    }
    for (u, v) in g.edges() {
        if let (Some(&a), Some(&b)) = (hel.get(&(u, v)), hel.get(&(v, u))) {
            if p.alphabet.contains(a) && p.alphabet.contains(b) {
                let pair = if a <= b { [a, b] } else { [b, a] };
                if !p.edge_constraint.contains(&pair) {
                    failures.push((Site::Edge(u, v), Reason::ConstraintRejection));
                }
            }
        }
    }
    Ok(Verdict::from_failures(failures))
}

#[derive(Clone)]
pub enum Problem {
    Lcl(LclProblem),
    Pn(PnProblem),
    Re(ReProblem),
}

impl Problem {
    pub fn name(&self) -> &str {
        match self {
            Problem::Lcl(p) => &p.name,
            Problem::Pn(p) => &p.name,
            Problem::Re(p) => &p.name,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Solution {
    Lcl(OutputLabeling),
    Pn(BTreeMap<VertexId, Label>),
    Re(HalfEdgeLabeling),
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SolveOutcome<T> {
    Found(T),
    Unsolvable,
    BudgetExceeded,
}

impl<T> SolveOutcome<T> {
    pub fn found(self) -> Option<T> {
        match self {
            SolveOutcome::Found(t) => Some(t),
            _ => None,
        }
    }
}

/// Search-node budget for [`brute_force_solve`].
pub const DEFAULT_SOLVE_BUDGET: u64 = 5_000_000;

/// Generic backtracking: slot `i` ranges over `domains[i]`; `checks_at[i]`
/// lists the checks that become decidable once slots `0..=i` are set.
struct Csp<'a> {
    domains: Vec<Vec<Label>>,
    checks_at: Vec<Vec<usize>>,
    check: Box<dyn FnMut(usize, &[Label]) -> bool + 'a>,
}

enum Flow {
    Continue,
    Stop,
}

impl Csp<'_> {
    fn run(&mut self, budget: &mut u64, visit: &mut dyn FnMut(&[Label]) -> Flow) -> std::result::Result<(), ()> {
        let mut assign = Vec::with_capacity(self.domains.len());
        let mut stop = false;
        self.rec(&mut assign, budget, visit, &mut stop)
    }

    fn rec(
        &mut self,
        assign: &mut Vec<Label>,
        budget: &mut u64,
        visit: &mut dyn FnMut(&[Label]) -> Flow,
        stop: &mut bool,
    ) -> std::result::Result<(), ()> {
        let i = assign.len();
        if i == self.domains.len() {
            if let Flow::Stop = visit(assign) {
                *stop = true;
            }
            return Ok(());
        }
        for k in 0..self.domains[i].len() {
            if *budget == 0 {
                return Err(());
            }
            *budget -= 1;
            assign.push(self.domains[i][k]);
            let checks = self.checks_at[i].clone();
            let ok = checks.iter().all(|&c| (self.check)(c, assign));
            if ok {
                self.rec(assign, budget, visit, stop)?;
            }
            assign.pop();
            if *stop {
                return Ok(());
            }
        }
        Ok(())
    }
}

fn bfs_order(g: &LabeledGraph) -> Vec<VertexId> {
    let mut seen = BTreeSet::new();
    let mut order = vec![];
    for s in g.vertices() {
        if !seen.insert(s) {
            continue;
        }
        let mut q = VecDeque::from([s]);
        while let Some(u) = q.pop_front() {
            order.push(u);
            for w in g.neighbors(u) {
                if seen.insert(w) {
                    q.push_back(w);
                }
            }
        }
    }
    order
}

enum Slot {
    Node(VertexId),
    Edge(VertexId, VertexId),
    Half(VertexId, VertexId),
}

fn finite_domain(a: &Alphabet) -> Result<Vec<Label>> {
    a.finite()
        .map(|s| s.iter().copied().collect())
        .ok_or_else(|| Error::InvalidArgument("brute force needs a finite output alphabet".into()))
}

fn completion_checks(slot_index: &HashMap<VertexId, Vec<usize>>, sites: &[(VertexId, Vec<VertexId>)], n_slots: usize) -> Vec<Vec<usize>> {
    let mut at = vec![vec![]; n_slots.max(1)];
    for (ci, (_, deps)) in sites.iter().enumerate() {
        let last = deps
            .iter()
            .flat_map(|d| slot_index.get(d).into_iter().flatten().copied())
            .max()
            .unwrap_or(0);
        at[last].push(ci);
    }
    at
}

fn lcl_slots(p: &LclProblem, g: &LabeledGraph) -> Vec<Slot> {
    let order = bfs_order(g);
    let pos: HashMap<VertexId, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut slots = vec![];
    for &v in &order {
        if p.node_outputs {
            slots.push(Slot::Node(v));
        }
        if p.edge_outputs {
            for u in g.neighbors(v) {
                if pos[&u] < pos[&v] {
                    slots.push(Slot::Edge(u, v));
                }
            }
        }
    }
    slots
}

fn lcl_labeling(slots: &[Slot], assign: &[Label]) -> OutputLabeling {
    let mut o = OutputLabeling::default();
    for (s, &l) in slots.iter().zip(assign) {
        match *s {
            Slot::Node(v) => {
                o.nodes.insert(v, l);
            }
            Slot::Edge(u, v) => {
                o.edges.insert(edge_key(u, v), l);
            }
            Slot::Half(..) => unreachable!(),
        }
    }
    o
}

/// Enumerates LCL solutions in a fixed order, up to `limit` of them.
pub fn enumerate_lcl_solutions(
    p: &LclProblem,
    g: &LabeledGraph,
    limit: usize,
    budget: u64,
) -> Result<SolveOutcome<Vec<OutputLabeling>>> {
    let mut found = vec![];
    let outcome = search_lcl(p, g, budget, &mut |o| {
        found.push(o);
        if found.len() >= limit {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok(match outcome {
        SolveOutcome::BudgetExceeded => SolveOutcome::BudgetExceeded,
        _ => SolveOutcome::Found(found),
    })
}

fn search_lcl(
    p: &LclProblem,
    g: &LabeledGraph,
    mut budget: u64,
    visit: &mut dyn FnMut(OutputLabeling) -> Flow,
) -> Result<SolveOutcome<()>> {
    let pre = verify_lcl(
        &LclProblem {
            constraint: LclConstraint::Oracle(Arc::new(|_, _| true)),
            node_outputs: false,
            edge_outputs: false,
            ..p.clone()
        },
        g,
        &OutputLabeling::default(),
    );
    if !pre.overall {
        return Err(Error::Precondition(format!("instance violates degree or input alphabet: {:?}", pre.failures)));
    }
    let dom = finite_domain(&p.output_alphabet)?;
    let slots = lcl_slots(p, g);
    let mut slot_index: HashMap<VertexId, Vec<usize>> = HashMap::new();
    // Each slot is attributed to the vertices whose ball may read it.
    for (i, s) in slots.iter().enumerate() {
        match *s {
            Slot::Node(v) => slot_index.entry(v).or_default().push(i),
            Slot::Edge(u, v) => {
                slot_index.entry(u).or_default().push(i);
                slot_index.entry(v).or_default().push(i);
            }
            Slot::Half(..) => unreachable!(),
        }
    }
    let sites: Vec<(VertexId, Vec<VertexId>)> = g
        .vertices()
        .map(|v| {
            let d = g.distances_within(v, p.radius).unwrap();
            (v, d.keys().copied().collect())
        })
        .collect();
    if slots.is_empty() {
        let o = OutputLabeling::default();
        return Ok(if verify_lcl(p, g, &o).overall {
            visit(o);
            SolveOutcome::Found(())
        } else {
            SolveOutcome::Unsolvable
        });
    }
    let checks_at = completion_checks(&slot_index, &sites, slots.len());
    let slots_ref = &slots;
    let sites_ref = &sites;
    let mut csp = Csp {
        domains: vec![dom; slots.len()],
        checks_at,
        check: Box::new(move |ci, assign| {
            let o = lcl_labeling(&slots_ref[..assign.len()], assign);
            lcl_accepts_at(p, g, &o, sites_ref[ci].0).unwrap()
        }),
    };
    let mut any = false;
    let r = csp.run(&mut budget, &mut |a| {
        any = true;
        visit(lcl_labeling(slots_ref, a))
    });
    Ok(match (r, any) {
        (Err(()), _) => SolveOutcome::BudgetExceeded,
        (Ok(()), true) => SolveOutcome::Found(()),
        (Ok(()), false) => SolveOutcome::Unsolvable,
    })
}

fn search_pn(
    p: &PnProblem,
    g: &LabeledGraph,
    mut budget: u64,
    visit: &mut dyn FnMut(BTreeMap<VertexId, Label>) -> Flow,
) -> Result<SolveOutcome<()>> {
    let dom = finite_domain(&p.output_alphabet)?;
    let order = bfs_order(g);
    let slot_index: HashMap<VertexId, Vec<usize>> = order.iter().enumerate().map(|(i, &v)| (v, vec![i])).collect();
    let sites: Vec<(VertexId, Vec<VertexId>)> = g
        .vertices()
        .map(|v| (v, g.distances_within(v, p.radius).unwrap().keys().copied().collect()))
        .collect();
    if order.is_empty() {
        visit(BTreeMap::new());
        return Ok(SolveOutcome::Found(()));
    }
    let checks_at = completion_checks(&slot_index, &sites, order.len());
    let order_ref = &order;
    let sites_ref = &sites;
    let mut arena = ViewArena::new();
    let mut csp = Csp {
        domains: vec![dom; order.len()],
        checks_at,
        check: Box::new(move |ci, assign| {
            let out: BTreeMap<VertexId, Label> = order_ref.iter().copied().zip(assign.iter().copied()).collect();
            let id = arena.pn_view(g, Some(&out), sites_ref[ci].0, p.radius).unwrap();
            p.accepts(&mut arena, id)
        }),
    };
    let mut any = false;
    let r = csp.run(&mut budget, &mut |a| {
        any = true;
        visit(order_ref.iter().copied().zip(a.iter().copied()).collect())
    });
    Ok(match (r, any) {
        (Err(()), _) => SolveOutcome::BudgetExceeded,
        (Ok(()), true) => SolveOutcome::Found(()),
        (Ok(()), false) => SolveOutcome::Unsolvable,
    })
}

fn search_re(
    p: &ReProblem,
    g: &LabeledGraph,
    mut budget: u64,
    visit: &mut dyn FnMut(HalfEdgeLabeling) -> Flow,
) -> Result<SolveOutcome<()>> {
    g.check_cubic()?;
    let dom = finite_domain(&p.alphabet)?;
    let order = bfs_order(g);
    let mut slots = vec![];
    for &v in &order {
        for u in g.neighbors(v) {
            slots.push(Slot::Half(v, u));
        }
    }
    if slots.is_empty() {
        visit(BTreeMap::new());
        return Ok(SolveOutcome::Found(()));
    }
    let idx: HashMap<(VertexId, VertexId), usize> = slots
        .iter()
        .enumerate()
        .map(|(i, s)| match *s {
            Slot::Half(v, u) => ((v, u), i),
            _ => unreachable!(),
        })
        .collect();
    // Checks: node checks then edge checks, each listing its three or two slots.
    let mut checks: Vec<Vec<usize>> = vec![];
    for v in g.vertices() {
        checks.push(g.neighbors(v).map(|u| idx[&(v, u)]).collect());
    }
    let n_node = checks.len();
    for (u, v) in g.edges() {
        checks.push(vec![idx[&(u, v)], idx[&(v, u)]]);
    }
    let mut checks_at = vec![vec![]; slots.len()];
    for (ci, c) in checks.iter().enumerate() {
        checks_at[*c.iter().max().unwrap()].push(ci);
    }
    let checks_ref = &checks;
    let mut csp = Csp {
        domains: vec![dom; slots.len()],
        checks_at,
        check: Box::new(move |ci, assign| {
            let mut ls: Vec<Label> = checks_ref[ci].iter().map(|&i| assign[i]).collect();
            ls.sort_unstable();
            if ci < n_node {
                p.node_constraint.contains(&ls)
            } else {
                p.edge_constraint.contains(&ls)
            }
        }),
    };
    let slots_ref = &slots;
    let mut any = false;
    let r = csp.run(&mut budget, &mut |a| {
        any = true;
        visit(
            slots_ref
                .iter()
                .zip(a)
                .map(|(s, &l)| match *s {
                    Slot::Half(v, u) => ((v, u), l),
                    _ => unreachable!(),
                })
                .collect(),
        )
    });
    Ok(match (r, any) {
        (Err(()), _) => SolveOutcome::BudgetExceeded,
        (Ok(()), true) => SolveOutcome::Found(()),
        (Ok(()), false) => SolveOutcome::Unsolvable,
    })
}

/// Finds one solution by exhaustive search in a stable order.
pub fn brute_force_solve(p: &Problem, g: &LabeledGraph, budget: u64) -> Result<SolveOutcome<Solution>> {
    let mut sol = None;
    let outcome = match p {
        Problem::Lcl(q) => search_lcl(q, g, budget, &mut |o| {
            sol = Some(Solution::Lcl(o));
            Flow::Stop
        })?,
        Problem::Pn(q) => search_pn(q, g, budget, &mut |o| {
            sol = Some(Solution::Pn(o));
            Flow::Stop
        })?,
        Problem::Re(q) => search_re(q, g, budget, &mut |o| {
            sol = Some(Solution::Re(o));
            Flow::Stop
        })?,
    };
    Ok(match outcome {
        SolveOutcome::Found(()) => SolveOutcome::Found(sol.expect("visited")),
        SolveOutcome::Unsolvable => SolveOutcome::Unsolvable,
        SolveOutcome::BudgetExceeded => SolveOutcome::BudgetExceeded,
    })
}

/// Enumerates RE solutions, up to `limit`.
pub fn enumerate_re_solutions(p: &ReProblem, g: &LabeledGraph, limit: usize, budget: u64) -> Result<SolveOutcome<Vec<HalfEdgeLabeling>>> {
    let mut found = vec![];
    let outcome = search_re(p, g, budget, &mut |o| {
        found.push(o);
        if found.len() >= limit {
            Flow::Stop
        } else {
            Flow::Continue
        }
    })?;
    Ok(match outcome {
        SolveOutcome::BudgetExceeded => SolveOutcome::BudgetExceeded,
        _ => SolveOutcome::Found(found),
    })
}

/// Checks a solution against the matching verifier.
pub fn verify(p: &Problem, g: &LabeledGraph, s: &Solution) -> Result<Verdict> {
    match (p, s) {
        (Problem::Lcl(q), Solution::Lcl(o)) => Ok(verify_lcl(q, g, o)),
        (Problem::Pn(q), Solution::Pn(o)) => Ok(verify_pn(q, g, o)),
        (Problem::Re(q), Solution::Re(o)) => verify_re(q, g, o),
        _ => Err(Error::InvalidArgument("solution formalism does not match the problem".into())),
    }
}
