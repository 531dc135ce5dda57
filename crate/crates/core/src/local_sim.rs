//! Deterministic LOCAL/SLOCAL runners, the encode/decode simulations, a
//! greedy symmetry-breaking oracle and finite-support outcomes.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;
use std::sync::Arc;

use num_rational::Ratio;
use num_traits::{CheckedAdd, One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::encode_ab::{decode_ab, encode_ab_with, lambda, AbScheme, DecodeMap, Owner, PortOrder, Role};
use crate::error::{Error, Result};
use crate::graph::{ball, CenteredGraph, LabeledGraph, Label, MultiGraph, VertexId, BOTTOM};

pub type Labeling = BTreeMap<VertexId, Label>;

/// Default exponent `c` of the identifier range `[n^c]`.
pub const ID_EXPONENT: u32 = 3;

/// A graph with unique identifiers and a round budget.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SimInstance {
    pub graph: LabeledGraph,
    pub ids: BTreeMap<VertexId, u64>,
    pub t: u32,
}

impl SimInstance {
    /// Identifiers drawn from `[n^3]` with a seeded generator.
    pub fn new(graph: LabeledGraph, t: u32, seed: u64) -> Result<SimInstance> {
        let ids = random_ids(&graph, seed, ID_EXPONENT)?;
        Ok(SimInstance { graph, ids, t })
    }

    pub fn with_ids(graph: LabeledGraph, ids: BTreeMap<VertexId, u64>, t: u32) -> Result<SimInstance> {
        let keys: BTreeSet<VertexId> = ids.keys().copied().collect();
        if keys != graph.vertices().collect() {
            return Err(Error::InvalidArgument("ids must cover exactly the vertices".into()));
        }
        if ids.values().collect::<BTreeSet<_>>().len() != ids.len() {
            return Err(Error::InvalidArgument("ids are not unique".into()));
        }
        Ok(SimInstance { graph, ids, t })
    }

    /// Identifiers `v + 1`.
    pub fn sequential(graph: LabeledGraph, t: u32) -> SimInstance {
        let ids = graph.vertices().map(|v| (v, v as u64 + 1)).collect();
        SimInstance { graph, ids, t }
    }
}

/// Injective identifiers in `1..=max(n^c, n)`.
pub fn random_ids(g: &LabeledGraph, seed: u64, c: u32) -> Result<BTreeMap<VertexId, u64>> {
    let n = g.vertex_count() as u64;
    let bound = n
        .checked_pow(c)
        .ok_or_else(|| Error::BudgetExceeded(format!("{n}^{c} does not fit in 64 bits")))?
        .max(n);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used = BTreeSet::new();
    let mut ids = BTreeMap::new();
    for v in g.vertices() {
        let id = loop {
            let x = rng.gen_range(1..=bound);
            if used.insert(x) {
                break x;
            }
        };
        ids.insert(v, id);
    }
    Ok(ids)
}

/// What an algorithm sees: a centered ball, the identifiers inside it and,
/// under SLOCAL, the outputs already fixed inside it. Vertex names are
/// arbitrary; only `ids` carry identity.
#[derive(Clone, Debug)]
pub struct LocalView {
    pub ball: CenteredGraph,
    pub ids: BTreeMap<VertexId, u64>,
    pub outputs: Labeling,
}

impl LocalView {
    pub fn center_id(&self) -> u64 {
        self.ids[&self.ball.center]
    }
}

pub type ViewFn = Arc<dyn Fn(&LocalView) -> Label + Send + Sync>;

#[derive(Clone)]
pub struct LocalAlgorithm {
    pub name: String,
    pub locality: u32,
    pub f: ViewFn,
}

impl fmt::Debug for LocalAlgorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "LocalAlgorithm({}, T={})", self.name, self.locality)
    }
}

impl LocalAlgorithm {
    pub fn new(name: impl Into<String>, locality: u32, f: impl Fn(&LocalView) -> Label + Send + Sync + 'static) -> Self {
        LocalAlgorithm { name: name.into(), locality, f: Arc::new(f) }
    }
}

/// Outputs together with the radius each vertex actually queried.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct RunRecord {
    pub outputs: Labeling,
    pub radius: BTreeMap<VertexId, u32>,
}

impl RunRecord {
    pub fn max_radius(&self) -> u32 {
        self.radius.values().copied().max().unwrap_or(0)
    }
}

fn view_of(g: &LabeledGraph, ids: &BTreeMap<VertexId, u64>, v: VertexId, r: u32, outputs: &Labeling) -> Result<LocalView> {
    let b = ball(g, v, r)?;
    let mut vids = BTreeMap::new();
    for u in b.graph.vertices() {
        vids.insert(u, *ids.get(&u).ok_or_else(|| Error::InvalidArgument(format!("vertex {u} has no id")))?);
    }
    let outputs = b.graph.vertices().filter_map(|u| outputs.get(&u).map(|&l| (u, l))).collect();
    Ok(LocalView { ball: b, ids: vids, outputs })
}

fn check_budget(alg: &LocalAlgorithm, inst: &SimInstance) -> Result<()> {
    if alg.locality > inst.t {
        return Err(Error::BudgetExceeded(format!("{} needs {} rounds, budget is {}", alg.name, alg.locality, inst.t)));
    }
    Ok(())
}

pub fn run_local(alg: &LocalAlgorithm, inst: &SimInstance) -> Result<RunRecord> {
    check_budget(alg, inst)?;
    let mut rec = RunRecord::default();
    let none = Labeling::new();
    for v in inst.graph.vertices() {
        let view = view_of(&inst.graph, &inst.ids, v, alg.locality, &none)?;
        rec.outputs.insert(v, (alg.f)(&view));
        rec.radius.insert(v, alg.locality);
    }
    Ok(rec)
}

/// Processes `order` one vertex at a time; each sees earlier outputs in its ball.
pub fn run_slocal(alg: &LocalAlgorithm, inst: &SimInstance, order: &[VertexId]) -> Result<RunRecord> {
    check_budget(alg, inst)?;
    let set: BTreeSet<VertexId> = order.iter().copied().collect();
    if set.len() != order.len() || set != inst.graph.vertices().collect() {
        return Err(Error::InvalidArgument("order is not a permutation of the vertices".into()));
    }
    let mut rec = RunRecord::default();
    for &v in order {
        let view = view_of(&inst.graph, &inst.ids, v, alg.locality, &rec.outputs)?;
        let out = (alg.f)(&view);
        rec.outputs.insert(v, out);
        rec.radius.insert(v, alg.locality);
    }
    Ok(rec)
}

pub const BUILTINS: [&str; 6] = ["constant", "id_parity", "degree", "min_id", "label_sum", "greedy_coloring"];

/// Built-in algorithms by name, optionally suffixed `:T` for the locality
/// of `min_id` and `label_sum`.
pub fn builtin(spec: &str) -> Result<LocalAlgorithm> {
    let (name, t) = match spec.split_once(':') {
        Some((n, t)) => (n, Some(t.parse::<u32>().map_err(|_| Error::Parse(format!("bad locality in {spec:?}")))?)),
        None => (spec, None),
    };
    let fixed = |want: u32| -> Result<u32> {
        match t {
            Some(x) if x != want => Err(Error::InvalidArgument(format!("{name} has locality {want}"))),
            _ => Ok(want),
        }
    };
    Ok(match name {
        "constant" => LocalAlgorithm::new(name, fixed(0)?, |_| 1),
        "id_parity" => LocalAlgorithm::new(name, fixed(0)?, |v| v.center_id() % 2),
        "degree" => LocalAlgorithm::new(name, fixed(1)?, |v| v.ball.graph.degree(v.ball.center) as Label),
        "min_id" => LocalAlgorithm::new(name, t.unwrap_or(1), |v| *v.ids.values().min().unwrap()),
        "label_sum" => LocalAlgorithm::new(name, t.unwrap_or(1), |v| {
            let g = &v.ball.graph;
            let labels: Label = g.node_labels().values().filter(|&&l| l != BOTTOM).sum();
            labels + g.edge_count() as Label
        }),
        "greedy_coloring" => LocalAlgorithm::new(name, fixed(1)?, |v| {
            let taken: BTreeSet<Label> = v.ball.graph.neighbors(v.ball.center).filter_map(|u| v.outputs.get(&u).copied()).collect();
            (1..).find(|c| !taken.contains(c)).unwrap()
        }),
        _ => return Err(Error::InvalidArgument(format!("unknown builtin {name:?}; known: {}", BUILTINS.join(", ")))),
    })
}

/// A proper coloring of the `k`-th power of the graph.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SymmetryOracle {
    pub k: u32,
    pub chi: BTreeMap<VertexId, u64>,
    pub colors: u64,
}

/// Greedy coloring of the power graph, vertices taken by increasing id.
pub fn distance_k_coloring(inst: &SimInstance, k: u32) -> Result<SymmetryOracle> {
    if k == 0 {
        return Err(Error::InvalidArgument("k must be at least 1".into()));
    }
    let mut order: Vec<VertexId> = inst.graph.vertices().collect();
    order.sort_by_key(|v| inst.ids.get(v).copied().unwrap_or(u64::MAX));
    let mut chi = BTreeMap::new();
    for v in order {
        let near = inst.graph.distances_within(v, k)?;
        let taken: BTreeSet<u64> = near.keys().filter_map(|u| chi.get(u).copied()).collect();
        chi.insert(v, (1..).find(|c| !taken.contains(c)).unwrap());
    }
    let colors = chi.values().copied().max().unwrap_or(0);
    Ok(SymmetryOracle { k, chi, colors })
}

/// Symmetry-breaking cost per model of computation, as an additive locality term.
pub const SYMMETRY_BREAKING_COST: [(&str, &str); 8] = [
    ("det-LOCAL", "Θ(log* n)"),
    ("rand-LOCAL", "Θ(log* n)"),
    ("SLOCAL", "O(1)"),
    ("online-LOCAL", "O(1)"),
    ("non-signaling", "O(1)"),
    ("bounded-dependence", "O(1)"),
    ("quantum-LOCAL", "O(log* n), tight bound open"),
    ("this crate", "greedy global power-graph coloring"),
];

/// Identifier of every decoded vertex: the smallest id in its gadget.
pub fn decoded_ids(map: &DecodeMap, ids: &BTreeMap<VertexId, u64>) -> Result<BTreeMap<VertexId, u64>> {
    let id = |x: &VertexId| ids.get(x).copied().ok_or_else(|| Error::InvalidArgument(format!("vertex {x} has no id")));
    let mut out = BTreeMap::new();
    for (&d, n) in &map.nodes {
        let mut best = u64::MAX;
        for x in &n.vertices {
            best = best.min(id(x)?);
        }
        out.insert(d, best);
    }
    for m in &map.malformed_vertices {
        out.insert(*m, id(m)?);
    }
    Ok(out)
}

/// Order on decoded vertices induced by a processing order of the encoded
/// graph: a gadget enters when its first vertex is processed.
pub fn decoded_order(map: &DecodeMap, order: &[VertexId]) -> Vec<VertexId> {
    let mut seen = BTreeSet::new();
    order
        .iter()
        .filter_map(|&v| map.decoded_vertex(v))
        .filter(|d| seen.insert(*d))
        .collect()
}

/// Radius queried in the encoded graph per simulated round budget `t1`.
pub fn a1_radius(s: &AbScheme, t1: u32) -> u32 {
    lambda(s) * (t1 + 2)
}

type LocalDecodeCache = HashMap<(Vec<VertexId>, Vec<(VertexId, VertexId)>), Arc<(LabeledGraph, DecodeMap)>>;

/// Runs a decoded-graph algorithm on an encoded graph: every vertex decodes
/// its radius-`Λ(T₁+2)` ball, runs `alg` at its decoded vertex and outputs
/// the result; edge-gadget and malformed vertices output ⊥.
pub fn simulate_a1_prime(alg: &LocalAlgorithm, inst: &SimInstance, s: &AbScheme) -> Result<RunRecord> {
    check_budget(alg, inst)?;
    let r = a1_radius(s, alg.locality);
    let mut cache: LocalDecodeCache = HashMap::new();
    let mut rec = RunRecord::default();
    let none = Labeling::new();
    for x in inst.graph.vertices() {
        let b = ball(&inst.graph, x, r)?;
        let key = (b.graph.vertices().collect(), b.graph.edges().collect());
        let dec = match cache.get(&key) {
            Some(d) => d.clone(),
            None => {
                let (m, map) = decode_ab(&b.graph, s);
                let d = Arc::new((decoded_simple_graph(&m), map));
                cache.insert(key, d.clone());
                d
            }
        };
        let (dg, map) = &*dec;
        let out = match map.owner[&x] {
            Owner::Node(d) => {
                let dids = decoded_ids(map, &inst.ids)?;
                (alg.f)(&view_of(dg, &dids, d, alg.locality, &none)?)
            }
            _ => BOTTOM,
        };
        rec.outputs.insert(x, out);
        rec.radius.insert(x, r);
    }
    Ok(rec)
}

/// Graph the decoded-graph algorithms run on: the decoding with parallel edges merged.
pub fn decoded_simple_graph(m: &MultiGraph) -> LabeledGraph {
    m.to_simple().0
}

const ID_BITS: u32 = 20;

/// Identifier of an encoded vertex derived from its role and the source ids.
pub fn role_id(role: Role, ids: &BTreeMap<VertexId, u64>) -> Result<u64> {
    let id = |v: VertexId| -> Result<u64> {
        let x = *ids.get(&v).ok_or_else(|| Error::InvalidArgument(format!("vertex {v} has no id")))?;
        if x >= 1 << ID_BITS {
            return Err(Error::BudgetExceeded(format!("id {x} needs more than {ID_BITS} bits")));
        }
        Ok(x)
    };
    let small = |i: u32| -> Result<u64> {
        if i >= 1 << ID_BITS {
            return Err(Error::BudgetExceeded(format!("gadget index {i} too large")));
        }
        Ok(i as u64)
    };
    Ok(match role {
        Role::Node { v, idx } => ((id(v)? << ID_BITS) | small(idx)?) << 1,
        Role::Edge { u, v, idx } => ((((id(u)? << ID_BITS) | id(v)?) << ID_BITS | small(idx)?) << 1) | 1,
    })
}

pub fn role_ids(roles: &BTreeMap<VertexId, Role>, ids: &BTreeMap<VertexId, u64>) -> Result<BTreeMap<VertexId, u64>> {
    roles.iter().map(|(&x, &r)| Ok((x, role_id(r, ids)?))).collect()
}

/// Runs an encoded-graph algorithm on a source graph: every vertex encodes
/// its radius-`T₂` ball (ports ordered by identifier) and runs `alg` at its
/// gadget's representative.
pub fn simulate_a2_prime(alg: &LocalAlgorithm, inst: &SimInstance, s: &AbScheme) -> Result<RunRecord> {
    check_budget(alg, inst)?;
    let t2 = alg.locality;
    if t2 == 0 {
        return Err(Error::InvalidArgument("the encoded algorithm needs locality at least 1".into()));
    }
    let mut rec = RunRecord::default();
    let none = Labeling::new();
    for v in inst.graph.vertices() {
        let b = ball(&inst.graph, v, t2)?;
        let enc = encode_ab_with(&b.graph, s, PortOrder::Ranked(&inst.ids))?;
        let x = enc.rep_of[&v];
        let ids = role_ids(&enc.roles, &inst.ids)?;
        rec.outputs.insert(v, (alg.f)(&view_of(&enc.graph, &ids, x, t2, &none)?));
        rec.radius.insert(v, t2);
    }
    Ok(rec)
}

/// A finite distribution over labelings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Outcome {
    pub support: Vec<(Labeling, Ratio<u64>)>,
}

fn total<'a>(ps: impl Iterator<Item = &'a Ratio<u64>>) -> Result<Ratio<u64>> {
    let mut s = Ratio::zero();
    for p in ps {
        s = s.checked_add(p).ok_or_else(|| Error::ProbabilitySum("overflow".into()))?;
    }
    Ok(s)
}

impl Outcome {
    pub fn new(support: Vec<(Labeling, Ratio<u64>)>) -> Result<Outcome> {
        let s = total(support.iter().map(|(_, p)| p))?;
        if !s.is_one() {
            return Err(Error::ProbabilitySum(s.to_string()));
        }
        Ok(Outcome { support })
    }

    pub fn point(l: Labeling) -> Outcome {
        Outcome { support: vec![(l, Ratio::one())] }
    }

    pub fn success(&self, verifier: impl Fn(&Labeling) -> bool) -> Result<Ratio<u64>> {
        total(self.support.iter().filter(|(l, _)| verifier(l)).map(|(_, p)| p))
    }

    /// Joint distribution of the labels on `probe` (`None` for unlabeled).
    pub fn marginal(&self, probe: &[VertexId]) -> Result<BTreeMap<Vec<Option<Label>>, Ratio<u64>>> {
        let mut m: BTreeMap<Vec<Option<Label>>, Ratio<u64>> = BTreeMap::new();
        for (l, p) in &self.support {
            let key = probe.iter().map(|v| l.get(v).copied()).collect();
            let e = m.entry(key).or_insert_with(Ratio::zero);
            *e = e.checked_add(p).ok_or_else(|| Error::ProbabilitySum("overflow".into()))?;
        }
        Ok(m)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct LiftedOutcome {
    pub outcome: Outcome,
    pub p_src: Ratio<u64>,
    pub p_dst: Ratio<u64>,
}

/// Pushes an outcome through a labeling lift. A labeling the lift rejects
/// becomes the empty labeling, which a target verifier fails.
pub fn lift_outcome(
    o: &Outcome,
    lift: impl Fn(&Labeling) -> Result<Labeling>,
    v_src: impl Fn(&Labeling) -> bool,
    v_dst: impl Fn(&Labeling) -> bool,
) -> Result<LiftedOutcome> {
    let o = Outcome::new(o.support.clone())?;
    let mut merged: BTreeMap<Labeling, Ratio<u64>> = BTreeMap::new();
    for (l, p) in &o.support {
        let e = merged.entry(lift(l).unwrap_or_default()).or_insert_with(Ratio::zero);
        *e = e.checked_add(p).ok_or_else(|| Error::ProbabilitySum("overflow".into()))?;
    }
    let lifted = Outcome { support: merged.into_iter().collect() };
    Ok(LiftedOutcome { p_src: o.success(v_src)?, p_dst: lifted.success(v_dst)?, outcome: lifted })
}
