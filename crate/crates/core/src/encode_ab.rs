//! Ladder-gadget encoding of labeled bounded-degree graphs into unlabeled
//! cubic graphs, its decoder, the derived input-free problem and the lifts.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formalisms::{Alphabet, LclConstraint, LclProblem, OutputLabeling};
use crate::graph::{ball, pack_pair, unpack_pair, CenteredGraph, LabeledGraph, Label, MultiEdge, MultiGraph, VertexId, BOTTOM};
use crate::iso::{canonical_order, graph_iso, IsoOptions, DEFAULT_CANON_BUDGET};

/// Ladder gadget `H_k` on local ids `0..2k+7`.
#[derive(Clone, Debug)]
pub struct LadderGadget {
    pub k: u32,
    pub graph: LabeledGraph,
    /// Attachment vertex (degree 2 before attachment).
    pub x: VertexId,
}

/// Local ids inside `H_k`.
#[derive(Clone, Copy, Debug)]
pub struct LadderIds {
    pub k: u32,
}

impl LadderIds {
    pub fn a(self, i: u32) -> u32 {
        i
    }
    pub fn b(self, i: u32) -> u32 {
        self.k + 1 + i
    }
    pub fn x(self) -> u32 {
        2 * self.k + 2
    }
    pub fn t(self) -> u32 {
        2 * self.k + 3
    }
    pub fn u(self) -> u32 {
        2 * self.k + 4
    }
    pub fn v(self) -> u32 {
        2 * self.k + 5
    }
    pub fn w(self) -> u32 {
        2 * self.k + 6
    }
    pub fn size(self) -> u32 {
        2 * self.k + 7
    }

    pub fn edges(self) -> Vec<(u32, u32)> {
        let k = self.k;
        let mut e = vec![];
        for i in 0..k {
            e.push((self.a(i), self.a(i + 1)));
            e.push((self.b(i), self.b(i + 1)));
        }
        for i in 0..=k {
            e.push((self.a(i), self.b(i)));
        }
        e.extend([
            (self.a(k), self.t()),
            (self.t(), self.u()),
            (self.b(k), self.w()),
            (self.w(), self.v()),
            (self.t(), self.v()),
            (self.u(), self.v()),
            (self.u(), self.w()),
            (self.x(), self.a(0)),
            (self.x(), self.b(0)),
        ]);
        e
    }
}

pub fn ladder_gadget(k: i64) -> Result<LadderGadget> {
    if k < 0 {
        return Err(Error::InvalidArgument(format!("ladder length {k} is negative")));
    }
    let ids = LadderIds { k: k as u32 };
    let graph = LabeledGraph::from_edges(ids.size(), &ids.edges())?;
    Ok(LadderGadget { k: k as u32, graph, x: ids.x() })
}

/// Parameters of the encoding: maximum degree of inputs and largest label.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AbScheme {
    pub max_degree: usize,
    pub max_label: Label,
}

/// Standalone node gadget of degree `d` and label `k` (ports have degree 2).
pub fn node_gadget_graph(d: usize, k: u32) -> LabeledGraph {
    let mut b = Builder::default();
    let cyc: Vec<VertexId> = (0..d + 2).map(|_| b.fresh()).collect();
    for i in 0..cyc.len() {
        b.edge(cyc[i], cyc[(i + 1) % cyc.len()]);
    }
    b.ladder(k, cyc[0]);
    b.ladder(k, cyc[1]);
    b.g
}

/// Standalone edge gadget including both port vertices as path ends.
pub fn edge_gadget_graph(k1: u32, k2: u32) -> LabeledGraph {
    let mut b = Builder::default();
    let (p, a, a2, q) = (b.fresh(), b.fresh(), b.fresh(), b.fresh());
    b.edge(p, a);
    b.edge(a, a2);
    b.edge(a2, q);
    b.ladder(k1, a);
    b.ladder(k2, a2);
    b.g
}

/// Three times the largest gadget diameter for the scheme.
pub fn lambda(s: &AbScheme) -> u32 {
    let mut best = 0;
    for k in 0..=s.max_label as u32 {
        for d in 1..=s.max_degree {
            best = best.max(node_gadget_graph(d, k).diameter().expect("connected"));
        }
        for k2 in 0..=s.max_label as u32 {
            best = best.max(edge_gadget_graph(k, k2).diameter().expect("connected"));
        }
    }
    3 * best
}

#[derive(Default)]
struct Builder {
    g: LabeledGraph,
    next: VertexId,
    created: Vec<VertexId>,
}

impl Builder {
    fn fresh(&mut self) -> VertexId {
        let v = self.next;
        self.next += 1;
        self.g.add_vertex(v);
        self.created.push(v);
        v
    }
    fn edge(&mut self, u: VertexId, v: VertexId) {
        self.g.add_edge(u, v).expect("builder edges are new");
    }
    /// Adds `H_k` and attaches its x to `at`.
    fn ladder(&mut self, k: u32, at: VertexId) {
        let ids = LadderIds { k };
        let base = self.next;
        for _ in 0..ids.size() {
            self.fresh();
        }
        for (u, v) in ids.edges() {
            self.edge(base + u, base + v);
        }
        self.edge(base + ids.x(), at);
    }
}

/// What a vertex of an encoding stands for.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Role {
    Node { v: VertexId, idx: u32 },
    Edge { u: VertexId, v: VertexId, idx: u32 },
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodedNode {
    pub label: Label,
    pub vertices: Vec<VertexId>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct DecodedEdge {
    /// Decoded endpoints with `u <= v`.
    pub u: VertexId,
    pub v: VertexId,
    /// Oriented pair (label on the `u` side, label on the `v` side), or `BOTTOM` if malformed.
    pub label: Label,
    pub vertices: Vec<VertexId>,
    pub malformed: bool,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Owner {
    Node(VertexId),
    Edge(usize),
    Malformed,
}

/// Correspondence between decoded objects and vertex sets of the cubic graph.
/// Decoded node ids are the smallest vertex id of their gadget; malformed
/// vertices keep their own id.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct DecodeMap {
    pub nodes: BTreeMap<VertexId, DecodedNode>,
    pub edges: Vec<DecodedEdge>,
    pub malformed_vertices: BTreeSet<VertexId>,
    pub owner: BTreeMap<VertexId, Owner>,
    #[serde(default)]
    pub diagnostics: Vec<String>,
}

impl DecodeMap {
    pub fn malformed_edge_count(&self) -> usize {
        self.edges.iter().filter(|e| e.malformed).count()
    }

    pub fn is_clean(&self) -> bool {
        self.malformed_vertices.is_empty() && self.malformed_edge_count() == 0
    }

    /// Decoded id a vertex maps to (`None` inside edge gadgets).
    pub fn decoded_vertex(&self, v: VertexId) -> Option<VertexId> {
        match self.owner.get(&v)? {
            Owner::Node(r) => Some(*r),
            Owner::Malformed => Some(v),
            Owner::Edge(_) => None,
        }
    }

    pub fn decoded_graph(&self) -> MultiGraph {
        let mut vertices: BTreeMap<VertexId, Option<Label>> =
            self.nodes.iter().map(|(&r, n)| (r, Some(n.label))).collect();
        for &m in &self.malformed_vertices {
            vertices.insert(m, Some(BOTTOM));
        }
        MultiGraph {
            vertices,
            edges: self
                .edges
                .iter()
                .map(|e| MultiEdge { u: e.u, v: e.v, label: Some(e.label) })
                .collect(),
        }
    }

    /// JSON form `{"nodes":{u:[ids]}, "edges":{"u-v":[ids]}, "malformed_vertices":[ids]}`.
    pub fn to_json_value(&self) -> serde_json::Value {
        let nodes: serde_json::Map<String, serde_json::Value> = self
            .nodes
            .iter()
            .map(|(r, n)| (r.to_string(), serde_json::json!(n.vertices)))
            .collect();
        let mut edges = serde_json::Map::new();
        for e in &self.edges {
            let mut key = format!("{}-{}", e.u, e.v);
            let mut i = 1;
            while edges.contains_key(&key) {
                i += 1;
                key = format!("{}-{}#{i}", e.u, e.v);
            }
            edges.insert(key, serde_json::json!(e.vertices));
        }
        let labels: serde_json::Map<String, serde_json::Value> = self
            .nodes
            .iter()
            .map(|(r, n)| (r.to_string(), serde_json::json!(n.label)))
            .collect();
        serde_json::json!({
            "nodes": nodes,
            "edges": edges,
            "malformed_vertices": self.malformed_vertices,
            "node_labels": labels,
            "diagnostics": self.diagnostics,
        })
    }
}

#[derive(Clone, Debug)]
pub struct Encoding {
    pub graph: LabeledGraph,
    pub map: DecodeMap,
    pub roles: BTreeMap<VertexId, Role>,
    /// Original vertex -> decoded id of its node gadget.
    pub rep_of: BTreeMap<VertexId, VertexId>,
}

impl Encoding {
    /// Vertex of the encoding with the given role.
    pub fn vertex_with_role(&self, role: Role) -> Option<VertexId> {
        self.roles.iter().find(|(_, &r)| r == role).map(|(&v, _)| v)
    }
}

fn node_label_of(g: &LabeledGraph, v: VertexId, s: &AbScheme) -> Result<u32> {
    let l = g.node_label(v).ok_or(Error::MissingLabel(v))?;
    if l > s.max_label {
        return Err(Error::InvalidArgument(format!("label {l} of vertex {v} exceeds {}", s.max_label)));
    }
    Ok(l as u32)
}

/// How the neighbors of a vertex are matched to the attachment vertices of its gadget.
#[derive(Clone, Copy, Debug)]
pub enum PortOrder<'a> {
    /// By position in the canonical order of the labeled input, so that
    /// isomorphic inputs get isomorphic encodings. Falls back to vertex ids
    /// (with a diagnostic) if the canonical search runs out of budget.
    Canonical,
    /// By vertex id.
    ById,
    /// By the given rank, e.g. unique identifiers. Must cover every vertex.
    Ranked(&'a BTreeMap<VertexId, u64>),
}

/// Encodes `g` (node labels in `0..=max_label`) into a cubic graph.
pub fn encode_ab(g: &LabeledGraph, s: &AbScheme) -> Result<Encoding> {
    encode_ab_with(g, s, PortOrder::Canonical)
}

pub fn encode_ab_with(g: &LabeledGraph, s: &AbScheme, order: PortOrder) -> Result<Encoding> {
    for v in g.vertices() {
        if g.degree(v) == 0 {
            return Err(Error::IsolatedVertex(v));
        }
        if g.degree(v) > s.max_degree {
            return Err(Error::InvalidArgument(format!(
                "vertex {v} has degree {} above {}",
                g.degree(v),
                s.max_degree
            )));
        }
        node_label_of(g, v, s)?;
    }
    let mut map = DecodeMap::default();
    let rank: BTreeMap<VertexId, u64> = match order {
        PortOrder::Canonical => match canonical_order(g, DEFAULT_CANON_BUDGET) {
            Some(o) => o.into_iter().enumerate().map(|(i, v)| (v, i as u64)).collect(),
            None => {
                map.diagnostics.push("canonical order over budget; ports follow vertex ids".into());
                g.vertices().map(|v| (v, v as u64)).collect()
            }
        },
        PortOrder::ById => g.vertices().map(|v| (v, v as u64)).collect(),
        PortOrder::Ranked(r) => {
            for v in g.vertices() {
                if !r.contains_key(&v) {
                    return Err(Error::InvalidArgument(format!("no rank for vertex {v}")));
                }
            }
            r.clone()
        }
    };
    let mut b = Builder::default();
    let mut roles = BTreeMap::new();
    let mut rep_of = BTreeMap::new();
    let mut ports: HashMap<(VertexId, VertexId), VertexId> = HashMap::new();
    for v in g.vertices() {
        let k = node_label_of(g, v, s)?;
        let d = g.degree(v);
        b.created.clear();
        let cyc: Vec<VertexId> = (0..d + 2).map(|_| b.fresh()).collect();
        for i in 0..cyc.len() {
            b.edge(cyc[i], cyc[(i + 1) % cyc.len()]);
        }
        b.ladder(k, cyc[0]);
        b.ladder(k, cyc[1]);
        let mut nbrs: Vec<VertexId> = g.neighbors(v).collect();
        nbrs.sort_by_key(|u| (rank[u], *u));
        for (i, u) in nbrs.into_iter().enumerate() {
            ports.insert((v, u), cyc[2 + i]);
        }
        let verts = std::mem::take(&mut b.created);
        for (idx, &x) in verts.iter().enumerate() {
            roles.insert(x, Role::Node { v, idx: idx as u32 });
            map.owner.insert(x, Owner::Node(verts[0]));
        }
        rep_of.insert(v, verts[0]);
        map.nodes.insert(verts[0], DecodedNode { label: k as Label, vertices: verts });
    }
    for (u, v) in g.edges() {
        let (ku, kv) = (node_label_of(g, u, s)?, node_label_of(g, v, s)?);
        b.created.clear();
        let (a, a2) = (b.fresh(), b.fresh());
        b.edge(ports[&(u, v)], a);
        b.edge(a, a2);
        b.edge(a2, ports[&(v, u)]);
        b.ladder(ku, a);
        b.ladder(kv, a2);
        let verts = std::mem::take(&mut b.created);
        let ei = map.edges.len();
        for (idx, &x) in verts.iter().enumerate() {
            roles.insert(x, Role::Edge { u, v, idx: idx as u32 });
            map.owner.insert(x, Owner::Edge(ei));
        }
        let (ru, rv) = (rep_of[&u], rep_of[&v]);
        let (du, dv, label) = if ru <= rv {
            (ru, rv, pack_pair(ku, kv))
        } else {
            (rv, ru, pack_pair(kv, ku))
        };
        let mut sorted = verts;
        sorted.sort_unstable();
        map.edges.push(DecodedEdge { u: du, v: dv, label, vertices: sorted, malformed: false });
    }
    map.edges.sort();
    // Re-point edge owners after sorting.
    for (i, e) in map.edges.iter().enumerate() {
        for &x in &e.vertices {
            map.owner.insert(x, Owner::Edge(i));
        }
    }
    for n in map.nodes.values_mut() {
        n.vertices.sort_unstable();
    }
    Ok(Encoding { graph: b.g, map, roles, rep_of })
}

#[derive(Clone, Debug)]
struct Ladder {
    x: VertexId,
    attach: VertexId,
    k: u32,
    vertices: BTreeSet<VertexId>,
}

fn nb(g: &LabeledGraph, v: VertexId) -> Vec<VertexId> {
    g.neighbors(v).collect()
}

/// The single neighbor of `v` outside `excl`, if `v` has degree 3 and exactly one such neighbor.
fn other_neighbor(g: &LabeledGraph, v: VertexId, excl: &[VertexId]) -> Option<VertexId> {
    if g.degree(v) != 3 || excl.iter().any(|&e| !g.has_edge(v, e)) {
        return None;
    }
    let rest: Vec<VertexId> = g.neighbors(v).filter(|w| !excl.contains(w)).collect();
    (rest.len() == 1).then(|| rest[0])
}

/// Finds the ladder whose diamond edge is `(u, v)`.
fn ladder_from_diamond(g: &LabeledGraph, u: VertexId, v: VertexId, max_label: Label) -> Option<Ladder> {
    if g.degree(u) != 3 || g.degree(v) != 3 {
        return None;
    }
    let nu = g.neighbor_set(u)?;
    let common: Vec<VertexId> = g.neighbors(v).filter(|w| nu.contains(w)).collect();
    if common.len() != 2 || g.has_edge(common[0], common[1]) {
        return None;
    }
    let (t, w) = (common[0], common[1]);
    let mut pa = other_neighbor(g, t, &[u, v])?;
    let mut pb = other_neighbor(g, w, &[u, v])?;
    if pa == pb || !g.has_edge(pa, pb) {
        return None;
    }
    let mut verts: BTreeSet<VertexId> = [u, v, t, w, pa, pb].into_iter().collect();
    let (mut prev_a, mut prev_b) = (t, w);
    let mut rungs = 1u32;
    loop {
        let na = other_neighbor(g, pa, &[prev_a, pb])?;
        let nb_ = other_neighbor(g, pb, &[prev_b, pa])?;
        if na == nb_ {
            let x = na;
            if g.degree(x) != 3 || verts.contains(&x) {
                return None;
            }
            let attach = other_neighbor(g, x, &[pa, pb])?;
            verts.insert(x);
            let k = rungs - 1;
            if verts.len() != 2 * k as usize + 7 || verts.contains(&attach) {
                return None;
            }
            return Some(Ladder { x, attach, k, vertices: verts });
        }
        if (rungs as Label) > max_label || !g.has_edge(na, nb_) || verts.contains(&na) || verts.contains(&nb_) {
            return None;
        }
        verts.insert(na);
        verts.insert(nb_);
        prev_a = pa;
        prev_b = pb;
        pa = na;
        pb = nb_;
        rungs += 1;
    }
}

fn find_ladders(g: &LabeledGraph, max_label: Label) -> Vec<Ladder> {
    let mut by_x: BTreeMap<VertexId, Ladder> = BTreeMap::new();
    for (u, v) in g.edges() {
        if let Some(l) = ladder_from_diamond(g, u, v, max_label) {
            by_x.entry(l.x).or_insert(l);
        }
    }
    by_x.into_values().collect()
}

#[derive(Clone, Debug)]
struct NodeCandidate {
    k: u32,
    vertices: BTreeSet<VertexId>,
    ports: Vec<VertexId>,
}

/// Simple paths `from -> ... -> to` with exactly `len` edges, avoiding `blocked`.
fn paths_of_length(
    g: &LabeledGraph,
    from: VertexId,
    to: VertexId,
    len: usize,
    blocked: &dyn Fn(VertexId) -> bool,
    out: &mut Vec<Vec<VertexId>>,
) {
    fn rec(
        g: &LabeledGraph,
        path: &mut Vec<VertexId>,
        to: VertexId,
        len: usize,
        blocked: &dyn Fn(VertexId) -> bool,
        out: &mut Vec<Vec<VertexId>>,
    ) {
        let cur = *path.last().unwrap();
        if path.len() - 1 == len {
            if cur == to {
                out.push(path.clone());
            }
            return;
        }
        for w in nb(g, cur) {
            let last_step = path.len() == len;
            if (w == to) != last_step || path.contains(&w) || (w != to && blocked(w)) {
                continue;
            }
            path.push(w);
            rec(g, path, to, len, blocked, out);
            path.pop();
        }
    }
    let mut path = vec![from];
    rec(g, &mut path, to, len, blocked, out);
}

fn node_candidates(g: &LabeledGraph, s: &AbScheme, ladders: &[Ladder]) -> Vec<NodeCandidate> {
    let mut attached: HashMap<VertexId, Vec<usize>> = HashMap::new();
    let mut in_ladder: BTreeSet<VertexId> = BTreeSet::new();
    for (i, l) in ladders.iter().enumerate() {
        attached.entry(l.attach).or_default().push(i);
        in_ladder.extend(l.vertices.iter().copied());
    }
    let single = |v: VertexId| match attached.get(&v) {
        Some(ls) if ls.len() == 1 => Some(ls[0]),
        _ => None,
    };
    let mut seen: BTreeSet<Vec<VertexId>> = BTreeSet::new();
    let mut cands = vec![];
    for (p1, p2) in g.edges() {
        let (Some(l1), Some(l2)) = (single(p1), single(p2)) else {
            continue;
        };
        let (l1, l2) = (&ladders[l1], &ladders[l2]);
        if l1.k != l2.k || in_ladder.contains(&p1) || in_ladder.contains(&p2) {
            continue;
        }
        if !l1.vertices.is_disjoint(&l2.vertices) {
            continue;
        }
        let blocked = |w: VertexId| in_ladder.contains(&w) || attached.contains_key(&w);
        for len in 3..=s.max_degree + 2 {
            let mut paths = vec![];
            paths_of_length(g, p2, p1, len - 1, &blocked, &mut paths);
            for path in paths {
                let cyc: BTreeSet<VertexId> = path.iter().copied().collect();
                let induced = g.induced(&cyc).edge_count();
                if induced != len {
                    continue;
                }
                let ports: Vec<VertexId> = path[1..path.len() - 1].to_vec();
                let ports_ok = ports.iter().all(|&p| {
                    g.degree(p) == 3 && g.neighbors(p).filter(|w| !cyc.contains(w)).count() == 1
                });
                if !ports_ok || g.degree(p1) != 3 || g.degree(p2) != 3 {
                    continue;
                }
                let mut vertices = cyc.clone();
                vertices.extend(l1.vertices.iter().copied());
                vertices.extend(l2.vertices.iter().copied());
                // Ports' outside neighbors must leave the gadget.
                if ports
                    .iter()
                    .any(|&p| g.neighbors(p).any(|w| !cyc.contains(&w) && vertices.contains(&w)))
                {
                    continue;
                }
                let key: Vec<VertexId> = vertices.iter().copied().collect();
                if seen.insert(key) {
                    let mut ports = ports;
                    ports.sort_unstable();
                    cands.push(NodeCandidate { k: l1.k, vertices, ports });
                }
            }
        }
    }
    cands
}

/// Decodes a cubic (or arbitrary) graph. Never fails: unrecognized structure is malformed.
pub fn decode_ab(g: &LabeledGraph, s: &AbScheme) -> (MultiGraph, DecodeMap) {
    let ladders = find_ladders(g, s.max_label);
    let mut cands = node_candidates(g, s, &ladders);
    cands.sort_by(|a, b| {
        b.vertices
            .len()
            .cmp(&a.vertices.len())
            .then_with(|| a.vertices.iter().next().cmp(&b.vertices.iter().next()))
    });
    let mut map = DecodeMap::default();
    let mut used: BTreeSet<VertexId> = BTreeSet::new();
    let mut accepted: Vec<NodeCandidate> = vec![];
    let mut overlaps = 0;
    for c in cands {
        if c.vertices.is_disjoint(&used) {
            used.extend(c.vertices.iter().copied());
            accepted.push(c);
        } else {
            overlaps += 1;
        }
    }
    if overlaps > 0 {
        map.diagnostics.push(format!("{overlaps} overlapping node-gadget candidates discarded"));
    }
    let mut port_owner: HashMap<VertexId, VertexId> = HashMap::new();
    for c in &accepted {
        let rep = *c.vertices.iter().next().unwrap();
        for &v in &c.vertices {
            map.owner.insert(v, Owner::Node(rep));
        }
        for &p in &c.ports {
            port_owner.insert(p, rep);
        }
        map.nodes.insert(
            rep,
            DecodedNode { label: c.k as Label, vertices: c.vertices.iter().copied().collect() },
        );
    }
    // Edge gadgets.
    let ladder_at: HashMap<VertexId, Vec<&Ladder>> = ladders.iter().fold(HashMap::new(), |mut m, l| {
        m.entry(l.attach).or_insert_with(Vec::new).push(l);
        m
    });
    let one_ladder = |v: VertexId| match ladder_at.get(&v) {
        Some(ls) if ls.len() == 1 => Some(ls[0]),
        _ => None,
    };
    let mut reps: Vec<VertexId> = map.nodes.keys().copied().collect();
    reps.sort_unstable();
    let mut found_edges: Vec<DecodedEdge> = vec![];
    let mut ports_sorted: Vec<(VertexId, VertexId)> = port_owner.iter().map(|(&p, &r)| (r, p)).collect();
    ports_sorted.sort_unstable();
    for (rep, p) in ports_sorted {
        let Some(a) = g.neighbors(p).find(|w| !map.owner.contains_key(w) || map.owner.get(w) != Some(&Owner::Node(rep))) else {
            continue;
        };
        if used.contains(&a) || g.degree(a) != 3 {
            continue;
        }
        let Some(la) = one_ladder(a) else { continue };
        let Some(a2) = other_neighbor(g, a, &[p, la.x]) else { continue };
        if used.contains(&a2) || a2 == p {
            continue;
        }
        let Some(la2) = one_ladder(a2) else { continue };
        let Some(q) = other_neighbor(g, a2, &[a, la2.x]) else { continue };
        let Some(&qrep) = port_owner.get(&q) else { continue };
        if qrep == rep || q == p {
            continue;
        }
        let mut verts: BTreeSet<VertexId> = [a, a2].into_iter().collect();
        if !la.vertices.is_disjoint(&la2.vertices) {
            continue;
        }
        verts.extend(la.vertices.iter().copied());
        verts.extend(la2.vertices.iter().copied());
        if !verts.is_disjoint(&used) || verts.len() != 2 + la.vertices.len() + la2.vertices.len() {
            continue;
        }
        used.extend(verts.iter().copied());
        let (u, v, label) = if rep <= qrep {
            (rep, qrep, pack_pair(la.k, la2.k))
        } else {
            (qrep, rep, pack_pair(la2.k, la.k))
        };
        found_edges.push(DecodedEdge { u, v, label, vertices: verts.into_iter().collect(), malformed: false });
    }
    // Malformed vertices and edges.
    for v in g.vertices() {
        if !used.contains(&v) {
            map.malformed_vertices.insert(v);
            map.owner.insert(v, Owner::Malformed);
        }
    }
    let mut in_edge_gadget: HashMap<VertexId, usize> = HashMap::new();
    for (i, e) in found_edges.iter().enumerate() {
        for &x in &e.vertices {
            in_edge_gadget.insert(x, i);
        }
    }
    for (x, y) in g.edges() {
        if in_edge_gadget.contains_key(&x) || in_edge_gadget.contains_key(&y) {
            continue;
        }
        let dx = match map.owner[&x] {
            Owner::Node(r) => r,
            _ => x,
        };
        let dy = match map.owner[&y] {
            Owner::Node(r) => r,
            _ => y,
        };
        let both_same_gadget = matches!((map.owner[&x], map.owner[&y]), (Owner::Node(a), Owner::Node(b)) if a == b);
        if both_same_gadget {
            continue;
        }
        let (u, v) = if dx <= dy { (dx, dy) } else { (dy, dx) };
        let mut vs = vec![x, y];
        vs.sort_unstable();
        found_edges.push(DecodedEdge { u, v, label: BOTTOM, vertices: vs, malformed: true });
    }
    found_edges.sort();
    for (i, e) in found_edges.iter().enumerate() {
        if !e.malformed {
            for &x in &e.vertices {
                map.owner.insert(x, Owner::Edge(i));
            }
        }
    }
    map.edges = found_edges;
    let m = map.decoded_graph();
    (m, map)
}

/// Checks a decoding against the source labeled graph: isomorphic with
/// equal node labels, and every decoded edge carries its endpoints' labels.
pub fn matches_source(decoded: &MultiGraph, source: &LabeledGraph) -> bool {
    if !decoded.is_simple() {
        return false;
    }
    let (simple, _) = decoded.to_simple();
    let ok_edges = decoded.edges.iter().all(|e| {
        let (a, b) = unpack_pair(e.label.unwrap_or(BOTTOM));
        e.label != Some(BOTTOM)
            && simple.node_label(e.u) == Some(a as Label)
            && simple.node_label(e.v) == Some(b as Label)
    });
    ok_edges
        && graph_iso(
            &simple,
            source,
            IsoOptions { node_labels: true, edge_labels: false },
        )
}

/// Result of decoding around one vertex.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum LocalDecode {
    NodeGadget {
        decoded: VertexId,
        label: Label,
        /// Decoded radius-1 ball: the decoded vertex and its incident decoded edges.
        star: MultiGraph,
        representative: VertexId,
        is_representative: bool,
        /// Shortest path in the cubic graph from the queried vertex to the
        /// representative of each vertex of the star.
        paths: BTreeMap<VertexId, Vec<VertexId>>,
    },
    EdgeGadget,
    Malformed,
}

/// Radius-1 decoded star of `d`.
pub fn decoded_star(m: &MultiGraph, d: VertexId) -> MultiGraph {
    let edges: Vec<MultiEdge> = m.edges.iter().filter(|e| e.u == d || e.v == d).cloned().collect();
    let mut vertices = BTreeMap::new();
    vertices.insert(d, m.vertices.get(&d).copied().flatten());
    for e in &edges {
        for x in [e.u, e.v] {
            vertices.insert(x, m.vertices.get(&x).copied().flatten());
        }
    }
    MultiGraph { vertices, edges }
}

/// Isomorphism-invariant signature of a decoded star around `center`.
pub fn star_signature(star: &MultiGraph, center: VertexId) -> (Option<Label>, Vec<(Option<Label>, Option<Label>, bool)>) {
    let mut items: Vec<(Option<Label>, Option<Label>, bool)> = star
        .edges
        .iter()
        .map(|e| {
            let other = if e.u == center { e.v } else { e.u };
            // Orient the pair label so it reads from the center outward.
            let label = match e.label {
                Some(l) if l != BOTTOM && e.u != center => {
                    let (a, b) = unpack_pair(l);
                    Some(pack_pair(b, a))
                }
                l => l,
            };
            (label, star.vertices.get(&other).copied().flatten(), e.u == e.v)
        })
        .collect();
    items.sort();
    (star.vertices.get(&center).copied().flatten(), items)
}

/// Decodes the radius-`lambda` ball of `v`. Representatives are elected by
/// smallest identifier under `ids` (vertex id when absent).
pub fn local_decode(
    g: &LabeledGraph,
    v: VertexId,
    s: &AbScheme,
    lam: u32,
    ids: Option<&BTreeMap<VertexId, u64>>,
) -> Result<LocalDecode> {
    let b = ball(g, v, lam)?;
    let (m, map) = decode_ab(&b.graph, s);
    Ok(match map.owner[&v] {
        Owner::Edge(_) => LocalDecode::EdgeGadget,
        Owner::Malformed => LocalDecode::Malformed,
        Owner::Node(d) => {
            let id = |x: VertexId| ids.map_or(x as u64, |m| m[&x]);
            let rep_of = |dv: VertexId| -> VertexId {
                match map.nodes.get(&dv) {
                    Some(n) => *n.vertices.iter().min_by_key(|&&x| id(x)).unwrap(),
                    None => dv,
                }
            };
            let star = decoded_star(&m, d);
            let mut paths = BTreeMap::new();
            for &w in star.vertices.keys() {
                let target = rep_of(w);
                if let Some(p) = b.graph.shortest_path(v, target)? {
                    paths.insert(w, p);
                }
            }
            let representative = rep_of(d);
            LocalDecode::NodeGadget {
                decoded: d,
                label: map.nodes[&d].label,
                star,
                representative,
                is_representative: representative == v,
                paths,
            }
        }
    })
}

/// Output of a decoded vertex: the common output of its gadget, if uniform.
fn decoded_output(map: &DecodeMap, out: &BTreeMap<VertexId, Label>, d: VertexId) -> Option<Label> {
    match map.nodes.get(&d) {
        Some(n) => {
            let first = out.get(&n.vertices[0]).copied()?;
            n.vertices.iter().all(|x| out.get(x) == Some(&first)).then_some(first)
        }
        None => out.get(&d).copied(),
    }
}

type DecodeCache = Arc<Mutex<HashMap<(Vec<VertexId>, Vec<(VertexId, VertexId)>), Arc<(MultiGraph, DecodeMap)>>>>;

/// Shared state of a derived input-free problem.
#[derive(Clone)]
pub struct ProblemBContext {
    pub a: LclProblem,
    pub scheme: AbScheme,
    pub lambda: u32,
    cache: DecodeCache,
}

impl ProblemBContext {
    pub fn new(a: LclProblem, scheme: AbScheme) -> Result<Self> {
        if a.edge_outputs || !a.node_outputs {
            return Err(Error::InvalidArgument("the source problem must have node outputs only".into()));
        }
        Ok(ProblemBContext { lambda: lambda(&scheme), a, scheme, cache: Arc::default() })
    }

    pub fn radius(&self) -> u32 {
        self.lambda * self.a.radius
    }

    fn decode_cached(&self, g: &LabeledGraph) -> Arc<(MultiGraph, DecodeMap)> {
        let key = (g.vertices().collect(), g.edges().collect());
        if let Some(d) = self.cache.lock().unwrap().get(&key) {
            return d.clone();
        }
        let d = Arc::new(decode_ab(g, &self.scheme));
        self.cache.lock().unwrap().insert(key, d.clone());
        d
    }

    /// Membership of a labeled ball in the derived constraint.
    pub fn membership(&self, b: &CenteredGraph, out: &OutputLabeling) -> bool {
        let dec = self.decode_cached(&b.graph);
        let (m, map) = (&dec.0, &dec.1);
        let Some(Owner::Node(d)) = map.owner.get(&b.center).copied() else {
            return true;
        };
        let mine = match decoded_output(map, &out.nodes, d) {
            Some(l) if l != BOTTOM && self.a.output_alphabet.contains(l) => l,
            _ => return false,
        };
        let (simple, _) = m.to_simple();
        let mut outs = BTreeMap::new();
        for x in simple.vertices() {
            if let Some(l) = decoded_output(map, &out.nodes, x) {
                outs.insert(x, l);
            }
        }
        outs.insert(d, mine);
        let Ok(db) = ball(&simple, d, self.a.radius) else {
            return false;
        };
        let o = OutputLabeling::from_nodes(outs).restrict(&db.graph);
        self.a.accepts(&db, &o)
    }

    /// The derived problem as an LCL over cubic graphs with outputs `Σ_A ∪ {⊥}`.
    pub fn problem(&self) -> LclProblem {
        let ctx = self.clone();
        let inner = self.a.output_alphabet.clone();
        LclProblem {
            name: format!("{}-encoded", self.a.name),
            max_degree: 3,
            input_alphabet: None,
            output_alphabet: Alphabet::Predicate(Arc::new(move |l| l == BOTTOM || inner.contains(l))),
            radius: self.radius(),
            node_outputs: true,
            edge_outputs: false,
            constraint: LclConstraint::Oracle(Arc::new(move |b, o| ctx.membership(b, o))),
        }
    }
}

/// Standalone membership test for the derived constraint.
pub fn problem_b_membership(a: &LclProblem, scheme: &AbScheme, b: &CenteredGraph, out: &OutputLabeling) -> Result<bool> {
    Ok(ProblemBContext::new(a.clone(), *scheme)?.membership(b, out))
}

/// Gadget vertices take their decoded vertex's output, all others `BOTTOM`.
pub fn lift_out_a_to_b(sigma_a: &BTreeMap<VertexId, Label>, dm: &DecodeMap) -> BTreeMap<VertexId, Label> {
    dm.owner
        .iter()
        .map(|(&v, o)| {
            let l = match o {
                Owner::Node(r) => sigma_a.get(r).copied().unwrap_or(BOTTOM),
                _ => BOTTOM,
            };
            (v, l)
        })
        .collect()
}

/// Each decoded vertex reads the output at its representative vertex.
pub fn lift_out_b_to_a(sigma_b: &BTreeMap<VertexId, Label>, dm: &DecodeMap) -> BTreeMap<VertexId, Label> {
    dm.nodes
        .keys()
        .filter_map(|&r| sigma_b.get(&r).map(|&l| (r, l)))
        .collect()
}

/// Renames a decoded-id labeling back to original vertex ids.
pub fn to_original_ids(sigma: &BTreeMap<VertexId, Label>, enc: &Encoding) -> BTreeMap<VertexId, Label> {
    enc.rep_of
        .iter()
        .filter_map(|(&v, r)| sigma.get(r).map(|&l| (v, l)))
        .collect()
}

/// Renames an original-id labeling to decoded ids.
pub fn to_decoded_ids(sigma: &BTreeMap<VertexId, Label>, enc: &Encoding) -> BTreeMap<VertexId, Label> {
    enc.rep_of
        .iter()
        .filter_map(|(v, &r)| sigma.get(v).map(|&l| (r, l)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::graph::gen;

    fn labeled(mut g: LabeledGraph, labels: &[Label]) -> LabeledGraph {
        for (v, &l) in labels.iter().enumerate() {
            g.set_node_label(v as VertexId, l).unwrap();
        }
        g
    }

    const S: AbScheme = AbScheme { max_degree: 3, max_label: 2 };

    #[test]
    fn ladder_sizes() {
        let h0 = ladder_gadget(0).unwrap();
        assert_eq!((h0.graph.vertex_count(), h0.graph.edge_count()), (7, 10));
        let h1 = ladder_gadget(1).unwrap();
        assert_eq!(h1.graph.vertex_count(), 9);
        for v in h1.graph.vertices() {
            assert_eq!(h1.graph.degree(v), if v == h1.x { 2 } else { 3 });
        }
        for k in 0..6 {
            let h = ladder_gadget(k).unwrap();
            assert_eq!(h.graph.vertex_count() as i64, 2 * k + 7);
            assert_eq!(h.graph.edge_count() as i64, 3 * k + 10);
        }
        assert!(ladder_gadget(-1).is_err());
    }

    #[test]
    fn ladder_has_one_triangle_through_x() {
        let h = ladder_gadget(2).unwrap();
        let g = &h.graph;
        let mut tri = vec![];
        for (u, v) in g.edges() {
            for w in g.neighbors(u) {
                if w > v && g.has_edge(v, w) {
                    tri.push([u, v, w]);
                }
            }
        }
        let through_x: Vec<_> = tri.iter().filter(|t| t.contains(&h.x)).collect();
        assert_eq!(through_x.len(), 1);
    }

    #[test]
    fn k2_encoding_has_62_vertices() {
        let g = labeled(gen::path(2), &[1, 1]);
        let e = encode_ab(&g, &S).unwrap();
        assert_eq!(e.graph.vertex_count(), 62);
        assert!(e.graph.is_regular(3));
    }

    #[test]
    fn isolated_vertex_rejected() {
        let mut g = LabeledGraph::new();
        g.add_vertex(0);
        g.set_node_label(0, 0).unwrap();
        assert_eq!(encode_ab(&g, &S).unwrap_err(), Error::IsolatedVertex(0));
    }

    #[test]
    fn round_trip_small() {
        let g = labeled(gen::star(3), &[2, 0, 1, 1]);
        let e = encode_ab(&g, &S).unwrap();
        let (m, map) = decode_ab(&e.graph, &S);
        assert!(map.is_clean(), "{:?}", map.diagnostics);
        assert_eq!(map, e.map);
        assert!(matches_source(&m, &g));
    }

    #[test]
    fn bipartite_is_all_malformed() {
        let g = gen::complete_bipartite(3, 3);
        let (m, map) = decode_ab(&g, &S);
        assert_eq!(map.malformed_vertices.len(), 6);
        assert_eq!(map.malformed_edge_count(), 9);
        assert!(m.vertices.values().all(|l| *l == Some(BOTTOM)));
    }

    #[test]
    fn injected_chord_breaks_gadgets_locally() {
        let g = labeled(gen::path(2), &[1, 1]);
        let e = encode_ab(&g, &S).unwrap();
        let mut h = e.graph.clone();
        // Add a chord between the two node-gadget cycles' first vertices' far rails.
        let n0 = e.vertex_with_role(Role::Node { v: 0, idx: 0 }).unwrap();
        let n1 = e.vertex_with_role(Role::Node { v: 1, idx: 0 }).unwrap();
        h.add_edge(n0, n1).unwrap();
        let (_, map) = decode_ab(&h, &S);
        assert!(map.nodes.is_empty());
        assert!(map.owner.contains_key(&n0));
        assert!(!map.malformed_vertices.is_empty());
        // The ladders of the edge gadget alone do not make an edge gadget.
        assert!(map.edges.iter().all(|e| e.malformed));
    }

    #[test]
    fn lambda_bounds_every_gadget() {
        let lam = lambda(&S);
        assert!(lam >= 3);
        let g = labeled(gen::complete(4), &[0, 1, 2, 2]);
        let e = encode_ab(&g, &S).unwrap();
        for n in e.map.nodes.values() {
            let set: BTreeSet<_> = n.vertices.iter().copied().collect();
            assert!(e.graph.induced(&set).diameter().unwrap() <= lam / 3);
        }
    }

    #[test]
    fn local_decode_agrees_with_global() {
        let g = labeled(gen::path(3), &[1, 0, 2]);
        let e = encode_ab(&g, &S).unwrap();
        let lam = lambda(&S);
        let (m, map) = decode_ab(&e.graph, &S);
        for v in e.graph.vertices() {
            let ld = local_decode(&e.graph, v, &S, lam, None).unwrap();
            match (map.owner[&v], ld) {
                (Owner::Node(d), LocalDecode::NodeGadget { decoded, star, is_representative, representative, paths, .. }) => {
                    assert_eq!(decoded, d);
                    assert_eq!(star_signature(&star, d), star_signature(&decoded_star(&m, d), d));
                    assert_eq!(is_representative, v == d);
                    assert_eq!(representative, d);
                    for p in paths.values() {
                        assert!(p.len() as u32 - 1 <= lam);
                    }
                }
                (Owner::Edge(_), LocalDecode::EdgeGadget) => {}
                (o, l) => panic!("{v}: {o:?} vs {l:?}"),
            }
        }
    }

    #[test]
    fn lifts_round_trip() {
        let g = labeled(gen::path(3), &[1, 0, 2]);
        let e = encode_ab(&g, &S).unwrap();
        let sigma: BTreeMap<_, _> = e.map.nodes.keys().map(|&r| (r, (r % 4) as Label + 1)).collect();
        let b = lift_out_a_to_b(&sigma, &e.map);
        assert_eq!(lift_out_b_to_a(&b, &e.map), sigma);
        for (v, o) in &e.map.owner {
            if matches!(o, Owner::Edge(_)) {
                assert_eq!(b[v], BOTTOM);
            }
        }
    }
}
