//! Simple labeled graphs, balls, and the two-weight gadget metric.

use std::collections::{BTreeMap, BTreeSet, HashMap, VecDeque};
use std::fmt::Write as _;

use num_rational::Ratio;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type VertexId = u32;
pub type Label = u64;
pub type EdgeKey = (VertexId, VertexId);

/// Default label used for malformed parts and "don't care" outputs.
pub const BOTTOM: Label = u64::MAX;

pub fn edge_key(u: VertexId, v: VertexId) -> EdgeKey {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// Packs two 32-bit labels into one.
pub fn pack_pair(a: u32, b: u32) -> Label {
    ((a as u64) << 32) | b as u64
}

pub fn unpack_pair(l: Label) -> (u32, u32) {
    ((l >> 32) as u32, l as u32)
}

/// Edge weight of the gadget metric, in half units.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Weight {
    Zero,
    Half,
}

impl Weight {
    pub fn halves(self) -> u32 {
        match self {
            Weight::Zero => 0,
            Weight::Half => 1,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(into = "GraphJson", try_from = "GraphJson")]
pub struct LabeledGraph {
    adj: BTreeMap<VertexId, BTreeSet<VertexId>>,
    node_labels: BTreeMap<VertexId, Label>,
    edge_labels: BTreeMap<EdgeKey, Label>,
    edge_weights: BTreeMap<EdgeKey, Weight>,
}

impl LabeledGraph {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_edges(n: u32, edges: &[(VertexId, VertexId)]) -> Result<Self> {
        let mut g = Self::new();
        for v in 0..n {
            g.add_vertex(v);
        }
        for &(u, v) in edges {
            g.add_edge(u, v)?;
        }
        Ok(g)
    }

    pub fn add_vertex(&mut self, v: VertexId) {
        self.adj.entry(v).or_default();
    }

    pub fn add_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if u == v {
            return Err(Error::SelfLoop(u));
        }
        if !self.adj.contains_key(&u) {
            return Err(Error::UnknownVertex(u));
        }
        if !self.adj.contains_key(&v) {
            return Err(Error::UnknownVertex(v));
        }
        if !self.adj.get_mut(&u).unwrap().insert(v) {
            return Err(Error::DuplicateEdge(u, v));
        }
        self.adj.get_mut(&v).unwrap().insert(u);
        Ok(())
    }

    pub fn remove_edge(&mut self, u: VertexId, v: VertexId) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::UnknownEdge(u, v));
        }
        self.adj.get_mut(&u).unwrap().remove(&v);
        self.adj.get_mut(&v).unwrap().remove(&u);
        let k = edge_key(u, v);
        self.edge_labels.remove(&k);
        self.edge_weights.remove(&k);
        Ok(())
    }

    pub fn remove_vertex(&mut self, v: VertexId) {
        if let Some(nb) = self.adj.remove(&v) {
            for u in nb {
                self.adj.get_mut(&u).unwrap().remove(&v);
                let k = edge_key(u, v);
                self.edge_labels.remove(&k);
                self.edge_weights.remove(&k);
            }
        }
        self.node_labels.remove(&v);
    }

    pub fn contains(&self, v: VertexId) -> bool {
        self.adj.contains_key(&v)
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adj.get(&u).is_some_and(|s| s.contains(&v))
    }

    pub fn vertices(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.keys().copied()
    }

    pub fn edges(&self) -> impl Iterator<Item = EdgeKey> + '_ {
        self.adj
            .iter()
            .flat_map(|(&u, nb)| nb.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adj.get(&v).into_iter().flat_map(|s| s.iter().copied())
    }

    pub fn neighbor_set(&self, v: VertexId) -> Option<&BTreeSet<VertexId>> {
        self.adj.get(&v)
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adj.get(&v).map_or(0, |s| s.len())
    }

    pub fn vertex_count(&self) -> usize {
        self.adj.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adj.values().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn max_degree(&self) -> usize {
        self.adj.values().map(|s| s.len()).max().unwrap_or(0)
    }

    pub fn max_vertex_id(&self) -> Option<VertexId> {
        self.adj.keys().next_back().copied()
    }

    pub fn is_regular(&self, d: usize) -> bool {
        self.adj.values().all(|s| s.len() == d)
    }

    /// Returns the first vertex whose degree differs from 3.
    pub fn check_cubic(&self) -> Result<()> {
        match self.adj.iter().find(|(_, s)| s.len() != 3) {
            Some((&v, s)) => Err(Error::NotCubic(v, s.len())),
            None => Ok(()),
        }
    }

    pub fn node_label(&self, v: VertexId) -> Option<Label> {
        self.node_labels.get(&v).copied()
    }

    pub fn set_node_label(&mut self, v: VertexId, l: Label) -> Result<()> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        self.node_labels.insert(v, l);
        Ok(())
    }

    pub fn clear_node_label(&mut self, v: VertexId) {
        self.node_labels.remove(&v);
    }

    pub fn node_labels(&self) -> &BTreeMap<VertexId, Label> {
        &self.node_labels
    }

    pub fn edge_label(&self, u: VertexId, v: VertexId) -> Option<Label> {
        self.edge_labels.get(&edge_key(u, v)).copied()
    }

    pub fn set_edge_label(&mut self, u: VertexId, v: VertexId, l: Label) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::UnknownEdge(u, v));
        }
        self.edge_labels.insert(edge_key(u, v), l);
        Ok(())
    }

    pub fn edge_labels(&self) -> &BTreeMap<EdgeKey, Label> {
        &self.edge_labels
    }

    pub fn weight(&self, u: VertexId, v: VertexId) -> Option<Weight> {
        self.edge_weights.get(&edge_key(u, v)).copied()
    }

    pub fn set_weight(&mut self, u: VertexId, v: VertexId, w: Weight) -> Result<()> {
        if !self.has_edge(u, v) {
            return Err(Error::UnknownEdge(u, v));
        }
        self.edge_weights.insert(edge_key(u, v), w);
        Ok(())
    }

    pub fn edge_weights(&self) -> &BTreeMap<EdgeKey, Weight> {
        &self.edge_weights
    }

    pub fn has_weights(&self) -> bool {
        !self.edge_weights.is_empty()
    }

    /// Unweighted BFS distances from `src`.
    pub fn distances(&self, src: VertexId) -> Result<HashMap<VertexId, u32>> {
        self.distances_within(src, u32::MAX)
    }

    /// BFS distances from `src`, exploring only up to `limit`.
    pub fn distances_within(&self, src: VertexId, limit: u32) -> Result<HashMap<VertexId, u32>> {
        if !self.contains(src) {
            return Err(Error::UnknownVertex(src));
        }
        let mut dist = HashMap::new();
        dist.insert(src, 0u32);
        let mut queue = VecDeque::from([src]);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            if d >= limit {
                continue;
            }
            for w in self.neighbors(u) {
                if let std::collections::hash_map::Entry::Vacant(e) = dist.entry(w) {
                    e.insert(d + 1);
                    queue.push_back(w);
                }
            }
        }
        Ok(dist)
    }

    pub fn distance(&self, u: VertexId, v: VertexId) -> Result<Option<u32>> {
        if !self.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        Ok(self.distances(u)?.get(&v).copied())
    }

    /// Shortest path from `u` to `v` as a vertex sequence, ties broken by smallest id.
    pub fn shortest_path(&self, u: VertexId, v: VertexId) -> Result<Option<Vec<VertexId>>> {
        let dist = self.distances(v)?;
        if !self.contains(u) {
            return Err(Error::UnknownVertex(u));
        }
        let Some(&d) = dist.get(&u) else {
            return Ok(None);
        };
        let mut path = vec![u];
        let mut cur = u;
        for step in (0..d).rev() {
            cur = self
                .neighbors(cur)
                .find(|w| dist.get(w) == Some(&step))
                .expect("BFS layers are consistent");
            path.push(cur);
        }
        Ok(Some(path))
    }

    pub fn diameter(&self) -> Option<u32> {
        let mut best = 0;
        for v in self.vertices() {
            let d = self.distances(v).ok()?;
            if d.len() != self.vertex_count() {
                return None;
            }
            best = best.max(d.values().copied().max().unwrap_or(0));
        }
        Some(best)
    }

    pub fn is_connected(&self) -> bool {
        match self.vertices().next() {
            None => true,
            Some(v) => self.distances(v).map(|d| d.len()).unwrap_or(0) == self.vertex_count(),
        }
    }

    /// Induced subgraph with labels and weights restricted.
    pub fn induced(&self, keep: &BTreeSet<VertexId>) -> LabeledGraph {
        let mut h = LabeledGraph::new();
        for &v in keep {
            if self.contains(v) {
                h.add_vertex(v);
                if let Some(l) = self.node_label(v) {
                    h.node_labels.insert(v, l);
                }
            }
        }
        for (u, v) in self.edges() {
            if keep.contains(&u) && keep.contains(&v) {
                h.add_edge(u, v).expect("edge between kept vertices");
                self.copy_edge_data(&mut h, u, v);
            }
        }
        h
    }

    fn copy_edge_data(&self, h: &mut LabeledGraph, u: VertexId, v: VertexId) {
        let k = edge_key(u, v);
        if let Some(&l) = self.edge_labels.get(&k) {
            h.edge_labels.insert(k, l);
        }
        if let Some(&w) = self.edge_weights.get(&k) {
            h.edge_weights.insert(k, w);
        }
    }

    /// Renames vertices through `f`, which must be injective on the vertex set.
    pub fn relabel_vertices(&self, f: impl Fn(VertexId) -> VertexId) -> LabeledGraph {
        let mut h = LabeledGraph::new();
        for v in self.vertices() {
            h.add_vertex(f(v));
        }
        for (&v, &l) in &self.node_labels {
            h.node_labels.insert(f(v), l);
        }
        for (u, v) in self.edges() {
            h.add_edge(f(u), f(v)).expect("injective relabeling");
            let k = edge_key(u, v);
            let k2 = edge_key(f(u), f(v));
            if let Some(&l) = self.edge_labels.get(&k) {
                h.edge_labels.insert(k2, l);
            }
            if let Some(&w) = self.edge_weights.get(&k) {
                h.edge_weights.insert(k2, w);
            }
        }
        h
    }

    /// Copy of the graph with all node and edge labels dropped.
    pub fn unlabeled(&self) -> LabeledGraph {
        LabeledGraph {
            adj: self.adj.clone(),
            node_labels: BTreeMap::new(),
            edge_labels: BTreeMap::new(),
            edge_weights: self.edge_weights.clone(),
        }
    }

    /// Disjoint union with `other`, whose vertices are shifted by `offset`.
    pub fn absorb(&mut self, other: &LabeledGraph, offset: VertexId) {
        let shifted = other.relabel_vertices(|v| v + offset);
        for v in shifted.vertices() {
            self.add_vertex(v);
        }
        for (u, v) in shifted.edges() {
            self.add_edge(u, v).expect("disjoint union");
        }
        self.node_labels.extend(shifted.node_labels);
        self.edge_labels.extend(shifted.edge_labels);
        self.edge_weights.extend(shifted.edge_weights);
    }
}

/// Graph whose edges may repeat or form loops; produced by decoding.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct MultiGraph {
    pub vertices: BTreeMap<VertexId, Option<Label>>,
    pub edges: Vec<MultiEdge>,
}

#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
pub struct MultiEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub label: Option<Label>,
}

impl MultiGraph {
    pub fn is_simple(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.edges
            .iter()
            .all(|e| e.u != e.v && seen.insert(edge_key(e.u, e.v)))
    }

    /// Collapses parallel edges and drops loops. Returns the graph and the
    /// number of edges that were merged or dropped. A collapsed edge keeps
    /// the smallest label among its copies.
    pub fn to_simple(&self) -> (LabeledGraph, usize) {
        let mut g = LabeledGraph::new();
        for (&v, &l) in &self.vertices {
            g.add_vertex(v);
            if let Some(l) = l {
                g.node_labels.insert(v, l);
            }
        }
        let mut lost = 0;
        let mut edges: Vec<&MultiEdge> = self.edges.iter().collect();
        edges.sort_by_key(|e| (edge_key(e.u, e.v), e.label));
        for e in edges {
            if e.u == e.v || g.has_edge(e.u, e.v) {
                lost += 1;
                continue;
            }
            g.add_edge(e.u, e.v).expect("endpoints are vertices");
            if let Some(l) = e.label {
                g.edge_labels.insert(edge_key(e.u, e.v), l);
            }
        }
        (g, lost)
    }

    pub fn from_simple(g: &LabeledGraph) -> MultiGraph {
        MultiGraph {
            vertices: g.vertices().map(|v| (v, g.node_label(v))).collect(),
            edges: g
                .edges()
                .map(|(u, v)| MultiEdge {
                    u,
                    v,
                    label: g.edge_label(u, v),
                })
                .collect(),
        }
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.edges
            .iter()
            .map(|e| (e.u == v) as usize + (e.v == v) as usize)
            .sum()
    }
}

/// A graph together with a center; the graph is the radius-`radius` ball of the center.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CenteredGraph {
    pub graph: LabeledGraph,
    pub center: VertexId,
    pub radius: u32,
}

impl CenteredGraph {
    /// Checks that the graph equals its own ball around the center.
    pub fn is_ball(&self) -> bool {
        match ball(&self.graph, self.center, self.radius) {
            Ok(b) => b.graph == self.graph,
            Err(_) => false,
        }
    }
}

/// Radius-`r` ball: vertices within distance `r`, edges with an endpoint closer than `r`.
pub fn ball(g: &LabeledGraph, v: VertexId, r: u32) -> Result<CenteredGraph> {
    let dist = g.distances_within(v, r)?;
    let mut h = LabeledGraph::new();
    let mut keep: Vec<VertexId> = dist.keys().copied().collect();
    keep.sort_unstable();
    for &u in &keep {
        h.add_vertex(u);
        if let Some(l) = g.node_label(u) {
            h.node_labels.insert(u, l);
        }
    }
    for &u in &keep {
        let du = dist[&u];
        for w in g.neighbors(u) {
            if u < w {
                if let Some(&dw) = dist.get(&w) {
                    if du < r || dw < r {
                        h.add_edge(u, w).expect("ball edge");
                        g.copy_edge_data(&mut h, u, w);
                    }
                }
            }
        }
    }
    Ok(CenteredGraph {
        graph: h,
        center: v,
        radius: r,
    })
}

/// Gadget distance: exact value in half units, or unreachable.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum GDist {
    Finite(u32),
    Infinite,
}

impl GDist {
    pub fn halves(self) -> Option<u32> {
        match self {
            GDist::Finite(h) => Some(h),
            GDist::Infinite => None,
        }
    }

    pub fn as_ratio(self) -> Option<Ratio<u32>> {
        self.halves().map(|h| Ratio::new(h, 2))
    }
}

/// Weighted distances (half units) from `src` via 0-1 BFS.
pub fn gdistances(g: &LabeledGraph, src: VertexId) -> Result<HashMap<VertexId, u32>> {
    if !g.contains(src) {
        return Err(Error::UnknownVertex(src));
    }
    let mut dist: HashMap<VertexId, u32> = HashMap::new();
    dist.insert(src, 0);
    let mut dq = VecDeque::from([src]);
    while let Some(u) = dq.pop_front() {
        let du = dist[&u];
        for w in g.neighbors(u) {
            let wt = g.weight(u, w).ok_or(Error::MissingWeight(u, w))?.halves();
            let nd = du + wt;
            if dist.get(&w).is_none_or(|&old| nd < old) {
                dist.insert(w, nd);
                if wt == 0 {
                    dq.push_front(w);
                } else {
                    dq.push_back(w);
                }
            }
        }
    }
    Ok(dist)
}

pub fn gdist(g: &LabeledGraph, u: VertexId, v: VertexId) -> Result<GDist> {
    if !g.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    Ok(match gdistances(g, u)?.get(&v) {
        Some(&h) => GDist::Finite(h),
        None => GDist::Infinite,
    })
}

/// Vertices within gadget distance `r` of `v`, with the edges between them.
pub fn gball(g: &LabeledGraph, v: VertexId, r: u32) -> Result<CenteredGraph> {
    let dist = gdistances(g, v)?;
    let keep: BTreeSet<VertexId> = dist
        .iter()
        .filter(|(_, &d)| d <= 2 * r)
        .map(|(&u, _)| u)
        .collect();
    Ok(CenteredGraph {
        graph: g.induced(&keep),
        center: v,
        radius: r,
    })
}

/// JSON form of a graph: `{"vertices","edges","node_labels","edge_labels","edge_weights"}`.
#[derive(Clone, Debug, Default, Serialize, Deserialize, PartialEq, Eq)]
pub struct GraphJson {
    pub vertices: Vec<VertexId>,
    pub edges: Vec<[VertexId; 2]>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub node_labels: BTreeMap<String, Label>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_labels: BTreeMap<String, Label>,
    #[serde(default, skip_serializing_if = "BTreeMap::is_empty")]
    pub edge_weights: BTreeMap<String, u8>,
}

pub fn edge_name(u: VertexId, v: VertexId) -> String {
    let (a, b) = edge_key(u, v);
    format!("{a}-{b}")
}

pub fn parse_edge_name(s: &str) -> Result<EdgeKey> {
    let (a, b) = s
        .split_once('-')
        .ok_or_else(|| Error::Parse(format!("bad edge key {s:?}")))?;
    let a = a
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad edge key {s:?}")))?;
    let b = b
        .trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad edge key {s:?}")))?;
    Ok(edge_key(a, b))
}

pub fn parse_vertex_name(s: &str) -> Result<VertexId> {
    s.trim()
        .parse()
        .map_err(|_| Error::Parse(format!("bad vertex id {s:?}")))
}

impl From<&LabeledGraph> for GraphJson {
    fn from(g: &LabeledGraph) -> Self {
        GraphJson {
            vertices: g.vertices().collect(),
            edges: g.edges().map(|(u, v)| [u, v]).collect(),
            node_labels: g
                .node_labels
                .iter()
                .map(|(v, l)| (v.to_string(), *l))
                .collect(),
            edge_labels: g
                .edge_labels
                .iter()
                .map(|(&(u, v), l)| (edge_name(u, v), *l))
                .collect(),
            edge_weights: g
                .edge_weights
                .iter()
                .map(|(&(u, v), w)| (edge_name(u, v), w.halves() as u8))
                .collect(),
        }
    }
}

impl TryFrom<&GraphJson> for LabeledGraph {
    type Error = Error;

    fn try_from(j: &GraphJson) -> Result<Self> {
        let mut g = LabeledGraph::new();
        for &v in &j.vertices {
            g.add_vertex(v);
        }
        for &[u, v] in &j.edges {
            g.add_edge(u, v)?;
        }
        for (k, &l) in &j.node_labels {
            g.set_node_label(parse_vertex_name(k)?, l)?;
        }
        for (k, &l) in &j.edge_labels {
            let (u, v) = parse_edge_name(k)?;
            g.set_edge_label(u, v, l)?;
        }
        for (k, &w) in &j.edge_weights {
            let (u, v) = parse_edge_name(k)?;
            let w = match w {
                0 => Weight::Zero,
                1 => Weight::Half,
                other => return Err(Error::Parse(format!("weight {other} not in {{0,1}}"))),
            };
            g.set_weight(u, v, w)?;
        }
        Ok(g)
    }
}

impl From<LabeledGraph> for GraphJson {
    fn from(g: LabeledGraph) -> Self {
        GraphJson::from(&g)
    }
}

impl TryFrom<GraphJson> for LabeledGraph {
    type Error = Error;

    fn try_from(j: GraphJson) -> Result<Self> {
        LabeledGraph::try_from(&j)
    }
}

impl LabeledGraph {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(&GraphJson::from(self)).expect("graph serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        let j: GraphJson = serde_json::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        LabeledGraph::try_from(&j)
    }
}

/// Vertex styling classes for DOT export.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum VertexClass {
    Original,
    Outer,
    Inner,
    Malformed,
}

pub fn to_dot(g: &LabeledGraph, classes: Option<&BTreeMap<VertexId, VertexClass>>) -> String {
    let mut s = String::from("graph G {\n");
    for v in g.vertices() {
        let mut attrs = vec![];
        match g.node_label(v) {
            Some(l) if l != BOTTOM => attrs.push(format!("label=\"{v}:{l}\"")),
            _ => attrs.push(format!("label=\"{v}\"")),
        }
        if let Some(c) = classes.and_then(|m| m.get(&v)) {
            let (fill, style) = match c {
                VertexClass::Original => ("black", "filled"),
                VertexClass::Outer => ("pink", "filled"),
                VertexClass::Inner => ("white", "filled"),
                VertexClass::Malformed => ("gray", "dashed"),
            };
            attrs.push(format!("style={style}, fillcolor={fill}"));
            if *c == VertexClass::Original {
                attrs.push("fontcolor=white".into());
            }
        }
        let _ = writeln!(s, "  {v} [{}];", attrs.join(", "));
    }
    for (u, v) in g.edges() {
        let mut attrs = vec![];
        if let Some(l) = g.edge_label(u, v) {
            attrs.push(format!("label=\"{l}\""));
        }
        if g.weight(u, v) == Some(Weight::Half) {
            attrs.push("penwidth=2".into());
        }
        if attrs.is_empty() {
            let _ = writeln!(s, "  {u} -- {v};");
        } else {
            let _ = writeln!(s, "  {u} -- {v} [{}];", attrs.join(", "));
        }
    }
    s.push_str("}\n");
    s
}

/// Small named graph families used by fixtures and tests.
pub mod gen {
    use super::*;

    pub fn path(n: u32) -> LabeledGraph {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        LabeledGraph::from_edges(n, &edges).expect("path")
    }

    pub fn cycle(n: u32) -> LabeledGraph {
        assert!(n >= 3, "cycle needs at least 3 vertices");
        let mut edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        edges.push((n - 1, 0));
        LabeledGraph::from_edges(n, &edges).expect("cycle")
    }

    pub fn complete(n: u32) -> LabeledGraph {
        let mut edges = vec![];
        for u in 0..n {
            for v in u + 1..n {
                edges.push((u, v));
            }
        }
        LabeledGraph::from_edges(n, &edges).expect("complete")
    }

    pub fn complete_bipartite(a: u32, b: u32) -> LabeledGraph {
        let mut edges = vec![];
        for u in 0..a {
            for v in 0..b {
                edges.push((u, a + v));
            }
        }
        LabeledGraph::from_edges(a + b, &edges).expect("complete bipartite")
    }

    pub fn star(leaves: u32) -> LabeledGraph {
        let edges: Vec<_> = (1..=leaves).map(|i| (0, i)).collect();
        LabeledGraph::from_edges(leaves + 1, &edges).expect("star")
    }

    /// Triangular prism: two triangles joined by a perfect matching.
    pub fn prism() -> LabeledGraph {
        LabeledGraph::from_edges(
            6,
            &[(0, 1), (1, 2), (2, 0), (3, 4), (4, 5), (5, 3), (0, 3), (1, 4), (2, 5)],
        )
        .expect("prism")
    }

    pub fn petersen() -> LabeledGraph {
        let mut edges = vec![];
        for i in 0..5 {
            edges.push((i, (i + 1) % 5));
            edges.push((i, i + 5));
            edges.push((i + 5, (i + 2) % 5 + 5));
        }
        LabeledGraph::from_edges(10, &edges).expect("petersen")
    }

    pub fn cube() -> LabeledGraph {
        let mut edges = vec![];
        for u in 0..8u32 {
            for b in 0..3 {
                let v = u ^ (1 << b);
                if u < v {
                    edges.push((u, v));
                }
            }
        }
        LabeledGraph::from_edges(8, &edges).expect("cube")
    }

    /// Random simple graph on `2..=max_n` vertices with degrees in
    /// `1..=max_degree` and node labels in `0..=max_label`.
    pub fn random_labeled<R: rand::Rng>(rng: &mut R, max_n: u32, max_degree: usize, max_label: Label) -> LabeledGraph {
        loop {
            let n = rng.gen_range(2..=max_n.max(2));
            let mut g = LabeledGraph::from_edges(n, &[]).expect("vertices");
            let mut pairs: Vec<(VertexId, VertexId)> = (0..n).flat_map(|u| (u + 1..n).map(move |v| (u, v))).collect();
            for i in (1..pairs.len()).rev() {
                pairs.swap(i, rng.gen_range(0..=i));
            }
            for (u, v) in pairs {
                if rng.gen_bool(0.5) && g.degree(u) < max_degree && g.degree(v) < max_degree {
                    g.add_edge(u, v).expect("new edge");
                }
            }
            if g.vertices().any(|v| g.degree(v) == 0) {
                continue;
            }
            for v in 0..n {
                g.set_node_label(v, rng.gen_range(0..=max_label)).expect("vertex");
            }
            return g;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn weighted_chain() -> LabeledGraph {
        // original 0 - 1 .. 6 - original 7, A-gadget in the middle
        let mut g = LabeledGraph::from_edges(
            8,
            &[
                (0, 1),
                (1, 2),
                (1, 3),
                (2, 3),
                (2, 4),
                (3, 5),
                (4, 5),
                (5, 6),
                (4, 6),
                (6, 7),
            ],
        )
        .unwrap();
        for (u, v) in g.edges().collect::<Vec<_>>() {
            let w = if u == 0 || v == 7 { Weight::Half } else { Weight::Zero };
            g.set_weight(u, v, w).unwrap();
        }
        g
    }

    #[test]
    fn ball_of_path_center_is_whole_path() {
        let b = ball(&gen::path(3), 1, 1).unwrap();
        assert_eq!(b.graph.vertex_count(), 3);
        assert_eq!(b.graph.edge_count(), 2);
    }

    #[test]
    fn zero_radius_ball_is_single_vertex() {
        let b = ball(&gen::complete(4), 2, 0).unwrap();
        assert_eq!(b.graph.vertex_count(), 1);
        assert_eq!(b.graph.edge_count(), 0);
    }

    #[test]
    fn radius_two_ball_in_hexagon_is_a_path() {
        let b = ball(&gen::cycle(6), 0, 2).unwrap();
        assert_eq!(b.graph.vertices().collect::<Vec<_>>(), vec![0, 1, 2, 4, 5]);
        assert_eq!(b.graph.edge_count(), 4);
        assert!(b.graph.has_edge(1, 2) && b.graph.has_edge(4, 5));
        assert!(!b.graph.has_edge(2, 3));
    }

    #[test]
    fn ball_drops_edges_between_boundary_vertices() {
        let b = ball(&gen::complete(4), 0, 1).unwrap();
        assert_eq!(b.graph.edge_count(), 3);
        assert!(b.is_ball());
    }

    #[test]
    fn ball_rejects_unknown_vertex() {
        assert_eq!(ball(&gen::path(2), 9, 1), Err(Error::UnknownVertex(9)));
    }

    #[test]
    fn gdist_examples() {
        let g = weighted_chain();
        assert_eq!(gdist(&g, 0, 0).unwrap(), GDist::Finite(0));
        assert_eq!(gdist(&g, 0, 7).unwrap().as_ratio(), Some(Ratio::new(1, 1)));
        assert_eq!(gdist(&g, 0, 1).unwrap().as_ratio(), Some(Ratio::new(1, 2)));
        let mut h = g.clone();
        h.add_vertex(99);
        assert_eq!(gdist(&h, 0, 99).unwrap(), GDist::Infinite);
    }

    #[test]
    fn gball_examples() {
        let g = weighted_chain();
        assert_eq!(gball(&g, 0, 1).unwrap().graph.vertex_count(), 8);
        let b0 = gball(&g, 0, 0).unwrap();
        assert_eq!(b0.graph.vertices().collect::<Vec<_>>(), vec![0]);
    }

    #[test]
    fn gdist_requires_weights() {
        let g = gen::path(3);
        assert_eq!(gdist(&g, 0, 2), Err(Error::MissingWeight(0, 1)));
    }

    #[test]
    fn json_round_trip() {
        let mut g = weighted_chain();
        g.set_node_label(0, 4).unwrap();
        g.set_edge_label(0, 1, 2).unwrap();
        let back = LabeledGraph::from_json(&g.to_json()).unwrap();
        assert_eq!(back, g);
        let empty = LabeledGraph::new();
        assert_eq!(LabeledGraph::from_json(&empty.to_json()).unwrap(), empty);
    }

    #[test]
    fn json_rejects_bad_weight() {
        let s = r#"{"vertices":[0,1],"edges":[[0,1]],"edge_weights":{"0-1":3}}"#;
        assert!(matches!(LabeledGraph::from_json(s), Err(Error::Parse(_))));
    }

    #[test]
    fn multigraph_collapse() {
        let m = MultiGraph {
            vertices: [(0, None), (1, Some(3))].into_iter().collect(),
            edges: vec![
                MultiEdge { u: 0, v: 1, label: Some(5) },
                MultiEdge { u: 1, v: 0, label: None },
                MultiEdge { u: 1, v: 1, label: None },
            ],
        };
        assert!(!m.is_simple());
        let (g, lost) = m.to_simple();
        assert_eq!(lost, 2);
        assert_eq!(g.edge_count(), 1);
        assert_eq!(m.degree(1), 4);
    }

    #[test]
    fn shortest_path_prefers_small_ids() {
        let g = gen::cycle(6);
        assert_eq!(g.shortest_path(0, 3).unwrap().unwrap(), vec![0, 1, 2, 3]);
    }

    #[test]
    fn generators_have_expected_shape() {
        assert!(gen::petersen().is_regular(3));
        assert!(gen::cube().is_regular(3));
        assert!(gen::prism().is_regular(3));
        assert_eq!(gen::petersen().diameter(), Some(2));
        assert_eq!(gen::complete_bipartite(3, 3).edge_count(), 9);
    }
}
