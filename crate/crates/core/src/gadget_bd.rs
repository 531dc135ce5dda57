//! A-gadget expansion of cubic graphs driven by an edge coloring, weighted
//! distances, contraction, view reconstruction and the derived PN problem.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet, VecDeque};
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::Arc;

use num_bigint::BigUint;
use num_traits::One;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formalisms::{Alphabet, LclProblem, OutputLabeling, PnConstraint, PnProblem};
use crate::graph::{ball, edge_key, gball, CenteredGraph, EdgeKey, LabeledGraph, Label, VertexClass, VertexId, Weight, BOTTOM};
use crate::iso::{graph_iso, IsoOptions};
use crate::view::{ViewArena, ViewId};

/// Internal edges of the A-gadget on vertices `1..=6`; stubs leave from 1 and 6.
pub const A_GADGET_EDGES: [(VertexId, VertexId); 8] = [(1, 2), (1, 3), (2, 3), (2, 4), (3, 5), (4, 5), (5, 6), (4, 6)];

pub fn a_gadget() -> LabeledGraph {
    let mut g = LabeledGraph::new();
    for v in 1..=6 {
        g.add_vertex(v);
    }
    for (u, v) in A_GADGET_EDGES {
        g.add_edge(u, v).expect("fixed edge list");
    }
    g
}

/// Chain of A-gadgets replacing one edge. `vertices` lists gadget after gadget,
/// each in local order 1..=6, starting at the `u` end.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ExpandedEdge {
    pub u: VertexId,
    pub v: VertexId,
    pub length: u32,
    pub vertices: Vec<VertexId>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GadgetedGraph {
    pub graph: LabeledGraph,
    pub classes: BTreeMap<VertexId, VertexClass>,
    pub expanded: Vec<ExpandedEdge>,
}

impl GadgetedGraph {
    pub fn originals(&self) -> impl Iterator<Item = VertexId> + '_ {
        self.classes
            .iter()
            .filter(|(_, c)| **c == VertexClass::Original)
            .map(|(&v, _)| v)
    }
}

/// Gadgets a multigraph given as `(u, v, length)` triples without validating
/// the coloring. Originals keep ids `0..n`.
pub fn gadget_multigraph(n: u32, edges: &[(VertexId, VertexId, u32)]) -> Result<GadgetedGraph> {
    let mut g = LabeledGraph::new();
    let mut classes = BTreeMap::new();
    for v in 0..n {
        g.add_vertex(v);
        classes.insert(v, VertexClass::Original);
    }
    let mut next = n;
    let mut expanded = vec![];
    for &(u, v, len) in edges {
        if u >= n || v >= n {
            return Err(Error::UnknownVertex(u.max(v)));
        }
        if len == 0 {
            return Err(Error::InvalidColoring(format!("edge {u}-{v} has color 0")));
        }
        let mut verts = vec![];
        let mut prev = u;
        for _ in 0..len {
            let base = next;
            next += 6;
            for i in 0..6 {
                g.add_vertex(base + i);
                verts.push(base + i);
                classes.insert(base + i, VertexClass::Inner);
            }
            for (a, b) in A_GADGET_EDGES {
                g.add_edge(base + a - 1, base + b - 1)?;
            }
            g.add_edge(prev, base)?;
            prev = base + 5;
        }
        g.add_edge(prev, v)?;
        expanded.push(ExpandedEdge { u, v, length: len, vertices: verts });
    }
    for (a, b) in g.edges().collect::<Vec<_>>() {
        let touches = classes[&a] == VertexClass::Original || classes[&b] == VertexClass::Original;
        g.set_weight(a, b, if touches { Weight::Half } else { Weight::Zero })?;
        if classes[&a] == VertexClass::Original && classes[&b] != VertexClass::Original {
            classes.insert(b, VertexClass::Outer);
        }
        if classes[&b] == VertexClass::Original && classes[&a] != VertexClass::Original {
            classes.insert(a, VertexClass::Outer);
        }
    }
    Ok(GadgetedGraph { graph: g, classes, expanded })
}

/// Standalone expanded edge of length `w` with original ends 0 and 1.
pub fn expanded_edge_graph(w: u32) -> LabeledGraph {
    gadget_multigraph(2, &[(0, 1, w)]).expect("valid").graph
}

/// Edge distance: smallest vertex distance between endpoints. Returns all
/// pairs of distinct edges at edge distance `< bound`.
pub fn close_edge_pairs(g: &LabeledGraph, bound: u32) -> Result<Vec<(EdgeKey, EdgeKey)>> {
    if bound == 0 {
        return Ok(vec![]);
    }
    let mut near: HashMap<VertexId, HashMap<VertexId, u32>> = HashMap::new();
    for v in g.vertices() {
        near.insert(v, g.distances_within(v, bound - 1)?);
    }
    let edges: Vec<EdgeKey> = g.edges().collect();
    let mut out = vec![];
    for (i, &e) in edges.iter().enumerate() {
        for &f in &edges[i + 1..] {
            let close = [e.0, e.1].iter().any(|a| [f.0, f.1].iter().any(|b| near[a].contains_key(b)));
            if close {
                out.push((e, f));
            }
        }
    }
    Ok(out)
}

/// Checks that `x` colors every edge with a color `>= 1` and that edges at
/// edge distance below `2 r_b` differ.
pub fn validate_edge_coloring(g: &LabeledGraph, x: &BTreeMap<EdgeKey, u32>, r_b: u32) -> Result<()> {
    for e in g.edges() {
        match x.get(&e) {
            None => return Err(Error::InvalidColoring(format!("edge {}-{} uncolored", e.0, e.1))),
            Some(0) => return Err(Error::InvalidColoring(format!("edge {}-{} has color 0", e.0, e.1))),
            _ => {}
        }
    }
    if let Some(e) = x.keys().find(|e| !g.has_edge(e.0, e.1)) {
        return Err(Error::UnknownEdge(e.0, e.1));
    }
    for (e, f) in close_edge_pairs(g, 2 * r_b)? {
        if x[&e] == x[&f] {
            return Err(Error::InvalidColoring(format!(
                "edges {}-{} and {}-{} are close and share color {}",
                e.0, e.1, f.0, f.1, x[&e]
            )));
        }
    }
    Ok(())
}

/// Greedy distance-`2 r_b` edge coloring with colors from 1, edges in key order.
pub fn auto_edge_coloring(g: &LabeledGraph, r_b: u32) -> Result<BTreeMap<EdgeKey, u32>> {
    let mut conflicts: HashMap<EdgeKey, Vec<EdgeKey>> = HashMap::new();
    for (e, f) in close_edge_pairs(g, 2 * r_b)? {
        conflicts.entry(e).or_default().push(f);
        conflicts.entry(f).or_default().push(e);
    }
    let mut x = BTreeMap::new();
    for e in g.edges() {
        let used: BTreeSet<u32> = conflicts
            .get(&e)
            .into_iter()
            .flatten()
            .filter_map(|f| x.get(f).copied())
            .collect();
        let c = (1..).find(|c| !used.contains(c)).expect("unbounded");
        x.insert(e, c);
    }
    Ok(x)
}

/// Replaces each edge of the cubic simple graph `g` by an expanded edge whose
/// length is its color. Chains run from the lower-id endpoint.
pub fn gadget_bd(g: &LabeledGraph, x: &BTreeMap<EdgeKey, u32>, r_b: u32) -> Result<GadgetedGraph> {
    g.check_cubic()?;
    validate_edge_coloring(g, x, r_b)?;
    let ids: Vec<VertexId> = g.vertices().collect();
    let index: HashMap<VertexId, VertexId> = ids.iter().enumerate().map(|(i, &v)| (v, i as VertexId)).collect();
    let edges: Vec<(VertexId, VertexId, u32)> = g
        .edges()
        .map(|(u, v)| (index[&u], index[&v], x[&(u, v)]))
        .collect();
    let gg = gadget_multigraph(ids.len() as u32, &edges)?;
    // Originals are 0..n in the gadgeted graph; map them back to g's ids when they differ.
    if ids.iter().enumerate().all(|(i, &v)| i as VertexId == v) {
        return Ok(gg);
    }
    let offset = g.max_vertex_id().unwrap_or(0) + 1;
    let n = ids.len() as VertexId;
    let rename = |v: VertexId| if v < n { ids[v as usize] } else { v - n + offset };
    Ok(GadgetedGraph {
        graph: gg.graph.relabel_vertices(rename),
        classes: gg.classes.into_iter().map(|(v, c)| (rename(v), c)).collect(),
        expanded: gg
            .expanded
            .into_iter()
            .map(|e| ExpandedEdge {
                u: rename(e.u),
                v: rename(e.v),
                length: e.length,
                vertices: e.vertices.into_iter().map(rename).collect(),
            })
            .collect(),
    })
}

/// `true` for vertices lying on a triangle.
pub fn classify_vertices(g: &LabeledGraph) -> BTreeMap<VertexId, bool> {
    g.vertices()
        .map(|v| {
            let nb: Vec<VertexId> = g.neighbors(v).collect();
            let tri = nb
                .iter()
                .enumerate()
                .any(|(i, &a)| nb[i + 1..].iter().any(|&b| g.has_edge(a, b)));
            (v, tri)
        })
        .collect()
}

/// A maximal triangle-vertex component recognised as an expanded edge.
#[derive(Clone, Debug)]
struct Chain {
    ends: (VertexId, VertexId),
    length: u32,
    vertices: BTreeSet<VertexId>,
}

/// Splits the triangle vertices into components and recognises the ones that
/// are whole expanded edges between two distinct non-triangle vertices.
fn find_chains(g: &LabeledGraph, tri: &BTreeMap<VertexId, bool>) -> (Vec<Chain>, usize) {
    let mut seen = BTreeSet::new();
    let mut chains = vec![];
    let mut other = 0;
    for v in g.vertices() {
        if !tri[&v] || seen.contains(&v) {
            continue;
        }
        let mut comp = BTreeSet::new();
        let mut q = VecDeque::from([v]);
        seen.insert(v);
        while let Some(x) = q.pop_front() {
            comp.insert(x);
            for w in g.neighbors(x) {
                if tri[&w] && seen.insert(w) {
                    q.push_back(w);
                }
            }
        }
        match recognise_chain(g, &comp, tri) {
            Some(c) => chains.push(c),
            None => other += 1,
        }
    }
    (chains, other)
}

fn recognise_chain(g: &LabeledGraph, comp: &BTreeSet<VertexId>, tri: &BTreeMap<VertexId, bool>) -> Option<Chain> {
    if comp.len() % 6 != 0 {
        return None;
    }
    let mut ends = vec![];
    for &x in comp {
        for w in g.neighbors(x) {
            if !comp.contains(&w) {
                if tri[&w] {
                    return None;
                }
                ends.push(w);
            }
        }
    }
    if ends.len() != 2 || ends[0] == ends[1] {
        return None;
    }
    let w = (comp.len() / 6) as u32;
    let mut keep = comp.clone();
    keep.insert(ends[0]);
    keep.insert(ends[1]);
    let mut sub = g.induced(&keep).unlabeled();
    // Only the two attachment edges may touch the ends.
    if sub.has_edge(ends[0], ends[1]) {
        sub.remove_edge(ends[0], ends[1]).ok()?;
    }
    if !graph_iso(&sub, &expanded_edge_graph(w).unlabeled(), IsoOptions::STRUCTURE) {
        return None;
    }
    Some(Chain { ends: (ends[0].min(ends[1]), ends[0].max(ends[1])), length: w, vertices: comp.clone() })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Contracted {
    pub graph: LabeledGraph,
    /// Recovered color (length) of each contracted edge.
    pub coloring: BTreeMap<EdgeKey, u32>,
    pub contracted: usize,
    /// Chains left expanded because contracting them would create a loop or multi-edge.
    pub reversed: usize,
}

/// Contracts every recognised expanded edge into a single edge labeled with
/// its length. Chains that would create loops or parallel edges stay expanded.
pub fn contract_db(g: &LabeledGraph) -> Contracted {
    let tri = classify_vertices(g);
    let (chains, _) = find_chains(g, &tri);
    let mut per_pair: BTreeMap<EdgeKey, Vec<usize>> = BTreeMap::new();
    for (i, c) in chains.iter().enumerate() {
        per_pair.entry(c.ends).or_default().push(i);
    }
    let mut out = g.clone();
    let mut coloring = BTreeMap::new();
    let (mut contracted, mut reversed) = (0, 0);
    for (pair, idxs) in per_pair {
        if idxs.len() > 1 || g.has_edge(pair.0, pair.1) {
            reversed += idxs.len();
            continue;
        }
        let c = &chains[idxs[0]];
        for &x in &c.vertices {
            out.remove_vertex(x);
        }
        out.add_edge(pair.0, pair.1).expect("checked absent");
        out.set_edge_label(pair.0, pair.1, c.length as Label).expect("edge exists");
        coloring.insert(pair, c.length);
        contracted += 1;
    }
    let mut graph = LabeledGraph::new();
    for v in out.vertices() {
        graph.add_vertex(v);
    }
    for (u, v) in out.edges() {
        graph.add_edge(u, v).expect("fresh graph");
        if let Some(l) = out.edge_label(u, v) {
            graph.set_edge_label(u, v, l).expect("edge exists");
        }
    }
    Contracted { graph, coloring, contracted, reversed }
}

/// Structural test for being the `h.radius`-gball of an original vertex in a
/// correctly gadgeted graph.
pub fn is_correctly_gadgeted_ball(h: &CenteredGraph) -> bool {
    gadgeted_ball_skeleton(h).is_some()
}

/// Contracted skeleton of a correctly gadgeted ball: original vertices and one
/// edge per chain, labeled with its length.
fn gadgeted_ball_skeleton(h: &CenteredGraph) -> Option<(LabeledGraph, Vec<Chain>)> {
    let g = &h.graph;
    if !g.contains(h.center) || !g.is_connected() {
        return None;
    }
    let tri = classify_vertices(g);
    if tri[&h.center] {
        return None;
    }
    let originals: BTreeSet<VertexId> = g.vertices().filter(|v| !tri[v]).collect();
    if g.edges().any(|(a, b)| originals.contains(&a) && originals.contains(&b)) {
        return None;
    }
    let (chains, other) = find_chains(g, &tri);
    if other > 0 {
        return None;
    }
    let mut sk = LabeledGraph::new();
    for &o in &originals {
        sk.add_vertex(o);
    }
    let mut lengths = BTreeSet::new();
    for c in &chains {
        if sk.has_edge(c.ends.0, c.ends.1) || !lengths.insert(c.length) {
            return None;
        }
        sk.add_edge(c.ends.0, c.ends.1).ok()?;
        sk.set_edge_label(c.ends.0, c.ends.1, c.length as Label).ok()?;
    }
    let r = h.radius;
    let dist = sk.distances(h.center).ok()?;
    for &o in &originals {
        let d = *dist.get(&o)?;
        if d > r || sk.degree(o) > 3 || (d < r && sk.degree(o) != 3) {
            return None;
        }
    }
    if chains.iter().any(|c| dist[&c.ends.0].min(dist[&c.ends.1]) + 1 > r) {
        return None;
    }
    Some((sk, chains))
}

/// Constants of the derived PN problem for a given `r_b`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DConstants {
    pub r_b: u32,
    /// Exceeds the edge count of any cubic centered graph of radius `r_b`.
    pub k: u128,
    pub r_d: u128,
}

impl DConstants {
    pub fn new(r_b: u32) -> Result<DConstants> {
        if r_b == 0 || r_b > 100 {
            return Err(Error::InvalidArgument(format!("r_B = {r_b} outside 1..=100")));
        }
        let k = max_ball_edges(r_b) + 1;
        let r_d = (4 * k + 1) * r_b as u128 + 1;
        Ok(DConstants { r_b, k, r_d })
    }

    /// `ζ = 3·2^r_D − 2 + 1`, materialised only when `r_D` is small enough.
    pub fn zeta(&self) -> Option<BigUint> {
        (self.r_d <= 1 << 16).then(|| max_ball_vertices_big(self.r_d as u32) + BigUint::one())
    }

    pub fn zeta_string(&self) -> String {
        match self.zeta() {
            Some(z) if self.r_d <= 256 => z.to_string(),
            _ => format!("3*2^{}-1", self.r_d),
        }
    }

    /// Whether `c` lies in the palette `[ζ] = {0, .., ζ-1}`.
    pub fn color_in_palette(&self, c: u64) -> bool {
        if self.r_d >= 64 {
            return true;
        }
        (c as u128) < 3 * (1u128 << self.r_d) - 1
    }

    /// View radius as a `u32`, if small enough to compute with.
    pub fn r_d_u32(&self) -> Result<u32> {
        u32::try_from(self.r_d)
            .ok()
            .filter(|&r| r <= 4096)
            .ok_or_else(|| Error::BudgetExceeded(format!("r_D = {} is too large to build views", self.r_d)))
    }
}

/// Vertex bound `3·2^r − 2` for a cubic ball of radius `r`.
pub fn max_ball_vertices(r: u32) -> u128 {
    3 * (1u128 << r) - 2
}

fn max_ball_vertices_big(r: u32) -> BigUint {
    (BigUint::from(3u32) << r as usize) - BigUint::from(2u32)
}

/// Edge bound `9·2^(r-1) − 3` (handshake on the vertex bound).
pub fn max_ball_edges(r: u32) -> u128 {
    if r == 0 {
        return 0;
    }
    9 * (1u128 << (r - 1)) - 3
}

/// Packs a D output: color in the high half, B output (or ⊥) in the low half.
pub fn pack_d(color: u32, b: Label) -> Label {
    let low = if b == BOTTOM { u32::MAX } else { b as u32 };
    ((color as u64) << 32) | low as u64
}

pub fn unpack_d(l: Label) -> (u32, Label) {
    let low = (l & 0xffff_ffff) as u32;
    ((l >> 32) as u32, if low == u32::MAX { BOTTOM } else { low as Label })
}

fn color_of(a: &ViewArena, id: ViewId) -> Option<u32> {
    a.tag(id).output.map(|l| unpack_d(l).0)
}

/// Color-level summary of a labeled view, built from nodes whose whole
/// neighborhood lies inside the view.
#[derive(Clone, Debug, Default)]
pub struct ViewColoring {
    pub neighbors: HashMap<u32, BTreeSet<u32>>,
    pub b_values: HashMap<u32, BTreeSet<Label>>,
    pub reconstructible: bool,
}

impl ViewColoring {
    /// Triangle status of a color, `None` when some needed neighborhood is unseen.
    pub fn is_triangle(&self, c: u32) -> Option<bool> {
        let nb = self.neighbors.get(&c)?;
        let mut unknown = false;
        for &x in nb {
            match self.neighbors.get(&x) {
                Some(nx) => {
                    if nb.iter().any(|y| *y != x && nx.contains(y)) {
                        return Some(true);
                    }
                }
                None => unknown = true,
            }
        }
        (!unknown).then_some(false)
    }
}

/// Scans a view for I(f): distance-2 coloring and edge consistency on every
/// node of depth below the view height.
pub fn view_coloring(a: &ViewArena, root: ViewId) -> ViewColoring {
    let r = a.height(root);
    let mut vc = ViewColoring { reconstructible: true, ..Default::default() };
    let mut seen: HashSet<(ViewId, Option<u32>, u32)> = HashSet::new();
    let mut stack = vec![(root, None::<u32>, 0u32)];
    while let Some((id, pc, depth)) = stack.pop() {
        if !seen.insert((id, pc, depth)) {
            continue;
        }
        let tag = a.tag(id);
        let Some(out) = tag.output else {
            vc.reconstructible = false;
            return vc;
        };
        let (c, b) = unpack_d(out);
        vc.b_values.entry(c).or_default().insert(b);
        if depth < r {
            let mut nset: BTreeSet<u32> = BTreeSet::new();
            let mut count = 0;
            if let Some(p) = pc {
                nset.insert(p);
                count += 1;
            }
            for &(_, ch) in a.children(id) {
                let Some(cc) = color_of(a, ch) else {
                    vc.reconstructible = false;
                    return vc;
                };
                nset.insert(cc);
                count += 1;
                stack.push((ch, Some(c), depth + 1));
            }
            if nset.len() != count || nset.contains(&c) {
                vc.reconstructible = false;
                return vc;
            }
            match vc.neighbors.get(&c) {
                Some(prev) if *prev != nset => {
                    vc.reconstructible = false;
                    return vc;
                }
                Some(_) => {}
                None => {
                    vc.neighbors.insert(c, nset);
                }
            }
        }
    }
    vc
}

/// Prunes a labeled view to the walks that stop at their `r_b`-th non-triangle
/// vertex after the root. `Ok(None)` when the root is a triangle vertex or no
/// walk gets that far; `Err(InsufficientDepth)` when a retained vertex cannot
/// be classified from the view.
pub fn nt_restricted_view(a: &mut ViewArena, root: ViewId, r_b: u32) -> Result<Option<ViewId>> {
    let vc = view_coloring(a, root);
    nt_restricted_view_with(a, root, r_b, &vc)
}

fn nt_restricted_view_with(a: &mut ViewArena, root: ViewId, r_b: u32, vc: &ViewColoring) -> Result<Option<ViewId>> {
    let c0 = color_of(a, root).ok_or_else(|| Error::Precondition("view has no output colors".into()))?;
    match vc.is_triangle(c0) {
        None => return Err(Error::InsufficientDepth(format!("root color {c0} cannot be classified"))),
        Some(true) => return Ok(None),
        Some(false) => {}
    }
    if r_b == 0 {
        let t = a.tag(root);
        return Ok(Some(a.leaf(t)));
    }
    let mut memo = HashMap::new();
    prune(a, root, 0, r_b, vc, &mut memo)
}

fn prune(
    a: &mut ViewArena,
    id: ViewId,
    count: u32,
    r_b: u32,
    vc: &ViewColoring,
    memo: &mut HashMap<(ViewId, u32), Option<ViewId>>,
) -> Result<Option<ViewId>> {
    if let Some(&m) = memo.get(&(id, count)) {
        return Ok(m);
    }
    let node = a.node(id).clone();
    let mut kids = vec![];
    for (e, ch) in node.children {
        let cc = color_of(a, ch).ok_or_else(|| Error::Precondition("view has no output colors".into()))?;
        let tri = vc
            .is_triangle(cc)
            .ok_or_else(|| Error::InsufficientDepth(format!("color {cc} cannot be classified")))?;
        if !tri && count + 1 == r_b {
            let t = a.tag(ch);
            kids.push((e, a.leaf(t)));
        } else if let Some(s) = prune(a, ch, count + u32::from(!tri), r_b, vc, memo)? {
            kids.push((e, s));
        }
    }
    let res = (!kids.is_empty()).then(|| a.make(node.tag, kids));
    memo.insert((id, count), res);
    Ok(res)
}

/// Quotient of a pruned view by color: one vertex per color class, one edge
/// per projected view edge. Vertex ids are the colors.
pub fn reconstruct_r1(a: &ViewArena, pruned: ViewId, radius: u32) -> CenteredGraph {
    let mut g = LabeledGraph::new();
    let c0 = color_of(a, pruned).unwrap_or(0);
    g.add_vertex(c0);
    let mut seen = HashSet::new();
    let mut stack = vec![pruned];
    let mut loops = false;
    while let Some(id) = stack.pop() {
        if !seen.insert(id) {
            continue;
        }
        let c = color_of(a, id).unwrap_or(0);
        for &(_, ch) in a.children(id) {
            let cc = color_of(a, ch).unwrap_or(0);
            g.add_vertex(cc);
            if cc == c {
                loops = true;
            } else if !g.has_edge(c, cc) {
                g.add_edge(c, cc).expect("checked");
            }
            stack.push(ch);
        }
    }
    if loops {
        // A loop can never be part of a gadgeted ball; mark it with a pendant triangle-free defect.
        let extra = g.max_vertex_id().map_or(0, |m| m + 1);
        g.add_vertex(extra);
    }
    CenteredGraph { graph: g, center: c0, radius }
}

/// Contracts a quotient known to be a gadgeted ball to its original vertices,
/// labeled with the B components read from the view.
pub fn reconstruct_r2(
    r1: &CenteredGraph,
    vc: &ViewColoring,
) -> Result<(CenteredGraph, BTreeMap<VertexId, Label>)> {
    let (sk, _) = gadgeted_ball_skeleton(r1)
        .ok_or_else(|| Error::Precondition("quotient is not a correctly gadgeted ball".into()))?;
    let mut out = BTreeMap::new();
    for v in sk.vertices() {
        let bs = vc.b_values.get(&v).ok_or_else(|| Error::Precondition(format!("color {v} unseen")))?;
        if bs.len() != 1 {
            return Err(Error::Precondition(format!("color {v} carries several B outputs")));
        }
        out.insert(v, *bs.iter().next().unwrap());
    }
    let mut g = sk.unlabeled();
    for (&v, &l) in &out {
        g.set_node_label(v, l).ok();
    }
    let g = g.unlabeled();
    Ok((CenteredGraph { graph: g, center: r1.center, radius: r1.radius }, out))
}

/// Which rule of the derived constraint decided a view.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DVerdict {
    NotReconstructible,
    Palette,
    NoRestrictedView,
    NotGadgetedBall,
    BRejects,
    BAccepts,
}

impl DVerdict {
    pub fn accepted(self) -> bool {
        matches!(self, DVerdict::NoRestrictedView | DVerdict::NotGadgetedBall | DVerdict::BAccepts)
    }
}

static NEXT_KEY: AtomicU64 = AtomicU64::new(1);

/// The derived PN problem over cubic graphs for a given B.
#[derive(Clone)]
pub struct DContext {
    pub b: LclProblem,
    pub constants: DConstants,
    key: u64,
}

impl DContext {
    pub fn new(b: LclProblem) -> Result<DContext> {
        if b.edge_outputs || !b.node_outputs {
            return Err(Error::InvalidArgument("B must have node outputs only".into()));
        }
        Ok(DContext { constants: DConstants::new(b.radius)?, b, key: NEXT_KEY.fetch_add(1, Ordering::Relaxed) })
    }

    pub fn r_d(&self) -> Result<u32> {
        self.constants.r_d_u32()
    }

    pub fn output_ok(&self, l: Label) -> bool {
        let (c, b) = unpack_d(l);
        self.constants.color_in_palette(c as u64) && (b == BOTTOM || self.b.output_alphabet.contains(b))
    }

    pub fn classify(&self, a: &mut ViewArena, root: ViewId) -> DVerdict {
        let vc = view_coloring(a, root);
        if !vc.reconstructible {
            return DVerdict::NotReconstructible;
        }
        if vc.neighbors.keys().any(|&c| !self.constants.color_in_palette(c as u64)) {
            return DVerdict::Palette;
        }
        let pruned = match nt_restricted_view_with(a, root, self.b.radius, &vc) {
            Ok(Some(p)) => p,
            Ok(None) | Err(_) => return DVerdict::NoRestrictedView,
        };
        let r1 = reconstruct_r1(a, pruned, self.b.radius);
        if !is_correctly_gadgeted_ball(&r1) {
            return DVerdict::NotGadgetedBall;
        }
        let Ok((r2, out)) = reconstruct_r2(&r1, &vc) else {
            return DVerdict::BRejects;
        };
        let Ok(bb) = ball(&r2.graph, r2.center, self.b.radius) else {
            return DVerdict::BRejects;
        };
        let o = OutputLabeling::from_nodes(out).restrict(&bb.graph);
        if self.b.accepts(&bb, &o) {
            DVerdict::BAccepts
        } else {
            DVerdict::BRejects
        }
    }

    /// Membership of a radius-`r_D` labeled view, memoized in the arena.
    pub fn membership(&self, a: &mut ViewArena, root: ViewId) -> bool {
        if let Some(&v) = a.verdict_cache.get(&(self.key, root)) {
            return v;
        }
        let ok = self.r_d().map_or(false, |r| a.height(root) == r) && self.classify(a, root).accepted();
        a.verdict_cache.insert((self.key, root), ok);
        ok
    }

    pub fn problem(&self) -> Result<PnProblem> {
        let radius = self.r_d()?;
        let me = self.clone();
        let me2 = self.clone();
        Ok(PnProblem {
            name: format!("{}-gadgeted", self.b.name),
            output_alphabet: Alphabet::Predicate(Arc::new(move |l| me2.output_ok(l))),
            radius,
            constraint: PnConstraint::Oracle(Arc::new(move |a: &mut ViewArena, id| me.membership(a, id))),
        })
    }
}

/// Standalone membership test.
pub fn problem_d_membership(b: &LclProblem, a: &mut ViewArena, view: ViewId) -> Result<bool> {
    Ok(DContext::new(b.clone())?.membership(a, view))
}

/// Checks that no two distinct vertices within distance `k` share a color.
pub fn validate_distance_coloring(g: &LabeledGraph, chi: &BTreeMap<VertexId, u64>, k: u32) -> Result<()> {
    for v in g.vertices() {
        let cv = chi.get(&v).ok_or(Error::MissingLabel(v))?;
        for (w, _) in g.distances_within(v, k)? {
            if w != v && chi.get(&w) == Some(cv) {
                return Err(Error::InvalidColoring(format!("{v} and {w} share color {cv} within distance {k}")));
            }
        }
    }
    Ok(())
}

/// Originals carry their B output, all other vertices ⊥; the color component is `chi`.
pub fn lift_b_to_d(
    sigma_b: &BTreeMap<VertexId, Label>,
    chi: &BTreeMap<VertexId, u64>,
    gg: &GadgetedGraph,
    r_d: u32,
) -> Result<BTreeMap<VertexId, Label>> {
    validate_distance_coloring(&gg.graph, chi, 2 * r_d)?;
    let mut out = BTreeMap::new();
    for v in gg.graph.vertices() {
        let c = u32::try_from(chi[&v]).map_err(|_| Error::InvalidColoring(format!("color {} too large", chi[&v])))?;
        let b = match gg.classes.get(&v) {
            Some(VertexClass::Original) => *sigma_b.get(&v).ok_or(Error::MissingLabel(v))?,
            _ => BOTTOM,
        };
        out.insert(v, pack_d(c, b));
    }
    Ok(out)
}

/// Reads the B component at every original vertex.
pub fn lift_d_to_b(sigma_d: &BTreeMap<VertexId, Label>, gg: &GadgetedGraph) -> BTreeMap<VertexId, Label> {
    gg.originals()
        .filter_map(|v| sigma_d.get(&v).map(|&l| (v, unpack_d(l).1)))
        .collect()
}

/// Which pairs of same-colored vertices the edge-consistency hypothesis constrains.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum H2Reading {
    /// `v'` in the r-gball of `v`.
    Literal,
    /// `v` and `v'` together in some r-gball.
    SharedGball,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TheoremCheck {
    ExhaustedOk { starts: usize, nodes: u64 },
    Counterexample { coloring: BTreeMap<VertexId, u32>, original: VertexId, pair: (VertexId, VertexId) },
    BudgetExceeded { nodes: u64 },
}

struct TheoremSearch {
    nb: Vec<Vec<usize>>,
    near2: Vec<Vec<bool>>,
    related: Vec<Vec<bool>>,
    budget: u64,
    nodes: u64,
    failed: HashSet<Vec<usize>>,
}

impl TheoremSearch {
    fn merge(&self, cls: &[usize], a: usize, b: usize) -> Option<Vec<usize>> {
        let (ca, cb) = (cls[a], cls[b]);
        if ca == cb {
            return Some(cls.to_vec());
        }
        let ma: Vec<usize> = (0..cls.len()).filter(|&i| cls[i] == ca).collect();
        let mb: Vec<usize> = (0..cls.len()).filter(|&i| cls[i] == cb).collect();
        if ma.iter().any(|&x| mb.iter().any(|&y| self.near2[x][y])) {
            return None;
        }
        let keep = ca.min(cb);
        Some(cls.iter().map(|&c| if c == ca || c == cb { keep } else { c }).collect())
    }

    /// Unmet edge-consistency requirements: `(v', u)` needs a neighbor of `v'` in `u`'s class.
    fn violations(&self, cls: &[usize]) -> Vec<(usize, usize)> {
        let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for (i, &c) in cls.iter().enumerate() {
            groups.entry(c).or_default().push(i);
        }
        let mut out = vec![];
        for members in groups.values().filter(|m| m.len() > 1) {
            for &v in members {
                for &v2 in members {
                    if v == v2 || !self.related[v][v2] {
                        continue;
                    }
                    for &u in &self.nb[v] {
                        if !self.nb[v2].iter().any(|&u2| cls[u2] == cls[u]) {
                            out.push((v2, u));
                        }
                    }
                }
            }
        }
        out
    }

    /// Depth-first over merges, always repairing the requirement with the
    /// fewest feasible repairs; failed partitions are remembered.
    fn solve(&mut self, cls: Vec<usize>) -> std::result::Result<Option<Vec<usize>>, ()> {
        self.nodes += 1;
        if self.nodes > self.budget {
            return Err(());
        }
        if self.failed.contains(&cls) {
            return Ok(None);
        }
        let viol = self.violations(&cls);
        if viol.is_empty() {
            return Ok(Some(cls));
        }
        let mut best: Option<Vec<Vec<usize>>> = None;
        for (v2, u) in viol {
            let opts: Vec<Vec<usize>> = self.nb[v2].iter().filter_map(|&u2| self.merge(&cls, u2, u)).collect();
            if best.as_ref().map_or(true, |b| opts.len() < b.len()) {
                let done = opts.len() <= 1;
                best = Some(opts);
                if done {
                    break;
                }
            }
        }
        for next in best.unwrap_or_default() {
            if let Some(found) = self.solve(next)? {
                return Ok(Some(found));
            }
        }
        self.failed.insert(cls);
        Ok(None)
    }
}

/// Searches for a coloring meeting both hypotheses of the gadgeted-coloring
/// statement under which some original's r-gball repeats a color.
pub fn check_coloring_theorem(gg: &GadgetedGraph, r: u32, budget: u64) -> Result<TheoremCheck> {
    check_coloring_theorem_with(gg, r, budget, H2Reading::SharedGball)
}

pub fn check_coloring_theorem_with(gg: &GadgetedGraph, r: u32, budget: u64, reading: H2Reading) -> Result<TheoremCheck> {
    let g = &gg.graph;
    let ids: Vec<VertexId> = g.vertices().collect();
    let idx: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let n = ids.len();
    let nb: Vec<Vec<usize>> = ids.iter().map(|&v| g.neighbors(v).map(|w| idx[&w]).collect()).collect();
    let mut near2 = vec![vec![false; n]; n];
    for (i, &v) in ids.iter().enumerate() {
        for (w, _) in g.distances_within(v, 2)? {
            near2[i][idx[&w]] = true;
        }
    }
    let balls: Vec<Vec<usize>> = ids
        .iter()
        .map(|&v| Ok(gball(g, v, r)?.graph.vertices().map(|w| idx[&w]).collect()))
        .collect::<Result<_>>()?;
    let mut related = vec![vec![false; n]; n];
    match reading {
        H2Reading::Literal => {
            for (i, b) in balls.iter().enumerate() {
                for &j in b {
                    related[i][j] = true;
                }
            }
        }
        H2Reading::SharedGball => {
            for b in &balls {
                for &i in b {
                    for &j in b {
                        related[i][j] = true;
                    }
                }
            }
        }
    }
    let mut search = TheoremSearch { nb, near2, related, budget, nodes: 0, failed: HashSet::new() };
    let mut tried = HashSet::new();
    for o in gg.originals() {
        let ball_o = &balls[idx[&o]];
        for (x, &p) in ball_o.iter().enumerate() {
            for &q in &ball_o[x + 1..] {
                let key = (p.min(q), p.max(q));
                if search.near2[p][q] || !tried.insert(key) {
                    continue;
                }
                let start: Vec<usize> = (0..n).collect();
                let Some(cls) = search.merge(&start, p, q) else { continue };
                match search.solve(cls) {
                    Err(()) => return Ok(TheoremCheck::BudgetExceeded { nodes: search.nodes }),
                    Ok(Some(found)) => {
                        let mut compact: BTreeMap<usize, u32> = BTreeMap::new();
                        let coloring = ids
                            .iter()
                            .enumerate()
                            .map(|(i, &v)| {
                                let next = compact.len() as u32;
                                (v, *compact.entry(found[i]).or_insert(next))
                            })
                            .collect();
                        return Ok(TheoremCheck::Counterexample { coloring, original: o, pair: (ids[p], ids[q]) });
                    }
                    Ok(None) => {}
                }
            }
        }
    }
    Ok(TheoremCheck::ExhaustedOk { starts: tried.len(), nodes: search.nodes })
}

/// Two originals joined by chains of the given lengths (a theta graph when three are given).
pub fn theta_fixture(lengths: &[u32]) -> Result<GadgetedGraph> {
    let edges: Vec<_> = lengths.iter().map(|&l| (0, 1, l)).collect();
    gadget_multigraph(2, &edges)
}

/// Double cover of the three-chain theta graph with all chains of length
/// `len`: every pair of originals is joined by two equal chains, so a
/// covering map folds each original onto its twin.
pub fn twin_chain_fixture(len: u32) -> Result<GadgetedGraph> {
    gadget_multigraph(4, &[(0, 2, len), (0, 2, len), (0, 3, len), (1, 3, len), (1, 3, len), (1, 2, len)])
}

/// Same-class map of the covering `twin_chain_fixture -> theta` used as a folding coloring.
pub fn twin_chain_folding(gg: &GadgetedGraph) -> BTreeMap<VertexId, u64> {
    let fold = |v: VertexId| -> VertexId {
        match v {
            0 | 1 => 0,
            2 | 3 => 1,
            _ => v,
        }
    };
    let mut chi = BTreeMap::new();
    for v in 0..4 {
        chi.insert(v, fold(v) as u64);
    }
    // Chains (0,2)#1 ~ (1,3)#1, (0,2)#2 ~ (1,3)#2, (0,3) ~ (1,2).
    let pairs = [(0usize, 3usize), (1, 4), (2, 5)];
    for (k, (a, b)) in pairs.into_iter().enumerate() {
        for (i, (&x, &y)) in gg.expanded[a].vertices.iter().zip(&gg.expanded[b].vertices).enumerate() {
            let c = 2 + (k * 1000 + i) as u64;
            chi.insert(x, c);
            chi.insert(y, c);
        }
    }
    chi
}

/// Weighted view of `gg` suitable for DOT export.
pub fn classes_of(gg: &GadgetedGraph) -> &BTreeMap<VertexId, VertexClass> {
    &gg.classes
}

/// Original vertices in gadgeted graph coordinates for every edge key of `g`.
pub fn original_edge_map(gg: &GadgetedGraph) -> BTreeMap<EdgeKey, u32> {
    gg.expanded.iter().map(|e| (edge_key(e.u, e.v), e.length)).collect()
}

/// A solved instance of the derived PN problem: K4 gadgeted for a radius-1
/// 4-coloring, its B solution, an injective χ and the lifted D labeling.
#[derive(Clone)]
pub struct DFixture {
    pub source: LabeledGraph,
    pub gg: GadgetedGraph,
    pub d: DContext,
    pub sigma_b: BTreeMap<VertexId, Label>,
    pub chi: BTreeMap<VertexId, u64>,
    pub sigma_d: BTreeMap<VertexId, Label>,
}

pub fn gadgeted_k4_fixture() -> Result<DFixture> {
    let source = crate::graph::gen::complete(4);
    let b = crate::fixtures::four_coloring_lcl();
    let x = auto_edge_coloring(&source, b.radius)?;
    let gg = gadget_bd(&source, &x, b.radius)?;
    let d = DContext::new(b)?;
    let sigma_b: BTreeMap<VertexId, Label> = (0..4).map(|v| (v, v as Label + 1)).collect();
    let chi: BTreeMap<VertexId, u64> = gg.graph.vertices().map(|v| (v, v as u64 + 1)).collect();
    let sigma_d = lift_b_to_d(&sigma_b, &chi, &gg, d.r_d()?)?;
    Ok(DFixture { source, gg, d, sigma_b, chi, sigma_d })
}
