//! Compilation of the derived PN problem into node/edge constraints on
//! half-edge labels, and the lifts between the two.

use std::collections::{BTreeMap, BTreeSet};
use std::sync::{Arc, Mutex};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::formalisms::{verify_re, Alphabet, HalfEdgeLabeling, MultisetConstraint, ReProblem};
use crate::gadget_bd::DContext;
use crate::graph::{edge_name, parse_edge_name, LabeledGraph, Label, VertexId};
use crate::view::{ViewArena, ViewDag, ViewId};

/// Half-edge label: a view id in the shared arena and a port in `1..=3`.
pub fn pack_e(view: ViewId, port: u8) -> Label {
    ((view as Label) << 2) | port as Label
}

pub fn unpack_e(l: Label) -> (ViewId, u8) {
    ((l >> 2) as ViewId, (l & 3) as u8)
}

fn child_index(a: &ViewArena, t: ViewId, port: u8) -> Result<usize> {
    let n = a.children(t).len();
    if port == 0 || port as usize > n {
        return Err(Error::InvalidArgument(format!("port {port} out of range 1..={n}")));
    }
    Ok(port as usize - 1)
}

/// Branch of `t` entering the root neighbor at `port`, re-rooted there (depth `h - 1`).
pub fn directional_subtree(a: &ViewArena, t: ViewId, port: u8) -> Result<ViewId> {
    Ok(a.children(t)[child_index(a, t, port)?].1)
}

/// `t` without the branch at `port`, cut to depth `h - 1`.
pub fn pruned_subtree(a: &mut ViewArena, t: ViewId, port: u8) -> Result<ViewId> {
    let idx = child_index(a, t, port)?;
    let h = a.height(t);
    let w = a.without_child(t, idx)?;
    Ok(a.truncate(w, h.saturating_sub(1)))
}

/// Port of the root's `idx`-th child in canonical order.
pub fn port_of_neighbor(a: &ViewArena, t: ViewId, idx: usize) -> Result<u8> {
    if idx >= a.children(t).len() || idx >= 3 {
        return Err(Error::InvalidArgument(format!("root has no neighbor {idx}")));
    }
    Ok(idx as u8 + 1)
}

/// Inverse of [`port_of_neighbor`].
pub fn neighbor_by_port(a: &ViewArena, t: ViewId, port: u8) -> Result<usize> {
    child_index(a, t, port)
}

/// Compatibility of the two half-edge labels of one edge.
pub fn i_fit(a: &mut ViewArena, x: Label, y: Label) -> bool {
    let ((ta, pa), (tb, pb)) = (unpack_e(x), unpack_e(y));
    if ta as usize >= a.len() || tb as usize >= a.len() {
        return false;
    }
    let (Ok(da), Ok(db)) = (directional_subtree(a, ta, pa), directional_subtree(a, tb, pb)) else {
        return false;
    };
    let (Ok(pra), Ok(prb)) = (pruned_subtree(a, ta, pa), pruned_subtree(a, tb, pb)) else {
        return false;
    };
    da == prb && pra == db
}

/// The compiled problem. Labels refer to views in `arena`.
#[derive(Clone)]
pub struct EContext {
    pub d: DContext,
    pub arena: Arc<Mutex<ViewArena>>,
}

impl EContext {
    pub fn new(d: DContext) -> EContext {
        EContext { d, arena: Arc::default() }
    }

    fn certified(&self, a: &mut ViewArena, t: ViewId) -> bool {
        (t as usize) < a.len() && self.d.membership(a, t)
    }

    /// Node constraint: one certified view shared by all three labels, ports a permutation of 1..=3.
    pub fn node_ok(&self, labels: &[Label]) -> bool {
        if labels.len() != 3 {
            return false;
        }
        let t = unpack_e(labels[0]).0;
        let ports: BTreeSet<u8> = labels.iter().map(|&l| unpack_e(l).1).collect();
        if labels.iter().any(|&l| unpack_e(l).0 != t) || ports != BTreeSet::from([1, 2, 3]) {
            return false;
        }
        let mut a = self.arena.lock().unwrap();
        a.children(t).len() == 3 && self.certified(&mut a, t)
    }

    pub fn edge_ok(&self, labels: &[Label]) -> bool {
        labels.len() == 2 && i_fit(&mut self.arena.lock().unwrap(), labels[0], labels[1])
    }

    pub fn problem(&self) -> ReProblem {
        let (n, e) = (self.clone(), self.clone());
        ReProblem {
            name: format!("{}-re", self.d.b.name),
            alphabet: Alphabet::Predicate(Arc::new(|l| (1..=3).contains(&unpack_e(l).1))),
            node_constraint: MultisetConstraint::Oracle(Arc::new(move |ls: &[Label]| n.node_ok(ls))),
            edge_constraint: MultisetConstraint::Oracle(Arc::new(move |ls: &[Label]| e.edge_ok(ls))),
        }
    }

    /// Labels each half-edge `(v, u)` with `v`'s view and the port of `u`.
    pub fn lift_d_to_e(&self, g: &LabeledGraph, sigma_d: &BTreeMap<VertexId, Label>) -> Result<HalfEdgeLabeling> {
        g.check_cubic()?;
        let r = self.d.r_d()?;
        let mut a = self.arena.lock().unwrap();
        let (roots, branches) = a.pn_views_with_branches(g, Some(sigma_d), r);
        let mut hel = HalfEdgeLabeling::new();
        for v in g.vertices() {
            let t = roots[&v];
            if !self.d.membership(&mut a, t) {
                return Err(Error::Precondition(format!("view of {v} is not in the derived constraint")));
            }
            let mut free: Vec<VertexId> = g.neighbors(v).collect();
            for (idx, &(_, child)) in a.children(t).iter().enumerate() {
                let pos = free
                    .iter()
                    .position(|&u| branches[&(v, u)] == child)
                    .ok_or_else(|| Error::Precondition(format!("no neighbor of {v} matches branch {idx}")))?;
                let u = free.remove(pos);
                hel.insert((v, u), pack_e(t, port_of_neighbor(&a, t, idx)?));
            }
        }
        Ok(hel)
    }

    /// Root labels of the views carried by a legal labeling.
    pub fn lift_e_to_d(&self, g: &LabeledGraph, hel: &HalfEdgeLabeling) -> Result<BTreeMap<VertexId, Label>> {
        let verdict = verify_re(&self.problem(), g, hel)?;
        if !verdict.overall {
            return Err(Error::Precondition(format!("labeling fails at {} sites", verdict.failures.len())));
        }
        Ok(self.read_roots(g, hel))
    }

    fn read_roots(&self, g: &LabeledGraph, hel: &HalfEdgeLabeling) -> BTreeMap<VertexId, Label> {
        let a = self.arena.lock().unwrap();
        g.vertices()
            .filter_map(|v| {
                let u = g.neighbors(v).next()?;
                let t = unpack_e(*hel.get(&(v, u))?).0;
                ((t as usize) < a.len()).then(|| a.tag(t).output).flatten().map(|o| (v, o))
            })
            .collect()
    }

    /// For every vertex and every depth `k <= r_D`, the depth-`k` view of the
    /// read-back labeling equals the carried view cut at `k`. Returns the first
    /// failing `(vertex, k)`.
    pub fn t_good(&self, g: &LabeledGraph, hel: &HalfEdgeLabeling) -> Result<Option<(VertexId, u32)>> {
        let l = self.read_roots(g, hel);
        let r = self.d.r_d()?;
        let mut a = self.arena.lock().unwrap();
        let views = a.pn_views(g, Some(&l), r);
        for v in g.vertices() {
            let u = g.neighbors(v).next().ok_or(Error::IsolatedVertex(v))?;
            let t = unpack_e(hel[&(v, u)]).0;
            for k in 0..=r {
                let x = a.truncate(views[&v], k);
                let y = a.truncate(t, k);
                if x != y {
                    return Ok(Some((v, k)));
                }
            }
        }
        Ok(None)
    }
}

/// JSON form of a half-edge labeling: `{"half_edges": {"v-u@v": "node:port"}, "views": table}`.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HalfEdgeJson {
    pub half_edges: BTreeMap<String, String>,
    pub views: ViewDag,
}

pub fn half_edge_key(v: VertexId, u: VertexId) -> String {
    format!("{}@{v}", edge_name(v, u))
}

pub fn parse_half_edge_key(s: &str) -> Result<(VertexId, VertexId)> {
    let (e, at) = s
        .split_once('@')
        .ok_or_else(|| Error::Parse(format!("half-edge key {s:?} lacks '@'")))?;
    let (a, b) = parse_edge_name(e)?;
    let v: VertexId = at.parse().map_err(|_| Error::Parse(format!("bad vertex in {s:?}")))?;
    match v {
        _ if v == a => Ok((a, b)),
        _ if v == b => Ok((b, a)),
        _ => Err(Error::Parse(format!("{v} is not an endpoint in {s:?}"))),
    }
}

pub fn export_half_edges(a: &ViewArena, hel: &HalfEdgeLabeling) -> HalfEdgeJson {
    let roots: Vec<ViewId> = hel.values().map(|&l| unpack_e(l).0).collect();
    let (views, pos) = a.export_dag(&roots);
    let half_edges = hel
        .iter()
        .zip(pos)
        .map(|(((v, u), &l), p)| (half_edge_key(*v, *u), format!("{p}:{}", unpack_e(l).1)))
        .collect();
    HalfEdgeJson { half_edges, views }
}

pub fn import_half_edges(a: &mut ViewArena, j: &HalfEdgeJson) -> Result<HalfEdgeLabeling> {
    let ids = a.import_dag(&j.views)?;
    let mut hel = HalfEdgeLabeling::new();
    for (k, val) in &j.half_edges {
        let (node, port) = val
            .split_once(':')
            .ok_or_else(|| Error::Parse(format!("label {val:?} is not node:port")))?;
        let node: usize = node.parse().map_err(|_| Error::Parse(format!("bad node in {val:?}")))?;
        let port: u8 = port.parse().map_err(|_| Error::Parse(format!("bad port in {val:?}")))?;
        let id = *ids.get(node).ok_or_else(|| Error::Parse(format!("node {node} not in table")))?;
        hel.insert(parse_half_edge_key(k)?, pack_e(id, port));
    }
    Ok(hel)
}
