//! Port-numbering views: trees of non-backtracking walks.
//!
//! Two representations are offered. [`RootedView`] is an explicit tree and is
//! convenient for tiny radii. [`ViewArena`] hash-conses subtrees into a DAG so
//! that views of radius 30 and more stay small; inside one arena two views
//! are isomorphic exactly when their ids are equal.

use std::cmp::Ordering;
use std::collections::{BTreeMap, HashMap};

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};

use crate::graph::{LabeledGraph, Label, VertexId};

/// Labels visible at a view node: the input label and output label of the walk's endpoint.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Tag {
    pub input: Option<Label>,
    pub output: Option<Label>,
}

impl Tag {
    pub fn output(l: Label) -> Tag {
        Tag { input: None, output: Some(l) }
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TreeNode {
    pub tag: Tag,
    /// Label of the edge from the parent; `None` at the root or for unlabeled edges.
    pub edge: Option<Label>,
    pub children: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RootedView {
    pub nodes: Vec<TreeNode>,
    pub root: usize,
    pub radius: u32,
}

impl RootedView {
    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn depth(&self) -> u32 {
        fn d(t: &RootedView, i: usize) -> u32 {
            t.nodes[i].children.iter().map(|&c| 1 + d(t, c)).max().unwrap_or(0)
        }
        d(self, self.root)
    }

    /// Canonical string: children ordered by their own canonical strings.
    pub fn canonical_string(&self) -> String {
        fn rec(t: &RootedView, i: usize) -> String {
            let n = &t.nodes[i];
            let mut kids: Vec<String> = n.children.iter().map(|&c| rec(t, c)).collect();
            kids.sort();
            format!(
                "({}/{}|{}[{}])",
                fmt_opt(n.tag.input),
                fmt_opt(n.tag.output),
                fmt_opt(n.edge),
                kids.join(",")
            )
        }
        if self.nodes.is_empty() {
            return String::new();
        }
        rec(self, self.root)
    }

    /// Single-node view.
    pub fn leaf(tag: Tag) -> RootedView {
        RootedView {
            nodes: vec![TreeNode { tag, edge: None, children: vec![] }],
            root: 0,
            radius: 0,
        }
    }
}

fn fmt_opt(l: Option<Label>) -> String {
    match l {
        None => "_".into(),
        Some(crate::graph::BOTTOM) => "B".into(),
        Some(x) => x.to_string(),
    }
}

/// Explicit non-backtracking-walk tree of radius `r` around `v`.
pub fn pn_view(
    g: &LabeledGraph,
    outputs: Option<&BTreeMap<VertexId, Label>>,
    v: VertexId,
    r: u32,
) -> Result<RootedView> {
    if !g.contains(v) {
        return Err(Error::UnknownVertex(v));
    }
    let tag = |x: VertexId| Tag {
        input: g.node_label(x),
        output: outputs.and_then(|o| o.get(&x).copied()),
    };
    let mut nodes = vec![TreeNode { tag: tag(v), edge: None, children: vec![] }];
    // (node index, previous vertex, current vertex, depth)
    let mut stack = vec![(0usize, None::<VertexId>, v, 0u32)];
    while let Some((idx, prev, cur, d)) = stack.pop() {
        if d == r {
            continue;
        }
        for w in g.neighbors(cur) {
            if Some(w) == prev {
                continue;
            }
            let id = nodes.len();
            nodes.push(TreeNode {
                tag: tag(w),
                edge: g.edge_label(cur, w),
                children: vec![],
            });
            nodes[idx].children.push(id);
            stack.push((id, Some(cur), w, d + 1));
        }
    }
    Ok(RootedView { nodes, root: 0, radius: r })
}

pub fn rooted_tree_iso(a: &RootedView, b: &RootedView) -> bool {
    a.canonical_string() == b.canonical_string()
}

pub type ViewId = u32;

/// One node of a serialized view table; children point to earlier entries.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct DagNode {
    pub input: Option<Label>,
    pub output: Option<Label>,
    pub children: Vec<(Option<Label>, usize)>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ViewDag {
    pub nodes: Vec<DagNode>,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct ViewNode {
    pub tag: Tag,
    /// (edge label, child), sorted canonically.
    pub children: Vec<(Option<Label>, ViewId)>,
    pub height: u32,
}

/// Hash-consed store of canonical rooted trees.
#[derive(Default)]
pub struct ViewArena {
    nodes: Vec<ViewNode>,
    intern: HashMap<(Tag, Vec<(Option<Label>, ViewId)>), ViewId>,
    cmp_memo: HashMap<(ViewId, ViewId), Ordering>,
    trunc_memo: HashMap<(ViewId, u32), ViewId>,
    size_memo: HashMap<ViewId, u128>,
    /// Free-form memo for oracles: (problem key, view) -> verdict.
    pub verdict_cache: HashMap<(u64, ViewId), bool>,
}

impl ViewArena {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn node(&self, id: ViewId) -> &ViewNode {
        &self.nodes[id as usize]
    }

    pub fn tag(&self, id: ViewId) -> Tag {
        self.nodes[id as usize].tag
    }

    pub fn children(&self, id: ViewId) -> &[(Option<Label>, ViewId)] {
        &self.nodes[id as usize].children
    }

    pub fn height(&self, id: ViewId) -> u32 {
        self.nodes[id as usize].height
    }

    /// Total order on trees; `Equal` iff isomorphic.
    pub fn canonical_cmp(&mut self, a: ViewId, b: ViewId) -> Ordering {
        if a == b {
            return Ordering::Equal;
        }
        if let Some(&o) = self.cmp_memo.get(&(a, b)) {
            return o;
        }
        let (na, nb) = (&self.nodes[a as usize], &self.nodes[b as usize]);
        let mut o = na.tag.cmp(&nb.tag);
        if o == Ordering::Equal {
            let ca = na.children.clone();
            let cb = nb.children.clone();
            for (x, y) in ca.iter().zip(cb.iter()) {
                o = x.0.cmp(&y.0).then_with(|| self.canonical_cmp(x.1, y.1));
                if o != Ordering::Equal {
                    break;
                }
            }
            if o == Ordering::Equal {
                o = ca.len().cmp(&cb.len());
            }
        }
        self.cmp_memo.insert((a, b), o);
        self.cmp_memo.insert((b, a), o.reverse());
        o
    }

    fn sort_children(&mut self, kids: &mut [(Option<Label>, ViewId)]) {
        // Insertion sort: child lists are tiny and comparisons are memoized.
        for i in 1..kids.len() {
            let mut j = i;
            while j > 0 {
                let o = kids[j - 1]
                    .0
                    .cmp(&kids[j].0)
                    .then_with(|| self.canonical_cmp(kids[j - 1].1, kids[j].1));
                if o != Ordering::Greater {
                    break;
                }
                kids.swap(j - 1, j);
                j -= 1;
            }
        }
    }

    /// Interns a node; children may be given in any order.
    pub fn make(&mut self, tag: Tag, mut children: Vec<(Option<Label>, ViewId)>) -> ViewId {
        self.sort_children(&mut children);
        let key = (tag, children);
        if let Some(&id) = self.intern.get(&key) {
            return id;
        }
        let height = key.1.iter().map(|&(_, c)| 1 + self.height(c)).max().unwrap_or(0);
        let id = self.nodes.len() as ViewId;
        self.nodes.push(ViewNode {
            tag,
            children: key.1.clone(),
            height,
        });
        self.intern.insert(key, id);
        id
    }

    pub fn leaf(&mut self, tag: Tag) -> ViewId {
        self.make(tag, vec![])
    }

    /// Cuts the tree at `depth`.
    pub fn truncate(&mut self, id: ViewId, depth: u32) -> ViewId {
        if self.height(id) <= depth {
            return id;
        }
        if let Some(&t) = self.trunc_memo.get(&(id, depth)) {
            return t;
        }
        let node = self.nodes[id as usize].clone();
        let t = if depth == 0 {
            self.make(node.tag, vec![])
        } else {
            let kids = node
                .children
                .iter()
                .map(|&(e, c)| (e, self.truncate(c, depth - 1)))
                .collect();
            self.make(node.tag, kids)
        };
        self.trunc_memo.insert((id, depth), t);
        t
    }

    /// Root with its `idx`-th child removed.
    pub fn without_child(&mut self, id: ViewId, idx: usize) -> Result<ViewId> {
        let node = self.nodes[id as usize].clone();
        if idx >= node.children.len() {
            return Err(Error::InvalidArgument(format!("root has no child {idx}")));
        }
        let mut kids = node.children;
        kids.remove(idx);
        Ok(self.make(node.tag, kids))
    }

    /// Replaces the tag of the root only.
    pub fn with_root_tag(&mut self, id: ViewId, tag: Tag) -> ViewId {
        let kids = self.nodes[id as usize].children.clone();
        self.make(tag, kids)
    }

    /// Number of walk nodes the DAG stands for.
    pub fn tree_size(&mut self, id: ViewId) -> u128 {
        if let Some(&s) = self.size_memo.get(&id) {
            return s;
        }
        let kids = self.nodes[id as usize].children.clone();
        let s = 1 + kids.iter().map(|&(_, c)| self.tree_size(c)).sum::<u128>();
        self.size_memo.insert(id, s);
        s
    }

    /// Views of every vertex at radius `r`, sharing one walk memo.
    pub fn pn_views(
        &mut self,
        g: &LabeledGraph,
        outputs: Option<&BTreeMap<VertexId, Label>>,
        r: u32,
    ) -> HashMap<VertexId, ViewId> {
        let mut memo = HashMap::new();
        g.vertices()
            .map(|v| (v, self.walk(g, outputs, None, v, r, &mut memo)))
            .collect()
    }

    /// Views of every vertex plus, for each half-edge `(v, u)`, the branch of
    /// `v`'s view that enters `u` (depth `r - 1`).
    pub fn pn_views_with_branches(
        &mut self,
        g: &LabeledGraph,
        outputs: Option<&BTreeMap<VertexId, Label>>,
        r: u32,
    ) -> (HashMap<VertexId, ViewId>, HashMap<(VertexId, VertexId), ViewId>) {
        let mut memo = HashMap::new();
        let roots: HashMap<VertexId, ViewId> = g
            .vertices()
            .map(|v| (v, self.walk(g, outputs, None, v, r, &mut memo)))
            .collect();
        let mut branches = HashMap::new();
        if r > 0 {
            for v in g.vertices() {
                for u in g.neighbors(v) {
                    branches.insert((v, u), self.walk(g, outputs, Some(v), u, r - 1, &mut memo));
                }
            }
        }
        (roots, branches)
    }

    pub fn pn_view(
        &mut self,
        g: &LabeledGraph,
        outputs: Option<&BTreeMap<VertexId, Label>>,
        v: VertexId,
        r: u32,
    ) -> Result<ViewId> {
        if !g.contains(v) {
            return Err(Error::UnknownVertex(v));
        }
        let mut memo = HashMap::new();
        Ok(self.walk(g, outputs, None, v, r, &mut memo))
    }

    fn walk(
        &mut self,
        g: &LabeledGraph,
        outputs: Option<&BTreeMap<VertexId, Label>>,
        prev: Option<VertexId>,
        cur: VertexId,
        rem: u32,
        memo: &mut HashMap<(Option<VertexId>, VertexId, u32), ViewId>,
    ) -> ViewId {
        if let Some(&id) = memo.get(&(prev, cur, rem)) {
            return id;
        }
        let tag = Tag {
            input: g.node_label(cur),
            output: outputs.and_then(|o| o.get(&cur).copied()),
        };
        let mut kids = vec![];
        if rem > 0 {
            let nb: Vec<VertexId> = g.neighbors(cur).filter(|&w| Some(w) != prev).collect();
            for w in nb {
                let c = self.walk(g, outputs, Some(cur), w, rem - 1, memo);
                kids.push((g.edge_label(cur, w), c));
            }
        }
        let id = self.make(tag, kids);
        memo.insert((prev, cur, rem), id);
        id
    }

    /// Imports an explicit tree.
    pub fn import(&mut self, t: &RootedView) -> ViewId {
        fn rec(a: &mut ViewArena, t: &RootedView, i: usize) -> ViewId {
            let n = &t.nodes[i];
            let kids = n
                .children
                .iter()
                .map(|&c| (t.nodes[c].edge, rec(a, t, c)))
                .collect();
            a.make(n.tag, kids)
        }
        rec(self, t, t.root)
    }

    /// Expands a DAG node into an explicit tree. Exponential in the height.
    pub fn export(&self, id: ViewId, radius: u32) -> RootedView {
        fn rec(a: &ViewArena, id: ViewId, edge: Option<Label>, out: &mut Vec<TreeNode>) -> usize {
            let idx = out.len();
            out.push(TreeNode { tag: a.tag(id), edge, children: vec![] });
            for &(e, c) in a.children(id) {
                let ci = rec(a, c, e, out);
                out[idx].children.push(ci);
            }
            idx
        }
        let mut nodes = vec![];
        rec(self, id, None, &mut nodes);
        RootedView { nodes, root: 0, radius }
    }

    /// Serializable table of every node reachable from `roots`, children first.
    /// Returns the table and the position of each root in it.
    pub fn export_dag(&self, roots: &[ViewId]) -> (ViewDag, Vec<usize>) {
        let mut pos: HashMap<ViewId, usize> = HashMap::new();
        let mut dag = ViewDag::default();
        fn visit(a: &ViewArena, id: ViewId, pos: &mut HashMap<ViewId, usize>, dag: &mut ViewDag) -> usize {
            if let Some(&p) = pos.get(&id) {
                return p;
            }
            let kids: Vec<(Option<Label>, usize)> = a
                .children(id)
                .iter()
                .map(|&(e, c)| (e, visit(a, c, pos, dag)))
                .collect();
            let t = a.tag(id);
            dag.nodes.push(DagNode { input: t.input, output: t.output, children: kids });
            pos.insert(id, dag.nodes.len() - 1);
            dag.nodes.len() - 1
        }
        let at = roots.iter().map(|&r| visit(self, r, &mut pos, &mut dag)).collect();
        (dag, at)
    }

    /// Interns every node of a table; returns arena ids by table position.
    pub fn import_dag(&mut self, dag: &ViewDag) -> Result<Vec<ViewId>> {
        let mut ids: Vec<ViewId> = Vec::with_capacity(dag.nodes.len());
        for (i, n) in dag.nodes.iter().enumerate() {
            let mut kids = vec![];
            for &(e, c) in &n.children {
                if c >= i {
                    return Err(Error::Parse(format!("view node {i} refers forward to {c}")));
                }
                kids.push((e, ids[c]));
            }
            ids.push(self.make(Tag { input: n.input, output: n.output }, kids));
        }
        Ok(ids)
    }

    /// Canonical string of the expanded tree; only sensible for small heights.
    pub fn canonical_string(&self, id: ViewId) -> String {
        self.export(id, self.height(id)).canonical_string()
    }
}
