//! Isomorphism of small labeled graphs via color refinement plus
//! individualization, with an explicit check on every candidate mapping.

use std::collections::{BTreeMap, HashMap, VecDeque};

use crate::graph::{CenteredGraph, LabeledGraph, Label, VertexId};

#[derive(Clone, Copy, Debug, Default)]
pub struct IsoOptions {
    /// Compare node labels.
    pub node_labels: bool,
    /// Compare edge labels.
    pub edge_labels: bool,
}

impl IsoOptions {
    pub const ALL: IsoOptions = IsoOptions {
        node_labels: true,
        edge_labels: true,
    };
    pub const STRUCTURE: IsoOptions = IsoOptions {
        node_labels: false,
        edge_labels: false,
    };
}

struct Dense {
    ids: Vec<VertexId>,
    adj: Vec<Vec<usize>>,
    node: Vec<Option<Label>>,
    edge: HashMap<(usize, usize), Option<Label>>,
}

impl Dense {
    fn new(g: &LabeledGraph, opt: IsoOptions) -> Dense {
        let ids: Vec<VertexId> = g.vertices().collect();
        let index: HashMap<VertexId, usize> = ids.iter().enumerate().map(|(i, &v)| (v, i)).collect();
        let adj = ids
            .iter()
            .map(|&v| g.neighbors(v).map(|w| index[&w]).collect())
            .collect();
        let node = ids
            .iter()
            .map(|&v| if opt.node_labels { g.node_label(v) } else { None })
            .collect();
        let mut edge = HashMap::new();
        for (u, v) in g.edges() {
            let l = if opt.edge_labels { g.edge_label(u, v) } else { None };
            let (a, b) = (index[&u], index[&v]);
            edge.insert((a, b), l);
            edge.insert((b, a), l);
        }
        Dense { ids, adj, node, edge }
    }

    fn n(&self) -> usize {
        self.ids.len()
    }

    fn triangles(&self, v: usize) -> usize {
        let nb = &self.adj[v];
        let mut t = 0;
        for i in 0..nb.len() {
            for j in i + 1..nb.len() {
                if self.edge.contains_key(&(nb[i], nb[j])) {
                    t += 1;
                }
            }
        }
        t
    }

    fn distance_histogram(&self, v: usize) -> Vec<u32> {
        let mut dist = vec![u32::MAX; self.n()];
        dist[v] = 0;
        let mut q = VecDeque::from([v]);
        let mut hist = vec![];
        while let Some(u) = q.pop_front() {
            let d = dist[u] as usize;
            if hist.len() <= d {
                hist.push(0);
            }
            hist[d] += 1;
            for &w in &self.adj[u] {
                if dist[w] == u32::MAX {
                    dist[w] = dist[u] + 1;
                    q.push_back(w);
                }
            }
        }
        hist
    }

    fn initial_key(&self, v: usize, centered: bool) -> InitKey {
        let mut inc: Vec<Option<Label>> = self.adj[v].iter().map(|&w| self.edge[&(v, w)]).collect();
        inc.sort_unstable();
        InitKey {
            center: centered,
            label: self.node[v],
            degree: self.adj[v].len(),
            incident: inc,
            triangles: self.triangles(v),
            hist: self.distance_histogram(v),
        }
    }
}

#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
struct InitKey {
    center: bool,
    label: Option<Label>,
    degree: usize,
    incident: Vec<Option<Label>>,
    triangles: usize,
    hist: Vec<u32>,
}

struct Pair<'a> {
    a: &'a Dense,
    b: &'a Dense,
}

impl Pair<'_> {
    fn nb(&self, side: usize, v: usize) -> &[usize] {
        if side == 0 {
            &self.a.adj[v]
        } else {
            &self.b.adj[v]
        }
    }

    fn el(&self, side: usize, u: usize, v: usize) -> Option<Label> {
        if side == 0 {
            self.a.edge[&(u, v)]
        } else {
            self.b.edge[&(u, v)]
        }
    }

    /// Refines both colorings jointly until stable. Returns false once the
    /// color histograms of the two sides differ.
    fn refine(&self, ca: &mut Vec<u32>, cb: &mut Vec<u32>) -> bool {
        let mut classes = count_classes(ca, cb);
        loop {
            if !same_histogram(ca, cb) {
                return false;
            }
            let mut intern: HashMap<(u32, Vec<(Option<Label>, u32)>), u32> = HashMap::new();
            let mut sigs: [Vec<(u32, Vec<(Option<Label>, u32)>)>; 2] = [vec![], vec![]];
            for side in 0..2 {
                let cols: &Vec<u32> = if side == 0 { ca } else { cb };
                for v in 0..cols.len() {
                    let mut s: Vec<(Option<Label>, u32)> = self
                        .nb(side, v)
                        .iter()
                        .map(|&w| (self.el(side, v, w), cols[w]))
                        .collect();
                    s.sort_unstable();
                    sigs[side].push((cols[v], s));
                }
            }
            // Deterministic ids: sort distinct signatures.
            let mut all: Vec<&(u32, Vec<(Option<Label>, u32)>)> =
                sigs[0].iter().chain(sigs[1].iter()).collect();
            all.sort();
            all.dedup();
            for (i, s) in all.into_iter().enumerate() {
                intern.insert(s.clone(), i as u32);
            }
            *ca = sigs[0].iter().map(|s| intern[s]).collect();
            *cb = sigs[1].iter().map(|s| intern[s]).collect();
            let next = count_classes(ca, cb);
            if next == classes {
                return same_histogram(ca, cb);
            }
            classes = next;
        }
    }

    fn search(&self, ca: Vec<u32>, cb: Vec<u32>, budget: &mut u64) -> Option<Vec<usize>> {
        if *budget == 0 {
            return None;
        }
        *budget -= 1;
        let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
        for &c in &ca {
            *counts.entry(c).or_default() += 1;
        }
        let target = counts
            .iter()
            .filter(|(_, &n)| n > 1)
            .min_by_key(|(&c, &n)| (n, c))
            .map(|(&c, _)| c);
        let Some(target) = target else {
            let mut inv = HashMap::new();
            for (v, &c) in cb.iter().enumerate() {
                inv.insert(c, v);
            }
            let map: Vec<usize> = ca.iter().map(|c| inv[c]).collect();
            return self.verify(&map).then_some(map);
        };
        let fresh = ca.iter().chain(cb.iter()).max().copied().unwrap_or(0) + 1;
        let va = ca.iter().position(|&c| c == target).unwrap();
        for vb in (0..cb.len()).filter(|&v| cb[v] == target) {
            let mut na = ca.clone();
            let mut nb = cb.clone();
            na[va] = fresh;
            nb[vb] = fresh;
            if self.refine(&mut na, &mut nb) {
                if let Some(m) = self.search(na, nb, budget) {
                    return Some(m);
                }
            }
            if *budget == 0 {
                return None;
            }
        }
        None
    }

    fn verify(&self, map: &[usize]) -> bool {
        let (a, b) = (self.a, self.b);
        for v in 0..a.n() {
            if a.node[v] != b.node[map[v]] || a.adj[v].len() != b.adj[map[v]].len() {
                return false;
            }
            for &w in &a.adj[v] {
                match b.edge.get(&(map[v], map[w])) {
                    Some(l) if *l == a.edge[&(v, w)] => {}
                    _ => return false,
                }
            }
        }
        true
    }
}

fn count_classes(ca: &[u32], cb: &[u32]) -> usize {
    let mut all: Vec<u32> = ca.iter().chain(cb.iter()).copied().collect();
    all.sort_unstable();
    all.dedup();
    all.len()
}

fn same_histogram(ca: &[u32], cb: &[u32]) -> bool {
    let mut x = ca.to_vec();
    let mut y = cb.to_vec();
    x.sort_unstable();
    y.sort_unstable();
    x == y
}

/// Search-node budget of the backtracking phase.
pub const DEFAULT_ISO_BUDGET: u64 = 1_000_000;

/// Finds an isomorphism `a -> b`, optionally mapping `center_a` to `center_b`.
pub fn find_isomorphism(
    a: &LabeledGraph,
    b: &LabeledGraph,
    centers: Option<(VertexId, VertexId)>,
    opt: IsoOptions,
) -> Option<BTreeMap<VertexId, VertexId>> {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return None;
    }
    let da = Dense::new(a, opt);
    let db = Dense::new(b, opt);
    let (ia, ib) = match centers {
        Some((x, y)) => (
            Some(da.ids.iter().position(|&v| v == x)?),
            Some(db.ids.iter().position(|&v| v == y)?),
        ),
        None => (None, None),
    };
    let ka: Vec<InitKey> = (0..da.n()).map(|v| da.initial_key(v, Some(v) == ia)).collect();
    let kb: Vec<InitKey> = (0..db.n()).map(|v| db.initial_key(v, Some(v) == ib)).collect();
    let mut keys: Vec<&InitKey> = ka.iter().chain(kb.iter()).collect();
    keys.sort();
    keys.dedup();
    let intern: HashMap<&InitKey, u32> = keys.into_iter().enumerate().map(|(i, k)| (k, i as u32)).collect();
    let mut ca: Vec<u32> = ka.iter().map(|k| intern[k]).collect();
    let mut cb: Vec<u32> = kb.iter().map(|k| intern[k]).collect();
    let pair = Pair { a: &da, b: &db };
    if !pair.refine(&mut ca, &mut cb) {
        return None;
    }
    let mut budget = DEFAULT_ISO_BUDGET;
    let map = pair.search(ca, cb, &mut budget)?;
    Some(
        map.iter()
            .enumerate()
            .map(|(i, &j)| (da.ids[i], db.ids[j]))
            .collect(),
    )
}

pub fn graph_iso(a: &LabeledGraph, b: &LabeledGraph, opt: IsoOptions) -> bool {
    find_isomorphism(a, b, None, opt).is_some()
}

/// Label-preserving isomorphism that maps center to center.
pub fn centered_iso(a: &CenteredGraph, b: &CenteredGraph) -> bool {
    a.radius == b.radius
        && find_isomorphism(&a.graph, &b.graph, Some((a.center, b.center)), IsoOptions::ALL).is_some()
}

/// Applies a vertex map to check it is an isomorphism; used by tests as an oracle.
pub fn is_isomorphism(a: &LabeledGraph, b: &LabeledGraph, map: &BTreeMap<VertexId, VertexId>) -> bool {
    if a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count() {
        return false;
    }
    a.vertices().all(|v| {
        map.get(&v)
            .is_some_and(|&w| b.contains(w) && a.node_label(v) == b.node_label(w))
    }) && a.edges().all(|(u, v)| {
        let (x, y) = (map[&u], map[&v]);
        b.has_edge(x, y) && a.edge_label(u, v) == b.edge_label(x, y)
    }) && {
        let mut img: Vec<_> = map.values().collect();
        img.sort();
        img.dedup();
        img.len() == a.vertex_count()
    }
}

/// Exhaustive permutation search for tiny graphs; independent of the refinement engine.
pub fn brute_force_iso(a: &LabeledGraph, b: &LabeledGraph, centers: Option<(VertexId, VertexId)>) -> bool {
    let va: Vec<VertexId> = a.vertices().collect();
    let vb: Vec<VertexId> = b.vertices().collect();
    if va.len() != vb.len() || a.edge_count() != b.edge_count() {
        return false;
    }
    let mut used = vec![false; vb.len()];
    let mut map = BTreeMap::new();
    fn rec(
        i: usize,
        va: &[VertexId],
        vb: &[VertexId],
        used: &mut [bool],
        map: &mut BTreeMap<VertexId, VertexId>,
        a: &LabeledGraph,
        b: &LabeledGraph,
        centers: Option<(VertexId, VertexId)>,
    ) -> bool {
        if i == va.len() {
            return is_isomorphism(a, b, map);
        }
        for j in 0..vb.len() {
            if used[j] {
                continue;
            }
            if let Some((x, y)) = centers {
                if (va[i] == x) != (vb[j] == y) {
                    continue;
                }
            }
            used[j] = true;
            map.insert(va[i], vb[j]);
            if rec(i + 1, va, vb, used, map, a, b, centers) {
                return true;
            }
            map.remove(&va[i]);
            used[j] = false;
        }
        false
    }
    rec(0, &va, &vb, &mut used, &mut map, a, b, centers)
}

/// Orbit-insensitive structural fingerprint (sorted initial keys); equal for isomorphic graphs.
pub fn fingerprint(g: &LabeledGraph) -> u64 {
    use std::hash::{Hash, Hasher};
    let d = Dense::new(g, IsoOptions::ALL);
    let mut keys: Vec<InitKey> = (0..d.n()).map(|v| d.initial_key(v, false)).collect();
    keys.sort();
    let mut h = std::collections::hash_map::DefaultHasher::new();
    keys.hash(&mut h);
    g.edge_count().hash(&mut h);
    h.finish()
}

/// Search-node budget for [`canonical_order`].
pub const DEFAULT_CANON_BUDGET: u64 = 200_000;

type Certificate = (Vec<Option<Label>>, Vec<(usize, usize, Option<Label>)>);

fn certificate(d: &Dense, order: &[usize]) -> Certificate {
    let mut pos = vec![0; order.len()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let labels = order.iter().map(|&v| d.node[v]).collect();
    let mut edges: Vec<_> = d
        .edge
        .iter()
        .filter(|((u, w), _)| pos[*u] < pos[*w])
        .map(|(&(u, w), &l)| (pos[u], pos[w], l))
        .collect();
    edges.sort_unstable();
    (labels, edges)
}

fn canon_search(pair: &Pair, cols: Vec<u32>, best: &mut Option<(Certificate, Vec<usize>)>, budget: &mut u64) -> Option<()> {
    if *budget == 0 {
        return None;
    }
    *budget -= 1;
    let mut counts: BTreeMap<u32, usize> = BTreeMap::new();
    for &c in &cols {
        *counts.entry(c).or_default() += 1;
    }
    let target = counts.iter().filter(|(_, &n)| n > 1).min_by_key(|(&c, &n)| (n, c)).map(|(&c, _)| c);
    let Some(target) = target else {
        let mut order: Vec<usize> = (0..cols.len()).collect();
        order.sort_by_key(|&v| cols[v]);
        let cert = certificate(pair.a, &order);
        if best.as_ref().map_or(true, |(c, _)| cert < *c) {
            *best = Some((cert, order));
        }
        return Some(());
    };
    let fresh = cols.iter().max().copied().unwrap_or(0) + 1;
    for v in (0..cols.len()).filter(|&v| cols[v] == target) {
        let mut na = cols.clone();
        na[v] = fresh;
        let mut nb = na.clone();
        pair.refine(&mut na, &mut nb);
        canon_search(pair, na, best, budget)?;
    }
    Some(())
}

/// Vertex order determined by the labeled isomorphism class of `g`: two
/// isomorphic graphs listed in their canonical orders have identical
/// adjacency and labels. `None` when the search exceeds `budget` nodes.
pub fn canonical_order(g: &LabeledGraph, budget: u64) -> Option<Vec<VertexId>> {
    let d = Dense::new(g, IsoOptions::ALL);
    let keys: Vec<InitKey> = (0..d.n()).map(|v| d.initial_key(v, false)).collect();
    let mut sorted = keys.clone();
    sorted.sort();
    sorted.dedup();
    let mut cols: Vec<u32> = keys.iter().map(|k| sorted.binary_search(k).unwrap() as u32).collect();
    let pair = Pair { a: &d, b: &d };
    let mut other = cols.clone();
    pair.refine(&mut cols, &mut other);
    let mut best = None;
    let mut budget = budget;
    canon_search(&pair, cols, &mut best, &mut budget)?;
    best.map(|(_, order)| order.into_iter().map(|i| d.ids[i]).collect())
}
