//! Acceptance suite: one line per criterion, non-zero exit if any fails.

use std::collections::BTreeMap;
use std::time::{Duration, Instant};

use lclr_core::encode_ab::{
    decode_ab, encode_ab, encode_ab_with, lambda, lift_out_a_to_b, lift_out_b_to_a, to_decoded_ids, to_original_ids, AbScheme,
    Encoding, Owner, PortOrder, ProblemBContext,
};
use lclr_core::fixtures::{four_coloring_lcl, list_coloring_lcl};
use lclr_core::formalisms::{enumerate_lcl_solutions, verify_lcl, verify_pn_in, verify_re, LclProblem, OutputLabeling, PnProblem};
use lclr_core::gadget_bd::{
    check_coloring_theorem, gadget_bd, gadgeted_k4_fixture, lift_b_to_d, lift_d_to_b, max_ball_edges, theta_fixture,
    twin_chain_fixture, DConstants, DFixture, TheoremCheck,
};
use lclr_core::graph::gen;
use lclr_core::iso::{brute_force_iso, graph_iso, IsoOptions};
use lclr_core::local_sim::{
    builtin, decoded_ids, decoded_simple_graph, distance_k_coloring, lift_outcome, role_ids, run_local,
    simulate_a1_prime, simulate_a2_prime, Labeling, Outcome, SimInstance,
};
use lclr_core::re_compile::EContext;
use lclr_core::{pn_view, LabeledGraph, Label, VertexId, BOTTOM};
use num_rational::Ratio;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const SCHEME: AbScheme = AbScheme { max_degree: 3, max_label: 2 };
const ROUND_TRIP_GRAPHS: usize = 200;
const ROUND_TRIP_LIMIT: Duration = Duration::from_secs(30);
const UNIQUENESS_POOL: usize = 30;
const UNIQUENESS_LIMIT: Duration = Duration::from_secs(120);
const THEOREM_LIMIT: Duration = Duration::from_secs(600);
const THEOREM_BUDGET: u64 = 5_000_000;
const LIFT_LIMIT: Duration = Duration::from_secs(600);
const SEED: u64 = 0x5eed;

type Check = Result<String, String>;

fn corpus(count: usize, seed: u64) -> Vec<LabeledGraph> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count).map(|_| gen::random_labeled(&mut rng, 6, 3, 2)).collect()
}

/// Copy keeping structure and node labels only.
fn node_labeled(g: &LabeledGraph) -> LabeledGraph {
    let mut h = LabeledGraph::new();
    for v in g.vertices() {
        h.add_vertex(v);
        if let Some(l) = g.node_label(v) {
            h.set_node_label(v, l).unwrap();
        }
    }
    for (u, v) in g.edges() {
        h.add_edge(u, v).unwrap();
    }
    h
}

fn within(start: Instant, limit: Duration) -> Result<Duration, String> {
    let t = start.elapsed();
    if t > limit {
        Err(format!("took {t:.1?}, limit {limit:?}"))
    } else {
        Ok(t)
    }
}

fn c1_round_trip() -> Check {
    let start = Instant::now();
    for (i, g) in corpus(ROUND_TRIP_GRAPHS, SEED).iter().enumerate() {
        let enc = encode_ab(g, &SCHEME).map_err(|e| format!("graph {i}: {e}"))?;
        let (m, map) = decode_ab(&enc.graph, &SCHEME);
        if !map.malformed_vertices.is_empty() || map.malformed_edge_count() != 0 {
            return Err(format!("graph {i}: malformed parts after decoding"));
        }
        if !m.is_simple() || !brute_force_iso(&node_labeled(&decoded_simple_graph(&m)), g, None) {
            return Err(format!("graph {i}: decoding not isomorphic to the source"));
        }
        for e in &m.edges {
            let l = e.label.unwrap_or(BOTTOM);
            let want = lclr_core::graph::pack_pair(m.vertices[&e.u].unwrap() as u32, m.vertices[&e.v].unwrap() as u32);
            if l != want {
                return Err(format!("graph {i}: edge {}-{} carries {l}", e.u, e.v));
            }
        }
    }
    let t = within(start, ROUND_TRIP_LIMIT)?;
    Ok(format!("{ROUND_TRIP_GRAPHS} graphs decoded exactly, 0 malformed, {t:.1?}"))
}

fn cubic_fixtures() -> Vec<LabeledGraph> {
    vec![gen::complete(4), gen::prism(), gen::complete_bipartite(3, 3), gen::cube(), gen::petersen()]
}

fn c2_regularity() -> Check {
    let mut n = 0;
    for (i, g) in corpus(ROUND_TRIP_GRAPHS, SEED).iter().enumerate() {
        let enc = encode_ab(g, &SCHEME).map_err(|e| e.to_string())?;
        if !enc.graph.vertices().all(|v| enc.graph.degree(v) == 3) {
            return Err(format!("encoding of graph {i} is not 3-regular"));
        }
        n += 1;
    }
    let mut gadgeted = vec![theta_fixture(&[1, 2, 3]).unwrap(), twin_chain_fixture(1).unwrap()];
    for g in cubic_fixtures() {
        let x = lclr_core::gadget_bd::auto_edge_coloring(&g, 1).map_err(|e| e.to_string())?;
        gadgeted.push(gadget_bd(&g, &x, 1).map_err(|e| e.to_string())?);
    }
    for (i, gg) in gadgeted.iter().enumerate() {
        if !gg.graph.vertices().all(|v| gg.graph.degree(v) == 3) {
            return Err(format!("gadgeted fixture {i} is not 3-regular"));
        }
        n += 1;
    }
    Ok(format!("{n} outputs, every degree is 3"))
}

fn permuted(g: &LabeledGraph, rng: &mut ChaCha8Rng) -> LabeledGraph {
    let mut perm: Vec<VertexId> = g.vertices().collect();
    for i in (1..perm.len()).rev() {
        perm.swap(i, rng.gen_range(0..=i));
    }
    g.relabel_vertices(|v| perm[v as usize])
}

fn c3_uniqueness() -> Check {
    let start = Instant::now();
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 3);
    let mut pool = corpus(UNIQUENESS_POOL / 2, SEED + 1);
    for i in 0..UNIQUENESS_POOL / 2 {
        let p = permuted(&pool[i], &mut rng);
        pool.push(p);
    }
    let encs: Vec<LabeledGraph> = pool.iter().map(|g| encode_ab(g, &SCHEME).map(|e| e.graph)).collect::<Result<_, _>>().map_err(|e| e.to_string())?;
    let (mut same, mut pairs) = (0, 0);
    for i in 0..pool.len() {
        for j in i + 1..pool.len() {
            let want = brute_force_iso(&pool[i], &pool[j], None);
            let got = graph_iso(&encs[i], &encs[j], IsoOptions::STRUCTURE);
            if want != got {
                return Err(format!("pair ({i},{j}): inputs iso {want}, encodings iso {got}"));
            }
            same += want as usize;
            pairs += 1;
        }
    }
    let t = within(start, UNIQUENESS_LIMIT)?;
    Ok(format!("{pairs} pairs agree ({same} isomorphic), {t:.1?}"))
}

fn c4_pn_views() -> Check {
    let base = pn_view(&gen::cycle(3), None, 0, 2).map_err(|e| e.to_string())?.canonical_string();
    for k in 3..=10 {
        let c = gen::cycle(k);
        for v in c.vertices() {
            let s = pn_view(&c, None, v, 2).map_err(|e| e.to_string())?.canonical_string();
            if s != base {
                return Err(format!("C_{k} vertex {v} differs"));
            }
        }
    }
    Ok("C_3..C_10 give one canonical radius-2 view".into())
}

fn c5_theorem() -> Check {
    let start = Instant::now();
    let mut report = vec![];
    for lengths in [[1u32, 2, 3], [3, 1, 2], [1, 2, 4]] {
        let gg = theta_fixture(&lengths).map_err(|e| e.to_string())?;
        match check_coloring_theorem(&gg, 1, THEOREM_BUDGET).map_err(|e| e.to_string())? {
            TheoremCheck::ExhaustedOk { starts, nodes } => report.push(format!("theta{lengths:?}: ok ({starts} starts, {nodes} nodes)")),
            other => return Err(format!("theta{lengths:?}: {other:?}")),
        }
    }
    let twin = twin_chain_fixture(1).map_err(|e| e.to_string())?;
    match check_coloring_theorem(&twin, 1, THEOREM_BUDGET).map_err(|e| e.to_string())? {
        TheoremCheck::Counterexample { pair, .. } => report.push(format!("twin chain: counterexample at {pair:?}")),
        other => return Err(format!("twin chain: expected counterexample, got {other:?}")),
    }
    let t = within(start, THEOREM_LIMIT)?;
    Ok(format!("{}, {t:.1?}", report.join("; ")))
}

fn legal(p: &LclProblem, g: &LabeledGraph, out: &Labeling) -> bool {
    verify_lcl(p, g, &OutputLabeling::from_nodes(out.clone())).overall
}

struct AbInstance {
    a: LclProblem,
    g: LabeledGraph,
    enc: Encoding,
    b: LclProblem,
}

fn ab_instances() -> Vec<AbInstance> {
    let mut p3 = gen::path(3);
    let mut k4 = gen::complete(4);
    for v in 0..3 {
        p3.set_node_label(v, [2, 0, 1][v as usize]).unwrap();
    }
    for v in 0..4 {
        k4.set_node_label(v, 0).unwrap();
    }
    [(list_coloring_lcl(), p3), (four_coloring_lcl(), k4)]
        .into_iter()
        .map(|(a, g)| {
            let enc = encode_ab(&g, &SCHEME).unwrap();
            let b = ProblemBContext::new(a.clone(), SCHEME).unwrap().problem();
            AbInstance { a, g, enc, b }
        })
        .collect()
}

fn lift_ab(inst: &AbInstance, sigma_a: &Labeling) -> Labeling {
    lift_out_a_to_b(&to_decoded_ids(sigma_a, &inst.enc), &inst.enc.map)
}

fn lift_ba(inst: &AbInstance, sigma_b: &Labeling) -> Labeling {
    to_original_ids(&lift_out_b_to_a(sigma_b, &inst.enc.map), &inst.enc)
}

/// Legal B outputs beyond the forward lifts: edge-gadget vertices take arbitrary labels.
fn perturb_edge_gadgets(inst: &AbInstance, sigma_b: &Labeling, rng: &mut ChaCha8Rng) -> Labeling {
    let alphabet: Vec<Label> = inst.a.output_alphabet.finite().unwrap().iter().copied().chain([BOTTOM]).collect();
    let mut out = sigma_b.clone();
    for (v, o) in &inst.enc.map.owner {
        if matches!(o, Owner::Edge(_)) {
            out.insert(*v, alphabet[rng.gen_range(0..alphabet.len())]);
        }
    }
    out
}

fn check_ab(report: &mut Vec<String>) -> Result<(), String> {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED + 6);
    for inst in ab_instances() {
        let sols = enumerate_lcl_solutions(&inst.a, &inst.g, usize::MAX, 10_000_000).map_err(|e| e.to_string())?.found().ok_or("A solver budget")?;
        let mut back = 0;
        for s in &sols {
            let b = lift_ab(&inst, &s.nodes);
            if !legal(&inst.b, &inst.enc.graph, &b) {
                return Err(format!("{}: forward lift of a legal output rejected", inst.a.name));
            }
            for target in [b.clone(), perturb_edge_gadgets(&inst, &b, &mut rng)] {
                if !legal(&inst.b, &inst.enc.graph, &target) {
                    return Err(format!("{}: perturbed target rejected", inst.a.name));
                }
                if !legal(&inst.a, &inst.g, &lift_ba(&inst, &target)) {
                    return Err(format!("{}: backward lift rejected", inst.a.name));
                }
                back += 1;
            }
        }
        report.push(format!("A↔B {}: {} forward, {back} backward", inst.a.name, sols.len()));
    }
    Ok(())
}

fn verify_d(e: &EContext, p: &PnProblem, g: &LabeledGraph, sigma: &Labeling) -> bool {
    let mut a = e.arena.lock().unwrap();
    verify_pn_in(&mut a, p, g, sigma).overall
}

struct DeState {
    f: DFixture,
    e: EContext,
    pd: PnProblem,
    legal_d: Vec<Labeling>,
}

fn chi_variants(f: &DFixture) -> Result<Vec<BTreeMap<VertexId, u64>>, String> {
    let n = f.gg.graph.vertex_count() as u64;
    let reversed = f.chi.iter().map(|(&v, &c)| (v, n + 1 - c)).collect();
    let inst = SimInstance::sequential(f.gg.graph.clone(), 0);
    let greedy = distance_k_coloring(&inst, 2 * f.d.r_d().map_err(|e| e.to_string())?).map_err(|e| e.to_string())?;
    Ok(vec![f.chi.clone(), reversed, greedy.chi])
}

fn check_bd(report: &mut Vec<String>) -> Result<DeState, String> {
    let f = gadgeted_k4_fixture().map_err(|e| e.to_string())?;
    let e = EContext::new(f.d.clone());
    let pd = f.d.problem().map_err(|e| e.to_string())?;
    let r_d = f.d.r_d().map_err(|e| e.to_string())?;
    let sols = enumerate_lcl_solutions(&f.d.b, &f.source, usize::MAX, 1_000_000).map_err(|e| e.to_string())?.found().ok_or("B solver budget")?;
    let chis = chi_variants(&f)?;
    let mut legal_d = vec![];
    for (i, s) in sols.iter().enumerate() {
        for (j, chi) in chis.iter().enumerate() {
            if j > 0 && i % 6 != 0 {
                continue;
            }
            let d = lift_b_to_d(&s.nodes, chi, &f.gg, r_d).map_err(|e| e.to_string())?;
            if !verify_d(&e, &pd, &f.gg.graph, &d) {
                return Err(format!("B→D lift of solution {i} with χ #{j} rejected"));
            }
            legal_d.push(d);
        }
    }
    for d in &legal_d {
        if !legal(&f.d.b, &f.source, &lift_d_to_b(d, &f.gg)) {
            return Err("D→B lift rejected".into());
        }
    }
    let mut bad = f.sigma_b.clone();
    bad.insert(1, bad[&0]);
    let bad_d = lift_b_to_d(&bad, &f.chi, &f.gg, r_d).map_err(|e| e.to_string())?;
    if verify_d(&e, &pd, &f.gg.graph, &bad_d) {
        return Err("an improper B coloring lifted to a legal D labeling".into());
    }
    report.push(format!("B↔D: {} colorings, {} D labelings, r_D = {r_d}", sols.len(), legal_d.len()));
    Ok(DeState { f, e, pd, legal_d })
}

fn check_de(st: &DeState, report: &mut Vec<String>) -> Result<Vec<lclr_core::formalisms::HalfEdgeLabeling>, String> {
    let g = &st.f.gg.graph;
    let pe = st.e.problem();
    let mut hels = vec![];
    for (i, d) in st.legal_d.iter().enumerate() {
        let hel = st.e.lift_d_to_e(g, d).map_err(|e| format!("D→E on labeling {i}: {e}"))?;
        if !verify_re(&pe, g, &hel).map_err(|e| e.to_string())?.overall {
            return Err(format!("D→E lift of labeling {i} rejected"));
        }
        let back = st.e.lift_e_to_d(g, &hel).map_err(|e| e.to_string())?;
        if !verify_d(&st.e, &st.pd, g, &back) || &back != d {
            return Err(format!("E→D lift of labeling {i} rejected or changed"));
        }
        if st.e.lift_d_to_e(g, &back).map_err(|e| e.to_string())? != hel {
            return Err(format!("re-lifting labeling {i} changed the half-edge labels"));
        }
        hels.push(hel);
    }
    report.push(format!("D↔E: {} labelings both ways", hels.len()));
    Ok(hels)
}

fn c6_c7_lifts() -> (Check, Check) {
    let start = Instant::now();
    let mut report = vec![];
    let mut stages = || -> Result<(DeState, Vec<_>), String> {
        check_ab(&mut report)?;
        let st = check_bd(&mut report)?;
        let hels = check_de(&st, &mut report)?;
        Ok((st, hels))
    };
    let (st, hels) = match stages() {
        Ok(x) => x,
        Err(e) => return (Err(e), Err("no E labelings to check".into())),
    };
    let c6 = within(start, LIFT_LIMIT).map(|t| format!("{}, {t:.1?}", report.join("; ")));
    let r_d = st.f.d.r_d().unwrap();
    let mut c7 = Ok(format!("{} labelings, layers 0..={r_d} all match", hels.len()));
    for (i, hel) in hels.iter().enumerate() {
        match st.e.t_good(&st.f.gg.graph, hel) {
            Ok(None) => {}
            Ok(Some((v, k))) => {
                c7 = Err(format!("labeling {i}: vertex {v} differs at depth {k}"));
                break;
            }
            Err(e) => {
                c7 = Err(e.to_string());
                break;
            }
        }
    }
    (c6, c7)
}

fn c8_simulation() -> Check {
    let lam = lambda(&SCHEME);
    let mut graphs = corpus(6, SEED + 8);
    graphs.push({
        let mut k4 = gen::complete(4);
        for v in 0..4 {
            k4.set_node_label(v, v as Label % 3).unwrap();
        }
        k4
    });
    let (mut a1, mut a2) = (0, 0);
    for (i, g) in graphs.iter().enumerate() {
        let enc = encode_ab(g, &SCHEME).map_err(|e| e.to_string())?;
        let inst = SimInstance::new(enc.graph.clone(), 2, SEED + i as u64).map_err(|e| e.to_string())?;
        let (m, map) = decode_ab(&enc.graph, &SCHEME);
        let dids = decoded_ids(&map, &inst.ids).map_err(|e| e.to_string())?;
        let dinst = SimInstance::with_ids(decoded_simple_graph(&m), dids, 2).map_err(|e| e.to_string())?;
        for name in ["constant", "id_parity", "degree", "min_id:1", "min_id:2", "label_sum:2"] {
            let alg = builtin(name).unwrap();
            let rec = simulate_a1_prime(&alg, &inst, &SCHEME).map_err(|e| e.to_string())?;
            let want = lift_out_a_to_b(&run_local(&alg, &dinst).map_err(|e| e.to_string())?.outputs, &map);
            if rec.outputs != want {
                return Err(format!("A'1 graph {i} {name}: differs from decode-run-lift"));
            }
            if rec.max_radius() > lam * alg.locality + 3 * lam {
                return Err(format!("A'1 graph {i} {name}: radius {} over bound", rec.max_radius()));
            }
            a1 += 1;
        }
        let src = SimInstance::new(g.clone(), 6, SEED + 100 + i as u64).map_err(|e| e.to_string())?;
        let enc = encode_ab_with(g, &SCHEME, PortOrder::Ranked(&src.ids)).map_err(|e| e.to_string())?;
        let einst = SimInstance::with_ids(enc.graph.clone(), role_ids(&enc.roles, &src.ids).map_err(|e| e.to_string())?, 6).map_err(|e| e.to_string())?;
        for name in ["degree", "min_id:1", "min_id:4", "label_sum:6"] {
            let alg = builtin(name).unwrap();
            let rec = simulate_a2_prime(&alg, &src, &SCHEME).map_err(|e| e.to_string())?;
            let run = run_local(&alg, &einst).map_err(|e| e.to_string())?.outputs;
            let want = to_original_ids(&lift_out_b_to_a(&run, &enc.map), &enc);
            if rec.outputs != want {
                return Err(format!("A'2 graph {i} {name}: differs from encode-run-liftback"));
            }
            if rec.radius.values().any(|&r| r != alg.locality) {
                return Err(format!("A'2 graph {i} {name}: radius differs from T2"));
            }
            a2 += 1;
        }
    }
    Ok(format!("{a1} A'1 runs within Λ·T1+3Λ (Λ = {lam}), {a2} A'2 runs at radius T2"))
}

fn r(n: u64, d: u64) -> Ratio<u64> {
    Ratio::new(n, d)
}

fn check_lift(
    what: &str,
    o: &Outcome,
    lift: impl Fn(&Labeling) -> lclr_core::Result<Labeling>,
    src: impl Fn(&Labeling) -> bool,
    dst: impl Fn(&Labeling) -> bool,
    out: &mut Vec<String>,
) -> Result<(), String> {
    let l = lift_outcome(o, lift, src, dst).map_err(|e| e.to_string())?;
    if l.p_dst < l.p_src {
        return Err(format!("{what}: success dropped from {} to {}", l.p_src, l.p_dst));
    }
    out.push(format!("{what} {}→{}", l.p_src, l.p_dst));
    Ok(())
}

fn c9_outcomes() -> Check {
    let mut out = vec![];
    let probs = [r(1, 3), r(1, 4), r(1, 6), r(1, 4)];
    for inst in ab_instances() {
        let sols = enumerate_lcl_solutions(&inst.a, &inst.g, 2, 1_000_000).map_err(|e| e.to_string())?.found().ok_or("budget")?;
        let mut bad = sols[0].nodes.clone();
        let first = *bad.keys().next().unwrap();
        let second = *bad.keys().nth(1).unwrap();
        bad.insert(first, bad[&second]);
        let mut worse = sols[1].nodes.clone();
        worse.insert(first, 99);
        let support = vec![sols[0].nodes.clone(), sols[1].nodes.clone(), bad, worse];
        let o = Outcome::new(support.into_iter().zip(probs).collect()).map_err(|e| e.to_string())?;
        check_lift(
            &format!("A→B {}", inst.a.name),
            &o,
            |l| Ok(lift_ab(&inst, l)),
            |l| legal(&inst.a, &inst.g, l),
            |l| legal(&inst.b, &inst.enc.graph, l),
            &mut out,
        )?;
        let ob = Outcome::new(o.support.iter().map(|(l, p)| (lift_ab(&inst, l), *p)).collect()).map_err(|e| e.to_string())?;
        check_lift(
            &format!("B→A {}", inst.a.name),
            &ob,
            |l| Ok(lift_ba(&inst, l)),
            |l| legal(&inst.b, &inst.enc.graph, l),
            |l| legal(&inst.a, &inst.g, l),
            &mut out,
        )?;
    }
    let f = gadgeted_k4_fixture().map_err(|e| e.to_string())?;
    let e = EContext::new(f.d.clone());
    let pd = f.d.problem().map_err(|e| e.to_string())?;
    let r_d = f.d.r_d().map_err(|e| e.to_string())?;
    let g = &f.gg.graph;
    let mut improper = f.sigma_b.clone();
    improper.insert(2, improper[&3]);
    let mut swapped = f.sigma_b.clone();
    swapped.insert(0, f.sigma_b[&1]);
    swapped.insert(1, f.sigma_b[&0]);
    let ob = Outcome::new(vec![(f.sigma_b.clone(), r(1, 2)), (swapped, r(1, 4)), (improper, r(1, 4))]).map_err(|e| e.to_string())?;
    let b_ok = |l: &Labeling| legal(&f.d.b, &f.source, l);
    let d_ok = |l: &Labeling| verify_d(&e, &pd, g, l);
    check_lift("B→D", &ob, |l| lift_b_to_d(l, &f.chi, &f.gg, r_d), b_ok, d_ok, &mut out)?;
    let od = Outcome::new(ob.support.iter().map(|(l, p)| (lift_b_to_d(l, &f.chi, &f.gg, r_d).unwrap(), *p)).collect()).map_err(|e| e.to_string())?;
    check_lift("D→B", &od, |l| Ok(lift_d_to_b(l, &f.gg)), d_ok, b_ok, &mut out)?;
    let pe = e.problem();
    let e_ok = |l: &Labeling| {
        let hel = unpack_hel(l);
        verify_re(&pe, g, &hel).is_ok_and(|v| v.overall)
    };
    check_lift("D→E", &od, |l| e.lift_d_to_e(g, l).map(|h| pack_hel(&h)), d_ok, e_ok, &mut out)?;
    let oe = Outcome::new(
        od.support
            .iter()
            .map(|(l, p)| (e.lift_d_to_e(g, l).map(|h| pack_hel(&h)).unwrap_or_default(), *p))
            .collect(),
    )
    .map_err(|e| e.to_string())?;
    check_lift("E→D", &oe, |l| e.lift_e_to_d(g, &unpack_hel(l)), e_ok, d_ok, &mut out)?;
    Ok(out.join("; "))
}

/// Half-edge labelings travel through `Outcome` keyed by `u << 16 | v`.
fn pack_hel(h: &lclr_core::formalisms::HalfEdgeLabeling) -> Labeling {
    h.iter().map(|(&(v, u), &l)| ((v << 16) | u, l)).collect()
}

fn unpack_hel(l: &Labeling) -> lclr_core::formalisms::HalfEdgeLabeling {
    l.iter().map(|(&k, &x)| ((k >> 16, k & 0xffff), x)).collect()
}

/// All centered graphs where the center has degree 3, every vertex is
/// within distance 1 and degrees are at most 3; edges among the
/// neighbors are included.
fn max_radius1_edges() -> (usize, usize) {
    let pairs: Vec<(u32, u32)> = (0..4).flat_map(|u| (u + 1..4).map(move |v| (u, v))).collect();
    let (mut best, mut count) = (0, 0);
    for mask in 0u32..1 << pairs.len() {
        let edges: Vec<_> = pairs.iter().enumerate().filter(|(i, _)| mask >> i & 1 == 1).map(|(_, &e)| e).collect();
        let g = LabeledGraph::from_edges(4, &edges).unwrap();
        if g.degree(0) != 3 || g.vertices().any(|v| g.degree(v) > 3) {
            continue;
        }
        count += 1;
        best = best.max(g.edge_count());
    }
    (best, count)
}

fn c10_constants() -> Check {
    let (best, count) = max_radius1_edges();
    let c1 = DConstants::new(1).map_err(|e| e.to_string())?;
    let k1 = 9 * (1u128 << 0) - 3 + 1;
    let rd1 = (4 * k1 + 1) + 1;
    if best != 6 || c1.k != k1 || c1.k <= best as u128 || c1.r_d != rd1 {
        return Err(format!("radius 1: max {best} edges, k = {}, r_D = {}", c1.k, c1.r_d));
    }
    let c2 = DConstants::new(2).map_err(|e| e.to_string())?;
    let petersen = gen::petersen().edge_count() as u128;
    let rd2 = (4 * c2.k + 1) * 2 + 1;
    if petersen >= c2.k || max_ball_edges(2) >= c2.k || c2.r_d != rd2 {
        return Err(format!("radius 2: k = {} vs Petersen {petersen}, bound {}", c2.k, max_ball_edges(2)));
    }
    Ok(format!(
        "{count} radius-1 balls, max {best} < k = {}, r_D = {}; radius 2: Petersen {petersen} ≤ bound {} < k = {}, r_D = {}",
        c1.k,
        c1.r_d,
        max_ball_edges(2),
        c2.k,
        c2.r_d
    ))
}

fn report(n: usize, name: &str, start: Instant, res: &Check) -> bool {
    let t = start.elapsed();
    match res {
        Ok(msg) => println!("criterion {n:>2} PASS {name}: {msg} [{t:.1?}]"),
        Err(msg) => println!("criterion {n:>2} FAIL {name}: {msg} [{t:.1?}]"),
    }
    res.is_ok()
}

fn run(n: usize, name: &str, f: fn() -> Check) -> bool {
    let s = Instant::now();
    report(n, name, s, &f())
}

fn main() {
    let mut ok = true;
    ok &= run(1, "encoding round-trip", c1_round_trip);
    ok &= run(2, "3-regularity", c2_regularity);
    ok &= run(3, "encoding uniqueness", c3_uniqueness);
    ok &= run(4, "PN-view lift invariance", c4_pn_views);
    ok &= run(5, "coloring theorem harness", c5_theorem);
    let s = Instant::now();
    let (c6, c7) = c6_c7_lifts();
    ok &= report(6, "lift soundness A↔B, B↔D, D↔E", s, &c6);
    ok &= report(7, "t_good layers", s, &c7);
    ok &= run(8, "simulation equivalence", c8_simulation);
    ok &= run(9, "outcome lifting", c9_outcomes);
    ok &= run(10, "constants", c10_constants);
    if !ok {
        std::process::exit(1);
    }
}
