//! Hand-certified always-solvable problems and small graphs.

use std::sync::Arc;

use crate::formalisms::{Alphabet, LclConstraint, LclProblem, MultisetConstraint, PnConstraint, PnProblem, ReProblem};
use crate::graph::{CenteredGraph, Label};
use crate::view::{ViewArena, ViewId};

pub use crate::graph::gen;

/// Proper coloring with colors `1..=c`, checked at radius 1.
pub fn coloring_lcl(c: Label) -> LclProblem {
    LclProblem {
        name: format!("{c}-coloring"),
        max_degree: 3,
        input_alphabet: None,
        output_alphabet: Alphabet::range(1, c),
        radius: 1,
        node_outputs: true,
        edge_outputs: false,
        constraint: LclConstraint::Oracle(Arc::new(move |b: &CenteredGraph, o| {
            let Some(&mine) = o.nodes.get(&b.center) else {
                return false;
            };
            (1..=c).contains(&mine) && b.graph.neighbors(b.center).all(|w| o.nodes.get(&w) != Some(&mine))
        })),
    }
}

pub fn four_coloring_lcl() -> LclProblem {
    coloring_lcl(4)
}

pub fn two_coloring_lcl() -> LclProblem {
    coloring_lcl(2)
}

/// Coloring with palette 1..=5 where input `l` forbids color `l + 1`.
/// At degree 3 every vertex keeps 4 usable colors, so it is always solvable.
pub fn list_coloring_lcl() -> LclProblem {
    let base = coloring_lcl(5);
    let LclConstraint::Oracle(inner) = base.constraint else {
        unreachable!()
    };
    LclProblem {
        name: "list-coloring".into(),
        input_alphabet: Some(Alphabet::range(0, 2)),
        constraint: LclConstraint::Oracle(Arc::new(move |b: &CenteredGraph, o| {
            let forbidden = b.graph.node_label(b.center).and_then(|l| l.checked_add(1));
            inner(b, o) && o.nodes.get(&b.center).copied() != forbidden
        })),
        ..base
    }
}

/// Maximal matching with edge outputs in {0, 1}, checked at radius 2.
pub fn maximal_matching_lcl() -> LclProblem {
    LclProblem {
        name: "maximal-matching".into(),
        max_degree: 3,
        input_alphabet: None,
        output_alphabet: Alphabet::range(0, 1),
        radius: 2,
        node_outputs: false,
        edge_outputs: true,
        constraint: LclConstraint::Oracle(Arc::new(|b: &CenteredGraph, o| {
            let matched = |v| b.graph.neighbors(v).filter(|&w| o.edge(v, w) == Some(1)).count();
            let m = matched(b.center);
            m == 1 || (m == 0 && b.graph.neighbors(b.center).all(|w| matched(w) == 1))
        })),
    }
}

/// Coloring in half-edge form: a node repeats its color on all three half-edges.
pub fn coloring_re(c: Label) -> ReProblem {
    ReProblem {
        name: format!("{c}-coloring-re"),
        alphabet: Alphabet::range(1, c),
        node_constraint: MultisetConstraint::explicit((1..=c).map(|x| vec![x, x, x])),
        edge_constraint: MultisetConstraint::Oracle(Arc::new(|ls: &[Label]| ls[0] != ls[1])),
    }
}

pub fn four_coloring_re() -> ReProblem {
    coloring_re(4)
}

pub const MATCHED: Label = 1;
pub const OTHER: Label = 2;
pub const POINTER: Label = 3;

/// Maximal matching in half-edge form: a matched node has one `M` and two `O`;
/// an unmatched node points `P` everywhere, and `P` must face an `O`.
pub fn maximal_matching_re() -> ReProblem {
    ReProblem {
        name: "maximal-matching-re".into(),
        alphabet: Alphabet::range(1, 3),
        node_constraint: MultisetConstraint::explicit([vec![MATCHED, OTHER, OTHER], vec![POINTER, POINTER, POINTER]]),
        edge_constraint: MultisetConstraint::explicit([
            vec![MATCHED, MATCHED],
            vec![OTHER, POINTER],
            vec![OTHER, OTHER],
        ]),
    }
}

pub const OUT: Label = 1;
pub const IN: Label = 2;

/// Orientation where every node has an outgoing edge.
pub fn sinkless_orientation_re() -> ReProblem {
    ReProblem {
        name: "sinkless-orientation-re".into(),
        alphabet: Alphabet::range(1, 2),
        node_constraint: MultisetConstraint::Oracle(Arc::new(|ls: &[Label]| ls.contains(&OUT))),
        edge_constraint: MultisetConstraint::explicit([vec![OUT, IN]]),
    }
}

/// Coloring with colors `1..=c` checked on radius-1 views.
pub fn coloring_pn(c: Label) -> PnProblem {
    PnProblem {
        name: format!("{c}-coloring-pn"),
        output_alphabet: Alphabet::range(1, c),
        radius: 1,
        constraint: PnConstraint::Oracle(Arc::new(move |a: &mut ViewArena, v: ViewId| {
            let Some(x) = a.tag(v).output else {
                return false;
            };
            (1..=c).contains(&x) && a.children(v).iter().all(|&(_, w)| a.tag(w).output != Some(x))
        })),
    }
}

pub fn four_coloring_pn() -> PnProblem {
    coloring_pn(4)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formalisms::{brute_force_solve, verify, Problem, SolveOutcome, DEFAULT_SOLVE_BUDGET};

    #[test]
    fn fixtures_solvable_on_small_cubic_graphs() {
        let problems = [
            Problem::Lcl(four_coloring_lcl()),
            Problem::Lcl(maximal_matching_lcl()),
            Problem::Re(four_coloring_re()),
            Problem::Re(maximal_matching_re()),
            Problem::Re(sinkless_orientation_re()),
            Problem::Pn(four_coloring_pn()),
        ];
        for g in [gen::complete(4), gen::prism(), gen::complete_bipartite(3, 3)] {
            for p in &problems {
                let s = brute_force_solve(p, &g, DEFAULT_SOLVE_BUDGET).unwrap();
                let SolveOutcome::Found(s) = s else {
                    panic!("{} unsolved", p.name())
                };
                assert!(verify(p, &g, &s).unwrap().overall, "{}", p.name());
            }
        }
    }

    #[test]
    fn list_coloring_respects_inputs() {
        let mut g = gen::complete(4);
        for v in 0..4 {
            g.set_node_label(v, (v % 3) as Label).unwrap();
        }
        let p = Problem::Lcl(list_coloring_lcl());
        let SolveOutcome::Found(crate::formalisms::Solution::Lcl(o)) = brute_force_solve(&p, &g, DEFAULT_SOLVE_BUDGET).unwrap() else {
            panic!()
        };
        for v in 0..4 {
            assert_ne!(o.nodes[&v], g.node_label(v).unwrap() + 1);
        }
    }
}
