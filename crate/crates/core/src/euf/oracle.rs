//! Brute-force congruence oracle: pairwise propagation over the subterm universe.

use rustc_hash::FxHashMap;

use super::{EufQuery, EufResult};
use crate::term::{Node, TermArena};

pub fn naive_closure_oracle(arena: &TermArena, q: &EufQuery) -> EufResult {
    // Universe: TOP, BOT, then all subterms.
    let mut ids: Vec<u32> = Vec::new();
    let mut pos: FxHashMap<u32, usize> = FxHashMap::default();
    fn collect(arena: &TermArena, id: u32, ids: &mut Vec<u32>, pos: &mut FxHashMap<u32, usize>) {
        if pos.contains_key(&id) {
            return;
        }
        if let Node::Apply(_, args) | Node::Pred(_, args) = arena.node(id) {
            for a in args {
                collect(arena, a.0, ids, pos);
            }
        }
        pos.insert(id, ids.len() + 2);
        ids.push(id);
    }
    for &(p, _) in &q.signed_predicates {
        collect(arena, p.0, &mut ids, &mut pos);
    }
    for &(a, b) in &q.equalities {
        collect(arena, a.0, &mut ids, &mut pos);
        collect(arena, b.0, &mut ids, &mut pos);
    }
    let n = ids.len() + 2;
    assert!(n <= 514, "oracle universe too large");
    let mut rel = vec![vec![false; n]; n];
    for (i, row) in rel.iter_mut().enumerate() {
        row[i] = true;
    }
    let relate = |rel: &mut Vec<Vec<bool>>, a: usize, b: usize| {
        rel[a][b] = true;
        rel[b][a] = true;
    };
    for &(p, v) in &q.signed_predicates {
        relate(&mut rel, pos[&p.0], if v { 0 } else { 1 });
    }
    for &(a, b) in &q.equalities {
        relate(&mut rel, pos[&a.0], pos[&b.0]);
    }
    let heads: Vec<Option<(u32, Vec<usize>)>> = std::iter::repeat_n(None, 2)
        .chain(ids.iter().map(|&id| match arena.node(id) {
            Node::Apply(f, args) | Node::Pred(f, args) => Some((f, args.iter().map(|a| pos[&a.0]).collect())),
            Node::Cell(c) => Some((c, vec![])),
            Node::Star => None,
        }))
        .collect();
    loop {
        // Transitive closure.
        for k in 0..n {
            for i in 0..n {
                if rel[i][k] {
                    for j in 0..n {
                        if rel[k][j] {
                            rel[i][j] = true;
                        }
                    }
                }
            }
        }
        let mut changed = false;
        for i in 0..n {
            for j in i + 1..n {
                if rel[i][j] {
                    continue;
                }
                if let (Some((f, xs)), Some((g, ys))) = (&heads[i], &heads[j]) {
                    if f == g && xs.len() == ys.len() && !xs.is_empty() && xs.iter().zip(ys).all(|(&a, &b)| rel[a][b]) {
                        relate(&mut rel, i, j);
                        changed = true;
                    }
                }
            }
        }
        if !changed {
            break;
        }
    }
    if rel[0][1] {
        EufResult::Unsat
    } else {
        EufResult::Sat
    }
}
