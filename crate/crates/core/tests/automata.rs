use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tslsat::automata::{ltl_to_nba, nba_to_bsa, Expansion};
use tslsat::ltl::{approximate, ltl_lasso_check, Letter, Ltl, Mode};
use tslsat::parse_formula;

fn random_ltl(rng: &mut ChaCha8Rng, size: usize, aps: usize) -> Ltl {
    if size <= 1 {
        return if rng.gen_bool(0.1) { Ltl::True } else { Ltl::Ap(rng.gen_range(0..aps)) };
    }
    match rng.gen_range(0..if size >= 3 { 6 } else { 3 }) {
        0 => Ltl::not(random_ltl(rng, size - 1, aps)),
        1 => Ltl::next(random_ltl(rng, size - 1, aps)),
        2 => Ltl::globally(random_ltl(rng, size - 1, aps)),
        k => {
            let l = rng.gen_range(1..size - 1);
            let (a, b) = (random_ltl(rng, l, aps), random_ltl(rng, size - 1 - l, aps));
            match k {
                3 => Ltl::and(a, b),
                4 => Ltl::or(a, b),
                _ => Ltl::until(a, b),
            }
        }
    }
}

fn words(len: usize, aps: usize) -> Vec<Vec<Letter>> {
    let mut out = vec![vec![]];
    for _ in 0..len {
        out = out
            .into_iter()
            .flat_map(|w| {
                (0u32..1 << aps).map(move |b| {
                    let mut w = w.clone();
                    w.push((0..aps).filter(|i| b >> i & 1 == 1).collect());
                    w
                })
            })
            .collect();
    }
    out
}

fn lassos(max_stem: usize, max_loop: usize, aps: usize) -> Vec<(Vec<Letter>, Vec<Letter>)> {
    let mut out = Vec::new();
    for s in 0..=max_stem {
        for l in 1..=max_loop {
            for stem in words(s, aps) {
                for lp in words(l, aps) {
                    out.push((stem.clone(), lp));
                }
            }
        }
    }
    out
}

#[test]
fn tableau_matches_lasso_evaluation() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let ls = lassos(2, 2, 2);
    for _ in 0..300 {
        let size = rng.gen_range(1..9);
        let mut f = random_ltl(&mut rng, size, 2);
        if rng.gen_bool(0.3) {
            let p = random_ltl(&mut rng, 3, 2);
            if p.is_propositional() {
                f = Ltl::and(f, Ltl::globally(p));
            }
        }
        let nba = ltl_to_nba(&f, 2).unwrap();
        for (stem, lp) in &ls {
            assert_eq!(
                nba.accepts_lasso(stem, lp),
                ltl_lasso_check(stem, lp, &f, 2).unwrap(),
                "{f:?} on {stem:?} {lp:?}"
            );
        }
    }
}

#[test]
fn tableau_small_examples() {
    let t = ltl_to_nba(&Ltl::True, 1).unwrap();
    assert_eq!(t.num_states, 1);
    assert!(t.accepting[0]);
    let ls = lassos(3, 3, 1);
    for f in [Ltl::globally(Ltl::Ap(0)), Ltl::until(Ltl::Ap(0), Ltl::not(Ltl::Ap(0)))] {
        let nba = ltl_to_nba(&f, 1).unwrap();
        for (stem, lp) in &ls {
            assert_eq!(nba.accepts_lasso(stem, lp), ltl_lasso_check(stem, lp, &f, 1).unwrap());
        }
    }
    let ab = Ltl::until(Ltl::Ap(0), Ltl::Ap(1));
    let nba = ltl_to_nba(&ab, 2).unwrap();
    for (stem, lp) in &lassos(3, 3, 2) {
        assert_eq!(nba.accepts_lasso(stem, lp), ltl_lasso_check(stem, lp, &ab, 2).unwrap());
    }
}

#[test]
fn unsatisfiable_ltl_is_structurally_empty() {
    let f = Ltl::and(Ltl::globally(Ltl::Ap(0)), Ltl::until(Ltl::True, Ltl::not(Ltl::Ap(0))));
    assert!(ltl_to_nba(&f, 1).unwrap().is_structurally_empty());
}

#[test]
fn illegal_letters_are_dropped() {
    // Two updates of one cell demanded at once, or none at all.
    for text in ["[x <- f(x)] && [x <- g(x)]", "![x <- f(x)] && ![x <- x] && X [x <- f(x)]"] {
        let p = parse_formula(text, None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let nba = ltl_to_nba(&a.ltl, a.universe.len()).unwrap();
        let bsa = nba_to_bsa(&nba, &a.universe, &p.arena, Expansion::Explicit, 4096).unwrap();
        assert!(bsa.is_structurally_empty(), "{text}");
    }
}

#[test]
fn explicit_transitions_are_total_and_legal() {
    let p = parse_formula("G [x <- f(x)] && G F (p(x) && X !p(x)) && F q(y)", None).unwrap();
    let a = approximate(&p, Mode::Finitary);
    let nba = ltl_to_nba(&a.ltl, a.universe.len()).unwrap();
    let bsa = nba_to_bsa(&nba, &a.universe, &p.arena, Expansion::Explicit, 4096).unwrap();
    assert!(!bsa.transitions.is_empty());
    for t in &bsa.transitions {
        assert_eq!(t.guard.len(), bsa.guards.len());
        assert_eq!(t.updates.len(), bsa.cells.len());
    }
    assert!(bsa.finitary);
}
