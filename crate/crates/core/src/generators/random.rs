use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

const CELLS: [&str; 3] = ["x", "y", "w"];
const PREDS: [&str; 3] = ["p", "q", "r"];
const FUNCS: [&str; 3] = ["f", "g", "h"];

/// Tree sizes of a batch: 5, 10, ..., 95.
pub const BATCH_SIZES: std::ops::RangeInclusive<usize> = 1..=19;
pub const BATCH_PER_SIZE: usize = 30;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct RandomSpec {
    pub seed: u64,
    pub tree_size: usize,
    /// Each of the counts is clamped to 1..=3.
    pub cells: usize,
    pub updates: usize,
    pub predicates: usize,
}

impl RandomSpec {
    pub fn new(seed: u64, tree_size: usize) -> RandomSpec {
        RandomSpec { seed, tree_size, cells: 2, updates: 2, predicates: 2 }
    }
}

#[derive(Clone, Copy)]
enum Op {
    Not,
    And,
    Or,
    Next,
    Until,
    Eventually,
    Globally,
}

const WEIGHTS: [(Op, u32); 7] = [
    (Op::Not, 1),
    (Op::And, 2),
    (Op::Or, 2),
    (Op::Next, 1),
    (Op::Until, 1),
    (Op::Eventually, 1),
    (Op::Globally, 1),
];

fn binary(op: Op) -> bool {
    matches!(op, Op::And | Op::Or | Op::Until)
}

fn pick_op(rng: &mut ChaCha8Rng, unary_only: bool) -> Op {
    let pool: Vec<(Op, u32)> = WEIGHTS.iter().copied().filter(|(o, _)| !unary_only || !binary(*o)).collect();
    let total: u32 = pool.iter().map(|p| p.1).sum();
    let mut r = rng.gen_range(0..total);
    for (op, w) in pool {
        if r < w {
            return op;
        }
        r -= w;
    }
    unreachable!()
}

/// Skeleton with `size` nodes; leaves are placeholder indices below `k`.
fn skeleton(rng: &mut ChaCha8Rng, size: usize, k: usize, atoms: &[String]) -> String {
    if size <= 1 {
        return atoms[rng.gen_range(0..k)].clone();
    }
    let op = pick_op(rng, size == 2);
    if binary(op) {
        let left = rng.gen_range(1..size - 1);
        let a = skeleton(rng, left, k, atoms);
        let b = skeleton(rng, size - 1 - left, k, atoms);
        let sym = match op {
            Op::And => "&&",
            Op::Or => "||",
            _ => "U",
        };
        format!("({a} {sym} {b})")
    } else {
        let a = skeleton(rng, size - 1, k, atoms);
        let sym = match op {
            Op::Not => "!",
            Op::Next => "X ",
            Op::Eventually => "F ",
            _ => "G ",
        };
        format!("{sym}{a}")
    }
}

/// A random formula: an LTL skeleton whose placeholders are replaced by predicate and
/// update atoms from pools fixed by the spec.
pub fn gen_random(spec: &RandomSpec) -> String {
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let nc = spec.cells.clamp(1, 3);
    let cells = &CELLS[..nc];
    let mut atoms = Vec::new();
    for p in PREDS.iter().take(spec.predicates.clamp(1, 3)) {
        let c = cells[rng.gen_range(0..nc)];
        atoms.push(format!("{p}({c})"));
    }
    let mut updates = Vec::new();
    while updates.len() < spec.updates.clamp(1, 3) {
        let dst = cells[rng.gen_range(0..nc)];
        let src = cells[rng.gen_range(0..nc)];
        let u = if rng.gen_ratio(1, 4) {
            format!("[{dst} <- {src}]")
        } else {
            format!("[{dst} <- {}({src})]", FUNCS[rng.gen_range(0..3)])
        };
        // Pools hold distinct atoms; a repeat is redrawn. Every cell has four
        // candidate updates, so at least three distinct ones exist.
        if !updates.contains(&u) {
            updates.push(u);
        }
    }
    atoms.extend(updates);
    skeleton(&mut rng, spec.tree_size.max(1), atoms.len(), &atoms)
}

/// 30 specs per tree size 5..95 step 5, in size order, derived from one seed.
pub fn random_batch(seed: u64) -> Vec<RandomSpec> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = Vec::new();
    for s in BATCH_SIZES {
        for _ in 0..BATCH_PER_SIZE {
            out.push(RandomSpec {
                seed: rng.gen(),
                tree_size: 5 * s,
                cells: rng.gen_range(1..=3),
                updates: rng.gen_range(1..=3),
                predicates: rng.gen_range(1..=3),
            });
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    #[test]
    fn deterministic() {
        let s = RandomSpec::new(7, 20);
        assert_eq!(gen_random(&s), gen_random(&s));
        assert_eq!(random_batch(3), random_batch(3));
    }

    #[test]
    fn batch_shape() {
        let b = random_batch(1);
        assert_eq!(b.len(), 570);
        assert_eq!(b[0].tree_size, 5);
        assert_eq!(b[569].tree_size, 95);
    }

    #[test]
    fn single_cell() {
        for seed in 0..50 {
            let s = RandomSpec { seed, tree_size: 15, cells: 1, updates: 3, predicates: 3 };
            let p = parse_formula(&gen_random(&s), None).unwrap();
            assert_eq!(p.signature.cells, vec!["x".to_string()]);
        }
    }

    #[test]
    fn sizes_parse() {
        for spec in random_batch(11).iter().step_by(7) {
            let text = gen_random(spec);
            let p = parse_formula(&text, None).unwrap_or_else(|e| panic!("{text}: {e}"));
            assert!(p.formula.size() >= 1);
        }
    }
}
