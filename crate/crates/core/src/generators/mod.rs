//! Benchmark formula generators. Every generator returns surface syntax, so its
//! output can be written to disk and re-read by the parser.

mod corpus;
mod goto;
mod random;

pub use corpus::{
    fragment_set, load_corpus, load_corpus_dir, parse_corpus_file, stress_set, CorpusEntry, CorpusError, Expect,
};
pub use goto::{
    desugar_goto, encode_enc_te, encode_goto, encode_num_tu, parse_goto, Action, GotoError, GotoProgram, Theory,
};
pub use random::{gen_random, random_batch, RandomSpec, BATCH_PER_SIZE, BATCH_SIZES};

use thiserror::Error;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GenError {
    #[error("n must be at least 1, got {0}")]
    NonPositive(usize),
}

fn iterate(f: &str, n: usize, arg: &str) -> String {
    let mut s = arg.to_string();
    for _ in 0..n {
        s = format!("{f}({s})");
    }
    s
}

/// `G [x <- f(x)] && F !p(x) && p(x) && p(f(x)) && ... && p(f^n(x))`.
pub fn gen_scal_sat(n: usize) -> String {
    let mut s = "G [x <- f(x)] && F !p(x)".to_string();
    for i in 0..=n {
        s.push_str(&format!(" && p({})", iterate("f", i, "x")));
    }
    s
}

/// `G (q(x) <-> !q(f^n(x))) && G [x <- f(x)] && F (q(x) && X^n q(x))`, for `n >= 1`.
pub fn gen_scal_unsat(n: usize) -> Result<String, GenError> {
    if n == 0 {
        return Err(GenError::NonPositive(n));
    }
    Ok(format!(
        "G (q(x) <-> !q({})) && G [x <- f(x)] && F (q(x) && {}q(x))",
        iterate("f", n, "x"),
        "X ".repeat(n)
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    #[test]
    fn scal_instances() {
        assert_eq!(gen_scal_sat(0), "G [x <- f(x)] && F !p(x) && p(x)");
        assert!(gen_scal_sat(2).ends_with("p(x) && p(f(x)) && p(f(f(x)))"));
        assert_eq!(gen_scal_unsat(1).unwrap(), "G (q(x) <-> !q(f(x))) && G [x <- f(x)] && F (q(x) && X q(x))");
        assert_eq!(gen_scal_unsat(0), Err(GenError::NonPositive(0)));
    }

    #[test]
    fn scal_round_trip() {
        for n in 0..6 {
            let p = parse_formula(&gen_scal_sat(n), None).unwrap();
            let q = parse_formula(&p.show(), None).unwrap();
            assert_eq!(p.show(), q.show());
            // Conjuncts: G, F, and n+1 predicates.
            assert_eq!(p.formula.conjuncts().len(), n + 3);
        }
        for n in 1..5 {
            parse_formula(&gen_scal_unsat(n).unwrap(), None).unwrap();
        }
    }
}
