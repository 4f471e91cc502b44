//! Evaluation of LTL formulas on ultimately periodic words.

use thiserror::Error;

use super::{Letter, Ltl};

#[derive(Debug, Error, PartialEq, Eq)]
pub enum LassoError {
    #[error("loop must be nonempty")]
    EmptyLoop,
    #[error("formula mentions AP {ap} outside a universe of {len}")]
    Universe { ap: usize, len: usize },
    #[error("letter {pos} sets AP {ap} outside a universe of {len}")]
    Letter { pos: usize, ap: usize, len: usize },
}

/// Decides `stem · loop^ω ⊨ φ` by fixpoint evaluation over the lasso positions.
pub fn ltl_lasso_check(stem: &[Letter], lp: &[Letter], phi: &Ltl, num_aps: usize) -> Result<bool, LassoError> {
    if lp.is_empty() {
        return Err(LassoError::EmptyLoop);
    }
    if let Some(ap) = phi.max_ap().filter(|&a| a >= num_aps) {
        return Err(LassoError::Universe { ap, len: num_aps });
    }
    let word: Vec<&Letter> = stem.iter().chain(lp.iter()).collect();
    for (pos, l) in word.iter().enumerate() {
        if let Some(ap) = l.iter().find(|&a| a >= num_aps) {
            return Err(LassoError::Letter { pos, ap, len: num_aps });
        }
    }
    let ev = LassoEval { word, start: stem.len() };
    Ok(ev.eval(phi)[0])
}

struct LassoEval<'a> {
    word: Vec<&'a Letter>,
    start: usize,
}

impl LassoEval<'_> {
    fn succ(&self, i: usize) -> usize {
        if i + 1 < self.word.len() {
            i + 1
        } else {
            self.start
        }
    }

    fn eval(&self, f: &Ltl) -> Vec<bool> {
        let n = self.word.len();
        match f {
            Ltl::True => vec![true; n],
            Ltl::Ap(a) => self.word.iter().map(|l| l.get(*a)).collect(),
            Ltl::Not(a) => self.eval(a).into_iter().map(|v| !v).collect(),
            Ltl::And(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                x.iter().zip(&y).map(|(p, q)| *p && *q).collect()
            }
            Ltl::Next(a) => {
                let x = self.eval(a);
                (0..n).map(|i| x[self.succ(i)]).collect()
            }
            Ltl::Until(a, b) => {
                let (x, y) = (self.eval(a), self.eval(b));
                let mut r = y.clone();
                loop {
                    let mut changed = false;
                    for i in (0..n).rev() {
                        let v = y[i] || (x[i] && r[self.succ(i)]);
                        if v != r[i] {
                            r[i] = v;
                            changed = true;
                        }
                    }
                    if !changed {
                        return r;
                    }
                }
            }
        }
    }
}
