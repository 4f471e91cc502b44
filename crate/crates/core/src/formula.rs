//! The TSL abstract syntax tree (desugared) and its printer.

use std::sync::Arc;

use crate::term::{PredId, Signature, Sym, TermArena, TermId};

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Formula {
    True,
    Not(Box<Formula>),
    And(Box<Formula>, Box<Formula>),
    Next(Box<Formula>),
    Until(Box<Formula>, Box<Formula>),
    Pred(PredId),
    Update(Sym, TermId),
}

use Formula::*;

impl Formula {
    pub fn ff() -> Formula {
        Not(Box::new(True))
    }

    pub fn not(a: Formula) -> Formula {
        Not(Box::new(a))
    }

    pub fn and(a: Formula, b: Formula) -> Formula {
        And(Box::new(a), Box::new(b))
    }

    pub fn or(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::and(Formula::not(a), Formula::not(b)))
    }

    pub fn implies(a: Formula, b: Formula) -> Formula {
        Formula::or(Formula::not(a), b)
    }

    pub fn iff(a: Formula, b: Formula) -> Formula {
        Formula::and(Formula::implies(a.clone(), b.clone()), Formula::implies(b, a))
    }

    pub fn next(a: Formula) -> Formula {
        Next(Box::new(a))
    }

    pub fn until(a: Formula, b: Formula) -> Formula {
        Until(Box::new(a), Box::new(b))
    }

    pub fn eventually(a: Formula) -> Formula {
        Formula::until(True, a)
    }

    pub fn globally(a: Formula) -> Formula {
        Formula::not(Formula::eventually(Formula::not(a)))
    }

    pub fn release(a: Formula, b: Formula) -> Formula {
        Formula::not(Formula::until(Formula::not(a), Formula::not(b)))
    }

    /// Conjunction of all items, left-nested; `true` when empty.
    pub fn conj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => True,
            Some(first) => it.fold(first, Formula::and),
        }
    }

    /// Disjunction of all items, left-nested; `false` when empty.
    pub fn disj(items: impl IntoIterator<Item = Formula>) -> Formula {
        let mut it = items.into_iter();
        match it.next() {
            None => Formula::ff(),
            Some(first) => it.fold(first, Formula::or),
        }
    }

    pub fn size(&self) -> usize {
        match self {
            True | Pred(_) | Update(..) => 1,
            Not(a) | Next(a) => 1 + a.size(),
            And(a, b) | Until(a, b) => 1 + a.size() + b.size(),
        }
    }

    fn visit<'a>(&'a self, f: &mut impl FnMut(&'a Formula)) {
        f(self);
        match self {
            Not(a) | Next(a) => a.visit(f),
            And(a, b) | Until(a, b) => {
                a.visit(f);
                b.visit(f)
            }
            _ => {}
        }
    }

    /// Predicate terms in first-occurrence order.
    pub fn all_predicates(&self) -> Vec<PredId> {
        let mut out = Vec::new();
        self.visit(&mut |g| {
            if let Pred(p) = g {
                if !out.contains(p) {
                    out.push(*p);
                }
            }
        });
        out
    }

    /// Updates in first-occurrence order.
    pub fn all_updates(&self) -> Vec<(Sym, TermId)> {
        let mut out = Vec::new();
        self.visit(&mut |g| {
            if let Update(c, t) = g {
                if !out.contains(&(*c, *t)) {
                    out.push((*c, *t));
                }
            }
        });
        out
    }

    /// Cells occurring anywhere in the formula, in first-occurrence order.
    pub fn cells(&self, arena: &TermArena) -> Vec<Sym> {
        let mut out = Vec::new();
        self.visit(&mut |g| match g {
            Update(c, t) => {
                if !out.contains(c) {
                    out.push(*c);
                }
                arena.cells_of(*t, &mut out);
            }
            Pred(p) => {
                for a in arena.pred_args(*p).1 {
                    arena.cells_of(a, &mut out);
                }
            }
            _ => {}
        });
        out
    }

    /// Top-level conjuncts (flattening nested `And`).
    pub fn conjuncts(&self) -> Vec<&Formula> {
        let mut out = Vec::new();
        let mut stack = vec![self];
        while let Some(f) = stack.pop() {
            match f {
                And(a, b) => {
                    stack.push(b);
                    stack.push(a);
                }
                _ => out.push(f),
            }
        }
        out
    }
}

/// A formula together with its signature and the arena holding its terms.
#[derive(Clone, Debug)]
pub struct Problem {
    pub arena: Arc<TermArena>,
    pub signature: Signature,
    pub formula: Formula,
}

impl Problem {
    pub fn show(&self) -> String {
        show_formula(&self.arena, &self.formula)
    }

    pub fn cell_syms(&self) -> Vec<Sym> {
        self.signature.cells.iter().map(|c| self.arena.intern(c)).collect()
    }
}

// Binding strength, larger binds tighter.
const P_OR: u8 = 3;
const P_AND: u8 = 4;
const P_UNTIL: u8 = 5;
const P_UNARY: u8 = 6;
const P_ATOM: u8 = 7;

enum View<'a> {
    False,
    Or(&'a Formula, &'a Formula),
    Eventually(&'a Formula),
    Globally(&'a Formula),
    Release(&'a Formula, &'a Formula),
    Plain,
}

fn view(f: &Formula) -> View<'_> {
    match f {
        Not(inner) => match &**inner {
            True => View::False,
            And(a, b) => match (&**a, &**b) {
                (Not(x), Not(y)) => View::Or(x, y),
                _ => View::Plain,
            },
            Until(a, b) => match (&**a, &**b) {
                (True, Not(x)) => View::Globally(x),
                (Not(x), Not(y)) => View::Release(x, y),
                _ => View::Plain,
            },
            _ => View::Plain,
        },
        Until(a, b) if **a == True => View::Eventually(b),
        _ => View::Plain,
    }
}

fn level(f: &Formula) -> u8 {
    match view(f) {
        View::False => P_ATOM,
        View::Or(..) => P_OR,
        View::Eventually(_) | View::Globally(_) => P_UNARY,
        View::Release(..) => P_UNTIL,
        View::Plain => match f {
            True | Pred(_) | Update(..) => P_ATOM,
            Not(_) | Next(_) => P_UNARY,
            And(..) => P_AND,
            Until(..) => P_UNTIL,
        },
    }
}

/// Prints in surface syntax. Re-parsing the output yields the same AST.
pub fn show_formula(arena: &TermArena, f: &Formula) -> String {
    let mut s = String::new();
    write_formula(arena, f, &mut s);
    s
}

fn write_child(arena: &TermArena, f: &Formula, paren: bool, out: &mut String) {
    if paren {
        out.push('(');
        write_formula(arena, f, out);
        out.push(')');
    } else {
        write_formula(arena, f, out);
    }
}

fn write_unary(arena: &TermArena, op: &str, a: &Formula, out: &mut String) {
    out.push_str(op);
    write_child(arena, a, level(a) < P_UNARY, out);
}

// Left-associative operators: parenthesize a right child of equal level.
fn write_left_assoc(arena: &TermArena, op: &str, lvl: u8, a: &Formula, b: &Formula, out: &mut String) {
    write_child(arena, a, level(a) < lvl, out);
    out.push_str(op);
    write_child(arena, b, level(b) <= lvl, out);
}

// Right-associative operators: parenthesize a left child of equal level.
fn write_right_assoc(arena: &TermArena, op: &str, lvl: u8, a: &Formula, b: &Formula, out: &mut String) {
    write_child(arena, a, level(a) <= lvl, out);
    out.push_str(op);
    write_child(arena, b, level(b) < lvl, out);
}

fn write_formula(arena: &TermArena, f: &Formula, out: &mut String) {
    match view(f) {
        View::False => return out.push_str("false"),
        View::Or(a, b) => return write_left_assoc(arena, " || ", P_OR, a, b, out),
        View::Eventually(a) => return write_unary(arena, "F ", a, out),
        View::Globally(a) => return write_unary(arena, "G ", a, out),
        View::Release(a, b) => return write_right_assoc(arena, " R ", P_UNTIL, a, b, out),
        View::Plain => {}
    }
    match f {
        True => out.push_str("true"),
        Pred(p) => out.push_str(&arena.show_pred(*p)),
        Update(c, t) => {
            out.push('[');
            out.push_str(&arena.name(*c));
            out.push_str(" <- ");
            out.push_str(&arena.show(*t));
            out.push(']');
        }
        Not(a) => write_unary(arena, "!", a, out),
        Next(a) => write_unary(arena, "X ", a, out),
        And(a, b) => write_left_assoc(arena, " && ", P_AND, a, b, out),
        Until(a, b) => write_right_assoc(arena, " U ", P_UNTIL, a, b, out),
    }
}
