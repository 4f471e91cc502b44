//! Cubes and propositional constraints over AP ids.

use crate::bits::Bits;
use crate::ltl::{ApId, Letter, Ltl};

/// Conjunction of literals: bit `i` of `mask` fixes AP `i` to bit `i` of `vals`.
#[derive(Clone, Default, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Cube {
    pub mask: Bits,
    pub vals: Bits,
}

impl Cube {
    pub fn top() -> Cube {
        Cube::default()
    }

    pub fn get(&self, ap: ApId) -> Option<bool> {
        self.mask.get(ap).then(|| self.vals.get(ap))
    }

    /// Adds a literal; returns false on contradiction.
    pub fn set(&mut self, ap: ApId, v: bool) -> bool {
        match self.get(ap) {
            Some(w) => w == v,
            None => {
                self.mask.set(ap, true);
                self.vals.set(ap, v);
                true
            }
        }
    }

    pub fn without(&self, ap: ApId) -> Cube {
        let mut c = self.clone();
        c.mask.set(ap, false);
        c.vals.set(ap, false);
        c.normalize()
    }

    pub fn normalize(self) -> Cube {
        Cube { mask: self.mask.normalized(), vals: self.vals.normalized() }
    }

    pub fn matches(&self, letter: &Letter) -> bool {
        !self.vals.differs_on(letter, &self.mask)
    }

    /// Every letter matching `other` also matches `self`.
    pub fn subsumes(&self, other: &Cube) -> bool {
        self.mask.is_subset(&other.mask) && !self.vals.differs_on(&other.vals, &self.mask)
    }

    pub fn compatible(&self, other: &Cube) -> bool {
        !self.vals.differs_on(&other.vals, &self.mask.and(&other.mask))
    }

    pub fn literals(&self) -> impl Iterator<Item = (ApId, bool)> + '_ {
        self.mask.iter().map(|i| (i, self.vals.get(i)))
    }

    pub fn len(&self) -> usize {
        self.mask.count()
    }

    pub fn is_empty(&self) -> bool {
        self.mask.is_empty()
    }
}

/// Propositional formula in negation normal form.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Prop {
    True,
    False,
    Lit(ApId, bool),
    And(Vec<Prop>),
    Or(Vec<Prop>),
}

impl Prop {
    /// Converts a temporal-free LTL formula.
    pub fn from_ltl(f: &Ltl) -> Prop {
        Self::from_ltl_pol(f, true)
    }

    fn from_ltl_pol(f: &Ltl, pos: bool) -> Prop {
        match f {
            Ltl::True => {
                if pos {
                    Prop::True
                } else {
                    Prop::False
                }
            }
            Ltl::Ap(a) => Prop::Lit(*a, pos),
            Ltl::Not(a) => Self::from_ltl_pol(a, !pos),
            Ltl::And(a, b) => {
                let xs = vec![Self::from_ltl_pol(a, pos), Self::from_ltl_pol(b, pos)];
                if pos {
                    Prop::and(xs)
                } else {
                    Prop::or(xs)
                }
            }
            Ltl::Next(_) | Ltl::Until(..) => panic!("temporal operator in propositional formula"),
        }
    }

    pub fn and(xs: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for x in xs {
            match x {
                Prop::True => {}
                Prop::False => return Prop::False,
                Prop::And(ys) => out.extend(ys),
                y => out.push(y),
            }
        }
        match out.len() {
            0 => Prop::True,
            1 => out.pop().unwrap(),
            _ => Prop::And(out),
        }
    }

    pub fn or(xs: Vec<Prop>) -> Prop {
        let mut out = Vec::new();
        for x in xs {
            match x {
                Prop::False => {}
                Prop::True => return Prop::True,
                Prop::Or(ys) => out.extend(ys),
                y => out.push(y),
            }
        }
        match out.len() {
            0 => Prop::False,
            1 => out.pop().unwrap(),
            _ => Prop::Or(out),
        }
    }

    pub fn eval(&self, letter: &Letter) -> bool {
        match self {
            Prop::True => true,
            Prop::False => false,
            Prop::Lit(a, v) => letter.get(*a) == *v,
            Prop::And(xs) => xs.iter().all(|x| x.eval(letter)),
            Prop::Or(xs) => xs.iter().any(|x| x.eval(letter)),
        }
    }

    /// Partial evaluation under the literals of `cube`.
    pub fn restrict(&self, cube: &Cube) -> Prop {
        match self {
            Prop::True | Prop::False => self.clone(),
            Prop::Lit(a, v) => match cube.get(*a) {
                Some(w) if w == *v => Prop::True,
                Some(_) => Prop::False,
                None => self.clone(),
            },
            Prop::And(xs) => Prop::and(xs.iter().map(|x| x.restrict(cube)).collect()),
            Prop::Or(xs) => Prop::or(xs.iter().map(|x| x.restrict(cube)).collect()),
        }
    }

    fn first_var(&self) -> Option<ApId> {
        match self {
            Prop::True | Prop::False => None,
            Prop::Lit(a, _) => Some(*a),
            Prop::And(xs) | Prop::Or(xs) => xs.iter().find_map(|x| x.first_var()),
        }
    }

    pub fn support(&self, out: &mut Bits) {
        match self {
            Prop::True | Prop::False => {}
            Prop::Lit(a, _) => out.set(*a, true),
            Prop::And(xs) | Prop::Or(xs) => xs.iter().for_each(|x| x.support(out)),
        }
    }

    /// Whether `self ∧ cube` is satisfiable.
    pub fn satisfiable_under(&self, cube: &Cube) -> bool {
        fn go(p: Prop) -> bool {
            match p {
                Prop::True => true,
                Prop::False => false,
                p => {
                    let v = p.first_var().unwrap();
                    [true, false].into_iter().any(|b| {
                        let mut c = Cube::top();
                        c.set(v, b);
                        go(p.restrict(&c))
                    })
                }
            }
        }
        go(self.restrict(cube))
    }

    /// Disjoint-ish cube cover of the models of `self` by Shannon expansion.
    /// Cubes only mention variables of the support.
    pub fn cover(&self) -> Vec<Cube> {
        match self {
            Prop::True => vec![Cube::top()],
            Prop::False => vec![],
            p => {
                let v = p.first_var().unwrap();
                let branch = |b: bool| {
                    let mut c = Cube::top();
                    c.set(v, b);
                    p.restrict(&c).cover()
                };
                let (hi, lo) = (branch(true), branch(false));
                let mut out = Vec::new();
                for c in &hi {
                    if lo.contains(c) {
                        out.push(c.clone());
                    } else {
                        let mut d = c.clone();
                        d.set(v, true);
                        out.push(d);
                    }
                }
                for c in lo {
                    if !hi.contains(&c) {
                        let mut d = c;
                        d.set(v, false);
                        out.push(d);
                    }
                }
                out
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn letters(n: usize) -> impl Iterator<Item = Letter> {
        (0u32..1 << n).map(move |b| (0..n).filter(|i| b >> i & 1 == 1).collect())
    }

    #[test]
    fn cover_is_exact() {
        let f = Ltl::or(
            Ltl::and(Ltl::Ap(0), Ltl::not(Ltl::Ap(1))),
            Ltl::and(Ltl::Ap(2), Ltl::or(Ltl::Ap(1), Ltl::Ap(0))),
        );
        let p = Prop::from_ltl(&f);
        let cover = p.cover();
        for l in letters(3) {
            assert_eq!(cover.iter().any(|c| c.matches(&l)), f.eval_prop(&l));
            assert_eq!(p.eval(&l), f.eval_prop(&l));
        }
    }

    #[test]
    fn cube_ops() {
        let mut a = Cube::top();
        assert!(a.set(1, true));
        assert!(!a.set(1, false));
        let mut b = a.clone();
        b.set(2, false);
        assert!(a.subsumes(&b) && !b.subsumes(&a));
        let mut c = Cube::top();
        c.set(1, false);
        assert!(!a.compatible(&c));
        assert_eq!(b.without(2), a);
    }

    #[test]
    fn satisfiable_under_cube() {
        let p = Prop::from_ltl(&Ltl::and(Ltl::Ap(0), Ltl::not(Ltl::Ap(1))));
        let mut c = Cube::top();
        assert!(p.satisfiable_under(&c));
        c.set(1, true);
        assert!(!p.satisfiable_under(&c));
    }
}
