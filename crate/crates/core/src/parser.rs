//! Surface syntax: lexer and recursive-descent parser.
//!
//! ```text
//! iff   := imp ('<->' imp)*
//! imp   := or ('->' imp)?
//! or    := and ('||' and)*
//! and   := until ('&&' until)*
//! until := unary (('U' | 'R') until)?
//! unary := ('!' | 'X' | 'F' | 'G') unary | atom
//! atom  := 'true' | 'false' | '(' iff ')' | '[' cell '<-' term ']' | pred '(' terms ')'
//! ```

use std::collections::BTreeMap;
use std::sync::Arc;

use thiserror::Error;

use crate::formula::{Formula, Problem};
use crate::term::{Args, Signature, TermArena, TermId};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("{line}:{col}: {kind}")]
pub struct ParseError {
    pub line: usize,
    pub col: usize,
    pub kind: ParseErrorKind,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum ParseErrorKind {
    #[error("unexpected character `{0}`")]
    Lex(char),
    #[error("expected {expected}, found {found}")]
    Syntax { expected: String, found: String },
    #[error("`{name}` used with arity {found}, previously {expected}")]
    Arity { name: String, expected: usize, found: usize },
    #[error("`{name}` used as {found}, previously {expected}")]
    Kind { name: String, expected: &'static str, found: &'static str },
    #[error("`{0}` is a reserved name")]
    Reserved(String),
    #[error("`{0}` is not declared in the signature")]
    Undeclared(String),
    #[error("empty input")]
    Empty,
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Tok {
    Ident(String),
    LParen,
    RParen,
    LBrack,
    RBrack,
    Comma,
    Assign,
    Bang,
    AndAnd,
    OrOr,
    Implies,
    Iff,
    True,
    False,
    X,
    F,
    G,
    U,
    R,
    Eof,
}

impl Tok {
    fn describe(&self) -> String {
        match self {
            Tok::Ident(s) => format!("identifier `{s}`"),
            Tok::Eof => "end of input".into(),
            t => format!("`{}`", t.text()),
        }
    }

    fn text(&self) -> &'static str {
        match self {
            Tok::LParen => "(",
            Tok::RParen => ")",
            Tok::LBrack => "[",
            Tok::RBrack => "]",
            Tok::Comma => ",",
            Tok::Assign => "<-",
            Tok::Bang => "!",
            Tok::AndAnd => "&&",
            Tok::OrOr => "||",
            Tok::Implies => "->",
            Tok::Iff => "<->",
            Tok::True => "true",
            Tok::False => "false",
            Tok::X => "X",
            Tok::F => "F",
            Tok::G => "G",
            Tok::U => "U",
            Tok::R => "R",
            Tok::Ident(_) | Tok::Eof => "",
        }
    }
}

struct Spanned {
    tok: Tok,
    line: usize,
    col: usize,
}

fn lex(text: &str) -> Result<Vec<Spanned>, ParseError> {
    let mut out = Vec::new();
    let chars: Vec<char> = text.chars().collect();
    let (mut i, mut line, mut col) = (0, 1, 1);
    while i < chars.len() {
        let c = chars[i];
        let (l0, c0) = (line, col);
        let rest = |k: usize| chars.get(i + k).copied();
        let mut adv = 1;
        let tok = match c {
            '\n' => {
                line += 1;
                col = 1;
                i += 1;
                continue;
            }
            c if c.is_whitespace() => None,
            '/' if rest(1) == Some('/') => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '#' if col == 1 => {
                while i < chars.len() && chars[i] != '\n' {
                    i += 1;
                }
                continue;
            }
            '(' => Some(Tok::LParen),
            ')' => Some(Tok::RParen),
            '[' => Some(Tok::LBrack),
            ']' => Some(Tok::RBrack),
            ',' => Some(Tok::Comma),
            '!' => Some(Tok::Bang),
            '&' if rest(1) == Some('&') => {
                adv = 2;
                Some(Tok::AndAnd)
            }
            '|' if rest(1) == Some('|') => {
                adv = 2;
                Some(Tok::OrOr)
            }
            '-' if rest(1) == Some('>') => {
                adv = 2;
                Some(Tok::Implies)
            }
            '<' if rest(1) == Some('-') && rest(2) == Some('>') => {
                adv = 3;
                Some(Tok::Iff)
            }
            '<' if rest(1) == Some('-') => {
                adv = 2;
                Some(Tok::Assign)
            }
            c if c.is_ascii_alphabetic() || c == '_' => {
                let mut j = i;
                while j < chars.len() && (chars[j].is_ascii_alphanumeric() || chars[j] == '_') {
                    j += 1;
                }
                let word: String = chars[i..j].iter().collect();
                adv = j - i;
                Some(match word.as_str() {
                    "true" => Tok::True,
                    "false" => Tok::False,
                    "X" => Tok::X,
                    "F" => Tok::F,
                    "G" => Tok::G,
                    "U" => Tok::U,
                    "R" => Tok::R,
                    _ => Tok::Ident(word),
                })
            }
            c => return Err(ParseError { line, col, kind: ParseErrorKind::Lex(c) }),
        };
        if let Some(tok) = tok {
            out.push(Spanned { tok, line: l0, col: c0 });
        }
        i += adv;
        col += adv;
    }
    out.push(Spanned { tok: Tok::Eof, line, col });
    Ok(out)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Kind {
    Cell,
    Func(usize),
    Pred(usize),
}

impl Kind {
    fn noun(self) -> &'static str {
        match self {
            Kind::Cell => "a cell",
            Kind::Func(_) => "a function",
            Kind::Pred(_) => "a predicate",
        }
    }
}

pub fn is_reserved(name: &str) -> bool {
    name == "new" || name == "STAR" || name.starts_with("pick_")
}

struct Parser<'a> {
    toks: Vec<Spanned>,
    pos: usize,
    arena: &'a TermArena,
    fixed: bool,
    kinds: BTreeMap<String, Kind>,
    cell_order: Vec<String>,
    allow_reserved: bool,
}

type PResult<T> = Result<T, ParseError>;

impl<'a> Parser<'a> {
    fn peek(&self) -> &Tok {
        &self.toks[self.pos].tok
    }

    fn err(&self, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[self.pos];
        ParseError { line: s.line, col: s.col, kind }
    }

    fn err_at(&self, pos: usize, kind: ParseErrorKind) -> ParseError {
        let s = &self.toks[pos];
        ParseError { line: s.line, col: s.col, kind }
    }

    fn bump(&mut self) -> Tok {
        let t = self.toks[self.pos].tok.clone();
        if t != Tok::Eof {
            self.pos += 1;
        }
        t
    }

    fn eat(&mut self, t: &Tok) -> bool {
        if self.peek() == t {
            self.bump();
            true
        } else {
            false
        }
    }

    fn expect(&mut self, t: Tok) -> PResult<()> {
        if self.eat(&t) {
            Ok(())
        } else {
            Err(self.err(ParseErrorKind::Syntax {
                expected: t.describe(),
                found: self.peek().describe(),
            }))
        }
    }

    fn declare(&mut self, pos: usize, name: &str, kind: Kind) -> PResult<()> {
        if !self.allow_reserved && is_reserved(name) {
            return Err(self.err_at(pos, ParseErrorKind::Reserved(name.into())));
        }
        match self.kinds.get(name) {
            Some(&k) if k == kind => Ok(()),
            Some(&k) => match (k, kind) {
                (Kind::Func(a), Kind::Func(b)) | (Kind::Pred(a), Kind::Pred(b)) => Err(self.err_at(
                    pos,
                    ParseErrorKind::Arity { name: name.into(), expected: a, found: b },
                )),
                _ => Err(self.err_at(
                    pos,
                    ParseErrorKind::Kind { name: name.into(), expected: k.noun(), found: kind.noun() },
                )),
            },
            None if self.fixed => Err(self.err_at(pos, ParseErrorKind::Undeclared(name.into()))),
            None => {
                self.kinds.insert(name.into(), kind);
                if kind == Kind::Cell {
                    self.cell_order.push(name.into());
                }
                Ok(())
            }
        }
    }

    fn ident(&mut self) -> PResult<(usize, String)> {
        let pos = self.pos;
        match self.bump() {
            Tok::Ident(s) => Ok((pos, s)),
            t => Err(self.err_at(
                pos,
                ParseErrorKind::Syntax { expected: "identifier".into(), found: t.describe() },
            )),
        }
    }

    fn args(&mut self) -> PResult<Args> {
        self.expect(Tok::LParen)?;
        let mut args = Args::new();
        if self.eat(&Tok::RParen) {
            return Ok(args);
        }
        loop {
            args.push(self.term()?);
            if self.eat(&Tok::RParen) {
                return Ok(args);
            }
            self.expect(Tok::Comma)?;
        }
    }

    fn term(&mut self) -> PResult<TermId> {
        let (pos, name) = self.ident()?;
        if *self.peek() == Tok::LParen {
            let args = self.args()?;
            self.declare(pos, &name, Kind::Func(args.len()))?;
            Ok(self.arena.apply_sym(self.arena.intern(&name), args))
        } else if name == "STAR" && self.allow_reserved {
            Ok(self.arena.star())
        } else {
            self.declare(pos, &name, Kind::Cell)?;
            Ok(self.arena.cell(&name))
        }
    }

    fn iff(&mut self) -> PResult<Formula> {
        let mut f = self.imp()?;
        while self.eat(&Tok::Iff) {
            f = Formula::iff(f, self.imp()?);
        }
        Ok(f)
    }

    fn imp(&mut self) -> PResult<Formula> {
        let f = self.or()?;
        if self.eat(&Tok::Implies) {
            return Ok(Formula::implies(f, self.imp()?));
        }
        Ok(f)
    }

    fn or(&mut self) -> PResult<Formula> {
        let mut f = self.and()?;
        while self.eat(&Tok::OrOr) {
            f = Formula::or(f, self.and()?);
        }
        Ok(f)
    }

    fn and(&mut self) -> PResult<Formula> {
        let mut f = self.until()?;
        while self.eat(&Tok::AndAnd) {
            f = Formula::and(f, self.until()?);
        }
        Ok(f)
    }

    fn until(&mut self) -> PResult<Formula> {
        let f = self.unary()?;
        if self.eat(&Tok::U) {
            return Ok(Formula::until(f, self.until()?));
        }
        if self.eat(&Tok::R) {
            return Ok(Formula::release(f, self.until()?));
        }
        Ok(f)
    }

    fn unary(&mut self) -> PResult<Formula> {
        match self.peek() {
            Tok::Bang => {
                self.bump();
                Ok(Formula::not(self.unary()?))
            }
            Tok::X => {
                self.bump();
                Ok(Formula::next(self.unary()?))
            }
            Tok::F => {
                self.bump();
                Ok(Formula::eventually(self.unary()?))
            }
            Tok::G => {
                self.bump();
                Ok(Formula::globally(self.unary()?))
            }
            _ => self.atom(),
        }
    }

    fn atom(&mut self) -> PResult<Formula> {
        match self.peek().clone() {
            Tok::True => {
                self.bump();
                Ok(Formula::True)
            }
            Tok::False => {
                self.bump();
                Ok(Formula::ff())
            }
            Tok::LParen => {
                self.bump();
                let f = self.iff()?;
                self.expect(Tok::RParen)?;
                Ok(f)
            }
            Tok::LBrack => {
                self.bump();
                let (pos, cell) = self.ident()?;
                self.declare(pos, &cell, Kind::Cell)?;
                self.expect(Tok::Assign)?;
                let rhs = self.term()?;
                self.expect(Tok::RBrack)?;
                Ok(Formula::Update(self.arena.intern(&cell), rhs))
            }
            Tok::Ident(_) => {
                let (pos, name) = self.ident()?;
                if *self.peek() != Tok::LParen {
                    return Err(self.err_at(
                        pos,
                        ParseErrorKind::Syntax {
                            expected: "a predicate application, update or `(`".into(),
                            found: format!("identifier `{name}`"),
                        },
                    ));
                }
                let args = self.args()?;
                self.declare(pos, &name, Kind::Pred(args.len()))?;
                Ok(Formula::Pred(self.arena.pred_sym(self.arena.intern(&name), args)))
            }
            t => Err(self.err(ParseErrorKind::Syntax {
                expected: "a formula".into(),
                found: t.describe(),
            })),
        }
    }
}

/// Options for [`parse_with`].
#[derive(Clone, Copy, Debug, Default)]
pub struct ParseOptions {
    /// Accept `new`, `pick_*` and `STAR` (used for machine-generated text).
    pub allow_reserved: bool,
}

/// Parses `text` into a fresh arena. Without a signature, arities are inferred.
pub fn parse_formula(text: &str, signature: Option<&Signature>) -> Result<Problem, ParseError> {
    let arena = Arc::new(TermArena::new());
    parse_with(arena, text, signature, ParseOptions::default())
}

pub fn parse_with(
    arena: Arc<TermArena>,
    text: &str,
    signature: Option<&Signature>,
    opts: ParseOptions,
) -> Result<Problem, ParseError> {
    let toks = lex(text)?;
    if toks.len() == 1 {
        return Err(ParseError { line: toks[0].line, col: toks[0].col, kind: ParseErrorKind::Empty });
    }
    let mut kinds = BTreeMap::new();
    if let Some(sig) = signature {
        for c in &sig.cells {
            kinds.insert(c.clone(), Kind::Cell);
        }
        for (f, &a) in &sig.functions {
            kinds.insert(f.clone(), Kind::Func(a));
        }
        for (p, &a) in &sig.predicates {
            kinds.insert(p.clone(), Kind::Pred(a));
        }
    }
    let mut p = Parser {
        toks,
        pos: 0,
        arena: &arena,
        fixed: signature.is_some(),
        kinds,
        cell_order: Vec::new(),
        allow_reserved: opts.allow_reserved,
    };
    let formula = p.iff()?;
    if *p.peek() != Tok::Eof {
        return Err(p.err(ParseErrorKind::Syntax {
            expected: "end of input".into(),
            found: p.peek().describe(),
        }));
    }
    let signature = match signature {
        Some(sig) => sig.clone(),
        None => {
            let mut sig = Signature { cells: p.cell_order.clone(), ..Default::default() };
            for (name, k) in &p.kinds {
                match *k {
                    Kind::Func(a) => {
                        sig.functions.insert(name.clone(), a);
                    }
                    Kind::Pred(a) => {
                        sig.predicates.insert(name.clone(), a);
                    }
                    Kind::Cell => {}
                }
            }
            sig
        }
    };
    drop(p);
    Ok(Problem { arena, signature, formula })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formula::show_formula;

    fn roundtrip(text: &str) {
        let p = parse_formula(text, None).unwrap();
        let printed = p.show();
        let q = parse_with(p.arena.clone(), &printed, None, ParseOptions::default()).unwrap();
        assert_eq!(p.formula, q.formula, "{text} printed as {printed}");
        assert_eq!(printed, show_formula(&q.arena, &q.formula));
    }

    #[test]
    fn example_formula() {
        let p = parse_formula("[x <- f(x)] && !p(x) && X p(x)", None).unwrap();
        let a = &p.arena;
        let x = a.cell("x");
        let fx = a.apply("f", &[x]);
        let px = Formula::Pred(a.pred("p", &[x]));
        let expect = Formula::and(
            Formula::and(Formula::Update(a.intern("x"), fx), Formula::not(px.clone())),
            Formula::next(px),
        );
        assert_eq!(p.formula, expect);
        assert_eq!(p.signature.cells, vec!["x"]);
        assert_eq!(p.signature.functions.get("f"), Some(&1));
    }

    #[test]
    fn base_case_true() {
        assert_eq!(parse_formula("true", None).unwrap().formula, Formula::True);
        assert_eq!(parse_formula("false", None).unwrap().formula, Formula::ff());
    }

    #[test]
    fn arity_mismatch() {
        let e = parse_formula("p(x, f(x)) && p(x)", None).unwrap_err();
        assert!(matches!(e.kind, ParseErrorKind::Arity { .. }), "{e}");
        assert_eq!((e.line, e.col), (1, 15));
    }

    #[test]
    fn reserved_names() {
        for t in ["p(new(x))", "[pick_x <- x]", "[x <- STAR]"] {
            let e = parse_formula(t, None).unwrap_err();
            assert!(matches!(e.kind, ParseErrorKind::Reserved(_)), "{t}: {e}");
        }
    }

    #[test]
    fn kind_clash_and_errors() {
        assert!(matches!(
            parse_formula("p(x) && [y <- x()]", None).unwrap_err().kind,
            ParseErrorKind::Kind { .. }
        ));
        assert!(matches!(parse_formula("p(x) $", None).unwrap_err().kind, ParseErrorKind::Lex('$')));
        assert!(matches!(parse_formula("  // nothing\n", None).unwrap_err().kind, ParseErrorKind::Empty));
        assert!(parse_formula("p(x) &&", None).is_err());
        assert!(parse_formula("x", None).is_err());
    }

    #[test]
    fn precedence() {
        let a = parse_formula("a() || b() && c()", None).unwrap();
        let b = parse_formula("a() || (b() && c())", None).unwrap();
        assert_eq!(a.show(), b.show());
        let a = parse_formula("!a() U b() && c()", None).unwrap();
        let b = parse_formula("((!a()) U b()) && c()", None).unwrap();
        assert_eq!(a.show(), b.show());
        let a = parse_formula("a() -> b() -> c()", None).unwrap();
        let b = parse_formula("a() -> (b() -> c())", None).unwrap();
        assert_eq!(a.show(), b.show());
    }

    #[test]
    fn roundtrips() {
        for t in [
            "true",
            "false",
            "G [x <- f(x)] && F !p(x) && p(x)",
            "G F (p(x) && X !p(x))",
            "(a() U b()) U c()",
            "a() U b() U c()",
            "a() R (b() R c())",
            "!(a() || b()) || !!c()",
            "a() -> b() <-> c()",
            "X X G (q(x) <-> !q(f(x)))",
            "p(x) && (p(y) && p(z))",
            "F (true R p(x))",
            "[x <- g(x, y)] && p(h())",
            "// comment\n#!expect: SAT\nG [out <- d()]",
        ] {
            roundtrip(t);
        }
    }

    #[test]
    fn fixed_signature() {
        let sig = Signature {
            functions: [("f".to_string(), 1)].into_iter().collect(),
            predicates: [("p".to_string(), 1)].into_iter().collect(),
            cells: vec!["x".into(), "y".into()],
        };
        let p = parse_formula("p(f(x))", Some(&sig)).unwrap();
        assert_eq!(p.signature.cells, vec!["x", "y"]);
        assert!(matches!(parse_formula("p(g(x))", Some(&sig)).unwrap_err().kind, ParseErrorKind::Undeclared(_)));
        assert!(matches!(parse_formula("p(x, x)", Some(&sig)).unwrap_err().kind, ParseErrorKind::Arity { .. }));
    }
}
