//! SMT-LIB 2 export and an optional external solver backend.

use std::fmt::Write as _;
use std::io::{self, BufRead, BufReader, Write};
use std::process::{Command, Stdio};

use super::EufQuery;
use crate::term::{Node, Sym, TermArena};

const RESERVED: &[&str] = &[
    "true", "false", "not", "and", "or", "xor", "ite", "distinct", "let", "forall", "exists", "par", "as",
    "match", "assert", "check", "sat", "unsat", "unknown", "Bool", "NUMERAL", "DECIMAL", "STRING", "BINARY",
    "HEXADECIMAL",
];

fn symbol(name: &str) -> String {
    let plain = name.chars().next().is_some_and(|c| c.is_ascii_alphabetic() || c == '_')
        && name.chars().all(|c| c.is_ascii_alphanumeric() || c == '_');
    if plain && !RESERVED.contains(&name) {
        name.to_string()
    } else {
        format!("|{}|", name.replace(['|', '\\'], "_"))
    }
}

fn write_term(arena: &TermArena, id: u32, out: &mut String) {
    match arena.node(id) {
        Node::Cell(c) => out.push_str(&symbol(&arena.name(c))),
        Node::Apply(f, args) | Node::Pred(f, args) if args.is_empty() => out.push_str(&symbol(&arena.name(f))),
        Node::Apply(f, args) | Node::Pred(f, args) => {
            out.push('(');
            out.push_str(&symbol(&arena.name(f)));
            for a in args {
                out.push(' ');
                write_term(arena, a.0, out);
            }
            out.push(')');
        }
        Node::Star => panic!("STAR in query"),
    }
}

fn declare(arena: &TermArena, id: u32, seen: &mut Vec<Sym>, decls: &mut String) {
    let (s, args, is_pred) = match arena.node(id) {
        Node::Cell(c) => (c, Default::default(), false),
        Node::Apply(f, args) => (f, args, false),
        Node::Pred(p, args) => (p, args, true),
        Node::Star => panic!("STAR in query"),
    };
    for a in &args {
        declare(arena, a.0, seen, decls);
    }
    if !seen.contains(&s) {
        seen.push(s);
        let dom = vec!["U"; args.len()].join(" ");
        let _ = writeln!(
            decls,
            "(declare-fun {} ({}) {})",
            symbol(&arena.name(s)),
            dom,
            if is_pred { "Bool" } else { "U" }
        );
    }
}

/// QF_UF script with one uninterpreted sort `U`.
pub fn export_smtlib(arena: &TermArena, q: &EufQuery) -> String {
    let mut decls = String::new();
    let mut seen = Vec::new();
    for &(p, _) in &q.signed_predicates {
        declare(arena, p.0, &mut seen, &mut decls);
    }
    for &(a, b) in &q.equalities {
        declare(arena, a.0, &mut seen, &mut decls);
        declare(arena, b.0, &mut seen, &mut decls);
    }
    let mut s = String::from("(set-logic QF_UF)\n(declare-sort U 0)\n");
    s.push_str(&decls);
    for &(p, v) in &q.signed_predicates {
        let mut t = String::new();
        write_term(arena, p.0, &mut t);
        if v {
            let _ = writeln!(s, "(assert {t})");
        } else {
            let _ = writeln!(s, "(assert (not {t}))");
        }
    }
    for &(a, b) in &q.equalities {
        let (mut x, mut y) = (String::new(), String::new());
        write_term(arena, a.0, &mut x);
        write_term(arena, b.0, &mut y);
        let _ = writeln!(s, "(assert (= {x} {y}))");
    }
    s.push_str("(check-sat)\n");
    s
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolverAnswer {
    Sat,
    Unsat,
    Unknown,
}

/// A solver process that reads a script on stdin and prints `sat`, `unsat` or `unknown`.
#[derive(Clone, Debug)]
pub struct ExternalSolver {
    program: String,
    args: Vec<String>,
}

impl ExternalSolver {
    /// Splits `cmd` on whitespace, e.g. `z3 -in`.
    pub fn from_command(cmd: &str) -> Option<ExternalSolver> {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program = parts.next()?;
        Some(ExternalSolver { program, args: parts.collect() })
    }

    pub fn check(&self, script: &str) -> io::Result<SolverAnswer> {
        let mut child = Command::new(&self.program)
            .args(&self.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()?;
        child.stdin.take().expect("piped stdin").write_all(script.as_bytes())?;
        let stdout = child.stdout.take().expect("piped stdout");
        let mut answer = None;
        for line in BufReader::new(stdout).lines() {
            let line = line?;
            match line.trim() {
                "" => continue,
                "sat" => answer = Some(SolverAnswer::Sat),
                "unsat" => answer = Some(SolverAnswer::Unsat),
                "unknown" => answer = Some(SolverAnswer::Unknown),
                other => {
                    let _ = child.kill();
                    return Err(io::Error::new(io::ErrorKind::InvalidData, format!("solver said `{other}`")));
                }
            }
            break;
        }
        let _ = child.wait();
        answer.ok_or_else(|| io::Error::new(io::ErrorKind::UnexpectedEof, "no answer from solver"))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_query_script() {
        let a = TermArena::new();
        let s = export_smtlib(&a, &EufQuery::default());
        assert_eq!(s, "(set-logic QF_UF)\n(declare-sort U 0)\n(check-sat)\n");
    }

    #[test]
    fn example_script() {
        let a = TermArena::new();
        let x = a.cell("x");
        let fx = a.apply("f", &[x]);
        let q = EufQuery {
            signed_predicates: vec![(a.pred("p", &[x]), true), (a.pred("p", &[fx]), false)],
            equalities: vec![(x, a.apply("f", &[fx]))],
        };
        let s = export_smtlib(&a, &q);
        assert!(s.contains("(declare-fun x () U)\n(declare-fun p (U) Bool)\n(declare-fun f (U) U)\n"), "{s}");
        assert!(s.contains("(assert (p x))\n(assert (not (p (f x))))\n(assert (= x (f (f x))))\n(check-sat)\n"));
    }

    #[test]
    fn reserved_symbols_are_quoted() {
        assert_eq!(symbol("and"), "|and|");
        assert_eq!(symbol("x_1"), "x_1");
    }
}
