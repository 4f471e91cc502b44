//! GOTO programs and their TSL encodings.
//!
//! Source format, one statement per line, `#` starts a comment:
//!
//! ```text
//! start: INC v1
//!        GOTOEQ v1 v0 done
//!        GOTO start
//! done:  HALT
//! ```
//!
//! `INC v`, `RESET v` and `GOTOEQ va vb label` are the reduced actions. `GOTO label`,
//! `ASSIGN va vb` (`va := vb`), `DEC v` and `HALT` are expanded into reduced actions.
//! Variables are `v0`, `v1`, ...; `v0` holds the input.
//!
//! The encodings use the binary predicate `eq` for number equality. Under the theory of
//! equality it stands for `=` itself.

use rustc_hash::FxHashMap;
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Action {
    Inc(u32),
    Reset(u32),
    /// Jump to the location if both variables are equal.
    GotoIfEq(u32, u32, u32),
}

/// A reduced program with locations `0..=actions.len()`; the last one terminates.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct GotoProgram {
    pub vars: u32,
    pub actions: Vec<Action>,
}

impl GotoProgram {
    /// Index of the terminating location.
    pub fn halt(&self) -> u32 {
        self.actions.len() as u32
    }

    pub fn validate(&self) -> Result<(), GotoError> {
        let m = self.halt();
        for (k, a) in self.actions.iter().enumerate() {
            let (vs, target) = match *a {
                Action::Inc(v) | Action::Reset(v) => (vec![v], None),
                Action::GotoIfEq(a, b, t) => (vec![a, b], Some(t)),
            };
            if let Some(v) = vs.into_iter().find(|&v| v >= self.vars) {
                return Err(GotoError::Invalid(format!("location {k} uses undeclared variable v{v}")));
            }
            if target.is_some_and(|t| t > m) {
                return Err(GotoError::Invalid(format!("location {k} jumps past the terminating location")));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum GotoError {
    #[error("line {0}: {1}")]
    Syntax(usize, String),
    #[error("undefined label `{0}`")]
    UndefinedLabel(String),
    #[error("label `{0}` defined twice")]
    DuplicateLabel(String),
    #[error("invalid program: {0}")]
    Invalid(String),
}

#[derive(Clone, Debug, PartialEq, Eq)]
enum Stmt {
    Inc(u32),
    Reset(u32),
    GotoIfEq(u32, u32, String),
    Goto(String),
    Assign(u32, u32),
    Dec(u32),
    Halt,
}

/// A parsed program before gadget expansion.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ClassicProgram {
    /// Statements with the labels attached to them. Labels after the last statement
    /// name the terminating location.
    lines: Vec<(Vec<String>, Stmt)>,
    trailing: Vec<String>,
}

fn var(tok: &str, line: usize) -> Result<u32, GotoError> {
    tok.strip_prefix('v')
        .and_then(|d| d.parse().ok())
        .ok_or_else(|| GotoError::Syntax(line, format!("expected a variable like v1, found `{tok}`")))
}

fn label(tok: &str, line: usize) -> Result<String, GotoError> {
    if !tok.is_empty() && tok.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
        Ok(tok.to_string())
    } else {
        Err(GotoError::Syntax(line, format!("bad label `{tok}`")))
    }
}

pub fn parse_goto(text: &str) -> Result<ClassicProgram, GotoError> {
    let mut lines = Vec::new();
    let mut pending = Vec::new();
    for (n, raw) in text.lines().enumerate() {
        let n = n + 1;
        let mut s = raw.split('#').next().unwrap().trim();
        while let Some((l, rest)) = s.split_once(':') {
            pending.push(label(l.trim(), n)?);
            s = rest.trim();
        }
        let toks: Vec<&str> = s.split_whitespace().collect();
        if toks.is_empty() {
            continue;
        }
        let arity = |k: usize| {
            if toks.len() == k + 1 {
                Ok(())
            } else {
                Err(GotoError::Syntax(n, format!("{} takes {k} operand(s)", toks[0])))
            }
        };
        let stmt = match toks[0].to_ascii_uppercase().as_str() {
            "INC" => arity(1).and_then(|_| Ok(Stmt::Inc(var(toks[1], n)?)))?,
            "RESET" => arity(1).and_then(|_| Ok(Stmt::Reset(var(toks[1], n)?)))?,
            "DEC" => arity(1).and_then(|_| Ok(Stmt::Dec(var(toks[1], n)?)))?,
            "GOTO" => arity(1).and_then(|_| Ok(Stmt::Goto(label(toks[1], n)?)))?,
            "ASSIGN" => arity(2).and_then(|_| Ok(Stmt::Assign(var(toks[1], n)?, var(toks[2], n)?)))?,
            "GOTOEQ" => arity(3)
                .and_then(|_| Ok(Stmt::GotoIfEq(var(toks[1], n)?, var(toks[2], n)?, label(toks[3], n)?)))?,
            "HALT" => arity(0).map(|_| Stmt::Halt)?,
            other => return Err(GotoError::Syntax(n, format!("unknown instruction `{other}`"))),
        };
        lines.push((std::mem::take(&mut pending), stmt));
    }
    Ok(ClassicProgram { lines, trailing: pending })
}

const END: &str = "#end";

enum Raw {
    Inc(u32),
    Reset(u32),
    Eq(u32, u32, String),
}

struct Emitter {
    out: Vec<Raw>,
    labels: FxHashMap<String, usize>,
    next_var: u32,
    next_label: usize,
}

impl Emitter {
    fn define(&mut self, l: &str) -> Result<(), GotoError> {
        if self.labels.insert(l.to_string(), self.out.len()).is_some() {
            return Err(GotoError::DuplicateLabel(l.to_string()));
        }
        Ok(())
    }

    fn fresh_var(&mut self) -> u32 {
        self.next_var += 1;
        self.next_var - 1
    }

    fn fresh_label(&mut self) -> String {
        self.next_label += 1;
        format!("#{}", self.next_label)
    }

    fn goto(&mut self, l: &str) {
        let f = self.fresh_var();
        self.out.push(Raw::Reset(f));
        self.out.push(Raw::Eq(f, f, l.to_string()));
    }

    fn assign(&mut self, i: u32, j: u32) -> Result<(), GotoError> {
        if i == j {
            return Ok(());
        }
        let (ls, ln) = (self.fresh_label(), self.fresh_label());
        self.out.push(Raw::Reset(i));
        self.define(&ls)?;
        self.out.push(Raw::Eq(i, j, ln.clone()));
        self.out.push(Raw::Inc(i));
        self.goto(&ls);
        self.define(&ln)
    }

    fn dec(&mut self, i: u32) -> Result<(), GotoError> {
        let (f, g) = (self.fresh_var(), self.fresh_var());
        let (ls, ln) = (self.fresh_label(), self.fresh_label());
        self.assign(f, i)?;
        self.out.push(Raw::Reset(i));
        self.out.push(Raw::Eq(i, f, ln.clone()));
        self.define(&ls)?;
        self.assign(g, i)?;
        self.out.push(Raw::Inc(g));
        self.out.push(Raw::Eq(f, g, ln.clone()));
        self.out.push(Raw::Inc(i));
        self.goto(&ls);
        self.define(&ln)
    }
}

/// Expands `GOTO`, `ASSIGN`, `DEC` and `HALT` into reduced actions with fresh helper
/// variables. A program already in reduced form is returned as is.
pub fn desugar_goto(p: &ClassicProgram) -> Result<GotoProgram, GotoError> {
    let mut max_var = 0;
    for (_, s) in &p.lines {
        let vs = match s {
            Stmt::Inc(v) | Stmt::Reset(v) | Stmt::Dec(v) => vec![*v],
            Stmt::GotoIfEq(a, b, _) | Stmt::Assign(a, b) => vec![*a, *b],
            _ => vec![],
        };
        max_var = vs.into_iter().fold(max_var, u32::max);
    }
    // Trailing HALTs fall through to the terminating location anyway.
    let live = p.lines.iter().rposition(|(_, s)| *s != Stmt::Halt).map_or(0, |i| i + 1);
    let mut em = Emitter { out: Vec::new(), labels: FxHashMap::default(), next_var: max_var + 1, next_label: 0 };
    for (k, (labels, stmt)) in p.lines.iter().enumerate() {
        for l in labels {
            em.define(l)?;
        }
        match stmt {
            Stmt::Inc(v) => em.out.push(Raw::Inc(*v)),
            Stmt::Reset(v) => em.out.push(Raw::Reset(*v)),
            Stmt::GotoIfEq(a, b, l) => em.out.push(Raw::Eq(*a, *b, l.clone())),
            Stmt::Goto(l) => em.goto(l),
            Stmt::Assign(a, b) => em.assign(*a, *b)?,
            Stmt::Dec(v) => em.dec(*v)?,
            Stmt::Halt if k >= live => {}
            Stmt::Halt => em.goto(END),
        }
    }
    for l in &p.trailing {
        em.define(l)?;
    }
    let m = em.out.len();
    let resolve = |l: &str| -> Result<u32, GotoError> {
        if l == END {
            return Ok(m as u32);
        }
        em.labels.get(l).map(|&i| i as u32).ok_or_else(|| GotoError::UndefinedLabel(l.to_string()))
    };
    let actions = em
        .out
        .iter()
        .map(|r| {
            Ok(match r {
                Raw::Inc(v) => Action::Inc(*v),
                Raw::Reset(v) => Action::Reset(*v),
                Raw::Eq(a, b, l) => Action::GotoIfEq(*a, *b, resolve(l)?),
            })
        })
        .collect::<Result<Vec<_>, GotoError>>()?;
    let g = GotoProgram { vars: em.next_var, actions };
    g.validate()?;
    Ok(g)
}

/// Theory for the number encoding conjoined to a GOTO encoding.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Theory {
    /// Uninterpreted functions.
    Tu,
    /// Equality.
    Te,
}

/// Forces `z()`, `f` and `eq` to behave like zero, successor and equality, over cells
/// `e`, `x` and `b`.
pub fn encode_num_tu() -> String {
    let first = "[e <- z()] && X G ([e <- f(e)] && eq(e, e))";
    let eq = "(eq(x, b) -> [x <- z()] && [b <- f(b)] && !eq(b, f(b)) && !eq(f(b), b))";
    let neq = "(!eq(x, b) -> [x <- f(x)] && [b <- b] && !eq(x, f(b)) && !eq(f(b), x))";
    format!("({first}) && ([x <- z()] && [b <- z()] && X G ({eq} && {neq}))")
}

/// Forces `f^a(z())` and `f^b(z())` apart for `a != b` under equality, over cell `e`.
/// The update `[e <- f(z())]` is kept exactly as published.
pub fn encode_enc_te() -> String {
    "[e <- z()] && X G ([e <- f(z())] && eq(e, g(f(e))) && !eq(f(e), z()))".to_string()
}

fn stutter(g: &GotoProgram, except: Option<u32>) -> Vec<String> {
    (0..g.vars).filter(|&v| Some(v) != except).map(|v| format!("[v{v} <- v{v}]")).collect()
}

/// A formula satisfiable in the theory iff the program terminates on every input.
pub fn encode_goto(g: &GotoProgram, theory: Theory) -> Result<String, GotoError> {
    g.validate()?;
    let m = g.halt();
    let mut parts = Vec::new();
    // Location constants are pairwise distinguishable.
    let mut distinct = Vec::new();
    for a in 0..=m {
        distinct.push(format!("p{a}(l{a}())"));
        for b in (0..=m).filter(|&b| b != a) {
            distinct.push(format!("!p{a}(l{b}())"));
        }
    }
    parts.push(distinct.join(" && "));
    // One simulation step per non-terminating location.
    let mut steps = Vec::new();
    for (k, a) in g.actions.iter().enumerate() {
        let next = k + 1;
        let body = match *a {
            Action::Inc(j) => {
                let mut c = vec![format!("[l <- l{next}()]"), format!("[v{j} <- f(v{j})]")];
                c.extend(stutter(g, Some(j)));
                c.join(" && ")
            }
            Action::Reset(j) => {
                let mut c = vec![format!("[l <- l{next}()]"), format!("[v{j} <- z()]")];
                c.extend(stutter(g, Some(j)));
                c.join(" && ")
            }
            Action::GotoIfEq(i, j, t) => {
                let mut c = vec![
                    format!("(!eq(v{i}, v{j}) -> [l <- l{next}()])"),
                    format!("(eq(v{i}, v{j}) -> [l <- l{t}()])"),
                ];
                c.extend(stutter(g, None));
                c.join(" && ")
            }
        };
        steps.push(format!("(p{k}(l) -> [i <- i] && {body})"));
    }
    parts.push(if steps.is_empty() { "true".to_string() } else { format!("X G ({})", steps.join(" && ")) });
    // Restart on the next input.
    let mut restart = vec!["[i <- f(i)]".to_string(), "[l <- l0()]".to_string(), "[v0 <- i]".to_string()];
    restart.extend((1..g.vars).map(|v| format!("[v{v} <- z()]")));
    parts.push(format!("X G (p{m}(l) -> {})", restart.join(" && ")));
    parts.push(format!("[i <- z()] && [l <- l{m}()]"));
    parts.push(format!("G F p{m}(l)"));
    let num = match theory {
        Theory::Tu => encode_num_tu(),
        Theory::Te => encode_enc_te(),
    };
    let mut out = format!("({num})");
    for p in parts {
        out.push_str(&format!("\n&& ({p})"));
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::parse_formula;

    fn reduced(text: &str) -> GotoProgram {
        desugar_goto(&parse_goto(text).unwrap()).unwrap()
    }

    /// Runs a reduced program; `None` if it exceeds `fuel` steps.
    fn run(g: &GotoProgram, input: u64, fuel: usize) -> Option<Vec<u64>> {
        let mut v = vec![0u64; g.vars as usize];
        v[0] = input;
        let mut pc = 0u32;
        for _ in 0..fuel {
            if pc == g.halt() {
                return Some(v);
            }
            pc = match g.actions[pc as usize] {
                Action::Inc(j) => {
                    v[j as usize] += 1;
                    pc + 1
                }
                Action::Reset(j) => {
                    v[j as usize] = 0;
                    pc + 1
                }
                Action::GotoIfEq(a, b, t) => {
                    if v[a as usize] == v[b as usize] {
                        t
                    } else {
                        pc + 1
                    }
                }
            };
        }
        None
    }

    #[test]
    fn goto_gadget() {
        let g = reduced("GOTO l\nINC v1\nl: HALT");
        assert_eq!(g.actions, vec![Action::Reset(2), Action::GotoIfEq(2, 2, 3), Action::Inc(1)]);
        assert_eq!(run(&g, 5, 100).unwrap()[1], 0);
    }

    #[test]
    fn halt_only_is_unchanged() {
        let g = reduced("HALT");
        assert_eq!(g, GotoProgram { vars: 1, actions: vec![] });
    }

    #[test]
    fn reduced_is_unchanged() {
        let g = reduced("l0: INC v1\nl1: GOTOEQ v1 v0 l3\nl2: RESET v2\nl3:");
        assert_eq!(g.actions, vec![Action::Inc(1), Action::GotoIfEq(1, 0, 3), Action::Reset(2)]);
    }

    #[test]
    fn assign_and_dec_semantics() {
        let g = reduced("ASSIGN v1 v0\nDEC v1\nDEC v1");
        for input in 0..6 {
            let v = run(&g, input, 10_000).unwrap();
            assert_eq!(v[1], input.saturating_sub(2), "input {input}");
            assert_eq!(v[0], input);
        }
        let a = reduced("ASSIGN v1 v0");
        assert_eq!(a.actions[0], Action::Reset(1));
        assert_eq!(a.actions[1], Action::GotoIfEq(1, 0, 5));
    }

    #[test]
    fn errors() {
        assert_eq!(desugar_goto(&parse_goto("GOTO nowhere").unwrap()), Err(GotoError::UndefinedLabel("nowhere".into())));
        assert!(matches!(parse_goto("JUMP v1"), Err(GotoError::Syntax(1, _))));
        assert!(matches!(parse_goto("INC x"), Err(GotoError::Syntax(1, _))));
        let bad = GotoProgram { vars: 1, actions: vec![Action::Inc(3)] };
        assert!(encode_goto(&bad, Theory::Tu).is_err());
    }

    #[test]
    fn encoding_shape() {
        let g = reduced("l: INC v1\nGOTOEQ v1 v0 end\nGOTO l\nend:");
        let m = g.halt();
        for th in [Theory::Tu, Theory::Te] {
            let s = encode_goto(&g, th).unwrap();
            assert_eq!(s.matches(&format!("[i <- z()] && [l <- l{m}()]")).count(), 1);
            assert_eq!(s.matches(&format!("G F p{m}(l)")).count(), 1);
            assert_eq!(s.matches("-> [i <- i]").count(), m as usize);
            let p = parse_formula(&s, None).unwrap();
            let consts = (0..=m).filter(|a| p.signature.functions.get(&format!("l{a}")) == Some(&0)).count();
            let preds = (0..=m).filter(|a| p.signature.predicates.get(&format!("p{a}")) == Some(&1)).count();
            assert_eq!((consts, preds), (m as usize + 1, m as usize + 1));
        }
    }

    #[test]
    fn number_encodings() {
        let num = parse_formula(&encode_num_tu(), None).unwrap();
        let mut cells = num.signature.cells.clone();
        cells.sort();
        assert_eq!(cells, ["b", "e", "x"]);
        assert_eq!(num.formula.conjuncts().len(), 2 + 2 + 1);
        assert!(encode_num_tu().contains("(eq(x, b) -> "));
        let enc = parse_formula(&encode_enc_te(), None).unwrap();
        assert_eq!(enc.signature.cells, ["e"]);
        assert!(encode_enc_te().contains("!eq(f(e), z())"));
        assert_eq!(enc.signature.functions.get("g"), Some(&1));
        assert_eq!(enc.signature.functions.get("z"), Some(&0));
    }
}
