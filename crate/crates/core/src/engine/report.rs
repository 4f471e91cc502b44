//! Text and JSON renderings of a verdict.

use std::fmt::Write as _;

use serde_json::{json, Value};

use super::{Outcome, Prepared, Verdict};

pub fn outcome_line(v: &Verdict) -> String {
    match &v.outcome {
        Outcome::Sat(_) => "SAT".into(),
        Outcome::Unsat(_) => "UNSAT".into(),
        Outcome::Unknown(r) => format!("UNKNOWN({r})"),
    }
}

pub fn render_text(v: &Verdict, prep: Option<&Prepared>) -> String {
    let mut s = outcome_line(v);
    s.push('\n');
    if let (Outcome::Sat(w), Some(p)) = (&v.outcome, prep) {
        let arena = &*p.problem.arena;
        for (name, lines) in [("pref", w.pref_lines(arena, &p.bsa)), ("rec", w.rec_lines(arena, &p.bsa))] {
            if lines.is_empty() {
                let _ = writeln!(s, "{name}: (empty)");
            } else {
                let _ = writeln!(s, "{name}:");
                for l in lines {
                    let _ = writeln!(s, "  {l}");
                }
            }
        }
        let _ = writeln!(s, "query: {}", w.query.show(arena).join(", "));
        let _ = writeln!(s, "model:");
        for c in &w.model.classes {
            let _ = writeln!(s, "  {}", c.join(" = "));
        }
        for (p, b) in &w.model.predicates {
            let _ = writeln!(s, "  {p} = {b}");
        }
    }
    s
}

pub fn render_json(v: &Verdict, prep: Option<&Prepared>) -> Value {
    let mut o = json!({
        "outcome": v.outcome.label(),
        "stats": serde_json::to_value(&v.stats).expect("stats serialize"),
    });
    match &v.outcome {
        Outcome::Unsat(r) => o["unsat_by"] = serde_json::to_value(r).unwrap(),
        Outcome::Unknown(r) => o["reason"] = Value::String(r.to_string()),
        Outcome::Sat(w) => {
            if let Some(p) = prep {
                let arena = &*p.problem.arena;
                o["witness"] = json!({
                    "pref": w.pref_lines(arena, &p.bsa),
                    "rec": w.rec_lines(arena, &p.bsa),
                    "query": w.query.show(arena),
                });
            }
            let preds: serde_json::Map<String, Value> =
                w.model.predicates.iter().map(|(k, b)| (k.clone(), Value::Bool(*b))).collect();
            o["model"] = json!({ "classes": w.model.classes, "predicates": preds });
        }
    }
    o
}
