//! Import of externally produced Büchi automata in HOA v1 format.
//!
//! AP names must use the printer's encoding of the universe (`p(x)`, `[x <- f(x)]`).
//! Transition-based marks are accepted; such automata are converted to state-based
//! acceptance by tracking whether the last edge carried the mark.

use hoars::{AbstractLabelExpression, AcceptanceAtom, AcceptanceCondition, HeaderItem, HoaAutomaton, HoaBool};

use super::nba::{Nba, NbaEdge};
use super::prop::Prop;
use super::AutomataError;
use crate::ltl::ApUniverse;
use crate::term::TermArena;

fn err(msg: impl Into<String>) -> AutomataError {
    AutomataError::Hoa(msg.into())
}

fn label_prop(e: &AbstractLabelExpression, map: &[Option<usize>]) -> Result<Prop, AutomataError> {
    Ok(match e {
        AbstractLabelExpression::Boolean(true) => Prop::True,
        AbstractLabelExpression::Boolean(false) => Prop::False,
        AbstractLabelExpression::Integer(i) => {
            let ap = map
                .get(*i as usize)
                .ok_or_else(|| err(format!("AP index {i} out of range")))?
                .ok_or_else(|| err(format!("AP {i} is not in the universe")))?;
            Prop::Lit(ap, true)
        }
        AbstractLabelExpression::Negated(x) => match label_prop(x, map)? {
            Prop::True => Prop::False,
            Prop::False => Prop::True,
            Prop::Lit(a, v) => Prop::Lit(a, !v),
            other => negate(other),
        },
        AbstractLabelExpression::Conjunction(xs) => Prop::and(xs.iter().map(|x| label_prop(x, map)).collect::<Result<_, _>>()?),
        AbstractLabelExpression::Disjunction(xs) => Prop::or(xs.iter().map(|x| label_prop(x, map)).collect::<Result<_, _>>()?),
    })
}

fn negate(p: Prop) -> Prop {
    match p {
        Prop::True => Prop::False,
        Prop::False => Prop::True,
        Prop::Lit(a, v) => Prop::Lit(a, !v),
        Prop::And(xs) => Prop::or(xs.into_iter().map(negate).collect()),
        Prop::Or(xs) => Prop::and(xs.into_iter().map(negate).collect()),
    }
}

/// Which acceptance set is the Büchi set; `None` means every run is accepting.
fn buchi_set(cond: &AcceptanceCondition) -> Result<Option<u32>, AutomataError> {
    match cond {
        AcceptanceCondition::Inf(AcceptanceAtom::Positive(k)) => Ok(Some(*k)),
        AcceptanceCondition::Boolean(HoaBool(true)) => Ok(None),
        other => Err(err(format!("unsupported acceptance condition {other:?}"))),
    }
}

/// Parses `text` into an NBA over `universe`.
pub fn nba_from_hoa(text: &str, universe: &ApUniverse, arena: &TermArena) -> Result<Nba, AutomataError> {
    let aut = HoaAutomaton::try_from(text).map_err(|e| err(e.to_string()))?;
    let mut num_states = None;
    let mut initial = Vec::new();
    let mut names: Vec<String> = Vec::new();
    let mut acc_set = None;
    for item in aut.header() {
        match item {
            HeaderItem::States(n) => num_states = Some(*n as usize),
            HeaderItem::Start(conj) => {
                initial.push(conj.get_singleton().ok_or_else(|| err("alternating start states are not supported"))?)
            }
            HeaderItem::AP(aps) => names = aps.clone(),
            HeaderItem::Acceptance(_, cond) => acc_set = Some(buchi_set(cond)?),
            _ => {}
        }
    }
    let acc_set = acc_set.ok_or_else(|| err("missing Acceptance header"))?;
    let shown: Vec<String> = (0..universe.len()).map(|i| universe.show(arena, i)).collect();
    let map: Vec<Option<usize>> = names.iter().map(|n| shown.iter().position(|s| s == n)).collect();
    if let Some(i) = map.iter().position(Option::is_none) {
        return Err(err(format!("AP \"{}\" is not in the universe", names[i])));
    }
    let n = num_states.unwrap_or_else(|| aut.body().iter().map(|s| s.id() as usize + 1).max().unwrap_or(0));
    // (src, dst, label, marked)
    let mut raw = Vec::new();
    for st in aut.body().iter() {
        let src = st.id();
        if src as usize >= n {
            return Err(err(format!("state {src} out of range")));
        }
        for e in st.edges() {
            let dst = e.target().ok_or_else(|| err("alternating transitions are not supported"))?;
            if dst as usize >= n {
                return Err(err(format!("state {dst} out of range")));
            }
            let marked = match acc_set {
                None => true,
                Some(k) => e.acceptance_signature().contains(&k),
            };
            raw.push((src, dst, label_prop(&e.label().0, &map)?, marked));
        }
    }
    // State-based if all edges leaving a state agree on the mark.
    let mut state_mark: Vec<Option<bool>> = vec![None; n];
    let mut state_based = true;
    for &(s, _, _, m) in &raw {
        match state_mark[s as usize] {
            None => state_mark[s as usize] = Some(m),
            Some(x) if x != m => state_based = false,
            _ => {}
        }
    }
    let mut edges = Vec::new();
    let nba = if state_based {
        for (s, d, p, _) in raw {
            for label in p.cover() {
                edges.push(NbaEdge { src: s, dst: d, label });
            }
        }
        let accepting = state_mark.iter().map(|m| m.unwrap_or(false)).collect();
        Nba::new(n, initial, accepting, edges, Prop::True, universe.len())
    } else {
        // State (q, b) is 2q + b; b records whether the edge into q was marked.
        for (s, d, p, m) in raw {
            let cubes = p.cover();
            for b in 0..2u32 {
                for label in &cubes {
                    edges.push(NbaEdge { src: 2 * s + b, dst: 2 * d + m as u32, label: label.clone() });
                }
            }
        }
        let accepting = (0..2 * n).map(|v| v % 2 == 1).collect();
        Nba::new(2 * n, initial.iter().map(|&i| 2 * i).collect(), accepting, edges, Prop::True, universe.len())
    };
    Ok(nba.trimmed())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::bits::Bits;
    use crate::ltl::{approximate, Mode};
    use crate::parser::parse_formula;

    fn all_letters(n: usize) -> Vec<Bits> {
        (0..1usize << n).map(|m| (0..n).filter(|i| m >> i & 1 == 1).collect()).collect()
    }

    #[test]
    fn roundtrip_through_hoa() {
        let p = parse_formula("G [x <- f(x)] && G F (p(x) && X !p(x))", None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let nba = crate::automata::ltl_to_nba(&a.ltl, a.universe.len()).unwrap();
        let text = nba.to_hoa(&a.universe, &p.arena);
        let back = nba_from_hoa(&text, &a.universe, &p.arena).unwrap();
        let letters = all_letters(a.universe.len());
        for s in &letters {
            for l1 in &letters {
                for l2 in &letters {
                    let lp = [l1.clone(), l2.clone()];
                    let stem = [s.clone()];
                    assert_eq!(nba.accepts_lasso(&stem, &lp), back.accepts_lasso(&stem, &lp));
                }
            }
        }
    }

    #[test]
    fn transition_based_marks() {
        let p = parse_formula("G F a()", None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"a()\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0\n[0] 0 {0}\n[!0] 0\n--END--\n";
        let nba = nba_from_hoa(text, &a.universe, &p.arena).unwrap();
        let on: Bits = [0usize].into_iter().collect();
        let off = Bits::with_len(1);
        assert!(nba.accepts_lasso(&[], &[on.clone(), off.clone()]));
        assert!(!nba.accepts_lasso(&[on], &[off]));
    }

    #[test]
    fn unknown_ap_is_rejected() {
        let p = parse_formula("G F a()", None).unwrap();
        let a = approximate(&p, Mode::Finitary);
        let text = "HOA: v1\nStates: 1\nStart: 0\nAP: 1 \"b()\"\nAcceptance: 1 Inf(0)\n--BODY--\nState: 0 {0}\n[0] 0\n--END--\n";
        assert!(matches!(nba_from_hoa(text, &a.universe, &p.arena), Err(AutomataError::Hoa(_))));
    }
}
