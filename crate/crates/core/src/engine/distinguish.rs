//! Shortest strings separating two languages.

use std::collections::{HashMap, VecDeque};

use super::alphabet::SessionAlphabet;
use super::automaton::{Automaton, AutomatonError, Bits};
use crate::ast::Regex;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Distinction {
    /// Accepted by exactly one of the two expressions.
    Witness(String),
    Equivalent,
}

/// Shortest string over `alphabet` accepted by exactly one of `r1`, `r2`;
/// among the shortest, the smallest in symbol order.
pub fn distinguishing_input(
    r1: &Regex,
    r2: &Regex,
    alphabet: &SessionAlphabet,
) -> Result<Distinction, AutomatonError> {
    let a1 = Automaton::new(r1)?;
    let a2 = Automaton::new(r2)?;
    Ok(distinguish_automata(&a1, &a2, alphabet))
}

pub fn distinguish_automata(a1: &Automaton, a2: &Automaton, alphabet: &SessionAlphabet) -> Distinction {
    let symbols = alphabet.symbols();
    let masks1: Vec<Bits> = symbols.iter().map(|&c| a1.char_mask(c)).collect();
    let masks2: Vec<Bits> = symbols.iter().map(|&c| a2.char_mask(c)).collect();

    // Each visited product state remembers its parent and the symbol that
    // reached it, so the witness is rebuilt by walking back.
    let mut states: Vec<(Bits, Bits)> = Vec::new();
    let mut parent: Vec<Option<(usize, usize)>> = Vec::new();
    let mut index: HashMap<(Bits, Bits), usize> = HashMap::new();
    let mut queue = VecDeque::new();

    let start = (a1.start(), a2.start());
    index.insert(start.clone(), 0);
    states.push(start);
    parent.push(None);
    queue.push_back(0);

    let mut n1 = Bits::empty(a1.len());
    let mut n2 = Bits::empty(a2.len());
    while let Some(id) = queue.pop_front() {
        let (s1, s2) = &states[id];
        if a1.is_accepting(s1) != a2.is_accepting(s2) {
            let mut out = Vec::new();
            let mut cur = id;
            while let Some((p, sym)) = parent[cur] {
                out.push(symbols[sym]);
                cur = p;
            }
            out.reverse();
            return Distinction::Witness(out.into_iter().collect());
        }
        let (s1, s2) = (s1.clone(), s2.clone());
        for sym in 0..symbols.len() {
            a1.step_masked(&s1, &masks1[sym], &mut n1);
            a2.step_masked(&s2, &masks2[sym], &mut n2);
            // Both dead: nothing reachable from here can be accepted.
            if n1.is_empty() && n2.is_empty() {
                continue;
            }
            let key = (n1.clone(), n2.clone());
            if index.contains_key(&key) {
                continue;
            }
            let nid = states.len();
            index.insert(key.clone(), nid);
            states.push(key);
            parent.push(Some((id, sym)));
            queue.push_back(nid);
        }
    }
    Distinction::Equivalent
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::engine::parse;

    fn dist(a: &str, b: &str, examples: &str) -> Distinction {
        let (ra, rb) = (parse(a).unwrap(), parse(b).unwrap());
        let alpha = SessionAlphabet::for_session([examples], &[&ra, &rb]);
        distinguishing_input(&ra, &rb, &alpha).unwrap()
    }

    #[test]
    fn literal_vs_union() {
        assert_eq!(dist("a", "a|b", "a"), Distinction::Witness("b".into()));
    }

    #[test]
    fn reflexive() {
        let d = "[0-9]{2}/[0-9]{2}/[0-9]{4}";
        assert_eq!(dist(d, d, "19/08/1996"), Distinction::Equivalent);
    }

    #[test]
    fn year_width() {
        let Distinction::Witness(w) =
            dist("[0-9]{2}/[0-9]{2}/[0-9]{4}", "[0-9]{2}/[0-9]{2}/[0-9]{2,4}", "19/08/1996")
        else {
            panic!("expected a witness")
        };
        assert_eq!(w.len(), 8);
        assert_eq!(w, "00/00/00");
    }

    #[test]
    fn empty_string_witness() {
        assert_eq!(dist("a*", "a+", "a"), Distinction::Witness(String::new()));
    }

    #[test]
    fn equivalent_forms() {
        assert_eq!(dist("(?:a?)+", "a*", "a"), Distinction::Equivalent);
        assert_eq!(dist("(?:a{2}){3}", "a{6}", "a"), Distinction::Equivalent);
    }
}
