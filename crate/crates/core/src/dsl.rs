//! Problem-specific grammar of terminals and operators.

use std::fmt;

use thiserror::Error;

use crate::ast::{CharClass, RangeLit};

/// Operators of the grammar, in id order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Op {
    Union,
    Concat,
    Kleene,
    Plus,
    Option,
    Range,
}

impl Op {
    pub const ALL: [Op; 6] = [Op::Union, Op::Concat, Op::Kleene, Op::Plus, Op::Option, Op::Range];

    pub fn arity(self) -> usize {
        match self {
            Op::Union | Op::Concat | Op::Range => 2,
            Op::Kleene | Op::Plus | Op::Option => 1,
        }
    }

    /// Type of the parameter at `index`.
    pub fn param(self, index: usize) -> Option<Ty> {
        match (self, index) {
            (_, i) if i >= self.arity() => None,
            (Op::Range, 1) => Some(Ty::RangeLit),
            _ => Some(Ty::Re),
        }
    }

    pub fn is_quantifier(self) -> bool {
        matches!(self, Op::Kleene | Op::Plus | Op::Option | Op::Range)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Ty {
    Re,
    RangeLit,
}

/// A grammar production: a terminal, an operator, or the empty marker
/// used for unused tree nodes.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Production {
    Epsilon,
    Literal(char),
    Class(CharClass),
    Range(RangeLit),
    Op(Op),
}

impl Production {
    /// Output type; `None` for the empty marker.
    pub fn ty(self) -> Option<Ty> {
        match self {
            Production::Epsilon => None,
            Production::Literal(_) | Production::Class(_) | Production::Op(_) => Some(Ty::Re),
            Production::Range(_) => Some(Ty::RangeLit),
        }
    }

    pub fn arity(self) -> usize {
        match self {
            Production::Op(op) => op.arity(),
            _ => 0,
        }
    }
}

impl fmt::Display for Production {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Production::Epsilon => f.write_str("ε"),
            Production::Literal(c) => write!(f, "{c:?}"),
            Production::Class(k) => write!(f, "{k}"),
            Production::Range(r) => write!(f, "{r}"),
            Production::Op(op) => write!(f, "{op:?}"),
        }
    }
}

#[derive(Debug, Error, PartialEq, Eq)]
pub enum DslError {
    #[error("no non-empty valid strings to build a grammar from")]
    NoStrings,
}

/// Terminals and operators for one problem, with a fixed id for each.
///
/// Ids follow the order: ε (0), literals by code point, classes in family
/// order, exact range literals ascending, between range literals in
/// lexicographic order, then operators.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DslSpec {
    productions: Vec<Production>,
    /// Length in characters of the longest string the grammar was built from.
    pub max_len: usize,
    pub literals: Vec<char>,
    pub classes: Vec<CharClass>,
    pub range_literals: Vec<RangeLit>,
    pub ops: Vec<Op>,
}

impl DslSpec {
    pub fn productions(&self) -> &[Production] {
        &self.productions
    }

    pub fn len(&self) -> usize {
        self.productions.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn production(&self, id: u32) -> Production {
        self.productions[id as usize]
    }

    pub fn id(&self, p: Production) -> Option<u32> {
        self.productions.iter().position(|&q| q == p).map(|i| i as u32)
    }

    pub fn op_id(&self, op: Op) -> Option<u32> {
        self.id(Production::Op(op))
    }

    /// Ids of productions whose output type is `ty`.
    pub fn ids_of_type(&self, ty: Ty) -> Vec<u32> {
        self.ids_where(|p| p.ty() == Some(ty))
    }

    /// Ids of Re-typed terminals: literals and classes.
    pub fn re_terminals(&self) -> Vec<u32> {
        self.ids_where(|p| matches!(p, Production::Literal(_) | Production::Class(_)))
    }

    pub fn range_ids(&self) -> Vec<u32> {
        self.ids_where(|p| matches!(p, Production::Range(_)))
    }

    pub fn ids_where(&self, f: impl Fn(Production) -> bool) -> Vec<u32> {
        (0..self.productions.len() as u32).filter(|&i| f(self.productions[i as usize])).collect()
    }

    /// Copy with only the given operators.
    pub fn with_ops(&self, ops: &[Op]) -> DslSpec {
        assemble(
            self.literals.clone(),
            self.classes.clone(),
            self.range_literals.clone(),
            Op::ALL.into_iter().filter(|o| ops.contains(o) && self.ops.contains(o)).collect(),
            self.max_len,
        )
    }

    /// Grammar with explicitly chosen terminals; used by tests and tools.
    pub fn custom(literals: Vec<char>, classes: Vec<CharClass>, range_literals: Vec<RangeLit>, ops: Vec<Op>) -> Self {
        let max_len = range_literals.iter().map(|r| r.hi() as usize).max().unwrap_or(1);
        assemble(literals, classes, range_literals, ops, max_len)
    }
}

fn assemble(
    mut literals: Vec<char>,
    classes: Vec<CharClass>,
    mut range_literals: Vec<RangeLit>,
    ops: Vec<Op>,
    max_len: usize,
) -> DslSpec {
    literals.sort_unstable();
    literals.dedup();
    let classes: Vec<CharClass> = CharClass::FAMILY.into_iter().filter(|c| classes.contains(c)).collect();
    range_literals.sort_unstable();
    range_literals.dedup();
    let ops: Vec<Op> = Op::ALL.into_iter().filter(|o| ops.contains(o)).collect();
    let mut productions = vec![Production::Epsilon];
    productions.extend(literals.iter().map(|&c| Production::Literal(c)));
    productions.extend(classes.iter().map(|&c| Production::Class(c)));
    productions.extend(range_literals.iter().map(|&r| Production::Range(r)));
    productions.extend(ops.iter().map(|&o| Production::Op(o)));
    DslSpec { productions, max_len, literals, classes, range_literals, ops }
}

/// Builds the grammar for a set of strings. Empty strings are ignored.
pub fn build_dsl<S: AsRef<str>>(strings: &[S]) -> Result<DslSpec, DslError> {
    let mut literals: Vec<char> = strings.iter().flat_map(|s| s.as_ref().chars()).collect();
    literals.sort_unstable();
    literals.dedup();
    let max_len = strings.iter().map(|s| s.as_ref().chars().count()).max().unwrap_or(0);
    if max_len == 0 {
        return Err(DslError::NoStrings);
    }
    let classes = CharClass::FAMILY
        .into_iter()
        .filter(|k| literals.iter().any(|&c| k.contains(c)))
        .collect();
    let l = max_len as u32;
    let mut range_literals: Vec<RangeLit> = (2..=l).map(RangeLit::Exact).collect();
    for m in 0..l {
        for n in m + 1..=l {
            if (m, n) != (0, 1) {
                range_literals.push(RangeLit::Between(m, n));
            }
        }
    }
    let ops = Op::ALL.into_iter().filter(|&o| o != Op::Range || l > 1).collect();
    Ok(assemble(literals, classes, range_literals, ops, max_len))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_letter() {
        let dsl = build_dsl(&["a"]).unwrap();
        assert_eq!(dsl.literals, ['a']);
        assert_eq!(
            dsl.classes,
            [CharClass::Lower, CharClass::DigitLower, CharClass::Alpha, CharClass::Alnum, CharClass::HexLower]
        );
        assert!(dsl.range_literals.is_empty());
        assert!(!dsl.ops.contains(&Op::Range));
    }

    #[test]
    fn id_layout() {
        let dsl = build_dsl(&["ab", "b"]).unwrap();
        assert_eq!(dsl.production(0), Production::Epsilon);
        assert_eq!(dsl.production(1), Production::Literal('a'));
        assert_eq!(dsl.production(2), Production::Literal('b'));
        assert_eq!(dsl.production(3), Production::Class(CharClass::Lower));
        // l = 2: Exact(2), Between(0,2), Between(1,2)
        assert_eq!(dsl.range_literals, [RangeLit::Exact(2), RangeLit::Between(0, 2), RangeLit::Between(1, 2)]);
        assert_eq!(dsl.op_id(Op::Union), Some((dsl.len() - 6) as u32));
        for id in 0..dsl.len() as u32 {
            assert_eq!(dsl.id(dsl.production(id)), Some(id));
        }
    }

    #[test]
    fn empty_strings_ignored() {
        assert_eq!(build_dsl(&["", ""]), Err(DslError::NoStrings));
        assert_eq!(build_dsl(&["", "x"]).unwrap().max_len, 1);
    }
}
