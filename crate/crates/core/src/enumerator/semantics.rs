//! Exact membership constraints for examples.
//!
//! An atom `A(col, node, s)` states that the subtree rooted at `node` in
//! column `col` accepts `s`. For every value the node may take, the atom is
//! tied to the atoms of the node's children by the semantics of that
//! production, so the atoms of a fully assigned tree are determined by the
//! assignment. An example is accepted when some split of it into column
//! pieces has every piece accepted, which is encoded as reachability over
//! split points.

use super::{ColumnSpec, Enumerator, L};
use crate::dsl::{Op, Production};
use crate::solver::{SolverError, Term};

impl Enumerator {
    /// Requires every later program to accept (`accept`) or reject `example`.
    pub fn add_example(&mut self, example: &str, accept: bool) -> Result<(), SolverError> {
        let chars: Vec<char> = example.chars().collect();
        match self.example_lit(&chars)? {
            L::Const(b) if b == accept => Ok(()),
            L::Const(_) => self.backend.assert(&Term::False),
            L::Var(v) => {
                let t = Term::Bool(v);
                self.backend.assert(&if accept { t } else { Term::not(t) })
            }
        }
    }

    fn example_lit(&mut self, x: &[char]) -> Result<L, SolverError> {
        let n = x.len();
        let cols = self.layout.columns.len();
        let mut reach = vec![L::Const(false); n + 1];
        reach[0] = L::Const(true);
        for col in 0..cols {
            let last = col + 1 == cols;
            let mut next = vec![L::Const(false); n + 1];
            for p in 0..=n {
                if last && p != n {
                    continue;
                }
                let mut parts = Vec::new();
                for q in 0..=p {
                    if reach[q] == L::Const(false) {
                        continue;
                    }
                    let piece = &x[q..p];
                    let acc = match &self.layout.columns[col] {
                        ColumnSpec::Fixed(d) => L::Const(d.chars().eq(piece.iter().copied())),
                        ColumnSpec::Tree(_) => self.atom(col, 1, piece)?,
                    };
                    parts.push(self.and2(reach[q], acc)?);
                }
                next[p] = self.or_def(parts)?;
            }
            reach = next;
        }
        Ok(reach[n])
    }

    fn clause(&mut self, lits: Vec<Term>) -> Result<(), SolverError> {
        self.backend.assert(&Term::Or(lits))
    }

    /// `guards -> (a <-> OR parts)`.
    fn define(&mut self, guards: &[Term], a: L, parts: Vec<L>) -> Result<(), SolverError> {
        let negs: Vec<Term> = guards.iter().cloned().map(Term::not).collect();
        let with = |extra: Vec<Term>| negs.iter().cloned().chain(extra).collect::<Vec<_>>();
        if parts.contains(&L::Const(true)) {
            return self.clause(with(vec![a.term()]));
        }
        let vars: Vec<Term> = parts.into_iter().filter(|p| *p != L::Const(false)).map(L::term).collect();
        let mut first = vec![Term::not(a.term())];
        first.extend(vars.iter().cloned());
        self.clause(with(first))?;
        for v in vars {
            self.clause(with(vec![Term::not(v), a.term()]))?;
        }
        Ok(())
    }

    fn fresh(&mut self) -> L {
        L::Var(self.backend.new_bool("s"))
    }

    fn and2(&mut self, a: L, b: L) -> Result<L, SolverError> {
        match (a, b) {
            (L::Const(false), _) | (_, L::Const(false)) => Ok(L::Const(false)),
            (L::Const(true), x) | (x, L::Const(true)) => Ok(x),
            (L::Var(x), L::Var(y)) => {
                let key = (x.min(y), x.max(y));
                if let Some(&g) = self.cache.ands.get(&key) {
                    return Ok(g);
                }
                let g = self.fresh();
                self.clause(vec![Term::not(g.term()), a.term()])?;
                self.clause(vec![Term::not(g.term()), b.term()])?;
                self.clause(vec![Term::not(a.term()), Term::not(b.term()), g.term()])?;
                self.cache.ands.insert(key, g);
                Ok(g)
            }
        }
    }

    fn or_def(&mut self, parts: Vec<L>) -> Result<L, SolverError> {
        if parts.contains(&L::Const(true)) {
            return Ok(L::Const(true));
        }
        let mut vars: Vec<L> = parts.into_iter().filter(|p| *p != L::Const(false)).collect();
        vars.dedup();
        match vars.len() {
            0 => Ok(L::Const(false)),
            1 => Ok(vars[0]),
            _ => {
                let g = self.fresh();
                self.define(&[], g, vars)?;
                Ok(g)
            }
        }
    }

    /// Whether some terminal of the column's grammar matches `c`.
    fn covers(&self, col: usize, c: char) -> bool {
        let dsl = self.dsl(col);
        dsl.literals.contains(&c) || dsl.classes.iter().any(|k| k.contains(c))
    }

    fn atom(&mut self, col: usize, node: u32, s: &[char]) -> Result<L, SolverError> {
        let key = (col, node, s.iter().collect::<String>());
        if let Some(&a) = self.cache.atoms.get(&key) {
            return Ok(a);
        }
        if s.iter().any(|&c| !self.covers(col, c)) {
            self.cache.atoms.insert(key, L::Const(false));
            return Ok(L::Const(false));
        }
        let a = self.fresh();
        self.cache.atoms.insert(key, a);
        let (left, right) = (2 * node, 2 * node + 1);
        for v in self.domain(col, node) {
            let x = self.eq(col, node, v);
            let parts = match self.dsl(col).production(v) {
                Production::Epsilon | Production::Range(_) => continue,
                Production::Literal(c) => vec![L::Const(s == [c])],
                Production::Class(k) => vec![L::Const(s.len() == 1 && k.contains(s[0]))],
                Production::Op(Op::Union) => vec![self.atom(col, left, s)?, self.atom(col, right, s)?],
                Production::Op(Op::Concat) => {
                    let mut parts = Vec::with_capacity(s.len() + 1);
                    for i in 0..=s.len() {
                        let l = self.atom(col, left, &s[..i])?;
                        if l == L::Const(false) {
                            continue;
                        }
                        let r = self.atom(col, right, &s[i..])?;
                        parts.push(self.and2(l, r)?);
                    }
                    parts
                }
                Production::Op(Op::Option) => vec![L::Const(s.is_empty()), self.atom(col, left, s)?],
                Production::Op(Op::Kleene) if s.is_empty() => vec![L::Const(true)],
                Production::Op(Op::Plus) if s.is_empty() => vec![self.atom(col, left, s)?],
                Production::Op(op @ (Op::Kleene | Op::Plus)) => {
                    // A non-empty first piece followed by the rest under the
                    // same operator; `+` also accepts a single piece.
                    let mut parts = Vec::new();
                    if op == Op::Plus {
                        parts.push(self.atom(col, left, s)?);
                    }
                    let end = if op == Op::Plus { s.len() - 1 } else { s.len() };
                    for i in 1..=end {
                        let l = self.atom(col, left, &s[..i])?;
                        if l == L::Const(false) {
                            continue;
                        }
                        let r = self.atom(col, node, &s[i..])?;
                        parts.push(self.and2(l, r)?);
                    }
                    parts
                }
                Production::Op(Op::Range) => {
                    for w in self.domain(col, right) {
                        let Production::Range(lit) = self.dsl(col).production(w) else { continue };
                        let y = self.eq(col, right, w);
                        let mut parts = Vec::new();
                        for k in lit.lo()..=lit.hi() {
                            parts.push(self.count(col, node, k, s)?);
                        }
                        self.define(&[x.clone(), y], a, parts)?;
                    }
                    continue;
                }
            };
            self.define(&[x], a, parts)?;
        }
        Ok(a)
    }

    /// `s` is the concatenation of exactly `k` strings accepted by the left
    /// child of `node`.
    fn count(&mut self, col: usize, node: u32, k: u32, s: &[char]) -> Result<L, SolverError> {
        match k {
            0 => return Ok(L::Const(s.is_empty())),
            1 => return self.atom(col, 2 * node, s),
            _ => {}
        }
        let key = (col, node, k, s.iter().collect::<String>());
        if let Some(&c) = self.cache.counts.get(&key) {
            return Ok(c);
        }
        let mut parts = Vec::with_capacity(s.len() + 1);
        for i in 0..=s.len() {
            let l = self.atom(col, 2 * node, &s[..i])?;
            if l == L::Const(false) {
                continue;
            }
            let r = self.count(col, node, k - 1, &s[i..])?;
            parts.push(self.and2(l, r)?);
        }
        let c = self.or_def(parts)?;
        self.cache.counts.insert(key, c);
        Ok(c)
    }
}
