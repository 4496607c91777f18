//! Backend on the built-in SAT solver.
//!
//! Integers are one-hot: one boolean per domain value with exactly-one
//! constraints. Formulas are converted with memoized Tseitin definitions;
//! definitions are global (they only constrain their own auxiliary
//! variable), while asserted clauses are guarded by the selector literal of
//! the innermost scope.

use std::collections::HashMap;
use std::time::{Duration, Instant};

use super::sat::{Lit, Outcome, Solver};
use super::{Backend, BoolVar, IntVar, SatResult, SolverError, Term};

struct IntInfo {
    values: Vec<i64>,
    lits: Vec<Lit>,
}

pub struct NativeBackend {
    sat: Solver,
    bools: Vec<Lit>,
    ints: Vec<IntInfo>,
    memo: HashMap<Term, Lit>,
    true_lit: Lit,
    scopes: Vec<Lit>,
    softs: Vec<(usize, Term)>,
    timeout: Duration,
    has_model: bool,
}

impl Default for NativeBackend {
    fn default() -> Self {
        Self::new()
    }
}

impl NativeBackend {
    pub fn new() -> Self {
        let mut sat = Solver::new();
        let t = Lit::pos(sat.new_var(true));
        sat.add_clause(&[t]);
        NativeBackend {
            sat,
            bools: Vec::new(),
            ints: Vec::new(),
            memo: HashMap::new(),
            true_lit: t,
            scopes: Vec::new(),
            softs: Vec::new(),
            timeout: super::DEFAULT_CHECK_TIMEOUT,
            has_model: false,
        }
    }

    pub fn sat_stats(&self) -> super::sat::Stats {
        self.sat.stats
    }

    /// Literal for `v = k`; `None` if `k` is outside the domain.
    pub fn int_lit(&self, v: IntVar, k: i64) -> Option<Lit> {
        let info = &self.ints[v.0 as usize];
        info.values.iter().position(|&x| x == k).map(|i| info.lits[i])
    }

    pub fn bool_lit(&self, v: BoolVar) -> Lit {
        self.bools[v.0 as usize]
    }

    fn fresh(&mut self) -> Lit {
        Lit::pos(self.sat.new_var(false))
    }

    fn define(&mut self, clauses: &[Vec<Lit>]) {
        for c in clauses {
            self.sat.add_clause(c);
        }
    }

    /// Adds a clause in the current scope.
    pub fn add_scoped_clause(&mut self, mut lits: Vec<Lit>) {
        if let Some(&sel) = self.scopes.last() {
            lits.push(!sel);
        }
        self.sat.add_clause(&lits);
    }

    fn or_lit(&mut self, lits: Vec<Lit>) -> Lit {
        if lits.contains(&self.true_lit) {
            return self.true_lit;
        }
        let lits: Vec<Lit> = lits.into_iter().filter(|&l| l != !self.true_lit).collect();
        match lits.len() {
            0 => !self.true_lit,
            1 => lits[0],
            _ => {
                let o = self.fresh();
                let mut big = vec![!o];
                big.extend(&lits);
                let mut cs = vec![big];
                for &l in &lits {
                    cs.push(vec![o, !l]);
                }
                self.define(&cs);
                o
            }
        }
    }

    fn and_lit(&mut self, lits: Vec<Lit>) -> Lit {
        let negated = lits.into_iter().map(|l| !l).collect();
        !self.or_lit(negated)
    }

    /// Literal equivalent to `t`.
    pub fn lit(&mut self, t: &Term) -> Lit {
        match t {
            Term::True => return self.true_lit,
            Term::False => return !self.true_lit,
            Term::Bool(v) => return self.bools[v.0 as usize],
            Term::Not(x) => return !self.lit(x),
            Term::IntEq(v, k) => return self.int_lit(*v, *k).unwrap_or(!self.true_lit),
            _ => {}
        }
        if let Some(&l) = self.memo.get(t) {
            return l;
        }
        let l = match t {
            Term::And(xs) => {
                let ls = xs.iter().map(|x| self.lit(x)).collect();
                self.and_lit(ls)
            }
            Term::Or(xs) => {
                let ls = xs.iter().map(|x| self.lit(x)).collect();
                self.or_lit(ls)
            }
            Term::Implies(a, b) => {
                let (la, lb) = (self.lit(a), self.lit(b));
                self.or_lit(vec![!la, lb])
            }
            Term::Iff(a, b) => {
                let (la, lb) = (self.lit(a), self.lit(b));
                let e = self.fresh();
                self.define(&[vec![!e, !la, lb], vec![!e, la, !lb], vec![e, la, lb], vec![e, !la, !lb]]);
                e
            }
            Term::IntLe(v, k) | Term::IntGe(v, k) => {
                let le = matches!(t, Term::IntLe(..));
                let info = &self.ints[v.0 as usize];
                let ls = info
                    .values
                    .iter()
                    .zip(&info.lits)
                    .filter(|(&x, _)| if le { x <= *k } else { x >= *k })
                    .map(|(_, &l)| l)
                    .collect();
                self.or_lit(ls)
            }
            Term::VarEq(a, b) => {
                let pairs: Vec<(Lit, Option<Lit>)> = {
                    let ia = &self.ints[a.0 as usize];
                    ia.values.iter().zip(&ia.lits).map(|(&x, &l)| (l, self.int_lit(*b, x))).collect()
                };
                let ls = pairs
                    .into_iter()
                    .filter_map(|(la, lb)| lb.map(|lb| self.and_lit(vec![la, lb])))
                    .collect();
                self.or_lit(ls)
            }
            Term::AtLeast(xs, k) => {
                let ls: Vec<Lit> = xs.iter().map(|x| self.lit(x)).collect();
                self.at_least(&ls, *k)
            }
            Term::True | Term::False | Term::Bool(_) | Term::Not(_) | Term::IntEq(..) => unreachable!(),
        };
        self.memo.insert(t.clone(), l);
        l
    }

    /// Sequential counter: `s[j]` after input `i` holds iff at least `j + 1`
    /// of the first `i` inputs hold.
    fn at_least(&mut self, xs: &[Lit], k: usize) -> Lit {
        if k == 0 {
            return self.true_lit;
        }
        if k > xs.len() {
            return !self.true_lit;
        }
        let f = !self.true_lit;
        let mut prev: Vec<Lit> = vec![f; k];
        for &x in xs {
            let mut cur = Vec::with_capacity(k);
            for j in 0..k {
                let carry = if j == 0 { x } else { self.and_lit(vec![prev[j - 1], x]) };
                cur.push(self.or_lit(vec![prev[j], carry]));
            }
            prev = cur;
        }
        prev[k - 1]
    }

    /// Clause literals of a disjunctive term, flattening nested disjunctions.
    fn disjuncts(&mut self, t: &Term, out: &mut Vec<Lit>) {
        match t {
            Term::Or(xs) => xs.iter().for_each(|x| self.disjuncts(x, out)),
            Term::Implies(a, b) => {
                self.disjuncts(&Term::not((**a).clone()), out);
                self.disjuncts(b, out);
            }
            Term::Not(inner) => match &**inner {
                Term::And(xs) => xs.iter().for_each(|x| self.disjuncts(&Term::not(x.clone()), out)),
                Term::Not(x) => self.disjuncts(x, out),
                _ => out.push(self.lit(t)),
            },
            _ => out.push(self.lit(t)),
        }
    }

    fn assert_term(&mut self, t: &Term) {
        match t {
            Term::True => {}
            Term::And(xs) => xs.iter().for_each(|x| self.assert_term(x)),
            Term::Not(inner) if matches!(&**inner, Term::Or(_)) => {
                let Term::Or(xs) = &**inner else { unreachable!() };
                xs.iter().for_each(|x| self.assert_term(&Term::not(x.clone())));
            }
            _ => {
                let mut lits = Vec::new();
                self.disjuncts(t, &mut lits);
                self.add_scoped_clause(lits);
            }
        }
    }
}

impl Backend for NativeBackend {
    fn new_bool(&mut self, _name: &str) -> BoolVar {
        let l = self.fresh();
        self.bools.push(l);
        BoolVar(self.bools.len() as u32 - 1)
    }

    fn new_int(&mut self, _name: &str, domain: &[i64]) -> IntVar {
        let mut values = domain.to_vec();
        values.sort_unstable();
        values.dedup();
        assert!(!values.is_empty(), "integer variable with empty domain");
        // Value literals prefer true, so decisions try the smallest value first.
        let lits: Vec<Lit> = values.iter().map(|_| Lit::pos(self.sat.new_var(true))).collect();
        self.sat.add_clause(&lits);
        if lits.len() <= 6 {
            for i in 0..lits.len() {
                for j in i + 1..lits.len() {
                    self.sat.add_clause(&[!lits[i], !lits[j]]);
                }
            }
        } else {
            // Sequential at-most-one.
            let s: Vec<Lit> = (0..lits.len() - 1).map(|_| self.fresh()).collect();
            self.sat.add_clause(&[!lits[0], s[0]]);
            for i in 1..lits.len() - 1 {
                self.sat.add_clause(&[!lits[i], s[i]]);
                self.sat.add_clause(&[!s[i - 1], s[i]]);
                self.sat.add_clause(&[!lits[i], !s[i - 1]]);
            }
            self.sat.add_clause(&[!lits[lits.len() - 1], !s[lits.len() - 2]]);
        }
        self.ints.push(IntInfo { values, lits });
        IntVar(self.ints.len() as u32 - 1)
    }

    fn assert(&mut self, t: &Term) -> Result<(), SolverError> {
        self.assert_term(t);
        Ok(())
    }

    fn assert_soft(&mut self, t: &Term) {
        self.softs.push((self.scopes.len(), t.clone()));
    }

    fn soft_terms(&self) -> Vec<Term> {
        self.softs.iter().map(|(_, t)| t.clone()).collect()
    }

    fn push(&mut self) -> Result<(), SolverError> {
        let sel = self.fresh();
        self.scopes.push(sel);
        Ok(())
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        let sel = self.scopes.pop().ok_or(SolverError::ScopeUnderflow)?;
        self.sat.add_clause(&[!sel]);
        let depth = self.scopes.len();
        self.softs.retain(|(d, _)| *d <= depth);
        Ok(())
    }

    fn check(&mut self) -> Result<SatResult, SolverError> {
        self.sat.set_deadline(Some(Instant::now() + self.timeout));
        let assumptions = self.scopes.clone();
        match self.sat.solve(&assumptions) {
            Outcome::Sat => {
                self.has_model = true;
                Ok(SatResult::Sat)
            }
            Outcome::Unsat => Ok(SatResult::Unsat),
            Outcome::Timeout => Err(SolverError::Timeout),
        }
    }

    fn bool_value(&self, v: BoolVar) -> Option<bool> {
        let l = self.bools[v.0 as usize];
        self.has_model.then(|| self.sat.model_value(l.var()) == l.is_positive())
    }

    fn int_value(&self, v: IntVar) -> Option<i64> {
        if !self.has_model {
            return None;
        }
        let info = &self.ints[v.0 as usize];
        info.lits.iter().position(|l| self.sat.model_value(l.var())).map(|i| info.values[i])
    }

    fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::solver::eval;

    #[test]
    fn int_equalities() {
        let mut b = NativeBackend::new();
        let x = b.new_int("x", &[1, 2, 3, 4]);
        b.assert(&Term::IntEq(x, 3)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Sat);
        assert_eq!(b.int_value(x), Some(3));
        b.assert(&Term::IntEq(x, 4)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Unsat);
    }

    #[test]
    fn scopes() {
        let mut b = NativeBackend::new();
        let x = b.new_int("x", &(0..10).collect::<Vec<_>>());
        b.push().unwrap();
        b.assert(&Term::IntLe(x, 2)).unwrap();
        b.assert(&Term::IntGe(x, 3)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Unsat);
        b.pop().unwrap();
        b.assert(&Term::IntGe(x, 8)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Sat);
        assert!(b.int_value(x).unwrap() >= 8);
        assert!(b.pop().is_err());
    }

    #[test]
    fn var_eq_and_iff() {
        let mut b = NativeBackend::new();
        let x = b.new_int("x", &[1, 2, 3]);
        let y = b.new_int("y", &[2, 3, 4]);
        let p = b.new_bool("p");
        b.assert(&Term::iff(Term::Bool(p), Term::VarEq(x, y))).unwrap();
        b.assert(&Term::Bool(p)).unwrap();
        b.assert(&Term::ne(x, 2)).unwrap();
        assert_eq!(b.check().unwrap(), SatResult::Sat);
        assert_eq!(b.int_value(x), Some(3));
        assert_eq!(b.int_value(y), Some(3));
    }

    #[test]
    fn at_least_counts() {
        for k in 0..=4 {
            let mut b = NativeBackend::new();
            let vs: Vec<BoolVar> = (0..4).map(|i| b.new_bool(&format!("v{i}"))).collect();
            let terms: Vec<Term> = vs.iter().map(|&v| Term::Bool(v)).collect();
            b.assert(&Term::AtLeast(terms.clone(), k)).unwrap();
            b.assert(&Term::not(Term::AtLeast(terms.clone(), k + 1))).unwrap();
            assert_eq!(b.check().unwrap(), SatResult::Sat);
            let n = vs.iter().filter(|&&v| b.bool_value(v) == Some(true)).count();
            assert_eq!(n, k);
            assert_eq!(eval(&b, &Term::AtLeast(terms, k)), Some(true));
        }
    }

    #[test]
    fn maximize_symmetric() {
        let mut b = NativeBackend::new();
        let (x, y) = (b.new_bool("a"), b.new_bool("b"));
        b.assert(&Term::Or(vec![Term::Bool(x), Term::Bool(y)])).unwrap();
        b.assert_soft(&Term::not(Term::Bool(x)));
        b.assert_soft(&Term::not(Term::Bool(y)));
        assert_eq!(b.maximize().unwrap(), Some(1));
        assert_ne!(b.bool_value(x), b.bool_value(y));
    }

    #[test]
    fn maximize_without_softs_is_check() {
        let mut b = NativeBackend::new();
        let x = b.new_int("x", &[5]);
        assert_eq!(b.maximize().unwrap(), Some(0));
        assert_eq!(b.int_value(x), Some(5));
        b.assert(&Term::False).unwrap();
        assert_eq!(b.maximize().unwrap(), None);
    }
}
