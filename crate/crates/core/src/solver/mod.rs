//! Constraint solving interface.
//!
//! Consumers build [`Term`]s over boolean and finite-domain integer variables
//! and talk to a [`Backend`]. Two backends exist: [`NativeBackend`], which
//! lowers everything to clauses for the built-in CDCL solver, and
//! [`SmtLibBackend`], which drives an external SMT-LIB v2 solver process.

mod native;
pub mod sat;
mod sexp;
mod smtlib;

use std::time::Duration;

use thiserror::Error;

pub use native::NativeBackend;
pub use smtlib::{SmtLibBackend, SmtLibConfig};

/// Default time allowed for a single satisfiability check.
pub const DEFAULT_CHECK_TIMEOUT: Duration = Duration::from_secs(10);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct BoolVar(pub u32);

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct IntVar(pub u32);

/// Quantifier-free formula over boolean and integer variables.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub enum Term {
    True,
    False,
    Bool(BoolVar),
    Not(Box<Term>),
    And(Vec<Term>),
    Or(Vec<Term>),
    Implies(Box<Term>, Box<Term>),
    Iff(Box<Term>, Box<Term>),
    IntEq(IntVar, i64),
    IntLe(IntVar, i64),
    IntGe(IntVar, i64),
    VarEq(IntVar, IntVar),
    /// At least `k` of the terms hold.
    AtLeast(Vec<Term>, usize),
}

impl Term {
    pub fn var(v: BoolVar) -> Term {
        Term::Bool(v)
    }

    #[allow(clippy::should_implement_trait)]
    pub fn not(t: Term) -> Term {
        match t {
            Term::True => Term::False,
            Term::False => Term::True,
            Term::Not(inner) => *inner,
            other => Term::Not(Box::new(other)),
        }
    }

    pub fn implies(a: Term, b: Term) -> Term {
        Term::Implies(Box::new(a), Box::new(b))
    }

    pub fn iff(a: Term, b: Term) -> Term {
        Term::Iff(Box::new(a), Box::new(b))
    }

    pub fn ne(v: IntVar, k: i64) -> Term {
        Term::not(Term::IntEq(v, k))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SatResult {
    Sat,
    Unsat,
}

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("solver check timed out")]
    Timeout,
    #[error("solver process: {0}")]
    Process(String),
    #[error("solver protocol: {0}")]
    Protocol(String),
    #[error("pop without matching push")]
    ScopeUnderflow,
}

/// Incremental constraint solver with scopes and soft constraints.
///
/// Variables outlive the scope they were declared in; assertions and soft
/// constraints are removed by the matching [`Backend::pop`]. Model queries
/// refer to the last successful [`Backend::check`].
pub trait Backend: Send {
    fn new_bool(&mut self, name: &str) -> BoolVar;

    /// Integer variable restricted to `domain` (non-empty).
    fn new_int(&mut self, name: &str, domain: &[i64]) -> IntVar;

    fn assert(&mut self, t: &Term) -> Result<(), SolverError>;

    /// Adds a unit-weight soft constraint in the current scope.
    fn assert_soft(&mut self, t: &Term);

    fn soft_terms(&self) -> Vec<Term>;

    fn push(&mut self) -> Result<(), SolverError>;

    fn pop(&mut self) -> Result<(), SolverError>;

    fn check(&mut self) -> Result<SatResult, SolverError>;

    fn bool_value(&self, v: BoolVar) -> Option<bool>;

    fn int_value(&self, v: IntVar) -> Option<i64>;

    fn set_timeout(&mut self, timeout: Duration);

    /// Maximizes the number of satisfied soft constraints.
    ///
    /// On success the current model is an optimal one and the number of
    /// satisfied soft constraints is returned. `None` means the hard
    /// constraints are unsatisfiable.
    fn maximize(&mut self) -> Result<Option<usize>, SolverError> {
        maximize_linear(self)
    }
}

/// Model-improving linear search: after each model, demand one more
/// satisfied soft constraint until that is impossible.
pub fn maximize_linear<B: Backend + ?Sized>(b: &mut B) -> Result<Option<usize>, SolverError> {
    let softs = b.soft_terms();
    if b.check()? == SatResult::Unsat {
        return Ok(None);
    }
    if softs.is_empty() {
        return Ok(Some(0));
    }
    let flags: Vec<BoolVar> = (0..softs.len()).map(|i| b.new_bool(&format!("soft{i}"))).collect();
    b.push()?;
    for (f, t) in flags.iter().zip(&softs) {
        b.assert(&Term::implies(Term::Bool(*f), t.clone()))?;
    }
    let count = |b: &B| flags.iter().filter(|&&f| b.bool_value(f) == Some(true)).count();
    let mut best = {
        let r = b.check()?;
        debug_assert_eq!(r, SatResult::Sat);
        count(b)
    };
    let all: Vec<Term> = flags.iter().map(|&f| Term::Bool(f)).collect();
    while best < softs.len() {
        b.push()?;
        b.assert(&Term::AtLeast(all.clone(), best + 1))?;
        let r = b.check()?;
        if r == SatResult::Sat {
            best = count(b);
        }
        b.pop()?;
        if r == SatResult::Unsat {
            break;
        }
    }
    // Re-establish an optimal model.
    b.assert(&Term::AtLeast(all, best))?;
    let r = b.check()?;
    debug_assert_eq!(r, SatResult::Sat);
    b.pop()?;
    // Popping keeps the last model; the optimum holds in it.
    Ok(Some(best))
}

/// Evaluates a term under the backend's current model.
pub fn eval<B: Backend + ?Sized>(b: &B, t: &Term) -> Option<bool> {
    Some(match t {
        Term::True => true,
        Term::False => false,
        Term::Bool(v) => b.bool_value(*v)?,
        Term::Not(x) => !eval(b, x)?,
        Term::And(xs) => {
            for x in xs {
                if !eval(b, x)? {
                    return Some(false);
                }
            }
            true
        }
        Term::Or(xs) => {
            for x in xs {
                if eval(b, x)? {
                    return Some(true);
                }
            }
            false
        }
        Term::Implies(x, y) => !eval(b, x)? || eval(b, y)?,
        Term::Iff(x, y) => eval(b, x)? == eval(b, y)?,
        Term::IntEq(v, k) => b.int_value(*v)? == *k,
        Term::IntLe(v, k) => b.int_value(*v)? <= *k,
        Term::IntGe(v, k) => b.int_value(*v)? >= *k,
        Term::VarEq(x, y) => b.int_value(*x)? == b.int_value(*y)?,
        Term::AtLeast(xs, k) => {
            let mut n = 0;
            for x in xs {
                n += usize::from(eval(b, x)?);
            }
            n >= *k
        }
    })
}

/// Which backend to construct.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub enum SolverChoice {
    #[default]
    Native,
    SmtLib(SmtLibConfig),
}

impl SolverChoice {
    pub fn create(&self, timeout: Duration) -> Result<Box<dyn Backend>, SolverError> {
        let mut b: Box<dyn Backend> = match self {
            SolverChoice::Native => Box::new(NativeBackend::new()),
            SolverChoice::SmtLib(cfg) => Box::new(SmtLibBackend::spawn(cfg)?),
        };
        b.set_timeout(timeout);
        Ok(b)
    }
}
