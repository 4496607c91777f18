//! Backend driving an external SMT-LIB v2 solver over pipes.

use std::io::{BufRead, BufReader, Write};
use std::path::PathBuf;
use std::process::{Child, ChildStdin, Command, Stdio};
use std::sync::mpsc::{self, Receiver, RecvTimeoutError};
use std::time::{Duration, Instant};

use super::sexp::{self, Sexp};
use super::{Backend, BoolVar, IntVar, SatResult, SolverError, Term};

/// How to start the solver process. The solver must read commands from
/// standard input.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SmtLibConfig {
    pub program: PathBuf,
    pub args: Vec<String>,
}

impl SmtLibConfig {
    pub fn z3() -> Self {
        SmtLibConfig { program: "z3".into(), args: vec!["-in".into()] }
    }

    /// Parses a command line such as `z3 -in` or `/opt/cvc5 --lang smt2`.
    /// A bare path to a z3 binary gets `-in` added.
    pub fn from_command(cmd: &str) -> Self {
        let mut parts = cmd.split_whitespace().map(str::to_string);
        let program: PathBuf = parts.next().unwrap_or_else(|| "z3".into()).into();
        let mut args: Vec<String> = parts.collect();
        let is_z3 = program.file_name().and_then(|n| n.to_str()).is_some_and(|n| n.starts_with("z3"));
        if args.is_empty() && is_z3 {
            args.push("-in".into());
        }
        SmtLibConfig { program, args }
    }
}

pub struct SmtLibBackend {
    child: Child,
    stdin: ChildStdin,
    lines: Receiver<String>,
    domains: Vec<Vec<i64>>,
    domain_depth: Vec<usize>,
    n_bools: usize,
    depth: usize,
    softs: Vec<(usize, Term)>,
    bool_vals: Vec<bool>,
    int_vals: Vec<i64>,
    has_model: bool,
    timeout: Duration,
    dead: bool,
}

impl SmtLibBackend {
    pub fn spawn(cfg: &SmtLibConfig) -> Result<Self, SolverError> {
        let mut child = Command::new(&cfg.program)
            .args(&cfg.args)
            .stdin(Stdio::piped())
            .stdout(Stdio::piped())
            .stderr(Stdio::null())
            .spawn()
            .map_err(|e| SolverError::Process(format!("cannot start {}: {e}", cfg.program.display())))?;
        let stdin = child.stdin.take().expect("piped stdin");
        let stdout = child.stdout.take().expect("piped stdout");
        let (tx, rx) = mpsc::channel();
        std::thread::spawn(move || {
            for line in BufReader::new(stdout).lines() {
                let Ok(line) = line else { break };
                if tx.send(line).is_err() {
                    break;
                }
            }
        });
        let mut b = SmtLibBackend {
            child,
            stdin,
            lines: rx,
            domains: Vec::new(),
            domain_depth: Vec::new(),
            n_bools: 0,
            depth: 0,
            softs: Vec::new(),
            bool_vals: Vec::new(),
            int_vals: Vec::new(),
            has_model: false,
            timeout: super::DEFAULT_CHECK_TIMEOUT,
            dead: false,
        };
        b.send("(set-option :print-success false)")?;
        b.send("(set-option :produce-models true)")?;
        b.send("(set-option :global-declarations true)")?;
        b.send("(set-logic QF_LIA)")?;
        Ok(b)
    }

    fn send(&mut self, cmd: &str) -> Result<(), SolverError> {
        if self.dead {
            return Err(SolverError::Process("solver process was terminated".into()));
        }
        writeln!(self.stdin, "{cmd}")
            .and_then(|_| self.stdin.flush())
            .map_err(|e| SolverError::Process(e.to_string()))
    }

    /// Reads one complete response, which may span several lines.
    fn response(&mut self) -> Result<String, SolverError> {
        let deadline = Instant::now() + self.timeout;
        let mut text = String::new();
        loop {
            let left = deadline.saturating_duration_since(Instant::now());
            match self.lines.recv_timeout(left) {
                Ok(line) => {
                    if text.is_empty() && line.trim().is_empty() {
                        continue;
                    }
                    text.push_str(&line);
                    text.push('\n');
                    if sexp::depth_delta(&text) <= 0 {
                        return Ok(text);
                    }
                }
                Err(RecvTimeoutError::Timeout) => {
                    self.kill();
                    return Err(SolverError::Timeout);
                }
                Err(RecvTimeoutError::Disconnected) => {
                    self.dead = true;
                    return Err(SolverError::Process("solver exited".into()));
                }
            }
        }
    }

    fn domain_term(&self, v: IntVar) -> Term {
        Term::Or(self.domains[v.0 as usize].iter().map(|&k| Term::IntEq(v, k)).collect())
    }

    fn kill(&mut self) {
        self.dead = true;
        let _ = self.child.kill();
        let _ = self.child.wait();
    }

    fn read_model(&mut self) -> Result<(), SolverError> {
        self.send("(get-model)")?;
        let text = self.response()?;
        let e = sexp::parse(&text).map_err(SolverError::Protocol)?;
        let items = e.as_list().ok_or_else(|| SolverError::Protocol(format!("unexpected model: {text}")))?;
        self.bool_vals = vec![false; self.n_bools];
        self.int_vals = self.domains.iter().map(|d| d[0]).collect();
        // Some solvers wrap the definitions in `(model ...)`.
        let items = match items.first().and_then(Sexp::as_atom) {
            Some("model") => &items[1..],
            _ => items,
        };
        for def in items {
            let Some([Sexp::Atom(kw), Sexp::Atom(name), _, _, value]) = def.as_list() else {
                continue;
            };
            if kw != "define-fun" {
                continue;
            }
            let index = |prefix: char| name.strip_prefix(prefix).and_then(|n| n.parse::<usize>().ok());
            if let Some(i) = index('b').filter(|&i| i < self.n_bools) {
                self.bool_vals[i] = value.as_atom() == Some("true");
            } else if let Some(i) = index('i').filter(|&i| i < self.domains.len()) {
                self.int_vals[i] = value
                    .as_int()
                    .ok_or_else(|| SolverError::Protocol(format!("bad integer value for {name}")))?;
            }
        }
        Ok(())
    }
}

fn int_lit(k: i64) -> String {
    if k < 0 {
        format!("(- {})", k.unsigned_abs())
    } else {
        k.to_string()
    }
}

/// SMT-LIB text of a term.
pub fn render(t: &Term) -> String {
    match t {
        Term::True => "true".into(),
        Term::False => "false".into(),
        Term::Bool(v) => format!("b{}", v.0),
        Term::Not(x) => format!("(not {})", render(x)),
        Term::And(xs) if xs.is_empty() => "true".into(),
        Term::Or(xs) if xs.is_empty() => "false".into(),
        Term::And(xs) | Term::Or(xs) if xs.len() == 1 => render(&xs[0]),
        Term::And(xs) => format!("(and {})", xs.iter().map(render).collect::<Vec<_>>().join(" ")),
        Term::Or(xs) => format!("(or {})", xs.iter().map(render).collect::<Vec<_>>().join(" ")),
        Term::Implies(a, b) => format!("(=> {} {})", render(a), render(b)),
        Term::Iff(a, b) => format!("(= {} {})", render(a), render(b)),
        Term::IntEq(v, k) => format!("(= i{} {})", v.0, int_lit(*k)),
        Term::IntLe(v, k) => format!("(<= i{} {})", v.0, int_lit(*k)),
        Term::IntGe(v, k) => format!("(>= i{} {})", v.0, int_lit(*k)),
        Term::VarEq(a, b) => format!("(= i{} i{})", a.0, b.0),
        Term::AtLeast(xs, k) => {
            let sum = match xs.len() {
                0 => "0".to_string(),
                1 => format!("(ite {} 1 0)", render(&xs[0])),
                _ => format!(
                    "(+ {})",
                    xs.iter().map(|x| format!("(ite {} 1 0)", render(x))).collect::<Vec<_>>().join(" ")
                ),
            };
            format!("(>= {sum} {k})")
        }
    }
}

impl Backend for SmtLibBackend {
    fn new_bool(&mut self, _name: &str) -> BoolVar {
        let v = BoolVar(self.n_bools as u32);
        self.n_bools += 1;
        // Declaration failures surface on the next check.
        let _ = self.send(&format!("(declare-const b{} Bool)", v.0));
        v
    }

    fn new_int(&mut self, _name: &str, domain: &[i64]) -> IntVar {
        assert!(!domain.is_empty(), "integer variable with empty domain");
        let v = IntVar(self.domains.len() as u32);
        let mut d = domain.to_vec();
        d.sort_unstable();
        d.dedup();
        let _ = self.send(&format!("(declare-const i{} Int)", v.0));
        self.domains.push(d);
        self.domain_depth.push(self.depth);
        let _ = self.send(&format!("(assert {})", render(&self.domain_term(v))));
        v
    }

    fn assert(&mut self, t: &Term) -> Result<(), SolverError> {
        self.send(&format!("(assert {})", render(t)))
    }

    fn assert_soft(&mut self, t: &Term) {
        self.softs.push((self.depth, t.clone()));
    }

    fn soft_terms(&self) -> Vec<Term> {
        self.softs.iter().map(|(_, t)| t.clone()).collect()
    }

    fn push(&mut self) -> Result<(), SolverError> {
        self.send("(push 1)")?;
        self.depth += 1;
        Ok(())
    }

    fn pop(&mut self) -> Result<(), SolverError> {
        if self.depth == 0 {
            return Err(SolverError::ScopeUnderflow);
        }
        self.send("(pop 1)")?;
        self.depth -= 1;
        let depth = self.depth;
        self.softs.retain(|(d, _)| *d <= depth);
        // Declarations are global, but domain constraints of variables
        // declared in the popped scope went with it.
        for i in 0..self.domains.len() {
            if self.domain_depth[i] > depth {
                self.domain_depth[i] = depth;
                let dom = render(&self.domain_term(IntVar(i as u32)));
                self.send(&format!("(assert {dom})"))?;
            }
        }
        Ok(())
    }

    fn check(&mut self) -> Result<SatResult, SolverError> {
        self.send("(check-sat)")?;
        let answer = self.response()?;
        match answer.trim() {
            "sat" => {
                self.read_model()?;
                self.has_model = true;
                Ok(SatResult::Sat)
            }
            "unsat" => Ok(SatResult::Unsat),
            "unknown" => Err(SolverError::Protocol("solver answered unknown".into())),
            other => Err(SolverError::Protocol(other.to_string())),
        }
    }

    fn bool_value(&self, v: BoolVar) -> Option<bool> {
        self.has_model.then(|| self.bool_vals.get(v.0 as usize).copied()).flatten()
    }

    fn int_value(&self, v: IntVar) -> Option<i64> {
        self.has_model.then(|| self.int_vals.get(v.0 as usize).copied()).flatten()
    }

    fn set_timeout(&mut self, timeout: Duration) {
        self.timeout = timeout;
    }
}

impl Drop for SmtLibBackend {
    fn drop(&mut self) {
        let _ = self.send("(exit)");
        let _ = self.child.kill();
        let _ = self.child.wait();
    }
}
