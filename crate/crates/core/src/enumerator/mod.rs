//! Constraint-based enumeration of regexes over fixed tree shapes.
//!
//! A program of shape `(n, d)` is the concatenation of `n` columns. A column
//! is either a fixed divider string or a complete binary tree of depth `d`
//! whose nodes each hold one grammar production. Every tree node is a
//! finite-domain integer variable; structural constraints make every model a
//! well-typed program, and each returned program is blocked so that the next
//! call yields a different one.

mod semantics;
mod shape;

use std::collections::HashMap;

use crate::ast::{RangeLit, Regex};
use crate::dsl::{build_dsl, DslError, DslSpec, Op, Production};
use crate::solver::{Backend, BoolVar, IntVar, SatResult, SolverError, Term};
use crate::splitter::{self, SplitResult};

pub use shape::{shape_schedule, ScheduleMode, ShapeLimits, TreeShape};

/// One column of a multi-tree program.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum ColumnSpec {
    Fixed(String),
    Tree(DslSpec),
}

/// Columns of a multi-tree program, without the tree depth.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Layout {
    pub columns: Vec<ColumnSpec>,
}

impl Layout {
    /// `n` trees over the same grammar.
    pub fn dynamic(dsl: &DslSpec, n: u32) -> Self {
        Layout { columns: (0..n).map(|_| ColumnSpec::Tree(dsl.clone())).collect() }
    }

    /// Dividers become fixed columns; each field column gets a grammar
    /// built from its own values.
    pub fn from_split(split: &SplitResult) -> Result<Self, DslError> {
        let columns = split
            .columns
            .iter()
            .map(|c| match c {
                splitter::Column::Divider(d) => Ok(ColumnSpec::Fixed(d.clone())),
                splitter::Column::Field(values) => build_dsl(values).map(ColumnSpec::Tree),
            })
            .collect::<Result<_, _>>()?;
        Ok(Layout { columns })
    }

    pub fn n(&self) -> u32 {
        self.columns.len() as u32
    }

    pub fn tree_count(&self) -> usize {
        self.columns.iter().filter(|c| matches!(c, ColumnSpec::Tree(_))).count()
    }
}

/// Which pruning templates to assert. All are sound: every pruned program
/// has an equivalent program of the same shape that is kept.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Pruning {
    /// A unary quantifier directly over another one.
    pub nested_quantifiers: bool,
    /// A bounded repetition directly over `*` or `?`.
    pub range_over_star: bool,
    /// `*`, `+` or `?` directly over `{0,n}` or `{1,n}`.
    pub star_over_range: bool,
    /// Nested bounded repetitions that collapse into one.
    pub nested_ranges: bool,
    /// A union of two identical subtrees.
    pub union_idempotence: bool,
    /// Block both operand orders of every union.
    pub union_commutativity: bool,
}

impl Pruning {
    pub fn all() -> Self {
        Pruning {
            nested_quantifiers: true,
            range_over_star: true,
            star_over_range: true,
            nested_ranges: true,
            union_idempotence: true,
            union_commutativity: true,
        }
    }

    pub fn none() -> Self {
        Pruning {
            nested_quantifiers: false,
            range_over_star: false,
            star_over_range: false,
            nested_ranges: false,
            union_idempotence: false,
            union_commutativity: false,
        }
    }
}

impl Default for Pruning {
    fn default() -> Self {
        Pruning::all()
    }
}

/// A decoded model: node values per column (empty for fixed columns) and
/// the regex they denote.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Program {
    pub shape: TreeShape,
    pub trees: Vec<Vec<u32>>,
    pub regex: Regex,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum L {
    Const(bool),
    Var(BoolVar),
}

impl L {
    fn term(self) -> Term {
        match self {
            L::Const(true) => Term::True,
            L::Const(false) => Term::False,
            L::Var(v) => Term::Bool(v),
        }
    }
}

#[derive(Default)]
struct SemanticCache {
    atoms: HashMap<(usize, u32, String), L>,
    counts: HashMap<(usize, u32, u32, String), L>,
    ands: HashMap<(BoolVar, BoolVar), L>,
}

/// Enumerates the programs of one shape.
pub struct Enumerator {
    backend: Box<dyn Backend>,
    layout: Layout,
    shape: TreeShape,
    vars: Vec<Vec<IntVar>>,
    pruning: Pruning,
    cache: SemanticCache,
    enumerated: u64,
}

impl Enumerator {
    /// Declares the node variables and asserts the structural constraints
    /// and the enabled pruning templates. `backend` should be fresh.
    pub fn new(backend: Box<dyn Backend>, layout: Layout, depth: u32, pruning: Pruning) -> Result<Self, SolverError> {
        let shape = TreeShape::new(layout.n(), depth);
        let mut e = Enumerator {
            backend,
            layout,
            shape,
            vars: Vec::new(),
            pruning,
            cache: SemanticCache::default(),
            enumerated: 0,
        };
        for col in 0..e.layout.columns.len() {
            let vars = match &e.layout.columns[col] {
                ColumnSpec::Fixed(_) => Vec::new(),
                ColumnSpec::Tree(_) => (1..=shape.tree_nodes())
                    .map(|node| {
                        let dom: Vec<i64> = e.domain(col, node).into_iter().map(i64::from).collect();
                        e.backend.new_int(&format!("n{col}_{node}"), &dom)
                    })
                    .collect(),
            };
            e.vars.push(vars);
        }
        for col in 0..e.layout.columns.len() {
            if !e.vars[col].is_empty() {
                e.encode_tree(col)?;
                e.assert_pruning(col)?;
            }
        }
        Ok(e)
    }

    pub fn shape(&self) -> TreeShape {
        self.shape
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    /// Number of programs returned so far.
    pub fn enumerated(&self) -> u64 {
        self.enumerated
    }

    pub fn backend_mut(&mut self) -> &mut dyn Backend {
        self.backend.as_mut()
    }

    fn dsl(&self, col: usize) -> &DslSpec {
        match &self.layout.columns[col] {
            ColumnSpec::Tree(d) => d,
            ColumnSpec::Fixed(_) => panic!("column {col} is fixed"),
        }
    }

    fn var(&self, col: usize, node: u32) -> IntVar {
        self.vars[col][node as usize - 1]
    }

    /// Values a node may take. Roots are never empty; left children never
    /// hold a range literal; leaves hold no operator.
    fn domain(&self, col: usize, node: u32) -> Vec<u32> {
        let dsl = self.dsl(col);
        let leaf = self.shape.is_leaf(node);
        dsl.ids_where(|p| match p {
            Production::Epsilon => node != 1,
            Production::Literal(_) | Production::Class(_) => true,
            Production::Range(_) => node != 1 && node % 2 == 1,
            Production::Op(_) => !leaf,
        })
    }

    fn eq(&self, col: usize, node: u32, value: u32) -> Term {
        Term::IntEq(self.var(col, node), i64::from(value))
    }

    fn encode_tree(&mut self, col: usize) -> Result<(), SolverError> {
        for node in 1..=self.shape.tree_nodes() {
            let Some(kids) = self.shape.children(node) else { continue };
            // Productions grouped by what they require of their children.
            let mut groups: Vec<(Vec<Option<crate::dsl::Ty>>, Vec<u32>)> = Vec::new();
            for v in self.domain(col, node) {
                let p = self.dsl(col).production(v);
                let sig: Vec<_> = (0..2)
                    .map(|i| match p {
                        Production::Op(op) => op.param(i),
                        _ => None,
                    })
                    .collect();
                match groups.iter_mut().find(|(s, _)| *s == sig) {
                    Some((_, vs)) => vs.push(v),
                    None => groups.push((sig, vec![v])),
                }
            }
            for (sig, values) in groups {
                let lhs = Term::Or(values.iter().map(|&v| self.eq(col, node, v)).collect());
                for (i, child) in [kids.0, kids.1].into_iter().enumerate() {
                    let dsl = self.dsl(col);
                    let allowed: Vec<u32> = self
                        .domain(col, child)
                        .into_iter()
                        .filter(|&w| dsl.production(w).ty() == sig[i])
                        .collect();
                    let rhs = Term::Or(allowed.iter().map(|&w| self.eq(col, child, w)).collect());
                    self.backend.assert(&Term::implies(lhs.clone(), rhs))?;
                }
            }
        }
        Ok(())
    }

    fn forbid(&mut self, conj: Vec<Term>) -> Result<(), SolverError> {
        self.backend.assert(&Term::Or(conj.into_iter().map(Term::not).collect()))
    }

    fn assert_pruning(&mut self, col: usize) -> Result<(), SolverError> {
        let dsl = self.dsl(col).clone();
        let op = |o: Op| dsl.op_id(o);
        let quants: Vec<u32> = [Op::Kleene, Op::Plus, Op::Option].into_iter().filter_map(op).collect();
        let range = op(Op::Range);
        let range_lits: Vec<(u32, RangeLit)> = dsl
            .range_ids()
            .into_iter()
            .map(|id| match dsl.production(id) {
                Production::Range(r) => (id, r),
                _ => unreachable!(),
            })
            .collect();
        let l = dsl.max_len as u32;
        let p = self.pruning;
        for node in 1..=self.shape.tree_nodes() {
            if self.shape.is_leaf(node) {
                continue;
            }
            let child = 2 * node;
            let child_internal = !self.shape.is_leaf(child);
            if p.nested_quantifiers && child_internal {
                for &a in &quants {
                    for &b in &quants {
                        self.forbid(vec![self.eq(col, node, a), self.eq(col, child, b)])?;
                    }
                }
            }
            let Some(r) = range else { continue };
            if p.range_over_star && child_internal {
                for o in [Op::Kleene, Op::Option].into_iter().filter_map(op) {
                    self.forbid(vec![self.eq(col, node, r), self.eq(col, child, o)])?;
                }
            }
            if !child_internal {
                continue;
            }
            let child_lit = 2 * child + 1;
            if p.star_over_range {
                for &q in &quants {
                    for &(id, lit) in &range_lits {
                        if matches!(lit, RangeLit::Between(0 | 1, _)) {
                            self.forbid(vec![
                                self.eq(col, node, q),
                                self.eq(col, child, r),
                                self.eq(col, child_lit, id),
                            ])?;
                        }
                    }
                }
            }
            if p.nested_ranges {
                for &(outer_id, outer) in &range_lits {
                    for &(inner_id, inner) in &range_lits {
                        if composes(inner, outer, l) {
                            self.forbid(vec![
                                self.eq(col, node, r),
                                self.eq(col, node * 2 + 1, outer_id),
                                self.eq(col, child, r),
                                self.eq(col, child_lit, inner_id),
                            ])?;
                        }
                    }
                }
            }
        }
        if p.union_idempotence {
            if let Some(u) = op(Op::Union) {
                for node in 1..=self.shape.tree_nodes() {
                    if self.shape.is_leaf(node) {
                        continue;
                    }
                    let mut clause = vec![Term::not(self.eq(col, node, u))];
                    for (a, b) in mirrored_pairs(self.shape, node) {
                        clause.push(Term::not(Term::VarEq(self.var(col, a), self.var(col, b))));
                    }
                    self.backend.assert(&Term::Or(clause))?;
                }
            }
        }
        Ok(())
    }

    /// Next program of this shape not returned or blocked before, or `None`
    /// when the shape is exhausted. The program is blocked before returning.
    pub fn next_program(&mut self) -> Result<Option<Program>, SolverError> {
        match self.backend.check()? {
            SatResult::Unsat => Ok(None),
            SatResult::Sat => {
                let trees: Vec<Vec<u32>> = self
                    .vars
                    .iter()
                    .map(|vs| {
                        vs.iter()
                            .map(|&v| self.backend.int_value(v).expect("model value") as u32)
                            .collect()
                    })
                    .collect();
                self.block(&trees)?;
                self.enumerated += 1;
                let regex = self.decode(&trees);
                Ok(Some(Program { shape: self.shape, trees, regex }))
            }
        }
    }

    fn block(&mut self, trees: &[Vec<u32>]) -> Result<(), SolverError> {
        let mut clause = Vec::new();
        for (col, values) in trees.iter().enumerate() {
            for (i, &v) in values.iter().enumerate() {
                clause.push(Term::not(self.eq(col, i as u32 + 1, v)));
            }
        }
        self.backend.assert(&Term::Or(clause))
    }

    /// Blocks the variants of `program` obtained by swapping the operands
    /// of any subset of its unions (at most 64 variants).
    pub fn block_equivalent(&mut self, program: &Program) -> Result<(), SolverError> {
        if !self.pruning.union_commutativity {
            return Ok(());
        }
        let mut unions: Vec<(usize, u32)> = Vec::new();
        for (col, values) in program.trees.iter().enumerate() {
            if values.is_empty() {
                continue;
            }
            let Some(u) = self.dsl(col).op_id(Op::Union) else { continue };
            for (i, &v) in values.iter().enumerate() {
                if v == u {
                    unions.push((col, i as u32 + 1));
                }
            }
        }
        // Deepest first, so ancestor swaps do not move pending positions.
        unions.sort_by_key(|&(_, node)| std::cmp::Reverse(node));
        unions.truncate(6);
        for mask in 1u32..(1 << unions.len()) {
            let mut trees = program.trees.clone();
            for (bit, &(col, node)) in unions.iter().enumerate() {
                if mask & (1 << bit) != 0 {
                    for (a, b) in mirrored_pairs(self.shape, node) {
                        trees[col].swap(a as usize - 1, b as usize - 1);
                    }
                }
            }
            if trees != program.trees {
                self.block(&trees)?;
            }
        }
        Ok(())
    }

    /// The regex denoted by node values for every column.
    pub fn decode(&self, trees: &[Vec<u32>]) -> Regex {
        let parts = self
            .layout
            .columns
            .iter()
            .enumerate()
            .map(|(col, c)| match c {
                ColumnSpec::Fixed(d) => Regex::literal_str(d),
                ColumnSpec::Tree(dsl) => decode_node(dsl, &trees[col], 1),
            })
            .collect();
        Regex::concat(parts)
    }
}

fn decode_node(dsl: &DslSpec, values: &[u32], node: u32) -> Regex {
    let at = |n: u32| dsl.production(values[n as usize - 1]);
    let sub = |n: u32| decode_node(dsl, values, n);
    match at(node) {
        Production::Literal(c) => Regex::Literal(c),
        Production::Class(k) => Regex::Class(k),
        Production::Op(Op::Union) => Regex::union(sub(2 * node), sub(2 * node + 1)),
        Production::Op(Op::Concat) => Regex::concat(vec![sub(2 * node), sub(2 * node + 1)]),
        Production::Op(Op::Kleene) => Regex::kleene(sub(2 * node)),
        Production::Op(Op::Plus) => Regex::plus(sub(2 * node)),
        Production::Op(Op::Option) => Regex::optional(sub(2 * node)),
        Production::Op(Op::Range) => match at(2 * node + 1) {
            Production::Range(lit) => Regex::range(sub(2 * node), lit),
            other => panic!("range operator over {other}"),
        },
        other => panic!("node {node} holds {other} where a regex is required"),
    }
}

/// Corresponding positions of the left and right subtrees of `node`.
fn mirrored_pairs(shape: TreeShape, node: u32) -> Vec<(u32, u32)> {
    let mut out = Vec::new();
    let mut level = vec![(2 * node, 2 * node + 1)];
    while !level.is_empty() {
        let mut next = Vec::new();
        for (a, b) in level {
            if a > shape.tree_nodes() {
                continue;
            }
            out.push((a, b));
            next.push((2 * a, 2 * b));
            next.push((2 * a + 1, 2 * b + 1));
        }
        level = next;
    }
    out
}

/// Whether `(r{inner}){outer}` equals a single repetition `r{..}` whose
/// bound is at most `l`.
fn composes(inner: RangeLit, outer: RangeLit, l: u32) -> bool {
    match (inner, outer) {
        (RangeLit::Exact(a), RangeLit::Exact(b)) => a * b <= l,
        (RangeLit::Between(_, hi), RangeLit::Exact(m)) => m * hi <= l,
        _ => false,
    }
}
