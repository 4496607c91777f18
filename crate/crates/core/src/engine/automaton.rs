//! Position automaton (Glushkov construction) with bitset states.
//!
//! Every leaf occurrence of the expanded expression is a position; a state
//! is a set of positions. Position 0 is the virtual start position. The
//! construction has no epsilon transitions, so it serves directly both as
//! the matcher and as the NFA for the subset construction.

use thiserror::Error;

use crate::ast::{CharClass, RangeLit, Regex};

/// Largest repetition bound the construction expands.
pub const MAX_REPEAT: u32 = 64;

#[derive(Clone, Debug, Error, PartialEq, Eq)]
pub enum AutomatonError {
    #[error("repetition bound {0} exceeds the expansion limit of {MAX_REPEAT}")]
    RepeatTooLarge(u32),
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Symbol {
    Char(char),
    Class(CharClass),
}

impl Symbol {
    #[inline]
    pub fn matches(self, c: char) -> bool {
        match self {
            Symbol::Char(x) => x == c,
            Symbol::Class(k) => k.contains(c),
        }
    }
}

/// Fixed-width bitset; all sets of one automaton have the same width.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Bits(Box<[u64]>);

impl Bits {
    pub fn empty(bits: usize) -> Self {
        Bits(vec![0; bits.div_ceil(64).max(1)].into_boxed_slice())
    }

    #[inline]
    pub fn set(&mut self, i: usize) {
        self.0[i / 64] |= 1 << (i % 64);
    }

    #[inline]
    pub fn get(&self, i: usize) -> bool {
        self.0[i / 64] & (1 << (i % 64)) != 0
    }

    pub fn is_empty(&self) -> bool {
        self.0.iter().all(|&w| w == 0)
    }

    pub fn clear(&mut self) {
        self.0.iter_mut().for_each(|w| *w = 0);
    }

    #[inline]
    pub fn or_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a |= b;
        }
    }

    #[inline]
    pub fn and_with(&mut self, other: &Bits) {
        for (a, b) in self.0.iter_mut().zip(other.0.iter()) {
            *a &= b;
        }
    }

    pub fn intersects(&self, other: &Bits) -> bool {
        self.0.iter().zip(other.0.iter()).any(|(a, b)| a & b != 0)
    }

    pub fn ones(&self) -> impl Iterator<Item = usize> + '_ {
        self.0.iter().enumerate().flat_map(|(wi, &w)| {
            let mut w = w;
            std::iter::from_fn(move || {
                if w == 0 {
                    return None;
                }
                let b = w.trailing_zeros() as usize;
                w &= w - 1;
                Some(wi * 64 + b)
            })
        })
    }
}

#[derive(Clone, Debug)]
pub struct Automaton {
    /// Symbol of each position; index 0 is the start position and has none.
    symbols: Vec<Option<Symbol>>,
    follow: Vec<Bits>,
    last: Bits,
    nullable: bool,
}

struct Frag {
    first: Vec<usize>,
    last: Vec<usize>,
    nullable: bool,
}

impl Frag {
    fn epsilon() -> Self {
        Frag { first: Vec::new(), last: Vec::new(), nullable: true }
    }
}

struct Builder {
    symbols: Vec<Option<Symbol>>,
    follow: Vec<Vec<usize>>,
}

impl Builder {
    fn leaf(&mut self, sym: Symbol) -> Frag {
        let p = self.symbols.len();
        self.symbols.push(Some(sym));
        self.follow.push(Vec::new());
        Frag { first: vec![p], last: vec![p], nullable: false }
    }

    fn link(&mut self, from: &[usize], to: &[usize]) {
        for &l in from {
            self.follow[l].extend_from_slice(to);
        }
    }

    fn cat(&mut self, a: Frag, b: Frag) -> Frag {
        self.link(&a.last, &b.first);
        let mut first = a.first;
        if a.nullable {
            first.extend_from_slice(&b.first);
        }
        let mut last = b.last;
        if b.nullable {
            last.extend_from_slice(&a.last);
        }
        Frag { first, last, nullable: a.nullable && b.nullable }
    }

    fn build(&mut self, r: &Regex) -> Result<Frag, AutomatonError> {
        Ok(match r {
            Regex::Literal(c) => self.leaf(Symbol::Char(*c)),
            Regex::Class(k) => self.leaf(Symbol::Class(*k)),
            Regex::Group(inner) => self.build(inner)?,
            Regex::Concat(parts) => {
                let mut acc = Frag::epsilon();
                for p in parts {
                    let f = self.build(p)?;
                    acc = self.cat(acc, f);
                }
                acc
            }
            Regex::Union(a, b) => {
                let fa = self.build(a)?;
                let fb = self.build(b)?;
                let mut first = fa.first;
                first.extend(fb.first);
                let mut last = fa.last;
                last.extend(fb.last);
                Frag { first, last, nullable: fa.nullable || fb.nullable }
            }
            Regex::Kleene(inner) | Regex::Plus(inner) => {
                let f = self.build(inner)?;
                self.link(&f.last, &f.first);
                let nullable = matches!(r, Regex::Kleene(_)) || f.nullable;
                Frag { nullable, ..f }
            }
            Regex::Optional(inner) => {
                let f = self.build(inner)?;
                Frag { nullable: true, ..f }
            }
            Regex::Range(inner, lit) => {
                let (min, max) = match *lit {
                    RangeLit::Exact(m) => (m, m),
                    RangeLit::Between(m, n) => (m, n),
                };
                if max > MAX_REPEAT {
                    return Err(AutomatonError::RepeatTooLarge(max));
                }
                let mut acc = Frag::epsilon();
                for i in 0..max {
                    let mut f = self.build(inner)?;
                    if i >= min {
                        f.nullable = true;
                    }
                    acc = self.cat(acc, f);
                }
                acc
            }
        })
    }
}

impl Automaton {
    pub fn new(r: &Regex) -> Result<Self, AutomatonError> {
        let mut b = Builder { symbols: vec![None], follow: vec![Vec::new()] };
        let frag = b.build(r)?;
        b.follow[0] = frag.first;
        let n = b.symbols.len();
        let to_bits = |ps: &[usize]| {
            let mut bits = Bits::empty(n);
            ps.iter().for_each(|&p| bits.set(p));
            bits
        };
        let follow = b.follow.iter().map(|f| to_bits(f)).collect();
        Ok(Automaton { symbols: b.symbols, follow, last: to_bits(&frag.last), nullable: frag.nullable })
    }

    /// Number of positions including the start position.
    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn start(&self) -> Bits {
        let mut s = Bits::empty(self.len());
        s.set(0);
        s
    }

    pub fn is_accepting(&self, state: &Bits) -> bool {
        (self.nullable && state.get(0)) || state.intersects(&self.last)
    }

    /// Positions whose symbol accepts `c`.
    pub fn char_mask(&self, c: char) -> Bits {
        let mut m = Bits::empty(self.len());
        for (p, s) in self.symbols.iter().enumerate() {
            if s.is_some_and(|s| s.matches(c)) {
                m.set(p);
            }
        }
        m
    }

    /// Successor of `state` restricted to `mask`, written into `out`.
    #[inline]
    pub fn step_masked(&self, state: &Bits, mask: &Bits, out: &mut Bits) {
        out.clear();
        for p in state.ones() {
            out.or_with(&self.follow[p]);
        }
        out.and_with(mask);
    }

    fn step_char(&self, state: &Bits, c: char, out: &mut Bits) {
        out.clear();
        for p in state.ones() {
            out.or_with(&self.follow[p]);
        }
        let candidates: Vec<usize> = out.ones().collect();
        for p in candidates {
            if !self.symbols[p].is_some_and(|s| s.matches(c)) {
                out.0[p / 64] &= !(1 << (p % 64));
            }
        }
    }

    /// Whether the whole of `s` is in the language.
    pub fn matches(&self, s: &str) -> bool {
        let mut cur = self.start();
        let mut next = Bits::empty(self.len());
        for c in s.chars() {
            self.step_char(&cur, c, &mut next);
            if next.is_empty() {
                return false;
            }
            std::mem::swap(&mut cur, &mut next);
        }
        self.is_accepting(&cur)
    }
}
