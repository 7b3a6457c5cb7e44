//! Compiling nondeterministic multihead automata into constant-coin
//! verifiers.
//!
//! The verifier picks one of the `k` heads with `r = ⌈log2 k⌉` coins and
//! follows only that head. At every step the certificate supplies a
//! [`TrackSymbol`]: the `k` symbols the automaton's heads scan and the index of
//! the transition to take. The chosen path checks the one symbol it can see and
//! applies the transition, so a certificate that lies about some head is caught
//! by that head's path. Repeating the whole check `m` times, with the heads
//! rewound between copies, drives the error down to `(1 - 2^-r)^m`.

use std::collections::HashMap;
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::multihead::{all_scans, MultiheadAutomaton, StateId};
use crate::tape::{HeadMode, Move, Tape, TapeSymbol};
use crate::verifier::{Certificate, CommId, StateKind, VerifierMachine, ACCEPT, REJECT};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Control {
    Step,
    Rewind,
    NextCopy,
    End,
}

impl Control {
    fn name(self) -> &'static str {
        match self {
            Control::Step => "STEP",
            Control::Rewind => "REWIND",
            Control::NextCopy => "NEXTCOPY",
            Control::End => "END",
        }
    }
}

/// One certificate symbol of a compiled verifier, written `(a,CENT|0|STEP)`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TrackSymbol {
    pub scanned: Vec<TapeSymbol>,
    pub choice: usize,
    pub control: Control,
}

impl fmt::Display for TrackSymbol {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let scan: Vec<String> = self.scanned.iter().map(ToString::to_string).collect();
        write!(f, "({}|{}|{})", scan.join(","), self.choice, self.control.name())
    }
}

impl TrackSymbol {
    pub fn parse(text: &str) -> Option<TrackSymbol> {
        let inner = text.strip_prefix('(')?.strip_suffix(')')?;
        let mut parts = inner.split('|');
        let scanned = parts
            .next()?
            .split(',')
            .map(TapeSymbol::parse)
            .collect::<Option<Vec<_>>>()?;
        let choice = parts.next()?.parse().ok()?;
        let control = match parts.next()? {
            "STEP" => Control::Step,
            "REWIND" => Control::Rewind,
            "NEXTCOPY" => Control::NextCopy,
            "END" => Control::End,
            _ => return None,
        };
        if parts.next().is_some() {
            return None;
        }
        Some(TrackSymbol { scanned, choice, control })
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum VerifierKind {
    Weak,
    Strong,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CompileError {
    #[error("error bound must lie strictly between 0 and 1, got {0}")]
    Epsilon(String),
    #[error("source automaton is invalid: {0}")]
    Invalid(String),
    #[error("not a member: the source automaton rejects {0:?}")]
    NotMember(String),
}

#[derive(Clone, Debug)]
pub struct CompiledVerifier {
    pub verifier: VerifierMachine,
    /// Coins per copy.
    pub r: u32,
    /// Number of chained copies.
    pub m: u32,
    pub source: MultiheadAutomaton,
    pub kind: VerifierKind,
}

/// `⌈log2 k⌉`.
pub fn bits_for(k: usize) -> u32 {
    let mut r = 0;
    while (1usize << r) < k {
        r += 1;
    }
    r
}

/// Smallest `m ≥ 1` with `(1 - 2^-r)^m ≤ eps`.
pub fn copies_for(r: u32, eps: &BigRational) -> u32 {
    let miss = BigRational::one() - BigRational::new(BigInt::one(), BigInt::one() << r);
    let mut m = 1;
    let mut err = miss.clone();
    while &err > eps {
        err *= &miss;
        m += 1;
    }
    m
}

pub fn compile_weak(m: &MultiheadAutomaton, eps: &BigRational) -> Result<CompiledVerifier, CompileError> {
    if *eps <= BigRational::zero() || *eps >= BigRational::one() {
        return Err(CompileError::Epsilon(crate::verifier::fraction(eps)));
    }
    check_source(m)?;
    let r = bits_for(m.head_count());
    Ok(Builder::new(m, r, copies_for(r, eps), VerifierKind::Weak).build())
}

/// Single copy behind an `(r+1)`-coin gadget that rejects outright with
/// probability `(2^r - 1)/2^(r+1)`.
pub fn compile_strong(m: &MultiheadAutomaton) -> Result<CompiledVerifier, CompileError> {
    check_source(m)?;
    let r = bits_for(m.head_count());
    Ok(Builder::new(m, r, 1, VerifierKind::Strong).build())
}

fn check_source(m: &MultiheadAutomaton) -> Result<(), CompileError> {
    let report = m.validate();
    if report.is_ok() {
        Ok(())
    } else {
        Err(CompileError::Invalid(report.to_string()))
    }
}

struct Builder<'a> {
    src: &'a MultiheadAutomaton,
    r: u32,
    m: u32,
    kind: VerifierKind,
    v: VerifierMachine,
    ask: CommId,
    symbols: Vec<(TrackSymbol, CommId)>,
    /// `(copy, path, state, last move was right)`.
    sim: HashMap<(u32, usize, StateId, bool), StateId>,
    rewind: HashMap<(u32, usize), StateId>,
    toss: HashMap<(u32, u64, u32), StateId>,
}

impl<'a> Builder<'a> {
    fn new(src: &'a MultiheadAutomaton, r: u32, m: u32, kind: VerifierKind) -> Builder<'a> {
        let two_way = m > 1 || src.modes().iter().any(|h| !h.is_one_way());
        let mode = if two_way { HeadMode::TwoWay } else { HeadMode::OneWay };
        let budget = match kind {
            VerifierKind::Weak => m * r,
            VerifierKind::Strong => 2 * r + 1,
        };
        let mut v = VerifierMachine::new(src.alphabet(), &["?"], mode, budget);
        let ask = v.comm_id("?").unwrap();

        let syms: Vec<TapeSymbol> = std::iter::once(TapeSymbol::EndMarker)
            .chain(src.alphabet().iter().map(|&c| TapeSymbol::Letter(c)))
            .collect();
        let mut symbols = Vec::new();
        let mut controls = vec![Control::End];
        if m > 1 {
            controls.extend([Control::Rewind, Control::NextCopy]);
        }
        for scan in all_scans(&syms, src.head_count()) {
            let choices = (0..src.state_count())
                .map(|q| src.transition_set(q, &scan).count())
                .max()
                .unwrap_or(0);
            let mut add = |t: TrackSymbol| {
                let id = v.add_comm_symbol(&t.to_string());
                symbols.push((t, id));
            };
            for choice in 0..choices {
                add(TrackSymbol { scanned: scan.clone(), choice, control: Control::Step });
            }
            for &control in &controls {
                add(TrackSymbol { scanned: scan.clone(), choice: 0, control });
            }
        }
        Builder {
            src,
            r,
            m,
            kind,
            v,
            ask,
            symbols,
            sim: HashMap::new(),
            rewind: HashMap::new(),
            toss: HashMap::new(),
        }
    }

    fn k(&self) -> usize {
        self.src.head_count()
    }

    fn sim_state(&mut self, copy: u32, path: usize, q: StateId, right: bool) -> StateId {
        if let Some(&s) = self.sim.get(&(copy, path, q, right)) {
            return s;
        }
        let name = format!("c{copy}.p{path}.{}.{}", self.src.state_name(q), if right { "R" } else { "L" });
        let s = self.v.add_state(name, StateKind::Deterministic, self.ask);
        self.sim.insert((copy, path, q, right), s);
        s
    }

    fn rewind_state(&mut self, copy: u32, path: usize) -> StateId {
        if let Some(&s) = self.rewind.get(&(copy, path)) {
            return s;
        }
        let s = self.v.add_state(format!("c{copy}.p{path}.rewind"), StateKind::Deterministic, self.ask);
        self.rewind.insert((copy, path), s);
        s
    }

    /// Entry point of copy `copy`: its path-selection coins, or the single
    /// path when `r = 0`.
    fn copy_entry(&mut self, copy: u32) -> StateId {
        if self.r == 0 {
            let start = self.src.start();
            return self.sim_state(copy, 0, start, false);
        }
        self.toss_state(copy, 0, 0)
    }

    fn toss_state(&mut self, copy: u32, value: u64, depth: u32) -> StateId {
        if let Some(&s) = self.toss.get(&(copy, value, depth)) {
            return s;
        }
        let s = self.v.add_state(format!("c{copy}.toss.{depth}.{value}"), StateKind::Coin, CommId::NULL);
        self.toss.insert((copy, value, depth), s);
        for bit in [false, true] {
            let next_value = value * 2 + u64::from(bit);
            let next = if depth + 1 == self.r {
                // Surplus outcomes alias to path 0.
                let path = if (next_value as usize) < self.k() { next_value as usize } else { 0 };
                let start = self.src.start();
                self.sim_state(copy, path, start, false)
            } else {
                self.toss_state(copy, next_value, depth + 1)
            };
            self.v.add_transition(s, TapeSymbol::EndMarker, CommId::NULL, Some(bit), next, Move::Stay);
        }
        s
    }

    fn build(mut self) -> CompiledVerifier {
        let entry = self.copy_entry(0);
        let start = match self.kind {
            VerifierKind::Weak => entry,
            VerifierKind::Strong => self.gadget(entry),
        };
        self.v.set_start(start);

        for copy in 0..self.m {
            for path in 0..self.k() {
                for q in 0..self.src.state_count() {
                    for right in [false, true] {
                        self.sim_transitions(copy, path, q, right);
                    }
                }
                if copy + 1 < self.m {
                    self.rewind_transitions(copy, path);
                }
            }
        }
        CompiledVerifier { verifier: self.v, r: self.r, m: self.m, source: self.src.clone(), kind: self.kind }
    }

    fn gadget(&mut self, entry: StateId) -> StateId {
        let width = self.r + 1;
        let threshold = (1u64 << self.r) - 1;
        let states: Vec<Vec<StateId>> = (0..width)
            .map(|d| {
                (0..1u64 << d)
                    .map(|val| self.v.add_state(format!("gadget.{d}.{val}"), StateKind::Coin, CommId::NULL))
                    .collect()
            })
            .collect();
        for d in 0..width {
            for val in 0..1u64 << d {
                for bit in [false, true] {
                    let nv = val * 2 + u64::from(bit);
                    let next = if d + 1 == width {
                        if nv < threshold {
                            REJECT
                        } else {
                            entry
                        }
                    } else {
                        states[d as usize + 1][nv as usize]
                    };
                    self.v.add_transition(
                        states[d as usize][val as usize],
                        TapeSymbol::EndMarker,
                        CommId::NULL,
                        Some(bit),
                        next,
                        Move::Stay,
                    );
                }
            }
        }
        states[0][0]
    }

    /// Where a head moving `mv` from `here` ends up, given whether its last
    /// move was rightwards; escaping moves become stays.
    fn head_move(here: TapeSymbol, right: bool, mv: Move) -> (Move, bool) {
        let escapes = here.is_end_marker()
            && ((mv == Move::Left && !right) || (mv == Move::Right && right));
        match mv {
            _ if escapes => (Move::Stay, right),
            Move::Stay => (Move::Stay, right),
            Move::Left => (Move::Left, false),
            Move::Right => (Move::Right, true),
        }
    }

    fn sim_transitions(&mut self, copy: u32, path: usize, q: StateId, right: bool) {
        let from = self.sim_state(copy, path, q, right);
        let accepting = self.src.is_accepting(q);
        let last = copy + 1 == self.m;
        for (t, id) in self.symbols.clone() {
            let here = t.scanned[path];
            let target = match t.control {
                Control::Step if !accepting => {
                    let Some(rule) = self.src.transition_set(q, &t.scanned).nth(t.choice).cloned() else {
                        continue;
                    };
                    let (mv, right2) = Self::head_move(here, right, rule.moves[path]);
                    Some((self.sim_state(copy, path, rule.next, right2), mv))
                }
                Control::End if accepting && last => Some((ACCEPT, Move::Stay)),
                Control::Rewind if accepting && !last => {
                    let mv = if here.is_end_marker() && !right { Move::Stay } else { Move::Left };
                    Some((self.rewind_state(copy, path), mv))
                }
                Control::NextCopy if accepting && !last && here.is_end_marker() && !right => {
                    Some((self.copy_entry(copy + 1), Move::Stay))
                }
                _ => None,
            };
            if let Some((next, mv)) = target {
                self.v.add_transition(from, here, id, None, next, mv);
            }
        }
    }

    fn rewind_transitions(&mut self, copy: u32, path: usize) {
        let from = self.rewind_state(copy, path);
        for (t, id) in self.symbols.clone() {
            let here = t.scanned[path];
            // After a left move, a head on the marker is on the left one.
            match t.control {
                Control::Rewind => {
                    let mv = if here.is_end_marker() { Move::Stay } else { Move::Left };
                    self.v.add_transition(from, here, id, None, from, mv);
                }
                Control::NextCopy if here.is_end_marker() => {
                    let next = self.copy_entry(copy + 1);
                    self.v.add_transition(from, here, id, None, next, Move::Stay);
                }
                _ => {}
            }
        }
    }
}

impl CompiledVerifier {
    pub fn comm_of(&self, t: &TrackSymbol) -> Option<CommId> {
        self.verifier.comm_id(&t.to_string())
    }

    pub fn track_symbol(&self, id: CommId) -> Option<TrackSymbol> {
        TrackSymbol::parse(self.verifier.comm_name(id))
    }

    /// The certificate transcribing a shortest accepting run of the source
    /// automaton once per copy, with heads rewound between copies.
    pub fn honest_certificate(&self, x: &str) -> Result<Certificate, CompileError> {
        let run = self.source.accepting_path(x).ok_or_else(|| CompileError::NotMember(x.to_string()))?;
        let tape = Tape::new(x);
        let mut one_copy = Vec::new();
        for step in &run.steps {
            one_copy.push(TrackSymbol {
                scanned: self.source.scanned(&tape, &step.config),
                choice: step.choice,
                control: Control::Step,
            });
        }
        let mut out = Vec::new();
        for copy in 0..self.m {
            out.extend(one_copy.iter().cloned());
            if copy + 1 == self.m {
                out.push(TrackSymbol {
                    scanned: self.source.scanned(&tape, &run.last),
                    choice: 0,
                    control: Control::End,
                });
            } else {
                let far = run.last.heads.iter().copied().max().unwrap_or(0);
                for t in 0..far {
                    let scanned = run.last.heads.iter().map(|&p| tape.at(p.saturating_sub(t))).collect();
                    out.push(TrackSymbol { scanned, choice: 0, control: Control::Rewind });
                }
                out.push(TrackSymbol {
                    scanned: vec![TapeSymbol::EndMarker; self.source.head_count()],
                    choice: 0,
                    control: Control::NextCopy,
                });
            }
        }
        Ok(Certificate::new(
            out.iter().map(|t| self.comm_of(t).expect("symbol in the alphabet")).collect(),
        ))
    }

    /// Length of any honest certificate on inputs of length `n` is at most
    /// `m·(|Q|(n+2)^k + n + 1)`.
    pub fn certificate_length_bound(&self, n: usize) -> usize {
        self.m as usize * (self.source.configuration_bound(n) as usize + n + 1)
    }

    /// The error bound the construction guarantees on non-members.
    pub fn soundness_bound(&self) -> BigRational {
        let two_r = BigInt::one() << self.r;
        match self.kind {
            VerifierKind::Weak => {
                let miss = BigRational::one() - BigRational::new(BigInt::one(), two_r);
                (0..self.m).fold(BigRational::one(), |acc, _| acc * &miss)
            }
            VerifierKind::Strong => {
                let sq = &two_r * &two_r;
                BigRational::new(sq.clone() - 1, sq * 2)
            }
        }
    }

    /// Acceptance probability of an honest certificate.
    pub fn completeness(&self) -> BigRational {
        match self.kind {
            VerifierKind::Weak => BigRational::one(),
            VerifierKind::Strong => {
                let two_r = BigInt::one() << self.r;
                BigRational::new(two_r.clone() + 1, two_r * 2)
            }
        }
    }
}
