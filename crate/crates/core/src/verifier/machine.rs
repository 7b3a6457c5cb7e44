use std::collections::{BTreeMap, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::multihead::StateId;
use crate::tape::{HeadMode, Move, TapeSymbol, Zone};

/// Index into a verifier's communication alphabet.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct CommId(pub u32);

impl CommId {
    /// The null symbol: a state that sends it does not communicate.
    pub const NULL: CommId = CommId(0);
    /// Response seen by a verifier that reads past the end of its certificate.
    pub const PAD: CommId = CommId(1);
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum StateKind {
    Coin,
    Deterministic,
    Accept,
    Reject,
}

impl StateKind {
    pub fn is_halting(self) -> bool {
        matches!(self, StateKind::Accept | StateKind::Reject)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierState {
    pub name: String,
    pub kind: StateKind,
    pub send: CommId,
}

/// Lookup key of a verifier transition. `bit` is `Some` exactly for coin
/// states.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct TransitionKey {
    pub symbol: TapeSymbol,
    pub comm: CommId,
    pub bit: Option<bool>,
}

/// A finite-state verifier with a single input head, a coin budget, and a
/// communication symbol attached to every state.
///
/// State 0 is the accepting halt state and state 1 the rejecting one. A state
/// whose `send` symbol is not [`CommId::NULL`] communicates every time it is
/// entered, and its transitions are keyed by the response. Any missing
/// transition halts and rejects.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct VerifierMachine {
    states: Vec<VerifierState>,
    start: StateId,
    alphabet: Vec<char>,
    comm: Vec<String>,
    comm_index: HashMap<String, CommId>,
    mode: HeadMode,
    coin_budget: u32,
    transitions: Vec<HashMap<TransitionKey, (StateId, Move)>>,
}

pub const ACCEPT: StateId = 0;
pub const REJECT: StateId = 1;

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum VerifierViolation {
    UndeclaredState(StateId),
    HaltingHasTransitions(String),
    Mode { state: String, symbol: TapeSymbol },
    EndMarkerEscape { state: String, symbol: TapeSymbol },
    CoinKey { state: String },
    CommKey { state: String },
    UndeclaredSymbol { state: String, symbol: char },
    StartHalts,
}

impl fmt::Display for VerifierViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            VerifierViolation::UndeclaredState(s) => write!(f, "undeclared state id {s}"),
            VerifierViolation::HaltingHasTransitions(s) => {
                write!(f, "halting state {s} has transitions")
            }
            VerifierViolation::Mode { state, symbol } => {
                write!(f, "mode: state {state} on {symbol} moves against the head mode")
            }
            VerifierViolation::EndMarkerEscape { state, symbol } => {
                write!(f, "end-marker escape: state {state} on {symbol} can leave the tape")
            }
            VerifierViolation::CoinKey { state } => {
                write!(f, "state {state}: coin bits must be given exactly for coin states")
            }
            VerifierViolation::CommKey { state } => {
                write!(f, "state {state}: non-communicating states must read NULL")
            }
            VerifierViolation::UndeclaredSymbol { state, symbol } => {
                write!(f, "state {state} reads undeclared symbol '{symbol}'")
            }
            VerifierViolation::StartHalts => f.write_str("start state is a halting state"),
        }
    }
}

impl VerifierMachine {
    /// A verifier with only the two halting states; `comm_symbols` are
    /// appended to the built-in `NULL` and `PAD`.
    pub fn new(
        alphabet: &[char],
        comm_symbols: &[&str],
        mode: HeadMode,
        coin_budget: u32,
    ) -> VerifierMachine {
        let mut v = VerifierMachine {
            states: vec![
                VerifierState { name: "ACCEPT".into(), kind: StateKind::Accept, send: CommId::NULL },
                VerifierState { name: "REJECT".into(), kind: StateKind::Reject, send: CommId::NULL },
            ],
            start: ACCEPT,
            alphabet: alphabet.to_vec(),
            comm: Vec::new(),
            comm_index: HashMap::new(),
            mode,
            coin_budget,
            transitions: vec![HashMap::new(), HashMap::new()],
        };
        v.add_comm_symbol("NULL");
        v.add_comm_symbol("PAD");
        for s in comm_symbols {
            v.add_comm_symbol(s);
        }
        v
    }

    pub fn add_comm_symbol(&mut self, name: &str) -> CommId {
        if let Some(&id) = self.comm_index.get(name) {
            return id;
        }
        let id = CommId(self.comm.len() as u32);
        self.comm.push(name.to_string());
        self.comm_index.insert(name.to_string(), id);
        id
    }

    pub fn add_state(&mut self, name: impl Into<String>, kind: StateKind, send: CommId) -> StateId {
        self.states.push(VerifierState { name: name.into(), kind, send });
        self.transitions.push(HashMap::new());
        self.states.len() - 1
    }

    pub fn rename_halting(&mut self, accept: &str, reject: &str) {
        self.states[ACCEPT].name = accept.to_string();
        self.states[REJECT].name = reject.to_string();
    }

    pub fn set_start(&mut self, state: StateId) {
        self.start = state;
    }

    pub fn set_coin_budget(&mut self, budget: u32) {
        self.coin_budget = budget;
    }

    pub fn add_transition(
        &mut self,
        state: StateId,
        symbol: TapeSymbol,
        comm: CommId,
        bit: Option<bool>,
        next: StateId,
        mv: Move,
    ) {
        self.transitions[state].insert(TransitionKey { symbol, comm, bit }, (next, mv));
    }

    pub fn transition(
        &self,
        state: StateId,
        symbol: TapeSymbol,
        comm: CommId,
        bit: Option<bool>,
    ) -> Option<(StateId, Move)> {
        self.transitions[state].get(&TransitionKey { symbol, comm, bit }).copied()
    }

    /// Transitions of `state` in key order.
    pub fn transitions_of(&self, state: StateId) -> Vec<(TransitionKey, (StateId, Move))> {
        let sorted: BTreeMap<_, _> = self.transitions[state].iter().map(|(k, v)| (*k, *v)).collect();
        sorted.into_iter().collect()
    }

    pub fn transition_count(&self) -> usize {
        self.transitions.iter().map(HashMap::len).sum()
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn state(&self, id: StateId) -> &VerifierState {
        &self.states[id]
    }

    pub fn state_count(&self) -> usize {
        self.states.len()
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.states.iter().position(|s| s.name == name)
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn mode(&self) -> HeadMode {
        self.mode
    }

    pub fn coin_budget(&self) -> u32 {
        self.coin_budget
    }

    pub fn comm_alphabet(&self) -> &[String] {
        &self.comm
    }

    pub fn comm_id(&self, name: &str) -> Option<CommId> {
        self.comm_index.get(name).copied()
    }

    pub fn comm_name(&self, id: CommId) -> &str {
        &self.comm[id.0 as usize]
    }

    /// Symbols a certificate may contain: everything except `NULL` and `PAD`.
    pub fn certificate_alphabet(&self) -> Vec<CommId> {
        (2..self.comm.len() as u32).map(CommId).collect()
    }

    pub fn is_communicating(&self, state: StateId) -> bool {
        self.states[state].send != CommId::NULL
    }

    /// True when no state communicates.
    pub fn is_silent(&self) -> bool {
        self.states.iter().all(|s| s.send == CommId::NULL)
    }

    pub fn tape_symbols(&self) -> Vec<TapeSymbol> {
        std::iter::once(TapeSymbol::EndMarker)
            .chain(self.alphabet.iter().map(|&c| TapeSymbol::Letter(c)))
            .collect()
    }

    pub fn validate(&self) -> Vec<VerifierViolation> {
        let mut out = Vec::new();
        if self.start >= self.states.len() {
            out.push(VerifierViolation::UndeclaredState(self.start));
            return out;
        }
        if self.states[self.start].kind.is_halting() {
            out.push(VerifierViolation::StartHalts);
        }
        for (id, st) in self.states.iter().enumerate() {
            let trans = &self.transitions[id];
            if st.kind.is_halting() && !trans.is_empty() {
                out.push(VerifierViolation::HaltingHasTransitions(st.name.clone()));
            }
            let mut coin_key_bad = false;
            let mut comm_key_bad = false;
            for (key, &(next, mv)) in trans {
                if next >= self.states.len() {
                    out.push(VerifierViolation::UndeclaredState(next));
                    continue;
                }
                if let TapeSymbol::Letter(c) = key.symbol {
                    if !self.alphabet.contains(&c) {
                        out.push(VerifierViolation::UndeclaredSymbol { state: st.name.clone(), symbol: c });
                    }
                }
                coin_key_bad |= key.bit.is_some() != (st.kind == StateKind::Coin);
                comm_key_bad |= st.send == CommId::NULL && key.comm != CommId::NULL;
                if key.comm.0 as usize >= self.comm.len() {
                    comm_key_bad = true;
                }
                if !self.mode.allows(mv) {
                    out.push(VerifierViolation::Mode { state: st.name.clone(), symbol: key.symbol });
                }
            }
            if coin_key_bad {
                out.push(VerifierViolation::CoinKey { state: st.name.clone() });
            }
            if comm_key_bad {
                out.push(VerifierViolation::CommKey { state: st.name.clone() });
            }
        }
        if out.is_empty() {
            out.extend(self.escape_violations());
        }
        out
    }

    /// Zone analysis of the input head over `(state, zone)` pairs; moves into
    /// halting states are exempt.
    fn escape_violations(&self) -> Vec<VerifierViolation> {
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        let mut bad = std::collections::BTreeSet::new();
        seen.insert((self.start, Zone::Left));
        queue.push_back((self.start, Zone::Left));
        while let Some((state, zone)) = queue.pop_front() {
            for (key, &(next, mv)) in &self.transitions[state] {
                if !zone.admits(key.symbol) {
                    continue;
                }
                match zone.after(mv) {
                    None => {
                        if !self.states[next].kind.is_halting() {
                            bad.insert((state, key.symbol));
                        }
                    }
                    Some(zones) => {
                        for &z in zones {
                            if seen.insert((next, z)) {
                                queue.push_back((next, z));
                            }
                        }
                    }
                }
            }
        }
        bad.into_iter()
            .map(|(state, symbol)| VerifierViolation::EndMarkerEscape {
                state: self.states[state].name.clone(),
                symbol,
            })
            .collect()
    }
}
