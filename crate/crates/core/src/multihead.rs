//! Multihead finite automata over end-marked inputs.
//!
//! A [`MultiheadAutomaton`] has `k` heads on a read-only tape. Transitions are
//! stored per state as an ordered list of [`Rule`]s whose patterns are matched
//! against the `k` scanned symbols; the rules that match a given scan form the
//! transition set for that scan, and their order is the order in which
//! nondeterministic choices are numbered.
//!
//! Accepting states have no outgoing rules, and a scan with no matching rule
//! halts and rejects. Recognition is reachability over the finite
//! configuration graph, so looping branches need no special handling.

use std::collections::{BTreeSet, HashMap, HashSet, VecDeque};
use std::fmt;

use crate::tape::{strings_up_to, HeadMode, Move, Tape, TapeSymbol, Zone};

pub type StateId = usize;

/// What a rule expects to see under one head.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum SymbolPattern {
    Any,
    AnyLetter,
    Exact(TapeSymbol),
}

impl SymbolPattern {
    pub fn matches(self, sym: TapeSymbol) -> bool {
        match self {
            SymbolPattern::Any => true,
            SymbolPattern::AnyLetter => !sym.is_end_marker(),
            SymbolPattern::Exact(s) => s == sym,
        }
    }

    fn overlaps(self, other: SymbolPattern) -> bool {
        use SymbolPattern::*;
        match (self, other) {
            (Any, _) | (_, Any) => true,
            (AnyLetter, AnyLetter) => true,
            (AnyLetter, Exact(s)) | (Exact(s), AnyLetter) => !s.is_end_marker(),
            (Exact(a), Exact(b)) => a == b,
        }
    }

    fn admits_zone(self, zone: Zone) -> bool {
        match self {
            SymbolPattern::Any => true,
            SymbolPattern::AnyLetter => zone == Zone::Interior,
            SymbolPattern::Exact(s) => zone.admits(s),
        }
    }

    pub fn parse(token: &str) -> Option<SymbolPattern> {
        match token {
            "*" => Some(SymbolPattern::Any),
            "_" => Some(SymbolPattern::AnyLetter),
            t => TapeSymbol::parse(t).map(SymbolPattern::Exact),
        }
    }
}

impl fmt::Display for SymbolPattern {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SymbolPattern::Any => f.write_str("*"),
            SymbolPattern::AnyLetter => f.write_str("_"),
            SymbolPattern::Exact(s) => write!(f, "{s}"),
        }
    }
}

impl From<TapeSymbol> for SymbolPattern {
    fn from(s: TapeSymbol) -> Self {
        SymbolPattern::Exact(s)
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Rule {
    pub pattern: Vec<SymbolPattern>,
    pub next: StateId,
    pub moves: Vec<Move>,
}

impl Rule {
    pub fn matches(&self, scanned: &[TapeSymbol]) -> bool {
        self.pattern.len() == scanned.len()
            && self.pattern.iter().zip(scanned).all(|(p, &s)| p.matches(s))
    }
}

/// State plus head positions; positions range over `0..=n+1`.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Configuration {
    pub state: StateId,
    pub heads: Vec<usize>,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MultiheadAutomaton {
    state_names: Vec<String>,
    start: StateId,
    accepting: Vec<bool>,
    alphabet: Vec<char>,
    modes: Vec<HeadMode>,
    rules: Vec<Vec<Rule>>,
}

/// A single broken invariant found by [`MultiheadAutomaton::validate`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Violation {
    NoHeads,
    UndeclaredState { state: StateId },
    UndeclaredSymbol { state: String, rule: usize, symbol: char },
    Arity { state: String, rule: usize },
    Mode { state: String, rule: usize, head: usize },
    EndMarkerEscape { state: String, rule: usize, head: usize },
    AcceptingHasRules { state: String },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Violation::NoHeads => f.write_str("automaton has no heads"),
            Violation::UndeclaredState { state } => write!(f, "undeclared state id {state}"),
            Violation::UndeclaredSymbol { state, rule, symbol } => {
                write!(f, "undeclared symbol '{symbol}' in rule {rule} of state {state}")
            }
            Violation::Arity { state, rule } => {
                write!(f, "rule {rule} of state {state} has the wrong number of heads")
            }
            Violation::Mode { state, rule, head } => {
                write!(f, "mode: rule {rule} of state {state} moves head {head} against its mode")
            }
            Violation::EndMarkerEscape { state, rule, head } => write!(
                f,
                "end-marker escape: rule {rule} of state {state} can move head {head} off the tape"
            ),
            Violation::AcceptingHasRules { state } => {
                write!(f, "accepting state {state} has outgoing rules")
            }
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_ok() {
            return f.write_str("valid");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                f.write_str("; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

/// One step of an accepting run: the configuration and the index of the
/// transition taken from it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RunStep {
    pub config: Configuration,
    pub choice: usize,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct AcceptingRun {
    pub steps: Vec<RunStep>,
    pub last: Configuration,
}

impl AcceptingRun {
    pub fn len(&self) -> usize {
        self.steps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.steps.is_empty()
    }
}

impl MultiheadAutomaton {
    /// An automaton with the given alphabet and one head per entry of
    /// `modes`. It starts with a single non-accepting state `q0`.
    pub fn new(alphabet: &[char], modes: Vec<HeadMode>) -> MultiheadAutomaton {
        MultiheadAutomaton {
            state_names: vec!["q0".to_string()],
            start: 0,
            accepting: vec![false],
            alphabet: alphabet.to_vec(),
            modes,
            rules: vec![Vec::new()],
        }
    }

    /// Like [`new`](Self::new) but with no states at all; used by the parser.
    pub fn empty(alphabet: &[char], modes: Vec<HeadMode>) -> MultiheadAutomaton {
        MultiheadAutomaton {
            state_names: Vec::new(),
            start: 0,
            accepting: Vec::new(),
            alphabet: alphabet.to_vec(),
            modes,
            rules: Vec::new(),
        }
    }

    pub fn add_state(&mut self, name: impl Into<String>) -> StateId {
        self.state_names.push(name.into());
        self.accepting.push(false);
        self.rules.push(Vec::new());
        self.state_names.len() - 1
    }

    pub fn rename_state(&mut self, state: StateId, name: impl Into<String>) {
        self.state_names[state] = name.into();
    }

    pub fn set_start(&mut self, state: StateId) {
        self.start = state;
    }

    pub fn set_accepting(&mut self, state: StateId, accepting: bool) {
        self.accepting[state] = accepting;
    }

    pub fn add_rule(
        &mut self,
        state: StateId,
        pattern: Vec<SymbolPattern>,
        next: StateId,
        moves: Vec<Move>,
    ) {
        self.rules[state].push(Rule { pattern, next, moves });
    }

    pub fn state_id(&self, name: &str) -> Option<StateId> {
        self.state_names.iter().position(|n| n == name)
    }

    pub fn state_name(&self, state: StateId) -> &str {
        &self.state_names[state]
    }

    pub fn state_count(&self) -> usize {
        self.state_names.len()
    }

    pub fn head_count(&self) -> usize {
        self.modes.len()
    }

    pub fn modes(&self) -> &[HeadMode] {
        &self.modes
    }

    pub fn alphabet(&self) -> &[char] {
        &self.alphabet
    }

    pub fn start(&self) -> StateId {
        self.start
    }

    pub fn is_accepting(&self, state: StateId) -> bool {
        self.accepting[state]
    }

    pub fn rules(&self, state: StateId) -> &[Rule] {
        &self.rules[state]
    }

    /// Rules applicable to `scanned` in `state`, in choice order.
    pub fn transition_set<'a>(
        &'a self,
        state: StateId,
        scanned: &'a [TapeSymbol],
    ) -> impl Iterator<Item = &'a Rule> + 'a {
        self.rules[state].iter().filter(move |r| r.matches(scanned))
    }

    /// Largest transition set over all states and scans (at least 1).
    pub fn max_choices(&self) -> usize {
        let mut best = 1;
        let syms: Vec<TapeSymbol> = std::iter::once(TapeSymbol::EndMarker)
            .chain(self.alphabet.iter().map(|&c| TapeSymbol::Letter(c)))
            .collect();
        for state in 0..self.state_count() {
            for scan in all_scans(&syms, self.head_count()) {
                best = best.max(self.transition_set(state, &scan).count());
            }
        }
        best
    }

    /// True iff no scan in any state has two applicable rules.
    pub fn is_deterministic(&self) -> bool {
        self.rules.iter().all(|rules| {
            rules.iter().enumerate().all(|(i, a)| {
                rules[i + 1..].iter().all(|b| {
                    !a.pattern.iter().zip(&b.pattern).all(|(p, q)| p.overlaps(*q))
                })
            })
        })
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let k = self.head_count();
        if k == 0 {
            violations.push(Violation::NoHeads);
        }
        if self.start >= self.state_count() {
            violations.push(Violation::UndeclaredState { state: self.start });
        }
        for (state, rules) in self.rules.iter().enumerate() {
            let name = &self.state_names[state];
            if self.accepting[state] && !rules.is_empty() {
                violations.push(Violation::AcceptingHasRules { state: name.clone() });
            }
            for (ri, rule) in rules.iter().enumerate() {
                if rule.pattern.len() != k || rule.moves.len() != k {
                    violations.push(Violation::Arity { state: name.clone(), rule: ri });
                    continue;
                }
                if rule.next >= self.state_count() {
                    violations.push(Violation::UndeclaredState { state: rule.next });
                }
                for p in &rule.pattern {
                    if let SymbolPattern::Exact(TapeSymbol::Letter(c)) = p {
                        if !self.alphabet.contains(c) {
                            violations.push(Violation::UndeclaredSymbol {
                                state: name.clone(),
                                rule: ri,
                                symbol: *c,
                            });
                        }
                    }
                }
                for (h, &mv) in rule.moves.iter().enumerate() {
                    if !self.modes[h].allows(mv) {
                        violations.push(Violation::Mode { state: name.clone(), rule: ri, head: h });
                    }
                }
            }
        }
        if violations.is_empty() {
            violations.extend(self.escape_violations());
        }
        ValidationReport { violations }
    }

    /// Per-head zone analysis: explores `(state, zone of head h)` pairs with
    /// the other heads unconstrained and flags any rule that can push head
    /// `h` past a marker. Rules entering an accepting state are exempt since
    /// the machine halts there.
    fn escape_violations(&self) -> Vec<Violation> {
        let mut out = BTreeSet::new();
        for h in 0..self.head_count() {
            let mut seen = HashSet::new();
            let mut queue = VecDeque::new();
            seen.insert((self.start, Zone::Left));
            queue.push_back((self.start, Zone::Left));
            while let Some((state, zone)) = queue.pop_front() {
                for (ri, rule) in self.rules[state].iter().enumerate() {
                    if !rule.pattern[h].admits_zone(zone) {
                        continue;
                    }
                    match zone.after(rule.moves[h]) {
                        None => {
                            if !self.accepting[rule.next] {
                                out.insert((state, ri, h));
                            }
                        }
                        Some(zones) => {
                            for &z in zones {
                                if seen.insert((rule.next, z)) {
                                    queue.push_back((rule.next, z));
                                }
                            }
                        }
                    }
                }
            }
        }
        out.into_iter()
            .map(|(state, rule, head)| Violation::EndMarkerEscape {
                state: self.state_names[state].clone(),
                rule,
                head,
            })
            .collect()
    }

    pub fn start_config(&self) -> Configuration {
        Configuration { state: self.start, heads: vec![0; self.head_count()] }
    }

    pub fn scanned(&self, tape: &Tape, c: &Configuration) -> Vec<TapeSymbol> {
        c.heads.iter().map(|&p| tape.at(p)).collect()
    }

    fn step_choices(&self, tape: &Tape, c: &Configuration) -> Vec<(usize, Configuration)> {
        if self.accepting[c.state] {
            return Vec::new();
        }
        let scan = self.scanned(tape, c);
        self.transition_set(c.state, &scan)
            .enumerate()
            .map(|(choice, rule)| {
                let heads = c
                    .heads
                    .iter()
                    .zip(&rule.moves)
                    .map(|(&p, &mv)| tape.shift(p, mv))
                    .collect();
                (choice, Configuration { state: rule.next, heads })
            })
            .collect()
    }

    /// Configurations reachable in one step, without duplicates, in choice
    /// order. Empty for accepting configurations and for scans with no rule.
    pub fn successors(&self, tape: &Tape, c: &Configuration) -> Vec<Configuration> {
        let mut out: Vec<Configuration> = Vec::new();
        for (_, next) in self.step_choices(tape, c) {
            if !out.contains(&next) {
                out.push(next);
            }
        }
        out
    }

    /// The configuration reached from `c` by transition `choice`.
    pub fn apply_choice(
        &self,
        tape: &Tape,
        c: &Configuration,
        choice: usize,
    ) -> Option<Configuration> {
        self.step_choices(tape, c)
            .into_iter()
            .find(|(i, _)| *i == choice)
            .map(|(_, next)| next)
    }

    pub fn accepts(&self, input: &str) -> bool {
        self.accepting_path(input).is_some()
    }

    /// A shortest accepting run, found breadth-first with successors visited
    /// in choice order.
    pub fn accepting_path(&self, input: &str) -> Option<AcceptingRun> {
        let tape = Tape::new(input);
        let start = self.start_config();
        let mut nodes: Vec<(Configuration, usize, usize)> = vec![(start.clone(), usize::MAX, 0)];
        let mut index: HashMap<Configuration, usize> = HashMap::new();
        index.insert(start, 0);
        let mut cursor = 0;
        while cursor < nodes.len() {
            let current = nodes[cursor].0.clone();
            if self.accepting[current.state] {
                return Some(self.unwind(&nodes, cursor));
            }
            for (choice, next) in self.step_choices(&tape, &current) {
                if !index.contains_key(&next) {
                    index.insert(next.clone(), nodes.len());
                    nodes.push((next, cursor, choice));
                }
            }
            cursor += 1;
        }
        None
    }

    fn unwind(&self, nodes: &[(Configuration, usize, usize)], end: usize) -> AcceptingRun {
        let mut steps = Vec::new();
        let mut at = end;
        while nodes[at].1 != usize::MAX {
            let (_, parent, choice) = nodes[at];
            steps.push(RunStep { config: nodes[parent].0.clone(), choice });
            at = parent;
        }
        steps.reverse();
        AcceptingRun { steps, last: nodes[end].0.clone() }
    }

    /// Every accepted string of length at most `max_len`.
    pub fn enumerate_language(&self, max_len: usize) -> BTreeSet<String> {
        strings_up_to(&self.alphabet, max_len)
            .into_iter()
            .filter(|x| self.accepts(x))
            .collect()
    }

    /// Number of steps on the longest computation branch, or `None` if some
    /// branch never halts (a reachable cycle in the configuration graph).
    pub fn longest_branch(&self, input: &str) -> Option<usize> {
        let tape = Tape::new(input);
        // 0 = unvisited, 1 = on the stack, 2 = done
        let mut color: HashMap<Configuration, u8> = HashMap::new();
        let mut longest: HashMap<Configuration, usize> = HashMap::new();
        let start = self.start_config();
        let mut stack: Vec<(Configuration, Vec<Configuration>)> = Vec::new();
        color.insert(start.clone(), 1);
        let succ = self.successors(&tape, &start);
        stack.push((start, succ));
        while let Some((node, pending)) = stack.last_mut() {
            match pending.pop() {
                Some(next) => match color.get(&next).copied().unwrap_or(0) {
                    1 => return None,
                    2 => {}
                    _ => {
                        color.insert(next.clone(), 1);
                        let succ = self.successors(&tape, &next);
                        stack.push((next, succ));
                    }
                },
                None => {
                    let node = node.clone();
                    let best = self
                        .successors(&tape, &node)
                        .iter()
                        .map(|s| longest[s] + 1)
                        .max()
                        .unwrap_or(0);
                    longest.insert(node.clone(), best);
                    color.insert(node, 2);
                    stack.pop();
                }
            }
        }
        Some(longest[&self.start_config()])
    }

    /// Upper bound `|Q|·(n+2)^k` on the number of configurations for inputs of
    /// length `n`.
    pub fn configuration_bound(&self, n: usize) -> u128 {
        (self.state_count() as u128) * ((n as u128) + 2).pow(self.head_count() as u32)
    }
}

pub(crate) fn all_scans(syms: &[TapeSymbol], k: usize) -> Vec<Vec<TapeSymbol>> {
    let mut out = vec![Vec::new()];
    for _ in 0..k {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                syms.iter().map(move |&s| {
                    let mut v = prefix.clone();
                    v.push(s);
                    v
                })
            })
            .collect();
    }
    out
}
