//! Removing the coins from a constant-coin verifier.
//!
//! [`expand_coins`] hardwires each of the `2^B` coin strings into its own
//! deterministic machine. A deterministic checker then simulates all of them
//! side by side against a [`MultiTrackCertificate`], one track per machine,
//! and accepts when a strict majority is seen to accept. With private coins the
//! prover only sees what the verifier sends, so machines whose sent symbols
//! agree so far must receive equal responses; [`TranscriptPartition`] tracks
//! which machines are still indistinguishable. [`to_one_way_multihead`] turns
//! the same simulation into a one-way multihead automaton that guesses the
//! responses itself.

use std::collections::{HashMap, VecDeque};

use thiserror::Error;

use crate::multihead::{MultiheadAutomaton, StateId, SymbolPattern};
use crate::tape::{HeadMode, Move, Tape, TapeSymbol};
use crate::verifier::{coin_string, CommId, StateKind, Verdict, VerifierError, VerifierMachine, ACCEPT, REJECT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DerandError {
    #[error(transparent)]
    Verifier(#[from] VerifierError),
    #[error("the input head must be one-way or real-time")]
    TwoWay,
}

/// The `2^B` deterministic machines obtained by fixing every coin string,
/// in coin-string order. With `B = 0` this is just the verifier itself.
pub fn expand_coins(v: &VerifierMachine) -> Result<Vec<VerifierMachine>, VerifierError> {
    let b = v.coin_budget();
    if b == 0 {
        return Ok(vec![v.clone()]);
    }
    if b > 20 {
        return Err(VerifierError::BudgetTooLarge(b));
    }
    let names: Vec<&str> = v.comm_alphabet()[2..].iter().map(String::as_str).collect();
    Ok((0..1u64 << b)
        .map(|i| {
            let coins = coin_string(i, b);
            let mut out = VerifierMachine::new(v.alphabet(), &names, v.mode(), 0);
            out.rename_halting(&v.state(ACCEPT).name, &v.state(REJECT).name);
            let mut ids: HashMap<(StateId, usize), StateId> = HashMap::new();
            let mut queue = VecDeque::new();
            let mut intern = |out: &mut VerifierMachine, queue: &mut VecDeque<(StateId, usize)>, q: StateId, t: usize| {
                if q == ACCEPT || q == REJECT {
                    return q;
                }
                *ids.entry((q, t)).or_insert_with(|| {
                    let st = v.state(q);
                    queue.push_back((q, t));
                    out.add_state(format!("{}@{t}", st.name), StateKind::Deterministic, st.send)
                })
            };
            let start = intern(&mut out, &mut queue, v.start(), 0);
            out.set_start(start);
            while let Some((q, t)) = queue.pop_front() {
                let from = intern(&mut out, &mut queue, q, t);
                for (key, (next, mv)) in v.transitions_of(q) {
                    let t2 = match key.bit {
                        Some(bit) if t < coins.len() && coins[t] == bit => t + 1,
                        Some(_) => continue,
                        None => t,
                    };
                    let to = intern(&mut out, &mut queue, next, t2);
                    out.add_transition(from, key.symbol, key.comm, None, to, mv);
                }
            }
            out
        })
        .collect())
}

/// One track entry: a response, `O` (the machine has halted) or `INF` (it
/// loops without communicating again).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum TrackEntry {
    Symbol(CommId),
    Halted,
    Infinite,
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct MultiTrackCertificate {
    pub columns: Vec<Vec<TrackEntry>>,
}

impl MultiTrackCertificate {
    /// One column per line, entries separated by `;`.
    pub fn parse(v: &VerifierMachine, text: &str) -> Result<MultiTrackCertificate, String> {
        let columns = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|line| {
                line.split(';')
                    .map(|tok| match tok.trim() {
                        "O" => Ok(TrackEntry::Halted),
                        "INF" => Ok(TrackEntry::Infinite),
                        t => v.comm_id(t).map(TrackEntry::Symbol).ok_or_else(|| format!("unknown track entry '{t}'")),
                    })
                    .collect()
            })
            .collect::<Result<_, _>>()?;
        Ok(MultiTrackCertificate { columns })
    }

    pub fn render(&self, v: &VerifierMachine) -> String {
        let mut out = String::new();
        for col in &self.columns {
            let entries: Vec<&str> = col
                .iter()
                .map(|e| match e {
                    TrackEntry::Symbol(s) => v.comm_name(*s),
                    TrackEntry::Halted => "O",
                    TrackEntry::Infinite => "INF",
                })
                .collect();
            out.push_str(&entries.join(";"));
            out.push('\n');
        }
        out
    }

    /// Track `i` as a sequence.
    pub fn track(&self, i: usize) -> Vec<TrackEntry> {
        self.columns.iter().filter_map(|c| c.get(i).copied()).collect()
    }
}

/// Machines grouped by the symbols they have sent so far.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TranscriptPartition {
    pub blocks: Vec<Vec<usize>>,
}

impl TranscriptPartition {
    pub fn whole(n: usize) -> TranscriptPartition {
        TranscriptPartition { blocks: vec![(0..n).collect()] }
    }

    /// Splits every block by `key`, keeping first-occurrence order.
    pub fn refine<K: PartialEq>(&self, key: impl Fn(usize) -> K) -> TranscriptPartition {
        let mut blocks = Vec::new();
        for block in &self.blocks {
            let mut groups: Vec<(K, Vec<usize>)> = Vec::new();
            for &i in block {
                let k = key(i);
                match groups.iter_mut().find(|(g, _)| *g == k) {
                    Some((_, members)) => members.push(i),
                    None => groups.push((k, vec![i])),
                }
            }
            blocks.extend(groups.into_iter().map(|(_, m)| m));
        }
        TranscriptPartition { blocks }
    }

    pub fn is_refinement_of(&self, coarser: &TranscriptPartition) -> bool {
        self.blocks.iter().all(|b| coarser.blocks.iter().any(|c| b.iter().all(|i| c.contains(i))))
    }

    /// Block index of every machine.
    pub fn labels(&self, n: usize) -> Vec<usize> {
        let mut out = vec![0; n];
        for (bi, block) in self.blocks.iter().enumerate() {
            for &i in block {
                out[i] = bi;
            }
        }
        out
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CheckOutcome {
    pub accepted: bool,
    pub accepting_machines: usize,
    pub machines: usize,
    /// Why the certificate was rejected outright, if it was.
    pub reason: Option<String>,
}

impl CheckOutcome {
    fn refuse(machines: usize, reason: String) -> CheckOutcome {
        CheckOutcome { accepted: false, accepting_machines: 0, machines, reason: Some(reason) }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Status {
    Awaiting { state: StateId, pos: usize },
    Halted(Verdict),
    Looped,
}

impl Status {
    fn entry_matches(self, e: TrackEntry) -> bool {
        matches!(
            (self, e),
            (Status::Awaiting { .. }, TrackEntry::Symbol(_))
                | (Status::Halted(_), TrackEntry::Halted)
                | (Status::Looped, TrackEntry::Infinite)
        )
    }
}

/// All expanded machines on one input.
struct Ensemble {
    machines: Vec<VerifierMachine>,
    tape: Tape,
    /// Silent steps after which a machine is declared looping.
    cutoff: usize,
}

impl Ensemble {
    fn new(v: &VerifierMachine, x: &str) -> Result<Ensemble, VerifierError> {
        let machines = expand_coins(v)?;
        let q = machines.iter().map(VerifierMachine::state_count).max().unwrap_or(1);
        Ok(Ensemble { machines, tape: Tape::new(x), cutoff: q * (x.chars().count() + 2) })
    }

    fn len(&self) -> usize {
        self.machines.len()
    }

    fn default_cap(&self) -> usize {
        self.cutoff * self.len()
    }

    fn start(&self) -> Vec<Status> {
        (0..self.len())
            .map(|i| self.settle(i, self.machines[i].start(), 0, None))
            .collect()
    }

    /// Runs machine `i` until it halts, loops, or waits for a response.
    fn settle(&self, i: usize, mut state: StateId, mut pos: usize, mut response: Option<CommId>) -> Status {
        let m = &self.machines[i];
        let mut silent = 0usize;
        loop {
            let st = m.state(state);
            match st.kind {
                StateKind::Accept => return Status::Halted(Verdict::Accept),
                StateKind::Reject => return Status::Halted(Verdict::Reject),
                _ => {}
            }
            let comm = if st.send == CommId::NULL {
                silent += 1;
                if silent > self.cutoff {
                    return Status::Looped;
                }
                CommId::NULL
            } else {
                match response.take() {
                    Some(r) => {
                        silent = 0;
                        r
                    }
                    None => return Status::Awaiting { state, pos },
                }
            };
            match m.transition(state, self.tape.at(pos), comm, None) {
                None => return Status::Halted(Verdict::Reject),
                Some((next, mv)) => {
                    state = next;
                    pos = self.tape.shift(pos, mv);
                }
            }
        }
    }

    fn feed(&self, i: usize, status: Status, response: CommId) -> Status {
        match status {
            Status::Awaiting { state, pos } => self.settle(i, state, pos, Some(response)),
            other => other,
        }
    }

    fn sent(&self, i: usize, status: Status) -> Option<CommId> {
        match status {
            Status::Awaiting { state, .. } => Some(self.machines[i].state(state).send),
            _ => None,
        }
    }

    fn accepting(statuses: &[Status]) -> usize {
        statuses.iter().filter(|s| **s == Status::Halted(Verdict::Accept)).count()
    }
}

/// Deterministic private-coin check of a multi-track certificate. `cap`
/// bounds the number of columns (default `c(n)·2^B` with `c(n) = |Q|(n+2)`).
pub fn check_private_coin(
    v: &VerifierMachine,
    x: &str,
    cert: &MultiTrackCertificate,
    cap: Option<usize>,
) -> Result<CheckOutcome, VerifierError> {
    let ens = Ensemble::new(v, x)?;
    let n = ens.len();
    let cap = cap.unwrap_or_else(|| ens.default_cap());
    if cert.columns.len() > cap {
        return Ok(CheckOutcome::refuse(n, format!("{} columns exceed the cap of {cap}", cert.columns.len())));
    }
    let mut statuses = ens.start();
    let mut partition = TranscriptPartition::whole(n);
    for (j, col) in cert.columns.iter().enumerate() {
        if col.len() != n {
            return Ok(CheckOutcome::refuse(n, format!("column {j} has {} entries, expected {n}", col.len())));
        }
        for i in 0..n {
            if !statuses[i].entry_matches(col[i]) {
                return Ok(CheckOutcome::refuse(n, format!("column {j}, track {i}: entry does not match the machine")));
            }
        }
        let refined = partition.refine(|i| ens.sent(i, statuses[i]));
        debug_assert!(refined.is_refinement_of(&partition));
        partition = refined;
        for block in &partition.blocks {
            let mut responses = block.iter().filter_map(|&i| match col[i] {
                TrackEntry::Symbol(s) => Some(s),
                _ => None,
            });
            if let Some(first) = responses.next() {
                if responses.any(|s| s != first) {
                    return Ok(CheckOutcome::refuse(
                        n,
                        format!("column {j}: machines with equal transcripts get different responses"),
                    ));
                }
            }
        }
        for i in 0..n {
            if let TrackEntry::Symbol(s) = col[i] {
                statuses[i] = ens.feed(i, statuses[i], s);
            }
        }
    }
    let accepting = Ensemble::accepting(&statuses);
    Ok(CheckOutcome { accepted: 2 * accepting > n, accepting_machines: accepting, machines: n, reason: None })
}

/// Searches breadth-first for a multi-track certificate of at most `cap`
/// columns that the private-coin checker accepts. Responses may be any
/// certificate symbol or `PAD`.
pub fn find_private_certificate(
    v: &VerifierMachine,
    x: &str,
    cap: Option<usize>,
) -> Result<Option<MultiTrackCertificate>, VerifierError> {
    let ens = Ensemble::new(v, x)?;
    let n = ens.len();
    let cap = cap.unwrap_or_else(|| ens.default_cap());
    let mut options = vec![CommId::PAD];
    options.extend(v.certificate_alphabet());

    type Node = (Vec<Status>, Vec<usize>);
    let root: Node = (ens.start(), vec![0; n]);
    let mut index: HashMap<Node, usize> = HashMap::new();
    let mut nodes: Vec<(Node, usize, Vec<TrackEntry>, usize)> = vec![(root.clone(), usize::MAX, Vec::new(), 0)];
    index.insert(root, 0);
    let mut queue = VecDeque::from([0usize]);
    while let Some(at) = queue.pop_front() {
        let ((statuses, labels), _, _, depth) = nodes[at].clone();
        if 2 * Ensemble::accepting(&statuses) > n {
            let mut columns = Vec::new();
            let mut k = at;
            while nodes[k].1 != usize::MAX {
                columns.push(nodes[k].2.clone());
                k = nodes[k].1;
            }
            columns.reverse();
            return Ok(Some(MultiTrackCertificate { columns }));
        }
        if depth >= cap || !statuses.iter().any(|s| matches!(s, Status::Awaiting { .. })) {
            continue;
        }
        let partition = label_partition(&labels).refine(|i| ens.sent(i, statuses[i]));
        let open: Vec<&Vec<usize>> = partition
            .blocks
            .iter()
            .filter(|b| b.iter().any(|&i| matches!(statuses[i], Status::Awaiting { .. })))
            .collect();
        let new_labels = partition.labels(n);
        let mut choice = vec![0usize; open.len()];
        loop {
            let mut column: Vec<TrackEntry> = statuses
                .iter()
                .map(|s| match s {
                    Status::Halted(_) => TrackEntry::Halted,
                    Status::Looped => TrackEntry::Infinite,
                    Status::Awaiting { .. } => TrackEntry::Halted,
                })
                .collect();
            let mut next = statuses.clone();
            for (bi, block) in open.iter().enumerate() {
                for &i in block.iter() {
                    if matches!(statuses[i], Status::Awaiting { .. }) {
                        column[i] = TrackEntry::Symbol(options[choice[bi]]);
                        next[i] = ens.feed(i, statuses[i], options[choice[bi]]);
                    }
                }
            }
            let node: Node = (next, new_labels.clone());
            if !index.contains_key(&node) {
                index.insert(node.clone(), nodes.len());
                queue.push_back(nodes.len());
                nodes.push((node, at, column, depth + 1));
            }
            // Next assignment of responses to open blocks.
            let mut d = 0;
            while d < choice.len() {
                choice[d] += 1;
                if choice[d] < options.len() {
                    break;
                }
                choice[d] = 0;
                d += 1;
            }
            if d == choice.len() {
                break;
            }
        }
    }
    Ok(None)
}

fn label_partition(labels: &[usize]) -> TranscriptPartition {
    let mut blocks: Vec<Vec<usize>> = Vec::new();
    let mut seen: HashMap<usize, usize> = HashMap::new();
    for (i, &l) in labels.iter().enumerate() {
        match seen.get(&l) {
            Some(&b) => blocks[b].push(i),
            None => {
                seen.insert(l, blocks.len());
                blocks.push(vec![i]);
            }
        }
    }
    TranscriptPartition { blocks }
}

/// Public-coin check: each machine is simulated on its own transcript and
/// no consistency between machines is required. A transcript that does not
/// match its machine counts as a rejecting machine.
pub fn check_public_coin(
    v: &VerifierMachine,
    x: &str,
    transcripts: &[Vec<TrackEntry>],
) -> Result<CheckOutcome, VerifierError> {
    let ens = Ensemble::new(v, x)?;
    let n = ens.len();
    if transcripts.len() != n {
        return Ok(CheckOutcome::refuse(n, format!("{} transcripts, expected {n}", transcripts.len())));
    }
    let mut accepting = 0;
    for (i, track) in transcripts.iter().enumerate() {
        let mut status = ens.settle(i, ens.machines[i].start(), 0, None);
        let mut ok = true;
        for &e in track {
            if !status.entry_matches(e) {
                ok = false;
                break;
            }
            if let TrackEntry::Symbol(s) = e {
                status = ens.feed(i, status, s);
            }
        }
        if ok && status == Status::Halted(Verdict::Accept) {
            accepting += 1;
        }
    }
    Ok(CheckOutcome { accepted: 2 * accepting > n, accepting_machines: accepting, machines: n, reason: None })
}

/// The multi-track certificate that gives every machine the responses of a
/// one-way certificate, with `PAD` past its end.
pub fn tracks_from_certificate(
    v: &VerifierMachine,
    x: &str,
    cert: &crate::verifier::Certificate,
) -> Result<MultiTrackCertificate, VerifierError> {
    let ens = Ensemble::new(v, x)?;
    let mut statuses = ens.start();
    let mut columns = Vec::new();
    let mut j = 0;
    while statuses.iter().any(|s| matches!(s, Status::Awaiting { .. })) && j < ens.default_cap() {
        let response = cert.symbols.get(j).copied().unwrap_or(CommId::PAD);
        let mut col = Vec::with_capacity(ens.len());
        for (i, s) in statuses.iter_mut().enumerate() {
            col.push(match *s {
                Status::Awaiting { .. } => {
                    *s = ens.feed(i, *s, response);
                    TrackEntry::Symbol(response)
                }
                Status::Halted(_) => TrackEntry::Halted,
                Status::Looped => TrackEntry::Infinite,
            });
        }
        columns.push(col);
        j += 1;
        if j >= cert.len() && statuses.iter().all(|s| !matches!(s, Status::Awaiting { .. })) {
            break;
        }
    }
    Ok(MultiTrackCertificate { columns })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Track {
    Run { state: StateId, still: usize },
    Got { state: StateId, response: CommId },
    Wait { state: StateId },
    Accept,
    Reject,
    Loop,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Phase {
    /// Bringing machine `i` to its next pause.
    Advance(usize),
    Guess,
}

#[derive(Clone, Debug, PartialEq, Eq, Hash)]
struct Ctl {
    tracks: Vec<Track>,
    labels: Vec<usize>,
    phase: Phase,
}

enum Settled {
    Accept,
    Dead,
    Ctl(Ctl),
}

/// A one-way nondeterministic automaton with one head per coin string that
/// accepts exactly the inputs on which some prover strategy makes a strict
/// majority of the machines accept. Head `i` is machine `i`'s input head.
pub fn to_one_way_multihead(v: &VerifierMachine) -> Result<MultiheadAutomaton, DerandError> {
    if !v.mode().is_one_way() {
        return Err(DerandError::TwoWay);
    }
    let machines = expand_coins(v)?;
    let n = machines.len();
    let mut options = vec![CommId::PAD];
    options.extend(v.certificate_alphabet());
    let symbols: Vec<TapeSymbol> = std::iter::once(TapeSymbol::EndMarker)
        .chain(v.alphabet().iter().map(|&c| TapeSymbol::Letter(c)))
        .collect();

    let settle = |mut c: Ctl| -> Settled {
        for (i, t) in c.tracks.iter_mut().enumerate() {
            if let Track::Run { state, .. } = *t {
                let st = machines[i].state(state);
                *t = match st.kind {
                    StateKind::Accept => Track::Accept,
                    StateKind::Reject => Track::Reject,
                    _ if st.send != CommId::NULL => Track::Wait { state },
                    _ => *t,
                };
            }
        }
        if let Phase::Advance(mut i) = c.phase {
            while i < n && !matches!(c.tracks[i], Track::Run { .. } | Track::Got { .. }) {
                i += 1;
            }
            c.phase = if i < n { Phase::Advance(i) } else { Phase::Guess };
        }
        if c.phase == Phase::Guess {
            let accepting = c.tracks.iter().filter(|t| **t == Track::Accept).count();
            if 2 * accepting > n {
                return Settled::Accept;
            }
            if !c.tracks.iter().any(|t| matches!(t, Track::Wait { .. })) {
                return Settled::Dead;
            }
        }
        Settled::Ctl(c)
    };

    let mut out = MultiheadAutomaton::empty(v.alphabet(), vec![HeadMode::OneWay; n]);
    let accept = out.add_state("accept");
    out.set_accepting(accept, true);
    let dead = out.add_state("dead");
    let mut ids: HashMap<Ctl, StateId> = HashMap::new();
    let mut queue: VecDeque<Ctl> = VecDeque::new();
    let mut intern = |out: &mut MultiheadAutomaton, queue: &mut VecDeque<Ctl>, s: Settled| -> StateId {
        match s {
            Settled::Accept => accept,
            Settled::Dead => dead,
            Settled::Ctl(c) => *ids.entry(c.clone()).or_insert_with(|| {
                queue.push_back(c);
                out.add_state(format!("ctl{}", out.state_count()))
            }),
        }
    };

    let start = Ctl {
        tracks: machines.iter().map(|m| Track::Run { state: m.start(), still: 0 }).collect(),
        labels: vec![0; n],
        phase: Phase::Advance(0),
    };
    let start_id = intern(&mut out, &mut queue, settle(start));
    out.set_start(start_id);

    while let Some(c) = queue.pop_front() {
        let from = intern(&mut out, &mut queue, Settled::Ctl(c.clone()));
        match c.phase {
            Phase::Advance(i) => {
                let m = &machines[i];
                for &sym in &symbols {
                    let (state, comm, still) = match c.tracks[i] {
                        Track::Run { state, still } => (state, CommId::NULL, still),
                        Track::Got { state, response } => (state, response, 0),
                        _ => unreachable!("settled controls advance live machines"),
                    };
                    let mut next = c.clone();
                    let mut mv = Move::Stay;
                    next.tracks[i] = match m.transition(state, sym, comm, None) {
                        None => Track::Reject,
                        Some((q, _)) if m.state(q).kind.is_halting() => Track::Run { state: q, still: 0 },
                        Some((q, step)) => {
                            mv = step;
                            let still = if step == Move::Stay { still + 1 } else { 0 };
                            if still > m.state_count() {
                                Track::Loop
                            } else {
                                Track::Run { state: q, still }
                            }
                        }
                    };
                    let mut pattern = vec![SymbolPattern::Any; n];
                    pattern[i] = SymbolPattern::Exact(sym);
                    let mut moves = vec![Move::Stay; n];
                    moves[i] = mv;
                    let to = intern(&mut out, &mut queue, settle(next));
                    out.add_rule(from, pattern, to, moves);
                }
            }
            Phase::Guess => {
                let partition = label_partition(&c.labels).refine(|i| match c.tracks[i] {
                    Track::Wait { state } => Some(machines[i].state(state).send),
                    _ => None,
                });
                let labels = partition.labels(n);
                let open: Vec<Vec<usize>> = partition
                    .blocks
                    .iter()
                    .filter(|b| b.iter().any(|&i| matches!(c.tracks[i], Track::Wait { .. })))
                    .cloned()
                    .collect();
                let mut choice = vec![0usize; open.len()];
                loop {
                    let mut next = c.clone();
                    next.labels = labels.clone();
                    next.phase = Phase::Advance(0);
                    for (bi, block) in open.iter().enumerate() {
                        for &i in block {
                            if let Track::Wait { state } = c.tracks[i] {
                                next.tracks[i] = Track::Got { state, response: options[choice[bi]] };
                            }
                        }
                    }
                    let to = intern(&mut out, &mut queue, settle(next));
                    out.add_rule(from, vec![SymbolPattern::Any; n], to, vec![Move::Stay; n]);
                    let mut d = 0;
                    while d < choice.len() {
                        choice[d] += 1;
                        if choice[d] < options.len() {
                            break;
                        }
                        choice[d] = 0;
                        d += 1;
                    }
                    if d == choice.len() {
                        break;
                    }
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_weak;
    use crate::showcase::{build_twin_verifier, twin_certificate, twin_oracle, twin_recognizer};
    use crate::tape::strings_up_to;
    use crate::verifier::Certificate;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn expansion_counts_and_mixture() {
        let v = build_twin_verifier();
        let ms = expand_coins(&v).unwrap();
        assert_eq!(ms.len(), 8);
        for x in ["aca", "acb", "abcab", "c"] {
            let cert = Certificate::parse(&v, "a").unwrap();
            let accepted = ms
                .iter()
                .filter(|m| m.run_branch(x, &[], &cert).unwrap().verdict == Verdict::Accept)
                .count();
            let d = v.outcome_distribution(x, &cert).unwrap();
            assert_eq!(d.accept, ratio(accepted as i64, 8), "{x}");
        }
        let c = compile_weak(&twin_recognizer(), &ratio(1, 4)).unwrap();
        assert_eq!(expand_coins(&c.verifier).unwrap().len(), 4);
        let mut zero = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        let s = zero.add_state("s", StateKind::Deterministic, CommId::NULL);
        zero.set_start(s);
        assert_eq!(expand_coins(&zero).unwrap(), vec![zero.clone()]);
    }

    #[test]
    fn partition_refines() {
        let p = TranscriptPartition::whole(4);
        let q = p.refine(|i| i % 2);
        assert_eq!(q.blocks, vec![vec![0, 2], vec![1, 3]]);
        assert!(q.is_refinement_of(&p));
        assert!(!p.is_refinement_of(&q));
        assert_eq!(q.labels(4), vec![0, 1, 0, 1]);
    }

    #[test]
    fn honest_tracks_accepted() {
        let v = build_twin_verifier();
        for x in ["c", "aca", "abcab"] {
            let cert = twin_certificate(&v, x).unwrap();
            let tracks = tracks_from_certificate(&v, x, &cert).unwrap();
            let out = check_private_coin(&v, x, &tracks, None).unwrap();
            assert!(out.accepted, "{x}: {out:?}");
            assert_eq!(out.accepting_machines, 6);
            let public: Vec<_> = (0..8).map(|i| tracks.track(i)).collect();
            assert!(check_public_coin(&v, x, &public).unwrap().accepted);
        }
    }

    #[test]
    fn inconsistent_responses_rejected() {
        let v = build_twin_verifier();
        let cert = twin_certificate(&v, "aca").unwrap();
        let mut tracks = tracks_from_certificate(&v, "aca", &cert).unwrap();
        let b = v.comm_id("b").unwrap();
        // Find two machines awaiting in the first column and split their answers.
        let first = &mut tracks.columns[0];
        let awaiting: Vec<usize> =
            (0..8).filter(|&i| matches!(first[i], TrackEntry::Symbol(_))).collect();
        assert!(awaiting.len() >= 2);
        first[awaiting[1]] = TrackEntry::Symbol(b);
        let out = check_private_coin(&v, "aca", &tracks, None).unwrap();
        assert!(!out.accepted);
        assert!(out.reason.unwrap().contains("different responses"));
        // Without consistency requirements the other machines still count.
        let public: Vec<_> = (0..8).map(|i| tracks.track(i)).collect();
        let p = check_public_coin(&v, "aca", &public).unwrap();
        assert!(p.accepting_machines >= 5);
    }

    #[test]
    fn malformed_columns_rejected() {
        let v = build_twin_verifier();
        let cert = MultiTrackCertificate { columns: vec![vec![TrackEntry::Halted; 3]] };
        let out = check_private_coin(&v, "c", &cert, None).unwrap();
        assert!(!out.accepted);
        assert!(out.reason.is_some());
    }

    #[test]
    fn private_search_matches_twin() {
        let v = build_twin_verifier();
        for x in strings_up_to(&['a', 'b', 'c'], 4) {
            let found = find_private_certificate(&v, &x, None).unwrap();
            assert_eq!(found.is_some(), twin_oracle(&x), "{x}");
            if let Some(cert) = found {
                assert!(check_private_coin(&v, &x, &cert, None).unwrap().accepted);
            }
        }
    }

    #[test]
    fn one_way_automaton_for_twin() {
        let c = compile_weak(&twin_recognizer(), &ratio(1, 2)).unwrap();
        let m = to_one_way_multihead(&c.verifier).unwrap();
        assert_eq!(m.head_count(), 2);
        assert!(m.validate().is_ok(), "{}", m.validate());
        for x in strings_up_to(&['a', 'b', 'c'], 4) {
            assert_eq!(m.accepts(&x), twin_oracle(&x), "{x}");
        }
    }

    #[test]
    fn all_rejecting_gives_empty_language() {
        let mut v = VerifierMachine::new(&['a'], &[], HeadMode::OneWay, 1);
        let s = v.add_state("s", StateKind::Coin, CommId::NULL);
        v.set_start(s);
        v.add_transition(s, TapeSymbol::EndMarker, CommId::NULL, Some(true), REJECT, Move::Stay);
        let m = to_one_way_multihead(&v).unwrap();
        assert!(m.enumerate_language(3).is_empty());
        let two = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        assert_eq!(to_one_way_multihead(&two).unwrap_err(), DerandError::TwoWay);
    }
}
