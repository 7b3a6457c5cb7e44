use std::collections::{HashMap, HashSet};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use super::machine::{CommId, StateKind, VerifierMachine};
use crate::multihead::StateId;
use crate::tape::Tape;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Verdict {
    Accept,
    Reject,
    Nonhalt,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum VerifierError {
    #[error("coin budget exceeded: state {state} needs coin {needed} of a budget of {budget}")]
    CoinBudgetExceeded { state: String, needed: u32, budget: u32 },
    #[error("expected {expected} coin bits, got {got}")]
    CoinLength { expected: usize, got: usize },
    #[error("coin budget {0} is too large to enumerate")]
    BudgetTooLarge(u32),
    #[error("verifier communicates; a recognizer must be silent")]
    NotSilent,
}

/// A one-way certificate: the responses a verifier reads, in order.
#[derive(Clone, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Certificate {
    pub symbols: Vec<CommId>,
}

impl Certificate {
    pub fn new(symbols: Vec<CommId>) -> Certificate {
        Certificate { symbols }
    }

    pub fn len(&self) -> usize {
        self.symbols.len()
    }

    pub fn is_empty(&self) -> bool {
        self.symbols.is_empty()
    }

    /// Parses whitespace-separated symbol names.
    pub fn parse(v: &VerifierMachine, text: &str) -> Result<Certificate, String> {
        text.split_whitespace()
            .map(|t| v.comm_id(t).ok_or_else(|| format!("unknown certificate symbol '{t}'")))
            .collect::<Result<Vec<_>, _>>()
            .map(Certificate::new)
    }

    pub fn render(&self, v: &VerifierMachine) -> String {
        self.symbols.iter().map(|&s| v.comm_name(s)).collect::<Vec<_>>().join(" ")
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BranchOutcome {
    pub verdict: Verdict,
    pub steps: u64,
    pub coins_used: u32,
    /// `(sent, received)` per communication step.
    pub transcript: Vec<(CommId, CommId)>,
}

/// Exact probabilities over all coin strings.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct OutcomeDistribution {
    pub accept: BigRational,
    pub reject: BigRational,
    pub nonhalt: BigRational,
}

impl OutcomeDistribution {
    pub fn from_counts(accept: u64, reject: u64, nonhalt: u64) -> OutcomeDistribution {
        let total = BigInt::from(accept + reject + nonhalt);
        let r = |c: u64| BigRational::new(BigInt::from(c), total.clone());
        OutcomeDistribution { accept: r(accept), reject: r(reject), nonhalt: r(nonhalt) }
    }

    pub fn total(&self) -> BigRational {
        &self.accept + &self.reject + &self.nonhalt
    }

    pub fn is_normalized(&self) -> bool {
        let zero = BigRational::zero();
        let one = BigRational::one();
        [&self.accept, &self.reject, &self.nonhalt].iter().all(|p| **p >= zero && **p <= one)
            && self.total() == one
    }
}

impl fmt::Display for OutcomeDistribution {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "accept={} reject={} nonhalt={}",
            fraction(&self.accept),
            fraction(&self.reject),
            fraction(&self.nonhalt)
        )
    }
}

/// `p/q` in lowest terms, always with a denominator.
pub fn fraction(r: &BigRational) -> String {
    format!("{}/{}", r.numer(), r.denom())
}

/// Coin string number `index` of `budget` bits, most significant bit first.
pub fn coin_string(index: u64, budget: u32) -> Vec<bool> {
    (0..budget).map(|j| (index >> (budget - 1 - j)) & 1 == 1).collect()
}

pub(crate) const MAX_ENUMERABLE_BUDGET: u32 = 24;

/// Where a verifier is while waiting for its next response.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) struct Cursor {
    pub state: StateId,
    pub pos: usize,
    pub coins_used: u32,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub(crate) enum Pause {
    Halted(Verdict),
    Looped,
    /// In a communicating state that has not yet received its response.
    Awaiting(Cursor),
}

pub(crate) struct Advance {
    pub pause: Pause,
    pub steps: u64,
    pub coins_used: u32,
}

impl VerifierMachine {
    pub(crate) fn start_cursor(&self) -> Cursor {
        Cursor { state: self.start(), pos: 0, coins_used: 0 }
    }

    /// Runs from `cursor` until the machine halts, loops without
    /// communicating, or enters a communicating state. If `response` is given
    /// the cursor must be awaiting, and its pending step consumes it.
    pub(crate) fn advance(
        &self,
        tape: &Tape,
        coins: &[bool],
        mut cursor: Cursor,
        mut response: Option<CommId>,
    ) -> Result<Advance, VerifierError> {
        let mut seen: HashSet<(StateId, usize, u32)> = HashSet::new();
        let mut steps = 0u64;
        loop {
            let st = self.state(cursor.state);
            match st.kind {
                StateKind::Accept => return Ok(Advance { pause: Pause::Halted(Verdict::Accept), steps, coins_used: cursor.coins_used }),
                StateKind::Reject => return Ok(Advance { pause: Pause::Halted(Verdict::Reject), steps, coins_used: cursor.coins_used }),
                _ => {}
            }
            let comm = if st.send != CommId::NULL {
                match response.take() {
                    Some(r) => r,
                    None => {
                        return Ok(Advance { pause: Pause::Awaiting(cursor), steps, coins_used: cursor.coins_used })
                    },
                }
            } else {
                CommId::NULL
            };
            // Within a silent stretch a repeated configuration is a loop.
            if comm == CommId::NULL && !seen.insert((cursor.state, cursor.pos, cursor.coins_used)) {
                return Ok(Advance { pause: Pause::Looped, steps, coins_used: cursor.coins_used });
            }
            let bit = if st.kind == StateKind::Coin {
                if cursor.coins_used as usize >= coins.len() {
                    return Err(VerifierError::CoinBudgetExceeded {
                        state: st.name.clone(),
                        needed: cursor.coins_used + 1,
                        budget: self.coin_budget(),
                    });
                }
                let b = coins[cursor.coins_used as usize];
                cursor.coins_used += 1;
                Some(b)
            } else {
                None
            };
            steps += 1;
            match self.transition(cursor.state, tape.at(cursor.pos), comm, bit) {
                None => return Ok(Advance { pause: Pause::Halted(Verdict::Reject), steps, coins_used: cursor.coins_used }),
                Some((next, mv)) => {
                    cursor.state = next;
                    if !self.state(next).kind.is_halting() {
                        cursor.pos = tape.shift(cursor.pos, mv);
                    }
                }
            }
        }
    }

    fn check_coins(&self, coins: &[bool]) -> Result<(), VerifierError> {
        if coins.len() != self.coin_budget() as usize {
            return Err(VerifierError::CoinLength {
                expected: self.coin_budget() as usize,
                got: coins.len(),
            });
        }
        Ok(())
    }

    /// Runs one branch with a fixed coin string against a one-way
    /// certificate. Reading past the end of the certificate yields `PAD`.
    pub fn run_branch(
        &self,
        input: &str,
        coins: &[bool],
        cert: &Certificate,
    ) -> Result<BranchOutcome, VerifierError> {
        self.check_coins(coins)?;
        let tape = Tape::new(input);
        let mut next = 0usize;
        self.drive(&tape, coins, |_| {
            let r = cert.symbols.get(next).copied();
            if r.is_some() {
                next += 1;
            }
            (r.unwrap_or(CommId::PAD), r.is_none())
        })
    }

    /// Shared driver: `respond` returns the response to the transcript so far
    /// and whether the responder has become constant from here on.
    fn drive(
        &self,
        tape: &Tape,
        coins: &[bool],
        mut respond: impl FnMut(&[CommId]) -> (CommId, bool),
    ) -> Result<BranchOutcome, VerifierError> {
        let mut cursor = self.start_cursor();
        let mut response = None;
        let mut steps = 0;
        let mut transcript = Vec::new();
        let mut sent = Vec::new();
        let mut settled: HashSet<Cursor> = HashSet::new();
        loop {
            let adv = self.advance(tape, coins, cursor, response)?;
            steps += adv.steps;
            let verdict = match adv.pause {
                Pause::Halted(v) => v,
                Pause::Looped => Verdict::Nonhalt,
                Pause::Awaiting(c) => {
                    let send = self.state(c.state).send;
                    sent.push(send);
                    let (reply, constant) = respond(&sent);
                    if constant && !settled.insert(c) {
                        // Same waiting configuration with nothing left to vary.
                        Verdict::Nonhalt
                    } else {
                        transcript.push((send, reply));
                        cursor = c;
                        response = Some(reply);
                        continue;
                    }
                }
            };
            return Ok(BranchOutcome { verdict, steps, coins_used: adv.coins_used, transcript });
        }
    }

    fn enumerable_budget(&self) -> Result<u64, VerifierError> {
        if self.coin_budget() > MAX_ENUMERABLE_BUDGET {
            return Err(VerifierError::BudgetTooLarge(self.coin_budget()));
        }
        Ok(1u64 << self.coin_budget())
    }

    /// Exact outcome distribution over all `2^B` equally likely coin strings.
    pub fn outcome_distribution(
        &self,
        input: &str,
        cert: &Certificate,
    ) -> Result<OutcomeDistribution, VerifierError> {
        let total = self.enumerable_budget()?;
        let mut counts = [0u64; 3];
        for i in 0..total {
            let out = self.run_branch(input, &coin_string(i, self.coin_budget()), cert)?;
            counts[verdict_slot(out.verdict)] += 1;
        }
        Ok(OutcomeDistribution::from_counts(counts[0], counts[1], counts[2]))
    }

    /// Outcome distribution against an interactive prover. The prover sees
    /// only the symbols the verifier has sent, never the coins.
    pub fn interact_two_way(
        &self,
        input: &str,
        prover: &ProverStrategy,
    ) -> Result<OutcomeDistribution, VerifierError> {
        let total = self.enumerable_budget()?;
        let tape = Tape::new(input);
        let horizon = prover.horizon();
        let mut counts = [0u64; 3];
        for i in 0..total {
            let coins = coin_string(i, self.coin_budget());
            let out = self.drive(&tape, &coins, |sent| (prover.respond(sent), sent.len() > horizon))?;
            counts[verdict_slot(out.verdict)] += 1;
        }
        Ok(OutcomeDistribution::from_counts(counts[0], counts[1], counts[2]))
    }

    /// Deterministic majority vote over all coin strings of a silent
    /// verifier: accepts iff strictly more than half of the branches accept.
    pub fn derandomize_recognizer(&self, input: &str) -> Result<bool, VerifierError> {
        if !self.is_silent() {
            return Err(VerifierError::NotSilent);
        }
        let total = self.enumerable_budget()?;
        let tape = Tape::new(input);
        // Each branch is cut off after |Q|·(n+2) silent steps.
        let cutoff = (self.state_count() * (tape.input_len() + 2)) as u64;
        let mut accepted = 0u64;
        for i in 0..total {
            let coins = coin_string(i, self.coin_budget());
            if self.run_with_cutoff(&tape, &coins, cutoff)? == Verdict::Accept {
                accepted += 1;
            }
        }
        Ok(accepted > total / 2)
    }

    fn run_with_cutoff(&self, tape: &Tape, coins: &[bool], cutoff: u64) -> Result<Verdict, VerifierError> {
        let mut state = self.start();
        let mut pos = 0;
        let mut used = 0usize;
        // Tossing coins is bounded by the budget, so the cutoff is applied
        // to the steps after the last toss.
        let mut since_toss = 0u64;
        loop {
            let st = self.state(state);
            match st.kind {
                StateKind::Accept => return Ok(Verdict::Accept),
                StateKind::Reject => return Ok(Verdict::Reject),
                _ => {}
            }
            if since_toss > cutoff {
                return Ok(Verdict::Nonhalt);
            }
            let bit = if st.kind == StateKind::Coin {
                let b = *coins.get(used).ok_or_else(|| VerifierError::CoinBudgetExceeded {
                    state: st.name.clone(),
                    needed: used as u32 + 1,
                    budget: self.coin_budget(),
                })?;
                used += 1;
                since_toss = 0;
                Some(b)
            } else {
                since_toss += 1;
                None
            };
            match self.transition(state, tape.at(pos), CommId::NULL, bit) {
                None => return Ok(Verdict::Reject),
                Some((next, mv)) => {
                    state = next;
                    pos = tape.shift(pos, mv);
                }
            }
        }
    }
}

pub(crate) fn verdict_slot(v: Verdict) -> usize {
    match v {
        Verdict::Accept => 0,
        Verdict::Reject => 1,
        Verdict::Nonhalt => 2,
    }
}

/// A prover that answers as a function of the symbols sent so far.
///
/// Lookup order: the exact-transcript table, then the per-round sequence,
/// then the default response.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ProverStrategy {
    pub responses: HashMap<Vec<CommId>, CommId>,
    pub by_round: Vec<CommId>,
    pub default: CommId,
}

impl ProverStrategy {
    pub fn constant(symbol: CommId) -> ProverStrategy {
        ProverStrategy { responses: HashMap::new(), by_round: Vec::new(), default: symbol }
    }

    /// Answers the `j`-th request with `cert[j]`, and `PAD` afterwards.
    pub fn replay(cert: &Certificate) -> ProverStrategy {
        ProverStrategy {
            responses: HashMap::new(),
            by_round: cert.symbols.clone(),
            default: CommId::PAD,
        }
    }

    pub fn respond(&self, sent: &[CommId]) -> CommId {
        if let Some(&r) = self.responses.get(sent) {
            return r;
        }
        if let Some(&r) = sent.len().checked_sub(1).and_then(|i| self.by_round.get(i)) {
            return r;
        }
        self.default
    }

    /// Number of rounds after which every answer is the default.
    pub fn horizon(&self) -> usize {
        self.responses.keys().map(Vec::len).max().unwrap_or(0).max(self.by_round.len())
    }
}
