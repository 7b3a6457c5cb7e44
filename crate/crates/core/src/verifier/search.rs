//! Adversarial certificate search.
//!
//! All branches of a verifier read the same certificate one way, so after a
//! prefix of length `L` every live branch is waiting for symbol `L`. The
//! branches' joint situation (an *ensemble*) therefore determines everything
//! that later symbols can do, and the best certificate of length at most
//! `max_len` is the best ensemble reachable within `max_len` symbols, scored
//! by what happens when the certificate ends there. A breadth-first search
//! over ensembles finds it exactly.

use std::collections::{HashMap, VecDeque};

use num_bigint::BigInt;
use num_rational::BigRational;

use super::machine::{CommId, VerifierMachine};
use super::run::{coin_string, Certificate, Pause, Verdict, VerifierError, MAX_ENUMERABLE_BUDGET};
use crate::tape::Tape;

/// Which outcome the adversary maximizes.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Objective {
    Accept,
    Nonhalt,
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CertificateAttack {
    /// Maximum probability of the objective outcome.
    pub probability: BigRational,
    /// Lexicographically least certificate attaining it.
    pub certificate: Certificate,
    /// Distinct ensembles explored.
    pub ensembles: usize,
}

type Ensemble = Vec<Pause>;

struct Explorer<'a> {
    v: &'a VerifierMachine,
    tape: Tape,
    coins: Vec<Vec<bool>>,
}

impl Explorer<'_> {
    fn settle(&self, i: usize, pause: Pause, response: CommId) -> Result<Pause, VerifierError> {
        match pause {
            Pause::Awaiting(c) => Ok(self.v.advance(&self.tape, &self.coins[i], c, Some(response))?.pause),
            done => Ok(done),
        }
    }

    fn feed(&self, e: &Ensemble, symbol: CommId) -> Result<Ensemble, VerifierError> {
        e.iter().enumerate().map(|(i, &p)| self.settle(i, p, symbol)).collect()
    }

    /// Verdict of every branch if the certificate ends now.
    fn finish(&self, e: &Ensemble) -> Result<Vec<Verdict>, VerifierError> {
        e.iter()
            .enumerate()
            .map(|(i, &p)| {
                let mut pause = p;
                let mut seen = std::collections::HashSet::new();
                loop {
                    match pause {
                        Pause::Halted(v) => return Ok(v),
                        Pause::Looped => return Ok(Verdict::Nonhalt),
                        Pause::Awaiting(c) => {
                            if !seen.insert(c) {
                                return Ok(Verdict::Nonhalt);
                            }
                            pause = self.settle(i, pause, CommId::PAD)?;
                        }
                    }
                }
            })
            .collect()
    }

    fn score(&self, e: &Ensemble, objective: Objective) -> Result<u64, VerifierError> {
        let target = match objective {
            Objective::Accept => Verdict::Accept,
            Objective::Nonhalt => Verdict::Nonhalt,
        };
        Ok(self.finish(e)?.into_iter().filter(|&v| v == target).count() as u64)
    }
}

impl VerifierMachine {
    /// Maximum acceptance probability over all certificates of length at
    /// most `max_len`, with the lexicographically least maximizer (symbols
    /// ordered as declared; shorter prefixes first).
    pub fn best_certificate(
        &self,
        input: &str,
        max_len: usize,
    ) -> Result<CertificateAttack, VerifierError> {
        self.worst_case_certificate(input, max_len, Objective::Accept)
    }

    pub fn worst_case_certificate(
        &self,
        input: &str,
        max_len: usize,
        objective: Objective,
    ) -> Result<CertificateAttack, VerifierError> {
        if self.coin_budget() > MAX_ENUMERABLE_BUDGET {
            return Err(VerifierError::BudgetTooLarge(self.coin_budget()));
        }
        let total = 1u64 << self.coin_budget();
        let ex = Explorer {
            v: self,
            tape: Tape::new(input),
            coins: (0..total).map(|i| coin_string(i, self.coin_budget())).collect(),
        };
        let alphabet = self.certificate_alphabet();

        let start: Ensemble = (0..total as usize)
            .map(|i| {
                self.advance(&ex.tape, &ex.coins[i], self.start_cursor(), None)
                    .map(|a| a.pause)
            })
            .collect::<Result<_, _>>()?;

        // Forward BFS: ensembles with their distance and successor lists.
        let mut index: HashMap<Ensemble, usize> = HashMap::new();
        let mut nodes: Vec<Ensemble> = vec![start.clone()];
        let mut dist: Vec<usize> = vec![0];
        let mut succ: Vec<Vec<usize>> = Vec::new();
        index.insert(start, 0);
        let mut queue = VecDeque::from([0usize]);
        while let Some(n) = queue.pop_front() {
            let mut out = Vec::with_capacity(alphabet.len());
            if dist[n] < max_len && nodes[n].iter().any(|p| matches!(p, Pause::Awaiting(_))) {
                for &sym in &alphabet {
                    let next = ex.feed(&nodes[n], sym)?;
                    let id = match index.get(&next) {
                        Some(&id) => id,
                        None => {
                            let id = nodes.len();
                            index.insert(next.clone(), id);
                            nodes.push(next);
                            dist.push(dist[n] + 1);
                            queue.push_back(id);
                            id
                        }
                    };
                    out.push(id);
                }
            }
            if succ.len() <= n {
                succ.resize(n + 1, Vec::new());
            }
            succ[n] = out;
        }
        succ.resize(nodes.len(), Vec::new());

        let scores: Vec<u64> = nodes.iter().map(|e| ex.score(e, objective)).collect::<Result<_, _>>()?;
        let best = *scores.iter().max().expect("start ensemble exists");

        // Distance from each ensemble to one scoring `best`, over edges.
        let mut to_target = vec![usize::MAX; nodes.len()];
        let mut preds: Vec<Vec<usize>> = vec![Vec::new(); nodes.len()];
        for (n, outs) in succ.iter().enumerate() {
            for &m in outs {
                preds[m].push(n);
            }
        }
        let mut queue = VecDeque::new();
        for (n, &s) in scores.iter().enumerate() {
            if s == best {
                to_target[n] = 0;
                queue.push_back(n);
            }
        }
        while let Some(m) = queue.pop_front() {
            for &n in &preds[m] {
                if to_target[n] == usize::MAX {
                    to_target[n] = to_target[m] + 1;
                    queue.push_back(n);
                }
            }
        }

        // Greedy lexicographic reconstruction.
        let mut symbols = Vec::new();
        let mut at = 0usize;
        let mut remaining = max_len;
        while scores[at] != best {
            let (k, &next) = succ[at]
                .iter()
                .enumerate()
                .find(|(_, &m)| to_target[m] != usize::MAX && to_target[m] < remaining)
                .expect("a maximizer is reachable within the remaining length");
            symbols.push(alphabet[k]);
            at = next;
            remaining -= 1;
        }

        Ok(CertificateAttack {
            probability: BigRational::new(BigInt::from(best), BigInt::from(total)),
            certificate: Certificate::new(symbols),
            ensembles: nodes.len(),
        })
    }
}
