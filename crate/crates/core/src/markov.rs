//! Exact analysis of two-way probabilistic finite automata through absorbing
//! Markov chains.
//!
//! [`acceptance_probability_2pfa`] solves the chain over configurations.
//! [`build_split_chain`] builds the compressed chain for an input cut into
//! `x·y`: its transient states are "in state `q` on the last cell of `¢x`" and
//! "in state `q` on the first cell of `y¢`", and each row is obtained by
//! solving the walk inside one region until the head crosses the cut.

use std::collections::{HashMap, VecDeque};
use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use thiserror::Error;

use crate::multihead::StateId;
use crate::tape::{Tape, TapeSymbol};
use crate::verifier::{fraction, CommId, StateKind, VerifierMachine, ACCEPT, REJECT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum MarkovError {
    #[error("row {0} does not sum to 1")]
    NotStochastic(usize),
    #[error("matrix is not square")]
    NotSquare,
    #[error("state {0} cannot reach an absorbing state")]
    Trapped(usize),
    #[error("a 2pfa must not communicate")]
    Communicates,
    #[error("both halves of the split must be non-empty")]
    EmptySplit,
    #[error("bad matrix entry '{0}'")]
    Entry(String),
}

/// A finite row-stochastic chain with exact entries.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct MarkovChain {
    rows: Vec<Vec<BigRational>>,
}

impl MarkovChain {
    pub fn new(rows: Vec<Vec<BigRational>>) -> Result<MarkovChain, MarkovError> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(MarkovError::NotSquare);
        }
        let chain = MarkovChain { rows };
        if let Some(bad) = (0..n).find(|&i| !chain.row_is_stochastic(i)) {
            return Err(MarkovError::NotStochastic(bad));
        }
        Ok(chain)
    }

    fn from_sparse(n: usize, sparse: &[Vec<(usize, BigRational)>]) -> MarkovChain {
        let mut rows = vec![vec![BigRational::zero(); n]; n];
        for (i, row) in sparse.iter().enumerate() {
            for (j, p) in row {
                rows[i][*j] += p;
            }
        }
        MarkovChain { rows }
    }

    pub fn state_count(&self) -> usize {
        self.rows.len()
    }

    pub fn prob(&self, i: usize, j: usize) -> &BigRational {
        &self.rows[i][j]
    }

    pub fn rows(&self) -> &[Vec<BigRational>] {
        &self.rows
    }

    fn row_is_stochastic(&self, i: usize) -> bool {
        let sum: BigRational = self.rows[i].iter().sum();
        sum.is_one() && self.rows[i].iter().all(|p| *p >= BigRational::zero())
    }

    pub fn is_row_stochastic(&self) -> bool {
        (0..self.state_count()).all(|i| self.row_is_stochastic(i))
    }

    pub fn is_absorbing(&self, i: usize) -> bool {
        self.rows[i][i].is_one()
    }

    pub fn absorbing_states(&self) -> Vec<usize> {
        (0..self.state_count()).filter(|&i| self.is_absorbing(i)).collect()
    }

    fn successors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.rows[i].iter().enumerate().filter(|(_, p)| !p.is_zero()).map(|(j, _)| j)
    }

    fn reachable_from(&self, start: usize) -> Vec<bool> {
        let mut seen = vec![false; self.state_count()];
        seen[start] = true;
        let mut queue = VecDeque::from([start]);
        while let Some(i) = queue.pop_front() {
            for j in self.successors(i) {
                if !seen[j] {
                    seen[j] = true;
                    queue.push_back(j);
                }
            }
        }
        seen
    }

    /// States from which some absorbing state is reachable.
    fn can_absorb(&self) -> Vec<bool> {
        let n = self.state_count();
        let mut preds = vec![Vec::new(); n];
        for i in 0..n {
            for j in self.successors(i) {
                preds[j].push(i);
            }
        }
        let mut ok = vec![false; n];
        let mut queue: VecDeque<usize> = self.absorbing_states().into();
        for &a in &queue {
            ok[a] = true;
        }
        while let Some(j) = queue.pop_front() {
            for &i in &preds[j] {
                if !ok[i] {
                    ok[i] = true;
                    queue.push_back(i);
                }
            }
        }
        ok
    }

    /// Sends every state that cannot reach an absorbing state to `sink`.
    /// These are exactly the members of closed classes without an absorbing
    /// state, plus the states that can only lead into them.
    pub fn redirect_traps(&mut self, sink: usize) -> Vec<usize> {
        let ok = self.can_absorb();
        let trapped: Vec<usize> = (0..self.state_count()).filter(|&i| !ok[i]).collect();
        for &i in &trapped {
            self.redirect(i, sink);
        }
        trapped
    }

    pub fn redirect(&mut self, i: usize, sink: usize) {
        for p in self.rows[i].iter_mut() {
            *p = BigRational::zero();
        }
        self.rows[i][sink] = BigRational::one();
    }

    /// Closed communicating classes that contain no absorbing state.
    pub fn closed_classes(&self) -> Vec<Vec<usize>> {
        let n = self.state_count();
        let reach: Vec<Vec<bool>> = (0..n).map(|i| self.reachable_from(i)).collect();
        let mut done = vec![false; n];
        let mut out = Vec::new();
        for i in 0..n {
            if done[i] || self.is_absorbing(i) {
                continue;
            }
            let class: Vec<usize> = (0..n).filter(|&j| reach[i][j] && reach[j][i]).collect();
            for &j in &class {
                done[j] = true;
            }
            let closed = class.iter().all(|&j| (0..n).all(|k| !reach[j][k] || class.contains(&k)));
            if closed {
                out.push(class);
            }
        }
        out
    }

    /// Probability of ending in each absorbing state when started in
    /// `start`, as `(absorbing state, probability)` pairs.
    pub fn absorption(&self, start: usize) -> Result<Vec<(usize, BigRational)>, MarkovError> {
        let absorbing = self.absorbing_states();
        let reach = self.reachable_from(start);
        let ok = self.can_absorb();
        if let Some(bad) = (0..self.state_count()).find(|&i| reach[i] && !ok[i]) {
            return Err(MarkovError::Trapped(bad));
        }
        if self.is_absorbing(start) {
            return Ok(absorbing
                .iter()
                .map(|&a| (a, if a == start { BigRational::one() } else { BigRational::zero() }))
                .collect());
        }
        let transient: Vec<usize> =
            (0..self.state_count()).filter(|&i| reach[i] && !self.is_absorbing(i)).collect();
        let pos: HashMap<usize, usize> = transient.iter().enumerate().map(|(k, &i)| (i, k)).collect();
        let t = transient.len();
        let a = absorbing.len();
        // (I - Q) X = R, solved by Gauss-Jordan elimination.
        let mut m = vec![vec![BigRational::zero(); t + a]; t];
        for (r, &i) in transient.iter().enumerate() {
            m[r][r] = BigRational::one();
            for j in self.successors(i) {
                if let Some(&c) = pos.get(&j) {
                    m[r][c] -= &self.rows[i][j];
                } else if let Some(k) = absorbing.iter().position(|&x| x == j) {
                    m[r][t + k] += &self.rows[i][j];
                }
            }
        }
        solve_in_place(&mut m, t);
        let row = pos[&start];
        Ok(absorbing.iter().enumerate().map(|(k, &s)| (s, m[row][t + k].clone())).collect())
    }

    pub fn absorption_into(&self, start: usize, target: usize) -> Result<BigRational, MarkovError> {
        Ok(self
            .absorption(start)?
            .into_iter()
            .find(|(s, _)| *s == target)
            .map(|(_, p)| p)
            .unwrap_or_else(BigRational::zero))
    }

    /// Row-major `p/q` entries, one row per line.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(fraction).collect();
            out.push_str(&cells.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn parse(text: &str) -> Result<MarkovChain, MarkovError> {
        let rows = text
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty() && !l.starts_with('#'))
            .map(|l| l.split_whitespace().map(parse_fraction).collect::<Result<Vec<_>, _>>())
            .collect::<Result<Vec<_>, _>>()?;
        MarkovChain::new(rows)
    }
}

impl fmt::Display for MarkovChain {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render())
    }
}

pub fn parse_fraction(s: &str) -> Result<BigRational, MarkovError> {
    let bad = || MarkovError::Entry(s.to_string());
    let (p, q) = s.split_once('/').unwrap_or((s, "1"));
    let p: BigInt = p.parse().map_err(|_| bad())?;
    let q: BigInt = q.parse().map_err(|_| bad())?;
    if q.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(p, q))
}

/// Gauss-Jordan on the first `t` columns of an augmented matrix whose left
/// block is nonsingular.
fn solve_in_place(m: &mut [Vec<BigRational>], t: usize) {
    for col in 0..t {
        let pivot = (col..t).find(|&r| !m[r][col].is_zero()).expect("nonsingular system");
        m.swap(col, pivot);
        let inv = m[col][col].recip();
        for x in m[col].iter_mut() {
            *x *= &inv;
        }
        let pivot_row = m[col].clone();
        for (r, row) in m.iter_mut().enumerate() {
            if r == col || row[col].is_zero() {
                continue;
            }
            let factor = row[col].clone();
            for (x, p) in row.iter_mut().zip(&pivot_row) {
                if !p.is_zero() {
                    *x -= &factor * p;
                }
            }
        }
    }
}

/// A verifier that never communicates, read as a 2pfa: coin states toss a
/// fair coin on every visit and there is no coin budget.
#[derive(Clone, Debug)]
pub struct TwoPfa {
    pub machine: VerifierMachine,
}

impl TwoPfa {
    pub fn new(machine: VerifierMachine) -> Result<TwoPfa, MarkovError> {
        if !machine.is_silent() {
            return Err(MarkovError::Communicates);
        }
        Ok(TwoPfa { machine })
    }

    /// Non-halting states in id order.
    pub fn nonhalting(&self) -> Vec<StateId> {
        (0..self.machine.state_count()).filter(|&q| !self.machine.state(q).kind.is_halting()).collect()
    }

    /// One step from `state` on `symbol`: `(probability, next, move)` triples.
    fn step(&self, state: StateId, symbol: TapeSymbol) -> Vec<(BigRational, StateId, crate::tape::Move)> {
        let v = &self.machine;
        if v.state(state).kind.is_halting() {
            return vec![(BigRational::one(), state, crate::tape::Move::Stay)];
        }
        let half = BigRational::new(BigInt::one(), BigInt::from(2));
        let bits: Vec<(Option<bool>, BigRational)> = if v.state(state).kind == StateKind::Coin {
            vec![(Some(false), half.clone()), (Some(true), half)]
        } else {
            vec![(None, BigRational::one())]
        };
        bits.into_iter()
            .map(|(bit, p)| match v.transition(state, symbol, CommId::NULL, bit) {
                Some((next, mv)) => (p, next, mv),
                None => (p, REJECT, crate::tape::Move::Stay),
            })
            .collect()
    }
}

/// Exact acceptance probability of a 2pfa on `w`.
pub fn acceptance_probability_2pfa(a: &TwoPfa, w: &str) -> BigRational {
    let tape = Tape::new(w);
    let mut index: HashMap<(StateId, usize), usize> = HashMap::new();
    // 0 = accept, 1 = reject.
    let mut sparse: Vec<Vec<(usize, BigRational)>> = vec![vec![(0, BigRational::one())], vec![(1, BigRational::one())]];
    let start = (a.machine.start(), 0usize);
    let mut queue = VecDeque::new();
    let mut node = |c: (StateId, usize), sparse: &mut Vec<Vec<(usize, BigRational)>>, queue: &mut VecDeque<(StateId, usize)>| {
        if c.0 == ACCEPT {
            return 0;
        }
        if c.0 == REJECT {
            return 1;
        }
        *index.entry(c).or_insert_with(|| {
            sparse.push(Vec::new());
            queue.push_back(c);
            sparse.len() - 1
        })
    };
    let s = node(start, &mut sparse, &mut queue);
    while let Some((q, pos)) = queue.pop_front() {
        let i = node((q, pos), &mut sparse, &mut queue);
        let mut row = Vec::new();
        for (p, next, mv) in a.step(q, tape.at(pos)) {
            let j = node((next, tape.shift(pos, mv)), &mut sparse, &mut queue);
            row.push((j, p));
        }
        sparse[i] = row;
    }
    let mut chain = MarkovChain::from_sparse(sparse.len(), &sparse);
    for i in 2..chain.state_count() {
        if chain.is_absorbing(i) {
            chain.redirect(i, 1);
        }
    }
    chain.redirect_traps(1);
    chain.absorption_into(s, 0).expect("traps redirected")
}

/// The compressed chain for the split `x·y`, with `2c` states: index `j`
/// for state `q_j` on the last cell of `¢x`, `c-1+j` for `q_j` on the first
/// cell of `y¢`, `2c-2` for rejection or looping and `2c-1` for acceptance.
/// `q_0` is an added start state that walks left to `¢` and then behaves
/// like the original start state, so the chain starts in state 0.
#[derive(Clone, Debug)]
pub struct SplitChain {
    pub chain: MarkovChain,
    pub c: usize,
    /// Transient states whose rows were redirected to `2c-2` because they
    /// lie in a closed class.
    pub redirected: Vec<usize>,
}

impl SplitChain {
    pub fn reject_state(&self) -> usize {
        2 * self.c - 2
    }

    pub fn accept_state(&self) -> usize {
        2 * self.c - 1
    }

    pub fn acceptance(&self) -> BigRational {
        self.chain.absorption_into(0, self.accept_state()).expect("closed classes redirected")
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
enum Normalized {
    Walk,
    Orig(StateId),
}

pub fn build_split_chain(a: &TwoPfa, x: &str, y: &str) -> Result<SplitChain, MarkovError> {
    if x.is_empty() || y.is_empty() {
        return Err(MarkovError::EmptySplit);
    }
    let w = format!("{x}{y}");
    let tape = Tape::new(&w);
    let cut = x.chars().count(); // last cell of ¢x
    let states: Vec<Normalized> =
        std::iter::once(Normalized::Walk).chain(a.nonhalting().into_iter().map(Normalized::Orig)).collect();
    let idx: HashMap<Normalized, usize> = states.iter().enumerate().map(|(i, &s)| (s, i)).collect();
    let c = states.len() + 1;
    let (reject, accept) = (2 * c - 2, 2 * c - 1);
    let step = |s: Normalized, pos: usize| -> Vec<(BigRational, Option<Normalized>, usize, bool)> {
        // (probability, next state or None for a halt, next position, accepted)
        let sym = tape.at(pos);
        match s {
            Normalized::Walk if !sym.is_end_marker() => vec![(BigRational::one(), Some(Normalized::Walk), pos - 1, false)],
            Normalized::Walk => step_orig(a, a.machine.start(), pos, &tape),
            Normalized::Orig(q) => step_orig(a, q, pos, &tape),
        }
    };
    let mut rows: Vec<Vec<(usize, BigRational)>> = Vec::new();
    for side in 0..2 {
        for &s in &states {
            let boundary = if side == 0 { cut } else { cut + 1 };
            let in_region = |p: usize| if side == 0 { p <= cut } else { p > cut };
            // Sub-chain over in-region configurations; outcomes are crossings
            // into the other region, acceptance and rejection.
            let mut index: HashMap<(Normalized, usize), usize> = HashMap::new();
            let mut sparse: Vec<Vec<(usize, BigRational)>> = Vec::new();
            let mut outcome_ids: HashMap<usize, usize> = HashMap::new(); // chain state -> node
            let mut queue = VecDeque::new();
            let outcome = |target: usize, sparse: &mut Vec<Vec<(usize, BigRational)>>, ids: &mut HashMap<usize, usize>| {
                *ids.entry(target).or_insert_with(|| {
                    let id = sparse.len();
                    sparse.push(vec![(id, BigRational::one())]);
                    id
                })
            };
            let start = {
                index.insert((s, boundary), 0);
                sparse.push(Vec::new());
                queue.push_back((s, boundary));
                0
            };
            while let Some((st, pos)) = queue.pop_front() {
                let i = index[&(st, pos)];
                let mut row = Vec::new();
                for (p, next, npos, accepted) in step(st, pos) {
                    let j = match next {
                        None => outcome(if accepted { accept } else { reject }, &mut sparse, &mut outcome_ids),
                        Some(ns) if !in_region(npos) => {
                            let target = if side == 0 { c - 1 + idx[&ns] } else { idx[&ns] };
                            outcome(target, &mut sparse, &mut outcome_ids)
                        }
                        Some(ns) => *index.entry((ns, npos)).or_insert_with(|| {
                            sparse.push(Vec::new());
                            queue.push_back((ns, npos));
                            sparse.len() - 1
                        }),
                    };
                    row.push((j, p));
                }
                sparse[i] = row;
            }
            let sink = outcome(reject, &mut sparse, &mut outcome_ids);
            let mut sub = MarkovChain::from_sparse(sparse.len(), &sparse);
            // A configuration that stays put forever is not an outcome.
            for (&_, &n) in index.iter() {
                if sub.is_absorbing(n) {
                    sub.redirect(n, sink);
                }
            }
            sub.redirect_traps(sink);
            let probs = sub.absorption(start).expect("traps redirected");
            let back: HashMap<usize, usize> = outcome_ids.iter().map(|(&t, &n)| (n, t)).collect();
            rows.push(probs.into_iter().filter(|(_, p)| !p.is_zero()).map(|(n, p)| (back[&n], p)).collect());
        }
    }
    rows.push(vec![(reject, BigRational::one())]);
    rows.push(vec![(accept, BigRational::one())]);
    let mut chain = MarkovChain::from_sparse(2 * c, &rows);
    let mut redirected = Vec::new();
    for class in chain.closed_classes() {
        for &i in &class {
            chain.redirect(i, reject);
            redirected.push(i);
        }
    }
    redirected.sort_unstable();
    Ok(SplitChain { chain, c, redirected })
}

fn step_orig(
    a: &TwoPfa,
    q: StateId,
    pos: usize,
    tape: &Tape,
) -> Vec<(BigRational, Option<Normalized>, usize, bool)> {
    a.step(q, tape.at(pos))
        .into_iter()
        .map(|(p, next, mv)| match next {
            ACCEPT => (p, None, pos, true),
            REJECT => (p, None, pos, false),
            n => (p, Some(Normalized::Orig(n)), tape.shift(pos, mv), false),
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::{HeadMode, Move};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn r(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    const E: TapeSymbol = TapeSymbol::EndMarker;

    fn coin_flip() -> TwoPfa {
        let mut v = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        let s = v.add_state("s", StateKind::Coin, CommId::NULL);
        v.set_start(s);
        v.add_transition(s, E, CommId::NULL, Some(true), ACCEPT, Move::Stay);
        v.add_transition(s, E, CommId::NULL, Some(false), REJECT, Move::Stay);
        TwoPfa::new(v).unwrap()
    }

    /// Random 2pfa over {a, b}; escapes past the markers are clamped.
    fn random_2pfa(rng: &mut ChaCha8Rng, states: usize) -> TwoPfa {
        let mut v = VerifierMachine::new(&['a', 'b'], &[], HeadMode::TwoWay, 0);
        let ids: Vec<StateId> = (0..states)
            .map(|i| {
                let kind = if rng.gen_bool(0.5) { StateKind::Coin } else { StateKind::Deterministic };
                v.add_state(format!("q{i}"), kind, CommId::NULL)
            })
            .collect();
        v.set_start(ids[0]);
        let moves = [Move::Left, Move::Stay, Move::Right];
        for &q in &ids {
            let bits: Vec<Option<bool>> = if v.state(q).kind == StateKind::Coin {
                vec![Some(false), Some(true)]
            } else {
                vec![None]
            };
            for sym in [E, TapeSymbol::Letter('a'), TapeSymbol::Letter('b')] {
                for &bit in &bits {
                    let roll = rng.gen_range(0..states + 3);
                    if roll == states + 2 {
                        continue; // missing transition
                    }
                    let next = match roll {
                        x if x < states => ids[x],
                        x if x == states => ACCEPT,
                        _ => REJECT,
                    };
                    v.add_transition(q, sym, CommId::NULL, bit, next, moves[rng.gen_range(0..3)]);
                }
            }
        }
        TwoPfa::new(v).unwrap()
    }

    /// Truncated forward iteration in floating point: the accepted mass after
    /// `steps` steps and one minus the mass known never to accept.
    fn bracket(a: &TwoPfa, w: &str, steps: usize) -> (f64, f64) {
        let tape = Tape::new(w);
        let v = &a.machine;
        let mut dist: HashMap<(StateId, usize), f64> = HashMap::from([((v.start(), 0), 1.0)]);
        let (mut acc, mut rej) = (0.0, 0.0);
        for _ in 0..steps {
            let mut next: HashMap<(StateId, usize), f64> = HashMap::new();
            for (&(q, pos), &p) in &dist {
                for (pr, n, mv) in a.step(q, tape.at(pos)) {
                    let pr = p * to_f64(&pr);
                    match n {
                        ACCEPT => acc += pr,
                        REJECT => rej += pr,
                        n => *next.entry((n, tape.shift(pos, mv))).or_default() += pr,
                    }
                }
            }
            dist = next;
        }
        let hopeless: f64 = dist
            .iter()
            .filter(|(&(q, pos), _)| !can_accept(a, &tape, q, pos))
            .map(|(_, p)| p)
            .sum();
        (acc, 1.0 - rej - hopeless)
    }

    fn can_accept(a: &TwoPfa, tape: &Tape, q: StateId, pos: usize) -> bool {
        let mut seen = std::collections::HashSet::from([(q, pos)]);
        let mut queue = VecDeque::from([(q, pos)]);
        while let Some((q, pos)) = queue.pop_front() {
            for (_, n, mv) in a.step(q, tape.at(pos)) {
                if n == ACCEPT {
                    return true;
                }
                if n != REJECT && seen.insert((n, tape.shift(pos, mv))) {
                    queue.push_back((n, tape.shift(pos, mv)));
                }
            }
        }
        false
    }

    fn to_f64(x: &BigRational) -> f64 {
        x.numer().to_string().parse::<f64>().unwrap() / x.denom().to_string().parse::<f64>().unwrap()
    }

    #[test]
    fn trivial_machines() {
        let mut v = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        let s = v.add_state("s", StateKind::Deterministic, CommId::NULL);
        v.set_start(s);
        v.add_transition(s, E, CommId::NULL, None, ACCEPT, Move::Stay);
        let yes = TwoPfa::new(v).unwrap();
        assert_eq!(acceptance_probability_2pfa(&yes, "a"), r(1, 1));
        assert_eq!(acceptance_probability_2pfa(&coin_flip(), "aa"), r(1, 2));
    }

    #[test]
    fn chains_and_absorption() {
        let id = MarkovChain::new(vec![vec![r(1, 1)]]).unwrap();
        assert_eq!(id.absorption(0).unwrap(), vec![(0, r(1, 1))]);
        let walk = MarkovChain::new(vec![
            vec![r(1, 1), r(0, 1), r(0, 1)],
            vec![r(1, 2), r(0, 1), r(1, 2)],
            vec![r(0, 1), r(0, 1), r(1, 1)],
        ])
        .unwrap();
        assert_eq!(walk.absorption(1).unwrap(), vec![(0, r(1, 2)), (2, r(1, 2))]);
        assert!(MarkovChain::new(vec![vec![r(1, 2)]]).is_err());
        assert_eq!(MarkovChain::parse(&walk.render()).unwrap(), walk);
        let trap = MarkovChain::new(vec![
            vec![r(0, 1), r(1, 1), r(0, 1)],
            vec![r(1, 1), r(0, 1), r(0, 1)],
            vec![r(0, 1), r(0, 1), r(1, 1)],
        ])
        .unwrap();
        assert_eq!(trap.absorption(0), Err(MarkovError::Trapped(0)));
        assert_eq!(trap.closed_classes(), vec![vec![0, 1]]);
    }

    #[test]
    fn absorption_matches_power_iteration() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        for _ in 0..30 {
            let n = 6;
            let mut rows = Vec::new();
            for i in 0..n {
                if i < 2 {
                    let mut row = vec![r(0, 1); n];
                    row[i] = r(1, 1);
                    rows.push(row);
                    continue;
                }
                let weights: Vec<i64> = (0..n).map(|_| rng.gen_range(0..4)).collect();
                let mut weights = weights;
                weights[0] += 1;
                let total: i64 = weights.iter().sum();
                rows.push(weights.iter().map(|&w| r(w, total)).collect());
            }
            let chain = MarkovChain::new(rows).unwrap();
            let exact = chain.absorption_into(2, 0).unwrap();
            let p: Vec<Vec<f64>> = chain.rows().iter().map(|row| row.iter().map(to_f64).collect()).collect();
            let mut v = vec![0.0; n];
            v[2] = 1.0;
            for _ in 0..10_000 {
                let mut next = vec![0.0; n];
                for i in 0..n {
                    for j in 0..n {
                        next[j] += v[i] * p[i][j];
                    }
                }
                v = next;
            }
            assert!((v[0] - to_f64(&exact)).abs() < 1e-9);
        }
    }

    #[test]
    fn configuration_chain_matches_truncated_enumeration() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..40 {
            let a = random_2pfa(&mut rng, 3);
            for w in ["", "a", "ab", "bba"] {
                let exact = to_f64(&acceptance_probability_2pfa(&a, w));
                let (lo, hi) = bracket(&a, w, 2_000);
                assert!(lo <= exact + 1e-9 && exact <= hi + 1e-9, "{w}: {lo} {exact} {hi}");
                assert!(hi - lo < 1.0 / (1u64 << 20) as f64, "{w}: {lo} {hi}");
            }
        }
    }

    #[test]
    fn split_chain_trivial_cases() {
        let mut v = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        let s = v.add_state("s", StateKind::Deterministic, CommId::NULL);
        v.set_start(s);
        v.add_transition(s, E, CommId::NULL, None, ACCEPT, Move::Stay);
        let yes = TwoPfa::new(v).unwrap();
        let sc = build_split_chain(&yes, "a", "a").unwrap();
        assert_eq!(sc.c, 3);
        assert_eq!(sc.chain.prob(0, sc.accept_state()), &r(1, 1));
        assert!(sc.chain.is_row_stochastic());

        // Loops forever on the left marker.
        let mut v = VerifierMachine::new(&['a'], &[], HeadMode::TwoWay, 0);
        let s = v.add_state("s", StateKind::Deterministic, CommId::NULL);
        v.set_start(s);
        v.add_transition(s, E, CommId::NULL, None, s, Move::Stay);
        let stuck = TwoPfa::new(v).unwrap();
        let sc = build_split_chain(&stuck, "a", "a").unwrap();
        assert_eq!(sc.chain.prob(0, sc.reject_state()), &r(1, 1));
        assert!(build_split_chain(&stuck, "", "a").is_err());
    }

    #[test]
    fn split_chain_matches_configuration_chain() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for _ in 0..40 {
            let a = random_2pfa(&mut rng, 3);
            for (x, y) in [("a", "b"), ("ab", "a"), ("b", "ba"), ("ab", "ba")] {
                let sc = build_split_chain(&a, x, y).unwrap();
                assert!(sc.chain.is_row_stochastic());
                assert_eq!(sc.acceptance(), acceptance_probability_2pfa(&a, &format!("{x}{y}")), "{x}|{y}");
            }
        }
    }

    #[test]
    fn agrees_with_coin_enumeration() {
        let v = crate::verifier::VerifierMachine::clone(&coin_flip().machine);
        let mut budgeted = v.clone();
        budgeted.set_coin_budget(1);
        let d = budgeted.outcome_distribution("a", &crate::verifier::Certificate::default()).unwrap();
        assert_eq!(d.accept, acceptance_probability_2pfa(&TwoPfa::new(v).unwrap(), "a"));
    }
}
