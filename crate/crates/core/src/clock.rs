//! Forcing every branch of a multihead automaton to halt.
//!
//! [`add_clock`] pairs the `k` heads of a machine with `k` two-way clock
//! heads. The clock heads run a reflected mixed-radix Gray code over
//! `[0, n+1]^k`, one tick every `|Q|` simulated steps, counted in the finite
//! control. When no clock head can move the odometer has overflowed and the
//! branch rejects. A shortest accepting run visits each of the at most
//! `|Q|(n+2)^k` configurations once, so it always fits under the clock.
//!
//! Both end markers read the same symbol, so a clock head that scans `¢` does
//! not know which end it is on. Each head carries a direction and a *fresh*
//! flag, set when its direction has just been reversed at an end; a head on
//! `¢` may move only while fresh.

use std::collections::{HashMap, VecDeque};

use crate::multihead::{MultiheadAutomaton, StateId, SymbolPattern};
use crate::tape::{HeadMode, Move, TapeSymbol};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
struct ClockState {
    source: StateId,
    sub: usize,
    /// Bit `j` set iff clock head `j` sweeps rightwards.
    right: u32,
    fresh: u32,
}

/// A machine produced by [`add_clock`].
#[derive(Clone, Debug)]
pub struct ClockedAutomaton {
    pub automaton: MultiheadAutomaton,
    pub source_states: usize,
    pub source_heads: usize,
}

impl ClockedAutomaton {
    /// Declared bound on the length of every branch: `|Q|·(n+2)^k` for the
    /// source machine's `|Q|` and `k`.
    pub fn step_bound(&self, n: usize) -> u128 {
        self.source_states as u128 * (n as u128 + 2).pow(self.source_heads as u32)
    }
}

pub fn add_clock(m: &MultiheadAutomaton) -> ClockedAutomaton {
    let k = m.head_count();
    let q = m.state_count().max(1);
    let all = (1u32 << k) - 1;
    let mut modes = m.modes().to_vec();
    modes.extend(std::iter::repeat_n(HeadMode::TwoWay, k));
    let mut out = MultiheadAutomaton::empty(m.alphabet(), modes);

    let mut ids: HashMap<ClockState, StateId> = HashMap::new();
    let mut queue = VecDeque::new();
    let mut intern = |out: &mut MultiheadAutomaton, queue: &mut VecDeque<ClockState>, s: ClockState| {
        *ids.entry(s).or_insert_with(|| {
            let id = out.add_state(format!(
                "{}/{}/{:0w$b}/{:0w$b}",
                m.state_name(s.source),
                s.sub,
                s.right,
                s.fresh,
                w = k
            ));
            out.set_accepting(id, m.is_accepting(s.source));
            queue.push_back(s);
            id
        })
    };

    let start = ClockState { source: m.start(), sub: 0, right: all, fresh: all };
    let start_id = intern(&mut out, &mut queue, start);
    out.set_start(start_id);

    while let Some(s) = queue.pop_front() {
        let from = intern(&mut out, &mut queue, s);
        if m.is_accepting(s.source) {
            continue;
        }
        for rule in m.rules(s.source).to_vec() {
            if s.sub + 1 < q {
                let next = ClockState { source: rule.next, sub: s.sub + 1, ..s };
                let to = intern(&mut out, &mut queue, next);
                let mut pattern = rule.pattern.clone();
                pattern.extend(std::iter::repeat_n(SymbolPattern::Any, k));
                let mut moves = rule.moves.clone();
                moves.extend(std::iter::repeat_n(Move::Stay, k));
                out.add_rule(from, pattern, to, moves);
                continue;
            }
            // Tick: clock head `j` moves iff every lower head is blocked.
            for j in 0..k {
                let lower_blocked = (0..j).all(|i| s.fresh & (1 << i) == 0);
                if !lower_blocked {
                    break;
                }
                let bit = 1u32 << j;
                let mut pattern = rule.pattern.clone();
                pattern.extend((0..k).map(|i| {
                    if i < j {
                        SymbolPattern::Exact(TapeSymbol::EndMarker)
                    } else if i == j && s.fresh & bit == 0 {
                        SymbolPattern::AnyLetter
                    } else {
                        SymbolPattern::Any
                    }
                }));
                let mut moves = rule.moves.clone();
                moves.extend((0..k).map(|i| match (i == j, s.right & (1 << i) != 0) {
                    (true, true) => Move::Right,
                    (true, false) => Move::Left,
                    _ => Move::Stay,
                }));
                let lower = bit - 1;
                let next = ClockState {
                    source: rule.next,
                    sub: 0,
                    right: s.right ^ lower,
                    fresh: (s.fresh & !bit) | lower,
                };
                let to = intern(&mut out, &mut queue, next);
                out.add_rule(from, pattern, to, moves);
            }
        }
    }
    ClockedAutomaton { automaton: out, source_states: q, source_heads: k }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::showcase::twin_recognizer;
    use crate::tape::TapeSymbol::{EndMarker as E, Letter as L};

    /// Accepts strings containing `b`; on any `a` it may also stall forever.
    fn looping() -> MultiheadAutomaton {
        let mut m = MultiheadAutomaton::new(&['a', 'b'], vec![HeadMode::TwoWay]);
        let scan = m.add_state("scan");
        let stall = m.add_state("stall");
        let acc = m.add_state("acc");
        m.set_accepting(acc, true);
        m.add_rule(0, vec![E.into()], scan, vec![Move::Right]);
        m.add_rule(scan, vec![L('a').into()], scan, vec![Move::Right]);
        m.add_rule(scan, vec![L('a').into()], stall, vec![Move::Stay]);
        m.add_rule(scan, vec![L('b').into()], acc, vec![Move::Stay]);
        m.add_rule(stall, vec![SymbolPattern::Any], stall, vec![Move::Stay]);
        m
    }

    #[test]
    fn clock_halts_looping_machine() {
        let m = looping();
        assert_eq!(m.longest_branch("a"), None);
        let c = add_clock(&m);
        assert!(c.automaton.validate().is_ok(), "{}", c.automaton.validate());
        for n in 0..=6 {
            for x in crate::tape::strings_up_to(&['a', 'b'], n).into_iter().filter(|x| x.len() == n) {
                let longest = c.automaton.longest_branch(&x).expect("every branch halts");
                assert!((longest as u128) < c.step_bound(n), "{x}: {longest}");
                assert_eq!(c.automaton.accepts(&x), m.accepts(&x), "{x}");
            }
        }
    }

    #[test]
    fn odometer_runs_full_length() {
        // A machine that never halts on its own: the clock alone ends it.
        let mut m = MultiheadAutomaton::new(&['a'], vec![HeadMode::TwoWay]);
        m.add_rule(0, vec![SymbolPattern::Any], 0, vec![Move::Stay]);
        let c = add_clock(&m);
        for n in 0..5 {
            let x = "a".repeat(n);
            assert_eq!(c.automaton.longest_branch(&x), Some(n + 1));
        }
    }

    #[test]
    fn clocked_twin_keeps_language() {
        let twin = twin_recognizer();
        let c = add_clock(&twin);
        assert_eq!(c.automaton.head_count(), 4);
        assert!(c.automaton.is_deterministic());
        assert!(c.automaton.validate().is_ok(), "{}", c.automaton.validate());
        assert_eq!(c.automaton.enumerate_language(4), twin.enumerate_language(4));
        let longest = c.automaton.longest_branch("abcab").unwrap();
        assert!((longest as u128) < c.step_bound(5));
    }
}
