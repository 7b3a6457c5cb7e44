//! Shared fixtures for the benchmarks.

use fsverify::markov::TwoPfa;
use fsverify::verifier::{StateKind, ACCEPT, REJECT};
use fsverify::{CommId, HeadMode, Move, TapeSymbol, VerifierMachine};

/// A 2pfa doing a random walk over its input: heads steps right, tails steps
/// left. Heads on a marker while walking right accepts; tails on a marker
/// while walking left rejects.
pub fn coin_walk() -> TwoPfa {
    let mut v = VerifierMachine::new(&['a', 'b'], &[], HeadMode::TwoWay, 0);
    let right = v.add_state("right", StateKind::Coin, CommId::NULL);
    let left = v.add_state("left", StateKind::Coin, CommId::NULL);
    v.set_start(right);
    for bit in [false, true] {
        for c in ['a', 'b'] {
            let next = if bit { right } else { left };
            let mv = if bit { Move::Right } else { Move::Left };
            v.add_transition(right, TapeSymbol::Letter(c), CommId::NULL, Some(bit), next, mv);
            v.add_transition(left, TapeSymbol::Letter(c), CommId::NULL, Some(bit), next, mv);
        }
        v.add_transition(right, TapeSymbol::EndMarker, CommId::NULL, Some(bit), if bit { ACCEPT } else { right }, Move::Right);
        v.add_transition(left, TapeSymbol::EndMarker, CommId::NULL, Some(bit), if bit { right } else { REJECT }, Move::Right);
    }
    TwoPfa::new(v).expect("silent")
}
