//! Constant-coin finite-state verifiers and multihead finite automata.
//!
//! The crate compiles nondeterministic multihead automata into verifiers that
//! toss a constant number of coins, evaluates verifiers exactly over all coin
//! strings, turns verifiers back into deterministic certificate checkers and
//! one-way multihead automata, and analyses two-way probabilistic automata
//! through exact absorbing Markov chains.

pub mod clock;
pub mod compiler;
pub mod derandomize;
pub mod dissimilarity;
pub mod format;
pub mod markov;
pub mod multihead;
pub mod showcase;
pub mod tape;
pub mod verifier;

pub use compiler::{CompiledVerifier, TrackSymbol, VerifierKind};
pub use multihead::{Configuration, MultiheadAutomaton, SymbolPattern};
pub use tape::{HeadMode, Move, Tape, TapeSymbol};
pub use verifier::{
    Certificate, CommId, OutcomeDistribution, ProverStrategy, Verdict, VerifierMachine,
};

/// Exact probabilities throughout.
pub type Probability = num_rational::BigRational;
