//! Finite-state verifiers with a constant coin budget.
//!
//! A verifier reads its input with one head, tosses at most `B` fair coins,
//! and talks to a prover through a communication cell. Against a one-way
//! prover the conversation is just a [`Certificate`]. Probabilities are exact:
//! a branch is a full `B`-bit coin string of weight `2^-B`, with bits consumed
//! on demand.

mod machine;
mod run;
mod search;

pub use machine::{
    CommId, StateKind, TransitionKey, VerifierMachine, VerifierState, VerifierViolation, ACCEPT,
    REJECT,
};
pub use run::{
    coin_string, fraction, BranchOutcome, Certificate, OutcomeDistribution, ProverStrategy,
    Verdict, VerifierError,
};
pub use search::{CertificateAttack, Objective};
