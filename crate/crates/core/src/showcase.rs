//! Concrete languages: TWIN = { wcw : w ∈ {a,b}* } and NH, the language of
//! strings `a^x b a^y1 b ... a^yt b` (all exponents positive) in which some
//! prefix sum `y1 + ... + yk` equals `x`.
//!
//! Both verifiers are real-time with three coins. The first coin picks one of
//! two checks; each check then tosses two more coins and rejects when both are
//! zero, so a member is accepted with probability 3/4 and a non-member, which
//! can satisfy at most one check with a given certificate, with at most 3/8.

use crate::multihead::{MultiheadAutomaton, StateId, SymbolPattern};
use crate::tape::{HeadMode, Move, TapeSymbol};
use crate::verifier::{Certificate, CommId, StateKind, VerifierMachine, ACCEPT, REJECT};

/// Membership predicate over a fixed alphabet.
#[derive(Clone, Copy)]
pub struct LanguageOracle {
    pub name: &'static str,
    pub alphabet: &'static [char],
    pub membership: fn(&str) -> bool,
}

impl LanguageOracle {
    pub fn contains(&self, x: &str) -> bool {
        (self.membership)(x)
    }
}

pub const TWIN: LanguageOracle =
    LanguageOracle { name: "twin", alphabet: &['a', 'b', 'c'], membership: twin_oracle };

pub const NH: LanguageOracle =
    LanguageOracle { name: "nh", alphabet: &['a', 'b'], membership: nh_oracle };

pub fn twin_oracle(x: &str) -> bool {
    match x.split_once('c') {
        Some((u, v)) => u == v && !u.contains('c'),
        None => false,
    }
}

pub fn nh_oracle(x: &str) -> bool {
    let Some(body) = x.strip_suffix('b') else {
        return false;
    };
    let blocks: Vec<usize> = body.split('b').map(str::len).collect();
    if blocks.len() < 2 || blocks.contains(&0) {
        return false;
    }
    if !body.chars().all(|c| c == 'a' || c == 'b') {
        return false;
    }
    let target = blocks[0];
    let mut sum = 0;
    blocks[1..].iter().any(|&y| {
        sum += y;
        sum == target
    })
}

/// The honest TWIN certificate: the `w` of `x = wcw`.
pub fn twin_certificate(v: &VerifierMachine, x: &str) -> Option<Certificate> {
    if !twin_oracle(x) {
        return None;
    }
    let w = x.split_once('c').map(|(u, _)| u).unwrap_or("");
    Some(Certificate::new(w.chars().map(|ch| v.comm_id(&ch.to_string()).expect("letter")).collect()))
}

/// The honest NH certificate `a^x #`.
pub fn nh_certificate(v: &VerifierMachine, x: &str) -> Option<Certificate> {
    if !nh_oracle(x) {
        return None;
    }
    let lead = x.find('b').expect("members contain b");
    let a = v.comm_id("a").expect("a");
    let hash = v.comm_id("#").expect("#");
    let mut symbols = vec![a; lead];
    symbols.push(hash);
    Some(Certificate::new(symbols))
}

const E: TapeSymbol = TapeSymbol::EndMarker;

fn l(c: char) -> TapeSymbol {
    TapeSymbol::Letter(c)
}

/// Coin-toss outcome of the last of the two gadget coins: reject iff both
/// are zero.
fn gadget(zero_before: bool, bit: bool, otherwise: StateId) -> StateId {
    if zero_before && !bit {
        REJECT
    } else {
        otherwise
    }
}

pub fn build_twin_verifier() -> VerifierMachine {
    let mut v = VerifierMachine::new(&['a', 'b', 'c'], &["?", "a", "b"], HeadMode::RealTime, 3);
    let ask = v.comm_id("?").unwrap();
    let pad = CommId::PAD;
    let letters = [('a', v.comm_id("a").unwrap()), ('b', v.comm_id("b").unwrap())];
    let r = Move::Right;

    let split = v.add_state("split", StateKind::Coin, CommId::NULL);
    v.set_start(split);

    // Branch 1: certificate against the prefix, then exactly one c.
    let p1_first = v.add_state("p1.first", StateKind::Coin, ask);
    let p1 = [
        v.add_state("p1.z0", StateKind::Deterministic, ask),
        v.add_state("p1.z1", StateKind::Deterministic, ask),
    ];
    let a1_first = [
        v.add_state("a1.first.z0", StateKind::Coin, CommId::NULL),
        v.add_state("a1.first.z1", StateKind::Coin, CommId::NULL),
    ];
    let a1 = v.add_state("a1", StateKind::Deterministic, CommId::NULL);

    // Branch 2: skip to the first c, then certificate against the suffix.
    let p2_first = v.add_state("p2.first", StateKind::Coin, CommId::NULL);
    let wait = [
        v.add_state("p2.z0", StateKind::Deterministic, CommId::NULL),
        v.add_state("p2.z1", StateKind::Deterministic, CommId::NULL),
    ];
    let c2_first = [
        v.add_state("c2.first.z0", StateKind::Coin, ask),
        v.add_state("c2.first.z1", StateKind::Coin, ask),
    ];
    let c2 = v.add_state("c2", StateKind::Deterministic, ask);

    v.add_transition(split, E, CommId::NULL, Some(true), p1_first, r);
    v.add_transition(split, E, CommId::NULL, Some(false), p2_first, r);

    for bit in [false, true] {
        let z = usize::from(!bit);
        for &(ch, id) in &letters {
            v.add_transition(p1_first, l(ch), id, Some(bit), p1[z], r);
            v.add_transition(p2_first, l(ch), CommId::NULL, Some(bit), wait[z], r);
        }
        v.add_transition(p1_first, l('c'), pad, Some(bit), a1_first[z], r);
        v.add_transition(p2_first, l('c'), CommId::NULL, Some(bit), c2_first[z], r);
    }
    for z in 0..2 {
        for &(ch, id) in &letters {
            v.add_transition(p1[z], l(ch), id, None, p1[z], r);
            v.add_transition(wait[z], l(ch), CommId::NULL, None, wait[z], r);
        }
        v.add_transition(p1[z], l('c'), pad, None, a1_first[z], r);
        v.add_transition(wait[z], l('c'), CommId::NULL, None, c2_first[z], r);
        for bit in [false, true] {
            let zero = z == 1;
            for &(ch, id) in &letters {
                v.add_transition(a1_first[z], l(ch), CommId::NULL, Some(bit), gadget(zero, bit, a1), r);
                v.add_transition(c2_first[z], l(ch), id, Some(bit), gadget(zero, bit, c2), r);
            }
            v.add_transition(a1_first[z], E, CommId::NULL, Some(bit), gadget(zero, bit, ACCEPT), r);
            v.add_transition(c2_first[z], E, pad, Some(bit), gadget(zero, bit, ACCEPT), r);
        }
    }
    for &(ch, id) in &letters {
        v.add_transition(a1, l(ch), CommId::NULL, None, a1, r);
        v.add_transition(c2, l(ch), id, None, c2, r);
    }
    v.add_transition(a1, E, CommId::NULL, None, ACCEPT, r);
    v.add_transition(c2, E, pad, None, ACCEPT, r);
    v
}

pub fn build_nh_verifier() -> VerifierMachine {
    let mut v = VerifierMachine::new(&['a', 'b'], &["?", "a", "#"], HeadMode::RealTime, 3);
    let ask = v.comm_id("?").unwrap();
    let a = v.comm_id("a").unwrap();
    let hash = v.comm_id("#").unwrap();
    let nul = CommId::NULL;
    let r = Move::Right;

    let split = v.add_state("split", StateKind::Coin, nul);
    v.set_start(split);

    // Branch 1: the certificate's a's count the leading block.
    let l1_first = v.add_state("l1.first", StateKind::Coin, ask);
    let l1 = [
        v.add_state("l1.z0", StateKind::Deterministic, ask),
        v.add_state("l1.z1", StateKind::Deterministic, ask),
    ];
    let f1_first = [
        v.add_state("f1.first.z0", StateKind::Coin, nul),
        v.add_state("f1.first.z1", StateKind::Coin, nul),
    ];
    let f1_in = v.add_state("f1.in", StateKind::Deterministic, nul);
    let f1_bound = v.add_state("f1.bound", StateKind::Deterministic, nul);

    // Branch 2: the certificate's a's are matched against later a's; a b
    // that reads `a` borrows one, repaid by the next a.
    let p2_first = v.add_state("p2.first", StateKind::Coin, nul);
    let wait = [
        v.add_state("p2.z0", StateKind::Deterministic, nul),
        v.add_state("p2.z1", StateKind::Deterministic, nul),
    ];
    let cnt_first = [
        v.add_state("cnt.first.z0", StateKind::Coin, ask),
        v.add_state("cnt.first.z1", StateKind::Coin, ask),
    ];
    let cnt = v.add_state("cnt", StateKind::Deterministic, ask);
    let owe = v.add_state("owe", StateKind::Deterministic, nul);
    let tail_bound = v.add_state("tail.bound", StateKind::Deterministic, nul);
    let tail_in = v.add_state("tail.in", StateKind::Deterministic, nul);

    v.add_transition(split, E, nul, Some(true), l1_first, r);
    v.add_transition(split, E, nul, Some(false), p2_first, r);
    for bit in [false, true] {
        let z = usize::from(!bit);
        v.add_transition(l1_first, l('a'), a, Some(bit), l1[z], r);
        v.add_transition(p2_first, l('a'), nul, Some(bit), wait[z], r);
    }
    for z in 0..2 {
        let zero = z == 1;
        v.add_transition(l1[z], l('a'), a, None, l1[z], r);
        v.add_transition(l1[z], l('b'), hash, None, f1_first[z], r);
        v.add_transition(wait[z], l('a'), nul, None, wait[z], r);
        v.add_transition(wait[z], l('b'), nul, None, cnt_first[z], r);
        for bit in [false, true] {
            v.add_transition(f1_first[z], l('a'), nul, Some(bit), gadget(zero, bit, f1_in), r);
            v.add_transition(cnt_first[z], l('a'), a, Some(bit), gadget(zero, bit, cnt), r);
        }
    }
    v.add_transition(f1_in, l('a'), nul, None, f1_in, r);
    v.add_transition(f1_in, l('b'), nul, None, f1_bound, r);
    v.add_transition(f1_bound, l('a'), nul, None, f1_in, r);
    v.add_transition(f1_bound, E, nul, None, ACCEPT, r);

    v.add_transition(cnt, l('a'), a, None, cnt, r);
    v.add_transition(cnt, l('b'), a, None, owe, r);
    v.add_transition(cnt, l('b'), hash, None, tail_bound, r);
    v.add_transition(owe, l('a'), nul, None, cnt, r);
    v.add_transition(tail_bound, l('a'), nul, None, tail_in, r);
    v.add_transition(tail_bound, E, nul, None, ACCEPT, r);
    v.add_transition(tail_in, l('a'), nul, None, tail_in, r);
    v.add_transition(tail_in, l('b'), nul, None, tail_bound, r);
    v
}

/// Deterministic one-way 2-head recognizer for TWIN. Head 2 runs to the cell
/// after the first c, then both heads compare in lockstep until head 1 sees
/// the c and head 2 the right marker.
pub fn twin_recognizer() -> MultiheadAutomaton {
    use SymbolPattern::{Any, Exact};
    let one = HeadMode::OneWay;
    let mut m = MultiheadAutomaton::new(&['a', 'b', 'c'], vec![one, one]);
    m.rename_state(0, "s0");
    let s1 = m.add_state("s1");
    let s2 = m.add_state("s2");
    let acc = m.add_state("acc");
    m.set_accepting(acc, true);
    let (st, r) = (Move::Stay, Move::Right);
    m.add_rule(0, vec![Exact(E), Exact(E)], s1, vec![r, r]);
    for ch in ['a', 'b'] {
        m.add_rule(s1, vec![Any, Exact(l(ch))], s1, vec![st, r]);
        m.add_rule(s2, vec![Exact(l(ch)), Exact(l(ch))], s2, vec![r, r]);
    }
    m.add_rule(s1, vec![Any, Exact(l('c'))], s2, vec![st, r]);
    m.add_rule(s2, vec![Exact(l('c')), Exact(E)], acc, vec![st, st]);
    m
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tape::strings_up_to;
    use crate::verifier::coin_string;
    use num_bigint::BigInt;
    use num_rational::BigRational;

    fn ratio(p: i64, q: i64) -> BigRational {
        BigRational::new(BigInt::from(p), BigInt::from(q))
    }

    #[test]
    fn oracles() {
        assert!(twin_oracle("c"));
        assert!(twin_oracle("abcab"));
        assert!(!twin_oracle("abcba"));
        assert!(!twin_oracle("cc"));
        assert!(!twin_oracle("ab"));
        assert!(nh_oracle("abab"));
        assert!(!nh_oracle("aabab"));
        assert!(nh_oracle("aababab"));
        assert!(!nh_oracle("aabbab"));
        assert!(!nh_oracle("ab"));
        assert!(!nh_oracle("aabab".trim_end_matches('b')));
        assert!(!nh_oracle("aaabab"));
    }

    #[test]
    fn verifiers_are_valid_and_real_time() {
        for v in [build_twin_verifier(), build_nh_verifier()] {
            assert!(v.validate().is_empty(), "{:?}", v.validate());
            for s in 0..v.state_count() {
                assert!(v.transitions_of(s).iter().all(|(_, (_, mv))| *mv == Move::Right));
            }
        }
    }

    #[test]
    fn twin_hand_trace() {
        let v = build_twin_verifier();
        let cert = Certificate::parse(&v, "a").unwrap();
        let out = v.run_branch("aca", &[true, true, true], &cert).unwrap();
        assert_eq!(out.verdict, crate::verifier::Verdict::Accept);
        assert_eq!(out.coins_used, 3);
    }

    #[test]
    fn twin_members_three_quarters() {
        let v = build_twin_verifier();
        for x in strings_up_to(TWIN.alphabet, 9).into_iter().filter(|x| twin_oracle(x)) {
            let cert = twin_certificate(&v, &x).unwrap();
            let d = v.outcome_distribution(&x, &cert).unwrap();
            assert_eq!(d.accept, ratio(3, 4), "{x}");
            assert!(d.is_normalized());
        }
    }

    #[test]
    fn twin_non_members_at_most_three_eighths() {
        let v = build_twin_verifier();
        for x in strings_up_to(TWIN.alphabet, 6).into_iter().filter(|x| !twin_oracle(x)) {
            let best = v.best_certificate(&x, x.len() + 1).unwrap();
            assert!(best.probability <= ratio(3, 8), "{x}: {}", best.probability);
        }
        let acb = v.best_certificate("acb", 3).unwrap();
        assert_eq!(acb.probability, ratio(3, 8));
    }

    #[test]
    fn nh_members_and_non_members() {
        let v = build_nh_verifier();
        for x in strings_up_to(NH.alphabet, 7) {
            if nh_oracle(&x) {
                let cert = nh_certificate(&v, &x).unwrap();
                assert_eq!(v.outcome_distribution(&x, &cert).unwrap().accept, ratio(3, 4), "{x}");
            } else {
                let best = v.best_certificate(&x, x.len() + 2).unwrap();
                assert!(best.probability <= ratio(3, 8), "{x}");
            }
        }
        let bad = Certificate::parse(&v, "a a #").unwrap();
        assert!(v.outcome_distribution("abab", &bad).unwrap().accept <= ratio(3, 8));
    }

    #[test]
    fn coins_stay_within_budget() {
        let v = build_twin_verifier();
        let cert = Certificate::parse(&v, "a b").unwrap();
        for i in 0..8 {
            let out = v.run_branch("abcab", &coin_string(i, 3), &cert).unwrap();
            assert!(out.coins_used <= 3);
        }
    }

    #[test]
    fn recognizer_matches_oracle() {
        let m = twin_recognizer();
        assert!(m.validate().is_ok(), "{}", m.validate());
        assert!(m.is_deterministic());
        for x in strings_up_to(TWIN.alphabet, 6) {
            assert_eq!(m.accepts(&x), twin_oracle(&x), "{x}");
        }
    }
}
