//! Engines checked against slow, independent oracles on random machines.

use std::collections::HashSet;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use proptest::prelude::*;

use fsverify::compiler::compile_weak;
use fsverify::tape::{strings_up_to, Tape};
use fsverify::verifier::{StateKind, ACCEPT, REJECT};
use fsverify::{
    Certificate, CommId, Configuration, HeadMode, Move, MultiheadAutomaton, SymbolPattern, TapeSymbol, VerifierMachine,
};

const PATTERNS: [SymbolPattern; 5] = [
    SymbolPattern::Any,
    SymbolPattern::AnyLetter,
    SymbolPattern::Exact(TapeSymbol::EndMarker),
    SymbolPattern::Exact(TapeSymbol::Letter('a')),
    SymbolPattern::Exact(TapeSymbol::Letter('b')),
];
const MOVES: [Move; 3] = [Move::Left, Move::Stay, Move::Right];

type RawRule = (usize, Vec<usize>, usize, Vec<usize>);

fn automaton(states: usize, heads: usize, accepting: usize, rules: &[RawRule]) -> MultiheadAutomaton {
    let mut m = MultiheadAutomaton::new(&['a', 'b'], vec![HeadMode::TwoWay; heads]);
    for i in 1..states {
        m.add_state(format!("q{i}"));
    }
    m.set_accepting(accepting % states, true);
    for (from, pats, to, moves) in rules {
        m.add_rule(
            from % states,
            pats.iter().map(|&p| PATTERNS[p]).collect(),
            to % states,
            moves.iter().map(|&mv| MOVES[mv]).collect(),
        );
    }
    m
}

fn raw_automaton() -> impl Strategy<Value = (usize, usize, usize, Vec<RawRule>)> {
    (1usize..=3, 1usize..=2).prop_flat_map(|(states, heads)| {
        let rule = (0..states, prop::collection::vec(0..5usize, heads), 0..states, prop::collection::vec(0..3usize, heads));
        (Just(states), Just(heads), 0..states, prop::collection::vec(rule, 0..8))
    })
}

/// Backward fixpoint over every configuration: the set that can reach an
/// accepting state, grown until stable.
fn accepts_by_fixpoint(m: &MultiheadAutomaton, x: &str) -> bool {
    let tape = Tape::new(x);
    let cells = x.chars().count() + 2;
    let k = m.head_count();
    let mut all = Vec::new();
    for q in 0..m.state_count() {
        for code in 0..cells.pow(k as u32) {
            let heads = (0..k).map(|i| (code / cells.pow(i as u32)) % cells).collect();
            all.push(Configuration { state: q, heads });
        }
    }
    let mut good: HashSet<Configuration> = all.iter().filter(|c| m.is_accepting(c.state)).cloned().collect();
    loop {
        let before = good.len();
        for c in &all {
            if good.contains(c) || m.is_accepting(c.state) {
                continue;
            }
            let scan: Vec<TapeSymbol> = c.heads.iter().map(|&p| tape.at(p)).collect();
            let reaches = m.rules(c.state).iter().any(|r| {
                r.pattern.iter().zip(&scan).all(|(p, s)| p.matches(*s)) && {
                    let heads = c.heads.iter().zip(&r.moves).map(|(&p, &mv)| tape.shift(p, mv)).collect();
                    good.contains(&Configuration { state: r.next, heads })
                }
            });
            if reaches {
                good.insert(c.clone());
            }
        }
        if good.len() == before {
            break;
        }
    }
    good.contains(&m.start_config())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(150))]

    #[test]
    fn reachability_matches_fixpoint((states, heads, acc, rules) in raw_automaton()) {
        let m = automaton(states, heads, acc, &rules);
        for x in strings_up_to(&['a', 'b'], 3) {
            prop_assert_eq!(m.accepts(&x), accepts_by_fixpoint(&m, &x), "input {:?}", x);
            if let Some(run) = m.accepting_path(&x) {
                // Replaying the recorded choices lands in an accepting state.
                let tape = Tape::new(&x);
                let mut c = m.start_config();
                for step in &run.steps {
                    prop_assert_eq!(&step.config, &c);
                    c = m.apply_choice(&tape, &c, step.choice).expect("recorded choice exists");
                }
                prop_assert!(m.is_accepting(c.state));
                prop_assert!(run.len() as u128 <= m.configuration_bound(x.len()));
            }
        }
    }

    #[test]
    fn compiled_honest_certificates_are_accepted((states, heads, acc, rules) in raw_automaton()) {
        let m = automaton(states, heads, acc, &rules);
        prop_assume!(m.validate().is_ok());
        let c = compile_weak(&m, &BigRational::new(BigInt::from(1), BigInt::from(2))).unwrap();
        for x in strings_up_to(&['a', 'b'], 2) {
            match c.honest_certificate(&x) {
                Ok(cert) => {
                    prop_assert!(m.accepts(&x));
                    let d = c.verifier.outcome_distribution(&x, &cert).unwrap();
                    prop_assert!(d.accept.is_one(), "{:?}", x);
                }
                Err(_) => prop_assert!(!m.accepts(&x)),
            }
        }
    }

    #[test]
    fn ensemble_search_matches_brute_force(
        kinds in prop::collection::vec((any::<bool>(), any::<bool>()), 1..=3),
        table in prop::collection::vec((0usize..6, 0usize..3), 54),
    ) {
        let v = random_verifier(&kinds, &table);
        let options = v.certificate_alphabet();
        for x in ["", "a", "ab"] {
            for len in 0..=3 {
                let mut best = BigRational::zero();
                let mut over_budget = false;
                for cert in all_certificates(&options, len) {
                    match v.outcome_distribution(x, &cert) {
                        Ok(d) => {
                            prop_assert!((d.accept.clone() + &d.reject + &d.nonhalt).is_one());
                            best = best.max(d.accept);
                        }
                        Err(_) => over_budget = true,
                    }
                }
                // Machines that can toss a third coin are malformed.
                if over_budget {
                    continue;
                }
                let attack = v.best_certificate(x, len).unwrap();
                prop_assert_eq!(&attack.probability, &best, "{:?} len {}", x, len);
                prop_assert!(attack.certificate.len() <= len);
                prop_assert_eq!(v.outcome_distribution(x, &attack.certificate).unwrap().accept, best);
            }
        }
    }
}

/// A two-coin verifier whose states are coin or deterministic and silent or
/// asking; the table supplies (next, move) for each transition key in turn.
fn random_verifier(kinds: &[(bool, bool)], table: &[(usize, usize)]) -> VerifierMachine {
    let mut v = VerifierMachine::new(&['a', 'b'], &["?", "x", "y"], HeadMode::TwoWay, 2);
    let ask = v.comm_id("?").unwrap();
    let ids: Vec<usize> = kinds
        .iter()
        .enumerate()
        .map(|(i, &(coin, asks))| {
            let kind = if coin { StateKind::Coin } else { StateKind::Deterministic };
            v.add_state(format!("s{i}"), kind, if asks { ask } else { CommId::NULL })
        })
        .collect();
    v.set_start(ids[0]);
    let targets: Vec<usize> = ids.iter().copied().chain([ACCEPT, REJECT]).collect();
    let mut entries = table.iter();
    let responses = [CommId::PAD, v.comm_id("x").unwrap(), v.comm_id("y").unwrap()];
    for (i, &(coin, asks)) in kinds.iter().enumerate() {
        let bits: &[Option<bool>] = if coin { &[Some(false), Some(true)] } else { &[None] };
        let comms: &[CommId] = if asks { &responses } else { &[CommId::NULL] };
        for sym in [TapeSymbol::EndMarker, TapeSymbol::Letter('a'), TapeSymbol::Letter('b')] {
            for &bit in bits {
                for &comm in comms {
                    let &(next, mv) = entries.next().expect("table is long enough");
                    v.add_transition(ids[i], sym, comm, bit, targets[next % targets.len()], MOVES[mv]);
                }
            }
        }
    }
    v
}

fn all_certificates(options: &[CommId], len: usize) -> Vec<Certificate> {
    let mut out = vec![Vec::new()];
    let mut layer = vec![Vec::new()];
    for _ in 0..len {
        layer = layer
            .iter()
            .flat_map(|prefix: &Vec<CommId>| {
                options.iter().map(move |&o| {
                    let mut c = prefix.clone();
                    c.push(o);
                    c
                })
            })
            .collect();
        out.extend(layer.iter().cloned());
    }
    out.into_iter().map(Certificate::new).collect()
}

#[test]
fn brute_force_helper_counts() {
    let opts = [CommId(2), CommId(3)];
    assert_eq!(all_certificates(&opts, 2).len(), 7);
}
