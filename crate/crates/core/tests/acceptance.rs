//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::cell::RefCell;
use std::collections::BTreeSet;
use std::time::Instant;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use fsverify::clock::add_clock;
use fsverify::compiler::{compile_strong, compile_weak};
use fsverify::derandomize::{find_private_certificate, to_one_way_multihead};
use fsverify::dissimilarity::n_dissimilarity;
use fsverify::markov::{acceptance_probability_2pfa, build_split_chain, TwoPfa};
use fsverify::showcase::{build_twin_verifier, twin_certificate, twin_recognizer, TWIN};
use fsverify::tape::strings_up_to;
use fsverify::verifier::{fraction, Objective, StateKind, ACCEPT, REJECT};
use fsverify::{
    Certificate, CommId, HeadMode, Move, MultiheadAutomaton, OutcomeDistribution, SymbolPattern, TapeSymbol,
    VerifierMachine,
};

fn q(p: i64, d: i64) -> BigRational {
    BigRational::new(BigInt::from(p), BigInt::from(d))
}

/// Every distribution computed here goes through `distribution`,
/// which also replays each coin string to check the coin budget.
#[derive(Default)]
struct Audit {
    triples: usize,
    failures: Vec<String>,
}

thread_local! {
    static AUDIT: RefCell<Audit> = RefCell::new(Audit::default());
}

fn distribution(v: &VerifierMachine, x: &str, cert: &Certificate) -> OutcomeDistribution {
    let d = v.outcome_distribution(x, cert).expect("enumerable budget");
    let b = v.coin_budget();
    let mut problem = None;
    if d.accept.clone() + &d.reject + &d.nonhalt != BigRational::one() {
        problem = Some(format!("{x}: mass {} + {} + {}", fraction(&d.accept), fraction(&d.reject), fraction(&d.nonhalt)));
    }
    for i in 0..1u64 << b {
        let coins: Vec<bool> = (0..b).map(|j| (i >> (b - 1 - j)) & 1 == 1).collect();
        match v.run_branch(x, &coins, cert) {
            Ok(out) if out.coins_used <= b => {}
            Ok(out) => problem = Some(format!("{x}: branch used {} > {b} coins", out.coins_used)),
            Err(e) => problem = Some(format!("{x}: {e}")),
        }
    }
    AUDIT.with(|a| {
        let mut a = a.borrow_mut();
        a.triples += 1;
        if let Some(p) = problem {
            a.failures.push(p);
        }
    });
    d
}

type Outcome = Result<String, String>;

fn check(cond: bool, ok: String, bad: impl FnOnce() -> String) -> Outcome {
    if cond {
        Ok(ok)
    } else {
        Err(bad())
    }
}

fn twin_members(max_w: usize) -> Vec<String> {
    strings_up_to(&['a', 'b'], max_w).into_iter().map(|w| format!("{w}c{w}")).collect()
}

fn twin_nonmembers(max_len: usize) -> Vec<String> {
    strings_up_to(TWIN.alphabet, max_len).into_iter().filter(|x| !TWIN.contains(x)).collect()
}

fn criterion_1() -> Outcome {
    let v = build_twin_verifier();
    for x in twin_members(4) {
        let cert = twin_certificate(&v, &x).expect("member");
        let d = distribution(&v, &x, &cert);
        if d.accept != q(3, 4) {
            return Err(format!("member {x}: accept {}", fraction(&d.accept)));
        }
    }
    let mut worst = BigRational::zero();
    let nonmembers = twin_nonmembers(7);
    for x in &nonmembers {
        let attack = v.best_certificate(x, x.len() + 1).expect("enumerable budget");
        distribution(&v, x, &attack.certificate);
        worst = worst.max(attack.probability);
    }
    check(
        worst <= q(3, 8),
        format!("31 members at 3/4; max over {} non-members {}", nonmembers.len(), fraction(&worst)),
        || format!("non-member reached {}", fraction(&worst)),
    )
}

fn criterion_2() -> Outcome {
    let c = compile_weak(&twin_recognizer(), &q(1, 4)).expect("compiles");
    if (c.r, c.m) != (1, 2) {
        return Err(format!("r = {}, m = {}", c.r, c.m));
    }
    let members: Vec<String> = strings_up_to(TWIN.alphabet, 7).into_iter().filter(|x| TWIN.contains(x)).collect();
    for x in &members {
        let cert = c.honest_certificate(x).expect("member");
        let d = distribution(&c.verifier, x, &cert);
        if !d.accept.is_one() || !d.nonhalt.is_zero() {
            return Err(format!("{x}: accept {} nonhalt {}", fraction(&d.accept), fraction(&d.nonhalt)));
        }
    }
    Ok(format!("r=1 m=2; {} members accepted with probability 1/1", members.len()))
}

fn criterion_3() -> Outcome {
    let c = compile_weak(&twin_recognizer(), &q(1, 4)).expect("compiles");
    let mut worst = BigRational::zero();
    let nonmembers = twin_nonmembers(5);
    for x in &nonmembers {
        let bound = c.certificate_length_bound(x.len()) as usize;
        let attack = c.verifier.best_certificate(x, bound).expect("enumerable budget");
        distribution(&c.verifier, x, &attack.certificate);
        worst = worst.max(attack.probability);
    }
    check(
        worst <= q(1, 4),
        format!("max over {} non-members {} <= 1/4", nonmembers.len(), fraction(&worst)),
        || format!("non-member reached {}", fraction(&worst)),
    )
}

fn criterion_4() -> Outcome {
    let c = compile_strong(&twin_recognizer()).expect("compiles");
    for x in strings_up_to(TWIN.alphabet, 5).into_iter().filter(|x| TWIN.contains(x)) {
        let d = distribution(&c.verifier, &x, &c.honest_certificate(&x).expect("member"));
        if d.accept != q(3, 4) {
            return Err(format!("member {x}: accept {}", fraction(&d.accept)));
        }
    }
    let (mut acc, mut nonhalt) = (BigRational::zero(), BigRational::zero());
    let nonmembers = twin_nonmembers(5);
    for x in &nonmembers {
        let bound = c.certificate_length_bound(x.len()) as usize;
        let a = c.verifier.best_certificate(x, bound).expect("enumerable budget");
        distribution(&c.verifier, x, &a.certificate);
        acc = acc.max(a.probability);
        let h = c.verifier.worst_case_certificate(x, bound, Objective::Nonhalt).expect("enumerable budget");
        distribution(&c.verifier, x, &h.certificate);
        nonhalt = nonhalt.max(h.probability);
    }
    check(
        acc <= q(3, 8) && nonhalt <= q(3, 8),
        format!(
            "members at 3/4; over {} non-members max accept {} max nonhalt {}",
            nonmembers.len(),
            fraction(&acc),
            fraction(&nonhalt)
        ),
        || format!("accept {} nonhalt {}", fraction(&acc), fraction(&nonhalt)),
    )
}

fn criterion_5() -> Outcome {
    let expected: BTreeSet<String> = strings_up_to(TWIN.alphabet, 5).into_iter().filter(|x| TWIN.contains(x)).collect();
    let c = compile_weak(&twin_recognizer(), &q(1, 4)).expect("compiles");
    let mut found = BTreeSet::new();
    for x in strings_up_to(TWIN.alphabet, 5) {
        if find_private_certificate(&c.verifier, &x, None).expect("enumerable budget").is_some() {
            found.insert(x);
        }
    }
    if found != expected {
        return Err(format!("private-coin language differs: {:?}", found.symmetric_difference(&expected).collect::<Vec<_>>()));
    }
    let one_way = compile_weak(&twin_recognizer(), &q(1, 2)).expect("compiles");
    if one_way.verifier.mode() == HeadMode::TwoWay {
        return Err("compiled verifier is two-way".into());
    }
    let m = to_one_way_multihead(&one_way.verifier).map_err(|e| e.to_string())?;
    let lang = m.enumerate_language(5);
    check(
        lang == expected,
        format!("private-coin language and {}-head one-way automaton both equal TWIN up to length 5", m.head_count()),
        || format!("automaton language differs: {:?}", lang.symmetric_difference(&expected).collect::<Vec<_>>()),
    )
}

fn random_2pfa(rng: &mut ChaCha8Rng) -> TwoPfa {
    let states = rng.gen_range(1..=3);
    let mut v = VerifierMachine::new(&['a', 'b'], &[], HeadMode::TwoWay, 0);
    let ids: Vec<usize> = (0..states)
        .map(|i| {
            let kind = if rng.gen_bool(0.5) { StateKind::Coin } else { StateKind::Deterministic };
            v.add_state(format!("q{i}"), kind, CommId::NULL)
        })
        .collect();
    v.set_start(ids[0]);
    let moves = [Move::Left, Move::Stay, Move::Right];
    for &s in &ids {
        let bits = if v.state(s).kind == StateKind::Coin { vec![Some(false), Some(true)] } else { vec![None] };
        for sym in [TapeSymbol::EndMarker, TapeSymbol::Letter('a'), TapeSymbol::Letter('b')] {
            for &bit in &bits {
                let next = match rng.gen_range(0..states + 2) {
                    x if x < states => ids[x],
                    x if x == states => ACCEPT,
                    _ => REJECT,
                };
                v.add_transition(s, sym, CommId::NULL, bit, next, moves[rng.gen_range(0..3)]);
            }
        }
    }
    TwoPfa::new(v).expect("silent")
}

fn criterion_6() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(2024);
    let words: Vec<String> = strings_up_to(&['a', 'b'], 4).into_iter().filter(|w| w.len() >= 2).collect();
    let mut splits = 0;
    for trial in 0..200 {
        let a = random_2pfa(&mut rng);
        for w in &words {
            let direct = acceptance_probability_2pfa(&a, w);
            for cut in 1..w.len() {
                let (x, y) = w.split_at(cut);
                let chain = build_split_chain(&a, x, y).map_err(|e| e.to_string())?;
                if !chain.chain.is_row_stochastic() {
                    return Err(format!("machine {trial}, {x}|{y}: chain not stochastic"));
                }
                let via = chain.acceptance();
                if via != direct {
                    return Err(format!("machine {trial}, {x}|{y}: {} vs {}", fraction(&via), fraction(&direct)));
                }
                splits += 1;
            }
        }
    }
    Ok(format!("200 machines, {splits} splits, absorption equals acceptance probability"))
}

fn criterion_7() -> Outcome {
    let values: Vec<usize> = [2, 4, 6].iter().map(|&n| n_dissimilarity(&TWIN, n).value).collect();
    check(
        values.windows(2).all(|w| w[0] <= w[1]) && values[2] >= 4,
        format!("N(2), N(4), N(6) = {values:?}"),
        || format!("values {values:?}"),
    )
}

fn criterion_8() -> Outcome {
    // Accepts strings containing b, but may stall forever on any a.
    let mut m = MultiheadAutomaton::new(&['a', 'b'], vec![HeadMode::TwoWay]);
    let scan = m.add_state("scan");
    let stall = m.add_state("stall");
    let acc = m.add_state("acc");
    m.set_accepting(acc, true);
    m.add_rule(0, vec![TapeSymbol::EndMarker.into()], scan, vec![Move::Right]);
    m.add_rule(scan, vec![TapeSymbol::Letter('a').into()], scan, vec![Move::Right]);
    m.add_rule(scan, vec![TapeSymbol::Letter('a').into()], stall, vec![Move::Stay]);
    m.add_rule(scan, vec![TapeSymbol::Letter('b').into()], acc, vec![Move::Stay]);
    m.add_rule(stall, vec![SymbolPattern::Any], stall, vec![Move::Stay]);
    if m.longest_branch("a").is_some() {
        return Err("source machine does not loop".into());
    }
    let c = add_clock(&m);
    let mut longest_ratio = 0.0f64;
    for x in strings_up_to(&['a', 'b'], 6) {
        let Some(longest) = c.automaton.longest_branch(&x) else {
            return Err(format!("{x}: a clocked branch loops"));
        };
        let bound = c.step_bound(x.len());
        if longest as u128 > bound {
            return Err(format!("{x}: branch of {longest} steps exceeds {bound}"));
        }
        if c.automaton.accepts(&x) != m.accepts(&x) {
            return Err(format!("{x}: language changed"));
        }
        longest_ratio = longest_ratio.max(longest as f64 / bound as f64);
    }
    Ok(format!("127 inputs halt within |Q|(n+2)^k, language kept; max branch/bound {longest_ratio:.3}"))
}

fn criterion_9() -> Outcome {
    AUDIT.with(|a| {
        let a = a.borrow();
        check(
            a.failures.is_empty() && a.triples > 0,
            format!("{} triples: masses sum to 1/1, no branch over budget", a.triples),
            || format!("{} of {} triples failed, first: {}", a.failures.len(), a.triples, a.failures.first().map_or("none", |s| s)),
        )
    })
}

fn main() {
    let criteria: [(usize, fn() -> Outcome); 9] = [
        (1, criterion_1),
        (2, criterion_2),
        (3, criterion_3),
        (4, criterion_4),
        (5, criterion_5),
        (6, criterion_6),
        (7, criterion_7),
        (8, criterion_8),
        (9, criterion_9),
    ];
    let only: Option<usize> = std::env::var("ACCEPTANCE_ONLY").ok().and_then(|s| s.parse().ok());
    let mut failed = 0;
    for (n, f) in criteria {
        if only.is_some_and(|o| o != n) {
            continue;
        }
        let start = Instant::now();
        let result = f();
        let secs = start.elapsed().as_secs_f64();
        match result {
            Ok(msg) => println!("criterion {n}: PASS ({secs:.1}s) {msg}"),
            Err(msg) => {
                failed += 1;
                println!("criterion {n}: FAIL ({secs:.1}s) {msg}");
            }
        }
    }
    if failed > 0 {
        std::process::exit(1);
    }
}
