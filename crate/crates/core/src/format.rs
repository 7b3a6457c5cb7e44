//! Line-oriented text formats for machines. Lines starting with `#` are
//! comments; `#` elsewhere is an ordinary token.
//!
//! A multihead automaton:
//!
//! ```text
//! type 2nfa
//! heads 2
//! modes two-way two-way
//! alphabet a b c
//! states s0 s1 acc
//! start s0
//! accept acc
//! trans s0 CENT CENT -> s1 +1 +1
//! ```
//!
//! The `type` is 2nfa, 2dfa or 1nfa, and the order of `states` fixes state
//! ids. Rules keep their order of appearance, since a certificate names a rule by
//! its index within the rules that match.
//!
//! A verifier; `type 2pfa` marks one that never communicates:
//!
//! ```text
//! type verifier
//! mode real-time
//! alphabet a b c
//! comm ? a b
//! coins 3
//! halting ACCEPT REJECT
//! state split coin
//! state p1 det send ?
//! start split
//! trans split CENT NULL 0 -> p1 +1
//! ```
//!
//! A compiled verifier is a verifier file preceded by `compiled weak|strong r m`
//! and followed by a `source` ... `end` block holding the source automaton.

use std::collections::HashMap;
use std::fmt::Write as _;

use thiserror::Error;

use crate::compiler::{CompiledVerifier, VerifierKind};
use crate::multihead::{MultiheadAutomaton, StateId, SymbolPattern};
use crate::tape::{HeadMode, Move, TapeSymbol};
use crate::verifier::{CommId, StateKind, VerifierMachine, ACCEPT, REJECT};

#[derive(Debug, Error, Clone, PartialEq, Eq)]
#[error("line {line}: {message}")]
pub struct FormatError {
    pub line: usize,
    pub message: String,
}

fn err<T>(line: usize, message: impl Into<String>) -> Result<T, FormatError> {
    Err(FormatError { line, message: message.into() })
}

/// Either kind of machine file.
#[derive(Clone, Debug)]
pub enum Machine {
    Multihead(MultiheadAutomaton),
    Verifier(VerifierMachine),
    Compiled(CompiledVerifier),
}

/// Non-empty lines with comments stripped, paired with 1-based line numbers.
fn lines(text: &str) -> Vec<(usize, Vec<&str>)> {
    text.lines()
        .enumerate()
        .filter_map(|(i, l)| {
            let l = if l.trim_start().starts_with('#') { "" } else { l };
            let toks: Vec<&str> = l.split_whitespace().collect();
            (!toks.is_empty()).then_some((i + 1, toks))
        })
        .collect()
}

fn type_of(text: &str) -> Option<(usize, String)> {
    lines(text)
        .into_iter()
        .find(|(_, t)| t[0] == "type" || t[0] == "compiled")
        .map(|(n, t)| (n, if t[0] == "compiled" { "compiled".into() } else { t.get(1).unwrap_or(&"").to_string() }))
}

pub fn parse_machine(text: &str) -> Result<Machine, FormatError> {
    match type_of(text) {
        Some((_, t)) if t == "compiled" => parse_compiled(text).map(Machine::Compiled),
        Some((_, t)) if t == "verifier" || t == "2pfa" => parse_verifier(text).map(Machine::Verifier),
        Some(_) => parse_multihead(text).map(Machine::Multihead),
        None => err(1, "missing 'type' line"),
    }
}

fn symbol(line: usize, tok: &str) -> Result<TapeSymbol, FormatError> {
    TapeSymbol::parse(tok).map_or_else(|| err(line, format!("bad tape symbol '{tok}'")), Ok)
}

fn mv(line: usize, tok: &str) -> Result<Move, FormatError> {
    Move::parse(tok).map_or_else(|| err(line, format!("bad move '{tok}'")), Ok)
}

fn mode(line: usize, tok: &str) -> Result<HeadMode, FormatError> {
    HeadMode::parse(tok).map_or_else(|| err(line, format!("bad head mode '{tok}'")), Ok)
}

fn alphabet(line: usize, toks: &[&str]) -> Result<Vec<char>, FormatError> {
    toks.iter()
        .map(|t| {
            let mut cs = t.chars();
            match (cs.next(), cs.next()) {
                (Some(c), None) if *t != "CENT" => Ok(c),
                _ => err(line, format!("bad letter '{t}'")),
            }
        })
        .collect()
}

fn machine_type(m: &MultiheadAutomaton) -> &'static str {
    if m.modes().iter().all(|h| (*h).is_one_way()) {
        "1nfa"
    } else if m.is_deterministic() {
        "2dfa"
    } else {
        "2nfa"
    }
}

pub fn serialize_multihead(m: &MultiheadAutomaton) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "type {}", machine_type(m));
    let _ = writeln!(out, "heads {}", m.head_count());
    let modes: Vec<String> = m.modes().iter().map(ToString::to_string).collect();
    let _ = writeln!(out, "modes {}", modes.join(" "));
    let letters: Vec<String> = m.alphabet().iter().map(char::to_string).collect();
    let _ = writeln!(out, "alphabet {}", letters.join(" "));
    let names: Vec<&str> = (0..m.state_count()).map(|q| m.state_name(q)).collect();
    let _ = writeln!(out, "states {}", names.join(" "));
    let _ = writeln!(out, "start {}", m.state_name(m.start()));
    let acc: Vec<&str> = (0..m.state_count()).filter(|&q| m.is_accepting(q)).map(|q| m.state_name(q)).collect();
    if !acc.is_empty() {
        let _ = writeln!(out, "accept {}", acc.join(" "));
    }
    for q in 0..m.state_count() {
        for rule in m.rules(q) {
            let pat: Vec<String> = rule.pattern.iter().map(ToString::to_string).collect();
            let moves: Vec<String> = rule.moves.iter().map(ToString::to_string).collect();
            let _ = writeln!(out, "trans {} {} -> {} {}", names[q], pat.join(" "), names[rule.next], moves.join(" "));
        }
    }
    out
}

pub fn parse_multihead(text: &str) -> Result<MultiheadAutomaton, FormatError> {
    let mut kind = None;
    let mut heads = None;
    let mut modes: Option<Vec<HeadMode>> = None;
    let mut letters: Option<Vec<char>> = None;
    let mut states: Option<(usize, Vec<String>)> = None;
    let mut start = None;
    let mut accept = Vec::new();
    let mut trans = Vec::new();
    for (n, t) in lines(text) {
        match t[0] {
            "type" => match t.get(1..) {
                Some(["2nfa" | "2dfa" | "1nfa"]) => kind = Some((n, t[1])),
                _ => return err(n, "expected 'type 2nfa|2dfa|1nfa'"),
            },
            "heads" => {
                heads = Some(t.get(1).and_then(|h| h.parse::<usize>().ok()).filter(|&h| h > 0).map_or_else(
                    || err(n, "expected a positive head count"),
                    Ok,
                )?)
            }
            "modes" => modes = Some(t[1..].iter().map(|m| mode(n, m)).collect::<Result<_, _>>()?),
            "alphabet" => letters = Some(alphabet(n, &t[1..])?),
            "states" => states = Some((n, t[1..].iter().map(|s| s.to_string()).collect())),
            "start" => start = Some((n, t.get(1).copied().unwrap_or(""))),
            "accept" => accept.extend(t[1..].iter().map(|s| (n, *s))),
            "trans" => trans.push((n, t)),
            other => return err(n, format!("unknown directive '{other}'")),
        }
    }
    let heads = heads.map_or_else(|| err(1, "missing 'heads'"), Ok)?;
    let modes = modes.unwrap_or_else(|| vec![HeadMode::TwoWay; heads]);
    if modes.len() != heads {
        return err(1, format!("{} modes for {heads} heads", modes.len()));
    }
    let letters = letters.map_or_else(|| err(1, "missing 'alphabet'"), Ok)?;
    let (sline, names) = states.map_or_else(|| err(1, "missing 'states'"), Ok)?;
    if names.is_empty() {
        return err(sline, "no states declared");
    }
    let mut m = MultiheadAutomaton::empty(&letters, modes);
    let mut ids: HashMap<String, StateId> = HashMap::new();
    for name in &names {
        if ids.insert(name.clone(), m.add_state(name.clone())).is_some() {
            return err(sline, format!("state '{name}' declared twice"));
        }
    }
    let lookup = |n: usize, s: &str| ids.get(s).copied().map_or_else(|| err(n, format!("unknown state '{s}'")), Ok);
    let (n, s) = start.unwrap_or((sline, names[0].as_str()));
    m.set_start(lookup(n, s)?);
    for (n, s) in accept {
        m.set_accepting(lookup(n, s)?, true);
    }
    for (n, t) in trans {
        let arrow = t.iter().position(|&x| x == "->").map_or_else(|| err(n, "missing '->'"), Ok)?;
        if arrow != heads + 2 || t.len() != arrow + 2 + heads {
            return err(n, format!("expected 'trans q <{heads} patterns> -> q' <{heads} moves>'"));
        }
        let from = lookup(n, t[1])?;
        let pattern = t[2..arrow]
            .iter()
            .map(|p| SymbolPattern::parse(p).map_or_else(|| err(n, format!("bad pattern '{p}'")), Ok))
            .collect::<Result<Vec<_>, _>>()?;
        let to = lookup(n, t[arrow + 1])?;
        let moves = t[arrow + 2..].iter().map(|x| mv(n, x)).collect::<Result<Vec<_>, _>>()?;
        m.add_rule(from, pattern, to, moves);
    }
    if let Some((n, k)) = kind {
        if k == "2dfa" && !m.is_deterministic() {
            return err(n, "declared 2dfa but the rules are nondeterministic");
        }
        if k == "1nfa" && !m.modes().iter().all(|h| (*h).is_one_way()) {
            return err(n, "declared 1nfa but some head is two-way");
        }
    }
    Ok(m)
}

pub fn serialize_verifier(v: &VerifierMachine) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "type {}", if v.is_silent() { "2pfa" } else { "verifier" });
    let _ = writeln!(out, "mode {}", v.mode());
    let letters: Vec<String> = v.alphabet().iter().map(char::to_string).collect();
    let _ = writeln!(out, "alphabet {}", letters.join(" "));
    let comm = &v.comm_alphabet()[2..];
    if !comm.is_empty() {
        let _ = writeln!(out, "comm {}", comm.join(" "));
    }
    let _ = writeln!(out, "coins {}", v.coin_budget());
    let _ = writeln!(out, "halting {} {}", v.state(ACCEPT).name, v.state(REJECT).name);
    for q in 2..v.state_count() {
        let s = v.state(q);
        let kind = if s.kind == StateKind::Coin { "coin" } else { "det" };
        let _ = write!(out, "state {} {kind}", s.name);
        if s.send != CommId::NULL {
            let _ = write!(out, " send {}", v.comm_name(s.send));
        }
        out.push('\n');
    }
    let _ = writeln!(out, "start {}", v.state(v.start()).name);
    for q in 2..v.state_count() {
        for (key, (next, m)) in v.transitions_of(q) {
            let bit = match key.bit {
                Some(b) => if b { "1" } else { "0" },
                None => "-",
            };
            let _ = writeln!(
                out,
                "trans {} {} {} {bit} -> {} {m}",
                v.state(q).name,
                key.symbol,
                v.comm_name(key.comm),
                v.state(next).name
            );
        }
    }
    out
}

pub fn parse_verifier(text: &str) -> Result<VerifierMachine, FormatError> {
    let all = lines(text);
    let mut hmode = HeadMode::TwoWay;
    let mut letters = None;
    let mut comm: Vec<String> = Vec::new();
    let mut coins = 0u32;
    let mut halting = ("ACCEPT".to_string(), "REJECT".to_string());
    let mut decls = Vec::new();
    let mut start = None;
    let mut trans = Vec::new();
    let mut silent = false;
    for (n, t) in &all {
        let n = *n;
        match t[0] {
            "type" => match t.get(1..) {
                Some(["verifier"]) => {}
                Some(["2pfa"]) => silent = true,
                _ => return err(n, "expected 'type verifier|2pfa'"),
            },
            "mode" => hmode = mode(n, t.get(1).copied().unwrap_or(""))?,
            "alphabet" => letters = Some(alphabet(n, &t[1..])?),
            "comm" => comm.extend(t[1..].iter().map(|s| s.to_string())),
            "coins" => {
                coins = t.get(1).and_then(|c| c.parse().ok()).map_or_else(|| err(n, "expected a coin budget"), Ok)?
            }
            "halting" => match t.get(1..) {
                Some([a, r]) => halting = (a.to_string(), r.to_string()),
                _ => return err(n, "expected 'halting <accept> <reject>'"),
            },
            "state" => decls.push((n, t)),
            "start" => start = Some((n, t.get(1).copied().unwrap_or(""))),
            "trans" => trans.push((n, t)),
            other => return err(n, format!("unknown directive '{other}'")),
        }
    }
    let letters = letters.map_or_else(|| err(1, "missing 'alphabet'"), Ok)?;
    let comm_refs: Vec<&str> = comm.iter().map(String::as_str).collect();
    let mut v = VerifierMachine::new(&letters, &comm_refs, hmode, coins);
    v.rename_halting(&halting.0, &halting.1);
    let mut ids: HashMap<String, StateId> = HashMap::from([(halting.0.clone(), ACCEPT), (halting.1.clone(), REJECT)]);
    let comm_lookup = |v: &VerifierMachine, n: usize, s: &str| {
        v.comm_id(s).map_or_else(|| err(n, format!("unknown communication symbol '{s}'")), Ok)
    };
    for (n, t) in decls {
        let (name, kind, send) = match t.get(1..) {
            Some([name, kind]) => (*name, *kind, None),
            Some([name, kind, "send", s]) => (*name, *kind, Some(*s)),
            _ => return err(n, "expected 'state <name> coin|det [send <symbol>]'"),
        };
        let kind = match kind {
            "coin" => StateKind::Coin,
            "det" => StateKind::Deterministic,
            k => return err(n, format!("bad state kind '{k}'")),
        };
        let send = match send {
            Some(s) => comm_lookup(&v, n, s)?,
            None => CommId::NULL,
        };
        if ids.contains_key(name) {
            return err(n, format!("state '{name}' declared twice"));
        }
        let id = v.add_state(name, kind, send);
        ids.insert(name.to_string(), id);
    }
    let lookup = |n: usize, s: &str| ids.get(s).copied().map_or_else(|| err(n, format!("unknown state '{s}'")), Ok);
    match start {
        Some((n, s)) => v.set_start(lookup(n, s)?),
        None if v.state_count() > 2 => v.set_start(2),
        None => {}
    }
    for (n, t) in trans {
        let [_, from, sym, c, bit, "->", to, m] = t.as_slice() else {
            return err(n, "expected 'trans <state> <symbol> <comm> 0|1|- -> <state> <move>'");
        };
        let bit = match *bit {
            "0" => Some(false),
            "1" => Some(true),
            "-" => None,
            b => return err(n, format!("bad coin bit '{b}'")),
        };
        let (from, to) = (lookup(n, from)?, lookup(n, to)?);
        let (sym, c, m) = (symbol(n, sym)?, comm_lookup(&v, n, c)?, mv(n, m)?);
        v.add_transition(from, sym, c, bit, to, m);
    }
    if silent && !v.is_silent() {
        return err(1, "declared 2pfa but some state communicates");
    }
    Ok(v)
}

pub fn serialize_compiled(c: &CompiledVerifier) -> String {
    let kind = match c.kind {
        VerifierKind::Weak => "weak",
        VerifierKind::Strong => "strong",
    };
    let mut out = format!("compiled {kind} {} {}\n", c.r, c.m);
    out.push_str(&serialize_verifier(&c.verifier));
    out.push_str("source\n");
    out.push_str(&serialize_multihead(&c.source));
    out.push_str("end\n");
    out
}

pub fn parse_compiled(text: &str) -> Result<CompiledVerifier, FormatError> {
    let raw: Vec<&str> = text.lines().collect();
    let is = |l: &str, w: &str| l.trim() == w;
    let open = raw.iter().position(|l| is(l, "source")).map_or_else(|| err(raw.len(), "missing 'source' block"), Ok)?;
    let close = raw.iter().rposition(|l| is(l, "end")).filter(|&e| e > open);
    let close = close.map_or_else(|| err(raw.len(), "missing 'end' after 'source'"), Ok)?;
    // Blank out the other part so line numbers in errors stay accurate.
    let keep = |range: &dyn Fn(usize) -> bool| -> String {
        raw.iter().enumerate().map(|(i, l)| if range(i) { *l } else { "" }).collect::<Vec<_>>().join("\n")
    };
    let mut header = None;
    let head_text = keep(&|i| i < open || i > close);
    let mut body = Vec::new();
    for (i, l) in head_text.lines().enumerate() {
        let toks: Vec<&str> = l.split_whitespace().collect();
        if toks.first() == Some(&"compiled") {
            let parsed = match toks.as_slice() {
                [_, k, r, m] => {
                    let kind = match *k {
                        "weak" => Some(VerifierKind::Weak),
                        "strong" => Some(VerifierKind::Strong),
                        _ => None,
                    };
                    kind.zip(r.parse::<u32>().ok()).zip(m.parse::<u32>().ok())
                }
                _ => None,
            };
            header = Some(parsed.map_or_else(|| err(i + 1, "expected 'compiled weak|strong <r> <m>'"), Ok)?);
            body.push("");
        } else {
            body.push(l);
        }
    }
    let ((kind, r), m) = header.map_or_else(|| err(1, "missing 'compiled' header"), Ok)?;
    let verifier = parse_verifier(&body.join("\n"))?;
    let source = parse_multihead(&keep(&|i| i > open && i < close))?;
    Ok(CompiledVerifier { verifier, r, m, source, kind })
}
