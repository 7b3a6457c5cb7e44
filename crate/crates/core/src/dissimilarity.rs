//! The nonregularity measure `N_L(n)`: the largest number of strings of
//! length at most `n` that are pairwise `n`-dissimilar.
//!
//! `w` and `w'` are `n`-dissimilar when some `v` with `|wv|, |w'v| ≤ n` puts
//! exactly one of `wv`, `w'v` in `L`. Strings of equal length with the same
//! membership row over their admissible suffixes are interchangeable, so the
//! search collapses them first and then looks for a maximum clique.

use std::collections::HashMap;

use crate::showcase::LanguageOracle;
use crate::tape::strings_up_to;

pub const EVEN: LanguageOracle =
    LanguageOracle { name: "even", alphabet: &['a', 'b'], membership: |x| x.chars().count() % 2 == 0 };

pub const ALL: LanguageOracle = LanguageOracle { name: "all", alphabet: &['a', 'b'], membership: |_| true };

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct DissimilarityReport {
    pub n: usize,
    pub value: usize,
    /// Pairwise `n`-dissimilar strings, `value` of them.
    pub witnesses: Vec<String>,
    /// `(i, j, v)`: `v` separates `witnesses[i]` from `witnesses[j]`.
    pub distinguishers: Vec<(usize, usize, String)>,
}

/// A shortest-then-lexicographic `v` separating `w` and `w2`, if any.
pub fn distinguisher(lang: &LanguageOracle, w: &str, w2: &str, n: usize) -> Option<String> {
    let room = n.checked_sub(w.chars().count().max(w2.chars().count()))?;
    strings_up_to(lang.alphabet, room)
        .into_iter()
        .find(|v| lang.contains(&format!("{w}{v}")) != lang.contains(&format!("{w2}{v}")))
}

pub fn n_dissimilarity(lang: &LanguageOracle, n: usize) -> DissimilarityReport {
    let suffixes = strings_up_to(lang.alphabet, n);
    // Number of suffixes of length <= r, for every r.
    let mut count_upto = vec![0usize; n + 1];
    for v in &suffixes {
        for c in count_upto.iter_mut().skip(v.chars().count()) {
            *c += 1;
        }
    }

    let mut reps: Vec<(String, usize, Vec<bool>)> = Vec::new();
    let mut seen: HashMap<(usize, Vec<bool>), ()> = HashMap::new();
    for w in strings_up_to(lang.alphabet, n) {
        let len = w.chars().count();
        let row: Vec<bool> = suffixes[..count_upto[n - len]].iter().map(|v| lang.contains(&format!("{w}{v}"))).collect();
        if seen.insert((len, row.clone()), ()).is_none() {
            reps.push((w, len, row));
        }
    }

    let k = reps.len();
    let mut adj = vec![vec![false; k]; k];
    for i in 0..k {
        for j in i + 1..k {
            let room = count_upto[n - reps[i].1.max(reps[j].1)];
            let d = reps[i].2[..room] != reps[j].2[..room];
            adj[i][j] = d;
            adj[j][i] = d;
        }
    }

    let mut best = Vec::new();
    bron_kerbosch(&adj, Vec::new(), (0..k).collect(), Vec::new(), &mut best);
    best.sort_unstable();
    let witnesses: Vec<String> = best.iter().map(|&i| reps[i].0.clone()).collect();
    let mut distinguishers = Vec::new();
    for i in 0..witnesses.len() {
        for j in i + 1..witnesses.len() {
            let v = distinguisher(lang, &witnesses[i], &witnesses[j], n).expect("clique members are dissimilar");
            distinguishers.push((i, j, v));
        }
    }
    DissimilarityReport { n, value: witnesses.len(), witnesses, distinguishers }
}

/// Maximum clique with pivoting; `best` keeps the largest found.
fn bron_kerbosch(adj: &[Vec<bool>], r: Vec<usize>, p: Vec<usize>, mut x: Vec<usize>, best: &mut Vec<usize>) {
    if p.is_empty() && x.is_empty() {
        if r.len() > best.len() {
            *best = r;
        }
        return;
    }
    if r.len() + p.len() <= best.len() {
        return;
    }
    let pivot = p
        .iter()
        .chain(&x)
        .copied()
        .max_by_key(|&u| p.iter().filter(|&&v| adj[u][v]).count())
        .expect("p or x is non-empty");
    let mut p = p;
    let candidates: Vec<usize> = p.iter().copied().filter(|&v| !adj[pivot][v]).collect();
    for v in candidates {
        let mut r2 = r.clone();
        r2.push(v);
        let p2 = p.iter().copied().filter(|&u| adj[v][u]).collect();
        let x2 = x.iter().copied().filter(|&u| adj[v][u]).collect();
        bron_kerbosch(adj, r2, p2, x2, best);
        p.retain(|&u| u != v);
        x.push(v);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::showcase::{NH, TWIN};

    /// Exhaustive search over all subsets of the raw strings.
    fn brute_force(lang: &LanguageOracle, n: usize) -> usize {
        let words = strings_up_to(lang.alphabet, n);
        let mut best = 0;
        fn grow(lang: &LanguageOracle, n: usize, words: &[String], chosen: &mut Vec<usize>, from: usize, best: &mut usize) {
            *best = (*best).max(chosen.len());
            for i in from..words.len() {
                if chosen.iter().all(|&j| distinguisher(lang, &words[i], &words[j], n).is_some()) {
                    chosen.push(i);
                    grow(lang, n, words, chosen, i + 1, best);
                    chosen.pop();
                }
            }
        }
        grow(lang, n, &words, &mut Vec::new(), 0, &mut best);
        best
    }

    #[test]
    fn regular_languages() {
        for n in 1..=5 {
            assert_eq!(n_dissimilarity(&ALL, n).value, 1);
            assert_eq!(n_dissimilarity(&EVEN, n).value, 2);
        }
        assert_eq!(n_dissimilarity(&EVEN, 0).value, 1);
    }

    #[test]
    fn matches_brute_force() {
        for n in 0..=3 {
            for lang in [&TWIN, &NH, &EVEN] {
                assert_eq!(n_dissimilarity(lang, n).value, brute_force(lang, n), "{} {n}", lang.name);
            }
        }
    }

    #[test]
    fn witnesses_are_separated() {
        let rep = n_dissimilarity(&TWIN, 4);
        assert_eq!(rep.distinguishers.len(), rep.value * (rep.value - 1) / 2);
        for (i, j, v) in &rep.distinguishers {
            let (a, b) = (&rep.witnesses[*i], &rep.witnesses[*j]);
            assert!(a.len() + v.len() <= 4 && b.len() + v.len() <= 4);
            assert_ne!(TWIN.contains(&format!("{a}{v}")), TWIN.contains(&format!("{b}{v}")));
        }
    }

    #[test]
    fn twin_grows() {
        let values: Vec<usize> = [2, 4, 6].iter().map(|&n| n_dissimilarity(&TWIN, n).value).collect();
        assert!(values.windows(2).all(|w| w[0] <= w[1]), "{values:?}");
        assert!(values[2] >= 4, "{values:?}");
    }
}
