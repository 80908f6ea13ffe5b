//! Oracles shared by several test binaries. They use only words and
//! braid relations, never the reflection representation.

#![allow(dead_code)]

use std::collections::{BTreeSet, HashSet, VecDeque};

use affcell::{CoxeterSystem, Gen, GroupElement, GroupType};

/// Coxeter matrix written out by hand.
pub fn m_table(kind: GroupType) -> [[usize; 3]; 3] {
    match kind {
        GroupType::G2 => [[1, 6, 2], [6, 1, 3], [2, 3, 1]],
        GroupType::B2 => [[1, 4, 2], [4, 1, 4], [2, 4, 1]],
    }
}

/// ShortLex-least reduced word by exhaustive rewriting: braid moves and
/// `ss -> 1` until closure, then the shortest, lexicographically first word.
pub fn rewrite_normal_form(kind: GroupType, word: &[Gen]) -> Vec<Gen> {
    let m = m_table(kind);
    let mut seen: HashSet<Vec<Gen>> = HashSet::new();
    let mut queue = VecDeque::from([word.to_vec()]);
    seen.insert(word.to_vec());
    let mut best = word.to_vec();
    while let Some(w) = queue.pop_front() {
        if (w.len(), &w) < (best.len(), &best) {
            best = w.clone();
        }
        let mut next = Vec::new();
        for i in 0..w.len() {
            if i + 1 < w.len() && w[i] == w[i + 1] {
                let mut v = w.clone();
                v.drain(i..i + 2);
                next.push(v);
            }
            if i + 1 < w.len() && w[i] != w[i + 1] {
                let (s, t) = (w[i], w[i + 1]);
                let k = m[s as usize][t as usize];
                if i + k <= w.len() && (0..k).all(|j| w[i + j] == if j % 2 == 0 { s } else { t }) {
                    let mut v = w.clone();
                    for j in 0..k {
                        v[i + j] = if j % 2 == 0 { t } else { s };
                    }
                    next.push(v);
                }
            }
        }
        for v in next {
            // Anything longer than the best reduced word cannot matter once
            // a deletion has happened, but keep the closure exact.
            if seen.insert(v.clone()) {
                queue.push_back(v);
            }
        }
    }
    best
}

/// Every element below `w` in the Bruhat order, as the normal forms of the
/// subwords of its reduced word.
pub fn subword_closure(sys: &CoxeterSystem, w: &GroupElement) -> BTreeSet<GroupElement> {
    let word = w.word();
    let mut below = BTreeSet::new();
    for mask in 0u32..(1 << word.len()) {
        let sub: Vec<Gen> = (0..word.len()).filter(|k| mask >> k & 1 == 1).map(|k| word[k]).collect();
        below.insert(sys.normal_form(&sub));
    }
    below
}
