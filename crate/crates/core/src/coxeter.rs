//! Word arithmetic in the affine Weyl groups of type G2 and B2.
//!
//! Elements act on the root lattice through the integral Cartan matrix, so
//! every "does `s` lengthen `w`" question is a sign test on an integer vector.

use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Deserializer, Serialize, Serializer};
use smallvec::SmallVec;

use crate::error::{Error, Result};

/// Generator index: 0, 1, 2 stand for s1, s2, s3.
pub type Gen = u8;

pub const RANK: usize = 3;
pub const GENS: [Gen; RANK] = [0, 1, 2];

/// 3x3 integer matrix acting on root coordinates (column vectors).
pub type Mat = [[i64; RANK]; RANK];

const IDENTITY: Mat = [[1, 0, 0], [0, 1, 0], [0, 0, 1]];

fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0; RANK]; RANK];
    for i in 0..RANK {
        for k in 0..RANK {
            if a[i][k] != 0 {
                for j in 0..RANK {
                    c[i][j] += a[i][k] * b[k][j];
                }
            }
        }
    }
    c
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum GroupType {
    #[serde(rename = "g2")]
    G2,
    #[serde(rename = "b2")]
    B2,
}

impl GroupType {
    pub fn name(self) -> &'static str {
        match self {
            GroupType::G2 => "g2",
            GroupType::B2 => "b2",
        }
    }

    /// Number of free weight parameters: (a, b) for G2, (a, b, c) for B2.
    pub fn param_count(self) -> usize {
        match self {
            GroupType::G2 => 2,
            GroupType::B2 => 3,
        }
    }

    /// Cartan matrix with entries `<alpha_j, alpha_i^vee>`; `s_i` sends
    /// `alpha_j` to `alpha_j - a_ij alpha_i`.
    fn cartan(self) -> Mat {
        match self {
            // s1 short end of the G2 bond, s3 the affine node attached to s2
            GroupType::G2 => [[2, -1, 0], [-3, 2, -1], [0, -1, 2]],
            GroupType::B2 => [[2, -1, 0], [-2, 2, -2], [0, -1, 2]],
        }
    }
}

impl fmt::Display for GroupType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GroupType {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "g2" => Ok(GroupType::G2),
            "b2" => Ok(GroupType::B2),
            _ => Err(Error::Parse(format!("unknown group type `{s}` (expected g2 or b2)"))),
        }
    }
}

/// Parses `a,b` or `a,b,c`.
pub fn parse_params(s: &str) -> Result<Vec<u32>> {
    s.split(',')
        .map(|x| x.trim().parse::<u32>().map_err(|_| Error::Parse(format!("invalid weight list `{s}`"))))
        .collect()
}

/// An affine Weyl group of rank 2 together with a positive weight function.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CoxeterSystem {
    kind: GroupType,
    params: Vec<u32>,
    weights: [u32; RANK],
    reflections: [Mat; RANK],
}

impl CoxeterSystem {
    /// `params` is `(a, b)` for G2 (generator weights `a, b, b`) and
    /// `(a, b, c)` for B2.
    pub fn new(kind: GroupType, params: &[u32]) -> Result<Self> {
        if params.len() != kind.param_count() {
            return Err(Error::InvalidWeights(format!(
                "{kind} takes {} weights, got {}",
                kind.param_count(),
                params.len()
            )));
        }
        if params.contains(&0) {
            return Err(Error::InvalidWeights("weights must be positive".into()));
        }
        let weights = match kind {
            GroupType::G2 => [params[0], params[1], params[1]],
            GroupType::B2 => [params[0], params[1], params[2]],
        };
        let a = kind.cartan();
        let reflections = std::array::from_fn(|i| {
            let mut m = IDENTITY;
            for j in 0..RANK {
                m[i][j] -= a[i][j];
            }
            m
        });
        Ok(Self { kind, params: params.to_vec(), weights, reflections })
    }

    pub fn kind(&self) -> GroupType {
        self.kind
    }

    pub fn params(&self) -> &[u32] {
        &self.params
    }

    /// `L(s)`.
    pub fn weight(&self, s: Gen) -> i32 {
        self.weights[s as usize] as i32
    }

    /// `L(w)`, additive along reduced words.
    pub fn weight_of(&self, w: &GroupElement) -> i32 {
        w.word().iter().map(|&s| self.weight(s)).sum()
    }

    /// Order of `s_i s_j`.
    pub fn coxeter_m(&self, i: Gen, j: Gen) -> u32 {
        if i == j {
            return 1;
        }
        let a = self.kind.cartan();
        match a[i as usize][j as usize] * a[j as usize][i as usize] {
            0 => 2,
            1 => 3,
            2 => 4,
            3 => 6,
            _ => unreachable!("affine Cartan matrices have finite bonds"),
        }
    }

    pub fn reflection(&self, s: Gen) -> &Mat {
        &self.reflections[s as usize]
    }

    /// Matrix of the product of the letters of `word`, left to right.
    pub fn matrix_of(&self, word: &[Gen]) -> Mat {
        word.iter().fold(IDENTITY, |m, &s| mat_mul(&m, self.reflection(s)))
    }

    /// Matrix of the inverse of the product of `word`.
    fn inverse_matrix_of(&self, word: &[Gen]) -> Mat {
        word.iter().rev().fold(IDENTITY, |m, &s| mat_mul(&m, self.reflection(s)))
    }

    /// ShortLex normal form of an arbitrary (possibly non-reduced) word.
    ///
    /// Greedily strips the smallest left descent of the remaining element,
    /// read off from the negative columns of its inverse matrix.
    pub fn normal_form(&self, word: &[Gen]) -> GroupElement {
        let mut n = self.inverse_matrix_of(word);
        let mut out = SmallVec::new();
        while let Some(s) = first_negative_column(&n) {
            out.push(s);
            n = mat_mul(&n, self.reflection(s));
        }
        GroupElement { word: out }
    }

    pub fn identity(&self) -> GroupElement {
        GroupElement::identity()
    }

    pub fn generator(&self, s: Gen) -> GroupElement {
        GroupElement { word: SmallVec::from_slice(&[s]) }
    }

    /// Parses `s1*s2*s1` (or `e`) and normalizes.
    pub fn parse(&self, text: &str) -> Result<GroupElement> {
        Ok(self.normal_form(&parse_word(text)?))
    }

    /// Normal form of a word given with 1-based generator labels.
    pub fn elem(&self, labels: &[u8]) -> GroupElement {
        let word: Vec<Gen> = labels.iter().map(|&l| l - 1).collect();
        self.normal_form(&word)
    }

    /// Product with a generator and whether the length went up.
    pub fn mul_gen(&self, w: &GroupElement, s: Gen, side: Side) -> (GroupElement, bool) {
        let lengthened = match side {
            Side::Left => !self.is_left_descent(w, s),
            Side::Right => !self.is_right_descent(w, s),
        };
        let mut word: Vec<Gen> = Vec::with_capacity(w.len() + 1);
        match side {
            Side::Left => {
                word.push(s);
                word.extend_from_slice(w.word());
            }
            Side::Right => {
                word.extend_from_slice(w.word());
                word.push(s);
            }
        }
        (self.normal_form(&word), lengthened)
    }

    pub fn multiply(&self, x: &GroupElement, y: &GroupElement) -> GroupElement {
        let word: Vec<Gen> = x.word().iter().chain(y.word()).copied().collect();
        self.normal_form(&word)
    }

    pub fn inverse(&self, w: &GroupElement) -> GroupElement {
        let word: Vec<Gen> = w.word().iter().rev().copied().collect();
        self.normal_form(&word)
    }

    /// `l(sw) < l(w)`, i.e. `w^-1(alpha_s) < 0`.
    pub fn is_left_descent(&self, w: &GroupElement, s: Gen) -> bool {
        column_negative(&self.inverse_matrix_of(w.word()), s)
    }

    /// `l(ws) < l(w)`, i.e. `w(alpha_s) < 0`.
    pub fn is_right_descent(&self, w: &GroupElement, s: Gen) -> bool {
        column_negative(&self.matrix_of(w.word()), s)
    }

    pub fn left_descents(&self, w: &GroupElement) -> GenSet {
        let n = self.inverse_matrix_of(w.word());
        GenSet::from_iter(GENS.into_iter().filter(|&s| column_negative(&n, s)))
    }

    pub fn right_descents(&self, w: &GroupElement) -> GenSet {
        let m = self.matrix_of(w.word());
        GenSet::from_iter(GENS.into_iter().filter(|&s| column_negative(&m, s)))
    }

    /// Bruhat order by the descent recursion.
    pub fn bruhat_leq(&self, x: &GroupElement, w: &GroupElement) -> bool {
        let (mut x, mut w) = (x.clone(), w.clone());
        loop {
            if x.len() > w.len() {
                return false;
            }
            if x == w {
                return true;
            }
            if x.is_identity() {
                return true;
            }
            let s = w.word()[0];
            let sw = self.mul_gen(&w, s, Side::Left).0;
            if self.is_left_descent(&x, s) {
                x = self.mul_gen(&x, s, Side::Left).0;
            }
            w = sw;
        }
    }

    /// All elements of length at most `radius`, in ShortLex order.
    pub fn ball(&self, radius: usize) -> Vec<GroupElement> {
        let mut layer = vec![GroupElement::identity()];
        let mut out = layer.clone();
        for _ in 0..radius {
            let mut next: BTreeSet<GroupElement> = BTreeSet::new();
            for w in &layer {
                for s in GENS {
                    let (ws, up) = self.mul_gen(w, s, Side::Right);
                    if up {
                        next.insert(ws);
                    }
                }
            }
            layer = next.into_iter().collect();
            out.extend(layer.iter().cloned());
        }
        out
    }

    /// Membership in the distinguished (minimal length) representatives of
    /// `W' = <subset>`: left cosets `xW'` for [`Side::Left`], right cosets
    /// `W'y` for [`Side::Right`].
    pub fn is_coset_rep(&self, x: &GroupElement, subset: GenSet, side: Side) -> bool {
        let d = match side {
            Side::Left => self.right_descents(x),
            Side::Right => self.left_descents(x),
        };
        d.intersect(subset).is_empty()
    }

    /// `t^ = { w : l(w^-1 t) = l(t) - l(w) }`, the prefixes of `t`.
    pub fn prefix_set(&self, t: &GroupElement) -> BTreeSet<GroupElement> {
        let mut seen = BTreeSet::new();
        let mut stack = vec![t.clone()];
        while let Some(p) = stack.pop() {
            if !seen.insert(p.clone()) {
                continue;
            }
            for s in self.right_descents(&p).iter() {
                stack.push(self.mul_gen(&p, s, Side::Right).0);
            }
        }
        seen
    }

    /// Longest element of the finite parabolic subgroup generated by `subset`.
    pub fn longest_element(&self, subset: GenSet) -> Result<GroupElement> {
        if subset.len() == RANK {
            return Err(Error::InfiniteParabolic);
        }
        let mut w = GroupElement::identity();
        'grow: loop {
            for s in subset.iter() {
                let (ws, up) = self.mul_gen(&w, s, Side::Right);
                if up {
                    w = ws;
                    continue 'grow;
                }
            }
            return Ok(w);
        }
    }

    /// All elements of the finite parabolic subgroup `W_subset`.
    pub fn parabolic_elements(&self, subset: GenSet) -> Result<Vec<GroupElement>> {
        let top = self.longest_element(subset)?;
        let mut all: Vec<GroupElement> = self.prefix_set(&top).into_iter().collect();
        all.sort();
        Ok(all)
    }
}

fn column_negative(m: &Mat, s: Gen) -> bool {
    let s = s as usize;
    (0..RANK).any(|i| m[i][s] < 0)
}

fn first_negative_column(m: &Mat) -> Option<Gen> {
    GENS.into_iter().find(|&s| column_negative(m, s))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Side {
    Left,
    Right,
}

/// A subset of the generators, as a bitmask.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct GenSet(u8);

impl GenSet {
    pub const EMPTY: GenSet = GenSet(0);

    pub fn of(gens: &[Gen]) -> Self {
        Self::from_iter(gens.iter().copied())
    }

    /// From 1-based labels, e.g. `GenSet::labels(&[1, 2])` for `{s1, s2}`.
    pub fn labels(labels: &[u8]) -> Self {
        Self::from_iter(labels.iter().map(|l| l - 1))
    }

    pub fn contains(self, s: Gen) -> bool {
        self.0 & (1 << s) != 0
    }

    pub fn insert(&mut self, s: Gen) {
        self.0 |= 1 << s;
    }

    pub fn intersect(self, o: GenSet) -> GenSet {
        GenSet(self.0 & o.0)
    }

    pub fn is_empty(self) -> bool {
        self.0 == 0
    }

    pub fn len(self) -> usize {
        self.0.count_ones() as usize
    }

    pub fn bits(self) -> u8 {
        self.0
    }

    pub fn iter(self) -> impl Iterator<Item = Gen> {
        GENS.into_iter().filter(move |&s| self.contains(s))
    }
}

impl FromIterator<Gen> for GenSet {
    fn from_iter<I: IntoIterator<Item = Gen>>(iter: I) -> Self {
        let mut g = GenSet(0);
        for s in iter {
            g.insert(s);
        }
        g
    }
}

impl fmt::Display for GenSet {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let names: Vec<String> = self.iter().map(|s| format!("s{}", s + 1)).collect();
        write!(f, "{{{}}}", names.join(","))
    }
}

/// A group element stored as its ShortLex normal form.
///
/// The derived order (length, then lexicographic word) is the ShortLex
/// order used everywhere for deterministic iteration.
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct GroupElement {
    word: SmallVec<[Gen; 24]>,
}

impl GroupElement {
    pub fn identity() -> Self {
        Self::default()
    }

    /// Wraps a word that is already a ShortLex normal form. Callers outside
    /// this module should go through [`CoxeterSystem::normal_form`].
    pub(crate) fn from_normal_word(word: &[Gen]) -> Self {
        Self { word: SmallVec::from_slice(word) }
    }

    pub fn word(&self) -> &[Gen] {
        &self.word
    }

    pub fn len(&self) -> usize {
        self.word.len()
    }

    pub fn is_empty(&self) -> bool {
        self.word.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.word.is_empty()
    }

    /// Generators occurring in the word.
    pub fn support(&self) -> GenSet {
        GenSet::of(&self.word)
    }

    /// 1-based labels, the JSON encoding.
    pub fn labels(&self) -> Vec<u8> {
        self.word.iter().map(|s| s + 1).collect()
    }
}

impl Ord for GroupElement {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.word.len().cmp(&other.word.len()).then_with(|| self.word.cmp(&other.word))
    }
}

impl PartialOrd for GroupElement {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.word.is_empty() {
            return f.write_str("e");
        }
        for (i, s) in self.word.iter().enumerate() {
            if i > 0 {
                f.write_str("*")?;
            }
            write!(f, "s{}", s + 1)?;
        }
        Ok(())
    }
}

impl fmt::Debug for GroupElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl Serialize for GroupElement {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        self.labels().serialize(ser)
    }
}

/// Deserialization trusts the input to be a normal form; cache loading
/// re-validates against the system.
impl<'de> Deserialize<'de> for GroupElement {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let labels: Vec<u8> = Vec::deserialize(de)?;
        if labels.iter().any(|&l| !(1..=RANK as u8).contains(&l)) {
            return Err(serde::de::Error::custom("generator label out of range"));
        }
        let word: Vec<Gen> = labels.iter().map(|l| l - 1).collect();
        Ok(GroupElement::from_normal_word(&word))
    }
}

/// Parses a word into raw generator indices. Accepts `s1*s2*s3`, `s1s2s3`,
/// `s1 s2 s3`, `1,2,3` and `e`.
pub fn parse_word(text: &str) -> Result<Vec<Gen>> {
    let text = text.trim();
    if text == "e" || text.is_empty() {
        return Ok(Vec::new());
    }
    let bad = |tok: &str| Error::Parse(format!("invalid generator `{tok}` in `{text}`"));
    let mut out = Vec::new();
    let mut chars = text.chars().filter(|c| !matches!(c, '*' | ',' | ' ' | '.')).peekable();
    while let Some(c) = chars.next() {
        let d = if c == 's' { chars.next().ok_or_else(|| bad("s"))? } else { c };
        let n = d.to_digit(10).filter(|n| (1..=RANK as u32).contains(n)).ok_or_else(|| bad(&d.to_string()))?;
        out.push(n as Gen - 1);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2() -> CoxeterSystem {
        CoxeterSystem::new(GroupType::G2, &[5, 2]).unwrap()
    }

    fn b2() -> CoxeterSystem {
        CoxeterSystem::new(GroupType::B2, &[7, 2, 1]).unwrap()
    }

    #[test]
    fn coxeter_matrices() {
        let g = g2();
        assert_eq!((g.coxeter_m(0, 1), g.coxeter_m(1, 2), g.coxeter_m(0, 2)), (6, 3, 2));
        let b = b2();
        assert_eq!((b.coxeter_m(0, 1), b.coxeter_m(1, 2), b.coxeter_m(0, 2)), (4, 4, 2));
    }

    #[test]
    fn weights_validated() {
        assert!(CoxeterSystem::new(GroupType::G2, &[1, 0]).is_err());
        assert!(CoxeterSystem::new(GroupType::G2, &[1, 2, 3]).is_err());
        let g = g2();
        assert_eq!((g.weight(0), g.weight(1), g.weight(2)), (5, 2, 2));
    }

    #[test]
    fn generator_products() {
        let g = g2();
        let e = g.identity();
        assert_eq!(g.mul_gen(&e, 0, Side::Left), (g.elem(&[1]), true));
        assert_eq!(g.mul_gen(&g.elem(&[1]), 0, Side::Left), (e.clone(), false));
        let (w, up) = g.mul_gen(&g.elem(&[1, 2, 1, 2, 1]), 1, Side::Right);
        assert!(up);
        assert_eq!(w.len(), 6);
        assert_eq!(w, g.longest_element(GenSet::labels(&[1, 2])).unwrap());
        // the braid relation of order 6 collapses the other spelling
        assert_eq!(g.elem(&[2, 1, 2, 1, 2, 1]), w);
    }

    #[test]
    fn multiply_and_inverse() {
        let b = b2();
        let x = b.elem(&[2, 1]);
        assert!(b.multiply(&x, &b.elem(&[1, 2])).is_identity());
        assert_eq!(b.inverse(&b.elem(&[1, 2])), b.elem(&[2, 1]));
        assert_eq!(b.inverse(&b.elem(&[2, 3, 2])), b.elem(&[2, 3, 2]));
        assert!(b.inverse(&b.identity()).is_identity());
    }

    #[test]
    fn bruhat_examples() {
        let g = g2();
        let w = g.elem(&[2, 3]);
        assert!(g.bruhat_leq(&g.identity(), &w));
        assert!(!g.bruhat_leq(&g.elem(&[1]), &w));
        assert!(g.bruhat_leq(&g.elem(&[3]), &w));
    }

    #[test]
    fn small_balls() {
        let g = g2();
        assert_eq!(g.ball(0), vec![g.identity()]);
        assert_eq!(g.ball(1), vec![g.identity(), g.elem(&[1]), g.elem(&[2]), g.elem(&[3])]);
    }

    #[test]
    fn prefix_sets() {
        let g = g2();
        let set = |ws: &[&[u8]]| ws.iter().map(|w| g.elem(w)).collect::<BTreeSet<_>>();
        assert_eq!(g.prefix_set(&g.elem(&[1, 3])), set(&[&[], &[1], &[3], &[1, 3]]));
        assert_eq!(g.prefix_set(&g.elem(&[1, 2, 3])), set(&[&[], &[1], &[1, 2], &[1, 2, 3]]));
        assert_eq!(g.prefix_set(&g.identity()), set(&[&[]]));
    }

    #[test]
    fn longest_elements() {
        let g = g2();
        assert_eq!(g.longest_element(GenSet::labels(&[1, 3])).unwrap(), g.elem(&[1, 3]));
        assert_eq!(g.parabolic_elements(GenSet::labels(&[1, 2])).unwrap().len(), 12);
        assert!(g.longest_element(GenSet::labels(&[1, 2, 3])).is_err());
        let b = b2();
        let w = b.longest_element(GenSet::labels(&[2, 3])).unwrap();
        assert_eq!(w, b.elem(&[2, 3, 2, 3]));
        assert_eq!(b.parabolic_elements(GenSet::labels(&[2, 3])).unwrap().len(), 8);
    }

    #[test]
    fn coset_reps() {
        let g = g2();
        let sub = GenSet::labels(&[1, 2]);
        assert!(g.is_coset_rep(&g.identity(), sub, Side::Left));
        assert!(!g.is_coset_rep(&g.elem(&[1]), sub, Side::Left));
        assert!(!g.is_coset_rep(&g.elem(&[1, 3]), GenSet::labels(&[1]), Side::Right));
        assert!(g.is_coset_rep(&g.elem(&[3, 1]), GenSet::labels(&[2]), Side::Left));
    }

    #[test]
    fn word_text_format() {
        let g = g2();
        let w = g.parse("s1*s2*s1").unwrap();
        assert_eq!(w.to_string(), "s1*s2*s1");
        assert_eq!(g.parse("e").unwrap().to_string(), "e");
        assert!(g.parse("s4").is_err());
        assert!(g.parse("s1*x").is_err());
        assert_eq!(serde_json::to_string(&w).unwrap(), "[1,2,1]");
    }
}
