//! The Hecke algebra with unequal parameters, in the standard basis `T_w`.

use std::collections::BTreeMap;
use std::fmt;
use std::sync::{Arc, OnceLock};

use serde_json::{json, Value};

use crate::ball::{Ball, Id};
use crate::coxeter::{Gen, GENS, RANK};
use crate::error::{Error, Result};
use crate::laurent::LaurentPoly;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Basis {
    T,
    C,
}

impl Basis {
    fn name(self) -> &'static str {
        match self {
            Basis::T => "T",
            Basis::C => "C",
        }
    }
}

/// A finite combination of basis elements indexed by ball ids.
///
/// The basis tag says whether the coordinates refer to `T_w` or `C_w`; the
/// arithmetic in [`HeckeAlgebra`] only accepts `T` coordinates.
#[derive(Clone, PartialEq, Eq)]
pub struct HeckeElement {
    basis: Basis,
    terms: BTreeMap<Id, LaurentPoly>,
}

impl HeckeElement {
    pub fn zero(basis: Basis) -> Self {
        Self { basis, terms: BTreeMap::new() }
    }

    /// `p * B_w` in the given basis.
    pub fn term(basis: Basis, w: Id, p: LaurentPoly) -> Self {
        let mut h = Self::zero(basis);
        h.add_term(w, &p);
        h
    }

    pub fn basis_elem(basis: Basis, w: Id) -> Self {
        Self::term(basis, w, LaurentPoly::one())
    }

    pub fn from_terms(basis: Basis, terms: impl IntoIterator<Item = (Id, LaurentPoly)>) -> Self {
        let mut h = Self::zero(basis);
        for (w, p) in terms {
            h.add_term(w, &p);
        }
        h
    }

    pub fn basis(&self) -> Basis {
        self.basis
    }

    /// Reinterprets the coordinates in another basis.
    pub fn retag(mut self, basis: Basis) -> Self {
        self.basis = basis;
        self
    }

    pub fn expect_basis(&self, basis: Basis) -> Result<()> {
        if self.basis == basis {
            Ok(())
        } else {
            Err(Error::BasisMismatch { expected: basis.name() })
        }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn terms(&self) -> &BTreeMap<Id, LaurentPoly> {
        &self.terms
    }

    pub fn into_terms(self) -> BTreeMap<Id, LaurentPoly> {
        self.terms
    }

    pub fn support(&self) -> impl DoubleEndedIterator<Item = Id> + '_ {
        self.terms.keys().copied()
    }

    pub fn coeff(&self, w: Id) -> LaurentPoly {
        self.terms.get(&w).cloned().unwrap_or_default()
    }

    pub fn get(&self, w: Id) -> Option<&LaurentPoly> {
        self.terms.get(&w)
    }

    /// Largest support element in ShortLex order.
    pub fn leading(&self) -> Option<(Id, &LaurentPoly)> {
        self.terms.iter().next_back().map(|(w, p)| (*w, p))
    }

    pub fn add_term(&mut self, w: Id, p: &LaurentPoly) {
        if p.is_zero() {
            return;
        }
        match self.terms.get_mut(&w) {
            Some(c) => {
                *c += p;
                if c.is_zero() {
                    self.terms.remove(&w);
                }
            }
            None => {
                self.terms.insert(w, p.clone());
            }
        }
    }

    pub fn sub_term(&mut self, w: Id, p: &LaurentPoly) {
        self.add_term(w, &-p);
    }

    /// `self += k * other`.
    pub fn add_scaled(&mut self, other: &HeckeElement, k: &LaurentPoly) {
        debug_assert_eq!(self.basis, other.basis);
        if k.is_zero() {
            return;
        }
        for (w, p) in &other.terms {
            self.add_term(*w, &(p * k));
        }
    }

    pub fn add(&self, other: &HeckeElement) -> HeckeElement {
        let mut h = self.clone();
        h.add_scaled(other, &LaurentPoly::one());
        h
    }

    pub fn sub(&self, other: &HeckeElement) -> HeckeElement {
        let mut h = self.clone();
        h.add_scaled(other, &LaurentPoly::from(-1));
        h
    }

    pub fn scale(&self, k: &LaurentPoly) -> HeckeElement {
        let mut h = HeckeElement::zero(self.basis);
        h.add_scaled(self, k);
        h
    }

    /// Coefficient-wise bar, without touching the basis elements.
    pub fn bar_coefficients(&self) -> HeckeElement {
        Self { basis: self.basis, terms: self.terms.iter().map(|(w, p)| (*w, p.bar())).collect() }
    }

    /// `true` iff every coefficient lies in `v^-1 Z[v^-1]`.
    pub fn in_h_lt0(&self) -> bool {
        self.terms.values().all(LaurentPoly::is_strictly_negative)
    }

    /// Drops every term whose element fails `keep`.
    pub fn filter(&self, mut keep: impl FnMut(Id) -> bool) -> HeckeElement {
        Self {
            basis: self.basis,
            terms: self.terms.iter().filter(|(w, _)| keep(**w)).map(|(w, p)| (*w, p.clone())).collect(),
        }
    }

    pub fn max_support_length(&self, ball: &Ball) -> usize {
        self.terms.keys().map(|&w| ball.length(w)).max().unwrap_or(0)
    }

    /// JSON records `{word, poly}` in ShortLex order.
    pub fn to_json(&self, ball: &Ball) -> Value {
        Value::Array(self.terms.iter().map(|(w, p)| json!({ "word": ball.elem(*w), "poly": p })).collect())
    }

    /// Human-readable rendering such as `T_{s1*s2} + (v^-2)T_{s1}`.
    pub fn display<'a>(&'a self, ball: &'a Ball) -> impl fmt::Display + 'a {
        DisplayElement { h: self, ball }
    }
}

impl fmt::Debug for HeckeElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{:?}", self.basis.name(), self.terms)
    }
}

struct DisplayElement<'a> {
    h: &'a HeckeElement,
    ball: &'a Ball,
}

impl fmt::Display for DisplayElement<'_> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.h.is_zero() {
            return f.write_str("0");
        }
        let b = self.h.basis.name();
        for (k, (w, p)) in self.h.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            if p.is_one() {
                write!(f, "{b}_{{{}}}", self.ball.elem(*w))?;
            } else {
                write!(f, "({}){b}_{{{}}}", p.pretty(), self.ball.elem(*w))?;
            }
        }
        Ok(())
    }
}

/// The Hecke algebra of a weighted Coxeter system, truncated to a ball.
///
/// Every product is guarded: if any intermediate basis element would leave
/// the ball, the operation fails with [`Error::TruncationUnsafe`] instead of
/// silently dropping terms.
pub struct HeckeAlgebra {
    ball: Arc<Ball>,
    /// `v^L(s) - v^-L(s)` per generator.
    qdiff: [LaurentPoly; RANK],
    inverses: Vec<OnceLock<HeckeElement>>,
}

impl HeckeAlgebra {
    pub fn new(ball: Arc<Ball>) -> Self {
        let sys = ball.system();
        let qdiff = std::array::from_fn(|s| {
            let l = sys.weight(s as Gen);
            LaurentPoly::v_pow(l) - LaurentPoly::v_pow(-l)
        });
        let inverses = (0..ball.size()).map(|_| OnceLock::new()).collect();
        Self { ball, qdiff, inverses }
    }

    pub fn ball(&self) -> &Arc<Ball> {
        &self.ball
    }

    pub fn radius(&self) -> usize {
        self.ball.radius()
    }

    pub fn weight(&self, s: Gen) -> i32 {
        self.ball.system().weight(s)
    }

    /// `v^L(s) - v^-L(s)`.
    pub fn qdiff(&self, s: Gen) -> &LaurentPoly {
        &self.qdiff[s as usize]
    }

    pub fn t(&self, w: Id) -> HeckeElement {
        HeckeElement::basis_elem(Basis::T, w)
    }

    fn overflow(&self, needed: usize) -> Error {
        Error::TruncationUnsafe { needed, radius: self.radius() }
    }

    /// `T_s * h`.
    pub fn mult_gen_left(&self, s: Gen, h: &HeckeElement) -> Result<HeckeElement> {
        h.expect_basis(Basis::T)?;
        let mut out = HeckeElement::zero(Basis::T);
        for (&w, p) in &h.terms {
            let sw = self.ball.lmul(s, w).ok_or_else(|| self.overflow(self.ball.length(w) + 1))?;
            out.add_term(sw, p);
            if sw < w {
                out.add_term(w, &(p * &self.qdiff[s as usize]));
            }
        }
        Ok(out)
    }

    /// `h * T_s`.
    pub fn mult_gen_right(&self, h: &HeckeElement, s: Gen) -> Result<HeckeElement> {
        h.expect_basis(Basis::T)?;
        let mut out = HeckeElement::zero(Basis::T);
        for (&w, p) in &h.terms {
            let ws = self.ball.rmul(w, s).ok_or_else(|| self.overflow(self.ball.length(w) + 1))?;
            out.add_term(ws, p);
            if ws < w {
                out.add_term(w, &(p * &self.qdiff[s as usize]));
            }
        }
        Ok(out)
    }

    /// `x * y` in the T-basis.
    ///
    /// Rejects inputs whose support lengths add up past the ball radius.
    pub fn mult(&self, x: &HeckeElement, y: &HeckeElement) -> Result<HeckeElement> {
        x.expect_basis(Basis::T)?;
        y.expect_basis(Basis::T)?;
        let needed = x.max_support_length(&self.ball) + y.max_support_length(&self.ball);
        if needed > self.radius() {
            return Err(self.overflow(needed));
        }
        self.mult_unguarded(x, y)
    }

    /// `x * y` without the up-front length guard. Individual steps are still
    /// checked against the ball, so the result is either exact or an error.
    pub fn mult_unguarded(&self, x: &HeckeElement, y: &HeckeElement) -> Result<HeckeElement> {
        let words: Vec<(&[Gen], &LaurentPoly)> = x.terms.iter().map(|(w, p)| (self.ball.elem(*w).word(), p)).collect();
        self.horner(&words, 0, y)
    }

    /// `sum_w a_w T_{w[depth..]} * y` for words sharing their first `depth`
    /// letters, grouped by the next letter: `a_e y + sum_s T_s (...)`.
    fn horner(&self, terms: &[(&[Gen], &LaurentPoly)], depth: usize, y: &HeckeElement) -> Result<HeckeElement> {
        let mut out = HeckeElement::zero(Basis::T);
        let mut groups: [Vec<(&[Gen], &LaurentPoly)>; RANK] = Default::default();
        for &(word, p) in terms {
            match word.get(depth) {
                None => out.add_scaled(y, p),
                Some(&s) => groups[s as usize].push((word, p)),
            }
        }
        for s in GENS {
            let group = &groups[s as usize];
            if !group.is_empty() {
                let inner = self.horner(group, depth + 1, y)?;
                let prod = self.mult_gen_left(s, &inner)?;
                out.add_scaled(&prod, &LaurentPoly::one());
            }
        }
        Ok(out)
    }

    /// `T_w^{-1}` in the T-basis, memoized per element.
    pub fn invert_t(&self, w: Id) -> HeckeElement {
        if let Some(h) = self.inverses[w.index()].get() {
            return h.clone();
        }
        let h = if w == Id::E {
            self.t(Id::E)
        } else {
            // (T_s T_w')^{-1} = T_w'^{-1} T_s^{-1} with T_s^{-1} = T_s - qdiff(s).
            let s = self.ball.elem(w).word()[0];
            let rest = self.ball.lmul(s, w).expect("descent stays inside");
            let inv_rest = self.invert_t(rest);
            let mut h = self.mult_gen_right(&inv_rest, s).expect("inverse support stays below w^-1");
            h.add_scaled(&inv_rest, &-self.qdiff(s));
            h
        };
        let _ = self.inverses[w.index()].set(h.clone());
        h
    }

    /// The bar involution `sum a_w T_w -> sum bar(a_w) T_{w^-1}^{-1}`.
    pub fn bar(&self, h: &HeckeElement) -> Result<HeckeElement> {
        h.expect_basis(Basis::T)?;
        let mut out = HeckeElement::zero(Basis::T);
        for (&w, p) in &h.terms {
            out.add_scaled(&self.invert_t(self.ball.inverse(w)), &p.bar());
        }
        Ok(out)
    }

    /// The antiautomorphism `T_w -> T_{w^-1}`; on C-coordinates it sends
    /// `C_w` to `C_{w^-1}`, so it applies to either basis.
    pub fn flat(&self, h: &HeckeElement) -> HeckeElement {
        HeckeElement {
            basis: h.basis,
            terms: h.terms.iter().map(|(w, p)| (self.ball.inverse(*w), p.clone())).collect(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::{CoxeterSystem, GroupType};

    fn algebra(kind: GroupType, params: &[u32], radius: usize) -> HeckeAlgebra {
        let sys = CoxeterSystem::new(kind, params).unwrap();
        HeckeAlgebra::new(Arc::new(Ball::new(sys, radius)))
    }

    fn v(e: i32) -> LaurentPoly {
        LaurentPoly::v_pow(e)
    }

    #[test]
    fn generator_rules() {
        let h = algebra(GroupType::G2, &[5, 2], 4);
        let b = h.ball().clone();
        let (s1, s2) = (b.id_of(&[1]).unwrap(), b.id_of(&[2]).unwrap());
        let s12 = b.id_of(&[1, 2]).unwrap();
        assert_eq!(h.mult_gen_left(0, &h.t(s2)).unwrap(), h.t(s12));
        let sq = h.mult_gen_left(0, &h.t(s1)).unwrap();
        let expect = HeckeElement::from_terms(Basis::T, [(Id::E, LaurentPoly::one()), (s1, v(5) - v(-5))]);
        assert_eq!(sq, expect);
        assert_eq!(h.mult_gen_left(0, &h.t(Id::E)).unwrap(), h.t(s1));
        assert_eq!(h.mult_gen_right(&h.t(s1), 0).unwrap(), sq);
        let folded = h.mult(&h.t(s12), &h.t(s2)).unwrap();
        let expect = HeckeElement::from_terms(Basis::T, [(s1, LaurentPoly::one()), (s12, v(2) - v(-2))]);
        assert_eq!(folded, expect);
    }

    #[test]
    fn quadratic_relation() {
        for (kind, params) in [(GroupType::G2, vec![5, 2]), (GroupType::B2, vec![7, 2, 1])] {
            let h = algebra(kind, &params, 3);
            for s in GENS {
                let ts = h.t(h.ball().lmul(s, Id::E).unwrap());
                let l = h.weight(s);
                let a = ts.sub(&h.t(Id::E).scale(&v(l)));
                let b = ts.add(&h.t(Id::E).scale(&v(-l)));
                assert!(h.mult(&a, &b).unwrap().is_zero());
            }
        }
    }

    #[test]
    fn inverses_and_bar() {
        let h = algebra(GroupType::B2, &[7, 2, 1], 6);
        let b = h.ball().clone();
        let s = b.id_of(&[2]).unwrap();
        let expect = HeckeElement::from_terms(Basis::T, [(s, LaurentPoly::one()), (Id::E, v(-2) - v(2))]);
        assert_eq!(h.invert_t(s), expect);
        assert_eq!(h.bar(&h.t(s)).unwrap(), expect);
        assert_eq!(h.invert_t(Id::E), h.t(Id::E));
        for w in b.up_to(3) {
            assert_eq!(h.mult(&h.invert_t(w), &h.t(w)).unwrap(), h.t(Id::E));
        }
        let w = b.id_of(&[1, 2, 3]).unwrap();
        assert_eq!(h.bar(&h.bar(&h.t(w)).unwrap()).unwrap(), h.t(w));
    }

    #[test]
    fn guard_rejects_long_products() {
        let h = algebra(GroupType::G2, &[5, 2], 3);
        let b = h.ball().clone();
        let x = h.t(b.id_of(&[1, 2]).unwrap());
        let y = h.t(b.id_of(&[3, 2]).unwrap());
        assert!(matches!(h.mult(&x, &y), Err(Error::TruncationUnsafe { needed: 4, radius: 3 })));
        let c = HeckeElement::basis_elem(Basis::C, Id::E);
        assert!(matches!(h.mult_gen_left(0, &c), Err(Error::BasisMismatch { .. })));
    }

    #[test]
    fn negative_part_predicate() {
        let h = algebra(GroupType::G2, &[5, 2], 1);
        assert!(h.t(Id::E).scale(&v(-1)).in_h_lt0());
        assert!(!h.t(Id::E).in_h_lt0());
    }

    #[test]
    fn flat_relabels() {
        let h = algebra(GroupType::G2, &[5, 2], 3);
        let b = h.ball().clone();
        let x = h.t(b.id_of(&[1, 2]).unwrap());
        assert_eq!(h.flat(&x), h.t(b.id_of(&[2, 1]).unwrap()));
        assert_eq!(h.flat(&h.flat(&x)), x);
    }
}
