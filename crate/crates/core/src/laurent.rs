//! Laurent polynomials in one variable `v` with integer coefficients.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use dashu_int::IBig;
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// An element of `Z[v, v^-1]`.
///
/// Terms are kept sorted by ascending exponent and never carry a zero
/// coefficient, so structural equality is polynomial equality.
#[derive(Clone, Default, PartialEq, Eq, Hash)]
pub struct LaurentPoly {
    terms: Vec<(i32, IBig)>,
}

impl LaurentPoly {
    pub fn zero() -> Self {
        Self::default()
    }

    pub fn one() -> Self {
        Self::monomial(1, 0)
    }

    /// `c * v^e`.
    pub fn monomial(c: impl Into<IBig>, e: i32) -> Self {
        let c = c.into();
        if c.is_zero() {
            Self::zero()
        } else {
            Self { terms: vec![(e, c)] }
        }
    }

    /// `v^e`.
    pub fn v_pow(e: i32) -> Self {
        Self::monomial(1, e)
    }

    /// `v^e + v^-e`.
    pub fn v_sym(e: i32) -> Self {
        Self::v_pow(e) + Self::v_pow(-e)
    }

    /// Builds a polynomial from arbitrary `(exponent, coefficient)` pairs,
    /// summing repeated exponents.
    pub fn from_terms<C: Into<IBig>>(terms: impl IntoIterator<Item = (i32, C)>) -> Self {
        let mut raw: Vec<(i32, IBig)> = terms.into_iter().map(|(e, c)| (e, c.into())).collect();
        raw.sort_by_key(|&(e, _)| e);
        let mut out: Vec<(i32, IBig)> = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            match out.last_mut() {
                Some((le, lc)) if *le == e => *lc += c,
                _ => out.push((e, c)),
            }
        }
        out.retain(|(_, c)| !c.is_zero());
        Self { terms: out }
    }

    pub fn is_zero(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn is_one(&self) -> bool {
        self.terms.len() == 1 && self.terms[0].0 == 0 && self.terms[0].1.is_one()
    }

    /// Terms in ascending exponent order.
    pub fn terms(&self) -> &[(i32, IBig)] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn coeff(&self, e: i32) -> IBig {
        match self.terms.binary_search_by_key(&e, |&(x, _)| x) {
            Ok(i) => self.terms[i].1.clone(),
            Err(_) => IBig::ZERO,
        }
    }

    pub fn max_degree(&self) -> Option<i32> {
        self.terms.last().map(|&(e, _)| e)
    }

    pub fn min_degree(&self) -> Option<i32> {
        self.terms.first().map(|&(e, _)| e)
    }

    /// The involution `v -> v^-1`.
    pub fn bar(&self) -> Self {
        Self { terms: self.terms.iter().rev().map(|(e, c)| (-e, c.clone())).collect() }
    }

    pub fn is_bar_symmetric(&self) -> bool {
        let n = self.terms.len();
        (0..n).all(|i| {
            let (e, c) = &self.terms[i];
            let (f, d) = &self.terms[n - 1 - i];
            *e == -*f && c == d
        })
    }

    /// True iff every exponent is negative, i.e. `self` lies in `v^-1 Z[v^-1]`.
    pub fn is_strictly_negative(&self) -> bool {
        self.max_degree().is_none_or(|e| e < 0)
    }

    /// Multiplication by `v^e`.
    pub fn shift(&self, e: i32) -> Self {
        Self { terms: self.terms.iter().map(|(x, c)| (x + e, c.clone())).collect() }
    }

    pub fn scale(&self, k: &IBig) -> Self {
        if k.is_zero() {
            return Self::zero();
        }
        Self { terms: self.terms.iter().map(|(e, c)| (*e, c * k)).collect() }
    }

    /// Splits a bar-symmetric `p` into `m + r` with `m` bar-symmetric and
    /// built from the non-negative part of `p`, and `r` strictly negative.
    ///
    /// For bar-symmetric input `r` is always zero; non-symmetric input is
    /// rejected because it means an upstream bar-invariant was broken.
    pub fn symmetric_head(&self) -> Result<(Self, Self)> {
        if !self.is_bar_symmetric() {
            return Err(Error::NotBarSymmetric(self.to_string()));
        }
        let m = self.nonnegative_symmetrization();
        let r = self - &m;
        debug_assert!(r.is_strictly_negative());
        Ok((m, r))
    }

    /// `c_0 + sum_{i>0} c_i (v^i + v^-i)` where `c_i` are the coefficients of
    /// `self` in degrees `i >= 0`. No symmetry is required of `self`.
    ///
    /// This is the correction term of the Kazhdan–Lusztig recursion: if a
    /// coefficient equals `P + mu` with `P` strictly negative and `mu`
    /// bar-symmetric, this returns `mu`.
    pub fn nonnegative_symmetrization(&self) -> Self {
        let start = self.terms.partition_point(|&(e, _)| e < 0);
        let pos = &self.terms[start..];
        let mut terms: Vec<(i32, IBig)> = Vec::with_capacity(2 * pos.len());
        terms.extend(pos.iter().rev().filter(|(e, _)| *e > 0).map(|(e, c)| (-e, c.clone())));
        terms.extend(pos.iter().cloned());
        Self { terms }
    }

    /// Evaluation at an integer point `v = x`; requires `x = ±1` when negative
    /// exponents are present so that the result stays integral.
    pub fn eval_unit(&self, x: i8) -> IBig {
        assert!(x == 1 || x == -1, "only v = ±1 is supported");
        self.terms
            .iter()
            .map(|(e, c)| if x == -1 && e.rem_euclid(2) == 1 { -c.clone() } else { c.clone() })
            .fold(IBig::ZERO, |a, b| a + b)
    }

    /// `self += a * b`, the inner step of every Hecke-algebra product.
    pub fn add_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        let prod = a * b;
        *self += &prod;
    }

    fn merge(&self, other: &Self, negate: bool) -> Self {
        let mut out = Vec::with_capacity(self.terms.len() + other.terms.len());
        let (mut i, mut j) = (0, 0);
        let (a, b) = (&self.terms, &other.terms);
        while i < a.len() || j < b.len() {
            let ord = match (a.get(i), b.get(j)) {
                (Some(x), Some(y)) => x.0.cmp(&y.0),
                (Some(_), None) => Ordering::Less,
                _ => Ordering::Greater,
            };
            match ord {
                Ordering::Less => {
                    out.push(a[i].clone());
                    i += 1;
                }
                Ordering::Greater => {
                    let c = if negate { -b[j].1.clone() } else { b[j].1.clone() };
                    out.push((b[j].0, c));
                    j += 1;
                }
                Ordering::Equal => {
                    let c = if negate { &a[i].1 - &b[j].1 } else { &a[i].1 + &b[j].1 };
                    if !c.is_zero() {
                        out.push((a[i].0, c));
                    }
                    i += 1;
                    j += 1;
                }
            }
        }
        Self { terms: out }
    }

    /// Human-oriented rendering such as `v^2 - 3 + v^-1`.
    pub fn pretty(&self) -> String {
        if self.is_zero() {
            return "0".into();
        }
        let mut s = String::new();
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            let neg = *c < IBig::ZERO;
            let abs = if neg { -c.clone() } else { c.clone() };
            if k == 0 {
                if neg {
                    s.push('-');
                }
            } else {
                s.push_str(if neg { " - " } else { " + " });
            }
            let unit = abs.is_one();
            match (*e, unit) {
                (0, _) => s.push_str(&abs.to_string()),
                (1, true) => s.push('v'),
                (1, false) => s.push_str(&format!("{abs}v")),
                (e, true) => s.push_str(&format!("v^{e}")),
                (e, false) => s.push_str(&format!("{abs}v^{e}")),
            }
        }
        s
    }
}

impl fmt::Display for LaurentPoly {
    /// Canonical text form `c0*v^e0 + c1*v^e1 + ...` with decreasing exponents.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.is_zero() {
            return f.write_str("0");
        }
        for (k, (e, c)) in self.terms.iter().rev().enumerate() {
            if k > 0 {
                f.write_str(" + ")?;
            }
            write!(f, "{c}*v^{e}")?;
        }
        Ok(())
    }
}

impl fmt::Debug for LaurentPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.pretty())
    }
}

impl FromStr for LaurentPoly {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if s == "0" {
            return Ok(Self::zero());
        }
        let bad = || Error::Parse(format!("invalid polynomial `{s}`"));
        let mut terms = Vec::new();
        let mut last: Option<i32> = None;
        for part in s.split(" + ") {
            let (c, e) = part.trim().split_once("*v^").ok_or_else(bad)?;
            let c: IBig = c.parse().map_err(|_| bad())?;
            let e: i32 = e.parse().map_err(|_| bad())?;
            if c.is_zero() || last.is_some_and(|l| l <= e) {
                return Err(bad());
            }
            last = Some(e);
            terms.push((e, c));
        }
        terms.reverse();
        Ok(Self { terms })
    }
}

impl Serialize for LaurentPoly {
    fn serialize<S: Serializer>(&self, ser: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeSeq;
        let mut seq = ser.serialize_seq(Some(self.terms.len()))?;
        for (e, c) in self.terms.iter().rev() {
            seq.serialize_element(&(e, c.to_string()))?;
        }
        seq.end()
    }
}

impl<'de> Deserialize<'de> for LaurentPoly {
    fn deserialize<D: Deserializer<'de>>(de: D) -> std::result::Result<Self, D::Error> {
        let raw: Vec<(i32, String)> = Vec::deserialize(de)?;
        let mut terms = Vec::with_capacity(raw.len());
        for (e, c) in raw {
            let c: IBig = c.parse().map_err(|_| D::Error::custom(format!("bad coefficient `{c}`")))?;
            if c.is_zero() {
                return Err(D::Error::custom("zero coefficient"));
            }
            terms.push((e, c));
        }
        terms.sort_by_key(|&(e, _)| e);
        if terms.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(D::Error::custom("repeated exponent"));
        }
        Ok(Self { terms })
    }
}

impl Add<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.merge(rhs, false)
    }
}

impl Add for LaurentPoly {
    type Output = LaurentPoly;
    fn add(self, rhs: LaurentPoly) -> LaurentPoly {
        &self + &rhs
    }
}

impl Sub<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: &LaurentPoly) -> LaurentPoly {
        self.merge(rhs, true)
    }
}

impl Sub for LaurentPoly {
    type Output = LaurentPoly;
    fn sub(self, rhs: LaurentPoly) -> LaurentPoly {
        &self - &rhs
    }
}

impl AddAssign<&LaurentPoly> for LaurentPoly {
    fn add_assign(&mut self, rhs: &LaurentPoly) {
        if rhs.is_zero() {
            return;
        }
        if self.is_zero() {
            *self = rhs.clone();
            return;
        }
        *self = self.merge(rhs, false);
    }
}

impl SubAssign<&LaurentPoly> for LaurentPoly {
    fn sub_assign(&mut self, rhs: &LaurentPoly) {
        if !rhs.is_zero() {
            *self = self.merge(rhs, true);
        }
    }
}

impl Neg for &LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        LaurentPoly { terms: self.terms.iter().map(|(e, c)| (*e, -c.clone())).collect() }
    }
}

impl Neg for LaurentPoly {
    type Output = LaurentPoly;
    fn neg(self) -> LaurentPoly {
        -&self
    }
}

impl Mul<&LaurentPoly> for &LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: &LaurentPoly) -> LaurentPoly {
        let (a, b) = (&self.terms, &rhs.terms);
        if a.is_empty() || b.is_empty() {
            return LaurentPoly::zero();
        }
        if a.len() == 1 || b.len() == 1 {
            let ((e, c), other) = if a.len() == 1 { (&a[0], b) } else { (&b[0], a) };
            return LaurentPoly { terms: other.iter().map(|(f, d)| (e + f, c * d)).collect() };
        }
        let lo = a[0].0 + b[0].0;
        let hi = a[a.len() - 1].0 + b[b.len() - 1].0;
        let mut dense = vec![IBig::ZERO; (hi - lo + 1) as usize];
        for (e, c) in a {
            for (f, d) in b {
                dense[(e + f - lo) as usize] += c * d;
            }
        }
        LaurentPoly {
            terms: dense
                .into_iter()
                .enumerate()
                .filter(|(_, c)| !c.is_zero())
                .map(|(i, c)| (lo + i as i32, c))
                .collect(),
        }
    }
}

impl Mul for LaurentPoly {
    type Output = LaurentPoly;
    fn mul(self, rhs: LaurentPoly) -> LaurentPoly {
        &self * &rhs
    }
}

impl From<i64> for LaurentPoly {
    fn from(c: i64) -> Self {
        Self::monomial(c, 0)
    }
}
