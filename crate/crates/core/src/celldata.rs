//! The cell tables: parabolic classes with their a-value forms, the zone
//! orderings, and the `(w, T, Z)` descriptors of every two-sided cell.
//!
//! Tables are written with 1-based generator labels, exactly as printed in
//! the source tables, and resolved into normal forms by [`descriptors_for`].
//! Every resolved table is validated: words must be reduced, the classes
//! must partition the union of the finite parabolic subgroups, and every
//! descriptor must satisfy `z_1 = e` and `t w = w t^-1`.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::ball::{Ball, Id};
use crate::coxeter::{CoxeterSystem, Gen, GenSet, GroupElement, GroupType, Side, GENS};
use crate::error::{Error, Result};

/// Generic parameter zones. G2 zones are ranges of `r = a/b`; B2 zones are
/// the chambers `A1..A5`, `B1, B2`, `C1..C3`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Zone {
    #[serde(rename = "r>2")]
    RAbove2,
    #[serde(rename = "2>r>3/2")]
    RAbove3Half,
    #[serde(rename = "3/2>r>1")]
    RAbove1,
    #[serde(rename = "r<1")]
    RBelow1,
    A1,
    A2,
    A3,
    A4,
    A5,
    B1,
    B2,
    C1,
    C2,
    C3,
}

impl Zone {
    pub const G2_ZONES: [Zone; 4] = [Zone::RAbove2, Zone::RAbove3Half, Zone::RAbove1, Zone::RBelow1];
    pub const B2_ZONES: [Zone; 10] =
        [Zone::A1, Zone::A2, Zone::A3, Zone::A4, Zone::A5, Zone::B1, Zone::B2, Zone::C1, Zone::C2, Zone::C3];

    pub fn all(kind: GroupType) -> &'static [Zone] {
        match kind {
            GroupType::G2 => &Self::G2_ZONES,
            GroupType::B2 => &Self::B2_ZONES,
        }
    }

    pub fn kind(self) -> GroupType {
        if Self::G2_ZONES.contains(&self) {
            GroupType::G2
        } else {
            GroupType::B2
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Zone::RAbove2 => "r>2",
            Zone::RAbove3Half => "2>r>3/2",
            Zone::RAbove1 => "3/2>r>1",
            Zone::RBelow1 => "r<1",
            Zone::A1 => "A1",
            Zone::A2 => "A2",
            Zone::A3 => "A3",
            Zone::A4 => "A4",
            Zone::A5 => "A5",
            Zone::B1 => "B1",
            Zone::B2 => "B2",
            Zone::C1 => "C1",
            Zone::C2 => "C2",
            Zone::C3 => "C3",
        }
    }
}

impl fmt::Display for Zone {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Zone {
    type Err = Error;

    /// Accepts the printed names (`r>2`, `A1`, ...) and shell-friendly
    /// aliases (`above2`, `above3/2`, `above1`, `below1`).
    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim();
        let alias = match t.to_ascii_lowercase().as_str() {
            "above2" | "gt2" => Some(Zone::RAbove2),
            "above3/2" | "gt3/2" => Some(Zone::RAbove3Half),
            "above1" | "gt1" => Some(Zone::RAbove1),
            "below1" | "lt1" => Some(Zone::RBelow1),
            _ => None,
        };
        alias
            .or_else(|| {
                Self::G2_ZONES.iter().chain(&Self::B2_ZONES).copied().find(|z| z.name().eq_ignore_ascii_case(t))
            })
            .ok_or_else(|| Error::UnknownZone(t.to_string()))
    }
}

/// `alpha a + beta b + gamma c`. For G2 the third generator carries weight
/// `b`, so `c = b` there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct AValueForm(pub [i32; 3]);

impl AValueForm {
    pub fn eval(self, abc: [i64; 3]) -> i64 {
        (0..3).map(|i| self.0[i] as i64 * abc[i]).sum()
    }
}

impl fmt::Display for AValueForm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (k, name) in self.0.iter().zip(["a", "b", "c"]) {
            if *k == 0 {
                continue;
            }
            let sign = if *k < 0 {
                "-"
            } else if first {
                ""
            } else {
                "+"
            };
            let mag = k.unsigned_abs();
            if mag == 1 {
                write!(f, "{sign}{name}")?;
            } else {
                write!(f, "{sign}{mag}{name}")?;
            }
            first = false;
        }
        if first {
            f.write_str("0")?;
        }
        Ok(())
    }
}

/// The weights `(a, b, c)` of a system, with `c = b` for G2.
pub fn abc(sys: &CoxeterSystem) -> [i64; 3] {
    [sys.weight(0) as i64, sys.weight(1) as i64, sys.weight(2) as i64]
}

/// The four shapes of the translation part `T` of a cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum TauKind {
    /// `{ t1^m t2^n }`.
    Free2 { t1: GroupElement, t2: GroupElement },
    /// `{ t^n }`.
    Free1 { t: GroupElement },
    /// `{ e, t }`.
    Order2 { t: GroupElement },
    /// `{ e }`.
    Trivial,
}

/// Exponents of a monomial in the base ring: `(m, n)` for `t1^m t2^n`,
/// `(n, 0)` for `t^n`, `(0, 0)` for `e`.
pub type Mono = [u32; 2];

impl TauKind {
    pub fn generators(&self) -> Vec<&GroupElement> {
        match self {
            TauKind::Free2 { t1, t2 } => vec![t1, t2],
            TauKind::Free1 { t } | TauKind::Order2 { t } => vec![t],
            TauKind::Trivial => vec![],
        }
    }

    /// The group element of a monomial.
    pub fn element(&self, sys: &CoxeterSystem, mono: Mono) -> GroupElement {
        let gens = self.generators();
        let mut word = Vec::new();
        for (g, &k) in gens.iter().zip(&mono) {
            for _ in 0..k {
                word.extend_from_slice(g.word());
            }
        }
        sys.normal_form(&word)
    }

    /// Every monomial whose element has length at most `max_len`, in
    /// increasing total degree. Lengths of powers of translations grow with
    /// the exponent, so each exponent loop stops at the first overflow.
    pub fn monomials(&self, sys: &CoxeterSystem, max_len: usize) -> Vec<(Mono, GroupElement)> {
        let mut out = Vec::new();
        match self {
            TauKind::Trivial => out.push(([0, 0], GroupElement::identity())),
            TauKind::Order2 { t } => {
                out.push(([0, 0], GroupElement::identity()));
                if t.len() <= max_len {
                    out.push(([1, 0], t.clone()));
                }
            }
            TauKind::Free1 { .. } => {
                for n in 0.. {
                    let e = self.element(sys, [n, 0]);
                    if e.len() > max_len {
                        break;
                    }
                    out.push(([n, 0], e));
                }
            }
            TauKind::Free2 { .. } => {
                for m in 0.. {
                    let mut any = false;
                    for n in 0.. {
                        let e = self.element(sys, [m, n]);
                        if e.len() > max_len {
                            break;
                        }
                        any = true;
                        out.push(([m, n], e));
                    }
                    if !any {
                        break;
                    }
                }
            }
        }
        out.sort_by_key(|(m, e)| (m[0] + m[1], e.clone()));
        out
    }

    pub fn label(&self) -> &'static str {
        match self {
            TauKind::Free2 { .. } => "free2",
            TauKind::Free1 { .. } => "free1",
            TauKind::Order2 { .. } => "order2",
            TauKind::Trivial => "trivial",
        }
    }
}

/// Which of the two shapes `w_Gamma` has inside its parabolic subgroup.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "case", rename_all = "kebab-case")]
pub enum CaseTag {
    /// `w` is the longest element of `W_J`.
    LongestElement,
    /// `w = s w_J` with `w^2 = e`; `s` is the generator index.
    STimesLongest { s: Gen },
}

/// Classifies `w` inside `W_J`, `J` its support.
pub fn classify_case(sys: &CoxeterSystem, w: &GroupElement) -> Result<CaseTag> {
    let j = w.support();
    let top = sys.longest_element(j).map_err(|_| Error::CellData(format!("{w} has full support")))?;
    if &top == w {
        return Ok(CaseTag::LongestElement);
    }
    for s in j.iter() {
        let (sw, up) = sys.mul_gen(w, s, Side::Left);
        if up && sw == top && sys.multiply(w, w).is_identity() {
            return Ok(CaseTag::STimesLongest { s });
        }
    }
    Err(Error::CellData(format!("{w} is neither longest nor s times longest in W_{j}")))
}

/// One parabolic class `c_i` of the finite part.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ParabolicClass {
    pub index: usize,
    pub name: String,
    pub elements: Vec<GroupElement>,
    pub a_form: AValueForm,
}

/// One position in a zone ordering; `Pair` is a `<->` pair whose strips do
/// not depend on the processing order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OrderStep {
    Single(usize),
    Pair(usize, usize),
}

impl OrderStep {
    pub fn members(self) -> Vec<usize> {
        match self {
            OrderStep::Single(i) => vec![i],
            OrderStep::Pair(i, j) => vec![i, j],
        }
    }
}

/// The datum `(w, T, Z)` of one two-sided cell.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CellDescriptor {
    pub name: String,
    /// Index of the parabolic class this cell grows from.
    pub class: usize,
    pub w_gamma: GroupElement,
    pub tau: TauKind,
    /// `z_1 = e` first, the rest in ShortLex order.
    pub z_set: Vec<GroupElement>,
    pub a_form: AValueForm,
    pub case_tag: CaseTag,
}

/// Everything known about one zone.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct ZoneTable {
    pub kind: GroupType,
    pub zone: Zone,
    pub classes: Vec<ParabolicClass>,
    /// Descending a-value.
    pub order: Vec<OrderStep>,
    pub descriptors: Vec<CellDescriptor>,
    /// Classes whose cells have no `(w, T, Z)` datum and are handled by the
    /// finite G2 construction.
    pub finite: Vec<usize>,
}

impl ZoneTable {
    pub fn class(&self, index: usize) -> Option<&ParabolicClass> {
        self.classes.iter().find(|c| c.index == index)
    }

    pub fn descriptor(&self, name: &str) -> Option<&CellDescriptor> {
        self.descriptors.iter().find(|d| d.name == name)
    }

    pub fn descriptor_of_class(&self, index: usize) -> Option<&CellDescriptor> {
        self.descriptors.iter().find(|d| d.class == index)
    }

    /// Class indices in processing order.
    pub fn processing_order(&self) -> Vec<usize> {
        self.order.iter().flat_map(|s| s.members()).collect()
    }

    pub fn dump(&self) -> Value {
        serde_json::to_value(self).expect("tables serialize")
    }

    /// Reads a table back from its dump, renormalizing every word and
    /// re-running the validation.
    pub fn from_json(value: &Value) -> Result<ZoneTable> {
        let mut table: ZoneTable = serde_json::from_value(value.clone())?;
        let sys = structure_system(table.kind);
        let fix = |w: &mut GroupElement| -> Result<()> {
            let n = sys.normal_form(w.word());
            if n.len() != w.len() {
                return Err(Error::CellData(format!("word {w:?} is not reduced")));
            }
            *w = n;
            Ok(())
        };
        for c in &mut table.classes {
            for w in &mut c.elements {
                fix(w)?;
            }
        }
        for d in &mut table.descriptors {
            fix(&mut d.w_gamma)?;
            for z in &mut d.z_set {
                fix(z)?;
            }
            match &mut d.tau {
                TauKind::Free2 { t1, t2 } => {
                    fix(t1)?;
                    fix(t2)?;
                }
                TauKind::Free1 { t } | TauKind::Order2 { t } => fix(t)?,
                TauKind::Trivial => {}
            }
        }
        table.validate()?;
        Ok(table)
    }

    /// Structural checks independent of any weights.
    pub fn validate(&self) -> Result<()> {
        let sys = structure_system(self.kind);
        let bad = |msg: String| Err(Error::CellData(format!("{} {}: {msg}", self.kind, self.zone)));

        let finite_part: BTreeSet<GroupElement> = finite_part(&sys).into_iter().collect();
        let mut seen = BTreeSet::new();
        for c in &self.classes {
            for w in &c.elements {
                if !finite_part.contains(w) {
                    return bad(format!("{} contains {w}, outside the finite parabolics", c.name));
                }
                if !seen.insert(w.clone()) {
                    return bad(format!("{w} lies in two classes"));
                }
            }
        }
        if seen != finite_part {
            return bad("classes do not cover the finite parabolics".into());
        }
        let order = self.processing_order();
        let mut sorted = order.clone();
        sorted.sort();
        let mut indices: Vec<usize> = self.classes.iter().map(|c| c.index).collect();
        indices.sort();
        if sorted != indices {
            return bad("ordering does not list every class exactly once".into());
        }

        for d in &self.descriptors {
            let c = match self.class(d.class) {
                Some(c) => c,
                None => return bad(format!("{} refers to a missing class", d.name)),
            };
            if !c.elements.contains(&d.w_gamma) {
                return bad(format!("{}: w = {} is not in {}", d.name, d.w_gamma, c.name));
            }
            if d.a_form != c.a_form {
                return bad(format!("{}: a-value form differs from its class", d.name));
            }
            if d.z_set.first().is_none_or(|z| !z.is_identity()) {
                return bad(format!("{}: z_1 must be e", d.name));
            }
            let distinct: BTreeSet<_> = d.z_set.iter().collect();
            if distinct.len() != d.z_set.len() {
                return bad(format!("{}: repeated element in Z", d.name));
            }
            let case = classify_case(&sys, &d.w_gamma)?;
            if case != d.case_tag {
                return bad(format!("{}: case tag {:?} but w classifies as {case:?}", d.name, d.case_tag));
            }
            for t in d.tau.generators() {
                let lhs = sys.multiply(t, &d.w_gamma);
                let rhs = sys.multiply(&d.w_gamma, &sys.inverse(t));
                if lhs != rhs {
                    return bad(format!("{}: t w != w t^-1 for t = {t}", d.name));
                }
                if lhs.len() != t.len() + d.w_gamma.len() {
                    return bad(format!("{}: l(t w) is not additive for t = {t}", d.name));
                }
            }
        }
        for &f in &self.finite {
            if self.class(f).is_none() || self.descriptor_of_class(f).is_some() {
                return bad(format!("finite class c{f} is missing or also has a descriptor"));
            }
        }
        Ok(())
    }

    /// Checks that the a-values at `sys`'s weights follow the ordering:
    /// strictly decreasing between steps; a `<->` pair may tie.
    pub fn check_order(&self, sys: &CoxeterSystem) -> Result<()> {
        let w = abc(sys);
        let value = |i: usize| self.class(i).expect("validated").a_form.eval(w);
        for (k, step) in self.order.iter().enumerate() {
            for later in &self.order[k + 1..] {
                for i in step.members() {
                    for j in later.members() {
                        if value(i) <= value(j) {
                            return Err(Error::NonGeneric(format!(
                                "weights {:?} give a(c{i}) = {} <= a(c{j}) = {}, against the {} ordering of zone {}",
                                sys.params(),
                                value(i),
                                value(j),
                                self.kind,
                                self.zone
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// Numeric a-value of each class at the given weights.
    pub fn a_values(&self, sys: &CoxeterSystem) -> BTreeMap<usize, i64> {
        let w = abc(sys);
        self.classes.iter().map(|c| (c.index, c.a_form.eval(w))).collect()
    }
}

/// A system with unit weights: the group structure the tables live in.
fn structure_system(kind: GroupType) -> CoxeterSystem {
    let ones = vec![1; kind.param_count()];
    CoxeterSystem::new(kind, &ones).expect("unit weights are valid")
}

/// The union of the proper parabolic subgroups, in ShortLex order.
pub fn finite_part(sys: &CoxeterSystem) -> Vec<GroupElement> {
    let mut all = BTreeSet::new();
    for (i, j) in [(0, 1), (1, 2), (0, 2)] {
        let pair = GenSet::of(&[GENS[i], GENS[j]]);
        all.extend(sys.parabolic_elements(pair).expect("proper parabolic"));
    }
    all.into_iter().collect()
}

/// Zone of a weight choice.
///
/// For G2 the zone follows from `r = a/b`, with `r = 1, 3/2, 2` rejected;
/// a `claimed` zone must agree. For B2 the zone cannot be read off the
/// weights and must be claimed; the a-values are then checked against the
/// zone's ordering.
pub fn genericity_check(sys: &CoxeterSystem, claimed: Option<Zone>) -> Result<Zone> {
    let zone = match sys.kind() {
        GroupType::G2 => {
            let (a, b) = (sys.weight(0) as i64, sys.weight(1) as i64);
            if a == b || 2 * a == 3 * b || a == 2 * b {
                return Err(Error::NonGeneric(format!("a/b = {a}/{b} is one of 1, 3/2, 2")));
            }
            let zone = if a > 2 * b {
                Zone::RAbove2
            } else if 2 * a > 3 * b {
                Zone::RAbove3Half
            } else if a > b {
                Zone::RAbove1
            } else {
                Zone::RBelow1
            };
            if let Some(c) = claimed {
                if c != zone {
                    return Err(Error::NonGeneric(format!("weights {a},{b} lie in zone {zone}, not {c}")));
                }
            }
            zone
        }
        GroupType::B2 => claimed.ok_or(Error::ZoneRequired(GroupType::B2))?,
    };
    if zone.kind() != sys.kind() {
        return Err(Error::UnknownZone(format!("{zone} is not a {} zone", sys.kind())));
    }
    descriptors_for(sys.kind(), zone)?.check_order(sys)?;
    Ok(zone)
}

/// First weight choice, in lexicographic order with entries up to `max`,
/// whose a-values follow the zone's ordering strictly (no ties, not even
/// inside a `<->` pair).
pub fn sample_weights(zone: Zone, max: u32) -> Option<Vec<u32>> {
    let kind = zone.kind();
    let table = descriptors_for(kind, zone).ok()?;
    let n = kind.param_count();
    let mut w = vec![1u32; n];
    loop {
        if let Ok(sys) = CoxeterSystem::new(kind, &w) {
            let values = table.a_values(&sys);
            let mut distinct: Vec<i64> = values.values().copied().collect();
            distinct.sort();
            distinct.dedup();
            let strict = distinct.len() == values.len();
            if strict && genericity_check(&sys, Some(zone)).is_ok() {
                return Some(w);
            }
        }
        let mut k = n;
        loop {
            if k == 0 {
                return None;
            }
            k -= 1;
            if w[k] < max {
                w[k] += 1;
                break;
            }
            w[k] = 1;
        }
    }
}

/// One element of a described cell with its coordinates `(i, tau, j)`,
/// meaning `z_i^-1 tau w z_j` (indices 0-based).
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CellCoord {
    pub i: usize,
    pub mono: Mono,
    pub j: usize,
    pub elem: Id,
}

/// All `z_i^-1 tau w z_j` of length at most `radius` (capped by the ball).
///
/// Checks length additivity of every product and injectivity of the
/// coordinates; either failure points at a transcription error.
pub fn enumerate_cell(ball: &Ball, d: &CellDescriptor, radius: usize) -> Result<Vec<CellCoord>> {
    let sys = ball.system();
    let radius = radius.min(ball.radius());
    let wl = d.w_gamma.len();
    let mut out = Vec::new();
    let mut seen: BTreeMap<Id, (usize, Mono, usize)> = BTreeMap::new();
    let taus = d.tau.monomials(sys, radius.saturating_sub(wl));
    let zinv: Vec<GroupElement> = d.z_set.iter().map(|z| sys.inverse(z)).collect();
    for (mono, tau) in &taus {
        let tw = sys.multiply(tau, &d.w_gamma);
        for (i, zi) in zinv.iter().enumerate() {
            let left = sys.multiply(zi, &tw);
            for (j, zj) in d.z_set.iter().enumerate() {
                let total = zi.len() + tau.len() + wl + zj.len();
                if total > radius {
                    continue;
                }
                let x = sys.multiply(&left, zj);
                if x.len() != total {
                    return Err(Error::CellData(format!(
                        "{}: l(z{}^-1 {tau} w z{}) = {} but the factors add up to {total}",
                        d.name,
                        i + 1,
                        j + 1,
                        x.len()
                    )));
                }
                let id = ball.require(&x)?;
                if let Some(prev) = seen.insert(id, (i, *mono, j)) {
                    return Err(Error::CellData(format!(
                        "{}: {x} arises from both {:?} and {:?}",
                        d.name,
                        prev,
                        (i, mono, j)
                    )));
                }
                out.push(CellCoord { i, mono: *mono, j, elem: id });
            }
        }
    }
    Ok(out)
}

// ---------------------------------------------------------------------------
// Raw tables.

type W = &'static [u8];

enum RawClass {
    Words(&'static [W]),
    /// `W_J` minus some elements.
    ParabolicMinus(W, &'static [W]),
    /// The whole finite part minus some elements.
    FiniteMinus(&'static [W]),
}

enum RawTau {
    Free1(W),
    Order2(W),
    Trivial,
}

/// `Z` as a union of prefix sets and single elements.
struct RawZ {
    hats: &'static [W],
    extra: &'static [W],
}

const fn hat(t: &'static [W]) -> RawZ {
    RawZ { hats: t, extra: &[] }
}

const E_ONLY: RawZ = RawZ { hats: &[], extra: &[&[]] };

struct RawCell {
    class: usize,
    w: W,
    /// One column per zone of the family, in the family's zone order.
    columns: &'static [(RawTau, RawZ)],
}

struct Family {
    zones: &'static [Zone],
    classes: &'static [(usize, RawClass, [i32; 3])],
    orders: &'static [&'static [OrderStep]],
    cells: &'static [RawCell],
    /// The `{e}` class.
    trivial: usize,
    /// Finite classes handled without a descriptor.
    finite: &'static [usize],
}

use OrderStep::{Pair as P, Single as S};
use RawTau::{Free1, Order2, Trivial};

const G2_W12: W = &[1, 2, 1, 2, 1, 2];
const G2_W23: W = &[2, 3, 2];
const W13: W = &[1, 3];
const B2_W12: W = &[1, 2, 1, 2];
const B2_W23: W = &[2, 3, 2, 3];

/// Lowest cell of G2: `w = w_{1,2}`, `t1 = s2s1s2s1s2s3`,
/// `t2 = s1s2s1s2s3s1s2s1s2s3`. The twelve-element `Z` (drawn, not listed,
/// in the source) is the prefix set of `s3s2s1s2s1s3s2s1s2s3`; it was read
/// off the computed left cells (the minimal element of each left cell of
/// the lowest cell is `w_{1,2} z_j`).
const G2_C0_T1: W = &[2, 1, 2, 1, 2, 3];
const G2_C0_T2: W = &[1, 2, 1, 2, 3, 1, 2, 1, 2, 3];
const G2_C0_Z: W = &[3, 2, 1, 2, 1, 3, 2, 1, 2, 3];

/// Lowest cell of B2: `w = w_{1,2}`, `t1 = s2s1s2s3`, `t2 = s1s2s1s3s2s3`,
/// `Z = prefixes of s3s2s1s3s2s3`.
const B2_C0_T1: W = &[2, 1, 2, 3];
const B2_C0_T2: W = &[1, 2, 1, 3, 2, 3];
const B2_C0_Z: W = &[3, 2, 1, 3, 2, 3];

static G2_ABOVE1: Family = Family {
    zones: &[Zone::RAbove2, Zone::RAbove3Half, Zone::RAbove1],
    classes: &[
        (6, RawClass::Words(&[&[]]), [0, 0, 0]),
        (5, RawClass::ParabolicMinus(&[2, 3], &[G2_W23, &[]]), [0, 1, 0]),
        (4, RawClass::Words(&[G2_W23]), [0, 3, 0]),
        (3, RawClass::ParabolicMinus(&[1, 2], &[&[], &[2], &[1, 2, 1, 2, 1], G2_W12]), [1, 0, 0]),
        (2, RawClass::Words(&[W13]), [1, 1, 0]),
        (1, RawClass::Words(&[&[1, 2, 1, 2, 1]]), [3, -2, 0]),
        (0, RawClass::Words(&[G2_W12]), [3, 3, 0]),
    ],
    orders: &[
        &[S(0), S(1), S(2), P(3, 4), S(5), S(6)],
        &[S(0), P(1, 4), S(2), S(3), S(5), S(6)],
        &[S(0), S(4), S(2), S(1), S(3), S(5), S(6)],
    ],
    cells: &[
        RawCell {
            class: 1,
            w: &[1, 2, 1, 2, 1],
            columns: &[
                (Free1(&[1, 2, 1, 2, 3]), hat(&[&[3, 2, 1, 2, 3]])),
                // printed as s2s2s1s2s3, which is not reduced
                (Free1(&[1, 2, 1, 2, 3]), hat(&[&[3, 2, 1, 2, 3]])),
                (Trivial, E_ONLY),
            ],
        },
        RawCell {
            class: 2,
            w: W13,
            columns: &[
                (Free1(&[1, 3, 2]), RawZ { hats: &[&[2, 1, 2, 3]], extra: &[&[2, 3]] }),
                (Trivial, hat(&[&[2, 1, 2, 3]])),
                (Free1(&[1, 3, 2, 1, 2]), RawZ { hats: &[&[2, 1, 2, 1]], extra: &[&[2, 1, 2, 3]] }),
            ],
        },
        RawCell {
            class: 3,
            w: &[1],
            columns: &[
                (Order2(&[1, 2]), hat(&[&[2, 3]])),
                (Order2(&[1, 2]), hat(&[&[2, 3]])),
                (Order2(&[1, 2]), hat(&[&[2, 3]])),
            ],
        },
        RawCell {
            class: 4,
            w: G2_W23,
            columns: &[
                (Trivial, E_ONLY),
                (Free1(&[3, 2, 1]), hat(&[&[1, 2, 1, 2, 3]])),
                (Free1(&[3, 2, 1]), hat(&[&[1, 2, 1, 2, 3]])),
            ],
        },
    ],
    trivial: 6,
    finite: &[5],
};

static G2_BELOW1: Family = Family {
    zones: &[Zone::RBelow1],
    classes: &[
        (6, RawClass::Words(&[&[]]), [0, 0, 0]),
        (5, RawClass::Words(&[&[1]]), [1, 0, 0]),
        (4, RawClass::FiniteMinus(&[&[], &[1], &[2, 1, 2, 1, 2], G2_W12, W13, G2_W23]), [0, 1, 0]),
        (3, RawClass::Words(&[W13]), [1, 1, 0]),
        (2, RawClass::Words(&[&[2, 1, 2, 1, 2]]), [-2, 3, 0]),
        (1, RawClass::Words(&[G2_W23]), [0, 3, 0]),
        (0, RawClass::Words(&[G2_W12]), [3, 3, 0]),
    ],
    orders: &[&[S(0), S(1), P(2, 3), S(4), S(5), S(6)]],
    cells: &[
        RawCell { class: 1, w: G2_W23, columns: &[(Free1(&[3, 2, 1]), hat(&[&[1, 2, 1, 2, 3]]))] },
        RawCell { class: 2, w: &[2, 1, 2, 1, 2], columns: &[(Trivial, hat(&[&[3]]))] },
        RawCell {
            class: 3,
            w: W13,
            columns: &[(Free1(&[1, 3, 2, 1, 2]), RawZ { hats: &[&[2, 1, 2, 1]], extra: &[&[2, 1, 2, 3]] })],
        },
        RawCell { class: 5, w: &[1], columns: &[(Trivial, E_ONLY)] },
    ],
    trivial: 6,
    finite: &[4],
};

const B2_ZONE_A_CLASSES: &[(usize, RawClass, [i32; 3])] = &[
    (8, RawClass::Words(&[&[]]), [0, 0, 0]),
    (7, RawClass::Words(&[&[3]]), [0, 0, 1]),
    (6, RawClass::Words(&[&[2], &[3, 2], &[2, 3], &[3, 2, 3]]), [0, 1, 0]),
    (5, RawClass::Words(&[&[2, 3, 2]]), [0, 2, -1]),
    (4, RawClass::Words(&[B2_W23]), [0, 2, 2]),
    (3, RawClass::Words(&[&[1], &[2, 1], &[1, 2], &[2, 1, 2]]), [1, 0, 0]),
    (2, RawClass::Words(&[W13]), [1, 0, 1]),
    (1, RawClass::Words(&[&[1, 2, 1]]), [2, -1, 0]),
    (0, RawClass::Words(&[B2_W12]), [2, 2, 0]),
];

static B2_ZONE_A: Family = Family {
    zones: &[Zone::A1, Zone::A2, Zone::A3, Zone::A4, Zone::A5],
    classes: B2_ZONE_A_CLASSES,
    orders: &[
        &[S(0), S(1), S(2), P(3, 4), S(5), S(6), S(7), S(8)],
        &[S(0), S(1), S(4), S(2), S(3), S(5), S(6), S(7), S(8)],
        &[S(0), P(1, 4), S(2), S(5), S(3), S(6), S(7), S(8)],
        &[S(0), S(4), S(2), S(1), S(5), S(3), S(6), S(7), S(8)],
        &[S(0), S(4), S(2), S(1), S(3), S(5), S(6), S(7), S(8)],
    ],
    cells: &[
        RawCell {
            class: 1,
            w: &[1, 2, 1],
            columns: &[
                (Free1(&[1, 2, 3]), hat(&[&[3, 2, 3]])),
                (Free1(&[1, 2, 3]), hat(&[&[3, 2, 3]])),
                (Free1(&[1, 2, 3]), hat(&[&[3, 2, 3]])),
                (Trivial, E_ONLY),
                (Trivial, E_ONLY),
            ],
        },
        RawCell {
            class: 2,
            w: W13,
            columns: &[
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
                (Trivial, hat(&[&[2, 3]])),
                (Trivial, hat(&[&[2, 3]])),
                (Free1(&[1, 3, 2]), RawZ { hats: &[&[2, 1]], extra: &[&[2, 3]] }),
                (Free1(&[1, 3, 2]), RawZ { hats: &[&[2, 1]], extra: &[&[2, 3]] }),
            ],
        },
        RawCell {
            class: 3,
            w: &[1],
            columns: &[
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
                (Trivial, hat(&[&[2, 3]])),
                (Trivial, hat(&[&[2, 3]])),
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
            ],
        },
        RawCell {
            class: 4,
            w: B2_W23,
            columns: &[
                (Trivial, E_ONLY),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
            ],
        },
        RawCell {
            class: 5,
            w: &[2, 3, 2],
            columns: &[
                (Trivial, E_ONLY),
                (Trivial, E_ONLY),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Trivial, E_ONLY),
            ],
        },
        RawCell {
            class: 6,
            w: &[2],
            columns: &[
                (Trivial, hat(&[&[3]])),
                (Trivial, hat(&[&[3]])),
                (Trivial, hat(&[&[3]])),
                (Trivial, hat(&[&[3]])),
                (Trivial, hat(&[&[3]])),
            ],
        },
        RawCell {
            class: 7,
            w: &[3],
            columns: &[(Trivial, E_ONLY), (Trivial, E_ONLY), (Trivial, E_ONLY), (Trivial, E_ONLY), (Trivial, E_ONLY)],
        },
    ],
    trivial: 8,
    finite: &[],
};

static B2_ZONE_B: Family = Family {
    zones: &[Zone::B1, Zone::B2],
    classes: &[
        (8, RawClass::Words(&[&[]]), [0, 0, 0]),
        (7, RawClass::Words(&[&[3]]), [0, 0, 1]),
        (6, RawClass::Words(&[&[1]]), [1, 0, 0]),
        (5, RawClass::Words(&[W13]), [1, 0, 1]),
        (4, RawClass::Words(&[&[2], &[1, 2], &[2, 1], &[1, 2, 1], &[3, 2], &[2, 3], &[3, 2, 3]]), [0, 1, 0]),
        (3, RawClass::Words(&[&[2, 1, 2]]), [-1, 2, 0]),
        (2, RawClass::Words(&[&[2, 3, 2]]), [0, 2, -1]),
        (1, RawClass::Words(&[B2_W23]), [0, 2, 2]),
        (0, RawClass::Words(&[B2_W12]), [2, 2, 0]),
    ],
    orders: &[
        &[S(0), S(1), S(2), P(3, 5), S(4), S(6), S(7), S(8)],
        &[S(0), S(1), S(2), S(3), S(4), S(5), S(6), S(7), S(8)],
    ],
    cells: &[
        RawCell {
            class: 1,
            w: B2_W23,
            columns: &[(Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])), (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]]))],
        },
        RawCell {
            class: 2,
            w: &[2, 3, 2],
            columns: &[(Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])), (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]]))],
        },
        RawCell { class: 3, w: &[2, 1, 2], columns: &[(Trivial, hat(&[&[3]])), (Trivial, hat(&[&[3]]))] },
        RawCell {
            class: 4,
            w: &[2],
            columns: &[(Trivial, RawZ { hats: &[], extra: &[&[], &[1], &[3]] }), (Free1(&[2, 1, 3]), hat(&[&[1, 3]]))],
        },
        RawCell {
            class: 5,
            w: W13,
            columns: &[(Free1(&[1, 3, 2]), RawZ { hats: &[&[2, 1]], extra: &[&[2, 3]] }), (Trivial, E_ONLY)],
        },
        RawCell { class: 6, w: &[1], columns: &[(Trivial, E_ONLY), (Trivial, E_ONLY)] },
        RawCell { class: 7, w: &[3], columns: &[(Trivial, E_ONLY), (Trivial, E_ONLY)] },
    ],
    trivial: 8,
    finite: &[],
};

static B2_ZONE_C: Family = Family {
    zones: &[Zone::C1, Zone::C2, Zone::C3],
    classes: &[
        (8, RawClass::Words(&[&[]]), [0, 0, 0]),
        (7, RawClass::Words(&[&[2]]), [0, 1, 0]),
        (6, RawClass::Words(&[&[3], &[2, 3], &[3, 2], &[2, 3, 2]]), [0, 0, 1]),
        (5, RawClass::Words(&[&[3, 2, 3]]), [0, -1, 2]),
        (4, RawClass::Words(&[B2_W23]), [0, 2, 2]),
        (3, RawClass::Words(&[&[1], &[2, 1], &[1, 2], &[2, 1, 2]]), [1, 0, 0]),
        (2, RawClass::Words(&[W13]), [1, 0, 1]),
        (1, RawClass::Words(&[&[1, 2, 1]]), [2, -1, 0]),
        (0, RawClass::Words(&[B2_W12]), [2, 2, 0]),
    ],
    orders: &[
        &[S(0), S(4), S(2), S(1), S(3), S(5), S(6), S(7), S(8)],
        &[S(0), P(1, 4), S(2), S(3), S(5), S(6), S(7), S(8)],
        &[S(0), S(1), S(2), P(3, 4), S(5), S(6), S(7), S(8)],
    ],
    cells: &[
        RawCell {
            class: 1,
            w: &[1, 2, 1],
            columns: &[
                (Trivial, E_ONLY),
                (Free1(&[1, 2, 3]), hat(&[&[3, 2, 3]])),
                (Free1(&[1, 2, 3]), hat(&[&[3, 2, 3]])),
            ],
        },
        RawCell {
            class: 2,
            w: W13,
            columns: &[
                (Free1(&[1, 3, 2]), RawZ { hats: &[&[2, 1]], extra: &[&[2, 3]] }),
                (Trivial, hat(&[&[2, 3]])),
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
            ],
        },
        RawCell {
            class: 3,
            w: &[1],
            columns: &[
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
                (Free1(&[1, 2, 3, 2]), hat(&[&[2, 3, 2]])),
            ],
        },
        RawCell {
            class: 4,
            w: B2_W23,
            columns: &[
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Free1(&[2, 3, 2, 1]), hat(&[&[1, 2, 3]])),
                (Trivial, E_ONLY),
            ],
        },
        RawCell { class: 5, w: &[3, 2, 3], columns: &[(Trivial, E_ONLY), (Trivial, E_ONLY), (Trivial, E_ONLY)] },
        RawCell {
            class: 6,
            w: &[3],
            columns: &[(Trivial, hat(&[&[2]])), (Trivial, hat(&[&[2]])), (Trivial, hat(&[&[2]]))],
        },
        RawCell { class: 7, w: &[2], columns: &[(Trivial, E_ONLY), (Trivial, E_ONLY), (Trivial, E_ONLY)] },
    ],
    trivial: 8,
    finite: &[],
};

fn family_of(zone: Zone) -> &'static Family {
    match zone {
        Zone::RAbove2 | Zone::RAbove3Half | Zone::RAbove1 => &G2_ABOVE1,
        Zone::RBelow1 => &G2_BELOW1,
        Zone::A1 | Zone::A2 | Zone::A3 | Zone::A4 | Zone::A5 => &B2_ZONE_A,
        Zone::B1 | Zone::B2 => &B2_ZONE_B,
        Zone::C1 | Zone::C2 | Zone::C3 => &B2_ZONE_C,
    }
}

/// Resolves the raw tables of a zone into a validated [`ZoneTable`].
pub fn descriptors_for(kind: GroupType, zone: Zone) -> Result<ZoneTable> {
    if zone.kind() != kind {
        return Err(Error::UnknownZone(format!("{zone} is not a {kind} zone")));
    }
    let fam = family_of(zone);
    let col = fam.zones.iter().position(|&z| z == zone).expect("zone belongs to its family");
    let sys = structure_system(kind);
    let word = |w: W| -> Result<GroupElement> {
        let e = sys.elem(w);
        if e.len() != w.len() {
            return Err(Error::CellData(format!("table word {w:?} is not reduced")));
        }
        Ok(e)
    };
    let words = |ws: &[W]| -> Result<BTreeSet<GroupElement>> { ws.iter().map(|w| word(w)).collect() };

    let mut classes = Vec::new();
    for (index, raw, form) in fam.classes {
        let elements: BTreeSet<GroupElement> = match raw {
            RawClass::Words(ws) => words(ws)?,
            RawClass::ParabolicMinus(j, minus) => {
                let all: BTreeSet<_> = sys.parabolic_elements(GenSet::labels(j))?.into_iter().collect();
                all.difference(&words(minus)?).cloned().collect()
            }
            RawClass::FiniteMinus(minus) => {
                let all: BTreeSet<_> = finite_part(&sys).into_iter().collect();
                all.difference(&words(minus)?).cloned().collect()
            }
        };
        classes.push(ParabolicClass {
            index: *index,
            name: format!("c{index}"),
            elements: elements.into_iter().collect(),
            a_form: AValueForm(*form),
        });
    }
    classes.sort_by_key(|c| c.index);
    let form_of = |i: usize| classes.iter().find(|c| c.index == i).expect("class listed").a_form;

    let resolve_z = |z: &RawZ| -> Result<Vec<GroupElement>> {
        let mut set = BTreeSet::new();
        for h in z.hats {
            set.extend(sys.prefix_set(&word(h)?));
        }
        set.extend(words(z.extra)?);
        set.insert(GroupElement::identity());
        Ok(set.into_iter().collect())
    };
    let resolve_tau = |t: &RawTau| -> Result<TauKind> {
        Ok(match t {
            RawTau::Free1(a) => TauKind::Free1 { t: word(a)? },
            RawTau::Order2(a) => TauKind::Order2 { t: word(a)? },
            RawTau::Trivial => TauKind::Trivial,
        })
    };
    let make = |class: usize, w: GroupElement, tau: TauKind, z_set: Vec<GroupElement>| -> Result<CellDescriptor> {
        Ok(CellDescriptor {
            name: format!("c{class}"),
            class,
            case_tag: classify_case(&sys, &w)?,
            w_gamma: w,
            tau,
            z_set,
            a_form: form_of(class),
        })
    };

    let mut descriptors = Vec::new();
    let (w0, t1, t2, z0) = match kind {
        GroupType::G2 => (G2_W12, G2_C0_T1, G2_C0_T2, &[G2_C0_Z] as &'static [W]),
        GroupType::B2 => (B2_W12, B2_C0_T1, B2_C0_T2, &[B2_C0_Z] as &'static [W]),
    };
    descriptors.push(make(0, word(w0)?, TauKind::Free2 { t1: word(t1)?, t2: word(t2)? }, resolve_z(&hat(z0))?)?);
    for cell in fam.cells {
        let (tau, z) = &cell.columns[col];
        descriptors.push(make(cell.class, word(cell.w)?, resolve_tau(tau)?, resolve_z(z)?)?);
    }
    descriptors.push(make(fam.trivial, GroupElement::identity(), TauKind::Trivial, vec![GroupElement::identity()])?);
    descriptors.sort_by_key(|d| d.class);

    let table =
        ZoneTable { kind, zone, classes, order: fam.orders[col].to_vec(), descriptors, finite: fam.finite.to_vec() };
    table.validate()?;
    Ok(table)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn g2(a: u32, b: u32) -> CoxeterSystem {
        CoxeterSystem::new(GroupType::G2, &[a, b]).unwrap()
    }

    #[test]
    fn every_zone_resolves() {
        for kind in [GroupType::G2, GroupType::B2] {
            for &z in Zone::all(kind) {
                let t = descriptors_for(kind, z).unwrap();
                assert_eq!(t.processing_order()[0], 0);
            }
        }
    }

    #[test]
    fn g2_zone_classification() {
        assert_eq!(genericity_check(&g2(5, 2), None).unwrap(), Zone::RAbove2);
        assert_eq!(genericity_check(&g2(7, 4), None).unwrap(), Zone::RAbove3Half);
        assert_eq!(genericity_check(&g2(5, 4), None).unwrap(), Zone::RAbove1);
        assert_eq!(genericity_check(&g2(1, 2), None).unwrap(), Zone::RBelow1);
        for (a, b) in [(3, 2), (2, 2), (4, 2)] {
            assert!(matches!(genericity_check(&g2(a, b), None), Err(Error::NonGeneric(_))));
        }
        // a = 3b ties c3 and c4, which form a <-> pair.
        assert_eq!(genericity_check(&g2(6, 2), None).unwrap(), Zone::RAbove2);
    }

    #[test]
    fn g2_c2_row() {
        let t = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
        let d = t.descriptor("c2").unwrap();
        let sys = structure_system(GroupType::G2);
        assert_eq!(d.w_gamma, sys.elem(&[1, 3]));
        assert_eq!(d.tau, TauKind::Free1 { t: sys.elem(&[1, 3, 2]) });
        let expect: BTreeSet<_> =
            [&[][..], &[2], &[2, 1], &[2, 1, 2], &[2, 1, 2, 3], &[2, 3]].iter().map(|w| sys.elem(w)).collect();
        assert_eq!(d.z_set.iter().cloned().collect::<BTreeSet<_>>(), expect);
        let c0 = t.descriptor("c0").unwrap();
        assert_eq!(c0.z_set.len(), 12);
    }

    #[test]
    fn b2_lowest_cell() {
        let t = descriptors_for(GroupType::B2, Zone::C2).unwrap();
        let d = t.descriptor("c0").unwrap();
        let sys = structure_system(GroupType::B2);
        assert_eq!(d.w_gamma, sys.elem(&[1, 2, 1, 2]));
        assert_eq!(d.tau, TauKind::Free2 { t1: sys.elem(&[2, 1, 2, 3]), t2: sys.elem(&[1, 2, 1, 3, 2, 3]) });
        assert_eq!(d.z_set, {
            let mut z: Vec<_> = sys.prefix_set(&sys.elem(&[3, 2, 1, 3, 2, 3])).into_iter().collect();
            z.sort();
            z
        });
    }

    #[test]
    fn case_tags() {
        let sys = structure_system(GroupType::G2);
        assert_eq!(classify_case(&sys, &sys.elem(&[2, 3, 2])).unwrap(), CaseTag::LongestElement);
        assert_eq!(classify_case(&sys, &sys.elem(&[1, 2, 1, 2, 1])).unwrap(), CaseTag::STimesLongest { s: 1 });
        assert!(classify_case(&sys, &sys.elem(&[1, 2])).is_err());
    }

    #[test]
    fn b2_zone_needs_claim_and_consistent_order() {
        let sys = CoxeterSystem::new(GroupType::B2, &[7, 2, 1]).unwrap();
        assert!(genericity_check(&sys, None).is_err());
        assert_eq!(genericity_check(&sys, Some(Zone::A1)).unwrap(), Zone::A1);
        assert!(matches!(genericity_check(&sys, Some(Zone::B2)), Err(Error::NonGeneric(_))));
    }

    #[test]
    fn sample_search_finds_consistent_weights() {
        for &z in &Zone::B2_ZONES {
            let w = sample_weights(z, 20).unwrap_or_else(|| panic!("no sample for {z}"));
            let sys = CoxeterSystem::new(GroupType::B2, &w).unwrap();
            assert_eq!(genericity_check(&sys, Some(z)).unwrap(), z);
        }
    }

    #[test]
    fn c3_has_eighteen_elements() {
        let sys = g2(5, 2);
        let ball = Ball::new(sys, 10);
        let t = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
        let cell = enumerate_cell(&ball, t.descriptor("c3").unwrap(), 10).unwrap();
        assert_eq!(cell.len(), 18);
        assert_eq!(cell[0].elem, ball.id_of(&[1]).unwrap());
    }

    #[test]
    fn dump_round_trip() {
        let t = descriptors_for(GroupType::B2, Zone::B1).unwrap();
        assert_eq!(ZoneTable::from_json(&t.dump()).unwrap(), t);
    }

    #[test]
    fn form_display() {
        assert_eq!(AValueForm([3, -2, 0]).to_string(), "3a-2b");
        assert_eq!(AValueForm([0, 0, 0]).to_string(), "0");
        assert_eq!(AValueForm([0, 2, 2]).to_string(), "2b+2c");
    }
}
