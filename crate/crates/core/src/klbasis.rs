//! The Kazhdan–Lusztig basis `C_w`, KL polynomials, structure constants and
//! the on-disk cache.

use std::collections::BTreeMap;
use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use crate::ball::{Ball, Id};
use crate::coxeter::{Gen, GroupElement, GroupType, Side};
use crate::error::{Error, Result};
use crate::exec::Exec;
use crate::hecke::{Basis, HeckeAlgebra, HeckeElement};
use crate::laurent::LaurentPoly;

/// The elements `C_w` for every `w` in the ball, stored in T-coordinates.
pub struct KLCache {
    algebra: Arc<HeckeAlgebra>,
    c: Vec<HeckeElement>,
}

/// Counts reported by [`KLCache::build_from`].
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct BuildStats {
    pub reused: usize,
    pub computed: usize,
}

impl KLCache {
    /// Computes `C_w` for the whole ball, one length layer at a time.
    pub fn build(algebra: Arc<HeckeAlgebra>, exec: Exec) -> Result<Self> {
        Self::build_from(algebra, exec, BTreeMap::new(), false).map(|(c, _)| c)
    }

    /// Like [`KLCache::build`] but reuses already known elements, and
    /// optionally checks bar-invariance of every new element.
    pub fn build_from(
        algebra: Arc<HeckeAlgebra>,
        exec: Exec,
        mut known: BTreeMap<Id, HeckeElement>,
        check_bar: bool,
    ) -> Result<(Self, BuildStats)> {
        let ball = algebra.ball().clone();
        let mut stats = BuildStats::default();
        let mut cache = Self { algebra, c: Vec::with_capacity(ball.size()) };
        for n in 0..=ball.radius() {
            let layer: Vec<Id> = ball.layer(n).collect();
            let mut todo = Vec::new();
            for &w in &layer {
                if known.contains_key(&w) {
                    stats.reused += 1;
                } else {
                    todo.push(w);
                }
            }
            let fresh = exec.map(&todo, |&w| {
                if w == Id::E {
                    return Ok(HeckeElement::basis_elem(Basis::T, w));
                }
                let s = ball.elem(w).word()[0];
                let c = cache.compute(w, s, Side::Left)?;
                if check_bar && cache.algebra.bar(&c)? != c {
                    return Err(Error::BarInvariance(ball.elem(w).to_string()));
                }
                Ok(c)
            });
            for (w, c) in todo.iter().zip(fresh) {
                known.insert(*w, c?);
                stats.computed += 1;
            }
            for &w in &layer {
                cache.c.push(known.remove(&w).expect("layer complete"));
            }
        }
        Ok((cache, stats))
    }

    /// Computes `C_w` from `C_{w'}` where `w = s w'` (left) or `w = w' s`
    /// (right), using the cached elements of smaller length.
    ///
    /// `C_s C_{w'}` is bar-invariant with leading term `T_w`; every lower
    /// coefficient is `P + mu` with `P` strictly negative and `mu`
    /// bar-symmetric, and subtracting `mu C_y` from the top down leaves `C_w`.
    pub fn compute(&self, w: Id, s: Gen, side: Side) -> Result<HeckeElement> {
        let ball = self.ball();
        let shorter = ball
            .mul_gen(w, s, side)
            .filter(|&x| x < w)
            .ok_or_else(|| Error::Construction(format!("s{} is not a descent of {}", s + 1, ball.elem(w))))?;
        let (c, _) = self.reduce_product(shorter, s, side)?;
        Ok(c)
    }

    /// `C_s C_y` (left) or `C_y C_s` (right) in C-coordinates.
    ///
    /// When `s` lengthens `y` to `w` this is `C_w + sum mu_z C_z`, and when
    /// `s` is a descent it is `(v^L(s) + v^-L(s)) C_y`.
    pub fn c_gen_mult(&self, s: Gen, y: Id, side: Side) -> Result<HeckeElement> {
        let ball = self.ball();
        let Some(w) = ball.mul_gen(y, s, side) else {
            return Err(Error::TruncationUnsafe { needed: ball.length(y) + 1, radius: self.radius() });
        };
        if w < y {
            return Ok(HeckeElement::term(Basis::C, y, LaurentPoly::v_sym(self.algebra.weight(s))));
        }
        let (_, mus) = self.reduce_product(y, s, side)?;
        let mut out = HeckeElement::basis_elem(Basis::C, w);
        for (z, mu) in mus {
            out.add_term(z, &mu);
        }
        Ok(out)
    }

    /// Expands `C_s C_y` in T-coordinates for a lengthening `s` and strips
    /// off the lower `mu C_z`. Returns `C_{sy}` and the `mu` coefficients.
    ///
    /// `C_s C_y` is bar-invariant with leading term `T_{sy}`; every lower
    /// coefficient is `P + mu` with `P` strictly negative and `mu`
    /// bar-symmetric, and subtracting `mu C_z` from the top down leaves
    /// `C_{sy}`.
    fn reduce_product(&self, y: Id, s: Gen, side: Side) -> Result<(HeckeElement, Vec<(Id, LaurentPoly)>)> {
        let prev = &self.c[y.index()];
        let w = self
            .ball()
            .mul_gen(y, s, side)
            .ok_or(Error::TruncationUnsafe { needed: self.ball().length(y) + 1, radius: self.radius() })?;
        let mut e = match side {
            Side::Left => self.algebra.mult_gen_left(s, prev)?,
            Side::Right => self.algebra.mult_gen_right(prev, s)?,
        };
        e.add_scaled(prev, &LaurentPoly::v_pow(-self.algebra.weight(s)));
        let mut mus = Vec::new();
        let mut cursor = w;
        while let Some((z, b)) = e.terms().range(..cursor).next_back() {
            let z = *z;
            cursor = z;
            if !b.is_strictly_negative() {
                let mu = b.nonnegative_symmetrization();
                e.add_scaled(&self.c[z.index()], &-&mu);
                mus.push((z, mu));
            }
        }
        Ok((e, mus))
    }

    pub fn algebra(&self) -> &Arc<HeckeAlgebra> {
        &self.algebra
    }

    pub fn ball(&self) -> &Arc<Ball> {
        self.algebra.ball()
    }

    pub fn radius(&self) -> usize {
        self.ball().radius()
    }

    /// `C_w` in T-coordinates.
    pub fn c_element(&self, w: Id) -> &HeckeElement {
        &self.c[w.index()]
    }

    /// `P_{y,w}`, the coefficient of `T_y` in `C_w` (zero unless `y <= w`).
    pub fn kl_poly(&self, y: Id, w: Id) -> LaurentPoly {
        self.c[w.index()].coeff(y)
    }

    /// Expands C-coordinates into T-coordinates.
    pub fn c_to_t(&self, h: &HeckeElement) -> Result<HeckeElement> {
        h.expect_basis(Basis::C)?;
        let mut out = HeckeElement::zero(Basis::T);
        for (&y, p) in h.terms() {
            out.add_scaled(&self.c[y.index()], p);
        }
        Ok(out)
    }

    /// Rewrites T-coordinates in the C-basis by back-substitution from the
    /// largest element down.
    pub fn t_to_c(&self, h: &HeckeElement) -> Result<HeckeElement> {
        h.expect_basis(Basis::T)?;
        let mut rest = h.clone();
        let mut out = HeckeElement::zero(Basis::C);
        while let Some((y, a)) = rest.leading() {
            let a = a.clone();
            rest.add_scaled(&self.c[y.index()], &-&a);
            out.add_term(y, &a);
        }
        Ok(out)
    }

    /// The structure constants `h_{x,y,z}` of `C_x C_y = sum_z h_{x,y,z} C_z`.
    pub fn c_mult(&self, x: Id, y: Id) -> Result<HeckeElement> {
        let needed = self.ball().length(x) + self.ball().length(y);
        if needed > self.radius() {
            return Err(Error::TruncationUnsafe { needed, radius: self.radius() });
        }
        let t = self.algebra.mult(self.c_element(x), self.c_element(y))?;
        self.t_to_c(&t)
    }

    /// Product of two elements given in C-coordinates, returned in
    /// C-coordinates.
    pub fn mult_c(&self, a: &HeckeElement, b: &HeckeElement) -> Result<HeckeElement> {
        let t = self.algebra.mult(&self.c_to_t(a)?, &self.c_to_t(b)?)?;
        self.t_to_c(&t)
    }

    /// Writes the cache: a JSON header line, then one record per element in
    /// ShortLex order.
    pub fn save(&self, path: &Path) -> Result<()> {
        let tmp = path.with_extension("partial");
        {
            let mut out = BufWriter::new(File::create(&tmp)?);
            serde_json::to_writer(&mut out, &CacheHeader::of(self.ball()))?;
            out.write_all(b"\n")?;
            let ball = self.ball();
            for w in ball.ids() {
                let coords: Vec<(&GroupElement, &LaurentPoly)> =
                    self.c[w.index()].terms().iter().rev().map(|(y, p)| (ball.elem(*y), p)).collect();
                serde_json::to_writer(&mut out, &Record { w: ball.elem(w).clone(), coords })?;
                out.write_all(b"\n")?;
            }
            out.flush()?;
        }
        std::fs::rename(&tmp, path)?;
        Ok(())
    }

    /// Loads whatever records of `path` fall inside the ball of `algebra`
    /// and computes the rest.
    pub fn load(path: &Path, algebra: Arc<HeckeAlgebra>, exec: Exec) -> Result<(Self, BuildStats)> {
        let known = read_records(path, algebra.ball())?;
        Self::build_from(algebra, exec, known, false)
    }
}

/// First line of a cache file.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct CacheHeader {
    #[serde(rename = "type")]
    pub kind: GroupType,
    pub weights: Vec<u32>,
    pub radius: usize,
}

impl CacheHeader {
    pub fn of(ball: &Ball) -> Self {
        let sys = ball.system();
        Self { kind: sys.kind(), weights: sys.params().to_vec(), radius: ball.radius() }
    }

    fn describe(&self) -> String {
        format!("{} weights {:?}", self.kind, self.weights)
    }
}

#[derive(Serialize)]
struct Record<'a> {
    w: GroupElement,
    coords: Vec<(&'a GroupElement, &'a LaurentPoly)>,
}

#[derive(Deserialize)]
struct OwnedRecord {
    w: GroupElement,
    coords: Vec<(GroupElement, LaurentPoly)>,
}

/// Reads the header of a cache file.
pub fn read_header(path: &Path) -> Result<CacheHeader> {
    let mut first = String::new();
    BufReader::new(File::open(path)?).read_line(&mut first)?;
    serde_json::from_str(&first).map_err(|e| Error::CorruptRecord {
        path: path.to_path_buf(),
        line: 1,
        reason: e.to_string(),
    })
}

/// Reads the records of a cache file that belong to `ball`, checking the
/// header against the ball's group type and weights.
pub fn read_records(path: &Path, ball: &Ball) -> Result<BTreeMap<Id, HeckeElement>> {
    let header = read_header(path)?;
    let wanted = CacheHeader::of(ball);
    if header.kind != wanted.kind || header.weights != wanted.weights {
        return Err(Error::CacheHeaderMismatch { found: header.describe(), requested: wanted.describe() });
    }
    let sys = ball.system();
    let mut known = BTreeMap::new();
    for (i, line) in BufReader::new(File::open(path)?).lines().enumerate().skip(1) {
        let line_no = i + 1;
        let corrupt = |reason: String| Error::CorruptRecord { path: path.to_path_buf(), line: line_no, reason };
        let line = line?;
        let rec: OwnedRecord = serde_json::from_str(&line).map_err(|e| corrupt(e.to_string()))?;
        let normal = |g: &GroupElement| sys.normal_form(g.word()) == *g;
        if !normal(&rec.w) || rec.coords.iter().any(|(y, _)| !normal(y)) {
            return Err(corrupt("word not in normal form".into()));
        }
        let Some(w) = ball.id(&rec.w) else { continue };
        let mut h = HeckeElement::zero(Basis::T);
        for (y, p) in &rec.coords {
            let y = ball.id(y).ok_or_else(|| corrupt(format!("support element {y} longer than {}", rec.w)))?;
            h.add_term(y, p);
        }
        if h.leading() != Some((w, &LaurentPoly::one())) {
            return Err(corrupt(format!("record for {} is not unitriangular", rec.w)));
        }
        known.insert(w, h);
    }
    Ok(known)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::coxeter::CoxeterSystem;

    fn cache(kind: GroupType, params: &[u32], radius: usize) -> KLCache {
        let sys = CoxeterSystem::new(kind, params).unwrap();
        let alg = Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, radius))));
        KLCache::build(alg, Exec::Sequential).unwrap()
    }

    fn v(e: i32) -> LaurentPoly {
        LaurentPoly::v_pow(e)
    }

    #[test]
    fn small_elements() {
        let k = cache(GroupType::B2, &[7, 2, 1], 4);
        let b = k.ball().clone();
        assert_eq!(k.c_element(Id::E), &HeckeElement::basis_elem(Basis::T, Id::E));
        let s2 = b.id_of(&[2]).unwrap();
        assert_eq!(k.kl_poly(Id::E, s2), v(-2));
        let s13 = b.id_of(&[1, 3]).unwrap();
        let expect = HeckeElement::from_terms(
            Basis::T,
            [
                (s13, LaurentPoly::one()),
                (b.id_of(&[3]).unwrap(), v(-7)),
                (b.id_of(&[1]).unwrap(), v(-1)),
                (Id::E, v(-8)),
            ],
        );
        assert_eq!(k.c_element(s13), &expect);
    }

    #[test]
    fn generator_square() {
        let k = cache(GroupType::G2, &[5, 2], 4);
        let s = k.ball().id_of(&[1]).unwrap();
        let h = k.c_mult(s, s).unwrap();
        assert_eq!(h, HeckeElement::term(Basis::C, s, v(5) + v(-5)));
        assert_eq!(k.c_mult(Id::E, s).unwrap(), HeckeElement::basis_elem(Basis::C, s));
    }

    #[test]
    fn conversions_round_trip() {
        let k = cache(GroupType::G2, &[5, 2], 6);
        let b = k.ball().clone();
        let x = k.algebra().mult(k.c_element(b.id_of(&[1, 2]).unwrap()), k.c_element(b.id_of(&[3, 2]).unwrap()));
        let x = x.unwrap();
        assert_eq!(k.c_to_t(&k.t_to_c(&x).unwrap()).unwrap(), x);
    }

    #[test]
    fn cache_round_trip_and_errors() {
        let k = cache(GroupType::G2, &[5, 2], 5);
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("g2.cache");
        k.save(&path).unwrap();
        let (again, stats) = KLCache::load(&path, k.algebra().clone(), Exec::Sequential).unwrap();
        assert_eq!(stats.computed, 0);
        for w in k.ball().ids() {
            assert_eq!(again.c_element(w), k.c_element(w));
        }

        let other = CoxeterSystem::new(GroupType::G2, &[5, 1]).unwrap();
        let alg = Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(other, 5))));
        assert!(matches!(KLCache::load(&path, alg, Exec::Sequential), Err(Error::CacheHeaderMismatch { .. })));

        let text = std::fs::read_to_string(&path).unwrap();
        let cut: String = text.lines().take(9).collect::<Vec<_>>().join("\n");
        let cut = format!("{cut}\n{}", &text.lines().nth(9).unwrap()[..12]);
        std::fs::write(&path, cut).unwrap();
        match KLCache::load(&path, k.algebra().clone(), Exec::Sequential) {
            Err(Error::CorruptRecord { line, .. }) => assert_eq!(line, 10),
            other => panic!("expected a corrupt record, got {:?}", other.err()),
        }
    }
}
