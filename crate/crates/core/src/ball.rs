//! An indexed ball `{ w : l(w) <= R }` with multiplication tables.
//!
//! Ids are assigned in ShortLex order, so comparing ids compares elements
//! by length first. All Hecke-algebra arithmetic runs on ids.

use std::collections::HashMap;
use std::fmt;

use crate::coxeter::{CoxeterSystem, Gen, GenSet, GroupElement, Mat, Side, GENS, RANK};
use crate::error::{Error, Result};

#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Id(pub u32);

impl Id {
    pub const E: Id = Id(0);

    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Debug for Id {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "#{}", self.0)
    }
}

pub struct Ball {
    system: CoxeterSystem,
    radius: usize,
    elements: Vec<GroupElement>,
    index: HashMap<GroupElement, Id>,
    left: Vec<[Option<Id>; RANK]>,
    right: Vec<[Option<Id>; RANK]>,
    inverse: Vec<Id>,
    layer_start: Vec<usize>,
}

impl Ball {
    pub fn new(system: CoxeterSystem, radius: usize) -> Self {
        // Layers by breadth-first search keyed on the matrix of each element.
        let mut mats: Vec<Mat> = vec![system.matrix_of(&[])];
        let mut elements = vec![GroupElement::identity()];
        let mut layer_start = vec![0, 1];
        for n in 0..radius {
            let (lo, hi) = (layer_start[n], layer_start[n + 1]);
            let mut fresh: HashMap<Mat, GroupElement> = HashMap::new();
            for i in lo..hi {
                for s in GENS {
                    if column_nonneg(&mats[i], s) {
                        let m = mul(&mats[i], system.reflection(s));
                        fresh.entry(m).or_insert_with(|| {
                            let mut word = elements[i].word().to_vec();
                            word.push(s);
                            system.normal_form(&word)
                        });
                    }
                }
            }
            let mut layer: Vec<(GroupElement, Mat)> = fresh.into_iter().map(|(m, w)| (w, m)).collect();
            layer.sort_by(|a, b| a.0.cmp(&b.0));
            for (w, m) in layer {
                elements.push(w);
                mats.push(m);
            }
            layer_start.push(elements.len());
        }

        let by_mat: HashMap<Mat, Id> = mats.iter().enumerate().map(|(i, m)| (*m, Id(i as u32))).collect();
        let look = |m: &Mat| by_mat.get(m).copied();
        let left = mats.iter().map(|m| std::array::from_fn(|s| look(&mul(system.reflection(s as Gen), m)))).collect();
        let right = mats.iter().map(|m| std::array::from_fn(|s| look(&mul(m, system.reflection(s as Gen))))).collect();
        let inverse = elements
            .iter()
            .map(|w| {
                let rev: Vec<Gen> = w.word().iter().rev().copied().collect();
                look(&system.matrix_of(&rev)).expect("inverse has the same length")
            })
            .collect();
        let index = elements.iter().enumerate().map(|(i, w)| (w.clone(), Id(i as u32))).collect();
        Self { system, radius, elements, index, left, right, inverse, layer_start }
    }

    pub fn system(&self) -> &CoxeterSystem {
        &self.system
    }

    pub fn radius(&self) -> usize {
        self.radius
    }

    pub fn size(&self) -> usize {
        self.elements.len()
    }

    pub fn ids(&self) -> impl DoubleEndedIterator<Item = Id> + ExactSizeIterator {
        (0..self.elements.len() as u32).map(Id)
    }

    /// Ids of length exactly `n`.
    pub fn layer(&self, n: usize) -> impl DoubleEndedIterator<Item = Id> + ExactSizeIterator {
        let (lo, hi) = if n <= self.radius { (self.layer_start[n], self.layer_start[n + 1]) } else { (0, 0) };
        (lo as u32..hi as u32).map(Id)
    }

    /// Ids of length at most `n`.
    pub fn up_to(&self, n: usize) -> impl DoubleEndedIterator<Item = Id> + ExactSizeIterator {
        let hi = self.layer_start[n.min(self.radius) + 1];
        (0..hi as u32).map(Id)
    }

    pub fn elem(&self, id: Id) -> &GroupElement {
        &self.elements[id.index()]
    }

    pub fn length(&self, id: Id) -> usize {
        self.elements[id.index()].len()
    }

    pub fn id(&self, w: &GroupElement) -> Option<Id> {
        self.index.get(w).copied()
    }

    /// Id of `w`, or an error naming the element when it is outside the ball.
    pub fn require(&self, w: &GroupElement) -> Result<Id> {
        self.id(w).ok_or_else(|| Error::OutsideBall(w.to_string()))
    }

    /// Id of the element spelled by 1-based labels.
    pub fn id_of(&self, labels: &[u8]) -> Result<Id> {
        self.require(&self.system.elem(labels))
    }

    /// `s * w`, or `None` when it leaves the ball.
    pub fn lmul(&self, s: Gen, w: Id) -> Option<Id> {
        self.left[w.index()][s as usize]
    }

    /// `w * s`, or `None` when it leaves the ball.
    pub fn rmul(&self, w: Id, s: Gen) -> Option<Id> {
        self.right[w.index()][s as usize]
    }

    pub fn mul_gen(&self, w: Id, s: Gen, side: Side) -> Option<Id> {
        match side {
            Side::Left => self.lmul(s, w),
            Side::Right => self.rmul(w, s),
        }
    }

    pub fn inverse(&self, w: Id) -> Id {
        self.inverse[w.index()]
    }

    pub fn is_left_descent(&self, w: Id, s: Gen) -> bool {
        self.lmul(s, w).is_some_and(|x| x < w)
    }

    pub fn is_right_descent(&self, w: Id, s: Gen) -> bool {
        self.rmul(w, s).is_some_and(|x| x < w)
    }

    pub fn left_descents(&self, w: Id) -> GenSet {
        GENS.into_iter().filter(|&s| self.is_left_descent(w, s)).collect()
    }

    pub fn right_descents(&self, w: Id) -> GenSet {
        GENS.into_iter().filter(|&s| self.is_right_descent(w, s)).collect()
    }

    /// `x * y`, or `None` if the product leaves the ball.
    pub fn multiply(&self, x: Id, y: Id) -> Option<Id> {
        self.elem(y)
            .word()
            .iter()
            .try_fold(x, |acc, &s| self.rmul(acc, s))
            .or_else(|| self.id(&self.system.multiply(self.elem(x), self.elem(y))))
    }

    /// `x * y` when lengths add up; `None` otherwise or outside the ball.
    pub fn multiply_reduced(&self, x: Id, y: Id) -> Option<Id> {
        let z = self.multiply(x, y)?;
        (self.length(z) == self.length(x) + self.length(y)).then_some(z)
    }

    /// Bruhat order, using the descent recursion on ids.
    pub fn bruhat_leq(&self, x: Id, w: Id) -> bool {
        let (mut x, mut w) = (x, w);
        loop {
            if self.length(x) > self.length(w) {
                return false;
            }
            if x == w || x == Id::E {
                return true;
            }
            let s = self.elem(w).word()[0];
            w = self.lmul(s, w).expect("descent stays inside");
            if self.is_left_descent(x, s) {
                x = self.lmul(s, x).expect("descent stays inside");
            }
        }
    }
}

fn mul(a: &Mat, b: &Mat) -> Mat {
    let mut c = [[0; RANK]; RANK];
    for i in 0..RANK {
        for k in 0..RANK {
            for j in 0..RANK {
                c[i][j] += a[i][k] * b[k][j];
            }
        }
    }
    c
}

fn column_nonneg(m: &Mat, s: Gen) -> bool {
    (0..RANK).all(|i| m[i][s as usize] >= 0)
}
