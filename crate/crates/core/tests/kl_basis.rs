//! The KL basis against its defining properties and against an independent
//! solver that works from the bar involution alone.

use std::sync::{Arc, OnceLock};

use affcell::hecke::{Basis, HeckeAlgebra, HeckeElement};
use affcell::klbasis::KLCache;
use affcell::{Ball, CoxeterSystem, Exec, GroupType, Id, LaurentPoly};
use proptest::prelude::*;

fn cache(kind: GroupType, w: &[u32], r: usize) -> KLCache {
    let sys = CoxeterSystem::new(kind, w).unwrap();
    KLCache::build(Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, r)))), Exec::Parallel).unwrap()
}

fn g2() -> &'static KLCache {
    static C: OnceLock<KLCache> = OnceLock::new();
    C.get_or_init(|| cache(GroupType::G2, &[5, 2], 10))
}

fn b2() -> &'static KLCache {
    static C: OnceLock<KLCache> = OnceLock::new();
    C.get_or_init(|| cache(GroupType::B2, &[7, 2, 1], 10))
}

/// Negative-degree part.
fn negative_part(p: &LaurentPoly) -> LaurentPoly {
    LaurentPoly::from_terms(p.terms().iter().filter(|(e, _)| *e < 0).map(|(e, c)| (*e, c.clone())))
}

/// `C_w` from `bar(C_w) = C_w` and `p_{y,w} in v^-1 Z[v^-1]` for `y < w`:
/// with `bar(T_z) = sum_y r_{y,z} T_y`, each `p_y - bar(p_y)` equals
/// `sum_{z > y} bar(p_z) r_{y,z}`, and `p_y` is its negative part.
fn oracle_c(kl: &KLCache, w: Id) -> HeckeElement {
    let alg = kl.algebra();
    let ball = kl.ball();
    let bars: Vec<HeckeElement> = ball.ids().map(|z| alg.bar(&alg.t(z)).unwrap()).collect();
    let mut p: Vec<(Id, LaurentPoly)> = vec![(w, LaurentPoly::one())];
    for y in ball.ids().rev().filter(|&y| y < w) {
        let mut q = LaurentPoly::zero();
        for (z, pz) in &p {
            q += &(&pz.bar() * &bars[z.index()].coeff(y));
        }
        let py = negative_part(&q);
        assert_eq!(&py - &py.bar(), q, "not antisymmetric at {}", ball.elem(y));
        if !py.is_zero() {
            p.push((y, py));
        }
    }
    HeckeElement::from_terms(Basis::T, p)
}

#[test]
fn c_basis_matches_bar_invariance_solver() {
    for kl in [g2(), b2()] {
        for w in kl.ball().up_to(6) {
            assert_eq!(&oracle_c(kl, w), kl.c_element(w), "C_{}", kl.ball().elem(w));
        }
    }
}

#[test]
fn standard_basis_inverses() {
    for kl in [g2(), b2()] {
        let alg = kl.algebra();
        for w in kl.ball().up_to(5) {
            let prod = alg.mult(&alg.t(w), &alg.invert_t(w)).unwrap();
            assert_eq!(prod, HeckeElement::basis_elem(Basis::T, Id::E));
        }
    }
}

#[test]
fn equal_parameter_dihedral_polynomials_are_monomials() {
    // In a finite dihedral group with equal parameters every p_{y,w} with
    // y <= w is v^(l(y) - l(w)).
    let kl = cache(GroupType::G2, &[1, 1], 6);
    let ball = kl.ball();
    let sys = ball.system();
    let group = sys.parabolic_elements(affcell::GenSet::of(&[0, 1])).unwrap();
    for w in &group {
        let w = ball.id(w).unwrap();
        for y in &group {
            let y = ball.id(y).unwrap();
            let expected = if ball.bruhat_leq(y, w) {
                LaurentPoly::v_pow(ball.length(y) as i32 - ball.length(w) as i32)
            } else {
                LaurentPoly::zero()
            };
            assert_eq!(kl.kl_poly(y, w), expected);
        }
    }
}

fn check_element(kl: &KLCache, w: Id) -> Result<(), TestCaseError> {
    let alg = kl.algebra();
    let ball = kl.ball();
    let c = kl.c_element(w);
    prop_assert_eq!(&alg.bar(c).unwrap(), c);
    prop_assert_eq!(c.leading(), Some((w, &LaurentPoly::one())));
    prop_assert!(c.terms().iter().all(|(y, p)| *y == w || p.is_strictly_negative()));
    prop_assert!(c.support().all(|y| ball.bruhat_leq(y, w)));
    let winv = ball.inverse(w);
    prop_assert_eq!(&alg.flat(c), kl.c_element(winv));
    for y in c.support() {
        prop_assert_eq!(kl.kl_poly(y, w), kl.kl_poly(ball.inverse(y), winv));
    }
    Ok(())
}

fn check_product(kl: &KLCache, x: Id, y: Id) -> Result<(), TestCaseError> {
    let h = kl.c_mult(x, y).unwrap();
    prop_assert!(h.terms().values().all(LaurentPoly::is_bar_symmetric));
    // flat reverses products
    let ball = kl.ball();
    let alg = kl.algebra();
    prop_assert_eq!(alg.flat(&h), kl.c_mult(ball.inverse(y), ball.inverse(x)).unwrap());
    Ok(())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn c_elements_g2(k in 0usize..133) {
        check_element(g2(), Id(k as u32))?;
    }

    #[test]
    fn c_elements_b2(k in 0usize..1000) {
        let kl = b2();
        check_element(kl, Id((k % kl.ball().size()) as u32))?;
    }

    #[test]
    fn structure_constants_bar_symmetric(a in 0usize..10_000, b in 0usize..10_000) {
        for kl in [g2(), b2()] {
            let ball = kl.ball();
            let small: Vec<Id> = ball.up_to(5).collect();
            let (x, y) = (small[a % small.len()], small[b % small.len()]);
            check_product(kl, x, y)?;
        }
    }

    #[test]
    fn c_multiplication_is_associative(a in 0usize..1000, b in 0usize..1000, c in 0usize..1000) {
        let kl = g2();
        let small: Vec<Id> = kl.ball().up_to(3).collect();
        let e = |k: usize| HeckeElement::basis_elem(Basis::C, small[k % small.len()]);
        let l = kl.mult_c(&kl.mult_c(&e(a), &e(b)).unwrap(), &e(c)).unwrap();
        let r = kl.mult_c(&e(a), &kl.mult_c(&e(b), &e(c)).unwrap()).unwrap();
        prop_assert_eq!(l, r);
    }
}

#[test]
fn cache_round_trip_resumes() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("g2.jsonl");
    let small = cache(GroupType::G2, &[5, 2], 6);
    small.save(&path).unwrap();
    let sys = CoxeterSystem::new(GroupType::G2, &[5, 2]).unwrap();
    let alg = Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, 8))));
    let (big, stats) = KLCache::load(&path, alg, Exec::Sequential).unwrap();
    assert_eq!(stats.reused, small.ball().size());
    assert_eq!(stats.reused + stats.computed, big.ball().size());
    for w in big.ball().ids() {
        assert_eq!(big.c_element(w), &oracle_c(&big, w));
    }
}
