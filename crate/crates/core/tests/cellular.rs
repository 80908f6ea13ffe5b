//! Cell ideals as generalized matrix algebras, checked against products in
//! the Hecke algebra.

use std::sync::Arc;

use affcell::celldata::{descriptors_for, sample_weights, Zone};
use affcell::cells::CellGraph;
use affcell::cellular::{
    a_mult, finite_cells_g2, g2_finite_form_expected, relabeling, verify_theorem, BElement, BaseRing,
    CellAlgebraElement, CellContext, CellIdeal, FormMatrix, Status,
};
use affcell::hecke::{Basis, HeckeAlgebra, HeckeElement};
use affcell::klbasis::KLCache;
use affcell::{Ball, CoxeterSystem, Exec, GroupType, LaurentPoly};
use proptest::prelude::*;

fn cache(kind: GroupType, w: &[u32], r: usize) -> KLCache {
    let sys = CoxeterSystem::new(kind, w).unwrap();
    KLCache::build(Arc::new(HeckeAlgebra::new(Arc::new(Ball::new(sys, r)))), Exec::Parallel).unwrap()
}

fn pretty(r: &affcell::cellular::Report) -> String {
    serde_json::to_string_pretty(&r.to_json()).unwrap()
}

#[test]
fn square_of_the_base_element() {
    // [C_w]^2 = Phi(v_1 (x) phi(1,1) (x) v_1) with z_1 = e.
    let kl = cache(GroupType::G2, &[4, 1], 14);
    let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
    let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
    let ball = kl.ball();
    for d in &table.descriptors {
        assert!(d.z_set[0].is_identity());
        if 2 * d.w_gamma.len() > 14 {
            continue;
        }
        let cell = CellIdeal::new(&ctx, d, 14).unwrap();
        let form = cell.phi_form().unwrap();
        let images = cell.images().unwrap();
        let one = CellAlgebraElement::basis(cell.ring(), 0, [0, 0], 0);
        let sq = a_mult(&one, &one, &form).unwrap();
        let w = ball.require(&d.w_gamma).unwrap();
        let c_w = HeckeElement::basis_elem(Basis::C, w);
        let direct = ctx.mult_classes(d.class, &c_w, &c_w).unwrap();
        assert_eq!(cell.phi_map(&sq, &images).unwrap(), direct, "{}", d.name);
    }
}

#[test]
fn quad_relation_in_g2_middle_zone() {
    let w = sample_weights(Zone::RAbove1, 20).unwrap();
    let kl = cache(GroupType::G2, &w, 14);
    let table = descriptors_for(GroupType::G2, Zone::RAbove1).unwrap();
    let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
    let mut seen = 0;
    for d in &table.descriptors {
        let cell = CellIdeal::new(&ctx, d, 14).unwrap();
        if cell.ring() == BaseRing::Quad {
            seen += 1;
            assert_eq!(cell.check_quad().status, Status::Pass, "{}", d.name);
        } else {
            assert_eq!(cell.check_quad().status, Status::NotApplicable);
        }
    }
    assert!(seen > 0);
}

#[test]
fn lowest_b2_cell_commutes() {
    let w = sample_weights(Zone::A1, 20).unwrap();
    let kl = cache(GroupType::B2, &w, 14);
    let table = descriptors_for(GroupType::B2, Zone::A1).unwrap();
    let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
    let d = table.descriptors.iter().find(|d| BaseRing::of(&d.tau) == BaseRing::Poly2).unwrap();
    let cell = CellIdeal::new(&ctx, d, 14).unwrap();
    assert_eq!(cell.check_commutation().status, Status::Pass);
}

#[test]
fn every_zone_verifies_at_radius_12() {
    for kind in [GroupType::G2, GroupType::B2] {
        for &zone in Zone::all(kind) {
            let w = sample_weights(zone, 20).unwrap();
            let kl = cache(kind, &w, 12);
            let table = descriptors_for(kind, zone).unwrap();
            let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
            for d in &table.descriptors {
                let rep = verify_theorem(&ctx, d, 12, 300);
                assert!(rep.passed(), "{kind} {zone} {}", pretty(&rep));
            }
        }
    }
}

#[test]
fn finite_g2_cell_with_scalar_form() {
    let kl = cache(GroupType::G2, &[5, 2], 14);
    let table = descriptors_for(GroupType::G2, Zone::RAbove2).unwrap();
    let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
    let left = CellGraph::build(&kl, Exec::Parallel).unwrap().left_cells();
    let rep = finite_cells_g2(&ctx, &left);
    assert_eq!(rep.base_ring, BaseRing::Scalar);
    assert!(rep.passed(), "{}", pretty(&rep));
    assert_eq!(rep.check("multiplicativity").unwrap().status, Status::Pass);
}

#[test]
fn finite_g2_cell_with_quadratic_form() {
    // The products close up under the computed form; the tabulated matrix
    // agrees with it only after permuting the three left cells.
    let kl = cache(GroupType::G2, &[1, 2], 14);
    let table = descriptors_for(GroupType::G2, Zone::RBelow1).unwrap();
    let ctx = CellContext::new(&kl, &table, Exec::Parallel).unwrap();
    let left = CellGraph::build(&kl, Exec::Parallel).unwrap().left_cells();
    let rep = finite_cells_g2(&ctx, &left);
    assert_eq!(rep.base_ring, BaseRing::Quad);
    for name in ["left-cells", "flat-compatibility", "multiplicativity"] {
        assert_eq!(rep.check(name).unwrap().status, Status::Pass, "{name}: {}", pretty(&rep));
    }
    let m = rep.check("form-matrix").unwrap();
    assert_eq!(m.status, Status::Fail);
    assert!(m.detail.as_deref().unwrap().ends_with("Gamma_{2,3,1}"), "{:?}", m.detail);
}

#[test]
fn relabeling_of_a_permuted_form() {
    let m = g2_finite_form_expected(1, 2);
    let p = [2usize, 0, 1];
    let rows = (0..3).map(|j| (0..3).map(|k| m.get(p[j], p[k]).cloned()).collect()).collect();
    let permuted = FormMatrix::new(m.ring(), rows);
    // permuted(j, k) = m(p[j], p[k]); the inverse permutation undoes it.
    let q = relabeling(&permuted, &m).unwrap();
    for j in 0..3 {
        for k in 0..3 {
            assert_eq!(permuted.get(q[j], q[k]), m.get(j, k));
        }
    }
}

fn b_element(ring: BaseRing) -> impl Strategy<Value = BElement> {
    prop::collection::vec((0u32..3, 0u32..3, -3i32..4, -2i32..3), 0..4).prop_map(move |ts| {
        let mut b = BElement::zero(ring);
        for (m, n, e, c) in ts {
            b.add_term(ring.reduce([m, n]), &(&LaurentPoly::v_pow(e) * &LaurentPoly::from(i64::from(c))));
        }
        b
    })
}

fn cell_element(ring: BaseRing, n: usize) -> impl Strategy<Value = CellAlgebraElement> {
    prop::collection::vec((0..n, 0u32..3, 0u32..3, 0..n, -2i32..3), 1..4).prop_map(move |ts| {
        let mut x = CellAlgebraElement::zero(ring);
        for (i, m, k, j, e) in ts {
            x.add_term(i, ring.reduce([m, k]), j, &LaurentPoly::v_pow(e));
        }
        x
    })
}

fn associativity(ring: BaseRing) -> impl Strategy<Value = (FormMatrix, [CellAlgebraElement; 3])> {
    let n = 3;
    (prop::collection::vec(b_element(ring), n * n), cell_element(ring, n), cell_element(ring, n), cell_element(ring, n))
        .prop_map(move |(es, x, y, z)| {
            let rows = es.chunks(n).map(|r| r.iter().cloned().map(Some).collect()).collect();
            (FormMatrix::new(ring, rows), [x, y, z])
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn generalized_matrix_algebra_is_associative_poly2((form, [x, y, z]) in associativity(BaseRing::Poly2)) {
        let l = a_mult(&a_mult(&x, &y, &form).unwrap(), &z, &form).unwrap();
        let r = a_mult(&x, &a_mult(&y, &z, &form).unwrap(), &form).unwrap();
        prop_assert_eq!(l, r);
    }

    #[test]
    fn generalized_matrix_algebra_is_associative_quad((form, [x, y, z]) in associativity(BaseRing::Quad)) {
        let l = a_mult(&a_mult(&x, &y, &form).unwrap(), &z, &form).unwrap();
        let r = a_mult(&x, &a_mult(&y, &z, &form).unwrap(), &form).unwrap();
        prop_assert_eq!(l, r);
    }
}
