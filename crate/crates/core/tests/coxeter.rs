//! Words, normal forms, Bruhat order and the ball against brute-force
//! oracles that do not use the reflection representation.

mod common;

use affcell::coxeter::{GenSet, GENS};
use affcell::{Ball, CoxeterSystem, Gen, GroupType, Side};
use common::{m_table, rewrite_normal_form, subword_closure};
use proptest::prelude::*;

fn g2() -> CoxeterSystem {
    CoxeterSystem::new(GroupType::G2, &[5, 2]).unwrap()
}

fn b2() -> CoxeterSystem {
    CoxeterSystem::new(GroupType::B2, &[7, 2, 1]).unwrap()
}

fn words(max_len: usize) -> impl Strategy<Value = Vec<Gen>> {
    prop::collection::vec(0u8..3, 0..=max_len)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(96))]

    #[test]
    fn normal_form_matches_rewriting_g2(w in words(12)) {
        let sys = g2();
        prop_assert_eq!(sys.normal_form(&w).word().to_vec(), rewrite_normal_form(GroupType::G2, &w));
    }

    #[test]
    fn normal_form_matches_rewriting_b2(w in words(12)) {
        let sys = b2();
        prop_assert_eq!(sys.normal_form(&w).word().to_vec(), rewrite_normal_form(GroupType::B2, &w));
    }

    #[test]
    fn products_and_inverses(x in words(10), y in words(10)) {
        for sys in [g2(), b2()] {
            let (a, b) = (sys.normal_form(&x), sys.normal_form(&y));
            let ab = sys.multiply(&a, &b);
            let concat: Vec<Gen> = x.iter().chain(&y).copied().collect();
            prop_assert_eq!(&ab, &sys.normal_form(&concat));
            let inv = sys.inverse(&ab);
            prop_assert!(sys.multiply(&ab, &inv).is_identity());
        }
    }
}

#[test]
fn coxeter_matrix_matches_table() {
    for sys in [g2(), b2()] {
        let m = m_table(sys.kind());
        for i in GENS {
            for j in GENS {
                assert_eq!(sys.coxeter_m(i, j) as usize, m[i as usize][j as usize]);
            }
        }
    }
}

#[test]
fn bruhat_order_matches_subwords() {
    for sys in [g2(), b2()] {
        let ball = Ball::new(sys.clone(), 6);
        for w in ball.ids() {
            let below = subword_closure(&sys, ball.elem(w));
            for x in ball.ids() {
                let expected = below.contains(ball.elem(x));
                assert_eq!(ball.bruhat_leq(x, w), expected, "{} <= {}", ball.elem(x), ball.elem(w));
                assert_eq!(sys.bruhat_leq(ball.elem(x), ball.elem(w)), expected);
            }
        }
    }
}

/// Coefficients of `prod_i (1 + q + ... + q^e_i) / (1 - q^e_i)`, the
/// Poincare series of the affine group with exponents `e_i`.
fn poincare(exponents: &[usize], n: usize) -> Vec<u64> {
    let mut series = vec![0u64; n + 1];
    series[0] = 1;
    for &e in exponents {
        // multiply by 1 + q + ... + q^e
        let mut next = vec![0u64; n + 1];
        for (i, c) in series.iter().enumerate() {
            for k in 0..=e {
                if i + k <= n {
                    next[i + k] += c;
                }
            }
        }
        // divide by 1 - q^e
        for i in e..=n {
            next[i] += next[i - e];
        }
        series = next;
    }
    series
}

#[test]
fn ball_layers_follow_the_poincare_series() {
    for (sys, exps) in [(g2(), [1, 5]), (b2(), [1, 3])] {
        let r = 20;
        let ball = Ball::new(sys.clone(), r);
        let expected = poincare(&exps, r);
        for (n, want) in expected.iter().enumerate() {
            assert_eq!(ball.layer(n).len() as u64, *want, "{} layer {n}", sys.kind());
        }
        assert_eq!(sys.ball(r).len(), ball.size());
    }
    // the radius-10 G2 ball
    assert_eq!(Ball::new(g2(), 10).size(), 133);
}

#[test]
fn coset_representatives_by_brute_force() {
    for sys in [g2(), b2()] {
        let ball = Ball::new(sys.clone(), 8);
        for bits in [[0u8, 1], [1, 2], [0, 2]] {
            let subset = GenSet::of(&bits);
            let group = sys.parabolic_elements(subset).unwrap();
            let order = match (sys.kind(), bits) {
                (GroupType::G2, [0, 1]) => 12,
                (GroupType::G2, [1, 2]) => 6,
                (GroupType::B2, [0, 1]) | (GroupType::B2, [1, 2]) => 8,
                _ => 4,
            };
            assert_eq!(group.len(), order);
            let mut reps = 0;
            for x in ball.ids() {
                let xe = ball.elem(x);
                let minimal_left = group.iter().skip(1).all(|u| sys.multiply(xe, u).len() > xe.len());
                let minimal_right = group.iter().skip(1).all(|u| sys.multiply(u, xe).len() > xe.len());
                assert_eq!(sys.is_coset_rep(xe, subset, Side::Left), minimal_left);
                assert_eq!(sys.is_coset_rep(xe, subset, Side::Right), minimal_right);
                if minimal_left && xe.len() + sys.longest_element(subset).unwrap().len() <= 8 {
                    reps += 1;
                    for u in &group {
                        assert_eq!(sys.multiply(xe, u).len(), xe.len() + u.len());
                    }
                }
            }
            assert!(reps > 0);
        }
    }
}
