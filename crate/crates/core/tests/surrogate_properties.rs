mod common;

use common::{loss, loss_any, scores, simplex_point};
use margin_core::arith::{half, int, Rational};
use margin_core::loss::{
    argmax_decode, embed, eval_max_margin, eval_max_min_margin, eval_restricted_max_margin, neg_bayes_risk_l_conjugate,
    LossMatrix, Surrogate,
};
use proptest::prelude::*;

fn loss_and_scores(k_max: usize) -> impl Strategy<Value = (LossMatrix, Vec<Rational>, Vec<Rational>)> {
    loss_any(k_max).prop_flat_map(|l| {
        let k = l.k();
        (Just(l), scores(k), scores(k))
    })
}

/// `max_{y'} L(y, y') + v_{y'} − v_y`, written out directly.
fn max_margin_by_hand(l: &LossMatrix, v: &[Rational], y: usize) -> Rational {
    (0..l.k()).map(|z| l.get(y, z) + &v[z] - &v[y]).max().unwrap()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn surrogates_are_ordered((l, v, _w) in loss_and_scores(5)) {
        for y in 0..l.k() {
            let rm = eval_restricted_max_margin(&l, &v, y).unwrap();
            let mm = eval_max_min_margin(&l, &v, y).unwrap();
            let m = eval_max_margin(&l, &v, y).unwrap();
            prop_assert!(rm <= mm && mm <= m, "y={} rm={} mm={} m={}", y, rm, mm, m);
            prop_assert_eq!(m, max_margin_by_hand(&l, &v, y));
        }
    }

    #[test]
    fn binary_zero_one_doubling(v in scores(2), y in 0usize..2) {
        let l = LossMatrix::zero_one(2).unwrap();
        prop_assert_eq!(eval_max_margin(&l, &v, y).unwrap(), int(2) * eval_restricted_max_margin(&l, &v, y).unwrap());
    }

    #[test]
    fn max_min_margin_plus_score_is_label_free((l, v, _w) in loss_and_scores(5)) {
        let (conj, _) = neg_bayes_risk_l_conjugate(&l, &v).unwrap();
        for y in 0..l.k() {
            prop_assert_eq!(eval_max_min_margin(&l, &v, y).unwrap() + &v[y], conj.clone());
        }
    }

    #[test]
    fn conjugate_is_max_of_restricted_conjugates((l, v, _w) in loss_and_scores(5)) {
        let (conj, _) = neg_bayes_risk_l_conjugate(&l, &v).unwrap();
        let best = (0..l.k()).map(|y| eval_restricted_max_margin(&l, &v, y).unwrap() + &v[y]).max().unwrap();
        prop_assert_eq!(conj, best);
    }

    #[test]
    fn surrogate_plus_score_is_midpoint_convex((l, v, w) in loss_and_scores(4)) {
        let mid: Vec<Rational> = v.iter().zip(&w).map(|(a, b)| (a + b) * half()).collect();
        for s in [Surrogate::MaxMargin, Surrogate::RestrictedMaxMargin, Surrogate::MaxMinMargin] {
            for y in 0..l.k() {
                let f = |x: &[Rational]| s.eval(&l, x, y).unwrap() + &x[y];
                prop_assert!(f(&mid) <= (f(&v) + f(&w)) * half(), "{:?} y={}", s, y);
            }
        }
    }

    #[test]
    fn conjugate_maximizer_attains_value((l, v, _w) in loss_and_scores(5)) {
        let (conj, q) = neg_bayes_risk_l_conjugate(&l, &v).unwrap();
        let hl = (0..l.k()).map(|y| l.row(y).iter().zip(&q).map(|(a, b)| a * b).sum::<Rational>()).min().unwrap();
        let vq: Rational = v.iter().zip(&q).map(|(a, b)| a * b).sum();
        prop_assert_eq!(conj, vq + hl);
    }

    #[test]
    fn embedding_decodes_to_its_label(l in loss_any(6)) {
        for y in 0..l.k() {
            prop_assert_eq!(argmax_decode(&embed(&l, y)), y);
        }
    }

    #[test]
    fn expected_surrogate_is_average((l, v, _w) in loss_and_scores(4), seed in 0u64..1000) {
        let k = l.k();
        let counts: Vec<u64> = (0..k as u64).map(|i| (seed >> i) % 4 + u64::from(i == 0)).collect();
        let q = margin_core::loss::SimplexPoint::from_counts(&counts).unwrap();
        for s in [Surrogate::MaxMargin, Surrogate::RestrictedMaxMargin, Surrogate::MaxMinMargin] {
            let direct: Rational = (0..k).map(|y| &q[y] * s.eval(&l, &v, y).unwrap()).sum();
            prop_assert_eq!(s.expected(&l, &v, &q).unwrap(), direct);
        }
    }

    #[test]
    fn max_min_margin_of_embedding_is_bayes_optimal(l in loss(3, false), q in simplex_point(3, 6)) {
        let hl = (0..3).map(|y| l.expected_loss(y, &q)).min().unwrap();
        let best = (0..3).map(|y| Surrogate::MaxMinMargin.expected(&l, &embed(&l, y), &q).unwrap()).min().unwrap();
        prop_assert!(best >= hl);
    }
}
