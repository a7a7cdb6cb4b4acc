//! Generators shared by the integration tests.
#![allow(dead_code)]

use margin_core::arith::{rat, Rational};
use margin_core::loss::{LossMatrix, SimplexPoint};
use num_traits::Zero;
use proptest::prelude::*;
use rand::Rng;

pub fn rational(max_abs: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (-max_abs..=max_abs, 1..=max_den).prop_map(|(n, d)| rat(n, d))
}

pub fn positive(max_num: i64, max_den: i64) -> impl Strategy<Value = Rational> {
    (1..=max_num, 1..=max_den).prop_map(|(n, d)| rat(n, d))
}

pub fn scores(k: usize) -> impl Strategy<Value = Vec<Rational>> {
    proptest::collection::vec(rational(12, 6), k)
}

/// A probability vector with denominator at most `n`; coordinates may be zero.
pub fn simplex_point(k: usize, n: u64) -> impl Strategy<Value = SimplexPoint> {
    proptest::collection::vec(0..=n, k)
        .prop_filter("nonzero mass", |c| c.iter().any(|&x| x > 0))
        .prop_map(|c| SimplexPoint::from_counts(&c).unwrap())
}

pub fn loss_from_offdiag(k: usize, off: &[Rational], symmetric: bool) -> LossMatrix {
    let mut m = vec![vec![Rational::zero(); k]; k];
    let mut it = off.iter();
    for i in 0..k {
        for j in 0..k {
            if i == j || (symmetric && j < i) {
                continue;
            }
            m[i][j] = it.next().unwrap().clone();
            if symmetric {
                m[j][i] = m[i][j].clone();
            }
        }
    }
    LossMatrix::new(m).unwrap()
}

pub fn loss(k: usize, symmetric: bool) -> impl Strategy<Value = LossMatrix> {
    let count = if symmetric { k * (k - 1) / 2 } else { k * (k - 1) };
    proptest::collection::vec(positive(6, 4), count).prop_map(move |off| loss_from_offdiag(k, &off, symmetric))
}

/// Symmetric loss followed by shortest-path closure, hence a distance.
pub fn distance(k: usize) -> impl Strategy<Value = LossMatrix> {
    loss(k, true).prop_map(|l| {
        let k = l.k();
        let mut d: Vec<Vec<Rational>> = l.rows().to_vec();
        for via in 0..k {
            for i in 0..k {
                for j in 0..k {
                    let alt = &d[i][via] + &d[via][j];
                    if alt < d[i][j] {
                        d[i][j] = alt;
                    }
                }
            }
        }
        LossMatrix::new(d).unwrap()
    })
}

pub fn loss_any(k_max: usize) -> impl Strategy<Value = LossMatrix> {
    (2..=k_max, any::<bool>()).prop_flat_map(|(k, s)| loss(k, s))
}

pub fn symmetric_any(k_max: usize) -> impl Strategy<Value = LossMatrix> {
    (2..=k_max).prop_flat_map(|k| loss(k, true))
}

pub fn random_rational<R: Rng>(rng: &mut R, max_abs: i64, max_den: i64) -> Rational {
    rat(rng.gen_range(-max_abs..=max_abs), rng.gen_range(1..=max_den))
}

pub fn random_loss<R: Rng>(rng: &mut R, k: usize, symmetric: bool) -> LossMatrix {
    let count = if symmetric { k * (k - 1) / 2 } else { k * (k - 1) };
    let off: Vec<Rational> = (0..count).map(|_| rat(rng.gen_range(1..=8), rng.gen_range(1..=4))).collect();
    loss_from_offdiag(k, &off, symmetric)
}

/// Draws symmetric losses until one satisfies the triangle inequality.
pub fn random_distance_by_rejection<R: Rng>(rng: &mut R, k: usize) -> (LossMatrix, usize) {
    let mut draws = 0;
    loop {
        draws += 1;
        let off: Vec<Rational> = (0..k * (k - 1) / 2).map(|_| rat(rng.gen_range(4..=8), rng.gen_range(1..=3))).collect();
        let l = loss_from_offdiag(k, &off, true);
        let ok = (0..k).all(|a| (0..k).all(|b| (0..k).all(|c| l.get(a, c) <= &(l.get(a, b) + l.get(b, c)))));
        if ok {
            return (l, draws);
        }
    }
}

pub fn is_pair_point(q: &[Rational]) -> bool {
    let nz: Vec<&Rational> = q.iter().filter(|x| !x.is_zero()).collect();
    nz == [&rat(1, 1)] || nz == [&rat(1, 2), &rat(1, 2)]
}

use margin_core::arith::{solve_lp, LpStatus, RowKind};
use margin_core::polytope::{HPolytope, Relation, VertexSet};

/// Outcome of the random-objective closure oracle.
#[derive(Debug, Default)]
pub struct ClosureReport {
    pub objectives: usize,
    pub unbounded: usize,
    /// LP optima that are not in the enumerated set.
    pub missing: Vec<Vec<Rational>>,
    /// Enumerated points that are not the unique optimum of their objective.
    pub not_unique: Vec<Vec<Rational>>,
    pub optima_found: usize,
}

impl ClosureReport {
    pub fn agrees(&self) -> bool {
        self.missing.is_empty() && self.not_unique.is_empty()
    }
}

fn maximize(p: &HPolytope, c: &[Rational], extra: Option<(Vec<Rational>, Rational)>) -> (LpStatus, Option<Rational>, Vec<Rational>) {
    let mut lp = p.to_lp(c.to_vec()).unwrap();
    if let Some((row, rhs)) = extra {
        lp.push_row(row, RowKind::Ge, rhs).unwrap();
    }
    let sol = solve_lp(&lp).unwrap();
    (sol.status, sol.optimum, sol.point)
}

/// Maximizes random rational objectives over `p` until `rounds` consecutive
/// objectives add no new optimum, checking every optimum against `verts`.
/// Then, for each enumerated vertex, the negated sum of its active row
/// normals must have that vertex as its unique maximizer.
pub fn lp_closure_check<R: Rng>(p: &HPolytope, verts: &VertexSet, rng: &mut R, rounds: usize) -> ClosureReport {
    let n = p.dim();
    let mut report = ClosureReport::default();
    let mut found = std::collections::BTreeSet::new();
    let mut idle = 0;
    while idle < rounds && report.objectives < 4000 {
        report.objectives += 1;
        let c: Vec<Rational> = (0..n).map(|_| random_rational(rng, 50, 7)).collect();
        let (status, _, x) = maximize(p, &c, None);
        match status {
            LpStatus::Optimal => {
                if found.insert(x.clone()) {
                    idle = 0;
                    if !verts.contains(&x) {
                        report.missing.push(x);
                    }
                } else {
                    idle += 1;
                }
            }
            LpStatus::Unbounded => {
                report.unbounded += 1;
                idle += 1;
            }
            LpStatus::Infeasible => panic!("closure oracle run on an empty polytope"),
        }
    }
    report.optima_found = found.len();
    for x in verts.iter() {
        let mut c = vec![Rational::zero(); n];
        for i in p.active_rows(x) {
            if p.relations()[i] == Relation::Ge {
                for (cj, a) in c.iter_mut().zip(p.matrix().row(i)) {
                    *cj -= a;
                }
            }
        }
        let (status, opt, _) = maximize(p, &c, None);
        let at_x: Rational = c.iter().zip(x).map(|(a, b)| a * b).sum();
        let mut unique = status == LpStatus::Optimal && opt.as_ref() == Some(&at_x);
        for j in 0..n {
            if !unique {
                break;
            }
            let mut e = vec![Rational::zero(); n];
            e[j] = rat(1, 1);
            let face = Some((c.clone(), at_x.clone()));
            let (_, hi, _) = maximize(p, &e, face.clone());
            let neg: Vec<Rational> = e.iter().map(|v| -v).collect();
            let (_, lo, _) = maximize(p, &neg, face);
            unique = hi.as_ref() == Some(&x[j]) && lo.map(|v| -v).as_ref() == Some(&x[j]);
        }
        if !unique {
            report.not_unique.push(x.clone());
        }
    }
    report
}
