mod common;

use common::rational;
use margin_core::arith::{int, rank, solve_linear_system, solve_lp, LinearProgram, LpStatus, RMatrix, RowKind, Rational, VarKind};
use num_traits::Zero;
use proptest::prelude::*;

/// Every row of the program, sign constraints included, as `(coeffs, kind, rhs)`.
fn all_rows(lp: &LinearProgram) -> Vec<(Vec<Rational>, RowKind, Rational)> {
    let n = lp.num_vars();
    let mut rows: Vec<_> = (0..lp.num_rows()).map(|i| (lp.a.row(i).to_vec(), lp.rows[i], lp.b[i].clone())).collect();
    for (j, kind) in lp.vars.iter().enumerate() {
        if *kind == VarKind::NonNegative {
            let mut e = vec![Rational::zero(); n];
            e[j] = int(1);
            rows.push((e, RowKind::Ge, Rational::zero()));
        }
    }
    rows
}

/// Maximum over all feasible points defined by n linearly independent tight
/// rows. Equality rows are always tight. `None` when no such point exists.
fn exhaustive_optimum(lp: &LinearProgram) -> Option<Rational> {
    let n = lp.num_vars();
    let rows = all_rows(lp);
    let m = rows.len();
    let mut best: Option<Rational> = None;
    for chosen in combinations(m, n) {
        let a = RMatrix::from_rows(chosen.iter().map(|&i| rows[i].0.clone()).collect()).unwrap();
        if rank(&a) < n {
            continue;
        }
        let b: Vec<Rational> = chosen.iter().map(|&i| rows[i].2.clone()).collect();
        let Some(x) = solve_linear_system(&a, &b).unwrap() else { continue };
        if !lp.is_feasible(&x) {
            continue;
        }
        let val: Rational = lp.objective.iter().zip(&x).map(|(c, v)| c * v).sum();
        if best.as_ref().is_none_or(|b| val > *b) {
            best = Some(val);
        }
    }
    best
}

fn combinations(m: usize, n: usize) -> Vec<Vec<usize>> {
    fn rec(start: usize, m: usize, n: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == n {
            out.push(cur.clone());
            return;
        }
        for i in start..m {
            if m - i < n - cur.len() {
                break;
            }
            cur.push(i);
            rec(i + 1, m, n, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    rec(0, m, n, &mut Vec::new(), &mut out);
    out
}

fn kind(i: u8) -> RowKind {
    match i % 3 {
        0 => RowKind::Le,
        1 => RowKind::Eq,
        _ => RowKind::Ge,
    }
}

/// Bounded programs: every variable is boxed to `[-4, 4]` (free) or `[0, 4]`.
fn bounded_lp() -> impl Strategy<Value = LinearProgram> {
    (1usize..=6, 0usize..=3).prop_flat_map(|(n, extra)| {
        (
            proptest::collection::vec(rational(5, 3), n),
            proptest::collection::vec((proptest::collection::vec(rational(4, 2), n), 0u8..3, rational(6, 2)), extra),
            proptest::collection::vec(any::<bool>(), n),
        )
            .prop_map(move |(objective, rows, free)| {
                let mut lp = LinearProgram::new(objective, VarKind::NonNegative);
                lp.vars = free.iter().map(|&f| if f { VarKind::Free } else { VarKind::NonNegative }).collect();
                for (coeffs, k, rhs) in rows {
                    lp.push_row(coeffs, kind(k), rhs).unwrap();
                }
                for j in 0..n {
                    let mut e = vec![Rational::zero(); n];
                    e[j] = int(1);
                    lp.push_row(e.clone(), RowKind::Le, int(4)).unwrap();
                    if free[j] {
                        lp.push_row(e, RowKind::Ge, int(-4)).unwrap();
                    }
                }
                lp
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn optimum_matches_exhaustive_basic_points(lp in bounded_lp()) {
        let sol = solve_lp(&lp).unwrap();
        match exhaustive_optimum(&lp) {
            None => prop_assert_eq!(sol.status, LpStatus::Infeasible),
            Some(best) => {
                prop_assert_eq!(sol.status, LpStatus::Optimal);
                prop_assert_eq!(sol.optimum.clone().unwrap(), best);
                prop_assert!(sol.certify(&lp).is_ok(), "{:?}", sol.certify(&lp));
            }
        }
    }

    #[test]
    fn solving_twice_gives_the_same_basis(lp in bounded_lp()) {
        let (a, b) = (solve_lp(&lp).unwrap(), solve_lp(&lp).unwrap());
        prop_assert_eq!(a.basis, b.basis);
        prop_assert_eq!(a.point, b.point);
        prop_assert_eq!(a.dual, b.dual);
    }

    #[test]
    fn rank_matches_largest_nonsingular_minor(rows in 1usize..=4, cols in 1usize..=4, seed in proptest::collection::vec(rational(3, 2), 16), zero_mask in any::<u16>()) {
        let a = RMatrix::from_fn(rows, cols, |i, j| {
            let idx = i * 4 + j;
            if zero_mask & (1 << idx) != 0 { Rational::zero() } else { seed[idx].clone() }
        });
        let mut expected = 0;
        for r in 1..=rows.min(cols) {
            for rmask in 0u32..(1 << rows) {
                for cmask in 0u32..(1 << cols) {
                    if rmask.count_ones() as usize != r || cmask.count_ones() as usize != r {
                        continue;
                    }
                    let ri: Vec<usize> = (0..rows).filter(|i| rmask & (1 << i) != 0).collect();
                    let ci: Vec<usize> = (0..cols).filter(|j| cmask & (1 << j) != 0).collect();
                    let minor: Vec<Vec<Rational>> = ri.iter().map(|&i| ci.iter().map(|&j| a.get(i, j).clone()).collect()).collect();
                    if !determinant(minor).is_zero() {
                        expected = r;
                    }
                }
            }
        }
        prop_assert_eq!(rank(&a), expected);
    }
}

/// Cofactor expansion, independent of the elimination used by `rank`.
fn determinant(m: Vec<Vec<Rational>>) -> Rational {
    let n = m.len();
    if n == 1 {
        return m[0][0].clone();
    }
    let mut total = Rational::zero();
    for j in 0..n {
        let sub: Vec<Vec<Rational>> = m[1..].iter().map(|row| row.iter().enumerate().filter(|(c, _)| *c != j).map(|(_, x)| x.clone()).collect()).collect();
        let term = &m[0][j] * determinant(sub);
        if j % 2 == 0 {
            total += term;
        } else {
            total -= term;
        }
    }
    total
}

#[test]
fn unbounded_direction_is_reported() {
    let lp = LinearProgram::new(vec![int(1), int(-1)], VarKind::NonNegative)
        .with_rows(vec![(vec![int(1), int(-1)], RowKind::Ge, int(-2))])
        .unwrap();
    assert_eq!(solve_lp(&lp).unwrap().status, LpStatus::Unbounded);
}
