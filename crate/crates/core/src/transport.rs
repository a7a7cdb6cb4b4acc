//! Transport plans and an exact transportation simplex.
//!
//! The solver maximizes `⟨C, Q⟩` over nonnegative plans with prescribed row
//! and column sums. It starts from the northwest-corner basis, prices with
//! row/column potentials and pivots around the unique cycle closed by the
//! entering cell. Entering and leaving cells follow the least-index rule over
//! row-major cell indices, which is Bland's rule for this LP.

use crate::arith::{format_rational, RMatrix, RVector, Rational};
use crate::loss::{LossMatrix, SimplexPoint};
use crate::{Error, Result};
use num_traits::{Signed, Zero};
use serde::{Serialize, Serializer};

/// A k×k matrix `Q`, usually a member of `U(q, q)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TransportPlan {
    entries: RMatrix,
}

impl TransportPlan {
    pub fn new(entries: RMatrix) -> Result<Self> {
        if !entries.is_square() {
            return Err(Error::dim(format!("plan is {}x{}", entries.rows(), entries.cols())));
        }
        Ok(TransportPlan { entries })
    }

    pub fn zeros(k: usize) -> Self {
        TransportPlan { entries: RMatrix::zeros(k, k) }
    }

    /// `q qᵀ`.
    pub fn product(q: &SimplexPoint) -> Self {
        let k = q.len();
        TransportPlan { entries: RMatrix::from_fn(k, k, |i, j| &q[i] * &q[j]) }
    }

    pub fn k(&self) -> usize {
        self.entries.rows()
    }

    pub fn get(&self, i: usize, j: usize) -> &Rational {
        self.entries.get(i, j)
    }

    pub fn set(&mut self, i: usize, j: usize, value: Rational) {
        self.entries.set(i, j, value);
    }

    pub fn matrix(&self) -> &RMatrix {
        &self.entries
    }

    pub fn row(&self, i: usize) -> &[Rational] {
        self.entries.row(i)
    }

    /// Row-major flattening, the coordinate order of the transport polytope.
    pub fn flatten(&self) -> RVector {
        self.entries.as_slice().to_vec()
    }

    pub fn from_flat(k: usize, flat: &[Rational]) -> Result<Self> {
        if flat.len() != k * k {
            return Err(Error::dim(format!("{} entries for a {k}x{k} plan", flat.len())));
        }
        Ok(TransportPlan { entries: RMatrix::from_fn(k, k, |i, j| flat[i * k + j].clone()) })
    }

    /// `⟨L, Q⟩_F`.
    pub fn value(&self, loss: &LossMatrix) -> Rational {
        let k = self.k();
        let mut acc = Rational::zero();
        for i in 0..k {
            for j in 0..k {
                let q = self.entries.get(i, j);
                if !q.is_zero() {
                    acc += loss.get(i, j) * q;
                }
            }
        }
        acc
    }

    /// `Q >= 0`, `Q 1 = q` and `Qᵀ 1 = q`.
    pub fn is_in_transport_polytope(&self, q: &SimplexPoint) -> bool {
        let k = self.k();
        if q.len() != k {
            return false;
        }
        if self.entries.as_slice().iter().any(|x| x.is_negative()) {
            return false;
        }
        (0..k).all(|i| {
            let row: Rational = (0..k).map(|j| self.entries.get(i, j)).sum();
            let col: Rational = (0..k).map(|j| self.entries.get(j, i)).sum();
            row == q[i] && col == q[i]
        })
    }

    /// Membership in the restriction cone: for every `y` and `z`,
    /// `(L_y − L_z)·Q_y <= 0`, where `Q_y` is row `y` of the plan. Vacuous for
    /// zero rows.
    pub fn is_in_restriction_cone(&self, loss: &LossMatrix) -> bool {
        self.first_cone_violation(loss).is_none()
    }

    /// First `(y, z)` with `(L_y − L_z)·Q_y > 0`.
    pub fn first_cone_violation(&self, loss: &LossMatrix) -> Option<(usize, usize)> {
        let k = self.k();
        for y in 0..k {
            let qy = self.entries.row(y);
            if qy.iter().all(|x| x.is_zero()) {
                continue;
            }
            let own = crate::arith::dot(loss.row(y), qy);
            for z in 0..k {
                if z != y && own > crate::arith::dot(loss.row(z), qy) {
                    return Some((y, z));
                }
            }
        }
        None
    }
}

impl Serialize for TransportPlan {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let rows: Vec<Vec<String>> = (0..self.k()).map(|i| self.entries.row(i).iter().map(format_rational).collect()).collect();
        rows.serialize(s)
    }
}

/// Optimal plan and the potentials that certify it: `u_i + v_j >= C_ij`
/// everywhere, with equality on the plan's support.
#[derive(Clone, Debug)]
pub struct TransportSolution {
    pub value: Rational,
    pub plan: RMatrix,
    pub row_potentials: RVector,
    pub col_potentials: RVector,
}

/// `max ⟨C, Q⟩` over `Q >= 0` with row sums `r` and column sums `c`.
pub fn max_transport(cost: &RMatrix, r: &[Rational], c: &[Rational]) -> Result<TransportSolution> {
    let (m, n) = (cost.rows(), cost.cols());
    if r.len() != m || c.len() != n || m == 0 || n == 0 {
        return Err(Error::dim(format!("cost {m}x{n} with marginals of length {} and {}", r.len(), c.len())));
    }
    if r.iter().chain(c).any(|x| x.is_negative()) {
        return Err(Error::Validation("marginals must be nonnegative".into()));
    }
    let total_r: Rational = r.iter().sum();
    let total_c: Rational = c.iter().sum();
    if total_r != total_c {
        return Err(Error::Validation(format!(
            "marginal totals differ: {} vs {}",
            format_rational(&total_r),
            format_rational(&total_c)
        )));
    }

    if let Some(sol) = scaled_integer_solve(cost, r, c) {
        return Ok(sol);
    }
    let costs: Vec<Rational> = (0..m * n).map(|cell| cost.get(cell / n, cell % n).clone()).collect();
    let (x, u, v) = simplex(&costs, r, c, m, n).expect("rational arithmetic does not overflow");
    let value = (0..m * n).filter(|&cell| !x[cell].is_zero()).map(|cell| &costs[cell] * &x[cell]).sum();
    Ok(TransportSolution { value, plan: RMatrix::from_fn(m, n, |a, b| x[a * n + b].clone()), row_potentials: u, col_potentials: v })
}

/// Arithmetic the simplex runs on. `None` signals overflow.
trait Scalar: Clone + Ord + Zero {
    fn plus(&self, o: &Self) -> Option<Self>;
    fn minus(&self, o: &Self) -> Option<Self>;
}

impl Scalar for Rational {
    fn plus(&self, o: &Self) -> Option<Self> {
        Some(self + o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        Some(self - o)
    }
}

impl Scalar for i128 {
    fn plus(&self, o: &Self) -> Option<Self> {
        self.checked_add(*o)
    }
    fn minus(&self, o: &Self) -> Option<Self> {
        self.checked_sub(*o)
    }
}

/// Clears denominators (costs by one common multiple, marginals by another)
/// and solves in `i128`. Positive scaling preserves every comparison the
/// pivot rules make, so the basis sequence matches the rational run.
fn scaled_integer_solve(cost: &RMatrix, r: &[Rational], c: &[Rational]) -> Option<TransportSolution> {
    let (m, n) = (cost.rows(), cost.cols());
    let cost_entries: Vec<Rational> = (0..m * n).map(|cell| cost.get(cell / n, cell % n).clone()).collect();
    let dc = common_denominator(&cost_entries)?;
    let dq = common_denominator(r.iter().chain(c))?;
    let scale = |x: &Rational, d: i128| -> Option<i128> {
        let d = num_bigint::BigInt::from(d);
        i128::try_from(x.numer() * (d / x.denom())).ok()
    };
    let costs: Vec<i128> = cost_entries.iter().map(|x| scale(x, dc)).collect::<Option<_>>()?;
    let rs: Vec<i128> = r.iter().map(|x| scale(x, dq)).collect::<Option<_>>()?;
    let cs: Vec<i128> = c.iter().map(|x| scale(x, dq)).collect::<Option<_>>()?;
    let (x, u, v) = simplex(&costs, &rs, &cs, m, n)?;
    let mut value = 0i128;
    for cell in 0..m * n {
        value = value.checked_add(costs[cell].checked_mul(x[cell])?)?;
    }
    let ratio = |num: i128, den: i128| Rational::new(num.into(), den.into());
    Some(TransportSolution {
        value: ratio(value, dc.checked_mul(dq)?),
        plan: RMatrix::from_fn(m, n, |a, b| ratio(x[a * n + b], dq)),
        row_potentials: u.into_iter().map(|p| ratio(p, dc)).collect(),
        col_potentials: v.into_iter().map(|p| ratio(p, dc)).collect(),
    })
}

/// Least common multiple of the denominators, if it fits comfortably in `i64`.
fn common_denominator<'a>(xs: impl IntoIterator<Item = &'a Rational>) -> Option<i128> {
    let mut d = num_bigint::BigInt::from(1);
    for x in xs {
        d = num_integer::Integer::lcm(&d, x.denom());
    }
    i64::try_from(d).ok().map(i128::from)
}

type SimplexOutput<T> = (Vec<T>, Vec<T>, Vec<T>);

fn simplex<T: Scalar>(costs: &[T], r: &[T], c: &[T], m: usize, n: usize) -> Option<SimplexOutput<T>> {
    // Northwest corner: a staircase of m + n − 1 basic cells.
    let mut x = vec![T::zero(); m * n];
    let mut basic = vec![false; m * n];
    let (mut rr, mut cc) = (r.to_vec(), c.to_vec());
    let (mut i, mut j) = (0, 0);
    while i < m && j < n {
        let t = if rr[i] < cc[j] { rr[i].clone() } else { cc[j].clone() };
        rr[i] = rr[i].minus(&t)?;
        cc[j] = cc[j].minus(&t)?;
        x[i * n + j] = t;
        basic[i * n + j] = true;
        if rr[i].is_zero() && i + 1 < m {
            i += 1;
        } else {
            j += 1;
        }
    }

    loop {
        let (u, v) = potentials(costs, &basic, m, n)?;
        let mut entering = None;
        for cell in (0..m * n).filter(|&cell| !basic[cell]) {
            let (a, b) = (cell / n, cell % n);
            if costs[cell].minus(&u[a])?.minus(&v[b])? > T::zero() {
                entering = Some(cell);
                break;
            }
        }
        let Some(cell) = entering else {
            return Some((x, u, v));
        };
        let path = tree_path(&basic, m, n, cell / n, cell % n);
        // Cells at even positions of the path lose mass.
        let theta = path.iter().step_by(2).map(|&c| &x[c]).min().expect("cycle has a minus cell").clone();
        let leaving = *path.iter().step_by(2).filter(|&&c| x[c] == theta).min().expect("some cell attains theta");
        for (pos, &c) in path.iter().enumerate() {
            x[c] = if pos % 2 == 0 { x[c].minus(&theta)? } else { x[c].plus(&theta)? };
        }
        x[cell] = theta;
        basic[cell] = true;
        basic[leaving] = false;
    }
}

/// Potentials with `u_0 = 0` and `u_i + v_j = C_ij` on basic cells.
fn potentials<T: Scalar>(costs: &[T], basic: &[bool], m: usize, n: usize) -> Option<(Vec<T>, Vec<T>)> {
    let mut u: Vec<Option<T>> = vec![None; m];
    let mut v: Vec<Option<T>> = vec![None; n];
    u[0] = Some(T::zero());
    let mut stack = vec![(true, 0usize)];
    while let Some((is_row, idx)) = stack.pop() {
        if is_row {
            let ui = u[idx].clone().expect("set before push");
            for j in 0..n {
                if basic[idx * n + j] && v[j].is_none() {
                    v[j] = Some(costs[idx * n + j].minus(&ui)?);
                    stack.push((false, j));
                }
            }
        } else {
            let vj = v[idx].clone().expect("set before push");
            for i in 0..m {
                if basic[i * n + idx] && u[i].is_none() {
                    u[i] = Some(costs[i * n + idx].minus(&vj)?);
                    stack.push((true, i));
                }
            }
        }
    }
    Some((
        u.into_iter().map(|x| x.expect("basis spans all rows")).collect(),
        v.into_iter().map(|x| x.expect("basis spans all columns")).collect(),
    ))
}

/// Basic cells on the tree path from row `i0` to column `j0`, starting with
/// the cell in row `i0`.
fn tree_path(basic: &[bool], m: usize, n: usize, i0: usize, j0: usize) -> Vec<usize> {
    // Nodes: rows 0..m, columns m..m+n. BFS from row i0 recording parent cells.
    let nodes = m + n;
    let mut parent: Vec<Option<(usize, usize)>> = vec![None; nodes];
    let mut seen = vec![false; nodes];
    seen[i0] = true;
    let mut queue = std::collections::VecDeque::from([i0]);
    while let Some(node) = queue.pop_front() {
        if node == m + j0 {
            break;
        }
        if node < m {
            for j in 0..n {
                if basic[node * n + j] && !seen[m + j] {
                    seen[m + j] = true;
                    parent[m + j] = Some((node, node * n + j));
                    queue.push_back(m + j);
                }
            }
        } else {
            let j = node - m;
            for i in 0..m {
                if basic[i * n + j] && !seen[i] {
                    seen[i] = true;
                    parent[i] = Some((node, i * n + j));
                    queue.push_back(i);
                }
            }
        }
    }
    let mut path = Vec::new();
    let mut node = m + j0;
    while node != i0 {
        let (prev, cell) = parent[node].expect("basis is a spanning tree");
        path.push(cell);
        node = prev;
    }
    path.reverse();
    path
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_traits::One;
    use crate::arith::{int, rat};

    #[test]
    fn cyclic_plan_for_zero_one() {
        let l = LossMatrix::zero_one(3).unwrap();
        let q = SimplexPoint::barycenter(3);
        let sol = max_transport(&l.to_matrix(), q.as_slice(), q.as_slice()).unwrap();
        assert_eq!(sol.value, int(1));
        let plan = TransportPlan::new(sol.plan).unwrap();
        assert!(plan.is_in_transport_polytope(&q));
        assert_eq!(plan.value(&l), int(1));
    }

    #[test]
    fn potentials_certify_optimality() {
        let cost = RMatrix::from_rows(vec![vec![int(3), int(1), int(4)], vec![int(1), int(5), int(9)], vec![int(2), int(6), int(5)]]).unwrap();
        let r = vec![rat(1, 2), rat(1, 4), rat(1, 4)];
        let c = vec![rat(1, 3), rat(1, 3), rat(1, 3)];
        let sol = max_transport(&cost, &r, &c).unwrap();
        let dual: Rational = r.iter().zip(&sol.row_potentials).map(|(a, b)| a * b).sum::<Rational>()
            + c.iter().zip(&sol.col_potentials).map(|(a, b)| a * b).sum::<Rational>();
        assert_eq!(dual, sol.value);
        for i in 0..3 {
            for j in 0..3 {
                assert!(&sol.row_potentials[i] + &sol.col_potentials[j] >= *cost.get(i, j));
            }
        }
    }

    #[test]
    fn degenerate_marginals() {
        let l = LossMatrix::from_ints(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]).unwrap();
        let q = SimplexPoint::new(vec![rat(1, 2), int(0), rat(1, 2)]).unwrap();
        let sol = max_transport(&l.to_matrix(), q.as_slice(), q.as_slice()).unwrap();
        assert_eq!(sol.value, int(2));
        let e = SimplexPoint::vertex(3, 1);
        assert_eq!(max_transport(&l.to_matrix(), e.as_slice(), e.as_slice()).unwrap().value, int(0));
    }

    #[test]
    fn integer_path_matches_rational_path() {
        let cost = RMatrix::from_rows(vec![vec![int(0), rat(1, 3), rat(5, 2)], vec![rat(1, 3), int(0), int(1)], vec![rat(5, 2), int(1), int(0)]]).unwrap();
        let r = vec![rat(1, 7), rat(2, 7), rat(4, 7)];
        let c = vec![rat(3, 7), rat(3, 7), rat(1, 7)];
        let fast = scaled_integer_solve(&cost, &r, &c).unwrap();
        let costs: Vec<Rational> = (0..9).map(|cell| cost.get(cell / 3, cell % 3).clone()).collect();
        let (x, u, v) = simplex(&costs, &r, &c, 3, 3).unwrap();
        assert_eq!(fast.plan, RMatrix::from_fn(3, 3, |a, b| x[a * 3 + b].clone()));
        assert_eq!(fast.row_potentials, u);
        assert_eq!(fast.col_potentials, v);
    }

    #[test]
    fn huge_denominators_fall_back() {
        let big = Rational::new(1.into(), num_bigint::BigInt::from(10).pow(30));
        let r = vec![big.clone(), Rational::one() - &big];
        assert!(scaled_integer_solve(&RMatrix::identity(2), &r, &r).is_none());
        let sol = max_transport(&RMatrix::identity(2), &r, &r).unwrap();
        assert_eq!(sol.value, int(1));
    }

    #[test]
    fn rejects_unbalanced_marginals() {
        let cost = RMatrix::zeros(2, 2);
        assert!(max_transport(&cost, &[int(1), int(0)], &[int(1), int(1)]).is_err());
    }
}
