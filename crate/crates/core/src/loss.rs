//! Task losses, points of the probability simplex, the three margin
//! surrogates and argmax decoding.
//!
//! Outputs are indexed from 0 in code; reports print them 1-based.

use crate::arith::{dot, format_rational, int, solve_lp, sum, LinearProgram, RMatrix, RVector, Rational, RowKind, VarKind};
use crate::polytope::prediction_set;
use crate::{Error, Result};
use num_traits::{One, Signed, Zero};

/// A k×k task loss with zero diagonal and strictly positive off-diagonal
/// entries.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct LossMatrix {
    entries: Vec<Vec<Rational>>,
}

impl LossMatrix {
    pub fn new(entries: Vec<Vec<Rational>>) -> Result<Self> {
        let k = entries.len();
        if k < 2 {
            return Err(Error::Validation(format!("a loss needs at least two outputs, got {k}")));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != k {
                return Err(Error::dim(format!("row {} has {} entries, expected {k}", i + 1, row.len())));
            }
            for (j, x) in row.iter().enumerate() {
                if x.is_negative() {
                    return Err(Error::Validation(format!(
                        "negative entry {} at ({}, {})",
                        format_rational(x),
                        i + 1,
                        j + 1
                    )));
                }
                if i == j && !x.is_zero() {
                    return Err(Error::Validation(format!(
                        "nonzero diagonal entry {} at ({}, {})",
                        format_rational(x),
                        i + 1,
                        j + 1
                    )));
                }
                if i != j && x.is_zero() {
                    return Err(Error::Validation(format!("zero off-diagonal entry at ({}, {})", i + 1, j + 1)));
                }
            }
        }
        Ok(LossMatrix { entries })
    }

    pub fn from_fn(k: usize, mut f: impl FnMut(usize, usize) -> Rational) -> Result<Self> {
        Self::new((0..k).map(|i| (0..k).map(|j| f(i, j)).collect()).collect())
    }

    /// Convenience constructor from small integer entries.
    pub fn from_ints(rows: &[&[i64]]) -> Result<Self> {
        Self::new(rows.iter().map(|r| r.iter().map(|&x| int(x)).collect()).collect())
    }

    /// `L(y, y') = 1` for `y != y'`.
    pub fn zero_one(k: usize) -> Result<Self> {
        Self::from_fn(k, |i, j| if i == j { Rational::zero() } else { Rational::one() })
    }

    /// `L(y, y') = |γ_y − γ_y'|` for distinct positions `γ`.
    pub fn absolute_deviation(gamma: &[Rational]) -> Result<Self> {
        Self::from_fn(gamma.len(), |i, j| (&gamma[i] - &gamma[j]).abs())
    }

    pub fn k(&self) -> usize {
        self.entries.len()
    }

    pub fn get(&self, y: usize, z: usize) -> &Rational {
        &self.entries[y][z]
    }

    /// Row `L_y`, the losses incurred by predicting `y`.
    pub fn row(&self, y: usize) -> &[Rational] {
        &self.entries[y]
    }

    pub fn rows(&self) -> &[Vec<Rational>] {
        &self.entries
    }

    pub fn to_matrix(&self) -> RMatrix {
        RMatrix::from_fn(self.k(), self.k(), |i, j| self.entries[i][j].clone())
    }

    pub fn is_symmetric(&self) -> bool {
        let k = self.k();
        (0..k).all(|i| (i + 1..k).all(|j| self.entries[i][j] == self.entries[j][i]))
    }

    /// First asymmetric pair `(y, z)` with `y < z`, if any.
    pub fn asymmetric_pair(&self) -> Option<(usize, usize)> {
        let k = self.k();
        (0..k).flat_map(|i| (i + 1..k).map(move |j| (i, j))).find(|&(i, j)| self.entries[i][j] != self.entries[j][i])
    }

    pub(crate) fn require_symmetric(&self) -> Result<()> {
        match self.asymmetric_pair() {
            None => Ok(()),
            Some((i, j)) => Err(Error::precondition(format!(
                "loss is not symmetric: L({}, {}) = {} but L({}, {}) = {}",
                i + 1,
                j + 1,
                format_rational(&self.entries[i][j]),
                j + 1,
                i + 1,
                format_rational(&self.entries[j][i])
            ))),
        }
    }

    /// `L_y · q`, the expected loss of predicting `y`.
    pub fn expected_loss(&self, y: usize, q: &SimplexPoint) -> Rational {
        dot(&self.entries[y], q.as_slice())
    }

    pub(crate) fn check_dim(&self, len: usize, what: &str) -> Result<()> {
        if len == self.k() {
            Ok(())
        } else {
            Err(Error::dim(format!("{what} has length {len}, loss has k = {}", self.k())))
        }
    }

    pub(crate) fn check_output(&self, y: usize) -> Result<()> {
        if y < self.k() {
            Ok(())
        } else {
            Err(Error::dim(format!("output {} out of range 1..={}", y + 1, self.k())))
        }
    }
}

/// A probability vector: nonnegative entries summing to exactly one.
#[derive(Clone, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct SimplexPoint(RVector);

impl SimplexPoint {
    pub fn new(q: RVector) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Validation("probability vector is empty".into()));
        }
        if let Some(i) = q.iter().position(|x| x.is_negative()) {
            return Err(Error::Validation(format!(
                "q_{} = {} violates q >= 0",
                i + 1,
                format_rational(&q[i])
            )));
        }
        let total = sum(&q);
        if !total.is_one() {
            return Err(Error::Validation(format!("entries sum to {}, not 1", format_rational(&total))));
        }
        Ok(SimplexPoint(q))
    }

    /// The point mass `e_y`.
    pub fn vertex(k: usize, y: usize) -> Self {
        let mut q = vec![Rational::zero(); k];
        q[y] = Rational::one();
        SimplexPoint(q)
    }

    pub fn barycenter(k: usize) -> Self {
        SimplexPoint(vec![Rational::new(1.into(), (k as i64).into()); k])
    }

    /// `½(e_y + e_z)`; equals `e_y` when `y == z`.
    pub fn pair_midpoint(k: usize, y: usize, z: usize) -> Self {
        let mut q = vec![Rational::zero(); k];
        q[y] += crate::arith::half();
        q[z] += crate::arith::half();
        SimplexPoint(q)
    }

    /// `m / N` for nonnegative integers `m` summing to `N > 0`.
    pub fn from_counts(counts: &[u64]) -> Result<Self> {
        let n: u64 = counts.iter().sum();
        if n == 0 {
            return Err(Error::Validation("counts sum to zero".into()));
        }
        let d = num_bigint::BigInt::from(n);
        Self::new(counts.iter().map(|&m| Rational::new(m.into(), d.clone())).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[Rational] {
        &self.0
    }

    pub fn into_inner(self) -> RVector {
        self.0
    }

    pub fn max_entry(&self) -> &Rational {
        self.0.iter().max().expect("nonempty")
    }
}

impl std::ops::Index<usize> for SimplexPoint {
    type Output = Rational;
    fn index(&self, i: usize) -> &Rational {
        &self.0[i]
    }
}

/// All points `m / N` of the simplex in `k` coordinates, in lexicographic
/// order of `m` (descending first coordinate).
pub fn simplex_grid(k: usize, n: u64) -> Vec<SimplexPoint> {
    fn rec(k: usize, left: u64, prefix: &mut Vec<u64>, out: &mut Vec<Vec<u64>>) {
        if prefix.len() + 1 == k {
            prefix.push(left);
            out.push(prefix.clone());
            prefix.pop();
            return;
        }
        for m in (0..=left).rev() {
            prefix.push(m);
            rec(k, left - m, prefix, out);
            prefix.pop();
        }
    }
    let mut counts = Vec::new();
    if k == 0 || n == 0 {
        return Vec::new();
    }
    rec(k, n, &mut Vec::with_capacity(k), &mut counts);
    counts.iter().map(|m| SimplexPoint::from_counts(m).expect("grid point")).collect()
}

/// The Bayes-optimal outputs `argmin_y L_y·q`, ascending. Never empty.
pub fn bayes_predictor(loss: &LossMatrix, q: &SimplexPoint) -> Result<Vec<usize>> {
    loss.check_dim(q.len(), "q")?;
    let risks: Vec<Rational> = (0..loss.k()).map(|y| loss.expected_loss(y, q)).collect();
    let best = risks.iter().min().expect("k >= 2");
    Ok((0..loss.k()).filter(|&y| &risks[y] == best).collect())
}

/// `max_{y'} L(y,y') + v_{y'} − v_y`.
pub fn eval_max_margin(loss: &LossMatrix, v: &[Rational], y: usize) -> Result<Rational> {
    loss.check_dim(v.len(), "score vector")?;
    loss.check_output(y)?;
    let best = (0..loss.k()).map(|z| loss.get(y, z) + &v[z]).max().expect("k >= 2");
    Ok(best - &v[y])
}

/// `max_{q ∈ Δ(y)} (L_y + v)·q − v_y`, solved as an LP over the prediction set.
pub fn eval_restricted_max_margin(loss: &LossMatrix, v: &[Rational], y: usize) -> Result<Rational> {
    loss.check_dim(v.len(), "score vector")?;
    loss.check_output(y)?;
    let objective: RVector = loss.row(y).iter().zip(v).map(|(l, s)| l + s).collect();
    let set = prediction_set(loss, y)?;
    let sol = solve_lp(&set.hrep().to_lp(objective)?)?;
    let opt = sol
        .optimum
        .ok_or_else(|| Error::Structural(format!("prediction set of output {} yielded {:?}", y + 1, sol.status)))?;
    Ok(opt - &v[y])
}

/// `(−H_L)*(v) = max { u + v·q : u <= L_z·q for all z, q ∈ Δ }`, together
/// with the maximizing `q`.
pub fn neg_bayes_risk_l_conjugate(loss: &LossMatrix, v: &[Rational]) -> Result<(Rational, RVector)> {
    loss.check_dim(v.len(), "score vector")?;
    let k = loss.k();
    let mut objective = v.to_vec();
    objective.push(Rational::one());
    let mut lp = LinearProgram::new(objective, VarKind::NonNegative);
    lp.vars[k] = VarKind::Free;
    let mut rows = Vec::with_capacity(k + 1);
    for z in 0..k {
        let mut coeffs = loss.row(z).to_vec();
        coeffs.push(-Rational::one());
        rows.push((coeffs, RowKind::Ge, Rational::zero()));
    }
    let mut simplex = vec![Rational::one(); k];
    simplex.push(Rational::zero());
    rows.push((simplex, RowKind::Eq, Rational::one()));
    let lp = lp.with_rows(rows)?;
    let sol = solve_lp(&lp)?;
    let opt = sol.optimum.ok_or_else(|| Error::Structural(format!("conjugate LP ended {:?}", sol.status)))?;
    let mut q = sol.point;
    q.truncate(k);
    Ok((opt, q))
}

/// `(−H_L)*(v) − v_y`.
pub fn eval_max_min_margin(loss: &LossMatrix, v: &[Rational], y: usize) -> Result<Rational> {
    loss.check_output(y)?;
    let (conj, _) = neg_bayes_risk_l_conjugate(loss, v)?;
    Ok(conj - &v[y])
}

/// Least-index maximizer of `v`.
pub fn argmax_decode(v: &[Rational]) -> usize {
    let mut best = 0;
    for (i, x) in v.iter().enumerate().skip(1) {
        if x > &v[best] {
            best = i;
        }
    }
    best
}

/// The three margin surrogates.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Surrogate {
    MaxMargin,
    RestrictedMaxMargin,
    MaxMinMargin,
}

impl Surrogate {
    pub fn eval(self, loss: &LossMatrix, v: &[Rational], y: usize) -> Result<Rational> {
        match self {
            Surrogate::MaxMargin => eval_max_margin(loss, v, y),
            Surrogate::RestrictedMaxMargin => eval_restricted_max_margin(loss, v, y),
            Surrogate::MaxMinMargin => eval_max_min_margin(loss, v, y),
        }
    }

    /// Conditional surrogate risk `Σ_y q_y S(v, y)`.
    pub fn expected(self, loss: &LossMatrix, v: &[Rational], q: &SimplexPoint) -> Result<Rational> {
        loss.check_dim(q.len(), "q")?;
        let mut total = Rational::zero();
        for y in 0..loss.k() {
            if !q[y].is_zero() {
                total += &q[y] * self.eval(loss, v, y)?;
            }
        }
        Ok(total)
    }
}

/// The embedding `ψ(y) = −L_y`.
pub fn embed(loss: &LossMatrix, y: usize) -> RVector {
    loss.row(y).iter().map(|x| -x.clone()).collect()
}
