use crate::arith::{format_vector, solve_lp, sum, RVector, Rational};
use crate::loss::LossMatrix;
use crate::polytope::{prediction_set, HPolytope, Relation};
use crate::{Error, Result};
use num_bigint::BigInt;
use num_traits::{Signed, Zero};
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OutputMinimum {
    #[serde(serialize_with = "crate::one_based::one")]
    pub y: usize,
    #[serde(with = "crate::arith::serde_rational")]
    pub min: Rational,
    /// A minimizer: the barycenter of the minimizing face when its vertices
    /// are enumerable, otherwise the LP optimum.
    #[serde(with = "crate::arith::serde_rational::vec")]
    pub witness: RVector,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RmSimpleResult {
    pub holds: bool,
    pub minima: Vec<OutputMinimum>,
}

/// For each `y`, `min q_y` over `Δ(y)`; the condition holds when every
/// minimum is positive.
pub fn check_rm_simple_sufficient(loss: &LossMatrix, cap: usize) -> Result<RmSimpleResult> {
    let k = loss.k();
    let mut minima = Vec::with_capacity(k);
    for y in 0..k {
        let set = prediction_set(loss, y)?;
        let mut objective = vec![Rational::zero(); k];
        objective[y] = -Rational::from_integer(1.into());
        let sol = solve_lp(&set.hrep().to_lp(objective)?)?;
        let min = -sol.optimum.ok_or_else(|| Error::Structural(format!("prediction set {} is empty", y + 1)))?;
        let mut unit = vec![Rational::zero(); k];
        unit[y] = Rational::from_integer(1.into());
        let face = with_row(set.hrep(), unit, Relation::Eq, min.clone())?;
        let witness = match face.enumerate_vertices(cap) {
            Ok(v) if !v.is_empty() => barycenter(v.as_slice()),
            _ => sol.point,
        };
        minima.push(OutputMinimum { y, min, witness });
    }
    Ok(RmSimpleResult { holds: minima.iter().all(|m| m.min.is_positive()), minima })
}

fn with_row(p: &HPolytope, coeffs: RVector, rel: Relation, rhs: Rational) -> Result<HPolytope> {
    let mut rows: Vec<(RVector, Relation, Rational)> =
        (0..p.num_rows()).map(|i| (p.matrix().row(i).to_vec(), p.relations()[i], p.rhs()[i].clone())).collect();
    rows.push((coeffs, rel, rhs));
    HPolytope::from_rows(p.dim(), rows)
}

fn barycenter(points: &[RVector]) -> RVector {
    let n = Rational::from_integer(BigInt::from(points.len()));
    (0..points[0].len())
        .map(|j| sum(&points.iter().map(|p| p[j].clone()).collect::<Vec<_>>()) / &n)
        .collect()
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct A1Violation {
    /// The vertex, of prediction set `of_set`, at which the disjunction fails.
    #[serde(with = "crate::arith::serde_rational::vec")]
    pub vertex: RVector,
    #[serde(serialize_with = "crate::one_based::one")]
    pub of_set: usize,
    /// The output `y` with `vertex ∉ Δ(y)` and `vertex_y > 0`.
    #[serde(serialize_with = "crate::one_based::one")]
    pub output: usize,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct A1Result {
    pub holds: bool,
    pub vertices_checked: usize,
    pub violation: Option<A1Violation>,
}

/// Every vertex `q` of every prediction set must satisfy, for every output
/// `y`, `q ∈ Δ(y)` or `q_y = 0`.
pub fn check_assumption_a1(loss: &LossMatrix, cap: usize) -> Result<A1Result> {
    let k = loss.k();
    let sets: Vec<_> = (0..k).map(|y| prediction_set(loss, y)).collect::<Result<_>>()?;
    let mut checked = 0;
    for (of_set, set) in sets.iter().enumerate() {
        for q in set.vertices(cap)?.iter() {
            checked += 1;
            if let Some(output) = (0..k).find(|&y| !q[y].is_zero() && !sets[y].contains(q)) {
                return Ok(A1Result {
                    holds: false,
                    vertices_checked: checked,
                    violation: Some(A1Violation { vertex: q.clone(), of_set, output }),
                });
            }
        }
    }
    Ok(A1Result { holds: true, vertices_checked: checked, violation: None })
}

impl std::fmt::Display for A1Violation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "vertex {} of the prediction set of {} is outside the prediction set of {} with positive mass there",
            format_vector(&self.vertex),
            self.of_set + 1,
            self.output + 1
        )
    }
}
