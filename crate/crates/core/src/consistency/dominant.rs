use super::distance::is_distance;
use crate::arith::{dot, half, int, Rational};
use crate::loss::{bayes_predictor, LossMatrix, SimplexPoint};
use crate::risk::bayes_risk_m_dual;
use crate::transport::TransportPlan;
use crate::{Error, Result};
use num_traits::One;
use serde::Serialize;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominantLabelCheck {
    /// The least output with `q_y >= 1/2`.
    #[serde(serialize_with = "crate::one_based::one")]
    pub label: usize,
    pub plan: TransportPlan,
    pub plan_in_transport_polytope: bool,
    #[serde(with = "crate::arith::serde_rational")]
    pub plan_value: Rational,
    /// `2 L_y·q`.
    #[serde(with = "crate::arith::serde_rational")]
    pub twice_task_risk: Rational,
    /// `H_M(q)` from the dual LP.
    #[serde(with = "crate::arith::serde_rational")]
    pub dual_value: Rational,
    /// `a = 2 L_y` satisfies every dual constraint.
    pub scaled_row_dual_feasible: bool,
    pub label_is_bayes_optimal: bool,
    pub verified: bool,
}

/// The plan with row and column `y` equal to `q` off the diagonal,
/// `Q_yy = 2 q_y − 1`, and zeros elsewhere.
pub fn dominant_label_plan(q: &SimplexPoint, y: usize) -> TransportPlan {
    let k = q.len();
    let mut plan = TransportPlan::zeros(k);
    for j in (0..k).filter(|&j| j != y) {
        plan.set(y, j, q[j].clone());
        plan.set(j, y, q[j].clone());
    }
    plan.set(y, y, int(2) * &q[y] - Rational::one());
    plan
}

/// Builds the dominant-label witness plan and checks that it attains
/// `2 H_L(q)`, that the dual LP bounds `H_M(q)` by the same value, and that
/// the dominant label is Bayes-optimal.
pub fn check_dominant_label_identity(loss: &LossMatrix, q: &SimplexPoint) -> Result<DominantLabelCheck> {
    loss.check_dim(q.len(), "q")?;
    if !is_distance(loss).is_distance {
        return Err(Error::precondition("dominant-label identity needs a distance loss; this loss is not a distance"));
    }
    let Some(y) = (0..q.len()).find(|&y| q[y] >= half()) else {
        return Err(Error::precondition("no dominant label: every q_y is below 1/2"));
    };
    let plan = dominant_label_plan(q, y);
    let in_polytope = plan.is_in_transport_polytope(q);
    let plan_value = plan.value(loss);
    let twice = int(2) * dot(loss.row(y), q.as_slice());
    let dual_value = bayes_risk_m_dual(loss, q)?.value;
    let a: Vec<Rational> = loss.row(y).iter().map(|x| int(2) * x).collect();
    let k = loss.k();
    let row_dual = (0..k).all(|i| (0..k).all(|j| (&a[i] + &a[j]) * half() >= *loss.get(i, j)));
    let optimal = bayes_predictor(loss, q)?.contains(&y);
    let verified = in_polytope && plan_value == twice && dual_value <= twice && dual_value == plan_value && row_dual && optimal;
    Ok(DominantLabelCheck {
        label: y,
        plan,
        plan_in_transport_polytope: in_polytope,
        plan_value,
        twice_task_risk: twice,
        dual_value,
        scaled_row_dual_feasible: row_dual,
        label_is_bayes_optimal: optimal,
        verified,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn chain_example() {
        let chain = LossMatrix::absolute_deviation(&[int(0), int(1), int(2)]).unwrap();
        let q = SimplexPoint::new(vec![rat(1, 2), rat(1, 4), rat(1, 4)]).unwrap();
        let c = check_dominant_label_identity(&chain, &q).unwrap();
        assert!(c.verified);
        assert_eq!(c.dual_value, rat(3, 2));
        assert_eq!(c.twice_task_risk, rat(3, 2));
    }

    #[test]
    fn point_mass_and_binary() {
        let l = LossMatrix::zero_one(4).unwrap();
        let c = check_dominant_label_identity(&l, &SimplexPoint::vertex(4, 2)).unwrap();
        assert!(c.verified && c.plan_value == int(0));
        let b = LossMatrix::zero_one(2).unwrap();
        let c = check_dominant_label_identity(&b, &SimplexPoint::barycenter(2)).unwrap();
        assert!(c.verified && c.dual_value == int(1));
    }

    #[test]
    fn preconditions_are_distinct() {
        let sq = LossMatrix::from_ints(&[&[0, 1, 4], &[1, 0, 1], &[4, 1, 0]]).unwrap();
        let e1 = check_dominant_label_identity(&sq, &SimplexPoint::vertex(3, 0)).unwrap_err().to_string();
        let e2 = check_dominant_label_identity(&LossMatrix::zero_one(3).unwrap(), &SimplexPoint::barycenter(3))
            .unwrap_err()
            .to_string();
        assert!(e1.contains("not a distance"));
        assert!(e2.contains("no dominant label"));
    }
}
