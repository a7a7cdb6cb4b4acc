//! Bayes risks of the task loss and of the three margin surrogates, the dual
//! and conjugate forms of the max-margin risk, and Fenchel-Young spot checks.

use crate::arith::{dot, format_rational, half, int, solve_lp, LinearProgram, RMatrix, RVector, Rational, RowKind, VarKind};
use crate::loss::{bayes_predictor, embed, LossMatrix, SimplexPoint, Surrogate};
use crate::transport::{max_transport, TransportPlan};
use crate::{Error, Result};
use num_traits::{One, Zero};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::ser::SerializeMap;
use serde::{Serialize, Serializer};

/// Evidence attached to a risk value.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Witness {
    Output(usize),
    Plan(TransportPlan),
    Dual(RVector),
}

impl Serialize for Witness {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut map = s.serialize_map(Some(1))?;
        match self {
            Witness::Output(y) => map.serialize_entry("output", &(y + 1))?,
            Witness::Plan(p) => map.serialize_entry("plan", p)?,
            Witness::Dual(a) => map.serialize_entry("dual", &a.iter().map(format_rational).collect::<Vec<_>>())?,
        }
        map.end()
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct RiskValue {
    #[serde(with = "crate::arith::serde_rational")]
    pub value: Rational,
    pub witness: Witness,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum RiskKind {
    /// `H_L`
    Task,
    /// `H_M` via the transportation simplex
    MaxMargin,
    /// `H_M` through its dual LP (symmetric losses)
    MaxMarginDual,
    /// `H_RM`
    RestrictedMaxMargin,
    /// `H_MM`
    MaxMinMargin,
}

impl RiskValue {
    /// Re-substitutes the witness: it must be feasible for the problem behind
    /// `kind` and achieve `value`.
    pub fn verify(&self, kind: RiskKind, loss: &LossMatrix, q: &SimplexPoint) -> bool {
        match (&self.witness, kind) {
            (Witness::Output(y), RiskKind::Task | RiskKind::MaxMinMargin) => {
                *y < loss.k() && loss.expected_loss(*y, q) == self.value
            }
            (Witness::Plan(p), RiskKind::MaxMargin) => p.is_in_transport_polytope(q) && p.value(loss) == self.value,
            (Witness::Plan(p), RiskKind::RestrictedMaxMargin) => {
                p.is_in_transport_polytope(q) && p.is_in_restriction_cone(loss) && p.value(loss) == self.value
            }
            (Witness::Dual(a), RiskKind::MaxMarginDual) => dual_feasible(loss, a) && dot(a, q.as_slice()) == self.value,
            _ => false,
        }
    }
}

fn dual_feasible(loss: &LossMatrix, a: &[Rational]) -> bool {
    let k = loss.k();
    a.len() == k && (0..k).all(|i| (0..k).all(|j| (&a[i] + &a[j]) * half() >= *loss.get(i, j)))
}

pub fn bayes_risk(kind: RiskKind, loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    match kind {
        RiskKind::Task => bayes_risk_l(loss, q),
        RiskKind::MaxMargin => bayes_risk_m(loss, q),
        RiskKind::MaxMarginDual => bayes_risk_m_dual(loss, q),
        RiskKind::RestrictedMaxMargin => bayes_risk_rm(loss, q),
        RiskKind::MaxMinMargin => bayes_risk_mm(loss, q),
    }
}

/// `H_L(q) = min_y L_y·q`, witnessed by the least minimizing output.
pub fn bayes_risk_l(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    let y = bayes_predictor(loss, q)?[0];
    Ok(RiskValue { value: loss.expected_loss(y, q), witness: Witness::Output(y) })
}

/// `H_M(q) = max ⟨L, Q⟩` over `U(q, q)`.
pub fn bayes_risk_m(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    loss.check_dim(q.len(), "q")?;
    let sol = max_transport(&loss.to_matrix(), q.as_slice(), q.as_slice())?;
    Ok(RiskValue { value: sol.value, witness: Witness::Plan(TransportPlan::new(sol.plan)?) })
}

/// `H_M(q)` from the general simplex on the k²-variable transport LP.
pub fn bayes_risk_m_lp(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    transport_lp(loss, q, false)
}

/// `H_RM(q) = max ⟨L, Q⟩` over `U(q, q) ∩ C_L`.
pub fn bayes_risk_rm(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    transport_lp(loss, q, true)
}

/// `H_MM(q) = H_L(q)`.
pub fn bayes_risk_mm(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    bayes_risk_l(loss, q)
}

/// Rows and columns of `Q` outside the support of `q` are forced to zero, so
/// only the support block carries variables.
fn transport_lp(loss: &LossMatrix, q: &SimplexPoint, restricted: bool) -> Result<RiskValue> {
    loss.check_dim(q.len(), "q")?;
    let k = loss.k();
    let support: Vec<usize> = (0..k).filter(|&i| !q[i].is_zero()).collect();
    let s = support.len();
    let var = |a: usize, b: usize| a * s + b;
    let objective: RVector = (0..s * s).map(|c| loss.get(support[c / s], support[c % s]).clone()).collect();
    let mut rows = Vec::new();
    for a in 0..s {
        let mut r = vec![Rational::zero(); s * s];
        for b in 0..s {
            r[var(a, b)] = Rational::one();
        }
        rows.push((r, RowKind::Eq, q[support[a]].clone()));
    }
    for b in 0..s {
        let mut r = vec![Rational::zero(); s * s];
        for a in 0..s {
            r[var(a, b)] = Rational::one();
        }
        rows.push((r, RowKind::Eq, q[support[b]].clone()));
    }
    if restricted {
        for a in 0..s {
            let y = support[a];
            for z in (0..k).filter(|&z| z != y) {
                let mut r = vec![Rational::zero(); s * s];
                for b in 0..s {
                    r[var(a, b)] = loss.get(y, support[b]) - loss.get(z, support[b]);
                }
                rows.push((r, RowKind::Le, Rational::zero()));
            }
        }
    }
    let lp = LinearProgram::new(objective, VarKind::NonNegative).with_rows(rows)?;
    let sol = solve_lp(&lp)?;
    let value = sol.optimum.ok_or_else(|| Error::Structural(format!("transport LP ended {:?}", sol.status)))?;
    let mut plan = TransportPlan::zeros(k);
    for a in 0..s {
        for b in 0..s {
            plan.set(support[a], support[b], sol.point[var(a, b)].clone());
        }
    }
    Ok(RiskValue { value, witness: Witness::Plan(plan) })
}

/// `min a·q` subject to `½(a_y + a_y') >= L(y, y')` for all pairs, including
/// `y = y'`. Requires a symmetric loss.
pub fn bayes_risk_m_dual(loss: &LossMatrix, q: &SimplexPoint) -> Result<RiskValue> {
    loss.require_symmetric()?;
    loss.check_dim(q.len(), "q")?;
    let k = loss.k();
    let objective: RVector = q.as_slice().iter().map(|x| -x.clone()).collect();
    let mut rows = Vec::new();
    for i in 0..k {
        for j in i..k {
            let mut r = vec![Rational::zero(); k];
            r[i] += half();
            r[j] += half();
            rows.push((r, RowKind::Ge, loss.get(i, j).clone()));
        }
    }
    let lp = LinearProgram::new(objective, VarKind::Free).with_rows(rows)?;
    let sol = solve_lp(&lp)?;
    let opt = sol.optimum.ok_or_else(|| Error::Structural(format!("dual LP ended {:?}", sol.status)))?;
    Ok(RiskValue { value: -opt, witness: Witness::Dual(sol.point) })
}

/// `(−H_M)*(v)` together with every maximizing unordered pair `(y, y')`,
/// `y <= y'`, in lexicographic order.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConjugateValue {
    #[serde(with = "crate::arith::serde_rational")]
    pub value: Rational,
    #[serde(serialize_with = "crate::one_based::pairs")]
    pub maximizers: Vec<(usize, usize)>,
}

/// `max_{y, y'} L(y, y') + (v_y + v_y')/2` over all pairs including the
/// diagonal.
pub fn conjugate_neg_hm(loss: &LossMatrix, v: &[Rational]) -> Result<ConjugateValue> {
    loss.require_symmetric()?;
    loss.check_dim(v.len(), "score vector")?;
    let k = loss.k();
    let mut best: Option<Rational> = None;
    let mut maximizers = Vec::new();
    for i in 0..k {
        for j in i..k {
            let val = loss.get(i, j) + (&v[i] + &v[j]) * half();
            match &best {
                Some(b) if val < *b => {}
                Some(b) if val == *b => maximizers.push((i, j)),
                _ => {
                    best = Some(val);
                    maximizers = vec![(i, j)];
                }
            }
        }
    }
    Ok(ConjugateValue { value: best.expect("k >= 2"), maximizers })
}

/// `max ⟨L + v 1ᵀ, Q⟩` over symmetric nonnegative `Q` with unit mass.
pub fn conjugate_neg_hm_lp(loss: &LossMatrix, v: &[Rational]) -> Result<Rational> {
    loss.require_symmetric()?;
    loss.check_dim(v.len(), "score vector")?;
    let k = loss.k();
    let objective: RVector = (0..k * k).map(|c| loss.get(c / k, c % k) + &v[c / k]).collect();
    let mut rows = vec![(vec![Rational::one(); k * k], RowKind::Eq, Rational::one())];
    for i in 0..k {
        for j in i + 1..k {
            let mut r = vec![Rational::zero(); k * k];
            r[i * k + j] = Rational::one();
            r[j * k + i] = -Rational::one();
            rows.push((r, RowKind::Eq, Rational::zero()));
        }
    }
    let lp = LinearProgram::new(objective, VarKind::NonNegative).with_rows(rows)?;
    let sol = solve_lp(&lp)?;
    sol.optimum.ok_or_else(|| Error::Structural(format!("conjugate LP ended {:?}", sol.status)))
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Subgradient {
    /// The unique maximizing pair and its point `½(e_y + e_y')`.
    Unique { pair: (usize, usize), point: SimplexPoint },
    /// Several maximizing pairs; the subdifferential is their hull.
    NonUnique { pairs: Vec<(usize, usize)> },
}

pub fn subgradient_point_neg_hm(loss: &LossMatrix, v: &[Rational]) -> Result<Subgradient> {
    let conj = conjugate_neg_hm(loss, v)?;
    Ok(match conj.maximizers.as_slice() {
        [(y, z)] => Subgradient::Unique { pair: (*y, *z), point: SimplexPoint::pair_midpoint(loss.k(), *y, *z) },
        pairs => Subgradient::NonUnique { pairs: pairs.to_vec() },
    })
}

/// Whether `−L_y` minimizes the max-min-margin conditional risk at `q`, i.e.
/// `Σ_z q_z S_MM(−L_y, z) = H_L(q)`. `y` must be Bayes-optimal at `q`.
pub fn verify_mm_minimizer(loss: &LossMatrix, q: &SimplexPoint, y: usize) -> Result<bool> {
    loss.check_output(y)?;
    let optimal = bayes_predictor(loss, q)?;
    if !optimal.contains(&y) {
        return Err(Error::precondition(format!("output {} is not Bayes-optimal at q", y + 1)));
    }
    let risk = Surrogate::MaxMinMargin.expected(loss, &embed(loss, y), q)?;
    Ok(risk == bayes_risk_l(loss, q)?.value)
}

/// Whether `v` attains the max-margin Bayes risk at `q`.
pub fn is_max_margin_minimizer(loss: &LossMatrix, q: &SimplexPoint, v: &[Rational]) -> Result<bool> {
    Ok(Surrogate::MaxMargin.expected(loss, v, q)? == bayes_risk_m(loss, q)?.value)
}

/// A random rational point of the simplex with denominator at most `max_den`.
/// About a third of the samples drop one or more coordinates to zero so that
/// faces are exercised.
pub fn random_simplex_point<R: Rng>(rng: &mut R, k: usize, max_den: u64) -> SimplexPoint {
    loop {
        let mut counts: Vec<u64> = (0..k).map(|_| rng.gen_range(0..=max_den)).collect();
        if rng.gen_range(0..3) == 0 {
            let drop = rng.gen_range(0..k);
            counts[drop] = 0;
        }
        if counts.iter().any(|&c| c > 0) {
            return SimplexPoint::from_counts(&counts).expect("positive total");
        }
    }
}

/// Outcome of sampling the conjugate inequality `(−H_M)*(v) >= v·q + H_M(q)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FenchelYoungCheck {
    pub samples: usize,
    pub inequality_holds: bool,
    /// Equality at `½(e_y + e_y')` when the maximizing pair is unique.
    pub equality_at_subgradient: Option<bool>,
}

pub const FENCHEL_YOUNG_SAMPLES: usize = 32;

pub fn fenchel_young_spot_check(loss: &LossMatrix, v: &[Rational], seed: u64) -> Result<FenchelYoungCheck> {
    let conj = conjugate_neg_hm(loss, v)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut holds = true;
    for _ in 0..FENCHEL_YOUNG_SAMPLES {
        let q = random_simplex_point(&mut rng, loss.k(), 12);
        let rhs = dot(v, q.as_slice()) + bayes_risk_m(loss, &q)?.value;
        holds &= conj.value >= rhs;
    }
    let equality = match subgradient_point_neg_hm(loss, v)? {
        Subgradient::Unique { point, .. } => Some(conj.value == dot(v, point.as_slice()) + bayes_risk_m(loss, &point)?.value),
        Subgradient::NonUnique { .. } => None,
    };
    Ok(FenchelYoungCheck { samples: FENCHEL_YOUNG_SAMPLES, inequality_holds: holds, equality_at_subgradient: equality })
}

/// Constant score vector, handy for examples.
pub fn constant_scores(k: usize, c: i64) -> RVector {
    vec![int(c); k]
}

/// Dense `RMatrix` view of a plan witness, if any.
pub fn witness_plan(r: &RiskValue) -> Option<&RMatrix> {
    match &r.witness {
        Witness::Plan(p) => Some(p.matrix()),
        _ => None,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    fn chain3() -> LossMatrix {
        LossMatrix::from_ints(&[&[0, 1, 2], &[1, 0, 1], &[2, 1, 0]]).unwrap()
    }

    fn pt(v: &[(i64, i64)]) -> SimplexPoint {
        SimplexPoint::new(v.iter().map(|&(n, d)| rat(n, d)).collect()).unwrap()
    }

    #[test]
    fn task_risk_examples() {
        let l = LossMatrix::zero_one(3).unwrap();
        let r = bayes_risk_l(&l, &SimplexPoint::vertex(3, 2)).unwrap();
        assert_eq!((r.value.clone(), r.witness.clone()), (int(0), Witness::Output(2)));
        assert_eq!(bayes_risk_l(&l, &SimplexPoint::barycenter(3)).unwrap().value, rat(2, 3));
        assert_eq!(bayes_risk_l(&chain3(), &pt(&[(1, 2), (0, 1), (1, 2)])).unwrap().value, int(1));
    }

    #[test]
    fn max_margin_risk_examples() {
        let l = LossMatrix::zero_one(3).unwrap();
        let e = SimplexPoint::vertex(3, 1);
        let r = bayes_risk_m(&l, &e).unwrap();
        assert_eq!(r.value, int(0));
        let mut expected = TransportPlan::zeros(3);
        expected.set(1, 1, int(1));
        assert_eq!(r.witness, Witness::Plan(expected));
        let bary = SimplexPoint::barycenter(3);
        assert_eq!(bayes_risk_m(&l, &bary).unwrap().value, int(1));
        assert_eq!(bayes_risk_m_lp(&l, &bary).unwrap().value, int(1));
        let q = pt(&[(1, 2), (0, 1), (1, 2)]);
        let r = bayes_risk_m(&chain3(), &q).unwrap();
        assert_eq!(r.value, int(2));
        assert!(r.verify(RiskKind::MaxMargin, &chain3(), &q));
    }

    #[test]
    fn dual_examples() {
        let l = LossMatrix::zero_one(3).unwrap();
        let r = bayes_risk_m_dual(&l, &SimplexPoint::vertex(3, 0)).unwrap();
        assert_eq!(r.value, int(0));
        assert!(r.verify(RiskKind::MaxMarginDual, &l, &SimplexPoint::vertex(3, 0)));
        let bary = SimplexPoint::barycenter(3);
        assert_eq!(bayes_risk_m_dual(&l, &bary).unwrap().value, int(1));
        let ones = Witness::Dual(vec![int(1); 3]);
        assert!(RiskValue { value: int(1), witness: ones }.verify(RiskKind::MaxMarginDual, &l, &bary));
        let asym = LossMatrix::from_ints(&[&[0, 1], &[2, 0]]).unwrap();
        assert!(matches!(bayes_risk_m_dual(&asym, &SimplexPoint::barycenter(2)), Err(Error::Precondition(_))));
    }

    #[test]
    fn conjugate_examples() {
        let l = LossMatrix::zero_one(3).unwrap();
        let c = conjugate_neg_hm(&l, &constant_scores(3, 0)).unwrap();
        assert_eq!(c.value, int(1));
        assert_eq!(c.maximizers, vec![(0, 1), (0, 2), (1, 2)]);
        assert_eq!(conjugate_neg_hm_lp(&l, &constant_scores(3, 0)).unwrap(), int(1));

        let tie = subgradient_point_neg_hm(&l, &[int(0), int(-10), int(-10)]).unwrap();
        // (1,1) gives 0, (1,2) and (1,3) give 1 − 5 = −4, (2,3) gives −9: the diagonal pair wins.
        assert_eq!(tie, Subgradient::Unique { pair: (0, 0), point: SimplexPoint::vertex(3, 0) });

        let unique = subgradient_point_neg_hm(&l, &[int(4), int(0), int(-10)]).unwrap();
        // (1,1) gives 4 and (1,2) gives 1 + 2 = 3.
        assert_eq!(unique, Subgradient::Unique { pair: (0, 0), point: SimplexPoint::vertex(3, 0) });

        let pair = subgradient_point_neg_hm(&l, &[int(1), int(1), int(-10)]).unwrap();
        assert_eq!(pair, Subgradient::Unique { pair: (0, 1), point: SimplexPoint::pair_midpoint(3, 0, 1) });
    }

    #[test]
    fn restricted_risk_examples() {
        let l = LossMatrix::zero_one(3).unwrap();
        let bary = SimplexPoint::barycenter(3);
        let r = bayes_risk_rm(&l, &bary).unwrap();
        assert_eq!(r.value, rat(2, 3));
        assert!(r.verify(RiskKind::RestrictedMaxMargin, &l, &bary));
        let qq = TransportPlan::product(&bary);
        assert!(qq.is_in_restriction_cone(&l) && qq.value(&l) == rat(2, 3));
        assert_eq!(bayes_risk_rm(&l, &SimplexPoint::vertex(3, 0)).unwrap().value, int(0));
    }

    #[test]
    fn max_min_minimizers() {
        let l = LossMatrix::zero_one(3).unwrap();
        assert!(verify_mm_minimizer(&l, &SimplexPoint::barycenter(3), 0).unwrap());
        assert!(verify_mm_minimizer(&l, &SimplexPoint::vertex(3, 2), 2).unwrap());
        let q = pt(&[(1, 2), (0, 1), (1, 2)]);
        for y in 0..3 {
            assert!(verify_mm_minimizer(&chain3(), &q, y).unwrap());
        }
        assert!(matches!(verify_mm_minimizer(&l, &SimplexPoint::vertex(3, 2), 0), Err(Error::Precondition(_))));
    }

    #[test]
    fn fenchel_young_on_chain() {
        let check = fenchel_young_spot_check(&chain3(), &[int(1), int(0), int(-1)], 0).unwrap();
        assert!(check.inequality_holds);
        assert_eq!(check.equality_at_subgradient, Some(true));
    }
}
