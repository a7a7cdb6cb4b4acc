use super::distance::is_distance;
use super::restricted::check_assumption_a1;
use super::tree::certify_tree_metric;
use crate::arith::{format_rational, format_vector, half, int, RVector, Rational};
use crate::loss::{simplex_grid, LossMatrix, SimplexPoint};
use crate::polytope::{transport_polytope, TRANSPORT_ENUM_MAX_K};
use crate::risk::{bayes_risk_m, bayes_risk_m_lp, bayes_risk_rm, RiskKind};
use crate::transport::TransportPlan;
use crate::{Error, Result};
use num_traits::Zero;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct OracleOptions {
    pub cap: usize,
    /// Up to this k, `H_M` is recomputed by maximizing over the enumerated
    /// vertices of `U(q, q)`; above it, by the general simplex.
    pub transport_enum_max_k: usize,
    /// Largest grid accepted, in number of points.
    pub max_points: usize,
}

impl Default for OracleOptions {
    fn default() -> Self {
        OracleOptions { cap: crate::polytope::DEFAULT_CAP, transport_enum_max_k: TRANSPORT_ENUM_MAX_K, max_points: 50_000 }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Counterexample {
    #[serde(with = "crate::arith::serde_rational::vec")]
    pub q: RVector,
    pub check: String,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct OracleReport {
    pub grid: u64,
    pub points: usize,
    /// Points where `H_M != 2 H_L`, whether or not a hypothesis predicts equality.
    #[serde(serialize_with = "points")]
    pub max_margin_doubling_failures: Vec<RVector>,
    /// Points where `H_RM != H_L`.
    #[serde(serialize_with = "points")]
    pub restricted_equality_failures: Vec<RVector>,
    pub counterexamples: Vec<Counterexample>,
}

fn points<S: serde::Serializer>(ps: &[RVector], s: S) -> std::result::Result<S::Ok, S::Error> {
    s.collect_seq(ps.iter().map(|p| p.iter().map(format_rational).collect::<Vec<_>>()))
}

/// `C(n + k − 1, k − 1)`, the number of grid points.
pub fn grid_size(k: usize, n: u64) -> u128 {
    let (mut num, mut den) = (1u128, 1u128);
    for i in 1..k as u128 {
        num *= n as u128 + i;
        den *= i;
    }
    num / den
}

/// Recomputes the Bayes risks at every grid point `m / N` by independent
/// routes and reports every ordering violation and every failed identity
/// whose hypothesis holds.
pub fn brute_force_oracle(loss: &LossMatrix, n: u64, opts: OracleOptions) -> Result<OracleReport> {
    let k = loss.k();
    if n == 0 {
        return Err(Error::Validation("grid denominator must be at least 1".into()));
    }
    let size = grid_size(k, n);
    if size > opts.max_points as u128 {
        return Err(Error::Resource(format!("grid with N = {n} has {size} points, above the limit of {}", opts.max_points)));
    }
    let distance = is_distance(loss).is_distance;
    let tree = certify_tree_metric(loss).is_certified();
    let a1 = check_assumption_a1(loss, opts.cap).map(|r| r.holds).unwrap_or(false);

    let mut report = OracleReport {
        grid: n,
        points: 0,
        max_margin_doubling_failures: Vec::new(),
        restricted_equality_failures: Vec::new(),
        counterexamples: Vec::new(),
    };
    for q in simplex_grid(k, n) {
        report.points += 1;
        let mut flag = |check: &str, detail: String| {
            report.counterexamples.push(Counterexample { q: q.as_slice().to_vec(), check: check.into(), detail })
        };
        let hl = (0..k).map(|y| loss.expected_loss(y, &q)).min().expect("k >= 2");
        let hm = bayes_risk_m(loss, &q)?;
        let hm_oracle = if k <= opts.transport_enum_max_k { max_over_transport_vertices(loss, &q, opts.cap)? } else { bayes_risk_m_lp(loss, &q)?.value };
        let hrm = bayes_risk_rm(loss, &q)?;
        if hm.value != hm_oracle {
            flag("H_M solvers agree", format!("transport simplex {} vs oracle {}", format_rational(&hm.value), format_rational(&hm_oracle)));
        }
        if !hm.verify(RiskKind::MaxMargin, loss, &q) {
            flag("H_M witness", "plan fails re-substitution".into());
        }
        if !hrm.verify(RiskKind::RestrictedMaxMargin, loss, &q) {
            flag("H_RM witness", "plan fails re-substitution".into());
        }
        if hrm.value > hl || hl > hm.value {
            flag(
                "H_RM <= H_L <= H_M",
                format!("{} / {} / {}", format_rational(&hrm.value), format_rational(&hl), format_rational(&hm.value)),
            );
        }
        let doubled = int(2) * &hl;
        if hm.value != doubled {
            report.max_margin_doubling_failures.push(q.as_slice().to_vec());
            if tree {
                flag("tree metric: H_M = 2 H_L", format!("H_M = {}, 2 H_L = {}", format_rational(&hm.value), format_rational(&doubled)));
            }
            if distance && *q.max_entry() >= half() {
                flag("dominant label: H_M = 2 H_L", format!("H_M = {}, 2 H_L = {}", format_rational(&hm.value), format_rational(&doubled)));
            }
        }
        if distance && hm.value > doubled {
            flag("distance: H_M <= 2 H_L", format!("H_M = {}, 2 H_L = {}", format_rational(&hm.value), format_rational(&doubled)));
        }
        if hrm.value != hl {
            report.restricted_equality_failures.push(q.as_slice().to_vec());
            if a1 {
                flag("A1: H_RM = H_L", format!("H_RM = {}, H_L = {}", format_rational(&hrm.value), format_rational(&hl)));
            }
        }
    }
    Ok(report)
}

/// `max ⟨L, Q⟩` over the enumerated vertices of `U(q, q)`. Rows and columns
/// outside the support of `q` vanish, so the support block is enumerated.
pub fn max_over_transport_vertices(loss: &LossMatrix, q: &SimplexPoint, cap: usize) -> Result<Rational> {
    let k = loss.k();
    let support: Vec<usize> = (0..k).filter(|&i| !q[i].is_zero()).collect();
    let s = support.len();
    let sub = SimplexPoint::new(support.iter().map(|&i| q[i].clone()).collect())?;
    let verts = transport_polytope(&sub).enumerate_vertices(cap)?;
    let mut best: Option<Rational> = None;
    for v in verts.iter() {
        let mut plan = TransportPlan::zeros(k);
        for a in 0..s {
            for b in 0..s {
                plan.set(support[a], support[b], v[a * s + b].clone());
            }
        }
        let val = plan.value(loss);
        if best.as_ref().is_none_or(|b| val > *b) {
            best = Some(val);
        }
    }
    best.ok_or_else(|| Error::Structural(format!("no vertices for q = {}", format_vector(q.as_slice()))))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::arith::rat;

    #[test]
    fn chain_grid_is_clean() {
        let chain = LossMatrix::absolute_deviation(&[int(0), int(1), int(2)]).unwrap();
        let r = brute_force_oracle(&chain, 6, OracleOptions::default()).unwrap();
        assert_eq!(r.points, 28);
        assert!(r.counterexamples.is_empty());
        assert!(r.max_margin_doubling_failures.is_empty());
    }

    #[test]
    fn zero_one_fails_doubling_only_at_barycenter() {
        let l = LossMatrix::zero_one(3).unwrap();
        let r = brute_force_oracle(&l, 6, OracleOptions::default()).unwrap();
        assert!(r.counterexamples.is_empty());
        assert_eq!(r.max_margin_doubling_failures, vec![vec![rat(1, 3); 3]]);
    }

    #[test]
    fn unit_grid_is_point_masses() {
        let l = LossMatrix::zero_one(4).unwrap();
        let r = brute_force_oracle(&l, 1, OracleOptions::default()).unwrap();
        assert_eq!(r.points, 4);
        assert!(r.counterexamples.is_empty() && r.max_margin_doubling_failures.is_empty());
        assert_eq!(grid_size(3, 6), 28);
    }
}
