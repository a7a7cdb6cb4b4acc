use super::distance::is_distance;
use crate::loss::LossMatrix;
use crate::Result;
use serde::Serialize;

/// The first of the three identities that fails for a candidate `z`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct CandidateFailure {
    #[serde(serialize_with = "crate::one_based::one")]
    pub z: usize,
    /// 1, 2 or 3: which of `L(y1,y2)`, `L(y1,y3)`, `L(y2,y3)` does not split at `z`.
    pub identity: u8,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct TripleViolation {
    #[serde(serialize_with = "crate::one_based::triple")]
    pub triple: [usize; 3],
    pub failures: Vec<CandidateFailure>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NecessaryConditionResult {
    pub holds: bool,
    pub is_distance: bool,
    /// Set for k <= 2, where the triple condition is empty.
    pub vacuous: bool,
    pub violating_triple: Option<TripleViolation>,
    pub violating_triple_count: usize,
}

/// For `{y1, y2, y3}`, the outcome of every candidate `z`: `None` if all
/// three identities `L(a, b) = L(a, z) + L(z, b)` hold, otherwise the first
/// failing identity.
pub fn check_triple(loss: &LossMatrix, triple: [usize; 3]) -> std::result::Result<usize, Vec<CandidateFailure>> {
    let [a, b, c] = triple;
    let pairs = [(a, b), (a, c), (b, c)];
    let mut failures = Vec::new();
    for z in 0..loss.k() {
        let failing = pairs.iter().position(|&(x, y)| *loss.get(x, y) != loss.get(x, z) + loss.get(z, y));
        match failing {
            None => return Ok(z),
            Some(i) => failures.push(CandidateFailure { z, identity: i as u8 + 1 }),
        }
    }
    Err(failures)
}

/// Searches every unordered triple of distinct outputs for a `z` splitting
/// all three pairwise losses. Requires a symmetric loss.
pub fn check_necessary_condition(loss: &LossMatrix) -> Result<NecessaryConditionResult> {
    loss.require_symmetric()?;
    let k = loss.k();
    let distance = is_distance(loss).is_distance;
    if k <= 2 {
        return Ok(NecessaryConditionResult {
            holds: distance,
            is_distance: distance,
            vacuous: true,
            violating_triple: None,
            violating_triple_count: 0,
        });
    }
    let mut first = None;
    let mut count = 0;
    for a in 0..k {
        for b in a + 1..k {
            for c in b + 1..k {
                if let Err(failures) = check_triple(loss, [a, b, c]) {
                    count += 1;
                    if first.is_none() {
                        first = Some(TripleViolation { triple: [a, b, c], failures });
                    }
                }
            }
        }
    }
    Ok(NecessaryConditionResult {
        holds: distance && first.is_none(),
        is_distance: distance,
        vacuous: false,
        violating_triple: first,
        violating_triple_count: count,
    })
}
