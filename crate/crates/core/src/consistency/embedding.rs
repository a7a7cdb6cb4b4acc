use crate::arith::{format_rational, format_vector, int};
use crate::loss::{argmax_decode, embed, eval_max_margin, eval_restricted_max_margin, simplex_grid, LossMatrix};
use crate::risk::{bayes_risk_l, bayes_risk_m, bayes_risk_rm};
use crate::Result;
use serde::Serialize;
use std::collections::BTreeMap;

/// Grid identities that need one LP per point are swept on the requested
/// grid only up to this k; larger losses use the grid with denominator 2
/// (vertices and pair midpoints).
pub const LP_GRID_MAX_K: usize = 5;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum CheckOutcome {
    Holds,
    Fails { witness: String },
    NotApplicable { reason: String },
}

impl CheckOutcome {
    pub fn holds(&self) -> bool {
        matches!(self, CheckOutcome::Holds)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct EmbeddingEntry {
    pub hypothesis: String,
    /// `None` when the hypothesis itself could not be decided.
    pub hypothesis_holds: Option<bool>,
    /// Grid denominator for grid identities.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub grid: Option<u64>,
    pub outcome: CheckOutcome,
}

/// Facts about the loss that gate the individual identities.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct EmbeddingFacts {
    pub distance: bool,
    pub tree_certified: bool,
    pub a1: Option<bool>,
}

pub type EmbeddingChecks = BTreeMap<String, EmbeddingEntry>;

pub const ARGMAX: &str = "argmax_inverts_embedding";
pub const MAX_MARGIN_SCORES: &str = "max_margin_scores_at_embedding";
pub const RESTRICTED_SCORES: &str = "restricted_max_margin_scores_at_embedding";
pub const MAX_MARGIN_GRID: &str = "max_margin_risk_is_twice_task_risk";
pub const RESTRICTED_GRID: &str = "restricted_max_margin_risk_equals_task_risk";

/// Score identities are evaluated only under their hypotheses; the two
/// grid identities are always evaluated and record whether their hypothesis
/// holds, so failures outside the hypothesis stay visible.
pub fn check_embedding_identities(loss: &LossMatrix, facts: EmbeddingFacts, grid: u64) -> Result<EmbeddingChecks> {
    let k = loss.k();
    let mut out = BTreeMap::new();

    let argmax = (0..k).find(|&y| argmax_decode(&embed(loss, y)) != y);
    out.insert(
        ARGMAX.to_string(),
        EmbeddingEntry {
            hypothesis: "none".into(),
            hypothesis_holds: Some(true),
            grid: None,
            outcome: match argmax {
                None => CheckOutcome::Holds,
                Some(y) => CheckOutcome::Fails { witness: format!("argmax of -L_{} is not {}", y + 1, y + 1) },
            },
        },
    );

    let scores = if facts.distance {
        let mut outcome = CheckOutcome::Holds;
        'outer: for y in 0..k {
            let v = embed(loss, y);
            for z in 0..k {
                let s = eval_max_margin(loss, &v, z)?;
                let target = int(2) * loss.get(y, z);
                if s != target {
                    outcome = CheckOutcome::Fails {
                        witness: format!(
                            "S_M(-L_{}, {}) = {} but 2 L({}, {}) = {}",
                            y + 1,
                            z + 1,
                            format_rational(&s),
                            y + 1,
                            z + 1,
                            format_rational(&target)
                        ),
                    };
                    break 'outer;
                }
            }
        }
        outcome
    } else {
        CheckOutcome::NotApplicable { reason: "loss is not a distance".into() }
    };
    out.insert(
        MAX_MARGIN_SCORES.to_string(),
        EmbeddingEntry { hypothesis: "distance".into(), hypothesis_holds: Some(facts.distance), grid: None, outcome: scores },
    );

    let restricted = match facts.a1 {
        Some(true) => {
            let mut outcome = CheckOutcome::Holds;
            'outer: for z in 0..k {
                let v = embed(loss, z);
                for y in 0..k {
                    let s = eval_restricted_max_margin(loss, &v, y)?;
                    if &s != loss.get(y, z) {
                        outcome = CheckOutcome::Fails {
                            witness: format!(
                                "S_RM(-L_{}, {}) = {} but L({}, {}) = {}",
                                z + 1,
                                y + 1,
                                format_rational(&s),
                                y + 1,
                                z + 1,
                                format_rational(loss.get(y, z))
                            ),
                        };
                        break 'outer;
                    }
                }
            }
            outcome
        }
        Some(false) => CheckOutcome::NotApplicable { reason: "assumption A1 fails".into() },
        None => CheckOutcome::NotApplicable { reason: "assumption A1 undetermined".into() },
    };
    out.insert(
        RESTRICTED_SCORES.to_string(),
        EmbeddingEntry { hypothesis: "A1".into(), hypothesis_holds: facts.a1, grid: None, outcome: restricted },
    );

    let mut first_m = None;
    for q in simplex_grid(k, grid) {
        let hl = bayes_risk_l(loss, &q)?.value;
        let hm = bayes_risk_m(loss, &q)?.value;
        if hm != int(2) * &hl {
            first_m = Some(format!(
                "q = {}: H_M = {}, 2 H_L = {}",
                format_vector(q.as_slice()),
                format_rational(&hm),
                format_rational(&(int(2) * &hl))
            ));
            break;
        }
    }
    out.insert(
        MAX_MARGIN_GRID.to_string(),
        EmbeddingEntry {
            hypothesis: "tree metric certified".into(),
            hypothesis_holds: Some(facts.tree_certified),
            grid: Some(grid),
            outcome: match first_m {
                None => CheckOutcome::Holds,
                Some(witness) => CheckOutcome::Fails { witness },
            },
        },
    );

    let rm_grid = lp_grid(k, grid);
    let mut first_rm = None;
    for q in simplex_grid(k, rm_grid) {
        let hl = bayes_risk_l(loss, &q)?.value;
        let hrm = bayes_risk_rm(loss, &q)?.value;
        if hrm != hl {
            first_rm = Some(format!(
                "q = {}: H_RM = {}, H_L = {}",
                format_vector(q.as_slice()),
                format_rational(&hrm),
                format_rational(&hl)
            ));
            break;
        }
    }
    out.insert(
        RESTRICTED_GRID.to_string(),
        EmbeddingEntry {
            hypothesis: "A1".into(),
            hypothesis_holds: facts.a1,
            grid: Some(rm_grid),
            outcome: match first_rm {
                None => CheckOutcome::Holds,
                Some(witness) => CheckOutcome::Fails { witness },
            },
        },
    );
    Ok(out)
}

/// The grid actually swept for LP-backed identities.
pub fn lp_grid(k: usize, requested: u64) -> u64 {
    if k <= LP_GRID_MAX_K {
        requested
    } else {
        requested.min(2)
    }
}
