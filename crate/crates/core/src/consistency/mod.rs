//! Consistency verdicts for the margin surrogates, each backed by a
//! recomputable witness.

mod distance;
mod dominant;
mod embedding;
mod necessary;
mod oracle;
mod restricted;
mod tree;

pub use distance::{is_distance, DistanceCheck, DistanceViolation};
pub use dominant::{check_dominant_label_identity, dominant_label_plan, DominantLabelCheck};
pub use embedding::{
    check_embedding_identities, lp_grid, CheckOutcome, EmbeddingChecks, EmbeddingEntry, EmbeddingFacts, ARGMAX,
    LP_GRID_MAX_K, MAX_MARGIN_GRID, MAX_MARGIN_SCORES, RESTRICTED_GRID, RESTRICTED_SCORES,
};
pub use necessary::{check_necessary_condition, check_triple, CandidateFailure, NecessaryConditionResult, TripleViolation};
pub use oracle::{brute_force_oracle, grid_size, max_over_transport_vertices, Counterexample, OracleOptions, OracleReport};
pub use restricted::{check_assumption_a1, check_rm_simple_sufficient, A1Result, A1Violation, OutputMinimum, RmSimpleResult};
pub use tree::{certify_tree_metric, TreeCertificate, TreeOutcome};

use crate::arith::{format_rational, format_vector, half};
use crate::loss::{embed, simplex_grid, LossMatrix};
use crate::polytope::DEFAULT_CAP;
use crate::risk::{fenchel_young_spot_check, FenchelYoungCheck};
use crate::Result;
use num_traits::Zero;
use serde::Serialize;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct ReportConfig {
    pub cap: usize,
    /// Grid denominator; `None` means `2k`.
    pub grid: Option<u64>,
    pub seed: u64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig { cap: DEFAULT_CAP, grid: None, seed: 0 }
    }
}

impl ReportConfig {
    pub fn grid_for(&self, k: usize) -> u64 {
        self.grid.unwrap_or(2 * k as u64)
    }
}

/// A check that either ran or could not be decided.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Checked<T> {
    Evaluated(T),
    Undetermined(String),
}

impl<T> Checked<T> {
    fn from_result(r: Result<T>) -> Self {
        match r {
            Ok(v) => Checked::Evaluated(v),
            Err(e) => Checked::Undetermined(e.to_string()),
        }
    }

    pub fn evaluated(&self) -> Option<&T> {
        match self {
            Checked::Evaluated(v) => Some(v),
            Checked::Undetermined(_) => None,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum VerdictStatus {
    Consistent,
    Inconsistent,
    Undetermined,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdict {
    pub status: VerdictStatus,
    pub justification: Vec<String>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct Verdicts {
    pub max_margin: Verdict,
    pub restricted_max_margin: Verdict,
    pub max_min_margin: Verdict,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct LossSummary {
    pub k: usize,
    pub symmetric: bool,
    pub distance: DistanceCheck,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DominantLabelSummary {
    pub grid: u64,
    pub points_checked: usize,
    pub verified: bool,
    #[serde(with = "crate::arith::serde_rational::vec")]
    pub first_failure: Vec<crate::arith::Rational>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct FenchelYoungEntry {
    /// Scores `v = −L_y`.
    #[serde(serialize_with = "crate::one_based::one")]
    pub y: usize,
    pub seed: u64,
    pub check: FenchelYoungCheck,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct ConsistencyReport {
    pub loss: LossSummary,
    pub necessary_condition: Checked<NecessaryConditionResult>,
    pub tree: TreeOutcome,
    pub rm_simple_sufficient: Checked<RmSimpleResult>,
    pub a1: Checked<A1Result>,
    pub dominant_label_identity: Checked<DominantLabelSummary>,
    pub embedding_checks: Checked<EmbeddingChecks>,
    pub fenchel_young: Checked<Vec<FenchelYoungEntry>>,
    pub verdicts: Verdicts,
}

/// Runs every check that applies to `loss` and composes the verdicts.
/// Resource and precondition failures of individual checks downgrade the
/// affected field to undetermined instead of failing the report.
pub fn build_report(loss: &LossMatrix, config: &ReportConfig) -> ConsistencyReport {
    let k = loss.k();
    let grid = config.grid_for(k);
    let symmetric = loss.is_symmetric();
    let distance = is_distance(loss);
    let necessary = Checked::from_result(check_necessary_condition(loss));
    let tree = certify_tree_metric(loss);
    let rm_simple = Checked::from_result(check_rm_simple_sufficient(loss, config.cap));
    let a1 = Checked::from_result(check_assumption_a1(loss, config.cap));
    let a1_holds = a1.evaluated().map(|r| r.holds);

    let dominant = if distance.is_distance {
        Checked::from_result(dominant_sweep(loss, lp_grid(k, grid)))
    } else {
        Checked::Undetermined("loss is not a distance".into())
    };
    let facts = EmbeddingFacts { distance: distance.is_distance, tree_certified: tree.is_certified(), a1: a1_holds };
    let embedding = Checked::from_result(check_embedding_identities(loss, facts, grid));
    let fenchel_young = if symmetric {
        Checked::from_result(
            (0..k)
                .map(|y| {
                    let seed = config.seed.wrapping_add(y as u64);
                    fenchel_young_spot_check(loss, &embed(loss, y), seed).map(|check| FenchelYoungEntry { y, seed, check })
                })
                .collect(),
        )
    } else {
        Checked::Undetermined("conjugate form needs a symmetric loss".into())
    };

    let max_margin = max_margin_verdict(loss, &distance, &necessary, &tree);
    let restricted_max_margin = restricted_verdict(&max_margin, &rm_simple, &a1);
    let max_min_margin = Verdict {
        status: VerdictStatus::Consistent,
        justification: vec!["the max-min-margin Bayes risk equals the task Bayes risk for every loss".into()],
    };
    ConsistencyReport {
        loss: LossSummary { k, symmetric, distance },
        necessary_condition: necessary,
        tree,
        rm_simple_sufficient: rm_simple,
        a1,
        dominant_label_identity: dominant,
        embedding_checks: embedding,
        fenchel_young,
        verdicts: Verdicts { max_margin, restricted_max_margin, max_min_margin },
    }
}

fn dominant_sweep(loss: &LossMatrix, grid: u64) -> Result<DominantLabelSummary> {
    let mut checked = 0;
    for q in simplex_grid(loss.k(), grid) {
        if *q.max_entry() < half() {
            continue;
        }
        checked += 1;
        if !check_dominant_label_identity(loss, &q)?.verified {
            return Ok(DominantLabelSummary { grid, points_checked: checked, verified: false, first_failure: q.into_inner() });
        }
    }
    Ok(DominantLabelSummary { grid, points_checked: checked, verified: true, first_failure: Vec::new() })
}

fn max_margin_verdict(
    loss: &LossMatrix,
    distance: &DistanceCheck,
    necessary: &Checked<NecessaryConditionResult>,
    tree: &TreeOutcome,
) -> Verdict {
    let undetermined = |justification| Verdict { status: VerdictStatus::Undetermined, justification };
    let nc = match necessary {
        Checked::Evaluated(nc) => nc,
        Checked::Undetermined(reason) => {
            return undetermined(vec![
                format!("necessary condition not evaluated: {reason}"),
                "the necessary condition and tree-metric sufficiency are stated for symmetric losses".into(),
            ])
        }
    };
    if !nc.holds {
        let mut why = Vec::new();
        if let Some(DistanceViolation::Triangle { y, via, y_prime }) = &distance.violation {
            why.push(format!(
                "loss is not a distance: L({}, {}) = {} exceeds L({}, {}) + L({}, {}) = {}",
                y + 1,
                y_prime + 1,
                format_rational(loss.get(*y, *y_prime)),
                y + 1,
                via + 1,
                via + 1,
                y_prime + 1,
                format_rational(&(loss.get(*y, *via) + loss.get(*via, *y_prime)))
            ));
        }
        if let Some(t) = &nc.violating_triple {
            why.push(format!(
                "no output z splits all pairwise losses of ({}, {}, {}); {} of the triples fail",
                t.triple[0] + 1,
                t.triple[1] + 1,
                t.triple[2] + 1,
                nc.violating_triple_count
            ));
        }
        why.push("necessary condition for max-margin consistency fails".into());
        return Verdict { status: VerdictStatus::Inconsistent, justification: why };
    }
    let mut why = vec!["loss is a distance".to_string()];
    why.push(if nc.vacuous { "necessary condition holds vacuously (k <= 2)".into() } else { "necessary condition holds".into() });
    match tree {
        TreeOutcome::Certified { certificate } => {
            why.push(format!(
                "tree certificate with {} edges reproduces every pairwise loss",
                certificate.edges.len()
            ));
            why.push("max-margin is consistent for tree distances".into());
            Verdict { status: VerdictStatus::Consistent, justification: why }
        }
        TreeOutcome::NotCertified { reason } => {
            why.push(format!("tree metric not certified: {reason}"));
            why.push("sufficiency of the necessary condition is an open question".into());
            undetermined(why)
        }
    }
}

fn restricted_verdict(max_margin: &Verdict, rm_simple: &Checked<RmSimpleResult>, a1: &Checked<A1Result>) -> Verdict {
    let mut why = Vec::new();
    if max_margin.status == VerdictStatus::Consistent {
        why.push("max-margin is consistent, which implies restricted-max-margin consistency".into());
    }
    match rm_simple {
        Checked::Evaluated(r) if r.holds => why.push("q_y > 0 on every prediction set Δ(y): restricted-max-margin is consistent".into()),
        Checked::Evaluated(r) => {
            if let Some(m) = r.minima.iter().find(|m| m.min.is_zero()) {
                why.push(format!(
                    "min of q_{} over Δ({}) is 0, attained at {}",
                    m.y + 1,
                    m.y + 1,
                    format_vector(&m.witness)
                ));
            }
        }
        Checked::Undetermined(reason) => why.push(format!("positivity of q_y on Δ(y) undetermined: {reason}")),
    }
    match a1 {
        Checked::Evaluated(r) if r.holds => {
            why.push(format!("A1 holds on all {} prediction-set vertices: restricted-max-margin embeds the loss", r.vertices_checked))
        }
        Checked::Evaluated(r) => {
            if let Some(v) = &r.violation {
                why.push(format!("A1 fails: {v}"));
            }
        }
        Checked::Undetermined(reason) => why.push(format!("A1 undetermined: {reason}")),
    }
    let consistent = max_margin.status == VerdictStatus::Consistent
        || rm_simple.evaluated().is_some_and(|r| r.holds)
        || a1.evaluated().is_some_and(|r| r.holds);
    Verdict { status: if consistent { VerdictStatus::Consistent } else { VerdictStatus::Undetermined }, justification: why }
}
