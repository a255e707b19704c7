//! Pair-based measures: tree-induced error, graph-induced error, and
//! multi-label graph-induced accuracy.
//!
//! All three price an instance by pairing predicted against true labels and
//! summing connecting-path costs. Tree-induced error handles the one-label
//! case directly; the other two solve the pairing network from [`crate::flow`]
//! with different degree bounds. Labels that cannot be paired fall back to a
//! default partner at the fixed cost `d_max`; for the one-to-one error the
//! default also competes on cost against expensive real pairs, while the
//! multi-label accuracy defaults only as a last resort.

use std::collections::BTreeSet;

use crate::flow::{solve_pairing, CostMatrix, DefaultPolicy, PairingBounds};
use crate::hierarchy::{Hierarchy, NodeId};
use crate::{Error, Result};

/// One evaluation instance: the true label set and the predicted label set.
///
/// Both sets are kept sorted and duplicate-free. The true set must be
/// nonempty; an empty predicted set is allowed and scored as the worst case
/// by every measure.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InstanceLabels {
    truth: Vec<NodeId>,
    predicted: Vec<NodeId>,
}

impl InstanceLabels {
    /// Build an instance, sorting and deduplicating both sides.
    ///
    /// # Errors
    ///
    /// [`Error::Invalid`] when the true set is empty.
    pub fn new(truth: Vec<NodeId>, predicted: Vec<NodeId>) -> Result<Self> {
        if truth.is_empty() {
            return Err(Error::Invalid("true label set is empty".to_string()));
        }
        let mut truth = truth;
        truth.sort_unstable();
        truth.dedup();
        let mut predicted = predicted;
        predicted.sort_unstable();
        predicted.dedup();
        Ok(Self { truth, predicted })
    }

    /// True labels, ascending.
    pub fn truth(&self) -> &[NodeId] {
        &self.truth
    }

    /// Predicted labels, ascending.
    pub fn predicted(&self) -> &[NodeId] {
        &self.predicted
    }

    /// Size of the union of both label sets.
    pub fn union_size(&self) -> usize {
        let mut union: BTreeSet<NodeId> = self.truth.iter().copied().collect();
        union.extend(self.predicted.iter().copied());
        union.len()
    }

    /// First label (on either side) missing from `h`, if any.
    pub fn first_unknown(&self, h: &Hierarchy) -> Option<NodeId> {
        self.truth
            .iter()
            .chain(self.predicted.iter())
            .copied()
            .find(|&n| !h.contains(n))
    }
}

/// Outcome of a pair-based measure on one instance.
#[derive(Debug, Clone, PartialEq)]
pub struct PairScore {
    /// Total pairing cost (the flow value; fnerror for the accuracy
    /// measure).
    pub raw_error: f64,
    /// Normalized accuracy in [0, 1]; present for the accuracy measure
    /// only.
    pub score: Option<f64>,
    /// Realized predicted/true pairs, sorted; multi-pairings repeat the
    /// shared label.
    pub pairs: Vec<(NodeId, NodeId)>,
    /// Predicted labels routed (fully or partly) to the default true node.
    pub pred_defaulted: Vec<NodeId>,
    /// True labels served (fully or partly) by the default predicted node.
    pub true_defaulted: Vec<NodeId>,
}

/// Weighted shortest-path cost between one true and one predicted label.
///
/// The single-label measure: no default class exists, so a disconnected
/// pair is an error rather than a priced fallback.
///
/// # Errors
///
/// [`Error::UnknownNode`] or [`Error::Disconnected`].
pub fn tree_induced_error(h: &Hierarchy, truth: NodeId, predicted: NodeId) -> Result<f64> {
    h.distance(truth, predicted, None)?
        .ok_or(Error::Disconnected { a: truth, b: predicted })
}

/// Graph-induced error: optimal one-to-one pairing cost.
///
/// Every predicted and every true label participates in exactly one pair;
/// the two default classes absorb the surplus side and any label whose
/// cheapest real pairing costs more than `d_max`. With `cap` set, label
/// pairs farther apart than `cap` are forbidden outright and must default.
pub fn gie(
    h: &Hierarchy,
    labels: &InstanceLabels,
    d_max: f64,
    cap: Option<f64>,
) -> Result<PairScore> {
    let matrix = cost_matrix(h, labels, d_max, cap)?;
    let solution = solve_pairing(&matrix, PairingBounds::one_to_one(), DefaultPolicy::Always)?;
    Ok(collect(labels, solution, None))
}

/// Multi-label graph-induced accuracy.
///
/// Relaxes the one-to-one constraint: each label still needs at least one
/// partner but may serve several labels of the other side. Unlike the
/// one-to-one error, a label only defaults when it has no admissible partner
/// at all (disconnected, or every partner beyond `cap`); a reachable partner
/// must be taken even when the path costs more than `d_max`. The flow cost
/// (fnerror) is normalized against the worst case, all labels defaulting:
/// `score = 1 − fnerror / (|Y ∪ Ŷ| · d_max)`, clamped to [0, 1].
pub fn mgia(
    h: &Hierarchy,
    labels: &InstanceLabels,
    d_max: f64,
    cap: Option<f64>,
) -> Result<PairScore> {
    let matrix = cost_matrix(h, labels, d_max, cap)?;
    let bounds = PairingBounds::covering(labels.predicted.len(), labels.truth.len());
    let solution = solve_pairing(&matrix, bounds, DefaultPolicy::LastResort)?;
    let denom = labels.union_size() as f64 * d_max;
    let raw = solution.total_cost;
    let score = if denom > 0.0 {
        (1.0 - raw / denom).clamp(0.0, 1.0)
    } else if raw > 0.0 {
        0.0
    } else {
        1.0
    };
    Ok(collect(labels, solution, Some(score)))
}

/// Pairing costs for one instance: predicted rows, true columns.
///
/// One distance sweep per predicted label fills its row; unreachable or
/// over-cap pairs stay empty and can only default.
fn cost_matrix(
    h: &Hierarchy,
    labels: &InstanceLabels,
    d_max: f64,
    cap: Option<f64>,
) -> Result<CostMatrix> {
    if let Some(id) = labels.first_unknown(h) {
        return Err(Error::UnknownNode(id));
    }
    let mut rows = Vec::with_capacity(labels.predicted.len());
    for &p in &labels.predicted {
        let dist = h.distances_from(p, cap)?;
        rows.push(labels.truth.iter().map(|t| dist.get(t).copied()).collect());
    }
    CostMatrix::new(rows, labels.truth.len(), d_max)
}

fn collect(
    labels: &InstanceLabels,
    solution: crate::flow::PairingSolution,
    score: Option<f64>,
) -> PairScore {
    let mut pairs = Vec::new();
    for (i, row) in solution.pair_flows.iter().enumerate() {
        for (j, &f) in row.iter().enumerate() {
            for _ in 0..f {
                pairs.push((labels.predicted[i], labels.truth[j]));
            }
        }
    }
    let pred_defaulted = solution
        .pred_default
        .iter()
        .enumerate()
        .filter(|&(_, &f)| f > 0)
        .map(|(i, _)| labels.predicted[i])
        .collect();
    let true_defaulted = solution
        .true_default
        .iter()
        .enumerate()
        .filter(|&(_, &f)| f > 0)
        .map(|(j, _)| labels.truth[j])
        .collect();
    PairScore {
        raw_error: solution.total_cost,
        score,
        pairs,
        pred_defaulted,
        true_defaulted,
    }
}
