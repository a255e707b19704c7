//! Set-based measures over hierarchy-augmented label sets.
//!
//! Each label set is augmented with the ancestors (or, in the variant mode,
//! the descendants) of its members; symmetric difference loss and
//! hierarchical precision/recall/F1 are then plain set arithmetic on the
//! augmented sets. The tolerance filter removes over- and
//! under-specialization artifacts one level at a time before scoring.

use std::collections::BTreeSet;

use crate::hierarchy::{Hierarchy, NodeId};
use crate::pair_measures::InstanceLabels;
use crate::Result;

/// Which closure is used to augment label sets.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AugmentMode {
    /// Union each set with all ancestors of its members (the standard
    /// hierarchical precision/recall construction).
    Ancestors,
    /// Union each set with all descendants of its members.
    Descendants,
}

/// Options controlling the augmentation step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AugmentOptions {
    pub mode: AugmentMode,
    /// A designated root id excluded from both augmented sets, for
    /// hierarchies joined under an artificial catch-all root.
    pub virtual_root: Option<NodeId>,
    /// Cap on ancestor exploration depth (set by the distance-threshold
    /// mode); ignored for descendant augmentation.
    pub depth_cap: Option<usize>,
}

impl AugmentOptions {
    pub fn ancestors() -> Self {
        Self {
            mode: AugmentMode::Ancestors,
            virtual_root: None,
            depth_cap: None,
        }
    }

    pub fn descendants() -> Self {
        Self {
            mode: AugmentMode::Descendants,
            virtual_root: None,
            depth_cap: None,
        }
    }
}

/// The two augmented label sets of one instance.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct AugmentedSets {
    /// True labels plus closure.
    pub y_aug: BTreeSet<NodeId>,
    /// Predicted labels plus closure.
    pub yhat_aug: BTreeSet<NodeId>,
    pub mode: AugmentMode,
    /// Whether the tolerance filter has been applied.
    pub filtered: bool,
}

/// Scores derived from one pair of augmented sets.
#[derive(Debug, Clone, PartialEq)]
pub struct SetScore {
    /// Hierarchical precision: `|∩| / |ŷ_aug|`.
    pub p_h: f64,
    /// Hierarchical recall: `|∩| / |y_aug|`.
    pub r_h: f64,
    /// Harmonic mean of precision and recall.
    pub f_h: f64,
    /// Symmetric difference loss: `|y_aug Δ ŷ_aug|`.
    pub sdl: u64,
}

/// Augment both label sets of an instance.
///
/// # Errors
///
/// [`crate::Error::UnknownNode`] when a label is missing from the
/// hierarchy.
pub fn augment(
    h: &Hierarchy,
    labels: &InstanceLabels,
    options: AugmentOptions,
) -> Result<AugmentedSets> {
    let y_aug = augment_side(h, labels.truth(), options)?;
    let yhat_aug = augment_side(h, labels.predicted(), options)?;
    Ok(AugmentedSets {
        y_aug,
        yhat_aug,
        mode: options.mode,
        filtered: false,
    })
}

fn augment_side(
    h: &Hierarchy,
    members: &[NodeId],
    options: AugmentOptions,
) -> Result<BTreeSet<NodeId>> {
    let mut aug: BTreeSet<NodeId> = members.iter().copied().collect();
    for &n in members {
        match (options.mode, options.depth_cap) {
            (AugmentMode::Ancestors, None) => aug.extend(h.ancestors(n)?),
            (AugmentMode::Ancestors, Some(cap)) => {
                aug.extend(h.ancestors_within(n, cap)?.into_keys());
            }
            (AugmentMode::Descendants, _) => aug.extend(h.descendants(n)?),
        }
    }
    if let Some(root) = options.virtual_root {
        aug.remove(&root);
    }
    Ok(aug)
}

/// One-pass tolerance filter on ancestor-augmented sets.
///
/// A node is dropped from one augmented set when it is absent from the
/// other set and none of its hierarchy parents appears there either; both
/// directions are evaluated against the unfiltered sets and applied
/// together. This forgives predictions that stopped one level early or ran
/// one chain deeper than the truth, while unrelated branches still count
/// as errors.
pub fn tolerance_filter(h: &Hierarchy, aug: &AugmentedSets) -> Result<AugmentedSets> {
    let y_aug = filter_side(h, &aug.y_aug, &aug.yhat_aug)?;
    let yhat_aug = filter_side(h, &aug.yhat_aug, &aug.y_aug)?;
    Ok(AugmentedSets {
        y_aug,
        yhat_aug,
        mode: aug.mode,
        filtered: true,
    })
}

fn filter_side(
    h: &Hierarchy,
    own: &BTreeSet<NodeId>,
    other: &BTreeSet<NodeId>,
) -> Result<BTreeSet<NodeId>> {
    let mut kept = BTreeSet::new();
    for &n in own {
        if other.contains(&n)
            || h.parents_of(n)?.iter().any(|p| other.contains(p))
        {
            kept.insert(n);
        }
    }
    Ok(kept)
}

/// Precision, recall, F1, and symmetric difference loss of augmented sets.
pub fn set_scores(aug: &AugmentedSets) -> SetScore {
    let inter = aug.y_aug.intersection(&aug.yhat_aug).count() as f64;
    let p_h = if aug.yhat_aug.is_empty() {
        0.0
    } else {
        inter / aug.yhat_aug.len() as f64
    };
    let r_h = if aug.y_aug.is_empty() {
        0.0
    } else {
        inter / aug.y_aug.len() as f64
    };
    let f_h = if p_h + r_h > 0.0 {
        2.0 * p_h * r_h / (p_h + r_h)
    } else {
        0.0
    };
    let sdl = (aug.y_aug.len() + aug.yhat_aug.len()) as u64 - 2 * inter as u64;
    SetScore { p_h, r_h, f_h, sdl }
}
