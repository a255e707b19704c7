//! Lowest-common-ancestor graph measures.
//!
//! Labels are related through the LCAs of minimal connecting paths. Two
//! graph layers are built per instance: the extended graphs collect every
//! minimal label-to-LCA path on each side, and the minimal graphs select a
//! smallest sufficient LCA subset plus one best connecting path per
//! obligation, approximating the smallest graphs that still connect every
//! label to a shared LCA. Precision, recall, and F1 then compare the node
//! sets of the two minimal graphs.
//!
//! A distance threshold variant rewrites the evaluation hierarchy per
//! instance so that no label is ever farther than `t` edges from an LCA,
//! joining overly distant or disconnected label pairs through an artificial
//! ancestor node.

use std::collections::{BTreeMap, BTreeSet, HashSet};

use crate::hierarchy::{Hierarchy, NodeId};
use crate::pair_measures::InstanceLabels;
use crate::{Error, Result};

/// Node id of the per-instance artificial ancestor inserted by
/// [`threshold_view`]. Negative so it can never collide with file-supplied
/// labels.
pub const ARTIFICIAL_NODE: NodeId = -1;

// ---------------------------------------------------------------------------
// Graph containers
// ---------------------------------------------------------------------------

/// A node-and-edge subgraph of the hierarchy.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Subgraph {
    pub nodes: BTreeSet<NodeId>,
    /// Edges as `(parent, child)` in hierarchy orientation.
    pub edges: BTreeSet<(NodeId, NodeId)>,
}

impl Subgraph {
    fn add_path(&mut self, h: &Hierarchy, path: &[NodeId]) {
        self.nodes.extend(path.iter().copied());
        for pair in path.windows(2) {
            self.edges.insert(orient(h, pair[0], pair[1]));
        }
    }
}

/// Orient one traversed step as the underlying directed hierarchy edge.
fn orient(h: &Hierarchy, a: NodeId, b: NodeId) -> (NodeId, NodeId) {
    match h.children_of(a) {
        Ok(children) if children.binary_search(&b).is_ok() => (a, b),
        _ => (b, a),
    }
}

/// The extended graphs: every minimal label-to-LCA path on each side.
#[derive(Debug, Clone)]
pub struct ExtendedGraphs {
    /// True-side extended graph.
    pub g_ex_t: Subgraph,
    /// Predicted-side extended graph.
    pub g_ex_p: Subgraph,
    /// Union of the per-label LCA sets of both sides.
    pub lca_all: BTreeSet<NodeId>,
    pools: Pools,
}

/// Extended plus selected minimal graphs for one instance.
#[derive(Debug, Clone)]
pub struct LcaGraphs {
    pub g_ex_t: Subgraph,
    pub g_ex_p: Subgraph,
    /// Minimal true-side graph.
    pub g_t: Subgraph,
    /// Minimal predicted-side graph.
    pub g_p: Subgraph,
    /// The LCA subset the selection kept.
    pub chosen_lcas: BTreeSet<NodeId>,
}

/// Precision, recall, and F1 over minimal-graph node sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LcaScore {
    pub p_lca: f64,
    pub r_lca: f64,
    pub f_lca: f64,
}

/// Score one pair of graphs: `p = |∩| / |g_p|`, `r = |∩| / |g_t|`, `f`
/// harmonic. An empty graph scores 0 on its own axis.
pub fn lca_scores(g_t: &Subgraph, g_p: &Subgraph) -> LcaScore {
    let inter = g_t.nodes.intersection(&g_p.nodes).count() as f64;
    let p_lca = if g_p.nodes.is_empty() {
        0.0
    } else {
        inter / g_p.nodes.len() as f64
    };
    let r_lca = if g_t.nodes.is_empty() {
        0.0
    } else {
        inter / g_t.nodes.len() as f64
    };
    let f_lca = if p_lca + r_lca > 0.0 {
        2.0 * p_lca * r_lca / (p_lca + r_lca)
    } else {
        0.0
    };
    LcaScore { p_lca, r_lca, f_lca }
}

// ---------------------------------------------------------------------------
// Nested-label pruning
// ---------------------------------------------------------------------------

/// Drop every label that has a strict descendant in its own set.
///
/// Co-existing ancestors would inflate the graph intersection for free, so
/// only the most specific labels of each chain are scored. Idempotent;
/// never empties a nonempty set.
pub fn prune_nested(h: &Hierarchy, labels: &InstanceLabels) -> Result<InstanceLabels> {
    let keep = |set: &[NodeId]| -> Result<Vec<NodeId>> {
        let mut kept = Vec::with_capacity(set.len());
        for &n in set {
            let mut has_descendant = false;
            for &other in set {
                if other != n && h.is_ancestor(n, other)? {
                    has_descendant = true;
                    break;
                }
            }
            if !has_descendant {
                kept.push(n);
            }
        }
        Ok(kept)
    };
    InstanceLabels::new(keep(labels.truth())?, keep(labels.predicted())?)
}

// ---------------------------------------------------------------------------
// Extended graphs
// ---------------------------------------------------------------------------

/// Per-instance path pools shared by graph construction and selection.
///
/// `own_*` maps `(label, lca)` to the minimal paths between them on the
/// label's own side; `cross_*` maps an LCA to label-first subpaths extracted
/// from the other side's minimal label-to-label paths, which is how an LCA
/// chosen for only one side still gets connected on the other.
#[derive(Debug, Clone, Default)]
struct Pools {
    t_lcas: BTreeMap<NodeId, BTreeSet<NodeId>>,
    p_lcas: BTreeMap<NodeId, BTreeSet<NodeId>>,
    own_t: BTreeMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    own_p: BTreeMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    cross_t: BTreeMap<NodeId, Vec<Vec<NodeId>>>,
    cross_p: BTreeMap<NodeId, Vec<Vec<NodeId>>>,
}

/// Build both extended graphs for a pruned instance.
///
/// # Errors
///
/// [`Error::Disconnected`] when a label cannot reach the other label set at
/// all, and [`Error::Invalid`] when the only minimal connections run
/// through shared descendants so that no common ancestor exists; both cases
/// are evaluable under a distance threshold.
pub fn build_extended_graphs(h: &Hierarchy, labels: &InstanceLabels) -> Result<ExtendedGraphs> {
    let mut pools = Pools::default();
    fill_side(h, labels.truth(), labels.predicted(), true, &mut pools)?;
    fill_side(h, labels.predicted(), labels.truth(), false, &mut pools)?;
    for pool in pools.cross_t.values_mut().chain(pools.cross_p.values_mut()) {
        pool.sort_unstable();
        pool.dedup();
    }

    let mut g_ex_t = Subgraph::default();
    for paths in pools.own_t.values().chain(pools.cross_t.values()) {
        for p in paths {
            g_ex_t.add_path(h, p);
        }
    }
    let mut g_ex_p = Subgraph::default();
    for paths in pools.own_p.values().chain(pools.cross_p.values()) {
        for p in paths {
            g_ex_p.add_path(h, p);
        }
    }

    let mut lca_all = BTreeSet::new();
    for lcas in pools.t_lcas.values().chain(pools.p_lcas.values()) {
        lca_all.extend(lcas.iter().copied());
    }
    Ok(ExtendedGraphs {
        g_ex_t,
        g_ex_p,
        lca_all,
        pools,
    })
}

/// Fill the pools for one side: `members` are related to `others`.
///
/// With `truth_side` set, `members` are true labels, their own paths feed
/// the true-side pools, and the extracted label-to-LCA subpaths feed the
/// predicted side's cross pools (and vice versa).
fn fill_side(
    h: &Hierarchy,
    members: &[NodeId],
    others: &[NodeId],
    truth_side: bool,
    pools: &mut Pools,
) -> Result<()> {
    for &label in members {
        let relation = h.lca_of_set(label, others)?;
        if relation.lcas.is_empty() {
            return Err(Error::Invalid(format!(
                "label {label} connects to the other label set only through shared \
                 descendants, so it has no lowest common ancestor; rerun with an LCA \
                 distance threshold to bridge such labels"
            )));
        }
        let lca_set: BTreeSet<NodeId> = relation.lcas.iter().copied().collect();

        for &a in &relation.lcas {
            let paths = h.shortest_paths(label, a, None)?.paths().to_vec();
            let own = if truth_side { &mut pools.own_t } else { &mut pools.own_p };
            own.insert((label, a), paths);
        }

        // Subpaths from this label's best counterparts up to its LCAs feed
        // the cross pools of the opposite side.
        for &best in &relation.s_best {
            for path in h.shortest_paths(label, best, None)?.paths() {
                for &a in &lca_set {
                    if let Some(pos) = path.iter().position(|&n| n == a) {
                        let mut segment: Vec<NodeId> = path[pos..].to_vec();
                        segment.reverse();
                        let cross = if truth_side {
                            &mut pools.cross_p
                        } else {
                            &mut pools.cross_t
                        };
                        cross.entry(a).or_default().push(segment);
                    }
                }
            }
        }

        let lcas_map = if truth_side { &mut pools.t_lcas } else { &mut pools.p_lcas };
        lcas_map.insert(label, lca_set);
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// Minimal-graph selection
// ---------------------------------------------------------------------------

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
enum Side {
    Truth,
    Predicted,
}

/// One path that must be placed in a minimal graph: either a covered label
/// connecting to a chosen LCA on its own side, or (`label` = `None`) a
/// cross-side connection for an LCA that covers no label on that side.
#[derive(Debug)]
struct Requirement {
    lca: NodeId,
    side: Side,
    label: Option<NodeId>,
    candidates: Vec<Vec<NodeId>>,
}

/// Select the minimal graphs from the extended graphs.
///
/// LCAs are ranked by how many labels of both sides they cover (ties to the
/// smaller id), taken greedily until every label is covered, then thinned
/// by a top-down and a bottom-up redundancy pass. Each surviving obligation
/// picks the candidate path sharing the most nodes with the paths already
/// selected, most-constrained obligations first, ties to the
/// lexicographically smallest node sequence.
pub fn select_minimal_graphs(h: &Hierarchy, extended: &ExtendedGraphs) -> LcaGraphs {
    let pools = &extended.pools;
    let mut coverage: BTreeMap<NodeId, usize> = BTreeMap::new();
    for lcas in pools.t_lcas.values().chain(pools.p_lcas.values()) {
        for &a in lcas {
            *coverage.entry(a).or_insert(0) += 1;
        }
    }
    let mut order: Vec<NodeId> = extended.lca_all.iter().copied().collect();
    order.sort_by_key(|a| (std::cmp::Reverse(coverage.get(a).copied().unwrap_or(0)), *a));

    let satisfied = |chosen: &BTreeSet<NodeId>| {
        pools
            .t_lcas
            .values()
            .chain(pools.p_lcas.values())
            .all(|lcas| lcas.iter().any(|a| chosen.contains(a)))
    };

    let mut chosen: BTreeSet<NodeId> = BTreeSet::new();
    for &a in &order {
        if satisfied(&chosen) {
            break;
        }
        chosen.insert(a);
    }
    for pass in [false, true] {
        let mut snapshot: Vec<NodeId> =
            order.iter().copied().filter(|a| chosen.contains(a)).collect();
        if pass {
            snapshot.reverse();
        }
        for a in snapshot {
            chosen.remove(&a);
            if !satisfied(&chosen) {
                chosen.insert(a);
            }
        }
    }

    let mut requirements: Vec<Requirement> = Vec::new();
    for &a in &chosen {
        for (side, lcas_map, own, cross) in [
            (Side::Truth, &pools.t_lcas, &pools.own_t, &pools.cross_t),
            (Side::Predicted, &pools.p_lcas, &pools.own_p, &pools.cross_p),
        ] {
            let covered: Vec<NodeId> = lcas_map
                .iter()
                .filter(|(_, lcas)| lcas.contains(&a))
                .map(|(&label, _)| label)
                .collect();
            if covered.is_empty() {
                // The LCA was chosen for the other side only; it still must
                // appear in this graph connected to one of this side's
                // labels.
                let candidates = cross.get(&a).cloned().unwrap_or_default();
                if !candidates.is_empty() {
                    requirements.push(Requirement {
                        lca: a,
                        side,
                        label: None,
                        candidates,
                    });
                }
            } else {
                for label in covered {
                    requirements.push(Requirement {
                        lca: a,
                        side,
                        label: Some(label),
                        candidates: own.get(&(label, a)).cloned().unwrap_or_default(),
                    });
                }
            }
        }
    }
    requirements.sort_by_key(|r| {
        (
            r.candidates.len(),
            r.lca,
            r.side,
            r.label.unwrap_or(NodeId::MIN),
        )
    });

    let mut selected_nodes: HashSet<NodeId> = HashSet::new();
    let mut g_t = Subgraph::default();
    let mut g_p = Subgraph::default();
    for req in &requirements {
        // Candidate pools are lexicographically sorted, so keeping the first
        // maximum resolves sharing ties toward the smallest node sequence.
        let mut best: Option<(usize, &Vec<NodeId>)> = None;
        for cand in &req.candidates {
            let shared = cand.iter().filter(|n| selected_nodes.contains(n)).count();
            if best.is_none_or(|(s, _)| shared > s) {
                best = Some((shared, cand));
            }
        }
        let Some((_, best)) = best else {
            continue;
        };
        selected_nodes.extend(best.iter().copied());
        let target = match req.side {
            Side::Truth => &mut g_t,
            Side::Predicted => &mut g_p,
        };
        target.add_path(h, best);
    }

    LcaGraphs {
        g_ex_t: extended.g_ex_t.clone(),
        g_ex_p: extended.g_ex_p.clone(),
        g_t,
        g_p,
        chosen_lcas: chosen,
    }
}

// ---------------------------------------------------------------------------
// Distance threshold
// ---------------------------------------------------------------------------

/// A per-instance evaluation hierarchy produced by [`threshold_view`].
#[derive(Debug, Clone)]
pub struct EvalView {
    pub hierarchy: Hierarchy,
    /// Set when the instance required the artificial joining node.
    pub artificial: Option<NodeId>,
}

/// Build the per-instance hierarchy view for distance threshold `t`.
///
/// `t` bounds the label-to-LCA distance. A true/predicted pair is *far*
/// when the two labels share no ancestor-or-self within `t` edges of each.
/// Instances without far pairs keep the original structure, restricted to
/// the union of radius-`t` neighborhoods of the labels (every path any
/// measure can use lies inside it). Instances with a far pair are rewritten:
/// each label keeps its ancestor cone to depth `t − 1`, and one artificial
/// node ([`ARTIFICIAL_NODE`]) becomes the parent of every label's deepest
/// retained ancestor layer (or of the label itself when it has none),
/// forcing a shared ancestor at distance at most `t`. The artificial node
/// joins graphs and augmented sets like any other node but is never a
/// label.
///
/// # Errors
///
/// [`Error::Invalid`] when `t` is zero; [`Error::UnknownNode`] for labels
/// missing from the hierarchy.
pub fn threshold_view(h: &Hierarchy, labels: &InstanceLabels, t: usize) -> Result<EvalView> {
    if t == 0 {
        return Err(Error::Invalid(
            "the LCA distance threshold must be at least 1".to_string(),
        ));
    }
    let all: Vec<NodeId> = {
        let mut v: Vec<NodeId> = labels
            .truth()
            .iter()
            .chain(labels.predicted().iter())
            .copied()
            .collect();
        v.sort_unstable();
        v.dedup();
        v
    };

    let mut cones: BTreeMap<NodeId, BTreeSet<NodeId>> = BTreeMap::new();
    for &l in &all {
        let mut cone: BTreeSet<NodeId> = h.ancestors_within(l, t)?.into_keys().collect();
        cone.insert(l);
        cones.insert(l, cone);
    }
    let far = labels.truth().iter().any(|y| {
        labels
            .predicted()
            .iter()
            .any(|p| cones[y].is_disjoint(&cones[p]))
    });

    if !far {
        let mut keep: BTreeSet<NodeId> = BTreeSet::new();
        for &l in &all {
            keep.extend(h.undirected_ball(l, t)?);
        }
        return Ok(EvalView {
            hierarchy: h.induced_subgraph(&keep),
            artificial: None,
        });
    }

    let mut keep: BTreeSet<NodeId> = BTreeSet::new();
    let mut frontier: BTreeSet<NodeId> = BTreeSet::new();
    for &l in &all {
        keep.insert(l);
        let cone = h.ancestors_within(l, t - 1)?;
        keep.extend(cone.keys().copied());
        match cone.values().max().copied() {
            Some(deepest) => frontier.extend(
                cone.iter()
                    .filter(|&(_, &d)| d == deepest)
                    .map(|(&n, _)| n),
            ),
            None => {
                frontier.insert(l);
            }
        }
    }

    let truncated = h.induced_subgraph(&keep);
    let mut ids: Vec<NodeId> = truncated.node_ids().to_vec();
    ids.push(ARTIFICIAL_NODE);
    let mut edges = truncated.edges();
    for &f in &frontier {
        edges.push((ARTIFICIAL_NODE, f, 1.0));
    }
    let hierarchy = Hierarchy::from_parts(&ids, &edges)?;
    Ok(EvalView {
        hierarchy,
        artificial: Some(ARTIFICIAL_NODE),
    })
}
