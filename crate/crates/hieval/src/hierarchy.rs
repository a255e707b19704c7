//! Class hierarchies: parsing, normalization, and graph queries.
//!
//! A [`Hierarchy`] is a directed graph of `parent -> child` edges over
//! integer node ids, optionally weighted (default weight 1.0). Evaluation
//! measures treat it as a DAG; [`Hierarchy::normalize_to_dag`] removes back
//! edges deterministically when the input contains cycles.
//!
//! Connecting paths between nodes are computed on the undirected underlying
//! graph with no shape restriction, so a shortest path may descend through a
//! shared child as well as climb through a shared ancestor. All query
//! results are deterministic: adjacency is kept sorted by node id and path
//! sets are returned in lexicographic order.

use std::collections::hash_map::Entry;
use std::collections::{BTreeMap, BTreeSet, BinaryHeap, HashMap, HashSet, VecDeque};

use crate::{Error, Result};

/// External node identifier.
///
/// File-supplied ids are non-negative; negative ids are reserved for
/// artificial nodes created by the LCA threshold operation so they can never
/// collide with real labels.
pub type NodeId = i64;

/// Tolerance for comparing path costs (exact for unit-weight hierarchies).
pub(crate) const COST_EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Hierarchy
// ---------------------------------------------------------------------------

/// A directed class hierarchy with weighted edges.
#[derive(Debug, Clone)]
pub struct Hierarchy {
    /// Internal index -> external id, ascending.
    ids: Vec<NodeId>,
    /// External id -> internal index.
    index: HashMap<NodeId, u32>,
    /// Parent adjacency: `parents[v]` lists `(parent, weight)` sorted by id.
    parents: Vec<Vec<(u32, f64)>>,
    /// Child adjacency: `children[v]` lists `(child, weight)` sorted by id.
    children: Vec<Vec<(u32, f64)>>,
    /// Undirected adjacency (parents and children merged, sorted by id).
    neighbors: Vec<Vec<(u32, f64)>>,
}

impl Hierarchy {
    /// Build a hierarchy from an explicit node set plus weighted edges.
    ///
    /// Nodes mentioned only in `ids` (with no incident edge) are kept as
    /// isolated nodes.
    ///
    /// # Errors
    ///
    /// Rejects self-edges, non-positive or non-finite weights, duplicate
    /// edges with conflicting weights, and edges over nodes missing from
    /// `ids`.
    pub fn from_parts(ids: &[NodeId], edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let id_set: BTreeSet<NodeId> = ids.iter().copied().collect();
        let ids: Vec<NodeId> = id_set.into_iter().collect();
        let index: HashMap<NodeId, u32> = ids
            .iter()
            .enumerate()
            .map(|(i, &id)| (id, i as u32))
            .collect();

        let n = ids.len();
        let mut parents: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut children: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        let mut seen: HashMap<(u32, u32), f64> = HashMap::new();

        for &(p, c, w) in edges {
            if p == c {
                return Err(Error::Invalid(format!("self-edge on node {p}")));
            }
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Invalid(format!("edge {p} -> {c} has invalid weight {w}")));
            }
            let pi = *index
                .get(&p)
                .ok_or(Error::UnknownNode(p))?;
            let ci = *index
                .get(&c)
                .ok_or(Error::UnknownNode(c))?;
            match seen.get(&(pi, ci)) {
                Some(&prev) if prev != w => {
                    return Err(Error::Invalid(format!(
                        "duplicate edge {p} -> {c} with conflicting weights {prev} and {w}"
                    )));
                }
                Some(_) => continue,
                None => {
                    seen.insert((pi, ci), w);
                }
            }
            children[pi as usize].push((ci, w));
            parents[ci as usize].push((pi, w));
        }

        for adj in parents.iter_mut().chain(children.iter_mut()) {
            adj.sort_unstable_by_key(|&(v, _)| v);
        }

        let mut neighbors: Vec<Vec<(u32, f64)>> = vec![Vec::new(); n];
        for v in 0..n {
            let mut merged: BTreeMap<u32, f64> = BTreeMap::new();
            for &(u, w) in parents[v].iter().chain(children[v].iter()) {
                let entry = merged.entry(u).or_insert(w);
                if w < *entry {
                    *entry = w;
                }
            }
            neighbors[v] = merged.into_iter().collect();
        }

        Ok(Self {
            ids,
            index,
            parents,
            children,
            neighbors,
        })
    }

    /// Build a hierarchy whose node set is exactly the edge endpoints.
    pub fn from_weighted_edges(edges: &[(NodeId, NodeId, f64)]) -> Result<Self> {
        let ids: Vec<NodeId> = edges
            .iter()
            .flat_map(|&(p, c, _)| [p, c])
            .collect();
        Self::from_parts(&ids, edges)
    }

    /// Build an unweighted hierarchy (every edge gets weight 1.0).
    pub fn from_edges(edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let weighted: Vec<(NodeId, NodeId, f64)> =
            edges.iter().map(|&(p, c)| (p, c, 1.0)).collect();
        Self::from_weighted_edges(&weighted)
    }

    /// Number of nodes.
    pub fn node_count(&self) -> usize {
        self.ids.len()
    }

    /// Number of directed edges.
    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// All node ids in ascending order.
    pub fn node_ids(&self) -> &[NodeId] {
        &self.ids
    }

    /// Whether `id` names a node of this hierarchy.
    pub fn contains(&self, id: NodeId) -> bool {
        self.index.contains_key(&id)
    }

    /// All directed edges as `(parent, child, weight)`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId, f64)> {
        let mut out = Vec::with_capacity(self.edge_count());
        for (p, adj) in self.children.iter().enumerate() {
            for &(c, w) in adj {
                out.push((self.ids[p], self.ids[c as usize], w));
            }
        }
        out.sort_unstable_by_key(|&(p, c, _)| (p, c));
        out
    }

    /// Direct parents of `id`, ascending.
    pub fn parents_of(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let v = self.idx(id)?;
        Ok(self.parents[v as usize]
            .iter()
            .map(|&(u, _)| self.ids[u as usize])
            .collect())
    }

    /// Direct children of `id`, ascending.
    pub fn children_of(&self, id: NodeId) -> Result<Vec<NodeId>> {
        let v = self.idx(id)?;
        Ok(self.children[v as usize]
            .iter()
            .map(|&(u, _)| self.ids[u as usize])
            .collect())
    }

    /// Nodes with no parent, ascending. Multiple roots are allowed.
    pub fn roots(&self) -> Vec<NodeId> {
        (0..self.ids.len())
            .filter(|&v| self.parents[v].is_empty())
            .map(|v| self.ids[v])
            .collect()
    }

    /// True when the directed graph contains no cycle.
    pub fn is_acyclic(&self) -> bool {
        let n = self.ids.len();
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut seen = 0usize;
        while let Some(v) = queue.pop_front() {
            seen += 1;
            for &(c, _) in &self.children[v] {
                indeg[c as usize] -= 1;
                if indeg[c as usize] == 0 {
                    queue.push_back(c as usize);
                }
            }
        }
        seen == n
    }

    /// Longest root-to-node hop distance over all nodes, ignoring weights.
    ///
    /// Returns 0 for a single-node or empty hierarchy. Only meaningful on a
    /// DAG.
    pub fn max_depth(&self) -> usize {
        let n = self.ids.len();
        let mut depth = vec![0usize; n];
        let mut indeg: Vec<usize> = (0..n).map(|v| self.parents[v].len()).collect();
        let mut queue: VecDeque<usize> = (0..n).filter(|&v| indeg[v] == 0).collect();
        let mut best = 0usize;
        while let Some(v) = queue.pop_front() {
            best = best.max(depth[v]);
            for &(c, _) in &self.children[v] {
                let c = c as usize;
                depth[c] = depth[c].max(depth[v] + 1);
                indeg[c] -= 1;
                if indeg[c] == 0 {
                    queue.push_back(c);
                }
            }
        }
        best
    }

    /// Remove cycle-closing edges, returning the acyclic hierarchy and the
    /// removed edges in discovery order.
    ///
    /// Traversal is a depth-first search started from each root in ascending
    /// id order (from the lowest-id node when no root exists), visiting
    /// children in ascending id order; any edge that closes back onto the
    /// active DFS stack is dropped. Remaining unvisited nodes (cycles not
    /// reachable from any root) are processed the same way in ascending id
    /// order. The result is identical across runs for identical input.
    pub fn normalize_to_dag(&self) -> (Hierarchy, Vec<(NodeId, NodeId)>) {
        const WHITE: u8 = 0;
        const GRAY: u8 = 1;
        const BLACK: u8 = 2;

        let n = self.ids.len();
        let mut color = vec![WHITE; n];
        let mut removed: Vec<(NodeId, NodeId)> = Vec::new();
        let mut removed_set: HashSet<(u32, u32)> = HashSet::new();

        let mut starts: Vec<usize> = (0..n).filter(|&v| self.parents[v].is_empty()).collect();
        if starts.is_empty() && n > 0 {
            starts.push(0);
        }
        let extra: Vec<usize> = (0..n).collect();

        for &start in starts.iter().chain(extra.iter()) {
            if color[start] != WHITE {
                continue;
            }
            // Iterative DFS; the stack holds (node, next-child position).
            let mut stack: Vec<(usize, usize)> = vec![(start, 0)];
            color[start] = GRAY;
            while let Some(&mut (v, ref mut pos)) = stack.last_mut() {
                if *pos < self.children[v].len() {
                    let (c, _) = self.children[v][*pos];
                    *pos += 1;
                    let c = c as usize;
                    match color[c] {
                        WHITE => {
                            color[c] = GRAY;
                            stack.push((c, 0));
                        }
                        GRAY => {
                            removed.push((self.ids[v], self.ids[c]));
                            removed_set.insert((v as u32, c as u32));
                        }
                        _ => {}
                    }
                } else {
                    color[v] = BLACK;
                    stack.pop();
                }
            }
        }

        let mut kept: Vec<(NodeId, NodeId, f64)> = Vec::new();
        for (p, adj) in self.children.iter().enumerate() {
            for &(c, w) in adj {
                if !removed_set.contains(&(p as u32, c)) {
                    kept.push((self.ids[p], self.ids[c as usize], w));
                }
            }
        }
        let dag = Hierarchy::from_parts(&self.ids, &kept)
            .expect("edges of a valid hierarchy remain valid");
        (dag, removed)
    }

    // -----------------------------------------------------------------------
    // Closures
    // -----------------------------------------------------------------------

    /// All strict ancestors of `id` (transitive parents; `id` excluded).
    pub fn ancestors(&self, id: NodeId) -> Result<BTreeSet<NodeId>> {
        let v = self.idx(id)?;
        Ok(self
            .closure(v, &self.parents)
            .into_iter()
            .map(|u| self.ids[u as usize])
            .collect())
    }

    /// All strict descendants of `id` (transitive children; `id` excluded).
    pub fn descendants(&self, id: NodeId) -> Result<BTreeSet<NodeId>> {
        let v = self.idx(id)?;
        Ok(self
            .closure(v, &self.children)
            .into_iter()
            .map(|u| self.ids[u as usize])
            .collect())
    }

    /// Strict ancestors of `id` within `depth` parent hops, with their
    /// minimal hop depth.
    pub fn ancestors_within(&self, id: NodeId, depth: usize) -> Result<BTreeMap<NodeId, usize>> {
        let v = self.idx(id)?;
        let mut out = BTreeMap::new();
        if depth == 0 {
            return Ok(out);
        }
        let mut dist: HashMap<u32, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(v, 0);
        queue.push_back(v);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            if d == depth {
                continue;
            }
            for &(p, _) in &self.parents[u as usize] {
                if let Entry::Vacant(slot) = dist.entry(p) {
                    slot.insert(d + 1);
                    out.insert(self.ids[p as usize], d + 1);
                    queue.push_back(p);
                }
            }
        }
        Ok(out)
    }

    /// True when `a` is a strict ancestor of `b`.
    pub fn is_ancestor(&self, a: NodeId, b: NodeId) -> Result<bool> {
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        if ai == bi {
            return Ok(false);
        }
        let mut seen = HashSet::new();
        let mut queue = VecDeque::new();
        seen.insert(bi);
        queue.push_back(bi);
        while let Some(u) = queue.pop_front() {
            for &(p, _) in &self.parents[u as usize] {
                if p == ai {
                    return Ok(true);
                }
                if seen.insert(p) {
                    queue.push_back(p);
                }
            }
        }
        Ok(false)
    }

    fn closure(&self, start: u32, adj: &[Vec<(u32, f64)>]) -> HashSet<u32> {
        let mut seen: HashSet<u32> = HashSet::new();
        let mut queue = VecDeque::new();
        queue.push_back(start);
        while let Some(u) = queue.pop_front() {
            for &(x, _) in &adj[u as usize] {
                if seen.insert(x) {
                    queue.push_back(x);
                }
            }
        }
        seen.remove(&start);
        seen
    }

    pub(crate) fn ancestor_or_self_set(&self, id: NodeId) -> Result<HashSet<NodeId>> {
        let mut set: HashSet<NodeId> = self.ancestors(id)?.into_iter().collect();
        set.insert(id);
        Ok(set)
    }

    // -----------------------------------------------------------------------
    // Shortest connecting paths
    // -----------------------------------------------------------------------

    /// Minimal-cost connecting paths between `a` and `b` on the undirected
    /// underlying graph.
    ///
    /// With a `cap`, the search never expands beyond that cost and reports
    /// [`PathOutcome::ExceedsCap`] when no connection is found within it;
    /// without a cap an unconnected pair reports
    /// [`PathOutcome::Unreachable`]. All cost-minimal paths are enumerated
    /// and returned in lexicographic node-sequence order.
    pub fn shortest_paths(&self, a: NodeId, b: NodeId, cap: Option<f64>) -> Result<PathSet> {
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        if ai == bi {
            return Ok(PathSet {
                from: a,
                to: b,
                outcome: PathOutcome::Reached {
                    cost: 0.0,
                    paths: vec![vec![a]],
                },
            });
        }

        let dist = self.dijkstra(ai, Some(bi), cap);
        let target_cost = match dist.get(&bi) {
            Some(&d) => d,
            None => {
                let outcome = if cap.is_some() {
                    PathOutcome::ExceedsCap
                } else {
                    PathOutcome::Unreachable
                };
                return Ok(PathSet { from: a, to: b, outcome });
            }
        };

        // Walk tight edges backwards from b, enumerating every minimal path.
        let mut paths: Vec<Vec<NodeId>> = Vec::new();
        let mut prefix: Vec<u32> = vec![bi];
        self.collect_paths(ai, &dist, &mut prefix, &mut paths);
        for p in &mut paths {
            p.reverse();
        }
        paths.sort_unstable();
        Ok(PathSet {
            from: a,
            to: b,
            outcome: PathOutcome::Reached {
                cost: target_cost,
                paths,
            },
        })
    }

    /// Minimal connecting cost between `a` and `b`, if connected within the
    /// optional cap.
    pub fn distance(&self, a: NodeId, b: NodeId, cap: Option<f64>) -> Result<Option<f64>> {
        let ai = self.idx(a)?;
        let bi = self.idx(b)?;
        if ai == bi {
            return Ok(Some(0.0));
        }
        Ok(self.dijkstra(ai, Some(bi), cap).get(&bi).copied())
    }

    /// Minimal connecting costs from `a` to every node reachable within the
    /// optional cap, keyed by external id.
    pub fn distances_from(&self, a: NodeId, cap: Option<f64>) -> Result<BTreeMap<NodeId, f64>> {
        let ai = self.idx(a)?;
        Ok(self
            .dijkstra(ai, None, cap)
            .into_iter()
            .map(|(v, d)| (self.ids[v as usize], d))
            .collect())
    }

    fn collect_paths(
        &self,
        start: u32,
        dist: &HashMap<u32, f64>,
        prefix: &mut Vec<u32>,
        out: &mut Vec<Vec<NodeId>>,
    ) {
        let head = *prefix.last().expect("prefix is never empty");
        if head == start {
            out.push(prefix.iter().map(|&v| self.ids[v as usize]).collect());
            return;
        }
        let dh = dist[&head];
        for &(u, w) in &self.neighbors[head as usize] {
            if let Some(&du) = dist.get(&u) {
                if (du + w - dh).abs() <= COST_EPS {
                    prefix.push(u);
                    self.collect_paths(start, dist, prefix, out);
                    prefix.pop();
                }
            }
        }
    }

    /// Undirected Dijkstra from `src`; stops early once `goal` is settled.
    /// Entries beyond `cap` are never expanded or recorded.
    fn dijkstra(&self, src: u32, goal: Option<u32>, cap: Option<f64>) -> HashMap<u32, f64> {
        let mut dist: HashMap<u32, f64> = HashMap::new();
        let mut heap: BinaryHeap<HeapEntry> = BinaryHeap::new();
        dist.insert(src, 0.0);
        heap.push(HeapEntry { cost: 0.0, node: src });
        let mut goal_cost: Option<f64> = None;

        while let Some(HeapEntry { cost, node }) = heap.pop() {
            if dist.get(&node).is_some_and(|&d| cost > d + COST_EPS) {
                continue;
            }
            if let Some(gc) = goal_cost {
                // Keep settling ties so every minimal path stays
                // reconstructible, then stop.
                if cost > gc + COST_EPS {
                    break;
                }
            }
            if Some(node) == goal {
                goal_cost = Some(cost);
            }
            for &(u, w) in &self.neighbors[node as usize] {
                let nd = cost + w;
                if let Some(c) = cap {
                    if nd > c + COST_EPS {
                        continue;
                    }
                }
                if let Some(gc) = goal_cost {
                    if nd > gc + COST_EPS {
                        continue;
                    }
                }
                if dist.get(&u).is_none_or(|&d| nd < d - COST_EPS) {
                    dist.insert(u, nd);
                    heap.push(HeapEntry { cost: nd, node: u });
                }
            }
        }
        dist
    }

    // -----------------------------------------------------------------------
    // Lowest common ancestors
    // -----------------------------------------------------------------------

    /// Lowest common ancestors of `a` and `b`, derived from minimal
    /// connecting paths.
    ///
    /// For each minimal path the apex is the node on it that is an
    /// ancestor-or-self of both endpoints (kept most-specific when several
    /// qualify); the result is the union of apexes over all minimal paths,
    /// ascending. Paths without an apex (descending through a shared child)
    /// contribute nothing; `lca_pair(n, n)` is `[n]`.
    ///
    /// # Errors
    ///
    /// [`Error::Disconnected`] when no connecting path exists.
    pub fn lca_pair(&self, a: NodeId, b: NodeId) -> Result<Vec<NodeId>> {
        let paths = self.shortest_paths(a, b, None)?;
        let paths = match paths.outcome {
            PathOutcome::Reached { paths, .. } => paths,
            _ => return Err(Error::Disconnected { a, b }),
        };
        let cone_a = self.ancestor_or_self_set(a)?;
        let cone_b = self.ancestor_or_self_set(b)?;
        let mut out: BTreeSet<NodeId> = BTreeSet::new();
        for path in &paths {
            out.extend(self.path_apexes(path, &cone_a, &cone_b));
        }
        Ok(out.into_iter().collect())
    }

    /// Apexes of one connecting path: nodes on it that are ancestor-or-self
    /// of both endpoints, reduced to the most specific (no apex that has
    /// another apex of the same path as its descendant).
    pub(crate) fn path_apexes(
        &self,
        path: &[NodeId],
        cone_a: &HashSet<NodeId>,
        cone_b: &HashSet<NodeId>,
    ) -> Vec<NodeId> {
        let candidates: Vec<NodeId> = path
            .iter()
            .copied()
            .filter(|n| cone_a.contains(n) && cone_b.contains(n))
            .collect();
        match candidates.len() {
            0 | 1 => candidates,
            _ => candidates
                .iter()
                .copied()
                .filter(|&c| {
                    candidates
                        .iter()
                        .all(|&o| o == c || !self.is_ancestor(c, o).unwrap_or(false))
                })
                .collect(),
        }
    }

    /// Lowest common ancestors of node `n` against a label set `members`.
    ///
    /// `s_best` holds the members at minimal connecting cost from `n`
    /// (unreachable members are skipped); `lcas` is the union of
    /// [`Hierarchy::lca_pair`] over `s_best`. When `n` itself belongs to
    /// `members`, both are `[n]`.
    ///
    /// # Errors
    ///
    /// [`Error::Disconnected`] when no member is reachable, or
    /// [`Error::Invalid`] when `members` is empty.
    pub fn lca_of_set(&self, n: NodeId, members: &[NodeId]) -> Result<LcaResult> {
        if members.is_empty() {
            return Err(Error::Invalid(format!("no members to relate node {n} to")));
        }
        if members.contains(&n) {
            return Ok(LcaResult {
                node: n,
                s_best: vec![n],
                lcas: vec![n],
            });
        }
        let mut costs: Vec<(NodeId, f64)> = Vec::new();
        for &m in members {
            if let Some(d) = self.distance(n, m, None)? {
                costs.push((m, d));
            }
        }
        let Some(&(_, min)) = costs
            .iter()
            .min_by(|x, y| x.1.total_cmp(&y.1))
        else {
            return Err(Error::Disconnected { a: n, b: members[0] });
        };
        let mut s_best: Vec<NodeId> = costs
            .iter()
            .filter(|&&(_, d)| d <= min + COST_EPS)
            .map(|&(m, _)| m)
            .collect();
        s_best.sort_unstable();
        s_best.dedup();
        let mut lcas: BTreeSet<NodeId> = BTreeSet::new();
        for &s in &s_best {
            lcas.extend(self.lca_pair(n, s)?);
        }
        Ok(LcaResult {
            node: n,
            s_best,
            lcas: lcas.into_iter().collect(),
        })
    }

    // -----------------------------------------------------------------------
    // Subgraph extraction
    // -----------------------------------------------------------------------

    /// Induced sub-hierarchy on `keep`: those nodes plus every original edge
    /// whose endpoints both survive. Unknown ids in `keep` are ignored.
    pub fn induced_subgraph(&self, keep: &BTreeSet<NodeId>) -> Hierarchy {
        let ids: Vec<NodeId> = keep.iter().copied().filter(|&n| self.contains(n)).collect();
        let kept: HashSet<NodeId> = ids.iter().copied().collect();
        let mut edges = Vec::new();
        for &id in &ids {
            let v = self.index[&id];
            for &(c, w) in &self.children[v as usize] {
                let cid = self.ids[c as usize];
                if kept.contains(&cid) {
                    edges.push((id, cid, w));
                }
            }
        }
        Hierarchy::from_parts(&ids, &edges).expect("induced edges remain valid")
    }

    /// Node ids within `radius` undirected hops of `start`.
    pub fn undirected_ball(&self, start: NodeId, radius: usize) -> Result<BTreeSet<NodeId>> {
        let s = self.idx(start)?;
        let mut dist: HashMap<u32, usize> = HashMap::new();
        let mut queue = VecDeque::new();
        dist.insert(s, 0);
        queue.push_back(s);
        while let Some(u) = queue.pop_front() {
            let d = dist[&u];
            if d == radius {
                continue;
            }
            for &(v, _) in &self.neighbors[u as usize] {
                if let Entry::Vacant(slot) = dist.entry(v) {
                    slot.insert(d + 1);
                    queue.push_back(v);
                }
            }
        }
        Ok(dist.keys().map(|&v| self.ids[v as usize]).collect())
    }

    fn idx(&self, id: NodeId) -> Result<u32> {
        self.index
            .get(&id)
            .copied()
            .ok_or(Error::UnknownNode(id))
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct HeapEntry {
    cost: f64,
    node: u32,
}

impl Eq for HeapEntry {}

impl Ord for HeapEntry {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        // Reversed for a min-heap; equal costs pop the smaller node index
        // first so traversal order is deterministic.
        other
            .cost
            .total_cmp(&self.cost)
            .then_with(|| other.node.cmp(&self.node))
    }
}

impl PartialOrd for HeapEntry {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

// ---------------------------------------------------------------------------
// Query results
// ---------------------------------------------------------------------------

/// Result of a minimal connecting path query.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSet {
    pub from: NodeId,
    pub to: NodeId,
    pub outcome: PathOutcome,
}

/// Outcome of a minimal connecting path query.
#[derive(Debug, Clone, PartialEq)]
pub enum PathOutcome {
    /// Connected: the minimal cost and every cost-minimal node sequence,
    /// lexicographically sorted, each starting at `from` and ending at `to`.
    Reached { cost: f64, paths: Vec<Vec<NodeId>> },
    /// Not connected (no cap was set).
    Unreachable,
    /// Not connected within the configured cap.
    ExceedsCap,
}

impl PathSet {
    /// Minimal cost when connected.
    pub fn cost(&self) -> Option<f64> {
        match &self.outcome {
            PathOutcome::Reached { cost, .. } => Some(*cost),
            _ => None,
        }
    }

    /// Minimal paths when connected, empty otherwise.
    pub fn paths(&self) -> &[Vec<NodeId>] {
        match &self.outcome {
            PathOutcome::Reached { paths, .. } => paths,
            _ => &[],
        }
    }
}

/// Result of a node-against-set lowest-common-ancestor query.
#[derive(Debug, Clone, PartialEq)]
pub struct LcaResult {
    /// The queried node.
    pub node: NodeId,
    /// Set members at minimal connecting cost from `node`, ascending.
    pub s_best: Vec<NodeId>,
    /// Union of pairwise LCAs over `s_best`, ascending.
    pub lcas: Vec<NodeId>,
}

// ---------------------------------------------------------------------------
// Parsing
// ---------------------------------------------------------------------------

/// Parse the `parent child [weight]` hierarchy file format.
///
/// One edge per line; `#` starts a comment; blank lines are skipped; ids are
/// non-negative integers; the optional weight must be a positive decimal.
/// Exact duplicate lines are tolerated.
///
/// # Errors
///
/// [`Error::Malformed`] with a 1-based line number for token-count, id,
/// weight, self-edge, and conflicting-duplicate problems.
pub fn parse_hierarchy(text: &str) -> Result<Hierarchy> {
    let mut edges: Vec<(NodeId, NodeId, f64)> = Vec::new();
    let mut seen: HashMap<(NodeId, NodeId), (f64, usize)> = HashMap::new();

    for (i, raw) in text.lines().enumerate() {
        let line = i + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let tokens: Vec<&str> = content.split_whitespace().collect();
        if tokens.len() != 2 && tokens.len() != 3 {
            return Err(Error::Malformed {
                line,
                msg: format!("expected 'parent child [weight]', found {} fields", tokens.len()),
            });
        }
        let parent = parse_node_id(tokens[0], line)?;
        let child = parse_node_id(tokens[1], line)?;
        if parent == child {
            return Err(Error::Malformed {
                line,
                msg: format!("self-edge on node {parent}"),
            });
        }
        let weight = if tokens.len() == 3 {
            let w: f64 = tokens[2].parse().map_err(|_| Error::Malformed {
                line,
                msg: format!("invalid edge weight '{}'", tokens[2]),
            })?;
            if !(w.is_finite() && w > 0.0) {
                return Err(Error::Malformed {
                    line,
                    msg: format!("edge weight must be positive, found {w}"),
                });
            }
            w
        } else {
            1.0
        };
        match seen.get(&(parent, child)) {
            Some(&(prev, prev_line)) if prev != weight => {
                return Err(Error::Malformed {
                    line,
                    msg: format!(
                        "edge {parent} -> {child} already declared on line {prev_line} with weight {prev}"
                    ),
                });
            }
            Some(_) => continue,
            None => {
                seen.insert((parent, child), (weight, line));
                edges.push((parent, child, weight));
            }
        }
    }

    if edges.is_empty() {
        return Err(Error::Malformed {
            line: text.lines().count().max(1),
            msg: "hierarchy file declares no edges".to_string(),
        });
    }
    Hierarchy::from_weighted_edges(&edges).map_err(|e| match e {
        Error::Malformed { .. } => e,
        other => Error::Malformed {
            line: 0,
            msg: other.to_string(),
        },
    })
}

fn parse_node_id(token: &str, line: usize) -> Result<NodeId> {
    let id: u64 = token.parse().map_err(|_| Error::Malformed {
        line,
        msg: format!("invalid node id '{token}'"),
    })?;
    if id > i64::MAX as u64 {
        return Err(Error::Malformed {
            line,
            msg: format!("node id {id} out of range"),
        });
    }
    Ok(id as NodeId)
}
