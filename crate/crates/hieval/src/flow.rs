//! Integral minimum-cost flow over the label pairing network.
//!
//! Pairing a predicted label set against a true label set is expressed as a
//! circulation problem: every predicted node must send between `pred_lower`
//! and `pred_upper` units, every true node must receive between `true_lower`
//! and `true_upper` units, an individual predicted/true pair can carry at
//! most one unit at the cost given by a [`CostMatrix`], and two default
//! nodes absorb whatever cannot be paired at the fixed default cost. Lower
//! bounds are removed by the standard excess-node reduction and the
//! remaining problem is solved with successive shortest paths using vertex
//! potentials, so all intermediate costs stay non-negative and flows stay
//! integral.

use crate::{Error, Result};

const COST_EPS: f64 = 1e-9;

// ---------------------------------------------------------------------------
// Inputs
// ---------------------------------------------------------------------------

/// Pairing costs between predicted rows and true columns.
///
/// `None` marks a forbidden pair (disconnected labels or a distance over the
/// configured cap); such pairs can only be served by the default nodes. The
/// column count is explicit so a zero-row matrix still has a defined width.
#[derive(Debug, Clone, PartialEq)]
pub struct CostMatrix {
    entries: Vec<Vec<Option<f64>>>,
    true_count: usize,
    default_cost: f64,
}

impl CostMatrix {
    /// Validate and wrap a rectangular cost matrix with `true_count`
    /// columns.
    ///
    /// # Errors
    ///
    /// Rejects rows of the wrong width, negative or non-finite entry costs,
    /// and a negative or non-finite default cost.
    pub fn new(
        entries: Vec<Vec<Option<f64>>>,
        true_count: usize,
        default_cost: f64,
    ) -> Result<Self> {
        if !(default_cost.is_finite() && default_cost >= 0.0) {
            return Err(Error::Invalid(format!(
                "default pairing cost must be finite and non-negative, found {default_cost}"
            )));
        }
        for (i, row) in entries.iter().enumerate() {
            if row.len() != true_count {
                return Err(Error::Invalid(format!(
                    "cost matrix row {i} has {} entries, expected {true_count}",
                    row.len()
                )));
            }
            for (j, entry) in row.iter().enumerate() {
                if let Some(c) = entry {
                    if !(c.is_finite() && *c >= 0.0) {
                        return Err(Error::Invalid(format!(
                            "cost matrix entry ({i}, {j}) must be finite and non-negative, found {c}"
                        )));
                    }
                }
            }
        }
        Ok(Self {
            entries,
            true_count,
            default_cost,
        })
    }

    /// Number of predicted rows.
    pub fn pred_count(&self) -> usize {
        self.entries.len()
    }

    /// Number of true columns.
    pub fn true_count(&self) -> usize {
        self.true_count
    }

    /// Cost of pairing predicted row `i` with true column `j`.
    pub fn get(&self, i: usize, j: usize) -> Option<f64> {
        self.entries[i][j]
    }

    /// Cost charged per unit routed through a default node.
    pub fn default_cost(&self) -> f64 {
        self.default_cost
    }
}

/// Per-node degree bounds for the two sides of the pairing network.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairingBounds {
    /// Minimum units each predicted node must send.
    pub pred_lower: i64,
    /// Maximum units each predicted node may send.
    pub pred_upper: i64,
    /// Minimum units each true node must receive.
    pub true_lower: i64,
    /// Maximum units each true node may receive.
    pub true_upper: i64,
}

impl PairingBounds {
    /// Exactly one unit per node on both sides: a perfect pairing where the
    /// defaults absorb the size mismatch.
    pub fn one_to_one() -> Self {
        Self {
            pred_lower: 1,
            pred_upper: 1,
            true_lower: 1,
            true_upper: 1,
        }
    }

    /// At least one unit per node, with enough headroom for any node to
    /// cover the entire opposite side.
    pub fn covering(pred_count: usize, true_count: usize) -> Self {
        Self {
            pred_lower: 1,
            pred_upper: (true_count as i64).max(1),
            true_lower: 1,
            true_upper: (pred_count as i64).max(1),
        }
    }

    fn validate(&self) -> Result<()> {
        let pairs = [
            ("predicted", self.pred_lower, self.pred_upper),
            ("true", self.true_lower, self.true_upper),
        ];
        for (side, lower, upper) in pairs {
            if lower < 0 || upper < lower {
                return Err(Error::Invalid(format!(
                    "{side}-side bounds [{lower}, {upper}] are not a valid interval"
                )));
            }
        }
        Ok(())
    }
}

/// When a node may route through the default nodes.
///
/// Under [`DefaultPolicy::Always`] every node has a default edge and the
/// default cost competes with real pairing costs, so a node whose cheapest
/// real pair costs more than the default will default. Under
/// [`DefaultPolicy::LastResort`] a node keeps its default edge only when it
/// has no admissible pair at all (every matrix entry in its row or column is
/// `None`): a label that can be paired must be paired, however expensive.
///
/// `LastResort` is meant for covering bounds, where the opposite side has
/// enough headroom to absorb forced pairs. Combined with tight upper bounds
/// it can make the circulation infeasible, which surfaces as an error from
/// [`solve_pairing`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum DefaultPolicy {
    /// Default edges are always present and compete on cost.
    #[default]
    Always,
    /// Default edges exist only for nodes with no admissible pair.
    LastResort,
}

// ---------------------------------------------------------------------------
// Solution
// ---------------------------------------------------------------------------

/// An optimal integral pairing.
#[derive(Debug, Clone, PartialEq)]
pub struct PairingSolution {
    /// Total routing cost, including default-node traffic.
    pub total_cost: f64,
    /// Units on each predicted/true pair; `pair_flows[i][j]` is 0 or 1.
    pub pair_flows: Vec<Vec<i64>>,
    /// Units each predicted node routed to the default true node.
    pub pred_default: Vec<i64>,
    /// Units each true node received from the default predicted node.
    pub true_default: Vec<i64>,
}

impl PairingSolution {
    /// Total units absorbed by the two default nodes.
    pub fn default_units(&self) -> i64 {
        self.pred_default.iter().sum::<i64>() + self.true_default.iter().sum::<i64>()
    }
}

/// Solve the pairing circulation for one instance.
///
/// # Errors
///
/// [`Error::Invalid`] for inconsistent bound intervals or when the bounds
/// and default policy admit no feasible circulation.
pub fn solve_pairing(
    matrix: &CostMatrix,
    bounds: PairingBounds,
    policy: DefaultPolicy,
) -> Result<PairingSolution> {
    bounds.validate()?;
    let m = matrix.pred_count();
    let n = matrix.true_count();
    if m == 0 && n == 0 {
        return Ok(PairingSolution {
            total_cost: 0.0,
            pair_flows: Vec::new(),
            pred_default: Vec::new(),
            true_default: Vec::new(),
        });
    }

    // Node layout: source, predicted nodes, true nodes, default true,
    // default predicted, sink.
    let source = 0usize;
    let pred = |i: usize| 1 + i;
    let truth = |j: usize| 1 + m + j;
    let default_true = 1 + m + n;
    let default_pred = 2 + m + n;
    let sink = 3 + m + n;
    let node_count = 4 + m + n;

    // A node may default either unconditionally or, under the last-resort
    // policy, only when its whole row or column is forbidden.
    let row_pairable: Vec<bool> = (0..m)
        .map(|i| (0..n).any(|j| matrix.get(i, j).is_some()))
        .collect();
    let col_pairable: Vec<bool> = (0..n)
        .map(|j| (0..m).any(|i| matrix.get(i, j).is_some()))
        .collect();
    let may_default = |pairable: bool| policy == DefaultPolicy::Always || !pairable;

    let mut net = Circulation::new(node_count);
    let side_cap = bounds.true_upper * n as i64 + bounds.pred_upper * m as i64;
    net.add_edge(sink, source, 0, side_cap, 0.0);
    for i in 0..m {
        net.add_edge(source, pred(i), bounds.pred_lower, bounds.pred_upper, 0.0);
    }
    net.add_edge(source, default_pred, 0, bounds.true_upper * n as i64, 0.0);
    let mut pair_edges = Vec::with_capacity(m * n);
    for i in 0..m {
        for j in 0..n {
            let handle = matrix
                .get(i, j)
                .map(|cost| net.add_edge(pred(i), truth(j), 0, 1, cost));
            pair_edges.push(handle);
        }
    }
    let mut pred_default_edges = Vec::with_capacity(m);
    for (i, &pairable) in row_pairable.iter().enumerate() {
        let handle = may_default(pairable).then(|| {
            net.add_edge(
                pred(i),
                default_true,
                0,
                bounds.pred_upper,
                matrix.default_cost(),
            )
        });
        pred_default_edges.push(handle);
    }
    let mut true_default_edges = Vec::with_capacity(n);
    for (j, &pairable) in col_pairable.iter().enumerate() {
        let handle = may_default(pairable).then(|| {
            net.add_edge(
                default_pred,
                truth(j),
                0,
                bounds.true_upper,
                matrix.default_cost(),
            )
        });
        true_default_edges.push(handle);
    }
    for j in 0..n {
        net.add_edge(truth(j), sink, bounds.true_lower, bounds.true_upper, 0.0);
    }
    net.add_edge(default_true, sink, 0, bounds.pred_upper * m as i64, 0.0);

    let total_cost = net.solve()?;

    let mut pair_flows = vec![vec![0i64; n]; m];
    for (idx, handle) in pair_edges.iter().enumerate() {
        if let Some(h) = handle {
            pair_flows[idx / n][idx % n] = net.flow(*h);
        }
    }
    let edge_flow = |h: &Option<EdgeHandle>| h.map_or(0, |h| net.flow(h));
    let pred_default = pred_default_edges.iter().map(edge_flow).collect();
    let true_default = true_default_edges.iter().map(edge_flow).collect();

    Ok(PairingSolution {
        total_cost,
        pair_flows,
        pred_default,
        true_default,
    })
}

// ---------------------------------------------------------------------------
// Circulation with lower bounds
// ---------------------------------------------------------------------------

/// Handle to an edge added to a [`Circulation`].
#[derive(Debug, Clone, Copy)]
struct EdgeHandle {
    node: usize,
    slot: usize,
    lower: i64,
}

#[derive(Debug, Clone)]
struct Edge {
    to: usize,
    rev: usize,
    cap: i64,
    cap0: i64,
    cost: f64,
}

/// Minimum-cost circulation with per-edge capacity intervals.
#[derive(Debug)]
struct Circulation {
    graph: Vec<Vec<Edge>>,
    excess: Vec<i64>,
    base_cost: f64,
}

impl Circulation {
    fn new(nodes: usize) -> Self {
        Self {
            graph: vec![Vec::new(); nodes],
            excess: vec![0; nodes],
            base_cost: 0.0,
        }
    }

    /// Add an edge carrying between `lower` and `upper` units at `cost` per
    /// unit. The mandatory `lower` units are charged immediately and
    /// replaced by node excess, leaving a plain capacitated edge.
    fn add_edge(&mut self, from: usize, to: usize, lower: i64, upper: i64, cost: f64) -> EdgeHandle {
        debug_assert!(0 <= lower && lower <= upper);
        if lower > 0 {
            self.excess[to] += lower;
            self.excess[from] -= lower;
            self.base_cost += cost * lower as f64;
        }
        let slot = self.graph[from].len();
        let rev_slot = self.graph[to].len() + usize::from(from == to);
        self.graph[from].push(Edge {
            to,
            rev: rev_slot,
            cap: upper - lower,
            cap0: upper - lower,
            cost,
        });
        self.graph[to].push(Edge {
            to: from,
            rev: slot,
            cap: 0,
            cap0: 0,
            cost: -cost,
        });
        EdgeHandle { node: from, slot, lower }
    }

    /// Units carried by an edge in the solved circulation.
    fn flow(&self, h: EdgeHandle) -> i64 {
        let e = &self.graph[h.node][h.slot];
        h.lower + (e.cap0 - e.cap)
    }

    /// Saturate all node excess at minimum cost.
    ///
    /// # Errors
    ///
    /// [`Error::Invalid`] when the excess cannot be fully routed, meaning
    /// the original lower bounds admit no circulation.
    fn solve(&mut self) -> Result<f64> {
        let n = self.graph.len();
        let super_source = n;
        let super_sink = n + 1;
        self.graph.push(Vec::new());
        self.graph.push(Vec::new());
        let mut required = 0i64;
        for v in 0..n {
            let e = self.excess[v];
            if e > 0 {
                required += e;
                self.add_plain_edge(super_source, v, e, 0.0);
            } else if e < 0 {
                self.add_plain_edge(v, super_sink, -e, 0.0);
            }
        }
        let (routed, cost) = self.successive_shortest_paths(super_source, super_sink);
        if routed < required {
            return Err(Error::Invalid(
                "pairing bounds admit no feasible circulation".to_string(),
            ));
        }
        Ok(self.base_cost + cost)
    }

    fn add_plain_edge(&mut self, from: usize, to: usize, cap: i64, cost: f64) {
        let slot = self.graph[from].len();
        let rev_slot = self.graph[to].len();
        self.graph[from].push(Edge { to, rev: rev_slot, cap, cap0: cap, cost });
        self.graph[to].push(Edge {
            to: from,
            rev: slot,
            cap: 0,
            cap0: 0,
            cost: -cost,
        });
    }

    /// Min-cost max-flow by repeated shortest augmenting paths. Vertex
    /// potentials keep reduced costs non-negative, so Dijkstra applies; all
    /// input costs are non-negative, so the initial zero potential is valid.
    fn successive_shortest_paths(&mut self, s: usize, t: usize) -> (i64, f64) {
        use std::cmp::Reverse;
        use std::collections::BinaryHeap;

        let n = self.graph.len();
        let mut potential = vec![0.0f64; n];
        let mut total_flow = 0i64;
        let mut total_cost = 0.0f64;

        loop {
            let mut dist = vec![f64::INFINITY; n];
            let mut prev: Vec<Option<(usize, usize)>> = vec![None; n];
            let mut heap: BinaryHeap<Reverse<(OrdF64, usize)>> = BinaryHeap::new();
            dist[s] = 0.0;
            heap.push(Reverse((OrdF64(0.0), s)));

            while let Some(Reverse((OrdF64(d), v))) = heap.pop() {
                if d > dist[v] + COST_EPS {
                    continue;
                }
                for (slot, e) in self.graph[v].iter().enumerate() {
                    if e.cap <= 0 || !dist[v].is_finite() {
                        continue;
                    }
                    let nd = dist[v] + e.cost + potential[v] - potential[e.to];
                    if nd < dist[e.to] - COST_EPS {
                        dist[e.to] = nd;
                        prev[e.to] = Some((v, slot));
                        heap.push(Reverse((OrdF64(nd), e.to)));
                    }
                }
            }

            if !dist[t].is_finite() {
                break;
            }
            for v in 0..n {
                if dist[v].is_finite() {
                    potential[v] += dist[v];
                }
            }

            let mut bottleneck = i64::MAX;
            let mut v = t;
            while let Some((u, slot)) = prev[v] {
                bottleneck = bottleneck.min(self.graph[u][slot].cap);
                v = u;
            }
            debug_assert!(bottleneck > 0 && bottleneck < i64::MAX);

            let mut v = t;
            while let Some((u, slot)) = prev[v] {
                total_cost += self.graph[u][slot].cost * bottleneck as f64;
                self.graph[u][slot].cap -= bottleneck;
                let rev = self.graph[u][slot].rev;
                self.graph[v][rev].cap += bottleneck;
                v = u;
            }
            total_flow += bottleneck;
        }

        (total_flow, total_cost)
    }
}

/// Totally ordered f64 wrapper for the Dijkstra heap.
#[derive(Debug, Clone, Copy, PartialEq)]
struct OrdF64(f64);

impl Eq for OrdF64 {}

impl Ord for OrdF64 {
    fn cmp(&self, other: &Self) -> std::cmp::Ordering {
        self.0.total_cmp(&other.0)
    }
}

impl PartialOrd for OrdF64 {
    fn partial_cmp(&self, other: &Self) -> Option<std::cmp::Ordering> {
        Some(self.cmp(other))
    }
}
