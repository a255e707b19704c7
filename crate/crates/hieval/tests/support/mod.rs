//! Shared fixtures, brute-force oracles, and seeded generators for the
//! integration tests.
//!
//! The fixtures are small hierarchies with hand-derived expected values for
//! every measure. The oracles re-derive optimal answers by exhaustive
//! enumeration, so the production flow solver and the greedy graph selection
//! can be checked against ground truth on bounded inputs; past their budget
//! they report [`OracleOutcome::BudgetExceeded`] rather than guessing.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use hieval::flow::{CostMatrix, DefaultPolicy, PairingBounds, PairingSolution};
use hieval::hierarchy::Hierarchy;
use hieval::pair_measures::InstanceLabels;
use hieval::NodeId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

// ---------------------------------------------------------------------------
// Fixtures
// ---------------------------------------------------------------------------

/// Expected per-measure values for one fixture instance.
///
/// `tie` is `None` for multi-label instances, where the single-label path
/// cost is undefined. `mgia_raw` is the covering-pairing cost before
/// normalization.
#[derive(Debug, Clone, Copy)]
pub struct Expected {
    pub tie: Option<f64>,
    pub gie: f64,
    pub mgia_raw: f64,
    pub mgia: f64,
    pub ph: f64,
    pub rh: f64,
    pub fh: f64,
    pub sdl: f64,
    pub plca: f64,
    pub rlca: f64,
    pub flca: f64,
}

/// One golden instance: a hierarchy, a labeling, and its expected scores
/// under `d_max = 5` with no distance cap and no LCA threshold.
#[derive(Debug, Clone, Copy)]
pub struct Fixture {
    pub name: &'static str,
    pub edges: &'static [(NodeId, NodeId)],
    pub truth: &'static [NodeId],
    pub predicted: &'static [NodeId],
    pub expect: Expected,
}

impl Fixture {
    pub fn hierarchy(&self) -> Hierarchy {
        Hierarchy::from_edges(self.edges).expect("fixture edges are valid")
    }

    pub fn instance(&self) -> InstanceLabels {
        InstanceLabels::new(self.truth.to_vec(), self.predicted.to_vec())
            .expect("fixture labels are valid")
    }
}

/// Root 0 with children 1, 2; node 1 fans out into leaves 3, 4, 5.
const FAN: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (1, 4), (1, 5)];
/// Two levels below node 1: node 3 holds the leaf pair 5, 6.
const DEEP_PAIR: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (1, 4), (3, 5), (3, 6)];
/// Diamond: leaf 4 has both 1 and 2 as parents.
const DIAMOND: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 4)];
/// A single inner node 1 with the leaf pair 2, 3.
const CHAIN: &[(NodeId, NodeId)] = &[(0, 1), (1, 2), (1, 3)];
/// Diamond on 4 plus a second branch carrying 5 and 6 under node 2.
const DIAMOND_WIDE: &[(NodeId, NodeId)] =
    &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 4), (2, 5), (2, 6)];
/// Node 6 is reachable through both 4 and 5; 7 hangs off 5 alone.
const DOUBLE_ROUTE: &[(NodeId, NodeId)] =
    &[(0, 1), (0, 2), (1, 3), (2, 4), (2, 5), (4, 6), (5, 6), (5, 7)];
/// A near branch (3, 4 under 1) and a far branch (6, 7 under 5 under 2).
const SPLIT: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (1, 4), (2, 5), (5, 6), (5, 7)];
/// The far branch pushed one level deeper than in [`SPLIT`].
const SPLIT_DEEP: &[(NodeId, NodeId)] =
    &[(0, 1), (0, 2), (1, 3), (2, 4), (4, 5), (5, 6), (5, 7)];
/// Truth and predictions split directly under the root's two children.
const SPLIT_SHALLOW: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (2, 4), (2, 5)];
/// Node 1 carries the leaves 3 and 4; node 2 is a childless sibling.
const SMALL_FAN: &[(NodeId, NodeId)] = &[(0, 1), (0, 2), (1, 3), (1, 4)];
/// Multi-parent graph: 21 sits under 2 and 3, 322 under 3 and 32.
const MULTI_DAG: &[(NodeId, NodeId)] = &[
    (0, 1),
    (0, 2),
    (0, 3),
    (1, 11),
    (1, 12),
    (2, 21),
    (3, 31),
    (3, 21),
    (3, 32),
    (3, 33),
    (3, 322),
    (32, 321),
    (32, 322),
];

/// All golden instances, hand-derived measure by measure.
pub fn fixtures() -> Vec<Fixture> {
    vec![
        Fixture {
            name: "one-truth-two-sibling-preds",
            edges: FAN,
            truth: &[3],
            predicted: &[4, 5],
            expect: Expected {
                tie: None,
                gie: 7.0,
                mgia_raw: 4.0,
                mgia: 11.0 / 15.0,
                ph: 1.0 / 2.0,
                rh: 2.0 / 3.0,
                fh: 4.0 / 7.0,
                sdl: 3.0,
                plca: 1.0 / 3.0,
                rlca: 1.0 / 2.0,
                flca: 2.0 / 5.0,
            },
        },
        Fixture {
            name: "two-truths-one-sibling-pred",
            edges: FAN,
            truth: &[3, 4],
            predicted: &[5],
            expect: Expected {
                tie: None,
                gie: 7.0,
                mgia_raw: 4.0,
                mgia: 11.0 / 15.0,
                ph: 2.0 / 3.0,
                rh: 1.0 / 2.0,
                fh: 4.0 / 7.0,
                sdl: 3.0,
                plca: 1.0 / 2.0,
                rlca: 1.0 / 3.0,
                flca: 2.0 / 5.0,
            },
        },
        Fixture {
            name: "deep-sibling-pair",
            edges: DEEP_PAIR,
            truth: &[6],
            predicted: &[5],
            expect: Expected {
                tie: Some(2.0),
                gie: 2.0,
                mgia_raw: 2.0,
                mgia: 4.0 / 5.0,
                ph: 3.0 / 4.0,
                rh: 3.0 / 4.0,
                fh: 3.0 / 4.0,
                sdl: 2.0,
                plca: 1.0 / 2.0,
                rlca: 1.0 / 2.0,
                flca: 1.0 / 2.0,
            },
        },
        Fixture {
            name: "exact-hit-plus-sibling",
            edges: DEEP_PAIR,
            truth: &[6],
            predicted: &[5, 6],
            expect: Expected {
                tie: None,
                gie: 5.0,
                mgia_raw: 2.0,
                mgia: 4.0 / 5.0,
                ph: 4.0 / 5.0,
                rh: 1.0,
                fh: 8.0 / 9.0,
                sdl: 1.0,
                plca: 2.0 / 3.0,
                rlca: 1.0,
                flca: 4.0 / 5.0,
            },
        },
        Fixture {
            name: "exact-hit-plus-uncle",
            edges: DEEP_PAIR,
            truth: &[6],
            predicted: &[4, 6],
            expect: Expected {
                tie: None,
                gie: 5.0,
                mgia_raw: 3.0,
                mgia: 7.0 / 10.0,
                ph: 4.0 / 5.0,
                rh: 1.0,
                fh: 8.0 / 9.0,
                sdl: 1.0,
                plca: 2.0 / 3.0,
                rlca: 2.0 / 3.0,
                flca: 2.0 / 3.0,
            },
        },
        Fixture {
            name: "diamond-sibling",
            edges: DIAMOND,
            truth: &[3],
            predicted: &[4],
            expect: Expected {
                tie: Some(2.0),
                gie: 2.0,
                mgia_raw: 2.0,
                mgia: 4.0 / 5.0,
                ph: 1.0 / 2.0,
                rh: 2.0 / 3.0,
                fh: 4.0 / 7.0,
                sdl: 3.0,
                plca: 1.0 / 2.0,
                rlca: 1.0 / 2.0,
                flca: 1.0 / 2.0,
            },
        },
        Fixture {
            name: "chain-siblings",
            edges: CHAIN,
            truth: &[2],
            predicted: &[3],
            expect: Expected {
                tie: Some(2.0),
                gie: 2.0,
                mgia_raw: 2.0,
                mgia: 4.0 / 5.0,
                ph: 2.0 / 3.0,
                rh: 2.0 / 3.0,
                fh: 2.0 / 3.0,
                sdl: 2.0,
                plca: 1.0 / 2.0,
                rlca: 1.0 / 2.0,
                flca: 1.0 / 2.0,
            },
        },
        Fixture {
            name: "diamond-plus-far-branch",
            edges: DIAMOND_WIDE,
            truth: &[3],
            predicted: &[4, 6],
            expect: Expected {
                tie: None,
                gie: 7.0,
                mgia_raw: 6.0,
                mgia: 3.0 / 5.0,
                ph: 2.0 / 5.0,
                rh: 2.0 / 3.0,
                fh: 1.0 / 2.0,
                sdl: 4.0,
                plca: 2.0 / 5.0,
                rlca: 2.0 / 3.0,
                flca: 1.0 / 2.0,
            },
        },
        Fixture {
            name: "two-routes-far-preds",
            edges: DOUBLE_ROUTE,
            truth: &[3],
            predicted: &[6, 7],
            expect: Expected {
                tie: None,
                gie: 10.0,
                mgia_raw: 10.0,
                mgia: 1.0 / 3.0,
                ph: 1.0 / 6.0,
                rh: 1.0 / 3.0,
                fh: 2.0 / 9.0,
                sdl: 7.0,
                plca: 1.0 / 5.0,
                rlca: 1.0 / 3.0,
                flca: 1.0 / 4.0,
            },
        },
        Fixture {
            name: "near-and-far-pred",
            edges: SPLIT,
            truth: &[3],
            predicted: &[4, 7],
            expect: Expected {
                tie: None,
                gie: 7.0,
                mgia_raw: 7.0,
                mgia: 8.0 / 15.0,
                ph: 1.0 / 3.0,
                rh: 2.0 / 3.0,
                fh: 4.0 / 9.0,
                sdl: 5.0,
                plca: 1.0 / 3.0,
                rlca: 2.0 / 3.0,
                flca: 4.0 / 9.0,
            },
        },
        Fixture {
            name: "far-branch-pair",
            edges: SPLIT,
            truth: &[3],
            predicted: &[6, 7],
            expect: Expected {
                tie: None,
                gie: 10.0,
                mgia_raw: 10.0,
                mgia: 1.0 / 3.0,
                ph: 1.0 / 5.0,
                rh: 1.0 / 3.0,
                fh: 1.0 / 4.0,
                sdl: 6.0,
                plca: 1.0 / 5.0,
                rlca: 1.0 / 3.0,
                flca: 1.0 / 4.0,
            },
        },
        Fixture {
            name: "deep-far-pair",
            edges: SPLIT_DEEP,
            truth: &[3],
            predicted: &[6, 7],
            expect: Expected {
                tie: None,
                gie: 11.0,
                mgia_raw: 12.0,
                mgia: 1.0 / 5.0,
                ph: 1.0 / 6.0,
                rh: 1.0 / 3.0,
                fh: 2.0 / 9.0,
                sdl: 7.0,
                plca: 1.0 / 6.0,
                rlca: 1.0 / 3.0,
                flca: 2.0 / 9.0,
            },
        },
        Fixture {
            name: "shallow-far-pair",
            edges: SPLIT_SHALLOW,
            truth: &[3],
            predicted: &[4, 5],
            expect: Expected {
                tie: None,
                gie: 9.0,
                mgia_raw: 8.0,
                mgia: 7.0 / 15.0,
                ph: 1.0 / 4.0,
                rh: 1.0 / 3.0,
                fh: 2.0 / 7.0,
                sdl: 5.0,
                plca: 1.0 / 4.0,
                rlca: 1.0 / 3.0,
                flca: 2.0 / 7.0,
            },
        },
        Fixture {
            name: "pred-is-child-of-truth",
            edges: SMALL_FAN,
            truth: &[1],
            predicted: &[3],
            expect: Expected {
                tie: Some(1.0),
                gie: 1.0,
                mgia_raw: 1.0,
                mgia: 9.0 / 10.0,
                ph: 2.0 / 3.0,
                rh: 1.0,
                fh: 4.0 / 5.0,
                sdl: 1.0,
                plca: 1.0 / 2.0,
                rlca: 1.0,
                flca: 2.0 / 3.0,
            },
        },
        Fixture {
            name: "pred-is-parent-of-truth",
            edges: SMALL_FAN,
            truth: &[3],
            predicted: &[1],
            expect: Expected {
                tie: Some(1.0),
                gie: 1.0,
                mgia_raw: 1.0,
                mgia: 9.0 / 10.0,
                ph: 1.0,
                rh: 2.0 / 3.0,
                fh: 4.0 / 5.0,
                sdl: 1.0,
                plca: 1.0,
                rlca: 1.0 / 2.0,
                flca: 2.0 / 3.0,
            },
        },
        Fixture {
            name: "pred-is-root",
            edges: SMALL_FAN,
            truth: &[3],
            predicted: &[0],
            expect: Expected {
                tie: Some(2.0),
                gie: 2.0,
                mgia_raw: 2.0,
                mgia: 4.0 / 5.0,
                ph: 1.0,
                rh: 1.0 / 3.0,
                fh: 1.0 / 2.0,
                sdl: 2.0,
                plca: 1.0,
                rlca: 1.0 / 3.0,
                flca: 1.0 / 2.0,
            },
        },
        Fixture {
            name: "multi-label-dag",
            edges: MULTI_DAG,
            truth: &[21, 321, 33],
            predicted: &[31, 321, 322],
            expect: Expected {
                tie: None,
                gie: 4.0,
                mgia_raw: 4.0,
                mgia: 21.0 / 25.0,
                ph: 2.0 / 3.0,
                rh: 4.0 / 7.0,
                fh: 8.0 / 13.0,
                sdl: 5.0,
                plca: 1.0 / 2.0,
                rlca: 1.0 / 2.0,
                flca: 1.0 / 2.0,
            },
        },
    ]
}

// ---------------------------------------------------------------------------
// Oracle plumbing
// ---------------------------------------------------------------------------

/// Enumeration limits for the brute-force oracles.
#[derive(Debug, Clone, Copy)]
pub struct OracleBudget {
    /// Maximum predicted labels (pairing-matrix rows) to enumerate.
    pub max_pred: usize,
    /// Maximum true labels (pairing-matrix columns) to enumerate.
    pub max_true: usize,
    /// Maximum hierarchy size for the graph-selection oracle.
    pub max_nodes: usize,
    /// Wall-clock ceiling for a single oracle call.
    pub wall: Duration,
}

impl Default for OracleBudget {
    fn default() -> Self {
        Self {
            max_pred: 4,
            max_true: 4,
            max_nodes: 20,
            wall: Duration::from_secs(10),
        }
    }
}

/// Result of an oracle run: an exact answer, proof that no feasible answer
/// exists, or a clean refusal when the input exceeds the budget.
#[derive(Debug, Clone, PartialEq)]
pub enum OracleOutcome<T> {
    Exact(T),
    Infeasible,
    BudgetExceeded,
}

impl<T> OracleOutcome<T> {
    pub fn exact(self) -> Option<T> {
        match self {
            OracleOutcome::Exact(v) => Some(v),
            _ => None,
        }
    }
}

// ---------------------------------------------------------------------------
// Pairing oracle
// ---------------------------------------------------------------------------

/// Minimum pairing cost by exhaustive enumeration.
///
/// Each predicted row independently picks a set of admissible true columns
/// (at most `pred_upper` of them, shortfalls against `pred_lower` bought at
/// the default cost when the policy allows), then every column's received
/// units are checked against its own bounds, with column shortfalls bought
/// the same way. This walks the entire space the circulation network can
/// express, so its optimum is ground truth for [`hieval::flow::solve_pairing`].
pub fn brute_force_pairing(
    matrix: &CostMatrix,
    bounds: PairingBounds,
    policy: DefaultPolicy,
    budget: &OracleBudget,
) -> OracleOutcome<f64> {
    let m = matrix.pred_count();
    let n = matrix.true_count();
    if m > budget.max_pred || n > budget.max_true {
        return OracleOutcome::BudgetExceeded;
    }
    let d = matrix.default_cost();
    let row_pairable: Vec<bool> = (0..m)
        .map(|i| (0..n).any(|j| matrix.get(i, j).is_some()))
        .collect();
    let col_pairable: Vec<bool> = (0..n)
        .map(|j| (0..m).any(|i| matrix.get(i, j).is_some()))
        .collect();
    let may_default = |pairable: bool| policy == DefaultPolicy::Always || !pairable;

    // Options per row: the served column set and its cost including any
    // default units needed to reach the row's lower bound.
    let mut row_options: Vec<Vec<(Vec<usize>, f64)>> = Vec::with_capacity(m);
    for (i, &pairable) in row_pairable.iter().enumerate() {
        let mut options = Vec::new();
        'mask: for mask in 0u32..(1 << n) {
            let cols: Vec<usize> = (0..n).filter(|j| mask & (1 << j) != 0).collect();
            if cols.len() as i64 > bounds.pred_upper {
                continue;
            }
            let mut cost = 0.0;
            for &j in &cols {
                match matrix.get(i, j) {
                    Some(c) => cost += c,
                    None => continue 'mask,
                }
            }
            let deficit = (bounds.pred_lower - cols.len() as i64).max(0);
            if deficit > 0 && !may_default(pairable) {
                continue;
            }
            options.push((cols, cost + deficit as f64 * d));
        }
        if options.is_empty() {
            return OracleOutcome::Infeasible;
        }
        row_options.push(options);
    }

    // Walk the cartesian product of row options, settling the column side
    // at the leaves.
    struct Walk<'a> {
        row_options: &'a [Vec<(Vec<usize>, f64)>],
        bounds: &'a PairingBounds,
        col_pairable: &'a [bool],
        allow_default: &'a dyn Fn(bool) -> bool,
        d: f64,
    }
    fn descend(
        walk: &Walk,
        row: usize,
        cost_so_far: f64,
        received: &mut [i64],
        best: &mut Option<f64>,
    ) {
        if row == walk.row_options.len() {
            let mut total = cost_so_far;
            for (j, &got) in received.iter().enumerate() {
                let deficit = (walk.bounds.true_lower - got).max(0);
                if deficit > 0 && !(walk.allow_default)(walk.col_pairable[j]) {
                    return;
                }
                total += deficit as f64 * walk.d;
            }
            if best.is_none_or(|b| total < b) {
                *best = Some(total);
            }
            return;
        }
        for (cols, cost) in &walk.row_options[row] {
            if cols.iter().any(|&j| received[j] + 1 > walk.bounds.true_upper) {
                continue;
            }
            for &j in cols {
                received[j] += 1;
            }
            descend(walk, row + 1, cost_so_far + cost, received, best);
            for &j in cols {
                received[j] -= 1;
            }
        }
    }
    let mut best: Option<f64> = None;
    let mut received = vec![0i64; n];
    let walk = Walk {
        row_options: &row_options,
        bounds: &bounds,
        col_pairable: &col_pairable,
        allow_default: &may_default,
        d,
    };
    descend(&walk, 0, 0.0, &mut received, &mut best);
    match best {
        Some(cost) => OracleOutcome::Exact(cost),
        None => OracleOutcome::Infeasible,
    }
}

/// Check a pairing solution against the constraints it claims to satisfy.
///
/// Returns a description of the first violation, if any: flow on a
/// forbidden pair, degree bounds broken, default traffic a policy forbids,
/// or a total cost that does not match the routed units.
pub fn pairing_solution_violation(
    matrix: &CostMatrix,
    bounds: PairingBounds,
    policy: DefaultPolicy,
    solution: &PairingSolution,
) -> Option<String> {
    let m = matrix.pred_count();
    let n = matrix.true_count();
    if solution.pair_flows.len() != m
        || solution.pair_flows.iter().any(|r| r.len() != n)
        || solution.pred_default.len() != m
        || solution.true_default.len() != n
    {
        return Some("solution dimensions do not match the matrix".to_string());
    }
    let row_pairable: Vec<bool> = (0..m)
        .map(|i| (0..n).any(|j| matrix.get(i, j).is_some()))
        .collect();
    let col_pairable: Vec<bool> = (0..n)
        .map(|j| (0..m).any(|i| matrix.get(i, j).is_some()))
        .collect();
    let may_default = |pairable: bool| policy == DefaultPolicy::Always || !pairable;

    let mut cost = 0.0;
    for i in 0..m {
        for j in 0..n {
            let f = solution.pair_flows[i][j];
            if !(0..=1).contains(&f) {
                return Some(format!("pair ({i}, {j}) carries {f} units"));
            }
            if f == 1 {
                match matrix.get(i, j) {
                    Some(c) => cost += c,
                    None => return Some(format!("pair ({i}, {j}) is forbidden but carries flow")),
                }
            }
        }
    }
    for (i, &defaults) in solution.pred_default.iter().enumerate() {
        if defaults < 0 {
            return Some(format!("predicted node {i} has negative default flow"));
        }
        if defaults > 0 && !may_default(row_pairable[i]) {
            return Some(format!("predicted node {i} defaults against the policy"));
        }
        let out: i64 = solution.pair_flows[i].iter().sum::<i64>() + defaults;
        if out < bounds.pred_lower || out > bounds.pred_upper {
            return Some(format!("predicted node {i} routes {out} units"));
        }
        cost += defaults as f64 * matrix.default_cost();
    }
    for (j, &defaults) in solution.true_default.iter().enumerate() {
        if defaults < 0 {
            return Some(format!("true node {j} has negative default flow"));
        }
        if defaults > 0 && !may_default(col_pairable[j]) {
            return Some(format!("true node {j} defaults against the policy"));
        }
        let received: i64 =
            (0..m).map(|i| solution.pair_flows[i][j]).sum::<i64>() + defaults;
        if received < bounds.true_lower || received > bounds.true_upper {
            return Some(format!("true node {j} receives {received} units"));
        }
        cost += defaults as f64 * matrix.default_cost();
    }
    if (cost - solution.total_cost).abs() > 1e-6 {
        return Some(format!(
            "routed units cost {cost} but the solution claims {}",
            solution.total_cost
        ));
    }
    None
}

// ---------------------------------------------------------------------------
// Graph-selection oracle
// ---------------------------------------------------------------------------

/// The best F score any LCA subset and path choice can reach, with the
/// node-set pairs that reach it.
#[derive(Debug, Clone)]
pub struct LcaOptimum {
    pub best_f: f64,
    /// `(true-side nodes, predicted-side nodes)` witnesses for `best_f`.
    pub witnesses: Vec<(BTreeSet<NodeId>, BTreeSet<NodeId>)>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum OracleSide {
    Truth,
    Predicted,
}

#[derive(Debug, Default)]
struct OraclePools {
    t_lcas: BTreeMap<NodeId, BTreeSet<NodeId>>,
    p_lcas: BTreeMap<NodeId, BTreeSet<NodeId>>,
    own_t: BTreeMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    own_p: BTreeMap<(NodeId, NodeId), Vec<Vec<NodeId>>>,
    cross_t: BTreeMap<NodeId, Vec<Vec<NodeId>>>,
    cross_p: BTreeMap<NodeId, Vec<Vec<NodeId>>>,
}

fn oracle_fill_side(
    h: &Hierarchy,
    members: &[NodeId],
    others: &[NodeId],
    truth_side: bool,
    pools: &mut OraclePools,
) -> hieval::Result<()> {
    for &label in members {
        let relation = h.lca_of_set(label, others)?;
        if relation.lcas.is_empty() {
            return Err(hieval::Error::Invalid(format!(
                "label {label} has no common ancestor with the other side"
            )));
        }
        let lca_set: BTreeSet<NodeId> = relation.lcas.iter().copied().collect();
        for &a in &lca_set {
            let paths = h.shortest_paths(label, a, None)?.paths().to_vec();
            let own = if truth_side { &mut pools.own_t } else { &mut pools.own_p };
            own.insert((label, a), paths);
        }
        for &best in &relation.s_best {
            for path in h.shortest_paths(label, best, None)?.paths() {
                for &a in &lca_set {
                    if let Some(pos) = path.iter().position(|&x| x == a) {
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

/// F score over node sets, mirroring the production formula independently.
pub fn node_set_f(g_t: &BTreeSet<NodeId>, g_p: &BTreeSet<NodeId>) -> f64 {
    let inter = g_t.intersection(g_p).count() as f64;
    let p = if g_p.is_empty() { 0.0 } else { inter / g_p.len() as f64 };
    let r = if g_t.is_empty() { 0.0 } else { inter / g_t.len() as f64 };
    if p + r > 0.0 {
        2.0 * p * r / (p + r)
    } else {
        0.0
    }
}

/// Best reachable minimal-graph F score by exhaustive enumeration.
///
/// Rebuilds the per-label LCA sets and path pools, then tries every
/// irredundant covering LCA subset and every combination of candidate
/// paths for the obligations that subset creates. The greedy production
/// selection always lands on one of the enumerated subsets (its own final
/// choice is irredundant) and picks one path combination, so its F score
/// can never exceed the optimum returned here.
///
/// `labels` must already be pruned of nested pairs, as in the production
/// pipeline. Instances with an empty predicted set score 0 by definition.
///
/// # Errors
///
/// The same label-relation errors the production graph construction
/// reports: disconnected labels or label sets without a common ancestor.
pub fn brute_force_minimal_graphs(
    h: &Hierarchy,
    labels: &InstanceLabels,
    budget: &OracleBudget,
) -> hieval::Result<OracleOutcome<LcaOptimum>> {
    if labels.predicted().is_empty() {
        return Ok(OracleOutcome::Exact(LcaOptimum {
            best_f: 0.0,
            witnesses: vec![(BTreeSet::new(), BTreeSet::new())],
        }));
    }
    if h.node_count() > budget.max_nodes {
        return Ok(OracleOutcome::BudgetExceeded);
    }
    let start = Instant::now();

    let mut pools = OraclePools::default();
    oracle_fill_side(h, labels.truth(), labels.predicted(), true, &mut pools)?;
    oracle_fill_side(h, labels.predicted(), labels.truth(), false, &mut pools)?;
    for pool in pools.cross_t.values_mut().chain(pools.cross_p.values_mut()) {
        pool.sort_unstable();
        pool.dedup();
    }

    let mut lca_all: Vec<NodeId> = pools
        .t_lcas
        .values()
        .chain(pools.p_lcas.values())
        .flat_map(|s| s.iter().copied())
        .collect();
    lca_all.sort_unstable();
    lca_all.dedup();
    if lca_all.len() > 16 {
        return Ok(OracleOutcome::BudgetExceeded);
    }

    let label_lca_sets: Vec<&BTreeSet<NodeId>> =
        pools.t_lcas.values().chain(pools.p_lcas.values()).collect();
    let covers = |chosen: &BTreeSet<NodeId>| {
        label_lca_sets
            .iter()
            .all(|lcas| lcas.iter().any(|a| chosen.contains(a)))
    };

    let mut best_f = f64::NEG_INFINITY;
    let mut witnesses: Vec<(BTreeSet<NodeId>, BTreeSet<NodeId>)> = Vec::new();
    let mut work: u64 = 0;

    for mask in 1u32..(1 << lca_all.len()) {
        if start.elapsed() > budget.wall {
            return Ok(OracleOutcome::BudgetExceeded);
        }
        let chosen: BTreeSet<NodeId> = lca_all
            .iter()
            .enumerate()
            .filter(|(bit, _)| mask & (1 << bit) != 0)
            .map(|(_, &a)| a)
            .collect();
        if !covers(&chosen) {
            continue;
        }
        let irredundant = chosen.iter().all(|&a| {
            let mut without = chosen.clone();
            without.remove(&a);
            !covers(&without)
        });
        if !irredundant {
            continue;
        }

        // The obligations this subset creates, mirroring production: every
        // covered label connects to each of its chosen LCAs on its own
        // side; an LCA covering nothing on one side falls back to that
        // side's cross pool, or is simply absent there when that pool is
        // empty too.
        let mut slots: Vec<(OracleSide, &Vec<Vec<NodeId>>)> = Vec::new();
        let mut product: u64 = 1;
        for &a in &chosen {
            for (side, lcas_map, own, cross) in [
                (OracleSide::Truth, &pools.t_lcas, &pools.own_t, &pools.cross_t),
                (OracleSide::Predicted, &pools.p_lcas, &pools.own_p, &pools.cross_p),
            ] {
                let covered: Vec<NodeId> = lcas_map
                    .iter()
                    .filter(|(_, lcas)| lcas.contains(&a))
                    .map(|(&label, _)| label)
                    .collect();
                if covered.is_empty() {
                    if let Some(pool) = cross.get(&a) {
                        if !pool.is_empty() {
                            slots.push((side, pool));
                            product = product.saturating_mul(pool.len() as u64);
                        }
                    }
                } else {
                    for label in covered {
                        let pool = &own[&(label, a)];
                        slots.push((side, pool));
                        product = product.saturating_mul(pool.len() as u64);
                    }
                }
            }
        }
        work = work.saturating_add(product);
        if work > 2_000_000 {
            return Ok(OracleOutcome::BudgetExceeded);
        }

        let mut indices = vec![0usize; slots.len()];
        loop {
            let mut g_t: BTreeSet<NodeId> = BTreeSet::new();
            let mut g_p: BTreeSet<NodeId> = BTreeSet::new();
            for (slot, &idx) in slots.iter().zip(&indices) {
                let target = match slot.0 {
                    OracleSide::Truth => &mut g_t,
                    OracleSide::Predicted => &mut g_p,
                };
                target.extend(slot.1[idx].iter().copied());
            }
            let f = node_set_f(&g_t, &g_p);
            if f > best_f + 1e-12 {
                best_f = f;
                witnesses.clear();
                witnesses.push((g_t, g_p));
            } else if (f - best_f).abs() <= 1e-12 && witnesses.len() < 64 {
                let pair = (g_t, g_p);
                if !witnesses.contains(&pair) {
                    witnesses.push(pair);
                }
            }

            // Advance the odometer over candidate choices.
            let mut pos = indices.len();
            loop {
                if pos == 0 {
                    break;
                }
                pos -= 1;
                indices[pos] += 1;
                if indices[pos] < slots[pos].1.len() {
                    break;
                }
                indices[pos] = 0;
            }
            if indices.iter().all(|&i| i == 0) {
                break;
            }
        }
    }

    Ok(OracleOutcome::Exact(LcaOptimum { best_f, witnesses }))
}

// ---------------------------------------------------------------------------
// Seeded generators
// ---------------------------------------------------------------------------

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Random rooted tree on ids `0..nodes`: node `i` hangs under a smaller id.
pub fn random_tree_edges(rng: &mut ChaCha8Rng, nodes: usize) -> Vec<(NodeId, NodeId)> {
    (1..nodes)
        .map(|i| (rng.gen_range(0..i) as NodeId, i as NodeId))
        .collect()
}

/// Random DAG: a tree plus extra forward edges (smaller id to larger id),
/// deduplicated, so the result stays acyclic.
pub fn random_dag_edges(
    rng: &mut ChaCha8Rng,
    nodes: usize,
    extra: usize,
) -> Vec<(NodeId, NodeId)> {
    let mut edges = random_tree_edges(rng, nodes);
    let mut seen: HashSet<(NodeId, NodeId)> = edges.iter().copied().collect();
    if nodes >= 2 {
        for _ in 0..extra {
            let c = rng.gen_range(1..nodes);
            let p = rng.gen_range(0..c);
            let e = (p as NodeId, c as NodeId);
            if seen.insert(e) {
                edges.push(e);
            }
        }
    }
    edges
}

/// Between 1 and `max` distinct labels drawn from `0..nodes`.
pub fn random_labels(rng: &mut ChaCha8Rng, nodes: usize, max: usize) -> Vec<NodeId> {
    let count = rng.gen_range(1..=max.min(nodes));
    rand::seq::index::sample(rng, nodes, count)
        .into_iter()
        .map(|i| i as NodeId)
        .collect()
}

/// Random integer-cost matrix; each pair is forbidden with probability
/// `forbid`.
pub fn random_cost_matrix(
    rng: &mut ChaCha8Rng,
    pred_count: usize,
    true_count: usize,
    forbid: f64,
) -> CostMatrix {
    let entries: Vec<Vec<Option<f64>>> = (0..pred_count)
        .map(|_| {
            (0..true_count)
                .map(|_| {
                    if rng.gen_bool(forbid) {
                        None
                    } else {
                        Some(rng.gen_range(0..=9) as f64)
                    }
                })
                .collect()
        })
        .collect();
    let default_cost = rng.gen_range(0..=9) as f64;
    CostMatrix::new(entries, true_count, default_cost).expect("generated matrix is valid")
}

// ---------------------------------------------------------------------------
// File rendering
// ---------------------------------------------------------------------------

/// Render edges in the hierarchy file format, one `parent child` per line.
pub fn hierarchy_text(edges: &[(NodeId, NodeId)]) -> String {
    let mut out = String::new();
    for (p, c) in edges {
        out.push_str(&format!("{p} {c}\n"));
    }
    out
}

/// Render label lines, space-joined.
pub fn labels_text(lines: &[Vec<NodeId>]) -> String {
    let mut out = String::new();
    for line in lines {
        let rendered: Vec<String> = line.iter().map(|n| n.to_string()).collect();
        out.push_str(&rendered.join(" "));
        out.push('\n');
    }
    out
}

/// Write `content` under `dir` and return the full path.
pub fn write_file(dir: &Path, name: &str, content: &str) -> PathBuf {
    let path = dir.join(name);
    std::fs::write(&path, content).expect("test file is writable");
    path
}

// ---------------------------------------------------------------------------
// Large synthetic hierarchies
// ---------------------------------------------------------------------------

/// A big leveled DAG for throughput tests.
pub struct ScaleHierarchy {
    pub edges: Vec<(NodeId, NodeId)>,
    /// Tree parent per node; entry 0 is unused.
    pub parent: Vec<NodeId>,
    /// Level (root distance along tree edges) per node.
    pub level: Vec<usize>,
    pub nodes: usize,
    pub depth: usize,
}

/// Build a leveled DAG of the requested size and exact depth.
///
/// Nodes `1..=depth` form a chain so the full depth is always realized;
/// every later node picks a uniform level and a uniform parent on the level
/// above. Five percent of eligible nodes gain their tree grandparent as a
/// second parent, which creates genuine multi-parent structure while
/// keeping every undirected shortest path between labels apex-bearing: a
/// detour through a shared child of a parent/grandparent pair costs 2
/// edges where the direct tree edge costs 1, so such detours are never
/// minimal.
pub fn scale_hierarchy(rng: &mut ChaCha8Rng, nodes: usize, depth: usize) -> ScaleHierarchy {
    assert!(nodes > depth + 1, "need more nodes than levels");
    let mut level = vec![0usize; nodes];
    let mut parent = vec![0 as NodeId; nodes];
    let mut by_level: Vec<Vec<NodeId>> = vec![Vec::new(); depth + 1];
    by_level[0].push(0);
    let mut edges: Vec<(NodeId, NodeId)> = Vec::with_capacity(nodes + nodes / 16);
    for i in 1..nodes {
        let l = if i <= depth { i } else { rng.gen_range(1..=depth) };
        let p = if i <= depth {
            (i - 1) as NodeId
        } else {
            by_level[l - 1][rng.gen_range(0..by_level[l - 1].len())]
        };
        level[i] = l;
        parent[i] = p;
        by_level[l].push(i as NodeId);
        edges.push((p, i as NodeId));
    }
    for i in 1..nodes {
        if level[i] >= 2 && rng.gen_bool(0.05) {
            let grandparent = parent[parent[i] as usize];
            edges.push((grandparent, i as NodeId));
        }
    }
    ScaleHierarchy {
        edges,
        parent,
        level,
        nodes,
        depth,
    }
}

impl ScaleHierarchy {
    /// Instance files: one truth file and named prediction files of
    /// decreasing quality (exact copies, parent-level misses plus one
    /// spurious label, random labels).
    ///
    /// The spurious label keeps the middle system strictly below the
    /// exact one on precision-flavoured measures: parent-only
    /// predictions have ancestor sets nested inside the truth's, which
    /// would leave hierarchical precision at a perfect score.
    pub fn instance_files(
        &self,
        rng: &mut ChaCha8Rng,
        instances: usize,
        labels_per: usize,
    ) -> (String, Vec<(&'static str, String)>) {
        let mut truth = String::new();
        let mut exact = String::new();
        let mut close = String::new();
        let mut far = String::new();
        for _ in 0..instances {
            let pick: Vec<NodeId> = rand::seq::index::sample(rng, self.nodes - 1, labels_per)
                .into_iter()
                .map(|i| (i + 1) as NodeId)
                .collect();
            let mut up: Vec<NodeId> = pick.iter().map(|&n| self.parent[n as usize]).collect();
            up.push(rng.gen_range(1..self.nodes) as NodeId);
            let rand_pick: Vec<NodeId> =
                rand::seq::index::sample(rng, self.nodes - 1, labels_per)
                    .into_iter()
                    .map(|i| (i + 1) as NodeId)
                    .collect();
            let join = |v: &[NodeId]| {
                v.iter()
                    .map(|n| n.to_string())
                    .collect::<Vec<_>>()
                    .join(" ")
            };
            truth.push_str(&join(&pick));
            truth.push('\n');
            exact.push_str(&join(&pick));
            exact.push('\n');
            close.push_str(&join(&up));
            close.push('\n');
            far.push_str(&join(&rand_pick));
            far.push('\n');
        }
        (truth, vec![("exact", exact), ("close", close), ("far", far)])
    }
}

// ---------------------------------------------------------------------------
// Reference statistics
// ---------------------------------------------------------------------------

/// Standard normal upper-tail probability via a classical erf polynomial
/// (maximum absolute error about 1.5e-7), independent of the statistics
/// crate the production code uses.
pub fn normal_upper_tail(z: f64) -> f64 {
    if z < 0.0 {
        return 1.0 - normal_upper_tail(-z);
    }
    let x = z / std::f64::consts::SQRT_2;
    let t = 1.0 / (1.0 + 0.327_591_1 * x);
    let poly = t
        * (0.254_829_592
            + t * (-0.284_496_736 + t * (1.421_413_741 + t * (-1.453_152_027 + t * 1.061_405_429))));
    let erf = 1.0 - poly * (-x * x).exp();
    0.5 * (1.0 - erf)
}
