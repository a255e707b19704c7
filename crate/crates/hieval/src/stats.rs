//! Rank correlation and significance-aware system ranking.
//!
//! Systems are ordered by mean score, but adjacent systems only receive
//! distinct ranks when a paired sign test can separate them from the
//! current leader of their tie group. Measure agreement is quantified with
//! the tie-corrected Kendall correlation between rank vectors.

use statrs::distribution::{ContinuousCDF, Normal};

// ---------------------------------------------------------------------------
// Orientation
// ---------------------------------------------------------------------------

/// Whether larger or smaller values of a score denote better systems.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Orientation {
    HigherBetter,
    LowerBetter,
}

impl Orientation {
    /// True when `x` is strictly better than `y` under this orientation.
    pub fn better(self, x: f64, y: f64) -> bool {
        match self {
            Orientation::HigherBetter => x > y,
            Orientation::LowerBetter => x < y,
        }
    }
}

// ---------------------------------------------------------------------------
// Kendall correlation
// ---------------------------------------------------------------------------

/// Tie-corrected Kendall correlation between two equal-length sequences.
///
/// Returns `None` when either sequence is constant (the coefficient is
/// undefined) and panics on length mismatch.
pub fn kendall_tau(a: &[f64], b: &[f64]) -> Option<f64> {
    assert_eq!(a.len(), b.len(), "sequences must have equal length");
    // f64::signum maps 0.0 to 1.0, so compare explicitly.
    fn sign(d: f64) -> i64 {
        if d > 0.0 {
            1
        } else if d < 0.0 {
            -1
        } else {
            0
        }
    }
    let n = a.len();
    let mut concordant_minus_discordant = 0i64;
    let mut untied_a = 0i64;
    let mut untied_b = 0i64;
    for i in 0..n {
        for j in (i + 1)..n {
            let sa = sign(a[i] - a[j]);
            let sb = sign(b[i] - b[j]);
            untied_a += i64::from(sa != 0);
            untied_b += i64::from(sb != 0);
            concordant_minus_discordant += sa * sb;
        }
    }
    if untied_a == 0 || untied_b == 0 {
        return None;
    }
    Some(concordant_minus_discordant as f64 / ((untied_a as f64) * (untied_b as f64)).sqrt())
}

// ---------------------------------------------------------------------------
// Sign test
// ---------------------------------------------------------------------------

/// Outcome of a one-sided paired sign test.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SignTestResult {
    /// Number of pairs with differing values.
    pub trials: usize,
    /// Number of those pairs won by the first system.
    pub wins: usize,
    /// Normal-approximation statistic; `None` when no pair differed.
    pub z: Option<f64>,
    /// Upper-tail p-value for "the first system is better".
    pub p_value: f64,
    /// Set when `trials` is too small for the approximation to be reliable.
    pub approximate: bool,
}

/// One-sided sign test for `wins` successes out of `trials` differing pairs.
///
/// Tied pairs must be excluded beforehand. Uses the normal approximation
/// `z = (wins − trials/2) / (√trials / 2)`; with no trials the result is
/// the non-informative `p = 1`.
pub fn sign_test(wins: usize, trials: usize) -> SignTestResult {
    assert!(wins <= trials, "wins cannot exceed trials");
    if trials == 0 {
        return SignTestResult {
            trials,
            wins,
            z: None,
            p_value: 1.0,
            approximate: true,
        };
    }
    let n = trials as f64;
    let z = (wins as f64 - 0.5 * n) / (0.5 * n.sqrt());
    let normal = Normal::new(0.0, 1.0).expect("unit normal is well defined");
    SignTestResult {
        trials,
        wins,
        z: Some(z),
        p_value: 1.0 - normal.cdf(z),
        approximate: trials <= 12,
    }
}

/// Sign test of paired score sequences: how strongly does `a` beat `b`?
pub fn paired_sign_test(a: &[f64], b: &[f64], orientation: Orientation) -> SignTestResult {
    assert_eq!(a.len(), b.len(), "paired sequences must have equal length");
    let mut wins = 0;
    let mut trials = 0;
    for (&x, &y) in a.iter().zip(b) {
        if x != y {
            trials += 1;
            if orientation.better(x, y) {
                wins += 1;
            }
        }
    }
    sign_test(wins, trials)
}

// ---------------------------------------------------------------------------
// Ranking
// ---------------------------------------------------------------------------

/// Per-instance scores of one system under one measure.
#[derive(Debug, Clone)]
pub struct ScoreSeries {
    pub name: String,
    pub scores: Vec<f64>,
}

impl ScoreSeries {
    pub fn new(name: impl Into<String>, scores: Vec<f64>) -> Self {
        Self {
            name: name.into(),
            scores,
        }
    }

    pub fn mean(&self) -> f64 {
        if self.scores.is_empty() {
            f64::NAN
        } else {
            self.scores.iter().sum::<f64>() / self.scores.len() as f64
        }
    }
}

/// One system's position in a significance-aware ranking.
#[derive(Debug, Clone)]
pub struct RankedSystem {
    /// Index into the input slice.
    pub index: usize,
    pub name: String,
    pub mean: f64,
    /// 1-based rank; systems indistinguishable from their group leader
    /// share the leader's rank.
    pub rank: usize,
    /// Sign-test p-value against the current group leader; `None` for the
    /// overall leader.
    pub p_vs_leader: Option<f64>,
}

/// Rank systems by mean score, collapsing statistically indistinguishable
/// neighbours onto one rank.
///
/// Systems are sorted best-first (ties by input order). Walking down the
/// order, each system is sign-tested against the *leader* of the current
/// tie group: `p ≥ alpha` lets it share the leader's rank, anything else
/// starts a new group at the 1-based position. Returned best-first.
pub fn rank_with_significance(
    series: &[ScoreSeries],
    orientation: Orientation,
    alpha: f64,
) -> Vec<RankedSystem> {
    let mut order: Vec<usize> = (0..series.len()).collect();
    order.sort_by(|&i, &j| {
        let (mi, mj) = (series[i].mean(), series[j].mean());
        let key = match orientation {
            Orientation::HigherBetter => mj.total_cmp(&mi),
            Orientation::LowerBetter => mi.total_cmp(&mj),
        };
        key.then(i.cmp(&j))
    });

    let mut ranked: Vec<RankedSystem> = Vec::with_capacity(series.len());
    let mut leader = 0usize;
    let mut leader_rank = 1usize;
    for (position, &idx) in order.iter().enumerate() {
        let (rank, p) = if position == 0 {
            (1, None)
        } else {
            let head = &series[order[leader]];
            let test = paired_sign_test(&head.scores, &series[idx].scores, orientation);
            if test.p_value >= alpha {
                (leader_rank, Some(test.p_value))
            } else {
                leader = position;
                leader_rank = position + 1;
                (leader_rank, Some(test.p_value))
            }
        };
        ranked.push(RankedSystem {
            index: idx,
            name: series[idx].name.clone(),
            mean: series[idx].mean(),
            rank,
            p_vs_leader: p,
        });
    }
    ranked
}
