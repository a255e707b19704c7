//! Evaluation orchestration: measure selection, label-file loading,
//! per-instance dispatch, parallel execution, and the multi-system
//! comparison workflow.
//!
//! All functions are pure with respect to their inputs so that identical
//! inputs produce byte-identical reports regardless of worker count.

use std::collections::BTreeMap;
use std::path::Path;

use rayon::prelude::*;

use crate::hierarchy::{parse_hierarchy, Hierarchy, NodeId};
use crate::lca_measures::{
    build_extended_graphs, lca_scores, prune_nested, select_minimal_graphs, threshold_view,
    LcaScore,
};
use crate::pair_measures::{gie, mgia, tree_induced_error, InstanceLabels};
use crate::report::{
    rank_correlation_matrix, EvalReport, MeasureReport, RankRow, RankingReport, TauReport,
};
use crate::set_measures::{augment, set_scores, tolerance_filter, AugmentOptions, AugmentedSets};
use crate::stats::{paired_sign_test, rank_with_significance, Orientation, ScoreSeries};
use crate::{Error, Result};

// ---------------------------------------------------------------------------
// Measures
// ---------------------------------------------------------------------------

/// Every evaluation measure the tool can compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Measure {
    /// Path cost between the single true and single predicted label.
    Tie,
    /// One-to-one pairing error.
    Gie,
    /// Covering-pairing score.
    Mgia,
    /// Ancestor-augmented precision.
    Ph,
    /// Ancestor-augmented recall.
    Rh,
    /// Ancestor-augmented F1.
    Fh,
    /// Symmetric-difference loss on augmented sets.
    Sdl,
    /// F1 after the tolerance filter on augmented sets.
    BianchiFh,
    /// F1 on descendant-augmented sets.
    DescFh,
    /// Minimal-graph precision.
    Plca,
    /// Minimal-graph recall.
    Rlca,
    /// Minimal-graph F1.
    Flca,
}

impl Measure {
    pub const ALL: [Measure; 12] = [
        Measure::Tie,
        Measure::Gie,
        Measure::Mgia,
        Measure::Ph,
        Measure::Rh,
        Measure::Fh,
        Measure::Sdl,
        Measure::BianchiFh,
        Measure::DescFh,
        Measure::Plca,
        Measure::Rlca,
        Measure::Flca,
    ];

    pub fn key(self) -> &'static str {
        match self {
            Measure::Tie => "tie",
            Measure::Gie => "gie",
            Measure::Mgia => "mgia",
            Measure::Ph => "ph",
            Measure::Rh => "rh",
            Measure::Fh => "fh",
            Measure::Sdl => "sdl",
            Measure::BianchiFh => "bianchi-fh",
            Measure::DescFh => "desc-fh",
            Measure::Plca => "plca",
            Measure::Rlca => "rlca",
            Measure::Flca => "flca",
        }
    }

    pub fn from_key(key: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|m| m.key() == key)
    }

    /// Error-style measures rank lower values better; score-style measures
    /// rank higher values better.
    pub fn orientation(self) -> Orientation {
        match self {
            Measure::Tie | Measure::Gie | Measure::Sdl => Orientation::LowerBetter,
            _ => Orientation::HigherBetter,
        }
    }

    /// The default selection: everything except the single-label path cost,
    /// which is undefined on multi-label instances.
    pub fn default_set() -> Vec<Self> {
        Self::ALL
            .into_iter()
            .filter(|m| *m != Measure::Tie)
            .collect()
    }
}

/// Parse a comma-separated measure list, preserving order and dropping
/// duplicates.
///
/// # Errors
///
/// [`Error::Invalid`] on unknown keys or an empty selection.
pub fn parse_measure_list(list: &str) -> Result<Vec<Measure>> {
    let mut measures = Vec::new();
    for key in list.split(',').map(str::trim).filter(|k| !k.is_empty()) {
        let m = Measure::from_key(key).ok_or_else(|| {
            Error::Invalid(format!(
                "unknown measure '{key}'; expected a comma-separated list drawn from {}",
                Measure::ALL.map(Measure::key).join(",")
            ))
        })?;
        if !measures.contains(&m) {
            measures.push(m);
        }
    }
    if measures.is_empty() {
        return Err(Error::Invalid("no measures selected".to_string()));
    }
    Ok(measures)
}

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

/// Settings shared by the evaluation and comparison commands.
#[derive(Debug, Clone)]
pub struct EvalConfig {
    pub measures: Vec<Measure>,
    /// Cost charged for each unmatched label in the pairing measures.
    pub d_max: f64,
    /// Pair distances above this are treated as unrelated; `None` = no cap.
    pub max_dist: Option<f64>,
    /// LCA distance threshold; `None` evaluates on the full hierarchy.
    pub lca_threshold: Option<usize>,
    /// Significance level for rank grouping.
    pub alpha: f64,
    /// Node removed from augmented sets (an always-shared root adds no
    /// information).
    pub virtual_root: Option<NodeId>,
    /// Drop labels missing from the hierarchy instead of failing.
    pub skip_unknown: bool,
    /// Keep per-instance values in the report.
    pub per_instance: bool,
    /// Worker count override; `None` uses the default pool.
    pub workers: Option<usize>,
}

impl Default for EvalConfig {
    fn default() -> Self {
        Self {
            measures: Measure::default_set(),
            d_max: 5.0,
            max_dist: None,
            lca_threshold: None,
            alpha: 0.05,
            virtual_root: None,
            skip_unknown: false,
            per_instance: false,
            workers: None,
        }
    }
}

impl EvalConfig {
    /// Configuration echo for report headers, in a fixed key order.
    fn echo(&self, command: &str) -> Vec<(String, String)> {
        let mut pairs = vec![
            ("command".to_string(), command.to_string()),
            (
                "measures".to_string(),
                self.measures
                    .iter()
                    .map(|m| m.key())
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("d-max".to_string(), crate::report::sig6(self.d_max)),
            (
                "max-dist".to_string(),
                self.max_dist.map_or("off".to_string(), crate::report::sig6),
            ),
            (
                "lca-threshold".to_string(),
                self.lca_threshold
                    .map_or("off".to_string(), |t| t.to_string()),
            ),
        ];
        if let Some(root) = self.virtual_root {
            pairs.push(("virtual-root".to_string(), root.to_string()));
        }
        if command == "compare" {
            pairs.push(("alpha".to_string(), crate::report::sig6(self.alpha)));
        }
        pairs
    }

    /// # Errors
    ///
    /// [`Error::Invalid`] on non-positive or non-finite settings.
    pub fn validate(&self) -> Result<()> {
        if !(self.d_max.is_finite() && self.d_max > 0.0) {
            return Err(Error::Invalid(
                "the default distance (--dmax) must be a positive number".to_string(),
            ));
        }
        if let Some(cap) = self.max_dist {
            if !(cap.is_finite() && cap > 0.0) {
                return Err(Error::Invalid(
                    "the distance cap (--max-dist) must be a positive number or 'off'".to_string(),
                ));
            }
        }
        if self.lca_threshold == Some(0) {
            return Err(Error::Invalid(
                "the LCA threshold (--lca-threshold) must be at least 1 or 'off'".to_string(),
            ));
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Invalid(
                "the significance level (--alpha) must lie strictly between 0 and 1".to_string(),
            ));
        }
        if self.workers == Some(0) {
            return Err(Error::Invalid(
                "the worker count must be at least 1".to_string(),
            ));
        }
        Ok(())
    }
}

// ---------------------------------------------------------------------------
// Label files
// ---------------------------------------------------------------------------

/// Parse a label file: one instance per line, whitespace-separated ids.
/// Empty lines yield empty label sets; validity is decided by the caller.
///
/// # Errors
///
/// [`Error::Malformed`] with the offending line number on unparsable ids.
pub fn parse_label_file(text: &str) -> Result<Vec<Vec<NodeId>>> {
    let mut lines = Vec::new();
    for (idx, line) in text.lines().enumerate() {
        let mut labels = Vec::new();
        for token in line.split_whitespace() {
            let id: NodeId = token.parse().map_err(|_| Error::Malformed {
                line: idx + 1,
                msg: format!("'{token}' is not a class id"),
            })?;
            if id < 0 {
                return Err(Error::Malformed {
                    line: idx + 1,
                    msg: format!("class ids must be non-negative, got {id}"),
                });
            }
            labels.push(id);
        }
        lines.push(labels);
    }
    Ok(lines)
}

/// Pair up true and predicted label files into per-instance label sets.
///
/// Returns the instances plus human-readable warnings (currently only about
/// labels dropped by `skip_unknown`).
///
/// # Errors
///
/// [`Error::Malformed`] on misaligned files or empty true label sets;
/// [`Error::UnknownLabel`] for ids missing from the hierarchy when
/// `skip_unknown` is off.
pub fn load_instances(
    h: &Hierarchy,
    truth_text: &str,
    predicted_text: &str,
    skip_unknown: bool,
) -> Result<(Vec<InstanceLabels>, Vec<String>)> {
    let truth_lines = parse_label_file(truth_text)?;
    let predicted_lines = parse_label_file(predicted_text)?;
    if truth_lines.len() != predicted_lines.len() {
        return Err(Error::Malformed {
            line: truth_lines.len().min(predicted_lines.len()) + 1,
            msg: format!(
                "label files are misaligned: {} true lines but {} predicted lines",
                truth_lines.len(),
                predicted_lines.len()
            ),
        });
    }
    if truth_lines.is_empty() {
        return Err(Error::Malformed {
            line: 1,
            msg: "label files contain no instances".to_string(),
        });
    }

    let mut warnings = Vec::new();
    let mut filter = |labels: Vec<NodeId>, line: usize, side: &str| -> Result<Vec<NodeId>> {
        let mut kept = Vec::with_capacity(labels.len());
        for id in labels {
            if h.contains(id) {
                kept.push(id);
            } else if skip_unknown {
                warnings.push(format!(
                    "line {line}: dropping unknown {side} label {id}"
                ));
            } else {
                return Err(Error::UnknownLabel { line, id });
            }
        }
        Ok(kept)
    };

    let mut instances = Vec::with_capacity(truth_lines.len());
    for (idx, (truth, predicted)) in truth_lines.into_iter().zip(predicted_lines).enumerate() {
        let line = idx + 1;
        let truth = filter(truth, line, "true")?;
        let predicted = filter(predicted, line, "predicted")?;
        let inst = InstanceLabels::new(truth, predicted).map_err(|e| Error::Malformed {
            line,
            msg: e.to_string(),
        })?;
        instances.push(inst);
    }
    Ok((instances, warnings))
}

// ---------------------------------------------------------------------------
// Per-instance evaluation
// ---------------------------------------------------------------------------

/// Evaluate every configured measure on one instance, in configured order.
///
/// With an LCA threshold set, all measures run on the per-instance
/// hierarchy view; nested-label pruning for the LCA measures always uses
/// the full hierarchy.
///
/// # Errors
///
/// Propagates measure-level errors: multi-label instances under the
/// single-label path cost, disconnected label pairs outside the pairing
/// measures, and label sets without a common ancestor.
pub fn evaluate_instance(
    h: &Hierarchy,
    inst: &InstanceLabels,
    cfg: &EvalConfig,
) -> Result<Vec<f64>> {
    let view_storage;
    let view: &Hierarchy = match cfg.lca_threshold {
        Some(t) => {
            view_storage = threshold_view(h, inst, t)?;
            &view_storage.hierarchy
        }
        None => h,
    };

    let mut ancestor_sets: Option<AugmentedSets> = None;
    let mut lca: Option<LcaScore> = None;
    let mut values = Vec::with_capacity(cfg.measures.len());
    for &measure in &cfg.measures {
        let value = match measure {
            Measure::Tie => {
                let (&[t], &[p]) = (inst.truth(), inst.predicted()) else {
                    return Err(Error::Invalid(format!(
                        "the single-label path cost needs exactly one true and one \
                         predicted label, got {} and {}",
                        inst.truth().len(),
                        inst.predicted().len()
                    )));
                };
                tree_induced_error(view, t, p)?
            }
            Measure::Gie => gie(view, inst, cfg.d_max, cfg.max_dist)?.raw_error,
            Measure::Mgia => mgia(view, inst, cfg.d_max, cfg.max_dist)?
                .score
                .expect("covering pairing always scores"),
            Measure::Ph | Measure::Rh | Measure::Fh | Measure::Sdl => {
                if ancestor_sets.is_none() {
                    ancestor_sets = Some(augment(view, inst, ancestor_options(cfg))?);
                }
                let s = set_scores(ancestor_sets.as_ref().expect("just filled"));
                match measure {
                    Measure::Ph => s.p_h,
                    Measure::Rh => s.r_h,
                    Measure::Fh => s.f_h,
                    _ => s.sdl as f64,
                }
            }
            Measure::BianchiFh => {
                if ancestor_sets.is_none() {
                    ancestor_sets = Some(augment(view, inst, ancestor_options(cfg))?);
                }
                let filtered = tolerance_filter(view, ancestor_sets.as_ref().expect("just filled"))?;
                set_scores(&filtered).f_h
            }
            Measure::DescFh => {
                let mut options = AugmentOptions::descendants();
                options.virtual_root = cfg.virtual_root;
                set_scores(&augment(view, inst, options)?).f_h
            }
            Measure::Plca | Measure::Rlca | Measure::Flca => {
                if lca.is_none() {
                    lca = Some(lca_trio(h, view, inst)?);
                }
                let s = lca.as_ref().expect("just filled");
                match measure {
                    Measure::Plca => s.p_lca,
                    Measure::Rlca => s.r_lca,
                    _ => s.f_lca,
                }
            }
        };
        values.push(value);
    }
    Ok(values)
}

fn ancestor_options(cfg: &EvalConfig) -> AugmentOptions {
    let mut options = AugmentOptions::ancestors();
    options.virtual_root = cfg.virtual_root;
    options.depth_cap = cfg.lca_threshold;
    options
}

fn lca_trio(full: &Hierarchy, view: &Hierarchy, inst: &InstanceLabels) -> Result<LcaScore> {
    if inst.predicted().is_empty() {
        // Nothing was predicted: the predicted-side graph is empty, so
        // precision, recall, and F1 are all zero.
        return Ok(LcaScore {
            p_lca: 0.0,
            r_lca: 0.0,
            f_lca: 0.0,
        });
    }
    let pruned = prune_nested(full, inst)?;
    let extended = build_extended_graphs(view, &pruned)?;
    let graphs = select_minimal_graphs(view, &extended);
    Ok(lca_scores(&graphs.g_t, &graphs.g_p))
}

/// Evaluate all instances, in parallel when a worker pool is available.
///
/// Results and errors are merged in input order, so output is
/// byte-identical across worker counts.
///
/// # Errors
///
/// The first per-instance error in input order, tagged with the instance
/// number.
pub fn evaluate_all(
    h: &Hierarchy,
    instances: &[InstanceLabels],
    cfg: &EvalConfig,
) -> Result<Vec<Vec<f64>>> {
    let run = || -> Vec<Result<Vec<f64>>> {
        instances
            .par_iter()
            .enumerate()
            .map(|(i, inst)| {
                evaluate_instance(h, inst, cfg)
                    .map_err(|e| Error::Invalid(format!("instance {}: {e}", i + 1)))
            })
            .collect()
    };
    let results = match cfg.workers {
        Some(count) => rayon::ThreadPoolBuilder::new()
            .num_threads(count)
            .build()
            .map_err(|e| Error::Invalid(format!("cannot start worker pool: {e}")))?
            .install(run),
        None => run(),
    };
    results.into_iter().collect()
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

fn read_file(path: &Path) -> Result<String> {
    std::fs::read_to_string(path)
        .map_err(|e| Error::Invalid(format!("cannot read {}: {e}", path.display())))
}

/// Parse a hierarchy file and make it acyclic, warning when edges had to be
/// dropped.
fn load_hierarchy(path: &Path, warnings: &mut Vec<String>) -> Result<Hierarchy> {
    let h = parse_hierarchy(&read_file(path)?)?;
    let (dag, removed) = h.normalize_to_dag();
    if !removed.is_empty() {
        warnings.push(format!(
            "removed {} cycle-closing edge(s) from the hierarchy",
            removed.len()
        ));
    }
    Ok(dag)
}

/// Run the evaluation command end to end.
///
/// # Errors
///
/// File, parse, and evaluation errors as described on the building blocks.
pub fn run_eval(
    hierarchy_path: &Path,
    truth_path: &Path,
    predicted_path: &Path,
    cfg: &EvalConfig,
) -> Result<(EvalReport, Vec<String>)> {
    cfg.validate()?;
    let mut warnings = Vec::new();
    let h = load_hierarchy(hierarchy_path, &mut warnings)?;
    let (instances, mut label_warnings) =
        load_instances(&h, &read_file(truth_path)?, &read_file(predicted_path)?, cfg.skip_unknown)?;
    warnings.append(&mut label_warnings);

    let rows = evaluate_all(&h, &instances, cfg)?;
    let reports = cfg
        .measures
        .iter()
        .enumerate()
        .map(|(col, m)| {
            let scores: Vec<f64> = rows.iter().map(|r| r[col]).collect();
            MeasureReport::from_scores(m.key(), scores, cfg.per_instance)
        })
        .collect();
    Ok((
        EvalReport {
            config: cfg.echo("eval"),
            reports,
        },
        warnings,
    ))
}

/// Derive short display names for predicted-label files: the file stem,
/// disambiguated with a positional suffix on repeats.
pub fn system_names(paths: &[impl AsRef<Path>]) -> Vec<String> {
    let stems: Vec<String> = paths
        .iter()
        .map(|p| {
            p.as_ref()
                .file_stem()
                .map(|s| s.to_string_lossy().into_owned())
                .unwrap_or_else(|| p.as_ref().display().to_string())
        })
        .collect();
    stems
        .iter()
        .enumerate()
        .map(|(i, stem)| {
            if stems.iter().filter(|s| *s == stem).count() > 1 {
                format!("{stem}#{}", i + 1)
            } else {
                stem.clone()
            }
        })
        .collect()
}

/// Run the comparison command: evaluate every system, rank per measure,
/// test pairwise significance, and correlate the measure rankings.
///
/// # Errors
///
/// As [`run_eval`], tagged with the failing system's name.
pub fn run_compare(
    hierarchy_path: &Path,
    truth_path: &Path,
    predicted_paths: &[impl AsRef<Path>],
    cfg: &EvalConfig,
) -> Result<(RankingReport, Vec<String>)> {
    cfg.validate()?;
    if predicted_paths.len() < 2 {
        return Err(Error::Invalid(
            "comparison needs at least two predicted-label files".to_string(),
        ));
    }
    let mut warnings = Vec::new();
    let h = load_hierarchy(hierarchy_path, &mut warnings)?;
    let truth_text = read_file(truth_path)?;
    let names = system_names(predicted_paths);

    let mut per_system: Vec<Vec<Vec<f64>>> = Vec::with_capacity(predicted_paths.len());
    for (path, name) in predicted_paths.iter().zip(&names) {
        let (instances, label_warnings) = load_instances(
            &h,
            &truth_text,
            &read_file(path.as_ref())?,
            cfg.skip_unknown,
        )
        .map_err(|e| Error::Invalid(format!("system {name}: {e}")))?;
        warnings.extend(label_warnings.into_iter().map(|w| format!("system {name}: {w}")));
        let rows = evaluate_all(&h, &instances, cfg)
            .map_err(|e| Error::Invalid(format!("system {name}: {e}")))?;
        per_system.push(rows);
    }

    let mut rankings = Vec::with_capacity(cfg.measures.len());
    let mut p_matrices = Vec::with_capacity(cfg.measures.len());
    let mut rank_vectors = Vec::with_capacity(cfg.measures.len());
    for (col, measure) in cfg.measures.iter().enumerate() {
        let orientation = measure.orientation();
        let series: Vec<ScoreSeries> = per_system
            .iter()
            .zip(&names)
            .map(|(rows, name)| {
                ScoreSeries::new(name.clone(), rows.iter().map(|r| r[col]).collect())
            })
            .collect();

        let ranked = rank_with_significance(&series, orientation, cfg.alpha);
        let mut by_system = vec![0usize; series.len()];
        for r in &ranked {
            by_system[r.index] = r.rank;
        }
        rank_vectors.push(by_system.iter().map(|&r| r as f64).collect::<Vec<f64>>());
        rankings.push(
            ranked
                .into_iter()
                .map(|r| RankRow {
                    system: r.index,
                    mean: r.mean,
                    rank: r.rank,
                    p_vs_leader: r.p_vs_leader,
                })
                .collect::<Vec<RankRow>>(),
        );

        let mut matrix = vec![vec![None; series.len()]; series.len()];
        for (i, a) in series.iter().enumerate() {
            for (j, b) in series.iter().enumerate() {
                if i != j {
                    matrix[i][j] =
                        Some(paired_sign_test(&a.scores, &b.scores, orientation).p_value);
                }
            }
        }
        p_matrices.push(matrix);
    }

    let mut config = cfg.echo("compare");
    for (name, path) in names.iter().zip(predicted_paths) {
        config.push((format!("system {name}"), path.as_ref().display().to_string()));
    }
    Ok((
        RankingReport {
            config,
            systems: names,
            measures: cfg.measures.iter().map(|m| m.key().to_string()).collect(),
            rankings,
            p_matrices,
            tau: rank_correlation_matrix(&rank_vectors),
        },
        warnings,
    ))
}

/// Correlate externally supplied rank vectors: a TSV with a header row of
/// measure names and one row per system holding its rank under each
/// measure.
///
/// # Errors
///
/// [`Error::Malformed`] with line numbers on ragged or non-numeric rows,
/// [`Error::Invalid`] when no data rows are present.
pub fn run_ranks_from(path: &Path) -> Result<TauReport> {
    let text = read_file(path)?;
    let mut lines = text.lines().enumerate().filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or_else(|| Error::Invalid(format!(
        "{} is empty; expected a header row of measure names",
        path.display()
    )))?;
    let measures: Vec<String> = header
        .split('\t')
        .skip(1)
        .map(|s| s.trim().to_string())
        .collect();
    if measures.is_empty() {
        return Err(Error::Malformed {
            line: 1,
            msg: "header must name a system column and at least one measure column".to_string(),
        });
    }

    let mut columns: Vec<Vec<f64>> = vec![Vec::new(); measures.len()];
    let mut rows = 0usize;
    for (idx, line) in lines {
        let cells: Vec<&str> = line.split('\t').collect();
        if cells.len() != measures.len() + 1 {
            return Err(Error::Malformed {
                line: idx + 1,
                msg: format!(
                    "expected {} columns, found {}",
                    measures.len() + 1,
                    cells.len()
                ),
            });
        }
        for (col, cell) in cells[1..].iter().enumerate() {
            let rank: f64 = cell.trim().parse().map_err(|_| Error::Malformed {
                line: idx + 1,
                msg: format!("'{}' is not a numeric rank", cell.trim()),
            })?;
            columns[col].push(rank);
        }
        rows += 1;
    }
    if rows == 0 {
        return Err(Error::Invalid(format!(
            "{} contains no rank rows",
            path.display()
        )));
    }
    Ok(TauReport {
        config: vec![
            ("command".to_string(), "compare".to_string()),
            ("ranks-from".to_string(), path.display().to_string()),
        ],
        measures,
        tau: rank_correlation_matrix(&columns),
    })
}

// ---------------------------------------------------------------------------
// Inner-node preprocessing
// ---------------------------------------------------------------------------

/// Output of [`preprocess_inner_nodes`].
#[derive(Debug, Clone)]
pub struct PreprocessResult {
    /// Hierarchy file with one fresh dummy leaf per affected inner node.
    pub hierarchy_text: String,
    /// Label file with inner-node occurrences rewritten to the dummies.
    pub labels_text: String,
    /// `(inner node, dummy leaf)` pairs, ascending by inner node.
    pub mapping: Vec<(NodeId, NodeId)>,
}

/// Rewrite labels that sit on inner nodes onto fresh dummy leaves.
///
/// Some measures reward shallow predictions when instances may live on
/// inner nodes; attaching a dummy leaf per affected node makes every label
/// a leaf. Dummy ids continue from the current maximum id, assigned in
/// ascending order of the affected inner nodes. Leaf labels pass through
/// unchanged.
///
/// # Errors
///
/// Parse errors from either file; [`Error::UnknownLabel`] for label ids
/// missing from the hierarchy.
pub fn preprocess_inner_nodes(hierarchy_text: &str, labels_text: &str) -> Result<PreprocessResult> {
    let h = parse_hierarchy(hierarchy_text)?;
    let lines = parse_label_file(labels_text)?;

    let mut affected: BTreeMap<NodeId, NodeId> = BTreeMap::new();
    for (idx, line) in lines.iter().enumerate() {
        for &id in line {
            if !h.contains(id) {
                return Err(Error::UnknownLabel { line: idx + 1, id });
            }
            if !h.children_of(id)?.is_empty() {
                affected.insert(id, 0);
            }
        }
    }
    let base = h.node_ids().iter().copied().max().unwrap_or(0) + 1;
    for (offset, dummy) in affected.values_mut().enumerate() {
        *dummy = base + offset as NodeId;
    }

    let mut hierarchy_text = String::new();
    let format_edge = |parent: NodeId, child: NodeId, weight: f64| {
        if weight == 1.0 {
            format!("{parent} {child}\n")
        } else {
            format!("{parent} {child} {}\n", crate::report::sig6(weight))
        }
    };
    for (parent, child, weight) in h.edges() {
        hierarchy_text.push_str(&format_edge(parent, child, weight));
    }
    for (&inner, &dummy) in &affected {
        hierarchy_text.push_str(&format_edge(inner, dummy, 1.0));
    }

    let mut labels_text = String::new();
    for line in &lines {
        let rewritten: Vec<String> = line
            .iter()
            .map(|id| affected.get(id).unwrap_or(id).to_string())
            .collect();
        labels_text.push_str(&rewritten.join(" "));
        labels_text.push('\n');
    }

    Ok(PreprocessResult {
        hierarchy_text,
        labels_text,
        mapping: affected.into_iter().collect(),
    })
}
