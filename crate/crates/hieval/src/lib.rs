//! Evaluation measures for hierarchical classification.
//!
//! Classifiers that predict nodes of a class hierarchy (a tree or DAG of
//! labels) need measures that charge mistakes by how far a prediction lands
//! from the truth, not just whether it matched exactly. This crate implements
//! three families of such measures plus the statistics used to compare
//! systems with them:
//!
//! * **Pair-based measures** ([`pair_measures`]): the true and predicted
//!   label sets are paired up by a minimum-cost-flow solve over hierarchy
//!   distances ([`flow`]), yielding a tree/graph induced error and a
//!   normalized multi-label accuracy.
//! * **Set-based measures** ([`set_measures`]): label sets are augmented with
//!   their ancestors (or descendants) and compared with precision, recall,
//!   F1, and symmetric-difference loss.
//! * **LCA-based measures** ([`lca_measures`]): label sets are expanded into
//!   small graphs spanned by lowest common ancestors and minimal connecting
//!   paths, limiting how much of the hierarchy an error can drag in.
//!
//! [`stats`] provides the rank correlation, sign test, and
//! significance-aware ranking used to compare systems, and [`pipeline`] ties
//! everything into the `hieval` command-line tool (subcommands `eval`,
//! `compare`, and `preprocess-inner-nodes`).
//!
//! Hierarchies are plain text files with one `parent child [weight]` edge per
//! line; label files carry one whitespace-separated label set per instance.
//! See the README for the file formats and CLI reference.

pub mod cli;
pub mod flow;
pub mod hierarchy;
pub mod lca_measures;
pub mod pair_measures;
pub mod pipeline;
pub mod report;
pub mod set_measures;
pub mod stats;

pub use hierarchy::{Hierarchy, LcaResult, NodeId, PathOutcome, PathSet};
pub use pair_measures::InstanceLabels;

/// Errors produced while parsing inputs or evaluating measures.
///
/// The CLI maps [`Error::Malformed`] (and most other variants) to exit code
/// 2 and [`Error::UnknownLabel`] to exit code 3.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    /// An input file line could not be parsed.
    #[error("line {line}: {msg}")]
    Malformed { line: usize, msg: String },
    /// A label file referenced an id absent from the hierarchy.
    #[error("line {line}: unknown label id {id}")]
    UnknownLabel { line: usize, id: NodeId },
    /// A programmatic query referenced an id absent from the hierarchy.
    #[error("unknown node id {0}")]
    UnknownNode(NodeId),
    /// Two labels have no connecting path and no threshold was set to
    /// bridge them with an artificial ancestor.
    #[error("no connecting path between {a} and {b}; set an LCA threshold to evaluate disconnected labels")]
    Disconnected { a: NodeId, b: NodeId },
    /// Any other invalid input or configuration.
    #[error("{0}")]
    Invalid(String),
}

impl Error {
    /// Process exit code the CLI uses for this error: 3 when a label id is
    /// missing from the hierarchy, 2 for everything else.
    pub fn exit_code(&self) -> u8 {
        match self {
            Error::UnknownLabel { .. } => 3,
            _ => 2,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
