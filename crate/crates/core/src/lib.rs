//! Forward differences of the entropy function over variable subsets.
//!
//! The entropy function `h` of a joint distribution is expanded on the subset
//! lattice as `h_A = Σ_{B⊆A} δ_B`. Second-order differences are negated mutual
//! informations; third-order differences measure how much conditioning on a
//! third variable changes a pairwise information. A negative `δ_ijk` marks the
//! triple as a *synergy*, which covers both suppressor variables in regression
//! and unshielded colliders in Bayes networks.
//!
//! The crate provides Gaussian, categorical and tabulated entropy oracles
//! ([`entropy`]), the inversion itself ([`forward_diff`]), synergy detection
//! ([`synergy`]), graph-restricted scanning ([`graph`], [`scan`]), analytic
//! model constructors ([`generators`]) and reports ([`report`]). With the
//! default `cli` feature it also has file formats (`io`) and the command
//! line (`cli`).
//!
//! All differences and informations are in millibits (1024 per bit);
//! entropies returned by oracles are in nats.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

#[cfg(feature = "cli")]
pub mod cli;
pub mod entropy;
pub mod error;
pub mod forward_diff;
pub mod generators;
pub mod graph;
#[cfg(feature = "cli")]
pub mod io;
pub mod lattice;
pub mod linalg;
pub mod report;
pub mod scan;
pub mod synergy;

pub use entropy::{
    conditional_mutual_information, mutual_information, to_millibits, CorrelationMatrix,
    EntropyOracle, ProbabilityTable,
};
pub use error::{Error, Result};
pub use forward_diff::{
    cmi_from_deltas, conditional_delta, delta_third_order, forward_differences,
    reconstruct_entropy, ConditionalDeltaQuery, DeltaTable,
};
pub use generators::{
    dag_to_correlation, undirected_model, xor_table, LinearGaussianDag, UndirectedConfig,
    XorTableParams,
};
pub use graph::{check_separation_zero, enumerate_node_clusters, DirectedGraph, Graph};
pub use lattice::VariableSet;
pub use report::{ReportDocument, Units};
pub use scan::{cluster_scan, colour_synergies, ColouredGraph, NodeColour, ScanResult};
pub use synergy::{
    classify_suppression, detect_synergies, explained_information, gaussian_delta_closed_form,
    partial_gaussian_delta, unshielded_collider_test, ExplainedDecomposition, SuppressionType,
    SynergyFinding,
};
