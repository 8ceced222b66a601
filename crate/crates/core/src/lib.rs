//! Correspondence analysis (CA), taxicab correspondence analysis (TCA) and
//! sign-quadrant bicluster trees for sparse document-term tables.
//!
//! The numeric core is generic over [`Scalar`] (`f32` or `f64`); the aliases
//! at the crate root fix it to `f64`, which is what the pipeline and CLI use.

pub mod ca;
pub mod dense;
pub mod equivalence;
pub mod error;
pub mod io;
pub mod matrix;
pub mod pipeline;
pub mod report;
pub mod scalar;
pub mod svd;
pub mod svg;
pub mod taxicab;
pub mod text;
pub mod tree;

pub use ca::{ca, connected_components, lateral_ordering_flag, principal_block, scaffold};
pub use dense::Dense;
pub use equivalence::{merge_equivalent, preprocess, prune_zero_marginals, MergeAxes, MergeMap};
pub use error::{Error, Result};
pub use io::{read_matrix, write_matrix, MatrixFormat};
pub use matrix::{
    adjusted_sparsity, hapax_report, marginal_summary, sparsity, Axis, LabeledMatrix,
};
pub use pipeline::{analyze, Method, PlotKind, RunConfig};
pub use scalar::Scalar;
pub use taxicab::{
    contribution_coordinates, contributions, deflate, qsr, taxicab_axis, tca, AxisStrategy,
};
pub use text::{build_dtm, split_phrases, tokenize, Segmentation, Vocabulary};
pub use tree::{
    binary_split, build_tree, phrase_evidence, quadrant_split, topics, SplitMode, TreeParams,
};

pub type Matrix = LabeledMatrix<f64>;
pub type Scaffold = ca::CorrespondenceScaffold<f64>;
pub type CaOutput = ca::CaResult<f64>;
pub type TcaOutput = taxicab::TcaResult<f64>;
pub type Axis64 = taxicab::TcaAxis<f64>;
pub type Tree = tree::BiclusterTree<f64>;
pub type Node = tree::TreeNode<f64>;
