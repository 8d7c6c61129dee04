//! Local and sparse Weisfeiler-Leman refinements over `k`-tuples, their
//! graph kernels, and generators for the graph pairs that separate them.

pub mod bench;
pub mod error;
pub mod families;
pub mod graph;
pub mod kernel;
pub mod refine;
pub mod tudataset;
pub mod tuples;
pub mod unroll;

pub use error::{Error, Result};
pub use families::{ab_pair, cfi_pair, cycle, cycle_pair, padded_colored_pair};
pub use graph::{apply_permutation, connected_components, disjoint_union, LabeledGraph};
pub use kernel::{feature_map, feature_maps, gram_matrix, GramFormat, GramMatrix, SparseFeatureVector};
pub use refine::{
    distinguish, distinguish_on_union, run_to_stable, Algorithm, ColorDictionary, Coloring, Distinguish, Iterations,
    KWlMode, RefinementConfig,
};
pub use tudataset::{load_tudataset, write_tudataset, GraphCollection, GraphTargets};
pub use tuples::{build_tuple_graph, DenseTupleSpace, NodeTuple, TupleGraph};
pub use unroll::{trees_isomorphic, unroll, UnrolledTree};
