//! Gower dissimilarities, complete-linkage agglomeration, cuts, elbow
//! selection, and cluster profiling.

pub mod cut;
pub mod gower;
pub mod linkage;
pub mod profile;

pub use cut::{cut_tree, elbow_curve, ClusterAssignment, ElbowCurve, ElbowPoint};
pub use gower::{gower_dissimilarity, BinaryMode, DissimilarityMatrix};
pub use linkage::{agglomerate_complete_linkage, Dendrogram, Linkage, Merge, Node};
pub use profile::{summarize_clusters, ClusterProfile, ClusterSummary};
