//! Structured (sparse + fused) CP tensor factorization and dynamic tensor
//! clustering.
//!
//! The pipeline: stack tensor samples into one higher-order tensor, run an
//! alternating truncate-fuse-normalize power method with greedy deflation
//! to obtain a rank-R CP factorization, then cluster the rows of the
//! last-mode factor matrix with K-means. Model selection uses a BIC-style
//! criterion for the factorization parameters and the gap statistic for
//! the number of clusters.
//!
//! ```
//! use dtc_core::simgen::{gen_3d, ClusterRatios};
//! use dtc_core::stf::ConstraintSpec;
//! use dtc_core::cluster::{dtc, clustering_error};
//!
//! let ds = gen_3d(24, 20, 0.8, ClusterRatios::Equal, 7).unwrap();
//! let spec = ConstraintSpec::uniform(&[20, 20, 20, 24], 10, 0.5, 12345);
//! let (clust, _factors) = dtc(&ds.samples, 4, 2, &spec).unwrap();
//! let err = clustering_error(&clust.assignment, &ds.truth_assignment).unwrap();
//! assert!(err <= 0.5);
//! ```

pub mod cluster;
pub mod error;
pub mod guide;
pub mod ingest;
pub mod proxops;
pub mod replicate;
pub mod simgen;
pub mod stf;
pub mod tensor;
pub mod tuning;

pub use error::{DtcError, Result};
pub use tensor::{DenseTensor, FactorSet};
