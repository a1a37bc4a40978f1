//! Online data-stream clustering built on tightest-neighbor (mutual k-NN)
//! graphs.
//!
//! Incoming points are summarized into adaptive-radius micro-clusters over a
//! sliding window; micro-cluster centers are then grouped into macro-clusters
//! with the k-tightest-neighbor clustering algorithm (`ktnc`), which also
//! rejects outliers through the tightest-neighbor outlier factor.

pub mod io;
pub mod metrics;
pub mod snn;
pub mod spatial;
pub mod stream;
pub mod tn;
