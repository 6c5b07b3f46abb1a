//! k-means clustering, elbow-based choice of k, and centroid-ordered labels.
//!
//! Clusters produced by k-means carry no intrinsic order. After fitting,
//! [`order_clusters`] renumbers them by ascending first centroid coordinate.
//! When the feature columns are ordered by decreasing correlation with the
//! target, cluster 1 then holds the animals lowest on the strongest feature
//! and cluster k the highest.

mod elbow;
mod kmeans;

pub use elbow::{detect_knee, elbow_scan, elbow_scan_models, ElbowResult};
pub use kmeans::{assign, kmeans_fit, mix_seed, order_clusters, Init, KMeansConfig, KMeansModel};
