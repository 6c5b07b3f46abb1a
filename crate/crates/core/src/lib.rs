//! Statistical toolkit for clustering animals by body measurements.
//!
//! The pipeline this crate supports:
//!
//! 1. load a table of animals by measurements ([`dataset`]), averaging image
//!    replicates and grader scores where needed;
//! 2. summarize each column and compute Pearson correlations ([`stats`]);
//! 3. pick the features most correlated with a target, z-score them;
//! 4. run k-means over a range of k and take the knee of the distortion
//!    curve ([`clustering`]);
//! 5. number clusters by ascending first centroid coordinate;
//! 6. test whether a response differs between clusters with one-way ANOVA
//!    and Tukey HSD ([`inference`]).
//!
//! ```
//! use phenocluster::clustering::{kmeans_fit, order_clusters, KMeansConfig};
//!
//! let points = vec![vec![0.0], vec![0.2], vec![5.0], vec![5.3]];
//! let model = order_clusters(&kmeans_fit(&points, &KMeansConfig::new(2).with_seed(7))?);
//! assert_eq!(model.labels, [1, 1, 2, 2]);
//! # Ok::<(), phenocluster::Error>(())
//! ```

pub mod clustering;
pub mod dataset;
mod error;
pub mod inference;
pub mod stats;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/data.md")]
    mod data {}
    #[doc = include_str!("../../../book/src/correlation.md")]
    mod correlation {}
    #[doc = include_str!("../../../book/src/kmeans.md")]
    mod kmeans {}
    #[doc = include_str!("../../../book/src/elbow.md")]
    mod elbow {}
    #[doc = include_str!("../../../book/src/inference.md")]
    mod inference {}
    #[doc = include_str!("../../../book/src/cli.md")]
    mod cli {}
}
