//! Behavioural segmentation: PCA on standardised features, k-means with
//! silhouette-based choice of k, t-SNE coordinates for plotting and
//! per-cluster profiles.

pub mod ari;
pub mod error;
pub mod io;
pub mod kmeans;
pub mod pca;
pub mod pipeline;
pub mod points;
pub mod profile;
pub mod silhouette;
pub mod tsne;

pub use ari::{adjusted_rand_index, same_partition};
pub use error::{Error, Result};
pub use kmeans::{kmeans, ClusterModel, KMeansConfig};
pub use pca::{fit_pca, Components, PcaModel};
pub use pipeline::{segment, SegmentConfig, SegmentResult};
pub use points::Points;
pub use profile::{profile_clusters, radar, ClusterProfile, Column};
pub use silhouette::{select_k, silhouette_mean, silhouette_samples, KDiagnostic, Selection, WEAK_STRUCTURE};
pub use tsne::{tsne_embed, TsneConfig};
