//! Shoulder-surfing vulnerability metrics.
//!
//! Observers' guesses are compared with the original passwords through an
//! ensemble of fourteen metrics in three clusters (password characteristics,
//! distance metrics and guessing order), and the resulting score
//! distributions are compared across authentication schemes and observer
//! groups with nonparametric tests.

pub mod dataset;
pub mod ensemble;
pub mod guess_order;
pub mod metrics;
mod presets;
pub mod report;
pub mod scheme;
pub mod stats;

pub use dataset::{ObservationRecord, ObserverType};
pub use ensemble::{ClusterScores, MetricVector, ScoringConfig, Weighting};
pub use guess_order::{RankVariant, Strategy};
pub use metrics::MetricId;
pub use scheme::{PasswordSeq, Scheme, SchemeRegistry};
