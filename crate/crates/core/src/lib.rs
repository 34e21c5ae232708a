//! Metrically private measures and differentially private synthetic data.
//!
//! A probability measure on a finite metric space is quantized onto a net,
//! the net is folded onto `[0, 1]` along a spanning-tree tour, and the folded
//! weights are perturbed by a superregular random walk (a Haar-coefficient
//! Laplace walk whose partial sums stay polylogarithmic) before being
//! projected back onto probability measures in the Wasserstein-1 geometry.

// `!(x > 0.0)` is used on purpose: it also rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bench;
pub mod config;
pub mod error;
pub mod folding;
pub mod haar;
pub mod interval;
pub mod io;
pub mod measure;
pub mod metric;
pub mod net;
pub mod rng;
pub mod space;
pub mod synth;
pub mod transport;

pub use config::MechanismConfig;
pub use error::{Error, Result};
pub use folding::{FoldingMap, SpanningTree};
pub use haar::{HaarSystem, SuperregularNoise};
pub use interval::IntervalMechanismResult;
pub use measure::WeightedMeasure;
pub use metric::MetricMechanismResult;
pub use net::Net;
pub use rng::RandomStream;
pub use space::{FiniteMetricSpace, Metric};
pub use synth::{Dataset, Domain, SyntheticDataset};
