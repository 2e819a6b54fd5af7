//! Two-stage clustering of price time series.
//!
//! Stage I turns each ticker's adjusted closes into an annualized
//! ⟨volatility, return⟩ vector and labels the vectors with k-means, choosing
//! k by silhouette when asked. Stage II trains a dense autoencoder to regress
//! those labels and predicts labels for held-out tickers by rounding its
//! single output.
//!
//! Numeric modules are generic over [`Scalar`] (`f32` or `f64`); the aliases
//! below fix the element type to `f64`, which is what the pipeline and CLI use.

pub mod autonet;
pub mod features;
pub mod ingest;
pub mod kmeans;
pub mod pipeline;
pub mod plot;
pub mod rng;
mod scalar;
pub mod synthetic;

pub use scalar::Scalar;

pub type PriceSeries = ingest::PriceSeries<f64>;
pub type PriceTable = ingest::PriceTable<f64>;
pub type FeatureVector = features::FeatureVector<f64>;
pub type KMeansModel = kmeans::KMeansModel<f64>;
pub type DenseNetwork = autonet::DenseNetwork<f64>;
pub type TrainHistory = autonet::TrainHistory<f64>;
pub type LabeledRecord = pipeline::LabeledRecord<f64>;
pub type EvaluationReport = pipeline::EvaluationReport<f64>;

pub type PriceSeries32 = ingest::PriceSeries<f32>;
pub type FeatureVector32 = features::FeatureVector<f32>;
pub type KMeansModel32 = kmeans::KMeansModel<f32>;
pub type DenseNetwork32 = autonet::DenseNetwork<f32>;
