//! Stage I (features, k-means labels) and Stage II (autoencoder training,
//! prediction, evaluation) plus the end-to-end run that writes artifacts.

mod config;
mod evaluate;
mod records;
mod run;
mod split;

use ndarray::Array2;
use thiserror::Error;

use crate::autonet::{self, AutoencoderSpec, DenseNetwork, NetError, TrainConfig, TrainHistory};
use crate::features::{build_feature_table, FeatureVector};
use crate::ingest::{IngestError, PriceTable, Warning};
use crate::kmeans::{kmeans_fit, select_k, KMeansConfig, KMeansError, KMeansModel, KSelection};
use crate::Scalar;

pub use config::{KChoice, PipelineConfig};
pub use evaluate::{
    accuracy, border_analysis, evaluate, BorderAnalysis, ClusterBounds, Disagreement, EvaluationReport, EvaluationRow,
};
pub use records::{
    evaluation_csv, labels_csv, parse_evaluation_csv, parse_feature_rows, parse_labels_csv, parse_loss_csv,
    parse_sweep_csv, FeatureRow, EVALUATION_HEADER, LABELS_HEADER,
};
pub use run::{
    artifact_names, loss_chart_svg, run_pipeline, scatter_points, sha256_hex, sweep_chart_svg, Manifest, ManifestEntry,
    RunSummary, MANIFEST_NAME,
};
pub use split::{split, test_count, Halves, SplitSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Stage {
    Config,
    Ingest,
    Features,
    Clustering,
    Split,
    Training,
    Evaluation,
    Output,
}

impl std::fmt::Display for Stage {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Stage::Config => "config",
            Stage::Ingest => "ingest",
            Stage::Features => "features",
            Stage::Clustering => "clustering",
            Stage::Split => "split",
            Stage::Training => "training",
            Stage::Evaluation => "evaluation",
            Stage::Output => "output",
        })
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("[config] {0}")]
    Config(String),
    #[error("[ingest] {0}")]
    Ingest(#[from] IngestError),
    #[error("[features] no ticker has enough prices for a feature vector")]
    NoFeatures,
    #[error("[clustering] {0}")]
    Clustering(#[from] KMeansError),
    #[error("[split] {0}")]
    Split(String),
    #[error("[{stage}] {source}")]
    Net {
        stage: Stage,
        #[source]
        source: NetError,
    },
    #[error("[{stage}] dataset is empty")]
    EmptyDataset { stage: Stage },
    #[error("[input] line {line}: {message}")]
    Records { line: u64, message: String },
    #[error("[output] {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
}

impl PipelineError {
    pub fn stage(&self) -> Stage {
        match self {
            PipelineError::Config(_) | PipelineError::Records { .. } => Stage::Config,
            PipelineError::Ingest(_) => Stage::Ingest,
            PipelineError::NoFeatures => Stage::Features,
            PipelineError::Clustering(_) => Stage::Clustering,
            PipelineError::Split(_) => Stage::Split,
            PipelineError::Net { stage, .. } | PipelineError::EmptyDataset { stage } => *stage,
            PipelineError::Io { .. } => Stage::Output,
        }
    }

    fn net(stage: Stage) -> impl FnOnce(NetError) -> Self {
        move |source| PipelineError::Net { stage, source }
    }
}

/// One ticker with its features and Stage I cluster.
#[derive(Debug, Clone, PartialEq)]
pub struct LabeledRecord<T> {
    pub ticker: String,
    pub volatility: T,
    pub ret: T,
    pub cluster: usize,
}

impl<T: Scalar> LabeledRecord<T> {
    pub fn point(&self) -> [T; 2] {
        [self.volatility, self.ret]
    }
}

/// `n x 2` matrix of ⟨volatility, return⟩ rows.
pub fn feature_matrix<T: Scalar>(rows: impl ExactSizeIterator<Item = [T; 2]>) -> Array2<T> {
    let n = rows.len();
    let flat: Vec<T> = rows.flat_map(|r| r.into_iter()).collect();
    Array2::from_shape_vec((n, 2), flat).expect("two columns per row")
}

/// `n x 1` matrix of cluster ids as reals.
pub fn target_matrix<T: Scalar>(records: &[LabeledRecord<T>]) -> Array2<T> {
    Array2::from_shape_fn((records.len(), 1), |(i, _)| T::from_usize_lossy(records[i].cluster))
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stage1Options {
    pub k: KChoice,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub trading_days: f64,
    /// Renumber clusters by descending mean return.
    pub canonical_labels: bool,
}

impl Default for Stage1Options {
    fn default() -> Self {
        Self {
            k: KChoice::Fixed(4),
            k_min: 2,
            k_max: 10,
            seed: 7,
            restarts: 10,
            trading_days: crate::features::TRADING_DAYS,
            canonical_labels: false,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Stage1Output<T> {
    pub records: Vec<LabeledRecord<T>>,
    pub model: KMeansModel<T>,
    /// Present when k was chosen automatically.
    pub selection: Option<KSelection<T>>,
    pub warnings: Vec<Warning>,
}

/// Records, the fitted model and, for automatic k, the sweep.
pub type Labelled<T> = (Vec<LabeledRecord<T>>, KMeansModel<T>, Option<KSelection<T>>);

/// Clusters precomputed feature vectors (order preserved).
pub fn label_features<T: Scalar>(
    vectors: &[FeatureVector<T>],
    options: &Stage1Options,
) -> Result<Labelled<T>, PipelineError> {
    if vectors.is_empty() {
        return Err(PipelineError::NoFeatures);
    }
    let points = feature_matrix(vectors.iter().map(FeatureVector::point));
    let base = KMeansConfig::new(2)
        .with_seed(options.seed)
        .with_restarts(options.restarts);

    let (mut model, selection) = match options.k {
        KChoice::Fixed(k) => (kmeans_fit(points.view(), &KMeansConfig { k, ..base })?, None),
        KChoice::Auto => {
            let k_max = options.k_max.min(vectors.len().saturating_sub(1));
            let selection = select_k(points.view(), options.k_min, k_max, &base)?;
            (selection.best_model.clone(), Some(selection))
        }
    };
    if options.canonical_labels {
        model.canonicalize_by_descending(1);
    }

    let records = vectors
        .iter()
        .zip(&model.assignments)
        .map(|(v, &cluster)| LabeledRecord {
            ticker: v.ticker.clone(),
            volatility: v.volatility,
            ret: v.ret,
            cluster,
        })
        .collect();
    Ok((records, model, selection))
}

/// Features for every ticker, then k-means labels.
pub fn stage1_label<T: Scalar>(
    table: &PriceTable<T>,
    options: &Stage1Options,
) -> Result<Stage1Output<T>, PipelineError> {
    let features = build_feature_table(table, T::lit(options.trading_days));
    let (records, model, selection) = label_features(&features.vectors, options)?;
    Ok(Stage1Output {
        records,
        model,
        selection,
        warnings: features.warnings,
    })
}

/// Builds the autoencoder and fits it to map ⟨volatility, return⟩ to the
/// numeric cluster id.
pub fn stage2_train<T: Scalar>(
    train: &[LabeledRecord<T>],
    architecture: &AutoencoderSpec,
    config: &TrainConfig<T>,
    seed: u64,
) -> Result<(DenseNetwork<T>, TrainHistory<T>), PipelineError> {
    if train.is_empty() {
        return Err(PipelineError::EmptyDataset { stage: Stage::Training });
    }
    let mut net = architecture.build(seed).map_err(PipelineError::net(Stage::Training))?;
    let inputs = feature_matrix(train.iter().map(LabeledRecord::point));
    let targets = target_matrix(train);
    let history =
        autonet::train(&mut net, inputs.view(), targets.view(), config).map_err(PipelineError::net(Stage::Training))?;
    Ok((net, history))
}
