use std::fs;
use std::path::{Path, PathBuf};

use sha2::{Digest, Sha256};

use super::{
    border_analysis, evaluate, evaluation_csv, label_features, labels_csv, split, stage2_train, BorderAnalysis,
    EvaluationReport, EvaluationRow, PipelineConfig, PipelineError, SplitSpec, Stage1Options,
};
use crate::autonet::{write_model, AdamConfig, AutoencoderSpec, TrainConfig};
use crate::features::build_feature_table;
use crate::ingest::{load_price_table, read_ticker_list, Warning};
use crate::kmeans::{select_k, KMeansConfig};
use crate::plot::{scatter_pair_svg, LineChart, ScatterChart, ScatterPoint};

pub const MANIFEST_NAME: &str = "manifest.txt";

/// File names written by [`run_pipeline`], in manifest order.
pub fn artifact_names() -> [&'static str; 6] {
    [
        "labels.csv",
        "model.tscnet",
        "k_sweep.csv",
        "loss.csv",
        "evaluation.csv",
        "scatter.svg",
    ]
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub name: String,
    /// Lowercase hex SHA-256 of the file contents.
    pub sha256: String,
}

/// One `<sha256>  <file>` line per artifact (the `sha256sum` layout).
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Manifest {
    pub entries: Vec<ManifestEntry>,
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    Sha256::digest(bytes).iter().map(|b| format!("{b:02x}")).collect()
}

impl Manifest {
    pub fn push(&mut self, name: &str, contents: &[u8]) {
        self.entries.push(ManifestEntry {
            name: name.to_string(),
            sha256: sha256_hex(contents),
        });
    }

    pub fn to_text(&self) -> String {
        self.entries
            .iter()
            .map(|e| format!("{}  {}\n", e.sha256, e.name))
            .collect()
    }

    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let entries = text
            .lines()
            .enumerate()
            .filter(|(_, l)| !l.trim().is_empty())
            .map(|(i, l)| {
                let (hash, name) = l.split_once("  ").ok_or_else(|| PipelineError::Records {
                    line: i as u64 + 1,
                    message: "expected `<sha256>  <file>`".into(),
                })?;
                if hash.len() != 64 || !hash.bytes().all(|b| b.is_ascii_hexdigit()) {
                    return Err(PipelineError::Records {
                        line: i as u64 + 1,
                        message: format!("bad checksum `{hash}`"),
                    });
                }
                Ok(ManifestEntry {
                    name: name.to_string(),
                    sha256: hash.to_ascii_lowercase(),
                })
            })
            .collect::<Result<_, _>>()?;
        Ok(Self { entries })
    }

    /// Names of entries whose file under `dir` is missing or has changed.
    pub fn mismatches(&self, dir: &Path) -> Vec<String> {
        self.entries
            .iter()
            .filter(|e| fs::read(dir.join(&e.name)).map_or(true, |b| sha256_hex(&b) != e.sha256))
            .map(|e| e.name.clone())
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct RunSummary {
    pub out_dir: PathBuf,
    pub manifest: Manifest,
    pub k: usize,
    /// Silhouette of the chosen clustering, when k ≥ 2.
    pub silhouette: Option<f64>,
    pub final_loss: f64,
    pub report: EvaluationReport<f64>,
    pub border: BorderAnalysis<f64>,
    pub warnings: Vec<Warning>,
}

pub fn sweep_chart_svg(scores: &[(usize, f64)]) -> String {
    let points: Vec<(f64, f64)> = scores.iter().map(|&(k, s)| (k as f64, s)).collect();
    LineChart {
        title: "Silhouette score by number of clusters",
        x_label: "k",
        y_label: "silhouette",
        points: &points,
        markers: true,
    }
    .to_svg()
}

pub fn loss_chart_svg(losses: &[(usize, f64)]) -> String {
    let points: Vec<(f64, f64)> = losses.iter().map(|&(e, l)| (e as f64, l)).collect();
    LineChart {
        title: "Training loss",
        x_label: "epoch",
        y_label: "mean squared error",
        points: &points,
        markers: false,
    }
    .to_svg()
}

/// Scatter points for evaluation rows, coloured by the k-means label or by
/// the predicted one. Disagreements are highlighted either way.
pub fn scatter_points(rows: &[EvaluationRow<f64>], by_kmeans: bool) -> Vec<ScatterPoint> {
    rows.iter()
        .map(|r| ScatterPoint {
            x: r.volatility,
            y: r.ret,
            label: if by_kmeans { r.kmeans } else { r.predicted },
            highlight: r.missed(),
            name: r.ticker.clone(),
        })
        .collect()
}

fn scatter_svg(rows: &[EvaluationRow<f64>]) -> String {
    let left = scatter_points(rows, true);
    let right = scatter_points(rows, false);
    scatter_pair_svg(
        &ScatterChart {
            title: "KMeans clustering",
            x_label: "volatility",
            y_label: "return",
            points: &left,
        },
        &ScatterChart {
            title: "Autoencoder clustering",
            x_label: "volatility",
            y_label: "return",
            points: &right,
        },
    )
}

/// Stage I then Stage II, writing every artifact plus `manifest.txt` into
/// `config.out_dir`. Nothing is written unless every stage succeeds; if a
/// write fails, files already written by this call are removed.
pub fn run_pipeline(config: &PipelineConfig) -> Result<RunSummary, PipelineError> {
    config.validate()?;
    let tickers = config.tickers_path.as_deref().map(read_ticker_list).transpose()?;
    let loaded = load_price_table::<f64>(&config.prices_path, tickers.as_deref(), config.start_date)?;
    let features = build_feature_table(&loaded.table, config.trading_days);
    let mut warnings = loaded.warnings;
    warnings.extend(features.warnings);

    let options = Stage1Options {
        k: config.k,
        k_min: config.k_min,
        k_max: config.k_max,
        seed: config.seed,
        restarts: config.restarts,
        trading_days: config.trading_days,
        canonical_labels: config.canonical_labels,
    };
    let (records, model, selection) = label_features(&features.vectors, &options)?;
    let sweep = match selection {
        Some(s) => s.scores,
        None => {
            let k_max = config.k_max.min(records.len().saturating_sub(1));
            if k_max >= config.k_min {
                let points = super::feature_matrix(records.iter().map(|r| r.point()));
                let base = KMeansConfig::new(2)
                    .with_seed(config.seed)
                    .with_restarts(config.restarts);
                select_k(points.view(), config.k_min, k_max, &base)?.scores
            } else {
                Vec::new()
            }
        }
    };

    let (train_set, test_set) = split(
        &records,
        &SplitSpec {
            test_fraction: config.test_fraction,
            seed: config.seed,
            stratify: config.stratify,
        },
    )?;
    let architecture = AutoencoderSpec::default().with_latent_width(model.k);
    let train_config = TrainConfig {
        epochs: config.epochs,
        batch_size: config.batch_size,
        seed: config.seed,
        adam: AdamConfig::default(),
    };
    let (net, history) = stage2_train(&train_set, &architecture, &train_config, config.seed)?;
    let report = evaluate(&net, &test_set, model.k)?;
    let border = border_analysis(&records, &report);

    let mut sweep_csv = String::from("k,silhouette\n");
    for (k, s) in &sweep {
        sweep_csv.push_str(&format!("{k},{s:.16e}\n"));
    }
    let contents = [
        labels_csv(&records),
        write_model(&net),
        sweep_csv,
        history.to_csv(),
        evaluation_csv(&report),
        scatter_svg(&report.rows),
    ];

    let mut manifest = Manifest::default();
    for (name, body) in artifact_names().iter().zip(&contents) {
        manifest.push(name, body.as_bytes());
    }
    let mut files: Vec<(&str, &str)> = artifact_names()
        .into_iter()
        .zip(contents.iter().map(String::as_str))
        .collect();
    let manifest_text = manifest.to_text();
    files.push((MANIFEST_NAME, &manifest_text));
    write_all(&config.out_dir, &files)?;

    Ok(RunSummary {
        out_dir: config.out_dir.clone(),
        manifest,
        k: model.k,
        silhouette: model.silhouette,
        final_loss: history.final_loss().unwrap_or(f64::NAN),
        report,
        border,
        warnings,
    })
}

fn io_error(path: &Path) -> impl FnOnce(std::io::Error) -> PipelineError + '_ {
    move |source| PipelineError::Io {
        path: path.display().to_string(),
        source,
    }
}

fn write_all(dir: &Path, files: &[(&str, &str)]) -> Result<(), PipelineError> {
    fs::create_dir_all(dir).map_err(io_error(dir))?;
    let mut written = Vec::new();
    for (name, body) in files {
        let path = dir.join(name);
        if let Err(e) = fs::write(&path, body) {
            for p in written {
                let _ = fs::remove_file(p);
            }
            return Err(io_error(&path)(e));
        }
        written.push(path);
    }
    Ok(())
}
