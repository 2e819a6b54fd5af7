use std::fmt::Display;
use std::fs;
use std::path::{Path, PathBuf};

use tsclust::autonet::{load_model, predict_labels, write_model, AdamConfig, AutoencoderSpec, TrainConfig};
use tsclust::features::build_feature_table;
use tsclust::ingest::{load_price_table, read_ticker_list, LoadedPrices, Warning};
use tsclust::kmeans::{select_k, KMeansConfig};
use tsclust::pipeline::{
    border_analysis, evaluate, evaluation_csv, feature_matrix, label_features, labels_csv, loss_chart_svg,
    parse_evaluation_csv, parse_feature_rows, parse_labels_csv, parse_loss_csv, parse_sweep_csv, run_pipeline,
    scatter_points, stage2_train, sweep_chart_svg, EvaluationRow, LabeledRecord, PipelineConfig, Stage1Options,
    MANIFEST_NAME,
};
use tsclust::plot::{ScatterChart, ScatterPoint};

use crate::args::{
    EvaluateArgs, KRangeArgs, LabelArgs, PredictArgs, PriceArgs, ReportArgs, RunArgs, SelectKArgs, TrainArgs,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad flag combination found after parsing; exit 2.
    Usage(String),
    /// Bad or missing data, or a failed stage; exit 1.
    Data(String),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Data(_) => 1,
        }
    }
}

impl Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Usage(m) | CliError::Data(m) => f.write_str(m),
        }
    }
}

fn data(e: impl Display) -> CliError {
    CliError::Data(e.to_string())
}

fn read(path: &Path) -> Result<String, CliError> {
    fs::read_to_string(path).map_err(|e| CliError::Data(format!("{}: {e}", path.display())))
}

/// Writes every file or none: on the first failure, files already written
/// by this call are removed.
fn write_files(files: &[(PathBuf, String)]) -> Result<(), CliError> {
    let mut written: Vec<&Path> = Vec::new();
    for (path, body) in files {
        let result = match path.parent() {
            Some(dir) if !dir.as_os_str().is_empty() => fs::create_dir_all(dir),
            _ => Ok(()),
        }
        .and_then(|()| fs::write(path, body));
        if let Err(e) = result {
            for p in written {
                let _ = fs::remove_file(p);
            }
            return Err(CliError::Data(format!("{}: {e}", path.display())));
        }
        written.push(path);
    }
    Ok(())
}

fn report_warnings(warnings: &[Warning]) {
    for w in warnings {
        eprintln!("warning: {w}");
    }
}

fn fixed(value: Option<f64>) -> String {
    value.map_or_else(|| "undefined".to_string(), |v| format!("{v:.6}"))
}

fn check_range(range: &KRangeArgs) -> Result<(), CliError> {
    if range.k_min < 2 || range.k_min > range.k_max {
        return Err(CliError::Usage(format!(
            "need 2 <= --k-min <= --k-max, got {} and {}",
            range.k_min, range.k_max
        )));
    }
    Ok(())
}

fn load_prices(args: &PriceArgs) -> Result<LoadedPrices<f64>, CliError> {
    let tickers = args
        .tickers
        .as_deref()
        .map(read_ticker_list)
        .transpose()
        .map_err(data)?;
    load_price_table(&args.prices, tickers.as_deref(), args.start_date).map_err(data)
}

pub fn label(args: &LabelArgs) -> Result<(), CliError> {
    check_range(&args.range)?;
    let loaded = load_prices(&args.prices)?;
    let features = build_feature_table(&loaded.table, args.prices.trading_days);
    report_warnings(&loaded.warnings);
    report_warnings(&features.warnings);
    let options = Stage1Options {
        k: args.k,
        k_min: args.range.k_min,
        k_max: args.range.k_max,
        seed: args.seed,
        trading_days: args.prices.trading_days,
        canonical_labels: args.canonical_labels,
        ..Stage1Options::default()
    };
    let (records, model, _) = label_features(&features.vectors, &options).map_err(data)?;
    write_files(&[(args.out.clone(), labels_csv(&records))])?;
    println!("k={}", model.k);
    println!("silhouette={}", fixed(model.silhouette));
    Ok(())
}

pub fn select(args: &SelectKArgs) -> Result<(), CliError> {
    check_range(&args.range)?;
    let loaded = load_prices(&args.prices)?;
    let features = build_feature_table(&loaded.table, args.prices.trading_days);
    report_warnings(&loaded.warnings);
    report_warnings(&features.warnings);
    let points = feature_matrix(features.vectors.iter().map(|v| v.point()));
    let k_max = args.range.k_max.min(points.nrows().saturating_sub(1));
    let base = KMeansConfig::new(2).with_seed(args.seed);
    let selection = select_k(points.view(), args.range.k_min, k_max, &base).map_err(data)?;
    write_files(&[(args.out.clone(), selection.to_csv())])?;
    for (k, s) in &selection.scores {
        println!("k={k} silhouette={s:.6}");
    }
    println!("k={}", selection.best_k);
    Ok(())
}

pub fn train(args: &TrainArgs) -> Result<(), CliError> {
    let records: Vec<LabeledRecord<f64>> = parse_labels_csv(&read(&args.labels)?).map_err(data)?;
    let inferred = records.iter().map(|r| r.cluster + 1).max().unwrap_or(1);
    let k = args.k.unwrap_or(inferred);
    if k < inferred {
        return Err(CliError::Data(format!(
            "--k {k} is below the largest label {}",
            inferred - 1
        )));
    }
    let config = TrainConfig {
        epochs: args.epochs,
        batch_size: args.batch,
        seed: args.seed,
        adam: AdamConfig::default(),
    };
    let architecture = AutoencoderSpec::default().with_latent_width(k);
    let (net, history) = stage2_train(&records, &architecture, &config, args.seed).map_err(data)?;
    write_files(&[
        (args.model.clone(), write_model(&net)),
        (args.out.clone(), history.to_csv()),
    ])?;
    println!("parameters={}", net.parameter_count());
    println!("final_loss={:.6e}", history.final_loss().unwrap_or(f64::NAN));
    Ok(())
}

fn cluster_count(net: &tsclust::DenseNetwork, k: Option<usize>) -> Result<usize, CliError> {
    k.or_else(|| net.latent_width())
        .ok_or_else(|| CliError::Usage("model has no sigmoid bottleneck; pass --k".into()))
}

pub fn predict(args: &PredictArgs) -> Result<(), CliError> {
    let net = load_model::<f64>(&args.model).map_err(data)?;
    let k = cluster_count(&net, args.k)?;
    let rows = parse_feature_rows::<f64>(&read(&args.labels)?).map_err(data)?;
    let inputs = feature_matrix(rows.iter().map(|r| [r.volatility, r.ret]));
    let predictions = predict_labels(&net, inputs.view(), k).map_err(data)?;
    let mut out = String::from("ticker,volatility,return,raw_output,predicted\n");
    for (r, (raw, label)) in rows.iter().zip(predictions.raw.iter().zip(&predictions.labels)) {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{raw:.16e},{label}\n",
            r.ticker, r.volatility, r.ret
        ));
    }
    write_files(&[(args.out.clone(), out)])?;
    println!("rows={}", rows.len());
    Ok(())
}

pub fn evaluate_cmd(args: &EvaluateArgs) -> Result<(), CliError> {
    let net = load_model::<f64>(&args.model).map_err(data)?;
    let k = cluster_count(&net, args.k)?;
    let records = parse_labels_csv::<f64>(&read(&args.labels)?).map_err(data)?;
    let report = evaluate(&net, &records, k).map_err(data)?;
    write_files(&[(args.out.clone(), evaluation_csv(&report))])?;
    println!("accuracy={}", report.accuracy);
    println!("correct={} total={}", report.correct, report.total);
    if report.correct < report.total {
        print!("{}", border_analysis(&records, &report).to_text());
    }
    Ok(())
}

fn run_config(args: &RunArgs) -> Result<PipelineConfig, CliError> {
    let mut config = match &args.config {
        Some(path) => PipelineConfig::from_file(path).map_err(data)?,
        None => PipelineConfig::default(),
    };
    macro_rules! take {
        ($($flag:ident => $field:ident),*) => {
            $(if let Some(v) = args.$flag.clone() { config.$field = v; })*
        };
    }
    take!(prices => prices_path, k => k, k_min => k_min, k_max => k_max, seed => seed, epochs => epochs,
          batch => batch_size, test_frac => test_fraction, trading_days => trading_days, out_dir => out_dir);
    if args.tickers.is_some() {
        config.tickers_path = args.tickers.clone();
    }
    if args.start_date.is_some() {
        config.start_date = args.start_date;
    }
    config.canonical_labels |= args.canonical_labels;
    config.stratify |= args.stratify;
    if config.prices_path.as_os_str().is_empty() {
        return Err(CliError::Usage(
            "--prices or a config with prices_path is required".into(),
        ));
    }
    config.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    Ok(config)
}

pub fn run(args: &RunArgs) -> Result<(), CliError> {
    let config = run_config(args)?;
    let summary = run_pipeline(&config).map_err(data)?;
    report_warnings(&summary.warnings);
    println!("k={}", summary.k);
    println!("silhouette={}", fixed(summary.silhouette));
    println!("final_loss={:.6e}", summary.final_loss);
    println!("accuracy={}", summary.report.accuracy);
    println!("correct={} total={}", summary.report.correct, summary.report.total);
    println!("manifest={}", summary.out_dir.join(MANIFEST_NAME).display());
    Ok(())
}

fn scatter_csv(points: &[ScatterPoint]) -> String {
    let mut out = String::from("ticker,volatility,return,cluster,missed\n");
    for p in points {
        out.push_str(&format!(
            "{},{:.16e},{:.16e},{},{}\n",
            p.name,
            p.x,
            p.y,
            p.label,
            u8::from(p.highlight)
        ));
    }
    out
}

fn pairs_csv(header: &str, rows: &[(usize, f64)]) -> String {
    let mut out = format!("{header}\n");
    for (a, b) in rows {
        out.push_str(&format!("{a},{b:.16e}\n"));
    }
    out
}

pub fn report(args: &ReportArgs) -> Result<(), CliError> {
    let dir = &args.out_dir;
    let sweep = parse_sweep_csv(&read(&dir.join("k_sweep.csv"))?).map_err(data)?;
    let losses = parse_loss_csv(&read(&dir.join("loss.csv"))?).map_err(data)?;
    let rows: Vec<EvaluationRow<f64>> = parse_evaluation_csv(&read(&dir.join("evaluation.csv"))?).map_err(data)?;
    let out = args.out.clone().unwrap_or_else(|| dir.join("report"));

    let kmeans = scatter_points(&rows, true);
    let predicted = scatter_points(&rows, false);
    let scatter = |title: &str, points: &[ScatterPoint]| {
        ScatterChart {
            title,
            x_label: "volatility",
            y_label: "return",
            points,
        }
        .to_svg()
    };
    let files = [
        (out.join("silhouette.svg"), sweep_chart_svg(&sweep)),
        (out.join("silhouette.csv"), pairs_csv("k,silhouette", &sweep)),
        (out.join("loss.svg"), loss_chart_svg(&losses)),
        (out.join("loss.csv"), pairs_csv("epoch,loss", &losses)),
        (out.join("scatter_kmeans.svg"), scatter("KMeans clustering", &kmeans)),
        (out.join("scatter_kmeans.csv"), scatter_csv(&kmeans)),
        (
            out.join("scatter_autoencoder.svg"),
            scatter("Autoencoder clustering", &predicted),
        ),
        (out.join("scatter_autoencoder.csv"), scatter_csv(&predicted)),
    ];
    write_files(&files)?;
    for (path, _) in &files {
        println!("{}", path.display());
    }
    Ok(())
}
