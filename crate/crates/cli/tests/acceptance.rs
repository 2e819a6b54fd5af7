//! Acceptance suite. Runs every criterion, prints one PASS/FAIL line per
//! criterion and exits non-zero if any fails.

mod common;

use std::collections::BTreeMap;
use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::{Duration, Instant};

use ndarray::Array2;
use tsclust::autonet::{
    backward, forward, label_from_output, mse_loss, Activation, AutoencoderSpec, DenseNetwork, LayerSpec,
};
use tsclust::kmeans::{kmeans_fit, select_k, silhouette, KMeansConfig};
use tsclust::pipeline::{
    accuracy, run_pipeline, EvaluationReport, EvaluationRow, KChoice, PipelineConfig, Stage1Options,
};
use tsclust::rng::XorShift64Star;
use tsclust::synthetic::{min_separation, BlobSpec, DEFAULT_CENTERS};

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn within(elapsed: Duration, limit: Duration) -> bool {
    elapsed < limit
}

fn criterion_1() -> Outcome {
    let started = Instant::now();
    let net: DenseNetwork<f64> = AutoencoderSpec::default().build(7).expect("canonical network");
    let widths: Vec<usize> = std::iter::once(net.input_width())
        .chain(net.layers().iter().map(|l| l.biases.len()))
        .collect();
    let counts: Vec<usize> = net.layers().iter().map(|l| l.weights.len() + l.biases.len()).collect();
    let total: usize = counts.iter().sum();
    let elapsed = started.elapsed();
    let pass = widths == [2, 100, 50, 20, 4, 20, 50, 100, 1]
        && counts == [300, 5050, 1020, 84, 100, 1050, 5100, 101]
        && total == 12_805
        && net.parameter_count() == 12_805
        && within(elapsed, Duration::from_secs(1));
    outcome(pass, format!("layers {counts:?}, total {total}, {elapsed:?}"))
}

fn criterion_2() -> Outcome {
    let started = Instant::now();
    let fixtures = [
        (7.2130698e-01, 1),
        (-1.8404983e-04, 0),
        (2.4604988, 2),
        (3.0150795, 3),
        (9.9868220e-01, 1),
    ];
    let got: Vec<usize> = fixtures
        .iter()
        .map(|&(raw, _)| label_from_output(raw, 4).expect("finite raw output"))
        .collect();
    let want: Vec<usize> = fixtures.iter().map(|&(_, l)| l).collect();
    let elapsed = started.elapsed();
    outcome(
        got == want && within(elapsed, Duration::from_secs(1)),
        format!("labels {got:?}, {elapsed:?}"),
    )
}

fn criterion_3() -> Outcome {
    let row = |i: usize, predicted: usize, kmeans: usize| EvaluationRow {
        ticker: format!("T{i:02}"),
        volatility: 0.3,
        ret: 0.5,
        raw_output: predicted as f64,
        predicted,
        kmeans,
    };
    let mut rows: Vec<_> = (0..21).map(|i| row(i, i % 4, i % 4)).collect();
    rows.extend([row(21, 2, 3), row(22, 2, 0), row(23, 0, 1)]);
    let report = EvaluationReport::from_rows(rows).expect("non-empty");
    let predicted: Vec<usize> = report.rows.iter().map(|r| r.predicted).collect();
    let reference: Vec<usize> = report.rows.iter().map(|r| r.kmeans).collect();
    let direct = accuracy(&predicted, &reference).expect("same length");
    let pass = report.correct == 21 && report.total == 24 && report.accuracy == 0.875 && direct.2 == 0.875;
    outcome(
        pass,
        format!("{}/{} -> {}", report.correct, report.total, report.accuracy),
    )
}

fn random_network(rng: &mut XorShift64Star) -> DenseNetwork<f64> {
    let depth = 1 + rng.below(4);
    let mut widths = vec![1 + rng.below(10)];
    for _ in 0..depth {
        widths.push(1 + rng.below(10));
    }
    let activations = [Activation::Relu, Activation::Sigmoid, Activation::Linear];
    let specs: Vec<LayerSpec> = widths
        .windows(2)
        .map(|w| LayerSpec::new(w[0], w[1], activations[rng.below(3)]))
        .collect();
    let mut net = DenseNetwork::new(&specs, rng.next_u64()).expect("valid chain");
    // Non-zero biases so every bias gradient is exercised.
    for layer in net.layers_mut() {
        layer.biases.iter_mut().for_each(|b| *b = rng.uniform(-0.5, 0.5));
    }
    net
}

fn loss_of(net: &DenseNetwork<f64>, x: &Array2<f64>, y: &Array2<f64>) -> f64 {
    let (out, _) = forward(net, x.view()).expect("forward");
    mse_loss(out.view(), y.view()).expect("loss")
}

/// Weight position (or `None` for a bias), bias row, analytic gradient.
type Probe = (Option<(usize, usize)>, usize, f64);

fn perturb(net: &mut DenseNetwork<f64>, layer: usize, at: Option<(usize, usize)>, row: usize, delta: f64) {
    let layer = &mut net.layers_mut()[layer];
    match at {
        Some(rc) => layer.weights[rc] += delta,
        None => layer.biases[row] += delta,
    }
}

fn criterion_4() -> Outcome {
    let started = Instant::now();
    let eps = 1e-5;
    let mut rng = XorShift64Star::new(4);
    let mut checked = 0usize;
    let mut worst = (0.0f64, String::new());
    let mut failures = 0usize;
    for case in 0..50 {
        let mut net = random_network(&mut rng);
        let batch = 1 + rng.below(5);
        let x = Array2::from_shape_fn((batch, net.input_width()), |_| rng.uniform(-1.0, 1.0));
        let y = Array2::from_shape_fn((batch, net.output_width()), |_| rng.uniform(-1.0, 1.0));
        let (_, cache) = forward(&net, x.view()).expect("forward");
        let grads = backward(&net, &cache, y.view()).expect("backward");

        for l in 0..net.layers().len() {
            let (rows, cols) = net.layers()[l].weights.dim();
            let mut params: Vec<Probe> = Vec::new();
            for r in 0..rows {
                for c in 0..cols {
                    params.push((Some((r, c)), 0, grads.layers[l].weights[[r, c]]));
                }
                params.push((None, r, grads.layers[l].biases[r]));
            }
            for (at, r, analytic) in params {
                perturb(&mut net, l, at, r, eps);
                let up = loss_of(&net, &x, &y);
                perturb(&mut net, l, at, r, -2.0 * eps);
                let down = loss_of(&net, &x, &y);
                perturb(&mut net, l, at, r, eps);
                let numeric = (up - down) / (2.0 * eps);
                let abs = (analytic - numeric).abs();
                let rel = abs / analytic.abs().max(numeric.abs()).max(f64::MIN_POSITIVE);
                checked += 1;
                if abs > 1e-7 && rel > 1e-4 {
                    failures += 1;
                    if rel > worst.0 {
                        worst = (
                            rel,
                            format!("case {case} layer {l} analytic {analytic:e} numeric {numeric:e}"),
                        );
                    }
                }
            }
        }
    }
    let elapsed = started.elapsed();
    outcome(
        failures == 0 && within(elapsed, Duration::from_secs(30)),
        format!(
            "{checked} parameters checked, {failures} outside tolerance{}, {elapsed:?}",
            if failures > 0 {
                format!(" (worst: {})", worst.1)
            } else {
                String::new()
            }
        ),
    )
}

fn wcss_of(points: &Array2<f64>, labels: &[usize], k: usize) -> f64 {
    let mut total = 0.0;
    for c in 0..k {
        let members: Vec<usize> = (0..labels.len()).filter(|&i| labels[i] == c).collect();
        let n = members.len() as f64;
        let mx = members.iter().map(|&i| points[[i, 0]]).sum::<f64>() / n;
        let my = members.iter().map(|&i| points[[i, 1]]).sum::<f64>() / n;
        total += members
            .iter()
            .map(|&i| (points[[i, 0]] - mx).powi(2) + (points[[i, 1]] - my).powi(2))
            .sum::<f64>();
    }
    total
}

/// Minimum WCSS over every assignment of `n` points to `k` non-empty groups.
fn exhaustive_optimum(points: &Array2<f64>, k: usize) -> f64 {
    let n = points.nrows();
    let mut labels = vec![0usize; n];
    let mut best = f64::INFINITY;
    loop {
        let mut used = vec![false; k];
        labels.iter().for_each(|&l| used[l] = true);
        if used.iter().all(|&u| u) {
            best = best.min(wcss_of(points, &labels, k));
        }
        let mut i = 0;
        loop {
            if i == n {
                return best;
            }
            labels[i] += 1;
            if labels[i] < k {
                break;
            }
            labels[i] = 0;
            i += 1;
        }
    }
}

fn criterion_5() -> Outcome {
    let started = Instant::now();
    let mut rng = XorShift64Star::new(5);
    let mut optimal = 0usize;
    let mut monotone = 0usize;
    for instance in 0..100u64 {
        let k = 1 + rng.below(3);
        let n = k + rng.below(8 - k + 1);
        let points = Array2::from_shape_fn((n, 2), |_| rng.uniform(0.0, 1.0));
        let config = KMeansConfig::new(k).with_seed(instance).with_restarts(20);
        let model = kmeans_fit(points.view(), &config).expect("valid instance");
        let oracle = exhaustive_optimum(&points, k);
        if (model.wcss - oracle).abs() <= 1e-9 * oracle.abs().max(f64::MIN_POSITIVE) || model.wcss == oracle {
            optimal += 1;
        }
        if model
            .wcss_history
            .windows(2)
            .all(|w| w[1] <= w[0] * (1.0 + 1e-12) + 1e-15)
        {
            monotone += 1;
        }
    }
    let elapsed = started.elapsed();
    outcome(
        optimal >= 95 && monotone == 100 && within(elapsed, Duration::from_secs(60)),
        format!("optimal in {optimal}/100, monotone in {monotone}/100, {elapsed:?}"),
    )
}

fn direct_silhouette(points: &Array2<f64>, labels: &[usize]) -> f64 {
    let n = labels.len();
    let dist = |i: usize, j: usize| {
        ((points[[i, 0]] - points[[j, 0]]).powi(2) + (points[[i, 1]] - points[[j, 1]]).powi(2)).sqrt()
    };
    let clusters: Vec<usize> = {
        let mut c = labels.to_vec();
        c.sort_unstable();
        c.dedup();
        c
    };
    let mut total = 0.0;
    for i in 0..n {
        let own: Vec<usize> = (0..n).filter(|&j| j != i && labels[j] == labels[i]).collect();
        if own.is_empty() {
            continue;
        }
        let a = own.iter().map(|&j| dist(i, j)).sum::<f64>() / own.len() as f64;
        let mut b = f64::INFINITY;
        for &c in clusters.iter().filter(|&&c| c != labels[i]) {
            let other: Vec<usize> = (0..n).filter(|&j| labels[j] == c).collect();
            b = b.min(other.iter().map(|&j| dist(i, j)).sum::<f64>() / other.len() as f64);
        }
        if a.max(b) > 0.0 {
            total += (b - a) / a.max(b);
        }
    }
    total / n as f64
}

fn criterion_6() -> Outcome {
    let mut rng = XorShift64Star::new(6);
    let mut max_diff = 0.0f64;
    let mut in_bounds = true;
    let mut cases = 0;
    while cases < 100 {
        let n = 3 + rng.below(28);
        let k = 2 + rng.below(5);
        let points = Array2::from_shape_fn((n, 2), |_| rng.uniform(-1.0, 1.0));
        let labels: Vec<usize> = (0..n).map(|_| rng.below(k)).collect();
        if labels.iter().all(|&l| l == labels[0]) {
            continue;
        }
        cases += 1;
        let s = silhouette(points.view(), &labels).expect("two clusters present");
        max_diff = max_diff.max((s - direct_silhouette(&points, &labels)).abs());
        in_bounds &= (-1.0..=1.0).contains(&s);
    }
    outcome(
        max_diff <= 1e-12 && in_bounds,
        format!("100 labelings, max |diff| {max_diff:e}, all in [-1, 1]: {in_bounds}"),
    )
}

fn criterion_7() -> Outcome {
    let started = Instant::now();
    let sigma = min_separation(&DEFAULT_CENTERS) / 6.0;
    let spec = BlobSpec {
        sizes: vec![18, 18, 17, 17],
        ..BlobSpec::default_centers(0, sigma)
    };
    let base = KMeansConfig::new(2).with_seed(Stage1Options::default().seed);
    let mut hits = 0;
    let mut chosen = BTreeMap::new();
    for seed in 0..100 {
        let (points, _) = spec.sample(seed);
        let selection = select_k(points.view(), 2, 10, &base).expect("valid range");
        *chosen.entry(selection.best_k).or_insert(0) += 1;
        if selection.best_k == 4 {
            hits += 1;
        }
    }
    outcome(
        hits >= 95,
        format!(
            "k=4 in {hits}/100 seeds (sigma {sigma:.4}, separation 6 sigma), choices {chosen:?}, {:?}",
            started.elapsed()
        ),
    )
}

fn criterion_8() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    let prices = common::blob_prices(dir.path(), 8);
    let config = PipelineConfig {
        prices_path: prices,
        k: KChoice::Fixed(4),
        test_fraction: 0.33,
        seed: 7,
        epochs: 1000,
        batch_size: 1024,
        out_dir: dir.path().join("out"),
        ..PipelineConfig::default()
    };
    let started = Instant::now();
    let summary = match run_pipeline(&config) {
        Ok(s) => s,
        Err(e) => return outcome(false, e.to_string()),
    };
    let elapsed = started.elapsed();
    let epochs = fs::read_to_string(config.out_dir.join("loss.csv"))
        .map(|t| t.lines().count() - 1)
        .unwrap_or(0);
    let pass = epochs == 1000
        && summary.final_loss < 0.05
        && summary.report.accuracy >= 0.90
        && within(elapsed, Duration::from_secs(120));
    outcome(
        pass,
        format!(
            "epoch {epochs} loss {:.3e}, accuracy {} ({}/{}), {elapsed:?}",
            summary.final_loss, summary.report.accuracy, summary.report.correct, summary.report.total
        ),
    )
}

fn criterion_9() -> Outcome {
    let dir = tempfile::tempdir().expect("temp dir");
    common::blob_prices(dir.path(), 9);
    fs::write(
        dir.path().join("run.toml"),
        "prices_path = \"prices.csv\"\nk = \"auto\"\nseed = 7\nepochs = 300\nout_dir = \"first\"\n",
    )
    .expect("write config");
    for out in ["first", "second"] {
        let status = common::tsc(dir.path(), &["run", "--config", "run.toml", "--out-dir", out]);
        if !status.status.success() {
            return outcome(false, format!("run failed: {}", common::stderr(&status)));
        }
    }
    let names = [
        "labels.csv",
        "model.tscnet",
        "loss.csv",
        "evaluation.csv",
        "k_sweep.csv",
        "manifest.txt",
    ];
    let differing: Vec<&str> = names
        .into_iter()
        .filter(|n| fs::read(dir.path().join("first").join(n)).ok() != fs::read(dir.path().join("second").join(n)).ok())
        .collect();
    outcome(
        differing.is_empty(),
        format!("{} artifacts compared, differing {differing:?}", names.len()),
    )
}

/// Runs on user-supplied prices when `TSC_REPLICATION_PRICES` is set.
fn criterion_10() -> Option<Outcome> {
    let prices = PathBuf::from(std::env::var_os("TSC_REPLICATION_PRICES")?);
    let out_dir = std::env::var_os("TSC_REPLICATION_OUT")
        .map(PathBuf::from)
        .unwrap_or_else(|| std::env::temp_dir().join("tsc-replication"));
    let config = PipelineConfig {
        prices_path: prices,
        tickers_path: std::env::var_os("TSC_REPLICATION_TICKERS").map(PathBuf::from),
        start_date: chrono_date(2019, 1, 1),
        k: KChoice::Auto,
        out_dir: out_dir.clone(),
        ..PipelineConfig::default()
    };
    let summary = match run_pipeline(&config) {
        Ok(s) => s,
        Err(e) => return Some(outcome(false, e.to_string())),
    };
    let labels = fs::read_to_string(out_dir.join("labels.csv")).unwrap_or_default();
    let mut members: BTreeMap<usize, Vec<String>> = BTreeMap::new();
    for line in labels.lines().skip(1) {
        let fields: Vec<&str> = line.split(',').collect();
        if let (Some(t), Some(c)) = (fields.first(), fields.get(3).and_then(|c| c.parse().ok())) {
            members.entry(c).or_default().push(t.to_string());
        }
    }
    let mut table = String::from("cluster,count,tickers\n");
    for (c, tickers) in &members {
        table.push_str(&format!("{c},{},{}\n", tickers.len(), tickers.join(" ")));
    }
    let written = fs::write(out_dir.join("memberships.csv"), table).is_ok();
    Some(outcome(
        written,
        format!(
            "k={} silhouette={} accuracy={} (reference values: k=4, silhouette 0.564, accuracy 0.875); artifacts in {}",
            summary.k,
            summary.silhouette.map_or("undefined".into(), |s| format!("{s:.3}")),
            summary.report.accuracy,
            out_dir.display()
        ),
    ))
}

fn chrono_date(y: i32, m: u32, d: u32) -> Option<chrono::NaiveDate> {
    chrono::NaiveDate::from_ymd_opt(y, m, d)
}

type Criterion = (&'static str, fn() -> Outcome);

fn main() -> ExitCode {
    let criteria: [Criterion; 9] = [
        ("parameter count", criterion_1),
        ("rounding fixtures", criterion_2),
        ("accuracy arithmetic", criterion_3),
        ("gradient oracle", criterion_4),
        ("kmeans optimality", criterion_5),
        ("silhouette oracle", criterion_6),
        ("k selection", criterion_7),
        ("end-to-end pipeline", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let result = check();
        if !result.pass {
            failed += 1;
        }
        println!(
            "criterion {:>2} {:<20} {}  {}",
            i + 1,
            name,
            if result.pass { "PASS" } else { "FAIL" },
            result.detail
        );
    }
    match criterion_10() {
        Some(result) => {
            if !result.pass {
                failed += 1;
            }
            println!(
                "criterion 10 {:<20} {}  {}",
                "replication harness",
                if result.pass { "PASS" } else { "FAIL" },
                result.detail
            );
        }
        None => println!(
            "criterion 10 {:<20} SKIP  optional; set TSC_REPLICATION_PRICES to a prices CSV to run it",
            "replication harness"
        ),
    }
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        println!("{failed} criteria failed");
        ExitCode::FAILURE
    }
}
