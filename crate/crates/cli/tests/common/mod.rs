#![allow(dead_code)]

use std::fs;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use tsclust::synthetic::{blob_price_table, BlobSpec};

pub fn tsc(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_tsc"))
        .current_dir(dir)
        .env_remove("TSC_SEED")
        .args(args)
        .output()
        .expect("spawn tsc")
}

pub fn stdout(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

pub fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

/// 70 tickers (18/18/17/17) drawn around the four default centres with
/// sigma 0.03, written as a prices CSV.
pub fn blob_prices(dir: &Path, seed: u64) -> PathBuf {
    let spec = BlobSpec {
        sizes: vec![18, 18, 17, 17],
        ..BlobSpec::default_centers(0, 0.03)
    };
    let (table, _) = blob_price_table(&spec, 70, 252.0, seed);
    let path = dir.join("prices.csv");
    fs::write(&path, table.to_csv()).unwrap();
    path
}
