//! Seeded synthetic data with known cluster structure.
//!
//! Used by the test suites and for demo fixtures: Gaussian blobs in
//! ⟨volatility, return⟩ space, and price series engineered so that their
//! annualized features land exactly on a requested point.

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use ndarray::Array2;

use crate::ingest::{PriceSeries, PriceTable};
use crate::rng::XorShift64Star;

/// Four well-separated ⟨volatility, return⟩ centres typical of large-cap
/// equities over a few months.
pub const DEFAULT_CENTERS: [[f64; 2]; 4] = [[0.212, 0.896], [0.218, 0.484], [0.314, -0.050], [0.466, 1.470]];

/// Smallest pairwise distance between centres.
pub fn min_separation(centers: &[[f64; 2]]) -> f64 {
    let mut best = f64::INFINITY;
    for (i, a) in centers.iter().enumerate() {
        for b in &centers[i + 1..] {
            best = best.min(((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt());
        }
    }
    best
}

#[derive(Debug, Clone, PartialEq)]
pub struct BlobSpec {
    pub centers: Vec<[f64; 2]>,
    pub sizes: Vec<usize>,
    /// Isotropic standard deviation of each blob.
    pub sigma: f64,
}

impl BlobSpec {
    /// `per_blob` points around each of [`DEFAULT_CENTERS`].
    pub fn default_centers(per_blob: usize, sigma: f64) -> Self {
        Self {
            centers: DEFAULT_CENTERS.to_vec(),
            sizes: vec![per_blob; DEFAULT_CENTERS.len()],
            sigma,
        }
    }

    pub fn len(&self) -> usize {
        self.sizes.iter().sum()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Points (`n x 2`) and their blob index. Volatility is kept positive by
    /// reflecting any negative draw.
    pub fn sample(&self, seed: u64) -> (Array2<f64>, Vec<usize>) {
        assert_eq!(self.centers.len(), self.sizes.len(), "one size per centre");
        let mut rng = XorShift64Star::new(seed);
        let mut points = Array2::zeros((self.len(), 2));
        let mut truth = Vec::with_capacity(self.len());
        let mut row = 0;
        for (blob, (center, &size)) in self.centers.iter().zip(&self.sizes).enumerate() {
            for _ in 0..size {
                let vol = center[0] + self.sigma * rng.normal();
                let ret = center[1] + self.sigma * rng.normal();
                points[[row, 0]] = vol.abs();
                points[[row, 1]] = ret;
                truth.push(blob);
                row += 1;
            }
        }
        (points, truth)
    }
}

/// Consecutive weekdays starting at `start` (weekends skipped).
pub fn trading_dates(start: NaiveDate, count: usize) -> Vec<NaiveDate> {
    let mut dates = Vec::with_capacity(count);
    let mut d = start;
    while dates.len() < count {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            dates.push(d);
        }
        d += Duration::days(1);
    }
    dates
}

/// A `len`-point price series whose annualized volatility and return are
/// `volatility` and `ret` (up to rounding). Needs `len >= 4`.
pub fn series_with_features(
    ticker: &str,
    volatility: f64,
    ret: f64,
    len: usize,
    trading_days: f64,
    rng: &mut XorShift64Star,
) -> PriceSeries<f64> {
    assert!(len >= 4, "need at least three returns");
    let m = len - 1;
    let z: Vec<f64> = (0..m).map(|_| rng.normal()).collect();
    let mean = z.iter().sum::<f64>() / m as f64;
    let sd = (z.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (m - 1) as f64).sqrt();
    let daily_mean = ret / trading_days;
    let daily_sd = volatility / trading_days.sqrt();

    let mut closes = Vec::with_capacity(len);
    let mut price = 100.0f64;
    closes.push(price);
    for v in &z {
        price *= (daily_mean + daily_sd * (v - mean) / sd).exp();
        closes.push(price);
    }
    let start = NaiveDate::from_ymd_opt(2019, 1, 2).expect("valid date");
    PriceSeries::new(ticker, trading_dates(start, len), closes).expect("positive closes")
}

/// Price table whose feature vectors follow `spec`. Tickers are `S000`,
/// `S001`, ...; the returned labels give each ticker's blob in ticker order.
pub fn blob_price_table(
    spec: &BlobSpec,
    series_len: usize,
    trading_days: f64,
    seed: u64,
) -> (PriceTable<f64>, Vec<usize>) {
    let (points, truth) = spec.sample(seed);
    let mut rng = XorShift64Star::new(seed ^ 0x5EED);
    let mut table = PriceTable::new();
    for (i, p) in points.outer_iter().enumerate() {
        let ticker = format!("S{i:03}");
        table.insert(series_with_features(
            &ticker,
            p[0],
            p[1],
            series_len,
            trading_days,
            &mut rng,
        ));
    }
    (table, truth)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::features::features_for_series;

    #[test]
    fn series_hits_requested_features() {
        let mut rng = XorShift64Star::new(1);
        let s = series_with_features("X", 0.3, 0.7, 70, 252.0, &mut rng);
        let fv = features_for_series(&s, 252.0).unwrap();
        assert!((fv.volatility - 0.3).abs() < 1e-12, "{}", fv.volatility);
        assert!((fv.ret - 0.7).abs() < 1e-12, "{}", fv.ret);
    }

    #[test]
    fn dates_skip_weekends() {
        let d = trading_dates(NaiveDate::from_ymd_opt(2019, 1, 4).unwrap(), 3);
        assert_eq!(d[1], NaiveDate::from_ymd_opt(2019, 1, 7).unwrap());
    }

    #[test]
    fn blobs_are_seeded() {
        let spec = BlobSpec::default_centers(5, 0.03);
        assert_eq!(spec.sample(3), spec.sample(3));
        assert_ne!(spec.sample(3).0, spec.sample(4).0);
        assert!(min_separation(&DEFAULT_CENTERS) > 0.4);
    }
}
