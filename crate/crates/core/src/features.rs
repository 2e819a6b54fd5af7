//! Log returns and annualized ⟨volatility, return⟩ feature vectors.
//!
//! For closes `C_0..C_{T-1}` the daily log return is `r_t = ln(C_t / C_{t-1})`.
//! Annualized volatility is the Bessel-corrected sample standard deviation of
//! the returns times `sqrt(trading_days)`; annualized return is their mean
//! times `trading_days`. No scaling is applied before clustering.

use rayon::prelude::*;
use thiserror::Error;

use crate::ingest::{PriceSeries, PriceTable, Warning, WarningReason};
use crate::Scalar;

pub const TRADING_DAYS: f64 = 252.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FeatureError {
    #[error("need at least 2 values, got {len}")]
    TooShort { len: usize },
    #[error("price at index {index} is not a positive finite number")]
    NonPositivePrice { index: usize },
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries<T> {
    pub ticker: String,
    pub values: Vec<T>,
}

impl<T: Scalar> ReturnSeries<T> {
    pub fn from_prices(series: &PriceSeries<T>) -> Result<Self, FeatureError> {
        Ok(Self {
            ticker: series.ticker().to_string(),
            values: log_returns(series.closes())?,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FeatureVector<T> {
    pub ticker: String,
    pub volatility: T,
    pub ret: T,
}

impl<T: Scalar> FeatureVector<T> {
    pub fn point(&self) -> [T; 2] {
        [self.volatility, self.ret]
    }
}

pub fn log_returns<T: Scalar>(prices: &[T]) -> Result<Vec<T>, FeatureError> {
    if prices.len() < 2 {
        return Err(FeatureError::TooShort { len: prices.len() });
    }
    if let Some(index) = prices.iter().position(|p| !(p.is_finite() && *p > T::zero())) {
        return Err(FeatureError::NonPositivePrice { index });
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

pub fn mean<T: Scalar>(values: &[T]) -> Option<T> {
    if values.is_empty() {
        return None;
    }
    Some(values.iter().copied().sum::<T>() / T::from_usize_lossy(values.len()))
}

/// Sample standard deviation with the `T - 1` denominator.
pub fn sample_std<T: Scalar>(values: &[T]) -> Result<T, FeatureError> {
    if values.len() < 2 {
        return Err(FeatureError::TooShort { len: values.len() });
    }
    let mu = mean(values).expect("non-empty");
    let ss: T = values.iter().map(|&x| (x - mu) * (x - mu)).sum();
    Ok((ss / T::from_usize_lossy(values.len() - 1)).sqrt())
}

pub fn annualize<T: Scalar>(returns: &ReturnSeries<T>, trading_days: T) -> Result<FeatureVector<T>, FeatureError> {
    let std = sample_std(&returns.values)?;
    let mu = mean(&returns.values).expect("length checked by sample_std");
    Ok(FeatureVector {
        ticker: returns.ticker.clone(),
        volatility: std * trading_days.sqrt(),
        ret: mu * trading_days,
    })
}

pub fn features_for_series<T: Scalar>(
    series: &PriceSeries<T>,
    trading_days: T,
) -> Result<FeatureVector<T>, FeatureError> {
    annualize(&ReturnSeries::from_prices(series)?, trading_days)
}

#[derive(Debug, Clone)]
pub struct FeatureTable<T> {
    pub vectors: Vec<FeatureVector<T>>,
    pub warnings: Vec<Warning>,
}

/// One feature vector per ticker in table order. Series too short to yield
/// two returns are excluded with a warning.
pub fn build_feature_table<T: Scalar>(table: &PriceTable<T>, trading_days: T) -> FeatureTable<T> {
    let series: Vec<&PriceSeries<T>> = table.iter().collect();
    let results: Vec<Result<FeatureVector<T>, FeatureError>> = series
        .par_iter()
        .map(|s| features_for_series(s, trading_days))
        .collect();

    let mut vectors = Vec::with_capacity(results.len());
    let mut warnings = Vec::new();
    for (s, result) in series.iter().zip(results) {
        match result {
            Ok(v) => vectors.push(v),
            Err(FeatureError::TooShort { len }) => {
                warnings.push(Warning::new(s.ticker(), WarningReason::TooFewReturns { returns: len }))
            }
            // PriceSeries guarantees positive closes.
            Err(FeatureError::NonPositivePrice { .. }) => unreachable!("validated series"),
        }
    }
    FeatureTable { vectors, warnings }
}
