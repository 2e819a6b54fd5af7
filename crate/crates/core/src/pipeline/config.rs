use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::NaiveDate;
use serde::Deserialize;

use super::PipelineError;
use crate::ingest::DATE_FORMAT;

/// A fixed cluster count or silhouette-driven selection.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KChoice {
    Fixed(usize),
    Auto,
}

impl fmt::Display for KChoice {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            KChoice::Fixed(k) => write!(f, "{k}"),
            KChoice::Auto => f.write_str("auto"),
        }
    }
}

impl FromStr for KChoice {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let s = s.trim();
        if s.eq_ignore_ascii_case("auto") {
            return Ok(KChoice::Auto);
        }
        match s.parse::<usize>() {
            Ok(0) => Err("k must be at least 1".into()),
            Ok(k) => Ok(KChoice::Fixed(k)),
            Err(_) => Err(format!("k must be a positive integer or `auto`, got `{s}`")),
        }
    }
}

impl<'de> Deserialize<'de> for KChoice {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Int(i64),
            Text(String),
        }
        match Raw::deserialize(deserializer)? {
            Raw::Int(k) if k >= 1 => Ok(KChoice::Fixed(k as usize)),
            Raw::Int(k) => Err(serde::de::Error::custom(format!("k must be at least 1, got {k}"))),
            Raw::Text(s) => s.parse().map_err(serde::de::Error::custom),
        }
    }
}

/// Settings for an end-to-end run.
///
/// Read from TOML. Relative paths are taken relative to the config file.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PipelineConfig {
    pub prices_path: PathBuf,
    pub tickers_path: Option<PathBuf>,
    /// `YYYY-MM-DD`; earlier rows are dropped.
    #[serde(deserialize_with = "de_date")]
    pub start_date: Option<NaiveDate>,
    pub k: KChoice,
    pub k_min: usize,
    pub k_max: usize,
    pub seed: u64,
    pub restarts: usize,
    pub epochs: usize,
    pub batch_size: usize,
    pub test_fraction: f64,
    pub trading_days: f64,
    pub out_dir: PathBuf,
    pub canonical_labels: bool,
    pub stratify: bool,
}

fn de_date<'de, D: serde::Deserializer<'de>>(deserializer: D) -> Result<Option<NaiveDate>, D::Error> {
    let raw = Option::<String>::deserialize(deserializer)?;
    raw.map(|s| NaiveDate::parse_from_str(&s, DATE_FORMAT).map_err(serde::de::Error::custom))
        .transpose()
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            prices_path: PathBuf::new(),
            tickers_path: None,
            start_date: None,
            k: KChoice::Fixed(4),
            k_min: 2,
            k_max: 10,
            seed: 7,
            restarts: 10,
            epochs: 1000,
            batch_size: 1024,
            test_fraction: 0.33,
            trading_days: crate::features::TRADING_DAYS,
            out_dir: PathBuf::from("out"),
            canonical_labels: false,
            stratify: false,
        }
    }
}

impl PipelineConfig {
    pub fn parse(text: &str) -> Result<Self, PipelineError> {
        let config: Self = toml::from_str(text).map_err(|e| PipelineError::Config(e.to_string()))?;
        config.validate()?;
        Ok(config)
    }

    pub fn from_file(path: &Path) -> Result<Self, PipelineError> {
        let text = std::fs::read_to_string(path).map_err(|source| PipelineError::Io {
            path: path.display().to_string(),
            source,
        })?;
        let mut config = Self::parse(&text)?;
        if let Some(base) = path.parent() {
            config.resolve_relative_to(base);
        }
        Ok(config)
    }

    pub fn resolve_relative_to(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.prices_path);
        fix(&mut self.out_dir);
        if let Some(t) = self.tickers_path.as_mut() {
            fix(t);
        }
    }

    pub fn validate(&self) -> Result<(), PipelineError> {
        let fail = |m: String| Err(PipelineError::Config(m));
        if self.prices_path.as_os_str().is_empty() {
            return fail("prices_path is required".into());
        }
        if self.k_min < 2 || self.k_min > self.k_max {
            return fail(format!("need 2 <= k_min <= k_max, got {}..{}", self.k_min, self.k_max));
        }
        if self.restarts == 0 {
            return fail("restarts must be at least 1".into());
        }
        if self.epochs == 0 || self.batch_size == 0 {
            return fail("epochs and batch_size must be positive".into());
        }
        if !(self.test_fraction > 0.0 && self.test_fraction < 1.0) {
            return fail(format!("test_fraction must lie in (0, 1), got {}", self.test_fraction));
        }
        if !(self.trading_days.is_finite() && self.trading_days > 0.0) {
            return fail(format!("trading_days must be positive, got {}", self.trading_days));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn k_choice_parsing() {
        assert_eq!("auto".parse::<KChoice>(), Ok(KChoice::Auto));
        assert_eq!("4".parse::<KChoice>(), Ok(KChoice::Fixed(4)));
        assert!("0".parse::<KChoice>().is_err());
        assert!("-1".parse::<KChoice>().is_err());
        assert!("four".parse::<KChoice>().is_err());
    }

    #[test]
    fn defaults_fill_missing_keys() {
        let c = PipelineConfig::parse("prices_path = \"p.csv\"\n").unwrap();
        assert_eq!(c.k, KChoice::Fixed(4));
        assert_eq!(
            (c.k_min, c.k_max, c.seed, c.epochs, c.batch_size),
            (2, 10, 7, 1000, 1024)
        );
        assert_eq!(c.test_fraction, 0.33);
        assert_eq!(c.trading_days, 252.0);
    }

    #[test]
    fn full_document() {
        let c = PipelineConfig::parse(
            r#"
prices_path = "prices.csv"
tickers_path = "tickers.txt"
start_date = "2019-01-01"
k = "auto"
k_min = 3
k_max = 6
seed = 11
epochs = 50
batch_size = 16
test_fraction = 0.25
trading_days = 250
out_dir = "results"
"#,
        )
        .unwrap();
        assert_eq!(c.k, KChoice::Auto);
        assert_eq!(c.start_date, NaiveDate::from_ymd_opt(2019, 1, 1));
        assert_eq!(c.trading_days, 250.0);
        assert_eq!(c.tickers_path, Some(PathBuf::from("tickers.txt")));
    }

    #[test]
    fn rejects_bad_documents() {
        for text in [
            "",
            "prices_path = \"p\"\nk = 0",
            "prices_path = \"p\"\nk = \"many\"",
            "prices_path = \"p\"\nunknown = 1",
            "prices_path = \"p\"\nstart_date = \"01/02/2019\"",
            "prices_path = \"p\"\ntest_fraction = 1.5",
            "prices_path = \"p\"\nk_min = 5\nk_max = 3",
        ] {
            assert!(
                matches!(PipelineConfig::parse(text), Err(PipelineError::Config(_))),
                "{text}"
            );
        }
    }

    #[test]
    fn relative_paths_follow_config_dir() {
        let mut c = PipelineConfig::parse("prices_path = \"p.csv\"\nout_dir = \"/abs\"").unwrap();
        c.resolve_relative_to(Path::new("/cfg"));
        assert_eq!(c.prices_path, PathBuf::from("/cfg/p.csv"));
        assert_eq!(c.out_dir, PathBuf::from("/abs"));
    }
}
