//! Per-ticker OHLCV CSV loading and the seeded synthetic market.

use std::collections::HashSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{Datelike, Duration, NaiveDate, Weekday};
use serde::{Deserialize, Serialize};

use crate::dataset::{sample_variance, TimeSeries};
use crate::error::{Error, Result};
use crate::rng::{derive_seed, Rng};

/// Fields emitted per ticker, in output order.
pub const FIELDS: [&str; 5] = ["Open", "High", "Low", "Close", "Volume"];

pub const DATE_FORMAT: &str = "%Y-%m-%d";

#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct LoadLog {
    pub rows_read: usize,
    pub rows_dropped: usize,
}

/// Reads one Yahoo-style export; the ticker is the file stem.
pub fn load_ticker_csv(path: &Path) -> Result<Vec<TimeSeries>> {
    load_ticker_csv_logged(path).map(|(s, _)| s)
}

pub fn load_ticker_csv_logged(path: &Path) -> Result<(Vec<TimeSeries>, LoadLog)> {
    let csv_err = |reason: String| Error::Csv {
        path: path.to_path_buf(),
        reason,
    };
    let ticker = path
        .file_stem()
        .and_then(|s| s.to_str())
        .ok_or_else(|| csv_err("file name has no usable stem".into()))?
        .to_string();
    let mut reader = csv::ReaderBuilder::new()
        .flexible(true)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| csv_err(e.to_string()))?;
    let headers = reader.headers().map_err(|e| csv_err(e.to_string()))?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| csv_err(format!("missing required column `{name}`")))
    };
    let date_col = find("Date")?;
    let field_cols = FIELDS.iter().map(|f| find(f)).collect::<Result<Vec<_>>>()?;

    let mut log = LoadLog::default();
    let mut rows: Vec<(NaiveDate, [f64; 5])> = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| csv_err(e.to_string()))?;
        log.rows_read += 1;
        let parsed = (|| {
            let date = NaiveDate::parse_from_str(record.get(date_col)?, DATE_FORMAT).ok()?;
            let mut values = [0.0; 5];
            for (v, &c) in values.iter_mut().zip(&field_cols) {
                *v = record.get(c)?.parse::<f64>().ok().filter(|x| x.is_finite())?;
            }
            Some((date, values))
        })();
        match parsed {
            Some((date, values)) => {
                if !seen.insert(date) {
                    return Err(csv_err(format!("duplicate date {date}")));
                }
                rows.push((date, values));
            }
            None => log.rows_dropped += 1,
        }
    }
    if log.rows_dropped > 0 {
        log::info!(
            "{}: dropped {} of {} rows with missing or unparseable fields",
            path.display(),
            log.rows_dropped,
            log.rows_read
        );
    }
    if rows.is_empty() {
        return Err(csv_err("no valid rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    let dates: Vec<NaiveDate> = rows.iter().map(|r| r.0).collect();
    let series = FIELDS
        .iter()
        .enumerate()
        .map(|(f, name)| {
            TimeSeries::new(
                format!("{ticker}.{name}"),
                dates.clone(),
                rows.iter().map(|r| r.1[f]).collect(),
            )
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((series, log))
}

/// Loads every `*.csv` in a directory (sorted by file name), keeping dates in `[start, end]`.
pub fn load_dir(dir: &Path, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<Vec<TimeSeries>> {
    let mut files: Vec<PathBuf> = std::fs::read_dir(dir)
        .map_err(|e| Error::io(dir, e))?
        .filter_map(|e| e.ok().map(|e| e.path()))
        .filter(|p| p.extension().and_then(|x| x.to_str()) == Some("csv"))
        .collect();
    files.sort();
    if files.is_empty() {
        return Err(Error::Csv {
            path: dir.to_path_buf(),
            reason: "no .csv files found".into(),
        });
    }
    let mut out = Vec::new();
    for file in files {
        for s in load_ticker_csv(&file)? {
            out.push(filter_dates(s, start, end)?);
        }
    }
    Ok(out)
}

fn filter_dates(s: TimeSeries, start: Option<NaiveDate>, end: Option<NaiveDate>) -> Result<TimeSeries> {
    if start.is_none() && end.is_none() {
        return Ok(s);
    }
    let keep = |d: &NaiveDate| start.map_or(true, |b| *d >= b) && end.map_or(true, |b| *d <= b);
    let (dates, values): (Vec<NaiveDate>, Vec<f64>) = s
        .dates()
        .iter()
        .zip(s.values())
        .filter(|(d, _)| keep(d))
        .map(|(d, v)| (*d, *v))
        .unzip();
    TimeSeries::new(s.id(), dates, values)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub n_rows: usize,
    pub n_tickers: usize,
    pub planted_count: usize,
    pub noise_sigma: f64,
    pub seed: u64,
    /// Lead, in rows, of the planted features over the target series.
    pub horizon: usize,
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            n_rows: 600,
            n_tickers: 24,
            planted_count: 3,
            noise_sigma: 0.05,
            seed: 7,
            horizon: 10,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.n_rows < 2 {
            return bad(format!("n_rows must be >= 2, got {}", self.n_rows));
        }
        if self.n_tickers == 0 {
            return bad("n_tickers must be >= 1".into());
        }
        if self.planted_count >= 5 * self.n_tickers || self.planted_count > 5 * (self.n_tickers - 1) {
            return bad(format!(
                "planted_count {} does not fit in the {} non-target columns",
                self.planted_count,
                5 * (self.n_tickers - 1)
            ));
        }
        if !(self.noise_sigma >= 0.0 && self.noise_sigma.is_finite()) {
            return bad(format!("noise_sigma must be >= 0, got {}", self.noise_sigma));
        }
        Ok(())
    }
}

/// Parses `n_rows=600,n_tickers=24,...`; unspecified keys keep their defaults.
impl FromStr for SyntheticSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let mut spec = SyntheticSpec::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("expected key=value, got `{part}`")))?;
            let value = value.trim();
            let num = |what: &str| Error::Config(format!("bad value `{value}` for {what}"));
            match key.trim() {
                "n_rows" => spec.n_rows = value.parse().map_err(|_| num("n_rows"))?,
                "n_tickers" => spec.n_tickers = value.parse().map_err(|_| num("n_tickers"))?,
                "planted_count" => spec.planted_count = value.parse().map_err(|_| num("planted_count"))?,
                "noise_sigma" => spec.noise_sigma = value.parse().map_err(|_| num("noise_sigma"))?,
                "seed" => spec.seed = value.parse().map_err(|_| num("seed"))?,
                "horizon" => spec.horizon = value.parse().map_err(|_| num("horizon"))?,
                other => return Err(Error::Config(format!("unknown synthetic key `{other}`"))),
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticManifest {
    pub spec: SyntheticSpec,
    pub target_id: String,
    pub tickers: Vec<String>,
    pub planted: Vec<String>,
}

#[derive(Debug, Clone)]
pub struct SyntheticData {
    pub series: Vec<TimeSeries>,
    pub manifest: SyntheticManifest,
}

pub const SYNTHETIC_TARGET: &str = "AAPL.Close";

fn ticker_name(t: usize) -> String {
    if t == 0 {
        "AAPL".to_string()
    } else {
        format!("SYN{t:02}")
    }
}

fn business_days(n: usize) -> Vec<NaiveDate> {
    let mut d = NaiveDate::from_ymd_opt(2016, 1, 4).expect("valid date");
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        if !matches!(d.weekday(), Weekday::Sat | Weekday::Sun) {
            out.push(d);
        }
        d += Duration::days(1);
    }
    out
}

/// Seeded geometric random walks with OHLCV structure per ticker.
///
/// Ticker 0 is `AAPL`, whose close is the target. The planted features are
/// leading indicators: `target[t + horizon]` plus Gaussian noise with standard
/// deviation `noise_sigma * std(target)`. They replace non-target columns,
/// taken from the last ticker backwards.
pub fn generate_synthetic(spec: &SyntheticSpec) -> Result<SyntheticData> {
    spec.validate()?;
    let n = spec.n_rows;
    let dates = business_days(n);
    let tickers: Vec<String> = (0..spec.n_tickers).map(ticker_name).collect();
    let mut columns: Vec<(String, Vec<f64>)> = Vec::with_capacity(5 * spec.n_tickers);
    for (t, name) in tickers.iter().enumerate() {
        let mut rng = Rng::new(derive_seed(spec.seed, "ticker", t as u64));
        let mut close = Vec::with_capacity(n);
        let mut open = Vec::with_capacity(n);
        let mut high = Vec::with_capacity(n);
        let mut low = Vec::with_capacity(n);
        let mut volume = Vec::with_capacity(n);
        let mut prev = 50.0 + 150.0 * rng.uniform();
        let drift = 0.0003;
        let vol = 0.01 + 0.01 * rng.uniform();
        for _ in 0..n {
            let o = prev * (0.005 * rng.normal()).exp();
            let c = prev * (drift + vol * rng.normal()).exp();
            let h = o.max(c) * (0.004 * rng.normal()).abs().exp();
            let l = o.min(c) * (-(0.004 * rng.normal()).abs()).exp();
            let v = (15.0 + 0.3 * rng.normal()).exp().round();
            open.push(o);
            high.push(h);
            low.push(l);
            close.push(c);
            volume.push(v);
            prev = c;
        }
        for (field, values) in FIELDS.iter().zip([open, high, low, close, volume]) {
            columns.push((format!("{name}.{field}"), values));
        }
    }

    let target = columns
        .iter()
        .find(|c| c.0 == SYNTHETIC_TARGET)
        .map(|c| c.1.clone())
        .expect("ticker 0 is the target");
    let target_sd = sample_variance(&target).sqrt();
    let slots: Vec<usize> = (1..spec.n_tickers)
        .rev()
        .flat_map(|t| (0..5).map(move |f| t * 5 + f))
        .take(spec.planted_count)
        .collect();
    let mut planted = Vec::with_capacity(slots.len());
    for (i, &slot) in slots.iter().enumerate() {
        let mut rng = Rng::new(derive_seed(spec.seed, "planted", i as u64));
        let values: Vec<f64> = (0..n)
            .map(|r| {
                let lead = target[(r + spec.horizon).min(n - 1)];
                let noise = rng.normal();
                lead + spec.noise_sigma * target_sd * noise
            })
            .collect();
        columns[slot].1 = values;
        planted.push(columns[slot].0.clone());
    }

    let series = columns
        .into_iter()
        .map(|(id, values)| TimeSeries::new(id, dates.clone(), values))
        .collect::<Result<Vec<_>>>()?;
    Ok(SyntheticData {
        series,
        manifest: SyntheticManifest {
            spec: spec.clone(),
            target_id: SYNTHETIC_TARGET.to_string(),
            tickers,
            planted,
        },
    })
}

/// Writes one `<TICKER>.csv` per ticker plus `manifest.json`.
pub fn write_synthetic(data: &SyntheticData, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    for ticker in &data.manifest.tickers {
        let cols: Vec<&TimeSeries> = FIELDS
            .iter()
            .map(|f| {
                let id = format!("{ticker}.{f}");
                data.series.iter().find(|s| s.id() == id).expect("every ticker has all fields")
            })
            .collect();
        let mut text = String::from("Date,Open,High,Low,Close,Volume\n");
        for (r, date) in cols[0].dates().iter().enumerate() {
            let _ = write!(text, "{}", date.format(DATE_FORMAT));
            for c in &cols {
                let _ = write!(text, ",{}", c.values()[r]);
            }
            text.push('\n');
        }
        let path = dir.join(format!("{ticker}.csv"));
        std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    }
    let path = dir.join("manifest.json");
    let json = serde_json::to_string_pretty(&data.manifest)?;
    std::fs::write(&path, json + "\n").map_err(|e| Error::io(&path, e))?;
    Ok(())
}
