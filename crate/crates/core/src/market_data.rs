//! Price ingestion, bar resampling and log-return construction.

use std::fmt;
use std::io::{Read, Write};
use std::str::FromStr;

use chrono::{DateTime, SecondsFormat, Utc};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

/// Sampling interval of a series. `Raw` is whatever the source delivered.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Timescale {
    Raw,
    Minute,
    Hour,
    #[serde(rename = "4hour")]
    FourHour,
    Day,
}

impl Timescale {
    /// The four bar sizes analysed by the pipeline, finest first.
    pub const BARS: [Timescale; 4] = [
        Timescale::Minute,
        Timescale::Hour,
        Timescale::FourHour,
        Timescale::Day,
    ];

    /// Bar length in seconds; `None` for `Raw`.
    pub fn seconds(self) -> Option<i64> {
        match self {
            Timescale::Raw => None,
            Timescale::Minute => Some(60),
            Timescale::Hour => Some(3_600),
            Timescale::FourHour => Some(14_400),
            Timescale::Day => Some(86_400),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            Timescale::Raw => "raw",
            Timescale::Minute => "minute",
            Timescale::Hour => "hour",
            Timescale::FourHour => "4hour",
            Timescale::Day => "day",
        }
    }
}

impl fmt::Display for Timescale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Timescale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "raw" => Ok(Timescale::Raw),
            "minute" | "1m" => Ok(Timescale::Minute),
            "hour" | "1h" => Ok(Timescale::Hour),
            "4hour" | "4h" => Ok(Timescale::FourHour),
            "day" | "1d" => Ok(Timescale::Day),
            other => Err(invalid(format!("unknown timescale `{other}`"))),
        }
    }
}

/// Timestamped positive prices at a declared timescale.
#[derive(Debug, Clone, PartialEq)]
pub struct PriceSeries {
    timestamps: Vec<DateTime<Utc>>,
    prices: Vec<f64>,
    timescale: Timescale,
}

impl PriceSeries {
    /// Builds a series, checking that timestamps strictly increase and
    /// every price is positive and finite.
    pub fn new(
        timestamps: Vec<DateTime<Utc>>,
        prices: Vec<f64>,
        timescale: Timescale,
    ) -> Result<Self> {
        if timestamps.len() != prices.len() {
            return Err(invalid("timestamps and prices differ in length"));
        }
        if prices.is_empty() {
            return Err(Error::EmptyInput);
        }
        // Line numbers count the header as line 1.
        for (i, &p) in prices.iter().enumerate() {
            if !(p > 0.0 && p.is_finite()) {
                return Err(Error::NonPositivePrice { line: i as u64 + 2 });
            }
        }
        for (i, w) in timestamps.windows(2).enumerate() {
            if w[1] <= w[0] {
                return Err(Error::NonIncreasingTimestamp { line: i as u64 + 3 });
            }
        }
        Ok(Self {
            timestamps,
            prices,
            timescale,
        })
    }

    pub fn timestamps(&self) -> &[DateTime<Utc>] {
        &self.timestamps
    }

    pub fn prices(&self) -> &[f64] {
        &self.prices
    }

    pub fn timescale(&self) -> Timescale {
        self.timescale
    }

    pub fn len(&self) -> usize {
        self.prices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.prices.is_empty()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReturnKind {
    Signed,
    Absolute,
}

/// Log-returns (or their magnitudes). `timestamps[i]`, when present, is the
/// start instant of the bar whose close completes return `i`.
#[derive(Debug, Clone, PartialEq)]
pub struct ReturnSeries {
    values: Vec<f64>,
    timestamps: Option<Vec<DateTime<Utc>>>,
    timescale: Timescale,
    kind: ReturnKind,
}

impl ReturnSeries {
    pub fn new(values: Vec<f64>, timescale: Timescale, kind: ReturnKind) -> Result<Self> {
        Self::build(values, None, timescale, kind)
    }

    pub fn with_timestamps(
        values: Vec<f64>,
        timestamps: Vec<DateTime<Utc>>,
        timescale: Timescale,
        kind: ReturnKind,
    ) -> Result<Self> {
        if timestamps.len() != values.len() {
            return Err(invalid("timestamps and values differ in length"));
        }
        Self::build(values, Some(timestamps), timescale, kind)
    }

    /// Unlabelled signed returns; the usual entry point for in-memory data.
    pub fn from_values(values: Vec<f64>) -> Result<Self> {
        Self::new(values, Timescale::Raw, ReturnKind::Signed)
    }

    fn build(
        values: Vec<f64>,
        timestamps: Option<Vec<DateTime<Utc>>>,
        timescale: Timescale,
        kind: ReturnKind,
    ) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(invalid(format!("non-finite return at index {i}")));
        }
        if kind == ReturnKind::Absolute && values.iter().any(|&v| v < 0.0) {
            return Err(invalid("absolute return series contains a negative value"));
        }
        Ok(Self {
            values,
            timestamps,
            timescale,
            kind,
        })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn timestamps(&self) -> Option<&[DateTime<Utc>]> {
        self.timestamps.as_deref()
    }

    pub fn timescale(&self) -> Timescale {
        self.timescale
    }

    pub fn kind(&self) -> ReturnKind {
        self.kind
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }
}

fn parse_timestamp(field: &str, line: u64) -> Result<DateTime<Utc>> {
    let ts = DateTime::parse_from_rfc3339(field.trim())
        .map_err(|e| Error::Malformed {
            line,
            msg: format!("bad timestamp `{field}`: {e}"),
        })?
        .with_timezone(&Utc);
    if ts.timestamp_subsec_nanos() != 0 {
        return Err(Error::Malformed {
            line,
            msg: format!("timestamp `{field}` has sub-second precision"),
        });
    }
    Ok(ts)
}

fn format_timestamp(ts: &DateTime<Utc>) -> String {
    ts.to_rfc3339_opts(SecondsFormat::Secs, true)
}

/// Reads `timestamp,<value_col>` rows; `#` lines are comments.
fn read_two_columns(raw: impl Read, value_col: &str) -> Result<Vec<(u64, DateTime<Utc>, f64)>> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(raw);
    let header = reader.headers().map_err(|e| Error::Malformed {
        line: 1,
        msg: e.to_string(),
    })?;
    if header.len() != 2 || &header[0] != "timestamp" || &header[1] != value_col {
        return Err(Error::Malformed {
            line: header.position().map_or(1, |p| p.line()),
            msg: format!("expected header `timestamp,{value_col}`"),
        });
    }
    let mut rows = Vec::new();
    for record in reader.records() {
        let record = record.map_err(|e| Error::Malformed {
            line: e.position().map_or(0, |p| p.line()),
            msg: e.to_string(),
        })?;
        let line = record.position().map_or(0, |p| p.line());
        if record.len() != 2 {
            return Err(Error::Malformed {
                line,
                msg: format!("expected 2 fields, found {}", record.len()),
            });
        }
        let ts = parse_timestamp(&record[0], line)?;
        let value: f64 = record[1].parse().map_err(|_| Error::Malformed {
            line,
            msg: format!("bad number `{}`", &record[1]),
        })?;
        rows.push((line, ts, value));
    }
    if rows.is_empty() {
        return Err(Error::EmptyInput);
    }
    Ok(rows)
}

/// Parses a `timestamp,price` CSV. Rows must already be in time order.
pub fn parse_prices(raw: impl Read) -> Result<PriceSeries> {
    let rows = read_two_columns(raw, "price")?;
    let mut prev: Option<DateTime<Utc>> = None;
    let mut timestamps = Vec::with_capacity(rows.len());
    let mut prices = Vec::with_capacity(rows.len());
    for (line, ts, price) in rows {
        if !(price > 0.0 && price.is_finite()) {
            return Err(Error::NonPositivePrice { line });
        }
        if prev.is_some_and(|p| ts <= p) {
            return Err(Error::NonIncreasingTimestamp { line });
        }
        prev = Some(ts);
        timestamps.push(ts);
        prices.push(price);
    }
    Ok(PriceSeries {
        timestamps,
        prices,
        timescale: Timescale::Raw,
    })
}

pub fn write_prices(p: &PriceSeries, mut out: impl Write) -> std::io::Result<()> {
    writeln!(out, "timestamp,price")?;
    for (ts, price) in p.timestamps.iter().zip(&p.prices) {
        writeln!(out, "{},{}", format_timestamp(ts), price)?;
    }
    Ok(())
}

/// Parses a `timestamp,value` return CSV as a signed series.
pub fn parse_returns(raw: impl Read, timescale: Timescale) -> Result<ReturnSeries> {
    let rows = read_two_columns(raw, "value")?;
    let (timestamps, values) = rows.into_iter().map(|(_, ts, v)| (ts, v)).unzip();
    ReturnSeries::with_timestamps(values, timestamps, timescale, ReturnKind::Signed)
}

/// Writes a `timestamp,value` CSV. Series without timestamps are rejected.
pub fn write_returns(r: &ReturnSeries, mut out: impl Write) -> std::io::Result<()> {
    let ts = r.timestamps().ok_or_else(|| {
        std::io::Error::new(
            std::io::ErrorKind::InvalidInput,
            "return series has no timestamps",
        )
    })?;
    writeln!(out, "timestamp,value")?;
    for (t, v) in ts.iter().zip(&r.values) {
        writeln!(out, "{},{}", format_timestamp(t), v)?;
    }
    Ok(())
}

/// Resamples to `target` bars: each UTC-aligned bucket keeps its last
/// observed price and is stamped with the bucket start. Empty buckets are
/// dropped.
pub fn resample(p: &PriceSeries, target: Timescale) -> Result<PriceSeries> {
    if p.timescale == target {
        return Ok(p.clone());
    }
    let Some(size) = target.seconds() else {
        return Err(invalid("cannot resample to the raw timescale"));
    };
    if let Some(source) = p.timescale.seconds() {
        if source > size {
            return Err(Error::ResampleToFiner {
                from: p.timescale.to_string(),
                to: target.to_string(),
            });
        }
    }
    let mut timestamps: Vec<DateTime<Utc>> = Vec::new();
    let mut prices: Vec<f64> = Vec::new();
    let mut current: Option<i64> = None;
    for (ts, &price) in p.timestamps.iter().zip(&p.prices) {
        let bucket = ts.timestamp().div_euclid(size);
        if current == Some(bucket) {
            *prices.last_mut().expect("bucket open") = price;
        } else {
            current = Some(bucket);
            let start = DateTime::<Utc>::from_timestamp(bucket * size, 0)
                .ok_or_else(|| invalid("bucket start out of range"))?;
            timestamps.push(start);
            prices.push(price);
        }
    }
    if prices.len() < 2 {
        return Err(Error::SpanTooShort {
            target: target.to_string(),
            buckets: prices.len(),
        });
    }
    Ok(PriceSeries {
        timestamps,
        prices,
        timescale: target,
    })
}

/// `r[i] = ln p[i+1] - ln p[i]`.
pub fn log_returns(p: &PriceSeries) -> Result<ReturnSeries> {
    if p.len() < 2 {
        return Err(Error::TooShort {
            needed: 2,
            got: p.len(),
        });
    }
    let values = p
        .prices
        .windows(2)
        .map(|w| w[1].ln() - w[0].ln())
        .collect();
    Ok(ReturnSeries {
        values,
        timestamps: Some(p.timestamps[1..].to_vec()),
        timescale: p.timescale,
        kind: ReturnKind::Signed,
    })
}

/// Elementwise magnitude. Already-absolute input is returned as is.
pub fn abs_returns(r: &ReturnSeries) -> ReturnSeries {
    ReturnSeries {
        values: r.values.iter().map(|v| v.abs()).collect(),
        timestamps: r.timestamps.clone(),
        timescale: r.timescale,
        kind: ReturnKind::Absolute,
    }
}
