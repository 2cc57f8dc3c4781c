//! Daily close-price ingestion, calendar alignment and log returns.

use std::collections::BTreeMap;
use std::io::{Read, Write};
use std::path::{Path, PathBuf};

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum MarketDataError {
    #[error("{path}: missing column `{column}`")]
    MissingColumn { path: String, column: String },
    #[error("{path}: row {row}: cannot parse date `{value}` (expected YYYY-MM-DD)")]
    UnparsableDate { path: String, row: usize, value: String },
    #[error("{path}: row {row}: cannot parse close `{value}`")]
    UnparsableClose { path: String, row: usize, value: String },
    #[error("{path}: row {row}: close must be positive and finite, got {value}")]
    NonPositivePrice { path: String, row: usize, value: f64 },
    #[error("{path}: duplicate date {date}")]
    DuplicateDate { path: String, date: NaiveDate },
    #[error("series `{0}` needs at least two observations")]
    TooShort(String),
    #[error("series windows do not overlap in at least two calendar days")]
    NoOverlap,
    #[error("series `{0}` violates its invariants: {1}")]
    Invalid(String, String),
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Csv { path: String, source: csv::Error },
}

/// Column names of a price CSV.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CsvSchema {
    pub date_column: String,
    pub close_column: String,
}

impl Default for CsvSchema {
    fn default() -> Self {
        Self { date_column: "date".into(), close_column: "close".into() }
    }
}

/// Dated close prices, ascending by date.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PriceSeries {
    pub asset_id: String,
    pub dates: Vec<NaiveDate>,
    pub closes: Vec<f64>,
}

/// Log-difference returns; `dates[t]` is the date of the later close.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReturnSeries {
    pub asset_id: String,
    pub dates: Vec<NaiveDate>,
    pub returns: Vec<f64>,
}

impl PriceSeries {
    pub fn new(asset_id: impl Into<String>, dates: Vec<NaiveDate>, closes: Vec<f64>) -> Result<Self, MarketDataError> {
        let s = Self { asset_id: asset_id.into(), dates, closes };
        s.validate()?;
        Ok(s)
    }

    pub fn len(&self) -> usize {
        self.dates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dates.is_empty()
    }

    fn validate(&self) -> Result<(), MarketDataError> {
        let bad = |msg: &str| Err(MarketDataError::Invalid(self.asset_id.clone(), msg.to_string()));
        if self.dates.len() != self.closes.len() {
            return bad("dates and closes differ in length");
        }
        if self.dates.windows(2).any(|w| w[0] >= w[1]) {
            return bad("dates are not strictly increasing");
        }
        if self.closes.iter().any(|c| !(c.is_finite() && *c > 0.0)) {
            return bad("closes must be positive and finite");
        }
        Ok(())
    }

    /// True when consecutive dates are exactly one calendar day apart.
    pub fn is_daily(&self) -> bool {
        self.dates.windows(2).all(|w| (w[1] - w[0]).num_days() == 1)
    }
}

pub fn parse_price_csv(path: impl AsRef<Path>, schema: &CsvSchema) -> Result<PriceSeries, MarketDataError> {
    let path = path.as_ref();
    let file = std::fs::File::open(path).map_err(|source| MarketDataError::Io { path: display(path), source })?;
    let asset_id = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    read_price_csv(file, &display(path), asset_id, schema)
}

/// Parses price rows from any reader; `label` names the source in errors.
pub fn read_price_csv<R: Read>(
    reader: R,
    label: &str,
    asset_id: impl Into<String>,
    schema: &CsvSchema,
) -> Result<PriceSeries, MarketDataError> {
    let csv_err = |source| MarketDataError::Csv { path: label.to_string(), source };
    let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
    let headers = rdr.headers().map_err(csv_err)?.clone();
    let find = |name: &str| {
        headers
            .iter()
            .position(|h| h == name)
            .ok_or_else(|| MarketDataError::MissingColumn { path: label.to_string(), column: name.to_string() })
    };
    let date_idx = find(&schema.date_column)?;
    let close_idx = find(&schema.close_column)?;

    let mut rows: BTreeMap<NaiveDate, f64> = BTreeMap::new();
    for (i, record) in rdr.records().enumerate() {
        let record = record.map_err(csv_err)?;
        let row = i + 2;
        let raw_date = record.get(date_idx).unwrap_or("");
        let date = NaiveDate::parse_from_str(raw_date, "%Y-%m-%d").map_err(|_| MarketDataError::UnparsableDate {
            path: label.to_string(),
            row,
            value: raw_date.to_string(),
        })?;
        let raw_close = record.get(close_idx).unwrap_or("");
        let close: f64 = raw_close.parse().map_err(|_| MarketDataError::UnparsableClose {
            path: label.to_string(),
            row,
            value: raw_close.to_string(),
        })?;
        if !(close.is_finite() && close > 0.0) {
            return Err(MarketDataError::NonPositivePrice { path: label.to_string(), row, value: close });
        }
        if rows.insert(date, close).is_some() {
            return Err(MarketDataError::DuplicateDate { path: label.to_string(), date });
        }
    }
    let (dates, closes) = rows.into_iter().unzip();
    PriceSeries::new(asset_id, dates, closes)
}

/// Writes a series in the `date,close` layout it was read from.
pub fn write_price_csv<W: Write>(series: &PriceSeries, writer: W, schema: &CsvSchema) -> Result<(), csv::Error> {
    let mut w = csv::Writer::from_writer(writer);
    w.write_record([&schema.date_column, &schema.close_column])?;
    for (d, c) in series.dates.iter().zip(&series.closes) {
        w.write_record([d.format("%Y-%m-%d").to_string(), c.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

/// Fills every missing calendar day by linear interpolation in price between
/// the nearest observed closes. Observed closes are left untouched.
pub fn fill_calendar_gaps(series: &PriceSeries) -> Result<PriceSeries, MarketDataError> {
    if series.len() < 2 {
        return Err(MarketDataError::TooShort(series.asset_id.clone()));
    }
    series.validate()?;
    let mut dates = Vec::with_capacity(series.len());
    let mut closes = Vec::with_capacity(series.len());
    for i in 0..series.len() - 1 {
        let (d0, d1) = (series.dates[i], series.dates[i + 1]);
        let (c0, c1) = (series.closes[i], series.closes[i + 1]);
        let span = (d1 - d0).num_days();
        dates.push(d0);
        closes.push(c0);
        for k in 1..span {
            let w = k as f64 / span as f64;
            dates.push(d0 + chrono::Duration::days(k));
            closes.push(c0 + (c1 - c0) * w);
        }
    }
    dates.push(*series.dates.last().expect("len >= 2"));
    closes.push(*series.closes.last().expect("len >= 2"));
    Ok(PriceSeries { asset_id: series.asset_id.clone(), dates, closes })
}

pub fn log_returns(series: &PriceSeries) -> Result<ReturnSeries, MarketDataError> {
    if series.len() < 2 {
        return Err(MarketDataError::TooShort(series.asset_id.clone()));
    }
    let returns = series.closes.windows(2).map(|w| w[1].ln() - w[0].ln()).collect();
    Ok(ReturnSeries { asset_id: series.asset_id.clone(), dates: series.dates[1..].to_vec(), returns })
}

/// Gap-fills every series and trims all of them to their common calendar window.
pub fn align_panel(series_list: &[PriceSeries]) -> Result<Vec<PriceSeries>, MarketDataError> {
    let filled = series_list.iter().map(fill_calendar_gaps).collect::<Result<Vec<_>, _>>()?;
    let start = filled.iter().map(|s| s.dates[0]).max().ok_or(MarketDataError::NoOverlap)?;
    let end = filled.iter().map(|s| *s.dates.last().expect("filled")).min().ok_or(MarketDataError::NoOverlap)?;
    if (end - start).num_days() < 1 {
        return Err(MarketDataError::NoOverlap);
    }
    Ok(filled
        .into_iter()
        .map(|s| {
            let lo = s.dates.partition_point(|d| *d < start);
            let hi = s.dates.partition_point(|d| *d <= end);
            PriceSeries { asset_id: s.asset_id, dates: s.dates[lo..hi].to_vec(), closes: s.closes[lo..hi].to_vec() }
        })
        .collect())
}

fn display(path: &Path) -> String {
    PathBuf::from(path).display().to_string()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn d(s: &str) -> NaiveDate {
        NaiveDate::parse_from_str(s, "%Y-%m-%d").unwrap()
    }

    fn parse(text: &str) -> Result<PriceSeries, MarketDataError> {
        read_price_csv(text.as_bytes(), "inline.csv", "X", &CsvSchema::default())
    }

    #[test]
    fn parses_and_sorts() {
        let s = parse("date,close\n2015-08-09,265.5\n2015-08-08,260.0\n").unwrap();
        assert_eq!(s.len(), 2);
        assert_eq!(s.dates, vec![d("2015-08-08"), d("2015-08-09")]);
        assert_eq!(s.closes, vec![260.0, 265.5]);
    }

    #[test]
    fn custom_columns() {
        let schema = CsvSchema { date_column: "Date".into(), close_column: "Adj Close".into() };
        let s = read_price_csv("Date,Open,Adj Close\n2016-01-04,1,2016.5\n".as_bytes(), "y", "SPX", &schema).unwrap();
        assert_eq!(s.closes, vec![2016.5]);
    }

    #[test]
    fn rejects_bad_rows() {
        assert!(matches!(
            parse("date,close\n2015-08-08,1\n2015-08-08,2\n"),
            Err(MarketDataError::DuplicateDate { .. })
        ));
        assert!(matches!(parse("date,close\n2015-08-08,-1.0\n"), Err(MarketDataError::NonPositivePrice { .. })));
        assert!(matches!(parse("date,close\n2015-08-08,0\n"), Err(MarketDataError::NonPositivePrice { .. })));
        assert!(matches!(parse("date,close\n08/08/2015,1\n"), Err(MarketDataError::UnparsableDate { .. })));
        assert!(matches!(parse("date,close\n2015-08-08,abc\n"), Err(MarketDataError::UnparsableClose { .. })));
        assert!(matches!(parse("day,close\n2015-08-08,1\n"), Err(MarketDataError::MissingColumn { .. })));
    }

    #[test]
    fn missing_file_names_the_path() {
        let err = parse_price_csv("/no/such/prices.csv", &CsvSchema::default()).unwrap_err();
        assert!(err.to_string().contains("/no/such/prices.csv"));
    }

    #[test]
    fn weekend_is_interpolated() {
        // Friday 2017-07-07 .. Monday 2017-07-10
        let s = PriceSeries::new("S", vec![d("2017-07-07"), d("2017-07-10")], vec![100.0, 110.0]).unwrap();
        let f = fill_calendar_gaps(&s).unwrap();
        assert_eq!(f.len(), 4);
        assert!(f.is_daily());
        assert!((f.closes[1] - 310.0 / 3.0).abs() < 1e-12);
        assert!((f.closes[2] - 320.0 / 3.0).abs() < 1e-12);
        assert_eq!((f.closes[0], f.closes[3]), (100.0, 110.0));
    }

    #[test]
    fn flat_gap_and_identity() {
        let s = PriceSeries::new("S", vec![d("2017-01-01"), d("2017-01-04")], vec![100.0, 100.0]).unwrap();
        assert_eq!(fill_calendar_gaps(&s).unwrap().closes, vec![100.0; 4]);
        let full = PriceSeries::new("S", vec![d("2017-01-01"), d("2017-01-02"), d("2017-01-03")], vec![1.0, 2.0, 3.0])
            .unwrap();
        assert_eq!(fill_calendar_gaps(&full).unwrap(), full);
        let one = PriceSeries::new("S", vec![d("2017-01-01")], vec![1.0]).unwrap();
        assert!(matches!(fill_calendar_gaps(&one), Err(MarketDataError::TooShort(_))));
    }

    #[test]
    fn returns() {
        let dates = vec![d("2017-01-01"), d("2017-01-02"), d("2017-01-03")];
        let flat = PriceSeries::new("S", dates.clone(), vec![100.0; 3]).unwrap();
        assert_eq!(log_returns(&flat).unwrap().returns, vec![0.0, 0.0]);
        let up = PriceSeries::new("S", dates[..2].to_vec(), vec![100.0, 110.0]).unwrap();
        assert!((log_returns(&up).unwrap().returns[0] - 0.095_310_179_804_324_87).abs() < 1e-15);
        let down = PriceSeries::new("S", dates[..2].to_vec(), vec![100.0, 50.0]).unwrap();
        let r = log_returns(&down).unwrap();
        assert!((r.returns[0] + std::f64::consts::LN_2).abs() < 1e-15);
        assert_eq!(r.dates, vec![d("2017-01-02")]);
    }

    fn daily(start: &str, n: i64, asset: &str) -> PriceSeries {
        let s = d(start);
        let dates = (0..n).map(|k| s + chrono::Duration::days(k)).collect();
        PriceSeries::new(asset, dates, (0..n).map(|k| 100.0 + k as f64).collect()).unwrap()
    }

    #[test]
    fn panel_alignment() {
        let a = daily("2017-01-01", 10, "A");
        let b = daily("2017-01-01", 10, "B");
        let out = align_panel(&[a.clone(), b.clone()]).unwrap();
        assert_eq!(out, vec![a, b]);

        let a = daily("2017-01-01", 10, "A");
        let b = daily("2017-01-05", 16, "B");
        let out = align_panel(&[a, b]).unwrap();
        for s in &out {
            assert_eq!(s.dates.first(), Some(&d("2017-01-05")));
            assert_eq!(s.dates.last(), Some(&d("2017-01-10")));
        }
        assert_eq!(out[0].dates, out[1].dates);

        let c = daily("2017-03-01", 5, "C");
        assert!(matches!(align_panel(&[daily("2017-01-01", 5, "A"), c]), Err(MarketDataError::NoOverlap)));
    }

    #[test]
    fn panel_window_edge_uses_interpolated_value() {
        // A trades Mon/Wed/Fri only; B starts on the Tuesday
        let a = PriceSeries::new("A", vec![d("2017-01-02"), d("2017-01-04"), d("2017-01-06")], vec![10.0, 12.0, 14.0])
            .unwrap();
        let b = daily("2017-01-03", 4, "B");
        let out = align_panel(&[a, b]).unwrap();
        assert_eq!(out[0].closes, vec![11.0, 12.0, 13.0, 14.0]);
        assert_eq!(out[1].len(), 4);
    }

    #[test]
    fn csv_write_read_round_trip() {
        let s = PriceSeries::new("A", vec![d("2017-01-02"), d("2017-01-04")], vec![10.25, 1e-3]).unwrap();
        let mut buf = Vec::new();
        write_price_csv(&s, &mut buf, &CsvSchema::default()).unwrap();
        let back = read_price_csv(buf.as_slice(), "buf", "A", &CsvSchema::default()).unwrap();
        assert_eq!(back, s);
    }

    fn sparse_series() -> impl Strategy<Value = PriceSeries> {
        prop::collection::vec((1i64..6, 1.0f64..1000.0), 2..40).prop_map(|steps| {
            let mut date = NaiveDate::from_ymd_opt(2015, 8, 8).unwrap();
            let mut dates = Vec::new();
            let mut closes = Vec::new();
            for (gap, close) in steps {
                dates.push(date);
                closes.push(close);
                date += chrono::Duration::days(gap);
            }
            PriceSeries::new("P", dates, closes).unwrap()
        })
    }

    proptest! {
        #[test]
        fn fill_is_idempotent_and_bounded(s in sparse_series()) {
            let f = fill_calendar_gaps(&s).unwrap();
            prop_assert!(f.is_daily());
            prop_assert_eq!(fill_calendar_gaps(&f).unwrap(), f.clone());
            for w in s.dates.windows(2).zip(s.closes.windows(2)) {
                let (dw, cw) = w;
                let (lo, hi) = (cw[0].min(cw[1]), cw[0].max(cw[1]));
                let i0 = f.dates.binary_search(&dw[0]).unwrap();
                let i1 = f.dates.binary_search(&dw[1]).unwrap();
                prop_assert_eq!(f.closes[i0], cw[0]);
                prop_assert_eq!(f.closes[i1], cw[1]);
                for c in &f.closes[i0..=i1] {
                    prop_assert!(*c >= lo - 1e-12 && *c <= hi + 1e-12);
                }
            }
        }

        #[test]
        fn cumulative_returns_rebuild_prices(s in sparse_series()) {
            let f = fill_calendar_gaps(&s).unwrap();
            let r = log_returns(&f).unwrap();
            prop_assert_eq!(r.returns.len(), f.len() - 1);
            let mut cum = 0.0;
            for (t, ret) in r.returns.iter().enumerate() {
                cum += ret;
                let rebuilt = f.closes[0] * cum.exp();
                prop_assert!(((rebuilt - f.closes[t + 1]) / f.closes[t + 1]).abs() < 1e-12);
            }
        }
    }
}
