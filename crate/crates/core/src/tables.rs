//! Grid views of diagnostics, fits and risk reports, rendered as text or CSV.

use serde::{Deserialize, Serialize};

use crate::diagnostics::{CorrelationMatrix, DiagnosticsRow};
use crate::fhs_engine::RiskReport;
use crate::gjr_garch::FitResult;

/// Labelled rows of optional numbers under named columns.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    pub title: String,
    pub columns: Vec<String>,
    pub rows: Vec<GridRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridRow {
    pub label: String,
    /// `None` for cells with no finite value.
    pub cells: Vec<Option<f64>>,
}

impl GridRow {
    fn new(label: impl Into<String>, cells: impl IntoIterator<Item = f64>) -> Self {
        Self { label: label.into(), cells: cells.into_iter().map(|v| v.is_finite().then_some(v)).collect() }
    }
}

/// Formats `x` to `digits` significant digits; scientific notation for very large or small magnitudes.
pub fn format_significant(x: f64, digits: usize) -> String {
    let digits = digits.max(1);
    if !x.is_finite() {
        return "-".into();
    }
    if x == 0.0 {
        return format!("{:.*}", digits - 1, 0.0);
    }
    let exp = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&exp) {
        return format!("{:.*e}", digits - 1, x);
    }
    let decimals = (digits as i32 - 1 - exp).max(0) as usize;
    let s = format!("{:.*}", decimals, x);
    // rounding can carry into a new leading digit, e.g. 9.99995 -> 10.0000
    let lead = s.trim_start_matches('-').split('.').next().map_or(0, |p| p.trim_start_matches('0').len());
    if lead > 0 && lead + decimals > digits && decimals > 0 {
        format!("{:.*}", decimals - 1, x)
    } else {
        s
    }
}

fn format_cell(x: f64, digits: usize) -> String {
    if x.fract() == 0.0 && x.abs() < 1e6 {
        format!("{x:.0}")
    } else {
        format_significant(x, digits)
    }
}

impl Grid {
    pub fn to_text(&self, digits: usize) -> String {
        let cells: Vec<Vec<String>> = self
            .rows
            .iter()
            .map(|r| r.cells.iter().map(|c| c.map_or("-".into(), |v| format_cell(v, digits))).collect())
            .collect();
        let label_w = self.rows.iter().map(|r| r.label.chars().count()).max().unwrap_or(0);
        let widths: Vec<usize> = self
            .columns
            .iter()
            .enumerate()
            .map(|(j, h)| {
                cells.iter().filter_map(|r| r.get(j)).map(String::len).chain([h.chars().count()]).max().unwrap_or(0)
            })
            .collect();
        let mut out = format!("{}\n{:label_w$}", self.title, "");
        for (h, w) in self.columns.iter().zip(&widths) {
            out.push_str(&format!("  {h:>w$}"));
        }
        out.push('\n');
        for (row, cs) in self.rows.iter().zip(&cells) {
            out.push_str(&format!("{:label_w$}", row.label));
            for (c, w) in cs.iter().zip(&widths) {
                out.push_str(&format!("  {c:>w$}"));
            }
            out.push('\n');
        }
        out
    }

    /// CSV with a header row; values use shortest round-trip formatting, empty for missing cells.
    pub fn to_csv(&self) -> Result<String, csv::Error> {
        let mut w = csv::Writer::from_writer(Vec::new());
        w.write_record(std::iter::once("").chain(self.columns.iter().map(String::as_str)))?;
        for row in &self.rows {
            let mut rec = vec![row.label.clone()];
            rec.extend(row.cells.iter().map(|c| c.map_or(String::new(), |v| v.to_string())));
            w.write_record(&rec)?;
        }
        let bytes = w.into_inner().map_err(|e| csv::Error::from(e.into_error()))?;
        Ok(String::from_utf8(bytes).expect("csv output is utf-8"))
    }
}

/// Descriptive statistics, one row per asset.
pub fn statistics_grid(rows: &[(String, DiagnosticsRow<f64>)]) -> Grid {
    let lags = rows.first().map_or(12, |r| r.1.lags);
    let columns = [
        "N".to_string(),
        "mean".into(),
        "std".into(),
        "skew".into(),
        "skew p".into(),
        "kurt".into(),
        "kurt p".into(),
        "JB".into(),
        "JB p".into(),
        format!("ARCH({lags}) LM"),
        "p".into(),
        format!("ARCH({lags}) F"),
        "p".into(),
        format!("LB({lags})"),
        "p".into(),
        format!("LB2({lags})"),
        "p".into(),
    ];
    let rows = rows
        .iter()
        .map(|(id, d)| {
            GridRow::new(
                id.clone(),
                [
                    d.n as f64,
                    d.mean,
                    d.std,
                    d.skewness,
                    d.skewness_p,
                    d.kurtosis,
                    d.kurtosis_p,
                    d.jb_stat,
                    d.jb_p,
                    d.arch_stat,
                    d.arch_p,
                    d.arch_f_stat,
                    d.arch_f_p,
                    d.lb_stat,
                    d.lb_p,
                    d.lb2_stat,
                    d.lb2_p,
                ],
            )
        })
        .collect();
    Grid { title: "Descriptive statistics of returns".into(), columns: columns.into(), rows }
}

pub fn correlation_grid(corr: &CorrelationMatrix) -> Grid {
    Grid {
        title: "Return correlations".into(),
        columns: corr.asset_ids.clone(),
        rows: corr
            .asset_ids
            .iter()
            .zip(&corr.values)
            .map(|(id, v)| GridRow::new(id.clone(), v.iter().copied()))
            .collect(),
    }
}

/// Parameter estimates by asset; a failed fit leaves its column empty.
pub fn fit_grid(fits: &[(String, Option<&FitResult<f64>>)]) -> Grid {
    type Field = fn(&FitResult<f64>) -> f64;
    let fields: [(&str, Field); 16] = [
        ("mu", |f| f.params.mu),
        ("phi", |f| f.params.phi),
        ("omega", |f| f.params.omega),
        ("a", |f| f.params.alpha),
        ("beta", |f| f.params.beta),
        ("gamma", |f| f.params.gamma),
        ("nu", |f| f.params.nu),
        ("m", |f| f.params.m),
        ("a+beta+gamma/2", |f| f.params.persistence()),
        ("neg. log-lik", |f| f.neg_log_likelihood),
        ("converged", |f| if f.converged { 1.0 } else { 0.0 }),
        ("LB(z) p", |f| f.residual_diagnostics.lb_p),
        ("LB(z^2) p", |f| f.residual_diagnostics.lb2_p),
        ("ARCH(z) p", |f| f.residual_diagnostics.arch_p),
        ("z mean", |f| f.residual_diagnostics.mean),
        ("z std", |f| f.residual_diagnostics.std),
    ];
    Grid {
        title: "GJR(1,1) estimates with Pearson IV innovations".into(),
        columns: fits.iter().map(|(id, _)| id.clone()).collect(),
        rows: fields
            .iter()
            .map(|(label, get)| GridRow::new(*label, fits.iter().map(|(_, f)| f.map_or(f64::NAN, get))))
            .collect(),
    }
}

/// `0.025` -> `"2.5%"`.
pub fn percent_label(level: f64) -> String {
    let s = format!("{:.6}", level * 100.0);
    format!("{}%", s.trim_end_matches('0').trim_end_matches('.'))
}

/// VaR and ES in percent, interleaved by level, one column per asset, plus the Basel gap row.
pub fn risk_grid(reports: &[RiskReport<f64>]) -> Grid {
    let levels: Vec<f64> = reports.first().map(|r| r.entries.iter().map(|e| e.level).collect()).unwrap_or_default();
    let (horizon, trials) = reports.first().map_or((0, 0), |r| (r.horizon, r.trials));
    let mut rows = Vec::new();
    for &level in &levels {
        let lab = percent_label(level);
        let pick = |var: bool| {
            reports.iter().map(move |r| r.entry(level).map_or(f64::NAN, |e| 100.0 * if var { e.var } else { e.es }))
        };
        rows.push(GridRow::new(format!("VaR {lab}"), pick(true)));
        rows.push(GridRow::new(format!("ES {lab}"), pick(false)));
    }
    if reports.iter().any(|r| r.basel_gap.is_some()) {
        rows.push(GridRow::new("Basel gap", reports.iter().map(|r| r.basel_gap.unwrap_or(f64::NAN))));
    }
    Grid {
        title: format!("{horizon}-day VaR and ES (% of log return, {trials} trials)"),
        columns: reports.iter().map(|r| r.asset_id.clone()).collect(),
        rows,
    }
}
