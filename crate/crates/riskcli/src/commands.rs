use std::path::Path;

use pivrisk::diagnostics::correlation_matrix;
use pivrisk::fhs_engine::{parametric_var_from_fit, run_fhs};
use pivrisk::gjr_garch::fit;
use pivrisk::market_data::{align_panel, log_returns, parse_price_csv};
use pivrisk::tables::{correlation_grid, fit_grid, risk_grid, statistics_grid, Grid};
use pivrisk::{
    CorrelationMatrix, DiagnosticsRow64, FitOptions, FitResult64, GjrParams64, ReturnSeries, RiskReport, RiskSpec,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{Format, RunConfig};
use crate::error::{input, CliError};

/// Significant digits in text tables.
const DIGITS: usize = 5;

/// A rendered command result: grids for text and CSV, a JSON value for machines.
pub struct Document {
    pub grids: Vec<Grid>,
    pub notes: Vec<String>,
    pub json: serde_json::Value,
}

impl Document {
    pub fn render(&self, format: Format) -> Result<String, CliError> {
        match format {
            Format::Json => serde_json::to_string_pretty(&self.json).map(|s| s + "\n").map_err(input),
            Format::Text => {
                let mut out: Vec<String> = self.grids.iter().map(|g| g.to_text(DIGITS)).collect();
                if !self.notes.is_empty() {
                    out.push(self.notes.join("\n") + "\n");
                }
                Ok(out.join("\n"))
            }
            Format::Csv => {
                let mut out = Vec::new();
                for g in &self.grids {
                    out.push(format!("# {}\n{}", g.title, g.to_csv().map_err(input)?));
                }
                out.extend(self.notes.iter().map(|n| format!("# {n}\n")));
                Ok(out.join("\n"))
            }
        }
    }
}

fn to_json<S: Serialize>(value: &S) -> Result<serde_json::Value, CliError> {
    serde_json::to_value(value).map_err(input)
}

pub fn write_output(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| input(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| input(format!("cannot write {}: {e}", path.display())))
}

/// Reads every asset, fills calendar gaps, trims to the common window and takes log returns.
pub fn load_returns(cfg: &RunConfig) -> Result<Vec<ReturnSeries>, CliError> {
    let prices = cfg
        .assets
        .iter()
        .map(|a| {
            let mut s =
                parse_price_csv(&a.path, &a.schema()).map_err(|e| input(format!("{}: {e}", a.path.display())))?;
            s.asset_id = a.id.clone();
            Ok(s)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    align_panel(&prices)
        .map_err(input)?
        .iter()
        .map(|s| log_returns(s).map_err(|e| input(format!("{}: {e}", s.asset_id))))
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct AssetStats {
    pub asset_id: String,
    pub first_date: String,
    pub last_date: String,
    #[serde(flatten)]
    pub diagnostics: DiagnosticsRow64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct StatsDoc {
    pub assets: Vec<AssetStats>,
    pub correlation: CorrelationMatrix,
}

pub fn stats(cfg: &RunConfig, panel: &[ReturnSeries]) -> Result<(StatsDoc, Document), CliError> {
    let assets = panel
        .iter()
        .map(|s| {
            let diagnostics = DiagnosticsRow64::for_returns(&s.returns, cfg.lags)
                .map_err(|e| input(format!("{}: {e}", s.asset_id)))?;
            Ok(AssetStats {
                asset_id: s.asset_id.clone(),
                first_date: s.dates.first().map(|d| d.to_string()).unwrap_or_default(),
                last_date: s.dates.last().map(|d| d.to_string()).unwrap_or_default(),
                diagnostics,
            })
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let correlation = correlation_matrix(panel).map_err(input)?;
    let rows: Vec<_> = assets.iter().map(|a| (a.asset_id.clone(), a.diagnostics)).collect();
    let doc = StatsDoc { assets, correlation };
    let rendered = Document {
        grids: vec![statistics_grid(&rows), correlation_grid(&doc.correlation)],
        notes: vec![],
        json: to_json(&doc)?,
    };
    Ok((doc, rendered))
}

/// Persisted fit for one asset, tagged with the sample it was estimated on.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitArtifact {
    pub asset_id: String,
    pub first_date: String,
    pub last_date: String,
    pub n_returns: usize,
    pub fit: FitResult64,
}

impl FitArtifact {
    fn matches(&self, series: &ReturnSeries) -> bool {
        self.n_returns == series.returns.len()
            && series.dates.first().map(|d| d.to_string()).as_deref() == Some(self.first_date.as_str())
            && series.dates.last().map(|d| d.to_string()).as_deref() == Some(self.last_date.as_str())
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitSummary {
    pub asset_id: String,
    /// `converged`, `not_converged` or `failed`.
    pub status: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub params: Option<GjrParams64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub neg_log_likelihood: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub stationarity_warning: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub residual_diagnostics: Option<DiagnosticsRow64>,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FitDoc {
    pub assets: Vec<FitSummary>,
}

pub fn fit_options(cfg: &RunConfig) -> FitOptions {
    FitOptions { lags: cfg.lags, ..FitOptions::default() }
}

fn fit_one(cfg: &RunConfig, series: &ReturnSeries) -> Result<FitArtifact, String> {
    let fit = fit(&series.returns, &fit_options(cfg)).map_err(|e| e.to_string())?;
    Ok(FitArtifact {
        asset_id: series.asset_id.clone(),
        first_date: series.dates.first().map(|d| d.to_string()).unwrap_or_default(),
        last_date: series.dates.last().map(|d| d.to_string()).unwrap_or_default(),
        n_returns: series.returns.len(),
        fit,
    })
}

/// Fits every asset and persists `fit_<id>.json`; stale files of failed assets are removed.
pub fn fit_all(cfg: &RunConfig, panel: &[ReturnSeries]) -> Result<Vec<Result<FitArtifact, String>>, CliError> {
    let outcomes: Vec<_> = panel.par_iter().map(|s| fit_one(cfg, s)).collect();
    for (series, outcome) in panel.iter().zip(&outcomes) {
        let path = cfg.fit_path(&series.asset_id);
        match outcome {
            Ok(artifact) => {
                let body = serde_json::to_string_pretty(artifact).map_err(input)? + "\n";
                write_output(&cfg.output_dir, &format!("fit_{}.json", series.asset_id), &body)?;
            }
            Err(_) if path.exists() => {
                std::fs::remove_file(&path).map_err(|e| input(format!("cannot remove {}: {e}", path.display())))?;
            }
            Err(_) => {}
        }
    }
    Ok(outcomes)
}

pub fn fit_document(
    panel: &[ReturnSeries],
    outcomes: &[Result<FitArtifact, String>],
) -> Result<(FitDoc, Document), CliError> {
    let mut notes = Vec::new();
    let assets = panel
        .iter()
        .zip(outcomes)
        .map(|(s, o)| match o {
            Ok(a) => {
                let f = &a.fit;
                if !f.converged {
                    notes.push(format!("{}: optimizer stopped at the iteration cap", s.asset_id));
                }
                if f.stationarity_warning {
                    notes.push(format!("{}: a + beta + gamma/2 = {:.4} >= 1", s.asset_id, f.params.persistence()));
                }
                FitSummary {
                    asset_id: s.asset_id.clone(),
                    status: if f.converged { "converged" } else { "not_converged" }.into(),
                    error: None,
                    params: Some(f.params),
                    neg_log_likelihood: Some(f.neg_log_likelihood),
                    stationarity_warning: Some(f.stationarity_warning),
                    residual_diagnostics: Some(f.residual_diagnostics),
                }
            }
            Err(e) => {
                notes.push(format!("{}: fit failed: {e}", s.asset_id));
                FitSummary {
                    asset_id: s.asset_id.clone(),
                    status: "failed".into(),
                    error: Some(e.clone()),
                    params: None,
                    neg_log_likelihood: None,
                    stationarity_warning: None,
                    residual_diagnostics: None,
                }
            }
        })
        .collect();
    let cols: Vec<_> =
        panel.iter().zip(outcomes).map(|(s, o)| (s.asset_id.clone(), o.as_ref().ok().map(|a| &a.fit))).collect();
    let doc = FitDoc { assets };
    let rendered = Document { grids: vec![fit_grid(&cols)], notes, json: to_json(&doc)? };
    Ok((doc, rendered))
}

pub fn all_failed(outcomes: &[Result<FitArtifact, String>]) -> bool {
    outcomes.iter().all(Result::is_err)
}

/// Loads persisted fits, refusing missing or stale ones.
pub fn load_fits(cfg: &RunConfig, panel: &[ReturnSeries]) -> Result<Vec<FitArtifact>, CliError> {
    panel
        .iter()
        .map(|s| {
            let path = cfg.fit_path(&s.asset_id);
            let text = std::fs::read_to_string(&path).map_err(|_| {
                CliError::MissingArtifacts(format!(
                    "no fit for {} at {}; run `riskcli fit` or pass --refit",
                    s.asset_id,
                    path.display()
                ))
            })?;
            let artifact: FitArtifact = serde_json::from_str(&text)
                .map_err(|e| input(format!("unreadable fit artifact {}: {e}", path.display())))?;
            if !artifact.matches(s) {
                return Err(CliError::MissingArtifacts(format!(
                    "fit at {} was estimated on different data; run `riskcli fit` or pass --refit",
                    path.display()
                )));
            }
            Ok(artifact)
        })
        .collect()
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct OneDayVar {
    pub asset_id: String,
    pub level: f64,
    pub var: f64,
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RiskDoc {
    pub spec: RiskSpec,
    pub reports: Vec<RiskReport<f64>>,
    /// One-day parametric VaR from the fitted innovation quantile.
    pub parametric_one_day: Vec<OneDayVar>,
}

pub fn risk(cfg: &RunConfig, fits: &[FitArtifact]) -> Result<(RiskDoc, Document), CliError> {
    let reports = fits
        .iter()
        .map(|a| {
            let sample = run_fhs(&a.fit, &cfg.risk).map_err(|e| CliError::FitFailed(format!("{}: {e}", a.asset_id)))?;
            RiskReport::from_sample(a.asset_id.clone(), &sample, &cfg.risk).map_err(input)
        })
        .collect::<Result<Vec<_>, CliError>>()?;
    let mut parametric = Vec::new();
    for a in fits {
        for &level in &cfg.risk.levels {
            let var = parametric_var_from_fit(&a.fit, level)
                .map_err(|e| CliError::FitFailed(format!("{}: {e}", a.asset_id)))?;
            parametric.push(OneDayVar { asset_id: a.asset_id.clone(), level, var });
        }
    }
    let mut notes: Vec<String> = reports
        .iter()
        .filter_map(|r| r.basel_gap.map(|g| format!("{}: |VaR 1% - ES 2.5%| / ES 2.5% = {g:.4}", r.asset_id)))
        .collect();
    notes.push(format!("seed {}", cfg.risk.seed));
    let doc = RiskDoc { spec: cfg.risk.clone(), reports, parametric_one_day: parametric };
    let rendered = Document { grids: vec![risk_grid(&doc.reports)], notes, json: to_json(&doc)? };
    Ok((doc, rendered))
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ReportDoc {
    pub seed: u64,
    /// `complete`, or `partial` when the fit stage produced nothing to simulate.
    pub status: String,
    /// The config file text, verbatim.
    pub config: String,
    pub stats: StatsDoc,
    pub fit: FitDoc,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub risk: Option<RiskDoc>,
}

/// Runs stats, fit and risk; always writes `report.json` and `report.txt`.
pub fn report(cfg: &RunConfig) -> Result<String, CliError> {
    let panel = load_returns(cfg)?;
    let (stats_doc, stats_out) = stats(cfg, &panel)?;
    let outcomes = fit_all(cfg, &panel)?;
    let (fit_doc, fit_out) = fit_document(&panel, &outcomes)?;
    let fits: Vec<FitArtifact> = outcomes.iter().filter_map(|o| o.as_ref().ok().cloned()).collect();
    let risk_stage = if fits.is_empty() { None } else { Some(risk(cfg, &fits)?) };
    let partial = risk_stage.is_none();
    let (risk_doc, risk_out) = risk_stage.unzip();
    let doc = ReportDoc {
        seed: cfg.risk.seed,
        status: if partial { "partial" } else { "complete" }.into(),
        config: cfg.raw.clone(),
        stats: stats_doc,
        fit: fit_doc,
        risk: risk_doc,
    };
    let json = serde_json::to_string_pretty(&doc).map_err(input)? + "\n";
    let mut text = format!("Run seed: {}\nStatus: {}\n\nConfiguration (verbatim):\n{}", doc.seed, doc.status, cfg.raw);
    if !cfg.raw.ends_with('\n') {
        text.push('\n');
    }
    for part in [Some(&stats_out), Some(&fit_out), risk_out.as_ref()].into_iter().flatten() {
        text.push('\n');
        text.push_str(&part.render(Format::Text)?);
    }
    if partial {
        text.push_str("\nRisk stage not run: every fit failed.\n");
    }
    write_output(&cfg.output_dir, "report.json", &json)?;
    write_output(&cfg.output_dir, "report.txt", &text)?;
    if partial {
        return Err(CliError::FitFailed(format!(
            "every fit failed; partial report written to {}",
            cfg.output_dir.join("report.json").display()
        )));
    }
    Ok(match cfg.format {
        Format::Json => json,
        Format::Text => text,
        Format::Csv => {
            let mut parts = vec![stats_out.render(Format::Csv)?, fit_out.render(Format::Csv)?];
            if let Some(r) = &risk_out {
                parts.push(r.render(Format::Csv)?);
            }
            parts.join("\n")
        }
    })
}
