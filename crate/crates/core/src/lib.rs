//! Volatility filtering and tail-risk estimation for daily return series.
//!
//! The pipeline is: price ingestion and calendar alignment ([`market_data`]),
//! descriptive and specification diagnostics ([`diagnostics`]), an
//! AR(1)-GJR(1,1) model with standardized Pearson type-IV innovations
//! ([`gjr_garch`], [`pearson4`]), and filtered historical simulation of
//! multi-day Value-at-Risk and Expected Shortfall ([`fhs_engine`]).
//!
//! The numeric layers are generic over [`Scalar`] (`f32` or `f64`); the
//! `*64` aliases below name the double-precision instantiations used by the
//! command-line front end.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod numerics;
mod scalar;

pub use scalar::{from_usize, lit, Scalar};
pub mod pearson4;

pub use pearson4::{PearsonError, Piv};

pub type Piv64 = Piv<f64>;
pub type Piv32 = Piv<f32>;
pub mod market_data;

pub use market_data::{CsvSchema, MarketDataError, PriceSeries, ReturnSeries};
pub mod diagnostics;

pub use diagnostics::{CorrelationMatrix, DiagnosticsError, DiagnosticsRow};

pub type DiagnosticsRow64 = DiagnosticsRow<f64>;
pub mod gjr_garch;
pub mod synthetic;

pub use gjr_garch::{FilterOutput, FitOptions, FitResult, GarchError, GjrParams, TerminalState};

pub type GjrParams64 = GjrParams<f64>;
pub type FitResult64 = FitResult<f64>;
pub mod fhs_engine;

pub use fhs_engine::{FhsError, RiskEntry, RiskReport, RiskSpec, SimulatedSample};

pub type RiskReport64 = RiskReport<f64>;
pub mod tables;

pub use tables::{Grid, GridRow};
