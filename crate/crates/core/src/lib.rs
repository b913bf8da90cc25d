//! Simulation and optimisation engine for defined-contribution pension
//! accumulation.
//!
//! The crate is organised bottom-up:
//!
//! * [`scenario`] generates or ingests panels of economic scenarios
//!   (equity returns, inflation, wage inflation, yield curves).
//! * [`market`] prices the inflation-indexed annuity that defines the
//!   pension target and derives the matching-portfolio return.
//! * [`career`] produces salaries and contributions and keeps per-contribution
//!   wealth tranches.
//! * [`regression`] holds the cross-sectional estimators: global least
//!   squares, LOESS with tri-cube weights and the expected-inflation estimator.
//! * [`strategy`] implements static mixes, glide paths and the two
//!   target-based rules.
//! * [`dp`] solves the wealth-to-target dynamic program with least-squares
//!   Monte Carlo and applies the resulting policy.
//! * [`metrics`] turns simulated wealth into replacement ratios, shortfall,
//!   VaR/CVaR and strategy reports.
//!
//! [`panel::PensionPanel`] ties a scenario set, an annuity and a career
//! schedule together; [`engine`] runs strategies on it.

// `!(x > 0.0)` is used on purpose so that NaN inputs are rejected too.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
#![allow(clippy::needless_range_loop)]

pub mod career;
pub mod dp;
pub mod engine;
pub mod error;
pub mod market;
pub mod metrics;
pub mod panel;
pub mod regression;
pub mod scenario;
pub mod strategy;

pub use career::{CareerSchedule, Tranche, WealthLedger};
pub use dp::{CombinationPolicy, DpConfig, DpMode, DpProblem, PolicyModel};
pub use engine::{PathOutcome, StrategyKind};
pub use error::{Error, Result};
pub use market::AnnuitySpec;
pub use metrics::{EvaluationReport, FrontierRow};
pub use panel::PensionPanel;
pub use regression::{BasisSpec, InflationEstimator, LoessModel};
pub use scenario::{EconomicState, ModelParams, MomentReport, ScenarioSet};
pub use strategy::{GlidePath, StaticRule, TargetParams};
