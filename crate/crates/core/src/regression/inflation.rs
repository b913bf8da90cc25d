//! Expected future inflation from the cross-section of simulated paths.

use super::least_squares::{regress_now, BasisSpec};
use crate::error::{Error, Result};
use crate::scenario::ScenarioSet;

/// Lower bound applied to the regressed cumulative inflation level.
pub const DEFAULT_LEVEL_FLOOR: f64 = 0.5;

/// Regression of future cumulative inflation on past cumulative inflation at
/// one date.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationFit {
    pub t: usize,
    /// Slope on past cumulative inflation.
    pub xi1: f64,
    /// Intercept.
    pub xi2: f64,
    /// Annualised expected inflation per path.
    pub rates: Vec<f64>,
    /// Number of paths whose fitted level hit the floor.
    pub clamped: usize,
}

/// Regresses `Π_{k=t+1}^{T}(1+π_k)` on `Π_{k=1}^{t}(1+π_k)` across paths and
/// turns the fitted level into an annual rate.
///
/// At `t = 0` every path shares the same regressor, so the slope is dropped
/// and the fit is the cross-sectional mean.
pub fn expected_inflation(set: &ScenarioSet, t: usize, retirement: usize, floor: f64) -> Result<InflationFit> {
    if t >= retirement {
        return Err(Error::domain(format!(
            "expected inflation needs t < T, got t={t}, T={retirement}"
        )));
    }
    if retirement > set.horizon() {
        return Err(Error::param(format!(
            "retirement T={retirement} beyond scenario horizon {}",
            set.horizon()
        )));
    }
    if !(floor > 0.0) {
        return Err(Error::param(format!(
            "inflation level floor must be positive, got {floor}"
        )));
    }
    let n = set.n_paths();
    let mut xs = Vec::with_capacity(n);
    let mut ys = Vec::with_capacity(n);
    for view in set.paths() {
        let past: f64 = (1..=t).map(|k| 1.0 + view.inflation(k)).product();
        let future: f64 = (t + 1..=retirement).map(|k| 1.0 + view.inflation(k)).product();
        xs.push(past);
        ys.push(future);
    }
    let fit = regress_now(&xs, &ys, &BasisSpec::linear())?;
    let (xi2, xi1) = (fit.coefficients()[0], fit.coefficients()[1]);
    let root = retirement - t - 1;
    let mut clamped = 0;
    let rates = xs
        .iter()
        .map(|&x| {
            let mut level = xi1 * x + xi2;
            if !level.is_finite() {
                return Err(Error::Estimator(format!("non-finite inflation level at t={t}")));
            }
            if level < floor {
                level = floor;
                clamped += 1;
            }
            Ok(if root == 0 {
                level - 1.0
            } else {
                level.powf(1.0 / root as f64) - 1.0
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(InflationFit {
        t,
        xi1,
        xi2,
        rates,
        clamped,
    })
}

/// Expected annual inflation `I_t` for every path and `0 <= t <= T`.
///
/// The value at `T` repeats the one at `T - 1`.
#[derive(Debug, Clone, PartialEq)]
pub struct InflationEstimator {
    retirement: usize,
    rates: Vec<Vec<f64>>,
    coefficients: Vec<(f64, f64)>,
    clamped: usize,
}

impl InflationEstimator {
    pub fn build(set: &ScenarioSet, retirement: usize, floor: f64) -> Result<Self> {
        if retirement < 1 {
            return Err(Error::param("retirement T must be at least 1"));
        }
        let n = set.n_paths();
        let mut rates = vec![Vec::with_capacity(retirement + 1); n];
        let mut coefficients = Vec::with_capacity(retirement);
        let mut clamped = 0;
        for t in 0..retirement {
            let fit = expected_inflation(set, t, retirement, floor)?;
            for (row, r) in rates.iter_mut().zip(&fit.rates) {
                row.push(*r);
            }
            coefficients.push((fit.xi1, fit.xi2));
            clamped += fit.clamped;
        }
        for row in &mut rates {
            let last = row[retirement - 1];
            row.push(last);
        }
        Ok(InflationEstimator {
            retirement,
            rates,
            coefficients,
            clamped,
        })
    }

    /// The same rate on every path and date.
    pub fn constant(n_paths: usize, retirement: usize, rate: f64) -> Self {
        InflationEstimator {
            retirement,
            rates: vec![vec![rate; retirement + 1]; n_paths],
            coefficients: vec![(0.0, (1.0 + rate).powi(retirement as i32)); retirement],
            clamped: 0,
        }
    }

    pub fn retirement(&self) -> usize {
        self.retirement
    }

    pub fn rate(&self, path: usize, t: usize) -> f64 {
        self.rates[path][t]
    }

    pub fn path_rates(&self, path: usize) -> &[f64] {
        &self.rates[path]
    }

    /// `(ξ1, ξ2)` of the regression at `t < T`.
    pub fn coefficients(&self, t: usize) -> (f64, f64) {
        self.coefficients[t]
    }

    /// Total number of path-dates where the level floor was applied.
    pub fn clamped(&self) -> usize {
        self.clamped
    }
}
