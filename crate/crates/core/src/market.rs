//! Pricing of the inflation-indexed annuity that defines the pension target.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::regression::InflationEstimator;
use crate::scenario::{PathView, ScenarioSet};

/// Retirement date and length of the pension annuity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct AnnuitySpec {
    /// Retirement time `T`, in years from the start.
    pub retirement: usize,
    /// Number of annual pension payments `N`.
    pub payments: usize,
    /// Age at retirement.
    pub retirement_age: u32,
}

impl Default for AnnuitySpec {
    fn default() -> Self {
        AnnuitySpec {
            retirement: 41,
            payments: 20,
            retirement_age: 66,
        }
    }
}

impl AnnuitySpec {
    pub fn validate(&self) -> Result<()> {
        if self.retirement < 1 {
            return Err(Error::param("retirement time T must be at least 1"));
        }
        if self.payments < 1 {
            return Err(Error::param("number of pension payments N must be at least 1"));
        }
        Ok(())
    }
}

/// Price at `t` of one unit of pension paid annually for `N` years from `T`,
/// indexed with the expected annual inflation `expected_inflation`:
///
/// `M_t = Σ_{τ=T}^{T+N-1} (1 + r_t^{τ-t})^{-(τ-t)} (1 + I_t)^{τ-t}`.
pub fn market_value_factor(path: &PathView<'_>, t: usize, spec: &AnnuitySpec, expected_inflation: f64) -> Result<f64> {
    if t > spec.retirement {
        return Err(Error::domain(format!(
            "market value factor requested at t={t} after retirement T={}",
            spec.retirement
        )));
    }
    if 1.0 + expected_inflation <= 0.0 {
        return Err(Error::domain("expected inflation at or below -100%"));
    }
    let mut total = 0.0;
    for tau in spec.retirement..spec.retirement + spec.payments {
        let h = (tau - t) as i32;
        if h == 0 {
            total += 1.0;
            continue;
        }
        let r = path.yield_at(t, h as f64)?;
        total += ((1.0 + expected_inflation) / (1.0 + r)).powi(h);
    }
    Ok(total)
}

/// Relative change of the market value factor.
pub fn matching_return(previous: f64, current: f64) -> f64 {
    current / previous - 1.0
}

/// Value at retirement of `N` unit payments discounted at `delta`:
/// `Σ_{k=0}^{N-1} (1 + δ)^{-k}`.
pub fn post_retirement_factor(delta: f64, payments: usize) -> Result<f64> {
    if 1.0 + delta <= 0.0 {
        return Err(Error::domain(format!("discount rate {delta} at or below -100%")));
    }
    if payments < 1 {
        return Err(Error::domain("need at least one pension payment"));
    }
    Ok((0..payments).map(|k| (1.0 + delta).powi(-(k as i32))).sum())
}

/// Market value factors `M_t` for every path and `t = 0..=T`.
#[derive(Debug, Clone, PartialEq)]
pub struct MarketValueSeries {
    retirement: usize,
    factors: Vec<Vec<f64>>,
}

impl MarketValueSeries {
    pub fn build(set: &ScenarioSet, spec: &AnnuitySpec, inflation: &InflationEstimator) -> Result<Self> {
        spec.validate()?;
        if set.horizon() < spec.retirement {
            return Err(Error::param(format!(
                "scenario horizon {} shorter than retirement T={}",
                set.horizon(),
                spec.retirement
            )));
        }
        let factors = (0..set.n_paths())
            .into_par_iter()
            .map(|p| {
                let view = set.path(p);
                (0..=spec.retirement)
                    .map(|t| market_value_factor(&view, t, spec, inflation.rate(p, t)))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(MarketValueSeries {
            retirement: spec.retirement,
            factors,
        })
    }

    /// Wraps precomputed factors (one vector of length `T + 1` per path).
    pub fn from_factors(factors: Vec<Vec<f64>>) -> Result<Self> {
        let retirement = factors
            .first()
            .map(|f| f.len().saturating_sub(1))
            .ok_or_else(|| Error::param("no paths"))?;
        if factors.iter().any(|f| f.len() != retirement + 1) {
            return Err(Error::param("market value factors are ragged"));
        }
        if factors.iter().flatten().any(|&m| !(m > 0.0 && m.is_finite())) {
            return Err(Error::domain("market value factors must be positive"));
        }
        Ok(MarketValueSeries { retirement, factors })
    }

    pub fn retirement(&self) -> usize {
        self.retirement
    }

    pub fn n_paths(&self) -> usize {
        self.factors.len()
    }

    pub fn factor(&self, path: usize, t: usize) -> f64 {
        self.factors[path][t]
    }

    pub fn path_factors(&self, path: usize) -> &[f64] {
        &self.factors[path]
    }

    /// `m_t = M_t / M_{t-1} - 1` for `1 <= t <= T`.
    pub fn matching_return(&self, path: usize, t: usize) -> Result<f64> {
        if t == 0 || t > self.retirement {
            return Err(Error::domain(format!(
                "matching return defined for 1 <= t <= {}, got {t}",
                self.retirement
            )));
        }
        let f = &self.factors[path];
        Ok(matching_return(f[t - 1], f[t]))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EconomicState, Provenance};

    fn flat_set(rate: f64, horizon: usize) -> ScenarioSet {
        let s = EconomicState {
            equity_return: 0.0,
            inflation: 0.0,
            wage_inflation: 0.005,
            yields: vec![rate; 30],
        };
        ScenarioSet::from_states(1, horizon, vec![s; horizon + 1], Provenance::Generated).unwrap()
    }

    #[test]
    fn zero_curve_sums_payments() {
        let set = flat_set(0.0, 41);
        let spec = AnnuitySpec::default();
        let m = market_value_factor(&set.path(0), 41, &spec, 0.0).unwrap();
        assert_eq!(m, 20.0);
    }

    #[test]
    fn flat_five_percent_two_payments() {
        let set = flat_set(0.05, 41);
        let spec = AnnuitySpec {
            payments: 2,
            ..AnnuitySpec::default()
        };
        let m = market_value_factor(&set.path(0), 41, &spec, 0.0).unwrap();
        assert!((m - (1.0 + 1.0 / 1.05)).abs() < 1e-12);
        assert!((m - 1.952381).abs() < 1e-6);
    }

    #[test]
    fn single_payment_at_retirement_is_one() {
        let set = flat_set(0.07, 41);
        let spec = AnnuitySpec {
            payments: 1,
            ..AnnuitySpec::default()
        };
        assert_eq!(market_value_factor(&set.path(0), 41, &spec, 0.03).unwrap(), 1.0);
    }

    #[test]
    fn after_retirement_is_domain_error() {
        let set = flat_set(0.01, 45);
        let spec = AnnuitySpec::default();
        assert!(matches!(
            market_value_factor(&set.path(0), 42, &spec, 0.0),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn matching_return_basics() {
        assert_eq!(matching_return(3.0, 3.0), 0.0);
        assert_eq!(matching_return(3.0, 6.0), 1.0);
        let s = MarketValueSeries::from_factors(vec![vec![1.0, 2.0]]).unwrap();
        assert!(matches!(s.matching_return(0, 0), Err(Error::Domain(_))));
        assert_eq!(s.matching_return(0, 1).unwrap(), 1.0);
    }

    #[test]
    fn frozen_curve_gives_roll_down_return() {
        // curve and expected inflation fixed between t-1 and t: the return is
        // the ratio of the two discounted sums at the same flat rate
        let set = flat_set(0.03, 41);
        let spec = AnnuitySpec::default();
        let v = set.path(0);
        let m0 = market_value_factor(&v, 10, &spec, 0.01).unwrap();
        let m1 = market_value_factor(&v, 11, &spec, 0.01).unwrap();
        // every payment moves one year closer: each term grows by 1.03/1.01
        assert!((matching_return(m0, m1) - (1.03 / 1.01 - 1.0)).abs() < 1e-12);
    }

    #[test]
    fn post_retirement_factor_values() {
        assert_eq!(post_retirement_factor(0.0, 20).unwrap(), 20.0);
        assert_eq!(post_retirement_factor(0.3, 1).unwrap(), 1.0);
        let oracle = (1.0 - 1.025f64.powi(-20)) / (1.0 - 1.0 / 1.025);
        let got = post_retirement_factor(0.025, 20).unwrap();
        assert!((got - oracle).abs() < 1e-12);
        assert!((got - 15.97889).abs() < 1e-5);
        assert!(matches!(post_retirement_factor(-1.0, 20), Err(Error::Domain(_))));
    }

    #[test]
    fn post_retirement_factor_monotone() {
        let mut prev = f64::INFINITY;
        for i in 0..50 {
            let d = -0.05 + i as f64 * 0.005;
            let v = post_retirement_factor(d, 20).unwrap();
            assert!(v < prev);
            prev = v;
        }
        for n in 1..40 {
            assert!(post_retirement_factor(0.02, n + 1).unwrap() > post_retirement_factor(0.02, n).unwrap());
        }
    }
}
