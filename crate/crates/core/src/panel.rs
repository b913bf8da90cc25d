//! Per-path quantities shared by every strategy run on a scenario set.

use rayon::prelude::*;

use crate::career::{contributions, franchise_path, salary_path, CareerSchedule};
use crate::error::{Error, Result};
use crate::market::{AnnuitySpec, MarketValueSeries};
use crate::regression::{regress_now, BasisSpec, InflationEstimator};
use crate::scenario::ScenarioSet;

/// Scenario data, annuity prices, expected inflation and career cash flows
/// for every path and `t = 0..=T`.
///
/// Everything here is independent of the allocation strategy, so one panel
/// serves all strategies evaluated on the same set.
#[derive(Debug, Clone)]
pub struct PensionPanel {
    n_paths: usize,
    annuity: AnnuitySpec,
    schedule: CareerSchedule,
    equity: Vec<f64>,
    inflation: Vec<f64>,
    wage_inflation: Vec<f64>,
    market_value: Vec<f64>,
    expected_inflation: Vec<f64>,
    salary: Vec<f64>,
    franchise: Vec<f64>,
    contribution: Vec<f64>,
    indexed_wages: Vec<f64>,
    terminal_fit: Vec<(f64, f64)>,
    inflation_clamped: usize,
}

struct PathRows {
    market_value: Vec<f64>,
    salary: Vec<f64>,
    franchise: Vec<f64>,
    contribution: Vec<f64>,
}

impl PensionPanel {
    pub fn build(
        set: &ScenarioSet,
        schedule: &CareerSchedule,
        annuity: &AnnuitySpec,
        inflation_floor: f64,
    ) -> Result<Self> {
        annuity.validate()?;
        schedule.validate()?;
        let tt = annuity.retirement;
        if set.horizon() < tt {
            return Err(Error::param(format!(
                "scenario horizon {} shorter than retirement T={tt}",
                set.horizon()
            )));
        }
        if schedule.age_at(tt) > schedule.last_age() {
            return Err(Error::Schedule(format!(
                "career schedule ends at age {} before retirement at age {}",
                schedule.last_age(),
                schedule.age_at(tt)
            )));
        }
        let estimator = InflationEstimator::build(set, tt, inflation_floor)?;
        let markets = MarketValueSeries::build(set, annuity, &estimator)?;

        let rows = (0..set.n_paths())
            .into_par_iter()
            .map(|p| {
                let view = set.path(p);
                Ok(PathRows {
                    market_value: markets.path_factors(p).to_vec(),
                    salary: salary_path(&view, schedule, tt)?,
                    franchise: franchise_path(&view, schedule, tt),
                    contribution: contributions(&view, schedule, tt)?,
                })
            })
            .collect::<Result<Vec<_>>>()?;

        let n = set.n_paths();
        let width = tt + 1;
        let mut panel = PensionPanel {
            n_paths: n,
            annuity: *annuity,
            schedule: schedule.clone(),
            equity: Vec::with_capacity(n * width),
            inflation: Vec::with_capacity(n * width),
            wage_inflation: Vec::with_capacity(n * width),
            market_value: Vec::with_capacity(n * width),
            expected_inflation: Vec::with_capacity(n * width),
            salary: Vec::with_capacity(n * width),
            franchise: Vec::with_capacity(n * width),
            contribution: Vec::with_capacity(n * width),
            indexed_wages: Vec::with_capacity(n),
            terminal_fit: Vec::with_capacity(width),
            inflation_clamped: estimator.clamped(),
        };
        for (p, row) in rows.into_iter().enumerate() {
            let view = set.path(p);
            for t in 0..=tt {
                panel.equity.push(view.equity_return(t));
                panel.inflation.push(view.inflation(t));
                panel.wage_inflation.push(view.wage_inflation(t));
            }
            panel.expected_inflation.extend_from_slice(estimator.path_rates(p));
            panel.market_value.extend(row.market_value);
            panel.salary.extend(row.salary);
            panel.franchise.extend(row.franchise);
            panel.contribution.extend(row.contribution);
        }
        for p in 0..n {
            let w = indexed_wage_sum(panel.salaries(p), panel.inflation_path(p));
            if !(w > 0.0) {
                return Err(Error::domain(format!("indexed salary sum on path {p} is not positive")));
            }
            panel.indexed_wages.push(w);
        }

        let terminal: Vec<f64> = (0..n).map(|p| panel.market_value(p, tt)).collect();
        for t in 0..=tt {
            let now: Vec<f64> = (0..n).map(|p| panel.market_value(p, t)).collect();
            let fit = regress_now(&now, &terminal, &BasisSpec::linear())?;
            panel.terminal_fit.push((fit.coefficients()[0], fit.coefficients()[1]));
        }
        Ok(panel)
    }

    #[inline]
    fn idx(&self, p: usize, t: usize) -> usize {
        p * (self.annuity.retirement + 1) + t
    }

    fn row<'a>(&self, v: &'a [f64], p: usize) -> &'a [f64] {
        let w = self.annuity.retirement + 1;
        &v[p * w..(p + 1) * w]
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// Retirement time `T`.
    pub fn retirement(&self) -> usize {
        self.annuity.retirement
    }

    pub fn annuity(&self) -> &AnnuitySpec {
        &self.annuity
    }

    pub fn schedule(&self) -> &CareerSchedule {
        &self.schedule
    }

    pub fn equity_return(&self, p: usize, t: usize) -> f64 {
        self.equity[self.idx(p, t)]
    }

    pub fn inflation(&self, p: usize, t: usize) -> f64 {
        self.inflation[self.idx(p, t)]
    }

    /// Inflation series `π_0..π_T` of one path.
    pub fn inflation_path(&self, p: usize) -> &[f64] {
        self.row(&self.inflation, p)
    }

    pub fn wage_inflation(&self, p: usize, t: usize) -> f64 {
        self.wage_inflation[self.idx(p, t)]
    }

    /// Market value factor `M_t`.
    pub fn market_value(&self, p: usize, t: usize) -> f64 {
        self.market_value[self.idx(p, t)]
    }

    pub fn market_values(&self, p: usize) -> &[f64] {
        self.row(&self.market_value, p)
    }

    /// Matching-portfolio return `m_t` over `(t-1, t]`, `t >= 1`.
    pub fn matching_return(&self, p: usize, t: usize) -> f64 {
        debug_assert!(t >= 1);
        let i = self.idx(p, t);
        self.market_value[i] / self.market_value[i - 1] - 1.0
    }

    /// Expected annual inflation `I_t` until retirement.
    pub fn expected_inflation(&self, p: usize, t: usize) -> f64 {
        self.expected_inflation[self.idx(p, t)]
    }

    pub fn salary(&self, p: usize, t: usize) -> f64 {
        self.salary[self.idx(p, t)]
    }

    pub fn salaries(&self, p: usize) -> &[f64] {
        self.row(&self.salary, p)
    }

    pub fn franchise(&self, p: usize, t: usize) -> f64 {
        self.franchise[self.idx(p, t)]
    }

    /// State pension received in the first retirement year.
    pub fn state_pension(&self, p: usize) -> f64 {
        self.schedule.state_pension * self.franchise(p, self.annuity.retirement)
    }

    pub fn contribution(&self, p: usize, t: usize) -> f64 {
        self.contribution[self.idx(p, t)]
    }

    pub fn contributions(&self, p: usize) -> &[f64] {
        self.row(&self.contribution, p)
    }

    /// `Σ_{t=0}^{T} s_t Π_{τ=t+1}^{T} (1 + π_τ)`.
    pub fn indexed_wages(&self, p: usize) -> f64 {
        self.indexed_wages[p]
    }

    /// Regression estimate of `E[M_T | F_t]`.
    pub fn expected_terminal_market_value(&self, p: usize, t: usize) -> f64 {
        if t == self.annuity.retirement {
            return self.market_value(p, t);
        }
        let (a, b) = self.terminal_fit[t];
        a + b * self.market_value(p, t)
    }

    /// Number of (path, date) pairs where the expected-inflation level hit
    /// its floor.
    pub fn inflation_clamped(&self) -> usize {
        self.inflation_clamped
    }

    /// Same panel with every salary, franchise and contribution multiplied
    /// by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        let mut out = self.clone();
        out.schedule = self.schedule.scaled(factor);
        for v in [&mut out.salary, &mut out.franchise, &mut out.contribution] {
            v.iter_mut().for_each(|x| *x *= factor);
        }
        out.indexed_wages.iter_mut().for_each(|x| *x *= factor);
        out
    }
}

/// `Σ_{t=0}^{T} s_t Π_{τ=t+1}^{T} (1 + π_τ)` with `T = salaries.len() - 1`.
pub fn indexed_wage_sum(salaries: &[f64], inflation: &[f64]) -> f64 {
    let mut acc = 0.0;
    for (t, s) in salaries.iter().enumerate() {
        acc = if t == 0 { *s } else { acc * (1.0 + inflation[t]) + s };
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::regression::DEFAULT_LEVEL_FLOOR;
    use crate::scenario::{EconomicState, Provenance};

    #[test]
    fn indexed_wage_sum_matches_direct_products() {
        let s = [100.0, 110.0, 120.0];
        let pi = [0.0, 0.02, 0.03];
        let direct = 100.0 * 1.02 * 1.03 + 110.0 * 1.03 + 120.0;
        assert!((indexed_wage_sum(&s, &pi) - direct).abs() < 1e-12);
    }

    #[test]
    fn flat_world_panel() {
        let st = EconomicState {
            equity_return: 0.05,
            inflation: 0.0,
            wage_inflation: 0.0,
            yields: vec![0.0; 30],
        };
        let set = ScenarioSet::from_states(2, 41, vec![st; 2 * 42], Provenance::Generated).unwrap();
        let panel = PensionPanel::build(
            &set,
            &CareerSchedule::default(),
            &AnnuitySpec::default(),
            DEFAULT_LEVEL_FLOOR,
        )
        .unwrap();
        assert_eq!(panel.market_value(0, 0), 20.0);
        assert_eq!(panel.matching_return(1, 7), 0.0);
        assert_eq!(panel.expected_inflation(0, 3), 0.0);
        assert_eq!(panel.expected_terminal_market_value(0, 5), 20.0);
        assert!((panel.contribution(0, 0) - 1269.84).abs() < 1e-9);
        let scaled = panel.scaled(10.0);
        assert!((scaled.contribution(1, 9) - 10.0 * panel.contribution(1, 9)).abs() < 1e-9);
    }
}
