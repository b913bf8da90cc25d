//! Salary career path, contributions and per-contribution wealth tranches.

use std::path::Path;

use crate::error::{Error, Result};
use crate::scenario::PathView;

/// Age of the investor at `t = 0`.
pub const START_AGE: u32 = 25;

const DEFAULT_CAREER_RATES: [(u32, f64); 4] = [(25, 0.03), (35, 0.02), (45, 0.01), (55, 0.0)];
const DEFAULT_CONTRIBUTION_RATES: [(u32, f64); 9] = [
    (25, 0.078),
    (30, 0.090),
    (35, 0.105),
    (40, 0.122),
    (45, 0.142),
    (50, 0.165),
    (55, 0.194),
    (60, 0.230),
    (65, 0.260),
];

/// Deterministic career path and contribution schedule.
///
/// `career_rates[i]` is the real salary increase when the investor turns
/// `start_age + i` (so the rate listed at age 35 takes the salary from age
/// 34 to 35). Contributions are `contribution_rates[i]` times the salary in
/// excess of the franchise. Nominal amounts are indexed with wage inflation.
#[derive(Debug, Clone, PartialEq)]
pub struct CareerSchedule {
    pub start_age: u32,
    pub base_salary: f64,
    pub career_rates: Vec<f64>,
    pub contribution_rates: Vec<f64>,
    pub franchise: f64,
    pub wage_spread: f64,
    /// State old-age pension at retirement as a multiple of the indexed
    /// franchise. It adds to the annuity income in replacement ratios.
    pub state_pension: f64,
}

impl Default for CareerSchedule {
    fn default() -> Self {
        let ages = START_AGE..=66;
        let lookup = |table: &[(u32, f64)], age: u32| {
            table
                .iter()
                .rev()
                .find(|(a, _)| *a <= age)
                .map(|(_, r)| *r)
                .unwrap_or(0.0)
        };
        CareerSchedule {
            start_age: START_AGE,
            base_salary: 29403.0,
            career_rates: ages.clone().map(|a| lookup(&DEFAULT_CAREER_RATES, a)).collect(),
            contribution_rates: ages.map(|a| lookup(&DEFAULT_CONTRIBUTION_RATES, a)).collect(),
            franchise: 13123.0,
            wage_spread: crate::scenario::DEFAULT_WAGE_SPREAD,
            state_pension: 1.0,
        }
    }
}

impl CareerSchedule {
    /// Replaces the rate columns with those from a CSV file with header
    /// `age,career_rate,contribution_rate`. Ages must be contiguous.
    pub fn with_rates_from_csv(mut self, file: impl AsRef<Path>) -> Result<Self> {
        let file = file.as_ref();
        let schema = |message: String| Error::Schema {
            path: file.to_path_buf(),
            message,
        };
        let csv_err = |source| Error::Csv {
            path: file.to_path_buf(),
            source,
        };
        let reader = std::fs::File::open(file).map_err(|source| Error::Io {
            path: file.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let headers = rdr.headers().map_err(csv_err)?.clone();
        let col = |name: &str| {
            headers
                .iter()
                .position(|h| h == name)
                .ok_or_else(|| schema(format!("missing required column \"{name}\"")))
        };
        let (c_age, c_car, c_con) = (col("age")?, col("career_rate")?, col("contribution_rate")?);
        let mut rows = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(csv_err)?;
            let get = |c: usize, name: &str| -> Result<f64> {
                rec.get(c)
                    .and_then(|s| s.parse::<f64>().ok())
                    .ok_or_else(|| schema(format!("line {}: bad value for \"{name}\"", line + 2)))
            };
            rows.push((
                get(c_age, "age")?,
                get(c_car, "career_rate")?,
                get(c_con, "contribution_rate")?,
            ));
        }
        rows.sort_by(|a, b| a.0.total_cmp(&b.0));
        let Some(first) = rows.first() else {
            return Err(schema("schedule file has no rows".into()));
        };
        if first.0.fract() != 0.0 || first.0 < 0.0 {
            return Err(schema("ages must be non-negative integers".into()));
        }
        for (i, r) in rows.iter().enumerate() {
            if r.0 != first.0 + i as f64 {
                return Err(Error::Schedule(format!("ages are not contiguous at {}", r.0)));
            }
        }
        self.start_age = first.0 as u32;
        self.career_rates = rows.iter().map(|r| r.1).collect();
        self.contribution_rates = rows.iter().map(|r| r.2).collect();
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        if self.career_rates.len() != self.contribution_rates.len() || self.career_rates.is_empty() {
            return Err(Error::Schedule(
                "rate columns must be non-empty and of equal length".into(),
            ));
        }
        if self.career_rates.iter().any(|r| !(*r >= 0.0)) {
            return Err(Error::Schedule("career rates must be >= 0".into()));
        }
        if self.contribution_rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
            return Err(Error::Schedule("contribution rates must lie in [0, 1]".into()));
        }
        if !(self.base_salary >= 0.0) || !(self.franchise >= 0.0) {
            return Err(Error::Schedule("base salary and franchise must be >= 0".into()));
        }
        if !(self.state_pension >= 0.0 && self.state_pension.is_finite()) {
            return Err(Error::Schedule("state pension multiple must be >= 0".into()));
        }
        Ok(())
    }

    pub fn last_age(&self) -> u32 {
        self.start_age + self.career_rates.len() as u32 - 1
    }

    pub fn age_at(&self, t: usize) -> u32 {
        self.start_age + t as u32
    }

    fn offset(&self, age: u32) -> Result<usize> {
        if age < self.start_age || age > self.last_age() {
            return Err(Error::Schedule(format!(
                "age {age} outside schedule {}..={}",
                self.start_age,
                self.last_age()
            )));
        }
        Ok((age - self.start_age) as usize)
    }

    pub fn career_rate(&self, age: u32) -> Result<f64> {
        Ok(self.career_rates[self.offset(age)?])
    }

    pub fn contribution_rate(&self, age: u32) -> Result<f64> {
        Ok(self.contribution_rates[self.offset(age)?])
    }

    /// Salary in today's money at every age of the schedule (the `t = 0`
    /// cross-section).
    pub fn salary_profile(&self) -> Vec<f64> {
        let mut s = self.base_salary;
        self.career_rates
            .iter()
            .enumerate()
            .map(|(i, r)| {
                if i > 0 {
                    s *= 1.0 + r;
                }
                s
            })
            .collect()
    }

    /// Contribution in today's money at every age of the schedule.
    pub fn contribution_profile(&self) -> Vec<f64> {
        self.salary_profile()
            .iter()
            .zip(&self.contribution_rates)
            .map(|(s, p)| p * (s - self.franchise).max(0.0))
            .collect()
    }

    /// Multiplies base salary and franchise by `factor`.
    pub fn scaled(&self, factor: f64) -> Self {
        CareerSchedule {
            base_salary: self.base_salary * factor,
            franchise: self.franchise * factor,
            ..self.clone()
        }
    }
}

/// Salaries `s_0..=s_last`: `s_t = s_{t-1} (1 + career rate at age_t) (1 + w_t)`.
pub fn salary_path(path: &PathView<'_>, schedule: &CareerSchedule, last: usize) -> Result<Vec<f64>> {
    if path.horizon() < last {
        return Err(Error::param(format!(
            "scenario horizon {} shorter than {last}",
            path.horizon()
        )));
    }
    let mut out = Vec::with_capacity(last + 1);
    let mut s = schedule.base_salary;
    schedule.career_rate(schedule.age_at(0))?;
    for t in 0..=last {
        if t > 0 {
            s *= (1.0 + schedule.career_rate(schedule.age_at(t))?) * (1.0 + path.wage_inflation(t));
        }
        out.push(s);
    }
    Ok(out)
}

/// Franchise indexed with realised wage inflation.
pub fn franchise_path(path: &PathView<'_>, schedule: &CareerSchedule, last: usize) -> Vec<f64> {
    let mut f = schedule.franchise;
    (0..=last)
        .map(|t| {
            if t > 0 {
                f *= 1.0 + path.wage_inflation(t);
            }
            f
        })
        .collect()
}

/// Contributions `c_t = p_t max(s_t - franchise_t, 0)` for `t = 0..=last`.
pub fn contributions(path: &PathView<'_>, schedule: &CareerSchedule, last: usize) -> Result<Vec<f64>> {
    let salaries = salary_path(path, schedule, last)?;
    let franchise = franchise_path(path, schedule, last);
    salaries
        .iter()
        .zip(&franchise)
        .enumerate()
        .map(|(t, (s, f))| Ok(schedule.contribution_rate(schedule.age_at(t))? * (s - f).max(0.0)))
        .collect()
}

/// Contribution at a single year.
pub fn contribution(path: &PathView<'_>, t: usize, schedule: &CareerSchedule) -> Result<f64> {
    Ok(contributions(path, schedule, t)?[t])
}

/// Wealth resulting from one contribution.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tranche {
    /// Year the contribution was made.
    pub start: usize,
    pub contribution: f64,
    pub wealth: f64,
    /// Fraction held in the return portfolio.
    pub alpha: f64,
    /// Once set, the tranche stays fully in the matching portfolio.
    pub absorbed: bool,
}

/// Wealth split into per-contribution tranches.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WealthLedger {
    tranches: Vec<Tranche>,
}

impl WealthLedger {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn tranches(&self) -> &[Tranche] {
        &self.tranches
    }

    /// Aggregate wealth `W_t = Σ_τ W_{t,τ}`.
    pub fn total(&self) -> f64 {
        self.tranches.iter().map(|t| t.wealth).sum()
    }

    /// Wealth-weighted allocation; zero for an empty or worthless ledger.
    pub fn aggregate_alpha(&self) -> f64 {
        let w = self.total();
        if w <= 0.0 {
            return 0.0;
        }
        self.tranches.iter().map(|t| t.wealth * t.alpha).sum::<f64>() / w
    }

    pub fn set_alpha(&mut self, index: usize, alpha: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&alpha) {
            return Err(Error::domain(format!("allocation {alpha} outside [0, 1]")));
        }
        let tr = &mut self.tranches[index];
        if tr.absorbed && alpha != 0.0 {
            return Err(Error::domain(format!(
                "tranche {} is absorbed and cannot hold the return portfolio",
                tr.start
            )));
        }
        tr.alpha = alpha;
        Ok(())
    }

    /// Moves a tranche permanently into the matching portfolio.
    pub fn absorb(&mut self, index: usize) {
        let tr = &mut self.tranches[index];
        tr.absorbed = true;
        tr.alpha = 0.0;
    }

    /// Applies one year of returns to every tranche at its current allocation.
    pub fn grow(&mut self, equity_return: f64, matching_return: f64) -> Result<()> {
        for tr in &mut self.tranches {
            if !(0.0..=1.0).contains(&tr.alpha) {
                return Err(Error::domain(format!("allocation {} outside [0, 1]", tr.alpha)));
            }
            tr.wealth *= (1.0 + equity_return) * tr.alpha + (1.0 + matching_return) * (1.0 - tr.alpha);
        }
        Ok(())
    }

    /// Appends the contribution made at `t`, initially in the return portfolio.
    pub fn contribute(&mut self, t: usize, amount: f64) {
        self.tranches.push(Tranche {
            start: t,
            contribution: amount,
            wealth: amount,
            alpha: 1.0,
            absorbed: false,
        });
    }

    /// Returns over `(t-1, t]` followed by the contribution at `t`.
    pub fn step(&mut self, t: usize, equity_return: f64, matching_return: f64, contribution: f64) -> Result<()> {
        self.grow(equity_return, matching_return)?;
        self.contribute(t, contribution);
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::{EconomicState, Provenance, ScenarioSet};

    const TABLE_CONTRIBUTIONS: [f64; 42] = [
        1270.0, 1339.0, 1409.0, 1482.0, 1558.0, 1887.0, 1979.0, 2073.0, 2171.0, 2272.0, 2731.0, 2813.0, 2897.0, 2982.0,
        3070.0, 3670.0, 3775.0, 3883.0, 3993.0, 4104.0, 4844.0, 4911.0, 4978.0, 5047.0, 5116.0, 6026.0, 6108.0, 6190.0,
        6274.0, 6358.0, 7476.0, 7476.0, 7476.0, 7476.0, 7476.0, 8863.0, 8863.0, 8863.0, 8863.0, 8863.0, 10019.0,
        10019.0,
    ];

    fn constant_wage_set(w: f64, horizon: usize) -> ScenarioSet {
        let s = EconomicState {
            equity_return: 0.0,
            inflation: w - 0.005,
            wage_inflation: w,
            yields: vec![0.02; 30],
        };
        ScenarioSet::from_states(1, horizon, vec![s; horizon + 1], Provenance::Generated).unwrap()
    }

    #[test]
    fn default_schedule_matches_contribution_table() {
        let sched = CareerSchedule::default();
        let c = sched.contribution_profile();
        assert_eq!(c.len(), 42);
        for (age, (got, want)) in (25..).zip(c.iter().zip(TABLE_CONTRIBUTIONS)) {
            assert!((got - want).abs() <= 1.0, "age {age}: {got} vs {want}");
        }
        assert!((c[0] - 1269.84).abs() < 1e-9);
    }

    #[test]
    fn salary_first_step() {
        let set = constant_wage_set(0.0, 41);
        let sched = CareerSchedule::default();
        let s = salary_path(&set.path(0), &sched, 41).unwrap();
        assert!((s[1] - 30285.09).abs() < 1e-9);
        let set = constant_wage_set(0.02, 41);
        let s = salary_path(&set.path(0), &sched, 41).unwrap();
        assert!((s[1] - 29403.0 * 1.03 * 1.02).abs() < 1e-9);
        assert!((s[1] - 30890.79).abs() < 0.01);
    }

    #[test]
    fn flat_career_is_constant() {
        let set = constant_wage_set(0.0, 41);
        let sched = CareerSchedule {
            career_rates: vec![0.0; 42],
            ..CareerSchedule::default()
        };
        let s = salary_path(&set.path(0), &sched, 41).unwrap();
        assert!(s.iter().all(|&x| x == 29403.0));
    }

    #[test]
    fn contribution_examples() {
        let set = constant_wage_set(0.0, 41);
        let sched = CareerSchedule::default();
        let c0 = contribution(&set.path(0), 0, &sched).unwrap();
        assert!((c0 - 0.078 * (29403.0 - 13123.0)).abs() < 1e-9);
        let c15 = contribution(&set.path(0), 15, &sched).unwrap();
        assert!((c15 - 3670.0).abs() < 1.0);
        let at_franchise = CareerSchedule {
            base_salary: 13123.0,
            career_rates: vec![0.0; 42],
            ..CareerSchedule::default()
        };
        assert_eq!(contribution(&set.path(0), 3, &at_franchise).unwrap(), 0.0);
    }

    #[test]
    fn age_outside_schedule_is_error() {
        let set = constant_wage_set(0.0, 45);
        let sched = CareerSchedule::default();
        assert!(matches!(salary_path(&set.path(0), &sched, 42), Err(Error::Schedule(_))));
        assert!(sched.career_rate(24).is_err());
    }

    #[test]
    fn ledger_growth() {
        let mut l = WealthLedger::new();
        l.contribute(0, 100.0);
        l.grow(0.10, 0.0).unwrap();
        assert!((l.total() - 110.0).abs() < 1e-12);
        l.set_alpha(0, 0.0).unwrap();
        l.grow(0.10, -0.05).unwrap();
        assert!((l.total() - 104.5).abs() < 1e-12);
        l.set_alpha(0, 0.5).unwrap();
        let before = l.total();
        l.grow(0.10, 0.0).unwrap();
        assert!((l.total() / before - 1.05).abs() < 1e-12);
    }

    #[test]
    fn ledger_rejects_bad_alpha_and_absorbed_risk() {
        let mut l = WealthLedger::new();
        l.contribute(0, 1.0);
        assert!(l.set_alpha(0, 1.5).is_err());
        l.absorb(0);
        assert_eq!(l.tranches()[0].alpha, 0.0);
        assert!(l.set_alpha(0, 0.2).is_err());
        assert!(l.set_alpha(0, 0.0).is_ok());
    }

    #[test]
    fn ledger_step_appends_after_growth() {
        let mut l = WealthLedger::new();
        l.step(0, 0.0, 0.0, 50.0).unwrap();
        l.step(1, 1.0, 0.0, 20.0).unwrap();
        assert_eq!(l.tranches().len(), 2);
        assert_eq!(l.tranches()[0].wealth, 100.0);
        assert_eq!(l.tranches()[1].wealth, 20.0);
        assert_eq!(l.total(), 120.0);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn shared_alpha_tranches_match_aggregate(
                alpha in 0.0f64..=1.0,
                x in -0.5f64..0.8,
                m in -0.4f64..0.6,
                amounts in prop::collection::vec(0.0f64..1e4, 1..12),
            ) {
                let mut l = WealthLedger::new();
                for (t, a) in amounts.iter().enumerate() {
                    l.contribute(t, *a);
                    l.set_alpha(t, alpha).unwrap();
                }
                let before = l.total();
                l.grow(x, m).unwrap();
                let blended = before * ((1.0 + x) * alpha + (1.0 + m) * (1.0 - alpha));
                prop_assert!((l.total() - blended).abs() <= 1e-9 * blended.abs().max(1.0));
            }

            #[test]
            fn nonnegative_returns_never_shrink(
                steps in prop::collection::vec((0.0f64..0.5, 0.0f64..0.5, 0.0f64..1e3, 0.0f64..=1.0), 1..30),
            ) {
                let mut l = WealthLedger::new();
                let mut prev = 0.0;
                for (t, (x, m, c, a)) in steps.into_iter().enumerate() {
                    l.step(t, x, m, c).unwrap();
                    prop_assert!(l.total() >= prev);
                    prev = l.total();
                    for i in 0..l.tranches().len() {
                        l.set_alpha(i, a).unwrap();
                    }
                }
            }
        }
    }
}
