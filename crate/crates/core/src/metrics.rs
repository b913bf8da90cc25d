//! Replacement ratios, tail statistics and strategy reports.

use std::sync::Arc;

use rayon::prelude::*;

use crate::dp::{CombinationPolicy, DpConfig};
use crate::engine::{run_strategy, PathOutcome, StrategyKind};
use crate::error::{Error, Result};
use crate::panel::{indexed_wage_sum, PensionPanel};
use crate::scenario::{mean, neumaier_sum};
use crate::strategy::{StaticRule, TargetParams};

/// `RR_T = (W_T / M_T + B) (T + 1) / Σ_{t=0}^{T} s_t Π_{τ=t+1}^{T} (1 + π_τ)`
/// where `B` is the state pension paid alongside the annuity.
///
/// `salaries` holds `s_0..=s_T`; `inflation[t]` is `π_t`.
pub fn replacement_ratio(
    terminal_wealth: f64,
    market_value: f64,
    salaries: &[f64],
    inflation: &[f64],
    state_pension: f64,
) -> Result<f64> {
    if !(market_value > 0.0) {
        return Err(Error::domain(format!(
            "market value factor {market_value} is not positive"
        )));
    }
    if salaries.is_empty() || inflation.len() < salaries.len() {
        return Err(Error::param("salary and inflation series do not cover 0..=T"));
    }
    let denom = indexed_wage_sum(salaries, inflation);
    if !(denom > 0.0) {
        return Err(Error::domain("indexed salary sum is not positive"));
    }
    Ok((terminal_wealth / market_value + state_pension) * salaries.len() as f64 / denom)
}

/// `min(RR - target, 0)`.
pub fn shortfall(rr: f64, target: f64) -> f64 {
    (rr - target).min(0.0)
}

fn tail_count(n: usize, alpha: f64) -> Result<usize> {
    if n == 0 {
        return Err(Error::domain("tail statistic of an empty sample"));
    }
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("quantile level {alpha} outside (0, 1)")));
    }
    let raw = alpha * n as f64;
    // guard against products such as 0.1 * 30 = 3.0000000000000004
    let k = if (raw - raw.round()).abs() < 1e-9 {
        raw.round()
    } else {
        raw.ceil()
    };
    Ok((k as usize).clamp(1, n))
}

fn sorted(samples: &[f64]) -> Vec<f64> {
    let mut v = samples.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

/// Empirical `α`-quantile: the `ceil(α n)`-th smallest sample.
pub fn value_at_risk(samples: &[f64], alpha: f64) -> Result<f64> {
    let k = tail_count(samples.len(), alpha)?;
    Ok(sorted(samples)[k - 1])
}

/// Mean of the `ceil(α n)` smallest samples.
pub fn cvar(samples: &[f64], alpha: f64) -> Result<f64> {
    let k = tail_count(samples.len(), alpha)?;
    Ok(mean(&sorted(samples)[..k]))
}

pub fn median(samples: &[f64]) -> Result<f64> {
    if samples.is_empty() {
        return Err(Error::domain("median of an empty sample"));
    }
    let v = sorted(samples);
    let n = v.len();
    Ok(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

fn sample_std(xs: &[f64]) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let m = mean(xs);
    (neumaier_sum(xs.iter().map(|x| (x - m) * (x - m))) / (xs.len() - 1) as f64).sqrt()
}

/// Forward-looking quantities at `t` on one path, under the expected
/// inflation `I_t` and the career schedule.
struct Outlook<'a> {
    panel: &'a PensionPanel,
    p: usize,
    t: usize,
    expected: f64,
}

impl<'a> Outlook<'a> {
    fn new(panel: &'a PensionPanel, p: usize, t: usize) -> Result<Self> {
        if t > panel.retirement() {
            return Err(Error::domain(format!("t={t} after retirement")));
        }
        Ok(Outlook {
            panel,
            p,
            t,
            expected: panel.expected_inflation(p, t),
        })
    }

    /// Expected salaries and contributions for `k = t+1..=T`.
    fn projected(&self) -> Result<Vec<(f64, f64)>> {
        let panel = self.panel;
        let sched = panel.schedule();
        let wage_growth = 1.0 + self.expected + sched.wage_spread;
        let mut s = panel.salary(self.p, self.t);
        let mut f = panel.franchise(self.p, self.t);
        let mut out = Vec::with_capacity(panel.retirement() - self.t);
        for k in self.t + 1..=panel.retirement() {
            let age = sched.age_at(k);
            s *= (1.0 + sched.career_rate(age)?) * wage_growth;
            f *= wage_growth;
            out.push((s, sched.contribution_rate(age)? * (s - f).max(0.0)));
        }
        Ok(out)
    }

    /// `E_t[Σ_{j=0}^{T} s_j Π_{τ=j+1}^{T}(1 + π_τ)]`.
    fn indexed_wages(&self, projected: &[(f64, f64)]) -> Result<f64> {
        let panel = self.panel;
        let tt = panel.retirement();
        let realised = indexed_wage_sum(
            &panel.salaries(self.p)[..=self.t],
            &panel.inflation_path(self.p)[..=self.t],
        );
        let g = 1.0 + self.expected;
        if g <= 0.0 {
            return Err(Error::domain("expected inflation at or below -100%"));
        }
        let mut total = realised * g.powi((tt - self.t) as i32);
        for (i, (s, _)) in projected.iter().enumerate() {
            let k = self.t + 1 + i;
            total += s * g.powi((tt - k) as i32);
        }
        if !(total > 0.0) {
            return Err(Error::domain("expected indexed salary sum is not positive"));
        }
        Ok(total)
    }

    /// `E_t[B]`: the franchise grown at expected wage inflation.
    fn state_pension(&self) -> f64 {
        let panel = self.panel;
        let sched = panel.schedule();
        let g = 1.0 + self.expected + sched.wage_spread;
        sched.state_pension * panel.franchise(self.p, self.t) * g.powi((panel.retirement() - self.t) as i32)
    }

    /// `Σ_{k=t+1}^{T} (1 + r + I_t)^{T-k} E_t[c_k]`.
    fn future_contributions(&self, projected: &[(f64, f64)], r: f64) -> Result<f64> {
        let tt = self.panel.retirement();
        let g = 1.0 + r + self.expected;
        if g <= 0.0 {
            return Err(Error::domain(format!("1 + r + I = {g} is not positive")));
        }
        Ok(projected
            .iter()
            .enumerate()
            .map(|(i, (_, c))| c * g.powi((tt - self.t - 1 - i) as i32))
            .sum())
    }
}

/// `E[W_T | F_t]` given `W_t` and the assumed annual real return `r`.
pub fn expected_terminal_wealth(panel: &PensionPanel, p: usize, t: usize, wealth: f64, r: f64) -> Result<f64> {
    let o = Outlook::new(panel, p, t)?;
    let projected = o.projected()?;
    let g = 1.0 + r + o.expected;
    if g <= 0.0 {
        return Err(Error::domain(format!("1 + r + I = {g} is not positive")));
    }
    Ok(g.powi((panel.retirement() - t) as i32) * wealth + o.future_contributions(&projected, r)?)
}

/// Expected replacement ratio `R_t`; equals the realised ratio at `t = T`.
pub fn expected_replacement_ratio(panel: &PensionPanel, p: usize, t: usize, wealth: f64, r: f64) -> Result<f64> {
    let o = Outlook::new(panel, p, t)?;
    let projected = o.projected()?;
    let g = 1.0 + r + o.expected;
    if g <= 0.0 {
        return Err(Error::domain(format!("1 + r + I = {g} is not positive")));
    }
    let terminal = g.powi((panel.retirement() - t) as i32) * wealth + o.future_contributions(&projected, r)?;
    let m = panel.expected_terminal_market_value(p, t);
    if !(m > 0.0) {
        return Err(Error::Estimator(format!("E[M_T | F_t] = {m} on path {p} at t={t}")));
    }
    let pension = terminal / m + o.state_pension();
    Ok(pension * (panel.retirement() + 1) as f64 / o.indexed_wages(&projected)?)
}

/// Target replacement ratio `R*(t)` implied by the target wealth `W̃_t`.
pub fn target_replacement_ratio(
    panel: &PensionPanel,
    p: usize,
    t: usize,
    target_wealth: f64,
    params: &TargetParams,
) -> Result<f64> {
    let o = Outlook::new(panel, p, t)?;
    let projected = o.projected()?;
    let m_tilde = params.m_tilde(panel.annuity().payments)?;
    let pension = target_wealth / panel.market_value(p, t)
        + o.future_contributions(&projected, params.r)? / m_tilde
        + o.state_pension();
    Ok(pension * (panel.retirement() + 1) as f64 / o.indexed_wages(&projected)?)
}

/// Statistics of the terminal replacement ratio of one strategy.
#[derive(Debug, Clone, PartialEq)]
pub struct EvaluationReport {
    pub strategy: String,
    pub mean: f64,
    pub median: f64,
    pub var5: f64,
    pub var10: f64,
    pub cvar5: f64,
    pub cvar10: f64,
    /// Mean shortfall below target, as a positive number.
    pub shortage: f64,
    /// Share of paths at or above target.
    pub goal_reached: f64,
    /// Mean of `|R_{T-5} - RR_T|`.
    pub est_err_mean: f64,
    /// Standard deviation of `R_{T-5} - RR_T`.
    pub est_err_std: f64,
}

pub const REPORT_HEADER: &str =
    "strategy,mean,median,var5,var10,cvar5,cvar10,shortage,goal_reached,est_err_mean,est_err_std";

impl EvaluationReport {
    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{},{},{}",
            self.strategy,
            self.mean,
            self.median,
            self.var5,
            self.var10,
            self.cvar5,
            self.cvar10,
            self.shortage,
            self.goal_reached,
            self.est_err_mean,
            self.est_err_std
        )
    }
}

/// Report as CSV text, one row per strategy.
pub fn reports_to_csv(reports: &[EvaluationReport]) -> String {
    let mut s = String::from(REPORT_HEADER);
    s.push('\n');
    for r in reports {
        s.push_str(&r.csv_row());
        s.push('\n');
    }
    s
}

/// Evaluation settings shared by all strategies.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EvalOptions {
    pub target_rr: f64,
    /// Annual real return assumed by `R_t` for strategies without their own `r`.
    pub expected_return: f64,
    /// Years before retirement at which the estimation error is measured.
    pub lead: usize,
}

impl Default for EvalOptions {
    fn default() -> Self {
        EvalOptions {
            target_rr: 0.70,
            expected_return: 0.025,
            lead: 5,
        }
    }
}

/// Terminal replacement ratio per path.
pub fn replacement_ratios(panel: &PensionPanel, outcomes: &[PathOutcome]) -> Result<Vec<f64>> {
    let tt = panel.retirement();
    outcomes
        .iter()
        .enumerate()
        .map(|(p, o)| {
            replacement_ratio(
                o.terminal_wealth(),
                panel.market_value(p, tt),
                panel.salaries(p),
                panel.inflation_path(p),
                panel.state_pension(p),
            )
        })
        .collect()
}

/// Table of statistics from simulated trajectories.
pub fn evaluate_outcomes(
    panel: &PensionPanel,
    outcomes: &[PathOutcome],
    label: &str,
    expected_return: f64,
    options: &EvalOptions,
) -> Result<EvaluationReport> {
    if outcomes.len() != panel.n_paths() {
        return Err(Error::param("one trajectory per path required"));
    }
    let tt = panel.retirement();
    let rr = replacement_ratios(panel, outcomes)?;
    let t_est = tt.saturating_sub(options.lead);
    let diffs = outcomes
        .par_iter()
        .enumerate()
        .map(|(p, o)| Ok(expected_replacement_ratio(panel, p, t_est, o.wealth[t_est], expected_return)? - rr[p]))
        .collect::<Result<Vec<f64>>>()?;
    let shortfalls: Vec<f64> = rr.iter().map(|&x| -shortfall(x, options.target_rr)).collect();
    let reached = rr.iter().filter(|&&x| x >= options.target_rr).count();
    let abs: Vec<f64> = diffs.iter().map(|d| d.abs()).collect();
    Ok(EvaluationReport {
        strategy: label.to_string(),
        mean: mean(&rr),
        median: median(&rr)?,
        var5: value_at_risk(&rr, 0.05)?,
        var10: value_at_risk(&rr, 0.10)?,
        cvar5: cvar(&rr, 0.05)?,
        cvar10: cvar(&rr, 0.10)?,
        shortage: mean(&shortfalls),
        goal_reached: reached as f64 / rr.len() as f64,
        est_err_mean: mean(&abs),
        est_err_std: sample_std(&diffs),
    })
}

/// Runs `strategy` on every path and summarises the outcome.
pub fn evaluate_strategy(
    panel: &PensionPanel,
    strategy: &StrategyKind,
    label: &str,
    options: &EvalOptions,
) -> Result<EvaluationReport> {
    let outcomes = run_strategy(panel, strategy)?;
    let r = strategy.target_params().map_or(options.expected_return, |p| p.r);
    evaluate_outcomes(panel, &outcomes, label, r, options)
}

/// Mean shortfall (positive) and 10% CVaR of the replacement ratio.
fn shortfall_and_cvar(panel: &PensionPanel, strategy: &StrategyKind, target_rr: f64) -> Result<(f64, f64)> {
    let rr = replacement_ratios(panel, &run_strategy(panel, strategy)?)?;
    let s: Vec<f64> = rr.iter().map(|&x| -shortfall(x, target_rr)).collect();
    Ok((mean(&s), cvar(&rr, 0.10)?))
}

/// Strategy families swept by [`frontier`].
#[derive(Debug, Clone, PartialEq)]
pub enum FrontierFamily {
    /// Constant mixes; the parameter is the equity fraction.
    Static,
    /// Parameter is the required return `r`.
    Cumulative(TargetParams),
    Individual(TargetParams),
    Combination(TargetParams, DpConfig),
}

impl FrontierFamily {
    pub fn name(&self) -> &'static str {
        match self {
            FrontierFamily::Static => "static",
            FrontierFamily::Cumulative(_) => "cumulative",
            FrontierFamily::Individual(_) => "individual",
            FrontierFamily::Combination(..) => "combination",
        }
    }

    pub fn strategy(&self, panel: &PensionPanel, param: f64) -> Result<StrategyKind> {
        Ok(match self {
            FrontierFamily::Static => StrategyKind::Static(StaticRule::Constant(param)),
            FrontierFamily::Cumulative(p) => StrategyKind::Cumulative(p.with_r(param)),
            FrontierFamily::Individual(p) => StrategyKind::Individual(p.with_r(param)),
            FrontierFamily::Combination(p, cfg) => {
                StrategyKind::Combination(Arc::new(CombinationPolicy::solve(panel, &p.with_r(param), cfg)?))
            }
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FrontierRow {
    pub family: String,
    pub param: f64,
    pub shortfall: f64,
    pub cvar10: f64,
}

pub const FRONTIER_HEADER: &str = "family,param,shortfall,cvar10";

pub fn frontier_to_csv(rows: &[FrontierRow]) -> String {
    let mut s = String::from(FRONTIER_HEADER);
    s.push('\n');
    for r in rows {
        s.push_str(&format!("{},{},{},{}\n", r.family, r.param, r.shortfall, r.cvar10));
    }
    s
}

/// Mean shortfall and 10% CVaR for each parameter value, sorted by
/// parameter.
pub fn frontier(
    panel: &PensionPanel,
    family: &FrontierFamily,
    grid: &[f64],
    target_rr: f64,
) -> Result<Vec<FrontierRow>> {
    if grid.is_empty() {
        return Err(Error::param("frontier grid is empty"));
    }
    let mut params = grid.to_vec();
    params.sort_by(f64::total_cmp);
    params
        .iter()
        .map(|&param| {
            let (shortfall, cvar10) = shortfall_and_cvar(panel, &family.strategy(panel, param)?, target_rr)?;
            Ok(FrontierRow {
                family: family.name().to_string(),
                param,
                shortfall,
                cvar10,
            })
        })
        .collect()
}

/// Row with the smallest shortfall; ties go to the smaller parameter.
pub fn best_row(rows: &[FrontierRow]) -> Option<&FrontierRow> {
    let mut best: Option<&FrontierRow> = None;
    for row in rows {
        best = match best {
            Some(b) if row.shortfall > b.shortfall => Some(b),
            Some(b) if row.shortfall == b.shortfall && row.param >= b.param => Some(b),
            _ => Some(row),
        };
    }
    best
}

/// Constant mix minimising the mean shortfall; ties go to the smaller mix.
pub fn optimize_static_mix(panel: &PensionPanel, grid: &[f64], target_rr: f64) -> Result<f64> {
    if let Some(a) = grid.iter().find(|a| !(0.0..=1.0).contains(*a)) {
        return Err(Error::param(format!("static mix {a} outside [0, 1]")));
    }
    let rows = frontier(panel, &FrontierFamily::Static, grid, target_rr)?;
    Ok(best_row(&rows).expect("non-empty grid").param)
}
