//! Runs allocation strategies through the accumulation phase.
//!
//! Every year `t` first applies the returns `(x_t, m_t)` to the holdings
//! chosen at `t - 1`, then adds the contribution `c_t` to the return
//! portfolio, then picks the allocation `α_t`. Terminal wealth `W_T`
//! includes `c_T`.

use std::sync::Arc;

use rayon::prelude::*;

use crate::career::WealthLedger;
use crate::dp::CombinationPolicy;
use crate::error::{Error, Result};
use crate::panel::PensionPanel;
use crate::strategy::{individual_step, StaticRule, TargetParams};

#[derive(Debug, Clone, PartialEq)]
pub enum StrategyKind {
    Static(StaticRule),
    /// One target for the whole portfolio.
    Cumulative(TargetParams),
    /// One target per contribution.
    Individual(TargetParams),
    /// Per-contribution decisions from a solved dynamic program.
    Combination(Arc<CombinationPolicy>),
}

impl StrategyKind {
    pub fn validate(&self) -> Result<()> {
        match self {
            StrategyKind::Static(rule) => rule.validate(),
            StrategyKind::Cumulative(p) | StrategyKind::Individual(p) => p.validate(),
            StrategyKind::Combination(policy) => policy.params().validate(),
        }
    }

    /// Target parameters of the target-based strategies.
    pub fn target_params(&self) -> Option<&TargetParams> {
        match self {
            StrategyKind::Static(_) => None,
            StrategyKind::Cumulative(p) | StrategyKind::Individual(p) => Some(p),
            StrategyKind::Combination(policy) => Some(policy.params()),
        }
    }
}

/// Trajectory of one path.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct PathOutcome {
    /// `W_t` after the contribution of year `t`, for `t = 0..=T`.
    pub wealth: Vec<f64>,
    /// Aggregate allocation `α_t` for `t = 0..T`.
    pub alpha: Vec<f64>,
    /// Target wealth `W̃_t` for `t = 0..=T`; empty for static rules.
    pub target: Vec<f64>,
    /// Per-tranche allocations from the contribution year up to `T - 1`,
    /// recorded on request for tranche-based strategies.
    pub tranche_alpha: Vec<Vec<f64>>,
}

impl PathOutcome {
    pub fn terminal_wealth(&self) -> f64 {
        *self.wealth.last().expect("non-empty trajectory")
    }
}

struct TargetTracker {
    r: f64,
    m_tilde: f64,
}

impl TargetTracker {
    fn new(params: &TargetParams, panel: &PensionPanel) -> Result<Self> {
        Ok(TargetTracker {
            r: params.r,
            m_tilde: params.m_tilde(panel.annuity().payments)?,
        })
    }

    /// `1 + r + π_t`.
    fn realised(&self, panel: &PensionPanel, p: usize, t: usize) -> Result<f64> {
        let g = 1.0 + self.r + panel.inflation(p, t);
        if g <= 0.0 {
            return Err(Error::domain(format!("1 + r + pi = {g} on path {p} at t={t}")));
        }
        Ok(g)
    }

    /// `(M_t / M̃_T) (1 + r + I_t)^{T-t}`: converts accumulated contributions
    /// into target wealth.
    fn scale(&self, panel: &PensionPanel, p: usize, t: usize) -> Result<f64> {
        let g = 1.0 + self.r + panel.expected_inflation(p, t);
        if g <= 0.0 {
            return Err(Error::domain(format!("1 + r + I = {g} on path {p} at t={t}")));
        }
        Ok(panel.market_value(p, t) / self.m_tilde * g.powi((panel.retirement() - t) as i32))
    }
}

fn run_static(panel: &PensionPanel, p: usize, rule: &StaticRule) -> Result<PathOutcome> {
    let tt = panel.retirement();
    let mut out = PathOutcome::default();
    let mut w = panel.contribution(p, 0);
    out.wealth.push(w);
    for t in 0..tt {
        let a = rule.alpha(panel.schedule().age_at(t));
        out.alpha.push(a);
        let g = a * (1.0 + panel.equity_return(p, t + 1)) + (1.0 - a) * (1.0 + panel.matching_return(p, t + 1));
        w = w * g + panel.contribution(p, t + 1);
        out.wealth.push(w);
    }
    Ok(out)
}

fn run_cumulative(panel: &PensionPanel, p: usize, params: &TargetParams) -> Result<PathOutcome> {
    let tt = panel.retirement();
    let tracker = TargetTracker::new(params, panel)?;
    let mut out = PathOutcome::default();
    let (mut risky, mut matching, mut accumulated) = (0.0, 0.0, 0.0);
    for t in 0..=tt {
        if t > 0 {
            risky *= 1.0 + panel.equity_return(p, t);
            matching *= 1.0 + panel.matching_return(p, t);
            accumulated *= tracker.realised(panel, p, t)?;
        }
        let c = panel.contribution(p, t);
        risky += c;
        accumulated += c;
        let w = risky + matching;
        let target = accumulated * tracker.scale(panel, p, t)?;
        out.wealth.push(w);
        out.target.push(target);
        if t == tt {
            break;
        }
        if w >= target {
            matching += risky;
            risky = 0.0;
        }
        out.alpha.push(if w > 0.0 { risky / w } else { 1.0 });
    }
    Ok(out)
}

enum TrancheRule<'a> {
    Individual,
    Combination(&'a CombinationPolicy),
}

fn run_tranches(
    panel: &PensionPanel,
    p: usize,
    params: &TargetParams,
    rule: TrancheRule<'_>,
    trace: bool,
) -> Result<PathOutcome> {
    let tt = panel.retirement();
    let tracker = TargetTracker::new(params, panel)?;
    let mut out = PathOutcome::default();
    let mut ledger = WealthLedger::new();
    // realised growth Π_{τ+1}^{t} (1 + r + π) per tranche
    let mut grown: Vec<f64> = Vec::with_capacity(tt + 1);
    let mut targets = Vec::with_capacity(tt + 1);
    for t in 0..=tt {
        if t > 0 {
            ledger.grow(panel.equity_return(p, t), panel.matching_return(p, t))?;
            let g = tracker.realised(panel, p, t)?;
            grown.iter_mut().for_each(|f| *f *= g);
        }
        ledger.contribute(t, panel.contribution(p, t));
        grown.push(1.0);
        let scale = tracker.scale(panel, p, t)?;
        targets.clear();
        targets.extend(
            ledger
                .tranches()
                .iter()
                .zip(&grown)
                .map(|(tr, f)| scale * tr.contribution * f),
        );
        out.wealth.push(ledger.total());
        out.target.push(targets.iter().sum());
        if t == tt {
            break;
        }
        let alpha = match rule {
            TrancheRule::Individual => individual_step(&mut ledger, &targets)?,
            TrancheRule::Combination(policy) => {
                for (i, &target) in targets.iter().enumerate() {
                    let tr = ledger.tranches()[i];
                    let a = if target > 0.0 && tr.wealth > 0.0 {
                        policy.decide(tr.start, t, tr.wealth / target)?
                    } else {
                        0.0
                    };
                    ledger.set_alpha(i, a)?;
                }
                ledger.aggregate_alpha()
            }
        };
        out.alpha.push(alpha);
        if trace {
            out.tranche_alpha.push(Vec::new());
            for (seq, tr) in out.tranche_alpha.iter_mut().zip(ledger.tranches()) {
                seq.push(tr.alpha);
            }
        }
    }
    Ok(out)
}

/// Runs `strategy` on path `p`. With `trace_tranches`, per-tranche
/// allocations are recorded for the tranche-based strategies.
pub fn run_path(panel: &PensionPanel, p: usize, strategy: &StrategyKind, trace_tranches: bool) -> Result<PathOutcome> {
    match strategy {
        StrategyKind::Static(rule) => run_static(panel, p, rule),
        StrategyKind::Cumulative(params) => run_cumulative(panel, p, params),
        StrategyKind::Individual(params) => run_tranches(panel, p, params, TrancheRule::Individual, trace_tranches),
        StrategyKind::Combination(policy) => run_tranches(
            panel,
            p,
            policy.params(),
            TrancheRule::Combination(policy),
            trace_tranches,
        ),
    }
}

/// Runs `strategy` on every path in parallel.
pub fn run_strategy(panel: &PensionPanel, strategy: &StrategyKind) -> Result<Vec<PathOutcome>> {
    strategy.validate()?;
    (0..panel.n_paths())
        .into_par_iter()
        .map(|p| run_path(panel, p, strategy, false))
        .collect()
}
