//! Allocation rules: static mixes, glide paths and the target-based rules.
//!
//! An allocation `α` is the fraction of wealth held in the return (equity)
//! portfolio; the remainder sits in the matching portfolio.

use crate::career::WealthLedger;
use crate::error::{Error, Result};
use crate::market::post_retirement_factor;

/// Parameters of the wealth targets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TargetParams {
    /// Required real annual return before retirement.
    pub r: f64,
    /// Post-retirement discount rate used for `M̃_T`.
    pub delta: f64,
    /// Replacement ratio the investor aims for.
    pub target_rr: f64,
}

impl Default for TargetParams {
    fn default() -> Self {
        TargetParams {
            r: 0.025,
            delta: 0.025,
            target_rr: 0.70,
        }
    }
}

impl TargetParams {
    pub fn with_r(self, r: f64) -> Self {
        TargetParams { r, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.target_rr > 0.0 && self.target_rr < 2.0) {
            return Err(Error::param(format!(
                "target replacement ratio must lie in (0, 2), got {}",
                self.target_rr
            )));
        }
        if !(1.0 + self.r > 0.0) || !self.r.is_finite() {
            return Err(Error::param(format!("required return r={} is not usable", self.r)));
        }
        if !(1.0 + self.delta > 0.0) || !self.delta.is_finite() {
            return Err(Error::param(format!(
                "discount rate delta={} is not usable",
                self.delta
            )));
        }
        Ok(())
    }

    /// Market value at retirement of the pension per unit of target
    /// wealth, `M̃_T = Σ_{k=0}^{N-1} (1 + δ)^{-k}`.
    pub fn m_tilde(&self, payments: usize) -> Result<f64> {
        post_retirement_factor(self.delta, payments)
    }
}

/// Equity fraction per age.
#[derive(Debug, Clone, PartialEq)]
pub struct GlidePath {
    start_age: u32,
    fractions: Vec<f64>,
}

impl GlidePath {
    pub fn new(start_age: u32, fractions: Vec<f64>) -> Result<Self> {
        if fractions.is_empty() {
            return Err(Error::param("glide path needs at least one age"));
        }
        if let Some(f) = fractions.iter().find(|f| !(0.0..=1.0).contains(*f)) {
            return Err(Error::param(format!("glide path fraction {f} outside [0, 1]")));
        }
        Ok(GlidePath { start_age, fractions })
    }

    /// Straight line from `from` at `start_age` to `to` at `end_age`.
    pub fn linear(start_age: u32, end_age: u32, from: f64, to: f64) -> Result<Self> {
        if end_age <= start_age {
            return Err(Error::param("glide path must end after it starts"));
        }
        let span = (end_age - start_age) as f64;
        let fractions = (0..=end_age - start_age)
            .map(|i| from + (to - from) * i as f64 / span)
            .collect();
        Self::new(start_age, fractions)
    }

    pub fn start_age(&self) -> u32 {
        self.start_age
    }

    pub fn fractions(&self) -> &[f64] {
        &self.fractions
    }

    /// Fraction at `age`; ages outside the path use the nearest end.
    pub fn alpha(&self, age: u32) -> f64 {
        let i = age.saturating_sub(self.start_age) as usize;
        self.fractions[i.min(self.fractions.len() - 1)]
    }
}

/// Rules whose allocation depends on age only. Wealth is rebalanced to the
/// scheduled fraction every year.
#[derive(Debug, Clone, PartialEq)]
pub enum StaticRule {
    Constant(f64),
    /// 100% minus age in equity.
    Bogle,
    Glide(GlidePath),
}

impl StaticRule {
    pub fn validate(&self) -> Result<()> {
        match self {
            StaticRule::Constant(a) if !(0.0..=1.0).contains(a) => {
                Err(Error::param(format!("static mix {a} outside [0, 1]")))
            }
            _ => Ok(()),
        }
    }

    pub fn alpha(&self, age: u32) -> f64 {
        match self {
            StaticRule::Constant(a) => *a,
            StaticRule::Bogle => bogle_alpha(age),
            StaticRule::Glide(g) => g.alpha(age),
        }
    }
}

/// `1 - age / 100`, clamped to `[0, 1]`.
pub fn bogle_alpha(age: u32) -> f64 {
    (1.0 - age as f64 / 100.0).clamp(0.0, 1.0)
}

/// Expected value at `t` of the growth factor from `τ` to retirement:
/// realised `(1 + r + π)` over `(τ, t]`, then `(1 + r + I_t)` per remaining
/// year.
///
/// `inflation[k]` is `π_k`.
pub fn target_wealth_factor(
    inflation: &[f64],
    expected_inflation: f64,
    tau: usize,
    t: usize,
    retirement: usize,
    r: f64,
) -> Result<f64> {
    if tau > t || t > retirement {
        return Err(Error::domain(format!(
            "target factor needs tau <= t <= T, got tau={tau}, t={t}, T={retirement}"
        )));
    }
    let mut f = 1.0;
    for pi in &inflation[tau + 1..=t] {
        let g = 1.0 + r + pi;
        if g <= 0.0 {
            return Err(Error::domain(format!("growth factor 1 + r + pi = {g} is not positive")));
        }
        f *= g;
    }
    let g = 1.0 + r + expected_inflation;
    if g <= 0.0 {
        return Err(Error::domain(format!("growth factor 1 + r + I = {g} is not positive")));
    }
    Ok(f * g.powi((retirement - t) as i32))
}

/// Target wealth of the cumulative rule,
/// `W̃_t = (M_t / M̃_T) Σ_{τ<=t} c_τ E_t F_τ`.
#[allow(clippy::too_many_arguments)]
pub fn cumulative_target(
    contributions: &[f64],
    inflation: &[f64],
    expected_inflation: f64,
    t: usize,
    retirement: usize,
    r: f64,
    market_value: f64,
    m_tilde: f64,
) -> Result<f64> {
    if !(m_tilde > 0.0) {
        return Err(Error::domain("post-retirement factor must be positive"));
    }
    let mut sum = 0.0;
    for (tau, c) in contributions.iter().enumerate().take(t + 1) {
        sum += c * target_wealth_factor(inflation, expected_inflation, tau, t, retirement, r)?;
    }
    Ok(market_value / m_tilde * sum)
}

/// Allocation of the cumulative rule after the contribution of the year has
/// entered the return portfolio.
///
/// `previous` holds `(α_{t-1}, x_t, m_t)` for `t >= 1` and is `None` at
/// `t = 0`. Below target the return sleeve drifts buy-and-hold; at or above
/// target everything moves to the matching portfolio.
pub fn cumulative_step(wealth: f64, target: f64, previous: Option<(f64, f64, f64)>, contribution: f64) -> Result<f64> {
    if wealth >= target {
        return Ok(0.0);
    }
    let Some((alpha, x, m)) = previous else {
        return Ok(1.0);
    };
    if !(0.0..=1.0).contains(&alpha) {
        return Err(Error::domain(format!("previous allocation {alpha} outside [0, 1]")));
    }
    let growth = alpha * (1.0 + x) + (1.0 - alpha) * (1.0 + m);
    if growth <= 0.0 {
        return Err(Error::domain("portfolio wiped out: non-positive gross return"));
    }
    if wealth <= 0.0 {
        return Ok(1.0);
    }
    let carried = wealth - contribution;
    let risky = alpha * (1.0 + x) / growth * carried + contribution;
    Ok((risky / wealth).clamp(0.0, 1.0))
}

/// Applies the individual rule to every tranche: tranches at or above their
/// own target move to the matching portfolio for good, the others stay fully
/// in the return portfolio. Returns the aggregate allocation.
pub fn individual_step(ledger: &mut WealthLedger, targets: &[f64]) -> Result<f64> {
    if targets.len() != ledger.tranches().len() {
        return Err(Error::param(format!(
            "{} targets for {} tranches",
            targets.len(),
            ledger.tranches().len()
        )));
    }
    for (i, &target) in targets.iter().enumerate() {
        let tr = ledger.tranches()[i];
        if tr.absorbed {
            continue;
        }
        if tr.wealth >= target {
            ledger.absorb(i);
        } else {
            ledger.set_alpha(i, 1.0)?;
        }
    }
    Ok(ledger.aggregate_alpha())
}
