//! The combination strategy: a dynamic program over the wealth-to-target
//! ratio `Z`, solved by least-squares Monte Carlo with LOESS regressions.
//!
//! For one contribution made at `τ`, `Z_t = W_{t,τ} / W̃_{t,τ}` evolves as
//!
//! ```text
//! Z_{t+1} = Z_t [(1 + x) α + (1 + m)(1 - α)] / [ρ_{t+1} (1 + m)]
//! ```
//!
//! where `ρ_{t+1} = E_{t+1} F_τ / E_t F_τ` does not depend on `τ`. The
//! terminal ratio is scored with a concave utility peaking at `z_max`.
//!
//! [`PolicyModel::solve`] runs the snake-pattern iteration: each decision
//! time is fitted with the stored decisions of later times held fixed, and
//! later times are refitted forward after every earlier one changes.

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::panel::PensionPanel;
use crate::regression::{fit_surfaces, LoessSurface};
use crate::strategy::TargetParams;

/// How contributions share decision rules.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DpMode {
    /// One program per contribution year.
    PerContribution,
    /// The program of the first contribution, reused for every tranche.
    Shared,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DpConfig {
    /// Admissible allocations, ascending in `[0, 1]`.
    pub grid: Vec<f64>,
    pub z_min: f64,
    pub z_max: f64,
    pub iterations: usize,
    pub span: f64,
    pub degree: usize,
    pub mode: DpMode,
    /// Exact LOESS evaluations per fit; 0 evaluates at every training point.
    pub surface_vertices: usize,
}

impl Default for DpConfig {
    fn default() -> Self {
        DpConfig {
            grid: vec![0.0, 0.2, 0.4, 0.6, 0.8, 1.0],
            z_min: 1.0,
            z_max: 3.0,
            iterations: 2,
            span: 0.2,
            degree: 1,
            mode: DpMode::PerContribution,
            surface_vertices: 64,
        }
    }
}

impl DpConfig {
    pub fn validate(&self) -> Result<()> {
        if self.grid.is_empty() {
            return Err(Error::param("allocation grid is empty"));
        }
        if self.grid.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(Error::param("allocation grid values must lie in [0, 1]"));
        }
        if self.grid.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::param("allocation grid must be strictly increasing"));
        }
        if !(self.z_min > 0.0 && self.z_min < self.z_max && self.z_max.is_finite()) {
            return Err(Error::param(format!(
                "utility bounds need 0 < z_min < z_max, got {} and {}",
                self.z_min, self.z_max
            )));
        }
        if self.iterations < 1 {
            return Err(Error::param("dp iterations must be at least 1"));
        }
        if !(self.span > 0.0 && self.span <= 1.0) {
            return Err(Error::param(format!(
                "loess span must lie in (0, 1], got {}",
                self.span
            )));
        }
        if !(1..=2).contains(&self.degree) {
            return Err(Error::param(format!(
                "loess degree must be 1 or 2, got {}",
                self.degree
            )));
        }
        Ok(())
    }

    /// `β = sqrt(2 z_max² - z_min²)`.
    pub fn beta(&self) -> f64 {
        utility_beta(self.z_min, self.z_max)
    }
}

fn utility_beta(z_min: f64, z_max: f64) -> f64 {
    (2.0 * z_max * z_max - z_min * z_min).sqrt()
}

#[inline]
fn utility_raw(z: f64, beta: f64, z_min: f64) -> f64 {
    (-(z - beta).powi(2) - (z - z_min).powi(2)) / z
}

/// Terminal utility `[-(z - β)² - (z - z_min)²] / z`.
pub fn utility(z: f64, z_min: f64, z_max: f64) -> Result<f64> {
    if !(z > 0.0) {
        return Err(Error::domain(format!("utility needs a positive ratio, got {z}")));
    }
    Ok(utility_raw(z, utility_beta(z_min, z_max), z_min))
}

/// One-year update of the wealth-to-target ratio.
pub fn z_step(z: f64, alpha: f64, x: f64, m: f64, expectation_ratio: f64) -> Result<f64> {
    if !(z > 0.0) || !(0.0..=1.0).contains(&alpha) || !(expectation_ratio > 0.0) {
        return Err(Error::domain(format!(
            "z_step needs z > 0, alpha in [0, 1] and a positive ratio (z={z}, alpha={alpha}, ratio={expectation_ratio})"
        )));
    }
    let denom = expectation_ratio * (1.0 + m);
    if denom <= 0.0 {
        return Err(Error::domain("matching portfolio wiped out"));
    }
    Ok(z * ((1.0 + x) * alpha + (1.0 + m) * (1.0 - alpha)) / denom)
}

/// Cross-section of ratio dynamics for one contribution.
///
/// Step `i` covers `(start + i, start + i + 1]`; with allocation `a` the
/// ratio is multiplied by `a · equity + (1 - a) · matching`.
#[derive(Debug, Clone, PartialEq)]
pub struct DpProblem {
    start: usize,
    n_paths: usize,
    steps: usize,
    initial: Vec<f64>,
    equity: Vec<f64>,
    matching: Vec<f64>,
}

impl DpProblem {
    /// `equity[i][p]` and `matching[i][p]` are the ratio growth factors of
    /// step `i` on path `p` under full and zero equity.
    pub fn new(start: usize, initial: Vec<f64>, equity: Vec<Vec<f64>>, matching: Vec<Vec<f64>>) -> Result<Self> {
        let n_paths = initial.len();
        let steps = equity.len();
        if n_paths == 0 || steps == 0 {
            return Err(Error::param("dp problem needs at least one path and one step"));
        }
        if matching.len() != steps || equity.iter().chain(&matching).any(|v| v.len() != n_paths) {
            return Err(Error::param("dp growth factors are ragged"));
        }
        let all = initial
            .iter()
            .chain(equity.iter().flatten())
            .chain(matching.iter().flatten());
        if all.clone().any(|v| !(*v > 0.0 && v.is_finite())) {
            return Err(Error::domain("dp ratios and growth factors must be positive"));
        }
        Ok(DpProblem {
            start,
            n_paths,
            steps,
            initial,
            equity: equity.concat(),
            matching: matching.concat(),
        })
    }

    /// Problem of the contribution made at `tau` on a panel.
    pub fn for_contribution(panel: &PensionPanel, params: &TargetParams, tau: usize) -> Result<Self> {
        let tt = panel.retirement();
        if tau >= tt {
            return Err(Error::domain(format!(
                "no decisions left for a contribution at tau={tau}"
            )));
        }
        let m_tilde = params.m_tilde(panel.annuity().payments)?;
        let r = params.r;
        let n = panel.n_paths();
        let grow = |p: usize, t: usize| -> Result<f64> {
            let g = 1.0 + r + panel.expected_inflation(p, t);
            if g <= 0.0 {
                return Err(Error::domain(format!("1 + r + I = {g} on path {p} at t={t}")));
            }
            Ok(g)
        };
        let mut initial = Vec::with_capacity(n);
        for p in 0..n {
            let target = panel.market_value(p, tau) * grow(p, tau)?.powi((tt - tau) as i32);
            initial.push(m_tilde / target);
        }
        let mut equity = Vec::with_capacity(tt - tau);
        let mut matching = Vec::with_capacity(tt - tau);
        for t in tau..tt {
            let mut e = Vec::with_capacity(n);
            let mut mm = Vec::with_capacity(n);
            for p in 0..n {
                let realised = 1.0 + r + panel.inflation(p, t + 1);
                if realised <= 0.0 {
                    return Err(Error::domain(format!(
                        "1 + r + pi = {realised} on path {p} at t={}",
                        t + 1
                    )));
                }
                let rho = realised * grow(p, t + 1)?.powi((tt - t - 1) as i32) / grow(p, t)?.powi((tt - t) as i32);
                let m = panel.matching_return(p, t + 1);
                let x = panel.equity_return(p, t + 1);
                e.push((1.0 + x) / (rho * (1.0 + m)));
                mm.push(1.0 / rho);
            }
            equity.push(e);
            matching.push(mm);
        }
        Self::new(tau, initial, equity, matching)
    }

    pub fn start(&self) -> usize {
        self.start
    }

    pub fn steps(&self) -> usize {
        self.steps
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    pub fn initial(&self) -> &[f64] {
        &self.initial
    }

    #[inline]
    fn growth(&self, step: usize, p: usize, a: f64) -> f64 {
        let i = step * self.n_paths + p;
        a * self.equity[i] + (1.0 - a) * self.matching[i]
    }
}

/// Fitted decision rules of one contribution's program.
#[derive(Debug, Clone, PartialEq)]
pub struct PolicyModel {
    start: usize,
    grid: Vec<f64>,
    surfaces: Vec<Vec<LoessSurface>>,
    decisions: Vec<Vec<usize>>,
    trace: Vec<f64>,
    initial_utility: f64,
}

struct Solver<'a> {
    problem: &'a DpProblem,
    cfg: &'a DpConfig,
    beta: f64,
    degree: usize,
    decisions: Vec<Vec<usize>>,
    states: Vec<Vec<f64>>,
    surfaces: Vec<Vec<LoessSurface>>,
}

impl Solver<'_> {
    fn propagate(&mut self, from: usize) {
        let pr = self.problem;
        for i in from..pr.steps {
            for p in 0..pr.n_paths {
                let a = self.cfg.grid[self.decisions[i][p]];
                self.states[i + 1][p] = self.states[i][p] * pr.growth(i, p, a);
            }
        }
    }

    fn mean_terminal_utility(&self) -> f64 {
        let last = &self.states[self.problem.steps];
        let total: f64 = last.iter().map(|&z| utility_raw(z, self.beta, self.cfg.z_min)).sum();
        total / last.len() as f64
    }

    fn fit(&mut self, i: usize) -> Result<()> {
        let pr = self.problem;
        let grid = &self.cfg.grid;
        let mut cont = vec![1.0; pr.n_paths];
        for j in i + 1..pr.steps {
            for (p, c) in cont.iter_mut().enumerate() {
                *c *= pr.growth(j, p, grid[self.decisions[j][p]]);
            }
        }
        let xs = &self.states[i];
        let responses: Vec<Vec<f64>> = grid
            .iter()
            .map(|&a| {
                (0..pr.n_paths)
                    .map(|p| utility_raw(xs[p] * pr.growth(i, p, a) * cont[p], self.beta, self.cfg.z_min))
                    .collect()
            })
            .collect();
        let surfaces = fit_surfaces(xs, &responses, self.cfg.span, self.degree, self.cfg.surface_vertices)?;
        for p in 0..pr.n_paths {
            self.decisions[i][p] = best(&surfaces, xs[p]);
        }
        self.surfaces[i] = surfaces;
        self.propagate(i);
        Ok(())
    }
}

/// Index of the largest fitted value; ties go to the smaller allocation.
fn best(surfaces: &[LoessSurface], z: f64) -> usize {
    let mut arg = 0;
    let mut top = f64::NEG_INFINITY;
    for (j, s) in surfaces.iter().enumerate() {
        let v = s.eval(z);
        if v > top {
            top = v;
            arg = j;
        }
    }
    arg
}

impl PolicyModel {
    pub fn solve(problem: &DpProblem, cfg: &DpConfig) -> Result<Self> {
        cfg.validate()?;
        let n = problem.steps;
        let np = problem.n_paths;
        let mut solver = Solver {
            problem,
            cfg,
            beta: cfg.beta(),
            degree: cfg.degree.min(np - 1),
            decisions: vec![vec![0; np]; n],
            states: vec![vec![0.0; np]; n + 1],
            surfaces: vec![Vec::new(); n],
        };
        solver.states[0].copy_from_slice(&problem.initial);
        solver.propagate(0);
        let initial_utility = solver.mean_terminal_utility();

        let mut trace = Vec::with_capacity(cfg.iterations);
        for _ in 0..cfg.iterations {
            solver.fit(n - 1)?;
            for i in (0..n - 1).rev() {
                // the latest time was just refitted on unchanged data
                for j in (i + 1..n - 1).rev() {
                    solver.fit(j)?;
                }
                solver.fit(i)?;
                for j in i + 1..n {
                    solver.fit(j)?;
                }
            }
            let u = solver.mean_terminal_utility();
            if !u.is_finite() {
                return Err(Error::Estimator("mean terminal utility is not finite".into()));
            }
            trace.push(u);
        }
        Ok(PolicyModel {
            start: problem.start,
            grid: cfg.grid.clone(),
            surfaces: solver.surfaces,
            decisions: solver.decisions,
            trace,
            initial_utility,
        })
    }

    /// First decision time.
    pub fn start(&self) -> usize {
        self.start
    }

    pub fn steps(&self) -> usize {
        self.surfaces.len()
    }

    pub fn grid(&self) -> &[f64] {
        &self.grid
    }

    /// In-sample mean terminal utility after each iteration.
    pub fn trace(&self) -> &[f64] {
        &self.trace
    }

    /// Mean terminal utility of the initial all-lowest-allocation policy.
    pub fn initial_utility(&self) -> f64 {
        self.initial_utility
    }

    /// Stored grid indices per path at decision time `start + step`.
    pub fn decisions(&self, step: usize) -> &[usize] {
        &self.decisions[step]
    }

    /// Fitted expected utility of allocation `j` at time `t` and ratio `z`.
    pub fn expected_utility(&self, t: usize, j: usize, z: f64) -> f64 {
        self.surfaces[t - self.start][j].eval(z)
    }

    /// Allocation at absolute time `t` for ratio `z`.
    pub fn decide(&self, t: usize, z: f64) -> Result<f64> {
        if t < self.start || t >= self.start + self.steps() {
            return Err(Error::domain(format!(
                "policy covers t in {}..{}, got {t}",
                self.start,
                self.start + self.steps()
            )));
        }
        Ok(self.grid[best(&self.surfaces[t - self.start], z)])
    }
}

/// Decision rules for every contribution of a panel.
#[derive(Debug, Clone, PartialEq)]
pub struct CombinationPolicy {
    params: TargetParams,
    config: DpConfig,
    retirement: usize,
    models: Vec<PolicyModel>,
}

impl CombinationPolicy {
    pub fn solve(panel: &PensionPanel, params: &TargetParams, config: &DpConfig) -> Result<Self> {
        params.validate()?;
        config.validate()?;
        let tt = panel.retirement();
        let starts: Vec<usize> = match config.mode {
            DpMode::PerContribution => (0..tt).collect(),
            DpMode::Shared => vec![0],
        };
        let models = starts
            .into_par_iter()
            .map(|tau| PolicyModel::solve(&DpProblem::for_contribution(panel, params, tau)?, config))
            .collect::<Result<Vec<_>>>()?;
        Ok(CombinationPolicy {
            params: *params,
            config: config.clone(),
            retirement: tt,
            models,
        })
    }

    pub fn params(&self) -> &TargetParams {
        &self.params
    }

    pub fn config(&self) -> &DpConfig {
        &self.config
    }

    pub fn models(&self) -> &[PolicyModel] {
        &self.models
    }

    /// Model governing the contribution made at `tau`.
    pub fn model_for(&self, tau: usize) -> Option<&PolicyModel> {
        match self.config.mode {
            DpMode::PerContribution => self.models.get(tau),
            DpMode::Shared => self.models.first(),
        }
    }

    /// Allocation at time `t` of the tranche contributed at `tau` with ratio `z`.
    pub fn decide(&self, tau: usize, t: usize, z: f64) -> Result<f64> {
        if t >= self.retirement || tau > t {
            return Err(Error::domain(format!("no decision for tau={tau} at t={t}")));
        }
        let model = self
            .model_for(tau)
            .ok_or_else(|| Error::domain(format!("no policy for contribution at tau={tau}")))?;
        model.decide(t, z)
    }

    /// Mean over contributions of the per-iteration utility traces.
    pub fn trace(&self) -> Vec<f64> {
        let k = self.config.iterations;
        (0..k)
            .map(|i| self.models.iter().map(|m| m.trace()[i]).sum::<f64>() / self.models.len() as f64)
            .collect()
    }
}
