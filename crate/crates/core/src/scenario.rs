//! Economic scenario sets: generation from a first-order Gaussian vector
//! autoregression, CSV import/export and pooled sample moments.
//!
//! A set holds, for every path and every year `0..=horizon`, the annual
//! equity return, price inflation, wage inflation and an annually compounded
//! spot curve sampled at integer pillar maturities `1..=pillars`.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::market::MarketValueSeries;

/// Number of pillar maturities stored per curve.
pub const DEFAULT_PILLARS: usize = 30;

/// Longest maturity a curve may be queried at by flat extrapolation.
pub const DEFAULT_MAX_MATURITY: usize = 100;

/// Default spread of wage inflation over price inflation.
pub const DEFAULT_WAGE_SPREAD: f64 = 0.005;

/// One year of one path.
#[derive(Debug, Clone, PartialEq)]
pub struct EconomicState {
    pub equity_return: f64,
    pub inflation: f64,
    pub wage_inflation: f64,
    /// Spot rates for maturities `1..=yields.len()`.
    pub yields: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Provenance {
    Generated,
    Ingested,
}

/// Rectangular panel of economic states, immutable once built.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSet {
    n_paths: usize,
    horizon: usize,
    pillars: usize,
    max_maturity: usize,
    seed: Option<u64>,
    provenance: Provenance,
    equity: Vec<f64>,
    inflation: Vec<f64>,
    wage: Vec<f64>,
    yields: Vec<f64>,
}

impl ScenarioSet {
    /// Builds a set from states laid out path-major (`path * (horizon + 1) + t`).
    pub fn from_states(
        n_paths: usize,
        horizon: usize,
        states: Vec<EconomicState>,
        provenance: Provenance,
    ) -> Result<Self> {
        if n_paths == 0 {
            return Err(Error::param("scenario set needs at least one path"));
        }
        let years = horizon + 1;
        if states.len() != n_paths * years {
            return Err(Error::param(format!(
                "expected {} states for {n_paths} paths x {years} years, got {}",
                n_paths * years,
                states.len()
            )));
        }
        let pillars = states[0].yields.len();
        if pillars == 0 {
            return Err(Error::param("yield curve needs at least one pillar"));
        }
        let mut set = ScenarioSet {
            n_paths,
            horizon,
            pillars,
            max_maturity: DEFAULT_MAX_MATURITY.max(pillars),
            seed: None,
            provenance,
            equity: Vec::with_capacity(states.len()),
            inflation: Vec::with_capacity(states.len()),
            wage: Vec::with_capacity(states.len()),
            yields: Vec::with_capacity(states.len() * pillars),
        };
        for (i, s) in states.into_iter().enumerate() {
            if s.yields.len() != pillars {
                return Err(Error::param(format!(
                    "state {i} has {} pillars, expected {pillars}",
                    s.yields.len()
                )));
            }
            check_state(&s).map_err(|m| Error::param(format!("state {i}: {m}")))?;
            set.equity.push(s.equity_return);
            set.inflation.push(s.inflation);
            set.wage.push(s.wage_inflation);
            set.yields.extend_from_slice(&s.yields);
        }
        Ok(set)
    }

    pub fn n_paths(&self) -> usize {
        self.n_paths
    }

    /// Last simulated year; states exist for `0..=horizon`.
    pub fn horizon(&self) -> usize {
        self.horizon
    }

    pub fn pillars(&self) -> usize {
        self.pillars
    }

    pub fn max_maturity(&self) -> usize {
        self.max_maturity
    }

    pub fn with_max_maturity(mut self, max_maturity: usize) -> Self {
        self.max_maturity = max_maturity.max(self.pillars);
        self
    }

    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn provenance(&self) -> Provenance {
        self.provenance
    }

    pub fn path(&self, path: usize) -> PathView<'_> {
        assert!(path < self.n_paths, "path {path} out of range");
        PathView { set: self, path }
    }

    pub fn paths(&self) -> impl Iterator<Item = PathView<'_>> {
        (0..self.n_paths).map(move |p| self.path(p))
    }

    pub fn state(&self, path: usize, t: usize) -> EconomicState {
        let v = self.path(path);
        EconomicState {
            equity_return: v.equity_return(t),
            inflation: v.inflation(t),
            wage_inflation: v.wage_inflation(t),
            yields: v.curve(t).to_vec(),
        }
    }

    fn idx(&self, path: usize, t: usize) -> usize {
        assert!(t <= self.horizon, "year {t} beyond horizon {}", self.horizon);
        path * (self.horizon + 1) + t
    }

    /// Writes the set in the scenario CSV schema
    /// (`path,t,x,pi,w,r1,...,rK`).
    pub fn export(&self, file: impl AsRef<Path>) -> Result<()> {
        let file = file.as_ref();
        let csv_err = |source| Error::Csv {
            path: file.to_path_buf(),
            source,
        };
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_path(file)
            .map_err(csv_err)?;
        let mut header: Vec<String> = ["path", "t", "x", "pi", "w"].iter().map(|s| s.to_string()).collect();
        header.extend((1..=self.pillars).map(|m| format!("r{m}")));
        w.write_record(&header).map_err(csv_err)?;
        let mut row = Vec::with_capacity(header.len());
        for p in 0..self.n_paths {
            let view = self.path(p);
            for t in 0..=self.horizon {
                row.clear();
                row.push(p.to_string());
                row.push(t.to_string());
                row.push(view.equity_return(t).to_string());
                row.push(view.inflation(t).to_string());
                row.push(view.wage_inflation(t).to_string());
                row.extend(view.curve(t).iter().map(|r| r.to_string()));
                w.write_record(&row).map_err(csv_err)?;
            }
        }
        w.flush().map_err(|source| Error::Io {
            path: file.to_path_buf(),
            source,
        })
    }

    /// Reads a scenario CSV. A missing `w` column is rebuilt as
    /// `pi + wage_spread`.
    pub fn ingest(file: impl AsRef<Path>, wage_spread: f64) -> Result<Self> {
        let file = file.as_ref();
        let schema = |message: String| Error::Schema {
            path: file.to_path_buf(),
            message,
        };
        let handle = std::fs::File::open(file).map_err(|source| Error::Io {
            path: file.to_path_buf(),
            source,
        })?;
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(handle);
        let headers = rdr
            .headers()
            .map_err(|source| Error::Csv {
                path: file.to_path_buf(),
                source,
            })?
            .clone();
        let col = |name: &str| headers.iter().position(|h| h == name);
        let require = |name: &str| col(name).ok_or_else(|| schema(format!("missing required column \"{name}\"")));
        let c_path = require("path")?;
        let c_t = require("t")?;
        let c_x = require("x")?;
        let c_pi = require("inflation")
            .or_else(|_| require("pi"))
            .map_err(|_| schema("missing required column \"inflation\" (expected header \"pi\")".into()))?;
        let c_w = col("w");
        let mut c_r = Vec::new();
        while let Some(c) = col(&format!("r{}", c_r.len() + 1)) {
            c_r.push(c);
        }
        if c_r.is_empty() {
            return Err(schema("missing required column \"r1\"".into()));
        }
        if let Some(extra) = headers.iter().find(|h| {
            h.strip_prefix('r')
                .and_then(|m| m.parse::<usize>().ok())
                .is_some_and(|m| m > c_r.len())
        }) {
            return Err(schema(format!(
                "yield column \"{extra}\" is not contiguous with r1..r{}",
                c_r.len()
            )));
        }

        let mut by_path: BTreeMap<usize, BTreeMap<usize, EconomicState>> = BTreeMap::new();
        for (line, rec) in rdr.records().enumerate() {
            let line = line + 2;
            let rec = rec.map_err(|source| Error::Csv {
                path: file.to_path_buf(),
                source,
            })?;
            let field = |c: usize, name: &str| -> Result<&str> {
                rec.get(c)
                    .ok_or_else(|| schema(format!("line {line}: missing value for \"{name}\"")))
            };
            let num = |c: usize, name: &str| -> Result<f64> {
                let s = field(c, name)?;
                s.parse::<f64>()
                    .map_err(|_| schema(format!("line {line}: \"{name}\" is not a number: {s:?}")))
            };
            let int = |c: usize, name: &str| -> Result<usize> {
                let s = field(c, name)?;
                s.parse::<usize>()
                    .map_err(|_| schema(format!("line {line}: \"{name}\" is not a non-negative integer: {s:?}")))
            };
            let p = int(c_path, "path")?;
            let t = int(c_t, "t")?;
            let inflation = num(c_pi, "pi")?;
            let wage_inflation = match c_w {
                Some(c) => num(c, "w")?,
                None => inflation + wage_spread,
            };
            let yields = c_r
                .iter()
                .enumerate()
                .map(|(m, &c)| num(c, &format!("r{}", m + 1)))
                .collect::<Result<Vec<_>>>()?;
            let state = EconomicState {
                equity_return: num(c_x, "x")?,
                inflation,
                wage_inflation,
                yields,
            };
            check_state(&state).map_err(|m| schema(format!("line {line}: {m}")))?;
            if by_path.entry(p).or_default().insert(t, state).is_some() {
                return Err(Error::Shape {
                    path: file.to_path_buf(),
                    path_id: p,
                    message: format!("duplicate year {t}"),
                });
            }
        }
        let Some(first) = by_path.values().next() else {
            return Err(schema("file contains no scenario rows".into()));
        };
        let years = first.len();
        let mut states = Vec::with_capacity(by_path.len() * years);
        for (&p, rows) in &by_path {
            let contiguous = rows.keys().copied().eq(0..rows.len());
            if rows.len() != years || !contiguous {
                return Err(Error::Shape {
                    path: file.to_path_buf(),
                    path_id: p,
                    message: format!(
                        "expected years 0..={} but found {} rows{}",
                        years - 1,
                        rows.len(),
                        if contiguous { "" } else { " with gaps" }
                    ),
                });
            }
        }
        let n_paths = by_path.len();
        for (_, rows) in by_path {
            states.extend(rows.into_values());
        }
        ScenarioSet::from_states(n_paths, years - 1, states, Provenance::Ingested)
    }
}

fn check_state(s: &EconomicState) -> std::result::Result<(), String> {
    let finite = s.equity_return.is_finite()
        && s.inflation.is_finite()
        && s.wage_inflation.is_finite()
        && s.yields.iter().all(|r| r.is_finite());
    if !finite {
        return Err("non-finite value".into());
    }
    if 1.0 + s.equity_return <= 0.0 {
        return Err(format!("equity return {} not above -100%", s.equity_return));
    }
    if 1.0 + s.inflation <= 0.0 {
        return Err(format!("inflation {} not above -100%", s.inflation));
    }
    if let Some(r) = s.yields.iter().find(|r| 1.0 + **r <= 0.0) {
        return Err(format!("yield {r} not above -100%"));
    }
    Ok(())
}

/// Borrowed view of one scenario path.
#[derive(Debug, Clone, Copy)]
pub struct PathView<'a> {
    set: &'a ScenarioSet,
    path: usize,
}

impl<'a> PathView<'a> {
    pub fn index(&self) -> usize {
        self.path
    }

    pub fn horizon(&self) -> usize {
        self.set.horizon
    }

    pub fn equity_return(&self, t: usize) -> f64 {
        self.set.equity[self.set.idx(self.path, t)]
    }

    pub fn inflation(&self, t: usize) -> f64 {
        self.set.inflation[self.set.idx(self.path, t)]
    }

    pub fn wage_inflation(&self, t: usize) -> f64 {
        self.set.wage[self.set.idx(self.path, t)]
    }

    /// Pillar spot rates for maturities `1..=pillars` at year `t`.
    pub fn curve(&self, t: usize) -> &'a [f64] {
        let k = self.set.pillars;
        let i = self.set.idx(self.path, t) * k;
        &self.set.yields[i..i + k]
    }

    /// Spot rate for an arbitrary maturity: linear in yield between pillars,
    /// flat below the first and beyond the last pillar.
    pub fn yield_at(&self, t: usize, maturity: f64) -> Result<f64> {
        if maturity > self.set.max_maturity as f64 {
            return Err(Error::domain(format!(
                "maturity {maturity} beyond the configured maximum {}",
                self.set.max_maturity
            )));
        }
        Ok(interpolate_curve(self.curve(t), maturity))
    }
}

/// Linear interpolation on a pillar curve (`curve[m-1]` is maturity `m`).
pub fn interpolate_curve(curve: &[f64], maturity: f64) -> f64 {
    let k = curve.len();
    if maturity <= 1.0 {
        return curve[0];
    }
    if maturity >= k as f64 {
        return curve[k - 1];
    }
    let lo = maturity.floor() as usize;
    let frac = maturity - lo as f64;
    if frac == 0.0 {
        return curve[lo - 1];
    }
    curve[lo - 1] + frac * (curve[lo] - curve[lo - 1])
}

/// Unconditional target moments and persistence of one simulated factor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FactorSpec {
    pub mean: f64,
    pub vol: f64,
    /// First-order autoregression coefficient, in `(-1, 1)`.
    pub ar: f64,
}

/// Parameters of the surrogate scenario generator.
///
/// Four Gaussian factors follow a first-order vector autoregression with
/// diagonal persistence: the log gross equity return, price inflation, and
/// a level and a slope factor for the spot curve. Means and volatilities are
/// unconditional targets; `correlation` is the correlation of the innovations
/// in the order `[equity, inflation, level, slope]`. Equity moments are those
/// of the arithmetic return and are converted to log-normal parameters.
///
/// The curve at maturity `m` is `level + slope * (1 - exp(-m/λ)) / (m/λ)`
/// with `λ = slope_decay`.
#[derive(Debug, Clone, PartialEq)]
pub struct ModelParams {
    pub equity: FactorSpec,
    pub inflation: FactorSpec,
    pub level: FactorSpec,
    pub slope: FactorSpec,
    pub slope_decay: f64,
    pub correlation: [[f64; 4]; 4],
    pub wage_spread: f64,
    pub pillars: usize,
    pub max_maturity: usize,
}

impl Default for ModelParams {
    fn default() -> Self {
        ModelParams {
            equity: FactorSpec {
                mean: 0.061,
                vol: 0.183,
                ar: 0.0,
            },
            inflation: FactorSpec {
                mean: 0.016,
                vol: 0.015,
                ar: 0.9,
            },
            level: FactorSpec {
                mean: 0.042,
                vol: 0.008,
                ar: 0.97,
            },
            slope: FactorSpec {
                mean: -0.035,
                vol: 0.045,
                ar: 0.85,
            },
            slope_decay: 6.0,
            correlation: [
                [1.0, 0.1, 0.05, 0.0],
                [0.1, 1.0, 0.3, 0.8],
                [0.05, 0.3, 1.0, 0.0],
                [0.0, 0.8, 0.0, 1.0],
            ],
            wage_spread: DEFAULT_WAGE_SPREAD,
            pillars: DEFAULT_PILLARS,
            max_maturity: DEFAULT_MAX_MATURITY,
        }
    }
}

impl ModelParams {
    fn factors(&self) -> [FactorSpec; 4] {
        let eq = self.equity;
        // log-normal parameters matching the arithmetic mean and volatility
        let gross = 1.0 + eq.mean;
        let log_var = (1.0 + (eq.vol / gross).powi(2)).ln();
        let log_eq = FactorSpec {
            mean: gross.ln() - 0.5 * log_var,
            vol: log_var.sqrt(),
            ar: eq.ar,
        };
        [log_eq, self.inflation, self.level, self.slope]
    }

    /// Loading of the slope factor at maturity `m`.
    pub fn slope_loading(&self, maturity: f64) -> f64 {
        let u = maturity / self.slope_decay;
        (1.0 - (-u).exp()) / u
    }

    pub fn validate(&self) -> Result<()> {
        let names = ["equity", "inflation", "level", "slope"];
        for (f, name) in [self.equity, self.inflation, self.level, self.slope].iter().zip(names) {
            if !(f.vol >= 0.0 && f.vol.is_finite()) {
                return Err(Error::param(format!("{name} volatility must be >= 0")));
            }
            if !(f.ar > -1.0 && f.ar < 1.0) {
                return Err(Error::param(format!("{name} autoregression must lie in (-1, 1)")));
            }
            if !f.mean.is_finite() {
                return Err(Error::param(format!("{name} mean must be finite")));
            }
        }
        if self.equity.mean <= -1.0 {
            return Err(Error::param("equity mean must exceed -100%"));
        }
        if !(self.slope_decay > 0.0) {
            return Err(Error::param("slope decay must be positive"));
        }
        if self.pillars == 0 {
            return Err(Error::param("need at least one curve pillar"));
        }
        let c = &self.correlation;
        for i in 0..4 {
            if (c[i][i] - 1.0).abs() > 1e-12 {
                return Err(Error::param("correlation matrix needs a unit diagonal"));
            }
            for j in 0..4 {
                if (c[i][j] - c[j][i]).abs() > 1e-12 || c[i][j].abs() > 1.0 {
                    return Err(Error::param(
                        "correlation matrix must be symmetric with entries in [-1, 1]",
                    ));
                }
            }
        }
        let m = DMatrix::from_fn(4, 4, |i, j| c[i][j]);
        let min_eig = SymmetricEigen::new(m).eigenvalues.min();
        if min_eig < -1e-10 {
            return Err(Error::param(format!(
                "correlation matrix is not positive semi-definite (smallest eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(())
    }
}

/// Symmetric square root `A` with `A Aᵀ = m`, negative eigenvalues clipped.
fn psd_factor(m: DMatrix<f64>) -> DMatrix<f64> {
    let eig = SymmetricEigen::new(m);
    let sqrt = eig.eigenvalues.map(|l| l.max(0.0).sqrt());
    &eig.eigenvectors * DMatrix::from_diagonal(&sqrt)
}

/// Generates `n_paths` paths over years `0..=horizon`.
///
/// Path `p` draws from the ChaCha stream `p` of `seed`, so the result does
/// not depend on the number of worker threads. Year 0 is drawn from the
/// stationary distribution of the autoregression.
pub fn simulate(params: &ModelParams, n_paths: usize, horizon: usize, seed: u64) -> Result<ScenarioSet> {
    params.validate()?;
    if n_paths == 0 {
        return Err(Error::param("n_paths must be at least 1"));
    }
    if horizon == 0 {
        return Err(Error::param("horizon must be at least 1"));
    }
    if horizon > params.max_maturity {
        return Err(Error::param(format!(
            "horizon {horizon} exceeds the maximum curve maturity {}",
            params.max_maturity
        )));
    }
    let f = params.factors();
    let phi: [f64; 4] = std::array::from_fn(|i| f[i].ar);
    let mu: [f64; 4] = std::array::from_fn(|i| f[i].mean);
    let innov_sd: [f64; 4] = std::array::from_fn(|i| f[i].vol * (1.0 - phi[i] * phi[i]).sqrt());
    let c = &params.correlation;
    let innov_cov = DMatrix::from_fn(4, 4, |i, j| c[i][j] * innov_sd[i] * innov_sd[j]);
    let stat_cov = DMatrix::from_fn(4, 4, |i, j| innov_cov[(i, j)] / (1.0 - phi[i] * phi[j]));
    let innov_fac = psd_factor(innov_cov);
    let stat_fac = psd_factor(stat_cov);
    let loadings: Vec<f64> = (1..=params.pillars).map(|m| params.slope_loading(m as f64)).collect();
    let years = horizon + 1;

    let paths: Vec<Vec<EconomicState>> = (0..n_paths)
        .into_par_iter()
        .map(|p| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(p as u64);
            let mut draw = |fac: &DMatrix<f64>| -> [f64; 4] {
                let z: [f64; 4] = std::array::from_fn(|_| StandardNormal.sample(&mut rng));
                std::array::from_fn(|i| (0..4).map(|j| fac[(i, j)] * z[j]).sum())
            };
            let mut dev = draw(&stat_fac);
            let mut out = Vec::with_capacity(years);
            for t in 0..years {
                if t > 0 {
                    let e = draw(&innov_fac);
                    dev = std::array::from_fn(|i| phi[i] * dev[i] + e[i]);
                }
                let y: [f64; 4] = std::array::from_fn(|i| mu[i] + dev[i]);
                let inflation = y[1];
                out.push(EconomicState {
                    equity_return: y[0].exp() - 1.0,
                    inflation,
                    wage_inflation: inflation + params.wage_spread,
                    yields: loadings.iter().map(|h| y[2] + y[3] * h).collect(),
                });
            }
            out
        })
        .collect();

    let states = paths.into_iter().flatten().collect();
    let mut set = ScenarioSet::from_states(n_paths, horizon, states, Provenance::Generated)
        .map_err(|e| Error::param(format!("generated scenario violates invariants: {e}")))?;
    set.seed = Some(seed);
    set.max_maturity = params.max_maturity.max(params.pillars);
    Ok(set)
}

/// Pooled annual statistics of a scenario set.
#[derive(Debug, Clone, PartialEq)]
pub struct MomentReport {
    pub variables: Vec<&'static str>,
    pub means: Vec<f64>,
    pub stds: Vec<f64>,
    /// Pearson correlations; `NaN` where a variable has zero variance.
    pub correlations: Vec<Vec<f64>>,
    pub n_samples: usize,
}

impl MomentReport {
    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.variables.iter().position(|v| *v == name)
    }

    pub fn mean(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.means[i])
    }

    pub fn std(&self, name: &str) -> Option<f64> {
        self.index_of(name).map(|i| self.stds[i])
    }

    pub fn corr(&self, a: &str, b: &str) -> Option<f64> {
        Some(self.correlations[self.index_of(a)?][self.index_of(b)?])
    }

    /// Table layout: a `mean` and `std` row followed by the correlation matrix.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("statistic");
        for v in &self.variables {
            s.push(',');
            s.push_str(v);
        }
        s.push('\n');
        let mut row = |label: &str, vals: &[f64]| {
            s.push_str(label);
            for v in vals {
                s.push(',');
                s.push_str(&v.to_string());
            }
            s.push('\n');
        };
        row("mean", &self.means);
        row("std", &self.stds);
        for (v, c) in self.variables.iter().zip(&self.correlations) {
            row(&format!("corr_{v}"), c);
        }
        s
    }
}

/// Pooled means, sample standard deviations and Pearson correlations of
/// `x`, `m` (when a market series is attached), `r10`, `pi` and `w` over
/// years `1..=horizon` (`1..=T` when `m` is attached).
pub fn summarize(set: &ScenarioSet, matching: Option<&MarketValueSeries>) -> MomentReport {
    let last = match matching {
        Some(ms) => ms.retirement().min(set.horizon),
        None => set.horizon,
    };
    let mut variables = vec!["x"];
    if matching.is_some() {
        variables.push("m");
    }
    variables.extend(["r10", "pi", "w"]);
    let mut cols: Vec<Vec<f64>> = vec![Vec::new(); variables.len()];
    for p in 0..set.n_paths {
        let v = set.path(p);
        for t in 1..=last {
            let mut k = 0;
            let mut push = |x: f64| {
                cols[k].push(x);
                k += 1;
            };
            push(v.equity_return(t));
            if let Some(ms) = matching {
                push(ms.matching_return(p, t).expect("t within 1..=T"));
            }
            push(interpolate_curve(v.curve(t), 10.0));
            push(v.inflation(t));
            push(v.wage_inflation(t));
        }
    }
    let means: Vec<f64> = cols.iter().map(|c| mean(c)).collect();
    let stds: Vec<f64> = cols.iter().zip(&means).map(|(c, &m)| sample_std(c, m)).collect();
    let k = cols.len();
    let mut correlations = vec![vec![f64::NAN; k]; k];
    for i in 0..k {
        for j in 0..k {
            correlations[i][j] = pearson(&cols[i], means[i], stds[i], &cols[j], means[j], stds[j]);
        }
    }
    MomentReport {
        variables,
        means,
        stds,
        correlations,
        n_samples: cols[0].len(),
    }
}

pub(crate) fn mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    let n = xs.len() as f64;
    let m = neumaier_sum(xs.iter().copied()) / n;
    // one refinement pass removes the rounding of the division
    m + neumaier_sum(xs.iter().map(|x| x - m)) / n
}

fn sample_std(xs: &[f64], m: f64) -> f64 {
    if xs.len() < 2 {
        return 0.0;
    }
    let ss = neumaier_sum(xs.iter().map(|x| (x - m) * (x - m)));
    (ss / (xs.len() - 1) as f64).sqrt()
}

/// Correlation through standardised differences,
/// `r = 1 - Σ(za - zb)² / (2(n-1))`, which returns exactly 1 for columns that
/// are affine shifts of each other up to rounding.
fn pearson(a: &[f64], ma: f64, sa: f64, b: &[f64], mb: f64, sb: f64) -> f64 {
    if !(sa > 0.0 && sb > 0.0) || a.len() < 2 {
        return f64::NAN;
    }
    let ss = neumaier_sum(a.iter().zip(b).map(|(x, y)| {
        let d = (x - ma) / sa - (y - mb) / sb;
        d * d
    }));
    (1.0 - ss / (2.0 * (a.len() - 1) as f64)).clamp(-1.0, 1.0)
}

/// Compensated summation.
pub(crate) fn neumaier_sum(xs: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut comp = 0.0;
    for x in xs {
        let t = sum + x;
        if sum.abs() >= x.abs() {
            comp += (sum - t) + x;
        } else {
            comp += (x - t) + sum;
        }
        sum = t;
    }
    sum + comp
}
