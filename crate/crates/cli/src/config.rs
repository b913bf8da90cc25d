//! Flat `key = value` run configuration.
//!
//! One entry per line, `#` starts a comment, keys are dotted
//! (`strategy.r`). Every key has a default, so an empty file is a valid
//! configuration. [`RunConfig::to_text`] prints the full key set and is
//! what `--print-defaults` shows.

use std::path::{Path, PathBuf};

use pension_core::dp::DpConfig;
use pension_core::metrics::EvalOptions;
use pension_core::regression::DEFAULT_LEVEL_FLOOR;
use pension_core::{AnnuitySpec, CareerSchedule, DpMode, GlidePath, ModelParams, StaticRule, TargetParams};

use crate::error::CliError;

pub const DEFAULT_SEED: u64 = 20240601;

/// Where the scenario set comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum ScenarioSource {
    Generate,
    File(PathBuf),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StrategyName {
    Static,
    Bogle,
    Glide,
    Cumulative,
    Individual,
    Combination,
}

impl StrategyName {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => StrategyName::Static,
            "bogle" => StrategyName::Bogle,
            "glide" => StrategyName::Glide,
            "cumulative" => StrategyName::Cumulative,
            "individual" => StrategyName::Individual,
            "combination" => StrategyName::Combination,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            StrategyName::Static => "static",
            StrategyName::Bogle => "bogle",
            StrategyName::Glide => "glide",
            StrategyName::Cumulative => "cumulative",
            StrategyName::Individual => "individual",
            StrategyName::Combination => "combination",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct StrategyConfig {
    pub kind: StrategyName,
    /// Equity fraction of the static mix.
    pub alpha: f64,
    pub glide_start_age: u32,
    pub glide_end_age: u32,
    pub glide_from: f64,
    pub glide_to: f64,
    pub r: f64,
    pub delta: f64,
}

impl Default for StrategyConfig {
    fn default() -> Self {
        StrategyConfig {
            kind: StrategyName::Static,
            alpha: 0.5,
            glide_start_age: 25,
            glide_end_age: 66,
            glide_from: 1.0,
            glide_to: 0.3,
            r: 0.025,
            delta: 0.025,
        }
    }
}

impl StrategyConfig {
    pub fn static_rule(&self) -> pension_core::Result<Option<StaticRule>> {
        Ok(match self.kind {
            StrategyName::Static => Some(StaticRule::Constant(self.alpha)),
            StrategyName::Bogle => Some(StaticRule::Bogle),
            StrategyName::Glide => Some(StaticRule::Glide(GlidePath::linear(
                self.glide_start_age,
                self.glide_end_age,
                self.glide_from,
                self.glide_to,
            )?)),
            _ => None,
        })
    }
}

/// Grid on which the solved decision rule is tabulated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolicyExport {
    pub z_min: f64,
    pub z_max: f64,
    pub z_step: f64,
}

impl Default for PolicyExport {
    fn default() -> Self {
        PolicyExport {
            z_min: 0.25,
            z_max: 5.0,
            z_step: 0.05,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FamilyName {
    Static,
    Cumulative,
    Individual,
    Combination,
}

impl FamilyName {
    fn parse(s: &str) -> Option<Self> {
        Some(match s {
            "static" => FamilyName::Static,
            "cumulative" => FamilyName::Cumulative,
            "individual" => FamilyName::Individual,
            "combination" => FamilyName::Combination,
            _ => return None,
        })
    }

    pub fn as_str(self) -> &'static str {
        match self {
            FamilyName::Static => "static",
            FamilyName::Cumulative => "cumulative",
            FamilyName::Individual => "individual",
            FamilyName::Combination => "combination",
        }
    }

    /// Parameter range swept when the config leaves it blank.
    pub fn default_range(self) -> (f64, f64, f64) {
        match self {
            FamilyName::Static => (0.0, 1.0, 0.01),
            _ => (0.0, 0.05, 0.0025),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierConfig {
    pub family: FamilyName,
    pub min: Option<f64>,
    pub max: Option<f64>,
    pub step: Option<f64>,
}

impl Default for FrontierConfig {
    fn default() -> Self {
        FrontierConfig {
            family: FamilyName::Cumulative,
            min: None,
            max: None,
            step: None,
        }
    }
}

impl FrontierConfig {
    pub fn grid(&self) -> Vec<f64> {
        let (lo, hi, step) = self.family.default_range();
        grid(
            self.min.unwrap_or(lo),
            self.max.unwrap_or(hi),
            self.step.unwrap_or(step),
        )
    }
}

/// Settings of the multi-strategy comparison.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReportConfig {
    pub static_step: f64,
    pub r_min: f64,
    pub r_max: f64,
    pub r_step: f64,
    pub combination_r: f64,
    /// Final equity fractions of the defensive, neutral and offensive life cycles.
    pub lifecycle_def: f64,
    pub lifecycle_neut: f64,
    pub lifecycle_off: f64,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            static_step: 0.01,
            r_min: 0.0,
            r_max: 0.05,
            r_step: 0.0025,
            combination_r: 0.01,
            lifecycle_def: 0.1,
            lifecycle_neut: 0.3,
            lifecycle_off: 0.5,
        }
    }
}

/// Evenly spaced values from `lo` to `hi` inclusive, rounded to ten
/// decimals so labels and CSV cells stay short.
pub fn grid(lo: f64, hi: f64, step: f64) -> Vec<f64> {
    let n = ((hi - lo) / step + 1e-9).floor() as usize;
    (0..=n)
        .map(|i| ((lo + i as f64 * step) * 1e10).round() / 1e10)
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub seed: u64,
    pub n_paths: usize,
    pub horizon: usize,
    pub annuity: AnnuitySpec,
    pub target_rr: f64,
    pub out: PathBuf,
    pub scenario: ScenarioSource,
    pub inflation_floor: f64,
    pub model: ModelParams,
    pub career: CareerSchedule,
    pub rates_file: Option<PathBuf>,
    pub strategy: StrategyConfig,
    pub dp: DpConfig,
    pub export: PolicyExport,
    pub expected_return: f64,
    pub lead: usize,
    pub frontier: FrontierConfig,
    pub report: ReportConfig,
}

impl Default for RunConfig {
    fn default() -> Self {
        let annuity = AnnuitySpec::default();
        RunConfig {
            seed: DEFAULT_SEED,
            n_paths: 2000,
            horizon: annuity.retirement,
            annuity,
            target_rr: 0.70,
            out: PathBuf::from("out"),
            scenario: ScenarioSource::Generate,
            inflation_floor: DEFAULT_LEVEL_FLOOR,
            model: ModelParams::default(),
            career: CareerSchedule::default(),
            rates_file: None,
            strategy: StrategyConfig::default(),
            dp: DpConfig::default(),
            export: PolicyExport::default(),
            expected_return: EvalOptions::default().expected_return,
            lead: EvalOptions::default().lead,
            frontier: FrontierConfig::default(),
            report: ReportConfig::default(),
        }
    }
}

const FACTORS: [&str; 4] = ["equity", "inflation", "level", "slope"];

fn corr_key(i: usize, j: usize) -> String {
    format!("model.corr.{}_{}", FACTORS[i], FACTORS[j])
}

fn fmt_list(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(",")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(|v| v.to_string()).unwrap_or_default()
}

/// Parse failure for one value; the caller attaches key and line.
enum Bad {
    Type(&'static str),
    Value(String),
}

fn float(v: &str) -> Result<f64, Bad> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or(Bad::Type("a finite number"))
}

fn opt_float(v: &str) -> Result<Option<f64>, Bad> {
    if v.is_empty() {
        Ok(None)
    } else {
        float(v).map(Some)
    }
}

fn integer(v: &str) -> Result<i64, Bad> {
    v.parse::<i64>().map_err(|_| Bad::Type("an integer"))
}

fn count(v: &str, min: i64) -> Result<usize, Bad> {
    let n = integer(v)?;
    if n < min {
        return Err(Bad::Value(format!("must be at least {min}, got {n}")));
    }
    Ok(n as usize)
}

fn age(v: &str) -> Result<u32, Bad> {
    let n = integer(v)?;
    u32::try_from(n).map_err(|_| Bad::Value(format!("must be a non-negative age, got {n}")))
}

fn list(v: &str) -> Result<Vec<f64>, Bad> {
    v.split(',')
        .map(|s| s.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<_>>>()
        .ok_or(Bad::Type("a comma-separated list of numbers"))
}

fn path(v: &str) -> Result<Option<PathBuf>, Bad> {
    Ok((!v.is_empty()).then(|| PathBuf::from(v)))
}

impl RunConfig {
    /// Reads and validates a configuration file. Relative input paths are
    /// resolved against the file's directory.
    pub fn from_file(file: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(file).map_err(|e| CliError::Config {
            line: 0,
            message: format!("cannot read {}: {e}", file.display()),
        })?;
        let base = file.parent().unwrap_or(Path::new("."));
        let mut cfg = Self::parse(&text)?;
        cfg.resolve(base);
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies every entry of `text` on top of the defaults. Performs no
    /// file checks; see [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self, CliError> {
        let mut cfg = RunConfig::default();
        let mut scenario_file: Option<PathBuf> = None;
        let mut source_file = false;
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let content = raw.split('#').next().unwrap_or("").trim();
            if content.is_empty() {
                continue;
            }
            let Some((key, value)) = content.split_once('=') else {
                return Err(CliError::Config {
                    line,
                    message: format!("expected `key = value`, found `{content}`"),
                });
            };
            let (key, value) = (key.trim(), value.trim());
            let res = match key {
                "scenario.source" => match value {
                    "generate" | "file" => {
                        source_file = value == "file";
                        Ok(())
                    }
                    _ => Err(Bad::Type("one of generate, file")),
                },
                "scenario.file" => path(value).map(|p| scenario_file = p),
                _ => cfg.set(key, value),
            };
            match res {
                Ok(()) => {}
                Err(Bad::Type(expected)) if key_known(key) => {
                    return Err(CliError::Type {
                        line,
                        key: key.to_string(),
                        expected,
                        found: value.to_string(),
                    })
                }
                Err(Bad::Type(_)) => {
                    return Err(CliError::UnknownKey {
                        line,
                        key: key.to_string(),
                    })
                }
                Err(Bad::Value(message)) => {
                    return Err(CliError::Invalid {
                        line,
                        key: key.to_string(),
                        message,
                    })
                }
            }
        }
        cfg.scenario = match (source_file, scenario_file) {
            (true, Some(f)) => ScenarioSource::File(f),
            (true, None) => {
                return Err(CliError::Validation(
                    "scenario.source = file needs scenario.file".into(),
                ))
            }
            (false, None) => ScenarioSource::Generate,
            (false, Some(_)) => {
                return Err(CliError::Validation(
                    "scenario.file is set but scenario.source is generate; pick one source".into(),
                ))
            }
        };
        cfg.career.wage_spread = cfg.model.wage_spread;
        cfg.annuity.retirement_age = cfg.career.start_age + cfg.annuity.retirement as u32;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, v: &str) -> Result<(), Bad> {
        if let Some(rest) = key.strip_prefix("model.corr.") {
            let (a, b) = rest.split_once('_').ok_or(Bad::Type(""))?;
            let i = FACTORS.iter().position(|f| *f == a).ok_or(Bad::Type(""))?;
            let j = FACTORS.iter().position(|f| *f == b).ok_or(Bad::Type(""))?;
            if i >= j {
                return Err(Bad::Type(""));
            }
            let c = float(v)?;
            self.model.correlation[i][j] = c;
            self.model.correlation[j][i] = c;
            return Ok(());
        }
        for (name, f) in FACTORS.iter().zip(0..) {
            if let Some(field) = key.strip_prefix(&format!("model.{name}.")) {
                let spec = match f {
                    0 => &mut self.model.equity,
                    1 => &mut self.model.inflation,
                    2 => &mut self.model.level,
                    _ => &mut self.model.slope,
                };
                match field {
                    "mean" => spec.mean = float(v)?,
                    "vol" => spec.vol = float(v)?,
                    "ar" => spec.ar = float(v)?,
                    _ => return Err(Bad::Type("")),
                }
                return Ok(());
            }
        }
        match key {
            "seed" => self.seed = v.parse::<u64>().map_err(|_| Bad::Type("an unsigned 64-bit integer"))?,
            "n_paths" => self.n_paths = count(v, 1)?,
            "horizon" => self.horizon = count(v, 1)?,
            "retirement" => self.annuity.retirement = count(v, 1)?,
            "payments" => self.annuity.payments = count(v, 1)?,
            "target_rr" => self.target_rr = float(v)?,
            "out" => self.out = path(v)?.ok_or(Bad::Value("must not be empty".into()))?,
            "inflation.floor" => self.inflation_floor = float(v)?,
            "model.slope_decay" => self.model.slope_decay = float(v)?,
            "model.wage_spread" => self.model.wage_spread = float(v)?,
            "model.pillars" => self.model.pillars = count(v, 1)?,
            "model.max_maturity" => self.model.max_maturity = count(v, 1)?,
            "career.start_age" => self.career.start_age = age(v)?,
            "career.base_salary" => self.career.base_salary = float(v)?,
            "career.franchise" => self.career.franchise = float(v)?,
            "career.state_pension" => self.career.state_pension = float(v)?,
            "career.rates_file" => self.rates_file = path(v)?,
            "strategy.kind" => {
                self.strategy.kind = StrategyName::parse(v).ok_or(Bad::Type(
                    "one of static, bogle, glide, cumulative, individual, combination",
                ))?
            }
            "strategy.alpha" => self.strategy.alpha = float(v)?,
            "strategy.glide.start_age" => self.strategy.glide_start_age = age(v)?,
            "strategy.glide.end_age" => self.strategy.glide_end_age = age(v)?,
            "strategy.glide.from" => self.strategy.glide_from = float(v)?,
            "strategy.glide.to" => self.strategy.glide_to = float(v)?,
            "strategy.r" => self.strategy.r = float(v)?,
            "strategy.delta" => self.strategy.delta = float(v)?,
            "dp.grid" => self.dp.grid = list(v)?,
            "dp.z_min" => self.dp.z_min = float(v)?,
            "dp.z_max" => self.dp.z_max = float(v)?,
            "dp.iterations" => self.dp.iterations = count(v, 1)?,
            "dp.span" => self.dp.span = float(v)?,
            "dp.degree" => self.dp.degree = count(v, 1)?,
            "dp.mode" => {
                self.dp.mode = match v {
                    "per_contribution" => DpMode::PerContribution,
                    "shared" => DpMode::Shared,
                    _ => return Err(Bad::Type("one of per_contribution, shared")),
                }
            }
            "dp.vertices" => self.dp.surface_vertices = count(v, 0)?,
            "dp.export.z_min" => self.export.z_min = float(v)?,
            "dp.export.z_max" => self.export.z_max = float(v)?,
            "dp.export.z_step" => self.export.z_step = float(v)?,
            "eval.expected_return" => self.expected_return = float(v)?,
            "eval.lead" => self.lead = count(v, 0)?,
            "frontier.family" => {
                self.frontier.family =
                    FamilyName::parse(v).ok_or(Bad::Type("one of static, cumulative, individual, combination"))?
            }
            "frontier.min" => self.frontier.min = opt_float(v)?,
            "frontier.max" => self.frontier.max = opt_float(v)?,
            "frontier.step" => self.frontier.step = opt_float(v)?,
            "report.static_step" => self.report.static_step = float(v)?,
            "report.r_min" => self.report.r_min = float(v)?,
            "report.r_max" => self.report.r_max = float(v)?,
            "report.r_step" => self.report.r_step = float(v)?,
            "report.combination_r" => self.report.combination_r = float(v)?,
            "report.lifecycle.def" => self.report.lifecycle_def = float(v)?,
            "report.lifecycle.neut" => self.report.lifecycle_neut = float(v)?,
            "report.lifecycle.off" => self.report.lifecycle_off = float(v)?,
            _ => return Err(Bad::Type("")),
        }
        Ok(())
    }

    /// Every key with its current value, in file order.
    pub fn entries(&self) -> Vec<(String, String)> {
        let m = &self.model;
        let mut e: Vec<(String, String)> = Vec::new();
        let mut put = |k: &str, v: String| e.push((k.to_string(), v));
        put("seed", self.seed.to_string());
        put("n_paths", self.n_paths.to_string());
        put("horizon", self.horizon.to_string());
        put("retirement", self.annuity.retirement.to_string());
        put("payments", self.annuity.payments.to_string());
        put("target_rr", self.target_rr.to_string());
        put("out", self.out.display().to_string());
        match &self.scenario {
            ScenarioSource::Generate => {
                put("scenario.source", "generate".into());
                put("scenario.file", String::new());
            }
            ScenarioSource::File(f) => {
                put("scenario.source", "file".into());
                put("scenario.file", f.display().to_string());
            }
        }
        put("inflation.floor", self.inflation_floor.to_string());
        for (name, spec) in FACTORS.iter().zip([m.equity, m.inflation, m.level, m.slope]) {
            put(&format!("model.{name}.mean"), spec.mean.to_string());
            put(&format!("model.{name}.vol"), spec.vol.to_string());
            put(&format!("model.{name}.ar"), spec.ar.to_string());
        }
        put("model.slope_decay", m.slope_decay.to_string());
        put("model.wage_spread", m.wage_spread.to_string());
        put("model.pillars", m.pillars.to_string());
        put("model.max_maturity", m.max_maturity.to_string());
        for i in 0..4 {
            for j in i + 1..4 {
                put(&corr_key(i, j), m.correlation[i][j].to_string());
            }
        }
        let c = &self.career;
        put("career.start_age", c.start_age.to_string());
        put("career.base_salary", c.base_salary.to_string());
        put("career.franchise", c.franchise.to_string());
        put("career.state_pension", c.state_pension.to_string());
        put(
            "career.rates_file",
            self.rates_file
                .as_ref()
                .map(|p| p.display().to_string())
                .unwrap_or_default(),
        );
        let s = &self.strategy;
        put("strategy.kind", s.kind.as_str().into());
        put("strategy.alpha", s.alpha.to_string());
        put("strategy.glide.start_age", s.glide_start_age.to_string());
        put("strategy.glide.end_age", s.glide_end_age.to_string());
        put("strategy.glide.from", s.glide_from.to_string());
        put("strategy.glide.to", s.glide_to.to_string());
        put("strategy.r", s.r.to_string());
        put("strategy.delta", s.delta.to_string());
        let d = &self.dp;
        put("dp.grid", fmt_list(&d.grid));
        put("dp.z_min", d.z_min.to_string());
        put("dp.z_max", d.z_max.to_string());
        put("dp.iterations", d.iterations.to_string());
        put("dp.span", d.span.to_string());
        put("dp.degree", d.degree.to_string());
        put(
            "dp.mode",
            match d.mode {
                DpMode::PerContribution => "per_contribution",
                DpMode::Shared => "shared",
            }
            .into(),
        );
        put("dp.vertices", d.surface_vertices.to_string());
        put("dp.export.z_min", self.export.z_min.to_string());
        put("dp.export.z_max", self.export.z_max.to_string());
        put("dp.export.z_step", self.export.z_step.to_string());
        put("eval.expected_return", self.expected_return.to_string());
        put("eval.lead", self.lead.to_string());
        put("frontier.family", self.frontier.family.as_str().into());
        put("frontier.min", fmt_opt(self.frontier.min));
        put("frontier.max", fmt_opt(self.frontier.max));
        put("frontier.step", fmt_opt(self.frontier.step));
        let r = &self.report;
        put("report.static_step", r.static_step.to_string());
        put("report.r_min", r.r_min.to_string());
        put("report.r_max", r.r_max.to_string());
        put("report.r_step", r.r_step.to_string());
        put("report.combination_r", r.combination_r.to_string());
        put("report.lifecycle.def", r.lifecycle_def.to_string());
        put("report.lifecycle.neut", r.lifecycle_neut.to_string());
        put("report.lifecycle.off", r.lifecycle_off.to_string());
        e
    }

    /// Config file text that reproduces `self`.
    pub fn to_text(&self) -> String {
        let mut s = String::new();
        for (k, v) in self.entries() {
            if v.is_empty() {
                s.push_str(&format!("{k} =\n"));
            } else {
                s.push_str(&format!("{k} = {v}\n"));
            }
        }
        s
    }

    fn resolve(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let ScenarioSource::File(f) = &mut self.scenario {
            fix(f);
        }
        if let Some(f) = &mut self.rates_file {
            fix(f);
        }
    }

    /// Cross-field checks, input file existence, and loading of the career
    /// rate file.
    pub fn validate(&mut self) -> Result<(), CliError> {
        let invalid = |m: String| Err(CliError::Validation(m));
        if let ScenarioSource::File(f) = &self.scenario {
            if !f.is_file() {
                return invalid(format!("scenario file {} does not exist", f.display()));
            }
        }
        if let Some(f) = &self.rates_file {
            if !f.is_file() {
                return invalid(format!("career rates file {} does not exist", f.display()));
            }
            self.career = self.career.clone().with_rates_from_csv(f)?;
            self.annuity.retirement_age = self.career.start_age + self.annuity.retirement as u32;
        }
        if self.horizon < self.annuity.retirement {
            return invalid(format!(
                "horizon {} is shorter than retirement {}",
                self.horizon, self.annuity.retirement
            ));
        }
        if !(self.target_rr > 0.0) {
            return invalid(format!("target_rr must be positive, got {}", self.target_rr));
        }
        if !(self.inflation_floor > 0.0) {
            return invalid(format!(
                "inflation.floor must be positive, got {}",
                self.inflation_floor
            ));
        }
        if self.lead > self.annuity.retirement {
            return invalid(format!(
                "eval.lead {} exceeds retirement {}",
                self.lead, self.annuity.retirement
            ));
        }
        let e = self.export;
        if !(e.z_min > 0.0 && e.z_min <= e.z_max && e.z_step > 0.0) {
            return invalid("dp.export needs 0 < z_min <= z_max and z_step > 0".into());
        }
        let rep = &self.report;
        if !(rep.static_step > 0.0 && rep.static_step <= 1.0) {
            return invalid("report.static_step must lie in (0, 1]".into());
        }
        if !(rep.r_step > 0.0 && rep.r_min <= rep.r_max) {
            return invalid("report needs r_min <= r_max and r_step > 0".into());
        }
        for (k, v) in [
            ("report.lifecycle.def", rep.lifecycle_def),
            ("report.lifecycle.neut", rep.lifecycle_neut),
            ("report.lifecycle.off", rep.lifecycle_off),
        ] {
            if !(0.0..=1.0).contains(&v) {
                return invalid(format!("{k} must lie in [0, 1], got {v}"));
            }
        }
        let f = self.frontier;
        let (lo, hi, step) = f.family.default_range();
        if !(f.step.unwrap_or(step) > 0.0 && f.min.unwrap_or(lo) <= f.max.unwrap_or(hi)) {
            return invalid("frontier needs min <= max and step > 0".into());
        }
        self.annuity.validate()?;
        self.career.validate()?;
        self.model.validate()?;
        self.dp.validate()?;
        self.target_params(self.strategy.r).validate()?;
        if let Some(rule) = self.strategy.static_rule()? {
            rule.validate()?;
        }
        Ok(())
    }

    pub fn target_params(&self, r: f64) -> TargetParams {
        TargetParams {
            r,
            delta: self.strategy.delta,
            target_rr: self.target_rr,
        }
    }

    pub fn eval_options(&self) -> EvalOptions {
        EvalOptions {
            target_rr: self.target_rr,
            expected_return: self.expected_return,
            lead: self.lead,
        }
    }
}

fn key_known(key: &str) -> bool {
    RunConfig::default().entries().iter().any(|(k, _)| k == key)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn printed_defaults_parse_back_to_the_defaults() {
        let text = RunConfig::default().to_text();
        assert_eq!(RunConfig::parse(&text).unwrap(), RunConfig::default());
    }

    #[test]
    fn every_printed_key_is_accepted() {
        let cfg = RunConfig::default();
        for (k, v) in cfg.entries() {
            let text = format!("{k} = {v}\n");
            assert!(RunConfig::parse(&text).is_ok(), "{k}");
        }
    }

    #[test]
    fn grid_hits_both_ends() {
        let g = grid(0.0, 1.0, 0.01);
        assert_eq!(g.len(), 101);
        assert_eq!(g[30], 0.3);
        assert_eq!(*g.last().unwrap(), 1.0);
        assert_eq!(grid(0.0, 0.05, 0.0025).len(), 21);
    }

    #[test]
    fn correlation_keys_fill_both_triangles() {
        let cfg = RunConfig::parse("model.corr.equity_slope = -0.2").unwrap();
        assert_eq!(cfg.model.correlation[0][3], -0.2);
        assert_eq!(cfg.model.correlation[3][0], -0.2);
        assert!(matches!(
            RunConfig::parse("model.corr.slope_equity = 0.1"),
            Err(CliError::UnknownKey { .. })
        ));
    }
}
