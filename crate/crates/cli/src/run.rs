//! Subcommand pipelines.

use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use clap::ValueEnum;
use pension_core::market::MarketValueSeries;
use pension_core::metrics::{
    best_row, evaluate_strategy, frontier, frontier_to_csv, reports_to_csv, FrontierFamily, FrontierRow,
};
use pension_core::regression::InflationEstimator;
use pension_core::scenario::{simulate, summarize};
use pension_core::{
    CombinationPolicy, EvaluationReport, GlidePath, PensionPanel, ScenarioSet, StaticRule, StrategyKind,
};

use crate::config::{grid, FamilyName, RunConfig, ScenarioSource, StrategyName};
use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Command {
    /// Write the scenario set and its moment table.
    Simulate,
    /// Evaluate the configured strategy.
    Evaluate,
    /// Solve the combination strategy's dynamic program and export the rule.
    SolveDp,
    /// Sweep one strategy family's parameter.
    Frontier,
    /// Compare static, life-cycle and target-based strategies.
    Report,
}

/// Output files written to a hidden name first and renamed together on
/// success. Files not committed are removed when the stage is dropped.
struct Stage {
    dir: PathBuf,
    files: Vec<(PathBuf, PathBuf)>,
}

impl Stage {
    fn new(dir: &Path) -> Result<Self, CliError> {
        fs::create_dir_all(dir).map_err(|e| CliError::Output(format!("{}: {e}", dir.display())))?;
        Ok(Stage {
            dir: dir.to_path_buf(),
            files: Vec::new(),
        })
    }

    /// Temporary path standing in for `name` until commit.
    fn reserve(&mut self, name: &str) -> PathBuf {
        let tmp = self.dir.join(format!(".{name}.partial-{}", std::process::id()));
        self.files.push((tmp.clone(), self.dir.join(name)));
        tmp
    }

    fn write(&mut self, name: &str, contents: &str) -> Result<(), CliError> {
        let tmp = self.reserve(name);
        fs::write(&tmp, contents).map_err(|e| CliError::Output(format!("{}: {e}", tmp.display())))
    }

    fn commit(mut self) -> Result<Vec<PathBuf>, CliError> {
        let files = std::mem::take(&mut self.files);
        let mut written = Vec::new();
        for (i, (tmp, dest)) in files.iter().enumerate() {
            if let Err(e) = fs::rename(tmp, dest) {
                for (t, _) in &files[i..] {
                    let _ = fs::remove_file(t);
                }
                for d in &written {
                    let _ = fs::remove_file(d);
                }
                return Err(CliError::Output(format!("{}: {e}", dest.display())));
            }
            written.push(dest.clone());
        }
        Ok(written)
    }
}

impl Drop for Stage {
    fn drop(&mut self) {
        for (tmp, _) in &self.files {
            let _ = fs::remove_file(tmp);
        }
    }
}

/// Runs `command` and returns the files it wrote.
pub fn run(cfg: &RunConfig, command: Command) -> Result<Vec<PathBuf>, CliError> {
    let mut stage = Stage::new(&cfg.out)?;
    match command {
        Command::Simulate => simulate_cmd(cfg, &mut stage)?,
        Command::Evaluate => {
            let panel = build_panel(cfg, &load_scenarios(cfg)?)?;
            let (strategy, label) = configured_strategy(cfg, &panel)?;
            let report = evaluate_strategy(&panel, &strategy, &label, &cfg.eval_options())?;
            stage.write("report.csv", &reports_to_csv(&[report]))?;
        }
        Command::SolveDp => solve_dp_cmd(cfg, &mut stage)?,
        Command::Frontier => {
            let panel = build_panel(cfg, &load_scenarios(cfg)?)?;
            let family = family(cfg, cfg.frontier.family);
            let rows = frontier(&panel, &family, &cfg.frontier.grid(), cfg.target_rr)?;
            stage.write("frontier.csv", &frontier_to_csv(&rows))?;
        }
        Command::Report => report_cmd(cfg, &mut stage)?,
    }
    stage.commit()
}

/// Generated or ingested scenarios, as configured.
pub fn load_scenarios(cfg: &RunConfig) -> Result<ScenarioSet, CliError> {
    Ok(match &cfg.scenario {
        ScenarioSource::Generate => simulate(&cfg.model, cfg.n_paths, cfg.horizon, cfg.seed)?,
        ScenarioSource::File(f) => {
            ScenarioSet::ingest(f, cfg.model.wage_spread)?.with_max_maturity(cfg.model.max_maturity)
        }
    })
}

pub fn build_panel(cfg: &RunConfig, set: &ScenarioSet) -> Result<PensionPanel, CliError> {
    Ok(PensionPanel::build(
        set,
        &cfg.career,
        &cfg.annuity,
        cfg.inflation_floor,
    )?)
}

fn static_label(a: f64) -> String {
    format!("static_{a:.2}")
}

fn r_label(name: &str, r: f64) -> String {
    format!("{name}_r{r:.4}")
}

/// The strategy selected by `strategy.kind` and its report label.
pub fn configured_strategy(cfg: &RunConfig, panel: &PensionPanel) -> Result<(StrategyKind, String), CliError> {
    let s = &cfg.strategy;
    let params = cfg.target_params(s.r);
    Ok(match s.kind {
        StrategyName::Static => (
            StrategyKind::Static(StaticRule::Constant(s.alpha)),
            static_label(s.alpha),
        ),
        StrategyName::Bogle => (StrategyKind::Static(StaticRule::Bogle), "bogle".into()),
        StrategyName::Glide => (
            StrategyKind::Static(s.static_rule()?.expect("glide is a static rule")),
            format!("glide_{:.2}_{:.2}", s.glide_from, s.glide_to),
        ),
        StrategyName::Cumulative => (StrategyKind::Cumulative(params), r_label("cumulative", s.r)),
        StrategyName::Individual => (StrategyKind::Individual(params), r_label("individual", s.r)),
        StrategyName::Combination => (
            StrategyKind::Combination(Arc::new(CombinationPolicy::solve(panel, &params, &cfg.dp)?)),
            r_label("combination", s.r),
        ),
    })
}

fn family(cfg: &RunConfig, name: FamilyName) -> FrontierFamily {
    let params = cfg.target_params(cfg.strategy.r);
    match name {
        FamilyName::Static => FrontierFamily::Static,
        FamilyName::Cumulative => FrontierFamily::Cumulative(params),
        FamilyName::Individual => FrontierFamily::Individual(params),
        FamilyName::Combination => FrontierFamily::Combination(params, cfg.dp.clone()),
    }
}

fn simulate_cmd(cfg: &RunConfig, stage: &mut Stage) -> Result<(), CliError> {
    let set = load_scenarios(cfg)?;
    let estimator = InflationEstimator::build(&set, cfg.annuity.retirement, cfg.inflation_floor)?;
    let markets = MarketValueSeries::build(&set, &cfg.annuity, &estimator)?;
    let moments = summarize(&set, Some(&markets));
    // An ingested set is an input and is never rewritten.
    if cfg.scenario == ScenarioSource::Generate {
        set.export(stage.reserve("scenarios.csv"))?;
    }
    stage.write("moments.csv", &moments.to_csv())
}

fn trace_csv(trace: &[f64]) -> String {
    let mut s = String::from("iteration,mean_utility\n");
    for (i, u) in trace.iter().enumerate() {
        s.push_str(&format!("{},{u}\n", i + 1));
    }
    s
}

fn solve_dp_cmd(cfg: &RunConfig, stage: &mut Stage) -> Result<(), CliError> {
    let panel = build_panel(cfg, &load_scenarios(cfg)?)?;
    let policy = CombinationPolicy::solve(&panel, &cfg.target_params(cfg.strategy.r), &cfg.dp)?;
    let zs = grid(cfg.export.z_min, cfg.export.z_max, cfg.export.z_step);
    let mut table = String::from("tau,t,z,alpha\n");
    let mut by_tau = String::from("tau,iteration,mean_utility\n");
    for model in policy.models() {
        let tau = model.start();
        for t in tau..tau + model.steps() {
            for &z in &zs {
                table.push_str(&format!("{tau},{t},{z},{}\n", model.decide(t, z)?));
            }
        }
        for (i, u) in model.trace().iter().enumerate() {
            by_tau.push_str(&format!("{tau},{},{u}\n", i + 1));
        }
    }
    stage.write("policy.csv", &table)?;
    stage.write("trace.csv", &trace_csv(&policy.trace()))?;
    stage.write("trace_by_contribution.csv", &by_tau)
}

fn report_cmd(cfg: &RunConfig, stage: &mut Stage) -> Result<(), CliError> {
    let panel = build_panel(cfg, &load_scenarios(cfg)?)?;
    let opts = cfg.eval_options();
    let rep = &cfg.report;
    let mut reports: Vec<EvaluationReport> = Vec::new();
    let mut frontiers: Vec<FrontierRow> = Vec::new();
    let mut eval = |strategy: StrategyKind, label: String| -> Result<(), CliError> {
        reports.push(evaluate_strategy(&panel, &strategy, &label, &opts)?);
        Ok(())
    };

    for a in [0.0, 1.0] {
        eval(StrategyKind::Static(StaticRule::Constant(a)), static_label(a))?;
    }
    let static_rows = frontier(
        &panel,
        &FrontierFamily::Static,
        &grid(0.0, 1.0, rep.static_step),
        cfg.target_rr,
    )?;
    let best_static = best_row(&static_rows).expect("static grid is non-empty").param;
    eval(
        StrategyKind::Static(StaticRule::Constant(best_static)),
        format!("static_opt_{best_static:.2}"),
    )?;
    frontiers.extend(static_rows);

    let start = cfg.career.start_age;
    let end = cfg.annuity.retirement_age;
    for (name, to) in [
        ("def", rep.lifecycle_def),
        ("neut", rep.lifecycle_neut),
        ("off", rep.lifecycle_off),
    ] {
        let glide = GlidePath::linear(start, end, 1.0, to)?;
        eval(
            StrategyKind::Static(StaticRule::Glide(glide)),
            format!("lifecycle_{name}"),
        )?;
    }

    let r_grid = grid(rep.r_min, rep.r_max, rep.r_step);
    for name in [FamilyName::Cumulative, FamilyName::Individual] {
        let fam = family(cfg, name);
        let rows = frontier(&panel, &fam, &r_grid, cfg.target_rr)?;
        let r = best_row(&rows).expect("r grid is non-empty").param;
        eval(fam.strategy(&panel, r)?, r_label(name.as_str(), r))?;
        frontiers.extend(rows);
    }

    let params = cfg.target_params(rep.combination_r);
    let policy = Arc::new(CombinationPolicy::solve(&panel, &params, &cfg.dp)?);
    let trace = policy.trace();
    eval(
        StrategyKind::Combination(policy),
        r_label("combination", rep.combination_r),
    )?;

    stage.write("report.csv", &reports_to_csv(&reports))?;
    stage.write("frontier.csv", &frontier_to_csv(&frontiers))?;
    stage.write("trace.csv", &trace_csv(&trace))
}
