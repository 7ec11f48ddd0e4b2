//! The four subcommands. Each takes a validated [`RunConfig`] and an output
//! directory, writes its files and returns a short summary.

use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use cellflow_core::ensemble::{displacement_stats, evaluate_policy, DisplacementStats, Trajectory};
use cellflow_core::qlearning::QError;
use cellflow_core::spectral::ScalarGrid;
use cellflow_core::{
    greedy_policy, naive_policy, train, EnvError, QTable, SolverError, SpectralSolver, SpectralState, SwimmerEnv,
    TabularPolicy, TaylorGreenField,
};
use serde_json::json;
use thiserror::Error;

use crate::config::{ConfigError, InitialCondition, RunConfig};
use crate::render;

/// Vorticity error allowed by `validate-solver`.
pub const MAX_ERROR_TOL: f64 = 1e-7;
/// Energy-ratio error allowed by `validate-solver`.
pub const ENERGY_RATIO_TOL: f64 = 1e-8;

pub const EFFECTIVE_CONFIG: &str = "config.effective.txt";
pub const SOLVER_REPORT: &str = "solver_report.json";
pub const QTABLE_FILE: &str = "qtable.txt";
pub const LEARNING_CURVE: &str = "learning_curve.csv";
pub const TRAJECTORIES: &str = "trajectories.csv";
pub const METRICS: &str = "metrics.json";
pub const PLOT: &str = "trajectories.png";

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Config(#[from] ConfigError),
    #[error("{0}")]
    Input(String),
    #[error("i/o error on {path}: {source}")]
    Io { path: PathBuf, source: io::Error },
    #[error("numerical failure: {0}")]
    Numerical(String),
}

impl CliError {
    /// 1 for bad configuration or input, 2 for numerical failure.
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Numerical(_) => 2,
            _ => 1,
        }
    }
}

impl From<SolverError> for CliError {
    fn from(e: SolverError) -> Self {
        match e {
            SolverError::Cfl { .. } | SolverError::Divergence { .. } => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<EnvError> for CliError {
    fn from(e: EnvError) -> Self {
        match e {
            EnvError::Swimmer(_) => CliError::Numerical(e.to_string()),
            _ => CliError::Input(e.to_string()),
        }
    }
}

impl From<QError> for CliError {
    fn from(e: QError) -> Self {
        match e {
            QError::Env(env) => env.into(),
            other => CliError::Input(other.to_string()),
        }
    }
}

fn io_err(path: &Path) -> impl FnOnce(io::Error) -> CliError + '_ {
    move |source| CliError::Io {
        path: path.to_path_buf(),
        source,
    }
}

fn write_file(path: &Path, body: impl FnOnce(&mut BufWriter<fs::File>) -> io::Result<()>) -> Result<(), CliError> {
    let file = fs::File::create(path).map_err(io_err(path))?;
    let mut w = BufWriter::new(file);
    body(&mut w).and_then(|_| w.flush()).map_err(io_err(path))
}

fn prepare(cfg: &RunConfig, out: &Path) -> Result<(), CliError> {
    fs::create_dir_all(out).map_err(io_err(out))?;
    let path = out.join(EFFECTIVE_CONFIG);
    fs::write(&path, cfg.to_text()).map_err(io_err(&path))
}

fn write_json(path: &Path, value: &serde_json::Value) -> Result<(), CliError> {
    let mut text = serde_json::to_string_pretty(value).expect("json values are serializable");
    text.push('\n');
    fs::write(path, text).map_err(io_err(path))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverValidation {
    pub max_error: f64,
    pub l2_error: f64,
    pub energy_ratio_error: f64,
    pub passed: bool,
}

/// Runs the spectral solver from the Taylor–Green initial condition and
/// compares it against the exact decaying solution after every step.
pub fn validate_solver(cfg: &RunConfig, out: &Path) -> Result<SolverValidation, CliError> {
    let solver_cfg = cfg.solver_config()?;
    let field = TaylorGreenField::new(cfg.flow_u0, cfg.flow_nu, cfg.flow_k, true)?;
    prepare(cfg, out)?;
    let mut solver = SpectralSolver::new(solver_cfg)?;
    let mut state = solver.init_from_field(&field)?;
    let steps = solver.steps_between(0.0, cfg.solver_t_end)?;
    let e0 = solver.energy(&state);
    let initial = solver.compare_to_analytic(&state, &field)?;
    let (mut max_error, mut l2_error) = (initial.max_error, initial.l2_error);
    let mut energy_ratio_error = 0.0f64;
    for _ in 0..steps {
        solver.step(&mut state)?;
        let report = solver.compare_to_analytic(&state, &field)?;
        max_error = max_error.max(report.max_error);
        l2_error = l2_error.max(report.l2_error);
        if e0 > 0.0 {
            let ratio = solver.energy(&state) / e0;
            let exact = (-4.0 * cfg.flow_nu * cfg.flow_k * cfg.flow_k * state.t).exp();
            energy_ratio_error = energy_ratio_error.max((ratio - exact).abs());
        }
    }
    let passed = max_error <= MAX_ERROR_TOL && energy_ratio_error <= ENERGY_RATIO_TOL;
    write_json(
        &out.join(SOLVER_REPORT),
        &json!({
            "max_error": max_error,
            "l2_error": l2_error,
            "energy_ratio_error": energy_ratio_error,
            "t_end": state.t,
            "steps": state.steps,
            "passed": passed,
        }),
    )?;
    let result = SolverValidation {
        max_error,
        l2_error,
        energy_ratio_error,
        passed,
    };
    if !passed {
        return Err(CliError::Numerical(format!(
            "solver error above tolerance: max {max_error:e} (tol {MAX_ERROR_TOL:e}), energy ratio {energy_ratio_error:e} (tol {ENERGY_RATIO_TOL:e})"
        )));
    }
    Ok(result)
}

impl From<cellflow_core::FlowError> for CliError {
    fn from(e: cellflow_core::FlowError) -> Self {
        CliError::Input(e.to_string())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainSummary {
    pub episodes: usize,
    pub first_100_mean: f64,
    pub last_100_mean: f64,
}

fn window_mean(xs: &[f64]) -> f64 {
    if xs.is_empty() {
        f64::NAN
    } else {
        xs.iter().sum::<f64>() / xs.len() as f64
    }
}

pub fn train_cmd(cfg: &RunConfig, out: &Path) -> Result<TrainSummary, CliError> {
    let env_cfg = cfg.env_config()?;
    let h = cfg.hyperparams()?;
    prepare(cfg, out)?;
    let mut env = SwimmerEnv::new(env_cfg)?;
    let outcome = train(&mut env, &h, cfg.seed)?;
    let qpath = out.join(QTABLE_FILE);
    fs::write(&qpath, outcome.table.to_text()).map_err(io_err(&qpath))?;
    write_file(&out.join(LEARNING_CURVE), |w| {
        writeln!(w, "episode,return,epsilon")?;
        for (i, (r, e)) in outcome.returns.iter().zip(&outcome.epsilons).enumerate() {
            writeln!(w, "{i},{r},{e}")?;
        }
        Ok(())
    })?;
    let n = outcome.returns.len();
    Ok(TrainSummary {
        episodes: n,
        first_100_mean: window_mean(&outcome.returns[..n.min(100)]),
        last_100_mean: window_mean(&outcome.returns[n.saturating_sub(100)..]),
    })
}

/// Where the evaluated policy comes from.
#[derive(Debug, Clone, PartialEq)]
pub enum PolicySource {
    Naive,
    QTable(PathBuf),
}

impl PolicySource {
    fn load(&self) -> Result<(TabularPolicy, String), CliError> {
        match self {
            PolicySource::Naive => Ok((naive_policy(), "naive".into())),
            PolicySource::QTable(path) => {
                let text = fs::read_to_string(path).map_err(io_err(path))?;
                let table = QTable::<f64>::from_text(&text)
                    .map_err(|e| CliError::Input(format!("{}: {e}", path.display())))?;
                Ok((greedy_policy(&table), "qtable".into()))
            }
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalSummary {
    pub stats: DisplacementStats<f64>,
    pub trajectories: Vec<Trajectory<f64>>,
}

fn write_trajectories<W: Write>(w: &mut W, trajectories: &[Trajectory<f64>]) -> io::Result<()> {
    writeln!(w, "swimmer_id,step,t,x,y,theta,omega_local,action,reward")?;
    for tr in trajectories {
        for p in &tr.points {
            let action = p.action.map_or(String::new(), |a| a.index().to_string());
            writeln!(
                w,
                "{},{},{},{},{},{},{},{},{}",
                tr.swimmer_id, p.step, p.t, p.x, p.y, p.theta, p.omega, action, p.reward
            )?;
        }
    }
    Ok(())
}

pub fn evaluate_cmd(cfg: &RunConfig, source: &PolicySource, render: bool, out: &Path) -> Result<EvalSummary, CliError> {
    let env_cfg = cfg.env_config()?;
    let decisions = cfg.eval_decisions()?;
    if cfg.eval_n_swimmers == 0 {
        return Err(ConfigError::Invalid {
            key: "eval.n_swimmers".into(),
            reason: "must be >= 1".into(),
        }
        .into());
    }
    let (policy, label) = source.load()?;
    prepare(cfg, out)?;
    let trajectories = evaluate_policy(&env_cfg, &policy, cfg.eval_n_swimmers, decisions, cfg.seed)?;
    let dys: Vec<f64> = trajectories.iter().map(|t| t.displacement()).collect();
    let stats = displacement_stats(&dys);
    write_file(&out.join(TRAJECTORIES), |w| write_trajectories(w, &trajectories))?;
    write_json(
        &out.join(METRICS),
        &json!({
            "policy": label,
            "n_swimmers": stats.count,
            "duration": decisions as f64 * cfg.env_action_interval,
            "mean_dy": stats.mean,
            "median_dy": stats.median,
            "std_error_dy": stats.std_error,
            "fraction_positive": stats.fraction_positive,
        }),
    )?;
    if render {
        let path = out.join(PLOT);
        render::render_trajectories(&env_cfg, &trajectories)
            .save(&path)
            .map_err(|e| CliError::Io {
                path: path.clone(),
                source: io::Error::other(e),
            })?;
    }
    Ok(EvalSummary { stats, trajectories })
}

pub fn snapshot_name(index: usize) -> String {
    format!("snapshot_{index:03}.csv")
}

/// Writes physical-space vorticity at each configured time.
pub fn simulate_cmd(cfg: &RunConfig, out: &Path) -> Result<Vec<PathBuf>, CliError> {
    let solver_cfg = cfg.solver_config()?;
    let mut times = cfg.solver_snapshot_times.clone();
    times.sort_by(|a, b| a.partial_cmp(b).expect("finite times"));
    let mut solver = SpectralSolver::new(solver_cfg)?;
    let mut state: SpectralState<f64> = match cfg.solver_ic {
        InitialCondition::TaylorGreen => {
            solver.init_from_field(&TaylorGreenField::new(cfg.flow_u0, cfg.flow_nu, cfg.flow_k, true)?)?
        }
        InitialCondition::Zero => solver.zero_state(),
    };
    for &t in &times {
        solver.steps_between(0.0, t)?;
    }
    prepare(cfg, out)?;
    let mut written = Vec::new();
    for (i, &t) in times.iter().enumerate() {
        solver.run_until(&mut state, t)?;
        let grid: ScalarGrid<f64> = solver.vorticity_on_grid(&state);
        let path = out.join(snapshot_name(i));
        write_file(&path, |w| grid.write_csv(state.t, w))?;
        written.push(path);
    }
    Ok(written)
}
