//! Flat `key = value` run configuration.
//!
//! One assignment per line, dotted keys, `#` starts a comment. Unknown or
//! repeated keys are rejected so that a typo never silently falls back to a
//! default. [`RunConfig::to_text`] writes every key with round-trip float
//! formatting, so a dumped file reproduces the run exactly.

use std::f64::consts::PI;
use std::path::PathBuf;

use cellflow_core::spectral::CflPolicy;
use cellflow_core::{EnvConfig, Hyperparams, InitRegion, SolverConfig, SwimmerParams, TaylorGreenField};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: key `{key}` given more than once")]
    Duplicate { line: usize, key: String },
    #[error("invalid value for `{key}`: {reason}")]
    Invalid { key: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key: key.to_string(),
        reason: reason.into(),
    }
}

/// Initial vorticity for `simulate`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    TaylorGreen,
    Zero,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub flow_u0: f64,
    pub flow_nu: f64,
    pub flow_k: f64,
    pub flow_decaying: bool,
    pub swimmer_v_s: f64,
    pub swimmer_b: f64,
    pub swimmer_dt: f64,
    pub env_action_interval: f64,
    pub env_episode_steps: usize,
    pub env_init_x: f64,
    pub env_init_y: f64,
    pub env_init_side: f64,
    pub env_init_theta: Option<f64>,
    pub train_alpha: f64,
    pub train_gamma: f64,
    pub train_episodes: usize,
    pub train_eps_initial: f64,
    pub train_eps_final: f64,
    pub train_eps_decay_episodes: usize,
    pub eval_n_swimmers: usize,
    pub eval_duration: f64,
    pub solver_n: usize,
    pub solver_l: f64,
    pub solver_dt: f64,
    pub solver_t_end: f64,
    pub solver_dealias: bool,
    pub solver_cfl: CflPolicy,
    pub solver_ic: InitialCondition,
    pub solver_snapshot_times: Vec<f64>,
    pub seed: u64,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        let env = EnvConfig::<f64>::default();
        let h = Hyperparams::<f64>::default();
        let solver = SolverConfig::<f64>::default();
        Self {
            flow_u0: 1.0,
            flow_nu: 0.01,
            flow_k: 1.0,
            flow_decaying: false,
            swimmer_v_s: env.swimmer.swim_speed,
            swimmer_b: env.swimmer.alignment_time,
            swimmer_dt: env.swimmer.dt,
            env_action_interval: env.action_interval,
            env_episode_steps: env.episode_steps,
            env_init_x: env.init_region.center_x,
            env_init_y: env.init_region.center_y,
            env_init_side: env.init_region.side,
            env_init_theta: env.init_theta,
            train_alpha: h.alpha,
            train_gamma: h.gamma,
            train_episodes: h.episodes,
            train_eps_initial: h.eps_initial,
            train_eps_final: h.eps_final,
            train_eps_decay_episodes: h.eps_decay_episodes,
            eval_n_swimmers: 250,
            eval_duration: 100.0,
            solver_n: solver.n,
            solver_l: 4.0 * PI,
            solver_dt: solver.dt,
            solver_t_end: 5.0,
            solver_dealias: solver.dealias,
            solver_cfl: solver.cfl_policy,
            solver_ic: InitialCondition::TaylorGreen,
            solver_snapshot_times: vec![0.0, 1.0, 5.0],
            seed: 1,
            output_dir: PathBuf::from("out"),
        }
    }
}

fn parse_f64(key: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v.parse().map_err(|_| invalid(key, format!("`{v}` is not a number")))?;
    if !x.is_finite() {
        return Err(invalid(key, "must be finite"));
    }
    Ok(x)
}

fn parse_usize(key: &str, v: &str) -> Result<usize, ConfigError> {
    v.parse()
        .map_err(|_| invalid(key, format!("`{v}` is not a non-negative integer")))
}

fn parse_bool(key: &str, v: &str) -> Result<bool, ConfigError> {
    match v {
        "true" => Ok(true),
        "false" => Ok(false),
        _ => Err(invalid(key, format!("`{v}` is not `true` or `false`"))),
    }
}

fn join_f64(xs: &[f64]) -> String {
    xs.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(", ")
}

/// Every accepted key, in dump order.
pub const KEYS: &[&str] = &[
    "flow.U0",
    "flow.nu",
    "flow.k",
    "flow.decaying",
    "swimmer.v_s",
    "swimmer.B",
    "swimmer.dt",
    "env.action_interval",
    "env.episode_steps",
    "env.init_x",
    "env.init_y",
    "env.init_side",
    "env.init_theta",
    "train.alpha",
    "train.gamma",
    "train.episodes",
    "train.eps_initial",
    "train.eps_final",
    "train.eps_decay_episodes",
    "eval.n_swimmers",
    "eval.duration",
    "solver.N",
    "solver.L",
    "solver.dt",
    "solver.t_end",
    "solver.dealias",
    "solver.cfl",
    "solver.ic",
    "solver.snapshot_times",
    "seed",
    "output_dir",
];

impl RunConfig {
    fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        match key {
            "flow.U0" => self.flow_u0 = parse_f64(key, v)?,
            "flow.nu" => self.flow_nu = parse_f64(key, v)?,
            "flow.k" => self.flow_k = parse_f64(key, v)?,
            "flow.decaying" => self.flow_decaying = parse_bool(key, v)?,
            "swimmer.v_s" => self.swimmer_v_s = parse_f64(key, v)?,
            "swimmer.B" => self.swimmer_b = parse_f64(key, v)?,
            "swimmer.dt" => self.swimmer_dt = parse_f64(key, v)?,
            "env.action_interval" => self.env_action_interval = parse_f64(key, v)?,
            "env.episode_steps" => self.env_episode_steps = parse_usize(key, v)?,
            "env.init_x" => self.env_init_x = parse_f64(key, v)?,
            "env.init_y" => self.env_init_y = parse_f64(key, v)?,
            "env.init_side" => self.env_init_side = parse_f64(key, v)?,
            "env.init_theta" => {
                self.env_init_theta = match v {
                    "random" => None,
                    _ => Some(parse_f64(key, v)?),
                }
            }
            "train.alpha" => self.train_alpha = parse_f64(key, v)?,
            "train.gamma" => self.train_gamma = parse_f64(key, v)?,
            "train.episodes" => self.train_episodes = parse_usize(key, v)?,
            "train.eps_initial" => self.train_eps_initial = parse_f64(key, v)?,
            "train.eps_final" => self.train_eps_final = parse_f64(key, v)?,
            "train.eps_decay_episodes" => self.train_eps_decay_episodes = parse_usize(key, v)?,
            "eval.n_swimmers" => self.eval_n_swimmers = parse_usize(key, v)?,
            "eval.duration" => self.eval_duration = parse_f64(key, v)?,
            "solver.N" => self.solver_n = parse_usize(key, v)?,
            "solver.L" => self.solver_l = parse_f64(key, v)?,
            "solver.dt" => self.solver_dt = parse_f64(key, v)?,
            "solver.t_end" => self.solver_t_end = parse_f64(key, v)?,
            "solver.dealias" => self.solver_dealias = parse_bool(key, v)?,
            "solver.cfl" => {
                self.solver_cfl = match v {
                    "error" => CflPolicy::Error,
                    "warn" => CflPolicy::Warn,
                    _ => return Err(invalid(key, format!("`{v}` is not `error` or `warn`"))),
                }
            }
            "solver.ic" => {
                self.solver_ic = match v {
                    "taylor-green" => InitialCondition::TaylorGreen,
                    "zero" => InitialCondition::Zero,
                    _ => return Err(invalid(key, format!("`{v}` is not `taylor-green` or `zero`"))),
                }
            }
            "solver.snapshot_times" => {
                self.solver_snapshot_times = if v.is_empty() {
                    Vec::new()
                } else {
                    v.split(',').map(|s| parse_f64(key, s.trim())).collect::<Result<_, _>>()?
                }
            }
            "seed" => self.seed = v.parse().map_err(|_| invalid(key, format!("`{v}` is not a u64")))?,
            "output_dir" => self.output_dir = PathBuf::from(v),
            _ => unreachable!("key list and setter out of sync: {key}"),
        }
        Ok(())
    }

    fn get(&self, key: &str) -> String {
        match key {
            "flow.U0" => self.flow_u0.to_string(),
            "flow.nu" => self.flow_nu.to_string(),
            "flow.k" => self.flow_k.to_string(),
            "flow.decaying" => self.flow_decaying.to_string(),
            "swimmer.v_s" => self.swimmer_v_s.to_string(),
            "swimmer.B" => self.swimmer_b.to_string(),
            "swimmer.dt" => self.swimmer_dt.to_string(),
            "env.action_interval" => self.env_action_interval.to_string(),
            "env.episode_steps" => self.env_episode_steps.to_string(),
            "env.init_x" => self.env_init_x.to_string(),
            "env.init_y" => self.env_init_y.to_string(),
            "env.init_side" => self.env_init_side.to_string(),
            "env.init_theta" => self.env_init_theta.map_or("random".into(), |t| t.to_string()),
            "train.alpha" => self.train_alpha.to_string(),
            "train.gamma" => self.train_gamma.to_string(),
            "train.episodes" => self.train_episodes.to_string(),
            "train.eps_initial" => self.train_eps_initial.to_string(),
            "train.eps_final" => self.train_eps_final.to_string(),
            "train.eps_decay_episodes" => self.train_eps_decay_episodes.to_string(),
            "eval.n_swimmers" => self.eval_n_swimmers.to_string(),
            "eval.duration" => self.eval_duration.to_string(),
            "solver.N" => self.solver_n.to_string(),
            "solver.L" => self.solver_l.to_string(),
            "solver.dt" => self.solver_dt.to_string(),
            "solver.t_end" => self.solver_t_end.to_string(),
            "solver.dealias" => self.solver_dealias.to_string(),
            "solver.cfl" => match self.solver_cfl {
                CflPolicy::Error => "error".into(),
                CflPolicy::Warn => "warn".into(),
            },
            "solver.ic" => match self.solver_ic {
                InitialCondition::TaylorGreen => "taylor-green".into(),
                InitialCondition::Zero => "zero".into(),
            },
            "solver.snapshot_times" => join_f64(&self.solver_snapshot_times),
            "seed" => self.seed.to_string(),
            "output_dir" => self.output_dir.display().to_string(),
            _ => unreachable!("key list and getter out of sync: {key}"),
        }
    }

    /// Parses a config file on top of the defaults. Values are checked for
    /// syntax here; cross-field validation happens in [`RunConfig::validate`].
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = Self::default();
        let mut seen: Vec<&str> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() {
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line,
                text: raw.to_string(),
            })?;
            let (key, value) = (key.trim(), value.trim());
            let Some(&known) = KEYS.iter().find(|&&k| k == key) else {
                return Err(ConfigError::UnknownKey {
                    line,
                    key: key.to_string(),
                });
            };
            if seen.contains(&known) {
                return Err(ConfigError::Duplicate {
                    line,
                    key: key.to_string(),
                });
            }
            seen.push(known);
            cfg.set(known, value)?;
        }
        Ok(cfg)
    }

    /// Every key with its effective value.
    pub fn to_text(&self) -> String {
        let mut out = String::from("# effective cellflow configuration\n");
        for key in KEYS {
            out.push_str(&format!("{key} = {}\n", self.get(key)));
        }
        out
    }

    pub fn field(&self) -> Result<TaylorGreenField<f64>, ConfigError> {
        TaylorGreenField::new(self.flow_u0, self.flow_nu, self.flow_k, self.flow_decaying).map_err(|e| match e {
            cellflow_core::FlowError::InvalidParameter { name, reason } => invalid(&format!("flow.{name}"), reason),
            other => invalid("flow", other.to_string()),
        })
    }

    pub fn env_config(&self) -> Result<EnvConfig<f64>, ConfigError> {
        let swimmer = SwimmerParams {
            swim_speed: self.swimmer_v_s,
            alignment_time: self.swimmer_b,
            dt: self.swimmer_dt,
        };
        swimmer.validate().map_err(|e| match e {
            cellflow_core::swimmer::SwimmerError::InvalidParameter { name, reason } => {
                invalid(&format!("swimmer.{name}"), reason)
            }
            other => invalid("swimmer", other.to_string()),
        })?;
        let config = EnvConfig {
            field: self.field()?,
            swimmer,
            action_interval: self.env_action_interval,
            episode_steps: self.env_episode_steps,
            init_region: InitRegion {
                center_x: self.env_init_x,
                center_y: self.env_init_y,
                side: self.env_init_side,
            },
            init_theta: self.env_init_theta,
        };
        config
            .substeps()
            .map_err(|e| invalid("env.action_interval", e.to_string()))?;
        if self.env_episode_steps == 0 {
            return Err(invalid("env.episode_steps", "must be >= 1"));
        }
        config.validate().map_err(|e| invalid("env.init_side", e.to_string()))?;
        Ok(config)
    }

    pub fn hyperparams(&self) -> Result<Hyperparams<f64>, ConfigError> {
        let h = Hyperparams {
            alpha: self.train_alpha,
            gamma: self.train_gamma,
            episodes: self.train_episodes,
            eps_initial: self.train_eps_initial,
            eps_final: self.train_eps_final,
            eps_decay_episodes: self.train_eps_decay_episodes,
        };
        h.validate().map_err(|e| match e {
            cellflow_core::qlearning::QError::InvalidHyperparameter { name, reason } => {
                invalid(&format!("train.{name}"), reason)
            }
            other => invalid("train", other.to_string()),
        })?;
        Ok(h)
    }

    /// Decisions per evaluated swimmer.
    pub fn eval_decisions(&self) -> Result<usize, ConfigError> {
        let ratio = self.eval_duration / self.env_action_interval;
        let nearest = ratio.round();
        if !(self.eval_duration > 0.0) || (ratio - nearest).abs() > 1e-9 * nearest.max(1.0) {
            return Err(invalid(
                "eval.duration",
                format!(
                    "{} is not a positive whole multiple of env.action_interval {}",
                    self.eval_duration, self.env_action_interval
                ),
            ));
        }
        Ok(nearest as usize)
    }

    pub fn solver_config(&self) -> Result<SolverConfig<f64>, ConfigError> {
        if self.solver_n < 8 || !self.solver_n.is_multiple_of(2) {
            return Err(invalid("solver.N", "must be even and >= 8"));
        }
        if !(self.solver_l > 0.0) {
            return Err(invalid("solver.L", "must be > 0"));
        }
        if !(self.solver_dt > 0.0) {
            return Err(invalid("solver.dt", "must be > 0"));
        }
        if !(self.solver_t_end >= 0.0) {
            return Err(invalid("solver.t_end", "must be >= 0"));
        }
        if self.flow_nu < 0.0 {
            return Err(invalid("flow.nu", "must be >= 0"));
        }
        if let Some(t) = self
            .solver_snapshot_times
            .iter()
            .find(|&&t| !(0.0..=self.solver_t_end).contains(&t))
        {
            return Err(invalid(
                "solver.snapshot_times",
                format!("{t} lies outside [0, {}]", self.solver_t_end),
            ));
        }
        Ok(SolverConfig {
            n: self.solver_n,
            length: self.solver_l,
            viscosity: self.flow_nu,
            dt: self.solver_dt,
            dealias: self.solver_dealias,
            cfl_policy: self.solver_cfl,
        })
    }

    /// Checks every section so that no run starts on a bad file.
    pub fn validate(&self) -> Result<(), ConfigError> {
        self.env_config()?;
        self.hyperparams()?;
        if self.eval_n_swimmers == 0 {
            return Err(invalid("eval.n_swimmers", "must be >= 1"));
        }
        self.eval_decisions()?;
        self.solver_config()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_dump_and_reload_identically() {
        let cfg = RunConfig::default();
        cfg.validate().unwrap();
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn parses_comments_and_overrides() {
        let text = "# header\nflow.U0 = 2.5   # stronger\n\nswimmer.v_s=0.1\nenv.init_theta = 1.5\nsolver.snapshot_times = 0, 0.5\n";
        let cfg = RunConfig::parse(text).unwrap();
        assert_eq!(cfg.flow_u0, 2.5);
        assert_eq!(cfg.swimmer_v_s, 0.1);
        assert_eq!(cfg.env_init_theta, Some(1.5));
        assert_eq!(cfg.solver_snapshot_times, vec![0.0, 0.5]);
        assert_eq!(RunConfig::parse(&cfg.to_text()).unwrap(), cfg);
    }

    #[test]
    fn rejects_unknown_duplicate_and_malformed_lines() {
        assert!(matches!(
            RunConfig::parse("flow.u0 = 1"),
            Err(ConfigError::UnknownKey { line: 1, .. })
        ));
        assert!(matches!(
            RunConfig::parse("seed = 1\nseed = 2"),
            Err(ConfigError::Duplicate { line: 2, .. })
        ));
        assert!(matches!(RunConfig::parse("seed"), Err(ConfigError::Syntax { .. })));
        assert!(matches!(
            RunConfig::parse("flow.decaying = yes"),
            Err(ConfigError::Invalid { .. })
        ));
        assert!(matches!(RunConfig::parse("flow.nu = nan"), Err(ConfigError::Invalid { .. })));
    }

    #[test]
    fn validation_names_the_offending_key() {
        let key_of = |text: &str| match RunConfig::parse(text).unwrap().validate() {
            Err(ConfigError::Invalid { key, .. }) => key,
            other => panic!("{other:?}"),
        };
        assert_eq!(key_of("train.alpha = 0"), "train.alpha");
        assert_eq!(key_of("swimmer.B = 0.01"), "swimmer.dt");
        assert_eq!(key_of("flow.k = 0"), "flow.k");
        assert_eq!(key_of("env.action_interval = 0.015"), "env.action_interval");
        assert_eq!(key_of("eval.duration = 10.05"), "eval.duration");
        assert_eq!(key_of("solver.snapshot_times = 6"), "solver.snapshot_times");
        assert_eq!(key_of("train.eps_decay_episodes = 2000"), "train.eps_decay_episodes");
    }
}
