//! Episodic swimmer environment with discrete observations.
//!
//! Observations pair a three-level vorticity bin with a four-level heading
//! bin (12 states); actions pick one of four preferred swimming directions.
//! The reward for a decision is the change in unwrapped vertical position.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::flow::TaylorGreenField;
use crate::scalar::Real;
use crate::swimmer::{step_swimmer, SwimmerError, SwimmerParams, SwimmerState};

pub const NUM_STATES: usize = 12;
pub const NUM_ACTIONS: usize = 4;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EnvError {
    #[error("invalid environment configuration: {0}")]
    Config(String),
    #[error("step called before reset")]
    NotReset,
    #[error("step called after the episode finished")]
    EpisodeDone,
    #[error(transparent)]
    Swimmer(#[from] SwimmerError),
}

/// Preferred swimming direction. Discriminants match the heading bins.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Action {
    Right = 0,
    Up = 1,
    Left = 2,
    Down = 3,
}

impl Action {
    pub const ALL: [Action; NUM_ACTIONS] = [Action::Right, Action::Up, Action::Left, Action::Down];

    pub fn index(self) -> usize {
        self as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        Self::ALL.get(i).copied()
    }

    /// Commanded heading in radians.
    pub fn angle<T: Real>(self) -> T {
        T::FRAC_PI_2() * T::from_usize(self.index()).unwrap()
    }
}

/// Discretized `(vorticity, heading)` pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Observation {
    /// -1, 0 or +1.
    pub vort_bin: i8,
    /// 0 = right, 1 = up, 2 = left, 3 = down.
    pub head_bin: u8,
}

impl Observation {
    pub fn index(self) -> usize {
        (self.vort_bin + 1) as usize * 4 + self.head_bin as usize
    }

    pub fn from_index(i: usize) -> Option<Self> {
        (i < NUM_STATES).then(|| Observation {
            vort_bin: (i / 4) as i8 - 1,
            head_bin: (i % 4) as u8,
        })
    }

    pub fn all() -> impl Iterator<Item = Observation> {
        (0..NUM_STATES).filter_map(Observation::from_index)
    }
}

/// Heading quadrant centred on the cardinal directions; a boundary angle
/// belongs to the bin counterclockwise of it.
pub fn heading_bin<T: Real>(theta: T) -> u8 {
    let q = ((theta + T::FRAC_PI_4()) / T::FRAC_PI_2()).floor();
    let q = q.to_i64().unwrap_or(0);
    q.rem_euclid(4) as u8
}

/// Three-way vorticity bin with thresholds at a third of the current peak.
pub fn vorticity_bin<T: Real>(omega: T, field: &TaylorGreenField<T>, t: T) -> i8 {
    let threshold = field.peak_vorticity(t) / T::lit(3.0);
    if omega < -threshold {
        -1
    } else if omega > threshold {
        1
    } else {
        0
    }
}

pub fn encode_observation<T: Real>(s: &SwimmerState<T>, field: &TaylorGreenField<T>, t: T) -> Observation {
    let omega = field.vorticity_unchecked(s.x, s.y, t);
    Observation {
        vort_bin: vorticity_bin(omega, field, t),
        head_bin: heading_bin(s.theta),
    }
}

/// Axis-aligned square of initial positions.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitRegion<T> {
    pub center_x: T,
    pub center_y: T,
    pub side: T,
}

impl<T: Real> Default for InitRegion<T> {
    fn default() -> Self {
        Self {
            center_x: T::FRAC_PI_2(),
            center_y: T::FRAC_PI_2(),
            side: T::FRAC_PI_2(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvConfig<T> {
    pub field: TaylorGreenField<T>,
    pub swimmer: SwimmerParams<T>,
    /// Time between decisions; a whole multiple of `swimmer.dt`.
    pub action_interval: T,
    /// Decisions per episode.
    pub episode_steps: usize,
    pub init_region: InitRegion<T>,
    /// Fixed initial heading; uniform in `[0, 2 pi)` when `None`.
    pub init_theta: Option<T>,
}

impl<T: Real> Default for EnvConfig<T> {
    fn default() -> Self {
        Self {
            field: TaylorGreenField::default(),
            swimmer: SwimmerParams::default(),
            action_interval: T::lit(0.1),
            episode_steps: 1000,
            init_region: InitRegion::default(),
            init_theta: None,
        }
    }
}

impl<T: Real> EnvConfig<T> {
    /// Physical integration steps per decision.
    pub fn substeps(&self) -> Result<usize, EnvError> {
        let ratio = self.action_interval / self.swimmer.dt;
        let nearest = ratio.round();
        if !ratio.is_finite() || nearest < T::one() || (ratio - nearest).abs() > T::lit(1e-9) * nearest {
            return Err(EnvError::Config(format!(
                "action_interval {} is not a whole multiple of dt {}",
                self.action_interval, self.swimmer.dt
            )));
        }
        Ok(nearest.to_usize().unwrap())
    }

    pub fn validate(&self) -> Result<(), EnvError> {
        self.swimmer.validate()?;
        self.substeps()?;
        if self.episode_steps == 0 {
            return Err(EnvError::Config("episode_steps must be >= 1".into()));
        }
        let r = &self.init_region;
        if !(r.side >= T::zero()) || !r.side.is_finite() || r.side > self.field.period() {
            return Err(EnvError::Config(format!(
                "init region side {} must lie in [0, {}]",
                r.side,
                self.field.period()
            )));
        }
        if !(r.center_x.is_finite() && r.center_y.is_finite()) {
            return Err(EnvError::Config("init region center must be finite".into()));
        }
        if let Some(theta) = self.init_theta {
            if !theta.is_finite() {
                return Err(EnvError::Config("init_theta must be finite".into()));
            }
        }
        Ok(())
    }
}

/// One decision step. `state`/`next_state` are observation indices.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Transition<T> {
    pub state: usize,
    pub action: Action,
    pub reward: T,
    pub next_state: usize,
    /// The episode is over (time limit reached or absorbing state).
    pub done: bool,
    /// `next_state` is absorbing, so its value must not be bootstrapped.
    pub terminal: bool,
}

/// Discrete episodic environment over at most [`NUM_STATES`] states.
pub trait Environment {
    type Scalar: Real;

    /// Starts an episode from `seed` and returns the initial state index.
    fn reset(&mut self, seed: u64) -> usize;

    fn step(&mut self, action: Action) -> Result<Transition<Self::Scalar>, EnvError>;
}

pub struct SwimmerEnv<T: Real> {
    config: EnvConfig<T>,
    substeps: usize,
    swimmer: SwimmerState<T>,
    t: T,
    decisions: usize,
    started: bool,
}

impl<T: Real> SwimmerEnv<T> {
    pub fn new(config: EnvConfig<T>) -> Result<Self, EnvError> {
        config.validate()?;
        let substeps = config.substeps()?;
        Ok(Self {
            config,
            substeps,
            swimmer: SwimmerState::new(T::zero(), T::zero(), T::zero()),
            t: T::zero(),
            decisions: 0,
            started: false,
        })
    }

    pub fn config(&self) -> &EnvConfig<T> {
        &self.config
    }

    pub fn swimmer(&self) -> &SwimmerState<T> {
        &self.swimmer
    }

    pub fn time(&self) -> T {
        self.t
    }

    pub fn decisions(&self) -> usize {
        self.decisions
    }

    pub fn is_done(&self) -> bool {
        self.decisions >= self.config.episode_steps
    }

    pub fn observation(&self) -> Observation {
        encode_observation(&self.swimmer, &self.config.field, self.t)
    }

    /// Starts an episode from an explicit swimmer state.
    pub fn reset_to(&mut self, swimmer: SwimmerState<T>) -> Observation {
        self.swimmer = SwimmerState::new(swimmer.x, swimmer.y, swimmer.theta);
        self.t = T::zero();
        self.decisions = 0;
        self.started = true;
        self.observation()
    }

    /// Draws an initial state: position uniform in the init region,
    /// heading uniform in `[0, 2 pi)` unless fixed by the config.
    pub fn sample_initial(&self, seed: u64) -> SwimmerState<T> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let r = &self.config.init_region;
        let mut coord = |c: T| c + r.side * (T::lit(rng.gen::<f64>()) - T::half());
        let x = coord(r.center_x);
        let y = coord(r.center_y);
        let theta = match self.config.init_theta {
            Some(theta) => theta,
            None => T::TAU() * T::lit(rng.gen::<f64>()),
        };
        SwimmerState::new(x, y, theta)
    }

    fn advance(&mut self, action: Action) -> Result<T, EnvError> {
        if !self.started {
            return Err(EnvError::NotReset);
        }
        if self.is_done() {
            return Err(EnvError::EpisodeDone);
        }
        let preferred = action.angle::<T>();
        let y0 = self.swimmer.y;
        let mut s = self.swimmer;
        let dt = self.config.swimmer.dt;
        let start = T::from_usize(self.decisions * self.substeps).unwrap();
        for k in 0..self.substeps {
            let t = (start + T::from_usize(k).unwrap()) * dt;
            s = step_swimmer(&s, &self.config.swimmer, &self.config.field, preferred, t)?;
        }
        self.swimmer = s;
        self.decisions += 1;
        self.t = T::from_usize(self.decisions).unwrap() * self.config.action_interval;
        Ok(self.swimmer.y - y0)
    }
}

impl<T: Real> Environment for SwimmerEnv<T> {
    type Scalar = T;

    fn reset(&mut self, seed: u64) -> usize {
        let initial = self.sample_initial(seed);
        self.reset_to(initial).index()
    }

    fn step(&mut self, action: Action) -> Result<Transition<T>, EnvError> {
        let state = self.observation().index();
        let reward = self.advance(action)?;
        Ok(Transition {
            state,
            action,
            reward,
            next_state: self.observation().index(),
            done: self.is_done(),
            terminal: false,
        })
    }
}
