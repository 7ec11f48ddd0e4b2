//! Tabular Q-learning with a linearly annealed epsilon-greedy behaviour
//! policy, plus the greedy and always-up baseline policies.

use std::fmt::Write as _;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::env::{Action, EnvError, Environment, Transition, NUM_ACTIONS, NUM_STATES};
use crate::scalar::Real;
use crate::seed::derive_seed;

pub const QTABLE_HEADER: &str = "# cellflow-rl qtable v1";

/// Seed stream reserved for the action-selection generator.
const ACTION_STREAM: u64 = u64::MAX;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum QError {
    #[error("invalid hyperparameter `{name}`: {reason}")]
    InvalidHyperparameter { name: &'static str, reason: String },
    #[error("malformed qtable: {0}")]
    Parse(String),
    #[error(transparent)]
    Env(#[from] EnvError),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Hyperparams<T> {
    pub alpha: T,
    pub gamma: T,
    pub episodes: usize,
    pub eps_initial: T,
    pub eps_final: T,
    pub eps_decay_episodes: usize,
}

impl<T: Real> Default for Hyperparams<T> {
    fn default() -> Self {
        Self {
            alpha: T::lit(0.1),
            gamma: T::lit(0.9),
            episodes: 1000,
            eps_initial: T::one(),
            eps_final: T::lit(0.01),
            eps_decay_episodes: 700,
        }
    }
}

impl<T: Real> Hyperparams<T> {
    pub fn validate(&self) -> Result<(), QError> {
        let bad = |name, reason: &str| {
            Err(QError::InvalidHyperparameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.alpha > T::zero() && self.alpha <= T::one()) {
            return bad("alpha", "must lie in (0, 1]");
        }
        if !(self.gamma >= T::zero() && self.gamma < T::one()) {
            return bad("gamma", "must lie in [0, 1)");
        }
        let unit = |e: T| e >= T::zero() && e <= T::one();
        if !unit(self.eps_initial) {
            return bad("eps_initial", "must lie in [0, 1]");
        }
        if !unit(self.eps_final) {
            return bad("eps_final", "must lie in [0, 1]");
        }
        if self.eps_decay_episodes > self.episodes {
            return bad("eps_decay_episodes", "must not exceed episodes");
        }
        Ok(())
    }
}

/// Exploration rate for `episode`: linear from `eps_initial` at episode 0
/// to `eps_final` at `eps_decay_episodes`, constant afterwards.
pub fn epsilon<T: Real>(h: &Hyperparams<T>, episode: usize) -> T {
    if episode >= h.eps_decay_episodes {
        return h.eps_final;
    }
    let frac = T::from_usize(episode).unwrap() / T::from_usize(h.eps_decay_episodes).unwrap();
    h.eps_initial + (h.eps_final - h.eps_initial) * frac
}

#[derive(Debug, Clone, PartialEq)]
pub struct QTable<T> {
    pub values: [[T; NUM_ACTIONS]; NUM_STATES],
    pub visits: [[u64; NUM_ACTIONS]; NUM_STATES],
}

impl<T: Real> Default for QTable<T> {
    fn default() -> Self {
        Self {
            values: [[T::zero(); NUM_ACTIONS]; NUM_STATES],
            visits: [[0; NUM_ACTIONS]; NUM_STATES],
        }
    }
}

impl<T: Real> QTable<T> {
    pub fn get(&self, state: usize, action: Action) -> T {
        self.values[state][action.index()]
    }

    pub fn max_value(&self, state: usize) -> T {
        self.values[state].iter().copied().fold(T::neg_infinity(), T::max)
    }

    /// Highest-valued action; ties go to the lowest index.
    pub fn best_action(&self, state: usize) -> Action {
        let row = &self.values[state];
        let mut best = 0;
        for a in 1..NUM_ACTIONS {
            if row[a] > row[best] {
                best = a;
            }
        }
        Action::ALL[best]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().flatten().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// One-step Q-learning update; no bootstrap on terminal transitions.
    pub fn update(&mut self, tr: &Transition<T>, h: &Hyperparams<T>) {
        let bootstrap = if tr.terminal {
            T::zero()
        } else {
            h.gamma * self.max_value(tr.next_state)
        };
        let a = tr.action.index();
        let q = &mut self.values[tr.state][a];
        *q = *q + h.alpha * (tr.reward + bootstrap - *q);
        self.visits[tr.state][a] += 1;
    }

    /// Serializes values as the `qtable v1` text format.
    pub fn to_text(&self) -> String {
        let mut out = String::from(QTABLE_HEADER);
        out.push('\n');
        for row in &self.values {
            let cells: Vec<String> = row.iter().map(|v| v.to_string()).collect();
            let _ = writeln!(out, "{}", cells.join(" "));
        }
        out
    }

    /// Parses the `qtable v1` text format. Visit counts are not stored and
    /// come back as zero.
    pub fn from_text(text: &str) -> Result<Self, QError> {
        let mut lines = text.lines().filter(|l| !l.trim().is_empty());
        match lines.next() {
            Some(h) if h.trim_end() == QTABLE_HEADER => {}
            other => return Err(QError::Parse(format!("expected header `{QTABLE_HEADER}`, got {other:?}"))),
        }
        let mut table = Self::default();
        let mut rows = 0;
        for (i, line) in lines.enumerate() {
            if i >= NUM_STATES {
                return Err(QError::Parse(format!("more than {NUM_STATES} rows")));
            }
            let cells: Vec<&str> = line.split_whitespace().collect();
            if cells.len() != NUM_ACTIONS {
                return Err(QError::Parse(format!("row {i} has {} columns, expected {NUM_ACTIONS}", cells.len())));
            }
            for (a, cell) in cells.iter().enumerate() {
                let v: f64 = cell
                    .parse()
                    .map_err(|_| QError::Parse(format!("row {i}: `{cell}` is not a number")))?;
                if !v.is_finite() {
                    return Err(QError::Parse(format!("row {i}: non-finite value")));
                }
                table.values[i][a] = T::lit(v);
            }
            rows += 1;
        }
        if rows != NUM_STATES {
            return Err(QError::Parse(format!("found {rows} rows, expected {NUM_STATES}")));
        }
        Ok(table)
    }
}

/// Deterministic state-to-action map.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TabularPolicy {
    pub actions: [Action; NUM_STATES],
}

impl TabularPolicy {
    pub fn act(&self, state: usize) -> Action {
        self.actions[state]
    }
}

pub fn greedy_policy<T: Real>(q: &QTable<T>) -> TabularPolicy {
    let mut actions = [Action::Right; NUM_STATES];
    for (s, a) in actions.iter_mut().enumerate() {
        *a = q.best_action(s);
    }
    TabularPolicy { actions }
}

/// Baseline that always commands the upward direction.
pub fn naive_policy() -> TabularPolicy {
    TabularPolicy {
        actions: [Action::Up; NUM_STATES],
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingOutcome<T> {
    pub table: QTable<T>,
    /// Undiscounted return of each episode.
    pub returns: Vec<T>,
    /// Exploration rate used in each episode.
    pub epsilons: Vec<T>,
    /// Greedy/random choices actually executed, in order.
    pub actions: Vec<Action>,
}

/// Runs `h.episodes` epsilon-greedy episodes. Episode `e` resets the
/// environment with `derive_seed(seed, e)`; action sampling draws from its
/// own stream so results depend only on `(env, h, seed)`.
pub fn train<T, E>(env: &mut E, h: &Hyperparams<T>, seed: u64) -> Result<TrainingOutcome<T>, QError>
where
    T: Real,
    E: Environment<Scalar = T>,
{
    h.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(derive_seed(seed, ACTION_STREAM));
    let mut table = QTable::default();
    let mut returns = Vec::with_capacity(h.episodes);
    let mut epsilons = Vec::with_capacity(h.episodes);
    let mut actions = Vec::new();
    let mut reward_bound = T::zero();

    for episode in 0..h.episodes {
        let eps = epsilon(h, episode);
        let eps_f64 = eps.to_f64_lossy();
        let mut state = env.reset(derive_seed(seed, episode as u64));
        let mut total = T::zero();
        loop {
            let action = if rng.gen::<f64>() < eps_f64 {
                Action::ALL[rng.gen_range(0..NUM_ACTIONS)]
            } else {
                table.best_action(state)
            };
            let tr = env.step(action)?;
            table.update(&tr, h);
            reward_bound = reward_bound.max(tr.reward.abs());
            debug_assert!(
                table.get(tr.state, action).abs()
                    <= reward_bound / (T::one() - h.gamma) * T::lit(1.0 + 1e-9),
                "Q-value escaped the r_max / (1 - gamma) bound"
            );
            actions.push(action);
            total = total + tr.reward;
            if tr.done {
                break;
            }
            state = tr.next_state;
        }
        returns.push(total);
        epsilons.push(eps);
    }
    Ok(TrainingOutcome {
        table,
        returns,
        epsilons,
        actions,
    })
}
