//! Frozen-policy evaluation of many independent swimmers.

use rayon::prelude::*;

use crate::env::{Action, EnvConfig, EnvError, Environment, SwimmerEnv};
use crate::qlearning::TabularPolicy;
use crate::scalar::Real;
use crate::seed::derive_seed;

/// Recorded state after `step` decisions, with the action and reward that
/// led into it (`None`/zero for the initial row).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrajectoryPoint<T> {
    pub step: usize,
    pub t: T,
    pub x: T,
    pub y: T,
    pub theta: T,
    pub omega: T,
    pub action: Option<Action>,
    pub reward: T,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory<T> {
    pub swimmer_id: usize,
    pub points: Vec<TrajectoryPoint<T>>,
}

impl<T: Real> Trajectory<T> {
    /// Net unwrapped vertical displacement.
    pub fn displacement(&self) -> T {
        match (self.points.first(), self.points.last()) {
            (Some(a), Some(b)) => b.y - a.y,
            _ => T::zero(),
        }
    }
}

/// Runs `n_swimmers` episodes of `decisions` steps each under `policy`.
/// Swimmer `i` is reset with `derive_seed(seed, i)`; the result is ordered
/// by swimmer id and independent of thread scheduling.
pub fn evaluate_policy<T: Real>(
    config: &EnvConfig<T>,
    policy: &TabularPolicy,
    n_swimmers: usize,
    decisions: usize,
    seed: u64,
) -> Result<Vec<Trajectory<T>>, EnvError> {
    let config = EnvConfig {
        episode_steps: decisions,
        ..*config
    };
    config.validate()?;
    (0..n_swimmers)
        .into_par_iter()
        .map(|id| {
            let mut env = SwimmerEnv::new(config)?;
            let mut state = env.reset(derive_seed(seed, id as u64));
            let mut points = Vec::with_capacity(decisions + 1);
            let record = |env: &SwimmerEnv<T>, action, reward| {
                let s = env.swimmer();
                TrajectoryPoint {
                    step: env.decisions(),
                    t: env.time(),
                    x: s.x,
                    y: s.y,
                    theta: s.theta,
                    omega: config.field.vorticity_unchecked(s.x, s.y, env.time()),
                    action,
                    reward,
                }
            };
            points.push(record(&env, None, T::zero()));
            loop {
                let action = policy.act(state);
                let tr = env.step(action)?;
                points.push(record(&env, Some(action), tr.reward));
                if tr.done {
                    break;
                }
                state = tr.next_state;
            }
            Ok(Trajectory { swimmer_id: id, points })
        })
        .collect()
}

/// Summary statistics of net displacements.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DisplacementStats<T> {
    pub count: usize,
    pub mean: T,
    pub median: T,
    pub std_error: T,
    pub fraction_positive: T,
}

pub fn displacement_stats<T: Real>(displacements: &[T]) -> DisplacementStats<T> {
    let n = displacements.len();
    if n == 0 {
        return DisplacementStats {
            count: 0,
            mean: T::nan(),
            median: T::nan(),
            std_error: T::nan(),
            fraction_positive: T::nan(),
        };
    }
    let nf = T::from_usize(n).unwrap();
    let mean = displacements.iter().fold(T::zero(), |a, &d| a + d) / nf;
    let var = if n > 1 {
        displacements.iter().fold(T::zero(), |a, &d| a + (d - mean) * (d - mean)) / T::from_usize(n - 1).unwrap()
    } else {
        T::zero()
    };
    let mut sorted = displacements.to_vec();
    sorted.sort_by(|a, b| a.partial_cmp(b).expect("finite displacements"));
    let median = if n % 2 == 1 {
        sorted[n / 2]
    } else {
        (sorted[n / 2 - 1] + sorted[n / 2]) * T::half()
    };
    let positive = displacements.iter().filter(|&&d| d > T::zero()).count();
    DisplacementStats {
        count: n,
        mean,
        median,
        std_error: (var / nf).sqrt(),
        fraction_positive: T::from_usize(positive).unwrap() / nf,
    }
}
