//! Self-propelled point swimmer in a Taylor–Green flow.
//!
//! The swimmer is advected by the local velocity, swims at speed `v_s`
//! along its heading, is rotated at half the local vorticity and relaxes
//! toward a commanded preferred direction on the timescale `B`:
//!
//! ```text
//! dx/dt     = u + v_s cos(theta)
//! dy/dt     = v + v_s sin(theta)
//! dtheta/dt = omega / 2 + sin(preferred - theta) / (2 B)
//! ```
//!
//! Positions are never wrapped; the flow is periodic so it can be sampled
//! anywhere, and the reward needs the unwrapped vertical coordinate.

use thiserror::Error;

use crate::flow::TaylorGreenField;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SwimmerError {
    #[error("invalid swimmer parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("swimmer state became non-finite at t={t}")]
    NonFinite { t: f64 },
    #[error("negative time t={0}")]
    NegativeTime(f64),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwimmerParams<T> {
    /// Swim speed.
    pub swim_speed: T,
    /// Alignment timescale `B`.
    pub alignment_time: T,
    /// Integration step.
    pub dt: T,
}

impl<T: Real> Default for SwimmerParams<T> {
    fn default() -> Self {
        Self {
            swim_speed: T::lit(0.3),
            alignment_time: T::one(),
            dt: T::lit(1e-2),
        }
    }
}

impl<T: Real> SwimmerParams<T> {
    pub fn validate(&self) -> Result<(), SwimmerError> {
        let bad = |name, reason: &str| {
            Err(SwimmerError::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.swim_speed >= T::zero()) || !self.swim_speed.is_finite() {
            return bad("v_s", "must be finite and >= 0");
        }
        if !(self.alignment_time > T::zero()) || !self.alignment_time.is_finite() {
            return bad("B", "must be finite and > 0");
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return bad("dt", "must be finite and > 0");
        }
        if self.dt > self.alignment_time / T::lit(5.0) {
            return bad("dt", "must not exceed B/5");
        }
        Ok(())
    }
}

/// Unwrapped position and heading in `[0, 2 pi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SwimmerState<T> {
    pub x: T,
    pub y: T,
    pub theta: T,
}

/// Maps any finite angle into `[0, 2 pi)`.
pub fn normalize_angle<T: Real>(theta: T) -> T {
    let tau = T::TAU();
    let r = theta % tau;
    let r = if r < T::zero() { r + tau } else { r };
    // `r + tau` can round up to tau for tiny negative remainders
    if r >= tau {
        T::zero()
    } else {
        r
    }
}

impl<T: Real> SwimmerState<T> {
    pub fn new(x: T, y: T, theta: T) -> Self {
        Self {
            x,
            y,
            theta: normalize_angle(theta),
        }
    }

    fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.theta.is_finite()
    }
}

/// Generic classical RK4 step of the (x, y, theta) system.
fn rk4<T: Real>(s: SwimmerState<T>, t: T, dt: T, rhs: impl Fn(T, T, T, T) -> (T, T, T)) -> SwimmerState<T> {
    let h2 = dt * T::half();
    let (k1x, k1y, k1t) = rhs(s.x, s.y, s.theta, t);
    let (k2x, k2y, k2t) = rhs(s.x + h2 * k1x, s.y + h2 * k1y, s.theta + h2 * k1t, t + h2);
    let (k3x, k3y, k3t) = rhs(s.x + h2 * k2x, s.y + h2 * k2y, s.theta + h2 * k2t, t + h2);
    let (k4x, k4y, k4t) = rhs(s.x + dt * k3x, s.y + dt * k3y, s.theta + dt * k3t, t + dt);
    let sixth = dt / T::lit(6.0);
    SwimmerState {
        x: s.x + sixth * (k1x + T::two() * (k2x + k3x) + k4x),
        y: s.y + sixth * (k1y + T::two() * (k2y + k3y) + k4y),
        theta: normalize_angle(s.theta + sixth * (k1t + T::two() * (k2t + k3t) + k4t)),
    }
}

/// Instantaneous `(dx/dt, dy/dt, dtheta/dt)` of a steered swimmer.
pub fn swimmer_rates<T: Real>(
    s: &SwimmerState<T>,
    p: &SwimmerParams<T>,
    field: &TaylorGreenField<T>,
    preferred: T,
    t: T,
) -> (T, T, T) {
    rates(s.x, s.y, s.theta, t, p, field, preferred)
}

#[inline]
fn rates<T: Real>(
    x: T,
    y: T,
    theta: T,
    t: T,
    p: &SwimmerParams<T>,
    field: &TaylorGreenField<T>,
    preferred: T,
) -> (T, T, T) {
    let (u, v) = field.velocity_unchecked(x, y, t);
    let omega = field.vorticity_unchecked(x, y, t);
    let (s, c) = theta.sin_cos();
    let turn = omega * T::half() + (preferred - theta).sin() / (T::two() * p.alignment_time);
    (u + p.swim_speed * c, v + p.swim_speed * s, turn)
}

/// One RK4 step of length `p.dt` for a swimmer steering toward `preferred`.
pub fn step_swimmer<T: Real>(
    s: &SwimmerState<T>,
    p: &SwimmerParams<T>,
    field: &TaylorGreenField<T>,
    preferred: T,
    t: T,
) -> Result<SwimmerState<T>, SwimmerError> {
    if t < T::zero() {
        return Err(SwimmerError::NegativeTime(t.to_f64_lossy()));
    }
    let next = rk4(*s, t, p.dt, |x, y, th, tt| rates(x, y, th, tt, p, field, preferred));
    if !next.is_finite() || !s.is_finite() {
        return Err(SwimmerError::NonFinite {
            t: (t + p.dt).to_f64_lossy(),
        });
    }
    Ok(next)
}

/// One RK4 step of a passive tracer; the heading is carried unchanged.
pub fn advect_tracer<T: Real>(
    s: &SwimmerState<T>,
    field: &TaylorGreenField<T>,
    t: T,
    dt: T,
) -> Result<SwimmerState<T>, SwimmerError> {
    if t < T::zero() {
        return Err(SwimmerError::NegativeTime(t.to_f64_lossy()));
    }
    let next = rk4(*s, t, dt, |x, y, _, tt| {
        let (u, v) = field.velocity_unchecked(x, y, tt);
        (u, v, T::zero())
    });
    if !next.is_finite() || !s.is_finite() {
        return Err(SwimmerError::NonFinite {
            t: (t + dt).to_f64_lossy(),
        });
    }
    Ok(next)
}
