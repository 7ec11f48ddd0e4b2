//! Closed-form Taylor–Green cellular flows.
//!
//! The streamfunction `psi = -(U0/k) cos(kx) cos(ky) D(t)` generates the
//! whole family: velocity `(u, v) = (dpsi/dy, -dpsi/dx)` and vorticity
//! `omega = -lap(psi) = -2 U0 k cos(kx) cos(ky) D(t)`. For the decaying
//! variant `D(t) = exp(-2 nu k^2 t)`, which makes the field an exact
//! solution of the incompressible Navier–Stokes equations (the nonlinear
//! term is a pure gradient); the stationary variant has `D = 1`.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FlowError {
    #[error("invalid flow parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("non-finite evaluation point (x={x}, y={y}, t={t})")]
    NonFinite { x: f64, y: f64, t: f64 },
    #[error("negative evaluation time t={0}")]
    NegativeTime(f64),
}

/// Analytic Taylor–Green flow descriptor.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaylorGreenField<T> {
    amplitude: T,
    viscosity: T,
    wavenumber: T,
    decaying: bool,
    domain_length: T,
}

/// Velocity, vorticity and streamfunction at one point.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FlowSample<T> {
    pub u: T,
    pub v: T,
    pub omega: T,
    pub psi: T,
}

impl<T: Real> Default for TaylorGreenField<T> {
    fn default() -> Self {
        Self {
            amplitude: T::one(),
            viscosity: T::lit(1e-2),
            wavenumber: T::one(),
            decaying: false,
            domain_length: T::lit(4.0) * T::PI(),
        }
    }
}

impl<T: Real> TaylorGreenField<T> {
    /// Validated constructor. `amplitude` may be zero (quiescent fluid).
    pub fn new(amplitude: T, viscosity: T, wavenumber: T, decaying: bool) -> Result<Self, FlowError> {
        let field = Self {
            amplitude,
            viscosity,
            wavenumber,
            decaying,
            ..Self::default()
        };
        field.validate()?;
        Ok(field)
    }

    pub fn stationary(amplitude: T) -> Result<Self, FlowError> {
        Self::new(amplitude, T::zero(), T::one(), false)
    }

    pub fn decaying(amplitude: T, viscosity: T) -> Result<Self, FlowError> {
        Self::new(amplitude, viscosity, T::one(), true)
    }

    /// Sets the domain period hint used by solvers and renderers.
    pub fn with_domain_length(mut self, length: T) -> Result<Self, FlowError> {
        self.domain_length = length;
        self.validate()?;
        Ok(self)
    }

    fn validate(&self) -> Result<(), FlowError> {
        let bad = |name, reason: &str| {
            Err(FlowError::InvalidParameter {
                name,
                reason: reason.to_string(),
            })
        };
        if !(self.amplitude >= T::zero()) || !self.amplitude.is_finite() {
            return bad("U0", "must be finite and >= 0");
        }
        if !(self.viscosity >= T::zero()) || !self.viscosity.is_finite() {
            return bad("nu", "must be finite and >= 0");
        }
        if !(self.wavenumber > T::zero()) || !self.wavenumber.is_finite() {
            return bad("k", "must be finite and > 0");
        }
        if !(self.domain_length > T::zero()) || !self.domain_length.is_finite() {
            return bad("L", "must be finite and > 0");
        }
        Ok(())
    }

    pub fn amplitude(&self) -> T {
        self.amplitude
    }

    pub fn viscosity(&self) -> T {
        self.viscosity
    }

    pub fn wavenumber(&self) -> T {
        self.wavenumber
    }

    pub fn is_decaying(&self) -> bool {
        self.decaying
    }

    pub fn domain_length(&self) -> T {
        self.domain_length
    }

    /// Spatial period `2 pi / k` in both directions.
    pub fn period(&self) -> T {
        T::two() * T::PI() / self.wavenumber
    }

    /// Number of counter-rotating cells (each `pi/k` wide) in the square
    /// domain of side `domain_length`. Diagnostic only.
    pub fn vortex_count(&self) -> T {
        let per_side = self.domain_length * self.wavenumber / T::PI();
        per_side * per_side
    }

    /// Amplitude factor `D(t)`; identically one for the stationary flow.
    pub fn decay_factor(&self, t: T) -> T {
        if self.decaying {
            (-T::two() * self.viscosity * self.wavenumber * self.wavenumber * t).exp()
        } else {
            T::one()
        }
    }

    /// Largest attainable |omega| at time `t`.
    pub fn peak_vorticity(&self, t: T) -> T {
        T::two() * self.amplitude * self.wavenumber * self.decay_factor(t)
    }

    fn check(&self, x: T, y: T, t: T) -> Result<(), FlowError> {
        if !(x.is_finite() && y.is_finite() && t.is_finite()) {
            return Err(FlowError::NonFinite {
                x: x.to_f64_lossy(),
                y: y.to_f64_lossy(),
                t: t.to_f64_lossy(),
            });
        }
        if t < T::zero() {
            return Err(FlowError::NegativeTime(t.to_f64_lossy()));
        }
        Ok(())
    }

    pub fn velocity(&self, x: T, y: T, t: T) -> Result<(T, T), FlowError> {
        self.check(x, y, t)?;
        Ok(self.velocity_unchecked(x, y, t))
    }

    pub fn vorticity(&self, x: T, y: T, t: T) -> Result<T, FlowError> {
        self.check(x, y, t)?;
        Ok(self.vorticity_unchecked(x, y, t))
    }

    pub fn streamfunction(&self, x: T, y: T, t: T) -> Result<T, FlowError> {
        self.check(x, y, t)?;
        Ok(self.streamfunction_unchecked(x, y, t))
    }

    pub fn sample(&self, x: T, y: T, t: T) -> Result<FlowSample<T>, FlowError> {
        self.check(x, y, t)?;
        let (u, v) = self.velocity_unchecked(x, y, t);
        Ok(FlowSample {
            u,
            v,
            omega: self.vorticity_unchecked(x, y, t),
            psi: self.streamfunction_unchecked(x, y, t),
        })
    }

    /// Velocity without argument validation, for integrator inner loops.
    #[inline]
    pub fn velocity_unchecked(&self, x: T, y: T, t: T) -> (T, T) {
        let k = self.wavenumber;
        let (sx, cx) = (k * x).sin_cos();
        let (sy, cy) = (k * y).sin_cos();
        let a = self.amplitude * self.decay_factor(t);
        (a * cx * sy, -(a * sx * cy))
    }

    #[inline]
    pub fn vorticity_unchecked(&self, x: T, y: T, t: T) -> T {
        let k = self.wavenumber;
        -(T::two() * self.amplitude * k * self.decay_factor(t)) * (k * x).cos() * (k * y).cos()
    }

    #[inline]
    pub fn streamfunction_unchecked(&self, x: T, y: T, t: T) -> T {
        let k = self.wavenumber;
        -(self.amplitude / k * self.decay_factor(t)) * (k * x).cos() * (k * y).cos()
    }
}
