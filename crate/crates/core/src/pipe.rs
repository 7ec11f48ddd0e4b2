//! Poiseuille pipe profile and the volume-weighted disturbance norm.

use thiserror::Error;

use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PipeError {
    #[error("invalid pipe parameter `{name}`: {reason}")]
    InvalidParameter { name: &'static str, reason: String },
    #[error("radius {r} outside [0, {radius}]")]
    OutOfDomain { r: f64, radius: f64 },
    #[error("empty sample grid")]
    EmptyGrid,
    #[error("expected {expected} samples, got {got}")]
    SampleCount { expected: usize, got: usize },
    #[error("non-finite sample at index {0}")]
    NonFinite(usize),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PipeProfile<T> {
    pub radius: T,
    pub centerline_speed: T,
}

impl<T: Real> PipeProfile<T> {
    pub fn new(radius: T, centerline_speed: T) -> Result<Self, PipeError> {
        if !(radius > T::zero()) || !radius.is_finite() {
            return Err(PipeError::InvalidParameter {
                name: "R",
                reason: format!("must be positive, got {radius}"),
            });
        }
        if !(centerline_speed > T::zero()) || !centerline_speed.is_finite() {
            return Err(PipeError::InvalidParameter {
                name: "U0",
                reason: format!("must be positive, got {centerline_speed}"),
            });
        }
        Ok(Self {
            radius,
            centerline_speed,
        })
    }

    /// Axial speed `U0 (1 - (r/R)^2)`.
    pub fn poiseuille(&self, r: T) -> Result<T, PipeError> {
        if !(r >= T::zero() && r <= self.radius) {
            return Err(PipeError::OutOfDomain {
                r: r.to_f64_lossy(),
                radius: self.radius.to_f64_lossy(),
            });
        }
        let s = r / self.radius;
        Ok(self.centerline_speed * (T::one() - s * s))
    }
}

/// Cell-centred `(r, theta, z)` grid over a pipe segment `z in [0, length]`.
/// Samples are midpoint values, so the weighted sum is midpoint quadrature.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CylindricalGrid<T> {
    pub nr: usize,
    pub ntheta: usize,
    pub nz: usize,
    pub radius: T,
    pub length: T,
}

impl<T: Real> CylindricalGrid<T> {
    pub fn len(&self) -> usize {
        self.nr * self.ntheta * self.nz
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn dr(&self) -> T {
        self.radius / T::from_usize(self.nr).unwrap()
    }

    /// Radius of the `i`-th cell centre.
    pub fn r(&self, i: usize) -> T {
        (T::from_usize(i).unwrap() + T::half()) * self.dr()
    }

    /// Flat sample index; `z` varies fastest, then `theta`, then `r`.
    pub fn index(&self, ir: usize, itheta: usize, iz: usize) -> usize {
        (ir * self.ntheta + itheta) * self.nz + iz
    }

    pub fn volume(&self) -> T {
        T::PI() * self.radius * self.radius * self.length
    }

    /// Fills every cell with `f(r, theta, z)` at its centre.
    pub fn sample(&self, mut f: impl FnMut(T, T, T) -> T) -> Vec<T> {
        let dtheta = T::TAU() / T::from_usize(self.ntheta).unwrap();
        let dz = self.length / T::from_usize(self.nz).unwrap();
        let mut out = Vec::with_capacity(self.len());
        for ir in 0..self.nr {
            let r = self.r(ir);
            for it in 0..self.ntheta {
                let th = (T::from_usize(it).unwrap() + T::half()) * dtheta;
                for iz in 0..self.nz {
                    out.push(f(r, th, (T::from_usize(iz).unwrap() + T::half()) * dz));
                }
            }
        }
        out
    }
}

/// Discrete `||u - U0 (1 - (r/R)^2)||_2` with cell volumes `r dr dtheta dz`.
pub fn disturbance_norm<T: Real>(
    samples: &[T],
    grid: &CylindricalGrid<T>,
    profile: &PipeProfile<T>,
) -> Result<T, PipeError> {
    if grid.is_empty() {
        return Err(PipeError::EmptyGrid);
    }
    if samples.len() != grid.len() {
        return Err(PipeError::SampleCount {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    if !(grid.length > T::zero()) || (grid.radius - profile.radius).abs() > T::epsilon() * profile.radius {
        return Err(PipeError::InvalidParameter {
            name: "grid",
            reason: "grid must span the profile radius and a positive length".into(),
        });
    }
    let dr = grid.dr();
    let dtheta = T::TAU() / T::from_usize(grid.ntheta).unwrap();
    let dz = grid.length / T::from_usize(grid.nz).unwrap();
    let mut sum = T::zero();
    for ir in 0..grid.nr {
        let r = grid.r(ir);
        let base = profile.poiseuille(r)?;
        let weight = r * dr * dtheta * dz;
        for it in 0..grid.ntheta {
            for iz in 0..grid.nz {
                let idx = grid.index(ir, it, iz);
                let u = samples[idx];
                if !u.is_finite() {
                    return Err(PipeError::NonFinite(idx));
                }
                let d = u - base;
                sum = sum + d * d * weight;
            }
        }
    }
    Ok(sum.sqrt())
}
