//! Fourier pseudo-spectral solver for 2D incompressible Navier–Stokes in
//! vorticity–streamfunction form on a doubly periodic square:
//!
//! ```text
//! d(omega)/dt + u . grad(omega) = nu lap(omega),   -lap(psi) = omega,
//! u = d(psi)/dy,  v = -d(psi)/dx
//! ```
//!
//! Time integration is fourth-order Runge–Kutta on the advection term with
//! an exact integrating factor `exp(-nu |k|^2 dt)` for diffusion. The
//! quadratic product is dealiased with the 2/3 rule when enabled.
//!
//! Spectral arrays are stored row-major with the row index running over
//! `y` and the column index over `x`, and use the unnormalized forward DFT
//! convention (the inverse carries the `1/N^2`).

use std::io::{self, Write};
use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

use crate::flow::TaylorGreenField;
use crate::scalar::Real;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SolverError {
    #[error("invalid solver configuration: {0}")]
    Config(String),
    #[error("flow period {period} does not tile the domain of side {length}")]
    IncompatiblePeriod { period: f64, length: f64 },
    #[error("flow wavenumber index {index} is not resolved on an N={n} grid")]
    Unresolved { index: usize, n: usize },
    #[error("CFL number {courant:.3e} exceeds 0.5 (dt too large for the initial velocity)")]
    Cfl { courant: f64 },
    #[error("solution diverged at step {step} (t={t})")]
    Divergence { step: u64, t: f64 },
    #[error("grid has {got} values, expected {expected}")]
    GridSize { got: usize, expected: usize },
    #[error("requested time {target} is not reachable from t={from} in whole steps of dt={dt}")]
    Schedule { target: f64, from: f64, dt: f64 },
}

/// What to do when the initial state violates the CFL bound.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CflPolicy {
    #[default]
    Error,
    Warn,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig<T> {
    /// Grid points per side.
    pub n: usize,
    /// Domain side length.
    pub length: T,
    pub viscosity: T,
    pub dt: T,
    pub dealias: bool,
    pub cfl_policy: CflPolicy,
}

impl<T: Real> Default for SolverConfig<T> {
    fn default() -> Self {
        Self {
            n: 64,
            length: T::lit(4.0) * T::PI(),
            viscosity: T::lit(1e-2),
            dt: T::lit(1e-2),
            dealias: true,
            cfl_policy: CflPolicy::Error,
        }
    }
}

impl<T: Real> SolverConfig<T> {
    pub fn validate(&self) -> Result<(), SolverError> {
        if self.n < 8 || !self.n.is_multiple_of(2) {
            return Err(SolverError::Config(format!("N must be even and >= 8, got {}", self.n)));
        }
        if !(self.length > T::zero()) || !self.length.is_finite() {
            return Err(SolverError::Config(format!("L must be positive, got {}", self.length)));
        }
        if !(self.dt > T::zero()) || !self.dt.is_finite() {
            return Err(SolverError::Config(format!("dt must be positive, got {}", self.dt)));
        }
        if !(self.viscosity >= T::zero()) || !self.viscosity.is_finite() {
            return Err(SolverError::Config(format!("nu must be >= 0, got {}", self.viscosity)));
        }
        Ok(())
    }

    /// Grid spacing `L / N`.
    pub fn spacing(&self) -> T {
        self.length / T::from_usize(self.n).unwrap()
    }
}

/// Fourier coefficients of vorticity at time `t`.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralState<T> {
    pub omega_hat: Vec<Complex<T>>,
    pub t: T,
    pub steps: u64,
}

/// Real field sampled on the solver's uniform grid, row-major (`y` rows).
#[derive(Debug, Clone, PartialEq)]
pub struct ScalarGrid<T> {
    pub n: usize,
    pub length: T,
    pub values: Vec<T>,
}

impl<T: Real> ScalarGrid<T> {
    /// Evaluates `f(x_i, y_j)` at the nodes `x_i = i L / N`.
    pub fn from_fn(n: usize, length: T, mut f: impl FnMut(T, T) -> T) -> Self {
        let h = length / T::from_usize(n).unwrap();
        let mut values = Vec::with_capacity(n * n);
        for j in 0..n {
            let y = T::from_usize(j).unwrap() * h;
            for i in 0..n {
                values.push(f(T::from_usize(i).unwrap() * h, y));
            }
        }
        Self { n, length, values }
    }

    #[inline]
    pub fn at(&self, i: usize, j: usize) -> T {
        self.values[j * self.n + i]
    }

    pub fn max_abs(&self) -> T {
        self.values.iter().fold(T::zero(), |m, v| m.max(v.abs()))
    }

    /// Writes the snapshot CSV: a `# t=<t> N=<N> L=<L>` header followed by
    /// one line per grid row (constant `y`), values in full precision.
    pub fn write_csv<W: Write>(&self, t: T, mut w: W) -> io::Result<()> {
        writeln!(w, "# t={} N={} L={}", t, self.n, self.length)?;
        for row in self.values.chunks(self.n) {
            let mut first = true;
            for v in row {
                if !first {
                    w.write_all(b",")?;
                }
                first = false;
                write!(w, "{}", v)?;
            }
            w.write_all(b"\n")?;
        }
        Ok(())
    }
}

/// Pointwise comparison of a solver state with the analytic field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorReport<T> {
    pub max_error: T,
    /// Continuous L2 norm of the vorticity error, `sqrt(sum err^2 dA)`.
    pub l2_error: T,
}

/// Row/column 2D FFT on an `n x n` row-major buffer.
struct Fft2<T: Real> {
    n: usize,
    forward: Arc<dyn Fft<T>>,
    inverse: Arc<dyn Fft<T>>,
}

impl<T: Real> Fft2<T> {
    fn new(n: usize) -> Self {
        let mut planner = FftPlanner::new();
        Self {
            n,
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        }
    }

    fn transpose(&self, data: &mut [Complex<T>]) {
        let n = self.n;
        for j in 0..n {
            for i in (j + 1)..n {
                data.swap(j * n + i, i * n + j);
            }
        }
    }

    fn run(&self, plan: &Arc<dyn Fft<T>>, data: &mut [Complex<T>]) {
        plan.process(data);
        self.transpose(data);
        plan.process(data);
        self.transpose(data);
    }

    fn forward(&self, data: &mut [Complex<T>]) {
        self.run(&self.forward, data);
    }

    /// Normalized inverse.
    fn inverse(&self, data: &mut [Complex<T>]) {
        self.run(&self.inverse, data);
        let scale = T::one() / T::from_usize(self.n * self.n).unwrap();
        for c in data.iter_mut() {
            *c = *c * scale;
        }
    }
}

/// Signed integer mode number of DFT index `i` (Nyquist reported as `-n/2`).
fn mode_number(i: usize, n: usize) -> i64 {
    if i < n / 2 {
        i as i64
    } else {
        i as i64 - n as i64
    }
}

pub struct SpectralSolver<T: Real> {
    config: SolverConfig<T>,
    fft: Fft2<T>,
    /// Physical wavenumber per index, Nyquist zeroed (odd derivatives).
    k_deriv: Vec<T>,
    /// `|k|^2` per 2D index, Nyquist included.
    k_squared: Vec<T>,
    /// 1 inside the retained band, 0 outside.
    mask: Vec<T>,
    decay_full: Vec<T>,
    decay_half: Vec<T>,
    work: [Vec<Complex<T>>; 4],
}

impl<T: Real> SpectralSolver<T> {
    pub fn new(config: SolverConfig<T>) -> Result<Self, SolverError> {
        config.validate()?;
        let n = config.n;
        let base = T::two() * T::PI() / config.length;
        let k_full: Vec<T> = (0..n)
            .map(|i| T::from_i64(mode_number(i, n)).unwrap() * base)
            .collect();
        let k_deriv: Vec<T> = (0..n)
            .map(|i| if i == n / 2 { T::zero() } else { k_full[i] })
            .collect();
        let keep_1d: Vec<bool> = (0..n)
            .map(|i| {
                let m = mode_number(i, n).unsigned_abs() as usize;
                if config.dealias {
                    3 * m <= n && i != n / 2
                } else {
                    true
                }
            })
            .collect();

        let mut k_squared = vec![T::zero(); n * n];
        let mut mask = vec![T::zero(); n * n];
        let mut decay_full = vec![T::zero(); n * n];
        let mut decay_half = vec![T::zero(); n * n];
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let k2 = k_full[i] * k_full[i] + k_full[j] * k_full[j];
                k_squared[idx] = k2;
                if keep_1d[i] && keep_1d[j] {
                    mask[idx] = T::one();
                }
                decay_full[idx] = (-config.viscosity * k2 * config.dt).exp();
                decay_half[idx] = (-config.viscosity * k2 * config.dt * T::half()).exp();
            }
        }
        let zero = vec![Complex::new(T::zero(), T::zero()); n * n];
        Ok(Self {
            config,
            fft: Fft2::new(n),
            k_deriv,
            k_squared,
            mask,
            decay_full,
            decay_half,
            work: [zero.clone(), zero.clone(), zero.clone(), zero],
        })
    }

    pub fn config(&self) -> &SolverConfig<T> {
        &self.config
    }

    fn n(&self) -> usize {
        self.config.n
    }

    /// Zero vorticity at t = 0.
    pub fn zero_state(&self) -> SpectralState<T> {
        SpectralState {
            omega_hat: vec![Complex::new(T::zero(), T::zero()); self.n() * self.n()],
            t: T::zero(),
            steps: 0,
        }
    }

    /// Samples the analytic vorticity at t = 0 on the grid and transforms it.
    pub fn init_from_field(&self, field: &TaylorGreenField<T>) -> Result<SpectralState<T>, SolverError> {
        self.check_field(field)?;
        let grid = ScalarGrid::from_fn(self.n(), self.config.length, |x, y| {
            field.vorticity_unchecked(x, y, T::zero())
        });
        self.from_vorticity_grid(&grid)
    }

    /// Builds a state from physical-space vorticity. The mean is removed:
    /// a doubly periodic flow carries no net circulation.
    pub fn from_vorticity_grid(&self, grid: &ScalarGrid<T>) -> Result<SpectralState<T>, SolverError> {
        let n = self.n();
        if grid.values.len() != n * n {
            return Err(SolverError::GridSize {
                got: grid.values.len(),
                expected: n * n,
            });
        }
        let mut omega_hat: Vec<Complex<T>> = grid
            .values
            .iter()
            .map(|&w| Complex::new(w, T::zero()))
            .collect();
        self.fft.forward(&mut omega_hat);
        omega_hat[0] = Complex::new(T::zero(), T::zero());
        let state = SpectralState {
            omega_hat,
            t: T::zero(),
            steps: 0,
        };
        self.check_cfl(&state)?;
        Ok(state)
    }

    fn check_field(&self, field: &TaylorGreenField<T>) -> Result<(), SolverError> {
        let cycles = field.wavenumber() * self.config.length / (T::two() * T::PI());
        let nearest = cycles.round();
        let tol = T::lit(1e-9) * T::one().max(cycles);
        if nearest < T::one() || (cycles - nearest).abs() > tol {
            return Err(SolverError::IncompatiblePeriod {
                period: field.period().to_f64_lossy(),
                length: self.config.length.to_f64_lossy(),
            });
        }
        let index = nearest.to_usize().unwrap_or(usize::MAX);
        let resolved = if self.config.dealias {
            3 * index <= self.n() && 2 * index < self.n()
        } else {
            2 * index < self.n()
        };
        if !resolved {
            return Err(SolverError::Unresolved { index, n: self.n() });
        }
        Ok(())
    }

    /// Courant number `dt max|u| N / L` of a state.
    pub fn courant(&self, state: &SpectralState<T>) -> T {
        let (u, v) = self.velocity_on_grid(state);
        let umax = u.max_abs().max(v.max_abs());
        self.config.dt * umax / self.config.spacing()
    }

    fn check_cfl(&self, state: &SpectralState<T>) -> Result<(), SolverError> {
        let courant = self.courant(state);
        if courant > T::half() {
            match self.config.cfl_policy {
                CflPolicy::Error => {
                    return Err(SolverError::Cfl {
                        courant: courant.to_f64_lossy(),
                    })
                }
                CflPolicy::Warn => log::warn!("CFL number {courant} exceeds 0.5"),
            }
        }
        Ok(())
    }

    /// Advection right-hand side `-FFT(u omega_x + v omega_y)` for the
    /// coefficients in `input`, written into `out`.
    fn nonlinear(&mut self, input: &[Complex<T>], out: &mut [Complex<T>]) {
        let n = self.n();
        let [u, v, wx, wy] = &mut self.work;
        let i_unit = Complex::new(T::zero(), T::one());
        for j in 0..n {
            let ky = self.k_deriv[j];
            for i in 0..n {
                let idx = j * n + i;
                let kx = self.k_deriv[i];
                let w = input[idx];
                let k2 = self.k_squared[idx];
                let psi = if k2 > T::zero() { w / k2 } else { Complex::new(T::zero(), T::zero()) };
                u[idx] = i_unit * psi * ky;
                v[idx] = -(i_unit * psi * kx);
                wx[idx] = i_unit * w * kx;
                wy[idx] = i_unit * w * ky;
            }
        }
        self.fft.inverse(u);
        self.fft.inverse(v);
        self.fft.inverse(wx);
        self.fft.inverse(wy);
        for idx in 0..n * n {
            let p = u[idx].re * wx[idx].re + v[idx].re * wy[idx].re;
            out[idx] = Complex::new(p, T::zero());
        }
        self.fft.forward(out);
        for (o, m) in out.iter_mut().zip(&self.mask) {
            *o = -(*o * *m);
        }
        out[0] = Complex::new(T::zero(), T::zero());
    }

    /// Advances the state by one `dt`. On divergence the state is left
    /// untouched and the error names the failing step.
    pub fn step(&mut self, state: &mut SpectralState<T>) -> Result<(), SolverError> {
        let len = state.omega_hat.len();
        let dt = self.config.dt;
        let sixth = T::one() / T::lit(6.0);
        let w0 = &state.omega_hat;
        let zero = Complex::new(T::zero(), T::zero());
        let mut a = vec![zero; len];
        let mut b = vec![zero; len];
        let mut c = vec![zero; len];
        let mut d = vec![zero; len];
        let mut stage = vec![zero; len];

        self.nonlinear(w0, &mut a);
        a.iter_mut().for_each(|z| *z = *z * dt);

        for idx in 0..len {
            stage[idx] = (w0[idx] + a[idx] * T::half()) * self.decay_half[idx];
        }
        self.nonlinear(&stage, &mut b);
        b.iter_mut().for_each(|z| *z = *z * dt);

        for idx in 0..len {
            stage[idx] = w0[idx] * self.decay_half[idx] + b[idx] * T::half();
        }
        self.nonlinear(&stage, &mut c);
        c.iter_mut().for_each(|z| *z = *z * dt);

        for idx in 0..len {
            stage[idx] = w0[idx] * self.decay_full[idx] + c[idx] * self.decay_half[idx];
        }
        self.nonlinear(&stage, &mut d);
        d.iter_mut().for_each(|z| *z = *z * dt);

        let mut finite = true;
        for idx in 0..len {
            let e = self.decay_full[idx];
            let eh = self.decay_half[idx];
            let next = w0[idx] * e + (a[idx] * e + (b[idx] + c[idx]) * (T::two() * eh) + d[idx]) * sixth;
            finite &= next.re.is_finite() && next.im.is_finite();
            stage[idx] = next;
        }
        let next_step = state.steps + 1;
        if !finite {
            return Err(SolverError::Divergence {
                step: next_step,
                t: (state.t + dt).to_f64_lossy(),
            });
        }
        stage[0] = zero;
        state.omega_hat = stage;
        state.steps = next_step;
        state.t = T::from_u64(next_step).unwrap() * dt;
        Ok(())
    }

    /// Advances to `t_end`, which must lie a whole number of steps ahead.
    pub fn run_until(&mut self, state: &mut SpectralState<T>, t_end: T) -> Result<(), SolverError> {
        let steps = self.steps_between(state.t, t_end)?;
        for _ in 0..steps {
            self.step(state)?;
        }
        Ok(())
    }

    /// Number of whole steps from `from` to `to`.
    pub fn steps_between(&self, from: T, to: T) -> Result<u64, SolverError> {
        let dt = self.config.dt;
        let ratio = (to - from) / dt;
        let nearest = ratio.round();
        if !ratio.is_finite() || nearest < T::zero() || (ratio - nearest).abs() > T::lit(1e-6) {
            return Err(SolverError::Schedule {
                target: to.to_f64_lossy(),
                from: from.to_f64_lossy(),
                dt: dt.to_f64_lossy(),
            });
        }
        Ok(nearest.to_u64().unwrap())
    }

    fn to_physical(&self, mut coeffs: Vec<Complex<T>>) -> Vec<Complex<T>> {
        self.fft.inverse(&mut coeffs);
        coeffs
    }

    fn real_grid(&self, coeffs: Vec<Complex<T>>) -> ScalarGrid<T> {
        ScalarGrid {
            n: self.n(),
            length: self.config.length,
            values: self.to_physical(coeffs).into_iter().map(|c| c.re).collect(),
        }
    }

    pub fn vorticity_on_grid(&self, state: &SpectralState<T>) -> ScalarGrid<T> {
        self.real_grid(state.omega_hat.clone())
    }

    /// Largest imaginary part of the inverse-transformed vorticity.
    pub fn max_imaginary(&self, state: &SpectralState<T>) -> T {
        self.to_physical(state.omega_hat.clone())
            .iter()
            .fold(T::zero(), |m, c| m.max(c.im.abs()))
    }

    fn velocity_coefficients(&self, state: &SpectralState<T>) -> (Vec<Complex<T>>, Vec<Complex<T>>) {
        let n = self.n();
        let i_unit = Complex::new(T::zero(), T::one());
        let mut u = Vec::with_capacity(n * n);
        let mut v = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                let k2 = self.k_squared[idx];
                let psi = if k2 > T::zero() {
                    state.omega_hat[idx] / k2
                } else {
                    Complex::new(T::zero(), T::zero())
                };
                u.push(i_unit * psi * self.k_deriv[j]);
                v.push(-(i_unit * psi * self.k_deriv[i]));
            }
        }
        (u, v)
    }

    /// Velocity from `psi_hat = omega_hat / |k|^2`, `u = i k_y psi`, `v = -i k_x psi`.
    pub fn velocity_on_grid(&self, state: &SpectralState<T>) -> (ScalarGrid<T>, ScalarGrid<T>) {
        let (u, v) = self.velocity_coefficients(state);
        (self.real_grid(u), self.real_grid(v))
    }

    fn parseval_scale(&self) -> T {
        let n = T::from_usize(self.n()).unwrap();
        let n2 = n * n;
        self.config.length * self.config.length / (n2 * n2)
    }

    /// Kinetic energy `1/2 int (u^2 + v^2) dA`.
    pub fn energy(&self, state: &SpectralState<T>) -> T {
        let sum = state
            .omega_hat
            .iter()
            .zip(&self.k_squared)
            .filter(|(_, &k2)| k2 > T::zero())
            .fold(T::zero(), |acc, (w, &k2)| acc + w.norm_sqr() / k2);
        T::half() * self.parseval_scale() * sum
    }

    /// Enstrophy `1/2 int omega^2 dA`.
    pub fn enstrophy(&self, state: &SpectralState<T>) -> T {
        let sum = state.omega_hat.iter().fold(T::zero(), |acc, w| acc + w.norm_sqr());
        T::half() * self.parseval_scale() * sum
    }

    /// Max-norm of the spectrally computed divergence of the velocity.
    pub fn divergence_max(&self, state: &SpectralState<T>) -> T {
        let n = self.n();
        let (u, v) = self.velocity_coefficients(state);
        let i_unit = Complex::new(T::zero(), T::one());
        let mut div = Vec::with_capacity(n * n);
        for j in 0..n {
            for i in 0..n {
                let idx = j * n + i;
                div.push(i_unit * u[idx] * self.k_deriv[i] + i_unit * v[idx] * self.k_deriv[j]);
            }
        }
        self.to_physical(div).iter().fold(T::zero(), |m, c| m.max(c.norm()))
    }

    /// Vorticity error against the analytic field at the state's time.
    pub fn compare_to_analytic(
        &self,
        state: &SpectralState<T>,
        field: &TaylorGreenField<T>,
    ) -> Result<ErrorReport<T>, SolverError> {
        self.check_field(field)?;
        let grid = self.vorticity_on_grid(state);
        let exact = ScalarGrid::from_fn(self.n(), self.config.length, |x, y| {
            field.vorticity_unchecked(x, y, state.t)
        });
        Ok(grid_error(&grid, &exact))
    }
}

/// Max and L2 difference between two grids of equal shape.
pub fn grid_error<T: Real>(a: &ScalarGrid<T>, b: &ScalarGrid<T>) -> ErrorReport<T> {
    let h = a.length / T::from_usize(a.n).unwrap();
    let (max_error, sq) = a
        .values
        .iter()
        .zip(&b.values)
        .fold((T::zero(), T::zero()), |(m, s), (x, y)| {
            let e = (*x - *y).abs();
            (m.max(e), s + e * e)
        });
    ErrorReport {
        max_error,
        l2_error: (sq * h * h).sqrt(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn tg(nu: f64) -> TaylorGreenField<f64> {
        TaylorGreenField::decaying(1.0, nu).unwrap()
    }

    fn solver(n: usize, nu: f64) -> SpectralSolver<f64> {
        SpectralSolver::new(SolverConfig {
            n,
            viscosity: nu,
            ..SolverConfig::default()
        })
        .unwrap()
    }

    #[test]
    fn config_validation() {
        for n in [6, 7, 33] {
            let cfg = SolverConfig::<f64> { n, ..Default::default() };
            assert!(SpectralSolver::new(cfg).is_err(), "n={n}");
        }
        let cfg = SolverConfig::<f64> { dt: 0.0, ..Default::default() };
        assert!(matches!(SpectralSolver::new(cfg), Err(SolverError::Config(_))));
        let cfg = SolverConfig::<f64> { viscosity: -1.0, ..Default::default() };
        assert!(SpectralSolver::new(cfg).is_err());
    }

    #[test]
    fn zero_field_gives_zero_coefficients() {
        let s = solver(16, 0.01);
        let field = TaylorGreenField::stationary(0.0).unwrap();
        let state = s.init_from_field(&field).unwrap();
        assert!(state.omega_hat.iter().all(|c| c.norm() == 0.0));
    }

    #[test]
    fn zero_state_is_a_fixed_point() {
        let mut s = solver(16, 0.01);
        let mut state = s.zero_state();
        s.step(&mut state).unwrap();
        assert!(state.omega_hat.iter().all(|c| c.norm() == 0.0));
        assert_eq!(state.t, 0.01);
        assert_eq!(state.steps, 1);
    }

    #[test]
    fn init_reproduces_analytic_grid() {
        let s = solver(64, 0.01);
        let field = tg(0.01);
        let state = s.init_from_field(&field).unwrap();
        let report = s.compare_to_analytic(&state, &field).unwrap();
        assert!(report.max_error <= 1e-12 * 2.0, "{report:?}");
    }

    #[test]
    fn incompatible_period_rejected() {
        let s = solver(32, 0.01);
        let field = TaylorGreenField::new(1.0, 0.01, 0.3, true).unwrap();
        assert!(matches!(
            s.init_from_field(&field),
            Err(SolverError::IncompatiblePeriod { .. })
        ));
        // 4 pi domain with k = 6 sits at mode 12, beyond the 2/3 band of N = 32
        let field = TaylorGreenField::new(1.0, 0.01, 6.0, true).unwrap();
        assert!(matches!(s.init_from_field(&field), Err(SolverError::Unresolved { .. })));
    }

    #[test]
    fn cfl_policy() {
        let cfg = SolverConfig { n: 32, dt: 1.0, ..SolverConfig::<f64>::default() };
        let s = SpectralSolver::new(cfg).unwrap();
        assert!(matches!(s.init_from_field(&tg(0.01)), Err(SolverError::Cfl { .. })));
        let cfg = SolverConfig { cfl_policy: CflPolicy::Warn, ..cfg };
        let s = SpectralSolver::new(cfg).unwrap();
        assert!(s.init_from_field(&tg(0.01)).is_ok());
    }

    #[test]
    fn diagnostics_on_initial_state() {
        let s = solver(64, 0.01);
        let state = s.init_from_field(&tg(0.01)).unwrap();
        assert!(s.divergence_max(&state) <= 1e-12);
        assert!(s.max_imaginary(&state) <= 1e-12);
        let (u, v) = s.velocity_on_grid(&state);
        // node (0, N/8) is (0, pi/2): velocity (1, 0)
        assert!((u.at(0, 8) - 1.0).abs() < 1e-12);
        assert!(v.at(0, 8).abs() < 1e-12);
        assert!((s.energy(&state) - 4.0 * PI * PI).abs() < 1e-9 * 4.0 * PI * PI);
    }

    #[test]
    fn short_decaying_run_tracks_exact_solution() {
        let mut s = solver(32, 0.05);
        let field = tg(0.05);
        let mut state = s.init_from_field(&field).unwrap();
        s.run_until(&mut state, 1.0).unwrap();
        assert_eq!(state.steps, 100);
        let report = s.compare_to_analytic(&state, &field).unwrap();
        assert!(report.max_error <= 1e-10, "{report:?}");
    }

    #[test]
    fn schedule_must_be_whole_steps() {
        let s = solver(16, 0.01);
        assert_eq!(s.steps_between(0.0, 1.0).unwrap(), 100);
        assert!(s.steps_between(0.0, 0.005).is_err());
        assert!(s.steps_between(1.0, 0.0).is_err());
    }

    #[test]
    fn divergence_is_reported_with_step() {
        // a violent random field on a coarse grid with a huge step blows up
        let cfg = SolverConfig {
            n: 16,
            dt: 50.0,
            viscosity: 0.0,
            dealias: false,
            cfl_policy: CflPolicy::Warn,
            ..SolverConfig::<f64>::default()
        };
        let mut s = SpectralSolver::new(cfg).unwrap();
        let grid = ScalarGrid::from_fn(16, cfg.length, |x, y| {
            1e3 * ((3.0 * x).sin() * (2.0 * y).cos() + (x + 5.0 * y).cos() + (7.0 * x).sin())
        });
        let mut state = s.from_vorticity_grid(&grid).unwrap();
        let mut err = None;
        for _ in 0..200 {
            if let Err(e) = s.step(&mut state) {
                err = Some(e);
                break;
            }
        }
        match err {
            Some(SolverError::Divergence { step, .. }) => assert_eq!(step, state.steps + 1),
            other => panic!("expected divergence, got {other:?}"),
        }
    }

    #[test]
    fn snapshot_csv_layout() {
        let grid = ScalarGrid::from_fn(8, 4.0 * PI, |x, y| x + 10.0 * y);
        let mut out = Vec::new();
        grid.write_csv(0.5, &mut out).unwrap();
        let text = String::from_utf8(out).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), format!("# t=0.5 N=8 L={}", 4.0 * PI));
        let rows: Vec<&str> = lines.collect();
        assert_eq!(rows.len(), 8);
        let second: Vec<f64> = rows[1].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(second.len(), 8);
        assert_eq!(second[0], grid.at(0, 1));
        assert_eq!(second[3], grid.at(3, 1));
    }
}
