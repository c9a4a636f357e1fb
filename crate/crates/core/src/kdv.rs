//! Pseudo-spectral solver for the generalized KdV equations of the two
//! pseudo-characteristics:
//!
//! ```text
//! Left  (zeta = (x - c t)/eps):  S_t =   K S_zzz - d/dz h(S)
//! Right (zeta = (x + c t)/eps):  S_t = - K S_zzz + d/dz h(S)
//! ```
//!
//! The dispersive term is propagated exactly by an integrating factor in
//! Fourier space; the flux term is stepped with classical RK4 and dealiased
//! by the 2/3 rule. The state is kept in Fourier space between steps, so the
//! mean mode (mass) is untouched by the update.

use num_complex::Complex64;

use crate::domain::{Grid1D, Polynomial};
use crate::effective::EffectiveParams;
use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Relative level allowed near the box edge at the end of a run. Dispersive
/// tails decay slowly, so this is looser than the initial-data bound; a
/// wrapped tail of this size is far below the asymptotic error being measured.
pub const EDGE_TOLERANCE: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Direction {
    /// Carried along `x - c t`.
    Left,
    /// Carried along `x + c t`.
    Right,
}

impl Direction {
    fn sign(self) -> f64 {
        match self {
            Direction::Left => 1.0,
            Direction::Right => -1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct KdvState {
    pub s: Vec<f64>,
    pub t: f64,
    pub direction: Direction,
}

impl KdvState {
    pub fn new(s: Vec<f64>, direction: Direction) -> Self {
        KdvState { s, t: 0.0, direction }
    }

    /// `sum S dz`
    pub fn mass(&self, grid: &Grid1D) -> f64 {
        self.s.iter().sum::<f64>() * grid.dx()
    }

    /// `sum S^2 dz`
    pub fn l2_invariant(&self, grid: &Grid1D) -> f64 {
        self.s.iter().map(|x| x * x).sum::<f64>() * grid.dx()
    }

    pub fn max_abs(&self) -> f64 {
        self.s.iter().fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// `S(zeta) -> S(-zeta)` on the periodic grid (node `i` maps to node `n - i`).
pub fn reflect(values: &[f64]) -> Vec<f64> {
    let n = values.len();
    (0..n).map(|i| values[(n - i) % n]).collect()
}

#[derive(Debug, Clone)]
pub struct KdvSolver {
    grid: Grid1D,
    spectral: Spectral,
    dispersion: f64,
    flux: Polynomial,
    flux_slope: Polynomial,
    direction: Direction,
    /// Linear symbol `sign K (i kappa)^3`, zero at Nyquist.
    symbol: Vec<Complex64>,
}

impl KdvSolver {
    pub fn new(grid: &Grid1D, dispersion: f64, flux: &Polynomial, direction: Direction) -> Self {
        let spectral = Spectral::new(grid);
        let sign = direction.sign();
        let symbol = (0..grid.len())
            .map(|j| spectral.derivative_multiplier(j, 3) * (sign * dispersion))
            .collect();
        KdvSolver {
            grid: *grid,
            spectral,
            dispersion,
            flux: flux.clone(),
            flux_slope: flux.derivative(),
            direction,
            symbol,
        }
    }

    pub fn from_effective(grid: &Grid1D, eff: &EffectiveParams, flux: &Polynomial, direction: Direction) -> Self {
        Self::new(grid, eff.dispersion, flux, direction)
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn direction(&self) -> Direction {
        self.direction
    }

    /// Right-hand side evaluated pseudo-spectrally.
    pub fn rhs(&self, s: &[f64]) -> Vec<f64> {
        let s_hat = self.spectral.forward(s);
        let nonlinear = self.nonlinear_hat(&s_hat);
        let total: Vec<Complex64> = s_hat
            .iter()
            .zip(&self.symbol)
            .zip(&nonlinear)
            .map(|((sh, l), nl)| sh * l + nl)
            .collect();
        self.spectral.inverse(total)
    }

    /// `-sign d/dz h(S)` in Fourier space, dealiased.
    fn nonlinear_hat(&self, s_hat: &[Complex64]) -> Vec<Complex64> {
        let n = s_hat.len();
        if self.flux.is_zero() {
            return vec![Complex64::new(0.0, 0.0); n];
        }
        let s = self.spectral.inverse(s_hat.to_vec());
        let h: Vec<f64> = s.iter().map(|&x| self.flux.eval(x)).collect();
        let mut h_hat = self.spectral.forward(&h);
        let sign = self.direction.sign();
        for (j, c) in h_hat.iter_mut().enumerate() {
            if self.spectral.keeps_mode(j) {
                *c *= self.spectral.derivative_multiplier(j, 1) * (-sign);
            } else {
                *c = Complex64::new(0.0, 0.0);
            }
        }
        h_hat
    }

    /// Default step `0.1 dz / max(1, max |h'(S)|)`. At this size the time
    /// error of a unit-speed soliton over a full transit stays below 1e-4.
    pub fn default_dt(&self, s: &[f64]) -> f64 {
        let slope = s.iter().fold(0.0f64, |m, &x| m.max(self.flux_slope.eval(x).abs()));
        0.1 * self.grid.dx() / slope.max(1.0)
    }

    fn step_hat(&self, s_hat: &mut [Complex64], dt: f64) {
        let half: Vec<Complex64> = self.symbol.iter().map(|l| (l * (0.5 * dt)).exp()).collect();
        if self.flux.is_zero() {
            for (s, e) in s_hat.iter_mut().zip(&half) {
                *s *= e * e;
            }
            return;
        }
        let n = s_hat.len();
        let ka: Vec<Complex64> = self.nonlinear_hat(s_hat).into_iter().map(|x| x * dt).collect();
        let stage: Vec<Complex64> = (0..n).map(|j| half[j] * (s_hat[j] + 0.5 * ka[j])).collect();
        let kb: Vec<Complex64> = self.nonlinear_hat(&stage).into_iter().map(|x| x * dt).collect();
        let stage: Vec<Complex64> = (0..n).map(|j| half[j] * s_hat[j] + 0.5 * kb[j]).collect();
        let kc: Vec<Complex64> = self.nonlinear_hat(&stage).into_iter().map(|x| x * dt).collect();
        let stage: Vec<Complex64> = (0..n)
            .map(|j| half[j] * half[j] * s_hat[j] + half[j] * kc[j])
            .collect();
        let kd: Vec<Complex64> = self.nonlinear_hat(&stage).into_iter().map(|x| x * dt).collect();
        for j in 0..n {
            let full = half[j] * half[j];
            s_hat[j] = full * s_hat[j] + (full * ka[j] + 2.0 * half[j] * (kb[j] + kc[j]) + kd[j]) / 6.0;
        }
    }

    /// One integrating-factor RK4 step.
    pub fn step(&self, state: &mut KdvState, dt: f64) -> Result<()> {
        let mut s_hat = self.spectral.forward(&state.s);
        self.step_hat(&mut s_hat, dt);
        state.s = self.spectral.inverse(s_hat);
        state.t += dt;
        if state.s.iter().all(|x| x.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFiniteState { time: state.t })
        }
    }

    /// Integrates to each of `times`, with steps no larger than `max_dt`
    /// (default step when `None`).
    pub fn simulate(&self, initial: &KdvState, times: &[f64], max_dt: Option<f64>) -> Result<Vec<KdvState>> {
        let dt_cap = max_dt.unwrap_or_else(|| self.default_dt(&initial.s));
        let scale = initial.max_abs();
        let mut s_hat = self.spectral.forward(&initial.s);
        let mut t = initial.t;
        let mut out = Vec::with_capacity(times.len());
        for &target in times {
            if target < t {
                return Err(Error::invalid("output_times", "must be increasing and not before the start"));
            }
            let span = target - t;
            if span > 0.0 {
                let steps = (span / dt_cap).ceil().max(1.0) as usize;
                let dt = span / steps as f64;
                for _ in 0..steps {
                    self.step_hat(&mut s_hat, dt);
                }
                t = target;
            }
            let s = self.spectral.inverse(s_hat.clone());
            if !s.iter().all(|x| x.is_finite()) {
                return Err(Error::NonFiniteState { time: t });
            }
            out.push(KdvState {
                s,
                t,
                direction: self.direction,
            });
        }
        if let Some(last) = out.last() {
            check_edges(&last.s, scale, self.grid.half_length())?;
        }
        Ok(out)
    }

    pub fn dispersion(&self) -> f64 {
        self.dispersion
    }
}

fn check_edges(s: &[f64], scale: f64, half_length: f64) -> Result<()> {
    if scale == 0.0 {
        return Ok(());
    }
    let edge = edge_level(s);
    if edge > EDGE_TOLERANCE * scale {
        return Err(Error::BoxTooSmall {
            available: half_length,
            reason: format!("profile reaches {edge:e} near the edge, limit {:e}", EDGE_TOLERANCE * scale),
        });
    }
    Ok(())
}

/// Largest magnitude in the outer 1/64 of the box on either side.
pub fn edge_level(s: &[f64]) -> f64 {
    let band = (s.len() / 64).max(1);
    s[..band]
        .iter()
        .chain(&s[s.len() - band..])
        .fold(0.0f64, |m, x| m.max(x.abs()))
}

/// Travelling-wave solution of `S_t = K S_zzz - (gamma S^2)_z` moving at `speed`:
/// `S = amplitude sech^2(inverse_width (zeta - speed t))`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Soliton {
    pub amplitude: f64,
    pub inverse_width: f64,
    pub speed: f64,
}

impl Soliton {
    /// Requires `speed / (-K) > 0` and `gamma != 0`.
    pub fn new(dispersion: f64, gamma: f64, speed: f64) -> Result<Self> {
        if gamma == 0.0 || dispersion == 0.0 || speed * (-dispersion) <= 0.0 {
            return Err(Error::invalid("soliton", "needs gamma != 0 and speed of the sign of -K"));
        }
        Ok(Soliton {
            amplitude: 3.0 * speed / (2.0 * gamma),
            inverse_width: 0.5 * (speed / (-dispersion)).sqrt(),
            speed,
        })
    }

    pub fn eval(&self, zeta: f64, t: f64) -> f64 {
        let y = self.inverse_width * (zeta - self.speed * t);
        self.amplitude / y.cosh().powi(2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid1D {
        Grid1D::new(std::f64::consts::PI * 4.0, 128).unwrap()
    }

    #[test]
    fn zero_state() {
        let solver = KdvSolver::new(&grid(), -0.35, &Polynomial::new(vec![0.0, 0.0, -0.2]), Direction::Left);
        assert!(solver.rhs(&[0.0; 128]).iter().all(|&x| x == 0.0));
        let mut st = KdvState::new(vec![0.0; 128], Direction::Left);
        solver.step(&mut st, 0.1).unwrap();
        assert!(st.s.iter().all(|&x| x == 0.0));
    }

    #[test]
    fn linear_rhs_of_sine() {
        let g = grid();
        let k = -0.355_785;
        let kappa = 0.75; // 2 pi m / period with m = 3
        let solver = KdvSolver::new(&g, k, &Polynomial::default(), Direction::Left);
        let s: Vec<f64> = g.nodes().iter().map(|z| (kappa * z).sin()).collect();
        let rhs = solver.rhs(&s);
        for (i, z) in g.nodes().iter().enumerate() {
            assert!((rhs[i] + k * kappa.powi(3) * (kappa * z).cos()).abs() < 1e-11);
        }
        // cross-check with a finite-difference third derivative
        let h = 1e-3;
        let z = 0.3;
        let f = |z: f64| (kappa * z).sin();
        let d3 = (f(z + 2.0 * h) - 2.0 * f(z + h) + 2.0 * f(z - h) - f(z - 2.0 * h)) / (2.0 * h.powi(3));
        assert!((k * d3 + k * kappa.powi(3) * (kappa * z).cos()).abs() < 1e-5);
    }

    #[test]
    fn quadratic_flux_rhs_sums_to_zero() {
        let g = grid();
        let solver = KdvSolver::new(&g, -0.3, &Polynomial::new(vec![0.0, 0.0, -0.24]), Direction::Right);
        let s: Vec<f64> = g.nodes().iter().map(|z| (-(z - 0.5).powi(2)).exp() * 1.3).collect();
        let total: f64 = solver.rhs(&s).iter().sum();
        assert!(total.abs() < 1e-12, "{total}");
    }

    #[test]
    fn linear_step_is_exact_per_mode() {
        let g = grid();
        let k = -0.4;
        let solver = KdvSolver::new(&g, k, &Polynomial::default(), Direction::Left);
        let kappa = 1.25;
        let s: Vec<f64> = g.nodes().iter().map(|z| (kappa * z).cos()).collect();
        let mut st = KdvState::new(s, Direction::Left);
        let dt = 0.731;
        solver.step(&mut st, dt).unwrap();
        // S_t = K S_zzz: e^{i kappa z} picks up the phase -K kappa^3 t
        let w = -k * kappa.powi(3);
        for (i, z) in g.nodes().iter().enumerate() {
            assert!((st.s[i] - (kappa * z + w * dt).cos()).abs() < 1e-13);
        }
    }

    #[test]
    fn reflection_is_involution() {
        let v: Vec<f64> = (0..16).map(|i| i as f64).collect();
        assert_eq!(reflect(&reflect(&v)), v);
        assert_eq!(reflect(&v)[0], 0.0);
        assert_eq!(reflect(&v)[1], 15.0);
    }

    #[test]
    fn soliton_requires_matching_signs() {
        assert!(Soliton::new(-0.3, -0.2, 0.5).is_ok());
        assert!(Soliton::new(-0.3, -0.2, -0.5).is_err());
        assert!(Soliton::new(-0.3, 0.0, 0.5).is_err());
    }
}
