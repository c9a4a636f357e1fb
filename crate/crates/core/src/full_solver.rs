//! Direct integration of the stiff two-string system on the periodic box.
//!
//! Strang splitting of two exactly solvable flows:
//!
//! * the wave flow `u_tt = k1 u_xx`, `v_tt = k2 v_xx`, advanced mode by mode
//!   as a rotation in Fourier space;
//! * the pointwise relaxation flow `eps^3 u_tt = -a u + b v + eps^p f`,
//!   `eps^3 v_tt = a u - b v - eps^p f`, advanced in the eigenbasis
//!   `s = u + v` (free drift) and `d = a u - b v` (oscillator of frequency
//!   `omega = sqrt((a + b) / eps^3)` about `d* = eps^p f`), with `f` frozen at
//!   the start of the substep.
//!
//! Both flows contain the kinematic relation `u_t = p`. Composing them as
//! they stand would count it twice, so inside [`FullSolver::strang_step`]
//! each flow carries half of it: `u_t = p / 2` together with the full force.
//! The two halves are still exact rotations (at frequencies scaled by
//! `1/sqrt(2)`) and their generators add up to the true system. A frozen `f`
//! would cap the composition at first order, so there `d*` is re-evaluated
//! at the midpoint of a frozen-forcing predictor.
//!
//! Neither substep has a stability limit; the step size is set by accuracy.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::domain::{
    sample_initial, Epsilon, FieldPair, Grid1D, InitialConditionSpec, NonlinearitySpec, PhysParams,
    DECAY_TOLERANCE,
};
use crate::error::{Error, Result};
use crate::spectral::Spectral;

/// Relative level at `+-L` tolerated at the end of a run.
pub const FINAL_DECAY_TOLERANCE: f64 = 1e-8;

/// Share of `u_t = p` given to each of the two split flows.
const DRIFT_SHARE: f64 = 0.5;

/// Extra room demanded beyond signal extent plus travel distance, as a fraction of `L`.
pub const BOX_MARGIN_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    pub t_end: f64,
    pub cfl: f64,
    pub substeps_per_oscillation: f64,
    /// Snapshot times in `[0, t_end]`; empty means `[t_end]`.
    pub output_times: Vec<f64>,
    /// Optional cap on the step, applied on top of the two accuracy bounds.
    pub max_dt: Option<f64>,
    /// `false` replaces the relaxation substep by the identity (pure waves).
    pub relaxation: bool,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            t_end: 1.0,
            cfl: 0.5,
            substeps_per_oscillation: 16.0,
            output_times: Vec::new(),
            max_dt: None,
            relaxation: true,
        }
    }
}

impl SolverConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::invalid("t_end", format!("must be finite and >= 0, got {}", self.t_end)));
        }
        if !(self.cfl > 0.0 && self.cfl <= 1.0) {
            return Err(Error::invalid("cfl", format!("must lie in (0, 1], got {}", self.cfl)));
        }
        if !(self.substeps_per_oscillation.is_finite() && self.substeps_per_oscillation >= 8.0) {
            return Err(Error::invalid(
                "substeps_per_oscillation",
                format!("must be >= 8, got {}", self.substeps_per_oscillation),
            ));
        }
        if let Some(dt) = self.max_dt {
            if !(dt.is_finite() && dt > 0.0) {
                return Err(Error::invalid("max_dt", format!("must be > 0, got {dt}")));
            }
        }
        for &t in &self.output_times {
            if !(t.is_finite() && (0.0..=self.t_end).contains(&t)) {
                return Err(Error::invalid("output_times", format!("{t} is outside [0, t_end]")));
            }
        }
        if self.output_times.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::invalid("output_times", "must be strictly increasing"));
        }
        Ok(())
    }

    /// Largest step allowed by the CFL and oscillation-resolution bounds.
    pub fn step_bound(&self, grid: &Grid1D, params: &PhysParams, eps: Epsilon) -> f64 {
        let cfl = self.cfl * grid.dx() / params.max_speed();
        let period = 2.0 * PI / params.relaxation_frequency(eps);
        let bound = cfl.min(period / self.substeps_per_oscillation);
        match self.max_dt {
            Some(cap) => bound.min(cap),
            None => bound,
        }
    }

    pub fn snapshot_times(&self) -> Vec<f64> {
        if self.output_times.is_empty() {
            vec![self.t_end]
        } else {
            self.output_times.clone()
        }
    }
}

/// Integrator for one `(params, f, eps)` on one grid.
#[derive(Debug, Clone)]
pub struct FullSolver {
    grid: Grid1D,
    spectral: Spectral,
    params: PhysParams,
    f: NonlinearitySpec,
    eps: Epsilon,
    relaxation: bool,
}

impl FullSolver {
    pub fn new(grid: &Grid1D, params: &PhysParams, f: &NonlinearitySpec, eps: Epsilon) -> Result<Self> {
        params.validate()?;
        Ok(FullSolver {
            grid: *grid,
            spectral: Spectral::new(grid),
            params: *params,
            f: f.clone(),
            eps,
            relaxation: true,
        })
    }

    pub fn without_relaxation(mut self) -> Self {
        self.relaxation = false;
        self
    }

    pub fn grid(&self) -> &Grid1D {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    /// Exact wave flow over `dt`.
    pub fn wave_substep(&self, state: &mut FieldPair, dt: f64) {
        self.wave_flow(state, dt, 1.0);
    }

    fn wave_flow(&self, state: &mut FieldPair, dt: f64, drift: f64) {
        let (u, p) = self.rotate_modes(&state.u, &state.p, self.params.k1.sqrt(), dt, drift);
        let (v, q) = self.rotate_modes(&state.v, &state.q, self.params.k2.sqrt(), dt, drift);
        state.u = u;
        state.p = p;
        state.v = v;
        state.q = q;
        state.time += dt;
    }

    // Solves u_t = drift * p, p_t = -(speed kappa)^2 u for every mode.
    fn rotate_modes(&self, field: &[f64], rate: &[f64], speed: f64, dt: f64, drift: f64) -> (Vec<f64>, Vec<f64>) {
        let mut fh = self.spectral.forward(field);
        let mut rh = self.spectral.forward(rate);
        for (j, &kappa) in self.spectral.wavenumbers().iter().enumerate() {
            let w = speed * kappa.abs();
            let (f0, r0) = (fh[j], rh[j]);
            if w == 0.0 {
                fh[j] = f0 + r0 * (drift * dt);
            } else {
                let big = drift.sqrt() * w;
                let (sin, cos) = (big * dt).sin_cos();
                fh[j] = f0 * cos + r0 * (drift * sin / big);
                rh[j] = -f0 * (big * sin / drift) + r0 * cos;
            }
        }
        (self.spectral.inverse(fh), self.spectral.inverse(rh))
    }

    /// Exact pointwise relaxation flow over `dt` with `f` frozen at the initial state.
    pub fn relaxation_substep(&self, state: &mut FieldPair, dt: f64) -> Result<()> {
        self.relaxation_flow(state, dt, 1.0, Forcing::Frozen)
    }

    fn relaxation_flow(&self, state: &mut FieldPair, dt: f64, drift: f64, forcing: Forcing) -> Result<()> {
        if self.relaxation {
            relax_nodes(state, &self.params, &self.f, self.eps, dt, drift, forcing);
        }
        state.time += dt;
        if state.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFiniteState { time: state.time })
        }
    }

    /// Half relaxation, full wave, half relaxation, each flow carrying its
    /// share of the drift.
    pub fn strang_step(&self, state: &mut FieldPair, dt: f64) -> Result<()> {
        let t0 = state.time;
        // Without relaxation the wave flow is the whole system.
        let (wave_drift, relax_drift) = if self.relaxation {
            (DRIFT_SHARE, 1.0 - DRIFT_SHARE)
        } else {
            (1.0, 0.0)
        };
        self.relaxation_flow(state, 0.5 * dt, relax_drift, Forcing::Midpoint)?;
        state.time = t0;
        self.wave_flow(state, dt, wave_drift);
        state.time = t0;
        self.relaxation_flow(state, 0.5 * dt, relax_drift, Forcing::Midpoint)?;
        state.time = t0 + dt;
        Ok(())
    }

    /// Advances `state` to each time in `times` with steps no larger than `max_dt`.
    pub fn run(&self, mut state: FieldPair, times: &[f64], max_dt: f64) -> Result<Vec<FieldPair>> {
        let mut snapshots = Vec::with_capacity(times.len());
        for &target in times {
            let span = target - state.time;
            if span > 0.0 {
                let steps = (span / max_dt).ceil().max(1.0) as usize;
                let dt = span / steps as f64;
                let start = state.time;
                for k in 1..=steps {
                    self.strang_step(&mut state, dt)?;
                    state.time = start + k as f64 * dt;
                }
                state.time = target;
            }
            snapshots.push(state.clone());
        }
        Ok(snapshots)
    }

    /// Conserved quadratic energy of the linear system (`f = 0`):
    /// `1/2 int eps^3 (a p^2 + b q^2 + a k1 u_x^2 + b k2 v_x^2) + (a u - b v)^2 dx`.
    pub fn energy(&self, state: &FieldPair) -> f64 {
        let e3 = self.eps.get().powi(3);
        let (a, b) = (self.params.a, self.params.b);
        let ux = self.spectral.derivative(&state.u, 1);
        let vx = self.spectral.derivative(&state.v, 1);
        let sum: f64 = (0..state.len())
            .map(|i| {
                let d = a * state.u[i] - b * state.v[i];
                e3 * (a * state.p[i].powi(2)
                    + b * state.q[i].powi(2)
                    + a * self.params.k1 * ux[i].powi(2)
                    + b * self.params.k2 * vx[i].powi(2))
                    + d * d
            })
            .sum();
        0.5 * sum * self.grid.dx()
    }
}

/// How the forcing `f` is sampled inside a relaxation substep.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum Forcing {
    /// `f` at the start of the substep (first order in `dt`).
    Frozen,
    /// `f` at the midpoint of a frozen-forcing predictor (second order).
    Midpoint,
}

// Solves s_t = drift * s_rate, d_t = drift * d_rate with the full restoring
// force on d; `drift = 1` is the plain relaxation flow.
fn relax_nodes(
    state: &mut FieldPair,
    params: &PhysParams,
    f: &NonlinearitySpec,
    eps: Epsilon,
    dt: f64,
    drift: f64,
    forcing: Forcing,
) {
    let (a, b) = (params.a, params.b);
    let omega = drift.sqrt() * params.relaxation_frequency(eps);
    let (sin, cos) = (omega * dt).sin_cos();
    let weight = f.forcing_weight(eps);
    let linear = f.is_zero();
    let total = a + b;
    let advance = |u: f64, v: f64, p: f64, q: f64, target: f64| {
        let s1 = u + v + drift * (p + q) * dt;
        let d_rate = a * p - b * q;
        let off = a * u - b * v - target;
        let d1 = target + off * cos + drift * d_rate * sin / omega;
        let d1_rate = -off * omega * sin / drift + d_rate * cos;
        ((b * s1 + d1) / total, (a * s1 - d1) / total, d1_rate)
    };
    for i in 0..state.len() {
        let (u, v, p, q) = (state.u[i], state.v[i], state.p[i], state.q[i]);
        let mut target = if linear { 0.0 } else { weight * f.evaluate(u, v) };
        let mut next = advance(u, v, p, q, target);
        if forcing == Forcing::Midpoint && !linear {
            target = weight * f.evaluate(0.5 * (u + next.0), 0.5 * (v + next.1));
            next = advance(u, v, p, q, target);
        }
        let (u1, v1, d1_rate) = next;
        let s_rate = p + q;
        state.u[i] = u1;
        state.v[i] = v1;
        state.p[i] = (b * s_rate + d1_rate) / total;
        state.q[i] = (a * s_rate - d1_rate) / total;
    }
}

/// Free-function form of [`FullSolver::wave_substep`].
pub fn wave_substep(state: &FieldPair, grid: &Grid1D, params: &PhysParams, dt: f64) -> Result<FieldPair> {
    let solver = FullSolver::new(grid, params, &NonlinearitySpec::zero(), Epsilon::new(1.0)?)?;
    state.check_len(grid.len())?;
    let mut out = state.clone();
    solver.wave_substep(&mut out, dt);
    Ok(out)
}

/// Free-function form of [`FullSolver::relaxation_substep`].
pub fn relaxation_substep(
    state: &FieldPair,
    params: &PhysParams,
    f: &NonlinearitySpec,
    eps: Epsilon,
    dt: f64,
) -> Result<FieldPair> {
    let mut out = state.clone();
    relax_nodes(&mut out, params, f, eps, dt, 1.0, Forcing::Frozen);
    out.time += dt;
    if out.is_finite() {
        Ok(out)
    } else {
        Err(Error::NonFiniteState { time: out.time })
    }
}

/// Samples the initial condition and integrates to every snapshot time.
pub fn simulate_full(
    spec: &InitialConditionSpec,
    grid: &Grid1D,
    params: &PhysParams,
    f: &NonlinearitySpec,
    eps: Epsilon,
    config: &SolverConfig,
) -> Result<Vec<FieldPair>> {
    config.validate()?;
    let initial = sample_initial(spec, grid, eps, params)?;
    let required = (spec.extent(eps, DECAY_TOLERANCE) + params.max_speed() * config.t_end)
        / (1.0 - BOX_MARGIN_FRACTION);
    if required > grid.half_length() {
        return Err(Error::BoxTooSmall {
            available: grid.half_length(),
            reason: format!("data extent plus wave travel needs {required:.6}"),
        });
    }
    let solver = FullSolver::new(grid, params, f, eps)?;
    let solver = if config.relaxation { solver } else { solver.without_relaxation() };
    let snapshots = solver.run(initial, &config.snapshot_times(), config.step_bound(grid, params, eps))?;

    let amplitude = spec.amplitude();
    if amplitude > 0.0 {
        if let Some(last) = snapshots.last() {
            let limit = FINAL_DECAY_TOLERANCE * amplitude;
            let edge = last.u[0].abs().max(last.v[0].abs());
            if edge >= limit {
                return Err(Error::DecayViolation {
                    which: "final state".to_string(),
                    value: edge,
                    limit,
                });
            }
        }
    }
    Ok(snapshots)
}

/// Per-mode energy `(w |u_hat|)^2 + |p_hat|^2` of a single field, `w = speed |kappa|`.
pub fn mode_energies(spectral: &Spectral, field: &[f64], rate: &[f64], speed: f64) -> Vec<f64> {
    let fh = spectral.forward(field);
    let rh = spectral.forward(rate);
    spectral
        .wavenumbers()
        .iter()
        .zip(fh.iter().zip(&rh))
        .map(|(&kappa, (f, r)): (&f64, (&Complex64, &Complex64))| {
            (speed * kappa.abs()).powi(2) * f.norm_sqr() + r.norm_sqr()
        })
        .collect()
}
