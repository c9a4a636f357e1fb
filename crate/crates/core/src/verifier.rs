//! Cross-validation of the asymptotic constructions against the full solver.

use std::time::Instant;

use rayon::prelude::*;

use crate::composer::BurstAsymptotics;
use crate::domain::{Epsilon, FieldPair, Grid1D, InitialConditionSpec, InitialKind, NonlinearitySpec, PhysParams};
use crate::error::{Error, Result};
use crate::full_solver::{simulate_full, SolverConfig};
use crate::regular::RegularExpansion;
use crate::spectral::Spectral;

/// Smallest eps the full solver is run at.
pub const MIN_EPS: f64 = 0.05;

/// Time offset for the centered differences of asymptotic fields.
pub const RESIDUAL_TIME_STEP: f64 = 1e-3;

/// Pointwise defect of both equations at the middle of three snapshots.
#[derive(Debug, Clone, PartialEq)]
pub struct PdeResidual {
    pub time: f64,
    pub u: Vec<f64>,
    pub v: Vec<f64>,
}

impl PdeResidual {
    pub fn linf(&self) -> f64 {
        self.u.iter().chain(&self.v).fold(0.0, |m, x| m.max(x.abs()))
    }
}

/// Evaluates `eps^3 (u_tt - k1 u_xx) + a u - b v - eps^p f` (and the `v`
/// counterpart) at `snapshots[1]`, with spectral `x`-derivatives and a
/// three-point time difference over `snapshots[0..3]`.
pub fn pde_residual(
    snapshots: &[FieldPair],
    grid: &Grid1D,
    params: &PhysParams,
    f: &NonlinearitySpec,
    eps: Epsilon,
) -> Result<PdeResidual> {
    if snapshots.len() < 3 {
        return Err(Error::InsufficientSnapshots { got: snapshots.len() });
    }
    let (prev, mid, next) = (&snapshots[0], &snapshots[1], &snapshots[2]);
    for s in [prev, mid, next] {
        if s.u.len() != grid.len() || s.v.len() != grid.len() {
            return Err(Error::GridMismatch("snapshot length differs from the grid".into()));
        }
    }
    let h1 = mid.time - prev.time;
    let h2 = next.time - mid.time;
    if !(h1 > 0.0 && h2 > 0.0) {
        return Err(Error::invalid("snapshots", "times must be strictly increasing"));
    }
    let spectral = Spectral::new(grid);
    let uxx = spectral.derivative(&mid.u, 2);
    let vxx = spectral.derivative(&mid.v, 2);
    let e3 = eps.get().powi(3);
    let weight = f.forcing_weight(eps);
    let second = |a: f64, b: f64, c: f64| 2.0 * ((c - b) / h2 - (b - a) / h1) / (h1 + h2);
    let n = grid.len();
    let mut ru = vec![0.0; n];
    let mut rv = vec![0.0; n];
    for i in 0..n {
        let (u, v) = (mid.u[i], mid.v[i]);
        let coupling = -params.a * u + params.b * v + weight * f.evaluate(u, v);
        let utt = second(prev.u[i], u, next.u[i]);
        let vtt = second(prev.v[i], v, next.v[i]);
        ru[i] = e3 * (utt - params.k1 * uxx[i]) - coupling;
        rv[i] = e3 * (vtt - params.k2 * vxx[i]) + coupling;
    }
    Ok(PdeResidual {
        time: mid.time,
        u: ru,
        v: rv,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorNorms {
    pub l2_u: f64,
    pub linf_u: f64,
    pub l2_v: f64,
    pub linf_v: f64,
}

/// Discrete L2 (`dx`-weighted) and L-infinity norms of `full - approx`.
pub fn error_norms(full: &FieldPair, approx: &FieldPair, grid: &Grid1D) -> Result<ErrorNorms> {
    let n = grid.len();
    if full.u.len() != n || full.v.len() != n || approx.u.len() != n || approx.v.len() != n {
        return Err(Error::GridMismatch(format!(
            "expected {n} nodes, got {} and {}",
            full.u.len(),
            approx.u.len()
        )));
    }
    if (full.time - approx.time).abs() > 1e-12 * (1.0 + full.time.abs()) {
        return Err(Error::GridMismatch(format!(
            "fields at different times {} and {}",
            full.time, approx.time
        )));
    }
    let norms = |a: &[f64], b: &[f64]| {
        let (sq, max) = a.iter().zip(b).fold((0.0, 0.0f64), |(sq, max), (x, y)| {
            let d = (x - y).abs();
            (sq + d * d, max.max(d))
        });
        ((sq * grid.dx()).sqrt(), max)
    };
    let (l2_u, linf_u) = norms(&full.u, &approx.u);
    let (l2_v, linf_v) = norms(&full.v, &approx.v);
    Ok(ErrorNorms {
        l2_u,
        linf_u,
        l2_v,
        linf_v,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SweepMode {
    SmoothRegular,
    BurstKdv,
}

/// Everything except eps that defines one comparison run.
#[derive(Debug, Clone)]
pub struct SweepProblem {
    pub params: PhysParams,
    pub f: NonlinearitySpec,
    pub initial: InitialConditionSpec,
    pub grid: Grid1D,
    pub zeta_grid: Grid1D,
    pub solver: SolverConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorRow {
    pub eps: f64,
    pub err_l2_u: f64,
    pub err_linf_u: f64,
    pub err_l2_v: f64,
    pub err_linf_v: f64,
    pub pde_residual_linf: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    pub mode: SweepMode,
    pub rows: Vec<ErrorRow>,
    /// Least-squares slope of `ln err_linf_u` against `ln eps`; NaN with fewer than two rows.
    pub fitted_order: f64,
}

impl ErrorReport {
    pub fn linf_u(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.err_linf_u).collect()
    }
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn fitted_order(x: &[f64], y: &[f64]) -> f64 {
    if x.len() != y.len() || x.len() < 2 || x.iter().chain(y).any(|&v| v <= 0.0) {
        return f64::NAN;
    }
    let n = x.len() as f64;
    let lx: Vec<f64> = x.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = y.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = lx.iter().map(|a| (a - mx).powi(2)).sum();
    if sxx == 0.0 {
        f64::NAN
    } else {
        sxy / sxx
    }
}

/// Full solution and asymptotic approximation at `t_end` for one eps.
#[derive(Debug, Clone)]
pub struct Comparison {
    pub full: FieldPair,
    pub approx: FieldPair,
    pub residual: PdeResidual,
}

fn check_mode(problem: &SweepProblem, mode: SweepMode) -> Result<()> {
    let expected = match mode {
        SweepMode::SmoothRegular => InitialKind::Smooth,
        SweepMode::BurstKdv => InitialKind::Burst,
    };
    if problem.initial.kind != expected {
        return Err(Error::invalid("initial.kind", format!("{mode:?} needs {expected:?} data")));
    }
    if problem.solver.t_end <= 0.0 {
        return Err(Error::invalid("t_end", "comparison needs t_end > 0"));
    }
    Ok(())
}

fn residual_times(t_end: f64) -> [f64; 3] {
    let h = RESIDUAL_TIME_STEP.min(0.5 * t_end);
    [t_end - h, t_end, t_end + h]
}

/// Runs the full solver and the asymptotic construction for one eps.
pub fn compare(problem: &SweepProblem, eps: Epsilon, mode: SweepMode) -> Result<Comparison> {
    check_mode(problem, mode)?;
    let t_end = problem.solver.t_end;
    let config = SolverConfig {
        output_times: vec![t_end],
        ..problem.solver.clone()
    };
    let full = simulate_full(&problem.initial, &problem.grid, &problem.params, &problem.f, eps, &config)?
        .pop()
        .ok_or(Error::MissingSnapshot(t_end))?;
    let times = residual_times(t_end);
    let snapshots: Vec<FieldPair> = match mode {
        SweepMode::SmoothRegular => {
            let reg = RegularExpansion::new(&problem.initial, &problem.params, &problem.f)?;
            times.iter().map(|&t| reg.fields(&problem.grid, t)).collect()
        }
        SweepMode::BurstKdv => {
            let asym = BurstAsymptotics::build(
                &problem.initial,
                &problem.params,
                &problem.f,
                eps,
                &problem.zeta_grid,
                &times,
            )?;
            let x = problem.grid.nodes();
            times
                .iter()
                .map(|&t| {
                    let (u, v) = asym.compose(&x, t)?;
                    let mut fp = FieldPair::zeros(x.len(), t);
                    fp.u = u;
                    fp.v = v;
                    Ok(fp)
                })
                .collect::<Result<_>>()?
        }
    };
    let residual = pde_residual(&snapshots, &problem.grid, &problem.params, &problem.f, eps)?;
    let approx = snapshots[1].clone();
    Ok(Comparison { full, approx, residual })
}

fn sweep_row(problem: &SweepProblem, eps: Epsilon, mode: SweepMode) -> Result<ErrorRow> {
    let start = Instant::now();
    let cmp = compare(problem, eps, mode)?;
    let norms = error_norms(&cmp.full, &cmp.approx, &problem.grid)?;
    Ok(ErrorRow {
        eps: eps.get(),
        err_l2_u: norms.l2_u,
        err_linf_u: norms.linf_u,
        err_l2_v: norms.l2_v,
        err_linf_v: norms.linf_v,
        pde_residual_linf: cmp.residual.linf(),
        seconds: start.elapsed().as_secs_f64(),
    })
}

fn check_eps_list(eps_list: &[f64]) -> Result<Vec<Epsilon>> {
    if eps_list.is_empty() {
        return Err(Error::invalid("epsilon_list", "must not be empty"));
    }
    if eps_list.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::invalid("epsilon_list", "must be strictly decreasing"));
    }
    eps_list
        .iter()
        .map(|&e| {
            if e < MIN_EPS {
                Err(Error::invalid("epsilon_list", format!("{e} is below the solver limit {MIN_EPS}")))
            } else {
                Epsilon::new(e)
            }
        })
        .collect()
}

/// Error of the asymptotics against the full solver for each eps, in parallel.
pub fn convergence_sweep(problem: &SweepProblem, eps_list: &[f64], mode: SweepMode) -> Result<ErrorReport> {
    check_mode(problem, mode)?;
    let eps = check_eps_list(eps_list)?;
    let rows = eps
        .par_iter()
        .map(|&e| sweep_row(problem, e, mode))
        .collect::<Result<Vec<_>>>()?;
    let x: Vec<f64> = rows.iter().map(|r| r.eps).collect();
    let y: Vec<f64> = rows.iter().map(|r| r.err_linf_u).collect();
    Ok(ErrorReport {
        mode,
        fitted_order: fitted_order(&x, &y),
        rows,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RemainderRow {
    pub time: f64,
    pub linf_u: f64,
    pub linf_v: f64,
    pub l2_u: f64,
    pub l2_v: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RemainderReport {
    pub eps: f64,
    pub rows: Vec<RemainderRow>,
}

impl RemainderReport {
    pub fn initial(&self) -> Option<&RemainderRow> {
        self.rows.first().filter(|r| r.time == 0.0)
    }

    pub fn max_linf(&self) -> f64 {
        self.rows.iter().fold(0.0, |m, r| m.max(r.linf_u).max(r.linf_v))
    }
}

/// `R = full - (u0_bar, v0_bar)` at `t = 0` and at `samples` equally spaced
/// times up to `t_end`.
pub fn remainder_check(problem: &SweepProblem, eps: Epsilon, samples: usize) -> Result<RemainderReport> {
    check_mode(problem, SweepMode::SmoothRegular)?;
    let t_end = problem.solver.t_end;
    let samples = samples.max(1);
    let times: Vec<f64> = (0..=samples).map(|k| t_end * k as f64 / samples as f64).collect();
    let config = SolverConfig {
        output_times: times.clone(),
        ..problem.solver.clone()
    };
    let full = simulate_full(&problem.initial, &problem.grid, &problem.params, &problem.f, eps, &config)?;
    let reg = RegularExpansion::new(&problem.initial, &problem.params, &problem.f)?;
    let rows = full
        .iter()
        .map(|snap| {
            let approx = reg.fields(&problem.grid, snap.time);
            let norms = error_norms(snap, &approx, &problem.grid)?;
            Ok(RemainderRow {
                time: snap.time,
                linf_u: norms.linf_u,
                linf_v: norms.linf_v,
                l2_u: norms.l2_u,
                l2_v: norms.l2_v,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(RemainderReport { eps: eps.get(), rows })
}

/// Signed-mass centroid of `values` over the nodes where `select(x)` holds.
pub fn centroid(x: &[f64], values: &[f64], select: impl Fn(f64) -> bool) -> f64 {
    let (m, mx) = x
        .iter()
        .zip(values)
        .filter(|(&xi, _)| select(xi))
        .fold((0.0, 0.0), |(m, mx), (&xi, &vi)| (m + vi, mx + vi * xi));
    mx / m
}

/// Centroid velocities `(left hump, right hump)` of the composed burst
/// between two snapshot times, splitting the line at `x = 0`.
pub fn hump_speeds(asym: &BurstAsymptotics, x: &[f64], t1: f64, t2: f64) -> Result<(f64, f64)> {
    let u1 = asym.compose_u(x, t1)?;
    let u2 = asym.compose_u(x, t2)?;
    let left = (centroid(x, &u2, |x| x < 0.0) - centroid(x, &u1, |x| x < 0.0)) / (t2 - t1);
    let right = (centroid(x, &u2, |x| x > 0.0) - centroid(x, &u1, |x| x > 0.0)) / (t2 - t1);
    Ok((left, right))
}
