//! Leading-order burst asymptotics
//!
//! ```text
//! u(x, t) ~ S_left((x - c t)/eps, t) + S_right((x + c t)/eps, t),   v = (a/b) u
//! ```
//!
//! The two KdV profiles start from an equal split of the burst, `u0 / 2`
//! each. With equal halves the `O(1/eps)` parts of `u_t(x, 0)` cancel; the
//! initial velocity is not matched at this order.

use num_complex::Complex64;

use crate::domain::{
    equilibrium_projection, Epsilon, Grid1D, InitialConditionSpec, InitialKind, NonlinearitySpec,
    PhysParams, Polynomial,
};
use crate::effective::{nonlinear_flux, EffectiveParams};
use crate::error::{Error, Result};
use crate::kdv::{edge_level, Direction, KdvSolver, KdvState};
use crate::spectral::Spectral;

/// Relative level near the edge of the zeta-box below which points outside
/// the box are taken as zero. Matches the KdV end-of-run edge bound.
pub const OUTSIDE_TOLERANCE: f64 = crate::kdv::EDGE_TOLERANCE;

/// Default zeta-box: `[-40, 40)` with 512 nodes.
pub fn default_zeta_grid() -> Grid1D {
    Grid1D::new(40.0, 512).expect("valid default grid")
}

/// Equal split of the burst between the two pseudo-characteristics.
pub fn split_initial_burst(spec: &InitialConditionSpec, zeta_grid: &Grid1D) -> Result<(Vec<f64>, Vec<f64>)> {
    if spec.kind != InitialKind::Burst {
        return Err(Error::invalid("initial.kind", "burst asymptotics need burst data"));
    }
    let half: Vec<f64> = zeta_grid.nodes().iter().map(|&z| 0.5 * spec.u0.eval(z)).collect();
    Ok((half.clone(), half))
}

/// Flux used in the KdV equations for a system forced by `eps^p f`.
///
/// The order-by-order balance puts `f` at order `eps`; for `p > 1` the
/// same flux enters with the extra weight `eps^(p-1)`.
pub fn effective_flux(params: &PhysParams, f: &NonlinearitySpec, eps: Epsilon) -> Polynomial {
    let weight = eps.get().powi(f.eps_power() as i32 - 1);
    nonlinear_flux(params, f).scaled(weight)
}

#[derive(Debug, Clone)]
pub struct BurstAsymptotics {
    pub left: Vec<KdvState>,
    pub right: Vec<KdvState>,
    pub zeta_grid: Grid1D,
    pub eps: Epsilon,
    pub c: f64,
    ratio: f64,
    spectral: Spectral,
}

impl BurstAsymptotics {
    /// Splits the burst and runs both KdV equations to every time in `times`.
    pub fn build(
        spec: &InitialConditionSpec,
        params: &PhysParams,
        f: &NonlinearitySpec,
        eps: Epsilon,
        zeta_grid: &Grid1D,
        times: &[f64],
    ) -> Result<Self> {
        spec.u0.validate()?;
        let (left0, right0) = split_initial_burst(spec, zeta_grid)?;
        let eff = EffectiveParams::new(params);
        let flux = effective_flux(params, f, eps);
        let left_solver = KdvSolver::from_effective(zeta_grid, &eff, &flux, Direction::Left);
        let right_solver = KdvSolver::from_effective(zeta_grid, &eff, &flux, Direction::Right);
        let (left, right) = rayon::join(
            || left_solver.simulate(&KdvState::new(left0, Direction::Left), times, None),
            || right_solver.simulate(&KdvState::new(right0, Direction::Right), times, None),
        );
        Ok(BurstAsymptotics {
            left: left?,
            right: right?,
            zeta_grid: *zeta_grid,
            eps,
            c: eff.c,
            ratio: params.ratio(),
            spectral: Spectral::new(zeta_grid),
        })
    }

    pub fn times(&self) -> Vec<f64> {
        self.left.iter().map(|s| s.t).collect()
    }

    fn index_of(&self, t: f64) -> Result<usize> {
        self.left
            .iter()
            .position(|s| (s.t - t).abs() <= 1e-12 * (1.0 + t.abs()))
            .ok_or(Error::MissingSnapshot(t))
    }

    /// `u` at the positions `x` and time `t` (which must be a snapshot time).
    pub fn compose_u(&self, x: &[f64], t: f64) -> Result<Vec<f64>> {
        let k = self.index_of(t)?;
        let left = ProfileView::new(&self.spectral, &self.zeta_grid, &self.left[k].s);
        let right = ProfileView::new(&self.spectral, &self.zeta_grid, &self.right[k].s);
        let eps = self.eps.get();
        x.iter()
            .map(|&xi| Ok(left.eval((xi - self.c * t) / eps)? + right.eval((xi + self.c * t) / eps)?))
            .collect()
    }

    /// Composed `(u, v)` with `v = (a/b) u`.
    pub fn compose(&self, x: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
        let u = self.compose_u(x, t)?;
        let v = u.iter().map(|&ui| self.ratio * ui).collect();
        Ok((u, v))
    }
}

/// Free-function form of [`BurstAsymptotics::compose`], with `v` through the manifold map.
pub fn compose(asym: &BurstAsymptotics, params: &PhysParams, x: &[f64], t: f64) -> Result<(Vec<f64>, Vec<f64>)> {
    let u = asym.compose_u(x, t)?;
    let v = u.iter().map(|&ui| equilibrium_projection(params, ui)).collect();
    Ok((u, v))
}

struct ProfileView<'a> {
    spectral: &'a Spectral,
    coeffs: Vec<Complex64>,
    half_length: f64,
    edge_decayed: bool,
    samples: &'a [f64],
    dx: f64,
}

impl<'a> ProfileView<'a> {
    fn new(spectral: &'a Spectral, grid: &Grid1D, samples: &'a [f64]) -> Self {
        let scale = samples.iter().fold(0.0f64, |m, x| m.max(x.abs()));
        let edge = edge_level(samples);
        ProfileView {
            spectral,
            coeffs: spectral.forward(samples),
            half_length: grid.half_length(),
            edge_decayed: edge <= OUTSIDE_TOLERANCE * scale,
            samples,
            dx: grid.dx(),
        }
    }

    fn eval(&self, zeta: f64) -> Result<f64> {
        if zeta < -self.half_length || zeta >= self.half_length {
            return if self.edge_decayed {
                Ok(0.0)
            } else {
                Err(Error::OutOfBox {
                    zeta,
                    half_length: self.half_length,
                })
            };
        }
        let offset = (zeta + self.half_length) / self.dx;
        let nearest = offset.round();
        if (offset - nearest).abs() < 1e-12 {
            return Ok(self.samples[nearest as usize % self.samples.len()]);
        }
        Ok(self.spectral.interpolate(&self.coeffs, zeta))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Profile;

    fn burst(amplitude: f64) -> InitialConditionSpec {
        InitialConditionSpec::burst(Profile::gaussian(amplitude, 1.0, 0.0), Profile::Zero)
    }

    #[test]
    fn split_halves() {
        let g = default_zeta_grid();
        let (l, r) = split_initial_burst(&burst(2.0), &g).unwrap();
        let peak = g.len() / 2;
        assert_eq!(g.node(peak), 0.0);
        assert_eq!(l[peak], 1.0);
        assert_eq!(r, l);
        let (l, r) = split_initial_burst(&burst(0.0), &g).unwrap();
        assert!(l.iter().chain(&r).all(|&x| x == 0.0));
        let smooth = InitialConditionSpec::smooth(Profile::gaussian(1.0, 1.0, 0.0), Profile::Zero);
        assert!(split_initial_burst(&smooth, &g).is_err());
    }

    #[test]
    fn split_reconstructs_burst() {
        let g = default_zeta_grid();
        let spec = burst(1.7);
        let (l, r) = split_initial_burst(&spec, &g).unwrap();
        for (i, z) in g.nodes().into_iter().enumerate() {
            let g = spec.u0.eval(z);
            assert!((l[i] + r[i] - g).abs() <= 1e-15 * g.abs() + 1e-300);
        }
    }

    #[test]
    fn round_trip_at_initial_time() {
        let params = PhysParams::canonical();
        let eps = Epsilon::new(0.3).unwrap();
        let spec = burst(1.0);
        let zg = default_zeta_grid();
        let asym = BurstAsymptotics::build(&spec, &params, &NonlinearitySpec::quadratic_u(), eps, &zg, &[0.0]).unwrap();
        let x_grid = Grid1D::new(10.0, 1024).unwrap();
        let (u, v) = asym.compose(&x_grid.nodes(), 0.0).unwrap();
        for (i, x) in x_grid.nodes().into_iter().enumerate() {
            let exact = spec.u0.eval(x / eps.get());
            assert!((u[i] - exact).abs() < 1e-12, "x = {x}: {}", u[i] - exact);
            assert_eq!(v[i], u[i]);
        }
    }

    #[test]
    fn zero_trajectories_give_zero_fields() {
        let params = PhysParams::canonical();
        let eps = Epsilon::new(0.3).unwrap();
        let asym = BurstAsymptotics::build(&burst(0.0), &params, &NonlinearitySpec::quadratic_u(), eps, &default_zeta_grid(), &[0.0, 0.5])
            .unwrap();
        let (u, v) = asym.compose(&[-1.0, 0.0, 0.3, 2.0], 0.5).unwrap();
        assert!(u.iter().chain(&v).all(|&x| x == 0.0));
    }

    #[test]
    fn manifold_closure_with_unequal_coupling() {
        let params = PhysParams::new(1.0, 4.0, 3.0, 2.0).unwrap();
        let eps = Epsilon::new(0.25).unwrap();
        let asym = BurstAsymptotics::build(&burst(1.0), &params, &NonlinearitySpec::quadratic_u(), eps, &default_zeta_grid(), &[0.4])
            .unwrap();
        let x: Vec<f64> = (0..200).map(|i| -3.0 + 0.03 * i as f64).collect();
        let (u, v) = compose(&asym, &params, &x, 0.4).unwrap();
        for i in 0..x.len() {
            assert!((v[i] - 1.5 * u[i]).abs() <= 1e-15 * u[i].abs().max(1.0));
            assert!((3.0 * u[i] - 2.0 * v[i]).abs() <= 1e-14);
        }
        assert!(matches!(asym.compose(&x, 0.3), Err(Error::MissingSnapshot(_))));
    }

    #[test]
    fn undecayed_profile_outside_box_is_rejected() {
        let params = PhysParams::canonical();
        let eps = Epsilon::new(0.5).unwrap();
        let zg = Grid1D::new(3.0, 64).unwrap();
        let wide = InitialConditionSpec::burst(Profile::gaussian(1.0, 3.0, 0.0), Profile::Zero);
        let asym = BurstAsymptotics {
            left: vec![KdvState::new(split_initial_burst(&wide, &zg).unwrap().0, Direction::Left)],
            right: vec![KdvState::new(split_initial_burst(&wide, &zg).unwrap().1, Direction::Right)],
            zeta_grid: zg,
            eps,
            c: EffectiveParams::new(&params).c,
            ratio: 1.0,
            spectral: Spectral::new(&zg),
        };
        assert!(asym.compose(&[0.0], 0.0).is_ok());
        assert!(matches!(asym.compose(&[5.0], 0.0), Err(Error::OutOfBox { .. })));
    }
}
