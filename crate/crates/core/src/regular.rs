//! Leading-order regular asymptotics for smooth data.
//!
//! `u0_bar` solves `u_tt = c^2 u_xx` with the original initial data, so it is
//! given by d'Alembert's formula. `v0_bar` follows from the manifold relation.

use crate::domain::{
    equilibrium_projection, FieldPair, Grid1D, InitialConditionSpec, InitialKind, NonlinearitySpec,
    PhysParams,
};
use crate::effective::effective_speed_squared;
use crate::error::{Error, Result};
use crate::quadrature::integrate;

/// Absolute tolerance of the velocity integral.
pub const QUADRATURE_TOLERANCE: f64 = 1e-10;

/// d'Alembert solution of the effective wave equation at `(x, t)`.
pub fn dalembert_u0(spec: &InitialConditionSpec, c: f64, x: f64, t: f64) -> f64 {
    let left = x - c * t;
    let right = x + c * t;
    let displacement = 0.5 * (spec.u0.eval(left) + spec.u0.eval(right));
    if t == 0.0 {
        return displacement;
    }
    let impulse = integrate(|s| spec.phi.eval(s), left, right, QUADRATURE_TOLERANCE);
    displacement + impulse / (2.0 * c)
}

/// Time derivative of [`dalembert_u0`].
pub fn dalembert_u0_rate(spec: &InitialConditionSpec, c: f64, x: f64, t: f64) -> f64 {
    let left = x - c * t;
    let right = x + c * t;
    0.5 * c * (spec.u0.derivative(right) - spec.u0.derivative(left))
        + 0.5 * (spec.phi.eval(right) + spec.phi.eval(left))
}

pub fn v0_from_u0(params: &PhysParams, u0: f64) -> f64 {
    equilibrium_projection(params, u0)
}

/// Order-one closure `(1/b) f(u0, (a/b) u0)`, taking `u1_bar = 0`.
pub fn v1_correction(params: &PhysParams, f: &NonlinearitySpec, u0: f64) -> f64 {
    f.evaluate(u0, equilibrium_projection(params, u0)) / params.b
}

/// The principal regular terms for one smooth initial condition.
#[derive(Debug, Clone)]
pub struct RegularExpansion {
    spec: InitialConditionSpec,
    params: PhysParams,
    f: NonlinearitySpec,
    c: f64,
}

impl RegularExpansion {
    pub fn new(spec: &InitialConditionSpec, params: &PhysParams, f: &NonlinearitySpec) -> Result<Self> {
        if spec.kind != InitialKind::Smooth {
            return Err(Error::invalid("initial.kind", "regular expansion needs smooth data"));
        }
        params.validate()?;
        Ok(RegularExpansion {
            spec: *spec,
            params: *params,
            f: f.clone(),
            c: effective_speed_squared(params).sqrt(),
        })
    }

    pub fn speed(&self) -> f64 {
        self.c
    }

    pub fn u0_bar(&self, x: f64, t: f64) -> f64 {
        dalembert_u0(&self.spec, self.c, x, t)
    }

    pub fn v0_bar(&self, x: f64, t: f64) -> f64 {
        v0_from_u0(&self.params, self.u0_bar(x, t))
    }

    pub fn v1_bar(&self, x: f64, t: f64) -> f64 {
        v1_correction(&self.params, &self.f, self.u0_bar(x, t))
    }

    /// `(u0_bar, v0_bar)` and their time derivatives on the grid at time `t`.
    pub fn fields(&self, grid: &Grid1D, t: f64) -> FieldPair {
        let n = grid.len();
        let mut out = FieldPair::zeros(n, t);
        for i in 0..n {
            let x = grid.node(i);
            let u = self.u0_bar(x, t);
            let p = dalembert_u0_rate(&self.spec, self.c, x, t);
            out.u[i] = u;
            out.v[i] = v0_from_u0(&self.params, u);
            out.p[i] = p;
            out.q[i] = v0_from_u0(&self.params, p);
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::Profile;

    fn smooth(u0: Profile, phi: Profile) -> InitialConditionSpec {
        InitialConditionSpec::smooth(u0, phi)
    }

    #[test]
    fn initial_time_is_identity() {
        let spec = smooth(Profile::gaussian(1.2, 0.8, 0.3), Profile::gaussian(0.5, 1.0, 0.0));
        for &x in &[-2.0, -0.1, 0.0, 0.7, 3.0] {
            assert_eq!(dalembert_u0(&spec, 1.5, x, 0.0), spec.u0.eval(x));
        }
    }

    #[test]
    fn zero_velocity_is_half_sum() {
        let spec = smooth(Profile::gaussian(1.0, 1.0, 0.0), Profile::Zero);
        let (c, x, t) = (1.3, 0.4, 0.9);
        let expected = 0.5 * (spec.u0.eval(x - c * t) + spec.u0.eval(x + c * t));
        assert_eq!(dalembert_u0(&spec, c, x, t), expected);
    }

    #[test]
    fn pure_velocity_matches_erf_expression() {
        use statrs::function::erf::erf;
        let spec = smooth(Profile::Zero, Profile::gaussian(1.0, 1.0, 0.0));
        let c = 2.5f64.sqrt();
        let (x, t) = (0.0, 1.0);
        // int exp(-s^2) ds over [x-ct, x+ct] = sqrt(pi)/2 [erf(x+ct) - erf(x-ct)]
        let exact = std::f64::consts::PI.sqrt() / 2.0 * (erf(x + c * t) - erf(x - c * t)) / (2.0 * c);
        assert!((dalembert_u0(&spec, c, x, t) - exact).abs() < 1e-10);
    }

    #[test]
    fn closures() {
        let p = PhysParams::new(1.0, 4.0, 2.0, 4.0).unwrap();
        assert_eq!(v0_from_u0(&p, 10.0), 5.0);
        assert_eq!(v0_from_u0(&p, 0.0), 0.0);
        let q = PhysParams::canonical();
        assert_eq!(v1_correction(&q, &NonlinearitySpec::zero(), 2.0), 0.0);
        assert_eq!(v1_correction(&q, &NonlinearitySpec::quadratic_u(), 2.0), 4.0);
        let r = PhysParams::new(1.0, 4.0, 1.0, 4.0).unwrap();
        assert_eq!(v1_correction(&r, &NonlinearitySpec::quadratic_u(), 2.0), 1.0);
    }

    #[test]
    fn satisfies_wave_equation_and_initial_rate() {
        let spec = smooth(Profile::gaussian(1.0, 1.0, 0.0), Profile::gaussian(0.7, 0.9, 0.5));
        let params = PhysParams::canonical();
        let reg = RegularExpansion::new(&spec, &params, &NonlinearitySpec::quadratic_u()).unwrap();
        let c2 = reg.speed().powi(2);
        let h = 1e-3;
        for &x in &[-2.0, -0.5, 0.0, 0.8, 1.9] {
            for &t in &[0.3, 0.7, 1.2] {
                let u = |x, t| reg.u0_bar(x, t);
                let utt = (u(x, t + h) - 2.0 * u(x, t) + u(x, t - h)) / (h * h);
                let uxx = (u(x + h, t) - 2.0 * u(x, t) + u(x - h, t)) / (h * h);
                assert!((utt - c2 * uxx).abs() < 1e-4, "({x}, {t}): {}", utt - c2 * uxx);
            }
            let rate = (reg.u0_bar(x, h) - reg.u0_bar(x, -h)) / (2.0 * h);
            assert!((rate - spec.phi.eval(x)).abs() < 1e-6);
            assert!((dalembert_u0_rate(&spec, reg.speed(), x, 0.0) - spec.phi.eval(x)).abs() < 1e-15);
        }
    }

    #[test]
    fn burst_data_rejected() {
        let spec = InitialConditionSpec::burst(Profile::gaussian(1.0, 1.0, 0.0), Profile::Zero);
        assert!(RegularExpansion::new(&spec, &PhysParams::canonical(), &NonlinearitySpec::zero()).is_err());
    }
}
