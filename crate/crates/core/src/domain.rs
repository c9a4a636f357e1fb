//! Domain types for the coupled two-string system
//!
//! ```text
//! eps^3 (u_tt - k1 u_xx) = -a u + b v + eps^p f(u, v)
//! eps^3 (v_tt - k2 v_xx) =  a u - b v - eps^p f(u, v)
//! ```
//!
//! on a periodic box `[-L, L)`, with `p = 2` by default. Everything here is
//! plain value data: parameters, the polynomial nonlinearity, the grid, the
//! sampled fields and the initial-condition profiles.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Relative level below which a profile counts as decayed at the box edge.
pub const DECAY_TOLERANCE: f64 = 1e-12;

/// Physical constants of the system. `k1`, `k2` are squared wave speeds.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhysParams {
    pub k1: f64,
    pub k2: f64,
    pub a: f64,
    pub b: f64,
}

impl PhysParams {
    pub fn new(k1: f64, k2: f64, a: f64, b: f64) -> Result<Self> {
        let p = PhysParams { k1, k2, a, b };
        p.validate()?;
        Ok(p)
    }

    /// The benchmark set `k1 = 1, k2 = 4, a = b = 1`.
    pub fn canonical() -> Self {
        PhysParams {
            k1: 1.0,
            k2: 4.0,
            a: 1.0,
            b: 1.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        for (name, value) in [("k1", self.k1), ("k2", self.k2), ("a", self.a), ("b", self.b)] {
            if !(value.is_finite() && value > 0.0) {
                return Err(Error::invalid(name, format!("must be finite and > 0, got {value}")));
            }
        }
        Ok(())
    }

    /// `a / b`, the slope of the equilibrium manifold `v = (a/b) u`.
    pub fn ratio(&self) -> f64 {
        self.a / self.b
    }

    pub fn max_speed(&self) -> f64 {
        self.k1.max(self.k2).sqrt()
    }

    /// Angular frequency of the off-manifold mode `d = a u - b v`.
    pub fn relaxation_frequency(&self, eps: Epsilon) -> f64 {
        ((self.a + self.b) / eps.get().powi(3)).sqrt()
    }
}

/// Small parameter, `0 < eps <= 1`.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct Epsilon(f64);

impl Epsilon {
    pub fn new(eps: f64) -> Result<Self> {
        if eps.is_finite() && eps > 0.0 && eps <= 1.0 {
            Ok(Epsilon(eps))
        } else {
            Err(Error::invalid("eps", format!("must lie in (0, 1], got {eps}")))
        }
    }

    pub fn get(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for Epsilon {
    type Error = Error;
    fn try_from(value: f64) -> Result<Self> {
        Epsilon::new(value)
    }
}

impl From<Epsilon> for f64 {
    fn from(e: Epsilon) -> f64 {
        e.0
    }
}

/// One monomial `coeff * u^i * v^j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Term {
    pub i: u32,
    pub j: u32,
    pub coeff: f64,
}

impl Term {
    pub fn new(i: u32, j: u32, coeff: f64) -> Self {
        Term { i, j, coeff }
    }
}

/// Sum of the monomials in `terms`, evaluated as written.
pub fn evaluate_terms(terms: &[Term], u: f64, v: f64) -> f64 {
    terms
        .iter()
        .map(|t| t.coeff * u.powi(t.i as i32) * v.powi(t.j as i32))
        .sum()
}

/// Polynomial coupling nonlinearity `f(u, v)`, entering the system as `eps^power * f`.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    terms: Vec<Term>,
    eps_power: u32,
}

impl NonlinearitySpec {
    pub fn new(terms: Vec<Term>) -> Result<Self> {
        Self::with_eps_power(terms, 2)
    }

    pub fn with_eps_power(terms: Vec<Term>, eps_power: u32) -> Result<Self> {
        for (k, t) in terms.iter().enumerate() {
            if !t.coeff.is_finite() {
                return Err(Error::invalid(
                    "nonlinearity",
                    format!("term {k} has a non-finite coefficient"),
                ));
            }
            if terms[..k].iter().any(|s| s.i == t.i && s.j == t.j) {
                return Err(Error::invalid(
                    "nonlinearity",
                    format!("exponent pair ({}, {}) appears more than once", t.i, t.j),
                ));
            }
        }
        if !(1..=3).contains(&eps_power) {
            return Err(Error::invalid("eps_power", format!("must be 1, 2 or 3, got {eps_power}")));
        }
        Ok(NonlinearitySpec { terms, eps_power })
    }

    pub fn zero() -> Self {
        NonlinearitySpec {
            terms: Vec::new(),
            eps_power: 2,
        }
    }

    /// `f(u, v) = u^2`.
    pub fn quadratic_u() -> Self {
        NonlinearitySpec {
            terms: vec![Term::new(2, 0, 1.0)],
            eps_power: 2,
        }
    }

    pub fn terms(&self) -> &[Term] {
        &self.terms
    }

    pub fn eps_power(&self) -> u32 {
        self.eps_power
    }

    pub fn is_zero(&self) -> bool {
        self.terms.iter().all(|t| t.coeff == 0.0)
    }

    /// Weight `eps^power` multiplying `f` in the system.
    pub fn forcing_weight(&self, eps: Epsilon) -> f64 {
        eps.get().powi(self.eps_power as i32)
    }

    pub fn evaluate(&self, u: f64, v: f64) -> f64 {
        evaluate_terms(&self.terms, u, v)
    }
}

pub fn evaluate_nonlinearity(f: &NonlinearitySpec, u: f64, v: f64) -> f64 {
    f.evaluate(u, v)
}

/// Point on the equilibrium manifold `a u - b v = 0` above `u`.
pub fn equilibrium_projection(params: &PhysParams, u: f64) -> f64 {
    params.a * u / params.b
}

/// Univariate polynomial, `coeffs[k]` multiplies `s^k`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Polynomial {
    pub coeffs: Vec<f64>,
}

impl Polynomial {
    pub fn new(coeffs: Vec<f64>) -> Self {
        Polynomial { coeffs }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    pub fn eval(&self, s: f64) -> f64 {
        self.coeffs.iter().rev().fold(0.0, |acc, &c| acc * s + c)
    }

    pub fn derivative(&self) -> Polynomial {
        Polynomial::new(
            self.coeffs
                .iter()
                .enumerate()
                .skip(1)
                .map(|(k, &c)| k as f64 * c)
                .collect(),
        )
    }

    pub fn scaled(&self, factor: f64) -> Polynomial {
        Polynomial::new(self.coeffs.iter().map(|c| c * factor).collect())
    }
}

/// Uniform periodic grid on `[-L, L)` with `n` nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_length: f64,
    n: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, n: usize) -> Result<Self> {
        if !(half_length.is_finite() && half_length > 0.0) {
            return Err(Error::invalid("L", format!("must be finite and > 0, got {half_length}")));
        }
        if n < 8 || !n.is_power_of_two() {
            return Err(Error::invalid("n", format!("must be a power of two >= 8, got {n}")));
        }
        Ok(Grid1D { half_length, n })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn period(&self) -> f64 {
        2.0 * self.half_length
    }

    pub fn dx(&self) -> f64 {
        self.period() / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        -self.half_length + (i % self.n) as f64 * self.dx()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Sampled `(u, v)` and their time derivatives `p = u_t`, `q = v_t`.
#[derive(Debug, Clone, PartialEq)]
pub struct FieldPair {
    pub u: Vec<f64>,
    pub v: Vec<f64>,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub time: f64,
}

impl FieldPair {
    pub fn zeros(n: usize, time: f64) -> Self {
        FieldPair {
            u: vec![0.0; n],
            v: vec![0.0; n],
            p: vec![0.0; n],
            q: vec![0.0; n],
            time,
        }
    }

    pub fn len(&self) -> usize {
        self.u.len()
    }

    pub fn is_empty(&self) -> bool {
        self.u.is_empty()
    }

    pub fn is_finite(&self) -> bool {
        [&self.u, &self.v, &self.p, &self.q]
            .iter()
            .all(|a| a.iter().all(|x| x.is_finite()))
    }

    pub fn check_len(&self, n: usize) -> Result<()> {
        if [&self.u, &self.v, &self.p, &self.q].iter().all(|a| a.len() == n) {
            Ok(())
        } else {
            Err(Error::GridMismatch(format!("field arrays do not all have length {n}")))
        }
    }

    /// `max |a u - b v|` over the grid.
    pub fn manifold_distance(&self, params: &PhysParams) -> f64 {
        self.u
            .iter()
            .zip(&self.v)
            .map(|(u, v)| (params.a * u - params.b * v).abs())
            .fold(0.0, f64::max)
    }
}

/// Decaying shape used for `u0` and `phi`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Profile {
    Zero,
    /// `A exp(-((x - x0)/w)^2)`
    Gaussian { amplitude: f64, width: f64, center: f64 },
    /// Plateau of half-width `half_width` with tanh edges of width `width`:
    /// `A/2 [tanh((x - x0 + h)/w) - tanh((x - x0 - h)/w)]`.
    /// Only exponentially decaying.
    SmoothedStep {
        amplitude: f64,
        width: f64,
        center: f64,
        half_width: f64,
    },
}

impl Profile {
    pub fn gaussian(amplitude: f64, width: f64, center: f64) -> Self {
        Profile::Gaussian {
            amplitude,
            width,
            center,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let (amplitude, width, center, half_width) = match *self {
            Profile::Zero => return Ok(()),
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => (amplitude, width, center, 0.0),
            Profile::SmoothedStep {
                amplitude,
                width,
                center,
                half_width,
            } => (amplitude, width, center, half_width),
        };
        if !amplitude.is_finite() || !center.is_finite() {
            return Err(Error::invalid("profile", "amplitude and center must be finite"));
        }
        if !(width.is_finite() && width > 0.0) {
            return Err(Error::invalid("width", format!("must be > 0, got {width}")));
        }
        if !(half_width.is_finite() && half_width >= 0.0) {
            return Err(Error::invalid("half_width", format!("must be >= 0, got {half_width}")));
        }
        Ok(())
    }

    pub fn amplitude(&self) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { amplitude, .. } | Profile::SmoothedStep { amplitude, .. } => {
                amplitude.abs()
            }
        }
    }

    /// Gaussian-type decay `C exp(-kappa x^2)`.
    pub fn decays_like_gaussian(&self) -> bool {
        !matches!(self, Profile::SmoothedStep { .. })
    }

    pub fn eval(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let y = (x - center) / width;
                amplitude * (-y * y).exp()
            }
            Profile::SmoothedStep {
                amplitude,
                width,
                center,
                half_width,
            } => {
                let y = x - center;
                0.5 * amplitude * (((y + half_width) / width).tanh() - ((y - half_width) / width).tanh())
            }
        }
    }

    pub fn derivative(&self, x: f64) -> f64 {
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian {
                amplitude,
                width,
                center,
            } => {
                let y = (x - center) / width;
                -2.0 * y / width * amplitude * (-y * y).exp()
            }
            Profile::SmoothedStep {
                amplitude,
                width,
                center,
                half_width,
            } => {
                let y = x - center;
                let sech2 = |z: f64| 1.0 / z.cosh().powi(2);
                0.5 * amplitude / width
                    * (sech2((y + half_width) / width) - sech2((y - half_width) / width))
            }
        }
    }

    /// Distance from the center beyond which `|profile| < tol * amplitude`.
    pub fn extent(&self, tol: f64) -> f64 {
        let log = (1.0 / tol).ln().max(0.0);
        match *self {
            Profile::Zero => 0.0,
            Profile::Gaussian { width, center, .. } => center.abs() + width * log.sqrt(),
            Profile::SmoothedStep {
                width,
                center,
                half_width,
                ..
            } => center.abs() + half_width + 0.5 * width * log,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InitialKind {
    /// Profiles evaluated at `x`.
    Smooth,
    /// Profiles evaluated at `x / eps`.
    Burst,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct InitialConditionSpec {
    pub kind: InitialKind,
    pub u0: Profile,
    pub phi: Profile,
}

impl InitialConditionSpec {
    pub fn smooth(u0: Profile, phi: Profile) -> Self {
        InitialConditionSpec {
            kind: InitialKind::Smooth,
            u0,
            phi,
        }
    }

    pub fn burst(u0: Profile, phi: Profile) -> Self {
        InitialConditionSpec {
            kind: InitialKind::Burst,
            u0,
            phi,
        }
    }

    /// Profile argument for position `x`.
    pub fn argument(&self, x: f64, eps: Epsilon) -> f64 {
        match self.kind {
            InitialKind::Smooth => x,
            InitialKind::Burst => x / eps.get(),
        }
    }

    /// Radius in `x` outside which both profiles are below `tol` of their amplitude.
    pub fn extent(&self, eps: Epsilon, tol: f64) -> f64 {
        let scale = match self.kind {
            InitialKind::Smooth => 1.0,
            InitialKind::Burst => eps.get(),
        };
        scale * self.u0.extent(tol).max(self.phi.extent(tol))
    }

    pub fn amplitude(&self) -> f64 {
        self.u0.amplitude().max(self.phi.amplitude())
    }

    /// Each profile must be below `DECAY_TOLERANCE` of its amplitude at `x = +-L`.
    pub fn check_decay(&self, grid: &Grid1D, eps: Epsilon) -> Result<()> {
        let l = grid.half_length();
        for (which, profile) in [("u0", &self.u0), ("phi", &self.phi)] {
            profile.validate()?;
            let amplitude = profile.amplitude();
            if amplitude == 0.0 {
                continue;
            }
            let limit = DECAY_TOLERANCE * amplitude;
            let edge = profile
                .eval(self.argument(-l, eps))
                .abs()
                .max(profile.eval(self.argument(l, eps)).abs());
            if edge >= limit {
                return Err(Error::DecayViolation {
                    which: which.to_string(),
                    value: edge,
                    limit,
                });
            }
        }
        Ok(())
    }
}

/// Samples the initial data on the grid, placing `(v, q)` on the manifold.
pub fn sample_initial(
    spec: &InitialConditionSpec,
    grid: &Grid1D,
    eps: Epsilon,
    params: &PhysParams,
) -> Result<FieldPair> {
    spec.check_decay(grid, eps)?;
    let n = grid.len();
    let mut state = FieldPair::zeros(n, 0.0);
    for i in 0..n {
        let s = spec.argument(grid.node(i), eps);
        let u = spec.u0.eval(s);
        let p = spec.phi.eval(s);
        state.u[i] = u;
        state.p[i] = p;
        state.v[i] = equilibrium_projection(params, u);
        state.q[i] = equilibrium_projection(params, p);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn nonlinearity_examples() {
        let f = NonlinearitySpec::quadratic_u();
        assert_eq!(evaluate_nonlinearity(&f, 3.0, 7.0), 9.0);
        assert_eq!(evaluate_nonlinearity(&f, 0.0, 0.0), 0.0);
        let g = NonlinearitySpec::new(vec![Term::new(1, 1, 2.0), Term::new(0, 2, -1.0)]).unwrap();
        assert_eq!(evaluate_nonlinearity(&g, 1.0, 2.0), 0.0);
    }

    #[test]
    fn duplicate_exponents_rejected() {
        let err = NonlinearitySpec::new(vec![Term::new(2, 0, 1.0), Term::new(2, 0, 3.0)]);
        assert!(matches!(err, Err(Error::InvalidParameter { .. })));
    }

    #[test]
    fn projection_examples() {
        let p = PhysParams::new(1.0, 4.0, 2.0, 2.0).unwrap();
        assert_eq!(equilibrium_projection(&p, 5.0), 5.0);
        assert_eq!(equilibrium_projection(&p, 0.0), 0.0);
        let p = PhysParams::new(1.0, 4.0, 3.0, 2.0).unwrap();
        assert_eq!(equilibrium_projection(&p, 4.0), 6.0);
    }

    #[test]
    fn parameter_validation() {
        assert!(PhysParams::new(1.0, 4.0, -1.0, 1.0).is_err());
        assert!(PhysParams::new(0.0, 4.0, 1.0, 1.0).is_err());
        assert!(Epsilon::new(0.0).is_err());
        assert!(Epsilon::new(1.5).is_err());
        assert!(Epsilon::new(1.0).is_ok());
        assert!(Grid1D::new(10.0, 100).is_err());
        assert!(Grid1D::new(10.0, 4).is_err());
        assert!(Grid1D::new(10.0, 64).is_ok());
    }

    #[test]
    fn grid_nodes_wrap() {
        let g = Grid1D::new(2.0, 8).unwrap();
        assert_eq!(g.node(0), -2.0);
        assert_eq!(g.dx(), 0.5);
        assert_eq!(g.node(8), g.node(0));
    }

    #[test]
    fn smooth_sampling_lies_on_manifold() {
        let grid = Grid1D::new(20.0, 256).unwrap();
        let params = PhysParams::canonical();
        let spec = InitialConditionSpec::smooth(Profile::gaussian(1.0, 1.0, 0.0), Profile::Zero);
        let eps = Epsilon::new(0.3).unwrap();
        let s = sample_initial(&spec, &grid, eps, &params).unwrap();
        for i in 0..grid.len() {
            let g = (-grid.node(i).powi(2)).exp();
            assert_eq!(s.u[i], g);
            assert_eq!(s.v[i], g);
            assert_eq!(s.p[i], 0.0);
            assert_eq!(s.q[i], 0.0);
        }
        assert_eq!(s.time, 0.0);
    }

    #[test]
    fn burst_sampling_is_narrower() {
        let grid = Grid1D::new(20.0, 256).unwrap();
        let params = PhysParams::canonical();
        let eps = Epsilon::new(0.5).unwrap();
        let profile = Profile::gaussian(1.0, 2.0, 0.0);
        let smooth = sample_initial(&InitialConditionSpec::smooth(profile, Profile::Zero), &grid, eps, &params).unwrap();
        let burst = sample_initial(&InitialConditionSpec::burst(profile, Profile::Zero), &grid, eps, &params).unwrap();
        // burst at x equals smooth at 2x
        for i in 64..192 {
            let j = 2 * i - 128;
            assert!((burst.u[i] - smooth.u[j]).abs() < 1e-15);
        }
    }

    #[test]
    fn wide_gaussian_violates_decay() {
        let grid = Grid1D::new(10.0, 64).unwrap();
        let spec = InitialConditionSpec::smooth(Profile::gaussian(1.0, 5.0, 0.0), Profile::Zero);
        let err = sample_initial(&spec, &grid, Epsilon::new(0.3).unwrap(), &PhysParams::canonical());
        match err {
            Err(Error::DecayViolation { which, value, .. }) => {
                assert_eq!(which, "u0");
                assert!((value - (-4.0f64).exp()).abs() < 1e-15);
            }
            other => panic!("expected DecayViolation, got {other:?}"),
        }
    }

    #[test]
    fn smoothed_step_is_not_gaussian_decaying() {
        let step = Profile::SmoothedStep {
            amplitude: 1.0,
            width: 2.0,
            center: 0.0,
            half_width: 2.0,
        };
        assert!(!step.decays_like_gaussian());
        assert!((step.eval(0.0) - (1.0f64).tanh()).abs() < 1e-15);
        let grid = Grid1D::new(10.0, 64).unwrap();
        let spec = InitialConditionSpec::smooth(step, Profile::Zero);
        assert!(spec.check_decay(&grid, Epsilon::new(0.3).unwrap()).is_err());
        // the same plateau as a burst fits in the box
        let spec = InitialConditionSpec::burst(step, Profile::Zero);
        assert!(spec.check_decay(&grid, Epsilon::new(0.3).unwrap()).is_ok());
    }

    #[test]
    fn profile_derivatives_match_differences() {
        let profiles = [
            Profile::gaussian(1.3, 0.7, 0.2),
            Profile::SmoothedStep {
                amplitude: -0.4,
                width: 0.3,
                center: 0.1,
                half_width: 1.0,
            },
        ];
        for p in profiles {
            for &x in &[-1.1, -0.3, 0.0, 0.45, 1.2] {
                let h = 1e-5;
                let fd = (p.eval(x + h) - p.eval(x - h)) / (2.0 * h);
                assert!((fd - p.derivative(x)).abs() < 1e-8, "{p:?} at {x}");
            }
        }
    }

    #[test]
    fn polynomial_eval() {
        let p = Polynomial::new(vec![1.0, -2.0, 3.0]);
        assert_eq!(p.eval(2.0), 1.0 - 4.0 + 12.0);
        assert_eq!(p.derivative().coeffs, vec![-2.0, 6.0]);
    }

    fn term_strategy() -> impl Strategy<Value = Term> {
        (0u32..4, 0u32..4, -3.0f64..3.0).prop_map(|(i, j, c)| Term::new(i, j, c))
    }

    proptest! {
        #[test]
        fn evaluation_is_linear_in_the_term_table(
            first in proptest::collection::vec(term_strategy(), 0..5),
            second in proptest::collection::vec(term_strategy(), 0..5),
            u in -2.0f64..2.0,
            v in -2.0f64..2.0,
        ) {
            let mut joined = first.clone();
            joined.extend_from_slice(&second);
            let lhs = evaluate_terms(&joined, u, v);
            let rhs = evaluate_terms(&first, u, v) + evaluate_terms(&second, u, v);
            prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + lhs.abs()));
        }

        #[test]
        fn initial_data_on_manifold(
            a in 0.1f64..5.0, b in 0.1f64..5.0,
            amp in -2.0f64..2.0, width in 0.3f64..2.0, center in -1.0f64..1.0,
            burst in any::<bool>(),
        ) {
            let params = PhysParams::new(1.0, 2.0, a, b).unwrap();
            let grid = Grid1D::new(20.0, 128).unwrap();
            let profile = Profile::gaussian(amp, width, center);
            let phi = Profile::gaussian(0.5 * amp, width, -center);
            let spec = if burst {
                InitialConditionSpec::burst(profile, phi)
            } else {
                InitialConditionSpec::smooth(profile, phi)
            };
            let s = sample_initial(&spec, &grid, Epsilon::new(0.4).unwrap(), &params).unwrap();
            for i in 0..grid.len() {
                prop_assert!((a * s.u[i] - b * s.v[i]).abs() <= 1e-14 * (1.0 + s.u[i].abs()) * a);
                prop_assert!((a * s.p[i] - b * s.q[i]).abs() <= 1e-14 * (1.0 + s.p[i].abs()) * a);
            }
        }
    }
}
