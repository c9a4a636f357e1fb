//! Direct solver and leading-order asymptotics for a singularly perturbed
//! system of two coupled strings.
//!
//! * [`domain`]: parameters, nonlinearity, grid, fields, initial data
//! * [`effective`]: effective speed, dispersion and flux constants
//! * [`full_solver`]: Strang-split integrator for the stiff system
//! * [`regular`]: d'Alembert-based regular asymptotics for smooth data
//! * [`kdv`]: integrating-factor spectral solver for the generalized KdV equations
//! * [`composer`]: two-wave burst asymptotics built from the KdV solutions
//! * [`verifier`]: residuals, error norms and eps-convergence sweeps
//! * [`cli`]: JSON-configured command line front end

pub mod cli;
pub mod composer;
pub mod domain;
pub mod effective;
pub mod error;
pub mod full_solver;
pub mod kdv;
pub mod quadrature;
pub mod regular;
pub mod spectral;
pub mod verifier;

pub use domain::{
    equilibrium_projection, evaluate_nonlinearity, sample_initial, Epsilon, FieldPair, Grid1D,
    InitialConditionSpec, InitialKind, NonlinearitySpec, PhysParams, Polynomial, Profile, Term,
};
pub use effective::EffectiveParams;
pub use error::{Error, Result};
