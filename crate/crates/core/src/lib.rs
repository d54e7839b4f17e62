//! Numerical toolkit for the multivariate Gaussian Stein equation.
//!
//! * [`special`]: gamma function, Hermite polynomials, multi-indices.
//! * [`gaussian`]: expectations under N(0, I_d), norm moments, sampling.
//! * [`test_functions`]: target functions with declared Hölder regularity.
//! * [`stein`]: the solution f_h, its derivatives and the PDE residual.
//! * [`constants`]: explicit regularity constants and Berry–Esseen bounds.
//! * [`regularity`]: empirical Hölder-modulus probes and the max-min example.
//! * [`transport`]: exact W₁ between equal-size empirical measures.
//! * [`clt`]: normalized-sum simulations measured against the bounds.

pub mod clt;
pub mod constants;
pub mod error;
pub mod gaussian;
pub mod quadrature;
pub mod regularity;
pub mod rng;
pub mod special;
pub mod stein;
pub mod test_functions;
pub mod transport;

pub use clt::{builtin_source, run_experiment, simulate_sum, CltExperiment, RateTable, SourceDistribution, SourceSpec};
pub use constants::{berry_esseen_bound, c1, c2, cor_constant, BoundKind, BoundReport};
pub use error::{Error, Result};
pub use gaussian::{gaussian_norm_moment, sample_gaussian, Estimate, ExpectationMethod, ExpectationSpec, GaussianEngine};
pub use regularity::{opnorm, raic_cross_partial_gap, PairPlan};
pub use rng::Stream;
pub use special::{gamma, hermite, MultiIndex};
pub use stein::{Approx, SteinConfig, SteinSolution};
pub use test_functions::{builtin, check_holder, FunctionSpec, TestFunction};
pub use transport::{w1_dual_lower_bound, w1_exact, EmpiricalSample};
