//! Covariant maximum-likelihood estimation of displacement and real squeezing
//! on the affine group `ax + b`.
//!
//! States are wavefunctions in the `Y`-quadrature representation, on which a
//! group element `(x, r)` acts as `(U_{x,r} ψ)(y) = e^{r/2} e^{-2ixy} ψ(e^r y)`.
//! The representation splits into the half-line sectors `y > 0` and `y < 0`;
//! optimal seeds, likelihoods and estimation densities are built per sector.

pub mod asymptotics;
pub mod distribution;
pub mod error;
pub mod grid;
pub mod group;
pub mod povm;
pub mod two_mode;
pub mod validation;

pub use asymptotics::{heisenberg_ratio, isotropic_params, model_density, rms_predictions, separate_optima, AsymptoticModel};
pub use distribution::{argmax, density_at, moments, normalization_check, scan, DensityMap, SummaryStats, Window};
pub use error::{Error, Result};
pub use grid::{
    inner_product, make_coherent, make_displaced_squeezed, make_gaussian_monomial, GaussianStateParams, QuadratureGrid,
    Sector, StateVector,
};
pub use group::{act, compose, inverse, left_haar_weight, right_haar_weight, ExtendedElement, GroupElement};
pub use povm::{build_ml_seed, build_parity_seed, build_srm_seed, optimal_likelihood, srm_likelihood, PovmSeed, SeedKind};
pub use two_mode::{concentration_profile, make_pointer, pointer_overlap, PointerSign, TwoModePointer};
pub use validation::{run_validation, ValidationConfig, ValidationReport};
