//! Berezin–Toeplitz approximation of functions on a polarized Riemann sphere.
//!
//! For `(P^1, O(k), h)` with `h = h_FS^k e^{-psi}`, the crate builds an
//! orthonormal basis of `V_N = H^0(P^1, O(kN))`, the Bergman density `E_N`,
//! the kernel `K_N`, Toeplitz matrices `T_{f,N}`, and the approximation
//! operators
//!
//! * `P_N f(z) = ∫ K_N(z,z')/E_N(z) f(z') dV_M(z')`,
//! * `Q_N f(z) = Vol(M)/(d_N+1) ∫ K_N(z,z') f(z') dV_M(z')`,
//! * `P^0_N f = P_N f - tr T_{f,N}/(d_N+1)`, also computed as the pullback of
//!   the moment map of `P(V_N^*)` paired with `i T^0_{f,N}`.
//!
//! See `examples/` for one runnable program per capability, and the
//! `approxctl` binary for the manifest-driven experiment runner.

pub mod approximation;
pub mod cli;
pub mod error;
pub mod geometry;
pub mod kernels;
pub mod quadrature;
pub mod sections;
pub mod spectral;
pub mod toeplitz;

pub use approximation::{
    apply_p0n, apply_pn, apply_qn, apply_tn, convergence_study, rate_fit, sup_error,
    trace_mean_deviation, ApproxRecord, ApproxReport, KernelIntegrator, ProbeGrid, RateFit,
};
pub use error::{Error, Result};
pub use geometry::{
    make_geometry, sphere_to_homogeneous, HarmonicTerm, HomogeneousRep, ModelGeometry,
    Perturbation, SpherePoint,
};
pub use kernels::KernelEvaluator;
pub use quadrature::{gauss_legendre, product_rule, recommended_rule, QuadratureRule};
pub use sections::{closed_form_norms, gram_matrix, orthonormal_basis, SectionBasis};
pub use spectral::{
    chi_via_operator, funk_hecke_chi, legendre, real_spherical_harmonic, SpectralTable,
};
pub use toeplitz::{
    moment_map_value, toeplitz_matrix, SphereFunction, TestFunction, ToeplitzMatrix,
};
