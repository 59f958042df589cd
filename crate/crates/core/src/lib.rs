//! Closed-form model heat kernels and asymptotic densities of the Kohn
//! Laplacian, with the Morse-inequality integrals they degenerate to and
//! brute-force oracles to check them against.
//!
//! Everything numeric is generic over `f32`/`f64` through [`Real`]; the
//! `*64` aliases fix `f64`.

// `!(x > 0)` is deliberate throughout: it rejects NaN as well
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod density;
pub mod error;
pub mod exterior;
pub mod heisenberg;
pub mod hermitian;
pub mod matrix;
pub mod morse;
pub mod oracles;
pub mod poly;
pub mod quadrature;
pub mod scalar;

pub use density::{
    density_diagonal, density_diagonal_with, density_integrand, limit_integrand, tail_certificate, tail_decay,
    y_condition, CurvaturePoint, DecayReport, TailBound,
};
pub use error::{Direction, Error, Result};
pub use exterior::{basis, exp_endo, exp_endo_paths, omega_endomorphism, FormEndomorphism, MultiIndexBasis};
pub use heisenberg::{
    boxeta_kernel, heisenberg_heat_kernel, heisenberg_heat_kernel_with, mehler_kernel, FiberKernel,
    HeisenbergPoint, KernelValue, ModelConventions,
};
pub use hermitian::{eig_hermitian, matfun, matfun_named, EigenSystem, GuardedFn, HermitianForm};
pub use matrix::CMatrix;
pub use morse::{
    heat_trace, heat_trace_degree, heat_trace_degree_with, morse_global, morse_local, rx_partition, Cell, EtaPartition, ManifoldDescriptor,
    MorseReport, MorseValue,
};
pub use poly::{pencil_det_poly, pencil_real_roots, EtaPencil, Signature};
pub use quadrature::QuadOptions;
pub use scalar::{Real, C};

pub type HermitianForm64 = HermitianForm<f64>;
pub type CMatrix64 = CMatrix<f64>;
pub type FormEndomorphism64 = FormEndomorphism<f64>;
pub type CurvaturePoint64 = CurvaturePoint<f64>;
pub type EtaPencil64 = EtaPencil<f64>;
pub type HeisenbergPoint64 = HeisenbergPoint<f64>;
pub type KernelValue64 = KernelValue<f64>;
pub type ManifoldDescriptor64 = ManifoldDescriptor<f64>;
pub type MorseReport64 = MorseReport<f64>;
pub type MorseValue64 = MorseValue<f64>;
pub type C64 = C<f64>;
