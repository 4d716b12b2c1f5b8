//! Exact Hecke theory for the Hermitian modular group of an
//! imaginary-quadratic field with arbitrary class number.
//!
//! The crate provides, over K = Q(sqrt(-m)):
//!
//! * exact arithmetic in K and its ring of integers, with prime splitting
//!   through the discriminant character ([`field`]);
//! * ideal normal forms, the class group via reduced binary quadratic
//!   forms, class representatives with a common clearing denominator, and
//!   inert-prime searches ([`ideal`]);
//! * exact matrices over K, similitude groups, determinantal divisor
//!   chains and canonical right-coset keys ([`matrix`]);
//! * the inert part of the Hecke algebra: canonical double-coset keys,
//!   right-coset enumeration in triangular shape, products, generators and
//!   the degree-lowering homomorphism ([`hecke`]);
//! * formal Fourier expansions with certified truncation bounds, the slash
//!   action, the Siegel degree-lowering operator, rotation twists and cusp
//!   diagnostics ([`fourier`]);
//! * eigenvalue formulas, cusp eigenvalue bounds and the Eisenstein
//!   certification pipeline ([`eigen`]).
//!
//! Everything is exact: arbitrary-precision integers and rationals, with
//! roots of unity handled symbolically. No floating point is used anywhere.
//!
//! All values are immutable after construction and all operations are pure
//! functions, so concurrent readers need no synchronization.

pub mod cyc;
pub mod eigen;
pub mod error;
pub mod field;
pub mod fourier;
pub mod hecke;
pub mod ideal;
pub mod json;
pub mod matrix;
pub mod zlattice;

pub use cyc::CycSum;
pub use eigen::{
    certify_eisenstein, cusp_eigenvalue_bound, cusp_eigenvalue_bound_squared, eigen_check,
    eigen_report, eisenstein_eigenvalue, proof_inequalities_hold, satisfies_cusp_bound,
    with_perturbed_coefficient, with_weight, EigenReport, EisensteinCertificate, Hypothesis,
};
pub use error::{Error, Result};
pub use field::{
    is_prime, is_squarefree, kronecker_symbol, KElem, OmegaKind, PrimeClass, QuadField,
    SplitMix64,
};
pub use fourier::{
    cusp_tests, delta_q_expansion, eisenstein_q_expansion, hecke_act, hecke_act_cosets,
    rank_profile, siegel_phi, slash_coset, slash_rotation, CosetImage, CuspReport,
    FourierExpansion, HermIndex, RankProfile,
};
pub use hecke::{
    canonical_form, coset_reps, enumerate_right_cosets, generators, hecke_product,
    hecke_product_detailed, phi_map, rational_power, split_inert_rational, DoubleCosetKey,
    HeckeElement, RightCosetSet, DEFAULT_ENUM_CAP,
};
pub use ideal::{
    class_representatives, find_inert_prime, ideal_class_index, reduced_forms, ClassRep,
    ClassRepSet, IdealHnf, QuadForm,
};
pub use matrix::{modular_generators, random_modular, rotation, translation, DetDivChain, MatK};
