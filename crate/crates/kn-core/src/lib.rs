//! Krichever-Novikov function bases on curves with two marked points,
//! framed holomorphic bundles through Tyurin data, and the fermionic
//! (semi-infinite wedge) representation of the associated affine algebra.
//!
//! The genus-zero backend is exact over the Gaussian rationals; the
//! genus-one backend evaluates Weierstrass sigma products numerically under
//! a configurable tolerance. Everything above the curve layer is generic
//! over the coefficient field.

pub mod affine;
pub mod bundle;
pub mod curve;
pub mod elliptic;
pub mod equivalence;
pub mod error;
pub mod field;
pub mod linalg;
pub mod meromorphic;
pub mod report;
pub mod riemann_roch;
pub mod scalar_basis;
pub mod series;
pub mod suite;
pub mod vector_basis;
pub mod wedge;

pub use error::{KnError, Result};
pub use field::{Coeff, Field, GaussQ, C64};

pub use affine::{
    a_operator, affine_bracket, operator_commutator, sl2_e, sl2_f, sl2_h, tensor_action_operator,
    AffineElement, BandedOperator, GRepresentation,
};
pub use bundle::{
    apply_framing_change, bundle_from_json, check_tyurin_constraints, random_framed_bundle,
    section_from_vector_function, vector_function_from_section, FramedBundleData,
    KNVectorFunction,
};
pub use curve::{curve_from_json, make_elliptic_curve, make_rational_curve, CurveModel, CurvePoint};
pub use equivalence::{
    check_intertwining, highest_weight_eigenvalue, stabilizer_is_scalar, tilde_gamma_map,
    FermionRepData, WedgeIsomorphism,
};
pub use meromorphic::{
    function_from_divisor_genus0, function_from_divisor_genus1, Expansion, MeromorphicFunction,
};
pub use riemann_roch::rr_space_basis;
pub use scalar_basis::{cocycle_gamma, ScalarBasis, ScalarBasisElement};
pub use series::LaurentSeries;
pub use vector_basis::{index_map, index_unmap, PsiBasis, PsiMatrix};
pub use wedge::{
    act_banded, act_elementary, canonicalize, monomials_with_head_in, vacuum_projection,
    vacuum_projection_formula, verify_commutators, VacuumMonomial, WedgeMonomial, WedgeVector,
};
