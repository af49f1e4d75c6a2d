//! Finite-dimensional Weil algebras: quotients of truncated polynomial
//! algebras by ideals with polynomial generators, their dual differential
//! operators, nilpotent arithmetic and Taylor lifts.

mod algebra;
mod diffop;
mod element;
mod jet;
mod json;
mod membership;
mod multi_index;
mod parse;
mod poly;

use thiserror::Error;

use crate::oracle::OracleError;

pub use algebra::WeilAlgebra;
pub use diffop::DiffOperator;
pub use element::{taylor_lift, WeilElement};
pub use jet::{jet_to_derivatives, truncated_algebra, univariate_jet, JetOracle, JetScalar};
pub use json::{AlgebraDoc, AlgebraSpec, ElementDoc, TermDoc, ALGEBRA_SCHEMA, ELEMENT_SCHEMA};
pub use membership::{
    chebyshev_grid, default_grid, membership_defect, reduction_check, semi_weil_membership,
    semi_weil_reduction_defect, vanishing_condition, weak_membership, ReductionReport,
    SemiWeilReport, DEFAULT_MEMBERSHIP_TOL,
};
pub use multi_index::MultiIndex;
pub use parse::parse_poly;
pub use poly::TruncatedPoly;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum WeilError {
    #[error("truncation order must be at least 1")]
    ZeroOrder,
    #[error("generator {generator} has constant term {constant}; the ideal would not be proper")]
    ImproperIdeal { generator: usize, constant: f64 },
    #[error("expected {expected} variables, got {got} (generator {generator})")]
    VariableCount {
        expected: usize,
        got: usize,
        generator: usize,
    },
    #[error("expected {expected} coordinates, got {got}")]
    Dimension { expected: usize, got: usize },
    #[error("elements belong to different Weil algebras")]
    AlgebraMismatch,
    #[error("sample set is empty")]
    EmptySamples,
    #[error("cannot parse polynomial at position {pos}: {message}")]
    Parse { pos: usize, message: String },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
