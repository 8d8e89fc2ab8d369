//! Densification and sparsification of fixed-template Boolean CSP instances.
//!
//! Given an instance over one of two built-in templates (Horn3 or TwoSat),
//! this crate computes the unique maximal instance with the same solution set
//! (its *densification*) and enumerates the inclusion-minimal constraint sets
//! with the same solution set (its *sparsifications*).
//!
//! Three independent densification engines are provided and cross-checked:
//! a bottom-up Datalog evaluator ([`datalog`]), closure in a grounded
//! implicational system ([`implsys`]), and a brute-force homomorphism sweep
//! ([`oracle`]).

pub mod csp;
pub mod datalog;
pub mod densify;
pub mod error;
pub mod implsys;
pub mod oracle;
pub mod sparsify;

pub use csp::{
    constraint_universe, constraints_of, instance_of, satisfies, Assignment, ConstraintLiteral,
    ConstraintSpace, Instance, LitId, Template, TemplateId, Var,
};
pub use error::{Error, Result};
