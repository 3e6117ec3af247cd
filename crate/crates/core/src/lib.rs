#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod analytic_dimer;
pub mod driver;
pub mod dynamics;
pub mod effective;
pub mod error;
pub mod fockspace;
pub mod lattice;
pub mod observables;
pub mod ode;
pub mod operator;
pub mod polariton;
pub mod preparation;
pub mod subspace;

pub use error::{Error, Result};
