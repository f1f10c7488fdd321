//! Landscape diversity versus human appropriation of net primary production.
//!
//! Land-cover proportions of a terrain cell form a point on the standard
//! simplex. This crate relates diversity indices of that point (Shannon `H`,
//! the urban-penalized `L`) to the appropriation `A = sum w_i p_i`:
//!
//! * [`uniform`]: closed forms and quadrature under the uniform law on the
//!   simplex, including the curve `a -> E[H | A = a]`;
//! * [`dirichlet`] and [`kde`]: Dirichlet densities and Dirichlet-kernel
//!   density estimates with two evaluation paths (log-gamma and a
//!   certified Euler-Maclaurin expansion);
//! * [`mixture`]: per-face estimates combined into a sampler for data that
//!   sits on the faces of the simplex;
//! * [`curves`] and [`bandwidth`]: binned conditional-expectation curves and
//!   bandwidth selection by integrated square error.

pub mod bandwidth;
pub mod compositions;
pub mod curves;
pub mod dirichlet;
pub mod error;
pub mod kde;
pub mod mixture;
pub mod quadrature;
pub mod rng;
pub mod special;
pub mod uniform;

pub use compositions::{
    appropriation, berger_parker_index, l_index, l_index_parts, sample_uniform_simplex, shannon_index, simpson_index,
    subsimplex_of, Composition, SubsimplexMask, WeightVector,
};
pub use error::{Error, Result};
