//! Walrasian equilibrium prices for pure exchange economies.
//!
//! An [`Economy`] of Cobb-Douglas and CES consumers induces an aggregate
//! excess demand `z(p)` on strictly positive prices. Equilibria are located as
//! fixed points of the perturbed argmax map
//!
//! ```text
//! phi(p) = argmax_{q in D_eps} { q . z(p) - |q - p|^2 }
//! ```
//!
//! over the trimmed simplex `D_eps = { p in simplex : p_l >= eps }`. Completing
//! the square turns the argmax into a Euclidean projection of `p + z(p)/2`,
//! which [`simplex::project_trimmed`] computes exactly. The [`solver`] drives a
//! damped fixed-point iteration, shrinks `eps` until the candidate sits strictly
//! inside `D_eps`, and certifies the result (market clearing, interiority, the
//! variational inequality over the vertices of `D_eps`, and a sampled check that
//! every price with non-positive summed excess demand lies inside `D_eps`).
//!
//! The [`oracle`] module holds slow reference computations (lattice
//! enumeration, power iteration) used to cross-check the fast paths.

pub mod economy;
pub mod error;
pub mod oracle;
pub mod sampling;
pub mod simplex;
pub mod solver;

pub use economy::{
    check_assumptions, AssumptionReport, BoundaryProbe, CheckConfig, Consumer, Economy,
    EconomySpec, ExcessDemand, Preference, PriceVector, Verdict,
};
pub use error::{Result, WalrasError};
pub use simplex::{barycenter, objective_g, phi, project_trimmed, ObjectiveValue, TrimmedSimplex};
pub use solver::{solve, solve_multistart, SolverConfig, SolverReport};
