//! Solvers for variational and generalized Nash equilibria of pseudo-games
//! with jointly convex constraints, by exploitability minimization.
//!
//! The building blocks are:
//! - [`profile`]: strategy profiles and a small dense linear-algebra kernel,
//! - [`feasible`]: box-plus-joint-constraint sets and exact projections,
//! - [`games`]: the pseudo-game trait and the benchmark families,
//! - [`regret`]: cumulative regret, exploitability oracles and the Moreau gradient,
//! - [`solvers`]: extragradient descent-ascent (EDA) and augmented descent-ascent (ADA).

pub mod error;
pub mod feasible;
pub mod games;
pub mod profile;
pub mod regret;
pub mod solvers;

pub use error::{GneError, Result};
pub use feasible::{BoxBounds, FeasibleSet, JointConstraint};
pub use games::{make_benchmark, ConstraintKind, GameFamily, GameSpec, LipschitzEstimate, Payoff, PseudoGame};
pub use profile::{Matrix, ProfileLayout, StrategyProfile};
pub use regret::{ExploitabilityFlavor, ExploitabilityReport, OracleConfig, StepRule};
