//! Reduction from factoring squarefree integers to counting points on
//! elliptic curves modulo `n`.
//!
//! The pipeline is:
//!
//! * [`curves`] samples short Weierstrass curves `y^2 = x^3 + Ax + B` over
//!   `Z/nZ`, twists them, and screens for degenerate gcds that already
//!   reveal a factor.
//! * [`oracle`] is the point-counting black box. Two simulated
//!   implementations are provided; both answer `|E_n| = prod (p + 1 - a_p)`.
//! * [`reduction`] queries `|E_n|` and `|E_n^d|` for small `d`, reduces the
//!   ratio to lowest terms and recovers `p + 1` for a prime `p | n` from it.
//! * [`census`] measures the trace counts that make the reduction succeed
//!   with high probability.

pub mod arith;
pub mod census;
pub mod counting;
pub mod curves;
pub mod oracle;
pub mod reduction;
pub mod selftest;

pub use arith::{Natural, ReducedFraction, SmallFactorization};
pub use curves::{Curve, Relation, ScreenResult};
pub use oracle::{DirectOracle, FactoredOracle, OracleError, OracleStats, PointCountOracle};
pub use reduction::{FactorizationResult, ReductionConfig, SplitOutcome};
