//! Lower-tail analysis of `X = prod_i min(E_1 + ... + E_i, 1)` with iid
//! `E_k ~ Exp(lambda)`, and the subtree product estimator for finding the
//! first vertex of a uniform-attachment tree.
//!
//! * [`dist`]: exact samplers for `X` and its moments.
//! * [`tail`]: exact `P(X <= t)`, moment and Poisson-comparison bounds,
//!   closed-form sandwich bounds, and the Poisson/Stirling inequalities
//!   they rest on.
//! * [`tree`]: uniform attachment growth and `ln phi` for all vertices in O(n).
//! * [`harness`]: tables, the verification suite, and the CLI driver.

pub mod dist;
pub mod error;
pub mod harness;
pub mod oracle;
pub mod rng;
pub mod special;
pub mod stats;
pub mod tail;
pub mod tree;

pub use error::{Error, Result};
pub use rng::Stream;
