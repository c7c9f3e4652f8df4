//! Special functions and the symbolic q-series data model consumed by the
//! series evaluators and the regularized-pairing engine.

pub mod expansion;
pub mod profile;
pub mod special;

pub use expansion::{eta_splitting, principal_part, psi_pairing, FourierExpansion, Growth, SingElement};
pub use profile::{TailCt, VProfile};
pub use special::{beta_fn, incomplete_gamma, kummer_m1, kummer_m1_scaled};
