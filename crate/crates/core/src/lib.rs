//! Roots of Littlewood polynomials and the dragons that describe them.
//!
//! * [`littlewood`]: the ±1 coefficient family, Gray-code enumeration and
//!   the root symmetries `z -> -z`, `z -> 1/z`.
//! * [`solver`]: Aberth–Ehrlich all-roots solver plus a Durand–Kerner
//!   cross-check, and the parallel sweep over a whole family.
//! * [`density`]: per-pixel root counts and the binary root cache.
//! * [`dragon`]: the attractor of `z -> 1 + qz`, `z -> 1 - qz` and a
//!   certified search for `0` in it.
//! * [`render`]: log-shaded images, PNG/PGM encoding, comparison panels.
//! * [`service`]: the HTTP tile/dragon/membership server.
//! * [`cli`]: the `lwroots` command line.

pub mod cli;
pub mod density;
pub mod dragon;
pub mod error;
pub mod littlewood;
pub mod render;
pub mod service;
pub mod solver;

pub use num_complex::Complex64;

pub use density::{DensityGrid, EdgeRule, RootBuffer, Viewport};

pub use dragon::{AttractorCloud, DragonQuery, MembershipStatus, MembershipVerdict};
pub use error::{Error, Result};
pub use littlewood::{enumerate, SignVector};
pub use solver::{solve, solve_all, solve_oracle, RootSet};
