//! Boundary metrics on model CAT(0) spaces.
//!
//! Two families of metrics on the visual boundary are implemented: `d_A`, the
//! reciprocal of the time at which two basepoint rays reach separation `A`, and
//! `d̄`, the exponentially weighted integral of their separation. On top of these
//! sit quasi-symmetry checks, cover constructions with their statistics, and
//! visual-metric fits against the Gromov product.

pub mod covers;
pub mod error;
pub mod metrics;
pub mod numeric;
pub mod quasisymmetry;
pub mod space;
pub mod value;
pub mod visuality;

pub use error::{Error, Result};
pub use metrics::{Family, MetricSpec};
pub use space::{BoundaryPoint, ExtendedPoint, Point, Ray, Space, SpaceKind};
pub use value::Value;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

/// A real printed with 17 significant digits, as in every CSV the crate writes.
pub fn fmt_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}
