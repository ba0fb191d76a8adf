//! Apollonian disk sequences on finitely disk-covered planar domains and
//! the mean-value cubature rules they induce for harmonic functions.
//!
//! A finitely disk-covered domain is a finite family of closed disks that
//! meet at most in single points, together with the curvilinear triangles
//! ("gaps") enclosed by mutually tangent triples. Inscribing circles into
//! every gap, recursively, and ordering all disks by size yields a disk
//! sequence whose uncovered area decays like `N^-0.536`. Because a harmonic
//! function integrates exactly over a disk from its value at the center,
//! the disk centers and areas form a cubature rule whose error is bounded by
//! the uncovered area times the sup-norm of the integrand.
//!
//! The crate is `no_std` (with `alloc`); file formats, the CLI and
//! parallel orchestration live in the `apollo-qmc` companion crate.
//!
//! Modules:
//!
//! * [`geometry`]: circles, tangency predicates, the Descartes solvers and
//!   curvilinear-triangle areas.
//! * [`domain`]: disk-covered domains, gap detection, lattice builders and
//!   validation.
//! * [`packing`]: the size-ordered Apollonian generator, curvature counting
//!   and the depth-first deep walker used for reference integrals.
//! * [`harmonic`] and [`cubature`]: test functions, rules, certified
//!   integration and the mean-value oracle.
//! * [`greedy`]: the randomized greedy packer for convex regions.
//! * [`fit`]: log-log exponent regression.
//! * [`residual`]: Monte-Carlo sampling of the uncovered set.

#![cfg_attr(not(test), no_std)]

extern crate alloc;

pub mod cubature;
pub mod domain;
pub mod fit;
pub mod geometry;
pub mod greedy;
pub mod harmonic;
pub mod math;
pub mod packing;
pub mod quadrature;
pub mod residual;
mod spatial;

pub use cubature::{CubatureRule, Integration};
pub use domain::{DiskCoveredDomain, Gap, Violation};
pub use fit::ExponentFit;
pub use geometry::{Circle, GeometryError, TangencyTolerance};
pub use harmonic::HarmonicFn;
pub use math::Vec2;
pub use packing::{Emission, PackingError, PackingGenerator, PackingStats, StopCriterion};
