//! Numerical workbench for Finsler geometry on convex bodies.
//!
//! The crate is organized around the Minkowski gauge of a bounded convex body
//! with the origin in its interior. On top of that primitive it builds:
//!
//! - [`body`] — convex body representations (H/V-polytopes, p-balls,
//!   ellipsoids and affine/symmetrization wrappers) with gauge, boundary-ray,
//!   volume, moment and sampling primitives;
//! - [`john`] — the maximum-volume inscribed (John) ellipsoid, the John point,
//!   the John metric tensor and certified inclusion checks;
//! - [`binet_legendre`] — second moments of bodies, the Binet-Legendre dual
//!   and primal metric tensors, Busemann densities and the closed-form
//!   Binet-Legendre metric of Zermelo fields;
//! - [`domain`] — Funk, reverse-Funk, Hilbert and general Zermelo geometry on
//!   a convex domain: pointwise norms, exact distance formulas, path lengths
//!   and the complete-but-BL-bounded counterexample field;
//! - [`verify`] — the bounds harness measuring empirical bilipschitz ratios
//!   and certifying every inclusion and density constant against its
//!   closed-form value.

pub mod binet_legendre;
pub mod body;
pub mod domain;
pub mod john;
pub mod linalg;
pub mod quadrature;
pub mod rng;
pub mod tol;
pub mod verify;

pub use binet_legendre::{DensityReport, MetricError, MetricTensor, Provenance};
pub use body::{Body, BodyError, BodySpec, Ellipsoid, VolumeMethod};
pub use domain::{DriftFamily, GeometryError, Polyline, ZermeloField};
pub use john::{InclusionCertificate, InclusionMode, JohnError, JohnSolution};
pub use rng::DirectionSet;
pub use verify::{BoundsReport, CheckRow, VerifyError};
