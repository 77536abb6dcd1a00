//! Default tolerances and iteration budgets, defined once.
//!
//! Exact closed-form paths are asserted at `EXACT`; unit-vector and
//! homogeneity identities at `TIGHT`; statistical assertions use a multiple
//! of the estimator's standard error rather than a fixed epsilon.

/// Exact-path assertions (closed forms, facet arithmetic).
pub const EXACT: f64 = 1e-9;

/// Identities that hold to rounding (homogeneity, unit normalization).
pub const TIGHT: f64 = 1e-12;

/// Linear-map contracts (one extra solve of a well-conditioned system).
pub const LINEAR_MAP: f64 = 1e-10;

/// Standard-error multiplier for in-module statistical checks.
pub const STAT_SIGMA: f64 = 3.0;

/// Standard-error multiplier when Monte-Carlo is the oracle for an exact path.
pub const MC_SIGMA: f64 = 4.0;

/// Slack added to closed-form constants when judging measured quantities,
/// absorbing solver tolerance.
pub const CONSTANT_SLACK: f64 = 1e-6;

/// Duality-gap target for the determinant-maximization solver on H-polytopes.
pub const JOHN_TOL_POLYTOPE: f64 = 1e-8;

/// Containment-violation target for the cutting-plane solver on gauge bodies.
pub const JOHN_TOL_CUTTING: f64 = 1e-6;

/// Newton-step budget for one determinant maximization.
pub const NEWTON_CAP: usize = 200;

/// Cutting-plane round budget.
pub const CUT_ROUND_CAP: usize = 500;

/// Total supporting-hyperplane budget across all rounds. Smooth bodies need
/// a few thousand contact planes before the inscribed ellipsoid of the outer
/// polytope tracks the body to 1e-6.
pub const CUT_PLANE_CAP: usize = 6000;

/// Bisection tolerance for boundary hits on non-polyhedral gauges.
pub const BISECT_TOL: f64 = 1e-12;

/// Relative finite-difference step for gauge gradients, scaled by the
/// radial extent of the body.
pub const FD_STEP_REL: f64 = 1e-6;

/// Points closer than this to the boundary of a domain are rejected.
pub const BOUNDARY_MARGIN: f64 = 1e-9;

/// Relative quadrature tolerance for path lengths.
pub const PATH_QUAD_TOL: f64 = 1e-6;

/// Minimum Monte-Carlo sample budget.
pub const MIN_SAMPLES: usize = 1000;

/// Accepted samples generated per deterministic sampling block.
pub const SAMPLE_BLOCK: usize = 1024;

/// Eigenvalue floor (relative to the largest) below which a dual metric is
/// reported singular instead of being regularized.
pub const SINGULAR_REL: f64 = 1e-12;
