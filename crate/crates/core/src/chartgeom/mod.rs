//! Coordinate charts with expression-backed metrics and the exact-jet
//! differential geometry built on them: orthonormal frames, Christoffel
//! symbols, curvature operators in the frame, scalar calculus,
//! conformal-change operators, and deterministic quadrature with
//! divergence-theorem checks.
//!
//! A [`MetricChart`] is a symmetric matrix of closed-form expressions
//! on a coordinate box in dimension 2 or 4. All derivatives are exact:
//! metric entries are evaluated as truncated Taylor jets, so Christoffel
//! symbols, curvature, and the flux fields of conformal rescaling come
//! out to roundoff rather than finite-difference accuracy.

pub mod chart;
pub mod conformal;
pub mod jetcalc;
pub mod quad;

pub use chart::{ChartError, FramedPoint, MetricChart, MIN_METRIC_EIGENVALUE};
pub use conformal::ScalarIdentityResiduals;
pub use jetcalc::{PointCalculus, ScalarCalc};
pub use quad::{
    box_boundary_flux, divergence_box_integral, integrate, pairwise_sum, rule_csv,
    QuadratureRule, RuleKind,
};
