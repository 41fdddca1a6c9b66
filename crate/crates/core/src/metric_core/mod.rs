//! Chart-level metrics, their derivatives, curvature, geodesics and transport.

pub mod chart;
pub mod field;
pub mod geodesic;
pub mod jet;
pub mod metric;
pub mod ode;
pub mod transport;

pub use chart::{CoordinateChart, Interval};
pub use field::{covariant_derivative, ScalarField, VectorField};
pub use geodesic::{geodesic_integrate, geodesic_integrate_with, GeodesicResult, GeodesicVerdict};
pub use jet::Jet;
pub use metric::{bilinear, constant_curvature_estimate, Christoffel, Curvature, DerivativeMode, MetricDerivs, MetricField};
pub use ode::{OdeOptions, Termination};
pub use transport::{parallel_transport, transport_along_geodesic, transport_polyline, Curve, FnCurve, Segment};
