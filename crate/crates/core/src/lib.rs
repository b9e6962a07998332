//! Geodesics, complex lines and circles of Kähler metrics on domains of R⁴ = C².
//!
//! Points of R⁴ are read as pairs `(z1, z2) = (x0 + i·x1, x2 + i·x3)` and as
//! quaternions `z1 + z2·j`; the complex structure is `J(x0, x1, x2, x3) = (−x1, x0, −x3, x2)`.

pub mod beltrami;
pub mod circles;
pub mod connection;
pub mod curvature;
pub mod error;
pub mod families;
pub mod forms;
pub mod metrics;
pub mod projective;
pub mod quaternion;
pub mod sample;

pub use circles::{circle_from_jet, complex_line_defect, fit_circle, CircleFit, CurveKind};
pub use connection::{christoffel, exp_jet2, extract_l, geodesic, ChristoffelData, Trajectory};
pub use error::{GeomError, Result};
pub use forms::{BilinearMap, Form};
pub use metrics::{
    fubini_metric, metric_from_id, BallMetric, Euclidean, MetricField, SharedMetric, TestField,
};
pub use projective::{rectifier, ProjectiveMap, Side};
pub use quaternion::{ComplexFunctional, Point4, QuaternionFunctional, RealLinearFunctional};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");
