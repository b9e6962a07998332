use thiserror::Error;

use crate::connection::Trajectory;
use crate::quaternion::Point4;

pub type Result<T, E = GeomError> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum GeomError {
    #[error("{field}: point {point:?} outside domain ({constraint})")]
    Domain {
        field: String,
        constraint: String,
        point: Point4,
    },

    #[error("{field}: point {point:?} lies on the singular locus ({locus})")]
    SingularLocus {
        field: String,
        locus: String,
        point: Point4,
    },

    #[error("degenerate metric at {point:?}: |det g| = {det:e}")]
    Degenerate { point: Point4, det: f64 },

    #[error("geodesic left the domain at t = {time}: {reason}")]
    DomainExit {
        time: f64,
        reason: String,
        partial: Box<Trajectory>,
    },

    #[error("need at least {required} points, got {got}")]
    TooFewPoints { required: usize, got: usize },

    #[error("sample is rank deficient: all points within {spread:e} of their centroid")]
    RankDeficient { spread: f64 },

    #[error("zero velocity")]
    ZeroVelocity,

    #[error("vectors are complex-linearly dependent: |X ^ Y| = {wedge:e}")]
    Dependent { wedge: f64 },

    #[error("form is not positive definite: Gram determinant {gram:e} at {point:?}")]
    Definiteness { gram: f64, point: Point4 },

    #[error("degenerate 2-plane: denominator {denominator:e}")]
    DegeneratePlane { denominator: f64 },

    #[error("functional is not complex linear (defect {defect:e})")]
    NotComplexLinear { defect: f64 },

    #[error("point {point:?} is within {distance:e} of the singular hyperplane")]
    SingularHyperplane { point: Point4, distance: f64 },

    #[error("projective matrix is singular: |det| = {det:e}")]
    SingularMatrix { det: f64 },

    #[error("precondition failed: {0}")]
    Precondition(String),

    #[error("sampling error: {0}")]
    Sampling(String),

    #[error("unknown identifier: {0}")]
    UnknownId(String),
}

impl GeomError {
    /// Domain, singular-locus and domain-exit failures, as opposed to
    /// numerical degeneracy.
    pub fn is_domain(&self) -> bool {
        matches!(
            self,
            GeomError::Domain { .. }
                | GeomError::SingularLocus { .. }
                | GeomError::DomainExit { .. }
        )
    }
}
