use thiserror::Error;

use crate::Point;

/// Errors raised anywhere in the curvature pipeline.
#[derive(Debug, Clone, Error, PartialEq)]
pub enum Error {
    #[error("argument error: {0}")]
    Argument(String),

    #[error("domain error: {factor} is too close to a singular value at {point:?}")]
    Domain { factor: String, point: Vec<f64> },

    #[error("integration error after t = {last_valid}: {reason}")]
    Integration { last_valid: f64, reason: String },

    #[error("geometry error at {point:?}: {reason}")]
    Geometry { point: Point, reason: String },

    #[error("construction error: constraint `{constraint}` violated{}", fmt_point(.point))]
    Construction {
        constraint: String,
        point: Option<Point>,
    },

    #[error("degenerate parameters: {0}; this degenerates to constant curvature")]
    Degenerate(String),

    #[error("not applicable: {0}")]
    NotApplicable(String),

    #[error("internal consistency violation: {0}")]
    InternalConsistency(String),

    #[error("spec error in field `{field}`: {reason}")]
    Spec { field: String, reason: String },

    #[error("i/o error: {0}")]
    Io(String),
}

fn fmt_point(point: &Option<Point>) -> String {
    match point {
        Some(p) => format!(" at {p:?}"),
        None => String::new(),
    }
}

impl Error {
    pub fn construction(constraint: impl Into<String>, point: Option<Point>) -> Self {
        Error::Construction {
            constraint: constraint.into(),
            point,
        }
    }

    pub fn spec(field: impl Into<String>, reason: impl Into<String>) -> Self {
        Error::Spec {
            field: field.into(),
            reason: reason.into(),
        }
    }
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
