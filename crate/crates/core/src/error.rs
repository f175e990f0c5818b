use std::fmt;

use thiserror::Error;

/// Standing assumptions on a scenario, probed numerically.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Hypothesis {
    /// Scalarized Lagrangians are C², strictly convex and superlinear.
    H1,
    /// Scalarized terminal costs are globally Lipschitz.
    H2,
    /// Discount takes values in (a, 1] with a > 0 and d_t(t) = 1.
    H3,
    /// Discount is C¹ in its anchor time.
    H4,
    /// Terminal cost components and scalarizations are C² and convex.
    H5,
}

impl Hypothesis {
    pub const ALL: [Hypothesis; 5] = [
        Hypothesis::H1,
        Hypothesis::H2,
        Hypothesis::H3,
        Hypothesis::H4,
        Hypothesis::H5,
    ];
}

impl fmt::Display for Hypothesis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Hypothesis::H1 => "h1",
            Hypothesis::H2 => "h2",
            Hypothesis::H3 => "h3",
            Hypothesis::H4 => "h4",
            Hypothesis::H5 => "h5",
        };
        f.write_str(s)
    }
}

#[derive(Debug, Error)]
pub enum Error {
    #[error("configuration error: {0}")]
    Config(String),

    #[error("usage error: {0}")]
    Usage(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("hypothesis {hypothesis} violated: {detail}")]
    Hypothesis {
        hypothesis: Hypothesis,
        detail: String,
    },

    #[error("gradient inversion failed after {iterations} iterations (residual {residual:.3e})")]
    Inversion { residual: f64, iterations: usize },

    #[error("Newton solve did not converge in {iterations} iterations (|F| = {residual:.3e}, trace {trace:?})")]
    Solver {
        iterations: usize,
        residual: f64,
        trace: Vec<f64>,
    },

    #[error("stationarity Jacobian is ill-conditioned (condition number {condition:.3e})")]
    Conditioning { condition: f64 },

    #[error("optimizer stalled after {iterations} iterations (gradient norm {grad_norm:.3e})")]
    Stalled { iterations: usize, grad_norm: f64 },

    #[error("search box too small: minimizer {point:?} lies on the boundary")]
    BoxTooSmall { point: Vec<f64> },

    #[error("direction {direction}: {source}")]
    InDirection {
        direction: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("parse error: {0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    pub(crate) fn in_direction(self, direction: usize) -> Error {
        Error::InDirection {
            direction,
            source: Box::new(self),
        }
    }

    /// Innermost error, skipping direction annotations.
    pub fn root(&self) -> &Error {
        match self {
            Error::InDirection { source, .. } => source.root(),
            e => e,
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
