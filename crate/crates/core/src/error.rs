use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("domain error: {0}")]
    Domain(String),

    #[error("unphysical state: {0}")]
    Unphysical(String),

    #[error(
        "pressure recovery did not converge after {iterations} iterations (last p = {last:e})"
    )]
    NonConvergence { iterations: usize, last: f64 },

    #[error("degenerate eigenvector scaling: {0}")]
    Degenerate(String),

    #[error("tangled mesh: cell {cell:?} has jacobian {jacobian:e}")]
    TangledMesh { cell: [usize; 3], jacobian: f64 },

    #[error("at t = {time:e}, cell {cell:?}: {source}")]
    Cell {
        time: f64,
        cell: [usize; 3],
        #[source]
        source: Box<Error>,
    },

    #[error("time step underflow: dt = {0:e}")]
    DtUnderflow(f64),

    #[error("config error at line {line}: {message}")]
    Config { line: usize, message: String },

    #[error("invalid argument: {0}")]
    Invalid(String),

    #[error("parse error in {what}: {message}")]
    Parse { what: String, message: String },

    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// Errors caused by user input rather than by the numerics.
    pub fn is_config(&self) -> bool {
        matches!(
            self,
            Error::Config { .. } | Error::Invalid(_) | Error::Parse { .. }
        )
    }

    pub(crate) fn at_cell(self, time: f64, cell: [usize; 3]) -> Error {
        Error::Cell {
            time,
            cell,
            source: Box::new(self),
        }
    }
}
