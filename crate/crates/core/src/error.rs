use std::path::PathBuf;

use crate::graph::ValidationReport;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("missing file {}", .0.display())]
    MissingFile(PathBuf),
    #[error("{}:{line}: {msg}", file.display())]
    Parse {
        file: PathBuf,
        line: usize,
        msg: String,
    },
    #[error("{}: shape mismatch: {msg}", file.display())]
    Shape { file: PathBuf, msg: String },
    #[error("{}: non-finite value at row {row}, column {col}", file.display())]
    NonFiniteInput { file: PathBuf, row: usize, col: usize },
    #[error("{}:{line}: endpoint {id} out of range for node type `{node_type}` ({count} nodes)", file.display())]
    DanglingEdge {
        file: PathBuf,
        line: usize,
        id: u64,
        node_type: String,
        count: usize,
    },
    #[error("{}: checksum mismatch (manifest {expected}, content {actual})", file.display())]
    Checksum {
        file: PathBuf,
        expected: String,
        actual: String,
    },
    #[error("manifest: {0}")]
    Manifest(String),
    #[error("graph failed validation:\n{0}")]
    Invalid(ValidationReport),
    #[error("refusing to overwrite non-empty directory {} (pass overwrite to replace it)", .0.display())]
    WouldOverwrite(PathBuf),

    #[error("invalid selection: {0}")]
    Selection(String),
    #[error("metapath `{path}`: {msg}")]
    Metapath { path: String, msg: String },
    #[error("node type `{0}` has no feature matrix")]
    MissingFeatures(String),
    #[error("adjacency value {value} at ({row}, {col}) cannot be row-normalized")]
    BadAdjacencyValue { row: usize, col: usize, value: f64 },
    #[error("fusion: {0}")]
    Fusion(String),

    #[error("class {class} has no nodes in the {pool} pool")]
    EmptyClass { class: usize, pool: String },
    #[error("budget: {0}")]
    Budget(String),
    #[error("config: {0}")]
    Config(String),

    #[error("training diverged: non-finite loss at iteration {iteration} (try a smaller learning rate than {lr})")]
    Diverged { iteration: usize, lr: f64 },
    #[error("evaluation: {0}")]
    Eval(String),
    #[error("cannot aggregate runs from different datasets ({0} vs {1})")]
    DatasetMismatch(String, String),
}

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }

    /// True for errors caused by malformed or inconsistent input data, as
    /// opposed to bad arguments or failures during computation.
    pub fn is_data_error(&self) -> bool {
        matches!(
            self,
            Error::MissingFile(_)
                | Error::Parse { .. }
                | Error::Shape { .. }
                | Error::NonFiniteInput { .. }
                | Error::DanglingEdge { .. }
                | Error::Checksum { .. }
                | Error::Manifest(_)
                | Error::Invalid(_)
        )
    }
}
