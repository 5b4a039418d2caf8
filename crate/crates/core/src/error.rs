use thiserror::Error;

/// Every failure the library can report.
///
/// Variants are grouped by the stage that raises them; [`Error::category`]
/// folds them into input errors and solve failures.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    // tensor algebra
    #[error("input matrix is not symmetric (max deviation {deviation:e})")]
    AsymmetricInput { deviation: f64 },
    #[error("dimension mismatch: expected {expected}, got {found}")]
    DimensionMismatch { expected: usize, found: usize },
    #[error("invalid moduli: {0}")]
    InvalidModuli(String),
    #[error("elasticity tensor is not coercive (smallest eigenvalue {min_eigenvalue:e})")]
    NotCoercive { min_eigenvalue: f64 },
    #[error("elasticity tensor could not be inverted")]
    SingularTensor,

    // frameworks
    #[error("bar {bar} has zero length")]
    DegenerateBar { bar: usize },
    #[error("invalid framework: {0}")]
    InvalidFramework(String),
    #[error("framework has {mechanisms} mechanism(s); the equilibrium lift is undefined")]
    MechanismPresent { mechanisms: usize },

    // meshes and partitions
    #[error("parse error at line {line}, column {column}: {message}")]
    Parse {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("triangle {triangle} is not counterclockwise (signed area {signed_area:e})")]
    Orientation { triangle: usize, signed_area: f64 },
    #[error("edge ({0}, {1}) is shared by more than two triangles or has inconsistent orientation")]
    NonManifoldEdge(usize, usize),
    #[error("line {line}: edge ({a}, {b}) is not a boundary edge")]
    DanglingLabel { line: usize, a: usize, b: usize },
    #[error("boundary edge ({0}, {1}) carries no label")]
    MissingLabel(usize, usize),
    #[error("boundary edge ({0}, {1}) is labeled more than once")]
    DuplicateLabel(usize, usize),
    #[error("invalid mesh: {0}")]
    InvalidMesh(String),
    #[error("no displacement (Dirichlet) boundary edges: the displacement boundary part must have positive length")]
    EmptyDirichletSet,
    #[error("mixed mode requires at least one traction edge")]
    EmptyTractionSet,
    #[error("{count} traction edge(s) present in displacement-only mode")]
    UnexpectedTractionEdges { count: usize },
    #[error("invalid problem data: {0}")]
    InvalidProblem(String),

    // solves
    #[error("stiffness matrix is not positive definite (undetected mechanism or empty displacement boundary)")]
    SingularStiffness,
    #[error("solve failed: {0}")]
    SolveFailure(String),

    // verification
    #[error("polynomial degree {degree} exceeds the supported maximum of {max}")]
    DegreeTooHigh { degree: usize, max: usize },
    #[error("test displacement does not vanish on the displacement boundary (max {max_value:e})")]
    NonVanishingDisplacement { max_value: f64 },
    #[error("manufactured case '{case}' is inconsistent: {detail} (residual {residual:e})")]
    InconsistentCase {
        case: String,
        detail: String,
        residual: f64,
    },
}

/// Coarse classification used for process exit codes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ErrorCategory {
    Input,
    Solve,
}

impl Error {
    pub fn category(&self) -> ErrorCategory {
        match self {
            Error::MechanismPresent { .. } | Error::SingularStiffness | Error::SolveFailure(_) => {
                ErrorCategory::Solve
            }
            _ => ErrorCategory::Input,
        }
    }

    pub(crate) fn parse(line: usize, column: usize, message: impl Into<String>) -> Self {
        Error::Parse {
            line,
            column,
            message: message.into(),
        }
    }
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
