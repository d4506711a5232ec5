use core::fmt;

pub type Result<T> = core::result::Result<T, Error>;

/// Every failure the numerical core can report.
#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// An input contained NaN or infinity.
    NonFinite,
    /// The symmetric eigensolver hit its iteration cap.
    NoConvergence,
    /// An eigenvalue sum in the Sylvester solve fell below the guard.
    SingularPencil { min_abs_sum: f64, guard: f64 },
    /// A general linear system had a zero pivot.
    Singular,
    /// `AᵀA` failed the conditioning guard in a least-squares solve.
    RankDeficient { min_eig: f64, max_eig: f64 },
    ShapeMismatch { expected: (usize, usize), found: (usize, usize) },
    LengthMismatch { expected: usize, found: usize },
    UnknownClass(i64),
    SplitOverlap(i64),
    EmptySide(&'static str),
    ClassTooSmall { class: usize, size: usize },
    InconsistentClassAttributes { class: i64 },
    BadK { k: usize, n: usize },
    EmptyAnchors,
    SingleClass,
    LineSearchFailed,
    Diverged { iteration: usize },
    InvalidConfig(&'static str),
    InvalidArgument(&'static str),
}

impl Error {
    /// True for failures of the numerics rather than of the inputs.
    pub fn is_numerical(&self) -> bool {
        matches!(
            self,
            Error::NoConvergence
                | Error::SingularPencil { .. }
                | Error::Singular
                | Error::RankDeficient { .. }
                | Error::LineSearchFailed
                | Error::Diverged { .. }
        )
    }
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::NonFinite => write!(f, "input contains NaN or infinite values"),
            Error::NoConvergence => write!(f, "eigenvalue iteration did not converge"),
            Error::SingularPencil { min_abs_sum, guard } => write!(
                f,
                "Sylvester pencil is singular: smallest |eigenvalue sum| {min_abs_sum:e} below guard {guard:e} (reduce beta)"
            ),
            Error::Singular => write!(f, "linear system is singular"),
            Error::RankDeficient { min_eig, max_eig } => write!(
                f,
                "design matrix is rank deficient (eigenvalues {min_eig:e} .. {max_eig:e})"
            ),
            Error::ShapeMismatch { expected, found } => write!(
                f,
                "shape mismatch: expected {}x{}, found {}x{}",
                expected.0, expected.1, found.0, found.1
            ),
            Error::LengthMismatch { expected, found } => {
                write!(f, "length mismatch: expected {expected}, found {found}")
            }
            Error::UnknownClass(c) => write!(f, "class {c} does not occur in the labels"),
            Error::SplitOverlap(c) => write!(f, "class {c} is listed as both seen and unseen"),
            Error::EmptySide(side) => write!(f, "the {side} side of the split has no rows"),
            Error::ClassTooSmall { class, size } => {
                write!(f, "class {class} has {size} rows, at least 2 are required")
            }
            Error::InconsistentClassAttributes { class } => write!(
                f,
                "class-level attributes differ between rows of class {class}"
            ),
            Error::BadK { k, n } => write!(f, "k = {k} is invalid for {n} points"),
            Error::EmptyAnchors => write!(f, "no anchors to classify against"),
            Error::SingleClass => write!(f, "at least two classes are required"),
            Error::LineSearchFailed => write!(f, "no step size satisfied the Armijo condition"),
            Error::Diverged { iteration } => {
                write!(f, "objective became non-finite at iteration {iteration}")
            }
            Error::InvalidConfig(msg) => write!(f, "invalid solver configuration: {msg}"),
            Error::InvalidArgument(msg) => write!(f, "invalid argument: {msg}"),
        }
    }
}

impl core::error::Error for Error {}
