use thiserror::Error;

/// Error type for every fallible operation in the crate.
#[derive(Debug, Error)]
pub enum FockError {
    #[error("one-particle dimension must be positive")]
    ZeroModes,

    #[error("fermionic cutoff {n_max} exceeds the number of modes {d}")]
    FermionCutoffExceedsModes { n_max: usize, d: usize },

    #[error("occupation list has length {got}, basis has {expected} modes")]
    WrongLength { expected: usize, got: usize },

    #[error("mode {mode} is doubly occupied in a fermionic state")]
    FermionDoubleOccupancy { mode: usize },

    #[error("total occupation {total} exceeds the cutoff {n_max}")]
    TotalExceedsCutoff { total: u32, n_max: usize },

    #[error("state index {index} out of range for dimension {dim}")]
    IndexOutOfRange { index: usize, dim: usize },

    #[error("sector {sector} out of range for cutoff {n_max}")]
    SectorOutOfRange { sector: usize, n_max: usize },

    #[error("mode index {mode} out of range for {d} modes")]
    ModeOutOfRange { mode: usize, d: usize },

    #[error("operators belong to different bases")]
    BasisMismatch,

    #[error("matrix is {got_rows}x{got_cols}, expected {rows}x{cols}")]
    DimensionMismatch {
        rows: usize,
        cols: usize,
        got_rows: usize,
        got_cols: usize,
    },

    #[error("matrix is not Hermitian (defect {defect:.3e})")]
    NotHermitian { defect: f64 },

    #[error("matrix is not positive semidefinite (minimal eigenvalue {min_eigenvalue:.3e})")]
    NotPositive { min_eigenvalue: f64 },

    #[error("matrix is not a strict contraction (norm {norm:.6})")]
    NotContraction { norm: f64 },

    #[error("mass check failed: min eigenvalue {min_eigenvalue:.6e} below declared mass {mass:.6e}")]
    MassCheckFailed { min_eigenvalue: f64, mass: f64 },

    #[error("Weyl operators exist only over bosonic statistics")]
    WeylRequiresBosons,

    #[error("grading word requires fermionic statistics")]
    GradingRequiresFermions,

    #[error("grading word requires the untruncated space (n_max {n_max} < modes {d})")]
    GradingRequiresFullSpace { n_max: usize, d: usize },

    #[error("word is not in canonical form: {0}")]
    NonCanonicalWord(String),

    #[error("probe mode {mode} appears in the support of the word")]
    ProbeInSupport { mode: usize },

    #[error("cutoff too small: need n_max >= {needed}, have {n_max}")]
    CutoffTooSmall { needed: usize, n_max: usize },

    #[error("number function needs at least {expected} samples, got {got}")]
    NotEnoughSamples { expected: usize, got: usize },

    #[error("eigendecomposition residual {residual:.3e} exceeds bound {bound:.3e}")]
    EigenFailure { residual: f64, bound: f64 },

    #[error("operator is singular or too close to singular to invert")]
    SingularOperator,

    #[error("perturbation series diverges: |s| * ||V R_0|| = {contraction_norm:.6} >= 1")]
    DivergentSeries { contraction_norm: f64 },

    #[error("interaction is not Hermitian (defect {defect:.3e})")]
    NonHermitianInteraction { defect: f64 },

    #[error("probe mode is coupled: {0}")]
    ProbeCoupled(String),

    #[error("empty input: {0}")]
    EmptyInput(&'static str),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

pub type Result<T> = std::result::Result<T, FockError>;
