use thiserror::Error;

/// Errors raised by the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("extension degree m = {0} is outside 1..=8")]
    DegreeOutOfRange(u32),
    #[error("polynomial {poly:#x} is not primitive of degree {m}")]
    NotPrimitive { m: u32, poly: u32 },
    #[error("element {0} is not in the field")]
    NotInField(u32),
    #[error("zero has no multiplicative inverse")]
    InverseOfZero,
    #[error("zero has no companion matrix (zero entries are absences)")]
    CompanionOfZero,

    #[error("code definition, line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("invalid code: {0}")]
    InvalidCode(String),
    #[error("parity-check matrix has full column rank, the code is empty")]
    EmptyCode,
    #[error("length mismatch: expected {expected}, got {got}")]
    LengthMismatch { expected: usize, got: usize },

    #[error("unsupported PAM order 2^{0}")]
    UnsupportedPam(u32),
    #[error("mapping {scheme} incompatible with m = {m}, p = {p}: {why}")]
    IncompatibleMapping {
        scheme: &'static str,
        m: u32,
        p: u32,
        why: String,
    },
    #[error("signal value {0} is not a constellation point")]
    NotInConstellation(i32),

    #[error("length {0} is not a power of two")]
    NotPowerOfTwo(usize),

    #[error("group enumeration needs {pairs} pairs, cap is {cap}")]
    EnumerationTooLarge { pairs: u128, cap: u128 },
    #[error("invalid ensemble: {0}")]
    InvalidEnsemble(String),
    #[error("invalid bound input: {0}")]
    InvalidBoundInput(String),
    #[error("spectrum truncated at distance {max_delta}, below the sphere radius the bound needs")]
    TruncatedSpectrum { max_delta: f64 },
    #[error("spectral efficiency {eff} is not achievable with {p} bits per signal")]
    Unachievable { eff: f64, p: u32 },

    #[error("I/O error on {path}: {msg}")]
    Io { path: String, msg: String },
    #[error("resume file {path} is corrupt: {msg}")]
    CorruptResume { path: String, msg: String },
    #[error("invalid configuration: {0}")]
    Config(String),
}

pub type Result<T> = std::result::Result<T, Error>;
