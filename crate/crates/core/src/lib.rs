//! Nonbinary quasi-cyclic LDPC codes over GF(2^m) used with 2^p-PAM signaling.
//!
//! The crate covers the whole coded-modulation chain:
//!
//! * [`galois`]: GF(2^m) arithmetic and companion matrices,
//! * [`qc_code`]: base/degree/coefficient matrices, lifting, binary images,
//!   encoding and random ensemble sampling,
//! * [`pam_map`]: the BICM, SICM, BPCM and ASCM bit-to-signal mappings,
//! * [`awgn`]: the Gaussian channel and SNR bookkeeping,
//! * [`demapper`]: q-ary symbol metrics from received samples,
//! * [`qspa`]: q-ary sum-product decoding with Walsh-Hadamard check nodes,
//! * [`gf_spectra`]: ensemble-average Hamming weight spectra,
//! * [`sed_spectra`]: squared Euclidean distance spectra per mapping,
//! * [`hp_bound`]: the sphere upper bound on ML error and BICM capacity limits,
//! * [`harness`]: Monte Carlo frame error rate campaigns.
//!
//! Everything operates per real PAM component; an M^2-QAM symbol is two
//! independent M-PAM components.

pub mod awgn;
pub mod builtin;
pub mod demapper;
mod error;
pub mod galois;
pub mod gf_spectra;
pub mod harness;
pub mod hp_bound;
pub mod pam_map;
pub mod qc_code;
pub mod qspa;
pub mod sed_spectra;
pub mod special;

pub use awgn::{ChannelConfig, SnrConvention};
pub use demapper::LlrVector;
pub use error::{Error, Result};
pub use galois::{CompanionMatrix, FieldTables};
pub use gf_spectra::LogPoly;
pub use harness::{FerRecord, SimConfig};
pub use hp_bound::BoundInput;
pub use pam_map::{MappingKind, MappingScheme, PamSignal};
pub use qc_code::{BinaryParityCheck, EnsembleConfig, PolynomialParityCheck, QaryParityCheck};
pub use sed_spectra::{GroupMgfTable, SpectrumPoly};

/// Magnitude at which log-domain metrics and messages are clipped.
pub const LLR_MAX: f64 = 50.0;
