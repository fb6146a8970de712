//! Code definitions shipped with the crate.

use crate::qc_code::{EnsembleConfig, PolynomialParityCheck};

pub const RATE_QUARTER_GF16: &str = include_str!("../data/codes/rate_quarter_gf16.txt");
pub const RATE_THREE_QUARTER_GF16: &str = include_str!("../data/codes/rate_three_quarter_gf16.txt");

/// The rate-1/4 GF(16) example code with lifting factor 3.
pub fn rate_quarter_example() -> PolynomialParityCheck {
    PolynomialParityCheck::parse(RATE_QUARTER_GF16).expect("bundled code parses")
}

/// Rate-3/4 GF(16) code of 576 bits, small enough for desk simulations.
pub fn desk_code() -> PolynomialParityCheck {
    PolynomialParityCheck::parse(RATE_THREE_QUARTER_GF16).expect("bundled code parses")
}

/// Ensemble with the row and column weights of [`desk_code`].
pub fn desk_ensemble() -> EnsembleConfig {
    EnsembleConfig::new(4, 12, vec![9, 9, 9], 12).expect("valid ensemble")
}
