//! Ensemble-average Hamming weight spectra in the log domain.
//!
//! Counts grow like q^N, so every series here stores natural logarithms of
//! its coefficients, `-inf` marking an absent term. Sums are log-sum-exp and
//! no subtraction ever happens in the log domain; the one place a signed
//! expansion is unavoidable (the single-check enumerator) is done exactly in
//! big integers first.

use std::io::Write;

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::qc_code::EnsembleConfig;
use crate::special::ln_binomial;

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Something that can play the role of the inner series in a composition
/// f(g(s)) = Σ f_n g(s)^n.
pub trait GenFn: Clone {
    /// Scalar type of the outer series' coefficients.
    type Coeff;

    fn zero_like(&self) -> Self;
    /// The constant series 1 (empty sum).
    fn one_like(&self) -> Self;
    fn mul(&self, other: &Self) -> Self;
    /// self += c * other.
    fn add_scaled(&mut self, other: &Self, c: &Self::Coeff);
    fn coeff_is_zero(c: &Self::Coeff) -> bool;
}

/// Σ_n cgf[n] * mgf^n, powers built incrementally.
pub fn compose_with<T: GenFn>(cgf: &[T::Coeff], mgf: &T) -> T {
    let mut acc = mgf.zero_like();
    let mut pow = mgf.one_like();
    let last = cgf.iter().rposition(|c| !T::coeff_is_zero(c));
    let Some(last) = last else {
        return acc;
    };
    for (n, c) in cgf.iter().enumerate().take(last + 1) {
        if n > 0 {
            pow = pow.mul(mgf);
        }
        if !T::coeff_is_zero(c) {
            acc.add_scaled(&pow, c);
        }
    }
    acc
}

/// Composition of a log-domain CGF with a log-domain series.
pub fn compose<T: GenFn<Coeff = f64>>(cgf: &LogPoly, mgf: &T) -> T {
    compose_with(cgf.coeffs(), mgf)
}

/// Polynomial with natural-log coefficients indexed by exponent.
#[derive(Debug, Clone, PartialEq)]
pub struct LogPoly {
    coeffs: Vec<f64>,
}

impl LogPoly {
    pub fn zero() -> Self {
        Self { coeffs: Vec::new() }
    }

    pub fn one() -> Self {
        Self { coeffs: vec![0.0] }
    }

    /// c * s^k with c given as ln c.
    pub fn monomial(k: usize, ln_c: f64) -> Self {
        let mut coeffs = vec![NEG_INF; k + 1];
        coeffs[k] = ln_c;
        Self::from_log(coeffs)
    }

    /// Takes ln-coefficients; trailing `-inf` entries are dropped.
    pub fn from_log(mut coeffs: Vec<f64>) -> Self {
        assert!(coeffs.iter().all(|c| !c.is_nan()), "NaN coefficient");
        while coeffs.last() == Some(&NEG_INF) {
            coeffs.pop();
        }
        Self { coeffs }
    }

    /// From nonnegative linear-domain coefficients.
    pub fn from_counts(counts: &[f64]) -> Self {
        assert!(counts.iter().all(|&c| c >= 0.0), "negative count");
        Self::from_log(counts.iter().map(|c| c.ln()).collect())
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    /// ln of the coefficient at s^w (`-inf` beyond the stored range).
    pub fn get(&self, w: usize) -> f64 {
        self.coeffs.get(w).copied().unwrap_or(NEG_INF)
    }

    /// Highest exponent with a present coefficient.
    pub fn degree(&self) -> Option<usize> {
        self.coeffs.len().checked_sub(1)
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// ln of the coefficient sum, i.e. ln f(1).
    pub fn ln_total(&self) -> f64 {
        crate::special::ln_sum_exp(&self.coeffs)
    }

    /// Linear-domain coefficients; may overflow to infinity.
    pub fn to_counts(&self) -> Vec<f64> {
        self.coeffs.iter().map(|c| c.exp()).collect()
    }

    /// Multiplies every coefficient by e^{ln_c}.
    pub fn scaled(&self, ln_c: f64) -> Self {
        Self::from_log(self.coeffs.iter().map(|c| c + ln_c).collect())
    }

    /// Drops all terms above `max_degree`.
    pub fn truncated(mut self, max_degree: usize) -> Self {
        self.coeffs.truncate(max_degree + 1);
        Self::from_log(self.coeffs)
    }

    pub fn add(&self, other: &Self) -> Self {
        let mut out = self.clone();
        out.add_scaled(other, &0.0);
        out
    }

    pub fn convolve(&self, other: &Self) -> Self {
        Self::from_log(log_convolve(&self.coeffs, &other.coeffs))
    }

    pub fn pow(&self, l: usize) -> Self {
        poly_power(self, l)
    }
}

impl GenFn for LogPoly {
    type Coeff = f64;

    fn zero_like(&self) -> Self {
        Self::zero()
    }

    fn one_like(&self) -> Self {
        Self::one()
    }

    fn mul(&self, other: &Self) -> Self {
        self.convolve(other)
    }

    fn add_scaled(&mut self, other: &Self, c: &f64) {
        if self.coeffs.len() < other.coeffs.len() {
            self.coeffs.resize(other.coeffs.len(), NEG_INF);
        }
        for (a, b) in self.coeffs.iter_mut().zip(&other.coeffs) {
            *a = crate::special::ln_add(*a, b + c);
        }
    }

    fn coeff_is_zero(c: &f64) -> bool {
        *c == NEG_INF
    }
}

/// Log-domain convolution: out[k] = ln Σ_i e^{a[i] + b[k-i]}.
pub(crate) fn log_convolve(a: &[f64], b: &[f64]) -> Vec<f64> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    let mut out = vec![NEG_INF; a.len() + b.len() - 1];
    for (k, o) in out.iter_mut().enumerate() {
        let lo = k.saturating_sub(b.len() - 1);
        let hi = k.min(a.len() - 1);
        let mut max = NEG_INF;
        for i in lo..=hi {
            max = max.max(a[i] + b[k - i]);
        }
        if max == NEG_INF {
            continue;
        }
        let mut sum = 0.0;
        for i in lo..=hi {
            sum += (a[i] + b[k - i] - max).exp();
        }
        *o = max + sum.ln();
    }
    out
}

/// p^l by square-and-multiply.
pub fn poly_power(p: &LogPoly, l: usize) -> LogPoly {
    let mut result = LogPoly::one();
    let mut base = p.clone();
    let mut e = l;
    while e > 0 {
        if e & 1 == 1 {
            result = result.convolve(&base);
        }
        e >>= 1;
        if e > 0 {
            base = base.convolve(&base);
        }
    }
    result
}

fn ln_biguint(x: &BigUint) -> f64 {
    if x.is_zero() {
        return NEG_INF;
    }
    let bits = x.bits();
    if bits <= 1000 {
        return x.to_f64().expect("fits in f64").ln();
    }
    let shift = bits - 64;
    let top = (x >> shift).to_f64().expect("64 bits");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

/// Exact integer coefficients of (a + b s)^k.
fn binomial_power(a: i64, b: i64, k: usize) -> Vec<BigInt> {
    let mut out = vec![BigInt::one()];
    for _ in 0..k {
        let mut next = vec![BigInt::zero(); out.len() + 1];
        for (i, c) in out.iter().enumerate() {
            next[i] += c * a;
            next[i + 1] += c * b;
        }
        out = next;
    }
    out
}

fn int_mul(x: &[BigInt], y: &[BigInt]) -> Vec<BigInt> {
    let mut out = vec![BigInt::zero(); x.len() + y.len() - 1];
    for (i, a) in x.iter().enumerate() {
        for (j, b) in y.iter().enumerate() {
            out[i + j] += a * b;
        }
    }
    out
}

/// Exact integer coefficients of the single-check weight enumerator.
pub fn row_cgf_exact(k_j: usize, k: usize, q: usize) -> Result<Vec<BigUint>> {
    if k_j == 0 || k_j > k {
        return Err(Error::InvalidEnsemble(format!("K_j = {k_j} outside 1..={k}")));
    }
    if q < 2 || !q.is_power_of_two() {
        return Err(Error::InvalidEnsemble(format!("q = {q} is not a power of two")));
    }
    let qi = q as i64;
    let plus = binomial_power(1, qi - 1, k_j);
    let minus = binomial_power(1, -1, k_j);
    let checked: Vec<BigInt> = plus
        .iter()
        .zip(&minus)
        .map(|(a, b)| {
            let num = a + b * (qi - 1);
            debug_assert!((&num % qi).is_zero());
            num / qi
        })
        .collect();
    let free = binomial_power(1, qi - 1, k - k_j);
    int_mul(&checked, &free)
        .into_iter()
        .map(|c| {
            if c.is_negative() {
                Err(Error::InvalidEnsemble("negative enumerator coefficient".into()))
            } else {
                Ok(c.magnitude().clone())
            }
        })
        .collect()
}

/// Weight enumerator of length-K q-ary words satisfying one check with K_j
/// nonzero coefficients:
/// [(1+(q-1)s)^{K_j} + (q-1)(1-s)^{K_j}]/q * (1+(q-1)s)^{K-K_j}.
pub fn row_cgf(k_j: usize, k: usize, q: usize) -> Result<LogPoly> {
    Ok(LogPoly::from_log(row_cgf_exact(k_j, k, q)?.iter().map(ln_biguint).collect()))
}

/// Bit-weight distribution of a uniformly random nonzero m-bit symbol:
/// ((1+ρ)^m - 1)/(q-1).
pub fn phi_mgf(m: u32) -> LogPoly {
    let ln_q1 = ((1u64 << m) as f64 - 1.0).ln();
    let mut c = vec![NEG_INF];
    c.extend((1..=m).map(|i| ln_binomial(f64::from(m), f64::from(i)) - ln_q1));
    LogPoly::from_log(c)
}

fn strip_sizes(cfg: &EnsembleConfig) -> Vec<(usize, usize)> {
    let mut sizes: Vec<(usize, usize)> = Vec::new();
    for &kj in &cfg.k_list {
        match sizes.iter_mut().find(|(k, _)| *k == kj) {
            Some((_, mult)) => *mult += 1,
            None => sizes.push((kj, 1)),
        }
    }
    sizes
}

/// Average symbol-weight spectrum F_{N,w} of ensemble N:
/// (q-1)^{w(1-J)} C(N,w)^{1-J} Π_j f^strip_{j,w} with f^strip = (f^row)^L.
pub fn ensemble_symbol_spectrum(cfg: &EnsembleConfig) -> Result<LogPoly> {
    cfg.validate()?;
    let q = cfg.q();
    let n = cfg.n_sym();
    let strips: Vec<(LogPoly, usize)> = strip_sizes(cfg)
        .into_iter()
        .map(|(kj, mult)| Ok((poly_power(&row_cgf(kj, cfg.k, q)?, cfg.l_strip), mult)))
        .collect::<Result<_>>()?;
    let one_minus_j = 1.0 - cfg.j as f64;
    let ln_q1 = (q as f64 - 1.0).ln();
    let coeffs = (0..=n)
        .map(|w| {
            let mut c = one_minus_j * (w as f64 * ln_q1 + ln_binomial(n as f64, w as f64));
            for (strip, mult) in &strips {
                c += *mult as f64 * strip.get(w);
            }
            if c.is_nan() {
                NEG_INF
            } else {
                c
            }
        })
        .collect();
    Ok(LogPoly::from_log(coeffs))
}

/// Average bit-weight spectrum Ψ_w of ensemble B:
/// C(n,w)^{1-J} Π_j ψ^strip_{j,w} with ψ^strip = (f^row(φ(ρ)))^L.
pub fn ensemble_bit_spectrum(cfg: &EnsembleConfig) -> Result<LogPoly> {
    cfg.validate()?;
    let q = cfg.q();
    let n = cfg.n_bits();
    let phi = phi_mgf(cfg.m);
    let strips: Vec<(LogPoly, usize)> = strip_sizes(cfg)
        .into_iter()
        .map(|(kj, mult)| {
            let row = compose(&row_cgf(kj, cfg.k, q)?, &phi);
            Ok((poly_power(&row, cfg.l_strip), mult))
        })
        .collect::<Result<_>>()?;
    let one_minus_j = 1.0 - cfg.j as f64;
    let coeffs = (0..=n)
        .map(|w| {
            let mut c = one_minus_j * ln_binomial(n as f64, w as f64);
            for (strip, mult) in &strips {
                c += *mult as f64 * strip.get(w);
            }
            if c.is_nan() {
                NEG_INF
            } else {
                c
            }
        })
        .collect();
    Ok(LogPoly::from_log(coeffs))
}

/// Average spectrum of random linear q-ary codes of length N with r
/// redundant bits: 2^{-r} C(N,w) (q-1)^w.
pub fn random_code_spectrum(n: usize, r_bits: usize, q: usize) -> LogPoly {
    let ln_q1 = (q as f64 - 1.0).ln();
    let base = -(r_bits as f64) * std::f64::consts::LN_2;
    LogPoly::from_log(
        (0..=n)
            .map(|w| base + ln_binomial(n as f64, w as f64) + w as f64 * ln_q1)
            .collect(),
    )
}

/// Writes `weight,log10_count` rows for every present coefficient.
pub fn write_spectrum_csv<W: Write>(spectrum: &LogPoly, mut out: W) -> std::io::Result<()> {
    writeln!(out, "weight,log10_count")?;
    for (w, c) in spectrum.coeffs().iter().enumerate() {
        if *c > NEG_INF {
            writeln!(out, "{w},{:.12e}", c / std::f64::consts::LN_10)?;
        }
    }
    Ok(())
}
