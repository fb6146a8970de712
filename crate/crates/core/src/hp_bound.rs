//! Sphere upper bound on ML decoding error probability for an
//! arbitrary signal set, plus BICM capacity limits.
//!
//! With D signal dimensions, noise std sigma and a distance spectrum
//! {S_w} over squared Euclidean distances w, the bound is
//!
//! ```text
//! P_e <= Σ_{w < 4 w0} S_w Θ_w + P(|z|^2 > w0),
//! Θ_w  = P(z_1 >= sqrt(w)/2, |z|^2 <= w0),
//! ```
//!
//! where z is the D-dimensional noise. The radius w0 minimizing the bound
//! solves Σ_{w < 4 w0} S_w ∫_0^{arccos sqrt(w/4w0)} sin^{D-2} = ∫_0^π sin^{D-2}.
//! The left side is half a regularized incomplete beta function per term,
//! and does not depend on sigma.

use crate::awgn::{sigma_from_snr, SnrConvention};
use crate::error::{Error, Result};
use crate::gf_spectra::{ensemble_bit_spectrum, ensemble_symbol_spectrum, random_code_spectrum, LogPoly};
use crate::pam_map::{label_to_point, MappingKind, MappingScheme};
use crate::qc_code::EnsembleConfig;
use crate::sed_spectra::{bicm_family_seds, group_sed_mgf, sicm_seds, PairModel, SpectrumPoly};
use crate::special::{gauss_hermite, gauss_legendre, ln_add, ln_beta_reg_xy, ln_chi2_cdf, ln_chi2_sf, ln_q_func, ln_sum_exp};

const NEG_INF: f64 = f64::NEG_INFINITY;

/// Spectrum, dimension and noise level for one bound evaluation.
#[derive(Debug, Clone, PartialEq)]
pub struct BoundInput {
    /// (squared distance, ln S), increasing distance, distances > 0.
    terms: Vec<(f64, f64)>,
    n_dim: usize,
    sigma: f64,
    /// Spectrum is exact for distances up to this value.
    complete_below: f64,
}

impl BoundInput {
    /// From a truncated grid spectrum; N_p signal dimensions.
    pub fn new(spectrum: &SpectrumPoly, n_dim: usize, sigma: f64) -> Result<Self> {
        let terms: Vec<(f64, f64)> = spectrum.iter().filter(|(d, _)| *d > 0.0).collect();
        Self::from_terms(terms, n_dim, sigma, spectrum.max_delta())
    }

    /// From explicit (distance, ln count) pairs; `complete_below` is
    /// infinite when nothing was truncated.
    pub fn from_terms(mut terms: Vec<(f64, f64)>, n_dim: usize, sigma: f64, complete_below: f64) -> Result<Self> {
        if n_dim < 3 {
            return Err(Error::InvalidBoundInput(format!("need at least 3 dimensions, got {n_dim}")));
        }
        if !(sigma > 0.0 && sigma.is_finite()) {
            return Err(Error::InvalidBoundInput(format!("sigma = {sigma}")));
        }
        terms.retain(|t| t.1 > NEG_INF);
        if terms.is_empty() {
            return Err(Error::InvalidBoundInput("empty spectrum".into()));
        }
        if terms.iter().any(|t| !(t.0 > 0.0) || t.1.is_nan()) {
            return Err(Error::InvalidBoundInput("distances must be positive".into()));
        }
        terms.sort_by(|a, b| a.0.total_cmp(&b.0));
        Ok(Self {
            terms,
            n_dim,
            sigma,
            complete_below,
        })
    }

    pub fn with_sigma(&self, sigma: f64) -> Result<Self> {
        Self::from_terms(self.terms.clone(), self.n_dim, sigma, self.complete_below)
    }

    pub fn terms(&self) -> &[(f64, f64)] {
        &self.terms
    }

    pub fn n_dim(&self) -> usize {
        self.n_dim
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }
}

/// ln of the fraction of the sphere surface cut off by the cap at angle
/// arccos sqrt(w / 4 w0): ln(I_x((D-1)/2, 1/2) / 2), x = 1 - w/(4 w0).
fn ln_cap_fraction(n_dim: usize, w: f64, w0: f64) -> f64 {
    let y = w / (4.0 * w0);
    if y >= 1.0 {
        return NEG_INF;
    }
    ln_beta_reg_xy(0.5 * (n_dim as f64 - 1.0), 0.5, 1.0 - y, y) - std::f64::consts::LN_2
}

/// ln(LHS / RHS) of the radius equation; nondecreasing in w0.
pub fn ln_w0_balance(input: &BoundInput, w0: f64) -> f64 {
    let mut acc = NEG_INF;
    for &(w, ls) in &input.terms {
        if w >= 4.0 * w0 {
            break;
        }
        acc = ln_add(acc, ls + ln_cap_fraction(input.n_dim, w, w0));
    }
    acc
}

/// Sphere radius w0 (as a squared distance). `None` when the spectrum is
/// complete and too thin for the equation to have a root; the bound then
/// degenerates to the union bound (w0 -> infinity).
pub fn solve_w0(input: &BoundInput) -> Result<Option<f64>> {
    let lo0 = input.terms[0].0 / 4.0;
    let mut hi = input.complete_below / 4.0;
    if !hi.is_finite() {
        // Complete spectrum: the balance tends to ln(Σ S / 2).
        let total = ln_sum_exp(&input.terms.iter().map(|t| t.1).collect::<Vec<_>>());
        if total <= std::f64::consts::LN_2 {
            return Ok(None);
        }
        hi = input.terms.last().expect("nonempty").0;
        while ln_w0_balance(input, hi) < 0.0 {
            hi *= 2.0;
            if !hi.is_finite() {
                return Ok(None);
            }
        }
    } else if hi <= lo0 || ln_w0_balance(input, hi) < 0.0 {
        return Err(Error::TruncatedSpectrum {
            max_delta: input.complete_below,
        });
    }
    let mut lo = lo0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if ln_w0_balance(input, mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let (gl, gh) = (ln_w0_balance(input, lo), ln_w0_balance(input, hi));
    Ok(Some(if gl.abs() < gh.abs() { lo } else { hi }))
}

/// Quadrature resolution for the Θ_w integrals.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    /// Gauss-Legendre nodes per panel.
    pub nodes: usize,
    /// Longest panel, in units of sigma.
    pub panel: f64,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self { nodes: 16, panel: 0.25 }
    }
}

/// One bound evaluation.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize)]
pub struct BoundValue {
    /// Bound clamped to [0, 1].
    pub value: f64,
    /// ln of the unclamped bound.
    pub ln_value: f64,
    pub w0: Option<f64>,
}

/// ln Θ(a) = ln ∫_a^b φ(y/σ)/σ · F_{χ²_{D-1}}((w0 - y²)/σ²) dy for every
/// lower limit in `lows` (any order), b = sqrt(w0). One pass from b down.
fn ln_theta_all(lows: &[f64], w0: f64, sigma: f64, n_dim: usize, quad: Quadrature) -> Vec<f64> {
    let b = w0.sqrt();
    let dof = n_dim as f64 - 1.0;
    let ln_norm = -0.5 * (2.0 * std::f64::consts::PI).ln() - sigma.ln();
    let g = |y: f64| {
        let t = (w0 - y * y) / (sigma * sigma);
        ln_norm - 0.5 * (y / sigma).powi(2) + ln_chi2_cdf(dof, t)
    };
    let (xs, ws) = gauss_legendre(quad.nodes);
    let panel = quad.panel * sigma;
    let mut order: Vec<usize> = (0..lows.len()).collect();
    order.sort_by(|&i, &j| lows[j].total_cmp(&lows[i]));
    let mut out = vec![NEG_INF; lows.len()];
    let mut acc = NEG_INF;
    let mut top = b;
    for i in order {
        let a = lows[i].min(b);
        if a < top {
            let pieces = ((top - a) / panel).ceil().max(1.0) as usize;
            let h = (top - a) / pieces as f64;
            for k in 0..pieces {
                let (u, v) = (a + k as f64 * h, a + (k + 1) as f64 * h);
                let (mid, half) = (0.5 * (u + v), 0.5 * (v - u));
                let vals: Vec<f64> = xs
                    .iter()
                    .zip(&ws)
                    .map(|(x, w)| w.ln() + half.ln() + g(mid + half * x))
                    .collect();
                acc = ln_add(acc, ln_sum_exp(&vals));
            }
            top = a;
        }
        out[i] = acc;
    }
    out
}

/// Bound for a given radius (`None` = union bound).
pub fn hp_bound_at(input: &BoundInput, w0: Option<f64>, quad: Quadrature) -> BoundValue {
    let sigma = input.sigma;
    let ln_value = match w0 {
        None => {
            let terms: Vec<f64> = input
                .terms
                .iter()
                .map(|&(w, ls)| ls + ln_q_func(w.sqrt() / (2.0 * sigma)))
                .collect();
            ln_sum_exp(&terms)
        }
        Some(w0) => {
            let inside: Vec<&(f64, f64)> = input.terms.iter().take_while(|t| t.0 < 4.0 * w0).collect();
            let lows: Vec<f64> = inside.iter().map(|t| t.0.sqrt() / 2.0).collect();
            let thetas = ln_theta_all(&lows, w0, sigma, input.n_dim, quad);
            let sum: Vec<f64> = inside.iter().zip(&thetas).map(|(t, th)| t.1 + th).collect();
            let outer = ln_chi2_sf(input.n_dim as f64, w0 / (sigma * sigma));
            ln_add(ln_sum_exp(&sum), outer)
        }
    };
    BoundValue {
        value: ln_value.exp().clamp(0.0, 1.0),
        ln_value,
        w0,
    }
}

/// Solves for w0 and evaluates the bound.
pub fn hp_bound(input: &BoundInput) -> Result<BoundValue> {
    let w0 = solve_w0(input)?;
    Ok(hp_bound_at(input, w0, Quadrature::default()))
}

/// Which code family a spectrum describes.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub enum SpectrumSource {
    Ensemble(EnsembleConfig),
    /// Random linear code over GF(2^m) with `n_sym` symbols and `r_bits`
    /// redundant bits.
    RandomCode { m: u32, n_sym: usize, r_bits: usize },
}

impl SpectrumSource {
    pub fn m(&self) -> u32 {
        match self {
            SpectrumSource::Ensemble(c) => c.m,
            SpectrumSource::RandomCode { m, .. } => *m,
        }
    }

    pub fn n_bits(&self) -> usize {
        match self {
            SpectrumSource::Ensemble(c) => c.n_bits(),
            SpectrumSource::RandomCode { m, n_sym, .. } => n_sym * *m as usize,
        }
    }

    fn symbol_spectrum(&self) -> Result<LogPoly> {
        match self {
            SpectrumSource::Ensemble(c) => ensemble_symbol_spectrum(c),
            SpectrumSource::RandomCode { m, n_sym, r_bits } => Ok(random_code_spectrum(*n_sym, *r_bits, 1 << m)),
        }
    }

    /// Random codes use the binary random code of the same redundancy.
    fn bit_spectrum(&self) -> Result<LogPoly> {
        match self {
            SpectrumSource::Ensemble(c) => ensemble_bit_spectrum(c),
            SpectrumSource::RandomCode { r_bits, .. } => Ok(random_code_spectrum(self.n_bits(), *r_bits, 2)),
        }
    }
}

/// Hamming spectrum a mapping needs, computed once and reused across
/// truncation distances.
#[derive(Debug, Clone)]
pub struct SedModel {
    scheme: MappingScheme,
    n_bits: usize,
    hamming: LogPoly,
    table: Option<crate::sed_spectra::GroupMgfTable>,
    pair_model: PairModel,
    step: f64,
}

impl SedModel {
    pub fn new(source: &SpectrumSource, kind: MappingKind, p: u32, pair_model: PairModel, step: f64) -> Result<Self> {
        let scheme = MappingScheme::new(kind, source.m(), p)?;
        let n_bits = source.n_bits();
        if n_bits % p as usize != 0 {
            return Err(Error::IncompatibleMapping {
                scheme: kind.name(),
                m: source.m(),
                p,
                why: format!("{n_bits} bits do not fill whole signals"),
            });
        }
        let (hamming, table) = match kind {
            MappingKind::Sicm => (source.symbol_spectrum()?, None),
            _ => (source.bit_spectrum()?, Some(group_sed_mgf(&scheme)?)),
        };
        Ok(Self {
            scheme,
            n_bits,
            hamming,
            table,
            pair_model,
            step,
        })
    }

    /// Signal dimensions N_p.
    pub fn n_dim(&self) -> usize {
        self.n_bits / self.scheme.p as usize
    }

    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    /// SED spectrum truncated at `max_delta`.
    pub fn spectrum(&self, max_delta: f64) -> Result<SpectrumPoly> {
        match &self.table {
            None => sicm_seds(&self.hamming, self.scheme.m, self.scheme.p, self.step, max_delta),
            Some(t) => bicm_family_seds(&self.hamming, t, self.n_bits, self.pair_model, self.step, max_delta),
        }
    }

    /// Spectrum long enough for the bound: the truncation distance is
    /// doubled until the radius equation has its root inside it. Returns
    /// the spectrum and w0.
    pub fn spectrum_for_bound(&self, initial_max_delta: f64) -> Result<(SpectrumPoly, Option<f64>)> {
        let mut max_delta = initial_max_delta.max(1.0);
        loop {
            let spec = self.spectrum(max_delta)?;
            if spec.iter().any(|t| t.0 > 0.0) {
                let input = BoundInput::new(&spec, self.n_dim(), 1.0)?;
                match solve_w0(&input) {
                    Ok(w0) => return Ok((spec, w0)),
                    Err(Error::TruncatedSpectrum { .. }) => {}
                    Err(e) => return Err(e),
                }
            }
            max_delta *= 2.0;
            if max_delta > 1e7 {
                return Err(Error::InvalidBoundInput("no sphere radius below distance 1e7".into()));
            }
        }
    }
}

/// Bound values over an SNR grid.
#[derive(Debug, Clone)]
pub struct BoundCurve {
    pub spectrum: SpectrumPoly,
    pub w0: Option<f64>,
    pub n_dim: usize,
    pub points: Vec<(f64, BoundValue)>,
}

/// Spectra once, bound per SNR (SNR convention applied per PAM component).
pub fn bound_curve(model: &SedModel, snrs: &[f64], convention: SnrConvention) -> Result<BoundCurve> {
    let (spectrum, w0) = model.spectrum_for_bound(32.0)?;
    let p = model.scheme().p;
    let n_dim = model.n_dim();
    let base = BoundInput::new(&spectrum, n_dim, 1.0)?;
    let points = snrs
        .iter()
        .map(|&snr| {
            let input = base.with_sigma(sigma_from_snr(snr, p, convention))?;
            Ok((snr, hp_bound_at(&input, w0, Quadrature::default())))
        })
        .collect::<Result<_>>()?;
    Ok(BoundCurve {
        spectrum,
        w0,
        n_dim,
        points,
    })
}

/// Per-bit mutual informations I(b_i; Y), in bits, for Gray 2^p-PAM at
/// noise std sigma (64-node Gauss-Hermite over the noise).
pub fn bit_mutual_information(p: u32, sigma: f64) -> Vec<f64> {
    let m = 1u32 << p;
    let points: Vec<f64> = (0..m).map(|l| f64::from(label_to_point(p, l))).collect();
    let (nodes, weights) = gauss_hermite(64);
    let scale = std::f64::consts::SQRT_2 * sigma;
    let mut info = vec![0.0; p as usize];
    for (label, &x) in points.iter().enumerate() {
        for (t, w) in nodes.iter().zip(&weights) {
            let y = x + scale * t;
            let ll: Vec<f64> = points.iter().map(|&c| -(y - c).powi(2) / (2.0 * sigma * sigma)).collect();
            let all = ln_sum_exp(&ll);
            for (i, slot) in info.iter_mut().enumerate() {
                let bit = (label >> i) & 1;
                let same: Vec<f64> = (0..m as usize)
                    .filter(|&l| (l >> i) & 1 == bit)
                    .map(|l| ll[l])
                    .collect();
                *slot += w / std::f64::consts::PI.sqrt() * (all - ln_sum_exp(&same)) / std::f64::consts::LN_2;
            }
        }
    }
    info.iter().map(|v| 1.0 - v / f64::from(m)).collect()
}

/// SNR (dB) at which Σ_i I(b_i; Y) equals `efficiency` bits per PAM use.
pub fn bicm_limit(p: u32, efficiency: f64, convention: SnrConvention) -> Result<f64> {
    MappingScheme::new(MappingKind::Bicm, p, p)?;
    if !(efficiency > 0.0 && efficiency < f64::from(p)) {
        return Err(Error::Unachievable { eff: efficiency, p });
    }
    let rate = |snr: f64| bit_mutual_information(p, sigma_from_snr(snr, p, convention)).iter().sum::<f64>();
    let (mut lo, mut hi) = (-40.0, 80.0);
    for _ in 0..100 {
        let mid = 0.5 * (lo + hi);
        if rate(mid) < efficiency {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-9 {
            break;
        }
    }
    Ok(0.5 * (lo + hi))
}
