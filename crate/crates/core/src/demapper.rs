//! Symbol metrics from received PAM samples.
//!
//! For each code symbol the demapper returns a length-q vector of log
//! likelihoods, `L(v) = log P(v | r) - log P(0 | r)`. How the bits of a
//! symbol are combined depends on the mapping:
//!
//! * BICM treats every bit separately and sums bit log-probabilities.
//! * SICM, BPCM and ASCM group the bits of a symbol by the signal that
//!   carries them and use the exact joint probability of each group,
//!   marginalizing the planes that belong to other symbols. For SICM a
//!   group is a whole signal, for BPCM a single bit plane, for ASCM amplitude
//!   symbols the amplitude planes with the sign averaged out.

use crate::pam_map::{label_to_point, Layout, MappingKind};
use crate::special::ln_sum_exp;
use crate::LLR_MAX;

/// Normalized length-q log-likelihood vector; entry 0 is always 0.
#[derive(Debug, Clone, PartialEq)]
pub struct LlrVector(Vec<f64>);

impl LlrVector {
    /// Normalizes arbitrary log-domain scores: entries more than `LLR_MAX`
    /// below the maximum are clipped, then everything is shifted so entry 0
    /// is 0.
    pub fn from_log(mut v: Vec<f64>) -> Self {
        normalize_in_place(&mut v);
        LlrVector(v)
    }

    /// Vector with no information.
    pub fn uniform(q: usize) -> Self {
        LlrVector(vec![0.0; q])
    }

    /// Near-certain metric for `symbol`.
    pub fn certain(q: usize, symbol: usize) -> Self {
        let mut v = vec![-LLR_MAX; q];
        v[symbol] = 0.0;
        Self::from_log(v)
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    /// Probabilities exp(L(v)) / sum.
    pub fn probs(&self) -> Vec<f64> {
        let max = self.0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let e: Vec<f64> = self.0.iter().map(|x| (x - max).exp()).collect();
        let s: f64 = e.iter().sum();
        e.into_iter().map(|x| x / s).collect()
    }

    /// Most likely symbol, lowest index on ties.
    pub fn argmax(&self) -> usize {
        argmax(&self.0)
    }
}

pub(crate) fn argmax(v: &[f64]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate() {
        if x > v[best] {
            best = i;
        }
    }
    best
}

pub(crate) fn normalize_in_place(v: &mut [f64]) {
    let max = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    for x in v.iter_mut() {
        *x = (*x - max).max(-LLR_MAX);
    }
    let v0 = v[0];
    for x in v.iter_mut() {
        *x -= v0;
    }
}

/// Posterior probabilities of the 2^p points (in increasing order) given r.
pub fn signal_posteriors(r: f64, p: u32, sigma: f64) -> Vec<f64> {
    let n0 = 2.0 * sigma * sigma;
    let m = 1i32 << p;
    let ll: Vec<f64> = (0..m)
        .map(|i| {
            let xi = f64::from(2 * i - m + 1);
            -(r - xi) * (r - xi) / n0
        })
        .collect();
    let z = ln_sum_exp(&ll);
    ll.into_iter().map(|x| (x - z).exp()).collect()
}

/// Log posteriors indexed by label (plane l at bit l).
pub fn label_log_posteriors(r: f64, p: u32, n0: f64) -> Vec<f64> {
    let ll: Vec<f64> = (0..1u32 << p)
        .map(|lab| {
            let d = r - f64::from(label_to_point(p, lab));
            -d * d / n0
        })
        .collect();
    let z = ln_sum_exp(&ll);
    ll.into_iter().map(|x| x - z).collect()
}

/// Sign and amplitude bit LLRs log(P(bit = 1) / P(bit = 0)) from point
/// posteriors in increasing point order; clipped to +-`LLR_MAX`.
pub fn bit_llrs(posteriors: &[f64], p: u32) -> (f64, Vec<f64>) {
    let m = 1i32 << p;
    let mut one = vec![0.0; p as usize];
    let mut zero = vec![0.0; p as usize];
    for (i, &pr) in posteriors.iter().enumerate() {
        let xi = 2 * i as i32 - m + 1;
        let label = crate::pam_map::point_to_label(p, xi).expect("constellation point");
        for plane in 0..p as usize {
            if (label >> plane) & 1 == 1 {
                one[plane] += pr;
            } else {
                zero[plane] += pr;
            }
        }
    }
    let llr: Vec<f64> = one
        .iter()
        .zip(&zero)
        .map(|(a, b)| (a.ln() - b.ln()).clamp(-LLR_MAX, LLR_MAX))
        .collect();
    (llr[0], llr[1..].to_vec())
}

/// Turns received samples into per-symbol metrics for a fixed layout.
#[derive(Debug, Clone)]
pub struct Demapper {
    layout: Layout,
    m: u32,
    /// Per symbol: groups of (signal, [(bit index in symbol, plane)]).
    groups: Vec<Vec<(usize, Vec<(u32, u32)>)>>,
}

impl Demapper {
    pub fn new(layout: Layout) -> Self {
        let scheme = layout.scheme();
        let m = scheme.m;
        let n_sym = layout.n_bits() / m as usize;
        let groups = (0..n_sym)
            .map(|j| {
                let mut g: Vec<(usize, Vec<(u32, u32)>)> = Vec::new();
                for i in 0..m {
                    let (sig, plane) = layout.place(j * m as usize + i as usize);
                    let shared = scheme.kind != MappingKind::Bicm;
                    match g.iter_mut().find(|(s, _)| shared && *s == sig) {
                        Some((_, bits)) => bits.push((i, plane)),
                        None => g.push((sig, vec![(i, plane)])),
                    }
                }
                g
            })
            .collect();
        Self { layout, m, groups }
    }

    pub fn layout(&self) -> &Layout {
        &self.layout
    }

    pub fn n_sym(&self) -> usize {
        self.groups.len()
    }

    /// Metrics for all symbols of one codeword.
    pub fn metrics(&self, received: &[f64], sigma: f64) -> Vec<LlrVector> {
        assert_eq!(received.len(), self.layout.n_signals(), "received length");
        let p = self.layout.scheme().p;
        let n0 = 2.0 * sigma * sigma;
        let post: Vec<Vec<f64>> = received.iter().map(|&r| label_log_posteriors(r, p, n0)).collect();
        let q = 1usize << self.m;
        self.groups
            .iter()
            .map(|groups| {
                let mut metric = vec![0.0; q];
                for (sig, bits) in groups {
                    let lp = &post[*sig];
                    // Marginal over labels for each pattern of this group's bits.
                    let mut marg = vec![Vec::new(); 1 << bits.len()];
                    for (label, &x) in lp.iter().enumerate() {
                        let u = bits
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (k, &(_, plane))| acc | (((label >> plane) & 1) << k));
                        marg[u].push(x);
                    }
                    let marg: Vec<f64> = marg.iter().map(|xs| ln_sum_exp(xs)).collect();
                    for (v, mv) in metric.iter_mut().enumerate() {
                        let u = bits
                            .iter()
                            .enumerate()
                            .fold(0usize, |acc, (k, &(i, _))| acc | (((v >> i) & 1) << k));
                        *mv += marg[u];
                    }
                }
                LlrVector::from_log(metric)
            })
            .collect()
    }
}
