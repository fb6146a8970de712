//! Squared Euclidean distance spectra of coded modulation.
//!
//! A pair of codewords at bit distance d is scored by the cumulative
//! normalized SED: every differing bit contributes d_E^2/d_H of the signal
//! group it sits in. Per-bit contributions are modelled as i.i.d. draws from
//! an MGF alpha, so the spectrum is a composition of a Hamming spectrum with
//! powers of alpha. Distances are real (100/3, 52/5, ...), hence spectra live
//! on a uniform grid with mass snapped to the nearest bin.

use std::io::Write;

use num_rational::Rational64;
use num_traits::{ToPrimitive, Zero};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::gf_spectra::{compose, compose_with, GenFn, LogPoly};
use crate::pam_map::{label_to_point, MappingKind, MappingScheme};
use crate::special::{ln_add, ln_binomial, ln_one_minus_exp};

const NEG_INF: f64 = f64::NEG_INFINITY;

pub const DEFAULT_GRID_STEP: f64 = 0.05;
/// Default cap on enumerated ordered pairs of group labels.
pub const DEFAULT_PAIR_CAP: u64 = 1 << 24;

/// One term of a distance MGF: probability and normalized SED.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SedAtom {
    pub prob: Rational64,
    pub delta: Rational64,
}

/// Distribution of the normalized SED between two distinct labels of a
/// signal group, one row per label Hamming distance tau = 1..=group bits.
#[derive(Debug, Clone, PartialEq)]
pub struct GroupMgfTable {
    p: u32,
    signals: usize,
    /// rows[tau - 1], atoms in increasing delta.
    rows: Vec<Vec<SedAtom>>,
    /// Number of ordered label pairs at each tau.
    pairs: Vec<u64>,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

/// Signals per group: one for BICM, the smallest whole number of signals
/// holding whole symbols otherwise.
pub fn group_signals(scheme: &MappingScheme) -> usize {
    let (m, p) = (scheme.m as usize, scheme.p as usize);
    match scheme.kind {
        MappingKind::Bicm => 1,
        _ => m / gcd(m, p),
    }
}

/// Pairwise (d_H, d_E^2) for all ordered pairs of 2^p-PAM labels, indexed
/// `[label_i][label_j]`.
pub fn pair_table(p: u32) -> Vec<Vec<(u32, u32)>> {
    let m = 1u32 << p;
    (0..m)
        .map(|a| {
            (0..m)
                .map(|b| {
                    let d = label_to_point(p, a) - label_to_point(p, b);
                    ((a ^ b).count_ones(), (d * d) as u32)
                })
                .collect()
        })
        .collect()
}

impl GroupMgfTable {
    /// Enumerates every ordered pair of distinct labels of `signals`
    /// 2^p-PAM signals.
    pub fn enumerate(p: u32, signals: usize, cap: u64) -> Result<Self> {
        let g = signals * p as usize;
        let labels = 1u64.checked_shl(g as u32).filter(|_| g < 63);
        let pairs = labels.and_then(|l| l.checked_mul(l - 1));
        match pairs {
            Some(n) if n <= cap => {}
            _ => {
                return Err(Error::EnumerationTooLarge {
                    pairs: pairs.map_or(u128::MAX, u128::from),
                    cap: u128::from(cap),
                })
            }
        }
        let labels = labels.expect("checked") as usize;
        let table = pair_table(p);
        let mask = (1usize << p) - 1;
        let max_sed = (signals as u32) * table.iter().flatten().map(|e| e.1).max().unwrap_or(0);
        let width = (max_sed / 4 + 1) as usize;
        // counts[tau][sed / 4]
        let counts: Vec<Vec<u64>> = (0..labels)
            .into_par_iter()
            .fold(
                || vec![vec![0u64; width]; g + 1],
                |mut acc, a| {
                    for b in 0..labels {
                        let mut sed = 0;
                        for s in 0..signals {
                            let sh = s * p as usize;
                            sed += table[(a >> sh) & mask][(b >> sh) & mask].1;
                        }
                        acc[(a ^ b).count_ones() as usize][(sed / 4) as usize] += 1;
                    }
                    acc
                },
            )
            .reduce(
                || vec![vec![0u64; width]; g + 1],
                |mut x, y| {
                    for (rx, ry) in x.iter_mut().zip(&y) {
                        for (a, b) in rx.iter_mut().zip(ry) {
                            *a += b;
                        }
                    }
                    x
                },
            );
        let mut rows = Vec::with_capacity(g);
        let mut pair_counts = Vec::with_capacity(g);
        for (tau, row) in counts.iter().enumerate().skip(1) {
            let total: u64 = row.iter().sum();
            pair_counts.push(total);
            rows.push(
                row.iter()
                    .enumerate()
                    .filter(|(_, &c)| c > 0)
                    .map(|(sed4, &c)| SedAtom {
                        prob: Rational64::new(c as i64, total as i64),
                        delta: Rational64::new(4 * sed4 as i64, tau as i64),
                    })
                    .collect(),
            );
        }
        Ok(Self {
            p,
            signals,
            rows,
            pairs: pair_counts,
        })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn signals(&self) -> usize {
        self.signals
    }

    /// Label bits per group.
    pub fn group_bits(&self) -> usize {
        self.signals * self.p as usize
    }

    /// Row for label distance tau (1-based).
    pub fn row(&self, tau: usize) -> &[SedAtom] {
        &self.rows[tau - 1]
    }

    pub fn rows(&self) -> &[Vec<SedAtom>] {
        &self.rows
    }

    /// Ordered label pairs at label distance tau.
    pub fn pair_count(&self, tau: usize) -> u64 {
        self.pairs[tau - 1]
    }

    /// Keeps the `k` smallest distances of every row and renormalizes.
    pub fn truncated(&self, k: usize) -> Self {
        let rows = self
            .rows
            .iter()
            .map(|row| {
                let kept = &row[..row.len().min(k)];
                let total: Rational64 = kept.iter().map(|a| a.prob).sum();
                kept.iter()
                    .map(|a| SedAtom {
                        prob: a.prob / total,
                        delta: a.delta,
                    })
                    .collect()
            })
            .collect();
        Self {
            rows,
            ..self.clone()
        }
    }

    /// Uniform mixture over all distinct ordered pairs, i.e. each row
    /// weighted by its share of pairs.
    pub fn uniform_mixture(&self) -> Vec<SedAtom> {
        let total: u64 = self.pairs.iter().sum();
        let mut atoms: Vec<SedAtom> = Vec::new();
        for (row, &n) in self.rows.iter().zip(&self.pairs) {
            let w = Rational64::new(n as i64, total as i64);
            for a in row {
                push_atom(&mut atoms, a.delta, a.prob * w);
            }
        }
        atoms.sort_by(|a, b| a.delta.cmp(&b.delta));
        atoms
    }
}

fn push_atom(atoms: &mut Vec<SedAtom>, delta: Rational64, prob: Rational64) {
    match atoms.iter_mut().find(|a| a.delta == delta) {
        Some(a) => a.prob += prob,
        None => atoms.push(SedAtom { prob, delta }),
    }
}

/// Group table of a mapping scheme with the default pair cap.
pub fn group_sed_mgf(scheme: &MappingScheme) -> Result<GroupMgfTable> {
    group_sed_mgf_with_cap(scheme, DEFAULT_PAIR_CAP)
}

pub fn group_sed_mgf_with_cap(scheme: &MappingScheme, cap: u64) -> Result<GroupMgfTable> {
    GroupMgfTable::enumerate(scheme.p, group_signals(scheme), cap)
}

/// Normalized SED of a single 2^p-PAM signal under uniform distinct pairs.
pub fn sicm_uniform_mgf(p: u32) -> Result<Vec<SedAtom>> {
    Ok(GroupMgfTable::enumerate(p, 1, DEFAULT_PAIR_CAP)?.uniform_mixture())
}

/// Distribution of how many of a group's bits differ, given d of n bits.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PairModel {
    /// Each bit differs independently with probability d/n.
    #[default]
    Binomial,
    /// Exactly d of the n bits differ.
    Hypergeometric,
}

impl std::str::FromStr for PairModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "binomial" => Ok(PairModel::Binomial),
            "hypergeometric" => Ok(PairModel::Hypergeometric),
            _ => Err(Error::Config(format!("unknown pair model `{s}`"))),
        }
    }
}

/// ln p_{n,d}(tau) for tau = 0..=g.
fn ln_tau_weights(g: usize, n: usize, d: usize, model: PairModel) -> Vec<f64> {
    let (gf, nf, df) = (g as f64, n as f64, d as f64);
    (0..=g)
        .map(|tau| {
            let t = tau as f64;
            match model {
                PairModel::Binomial => {
                    let x = df / nf;
                    let a = if tau == 0 { 0.0 } else { t * x.ln() };
                    let b = if tau == g { 0.0 } else { (gf - t) * (1.0 - x).ln() };
                    ln_binomial(gf, t) + a + b
                }
                PairModel::Hypergeometric => {
                    ln_binomial(gf, t) + ln_binomial(nf - gf, df - t) - ln_binomial(nf, df)
                }
            }
        })
        .collect()
}

/// alpha_{n,d}: mixture of the table rows weighted by p_{n,d}(tau),
/// conditioned on tau >= 1. Returns (ln probability, delta) pairs.
pub fn alpha_nd(table: &GroupMgfTable, n: usize, d: usize, model: PairModel) -> Result<Vec<(f64, Rational64)>> {
    let g = table.group_bits();
    if d == 0 || d > n || n < g {
        return Err(Error::InvalidBoundInput(format!("need 1 <= d <= n and n >= {g}, got n={n} d={d}")));
    }
    let lw = ln_tau_weights(g, n, d, model);
    let ln_norm = ln_one_minus_exp(lw[0].min(0.0));
    let mut out: Vec<(f64, Rational64)> = Vec::new();
    for (tau, row) in table.rows().iter().enumerate() {
        let w = lw[tau + 1] - ln_norm;
        if w == NEG_INF {
            continue;
        }
        for a in row {
            let lp = w + a.prob.to_f64().expect("finite").ln();
            match out.iter_mut().find(|(_, dl)| *dl == a.delta) {
                Some(e) => e.0 = ln_add(e.0, lp),
                None => out.push((lp, a.delta)),
            }
        }
    }
    out.sort_by(|a, b| a.1.cmp(&b.1));
    Ok(out)
}

/// Spectrum over real distances on a uniform grid, log-domain weights,
/// truncated at a maximum distance.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumPoly {
    step: f64,
    max_bin: usize,
    bins: Vec<f64>,
}

impl SpectrumPoly {
    pub fn empty(step: f64, max_delta: f64) -> Self {
        assert!(step > 0.0 && max_delta >= 0.0, "bad grid");
        Self {
            step,
            max_bin: (max_delta / step).round() as usize,
            bins: Vec::new(),
        }
    }

    /// Mass e^{ln_w} at each delta, snapped to the nearest bin; atoms
    /// beyond the truncation distance are dropped.
    pub fn from_atoms(step: f64, max_delta: f64, atoms: &[(f64, f64)]) -> Self {
        let mut s = Self::empty(step, max_delta);
        for &(ln_w, delta) in atoms {
            let b = s.bin_of(delta);
            if b <= s.max_bin {
                s.add_ln(b, ln_w);
            }
        }
        s.trim();
        s
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn max_delta(&self) -> f64 {
        self.max_bin as f64 * self.step
    }

    pub fn max_bin(&self) -> usize {
        self.max_bin
    }

    pub fn bin_of(&self, delta: f64) -> usize {
        (delta / self.step).round() as usize
    }

    pub fn delta_of(&self, bin: usize) -> f64 {
        bin as f64 * self.step
    }

    /// Log-weights per bin, index 0 at distance 0.
    pub fn bins(&self) -> &[f64] {
        &self.bins
    }

    pub fn ln_at_bin(&self, bin: usize) -> f64 {
        self.bins.get(bin).copied().unwrap_or(NEG_INF)
    }

    /// (distance, ln weight) of every occupied bin.
    pub fn iter(&self) -> impl Iterator<Item = (f64, f64)> + '_ {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > NEG_INF)
            .map(move |(b, v)| (self.delta_of(b), *v))
    }

    pub fn is_empty(&self) -> bool {
        self.bins.is_empty()
    }

    pub fn ln_total(&self) -> f64 {
        crate::special::ln_sum_exp(&self.bins)
    }

    /// Smallest occupied distance.
    pub fn min_delta(&self) -> Option<f64> {
        self.iter().next().map(|(d, _)| d)
    }

    /// ln of the total weight at distances <= delta.
    pub fn ln_cumulative(&self, delta: f64) -> f64 {
        let hi = self.bin_of(delta).min(self.bins.len().saturating_sub(1));
        if self.bins.is_empty() {
            return NEG_INF;
        }
        crate::special::ln_sum_exp(&self.bins[..=hi])
    }

    /// Copy with a lower truncation distance.
    pub fn truncated(&self, max_delta: f64) -> Self {
        let max_bin = ((max_delta / self.step).round() as usize).min(self.max_bin);
        let mut bins = self.bins.clone();
        bins.truncate(max_bin + 1);
        let mut s = Self {
            step: self.step,
            max_bin,
            bins,
        };
        s.trim();
        s
    }

    fn add_ln(&mut self, bin: usize, ln_w: f64) {
        if bin >= self.bins.len() {
            self.bins.resize(bin + 1, NEG_INF);
        }
        self.bins[bin] = ln_add(self.bins[bin], ln_w);
    }

    fn trim(&mut self) {
        while self.bins.last() == Some(&NEG_INF) {
            self.bins.pop();
        }
    }

    fn occupied(&self) -> Vec<(usize, f64)> {
        self.bins
            .iter()
            .enumerate()
            .filter(|(_, v)| **v > NEG_INF)
            .map(|(b, v)| (b, *v))
            .collect()
    }

    /// Truncated convolution; iterates over the sparser operand.
    pub fn convolve(&self, other: &Self) -> Self {
        assert!((self.step - other.step).abs() < 1e-15, "grid mismatch");
        let max_bin = self.max_bin.min(other.max_bin);
        let (dense, sparse) = if self.occupied_len() >= other.occupied_len() {
            (self, other)
        } else {
            (other, self)
        };
        let atoms = sparse.occupied();
        let bins = shift_add(&dense.bins, &atoms, max_bin);
        let mut s = Self {
            step: self.step,
            max_bin,
            bins,
        };
        s.trim();
        s
    }

    fn occupied_len(&self) -> usize {
        self.bins.iter().filter(|v| **v > NEG_INF).count()
    }

    /// Writes `distance,log10_count` for every occupied bin.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "distance,log10_count")?;
        for (d, v) in self.iter() {
            writeln!(out, "{d:.4},{:.12e}", v / std::f64::consts::LN_10)?;
        }
        Ok(())
    }
}

/// out[k] = ln Σ_a e^{src[k - s_a] + v_a} for k <= max_bin.
fn shift_add(src: &[f64], atoms: &[(usize, f64)], max_bin: usize) -> Vec<f64> {
    if src.is_empty() || atoms.is_empty() {
        return Vec::new();
    }
    let max_shift = atoms.iter().map(|a| a.0).max().expect("nonempty");
    let min_shift = atoms.iter().map(|a| a.0).min().expect("nonempty");
    let len = (src.len() - 1 + max_shift).min(max_bin) + 1;
    let first = src.iter().position(|v| *v > NEG_INF).unwrap_or(src.len());
    let mut out = vec![NEG_INF; len];
    for (k, o) in out.iter_mut().enumerate().skip(first + min_shift) {
        let mut max = NEG_INF;
        for &(s, v) in atoms {
            if s <= k && k - s < src.len() {
                max = max.max(src[k - s] + v);
            }
        }
        if max == NEG_INF {
            continue;
        }
        let mut sum = 0.0;
        for &(s, v) in atoms {
            if s <= k && k - s < src.len() {
                sum += (src[k - s] + v - max).exp();
            }
        }
        *o = max + sum.ln();
    }
    out
}

impl GenFn for SpectrumPoly {
    type Coeff = f64;

    fn zero_like(&self) -> Self {
        Self {
            bins: Vec::new(),
            ..self.clone()
        }
    }

    fn one_like(&self) -> Self {
        Self {
            bins: vec![0.0],
            ..self.clone()
        }
    }

    fn mul(&self, other: &Self) -> Self {
        self.convolve(other)
    }

    fn add_scaled(&mut self, other: &Self, c: &f64) {
        let n = other.bins.len().min(self.max_bin + 1);
        if self.bins.len() < n {
            self.bins.resize(n, NEG_INF);
        }
        for (a, b) in self.bins.iter_mut().zip(&other.bins[..n]) {
            *a = ln_add(*a, b + c);
        }
    }

    fn coeff_is_zero(c: &f64) -> bool {
        *c == NEG_INF
    }
}

/// Binned atoms of an MGF, merged per bin; shifts are bin offsets.
fn binned(atoms: &[(f64, Rational64)], step: f64) -> Vec<(usize, f64)> {
    let mut out: Vec<(usize, f64)> = Vec::new();
    for &(lp, delta) in atoms {
        let b = (delta.to_f64().expect("finite") / step).round() as usize;
        match out.iter_mut().find(|e| e.0 == b) {
            Some(e) => e.1 = ln_add(e.1, lp),
            None => out.push((b, lp)),
        }
    }
    out.sort_by_key(|e| e.0);
    out
}

/// alpha^w restricted to bins <= max_bin. Partial powers are pruned to the
/// window that can still end below max_bin.
fn chain_power(atoms: &[(usize, f64)], w: usize, max_bin: usize) -> Vec<f64> {
    let min_shift = atoms[0].0;
    let mut cur = vec![0.0];
    for k in 1..=w {
        let reserve = min_shift * (w - k);
        if reserve > max_bin {
            return Vec::new();
        }
        cur = shift_add(&cur, atoms, max_bin - reserve);
        if cur.is_empty() {
            return cur;
        }
    }
    cur
}

/// Spectrum of a bit-level mapping (BICM, BPCM, ASCM):
/// A(λ) = Σ_{w>=1} Ψ_w alpha_{n,w}(λ)^w, truncated at `max_delta`.
pub fn bicm_family_seds(
    bit_spectrum: &LogPoly,
    table: &GroupMgfTable,
    n: usize,
    model: PairModel,
    step: f64,
    max_delta: f64,
) -> Result<SpectrumPoly> {
    let mut out = SpectrumPoly::empty(step, max_delta);
    let max_bin = out.max_bin;
    let terms: Vec<usize> = (1..=bit_spectrum.degree().unwrap_or(0).min(n))
        .filter(|&w| bit_spectrum.get(w) > NEG_INF)
        .collect();
    let alphas: Vec<Vec<(usize, f64)>> = terms
        .iter()
        .map(|&w| Ok(binned(&alpha_nd(table, n, w, model)?, step)))
        .collect::<Result<_>>()?;
    let live: Vec<usize> = (0..terms.len())
        .filter(|&i| alphas[i][0].0 * terms[i] <= max_bin)
        .collect();
    const CHUNK: usize = 32;
    for chunk in live.chunks(CHUNK) {
        let powers: Vec<Vec<f64>> = chunk
            .par_iter()
            .map(|&i| chain_power(&alphas[i], terms[i], max_bin))
            .collect();
        for (&i, g) in chunk.iter().zip(&powers) {
            let c = bit_spectrum.get(terms[i]);
            if out.bins.len() < g.len() {
                out.bins.resize(g.len(), NEG_INF);
            }
            for (a, b) in out.bins.iter_mut().zip(g) {
                *a = ln_add(*a, b + c);
            }
        }
    }
    out.trim();
    Ok(out)
}

/// MGF of the number of nonzero signals among the m/p signals of a
/// uniformly random nonzero symbol: ((1+(M-1)s)^{m/p} - 1)/(q-1).
pub fn theta_mgf(m: u32, p: u32) -> Result<LogPoly> {
    if p == 0 || m % p != 0 {
        return Err(Error::IncompatibleMapping {
            scheme: "SICM",
            m,
            p,
            why: "p must divide m".into(),
        });
    }
    let k = m / p;
    let big_m = f64::from(1u32 << p);
    let ln_q1 = (2f64.powi(m as i32) - 1.0).ln();
    let mut c = vec![NEG_INF];
    c.extend((1..=k).map(|j| ln_binomial(f64::from(k), f64::from(j)) + f64::from(j) * (big_m - 1.0).ln() - ln_q1));
    Ok(LogPoly::from_log(c))
}

/// Per-symbol distance MGF of SICM, θ(alpha(λ)), on a grid.
pub fn sicm_symbol_mgf(m: u32, p: u32, step: f64, max_delta: f64) -> Result<SpectrumPoly> {
    let theta = theta_mgf(m, p)?;
    let atoms: Vec<(f64, f64)> = sicm_uniform_mgf(p)?
        .iter()
        .map(|a| (a.prob.to_f64().expect("finite").ln(), a.delta.to_f64().expect("finite")))
        .collect();
    let alpha = SpectrumPoly::from_atoms(step, max_delta, &atoms);
    Ok(compose(&theta, &alpha))
}

/// Spectrum of SICM: A(λ) = Σ_{w>=1} F_{N,w} θ(alpha(λ))^w.
pub fn sicm_seds(symbol_spectrum: &LogPoly, m: u32, p: u32, step: f64, max_delta: f64) -> Result<SpectrumPoly> {
    let beta = sicm_symbol_mgf(m, p, step, max_delta)?;
    let mut coeffs = symbol_spectrum.coeffs().to_vec();
    if let Some(c) = coeffs.first_mut() {
        *c = NEG_INF;
    }
    Ok(compose_with(&coeffs, &beta))
}

fn fmt_ratio(r: Rational64) -> String {
    if r.is_zero() {
        "0".into()
    } else if *r.denom() == 1 {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Appendix-style rendering: one line per label distance with the
/// probabilities and distances of its first `cols` atoms.
pub fn format_table(table: &GroupMgfTable, cols: Option<usize>, exact: bool) -> String {
    let mut s = String::new();
    for (tau, row) in table.rows().iter().enumerate() {
        let atoms = &row[..cols.map_or(row.len(), |c| c.min(row.len()))];
        let probs: Vec<String> = atoms
            .iter()
            .map(|a| {
                if exact {
                    fmt_ratio(a.prob)
                } else {
                    format!("{:.3}", a.prob.to_f64().unwrap_or(0.0))
                }
            })
            .collect();
        let dists: Vec<String> = atoms.iter().map(|a| fmt_ratio(a.delta)).collect();
        s.push_str(&format!("{:>3} | {} | {}\n", tau + 1, probs.join(" "), dists.join(" ")));
    }
    s
}

/// Renders the d_H(d_E^2) matrix of 2^p-PAM in increasing amplitude.
pub fn format_pair_table(p: u32) -> String {
    let table = pair_table(p);
    let points = crate::pam_map::constellation(p);
    let labels: Vec<u32> = points
        .iter()
        .map(|&x| crate::pam_map::point_to_label(p, x).expect("constellation point"))
        .collect();
    let name = |l: u32| -> String { (0..p).map(|i| if l >> i & 1 == 1 { '1' } else { '0' }).collect() };
    let mut s = String::new();
    let head: Vec<String> = labels.iter().zip(&points).map(|(&l, x)| format!("{}({x})", name(l))).collect();
    s.push_str(&format!("{:>10} {}\n", "", head.iter().map(|h| format!("{h:>10}")).collect::<String>()));
    for (i, &a) in labels.iter().enumerate() {
        s.push_str(&format!("{:>10} ", head[i]));
        for &b in &labels {
            let (dh, de) = table[a as usize][b as usize];
            s.push_str(&format!("{:>10}", format!("{dh}({de})")));
        }
        s.push('\n');
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(a: i64, b: i64) -> Rational64 {
        Rational64::new(a, b)
    }

    fn atoms(row: &[SedAtom]) -> Vec<(Rational64, Rational64)> {
        row.iter().map(|a| (a.prob, a.delta)).collect()
    }

    fn scheme(kind: MappingKind, m: u32, p: u32) -> MappingScheme {
        MappingScheme::new(kind, m, p).unwrap()
    }

    #[test]
    fn four_pam_single_signal() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        assert_eq!(atoms(t.row(1)), vec![(r(3, 4), r(4, 1)), (r(1, 4), r(36, 1))]);
        assert_eq!(atoms(t.row(2)), vec![(r(1, 1), r(8, 1))]);
    }

    #[test]
    fn eight_pam_single_signal() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 3, 3)).unwrap();
        assert_eq!(
            atoms(t.row(1)),
            vec![(r(7, 12), r(4, 1)), (r(1, 4), r(36, 1)), (r(1, 12), r(100, 1)), (r(1, 12), r(196, 1))]
        );
        assert_eq!(
            atoms(t.row(2)),
            vec![(r(1, 2), r(8, 1)), (r(1, 3), r(32, 1)), (r(1, 6), r(72, 1))]
        );
        assert_eq!(atoms(t.row(3)), vec![(r(1, 2), r(12, 1)), (r(1, 2), r(100, 3))]);
    }

    #[test]
    fn rows_are_distributions() {
        for (kind, m, p) in [
            (MappingKind::Sicm, 4, 2),
            (MappingKind::Sicm, 6, 3),
            (MappingKind::Bpcm, 4, 3),
            (MappingKind::Bicm, 4, 4),
        ] {
            let t = group_sed_mgf(&scheme(kind, m, p)).unwrap();
            for row in t.rows() {
                assert_eq!(row.iter().map(|a| a.prob).sum::<Rational64>(), r(1, 1));
                assert!(row.iter().all(|a| a.delta > r(0, 1)));
            }
        }
    }

    #[test]
    fn bpcm_and_ascm_tables_coincide() {
        let a = group_sed_mgf(&scheme(MappingKind::Bpcm, 4, 3)).unwrap();
        let b = group_sed_mgf(&scheme(MappingKind::Ascm, 4, 3)).unwrap();
        assert_eq!(a.group_bits(), 12);
        assert_eq!(a, b);
    }

    #[test]
    fn pair_cap_is_enforced() {
        let s = scheme(MappingKind::Bpcm, 4, 3);
        assert!(matches!(
            group_sed_mgf_with_cap(&s, 1000),
            Err(Error::EnumerationTooLarge { .. })
        ));
        assert!(group_sed_mgf(&scheme(MappingKind::Bpcm, 7, 4)).is_err());
    }

    #[test]
    fn uniform_mgfs() {
        let four: Vec<_> = sicm_uniform_mgf(2).unwrap().iter().map(|a| (a.prob, a.delta)).collect();
        assert_eq!(four, vec![(r(3, 6), r(4, 1)), (r(2, 6), r(8, 1)), (r(1, 6), r(36, 1))]);
        let eight = sicm_uniform_mgf(3).unwrap();
        assert_eq!(eight.iter().map(|a| a.prob).sum::<Rational64>(), r(1, 1));
        assert_eq!(eight.last().unwrap().delta, r(196, 1));
        assert_eq!(eight.len(), 9);
    }

    #[test]
    fn alpha_concentrates_when_all_bits_differ() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 3, 3)).unwrap();
        let a = alpha_nd(&t, 3, 3, PairModel::Hypergeometric).unwrap();
        let want: Vec<_> = t.row(3).iter().map(|x| x.delta).collect();
        assert_eq!(a.iter().map(|x| x.1).collect::<Vec<_>>(), want);
        assert!(a.iter().all(|x| (x.0.exp() - 0.5).abs() < 1e-12));
    }

    #[test]
    fn alpha_mixture_weights() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        let (n, d) = (100, 7);
        let x = d as f64 / n as f64;
        let p1 = 2.0 * x * (1.0 - x);
        let p2 = x * x;
        let (p1, p2) = (p1 / (p1 + p2), p2 / (p1 + p2));
        let a = alpha_nd(&t, n, d, PairModel::Binomial).unwrap();
        let got: Vec<f64> = a.iter().map(|x| x.0.exp()).collect();
        for (g, w) in got.iter().zip([0.75 * p1, p2, 0.25 * p1]) {
            assert!((g - w).abs() < 1e-12);
        }
    }

    #[test]
    fn pair_models_agree_for_long_codes() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        let a = alpha_nd(&t, 2000, 20, PairModel::Binomial).unwrap();
        let b = alpha_nd(&t, 2000, 20, PairModel::Hypergeometric).unwrap();
        let tv: f64 = a.iter().zip(&b).map(|(x, y)| (x.0.exp() - y.0.exp()).abs()).sum::<f64>() / 2.0;
        assert!(tv < 1e-3, "tv={tv}");
    }

    #[test]
    fn theta_properties() {
        for (m, p) in [(4, 2), (6, 2), (6, 3), (8, 4), (4, 4)] {
            assert!(theta_mgf(m, p).unwrap().ln_total().abs() < 1e-12);
        }
        assert_eq!(theta_mgf(3, 3).unwrap(), LogPoly::from_log(vec![NEG_INF, 0.0]));
        assert!(theta_mgf(4, 3).is_err());
    }

    #[test]
    fn single_pair_spectrum_is_alpha() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        let psi = LogPoly::from_log(vec![NEG_INF, 0.0]);
        let a = bicm_family_seds(&psi, &t, 10, PairModel::Binomial, 0.05, 100.0).unwrap();
        let alpha = alpha_nd(&t, 10, 1, PairModel::Binomial).unwrap();
        let got: Vec<(f64, f64)> = a.iter().collect();
        assert_eq!(got.len(), alpha.len());
        for ((d, v), (lp, delta)) in got.iter().zip(&alpha) {
            assert!((d - delta.to_f64().unwrap()).abs() < 1e-9);
            assert!((v - lp).abs() < 1e-12);
        }
    }

    #[test]
    fn two_draws_match_enumeration() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 3, 3)).unwrap();
        let psi = LogPoly::from_log(vec![NEG_INF, NEG_INF, 0.0]);
        let step = 1.0 / 3.0;
        let a = bicm_family_seds(&psi, &t, 12, PairModel::Binomial, step, 500.0).unwrap();
        let alpha = alpha_nd(&t, 12, 2, PairModel::Binomial).unwrap();
        let mut want = std::collections::BTreeMap::new();
        for (p1, d1) in &alpha {
            for (p2, d2) in &alpha {
                let e = want.entry(*d1 + *d2).or_insert(0.0);
                *e += (p1 + p2).exp();
            }
        }
        let got: Vec<(f64, f64)> = a.iter().collect();
        assert_eq!(got.len(), want.len());
        for ((d, v), (wd, wp)) in got.iter().zip(&want) {
            assert!((d - wd.to_f64().unwrap()).abs() < 1e-9);
            assert!((v.exp() - wp).abs() < 1e-12);
        }
    }

    #[test]
    fn mass_is_conserved() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        let psi = LogPoly::from_counts(&[1.0, 3.0, 10.0, 2.0, 0.5]);
        let a = bicm_family_seds(&psi, &t, 16, PairModel::Binomial, 0.05, 1000.0).unwrap();
        let want = (3.0f64 + 10.0 + 2.0 + 0.5).ln();
        assert!((a.ln_total() - want).abs() < 1e-9);
        let s = sicm_seds(&psi, 4, 2, 0.05, 1000.0).unwrap();
        assert!((s.ln_total() - want).abs() < 1e-9);
    }

    #[test]
    fn sicm_single_signal_symbols_substitute_alpha() {
        let f = LogPoly::from_counts(&[1.0, 0.0, 1.0]);
        let s = sicm_seds(&f, 2, 2, 0.5, 200.0).unwrap();
        // alpha^2 for the 4-PAM uniform MGF (3λ^4 + 2λ^8 + λ^36)/6
        let want = [(8.0, 9.0), (12.0, 12.0), (16.0, 4.0), (40.0, 6.0), (44.0, 4.0), (72.0, 1.0)];
        let got: Vec<(f64, f64)> = s.iter().collect();
        assert_eq!(got.len(), want.len());
        for ((d, v), (wd, wc)) in got.iter().zip(want) {
            assert!((d - wd).abs() < 1e-9 && (v.exp() - wc / 36.0).abs() < 1e-12);
        }
    }

    #[test]
    fn truncation_drops_far_mass() {
        let s = SpectrumPoly::from_atoms(0.05, 10.0, &[(0.0, 4.0), (0.0, 36.0)]);
        assert_eq!(s.iter().count(), 1);
        assert_eq!(s.bin_of(4.0), 80);
        let c = s.convolve(&s);
        assert_eq!(c.iter().collect::<Vec<_>>(), vec![(8.0, 0.0)]);
    }

    #[test]
    fn table_rendering() {
        let t = group_sed_mgf(&scheme(MappingKind::Bicm, 4, 2)).unwrap();
        let text = format_table(&t, None, true);
        assert_eq!(text, "  1 | 3/4 1/4 | 4 36\n  2 | 1 | 8\n");
        let pairs = format_pair_table(2);
        assert!(pairs.contains("00(-3)") && pairs.contains("1(36)"));
    }
}
