//! Gray-labeled 2^p-PAM and the four ways of placing code bits on signals.
//!
//! Every signal carries p bit planes: plane 0 is the sign bit s and planes
//! 1..p are the amplitude bits a_1..a_{p-1}. The transmitted point is
//! `(2s - 1) * A(a_1 .. a_{p-1})` where `A` is the Gray amplitude table
//! below. A *label* packs the planes into an integer, plane l at bit l.
//!
//! Placement of codeword bit `j*m + i` (bit i of symbol j):
//!
//! * BICM: consecutive groups of p bits form one signal, the first bit of
//!   each group being the sign.
//! * SICM (p | m): the m bits of a symbol occupy m/p whole signals, in the
//!   same order as BICM. The schemes differ only at the demapper.
//! * BPCM: a block of p symbols feeds m signals. Symbol s of the block
//!   fills plane s of all m signals, bit i going to signal i.
//! * ASCM (m = a(p-1)): a block of p symbols feeds m signals. The first
//!   symbol gives the m sign bits; amplitude symbol s (1 <= s < p) fills the
//!   amplitude planes of signals (s-1)a .. sa, p-1 bits per signal in plane
//!   order.

use crate::error::{Error, Result};

/// Amplitude bit strings (a_1 a_2 ...) for amplitudes 1, 3, 5, ...
const GRAY_4: [&str; 2] = ["1", "0"];
const GRAY_8: [&str; 4] = ["10", "11", "01", "00"];
const GRAY_16: [&str; 8] = ["110", "111", "101", "100", "000", "001", "011", "010"];

fn gray_rows(p: u32) -> Result<&'static [&'static str]> {
    match p {
        1 => Ok(&[""]),
        2 => Ok(&GRAY_4),
        3 => Ok(&GRAY_8),
        4 => Ok(&GRAY_16),
        _ => Err(Error::UnsupportedPam(p)),
    }
}

/// Amplitude bits packed with a_1 at bit 0.
fn pack(row: &str) -> u32 {
    row.bytes().enumerate().fold(0, |acc, (i, c)| acc | u32::from(c == b'1') << i)
}

/// Odd amplitude for the given amplitude bits (a_1 at bit 0).
pub fn gray_amplitude(p: u32, amp_bits: u32) -> Result<u32> {
    let rows = gray_rows(p)?;
    rows.iter()
        .position(|r| pack(r) == amp_bits)
        .map(|i| 2 * i as u32 + 1)
        .ok_or(Error::UnsupportedPam(p))
}

/// Amplitude bits (a_1 at bit 0) of an odd amplitude.
pub fn gray_bits(p: u32, amplitude: u32) -> Result<u32> {
    let rows = gray_rows(p)?;
    if amplitude % 2 == 0 || amplitude as usize > 2 * rows.len() {
        return Err(Error::NotInConstellation(amplitude as i32));
    }
    Ok(pack(rows[(amplitude as usize - 1) / 2]))
}

/// One PAM point, an odd integer with |value| < 2^p.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct PamSignal(i32);

impl PamSignal {
    pub fn new(value: i32, p: u32) -> Result<Self> {
        gray_rows(p)?;
        if value % 2 == 0 || value.unsigned_abs() >= 1 << p {
            return Err(Error::NotInConstellation(value));
        }
        Ok(PamSignal(value))
    }

    pub fn value(self) -> i32 {
        self.0
    }
}

/// Point for sign bit `s` and amplitude bits (a_1 at bit 0).
pub fn signal_value(p: u32, s: u8, amp_bits: u32) -> Result<PamSignal> {
    let a = gray_amplitude(p, amp_bits)? as i32;
    Ok(PamSignal(if s & 1 == 1 { a } else { -a }))
}

/// Point carrying `label` (plane l at bit l).
pub fn label_to_point(p: u32, label: u32) -> i32 {
    signal_value(p, (label & 1) as u8, label >> 1)
        .expect("every label of a supported order is valid")
        .0
}

/// Label of a point; errors if it is not in the constellation.
pub fn point_to_label(p: u32, value: i32) -> Result<u32> {
    PamSignal::new(value, p)?;
    let amp = gray_bits(p, value.unsigned_abs())?;
    Ok(u32::from(value > 0) | amp << 1)
}

/// All 2^p points in increasing order.
pub fn constellation(p: u32) -> Vec<i32> {
    let m = 1i32 << p;
    (0..m).map(|i| 2 * i - m + 1).collect()
}

/// Average energy (M^2 - 1) / 3 of the uniform constellation.
pub fn average_energy(p: u32) -> f64 {
    let m = f64::from(1u32 << p);
    (m * m - 1.0) / 3.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MappingKind {
    Bicm,
    Sicm,
    Bpcm,
    Ascm,
}

impl MappingKind {
    pub const ALL: [MappingKind; 4] = [MappingKind::Bicm, MappingKind::Sicm, MappingKind::Bpcm, MappingKind::Ascm];

    pub fn name(self) -> &'static str {
        match self {
            MappingKind::Bicm => "bicm",
            MappingKind::Sicm => "sicm",
            MappingKind::Bpcm => "bpcm",
            MappingKind::Ascm => "ascm",
        }
    }
}

impl std::str::FromStr for MappingKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "bicm" => Ok(MappingKind::Bicm),
            "sicm" => Ok(MappingKind::Sicm),
            "bpcm" => Ok(MappingKind::Bpcm),
            "ascm" => Ok(MappingKind::Ascm),
            _ => Err(Error::Config(format!("unknown mapping `{s}`"))),
        }
    }
}

impl std::fmt::Display for MappingKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

/// A mapping of m-bit code symbols onto 2^p-PAM signals.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize, serde::Deserialize)]
pub struct MappingScheme {
    pub kind: MappingKind,
    pub m: u32,
    pub p: u32,
}

fn gcd(a: usize, b: usize) -> usize {
    if b == 0 {
        a
    } else {
        gcd(b, a % b)
    }
}

impl MappingScheme {
    pub fn new(kind: MappingKind, m: u32, p: u32) -> Result<Self> {
        gray_rows(p)?;
        if !(1..=8).contains(&m) {
            return Err(Error::DegreeOutOfRange(m));
        }
        let bad = |why: &str| {
            Err(Error::IncompatibleMapping {
                scheme: kind.name(),
                m,
                p,
                why: why.into(),
            })
        };
        match kind {
            MappingKind::Bicm | MappingKind::Bpcm => {}
            MappingKind::Sicm if m % p != 0 => return bad("p must divide m"),
            MappingKind::Ascm if p < 2 || m % (p - 1) != 0 => return bad("p - 1 must divide m"),
            _ => {}
        }
        Ok(Self { kind, m, p })
    }

    /// PAM order M = 2^p.
    pub fn pam_order(&self) -> u32 {
        1 << self.p
    }

    /// Number of code bits in one self-contained block of the placement.
    pub fn block_bits(&self) -> usize {
        let (m, p) = (self.m as usize, self.p as usize);
        match self.kind {
            MappingKind::Bicm => m * p / gcd(m, p),
            MappingKind::Sicm => m,
            MappingKind::Bpcm | MappingKind::Ascm => m * p,
        }
    }

    /// Checks that an n-bit codeword splits into whole blocks.
    pub fn check_length(&self, n_bits: usize) -> Result<()> {
        if n_bits % self.block_bits() != 0 {
            return Err(Error::IncompatibleMapping {
                scheme: self.kind.name(),
                m: self.m,
                p: self.p,
                why: format!("{n_bits} bits is not a multiple of the {}-bit block", self.block_bits()),
            });
        }
        Ok(())
    }

    /// (signal index, plane) of codeword bit k.
    pub fn place(&self, k: usize) -> (usize, u32) {
        let (m, p) = (self.m as usize, self.p as usize);
        match self.kind {
            MappingKind::Bicm | MappingKind::Sicm => (k / p, (k % p) as u32),
            MappingKind::Bpcm => {
                let (block, r) = (k / (m * p), k % (m * p));
                let (s, i) = (r / m, r % m);
                (block * m + i, s as u32)
            }
            MappingKind::Ascm => {
                let (block, r) = (k / (m * p), k % (m * p));
                let (s, i) = (r / m, r % m);
                if s == 0 {
                    (block * m + i, 0)
                } else {
                    let a = m / (p - 1);
                    (block * m + (s - 1) * a + i / (p - 1), (1 + i % (p - 1)) as u32)
                }
            }
        }
    }

    /// Placement of every bit of an n-bit codeword.
    pub fn placement(&self, n_bits: usize) -> Result<Vec<(usize, u32)>> {
        self.check_length(n_bits)?;
        Ok((0..n_bits).map(|k| self.place(k)).collect())
    }

    /// Maps codeword bits to PAM signals.
    pub fn map(&self, bits: &[u8]) -> Result<Vec<PamSignal>> {
        self.check_length(bits.len())?;
        let mut labels = vec![0u32; bits.len() / self.p as usize];
        for (k, &b) in bits.iter().enumerate() {
            let (sig, plane) = self.place(k);
            labels[sig] |= u32::from(b & 1) << plane;
        }
        Ok(labels.into_iter().map(|l| PamSignal(label_to_point(self.p, l))).collect())
    }

    /// Hard inverse of [`MappingScheme::map`].
    pub fn demap_hard(&self, signals: &[i32]) -> Result<Vec<u8>> {
        let labels = signals
            .iter()
            .map(|&v| point_to_label(self.p, v))
            .collect::<Result<Vec<_>>>()?;
        let n = labels.len() * self.p as usize;
        self.check_length(n)?;
        Ok((0..n)
            .map(|k| {
                let (sig, plane) = self.place(k);
                ((labels[sig] >> plane) & 1) as u8
            })
            .collect())
    }
}

/// Where every codeword bit goes: a mapping scheme optionally preceded by
/// a bit permutation (the interleaver of BICM).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Layout {
    scheme: MappingScheme,
    /// (signal, plane) of codeword bit k.
    places: Vec<(usize, u32)>,
    n_signals: usize,
}

impl Layout {
    pub fn new(scheme: MappingScheme, n_bits: usize) -> Result<Self> {
        let places = scheme.placement(n_bits)?;
        Ok(Self {
            scheme,
            places,
            n_signals: n_bits / scheme.p as usize,
        })
    }

    /// Codeword bit k is mapped as if it were bit `perm[k]`.
    pub fn permuted(scheme: MappingScheme, perm: &[usize]) -> Result<Self> {
        let n = perm.len();
        let mut seen = vec![false; n];
        for &t in perm {
            if t >= n || std::mem::replace(&mut seen[t], true) {
                return Err(Error::Config("bit interleaver is not a permutation".into()));
            }
        }
        let base = scheme.placement(n)?;
        Ok(Self {
            scheme,
            places: perm.iter().map(|&t| base[t]).collect(),
            n_signals: n / scheme.p as usize,
        })
    }

    /// Uniformly random bit interleaver drawn from `seed`.
    pub fn interleaved(scheme: MappingScheme, n_bits: usize, seed: u64) -> Result<Self> {
        use rand::seq::SliceRandom;
        use rand::SeedableRng;
        let mut perm: Vec<usize> = (0..n_bits).collect();
        perm.shuffle(&mut rand_chacha::ChaCha8Rng::seed_from_u64(seed));
        Self::permuted(scheme, &perm)
    }

    pub fn scheme(&self) -> MappingScheme {
        self.scheme
    }

    pub fn n_bits(&self) -> usize {
        self.places.len()
    }

    pub fn n_signals(&self) -> usize {
        self.n_signals
    }

    pub fn place(&self, k: usize) -> (usize, u32) {
        self.places[k]
    }

    pub fn map(&self, bits: &[u8]) -> Result<Vec<PamSignal>> {
        if bits.len() != self.n_bits() {
            return Err(Error::LengthMismatch {
                expected: self.n_bits(),
                got: bits.len(),
            });
        }
        let p = self.scheme.p;
        let mut labels = vec![0u32; self.n_signals];
        for (&(sig, plane), &b) in self.places.iter().zip(bits) {
            labels[sig] |= u32::from(b & 1) << plane;
        }
        Ok(labels.into_iter().map(|l| PamSignal(label_to_point(p, l))).collect())
    }

    pub fn demap_hard(&self, signals: &[i32]) -> Result<Vec<u8>> {
        if signals.len() != self.n_signals {
            return Err(Error::LengthMismatch {
                expected: self.n_signals,
                got: signals.len(),
            });
        }
        let labels = signals
            .iter()
            .map(|&v| point_to_label(self.scheme.p, v))
            .collect::<Result<Vec<_>>>()?;
        Ok(self
            .places
            .iter()
            .map(|&(sig, plane)| ((labels[sig] >> plane) & 1) as u8)
            .collect())
    }
}
