//! Arithmetic in GF(2^m) for 1 <= m <= 8.
//!
//! Elements are stored as `u8` bit vectors in the polynomial basis: bit `i`
//! is the coefficient of alpha^i, so bit 0 (least significant) is the alpha^0
//! coefficient. This convention is used everywhere a symbol is turned into
//! bits (binary images, modulation, demapping).

use crate::error::{Error, Result};

/// Default primitive polynomials, indexed by `m`. Each entry is the
/// lexicographically smallest primitive polynomial of that degree,
/// written as a bitmask including the leading term.
///
/// | m | polynomial |
/// |---|------------|
/// | 1 | x + 1 |
/// | 2 | x^2 + x + 1 |
/// | 3 | x^3 + x + 1 |
/// | 4 | x^4 + x + 1 |
/// | 5 | x^5 + x^2 + 1 |
/// | 6 | x^6 + x + 1 |
/// | 7 | x^7 + x + 1 |
/// | 8 | x^8 + x^4 + x^3 + x^2 + 1 |
pub const DEFAULT_PRIMITIVE_POLYS: [u32; 9] = [0, 0x3, 0x7, 0xB, 0x13, 0x25, 0x43, 0x83, 0x11D];

/// Log/antilog tables of GF(2^m).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FieldTables {
    m: u32,
    poly: u32,
    /// alpha^i for i in 0..2(q-1), doubled so products skip the modulo.
    exp: Vec<u8>,
    /// log[v] for v != 0; log[0] is unused.
    log: Vec<u16>,
}

impl FieldTables {
    /// Field built from the default primitive polynomial for `m`.
    pub fn new(m: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::DegreeOutOfRange(m));
        }
        Self::with_poly(m, DEFAULT_PRIMITIVE_POLYS[m as usize])
    }

    /// Field built from a caller-supplied primitive polynomial (bitmask with
    /// the x^m term set).
    pub fn with_poly(m: u32, poly: u32) -> Result<Self> {
        if !(1..=8).contains(&m) {
            return Err(Error::DegreeOutOfRange(m));
        }
        if poly >> m != 1 {
            return Err(Error::NotPrimitive { m, poly });
        }
        let q = 1usize << m;
        let order = q - 1;
        let mut exp = vec![0u8; 2 * order];
        let mut log = vec![0u16; q];
        let mut seen = vec![false; q];
        let mut x: u32 = 1;
        for i in 0..order {
            if seen[x as usize] || x == 0 {
                return Err(Error::NotPrimitive { m, poly });
            }
            seen[x as usize] = true;
            exp[i] = x as u8;
            log[x as usize] = i as u16;
            x <<= 1;
            if x & (1 << m) != 0 {
                x ^= poly;
            }
        }
        // The cycle must close exactly after q - 1 steps.
        if x != 1 {
            return Err(Error::NotPrimitive { m, poly });
        }
        for i in order..2 * order {
            exp[i] = exp[i - order];
        }
        Ok(Self { m, poly, exp, log })
    }

    pub fn m(&self) -> u32 {
        self.m
    }

    /// Field size q = 2^m.
    pub fn q(&self) -> usize {
        1 << self.m
    }

    /// Multiplicative order q - 1.
    pub fn order(&self) -> usize {
        self.q() - 1
    }

    pub fn primitive_poly(&self) -> u32 {
        self.poly
    }

    /// alpha^0, alpha^1, ..., alpha^(q-2).
    pub fn exp_table(&self) -> &[u8] {
        &self.exp[..self.order()]
    }

    pub fn contains(&self, a: u32) -> bool {
        (a as usize) < self.q()
    }

    /// alpha^k for any integer exponent.
    pub fn alpha_pow(&self, k: i64) -> u8 {
        let o = self.order() as i64;
        self.exp[k.rem_euclid(o) as usize]
    }

    /// Discrete logarithm; `None` for zero.
    pub fn log(&self, a: u8) -> Option<u32> {
        (a != 0).then(|| u32::from(self.log[a as usize]))
    }

    #[inline]
    pub fn add(&self, a: u8, b: u8) -> u8 {
        a ^ b
    }

    #[inline]
    pub fn mul(&self, a: u8, b: u8) -> u8 {
        if a == 0 || b == 0 {
            0
        } else {
            self.exp[self.log[a as usize] as usize + self.log[b as usize] as usize]
        }
    }

    pub fn inv(&self, a: u8) -> Result<u8> {
        if a == 0 {
            return Err(Error::InverseOfZero);
        }
        let o = self.order();
        Ok(self.exp[(o - self.log[a as usize] as usize) % o])
    }

    pub fn div(&self, a: u8, b: u8) -> Result<u8> {
        Ok(self.mul(a, self.inv(b)?))
    }

    pub fn pow(&self, a: u8, e: u64) -> u8 {
        if e == 0 {
            return 1;
        }
        if a == 0 {
            return 0;
        }
        let o = self.order() as u64;
        let k = (u64::from(self.log[a as usize]) * (e % o)) % o;
        self.exp[k as usize]
    }

    /// Bits of `v`, least significant (alpha^0 coefficient) first.
    pub fn bits(&self, v: u8) -> Vec<u8> {
        (0..self.m).map(|i| (v >> i) & 1).collect()
    }

    /// Binary m x m matrix of multiplication by `beta`.
    pub fn companion(&self, beta: u8) -> Result<CompanionMatrix> {
        if beta == 0 {
            return Err(Error::CompanionOfZero);
        }
        if !self.contains(u32::from(beta)) {
            return Err(Error::NotInField(u32::from(beta)));
        }
        // Column j is the image of alpha^j, i.e. beta * alpha^j.
        let mut rows = vec![0u8; self.m as usize];
        for j in 0..self.m {
            let col = self.mul(beta, 1 << j);
            for (i, row) in rows.iter_mut().enumerate() {
                if (col >> i) & 1 == 1 {
                    *row |= 1 << j;
                }
            }
        }
        Ok(CompanionMatrix { m: self.m, rows })
    }
}

/// Binary m x m matrix stored as row bitmasks: bit `j` of `rows[i]` is entry
/// (i, j).
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct CompanionMatrix {
    m: u32,
    rows: Vec<u8>,
}

impl CompanionMatrix {
    pub fn identity(m: u32) -> Self {
        Self {
            m,
            rows: (0..m).map(|i| 1u8 << i).collect(),
        }
    }

    pub fn dim(&self) -> u32 {
        self.m
    }

    pub fn rows(&self) -> &[u8] {
        &self.rows
    }

    pub fn get(&self, i: usize, j: usize) -> bool {
        (self.rows[i] >> j) & 1 == 1
    }

    /// Matrix-vector product over GF(2) with the bit image of `v`.
    pub fn apply(&self, v: u8) -> u8 {
        self.rows
            .iter()
            .enumerate()
            .fold(0u8, |acc, (i, r)| acc | (((r & v).count_ones() as u8) & 1) << i)
    }

    /// Matrix product `self * other` over GF(2).
    pub fn mul(&self, other: &CompanionMatrix) -> CompanionMatrix {
        // Row i of the product is the combination of rows of `other`
        // selected by row i of `self`.
        let rows = self
            .rows
            .iter()
            .map(|&r| {
                (0..self.m as usize)
                    .filter(|&k| (r >> k) & 1 == 1)
                    .fold(0u8, |acc, k| acc ^ other.rows[k])
            })
            .collect();
        CompanionMatrix { m: self.m, rows }
    }

    /// Rank over GF(2).
    pub fn rank(&self) -> usize {
        let mut rows = self.rows.clone();
        let mut rank = 0;
        for col in 0..self.m {
            let bit = 1u8 << col;
            if let Some(p) = (rank..rows.len()).find(|&i| rows[i] & bit != 0) {
                rows.swap(rank, p);
                for i in 0..rows.len() {
                    if i != rank && rows[i] & bit != 0 {
                        rows[i] ^= rows[rank];
                    }
                }
                rank += 1;
            }
        }
        rank
    }
}
