//! Quasi-cyclic nonbinary LDPC codes.
//!
//! A code is given by a (c-b) x c polynomial parity-check matrix whose
//! entries are either absent or monomials `coeff * D^shift`. Lifting with
//! factor L replaces `D^w` by the w-th power of the L x L cyclic
//! permutation matrix; the block for `coeff * D^w` has `coeff` at
//! (t, (t + w) mod L) for every row t. Symbol `j*L + t` of a codeword is
//! position t of block column j.
//!
//! # Code-definition files
//!
//! ```text
//! # comment lines start with '#'
//! m c b L [nu]
//! <c-b rows of c degrees, -1 = absent>
//!
//! <c-b rows of c coefficients: -1, 1, a, or a^k>
//! ```
//!
//! Degrees are reduced mod L. When `nu` is given every degree must be at
//! most `nu`. Blank lines and comments may appear anywhere.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::galois::FieldTables;

/// One nonzero entry of the polynomial parity-check matrix.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Monomial {
    pub shift: u32,
    pub coeff: u8,
}

/// Degree and coefficient matrices of a QC code together with its lifting
/// factor.
#[derive(Debug, Clone, PartialEq)]
pub struct PolynomialParityCheck {
    field: FieldTables,
    rows: usize,
    cols: usize,
    lifting: usize,
    max_degree: Option<u32>,
    /// Row-major, `None` where the base matrix is zero.
    entries: Vec<Option<Monomial>>,
}

impl PolynomialParityCheck {
    /// Builds a code from degree rows (-1 = absent) and coefficient rows
    /// (`None` = absent).
    pub fn new(
        field: FieldTables,
        lifting: usize,
        degrees: &[Vec<i64>],
        coeffs: &[Vec<Option<u8>>],
    ) -> Result<Self> {
        if lifting == 0 {
            return Err(Error::InvalidCode("lifting factor must be at least 1".into()));
        }
        let rows = degrees.len();
        if rows == 0 || coeffs.len() != rows {
            return Err(Error::InvalidCode(format!(
                "degree matrix has {rows} rows, coefficient matrix {}",
                coeffs.len()
            )));
        }
        let cols = degrees[0].len();
        let mut entries = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            if degrees[i].len() != cols || coeffs[i].len() != cols {
                return Err(Error::InvalidCode(format!("row {i} has the wrong length")));
            }
            for j in 0..cols {
                entries.push(match (degrees[i][j], coeffs[i][j]) {
                    (-1, None) => None,
                    (d, Some(c)) if d >= 0 => {
                        if c == 0 || !field.contains(u32::from(c)) {
                            return Err(Error::InvalidCode(format!(
                                "coefficient {c} at ({i},{j}) is not a nonzero field element"
                            )));
                        }
                        Some(Monomial {
                            shift: (d as u64 % lifting as u64) as u32,
                            coeff: c,
                        })
                    }
                    (d, c) => {
                        return Err(Error::InvalidCode(format!(
                            "degree {d} and coefficient {c:?} disagree at ({i},{j})"
                        )))
                    }
                });
            }
        }
        if rows >= cols {
            return Err(Error::InvalidCode(format!(
                "{rows} check rows leave no information columns out of {cols}"
            )));
        }
        if entries.iter().all(Option::is_none) {
            return Err(Error::InvalidCode("base matrix is all zero".into()));
        }
        Ok(Self {
            field,
            rows,
            cols,
            lifting,
            max_degree: None,
            entries,
        })
    }

    /// Parses the code-definition format described in the module docs.
    pub fn parse(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
            .filter(|(_, l)| !l.is_empty());

        let (hline, header) = lines.next().ok_or(Error::Parse {
            line: 0,
            msg: "empty code definition".into(),
        })?;
        let head: Vec<i64> = header
            .split_whitespace()
            .map(|t| t.parse::<i64>())
            .collect::<std::result::Result<_, _>>()
            .map_err(|e| Error::Parse {
                line: hline,
                msg: format!("header: {e}"),
            })?;
        if !(4..=5).contains(&head.len()) || head.iter().any(|&v| v < 0) {
            return Err(Error::Parse {
                line: hline,
                msg: "header must be `m c b L [nu]` with nonnegative integers".into(),
            });
        }
        let (m, c, b, l) = (head[0] as u32, head[1] as usize, head[2] as usize, head[3] as usize);
        let nu = head.get(4).map(|&v| v as u32);
        let field = FieldTables::new(m).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })?;
        if b >= c {
            return Err(Error::Parse {
                line: hline,
                msg: format!("need b < c, got b={b} c={c}"),
            });
        }
        let r = c - b;

        let mut degrees = Vec::with_capacity(r);
        let mut lineno = Vec::with_capacity(r);
        for _ in 0..r {
            let (ln, row) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("expected {r} degree rows"),
            })?;
            let vals: Vec<i64> = row
                .split_whitespace()
                .map(|t| {
                    t.parse::<i64>().map_err(|_| Error::Parse {
                        line: ln,
                        msg: format!("bad degree `{t}`"),
                    })
                })
                .collect::<Result<_>>()?;
            if vals.len() != c {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {c} degrees, got {}", vals.len()),
                });
            }
            for &v in &vals {
                if v < -1 || nu.is_some_and(|nu| v > i64::from(nu)) {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!("degree {v} out of range"),
                    });
                }
            }
            degrees.push(vals);
            lineno.push(ln);
        }

        let mut coeffs = Vec::with_capacity(r);
        for i in 0..r {
            let (ln, row) = lines.next().ok_or(Error::Parse {
                line: 0,
                msg: format!("expected {r} coefficient rows"),
            })?;
            let toks: Vec<&str> = row.split_whitespace().collect();
            if toks.len() != c {
                return Err(Error::Parse {
                    line: ln,
                    msg: format!("expected {c} coefficients, got {}", toks.len()),
                });
            }
            let mut vals = Vec::with_capacity(c);
            for (j, t) in toks.iter().enumerate() {
                let v = parse_coeff(t, &field).map_err(|msg| Error::Parse { line: ln, msg })?;
                if v.is_some() != (degrees[i][j] >= 0) {
                    return Err(Error::Parse {
                        line: ln,
                        msg: format!(
                            "entry ({i},{j}): coefficient `{t}` disagrees with degree {} (line {})",
                            degrees[i][j], lineno[i]
                        ),
                    });
                }
                vals.push(v);
            }
            coeffs.push(vals);
        }
        if let Some((ln, _)) = lines.next() {
            return Err(Error::Parse {
                line: ln,
                msg: "trailing content after coefficient matrix".into(),
            });
        }
        let mut code = Self::new(field, l, &degrees, &coeffs).map_err(|e| Error::Parse {
            line: hline,
            msg: e.to_string(),
        })?;
        code.max_degree = nu;
        Ok(code)
    }

    /// Writes the code in the definition format (degrees already reduced).
    pub fn to_text(&self) -> String {
        let mut out = format!("{} {} {} {}\n", self.field.m(), self.cols, self.b(), self.lifting);
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| match self.entry(i, j) {
                    Some(mono) => mono.shift.to_string(),
                    None => "-1".into(),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out.push('\n');
        for i in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|j| match self.entry(i, j) {
                    Some(mono) => match self.field.log(mono.coeff) {
                        Some(0) => "1".into(),
                        Some(k) => format!("a^{k}"),
                        None => unreachable!("present coefficients are nonzero"),
                    },
                    None => "-1".into(),
                })
                .collect();
            out.push_str(&row.join(" "));
            out.push('\n');
        }
        out
    }

    pub fn field(&self) -> &FieldTables {
        &self.field
    }

    /// Number of check rows c - b.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of block columns c.
    pub fn cols(&self) -> usize {
        self.cols
    }

    /// Number of information block columns b.
    pub fn b(&self) -> usize {
        self.cols - self.rows
    }

    pub fn lifting(&self) -> usize {
        self.lifting
    }

    pub fn max_degree(&self) -> Option<u32> {
        self.max_degree
    }

    /// Design rate b / c.
    pub fn rate(&self) -> f64 {
        self.b() as f64 / self.cols as f64
    }

    /// Code length in symbols.
    pub fn n_sym(&self) -> usize {
        self.cols * self.lifting
    }

    /// Code length in bits.
    pub fn n_bits(&self) -> usize {
        self.n_sym() * self.field.m() as usize
    }

    pub fn k_sym(&self) -> usize {
        self.b() * self.lifting
    }

    pub fn entry(&self, i: usize, j: usize) -> Option<Monomial> {
        self.entries[i * self.cols + j]
    }

    /// Binary base matrix.
    pub fn base(&self) -> Vec<Vec<u8>> {
        (0..self.rows)
            .map(|i| (0..self.cols).map(|j| u8::from(self.entry(i, j).is_some())).collect())
            .collect()
    }

    /// Same degree and coefficient matrices with another lifting factor.
    pub fn with_lifting(&self, lifting: usize) -> Result<Self> {
        if lifting == 0 {
            return Err(Error::InvalidCode("lifting factor must be at least 1".into()));
        }
        let mut out = self.clone();
        out.lifting = lifting;
        // Shifts were already reduced by the old L, so only exact degrees
        // survive a change of L when they were smaller than it.
        for e in out.entries.iter_mut().flatten() {
            e.shift %= lifting as u32;
        }
        Ok(out)
    }

    /// Expands every monomial into an L x L scaled circulant permutation.
    pub fn lift(&self) -> QaryParityCheck {
        let l = self.lifting;
        let mut rows = vec![Vec::new(); self.rows * l];
        for i in 0..self.rows {
            for j in 0..self.cols {
                if let Some(mono) = self.entry(i, j) {
                    for t in 0..l {
                        let col = j * l + (t + mono.shift as usize) % l;
                        rows[i * l + t].push((col as u32, mono.coeff));
                    }
                }
            }
        }
        for r in &mut rows {
            r.sort_unstable_by_key(|e| e.0);
        }
        QaryParityCheck::from_rows(self.field.clone(), self.n_sym(), rows)
    }

    /// Systematic encoder; uses the bidiagonal recursion when the parity
    /// part has that shape and dense elimination otherwise.
    pub fn encoder(&self) -> Result<Encoder> {
        match BidiagonalEncoder::new(self) {
            Some(enc) => Ok(Encoder::Bidiagonal(Box::new(enc))),
            None => Ok(Encoder::Dense(DenseEncoder::new(&self.lift())?)),
        }
    }
}

fn parse_coeff(tok: &str, field: &FieldTables) -> std::result::Result<Option<u8>, String> {
    match tok {
        "-1" => Ok(None),
        "1" => Ok(Some(1)),
        "0" => Err("coefficient 0 at a present position".into()),
        "a" => Ok(Some(field.alpha_pow(1))),
        _ => {
            let k = tok
                .strip_prefix("a^")
                .and_then(|k| k.parse::<i64>().ok())
                .ok_or_else(|| format!("bad coefficient `{tok}` (use -1, 1, a or a^k)"))?;
            if k < 0 || k as usize >= field.order() {
                return Err(format!("exponent in `{tok}` outside 0..{}", field.order()));
            }
            Ok(Some(field.alpha_pow(k)))
        }
    }
}

/// Sparse q-ary parity-check matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct QaryParityCheck {
    field: FieldTables,
    n_sym: usize,
    /// Per row, (column, coefficient) sorted by column.
    rows: Vec<Vec<(u32, u8)>>,
}

impl QaryParityCheck {
    pub fn from_rows(field: FieldTables, n_sym: usize, rows: Vec<Vec<(u32, u8)>>) -> Self {
        Self { field, n_sym, rows }
    }

    pub fn field(&self) -> &FieldTables {
        &self.field
    }

    pub fn n_sym(&self) -> usize {
        self.n_sym
    }

    pub fn r_sym(&self) -> usize {
        self.rows.len()
    }

    pub fn row(&self, i: usize) -> &[(u32, u8)] {
        &self.rows[i]
    }

    pub fn rows(&self) -> &[Vec<(u32, u8)>] {
        &self.rows
    }

    /// All nonzero entries as (row, col, coeff).
    pub fn entries(&self) -> impl Iterator<Item = (usize, usize, u8)> + '_ {
        self.rows
            .iter()
            .enumerate()
            .flat_map(|(i, r)| r.iter().map(move |&(c, h)| (i, c as usize, h)))
    }

    pub fn nnz(&self) -> usize {
        self.rows.iter().map(Vec::len).sum()
    }

    pub fn row_weights(&self) -> Vec<usize> {
        self.rows.iter().map(Vec::len).collect()
    }

    pub fn column_weights(&self) -> Vec<usize> {
        let mut w = vec![0; self.n_sym];
        for (_, c, _) in self.entries() {
            w[c] += 1;
        }
        w
    }

    pub fn syndrome(&self, word: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(0u8, |acc, &(c, h)| acc ^ self.field.mul(h, word[c as usize])))
            .collect()
    }

    pub fn is_codeword(&self, word: &[u8]) -> bool {
        word.len() == self.n_sym
            && self
                .rows
                .iter()
                .all(|r| r.iter().fold(0u8, |acc, &(c, h)| acc ^ self.field.mul(h, word[c as usize])) == 0)
    }

    /// Replaces every entry by its m x m companion block. Symbol column j
    /// becomes bit columns j*m .. j*m + m, bit i of the symbol at j*m + i.
    pub fn binary_image(&self) -> BinaryParityCheck {
        let m = self.field.m() as usize;
        let mut rows = vec![Vec::new(); self.rows.len() * m];
        for (i, r) in self.rows.iter().enumerate() {
            for &(c, h) in r {
                let comp = self.field.companion(h).expect("entries are nonzero");
                for (a, bits) in comp.rows().iter().enumerate() {
                    for bcol in 0..m {
                        if (bits >> bcol) & 1 == 1 {
                            rows[i * m + a].push(c * m as u32 + bcol as u32);
                        }
                    }
                }
            }
        }
        for r in &mut rows {
            r.sort_unstable();
        }
        BinaryParityCheck {
            n_bits: self.n_sym * m,
            rows,
        }
    }
}

/// Sparse binary parity-check matrix; rows hold sorted column indices.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BinaryParityCheck {
    n_bits: usize,
    rows: Vec<Vec<u32>>,
}

impl BinaryParityCheck {
    pub fn from_rows(n_bits: usize, rows: Vec<Vec<u32>>) -> Self {
        Self { n_bits, rows }
    }

    pub fn n_bits(&self) -> usize {
        self.n_bits
    }

    pub fn r_bits(&self) -> usize {
        self.rows.len()
    }

    pub fn rows(&self) -> &[Vec<u32>] {
        &self.rows
    }

    pub fn syndrome(&self, bits: &[u8]) -> Vec<u8> {
        self.rows
            .iter()
            .map(|r| r.iter().fold(0u8, |acc, &c| acc ^ (bits[c as usize] & 1)))
            .collect()
    }

    pub fn is_codeword(&self, bits: &[u8]) -> bool {
        bits.len() == self.n_bits && self.syndrome(bits).iter().all(|&s| s == 0)
    }
}

/// Bits of a symbol sequence, bit i of symbol j at position j*m + i.
pub fn symbols_to_bits(symbols: &[u8], m: u32) -> Vec<u8> {
    symbols
        .iter()
        .flat_map(|&s| (0..m).map(move |i| (s >> i) & 1))
        .collect()
}

/// Inverse of [`symbols_to_bits`].
pub fn bits_to_symbols(bits: &[u8], m: u32) -> Vec<u8> {
    bits.chunks(m as usize)
        .map(|c| c.iter().enumerate().fold(0u8, |acc, (i, &b)| acc | (b & 1) << i))
        .collect()
}

/// Encoder for a QC code. The bidiagonal encoder is systematic on the
/// first k symbols; the dense one on [`Encoder::info_positions`].
#[derive(Debug, Clone)]
pub enum Encoder {
    Bidiagonal(Box<BidiagonalEncoder>),
    Dense(DenseEncoder),
}

impl Encoder {
    pub fn k_sym(&self) -> usize {
        match self {
            Encoder::Bidiagonal(e) => e.k_sym(),
            Encoder::Dense(e) => e.k_sym(),
        }
    }

    pub fn n_sym(&self) -> usize {
        match self {
            Encoder::Bidiagonal(e) => e.n_sym(),
            Encoder::Dense(e) => e.n_sym(),
        }
    }

    pub fn info_positions(&self) -> Vec<usize> {
        match self {
            Encoder::Bidiagonal(e) => (0..e.k_sym()).collect(),
            Encoder::Dense(e) => e.info_positions().to_vec(),
        }
    }

    pub fn is_structured(&self) -> bool {
        matches!(self, Encoder::Bidiagonal(_))
    }

    pub fn encode(&self, info: &[u8]) -> Result<Vec<u8>> {
        if info.len() != self.k_sym() {
            return Err(Error::LengthMismatch {
                expected: self.k_sym(),
                got: info.len(),
            });
        }
        Ok(match self {
            Encoder::Bidiagonal(e) => e.encode(info),
            Encoder::Dense(e) => e.encode(info),
        })
    }
}

/// L x L circulant over GF(q), stored as its first row: entry (t, (t+j) mod L)
/// equals `g[j]`.
#[derive(Debug, Clone, PartialEq)]
struct Circulant(Vec<u8>);

impl Circulant {
    fn zero(l: usize) -> Self {
        Circulant(vec![0; l])
    }

    fn monomial(l: usize, m: Monomial) -> Self {
        let mut g = vec![0; l];
        g[m.shift as usize] = m.coeff;
        Circulant(g)
    }

    fn add(&self, o: &Circulant) -> Circulant {
        Circulant(self.0.iter().zip(&o.0).map(|(a, b)| a ^ b).collect())
    }

    fn mul(&self, o: &Circulant, f: &FieldTables) -> Circulant {
        let l = self.0.len();
        let mut out = vec![0u8; l];
        for (i, &a) in self.0.iter().enumerate() {
            if a == 0 {
                continue;
            }
            for (j, &b) in o.0.iter().enumerate() {
                out[(i + j) % l] ^= f.mul(a, b);
            }
        }
        Circulant(out)
    }

    fn apply(&self, x: &[u8], f: &FieldTables) -> Vec<u8> {
        let l = x.len();
        let mut y = vec![0u8; l];
        for (j, &g) in self.0.iter().enumerate() {
            if g == 0 {
                continue;
            }
            for (t, yt) in y.iter_mut().enumerate() {
                *yt ^= f.mul(g, x[(t + j) % l]);
            }
        }
        y
    }

    fn dense(&self) -> Vec<Vec<u8>> {
        let l = self.0.len();
        (0..l)
            .map(|t| (0..l).map(|c| self.0[(c + l - t) % l]).collect())
            .collect()
    }
}

fn apply_monomial(m: Monomial, x: &[u8], f: &FieldTables) -> Vec<u8> {
    let l = x.len();
    (0..l).map(|t| f.mul(m.coeff, x[(t + m.shift as usize) % l])).collect()
}

fn inverse_monomial(m: Monomial, l: usize, f: &FieldTables) -> Monomial {
    Monomial {
        shift: ((l - m.shift as usize % l) % l) as u32,
        coeff: f.inv(m.coeff).expect("present coefficients are nonzero"),
    }
}

/// Encoder for parity parts (h0 | H_bd) where column b+k (k >= 1) of the
/// polynomial matrix is nonzero exactly in rows k-1 and k.
#[derive(Debug, Clone)]
pub struct BidiagonalEncoder {
    code: PolynomialParityCheck,
    /// Per row: X_i^{-1} for rows 0..r-1 (unused for the last row).
    x_inv: Vec<Monomial>,
    /// A_i with p_i = a_i + A_i p0, for i = 1..r-1 (index 0 unused).
    a_mats: Vec<Circulant>,
    /// Dense inverse of the final L x L system for p0.
    g_inv: Vec<Vec<u8>>,
}

impl BidiagonalEncoder {
    fn new(code: &PolynomialParityCheck) -> Option<Self> {
        let (r, b, l, f) = (code.rows(), code.b(), code.lifting(), code.field());
        for k in 1..r {
            for i in 0..r {
                let want = i + 1 == k || i == k;
                if code.entry(i, b + k).is_some() != want {
                    return None;
                }
            }
        }
        let h0 = |i: usize| code.entry(i, b).map_or(Circulant::zero(l), |mm| Circulant::monomial(l, mm));
        let mut x_inv = Vec::with_capacity(r);
        for i in 0..r.saturating_sub(1) {
            x_inv.push(inverse_monomial(code.entry(i, b + i + 1)?, l, f));
        }
        let mut a_mats = vec![Circulant::zero(l)];
        if r > 1 {
            a_mats.push(Circulant::monomial(l, x_inv[0]).mul(&h0(0), f));
            for i in 1..r - 1 {
                let y = Circulant::monomial(l, code.entry(i, b + i)?);
                let acc = h0(i).add(&y.mul(&a_mats[i], f));
                a_mats.push(Circulant::monomial(l, x_inv[i]).mul(&acc, f));
            }
        }
        let g = if r > 1 {
            let y = Circulant::monomial(l, code.entry(r - 1, b + r - 1)?);
            h0(r - 1).add(&y.mul(&a_mats[r - 1], f))
        } else {
            h0(0)
        };
        let g_inv = invert_dense(&g.dense(), f)?;
        Some(Self {
            code: code.clone(),
            x_inv,
            a_mats,
            g_inv,
        })
    }

    pub fn k_sym(&self) -> usize {
        self.code.k_sym()
    }

    pub fn n_sym(&self) -> usize {
        self.code.n_sym()
    }

    fn encode(&self, info: &[u8]) -> Vec<u8> {
        let (r, b, l, f) = (self.code.rows(), self.code.b(), self.code.lifting(), self.code.field());
        let xor = |a: &mut Vec<u8>, v: &[u8]| a.iter_mut().zip(v).for_each(|(x, y)| *x ^= y);
        let mut s = vec![vec![0u8; l]; r];
        for (i, si) in s.iter_mut().enumerate() {
            for j in 0..b {
                if let Some(mm) = self.code.entry(i, j) {
                    xor(si, &apply_monomial(mm, &info[j * l..(j + 1) * l], f));
                }
            }
        }
        // a_i: the p0-free part of p_i.
        let mut a = vec![vec![0u8; l]; r];
        if r > 1 {
            a[1] = apply_monomial(self.x_inv[0], &s[0], f);
            for i in 1..r - 1 {
                let y = self.code.entry(i, b + i).expect("checked at construction");
                let mut acc = s[i].clone();
                xor(&mut acc, &apply_monomial(y, &a[i], f));
                a[i + 1] = apply_monomial(self.x_inv[i], &acc, f);
            }
        }
        let mut rhs = s[r - 1].clone();
        if r > 1 {
            let y = self.code.entry(r - 1, b + r - 1).expect("checked at construction");
            xor(&mut rhs, &apply_monomial(y, &a[r - 1], f));
        }
        let p0 = mat_vec(&self.g_inv, &rhs, f);
        let mut out = Vec::with_capacity(self.n_sym());
        out.extend_from_slice(info);
        out.extend_from_slice(&p0);
        for i in 1..r {
            let mut p = a[i].clone();
            xor(&mut p, &self.a_mats[i].apply(&p0, f));
            out.extend_from_slice(&p);
        }
        out
    }
}

fn mat_vec(m: &[Vec<u8>], x: &[u8], f: &FieldTables) -> Vec<u8> {
    m.iter()
        .map(|row| row.iter().zip(x).fold(0u8, |acc, (&a, &b)| acc ^ f.mul(a, b)))
        .collect()
}

/// Gauss-Jordan inverse over GF(q); `None` if singular.
fn invert_dense(a: &[Vec<u8>], f: &FieldTables) -> Option<Vec<Vec<u8>>> {
    let n = a.len();
    let mut aug: Vec<Vec<u8>> = a
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let mut row = r.clone();
            row.extend((0..n).map(|j| u8::from(i == j)));
            row
        })
        .collect();
    for col in 0..n {
        let p = (col..n).find(|&i| aug[i][col] != 0)?;
        aug.swap(col, p);
        let inv = f.inv(aug[col][col]).ok()?;
        for v in aug[col].iter_mut() {
            *v = f.mul(*v, inv);
        }
        let pivot = aug[col].clone();
        for (i, row) in aug.iter_mut().enumerate() {
            let factor = row[col];
            if i != col && factor != 0 {
                for (v, &pv) in row.iter_mut().zip(&pivot) {
                    *v ^= f.mul(factor, pv);
                }
            }
        }
    }
    Some(aug.into_iter().map(|r| r[n..].to_vec()).collect())
}

/// Encoder from Gaussian elimination on a dense copy of H.
///
/// Pivots are taken from the rightmost columns first, so when the last
/// r columns of a full-rank H are invertible the encoder is systematic on
/// the first n - r symbols. Otherwise the information symbols sit at
/// [`DenseEncoder::info_positions`] and the rest are solved for.
#[derive(Debug, Clone)]
pub struct DenseEncoder {
    field: FieldTables,
    n: usize,
    info_pos: Vec<usize>,
    /// (pivot column, coefficients over the information symbols)
    pivots: Vec<(usize, Vec<u8>)>,
}

impl DenseEncoder {
    pub fn new(h: &QaryParityCheck) -> Result<Self> {
        let (n, r) = (h.n_sym(), h.r_sym());
        let f = h.field();
        let mut a = vec![vec![0u8; n]; r];
        for (i, c, v) in h.entries() {
            a[i][c] = v;
        }
        let mut pivot_cols = Vec::new();
        let mut rank = 0;
        for col in (0..n).rev() {
            let Some(p) = (rank..r).find(|&i| a[i][col] != 0) else { continue };
            a.swap(rank, p);
            let inv = f.inv(a[rank][col])?;
            for v in a[rank].iter_mut() {
                *v = f.mul(*v, inv);
            }
            let pivot = a[rank].clone();
            for (i, row) in a.iter_mut().enumerate() {
                let factor = row[col];
                if i != rank && factor != 0 {
                    for (v, &pv) in row.iter_mut().zip(&pivot) {
                        *v ^= f.mul(factor, pv);
                    }
                }
            }
            pivot_cols.push(col);
            rank += 1;
        }
        if rank == n {
            return Err(Error::EmptyCode);
        }
        let mut is_pivot = vec![false; n];
        for &c in &pivot_cols {
            is_pivot[c] = true;
        }
        let info_pos: Vec<usize> = (0..n).filter(|&c| !is_pivot[c]).collect();
        // Row i reads x_pivot + sum_info a[i][c] x_c = 0.
        let pivots = pivot_cols
            .iter()
            .enumerate()
            .map(|(i, &pc)| (pc, info_pos.iter().map(|&c| a[i][c]).collect()))
            .collect();
        Ok(Self {
            field: f.clone(),
            n,
            info_pos,
            pivots,
        })
    }

    pub fn k_sym(&self) -> usize {
        self.info_pos.len()
    }

    pub fn n_sym(&self) -> usize {
        self.n
    }

    /// Codeword positions that carry the message, in message order.
    pub fn info_positions(&self) -> &[usize] {
        &self.info_pos
    }

    pub fn is_systematic(&self) -> bool {
        self.info_pos.iter().enumerate().all(|(i, &p)| i == p)
    }

    fn encode(&self, info: &[u8]) -> Vec<u8> {
        let mut out = vec![0u8; self.n];
        for (&p, &v) in self.info_pos.iter().zip(info) {
            out[p] = v;
        }
        for (pc, coeffs) in &self.pivots {
            out[*pc] = coeffs
                .iter()
                .zip(info)
                .fold(0u8, |acc, (&a, &b)| acc ^ self.field.mul(a, b));
        }
        out
    }
}

/// Strip-structured random ensemble: J strips of height L, each a random
/// column permutation of `(I ... I 0 ... 0)` with K_j identity blocks out of
/// K block positions.
#[derive(Debug, Clone, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub struct EnsembleConfig {
    pub m: u32,
    pub j: usize,
    pub k: usize,
    pub k_list: Vec<usize>,
    pub l_strip: usize,
}

impl EnsembleConfig {
    pub fn new(m: u32, k: usize, k_list: Vec<usize>, l_strip: usize) -> Result<Self> {
        let cfg = Self {
            m,
            j: k_list.len(),
            k,
            k_list,
            l_strip,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=8).contains(&self.m) {
            return Err(Error::InvalidEnsemble(format!("m = {} outside 1..=8", self.m)));
        }
        if self.j == 0 || self.k_list.len() != self.j {
            return Err(Error::InvalidEnsemble(format!(
                "J = {} but {} strip sizes",
                self.j,
                self.k_list.len()
            )));
        }
        if self.k == 0 || self.l_strip == 0 {
            return Err(Error::InvalidEnsemble("K and L must be positive".into()));
        }
        if let Some(&bad) = self.k_list.iter().find(|&&ki| ki == 0 || ki > self.k) {
            return Err(Error::InvalidEnsemble(format!("K_i = {bad} outside 1..={}", self.k)));
        }
        Ok(())
    }

    /// Parses `key = value` lines with keys m, J, K, K_list (comma or space
    /// separated; defaults to K repeated J times) and L.
    pub fn parse(text: &str) -> Result<Self> {
        let kv = crate::harness::parse_key_values(text)?;
        let get = |key: &str| kv.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str());
        let num = |key: &str| -> Result<usize> {
            get(key)
                .ok_or_else(|| Error::InvalidEnsemble(format!("missing key `{key}`")))?
                .parse()
                .map_err(|_| Error::InvalidEnsemble(format!("`{key}` is not an integer")))
        };
        let m = num("m")? as u32;
        let k = num("K")?;
        let k_list = match get("K_list") {
            Some(v) => v
                .split(|c: char| c == ',' || c.is_whitespace())
                .filter(|t| !t.is_empty())
                .map(|t| t.parse().map_err(|_| Error::InvalidEnsemble(format!("bad K_list entry `{t}`"))))
                .collect::<Result<Vec<usize>>>()?,
            None => vec![k; num("J")?],
        };
        if let Some(j) = get("J") {
            if j.parse::<usize>().ok() != Some(k_list.len()) {
                return Err(Error::InvalidEnsemble("J disagrees with K_list".into()));
            }
        }
        Self::new(m, k, k_list, num("L")?)
    }

    pub fn q(&self) -> usize {
        1 << self.m
    }

    pub fn n_sym(&self) -> usize {
        self.k * self.l_strip
    }

    pub fn n_bits(&self) -> usize {
        self.n_sym() * self.m as usize
    }

    pub fn r_sym(&self) -> usize {
        self.j * self.l_strip
    }

    /// Average column weight w = sum(K_i) / K.
    pub fn avg_column_weight(&self) -> f64 {
        self.k_list.iter().sum::<usize>() as f64 / self.k as f64
    }
}

/// Unpermuted, labeled strip i: row t has K_i entries at columns j*L + t.
fn labeled_strip<R: Rng + ?Sized>(cfg: &EnsembleConfig, i: usize, rng: &mut R) -> Vec<Vec<(u32, u8)>> {
    let q = cfg.q() as u8;
    let l = cfg.l_strip;
    (0..l)
        .map(|t| {
            (0..cfg.k_list[i])
                .map(|j| {
                    let label = if q == 2 { 1 } else { rng.gen_range(1..q) };
                    ((j * l + t) as u32, label)
                })
                .collect()
        })
        .collect()
}

/// Samples a parity-check matrix from ensemble N: each strip's columns are
/// permuted uniformly and entries get i.i.d. uniform nonzero labels.
pub fn sample_ensemble<R: Rng + ?Sized>(cfg: &EnsembleConfig, rng: &mut R) -> Result<QaryParityCheck> {
    cfg.validate()?;
    let field = FieldTables::new(cfg.m)?;
    let n = cfg.n_sym();
    let mut rows = Vec::with_capacity(cfg.r_sym());
    for i in 0..cfg.j {
        let strip = labeled_strip(cfg, i, rng);
        let mut perm: Vec<u32> = (0..n as u32).collect();
        perm.shuffle(rng);
        for row in strip {
            let mut r: Vec<(u32, u8)> = row.into_iter().map(|(c, h)| (perm[c as usize], h)).collect();
            r.sort_unstable_by_key(|e| e.0);
            rows.push(r);
        }
    }
    Ok(QaryParityCheck::from_rows(field, n, rows))
}

/// Samples from ensemble B: each labeled strip is binarized first and its
/// n binary columns are then permuted uniformly.
pub fn sample_ensemble_binary<R: Rng + ?Sized>(cfg: &EnsembleConfig, rng: &mut R) -> Result<BinaryParityCheck> {
    cfg.validate()?;
    let field = FieldTables::new(cfg.m)?;
    let n_sym = cfg.n_sym();
    let n_bits = cfg.n_bits();
    let mut rows = Vec::with_capacity(cfg.r_sym() * cfg.m as usize);
    for i in 0..cfg.j {
        let strip = labeled_strip(cfg, i, rng);
        let bin = QaryParityCheck::from_rows(field.clone(), n_sym, strip).binary_image();
        let mut perm: Vec<u32> = (0..n_bits as u32).collect();
        perm.shuffle(rng);
        for row in bin.rows() {
            let mut r: Vec<u32> = row.iter().map(|&c| perm[c as usize]).collect();
            r.sort_unstable();
            rows.push(r);
        }
    }
    Ok(BinaryParityCheck::from_rows(n_bits, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    const RATE_QUARTER: &str = "\
# rate 1/4 over GF(16)
4 4 1 3
0 0 0 0
0 3 -1 7
0 9 2 1

1 1 1 1
1 a -1 a^3
1 a^2 a^5 a^11
";

    #[test]
    fn parses_rate_quarter_example() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        assert_eq!((c.b(), c.cols(), c.rows()), (1, 4, 3));
        assert_eq!(c.rate(), 0.25);
        assert_eq!(c.base(), vec![vec![1, 1, 1, 1], vec![1, 1, 0, 1], vec![1, 1, 1, 1]]);
        let f = c.field();
        assert_eq!(c.entry(2, 3), Some(Monomial { shift: 1, coeff: f.alpha_pow(11) }));
        assert_eq!(c.entry(1, 1).unwrap().coeff, 2);
    }

    #[test]
    fn degree_seven_lifts_to_shift_one() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        // (2,4) in one-based indexing: D^7 with L = 3
        assert_eq!(c.entry(1, 3).unwrap().shift, 1);
        let h = c.lift();
        // Block row 1, row t has its entry in block column 3 at (t + 1) mod 3.
        for t in 0..3 {
            let cols: Vec<u32> = h.row(3 + t).iter().map(|e| e.0).filter(|&c| c >= 9).collect();
            assert_eq!(cols, vec![9 + ((t as u32 + 1) % 3)]);
        }
    }

    #[test]
    fn rejects_malformed_definitions() {
        let zero = "2 3 1 2\n-1 -1 -1\n-1 -1 -1\n\n-1 -1 -1\n-1 -1 -1\n";
        assert!(PolynomialParityCheck::parse(zero).is_err());
        let mismatch = "2 3 1 2\n0 -1 0\n0 0 0\n\n1 1 1\n1 1 1\n";
        assert!(matches!(PolynomialParityCheck::parse(mismatch), Err(Error::Parse { line: 5, .. })));
        let zero_coeff = "2 3 1 2\n0 0 0\n0 0 0\n\n1 0 1\n1 1 1\n";
        let err = PolynomialParityCheck::parse(zero_coeff).unwrap_err();
        assert!(err.to_string().contains("coefficient 0"));
        let short = "2 3 1 2\n0 0\n";
        assert!(PolynomialParityCheck::parse(short).is_err());
        let bound = "2 3 1 2 4\n0 5 0\n0 0 0\n\n1 1 1\n1 1 1\n";
        assert!(PolynomialParityCheck::parse(bound).is_err());
        let bad_exp = "2 3 1 2\n0 0 0\n0 0 0\n\n1 a^3 1\n1 1 1\n";
        assert!(PolynomialParityCheck::parse(bad_exp).is_err());
    }

    #[test]
    fn text_round_trip() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        let again = PolynomialParityCheck::parse(&c.to_text()).unwrap();
        assert_eq!(c.lift(), again.lift());
    }

    #[test]
    fn lifting_by_one_is_the_coefficient_matrix() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap().with_lifting(1).unwrap();
        let h = c.lift();
        for i in 0..3 {
            let want: Vec<(u32, u8)> = (0..4)
                .filter_map(|j| c.entry(i, j).map(|mm| (j as u32, mm.coeff)))
                .collect();
            assert_eq!(h.row(i), &want[..]);
        }
    }

    #[test]
    fn lifted_weights_repeat_base_weights() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap().with_lifting(5).unwrap();
        let h = c.lift();
        let base = c.base();
        for (col, w) in h.column_weights().into_iter().enumerate() {
            let j = col / 5;
            assert_eq!(w, base.iter().map(|r| r[j] as usize).sum::<usize>());
        }
        for (row, w) in h.row_weights().into_iter().enumerate() {
            assert_eq!(w, base[row / 5].iter().map(|&b| b as usize).sum::<usize>());
        }
    }

    #[test]
    fn binary_image_of_gf2_code_is_itself() {
        let text = "1 3 1 4\n0 1 -1\n2 0 3\n\n1 1 -1\n1 1 1\n";
        let c = PolynomialParityCheck::parse(text).unwrap();
        let h = c.lift();
        let bin = h.binary_image();
        for (i, r) in h.rows().iter().enumerate() {
            let cols: Vec<u32> = r.iter().map(|e| e.0).collect();
            assert_eq!(bin.rows()[i], cols);
        }
    }

    #[test]
    fn syndromes_agree_with_binary_image() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        let h = c.lift();
        let bin = h.binary_image();
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let enc = c.encoder().unwrap();
        for trial in 0..200 {
            let x: Vec<u8> = if trial % 2 == 0 {
                (0..h.n_sym()).map(|_| rng.gen_range(0..16)).collect()
            } else {
                let info: Vec<u8> = (0..enc.k_sym()).map(|_| rng.gen_range(0..16)).collect();
                enc.encode(&info).unwrap()
            };
            let bits = symbols_to_bits(&x, 4);
            assert_eq!(h.is_codeword(&x), bin.is_codeword(&bits));
            if trial % 2 == 1 {
                assert!(bin.is_codeword(&bits));
            }
        }
    }

    #[test]
    fn rate_quarter_example_falls_back_to_dense_encoder() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        let enc = c.encoder().unwrap();
        assert!(!enc.is_structured());
        assert_eq!(enc.k_sym(), 3);
        assert_eq!(enc.encode(&[0, 0, 0]).unwrap(), vec![0; 12]);
        let h = c.lift();
        let pos = enc.info_positions();
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..1000 {
            let info: Vec<u8> = (0..3).map(|_| rng.gen_range(0..16)).collect();
            let cw = enc.encode(&info).unwrap();
            for (k, &p) in pos.iter().enumerate() {
                assert_eq!(cw[p], info[k]);
            }
            assert!(h.syndrome(&cw).iter().all(|&s| s == 0));
        }
    }

    #[test]
    fn rate_quarter_example_parity_part_is_singular() {
        // The last three block columns never form an invertible matrix, so
        // one information symbol moves into them.
        for l in 1..8 {
            let text = RATE_QUARTER.replace("4 4 1 3", &format!("4 4 1 {l}"));
            let c = PolynomialParityCheck::parse(&text).unwrap();
            let enc = DenseEncoder::new(&c.lift()).unwrap();
            assert_eq!(enc.k_sym(), l);
            assert!(!enc.is_systematic());
            assert_eq!(enc.info_positions().iter().filter(|&&p| p >= l).count(), 1);
        }
    }

    #[test]
    fn bidiagonal_encoder_used_when_shape_matches() {
        // Parity columns 2..5: h0 in column 2, then a staircase.
        let text = "\
4 6 2 7
0 2 0 1 -1 -1
3 -1 5 4 2 -1
1 6 -1 -1 3 0
2 0 4 -1 -1 6

a 1 a^4 1 -1 -1
1 -1 a^7 a^2 1 -1
a^3 a^9 -1 -1 a^5 1
1 a^6 a -1 -1 a^13
";
        let c = PolynomialParityCheck::parse(text).unwrap();
        let enc = c.encoder().unwrap();
        assert!(enc.is_structured());
        let h = c.lift();
        let dense = DenseEncoder::new(&h).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..300 {
            let info: Vec<u8> = (0..enc.k_sym()).map(|_| rng.gen_range(0..16)).collect();
            let cw = enc.encode(&info).unwrap();
            assert!(h.is_codeword(&cw));
            assert_eq!(cw, dense.encode(&info));
        }
    }

    #[test]
    fn encoder_is_linear() {
        let c = PolynomialParityCheck::parse(RATE_QUARTER).unwrap();
        let enc = c.encoder().unwrap();
        let h = c.lift();
        let a = enc.encode(&[5, 0, 9]).unwrap();
        let b = enc.encode(&[5, 7, 9]).unwrap();
        let diff: Vec<u8> = a.iter().zip(&b).map(|(x, y)| x ^ y).collect();
        assert!(h.is_codeword(&diff));
        assert_eq!(enc.encode(&[1]), Err(Error::LengthMismatch { expected: 3, got: 1 }));
    }

    #[test]
    fn dependent_rows_raise_the_dimension() {
        // Two identical rows leave a rank-1 matrix over 3 symbols.
        let text = "1 3 1 1\n0 0 0\n0 0 0\n\n1 1 1\n1 1 1\n";
        let c = PolynomialParityCheck::parse(text).unwrap();
        let enc = c.encoder().unwrap();
        assert_eq!(enc.k_sym(), 2);
        assert!(c.lift().is_codeword(&enc.encode(&[1, 1]).unwrap()));
        let full = QaryParityCheck::from_rows(c.field().clone(), 1, vec![vec![(0, 1)]]);
        assert_eq!(DenseEncoder::new(&full).unwrap_err(), Error::EmptyCode);
    }

    #[test]
    fn regular_ensemble_rows_have_weight_k() {
        let cfg = EnsembleConfig::new(4, 6, vec![6, 6, 6], 5).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let h = sample_ensemble(&cfg, &mut rng).unwrap();
        assert!(h.row_weights().iter().all(|&w| w == 6));
        assert!(h.column_weights().iter().all(|&w| w == 3));
        assert!(h.entries().all(|(_, _, v)| v != 0));
    }

    #[test]
    fn binary_labels_are_one() {
        let cfg = EnsembleConfig::new(1, 4, vec![2, 3], 3).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let h = sample_ensemble(&cfg, &mut rng).unwrap();
        assert!(h.entries().all(|(_, _, v)| v == 1));
    }

    #[test]
    fn column_weight_statistics() {
        let cfg = EnsembleConfig::new(2, 4, vec![1, 3, 4], 3).unwrap();
        let w = cfg.avg_column_weight();
        assert_eq!(w, 2.0);
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let draws = 10_000;
        for _ in 0..200 {
            let cw = sample_ensemble(&cfg, &mut rng).unwrap().column_weights();
            assert!(cw.iter().all(|&c| c <= cfg.j));
            assert_eq!(cw.iter().sum::<usize>() as f64 / cw.len() as f64, w);
        }
        // Weight of one fixed column: mean w, binomial-type spread.
        let mut rng = ChaCha8Rng::seed_from_u64(12);
        let vals: Vec<f64> = (0..draws)
            .map(|_| sample_ensemble(&cfg, &mut rng).unwrap().column_weights()[5] as f64)
            .collect();
        let m = vals.iter().sum::<f64>() / draws as f64;
        let v = vals.iter().map(|x| (x - m).powi(2)).sum::<f64>() / (draws - 1) as f64;
        assert!((m - w).abs() < 3.0 * (v / draws as f64).sqrt(), "mean {m} vs {w}");
    }

    #[test]
    fn binary_ensemble_shapes() {
        let cfg = EnsembleConfig::new(2, 2, vec![2, 2], 2).unwrap();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let h = sample_ensemble_binary(&cfg, &mut rng).unwrap();
        assert_eq!(h.n_bits(), 8);
        assert_eq!(h.r_bits(), 8);
    }

    #[test]
    fn ensemble_config_parsing() {
        let cfg = EnsembleConfig::parse("m = 4\nJ = 3\nK = 12\nK_list = 3, 12, 12\nL = 42\n").unwrap();
        assert_eq!(cfg.k_list, vec![3, 12, 12]);
        assert!((cfg.avg_column_weight() - 2.25).abs() < 1e-12);
        let reg = EnsembleConfig::parse("m=2\nJ=2\nK=3\nL=2").unwrap();
        assert_eq!(reg.k_list, vec![3, 3]);
        assert!(EnsembleConfig::parse("m=2\nJ=3\nK=3\nK_list=3,3\nL=2").is_err());
        assert!(EnsembleConfig::new(2, 3, vec![4], 2).is_err());
    }
}
