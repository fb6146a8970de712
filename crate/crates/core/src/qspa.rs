//! q-ary sum-product decoding over GF(2^m), flooding schedule.
//!
//! Messages live in the log domain as [`LlrVector`]-style vectors (entry 0
//! is 0). Check nodes work in the probability domain: each incoming vector
//! is permuted by its edge coefficient, moved to the Walsh-Hadamard domain,
//! multiplied with the others, transformed back and permuted by the inverse
//! coefficient.

use crate::demapper::{argmax, normalize_in_place, LlrVector};
use crate::error::{Error, Result};
use crate::qc_code::QaryParityCheck;

/// Unnormalized in-place Walsh-Hadamard transform; applying it twice
/// multiplies by the length.
pub fn wht(values: &mut [f64]) -> Result<()> {
    let n = values.len();
    if !n.is_power_of_two() {
        return Err(Error::NotPowerOfTwo(n));
    }
    let mut h = 1;
    while h < n {
        for i in (0..n).step_by(2 * h) {
            for j in i..i + h {
                let (a, b) = (values[j], values[j + h]);
                values[j] = a + b;
                values[j + h] = a - b;
            }
        }
        h *= 2;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
pub enum DecodeStatus {
    /// Syndrome became zero after this many iterations.
    Converged(usize),
    /// Iteration limit reached with a nonzero syndrome.
    Failed,
}

#[derive(Debug, Clone, PartialEq)]
pub struct DecodeOutput {
    pub symbols: Vec<u8>,
    pub status: DecodeStatus,
    pub iterations: usize,
}

impl DecodeOutput {
    pub fn converged(&self) -> bool {
        matches!(self.status, DecodeStatus::Converged(_))
    }
}

/// Decoder for one parity-check matrix; reusable and shareable across
/// threads. Per-frame buffers live in [`DecoderState`].
#[derive(Debug, Clone)]
pub struct QspaDecoder {
    code: QaryParityCheck,
    q: usize,
    max_iters: usize,
    /// mul[h * q + v] = h * v
    mul: Vec<u8>,
    /// Edge e = (row, col, coeff), grouped by row.
    edge_col: Vec<u32>,
    edge_coeff: Vec<u8>,
    row_start: Vec<usize>,
    /// Edge ids incident to each column.
    col_edges: Vec<Vec<usize>>,
}

/// Message buffers for one in-flight frame.
#[derive(Debug, Clone)]
pub struct DecoderState {
    v2c: Vec<f64>,
    c2v: Vec<f64>,
    total: Vec<f64>,
    scratch: Vec<Vec<f64>>,
    prefix: Vec<Vec<f64>>,
}

impl QspaDecoder {
    pub fn new(code: QaryParityCheck, max_iters: usize) -> Self {
        let f = code.field();
        let q = f.q();
        let mut mul = vec![0u8; q * q];
        for h in 0..q {
            for v in 0..q {
                mul[h * q + v] = f.mul(h as u8, v as u8);
            }
        }
        let mut edge_col = Vec::new();
        let mut edge_coeff = Vec::new();
        let mut row_start = vec![0];
        let mut col_edges = vec![Vec::new(); code.n_sym()];
        for row in code.rows() {
            for &(c, h) in row {
                col_edges[c as usize].push(edge_col.len());
                edge_col.push(c);
                edge_coeff.push(h);
            }
            row_start.push(edge_col.len());
        }
        Self {
            code,
            q,
            max_iters,
            mul,
            edge_col,
            edge_coeff,
            row_start,
            col_edges,
        }
    }

    pub fn code(&self) -> &QaryParityCheck {
        &self.code
    }

    pub fn max_iters(&self) -> usize {
        self.max_iters
    }

    pub fn new_state(&self) -> DecoderState {
        let e = self.edge_col.len();
        let max_deg = self.row_start.windows(2).map(|w| w[1] - w[0]).max().unwrap_or(0);
        DecoderState {
            v2c: vec![0.0; e * self.q],
            c2v: vec![0.0; e * self.q],
            total: vec![0.0; self.code.n_sym() * self.q],
            scratch: vec![vec![0.0; self.q]; max_deg],
            prefix: vec![vec![0.0; self.q]; max_deg + 1],
        }
    }

    pub fn decode(&self, metrics: &[LlrVector]) -> DecodeOutput {
        let mut st = self.new_state();
        self.decode_with(metrics, &mut st)
    }

    pub fn decode_with(&self, metrics: &[LlrVector], st: &mut DecoderState) -> DecodeOutput {
        let q = self.q;
        let n = self.code.n_sym();
        assert_eq!(metrics.len(), n, "one metric vector per symbol");
        st.c2v.iter_mut().for_each(|x| *x = 0.0);
        let mut symbols = vec![0u8; n];
        for it in 1..=self.max_iters {
            // Variable nodes: posterior minus the edge's own contribution.
            for col in 0..n {
                let tot = &mut st.total[col * q..(col + 1) * q];
                tot.copy_from_slice(metrics[col].values());
                for &e in &self.col_edges[col] {
                    for (t, c) in tot.iter_mut().zip(&st.c2v[e * q..(e + 1) * q]) {
                        *t += c;
                    }
                }
                for &e in &self.col_edges[col] {
                    let out = &mut st.v2c[e * q..(e + 1) * q];
                    for v in 0..q {
                        out[v] = tot[v] - st.c2v[e * q + v];
                    }
                    normalize_in_place(out);
                }
            }
            for row in 0..self.row_start.len() - 1 {
                self.check_node(row, st);
            }
            for col in 0..n {
                let tot = &mut st.total[col * q..(col + 1) * q];
                tot.copy_from_slice(metrics[col].values());
                for &e in &self.col_edges[col] {
                    for (t, c) in tot.iter_mut().zip(&st.c2v[e * q..(e + 1) * q]) {
                        *t += c;
                    }
                }
                symbols[col] = argmax(tot) as u8;
            }
            if self.code.is_codeword(&symbols) {
                return DecodeOutput {
                    symbols,
                    status: DecodeStatus::Converged(it),
                    iterations: it,
                };
            }
        }
        DecodeOutput {
            symbols,
            status: DecodeStatus::Failed,
            iterations: self.max_iters,
        }
    }

    fn check_node(&self, row: usize, st: &mut DecoderState) {
        let q = self.q;
        let (lo, hi) = (self.row_start[row], self.row_start[row + 1]);
        let deg = hi - lo;
        // Transform-domain vectors of h_e * x_e.
        for (k, e) in (lo..hi).enumerate() {
            let h = self.edge_coeff[e] as usize;
            let msg = &st.v2c[e * q..(e + 1) * q];
            let buf = &mut st.scratch[k];
            let max = msg.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let mut sum = 0.0;
            for v in 0..q {
                let pr = (msg[v] - max).exp();
                buf[self.mul[h * q + v] as usize] = pr;
                sum += pr;
            }
            buf.iter_mut().for_each(|x| *x /= sum);
            wht(buf).expect("q is a power of two");
        }
        // prefix[k] = product of transforms 0..k
        st.prefix[0].iter_mut().for_each(|x| *x = 1.0);
        for k in 0..deg {
            let (head, tail) = st.prefix.split_at_mut(k + 1);
            for ((o, a), b) in tail[0].iter_mut().zip(&head[k]).zip(&st.scratch[k]) {
                *o = a * b;
            }
        }
        let mut suffix = vec![1.0; q];
        let mut out = vec![0.0; q];
        for k in (0..deg).rev() {
            let e = lo + k;
            for ((o, a), b) in out.iter_mut().zip(&st.prefix[k]).zip(&suffix) {
                *o = a * b;
            }
            wht(&mut out).expect("q is a power of two");
            let h = self.edge_coeff[e] as usize;
            let msg = &mut st.c2v[e * q..(e + 1) * q];
            for v in 0..q {
                let pr = out[self.mul[h * q + v] as usize] / q as f64;
                msg[v] = pr.max(1e-300).ln();
            }
            normalize_in_place(msg);
            for (s, b) in suffix.iter_mut().zip(&st.scratch[k]) {
                *s *= b;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::galois::FieldTables;
    use crate::qc_code::PolynomialParityCheck;
    use crate::LLR_MAX;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn wht_of_delta_is_all_ones() {
        let mut v = vec![0.0; 16];
        v[0] = 1.0;
        wht(&mut v).unwrap();
        assert!(v.iter().all(|&x| x == 1.0));
        assert_eq!(wht(&mut [0.0; 6]), Err(Error::NotPowerOfTwo(6)));
    }

    #[test]
    fn wht_involution_and_parseval() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for n in [1usize, 2, 8, 64, 256] {
            let x: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
            let mut y = x.clone();
            wht(&mut y).unwrap();
            let e_x: f64 = x.iter().map(|a| a * a).sum();
            let e_y: f64 = y.iter().map(|a| a * a).sum();
            assert!((e_x * n as f64 - e_y).abs() < 1e-9 * e_y.max(1.0));
            wht(&mut y).unwrap();
            for (a, b) in x.iter().zip(&y) {
                assert!((a * n as f64 - b).abs() < 1e-10);
            }
        }
    }

    /// Brute-force marginal of one edge of a single check.
    fn brute_check(f: &FieldTables, coeffs: &[u8], msgs: &[Vec<f64>], target: usize) -> Vec<f64> {
        let q = f.q();
        let others: Vec<usize> = (0..coeffs.len()).filter(|&k| k != target).collect();
        let mut out = vec![0.0; q];
        let total = q.pow(others.len() as u32);
        for idx in 0..total {
            let mut rem = idx;
            let mut acc = 0u8;
            let mut pr = 1.0;
            for &k in &others {
                let v = rem % q;
                rem /= q;
                acc ^= f.mul(coeffs[k], v as u8);
                pr *= msgs[k][v];
            }
            // h_t x_t = acc
            let x = f.div(acc, coeffs[target]).unwrap();
            out[x as usize] += pr;
        }
        let s: f64 = out.iter().sum();
        out.into_iter().map(|x| x / s).collect()
    }

    #[test]
    fn check_node_matches_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for m in [2u32, 3, 4] {
            let f = FieldTables::new(m).unwrap();
            let q = f.q();
            for deg in 2..=4usize {
                if q.pow(deg as u32 - 1) > 5000 {
                    continue;
                }
                let coeffs: Vec<u8> = (0..deg).map(|_| rng.gen_range(1..q as u8)).collect();
                let row: Vec<(u32, u8)> = coeffs.iter().enumerate().map(|(c, &h)| (c as u32, h)).collect();
                let h = QaryParityCheck::from_rows(f.clone(), deg, vec![row]);
                let dec = QspaDecoder::new(h, 1);
                let mut st = dec.new_state();
                let msgs: Vec<Vec<f64>> = (0..deg)
                    .map(|_| {
                        let v: Vec<f64> = (0..q).map(|_| rng.gen_range(0.01..1.0)).collect();
                        let s: f64 = v.iter().sum();
                        v.into_iter().map(|x| x / s).collect()
                    })
                    .collect();
                for (k, msg) in msgs.iter().enumerate() {
                    let logs: Vec<f64> = msg.iter().map(|x| x.ln()).collect();
                    st.v2c[k * q..(k + 1) * q].copy_from_slice(LlrVector::from_log(logs).values());
                }
                dec.check_node(0, &mut st);
                for t in 0..deg {
                    let want = brute_check(&f, &coeffs, &msgs, t);
                    let got = LlrVector::from_log(st.c2v[t * q..(t + 1) * q].to_vec()).probs();
                    for (a, b) in got.iter().zip(&want) {
                        assert!((a - b).abs() < 1e-9, "m={m} deg={deg}");
                    }
                }
            }
        }
    }

    fn small_code() -> PolynomialParityCheck {
        crate::builtin::rate_quarter_example()
    }

    #[test]
    fn certain_metrics_converge_immediately() {
        let code = small_code();
        let enc = code.encoder().unwrap();
        let dec = QspaDecoder::new(code.lift(), 100);
        let cw = enc.encode(&[3, 14, 9]).unwrap();
        let metrics: Vec<LlrVector> = cw.iter().map(|&s| LlrVector::certain(16, s as usize)).collect();
        let out = dec.decode(&metrics);
        assert_eq!(out.status, DecodeStatus::Converged(1));
        assert_eq!(out.symbols, cw);
    }

    #[test]
    fn erased_input_reports_honestly() {
        // All-uniform metrics decide the all-zero word, which is a codeword;
        // tilt one symbol away from zero to make the status meaningful.
        let code = small_code();
        let dec = QspaDecoder::new(code.lift(), 20);
        let metrics = vec![LlrVector::uniform(16); 12];
        let out = dec.decode(&metrics);
        assert!(out.converged());
        assert!(out.symbols.iter().all(|&s| s == 0));
        let mut biased = metrics.clone();
        biased[0] = LlrVector::certain(16, 5);
        let out = dec.decode(&biased);
        let syn_zero = dec.code().is_codeword(&out.symbols);
        assert_eq!(out.converged(), syn_zero);
    }

    #[test]
    fn messages_stay_normalized() {
        let code = small_code();
        let enc = code.encoder().unwrap();
        let dec = QspaDecoder::new(code.lift(), 3);
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let cw = enc.encode(&[1, 2, 3]).unwrap();
        let metrics: Vec<LlrVector> = cw
            .iter()
            .map(|&s| {
                let mut v: Vec<f64> = (0..16).map(|_| rng.gen_range(-3.0..0.0)).collect();
                v[s as usize] += 1.0;
                LlrVector::from_log(v)
            })
            .collect();
        let mut st = dec.new_state();
        let a = dec.decode_with(&metrics, &mut st);
        for chunk in st.c2v.chunks(16).chain(st.v2c.chunks(16)) {
            assert_eq!(chunk[0], 0.0);
            assert!(chunk.iter().all(|&x| x <= LLR_MAX && x.is_finite()));
        }
        let b = dec.decode(&metrics);
        assert_eq!(a, b);
    }
}
