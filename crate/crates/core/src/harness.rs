//! Monte Carlo frame error rate campaigns.
//!
//! Every frame draws its randomness (information word and noise) from its
//! own ChaCha8 stream seeded by a pure function of (master seed, SNR index,
//! frame index), see [`point_seed`] and [`frame_seed`]. Frames run in
//! batches on a worker pool and are tallied in frame order, stopping at the
//! frame that produces the target error count. Results therefore do not
//! depend on the number of workers.

use std::fs::{File, OpenOptions};
use std::io::Write;
use std::path::Path;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::awgn::{sigma_from_snr, transmit, SnrConvention};
use crate::demapper::Demapper;
use crate::error::{Error, Result};
use crate::pam_map::{Layout, MappingKind, MappingScheme};
use crate::qc_code::{symbols_to_bits, Encoder, QaryParityCheck};
use crate::qspa::QspaDecoder;

/// Splitmix64 finalizer.
fn mix(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Seed of SNR point `snr_index`: mix(master ^ mix(snr_index)).
pub fn point_seed(master: u64, snr_index: usize) -> u64 {
    mix(master ^ mix(snr_index as u64))
}

/// Seed of frame `frame` within a point: mix(point ^ mix(frame + 2^63)).
pub fn frame_seed(point: u64, frame: u64) -> u64 {
    mix(point ^ mix(frame ^ (1 << 63)))
}

/// Seed of the BICM bit interleaver.
pub fn interleaver_seed(master: u64) -> u64 {
    mix(master ^ 0x1E7E_41EA_7E00_0000)
}

/// Parses `a:step:b` (inclusive), a single value, or a comma list. An
/// empty string is an empty grid.
pub fn parse_snr_grid(text: &str) -> Result<Vec<f64>> {
    let text = text.trim();
    if text.is_empty() {
        return Ok(Vec::new());
    }
    let num = |t: &str| -> Result<f64> {
        t.trim()
            .parse::<f64>()
            .ok()
            .filter(|v| v.is_finite())
            .ok_or_else(|| Error::Config(format!("bad SNR value `{t}`")))
    };
    let parts: Vec<&str> = text.split(':').collect();
    match parts.as_slice() {
        [a, step, b] => {
            let (a, step, b) = (num(a)?, num(step)?, num(b)?);
            if step <= 0.0 || b < a {
                return Err(Error::Config(format!("bad SNR range `{text}`")));
            }
            let n = ((b - a) / step + 1e-9).floor() as usize;
            Ok((0..=n).map(|i| a + i as f64 * step).collect())
        }
        [_] => text.split(',').map(num).collect(),
        _ => Err(Error::Config(format!("bad SNR grid `{text}`"))),
    }
}

/// Campaign parameters.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct SimConfig {
    /// Code definition file, recorded for the manifest.
    pub code_file: Option<String>,
    pub mapping: MappingKind,
    /// Bits per PAM signal.
    pub p: u32,
    pub snrs: Vec<f64>,
    pub convention: SnrConvention,
    pub max_iters: usize,
    pub target_errors: u64,
    pub max_frames: u64,
    pub seed: u64,
    pub workers: usize,
    /// Frames dispatched per batch.
    pub batch: usize,
    /// Random bit interleaver in front of BICM.
    pub interleave: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            code_file: None,
            mapping: MappingKind::Sicm,
            p: 2,
            snrs: Vec::new(),
            convention: SnrConvention::default(),
            max_iters: 100,
            target_errors: 50,
            max_frames: 10_000_000,
            seed: 1,
            workers: 1,
            batch: 64,
            interleave: true,
        }
    }
}

fn pam_bits(order: &str) -> Result<u32> {
    match order {
        "4" => Ok(2),
        "8" => Ok(3),
        "16" => Ok(4),
        _ => Err(Error::Config(format!("PAM order `{order}` is not 4, 8 or 16"))),
    }
}

impl SimConfig {
    /// Parses `key = value` lines. Keys: code, mapping, pam (4|8|16), snr,
    /// convention, max_iters, target_errors, max_frames, seed, workers,
    /// batch, interleave (true|false). Missing keys keep their defaults.
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (key, value) in parse_key_values(text)? {
            cfg.set(&key, &value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Sets one key, as in [`SimConfig::parse`].
    pub fn set(&mut self, key: &str, value: &str) -> Result<()> {
        fn int<T: std::str::FromStr>(key: &str, v: &str) -> Result<T> {
            v.parse().map_err(|_| Error::Config(format!("`{key}` = `{v}` is not a valid integer")))
        }
        match key {
            "code" => self.code_file = Some(value.to_string()),
            "mapping" => self.mapping = value.parse()?,
            "pam" => self.p = pam_bits(value)?,
            "snr" => self.snrs = parse_snr_grid(value)?,
            "convention" => self.convention = value.parse()?,
            "max_iters" => self.max_iters = int(key, value)?,
            "target_errors" => self.target_errors = int(key, value)?,
            "max_frames" => self.max_frames = int(key, value)?,
            "seed" => self.seed = int(key, value)?,
            "workers" => self.workers = int(key, value)?,
            "batch" => self.batch = int(key, value)?,
            "interleave" => {
                self.interleave = value
                    .parse()
                    .map_err(|_| Error::Config(format!("`interleave` = `{value}` is not true/false")))?
            }
            _ => return Err(Error::Config(format!("unknown key `{key}`"))),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<()> {
        if self.max_iters == 0 || self.target_errors == 0 || self.max_frames == 0 {
            return Err(Error::Config("max_iters, target_errors and max_frames must be positive".into()));
        }
        if self.workers == 0 || self.batch == 0 {
            return Err(Error::Config("workers and batch must be positive".into()));
        }
        if self.snrs.iter().any(|s| !s.is_finite()) {
            return Err(Error::Config("SNR values must be finite".into()));
        }
        Ok(())
    }

    /// Bit layout for a code of `m`-bit symbols and `n_bits` bits.
    pub fn layout(&self, m: u32, n_bits: usize) -> Result<Layout> {
        let scheme = MappingScheme::new(self.mapping, m, self.p)?;
        if self.mapping == MappingKind::Bicm && self.interleave {
            scheme.check_length(n_bits)?;
            Layout::interleaved(scheme, n_bits, interleaver_seed(self.seed))
        } else {
            Layout::new(scheme, n_bits)
        }
    }
}

pub(crate) fn parse_key_values(text: &str) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("line {}: expected key = value", i + 1)))?;
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Outcome of one SNR point.
#[derive(Debug, Clone, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct FerRecord {
    pub snr_db: f64,
    pub frames: u64,
    pub block_errors: u64,
    pub fer: f64,
    /// sqrt(fer (1 - fer) / frames).
    pub fer_std_err: f64,
    pub avg_iterations: f64,
    pub seed: u64,
    pub wall_time_s: f64,
}

impl FerRecord {
    fn check(&self) -> std::result::Result<(), String> {
        if self.block_errors > self.frames || self.frames == 0 {
            return Err(format!("{} errors in {} frames", self.block_errors, self.frames));
        }
        let fer = self.block_errors as f64 / self.frames as f64;
        if (fer - self.fer).abs() > 1e-12 || !self.snr_db.is_finite() {
            return Err(format!("inconsistent record at {} dB", self.snr_db));
        }
        Ok(())
    }
}

/// Encoder, mapping, channel and decoder for one code.
#[derive(Debug, Clone)]
pub struct Simulator {
    encoder: Encoder,
    decoder: QspaDecoder,
    demapper: Demapper,
    m: u32,
}

#[derive(Debug, Clone, Copy)]
struct FrameOutcome {
    error: bool,
    iterations: usize,
}

impl Simulator {
    pub fn new(code: QaryParityCheck, encoder: Encoder, layout: Layout, max_iters: usize) -> Result<Self> {
        let m = code.field().m();
        if layout.scheme().m != m {
            return Err(Error::Config(format!(
                "mapping built for m = {}, code is over GF(2^{m})",
                layout.scheme().m
            )));
        }
        let n_bits = code.n_sym() * m as usize;
        if layout.n_bits() != n_bits || encoder.n_sym() != code.n_sym() {
            return Err(Error::LengthMismatch {
                expected: n_bits,
                got: layout.n_bits(),
            });
        }
        Ok(Self {
            encoder,
            decoder: QspaDecoder::new(code, max_iters),
            demapper: Demapper::new(layout),
            m,
        })
    }

    pub fn decoder(&self) -> &QspaDecoder {
        &self.decoder
    }

    pub fn encoder(&self) -> &Encoder {
        &self.encoder
    }

    pub fn layout(&self) -> &Layout {
        self.demapper.layout()
    }

    fn frame(&self, seed: u64, sigma: f64, state: &mut crate::qspa::DecoderState) -> FrameOutcome {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let q = 1u16 << self.m;
        let info: Vec<u8> = (0..self.encoder.k_sym()).map(|_| rng.gen_range(0..q) as u8).collect();
        let word = self.encoder.encode(&info).expect("info length matches encoder");
        let signals = self
            .layout()
            .map(&symbols_to_bits(&word, self.m))
            .expect("layout length matches code");
        let received = transmit(&signals, sigma, &mut rng);
        let out = self.decoder.decode_with(&self.demapper.metrics(&received, sigma), state);
        FrameOutcome {
            error: out.symbols != word,
            iterations: out.iterations,
        }
    }

    /// Simulates one SNR point until `target_errors` block errors or
    /// `max_frames` frames.
    pub fn run_point(&self, snr_db: f64, snr_index: usize, cfg: &SimConfig) -> Result<FerRecord> {
        cfg.validate()?;
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build()
            .map_err(|e| Error::Config(format!("worker pool: {e}")))?;
        let start = Instant::now();
        let sigma = sigma_from_snr(snr_db, self.layout().scheme().p, cfg.convention);
        let seed = point_seed(cfg.seed, snr_index);
        let (mut frames, mut errors, mut iterations) = (0u64, 0u64, 0u64);
        'outer: while frames < cfg.max_frames {
            let count = (cfg.max_frames - frames).min(cfg.batch as u64);
            let outcomes: Vec<FrameOutcome> = pool.install(|| {
                (frames..frames + count)
                    .into_par_iter()
                    .map_init(
                        || self.decoder.new_state(),
                        |state, f| self.frame(frame_seed(seed, f), sigma, state),
                    )
                    .collect()
            });
            for o in outcomes {
                frames += 1;
                iterations += o.iterations as u64;
                errors += u64::from(o.error);
                if errors >= cfg.target_errors {
                    break 'outer;
                }
            }
        }
        let fer = errors as f64 / frames as f64;
        Ok(FerRecord {
            snr_db,
            frames,
            block_errors: errors,
            fer,
            fer_std_err: (fer * (1.0 - fer) / frames as f64).sqrt(),
            avg_iterations: iterations as f64 / frames as f64,
            seed,
            wall_time_s: start.elapsed().as_secs_f64(),
        })
    }
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> Error {
    Error::Io {
        path: path.display().to_string(),
        msg: e.to_string(),
    }
}

/// Reads a results CSV written by [`run_campaign`].
pub fn read_records(path: &Path) -> Result<Vec<FerRecord>> {
    let corrupt = |msg: String| Error::CorruptResume {
        path: path.display().to_string(),
        msg,
    };
    let mut reader = csv::Reader::from_path(path).map_err(|e| io_err(path, e))?;
    let mut out = Vec::new();
    for row in reader.deserialize::<FerRecord>() {
        let rec = row.map_err(|e| corrupt(e.to_string()))?;
        rec.check().map_err(corrupt)?;
        out.push(rec);
    }
    Ok(out)
}

/// Runs every SNR point of `cfg`, appending each record to `out` as soon
/// as it completes. Points already present in `out` (same SNR and seed)
/// are reused rather than rerun. Returns records in grid order.
pub fn run_campaign(sim: &Simulator, cfg: &SimConfig, out: Option<&Path>) -> Result<Vec<FerRecord>> {
    run_campaign_with(sim, cfg, out, |_| {})
}

/// [`run_campaign`] with a callback after each newly simulated point.
pub fn run_campaign_with(
    sim: &Simulator,
    cfg: &SimConfig,
    out: Option<&Path>,
    mut on_point: impl FnMut(&FerRecord),
) -> Result<Vec<FerRecord>> {
    cfg.validate()?;
    let done = match out {
        Some(path) if path.exists() && std::fs::metadata(path).map_err(|e| io_err(path, e))?.len() > 0 => {
            read_records(path)?
        }
        _ => Vec::new(),
    };
    // Every stored record must belong to this campaign.
    let mut previous: Vec<Option<FerRecord>> = vec![None; cfg.snrs.len()];
    for rec in done {
        let idx = cfg
            .snrs
            .iter()
            .enumerate()
            .position(|(i, &s)| (s - rec.snr_db).abs() < 1e-9 && point_seed(cfg.seed, i) == rec.seed);
        match idx {
            Some(i) if previous[i].is_none() => previous[i] = Some(rec),
            _ => {
                return Err(Error::CorruptResume {
                    path: out.expect("records come from a file").display().to_string(),
                    msg: format!("record at {} dB (seed {}) is not part of this campaign", rec.snr_db, rec.seed),
                })
            }
        }
    }
    let mut writer = match out {
        Some(path) => {
            let fresh = !path.exists() || std::fs::metadata(path).map_err(|e| io_err(path, e))?.len() == 0;
            let file = OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)
                .map_err(|e| io_err(path, e))?;
            Some((path, fresh, file))
        }
        None => None,
    };
    let mut records = Vec::with_capacity(cfg.snrs.len());
    for (i, &snr) in cfg.snrs.iter().enumerate() {
        if let Some(rec) = previous[i].take() {
            records.push(rec);
            continue;
        }
        let rec = sim.run_point(snr, i, cfg)?;
        if let Some((path, fresh, file)) = writer.as_mut() {
            append_record(file, &rec, *fresh).map_err(|e| io_err(path, e))?;
            *fresh = false;
        }
        on_point(&rec);
        records.push(rec);
    }
    Ok(records)
}

fn append_record(file: &mut File, rec: &FerRecord, header: bool) -> std::result::Result<(), Box<dyn std::error::Error>> {
    let mut w = csv::WriterBuilder::new().has_headers(header).from_writer(Vec::new());
    w.serialize(rec)?;
    file.write_all(&w.into_inner()?)?;
    file.sync_data()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grids() {
        assert_eq!(parse_snr_grid("1:0.5:2").unwrap(), vec![1.0, 1.5, 2.0]);
        assert_eq!(parse_snr_grid("3").unwrap(), vec![3.0]);
        assert_eq!(parse_snr_grid("1, 4").unwrap(), vec![1.0, 4.0]);
        assert!(parse_snr_grid("").unwrap().is_empty());
        assert_eq!(parse_snr_grid("0:0.1:1").unwrap().len(), 11);
        assert!(parse_snr_grid("2:1:1").is_err());
        assert!(parse_snr_grid("1:x:2").is_err());
    }

    #[test]
    fn seeds_are_distinct() {
        let mut all: Vec<u64> = (0..20).flat_map(|i| (0..50).map(move |f| frame_seed(point_seed(7, i), f))).collect();
        all.sort_unstable();
        all.dedup();
        assert_eq!(all.len(), 1000);
        assert_ne!(point_seed(7, 0), point_seed(8, 0));
    }

    #[test]
    fn config_parsing() {
        let cfg = SimConfig::parse("mapping = bicm\npam = 8\nsnr = 1:1:3 # dB\nseed = 9\nworkers = 2").unwrap();
        assert_eq!(cfg.mapping, MappingKind::Bicm);
        assert_eq!(cfg.p, 3);
        assert_eq!(cfg.snrs, vec![1.0, 2.0, 3.0]);
        assert_eq!(cfg.max_iters, 100);
        assert_eq!(cfg.target_errors, 50);
        assert!(SimConfig::parse("pam = 32").is_err());
        assert!(SimConfig::parse("colour = red").is_err());
        assert!(SimConfig::parse("target_errors = 0").is_err());
    }
}
