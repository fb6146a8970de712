//! `nbcm`: command-line front end.

mod manifest;

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde_json::json;

use nbcm_core::builtin;
use nbcm_core::gf_spectra::{ensemble_bit_spectrum, ensemble_symbol_spectrum, random_code_spectrum, write_spectrum_csv};
use nbcm_core::harness::{point_seed, run_campaign_with, Simulator};
use nbcm_core::hp_bound::{bicm_limit, bound_curve, SedModel, SpectrumSource};
use nbcm_core::pam_map::Layout;
use nbcm_core::qc_code::symbols_to_bits;
use nbcm_core::sed_spectra::{format_pair_table, format_table, group_sed_mgf, PairModel};
use nbcm_core::{EnsembleConfig, FieldTables, MappingKind, MappingScheme, PolynomialParityCheck, SimConfig, SnrConvention};

use manifest::Manifest;

#[derive(Parser)]
#[command(name = "nbcm", version, about = "Nonbinary QC-LDPC coded modulation toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build GF(2^m) tables and check the field axioms exhaustively.
    FieldCheck {
        /// Extension degrees to check (default 1..=8).
        #[arg(long, value_delimiter = ',')]
        m: Vec<u32>,
    },
    /// Inspect or use a code definition file.
    #[command(subcommand)]
    Code(CodeCommand),
    /// Map code bits or symbols to PAM signals.
    Map(MapArgs),
    /// Monte Carlo FER campaign.
    Simulate(SimulateArgs),
    /// Ensemble distance spectra.
    #[command(subcommand)]
    Spectrum(SpectrumCommand),
    /// Upper bound on ML decoding error over an SNR grid.
    Bound(BoundArgs),
    /// SNR at which the BICM rate reaches a spectral efficiency.
    BicmLimit {
        #[arg(long, value_parser = parse_pam)]
        pam: u32,
        /// Spectral efficiency in bits per PAM signal.
        #[arg(long)]
        eff: f64,
        #[arg(long, default_value = "es_over_sigma2", value_parser = parse_convention)]
        convention: SnrConvention,
    },
    /// Print reference tables.
    #[command(subcommand)]
    Table(TableCommand),
}

#[derive(Subcommand)]
enum CodeCommand {
    /// Parse, lift and check a code definition.
    Validate(CodeSource),
    /// Encode one information word.
    Encode {
        #[command(flatten)]
        source: CodeSource,
        /// Information symbols, space or comma separated.
        #[arg(long, conflicts_with = "seed")]
        info: Option<String>,
        /// Draw a random information word from this seed.
        #[arg(long)]
        seed: Option<u64>,
        /// Print the binary image instead of symbols.
        #[arg(long)]
        bits: bool,
    },
}

#[derive(Args)]
struct CodeSource {
    /// Code definition file, or builtin:desk / builtin:example.
    code: String,
}

#[derive(Args)]
struct SchemeArgs {
    #[arg(long, value_parser = parse_mapping)]
    mapping: MappingKind,
    #[arg(long, value_parser = parse_pam)]
    pam: u32,
}

#[derive(Args)]
struct MapArgs {
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Bits per code symbol.
    #[arg(long)]
    m: u32,
    /// Code symbols, space or comma separated.
    #[arg(long, conflicts_with = "bits", required_unless_present = "bits")]
    symbols: Option<String>,
    /// Code bits as a 0/1 string.
    #[arg(long)]
    bits: Option<String>,
    /// Put a random bit interleaver drawn from this seed in front.
    #[arg(long)]
    interleave_seed: Option<u64>,
}

#[derive(Args)]
struct SimulateArgs {
    /// Key-value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Override one key, e.g. --set snr=10:0.5:12 (repeatable).
    #[arg(long = "set", value_name = "KEY=VALUE")]
    sets: Vec<String>,
    /// CSV output; existing records are resumed.
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
struct EnsembleArgs {
    /// Ensemble file with keys m, K, J or K_list, L.
    #[arg(long)]
    ensemble: PathBuf,
    /// Use the random linear code of the same length and redundancy.
    #[arg(long)]
    random_code: bool,
}

#[derive(Args)]
struct SedArgs {
    #[command(flatten)]
    ensemble: EnsembleArgs,
    #[command(flatten)]
    scheme: SchemeArgs,
    /// Distance grid step.
    #[arg(long, default_value_t = 0.05)]
    step: f64,
    #[arg(long, default_value = "binomial", value_parser = parse_pair_model)]
    pair_model: PairModel,
}

#[derive(Subcommand)]
enum SpectrumCommand {
    /// Symbol (or bit) weight spectrum: weight, log10 count.
    Hamming {
        #[command(flatten)]
        ensemble: EnsembleArgs,
        /// Spectrum of the binary image ensemble.
        #[arg(long)]
        binary: bool,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Squared Euclidean distance spectrum: distance, log10 count.
    Sed {
        #[command(flatten)]
        sed: SedArgs,
        /// Largest distance kept.
        #[arg(long, default_value_t = 100.0)]
        max_delta: f64,
        #[arg(long)]
        out: Option<PathBuf>,
    },
}

#[derive(Args)]
struct BoundArgs {
    #[command(flatten)]
    sed: SedArgs,
    /// SNR grid in dB: a:step:b, a single value, or a comma list.
    #[arg(long)]
    snr: String,
    #[arg(long, default_value = "es_over_sigma2", value_parser = parse_convention)]
    convention: SnrConvention,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum TableCommand {
    /// PAM pair tables and per-group SED generating functions.
    AppendixC {
        /// Print probabilities as exact fractions.
        #[arg(long)]
        exact: bool,
        /// Columns shown for the larger blocks.
        #[arg(long, default_value_t = 6)]
        cols: usize,
    },
}

fn parse_pam(s: &str) -> Result<u32> {
    match s {
        "4" => Ok(2),
        "8" => Ok(3),
        "16" => Ok(4),
        _ => bail!("PAM order must be 4, 8 or 16"),
    }
}

fn parse_mapping(s: &str) -> Result<MappingKind> {
    Ok(s.parse()?)
}

fn parse_convention(s: &str) -> Result<SnrConvention> {
    Ok(s.parse()?)
}

fn parse_pair_model(s: &str) -> Result<PairModel> {
    Ok(s.parse()?)
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>> {
    s.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| t.parse().map_err(|_| anyhow!("bad list entry `{t}`")))
        .collect()
}

fn load_code(spec: &str) -> Result<PolynomialParityCheck> {
    match spec {
        "builtin:desk" => Ok(builtin::desk_code()),
        "builtin:example" => Ok(builtin::rate_quarter_example()),
        path => {
            let text = std::fs::read_to_string(path).with_context(|| format!("reading {path}"))?;
            Ok(PolynomialParityCheck::parse(&text)?)
        }
    }
}

fn load_source(args: &EnsembleArgs) -> Result<(EnsembleConfig, SpectrumSource)> {
    let text = std::fs::read_to_string(&args.ensemble).with_context(|| format!("reading {}", args.ensemble.display()))?;
    let cfg = EnsembleConfig::parse(&text)?;
    let source = if args.random_code {
        SpectrumSource::RandomCode {
            m: cfg.m,
            n_sym: cfg.n_sym(),
            r_bits: cfg.r_sym() * cfg.m as usize,
        }
    } else {
        SpectrumSource::Ensemble(cfg.clone())
    };
    Ok((cfg, source))
}

/// Opens `out` or stdout.
fn sink(out: Option<&Path>) -> Result<Box<dyn Write>> {
    Ok(match out {
        Some(path) => Box::new(BufWriter::new(
            File::create(path).with_context(|| format!("creating {}", path.display()))?,
        )),
        None => Box::new(std::io::stdout().lock()),
    })
}

fn main() -> Result<()> {
    match Cli::parse().command {
        Command::FieldCheck { m } => field_check(&m),
        Command::Code(CodeCommand::Validate(src)) => code_validate(&src.code),
        Command::Code(CodeCommand::Encode {
            source,
            info,
            seed,
            bits,
        }) => code_encode(&source.code, info.as_deref(), seed, bits),
        Command::Map(args) => map(&args),
        Command::Simulate(args) => simulate(&args),
        Command::Spectrum(SpectrumCommand::Hamming { ensemble, binary, out }) => hamming(&ensemble, binary, out.as_deref()),
        Command::Spectrum(SpectrumCommand::Sed { sed, max_delta, out }) => sed_spectrum(&sed, max_delta, out.as_deref()),
        Command::Bound(args) => bound(&args),
        Command::BicmLimit { pam, eff, convention } => {
            println!("{:.3}", bicm_limit(pam, eff, convention)?);
            Ok(())
        }
        Command::Table(TableCommand::AppendixC { exact, cols }) => {
            print!("{}", appendix_c(exact, cols)?);
            Ok(())
        }
    }
}

fn field_check(degrees: &[u32]) -> Result<()> {
    let degrees = if degrees.is_empty() { (1..=8).collect() } else { degrees.to_vec() };
    let mut failed = false;
    for m in degrees {
        let f = FieldTables::new(m)?;
        let q = f.q() as u32;
        let mut problems = Vec::new();
        let powers: std::collections::HashSet<u8> = (0..f.order() as i64).map(|k| f.alpha_pow(k)).collect();
        if powers.len() != f.order() || f.alpha_pow(f.order() as i64) != 1 {
            problems.push("alpha is not primitive".to_string());
        }
        for a in 1..q as u8 {
            if f.mul(a, f.inv(a)?) != 1 {
                problems.push(format!("inverse of {a}"));
            }
        }
        'outer: for a in 0..q as u8 {
            for b in 0..q as u8 {
                if f.mul(a, b) != f.mul(b, a) {
                    problems.push(format!("commutativity at {a},{b}"));
                    break 'outer;
                }
                for c in 0..q as u8 {
                    if f.mul(a, f.add(b, c)) != f.add(f.mul(a, b), f.mul(a, c))
                        || f.mul(a, f.mul(b, c)) != f.mul(f.mul(a, b), c)
                    {
                        problems.push(format!("distributivity or associativity at {a},{b},{c}"));
                        break 'outer;
                    }
                }
            }
        }
        for beta in 1..q as u8 {
            let mat = f.companion(beta)?;
            if (0..q as u8).any(|v| mat.apply(v) != f.mul(beta, v)) || mat.rank() != m as usize {
                problems.push(format!("companion matrix of {beta}"));
            }
        }
        if problems.is_empty() {
            println!("GF(2^{m}) poly {:#x}: ok", f.primitive_poly());
        } else {
            failed = true;
            println!("GF(2^{m}) poly {:#x}: FAILED {}", f.primitive_poly(), problems.join("; "));
        }
    }
    if failed {
        bail!("field check failed");
    }
    Ok(())
}

fn code_validate(spec: &str) -> Result<()> {
    let code = load_code(spec)?;
    let h = code.lift();
    let enc = code.encoder()?;
    let cw = h.column_weights();
    let rw = h.row_weights();
    let span = |v: &[usize]| (v.iter().min().copied().unwrap_or(0), v.iter().max().copied().unwrap_or(0));
    println!("field        GF(2^{}) poly {:#x}", code.field().m(), code.field().primitive_poly());
    println!("base matrix  {} x {}, lifting {}", code.rows(), code.cols(), code.lifting());
    println!("length       {} symbols, {} bits", code.n_sym(), code.n_bits());
    println!("dimension    {} symbols, rate {:.4}", enc.k_sym(), enc.k_sym() as f64 / code.n_sym() as f64);
    println!("column wt    {:?}", span(&cw));
    println!("row wt       {:?}", span(&rw));
    println!("encoder      {}", if enc.is_structured() { "structured" } else { "dense" });
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let q = code.field().q() as u8;
    for _ in 0..8 {
        let info: Vec<u8> = (0..enc.k_sym()).map(|_| rng.gen_range(0..q)).collect();
        if !h.is_codeword(&enc.encode(&info)?) {
            bail!("encoder output fails the parity checks");
        }
    }
    println!("valid");
    Ok(())
}

fn code_encode(spec: &str, info: Option<&str>, seed: Option<u64>, bits: bool) -> Result<()> {
    let code = load_code(spec)?;
    let enc = code.encoder()?;
    let info: Vec<u8> = match (info, seed) {
        (Some(text), _) => parse_list(text)?,
        (None, Some(seed)) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            (0..enc.k_sym()).map(|_| rng.gen_range(0..code.field().q() as u8)).collect()
        }
        (None, None) => bail!("give --info or --seed"),
    };
    let word = enc.encode(&info)?;
    let out: Vec<String> = if bits {
        symbols_to_bits(&word, code.field().m()).iter().map(u8::to_string).collect()
    } else {
        word.iter().map(u8::to_string).collect()
    };
    println!("{}", out.join(if bits { "" } else { " " }));
    Ok(())
}

fn map(args: &MapArgs) -> Result<()> {
    let scheme = MappingScheme::new(args.scheme.mapping, args.m, args.scheme.pam)?;
    let bits: Vec<u8> = match (&args.symbols, &args.bits) {
        (Some(s), _) => symbols_to_bits(&parse_list::<u8>(s)?, args.m),
        (None, Some(b)) => b
            .chars()
            .filter(|c| !c.is_whitespace())
            .map(|c| match c {
                '0' => Ok(0),
                '1' => Ok(1),
                _ => Err(anyhow!("bit string holds `{c}`")),
            })
            .collect::<Result<_>>()?,
        (None, None) => unreachable!("clap requires one of them"),
    };
    if bits.len() % args.m as usize != 0 {
        bail!("{} bits do not form whole {}-bit symbols", bits.len(), args.m);
    }
    let layout = match args.interleave_seed {
        Some(seed) => Layout::interleaved(scheme, bits.len(), seed)?,
        None => Layout::new(scheme, bits.len())?,
    };
    let signals: Vec<String> = layout.map(&bits)?.iter().map(|s| s.value().to_string()).collect();
    println!("{}", signals.join(" "));
    Ok(())
}

fn simulate(args: &SimulateArgs) -> Result<()> {
    let mut cfg = match &args.config {
        Some(path) => SimConfig::parse(&std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?)?,
        None => SimConfig::default(),
    };
    for kv in &args.sets {
        let (k, v) = kv.split_once('=').ok_or_else(|| anyhow!("--set wants KEY=VALUE, got `{kv}`"))?;
        cfg.set(k.trim(), v.trim())?;
    }
    cfg.validate()?;
    let code_spec = cfg.code_file.clone().ok_or_else(|| anyhow!("no code given (key `code`)"))?;
    let code = load_code(&code_spec)?;
    let layout = cfg.layout(code.field().m(), code.n_bits())?;
    let sim = Simulator::new(code.lift(), code.encoder()?, layout, cfg.max_iters)?;

    let seeds: Vec<_> = cfg
        .snrs
        .iter()
        .enumerate()
        .map(|(i, &snr)| json!({ "snr_db": snr, "seed": point_seed(cfg.seed, i) }))
        .collect();
    let mut seed_info = json!({ "master": cfg.seed, "points": seeds });
    if cfg.mapping == MappingKind::Bicm && cfg.interleave {
        seed_info["interleaver"] = json!(nbcm_core::harness::interleaver_seed(cfg.seed));
    }
    let man_path = manifest::path_for(&args.out);
    Manifest::new(serde_json::to_value(&cfg)?, seed_info, &[&args.out]).write(&man_path)?;

    println!("snr_db,frames,block_errors,fer,avg_iterations");
    run_campaign_with(&sim, &cfg, Some(&args.out), |r| {
        println!("{},{},{},{:.6e},{:.3}", r.snr_db, r.frames, r.block_errors, r.fer, r.avg_iterations);
    })?;
    Ok(())
}

fn hamming(args: &EnsembleArgs, binary: bool, out: Option<&Path>) -> Result<()> {
    let (cfg, _) = load_source(args)?;
    let r_bits = cfg.r_sym() * cfg.m as usize;
    let spectrum = match (args.random_code, binary) {
        (false, false) => ensemble_symbol_spectrum(&cfg)?,
        (false, true) => ensemble_bit_spectrum(&cfg)?,
        (true, false) => random_code_spectrum(cfg.n_sym(), r_bits, cfg.q()),
        (true, true) => random_code_spectrum(cfg.n_bits(), r_bits, 2),
    };
    let mut w = sink(out)?;
    write_spectrum_csv(&spectrum, &mut w)?;
    w.flush()?;
    if let Some(path) = out {
        let config = json!({ "ensemble": cfg, "binary": binary, "random_code": args.random_code });
        Manifest::new(config, json!(null), &[path]).write(&manifest::path_for(path))?;
    }
    Ok(())
}

fn sed_model(args: &SedArgs) -> Result<(EnsembleConfig, SedModel)> {
    let (cfg, source) = load_source(&args.ensemble)?;
    let model = SedModel::new(&source, args.scheme.mapping, args.scheme.pam, args.pair_model, args.step)?;
    Ok((cfg, model))
}

fn sed_config(cfg: &EnsembleConfig, args: &SedArgs) -> serde_json::Value {
    json!({
        "ensemble": cfg,
        "random_code": args.ensemble.random_code,
        "mapping": args.scheme.mapping,
        "pam": 1u32 << args.scheme.pam,
        "step": args.step,
        "pair_model": args.pair_model,
    })
}

fn sed_spectrum(args: &SedArgs, max_delta: f64, out: Option<&Path>) -> Result<()> {
    let (cfg, model) = sed_model(args)?;
    let spectrum = model.spectrum(max_delta)?;
    let mut w = sink(out)?;
    spectrum.write_csv(&mut w)?;
    w.flush()?;
    if let Some(path) = out {
        let mut config = sed_config(&cfg, args);
        config["max_delta"] = json!(max_delta);
        Manifest::new(config, json!(null), &[path]).write(&manifest::path_for(path))?;
    }
    Ok(())
}

fn bound(args: &BoundArgs) -> Result<()> {
    let snrs = nbcm_core::harness::parse_snr_grid(&args.snr)?;
    let (cfg, model) = sed_model(&args.sed)?;
    let curve = bound_curve(&model, &snrs, args.convention)?;
    match curve.w0 {
        Some(w0) => eprintln!("sphere radius w0 = {w0:.6} (n = {} signals)", curve.n_dim),
        None => eprintln!("no sphere radius; union bound (n = {} signals)", curve.n_dim),
    }
    let mut w = sink(args.out.as_deref())?;
    writeln!(w, "snr_db,bound")?;
    for (snr, b) in &curve.points {
        writeln!(w, "{snr},{:.12e}", b.value)?;
    }
    w.flush()?;
    if let Some(path) = &args.out {
        let mut config = sed_config(&cfg, &args.sed);
        config["snr_db"] = json!(snrs);
        config["convention"] = json!(args.convention);
        config["w0"] = json!(curve.w0);
        Manifest::new(config, json!(null), &[path]).write(&manifest::path_for(path))?;
    }
    Ok(())
}

/// Pair tables and group generating functions. Larger blocks show the
/// first `cols` of the ten smallest distances of each row.
fn appendix_c(exact: bool, cols: usize) -> Result<String> {
    let mut s = String::new();
    for p in [2, 3] {
        s.push_str(&format!("# {}-PAM pairs: d_H(d_E^2)\n", 1 << p));
        s.push_str(&format_pair_table(p));
        s.push('\n');
    }
    let blocks = [
        ("BICM 4-PAM", MappingKind::Bicm, 2, 2, false),
        ("BICM 8-PAM", MappingKind::Bicm, 3, 3, false),
        ("SICM m=4 4-PAM", MappingKind::Sicm, 4, 2, true),
        ("SICM m=6 8-PAM", MappingKind::Sicm, 6, 3, true),
        ("BPCM/ASCM m=4 8-PAM", MappingKind::Bpcm, 4, 3, true),
    ];
    for (name, kind, m, p, trunc) in blocks {
        let table = group_sed_mgf(&MappingScheme::new(kind, m, p)?)?;
        s.push_str(&format!("# {name}: tau | probabilities | distances\n"));
        if trunc {
            s.push_str(&format_table(&table.truncated(10), Some(cols), exact));
        } else {
            s.push_str(&format_table(&table, None, true));
        }
        s.push('\n');
    }
    Ok(s)
}
