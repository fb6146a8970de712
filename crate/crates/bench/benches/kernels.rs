use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, Criterion};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use nbcm_core::awgn::{sigma_from_snr, transmit};
use nbcm_core::builtin;
use nbcm_core::demapper::Demapper;
use nbcm_core::gf_spectra::{ensemble_symbol_spectrum, poly_power, row_cgf};
use nbcm_core::pam_map::Layout;
use nbcm_core::qc_code::symbols_to_bits;
use nbcm_core::qspa::{wht, QspaDecoder};
use nbcm_core::sed_spectra::group_sed_mgf;
use nbcm_core::{MappingKind, MappingScheme, SnrConvention};

fn bench_wht(c: &mut Criterion) {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    for q in [16usize, 64, 256] {
        let v: Vec<f64> = (0..q).map(|_| rng.gen()).collect();
        c.bench_function(&format!("wht q={q}"), |b| {
            b.iter_batched(|| v.clone(), |mut x| wht(black_box(&mut x)), BatchSize::SmallInput)
        });
    }
}

fn bench_decoder(c: &mut Criterion) {
    let code = builtin::desk_code();
    let h = code.lift();
    let enc = code.encoder().unwrap();
    let layout = Layout::new(MappingScheme::new(MappingKind::Sicm, 4, 2).unwrap(), code.n_bits()).unwrap();
    let demap = Demapper::new(layout.clone());
    let dec = QspaDecoder::new(h, 100);
    let mut rng = ChaCha8Rng::seed_from_u64(2);
    let sigma = sigma_from_snr(11.0, 2, SnrConvention::EsOverSigma2);
    let info: Vec<u8> = (0..enc.k_sym()).map(|_| rng.gen_range(0..16)).collect();
    let signals = layout.map(&symbols_to_bits(&enc.encode(&info).unwrap(), 4)).unwrap();
    let metrics = demap.metrics(&transmit(&signals, sigma, &mut rng), sigma);
    c.bench_function("decode 576-bit frame at 11 dB", |b| b.iter(|| dec.decode(black_box(&metrics))));
    c.bench_function("demap 576-bit frame", |b| {
        let rx = transmit(&signals, sigma, &mut rng);
        b.iter(|| demap.metrics(black_box(&rx), sigma))
    });
}

fn bench_spectra(c: &mut Criterion) {
    let row = row_cgf(12, 12, 16).unwrap();
    c.bench_function("log poly power L=42", |b| b.iter(|| poly_power(black_box(&row), 42)));
    let ens = builtin::desk_ensemble();
    c.bench_function("desk ensemble symbol spectrum", |b| b.iter(|| ensemble_symbol_spectrum(black_box(&ens))));
}

fn bench_group_table(c: &mut Criterion) {
    let mut g = c.benchmark_group("group table");
    g.sample_size(10);
    for (kind, m, p) in [(MappingKind::Sicm, 4, 2), (MappingKind::Sicm, 6, 3), (MappingKind::Bpcm, 4, 3)] {
        let scheme = MappingScheme::new(kind, m, p).unwrap();
        g.bench_function(format!("{kind} m={m} p={p}"), |b| b.iter(|| group_sed_mgf(black_box(&scheme))));
    }
    g.finish();
}

criterion_group!(benches, bench_wht, bench_decoder, bench_spectra, bench_group_table);
criterion_main!(benches);
