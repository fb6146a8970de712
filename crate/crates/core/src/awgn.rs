//! Real AWGN channel, one noise sample per PAM component.

use rand::Rng;
use rand_distr::{Distribution, Normal};

use crate::pam_map::{average_energy, PamSignal};

/// How an SNR in dB maps to a noise variance.
///
/// The default `EsOverSigma2` reads the SNR as Es / sigma^2 with Es the
/// average PAM energy. Since N0 = 2 sigma^2 per real dimension, this is the
/// same as the Es/N0 of the complex QAM symbol formed by two PAM
/// components. `EsOverN0` is Es/N0 per real component.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SnrConvention {
    #[default]
    EsOverSigma2,
    EsOverN0,
}

impl SnrConvention {
    fn divisor(self) -> f64 {
        match self {
            SnrConvention::EsOverSigma2 => 1.0,
            SnrConvention::EsOverN0 => 2.0,
        }
    }
}

impl std::str::FromStr for SnrConvention {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s {
            "es_over_sigma2" | "es/sigma2" => Ok(SnrConvention::EsOverSigma2),
            "es_over_n0" | "es/n0" => Ok(SnrConvention::EsOverN0),
            _ => Err(crate::Error::Config(format!("unknown SNR convention `{s}`"))),
        }
    }
}

/// Noise variance for an SNR in dB on 2^p-PAM.
pub fn sigma2_from_snr(snr_db: f64, p: u32, conv: SnrConvention) -> f64 {
    average_energy(p) / (conv.divisor() * 10f64.powf(snr_db / 10.0))
}

pub fn sigma_from_snr(snr_db: f64, p: u32, conv: SnrConvention) -> f64 {
    sigma2_from_snr(snr_db, p, conv).sqrt()
}

/// Inverse of [`sigma_from_snr`].
pub fn snr_from_sigma(sigma: f64, p: u32, conv: SnrConvention) -> f64 {
    10.0 * (average_energy(p) / (conv.divisor() * sigma * sigma)).log10()
}

#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ChannelConfig {
    pub snr_db: f64,
    /// Bits per PAM signal.
    pub p: u32,
    pub convention: SnrConvention,
}

impl ChannelConfig {
    pub fn new(snr_db: f64, p: u32) -> Self {
        Self {
            snr_db,
            p,
            convention: SnrConvention::default(),
        }
    }

    pub fn es(&self) -> f64 {
        average_energy(self.p)
    }

    pub fn sigma2(&self) -> f64 {
        sigma2_from_snr(self.snr_db, self.p, self.convention)
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2().sqrt()
    }

    pub fn n0(&self) -> f64 {
        2.0 * self.sigma2()
    }
}

/// r_t = y_t + n_t with n_t i.i.d. N(0, sigma^2).
pub fn transmit<R: Rng + ?Sized>(signals: &[PamSignal], sigma: f64, rng: &mut R) -> Vec<f64> {
    if sigma == 0.0 {
        return signals.iter().map(|s| f64::from(s.value())).collect();
    }
    let normal = Normal::new(0.0, sigma).expect("finite positive sigma");
    signals
        .iter()
        .map(|s| f64::from(s.value()) + normal.sample(rng))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn es_for_four_pam() {
        assert_eq!(ChannelConfig::new(0.0, 2).es(), 5.0);
    }

    #[test]
    fn high_snr_vanishing_noise() {
        assert!(sigma_from_snr(300.0, 2, SnrConvention::EsOverN0) < 1e-14);
    }

    #[test]
    fn snr_round_trip() {
        for conv in [SnrConvention::EsOverN0, SnrConvention::EsOverSigma2] {
            for p in 1..=4 {
                for i in -20..40 {
                    let snr = f64::from(i) * 0.75;
                    let s = sigma_from_snr(snr, p, conv);
                    assert!((snr_from_sigma(s, p, conv) - snr).abs() < 1e-10);
                }
            }
        }
        // Es/N0 with N0 = 2 sigma^2
        let c = ChannelConfig {
            snr_db: 7.0,
            p: 3,
            convention: SnrConvention::EsOverN0,
        };
        assert!((10.0 * (c.es() / c.n0()).log10() - 7.0).abs() < 1e-12);
        let d = ChannelConfig::new(7.0, 3);
        assert!((10.0 * (d.es() / d.sigma2()).log10() - 7.0).abs() < 1e-12);
    }

    #[test]
    fn zero_sigma_is_identity() {
        let sig = [PamSignal::new(3, 2).unwrap(), PamSignal::new(-1, 2).unwrap()];
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(transmit(&sig, 0.0, &mut rng), vec![3.0, -1.0]);
    }

    #[test]
    fn noise_statistics() {
        let n = 1_000_000;
        let sigma = 0.7;
        let sig = vec![PamSignal::new(1, 2).unwrap(); n];
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let r = transmit(&sig, sigma, &mut rng);
        let noise: Vec<f64> = r.iter().map(|x| x - 1.0).collect();
        let mean = noise.iter().sum::<f64>() / n as f64;
        let var = noise.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1) as f64;
        assert!(mean.abs() < 4.0 * sigma / (n as f64).sqrt());
        assert!((var / (sigma * sigma) - 1.0).abs() < 0.01);
    }

    #[test]
    fn reproducible_per_seed() {
        let sig = vec![PamSignal::new(-3, 2).unwrap(); 100];
        let a = transmit(&sig, 1.0, &mut ChaCha8Rng::seed_from_u64(7));
        let b = transmit(&sig, 1.0, &mut ChaCha8Rng::seed_from_u64(7));
        let bytes = |v: &[f64]| v.iter().flat_map(|x| x.to_le_bytes()).collect::<Vec<u8>>();
        assert_eq!(bytes(&a), bytes(&b));
    }
}
