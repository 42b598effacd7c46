//! Receiver thermal noise: independent across antennas, correlated in time
//! through the receive shaping filter.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::channel::CMat;
use crate::error::{Error, Result};
use crate::pulse::MatchedPulse;

const BOLTZMANN_NOISE_FLOOR_DBM_HZ: f64 = -174.0;

/// Noise statistics at the matched-filter output.
///
/// `correlation[l]` is the target E[w(n) w*(n-l)] at symbol lag l; lags
/// beyond the stored span are zero (the receive filter has finite support).
/// When built from a pulse, the model also keeps the oversampled receive
/// filter so that samples can be generated exactly by filtering white noise.
#[derive(Debug, Clone)]
pub struct NoiseModel {
    pub correlation: Vec<f64>,
    /// (scaled receive filter taps, oversampling factor) for the exact
    /// filtered-noise generator.
    filter: Option<(Vec<f64>, usize)>,
}

impl NoiseModel {
    /// Builds the model from the noise PSD and the receive pulse:
    /// E[w(n) w*(n-l)] = 2 N_0 r_hRX(l T_s), with the receive filter carrying
    /// unit passband gain so that r_hRX(0) = 1/T_s.
    pub fn new(n0: f64, symbol_interval: f64, pulse: &MatchedPulse) -> Self {
        let span = pulse.one_filter_span_taps() as i64;
        let variance = 2.0 * n0 / symbol_interval;
        let correlation = (0..span)
            .map(|l| variance * pulse.rx_autocorr_at_lag(l))
            .collect();
        let scale = variance.sqrt();
        let taps = pulse.taps().iter().map(|&h| h * scale).collect();
        Self {
            correlation,
            filter: Some((taps, pulse.oversampling())),
        }
    }

    /// Ideal white model with per-sample variance sigma2.
    pub fn white(sigma2: f64) -> Self {
        Self {
            correlation: vec![sigma2],
            filter: None,
        }
    }

    /// Direct construction from a correlation sequence (sampled via a
    /// Toeplitz square root).
    pub fn from_correlation(correlation: Vec<f64>) -> Self {
        assert!(!correlation.is_empty());
        Self {
            correlation,
            filter: None,
        }
    }

    /// N_0 = kT * 10^(NF/10) with kT = -174 dBm/Hz.
    pub fn n0_from_noise_figure(noise_figure_db: f64) -> f64 {
        1e-3 * 10f64.powf((BOLTZMANN_NOISE_FLOOR_DBM_HZ + noise_figure_db) / 10.0)
    }

    pub fn variance(&self) -> f64 {
        self.correlation[0]
    }

    pub fn correlation_at(&self, lag: usize) -> f64 {
        self.correlation.get(lag).copied().unwrap_or(0.0)
    }
}

fn white_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| {
        let re: f64 = StandardNormal.sample(rng);
        let im: f64 = StandardNormal.sample(rng);
        Complex64::new(re, im) / 2f64.sqrt()
    })
}

/// Draws an (antennas x symbols) matrix of circular Gaussian noise with
/// independent rows and the model's Toeplitz correlation along each row.
///
/// Pulse-derived models filter oversampled white noise with the receive
/// taps (exact, since the stored correlation is the discrete filter
/// autocorrelation); bare correlation models use a symmetric square root of
/// the Toeplitz matrix.
pub fn sample_noise<R: Rng + ?Sized>(
    n_antennas: usize,
    n_symbols: usize,
    noise: &NoiseModel,
    rng: &mut R,
) -> Result<CMat> {
    if let Some((taps, over)) = &noise.filter {
        let len = taps.len();
        let v = white_matrix(n_antennas, n_symbols * over + len, rng);
        let mut out = CMat::zeros(n_antennas, n_symbols);
        for n in 0..n_symbols {
            for (i, &h) in taps.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                let src = n * over + i;
                for r in 0..n_antennas {
                    out[(r, n)] += v[(r, src)] * h;
                }
            }
        }
        return Ok(out);
    }
    let white = white_matrix(n_antennas, n_symbols, rng);
    if noise.correlation.len() == 1 {
        return Ok(white * Complex64::new(noise.correlation[0].sqrt(), 0.0));
    }
    let factor = toeplitz_sqrt(noise, n_symbols)?;
    let factor_c = factor.map(|v| Complex64::new(v, 0.0));
    // The factor is symmetric, so right-multiplying each row works.
    Ok(white * factor_c)
}

/// Symmetric PSD square root of the banded Toeplitz correlation matrix.
fn toeplitz_sqrt(noise: &NoiseModel, n: usize) -> Result<DMatrix<f64>> {
    let toeplitz = DMatrix::from_fn(n, n, |i, j| {
        let lag = i.abs_diff(j);
        noise.correlation_at(lag)
    });
    let eig = nalgebra::linalg::SymmetricEigen::new(toeplitz);
    let max = eig.eigenvalues.iter().cloned().fold(0.0f64, f64::max);
    let mut sqrt_vals = eig.eigenvalues.clone();
    for v in sqrt_vals.iter_mut() {
        if *v < -1e-9 * max {
            return Err(Error::IndefiniteNoiseCorrelation);
        }
        *v = v.max(0.0).sqrt();
    }
    let mut scaled = eig.eigenvectors.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= sqrt_vals[j];
    }
    Ok(&scaled * eig.eigenvectors.transpose())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseShape;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn lag_correlation(w: &CMat, lag: usize) -> f64 {
        let n = w.ncols();
        let mut acc = Complex64::new(0.0, 0.0);
        let mut count = 0usize;
        for a in 0..w.nrows() {
            for i in lag..n {
                acc += w[(a, i)] * w[(a, i - lag)].conj();
                count += 1;
            }
        }
        (acc / count as f64).re
    }

    #[test]
    fn white_noise_is_uncorrelated() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let model = NoiseModel::white(1.0);
        let w = sample_noise(100, 1000, &model, &mut rng).unwrap();
        let c0 = lag_correlation(&w, 0);
        let c1 = lag_correlation(&w, 1);
        // Standard error of the lag-1 estimate is ~1/sqrt(N).
        let se = 1.0 / (1e5f64).sqrt();
        assert!((c0 - 1.0).abs() < 3.0 * se, "c0 = {}", c0);
        assert!(c1.abs() < 3.0 * se, "c1 = {}", c1);
    }

    #[test]
    fn srrc_noise_matches_pulse_autocorr() {
        let pulse = MatchedPulse::new(
            PulseShape::Srrc {
                rolloff: 0.22,
                span_symbols: 4,
            },
            8,
        );
        let model = NoiseModel::new(0.5, 1.0, &pulse);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let w = sample_noise(200, 512, &model, &mut rng).unwrap();
        let c0 = lag_correlation(&w, 0);
        let se = model.variance() / (1e5f64).sqrt();
        for lag in 0..4usize {
            let c = lag_correlation(&w, lag);
            let target = model.correlation_at(lag);
            assert!(
                (c - target).abs() < 3.0 * se,
                "lag {}: {} vs {}",
                lag,
                c,
                target
            );
        }
        let ratio = lag_correlation(&w, 1) / c0;
        let expected = pulse.rx_autocorr_at_lag(1) / pulse.rx_autocorr_at_lag(0);
        assert!((ratio - expected).abs() < 0.02, "{} vs {}", ratio, expected);
    }

    #[test]
    fn toeplitz_path_matches_filtered_path_statistics() {
        // The bare-correlation fallback realizes the same covariance as the
        // exact filtered generator.
        let pulse = MatchedPulse::new(
            PulseShape::Srrc {
                rolloff: 0.22,
                span_symbols: 4,
            },
            8,
        );
        let full = NoiseModel::new(0.5, 1.0, &pulse);
        let bare = NoiseModel::from_correlation(full.correlation.clone());
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let w = sample_noise(300, 256, &bare, &mut rng).unwrap();
        let se = full.variance() / (7e4f64).sqrt();
        for lag in 0..3usize {
            let c = lag_correlation(&w, lag);
            assert!(
                (c - full.correlation_at(lag)).abs() < 3.0 * se,
                "lag {}: {} vs {}",
                lag,
                c,
                full.correlation_at(lag)
            );
        }
    }

    #[test]
    fn cross_antenna_independence() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let model = NoiseModel::white(1.0);
        let w = sample_noise(2, 100_000, &model, &mut rng).unwrap();
        let n = w.ncols();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            acc += w[(0, i)] * w[(1, i)].conj();
        }
        let c = (acc / n as f64).norm();
        assert!(c < 3.0 / (n as f64).sqrt(), "cross correlation {}", c);
    }
}
