//! Link quality metrics: mismatched-decoding mutual information through a
//! fitted per-stream Gaussian auxiliary channel, achievable spectral
//! efficiency, and uncoded bit error rate.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::channel::CMat;
use crate::constellation::Constellation;
use crate::error::{Error, Result};

/// Per-stream auxiliary channel law: soft = c * sent + CN(0, sigma2).
#[derive(Debug, Clone)]
pub struct AuxChannelFit {
    pub gains: Vec<Complex64>,
    pub variances: Vec<f64>,
}

/// Fits the diagonal Gaussian auxiliary law per stream: c_m is the
/// least-squares gain, sigma2_m the residual power (ISI, cross-stream
/// interference and noise folded together).
pub fn fit_aux_channel(sent: &CMat, soft: &CMat) -> Result<AuxChannelFit> {
    if sent.shape() != soft.shape() {
        return Err(Error::DimensionMismatch(format!(
            "sent is {:?}, soft is {:?}",
            sent.shape(),
            soft.shape()
        )));
    }
    let n = sent.ncols();
    if n < 1000 {
        return Err(Error::TooFewSamples {
            needed: 1000,
            got: n,
        });
    }
    let mut gains = Vec::with_capacity(sent.nrows());
    let mut variances = Vec::with_capacity(sent.nrows());
    for m in 0..sent.nrows() {
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for i in 0..n {
            num += soft[(m, i)] * sent[(m, i)].conj();
            den += sent[(m, i)].norm_sqr();
        }
        let c = if den > 0.0 {
            num / den
        } else {
            Complex64::new(0.0, 0.0)
        };
        let mut resid = 0.0;
        for i in 0..n {
            resid += (soft[(m, i)] - c * sent[(m, i)]).norm_sqr();
        }
        gains.push(c);
        variances.push(resid / n as f64);
    }
    Ok(AuxChannelFit { gains, variances })
}

/// Mismatched mutual information of the fitted Gaussian auxiliary channel,
/// in bits per channel use:
/// I = log2|A| - E[log2 sum_s' exp((|z|^2 - |c(s - s') + z|^2) / sigma2)],
/// averaged over uniform s and z ~ CN(0, sigma2). Clamped to [0, log2|A|].
pub fn mi_mismatched<R: Rng + ?Sized>(
    constellation: &Constellation,
    c: Complex64,
    sigma2: f64,
    mc_samples: usize,
    rng: &mut R,
) -> f64 {
    let bits = constellation.bits_per_symbol as f64;
    if sigma2 <= 0.0 {
        return bits;
    }
    let points = &constellation.points;
    let size = points.len();
    let sigma = (sigma2 / 2.0).sqrt();
    let ln2 = std::f64::consts::LN_2;
    let mut acc = 0.0;
    for i in 0..mc_samples {
        let s = points[i % size];
        let z = Complex64::new(
            sigma * rng.sample::<f64, _>(StandardNormal),
            sigma * rng.sample::<f64, _>(StandardNormal),
        );
        let z2 = z.norm_sqr();
        // log-sum-exp over the alphabet.
        let mut max = f64::NEG_INFINITY;
        let mut exps = [0.0f64; 64];
        for (j, &sp) in points.iter().enumerate() {
            let d = c * (s - sp) + z;
            let e = (z2 - d.norm_sqr()) / sigma2;
            exps[j] = e;
            if e > max {
                max = e;
            }
        }
        let mut sum = 0.0;
        for &e in exps.iter().take(size) {
            sum += (e - max).exp();
        }
        acc += (max + sum.ln()) / ln2;
    }
    let penalty = acc / mc_samples as f64;
    (bits - penalty).clamp(0.0, bits)
}

/// Achievable spectral efficiency in bit/s/Hz:
/// ASE = (sum of per-stream MI) / (T_s W) * cp_factor * edge_factor.
pub fn ase(per_stream_mi: &[f64], t_s: f64, bandwidth: f64, cp_factor: f64, edge_factor: f64) -> f64 {
    assert!(cp_factor > 0.0 && cp_factor <= 1.0);
    assert!(edge_factor > 0.0 && edge_factor <= 1.0);
    let total: f64 = per_stream_mi.iter().sum();
    total / (t_s * bandwidth) * cp_factor * edge_factor
}

/// Global energy efficiency in bit/Joule:
/// GEE = W * ASE / (beta P_T + P_TX,c + P_RX,c).
pub fn gee(ase_value: f64, bandwidth: f64, p_t: f64, beta: f64, p_tx_c: f64, p_rx_c: f64) -> f64 {
    let den = beta * p_t + p_tx_c + p_rx_c;
    assert!(den > 0.0);
    bandwidth * ase_value / den
}

/// Uncoded bit error rate with its binomial standard error.
pub fn uncoded_ber(sent_bits: &[bool], demapped_bits: &[bool]) -> Result<(f64, f64)> {
    if sent_bits.len() != demapped_bits.len() {
        return Err(Error::DimensionMismatch(format!(
            "bit streams of length {} and {}",
            sent_bits.len(),
            demapped_bits.len()
        )));
    }
    let n = sent_bits.len();
    if n == 0 {
        return Err(Error::TooFewSamples { needed: 1, got: 0 });
    }
    let errors = sent_bits
        .iter()
        .zip(demapped_bits)
        .filter(|(a, b)| a != b)
        .count();
    let p = errors as f64 / n as f64;
    let se = (p * (1.0 - p) / n as f64).sqrt();
    Ok((p, se))
}
