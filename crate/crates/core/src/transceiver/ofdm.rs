//! MIMO-OFDM with per-subcarrier precoding and zero-forcing detection.

use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::channel_dft;
use crate::channel::CMat;
use crate::error::{Error, Result};

use super::tde::pseudo_inverse;
use super::{fft_rows, FrameConfig, LinkSetup};

/// Per-bin effective matrices G(n) = sqrt(k P_T) D_BB^H(n) L_bar(n) Q_BB(n),
/// where L_bar is the isometric DFT of the effective taps.
pub fn ofdm_bin_matrices(
    setup: &LinkSetup,
    q_bb: &[CMat],
    d_bb: &[CMat],
    k: usize,
) -> Result<Vec<CMat>> {
    if q_bb.len() != k || d_bb.len() != k {
        return Err(Error::DimensionMismatch(format!(
            "expected {} per-bin beamformers, got {} / {}",
            k,
            q_bb.len(),
            d_bb.len()
        )));
    }
    let bins = channel_dft(&setup.taps, k)?;
    let g = (k as f64 * setup.front_end.transmit_power).sqrt();
    Ok((0..k)
        .map(|n| d_bb[n].adjoint() * &bins[n] * &q_bb[n] * Complex64::new(g, 0.0))
        .collect())
}

/// Runs one OFDM frame: per-bin precoding of the frequency-domain symbols,
/// entry-wise IFFT, cyclic prefix of C vectors, front-end transit, CP strip,
/// FFT, per-bin post-coding and ZF pseudo-inverse detection. Returns the
/// M x k soft estimates aligned with `sent` (frequency-domain symbols).
pub fn ofdm_link<R: Rng + ?Sized>(
    frame: &FrameConfig,
    sent: &CMat,
    setup: &LinkSetup,
    q_bb: &[CMat],
    d_bb: &[CMat],
    rng: &mut R,
) -> Result<CMat> {
    let m = frame.multiplexing;
    let k = frame.block_len;
    let c = frame.cyclic_prefix;
    if sent.nrows() != m || sent.ncols() != k {
        return Err(Error::DimensionMismatch(format!(
            "sent is {}x{}, expected {}x{}",
            sent.nrows(),
            sent.ncols(),
            m,
            k
        )));
    }
    let p_tilde = setup.p_tilde();
    if c + 1 < p_tilde {
        return Err(Error::InvalidConfig(format!(
            "cyclic prefix of {} vectors does not cover channel memory {}",
            c, p_tilde
        )));
    }
    if k < p_tilde {
        return Err(Error::InvalidConfig(format!(
            "FFT size {} smaller than channel memory {}",
            k, p_tilde
        )));
    }
    let n_tx_rf = setup.taps[0].ncols();

    // Per-bin precoding, then entry-wise IFFT to time domain.
    let mut x_f = CMat::zeros(n_tx_rf, k);
    for n in 0..k {
        if q_bb[n].nrows() != n_tx_rf || q_bb[n].ncols() != m {
            return Err(Error::DimensionMismatch(format!(
                "Q_BB({}) is {}x{}, expected {}x{}",
                n,
                q_bb[n].nrows(),
                q_bb[n].ncols(),
                n_tx_rf,
                m
            )));
        }
        let col = &q_bb[n] * sent.column(n);
        x_f.set_column(n, &col);
    }
    let x_t = fft_rows(&x_f, true);

    // Cyclic prefix: last C columns prepended.
    let mut x = CMat::zeros(n_tx_rf, k + c);
    for e in 0..k + c {
        x.set_column(e, &x_t.column((e + k - (c % k)) % k));
    }
    let out = setup.transit(&x, rng)?;

    // Strip, transform, post-code and invert per bin.
    let n_rx_rf = setup.taps[0].nrows();
    let mut y = CMat::zeros(n_rx_rf, k);
    for n in 0..k {
        y.set_column(n, &out.column(c + n));
    }
    let y_f = fft_rows(&y, false);
    let bins = ofdm_bin_matrices(setup, q_bb, d_bb, k)?;
    let mut soft = CMat::zeros(m, k);
    for n in 0..k {
        let z = d_bb[n].adjoint() * y_f.column(n);
        let g = &bins[n];
        let max_sv = g.clone().svd(false, false).singular_values[0];
        if !(max_sv.is_finite()) || max_sv < 1e-300 {
            return Err(Error::SingularBin(n));
        }
        let est = pseudo_inverse(g) * z;
        soft.set_column(n, &est);
    }
    Ok(soft)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chain::FrontEnd;
    use crate::pulse::{MatchedPulse, PulseShape};
    use crate::transceiver::fde::scm_fde_link;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rc<R: rand::Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn linear_setup(taps: Vec<CMat>, n_rx: usize, power: f64) -> LinkSetup {
        let pulse = MatchedPulse::new(PulseShape::Rect, 4);
        LinkSetup::from_taps(
            taps,
            CMat::identity(n_rx, n_rx),
            FrontEnd::ideal(pulse, power),
            None,
        )
    }

    #[test]
    fn noiseless_recovery_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let k = 16;
        let m = 2;
        let taps: Vec<CMat> = (0..3).map(|_| rc(m, m, &mut rng)).collect();
        let setup = linear_setup(taps, m, 3.0);
        let frame = FrameConfig {
            multiplexing: m,
            block_len: k,
            cyclic_prefix: 4,
        };
        let sent = rc(m, k, &mut rng);
        let id = vec![CMat::identity(m, m); k];
        let soft = ofdm_link(&frame, &sent, &setup, &id, &id, &mut rng).unwrap();
        assert!((&soft - &sent).norm() < 1e-8);
    }

    #[test]
    fn flat_channel_matches_fde() {
        // Single-tap channel with identity per-bin beamformers: OFDM output
        // equals SCM-FDE on the FFT of the same symbols.
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let k = 16;
        let m = 2;
        let taps = vec![rc(m, m, &mut rng)];
        let sent = rc(m, k, &mut rng);
        let id = CMat::identity(m, m);
        let ids = vec![id.clone(); k];
        let frame = FrameConfig {
            multiplexing: m,
            block_len: k,
            cyclic_prefix: 2,
        };
        let setup = linear_setup(taps.clone(), m, 1.0);
        let mut r1 = ChaCha8Rng::seed_from_u64(1);
        let ofdm = ofdm_link(&frame, &sent, &setup, &ids, &ids, &mut r1).unwrap();
        let setup2 = linear_setup(taps, m, 1.0);
        // FDE transmits the IFFT of the OFDM frequency symbols.
        let time = fft_rows(&sent, true);
        let mut r2 = ChaCha8Rng::seed_from_u64(1);
        let fde = scm_fde_link(&frame, &time, &setup2, &id, &id, &mut r2).unwrap();
        let fde_f = fft_rows(&fde, false);
        assert!((&ofdm - &fde_f).norm() < 1e-8);
    }

    #[test]
    fn bin_matrices_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let k = 8;
        let taps: Vec<CMat> = (0..3).map(|_| rc(3, 4, &mut rng)).collect();
        let setup = linear_setup(taps.clone(), 3, 1.0);
        let q: Vec<CMat> = (0..k).map(|_| rc(4, 2, &mut rng)).collect();
        let d: Vec<CMat> = (0..k).map(|_| rc(3, 2, &mut rng)).collect();
        let bins = ofdm_bin_matrices(&setup, &q, &d, k).unwrap();
        let scale = (k as f64).sqrt();
        for n in 0..k {
            let mut h = CMat::zeros(3, 4);
            for (l, tap) in taps.iter().enumerate() {
                let w = Complex64::from_polar(
                    1.0,
                    -2.0 * std::f64::consts::PI * (n * l) as f64 / k as f64,
                );
                h += tap * w;
            }
            h /= Complex64::new(scale, 0.0);
            let want = d[n].adjoint() * h * &q[n] * Complex64::new(scale, 0.0);
            assert!((&bins[n] - &want).norm() < 1e-9, "bin {}", n);
        }
    }
}
