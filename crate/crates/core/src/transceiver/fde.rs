//! Single-carrier modulation with cyclic prefix and frequency-domain
//! zero-forcing equalization.

use num_complex::Complex64;
use rand::Rng;

use crate::beamforming::channel_dft;
use crate::channel::CMat;
use crate::error::{Error, Result};

use super::{check_digital_dims, fft_rows, FrameConfig, LinkSetup};

/// Per-bin effective matrices G(n) = sqrt(k P_T) * DFT{D_BB^H L(l) Q_BB}(n)
/// under the isometric transform convention.
pub fn fde_bin_matrices(
    setup: &LinkSetup,
    q_bb: &CMat,
    d_bb: &CMat,
    k: usize,
) -> Result<Vec<CMat>> {
    let d_bb_h = d_bb.adjoint();
    let t: Vec<CMat> = setup.taps.iter().map(|l| &d_bb_h * l * q_bb).collect();
    let bins = channel_dft(&t, k)?;
    let g = (k as f64 * setup.front_end.transmit_power).sqrt();
    Ok(bins.into_iter().map(|b| b * Complex64::new(g, 0.0)).collect())
}

/// Runs a SCM-FDE frame: cyclic prefix of C M-vectors, digital precoding,
/// transit, CP strip, digital post-coding, per-stream FFT, per-bin ZF,
/// inverse FFT. Returns the M x k soft estimates aligned with `sent`.
pub fn scm_fde_link<R: Rng + ?Sized>(
    frame: &FrameConfig,
    sent: &CMat,
    setup: &LinkSetup,
    q_bb: &CMat,
    d_bb: &CMat,
    rng: &mut R,
) -> Result<CMat> {
    let m = frame.multiplexing;
    let k = frame.block_len;
    let c = frame.cyclic_prefix;
    check_digital_dims(setup, q_bb, d_bb, m)?;
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

    // Transmit slots: [s(k-C) .. s(k-1), s(0) .. s(k-1)], precoded.
    let n_slots = k + c;
    let mut x = CMat::zeros(q_bb.nrows(), n_slots);
    for e in 0..n_slots {
        let idx = (e + k - (c % k)) % k;
        let col = q_bb * sent.column(idx);
        x.set_column(e, &col);
    }
    let out = setup.transit(&x, rng)?;

    // Strip the CP: columns C .. C+k-1 carry the circular convolution.
    let d_bb_h = d_bb.adjoint();
    let mut r = CMat::zeros(m, k);
    for n in 0..k {
        let col = &d_bb_h * out.column(c + n);
        r.set_column(n, &col);
    }

    let r_f = fft_rows(&r, false);
    let bins = fde_bin_matrices(setup, q_bb, d_bb, k)?;
    let mut s_f = CMat::zeros(m, k);
    for (n, g) in bins.iter().enumerate() {
        let inv = g
            .clone()
            .lu()
            .solve(&r_f.column(n).into_owned())
            .ok_or(Error::SingularBin(n))?;
        s_f.set_column(n, &inv.column(0));
    }
    Ok(fft_rows(&s_f, true))
}
