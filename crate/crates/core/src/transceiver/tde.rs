//! Single-carrier modulation with time-domain block zero-forcing
//! equalization.

use num_complex::Complex64;
use rand::Rng;

use crate::channel::CMat;
use crate::error::{Error, Result};

use super::{check_digital_dims, FrameConfig, LinkSetup};

/// Builds the stacked observation model: with the window
/// [r(n + P_tilde - 1); ...; r(n)] = A [s(n + P_tilde - 1); ...;
/// s(n - P_tilde + 1)] + B [w(n + P_tilde - 1); ...; w(n)],
/// block (i, j) of A is D_BB^H L(j - i) Q_BB when 0 <= j - i <= P_tilde - 1
/// and zero otherwise, and B = I kron D_BB^H.
pub fn build_block_model(
    taps: &[CMat],
    d_bb: &CMat,
    q_bb: &CMat,
) -> (CMat, CMat) {
    let p_tilde = taps.len();
    let m = q_bb.ncols();
    let n_rx_rf = d_bb.nrows();
    let d_bb_h = d_bb.adjoint();
    let t: Vec<CMat> = taps.iter().map(|l| &d_bb_h * l * q_bb).collect();

    let mut a = CMat::zeros(m * p_tilde, m * (2 * p_tilde - 1));
    for i in 0..p_tilde {
        for l in 0..p_tilde {
            let j = i + l;
            a.view_mut((i * m, j * m), (m, m)).copy_from(&t[l]);
        }
    }
    let mut b = CMat::zeros(m * p_tilde, n_rx_rf * p_tilde);
    for i in 0..p_tilde {
        b.view_mut((i * m, i * n_rx_rf), (m, n_rx_rf))
            .copy_from(&d_bb_h);
    }
    (a, b)
}

/// Moore-Penrose pseudo-inverse via SVD with a relative tolerance cutoff.
pub fn pseudo_inverse(a: &CMat) -> CMat {
    let svd = a.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u");
    let v_t = svd.v_t.as_ref().expect("v_t");
    let max = svd.singular_values.iter().cloned().fold(0.0f64, f64::max);
    let tol = max * 1e-13 * a.nrows().max(a.ncols()) as f64;
    let inv_s: Vec<f64> = svd
        .singular_values
        .iter()
        .map(|&s| if s > tol { 1.0 / s } else { 0.0 })
        .collect();
    let mut vs = v_t.adjoint();
    for (j, mut col) in vs.column_iter_mut().enumerate() {
        let g = Complex64::new(inv_s[j], 0.0);
        for v in col.iter_mut() {
            *v *= g;
        }
    }
    vs * u.adjoint()
}

/// Zero-forcing block equalizer on the stacked model: column l is
/// (A A^H)^+ A(:, M (P_tilde - 1) + l), normalized to unit norm.
pub fn zf_tde_equalizer(a: &CMat, m: usize, p_tilde: usize) -> Result<CMat> {
    if a.norm() == 0.0 {
        return Err(Error::Factorization("zero block model".into()));
    }
    let gram_pinv = pseudo_inverse(&(a * a.adjoint()));
    let mut e = CMat::zeros(a.nrows(), m);
    for l in 0..m {
        let col = a.column(m * (p_tilde - 1) + l);
        let mut sol = &gram_pinv * col;
        let norm = sol.norm();
        if norm > 0.0 {
            sol /= Complex64::new(norm, 0.0);
        }
        e.set_column(l, &sol);
    }
    Ok(e)
}

/// Runs a SCM-TDE frame: cyclic warm-up of P_tilde - 1 vectors on each side,
/// digital precoding, front-end transit, digital post-coding, block ZF.
/// Returns the M x k soft estimates aligned with `sent`.
pub fn scm_tde_link<R: Rng + ?Sized>(
    frame: &FrameConfig,
    sent: &CMat,
    setup: &LinkSetup,
    q_bb: &CMat,
    d_bb: &CMat,
    rng: &mut R,
) -> Result<CMat> {
    let m = frame.multiplexing;
    let k = frame.block_len;
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
    let warm = p_tilde - 1;
    if k < p_tilde {
        return Err(Error::InvalidConfig(format!(
            "block length {} shorter than channel memory {}",
            k, p_tilde
        )));
    }

    // Transmitted slots e = 0 .. k + 2*warm - 1 carry s((e - warm) mod k).
    let n_slots = k + 2 * warm;
    let mut x = CMat::zeros(q_bb.nrows(), n_slots);
    for e in 0..n_slots {
        let idx = (e + k - (warm % k)) % k;
        let col = q_bb * sent.column(idx);
        x.set_column(e, &col);
    }
    let out = setup.transit(&x, rng)?;

    let (a, _b) = build_block_model(&setup.taps, d_bb, q_bb);
    let e_mat = zf_tde_equalizer(&a, m, p_tilde)?;
    let e_h = e_mat.adjoint();

    // r(n) = D_BB^H out[n + warm]; the stacked window for estimate n is
    // [r(n + warm); ...; r(n)].
    let d_bb_h = d_bb.adjoint();
    let r_len = k + warm;
    let mut r = CMat::zeros(m, r_len);
    for n in 0..r_len {
        let col = &d_bb_h * out.column(n + warm);
        r.set_column(n, &col);
    }

    let mut soft = CMat::zeros(m, k);
    let mut window = nalgebra::DVector::<Complex64>::zeros(m * p_tilde);
    for n in 0..k {
        for i in 0..p_tilde {
            let src = r.column(n + warm - i);
            for s in 0..m {
                window[i * m + s] = src[s];
            }
        }
        let est = &e_h * &window;
        soft.set_column(n, &est);
    }
    Ok(soft)
}
