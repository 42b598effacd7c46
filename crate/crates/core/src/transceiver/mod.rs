//! End-to-end symbol pipelines: common front-end transit with additive
//! receiver noise, plus the per-scheme equalizers.

pub mod fde;
pub mod ofdm;
pub mod tde;

use num_complex::Complex64;
use rand::Rng;
use rustfft::FftPlanner;

use crate::chain::{
    effective_paths, linear_transit, paths_to_taps, EffectivePath, FrontEnd,
};
use crate::channel::{ArrayGeometry, CMat, ChannelRealization};
use crate::error::{Error, Result};
use crate::noise::{sample_noise, NoiseModel};

/// Frame geometry shared by the three schemes.
#[derive(Debug, Clone)]
pub struct FrameConfig {
    /// Multiplexing order M (streams per channel use).
    pub multiplexing: usize,
    /// Block length k (vectors per frame).
    pub block_len: usize,
    /// Cyclic prefix length C, in M-vectors (FDE) or vectors (OFDM).
    pub cyclic_prefix: usize,
}

/// A channel realization bound to analog beamformers, a front end and a
/// noise model: everything between the digital precoder and post-coder.
#[derive(Debug, Clone)]
pub struct LinkSetup {
    pub front_end: FrontEnd,
    /// RF-chain level physical paths (for the nonlinear chain).
    pub paths: Vec<EffectivePath>,
    /// Effective symbol-rate taps L(l) = D_RF^H H(l) Q_RF.
    pub taps: Vec<CMat>,
    /// Analog post-coder, used to project antenna noise onto RF chains.
    pub d_rf: CMat,
    pub noise: Option<NoiseModel>,
}

impl LinkSetup {
    /// Binds a realization to analog beamformers. `t_s` is the symbol
    /// interval in seconds; the tap count is P + 2 P_h - 1.
    pub fn build(
        realization: &ChannelRealization,
        tx_geom: &ArrayGeometry,
        rx_geom: &ArrayGeometry,
        q_rf: &CMat,
        d_rf: &CMat,
        front_end: FrontEnd,
        noise: Option<NoiseModel>,
        t_s: f64,
    ) -> Result<Self> {
        let paths = effective_paths(realization, tx_geom, rx_geom, q_rf, d_rf, t_s)?;
        let p_tilde = crate::chain::path_span_taps(&paths, &front_end.pulse);
        let taps = paths_to_taps(&paths, &front_end.pulse, p_tilde);
        Ok(Self {
            front_end,
            paths,
            taps,
            d_rf: d_rf.clone(),
            noise,
        })
    }

    /// Direct construction from precomputed effective taps (linear-only use).
    pub fn from_taps(taps: Vec<CMat>, d_rf: CMat, front_end: FrontEnd, noise: Option<NoiseModel>) -> Self {
        let paths = taps
            .iter()
            .enumerate()
            .map(|(l, t)| EffectivePath {
                matrix: t.clone(),
                delay_symbols: l as f64,
            })
            .collect();
        Self {
            front_end,
            paths,
            taps,
            d_rf,
            noise,
        }
    }

    pub fn p_tilde(&self) -> usize {
        self.taps.len()
    }

    /// Sends the RF-chain symbol matrix through the front end and channel,
    /// adding projected receiver noise. Output has n + P_tilde - 1 columns.
    pub fn transit<R: Rng + ?Sized>(&self, x: &CMat, rng: &mut R) -> Result<CMat> {
        let mut out = if self.front_end.mode.is_ideal() {
            // Symbol-rate fast path: exactly equivalent to the oversampled
            // chain when the amplifier is distortion-free.
            linear_transit(&self.taps, x, self.front_end.transmit_power.sqrt())?
        } else {
            self.front_end.transit(x, &self.paths, self.p_tilde())?
        };
        if let Some(model) = &self.noise {
            let w = sample_noise(self.d_rf.nrows(), out.ncols(), model, rng)?;
            out += self.d_rf.adjoint() * w;
        }
        Ok(out)
    }
}

/// Isometric k-point FFT (forward) or IFFT (inverse) applied to each row.
pub fn fft_rows(x: &CMat, inverse: bool) -> CMat {
    let k = x.ncols();
    let mut planner = FftPlanner::new();
    let fft = if inverse {
        planner.plan_fft_inverse(k)
    } else {
        planner.plan_fft_forward(k)
    };
    let scale = 1.0 / (k as f64).sqrt();
    let mut out = x.clone();
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for r in 0..x.nrows() {
        for (n, slot) in buf.iter_mut().enumerate() {
            *slot = x[(r, n)];
        }
        fft.process(&mut buf);
        for n in 0..k {
            out[(r, n)] = buf[n] * scale;
        }
    }
    out
}

/// Checks that digital beamformers match the setup and stream count.
pub fn check_digital_dims(
    setup: &LinkSetup,
    q_bb: &CMat,
    d_bb: &CMat,
    m: usize,
) -> Result<()> {
    let n_tx_rf = setup.taps[0].ncols();
    let n_rx_rf = setup.taps[0].nrows();
    if q_bb.nrows() != n_tx_rf || q_bb.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "Q_BB is {}x{}, expected {}x{}",
            q_bb.nrows(),
            q_bb.ncols(),
            n_tx_rf,
            m
        )));
    }
    if d_bb.nrows() != n_rx_rf || d_bb.ncols() != m {
        return Err(Error::DimensionMismatch(format!(
            "D_BB is {}x{}, expected {}x{}",
            d_bb.nrows(),
            d_bb.ncols(),
            n_rx_rf,
            m
        )));
    }
    Ok(())
}
