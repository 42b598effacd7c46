//! Oversampled transmit/receive waveform chain.
//!
//! Upsamples each RF-chain stream, applies the (possibly nonlinear) power
//! amplifier sample by sample, mixes the streams through the physical
//! multipath channel at the oversampled grid, and matched-filters back down
//! to symbol rate. With an ideal amplifier the output coincides with the
//! symbol-rate linear model built from the composite channel taps.

use num_complex::Complex64;

use crate::channel::{ArrayGeometry, CMat, ChannelRealization};
use crate::error::{Error, Result};
use crate::pa::PaMode;
use crate::pulse::MatchedPulse;

/// One propagation path reduced to RF-chain level: its spatial mixing matrix
/// (analog post-coder x ray outer product x analog pre-coder) and its delay
/// relative to the earliest arrival, in symbol intervals.
#[derive(Debug, Clone)]
pub struct EffectivePath {
    pub matrix: CMat,
    pub delay_symbols: f64,
}

/// Reduces a channel realization to RF-chain level paths
/// M_p = D_RF^H (coeff * a_r a_t^H) Q_RF with delays aligned to the earliest
/// arrival. Identity analog factors give antenna-level paths.
pub fn effective_paths(
    realization: &ChannelRealization,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
    q_rf: &CMat,
    d_rf: &CMat,
    t_s: f64,
) -> Result<Vec<EffectivePath>> {
    if realization.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    if q_rf.nrows() != realization.n_tx || d_rf.nrows() != realization.n_rx {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, Q_RF has {} rows, D_RF has {} rows",
            realization.n_rx,
            realization.n_tx,
            q_rf.nrows(),
            d_rf.nrows()
        )));
    }
    let min_delay = realization.min_delay().expect("non-empty");
    let d_rf_h = d_rf.adjoint();
    let mut paths = Vec::with_capacity(realization.n_paths() + 1);
    let mut push = |coeff: Complex64, delay: f64, arr: (f64, f64), dep: (f64, f64)| {
        let a_r = rx_geom.response(arr.0, arr.1);
        let a_t = tx_geom.response(dep.0, dep.1);
        let eff = (&d_rf_h * a_r) * (a_t.adjoint() * q_rf) * coeff;
        paths.push(EffectivePath {
            matrix: eff,
            delay_symbols: (delay - min_delay) / t_s,
        });
    };
    let gamma = realization.normalization;
    for ray in realization.clusters.iter().flatten() {
        push(
            ray.gain * gamma * ray.attenuation.sqrt(),
            ray.delay_s,
            (ray.arrival_azimuth, ray.arrival_elevation),
            (ray.departure_azimuth, ray.departure_elevation),
        );
    }
    if let Some(los) = &realization.los {
        let coeff = Complex64::from_polar(1.0, los.phase)
            * ((realization.n_rx * realization.n_tx) as f64).sqrt()
            * los.attenuation.sqrt();
        push(
            coeff,
            los.delay_s,
            (los.arrival_azimuth, los.arrival_elevation),
            (los.departure_azimuth, los.departure_elevation),
        );
    }
    Ok(paths)
}

/// Symbol-rate taps consistent with [`waveform_transit`] under an ideal PA:
/// tap l = sum_p M_p * autocorr(l - (P_h - 1) - delay_p).
pub fn paths_to_taps(paths: &[EffectivePath], pulse: &MatchedPulse, p_tilde: usize) -> Vec<CMat> {
    let p_h = pulse.one_filter_span_taps() as f64;
    let (rows, cols) = (paths[0].matrix.nrows(), paths[0].matrix.ncols());
    let mut taps = vec![CMat::zeros(rows, cols); p_tilde];
    for path in paths {
        for (l, tap) in taps.iter_mut().enumerate() {
            let h = pulse.autocorr(l as f64 - (p_h - 1.0) - path.delay_symbols);
            if h != 0.0 {
                *tap += &path.matrix * Complex64::new(h, 0.0);
            }
        }
    }
    taps
}

/// Tap count P_tilde implied by a path set: multipath span plus the matched
/// cascade spread.
pub fn path_span_taps(paths: &[EffectivePath], pulse: &MatchedPulse) -> usize {
    let max = paths
        .iter()
        .map(|p| p.delay_symbols)
        .fold(0.0f64, f64::max);
    max.floor() as usize + 2 * pulse.one_filter_span_taps()
}

/// Transmit front end: pulse, amplifier mode, radiated power target and the
/// drive-level convention for the nonlinearity.
#[derive(Debug, Clone)]
pub struct FrontEnd {
    pub pulse: MatchedPulse,
    pub mode: PaMode,
    /// Amplifier saturation power P_T, watts.
    pub transmit_power: f64,
    /// Input backoff in dB below unit mean square at the PA input.
    pub backoff_db: f64,
    /// Nominal mean-square level of one RF-chain symbol stream (typically
    /// M / N_chains for orthonormal precoding); fixes the PA drive scaling
    /// independently of the realized frame content.
    pub input_mean_square: f64,
}

impl FrontEnd {
    pub fn ideal(pulse: MatchedPulse, transmit_power: f64) -> Self {
        Self {
            pulse,
            mode: PaMode::Ideal,
            transmit_power,
            backoff_db: 0.0,
            input_mean_square: 1.0,
        }
    }

    /// Scale factor bringing one oversampled filtered stream to the target
    /// drive level at the PA input.
    pub fn drive_scale(&self) -> f64 {
        let n = self.pulse.oversampling() as f64;
        10f64.powf(-self.backoff_db / 20.0) * (n / self.input_mean_square).sqrt()
    }

    /// Full oversampled transit: symbol matrix in (chains x n_sym), symbol
    /// matrix out (rx chains x n_sym + p_tilde - 1).
    pub fn transit(&self, x: &CMat, paths: &[EffectivePath], p_tilde: usize) -> Result<CMat> {
        waveform_transit(
            x,
            paths,
            &self.pulse,
            &self.mode,
            self.transmit_power,
            self.drive_scale(),
            p_tilde,
        )
    }
}

/// Upsample-and-filter: out[:, i] = sum_n x[:, n] * taps[i - n*N],
/// i = 0 .. (n_sym - 1) * N + taps.len() - 1.
pub fn upsample_filter(x: &CMat, pulse: &MatchedPulse) -> CMat {
    let n = pulse.oversampling();
    let taps = pulse.taps();
    let n_sym = x.ncols();
    let len = (n_sym.saturating_sub(1)) * n + taps.len();
    let mut out = CMat::zeros(x.nrows(), len);
    for sym in 0..n_sym {
        for (k, &h) in taps.iter().enumerate() {
            if h == 0.0 {
                continue;
            }
            let i = sym * n + k;
            for r in 0..x.nrows() {
                out[(r, i)] += x[(r, sym)] * h;
            }
        }
    }
    out
}

/// Symbol-rate linear model: out[:, j] = amplitude * sum_l taps[l] x[:, j-l]
/// (full convolution, j = 0 .. n_sym + taps.len() - 2).
pub fn linear_transit(taps: &[CMat], x: &CMat, amplitude: f64) -> Result<CMat> {
    if taps.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    if taps[0].ncols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "taps expect {} input streams, got {}",
            taps[0].ncols(),
            x.nrows()
        )));
    }
    let n_out = x.ncols() + taps.len() - 1;
    let mut out = CMat::zeros(taps[0].nrows(), n_out);
    for (l, tap) in taps.iter().enumerate() {
        let scaled = tap * Complex64::new(amplitude, 0.0);
        for n in 0..x.ncols() {
            let y = &scaled * x.column(n);
            for r in 0..y.len() {
                out[(r, n + l)] += y[r];
            }
        }
    }
    Ok(out)
}

/// The oversampled waveform chain.
///
/// Per receive symbol index j and path p the contribution is
/// M_p * sum_q kernel_p(q) a[:, j*N + c - q], with the path kernel
/// kernel_p(q) = eval((P_h - 1) + delay_p - q / N); this reindexes exactly to
/// the symbol-rate model with autocorrelation taps when the PA is ideal.
pub fn waveform_transit(
    x: &CMat,
    paths: &[EffectivePath],
    pulse: &MatchedPulse,
    mode: &PaMode,
    transmit_power: f64,
    drive_scale: f64,
    p_tilde: usize,
) -> Result<CMat> {
    if paths.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    if paths[0].matrix.ncols() != x.nrows() {
        return Err(Error::DimensionMismatch(format!(
            "paths expect {} input streams, got {}",
            paths[0].matrix.ncols(),
            x.nrows()
        )));
    }
    let n = pulse.oversampling() as i64;
    let c = pulse.center() as i64;
    let mut a = upsample_filter(x, pulse);
    match mode {
        PaMode::Ideal => {
            let g = Complex64::new(transmit_power.sqrt(), 0.0);
            for v in a.iter_mut() {
                *v *= g;
            }
        }
        _ => {
            let kappa = Complex64::new(drive_scale, 0.0);
            for v in a.iter_mut() {
                *v = mode.process(*v * kappa, transmit_power) / kappa;
            }
        }
    }

    let n_sym = x.ncols();
    let n_out = n_sym + p_tilde - 1;
    let n_rx = paths[0].matrix.nrows();
    let p_h = pulse.one_filter_span_taps() as f64;
    let samples = a.ncols() as i64;
    let mut out = CMat::zeros(n_rx, n_out);
    let mut mixed = nalgebra::DVector::<Complex64>::zeros(x.nrows());

    for path in paths {
        // Kernel support: eval is nonzero on |t| <= span (SRRC) or [0, 1)
        // (rect); enumerate the q range conservatively and drop exact zeros.
        let center_t = (p_h - 1.0) + path.delay_symbols;
        let span = pulse.span_symbols() as f64;
        let q_lo = ((center_t - span) * n as f64).floor() as i64 - 1;
        let q_hi = ((center_t + span) * n as f64).ceil() as i64 + 1;
        let kernel: Vec<f64> = (q_lo..=q_hi)
            .map(|q| pulse.eval(center_t - q as f64 / n as f64))
            .collect();
        for j in 0..n_out as i64 {
            mixed.fill(Complex64::new(0.0, 0.0));
            let base = j * n + c;
            let mut any = false;
            for (k, &h) in kernel.iter().enumerate() {
                if h == 0.0 {
                    continue;
                }
                let i = base - (q_lo + k as i64);
                if i < 0 || i >= samples {
                    continue;
                }
                any = true;
                let col = a.column(i as usize);
                for r in 0..mixed.len() {
                    mixed[r] += col[r] * h;
                }
            }
            if any {
                let y = &path.matrix * &mixed;
                for r in 0..n_rx {
                    out[(r, j as usize)] += y[r];
                }
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pulse::PulseShape;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn random_cmat<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn srrc_pulse() -> MatchedPulse {
        MatchedPulse::new(
            PulseShape::Srrc {
                rolloff: 0.22,
                span_symbols: 4,
            },
            8,
        )
    }

    #[test]
    fn transparent_chain_rect() {
        // Rect matched cascade is exactly Nyquist, so an identity single-path
        // channel returns sqrt(P_T) times the input symbols.
        let pulse = MatchedPulse::new(PulseShape::Rect, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let x = random_cmat(2, 32, &mut rng);
        let paths = vec![EffectivePath {
            matrix: CMat::identity(2, 2),
            delay_symbols: 0.0,
        }];
        let p_tilde = path_span_taps(&paths, &pulse);
        let fe = FrontEnd::ideal(pulse, 4.0);
        let out = fe.transit(&x, &paths, p_tilde).unwrap();
        let p_h = fe.pulse.one_filter_span_taps();
        for sym in 0..x.ncols() {
            for r in 0..2 {
                let got = out[(r, sym + p_h - 1)];
                let want = x[(r, sym)] * 2.0;
                assert!((got - want).norm() < 1e-9, "{} vs {}", got, want);
            }
        }
    }

    #[test]
    fn bypass_equivalence_srrc_offgrid() {
        // Ideal PA: the oversampled chain matches the symbol-rate model built
        // from autocorrelation taps, including off-grid delays.
        let pulse = srrc_pulse();
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let paths: Vec<EffectivePath> = [0.0, 0.37, 1.91, 3.5]
            .iter()
            .map(|&d| EffectivePath {
                matrix: random_cmat(3, 2, &mut rng),
                delay_symbols: d,
            })
            .collect();
        let p_tilde = path_span_taps(&paths, &pulse);
        let taps = paths_to_taps(&paths, &pulse, p_tilde);
        let x = random_cmat(2, 40, &mut rng);
        let fe = FrontEnd::ideal(pulse, 2.0);
        let chain = fe.transit(&x, &paths, p_tilde).unwrap();
        let model = linear_transit(&taps, &x, 2f64.sqrt()).unwrap();
        assert_eq!(chain.ncols(), model.ncols());
        let scale = model.norm();
        assert!(((&chain - &model).norm() / scale) < 1e-10);
    }

    #[test]
    fn rect_bypass_equivalence() {
        let pulse = MatchedPulse::new(PulseShape::Rect, 8);
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let paths: Vec<EffectivePath> = [0.0, 0.25, 1.5]
            .iter()
            .map(|&d| EffectivePath {
                matrix: random_cmat(2, 2, &mut rng),
                delay_symbols: d,
            })
            .collect();
        let p_tilde = path_span_taps(&paths, &pulse);
        let taps = paths_to_taps(&paths, &pulse, p_tilde);
        let x = random_cmat(2, 24, &mut rng);
        let fe = FrontEnd::ideal(pulse, 1.0);
        let chain = fe.transit(&x, &paths, p_tilde).unwrap();
        let model = linear_transit(&taps, &x, 1.0).unwrap();
        assert!(((&chain - &model).norm() / model.norm()) < 1e-10);
    }

    #[test]
    fn rapp_small_signal_is_linear() {
        // Driving the Rapp amplifier 40 dB into backoff reproduces the ideal
        // chain scaled by the same factor, within 1%.
        let pulse = srrc_pulse();
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let paths = vec![EffectivePath {
            matrix: random_cmat(2, 2, &mut rng),
            delay_symbols: 0.6,
        }];
        let p_tilde = path_span_taps(&paths, &pulse);
        let x = random_cmat(2, 32, &mut rng);
        let x_small = &x * Complex64::new(0.01, 0.0);

        let ideal = FrontEnd::ideal(pulse.clone(), 1.0);
        let want = ideal.transit(&x_small, &paths, p_tilde).unwrap();

        let rapp = FrontEnd {
            pulse,
            mode: PaMode::Rapp(crate::pa::PaModel::default()),
            transmit_power: 1.0,
            backoff_db: 0.0,
            input_mean_square: 1.0,
        };
        let got = rapp.transit(&x_small, &paths, p_tilde).unwrap();
        assert!(((&got - &want).norm() / want.norm()) < 0.01);
    }

    #[test]
    fn effective_paths_match_composite_taps() {
        // paths_to_taps on effective paths reproduces composite_taps followed
        // by the analog projection.
        use crate::channel::{
            composite_taps, effective_channel, sample_realization, ChannelParams,
        };
        let pulse = srrc_pulse();
        let params = ChannelParams::default();
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let tx = ArrayGeometry::ula(8);
        let rx = ArrayGeometry::ula(4);
        let t_s = 2.44e-9;
        let real = sample_realization(&params, 8, 4, 40.0, &mut rng);
        let composite = composite_taps(
            &real,
            |t| pulse.autocorr(t),
            pulse.one_filter_span_taps(),
            t_s,
            &tx,
            &rx,
        )
        .unwrap();
        let q_rf = random_cmat(8, 2, &mut rng);
        let d_rf = random_cmat(4, 2, &mut rng);
        let eff = effective_channel(&composite, &q_rf, &d_rf).unwrap();
        let paths = effective_paths(&real, &tx, &rx, &q_rf, &d_rf, t_s).unwrap();
        let taps = paths_to_taps(&paths, &pulse, composite.tap_count());
        assert_eq!(taps.len(), eff.len());
        let total: f64 = eff.iter().map(|t| t.norm_squared()).sum::<f64>().sqrt();
        for (a, b) in taps.iter().zip(&eff) {
            assert!((a - b).norm() <= 1e-10 * total.max(1.0));
        }
    }

    #[test]
    fn upsample_filter_energy() {
        // A single unit symbol through the unit-energy filter has unit energy.
        let pulse = srrc_pulse();
        let x = CMat::from_element(1, 1, Complex64::new(1.0, 0.0));
        let v = upsample_filter(&x, &pulse);
        let e: f64 = v.iter().map(|z| z.norm_sqr()).sum();
        assert_abs_diff_eq!(e, 1.0, epsilon = 1e-12);
    }
}
