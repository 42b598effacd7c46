//! Transmit/receive pulse shaping.
//!
//! Single-carrier schemes use a square-root raised cosine (SRRC) pulse
//! truncated to a finite span; OFDM uses a rectangular pulse of one symbol
//! duration. The matched cascade h(t) = h_TX * h_RX drives both the
//! composite channel taps and the receiver noise correlation.

use std::f64::consts::PI;

/// Continuous unit-symbol-time SRRC impulse response (unnormalized),
/// `t` in symbol intervals.
fn srrc_raw(t: f64, rolloff: f64) -> f64 {
    let a = rolloff;
    if a == 0.0 {
        if t.abs() < 1e-12 {
            return 1.0;
        }
        return (PI * t).sin() / (PI * t);
    }
    if t.abs() < 1e-12 {
        return 1.0 - a + 4.0 * a / PI;
    }
    // Singular point t = +-1/(4a).
    let ts = (4.0 * a * t).abs();
    if (ts - 1.0).abs() < 1e-9 {
        let x = PI / (4.0 * a);
        return a / 2f64.sqrt() * ((1.0 + 2.0 / PI) * x.sin() + (1.0 - 2.0 / PI) * x.cos());
    }
    let num = (PI * t * (1.0 - a)).sin() + 4.0 * a * t * (PI * t * (1.0 + a)).cos();
    let den = PI * t * (1.0 - (4.0 * a * t).powi(2));
    num / den
}

/// SRRC filter taps sampled at `oversampling` samples per symbol, truncated
/// to `span_symbols` on each side and normalized to unit energy
/// (sum of squares = 1). Length is `2*span*oversampling + 1`, even symmetric.
pub fn srrc_taps(rolloff: f64, span_symbols: usize, oversampling: usize) -> Vec<f64> {
    let n = oversampling as f64;
    let half = span_symbols * oversampling;
    let mut taps: Vec<f64> = (0..=2 * half)
        .map(|i| srrc_raw((i as f64 - half as f64) / n, rolloff))
        .collect();
    let energy: f64 = taps.iter().map(|h| h * h).sum();
    let s = energy.sqrt();
    for h in taps.iter_mut() {
        *h /= s;
    }
    taps
}

/// Pulse family used by a transceiver scheme.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PulseShape {
    /// Square-root raised cosine with the given roll-off, truncated to
    /// `span_symbols` on each side of the peak.
    Srrc { rolloff: f64, span_symbols: usize },
    /// Rectangular pulse of one symbol duration (OFDM).
    Rect,
}

/// A matched TX/RX pulse pair discretized at a fixed oversampling factor.
///
/// The discrete taps carry unit energy, so the matched-filter cascade
/// evaluates to ~1 at lag zero. `autocorr` evaluates the cascade response
/// h(t) at arbitrary (off-grid) lags using the same discretization as the
/// oversampled waveform chain, keeping the symbol-rate linear model and
/// the chain numerically consistent.
#[derive(Debug, Clone)]
pub struct MatchedPulse {
    shape: PulseShape,
    oversampling: usize,
    taps: Vec<f64>,
    /// Scale mapping the raw continuous pulse to the unit-energy taps.
    scale: f64,
}

impl MatchedPulse {
    pub fn new(shape: PulseShape, oversampling: usize) -> Self {
        assert!(oversampling >= 1);
        let (taps, scale) = match shape {
            PulseShape::Srrc {
                rolloff,
                span_symbols,
            } => {
                let taps = srrc_taps(rolloff, span_symbols, oversampling);
                let scale = taps[span_symbols * oversampling] / srrc_raw(0.0, rolloff);
                (taps, scale)
            }
            PulseShape::Rect => {
                let v = 1.0 / (oversampling as f64).sqrt();
                (vec![v; oversampling], v)
            }
        };
        Self {
            shape,
            oversampling,
            taps,
            scale,
        }
    }

    pub fn shape(&self) -> PulseShape {
        self.shape
    }

    pub fn oversampling(&self) -> usize {
        self.oversampling
    }

    /// Unit-energy discrete filter taps at `oversampling` samples/symbol.
    pub fn taps(&self) -> &[f64] {
        &self.taps
    }

    /// Tap index of the pulse peak (time origin of the filter).
    pub fn center(&self) -> usize {
        match self.shape {
            PulseShape::Srrc { span_symbols, .. } => span_symbols * self.oversampling,
            PulseShape::Rect => 0,
        }
    }

    /// One-sided filter span in symbols.
    pub fn span_symbols(&self) -> usize {
        match self.shape {
            PulseShape::Srrc { span_symbols, .. } => span_symbols,
            PulseShape::Rect => 1,
        }
    }

    /// Number of symbol-spaced taps spanned by one filter: P_h.
    pub fn one_filter_span_taps(&self) -> usize {
        match self.shape {
            PulseShape::Srrc { span_symbols, .. } => 2 * span_symbols + 1,
            PulseShape::Rect => 1,
        }
    }

    /// Continuous evaluation of the (normalized) single filter at time `t`
    /// in symbol intervals.
    pub fn eval(&self, t: f64) -> f64 {
        match self.shape {
            PulseShape::Srrc {
                rolloff,
                span_symbols,
            } => {
                if t.abs() > span_symbols as f64 {
                    0.0
                } else {
                    self.scale * srrc_raw(t, rolloff)
                }
            }
            PulseShape::Rect => {
                // Support [0, 1) to match the causal discrete taps.
                if (0.0..1.0).contains(&t) {
                    self.scale
                } else {
                    0.0
                }
            }
        }
    }

    /// Matched cascade h(t) = (h_TX * h_RX)(t) with `t` in symbol intervals.
    ///
    /// Computed as the discrete cross-correlation of the unit-energy taps
    /// with a continuously shifted copy, so that `autocorr(0) = 1` exactly
    /// and the symbol-rate linear model matches the oversampled waveform
    /// chain term for term, including off-grid delays.
    pub fn autocorr(&self, t: f64) -> f64 {
        let support = self.one_filter_span_taps() as f64;
        if t.abs() >= support {
            return 0.0;
        }
        let n = self.oversampling as f64;
        let c = self.center() as f64;
        let mut acc = 0.0;
        for (i, &h) in self.taps.iter().enumerate() {
            let ti = (i as f64 - c) / n;
            acc += h * self.eval(ti - t);
        }
        acc
    }

    /// Normalized receive-filter autocorrelation r_hRX(l T_s) at integer
    /// symbol lags, for the noise model. For matched filters this equals the
    /// cascade response at those lags.
    pub fn rx_autocorr_at_lag(&self, lag: i64) -> f64 {
        self.autocorr(lag as f64)
    }
}
