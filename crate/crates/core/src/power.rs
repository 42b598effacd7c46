//! Circuit power consumption models for the three schemes under
//! fully-digital and hybrid architectures.

use serde::{Deserialize, Serialize};

/// Per-block power constants in watts.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PowerModel {
    pub rf_chain: f64,
    pub dac: f64,
    pub adc: f64,
    pub pa: f64,
    pub lna: f64,
    pub baseband: f64,
    pub fft: f64,
    pub ifft: f64,
    pub phase_shifter: f64,
    /// Amplifier inefficiency factor multiplying the radiated power.
    pub beta: f64,
}

impl Default for PowerModel {
    fn default() -> Self {
        Self {
            rf_chain: 0.040,
            dac: 0.110,
            adc: 0.200,
            pa: 0.016,
            lna: 0.030,
            baseband: 0.243,
            fft: 0.153,
            ifft: 0.153,
            phase_shifter: 0.030,
            beta: 2.5,
        }
    }
}

/// Modulation/equalization scheme selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Scheme {
    ScmTde,
    ScmFde,
    Ofdm,
}

impl Scheme {
    pub fn name(&self) -> &'static str {
        match self {
            Scheme::ScmTde => "scm-tde",
            Scheme::ScmFde => "scm-fde",
            Scheme::Ofdm => "ofdm",
        }
    }
}

impl std::str::FromStr for Scheme {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "scm-tde" | "tde" => Ok(Scheme::ScmTde),
            "scm-fde" | "fde" => Ok(Scheme::ScmFde),
            "ofdm" => Ok(Scheme::Ofdm),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown scheme '{other}'"
            ))),
        }
    }
}

/// Beamforming architecture.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Architecture {
    FullyDigital,
    Hybrid,
}

impl Architecture {
    pub fn name(&self) -> &'static str {
        match self {
            Architecture::FullyDigital => "fd",
            Architecture::Hybrid => "hy",
        }
    }
}

impl std::str::FromStr for Architecture {
    type Err = crate::error::Error;
    fn from_str(s: &str) -> crate::error::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "fd" | "fully-digital" => Ok(Architecture::FullyDigital),
            "hy" | "hybrid" => Ok(Architecture::Hybrid),
            other => Err(crate::error::Error::InvalidConfig(format!(
                "unknown architecture '{other}'"
            ))),
        }
    }
}

/// Transmit and receive circuit power (watts) for the given scheme and
/// architecture. Fully-digital variants use one RF chain per antenna; hybrid
/// variants use `n_tx_rf` / `n_rx_rf` chains plus an antenna-level phase
/// shifter network and per-antenna LNAs at the receiver.
pub fn power_consumption(
    scheme: Scheme,
    arch: Architecture,
    n_tx: usize,
    n_rx: usize,
    n_tx_rf: usize,
    n_rx_rf: usize,
    model: &PowerModel,
) -> (f64, f64) {
    let m = model;
    let (nt, nr) = (n_tx as f64, n_rx as f64);
    match arch {
        Architecture::FullyDigital => {
            let (tx_extra, rx_extra) = match scheme {
                Scheme::ScmTde => (0.0, 0.0),
                Scheme::ScmFde => (0.0, m.fft + m.ifft),
                Scheme::Ofdm => (m.ifft, m.fft),
            };
            let tx = nt * (m.rf_chain + m.dac + m.pa + tx_extra) + m.baseband;
            let rx = nr * (m.rf_chain + m.adc + m.lna + rx_extra) + m.baseband;
            (tx, rx)
        }
        Architecture::Hybrid => {
            let (ntr, nrr) = (n_tx_rf as f64, n_rx_rf as f64);
            let (tx_extra, rx_extra) = match scheme {
                Scheme::ScmTde => (0.0, 0.0),
                Scheme::ScmFde => (0.0, m.fft + m.ifft),
                Scheme::Ofdm => (m.ifft, m.fft),
            };
            let tx = ntr * (m.rf_chain + m.dac + nt * m.phase_shifter + m.pa + tx_extra)
                + m.baseband;
            let rx = nrr * (m.rf_chain + m.adc + nr * m.phase_shifter + rx_extra)
                + nr * m.lna
                + m.baseband;
            (tx, rx)
        }
    }
}
