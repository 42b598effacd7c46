//! Sweep configuration: TOML schema with full defaults, named presets, and
//! a canonical content hash.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::channel::{ChannelParams, PathLossModel};
use crate::constellation::ConstellationKind;
use crate::error::{Error, Result};
use crate::power::{Architecture, PowerModel, Scheme};

/// Amplifier operating mode selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PaModeKind {
    Ideal,
    Rapp,
    RappSpd,
}

impl PaModeKind {
    pub fn name(&self) -> &'static str {
        match self {
            PaModeKind::Ideal => "ideal",
            PaModeKind::Rapp => "rapp",
            PaModeKind::RappSpd => "rapp-spd",
        }
    }
}

/// Full scenario configuration. Every field has a default, so a config file
/// only needs to state deviations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub scheme: Scheme,
    pub architecture: Architecture,
    pub n_tx: usize,
    pub n_rx: usize,
    /// RF chain counts; ignored (set to the antenna counts) for FD runs.
    pub n_tx_rf: usize,
    pub n_rx_rf: usize,
    /// Multiplexing order M.
    pub multiplexing: usize,
    pub constellation: ConstellationKind,
    /// Block length k (FFT size for FDE/OFDM).
    pub block_len: usize,
    /// Cyclic prefix length in vectors; 0 selects the channel memory
    /// automatically per realization.
    pub cyclic_prefix: usize,
    /// Transmit power sweep, dBW.
    pub p_t_dbw: Vec<f64>,
    /// Link distance sweep, meters.
    pub distances_m: Vec<f64>,
    pub pa_mode: PaModeKind,
    /// Input backoff at the PA, dB below unit mean square.
    pub backoff_db: f64,
    /// Rapp smoothness parameter p.
    pub pa_smoothness: f64,
    /// Fit the predistorter per run instead of using the fixed preset triple.
    pub fit_spd: bool,
    pub bandwidth_hz: f64,
    /// SCM symbol interval, seconds (OFDM always uses 1/W).
    pub symbol_interval_s: f64,
    pub srrc_rolloff: f64,
    pub srrc_span_symbols: usize,
    pub oversampling: usize,
    pub noise_figure_db: f64,
    pub channel: ChannelParams,
    pub power: PowerModel,
    /// Monte Carlo channel realizations per grid point.
    pub realizations: usize,
    /// Frames simulated per realization (pooled for the auxiliary fit).
    pub frames_per_realization: usize,
    /// Noise draws per MI estimate.
    pub mi_samples: usize,
    pub bcd_max_iters: usize,
    pub bcd_tol: f64,
    pub master_seed: u64,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            scheme: Scheme::ScmTde,
            architecture: Architecture::Hybrid,
            n_tx: 50,
            n_rx: 10,
            n_tx_rf: 2,
            n_rx_rf: 2,
            multiplexing: 2,
            constellation: ConstellationKind::Qam16,
            block_len: 256,
            cyclic_prefix: 0,
            p_t_dbw: vec![0.0],
            distances_m: vec![30.0],
            pa_mode: PaModeKind::Ideal,
            backoff_db: 0.0,
            pa_smoothness: 2.0,
            fit_spd: false,
            bandwidth_hz: 500e6,
            symbol_interval_s: 2.44e-9,
            srrc_rolloff: 0.22,
            srrc_span_symbols: 4,
            oversampling: 8,
            noise_figure_db: 3.0,
            channel: ChannelParams::default(),
            power: PowerModel::default(),
            realizations: 50,
            frames_per_realization: 4,
            mi_samples: 20_000,
            bcd_max_iters: 50,
            bcd_tol: 1e-6,
            master_seed: 1,
        }
    }
}

impl SimConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SimConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let err = |msg: String| Err(Error::InvalidConfig(msg));
        if self.n_tx == 0 || self.n_rx == 0 {
            return err("antenna counts must be positive".into());
        }
        let (ntr, nrr) = self.rf_chains();
        if self.multiplexing == 0 || self.multiplexing > ntr.min(nrr) {
            return err(format!(
                "multiplexing order {} must be in 1..=min(RF chains {}, {})",
                self.multiplexing, ntr, nrr
            ));
        }
        if ntr > self.n_tx || nrr > self.n_rx {
            return err("RF chain counts cannot exceed antenna counts".into());
        }
        if self.p_t_dbw.is_empty() || self.distances_m.is_empty() {
            return err("sweep lists must be non-empty".into());
        }
        if self.distances_m.iter().any(|&d| d <= 0.0) {
            return err("distances must be positive".into());
        }
        if self.block_len == 0 || self.realizations == 0 || self.frames_per_realization == 0 {
            return err("block length, realizations and frames must be positive".into());
        }
        if self.bandwidth_hz <= 0.0 || self.symbol_interval_s <= 0.0 {
            return err("bandwidth and symbol interval must be positive".into());
        }
        if self.oversampling == 0 || self.srrc_span_symbols == 0 {
            return err("oversampling and pulse span must be positive".into());
        }
        Ok(())
    }

    /// Active RF chain counts (antenna counts under FD).
    pub fn rf_chains(&self) -> (usize, usize) {
        match self.architecture {
            Architecture::FullyDigital => (self.n_tx, self.n_rx),
            Architecture::Hybrid => (self.n_tx_rf, self.n_rx_rf),
        }
    }

    /// Symbol interval actually used by the scheme.
    pub fn symbol_interval(&self) -> f64 {
        match self.scheme {
            Scheme::Ofdm => 1.0 / self.bandwidth_hz,
            _ => self.symbol_interval_s,
        }
    }

    /// Canonical content hash: SHA-256 of the canonical serialized form of
    /// the parsed config, so whitespace and comments do not matter.
    pub fn content_hash(&self) -> String {
        let canonical = serde_json::to_string(self).expect("config serializes");
        let mut hasher = Sha256::new();
        hasher.update(canonical.as_bytes());
        let digest = hasher.finalize();
        digest.iter().map(|b| format!("{b:02x}")).collect()
    }

    /// Named scenario presets at reduced Monte Carlo scale.
    pub fn preset(name: &str) -> Result<Self> {
        let base = Self::default();
        let cfg = match name {
            // ASE vs P_T, FD, ideal PA, SCM-TDE.
            "power-sweep" => Self {
                scheme: Scheme::ScmTde,
                architecture: Architecture::FullyDigital,
                p_t_dbw: vec![-20.0, -10.0, 0.0, 10.0],
                ..base
            },
            // ASE vs P_T with the Rapp PA, HY with 2 chains; the scheme
            // comparison is done by running both presets.
            "pa-sweep-tde" => Self {
                scheme: Scheme::ScmTde,
                architecture: Architecture::Hybrid,
                pa_mode: PaModeKind::Rapp,
                p_t_dbw: vec![-10.0, 0.0, 10.0],
                ..base
            },
            "pa-sweep-ofdm" => Self {
                scheme: Scheme::Ofdm,
                architecture: Architecture::Hybrid,
                pa_mode: PaModeKind::Rapp,
                p_t_dbw: vec![-10.0, 0.0, 10.0],
                ..base
            },
            // ASE vs distance at 0 dBW. The NLOS path loss is calibrated to
            // a light-intercept dual-slope model (street-canyon conditions
            // with a coverage knee past ~110 m) so the scenario exhibits the
            // plateau-then-cliff range behaviour of dense urban mmWave links.
            "distance-sweep" => Self {
                scheme: Scheme::ScmTde,
                architecture: Architecture::Hybrid,
                distances_m: vec![30.0, 60.0, 90.0, 120.0, 150.0],
                channel: ChannelParams {
                    path_loss_nlos: PathLossModel {
                        intercept_db: 61.0,
                        slope: 2.69,
                        breakpoint_m: Some(110.0),
                        slope_beyond: 8.0,
                    },
                    ..base.channel.clone()
                },
                ..base
            },
            // GEE comparison at the reference distance, OFDM.
            "gee-ofdm" => Self {
                scheme: Scheme::Ofdm,
                architecture: Architecture::Hybrid,
                p_t_dbw: vec![-10.0, 0.0, 10.0],
                ..base
            },
            other => {
                return Err(Error::InvalidConfig(format!("unknown preset '{other}'")));
            }
        };
        cfg.validate()?;
        Ok(cfg)
    }
}
