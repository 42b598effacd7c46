//! Clustered mmWave channel model.
//!
//! Generates random channel realizations made of scattering clusters plus an
//! optional LOS component, and converts them into discrete-time composite
//! tap matrices that include the transmit/receive pulse shaping.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

use crate::error::{Error, Result};

pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Planar antenna array: `horizontal * vertical` elements with the given
/// inter-element spacing in wavelengths. A uniform linear array has
/// `vertical = 1`.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct ArrayGeometry {
    pub horizontal: usize,
    pub vertical: usize,
    pub spacing: f64,
}

impl ArrayGeometry {
    pub fn ula(n: usize) -> Self {
        Self {
            horizontal: n,
            vertical: 1,
            spacing: 0.5,
        }
    }

    pub fn n_elements(&self) -> usize {
        self.horizontal * self.vertical
    }

    /// Unit-norm array response vector at the given azimuth/elevation
    /// (radians). Element (m, n) has phase
    /// -2*pi*spacing*(m*sin(az)*sin(el) + n*cos(el)), ordered row-major over
    /// m = 0..horizontal-1, n = 0..vertical-1.
    pub fn response(&self, azimuth: f64, elevation: f64) -> CVec {
        let count = self.n_elements();
        let norm = 1.0 / (count as f64).sqrt();
        let kd = 2.0 * PI * self.spacing;
        let u = azimuth.sin() * elevation.sin();
        let v = elevation.cos();
        CVec::from_fn(count, |idx, _| {
            let m = (idx / self.vertical) as f64;
            let n = (idx % self.vertical) as f64;
            let phase = -kd * (m * u + n * v);
            Complex64::from_polar(norm, phase)
        })
    }
}

/// One propagation ray inside a scattering cluster.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PathComponent {
    #[serde(with = "serde_complex")]
    pub gain: Complex64,
    pub length_m: f64,
    pub delay_s: f64,
    /// Linear power gain in (0, 1].
    pub attenuation: f64,
    pub departure_azimuth: f64,
    pub departure_elevation: f64,
    pub arrival_azimuth: f64,
    pub arrival_elevation: f64,
}

/// Deterministic LOS ray, present according to the Bernoulli indicator.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LosComponent {
    pub phase: f64,
    pub delay_s: f64,
    pub attenuation: f64,
    pub departure_azimuth: f64,
    pub departure_elevation: f64,
    pub arrival_azimuth: f64,
    pub arrival_elevation: f64,
}

/// One sampled channel instance.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ChannelRealization {
    pub clusters: Vec<Vec<PathComponent>>,
    pub los: Option<LosComponent>,
    /// gamma = sqrt(N_R * N_T / sum_i N_ray_i)
    pub normalization: f64,
    pub link_distance_m: f64,
    pub n_tx: usize,
    pub n_rx: usize,
}

impl ChannelRealization {
    pub fn n_paths(&self) -> usize {
        self.clusters.iter().map(|c| c.len()).sum()
    }

    pub fn is_empty(&self) -> bool {
        self.n_paths() == 0 && self.los.is_none()
    }

    /// Earliest arrival over all rays and the LOS component.
    pub fn min_delay(&self) -> Option<f64> {
        let mut min: Option<f64> = None;
        for p in self.clusters.iter().flatten() {
            min = Some(min.map_or(p.delay_s, |m: f64| m.min(p.delay_s)));
        }
        if let Some(los) = &self.los {
            min = Some(min.map_or(los.delay_s, |m: f64| m.min(los.delay_s)));
        }
        min
    }

    /// Latest arrival over all rays and the LOS component.
    pub fn max_delay(&self) -> Option<f64> {
        let mut max: Option<f64> = None;
        for p in self.clusters.iter().flatten() {
            max = Some(max.map_or(p.delay_s, |m: f64| m.max(p.delay_s)));
        }
        if let Some(los) = &self.los {
            max = Some(max.map_or(los.delay_s, |m: f64| m.max(los.delay_s)));
        }
        max
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("realization serializes")
    }

    pub fn from_json(s: &str) -> Result<Self> {
        serde_json::from_str(s).map_err(|e| Error::InvalidConfig(e.to_string()))
    }
}

/// Floating-intercept path loss: PL(d) [dB] = intercept + 10*slope*log10(d).
/// An optional breakpoint switches to a second slope beyond a given
/// distance (dual-slope model, continuous at the breakpoint).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PathLossModel {
    pub intercept_db: f64,
    pub slope: f64,
    pub breakpoint_m: Option<f64>,
    /// Slope applied beyond the breakpoint; ignored without one.
    pub slope_beyond: f64,
}

impl Default for PathLossModel {
    fn default() -> Self {
        Self {
            intercept_db: 0.0,
            slope: 2.0,
            breakpoint_m: None,
            slope_beyond: 2.0,
        }
    }
}

impl PathLossModel {
    pub fn loss_db(&self, distance_m: f64) -> f64 {
        let single = self.intercept_db + 10.0 * self.slope * distance_m.log10();
        match self.breakpoint_m {
            Some(bp) if distance_m > bp => {
                self.intercept_db
                    + 10.0 * self.slope * bp.log10()
                    + 10.0 * self.slope_beyond * (distance_m / bp).log10()
            }
            _ => single,
        }
    }
}

/// Statistical parameters of the clustered channel. Defaults are
/// representative of 73 GHz urban measurements and config-overridable.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct ChannelParams {
    pub n_clusters: usize,
    pub rays_per_cluster: usize,
    /// Cluster-center azimuths uniform on [-azimuth_half_range, +..].
    pub azimuth_half_range: f64,
    /// Cluster-center elevations uniform on pi/2 +- elevation_half_range
    /// (broadside reference for the vertical axis).
    pub elevation_half_range: f64,
    /// Per-ray Laplacian angle offset standard deviation, degrees.
    pub ray_offset_std_deg: f64,
    pub path_loss_los: PathLossModel,
    pub path_loss_nlos: PathLossModel,
    pub carrier_ghz: f64,
    /// Maximum excess path length as a fraction of the link distance.
    pub max_excess_length: f64,
    /// Force the LOS indicator instead of drawing it (for testing).
    pub force_los: Option<bool>,
}

impl Default for ChannelParams {
    fn default() -> Self {
        Self {
            n_clusters: 5,
            rays_per_cluster: 10,
            azimuth_half_range: PI / 3.0,
            elevation_half_range: PI / 12.0,
            ray_offset_std_deg: 5.0,
            path_loss_los: PathLossModel {
                intercept_db: 69.8,
                slope: 2.0,
                ..PathLossModel::default()
            },
            path_loss_nlos: PathLossModel {
                intercept_db: 82.7,
                slope: 2.69,
                ..PathLossModel::default()
            },
            carrier_ghz: 73.0,
            max_excess_length: 0.1,
            force_los: None,
        }
    }
}

/// Urban-microcell LOS probability model.
pub fn los_probability(distance_m: f64) -> f64 {
    assert!(distance_m > 0.0);
    let e = (-distance_m / 39.0).exp();
    (20.0 / distance_m).min(1.0) * (1.0 - e) + e
}

/// Bernoulli LOS draw at the given distance.
pub fn los_indicator<R: Rng + ?Sized>(distance_m: f64, rng: &mut R) -> bool {
    rng.gen::<f64>() < los_probability(distance_m)
}

/// Linear power gain of the floating-intercept path loss model.
pub fn path_loss(params: &ChannelParams, distance_m: f64, los: bool) -> f64 {
    assert!(distance_m > 0.0);
    let model = if los {
        &params.path_loss_los
    } else {
        &params.path_loss_nlos
    };
    10f64.powf(-model.loss_db(distance_m) / 10.0)
}

fn laplacian<R: Rng + ?Sized>(std: f64, rng: &mut R) -> f64 {
    // Standard deviation of Laplace(b) is b*sqrt(2).
    let b = std / 2f64.sqrt();
    let u: f64 = rng.gen::<f64>() - 0.5;
    -b * u.signum() * (1.0 - 2.0 * u.abs()).ln()
}

fn circular_gaussian<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) / 2f64.sqrt()
}

/// Draws one clustered channel realization for a link of the given distance.
pub fn sample_realization<R: Rng + ?Sized>(
    params: &ChannelParams,
    n_tx: usize,
    n_rx: usize,
    distance_m: f64,
    rng: &mut R,
) -> ChannelRealization {
    assert!(params.n_clusters >= 1 && params.rays_per_cluster >= 1);
    let total_rays = params.n_clusters * params.rays_per_cluster;
    let gamma = ((n_rx * n_tx) as f64 / total_rays as f64).sqrt();
    let los_present = match params.force_los {
        Some(v) => v,
        None => los_indicator(distance_m, rng),
    };
    let offset_std = params.ray_offset_std_deg.to_radians();

    let mut clusters = Vec::with_capacity(params.n_clusters);
    for _ in 0..params.n_clusters {
        let center_dep_az = rng.gen_range(-params.azimuth_half_range..=params.azimuth_half_range);
        let center_arr_az = rng.gen_range(-params.azimuth_half_range..=params.azimuth_half_range);
        let center_dep_el =
            PI / 2.0 + rng.gen_range(-params.elevation_half_range..=params.elevation_half_range);
        let center_arr_el =
            PI / 2.0 + rng.gen_range(-params.elevation_half_range..=params.elevation_half_range);
        let mut rays = Vec::with_capacity(params.rays_per_cluster);
        for _ in 0..params.rays_per_cluster {
            let length = distance_m * (1.0 + rng.gen_range(0.0..=params.max_excess_length));
            rays.push(PathComponent {
                gain: circular_gaussian(rng),
                length_m: length,
                delay_s: length / SPEED_OF_LIGHT,
                attenuation: path_loss(params, length, false),
                departure_azimuth: center_dep_az + laplacian(offset_std, rng),
                departure_elevation: center_dep_el + laplacian(offset_std, rng),
                arrival_azimuth: center_arr_az + laplacian(offset_std, rng),
                arrival_elevation: center_arr_el + laplacian(offset_std, rng),
            });
        }
        clusters.push(rays);
    }

    let los = if los_present {
        let dep_az = rng.gen_range(-params.azimuth_half_range..=params.azimuth_half_range);
        let arr_az = rng.gen_range(-params.azimuth_half_range..=params.azimuth_half_range);
        Some(LosComponent {
            phase: rng.gen_range(0.0..2.0 * PI),
            delay_s: distance_m / SPEED_OF_LIGHT,
            attenuation: path_loss(params, distance_m, true),
            departure_azimuth: dep_az,
            departure_elevation: PI / 2.0,
            arrival_azimuth: arr_az,
            arrival_elevation: PI / 2.0,
        })
    } else {
        None
    };

    ChannelRealization {
        clusters,
        los,
        normalization: gamma,
        link_distance_m: distance_m,
        n_tx,
        n_rx,
    }
}

/// Discrete-time composite channel: P-tilde complex N_R x N_T matrices.
#[derive(Debug, Clone)]
pub struct CompositeChannel {
    pub taps: Vec<CMat>,
    pub symbol_interval: f64,
}

impl CompositeChannel {
    pub fn tap_count(&self) -> usize {
        self.taps.len()
    }

    pub fn n_rx(&self) -> usize {
        self.taps[0].nrows()
    }

    pub fn n_tx(&self) -> usize {
        self.taps[0].ncols()
    }
}

/// Multipath span in symbol intervals: number of symbol-spaced taps covered
/// by the delay spread after aligning the earliest arrival to zero.
pub fn multipath_span_taps(realization: &ChannelRealization, t_s: f64) -> Result<usize> {
    let min = realization.min_delay().ok_or(Error::DegenerateChannel)?;
    let max = realization.max_delay().ok_or(Error::DegenerateChannel)?;
    Ok(((max - min) / t_s).floor() as usize + 1)
}

/// Builds the composite symbol-rate tap matrices from a realization and the
/// matched pulse cascade `pulse_autocorr` (a function of lag in symbol
/// intervals).
/// `one_filter_span` is the per-filter span P_h in symbol-spaced taps, so the
/// result has P + 2*P_h - 1 taps. The earliest arrival is aligned so that all
/// nonzero taps fall in 0..P_tilde-1.
pub fn composite_taps<F: Fn(f64) -> f64>(
    realization: &ChannelRealization,
    pulse_autocorr: F,
    one_filter_span: usize,
    t_s: f64,
    tx_geom: &ArrayGeometry,
    rx_geom: &ArrayGeometry,
) -> Result<CompositeChannel> {
    if realization.is_empty() {
        return Err(Error::DegenerateChannel);
    }
    assert_eq!(tx_geom.n_elements(), realization.n_tx);
    assert_eq!(rx_geom.n_elements(), realization.n_rx);
    let min_delay = realization.min_delay().expect("non-empty");
    let p = multipath_span_taps(realization, t_s)?;
    let p_tilde = p + 2 * one_filter_span - 1;
    let align = (one_filter_span - 1) as f64;

    let n_rx = realization.n_rx;
    let n_tx = realization.n_tx;
    let mut taps = vec![CMat::zeros(n_rx, n_tx); p_tilde];

    let add_ray = |coeff: Complex64,
                       delay: f64,
                       arr_az: f64,
                       arr_el: f64,
                       dep_az: f64,
                       dep_el: f64,
                       taps: &mut Vec<CMat>| {
        let a_r = rx_geom.response(arr_az, arr_el);
        let a_t = tx_geom.response(dep_az, dep_el);
        let outer = &a_r * a_t.adjoint();
        // Lag formed in symbol units so grid-aligned delays stay exact.
        let shifted = (delay - min_delay) / t_s;
        for (n, tap) in taps.iter_mut().enumerate() {
            let h = pulse_autocorr(n as f64 - align - shifted);
            if h != 0.0 {
                *tap += &outer * (coeff * h);
            }
        }
    };

    let gamma = realization.normalization;
    for ray in realization.clusters.iter().flatten() {
        let coeff = ray.gain * gamma * ray.attenuation.sqrt();
        add_ray(
            coeff,
            ray.delay_s,
            ray.arrival_azimuth,
            ray.arrival_elevation,
            ray.departure_azimuth,
            ray.departure_elevation,
            &mut taps,
        );
    }
    if let Some(los) = &realization.los {
        let coeff = Complex64::from_polar(1.0, los.phase)
            * ((n_rx * n_tx) as f64).sqrt()
            * los.attenuation.sqrt();
        add_ray(
            coeff,
            los.delay_s,
            los.arrival_azimuth,
            los.arrival_elevation,
            los.departure_azimuth,
            los.departure_elevation,
            &mut taps,
        );
    }

    Ok(CompositeChannel {
        taps,
        symbol_interval: t_s,
    })
}

/// Effective RF-chain level taps L(n) = D_RF^H H(n) Q_RF.
pub fn effective_channel(
    composite: &CompositeChannel,
    q_rf: &CMat,
    d_rf: &CMat,
) -> Result<Vec<CMat>> {
    if q_rf.nrows() != composite.n_tx() || d_rf.nrows() != composite.n_rx() {
        return Err(Error::DimensionMismatch(format!(
            "channel is {}x{}, Q_RF has {} rows, D_RF has {} rows",
            composite.n_rx(),
            composite.n_tx(),
            q_rf.nrows(),
            d_rf.nrows()
        )));
    }
    let d_rf_h = d_rf.adjoint();
    Ok(composite
        .taps
        .iter()
        .map(|h| &d_rf_h * h * q_rf)
        .collect())
}


/// Complex numbers serialized as [re, im] pairs.
pub mod serde_complex {
    use num_complex::Complex64;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(c: &Complex64, s: S) -> Result<S::Ok, S::Error> {
        [c.re, c.im].serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Complex64, D::Error> {
        let [re, im] = <[f64; 2]>::deserialize(d)?;
        Ok(Complex64::new(re, im))
    }
}
