//! Gray-mapped symbol constellations with unit average energy.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum ConstellationKind {
    Qam4,
    Qam16,
    Qam64,
    Psk16,
}

impl ConstellationKind {
    pub fn name(&self) -> &'static str {
        match self {
            ConstellationKind::Qam4 => "4-QAM",
            ConstellationKind::Qam16 => "16-QAM",
            ConstellationKind::Qam64 => "64-QAM",
            ConstellationKind::Psk16 => "16-PSK",
        }
    }
}

impl std::str::FromStr for ConstellationKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "4-qam" | "qam4" | "qpsk" => Ok(ConstellationKind::Qam4),
            "16-qam" | "qam16" => Ok(ConstellationKind::Qam16),
            "64-qam" | "qam64" => Ok(ConstellationKind::Qam64),
            "16-psk" | "psk16" => Ok(ConstellationKind::Psk16),
            other => Err(Error::InvalidConfig(format!(
                "unknown constellation '{other}'"
            ))),
        }
    }
}

/// A symbol alphabet indexed by Gray-coded bit labels: `points[label]` is the
/// symbol whose bit pattern is `label`.
#[derive(Debug, Clone)]
pub struct Constellation {
    pub kind: ConstellationKind,
    pub points: Vec<Complex64>,
    pub bits_per_symbol: usize,
}

fn gray(n: usize) -> usize {
    n ^ (n >> 1)
}

/// Per-axis Gray-coded PAM levels: level index i (natural order) carries the
/// Gray label of i, normalized later.
fn pam_levels(side: usize) -> Vec<(usize, f64)> {
    (0..side)
        .map(|i| (gray(i), (2.0 * i as f64) - (side as f64 - 1.0)))
        .collect()
}

impl Constellation {
    pub fn new(kind: ConstellationKind) -> Self {
        let points = match kind {
            ConstellationKind::Qam4 => square_qam(2),
            ConstellationKind::Qam16 => square_qam(4),
            ConstellationKind::Qam64 => square_qam(8),
            ConstellationKind::Psk16 => psk(16),
        };
        let bits = points.len().trailing_zeros() as usize;
        Self {
            kind,
            points,
            bits_per_symbol: bits,
        }
    }

    pub fn size(&self) -> usize {
        self.points.len()
    }

    /// Maps a bit stream (log2|A| bits per symbol, MSB first) to symbols.
    pub fn map_bits(&self, bits: &[bool]) -> Result<Vec<Complex64>> {
        let b = self.bits_per_symbol;
        if bits.len() % b != 0 {
            return Err(Error::BitCount(bits.len(), b));
        }
        Ok(bits
            .chunks(b)
            .map(|chunk| {
                let mut label = 0usize;
                for &bit in chunk {
                    label = (label << 1) | bit as usize;
                }
                self.points[label]
            })
            .collect())
    }

    /// Nearest-point hard decision returning the symbol's bit label.
    pub fn hard_demap(&self, estimates: &[Complex64]) -> Vec<bool> {
        let b = self.bits_per_symbol;
        let mut bits = Vec::with_capacity(estimates.len() * b);
        for &e in estimates {
            let label = self.nearest(e);
            for k in (0..b).rev() {
                bits.push((label >> k) & 1 == 1);
            }
        }
        bits
    }

    pub fn nearest(&self, e: Complex64) -> usize {
        let mut best = 0usize;
        let mut best_d = f64::INFINITY;
        for (label, &p) in self.points.iter().enumerate() {
            let d = (e - p).norm_sqr();
            if d < best_d {
                best_d = d;
                best = label;
            }
        }
        best
    }
}

fn square_qam(side: usize) -> Vec<Complex64> {
    let bits_per_axis = side.trailing_zeros() as usize;
    let levels = pam_levels(side);
    let m = side * side;
    let mut points = vec![Complex64::new(0.0, 0.0); m];
    let mut energy = 0.0;
    for &(gi, re) in &levels {
        for &(gq, im) in &levels {
            let label = (gi << bits_per_axis) | gq;
            points[label] = Complex64::new(re, im);
            energy += re * re + im * im;
        }
    }
    let scale = (energy / m as f64).sqrt();
    points.iter().map(|p| p / scale).collect()
}

fn psk(m: usize) -> Vec<Complex64> {
    let mut points = vec![Complex64::new(0.0, 0.0); m];
    for i in 0..m {
        let phase = 2.0 * std::f64::consts::PI * i as f64 / m as f64;
        points[gray(i)] = Complex64::from_polar(1.0, phase);
    }
    points
}
