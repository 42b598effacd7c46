//! Transmit nonlinearities: Rapp power amplifier with AM/PM distortion and
//! the memoryless Volterra signal predistorter.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Rapp solid-state amplifier with an AM/PM phase law.
///
/// Input amplitudes are relative to unit mean-square drive level; the output
/// saturates at sqrt(saturation_power).
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(default)]
pub struct PaModel {
    /// Saturation power P_T, watts.
    pub saturation_power: f64,
    /// Smoothness parameter p.
    pub smoothness: f64,
    /// AM/PM slope, degrees per dB above the threshold.
    pub ampm_slope_deg_per_db: f64,
    /// Input level (dB relative to unit mean-square amplitude) above which
    /// the phase offset kicks in.
    pub ampm_threshold_db: f64,
}

impl Default for PaModel {
    fn default() -> Self {
        Self {
            saturation_power: 1.0,
            smoothness: 2.0,
            ampm_slope_deg_per_db: 2.0,
            ampm_threshold_db: -1.5,
        }
    }
}

impl PaModel {
    pub fn with_saturation(saturation_power: f64) -> Self {
        Self {
            saturation_power,
            ..Self::default()
        }
    }

    /// AM/AM amplitude law A(zeta) = sqrt(P_T) * zeta / (1 + zeta^(2p))^(1/(2p)).
    pub fn amplitude(&self, zeta: f64) -> f64 {
        let p2 = 2.0 * self.smoothness;
        self.saturation_power.sqrt() * zeta / (1.0 + zeta.powf(p2)).powf(1.0 / p2)
    }

    /// Phase offset in radians at input amplitude `zeta`.
    pub fn phase_offset(&self, zeta: f64) -> f64 {
        if zeta <= 0.0 {
            return 0.0;
        }
        let level_db = 20.0 * zeta.log10();
        if level_db > self.ampm_threshold_db {
            (self.ampm_slope_deg_per_db * (level_db - self.ampm_threshold_db)).to_radians()
        } else {
            0.0
        }
    }

    /// Full complex transfer: AM/AM on the magnitude, AM/PM added to the phase.
    pub fn transfer(&self, x: Complex64) -> Complex64 {
        let zeta = x.norm();
        if zeta == 0.0 {
            return Complex64::new(0.0, 0.0);
        }
        let amp = self.amplitude(zeta);
        let phase = x.arg() + self.phase_offset(zeta);
        Complex64::from_polar(amp, phase)
    }
}

/// Memoryless odd-order Volterra predistorter y = sum_s g_s x |x|^(2s).
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct Predistorter {
    pub coefficients: Vec<Complex64>,
}

impl Predistorter {
    pub fn identity() -> Self {
        Self {
            coefficients: vec![Complex64::new(1.0, 0.0)],
        }
    }

    /// The fixed order-2 coefficient triple used as the built-in reference
    /// predistorter.
    pub fn reference_spd() -> Self {
        Self {
            coefficients: vec![
                Complex64::new(0.8275, 0.0601),
                Complex64::new(0.6335, -0.0921),
                Complex64::new(0.0319, -0.2234),
            ],
        }
    }

    pub fn order(&self) -> usize {
        self.coefficients.len().saturating_sub(1)
    }

    pub fn apply(&self, x: Complex64) -> Complex64 {
        let m2 = x.norm_sqr();
        let mut pow = Complex64::new(1.0, 0.0);
        let mut acc = Complex64::new(0.0, 0.0);
        for &g in &self.coefficients {
            acc += g * x * pow;
            pow *= m2;
        }
        acc
    }
}

/// How the amplification stage is simulated.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub enum PaMode {
    /// Distortion-free amplifier A(zeta) = sqrt(P_T) * zeta.
    Ideal,
    /// Rapp amplifier without predistortion.
    Rapp(PaModel),
    /// Rapp amplifier preceded by a signal predistorter.
    RappSpd(PaModel, Predistorter),
}

impl PaMode {
    pub fn is_ideal(&self) -> bool {
        matches!(self, PaMode::Ideal)
    }

    pub fn process(&self, x: Complex64, saturation_power: f64) -> Complex64 {
        match self {
            PaMode::Ideal => x * saturation_power.sqrt(),
            PaMode::Rapp(pa) => pa.transfer(x),
            PaMode::RappSpd(pa, pd) => pa.transfer(pd.apply(x)),
        }
    }
}

fn volterra_basis(x: Complex64, order: usize) -> Vec<Complex64> {
    let m2 = x.norm_sqr();
    let mut basis = Vec::with_capacity(order + 1);
    let mut pow = Complex64::new(1.0, 0.0);
    for _ in 0..=order {
        basis.push(x * pow);
        pow *= m2;
    }
    basis
}

/// Least-squares fit of the predistorter so that PA(predistort(x)) tracks
/// sqrt(P_T)*x over circular Gaussian training samples at unit mean square.
///
/// The nonconvex cascade fit is solved by a damped fixed point: each round
/// nudges the per-sample predistorter target by the cascade error (scaled by
/// the small-signal gain sqrt(P_T)) and re-solves a ridge-regularized linear
/// least squares on the Volterra basis.
pub fn fit_predistorter<R: Rng + ?Sized>(
    pa: &PaModel,
    order: usize,
    n_train: usize,
    rng: &mut R,
) -> Result<Predistorter> {
    if n_train < 10 * (order + 1) {
        return Err(Error::TooFewSamples {
            needed: 10 * (order + 1),
            got: n_train,
        });
    }
    let samples: Vec<Complex64> = (0..n_train)
        .map(|_| {
            let re: f64 = StandardNormal.sample(rng);
            let im: f64 = StandardNormal.sample(rng);
            Complex64::new(re, im) / 2f64.sqrt()
        })
        .collect();
    fit_predistorter_on(pa, order, &samples)
}

/// Same as [`fit_predistorter`] with an explicit training set.
pub fn fit_predistorter_on(
    pa: &PaModel,
    order: usize,
    samples: &[Complex64],
) -> Result<Predistorter> {
    use nalgebra::{DMatrix, DVector};

    let n = samples.len();
    let cols = order + 1;
    if n < 10 * cols {
        return Err(Error::TooFewSamples {
            needed: 10 * cols,
            got: n,
        });
    }
    let mut basis = DMatrix::from_fn(n, cols, |i, j| volterra_basis(samples[i], order)[j]);
    // Equilibrate the columns so the conditioning test sees shape, not scale.
    let col_scales: Vec<f64> = (0..cols)
        .map(|j| basis.column(j).norm().max(f64::MIN_POSITIVE))
        .collect();
    for j in 0..cols {
        let s = Complex64::new(1.0 / col_scales[j], 0.0);
        basis.column_mut(j).scale_mut(s.re);
    }
    let gram = basis.adjoint() * &basis;
    // Degenerate training sets (e.g. constant-modulus samples) make the
    // Volterra basis rank-deficient.
    let svd = gram.clone().svd(false, false);
    let sv = &svd.singular_values;
    let cond = sv[0] / sv[sv.len() - 1].max(f64::MIN_POSITIVE);
    if !cond.is_finite() || cond > 1e12 {
        return Err(Error::DegenerateTraining);
    }
    let ridge = 1e-8 * gram.trace().re / cols as f64;
    let mut reg = gram;
    for j in 0..cols {
        reg[(j, j)] += num_complex::Complex64::new(ridge, 0.0);
    }
    let chol = nalgebra::linalg::Cholesky::new(reg).ok_or(Error::DegenerateTraining)?;

    let sqrt_pt = pa.saturation_power.sqrt();
    let ideal: Vec<Complex64> = samples.iter().map(|&x| x * sqrt_pt).collect();
    let to_pd = |c: &DVector<Complex64>| Predistorter {
        coefficients: c
            .iter()
            .zip(&col_scales)
            .map(|(g, s)| g / s)
            .collect(),
    };

    // Start from the analytic Rapp inverse: A(z) = sqrt(P_T) a solves to
    // z = a / (1 - a^(2p))^(1/(2p)) for a < 1, with the drive capped for
    // samples past saturation, and the AM/PM offset pre-rotated away.
    let p2 = 2.0 * pa.smoothness;
    let max_drive = 4.0f64;
    let inverse = |x: Complex64| -> Complex64 {
        let a = x.norm();
        if a == 0.0 {
            return x;
        }
        let z = if a < 1.0 {
            (a / (1.0 - a.powf(p2)).powf(1.0 / p2)).min(max_drive)
        } else {
            max_drive
        };
        Complex64::from_polar(z, x.arg() - pa.phase_offset(z))
    };
    let mut target = DVector::from_iterator(n, samples.iter().map(|&x| inverse(x)));
    let mut coeffs = {
        let rhs = basis.adjoint() * &target;
        chol.solve(&rhs)
    };
    let mut best: Option<(Predistorter, f64)> = None;
    for _ in 0..30 {
        let pd = to_pd(&coeffs);
        let mut mse = 0.0;
        for i in 0..n {
            let out = pa.transfer(pd.apply(samples[i]));
            let err = ideal[i] - out;
            mse += err.norm_sqr();
            // Damped update; samples past saturation are not invertible, so
            // cap the requested drive level instead of chasing them.
            let t = target[i] + err / sqrt_pt * 0.5;
            target[i] = if t.norm() > 4.0 { t * (4.0 / t.norm()) } else { t };
        }
        mse /= n as f64;
        match &best {
            Some((_, b)) if mse >= *b => {
                if mse > 10.0 * b {
                    break;
                }
            }
            _ => best = Some((pd, mse)),
        }
        let rhs = basis.adjoint() * &target;
        coeffs = chol.solve(&rhs);
    }
    let (pd, mse) = best.expect("at least one iteration");
    Ok(polish_cascade_fit(pa, pd, mse, samples))
}

/// Levenberg-Marquardt refinement of the cascade MSE in the coefficients.
/// The target-domain fixed point lands near but not at the cascade optimum;
/// this descends the true objective from there.
fn polish_cascade_fit(
    pa: &PaModel,
    init: Predistorter,
    init_mse: f64,
    samples: &[Complex64],
) -> Predistorter {
    use nalgebra::{DMatrix, DVector};

    let n = samples.len();
    let cols = init.coefficients.len();
    let dim = 2 * cols;

    let sqrt_pt = pa.saturation_power.sqrt();
    let residuals = |g: &[Complex64]| -> Vec<f64> {
        let pd = Predistorter {
            coefficients: g.to_vec(),
        };
        let mut r = Vec::with_capacity(2 * n);
        for &x in samples {
            let e = pa.transfer(pd.apply(x)) - x * sqrt_pt;
            r.push(e.re);
            r.push(e.im);
        }
        r
    };
    let mut g = init.coefficients.clone();
    let mut best = (g.clone(), init_mse);
    let mut lambda = 1e-3;
    for _ in 0..40 {
        let r0 = residuals(&g);
        // Forward-difference Jacobian over the real parameterization.
        let mut jac = DMatrix::zeros(2 * n, dim);
        let eps = 1e-6;
        for d in 0..dim {
            let mut gp = g.clone();
            if d % 2 == 0 {
                gp[d / 2] += Complex64::new(eps, 0.0);
            } else {
                gp[d / 2] += Complex64::new(0.0, eps);
            }
            let rp = residuals(&gp);
            for i in 0..2 * n {
                jac[(i, d)] = (rp[i] - r0[i]) / eps;
            }
        }
        let jtj = jac.transpose() * &jac;
        let jtr = jac.transpose() * DVector::from_vec(r0);
        let mut improved = false;
        for _ in 0..8 {
            let mut lhs = jtj.clone();
            for d in 0..dim {
                lhs[(d, d)] += lambda * jtj[(d, d)].max(1e-12);
            }
            let Some(chol) = nalgebra::linalg::Cholesky::new(lhs) else {
                lambda *= 10.0;
                continue;
            };
            let step = chol.solve(&(-&jtr));
            let trial: Vec<Complex64> = (0..cols)
                .map(|j| g[j] + Complex64::new(step[2 * j], step[2 * j + 1]))
                .collect();
            let mse = residuals(&trial).iter().map(|r| r * r).sum::<f64>() / n as f64;
            if mse < best.1 {
                g = trial.clone();
                best = (trial, mse);
                lambda = (lambda * 0.3).max(1e-12);
                improved = true;
                break;
            }
            lambda *= 10.0;
        }
        if !improved {
            break;
        }
    }
    Predistorter {
        coefficients: best.0,
    }
}

/// Mean-square cascade error E|PA(pd(x)) - sqrt(P_T) x|^2 over the samples.
pub fn cascade_mse(pa: &PaModel, pd: Option<&Predistorter>, samples: &[Complex64]) -> f64 {
    let sqrt_pt = pa.saturation_power.sqrt();
    let mut acc = 0.0;
    for &x in samples {
        let u = pd.map_or(x, |p| p.apply(x));
        acc += (pa.transfer(u) - x * sqrt_pt).norm_sqr();
    }
    acc / samples.len() as f64
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn rapp_reference_point() {
        // A(1) with p = 2, P_T = 1: 1 / 2^(1/4); phase offset 2 deg/dB over
        // the -1.5 dB threshold at 0 dB input -> 3 degrees.
        let pa = PaModel::default();
        assert_abs_diff_eq!(pa.amplitude(1.0), 2f64.powf(-0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(
            pa.phase_offset(1.0),
            3f64.to_radians(),
            epsilon = 1e-12
        );
        let y = pa.transfer(Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(y.norm(), 2f64.powf(-0.25), epsilon = 1e-12);
        assert_abs_diff_eq!(y.arg(), 3f64.to_radians(), epsilon = 1e-12);
    }

    #[test]
    fn rapp_limits() {
        let pa = PaModel::with_saturation(4.0);
        assert_eq!(pa.transfer(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
        assert_abs_diff_eq!(pa.amplitude(1e6), 2.0, epsilon = 1e-4);
        // Strictly increasing, bounded, small-signal gain sqrt(P_T).
        let mut prev = 0.0;
        for i in 1..200 {
            let z = i as f64 * 0.05;
            let a = pa.amplitude(z);
            assert!(a > prev && a < 2.0);
            prev = a;
        }
        assert_abs_diff_eq!(pa.amplitude(1e-6) / 1e-6, 2.0, epsilon = 1e-9);
    }

    #[test]
    fn predistorter_reference_sum() {
        // x = 1 evaluates to the plain coefficient sum.
        let pd = Predistorter::reference_spd();
        let y = pd.apply(Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(y.re, 1.4929, epsilon = 1e-12);
        assert_abs_diff_eq!(y.im, -0.2554, epsilon = 1e-12);
        assert_eq!(pd.apply(Complex64::new(0.0, 0.0)), Complex64::new(0.0, 0.0));
    }

    #[test]
    fn predistorter_linear_in_coefficients() {
        let pd = Predistorter::reference_spd();
        let doubled = Predistorter {
            coefficients: pd.coefficients.iter().map(|g| g * 2.0).collect(),
        };
        let x = Complex64::new(0.3, -0.7);
        assert_abs_diff_eq!(
            (doubled.apply(x) - pd.apply(x) * 2.0).norm(),
            0.0,
            epsilon = 1e-14
        );
    }

    #[test]
    fn fit_identity_for_linear_pa() {
        // Deep in backoff the Rapp law is linear; the fitted predistorter
        // reduces to the identity.
        let pa = PaModel {
            saturation_power: 1.0,
            smoothness: 2.0,
            ampm_slope_deg_per_db: 0.0,
            ampm_threshold_db: 200.0,
        };
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let samples: Vec<Complex64> = (0..500)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) * 0.01 / 2f64.sqrt()
            })
            .collect();
        let pd = fit_predistorter_on(&pa, 2, &samples).unwrap();
        assert_abs_diff_eq!(pd.coefficients[0].re, 1.0, epsilon = 1e-3);
        assert!(pd.coefficients[0].im.abs() < 1e-3);
    }

    #[test]
    fn fitted_spd_beats_no_spd_and_reference_preset() {
        let pa = PaModel::default();
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let samples: Vec<Complex64> = (0..20_000)
            .map(|_| {
                let re: f64 = StandardNormal.sample(&mut rng);
                let im: f64 = StandardNormal.sample(&mut rng);
                Complex64::new(re, im) / 2f64.sqrt()
            })
            .collect();
        let pd = fit_predistorter_on(&pa, 2, &samples).unwrap();
        let mse_none = cascade_mse(&pa, None, &samples);
        let mse_ref = cascade_mse(&pa, Some(&Predistorter::reference_spd()), &samples);
        let mse_fit = cascade_mse(&pa, Some(&pd), &samples);
        assert!(mse_fit < mse_none, "fit {} vs none {}", mse_fit, mse_none);
        assert!(mse_fit < mse_ref, "fit {} vs reference {}", mse_fit, mse_ref);
    }

    #[test]
    fn degenerate_training_rejected() {
        let pa = PaModel::default();
        // Constant-modulus samples make |x| carry no information.
        let samples: Vec<Complex64> = (0..100)
            .map(|i| Complex64::from_polar(1.0, i as f64))
            .collect();
        assert!(matches!(
            fit_predistorter_on(&pa, 2, &samples),
            Err(Error::DegenerateTraining)
        ));
    }
}
