//! Fully-digital SVD beamformers and their hybrid analog/digital
//! decomposition via block coordinate descent.

use nalgebra::DVector;
use num_complex::Complex64;
use rustfft::FftPlanner;

use crate::channel::{CMat, CompositeChannel};
use crate::error::{Error, Result};

/// Fully-digital pre/post-coders from the dominant-tap (SCM) or per-bin
/// (OFDM) singular value decomposition.
#[derive(Debug, Clone)]
pub struct FdBeamformers {
    /// N_T x M, orthonormal columns (right singular vectors).
    pub precoder: CMat,
    /// N_R x M, orthonormal columns (left singular vectors).
    pub postcoder: CMat,
    /// Associated singular values, non-increasing.
    pub singular_values: Vec<f64>,
}

/// Hybrid beamformers: constant-modulus analog factors plus small digital
/// matrices (one per subcarrier for OFDM, a single entry for SCM).
#[derive(Debug, Clone)]
pub struct HybridBeamformers {
    pub q_rf: CMat,
    pub q_bb: Vec<CMat>,
    pub d_rf: CMat,
    pub d_bb: Vec<CMat>,
}

/// Index of the tap with the largest Frobenius norm; ties break low.
pub fn dominant_tap(composite: &CompositeChannel) -> usize {
    let mut best = 0usize;
    let mut best_norm = -1.0f64;
    for (i, tap) in composite.taps.iter().enumerate() {
        let n = tap.norm();
        if n > best_norm {
            best_norm = n;
            best = i;
        }
    }
    best
}

/// Top-M SVD factors of a single matrix with the fixed phase convention.
fn top_m_svd(h: &CMat, m: usize) -> Result<FdBeamformers> {
    if m > h.nrows().min(h.ncols()) {
        return Err(Error::DimensionMismatch(format!(
            "multiplexing order {} exceeds min({}, {})",
            m,
            h.nrows(),
            h.ncols()
        )));
    }
    let svd = h.clone().svd(true, true);
    let u = svd.u.as_ref().expect("u requested");
    let v_t = svd.v_t.as_ref().expect("v_t requested");
    // nalgebra sorts singular values in decreasing order.
    let mut precoder = CMat::zeros(h.ncols(), m);
    let mut postcoder = CMat::zeros(h.nrows(), m);
    for j in 0..m {
        precoder.set_column(j, &v_t.row(j).adjoint());
        postcoder.set_column(j, &u.column(j));
    }
    // Keep D^H H Q diagonal with positive entries: rotate the precoder
    // column and apply the same rotation to the postcoder column.
    for j in 0..m {
        let col = precoder.column(j);
        let mut max_idx = 0usize;
        let mut max_val = 0.0f64;
        for (i, v) in col.iter().enumerate() {
            if v.norm() > max_val {
                max_val = v.norm();
                max_idx = i;
            }
        }
        if max_val > 0.0 {
            let rot = precoder[(max_idx, j)].conj() / max_val;
            for v in precoder.column_mut(j).iter_mut() {
                *v *= rot;
            }
            for v in postcoder.column_mut(j).iter_mut() {
                *v *= rot;
            }
        }
    }
    Ok(FdBeamformers {
        precoder,
        postcoder,
        singular_values: (0..m).map(|j| svd.singular_values[j]).collect(),
    })
}

/// Fully-digital SCM beamformers: SVD of the dominant composite tap.
pub fn fd_scm_beamformers(composite: &CompositeChannel, m: usize) -> Result<FdBeamformers> {
    let mu = dominant_tap(composite);
    top_m_svd(&composite.taps[mu], m)
}

/// Isometric k-point DFT of the tap sequence: H_bar(n), n = 0..k-1.
pub fn channel_dft(taps: &[CMat], k: usize) -> Result<Vec<CMat>> {
    if k < taps.len() {
        return Err(Error::DimensionMismatch(format!(
            "FFT size {} smaller than channel memory {}",
            k,
            taps.len()
        )));
    }
    let (rows, cols) = (taps[0].nrows(), taps[0].ncols());
    let fft = FftPlanner::new().plan_fft_forward(k);
    let mut bins = vec![CMat::zeros(rows, cols); k];
    let scale = 1.0 / (k as f64).sqrt();
    let mut buf = vec![Complex64::new(0.0, 0.0); k];
    for r in 0..rows {
        for c in 0..cols {
            for (i, slot) in buf.iter_mut().enumerate() {
                *slot = if i < taps.len() {
                    taps[i][(r, c)]
                } else {
                    Complex64::new(0.0, 0.0)
                };
            }
            fft.process(&mut buf);
            for (n, bin) in bins.iter_mut().enumerate() {
                bin[(r, c)] = buf[n] * scale;
            }
        }
    }
    Ok(bins)
}

/// Per-subcarrier fully-digital beamformers from the k-point DFT of the
/// composite channel. Requires k >= P_tilde.
pub fn fd_ofdm_beamformers(
    composite: &CompositeChannel,
    m: usize,
    k: usize,
) -> Result<Vec<FdBeamformers>> {
    let bins = channel_dft(&composite.taps, k)?;
    bins.iter().map(|h| top_m_svd(h, m)).collect()
}

/// Initialization mode for the analog factor.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BcdInit {
    /// Phases of the first N_RF target columns (cycled if N_RF exceeds them).
    TargetPhases,
    /// Uniform random phases from the given seed.
    Random(u64),
}

/// Outcome of one BCD-SD run.
#[derive(Debug, Clone)]
pub struct BcdOutcome {
    pub analog: CMat,
    pub digital: CMat,
    /// Frobenius residual ||T - A_RF A_BB||_F per iteration (index 0 is the
    /// residual of the initialization).
    pub residuals: Vec<f64>,
}

fn ridge_solve_gram(gram: &CMat, rhs: &CMat) -> Result<CMat> {
    let dim = gram.nrows();
    let solve = |g: CMat| -> Option<CMat> {
        g.lu().solve(rhs)
    };
    // Estimate conditioning cheaply from the diagonal scale before falling
    // back to a ridge-stabilized solve.
    let svd = gram.clone().svd(false, false);
    let sv = &svd.singular_values;
    let cond = sv[0] / sv[sv.len() - 1].max(f64::MIN_POSITIVE);
    let g = if cond.is_finite() && cond <= 1e12 {
        gram.clone()
    } else {
        let ridge = 1e-10 * gram.trace().re / dim as f64;
        let mut g = gram.clone();
        for i in 0..dim {
            g[(i, i)] += Complex64::new(ridge.max(1e-300), 0.0);
        }
        g
    };
    solve(g).ok_or_else(|| Error::Factorization("persistently singular Gram matrix".into()))
}

/// One exact coordinate-descent sweep over the analog phases at fixed
/// digital factor: entry (i, j) is set to the phase of
/// (T_i - sum_{r != j} a_ir B_r) B_j^H, the entrywise minimizer of the
/// Frobenius residual. Never increases the residual.
fn phase_coordinate_sweep(target: &CMat, analog: &mut CMat, digital: &CMat, modulus: f64) {
    let mut resid = target - &*analog * digital;
    let m_total = target.ncols();
    for i in 0..analog.nrows() {
        for j in 0..analog.ncols() {
            let old = analog[(i, j)];
            let mut c = Complex64::new(0.0, 0.0);
            for t in 0..m_total {
                c += (resid[(i, t)] + old * digital[(j, t)]) * digital[(j, t)].conj();
            }
            if c.norm() == 0.0 {
                continue;
            }
            let new = Complex64::from_polar(modulus, c.arg());
            let delta = old - new;
            for t in 0..m_total {
                resid[(i, t)] += delta * digital[(j, t)];
            }
            analog[(i, j)] = new;
        }
    }
}

/// Block coordinate descent for subspace decomposition: factors `target`
/// into a constant-modulus analog matrix (entries of the given modulus)
/// times a digital matrix, alternating a least-squares digital update and a
/// phase-projection analog update.
///
/// The alternating scheme is nonconvex and a single chain can settle in a
/// poor local minimum, so a small ensemble of chains (the requested
/// initialization plus a few deterministic random ones) advances in
/// lockstep. The returned factors are the best iterate over the ensemble
/// and `residuals` reports its residual after each iteration, so the trace
/// is non-increasing. Iteration `i_max` bounds the per-chain count.
pub fn bcd_sd(
    target: &CMat,
    n_rf: usize,
    modulus: f64,
    i_max: usize,
    tol: f64,
    init: BcdInit,
) -> Result<BcdOutcome> {
    assert!(n_rf >= 1);
    let n = target.nrows();
    if target.norm() == 0.0 {
        return Err(Error::Factorization("zero target matrix".into()));
    }

    let analog = match init {
        BcdInit::TargetPhases => CMat::from_fn(n, n_rf, |i, j| {
            let v = target[(i, j % target.ncols())];
            if v.norm() > 0.0 {
                Complex64::from_polar(modulus, v.arg())
            } else {
                Complex64::new(modulus, 0.0)
            }
        }),
        BcdInit::Random(seed) => {
            use rand::{Rng, SeedableRng};
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            CMat::from_fn(n, n_rf, |_, _| {
                Complex64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU))
            })
        }
    };

    let lsq_digital = |a: &CMat| -> Result<CMat> {
        let gram = a.adjoint() * a;
        let rhs = a.adjoint() * target;
        ridge_solve_gram(&gram, &rhs)
    };

    struct Chain {
        analog: CMat,
        digital: CMat,
        prev: f64,
    }

    // Ensemble: the requested initialization plus a few deterministic
    // random-phase chains to escape poor basins.
    const EXTRA_CHAINS: u64 = 3;
    let mut chains = Vec::with_capacity(1 + EXTRA_CHAINS as usize);
    let digital = lsq_digital(&analog)?;
    let prev = (target - &analog * &digital).norm();
    let mut best_analog = analog.clone();
    let mut best_digital = digital.clone();
    let mut best_r = prev;
    chains.push(Chain {
        analog,
        digital,
        prev,
    });
    for extra in 0..EXTRA_CHAINS {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(0xBCD0 + extra);
        let analog = CMat::from_fn(n, n_rf, |_, _| {
            Complex64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU))
        });
        let digital = lsq_digital(&analog)?;
        let prev = (target - &analog * &digital).norm();
        chains.push(Chain {
            analog,
            digital,
            prev,
        });
    }
    let mut residuals = vec![best_r];

    for _ in 0..i_max {
        for chain in chains.iter_mut() {
            // Analog update: phases of T B^H (B B^H)^{-1}.
            let gram = &chain.digital * chain.digital.adjoint();
            let rhs = (target * chain.digital.adjoint()).adjoint();
            let unconstrained = ridge_solve_gram(&gram, &rhs)?.adjoint();
            let candidate = unconstrained.map(|v| {
                if v.norm() > 0.0 {
                    Complex64::from_polar(modulus, v.arg())
                } else {
                    Complex64::new(modulus, 0.0)
                }
            });
            // The phase projection of the unconstrained solve is a heuristic
            // and can overshoot; fall back to exact entrywise coordinate
            // descent on the phases (never increasing) when it does.
            if (target - &candidate * &chain.digital).norm() <= chain.prev {
                chain.analog = candidate;
            } else {
                phase_coordinate_sweep(target, &mut chain.analog, &chain.digital, modulus);
            }
            chain.digital = lsq_digital(&chain.analog)?;
            chain.prev = (target - &chain.analog * &chain.digital).norm();
            if chain.prev < best_r {
                best_r = chain.prev;
                best_analog.copy_from(&chain.analog);
                best_digital.copy_from(&chain.digital);
            }
        }
        let prev_best = *residuals.last().unwrap();
        residuals.push(best_r);
        if (prev_best - best_r).abs() / prev_best.max(1e-300) < tol {
            break;
        }
    }

    Ok(BcdOutcome {
        analog: best_analog,
        digital: best_digital,
        residuals,
    })
}

/// BCD-SD settings.
#[derive(Debug, Clone, Copy)]
pub struct BcdConfig {
    pub i_max: usize,
    pub tol: f64,
    pub init: BcdInit,
}

impl Default for BcdConfig {
    fn default() -> Self {
        Self {
            i_max: 50,
            tol: 1e-6,
            init: BcdInit::TargetPhases,
        }
    }
}

/// Hybrid decomposition of SCM beamformers. The transmit side is rescaled
/// after convergence so ||Q_RF Q_BB||_F^2 = M exactly.
pub fn hybrid_scm(
    fd: &FdBeamformers,
    n_tx_rf: usize,
    n_rx_rf: usize,
    cfg: &BcdConfig,
) -> Result<HybridBeamformers> {
    let n_t = fd.precoder.nrows();
    let n_r = fd.postcoder.nrows();
    let m = fd.precoder.ncols() as f64;
    let q = bcd_sd(
        &fd.precoder,
        n_tx_rf,
        1.0 / (n_t as f64).sqrt(),
        cfg.i_max,
        cfg.tol,
        cfg.init,
    )?;
    let d = bcd_sd(
        &fd.postcoder,
        n_rx_rf,
        1.0 / (n_r as f64).sqrt(),
        cfg.i_max,
        cfg.tol,
        cfg.init,
    )?;
    let cascade = &q.analog * &q.digital;
    let scale = (m / cascade.norm_squared()).sqrt();
    Ok(HybridBeamformers {
        q_rf: q.analog,
        q_bb: vec![q.digital * Complex64::new(scale, 0.0)],
        d_rf: d.analog,
        d_bb: vec![d.digital],
    })
}

/// Hybrid decomposition of per-subcarrier OFDM beamformers: stacks the k
/// per-bin targets horizontally, runs one BCD-SD per side, splits the
/// digital factor back per bin and rescales so the summed transmit power
/// constraint holds with equality.
pub fn hybrid_ofdm(
    fd_list: &[FdBeamformers],
    n_tx_rf: usize,
    n_rx_rf: usize,
    cfg: &BcdConfig,
) -> Result<HybridBeamformers> {
    assert!(!fd_list.is_empty());
    let k = fd_list.len();
    let n_t = fd_list[0].precoder.nrows();
    let n_r = fd_list[0].postcoder.nrows();
    let m = fd_list[0].precoder.ncols();

    let mut q_target = CMat::zeros(n_t, k * m);
    let mut d_target = CMat::zeros(n_r, k * m);
    for (n, fd) in fd_list.iter().enumerate() {
        q_target.view_mut((0, n * m), (n_t, m)).copy_from(&fd.precoder);
        d_target.view_mut((0, n * m), (n_r, m)).copy_from(&fd.postcoder);
    }

    let q = bcd_sd(
        &q_target,
        n_tx_rf,
        1.0 / (n_t as f64).sqrt(),
        cfg.i_max,
        cfg.tol,
        cfg.init,
    )?;
    let d = bcd_sd(
        &d_target,
        n_rx_rf,
        1.0 / (n_r as f64).sqrt(),
        cfg.i_max,
        cfg.tol,
        cfg.init,
    )?;

    let cascade = &q.analog * &q.digital;
    let scale = ((k * m) as f64 / cascade.norm_squared()).sqrt();

    let split = |stacked: &CMat, scale: f64| -> Vec<CMat> {
        (0..k)
            .map(|n| {
                let mut block = CMat::zeros(stacked.nrows(), m);
                block.copy_from(&stacked.view((0, n * m), (stacked.nrows(), m)));
                block * Complex64::new(scale, 0.0)
            })
            .collect()
    };

    Ok(HybridBeamformers {
        q_rf: q.analog,
        q_bb: split(&q.digital, scale),
        d_rf: d.analog,
        d_bb: split(&d.digital, 1.0),
    })
}

/// Identity analog factors for fully-digital operation.
pub fn identity_analog(n: usize) -> CMat {
    CMat::identity(n, n)
}

/// Convenience: singular values of a matrix (descending).
pub fn singular_values(h: &CMat) -> DVector<f64> {
    h.clone().svd(false, false).singular_values
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn rc<R: Rng>(rows: usize, cols: usize, rng: &mut R) -> CMat {
        CMat::from_fn(rows, cols, |_, _| {
            Complex64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0))
        })
    }

    fn composite_from(taps: Vec<CMat>) -> CompositeChannel {
        CompositeChannel {
            taps,
            symbol_interval: 1e-9,
        }
    }

    #[test]
    fn dominant_tap_picks_largest_and_breaks_ties_low() {
        let a = CMat::from_element(2, 2, Complex64::new(0.1, 0.0));
        let b = CMat::from_element(2, 2, Complex64::new(0.9, 0.0));
        let c = composite_from(vec![a.clone(), b.clone(), b.clone(), a]);
        assert_eq!(dominant_tap(&c), 1);
    }

    #[test]
    fn svd_diagonalizes_with_positive_gains() {
        // D^H H Q is diagonal with the top-M singular values on the diagonal.
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        let h = rc(6, 5, &mut rng);
        let fd = fd_scm_beamformers(&composite_from(vec![h.clone()]), 3).unwrap();
        let eff = fd.postcoder.adjoint() * &h * &fd.precoder;
        let sv = singular_values(&h);
        for i in 0..3 {
            for j in 0..3 {
                if i == j {
                    assert!(eff[(i, i)].im.abs() < 1e-10);
                    assert_abs_diff_eq!(eff[(i, i)].re, sv[i], epsilon = 1e-10);
                    assert_abs_diff_eq!(fd.singular_values[i], sv[i], epsilon = 1e-12);
                } else {
                    assert!(eff[(i, j)].norm() < 1e-10, "off-diagonal {}", eff[(i, j)]);
                }
            }
        }
        assert!(fd.singular_values[0] >= fd.singular_values[1]);
        // Orthonormal columns.
        let qq = fd.precoder.adjoint() * &fd.precoder;
        assert!((qq - CMat::identity(3, 3)).norm() < 1e-10);
    }

    #[test]
    fn svd_rejects_excess_multiplexing() {
        let mut rng = ChaCha8Rng::seed_from_u64(32);
        let h = rc(4, 2, &mut rng);
        assert!(fd_scm_beamformers(&composite_from(vec![h]), 3).is_err());
    }

    #[test]
    fn rank_one_channel_recovers_outer_product() {
        let mut rng = ChaCha8Rng::seed_from_u64(33);
        let u = rc(5, 1, &mut rng);
        let v = rc(4, 1, &mut rng);
        let h = &u * v.adjoint();
        let fd = fd_scm_beamformers(&composite_from(vec![h.clone()]), 1).unwrap();
        // Beamformers align with the factors up to a common phase.
        let gain = (fd.postcoder.adjoint() * &h * &fd.precoder)[(0, 0)];
        assert_abs_diff_eq!(gain.re, u.norm() * v.norm(), epsilon = 1e-10);
        assert!(gain.im.abs() < 1e-10);
    }

    #[test]
    fn channel_dft_matches_direct_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(34);
        let taps: Vec<CMat> = (0..3).map(|_| rc(2, 2, &mut rng)).collect();
        let k = 8;
        let bins = channel_dft(&taps, k).unwrap();
        let scale = 1.0 / (k as f64).sqrt();
        for n in 0..k {
            let mut want = CMat::zeros(2, 2);
            for (l, tap) in taps.iter().enumerate() {
                let w = Complex64::from_polar(
                    scale,
                    -2.0 * std::f64::consts::PI * (n * l) as f64 / k as f64,
                );
                want += tap * w;
            }
            assert!((&bins[n] - want).norm() < 1e-12, "bin {}", n);
        }
        assert!(channel_dft(&taps, 2).is_err());
    }

    #[test]
    fn bcd_residuals_never_increase() {
        let mut rng = ChaCha8Rng::seed_from_u64(35);
        for trial in 0..100u64 {
            let (n, n_rf, m) = if trial % 2 == 0 { (16, 2, 2) } else { (50, 3, 2) };
            let target = rc(n, m, &mut rng);
            let out = bcd_sd(
                &target,
                n_rf,
                1.0 / (n as f64).sqrt(),
                30,
                0.0,
                BcdInit::Random(trial),
            )
            .unwrap();
            for w in out.residuals.windows(2) {
                assert!(
                    w[1] <= w[0] + 1e-9 * w[0].max(1.0),
                    "trial {}: {} -> {}",
                    trial,
                    w[0],
                    w[1]
                );
            }
        }
    }

    #[test]
    fn bcd_analog_is_constant_modulus() {
        let mut rng = ChaCha8Rng::seed_from_u64(36);
        let target = rc(12, 2, &mut rng);
        let modulus = 1.0 / 12f64.sqrt();
        let out = bcd_sd(&target, 3, modulus, 25, 1e-8, BcdInit::TargetPhases).unwrap();
        for v in out.analog.iter() {
            assert_abs_diff_eq!(v.norm(), modulus, epsilon = 1e-12);
        }
        assert_eq!(out.analog.shape(), (12, 3));
        assert_eq!(out.digital.shape(), (3, 2));
    }

    #[test]
    fn bcd_recovers_feasible_target() {
        // A target that is exactly constant-modulus times digital is
        // recovered to high accuracy.
        let mut rng = ChaCha8Rng::seed_from_u64(37);
        let n = 16;
        let modulus = 1.0 / (n as f64).sqrt();
        let analog = CMat::from_fn(n, 2, |_, _| {
            Complex64::from_polar(modulus, rng.gen_range(0.0..std::f64::consts::TAU))
        });
        let digital = rc(2, 2, &mut rng);
        let target = &analog * &digital;
        let out = bcd_sd(&target, 2, modulus, 200, 0.0, BcdInit::Random(7)).unwrap();
        let resid = (&target - &out.analog * &out.digital).norm() / target.norm();
        assert!(resid < 1e-6, "relative residual {}", resid);
    }

    #[test]
    fn bcd_zero_iterations_returns_init_fit() {
        let mut rng = ChaCha8Rng::seed_from_u64(38);
        let target = rc(8, 2, &mut rng);
        let out = bcd_sd(&target, 2, 0.5, 0, 1e-6, BcdInit::TargetPhases).unwrap();
        assert_eq!(out.residuals.len(), 1);
        // Init analog carries the target phases at the requested modulus.
        for i in 0..8 {
            for j in 0..2 {
                let v = out.analog[(i, j)];
                assert_abs_diff_eq!(v.norm(), 0.5, epsilon = 1e-12);
                assert_abs_diff_eq!(v.arg(), target[(i, j)].arg(), epsilon = 1e-12);
            }
        }
    }

    #[test]
    fn hybrid_scm_power_constraint_is_exact() {
        let mut rng = ChaCha8Rng::seed_from_u64(39);
        let h = rc(6, 12, &mut rng);
        let fd = fd_scm_beamformers(&composite_from(vec![h]), 2).unwrap();
        let hy = hybrid_scm(&fd, 3, 3, &BcdConfig::default()).unwrap();
        let cascade = &hy.q_rf * &hy.q_bb[0];
        assert_abs_diff_eq!(cascade.norm_squared(), 2.0, epsilon = 1e-12);
        for v in hy.q_rf.iter() {
            assert_abs_diff_eq!(v.norm(), 1.0 / 12f64.sqrt(), epsilon = 1e-12);
        }
        for v in hy.d_rf.iter() {
            assert_abs_diff_eq!(v.norm(), 1.0 / 6f64.sqrt(), epsilon = 1e-12);
        }
    }

    #[test]
    fn hybrid_ofdm_power_constraint_and_split() {
        let mut rng = ChaCha8Rng::seed_from_u64(40);
        let taps: Vec<CMat> = (0..2).map(|_| rc(4, 8, &mut rng)).collect();
        let k = 8;
        let fd = fd_ofdm_beamformers(&composite_from(taps), 2, k).unwrap();
        let hy = hybrid_ofdm(&fd, 2, 2, &BcdConfig::default()).unwrap();
        assert_eq!(hy.q_bb.len(), k);
        assert_eq!(hy.d_bb.len(), k);
        let total: f64 = hy
            .q_bb
            .iter()
            .map(|q| (&hy.q_rf * q).norm_squared())
            .sum();
        assert_abs_diff_eq!(total, (k * 2) as f64, epsilon = 1e-10);
    }

    #[test]
    fn hybrid_ofdm_with_one_bin_matches_scm() {
        // k = 1 stacking reduces to the SCM decomposition of the same target.
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        let h = rc(4, 8, &mut rng);
        let fd = fd_scm_beamformers(&composite_from(vec![h]), 2).unwrap();
        let cfg = BcdConfig::default();
        let scm = hybrid_scm(&fd, 2, 2, &cfg).unwrap();
        let ofdm = hybrid_ofdm(std::slice::from_ref(&fd), 2, 2, &cfg).unwrap();
        assert!((&scm.q_rf - &ofdm.q_rf).norm() < 1e-12);
        assert!((&scm.q_bb[0] - &ofdm.q_bb[0]).norm() < 1e-12);
        assert!((&scm.d_bb[0] - &ofdm.d_bb[0]).norm() < 1e-12);
    }
}
