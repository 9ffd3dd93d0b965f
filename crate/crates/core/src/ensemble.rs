//! Monte Carlo ensembles and the closed-form predictions they are compared
//! against: outcome-count statistics, the emergent position density for
//! x_est, momentum conservation, and the momentum-variance budget.
//!
//! Trajectory `j` of an ensemble runs on RNG stream `j` derived from the
//! master seed, and aggregation reduces the per-trajectory results in index
//! order, so ensembles are reproducible bit-for-bit at any thread count.

use rayon::prelude::*;
use statrs::distribution::{ChiSquared, ContinuousCDF};
use statrs::function::factorial::ln_binomial;
use std::f64::consts::{FRAC_PI_4, PI};

use crate::config::{SimConfig, Tolerances};
use crate::interferometer::gaussian_approx_final;
use crate::stats::{chi_square_test, mean, sample_variance, standard_error, ChiSquareResult};
use crate::stats::{Comparison, XestHistogram};
use crate::trajectory::{predicted_sigma2_xest, TrajectoryContext};
use crate::wavefunction::Wavefunction;
use crate::{Error, Result};

/// Aggregated results of `m` independent trajectories from one initial
/// state, with per-trajectory samples retained for the statistical checks.
#[derive(Debug, Clone)]
pub struct EnsembleStats {
    pub n_photons: usize,
    pub k: f64,
    pub hbar: f64,
    pub m_trajectories: usize,
    pub master_seed: u64,
    pub tolerances: Tolerances,

    /// Position estimate of each trajectory; lives on the lattice
    /// `(2 n_b - N) / (2kN)`.
    pub xest_samples: Vec<f64>,
    pub n_b_samples: Vec<usize>,
    pub xest_histogram: XestHistogram,

    pub mean_xest: f64,
    pub var_xest: f64,

    /// Ensemble mean of the per-trajectory final `<p>`.
    pub mean_p_final: f64,
    /// Variance across trajectories of the final `<p>`.
    pub var_of_mean_p_final: f64,
    /// Ensemble mean of the per-trajectory final `Var p`.
    pub mean_var_p_final: f64,
    /// Total momentum variance over the whole ensemble of measurements:
    /// `var_of_mean_p_final + mean_var_p_final` (law of total variance).
    pub var_p_final: f64,
    /// Ensemble mean of the final position variance.
    pub mean_sigma2_x_final: f64,

    /// Ensemble means of the two pieces of the local momentum second moment
    /// of `psi0` at x_est; they average to `<p0^2>` jointly, but their
    /// individual weights are reported separately rather than interpreted.
    pub mean_local_grad_sq_term: f64,
    pub mean_local_curvature_term: f64,

    /// Fraction of trajectories with `x_est > 0`.
    pub born_fraction_positive: f64,
    /// The same fraction predicted by the exact binomial-weighted form.
    pub born_fraction_predicted: f64,

    pub chi_square: Option<ChiSquareResult>,
    pub comparisons: Vec<Comparison>,

    pub p_mean_samples: Vec<f64>,
    pub var_p_samples: Vec<f64>,
    pub var_x_samples: Vec<f64>,
    /// `p_loc(psi0, x_est)` per trajectory; `None` if x_est fell on a node.
    pub local_p_samples: Vec<Option<f64>>,
}

struct TrajectorySummary {
    n_b: usize,
    x_est: f64,
    var_x: f64,
    p_mean: f64,
    var_p: f64,
    local_p: Option<f64>,
    local_p2_terms: Option<(f64, f64)>,
    var_x_predicted: Option<f64>,
}

fn summarize(
    record: &crate::trajectory::TrajectoryRecord,
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
    hbar: f64,
) -> TrajectorySummary {
    // The final state carries the N-photon momentum kick e^{i N k x}; remove
    // that known carrier before differentiating so the finite-difference
    // stencils see only the smooth envelope. Var p is ramp-invariant.
    let envelope = record.final_state.with_phase_ramp(-(n_photons as f64) * k);
    let p_mean = n_photons as f64 * hbar * k + envelope.momentum_mean();
    let var_p = envelope.momentum_variance();
    TrajectorySummary {
        n_b: record.n_b,
        x_est: record.x_est,
        var_x: record.final_state.position_variance(),
        p_mean,
        var_p,
        local_p: psi0.local_momentum_density(record.x_est).ok(),
        local_p2_terms: psi0.local_momentum_second_moment_terms(record.x_est).ok(),
        var_x_predicted: gaussian_approx_final(psi0, n_photons, k, record.x_est)
            .map(|w| w.position_variance())
            .ok(),
    }
}

/// Run `config.m_trajectories` independent seeded trajectories and fill the
/// comparison table against the closed-form predictions.
pub fn run_ensemble(config: &SimConfig) -> Result<EnsembleStats> {
    config.validate()?;
    let psi0 = config.initial_state()?;
    let params = config.interferometer_params();
    let (n, k, m) = (config.n_photons, config.k, config.m_trajectories);
    let hbar = psi0.hbar();
    let tol = config.tolerances;

    let ctx = TrajectoryContext::new(&psi0, params);
    let summaries: Result<Vec<TrajectorySummary>> = (0..m)
        .into_par_iter()
        .map(|j| {
            let record = ctx.run(n, config.master_seed, j as u64)?;
            Ok(summarize(&record, &psi0, n, k, hbar))
        })
        .collect();
    let summaries = summaries?;

    let xest_samples: Vec<f64> = summaries.iter().map(|s| s.x_est).collect();
    let n_b_samples: Vec<usize> = summaries.iter().map(|s| s.n_b).collect();
    let p_mean_samples: Vec<f64> = summaries.iter().map(|s| s.p_mean).collect();
    let var_p_samples: Vec<f64> = summaries.iter().map(|s| s.var_p).collect();
    let var_x_samples: Vec<f64> = summaries.iter().map(|s| s.var_x).collect();
    let local_p_samples: Vec<Option<f64>> = summaries.iter().map(|s| s.local_p).collect();

    let mean_xest = mean(&xest_samples);
    let var_xest = if m >= 2 {
        sample_variance(&xest_samples)
    } else {
        0.0
    };
    let mean_p_final = mean(&p_mean_samples);
    let var_of_mean_p_final = if m >= 2 {
        sample_variance(&p_mean_samples)
    } else {
        0.0
    };
    let mean_var_p_final = mean(&var_p_samples);
    let var_p_final = var_of_mean_p_final + mean_var_p_final;
    let mean_sigma2_x_final = mean(&var_x_samples);

    let grad_terms: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.local_p2_terms.map(|t| t.0))
        .collect();
    let curv_terms: Vec<f64> = summaries
        .iter()
        .filter_map(|s| s.local_p2_terms.map(|t| t.1))
        .collect();
    let mean_local_grad_sq_term = if grad_terms.is_empty() {
        f64::NAN
    } else {
        mean(&grad_terms)
    };
    let mean_local_curvature_term = if curv_terms.is_empty() {
        f64::NAN
    } else {
        mean(&curv_terms)
    };

    // exact binomial outcome table over the observed range plus a generous
    // tail padding; it backs the histogram, the chi-square test, and the
    // collapsed-fraction prediction
    let lo_obs = *n_b_samples.iter().min().expect("m >= 1");
    let hi_obs = *n_b_samples.iter().max().expect("m >= 1");
    let pad = (4.0 * (n as f64).sqrt()).ceil() as usize + 8;
    let lo = lo_obs.saturating_sub(pad);
    let hi = (hi_obs + pad).min(n);
    let table = ClosedFormTable::new(&psi0, k);
    let predicted: Vec<f64> = (lo..=hi)
        .map(|n_b| (ln_binomial(n as u64, n_b as u64) + table.log_closed(n - n_b, n_b)).exp())
        .collect();
    let coverage: f64 = predicted.iter().sum();
    if (coverage - 1.0).abs() > 1e-6 {
        log::warn!("outcome table covers probability {coverage}, not 1; tails are unusually wide");
    }

    let xest_histogram = XestHistogram::from_counts(n, k, &n_b_samples, |n_b| {
        predicted.get(n_b - lo).copied().unwrap_or(0.0)
    });

    let mut counts = vec![0u64; hi - lo + 1];
    for &n_b in &n_b_samples {
        counts[n_b - lo] += 1;
    }
    let expected: Vec<f64> = predicted.iter().map(|p| p * m as f64).collect();
    let chi_square = if m >= 100 {
        chi_square_test(&counts, &expected, 5.0)
    } else {
        None
    };

    let born_fraction_positive =
        xest_samples.iter().filter(|&&x| x > 0.0).count() as f64 / m as f64;
    let born_fraction_predicted = (lo..=hi)
        .zip(&predicted)
        .filter(|&(n_b, _)| 2 * n_b > n)
        .map(|(_, p)| p)
        .sum::<f64>();

    let mut stats = EnsembleStats {
        n_photons: n,
        k,
        hbar,
        m_trajectories: m,
        master_seed: config.master_seed,
        tolerances: tol,
        xest_samples,
        n_b_samples,
        xest_histogram,
        mean_xest,
        var_xest,
        mean_p_final,
        var_of_mean_p_final,
        mean_var_p_final,
        var_p_final,
        mean_sigma2_x_final,
        mean_local_grad_sq_term,
        mean_local_curvature_term,
        born_fraction_positive,
        born_fraction_predicted,
        chi_square,
        comparisons: Vec::new(),
        p_mean_samples,
        var_p_samples,
        var_x_samples,
        local_p_samples,
    };
    stats.comparisons = build_comparisons(&stats, &psi0, &summaries);
    Ok(stats)
}

fn build_comparisons(
    stats: &EnsembleStats,
    psi0: &Wavefunction,
    summaries: &[TrajectorySummary],
) -> Vec<Comparison> {
    let (n, k, m) = (stats.n_photons, stats.k, stats.m_trajectories);
    let tol = stats.tolerances;
    let mut rows = Vec::new();

    let (pred_mean, pred_var) = predicted_xest_moments(psi0, n, k);
    rows.push(Comparison::new(
        "xest_mean",
        stats.mean_xest,
        pred_mean,
        tol.z_threshold * (pred_var / m as f64).sqrt() + 1e-15,
    ));
    if m >= 2 {
        // a variance estimate from m samples scatters with relative width
        // ~sqrt(2/m); keep at least the configured relative tolerance
        let rel = tol
            .variance_rel_tol
            .max(tol.z_threshold * (2.0 / m as f64).sqrt());
        rows.push(Comparison::new(
            "xest_variance",
            stats.var_xest,
            pred_var,
            rel * pred_var,
        ));
    }

    let pred_final_var: Vec<f64> = summaries.iter().filter_map(|s| s.var_x_predicted).collect();
    if !pred_final_var.is_empty() {
        let pred = mean(&pred_final_var);
        rows.push(Comparison::new(
            "final_position_variance",
            stats.mean_sigma2_x_final,
            pred,
            tol.variance_rel_tol * pred,
        ));
    }
    let shot = predicted_sigma2_xest(n, k);
    rows.push(Comparison::new(
        "final_variance_vs_shot_noise",
        stats.mean_sigma2_x_final,
        shot,
        tol.variance_rel_tol * shot,
    ));

    if m >= 2 {
        rows.extend(momentum_conservation_rows(stats, psi0));
        rows.extend(momentum_variance_rows(stats, psi0));
    }

    let p = stats.born_fraction_predicted.clamp(1e-12, 1.0 - 1e-12);
    let se = (p * (1.0 - p) / m as f64).sqrt();
    rows.push(Comparison::new(
        "born_fraction_positive",
        stats.born_fraction_positive,
        stats.born_fraction_predicted,
        tol.z_threshold * se + 1e-9,
    ));

    if let Some(chi) = stats.chi_square {
        let critical = ChiSquared::new(chi.degrees_of_freedom as f64)
            .expect("dof >= 1")
            .inverse_cdf(1.0 - tol.chi_square_alpha);
        rows.push(Comparison {
            name: "xest_histogram_chi_square".into(),
            simulated: chi.statistic,
            predicted: chi.degrees_of_freedom as f64,
            tolerance: critical,
            pass: chi.passes_at(tol.chi_square_alpha),
        });
    }
    rows
}

fn momentum_conservation_rows(stats: &EnsembleStats, psi0: &Wavefunction) -> Vec<Comparison> {
    let n = stats.n_photons as f64;
    let (k, hbar) = (stats.k, stats.hbar);
    let kick = n * hbar * k;
    let tol = stats.tolerances;

    // The floor absorbs finite-difference quadrature bias (plane-wave
    // states have zero shot-to-shot momentum spread, so the statistical
    // term alone can be arbitrarily tight); it stays microscopic against
    // the hbar k sqrt(N) physical momentum scale.
    let se = standard_error(&stats.p_mean_samples);
    let conservation = Comparison::new(
        "momentum_conservation",
        stats.mean_p_final - kick,
        psi0.momentum_mean(),
        tol.z_threshold * se + 1e-6 * hbar * k * n.sqrt(),
    );

    // per-trajectory form: <p>_final - N hbar k tracks p_loc(psi0, x_est),
    // tested against a 5% slice of the hbar k sqrt(N) momentum spread
    let max_deviation = stats
        .p_mean_samples
        .iter()
        .zip(&stats.local_p_samples)
        .filter_map(|(p_mean, local)| local.map(|l| (p_mean - kick - l).abs()))
        .fold(0.0, f64::max);
    let per_trajectory = Comparison::new(
        "momentum_local_term_per_trajectory",
        max_deviation,
        0.0,
        0.05 * hbar * k * n.sqrt(),
    );
    vec![conservation, per_trajectory]
}

fn momentum_variance_rows(stats: &EnsembleStats, psi0: &Wavefunction) -> Vec<Comparison> {
    let n = stats.n_photons as f64;
    let (k, hbar) = (stats.k, stats.hbar);
    let tol = stats.tolerances;
    let n_hk2 = n * (hbar * k) * (hbar * k);

    // (i) leading order: every trajectory's Var p sits near N (hbar k)^2
    let worst_ratio_dev = stats
        .var_p_samples
        .iter()
        .map(|v| (v / n_hk2 - 1.0).abs())
        .fold(0.0, f64::max);
    let leading = Comparison::new(
        "momentum_variance_leading_order",
        worst_ratio_dev,
        0.0,
        tol.variance_rel_tol,
    );

    // (ii) Heisenberg saturation of the leading terms, algebraically exact
    let product = heisenberg_product(stats.n_photons, k, hbar);
    let heisenberg = Comparison::new(
        "heisenberg_product",
        product.product,
        hbar / 2.0,
        0.0,
    );

    // (iii) ensemble variance budget: total minus the photon-kick term
    // reconstructs the initial momentum variance
    let sim = stats.var_p_final - n_hk2;
    let pred = psi0.momentum_variance();
    let budget = Comparison::new(
        "momentum_variance_total",
        sim,
        pred,
        tol.variance_rel_tol * pred + tol.z_threshold * standard_error(&stats.var_p_samples),
    );
    vec![leading, heisenberg, budget]
}

/// Ensemble momentum-conservation check (`<p_N>_ens = N hbar k + <p_0>`).
/// Requires at least 1000 trajectories; reports the z-scored comparison and
/// the per-trajectory local form.
pub fn verify_momentum_conservation(
    stats: &EnsembleStats,
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
) -> Result<Vec<Comparison>> {
    require_stats(stats, n_photons, k)?;
    Ok(momentum_conservation_rows(stats, psi0))
}

/// Momentum-variance checks: per-trajectory leading order, exact Heisenberg
/// saturation of the leading terms, and the ensemble variance budget.
pub fn verify_momentum_variance(
    stats: &EnsembleStats,
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
) -> Result<Vec<Comparison>> {
    require_stats(stats, n_photons, k)?;
    Ok(momentum_variance_rows(stats, psi0))
}

fn require_stats(stats: &EnsembleStats, n_photons: usize, k: f64) -> Result<()> {
    assert_eq!(stats.n_photons, n_photons, "stats built for different N");
    assert_eq!(stats.k, k, "stats built for different k");
    if stats.m_trajectories < 1000 {
        return Err(Error::InsufficientStatistics {
            m: stats.m_trajectories,
            min: 1000,
        });
    }
    Ok(())
}

/// Per-point log tables for the closed-form record probability; amortizes
/// the trigonometry when many (n_a, n_b) values are evaluated against the
/// same state.
struct ClosedFormTable {
    /// `ln(|psi0|^2 w_i)`
    log_mass: Vec<f64>,
    /// `2 ln |cos(kx + pi/4)|` = `ln |M_a|^2`
    log_a: Vec<f64>,
    /// `2 ln |cos(kx - pi/4)|` = `ln |M_b|^2`
    log_b: Vec<f64>,
}

impl ClosedFormTable {
    fn new(psi0: &Wavefunction, k: f64) -> Self {
        let grid = psi0.grid();
        let mut log_mass = Vec::with_capacity(grid.len());
        let mut log_a = Vec::with_capacity(grid.len());
        let mut log_b = Vec::with_capacity(grid.len());
        for (i, x) in grid.points().enumerate() {
            log_mass.push((psi0.probability_density(i) * grid.quad_weight(i)).ln());
            log_a.push(2.0 * (k * x + FRAC_PI_4).cos().abs().ln());
            log_b.push(2.0 * (k * x - FRAC_PI_4).cos().abs().ln());
        }
        Self {
            log_mass,
            log_a,
            log_b,
        }
    }

    /// `ln Integral |M_a|^{2 n_a} |M_b|^{2 n_b} |psi0|^2 dx`
    fn log_closed(&self, n_a: usize, n_b: usize) -> f64 {
        let (na, nb) = (n_a as f64, n_b as f64);
        let mut peak = f64::NEG_INFINITY;
        let n_pts = self.log_mass.len();
        let mut terms = Vec::with_capacity(n_pts);
        for i in 0..n_pts {
            // 0 * ln 0 is an empty product, not NaN
            let ta = if n_a == 0 { 0.0 } else { na * self.log_a[i] };
            let tb = if n_b == 0 { 0.0 } else { nb * self.log_b[i] };
            let t = self.log_mass[i] + ta + tb;
            terms.push(t);
            if t > peak {
                peak = t;
            }
        }
        if !peak.is_finite() {
            return f64::NEG_INFINITY;
        }
        let sum: f64 = terms.iter().map(|&t| (t - peak).exp()).sum();
        peak + sum.ln()
    }
}

/// Probability of observing exactly `n_b` port-b counts in N photons:
/// the binomial multiplicity times the closed-form record probability,
/// assembled in the log domain.
pub fn outcome_probability_binomial(
    psi0: &Wavefunction,
    n_b: usize,
    n_photons: usize,
    k: f64,
) -> f64 {
    assert!(n_b <= n_photons);
    let table = ClosedFormTable::new(psi0, k);
    (ln_binomial(n_photons as u64, n_b as u64) + table.log_closed(n_photons - n_b, n_b)).exp()
}

/// Mean and variance of x_est implied by the exact binomial outcome law:
/// conditioned on position x the count `n_b` is Binomial(N, P_b(x)), so
///
/// ```text
/// E[x_est | x]   = sin(2kx) / (2k)
/// Var[x_est | x] = cos^2(2kx) / (4 N k^2)
/// ```
///
/// and the totals follow by integrating over `|psi0|^2` (law of total
/// variance). This is the finite-N reference the sampled moments are tested
/// against.
pub fn predicted_xest_moments(psi0: &Wavefunction, n_photons: usize, k: f64) -> (f64, f64) {
    let grid = psi0.grid();
    let n = n_photons as f64;
    let mean_est = grid.integrate(|i| {
        let x = grid.point(i);
        psi0.probability_density(i) * (2.0 * k * x).sin() / (2.0 * k)
    });
    let mean_sq = grid.integrate(|i| {
        let x = grid.point(i);
        let local = (2.0 * k * x).sin() / (2.0 * k);
        psi0.probability_density(i) * local * local
    });
    let shot = grid.integrate(|i| {
        let x = grid.point(i);
        let c = (2.0 * k * x).cos();
        psi0.probability_density(i) * c * c / (4.0 * n * k * k)
    });
    (mean_est, shot + (mean_sq - mean_est * mean_est).max(0.0))
}

/// Stirling-limit probability density for x_est:
/// `Integral sqrt(2N/pi) k e^{-2 N k^2 (x - x_est)^2} |psi0(x)|^2 dx`.
/// The per-outcome probability is this density times `delta = 1/(kN)`.
/// Meaningful only for large N; refuses N < 100.
pub fn predicted_xest_density(
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
    x_est: f64,
) -> Result<f64> {
    if n_photons < 100 {
        return Err(Error::SmallN {
            n: n_photons,
            min: 100,
        });
    }
    let n = n_photons as f64;
    let grid = psi0.grid();
    let norm = (2.0 * n / PI).sqrt() * k;
    Ok(grid.integrate(|i| {
        let d = grid.point(i) - x_est;
        norm * (-2.0 * n * k * k * d * d).exp() * psi0.probability_density(i)
    }))
}

/// Heisenberg product of the leading collapse terms.
#[derive(Debug, Clone, Copy)]
pub struct HeisenbergProduct {
    /// `sqrt(N) hbar k`, the leading post-measurement momentum spread.
    pub sigma_p_leading: f64,
    /// `1 / (2 sqrt(N) k)`, the shot-noise position spread.
    pub sigma_xest: f64,
    /// Their product with the `sqrt(N) k` factors cancelled symbolically:
    /// exactly `hbar / 2`.
    pub product: f64,
}

pub fn heisenberg_product(n_photons: usize, k: f64, hbar: f64) -> HeisenbergProduct {
    let root_n = (n_photons as f64).sqrt();
    HeisenbergProduct {
        sigma_p_leading: root_n * hbar * k,
        sigma_xest: 1.0 / (2.0 * root_n * k),
        product: hbar / 2.0,
    }
}

/// The de Broglie consistency numbers for an N-photon record.
#[derive(Debug, Clone, Copy)]
pub struct DeBroglieCheck {
    /// Fringe wavelength of the final wavepacket, `2 pi / (N k)`.
    pub wavelength: f64,
    /// Momentum delivered by the N photon kicks, `N hbar k`.
    pub momentum: f64,
    /// `lambda p / h` with the `N k` factors cancelled symbolically; the
    /// identity makes this exactly 1.
    pub product_over_h: f64,
    /// The same ratio evaluated numerically from `wavelength * momentum`.
    pub numeric_product_over_h: f64,
}

pub fn de_broglie_check(n_photons: usize, k: f64, hbar: f64) -> DeBroglieCheck {
    let nk = k * n_photons as f64;
    let wavelength = 2.0 * PI / nk;
    let momentum = hbar * nk;
    let h = 2.0 * PI * hbar;
    // lambda * p = (2 pi / Nk)(hbar Nk) = 2 pi hbar after cancelling Nk;
    // evaluating the cancelled form against h gives exactly 1
    let cancelled = 2.0 * PI * hbar;
    DeBroglieCheck {
        wavelength,
        momentum,
        product_over_h: cancelled / h,
        numeric_product_over_h: wavelength * momentum / h,
    }
}

/// Carrier wavenumber of a wavepacket from a density-weighted linear fit to
/// its unwrapped phase, over the contiguous support (density above 1e-6 of
/// the peak) around the density maximum.
pub fn fit_phase_wavenumber(psi: &Wavefunction) -> f64 {
    let grid = psi.grid();
    let n = grid.len();
    let peak_idx = (0..n)
        .max_by(|&a, &b| {
            psi.probability_density(a)
                .total_cmp(&psi.probability_density(b))
        })
        .expect("non-empty grid");
    let threshold = 1e-6 * psi.probability_density(peak_idx);

    let mut lo = peak_idx;
    while lo > 0 && psi.probability_density(lo - 1) > threshold {
        lo -= 1;
    }
    let mut hi = peak_idx;
    while hi + 1 < n && psi.probability_density(hi + 1) > threshold {
        hi += 1;
    }
    assert!(hi > lo, "support too narrow for a phase fit");

    // unwrap the phase over the support; valid while the true phase
    // increment per grid step stays below pi
    let amps = psi.amplitudes();
    let mut phases = Vec::with_capacity(hi - lo + 1);
    let mut previous = amps[lo].arg();
    let mut unwrapped = previous;
    phases.push(unwrapped);
    for amp in amps.iter().take(hi + 1).skip(lo + 1) {
        let raw = amp.arg();
        let mut step = raw - previous;
        step -= 2.0 * PI * (step / (2.0 * PI)).round();
        unwrapped += step;
        phases.push(unwrapped);
        previous = raw;
    }

    // density-weighted least squares for the slope
    let weights: Vec<f64> = (lo..=hi).map(|i| psi.probability_density(i)).collect();
    let total: f64 = weights.iter().sum();
    let x_mean = (lo..=hi)
        .zip(&weights)
        .map(|(i, w)| w * grid.point(i))
        .sum::<f64>()
        / total;
    let phase_mean = phases.iter().zip(&weights).map(|(p, w)| w * p).sum::<f64>() / total;
    let mut cov = 0.0;
    let mut var = 0.0;
    for ((i, w), phase) in (lo..=hi).zip(&weights).zip(&phases) {
        let dx = grid.point(i) - x_mean;
        cov += w * dx * (phase - phase_mean);
        var += w * dx * dx;
    }
    cov / var
}
