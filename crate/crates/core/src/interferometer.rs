//! Per-photon measurement operators of the tuned interferometer and their
//! aggregate N-photon products.
//!
//! A photon leaving the device is detected at port `a` or port `b`; the
//! particle state is multiplied pointwise by the corresponding operator
//!
//! ```text
//! M_a(x) = (i e^{i 2kx} + 1) / 2
//! M_b(x) = (i e^{i 2kx} - 1) / (2i)
//! ```
//!
//! with detection probabilities `|M_a|^2 = (1 - sin 2kx)/2` and
//! `|M_b|^2 = (1 + sin 2kx)/2`. In polar form
//!
//! ```text
//! M_a(x) = cos(kx + pi/4) e^{i(kx + pi/4)}
//! M_b(x) = cos(kx - pi/4) e^{i(kx + pi/4)}
//! ```
//!
//! so an N-photon record with counts (n_a, n_b) multiplies the state by
//! `cos^{n_a}(kx + pi/4) cos^{n_b}(kx - pi/4) e^{i N (kx + pi/4)}`, which this
//! module evaluates stably in the log-magnitude domain. While
//! `k max|x| < pi/4` both cosines stay positive and the product is
//! single-branch.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::f64::consts::FRAC_PI_4;

use crate::wavefunction::Wavefunction;
use crate::{Error, Result, NORM_FLOOR};

/// Which output port detected the photon.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum PhotonOutcome {
    A,
    B,
}

impl PhotonOutcome {
    pub fn as_char(self) -> char {
        match self {
            PhotonOutcome::A => 'a',
            PhotonOutcome::B => 'b',
        }
    }

    pub fn from_char(c: char) -> Option<Self> {
        match c {
            'a' => Some(PhotonOutcome::A),
            'b' => Some(PhotonOutcome::B),
            _ => None,
        }
    }
}

impl std::fmt::Display for PhotonOutcome {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// Photon wavenumber plus the choice of aggregate evaluation route.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct InterferometerParams {
    /// Photon wavenumber `k`; the interferometer is tuned so the particle
    /// sits near `x = 0`.
    pub k: f64,
    /// Use the closed-form aggregate product when the grid satisfies the
    /// `k max|x| < pi/4` branch bound; otherwise states are rebuilt by
    /// sequential per-photon application.
    pub use_exact_operators: bool,
}

impl Default for InterferometerParams {
    fn default() -> Self {
        Self {
            k: 1.0,
            use_exact_operators: true,
        }
    }
}

/// Default small-kx validity window (in `k*x` units) for the Gaussian
/// approximation of the aggregate product.
pub const SMALL_KX_WINDOW: f64 = 0.1;

/// Port-a amplitude `(i e^{i 2kx} + 1) / 2`.
pub fn m_a(x: f64, k: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, 2.0 * k * x);
    (Complex64::new(0.0, 1.0) * e + 1.0) / 2.0
}

/// Port-b amplitude `(i e^{i 2kx} - 1) / (2i)`.
pub fn m_b(x: f64, k: f64) -> Complex64 {
    let e = Complex64::from_polar(1.0, 2.0 * k * x);
    (Complex64::new(0.0, 1.0) * e - 1.0) * Complex64::new(0.0, -0.5)
}

pub fn outcome_amplitude(outcome: PhotonOutcome, x: f64, k: f64) -> Complex64 {
    match outcome {
        PhotonOutcome::A => m_a(x, k),
        PhotonOutcome::B => m_b(x, k),
    }
}

/// Detection probability for a particle localized at `x`, in the closed
/// trigonometric form `(1 -+ sin 2kx) / 2`. The two ports sum to one by
/// construction.
pub fn outcome_probability(outcome: PhotonOutcome, x: f64, k: f64) -> f64 {
    let s = (2.0 * k * x).sin();
    match outcome {
        PhotonOutcome::A => 0.5 * (1.0 - s),
        PhotonOutcome::B => 0.5 * (1.0 + s),
    }
}

/// `(P_a, P_b)` for one photon passing a particle in state `psi`:
/// `P = <psi| M^dag M |psi>` by trapezoidal quadrature.
pub fn port_probabilities(psi: &Wavefunction, k: f64) -> (f64, f64) {
    let grid = psi.grid();
    let p_a = grid.integrate(|i| {
        outcome_probability(PhotonOutcome::A, grid.point(i), k) * psi.probability_density(i)
    });
    let p_b = grid.integrate(|i| {
        outcome_probability(PhotonOutcome::B, grid.point(i), k) * psi.probability_density(i)
    });
    (p_a, p_b)
}

/// Detect one photon at the given port: returns the renormalized
/// post-measurement state together with the probability of that outcome.
/// Requesting an impossible branch (probability below the norm floor, e.g.
/// the dark port of a perfectly placed particle) yields `ZeroNorm`.
pub fn apply_outcome(
    psi: &Wavefunction,
    outcome: PhotonOutcome,
    k: f64,
) -> Result<(Wavefunction, f64)> {
    let grid = psi.grid();
    let probability = grid.integrate(|i| {
        outcome_probability(outcome, grid.point(i), k) * psi.probability_density(i)
    });
    if probability < NORM_FLOOR {
        return Err(Error::ZeroNorm {
            norm_sq: probability,
            floor: NORM_FLOOR,
        });
    }
    let amplitudes = grid
        .points()
        .zip(psi.amplitudes())
        .map(|(x, a)| outcome_amplitude(outcome, x, k) * a)
        .collect();
    let state = Wavefunction::from_amplitudes(*grid, amplitudes)?.with_hbar(psi.hbar());
    Ok((state, probability))
}

/// Fold [`apply_outcome`] over a full record, returning the final state and
/// the per-step outcome probabilities.
pub fn apply_sequence(
    psi0: &Wavefunction,
    outcomes: &[PhotonOutcome],
    k: f64,
) -> Result<(Wavefunction, Vec<f64>)> {
    let mut state = psi0.clone();
    let mut probabilities = Vec::with_capacity(outcomes.len());
    for &outcome in outcomes {
        let (next, p) = apply_outcome(&state, outcome, k)?;
        state = next;
        probabilities.push(p);
    }
    Ok((state, probabilities))
}

fn branch_check(psi0: &Wavefunction, k: f64) -> Result<()> {
    let kx_max = k * psi0.grid().max_abs_x();
    if kx_max >= FRAC_PI_4 {
        return Err(Error::BranchViolation { kx_max });
    }
    Ok(())
}

/// Normalized final state after any record with counts `(n_a, n_b)`,
/// evaluated in one pass from the closed-form operator product.
///
/// Magnitudes accumulate as `n_a ln cos(kx + pi/4) + n_b ln cos(kx - pi/4)`
/// (equivalently `N ln(cos 2kx)/2 + N k x_est ln[cos(kx-pi/4)/cos(kx+pi/4)]`),
/// re-centered on the grid maximum before exponentiation so the result is
/// stable for `N` up to 1e6. The momentum-kick phase `e^{i N k x}` is kept;
/// the constant global phase `e^{i N pi/4}` is dropped.
pub fn aggregate_operator(
    psi0: &Wavefunction,
    n_a: usize,
    n_b: usize,
    k: f64,
) -> Result<Wavefunction> {
    assert!(n_a + n_b >= 1, "aggregate of an empty record");
    branch_check(psi0, k)?;
    let grid = psi0.grid();
    let (na, nb) = (n_a as f64, n_b as f64);
    let n = na + nb;

    // log |M_a|^{n_a} |M_b|^{n_b} |psi0| per point; -inf where psi0 vanishes
    let log_weight: Vec<f64> = grid
        .points()
        .zip(psi0.amplitudes())
        .map(|(x, a)| {
            let ca = (k * x + FRAC_PI_4).cos(); // = |M_a(x)|, positive on this branch
            let cb = (k * x - FRAC_PI_4).cos(); // = |M_b(x)|
            na * ca.ln() + nb * cb.ln() + a.norm().ln()
        })
        .collect();
    let peak = log_weight.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::ZeroNorm {
            norm_sq: 0.0,
            floor: NORM_FLOOR,
        });
    }

    let amplitudes = grid
        .points()
        .zip(psi0.amplitudes())
        .zip(&log_weight)
        .map(|((x, a), &lw)| {
            if lw.is_finite() {
                let magnitude = (lw - peak).exp();
                Complex64::from_polar(magnitude, a.arg() + n * k * x)
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    Ok(Wavefunction::from_amplitudes(*grid, amplitudes)?.with_hbar(psi0.hbar()))
}

/// Small-kx Gaussian limit of the aggregate product:
/// normalized `e^{i N k x} e^{-N k^2 (x - x_est)^2} psi0(x)`.
///
/// Logs a warning when `psi0` carries weight outside `|kx| <= window`,
/// where the quadratic expansion of the operator product degrades.
pub fn gaussian_approx_final(
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
    x_est: f64,
) -> Result<Wavefunction> {
    gaussian_approx_final_with_window(psi0, n_photons, k, x_est, SMALL_KX_WINDOW)
}

pub fn gaussian_approx_final_with_window(
    psi0: &Wavefunction,
    n_photons: usize,
    k: f64,
    x_est: f64,
    window: f64,
) -> Result<Wavefunction> {
    assert!(n_photons >= 1);
    let grid = psi0.grid();
    let n = n_photons as f64;

    let peak_density = (0..grid.len())
        .map(|i| psi0.probability_density(i))
        .fold(0.0, f64::max);
    let support_kx = grid
        .points()
        .enumerate()
        .filter(|&(i, _)| psi0.probability_density(i) > 1e-16 * peak_density)
        .map(|(_, x)| (k * x).abs())
        .fold(0.0, f64::max);
    if support_kx > window {
        log::warn!(
            "gaussian_approx_final: psi0 support reaches |kx| = {support_kx:.3}, \
             outside the small-kx window {window}"
        );
    }

    let log_weight: Vec<f64> = grid
        .points()
        .zip(psi0.amplitudes())
        .map(|(x, a)| -n * k * k * (x - x_est).powi(2) + a.norm().ln())
        .collect();
    let peak = log_weight.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return Err(Error::ZeroNorm {
            norm_sq: 0.0,
            floor: NORM_FLOOR,
        });
    }
    let amplitudes = grid
        .points()
        .zip(psi0.amplitudes())
        .zip(&log_weight)
        .map(|((x, a), &lw)| {
            if lw.is_finite() {
                Complex64::from_polar((lw - peak).exp(), a.arg() + n * k * x)
            } else {
                Complex64::ZERO
            }
        })
        .collect();
    Ok(Wavefunction::from_amplitudes(*grid, amplitudes)?.with_hbar(psi0.hbar()))
}
