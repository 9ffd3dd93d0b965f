//! Complex wavefunction on a uniform grid, with trapezoidal-quadrature
//! observables.
//!
//! Values are immutable after construction: every operation returns a new
//! `Wavefunction`, so instances can be shared freely across threads.
//!
//! Position moments integrate `|psi|^2` directly. Momentum moments use the
//! 4th-order finite-difference derivative (one-sided at the edges, so no
//! periodicity is imposed):
//!
//! ```text
//! <p>   = hbar * Integral Im(psi* psi') dx
//! <p^2> = hbar^2 * Integral |psi'|^2 dx
//! Var p = hbar^2 * Integral |psi' - i(<p>/hbar) psi|^2 dx   (>= 0 by construction)
//! ```
//!
//! The local quantities evaluated at a single point x are
//!
//! ```text
//! p_loc(x)  = hbar * Im(psi* psi') / |psi|^2
//! p2_loc(x) = hbar^2 * (|psi'|^2 - Re(psi* psi'')) / (2 |psi|^2)
//! ```
//!
//! both undefined at nodes of psi (|psi|^2 below [`NODE_THRESHOLD`]).

use std::fmt::Write as _;
use std::path::Path;

use num_complex::Complex64;

use crate::deriv;
use crate::grid::Grid;
use crate::{Error, Result, NODE_THRESHOLD, NORM_FLOOR};

/// Edge amplitude above which momentum quadrature is suspect (the state
/// leaks off the grid) and a warning is logged.
pub const EDGE_LEAKAGE_THRESHOLD: f64 = 1e-8;

/// Normalization slack accepted without rescaling; makes `normalize`
/// exactly idempotent.
const NORM_SLACK: f64 = 1e-12;

#[derive(Debug, Clone, PartialEq)]
pub struct Wavefunction {
    grid: Grid,
    amplitudes: Vec<Complex64>,
    hbar: f64,
}

impl Wavefunction {
    /// Sample `f` on the grid and normalize. Errors with `ZeroNorm` if the
    /// sampled function carries no probability mass.
    pub fn from_fn(grid: Grid, f: impl Fn(f64) -> Complex64) -> Result<Self> {
        let amplitudes = grid.points().map(f).collect();
        Self::from_amplitudes(grid, amplitudes)
    }

    /// Wrap raw amplitudes and normalize.
    pub fn from_amplitudes(grid: Grid, amplitudes: Vec<Complex64>) -> Result<Self> {
        assert_eq!(grid.len(), amplitudes.len(), "amplitude count != grid size");
        let psi = Self {
            grid,
            amplitudes,
            hbar: 1.0,
        };
        Ok(psi.normalize()?.0)
    }

    /// Normalized Gaussian wavepacket
    /// `psi(x) ~ exp(-(x-x0)^2 / (4 sigma0^2)) * exp(i p0 x / hbar)`.
    pub fn gaussian(grid: Grid, x0: f64, sigma0: f64, p0: f64) -> Result<Self> {
        let limit = 3.0 * grid.spacing();
        if sigma0 <= limit {
            return Err(Error::GridTooCoarse { sigma0, limit });
        }
        let (lo, hi) = (x0 - 5.0 * sigma0, x0 + 5.0 * sigma0);
        if lo < grid.x_min() || hi > grid.x_max() {
            return Err(Error::SupportClipped {
                lo,
                hi,
                x_min: grid.x_min(),
                x_max: grid.x_max(),
            });
        }
        let hbar = 1.0;
        Self::from_fn(grid, |x| {
            let envelope = (-(x - x0).powi(2) / (4.0 * sigma0 * sigma0)).exp();
            Complex64::from_polar(envelope, p0 * x / hbar)
        })
    }

    /// Two well-separated Gaussian lobes at `-x0` and `+x0` with probability
    /// weights `1 - weight_plus` and `weight_plus`, carrying independent
    /// plane-wave phases `p_minus` and `p_plus`.
    pub fn two_lobe(
        grid: Grid,
        x0: f64,
        sigma0: f64,
        weight_plus: f64,
        p_plus: f64,
        p_minus: f64,
    ) -> Result<Self> {
        assert!(
            (0.0..=1.0).contains(&weight_plus),
            "weight_plus must lie in [0, 1]"
        );
        let limit = 3.0 * grid.spacing();
        if sigma0 <= limit {
            return Err(Error::GridTooCoarse { sigma0, limit });
        }
        let (lo, hi) = (-x0 - 5.0 * sigma0, x0 + 5.0 * sigma0);
        if lo < grid.x_min() || hi > grid.x_max() {
            return Err(Error::SupportClipped {
                lo,
                hi,
                x_min: grid.x_min(),
                x_max: grid.x_max(),
            });
        }
        let hbar = 1.0;
        // Each lobe is unit-normalized so the weights are the lobe masses up
        // to the (negligible) overlap, then the sum is renormalized.
        let amp = 1.0 / (2.0 * std::f64::consts::PI * sigma0 * sigma0).powf(0.25);
        Self::from_fn(grid, |x| {
            let plus = amp * (-(x - x0).powi(2) / (4.0 * sigma0 * sigma0)).exp();
            let minus = amp * (-(x + x0).powi(2) / (4.0 * sigma0 * sigma0)).exp();
            Complex64::from_polar(weight_plus.sqrt() * plus, p_plus * x / hbar)
                + Complex64::from_polar((1.0 - weight_plus).sqrt() * minus, p_minus * x / hbar)
        })
    }

    /// Flat (uniform-amplitude) state over the whole grid.
    pub fn uniform(grid: Grid) -> Self {
        Self::from_fn(grid, |_| Complex64::ONE).expect("uniform state has unit mass")
    }

    /// Replace the action constant used by momentum observables (default 1).
    pub fn with_hbar(mut self, hbar: f64) -> Self {
        assert!(hbar > 0.0);
        self.hbar = hbar;
        self
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn hbar(&self) -> f64 {
        self.hbar
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn probability_density(&self, i: usize) -> f64 {
        self.amplitudes[i].norm_sqr()
    }

    /// Trapezoidal integral of `|psi|^2`.
    pub fn norm_squared(&self) -> f64 {
        self.grid.integrate(|i| self.amplitudes[i].norm_sqr())
    }

    /// Rescale to unit norm, returning the pre-normalization norm-squared as
    /// a by-product. States already within `1e-12` of unit norm are returned
    /// untouched, which makes the operation exactly idempotent.
    pub fn normalize(self) -> Result<(Self, f64)> {
        let norm_sq = self.norm_squared();
        debug_assert!(
            self.amplitudes.iter().all(|a| a.is_finite()),
            "non-finite amplitude"
        );
        if norm_sq < NORM_FLOOR || !norm_sq.is_finite() {
            return Err(Error::ZeroNorm {
                norm_sq,
                floor: NORM_FLOOR,
            });
        }
        if (norm_sq - 1.0).abs() <= NORM_SLACK {
            return Ok((self, norm_sq));
        }
        let scale = 1.0 / norm_sq.sqrt();
        let mut psi = self;
        for a in psi.amplitudes.iter_mut() {
            *a *= scale;
        }
        Ok((psi, norm_sq))
    }

    pub fn position_mean(&self) -> f64 {
        self.grid
            .integrate(|i| self.grid.point(i) * self.amplitudes[i].norm_sqr())
    }

    /// Central second moment of `|psi|^2`; nonnegative by construction.
    pub fn position_variance(&self) -> f64 {
        let mean = self.position_mean();
        self.grid.integrate(|i| {
            let d = self.grid.point(i) - mean;
            d * d * self.amplitudes[i].norm_sqr()
        })
    }

    fn warn_on_edge_leakage(&self, what: &str) {
        let edge = self.amplitudes[0]
            .norm()
            .max(self.amplitudes[self.amplitudes.len() - 1].norm());
        if edge > EDGE_LEAKAGE_THRESHOLD {
            log::warn!(
                "{what}: edge amplitude {edge:e} exceeds {EDGE_LEAKAGE_THRESHOLD:e}; \
                 momentum quadrature may be unreliable"
            );
        }
    }

    pub fn momentum_mean(&self) -> f64 {
        self.warn_on_edge_leakage("momentum_mean");
        let d = deriv::first_derivative(&self.amplitudes, self.grid.spacing());
        self.hbar
            * self
                .grid
                .integrate(|i| (self.amplitudes[i].conj() * d[i]).im)
    }

    /// `<p>` evaluated with the discrete-Fourier derivative instead of finite
    /// differences. Cross-check path only; assumes edge-vanishing data.
    pub fn momentum_mean_spectral(&self) -> f64 {
        let d = deriv::spectral_first_derivative(&self.amplitudes, self.grid.spacing());
        self.hbar
            * self
                .grid
                .integrate(|i| (self.amplitudes[i].conj() * d[i]).im)
    }

    /// `<p^2>` in its integration-by-parts form `hbar^2 Integral |psi'|^2`.
    pub fn momentum_second_moment(&self) -> f64 {
        self.warn_on_edge_leakage("momentum_second_moment");
        let d = deriv::first_derivative(&self.amplitudes, self.grid.spacing());
        self.hbar * self.hbar * self.grid.integrate(|i| d[i].norm_sqr())
    }

    /// `Var p`, computed in the manifestly nonnegative form
    /// `hbar^2 Integral |psi' - i(<p>/hbar) psi|^2`.
    pub fn momentum_variance(&self) -> f64 {
        self.warn_on_edge_leakage("momentum_variance");
        let d = deriv::first_derivative(&self.amplitudes, self.grid.spacing());
        let mean = self.hbar
            * self
                .grid
                .integrate(|i| (self.amplitudes[i].conj() * d[i]).im);
        let q = mean / self.hbar;
        self.hbar
            * self.hbar
            * self.grid.integrate(|i| {
                (d[i] - Complex64::new(0.0, q) * self.amplitudes[i]).norm_sqr()
            })
    }

    fn local_index(&self, x: f64, what: &str) -> Result<usize> {
        let i = self.grid.nearest_index(x);
        let density = self.amplitudes[i].norm_sqr();
        if density < NODE_THRESHOLD {
            log::debug!("{what} at node x={x}");
            return Err(Error::NodeSingularity {
                x,
                density,
                threshold: NODE_THRESHOLD,
            });
        }
        Ok(i)
    }

    /// Local momentum density `hbar Im(psi* psi') / |psi|^2` at the grid
    /// point nearest `x`. For `psi = f(x) e^{i p0 x / hbar}` with real `f`
    /// this returns `p0`.
    pub fn local_momentum_density(&self, x: f64) -> Result<f64> {
        let i = self.local_index(x, "local_momentum_density")?;
        let d = deriv::first_derivative_at(&self.amplitudes, i, self.grid.spacing());
        let density = self.amplitudes[i].norm_sqr();
        Ok(self.hbar * (self.amplitudes[i].conj() * d).im / density)
    }

    /// Local momentum second moment
    /// `hbar^2 (|psi'|^2 - Re(psi* psi'')) / (2 |psi|^2)` at the grid point
    /// nearest `x`.
    pub fn local_momentum_second_moment(&self, x: f64) -> Result<f64> {
        let (grad_sq, curvature) = self.local_momentum_second_moment_terms(x)?;
        Ok(grad_sq + curvature)
    }

    /// The two pieces of [`local_momentum_second_moment`]: the
    /// `hbar^2 |psi'|^2 / (2|psi|^2)` gradient term and the
    /// `-hbar^2 Re(psi* psi'') / (2|psi|^2)` curvature term. Ensemble
    /// reports list them separately; their relative weights are a quantity
    /// of interest in their own right.
    pub fn local_momentum_second_moment_terms(&self, x: f64) -> Result<(f64, f64)> {
        let i = self.local_index(x, "local_momentum_second_moment")?;
        let h = self.grid.spacing();
        let d1 = deriv::first_derivative_at(&self.amplitudes, i, h);
        let d2 = deriv::second_derivative_at(&self.amplitudes, i, h);
        let density = self.amplitudes[i].norm_sqr();
        let scale = self.hbar * self.hbar / (2.0 * density);
        Ok((
            scale * d1.norm_sqr(),
            -scale * (self.amplitudes[i].conj() * d2).re,
        ))
    }

    /// Multiply by the phase ramp `e^{i dq x}`, shifting the momentum
    /// content by `hbar * dq` without touching `|psi|^2`.
    pub fn with_phase_ramp(&self, dq: f64) -> Self {
        let amplitudes = self
            .grid
            .points()
            .zip(&self.amplitudes)
            .map(|(x, a)| a * Complex64::from_polar(1.0, dq * x))
            .collect();
        Self {
            grid: self.grid,
            amplitudes,
            hbar: self.hbar,
        }
    }

    /// `Integral psi* phi dx` over the shared grid.
    pub fn inner_product(&self, other: &Self) -> Complex64 {
        assert_eq!(self.grid, other.grid, "wavefunctions on different grids");
        let mut sum = Complex64::ZERO;
        for i in 0..self.grid.len() {
            sum += self.grid.quad_weight(i) * self.amplitudes[i].conj() * other.amplitudes[i];
        }
        sum
    }

    /// L2 distance `||psi - phi||`.
    pub fn l2_distance(&self, other: &Self) -> f64 {
        assert_eq!(self.grid, other.grid, "wavefunctions on different grids");
        self.grid
            .integrate(|i| (self.amplitudes[i] - other.amplitudes[i]).norm_sqr())
            .max(0.0)
            .sqrt()
    }

    /// L2 distance minimized over a global phase,
    /// `min_theta ||psi - e^{i theta} phi||`. Physically equivalent states
    /// differ only by such a constant. The optimal rotation is applied
    /// pointwise before subtracting, so near-identical states resolve down
    /// to machine precision instead of the sqrt(roundoff) floor of the
    /// overlap formula.
    pub fn l2_distance_up_to_phase(&self, other: &Self) -> f64 {
        let rotation = Complex64::from_polar(1.0, -self.inner_product(other).arg());
        self.grid
            .integrate(|i| (self.amplitudes[i] - rotation * other.amplitudes[i]).norm_sqr())
            .max(0.0)
            .sqrt()
    }

    /// Serialize as CSV with columns `x,re,im` (17 significant digits).
    pub fn to_csv(&self) -> String {
        let mut out = String::with_capacity(self.grid.len() * 64 + 16);
        out.push_str("x,re,im\n");
        for (x, a) in self.grid.points().zip(&self.amplitudes) {
            let _ = writeln!(out, "{:.16e},{:.16e},{:.16e}", x, a.re, a.im);
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        std::fs::write(path, self.to_csv())?;
        Ok(())
    }

    /// Read a wavefunction written by [`Wavefunction::to_csv`]. The grid is
    /// reconstructed from the first/last x values and the row count.
    pub fn read_csv(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let mut xs = Vec::new();
        let mut amplitudes = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            if lineno == 0 {
                if line.trim() != "x,re,im" {
                    return Err(Error::Config {
                        key: "csv".into(),
                        reason: format!("expected header \"x,re,im\", got \"{line}\""),
                    });
                }
                continue;
            }
            if line.trim().is_empty() {
                continue;
            }
            let mut fields = line.split(',');
            let mut next = |name: &str| -> Result<f64> {
                fields
                    .next()
                    .ok_or_else(|| Error::Config {
                        key: name.into(),
                        reason: format!("missing column on line {}", lineno + 1),
                    })?
                    .trim()
                    .parse::<f64>()
                    .map_err(|e| Error::Config {
                        key: name.into(),
                        reason: format!("line {}: {e}", lineno + 1),
                    })
            };
            let x = next("x")?;
            let re = next("re")?;
            let im = next("im")?;
            xs.push(x);
            amplitudes.push(Complex64::new(re, im));
        }
        let n = xs.len();
        if n < Grid::MIN_POINTS {
            return Err(Error::InvalidGrid {
                reason: format!("csv holds {n} rows"),
            });
        }
        let grid = Grid::new(xs[0], xs[n - 1], n)?;
        Self::from_amplitudes(grid, amplitudes)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wide_grid() -> Grid {
        Grid::symmetric(8.0, 1024).unwrap()
    }

    #[test]
    fn gaussian_moments_match_symmetric_case() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 0.0).unwrap();
        assert!(psi.position_mean().abs() < 1e-8);
        assert!((psi.position_variance() - 1.0).abs() < 1e-8);
        assert!(psi.momentum_mean().abs() < 1e-8);
    }

    #[test]
    fn plane_wave_phase_boosts_momentum() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.3, 1.0, 2.0).unwrap();
        assert!((psi.momentum_mean() - 2.0).abs() < 1e-6);
    }

    #[test]
    fn gaussian_saturates_minimum_uncertainty() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 0.0).unwrap();
        let product = psi.position_variance().sqrt() * psi.momentum_variance().sqrt();
        assert!((product - 0.5).abs() < 1e-6, "sigma_x sigma_p = {product}");
    }

    #[test]
    fn hbar_scales_momentum_observables() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 0.0)
            .unwrap()
            .with_hbar(2.0);
        let product = psi.position_variance().sqrt() * psi.momentum_variance().sqrt();
        assert!((product - 1.0).abs() < 1e-6, "expected hbar/2 = 1, got {product}");
    }

    #[test]
    fn gaussian_preconditions_are_enforced() {
        let g = wide_grid();
        assert!(matches!(
            Wavefunction::gaussian(g, 0.0, 0.01, 0.0),
            Err(Error::GridTooCoarse { .. })
        ));
        assert!(matches!(
            Wavefunction::gaussian(g, 7.0, 1.0, 0.0),
            Err(Error::SupportClipped { .. })
        ));
    }

    #[test]
    fn normalize_reports_scale_as_by_product() {
        let g = wide_grid();
        let psi = Wavefunction::gaussian(g, 0.0, 1.0, 0.0).unwrap();
        let doubled = Wavefunction {
            grid: g,
            amplitudes: psi.amplitudes.iter().map(|a| 2.0 * a).collect(),
            hbar: 1.0,
        };
        let (renormed, norm_sq) = doubled.normalize().unwrap();
        assert!((norm_sq - 4.0).abs() < 1e-12);
        assert!(renormed.l2_distance(&psi) < 1e-12);
    }

    #[test]
    fn normalize_is_exactly_idempotent() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.4, 0.7, 1.0).unwrap();
        let (once, by_product) = psi.clone().normalize().unwrap();
        assert!((by_product - 1.0).abs() <= 1e-12);
        let (twice, _) = once.clone().normalize().unwrap();
        assert_eq!(once.amplitudes, twice.amplitudes);
        assert_eq!(psi.amplitudes, once.amplitudes);
    }

    #[test]
    fn zero_state_fails_to_normalize() {
        let g = wide_grid();
        let zero = Wavefunction {
            grid: g,
            amplitudes: vec![Complex64::ZERO; g.len()],
            hbar: 1.0,
        };
        assert!(matches!(zero.normalize(), Err(Error::ZeroNorm { .. })));
    }

    #[test]
    fn narrow_gaussian_position_moments() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.5, 0.2, 0.0).unwrap();
        assert!((psi.position_mean() - 0.5).abs() < 1e-6);
        assert!((psi.position_variance() - 0.04).abs() < 1e-6);
    }

    #[test]
    fn mirror_reflection_negates_mean_and_keeps_variance() {
        let g = wide_grid();
        let psi = Wavefunction::gaussian(g, 0.8, 0.5, 0.0).unwrap();
        let mirrored = Wavefunction::from_fn(g, |x| {
            let envelope = (-(-x - 0.8f64).powi(2) / (4.0 * 0.25)).exp();
            Complex64::new(envelope, 0.0)
        })
        .unwrap();
        assert!((mirrored.position_mean() + psi.position_mean()).abs() < 1e-9);
        assert!((mirrored.position_variance() - psi.position_variance()).abs() < 1e-9);
    }

    #[test]
    fn real_state_has_zero_momentum() {
        let psi = Wavefunction::gaussian(wide_grid(), 1.0, 0.8, 0.0).unwrap();
        assert!(psi.momentum_mean().abs() < 1e-10);
    }

    #[test]
    fn boosted_gaussian_momentum_mean() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 3.0).unwrap();
        assert!((psi.momentum_mean() - 3.0).abs() < 1e-6);
    }

    #[test]
    fn spectral_and_finite_difference_momentum_agree_on_smooth_states() {
        for (x0, sigma, p0) in [(0.0, 1.0, 0.0), (0.5, 0.8, 2.0), (-1.0, 1.2, -1.3)] {
            let psi = Wavefunction::gaussian(wide_grid(), x0, sigma, p0).unwrap();
            let fd = psi.momentum_mean();
            let spectral = psi.momentum_mean_spectral();
            assert!(
                (fd - spectral).abs() < 1e-6,
                "fd={fd} spectral={spectral} for p0={p0}"
            );
        }
        let two = Wavefunction::two_lobe(wide_grid(), 2.0, 0.5, 0.7, 1.0, -0.5).unwrap();
        assert!((two.momentum_mean() - two.momentum_mean_spectral()).abs() < 1e-6);
    }

    #[test]
    fn local_momentum_density_reads_the_phase_gradient() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 1.7).unwrap();
        for x in [-1.0, -0.3, 0.0, 0.8, 2.0] {
            assert!((psi.local_momentum_density(x).unwrap() - 1.7).abs() < 1e-6);
        }
        let real = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 0.0).unwrap();
        assert!(real.local_momentum_density(0.5).unwrap().abs() < 1e-10);
    }

    #[test]
    fn two_lobe_local_momentum_matches_each_lobe() {
        // Analytic phase-gradient oracle: at a lobe center the tail of the
        // other lobe is ~exp(-(2 x0)^2 / (8 sigma^2)) and contributes nothing
        // at the 1e-4 level.
        let psi = Wavefunction::two_lobe(wide_grid(), 2.0, 0.4, 0.6, 1.5, -0.7).unwrap();
        assert!((psi.local_momentum_density(2.0).unwrap() - 1.5).abs() < 1e-4);
        assert!((psi.local_momentum_density(-2.0).unwrap() + 0.7).abs() < 1e-4);
    }

    #[test]
    fn node_singularity_is_reported_between_lobes() {
        let psi = Wavefunction::two_lobe(wide_grid(), 3.0, 0.3, 0.5, 0.0, 0.0).unwrap();
        assert!(matches!(
            psi.local_momentum_density(0.0),
            Err(Error::NodeSingularity { .. })
        ));
    }

    #[test]
    fn local_second_moment_matches_gaussian_oracle() {
        // Symbolic oracle for psi = g(x) e^{i p0 x}: p0^2 + 1/(4 sigma^2),
        // independent of x for a Gaussian envelope.
        let (sigma, p0) = (0.9, 1.2);
        let psi = Wavefunction::gaussian(wide_grid(), 0.3, sigma, p0).unwrap();
        let oracle = p0 * p0 + 1.0 / (4.0 * sigma * sigma);
        for x in [0.3, 1.0, -0.5] {
            let got = psi.local_momentum_second_moment(x).unwrap();
            assert!((got - oracle).abs() < 1e-6 * oracle, "x={x}: {got} vs {oracle}");
        }
    }

    #[test]
    fn local_second_moment_vanishes_on_flat_interior() {
        let psi = Wavefunction::uniform(wide_grid());
        assert_eq!(psi.local_momentum_second_moment(0.0).unwrap(), 0.0);
    }

    #[test]
    fn local_second_moment_is_mirror_symmetric() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 0.6, 0.0).unwrap();
        for d in [0.25, 0.5, 1.0] {
            let plus = psi.local_momentum_second_moment(d).unwrap();
            let minus = psi.local_momentum_second_moment(-d).unwrap();
            assert!((plus - minus).abs() < 1e-9 * plus.abs().max(1.0));
        }
    }

    #[test]
    fn local_density_average_recovers_momentum_mean() {
        // Integrating p_loc against |psi|^2 ties the local density to <p>.
        let psi = Wavefunction::two_lobe(wide_grid(), 2.0, 0.5, 0.7, 1.0, -2.0).unwrap();
        let g = psi.grid();
        let mut acc = 0.0;
        for i in 0..g.len() {
            let rho = psi.probability_density(i);
            if rho >= NODE_THRESHOLD {
                acc += g.quad_weight(i) * rho * psi.local_momentum_density(g.point(i)).unwrap();
            }
        }
        assert!((acc - psi.momentum_mean()).abs() < 1e-6);
    }

    #[test]
    fn phase_ramp_shifts_momentum_mean() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 0.5).unwrap();
        let shifted = psi.with_phase_ramp(2.5);
        assert!((shifted.momentum_mean() - 3.0).abs() < 1e-6);
        assert!((shifted.norm_squared() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn distance_up_to_phase_ignores_global_phase() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.0, 1.0, 1.0).unwrap();
        let rotated = Wavefunction {
            grid: psi.grid,
            amplitudes: psi
                .amplitudes
                .iter()
                .map(|a| a * Complex64::from_polar(1.0, 1.234))
                .collect(),
            hbar: 1.0,
        };
        assert!(psi.l2_distance(&rotated) > 0.5);
        assert!(psi.l2_distance_up_to_phase(&rotated) < 1e-12);
    }

    #[test]
    fn csv_round_trip_preserves_amplitudes() {
        let psi = Wavefunction::gaussian(wide_grid(), 0.1, 0.5, 2.0).unwrap();
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("psi.csv");
        psi.write_csv(&path).unwrap();
        let back = Wavefunction::read_csv(&path).unwrap();
        assert_eq!(back.grid.len(), psi.grid.len());
        assert!(psi.l2_distance(&back) < 1e-12);
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn gaussian_family_invariants(
            x0 in -2.0f64..2.0,
            sigma in 0.2f64..1.1,
            p0 in -3.0f64..3.0,
        ) {
            let psi = Wavefunction::gaussian(wide_grid(), x0, sigma, p0).unwrap();
            let var_x = psi.position_variance();
            let var_p = psi.momentum_variance();
            prop_assert!(var_x >= 0.0);
            prop_assert!(var_p >= 0.0);
            // minimum-uncertainty family
            let product = var_x.sqrt() * var_p.sqrt();
            prop_assert!((product - 0.5).abs() < 1e-5, "product = {}", product);
            // normalize is a fixed point on constructed states
            let (again, by_product) = psi.clone().normalize().unwrap();
            prop_assert!((by_product - 1.0).abs() <= 1e-12);
            prop_assert_eq!(again.amplitudes, psi.amplitudes);
        }
    }
}
