//! Uniform 1-D spatial grid with trapezoidal quadrature weights.

use crate::{Error, Result};

/// A uniform grid of `n_points` samples spanning `[x_min, x_max]`.
///
/// Points are defined exactly as `x_i = x_min + i * spacing` with
/// `spacing = (x_max - x_min) / (n_points - 1)`; they are recomputed from
/// that formula rather than stored.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Grid {
    x_min: f64,
    x_max: f64,
    n_points: usize,
    spacing: f64,
}

impl Grid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(x_min: f64, x_max: f64, n_points: usize) -> Result<Self> {
        if !(x_min < x_max) || !x_min.is_finite() || !x_max.is_finite() {
            return Err(Error::InvalidGrid {
                reason: format!("need finite x_min < x_max, got [{x_min}, {x_max}]"),
            });
        }
        if n_points < Self::MIN_POINTS {
            return Err(Error::InvalidGrid {
                reason: format!("n_points = {n_points}, need at least {}", Self::MIN_POINTS),
            });
        }
        let spacing = (x_max - x_min) / (n_points - 1) as f64;
        Ok(Self {
            x_min,
            x_max,
            n_points,
            spacing,
        })
    }

    /// Symmetric grid over `[-x_max, x_max]`.
    pub fn symmetric(x_max: f64, n_points: usize) -> Result<Self> {
        Self::new(-x_max, x_max, n_points)
    }

    pub fn x_min(&self) -> f64 {
        self.x_min
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    pub fn len(&self) -> usize {
        self.n_points
    }

    pub fn is_empty(&self) -> bool {
        false // construction enforces n_points >= MIN_POINTS
    }

    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn point(&self, i: usize) -> f64 {
        debug_assert!(i < self.n_points);
        self.x_min + i as f64 * self.spacing
    }

    pub fn points(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.n_points).map(|i| self.point(i))
    }

    /// Largest |x| on the grid; bounds the phase argument `k*x` everywhere.
    pub fn max_abs_x(&self) -> f64 {
        self.x_min.abs().max(self.x_max.abs())
    }

    /// Index of the grid point nearest to `x` (clamped to the grid).
    pub fn nearest_index(&self, x: f64) -> usize {
        let i = ((x - self.x_min) / self.spacing).round();
        (i.max(0.0) as usize).min(self.n_points - 1)
    }

    /// Trapezoidal quadrature weight of point `i`: `spacing`, halved at the
    /// two endpoints.
    pub fn quad_weight(&self, i: usize) -> f64 {
        if i == 0 || i == self.n_points - 1 {
            0.5 * self.spacing
        } else {
            self.spacing
        }
    }

    /// Trapezoidal integral of a sampled function.
    pub fn integrate(&self, samples: impl Fn(usize) -> f64) -> f64 {
        let n = self.n_points;
        let mut sum = 0.5 * (samples(0) + samples(n - 1));
        for i in 1..n - 1 {
            sum += samples(i);
        }
        sum * self.spacing
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_are_exactly_uniform() {
        let g = Grid::new(-2.0, 3.0, 101).unwrap();
        assert_eq!(g.spacing(), 5.0 / 100.0);
        for i in 0..g.len() {
            assert_eq!(g.point(i), -2.0 + i as f64 * g.spacing());
        }
        assert!((g.point(g.len() - 1) - 3.0).abs() < 1e-14);
    }

    #[test]
    fn symmetric_grid_with_power_of_two_points_hits_zero() {
        // 4097 points over [-a, a] puts index 2048 exactly at x = 0.
        let g = Grid::symmetric(std::f64::consts::FRAC_PI_8, 4097).unwrap();
        assert_eq!(g.point(2048), 0.0);
    }

    #[test]
    fn rejects_degenerate_bounds_and_tiny_grids() {
        assert!(Grid::new(1.0, 1.0, 64).is_err());
        assert!(Grid::new(0.0, -1.0, 64).is_err());
        assert!(Grid::new(0.0, 1.0, 15).is_err());
        assert!(Grid::new(0.0, 1.0, 16).is_ok());
    }

    #[test]
    fn trapezoid_integrates_linear_functions_exactly() {
        let g = Grid::new(0.0, 1.0, 33).unwrap();
        let integral = g.integrate(|i| 2.0 * g.point(i) + 1.0);
        assert!((integral - 2.0).abs() < 1e-14, "got {integral}");
    }

    #[test]
    fn quad_weights_sum_to_span() {
        let g = Grid::new(-1.0, 2.5, 57).unwrap();
        let total: f64 = (0..g.len()).map(|i| g.quad_weight(i)).sum();
        assert!((total - 3.5).abs() < 1e-13);
    }

    #[test]
    fn nearest_index_rounds_and_clamps() {
        let g = Grid::new(0.0, 1.0, 101).unwrap();
        assert_eq!(g.nearest_index(0.504), 50);
        assert_eq!(g.nearest_index(0.506), 51);
        assert_eq!(g.nearest_index(-5.0), 0);
        assert_eq!(g.nearest_index(5.0), 100);
    }
}
