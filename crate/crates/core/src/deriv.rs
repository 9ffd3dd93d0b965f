//! Finite-difference derivatives on a uniform grid.
//!
//! Fourth-order central stencils in the interior with matching one-sided
//! stencils at the boundary, so no periodicity is imposed on the data. A
//! discrete-Fourier derivative is also provided; it assumes an effectively
//! periodic (edge-vanishing) signal and is used for cross-checks only.

use num_complex::Complex64;
use rustfft::FftPlanner;

/// First derivative, O(h^4).
pub fn first_derivative(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    assert!(n >= 6, "need at least 6 points for the 4th-order stencils");
    let inv = 1.0 / (12.0 * h);
    let mut out = vec![Complex64::ZERO; n];

    out[0] = (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * inv;
    out[1] = (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * inv;
    for i in 2..n - 2 {
        out[i] = (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv;
    }
    out[n - 2] = (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4]
        - f[n - 5])
        * inv;
    out[n - 1] = (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
        + 3.0 * f[n - 5])
        * inv;
    out
}

/// Second derivative, O(h^4).
#[allow(dead_code)] // exercised by the stencil tests below
pub fn second_derivative(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    assert!(n >= 6, "need at least 6 points for the 4th-order stencils");
    let inv = 1.0 / (12.0 * h * h);
    let mut out = vec![Complex64::ZERO; n];

    out[0] = (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4]
        - 10.0 * f[5])
        * inv;
    out[1] = (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * inv;
    for i in 2..n - 2 {
        out[i] = (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * inv;
    }
    out[n - 2] = (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4]
        - 6.0 * f[n - 5]
        + f[n - 6])
        * inv;
    out[n - 1] = (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4]
        + 61.0 * f[n - 5]
        - 10.0 * f[n - 6])
        * inv;
    out
}

/// First derivative at a single interior-or-edge index, same stencils as
/// [`first_derivative`].
pub fn first_derivative_at(f: &[Complex64], i: usize, h: f64) -> Complex64 {
    let n = f.len();
    assert!(n >= 6 && i < n);
    let inv = 1.0 / (12.0 * h);
    match i {
        0 => (-25.0 * f[0] + 48.0 * f[1] - 36.0 * f[2] + 16.0 * f[3] - 3.0 * f[4]) * inv,
        1 => (-3.0 * f[0] - 10.0 * f[1] + 18.0 * f[2] - 6.0 * f[3] + f[4]) * inv,
        i if i == n - 2 => {
            (3.0 * f[n - 1] + 10.0 * f[n - 2] - 18.0 * f[n - 3] + 6.0 * f[n - 4] - f[n - 5]) * inv
        }
        i if i == n - 1 => {
            (25.0 * f[n - 1] - 48.0 * f[n - 2] + 36.0 * f[n - 3] - 16.0 * f[n - 4]
                + 3.0 * f[n - 5])
                * inv
        }
        _ => (f[i - 2] - 8.0 * f[i - 1] + 8.0 * f[i + 1] - f[i + 2]) * inv,
    }
}

/// Second derivative at a single index, same stencils as
/// [`second_derivative`].
pub fn second_derivative_at(f: &[Complex64], i: usize, h: f64) -> Complex64 {
    let n = f.len();
    assert!(n >= 6 && i < n);
    let inv = 1.0 / (12.0 * h * h);
    match i {
        0 => {
            (45.0 * f[0] - 154.0 * f[1] + 214.0 * f[2] - 156.0 * f[3] + 61.0 * f[4] - 10.0 * f[5])
                * inv
        }
        1 => (10.0 * f[0] - 15.0 * f[1] - 4.0 * f[2] + 14.0 * f[3] - 6.0 * f[4] + f[5]) * inv,
        i if i == n - 2 => {
            (10.0 * f[n - 1] - 15.0 * f[n - 2] - 4.0 * f[n - 3] + 14.0 * f[n - 4] - 6.0 * f[n - 5]
                + f[n - 6])
                * inv
        }
        i if i == n - 1 => {
            (45.0 * f[n - 1] - 154.0 * f[n - 2] + 214.0 * f[n - 3] - 156.0 * f[n - 4]
                + 61.0 * f[n - 5]
                - 10.0 * f[n - 6])
                * inv
        }
        _ => (-f[i - 2] + 16.0 * f[i - 1] - 30.0 * f[i] + 16.0 * f[i + 1] - f[i + 2]) * inv,
    }
}

/// Discrete-Fourier first derivative, treating the samples as one period of
/// length `n * h`. Exact for band-limited periodic data; meaningful here only
/// when the state vanishes at the grid edges.
pub fn spectral_first_derivative(f: &[Complex64], h: f64) -> Vec<Complex64> {
    let n = f.len();
    let mut planner = FftPlanner::<f64>::new();
    let fwd = planner.plan_fft_forward(n);
    let inv = planner.plan_fft_inverse(n);

    let mut buf: Vec<Complex64> = f.to_vec();
    fwd.process(&mut buf);

    let period = n as f64 * h;
    let dq = 2.0 * std::f64::consts::PI / period;
    for (m, value) in buf.iter_mut().enumerate() {
        // FFT bin m carries wavenumber m*dq for m < n/2 and (m - n)*dq above.
        let q = if 2 * m < n {
            m as f64 * dq
        } else if 2 * m == n {
            0.0 // Nyquist bin: derivative of the sawtooth mode is ambiguous
        } else {
            (m as f64 - n as f64) * dq
        };
        *value *= Complex64::new(0.0, q);
    }
    inv.process(&mut buf);
    let scale = 1.0 / n as f64;
    for value in buf.iter_mut() {
        *value *= scale;
    }
    buf
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample(n: usize, h: f64, f: impl Fn(f64) -> Complex64) -> Vec<Complex64> {
        (0..n).map(|i| f(i as f64 * h)).collect()
    }

    #[test]
    fn polynomial_degree_four_is_differentiated_exactly() {
        // 4th-order stencils are exact on quartics.
        let h = 0.1;
        let f = sample(40, h, |x| Complex64::new(x.powi(4) - 2.0 * x.powi(2), 0.0));
        let d1 = first_derivative(&f, h);
        let d2 = second_derivative(&f, h);
        for i in 0..40 {
            let x = i as f64 * h;
            assert!((d1[i].re - (4.0 * x.powi(3) - 4.0 * x)).abs() < 1e-9, "i={i}");
            assert!((d2[i].re - (12.0 * x.powi(2) - 4.0)).abs() < 1e-7, "i={i}");
        }
    }

    #[test]
    fn single_point_stencils_match_full_arrays() {
        let h = 0.05;
        let f = sample(64, h, |x| Complex64::new((2.0 * x).sin(), (1.5 * x).cos()));
        let d1 = first_derivative(&f, h);
        let d2 = second_derivative(&f, h);
        for i in [0usize, 1, 2, 31, 62, 63] {
            assert_eq!(first_derivative_at(&f, i, h), d1[i]);
            assert_eq!(second_derivative_at(&f, i, h), d2[i]);
        }
    }

    #[test]
    fn complex_exponential_derivative_error_scales_as_h4() {
        let q = 3.0;
        let wave = |x: f64| Complex64::from_polar(1.0, q * x);
        let err = |n: usize, h: f64| -> f64 {
            let f = sample(n, h, wave);
            let d = first_derivative(&f, h);
            // interior point
            let i = n / 2;
            (d[i] - Complex64::new(0.0, q) * wave(i as f64 * h)).norm()
        };
        let e1 = err(100, 0.02);
        let e2 = err(200, 0.01);
        let ratio = e1 / e2;
        assert!(
            (ratio - 16.0).abs() < 2.0,
            "expected ~16x error reduction per halving, got {ratio}"
        );
    }

    #[test]
    fn spectral_derivative_is_near_exact_for_periodic_wave() {
        let n = 128;
        let period = 4.0;
        let h = period / n as f64;
        let q = 2.0 * std::f64::consts::PI * 5.0 / period; // integer mode
        let f = sample(n, h, |x| Complex64::from_polar(1.0, q * x));
        let d = spectral_first_derivative(&f, h);
        for i in 0..n {
            let expect = Complex64::new(0.0, q) * f[i];
            assert!((d[i] - expect).norm() < 1e-10, "i={i}");
        }
    }
}
