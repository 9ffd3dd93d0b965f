//! One complete N-photon measurement: sequential outcome sampling, state
//! update, and the experimenter-facing estimates.
//!
//! Sampling only ever consumes `|psi_j|^2`, and every operator is diagonal in
//! x, so the run evolves the real weight table
//! `w_i = |psi_j(x_i)|^2 * quad_weight_i` instead of complex amplitudes:
//! each detection multiplies `w` pointwise by the chosen port probability
//! and the next `P_b` is `sum(w * p_b) / sum(w)`. This is the per-step
//! update rule expressed on densities, at a fraction of the cost; the final
//! complex state is then rebuilt from the closed-form aggregate product (or
//! by sequential operator application when the grid exceeds the closed
//! form's branch bound).
//!
//! Trajectories are reproducible across platforms: outcomes are drawn from a
//! ChaCha8 counter-based generator seeded with the master seed and advanced
//! to a per-trajectory stream, so trajectory `j` of a run is a pure function
//! of `(seed, j)`.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::FRAC_PI_4;

use crate::interferometer::{
    aggregate_operator, apply_sequence, outcome_probability, InterferometerParams, PhotonOutcome,
};
use crate::wavefunction::Wavefunction;
use crate::{Error, Result};

/// Steps between renormalizations of the weight table. The table shrinks by
/// the step probability each photon, and on the `|kx| < pi/4` branch a step
/// factor is at worst ~0.146, so 256 steps stay far above the f64 underflow
/// threshold.
const RENORM_INTERVAL: usize = 256;

/// Everything recorded about one N-photon run.
#[derive(Debug, Clone)]
pub struct TrajectoryRecord {
    pub outcomes: Vec<PhotonOutcome>,
    pub n_a: usize,
    pub n_b: usize,
    /// `(n_b - n_a) / (2kN)`
    pub x_est: f64,
    pub final_state: Wavefunction,
    /// Probability of the outcome actually drawn at each step.
    pub step_probabilities: Vec<f64>,
    /// The same probabilities in log form; their sum is usable far beyond
    /// the N ~ 1000 where the linear product underflows.
    pub log_step_probabilities: Vec<f64>,
    pub seed: u64,
    pub stream: u64,
}

impl TrajectoryRecord {
    pub fn n_photons(&self) -> usize {
        self.n_a + self.n_b
    }

    /// `log P_seq`, the summed log of the recorded step probabilities.
    pub fn log_sequence_probability(&self) -> f64 {
        self.log_step_probabilities.iter().sum()
    }

    /// Record as a compact character string, e.g. `"aabab"`.
    pub fn outcomes_string(&self) -> String {
        self.outcomes.iter().map(|o| o.as_char()).collect()
    }

    /// Tuned operation assumes `|n_a - n_b| << N`; flag records far enough
    /// out (beyond 10 sqrt(N)) that the shot-noise law loses accuracy.
    pub fn is_balanced(&self) -> bool {
        let diff = (self.n_b as i64 - self.n_a as i64).unsigned_abs() as f64;
        diff <= 10.0 * (self.n_photons() as f64).sqrt()
    }
}

/// Counter-based generator for trajectory `stream` of a run seeded with
/// `master_seed`; the (seed, stream) pair fully determines the trajectory.
pub fn trajectory_rng(master_seed: u64, stream: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(stream);
    rng
}

/// Precomputed per-grid tables shared by every trajectory drawn from the
/// same initial state; avoids re-evaluating `sin` over the grid per run.
pub struct TrajectoryContext<'a> {
    psi0: &'a Wavefunction,
    params: InterferometerParams,
    weights0: Vec<f64>,
    prob_a: Vec<f64>,
    prob_b: Vec<f64>,
    branch_ok: bool,
}

impl<'a> TrajectoryContext<'a> {
    pub fn new(psi0: &'a Wavefunction, params: InterferometerParams) -> Self {
        let grid = psi0.grid();
        let weights0 = (0..grid.len())
            .map(|i| psi0.probability_density(i) * grid.quad_weight(i))
            .collect();
        let prob_a = grid
            .points()
            .map(|x| outcome_probability(PhotonOutcome::A, x, params.k))
            .collect();
        let prob_b = grid
            .points()
            .map(|x| outcome_probability(PhotonOutcome::B, x, params.k))
            .collect();
        let branch_ok = params.k * grid.max_abs_x() < FRAC_PI_4;
        Self {
            psi0,
            params,
            weights0,
            prob_a,
            prob_b,
            branch_ok,
        }
    }

    pub fn params(&self) -> InterferometerParams {
        self.params
    }

    /// Drive `n_photons` measurement steps, letting `choose` pick each
    /// outcome given the current `P_b`. Returns the outcomes with their
    /// per-step probabilities (linear and log).
    fn evolve(
        &self,
        n_photons: usize,
        mut choose: impl FnMut(f64) -> PhotonOutcome,
    ) -> (Vec<PhotonOutcome>, Vec<f64>, Vec<f64>) {
        let mut weights = self.weights0.clone();
        let mut total = sum(&weights);
        let mut total_b = dot(&weights, &self.prob_b);

        let mut outcomes = Vec::with_capacity(n_photons);
        let mut probs = Vec::with_capacity(n_photons);
        let mut logs = Vec::with_capacity(n_photons);

        for step in 0..n_photons {
            let p_b = total_b / total;
            let outcome = choose(p_b);
            let (p_step, factor) = match outcome {
                PhotonOutcome::B => (p_b, &self.prob_b),
                PhotonOutcome::A => (1.0 - p_b, &self.prob_a),
            };
            outcomes.push(outcome);
            probs.push(p_step);
            logs.push(p_step.ln());

            let next_b = step_update(&mut weights, factor, &self.prob_b);
            total = match outcome {
                PhotonOutcome::B => total_b,
                PhotonOutcome::A => total - total_b,
            };
            total_b = next_b;

            if (step + 1) % RENORM_INTERVAL == 0 {
                let inv = 1.0 / total;
                for w in weights.iter_mut() {
                    *w *= inv;
                }
                // refresh the running sums to purge accumulated drift
                total = sum(&weights);
                total_b = dot(&weights, &self.prob_b);
            }
        }
        (outcomes, probs, logs)
    }

    /// Run one seeded trajectory.
    pub fn run(&self, n_photons: usize, master_seed: u64, stream: u64) -> Result<TrajectoryRecord> {
        assert!(n_photons >= 1, "a measurement needs at least one photon");
        let mut rng = trajectory_rng(master_seed, stream);
        let (outcomes, probs, logs) =
            self.evolve(n_photons, |p_b| match rng.random::<f64>() < p_b {
                true => PhotonOutcome::B,
                false => PhotonOutcome::A,
            });

        let n_b = outcomes.iter().filter(|o| **o == PhotonOutcome::B).count();
        let n_a = n_photons - n_b;
        let k = self.params.k;
        let x_est = estimate_position(n_a, n_b, n_photons, k)?;

        let final_state = if self.params.use_exact_operators && self.branch_ok {
            aggregate_operator(self.psi0, n_a, n_b, k)?
        } else {
            apply_sequence(self.psi0, &outcomes, k)?.0
        };

        let record = TrajectoryRecord {
            outcomes,
            n_a,
            n_b,
            x_est,
            final_state,
            step_probabilities: probs,
            log_step_probabilities: logs,
            seed: master_seed,
            stream,
        };
        if !record.is_balanced() {
            log::debug!(
                "trajectory (seed {master_seed}, stream {stream}): |n_a - n_b| = {} \
                 exceeds 10 sqrt(N)",
                (record.n_b as i64 - record.n_a as i64).abs()
            );
        }
        debug_assert!({
            let closed = log_closed_form_probability(self.psi0, n_a, n_b, k);
            let step_sum = record.log_sequence_probability();
            (step_sum - closed).abs() <= 1e-8 + 1e-12 * closed.abs()
        });
        Ok(record)
    }
}

/// Simulate one complete measurement of `n_photons` photons. Deterministic
/// in `(master_seed, stream)`; ensemble trajectory `j` uses stream `j`.
pub fn run_trajectory(
    psi0: &Wavefunction,
    n_photons: usize,
    params: InterferometerParams,
    master_seed: u64,
    stream: u64,
) -> Result<TrajectoryRecord> {
    TrajectoryContext::new(psi0, params).run(n_photons, master_seed, stream)
}

/// The experimenter's position estimate `(n_b - n_a) / (2kN)`.
pub fn estimate_position(n_a: usize, n_b: usize, n_photons: usize, k: f64) -> Result<f64> {
    if n_a + n_b != n_photons {
        return Err(Error::CountMismatch {
            actual: n_a + n_b,
            expected: n_photons,
        });
    }
    Ok((n_b as i64 - n_a as i64) as f64 / (2.0 * k * n_photons as f64))
}

/// Shot-noise variance of the estimate, `1 / (4 N k^2)`.
pub fn predicted_sigma2_xest(n_photons: usize, k: f64) -> f64 {
    1.0 / (4.0 * n_photons as f64 * k * k)
}

/// Smallest possible increment of the estimate, `1 / (k N)`; the measurement
/// returns one of N+1 discrete values spaced by this amount.
pub fn resolution(n_photons: usize, k: f64) -> f64 {
    1.0 / (k * n_photons as f64)
}

/// A single detection read as a one-shot position measurement: port `a`
/// estimates `-1/(2k)`, port `b` estimates `+1/(2k)`. The mean of these
/// amplified one-shot values over a record is exactly `x_est`.
pub fn one_shot_weak_value(outcome: PhotonOutcome, k: f64) -> f64 {
    match outcome {
        PhotonOutcome::A => -1.0 / (2.0 * k),
        PhotonOutcome::B => 1.0 / (2.0 * k),
    }
}

/// Probability of one specific outcome sequence, evaluated along both
/// routes: the product of conditional step probabilities, and the closed
/// form `Integral |M_a^{n_a} M_b^{n_b} psi0|^2 dx` that the product
/// telescopes into. Both are returned as logs; the linear values are exposed
/// through [`SequenceProbability::step_product`] and
/// [`SequenceProbability::closed_form`] (which underflow for N beyond ~1000,
/// as the logs do not).
#[derive(Debug, Clone, Copy)]
pub struct SequenceProbability {
    pub log_step_product: f64,
    pub log_closed_form: f64,
    pub n_a: usize,
    pub n_b: usize,
}

impl SequenceProbability {
    pub fn step_product(&self) -> f64 {
        self.log_step_product.exp()
    }

    pub fn closed_form(&self) -> f64 {
        self.log_closed_form.exp()
    }
}

pub fn sequence_probability(
    psi0: &Wavefunction,
    outcomes: &[PhotonOutcome],
    k: f64,
) -> SequenceProbability {
    let params = InterferometerParams {
        k,
        use_exact_operators: true,
    };
    let ctx = TrajectoryContext::new(psi0, params);
    let mut replay = outcomes.iter();
    let (_, _, logs) = ctx.evolve(outcomes.len(), |_| *replay.next().expect("length match"));
    let n_b = outcomes.iter().filter(|o| **o == PhotonOutcome::B).count();
    let n_a = outcomes.len() - n_b;
    SequenceProbability {
        log_step_product: logs.iter().sum(),
        log_closed_form: log_closed_form_probability(psi0, n_a, n_b, k),
        n_a,
        n_b,
    }
}

/// `ln Integral |M_a|^{2 n_a} |M_b|^{2 n_b} |psi0|^2 dx` by log-domain
/// quadrature (max-shifted exponentials). Magnitudes use `|cos(kx ± pi/4)|`,
/// so no branch restriction applies. Returns `-inf` for an impossible
/// record.
pub fn log_closed_form_probability(psi0: &Wavefunction, n_a: usize, n_b: usize, k: f64) -> f64 {
    let grid = psi0.grid();
    let log_terms: Vec<f64> = grid
        .points()
        .enumerate()
        .map(|(i, x)| {
            let mass = psi0.probability_density(i) * grid.quad_weight(i);
            let log_a = scaled_log(n_a, (k * x + FRAC_PI_4).cos().abs());
            let log_b = scaled_log(n_b, (k * x - FRAC_PI_4).cos().abs());
            2.0 * (log_a + log_b) + mass.ln()
        })
        .collect();
    log_sum_exp(&log_terms)
}

/// `n * ln(v)` with the `0 * ln(0) = 0` convention.
fn scaled_log(n: usize, v: f64) -> f64 {
    if n == 0 {
        0.0
    } else {
        n as f64 * v.ln()
    }
}

pub(crate) fn log_sum_exp(log_terms: &[f64]) -> f64 {
    let peak = log_terms.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    if !peak.is_finite() {
        return f64::NEG_INFINITY;
    }
    let sum: f64 = log_terms.iter().map(|&t| (t - peak).exp()).sum();
    peak + sum.ln()
}

// ---- unrolled kernels -------------------------------------------------
//
// The per-photon loop touches every grid point once; four independent
// accumulators break the add latency chain and keep the evaluation order
// fixed, so results are bit-reproducible at any optimization level.

fn sum(values: &[f64]) -> f64 {
    let n4 = values.len() & !3;
    let mut acc = [0.0f64; 4];
    for chunk in values[..n4].chunks_exact(4) {
        acc[0] += chunk[0];
        acc[1] += chunk[1];
        acc[2] += chunk[2];
        acc[3] += chunk[3];
    }
    let mut tail = 0.0;
    for v in &values[n4..] {
        tail += v;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    let n4 = a.len() & !3;
    let mut acc = [0.0f64; 4];
    for (ca, cb) in a[..n4].chunks_exact(4).zip(b[..n4].chunks_exact(4)) {
        acc[0] += ca[0] * cb[0];
        acc[1] += ca[1] * cb[1];
        acc[2] += ca[2] * cb[2];
        acc[3] += ca[3] * cb[3];
    }
    let mut tail = 0.0;
    for (x, y) in a[n4..].iter().zip(&b[n4..]) {
        tail += x * y;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

/// `w *= factor` pointwise, returning the updated `dot(w, prob_b)` in the
/// same pass.
fn step_update(w: &mut [f64], factor: &[f64], prob_b: &[f64]) -> f64 {
    debug_assert_eq!(w.len(), factor.len());
    debug_assert_eq!(w.len(), prob_b.len());
    let n4 = w.len() & !3;
    let mut acc = [0.0f64; 4];
    {
        let (w4, w_tail) = w.split_at_mut(n4);
        for ((cw, cf), cp) in w4
            .chunks_exact_mut(4)
            .zip(factor[..n4].chunks_exact(4))
            .zip(prob_b[..n4].chunks_exact(4))
        {
            let w0 = cw[0] * cf[0];
            cw[0] = w0;
            acc[0] += w0 * cp[0];
            let w1 = cw[1] * cf[1];
            cw[1] = w1;
            acc[1] += w1 * cp[1];
            let w2 = cw[2] * cf[2];
            cw[2] = w2;
            acc[2] += w2 * cp[2];
            let w3 = cw[3] * cf[3];
            cw[3] = w3;
            acc[3] += w3 * cp[3];
        }
        let mut tail = 0.0;
        for ((wv, fv), pv) in w_tail.iter_mut().zip(&factor[n4..]).zip(&prob_b[n4..]) {
            let updated = *wv * *fv;
            *wv = updated;
            tail += updated * *pv;
        }
        acc[0] += tail;
    }
    (acc[0] + acc[1]) + (acc[2] + acc[3])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::Grid;
    use num_complex::Complex64;
    use rand::Rng;
    use std::f64::consts::FRAC_PI_8;

    fn default_params() -> InterferometerParams {
        InterferometerParams::default()
    }

    fn default_psi0() -> Wavefunction {
        let grid = Grid::symmetric(FRAC_PI_8, 4096).unwrap();
        Wavefunction::gaussian(grid, 0.0, 0.02, 0.0).unwrap()
    }

    fn random_state(grid: Grid, seed: u64) -> Wavefunction {
        let mut rng = trajectory_rng(seed, 0);
        let amps = (0..grid.len())
            .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
            .collect();
        Wavefunction::from_amplitudes(grid, amps).unwrap()
    }

    #[test]
    fn bright_port_gives_all_b_outcomes() {
        // Point mass at x = pi/(4k): P_b = 1 there, and the grid exceeds the
        // closed-form branch bound, exercising the sequential fallback.
        let g = Grid::new(FRAC_PI_4 - 0.5, FRAC_PI_4 + 0.5, 33).unwrap();
        let mut amps = vec![Complex64::ZERO; g.len()];
        amps[g.nearest_index(FRAC_PI_4)] = Complex64::ONE;
        let psi = Wavefunction::from_amplitudes(g, amps).unwrap();

        let n = 50;
        let record = run_trajectory(&psi, n, default_params(), 7, 0).unwrap();
        assert_eq!(record.n_b, n);
        assert_eq!(record.n_a, 0);
        assert_eq!(record.x_est, 0.5); // 1/(2k)
        assert!(record.step_probabilities.iter().all(|&p| p == 1.0));
    }

    #[test]
    fn collapse_reaches_the_shot_noise_width() {
        let psi = default_psi0();
        let n = 10_000;
        let record = run_trajectory(&psi, n, default_params(), 42, 0).unwrap();
        let var = record.final_state.position_variance();
        let shot = predicted_sigma2_xest(n, 1.0);
        assert!(
            (var / shot - 1.0).abs() < 0.10,
            "final variance {var} vs shot-noise {shot}"
        );
        assert!(var < psi.position_variance());
    }

    #[test]
    fn identical_seeds_reproduce_the_record_bit_for_bit() {
        let psi = default_psi0();
        let a = run_trajectory(&psi, 300, default_params(), 123, 5).unwrap();
        let b = run_trajectory(&psi, 300, default_params(), 123, 5).unwrap();
        assert_eq!(a.outcomes, b.outcomes);
        assert_eq!(a.step_probabilities, b.step_probabilities);
        assert_eq!(a.x_est, b.x_est);
        assert_eq!(a.final_state.amplitudes(), b.final_state.amplitudes());
        // a different stream diverges
        let c = run_trajectory(&psi, 300, default_params(), 123, 6).unwrap();
        assert_ne!(a.outcomes, c.outcomes);
    }

    #[test]
    fn weight_table_sampling_matches_explicit_operator_updates() {
        // Drive both routes with the same uniform draws; probabilities agree
        // to ~1e-15, so the outcome sequences coincide.
        let g = Grid::symmetric(FRAC_PI_8, 512).unwrap();
        let psi = Wavefunction::two_lobe(g, 0.03, 0.008, 0.6, 0.0, 0.0).unwrap();
        let n = 200;
        let draws: Vec<f64> = {
            let mut rng = trajectory_rng(9, 0);
            (0..n).map(|_| rng.random::<f64>()).collect()
        };

        let ctx = TrajectoryContext::new(&psi, default_params());
        let mut j = 0;
        let (outcomes, probs, _) = ctx.evolve(n, |p_b| {
            let o = if draws[j] < p_b {
                PhotonOutcome::B
            } else {
                PhotonOutcome::A
            };
            j += 1;
            o
        });

        let mut state = psi.clone();
        for (step, &draw) in draws.iter().enumerate() {
            let (_, p_b) = crate::interferometer::port_probabilities(&state, 1.0);
            assert!(
                (p_b - match outcomes[step] {
                    PhotonOutcome::B => probs[step],
                    PhotonOutcome::A => 1.0 - probs[step],
                })
                .abs()
                    < 1e-13,
                "step {step}"
            );
            let outcome = if draw < p_b {
                PhotonOutcome::B
            } else {
                PhotonOutcome::A
            };
            assert_eq!(outcome, outcomes[step], "diverged at step {step}");
            let (next, _) = crate::interferometer::apply_outcome(&state, outcome, 1.0).unwrap();
            state = next;
        }

        // and the reconstructed final state matches the sequential one
        let record = {
            let mut j = 0;
            let ctx_rng =
                move |p_b: f64| {
                    let o = if draws[j] < p_b {
                        PhotonOutcome::B
                    } else {
                        PhotonOutcome::A
                    };
                    j += 1;
                    o
                };
            let (outcomes, _, _) = ctx.evolve(n, ctx_rng);
            let n_b = outcomes.iter().filter(|o| **o == PhotonOutcome::B).count();
            aggregate_operator(&psi, n - n_b, n_b, 1.0).unwrap()
        };
        assert!(record.l2_distance_up_to_phase(&state) < 1e-10);
    }

    #[test]
    fn estimate_position_arithmetic() {
        assert_eq!(estimate_position(5, 5, 10, 1.0).unwrap(), 0.0);
        assert_eq!(estimate_position(4950, 5050, 10_000, 1.0).unwrap(), 0.005);
        assert_eq!(estimate_position(0, 100, 100, 1.0).unwrap(), 0.5);
        assert!(matches!(
            estimate_position(3, 4, 10, 1.0),
            Err(Error::CountMismatch { .. })
        ));
    }

    #[test]
    fn shot_noise_variance_and_resolution_scalings() {
        assert_eq!(predicted_sigma2_xest(10_000, 1.0), 2.5e-5);
        assert_eq!(predicted_sigma2_xest(1, 1.0), 0.25);
        // quadrupling N quarters the variance, exactly in floating point
        let n0 = 377;
        assert_eq!(
            4.0 * predicted_sigma2_xest(4 * n0, 1.3),
            predicted_sigma2_xest(n0, 1.3)
        );

        assert_eq!(resolution(10_000, 1.0), 1e-4);
        assert_eq!(resolution(1, 2.0), 0.5);
        // resolution / sigma = 2 / sqrt(N)
        let n = 10_000;
        let ratio = resolution(n, 1.0) / predicted_sigma2_xest(n, 1.0).sqrt();
        assert!((ratio - 2.0 / (n as f64).sqrt()).abs() < 1e-15);
    }

    #[test]
    fn one_shot_values_average_to_the_estimate() {
        assert_eq!(one_shot_weak_value(PhotonOutcome::A, 1.0), -0.5);
        assert_eq!(one_shot_weak_value(PhotonOutcome::B, 2.0), 0.25);

        for k in [1.0, 2.0] {
            let g = Grid::symmetric(FRAC_PI_8 / k, 512).unwrap();
            let psi = Wavefunction::gaussian(g, 0.0, 0.02 / k, 0.0).unwrap();
            let params = InterferometerParams {
                k,
                use_exact_operators: true,
            };
            let record = run_trajectory(&psi, 40, params, 11, 0).unwrap();
            let mean: f64 = record
                .outcomes
                .iter()
                .map(|&o| one_shot_weak_value(o, k))
                .sum::<f64>()
                / 40.0;
            assert_eq!(mean, record.x_est);
        }
    }

    #[test]
    fn single_photon_sequence_probability_is_half_for_symmetric_state() {
        let psi = default_psi0();
        let sp = sequence_probability(&psi, &[PhotonOutcome::B], 1.0);
        assert!((sp.step_product() - 0.5).abs() < 1e-10);
        assert!((sp.closed_form() - 0.5).abs() < 1e-10);
    }

    #[test]
    fn sequence_probability_is_order_invariant() {
        let g = Grid::symmetric(FRAC_PI_8, 256).unwrap();
        let psi = random_state(g, 21);
        let ab = sequence_probability(&psi, &[PhotonOutcome::A, PhotonOutcome::B], 1.0);
        let ba = sequence_probability(&psi, &[PhotonOutcome::B, PhotonOutcome::A], 1.0);
        assert!((ab.step_product() - ba.step_product()).abs() < 1e-14);
    }

    #[test]
    fn three_photon_sequences_exhaust_unit_probability() {
        let g = Grid::symmetric(FRAC_PI_8, 256).unwrap();
        let psi = random_state(g, 4);
        let mut total = 0.0;
        for bits in 0..8u32 {
            let outcomes: Vec<PhotonOutcome> = (0..3)
                .map(|i| {
                    if bits >> i & 1 == 1 {
                        PhotonOutcome::B
                    } else {
                        PhotonOutcome::A
                    }
                })
                .collect();
            let sp = sequence_probability(&psi, &outcomes, 1.0);
            assert!(
                (sp.step_product() - sp.closed_form()).abs() < 1e-10,
                "routes disagree for {outcomes:?}"
            );
            total += sp.step_product();
        }
        assert!((total - 1.0).abs() < 1e-10, "total = {total}");
    }

    #[test]
    fn telescoping_holds_on_a_long_simulated_record() {
        let psi = default_psi0();
        let record = run_trajectory(&psi, 1000, default_params(), 2024, 3).unwrap();
        let closed = log_closed_form_probability(&psi, record.n_a, record.n_b, 1.0);
        let steps = record.log_sequence_probability();
        assert!(
            (steps - closed).abs() < 1e-8,
            "step sum {steps} vs closed form {closed}"
        );
    }

    #[test]
    fn first_outcome_frequency_matches_the_port_probability() {
        // 1e5 seeded single-photon trajectories against P_b(psi0).
        let g = Grid::symmetric(FRAC_PI_8, 512).unwrap();
        let psi = Wavefunction::gaussian(g, 0.01, 0.02, 0.0).unwrap();
        let (_, p_b) = crate::interferometer::port_probabilities(&psi, 1.0);

        let ctx = TrajectoryContext::new(&psi, default_params());
        let m = 100_000;
        let mut hits = 0u64;
        for stream in 0..m {
            let mut rng = trajectory_rng(31, stream);
            let (outcomes, _, _) = ctx.evolve(1, |p| {
                if rng.random::<f64>() < p {
                    PhotonOutcome::B
                } else {
                    PhotonOutcome::A
                }
            });
            if outcomes[0] == PhotonOutcome::B {
                hits += 1;
            }
        }
        let freq = hits as f64 / m as f64;
        let sigma = (p_b * (1.0 - p_b) / m as f64).sqrt();
        assert!(
            (freq - p_b).abs() < 4.0 * sigma,
            "freq {freq} vs P_b {p_b} (sigma {sigma})"
        );
    }

    #[test]
    fn backaction_narrows_wide_states() {
        // sigma0 = 0.02 > 1/(2 sqrt(N) k) = 0.01 at N = 2500
        let psi = default_psi0();
        let ctx = TrajectoryContext::new(&psi, default_params());
        let var0 = psi.position_variance();
        for stream in 0..20 {
            let record = ctx.run(2500, 77, stream).unwrap();
            assert!(
                record.final_state.position_variance() < var0,
                "stream {stream} did not narrow"
            );
        }
    }

    #[test]
    fn kernel_helpers_match_naive_evaluation() {
        let a: Vec<f64> = (0..37).map(|i| (i as f64 * 0.7).sin()).collect();
        let b: Vec<f64> = (0..37).map(|i| (i as f64 * 0.3).cos()).collect();
        let naive_dot: f64 = a.iter().zip(&b).map(|(x, y)| x * y).sum();
        assert!((dot(&a, &b) - naive_dot).abs() < 1e-12);
        let naive_sum: f64 = a.iter().sum();
        assert!((sum(&a) - naive_sum).abs() < 1e-12);

        let mut w = a.clone();
        let factor = b.clone();
        let prob: Vec<f64> = (0..37).map(|i| 0.5 + 0.1 * (i as f64).sin()).collect();
        let expected_dot: f64 = a
            .iter()
            .zip(&factor)
            .zip(&prob)
            .map(|((x, f), p)| x * f * p)
            .sum();
        let got = step_update(&mut w, &factor, &prob);
        assert!((got - expected_dot).abs() < 1e-12);
        for i in 0..37 {
            assert_eq!(w[i], a[i] * factor[i]);
        }
    }
}
