//! Shared helpers for the integration suites.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use jamsim::{PowerSplit, SystemParams};

/// Independently derived exact value of the effective SINR that the Monte
/// Carlo estimator converges to under the simulated block model.
///
/// Obtained by evaluating the four expectation groups in closed form for
/// circularly-symmetric Gaussian channels and a sphere-uniform jammer
/// pilot, using `E{||v||^4} = M(M+1) sigma^4` and
/// `E{|phi_w^T phi_k*|^2} = 1/eta`:
///
/// * `E{a_k^H g_k} = M c_k beta_k` with
///   `c_k = eta p_t beta_k / (eta p_t beta_k + q_t beta_w + 1)`,
/// * `p_d sum_i E{|a_k^H g_i|^2} - p_d |E{a_k^H g_k}|^2
///    = p_d M sigma_k^2 sum_i beta_i`,
/// * `E{||a_k||^2} = M sigma_k^2`,
/// * `q_d E{|a_k^H g_w|^2}
///    = q_d M sigma_k^2 beta_w ((M+1) q_t beta_w + eta p_t beta_k + 1)
///      / (eta p_t beta_k + q_t beta_w + 1)`,
///
/// where `sigma_k^2 = c_k beta_k` is the estimate variance. This reference
/// never touches the crate's SINR code paths.
#[allow(dead_code)]
pub fn exact_uatf_sinr(params: &SystemParams, split: &PowerSplit, user_index: usize) -> f64 {
    let m = params.num_antennas as f64;
    let eta = params.training_length as f64;
    let beta_k = params.user_fading[user_index];
    let sum_beta: f64 = params.user_fading.iter().sum();
    let beta_w = params.jammer_fading;
    let eta_pt = eta * split.user_training_power;
    let p_d = split.user_data_power;
    let q_t = split.jammer_training_power;
    let q_d = split.jammer_data_power;
    let den = (eta_pt * beta_k + q_t * beta_w + 1.0) * (sum_beta + 1.0 / p_d)
        + (q_d / p_d) * ((m + 1.0) * q_t * beta_w + eta_pt * beta_k + 1.0) * beta_w;
    m * eta_pt * beta_k * beta_k / den
}

/// Random small scenario for oracle comparisons: K <= 4, M <= 64, eta <= 8,
/// T = 200, budgets 0..13 dB, fractions in [0.15, 0.85].
#[allow(dead_code)]
pub fn random_small_scenario(rng: &mut ChaCha8Rng) -> (SystemParams, PowerSplit) {
    let num_users = rng.gen_range(1..=4);
    let params = SystemParams {
        num_antennas: rng.gen_range(8..=64),
        num_users,
        coherence_length: 200,
        training_length: rng.gen_range(num_users..=8),
        user_fading: (0..num_users).map(|_| 10f64.powf(rng.gen_range(-1.3..0.0))).collect(),
        jammer_fading: 10f64.powf(rng.gen_range(-0.6..0.3)),
        user_budget: 10f64.powf(rng.gen_range(0.0..1.3)),
        jammer_budget: 10f64.powf(rng.gen_range(0.0..1.3)),
    };
    let phi = rng.gen_range(0.15..0.85);
    let zeta = rng.gen_range(0.15..0.85);
    let split = PowerSplit::from_fractions(&params, phi, zeta).unwrap();
    (params, split)
}

/// Random scenario with both jammer phase powers bounded away from zero,
/// for large-antenna limit checks.
#[allow(dead_code)]
pub fn random_jammed_scenario(rng: &mut ChaCha8Rng) -> (SystemParams, PowerSplit) {
    let num_users = rng.gen_range(1..=6);
    let params = SystemParams {
        num_antennas: rng.gen_range(16..=256),
        num_users,
        coherence_length: 200,
        training_length: rng.gen_range(num_users..=20),
        user_fading: (0..num_users).map(|_| 10f64.powf(rng.gen_range(-1.3..0.0))).collect(),
        jammer_fading: rng.gen_range(0.5..2.0),
        user_budget: 10f64.powf(rng.gen_range(0.0..1.0)),
        jammer_budget: 10f64.powf(rng.gen_range(0.0..1.0)),
    };
    let phi = rng.gen_range(0.2..0.8);
    let zeta = rng.gen_range(0.2..0.8);
    let split = PowerSplit::from_fractions(&params, phi, zeta).unwrap();
    (params, split)
}

#[allow(dead_code)]
pub fn max_relative_deviation(estimates: &[f64], references: &[f64]) -> f64 {
    estimates
        .iter()
        .zip(references)
        .map(|(e, r)| (e - r).abs() / r)
        .fold(0.0f64, f64::max)
}

#[allow(dead_code)]
pub fn seeded(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}
