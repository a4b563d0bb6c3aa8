//! Monte Carlo oracle for the closed-form SINR.
//!
//! Simulates coherence blocks of the full receive model — orthogonal user
//! pilots plus a random-pilot jammer during training, linear MMSE channel
//! estimation, maximum ratio combining — and estimates the four expectation
//! groups of the effective SINR
//!
//! ```text
//!            p_d |E{a_k^H g_k}|^2
//! ------------------------------------------------------------------
//! p_d sum_i E{|a_k^H g_i|^2} - p_d |E{a_k^H g_k}|^2
//!     + E{||a_k||^2} + q_d E{|a_k^H g_w|^2}
//! ```
//!
//! by sample means over independent blocks, with the combiner `a_k` equal to
//! the estimated channel column. Expectations are taken over channels,
//! noise, and the jammer pilot, which is re-drawn every block.
//!
//! Every block draws from its own counter-derived ChaCha stream, and the
//! reduction runs over fixed-size chunks merged in index order, so results
//! are bit-identical for any worker count; the sequential mode exists as the
//! plain single-threaded execution of the same schedule. Estimates are plain
//! sample means; no variance reduction is applied.

use ndarray::{Array1, Array2};
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::scenario::SystemParams;
use crate::se_core::PowerSplit;

/// Blocks per accumulation chunk. Fixing this constant fixes the summation
/// order regardless of how chunks are scheduled across threads.
const BLOCK_CHUNK: usize = 256;

fn complex_normal(rng: &mut ChaCha8Rng) -> Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// `a^H b`.
fn cdot(a: ndarray::ArrayView1<Complex64>, b: ndarray::ArrayView1<Complex64>) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

/// Orthonormal user pilot matrix (`eta x K`, `Phi^H Phi = I`).
#[derive(Debug, Clone)]
pub struct PilotBook {
    matrix: Array2<Complex64>,
    conjugate: Array2<Complex64>,
}

impl PilotBook {
    fn from_matrix(matrix: Array2<Complex64>) -> Result<Self> {
        let book = Self { conjugate: matrix.mapv(|z| z.conj()), matrix };
        let defect = book.orthonormality_defect();
        if defect > 1e-12 {
            return Err(Error::InvalidParams(format!(
                "pilot columns are not orthonormal (defect {defect:.3e})"
            )));
        }
        Ok(book)
    }

    /// Truncated DFT book: column `k` has entries
    /// `exp(-2*pi*i*m*k/eta) / sqrt(eta)`.
    pub fn dft(training_length: usize, num_users: usize) -> Result<Self> {
        if num_users == 0 || num_users > training_length {
            return Err(Error::InvalidParams(format!(
                "need 1 <= K <= eta, got K={num_users}, eta={training_length}"
            )));
        }
        let eta = training_length as f64;
        let scale = 1.0 / eta.sqrt();
        let mut matrix = Array2::zeros((training_length, num_users));
        for col in 0..num_users {
            for row in 0..training_length {
                let angle = -2.0 * std::f64::consts::PI * (row as f64) * (col as f64) / eta;
                matrix[[row, col]] = Complex64::from_polar(scale, angle);
            }
        }
        Self::from_matrix(matrix)
    }

    /// Random orthonormal book from Gram-Schmidt on complex Gaussian draws.
    pub fn random(training_length: usize, num_users: usize, rng: &mut ChaCha8Rng) -> Result<Self> {
        if num_users == 0 || num_users > training_length {
            return Err(Error::InvalidParams(format!(
                "need 1 <= K <= eta, got K={num_users}, eta={training_length}"
            )));
        }
        let mut matrix = Array2::zeros((training_length, num_users));
        for col in 0..num_users {
            for row in 0..training_length {
                matrix[[row, col]] = complex_normal(rng);
            }
        }
        // Modified Gram-Schmidt, two passes over earlier columns.
        for col in 0..num_users {
            for _ in 0..2 {
                for prev in 0..col {
                    let proj = cdot(matrix.column(prev), matrix.column(col));
                    for row in 0..training_length {
                        let correction = proj * matrix[[row, prev]];
                        matrix[[row, col]] -= correction;
                    }
                }
            }
            let norm = matrix.column(col).iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
            for row in 0..training_length {
                matrix[[row, col]] /= norm;
            }
        }
        Self::from_matrix(matrix)
    }

    pub fn matrix(&self) -> &Array2<Complex64> {
        &self.matrix
    }

    pub(crate) fn conjugate(&self) -> &Array2<Complex64> {
        &self.conjugate
    }

    /// Largest entry of `|Phi^H Phi - I|`.
    pub fn orthonormality_defect(&self) -> f64 {
        let k = self.matrix.ncols();
        let mut defect = 0.0f64;
        for a in 0..k {
            for b in 0..k {
                let dot = cdot(self.matrix.column(a), self.matrix.column(b));
                let expected = if a == b { Complex64::new(1.0, 0.0) } else { Complex64::new(0.0, 0.0) };
                defect = defect.max((dot - expected).norm());
            }
        }
        defect
    }
}

/// One coherence block's random draws.
#[derive(Debug, Clone)]
pub struct ChannelRealization {
    /// User channel matrix `G` (`M x K`), column `k` circularly-symmetric
    /// Gaussian with per-entry variance `beta_k`.
    pub user_channels: Array2<Complex64>,
    /// Jammer channel `g_w` (`M`), per-entry variance `beta_w`.
    pub jammer_channel: Array1<Complex64>,
    /// Training receiver noise `N` (`M x eta`), unit-variance entries.
    pub training_noise: Array2<Complex64>,
    /// Jammer pilot, uniform on the unit sphere of length `eta`.
    pub jammer_pilot: Array1<Complex64>,
    /// Data-phase receiver noise (`M`), unit-variance entries.
    pub data_noise: Array1<Complex64>,
    /// Jammer data symbol, unit variance.
    pub jammer_symbol: Complex64,
    /// User data symbols (`K`), unit variance.
    pub user_symbols: Array1<Complex64>,
}

/// The ChaCha stream for block `block_index` of a run seeded with `seed`.
/// Streams are independent across indices, so blocks can be generated in any
/// order or in parallel without affecting the draws.
pub fn block_rng(seed: u64, block_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(block_index);
    rng
}

/// Draws one block of channels, noise, pilot, and symbols. Deterministic for
/// a given RNG state.
pub fn generate_block(params: &SystemParams, rng: &mut ChaCha8Rng) -> ChannelRealization {
    debug_assert!(params.validate().is_ok());
    let m = params.num_antennas;
    let k = params.num_users;
    let eta = params.training_length;

    let mut user_channels = Array2::zeros((m, k));
    for col in 0..k {
        let scale = params.user_fading[col].sqrt();
        for row in 0..m {
            user_channels[[row, col]] = complex_normal(rng) * scale;
        }
    }

    let jam_scale = params.jammer_fading.sqrt();
    let jammer_channel = Array1::from_iter((0..m).map(|_| complex_normal(rng) * jam_scale));

    let mut training_noise = Array2::zeros((m, eta));
    for row in 0..m {
        for col in 0..eta {
            training_noise[[row, col]] = complex_normal(rng);
        }
    }

    let mut jammer_pilot = Array1::from_iter((0..eta).map(|_| complex_normal(rng)));
    let norm = jammer_pilot.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    jammer_pilot.mapv_inplace(|z| z / norm);

    let data_noise = Array1::from_iter((0..m).map(|_| complex_normal(rng)));
    let jammer_symbol = complex_normal(rng);
    let user_symbols = Array1::from_iter((0..k).map(|_| complex_normal(rng)));

    ChannelRealization {
        user_channels,
        jammer_channel,
        training_noise,
        jammer_pilot,
        data_noise,
        jammer_symbol,
        user_symbols,
    }
}

/// Training-phase receive matrix
/// `Y_t = sqrt(eta p_t) G Phi^T + N + sqrt(eta q_t) g_w phi_w^T`.
pub fn training_observation(
    realization: &ChannelRealization,
    params: &SystemParams,
    split: &PowerSplit,
    pilots: &PilotBook,
) -> Array2<Complex64> {
    let eta = params.training_length as f64;
    let user_amp = (eta * split.user_training_power).sqrt();
    let jam_amp = (eta * split.jammer_training_power).sqrt();

    let mut observation = realization.user_channels.dot(&pilots.matrix().t());
    observation.mapv_inplace(|z| z * user_amp);
    observation += &realization.training_noise;
    for row in 0..observation.nrows() {
        let lead = jam_amp * realization.jammer_channel[row];
        for col in 0..observation.ncols() {
            observation[[row, col]] += lead * realization.jammer_pilot[col];
        }
    }
    observation
}

/// Linear MMSE channel estimate and its error, `(Ghat, Ghat - G)`.
///
/// The estimate is `Y_t Phi* / sqrt(eta p_t)` with column `k` shrunk by
/// `eta p_t beta_k / (eta p_t beta_k + q_t beta_w + 1)`.
pub fn mmse_estimate(
    realization: &ChannelRealization,
    params: &SystemParams,
    split: &PowerSplit,
    pilots: &PilotBook,
) -> Result<(Array2<Complex64>, Array2<Complex64>)> {
    if split.user_training_power <= 0.0 {
        return Err(Error::NoTraining(format!(
            "estimation requires p_t > 0, got {}",
            split.user_training_power
        )));
    }
    let eta = params.training_length as f64;
    let eta_pt = eta * split.user_training_power;
    let jam = split.jammer_training_power * params.jammer_fading;

    let observation = training_observation(realization, params, split, pilots);
    let mut estimate = observation.dot(pilots.conjugate());
    let descale = 1.0 / eta_pt.sqrt();
    for col in 0..params.num_users {
        let beta_k = params.user_fading[col];
        let shrink = eta_pt * beta_k / (eta_pt * beta_k + jam + 1.0) * descale;
        for row in 0..estimate.nrows() {
            estimate[[row, col]] *= shrink;
        }
    }
    let error = &estimate - &realization.user_channels;
    Ok((estimate, error))
}

/// Combiner output for one data-phase symbol,
/// `r = A^H (sqrt(p_d) G x + n + sqrt(q_d) g_w s)`.
pub fn data_phase_output(
    realization: &ChannelRealization,
    combiner: &Array2<Complex64>,
    split: &PowerSplit,
) -> Array1<Complex64> {
    let user_amp = split.user_data_power.sqrt();
    let jam_amp = split.jammer_data_power.sqrt();
    let mut received = realization.user_channels.dot(&realization.user_symbols);
    received.mapv_inplace(|z| z * user_amp);
    received += &realization.data_noise;
    let jam_lead = jam_amp * realization.jammer_symbol;
    for row in 0..received.len() {
        received[row] += jam_lead * realization.jammer_channel[row];
    }
    Array1::from_iter((0..combiner.ncols()).map(|k| cdot(combiner.column(k), received.view())))
}

/// Options for the Monte Carlo SINR estimator.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub num_blocks: usize,
    pub seed: u64,
    /// Spread chunks across the rayon pool; results are bit-identical either
    /// way.
    pub parallel: bool,
    /// Re-draw a random orthonormal user pilot book every block instead of
    /// the shared DFT book. The estimated statistics are invariant to this.
    pub randomize_pilots: bool,
}

impl Default for McConfig {
    fn default() -> Self {
        Self { num_blocks: 100_000, seed: 0, parallel: true, randomize_pilots: false }
    }
}

/// Sample-mean estimates of the SINR expectation groups.
#[derive(Debug, Clone)]
pub struct UatfEstimate {
    /// `E{a_k^H g_k}` per user.
    pub mean_gain: Vec<Complex64>,
    /// `E{|a_k^H g_i|^2}`, row `k`, column `i`.
    pub cross_power: Array2<f64>,
    /// `E{||a_k||^2}` per user.
    pub combiner_norm: Vec<f64>,
    /// `E{|a_k^H g_w|^2}` per user.
    pub jam_leakage: Vec<f64>,
    pub num_samples: usize,
    /// Effective SINR per user assembled from the four estimates above.
    pub sinr: Vec<f64>,
}

struct Accumulator {
    gain: Vec<Complex64>,
    cross: Vec<f64>,
    norm: Vec<f64>,
    jam: Vec<f64>,
}

impl Accumulator {
    fn zero(num_users: usize) -> Self {
        Self {
            gain: vec![Complex64::new(0.0, 0.0); num_users],
            cross: vec![0.0; num_users * num_users],
            norm: vec![0.0; num_users],
            jam: vec![0.0; num_users],
        }
    }

    fn add_block(&mut self, combiner: &Array2<Complex64>, realization: &ChannelRealization) {
        let num_users = combiner.ncols();
        for k in 0..num_users {
            let a = combiner.column(k);
            for i in 0..num_users {
                let dot = cdot(a, realization.user_channels.column(i));
                if i == k {
                    self.gain[k] += dot;
                }
                self.cross[k * num_users + i] += dot.norm_sqr();
            }
            self.norm[k] += a.iter().map(|z| z.norm_sqr()).sum::<f64>();
            self.jam[k] += cdot(a, realization.jammer_channel.view()).norm_sqr();
        }
    }

    fn merge(mut self, other: &Accumulator) -> Self {
        for (a, b) in self.gain.iter_mut().zip(&other.gain) {
            *a += *b;
        }
        for (a, b) in self.cross.iter_mut().zip(&other.cross) {
            *a += *b;
        }
        for (a, b) in self.norm.iter_mut().zip(&other.norm) {
            *a += *b;
        }
        for (a, b) in self.jam.iter_mut().zip(&other.jam) {
            *a += *b;
        }
        self
    }
}

/// Estimates the effective SINR by sample means over `num_blocks`
/// independent coherence blocks with the default configuration (parallel,
/// shared DFT pilots).
pub fn estimate_uatf_sinr(
    params: &SystemParams,
    split: &PowerSplit,
    num_blocks: usize,
    seed: u64,
) -> Result<UatfEstimate> {
    estimate_uatf_sinr_with(params, split, &McConfig { num_blocks, seed, ..McConfig::default() })
}

/// [`estimate_uatf_sinr`] with full control of the run configuration.
pub fn estimate_uatf_sinr_with(
    params: &SystemParams,
    split: &PowerSplit,
    cfg: &McConfig,
) -> Result<UatfEstimate> {
    params.validate()?;
    if cfg.num_blocks == 0 {
        return Err(Error::InvalidParams("num_blocks must be at least 1".into()));
    }
    if split.user_training_power <= 0.0 {
        return Err(Error::NoTraining("SINR estimation requires p_t > 0".into()));
    }
    if split.user_data_power <= 0.0 {
        return Err(Error::DegenerateSplit("SINR estimation requires p_d > 0".into()));
    }

    let num_users = params.num_users;
    let shared_pilots = PilotBook::dft(params.training_length, num_users)?;
    let chunk_count = cfg.num_blocks.div_ceil(BLOCK_CHUNK);

    let run_chunk = |chunk: usize| -> Accumulator {
        let start = chunk * BLOCK_CHUNK;
        let end = ((chunk + 1) * BLOCK_CHUNK).min(cfg.num_blocks);
        let mut acc = Accumulator::zero(num_users);
        for block in start..end {
            let mut rng = block_rng(cfg.seed, block as u64);
            let realization = generate_block(params, &mut rng);
            let fresh_book;
            let pilots = if cfg.randomize_pilots {
                fresh_book = PilotBook::random(params.training_length, num_users, &mut rng)
                    .expect("valid dimensions were checked above");
                &fresh_book
            } else {
                &shared_pilots
            };
            let (combiner, _) = mmse_estimate(&realization, params, split, pilots)
                .expect("p_t > 0 was checked above");
            acc.add_block(&combiner, &realization);
        }
        acc
    };

    // Chunks are merged in index order in both modes, so the floating-point
    // reduction order (and hence the result) never depends on threading.
    let chunks: Vec<Accumulator> = if cfg.parallel {
        (0..chunk_count).into_par_iter().map(run_chunk).collect()
    } else {
        (0..chunk_count).map(run_chunk).collect()
    };
    let total = chunks
        .into_iter()
        .fold(Accumulator::zero(num_users), |acc, chunk| acc.merge(&chunk));

    let inv = 1.0 / cfg.num_blocks as f64;
    let mean_gain: Vec<Complex64> = total.gain.iter().map(|g| g * inv).collect();
    let cross_power =
        Array2::from_shape_vec((num_users, num_users), total.cross.iter().map(|c| c * inv).collect())
            .expect("shape matches construction");
    let combiner_norm: Vec<f64> = total.norm.iter().map(|n| n * inv).collect();
    let jam_leakage: Vec<f64> = total.jam.iter().map(|j| j * inv).collect();

    let p_d = split.user_data_power;
    let q_d = split.jammer_data_power;
    let sinr = (0..num_users)
        .map(|k| {
            let coherent = mean_gain[k].norm_sqr();
            let cross_sum: f64 = (0..num_users).map(|i| cross_power[[k, i]]).sum();
            p_d * coherent / (p_d * cross_sum - p_d * coherent + combiner_norm[k] + q_d * jam_leakage[k])
        })
        .collect();

    Ok(UatfEstimate { mean_gain, cross_power, combiner_norm, jam_leakage, num_samples: cfg.num_blocks, sinr })
}
