//! Cell geometry, large-scale fading, and static link parameters.
//!
//! Users are dropped uniformly over the area of an annulus between the
//! minimum distance `r_min` and the cell radius `r_c`. The large-scale gain
//! of a user at distance `r` is
//!
//! ```text
//! beta = z / (r / r_min)^nu,   z = 10^(sigma_sh * n / 10),   n ~ N(0, 1)
//! ```
//!
//! i.e. log-distance path loss referenced to `r_min` with log-normal
//! shadowing of standard deviation `sigma_sh` dB. The receiver noise
//! variance is normalized to one throughout, so every power in this crate
//! is a dimensionless SNR-like quantity; dB values are converted once at
//! the configuration boundary.
//!
//! All randomness is drawn from an explicitly seeded ChaCha stream, so user
//! drops are reproducible across platforms and independent of threading.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Cell model configuration: geometry, path loss, shadowing, and the seed
/// used for user dropping.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioConfig {
    /// Cell radius in meters.
    pub cell_radius_m: f64,
    /// Closest allowed user distance (also the path-loss reference distance).
    pub min_distance_m: f64,
    /// Path-loss decay exponent.
    pub decay_exponent: f64,
    /// Shadow-fading standard deviation in dB.
    pub shadow_std_db: f64,
    /// Number of users dropped in the cell.
    pub num_users: usize,
    /// Coherence interval length in symbols.
    pub coherence_length: usize,
    /// Seed for the user-drop RNG.
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 1000.0,
            min_distance_m: 200.0,
            decay_exponent: 3.8,
            shadow_std_db: 8.0,
            num_users: 10,
            coherence_length: 200,
            seed: 1,
        }
    }
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        for (name, value) in [
            ("cell_radius_m", self.cell_radius_m),
            ("min_distance_m", self.min_distance_m),
            ("decay_exponent", self.decay_exponent),
            ("shadow_std_db", self.shadow_std_db),
        ] {
            if !value.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must be finite, got {value}")));
            }
        }
        if self.min_distance_m <= 0.0 || self.min_distance_m >= self.cell_radius_m {
            return Err(Error::InvalidParams(format!(
                "need 0 < min_distance_m < cell_radius_m, got {} and {}",
                self.min_distance_m, self.cell_radius_m
            )));
        }
        if self.decay_exponent <= 2.0 {
            return Err(Error::InvalidParams(format!(
                "decay_exponent must exceed 2, got {}",
                self.decay_exponent
            )));
        }
        if self.shadow_std_db < 0.0 {
            return Err(Error::InvalidParams(format!(
                "shadow_std_db must be nonnegative, got {}",
                self.shadow_std_db
            )));
        }
        if self.num_users == 0 {
            return Err(Error::InvalidParams("num_users must be at least 1".into()));
        }
        if self.coherence_length < self.num_users {
            return Err(Error::InvalidParams(format!(
                "coherence_length {} shorter than num_users {}",
                self.coherence_length, self.num_users
            )));
        }
        Ok(())
    }
}

/// Static link parameters of one scenario instance.
///
/// `user_fading[k]` is the large-scale gain between user `k` and the base
/// station; `jammer_fading` the same for the jammer. Budgets are per-symbol
/// average powers (linear, noise-normalized) that the training/data energy
/// split of [`crate::se_core::PowerSplit`] distributes over a coherence
/// interval.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SystemParams {
    /// Number of base-station antennas `M`.
    pub num_antennas: usize,
    /// Number of single-antenna users `K`.
    pub num_users: usize,
    /// Coherence interval length `T` in symbols.
    pub coherence_length: usize,
    /// Training phase length `eta` in symbols, `K <= eta <= T`.
    pub training_length: usize,
    /// Large-scale gains `beta_k`, one per user, strictly positive.
    pub user_fading: Vec<f64>,
    /// Large-scale gain `beta_w` of the jammer, strictly positive.
    pub jammer_fading: f64,
    /// Per-user power budget (linear).
    pub user_budget: f64,
    /// Jammer power budget (linear).
    pub jammer_budget: f64,
}

impl SystemParams {
    pub fn validate(&self) -> Result<()> {
        if self.num_antennas == 0 {
            return Err(Error::InvalidParams("num_antennas must be at least 1".into()));
        }
        if self.num_users == 0 || self.user_fading.len() != self.num_users {
            return Err(Error::InvalidParams(format!(
                "user_fading has {} entries for {} users",
                self.user_fading.len(),
                self.num_users
            )));
        }
        if !(self.num_users <= self.training_length && self.training_length <= self.coherence_length)
        {
            return Err(Error::InvalidParams(format!(
                "need K <= eta <= T, got K={} eta={} T={}",
                self.num_users, self.training_length, self.coherence_length
            )));
        }
        if self.user_fading.iter().any(|b| !b.is_finite() || *b <= 0.0) {
            return Err(Error::InvalidParams("all user fadings must be positive and finite".into()));
        }
        if !self.jammer_fading.is_finite() || self.jammer_fading <= 0.0 {
            return Err(Error::InvalidParams("jammer fading must be positive and finite".into()));
        }
        let budgets_valid = self.user_budget.is_finite()
            && self.jammer_budget.is_finite()
            && self.user_budget >= 0.0
            && self.jammer_budget >= 0.0;
        if !budgets_valid {
            return Err(Error::InvalidParams("budgets must be nonnegative and finite".into()));
        }
        Ok(())
    }

    /// Sum of large-scale user gains, the interference mass seen by every combiner.
    pub fn sum_user_fading(&self) -> f64 {
        self.user_fading.iter().sum()
    }

    pub fn with_training_length(mut self, training_length: usize) -> Self {
        self.training_length = training_length;
        self
    }

    pub fn with_jammer_budget(mut self, jammer_budget: f64) -> Self {
        self.jammer_budget = jammer_budget;
        self
    }
}

/// Converts a dB value to linear scale.
pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}

/// Derives an independent child seed from a base seed and an index
/// (splitmix64 finalizer). Used to give each user drop in a sweep its own
/// reproducible stream.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Draws the large-scale gains of `cfg.num_users` users dropped uniformly
/// over the annulus area between `min_distance_m` and `cell_radius_m`.
///
/// Deterministic for a fixed `cfg.seed`. Every returned gain is strictly
/// positive and finite.
pub fn drop_users(cfg: &ScenarioConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let r_min_sq = cfg.min_distance_m * cfg.min_distance_m;
    let r_max_sq = cfg.cell_radius_m * cfg.cell_radius_m;
    let mut gains = Vec::with_capacity(cfg.num_users);
    for _ in 0..cfg.num_users {
        // Uniform over area: r = sqrt(u*(r_c^2 - r_min^2) + r_min^2).
        let u: f64 = rng.gen();
        let r = (u * (r_max_sq - r_min_sq) + r_min_sq).sqrt();
        let n: f64 = rng.sample(StandardNormal);
        let shadow = db_to_linear(cfg.shadow_std_db * n);
        gains.push(shadow / (r / cfg.min_distance_m).powf(cfg.decay_exponent));
    }
    Ok(gains)
}
