//! Legitimate-side link optimization.
//!
//! The users pick their training length `eta` and training-energy fraction
//! `phi` to maximize the jammer-free sum SE; this fixed strategy is what the
//! jammer later exploits. The search is exhaustive over the integer range
//! `eta in [K, T-1]` (no unimodality assumption) with a golden-section
//! refinement of `phi` around the best grid point for each `eta`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::SystemParams;
use crate::se_core::{sum_se_closed_form_or_zero, PowerSplit};

/// The users' chosen operating point and the sum SE it achieves without a
/// jammer.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UserStrategy {
    /// Training-energy fraction, strictly inside (0, 1).
    pub phi_star: f64,
    /// Training length in symbols, in [K, T-1].
    pub eta_star: usize,
    /// Jammer-free sum SE at `(phi_star, eta_star)`, bit/s/Hz.
    pub achieved_se: f64,
}

fn jammer_free_se(params: &SystemParams, phi: f64) -> f64 {
    match PowerSplit::from_fractions(params, phi, 0.0) {
        Ok(split) => sum_se_closed_form_or_zero(params, &split),
        Err(_) => 0.0,
    }
}

/// Maximizes the jammer-free SE over `phi` for a fixed training length,
/// returning `(phi_star, se)`.
fn best_fraction(params: &SystemParams, phi_grid_step: f64, refine_tol: f64) -> (f64, f64) {
    let mut best_phi = phi_grid_step;
    let mut best_se = f64::NEG_INFINITY;
    let mut i = 1usize;
    loop {
        let phi = i as f64 * phi_grid_step;
        if phi >= 1.0 {
            break;
        }
        let se = jammer_free_se(params, phi);
        if se > best_se {
            best_se = se;
            best_phi = phi;
        }
        i += 1;
    }

    // Golden-section refinement of the bracket around the best grid point.
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut a = (best_phi - phi_grid_step).max(0.0);
    let mut b = (best_phi + phi_grid_step).min(1.0);
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = jammer_free_se(params, x1);
    let mut f2 = jammer_free_se(params, x2);
    while (b - a) > refine_tol {
        if f1 > f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = jammer_free_se(params, x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = jammer_free_se(params, x2);
        }
    }
    if f1 > f2 {
        (x1, f1)
    } else {
        (x2, f2)
    }
}

/// Picks `(phi, eta)` maximizing the jammer-free sum SE.
///
/// The jammer budget in `params` is ignored (treated as zero): the users are
/// unaware of the jammer. Ties in `eta` resolve to the shortest training
/// length.
pub fn optimize_users(params: &SystemParams, phi_grid_step: f64, refine_tol: f64) -> Result<UserStrategy> {
    params.validate()?;
    if phi_grid_step.is_nan() || phi_grid_step <= 0.0 || phi_grid_step > 0.1 {
        return Err(Error::InvalidParams(format!(
            "phi_grid_step must lie in (0, 0.1], got {phi_grid_step}"
        )));
    }
    if refine_tol.is_nan() || refine_tol <= 0.0 {
        return Err(Error::InvalidParams(format!("refine_tol must be positive, got {refine_tol}")));
    }
    let jammer_free = params.clone().with_jammer_budget(0.0);
    let mut best: Option<UserStrategy> = None;
    for eta in params.num_users..params.coherence_length {
        let candidate = jammer_free.clone().with_training_length(eta);
        let (phi, se) = best_fraction(&candidate, phi_grid_step, refine_tol);
        if best.as_ref().is_none_or(|b| se > b.achieved_se) {
            best = Some(UserStrategy { phi_star: phi, eta_star: eta, achieved_se: se });
        }
    }
    Ok(best.expect("eta range [K, T-1] is nonempty for valid params"))
}

/// Best training length for a fixed `phi`, jammer-free. Returns
/// `(eta_star, se)`. Used by sweeps that pin the users' energy fraction.
pub fn best_training_length(params: &SystemParams, phi: f64) -> Result<(usize, f64)> {
    params.validate()?;
    if phi.is_nan() || phi <= 0.0 || phi >= 1.0 {
        return Err(Error::InvalidParams(format!("phi must lie strictly inside (0,1), got {phi}")));
    }
    let jammer_free = params.clone().with_jammer_budget(0.0);
    let mut best = (params.num_users, f64::NEG_INFINITY);
    for eta in params.num_users..params.coherence_length {
        let candidate = jammer_free.clone().with_training_length(eta);
        let se = jammer_free_se(&candidate, phi);
        if se > best.1 {
            best = (eta, se);
        }
    }
    Ok(best)
}
