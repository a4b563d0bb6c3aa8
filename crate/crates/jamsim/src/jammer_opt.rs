//! Jammer energy-split optimization.
//!
//! The jammer minimizes the sum SE over the fraction `zeta` of its energy
//! budget spent on the training phase. Written as a function of `zeta`, the
//! per-user SINR denominator
//!
//! ```text
//! alpha(zeta) = (eta*p_t*beta_k + zeta*beta_w*Q*T/eta + 1) * (sum_i beta_i + 1/p_d)
//!             + ((1-zeta)*beta_w*Q*T / ((T-eta)*p_d))
//!               * ((M+2)*zeta*beta_w*Q*T/eta + eta*p_t*beta_k + 1)
//!             + eta*p_t*beta_k^2
//! ```
//!
//! is a concave quadratic in `zeta` (its second derivative is a negative
//! constant whenever `Q > 0`), so each per-user term
//! `log2(1 + 1/f_k(zeta))` with `f_k = alpha/(M*eta*p_t*beta_k^2)` is convex
//! and the problem is a one-dimensional convex minimization on [0, 1].
//!
//! Two solvers are provided: a derivative-free golden-section search, and
//! the closed-form optimum for symmetric fading (all `beta_k` equal), where
//! the stationary point is `(kappa + Q*T) / (2*Q*T)` clamped to [0, 1].

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::SystemParams;
use crate::se_core::{se_map, sum_se_closed_form_or_zero, PowerSplit};

/// Iteration cap for the golden-section search; the bracket shrinks by
/// ~0.618 per step, so 200 iterations far exceed f64 resolution.
const MAX_GOLDEN_ITER: usize = 200;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolutionMethod {
    Numeric,
    ClosedFormSymmetric,
}

/// Result of a jammer energy-split optimization.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct JammerSolution {
    /// Optimal training-energy fraction, in [0, 1].
    pub zeta_star: f64,
    /// Sum SE at `zeta_star`, bit/s/Hz.
    pub min_sum_se: f64,
    pub method: SolutionMethod,
    /// Stationary-point offset of the symmetric closed form; `None` for the
    /// numeric solver.
    pub kappa: Option<f64>,
    pub iterations: usize,
    /// Final bracket width (numeric) or 0 (closed form).
    pub tolerance_achieved: f64,
    /// Set when the jammer budget is zero, making the objective constant in
    /// `zeta`; `zeta_star` is then the convention 1/2.
    pub flat_objective: bool,
}

fn check_interior_fraction(phi: f64) -> Result<()> {
    if phi.is_nan() || phi <= 0.0 || phi >= 1.0 {
        return Err(Error::DegenerateSplit(format!(
            "user fraction must lie strictly inside (0,1), got {phi}"
        )));
    }
    Ok(())
}

fn check_data_phase(params: &SystemParams) -> Result<()> {
    if params.training_length >= params.coherence_length {
        return Err(Error::DegenerateSplit(format!(
            "eta = {} leaves no data phase in T = {}",
            params.training_length, params.coherence_length
        )));
    }
    Ok(())
}

/// Denominator polynomial `alpha(zeta)` for user `k`.
fn alpha(params: &SystemParams, phi: f64, zeta: f64, user_index: usize) -> f64 {
    let m = params.num_antennas as f64;
    let eta = params.training_length as f64;
    let t = params.coherence_length as f64;
    let beta_k = params.user_fading[user_index];
    let beta_w = params.jammer_fading;
    let qt_budget = params.jammer_budget * t;
    let p_t = phi * params.user_budget * t / eta;
    let p_d = (1.0 - phi) * params.user_budget * t / (t - eta);
    let eta_pt = eta * p_t;
    let sum_beta = params.sum_user_fading();

    (eta_pt * beta_k + zeta * beta_w * qt_budget / eta + 1.0) * (sum_beta + 1.0 / p_d)
        + ((1.0 - zeta) * beta_w * qt_budget / ((t - eta) * p_d))
            * ((m + 2.0) * zeta * beta_w * qt_budget / eta + eta_pt * beta_k + 1.0)
        + eta_pt * beta_k * beta_k
}

fn fk_unchecked(params: &SystemParams, phi: f64, zeta: f64, user_index: usize) -> f64 {
    let m = params.num_antennas as f64;
    let eta = params.training_length as f64;
    let t = params.coherence_length as f64;
    let beta_k = params.user_fading[user_index];
    let p_t = phi * params.user_budget * t / eta;
    alpha(params, phi, zeta, user_index) / (m * eta * p_t * beta_k * beta_k)
}

fn objective_unchecked(params: &SystemParams, phi: f64, zeta: f64) -> f64 {
    (0..params.num_users)
        .map(|k| {
            let fk = fk_unchecked(params, phi, zeta, k);
            se_map(1.0 / fk, params.training_length, params.coherence_length)
        })
        .sum()
}

/// Inverse-SINR polynomial `f_k(zeta) = alpha(zeta) / (M*eta*p_t*beta_k^2)`.
pub fn fk_value(params: &SystemParams, phi: f64, zeta: f64, user_index: usize) -> Result<f64> {
    params.validate()?;
    check_data_phase(params)?;
    check_interior_fraction(phi)?;
    if user_index >= params.num_users {
        return Err(Error::InvalidParams(format!("user index {user_index} out of range")));
    }
    Ok(fk_unchecked(params, phi, zeta, user_index))
}

/// Sum SE as a function of the jammer fraction `zeta`, for a fixed user
/// fraction `phi` strictly inside (0, 1).
///
/// Algebraically identical to evaluating [`sum_se_closed_form`] at the split
/// induced by `(phi, zeta)`; kept as an independent formulation so the two
/// can be cross-checked.
///
/// [`sum_se_closed_form`]: crate::se_core::sum_se_closed_form
pub fn objective(params: &SystemParams, phi: f64, zeta: f64) -> Result<f64> {
    params.validate()?;
    check_data_phase(params)?;
    check_interior_fraction(phi)?;
    if !(0.0..=1.0).contains(&zeta) {
        return Err(Error::InvalidParams(format!("zeta must lie in [0,1], got {zeta}")));
    }
    Ok(objective_unchecked(params, phi, zeta))
}

/// Constant second derivative of `f_k` with respect to `zeta`:
/// `-2(M+2)*beta_w^2*Q^2*T^2 / (M*eta^2*p_t*p_d*beta_k^2*(T-eta))`.
///
/// Strictly negative whenever the jammer budget is positive, which is what
/// makes the per-user objective terms convex.
pub fn second_derivative_fk(params: &SystemParams, phi: f64, user_index: usize) -> Result<f64> {
    params.validate()?;
    check_data_phase(params)?;
    check_interior_fraction(phi)?;
    if user_index >= params.num_users {
        return Err(Error::InvalidParams(format!("user index {user_index} out of range")));
    }
    let m = params.num_antennas as f64;
    let eta = params.training_length as f64;
    let t = params.coherence_length as f64;
    let beta_k = params.user_fading[user_index];
    let beta_w = params.jammer_fading;
    let p_t = phi * params.user_budget * t / eta;
    let p_d = (1.0 - phi) * params.user_budget * t / (t - eta);
    let qt2 = params.jammer_budget * params.jammer_budget * t * t;
    Ok(-2.0 * (m + 2.0) * beta_w * beta_w * qt2 / (m * eta * eta * p_t * p_d * beta_k * beta_k * (t - eta)))
}

struct GoldenResult {
    x: f64,
    fx: f64,
    iterations: usize,
    width: f64,
}

/// Golden-section search for the minimum of a unimodal `f` on `[a, b]`.
/// Returns the best evaluated point; the true minimizer lies within the
/// final bracket, so the error is at most the final width.
fn golden_section_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64, tol: f64) -> GoldenResult {
    const INV_PHI: f64 = 0.618_033_988_749_894_9;
    let mut x1 = b - INV_PHI * (b - a);
    let mut x2 = a + INV_PHI * (b - a);
    let mut f1 = f(x1);
    let mut f2 = f(x2);
    let mut iterations = 0;
    while (b - a) > tol && iterations < MAX_GOLDEN_ITER {
        if f1 < f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - INV_PHI * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + INV_PHI * (b - a);
            f2 = f(x2);
        }
        iterations += 1;
    }
    let (x, fx) = if f1 < f2 { (x1, f1) } else { (x2, f2) };
    GoldenResult { x, fx, iterations, width: b - a }
}

/// Finds the SE-minimizing jammer fraction by golden-section search on
/// [0, 1].
///
/// The returned `zeta_star` is within `tol` of the true minimizer. A zero
/// jammer budget makes the objective constant in `zeta`; rather than
/// erroring, the solution is flagged `flat_objective` with the convention
/// `zeta_star = 1/2` so budget sweeps through zero stay total.
pub fn solve_numeric(params: &SystemParams, phi: f64, tol: f64) -> Result<JammerSolution> {
    params.validate()?;
    check_data_phase(params)?;
    check_interior_fraction(phi)?;
    if !tol.is_finite() || tol <= 0.0 {
        return Err(Error::InvalidParams(format!("tolerance must be positive, got {tol}")));
    }
    if params.jammer_budget == 0.0 {
        return Ok(JammerSolution {
            zeta_star: 0.5,
            min_sum_se: objective_unchecked(params, phi, 0.5),
            method: SolutionMethod::Numeric,
            kappa: None,
            iterations: 0,
            tolerance_achieved: 1.0,
            flat_objective: true,
        });
    }
    let result = golden_section_min(|zeta| objective_unchecked(params, phi, zeta), 0.0, 1.0, tol);
    // A boundary optimum leaves the golden-section point a hair inside the
    // interval; snap to the endpoint when it is strictly better.
    let mut best = (result.x, result.fx);
    for endpoint in [0.0, 1.0] {
        let value = objective_unchecked(params, phi, endpoint);
        if value < best.1 {
            best = (endpoint, value);
        }
    }
    Ok(JammerSolution {
        zeta_star: best.0,
        min_sum_se: best.1,
        method: SolutionMethod::Numeric,
        kappa: None,
        iterations: result.iterations,
        tolerance_achieved: result.width,
        flat_objective: false,
    })
}

/// Closed-form optimal jammer fraction for symmetric fading (all `beta_k`
/// equal within a relative 1e-9).
///
/// The unconstrained stationary point is `(kappa + Q*T) / (2*Q*T)` with
///
/// ```text
/// kappa = (K*beta*(1-phi)*P*T + T - eta - eta*(beta*phi*P*T + 1)) / (beta_w*(M+2))
/// ```
///
/// clamped to [0, 1] when it falls outside; the clamp covers both boundary
/// regimes (`Q*T < -kappa` giving 0 and `Q*T < kappa` giving 1) and keeps
/// `zeta_star` continuous in every parameter.
pub fn solve_closed_form_symmetric(params: &SystemParams, phi: f64) -> Result<JammerSolution> {
    params.validate()?;
    check_data_phase(params)?;
    if !(0.0..=1.0).contains(&phi) {
        return Err(Error::InvalidParams(format!("phi must lie in [0,1], got {phi}")));
    }
    let betas = &params.user_fading;
    let min = betas.iter().cloned().fold(f64::INFINITY, f64::min);
    let max = betas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let mean = params.sum_user_fading() / params.num_users as f64;
    if (max - min) > 1e-9 * mean {
        return Err(Error::NonSymmetricFading(format!(
            "user fadings span [{min}, {max}]; the closed form requires equal gains"
        )));
    }

    let m = params.num_antennas as f64;
    let k = params.num_users as f64;
    let eta = params.training_length as f64;
    let t = params.coherence_length as f64;
    let beta = mean;
    let beta_w = params.jammer_fading;
    let pt_budget = params.user_budget * t;
    let kappa =
        (k * beta * (1.0 - phi) * pt_budget + t - eta - eta * (beta * phi * pt_budget + 1.0)) / (beta_w * (m + 2.0));

    let min_se_at = |zeta: f64| {
        let split = PowerSplit::from_fractions(params, phi, zeta)
            .expect("validated params admit any fraction pair");
        sum_se_closed_form_or_zero(params, &split)
    };

    if params.jammer_budget == 0.0 {
        return Ok(JammerSolution {
            zeta_star: 0.5,
            min_sum_se: min_se_at(0.5),
            method: SolutionMethod::ClosedFormSymmetric,
            kappa: Some(kappa),
            iterations: 0,
            tolerance_achieved: 0.0,
            flat_objective: true,
        });
    }

    let qt_budget = params.jammer_budget * t;
    let zeta_star = ((kappa + qt_budget) / (2.0 * qt_budget)).clamp(0.0, 1.0);
    Ok(JammerSolution {
        zeta_star,
        min_sum_se: min_se_at(zeta_star),
        method: SolutionMethod::ClosedFormSymmetric,
        kappa: Some(kappa),
        iterations: 0,
        tolerance_achieved: 0.0,
        flat_objective: false,
    })
}
