//! Closed-form spectral-efficiency expressions.
//!
//! Everything here is deterministic arithmetic on [`SystemParams`] and a
//! [`PowerSplit`]:
//!
//! * the per-phase power parameterization of the user/jammer energy budgets,
//! * the channel-estimation variances of the linear MMSE estimator under a
//!   training-phase jammer,
//! * the per-user effective SINR and sum spectral efficiency under maximum
//!   ratio combining, with a term-by-term breakdown of the denominator,
//! * the large-antenna saturation limit.
//!
//! Powers are linear and noise-normalized; the SE mapping is
//! `C(gamma) = (1 - eta/T) * log2(1 + gamma)` in bit/s/Hz.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scenario::SystemParams;

/// Training/data energy split for both sides of the link.
///
/// The user devotes the fraction `phi` of its per-block energy budget to
/// training, the jammer the fraction `zeta`; the resulting per-phase powers
/// are stored alongside. Budget closure
/// `eta*p_t + (T-eta)*p_d = P*T` (and likewise for the jammer) holds by
/// construction.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PowerSplit {
    /// User training-energy fraction `phi` in [0, 1].
    pub user_fraction: f64,
    /// Jammer training-energy fraction `zeta` in [0, 1].
    pub jammer_fraction: f64,
    /// User training power `p_t = phi*P*T/eta`.
    pub user_training_power: f64,
    /// User data power `p_d = (1-phi)*P*T/(T-eta)`.
    pub user_data_power: f64,
    /// Jammer training power `q_t = zeta*Q*T/eta`.
    pub jammer_training_power: f64,
    /// Jammer data power `q_d = (1-zeta)*Q*T/(T-eta)`.
    pub jammer_data_power: f64,
}

impl PowerSplit {
    /// Builds the split induced by energy fractions `(phi, zeta)`.
    ///
    /// Requires `eta < T` so that a data phase exists; fractions must lie in
    /// [0, 1]. A fraction of exactly 1 yields a zero data power, which
    /// [`sum_se_closed_form`] rejects as degenerate.
    pub fn from_fractions(params: &SystemParams, user_fraction: f64, jammer_fraction: f64) -> Result<Self> {
        params.validate()?;
        for (name, f) in [("phi", user_fraction), ("zeta", jammer_fraction)] {
            if !(0.0..=1.0).contains(&f) || !f.is_finite() {
                return Err(Error::InvalidParams(format!("{name} must lie in [0,1], got {f}")));
            }
        }
        let eta = params.training_length as f64;
        let t = params.coherence_length as f64;
        if params.training_length >= params.coherence_length {
            return Err(Error::DegenerateSplit(format!(
                "eta = {} leaves no data phase in T = {}",
                params.training_length, params.coherence_length
            )));
        }
        Ok(Self {
            user_fraction,
            jammer_fraction,
            user_training_power: user_fraction * params.user_budget * t / eta,
            user_data_power: (1.0 - user_fraction) * params.user_budget * t / (t - eta),
            jammer_training_power: jammer_fraction * params.jammer_budget * t / eta,
            jammer_data_power: (1.0 - jammer_fraction) * params.jammer_budget * t / (t - eta),
        })
    }
}

/// One user's SINR decomposition: the signal term and the three denominator
/// groups of the closed form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct TermBreakdown {
    /// Coherent signal term `M*eta*p_t*beta_k^2` (the SINR numerator).
    pub signal: f64,
    /// Multi-user interference, noise, and the training-contamination
    /// cross-term: `(eta*p_t*beta_k + q_t*beta_w + 1) * (sum_i beta_i + 1/p_d)`.
    pub interference_plus_noise: f64,
    /// Channel-estimation self-term `eta*p_t*beta_k^2`.
    pub estimation_penalty: f64,
    /// Data-phase jamming amplified by training contamination:
    /// `(q_d/p_d) * ((M+2)*q_t*beta_w + eta*p_t*beta_k + 1) * beta_w`.
    pub jamming: f64,
}

impl TermBreakdown {
    /// Sum of the three denominator groups.
    pub fn denominator(&self) -> f64 {
        self.interference_plus_noise + self.estimation_penalty + self.jamming
    }

    /// SINR reconstructed from the breakdown.
    pub fn sinr(&self) -> f64 {
        self.signal / self.denominator()
    }
}

/// Per-user SINR and spectral efficiency, plus the denominator breakdown.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SinrReport {
    pub per_user_sinr: Vec<f64>,
    /// `(1 - eta/T) * log2(1 + sinr_k)` per user, bit/s/Hz.
    pub per_user_se: Vec<f64>,
    /// Sum of `per_user_se`, bit/s/Hz.
    pub sum_se: f64,
    pub term_breakdown: Vec<TermBreakdown>,
}

/// The SE mapping `C(gamma) = (1 - eta/T) * log2(1 + gamma)`.
pub fn se_map(gamma: f64, training_length: usize, coherence_length: usize) -> f64 {
    let eta = training_length as f64;
    let t = coherence_length as f64;
    (1.0 - eta / t) * (1.0 + gamma).log2()
}

/// Variances of the MMSE channel estimate and of the estimation error for
/// user `k`, `(sigma_ghat^2, sigma_eps^2)`.
///
/// They satisfy `sigma_ghat^2 + sigma_eps^2 = beta_k` up to rounding. With
/// zero training power the estimate carries no information:
/// `(0, beta_k)`.
pub fn estimation_variances(params: &SystemParams, split: &PowerSplit, user_index: usize) -> (f64, f64) {
    let beta_k = params.user_fading[user_index];
    let eta_pt = params.training_length as f64 * split.user_training_power;
    let jam = split.jammer_training_power * params.jammer_fading;
    let den = eta_pt * beta_k + jam + 1.0;
    (eta_pt * beta_k * beta_k / den, (1.0 + jam) * beta_k / den)
}

/// Bare per-phase powers, detached from the fraction parameterization.
/// Lets tests vary one power while holding the others fixed.
#[derive(Debug, Clone, Copy)]
pub(crate) struct PhasePowers {
    pub p_t: f64,
    pub p_d: f64,
    pub q_t: f64,
    pub q_d: f64,
}

impl PowerSplit {
    pub(crate) fn phase_powers(&self) -> PhasePowers {
        PhasePowers {
            p_t: self.user_training_power,
            p_d: self.user_data_power,
            q_t: self.jammer_training_power,
            q_d: self.jammer_data_power,
        }
    }
}

/// Raw per-user SINR terms from phase powers. Shared by the public closed
/// form and by property tests.
pub(crate) fn sinr_terms(
    num_antennas: usize,
    training_length: usize,
    beta_k: f64,
    sum_beta: f64,
    beta_w: f64,
    powers: PhasePowers,
) -> TermBreakdown {
    let m = num_antennas as f64;
    let eta_pt = training_length as f64 * powers.p_t;
    TermBreakdown {
        signal: m * eta_pt * beta_k * beta_k,
        interference_plus_noise: (eta_pt * beta_k + powers.q_t * beta_w + 1.0)
            * (sum_beta + 1.0 / powers.p_d),
        estimation_penalty: eta_pt * beta_k * beta_k,
        jamming: (powers.q_d / powers.p_d)
            * ((m + 2.0) * powers.q_t * beta_w + eta_pt * beta_k + 1.0)
            * beta_w,
    }
}

/// Closed-form per-user SINR and sum SE under maximum ratio combining.
///
/// Fails with [`Error::DegenerateSplit`] when the split leaves no data
/// power (`phi = 1`); use [`sum_se_closed_form_or_zero`] where a total
/// function is more convenient.
pub fn sum_se_closed_form(params: &SystemParams, split: &PowerSplit) -> Result<SinrReport> {
    params.validate()?;
    if split.user_data_power <= 0.0 {
        return Err(Error::DegenerateSplit(format!(
            "data power p_d = {} (phi = {})",
            split.user_data_power, split.user_fraction
        )));
    }
    let sum_beta = params.sum_user_fading();
    let mut report = SinrReport {
        per_user_sinr: Vec::with_capacity(params.num_users),
        per_user_se: Vec::with_capacity(params.num_users),
        sum_se: 0.0,
        term_breakdown: Vec::with_capacity(params.num_users),
    };
    for &beta_k in &params.user_fading {
        let terms = sinr_terms(
            params.num_antennas,
            params.training_length,
            beta_k,
            sum_beta,
            params.jammer_fading,
            split.phase_powers(),
        );
        let sinr = terms.sinr();
        let se = se_map(sinr, params.training_length, params.coherence_length);
        report.per_user_sinr.push(sinr);
        report.per_user_se.push(se);
        report.sum_se += se;
        report.term_breakdown.push(terms);
    }
    Ok(report)
}

/// Like [`sum_se_closed_form`] but total: the degenerate zero-data-power
/// split (and any other rejected input) maps to a sum SE of 0.
pub fn sum_se_closed_form_or_zero(params: &SystemParams, split: &PowerSplit) -> f64 {
    sum_se_closed_form(params, split).map_or(0.0, |report| report.sum_se)
}

/// Large-antenna limit of the sum SE for a fixed split.
///
/// Requires both jammer phase powers to be positive; otherwise the SINR
/// grows without bound in `M` and no finite limit exists.
pub fn sum_se_asymptotic(params: &SystemParams, split: &PowerSplit) -> Result<f64> {
    params.validate()?;
    if split.jammer_training_power <= 0.0 || split.jammer_data_power <= 0.0 {
        return Err(Error::UnboundedLimit(format!(
            "limit requires q_t > 0 and q_d > 0, got q_t = {}, q_d = {}",
            split.jammer_training_power, split.jammer_data_power
        )));
    }
    if split.user_data_power <= 0.0 {
        return Err(Error::DegenerateSplit("data power is zero".into()));
    }
    let eta = params.training_length as f64;
    let ratio = eta * (split.user_training_power / split.jammer_training_power)
        * (split.user_data_power / split.jammer_data_power);
    Ok(params
        .user_fading
        .iter()
        .map(|beta_k| {
            let gamma = ratio * (beta_k / params.jammer_fading).powi(2);
            se_map(gamma, params.training_length, params.coherence_length)
        })
        .sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn params_k1(m: usize, eta: usize) -> SystemParams {
        SystemParams {
            num_antennas: m,
            num_users: 1,
            coherence_length: 200,
            training_length: eta,
            user_fading: vec![1.0],
            jammer_fading: 1.0,
            user_budget: 10.0,
            jammer_budget: 10.0,
        }
    }

    /// Split with prescribed phase powers, built by inverting the fraction
    /// parameterization so budget closure still holds exactly.
    fn split_from_powers(params: &mut SystemParams, p_t: f64, p_d: f64, q_t: f64, q_d: f64) -> PowerSplit {
        let eta = params.training_length as f64;
        let t = params.coherence_length as f64;
        params.user_budget = (eta * p_t + (t - eta) * p_d) / t;
        params.jammer_budget = (eta * q_t + (t - eta) * q_d) / t;
        let phi = if params.user_budget > 0.0 { eta * p_t / (params.user_budget * t) } else { 0.0 };
        let zeta = if params.jammer_budget > 0.0 { eta * q_t / (params.jammer_budget * t) } else { 0.0 };
        PowerSplit {
            user_fraction: phi,
            jammer_fraction: zeta,
            user_training_power: p_t,
            user_data_power: p_d,
            jammer_training_power: q_t,
            jammer_data_power: q_d,
        }
    }

    #[test]
    fn se_map_reference_points() {
        assert_eq!(se_map(0.0, 10, 200), 0.0);
        assert!((se_map(1.0, 100, 200) - 0.5).abs() < 1e-15);
        // (1 - 10/200) * log2(11)
        assert!((se_map(10.0, 10, 200) - 3.2864600377054324).abs() < 1e-12);
    }

    #[test]
    fn estimation_variances_hand_case() {
        // eta*p_t = 10, beta = 1, no jamming: (10/11, 1/11).
        let mut params = params_k1(100, 1);
        let split = split_from_powers(&mut params, 10.0, 10.0, 0.0, 0.0);
        let (g, e) = estimation_variances(&params, &split, 0);
        assert!((g - 10.0 / 11.0).abs() < 1e-15, "sigma_ghat^2 = {g}");
        assert!((e - 1.0 / 11.0).abs() < 1e-15, "sigma_eps^2 = {e}");
    }

    #[test]
    fn estimation_variances_no_training_energy() {
        let mut params = params_k1(100, 1);
        let split = split_from_powers(&mut params, 0.0, 10.0, 1.0, 1.0);
        let (g, e) = estimation_variances(&params, &split, 0);
        assert_eq!(g, 0.0);
        assert!((e - params.user_fading[0]).abs() < 1e-15);
    }

    #[test]
    fn estimation_variance_vanishes_under_strong_training_jamming() {
        let mut params = params_k1(100, 1);
        for q_t in [1e3, 1e6, 1e9, 1e12] {
            let split = split_from_powers(&mut params, 10.0, 10.0, q_t, 1.0);
            let (g, _) = estimation_variances(&params, &split, 0);
            assert!(g < 10.0 / q_t * 10.0, "q_t = {q_t}: sigma_ghat^2 = {g}");
        }
    }

    #[test]
    fn closed_form_worked_example() {
        // M=100, K=1, beta=beta_w=1, eta=1, T=200, p_t=p_d=q_t=q_d=10:
        // denominator 21*1.1 + 10 + (1020+11) = 1064.1.
        let mut params = params_k1(100, 1);
        let split = split_from_powers(&mut params, 10.0, 10.0, 10.0, 10.0);
        let report = sum_se_closed_form(&params, &split).unwrap();
        let sinr = report.per_user_sinr[0];
        assert!(
            (sinr - 0.9397613006296401).abs() / 0.9397613 < 1e-12,
            "sinr = {sinr}"
        );
        assert!(
            (report.sum_se - 0.9510997353217243).abs() < 1e-12,
            "sum_se = {}",
            report.sum_se
        );
        let d = &report.term_breakdown[0];
        assert!((d.denominator() - 1064.1).abs() < 1e-9);
    }

    #[test]
    fn closed_form_without_jammer() {
        // Same setup with Q = 0: denominator 11*1.1 + 10 = 22.1.
        let mut params = params_k1(100, 1);
        let split = split_from_powers(&mut params, 10.0, 10.0, 0.0, 0.0);
        let report = sum_se_closed_form(&params, &split).unwrap();
        let sinr = report.per_user_sinr[0];
        assert!(
            (sinr - 45.248868778280543).abs() / 45.248868778280543 < 1e-12,
            "sinr = {sinr}"
        );
    }

    #[test]
    fn sinr_doubles_with_antennas_when_data_jamming_absent() {
        // With q_d = 0 the denominator is free of M, so the SINR is linear in M.
        let mut params = params_k1(100, 1);
        let split = split_from_powers(&mut params, 10.0, 10.0, 10.0, 0.0);
        let r1 = sum_se_closed_form(&params, &split).unwrap();
        let mut params2 = params.clone();
        params2.num_antennas = 200;
        let r2 = sum_se_closed_form(&params2, &split).unwrap();
        let ratio = r2.per_user_sinr[0] / r1.per_user_sinr[0];
        assert!((ratio - 2.0).abs() < 1e-12, "ratio = {ratio}");
    }

    #[test]
    fn degenerate_split_is_rejected_and_wrapper_returns_zero() {
        let params = params_k1(100, 10);
        let split = PowerSplit::from_fractions(&params, 1.0, 0.5).unwrap();
        assert_eq!(split.user_data_power, 0.0);
        assert!(matches!(
            sum_se_closed_form(&params, &split),
            Err(Error::DegenerateSplit(_))
        ));
        assert_eq!(sum_se_closed_form_or_zero(&params, &split), 0.0);
    }

    #[test]
    fn full_training_length_is_rejected_at_split_construction() {
        let mut params = params_k1(100, 200);
        params.training_length = 200; // eta = T
        assert!(matches!(
            PowerSplit::from_fractions(&params, 0.5, 0.5),
            Err(Error::DegenerateSplit(_))
        ));
    }

    #[test]
    fn asymptotic_worked_example() {
        // eta=10, p_t=q_t, p_d=q_d, beta=beta_w: C(10) = 0.95*log2(11).
        let mut params = params_k1(100, 10);
        let split = split_from_powers(&mut params, 7.0, 3.0, 7.0, 3.0);
        let limit = sum_se_asymptotic(&params, &split).unwrap();
        assert!((limit - 3.2864600377054324).abs() < 1e-12, "limit = {limit}");
    }

    #[test]
    fn asymptotic_rejects_zero_jamming_power() {
        let mut params = params_k1(100, 10);
        let split = split_from_powers(&mut params, 7.0, 3.0, 0.0, 3.0);
        assert!(matches!(
            sum_se_asymptotic(&params, &split),
            Err(Error::UnboundedLimit(_))
        ));
        let split = split_from_powers(&mut params, 7.0, 3.0, 3.0, 0.0);
        assert!(matches!(
            sum_se_asymptotic(&params, &split),
            Err(Error::UnboundedLimit(_))
        ));
    }

    #[test]
    fn asymptotic_vanishes_for_weak_users() {
        let mut params = params_k1(100, 10);
        params.user_fading = vec![1e-9];
        let split = split_from_powers(&mut params, 7.0, 3.0, 7.0, 3.0);
        let limit = sum_se_asymptotic(&params, &split).unwrap();
        assert!(limit < 1e-12, "limit = {limit}");
    }

    #[test]
    fn closed_form_approaches_asymptote_at_huge_antenna_count() {
        let mut params = SystemParams {
            num_antennas: 100_000_000,
            num_users: 3,
            coherence_length: 200,
            training_length: 5,
            user_fading: vec![1.0, 0.3, 0.08],
            jammer_fading: 0.7,
            user_budget: 0.0,
            jammer_budget: 0.0,
        };
        let split = split_from_powers(&mut params, 8.0, 4.0, 5.0, 2.0);
        let finite = sum_se_closed_form(&params, &split).unwrap().sum_se;
        let limit = sum_se_asymptotic(&params, &split).unwrap();
        assert!(finite <= limit);
        assert!((limit - finite) / limit < 1e-3, "finite {finite} vs limit {limit}");
    }

    #[test]
    fn budget_closure_holds() {
        let params = SystemParams {
            num_antennas: 64,
            num_users: 4,
            coherence_length: 200,
            training_length: 8,
            user_fading: vec![1.0, 0.4, 0.2, 0.1],
            jammer_fading: 0.9,
            user_budget: 3.7,
            jammer_budget: 11.3,
        };
        for (phi, zeta) in [(0.0, 0.0), (0.25, 0.75), (0.5, 0.5), (1.0, 1.0), (0.123, 0.987)] {
            let s = PowerSplit::from_fractions(&params, phi, zeta).unwrap();
            let eta = params.training_length as f64;
            let t = params.coherence_length as f64;
            let user = eta * s.user_training_power + (t - eta) * s.user_data_power;
            let jam = eta * s.jammer_training_power + (t - eta) * s.jammer_data_power;
            assert!((user - params.user_budget * t).abs() / (params.user_budget * t) < 1e-14);
            assert!((jam - params.jammer_budget * t).abs() / (params.jammer_budget * t) < 1e-14);
        }
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_params_split() -> impl Strategy<Value = (SystemParams, PowerSplit)> {
            (
                1usize..=256,
                1usize..=6,
                prop::collection::vec(0.01f64..2.0, 6),
                0.01f64..2.0,
                0.1f64..30.0,
                0.0f64..30.0,
                0.05f64..0.95,
                0.0f64..=1.0,
            )
                .prop_flat_map(|(m, k, betas, beta_w, p, q, phi, zeta)| {
                    (Just((m, k, betas, beta_w, p, q, phi, zeta)), k..=16usize)
                })
                .prop_map(|((m, k, betas, beta_w, p, q, phi, zeta), eta)| {
                    let params = SystemParams {
                        num_antennas: m,
                        num_users: k,
                        coherence_length: 200,
                        training_length: eta,
                        user_fading: betas[..k].to_vec(),
                        jammer_fading: beta_w,
                        user_budget: p,
                        jammer_budget: q,
                    };
                    let split = PowerSplit::from_fractions(&params, phi, zeta).unwrap();
                    (params, split)
                })
        }

        proptest! {
            #[test]
            fn variance_closure((params, split) in arb_params_split()) {
                for k in 0..params.num_users {
                    let (g, e) = estimation_variances(&params, &split, k);
                    let beta = params.user_fading[k];
                    prop_assert!(g >= 0.0 && e >= 0.0);
                    prop_assert!(((g + e) - beta).abs() / beta < 1e-12);
                }
            }

            #[test]
            fn breakdown_reconstructs_sinr((params, split) in arb_params_split()) {
                let report = sum_se_closed_form(&params, &split).unwrap();
                for k in 0..params.num_users {
                    let d = &report.term_breakdown[k];
                    prop_assert!(d.signal >= 0.0);
                    prop_assert!(d.interference_plus_noise >= 0.0);
                    prop_assert!(d.estimation_penalty >= 0.0);
                    prop_assert!(d.jamming >= 0.0);
                    let rebuilt = d.sinr();
                    let sinr = report.per_user_sinr[k];
                    prop_assert!((rebuilt - sinr).abs() <= 1e-12 * sinr.max(1e-300));
                    let se = se_map(sinr, params.training_length, params.coherence_length);
                    prop_assert!((se - report.per_user_se[k]).abs() <= 1e-12 * se.max(1e-300));
                }
                let total: f64 = report.per_user_se.iter().sum();
                prop_assert!((total - report.sum_se).abs() <= 1e-12 * total.max(1e-300));
            }

            #[test]
            fn budget_closure_random((params, split) in arb_params_split()) {
                let eta = params.training_length as f64;
                let t = params.coherence_length as f64;
                let user = eta * split.user_training_power + (t - eta) * split.user_data_power;
                let jam = eta * split.jammer_training_power + (t - eta) * split.jammer_data_power;
                prop_assert!((user - params.user_budget * t).abs() <= 1e-14 * (params.user_budget * t).max(1.0));
                prop_assert!((jam - params.jammer_budget * t).abs() <= 1e-14 * (params.jammer_budget * t).max(1.0));
            }

            #[test]
            fn sinr_decreasing_in_each_jamming_power((params, split) in arb_params_split()) {
                let sum_beta = params.sum_user_fading();
                let powers = split.phase_powers();
                for k in 0..params.num_users {
                    let at = |powers: PhasePowers| {
                        sinr_terms(
                            params.num_antennas, params.training_length,
                            params.user_fading[k], sum_beta, params.jammer_fading,
                            powers,
                        ).sinr()
                    };
                    let base = at(powers);
                    let more_qt = at(PhasePowers { q_t: powers.q_t + 1.0, ..powers });
                    let more_qd = at(PhasePowers { q_d: powers.q_d + 1.0, ..powers });
                    prop_assert!(more_qt < base);
                    prop_assert!(more_qd < base);
                }
            }

            #[test]
            fn se_increases_with_antennas_and_saturates((params, split) in arb_params_split()) {
                prop_assume!(split.jammer_training_power > 0.0 && split.jammer_data_power > 0.0);
                let limit = sum_se_asymptotic(&params, &split).unwrap();
                let mut prev = 0.0f64;
                for m in [params.num_antennas, params.num_antennas * 4, params.num_antennas * 16] {
                    let mut p = params.clone();
                    p.num_antennas = m;
                    let se = sum_se_closed_form(&p, &split).unwrap().sum_se;
                    prop_assert!(se >= prev - 1e-12 * prev.abs());
                    prop_assert!(se <= limit * (1.0 + 1e-12));
                    prev = se;
                }
            }
        }
    }
}
