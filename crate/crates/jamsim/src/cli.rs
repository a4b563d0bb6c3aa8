//! Experiment harness: seeded sweeps over jammer budget, antenna count, or
//! user energy fraction, emitting CSV; plus the Monte Carlo validation
//! report.
//!
//! A sweep averages the closed-form sum SE over `num_drops` random user
//! drops. For every drop the users first pick their jammer-free operating
//! point `(phi*, eta*)`; the jammer then either optimizes its energy
//! fraction (`optimal`) or spreads its budget evenly over the block
//! (`equal`, `zeta = eta/T`). Drops are derived from the master seed with a
//! per-drop counter, work may be spread over threads, and aggregation
//! always runs in drop order, so a run's CSV is byte-identical no matter
//! how it was scheduled; `sequential` merely pins execution to one thread.

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::jammer_opt::solve_numeric;
use crate::montecarlo::{estimate_uatf_sinr_with, McConfig};
use crate::scenario::{db_to_linear, derive_seed, drop_users, ScenarioConfig, SystemParams};
use crate::se_core::{sum_se_closed_form, PowerSplit, SinrReport};
use crate::user_opt::{best_training_length, optimize_users};

/// Relative deviation between Monte Carlo and closed-form SINR above which
/// validation fails.
pub const VALIDATION_THRESHOLD: f64 = 0.02;
/// Below this many blocks the validation report carries no verdict.
pub const MIN_BLOCKS_FOR_VERDICT: usize = 10_000;

const ZETA_SOLVER_TOL: f64 = 1e-9;
const PHI_GRID_STEP: f64 = 0.05;
const PHI_REFINE_TOL: f64 = 1e-7;

pub const CSV_HEADER: &str = "sweep_value,jamming_mode,zeta,phi,eta,sum_se_bits_per_hz,per_user_sinr_min,per_user_sinr_max,num_drops,seed";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepKind {
    /// Sum SE versus the jammer power budget (dB grid).
    SweepJammerBudget,
    /// Sum SE versus the number of BS antennas.
    SweepAntennas,
    /// Optimal jammer fraction versus antennas, one curve per user fraction.
    ZetaVsAntennas,
    /// Monte Carlo validation of the closed-form SINR.
    Validate,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum JammingMode {
    /// Energy fraction chosen by the convex solver.
    Optimal,
    /// Constant jamming power across the block, `zeta = eta/T`.
    Equal,
}

impl JammingMode {
    pub fn label(self) -> &'static str {
        match self {
            JammingMode::Optimal => "optimal",
            JammingMode::Equal => "equal",
        }
    }
}

/// Flat sweep/validation configuration; mirrors the JSON config file.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepConfig {
    // Cell model.
    pub cell_radius_m: f64,
    pub min_distance_m: f64,
    pub decay_exponent: f64,
    pub shadow_std_db: f64,
    pub num_users: usize,
    pub coherence_length: usize,
    /// Master seed; drop `d` uses the derived child seed `d`.
    pub seed: u64,

    // Experiment.
    pub kind: SweepKind,
    /// Sweep grid: dB values for budget sweeps, antenna counts otherwise.
    pub grid: Vec<f64>,
    pub jamming_modes: Vec<JammingMode>,
    pub num_drops: usize,
    pub output_path: Option<PathBuf>,
    /// Re-draw the user drops at every grid point instead of holding them
    /// fixed across the sweep.
    pub redraw_per_point: bool,
    /// Single-threaded execution (results are identical either way).
    pub sequential: bool,

    // Link overrides.
    pub num_antennas: usize,
    pub user_budget_db: f64,
    pub jammer_budget_db: f64,
    pub jammer_fading: f64,
    /// User energy fractions, one curve each, for `zeta_vs_antennas`.
    pub phi_values: Vec<f64>,

    // Validation-only knobs.
    pub num_blocks: usize,
    pub phi: f64,
    pub zeta: f64,
    /// Training length for validation; 0 means `num_users`.
    pub training_length: usize,
    /// Explicit large-scale gains; when set they replace the random drop
    /// (and define the user count).
    pub user_fading: Option<Vec<f64>>,
}

impl Default for SweepConfig {
    fn default() -> Self {
        Self {
            cell_radius_m: 1000.0,
            min_distance_m: 200.0,
            decay_exponent: 3.8,
            shadow_std_db: 8.0,
            num_users: 10,
            coherence_length: 200,
            seed: 1,
            kind: SweepKind::Validate,
            grid: Vec::new(),
            jamming_modes: vec![JammingMode::Optimal, JammingMode::Equal],
            num_drops: 100,
            output_path: None,
            redraw_per_point: false,
            sequential: false,
            num_antennas: 100,
            user_budget_db: 10.0,
            jammer_budget_db: 10.0,
            jammer_fading: 1.0,
            phi_values: vec![0.1, 0.3, 0.5, 0.7, 0.9],
            num_blocks: 100_000,
            phi: 0.5,
            zeta: 0.5,
            training_length: 0,
            user_fading: None,
        }
    }
}

impl SweepConfig {
    /// Sum SE versus jammer budget at M = 100 (budget grid -10..20 dB).
    pub fn preset_fig1() -> Self {
        Self {
            kind: SweepKind::SweepJammerBudget,
            grid: (-5..=10).map(|i| 2.0 * i as f64).collect(),
            output_path: Some(PathBuf::from("fig1.csv")),
            ..Self::default()
        }
    }

    /// Sum SE versus antenna count at Q = 10 dB.
    pub fn preset_fig2() -> Self {
        Self {
            kind: SweepKind::SweepAntennas,
            grid: vec![20.0, 50.0, 100.0, 150.0, 200.0, 300.0, 400.0, 500.0],
            output_path: Some(PathBuf::from("fig2.csv")),
            ..Self::default()
        }
    }

    /// Optimal jammer fraction versus antenna count, one curve per phi.
    pub fn preset_fig3() -> Self {
        Self {
            kind: SweepKind::ZetaVsAntennas,
            grid: vec![10.0, 20.0, 50.0, 100.0, 200.0, 500.0, 1000.0, 2000.0, 5000.0, 10000.0],
            jamming_modes: vec![JammingMode::Optimal],
            output_path: Some(PathBuf::from("fig3.csv")),
            ..Self::default()
        }
    }

    /// Single-user validation scenario: M = 20, beta = beta_w = 1, eta = 2,
    /// phi = zeta = 1/2, both budgets 10 dB.
    pub fn validation_default() -> Self {
        Self {
            kind: SweepKind::Validate,
            num_users: 1,
            num_antennas: 20,
            training_length: 2,
            user_fading: Some(vec![1.0]),
            ..Self::default()
        }
    }

    pub fn from_json_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        let cfg: Self = serde_json::from_str(&text)?;
        Ok(cfg)
    }

    fn scenario(&self, seed: u64) -> ScenarioConfig {
        ScenarioConfig {
            cell_radius_m: self.cell_radius_m,
            min_distance_m: self.min_distance_m,
            decay_exponent: self.decay_exponent,
            shadow_std_db: self.shadow_std_db,
            num_users: self.num_users,
            coherence_length: self.coherence_length,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario(self.seed).validate()?;
        if self.kind == SweepKind::Validate {
            if self.num_blocks == 0 {
                return Err(Error::InvalidParams("num_blocks must be at least 1".into()));
            }
            return Ok(());
        }
        if self.grid.is_empty() {
            return Err(Error::InvalidParams("sweep grid must not be empty".into()));
        }
        if self.grid.windows(2).any(|w| w[0].is_nan() || w[1].is_nan() || w[0] >= w[1]) {
            return Err(Error::InvalidParams("sweep grid must be strictly increasing".into()));
        }
        if self.num_drops == 0 {
            return Err(Error::InvalidParams("num_drops must be at least 1".into()));
        }
        if self.num_antennas == 0 {
            return Err(Error::InvalidParams("num_antennas must be at least 1".into()));
        }
        let antenna_grid =
            matches!(self.kind, SweepKind::SweepAntennas | SweepKind::ZetaVsAntennas);
        if antenna_grid && self.grid.iter().any(|v| v.round() < 1.0 || (v - v.round()).abs() > 1e-9) {
            return Err(Error::InvalidParams(
                "antenna grid values must be positive integers".into(),
            ));
        }
        if self.kind == SweepKind::ZetaVsAntennas {
            if self.phi_values.is_empty() || self.phi_values.iter().any(|p| p.is_nan() || *p <= 0.0 || *p >= 1.0) {
                return Err(Error::InvalidParams(
                    "phi_values must be nonempty fractions strictly inside (0,1)".into(),
                ));
            }
        } else if self.jamming_modes.is_empty() {
            return Err(Error::InvalidParams("jamming_modes must not be empty".into()));
        }
        Ok(())
    }

    /// Large-scale gains for drop `drop` at grid point `point`.
    fn drop_gains(&self, point: usize, drop: usize) -> Result<Vec<f64>> {
        if let Some(gains) = &self.user_fading {
            return Ok(gains.clone());
        }
        let seed = if self.redraw_per_point {
            derive_seed(derive_seed(self.seed, point as u64 + 1), drop as u64)
        } else {
            derive_seed(self.seed, drop as u64)
        };
        drop_users(&self.scenario(seed))
    }

    fn base_params(&self, gains: Vec<f64>) -> SystemParams {
        SystemParams {
            num_antennas: self.num_antennas,
            num_users: gains.len(),
            coherence_length: self.coherence_length,
            training_length: gains.len(),
            user_fading: gains,
            jammer_fading: self.jammer_fading,
            user_budget: db_to_linear(self.user_budget_db),
            jammer_budget: db_to_linear(self.jammer_budget_db),
        }
    }
}

/// One output row: a `(grid value, jamming mode)` pair aggregated over all
/// drops. `zeta`, `phi`, and `eta` are drop averages; the SINR columns are
/// extremes over drops and users.
#[derive(Debug, Clone)]
pub struct SweepRow {
    pub sweep_value: f64,
    pub jamming_mode: JammingMode,
    pub zeta: f64,
    pub phi: f64,
    pub eta: f64,
    pub sum_se: f64,
    pub sinr_min: f64,
    pub sinr_max: f64,
    pub num_drops: usize,
    pub seed: u64,
}

#[derive(Debug)]
pub struct SweepOutcome {
    pub rows: Vec<SweepRow>,
    pub csv: String,
    pub written_to: Option<PathBuf>,
}

/// Formats with 12 significant digits, the CSV number contract.
fn fmt_sig12(x: f64) -> String {
    if x == 0.0 {
        "0".to_string()
    } else {
        format!("{x:.11e}")
    }
}

fn rows_to_csv(rows: &[SweepRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&format!(
            "{},{},{},{},{},{},{},{},{},{}\n",
            fmt_sig12(r.sweep_value),
            r.jamming_mode.label(),
            fmt_sig12(r.zeta),
            fmt_sig12(r.phi),
            fmt_sig12(r.eta),
            fmt_sig12(r.sum_se),
            fmt_sig12(r.sinr_min),
            fmt_sig12(r.sinr_max),
            r.num_drops,
            r.seed,
        ));
    }
    out
}

/// Per-drop closed-form evaluation at the users' operating point with the
/// given jamming strategy.
struct DropEval {
    zeta: f64,
    phi: f64,
    eta: usize,
    report: SinrReport,
}

fn evaluate_drop(params: &SystemParams, phi: f64, mode: JammingMode) -> Result<DropEval> {
    let zeta = match mode {
        JammingMode::Optimal => solve_numeric(params, phi, ZETA_SOLVER_TOL)?.zeta_star,
        JammingMode::Equal => params.training_length as f64 / params.coherence_length as f64,
    };
    let split = PowerSplit::from_fractions(params, phi, zeta)?;
    let report = sum_se_closed_form(params, &split)?;
    Ok(DropEval { zeta, phi, eta: params.training_length, report })
}

fn aggregate(
    sweep_value: f64,
    mode: JammingMode,
    evals: &[DropEval],
    num_drops: usize,
    seed: u64,
) -> SweepRow {
    let n = evals.len() as f64;
    let mut row = SweepRow {
        sweep_value,
        jamming_mode: mode,
        zeta: 0.0,
        phi: 0.0,
        eta: 0.0,
        sum_se: 0.0,
        sinr_min: f64::INFINITY,
        sinr_max: f64::NEG_INFINITY,
        num_drops,
        seed,
    };
    for e in evals {
        row.zeta += e.zeta / n;
        row.phi += e.phi / n;
        row.eta += e.eta as f64 / n;
        row.sum_se += e.report.sum_se / n;
        for &s in &e.report.per_user_sinr {
            row.sinr_min = row.sinr_min.min(s);
            row.sinr_max = row.sinr_max.max(s);
        }
    }
    row
}

/// Maps drop indices through `f`, optionally in parallel. Results come back
/// in drop order either way, so downstream aggregation is schedule-free.
fn map_drops<T: Send>(
    num_drops: usize,
    sequential: bool,
    f: impl Fn(usize) -> Result<T> + Sync + Send,
) -> Result<Vec<T>> {
    if sequential {
        (0..num_drops).map(f).collect()
    } else {
        (0..num_drops).into_par_iter().map(f).collect()
    }
}

/// Runs a sweep and renders its CSV; writes the file when the config names
/// an output path.
pub fn run_sweep(cfg: &SweepConfig) -> Result<SweepOutcome> {
    cfg.validate()?;
    if cfg.kind == SweepKind::Validate {
        return Err(Error::InvalidParams(
            "kind 'validate' is served by run_validation_config, not run_sweep".into(),
        ));
    }

    let mut rows = Vec::new();
    match cfg.kind {
        SweepKind::SweepJammerBudget => {
            // User strategies do not depend on the jammer budget, so compute
            // them once per drop unless drops are re-drawn per point.
            let strategies = if cfg.redraw_per_point {
                Vec::new()
            } else {
                map_drops(cfg.num_drops, cfg.sequential, |d| {
                    let params = cfg.base_params(cfg.drop_gains(0, d)?);
                    let s = optimize_users(&params, PHI_GRID_STEP, PHI_REFINE_TOL)?;
                    Ok((params, s))
                })?
            };
            for (point, &q_db) in cfg.grid.iter().enumerate() {
                let budget = db_to_linear(q_db);
                for &mode in &cfg.jamming_modes {
                    let evals = map_drops(cfg.num_drops, cfg.sequential, |d| {
                        let (params, strategy) = if cfg.redraw_per_point {
                            let params = cfg.base_params(cfg.drop_gains(point, d)?);
                            let s = optimize_users(&params, PHI_GRID_STEP, PHI_REFINE_TOL)?;
                            (params, s)
                        } else {
                            strategies[d].clone()
                        };
                        let params = params
                            .with_training_length(strategy.eta_star)
                            .with_jammer_budget(budget);
                        evaluate_drop(&params, strategy.phi_star, mode)
                    })?;
                    rows.push(aggregate(q_db, mode, &evals, cfg.num_drops, cfg.seed));
                }
            }
        }
        SweepKind::SweepAntennas => {
            for (point, &m_value) in cfg.grid.iter().enumerate() {
                let antennas = m_value.round() as usize;
                let evals_per_mode = map_drops(cfg.num_drops, cfg.sequential, |d| {
                    let mut params = cfg.base_params(cfg.drop_gains(point, d)?);
                    params.num_antennas = antennas;
                    let strategy = optimize_users(&params, PHI_GRID_STEP, PHI_REFINE_TOL)?;
                    let params = params.with_training_length(strategy.eta_star);
                    cfg.jamming_modes
                        .iter()
                        .map(|&mode| evaluate_drop(&params, strategy.phi_star, mode))
                        .collect::<Result<Vec<_>>>()
                })?;
                for (mode_idx, &mode) in cfg.jamming_modes.iter().enumerate() {
                    let evals: Vec<DropEval> = evals_per_mode
                        .iter()
                        .map(|per_drop| {
                            let e = &per_drop[mode_idx];
                            DropEval { zeta: e.zeta, phi: e.phi, eta: e.eta, report: e.report.clone() }
                        })
                        .collect();
                    rows.push(aggregate(m_value, mode, &evals, cfg.num_drops, cfg.seed));
                }
            }
        }
        SweepKind::ZetaVsAntennas => {
            for (point, &m_value) in cfg.grid.iter().enumerate() {
                let antennas = m_value.round() as usize;
                for &phi in &cfg.phi_values {
                    let evals = map_drops(cfg.num_drops, cfg.sequential, |d| {
                        let mut params = cfg.base_params(cfg.drop_gains(point, d)?);
                        params.num_antennas = antennas;
                        let (eta, _) = best_training_length(&params, phi)?;
                        let params = params.with_training_length(eta);
                        evaluate_drop(&params, phi, JammingMode::Optimal)
                    })?;
                    rows.push(aggregate(m_value, JammingMode::Optimal, &evals, cfg.num_drops, cfg.seed));
                }
            }
        }
        SweepKind::Validate => unreachable!("rejected above"),
    }

    let csv = rows_to_csv(&rows);
    let written_to = if let Some(path) = &cfg.output_path {
        std::fs::write(path, &csv)?;
        Some(path.clone())
    } else {
        None
    };
    Ok(SweepOutcome { rows, csv, written_to })
}

/// One user's closed-form versus Monte Carlo comparison.
#[derive(Debug, Clone)]
pub struct UserValidation {
    pub closed_form_sinr: f64,
    pub monte_carlo_sinr: f64,
    pub relative_deviation: f64,
}

#[derive(Debug, Clone)]
pub struct ValidationReport {
    pub per_user: Vec<UserValidation>,
    pub num_blocks: usize,
    pub threshold: f64,
    /// `None` when too few blocks were run to call pass/fail.
    pub verdict: Option<bool>,
}

impl ValidationReport {
    pub fn passed(&self) -> bool {
        self.verdict.unwrap_or(false)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        out.push_str(&format!(
            "closed-form vs Monte Carlo SINR over {} blocks (threshold {:.1}%)\n",
            self.num_blocks,
            100.0 * self.threshold
        ));
        out.push_str("user  closed_form     monte_carlo     rel_deviation\n");
        for (k, u) in self.per_user.iter().enumerate() {
            out.push_str(&format!(
                "{k:>4}  {:<14.8e}  {:<14.8e}  {:>6.3}%{}\n",
                u.closed_form_sinr,
                u.monte_carlo_sinr,
                100.0 * u.relative_deviation,
                if self.verdict.is_some() && u.relative_deviation > self.threshold {
                    "  FAIL"
                } else {
                    ""
                }
            ));
        }
        match self.verdict {
            Some(true) => out.push_str("verdict: PASS\n"),
            Some(false) => out.push_str("verdict: FAIL\n"),
            None => out.push_str(&format!(
                "insufficient samples (need >= {MIN_BLOCKS_FOR_VERDICT} blocks for a verdict)\n"
            )),
        }
        out
    }
}

/// Compares the Monte Carlo SINR against the closed form user by user.
pub fn run_validation(
    params: &SystemParams,
    split: &PowerSplit,
    num_blocks: usize,
    seed: u64,
) -> Result<ValidationReport> {
    validation_report(params, split, num_blocks, seed, true)
}

fn validation_report(
    params: &SystemParams,
    split: &PowerSplit,
    num_blocks: usize,
    seed: u64,
    parallel: bool,
) -> Result<ValidationReport> {
    let closed = sum_se_closed_form(params, split)?;
    let mc = estimate_uatf_sinr_with(
        params,
        split,
        &McConfig { num_blocks, seed, parallel, randomize_pilots: false },
    )?;
    let per_user: Vec<UserValidation> = closed
        .per_user_sinr
        .iter()
        .zip(&mc.sinr)
        .map(|(&cf, &sim)| UserValidation {
            closed_form_sinr: cf,
            monte_carlo_sinr: sim,
            relative_deviation: (sim - cf).abs() / cf,
        })
        .collect();
    let verdict = if num_blocks >= MIN_BLOCKS_FOR_VERDICT {
        Some(per_user.iter().all(|u| u.relative_deviation <= VALIDATION_THRESHOLD))
    } else {
        None
    };
    Ok(ValidationReport { per_user, num_blocks, threshold: VALIDATION_THRESHOLD, verdict })
}

/// Builds the validation scenario from a config and runs it.
pub fn run_validation_config(cfg: &SweepConfig) -> Result<ValidationReport> {
    cfg.validate()?;
    let gains = match &cfg.user_fading {
        Some(gains) => gains.clone(),
        None => drop_users(&cfg.scenario(cfg.seed))?,
    };
    let mut params = cfg.base_params(gains);
    params.training_length = if cfg.training_length == 0 {
        params.num_users
    } else {
        cfg.training_length
    };
    let split = PowerSplit::from_fractions(&params, cfg.phi, cfg.zeta)?;
    validation_report(&params, &split, cfg.num_blocks, cfg.seed, !cfg.sequential)
}
