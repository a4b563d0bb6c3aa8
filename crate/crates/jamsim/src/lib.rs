//! Uplink sum spectral efficiency of a single-cell massive MU-MIMO system
//! under a smart jammer that splits its energy between the training and
//! data phases.
//!
//! The crate provides:
//!
//! * [`scenario`] — cell geometry, log-normal shadowing, and the static link
//!   parameters ([`SystemParams`]);
//! * [`se_core`] — closed-form per-user SINR and sum SE under maximum ratio
//!   combining with MMSE channel estimation, plus estimation variances and
//!   the large-antenna saturation limit;
//! * [`montecarlo`] — a block-level simulation oracle that estimates the
//!   same effective SINR from sample means, used to validate the closed
//!   forms;
//! * [`jammer_opt`] — the jammer's optimal training/data energy split, by
//!   convex scalar search and by the symmetric-fading closed form;
//! * [`user_opt`] — the legitimate side's jammer-free choice of training
//!   length and energy fraction;
//! * [`cli`] — seeded experiment sweeps with CSV output and the Monte Carlo
//!   validation report, backing the `jamsim` binary.
//!
//! All randomness flows through explicitly seeded, counter-addressed ChaCha
//! streams: every result in this crate is reproducible from its seed,
//! independent of thread count.

pub mod cli;
pub mod error;
pub mod jammer_opt;
pub mod montecarlo;
pub mod scenario;
pub mod se_core;
pub mod user_opt;

pub use error::{Error, Result};
pub use jammer_opt::{JammerSolution, SolutionMethod};
pub use montecarlo::{ChannelRealization, McConfig, PilotBook, UatfEstimate};
pub use scenario::{db_to_linear, drop_users, ScenarioConfig, SystemParams};
pub use se_core::{
    estimation_variances, se_map, sum_se_asymptotic, sum_se_closed_form,
    sum_se_closed_form_or_zero, PowerSplit, SinrReport, TermBreakdown,
};
pub use user_opt::UserStrategy;
