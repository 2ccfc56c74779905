//! Monte-Carlo RMSE campaigns.

use std::io::Write;
use std::path::Path;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::crb::{scenario_crb, CrbResult};
use crate::error::{Error, Result};
use crate::estimator::{coarse_init, estimate, OptimizerConfig, RangeEstimates, SearchBox};
use crate::likelihood::ObjectiveContext;
use crate::scene::{MotionCoefficients, ParamId, Scenario};
use crate::signal::{noise_variance_for_snr, synthesize};

/// Largest tolerated fraction of failed trials per SNR point.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.05;

/// How the search box of each trial is placed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BoxPolicy {
    /// Truth ± `factor` bound standard deviations (benchmark mode).
    CrbScaled { factor: f64 },
    /// Centered on the range-based coarse initializer, fed with ranges
    /// carrying Gaussian error of `range_noise_std` meters.
    InitCentered { half_widths: Vec<f64>, range_noise_std: f64 },
    /// Truth ± fixed half-widths. Needed when the bound is zero (noiseless runs).
    Fixed { half_widths: Vec<f64> },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CampaignSpec {
    /// `+inf` requests noiseless data.
    pub snr_db: Vec<f64>,
    pub trials: usize,
    pub optimizer: OptimizerConfig,
    pub box_policy: BoxPolicy,
    pub base_seed: u64,
}

impl CampaignSpec {
    pub fn validate(&self) -> Result<()> {
        if self.snr_db.is_empty() {
            return Err(Error::Campaign("SNR list is empty".into()));
        }
        if self.snr_db.iter().any(|s| s.is_nan()) {
            return Err(Error::Campaign("SNR values must not be NaN".into()));
        }
        if self.trials == 0 {
            return Err(Error::Campaign("at least one trial is required".into()));
        }
        self.optimizer.validate()
    }
}

/// Seed of trial `trial` at SNR point `snr_index`.
pub fn trial_seed(base: u64, snr_index: usize, trial: usize) -> u64 {
    base ^ (((snr_index as u64) << 32) | trial as u64)
}

// Decorrelates the optimizer stream from the noise stream of the same trial.
fn optimizer_seed(seed: u64) -> u64 {
    seed.wrapping_mul(0x9E37_79B9_7F4A_7C15).rotate_left(29) ^ 0xD1B5_4A32_D192_ED03
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RmseRow {
    pub snr_db: f64,
    /// A scalar parameter name such as `x_velocity`, or a group name
    /// (`position`, `velocity`, ...) for the Euclidean error over axes.
    pub parameter: String,
    pub unit: String,
    pub rmse: f64,
    pub crb_std: f64,
    pub trials: usize,
}

#[derive(Clone, Debug, Default, PartialEq)]
pub struct RmseTable {
    pub rows: Vec<RmseRow>,
    /// `(snr_db, excluded trials)` per SNR point.
    pub excluded: Vec<(f64, usize)>,
}

impl RmseTable {
    pub fn get(&self, snr_db: f64, parameter: &str) -> Option<&RmseRow> {
        self.rows.iter().find(|r| r.snr_db == snr_db && r.parameter == parameter)
    }
}

fn group_name(order: usize) -> String {
    let id = ParamId {
        axis: crate::scene::Axis::X,
        order,
    };
    id.name()[2..].to_string()
}

fn search_box(
    scenario: &Scenario,
    policy: &BoxPolicy,
    crb: Option<&CrbResult>,
    seed: u64,
) -> Result<(SearchBox, bool)> {
    match policy {
        BoxPolicy::CrbScaled { factor } => {
            let crb = crb.ok_or_else(|| Error::Campaign("CRB-scaled boxes need a finite SNR".into()))?;
            Ok((SearchBox::crb_scaled(&scenario.truth, crb, *factor)?, false))
        }
        BoxPolicy::Fixed { half_widths } => Ok((SearchBox::around(&scenario.truth, half_widths)?, false)),
        BoxPolicy::InitCentered {
            half_widths,
            range_noise_std,
        } => {
            let ranges = RangeEstimates::simulate(
                &scenario.geometry,
                &scenario.truth,
                &scenario.params,
                *range_noise_std,
                seed ^ 0x5DEE_CE66_D1CE_4E5B,
            )?;
            let init = coarse_init(
                &ranges,
                &scenario.geometry,
                &scenario.params,
                scenario.truth.order(),
                scenario.truth.is_planar(),
            )?;
            Ok((SearchBox::around(&init, half_widths)?, true))
        }
    }
}

/// Runs one synthesize-and-estimate trial, returning the estimated motion.
pub fn run_trial(
    scenario: &Scenario,
    spec: &CampaignSpec,
    noise_variance: f64,
    crb: Option<&CrbResult>,
    seed: u64,
) -> Result<MotionCoefficients> {
    let b = scenario.reflection();
    let data = synthesize(scenario, &b, noise_variance, seed)?;
    let ctx = ObjectiveContext::new(scenario.geometry.clone(), scenario.params.clone(), data)?;
    let (search, seed_center) = search_box(scenario, &spec.box_policy, crb, seed)?;
    let cfg = OptimizerConfig {
        seed: optimizer_seed(seed),
        seed_center: spec.optimizer.seed_center || seed_center,
        ..spec.optimizer.clone()
    };
    Ok(estimate(&ctx, &search, &cfg)?.motion)
}

/// Estimates the scenario truth `spec.trials` times per SNR point and
/// tabulates RMSE against the bound.
pub fn run_campaign(scenario: &Scenario, spec: &CampaignSpec) -> Result<RmseTable> {
    spec.validate()?;
    scenario.validate()?;
    let b = scenario.reflection();
    let ids = scenario.truth.param_ids();
    let truth = scenario.truth.free_params();
    let max_order = scenario.truth.order();
    let mut table = RmseTable::default();

    for (si, &snr) in spec.snr_db.iter().enumerate() {
        let sigma2 = noise_variance_for_snr(&scenario.params, &b, snr);
        let crb = if sigma2 > 0.0 {
            Some(scenario_crb(scenario, sigma2)?)
        } else {
            None
        };
        let outcomes: Vec<Result<MotionCoefficients>> = (0..spec.trials)
            .into_par_iter()
            .map(|t| run_trial(scenario, spec, sigma2, crb.as_ref(), trial_seed(spec.base_seed, si, t)))
            .collect();

        let errors: Vec<Vec<f64>> = outcomes
            .iter()
            .filter_map(|o| o.as_ref().ok())
            .map(|m| m.free_params().iter().zip(&truth).map(|(e, t)| e - t).collect())
            .collect();
        let excluded = spec.trials - errors.len();
        if excluded as f64 > MAX_EXCLUDED_FRACTION * spec.trials as f64 {
            let first = outcomes.iter().find_map(|o| o.as_ref().err()).map(|e| e.to_string());
            return Err(Error::Campaign(format!(
                "{excluded} of {} trials failed at {snr} dB (first error: {})",
                spec.trials,
                first.unwrap_or_default()
            )));
        }
        table.excluded.push((snr, excluded));
        let used = errors.len();
        let mean_sq = |i: usize| errors.iter().map(|e| e[i] * e[i]).sum::<f64>() / used as f64;
        let crb_var = |id: &ParamId| crb.as_ref().and_then(|c| c.std_of(*id)).map_or(0.0, |s| s * s);

        for (i, id) in ids.iter().enumerate() {
            table.rows.push(RmseRow {
                snr_db: snr,
                parameter: id.name(),
                unit: id.unit(),
                rmse: mean_sq(i).sqrt(),
                crb_std: crb_var(id).sqrt(),
                trials: used,
            });
        }
        for order in 0..=max_order {
            let members: Vec<usize> = (0..ids.len()).filter(|&i| ids[i].order == order).collect();
            table.rows.push(RmseRow {
                snr_db: snr,
                parameter: group_name(order),
                unit: ids[members[0]].unit(),
                rmse: members.iter().map(|&i| mean_sq(i)).sum::<f64>().sqrt(),
                crb_std: members.iter().map(|&i| crb_var(&ids[i])).sum::<f64>().sqrt(),
                trials: used,
            });
        }
    }
    Ok(table)
}

pub fn write_rmse_csv<W: Write>(table: &RmseTable, w: W) -> Result<()> {
    let mut out = csv::Writer::from_writer(w);
    for row in &table.rows {
        out.serialize(row)?;
    }
    out.flush()?;
    Ok(())
}

pub fn emit_rmse_csv(table: &RmseTable, path: impl AsRef<Path>) -> Result<()> {
    let file = std::fs::File::create(path)?;
    write_rmse_csv(table, std::io::BufWriter::new(file))
}
