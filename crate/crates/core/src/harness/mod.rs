//! Scenario files, Monte-Carlo campaigns and result export.

mod campaign;
mod config;
mod contour;
mod doppler;

pub use campaign::{
    emit_rmse_csv, run_campaign, run_trial, trial_seed, write_rmse_csv, BoxPolicy, CampaignSpec, RmseRow, RmseTable,
    MAX_EXCLUDED_FRACTION,
};
pub use config::{
    load_scenario, preset, GeometrySection, MotionSection, PulseSection, RadarSection, ScenarioConfig, PRESETS,
};
pub use contour::{emit_contour, write_contour};
pub use doppler::{check_doppler_cit, path_doppler};
