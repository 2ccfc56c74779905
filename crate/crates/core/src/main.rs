use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde::Serialize;

use mimo_motion::crb::scenario_crb;
use mimo_motion::estimator::{
    coarse_init, estimate, objective_grid, GridAxis, OptimizerConfig, RangeEstimates, SearchBox,
};
use mimo_motion::harness::{
    check_doppler_cit, emit_contour, load_scenario, run_campaign, write_contour, write_rmse_csv, BoxPolicy,
    CampaignSpec,
};
use mimo_motion::likelihood::ObjectiveContext;
use mimo_motion::scene::{ParamId, Scenario};
use mimo_motion::signal::{noise_variance_for_snr, synthesize, SnapshotSet};
use mimo_motion::{Error, Result};

/// Moving-target motion estimation for multistatic MIMO radar.
#[derive(Parser)]
#[command(version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args)]
struct Common {
    /// Preset name (example1, example2) or path to a scenario TOML file.
    #[arg(long, default_value = "example1")]
    scenario: String,
    /// Output file; standard output when omitted (required for binary output).
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Subcommand)]
enum Command {
    /// Synthesize noisy snapshots of the scenario truth into a binary file.
    Simulate {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Per-sample SNR in dB (`inf` for noiseless data).
        #[arg(long, default_value_t = 0.0)]
        snr: f64,
    },
    /// Estimate the motion from a snapshot file and print a JSON record.
    Estimate {
        #[command(flatten)]
        common: Common,
        /// Snapshot file written by `simulate`.
        #[arg(long)]
        input: PathBuf,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Where to center the search box: the range-based initializer or the truth.
        #[arg(long, value_enum, default_value = "init")]
        center: Center,
        /// Half-width of the box in bound standard deviations.
        #[arg(long, default_value_t = 10.0)]
        box_factor: f64,
        /// Explicit half-widths, one per free parameter (overrides --box-factor).
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
        half_widths: Option<Vec<f64>>,
        /// Error of the simulated range measurements fed to the initializer, meters.
        #[arg(long, default_value_t = 1.0)]
        range_noise: f64,
    },
    /// Write the bound on every motion parameter as CSV.
    Crb {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0.0)]
        snr: f64,
    },
    /// Monte-Carlo RMSE versus SNR, written as CSV.
    Sweep {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Comma-separated SNR points in dB.
        #[arg(long, value_delimiter = ',', allow_hyphen_values = true, default_value = "-10,-5,0,5,10")]
        snr: Vec<f64>,
        #[arg(long, default_value_t = 100)]
        trials: usize,
        /// Box half-width around the truth in bound standard deviations.
        #[arg(long, default_value_t = 10.0)]
        box_factor: f64,
    },
    /// Objective values on a 2D grid through the truth.
    Contour {
        #[command(flatten)]
        common: Common,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 0.0)]
        snr: f64,
        /// Row axis as `name:start:end:count`, e.g. `x_velocity:99:101:41`.
        /// Defaults to truth ± 5 bound standard deviations.
        #[arg(long, allow_hyphen_values = true)]
        rows: Option<String>,
        #[arg(long, allow_hyphen_values = true)]
        cols: Option<String>,
    },
    /// Largest Doppler drift within one integration interval, in Hz.
    CheckDoppler {
        #[command(flatten)]
        common: Common,
    },
}

#[derive(Clone, Copy, clap::ValueEnum)]
enum Center {
    Init,
    Truth,
}

#[derive(Serialize)]
struct ParameterRecord {
    name: String,
    unit: String,
    estimate: f64,
    truth: f64,
}

#[derive(Serialize)]
struct EstimateRecord {
    scenario: String,
    noise_variance: f64,
    parameters: Vec<ParameterRecord>,
    reflection: Vec<[f64; 2]>,
    positive_ll: f64,
    negative_ll: f64,
    diagnostics: mimo_motion::estimator::Diagnostics,
}

fn write_output(out: Option<&Path>, bytes: &[u8]) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, bytes)?,
        None => std::io::stdout().write_all(bytes)?,
    }
    Ok(())
}

fn noise_variance(s: &Scenario, snr: f64) -> Result<f64> {
    if snr.is_nan() || snr == f64::NEG_INFINITY {
        return Err(Error::NonFinite("SNR"));
    }
    Ok(noise_variance_for_snr(&s.params, &s.reflection(), snr))
}

// Bound used to size boxes; noiseless data is treated as 30 dB.
fn sizing_bound(s: &Scenario, sigma2: f64) -> Result<mimo_motion::crb::CrbResult> {
    let floor = noise_variance(s, 30.0)?;
    scenario_crb(s, sigma2.max(floor))
}

fn parse_axis(spec: &str) -> Result<GridAxis> {
    let bad = || Error::InvalidGrid(format!("expected name:start:end:count, got `{spec}`"));
    let parts: Vec<&str> = spec.split(':').collect();
    let [name, start, end, count] = parts[..] else {
        return Err(bad());
    };
    Ok(GridAxis {
        param: ParamId::parse(name).ok_or_else(|| Error::InvalidGrid(format!("unknown parameter `{name}`")))?,
        start: start.parse().map_err(|_| bad())?,
        end: end.parse().map_err(|_| bad())?,
        count: count.parse().map_err(|_| bad())?,
    })
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate { common, seed, snr } => {
            let s = load_scenario(&common.scenario)?;
            let set = synthesize(&s, &s.reflection(), noise_variance(&s, snr)?, seed)?;
            let Some(out) = common.out else {
                return Err(Error::InvalidScenario("simulate writes a binary file; pass --out".into()));
            };
            set.save(out)
        }
        Command::Estimate {
            common,
            input,
            seed,
            center,
            box_factor,
            half_widths,
            range_noise,
        } => {
            let s = load_scenario(&common.scenario)?;
            let data = SnapshotSet::load(&input)?;
            let sigma2 = data.noise_variance();
            let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data)?;
            let middle = match center {
                Center::Truth => s.truth.clone(),
                Center::Init => {
                    let ranges = RangeEstimates::simulate(&s.geometry, &s.truth, &s.params, range_noise, seed)?;
                    coarse_init(&ranges, &s.geometry, &s.params, s.truth.order(), s.truth.is_planar())?
                }
            };
            let search = match half_widths {
                Some(w) => SearchBox::around(&middle, &w)?,
                None => SearchBox::crb_scaled(&middle, &sizing_bound(&s, sigma2)?, box_factor)?,
            };
            let cfg = OptimizerConfig {
                seed,
                seed_center: matches!(center, Center::Init),
                ..OptimizerConfig::default()
            };
            let est = estimate(&ctx, &search, &cfg)?;
            let record = EstimateRecord {
                scenario: s.name.clone(),
                noise_variance: sigma2,
                parameters: est
                    .motion
                    .param_ids()
                    .into_iter()
                    .map(|id| ParameterRecord {
                        name: id.name(),
                        unit: id.unit(),
                        estimate: est.motion.get(id),
                        truth: s.truth.get(id),
                    })
                    .collect(),
                reflection: est.reflection.0.iter().map(|c| [c.re, c.im]).collect(),
                positive_ll: est.value.positive_ll,
                negative_ll: est.value.negative_ll,
                diagnostics: est.diagnostics,
            };
            let mut text = serde_json::to_string_pretty(&record)?;
            text.push('\n');
            write_output(common.out.as_deref(), text.as_bytes())
        }
        Command::Crb { common, snr } => {
            let s = load_scenario(&common.scenario)?;
            let crb = scenario_crb(&s, noise_variance(&s, snr)?)?;
            let mut buf = Vec::new();
            crb.write_csv(&mut buf)?;
            write_output(common.out.as_deref(), &buf)
        }
        Command::Sweep {
            common,
            seed,
            snr,
            trials,
            box_factor,
        } => {
            let s = load_scenario(&common.scenario)?;
            let spec = CampaignSpec {
                snr_db: snr,
                trials,
                optimizer: OptimizerConfig::default(),
                box_policy: BoxPolicy::CrbScaled { factor: box_factor },
                base_seed: seed,
            };
            let table = run_campaign(&s, &spec)?;
            for (snr, n) in &table.excluded {
                if *n > 0 {
                    eprintln!("{n} trial(s) excluded at {snr} dB");
                }
            }
            let mut buf = Vec::new();
            write_rmse_csv(&table, &mut buf)?;
            write_output(common.out.as_deref(), &buf)
        }
        Command::Contour {
            common,
            seed,
            snr,
            rows,
            cols,
        } => {
            let s = load_scenario(&common.scenario)?;
            let sigma2 = noise_variance(&s, snr)?;
            let bound = sizing_bound(&s, sigma2)?;
            let default_axis = |id: ParamId| {
                let w = 5.0 * bound.std_of(id).unwrap_or(1.0);
                let t = s.truth.get(id);
                GridAxis {
                    param: id,
                    start: t - w,
                    end: t + w,
                    count: 41,
                }
            };
            // Velocity-acceleration plane, or position-velocity for first-order motion.
            let top = s.truth.order().clamp(1, 2);
            let x = |order| ParamId {
                axis: mimo_motion::scene::Axis::X,
                order,
            };
            let axis1 = match rows {
                Some(r) => parse_axis(&r)?,
                None => default_axis(x(top - 1)),
            };
            let axis2 = match cols {
                Some(c) => parse_axis(&c)?,
                None => default_axis(x(top)),
            };
            let data = synthesize(&s, &s.reflection(), sigma2, seed)?;
            let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data)?;
            let grid = objective_grid(&ctx, &s.truth, &axis1, &axis2)?;
            match common.out {
                Some(path) => emit_contour(&grid, path),
                None => write_contour(&grid, std::io::stdout().lock()),
            }
        }
        Command::CheckDoppler { common } => {
            let s = load_scenario(&common.scenario)?;
            if s.pulses.is_none() {
                eprintln!("scenario has no pulse schedule; reporting 0");
            }
            let text = format!("{}\n", check_doppler_cit(&s));
            write_output(common.out.as_deref(), text.as_bytes())
        }
    }
}

fn main() -> ExitCode {
    match run(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::FAILURE
        }
    }
}
