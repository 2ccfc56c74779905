//! Monte-Carlo RMSE versus SNR with the bound alongside.
//!
//! Usage: `rmse_sweep [preset] [trials]`

use std::time::Instant;

use mimo_motion::estimator::OptimizerConfig;
use mimo_motion::harness::{preset, run_campaign, BoxPolicy, CampaignSpec};

fn main() -> mimo_motion::Result<()> {
    let mut args = std::env::args().skip(1);
    let name = args.next().unwrap_or_else(|| "example1".into());
    let trials = args.next().map_or(20, |t| t.parse().expect("trials must be an integer"));
    let scenario = preset(&name).expect("unknown preset");
    let spec = CampaignSpec {
        snr_db: vec![-10.0, -5.0, 0.0, 5.0, 10.0],
        trials,
        optimizer: OptimizerConfig::default(),
        box_policy: BoxPolicy::CrbScaled { factor: 10.0 },
        base_seed: 2011,
    };
    let started = Instant::now();
    let table = run_campaign(&scenario, &spec)?;
    println!("{:>6} {:>16} {:>12} {:>12} {:>7}", "snr", "parameter", "rmse", "crb", "ratio");
    for row in &table.rows {
        println!(
            "{:>6} {:>16} {:>12.4e} {:>12.4e} {:>7.3}",
            row.snr_db,
            row.parameter,
            row.rmse,
            row.crb_std,
            row.rmse / row.crb_std
        );
    }
    println!("{} trials per point in {:.1?}", trials, started.elapsed());
    Ok(())
}
