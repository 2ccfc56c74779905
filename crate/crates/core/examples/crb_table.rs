//! Bound on the standard deviation of every motion parameter versus SNR.

use mimo_motion::crb::scenario_crb;
use mimo_motion::harness::preset;
use mimo_motion::signal::noise_variance_for_snr;

fn main() -> mimo_motion::Result<()> {
    let name = std::env::args().nth(1).unwrap_or_else(|| "example1".into());
    let s = preset(&name).expect("unknown preset");
    let b = s.reflection();
    let ids = s.truth.param_ids();
    print!("{:>8}", "snr_db");
    for id in &ids {
        print!(" {:>15}", id.name());
    }
    println!();
    for snr in [-10.0, -5.0, 0.0, 5.0, 10.0] {
        let crb = scenario_crb(&s, noise_variance_for_snr(&s.params, &b, snr))?;
        print!("{snr:>8}");
        for id in &ids {
            print!(" {:>15.4e}", crb.std_of(*id).unwrap());
        }
        println!();
    }
    Ok(())
}
