//! Describe a scenario in TOML, validate it and compute its bound.

use mimo_motion::crb::scenario_crb;
use mimo_motion::harness::ScenarioConfig;

const TEXT: &str = r#"
name = "three-dimensional"
dimensions = 3
reflection_seed = 5

[radar]
carrier_frequency_hz = 1.0e9
propagation_speed_mps = 3.0e8
snapshot_interval_s = 0.02
snapshot_count = 40
energy_ratio = 1.0

[geometry]
transmitters = [[0.0, 0.0, 0.0], [3000.0, 0.0, 50.0]]
receivers = [[0.0, 3000.0, 0.0], [3000.0, 3000.0, 20.0], [1500.0, -1500.0, 0.0]]

[motion]
x = [7000.0, -60.0]
y = [4000.0, 15.0]
z = [1200.0, 0.0]
"#;

fn main() -> mimo_motion::Result<()> {
    let config = ScenarioConfig::parse(TEXT)?;
    let scenario = config.to_scenario()?;
    println!("{}: order {}, {} free parameters", scenario.name, scenario.truth.order(), scenario.truth.free_len());
    scenario_crb(&scenario, 1.0)?.write_csv(std::io::stdout())?;

    let broken = TEXT.replace("receivers =", "sensors =");
    match ScenarioConfig::parse(&broken) {
        Ok(_) => println!("unexpectedly accepted"),
        Err(e) => println!("rejected: {e}"),
    }
    Ok(())
}
