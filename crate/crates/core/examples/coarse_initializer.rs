//! Range-only initialization: multilateration per snapshot, then polynomial fit.

use mimo_motion::estimator::{coarse_init, RangeEstimates};
use mimo_motion::harness::preset;

fn main() -> mimo_motion::Result<()> {
    let s = preset("example1").unwrap();
    for range_noise in [0.0, 1.0, 10.0] {
        let ranges = RangeEstimates::simulate(&s.geometry, &s.truth, &s.params, range_noise, 3)?;
        let init = coarse_init(&ranges, &s.geometry, &s.params, s.truth.order(), true)?;
        println!("range error {range_noise} m:");
        for id in init.param_ids() {
            println!("  {:16} {:12.4} (truth {:.1}) {}", id.name(), init.get(id), s.truth.get(id), id.unit());
        }
    }
    Ok(())
}
