//! How far the Doppler frequency drifts within one integration interval.

use mimo_motion::harness::{check_doppler_cit, preset};

fn main() {
    for name in ["example1", "example2"] {
        let s = preset(name).unwrap();
        let p = s.pulses.unwrap();
        println!(
            "{name}: {} pulses x {:.2} ms per interval, max Doppler drift {:.6} Hz",
            p.pulses_per_cit,
            p.prt * 1e3,
            check_doppler_cit(&s)
        );
    }
}
