//! Doppler drift inside one coherent integration interval.

use crate::scene::{Axis, MotionCoefficients, Position3, Scenario};

fn velocity_at(motion: &MotionCoefficients, t: f64) -> [f64; 3] {
    Axis::ALL.map(|axis| {
        // Derivative of the factorial-weighted polynomial is the same
        // polynomial on the shifted coefficients.
        let c = motion.axis(axis);
        let mut acc = 0.0;
        for q in (1..c.len()).rev() {
            acc = c[q] + acc * t / q as f64;
        }
        acc
    })
}

fn range_rate(target: &Position3, velocity: &[f64; 3], antenna: &Position3) -> f64 {
    let d = [target.x - antenna.x, target.y - antenna.y, target.z - antenna.z];
    let r = target.distance(antenna);
    if r == 0.0 {
        return 0.0;
    }
    (d[0] * velocity[0] + d[1] * velocity[1] + d[2] * velocity[2]) / r
}

/// Doppler frequency `-(f_c/c) d(d_m + d_n)/dt` of path `(m, n)` at time `t`.
pub fn path_doppler(scenario: &Scenario, m: usize, n: usize, t: f64) -> f64 {
    let pos = scenario.truth.position_at(t);
    let vel = velocity_at(&scenario.truth, t);
    let rate = range_rate(&pos, &vel, &scenario.geometry.transmitters()[m])
        + range_rate(&pos, &vel, &scenario.geometry.receivers()[n]);
    -scenario.params.wavenumber() * rate
}

/// Largest difference between the Doppler frequency at the first and the
/// last pulse of an interval, over all paths and intervals (Hz).
///
/// Interval `k` starts at the snapshot time `kT`; its pulses are spaced by
/// the PRT. Without a pulse schedule there is nothing to drift, so the
/// result is zero.
pub fn check_doppler_cit(scenario: &Scenario) -> f64 {
    let Some(pulses) = scenario.pulses else {
        return 0.0;
    };
    let span = pulses.prt * pulses.pulses_per_cit.saturating_sub(1) as f64;
    let geom = &scenario.geometry;
    let mut worst: f64 = 0.0;
    for k in 0..scenario.params.snapshot_count() {
        let t0 = scenario.params.snapshot_time(k);
        for m in 0..geom.tx_count() {
            for n in 0..geom.rx_count() {
                let spread = (path_doppler(scenario, m, n, t0) - path_doppler(scenario, m, n, t0 + span)).abs();
                worst = worst.max(spread);
            }
        }
    }
    worst
}
