//! Likelihood surface over velocity and acceleration with the position fixed.

use mimo_motion::estimator::{objective_grid, GridAxis};
use mimo_motion::harness::{emit_contour, preset};
use mimo_motion::likelihood::ObjectiveContext;
use mimo_motion::scene::{Axis, ParamId};
use mimo_motion::signal::{noise_variance_for_snr, synthesize};

fn main() -> mimo_motion::Result<()> {
    let s = preset("example1").unwrap();
    let b = s.reflection();
    let data = synthesize(&s, &b, noise_variance_for_snr(&s.params, &b, 0.0), 11)?;
    let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data)?;

    let velocity = GridAxis {
        param: ParamId { axis: Axis::X, order: 1 },
        start: 98.0,
        end: 102.0,
        count: 81,
    };
    let acceleration = GridAxis {
        param: ParamId { axis: Axis::X, order: 2 },
        start: -24.0,
        end: -16.0,
        count: 81,
    };
    let grid = objective_grid(&ctx, &s.truth, &velocity, &acceleration)?;
    let (i, j) = grid.argmax();
    println!(
        "peak at velocity {:.2} m/s, acceleration {:.2} m/s^2 (truth 100, -20)",
        velocity.value(i),
        acceleration.value(j)
    );
    let path = std::env::temp_dir().join("contour_velocity_acceleration.txt");
    emit_contour(&grid, &path)?;
    println!("grid written to {}", path.display());
    Ok(())
}
