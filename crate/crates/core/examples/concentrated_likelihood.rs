//! The concentrated likelihood and the closed-form reflection estimate.

use mimo_motion::harness::preset;
use mimo_motion::likelihood::{concentrate_b, objective, projection_objective, ObjectiveContext};
use mimo_motion::scene::{Axis, ParamId};
use mimo_motion::signal::{noise_variance_for_snr, synthesize};

fn main() -> mimo_motion::Result<()> {
    let s = preset("example1").unwrap();
    let b = s.reflection();
    let data = synthesize(&s, &b, noise_variance_for_snr(&s.params, &b, 10.0), 7)?;
    let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data)?;

    let v = ParamId { axis: Axis::X, order: 1 };
    println!("x velocity   positive LL    negative LL");
    for dv in [-0.2, -0.1, -0.05, 0.0, 0.05, 0.1, 0.2] {
        let m = s.truth.with_param(v, s.truth.get(v) + dv);
        let val = objective(&ctx, &m);
        println!("{:10.2} {:14.2} {:14.2}", s.truth.get(v) + dv, val.positive_ll, val.negative_ll);
    }

    let k = s.params.snapshot_count() as f64;
    let val = objective(&ctx, &s.truth);
    println!("\nnorm form / K {:.6}  projection form {:.6}", val.positive_ll / k, projection_objective(&ctx, &s.truth));
    let b_hat = concentrate_b(&ctx, &s.truth);
    let err: f64 = b_hat.0.iter().zip(&b.0).map(|(e, t)| (e - t).norm_sqr()).sum::<f64>().sqrt();
    println!("|b_hat - b| = {err:.4} (|b| = {:.4})", b.norm_sqr().sqrt());
    Ok(())
}
