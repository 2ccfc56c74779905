//! One maximum-likelihood estimate of the accelerating target at 0 dB.

use mimo_motion::crb::scenario_crb;
use mimo_motion::estimator::{estimate, OptimizerConfig, SearchBox};
use mimo_motion::harness::preset;
use mimo_motion::likelihood::ObjectiveContext;
use mimo_motion::signal::{noise_variance_for_snr, synthesize};

fn main() -> mimo_motion::Result<()> {
    let s = preset("example1").unwrap();
    let b = s.reflection();
    let sigma2 = noise_variance_for_snr(&s.params, &b, 0.0);
    let data = synthesize(&s, &b, sigma2, 1)?;
    let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data)?;

    let crb = scenario_crb(&s, sigma2)?;
    let search = SearchBox::crb_scaled(&s.truth, &crb, 10.0)?;
    let est = estimate(&ctx, &search, &OptimizerConfig::default())?;

    println!("{:16} {:>12} {:>12} {:>10}", "parameter", "estimate", "truth", "bound");
    for id in est.motion.param_ids() {
        println!(
            "{:16} {:12.4} {:12.4} {:10.4}",
            id.name(),
            est.motion.get(id),
            s.truth.get(id),
            crb.std_of(id).unwrap()
        );
    }
    let d = &est.diagnostics;
    println!(
        "\npositive LL {:.2}; {} generations, {} population and {} simplex evaluations",
        est.value.positive_ll, d.generations, d.global_evaluations, d.local_evaluations
    );
    Ok(())
}
