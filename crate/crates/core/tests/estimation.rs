mod common;

use mimo_motion::estimator::{
    coarse_init, estimate, objective_grid, refine, GridAxis, OptimizerConfig, RangeEstimates, SearchBox,
};
use mimo_motion::harness::preset;
use mimo_motion::likelihood::{concentrate_b, objective, projection_objective, stacked_data, stacked_steering, ObjectiveContext};
use mimo_motion::scene::{Axis, ParamId, Scenario};
use mimo_motion::signal::synthesize;

fn noiseless(s: &Scenario) -> ObjectiveContext {
    let data = synthesize(s, &s.reflection(), 0.0, 0).unwrap();
    ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data).unwrap()
}

fn exact_ranges(s: &Scenario) -> RangeEstimates {
    RangeEstimates::simulate(&s.geometry, &s.truth, &s.params, 0.0, 0).unwrap()
}

fn assert_close_to_truth(s: &Scenario, got: &[f64], tol: f64) {
    for ((id, g), t) in s.truth.param_ids().iter().zip(got).zip(s.truth.free_params()) {
        assert!((g - t).abs() <= tol, "{}: {g} vs {t}", id.name());
    }
}

#[test]
fn coarse_init_recovers_example1_from_exact_ranges() {
    let s = preset("example1").unwrap();
    let init = coarse_init(&exact_ranges(&s), &s.geometry, &s.params, 2, true).unwrap();
    assert_close_to_truth(&s, &init.free_params(), 1e-6);
}

#[test]
fn coarse_init_error_shrinks_like_inverse_root_k() {
    // Fixed observation window, increasing snapshot density.
    let s = preset("example2").unwrap();
    let rms_error = |k: usize| {
        let params = s.params.with_snapshot_count(k).unwrap();
        let params = mimo_motion::scene::RadarParams::new(
            params.carrier_frequency(),
            params.propagation_speed(),
            2.0 / k as f64,
            k,
            params.energy_ratio(),
        )
        .unwrap();
        let trials = 200;
        let mut sq = 0.0;
        for seed in 0..trials {
            let r = RangeEstimates::simulate(&s.geometry, &s.truth, &params, 5.0, seed).unwrap();
            let est = coarse_init(&r, &s.geometry, &params, 1, true).unwrap();
            sq += (est.get(ParamId { axis: Axis::X, order: 1 }) - 40.0).powi(2);
        }
        (sq / trials as f64).sqrt()
    };
    let (e25, e100) = (rms_error(25), rms_error(100));
    let ratio = e25 / e100;
    assert!((1.6..2.5).contains(&ratio), "{e25} / {e100} = {ratio}");
}

#[test]
fn noiseless_example1_estimate_hits_truth() {
    let s = preset("example1").unwrap();
    let ctx = noiseless(&s);
    let search = SearchBox::around(&s.truth, &[20.0, 0.5, 1.0, 80.0, 4.0, 2.0]).unwrap();
    let cfg = OptimizerConfig {
        seed: 17,
        ..OptimizerConfig::default()
    };
    let est = estimate(&ctx, &search, &cfg).unwrap();
    assert_close_to_truth(&s, &est.motion.free_params(), 1e-3);
    // Reported value is the recomputed objective.
    assert_eq!(est.value, objective(&ctx, &est.motion));
}

#[test]
fn degenerate_box_returns_truth() {
    let s = preset("example2").unwrap();
    let ctx = noiseless(&s);
    let search = SearchBox::around(&s.truth, &[1e-9; 4]).unwrap();
    let cfg = OptimizerConfig {
        population: 8,
        generations: 2,
        max_local_evaluations: 20,
        ..OptimizerConfig::default()
    };
    let est = estimate(&ctx, &search, &cfg).unwrap();
    assert_close_to_truth(&s, &est.motion.free_params(), 1e-8);
}

#[test]
fn estimates_are_deterministic_and_inside_the_box() {
    let s = preset("example2").unwrap();
    let data = synthesize(&s, &s.reflection(), 1.0, 44).unwrap();
    let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data).unwrap();
    let search = SearchBox::around(&s.truth, &[300.0, 2.0, 300.0, 2.0]).unwrap();
    let cfg = OptimizerConfig {
        seed: 3,
        ..OptimizerConfig::default()
    };
    let a = estimate(&ctx, &search, &cfg).unwrap();
    let b = estimate(&ctx, &search, &cfg).unwrap();
    assert_eq!(a.motion, b.motion);
    assert_eq!(a.diagnostics, b.diagnostics);
    assert!(search.contains(&a.motion));
    // Refinement never loses to the population stage.
    assert!(a.value.positive_ll >= a.diagnostics.global_best.unwrap() * (1.0 - 1e-12));
}

#[test]
fn initializer_then_refinement_matches_full_pipeline() {
    let s = preset("example1").unwrap();
    let ctx = noiseless(&s);
    let init = coarse_init(&exact_ranges(&s), &s.geometry, &s.params, 2, true).unwrap();
    let search = SearchBox::around(&init, &[20.0, 0.5, 1.0, 80.0, 4.0, 2.0]).unwrap();
    let cfg = OptimizerConfig {
        seed: 5,
        ..OptimizerConfig::default()
    };
    let local = refine(&ctx, &search, &init, &cfg).unwrap();
    let full = estimate(&ctx, &search, &cfg).unwrap();
    for (a, b) in local.motion.free_params().iter().zip(full.motion.free_params()) {
        assert!((a - b).abs() < 1e-3, "{a} vs {b}");
    }
}

#[test]
fn closed_form_reflection_matches_dense_least_squares() {
    for seed in 0..5 {
        let s = common::random_scenario(seed);
        let data = synthesize(&s, &s.reflection(), 0.3, seed).unwrap();
        let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data).unwrap();
        let q = stacked_steering(&ctx, &s.truth);
        let r = stacked_data(&ctx);
        let dense = common::dense_ls_reflection(&q, &r, s.params.energy_ratio());
        let closed = concentrate_b(&ctx, &s.truth);
        for (a, b) in closed.0.iter().zip(&dense) {
            assert!((a - b).norm() <= 1e-10 * b.norm().max(1e-12), "{a} vs {b}");
        }
        let value = objective(&ctx, &s.truth);
        let k = s.params.snapshot_count() as f64;
        assert!((value.positive_ll / k - projection_objective(&ctx, &s.truth)).abs() <= 1e-9 * value.positive_ll);
    }
}

#[test]
fn noiseless_grid_peaks_at_truth() {
    let s = preset("example1").unwrap();
    let ctx = noiseless(&s);
    let v = ParamId { axis: Axis::X, order: 1 };
    let a = ParamId { axis: Axis::X, order: 2 };
    let axis1 = GridAxis { param: v, start: 99.0, end: 101.0, count: 21 };
    let axis2 = GridAxis { param: a, start: -22.0, end: -18.0, count: 21 };
    let grid = objective_grid(&ctx, &s.truth, &axis1, &axis2).unwrap();
    assert_eq!(grid.argmax(), (10, 10));
    assert_eq!(grid.values.len(), 21 * 21);
    assert!(objective_grid(&ctx, &s.truth, &axis1, &GridAxis { count: 1, ..axis2.clone() }).is_err());
}

#[test]
fn zero_carrier_grid_is_flat() {
    let mut s = preset("example1").unwrap();
    s.params = s.params.with_carrier_frequency(0.0).unwrap();
    let data = synthesize(&s, &s.reflection(), 0.5, 1).unwrap();
    let ctx = ObjectiveContext::new(s.geometry.clone(), s.params.clone(), data).unwrap();
    let axis1 = GridAxis { param: ParamId { axis: Axis::X, order: 0 }, start: 9000.0, end: 9900.0, count: 5 };
    let axis2 = GridAxis { param: ParamId { axis: Axis::Y, order: 1 }, start: -50.0, end: 50.0, count: 4 };
    let grid = objective_grid(&ctx, &s.truth, &axis1, &axis2).unwrap();
    assert!(grid.values.iter().all(|v| *v == grid.values[0]));
}
