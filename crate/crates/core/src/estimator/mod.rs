//! Maximization of the concentrated likelihood over the motion coefficients.
//!
//! [`estimate`] runs a population search over a box, then polishes the winner
//! with a simplex descent on the concentrated negative log-likelihood. Both
//! stages work in coordinates normalized to the unit cube.

mod ga;
mod init;
mod simplex;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use init::{coarse_init, multilaterate, Fix, RangeEstimates};

use crate::crb::CrbResult;
use crate::error::{Error, Result};
use crate::likelihood::{concentrate_b, objective, ObjectiveContext, ObjectiveValue};
use crate::scene::{MotionCoefficients, ParamId};
use crate::signal::ReflectionVector;

/// Axis-aligned bounds on the free motion parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct SearchBox {
    template: MotionCoefficients,
    lower: Vec<f64>,
    upper: Vec<f64>,
}

impl SearchBox {
    /// `template` fixes the order and pinning; bounds follow its free-parameter order.
    pub fn new(template: &MotionCoefficients, lower: Vec<f64>, upper: Vec<f64>) -> Result<Self> {
        let n = template.free_len();
        if lower.len() != n || upper.len() != n {
            return Err(Error::InvalidBox(format!("expected {n} bounds per side")));
        }
        for (i, (lo, hi)) in lower.iter().zip(&upper).enumerate() {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::InvalidBox(format!("parameter {i}: need finite lower < upper, got [{lo}, {hi}]")));
            }
        }
        Ok(Self {
            template: template.clone(),
            lower,
            upper,
        })
    }

    pub fn around(center: &MotionCoefficients, half_widths: &[f64]) -> Result<Self> {
        let c = center.free_params();
        if half_widths.len() != c.len() {
            return Err(Error::InvalidBox(format!("expected {} half-widths", c.len())));
        }
        let lower = c.iter().zip(half_widths).map(|(c, h)| c - h).collect();
        let upper = c.iter().zip(half_widths).map(|(c, h)| c + h).collect();
        Self::new(center, lower, upper)
    }

    /// `center ± factor · crb_std` per parameter.
    pub fn crb_scaled(center: &MotionCoefficients, crb: &CrbResult, factor: f64) -> Result<Self> {
        let widths: Vec<f64> = center
            .param_ids()
            .iter()
            .map(|id| crb.std_of(*id).map(|s| s * factor))
            .collect::<Option<_>>()
            .ok_or_else(|| Error::InvalidBox("bound does not cover every free parameter".into()))?;
        Self::around(center, &widths)
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    pub fn lower(&self) -> &[f64] {
        &self.lower
    }

    pub fn upper(&self) -> &[f64] {
        &self.upper
    }

    pub fn param_ids(&self) -> Vec<ParamId> {
        self.template.param_ids()
    }

    pub fn center(&self) -> MotionCoefficients {
        self.from_unit(&vec![0.5; self.dim()])
    }

    pub fn contains(&self, motion: &MotionCoefficients) -> bool {
        motion
            .free_params()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .all(|(v, (lo, hi))| lo <= v && v <= hi)
    }

    pub fn from_unit(&self, u: &[f64]) -> MotionCoefficients {
        let values: Vec<f64> = u
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(t, (lo, hi))| (lo + t.clamp(0.0, 1.0) * (hi - lo)).clamp(*lo, *hi))
            .collect();
        self.template.with_free_params(&values)
    }

    pub fn to_unit(&self, motion: &MotionCoefficients) -> Vec<f64> {
        motion
            .free_params()
            .iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct OptimizerConfig {
    /// Independent population searches, each refined locally; the best wins.
    pub runs: usize,
    pub population: usize,
    pub generations: usize,
    /// Stop the population search after this many generations without
    /// improvement (0 disables).
    pub stall_generations: usize,
    pub elites: usize,
    /// Relative change of the concentrated negative log-likelihood at which
    /// the simplex stage stops.
    pub tolerance: f64,
    pub max_local_evaluations: usize,
    /// Initial simplex edge as a fraction of the box width.
    pub local_step: f64,
    /// Put the box center into the initial population. Meant for boxes
    /// centered on an independent initializer, not on the truth.
    pub seed_center: bool,
    pub seed: u64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self {
            runs: 4,
            population: 64,
            generations: 80,
            stall_generations: 40,
            elites: 2,
            tolerance: 1e-10,
            max_local_evaluations: 6000,
            local_step: 0.05,
            seed_center: false,
            seed: 0,
        }
    }
}

impl OptimizerConfig {
    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 || self.population < 4 || self.generations == 0 || self.max_local_evaluations == 0 {
            return Err(Error::Optimizer("runs >= 1, population >= 4 and positive budgets are required".into()));
        }
        if !(self.tolerance > 0.0) || !(self.local_step > 0.0 && self.local_step <= 1.0) {
            return Err(Error::Optimizer("tolerance must be > 0 and local_step in (0, 1]".into()));
        }
        if self.elites >= self.population {
            return Err(Error::Optimizer("elites must be fewer than the population".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct Diagnostics {
    /// Best positive log-likelihood of the population stage (`None` when skipped).
    pub global_best: Option<f64>,
    pub generations: usize,
    pub global_evaluations: usize,
    pub local_evaluations: usize,
    pub local_restarts: usize,
}

#[derive(Clone, Debug)]
pub struct Estimate {
    pub motion: MotionCoefficients,
    pub reflection: ReflectionVector,
    pub value: ObjectiveValue,
    pub diagnostics: Diagnostics,
}

fn finish(ctx: &ObjectiveContext, motion: MotionCoefficients, diagnostics: Diagnostics) -> Result<Estimate> {
    let value = objective(ctx, &motion);
    if !value.positive_ll.is_finite() {
        return Err(Error::Optimizer("no finite objective value found".into()));
    }
    Ok(Estimate {
        reflection: concentrate_b(ctx, &motion),
        motion,
        value,
        diagnostics,
    })
}

fn polish(ctx: &ObjectiveContext, search: &SearchBox, start: &[f64], cfg: &OptimizerConfig) -> simplex::SimplexOutcome {
    let opts = simplex::SimplexOptions {
        initial_step: cfg.local_step,
        tolerance: cfg.tolerance,
        max_evaluations: cfg.max_local_evaluations,
        max_restarts: 4,
    };
    simplex::minimize(start, &opts, |u| objective(ctx, &search.from_unit(u)).negative_ll)
}

/// Global search in `search`, then local refinement of the winner.
///
/// With `cfg.runs > 1` the two stages are repeated from independent seeds
/// and the best refined point is kept.
pub fn estimate(ctx: &ObjectiveContext, search: &SearchBox, cfg: &OptimizerConfig) -> Result<Estimate> {
    cfg.validate()?;
    let seeds = if cfg.seed_center {
        vec![vec![0.5; search.dim()]]
    } else {
        Vec::new()
    };
    let mut diagnostics = Diagnostics::default();
    let mut best: Option<(Vec<f64>, f64)> = None;
    for run in 0..cfg.runs {
        let run_cfg = OptimizerConfig {
            seed: cfg.seed ^ (run as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15),
            ..cfg.clone()
        };
        let global = ga::maximize(search.dim(), &run_cfg, &seeds, |u| {
            objective(ctx, &search.from_unit(u)).positive_ll
        });
        diagnostics.generations += global.generations;
        diagnostics.global_evaluations += global.evaluations;
        if !global.best_value.is_finite() {
            continue;
        }
        diagnostics.global_best = Some(diagnostics.global_best.map_or(global.best_value, |v| v.max(global.best_value)));
        let local = polish(ctx, search, &global.best, cfg);
        diagnostics.local_evaluations += local.evaluations;
        diagnostics.local_restarts += local.restarts;
        let global_neg = objective(ctx, &search.from_unit(&global.best)).negative_ll;
        let candidate = if local.best_value <= global_neg {
            (local.best, local.best_value)
        } else {
            (global.best, global_neg)
        };
        let wins = match &best {
            None => true,
            Some((point, value)) => {
                candidate.1 < *value || (candidate.1 == *value && center_distance(&candidate.0) < center_distance(point))
            }
        };
        if wins {
            best = Some(candidate);
        }
    }
    let Some((point, _)) = best else {
        return Err(Error::Optimizer("population search found no finite objective".into()));
    };
    finish(ctx, search.from_unit(&point), diagnostics)
}

fn center_distance(u: &[f64]) -> f64 {
    u.iter().map(|x| (x - 0.5).powi(2)).sum()
}

/// Local refinement only, starting from `start` (clamped into the box).
pub fn refine(
    ctx: &ObjectiveContext,
    search: &SearchBox,
    start: &MotionCoefficients,
    cfg: &OptimizerConfig,
) -> Result<Estimate> {
    cfg.validate()?;
    let local = polish(ctx, search, &search.to_unit(start), cfg);
    finish(
        ctx,
        search.from_unit(&local.best),
        Diagnostics {
            global_best: None,
            local_evaluations: local.evaluations,
            local_restarts: local.restarts,
            ..Diagnostics::default()
        },
    )
}

/// One axis of an objective grid: `count` evenly spaced values in `[start, end]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GridAxis {
    pub param: ParamId,
    pub start: f64,
    pub end: f64,
    pub count: usize,
}

impl GridAxis {
    pub fn value(&self, i: usize) -> f64 {
        self.start + (self.end - self.start) * i as f64 / (self.count - 1) as f64
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.value(i)).collect()
    }
}

/// Positive log-likelihood on a 2D grid. Row `i` is `axis1.value(i)`,
/// column `j` is `axis2.value(j)`; `values` is row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct ObjectiveGrid {
    pub axis1: GridAxis,
    pub axis2: GridAxis,
    pub values: Vec<f64>,
}

impl ObjectiveGrid {
    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.axis2.count + j]
    }

    /// `(row, column)` of the largest value.
    pub fn argmax(&self) -> (usize, usize) {
        let idx = self
            .values
            .iter()
            .enumerate()
            .max_by(|a, b| a.1.total_cmp(b.1))
            .map(|(i, _)| i)
            .unwrap_or(0);
        (idx / self.axis2.count, idx % self.axis2.count)
    }
}

pub fn objective_grid(
    ctx: &ObjectiveContext,
    fixed: &MotionCoefficients,
    axis1: &GridAxis,
    axis2: &GridAxis,
) -> Result<ObjectiveGrid> {
    let free = fixed.param_ids();
    for a in [axis1, axis2] {
        if a.count < 2 {
            return Err(Error::InvalidGrid(format!("{} needs at least 2 points", a.param.name())));
        }
        if !(a.start.is_finite() && a.end.is_finite()) || a.start == a.end {
            return Err(Error::InvalidGrid(format!("{} needs a finite, non-empty span", a.param.name())));
        }
        if !free.contains(&a.param) {
            return Err(Error::InvalidGrid(format!("{} is not a free parameter", a.param.name())));
        }
    }
    if axis1.param == axis2.param {
        return Err(Error::InvalidGrid("the two axes must differ".into()));
    }
    let values = (0..axis1.count * axis2.count)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / axis2.count, idx % axis2.count);
            let motion = fixed
                .with_param(axis1.param, axis1.value(i))
                .with_param(axis2.param, axis2.value(j));
            objective(ctx, &motion).positive_ll
        })
        .collect();
    Ok(ObjectiveGrid {
        axis1: axis1.clone(),
        axis2: axis2.clone(),
        values,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{AntennaGeometry, Axis, Position3, RadarParams, Scenario};
    use crate::signal::synthesize;

    fn scenario() -> Scenario {
        Scenario {
            name: "t".into(),
            geometry: AntennaGeometry::new(
                vec![Position3::planar(0.0, -5000.0), Position3::planar(0.0, 5000.0)],
                vec![Position3::planar(0.0, 0.0), Position3::planar(2500.0, 5000.0), Position3::planar(0.0, -3000.0)],
            )
            .unwrap(),
            params: RadarParams::new(3e8, 3e8, 0.02, 25, 1.0).unwrap(),
            truth: MotionCoefficients::planar(vec![9800.0, 100.0], vec![0.0, -30.0]).unwrap(),
            pulses: None,
            reflection_seed: 3,
        }
    }

    fn noiseless_ctx(s: &Scenario) -> ObjectiveContext {
        let set = synthesize(s, &s.reflection(), 0.0, 0).unwrap();
        ObjectiveContext::new(s.geometry.clone(), s.params.clone(), set).unwrap()
    }

    #[test]
    fn box_validation_and_mapping() {
        let s = scenario();
        assert!(SearchBox::new(&s.truth, vec![0.0; 4], vec![0.0; 4]).is_err());
        assert!(SearchBox::new(&s.truth, vec![0.0; 3], vec![1.0; 3]).is_err());
        let b = SearchBox::around(&s.truth, &[2.0, 1.0, 2.0, 1.0]).unwrap();
        assert_eq!(b.center(), s.truth);
        let u = vec![0.25, 1.0, 0.0, 0.5];
        let m = b.from_unit(&u);
        assert!(b.contains(&m));
        let back = b.to_unit(&m);
        for (a, c) in u.iter().zip(&back) {
            assert!((a - c).abs() < 1e-12);
        }
    }

    #[test]
    fn noiseless_estimate_hits_truth() {
        let s = scenario();
        let ctx = noiseless_ctx(&s);
        let b = SearchBox::around(&s.truth, &[3.0, 0.5, 3.0, 0.5]).unwrap();
        let cfg = OptimizerConfig {
            seed: 5,
            ..OptimizerConfig::default()
        };
        let est = estimate(&ctx, &b, &cfg).unwrap();
        for (a, t) in est.motion.free_params().iter().zip(s.truth.free_params()) {
            assert!((a - t).abs() < 1e-3, "{:?}", est.motion);
        }
        assert!(b.contains(&est.motion));
        assert_eq!(est.value, objective(&ctx, &est.motion));
        let again = estimate(&ctx, &b, &cfg).unwrap();
        assert_eq!(again.motion, est.motion);
    }

    #[test]
    fn collapsed_box_returns_truth() {
        let s = scenario();
        let ctx = noiseless_ctx(&s);
        let b = SearchBox::around(&s.truth, &[1e-9; 4]).unwrap();
        let cfg = OptimizerConfig {
            population: 8,
            generations: 2,
            ..OptimizerConfig::default()
        };
        let est = estimate(&ctx, &b, &cfg).unwrap();
        for (a, t) in est.motion.free_params().iter().zip(s.truth.free_params()) {
            assert!((a - t).abs() < 1e-8);
        }
    }

    #[test]
    fn grid_peak_and_degenerate_carrier() {
        let s = scenario();
        let ctx = noiseless_ctx(&s);
        let vx = GridAxis {
            param: ParamId { axis: Axis::X, order: 1 },
            start: 99.0,
            end: 101.0,
            count: 21,
        };
        let vy = GridAxis {
            param: ParamId { axis: Axis::Y, order: 1 },
            start: -31.0,
            end: -29.0,
            count: 11,
        };
        let g = objective_grid(&ctx, &s.truth, &vx, &vy).unwrap();
        assert_eq!(g.values.len(), 231);
        assert_eq!(g.argmax(), (10, 5));

        let flat = Scenario {
            params: s.params.with_carrier_frequency(0.0).unwrap(),
            ..s.clone()
        };
        let ctx0 = noiseless_ctx(&flat);
        let g0 = objective_grid(&ctx0, &flat.truth, &vx, &vy).unwrap();
        assert!(g0.values.iter().all(|v| (v - g0.values[0]).abs() <= 1e-12 * v.abs()));

        let bad = GridAxis { count: 1, ..vx.clone() };
        assert!(objective_grid(&ctx, &s.truth, &bad, &vy).is_err());
        assert!(objective_grid(&ctx, &s.truth, &vx, &vx).is_err());
        let pinned = GridAxis {
            param: ParamId { axis: Axis::Z, order: 0 },
            ..vx.clone()
        };
        assert!(objective_grid(&ctx, &s.truth, &pinned, &vy).is_err());
    }
}
