//! Concentrated maximum-likelihood objective.
//!
//! With the reflection vector eliminated in closed form, the negative
//! log-likelihood of `ψ` is `Σ_k ‖r(k)‖² − ‖Σ_k T^H(k) r(k)‖² / K`, so the
//! estimator maximizes the "positive" term `‖Σ_k T^H(k) r(k)‖²`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::{AntennaGeometry, MotionCoefficients, RadarParams};
use crate::signal::{phase_term, steering_matrix, ReflectionVector, SnapshotSet};

/// Read-only data needed to evaluate the objective at any candidate `ψ`.
#[derive(Clone, Debug)]
pub struct ObjectiveContext {
    geometry: AntennaGeometry,
    params: RadarParams,
    snapshots: SnapshotSet,
    total_energy: f64,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ObjectiveValue {
    /// `‖Σ_k T^H(k) r(k)‖²`.
    pub positive_ll: f64,
    /// Concentrated negative log-likelihood `Σ_k ‖r(k)‖² − positive_ll / K`.
    pub negative_ll: f64,
}

impl ObjectiveContext {
    pub fn new(geometry: AntennaGeometry, params: RadarParams, snapshots: SnapshotSet) -> Result<Self> {
        if snapshots.tx_count() != geometry.tx_count() || snapshots.rx_count() != geometry.rx_count() {
            return Err(Error::SnapshotFormat(format!(
                "snapshots are {}x{} paths, geometry is {}x{}",
                snapshots.tx_count(),
                snapshots.rx_count(),
                geometry.tx_count(),
                geometry.rx_count()
            )));
        }
        if snapshots.len() != params.snapshot_count() {
            return Err(Error::SnapshotFormat(format!(
                "{} snapshots but radar parameters expect {}",
                snapshots.len(),
                params.snapshot_count()
            )));
        }
        let total_energy = snapshots.total_energy();
        Ok(Self {
            geometry,
            params,
            snapshots,
            total_energy,
        })
    }

    pub fn geometry(&self) -> &AntennaGeometry {
        &self.geometry
    }

    pub fn params(&self) -> &RadarParams {
        &self.params
    }

    pub fn snapshots(&self) -> &SnapshotSet {
        &self.snapshots
    }

    pub fn total_energy(&self) -> f64 {
        self.total_energy
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshots.len()
    }

    /// `Σ_k T^H(k) r(k)` for the candidate motion.
    pub fn correlate(&self, motion: &MotionCoefficients) -> Vec<Complex64> {
        let mn = self.geometry.path_count();
        let wn = self.params.wavenumber();
        let mut acc = vec![Complex64::new(0.0, 0.0); mn];
        let mut lengths = vec![0.0; mn];
        let mut scratch = Vec::with_capacity(self.geometry.tx_count());
        for (k, r) in self.snapshots.snapshots().iter().enumerate() {
            let pos = motion.position_at(self.params.snapshot_time(k));
            self.geometry.path_lengths_into(&pos, &mut scratch, &mut lengths);
            for ((a, &len), rk) in acc.iter_mut().zip(&lengths).zip(r) {
                *a += phase_term(len, wn).conj() * rk;
            }
        }
        acc
    }
}

/// Closed-form reflection estimate `b̂ = sqrt(M/E) Σ_k T^H(k) r(k) / K`.
pub fn concentrate_b(ctx: &ObjectiveContext, motion: &MotionCoefficients) -> ReflectionVector {
    let scale = 1.0 / (ctx.snapshot_count() as f64 * ctx.params().energy_ratio());
    ReflectionVector(ctx.correlate(motion).into_iter().map(|s| s * scale).collect())
}

pub fn objective(ctx: &ObjectiveContext, motion: &MotionCoefficients) -> ObjectiveValue {
    let positive_ll: f64 = ctx.correlate(motion).iter().map(|s| s.norm_sqr()).sum();
    ObjectiveValue {
        positive_ll,
        negative_ll: ctx.total_energy() - positive_ll / ctx.snapshot_count() as f64,
    }
}

/// `Σ_k ‖r(k) − sqrt(E/M) T(k) b‖²` for arbitrary `b`.
pub fn negative_ll(ctx: &ObjectiveContext, motion: &MotionCoefficients, b: &ReflectionVector) -> f64 {
    let amp = ctx.params().energy_ratio();
    ctx.snapshots()
        .snapshots()
        .iter()
        .enumerate()
        .map(|(k, r)| {
            let t = steering_matrix(ctx.geometry(), motion, ctx.params(), k);
            r.iter()
                .zip(&t.diag)
                .zip(&b.0)
                .map(|((rk, tk), bk)| (rk - amp * tk * bk).norm_sqr())
                .sum::<f64>()
        })
        .sum()
}

/// Stacked `Q = [T(0); ...; T(K−1)]` as a dense `KMN × MN` matrix.
pub fn stacked_steering(ctx: &ObjectiveContext, motion: &MotionCoefficients) -> DMatrix<Complex64> {
    let mn = ctx.geometry().path_count();
    let k_count = ctx.snapshot_count();
    let mut q = DMatrix::zeros(k_count * mn, mn);
    for k in 0..k_count {
        let t = steering_matrix(ctx.geometry(), motion, ctx.params(), k);
        for (i, v) in t.diag.iter().enumerate() {
            q[(k * mn + i, i)] = *v;
        }
    }
    q
}

pub fn stacked_data(ctx: &ObjectiveContext) -> DVector<Complex64> {
    DVector::from_iterator(
        ctx.snapshot_count() * ctx.geometry().path_count(),
        ctx.snapshots().snapshots().iter().flatten().copied(),
    )
}

/// Projection form `r̃^H Q (Q^H Q)^{-1} Q^H r̃`, built densely.
///
/// Equal to `objective(..).positive_ll / K`; kept as an independent check of
/// the compact form, not for optimization.
pub fn projection_objective(ctx: &ObjectiveContext, motion: &MotionCoefficients) -> f64 {
    let q = stacked_steering(ctx, motion);
    let r = stacked_data(ctx);
    let qh = q.adjoint();
    let gram = &qh * &q;
    let gram_inv = gram.try_inverse().expect("Q^H Q is K times identity");
    let projected = &q * (gram_inv * (&qh * &r));
    r.dotc(&projected).re
}
