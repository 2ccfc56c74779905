//! Coarse initialization from per-receiver range measurements:
//! multilateration per snapshot, then per-axis weighted polynomial regression.

use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha20Rng;
use rand_distr::{Distribution, Normal};

use crate::error::{Error, Result};
use crate::scene::{eval_position, motion_basis, AntennaGeometry, MotionCoefficients, Position3, RadarParams};

const GAUSS_NEWTON_ITERATIONS: usize = 50;

/// Range from each receiver to the target, per snapshot (`ranges[k][n]`).
#[derive(Clone, Debug, PartialEq)]
pub struct RangeEstimates {
    pub ranges: Vec<Vec<f64>>,
    /// Standard deviation of each range measurement, meters.
    pub noise_std: f64,
}

impl RangeEstimates {
    /// Ranges from the true motion plus i.i.d. Gaussian error.
    pub fn simulate(
        geometry: &AntennaGeometry,
        motion: &MotionCoefficients,
        params: &RadarParams,
        noise_std: f64,
        seed: u64,
    ) -> Result<Self> {
        if !(noise_std.is_finite() && noise_std >= 0.0) {
            return Err(Error::NonFinite("range noise"));
        }
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let normal = Normal::new(0.0, noise_std.max(f64::MIN_POSITIVE)).expect("valid normal");
        let ranges = (0..params.snapshot_count())
            .map(|k| {
                let pos = eval_position(motion, params, k);
                geometry
                    .receivers()
                    .iter()
                    .map(|q| {
                        let e = if noise_std > 0.0 { normal.sample(&mut rng) } else { 0.0 };
                        pos.distance(q) + e
                    })
                    .collect()
            })
            .collect();
        Ok(Self { ranges, noise_std })
    }
}

/// Least-squares fix of one snapshot and the covariance of that fix.
#[derive(Clone, Debug)]
pub struct Fix {
    pub position: Position3,
    /// `σ_r² (JᵀJ)⁻¹` over the solved axes (2×2 or 3×3).
    pub covariance: DMatrix<f64>,
}

fn affine_rank(points: &[Position3], dims: usize) -> usize {
    let n = points.len();
    let coords = |p: &Position3| [p.x, p.y, p.z];
    let mut centroid = [0.0; 3];
    for p in points {
        for (c, v) in centroid.iter_mut().zip(coords(p)) {
            *c += v / n as f64;
        }
    }
    let m = DMatrix::from_fn(n, dims, |i, j| coords(&points[i])[j] - centroid[j]);
    let sv = m.singular_values();
    let max = sv.iter().cloned().fold(0.0, f64::max);
    sv.iter().filter(|&&s| s > max * 1e-9 && s > 0.0).count()
}

/// Gauss-Newton on `Σ_n (‖L − q_n‖ − r_n)²`, started at the receiver centroid.
pub fn multilaterate(receivers: &[Position3], ranges: &[f64], dims: usize, noise_std: f64) -> Result<Fix> {
    assert!(dims == 2 || dims == 3, "dims must be 2 or 3");
    if receivers.len() < dims + 1 {
        return Err(Error::DegenerateGeometry(format!(
            "{}D multilateration needs at least {} receivers, got {}",
            dims,
            dims + 1,
            receivers.len()
        )));
    }
    if affine_rank(receivers, dims) < dims {
        return Err(Error::DegenerateGeometry(format!(
            "receivers do not span {dims} dimensions (rank deficient)"
        )));
    }
    let coords = |p: &Position3| [p.x, p.y, p.z];
    let n = receivers.len() as f64;
    let mut x = [0.0; 3];
    for p in receivers {
        for j in 0..dims {
            x[j] += coords(p)[j] / n;
        }
    }
    let residuals = |x: &[f64; 3]| -> (DVector<f64>, DMatrix<f64>) {
        let mut r = DVector::zeros(receivers.len());
        let mut jac = DMatrix::zeros(receivers.len(), dims);
        for (i, q) in receivers.iter().enumerate() {
            let qc = coords(q);
            let d = (0..dims).map(|j| (x[j] - qc[j]).powi(2)).sum::<f64>().sqrt();
            r[i] = d - ranges[i];
            for j in 0..dims {
                jac[(i, j)] = if d > 0.0 { (x[j] - qc[j]) / d } else { 0.0 };
            }
        }
        (r, jac)
    };

    let (mut r, mut jac) = residuals(&x);
    let mut cost = r.norm_squared();
    for _ in 0..GAUSS_NEWTON_ITERATIONS {
        let Some(step) = (jac.transpose() * &jac).cholesky().map(|c| c.solve(&(jac.transpose() * &r))) else {
            break;
        };
        // Halve the step until the cost does not increase.
        let mut t = 1.0;
        let mut accepted = false;
        for _ in 0..30 {
            let mut trial = x;
            for j in 0..dims {
                trial[j] -= t * step[j];
            }
            let (tr, tj) = residuals(&trial);
            let tc = tr.norm_squared();
            if tc <= cost {
                x = trial;
                r = tr;
                jac = tj;
                cost = tc;
                accepted = true;
                break;
            }
            t *= 0.5;
        }
        let scale = 1.0 + x.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !accepted || t * step.norm() < 1e-12 * scale {
            break;
        }
    }
    let info = jac.transpose() * &jac;
    let inv = info
        .clone()
        .try_inverse()
        .filter(|_| info.determinant().abs() > 0.0)
        .ok_or_else(|| Error::DegenerateGeometry("multilateration Jacobian is rank deficient".into()))?;
    let position = Position3::new(x[0], x[1], if dims == 3 { x[2] } else { 0.0 });
    Ok(Fix {
        position,
        covariance: inv * noise_std.powi(2),
    })
}

/// Coarse motion coefficients from range measurements.
///
/// Each snapshot is multilaterated, then every axis is fit with the
/// factorial-weighted polynomial basis, weighting snapshot `k` by the inverse
/// variance of its fix along that axis (uniform weights for exact ranges).
pub fn coarse_init(
    ranges: &RangeEstimates,
    geometry: &AntennaGeometry,
    params: &RadarParams,
    order: usize,
    planar: bool,
) -> Result<MotionCoefficients> {
    let k_count = ranges.ranges.len();
    if k_count < order + 1 {
        return Err(Error::TooFewSnapshots {
            needed: order + 1,
            got: k_count,
        });
    }
    if ranges.ranges.iter().any(|r| r.len() != geometry.rx_count()) {
        return Err(Error::InvalidScenario("one range per receiver is required at every snapshot".into()));
    }
    let dims = if planar { 2 } else { 3 };
    let fixes = ranges
        .ranges
        .iter()
        .map(|r| multilaterate(geometry.receivers(), r, dims, ranges.noise_std))
        .collect::<Result<Vec<_>>>()?;

    let basis = DMatrix::from_fn(k_count, order + 1, |k, q| motion_basis(params.snapshot_time(k), order)[q]);
    let mut axes: Vec<Vec<f64>> = Vec::with_capacity(3);
    for axis in 0..dims {
        let weights: Vec<f64> = fixes
            .iter()
            .map(|f| {
                let v = f.covariance[(axis, axis)];
                if ranges.noise_std > 0.0 && v > 0.0 {
                    1.0 / v.sqrt()
                } else {
                    1.0
                }
            })
            .collect();
        let a = DMatrix::from_fn(k_count, order + 1, |k, q| basis[(k, q)] * weights[k]);
        let y = DVector::from_fn(k_count, |k, _| {
            let p = &fixes[k].position;
            [p.x, p.y, p.z][axis] * weights[k]
        });
        let coeffs = a
            .svd(true, true)
            .solve(&y, 1e-14)
            .map_err(|e| Error::DegenerateGeometry(e.to_string()))?;
        axes.push(coeffs.iter().copied().collect());
    }
    if planar {
        MotionCoefficients::planar(axes.remove(0), axes.remove(0))
    } else {
        let (x, y, z) = (axes.remove(0), axes.remove(0), axes.remove(0));
        MotionCoefficients::new(x, y, z)
    }
}
