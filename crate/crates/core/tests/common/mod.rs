#![allow(dead_code)]

use mimo_motion::scene::{motion_basis, AntennaGeometry, MotionCoefficients, Position3, RadarParams, Scenario};
use mimo_motion::signal::{steering_matrix, ReflectionVector};
use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Small random scenario: at most three antennas of each kind, order at most 2.
pub fn random_scenario(seed: u64) -> Scenario {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let planar = rng.random_bool(0.5);
    let point = |rng: &mut ChaCha8Rng, scale: f64| {
        let z = if planar { 0.0 } else { rng.random_range(-scale..scale) };
        Position3::new(rng.random_range(-scale..scale), rng.random_range(-scale..scale), z)
    };
    let m = rng.random_range(1..=3);
    let n = rng.random_range(1..=3);
    let tx = (0..m).map(|_| point(&mut rng, 2000.0)).collect();
    let rx = (0..n).map(|_| point(&mut rng, 2000.0)).collect();
    let order = rng.random_range(0..=2);
    let axis = |rng: &mut ChaCha8Rng, offset: f64| -> Vec<f64> {
        let spread = [1000.0, 50.0, 10.0];
        (0..=order)
            .map(|q| if q == 0 { offset } else { 0.0 } + rng.random_range(-spread[q]..spread[q]))
            .collect()
    };
    let cx = axis(&mut rng, 6000.0);
    let cy = axis(&mut rng, 3000.0);
    let truth = if planar {
        MotionCoefficients::planar(cx, cy).unwrap()
    } else {
        let cz = axis(&mut rng, 500.0);
        MotionCoefficients::new(cx, cy, cz).unwrap()
    };
    let params = RadarParams::new(
        rng.random_range(1e8..1e9),
        3e8,
        rng.random_range(0.005..0.05),
        rng.random_range(5..=20),
        rng.random_range(0.5..2.0),
    )
    .unwrap();
    Scenario {
        name: format!("random-{seed}"),
        geometry: AntennaGeometry::new(tx, rx).unwrap(),
        params,
        truth,
        pulses: None,
        reflection_seed: seed ^ 0xABCD,
    }
}

/// Central-difference step per polynomial order (m, m/s, m/s², ...).
pub fn fd_step(order: usize) -> f64 {
    [1e-3, 1e-4, 1e-5].get(order).copied().unwrap_or(1e-6)
}

/// `|p + delta − a| − |p − a|` without cancellation.
fn range_change(p: &Position3, delta: [f64; 3], a: &Position3) -> f64 {
    let r = [p.x - a.x, p.y - a.y, p.z - a.z];
    let moved = Position3::new(p.x + delta[0], p.y + delta[1], p.z + delta[2]);
    let num: f64 = (0..3).map(|i| delta[i] * (2.0 * r[i] + delta[i])).sum();
    num / (moved.distance(a) + p.distance(a))
}

/// FIM over free motion parameters then `[Re b, Im b]`, from numerically
/// differentiated noiseless means `sqrt(E/M) T(k) b`.
///
/// Mean differences are formed as `μ0 (exp(−j2π f_c Δτ) − 1)` with the
/// path-length change computed directly, so tiny steps do not lose digits
/// to the kilometre-scale ranges.
pub fn fd_fim(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    b: &ReflectionVector,
    noise_variance: f64,
) -> DMatrix<f64> {
    let ids = motion.param_ids();
    let mn = geometry.path_count();
    let m_count = geometry.tx_count();
    let p = ids.len();
    let dim = p + 2 * mn;
    let amp = params.energy_ratio();
    let wn = params.wavenumber();
    let mut f = DMatrix::zeros(dim, dim);
    for k in 0..params.snapshot_count() {
        let t_k = params.snapshot_time(k);
        let pos = motion.position_at(t_k);
        let t = steering_matrix(geometry, motion, params, k);
        let mean: Vec<Complex64> = t.diag.iter().zip(&b.0).map(|(ti, bi)| ti * bi * amp).collect();
        // Mean change when the coefficient moves by `step`.
        let shift = |id: &mimo_motion::scene::ParamId, step: f64| -> Vec<Complex64> {
            let mut delta = [0.0; 3];
            delta[id.axis as usize] = step * motion_basis(t_k, id.order)[id.order];
            (0..mn)
                .map(|i| {
                    let (m, n) = (i % m_count, i / m_count);
                    let dd = range_change(&pos, delta, &geometry.transmitters()[m])
                        + range_change(&pos, delta, &geometry.receivers()[n]);
                    let x = -std::f64::consts::TAU * wn * dd;
                    let s = (0.5 * x).sin();
                    mean[i] * Complex64::new(-2.0 * s * s, x.sin())
                })
                .collect()
        };
        let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(dim);
        for id in &ids {
            let central = |h: f64| -> Vec<Complex64> {
                let (up, down) = (shift(id, h), shift(id, -h));
                up.iter().zip(&down).map(|(a, c)| (a - c) / (2.0 * h)).collect()
            };
            // Richardson extrapolation over 2h and h cancels the O(h²) term,
            // which matters at short wavelengths.
            let h = fd_step(id.order);
            let (wide, narrow) = (central(2.0 * h), central(h));
            cols.push(wide.iter().zip(&narrow).map(|(w, n)| (4.0 * n - w) / 3.0).collect());
        }
        for unit in [Complex64::new(1.0, 0.0), Complex64::new(0.0, 1.0)] {
            for i in 0..mn {
                let mut col = vec![Complex64::new(0.0, 0.0); mn];
                col[i] = t.diag[i] * unit * amp;
                cols.push(col);
            }
        }
        for i in 0..dim {
            for j in 0..dim {
                let s: Complex64 = cols[i].iter().zip(&cols[j]).map(|(a, c)| a.conj() * c).sum();
                f[(i, j)] += 2.0 * s.re / noise_variance;
            }
        }
    }
    f
}

/// Largest `|A_ij − B_ij| / sqrt(B_ii B_jj)`.
pub fn normalized_max_error(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    let mut worst: f64 = 0.0;
    for i in 0..b.nrows() {
        for j in 0..b.ncols() {
            let norm = (b[(i, i)] * b[(j, j)]).sqrt();
            worst = worst.max((a[(i, j)] - b[(i, j)]).abs() / norm);
        }
    }
    worst
}

/// `argmin_b Σ_k ‖r(k) − sqrt(E/M) T(k) b‖²` by a dense least-squares solve.
pub fn dense_ls_reflection(
    q: &DMatrix<Complex64>,
    r: &nalgebra::DVector<Complex64>,
    amp: f64,
) -> Vec<Complex64> {
    let a = q * Complex64::new(amp, 0.0);
    let sol = a.svd(true, true).solve(r, 1e-14).unwrap();
    sol.iter().copied().collect()
}
