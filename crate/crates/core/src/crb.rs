//! Exact Fisher information and Cramér-Rao bound for `(ψ, Re b, Im b)`.
//!
//! The mean of snapshot `k` is `μ(k) = sqrt(E/M) T(k) b`. Its derivative with
//! respect to motion coefficient `(axis, q)` is `sqrt(E/M) (T ⊙ Z_axis) h_q b`,
//! where `Z_axis` carries the direction-cosine sums of each path and
//! `h = [1, t, t²/2!, ...]`. The noise variance is information-orthogonal to
//! `(ψ, b)` and is left out of the inverted matrix.

use std::path::Path;

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::scene::{eval_position, motion_basis, AntennaGeometry, MotionCoefficients, ParamId, RadarParams, Scenario};
use crate::signal::{steering_matrix, ReflectionVector};

/// Diagonals of `Z_x(k)`, `Z_y(k)`, `Z_z(k)` in path-index order.
#[derive(Clone, Debug, PartialEq)]
pub struct ZMatrices {
    pub zx: Vec<Complex64>,
    pub zy: Vec<Complex64>,
    pub zz: Vec<Complex64>,
}

impl ZMatrices {
    fn axis(&self, i: usize) -> &[Complex64] {
        match i {
            0 => &self.zx,
            1 => &self.zy,
            _ => &self.zz,
        }
    }
}

pub fn z_matrices(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    k: usize,
) -> Result<ZMatrices> {
    let pos = eval_position(motion, params, k);
    crate::scene::check_ranges(geometry, &pos, k)?;
    let factor = Complex64::new(0.0, -2.0 * std::f64::consts::PI * params.wavenumber());
    let tx_cos: Vec<[f64; 3]> = geometry
        .transmitters()
        .iter()
        .map(|p| {
            let d = pos.distance(p);
            [(pos.x - p.x) / d, (pos.y - p.y) / d, (pos.z - p.z) / d]
        })
        .collect();
    let mn = geometry.path_count();
    let mut z = ZMatrices {
        zx: Vec::with_capacity(mn),
        zy: Vec::with_capacity(mn),
        zz: Vec::with_capacity(mn),
    };
    for q in geometry.receivers() {
        let d = pos.distance(q);
        let rx = [(pos.x - q.x) / d, (pos.y - q.y) / d, (pos.z - q.z) / d];
        for t in &tx_cos {
            z.zx.push(factor * (t[0] + rx[0]));
            z.zy.push(factor * (t[1] + rx[1]));
            z.zz.push(factor * (t[2] + rx[2]));
        }
    }
    Ok(z)
}

/// `B(k) = h^T ⊗ b`, an `MN × (Q+1)` matrix: column `q` is `h_q b`.
pub fn b_matrix(b: &ReflectionVector, params: &RadarParams, order: usize, k: usize) -> DMatrix<Complex64> {
    let h = motion_basis(params.snapshot_time(k), order);
    DMatrix::from_fn(b.len(), order + 1, |i, q| b.0[i] * h[q])
}

/// Neumaier-compensated running sum, one accumulator per matrix entry.
struct CompensatedMatrix {
    sum: DMatrix<f64>,
    carry: DMatrix<f64>,
}

impl CompensatedMatrix {
    fn zeros(r: usize, c: usize) -> Self {
        Self {
            sum: DMatrix::zeros(r, c),
            carry: DMatrix::zeros(r, c),
        }
    }

    fn add(&mut self, i: usize, j: usize, v: f64) {
        let s = self.sum[(i, j)];
        let t = s + v;
        if s.abs() >= v.abs() {
            self.carry[(i, j)] += (s - t) + v;
        } else {
            self.carry[(i, j)] += (v - t) + s;
        }
        self.sum[(i, j)] = t;
    }

    fn finish(self) -> DMatrix<f64> {
        self.sum + self.carry
    }
}

/// Unscaled FIM blocks over the full `3(Q+1)` motion vector and `2MN`
/// real reflection parameters. Multiply by `scale = 2E/(σ²M)` to get `F`.
#[derive(Clone, Debug)]
pub struct FimBlocks {
    pub psi_psi: DMatrix<f64>,
    pub psi_b: DMatrix<f64>,
    pub b_b: DMatrix<f64>,
    pub scale: f64,
    /// Unscaled information on the full motion vector after eliminating the
    /// reflection parameters, `psi_psi − psi_b b_b⁻¹ psi_bᵀ`. Accumulated as
    /// sums of per-path deviations from the snapshot mean, which avoids the
    /// cancellation of forming the difference explicitly.
    pub psi_given_b: DMatrix<f64>,
    /// Identifiers for the rows of `psi_psi`, full `[x, y, z]` stacking.
    pub param_ids: Vec<ParamId>,
    /// Indices into `param_ids` that are estimated (z removed when planar).
    pub free: Vec<usize>,
}

impl FimBlocks {
    /// Scaled `F` over free motion parameters then `[Re b, Im b]`.
    pub fn assemble(&self) -> DMatrix<f64> {
        let p = self.free.len();
        let nb = self.b_b.nrows();
        let mut f = DMatrix::zeros(p + nb, p + nb);
        for (i, &fi) in self.free.iter().enumerate() {
            for (j, &fj) in self.free.iter().enumerate() {
                f[(i, j)] = self.psi_psi[(fi, fj)];
            }
            for j in 0..nb {
                f[(i, p + j)] = self.psi_b[(fi, j)];
                f[(p + j, i)] = self.psi_b[(fi, j)];
            }
        }
        f.view_mut((p, p), (nb, nb)).copy_from(&self.b_b);
        f * self.scale
    }

    pub fn free_param_ids(&self) -> Vec<ParamId> {
        self.free.iter().map(|&i| self.param_ids[i]).collect()
    }
}

pub fn fim(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    b: &ReflectionVector,
    noise_variance: f64,
) -> Result<FimBlocks> {
    if !(noise_variance.is_finite() && noise_variance > 0.0) {
        return Err(Error::InvalidScenario(format!(
            "Fisher information needs a finite positive noise variance, got {noise_variance}"
        )));
    }
    if b.len() != geometry.path_count() {
        return Err(Error::InvalidScenario("reflection vector length does not match path count".into()));
    }
    let mn = geometry.path_count();
    let width = motion.order() + 1;
    let np = 3 * width;
    let mut psi_psi = CompensatedMatrix::zeros(np, np);
    let mut psi_b = CompensatedMatrix::zeros(np, 2 * mn);
    let mut b_b = CompensatedMatrix::zeros(2 * mn, 2 * mn);
    let j = Complex64::new(0.0, 1.0);
    // Phase-free derivatives Z h b per snapshot, kept for the centered sums.
    let mut phase_free: Vec<DMatrix<Complex64>> = Vec::with_capacity(params.snapshot_count());

    for k in 0..params.snapshot_count() {
        let t = steering_matrix(geometry, motion, params, k);
        let z = z_matrices(geometry, motion, params, k)?;
        let bk = b_matrix(b, params, motion.order(), k);
        // Columns of T̃(k) B̃(k): derivative of T(k) b per motion coefficient.
        let d = DMatrix::from_fn(mn, np, |i, c| {
            let (axis, q) = (c / width, c % width);
            t.diag[i] * z.axis(axis)[i] * bk[(i, q)]
        });
        // T(k) J: columns for Re b then Im b.
        let tj = DMatrix::from_fn(mn, 2 * mn, |i, c| {
            if c % mn != i {
                Complex64::new(0.0, 0.0)
            } else if c < mn {
                t.diag[i]
            } else {
                j * t.diag[i]
            }
        });
        phase_free.push(DMatrix::from_fn(mn, np, |i, c| {
            let (axis, q) = (c / width, c % width);
            z.axis(axis)[i] * bk[(i, q)]
        }));
        let dh = d.adjoint();
        let pp = &dh * &d;
        let pb = &dh * &tj;
        let bb = tj.adjoint() * &tj;
        for r in 0..np {
            for c in 0..np {
                psi_psi.add(r, c, pp[(r, c)].re);
            }
            for c in 0..2 * mn {
                psi_b.add(r, c, pb[(r, c)].re);
            }
        }
        for r in 0..2 * mn {
            for c in 0..2 * mn {
                b_b.add(r, c, bb[(r, c)].re);
            }
        }
    }

    let k_count = phase_free.len() as f64;
    let mean = phase_free.iter().fold(DMatrix::zeros(mn, np), |acc, d| acc + d) / Complex64::new(k_count, 0.0);
    let mut psi_given_b = CompensatedMatrix::zeros(np, np);
    for d in &phase_free {
        let centered = d - &mean;
        let g = centered.adjoint() * &centered;
        for r in 0..np {
            for c in 0..np {
                psi_given_b.add(r, c, g[(r, c)].re);
            }
        }
    }

    let param_ids: Vec<ParamId> = crate::scene::Axis::ALL
        .iter()
        .flat_map(|&axis| (0..width).map(move |order| ParamId { axis, order }))
        .collect();
    let free = if motion.is_planar() {
        (0..2 * width).collect()
    } else {
        (0..np).collect()
    };
    Ok(FimBlocks {
        psi_psi: psi_psi.finish(),
        psi_b: psi_b.finish(),
        b_b: b_b.finish(),
        psi_given_b: psi_given_b.finish(),
        scale: 2.0 * params.energy_ratio().powi(2) / noise_variance,
        param_ids,
        free,
    })
}

/// Inverse FIM and the per-parameter bound on motion coefficients.
#[derive(Clone, Debug)]
pub struct CrbResult {
    pub param_ids: Vec<ParamId>,
    /// Inverse of the assembled FIM (free motion parameters, then `Re b`, `Im b`).
    pub covariance: DMatrix<f64>,
    /// Square roots of the motion-parameter diagonal of `covariance`.
    pub psi_std: Vec<f64>,
}

impl CrbResult {
    pub fn std_of(&self, id: ParamId) -> Option<f64> {
        self.param_ids.iter().position(|p| *p == id).map(|i| self.psi_std[i])
    }

    /// Motion-parameter block of the bound.
    pub fn psi_covariance(&self) -> DMatrix<f64> {
        let p = self.param_ids.len();
        self.covariance.view((0, 0), (p, p)).into_owned()
    }

    /// CSV with header `parameter,unit,crb_std`.
    pub fn write_csv<W: std::io::Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["parameter", "unit", "crb_std"])?;
        for (id, s) in self.param_ids.iter().zip(&self.psi_std) {
            out.write_record([id.name(), id.unit(), s.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn save_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_csv(std::fs::File::create(path)?)
    }
}

/// Inverts `S` after scaling it to unit diagonal; reports rank deficiency.
fn equilibrated_inverse(s: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = s.nrows();
    let diag: Vec<f64> = (0..n).map(|i| s[(i, i)]).collect();
    let zero_diag = diag.iter().filter(|d| !(**d > 0.0)).count();
    if zero_diag > 0 {
        return Err(Error::RankDeficient { null_dim: zero_diag, dim: n });
    }
    let inv_sqrt: Vec<f64> = diag.iter().map(|d| 1.0 / d.sqrt()).collect();
    let scaled = DMatrix::from_fn(n, n, |i, j| s[(i, j)] * inv_sqrt[i] * inv_sqrt[j]);
    let scaled = (&scaled + scaled.transpose()) * 0.5;
    let eig = SymmetricEigen::new(scaled);
    let max = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let tol = max * 1e-13 * n as f64;
    let null_dim = eig.eigenvalues.iter().filter(|&&l| l <= tol).count();
    if null_dim > 0 {
        return Err(Error::RankDeficient { null_dim, dim: n });
    }
    let inv_eig = DMatrix::from_diagonal(&eig.eigenvalues.map(|l| 1.0 / l));
    let scaled_inv = &eig.eigenvectors * inv_eig * eig.eigenvectors.transpose();
    Ok(DMatrix::from_fn(n, n, |i, j| scaled_inv[(i, j)] * inv_sqrt[i] * inv_sqrt[j]))
}

/// Inverts the full assembled FIM (nuisance reflection parameters included)
/// by block elimination of the reflection block.
pub fn crb_psi(blocks: &FimBlocks) -> Result<CrbResult> {
    let f = blocks.assemble();
    let p = blocks.free.len();
    let total = f.nrows();
    let bmat = f.view((0, p), (p, total - p)).into_owned();
    let d = f.view((p, p), (total - p, total - p)).into_owned();

    let d_inv = equilibrated_inverse(&d).map_err(|e| match e {
        Error::RankDeficient { null_dim, .. } => Error::RankDeficient { null_dim, dim: total },
        other => other,
    })?;
    let bd = &bmat * &d_inv;
    let p_ids = &blocks.free;
    let schur = DMatrix::from_fn(p, p, |i, j| blocks.psi_given_b[(p_ids[i], p_ids[j])] * blocks.scale);
    let s_inv = equilibrated_inverse(&schur).map_err(|e| match e {
        Error::RankDeficient { null_dim, .. } => Error::RankDeficient { null_dim, dim: total },
        other => other,
    })?;
    let top_right = -(&s_inv * &bd);
    let bottom_right = &d_inv + bd.transpose() * &s_inv * &bd;

    let mut cov = DMatrix::zeros(total, total);
    cov.view_mut((0, 0), (p, p)).copy_from(&s_inv);
    cov.view_mut((0, p), (p, total - p)).copy_from(&top_right);
    cov.view_mut((p, 0), (total - p, p)).copy_from(&top_right.transpose());
    cov.view_mut((p, p), (total - p, total - p)).copy_from(&bottom_right);

    let psi_std = (0..p).map(|i| cov[(i, i)].max(0.0).sqrt()).collect();
    Ok(CrbResult {
        param_ids: blocks.free_param_ids(),
        covariance: cov,
        psi_std,
    })
}

/// Bound for the scenario's true motion and frozen reflection vector.
pub fn scenario_crb(scenario: &Scenario, noise_variance: f64) -> Result<CrbResult> {
    let b = scenario.reflection();
    crb_psi(&fim(&scenario.geometry, &scenario.truth, &scenario.params, &b, noise_variance)?)
}
