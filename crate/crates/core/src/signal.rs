//! Post-matched-filter signal model: diagonal steering matrices and noisy
//! virtual snapshots `r(k) = sqrt(E/M) T(k) b + w(k)`.

use std::f64::consts::PI;
use std::fs::File;
use std::io::{BufReader, BufWriter, Read, Write};
use std::path::Path;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scene::{eval_position, AntennaGeometry, MotionCoefficients, RadarParams, Scenario};

/// Unit-modulus phase term `exp(-j 2π f_c τ)` for a path of the given length.
///
/// The cycle count is reduced to `[-0.5, 0.5]` before the trig call so the
/// phase keeps full precision at ranges of many wavelengths.
#[inline]
pub fn phase_term(path_length: f64, wavenumber: f64) -> Complex64 {
    let cycles = path_length * wavenumber;
    let frac = cycles - cycles.round();
    let (s, c) = (-2.0 * PI * frac).sin_cos();
    Complex64::new(c, s)
}

/// Diagonal of `T(k)`, indexed by path `n * M + m`.
#[derive(Clone, Debug, PartialEq)]
pub struct SteeringMatrix {
    pub snapshot: usize,
    pub diag: Vec<Complex64>,
}

impl SteeringMatrix {
    pub fn len(&self) -> usize {
        self.diag.len()
    }

    pub fn is_empty(&self) -> bool {
        self.diag.is_empty()
    }
}

pub fn steering_matrix(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    k: usize,
) -> SteeringMatrix {
    let pos = eval_position(motion, params, k);
    let mut scratch = Vec::with_capacity(geometry.tx_count());
    let mut lengths = vec![0.0; geometry.path_count()];
    geometry.path_lengths_into(&pos, &mut scratch, &mut lengths);
    let wn = params.wavenumber();
    SteeringMatrix {
        snapshot: k,
        diag: lengths.iter().map(|&l| phase_term(l, wn)).collect(),
    }
}

/// Per-path reflection coefficients `b`, constant over the observation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReflectionVector(pub Vec<Complex64>);

impl ReflectionVector {
    pub fn new(values: Vec<Complex64>) -> Result<Self> {
        if values.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
            return Err(Error::NonFinite("reflection coefficient"));
        }
        Ok(Self(values))
    }

    /// Draws `len` i.i.d. unit-variance circular complex Gaussian coefficients.
    pub fn draw(len: usize, seed: u64) -> Self {
        let mut rng = ChaCha20Rng::seed_from_u64(seed);
        let noise = NoiseModel { variance: 1.0 };
        Self((0..len).map(|_| noise.sample(&mut rng)).collect())
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn mean_power(&self) -> f64 {
        self.0.iter().map(|b| b.norm_sqr()).sum::<f64>() / self.0.len() as f64
    }

    pub fn norm_sqr(&self) -> f64 {
        self.0.iter().map(|b| b.norm_sqr()).sum()
    }
}

/// Circular white complex Gaussian noise: real and imaginary parts are
/// independent with variance `variance / 2` each.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NoiseModel {
    pub variance: f64,
}

impl NoiseModel {
    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> Complex64 {
        let scale = (self.variance / 2.0).sqrt();
        let re: f64 = rng.sample(StandardNormal);
        let im: f64 = rng.sample(StandardNormal);
        Complex64::new(scale * re, scale * im)
    }
}

/// `K` virtual data vectors of length `MN`.
#[derive(Clone, Debug, PartialEq)]
pub struct SnapshotSet {
    tx_count: usize,
    rx_count: usize,
    snapshots: Vec<Vec<Complex64>>,
    noise_variance: f64,
    seed: u64,
}

impl SnapshotSet {
    pub fn new(
        tx_count: usize,
        rx_count: usize,
        snapshots: Vec<Vec<Complex64>>,
        noise_variance: f64,
        seed: u64,
    ) -> Result<Self> {
        if snapshots.is_empty() {
            return Err(Error::SnapshotFormat("no snapshots".into()));
        }
        let mn = tx_count * rx_count;
        if mn == 0 || snapshots.iter().any(|r| r.len() != mn) {
            return Err(Error::SnapshotFormat(format!("every snapshot must have {mn} entries")));
        }
        Ok(Self {
            tx_count,
            rx_count,
            snapshots,
            noise_variance,
            seed,
        })
    }

    pub fn tx_count(&self) -> usize {
        self.tx_count
    }

    pub fn rx_count(&self) -> usize {
        self.rx_count
    }

    pub fn path_count(&self) -> usize {
        self.tx_count * self.rx_count
    }

    pub fn len(&self) -> usize {
        self.snapshots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.snapshots.is_empty()
    }

    pub fn snapshots(&self) -> &[Vec<Complex64>] {
        &self.snapshots
    }

    pub fn noise_variance(&self) -> f64 {
        self.noise_variance
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    /// `Σ_k ‖r(k)‖²`.
    pub fn total_energy(&self) -> f64 {
        self.snapshots.iter().flatten().map(|v| v.norm_sqr()).sum()
    }

    /// Multiplies every sample by `alpha`.
    pub fn scaled(&self, alpha: Complex64) -> Self {
        let mut out = self.clone();
        out.snapshots.iter_mut().flatten().for_each(|v| *v *= alpha);
        out
    }

    /// Applies `f(k, path, value)` to every sample.
    pub fn map(&self, mut f: impl FnMut(usize, usize, Complex64) -> Complex64) -> Self {
        let mut out = self.clone();
        for (k, r) in out.snapshots.iter_mut().enumerate() {
            for (i, v) in r.iter_mut().enumerate() {
                *v = f(k, i, *v);
            }
        }
        out
    }

    const MAGIC: &'static [u8; 8] = b"MIMOSNP1";

    /// Binary layout, little endian: magic `MIMOSNP1`, `M: u32`, `N: u32`,
    /// `K: u32`, `σ²: f64`, `seed: u64`, then `K·MN` pairs of `f64`
    /// (real, imaginary), snapshot-major then path index.
    pub fn write_to<W: Write>(&self, mut w: W) -> Result<()> {
        w.write_all(Self::MAGIC)?;
        for v in [self.tx_count, self.rx_count, self.len()] {
            let v = u32::try_from(v).map_err(|_| Error::SnapshotFormat("dimension exceeds u32".into()))?;
            w.write_all(&v.to_le_bytes())?;
        }
        w.write_all(&self.noise_variance.to_le_bytes())?;
        w.write_all(&self.seed.to_le_bytes())?;
        for v in self.snapshots.iter().flatten() {
            w.write_all(&v.re.to_le_bytes())?;
            w.write_all(&v.im.to_le_bytes())?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_from<R: Read>(mut r: R) -> Result<Self> {
        let mut magic = [0u8; 8];
        r.read_exact(&mut magic)?;
        if &magic != Self::MAGIC {
            return Err(Error::SnapshotFormat("bad magic".into()));
        }
        let mut u32buf = [0u8; 4];
        let mut dims = [0usize; 3];
        for d in &mut dims {
            r.read_exact(&mut u32buf)?;
            *d = u32::from_le_bytes(u32buf) as usize;
        }
        let mut b8 = [0u8; 8];
        r.read_exact(&mut b8)?;
        let noise_variance = f64::from_le_bytes(b8);
        r.read_exact(&mut b8)?;
        let seed = u64::from_le_bytes(b8);
        let [m, n, k] = dims;
        let mn = m * n;
        let mut snapshots = Vec::with_capacity(k);
        for _ in 0..k {
            let mut row = Vec::with_capacity(mn);
            for _ in 0..mn {
                r.read_exact(&mut b8)?;
                let re = f64::from_le_bytes(b8);
                r.read_exact(&mut b8)?;
                let im = f64::from_le_bytes(b8);
                row.push(Complex64::new(re, im));
            }
            snapshots.push(row);
        }
        if r.read(&mut b8)? != 0 {
            return Err(Error::SnapshotFormat("trailing bytes".into()));
        }
        Self::new(m, n, snapshots, noise_variance, seed)
    }

    pub fn save(&self, path: impl AsRef<Path>) -> Result<()> {
        self.write_to(BufWriter::new(File::create(path)?))
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        Self::read_from(BufReader::new(File::open(path)?))
    }
}

/// Synthesizes the snapshots of `scenario` (true motion) with reflection
/// vector `b` and noise power `noise_variance` per complex sample.
pub fn synthesize(scenario: &Scenario, b: &ReflectionVector, noise_variance: f64, seed: u64) -> Result<SnapshotSet> {
    synthesize_motion(
        &scenario.geometry,
        &scenario.truth,
        &scenario.params,
        b,
        noise_variance,
        seed,
    )
}

pub fn synthesize_motion(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    b: &ReflectionVector,
    noise_variance: f64,
    seed: u64,
) -> Result<SnapshotSet> {
    if !(noise_variance.is_finite() && noise_variance >= 0.0) {
        return Err(Error::NonFinite("noise variance"));
    }
    if b.0.iter().any(|v| !(v.re.is_finite() && v.im.is_finite())) {
        return Err(Error::NonFinite("reflection coefficient"));
    }
    if b.len() != geometry.path_count() {
        return Err(Error::InvalidScenario(format!(
            "reflection vector has {} entries, geometry has {} paths",
            b.len(),
            geometry.path_count()
        )));
    }
    let amp = params.energy_ratio();
    let noise = NoiseModel {
        variance: noise_variance,
    };
    let mut rng = ChaCha20Rng::seed_from_u64(seed);
    let snapshots = (0..params.snapshot_count())
        .map(|k| {
            let t = steering_matrix(geometry, motion, params, k);
            t.diag
                .iter()
                .zip(&b.0)
                .map(|(tk, bk)| {
                    let clean = amp * tk * bk;
                    if noise_variance > 0.0 {
                        clean + noise.sample(&mut rng)
                    } else {
                        clean
                    }
                })
                .collect()
        })
        .collect();
    SnapshotSet::new(
        geometry.tx_count(),
        geometry.rx_count(),
        snapshots,
        noise_variance,
        seed,
    )
}

/// Per-sample SNR `10 log10((E/M) mean|b|² / σ²)` in dB.
pub fn snr_db(params: &RadarParams, b: &ReflectionVector, noise_variance: f64) -> Result<f64> {
    if noise_variance == 0.0 {
        return Err(Error::InfiniteSnr);
    }
    if !(noise_variance.is_finite() && noise_variance > 0.0) {
        return Err(Error::NonFinite("noise variance"));
    }
    let signal = params.energy_ratio().powi(2) * b.mean_power();
    Ok(10.0 * (signal / noise_variance).log10())
}

/// Inverse of [`snr_db`]. `+inf` dB maps to zero noise.
pub fn noise_variance_for_snr(params: &RadarParams, b: &ReflectionVector, snr_db: f64) -> f64 {
    if snr_db == f64::INFINITY {
        return 0.0;
    }
    params.energy_ratio().powi(2) * b.mean_power() / 10f64.powf(snr_db / 10.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Position3, PulseSchedule};

    fn scenario() -> Scenario {
        Scenario {
            name: "t".into(),
            geometry: AntennaGeometry::new(
                vec![Position3::planar(0.0, -5000.0), Position3::planar(0.0, 5000.0)],
                vec![Position3::planar(0.0, 0.0), Position3::planar(2500.0, 5000.0), Position3::planar(10.0, 3.0)],
            )
            .unwrap(),
            params: RadarParams::new(3e8, 3e8, 0.01, 20, 1.0).unwrap(),
            truth: MotionCoefficients::planar(vec![9800.0, 100.0, -20.0], vec![0.0, 3.0, 1.0]).unwrap(),
            pulses: Some(PulseSchedule {
                prt: 1.25e-3,
                pulses_per_cit: 8,
            }),
            reflection_seed: 3,
        }
    }

    #[test]
    fn zero_carrier_is_identity() {
        let s = scenario();
        let p = s.params.with_carrier_frequency(0.0).unwrap();
        let t = steering_matrix(&s.geometry, &s.truth, &p, 4);
        assert!(t.diag.iter().all(|v| *v == Complex64::new(1.0, 0.0)));
    }

    #[test]
    fn steering_is_unit_modulus_and_gram_is_k_identity() {
        let s = scenario();
        let mut gram = vec![Complex64::new(0.0, 0.0); s.geometry.path_count()];
        for k in 0..s.params.snapshot_count() {
            let t = steering_matrix(&s.geometry, &s.truth, &s.params, k);
            assert_eq!(t.len(), 6);
            for (g, v) in gram.iter_mut().zip(&t.diag) {
                assert!((v.norm() - 1.0).abs() <= 1e-12);
                *g += v.conj() * v;
            }
        }
        for g in gram {
            assert!((g - Complex64::new(20.0, 0.0)).norm() <= 1e-12 * 20.0);
        }
    }

    #[test]
    fn steering_entry_matches_delay() {
        let s = scenario();
        let t = steering_matrix(&s.geometry, &s.truth, &s.params, 0);
        let (m, n) = (1, 2);
        let tau = crate::scene::path_delay(&s.geometry, &s.truth, &s.params, m, n, 0);
        let expect = Complex64::from_polar(1.0, -2.0 * PI * 3e8 * tau);
        assert!((t.diag[s.geometry.path_index(m, n)] - expect).norm() < 1e-9);
    }

    #[test]
    fn noiseless_synthesis_is_exact() {
        let s = scenario();
        let b = s.reflection();
        let amp_params = s.params.with_energy_ratio(2.5).unwrap();
        let s2 = Scenario {
            params: amp_params,
            ..s.clone()
        };
        let set = synthesize(&s2, &b, 0.0, 9).unwrap();
        for (k, r) in set.snapshots().iter().enumerate() {
            let t = steering_matrix(&s2.geometry, &s2.truth, &s2.params, k);
            for i in 0..r.len() {
                assert_eq!(r[i], 2.5 * t.diag[i] * b.0[i]);
            }
        }
    }

    #[test]
    fn same_seed_same_bytes() {
        let s = scenario();
        let b = s.reflection();
        let a = synthesize(&s, &b, 0.7, 42).unwrap();
        let c = synthesize(&s, &b, 0.7, 42).unwrap();
        let mut ba = Vec::new();
        let mut bc = Vec::new();
        a.write_to(&mut ba).unwrap();
        c.write_to(&mut bc).unwrap();
        assert_eq!(ba, bc);
        let d = synthesize(&s, &b, 0.7, 43).unwrap();
        assert_ne!(a, d);
    }

    #[test]
    fn noise_variance_monte_carlo() {
        // σ² = 1 and zero signal: sample variance over 60k draws within 3%.
        let s = scenario();
        let b = ReflectionVector(vec![Complex64::new(0.0, 0.0); 6]);
        let p = s.params.with_snapshot_count(10_000).unwrap();
        let set = synthesize_motion(&s.geometry, &s.truth, &p, &b, 1.0, 5).unwrap();
        let vals: Vec<Complex64> = set.snapshots().iter().flatten().copied().collect();
        let n = vals.len() as f64;
        let mean = vals.iter().sum::<Complex64>() / n;
        let var = vals.iter().map(|v| (v - mean).norm_sqr()).sum::<f64>() / (n - 1.0);
        assert!((var - 1.0).abs() < 0.03, "{var}");
        let re_var = vals.iter().map(|v| (v.re - mean.re).powi(2)).sum::<f64>() / (n - 1.0);
        assert!((re_var - 0.5).abs() < 0.02, "{re_var}");
    }

    #[test]
    fn snr_conventions() {
        let p = RadarParams::new(3e8, 3e8, 0.01, 5, 1.0).unwrap();
        let b = ReflectionVector(vec![Complex64::from_polar(1.0, 0.3); 4]);
        assert!(snr_db(&p, &b, 1.0).unwrap().abs() < 1e-12);
        assert!((snr_db(&p, &b, 10.0).unwrap() + 10.0).abs() < 1e-12);
        assert!(matches!(snr_db(&p, &b, 0.0), Err(Error::InfiniteSnr)));
        let sigma2 = noise_variance_for_snr(&p, &b, 7.0);
        assert!((snr_db(&p, &b, sigma2).unwrap() - 7.0).abs() < 1e-12);
        assert_eq!(noise_variance_for_snr(&p, &b, f64::INFINITY), 0.0);
    }

    #[test]
    fn rejects_bad_inputs() {
        let s = scenario();
        let b = s.reflection();
        assert!(synthesize(&s, &b, f64::NAN, 1).is_err());
        assert!(synthesize(&s, &b, -1.0, 1).is_err());
        let bad = ReflectionVector(vec![Complex64::new(f64::INFINITY, 0.0); 6]);
        assert!(synthesize(&s, &bad, 1.0, 1).is_err());
    }

    #[test]
    fn file_round_trip_and_corruption() {
        let s = scenario();
        let set = synthesize(&s, &s.reflection(), 0.3, 11).unwrap();
        let mut buf = Vec::new();
        set.write_to(&mut buf).unwrap();
        assert_eq!(buf.len(), 8 + 12 + 16 + 20 * 6 * 16);
        assert_eq!(SnapshotSet::read_from(&buf[..]).unwrap(), set);
        assert!(SnapshotSet::read_from(&buf[..buf.len() - 3]).is_err());
        let mut bad = buf.clone();
        bad[0] = b'X';
        assert!(SnapshotSet::read_from(&bad[..]).is_err());
    }
}
