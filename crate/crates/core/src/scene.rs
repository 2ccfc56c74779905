//! Multistatic scene: antenna geometry, polynomial target motion, and
//! transmit-receive path delays.
//!
//! Snapshot `k` (0-based) is observed at slow time `t_k = k * T`, where `T`
//! is the snapshot interval (one coherent integration time). Paths are
//! indexed `n * M + m` for transmitter `m` and receiver `n`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::signal::ReflectionVector;

/// A point in Cartesian space, meters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Position3 {
    pub x: f64,
    pub y: f64,
    pub z: f64,
}

impl Position3 {
    pub const fn new(x: f64, y: f64, z: f64) -> Self {
        Self { x, y, z }
    }

    pub const fn planar(x: f64, y: f64) -> Self {
        Self { x, y, z: 0.0 }
    }

    pub fn distance(&self, other: &Position3) -> f64 {
        let (dx, dy, dz) = (self.x - other.x, self.y - other.y, self.z - other.z);
        (dx * dx + dy * dy + dz * dz).sqrt()
    }

    pub fn component(&self, axis: Axis) -> f64 {
        match axis {
            Axis::X => self.x,
            Axis::Y => self.y,
            Axis::Z => self.z,
        }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite() && self.z.is_finite()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Axis {
    X,
    Y,
    Z,
}

impl Axis {
    pub const ALL: [Axis; 3] = [Axis::X, Axis::Y, Axis::Z];

    pub fn label(self) -> &'static str {
        match self {
            Axis::X => "x",
            Axis::Y => "y",
            Axis::Z => "z",
        }
    }
}

/// Fixed transmitter and receiver locations.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct AntennaGeometry {
    transmitters: Vec<Position3>,
    receivers: Vec<Position3>,
}

impl AntennaGeometry {
    pub fn new(transmitters: Vec<Position3>, receivers: Vec<Position3>) -> Result<Self> {
        if transmitters.is_empty() {
            return Err(Error::InvalidScenario("at least one transmitter is required".into()));
        }
        if receivers.is_empty() {
            return Err(Error::InvalidScenario("at least one receiver is required".into()));
        }
        if !transmitters.iter().chain(&receivers).all(Position3::is_finite) {
            return Err(Error::NonFinite("antenna position"));
        }
        Ok(Self {
            transmitters,
            receivers,
        })
    }

    pub fn transmitters(&self) -> &[Position3] {
        &self.transmitters
    }

    pub fn receivers(&self) -> &[Position3] {
        &self.receivers
    }

    /// Number of transmitters, `M`.
    pub fn tx_count(&self) -> usize {
        self.transmitters.len()
    }

    /// Number of receivers, `N`.
    pub fn rx_count(&self) -> usize {
        self.receivers.len()
    }

    pub fn path_count(&self) -> usize {
        self.tx_count() * self.rx_count()
    }

    pub fn path_index(&self, m: usize, n: usize) -> usize {
        n * self.tx_count() + m
    }

    /// Inverse of [`path_index`](Self::path_index): `(m, n)`.
    pub fn path_pair(&self, index: usize) -> (usize, usize) {
        (index % self.tx_count(), index / self.tx_count())
    }

    /// Writes the bistatic path length `d_m + d_n` of every path for a target
    /// at `pos` into `out`, in path-index order.
    pub fn path_lengths_into(&self, pos: &Position3, tx_ranges: &mut Vec<f64>, out: &mut [f64]) {
        tx_ranges.clear();
        tx_ranges.extend(self.transmitters.iter().map(|p| pos.distance(p)));
        let m_count = self.tx_count();
        for (n, q) in self.receivers.iter().enumerate() {
            let d_n = pos.distance(q);
            let row = &mut out[n * m_count..(n + 1) * m_count];
            for (slot, d_m) in row.iter_mut().zip(tx_ranges.iter()) {
                *slot = d_m + d_n;
            }
        }
    }
}

/// Identifies one scalar motion coefficient: axis and polynomial order.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct ParamId {
    pub axis: Axis,
    pub order: usize,
}

impl ParamId {
    pub fn name(&self) -> String {
        let kind = match self.order {
            0 => "position".to_string(),
            1 => "velocity".to_string(),
            2 => "acceleration".to_string(),
            3 => "jerk".to_string(),
            q => format!("order{q}"),
        };
        format!("{}_{}", self.axis.label(), kind)
    }

    pub fn unit(&self) -> String {
        match self.order {
            0 => "m".to_string(),
            1 => "m/s".to_string(),
            q => format!("m/s^{q}"),
        }
    }

    /// Parses names produced by [`name`](Self::name).
    pub fn parse(name: &str) -> Option<Self> {
        let (axis, kind) = name.split_once('_')?;
        let axis = match axis {
            "x" => Axis::X,
            "y" => Axis::Y,
            "z" => Axis::Z,
            _ => return None,
        };
        let order = match kind {
            "position" => 0,
            "velocity" => 1,
            "acceleration" => 2,
            "jerk" => 3,
            other => other.strip_prefix("order")?.parse().ok()?,
        };
        Some(Self { axis, order })
    }
}

/// Factorial-weighted polynomial basis `[1, t, t²/2!, ..., t^Q/Q!]`.
pub fn motion_basis(t: f64, order: usize) -> Vec<f64> {
    let mut h = Vec::with_capacity(order + 1);
    let mut term = 1.0;
    h.push(term);
    for q in 1..=order {
        term *= t / q as f64;
        h.push(term);
    }
    h
}

fn eval_poly(coeffs: &[f64], t: f64) -> f64 {
    // Horner on the factorial-weighted basis.
    let mut acc = 0.0;
    for (q, c) in coeffs.iter().enumerate().rev() {
        acc = c + acc * t / (q + 1) as f64;
    }
    acc
}

/// Polynomial motion coefficients `ψ = [C_0..C_Q, D_0..D_Q, E_0..E_Q]`.
///
/// A planar motion pins every z coefficient to zero and drops it from the
/// free parameter vector used by the estimator and the bound.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct MotionCoefficients {
    cx: Vec<f64>,
    cy: Vec<f64>,
    cz: Vec<f64>,
    planar: bool,
}

impl MotionCoefficients {
    pub fn new(cx: Vec<f64>, cy: Vec<f64>, cz: Vec<f64>) -> Result<Self> {
        Self::build(cx, cy, cz, false)
    }

    pub fn planar(cx: Vec<f64>, cy: Vec<f64>) -> Result<Self> {
        let cz = vec![0.0; cx.len()];
        Self::build(cx, cy, cz, true)
    }

    fn build(cx: Vec<f64>, cy: Vec<f64>, cz: Vec<f64>, planar: bool) -> Result<Self> {
        if cx.is_empty() || cx.len() != cy.len() || cx.len() != cz.len() {
            return Err(Error::InvalidScenario(format!(
                "motion axes need equal, non-zero coefficient counts (got {}, {}, {})",
                cx.len(),
                cy.len(),
                cz.len()
            )));
        }
        if !cx.iter().chain(&cy).chain(&cz).all(|c| c.is_finite()) {
            return Err(Error::NonFinite("motion coefficient"));
        }
        Ok(Self { cx, cy, cz, planar })
    }

    /// Polynomial order `Q`.
    pub fn order(&self) -> usize {
        self.cx.len() - 1
    }

    pub fn is_planar(&self) -> bool {
        self.planar
    }

    pub fn axis(&self, axis: Axis) -> &[f64] {
        match axis {
            Axis::X => &self.cx,
            Axis::Y => &self.cy,
            Axis::Z => &self.cz,
        }
    }

    pub fn get(&self, id: ParamId) -> f64 {
        self.axis(id.axis)[id.order]
    }

    pub fn position_at(&self, t: f64) -> Position3 {
        Position3::new(
            eval_poly(&self.cx, t),
            eval_poly(&self.cy, t),
            eval_poly(&self.cz, t),
        )
    }

    /// Full stacked `ψ` of length `3(Q+1)`.
    pub fn stacked(&self) -> Vec<f64> {
        self.cx.iter().chain(&self.cy).chain(&self.cz).copied().collect()
    }

    pub fn free_axes(&self) -> &'static [Axis] {
        if self.planar {
            &Axis::ALL[..2]
        } else {
            &Axis::ALL
        }
    }

    /// Identifiers of the free parameters, in stacking order.
    pub fn param_ids(&self) -> Vec<ParamId> {
        let order = self.order();
        self.free_axes()
            .iter()
            .flat_map(|&axis| (0..=order).map(move |q| ParamId { axis, order: q }))
            .collect()
    }

    pub fn free_len(&self) -> usize {
        self.free_axes().len() * (self.order() + 1)
    }

    pub fn free_params(&self) -> Vec<f64> {
        self.free_axes()
            .iter()
            .flat_map(|&a| self.axis(a).iter().copied())
            .collect()
    }

    /// Same order and pinning, new free parameter values.
    ///
    /// # Panics
    /// If `values.len() != self.free_len()`.
    pub fn with_free_params(&self, values: &[f64]) -> Self {
        assert_eq!(values.len(), self.free_len(), "free parameter length");
        let width = self.order() + 1;
        let mut out = self.clone();
        for (i, &axis) in self.free_axes().iter().enumerate() {
            let dst = match axis {
                Axis::X => &mut out.cx,
                Axis::Y => &mut out.cy,
                Axis::Z => &mut out.cz,
            };
            dst.copy_from_slice(&values[i * width..(i + 1) * width]);
        }
        out
    }

    /// Copy with one coefficient replaced.
    pub fn with_param(&self, id: ParamId, value: f64) -> Self {
        let mut out = self.clone();
        match id.axis {
            Axis::X => out.cx[id.order] = value,
            Axis::Y => out.cy[id.order] = value,
            Axis::Z => out.cz[id.order] = value,
        }
        out
    }
}

/// Radar constants shared by all paths.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RadarParams {
    carrier_frequency: f64,
    propagation_speed: f64,
    snapshot_interval: f64,
    snapshot_count: usize,
    energy_ratio: f64,
}

impl RadarParams {
    /// `energy_ratio` is the amplitude factor `sqrt(E/M)`.
    pub fn new(
        carrier_frequency: f64,
        propagation_speed: f64,
        snapshot_interval: f64,
        snapshot_count: usize,
        energy_ratio: f64,
    ) -> Result<Self> {
        for (v, what) in [
            (propagation_speed, "propagation_speed"),
            (snapshot_interval, "snapshot_interval"),
            (energy_ratio, "energy_ratio"),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(Error::InvalidScenario(format!("{what} must be finite and > 0, got {v}")));
            }
        }
        // A zero carrier is accepted: it degenerates every steering phase to 1.
        if !(carrier_frequency.is_finite() && carrier_frequency >= 0.0) {
            return Err(Error::InvalidScenario(format!(
                "carrier_frequency must be finite and >= 0, got {carrier_frequency}"
            )));
        }
        if snapshot_count == 0 {
            return Err(Error::InvalidScenario("snapshot_count must be >= 1".into()));
        }
        Ok(Self {
            carrier_frequency,
            propagation_speed,
            snapshot_interval,
            snapshot_count,
            energy_ratio,
        })
    }

    pub fn carrier_frequency(&self) -> f64 {
        self.carrier_frequency
    }

    pub fn propagation_speed(&self) -> f64 {
        self.propagation_speed
    }

    pub fn snapshot_interval(&self) -> f64 {
        self.snapshot_interval
    }

    pub fn snapshot_count(&self) -> usize {
        self.snapshot_count
    }

    /// `sqrt(E/M)`.
    pub fn energy_ratio(&self) -> f64 {
        self.energy_ratio
    }

    pub fn snapshot_time(&self, k: usize) -> f64 {
        k as f64 * self.snapshot_interval
    }

    /// `f_c / c`, the phase slope in cycles per meter of path length.
    pub fn wavenumber(&self) -> f64 {
        self.carrier_frequency / self.propagation_speed
    }

    pub fn with_carrier_frequency(&self, f_c: f64) -> Result<Self> {
        Self::new(
            f_c,
            self.propagation_speed,
            self.snapshot_interval,
            self.snapshot_count,
            self.energy_ratio,
        )
    }

    pub fn with_propagation_speed(&self, c: f64) -> Result<Self> {
        Self::new(
            self.carrier_frequency,
            c,
            self.snapshot_interval,
            self.snapshot_count,
            self.energy_ratio,
        )
    }

    pub fn with_snapshot_count(&self, k: usize) -> Result<Self> {
        Self::new(
            self.carrier_frequency,
            self.propagation_speed,
            self.snapshot_interval,
            k,
            self.energy_ratio,
        )
    }

    pub fn with_energy_ratio(&self, amp: f64) -> Result<Self> {
        Self::new(
            self.carrier_frequency,
            self.propagation_speed,
            self.snapshot_interval,
            self.snapshot_count,
            amp,
        )
    }
}

/// Pulse-level timing inside each coherent integration interval. Only used
/// to check how much the Doppler frequency drifts within one interval.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct PulseSchedule {
    pub prt: f64,
    pub pulses_per_cit: usize,
}

/// Complete, validated experiment description.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub geometry: AntennaGeometry,
    pub params: RadarParams,
    pub truth: MotionCoefficients,
    pub pulses: Option<PulseSchedule>,
    pub reflection_seed: u64,
}

impl Scenario {
    /// Checks that no antenna coincides with the true target at any snapshot.
    pub fn validate(&self) -> Result<()> {
        if let Some(p) = &self.pulses {
            if !(p.prt.is_finite() && p.prt > 0.0) || p.pulses_per_cit == 0 {
                return Err(Error::InvalidScenario("pulse schedule needs prt > 0 and pulses_per_cit >= 1".into()));
            }
        }
        for k in 0..self.params.snapshot_count() {
            let pos = eval_position(&self.truth, &self.params, k);
            check_ranges(&self.geometry, &pos, k)?;
        }
        Ok(())
    }

    /// The frozen reflection vector drawn from `reflection_seed`.
    pub fn reflection(&self) -> ReflectionVector {
        ReflectionVector::draw(self.geometry.path_count(), self.reflection_seed)
    }
}

pub(crate) fn check_ranges(geometry: &AntennaGeometry, pos: &Position3, k: usize) -> Result<()> {
    for (kind, list) in [("transmitter", geometry.transmitters()), ("receiver", geometry.receivers())] {
        if let Some(index) = list.iter().position(|a| pos.distance(a) == 0.0) {
            return Err(Error::ZeroRange {
                kind,
                index,
                snapshot: k,
            });
        }
    }
    Ok(())
}

/// Target position at snapshot `k`.
pub fn eval_position(motion: &MotionCoefficients, params: &RadarParams, k: usize) -> Position3 {
    motion.position_at(params.snapshot_time(k))
}

/// `(d_m, d_n)`: ranges from transmitter `m` and receiver `n` to `pos`.
pub fn path_ranges(geometry: &AntennaGeometry, pos: &Position3, m: usize, n: usize) -> (f64, f64) {
    (
        pos.distance(&geometry.transmitters()[m]),
        pos.distance(&geometry.receivers()[n]),
    )
}

/// Propagation delay `(d_m + d_n) / c` of path `(m, n)` at snapshot `k`.
pub fn path_delay(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    m: usize,
    n: usize,
    k: usize,
) -> f64 {
    delay_at(geometry, motion, params, m, n, params.snapshot_time(k))
}

fn delay_at(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    m: usize,
    n: usize,
    t: f64,
) -> f64 {
    let (d_m, d_n) = path_ranges(geometry, &motion.position_at(t), m, n);
    (d_m + d_n) / params.propagation_speed()
}

/// Doppler frequency `-f_c dτ/dt` of path `(m, n)` at continuous time `t`,
/// by central difference with step `dt`.
pub fn doppler_at_time(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    m: usize,
    n: usize,
    t: f64,
    dt: f64,
) -> f64 {
    let ahead = delay_at(geometry, motion, params, m, n, t + dt);
    let behind = delay_at(geometry, motion, params, m, n, t - dt);
    -params.carrier_frequency() * (ahead - behind) / (2.0 * dt)
}

/// Doppler frequency of path `(m, n)` at snapshot `k`.
pub fn instantaneous_doppler(
    geometry: &AntennaGeometry,
    motion: &MotionCoefficients,
    params: &RadarParams,
    m: usize,
    n: usize,
    k: usize,
    dt: f64,
) -> f64 {
    doppler_at_time(geometry, motion, params, m, n, params.snapshot_time(k), dt)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_geometry() -> AntennaGeometry {
        AntennaGeometry::new(
            vec![
                Position3::planar(0.0, -5000.0),
                Position3::planar(0.0, 5000.0),
                Position3::planar(5000.0, 5000.0),
            ],
            vec![
                Position3::planar(0.0, -5000.0),
                Position3::planar(0.0, 0.0),
                Position3::planar(0.0, 5000.0),
                Position3::planar(2500.0, 5000.0),
                Position3::planar(5000.0, 5000.0),
            ],
        )
        .unwrap()
    }

    fn example1_motion() -> MotionCoefficients {
        MotionCoefficients::planar(vec![9800.0, 100.0, -20.0], vec![0.0, 0.0, 0.0]).unwrap()
    }

    fn params(t: f64) -> RadarParams {
        RadarParams::new(3e8, 3e8, t, 50, 1.0).unwrap()
    }

    #[test]
    fn constant_motion_is_constant() {
        let motion = MotionCoefficients::planar(vec![9800.0], vec![0.0]).unwrap();
        for k in [0, 7, 49] {
            assert_eq!(eval_position(&motion, &params(0.01), k).x, 9800.0);
        }
    }

    #[test]
    fn second_order_position() {
        // k = 50 with T = 0.01 gives kT = 0.5 s.
        let pos = eval_position(&example1_motion(), &params(0.01), 50);
        assert!((pos.x - 9847.5).abs() < 1e-9);
        let start = eval_position(&example1_motion(), &params(0.01), 0);
        assert_eq!((start.x, start.y), (9800.0, 0.0));
    }

    #[test]
    fn ranges_and_delay() {
        let geom = example1_geometry();
        let pos = Position3::planar(9800.0, 0.0);
        let (d_m, d_n) = path_ranges(&geom, &pos, 0, 1);
        assert!((d_m - 11001.818_031_580_053).abs() < 1e-9);
        assert_eq!(d_n, 9800.0);
        let tau = path_delay(&geom, &example1_motion(), &params(0.01), 0, 1, 0);
        assert!((tau - 6.933_939_343_860_018e-5).abs() < 1e-18, "{tau}");

        let (d_m, _) = path_ranges(&geom, &geom.transmitters()[2], 2, 0);
        assert_eq!(d_m, 0.0);
    }

    #[test]
    fn delay_zero_when_target_on_both_antennas() {
        let geom = AntennaGeometry::new(vec![Position3::planar(1.0, 2.0)], vec![Position3::planar(1.0, 2.0)]).unwrap();
        let motion = MotionCoefficients::planar(vec![1.0], vec![2.0]).unwrap();
        assert_eq!(path_delay(&geom, &motion, &params(0.01), 0, 0, 3), 0.0);
    }

    #[test]
    fn delay_scales_with_inverse_speed() {
        let geom = example1_geometry();
        let p = params(0.01);
        let p2 = p.with_propagation_speed(6e8).unwrap();
        let t1 = path_delay(&geom, &example1_motion(), &p, 2, 4, 10);
        let t2 = path_delay(&geom, &example1_motion(), &p2, 2, 4, 10);
        assert!((t1 / t2 - 2.0).abs() < 1e-14);
    }

    #[test]
    fn doppler_static_and_linear_in_carrier() {
        let geom = example1_geometry();
        let still = MotionCoefficients::planar(vec![9800.0], vec![0.0]).unwrap();
        assert_eq!(instantaneous_doppler(&geom, &still, &params(0.01), 1, 2, 5, 1e-3), 0.0);

        let p = params(0.01);
        let p2 = p.with_carrier_frequency(6e8).unwrap();
        let f1 = instantaneous_doppler(&geom, &example1_motion(), &p, 1, 2, 5, 1e-3);
        let f2 = instantaneous_doppler(&geom, &example1_motion(), &p2, 1, 2, 5, 1e-3);
        assert!(f1.abs() > 1.0);
        assert!((f2 / f1 - 2.0).abs() < 1e-12);
    }

    #[test]
    fn path_index_layout() {
        let geom = example1_geometry();
        assert_eq!(geom.path_index(2, 1), 5);
        assert_eq!(geom.path_pair(5), (2, 1));
        let pos = Position3::planar(9000.0, 100.0);
        let mut scratch = Vec::new();
        let mut out = vec![0.0; geom.path_count()];
        geom.path_lengths_into(&pos, &mut scratch, &mut out);
        for (i, len) in out.iter().enumerate() {
            let (m, n) = geom.path_pair(i);
            let (d_m, d_n) = path_ranges(&geom, &pos, m, n);
            assert_eq!(*len, d_m + d_n);
        }
    }

    #[test]
    fn rejects_empty_or_ragged() {
        assert!(AntennaGeometry::new(vec![], vec![Position3::planar(0.0, 0.0)]).is_err());
        assert!(MotionCoefficients::new(vec![1.0], vec![1.0, 2.0], vec![0.0]).is_err());
        assert!(MotionCoefficients::planar(vec![f64::NAN], vec![0.0]).is_err());
        assert!(RadarParams::new(3e8, 3e8, 0.0, 50, 1.0).is_err());
        assert!(RadarParams::new(3e8, 3e8, 0.01, 0, 1.0).is_err());
    }

    #[test]
    fn param_names_round_trip() {
        let motion = MotionCoefficients::new(vec![0.0; 5], vec![0.0; 5], vec![0.0; 5]).unwrap();
        for id in motion.param_ids() {
            assert_eq!(ParamId::parse(&id.name()), Some(id));
        }
        assert_eq!(example1_motion().free_len(), 6);
    }

    #[test]
    fn free_params_round_trip() {
        let m = example1_motion();
        let v = vec![1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let m2 = m.with_free_params(&v);
        assert_eq!(m2.free_params(), v);
        assert_eq!(m2.axis(Axis::Z), &[0.0, 0.0, 0.0]);
    }
}
