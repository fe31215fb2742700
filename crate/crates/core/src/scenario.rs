//! Deployment studies: devices around a beacon, array rotation and antenna
//! subsets that each carry their own scheme, scored by max-min fairness.
//!
//! Every device and every plan is evaluated with the same random streams, so
//! plan comparisons are paired and device order does not matter.

use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;

use crate::channel::{wrap_angle, ArrayConfig, ChannelSampler, CorrelationModel, PhaseShift, SampleBuffer};
use crate::error::{Error, Result};
use crate::harvester::{dbm_to_mw, EhCurve};
use crate::montecarlo::{mean_variance, parallel_draws};
use crate::optimize::{max_energy_shift, min_var_shift};
use crate::rng::stream_rng;
use crate::schemes::Scheme;

/// Log-distance path loss: `beta (dBm) = intercept - slope * log10(d)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PathLoss {
    pub intercept_dbm: f64,
    pub slope_db: f64,
}

impl PathLoss {
    /// 1 W beacon with path-loss exponent 2.7.
    pub const DEFAULT: PathLoss = PathLoss {
        intercept_dbm: 30.0,
        slope_db: 27.0,
    };
}

impl Default for PathLoss {
    fn default() -> Self {
        PathLoss::DEFAULT
    }
}

/// Average single-antenna RF power, mW, at `d` metres.
pub fn beta_at(pathloss: &PathLoss, d: f64) -> Result<f64> {
    if !(d > 0.0) || !d.is_finite() {
        return Err(Error::NonPositiveDistance(d));
    }
    Ok(dbm_to_mw(pathloss.intercept_dbm - pathloss.slope_db * d.log10()))
}

/// Azimuth of a device relative to the rotated array boresight, in `[0, 2 pi)`.
pub fn device_phi(azimuth: f64, rotation: f64) -> f64 {
    wrap_angle(azimuth - rotation)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Device {
    pub distance: f64,
    pub azimuth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Cluster {
    pub center: f64,
    /// Full angular width; azimuths are uniform within `center +- spread / 2`.
    pub spread: f64,
    /// Radii are uniform within this range.
    pub radial: (f64, f64),
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Layout {
    Explicit(Vec<Device>),
    /// Uniform over the disk area.
    UniformDisk {
        radius: f64,
        count: usize,
    },
    Clusters(Vec<Cluster>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct Deployment {
    pub layout: Layout,
    pub pathloss: PathLoss,
}

impl Deployment {
    /// Device positions; generated layouts are drawn from `seed`.
    pub fn devices(&self, seed: u64) -> Result<Vec<Device>> {
        let mut rng = stream_rng(seed, 0);
        let devices = match &self.layout {
            Layout::Explicit(d) => d.clone(),
            Layout::UniformDisk { radius, count } => {
                if !(*radius > 0.0) || *count == 0 {
                    return Err(Error::InvalidInput("disk needs a positive radius and count".into()));
                }
                (0..*count)
                    .map(|_| Device {
                        distance: radius * rng.random_range(0.0..1.0f64).sqrt(),
                        azimuth: rng.random_range(0.0..2.0 * PI),
                    })
                    .collect()
            }
            Layout::Clusters(clusters) => {
                let mut out = Vec::new();
                for c in clusters {
                    let (lo, hi) = c.radial;
                    if c.count == 0 || !(lo > 0.0) || !(hi >= lo) || !(c.spread >= 0.0) {
                        return Err(Error::InvalidInput(
                            "cluster needs count >= 1 and 0 < r_min <= r_max".into(),
                        ));
                    }
                    for _ in 0..c.count {
                        let u: f64 = rng.random_range(-0.5..0.5);
                        let r = if hi > lo { rng.random_range(lo..hi) } else { lo };
                        out.push(Device {
                            distance: r,
                            azimuth: wrap_angle(c.center + u * c.spread),
                        });
                    }
                }
                out
            }
        };
        if devices.is_empty() {
            return Err(Error::InvalidInput("deployment has no devices".into()));
        }
        if let Some(d) = devices.iter().find(|d| !(d.distance > 0.0)) {
            return Err(Error::NonPositiveDistance(d.distance));
        }
        Ok(devices)
    }
}

/// A block of consecutive antennas carrying one signal.
#[derive(Debug, Clone, PartialEq)]
pub struct Group {
    pub start: usize,
    pub scheme: Scheme,
    /// One entry per antenna in the group.
    pub shift: PhaseShift,
}

impl Group {
    pub fn new(start: usize, scheme: Scheme, shift: PhaseShift) -> Self {
        Group { start, scheme, shift }
    }

    pub fn len(&self) -> usize {
        self.shift.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shift.is_empty()
    }

    fn end(&self) -> usize {
        self.start + self.len()
    }
}

/// Common group shapes.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GroupKind {
    AaSsMaxEnergy,
    AaSsMinVariance,
    AaIs,
    Sa,
}

impl GroupKind {
    pub fn group(self, start: usize, len: usize) -> Group {
        match self {
            GroupKind::AaSsMaxEnergy => Group::new(start, Scheme::AaSs, max_energy_shift(len)),
            GroupKind::AaSsMinVariance => Group::new(start, Scheme::AaSs, min_var_shift(len)),
            GroupKind::AaIs => Group::new(start, Scheme::AaIs, PhaseShift::zeros(len)),
            GroupKind::Sa => Group::new(start, Scheme::Sa, max_energy_shift(len)),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BeaconPlan {
    /// Counter-clockwise boresight rotation, rad.
    pub rotation: f64,
    pub groups: Vec<Group>,
}

impl BeaconPlan {
    pub fn single(kind: GroupKind, m: usize) -> Self {
        BeaconPlan {
            rotation: 0.0,
            groups: vec![kind.group(0, m)],
        }
    }

    pub fn with_rotation(mut self, rotation: f64) -> Self {
        self.rotation = rotation;
        self
    }

    pub fn active_antennas(&self) -> usize {
        self.groups.iter().map(Group::len).sum()
    }

    /// Groups must be non-empty, disjoint, inside the array, and at most one
    /// may switch antennas.
    pub fn validate(&self, m: usize) -> Result<()> {
        if self.groups.is_empty() {
            return Err(Error::InvalidInput("plan has no antenna groups".into()));
        }
        if !self.rotation.is_finite() {
            return Err(Error::OutOfRange {
                name: "rotation",
                value: self.rotation,
            });
        }
        let mut used = vec![false; m];
        for g in &self.groups {
            if g.is_empty() || g.end() > m {
                return Err(Error::InvalidInput(format!(
                    "group at antenna {} with {} antennas does not fit an array of {m}",
                    g.start,
                    g.len()
                )));
            }
            for u in &mut used[g.start..g.end()] {
                if *u {
                    return Err(Error::InvalidInput("antenna groups overlap".into()));
                }
                *u = true;
            }
        }
        if self.groups.iter().filter(|g| g.scheme == Scheme::Sa).count() > 1 {
            return Err(Error::InvalidInput("at most one group may use SA".into()));
        }
        Ok(())
    }

    /// Per-antenna shifts over the whole array; idle antennas get zero.
    fn array_shift(&self, m: usize) -> PhaseShift {
        let mut psi = vec![0.0; m];
        for g in &self.groups {
            psi[g.start..g.end()].copy_from_slice(g.shift.as_slice());
        }
        // the first antenna is idle or first in its group, so its shift is 0
        PhaseShift::new(psi).expect("reference phase is zero")
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PlanEvaluation {
    /// Mean harvested power per device, mW, in device order.
    pub per_device: Vec<f64>,
    pub min: f64,
    pub worst_device: usize,
}

/// Scores a plan by the mean harvested power of each device.
///
/// Total power is split equally across active antennas, so a group of `n`
/// out of `A` active antennas carries `beta n / A`. RF powers of co-active
/// groups add before the harvester; an SA group switches its sub-block power
/// on top of the others.
pub fn evaluate_plan(
    devices: &[Device],
    pathloss: &PathLoss,
    plan: &BeaconPlan,
    base: &ArrayConfig,
    curve: &EhCurve,
    samples: usize,
    seed: u64,
) -> Result<PlanEvaluation> {
    let m = base.m;
    plan.validate(m)?;
    if samples == 0 {
        return Err(Error::InvalidInput("samples must be at least 1".into()));
    }
    if devices.is_empty() {
        return Err(Error::InvalidInput("deployment has no devices".into()));
    }
    let sampler = ChannelSampler::new(base, &plan.array_shift(m))?;
    let active = plan.active_antennas() as f64;
    let per_device: Vec<f64> = devices
        .par_iter()
        .map(|d| {
            let beta = beta_at(pathloss, d.distance)?;
            let phi = device_phi(d.azimuth, plan.rotation);
            let powers: Vec<f64> = plan.groups.iter().map(|g| beta * g.len() as f64 / active).collect();
            let values = parallel_draws(
                samples,
                seed,
                || SampleBuffer::new(m),
                |buf, rng| {
                    let s = sampler.draw_into(Some(phi), rng, buf);
                    harvest_plan(plan, &powers, &s.hx, &s.hy, curve)
                },
            );
            Ok(mean_variance(&values).0)
        })
        .collect::<Result<_>>()?;
    let mut worst = 0;
    for (i, e) in per_device.iter().enumerate() {
        if *e < per_device[worst] {
            worst = i;
        }
    }
    Ok(PlanEvaluation {
        min: per_device[worst],
        worst_device: worst,
        per_device,
    })
}

fn harvest_plan(plan: &BeaconPlan, powers: &[f64], hx: &[f64], hy: &[f64], curve: &EhCurve) -> f64 {
    let mut steady = 0.0;
    let mut switching = None;
    for (g, &p) in plan.groups.iter().zip(powers) {
        let (x, y) = (&hx[g.start..g.end()], &hy[g.start..g.end()]);
        match g.scheme {
            Scheme::AaSs => steady += coherent(x, y, p),
            Scheme::AaIs => steady += incoherent(x, y, p),
            Scheme::Sa => switching = Some((x, y, p)),
        }
    }
    match switching {
        None => curve.eval(steady),
        Some((x, y, p)) => {
            let n = x.len() as f64;
            x.iter()
                .zip(y)
                .map(|(a, b)| curve.eval(steady + p * (a * a + b * b)))
                .sum::<f64>()
                / n
        }
    }
}

/// `p / n |sum h|^2` over a slice.
fn coherent(x: &[f64], y: &[f64], p: f64) -> f64 {
    let sx: f64 = x.iter().sum();
    let sy: f64 = y.iter().sum();
    p / x.len() as f64 * (sx * sx + sy * sy)
}

/// `p / n sum |h|^2` over a slice.
fn incoherent(x: &[f64], y: &[f64], p: f64) -> f64 {
    p / x.len() as f64 * x.iter().zip(y).map(|(a, b)| a * a + b * b).sum::<f64>()
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepEntry {
    pub plan: BeaconPlan,
    pub min: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub best: BeaconPlan,
    pub best_evaluation: PlanEvaluation,
    /// Every candidate in enumeration order.
    pub entries: Vec<SweepEntry>,
}

/// Exhaustive max-min search over `templates x rotations` (templates outer).
/// Ties go to the first candidate.
#[allow(clippy::too_many_arguments)]
pub fn sweep_plans(
    devices: &[Device],
    pathloss: &PathLoss,
    rotations: &[f64],
    templates: &[Vec<Group>],
    base: &ArrayConfig,
    curve: &EhCurve,
    samples: usize,
    seed: u64,
) -> Result<SweepResult> {
    if rotations.is_empty() || templates.is_empty() {
        return Err(Error::EmptyCandidateSet);
    }
    let mut entries = Vec::with_capacity(rotations.len() * templates.len());
    let mut best: Option<(BeaconPlan, PlanEvaluation)> = None;
    for groups in templates {
        for &rotation in rotations {
            let plan = BeaconPlan {
                rotation,
                groups: groups.clone(),
            };
            let eval = evaluate_plan(devices, pathloss, &plan, base, curve, samples, seed)?;
            entries.push(SweepEntry {
                plan: plan.clone(),
                min: eval.min,
            });
            if best.as_ref().is_none_or(|(_, b)| eval.min > b.min) {
                best = Some((plan, eval));
            }
        }
    }
    let (best, best_evaluation) = best.expect("candidate set is non-empty");
    Ok(SweepResult {
        best,
        best_evaluation,
        entries,
    })
}

/// A deployment with its candidate plans.
#[derive(Debug, Clone, PartialEq)]
pub struct ScenarioSetup {
    pub deployment: Deployment,
    pub array: ArrayConfig,
    pub rotations: Vec<f64>,
    pub templates: Vec<Vec<Group>>,
    /// Seed for the device positions.
    pub layout_seed: u64,
}

/// Cluster shape shared by the clustered presets. The published layouts give
/// no coordinates; this shape was picked from a scan over spread and radii.
pub const CLUSTER_SPREAD_DEG: f64 = 20.0;
pub const CLUSTER_RADII: (f64, f64) = (3.0, 7.0);

fn standard_array() -> ArrayConfig {
    ArrayConfig::new(8, 5.0, 0.0, CorrelationModel::Exponential { tau: 0.3 }).expect("valid preset")
}

fn degrees(step: f64) -> Vec<f64> {
    let n = (360.0 / step).round() as usize;
    (0..n).map(|k| (k as f64 * step).to_radians()).collect()
}

/// 80 devices uniform over a 10 m disk; every scheme on all antennas.
pub fn scenario_a() -> ScenarioSetup {
    let m = 8;
    ScenarioSetup {
        deployment: Deployment {
            layout: Layout::UniformDisk {
                radius: 10.0,
                count: 80,
            },
            pathloss: PathLoss::DEFAULT,
        },
        array: standard_array(),
        rotations: vec![0.0],
        templates: [
            GroupKind::Sa,
            GroupKind::AaIs,
            GroupKind::AaSsMaxEnergy,
            GroupKind::AaSsMinVariance,
        ]
        .iter()
        .map(|k| vec![k.group(0, m)])
        .collect(),
        layout_seed: 1,
    }
}

/// Two opposite clusters around 110 and 290 degrees; SA against two-antenna
/// AA-SS max-E at every rotation on a 10 degree grid.
pub fn scenario_b() -> ScenarioSetup {
    let cluster = |center: f64| Cluster {
        center: center.to_radians(),
        spread: CLUSTER_SPREAD_DEG.to_radians(),
        radial: CLUSTER_RADII,
        count: 40,
    };
    ScenarioSetup {
        deployment: Deployment {
            layout: Layout::Clusters(vec![cluster(110.0), cluster(290.0)]),
            pathloss: PathLoss::DEFAULT,
        },
        array: standard_array(),
        rotations: degrees(10.0),
        templates: vec![
            vec![GroupKind::Sa.group(0, 8)],
            vec![GroupKind::AaSsMaxEnergy.group(0, 2)],
        ],
        layout_seed: 2,
    }
}

/// Clusters around -10, 80 and 170 degrees; SA against two four-antenna
/// signals (min-var and max-E AA-SS) at every rotation on a 10 degree grid.
pub fn scenario_c() -> ScenarioSetup {
    let cluster = |center: f64, count: usize| Cluster {
        center: center.to_radians(),
        spread: CLUSTER_SPREAD_DEG.to_radians(),
        radial: CLUSTER_RADII,
        count,
    };
    let two_signal = vec![
        GroupKind::AaSsMinVariance.group(0, 4),
        GroupKind::AaSsMaxEnergy.group(4, 4),
    ];
    ScenarioSetup {
        deployment: Deployment {
            layout: Layout::Clusters(vec![cluster(-10.0, 27), cluster(80.0, 27), cluster(170.0, 26)]),
            pathloss: PathLoss::DEFAULT,
        },
        array: standard_array(),
        rotations: degrees(10.0),
        templates: vec![vec![GroupKind::Sa.group(0, 8)], two_signal],
        layout_seed: 3,
    }
}
