//! Fixed-step RK4 integration of `ẋ = u(x)` under fixed or switching topologies.
//!
//! The base step `dt` is fixed and every switching dwell is an integer number
//! of base steps, so a step never straddles a topology change. Near agreement
//! the vector field is non-Lipschitz and an explicit step larger than the local
//! time scale `spread/‖u‖∞` overshoots and chatters instead of converging. Each
//! base step is therefore split into sub-steps no longer than
//! [`SUBSTEP_FRACTION`]` · spread/‖u‖∞`. Far from agreement this bound exceeds
//! `dt` and the scheme is plain fixed-step RK4. Once the spread drops to
//! `agree_tol` the state is snapped to its mean and the run stops.

use std::collections::BTreeMap;

use crate::bounds::{self, mean};
use crate::error::{Error, Result};
use crate::graph::Topology;
use crate::protocols::{ProtocolKind, ProtocolSpec, StateVector};

/// Upper bound on a sub-step as a fraction of the local time scale `spread/‖u‖∞`.
pub const SUBSTEP_FRACTION: f64 = 0.1;

pub const DEFAULT_DT: f64 = 1e-3;
pub const DEFAULT_T_MAX: f64 = 100.0;
pub const DEFAULT_AGREE_TOL: f64 = 1e-6;
pub const DEFAULT_RECORD_EVERY: usize = 10;

/// Relative tolerance used when checking that a dwell is a multiple of `dt`.
const ALIGNMENT_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct Phase {
    pub topology: String,
    pub dwell: f64,
}

/// Piecewise-constant, right-continuous assignment of topologies over time.
#[derive(Debug, Clone, PartialEq)]
pub struct SwitchingSchedule {
    phases: Vec<Phase>,
    cyclic: bool,
}

impl SwitchingSchedule {
    pub fn new(phases: Vec<Phase>, cyclic: bool) -> Result<Self> {
        if phases.is_empty() {
            return Err(Error::Config("a schedule needs at least one phase".into()));
        }
        if let Some(p) = phases
            .iter()
            .find(|p| !(p.dwell > 0.0 && p.dwell.is_finite()))
        {
            return Err(Error::Config(format!(
                "dwell of `{}` must be positive, got {}",
                p.topology, p.dwell
            )));
        }
        Ok(Self { phases, cyclic })
    }

    pub fn phases(&self) -> &[Phase] {
        &self.phases
    }

    pub fn cyclic(&self) -> bool {
        self.cyclic
    }

    pub fn period(&self) -> f64 {
        self.phases.iter().map(|p| p.dwell).sum()
    }

    /// Phase active at time `t`; phase boundaries belong to the later phase.
    pub fn phase_at(&self, t: f64) -> Result<&Phase> {
        if t.is_nan() || t < 0.0 {
            return Err(Error::InvalidArgument(format!(
                "time must be nonnegative, got {t}"
            )));
        }
        let period = self.period();
        let local = if self.cyclic {
            t % period
        } else if t >= period {
            return Err(Error::TimeBeyondSchedule(t));
        } else {
            t
        };
        let mut start = 0.0;
        for phase in &self.phases {
            if local < start + phase.dwell {
                return Ok(phase);
            }
            start += phase.dwell;
        }
        // roundoff in the cumulative sum can leave `local` just short of `period`
        if self.cyclic {
            Ok(&self.phases[0])
        } else {
            Err(Error::TimeBeyondSchedule(t))
        }
    }
}

pub fn topology_at<'a>(
    s: &SwitchingSchedule,
    topologies: &'a BTreeMap<String, Topology>,
    t: f64,
) -> Result<&'a Topology> {
    let phase = s.phase_at(t)?;
    topologies
        .get(&phase.topology)
        .ok_or_else(|| Error::UnknownTopologyId(phase.topology.clone()))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TopologySource {
    Fixed(String),
    Switching(SwitchingSchedule),
}

impl TopologySource {
    /// Topology ids referenced, in schedule order (repeats removed).
    pub fn topology_ids(&self) -> Vec<&str> {
        match self {
            TopologySource::Fixed(id) => vec![id.as_str()],
            TopologySource::Switching(s) => {
                let mut ids: Vec<&str> = Vec::new();
                for p in s.phases() {
                    if !ids.contains(&p.topology.as_str()) {
                        ids.push(&p.topology);
                    }
                }
                ids
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub protocol: ProtocolSpec,
    pub topologies: BTreeMap<String, Topology>,
    pub source: TopologySource,
    pub x0: StateVector,
    pub dt: f64,
    pub t_max: f64,
    pub agree_tol: f64,
    pub record_every: usize,
}

impl Scenario {
    /// Scenario on a single topology with default integrator settings.
    pub fn fixed(protocol: ProtocolSpec, topology: Topology, x0: Vec<f64>) -> Result<Self> {
        let mut topologies = BTreeMap::new();
        topologies.insert("g".to_string(), topology);
        let sc = Scenario {
            protocol,
            topologies,
            source: TopologySource::Fixed("g".into()),
            x0: StateVector::new(x0)?,
            dt: DEFAULT_DT,
            t_max: DEFAULT_T_MAX,
            agree_tol: DEFAULT_AGREE_TOL,
            record_every: DEFAULT_RECORD_EVERY,
        };
        sc.validate()?;
        Ok(sc)
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v > 0.0 && v.is_finite();
        if !positive(self.dt) {
            return Err(Error::Config(format!(
                "dt must be positive, got {}",
                self.dt
            )));
        }
        if !positive(self.t_max) {
            return Err(Error::Config(format!(
                "t_max must be positive, got {}",
                self.t_max
            )));
        }
        if !positive(self.agree_tol) {
            return Err(Error::Config(format!(
                "agree_tol must be positive, got {}",
                self.agree_tol
            )));
        }
        if self.record_every == 0 {
            return Err(Error::Config("record_every must be at least 1".into()));
        }
        let n = self.x0.len();
        if n == 0 {
            return Err(Error::Config("x0 is empty".into()));
        }
        for id in self.source.topology_ids() {
            let t = self
                .topologies
                .get(id)
                .ok_or_else(|| Error::UnknownTopologyId(id.to_string()))?;
            if t.n() != n {
                return Err(Error::Config(format!(
                    "topology `{id}` has {} vertices but x0 has {n} entries",
                    t.n()
                )));
            }
        }
        if let TopologySource::Switching(s) = &self.source {
            for p in s.phases() {
                let steps = p.dwell / self.dt;
                if steps.round() < 1.0
                    || (steps - steps.round()).abs() > ALIGNMENT_TOLERANCE * steps
                {
                    return Err(Error::Config(format!(
                        "dwell {} of `{}` is not a positive multiple of dt = {}",
                        p.dwell, p.topology, self.dt
                    )));
                }
            }
            if !s.cyclic() && self.t_max > s.period() * (1.0 + ALIGNMENT_TOLERANCE) {
                return Err(Error::Config(format!(
                    "non-cyclic schedule covers {} time units but t_max is {}",
                    s.period(),
                    self.t_max
                )));
            }
        }
        Ok(())
    }

    /// Topology ids referenced by the scenario, in schedule order.
    pub fn referenced_topologies(&self) -> Vec<(&str, &Topology)> {
        self.source
            .topology_ids()
            .into_iter()
            .filter_map(|id| self.topologies.get(id).map(|t| (id, t)))
            .collect()
    }

    /// Topology in effect at `t = 0`.
    pub fn initial_topology(&self) -> Result<&Topology> {
        match &self.source {
            TopologySource::Fixed(id) => self
                .topologies
                .get(id)
                .ok_or_else(|| Error::UnknownTopologyId(id.clone())),
            TopologySource::Switching(s) => topology_at(s, &self.topologies, 0.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Sample {
    pub t: f64,
    pub x: Vec<f64>,
    /// `V1` under the topology active at `t`.
    pub v1: f64,
    pub v2: f64,
    pub spread: f64,
    pub sum: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Converged,
    TimedOut,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Trajectory {
    pub samples: Vec<Sample>,
    pub converged_at: Option<f64>,
    pub final_value: Option<f64>,
    pub status: Status,
    pub protocol: ProtocolKind,
    pub dt: f64,
}

/// Per-step topology lookup by integer step index, so that floating-point
/// accumulation of time never misplaces a switch.
struct StepTopologies<'a> {
    // (topology, steps in phase)
    phases: Vec<(&'a Topology, u64)>,
    cycle: u64,
    cyclic: bool,
}

impl<'a> StepTopologies<'a> {
    fn new(sc: &'a Scenario) -> Result<Self> {
        let lookup = |id: &str| {
            sc.topologies
                .get(id)
                .ok_or_else(|| Error::UnknownTopologyId(id.to_string()))
        };
        let (phases, cyclic) = match &sc.source {
            TopologySource::Fixed(id) => (vec![(lookup(id)?, 1)], true),
            TopologySource::Switching(s) => {
                let mut phases = Vec::with_capacity(s.phases().len());
                for p in s.phases() {
                    phases.push((lookup(&p.topology)?, (p.dwell / sc.dt).round() as u64));
                }
                (phases, s.cyclic())
            }
        };
        let cycle = phases.iter().map(|p| p.1).sum();
        Ok(Self {
            phases,
            cycle,
            cyclic,
        })
    }

    /// Topology for the base step starting at `step·dt`.
    fn at(&self, step: u64) -> &'a Topology {
        let mut local = if self.cyclic {
            step % self.cycle
        } else {
            step.min(self.cycle - 1)
        };
        for &(t, len) in &self.phases {
            if local < len {
                return t;
            }
            local -= len;
        }
        self.phases[self.phases.len() - 1].0
    }
}

struct Rk4Workspace {
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    stage: Vec<f64>,
}

impl Rk4Workspace {
    fn new(n: usize) -> Self {
        Self {
            k1: vec![0.0; n],
            k2: vec![0.0; n],
            k3: vec![0.0; n],
            k4: vec![0.0; n],
            stage: vec![0.0; n],
        }
    }
}

fn spread(x: &[f64]) -> f64 {
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
            (lo.min(v), hi.max(v))
        });
    hi - lo
}

fn sample(t: f64, x: &[f64], topology: &Topology) -> Sample {
    Sample {
        t,
        x: x.to_vec(),
        v1: bounds::v1_unchecked(topology, x),
        v2: bounds::v2(x),
        spread: spread(x),
        sum: x.iter().sum(),
    }
}

/// Advances `x` by one base step of length `dt` on a fixed topology.
///
/// Returns the elapsed time at which agreement was reached, if it was.
/// `stage = x + h * k`
fn offset(stage: &mut [f64], x: &[f64], h: f64, k: &[f64]) {
    for ((s, xi), ki) in stage.iter_mut().zip(x).zip(k) {
        *s = xi + h * ki;
    }
}

fn advance(
    protocol: &ProtocolSpec,
    topology: &Topology,
    x: &mut [f64],
    dt: f64,
    agree_tol: f64,
    ws: &mut Rk4Workspace,
) -> Option<f64> {
    let mut elapsed = 0.0;
    loop {
        let remaining = dt - elapsed;
        let s = spread(x);
        if s <= agree_tol {
            return Some(elapsed);
        }
        if remaining <= 0.0 {
            return None;
        }
        protocol.field_into(topology, x, &mut ws.k1);
        let speed = ws.k1.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        let mut h = remaining;
        if speed > 0.0 {
            let limit = SUBSTEP_FRACTION * s / speed;
            // avoid leaving a sliver shorter than roundoff at the end of the step
            if limit < remaining && remaining - limit > 1e-9 * dt {
                h = limit;
            }
        }

        offset(&mut ws.stage, x, 0.5 * h, &ws.k1);
        protocol.field_into(topology, &ws.stage, &mut ws.k2);
        offset(&mut ws.stage, x, 0.5 * h, &ws.k2);
        protocol.field_into(topology, &ws.stage, &mut ws.k3);
        offset(&mut ws.stage, x, h, &ws.k3);
        protocol.field_into(topology, &ws.stage, &mut ws.k4);
        for (i, xi) in x.iter_mut().enumerate() {
            *xi += h / 6.0 * (ws.k1[i] + 2.0 * ws.k2[i] + 2.0 * ws.k3[i] + ws.k4[i]);
        }
        elapsed = if h == remaining { dt } else { elapsed + h };
    }
}

/// Integrates the scenario until agreement or `t_max`.
///
/// Samples are kept at `t = 0`, every `record_every` base steps, and at the
/// final state. Identical scenarios produce bit-identical trajectories.
pub fn integrate(sc: &Scenario) -> Result<Trajectory> {
    sc.validate()?;
    let steps = StepTopologies::new(sc)?;
    let n = sc.x0.len();
    let mut x = sc.x0.to_vec();
    let mut ws = Rk4Workspace::new(n);
    let max_steps = (sc.t_max / sc.dt).ceil() as u64;

    let mut samples = vec![sample(0.0, &x, steps.at(0))];
    let mut converged_at = None;

    if spread(&x) <= sc.agree_tol {
        snap(&mut x);
        samples[0] = sample(0.0, &x, steps.at(0));
        converged_at = Some(0.0);
    } else {
        for k in 0..max_steps {
            let hit = advance(
                &sc.protocol,
                steps.at(k),
                &mut x,
                sc.dt,
                sc.agree_tol,
                &mut ws,
            );
            let base = k as f64 * sc.dt;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::NumericalBlowup {
                    t: (k + 1) as f64 * sc.dt,
                });
            }
            if let Some(elapsed) = hit {
                let t = base + elapsed;
                snap(&mut x);
                let s = sample(t, &x, steps.at(k + 1));
                if samples.last().is_some_and(|last| last.t >= t) {
                    samples.pop();
                }
                samples.push(s);
                converged_at = Some(t);
                break;
            }
            if (k + 1) % sc.record_every as u64 == 0 || k + 1 == max_steps {
                samples.push(sample((k + 1) as f64 * sc.dt, &x, steps.at(k + 1)));
            }
        }
    }

    let status = if converged_at.is_some() {
        Status::Converged
    } else {
        Status::TimedOut
    };
    Ok(Trajectory {
        final_value: converged_at.map(|_| x[0]),
        samples,
        converged_at,
        status,
        protocol: sc.protocol.kind(),
        dt: sc.dt,
    })
}

fn snap(x: &mut [f64]) {
    let m = mean(x);
    x.fill(m);
}

pub fn observed_convergence_time(traj: &Trajectory) -> Option<f64> {
    traj.converged_at
}

/// Largest `|Σx(t) − Σx(0)|` over the samples.
///
/// Only P2 and the linear protocol conserve the sum; P1 is refused.
pub fn conservation_drift(traj: &Trajectory) -> Result<f64> {
    if traj.protocol == ProtocolKind::P1 {
        return Err(Error::ProtocolMismatch(
            "p1 does not conserve the state sum".into(),
        ));
    }
    let Some(first) = traj.samples.first() else {
        return Ok(0.0);
    };
    Ok(traj
        .samples
        .iter()
        .map(|s| (s.sum - first.sum).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Metric {
    V1,
    V2,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EnvelopeCheck {
    pub passed: bool,
    /// Largest `V(t) − envelope(t)` over the samples (negative when everything
    /// lies strictly below the envelope).
    pub max_violation: f64,
}

/// Checks sampled `V(t) ≤ envelope(v_0, K, α, t) + slack` along a trajectory.
///
/// The slack is `1e-6·v_0 + 10·dt·|dV/dt|`, with the derivative estimated by
/// finite differences between neighboring samples.
pub fn verify_envelope(
    traj: &Trajectory,
    metric: Metric,
    v_0: f64,
    k: f64,
    alpha: f64,
) -> EnvelopeCheck {
    let value = |s: &Sample| match metric {
        Metric::V1 => s.v1,
        Metric::V2 => s.v2,
    };
    let samples = &traj.samples;
    let rate = |i: usize| -> f64 {
        let mut r: f64 = 0.0;
        if i > 0 {
            let dt = samples[i].t - samples[i - 1].t;
            if dt > 0.0 {
                r = r.max(((value(&samples[i]) - value(&samples[i - 1])) / dt).abs());
            }
        }
        if i + 1 < samples.len() {
            let dt = samples[i + 1].t - samples[i].t;
            if dt > 0.0 {
                r = r.max(((value(&samples[i + 1]) - value(&samples[i])) / dt).abs());
            }
        }
        r
    };

    let mut passed = true;
    let mut max_violation = f64::NEG_INFINITY;
    for (i, s) in samples.iter().enumerate() {
        let bound = bounds::envelope(v_0, k, alpha, s.t);
        let violation = value(s) - bound;
        let slack = 1e-6 * v_0 + 10.0 * traj.dt * rate(i);
        if violation > slack {
            passed = false;
        }
        max_violation = max_violation.max(violation);
    }
    EnvelopeCheck {
        passed,
        max_violation,
    }
}
