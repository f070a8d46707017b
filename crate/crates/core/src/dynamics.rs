//! Coupled body + particle evolution in the body frame `x = Q(theta) y + h`.
//!
//! Particles are stored in body coordinates and move with the fluid velocity
//! relative to the rotating, translating frame; the body obeys the
//! added-mass system of [`crate::rigidbody`]. Time stepping is classical RK4.

use serde::{Deserialize, Serialize};

use crate::fieldkernels::{BlobParameter, VortexParticle};
use crate::rigidbody::{relative_particle_velocities, solve_body, vortical_force_with, Body, BodyState};
use crate::{Error, Result, Vec2};

/// Particles closer than this fraction of the body diameter abort the run.
pub const CLOSE_FRACTION: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FlowState {
    pub body: BodyState,
    /// Positions in body coordinates.
    pub particles: Vec<VortexParticle>,
    pub gamma_bound: f64,
    pub time: f64,
}

impl FlowState {
    pub fn total_circulation(&self) -> f64 {
        self.gamma_bound + self.particles.iter().map(|p| p.gamma).sum::<f64>()
    }

    pub fn lab_positions(&self) -> Vec<Vec2> {
        self.particles.iter().map(|p| self.body.to_lab(p.pos)).collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scheme {
    #[default]
    Rk4,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegratorConfig {
    pub dt: f64,
    #[serde(default)]
    pub scheme: Scheme,
    #[serde(default)]
    pub blob: BlobParameter,
    pub max_steps: usize,
}

impl IntegratorConfig {
    pub fn new(dt: f64, blob: BlobParameter) -> Self {
        IntegratorConfig { dt, scheme: Scheme::Rk4, blob, max_steps: usize::MAX }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Input(format!("dt must be positive, got {}", self.dt)));
        }
        BlobParameter::new(self.blob.delta).map(|_| ())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Derivative {
    /// Body-frame particle velocities.
    pub particle_velocities: Vec<Vec2>,
    pub hdot: Vec2,
    pub hddot: Vec2,
    pub thetadot: f64,
    pub rdot: f64,
}

pub fn check_clearance(body: &Body, state: &FlowState) -> Result<()> {
    let limit = CLOSE_FRACTION * body.map.diameter();
    for (index, p) in state.particles.iter().enumerate() {
        let distance = match body.map.eval(p.pos) {
            Ok(e) => (e.xi.norm() - 1.0) / e.dt.norm(),
            Err(Error::InsideBody { .. }) => 0.0,
            Err(e) => return Err(e),
        };
        if distance < limit {
            return Err(Error::ParticleTooClose { index, distance, limit });
        }
    }
    Ok(())
}

pub fn state_derivative(body: &Body, state: &FlowState, blob: BlobParameter) -> Result<Derivative> {
    check_clearance(body, state)?;
    let field = body.field(state, blob)?;
    let ydot = relative_particle_velocities(&field);
    let (hddot, rdot) = if body.fixed {
        (Vec2::ZERO, 0.0)
    } else {
        let f = vortical_force_with(&field, &ydot)?;
        solve_body(body, &state.body, f.body_axes)?
    };
    Ok(Derivative {
        particle_velocities: ydot,
        hdot: state.body.hdot,
        hddot,
        thetadot: state.body.r,
        rdot,
    })
}

/// `state + dt * d`, circulations copied untouched.
fn advance(state: &FlowState, d: &Derivative, dt: f64) -> FlowState {
    let mut s = state.clone();
    for (p, v) in s.particles.iter_mut().zip(&d.particle_velocities) {
        p.pos += *v * dt;
    }
    s.body.h += d.hdot * dt;
    s.body.hdot += d.hddot * dt;
    s.body.theta += d.thetadot * dt;
    s.body.r += d.rdot * dt;
    s.time += dt;
    s
}

fn rk4(body: &Body, state: &FlowState, dt: f64, blob: BlobParameter) -> Result<FlowState> {
    let k1 = state_derivative(body, state, blob)?;
    let stage = |s: &FlowState| state_derivative(body, s, blob).map_err(|e| Error::StepRejected(Box::new(e)));
    let k2 = stage(&advance(state, &k1, 0.5 * dt))?;
    let k3 = stage(&advance(state, &k2, 0.5 * dt))?;
    let k4 = stage(&advance(state, &k3, dt))?;
    let w = dt / 6.0;
    let mut s = state.clone();
    for (i, p) in s.particles.iter_mut().enumerate() {
        let v = k1.particle_velocities[i]
            + (k2.particle_velocities[i] + k3.particle_velocities[i]) * 2.0
            + k4.particle_velocities[i];
        p.pos += v * w;
    }
    s.body.h += (k1.hdot + (k2.hdot + k3.hdot) * 2.0 + k4.hdot) * w;
    s.body.hdot += (k1.hddot + (k2.hddot + k3.hddot) * 2.0 + k4.hddot) * w;
    s.body.theta += (k1.thetadot + 2.0 * (k2.thetadot + k3.thetadot) + k4.thetadot) * w;
    s.body.r += (k1.rdot + 2.0 * (k2.rdot + k3.rdot) + k4.rdot) * w;
    s.time = state.time + dt;
    Ok(s)
}

pub fn step(body: &Body, state: &FlowState, config: &IntegratorConfig) -> Result<FlowState> {
    step_by(body, state, config, config.dt)
}

fn step_by(body: &Body, state: &FlowState, config: &IntegratorConfig, dt: f64) -> Result<FlowState> {
    match config.scheme {
        Scheme::Rk4 => rk4(body, state, dt, config.blob),
    }
}

/// Outcome of [`run`]: the last good state and, on abort, the reason.
#[derive(Debug)]
pub struct RunOutcome {
    pub state: FlowState,
    pub steps: usize,
    pub error: Option<Error>,
}

/// Number of steps to reach `t_end`; the last step is shortened if needed.
pub fn step_count(t_end: f64, dt: f64) -> usize {
    if t_end <= 0.0 {
        return 0;
    }
    let n = (t_end / dt).round();
    if (n * dt - t_end).abs() <= 1e-9 * t_end.max(dt) {
        n as usize
    } else {
        (t_end / dt).ceil() as usize
    }
}

/// Integrate to `t_end`, calling `sink` with the initial state and then
/// every `every` steps (and at the final step).
pub fn run(
    body: &Body,
    initial: FlowState,
    config: &IntegratorConfig,
    t_end: f64,
    every: usize,
    mut sink: impl FnMut(&FlowState, usize) -> Result<()>,
) -> RunOutcome {
    let every = every.max(1);
    let n = step_count(t_end, config.dt).min(config.max_steps);
    let t0 = initial.time;
    let mut state = initial;
    if let Err(e) = sink(&state, 0) {
        return RunOutcome { state, steps: 0, error: Some(e) };
    }
    for k in 1..=n {
        let dt = if k == n { (t0 + t_end - state.time).min(config.dt) } else { config.dt };
        let next = match step_by(body, &state, config, dt) {
            Ok(mut s) => {
                s.time = if k == n { t0 + t_end } else { t0 + k as f64 * config.dt };
                s
            }
            Err(e) => return RunOutcome { state, steps: k - 1, error: Some(e) },
        };
        state = next;
        if k % every == 0 || k == n {
            if let Err(e) = sink(&state, k) {
                return RunOutcome { state, steps: k, error: Some(e) };
            }
        }
    }
    RunOutcome { state, steps: n, error: None }
}
