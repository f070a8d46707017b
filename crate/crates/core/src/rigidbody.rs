//! Body momentum balance. The pressure integrals are split into a part
//! linear in the body acceleration (added mass) and the remaining
//! "vortical" force, so pressure is only ever evaluated on the boundary.
//!
//! Body-frame Bernoulli, with `l = Q^T h'`, `v_b = l + r y_perp` and the
//! acceleration potentials removed:
//!
//! ```text
//! p_v = r (l_perp . Phi_t) - d_t Phi_w + u . v_b - |u|^2 / 2
//! ```
//!
//! where `Phi_t` are the translational Kirchhoff potentials and `d_t Phi_w`
//! is the time derivative of the particle potential with the body frozen.
//! The body then obeys `(diag(m, m, J) + M) (a, r') = F_v` in body axes.

use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{build_map, BodyShape, ConformalMap};
use crate::dynamics::FlowState;
use crate::fieldkernels::{BlobParameter, BodyMotion, FlowField, KirchhoffBasis};
use crate::{Error, Result, Vec2};

/// Boundary nodes of the fine quadrature; the coarse one uses every other node.
pub const QUAD_NODES: usize = 512;
pub const QUAD_TOL: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BodyState {
    pub h: Vec2,
    pub hdot: Vec2,
    pub theta: f64,
    pub r: f64,
    pub m: f64,
    #[serde(rename = "J")]
    pub j: f64,
}

impl BodyState {
    pub fn at_rest(m: f64, j: f64) -> Self {
        BodyState { h: Vec2::ZERO, hdot: Vec2::ZERO, theta: 0.0, r: 0.0, m, j }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.m > 0.0 && self.j > 0.0) {
            return Err(Error::Input(format!("mass and inertia must be positive (m={}, J={})", self.m, self.j)));
        }
        if !(self.h.is_finite() && self.hdot.is_finite() && self.theta.is_finite() && self.r.is_finite()) {
            return Err(Error::Input("non-finite body state".into()));
        }
        Ok(())
    }

    /// Body-frame point to lab frame.
    pub fn to_lab(&self, y: Vec2) -> Vec2 {
        y.rotate(self.theta) + self.h
    }

    /// Lab vector to body axes.
    pub fn to_body_axes(&self, v: Vec2) -> Vec2 {
        v.rotate(-self.theta)
    }

    pub fn motion(&self) -> BodyMotion {
        BodyMotion { ell: self.to_body_axes(self.hdot), r: self.r }
    }
}

/// Symmetric added-mass matrix in body axes, ordering (x, y, rotation).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AddedMassMatrix {
    pub m: [[f64; 3]; 3],
}

impl AddedMassMatrix {
    pub fn matrix(&self) -> Matrix3<f64> {
        Matrix3::from_fn(|i, j| self.m[i][j])
    }

    /// Translational block rotated into the lab frame, `R M_t R^T`.
    pub fn translational_lab(&self, theta: f64) -> [[f64; 2]; 2] {
        let (s, c) = theta.sin_cos();
        let q = [[c, -s], [s, c]];
        let mut out = [[0.0; 2]; 2];
        for (i, row) in out.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                for a in 0..2 {
                    for b in 0..2 {
                        *v += q[i][a] * self.m[a][b] * q[j][b];
                    }
                }
            }
        }
        out
    }
}

/// `M_ab = oint Phi_a n_b dsigma`, `n` pointing into the body and
/// `n_3 = y_perp . n`, by trapezoid quadrature in the map parameter.
pub fn added_mass(map: &ConformalMap, shape: &BodyShape) -> Result<AddedMassMatrix> {
    shape.validate()?;
    let basis = KirchhoffBasis::new(map)?;
    Ok(added_mass_with(map, &basis))
}

fn added_mass_with(map: &ConformalMap, basis: &KirchhoffBasis) -> AddedMassMatrix {
    let n = QUAD_NODES;
    let dth = 2.0 * PI / n as f64;
    let mut m = [[0.0; 3]; 3];
    for b in map.boundary_points(n) {
        let phi = basis.unit_potentials(b.w);
        let nw = Vec2::from(-b.normal_ds() * dth);
        let y = Vec2::from(b.z);
        let nb = [nw.x, nw.y, y.perp().dot(nw)];
        for (i, row) in m.iter_mut().enumerate() {
            for (j, v) in row.iter_mut().enumerate() {
                *v += phi[i] * nb[j];
            }
        }
    }
    for i in 0..3 {
        for j in 0..i {
            let s = 0.5 * (m[i][j] + m[j][i]);
            m[i][j] = s;
            m[j][i] = s;
        }
    }
    AddedMassMatrix { m }
}

/// Everything that depends on the shape only.
#[derive(Debug, Clone)]
pub struct Body {
    pub shape: BodyShape,
    pub map: ConformalMap,
    pub kirchhoff: KirchhoffBasis,
    pub added_mass: AddedMassMatrix,
    /// Infinite-mass mode: the body keeps its initial motion.
    pub fixed: bool,
}

impl Body {
    pub fn new(shape: BodyShape, order: usize, fixed: bool) -> Result<Self> {
        let map = build_map(&shape, order)?;
        Self::with_map(shape, map, fixed)
    }

    pub fn with_map(shape: BodyShape, map: ConformalMap, fixed: bool) -> Result<Self> {
        shape.validate()?;
        let kirchhoff = KirchhoffBasis::new(&map)?;
        let added_mass = added_mass_with(&map, &kirchhoff);
        Ok(Body { shape, map, kirchhoff, added_mass, fixed })
    }

    pub fn field<'a>(&'a self, state: &FlowState, blob: BlobParameter) -> Result<FlowField<'a>> {
        FlowField::new(&self.map, &self.kirchhoff, &state.particles, state.body.motion(), state.gamma_bound, blob)
    }
}

/// Force and torque (about `h`) from the vortical pressure, body axes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VorticalForce {
    pub body_axes: [f64; 3],
    /// Difference between the 256- and 512-node estimates.
    pub quadrature_delta: [f64; 3],
}

/// Particle velocities relative to the body frame, `u - l - r y_perp`.
pub fn relative_particle_velocities(field: &FlowField) -> Vec<Vec2> {
    let motion = field.motion;
    let one = |i: usize| field.particle_velocity(i) - motion.rigid_velocity(field.particles[i].pos);
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        (0..field.particles.len()).into_par_iter().map(one).collect()
    }
    #[cfg(not(feature = "parallel"))]
    {
        (0..field.particles.len()).map(one).collect()
    }
}

/// Boundary quadrature of the vortical pressure given the relative particle
/// velocities `ydot`.
pub fn vortical_force_with(field: &FlowField, ydot: &[Vec2]) -> Result<VorticalForce> {
    let map = field.map;
    let motion = field.motion;
    let n = QUAD_NODES;
    let dth = 2.0 * PI / n as f64;
    let etadot: Vec<Complex64> = field
        .particles
        .iter()
        .zip(ydot)
        .map(|(p, v)| p.dt * v.to_complex())
        .collect();
    let mut fine = [0.0; 3];
    let mut coarse = [0.0; 3];
    let mut scale = [0.0; 3];
    let rmax = map.circumradius();
    for (k, b) in map.boundary_points(n).into_iter().enumerate() {
        let xi = b.w;
        let v = field.dw(xi, None, false) / b.df;
        let u = Vec2::new(v.re, -v.im);
        let y = Vec2::from(b.z);
        let phi = field.kirchhoff.unit_potentials(xi);
        let mut dphi = 0.0;
        for (p, ed) in field.particles.iter().zip(&etadot) {
            let t = -ed / (xi - p.eta) - ed.conj() / (p.eta.conj() * p.eta.conj() * (xi - p.eta_star));
            // Re[(g / 2 pi i) t] = (g / 2 pi) Im t
            dphi += p.gamma / (2.0 * PI) * t.im;
        }
        let lp = motion.ell.perp();
        let p = motion.r * (lp.x * phi[0] + lp.y * phi[1]) - dphi + u.dot(motion.rigid_velocity(y))
            - 0.5 * u.norm_sqr();
        let nds = Vec2::from(-b.normal_ds() * dth);
        let w = [nds.x, nds.y, y.cross(nds)];
        for i in 0..3 {
            fine[i] += p * w[i];
            if k % 2 == 0 {
                coarse[i] += 2.0 * p * w[i];
            }
        }
        let ds = nds.norm();
        scale[0] += p.abs() * ds;
        scale[1] += p.abs() * ds;
        scale[2] += p.abs() * ds * rmax;
    }
    let delta = [fine[0] - coarse[0], fine[1] - coarse[1], fine[2] - coarse[2]];
    for i in 0..3 {
        if !fine[i].is_finite() {
            return Err(Error::QuadratureUnresolved(f64::INFINITY));
        }
        if delta[i].abs() > QUAD_TOL * scale[i] + 1e-300 {
            return Err(Error::QuadratureUnresolved(delta[i].abs() / scale[i]));
        }
    }
    Ok(VorticalForce { body_axes: fine, quadrature_delta: delta })
}

/// Vortical force and torque in the lab frame `(F1, F2, tau)`.
pub fn vortical_force(body: &Body, state: &FlowState, blob: BlobParameter) -> Result<[f64; 3]> {
    let field = body.field(state, blob)?;
    let ydot = relative_particle_velocities(&field);
    let f = vortical_force_with(&field, &ydot)?.body_axes;
    let fl = Vec2::new(f[0], f[1]).rotate(state.body.theta);
    Ok([fl.x, fl.y, f[2]])
}

/// Solve `(diag(m, m, J) + M) (a, r') = F_v` in body axes. Returns the lab
/// acceleration `h''` and `r'`.
pub fn solve_body(body: &Body, state: &BodyState, force_body_axes: [f64; 3]) -> Result<(Vec2, f64)> {
    if body.fixed {
        return Ok((Vec2::ZERO, 0.0));
    }
    let a = Matrix3::from_diagonal(&Vector3::new(state.m, state.m, state.j)) + body.added_mass.matrix();
    let rhs = Vector3::from(force_body_axes);
    let chol = a.cholesky().ok_or(Error::SingularSystem)?;
    let x = chol.solve(&rhs);
    let res = (a * x - rhs).norm();
    if !(res <= 1e-12 * (1.0 + rhs.norm()) * a.norm()) {
        return Err(Error::SingularSystem);
    }
    Ok((Vec2::new(x[0], x[1]).rotate(state.theta), x[2]))
}

pub fn body_acceleration(body: &Body, state: &FlowState, blob: BlobParameter) -> Result<(Vec2, f64)> {
    let field = body.field(state, blob)?;
    let ydot = relative_particle_velocities(&field);
    let f = vortical_force_with(&field, &ydot)?;
    solve_body(body, &state.body, f.body_axes)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fieldkernels::VortexParticle;

    fn state(body: BodyState, particles: Vec<VortexParticle>, gamma_bound: f64) -> FlowState {
        FlowState { body, particles, gamma_bound, time: 0.0 }
    }

    #[test]
    fn disk_added_mass() {
        for a in [1.0, 0.5, 2.0] {
            let shape = BodyShape::Disk { radius: a };
            let m = added_mass(&build_map(&shape, 0).unwrap(), &shape).unwrap().m;
            let expect = [[PI * a * a, 0.0, 0.0], [0.0, PI * a * a, 0.0], [0.0, 0.0, 0.0]];
            for i in 0..3 {
                for j in 0..3 {
                    assert!((m[i][j] - expect[i][j]).abs() < 1e-12, "{a} {m:?}");
                }
            }
        }
    }

    #[test]
    fn ellipse_added_mass() {
        let shape = BodyShape::Ellipse { semi_axes: [2.0, 1.0] };
        let m = added_mass(&build_map(&shape, 0).unwrap(), &shape).unwrap().m;
        assert!((m[0][0] - PI).abs() < 1e-10);
        assert!((m[1][1] - 4.0 * PI).abs() < 1e-10);
        // rotational entry pi (a^2 - b^2)^2 / 8
        assert!((m[2][2] - PI * 9.0 / 8.0).abs() < 1e-10, "{m:?}");
        assert!(m[0][1].abs() < 1e-12 && m[0][2].abs() < 1e-12);
    }

    #[test]
    fn rotated_ellipse_translational_block() {
        let base = added_mass(&ConformalMap::ellipse(2.0, 1.0), &BodyShape::Ellipse { semi_axes: [2.0, 1.0] }).unwrap();
        for k in 0..8 {
            let th = k as f64 * PI / 8.0 + 0.1;
            let pts: Vec<Vec2> = (0..256)
                .map(|i| {
                    let t = 2.0 * PI * i as f64 / 256.0;
                    Vec2::new(2.0 * t.cos(), t.sin()).rotate(th)
                })
                .collect();
            let shape = BodyShape::Polyline { points: pts };
            let map = build_map(&shape, 0).unwrap();
            let m = added_mass(&map, &shape).unwrap();
            let expect = base.translational_lab(th);
            for i in 0..2 {
                for j in 0..2 {
                    assert!((m.m[i][j] - expect[i][j]).abs() < 1e-5, "{th} {i}{j} {} {}", m.m[i][j], expect[i][j]);
                }
            }
        }
    }

    #[test]
    fn quiescent_has_no_force() {
        let body = Body::new(BodyShape::Ellipse { semi_axes: [1.5, 1.0] }, 0, false).unwrap();
        let s = state(BodyState::at_rest(1.0, 1.0), vec![], 0.0);
        let f = vortical_force(&body, &s, BlobParameter::POINT).unwrap();
        assert_eq!(f, [0.0, 0.0, 0.0]);
        let (a, rd) = body_acceleration(&body, &s, BlobParameter::POINT).unwrap();
        assert_eq!((a, rd), (Vec2::ZERO, 0.0));
    }

    #[test]
    fn kutta_joukowski_lift() {
        // steady translation with circulation: F = gamma U_perp
        let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, false).unwrap();
        let mut b = BodyState::at_rest(1.0, 1.0);
        b.hdot = Vec2::new(0.7, -0.2);
        b.theta = 0.4;
        let g = 1.5;
        let f = vortical_force(&body, &state(b, vec![], g), BlobParameter::POINT).unwrap();
        let expect = b.hdot.perp() * g;
        assert!((Vec2::new(f[0], f[1]) - expect).norm() < 1e-12, "{f:?}");
        assert!(f[2].abs() < 1e-12);
    }

    #[test]
    fn mirror_symmetric_configuration() {
        let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, false).unwrap();
        let mut b = BodyState::at_rest(2.0, 1.0);
        b.hdot = Vec2::new(0.3, 0.0);
        let ps = vec![
            VortexParticle { pos: Vec2::new(-3.0, 0.8), gamma: 1.0 },
            VortexParticle { pos: Vec2::new(-3.0, -0.8), gamma: -1.0 },
        ];
        let f = vortical_force(&body, &state(b, ps, 0.0), BlobParameter::POINT).unwrap();
        assert!(f[1].abs() < 1e-12 && f[2].abs() < 1e-12, "{f:?}");
        assert!(f[0].abs() > 1e-3);
    }

    #[test]
    fn disk_rdot_vanishes() {
        let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, false).unwrap();
        let mut b = BodyState::at_rest(2.0, 0.5);
        b.hdot = Vec2::new(0.3, 0.1);
        b.r = 0.7;
        let ps = vec![
            VortexParticle { pos: Vec2::new(1.5, 2.0), gamma: 0.8 },
            VortexParticle { pos: Vec2::new(-2.5, 0.3), gamma: -1.3 },
        ];
        let (_, rd) = body_acceleration(&body, &state(b, ps, 0.2), BlobParameter::POINT).unwrap();
        assert!(rd.abs() < 1e-12);
    }

    #[test]
    fn scalar_added_mass_reduction() {
        let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, false).unwrap();
        let b = BodyState::at_rest(3.0, 1.0);
        let ps = vec![VortexParticle { pos: Vec2::new(0.0, 2.0), gamma: 2.0 }];
        let s = state(b, ps, 0.0);
        let f = vortical_force(&body, &s, BlobParameter::POINT).unwrap();
        let (a, _) = body_acceleration(&body, &s, BlobParameter::POINT).unwrap();
        let fv = Vec2::new(f[0], f[1]);
        assert!((a - fv * (1.0 / (3.0 + PI))).norm() < 1e-12);
    }

    #[test]
    fn unresolved_quadrature_is_reported() {
        let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, false).unwrap();
        let ps = vec![VortexParticle { pos: Vec2::new(1.0005, 0.0), gamma: 1.0 }];
        let r = vortical_force(&body, &state(BodyState::at_rest(1.0, 1.0), ps, 0.0), BlobParameter::POINT);
        assert!(matches!(r, Err(Error::QuadratureUnresolved(_))), "{r:?}");
    }
}
