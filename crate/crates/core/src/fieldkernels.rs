//! Exterior Green's function, image kernels and the three pieces of the
//! fluid velocity: particle-induced (Biot-Savart with images), Kirchhoff
//! potential flow matching the body motion, and the harmonic circulation
//! field.
//!
//! Everything is evaluated through the conformal map: with `xi = T(x)` and
//! `eta = T(y)`, the stream function of a unit vortex at `y` is
//!
//! ```text
//! G(x, y) = (1/2pi) ln( |xi - eta| / (|xi - eta*| |eta|) ),   eta* = eta / |eta|^2
//! ```
//!
//! and velocities are `u = grad_perp psi = (-d2 psi, d1 psi)`. Internally the
//! conjugate velocity `u1 - i u2` is assembled from complex-potential
//! derivatives in the mapped plane and multiplied by `T'(x)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::conformal::{ConformalMap, MapEval};
use crate::spectral::coefficients;
use crate::{Error, Result, Vec2};

const INV_2PI: f64 = 0.5 / PI;

/// Point vortex carried in the body frame.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct VortexParticle {
    pub pos: Vec2,
    pub gamma: f64,
}

/// Desingularisation radius of the direct particle-particle term.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BlobParameter {
    pub delta: f64,
}

impl BlobParameter {
    pub const POINT: BlobParameter = BlobParameter { delta: 0.0 };

    pub fn new(delta: f64) -> Result<Self> {
        if !(delta.is_finite() && delta >= 0.0) {
            return Err(Error::Input(format!("blob delta must be >= 0, got {delta}")));
        }
        Ok(BlobParameter { delta })
    }

    /// Blob radius in the mapped plane.
    pub fn mapped(&self, map: &ConformalMap) -> f64 {
        self.delta * map.scale
    }
}

/// Rigid velocity of the body, in body-frame components, rotation about
/// the body-frame origin.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct BodyMotion {
    pub ell: Vec2,
    pub r: f64,
}

impl BodyMotion {
    /// Rigid velocity `ell + r x_perp` at `x`.
    pub fn rigid_velocity(&self, x: Vec2) -> Vec2 {
        self.ell + x.perp() * self.r
    }
}

/// `xi* = xi / |xi|^2`, reflection across the unit circle.
pub fn inversion_point(xi: Vec2) -> Result<Vec2> {
    let n2 = xi.norm_sqr();
    if !(n2 >= 1.0 - 1e-12) {
        return Err(Error::Input(format!("inversion_point needs |xi| >= 1, got {}", n2.sqrt())));
    }
    Ok(xi * (1.0 / n2))
}

fn star(eta: Complex64) -> Complex64 {
    eta.conj().inv()
}

pub fn green_function(map: &ConformalMap, x: Vec2, y: Vec2) -> Result<f64> {
    let xi = map.forward_complex(x.to_complex())?;
    let eta = map.forward_complex(y.to_complex())?;
    let d = (xi - eta).norm();
    if d == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(INV_2PI * (d / ((xi - star(eta)).norm() * eta.norm())).ln())
}

/// `K(x, y) = (1/2pi) (T(x) - T(y)) / |T(x) - T(y)|^2`.
pub fn kernel_k(map: &ConformalMap, x: Vec2, y: Vec2) -> Result<Vec2> {
    let xi = map.forward_complex(x.to_complex())?;
    let eta = map.forward_complex(y.to_complex())?;
    let d = xi - eta;
    if d.norm_sqr() == 0.0 {
        return Err(Error::CoincidentPoints);
    }
    Ok(Vec2::from(d) * (INV_2PI / d.norm_sqr()))
}

/// `K*(x, y) = (1/2pi) (T(x) - T(y)*) / |T(x) - T(y)*|^2`.
pub fn kernel_kstar(map: &ConformalMap, x: Vec2, y: Vec2) -> Result<Vec2> {
    let xi = map.forward_complex(x.to_complex())?;
    let eta = map.forward_complex(y.to_complex())?;
    let d = xi - star(eta);
    Ok(Vec2::from(d) * (INV_2PI / d.norm_sqr()))
}

/// Particle-induced velocity `sum_j gamma_j grad_perp_x G(x, x_j)`, written
/// as `d_i psi = sum_j gamma_j (K - K*) . d_i T(x)` with the direct kernel
/// regularised as `1/(rho^2 + delta^2)` in the mapped plane.
pub fn velocity_from_particles(
    map: &ConformalMap,
    particles: &[VortexParticle],
    x: Vec2,
    blob: BlobParameter,
) -> Result<Vec2> {
    let e = map.eval(x)?;
    let d1t = Vec2::new(e.dt.re, e.dt.im); // d T / d x1
    let d2t = Vec2::new(-e.dt.im, e.dt.re); // d T / d x2
    let dm2 = blob.mapped(map).powi(2);
    let mut grad = Vec2::ZERO;
    for p in particles {
        let eta = map.forward_complex(p.pos.to_complex())?;
        let a = e.xi - eta;
        let den = a.norm_sqr() + dm2;
        if den == 0.0 {
            return Err(Error::CoincidentPoints);
        }
        let k = Vec2::from(a) * (INV_2PI / den);
        let b = e.xi - star(eta);
        let ks = Vec2::from(b) * (INV_2PI / b.norm_sqr());
        let diff = k - ks;
        grad += Vec2::new(diff.dot(d1t), diff.dot(d2t)) * p.gamma;
    }
    Ok(Vec2::new(-grad.y, grad.x))
}

/// Unit-circulation irrotational field `grad_perp[(1/2pi) ln|T(x)|]`.
pub fn harmonic_circulation_field(map: &ConformalMap, x: Vec2) -> Result<Vec2> {
    let e = map.eval(x)?;
    Ok(conj_to_velocity(e.dt * Complex64::new(0.0, -INV_2PI) / e.xi))
}

/// `u1 - i u2  ->  (u1, u2)`.
fn conj_to_velocity(v: Complex64) -> Vec2 {
    Vec2::new(v.re, -v.im)
}

/// Complex potentials `W_a(xi) = sum_k a_k xi^-k` of the three unit rigid
/// motions (x-translation, y-translation, rotation about the origin), with
/// `Im W_a` equal to the rigid stream function on the body boundary.
#[derive(Debug, Clone)]
pub struct KirchhoffBasis {
    coeffs: [Vec<Complex64>; 3],
}

impl KirchhoffBasis {
    pub fn new(map: &ConformalMap) -> Result<Self> {
        let n = (4 * (map.order() + 2)).next_power_of_two().max(64);
        let pts = map.boundary_points(n);
        let targets: [Vec<Complex64>; 3] = [
            pts.iter().map(|b| Complex64::new(b.z.im, 0.0)).collect(),
            pts.iter().map(|b| Complex64::new(-b.z.re, 0.0)).collect(),
            pts.iter().map(|b| Complex64::new(-0.5 * b.z.norm_sqr(), 0.0)).collect(),
        ];
        // keep modes that the finite Laurent series can actually produce
        let kmax = 2 * map.order() + 3;
        let coeffs = targets.map(|t| {
            let g = coefficients(&t);
            (1..=kmax.min(n / 2 - 1))
                .map(|k| Complex64::i() * 2.0 * g[n - k])
                .collect::<Vec<_>>()
        });
        if coeffs.iter().flatten().any(|c| !c.is_finite()) {
            return Err(Error::ExpansionDiverged);
        }
        let mut basis = KirchhoffBasis { coeffs };
        for c in basis.coeffs.iter_mut() {
            while c.last().is_some_and(|v| v.norm() < 1e-17) {
                c.pop();
            }
        }
        Ok(basis)
    }

    fn combined(&self, motion: BodyMotion, f: impl Fn(&[Complex64]) -> Complex64) -> Complex64 {
        f(&self.coeffs[0]) * motion.ell.x + f(&self.coeffs[1]) * motion.ell.y + f(&self.coeffs[2]) * motion.r
    }

    /// `W(xi)` for the motion.
    pub fn potential(&self, xi: Complex64, motion: BodyMotion) -> Complex64 {
        self.combined(motion, |c| series(c, xi))
    }

    /// `dW/dxi` for the motion.
    pub fn dw(&self, xi: Complex64, motion: BodyMotion) -> Complex64 {
        self.combined(motion, |c| series_derivative(c, xi))
    }

    /// Velocity potentials `Phi_a = Re W_a` of the three unit motions.
    pub fn unit_potentials(&self, xi: Complex64) -> [f64; 3] {
        [
            series(&self.coeffs[0], xi).re,
            series(&self.coeffs[1], xi).re,
            series(&self.coeffs[2], xi).re,
        ]
    }
}

/// `sum_{k>=1} c[k-1] xi^-k`.
fn series(c: &[Complex64], xi: Complex64) -> Complex64 {
    let inv = xi.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for ck in c.iter().rev() {
        acc = (acc + ck) * inv;
    }
    acc
}

/// `d/dxi sum_{k>=1} c[k-1] xi^-k`.
fn series_derivative(c: &[Complex64], xi: Complex64) -> Complex64 {
    let inv = xi.inv();
    let mut acc = Complex64::new(0.0, 0.0);
    for (i, ck) in c.iter().enumerate().rev() {
        acc = acc * inv - ck * (i as f64 + 1.0);
    }
    acc * inv * inv
}

/// Potential flow induced by the rigid motion; `u . n` matches the body
/// normal velocity on the boundary and `|u| = O(|x|^-2)` at infinity.
pub fn kirchhoff_velocity(map: &ConformalMap, motion: BodyMotion, x: Vec2) -> Result<Vec2> {
    let basis = KirchhoffBasis::new(map)?;
    let e = map.eval(x)?;
    Ok(conj_to_velocity(basis.dw(e.xi, motion) * e.dt))
}

/// Sum of particle, Kirchhoff and harmonic velocities. `gamma_bound` is the
/// circulation around the body; the harmonic field carries
/// `gamma_bound + sum gamma_j` so that the far-field circulation is the
/// total circulation of the flow.
pub fn total_velocity(
    map: &ConformalMap,
    particles: &[VortexParticle],
    motion: BodyMotion,
    gamma_bound: f64,
    x: Vec2,
    blob: BlobParameter,
) -> Result<Vec2> {
    let basis = KirchhoffBasis::new(map)?;
    let field = FlowField::new(map, &basis, particles, motion, gamma_bound, blob)?;
    field.velocity_at(x, true)
}

/// Particle mapped to the unit-disk exterior.
#[derive(Debug, Clone, Copy)]
pub struct MappedParticle {
    pub gamma: f64,
    pub pos: Vec2,
    pub eta: Complex64,
    pub eta_star: Complex64,
    pub dt: Complex64,
    pub d2t: Complex64,
}

/// Snapshot of the whole velocity field with particles pre-mapped.
#[derive(Debug, Clone)]
pub struct FlowField<'a> {
    pub map: &'a ConformalMap,
    pub kirchhoff: &'a KirchhoffBasis,
    pub particles: Vec<MappedParticle>,
    pub motion: BodyMotion,
    pub gamma_bound: f64,
    /// Coefficient of the unit harmonic field.
    pub harmonic_strength: f64,
    /// Blob radius in the mapped plane.
    pub delta_mapped: f64,
}

impl<'a> FlowField<'a> {
    pub fn new(
        map: &'a ConformalMap,
        kirchhoff: &'a KirchhoffBasis,
        particles: &[VortexParticle],
        motion: BodyMotion,
        gamma_bound: f64,
        blob: BlobParameter,
    ) -> Result<Self> {
        let mapped = particles
            .iter()
            .map(|p| {
                let e = map.eval(p.pos)?;
                Ok(MappedParticle {
                    gamma: p.gamma,
                    pos: p.pos,
                    eta: e.xi,
                    eta_star: star(e.xi),
                    dt: e.dt,
                    d2t: e.d2t,
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let total: f64 = particles.iter().map(|p| p.gamma).sum();
        Ok(FlowField {
            map,
            kirchhoff,
            particles: mapped,
            motion,
            gamma_bound,
            harmonic_strength: gamma_bound + total,
            delta_mapped: blob.mapped(map),
        })
    }

    /// `dW/dxi` of the particle field (direct and image terms) at `xi`.
    /// `skip` removes one particle's direct term; `blob` applies the
    /// mapped-plane regularisation to direct terms.
    pub fn particle_dw(&self, xi: Complex64, skip: Option<usize>, blob: bool) -> Complex64 {
        let d2 = if blob { self.delta_mapped * self.delta_mapped } else { 0.0 };
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, p) in self.particles.iter().enumerate() {
            let image = (xi - p.eta_star).inv();
            let direct = if skip == Some(j) {
                Complex64::new(0.0, 0.0)
            } else {
                let a = xi - p.eta;
                a.conj() / (a.norm_sqr() + d2)
            };
            acc += (direct - image) * p.gamma;
        }
        acc * Complex64::new(0.0, -INV_2PI)
    }

    /// `dW/dxi` of the full field (particles, Kirchhoff, harmonic).
    pub fn dw(&self, xi: Complex64, skip: Option<usize>, blob: bool) -> Complex64 {
        self.particle_dw(xi, skip, blob)
            + self.kirchhoff.dw(xi, self.motion)
            + Complex64::new(0.0, -INV_2PI * self.harmonic_strength) / xi
    }

    /// Velocity at the point whose image is `e.xi`.
    pub fn velocity_eval(&self, e: &MapEval, blob: bool) -> Vec2 {
        conj_to_velocity(self.dw(e.xi, None, blob) * e.dt)
    }

    pub fn velocity_at(&self, x: Vec2, blob: bool) -> Result<Vec2> {
        let e = self.map.eval(x)?;
        Ok(self.velocity_eval(&e, blob))
    }

    /// Velocity (body-frame components) advecting particle `i`: own direct
    /// term removed as the physical-plane singularity, which leaves the
    /// Routh correction `gamma T'' / (4 pi i T')`.
    pub fn particle_velocity(&self, i: usize) -> Vec2 {
        let p = &self.particles[i];
        let v = self.dw(p.eta, Some(i), true) * p.dt
            + Complex64::new(0.0, -INV_2PI * p.gamma) * p.d2t / (p.dt * 2.0);
        conj_to_velocity(v)
    }

    /// Velocity potential `Re W` at `xi` (multivalued pieces on a fixed branch).
    pub fn potential(&self, xi: Complex64) -> f64 {
        let mut w = self.kirchhoff.potential(xi, self.motion).re;
        for p in &self.particles {
            // Re[(g / 2 pi i) log(.)] = (g / 2 pi) arg(.)
            w += INV_2PI * p.gamma * ((xi - p.eta).arg() - (xi - p.eta_star).arg());
        }
        w + INV_2PI * self.harmonic_strength * xi.arg()
    }
}
