//! Boundary corrector `Lambda = grad_perp((1 - phi_h) U)`: a compactly
//! supported divergence-free field with the body's normal velocity on the
//! boundary, `U` being the stream function of the rigid motion.

use serde::{Deserialize, Serialize};

use crate::dynamics::FlowState;
use crate::fieldkernels::BlobParameter;
use crate::rigidbody::{Body, BodyState};
use crate::{Error, Result, Vec2};

/// Radial cutoff: `phi = 0` for `|x - h| <= inner`, `phi = 1` beyond `outer`,
/// quintic smoothstep in between.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CorrectorCutoff {
    pub inner: f64,
    pub outer: f64,
}

impl CorrectorCutoff {
    pub fn new(inner: f64, outer: f64) -> Result<Self> {
        if !(inner > 0.0 && outer > inner && outer.is_finite()) {
            return Err(Error::Input(format!("cutoff needs 0 < inner < outer, got {inner}, {outer}")));
        }
        Ok(CorrectorCutoff { inner, outer })
    }

    /// Radii `1.1 rho_S` and `2.2 rho_S` for circumradius `rho_S`.
    pub fn for_circumradius(rho: f64) -> Self {
        CorrectorCutoff { inner: 1.1 * rho, outer: 2.2 * rho }
    }

    /// `(phi(rho), phi'(rho))`.
    pub fn profile(&self, rho: f64) -> (f64, f64) {
        if rho <= self.inner {
            return (0.0, 0.0);
        }
        if rho >= self.outer {
            return (1.0, 0.0);
        }
        let w = self.outer - self.inner;
        let t = (rho - self.inner) / w;
        let s = t * t * t * (t * (6.0 * t - 15.0) + 10.0);
        let ds = 30.0 * t * t * (t - 1.0) * (t - 1.0) / w;
        (s, ds)
    }
}

/// Rigid-motion stream function `U = -h'_perp.(x - h) + r |x - h|^2 / 2`.
pub fn rigid_stream_function(body: &BodyState, x: Vec2) -> f64 {
    let d = x - body.h;
    -body.hdot.perp().dot(d) + 0.5 * body.r * d.norm_sqr()
}

/// `Lambda(x)` in lab coordinates.
pub fn corrector_lambda(body: &BodyState, cutoff: &CorrectorCutoff, x: Vec2) -> Vec2 {
    let d = x - body.h;
    let rho = d.norm();
    let (phi, dphi) = cutoff.profile(rho);
    if phi == 1.0 {
        return Vec2::ZERO;
    }
    let v = body.hdot + d.perp() * body.r;
    let u = rigid_stream_function(body, x);
    let grad = if rho > 0.0 { d * (dphi / rho) } else { Vec2::ZERO };
    Vec2::new(grad.y * u + (1.0 - phi) * v.x, -grad.x * u + (1.0 - phi) * v.y)
}

/// `max |(u - Lambda) . n|` over `samples` boundary points.
pub fn tangent_residual(body: &Body, state: &FlowState, cutoff: &CorrectorCutoff, samples: usize) -> Result<f64> {
    let field = body.field(state, BlobParameter::POINT)?;
    let b = &state.body;
    let mut worst: f64 = 0.0;
    for bp in body.map.boundary_points(samples) {
        let v = field.dw(bp.w, None, false) / bp.df;
        let u = Vec2::new(v.re, -v.im);
        let n = Vec2::from(bp.normal_ds() / bp.normal_ds().norm());
        let lam = b.to_body_axes(corrector_lambda(b, cutoff, b.to_lab(Vec2::from(bp.z))));
        worst = worst.max((u - lam).dot(n).abs());
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::conformal::BodyShape;
    use crate::fieldkernels::VortexParticle;

    fn moving() -> BodyState {
        BodyState {
            h: Vec2::new(0.3, -0.2),
            hdot: Vec2::new(0.7, -1.1),
            theta: 0.6,
            r: 0.9,
            m: 1.0,
            j: 1.0,
        }
    }

    #[test]
    fn profile_is_c2() {
        let c = CorrectorCutoff::new(1.0, 2.0).unwrap();
        assert_eq!(c.profile(1.0), (0.0, 0.0));
        assert_eq!(c.profile(2.0), (1.0, 0.0));
        let h = 1e-6;
        let (p, dp) = c.profile(1.37);
        let fd = (c.profile(1.37 + h).0 - c.profile(1.37 - h).0) / (2.0 * h);
        assert!((fd - dp).abs() < 1e-8 && p > 0.0 && p < 1.0);
        assert!(c.profile(1.0 + 1e-3).0 < 1e-8);
        assert!(CorrectorCutoff::new(2.0, 1.0).is_err());
    }

    #[test]
    fn stream_function_generates_rigid_velocity() {
        let b = moving();
        let x = Vec2::new(1.3, 0.4);
        let h = 1e-6;
        let d1 = (rigid_stream_function(&b, x + Vec2::new(h, 0.0)) - rigid_stream_function(&b, x - Vec2::new(h, 0.0))) / (2.0 * h);
        let d2 = (rigid_stream_function(&b, x + Vec2::new(0.0, h)) - rigid_stream_function(&b, x - Vec2::new(0.0, h))) / (2.0 * h);
        let v = b.hdot + (x - b.h).perp() * b.r;
        assert!((Vec2::new(-d2, d1) - v).norm() < 1e-8);
    }

    #[test]
    fn equals_rigid_velocity_inside_and_vanishes_outside() {
        let b = moving();
        let c = CorrectorCutoff::for_circumradius(1.0);
        let x = b.h + Vec2::new(0.5, 0.8);
        assert_eq!(corrector_lambda(&b, &c, x), b.hdot + (x - b.h).perp() * b.r);
        assert_eq!(corrector_lambda(&b, &c, b.h + Vec2::new(2.2, 0.0)), Vec2::ZERO);
        assert_eq!(corrector_lambda(&b, &c, b.h + Vec2::new(-5.0, 3.0)), Vec2::ZERO);
    }

    #[test]
    fn divergence_free_in_transition_band() {
        let b = moving();
        let c = CorrectorCutoff::for_circumradius(1.0);
        let h = 1e-5;
        for k in 0..200 {
            let t = k as f64 * 0.731;
            let x = b.h + Vec2::from_polar(1.1 + 1.1 * (k as f64 + 0.5) / 200.0, t);
            let dx = corrector_lambda(&b, &c, x + Vec2::new(h, 0.0)) - corrector_lambda(&b, &c, x - Vec2::new(h, 0.0));
            let dy = corrector_lambda(&b, &c, x + Vec2::new(0.0, h)) - corrector_lambda(&b, &c, x - Vec2::new(0.0, h));
            assert!(((dx.x + dy.y) / (2.0 * h)).abs() < 1e-6);
        }
    }

    #[test]
    fn tangent_residuals() {
        let body = Body::new(BodyShape::Ellipse { semi_axes: [1.5, 1.0] }, 0, false).unwrap();
        let c = CorrectorCutoff::for_circumradius(body.map.circumradius());
        let rest = FlowState { body: BodyState::at_rest(1.0, 1.0), particles: vec![], gamma_bound: 0.0, time: 0.0 };
        assert_eq!(tangent_residual(&body, &rest, &c, 128).unwrap(), 0.0);
        let mut s = FlowState { body: moving(), ..rest };
        assert!(tangent_residual(&body, &s, &c, 256).unwrap() < 1e-8);
        s.particles = vec![
            VortexParticle { pos: Vec2::new(2.0, 0.5), gamma: 1.0 },
            VortexParticle { pos: Vec2::new(-1.0, -1.7), gamma: -0.4 },
        ];
        s.gamma_bound = 0.3;
        assert!(tangent_residual(&body, &s, &c, 256).unwrap() < 1e-6);
    }
}
