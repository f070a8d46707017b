//! Exterior conformal maps `T : F -> R^2 \ closed unit disk`.
//!
//! A map is stored through its inverse, the exterior Riemann map
//!
//! ```text
//! z = f(w) = center + w / scale + c_0 + c_1 w^-1 + ... + c_N w^-N,   |w| >= 1
//! ```
//!
//! normalised so that `T(inf) = inf` with a positive real leading
//! coefficient. The forward map `T = f^-1` is evaluated by damped Newton
//! iteration; derivatives of `T` follow from those of `f` analytically, so
//! Jacobians satisfy the Cauchy-Riemann relations exactly.

mod fit;

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::{Error, Result, Vec2};

/// Tolerance on `|T(x)| >= 1` used to classify points as exterior.
pub const EXTERIOR_TOL: f64 = 1e-9;

/// Shape of the rigid body in its own frame (centre of mass at the origin).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum BodyShape {
    Disk { radius: f64 },
    /// Semi-axes `[a, b]` along the body-frame x and y axes.
    Ellipse { semi_axes: [f64; 2] },
    /// Closed, simple, counter-clockwise boundary samples of a smooth curve.
    Polyline { points: Vec<Vec2> },
}

impl BodyShape {
    pub fn validate(&self) -> Result<()> {
        match self {
            BodyShape::Disk { radius } => {
                if !(radius.is_finite() && *radius > 0.0) {
                    return Err(Error::InvalidShape(format!("disk radius {radius} must be > 0")));
                }
            }
            BodyShape::Ellipse { semi_axes: [a, b] } => {
                if !(a.is_finite() && b.is_finite() && *a > 0.0 && *b > 0.0) {
                    return Err(Error::InvalidShape(format!("ellipse axes ({a}, {b}) must be > 0")));
                }
            }
            BodyShape::Polyline { points } => {
                fit::check_polyline(&fit::open_polyline(points))?;
            }
        }
        Ok(())
    }

    /// Boundary sample points: `n` parametric samples for analytic shapes,
    /// the vertices for a polyline.
    pub fn boundary_samples(&self, n: usize) -> Vec<Vec2> {
        match self {
            BodyShape::Disk { radius } => (0..n)
                .map(|k| Vec2::from_polar(*radius, 2.0 * PI * k as f64 / n as f64))
                .collect(),
            BodyShape::Ellipse { semi_axes: [a, b] } => (0..n)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / n as f64;
                    Vec2::new(a * t.cos(), b * t.sin())
                })
                .collect(),
            BodyShape::Polyline { points } => fit::open_polyline(points),
        }
    }
}

/// Result of evaluating `T` at a physical point.
#[derive(Debug, Clone, Copy)]
pub struct MapEval {
    /// `T(x)`.
    pub xi: Complex64,
    /// Complex derivative `T'(x)`.
    pub dt: Complex64,
    /// Complex second derivative `T''(x)`.
    pub d2t: Complex64,
}

/// Point on the body boundary, parametrised by the unit-circle angle.
#[derive(Debug, Clone, Copy)]
pub struct BoundaryPoint {
    pub w: Complex64,
    pub z: Complex64,
    /// `f'(w)`, derivative of the inverse map.
    pub df: Complex64,
}

impl BoundaryPoint {
    /// Outward (out of the body) normal times arc-length element per unit
    /// angle: `w f'(w)`.
    pub fn normal_ds(&self) -> Complex64 {
        self.w * self.df
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConformalMap {
    pub scale: f64,
    pub center: Vec2,
    pub coeffs: Vec<Complex64>,
}

/// Sampled quality measures of a map against a shape.
#[derive(Debug, Clone, Serialize)]
pub struct MapReport {
    pub boundary_deviation: f64,
    pub min_image_separation: f64,
    pub derivative_bound: f64,
    pub order: usize,
}

impl ConformalMap {
    pub fn identity() -> Self {
        ConformalMap {
            scale: 1.0,
            center: Vec2::ZERO,
            coeffs: Vec::new(),
        }
    }

    pub fn scaling(radius: f64) -> Self {
        ConformalMap {
            scale: 1.0 / radius,
            center: Vec2::ZERO,
            coeffs: Vec::new(),
        }
    }

    /// Exterior of the ellipse with semi-axes `a` (x) and `b` (y): the
    /// Joukowski map `z = R (w + m / w)`, `R = (a+b)/2`, `m = (a-b)/(a+b)`.
    pub fn ellipse(a: f64, b: f64) -> Self {
        let big_r = 0.5 * (a + b);
        let m = (a - b) / (a + b);
        ConformalMap {
            scale: 1.0 / big_r,
            center: Vec2::ZERO,
            coeffs: vec![Complex64::new(0.0, 0.0), Complex64::new(big_r * m, 0.0)],
        }
    }

    /// Truncation order `N` (index of the last coefficient).
    pub fn order(&self) -> usize {
        self.coeffs.len().saturating_sub(1)
    }

    pub fn is_linear(&self) -> bool {
        self.coeffs.iter().skip(1).all(|c| c.norm() == 0.0)
    }

    /// `f(w)`.
    pub fn inverse_complex(&self, w: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        let winv = w.inv();
        // Horner in 1/w over c_N .. c_0
        for c in self.coeffs.iter().rev() {
            acc = acc * winv + c;
        }
        self.center.to_complex() + w / self.scale + acc
    }

    /// `(f'(w), f''(w))`.
    pub fn inverse_derivs(&self, w: Complex64) -> (Complex64, Complex64) {
        let winv = w.inv();
        let mut d1 = Complex64::new(1.0 / self.scale, 0.0);
        let mut d2 = Complex64::new(0.0, 0.0);
        let mut p = winv * winv; // w^{-k-1}
        for (k, c) in self.coeffs.iter().enumerate().skip(1) {
            let kf = k as f64;
            d1 -= c * kf * p;
            d2 += c * kf * (kf + 1.0) * p * winv;
            p *= winv;
        }
        (d1, d2)
    }

    pub fn boundary_point(&self, theta: f64) -> BoundaryPoint {
        let w = Complex64::from_polar(1.0, theta);
        BoundaryPoint {
            w,
            z: self.inverse_complex(w),
            df: self.inverse_derivs(w).0,
        }
    }

    /// `n` equally spaced boundary points in the mapped angle.
    pub fn boundary_points(&self, n: usize) -> Vec<BoundaryPoint> {
        (0..n)
            .map(|k| self.boundary_point(2.0 * PI * k as f64 / n as f64))
            .collect()
    }

    /// Largest distance from the body-frame origin to the boundary.
    pub fn circumradius(&self) -> f64 {
        self.boundary_points(1024)
            .iter()
            .map(|b| b.z.norm())
            .fold(0.0, f64::max)
    }

    /// Largest chord of the sampled boundary.
    pub fn diameter(&self) -> f64 {
        let pts: Vec<Complex64> = self.boundary_points(256).iter().map(|b| b.z).collect();
        let mut d: f64 = 0.0;
        for (i, a) in pts.iter().enumerate() {
            for b in &pts[i + 1..] {
                d = d.max((a - b).norm());
            }
        }
        d
    }

    /// Winding-number test against the sampled boundary.
    pub fn encloses(&self, z: Complex64) -> bool {
        let pts = self.boundary_points(2048);
        let mut wind = 0.0;
        for i in 0..pts.len() {
            let a = pts[i].z - z;
            let b = pts[(i + 1) % pts.len()].z - z;
            wind += (b / a).arg();
        }
        wind.abs() > PI
    }

    fn newton(&self, z: Complex64, seed: Complex64) -> Option<Complex64> {
        let mut w = seed;
        let tol = 1e-15 * (1.0 + z.norm());
        for _ in 0..50 {
            let res = self.inverse_complex(w) - z;
            if res.norm() <= tol {
                return Some(w);
            }
            let (d1, _) = self.inverse_derivs(w);
            if d1.norm() == 0.0 || !d1.is_finite() {
                return None;
            }
            let step = res / d1;
            let mut lambda = 1.0;
            let mut accepted = false;
            for _ in 0..30 {
                let trial = w - step * lambda;
                if trial.norm() > 1e-8 {
                    let r = (self.inverse_complex(trial) - z).norm();
                    if r < res.norm() {
                        w = trial;
                        accepted = true;
                        break;
                    }
                }
                lambda *= 0.5;
            }
            if !accepted {
                // stalled at round-off level
                return if res.norm() <= 1e-12 * (1.0 + z.norm()) { Some(w) } else { None };
            }
            if (step * lambda).norm() <= 1e-16 * (1.0 + w.norm()) {
                return Some(w);
            }
        }
        let res = (self.inverse_complex(w) - z).norm();
        (res <= 1e-12 * (1.0 + z.norm())).then_some(w)
    }

    /// Newton along the ray from far away, where the linear seed is accurate.
    fn newton_continuation(&self, z: Complex64) -> Option<Complex64> {
        let c = self.center.to_complex();
        let d = z - c;
        let steps = 40;
        let s0: f64 = 64.0;
        let mut w = self.scale * d * s0;
        for k in 0..=steps {
            let s = s0.powf(1.0 - k as f64 / steps as f64);
            w = self.newton(c + d * s, w)?;
        }
        Some(w)
    }

    /// Root of `f(w) = z` nearest the exterior branch, without classifying
    /// the point as inside or outside.
    pub(crate) fn preimage(&self, z: Complex64) -> Option<Complex64> {
        let seed = self.scale * (z - self.center.to_complex());
        match self.newton(z, seed) {
            Some(w) if w.norm() >= 1.0 - 1e-3 => Some(w),
            other => self.newton_continuation(z).or(other),
        }
    }

    /// `T(z)` as a complex number.
    pub fn forward_complex(&self, z: Complex64) -> Result<Complex64> {
        if !z.is_finite() {
            return Err(Error::Input("non-finite point".into()));
        }
        let seed = self.scale * (z - self.center.to_complex());
        let mut w = self.newton(z, seed);
        if (matches!(w, Some(v) if v.norm() < 1.0 - EXTERIOR_TOL) || w.is_none())
            && !self.is_linear() && !self.encloses(z) {
                w = self.newton_continuation(z);
            }
        match w {
            Some(w) if w.norm() >= 1.0 - EXTERIOR_TOL => Ok(w),
            Some(_) => Err(Error::InsideBody { x: z.re, y: z.im }),
            None if self.encloses(z) => Err(Error::InsideBody { x: z.re, y: z.im }),
            None => Err(Error::NewtonDiverged { x: z.re, y: z.im }),
        }
    }

    /// `T`, `T'` and `T''` at a physical point.
    pub fn eval(&self, x: Vec2) -> Result<MapEval> {
        let xi = self.forward_complex(x.to_complex())?;
        Ok(self.eval_mapped(xi))
    }

    /// Derivatives of `T` at the point whose image is `xi`.
    pub fn eval_mapped(&self, xi: Complex64) -> MapEval {
        let (d1, d2) = self.inverse_derivs(xi);
        let dt = d1.inv();
        MapEval {
            xi,
            dt,
            d2t: -d2 * dt * dt * dt,
        }
    }

    pub fn map_forward(&self, x: Vec2) -> Result<Vec2> {
        self.forward_complex(x.to_complex()).map(Vec2::from)
    }

    /// `T^-1(xi)` for `|xi| >= 1`.
    pub fn map_inverse(&self, xi: Vec2) -> Result<Vec2> {
        if !xi.is_finite() || xi.norm() < 1.0 - EXTERIOR_TOL {
            return Err(Error::Input(format!(
                "map_inverse needs |xi| >= 1, got {}",
                xi.norm()
            )));
        }
        Ok(Vec2::from(self.inverse_complex(xi.to_complex())))
    }

    /// `J[i][j] = d T_i / d x_j`.
    pub fn map_jacobian(&self, x: Vec2) -> Result<[[f64; 2]; 2]> {
        let e = self.eval(x)?;
        Ok(jacobian_of(e.dt))
    }

    /// `H[i][j][k] = d^2 T_i / d x_j d x_k`.
    pub fn map_hessian(&self, x: Vec2) -> Result<[[[f64; 2]; 2]; 2]> {
        let e = self.eval(x)?;
        Ok(hessian_of(e.d2t))
    }

    /// Sampled boundary deviation, injectivity margin and derivative bound.
    pub fn report(&self, shape: &BodyShape) -> Result<MapReport> {
        let mut boundary_deviation: f64 = 0.0;
        for b in shape.boundary_samples(512) {
            let xi = self
                .preimage(b.to_complex())
                .ok_or(Error::NewtonDiverged { x: b.x, y: b.y })?;
            boundary_deviation = boundary_deviation.max((xi.norm() - 1.0).abs());
        }
        let rho = self.circumradius();
        let n = 40;
        let mut images = Vec::new();
        let mut derivative_bound: f64 = 0.0;
        for i in 0..n {
            for j in 0..n {
                let x = Vec2::new(
                    -3.0 * rho + 6.0 * rho * (i as f64 + 0.5) / n as f64,
                    -3.0 * rho + 6.0 * rho * (j as f64 + 0.5) / n as f64,
                );
                if let Ok(e) = self.eval(x) {
                    if e.xi.norm() > 1.0 {
                        let (d1, d2) = self.inverse_derivs(e.xi);
                        derivative_bound = derivative_bound
                            .max(e.dt.norm() + d1.norm() + e.d2t.norm() + d2.norm());
                        images.push(e.xi);
                    }
                }
            }
        }
        let mut min_sep = f64::INFINITY;
        for (i, a) in images.iter().enumerate() {
            for b in &images[i + 1..] {
                min_sep = min_sep.min((a - b).norm());
            }
        }
        Ok(MapReport {
            boundary_deviation,
            min_image_separation: min_sep,
            derivative_bound,
            order: self.order(),
        })
    }
}

pub(crate) fn jacobian_of(d: Complex64) -> [[f64; 2]; 2] {
    [[d.re, -d.im], [d.im, d.re]]
}

pub(crate) fn hessian_of(c: Complex64) -> [[[f64; 2]; 2]; 2] {
    // T_xx = c, T_xy = i c, T_yy = -c
    let xy = Complex64::i() * c;
    [
        [[c.re, xy.re], [xy.re, -c.re]],
        [[c.im, xy.im], [xy.im, -c.im]],
    ]
}

/// Largest supported truncation order for fitted maps.
pub const MAX_ORDER: usize = 64;

/// Builds the exterior map of `shape`. `order` is ignored for disks and
/// ellipses (their maps are exact); for polylines it is the starting
/// truncation order of the doubling sequence (0 picks the default).
pub fn build_map(shape: &BodyShape, order: usize) -> Result<ConformalMap> {
    shape.validate()?;
    match shape {
        BodyShape::Disk { radius } => Ok(ConformalMap::scaling(*radius)),
        BodyShape::Ellipse { semi_axes: [a, b] } => Ok(ConformalMap::ellipse(*a, *b)),
        BodyShape::Polyline { points } => fit::fit_polyline(&fit::open_polyline(points), order),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn disk_maps_are_scalings() {
        let id = build_map(&BodyShape::Disk { radius: 1.0 }, 0).unwrap();
        assert_eq!(id.map_forward(Vec2::new(2.0, 0.0)).unwrap(), Vec2::new(2.0, 0.0));
        assert_eq!(id.map_inverse(Vec2::new(3.0, 1.0)).unwrap(), Vec2::new(3.0, 1.0));
        let m = build_map(&BodyShape::Disk { radius: 2.0 }, 0).unwrap();
        assert_eq!(m.scale, 0.5);
        assert!(m.coeffs.iter().all(|c| c.norm() == 0.0));
        let y = m.map_forward(Vec2::new(4.0, 0.0)).unwrap();
        assert!(close(y.x, 2.0, 1e-15) && close(y.y, 0.0, 1e-15));
        let x = m.map_inverse(Vec2::new(2.0, 0.0)).unwrap();
        assert!(close(x.x, 4.0, 1e-15));
        let j = m.map_jacobian(Vec2::new(3.0, 1.0)).unwrap();
        assert!(close(j[0][0], 0.5, 1e-15) && close(j[1][1], 0.5, 1e-15));
        assert!(close(j[0][1], 0.0, 1e-15) && close(j[1][0], 0.0, 1e-15));
        let h = id.map_hessian(Vec2::new(3.0, 1.0)).unwrap();
        assert!(h.iter().flatten().flatten().all(|v| *v == 0.0));
    }

    #[test]
    fn inside_points_are_rejected() {
        let m = build_map(&BodyShape::Ellipse { semi_axes: [2.0, 1.0] }, 0).unwrap();
        for p in [Vec2::new(0.0, 0.0), Vec2::new(1.5, 0.2), Vec2::new(0.0, 0.9)] {
            assert!(matches!(m.map_forward(p), Err(Error::InsideBody { .. })), "{p:?}");
        }
        assert!(m.map_inverse(Vec2::new(0.5, 0.0)).is_err());
    }

    #[test]
    fn ellipse_boundary_lands_on_unit_circle() {
        let shape = BodyShape::Ellipse { semi_axes: [2.0, 1.0] };
        let m = build_map(&shape, 0).unwrap();
        for b in shape.boundary_samples(720) {
            let r = m.map_forward(b).unwrap().norm();
            assert!((r - 1.0).abs() < 1e-8, "{b:?} -> {r}");
        }
    }

    #[test]
    fn ellipse_jacobian_matches_central_difference() {
        let m = ConformalMap::ellipse(2.0, 1.0);
        let x = Vec2::new(3.0, 0.0);
        let j = m.map_jacobian(x).unwrap();
        let h = 1e-5;
        for col in 0..2 {
            let e = if col == 0 { Vec2::new(h, 0.0) } else { Vec2::new(0.0, h) };
            let d = (m.map_forward(x + e).unwrap() - m.map_forward(x - e).unwrap()) * (0.5 / h);
            let scale = j[0][col].hypot(j[1][col]);
            assert!((d.x - j[0][col]).abs() <= 1e-6 * scale);
            assert!((d.y - j[1][col]).abs() <= 1e-6 * scale);
        }
    }

    #[test]
    fn hessian_matches_jacobian_difference() {
        let m = ConformalMap::ellipse(2.0, 1.0);
        let x = Vec2::new(1.0, 1.7);
        let h = m.map_hessian(x).unwrap();
        let eps = 1e-5;
        for k in 0..2 {
            let e = if k == 0 { Vec2::new(eps, 0.0) } else { Vec2::new(0.0, eps) };
            let jp = m.map_jacobian(x + e).unwrap();
            let jm = m.map_jacobian(x - e).unwrap();
            for i in 0..2 {
                for j in 0..2 {
                    let fd = (jp[i][j] - jm[i][j]) / (2.0 * eps);
                    assert!((fd - h[i][j][k]).abs() < 1e-6, "{i}{j}{k}: {fd} vs {}", h[i][j][k]);
                }
            }
        }
    }

    #[test]
    fn map_json_uses_contract_field_names() {
        let m = ConformalMap::ellipse(2.0, 1.0);
        let v: serde_json::Value = serde_json::to_value(&m).unwrap();
        assert_eq!(v["scale"], serde_json::json!(1.0 / 1.5));
        assert_eq!(v["center"], serde_json::json!([0.0, 0.0]));
        assert_eq!(v["coeffs"][1], serde_json::json!([0.5, 0.0]));
        let back: ConformalMap = serde_json::from_value(v).unwrap();
        assert_eq!(back, m);
    }

    #[test]
    fn far_field_is_asymptotically_linear() {
        let m = ConformalMap::ellipse(2.0, 1.0);
        let x = Vec2::new(4000.0 * 0.6, 4000.0 * 0.8);
        let xi = m.forward_complex(x.to_complex()).unwrap();
        let ratio = (xi / (m.scale * x.to_complex())).norm();
        assert!((ratio - 1.0).abs() < 1e-3);
    }
}
