//! Exterior map of a star-shaped smooth curve given by boundary samples.
//!
//! The curve is interpolated by a periodic cubic spline of `ln rho(phi)`
//! about its area centroid. Theodorsen's conjugate-function iteration finds
//! the boundary correspondence `phi(theta)`; the boundary values of the
//! inverse map are then expanded in Fourier modes and truncated.

use std::f64::consts::PI;

use num_complex::Complex64;

use super::{ConformalMap, MAX_ORDER};
use crate::spectral::{coefficients, frequency, synthesize};
use crate::{Error, Result, Vec2};

const MIN_POINTS: usize = 32;
const FIT_TOL: f64 = 1e-6;
const SAMPLES: usize = 2048;

/// Drops a repeated closing vertex.
pub(super) fn open_polyline(points: &[Vec2]) -> Vec<Vec2> {
    let mut pts = points.to_vec();
    if pts.len() > 1 && (pts[0] - pts[pts.len() - 1]).norm() == 0.0 {
        pts.pop();
    }
    pts
}

fn signed_area(pts: &[Vec2]) -> f64 {
    let n = pts.len();
    (0..n).map(|i| pts[i].cross(pts[(i + 1) % n])).sum::<f64>() * 0.5
}

fn centroid(pts: &[Vec2]) -> Vec2 {
    let n = pts.len();
    let a = signed_area(pts);
    let mut c = Vec2::ZERO;
    for i in 0..n {
        let (p, q) = (pts[i], pts[(i + 1) % n]);
        c += (p + q) * p.cross(q);
    }
    c * (1.0 / (6.0 * a))
}

fn segments_cross(a: Vec2, b: Vec2, c: Vec2, d: Vec2) -> bool {
    let o = |p: Vec2, q: Vec2, r: Vec2| (q - p).cross(r - p);
    let (d1, d2) = (o(a, b, c), o(a, b, d));
    let (d3, d4) = (o(c, d, a), o(c, d, b));
    d1 * d2 < 0.0 && d3 * d4 < 0.0
}

pub(super) fn check_polyline(pts: &[Vec2]) -> Result<()> {
    if pts.len() < MIN_POINTS {
        return Err(Error::InvalidShape(format!(
            "polyline needs at least {MIN_POINTS} points, got {}",
            pts.len()
        )));
    }
    if pts.iter().any(|p| !p.is_finite()) {
        return Err(Error::InvalidShape("non-finite polyline vertex".into()));
    }
    let n = pts.len();
    for i in 0..n {
        for j in i + 2..n {
            if i == 0 && j == n - 1 {
                continue;
            }
            if segments_cross(pts[i], pts[(i + 1) % n], pts[j], pts[(j + 1) % n]) {
                return Err(Error::NonSimpleBoundary(format!("edges {i} and {j} intersect")));
            }
        }
    }
    if signed_area(pts) <= 0.0 {
        return Err(Error::InvalidShape("polyline must be counter-clockwise".into()));
    }
    Ok(())
}

/// Periodic cubic spline through `(knots[i], values[i])`, period `2 pi`.
struct PeriodicSpline {
    knots: Vec<f64>,
    values: Vec<f64>,
    second: Vec<f64>,
}

impl PeriodicSpline {
    fn new(knots: Vec<f64>, values: Vec<f64>) -> Self {
        let n = knots.len();
        let h: Vec<f64> = (0..n)
            .map(|i| {
                if i + 1 < n {
                    knots[i + 1] - knots[i]
                } else {
                    knots[0] + 2.0 * PI - knots[n - 1]
                }
            })
            .collect();
        let mut lower = vec![0.0; n];
        let mut diag = vec![0.0; n];
        let mut upper = vec![0.0; n];
        let mut rhs = vec![0.0; n];
        for i in 0..n {
            let im = (i + n - 1) % n;
            let ip = (i + 1) % n;
            lower[i] = h[im];
            diag[i] = 2.0 * (h[im] + h[i]);
            upper[i] = h[i];
            rhs[i] = 6.0 * ((values[ip] - values[i]) / h[i] - (values[i] - values[im]) / h[im]);
        }
        let second = solve_cyclic(&lower, &diag, &upper, &rhs);
        PeriodicSpline {
            knots,
            values,
            second,
        }
    }

    fn eval(&self, phi: f64) -> f64 {
        let n = self.knots.len();
        let t0 = self.knots[0];
        let x = t0 + (phi - t0).rem_euclid(2.0 * PI);
        let i = match self.knots.partition_point(|k| *k <= x) {
            0 => n - 1,
            p => p - 1,
        };
        let (xa, xb) = if i + 1 < n {
            (self.knots[i], self.knots[i + 1])
        } else {
            (self.knots[n - 1], t0 + 2.0 * PI)
        };
        let x = if x < xa { x + 2.0 * PI } else { x };
        let ip = (i + 1) % n;
        let h = xb - xa;
        let a = (xb - x) / h;
        let b = (x - xa) / h;
        a * self.values[i]
            + b * self.values[ip]
            + ((a * a * a - a) * self.second[i] + (b * b * b - b) * self.second[ip]) * h * h / 6.0
    }
}

/// Cyclic tridiagonal solve (Sherman-Morrison on top of Thomas).
fn solve_cyclic(lower: &[f64], diag: &[f64], upper: &[f64], rhs: &[f64]) -> Vec<f64> {
    let n = diag.len();
    let alpha = upper[n - 1]; // A[n-1][0]
    let beta = lower[0]; // A[0][n-1]
    let gamma = -diag[0];
    let mut d = diag.to_vec();
    d[0] -= gamma;
    d[n - 1] -= alpha * beta / gamma;
    let thomas = |r: &[f64]| -> Vec<f64> {
        let mut c = vec![0.0; n];
        let mut x = vec![0.0; n];
        c[0] = upper[0] / d[0];
        x[0] = r[0] / d[0];
        for i in 1..n {
            let m = d[i] - lower[i] * c[i - 1];
            c[i] = upper[i] / m;
            x[i] = (r[i] - lower[i] * x[i - 1]) / m;
        }
        for i in (0..n - 1).rev() {
            x[i] -= c[i] * x[i + 1];
        }
        x
    };
    let x = thomas(rhs);
    let mut u = vec![0.0; n];
    u[0] = gamma;
    u[n - 1] = alpha;
    let z = thomas(&u);
    let fact = (x[0] + beta * x[n - 1] / gamma) / (1.0 + z[0] + beta * z[n - 1] / gamma);
    x.iter().zip(&z).map(|(xi, zi)| xi - fact * zi).collect()
}

/// Exterior conjugate: for boundary values of `g` analytic outside the
/// disk, `Im g = C[Re g]` with `C[F] = i sum sign(n) F_n e^{i n theta}`.
fn exterior_conjugate(values: &[f64]) -> Vec<f64> {
    let m = values.len();
    let samples: Vec<Complex64> = values.iter().map(|v| Complex64::new(*v, 0.0)).collect();
    let mut c = coefficients(&samples);
    for (k, v) in c.iter_mut().enumerate() {
        let n = frequency(k, m);
        *v *= if n > 0 && 2 * n as usize != m {
            Complex64::i()
        } else if n < 0 {
            -Complex64::i()
        } else {
            Complex64::new(0.0, 0.0)
        };
    }
    synthesize(&c).iter().map(|z| z.re).collect()
}

pub(super) fn fit_polyline(pts: &[Vec2], start_order: usize) -> Result<ConformalMap> {
    check_polyline(pts)?;
    let c0 = centroid(pts);
    let mut knots = Vec::with_capacity(pts.len());
    let mut log_rho = Vec::with_capacity(pts.len());
    let mut prev: Option<f64> = None;
    for p in pts {
        let d = *p - c0;
        let mut a = d.y.atan2(d.x);
        if let Some(q) = prev {
            while a <= q - PI {
                a += 2.0 * PI;
            }
            while a > q + PI {
                a -= 2.0 * PI;
            }
            if a <= q {
                return Err(Error::InvalidShape(
                    "polyline must be star-shaped about its centroid".into(),
                ));
            }
        }
        prev = Some(a);
        knots.push(a);
        log_rho.push(d.norm().ln());
    }
    if (knots[knots.len() - 1] - knots[0] - 2.0 * PI).abs() > PI
        || knots[knots.len() - 1] - knots[0] >= 2.0 * PI
    {
        return Err(Error::InvalidShape(
            "polyline must be star-shaped about its centroid".into(),
        ));
    }
    // sort into [k0, k0 + 2 pi)
    let spline = PeriodicSpline::new(knots, log_rho);

    let m = SAMPLES;
    let theta: Vec<f64> = (0..m).map(|j| 2.0 * PI * j as f64 / m as f64).collect();
    let mut phi = theta.clone();
    let mut converged = false;
    let mut last_change = f64::INFINITY;
    let mut relax = 1.0;
    for _ in 0..2000 {
        let lr: Vec<f64> = phi.iter().map(|p| spline.eval(*p)).collect();
        let conj = exterior_conjugate(&lr);
        let mut change: f64 = 0.0;
        for j in 0..m {
            let next = theta[j] + conj[j];
            let upd = phi[j] + relax * (next - phi[j]);
            change = change.max((upd - phi[j]).abs());
            phi[j] = upd;
        }
        if !change.is_finite() {
            break;
        }
        if change < 1e-14 {
            converged = true;
            break;
        }
        if change > last_change * 1.5 {
            relax *= 0.5;
        }
        last_change = change;
    }
    if !converged {
        return Err(Error::FitDiverged {
            residual: last_change,
            order: 0,
        });
    }

    let boundary: Vec<Complex64> = phi
        .iter()
        .map(|p| c0.to_complex() + Complex64::from_polar(spline.eval(*p).exp(), *p))
        .collect();
    let f = coefficients(&boundary);
    let leading = f[1];
    let scale = 1.0 / leading.re;
    let mut order = start_order.clamp(4, MAX_ORDER);
    let mut best = f64::INFINITY;
    loop {
        let mut coeffs = Vec::with_capacity(order + 1);
        coeffs.push(f[0] - c0.to_complex());
        for k in 1..=order {
            coeffs.push(f[m - k]);
        }
        let map = ConformalMap {
            scale,
            center: c0,
            coeffs,
        };
        let mut residual: f64 = 0.0;
        for p in pts {
            let w = map.preimage(p.to_complex()).ok_or(Error::NewtonDiverged { x: p.x, y: p.y })?;
            residual = residual.max((w.norm() - 1.0).abs());
        }
        best = best.min(residual);
        if residual < FIT_TOL {
            return Ok(map);
        }
        if order >= MAX_ORDER {
            return Err(Error::FitDiverged {
                residual: best,
                order,
            });
        }
        order = (order * 2).min(MAX_ORDER);
    }
}
