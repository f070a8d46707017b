//! Independent finite-difference machinery on polar grids of the mapped
//! plane `1 <= |xi| <= R_outer`: a direct Poisson solver, grid norms, and
//! measurements of the ratios appearing in the a-priori estimates.

mod measure;
mod norms;

use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::{Error, Result};

pub use measure::{
    blob_family, bump_vorticity, gaussian_vorticity, green_quadrature, measure_bkm_ratio, measure_bkm_sweep, measure_poisson_constants,
    velocity_from_stream, BkmRow, EstimateReport, PoissonConstants, PoissonRow,
};
pub use norms::{derivative_r, derivative_theta, derivative_x, derivative_y, grid_integral, l2_norm, max_norm, sobolev_norm};

/// Uniform polar grid: `n_r` radial intervals from 1 to `r_outer`, `n_t`
/// angular nodes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AnnularGrid {
    pub r_outer: f64,
    pub n_r: usize,
    pub n_t: usize,
}

impl AnnularGrid {
    pub fn new(r_outer: f64, n_r: usize, n_t: usize) -> Result<Self> {
        if !(r_outer >= 4.0 && r_outer.is_finite()) || n_r < 16 || n_t < 16 {
            return Err(Error::Input(format!(
                "annular grid needs r_outer >= 4 and n_r, n_t >= 16 (got {r_outer}, {n_r}, {n_t})"
            )));
        }
        Ok(AnnularGrid { r_outer, n_r, n_t })
    }

    /// Same annulus with both resolutions doubled.
    pub fn refined(&self) -> Self {
        AnnularGrid { r_outer: self.r_outer, n_r: 2 * self.n_r, n_t: 2 * self.n_t }
    }

    pub fn dr(&self) -> f64 {
        (self.r_outer - 1.0) / self.n_r as f64
    }

    pub fn dtheta(&self) -> f64 {
        2.0 * PI / self.n_t as f64
    }

    pub fn radius(&self, i: usize) -> f64 {
        1.0 + i as f64 * self.dr()
    }

    pub fn angle(&self, k: usize) -> f64 {
        k as f64 * self.dtheta()
    }

    pub fn len(&self) -> usize {
        (self.n_r + 1) * self.n_t
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn index(&self, i: usize, k: usize) -> usize {
        i * self.n_t + k
    }

    pub fn point(&self, i: usize, k: usize) -> Complex64 {
        Complex64::from_polar(self.radius(i), self.angle(k))
    }
}

/// Scalar values on the nodes of an [`AnnularGrid`], row-major in radius.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub grid: AnnularGrid,
    pub values: Vec<f64>,
}

impl GridField {
    pub fn zeros(grid: AnnularGrid) -> Self {
        GridField { grid, values: vec![0.0; grid.len()] }
    }

    pub fn from_fn(grid: AnnularGrid, f: impl Fn(Complex64) -> f64) -> Self {
        let mut values = Vec::with_capacity(grid.len());
        for i in 0..=grid.n_r {
            for k in 0..grid.n_t {
                values.push(f(grid.point(i, k)));
            }
        }
        GridField { grid, values }
    }

    pub fn at(&self, i: usize, k: usize) -> f64 {
        self.values[self.grid.index(i, k)]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.values[i * self.grid.n_t..(i + 1) * self.grid.n_t]
    }

    pub fn scaled(&self, a: f64) -> Self {
        GridField { grid: self.grid, values: self.values.iter().map(|v| v * a).collect() }
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        GridField { grid: self.grid, values: self.values.iter().map(|&v| f(v)).collect() }
    }

    pub fn zip(&self, o: &GridField, f: impl Fn(f64, f64) -> f64) -> Self {
        GridField { grid: self.grid, values: self.values.iter().zip(&o.values).map(|(&a, &b)| f(a, b)).collect() }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }
}

/// Discrete polar Laplacian (second-order in both directions) at interior
/// rows; boundary rows are left at zero.
pub fn discrete_laplacian(psi: &GridField) -> GridField {
    let g = psi.grid;
    let dr = g.dr();
    let dt2 = g.dtheta().powi(2);
    let mut out = GridField::zeros(g);
    for i in 1..g.n_r {
        let r = g.radius(i);
        let rm = r - 0.5 * dr;
        let rp = r + 0.5 * dr;
        for k in 0..g.n_t {
            let kp = (k + 1) % g.n_t;
            let km = (k + g.n_t - 1) % g.n_t;
            let c = psi.at(i, k);
            let radial = (rp * (psi.at(i + 1, k) - c) - rm * (c - psi.at(i - 1, k))) / (r * dr * dr);
            let ang = (psi.at(i, kp) - 2.0 * c + psi.at(i, km)) / (r * r * dt2);
            out.values[g.index(i, k)] = radial + ang;
        }
    }
    out
}

/// Direct solve of the discrete `Laplace psi = omega` with `psi = 0` on the
/// unit circle and `psi = outer_bc` on the outer ring: FFT in angle, one
/// tridiagonal solve per mode in radius.
pub fn solve_poisson_fd(grid: &AnnularGrid, omega: &GridField, outer_bc: &GridField) -> Result<GridField> {
    if omega.grid != *grid || outer_bc.grid != *grid {
        return Err(Error::Input("fields do not live on the solver grid".into()));
    }
    if !omega.is_finite() || !outer_bc.is_finite() {
        return Err(Error::Input("non-finite input field".into()));
    }
    let (nr, nt) = (grid.n_r, grid.n_t);
    let dr = grid.dr();
    let dth = grid.dtheta();
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(nt);
    let inv = planner.plan_fft_inverse(nt);

    // rows in spectral space: hat[i][k]
    let mut hat: Vec<Vec<Complex64>> = (0..=nr)
        .map(|i| {
            let src = if i == nr { outer_bc.row(nr) } else { omega.row(i) };
            let mut row: Vec<Complex64> = src.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            if i == 0 {
                row.iter_mut().for_each(|c| *c = Complex64::new(0.0, 0.0));
            } else {
                fwd.process(&mut row);
            }
            row
        })
        .collect();

    let mut cp = vec![Complex64::new(0.0, 0.0); nr + 1];
    let mut dp = vec![Complex64::new(0.0, 0.0); nr + 1];
    for k in 0..nt {
        let lam = -4.0 / (dth * dth) * (0.5 * k as f64 * dth).sin().powi(2);
        // Thomas sweep over i = 1..nr-1 with known psi_0, psi_nr
        for i in 1..nr {
            let r = grid.radius(i);
            let a = (r - 0.5 * dr) / (r * dr * dr);
            let c = (r + 0.5 * dr) / (r * dr * dr);
            let b = -(a + c) + lam / (r * r);
            let mut rhs = hat[i][k];
            if i == 1 {
                rhs -= hat[0][k] * a;
            }
            if i == nr - 1 {
                rhs -= hat[nr][k] * c;
            }
            let (cprev, dprev) = if i == 1 { (Complex64::new(0.0, 0.0), Complex64::new(0.0, 0.0)) } else { (cp[i - 1], dp[i - 1]) };
            let aa = if i == 1 { 0.0 } else { a };
            let cc = if i == nr - 1 { 0.0 } else { c };
            let denom = Complex64::new(b, 0.0) - cprev * aa;
            cp[i] = Complex64::new(cc, 0.0) / denom;
            dp[i] = (rhs - dprev * aa) / denom;
        }
        let mut next = Complex64::new(0.0, 0.0);
        for i in (1..nr).rev() {
            let v = if i == nr - 1 { dp[i] } else { dp[i] - cp[i] * next };
            hat[i][k] = v;
            next = v;
        }
    }

    let mut psi = GridField::zeros(*grid);
    for (i, row) in hat.iter_mut().enumerate() {
        if i == 0 {
            continue;
        }
        if i == nr {
            psi.values[grid.index(nr, 0)..grid.index(nr, 0) + nt].copy_from_slice(outer_bc.row(nr));
            continue;
        }
        inv.process(row);
        for k in 0..nt {
            psi.values[grid.index(i, k)] = row[k].re / nt as f64;
        }
    }

    let lap = discrete_laplacian(&psi);
    let scale = max_norm(omega).max(max_norm(outer_bc) / (dr * dr)).max(1e-300);
    let mut res: f64 = 0.0;
    for i in 1..nr {
        for k in 0..nt {
            let j = grid.index(i, k);
            res = res.max((lap.values[j] - omega.values[j]).abs());
        }
    }
    if !(res <= 1e-10 * scale) {
        return Err(Error::SolverStagnated(res / scale));
    }
    Ok(psi)
}

/// Multipole order of the outer boundary condition.
pub const FAR_FIELD_ORDER: usize = 96;

/// Dirichlet data on the outer ring from the exterior-disk Green's function
/// of the gridded vorticity, via its multipole expansion
///
/// ```text
/// psi(xi) = (1/2pi) [ -sum q ln|eta| - Re sum_k (M_k / k) xi^-k ],  M_k = sum q (eta^k - eta*^k)
/// ```
///
/// with `q` the trapezoid-weighted vorticity of each node.
pub fn far_field_bc(grid: &AnnularGrid, omega: &GridField) -> GridField {
    let dr = grid.dr();
    let dth = grid.dtheta();
    let kmax = FAR_FIELD_ORDER;
    let mut log_sum = 0.0;
    let mut moments = vec![Complex64::new(0.0, 0.0); kmax + 1];
    for i in 0..=grid.n_r {
        let r = grid.radius(i);
        let wr = if i == 0 || i == grid.n_r { 0.5 } else { 1.0 };
        for k in 0..grid.n_t {
            let v = omega.at(i, k);
            if v == 0.0 {
                continue;
            }
            let q = v * wr * r * dr * dth;
            let eta = grid.point(i, k);
            let es = eta.conj().inv();
            log_sum += q * eta.norm().ln();
            let (mut pe, mut ps) = (eta, es);
            for m in moments.iter_mut().skip(1) {
                *m += (pe - ps) * q;
                pe *= eta;
                ps *= es;
            }
        }
    }
    let mut bc = GridField::zeros(*grid);
    let r = grid.r_outer;
    for k in 0..grid.n_t {
        let xi_inv = Complex64::from_polar(1.0 / r, -grid.angle(k));
        let mut s = Complex64::new(0.0, 0.0);
        let mut p = xi_inv;
        for (j, m) in moments.iter().enumerate().skip(1) {
            s += m * p / j as f64;
            p *= xi_inv;
        }
        bc.values[grid.index(grid.n_r, k)] = (-log_sum - s.re) / (2.0 * PI);
    }
    bc
}

/// Solve with the far-field outer boundary condition.
pub fn solve_exterior(grid: &AnnularGrid, omega: &GridField) -> Result<GridField> {
    solve_poisson_fd(grid, omega, &far_field_bc(grid, omega))
}

/// Manufactured pair `(psi, Laplacian psi)`: a `sin^4` bump in radius times
/// an angular profile, zero on `r = 1` and for `r >= 3`.
pub fn manufactured(xi: Complex64) -> (f64, f64) {
    let (r, t) = (xi.norm(), xi.arg());
    if r >= 3.0 {
        return (0.0, 0.0);
    }
    let a = PI / 2.0;
    let u = a * (r - 1.0);
    let (s, c) = u.sin_cos();
    let g = 1.0 + 0.5 * (2.0 * t).cos() + 0.3 * (3.0 * t).sin();
    let gtt = -2.0 * (2.0 * t).cos() - 2.7 * (3.0 * t).sin();
    let f = s.powi(4);
    let fr = 4.0 * s.powi(3) * c * a;
    let frr = (12.0 * s * s * c * c - 4.0 * s.powi(4)) * a * a;
    (f * g, (frr + fr / r) * g + f * gtt / (r * r))
}
