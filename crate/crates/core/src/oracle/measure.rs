//! Empirical constants of the Poisson and BKM-type estimates.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::norms::{derivative_x, derivative_y, grid_integral, l2_norm, max_norm, sobolev_norm};
use super::{solve_exterior, AnnularGrid, GridField};
use crate::conformal::ConformalMap;
use crate::fieldkernels::green_function;
use crate::{Error, Result, Vec2};

/// One NDJSON line of `measure` output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub estimate_id: String,
    pub parameters: serde_json::Value,
    pub ratio: f64,
}

/// `amplitude * exp(-|xi - c|^2 / sigma^2)`.
pub fn gaussian_vorticity(grid: AnnularGrid, center: Complex64, sigma: f64, amplitude: f64) -> GridField {
    GridField::from_fn(grid, |xi| amplitude * (-(xi - center).norm_sqr() / (sigma * sigma)).exp())
}

/// `amplitude * (1 - |xi - c|^2 / w^2)^4` on the disk of radius `w`.
pub fn bump_vorticity(grid: AnnularGrid, center: Complex64, width: f64, amplitude: f64) -> GridField {
    GridField::from_fn(grid, |xi| {
        let q = (xi - center).norm_sqr() / (width * width);
        if q < 1.0 {
            amplitude * (1.0 - q).powi(4)
        } else {
            0.0
        }
    })
}

/// Bumps of width 0.4 whose support reaches radius `R` for `R` in `radii`.
pub fn blob_family(grid: AnnularGrid, radii: &[f64], amplitude: f64) -> Vec<(f64, GridField)> {
    radii
        .iter()
        .map(|&r| (r, bump_vorticity(grid, Complex64::new(r - 0.4, 0.0), 0.4, amplitude)))
        .collect()
}

/// `u = grad_perp psi = (-psi_y, psi_x)`.
pub fn velocity_from_stream(psi: &GridField) -> (GridField, GridField) {
    (derivative_y(psi).map(|v| -v), derivative_x(psi))
}

/// `psi(x) = integral G(x, y) omega(y) dy` by polar quadrature centred at
/// `x` with `rho = t^2`, which smooths the logarithmic singularity. Nodes
/// inside the body are skipped; `extent` bounds the support of `omega`
/// as seen from `x`.
pub fn green_quadrature(
    map: &ConformalMap,
    omega: impl Fn(Vec2) -> f64,
    x: Vec2,
    extent: f64,
    nodes: (usize, usize),
) -> Result<f64> {
    let (nt, nphi) = nodes;
    let nt = nt + nt % 2;
    let tmax = extent.sqrt();
    let dt = tmax / nt as f64;
    let dphi = 2.0 * std::f64::consts::PI / nphi as f64;
    let mut total = 0.0;
    for i in 1..=nt {
        let t = i as f64 * dt;
        let w = if i == nt { 1.0 / 3.0 } else if i % 2 == 1 { 4.0 / 3.0 } else { 2.0 / 3.0 };
        let rho = t * t;
        let mut ring = 0.0;
        for k in 0..nphi {
            let y = x + Vec2::from_polar(rho, (k as f64 + 0.5) * dphi);
            let v = omega(y);
            if v == 0.0 {
                continue;
            }
            match green_function(map, x, y) {
                Ok(g) => ring += g * v,
                Err(Error::InsideBody { .. }) => {}
                Err(e) => return Err(e),
            }
        }
        // dA = rho drho dphi = 2 t^3 dt dphi
        total += w * ring * 2.0 * t * t * t;
    }
    Ok(total * dt * dphi)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonRow {
    pub support_radius: f64,
    pub omega_l2: f64,
    pub grad_psi_l2: f64,
    pub hess_psi_l2: f64,
    /// `||grad psi||_{H^1} / ||omega||_{L^2}`
    pub ratio_poisson1: f64,
    /// `||D^2 psi||_{L^2} / (||omega||_{L^2} + ||grad psi||_{L^2})`
    pub ratio_poisson2: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PoissonConstants {
    pub rows: Vec<PoissonRow>,
    pub max_poisson1: f64,
    pub max_poisson2: f64,
    /// `max / min - 1` of the second ratio across the family.
    pub poisson2_spread: f64,
}

pub fn measure_poisson_constants(grid: &AnnularGrid, family: &[(f64, GridField)]) -> Result<PoissonConstants> {
    let mut rows = Vec::with_capacity(family.len());
    for (support, omega) in family {
        if *support > grid.r_outer / 2.0 {
            return Err(Error::Input(format!(
                "support radius {support} exceeds half the outer radius {}",
                grid.r_outer
            )));
        }
        let psi = solve_exterior(grid, omega)?;
        let px = derivative_x(&psi);
        let py = derivative_y(&psi);
        let hess: f64 = [derivative_x(&px), derivative_y(&px), derivative_x(&py), derivative_y(&py)]
            .iter()
            .map(|f| grid_integral(&f.map(|v| v * v)))
            .sum::<f64>()
            .sqrt();
        let grad = sobolev_norm(&[&px, &py], 0);
        let w = l2_norm(omega);
        rows.push(PoissonRow {
            support_radius: *support,
            omega_l2: w,
            grad_psi_l2: grad,
            hess_psi_l2: hess,
            ratio_poisson1: (grad * grad + hess * hess).sqrt() / w,
            ratio_poisson2: hess / (w + grad),
        });
    }
    let max1 = rows.iter().map(|r| r.ratio_poisson1).fold(0.0, f64::max);
    let max2 = rows.iter().map(|r| r.ratio_poisson2).fold(0.0, f64::max);
    let min2 = rows.iter().map(|r| r.ratio_poisson2).fold(f64::INFINITY, f64::min);
    Ok(PoissonConstants { rows, max_poisson1: max1, max_poisson2: max2, poisson2_spread: max2 / min2 - 1.0 })
}

fn ln_plus(x: f64) -> f64 {
    if x > 1.0 {
        x.ln()
    } else {
        0.0
    }
}

/// `||grad u||_inf / [(1 + ln+ sobolev3)(1 + l2 + ||omega||_inf)]` on the grid.
pub fn measure_bkm_ratio(
    grid: &AnnularGrid,
    velocity: (&GridField, &GridField),
    omega: &GridField,
    sobolev3: f64,
    l2: f64,
) -> Result<f64> {
    if velocity.0.grid != *grid || velocity.1.grid != *grid || omega.grid != *grid {
        return Err(Error::Input("fields do not live on the measurement grid".into()));
    }
    let parts = [derivative_x(velocity.0), derivative_y(velocity.0), derivative_x(velocity.1), derivative_y(velocity.1)];
    let mut grad: f64 = 0.0;
    for j in 0..grid.len() {
        grad = grad.max(parts.iter().map(|p| p.values[j] * p.values[j]).sum::<f64>().sqrt());
    }
    Ok(grad / ((1.0 + ln_plus(sobolev3)) * (1.0 + l2 + max_norm(omega))))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BkmRow {
    pub amplitude: f64,
    pub grad_u_inf: f64,
    pub sobolev3: f64,
    pub l2: f64,
    pub omega_inf: f64,
    pub ratio: f64,
}

/// BKM ratio of a Gaussian blob at `(2.5, 0)`, width 0.3, for each amplitude.
pub fn measure_bkm_sweep(grid: &AnnularGrid, amplitudes: &[f64]) -> Result<Vec<BkmRow>> {
    amplitudes
        .iter()
        .map(|&a| {
            let omega = gaussian_vorticity(*grid, Complex64::new(2.5, 0.0), 0.3, a);
            let psi = solve_exterior(grid, &omega)?;
            let (u1, u2) = velocity_from_stream(&psi);
            let s3 = sobolev_norm(&[&u1, &u2], 3);
            let l2 = sobolev_norm(&[&u1, &u2], 0);
            let ratio = measure_bkm_ratio(grid, (&u1, &u2), &omega, s3, l2)?;
            let parts = [derivative_x(&u1), derivative_y(&u1), derivative_x(&u2), derivative_y(&u2)];
            let grad = (0..grid.len())
                .map(|j| parts.iter().map(|p| p.values[j].powi(2)).sum::<f64>().sqrt())
                .fold(0.0, f64::max);
            Ok(BkmRow { amplitude: a, grad_u_inf: grad, sobolev3: s3, l2, omega_inf: max_norm(&omega), ratio })
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_field_ratio_is_zero() {
        let g = AnnularGrid::new(4.0, 32, 64).unwrap();
        let z = GridField::zeros(g);
        assert_eq!(measure_bkm_ratio(&g, (&z, &z), &z, 0.0, 0.0).unwrap(), 0.0);
    }

    #[test]
    fn support_must_fit() {
        let g = AnnularGrid::new(4.0, 32, 64).unwrap();
        let fam = blob_family(g, &[3.0], 1.0);
        assert!(measure_poisson_constants(&g, &fam).is_err());
    }
}
