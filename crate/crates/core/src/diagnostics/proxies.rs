//! Sobolev-energy proxies from the velocity sampled on a polar grid of the
//! mapped plane. Physical derivatives use the chain rule through the map,
//! `d/dx1 = a d/dxi1 + b d/dxi2`, `d/dx2 = -b d/dxi1 + a d/dxi2` with
//! `T' = a + i b`, and areas carry the factor `|f'|^2 = |T'|^-2`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::fieldkernels::FlowField;
use crate::oracle::{derivative_x, derivative_y, grid_integral, AnnularGrid, GridField};

/// Velocity and map data on the nodes of an annular grid.
#[derive(Debug, Clone)]
pub struct SampledField {
    pub grid: AnnularGrid,
    pub x: GridField,
    pub y: GridField,
    pub u1: GridField,
    pub u2: GridField,
    /// `T'` at each node, as (re, im).
    tp: (GridField, GridField),
    /// `|f'|^2`
    area: GridField,
}

pub fn sample_field(field: &FlowField, grid: &AnnularGrid) -> SampledField {
    let g = *grid;
    let mut x = GridField::zeros(g);
    let mut y = GridField::zeros(g);
    let mut u1 = GridField::zeros(g);
    let mut u2 = GridField::zeros(g);
    let mut ta = GridField::zeros(g);
    let mut tb = GridField::zeros(g);
    let mut area = GridField::zeros(g);
    let node = |j: usize| -> [f64; 7] {
        let xi: Complex64 = g.point(j / g.n_t, j % g.n_t);
        let z = field.map.inverse_complex(xi);
        let (df, _) = field.map.inverse_derivs(xi);
        let tp = df.inv();
        let v = field.dw(xi, None, true) * tp;
        [z.re, z.im, v.re, -v.im, tp.re, tp.im, df.norm_sqr()]
    };
    #[cfg(feature = "parallel")]
    let vals: Vec<[f64; 7]> = {
        use rayon::prelude::*;
        (0..g.len()).into_par_iter().map(node).collect()
    };
    #[cfg(not(feature = "parallel"))]
    let vals: Vec<[f64; 7]> = (0..g.len()).map(node).collect();
    for (j, v) in vals.into_iter().enumerate() {
        x.values[j] = v[0];
        y.values[j] = v[1];
        u1.values[j] = v[2];
        u2.values[j] = v[3];
        ta.values[j] = v[4];
        tb.values[j] = v[5];
        area.values[j] = v[6];
    }
    SampledField { grid: g, x, y, u1, u2, tp: (ta, tb), area }
}

impl SampledField {
    fn dx(&self, f: &GridField) -> (GridField, GridField) {
        let fx = derivative_x(f);
        let fy = derivative_y(f);
        let (a, b) = (&self.tp.0.values, &self.tp.1.values);
        let mut d1 = GridField::zeros(self.grid);
        let mut d2 = GridField::zeros(self.grid);
        for j in 0..self.grid.len() {
            d1.values[j] = a[j] * fx.values[j] + b[j] * fy.values[j];
            d2.values[j] = -b[j] * fx.values[j] + a[j] * fy.values[j];
        }
        (d1, d2)
    }

    fn integral_sq(&self, f: &GridField) -> f64 {
        grid_integral(&f.zip(&self.area, |v, w| v * v * w))
    }

    /// `sum_{k <= s} ||D^k u||^2` over the sampled region.
    pub fn sobolev_sq(&self, s: usize) -> f64 {
        let mut level = vec![self.u1.clone(), self.u2.clone()];
        let mut total = 0.0;
        for k in 0..=s {
            total += level.iter().map(|f| self.integral_sq(f)).sum::<f64>();
            if k < s {
                level = level
                    .iter()
                    .flat_map(|f| {
                        let (a, b) = self.dx(f);
                        [a, b]
                    })
                    .collect();
            }
        }
        total
    }

    /// `max |grad u|` (Frobenius) over the nodes.
    pub fn grad_inf(&self) -> f64 {
        let (a, b) = self.dx(&self.u1);
        let (c, d) = self.dx(&self.u2);
        (0..self.grid.len())
            .map(|j| (a.values[j].powi(2) + b.values[j].powi(2) + c.values[j].powi(2) + d.values[j].powi(2)).sqrt())
            .fold(0.0, f64::max)
    }
}

/// Grid and core radius used for the proxies.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ProxyConfig {
    pub grid: AnnularGrid,
    /// Smallest blob radius (physical) used to sample the field; the
    /// Sobolev norms of point vortices are infinite.
    pub core: f64,
}

impl Default for ProxyConfig {
    fn default() -> Self {
        ProxyConfig { grid: AnnularGrid { r_outer: 8.0, n_r: 112, n_t: 256 }, core: 0.15 }
    }
}
