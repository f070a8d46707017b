//! Grid derivatives and norms. Radial derivatives are fourth-order central
//! in the interior, second-order one-sided on the two end rows; angular
//! derivatives are fourth-order periodic. Cartesian derivatives follow by
//! the chain rule, and higher ones by nesting.

use super::GridField;

pub fn derivative_r(f: &GridField) -> GridField {
    let g = f.grid;
    let n = g.n_r;
    let h = g.dr();
    let mut out = GridField::zeros(g);
    for k in 0..g.n_t {
        let v = |i: usize| f.at(i, k);
        for i in 0..=n {
            let d = if i == 0 {
                (-3.0 * v(0) + 4.0 * v(1) - v(2)) / (2.0 * h)
            } else if i == n {
                (3.0 * v(n) - 4.0 * v(n - 1) + v(n - 2)) / (2.0 * h)
            } else if i == 1 || i == n - 1 {
                (v(i + 1) - v(i - 1)) / (2.0 * h)
            } else {
                (-v(i + 2) + 8.0 * v(i + 1) - 8.0 * v(i - 1) + v(i - 2)) / (12.0 * h)
            };
            out.values[g.index(i, k)] = d;
        }
    }
    out
}

pub fn derivative_theta(f: &GridField) -> GridField {
    let g = f.grid;
    let nt = g.n_t;
    let h = g.dtheta();
    let mut out = GridField::zeros(g);
    for i in 0..=g.n_r {
        let row = f.row(i);
        for k in 0..nt {
            let at = |d: isize| row[(k as isize + d).rem_euclid(nt as isize) as usize];
            out.values[g.index(i, k)] = (-at(2) + 8.0 * at(1) - 8.0 * at(-1) + at(-2)) / (12.0 * h);
        }
    }
    out
}

fn cartesian(f: &GridField, x: bool) -> GridField {
    let g = f.grid;
    let fr = derivative_r(f);
    let ft = derivative_theta(f);
    let mut out = GridField::zeros(g);
    for i in 0..=g.n_r {
        let r = g.radius(i);
        for k in 0..g.n_t {
            let (s, c) = g.angle(k).sin_cos();
            let j = g.index(i, k);
            out.values[j] = if x {
                c * fr.values[j] - s / r * ft.values[j]
            } else {
                s * fr.values[j] + c / r * ft.values[j]
            };
        }
    }
    out
}

pub fn derivative_x(f: &GridField) -> GridField {
    cartesian(f, true)
}

pub fn derivative_y(f: &GridField) -> GridField {
    cartesian(f, false)
}

/// Trapezoid rule for `integral f dA` over the annulus.
pub fn grid_integral(f: &GridField) -> f64 {
    let g = f.grid;
    let mut total = 0.0;
    for i in 0..=g.n_r {
        let w = if i == 0 || i == g.n_r { 0.5 } else { 1.0 };
        total += w * g.radius(i) * f.row(i).iter().sum::<f64>();
    }
    total * g.dr() * g.dtheta()
}

pub fn l2_norm(f: &GridField) -> f64 {
    grid_integral(&f.map(|v| v * v)).sqrt()
}

pub fn max_norm(f: &GridField) -> f64 {
    f.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
}

/// `(sum_{k <= s} ||D^k f||^2)^(1/2)` over all components, `D^k` the full
/// tensor of k-th Cartesian derivatives.
pub fn sobolev_norm(components: &[&GridField], s: usize) -> f64 {
    let mut total = 0.0;
    let mut level: Vec<GridField> = components.iter().map(|f| (*f).clone()).collect();
    for k in 0..=s {
        total += level.iter().map(|f| grid_integral(&f.map(|v| v * v))).sum::<f64>();
        if k < s {
            level = level.iter().flat_map(|f| [derivative_x(f), derivative_y(f)]).collect();
        }
    }
    total.sqrt()
}

#[cfg(test)]
mod tests {
    use super::super::AnnularGrid;
    use super::*;
    use std::f64::consts::PI;

    #[test]
    fn cartesian_derivatives_of_polynomial() {
        let g = AnnularGrid::new(4.0, 96, 192).unwrap();
        let f = GridField::from_fn(g, |z| z.re * z.re * z.im - 0.5 * z.im.powi(3));
        let fx = derivative_x(&f);
        let fy = derivative_y(&f);
        let ex = GridField::from_fn(g, |z| 2.0 * z.re * z.im);
        let ey = GridField::from_fn(g, |z| z.re * z.re - 1.5 * z.im * z.im);
        assert!(max_norm(&fx.zip(&ex, |a, b| a - b)) < 1e-3);
        assert!(max_norm(&fy.zip(&ey, |a, b| a - b)) < 1e-3);
    }

    #[test]
    fn area_and_l2() {
        let g = AnnularGrid::new(4.0, 64, 64).unwrap();
        let one = GridField::from_fn(g, |_| 1.0);
        assert!((grid_integral(&one) - PI * 15.0).abs() < 1e-10);
        let f = GridField::from_fn(g, |z| 1.0 / z.norm_sqr());
        // integral of r^-4 r dr dtheta = pi (1 - 1/16)
        let v = l2_norm(&f).powi(2);
        assert!((v - PI * (1.0 - 1.0 / 16.0)).abs() < 5e-3, "{v}");
    }

    #[test]
    fn sobolev_of_linear_function() {
        let g = AnnularGrid::new(4.0, 64, 128).unwrap();
        let f = GridField::from_fn(g, |z| z.re);
        let area = PI * 15.0;
        let h1 = sobolev_norm(&[&f], 1);
        let expect = (l2_norm(&f).powi(2) + area).sqrt();
        assert!((h1 - expect).abs() < 1e-6 * expect);
        let h3 = sobolev_norm(&[&f], 3);
        assert!((h3 - expect).abs() < 1e-5 * expect);
    }
}
