use std::f64::consts::PI;

use exeuler::conformal::{build_map, BodyShape, ConformalMap};
use exeuler::diagnostics::{envelope, EnvelopeParams};
use exeuler::dynamics::{run, FlowState, IntegratorConfig};
use exeuler::fieldkernels::{
    green_function, harmonic_circulation_field, kernel_k, kernel_kstar, total_velocity, BlobParameter, BodyMotion,
    VortexParticle,
};
use exeuler::oracle::{far_field_bc, solve_poisson_fd, AnnularGrid, GridField};
use exeuler::rigidbody::{Body, BodyState};
use exeuler::scenario::Scenario;
use exeuler::suites::{scenario_dir, shipped_scenario};
use exeuler::Vec2;
use proptest::prelude::*;

fn ellipse() -> ConformalMap {
    build_map(&BodyShape::Ellipse { semi_axes: [2.0, 1.0] }, 0).unwrap()
}

fn exterior(map: &ConformalMap, r: f64, t: f64) -> Vec2 {
    map.map_inverse(Vec2::from_polar(r, t)).unwrap()
}

proptest! {
    #[test]
    fn ellipse_roundtrip(r in 1.001f64..50.0, t in 0.0f64..6.3) {
        let m = ellipse();
        let x = exterior(&m, r, t);
        let back = m.map_inverse(m.map_forward(x).unwrap()).unwrap();
        prop_assert!((back - x).norm() < 1e-9 * x.norm().max(1.0));
    }

    #[test]
    fn green_is_symmetric(r1 in 1.01f64..8.0, t1 in 0.0f64..6.3, r2 in 1.01f64..8.0, t2 in 0.0f64..6.3) {
        let m = ellipse();
        let (x, y) = (exterior(&m, r1, t1), exterior(&m, r2, t2));
        prop_assume!((x - y).norm() > 1e-6);
        let a = green_function(&m, x, y).unwrap();
        let b = green_function(&m, y, x).unwrap();
        prop_assert!((a - b).abs() < 1e-12, "{a} {b}");
        prop_assert!(a < 0.0);
    }

    #[test]
    fn envelope_is_monotone(t in 0.0f64..3.0, dt in 1e-3f64..1.0, k1 in 1.0f64..3.0, k2 in 1e-3f64..0.5,
                            k3 in 1e-3f64..0.2, e1 in 1e-3f64..20.0, e3 in 1e-3f64..1e4) {
        let p = EnvelopeParams { k1, k2, k3, e1_0: e1, e3_0: e3 };
        let a = envelope(&p, t, 1.0);
        prop_assert!(envelope(&p, t + dt, 1.0) > a);
        let more_e1 = EnvelopeParams { e1_0: e1 * 1.5, ..p };
        let more_e3 = EnvelopeParams { e3_0: e3 * 1.5, ..p };
        prop_assume!(envelope(&more_e1, t + dt, 1.0).is_finite() && envelope(&more_e3, t + dt, 1.0).is_finite());
        prop_assert!(envelope(&more_e1, t + dt, 1.0) > envelope(&p, t + dt, 1.0));
        prop_assert!(envelope(&more_e3, t + dt, 1.0) >= envelope(&p, t + dt, 1.0));
    }

    #[test]
    fn disk_velocity_is_rotation_equivariant(alpha in 0.0f64..6.3) {
        let m = ConformalMap::identity();
        let ps = [
            VortexParticle { pos: Vec2::new(2.0, 0.3), gamma: 1.0 },
            VortexParticle { pos: Vec2::new(-1.4, 1.9), gamma: -0.6 },
        ];
        let motion = BodyMotion { ell: Vec2::new(0.4, -0.7), r: 0.3 };
        let x = Vec2::new(1.3, -2.2);
        let rot = |v: Vec2| Vec2::from(v.to_complex() * num_complex::Complex64::from_polar(1.0, alpha));
        let blob = BlobParameter::new(0.05).unwrap();
        let u = total_velocity(&m, &ps, motion, 0.2, x, blob).unwrap();
        let ps2: Vec<_> = ps.iter().map(|p| VortexParticle { pos: rot(p.pos), gamma: p.gamma }).collect();
        let m2 = BodyMotion { ell: rot(motion.ell), r: motion.r };
        let u2 = total_velocity(&m, &ps2, m2, 0.2, rot(x), blob).unwrap();
        prop_assert!((u2 - rot(u)).norm() < 1e-10);
    }
}

#[test]
fn green_example_matches_fd_oracle() {
    // unit disk, x = (2,0), y = (0,3): closed form and the discrete Green's
    // function of the FD oracle (unit mass on the node at y)
    let map = ConformalMap::identity();
    let x = Vec2::new(2.0, 0.0);
    let y = Vec2::new(0.0, 3.0);
    let g = green_function(&map, x, y).unwrap();
    let ystar = y * (1.0 / y.norm_sqr());
    let closed = ((x - y).norm() / ((x - ystar).norm() * y.norm())).ln() / (2.0 * PI);
    assert!((g - closed).abs() < 1e-14);
    let grid = AnnularGrid::new(12.0, 352, 1024).unwrap();
    let (i, k) = (64, 256);
    let mut omega = GridField::zeros(grid);
    omega.values[grid.index(i, k)] = 1.0 / (grid.radius(i) * grid.dr() * grid.dtheta());
    let psi = solve_poisson_fd(&grid, &omega, &far_field_bc(&grid, &omega)).unwrap();
    let fd = psi.at(32, 0);
    assert!((fd - g).abs() < 1e-3 * g.abs(), "{fd} {g}");
}

fn slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(a, b)| (a - mx) * (b - my)).sum();
    let sxx: f64 = xs.iter().map(|a| (a - mx).powi(2)).sum();
    sxy / sxx
}

#[test]
fn harmonic_field_l2_grows_like_log_radius() {
    // 2 pi ||H||^2 over 1 < |x| < R by radial Simpson on the exact |H| and an
    // angular trapezoid
    let map = ConformalMap::identity();
    let radii = [4.0, 8.0, 16.0, 32.0, 64.0];
    let mut vals = vec![];
    for &r_out in &radii {
        let (nr, nt) = (2000, 64);
        let h = (r_out as f64).ln() / nr as f64;
        let mut total = 0.0;
        for i in 0..=nr {
            let s = i as f64 * h;
            let w = if i == 0 || i == nr { 1.0 } else if i % 2 == 1 { 4.0 } else { 2.0 };
            let r = s.exp();
            let mut ring = 0.0;
            for k in 0..nt {
                let x = Vec2::from_polar(r, 2.0 * PI * k as f64 / nt as f64);
                ring += harmonic_circulation_field(&map, x).unwrap().norm_sqr();
            }
            // dA = r^2 ds dtheta in s = ln r
            total += w * ring * r * r;
        }
        vals.push(2.0 * PI * total * h / 3.0 * 2.0 * PI / nt as f64);
    }
    let logs: Vec<f64> = radii.iter().map(|r: &f64| r.ln()).collect();
    let s = slope(&logs, &vals);
    assert!((s - 1.0).abs() < 0.05, "{s}");
}

#[test]
fn kernel_difference_decays_with_slope_minus_two() {
    let map = ellipse();
    let y = exterior(&map, 1.6, 0.7);
    let mut lx = vec![];
    let mut ly = vec![];
    for k in 0..8 {
        let r = 4.0 * 2f64.powi(k);
        let x = exterior(&map, r, 2.1);
        let d = kernel_k(&map, x, y).unwrap() - kernel_kstar(&map, x, y).unwrap();
        lx.push(r.ln());
        ly.push(d.norm().ln());
    }
    let s = slope(&lx, &ly);
    assert!((s + 2.0).abs() < 0.02, "{s}");
}

#[test]
fn spinning_disk_frame_matches_lab() {
    // a rotating disk does not disturb the fluid: the lab trajectory of a
    // vortex pair must not depend on the spin even though the body frame
    // rotates with it
    let body = Body::new(BodyShape::Disk { radius: 1.0 }, 0, true).unwrap();
    let particles = vec![
        VortexParticle { pos: Vec2::new(2.5, 0.5), gamma: 1.0 },
        VortexParticle { pos: Vec2::new(-1.0, -2.5), gamma: 0.4 },
    ];
    let start = |r: f64| FlowState { body: BodyState { r, ..BodyState::at_rest(1.0, 1.0) }, particles: particles.clone(), gamma_bound: 0.0, time: 0.0 };
    let cfg = IntegratorConfig::new(2e-3, BlobParameter::POINT);
    let a = run(&body, start(0.0), &cfg, 2.0, usize::MAX, |_, _| Ok(()));
    let b = run(&body, start(0.8), &cfg, 2.0, usize::MAX, |_, _| Ok(()));
    assert!((b.state.body.theta - 1.6).abs() < 1e-12);
    for (p, q) in a.state.lab_positions().iter().zip(b.state.lab_positions()) {
        assert!((*p - q).norm() < 1e-10, "{p:?} {q:?}");
    }
}

#[test]
fn head_on_pair_keeps_body_on_axis() {
    let sc = shipped_scenario("pair_head_on").unwrap();
    let body = sc.body().unwrap();
    let cfg = sc.integrator().unwrap();
    let mut worst: f64 = 0.0;
    let out = run(&body, sc.initial_state(), &cfg, sc.t_end, 10, |s, _| {
        worst = worst.max(s.body.h.y.abs()).max(s.body.hdot.y.abs());
        Ok(())
    });
    assert!(out.error.is_none());
    assert!(out.state.body.h.x.abs() > 1e-3, "body should move");
    assert!(worst < 1e-8, "{worst}");
}

#[test]
fn shipped_scenarios_roundtrip() {
    for entry in std::fs::read_dir(scenario_dir()).unwrap() {
        let path = entry.unwrap().path();
        let s = Scenario::load(&path).unwrap();
        let a = s.to_json();
        let b = Scenario::from_json(&a).unwrap();
        assert_eq!(b, s, "{}", path.display());
        assert_eq!(b.to_json(), a);
    }
}
