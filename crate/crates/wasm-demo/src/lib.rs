//! Browser bindings. [`Demo`] holds the plain Rust state and is what the
//! native tests drive; [`Simulation`] and [`added_mass`] wrap it for JS.

use exeuler::dynamics::{step, FlowState, IntegratorConfig};
use exeuler::rigidbody::{added_mass as body_added_mass, Body};
use exeuler::scenario::Scenario;
use exeuler::Vec2;
use wasm_bindgen::prelude::*;

pub struct Demo {
    pub body: Body,
    pub state: FlowState,
    pub config: IntegratorConfig,
}

impl Demo {
    pub fn new(scenario_json: &str) -> Result<Demo, String> {
        let sc = Scenario::from_json(scenario_json).map_err(|e| e.to_string())?;
        let body = sc.body().map_err(|e| e.to_string())?;
        let config = sc.integrator().map_err(|e| e.to_string())?;
        let state = sc.initial_state();
        exeuler::dynamics::check_clearance(&body, &state).map_err(|e| e.to_string())?;
        Ok(Demo { body, state, config })
    }

    /// Advance `n` steps; on breakdown the state stays at the last good step.
    pub fn advance(&mut self, n: usize) -> Result<(), String> {
        for _ in 0..n {
            self.state = step(&self.body, &self.state, &self.config).map_err(|e| e.to_string())?;
        }
        Ok(())
    }

    /// Lab positions followed by circulations: `[x0, y0, g0, x1, ...]`.
    pub fn particles(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(3 * self.state.particles.len());
        for p in &self.state.particles {
            let x = self.state.body.to_lab(p.pos);
            out.extend([x.x, x.y, p.gamma]);
        }
        out
    }

    /// Lab boundary polygon, `[x0, y0, x1, y1, ...]`.
    pub fn outline(&self, n: usize) -> Vec<f64> {
        self.body
            .map
            .boundary_points(n.max(8))
            .iter()
            .flat_map(|b| {
                let x = self.state.body.to_lab(Vec2::from(b.z));
                [x.x, x.y]
            })
            .collect()
    }

    /// `[t, h1, h2, hdot1, hdot2, theta, r]`.
    pub fn body_state(&self) -> Vec<f64> {
        let b = &self.state.body;
        vec![self.state.time, b.h.x, b.h.y, b.hdot.x, b.hdot.y, b.theta, b.r]
    }

    /// Lab velocity on an `nx` by `ny` grid covering the box centred on the
    /// body, `[u1, u2]` per node in row-major order; NaN inside the body.
    pub fn velocity_grid(&self, nx: usize, ny: usize, half_width: f64) -> Result<Vec<f64>, String> {
        let field = self.body.field(&self.state, self.config.blob).map_err(|e| e.to_string())?;
        let b = &self.state.body;
        let mut out = Vec::with_capacity(2 * nx * ny);
        for j in 0..ny {
            for i in 0..nx {
                let x = b.h + Vec2::new(grid_coord(i, nx, half_width), grid_coord(j, ny, half_width));
                let y = b.to_body_axes(x - b.h);
                match field.velocity_at(y, true) {
                    Ok(v) => {
                        let u = v.rotate(b.theta);
                        out.extend([u.x, u.y]);
                    }
                    Err(_) => out.extend([f64::NAN, f64::NAN]),
                }
            }
        }
        Ok(out)
    }
}

fn grid_coord(i: usize, n: usize, half_width: f64) -> f64 {
    if n < 2 {
        0.0
    } else {
        -half_width + 2.0 * half_width * i as f64 / (n - 1) as f64
    }
}

/// Added-mass matrix of a shape (`{"kind": "ellipse", "semi_axes": [2, 1]}`
/// etc.) as nine row-major entries.
pub fn added_mass_entries(shape_json: &str) -> Result<Vec<f64>, String> {
    let shape = serde_json::from_str(shape_json).map_err(|e| e.to_string())?;
    let body = Body::new(shape, 0, true).map_err(|e| e.to_string())?;
    let m = body_added_mass(&body.map, &body.shape).map_err(|e| e.to_string())?;
    Ok(m.m.iter().flatten().copied().collect())
}

#[wasm_bindgen]
pub struct Simulation(Demo);

#[wasm_bindgen]
impl Simulation {
    #[wasm_bindgen(constructor)]
    pub fn new(scenario_json: &str) -> Result<Simulation, JsError> {
        Demo::new(scenario_json).map(Simulation).map_err(|e| JsError::new(&e))
    }

    pub fn step(&mut self, n: usize) -> Result<(), JsError> {
        self.0.advance(n).map_err(|e| JsError::new(&e))
    }

    pub fn particles(&self) -> Vec<f64> {
        self.0.particles()
    }

    pub fn outline(&self, n: usize) -> Vec<f64> {
        self.0.outline(n)
    }

    pub fn body_state(&self) -> Vec<f64> {
        self.0.body_state()
    }

    pub fn velocity_grid(&self, nx: usize, ny: usize, half_width: f64) -> Result<Vec<f64>, JsError> {
        self.0.velocity_grid(nx, ny, half_width).map_err(|e| JsError::new(&e))
    }
}

#[wasm_bindgen]
pub fn added_mass(shape_json: &str) -> Result<Vec<f64>, JsError> {
    added_mass_entries(shape_json).map_err(|e| JsError::new(&e))
}
