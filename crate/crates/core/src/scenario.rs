//! JSON scenario files. The schema is documented in `docs/scenario.md`.

use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::conformal::BodyShape;
use crate::diagnostics::{check_records, Diagnostics, DiagnosticsConfig, ProxyConfig, RunWriter, CALIBRATED_K};
use crate::dynamics::{run, FlowState, IntegratorConfig};
use crate::fieldkernels::{BlobParameter, VortexParticle};
use crate::oracle::AnnularGrid;
use crate::rigidbody::{Body, BodyState};
use crate::{Error, Result, Vec2};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VortexSpec {
    pub pos: Vec2,
    pub gamma: f64,
    #[serde(default)]
    pub blob_delta: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Scenario {
    pub shape: BodyShape,
    pub m: f64,
    #[serde(rename = "J")]
    pub j: f64,
    /// Initial translational velocity `h'(0)`.
    #[serde(default)]
    pub ell0: Vec2,
    #[serde(default)]
    pub r0: f64,
    #[serde(default)]
    pub vortices: Vec<VortexSpec>,
    #[serde(default)]
    pub gamma_bound: f64,
    pub dt: f64,
    #[serde(rename = "T")]
    pub t_end: f64,
    /// Steps between diagnostics records.
    pub dump_every: usize,
    /// Proxy grid in the mapped plane; when present, field dumps are
    /// written with every record.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid: Option<AnnularGrid>,
    /// Body held at its initial motion (infinite mass).
    #[serde(default)]
    pub fixed: bool,
    /// Truncation order of fitted maps (0: default).
    #[serde(default)]
    pub map_order: usize,
}

impl Scenario {
    pub fn from_json(text: &str) -> Result<Self> {
        let s: Scenario = serde_json::from_str(text).map_err(|e| Error::Input(format!("scenario: {e}")))?;
        s.validate()?;
        Ok(s)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Input(format!("cannot read {}: {e}", path.display())))?;
        Self::from_json(&text)
    }

    /// Canonical form: pretty JSON with fields in schema order.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("scenario serializes")
    }

    pub fn validate(&self) -> Result<()> {
        self.shape.validate()?;
        let finite = [self.m, self.j, self.ell0.x, self.ell0.y, self.r0, self.gamma_bound, self.t_end];
        if finite.iter().any(|v| !v.is_finite()) {
            return Err(Error::Input("non-finite scenario value".into()));
        }
        if !(self.m > 0.0 && self.j > 0.0) {
            return Err(Error::Input(format!("m = {} and J = {} must be > 0", self.m, self.j)));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) || self.t_end < 0.0 {
            return Err(Error::Input(format!("dt = {} must be > 0 and T = {} >= 0", self.dt, self.t_end)));
        }
        if self.dump_every == 0 {
            return Err(Error::Input("dump_every must be >= 1".into()));
        }
        for v in &self.vortices {
            if !(v.pos.x.is_finite() && v.pos.y.is_finite() && v.gamma.is_finite()) {
                return Err(Error::Input("non-finite vortex".into()));
            }
        }
        if let Some(g) = &self.grid {
            AnnularGrid::new(g.r_outer, g.n_r, g.n_t)?;
        }
        self.blob()?;
        Ok(())
    }

    /// The common blob radius; all vortices must share it.
    pub fn blob(&self) -> Result<BlobParameter> {
        let delta = self.vortices.first().map(|v| v.blob_delta).unwrap_or(0.0);
        if self.vortices.iter().any(|v| v.blob_delta != delta) {
            return Err(Error::Input("blob_delta must be the same for every vortex".into()));
        }
        BlobParameter::new(delta)
    }

    pub fn body(&self) -> Result<Body> {
        Body::new(self.shape.clone(), self.map_order, self.fixed)
    }

    pub fn initial_state(&self) -> FlowState {
        FlowState {
            body: BodyState { hdot: self.ell0, r: self.r0, ..BodyState::at_rest(self.m, self.j) },
            particles: self.vortices.iter().map(|v| VortexParticle { pos: v.pos, gamma: v.gamma }).collect(),
            gamma_bound: self.gamma_bound,
            time: 0.0,
        }
    }

    pub fn integrator(&self) -> Result<IntegratorConfig> {
        let c = IntegratorConfig::new(self.dt, self.blob()?);
        c.validate()?;
        Ok(c)
    }

    pub fn diagnostics(&self) -> DiagnosticsConfig {
        let mut d = DiagnosticsConfig::default();
        if let Some(g) = self.grid {
            d.proxy = ProxyConfig { grid: g, ..d.proxy };
        }
        d
    }

    /// Multiply every circulation and velocity by `a`.
    pub fn scaled(&self, a: f64) -> Scenario {
        let mut s = self.clone();
        s.ell0 = s.ell0 * a;
        s.r0 *= a;
        s.gamma_bound *= a;
        for v in &mut s.vortices {
            v.gamma *= a;
        }
        s
    }
}

/// How a scenario run ended. Input errors are returned as `Err` before any
/// output is created.
#[derive(Debug)]
pub enum RunStatus {
    Completed { steps: usize, records: usize },
    /// The particle model broke down; outputs up to the last good state
    /// are flushed.
    Breakdown { steps: usize, error: Error },
    /// The run completed but its E3 proxy left the envelope.
    EnvelopeViolated { steps: usize, error: Error },
}

/// Run `sc` writing `diagnostics.ndjson`, `diagnostics.csv`,
/// `particles.csv`, `body.csv` and, when the scenario has a `grid`, field
/// dumps into `out`.
pub fn run_to_dir(sc: &Scenario, out: &Path) -> Result<RunStatus> {
    sc.validate()?;
    let body = sc.body()?;
    let cfg = sc.integrator()?;
    let initial = sc.initial_state();
    crate::dynamics::check_clearance(&body, &initial).map_err(|e| Error::Input(format!("initial state: {e}")))?;
    let dump_fields = sc.grid.is_some();
    let mut writer = RunWriter::create(out)?;
    let mut diag = Diagnostics::new(&body, cfg.blob, sc.diagnostics());
    let mut records = Vec::new();
    let outcome = run(&body, initial, &cfg, sc.t_end, sc.dump_every, |s, k| {
        let snap = diag.snapshot(s, k)?;
        writer.record(&snap.record)?;
        writer.state(s)?;
        if dump_fields {
            writer.field_dump(k, s.time, &snap.sampled)?;
        }
        records.push(snap.record);
        Ok(())
    });
    writer.flush()?;
    match outcome.error {
        Some(e) if e.is_breakdown() => Ok(RunStatus::Breakdown { steps: outcome.steps, error: e }),
        Some(e) => Err(e),
        None => match check_records(&records, CALIBRATED_K) {
            Ok(_) => Ok(RunStatus::Completed { steps: outcome.steps, records: records.len() }),
            Err(e @ Error::EnvelopeViolated { .. }) => Ok(RunStatus::EnvelopeViolated { steps: outcome.steps, error: e }),
            Err(e) => Err(e),
        },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const ORBIT: &str = r#"{
        "shape": {"kind": "disk", "radius": 1.0},
        "m": 1.0, "J": 1.0,
        "vortices": [{"pos": [2.0, 0.0], "gamma": 1.0}],
        "dt": 0.001, "T": 10.0, "dump_every": 100, "fixed": true
    }"#;

    #[test]
    fn parse_and_defaults() {
        let s = Scenario::from_json(ORBIT).unwrap();
        assert_eq!(s.ell0, Vec2::ZERO);
        assert_eq!(s.vortices[0].blob_delta, 0.0);
        assert!(s.fixed);
        assert_eq!(s.initial_state().body.h, Vec2::ZERO);
    }

    #[test]
    fn roundtrip_is_idempotent() {
        let s = Scenario::from_json(ORBIT).unwrap();
        let a = s.to_json();
        let b = Scenario::from_json(&a).unwrap().to_json();
        assert_eq!(a, b);
    }

    #[test]
    fn input_errors() {
        assert!(matches!(Scenario::from_json("{ not json"), Err(Error::Input(_))));
        let mixed = ORBIT.replace(
            r#"[{"pos": [2.0, 0.0], "gamma": 1.0}]"#,
            r#"[{"pos": [2.0, 0.0], "gamma": 1.0, "blob_delta": 0.1}, {"pos": [3.0, 0.0], "gamma": 1.0}]"#,
        );
        assert!(matches!(Scenario::from_json(&mixed), Err(Error::Input(_))));
        assert!(Scenario::from_json(&ORBIT.replace("\"dt\": 0.001", "\"dt\": -1")).is_err());
        assert!(Scenario::from_json(&ORBIT.replace("\"m\": 1.0", "\"m\": 1.0, \"bogus\": 2")).is_err());
    }
}
