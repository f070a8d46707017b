//! Per-snapshot diagnostics records.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::energy::{energy_e0, impulse, EnergyGrid};
use super::envelope::{check_envelope, envelope, ln_plus, EnvelopeParams, EnvelopeReport};
use super::proxies::{sample_field, ProxyConfig, SampledField};
use crate::dynamics::FlowState;
use crate::fieldkernels::BlobParameter;
use crate::rigidbody::Body;
use crate::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsRecord {
    pub time: f64,
    pub step: usize,
    pub circulation_total: f64,
    /// Lab-frame `(P1, P2, A)`.
    pub impulse: [f64; 3],
    /// Kinetic energy; `None` when it is unbounded (nonzero far-field
    /// circulation) or disabled.
    #[serde(rename = "E0_grid")]
    pub e0_grid: Option<f64>,
    /// `||u||^2_{H^1} + m|h'|^2 + J r^2` on the proxy grid.
    #[serde(rename = "E1_proxy")]
    pub e1_proxy: f64,
    #[serde(rename = "E3_proxy")]
    pub e3_proxy: f64,
    pub omega_inf_surrogate: f64,
    pub bkm_ratio: Option<f64>,
    pub envelope_value: f64,
    /// `max_j | |y_j(t)| - |y_j(0)| |`, body-frame distances to the origin.
    pub radius_drift: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiagnosticsConfig {
    /// `None` disables the energy quadrature.
    pub energy: Option<EnergyGrid>,
    pub proxy: ProxyConfig,
    /// Envelope constants `[K1, K2, K3]`.
    pub k: [f64; 3],
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        DiagnosticsConfig {
            energy: Some(EnergyGrid::default()),
            proxy: ProxyConfig::default(),
            k: super::envelope::CALIBRATED_K,
        }
    }
}

/// Blob used to sample the proxies: the run's own blob, or the proxy core
/// for point vortices.
pub fn proxy_blob(blob: BlobParameter, proxy: &ProxyConfig) -> BlobParameter {
    BlobParameter { delta: blob.delta.max(proxy.core) }
}

/// `max |Gamma_j| / (pi delta^2)`, the peak vorticity of a particle spread
/// over its nominal core.
pub fn omega_inf_surrogate(state: &FlowState, blob: BlobParameter) -> f64 {
    let g = state.particles.iter().map(|p| p.gamma.abs()).fold(0.0, f64::max);
    g / (PI * blob.delta * blob.delta)
}

fn rigid_energy(state: &FlowState) -> f64 {
    let b = &state.body;
    b.m * b.hdot.norm_sqr() + b.j * b.r * b.r
}

/// Record state fixed at the first snapshot of a run.
#[derive(Debug, Clone)]
pub struct RunReference {
    pub radii: Vec<f64>,
    pub envelope: EnvelopeParams,
    pub es0: f64,
    pub t0: f64,
}

/// Everything computed from one snapshot, including the sampled field for
/// dumps.
pub struct Snapshot {
    pub record: DiagnosticsRecord,
    pub sampled: SampledField,
}

pub struct Diagnostics<'a> {
    pub body: &'a Body,
    pub blob: BlobParameter,
    pub config: DiagnosticsConfig,
    reference: Option<RunReference>,
}

impl<'a> Diagnostics<'a> {
    pub fn new(body: &'a Body, blob: BlobParameter, config: DiagnosticsConfig) -> Self {
        Diagnostics { body, blob, config, reference: None }
    }

    pub fn reference(&self) -> Option<&RunReference> {
        self.reference.as_ref()
    }

    /// Compute the record of `state`; the first call fixes the reference
    /// values (initial radii and `E1(0)`, `E3(0)`).
    pub fn snapshot(&mut self, state: &FlowState, step: usize) -> Result<Snapshot> {
        let pblob = proxy_blob(self.blob, &self.config.proxy);
        let field = self.body.field(state, pblob)?;
        let sampled = sample_field(&field, &self.config.proxy.grid);
        let s0 = sampled.sobolev_sq(0);
        let s1 = sampled.sobolev_sq(1);
        let s3 = sampled.sobolev_sq(3);
        let rigid = rigid_energy(state);
        let e1 = s1 + rigid;
        let e3 = s3 + rigid;
        let omega_inf = omega_inf_surrogate(state, pblob);
        let bkm = {
            let denom = (1.0 + ln_plus(s3.sqrt())) * (1.0 + s0.sqrt() + omega_inf);
            let g = sampled.grad_inf();
            (denom > 0.0 && g > 0.0).then(|| g / denom)
        };
        let radii: Vec<f64> = state.particles.iter().map(|p| p.pos.norm()).collect();
        let reference = self.reference.get_or_insert_with(|| RunReference {
            radii: radii.clone(),
            envelope: EnvelopeParams {
                k1: self.config.k[0],
                k2: self.config.k[1],
                k3: self.config.k[2],
                e1_0: e1,
                e3_0: e3,
            },
            es0: e3,
            t0: state.time,
        });
        let radius_drift = radii.iter().zip(&reference.radii).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        let envelope_value = envelope(&reference.envelope, state.time - reference.t0, reference.es0);
        let e0 = match &self.config.energy {
            Some(grid) => match energy_e0(self.body, state, self.blob, grid) {
                Ok(v) => Some(v),
                Err(Error::UnboundedEnergy(_)) => None,
                Err(e) => return Err(e),
            },
            None => None,
        };
        let record = DiagnosticsRecord {
            time: state.time,
            step,
            circulation_total: state.total_circulation(),
            impulse: impulse(self.body, state)?,
            e0_grid: e0,
            e1_proxy: e1,
            e3_proxy: e3,
            omega_inf_surrogate: omega_inf,
            bkm_ratio: bkm,
            envelope_value,
            radius_drift,
        };
        Ok(Snapshot { record, sampled })
    }
}

/// Check the `E3` proxy of a run's records against the envelope built from
/// its first record and the constants `k`.
pub fn check_records(records: &[DiagnosticsRecord], k: [f64; 3]) -> Result<EnvelopeReport> {
    let first = records.first().ok_or_else(|| Error::Input("no records".into()))?;
    let params = EnvelopeParams { k1: k[0], k2: k[1], k3: k[2], e1_0: first.e1_proxy, e3_0: first.e3_proxy };
    let samples: Vec<(f64, f64)> = records.iter().map(|r| (r.time, r.e3_proxy)).collect();
    check_envelope(&samples, &params)
}
