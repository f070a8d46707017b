//! Conserved and bounded quantities of a run.

mod energy;
mod envelope;
mod output;
mod proxies;
mod record;

pub use energy::{energy_e0, fluid_energy, impulse, EnergyGrid, IMPULSE_NODES};
pub use envelope::{
    calibrate, check_envelope, envelope, ln_plus, EnvelopeParams, EnvelopeReport, EnvelopeSample, CALIBRATED_K,
    CALIBRATION_K3, CALIBRATION_SAFETY, K2_FLOOR,
};
pub use output::RunWriter;
pub use proxies::{sample_field, ProxyConfig, SampledField};
pub use record::{
    check_records, omega_inf_surrogate, proxy_blob, Diagnostics, DiagnosticsConfig, DiagnosticsRecord, RunReference,
    Snapshot,
};
