//! Run output: NDJSON and CSV records, particle and body tables, flat
//! binary field dumps with a JSON sidecar.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::proxies::SampledField;
use super::record::DiagnosticsRecord;
use crate::dynamics::FlowState;
use crate::oracle::AnnularGrid;
use crate::Result;

fn csv_err(e: csv::Error) -> crate::Error {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => io.into(),
        other => crate::Error::Input(format!("csv: {other:?}")),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

/// Writers for one run directory. All output goes through this single
/// owner, in call order.
pub struct RunWriter {
    dir: PathBuf,
    ndjson: BufWriter<File>,
    records: csv::Writer<File>,
    particles: csv::Writer<File>,
    body: csv::Writer<File>,
}

impl RunWriter {
    pub fn create(dir: &Path) -> Result<Self> {
        std::fs::create_dir_all(dir)?;
        let mut records = csv::Writer::from_path(dir.join("diagnostics.csv")).map_err(csv_err)?;
        records
            .write_record([
                "time", "step", "circulation_total", "P1", "P2", "A", "E0_grid", "E1_proxy", "E3_proxy",
                "omega_inf_surrogate", "bkm_ratio", "envelope_value", "radius_drift",
            ])
            .map_err(csv_err)?;
        let mut particles = csv::Writer::from_path(dir.join("particles.csv")).map_err(csv_err)?;
        particles.write_record(["t", "id", "x", "y", "gamma"]).map_err(csv_err)?;
        let mut body = csv::Writer::from_path(dir.join("body.csv")).map_err(csv_err)?;
        body.write_record(["t", "h1", "h2", "hdot1", "hdot2", "theta", "r"]).map_err(csv_err)?;
        Ok(RunWriter {
            dir: dir.to_path_buf(),
            ndjson: BufWriter::new(File::create(dir.join("diagnostics.ndjson"))?),
            records,
            particles,
            body,
        })
    }

    pub fn record(&mut self, r: &DiagnosticsRecord) -> Result<()> {
        serde_json::to_writer(&mut self.ndjson, r)?;
        self.ndjson.write_all(b"\n")?;
        let row = [
            r.time.to_string(),
            r.step.to_string(),
            r.circulation_total.to_string(),
            r.impulse[0].to_string(),
            r.impulse[1].to_string(),
            r.impulse[2].to_string(),
            opt(r.e0_grid),
            r.e1_proxy.to_string(),
            r.e3_proxy.to_string(),
            r.omega_inf_surrogate.to_string(),
            opt(r.bkm_ratio),
            r.envelope_value.to_string(),
            r.radius_drift.to_string(),
        ];
        self.records.write_record(&row).map_err(csv_err)
    }

    /// Particle rows in lab coordinates and the body row.
    pub fn state(&mut self, s: &FlowState) -> Result<()> {
        let t = s.time.to_string();
        for (id, (x, p)) in s.lab_positions().into_iter().zip(&s.particles).enumerate() {
            self.particles
                .write_record([t.clone(), id.to_string(), x.x.to_string(), x.y.to_string(), p.gamma.to_string()])
                .map_err(csv_err)?;
        }
        let b = &s.body;
        self.body
            .write_record([
                t,
                b.h.x.to_string(),
                b.h.y.to_string(),
                b.hdot.x.to_string(),
                b.hdot.y.to_string(),
                b.theta.to_string(),
                b.r.to_string(),
            ])
            .map_err(csv_err)
    }

    /// `fields_<step>.bin` with `x, y, u1, u2` on the mapped-plane grid:
    /// body-frame positions and fluid velocity components along body axes.
    pub fn field_dump(&mut self, step: usize, time: f64, f: &SampledField) -> Result<PathBuf> {
        let stem = format!("fields_{step:08}");
        let bin = self.dir.join(format!("{stem}.bin"));
        let mut w = BufWriter::new(File::create(&bin)?);
        for g in [&f.x, &f.y, &f.u1, &f.u2] {
            for v in &g.values {
                w.write_all(&v.to_le_bytes())?;
            }
        }
        w.flush()?;
        let header = DumpHeader {
            grid: f.grid,
            layout: "field-major; each field row-major over (radial index i, angular index k)",
            fields: vec!["x", "y", "u1", "u2"],
            endianness: "little",
            dtype: "f64",
            time,
            step,
        };
        std::fs::write(self.dir.join(format!("{stem}.json")), serde_json::to_vec_pretty(&header)?)?;
        Ok(bin)
    }

    pub fn flush(&mut self) -> Result<()> {
        self.ndjson.flush()?;
        self.records.flush()?;
        self.particles.flush()?;
        self.body.flush()?;
        Ok(())
    }
}

#[derive(Serialize)]
struct DumpHeader {
    grid: AnnularGrid,
    layout: &'static str,
    fields: Vec<&'static str>,
    endianness: &'static str,
    dtype: &'static str,
    time: f64,
    step: usize,
}
