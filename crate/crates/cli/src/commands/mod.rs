pub mod ensemble;
pub mod report;
pub mod solve;
pub mod velocity;
pub mod verify;

use std::path::{Path, PathBuf};
use std::time::{Instant, SystemTime, UNIX_EPOCH};

use bht_core::analysis::FieldTag;
use bht_core::velocity::{analytic_norms, VelocityParams};
use bht_core::Lattice;

use crate::config::RawConfig;
use crate::csv::{float, Table};
use crate::error::CliResult;
use crate::manifest::{run_id, Manifest, Timing, SCHEMA_VERSION};

/// Overrides from the global flags.
#[derive(Debug, Clone, Default)]
pub struct Globals {
    pub seed: Option<u64>,
    pub out: Option<PathBuf>,
}

impl Globals {
    pub fn out_dir(&self, raw: &RawConfig) -> PathBuf {
        self.out.clone().unwrap_or_else(|| raw.output.dir.clone())
    }
}

pub fn load_config(path: &Path, globals: &Globals) -> CliResult<RawConfig> {
    let mut raw = RawConfig::load(path)?;
    if let Some(out) = &globals.out {
        raw.output.dir = out.clone();
    }
    Ok(raw)
}

pub struct Clock {
    started_unix: f64,
    start: Instant,
}

impl Clock {
    pub fn start() -> Self {
        Self {
            started_unix: SystemTime::now()
                .duration_since(UNIX_EPOCH)
                .map_or(0.0, |d| d.as_secs_f64()),
            start: Instant::now(),
        }
    }

    fn timing(&self) -> Timing {
        Timing {
            started_unix: self.started_unix,
            wall_seconds: self.start.elapsed().as_secs_f64(),
        }
    }
}

/// Manifest without inventory. The run id ignores the output directory so
/// that the same run written to two places gets the same id.
pub fn manifest(
    command: &str,
    raw: &RawConfig,
    seeds: Vec<u64>,
    derived: serde_json::Value,
    clock: &Clock,
) -> CliResult<Manifest> {
    let config = serde_json::to_value(raw)?;
    let mut keyed = config.clone();
    if let Some(obj) = keyed.as_object_mut() {
        obj.remove("output");
    }
    Ok(Manifest {
        schema_version: SCHEMA_VERSION,
        tool: "bht".into(),
        version: env!("CARGO_PKG_VERSION").into(),
        command: command.into(),
        run_id: run_id(command, &keyed, &seeds),
        config,
        seeds,
        derived,
        timing: clock.timing(),
        files: Vec::new(),
    })
}

/// Seed-independent velocity quantities recorded in every manifest.
pub fn velocity_derived(params: &VelocityParams, lattice: Lattice) -> serde_json::Value {
    let a = analytic_norms(params, lattice);
    serde_json::json!({
        "lattice_n": lattice.n(),
        "kappa_max": lattice.kappa_max(),
        "beta": params.beta(),
        "m_beta": params.m_beta(),
        "u_l2_exact": a.l2_exact,
        "u_h1_exact": a.h1_exact,
        "u_l1_fourier_exact": a.l1_fourier_exact,
        "u_l2_continuum": a.l2_continuum,
        "truncation_tail": a.truncation_tail(lattice),
    })
}

pub const SPECTRUM_HEADER: [&str; 6] = ["shell", "count", "mean", "variance", "field", "weight"];

/// Appends shells `1..=kappa_max` of one spectrum.
pub fn push_spectrum(
    t: &mut Table,
    field: FieldTag,
    weight: u32,
    counts: &[usize],
    mean: &[f64],
    variance: &[f64],
    kappa_max: usize,
) {
    for s in 1..=kappa_max.min(mean.len()) {
        t.push(vec![
            s.to_string(),
            counts[s - 1].to_string(),
            float(mean[s - 1]),
            float(variance[s - 1]),
            field.to_string(),
            weight.to_string(),
        ]);
    }
}
