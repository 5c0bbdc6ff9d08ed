//! CSV snapshots, trace series and run metadata.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::basis::ReferenceElement;
use crate::config::RunConfig;
use crate::diagnostics::{sample_coordinates, ReferenceSolution, RunTrace};
use crate::equations::{ConservationLaw, EulerState};
use crate::field::View;
use crate::mesh::Mesh;
use crate::solver::{RunOutcome, Snapshot};
use crate::viscosity::ViscosityField;
use crate::Result;

pub const META_FILE: &str = "meta.json";
pub const TRACE_FILE: &str = "trace.csv";
pub const SOLUTION_PREFIX: &str = "solution_t";

pub fn snapshot_file_name(time: f64) -> String {
    format!("{SOLUTION_PREFIX}{time:.6}.csv")
}

/// Seventeen significant digits.
pub fn format_value(v: f64) -> String {
    format!("{v:.16e}")
}

/// Header of a snapshot file.
pub fn solution_columns(law: &ConservationLaw) -> Vec<String> {
    let mut cols = vec!["x".to_string()];
    cols.extend(law.variable_names().iter().map(|s| s.to_string()));
    if law.is_system() {
        cols.push("v".into());
        cols.push("P".into());
    }
    cols.push("eps".into());
    cols
}

/// Rows of a snapshot on the `4 (p + 1)` points per element output grid.
pub fn snapshot_rows(
    snapshot: &Snapshot,
    law: &ConservationLaw,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Vec<Vec<f64>> {
    let pts = sample_coordinates(elem.degree());
    let interp = elem.interpolation_matrix(&pts);
    let nodal = snapshot.field.to_view(View::Nodal, elem);
    let nv = law.n_vars();
    let mut rows = Vec::with_capacity(mesh.n_elements * pts.len());
    for e in 0..mesh.n_elements {
        for (i, &xi) in pts.iter().enumerate() {
            let mut row = vec![mesh.to_physical(e, xi)];
            for v in 0..nv {
                let c = nodal.coeffs(e, v);
                row.push((0..c.len()).map(|k| interp[(i, k)] * c[k]).sum());
            }
            if let ConservationLaw::Euler { gamma } = law {
                let s = EulerState::from_slice(&row[1..=nv]);
                row.push(s.velocity());
                row.push(s.pressure(*gamma));
            }
            row.push(snapshot.viscosity.value_at(e, xi));
            rows.push(row);
        }
    }
    rows
}

fn csv_writer(path: &Path) -> Result<csv::Writer<fs::File>> {
    Ok(csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)?)
}

fn write_table(path: &Path, header: &[String], rows: impl IntoIterator<Item = Vec<String>>) -> Result<()> {
    let mut w = csv_writer(path)?;
    w.write_record(header)?;
    for r in rows {
        w.write_record(&r)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_snapshot(
    dir: &Path,
    snapshot: &Snapshot,
    law: &ConservationLaw,
    mesh: &Mesh,
    elem: &ReferenceElement,
) -> Result<PathBuf> {
    let path = dir.join(snapshot_file_name(snapshot.time));
    let rows = snapshot_rows(snapshot, law, mesh, elem);
    write_table(
        &path,
        &solution_columns(law),
        rows.into_iter().map(|r| r.into_iter().map(format_value).collect()),
    )?;
    Ok(path)
}

pub fn trace_columns(law: &ConservationLaw) -> Vec<String> {
    let mut cols = vec!["t".to_string()];
    cols.extend(law.variable_names().iter().map(|s| format!("mass_{s}")));
    cols.extend(["entropy", "max_eps", "flagged", "dt"].map(String::from));
    cols
}

pub fn write_trace(dir: &Path, trace: &RunTrace, law: &ConservationLaw) -> Result<PathBuf> {
    let path = dir.join(TRACE_FILE);
    let rows = trace.rows.iter().map(|r| {
        let mut row = vec![format_value(r.t)];
        row.extend(r.mass.iter().map(|m| format_value(*m)));
        row.push(format_value(r.entropy));
        row.push(format_value(r.max_eps));
        row.push(r.flagged.to_string());
        row.push(format_value(r.dt));
        row
    });
    write_table(&path, &trace_columns(law), rows)?;
    Ok(path)
}

/// Contents of `meta.json`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunMeta {
    pub run_id: String,
    pub version: String,
    pub status: String,
    pub error: Option<String>,
    pub final_time: f64,
    pub steps: usize,
    pub wall_time_s: f64,
    pub snapshots: Vec<String>,
    pub config: RunConfig,
}

/// Short content hash of the resolved configuration.
pub fn run_id(config: &RunConfig) -> String {
    let text = serde_json::to_string(config).unwrap_or_default();
    let digest = Sha256::digest(text.as_bytes());
    digest.iter().take(6).map(|b| format!("{b:02x}")).collect()
}

pub fn write_meta(dir: &Path, meta: &RunMeta) -> Result<PathBuf> {
    let path = dir.join(META_FILE);
    fs::write(&path, serde_json::to_string_pretty(meta)? + "\n")?;
    Ok(path)
}

pub fn read_meta(dir: &Path) -> Result<RunMeta> {
    let text = fs::read_to_string(dir.join(META_FILE))?;
    Ok(serde_json::from_str(&text)?)
}

/// Write every snapshot, the trace and the metadata of a finished (or failed)
/// run. After a failure the last good state is written as an extra snapshot.
pub fn write_run(dir: &Path, config: &RunConfig, outcome: &RunOutcome, wall_time_s: f64) -> Result<RunMeta> {
    fs::create_dir_all(dir)?;
    let sim = &outcome.simulation;
    let mut names = Vec::new();
    let mut snapshots: Vec<Snapshot> = outcome.snapshots.clone();
    if outcome.failure.is_some() && snapshots.last().map(|s| s.time) != Some(sim.time()) {
        let last = match sim.snapshot() {
            Ok(s) => s,
            Err(_) => Snapshot {
                time: sim.time(),
                field: sim.field().clone(),
                viscosity: ViscosityField::zeros(sim.mesh().n_elements, sim.elem().n_nodes()),
            },
        };
        snapshots.push(last);
    }
    for s in &snapshots {
        let path = write_snapshot(dir, s, sim.law(), sim.mesh(), sim.elem())?;
        names.push(path.file_name().unwrap().to_string_lossy().into_owned());
    }
    write_trace(dir, sim.trace(), sim.law())?;
    let meta = RunMeta {
        run_id: run_id(config),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: if outcome.succeeded() {
            "ok".into()
        } else {
            "failed".into()
        },
        error: outcome.failure.as_ref().map(|e| e.to_string()),
        final_time: sim.time(),
        steps: sim.steps(),
        wall_time_s,
        snapshots: names,
        config: config.clone(),
    };
    write_meta(dir, &meta)?;
    Ok(meta)
}

/// Write a limited reference solution in the snapshot format, with metadata
/// describing it as a degree-1 run of `config.scenario`.
pub fn write_reference(
    dir: &Path,
    config: &RunConfig,
    reference: &ReferenceSolution,
    wall_time_s: f64,
) -> Result<RunMeta> {
    fs::create_dir_all(dir)?;
    let snapshot = Snapshot {
        time: reference.time,
        field: reference.field.clone(),
        viscosity: ViscosityField::zeros(reference.mesh.n_elements, reference.elem.n_nodes()),
    };
    let path = write_snapshot(dir, &snapshot, &reference.law, &reference.mesh, &reference.elem)?;
    let meta = RunMeta {
        run_id: run_id(config),
        version: env!("CARGO_PKG_VERSION").to_string(),
        status: "ok".into(),
        error: None,
        final_time: reference.time,
        steps: reference.steps,
        wall_time_s,
        snapshots: vec![path.file_name().unwrap().to_string_lossy().into_owned()],
        config: config.clone(),
    };
    write_meta(dir, &meta)?;
    Ok(meta)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scenario::Scenario;

    #[test]
    fn file_names_and_formatting() {
        assert_eq!(snapshot_file_name(0.2), "solution_t0.200000.csv");
        let s = format_value(0.1);
        assert_eq!(s.parse::<f64>().unwrap(), 0.1);
        assert_eq!(s, "1.0000000000000001e-1");
    }

    #[test]
    fn columns() {
        assert_eq!(solution_columns(&ConservationLaw::advection()), ["x", "u", "eps"]);
        assert_eq!(
            solution_columns(&ConservationLaw::euler()),
            ["x", "rho", "m", "E", "v", "P", "eps"]
        );
    }

    #[test]
    fn run_id_is_stable_and_config_dependent() {
        let a = RunConfig::for_scenario(Scenario::Sod);
        let mut b = a.clone();
        assert_eq!(run_id(&a), run_id(&b));
        b.mesh.elements = Some(80);
        assert_ne!(run_id(&a), run_id(&b));
        assert_eq!(run_id(&a).len(), 12);
    }
}
