//! A/B comparison of two run directories against an exact or stored
//! reference: error norms, overshoots next to jumps and jump widths.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::diagnostics::{advection_exact, sod_exact, Norms};
use crate::output::{read_meta, RunMeta, SOLUTION_PREFIX};
use crate::scenario::{InitialProfile, Scenario};
use crate::{DgError, Result};

/// A reference jump must exceed this fraction of the variable's range.
const JUMP_FRACTION: f64 = 0.1;
/// Half-width of the window around a jump, in elements.
const JUMP_WINDOW_ELEMENTS: f64 = 2.0;

/// Snapshot loaded back from CSV, stored column-wise.
#[derive(Debug, Clone, PartialEq)]
pub struct SnapshotData {
    pub time: f64,
    pub columns: Vec<String>,
    pub values: Vec<Vec<f64>>,
}

impl SnapshotData {
    pub fn column(&self, name: &str) -> Option<&[f64]> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.values[i].as_slice())
    }

    pub fn x(&self) -> &[f64] {
        &self.values[0]
    }

    /// Solution columns (everything except `x` and `eps`).
    pub fn variables(&self) -> Vec<&str> {
        self.columns
            .iter()
            .map(String::as_str)
            .filter(|c| *c != "x" && *c != "eps")
            .collect()
    }

    /// Piecewise-linear interpolation of column `name` at `x`, constant
    /// extrapolation outside the sampled range.
    pub fn interpolate(&self, name: &str, x: f64) -> Option<f64> {
        let col = self.column(name)?;
        let xs = self.x();
        let i = xs.partition_point(|v| *v < x);
        Some(if i == 0 {
            col[0]
        } else if i == xs.len() {
            col[xs.len() - 1]
        } else if xs[i] == x {
            col[i]
        } else {
            let (x0, x1) = (xs[i - 1], xs[i]);
            let s = if x1 > x0 { (x - x0) / (x1 - x0) } else { 0.0 };
            col[i - 1] + s * (col[i] - col[i - 1])
        })
    }
}

/// Parse a snapshot CSV written by [`crate::output::write_snapshot`].
pub fn load_snapshot(path: &Path) -> Result<SnapshotData> {
    let time = snapshot_time(path)
        .ok_or_else(|| DgError::InvalidInput(format!("{} is not a snapshot file", path.display())))?;
    let mut reader = csv::Reader::from_path(path)?;
    let columns: Vec<String> = reader.headers()?.iter().map(String::from).collect();
    let mut values = vec![Vec::new(); columns.len()];
    for record in reader.records() {
        let record = record?;
        for (col, field) in values.iter_mut().zip(record.iter()) {
            col.push(
                field
                    .parse::<f64>()
                    .map_err(|e| DgError::InvalidInput(format!("{}: bad number '{field}': {e}", path.display())))?,
            );
        }
    }
    Ok(SnapshotData { time, columns, values })
}

fn snapshot_time(path: &Path) -> Option<f64> {
    let name = path.file_name()?.to_str()?;
    name.strip_prefix(SOLUTION_PREFIX)?.strip_suffix(".csv")?.parse().ok()
}

/// The latest snapshot in a run directory.
pub fn final_snapshot(dir: &Path) -> Result<(PathBuf, SnapshotData)> {
    let mut best: Option<(f64, PathBuf)> = None;
    for entry in std::fs::read_dir(dir)? {
        let path = entry?.path();
        if let Some(t) = snapshot_time(&path) {
            if best.as_ref().is_none_or(|(bt, _)| t > *bt) {
                best = Some((t, path));
            }
        }
    }
    let (_, path) = best.ok_or_else(|| DgError::InvalidInput(format!("no snapshots in {}", dir.display())))?;
    let snap = load_snapshot(&path)?;
    Ok((path, snap))
}

/// Where reference values come from.
#[derive(Debug, Clone, PartialEq)]
pub enum ReferenceSpec {
    /// Exact solution of the scenario (advection presets and Sod).
    Exact,
    /// Final snapshot of another run directory.
    Dir(PathBuf),
}

impl std::str::FromStr for ReferenceSpec {
    type Err = std::convert::Infallible;

    fn from_str(s: &str) -> std::result::Result<Self, Self::Err> {
        Ok(if s == "exact" {
            ReferenceSpec::Exact
        } else {
            ReferenceSpec::Dir(PathBuf::from(s))
        })
    }
}

/// Reference values for every solution column at arbitrary `x`.
pub enum Reference {
    Exact {
        profile: InitialProfile,
        scenario: Scenario,
        time: f64,
        domain: (f64, f64),
    },
    Snapshot(SnapshotData),
}

impl Reference {
    pub fn exact(meta: &RunMeta, time: f64) -> Result<Self> {
        let scenario = meta.config.scenario;
        if scenario == Scenario::ShuOsher {
            return Err(DgError::Unsupported(
                "shu_osher has no exact solution; pass a reference run directory".into(),
            ));
        }
        let [a, b] = meta.config.domain();
        Ok(Reference::Exact {
            profile: scenario.initial_profile(meta.config.preset_variant),
            scenario,
            time,
            domain: (a, b),
        })
    }

    /// Values of the named columns at `x`.
    pub fn values(&self, names: &[&str], x: f64) -> Result<Vec<f64>> {
        match self {
            Reference::Snapshot(s) => names
                .iter()
                .map(|n| {
                    s.interpolate(n, x)
                        .ok_or_else(|| DgError::InvalidInput(format!("reference lacks column {n}")))
                })
                .collect(),
            Reference::Exact {
                profile,
                scenario,
                time,
                domain,
            } => {
                let (u, gamma) = match profile {
                    InitialProfile::Riemann { x0, left, right, gamma } => {
                        let t = time.max(f64::MIN_POSITIVE);
                        (
                            sod_exact(x, t, *left, *right, *gamma, *x0)?.to_array().to_vec(),
                            Some(*gamma),
                        )
                    }
                    _ if scenario.is_advection() => (vec![advection_exact(profile, *time, x, *domain)], None),
                    _ => {
                        return Err(DgError::Unsupported(format!(
                            "no exact solution for {}",
                            scenario.name()
                        )))
                    }
                };
                names
                    .iter()
                    .map(|n| match (*n, gamma) {
                        ("u" | "rho", _) => Ok(u[0]),
                        ("m", Some(_)) => Ok(u[1]),
                        ("E", Some(_)) => Ok(u[2]),
                        ("v", Some(_)) => Ok(u[1] / u[0]),
                        ("P", Some(g)) => Ok(crate::EulerState::from_slice(&u).pressure(g)),
                        _ => Err(DgError::InvalidInput(format!("no exact value for column {n}"))),
                    })
                    .collect()
            }
        }
    }
}

/// Metrics around one reference jump.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct JumpMetrics {
    pub variable: String,
    /// Location of the jump in the reference.
    pub position: f64,
    pub left_value: f64,
    pub right_value: f64,
    /// Largest excess over the reference maximum within the window.
    pub overshoot: f64,
    /// Largest deficit below the reference minimum within the window.
    pub undershoot: f64,
    /// Distance between the 10% and 90% crossings of the jump, `None` when
    /// the transition is not completed inside the window.
    pub width: Option<f64>,
    /// [`JumpMetrics::width`] in element widths.
    pub width_cells: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariableNorms {
    pub variable: String,
    #[serde(flatten)]
    pub norms: Norms,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunReport {
    pub directory: String,
    pub run_id: String,
    pub viscosity: String,
    pub time: f64,
    pub errors: Vec<VariableNorms>,
    pub jumps: Vec<JumpMetrics>,
    pub max_overshoot: f64,
    pub max_undershoot: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareReport {
    pub scenario: String,
    pub reference: String,
    pub a: RunReport,
    pub b: RunReport,
    /// Norms of `a - b` on the grid of `a`.
    pub difference: Vec<VariableNorms>,
}

fn norms_of(diffs: impl Iterator<Item = f64>, dx: &[f64]) -> Norms {
    let mut n = Norms {
        l1: 0.0,
        l2: 0.0,
        linf: 0.0,
    };
    for (d, w) in diffs.zip(dx) {
        let e = d.abs();
        n.l1 += e * w;
        n.l2 += e * e * w;
        n.linf = n.linf.max(e);
    }
    n.l2 = n.l2.sqrt();
    n
}

/// Midpoint weights of a cell-centred grid covering `[a, b]`.
fn cell_widths(x: &[f64], domain: [f64; 2]) -> Vec<f64> {
    let n = x.len();
    let w = (domain[1] - domain[0]) / n as f64;
    vec![w; n]
}

/// Error norms of every solution column of `snap` against `reference`,
/// optionally restricted to `window`.
pub fn error_against(
    snap: &SnapshotData,
    reference: &Reference,
    domain: [f64; 2],
    window: Option<(f64, f64)>,
) -> Result<Vec<VariableNorms>> {
    let vars = snap.variables();
    let xs = snap.x();
    let dx = cell_widths(xs, domain);
    let refs: Vec<Vec<f64>> = xs.iter().map(|&x| reference.values(&vars, x)).collect::<Result<_>>()?;
    let inside: Vec<bool> = xs
        .iter()
        .map(|&x| window.is_none_or(|(a, b)| x >= a && x <= b))
        .collect();
    Ok(vars
        .iter()
        .enumerate()
        .map(|(k, name)| {
            let col = snap.column(name).unwrap();
            let diffs = (0..xs.len()).map(|i| if inside[i] { col[i] - refs[i][k] } else { 0.0 });
            VariableNorms {
                variable: name.to_string(),
                norms: norms_of(diffs, &dx),
            }
        })
        .collect())
}

/// Overshoot, undershoot and 10–90% width around every jump of the
/// reference in the conserved column `name`.
pub fn jump_metrics(snap: &SnapshotData, reference: &Reference, name: &str, h: f64) -> Result<Vec<JumpMetrics>> {
    let xs = snap.x();
    let col = snap
        .column(name)
        .ok_or_else(|| DgError::InvalidInput(format!("snapshot lacks column {name}")))?;
    let refv: Vec<f64> = xs
        .iter()
        .map(|&x| reference.values(&[name], x).map(|v| v[0]))
        .collect::<Result<_>>()?;
    let (lo, hi) = refv
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), v| (a.min(*v), b.max(*v)));
    let range = hi - lo;
    if !(range > 0.0) {
        return Ok(Vec::new());
    }
    let half = JUMP_WINDOW_ELEMENTS * h;
    let mut out = Vec::new();
    let mut i = 0;
    while i + 1 < xs.len() {
        if (refv[i + 1] - refv[i]).abs() <= JUMP_FRACTION * range {
            i += 1;
            continue;
        }
        let position = 0.5 * (xs[i] + xs[i + 1]);
        let (wa, wb) = (position - half, position + half);
        let idx: Vec<usize> = (0..xs.len()).filter(|&k| xs[k] >= wa && xs[k] <= wb).collect();
        let left_value = reference.values(&[name], wa)?[0];
        let right_value = reference.values(&[name], wb)?[0];
        let ref_max = idx.iter().map(|&k| refv[k]).fold(f64::NEG_INFINITY, f64::max);
        let ref_min = idx.iter().map(|&k| refv[k]).fold(f64::INFINITY, f64::min);
        let overshoot = idx.iter().map(|&k| col[k] - ref_max).fold(0.0, f64::max);
        let undershoot = idx.iter().map(|&k| ref_min - col[k]).fold(0.0, f64::max);
        let width = transition_width(&idx, xs, col, left_value, right_value);
        out.push(JumpMetrics {
            variable: name.to_string(),
            position,
            left_value,
            right_value,
            overshoot,
            undershoot,
            width,
            width_cells: width.map(|w| w / h),
        });
        // skip past this jump's window
        while i + 1 < xs.len() && xs[i] <= position + half {
            i += 1;
        }
    }
    Ok(out)
}

/// Distance between the first crossings of the 10% and 90% levels of the
/// normalized transition from `ul` to `ur`, scanning left to right.
fn transition_width(idx: &[usize], xs: &[f64], col: &[f64], ul: f64, ur: f64) -> Option<f64> {
    let jump = ur - ul;
    let s = |k: usize| (col[k] - ul) / jump;
    let crossing = |level: f64| -> Option<f64> {
        let mut prev: Option<usize> = None;
        for &k in idx {
            if s(k) >= level {
                return Some(match prev {
                    Some(p) if s(k) > s(p) => xs[p] + (level - s(p)) / (s(k) - s(p)) * (xs[k] - xs[p]),
                    _ => xs[k],
                });
            }
            prev = Some(k);
        }
        None
    };
    Some((crossing(0.9)? - crossing(0.1)?).max(0.0))
}

fn viscosity_name(meta: &RunMeta) -> String {
    meta.config
        .viscosity
        .kind
        .map(|k| {
            serde_json::to_value(k)
                .ok()
                .and_then(|v| v.as_str().map(String::from))
                .unwrap_or_default()
        })
        .unwrap_or_else(|| "none".into())
}

/// Evaluate one run directory against `reference`.
pub fn report_run(dir: &Path, reference: &Reference, window: Option<(f64, f64)>) -> Result<RunReport> {
    let meta = read_meta(dir)?;
    let (_, snap) = final_snapshot(dir)?;
    let domain = meta.config.domain();
    let h = (domain[1] - domain[0]) / meta.config.elements() as f64;
    let errors = error_against(&snap, reference, domain, window)?;
    let mut jumps = Vec::new();
    for name in meta.config.scenario.law().variable_names() {
        jumps.extend(jump_metrics(&snap, reference, name, h)?);
    }
    let max_overshoot = jumps.iter().map(|j| j.overshoot).fold(0.0, f64::max);
    let max_undershoot = jumps.iter().map(|j| j.undershoot).fold(0.0, f64::max);
    Ok(RunReport {
        directory: dir.display().to_string(),
        run_id: meta.run_id.clone(),
        viscosity: viscosity_name(&meta),
        time: snap.time,
        errors,
        jumps,
        max_overshoot,
        max_undershoot,
    })
}

/// Compare two runs of the same scenario, with error norms optionally
/// restricted to `window`.
pub fn compare(
    dir_a: &Path,
    dir_b: &Path,
    reference: &ReferenceSpec,
    window: Option<(f64, f64)>,
) -> Result<CompareReport> {
    let meta_a = read_meta(dir_a)?;
    let meta_b = read_meta(dir_b)?;
    let scenario = meta_a.config.scenario;
    if meta_b.config.scenario != scenario {
        return Err(DgError::InvalidInput(format!(
            "scenario mismatch: {} vs {}",
            scenario.name(),
            meta_b.config.scenario.name()
        )));
    }
    let (_, snap_a) = final_snapshot(dir_a)?;
    let (_, snap_b) = final_snapshot(dir_b)?;
    let (reference, label) = match reference {
        ReferenceSpec::Exact => (Reference::exact(&meta_a, snap_a.time)?, "exact".to_string()),
        ReferenceSpec::Dir(d) => {
            let meta_r = read_meta(d)?;
            if meta_r.config.scenario != scenario {
                return Err(DgError::InvalidInput(format!(
                    "scenario mismatch: reference is {}",
                    meta_r.config.scenario.name()
                )));
            }
            (Reference::Snapshot(final_snapshot(d)?.1), d.display().to_string())
        }
    };
    let a = report_run(dir_a, &reference, window)?;
    let b = report_run(dir_b, &reference, window)?;
    let difference = error_against(&snap_a, &Reference::Snapshot(snap_b), meta_a.config.domain(), window)?;
    Ok(CompareReport {
        scenario: scenario.name().to_string(),
        reference: label,
        a,
        b,
        difference,
    })
}
