//! Cartesian parameter sweeps over a base scenario.
//!
//! ```toml
//! schema_version = 1
//! base = "cubic.toml"        # or an inline [base] table
//! workers = 4
//!
//! [[axes]]
//! key = "params.varpi"
//! values = [0.0, 1.0, 2.0]
//! ```

use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::config::{validate_scenario, ScenarioFile, SCHEMA_VERSION};
use super::output::csv_field;
use super::run::{run_scenario, RunStatus, RunSummary};
use crate::error::{Error, Result};

#[derive(Clone, Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepFile {
    pub schema_version: u32,
    pub base: BaseSpec,
    pub workers: Option<usize>,
    pub axes: Vec<Axis>,
}

#[derive(Clone, Debug, Deserialize)]
#[serde(untagged)]
pub enum BaseSpec {
    Path(String),
    Inline(toml::Table),
}

#[derive(Clone, Debug, Deserialize, Serialize)]
#[serde(deny_unknown_fields)]
pub struct Axis {
    /// Dotted key into the base scenario, e.g. `law.damping.p`.
    pub key: String,
    pub values: Vec<toml::Value>,
}

/// One cell of the sweep grid and what happened to it.
#[derive(Clone, Debug, Serialize)]
pub struct CellResult {
    pub index: usize,
    pub values: Vec<String>,
    pub status: String,
    pub summary: Option<RunSummary>,
    pub message: String,
}

fn set_dotted(root: &mut toml::Value, key: &str, value: toml::Value) -> Result<()> {
    let parts: Vec<&str> = key.split('.').collect();
    let mut cur = root;
    for (i, part) in parts.iter().enumerate() {
        let table = cur
            .as_table_mut()
            .ok_or_else(|| Error::Config(format!("sweep axis `{key}`: `{}` is not a table", parts[..i].join("."))))?;
        if i + 1 == parts.len() {
            table.insert(part.to_string(), value);
            return Ok(());
        }
        cur = table
            .entry(part.to_string())
            .or_insert_with(|| toml::Value::Table(toml::Table::new()));
    }
    Err(Error::Config("empty sweep axis key".into()))
}

fn render_value(v: &toml::Value) -> String {
    match v {
        toml::Value::String(s) => s.clone(),
        toml::Value::Float(f) => format!("{f:?}"),
        other => other.to_string(),
    }
}

/// Cartesian product in row-major order (last axis fastest).
fn grid_indices(sizes: &[usize]) -> Vec<Vec<usize>> {
    let mut out = vec![Vec::new()];
    for &n in sizes {
        out = out
            .into_iter()
            .flat_map(|prefix| {
                (0..n).map(move |i| {
                    let mut p = prefix.clone();
                    p.push(i);
                    p
                })
            })
            .collect();
    }
    out
}

pub fn load_sweep(path: &Path) -> Result<(SweepFile, toml::Value)> {
    let text = std::fs::read_to_string(path)?;
    let sweep: SweepFile =
        toml::from_str(&text).map_err(|e| Error::Config(format!("{}: parse error: {e}", path.display())))?;
    if sweep.schema_version != SCHEMA_VERSION {
        return Err(Error::Config(format!(
            "sweep schema_version {} is not supported (expected {SCHEMA_VERSION})",
            sweep.schema_version
        )));
    }
    if sweep.axes.is_empty() || sweep.axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config("a sweep needs at least one axis and every axis needs values".into()));
    }
    let base = match &sweep.base {
        BaseSpec::Inline(t) => toml::Value::Table(t.clone()),
        BaseSpec::Path(p) => {
            let base_path: PathBuf = path.parent().unwrap_or(Path::new(".")).join(p);
            let text = std::fs::read_to_string(&base_path)?;
            toml::from_str::<toml::Table>(&text)
                .map(toml::Value::Table)
                .map_err(|e| Error::Config(format!("{}: parse error: {e}", base_path.display())))?
        }
    };
    Ok((sweep, base))
}

fn run_cell(index: usize, base: &toml::Value, axes: &[Axis], pick: &[usize], out: &Path) -> CellResult {
    let values: Vec<String> = axes.iter().zip(pick).map(|(a, &i)| render_value(&a.values[i])).collect();
    let mut cell = CellResult {
        index,
        values,
        status: String::new(),
        summary: None,
        message: String::new(),
    };
    let mut doc = base.clone();
    for (axis, &i) in axes.iter().zip(pick) {
        if let Err(e) = set_dotted(&mut doc, &axis.key, axis.values[i].clone()) {
            cell.status = "error".into();
            cell.message = e.to_string();
            return cell;
        }
    }
    let file = match ScenarioFile::from_value(doc) {
        Ok(f) => f,
        Err(e) => {
            cell.status = "error".into();
            cell.message = e.to_string();
            return cell;
        }
    };
    let report = validate_scenario(&file);
    if report.hard_failure() {
        cell.status = "rejected".into();
        let mut reasons: Vec<String> = report
            .params
            .checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| c.name.clone())
            .collect();
        if let Some(h) = &report.hypotheses {
            reasons.extend(h.checks.iter().filter(|c| c.hard && !c.passed).map(|c| c.id.clone()));
        }
        reasons.extend(report.errors.iter().cloned());
        cell.message = reasons.join("; ");
        return cell;
    }
    match run_scenario(&file, Some(&out.join(format!("cell_{index:04}")))) {
        Ok(s) => {
            cell.status = match s.status {
                RunStatus::Ok => "ok",
                RunStatus::StepFailure => "step_failure",
                RunStatus::AnalysisFailure => "analysis_failure",
            }
            .into();
            if let Some(f) = &s.failure {
                cell.message = f.reason.clone();
            }
            cell.summary = Some(s);
        }
        Err(e) => {
            cell.status = "error".into();
            cell.message = e.to_string();
        }
    }
    cell
}

const SWEEP_COLUMNS: &[&str] = &[
    "cell",
    "status",
    "admissible",
    "decay_kind",
    "E_final",
    "E0_final",
    "V_final",
    "omega_final",
    "max_residual_E",
    "max_residual_V",
    "fit_kind",
    "fit_rate",
    "fit_quality",
    "envelope_feasible",
    "spectral_abscissa",
    "message",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:?}")).unwrap_or_default()
}

fn sweep_csv(axes: &[Axis], cells: &[CellResult]) -> String {
    let mut out = String::new();
    let header: Vec<String> = axes
        .iter()
        .map(|a| csv_field(&a.key))
        .chain(SWEEP_COLUMNS.iter().map(|s| s.to_string()))
        .collect();
    out.push_str(&header.join(","));
    out.push('\n');
    for c in cells {
        let s = c.summary.as_ref();
        let last = s.and_then(|s| s.last);
        let fit = s.and_then(|s| s.fits.first());
        let admissible = match c.status.as_str() {
            "rejected" | "error" => "false",
            _ => "true",
        };
        let decay_kind = s
            .and_then(|s| s.validation.predicted_decay)
            .map(|k| k.as_str().to_string())
            .unwrap_or_default();
        let mut row: Vec<String> = c.values.iter().map(|v| csv_field(v)).collect();
        row.extend([
            c.index.to_string(),
            c.status.clone(),
            admissible.to_string(),
            decay_kind,
            opt(last.map(|l| l.e)),
            opt(last.map(|l| l.e0)),
            opt(last.map(|l| l.v)),
            opt(last.map(|l| l.omega)),
            opt(s.and_then(|s| s.max_residual_energy)),
            opt(s.and_then(|s| s.max_residual_lyapunov)),
            fit.map(|f| f.series.clone()).unwrap_or_default(),
            opt(fit.and_then(|f| f.fit.as_ref()).map(|f| f.rate)),
            opt(fit.and_then(|f| f.fit.as_ref()).map(|f| f.quality)),
            s.and_then(|s| s.envelope.as_ref())
                .map(|e| e.feasible.to_string())
                .unwrap_or_default(),
            opt(s.and_then(|s| s.spectral.as_ref()).map(|x| x.max_real_part)),
            csv_field(&c.message.replace('\n', " ")),
        ]);
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

/// Runs every cell (concurrently, up to `workers` threads) and writes
/// per-cell outputs plus sweep.csv in grid order. Cell failures are recorded
/// in their row; the sweep itself only fails on configuration or I/O errors.
pub fn sweep(path: &Path, out: &Path, workers: Option<usize>) -> Result<Vec<CellResult>> {
    let (file, base) = load_sweep(path)?;
    let workers = workers.or(file.workers).unwrap_or(1).max(1);
    std::fs::create_dir_all(out)?;
    let sizes: Vec<usize> = file.axes.iter().map(|a| a.values.len()).collect();
    let picks = grid_indices(&sizes);
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    let cells: Vec<CellResult> = pool.install(|| {
        picks
            .par_iter()
            .enumerate()
            .map(|(i, pick)| run_cell(i, &base, &file.axes, pick, out))
            .collect()
    });
    std::fs::write(out.join("sweep.csv"), sweep_csv(&file.axes, &cells))?;
    Ok(cells)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dotted_keys_create_tables() {
        let mut v = toml::Value::Table(toml::Table::new());
        set_dotted(&mut v, "law.damping.p", toml::Value::Float(2.0)).unwrap();
        assert_eq!(v["law"]["damping"]["p"].as_float(), Some(2.0));
        let mut scalar = toml::Value::Table(toml::Table::new());
        set_dotted(&mut scalar, "a", toml::Value::Integer(1)).unwrap();
        assert!(set_dotted(&mut scalar, "a.b", toml::Value::Integer(1)).is_err());
    }

    #[test]
    fn grid_order_is_row_major() {
        assert_eq!(
            grid_indices(&[2, 3]),
            vec![vec![0, 0], vec![0, 1], vec![0, 2], vec![1, 0], vec![1, 1], vec![1, 2]]
        );
    }
}
