//! CSV writers. Numbers use a fixed `{:.14e}` format (15 significant
//! digits) so identical runs give byte-identical files.

use std::path::{Path, PathBuf};

use vrabi::experiments::{Observable, SweepAxis, SweepResult};
use vrabi::hamiltonian::SpectrumLines;

use crate::CliError;

pub fn num(x: f64) -> String {
    format!("{x:.14e}")
}

fn axis_name(axis: SweepAxis) -> &'static str {
    match axis {
        SweepAxis::DeltaSmall => "delta_small",
        SweepAxis::DeltaCap => "delta_cap",
        SweepAxis::Kappa => "kappa",
        SweepAxis::Time => "time",
    }
}

fn observable_name(o: &Observable) -> String {
    match o {
        Observable::TwoPhotonProbability => "two_photon_probability".into(),
        Observable::Population { state } => format!("population {state}"),
    }
}

fn writer(path: &Path) -> Result<csv::Writer<std::fs::File>, CliError> {
    csv::Writer::from_path(path).map_err(|e| CliError::Config(format!("cannot write {}: {e}", path.display())))
}

fn io(e: impl std::fmt::Display) -> CliError {
    CliError::Config(format!("write failed: {e}"))
}

/// Per-window peaks attached to damping sweeps.
pub struct WindowColumns<'a> {
    pub split: f64,
    pub first: &'a [f64],
    pub late: &'a [f64],
    pub ratio: &'a [f64],
}

/// One series file per row plus `<name>_summary.csv`; returns the paths written.
pub fn write_sweep(dir: &Path, name: &str, result: &SweepResult, windows: Option<WindowColumns>) -> Result<Vec<PathBuf>, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let axis = axis_name(result.spec.axis);
    let mut written = Vec::new();
    let mut series_files = Vec::new();
    if result.spec.axis != SweepAxis::Time {
        for (k, row) in result.rows.iter().enumerate() {
            let file = if result.rows.len() == 1 { format!("{name}.csv") } else { format!("{name}_row{k:03}.csv") };
            let path = dir.join(&file);
            let mut w = writer(&path)?;
            w.write_record(["g1_t", "value", axis]).map_err(io)?;
            for (t, v) in row.series.times.iter().zip(&row.series.values) {
                w.write_record([num(*t), num(*v), num(row.axis_value)]).map_err(io)?;
            }
            w.flush().map_err(io)?;
            written.push(path);
            series_files.push(file);
        }
    }

    let path = dir.join(format!("{name}_summary.csv"));
    let mut w = writer(&path)?;
    let mut header = vec![
        "kind",
        "axis",
        "axis_value",
        "observable",
        "peak_value",
        "peak_time",
        "horizon",
        "output_step",
        "substep",
        "engine",
        "series_file",
    ];
    if windows.is_some() {
        header.extend(["window_split", "first_window_peak", "late_window_peak", "late_to_first_ratio"]);
    }
    w.write_record(&header).map_err(io)?;
    let spec = &result.spec;
    for (k, row) in result.rows.iter().enumerate() {
        let mut rec = vec![
            spec.kind.to_string(),
            axis.to_string(),
            num(row.axis_value),
            observable_name(&spec.observable),
            num(row.peak_value),
            num(row.peak_time),
            num(spec.horizon),
            num(result.provenance.output_step),
            num(row.settings.substep),
            result.provenance.engine.clone(),
            series_files.get(k).cloned().unwrap_or_default(),
        ];
        if let Some(wc) = &windows {
            rec.extend([num(wc.split), num(wc.first[k]), num(wc.late[k]), num(wc.ratio[k])]);
        }
        w.write_record(&rec).map_err(io)?;
    }
    w.flush().map_err(io)?;
    written.push(path);
    Ok(written)
}

pub fn write_spectrum(dir: &Path, name: &str, s: &SpectrumLines) -> Result<PathBuf, CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Config(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(format!("{name}.csv"));
    let mut w = writer(&path)?;
    w.write_record(["quantity", "index", "value"]).map_err(io)?;
    for (k, e) in s.eigenvalues.iter().enumerate() {
        w.write_record(["eigenvalue".to_string(), k.to_string(), num(*e)]).map_err(io)?;
    }
    for (k, l) in s.lines.iter().enumerate() {
        w.write_record(["line".to_string(), k.to_string(), num(*l)]).map_err(io)?;
    }
    w.flush().map_err(io)?;
    Ok(path)
}
