//! CSV and JSON writers for trajectories, sweeps and spectra.
//!
//! CSV has a mandatory header and one record per row. Numbers are written
//! in scientific notation with the configured number of significant digits
//! (17 by default, enough to round-trip any double). JSON documents carry
//! the full configuration echo next to the result.

use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::config::{EchoEntry, Format};
use crate::error::{Error, Result};
use crate::experiments::{CellOutcome, SpectrumResult, SweepResult};
use crate::trajectory::Trajectory;

/// Anything the command-line tool can produce.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", content = "data")]
pub enum RunResult {
    Trajectory(Trajectory),
    Sweep(SweepResult),
    Spectrum(SpectrumResult),
}

/// JSON document: result plus the configuration that produced it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Document {
    pub config: Vec<EchoEntry>,
    pub result: RunResult,
}

/// `precision` significant digits in scientific notation.
pub fn format_number(v: f64, precision: usize) -> String {
    format!("{:.*e}", precision.saturating_sub(1), v)
}

fn optional(v: Option<f64>, precision: usize) -> String {
    v.map_or(String::new(), |x| format_number(x, precision))
}

pub fn write_trajectory_csv<W: Write>(w: W, t: &Trajectory, precision: usize) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let mut header = vec!["t".to_string()];
    header.extend(t.observables.iter().map(|o| o.name().to_string()));
    csv.write_record(&header)?;
    for s in &t.samples {
        let mut row = vec![format_number(s.t, precision)];
        row.extend(s.values.iter().map(|&v| format_number(v, precision)));
        csv.write_record(&row)?;
    }
    csv.flush()?;
    Ok(())
}

/// Long format: one row per cell and observable, cells in axis order.
pub fn write_sweep_csv<W: Write>(w: W, r: &SweepResult, precision: usize) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    let with_overlay = !r.overlays.is_empty();
    let mut header: Vec<String> = r.axes.iter().map(|a| a.name.clone()).collect();
    header.extend(["observable", "final_value", "time_average", "status"].map(String::from));
    if with_overlay {
        header.extend(["lambda_c_rot", "lambda_c_dyn"].map(String::from));
    }
    csv.write_record(&header)?;
    let dphi_axis = r.axes.iter().position(|a| a.name == "delta_phi");
    for cell in &r.cells {
        for (k, obs) in r.provenance.observables.iter().enumerate() {
            let mut row: Vec<String> = cell.coordinates.iter().map(|&c| format_number(c, precision)).collect();
            row.push(obs.name().to_string());
            match &cell.outcome {
                CellOutcome::Ok { .. } => {
                    row.push(optional(cell.final_value(k), precision));
                    row.push(optional(cell.time_average(k), precision));
                    row.push("ok".into());
                }
                CellOutcome::Failed { error } => {
                    row.push(String::new());
                    row.push(String::new());
                    row.push(format!("failed: {error}"));
                }
            }
            if with_overlay {
                let d = dphi_axis.map(|i| cell.coordinates[i]);
                let overlay = r.overlays.iter().find(|o| Some(o.delta_phi) == d);
                row.push(optional(overlay.map(|o| o.rotated_critical_coupling), precision));
                row.push(optional(overlay.map(|o| o.dynamical_fit), precision));
            }
            csv.write_record(&row)?;
        }
    }
    csv.flush()?;
    Ok(())
}

pub fn write_spectrum_csv<W: Write>(w: W, s: &SpectrumResult, precision: usize) -> Result<()> {
    let mut csv = csv::Writer::from_writer(w);
    csv.write_record([
        "lambda",
        "excitation_np",
        "excitation_srp",
        "critical_velocity",
        "lambda_c",
        "lambda_c_rot",
    ])?;
    for p in &s.points {
        csv.write_record([
            format_number(p.lambda, precision),
            optional(p.excitation_np, precision),
            optional(p.excitation_srp, precision),
            format_number(p.critical_velocity, precision),
            format_number(s.critical_coupling, precision),
            format_number(s.rotated_critical_coupling, precision),
        ])?;
    }
    csv.flush()?;
    Ok(())
}

/// Writes `doc` in `format` to `w`.
pub fn write_document<W: Write>(mut w: W, doc: &Document, format: Format, precision: usize) -> Result<()> {
    match format {
        Format::Json => {
            serde_json::to_writer_pretty(&mut w, doc)?;
            w.write_all(b"\n")?;
            Ok(())
        }
        Format::Csv => match &doc.result {
            RunResult::Trajectory(t) => write_trajectory_csv(w, t, precision),
            RunResult::Sweep(r) => write_sweep_csv(w, r, precision),
            RunResult::Spectrum(s) => write_spectrum_csv(w, s, precision),
        },
    }
}

/// Writes to `path`, or to standard output when `path` is `None`.
pub fn emit(doc: &Document, format: Format, precision: usize, path: Option<&Path>) -> Result<()> {
    match path {
        Some(p) => {
            let file = File::create(p).map_err(|e| {
                Error::Io(io::Error::new(e.kind(), format!("cannot write {}: {e}", p.display())))
            })?;
            let mut w = BufWriter::new(file);
            write_document(&mut w, doc, format, precision)?;
            w.flush()?;
            Ok(())
        }
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            write_document(&mut lock, doc, format, precision)?;
            lock.flush()?;
            Ok(())
        }
    }
}

/// Reads a JSON document back.
pub fn read_document(text: &str) -> Result<Document> {
    Ok(serde_json::from_str(text)?)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{sweep_lambda, InitialState, ProtocolSpec};
    use crate::model::ModelParams;
    use crate::trajectory::{Engine, Observable, Sample};

    #[test]
    fn number_format_round_trips() {
        for &v in &[0.1, 1.0 / 3.0, -2.5e-300, 6.02214076e23, 0.0] {
            let s = format_number(v, 17);
            assert_eq!(s.parse::<f64>().unwrap(), v);
        }
        assert_eq!(format_number(1.0 / 3.0, 4), "3.333e-1");
    }

    #[test]
    fn constant_trajectory_csv() {
        let p = ModelParams::new(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let t = Trajectory {
            params: p,
            engine: Engine::MeanField,
            driven: true,
            observables: vec![Observable::MeanPhotonScaled, Observable::Parity],
            samples: (0..3)
                .map(|i| Sample {
                    t: i as f64,
                    point: None,
                    values: vec![0.25, 1.0],
                })
                .collect(),
        };
        let mut buf = Vec::new();
        write_trajectory_csv(&mut buf, &t, 17).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "t,mean_photon_scaled,parity");
        let rows: Vec<_> = lines.collect();
        assert_eq!(rows.len(), 3);
        for row in rows {
            assert!(row.ends_with(",2.5000000000000000e-1,1.0000000000000000e0"), "{row}");
        }
    }

    #[test]
    fn failed_cells_are_tagged_in_csv() {
        let p = ModelParams::new(1.0, 1.0, 0.0, 6.0, 1.0).unwrap().with_n_max(30);
        let spec = ProtocolSpec::new(Engine::Quantum, InitialState::StationaryDicke, p);
        let r = sweep_lambda(&spec, &[0.3, 3.0]).unwrap();
        let mut buf = Vec::new();
        write_sweep_csv(&mut buf, &r, 17).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let rows: Vec<_> = text.lines().collect();
        assert_eq!(rows[0], "lambda,observable,final_value,time_average,status");
        assert!(rows[1].ends_with(",ok"));
        assert!(rows[2].contains(",,,failed: truncation"), "{}", rows[2]);
    }

    #[test]
    fn unwritable_path_is_io_error() {
        let p = ModelParams::new(1.0, 1.0, 0.5, 1.0, 1.0).unwrap();
        let doc = Document {
            config: Vec::new(),
            result: RunResult::Spectrum(crate::experiments::spectrum_curves(p.omega, p.omega0, 1.0, &[0.1]).unwrap()),
        };
        let err = emit(&doc, Format::Csv, 17, Some(Path::new("/nonexistent-dir/x.csv"))).unwrap_err();
        assert_eq!(err.exit_code(), 3);
    }
}
