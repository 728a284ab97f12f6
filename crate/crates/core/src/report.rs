//! CSV and JSON emission, surface reloading, and run manifests.
//!
//! Grid coordinates are written in shortest round-trip form so they reload
//! exactly; utilities and other measured values carry 9 significant digits.

use std::io::{Read, Write};

use serde::Serialize;
use sha2::{Digest, Sha256};

use crate::coding::TrialResult;
use crate::error::{Error, Result};
use crate::mac::{CurvePoint, Surface, SurfaceCell, NO_INFO_LABEL};
use crate::splitting::RegionGrid;

pub const SIGNIFICANT_DIGITS: usize = 9;

/// `x` rounded to 9 significant digits, printed in shortest form.
pub fn sig9(x: f64) -> String {
    let rounded: f64 = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .expect("formatted float parses");
    if rounded == 0.0 {
        "0".to_string()
    } else {
        format!("{rounded}")
    }
}

/// Shortest string that parses back to exactly `x`.
pub fn exact(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(sig9).unwrap_or_default()
}

pub fn write_region_csv<W: Write>(grid: &RegionGrid, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["p1", "p2", "label"])?;
    for (p1, p2, label) in grid.cells() {
        w.write_record([exact(p1), exact(p2), label.as_str().to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_curve_csv<W: Write>(curve: &[CurvePoint], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "p",
        "action_index",
        "action",
        "receiver_value",
        "sender_value",
    ])?;
    for c in curve {
        w.write_record([
            exact(c.p),
            c.action.to_string(),
            c.label.clone(),
            sig9(c.receiver_value),
            sig9(c.sender_value),
        ])?;
    }
    w.flush()?;
    Ok(())
}

fn surface_record(c: &SurfaceCell) -> [String; 6] {
    [
        exact(c.p1),
        exact(c.p2),
        opt(c.phi1),
        opt(c.phi2),
        c.label.clone(),
        c.feasible.to_string(),
    ]
}

pub const SURFACE_HEADER: [&str; 6] = ["p1", "p2", "phi1", "phi2", "label", "feasible"];

/// Grid cells row-major in `p₁`, then one `NO_INFO` row at `(p, p)`.
pub fn write_surface_csv<W: Write>(surface: &Surface, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(SURFACE_HEADER)?;
    for c in &surface.cells {
        w.write_record(surface_record(c))?;
    }
    w.write_record(surface_record(&surface.no_information))?;
    w.flush()?;
    Ok(())
}

/// Reload a surface CSV into its grid cells and its `NO_INFO` row.
pub fn read_surface_csv<R: Read>(input: R) -> Result<(Vec<SurfaceCell>, SurfaceCell)> {
    let mut r = csv::Reader::from_reader(input);
    let header: Vec<String> = r.headers()?.iter().map(str::to_string).collect();
    if header != SURFACE_HEADER {
        return Err(Error::Parse(format!(
            "unexpected surface header {header:?}"
        )));
    }
    let num = |s: &str, line: usize| -> Result<f64> {
        s.parse()
            .map_err(|_| Error::Parse(format!("line {line}: {s:?} is not a number")))
    };
    let mut cells = Vec::new();
    let mut no_info = None;
    for (i, rec) in r.records().enumerate() {
        let rec = rec?;
        let line = i + 2;
        let value = |k: usize| -> Result<Option<f64>> {
            let s = &rec[k];
            if s.is_empty() {
                Ok(None)
            } else {
                num(s, line).map(Some)
            }
        };
        let cell = SurfaceCell {
            p1: num(&rec[0], line)?,
            p2: num(&rec[1], line)?,
            phi1: value(2)?,
            phi2: value(3)?,
            label: rec[4].to_string(),
            feasible: rec[5]
                .parse()
                .map_err(|_| Error::Parse(format!("line {line}: bad feasible flag")))?,
        };
        if cell.label == NO_INFO_LABEL {
            no_info = Some(cell);
        } else {
            cells.push(cell);
        }
    }
    let no_info = no_info.ok_or_else(|| Error::Parse("surface has no NO_INFO row".into()))?;
    Ok((cells, no_info))
}

pub fn write_trials_csv<W: Write>(trials: &[TrialResult], out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record([
        "trial",
        "error_event",
        "no_cover",
        "decode_fail",
        "chosen_m",
        "decoded_m",
        "l1_to_target",
        "util1_n",
        "util2_n",
    ])?;
    let idx = |m: Option<usize>| m.map(|m| m.to_string()).unwrap_or_default();
    for t in trials {
        w.write_record([
            t.trial.to_string(),
            t.error_event.to_string(),
            t.no_cover.to_string(),
            t.decode_fail.to_string(),
            idx(t.chosen_m),
            idx(t.decoded_m),
            sig9(t.l1_to_target),
            sig9(t.util1_n),
            sig9(t.util2_n),
        ])?;
    }
    w.flush()?;
    Ok(())
}

/// Pretty JSON with a trailing newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String> {
    let mut s = serde_json::to_string_pretty(value)?;
    s.push('\n');
    Ok(s)
}

pub fn sha256_hex(bytes: &[u8]) -> String {
    hex::encode(Sha256::digest(bytes))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FileDigest {
    pub path: String,
    pub sha256: String,
}

/// Provenance of one CLI invocation.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunManifest {
    pub tool: String,
    pub version: String,
    pub subcommand: String,
    pub parameters: serde_json::Value,
    pub inputs: Vec<FileDigest>,
    pub outputs: Vec<FileDigest>,
    pub seed: Option<u64>,
    pub duration_ms: f64,
}

impl RunManifest {
    pub fn new(subcommand: &str, parameters: serde_json::Value) -> Self {
        RunManifest {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            subcommand: subcommand.to_string(),
            parameters,
            inputs: Vec::new(),
            outputs: Vec::new(),
            seed: None,
            duration_ms: 0.0,
        }
    }

    pub fn input(&mut self, path: &str, bytes: &[u8]) {
        self.inputs.push(FileDigest {
            path: path.to_string(),
            sha256: sha256_hex(bytes),
        });
    }

    pub fn output(&mut self, path: &str, bytes: &[u8]) {
        self.outputs.push(FileDigest {
            path: path.to_string(),
            sha256: sha256_hex(bytes),
        });
    }
}
