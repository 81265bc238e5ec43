//! Per-step table: comma-separated text preceded by `#` comment lines.
//!
//! Fixed column order: run-level columns first, then one block per agent.
//! Rotations are flattened row-major (`r00 r01 r02 r10 ... r22`). Booleans
//! are written as 0/1 and absent values as empty cells.

use std::io::Write;
use std::path::Path;

use geoswarm::sim::StepRecord;

use crate::error::{CliError, Result};

const RUN_COLUMNS: &[(&str, &str)] = &[
    ("step", "step index"),
    ("t", "time"),
    ("rd_00..rd_22", "desired attitude R_d, row-major"),
    ("pc_x pc_y pc_z", "swarm centroid"),
    (
        "lambda_min",
        "smallest eigenvalue of the deployment covariance P",
    ),
    ("radius", "D = max_i |x_i|"),
    ("sigma_c", "field value at the centroid"),
    ("source_distance", "|p_c - p_sigma|"),
    ("max_pair_displacement", "max_ij |p_ij(t) - p_ij(0)|"),
    ("max_offset_change", "eps(t) = max_i |x_i(t) - x_i(0)|"),
    ("known_rate_norm", "norm of the known desired body rate"),
    ("unknown_rate_norm", "norm of the unknown desired body rate"),
    (
        "unknown_rate_exceeds_bound",
        "1 if the unknown rate broke omega_max",
    ),
    (
        "heading_held",
        "1 if the heading estimate vanished and was held",
    ),
    ("min_trace_margin", "min_i tr(R_e,i) + 1"),
];

const AGENT_COLUMNS: &[(&str, &str)] = &[
    ("p{i}_x p{i}_y p{i}_z", "position of agent i"),
    ("r{i}_00..r{i}_22", "attitude of agent i, row-major"),
    ("mu{i}", "attitude error angle"),
    ("delta{i}", "heading alignment error"),
];

fn rotation_names(prefix: &str) -> impl Iterator<Item = String> + '_ {
    (0..3).flat_map(move |r| (0..3).map(move |c| format!("{prefix}_{r}{c}")))
}

/// Column names for an `n`-agent run.
pub fn header(n: usize) -> Vec<String> {
    let mut h: Vec<String> = vec!["step".into(), "t".into()];
    h.extend(rotation_names("rd"));
    h.extend(["pc_x", "pc_y", "pc_z"].map(String::from));
    h.extend(
        [
            "lambda_min",
            "radius",
            "sigma_c",
            "source_distance",
            "max_pair_displacement",
            "max_offset_change",
            "known_rate_norm",
            "unknown_rate_norm",
            "unknown_rate_exceeds_bound",
            "heading_held",
            "min_trace_margin",
        ]
        .map(String::from),
    );
    for i in 0..n {
        h.extend(["x", "y", "z"].map(|c| format!("p{i}_{c}")));
        h.extend(rotation_names(&format!("r{i}")));
        h.push(format!("mu{i}"));
        h.push(format!("delta{i}"));
    }
    h
}

fn num(x: f64) -> String {
    format!("{x}")
}

fn opt(x: Option<f64>) -> String {
    x.map(num).unwrap_or_default()
}

fn flag(b: bool) -> String {
    if b { "1" } else { "0" }.to_string()
}

pub fn row(rec: &StepRecord) -> Vec<String> {
    let mut r = vec![rec.step.to_string(), num(rec.t)];
    r.extend(rec.desired.to_row_major().map(num));
    r.extend(rec.centroid.iter().map(|v| num(*v)));
    r.extend([
        num(rec.lambda_min),
        num(rec.radius),
        opt(rec.field_at_centroid),
        opt(rec.source_distance),
        num(rec.max_pair_displacement),
        num(rec.max_offset_change),
        num(rec.known_rate_norm),
        num(rec.unknown_rate_norm),
        flag(rec.unknown_rate_exceeds_bound),
        flag(rec.heading_held),
        num(rec.min_trace_margin),
    ]);
    for a in &rec.agents {
        r.extend(a.position.iter().map(|v| num(*v)));
        r.extend(a.attitude.to_row_major().map(num));
        r.push(num(a.mu));
        r.push(num(a.delta));
    }
    r
}

/// Streams step records to a table.
pub struct StepTableWriter<W: Write> {
    inner: csv::Writer<W>,
}

impl<W: Write> StepTableWriter<W> {
    /// Writes `preamble` as comment lines, the column documentation and the header row.
    pub fn new(mut out: W, preamble: &[String], agents: usize) -> Result<Self> {
        let io = |e| CliError::Csv(csv::Error::from(e));
        for line in preamble {
            writeln!(out, "# {line}").map_err(io)?;
        }
        writeln!(out, "# columns:").map_err(io)?;
        for (name, doc) in RUN_COLUMNS.iter().chain(AGENT_COLUMNS) {
            writeln!(out, "#   {name}: {doc}").map_err(io)?;
        }
        let mut inner = csv::Writer::from_writer(out);
        inner.write_record(header(agents))?;
        Ok(StepTableWriter { inner })
    }

    pub fn write(&mut self, rec: &StepRecord) -> Result<()> {
        self.inner.write_record(row(rec))?;
        Ok(())
    }

    /// Flushes the table, appending `trailer` as a final comment line.
    pub fn finish(self, trailer: Option<&str>) -> Result<W> {
        let mut out = self
            .inner
            .into_inner()
            .map_err(|e| CliError::Csv(csv::Error::from(e.into_error())))?;
        if let Some(line) = trailer {
            writeln!(out, "# {line}").map_err(|e| CliError::Csv(e.into()))?;
        }
        out.flush().map_err(|e| CliError::Csv(e.into()))?;
        Ok(out)
    }
}

/// A step table read back into memory.
#[derive(Clone, Debug)]
pub struct StepTable {
    pub header: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl StepTable {
    pub fn read(path: &Path) -> Result<Self> {
        let mut rdr = csv::ReaderBuilder::new()
            .comment(Some(b'#'))
            .from_path(path)?;
        let header = rdr.headers()?.iter().map(String::from).collect();
        let rows = rdr
            .records()
            .map(|r| r.map(|r| r.iter().map(String::from).collect()))
            .collect::<std::result::Result<_, _>>()?;
        Ok(StepTable { header, rows })
    }

    /// Numeric column by name; empty cells become NaN.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[idx].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }
}
