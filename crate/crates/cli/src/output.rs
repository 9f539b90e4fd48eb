//! File formats for trajectories, error tables, and benchmark output.
//!
//! Every file begins with one `# key=value ...` metadata line. Floats are
//! written with 17 significant digits so parsing them back recovers the
//! exact binary value.

use std::io::Write;
use std::path::Path;

use pdmp_core::fmt::float17;
use pdmp_core::{ErrorTable, RecordKind, Trajectory};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum OutputError {
    #[error("Io: {0}")]
    Io(#[from] std::io::Error),
    #[error("Serialize: {0}")]
    Serialize(#[from] serde_json::Error),
    #[error("Parse: line {line}: {msg}")]
    Parse { line: usize, msg: String },
}

fn parse_err(line: usize, msg: impl Into<String>) -> OutputError {
    OutputError::Parse { line, msg: msg.into() }
}

/// Renders a trajectory as CSV: the metadata line, a header naming the
/// state columns, then one row per record with the post-event state.
pub fn trajectory_csv(traj: &Trajectory, metadata: &str) -> String {
    let (dc, dd) = traj
        .records
        .first()
        .map_or((0, 0), |r| (r.state_after.continuous.len(), r.state_after.discrete.len()));
    let mut out = String::with_capacity(128 + 64 * traj.records.len());
    out.push_str(metadata);
    out.push('\n');
    out.push_str("index,kind,time,s_draw");
    for i in 0..dc {
        out.push_str(&format!(",x{i}"));
    }
    for j in 0..dd {
        out.push_str(&format!(",d{j}"));
    }
    out.push('\n');
    for r in &traj.records {
        out.push_str(&r.index.to_string());
        out.push(',');
        out.push_str(r.kind.as_str());
        out.push(',');
        out.push_str(&float17(r.time));
        out.push(',');
        if let Some(s) = r.s_draw {
            out.push_str(&float17(s));
        }
        for v in &r.state_after.continuous {
            out.push(',');
            out.push_str(&float17(*v));
        }
        for v in &r.state_after.discrete {
            out.push(',');
            out.push_str(&v.to_string());
        }
        out.push('\n');
    }
    out
}

/// Renders a trajectory as JSON preceded by the metadata comment line.
pub fn trajectory_json(traj: &Trajectory, metadata: &str) -> Result<String, OutputError> {
    let body = serde_json::to_string_pretty(traj)?;
    Ok(format!("{metadata}\n{body}\n"))
}

/// One row recovered from a trajectory CSV file.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedRecord {
    pub index: u64,
    pub kind: String,
    pub time: f64,
    pub s_draw: Option<f64>,
    pub continuous: Vec<f64>,
    pub discrete: Vec<i64>,
}

/// A trajectory CSV file read back: metadata pairs plus typed rows.
#[derive(Debug, Clone, PartialEq)]
pub struct ParsedTrajectory {
    pub metadata: Vec<(String, String)>,
    pub rows: Vec<ParsedRecord>,
}

impl ParsedTrajectory {
    pub fn jump_times(&self) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.kind == RecordKind::TrueJump.as_str())
            .map(|r| r.time)
            .collect()
    }
}

/// Parses a file produced by [`trajectory_csv`].
pub fn parse_trajectory_csv(text: &str) -> Result<ParsedTrajectory, OutputError> {
    let mut lines = text.lines().enumerate();
    let (_, meta_line) = lines.next().ok_or_else(|| parse_err(1, "empty file"))?;
    let meta_line = meta_line
        .strip_prefix('#')
        .ok_or_else(|| parse_err(1, "expected a '# key=value' metadata line"))?;
    let metadata = meta_line
        .split_whitespace()
        .map(|pair| {
            let (k, v) = pair.split_once('=').ok_or_else(|| parse_err(1, format!("bad metadata pair '{pair}'")))?;
            Ok((k.to_string(), v.to_string()))
        })
        .collect::<Result<Vec<_>, OutputError>>()?;
    let (_, header) = lines.next().ok_or_else(|| parse_err(2, "missing column header"))?;
    let columns: Vec<&str> = header.split(',').collect();
    if columns.len() < 4 || columns[..4] != ["index", "kind", "time", "s_draw"] {
        return Err(parse_err(2, "header must start with index,kind,time,s_draw"));
    }
    let dc = columns[4..].iter().filter(|c| c.starts_with('x')).count();
    let dd = columns[4..].iter().filter(|c| c.starts_with('d')).count();

    let mut rows = Vec::new();
    for (i, line) in lines {
        let lineno = i + 1;
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').collect();
        if fields.len() != 4 + dc + dd {
            return Err(parse_err(lineno, format!("expected {} fields, got {}", 4 + dc + dd, fields.len())));
        }
        let num = |s: &str, what: &str| -> Result<f64, OutputError> {
            s.parse().map_err(|_| parse_err(lineno, format!("bad {what} '{s}'")))
        };
        let s_draw = if fields[3].is_empty() { None } else { Some(num(fields[3], "s_draw")?) };
        let continuous =
            fields[4..4 + dc].iter().map(|s| num(s, "state")).collect::<Result<Vec<_>, _>>()?;
        let discrete = fields[4 + dc..]
            .iter()
            .map(|s| s.parse().map_err(|_| parse_err(lineno, format!("bad mode '{s}'"))))
            .collect::<Result<Vec<i64>, _>>()?;
        rows.push(ParsedRecord {
            index: fields[0].parse().map_err(|_| parse_err(lineno, format!("bad index '{}'", fields[0])))?,
            kind: fields[1].to_string(),
            time: num(fields[2], "time")?,
            s_draw,
            continuous,
            discrete,
        });
    }
    Ok(ParsedTrajectory { metadata, rows })
}

/// Concatenates oracle-comparison tables into one CSV under a single
/// column header.
pub fn error_tables_csv(tables: &[ErrorTable], metadata: &str) -> String {
    let mut out = String::new();
    out.push_str(metadata);
    out.push('\n');
    for (i, table) in tables.iter().enumerate() {
        let csv = table.to_csv();
        if i == 0 {
            out.push_str(&csv);
        } else if let Some(pos) = csv.find('\n') {
            out.push_str(&csv[pos + 1..]);
        }
    }
    out
}

/// Writes `body` to `path`, or to stdout when no path is given.
pub fn emit(path: Option<&Path>, body: &str) -> Result<(), OutputError> {
    match path {
        Some(p) => std::fs::write(p, body)?,
        None => std::io::stdout().lock().write_all(body.as_bytes())?,
    }
    Ok(())
}
