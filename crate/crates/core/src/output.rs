//! Rendering of command results as CSV or JSON. Every artifact carries the
//! command name and the hash of the input it was computed from.

use std::fmt::Write as _;

use serde::Serialize;
use serde_json::{json, Value};

use crate::averaged::PavTable;
use crate::correlation::Grid2;
use crate::sampling::SampledEvent;

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum ArtifactKind {
    Scalar,
    Table,
    Grid,
    EventStream,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Metadata {
    pub command: String,
    pub config_hash: String,
    pub axes: Vec<String>,
    pub units: String,
    /// Further key/value annotations, in insertion order.
    pub notes: Vec<(String, String)>,
}

impl Metadata {
    pub fn new(command: &str, config_hash: &str, units: &str) -> Self {
        Self {
            command: command.into(),
            config_hash: config_hash.into(),
            axes: vec![],
            units: units.into(),
            notes: vec![],
        }
    }

    pub fn note(mut self, key: &str, value: impl ToString) -> Self {
        self.notes.push((key.into(), value.to_string()));
        self
    }

    pub fn note_f64(self, key: &str, value: f64) -> Self {
        self.note(key, format_f64(value))
    }

    fn csv_header(&self, kind: ArtifactKind, out: &mut String) {
        let kind = serde_json::to_value(kind)
            .ok()
            .and_then(|v| v.as_str().map(str::to_owned))
            .unwrap_or_default();
        let _ = writeln!(out, "# kind: {kind}");
        let _ = writeln!(out, "# command: {}", self.command);
        let _ = writeln!(out, "# config_hash: {}", self.config_hash);
        if !self.axes.is_empty() {
            let _ = writeln!(out, "# axes: {}", self.axes.join(", "));
        }
        let _ = writeln!(out, "# units: {}", self.units);
        for (k, v) in &self.notes {
            let _ = writeln!(out, "# {k}: {v}");
        }
    }

    fn to_json(&self) -> Value {
        let notes: serde_json::Map<String, Value> = self
            .notes
            .iter()
            .map(|(k, v)| (k.clone(), Value::String(v.clone())))
            .collect();
        json!({
            "command": self.command,
            "config_hash": self.config_hash,
            "axes": self.axes,
            "units": self.units,
            "notes": notes,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Payload {
    /// Named values, printed in order.
    Scalar(Vec<(String, Value)>),
    /// Header plus rows.
    Table {
        columns: Vec<String>,
        rows: Vec<Vec<Value>>,
    },
    Grid(Grid2),
    Events(Vec<SampledEvent>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct OutputArtifact {
    pub metadata: Metadata,
    pub payload: Payload,
}

/// Shortest round-trip decimal form, with an exponent for very large or small
/// magnitudes.
pub fn format_f64(x: f64) -> String {
    if x.is_finite() {
        serde_json::to_string(&x).expect("finite float serializes")
    } else {
        x.to_string()
    }
}

fn cell(v: &Value) -> String {
    match v {
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

impl OutputArtifact {
    pub fn kind(&self) -> ArtifactKind {
        match self.payload {
            Payload::Scalar(_) => ArtifactKind::Scalar,
            Payload::Table { .. } => ArtifactKind::Table,
            Payload::Grid(_) => ArtifactKind::Grid,
            Payload::Events(_) => ArtifactKind::EventStream,
        }
    }

    pub fn render(&self, format: Format) -> String {
        match (&self.payload, format) {
            // JSON lines; the first line holds the metadata
            (Payload::Events(events), Format::Json) => {
                let mut out =
                    json!({"kind": self.kind(), "metadata": self.metadata.to_json()}).to_string();
                out.push('\n');
                for e in events {
                    out.push_str(&serde_json::to_string(e).expect("event serializes"));
                    out.push('\n');
                }
                out
            }
            (_, Format::Csv) => self.render_csv(),
            (_, Format::Json) => {
                let mut s =
                    serde_json::to_string_pretty(&self.to_json()).expect("artifact serializes");
                s.push('\n');
                s
            }
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        self.metadata.csv_header(self.kind(), &mut out);
        match &self.payload {
            Payload::Scalar(items) => {
                out.push_str("name,value\n");
                for (k, v) in items {
                    let _ = writeln!(out, "{k},{}", cell(v));
                }
            }
            Payload::Table { columns, rows } => {
                let _ = writeln!(out, "{}", columns.join(","));
                for r in rows {
                    let cells: Vec<String> = r.iter().map(cell).collect();
                    let _ = writeln!(out, "{}", cells.join(","));
                }
            }
            Payload::Grid(g) => {
                // first row: y axis; first column: x axis
                let _ = write!(out, "{}\\{}", g.x_name, g.y_name);
                for y in &g.y {
                    let _ = write!(out, ",{}", format_f64(*y));
                }
                out.push('\n');
                for (i, x) in g.x.iter().enumerate() {
                    out.push_str(&format_f64(*x));
                    for v in g.row(i) {
                        let _ = write!(out, ",{}", format_f64(*v));
                    }
                    out.push('\n');
                }
            }
            Payload::Events(events) => {
                out.push_str("outputs,times,basis_indices\n");
                let join = |v: Vec<String>| v.join(" ");
                for e in events {
                    let _ = writeln!(
                        out,
                        "{},{},{}",
                        join(
                            e.outputs
                                .one_based()
                                .iter()
                                .map(|x| x.to_string())
                                .collect()
                        ),
                        join(e.times.iter().map(|x| format_f64(*x)).collect()),
                        join(e.basis_indices.iter().map(|x| x.to_string()).collect()),
                    );
                }
            }
        }
        out
    }

    pub fn to_json(&self) -> Value {
        let body = match &self.payload {
            Payload::Scalar(items) => {
                Value::Object(items.iter().map(|(k, v)| (k.clone(), v.clone())).collect())
            }
            Payload::Table { columns, rows } => json!({"columns": columns, "rows": rows}),
            Payload::Grid(g) => json!({
                "x_axis": {"name": g.x_name, "values": g.x},
                "y_axis": {"name": g.y_name, "values": g.y},
                "values": g.x.iter().enumerate().map(|(i, _)| g.row(i).to_vec()).collect::<Vec<_>>(),
            }),
            Payload::Events(e) => json!(e),
        };
        json!({"kind": self.kind(), "metadata": self.metadata.to_json(), "data": body})
    }
}

pub fn grid_artifact(mut metadata: Metadata, grid: Grid2) -> OutputArtifact {
    metadata.axes = vec![grid.x_name.clone(), grid.y_name.clone()];
    OutputArtifact {
        metadata,
        payload: Payload::Grid(grid),
    }
}

pub fn pav_artifact(
    metadata: Metadata,
    table: &PavTable,
    oracle: Option<&[f64]>,
) -> OutputArtifact {
    let mut columns = vec!["outputs".to_string(), "probability".to_string()];
    if oracle.is_some() {
        columns.push("oracle".into());
    }
    let rows = table
        .entries
        .iter()
        .enumerate()
        .map(|(i, (d, p))| {
            let labels: Vec<String> = d.one_based().iter().map(|l| l.to_string()).collect();
            let mut row = vec![Value::String(labels.join(" ")), json!(p)];
            if let Some(o) = oracle {
                row.push(json!(o[i]));
            }
            row
        })
        .collect();
    let metadata = metadata.note_f64("total_collision_free_mass", table.total_mass);
    OutputArtifact {
        metadata,
        payload: Payload::Table { columns, rows },
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> Grid2 {
        Grid2 {
            x_name: "a".into(),
            x: vec![0.0, 1.0],
            y_name: "b".into(),
            y: vec![-1.0, 0.5, 2.0],
            values: (0..6).map(f64::from).collect(),
        }
    }

    #[test]
    fn csv_grid_layout() {
        let art = grid_artifact(Metadata::new("landscape", "abc", "rate"), grid());
        let csv = art.render(Format::Csv);
        let lines: Vec<&str> = csv.lines().filter(|l| !l.starts_with('#')).collect();
        assert_eq!(
            lines,
            vec!["a\\b,-1.0,0.5,2.0", "0.0,0.0,1.0,2.0", "1.0,3.0,4.0,5.0"]
        );
        assert!(csv.contains("# config_hash: abc"));
        assert!(csv.contains("# axes: a, b"));
    }

    #[test]
    fn json_grid_mirrors_csv() {
        let art = grid_artifact(Metadata::new("landscape", "abc", "rate"), grid());
        let v: Value = serde_json::from_str(&art.render(Format::Json)).unwrap();
        assert_eq!(v["kind"], "grid");
        assert_eq!(v["metadata"]["config_hash"], "abc");
        assert_eq!(v["data"]["values"][1][2], 5.0);
        assert_eq!(v["data"]["y_axis"]["values"][1], 0.5);
    }

    #[test]
    fn float_format() {
        assert_eq!(format_f64(1.6367393834358784e-32), "1.6367393834358784e-32");
        assert_eq!(format_f64(0.25), "0.25");
        assert_eq!(format_f64(f64::NAN), "NaN");
    }

    #[test]
    fn scalar_csv() {
        let art = OutputArtifact {
            metadata: Metadata::new("rate", "h", "1").note("n", 2),
            payload: Payload::Scalar(vec![
                ("rate".into(), json!(0.25)),
                ("method".into(), json!("ryser")),
            ]),
        };
        let csv = art.render(Format::Csv);
        assert!(csv.contains("# n: 2"));
        assert!(csv.ends_with("name,value\nrate,0.25\nmethod,ryser\n"));
    }
}
