//! Run manifests and JSON/CSV emission.
//!
//! JSON files are `{"manifest": …, "records": […]}`. CSV files start with a
//! `# manifest: {…}` comment line, then a header and one row per record;
//! reals are written with 17 significant digits so they read back exactly.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

pub type Record = Map<String, Value>;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub command: String,
    /// Everything needed to re-run: the parsed subcommand and global flags.
    pub params: Value,
    pub seed: u64,
    pub tol: f64,
    pub mc_samples: usize,
    pub version: String,
    /// Not part of the reproducible content.
    pub wall_time_s: f64,
}

/// Build a record from `(column, value)` pairs.
#[macro_export]
macro_rules! record {
    ($($k:expr => $v:expr),* $(,)?) => {{
        let mut r = $crate::output::Record::new();
        $( r.insert($k.to_string(), serde_json::json!($v)); )*
        r
    }};
}

pub fn render(manifest: &RunManifest, records: &[Record], format: Format) -> String {
    match format {
        Format::Json => {
            let doc = serde_json::json!({ "manifest": manifest, "records": records });
            let mut s = serde_json::to_string_pretty(&doc).expect("records are plain JSON");
            s.push('\n');
            s
        }
        Format::Csv => render_csv(manifest, records),
    }
}

fn render_csv(manifest: &RunManifest, records: &[Record]) -> String {
    let mut columns: Vec<&String> = Vec::new();
    for r in records {
        for k in r.keys() {
            if !columns.contains(&k) {
                columns.push(k);
            }
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "# manifest: {}", serde_json::to_string(manifest).expect("manifest is plain JSON"));
    out.push_str(&columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(","));
    out.push('\n');
    for r in records {
        let row: Vec<String> = columns.iter().map(|c| r.get(*c).map_or_else(String::new, csv_value)).collect();
        out.push_str(&row.join(","));
        out.push('\n');
    }
    out
}

fn csv_value(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::Bool(b) => b.to_string(),
        Value::Number(n) => match (n.as_i64(), n.as_u64(), n.as_f64()) {
            (Some(i), _, _) => i.to_string(),
            (_, Some(u), _) => u.to_string(),
            (_, _, Some(x)) => format_real(x),
            _ => n.to_string(),
        },
        Value::String(s) => csv_field(s),
        other => csv_field(&other.to_string()),
    }
}

/// 17 significant digits, `.` decimal.
pub fn format_real(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        x.to_string()
    }
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Pull the manifest back out of a JSON or CSV output.
pub fn read_manifest(text: &str) -> Result<RunManifest, String> {
    if let Some(line) = text.lines().next().and_then(|l| l.strip_prefix("# manifest: ")) {
        return serde_json::from_str(line).map_err(|e| format!("bad CSV manifest line: {e}"));
    }
    let doc: Value = serde_json::from_str(text).map_err(|e| format!("not a sharpineq JSON output: {e}"))?;
    let m = doc.get("manifest").cloned().ok_or("no manifest in file")?;
    serde_json::from_value(m).map_err(|e| format!("bad manifest: {e}"))
}

/// The reproducible part of an output: everything but the wall time.
pub fn reproducible_part(text: &str) -> String {
    text.lines()
        .filter(|l| !l.trim_start().starts_with("\"wall_time_s\""))
        .map(|l| {
            if let Some(rest) = l.strip_prefix("# manifest: ") {
                match serde_json::from_str::<Value>(rest) {
                    Ok(Value::Object(mut m)) => {
                        m.shift_remove("wall_time_s");
                        format!("# manifest: {}", Value::Object(m))
                    }
                    _ => l.to_string(),
                }
            } else {
                l.to_string()
            }
        })
        .collect::<Vec<_>>()
        .join("\n")
}

#[cfg(test)]
mod tests {
    use super::*;

    fn manifest() -> RunManifest {
        RunManifest {
            command: "constants".into(),
            params: serde_json::json!({"n": "2"}),
            seed: 7,
            tol: 1e-11,
            mc_samples: 1000,
            version: "0.1.0".into(),
            wall_time_s: 0.25,
        }
    }

    #[test]
    fn csv_reals_round_trip() {
        let x = 0.1 + 0.2;
        let s = format_real(x);
        assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        let recs = vec![record! {"name" => "a,b", "x" => x, "k" => 3, "none" => Value::Null}];
        let text = render(&manifest(), &recs, Format::Csv);
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[1], "name,x,k,none");
        assert_eq!(lines[2], format!("\"a,b\",{s},3,"));
        assert_eq!(read_manifest(&text).unwrap(), manifest());
    }

    #[test]
    fn json_manifest_round_trip_ignores_wall_time() {
        let a = render(&manifest(), &[record! {"x" => 1.5}], Format::Json);
        assert_eq!(read_manifest(&a).unwrap(), manifest());
        let mut m = manifest();
        m.wall_time_s = 3.0;
        let b = render(&m, &[record! {"x" => 1.5}], Format::Json);
        assert_ne!(a, b);
        assert_eq!(reproducible_part(&a), reproducible_part(&b));
        let c = render_csv(&m, &[]);
        assert_eq!(reproducible_part(&c), reproducible_part(&render_csv(&manifest(), &[])));
    }
}
