//! Report emission: pretty JSON, or CSV with one row per report.

use std::io::Write;
use std::path::Path;

use anyhow::{bail, Context, Result};
use serde::Serialize;
use serde_json::Value;

/// A homogeneous list of reports flattened to strings. Nested arrays and
/// objects become compact JSON in their cell.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

fn cell(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        Value::Bool(_) | Value::Number(_) => v.to_string(),
        _ => serde_json::to_string(v).expect("json value serializes"),
    }
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Every item must serialize to a JSON object with the same keys.
    pub fn from_reports<T: Serialize>(items: &[T]) -> Result<Self> {
        let values = items
            .iter()
            .map(serde_json::to_value)
            .collect::<Result<Vec<_>, _>>()?;
        Self::from_values(&values)
    }

    pub fn from_values(values: &[Value]) -> Result<Self> {
        let mut table = Table::default();
        for (i, v) in values.iter().enumerate() {
            let Value::Object(map) = v else {
                bail!("report {i} is not an object");
            };
            let keys: Vec<String> = map.keys().cloned().collect();
            if i == 0 {
                table.headers = keys;
            } else if keys != table.headers {
                bail!("report {i} has different fields from report 0");
            }
            table.rows.push(map.values().map(cell).collect());
        }
        Ok(table)
    }

    pub fn write_csv<W: Write>(&self, out: W) -> Result<()> {
        let mut w = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(out);
        w.write_record(&self.headers)?;
        for row in &self.rows {
            w.write_record(row)?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn to_csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf)?)
    }
}

/// Writes `table` to `path` as CSV.
pub fn emit_csv(table: &Table, path: &Path) -> Result<()> {
    let file = std::fs::File::create(path).with_context(|| format!("writing {}", path.display()))?;
    table.write_csv(std::io::BufWriter::new(file))
}

/// Two-space indented JSON with a trailing newline. Object keys come out
/// sorted, so equal values always give equal bytes.
pub fn to_json_string(v: &Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value serializes");
    s.push('\n');
    s
}

#[cfg(test)]
mod tests {
    use super::*;
    use powersieve_core::counting::CountReport;

    fn report(b: i64) -> CountReport {
        CountReport {
            b,
            r: 2,
            poly: "x1^3 + x2^3".into(),
            exact_count: 7,
            weighted_count: 1.5,
            zero_count: 0.25,
        }
    }

    #[test]
    fn csv_shapes() {
        let empty = Table::new(&["B", "r"]);
        assert_eq!(empty.to_csv_string().unwrap(), "B,r\n");
        let one = Table::from_reports(&[report(20)]).unwrap();
        let text = one.to_csv_string().unwrap();
        assert_eq!(text.lines().count(), 2);
        assert!(text.starts_with("B,exact_count,poly,r,weighted_count,zero_count\n"));
        assert!(text.ends_with("20,7,x1^3 + x2^3,2,1.5,0.25\n"));
        let four: Vec<_> = [10, 20, 40, 80].into_iter().map(report).collect();
        let text = Table::from_reports(&four).unwrap().to_csv_string().unwrap();
        assert_eq!(text.lines().count(), 5);
        assert!(!text.contains('\r'));
    }

    #[test]
    fn csv_quoting() {
        let t = Table::from_values(&[serde_json::json!({"a": "x, \"y\"", "b": [1, 2]})]).unwrap();
        assert_eq!(t.to_csv_string().unwrap(), "a,b\n\"x, \"\"y\"\"\",\"[1,2]\"\n");
    }

    #[test]
    fn mixed_reports_rejected() {
        let vals = [serde_json::json!({"a": 1}), serde_json::json!({"b": 1})];
        assert!(Table::from_values(&vals).is_err());
        assert!(Table::from_values(&[serde_json::json!(3)]).is_err());
    }

    #[test]
    fn unwritable_path() {
        let t = Table::new(&["a"]);
        assert!(emit_csv(&t, Path::new("/nonexistent-dir/x.csv")).is_err());
    }
}
