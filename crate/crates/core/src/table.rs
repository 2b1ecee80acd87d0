//! Tabular output in CSV or JSON.

use serde_json::{Map, Number, Value};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Str(String),
    Int(i64),
    Float(f64),
    Bool(bool),
    Null,
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Str(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Str(s)
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Float(x)
    }
}

impl From<i64> for Cell {
    fn from(x: i64) -> Self {
        Cell::Int(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Bool(x)
    }
}

impl<T: Into<Cell>> From<Option<T>> for Cell {
    fn from(x: Option<T>) -> Self {
        x.map_or(Cell::Null, Into::into)
    }
}

/// One named-field row. Field order is the schema order.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Record {
    fields: Vec<(String, Cell)>,
}

impl Record {
    pub fn new() -> Self {
        Record::default()
    }

    pub fn with(mut self, name: &str, value: impl Into<Cell>) -> Self {
        self.fields.push((name.to_string(), value.into()));
        self
    }

    pub fn push(&mut self, name: &str, value: impl Into<Cell>) {
        self.fields.push((name.to_string(), value.into()));
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.fields.iter().map(|(n, _)| n.as_str())
    }

    pub fn get(&self, name: &str) -> Option<&Cell> {
        self.fields.iter().find(|(n, _)| n == name).map(|(_, c)| c)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableFormat {
    Csv,
    Json,
}

/// Rounds to six significant digits and prints the shortest decimal form.
pub fn format_float(x: f64) -> String {
    if !x.is_finite() {
        return if x.is_nan() {
            "NaN".into()
        } else if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        };
    }
    let rounded: f64 = format!("{x:.5e}").parse().expect("formatted float parses");
    if rounded == 0.0 {
        return "0".into();
    }
    let abs = rounded.abs();
    if (1e-5..1e15).contains(&abs) {
        format!("{rounded}")
    } else {
        format!("{rounded:e}")
    }
}

fn round6(x: f64) -> f64 {
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn check_schema(schema: &[&str], records: &[Record]) -> Result<()> {
    for (i, r) in records.iter().enumerate() {
        if !r.names().eq(schema.iter().copied()) {
            return Err(Error::Schema(format!(
                "row {i} has fields [{}], expected [{}]",
                r.names().collect::<Vec<_>>().join(","),
                schema.join(",")
            )));
        }
    }
    Ok(())
}

/// Writes rows in input order. All rows must have exactly the `schema`
/// fields, in order.
pub fn write_table(schema: &[&str], records: &[Record], format: TableFormat) -> Result<Vec<u8>> {
    check_schema(schema, records)?;
    match format {
        TableFormat::Csv => {
            let mut w = csv::WriterBuilder::new()
                .terminator(csv::Terminator::Any(b'\n'))
                .from_writer(Vec::new());
            let io = |e: csv::Error| Error::Schema(e.to_string());
            w.write_record(schema).map_err(io)?;
            for r in records {
                let row: Vec<String> = r
                    .fields
                    .iter()
                    .map(|(_, c)| match c {
                        Cell::Str(s) => s.clone(),
                        Cell::Int(i) => i.to_string(),
                        Cell::Float(x) => format_float(*x),
                        Cell::Bool(b) => b.to_string(),
                        Cell::Null => String::new(),
                    })
                    .collect();
                w.write_record(&row).map_err(io)?;
            }
            w.into_inner().map_err(|e| Error::Schema(e.to_string()))
        }
        TableFormat::Json => {
            let rows: Vec<Value> = records
                .iter()
                .map(|r| {
                    let mut obj = Map::new();
                    for (name, c) in &r.fields {
                        let v = match c {
                            Cell::Str(s) => Value::String(s.clone()),
                            Cell::Int(i) => Value::from(*i),
                            Cell::Float(x) => {
                                Number::from_f64(round6(*x)).map_or(Value::Null, Value::Number)
                            }
                            Cell::Bool(b) => Value::Bool(*b),
                            Cell::Null => Value::Null,
                        };
                        obj.insert(name.clone(), v);
                    }
                    Value::Object(obj)
                })
                .collect();
            let mut out = serde_json::to_vec_pretty(&Value::Array(rows))
                .map_err(|e| Error::Schema(e.to_string()))?;
            out.push(b'\n');
            Ok(out)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_single_row() {
        let rows = vec![Record::new().with("name", "kind").with("H_chroma", 2.13)];
        let out = write_table(&["name", "H_chroma"], &rows, TableFormat::Csv).unwrap();
        assert_eq!(
            String::from_utf8(out).unwrap(),
            "name,H_chroma\nkind,2.13\n"
        );
    }

    #[test]
    fn csv_empty_is_header_only() {
        let out = write_table(&["a", "b"], &[], TableFormat::Csv).unwrap();
        assert_eq!(out, b"a,b\n");
    }

    #[test]
    fn json_preserves_schema_order() {
        let rows = vec![Record::new()
            .with("z", 1i64)
            .with("a", "x")
            .with("m", 0.1234567)];
        let out = write_table(&["z", "a", "m"], &rows, TableFormat::Json).unwrap();
        let text = String::from_utf8(out).unwrap();
        let z = text.find("\"z\"").unwrap();
        let a = text.find("\"a\"").unwrap();
        let m = text.find("\"m\"").unwrap();
        assert!(z < a && a < m);
        assert!(text.contains("0.123457"));
    }

    #[test]
    fn heterogeneous_rows_rejected() {
        let rows = vec![Record::new().with("a", 1i64), Record::new().with("b", 1i64)];
        assert!(matches!(
            write_table(&["a"], &rows, TableFormat::Csv),
            Err(Error::Schema(_))
        ));
    }

    #[test]
    fn six_significant_digits() {
        assert_eq!(format_float(std::f64::consts::LOG2_10), "3.32193");
        assert_eq!(format_float(61.5), "61.5");
        assert_eq!(format_float(1234567.0), "1234570");
        assert_eq!(format_float(0.0), "0");
        assert_eq!(format_float(1e-14), "1e-14");
        assert_eq!(format_float(-0.000123456789), "-0.000123457");
    }
}
