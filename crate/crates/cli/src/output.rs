//! Tabular output as CSV (17 significant digits) or JSON.

use std::io::Write;

use serde_json::{json, Map, Value};

#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<usize> for Cell {
    fn from(x: usize) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<String> for Cell {
    fn from(s: String) -> Self {
        Cell::Text(s)
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) if x.is_nan() => "NaN".into(),
            Cell::Num(x) if x.is_infinite() => if *x > 0.0 { "inf" } else { "-inf" }.into(),
            Cell::Num(x) => format!("{x:.16e}"),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn json(&self) -> Value {
        match self {
            Cell::Num(x) if x.is_finite() => json!(x),
            Cell::Num(_) => Value::Null,
            Cell::Int(i) => json!(i),
            Cell::Text(s) => json!(s),
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub columns: Vec<&'static str>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: &[&'static str]) -> Self {
        Self { columns: columns.to_vec(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn write_csv(&self, w: &mut impl Write) -> std::io::Result<()> {
        writeln!(w, "{}", self.columns.join(","))?;
        for row in &self.rows {
            let line: Vec<String> = row.iter().map(Cell::csv).collect();
            writeln!(w, "{}", line.join(","))?;
        }
        Ok(())
    }

    /// Array of row objects keyed by column name.
    pub fn to_json(&self) -> Value {
        Value::Array(
            self.rows
                .iter()
                .map(|row| {
                    let mut obj = Map::new();
                    for (c, cell) in self.columns.iter().zip(row) {
                        obj.insert((*c).to_string(), cell.json());
                    }
                    Value::Object(obj)
                })
                .collect(),
        )
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

/// What a command produces: a main table and an optional JSON summary.
#[derive(Debug, Clone)]
pub struct Report {
    pub table: Table,
    pub summary: Option<Value>,
}

impl Report {
    pub fn table(table: Table) -> Self {
        Self { table, summary: None }
    }

    /// Renders the main document. In CSV mode the summary is rendered
    /// separately by [`Report::render_summary`].
    pub fn render(&self, format: Format) -> Vec<u8> {
        let mut buf = Vec::new();
        match format {
            Format::Csv => self.table.write_csv(&mut buf).expect("writing to memory"),
            Format::Json => {
                let mut doc = Map::new();
                doc.insert("rows".into(), self.table.to_json());
                if let Some(s) = &self.summary {
                    doc.insert("summary".into(), s.clone());
                }
                serde_json::to_writer_pretty(&mut buf, &Value::Object(doc)).expect("writing to memory");
                buf.push(b'\n');
            }
        }
        buf
    }

    pub fn render_summary(&self) -> Option<Vec<u8>> {
        self.summary.as_ref().map(|s| {
            let mut buf = serde_json::to_vec_pretty(s).expect("writing to memory");
            buf.push(b'\n');
            buf
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trips_doubles() {
        let mut t = Table::new(&["x", "label"]);
        let x = 0.1 + 0.2;
        t.push(vec![x.into(), "gas".into()]);
        let mut buf = Vec::new();
        t.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let field = text.lines().nth(1).unwrap().split(',').next().unwrap();
        assert_eq!(field.parse::<f64>().unwrap(), x);
    }

    #[test]
    fn non_finite_values() {
        assert_eq!(Cell::Num(f64::NAN).csv(), "NaN");
        assert_eq!(Cell::Num(f64::NAN).json(), Value::Null);
    }
}
