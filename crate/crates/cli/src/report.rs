//! Report rendering: one tabular payload, emitted as CSV (exact rationals
//! as `num/den`, `.` decimals) or as a JSON envelope
//! `{command, config, rows, derived_checks}` keyed by column name.

use serde_json::{json, Map, Value};

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Json,
}

pub struct Report {
    pub command: &'static str,
    pub config: Value,
    pub header: Vec<&'static str>,
    pub rows: Vec<Vec<String>>,
    pub derived_checks: Value,
}

impl Report {
    pub fn new(command: &'static str, config: Value, header: Vec<&'static str>) -> Self {
        Report {
            command,
            config,
            header,
            rows: Vec::new(),
            derived_checks: Value::Null,
        }
    }

    pub fn push_row<I: IntoIterator<Item = String>>(&mut self, row: I) {
        let row: Vec<String> = row.into_iter().collect();
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.render_csv(),
            Format::Json => self.render_json(),
        }
    }

    fn render_csv(&self) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    fn render_json(&self) -> String {
        let rows: Vec<Value> = self
            .rows
            .iter()
            .map(|row| {
                let mut obj = Map::new();
                for (key, cell) in self.header.iter().zip(row) {
                    obj.insert((*key).to_string(), cell_value(cell));
                }
                Value::Object(obj)
            })
            .collect();
        let envelope = json!({
            "command": self.command,
            "config": self.config,
            "rows": rows,
            "derived_checks": self.derived_checks,
        });
        let mut text = serde_json::to_string_pretty(&envelope).expect("serializable envelope");
        text.push('\n');
        text
    }
}

/// Numbers stay numbers in JSON; exact rationals and everything else stay
/// strings.
fn cell_value(cell: &str) -> Value {
    if let Ok(n) = cell.parse::<i64>() {
        return json!(n);
    }
    if cell.contains(['.', 'e']) {
        if let Ok(x) = cell.parse::<f64>() {
            return json!(x);
        }
    }
    Value::String(cell.to_string())
}
