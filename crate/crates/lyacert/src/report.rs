//! Deterministic report assembly: one human-readable text rendering and
//! one JSON rendering of the same ordered content, plus the CSV writer
//! shared by the table-emitting commands.

use serde::Serialize;

/// Scientific notation with 17 significant digits, RFC-4180-safe.
pub fn fmt_float(x: f64) -> String {
    if x.is_nan() {
        "NaN".into()
    } else if x.is_infinite() {
        if x > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{x:.16e}")
    }
}

#[derive(Debug, Clone, Serialize)]
#[serde(rename_all = "snake_case", tag = "item")]
pub enum ReportItem {
    Section { title: String },
    Field { key: String, value: String },
    Line { text: String },
}

/// An ordered report: rendering is byte-stable for identical content.
#[derive(Debug, Clone, Serialize)]
pub struct Report {
    pub title: String,
    pub items: Vec<ReportItem>,
}

impl Report {
    pub fn new(title: &str) -> Self {
        Report {
            title: title.to_string(),
            items: Vec::new(),
        }
    }

    pub fn section(&mut self, title: &str) -> &mut Self {
        self.items.push(ReportItem::Section { title: title.to_string() });
        self
    }

    pub fn field(&mut self, key: &str, value: impl std::fmt::Display) -> &mut Self {
        self.items.push(ReportItem::Field {
            key: key.to_string(),
            value: value.to_string(),
        });
        self
    }

    pub fn float(&mut self, key: &str, value: f64) -> &mut Self {
        self.field(key, fmt_float(value))
    }

    pub fn line(&mut self, text: impl std::fmt::Display) -> &mut Self {
        self.items.push(ReportItem::Line { text: text.to_string() });
        self
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serialization cannot fail")
    }
}

impl std::fmt::Display for Report {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "== {} ==", self.title)?;
        let width = self
            .items
            .iter()
            .filter_map(|i| match i {
                ReportItem::Field { key, .. } => Some(key.len()),
                _ => None,
            })
            .max()
            .unwrap_or(0);
        for item in &self.items {
            match item {
                ReportItem::Section { title } => writeln!(f, "\n-- {title} --")?,
                ReportItem::Field { key, value } => writeln!(f, "{key:width$}  {value}")?,
                ReportItem::Line { text } => writeln!(f, "{text}")?,
            }
        }
        Ok(())
    }
}

/// Minimal RFC-4180 CSV assembly: comma separators, CRLF-free line
/// endings for unix tooling, quoting only when required.
pub struct Csv {
    buf: String,
    columns: usize,
}

impl Csv {
    pub fn new(header: &[&str]) -> Self {
        let mut csv = Csv {
            buf: String::new(),
            columns: header.len(),
        };
        csv.push_row(header.iter().map(|s| s.to_string()).collect());
        csv
    }

    fn quote(field: &str) -> String {
        if field.contains(',') || field.contains('"') || field.contains('\n') {
            format!("\"{}\"", field.replace('"', "\"\""))
        } else {
            field.to_string()
        }
    }

    pub fn push_row(&mut self, fields: Vec<String>) {
        assert_eq!(fields.len(), self.columns, "ragged CSV row");
        let row: Vec<String> = fields.iter().map(|f| Self::quote(f)).collect();
        self.buf.push_str(&row.join(","));
        self.buf.push('\n');
    }

    pub fn finish(self) -> String {
        self.buf
    }
}
