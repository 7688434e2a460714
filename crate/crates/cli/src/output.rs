//! Deterministic table output: CSV with `#` metadata lines, or a JSON mirror.

use std::fmt::Write as _;
use std::path::Path;

use crate::config::Format;
use crate::CliError;

/// One table cell.
#[derive(Debug, Clone, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(i64),
    Text(String),
    Empty,
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

impl From<u32> for Cell {
    fn from(x: u32) -> Self {
        Cell::Int(x as i64)
    }
}

impl From<&str> for Cell {
    fn from(x: &str) -> Self {
        Cell::Text(x.to_string())
    }
}

impl From<String> for Cell {
    fn from(x: String) -> Self {
        Cell::Text(x)
    }
}

impl From<bool> for Cell {
    fn from(x: bool) -> Self {
        Cell::Int(x as i64)
    }
}

/// `%.12g`: 12 significant digits, trailing zeros trimmed, `-0` printed as `0`.
pub fn fmt_g(x: f64) -> String {
    if x.is_nan() {
        return "nan".into();
    }
    if x.is_infinite() {
        return if x > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if x == 0.0 {
        return "0".into();
    }
    let sci = format!("{x:.11e}");
    let (mantissa, exp) = sci.split_once('e').expect("exponent");
    let exp: i32 = exp.parse().expect("exponent digits");
    if (-4..12).contains(&exp) {
        let decimals = (11 - exp).max(0) as usize;
        trim(format!("{x:.decimals$}"))
    } else {
        let sign = if exp < 0 { '-' } else { '+' };
        format!("{}e{sign}{:02}", trim(mantissa.to_string()), exp.abs())
    }
}

fn trim(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

impl Cell {
    fn csv(&self) -> String {
        match self {
            Cell::Num(x) => fmt_g(*x),
            Cell::Int(i) => i.to_string(),
            Cell::Text(s) => s.clone(),
            Cell::Empty => String::new(),
        }
    }

    fn json(&self) -> serde_json::Value {
        match self {
            // Through the CSV formatter so both outputs carry the same digits.
            Cell::Num(x) if x.is_finite() => {
                let v: f64 = fmt_g(*x).parse().expect("formatted float");
                serde_json::Value::from(v)
            }
            Cell::Num(x) => serde_json::Value::from(fmt_g(*x)),
            Cell::Int(i) => serde_json::Value::from(*i),
            Cell::Text(s) => serde_json::Value::from(s.clone()),
            Cell::Empty => serde_json::Value::Null,
        }
    }
}

#[derive(Debug, Clone, Default)]
pub struct Table {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new<S: Into<String>>(columns: impl IntoIterator<Item = S>) -> Self {
        Self { columns: columns.into_iter().map(Into::into).collect(), ..Self::default() }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.to_string(), value.into()));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        let _ = writeln!(out, "{}", self.columns.join(","));
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(Cell::csv).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn to_json(&self) -> String {
        let metadata: serde_json::Map<String, serde_json::Value> =
            self.metadata.iter().map(|(k, v)| (k.clone(), serde_json::Value::from(v.clone()))).collect();
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|r| serde_json::Value::Array(r.iter().map(Cell::json).collect()))
            .collect();
        let doc = serde_json::json!({ "metadata": metadata, "columns": self.columns, "rows": rows });
        let mut s = serde_json::to_string_pretty(&doc).expect("serializable table");
        s.push('\n');
        s
    }

    pub fn render(&self, format: Format) -> String {
        match format {
            Format::Csv => self.to_csv(),
            Format::Json => self.to_json(),
        }
    }
}

pub fn write_file(path: &Path, contents: &str) -> Result<(), CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("{}: {e}", dir.display())))?;
    }
    std::fs::write(path, contents).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// `out.csv` with `suffix = "_loci"` becomes `out_loci.csv`.
pub fn sibling(path: &Path, suffix: &str, ext: &str) -> std::path::PathBuf {
    let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
    path.with_file_name(format!("{stem}{suffix}.{ext}"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn general_format() {
        assert_eq!(fmt_g(0.0), "0");
        assert_eq!(fmt_g(-0.0), "0");
        assert_eq!(fmt_g(1.0), "1");
        assert_eq!(fmt_g(0.943_270_364_813_298_5), "0.943270364813");
        assert_eq!(fmt_g(-2.5), "-2.5");
        assert_eq!(fmt_g(123_456_789_012.0), "123456789012");
        assert_eq!(fmt_g(1.234_567_890_123_4e12), "1.23456789012e+12");
        assert_eq!(fmt_g(3.1e-7), "3.1e-07");
        assert_eq!(fmt_g(1e-5), "1e-05");
        assert_eq!(fmt_g(1e-4), "0.0001");
        assert_eq!(fmt_g(0.999_999_999_999_9), "1");
        assert_eq!(fmt_g(f64::INFINITY), "inf");
    }

    #[test]
    fn csv_and_json() {
        let mut t = Table::new(["omega", "status", "R"]);
        t.meta("units", "PHz");
        t.push(vec![1.5.into(), "ok".into(), 0.25.into()]);
        t.push(vec![0.5.into(), "cutoff".into(), Cell::Empty]);
        assert_eq!(t.to_csv(), "# units: PHz\nomega,status,R\n1.5,ok,0.25\n0.5,cutoff,\n");
        let v: serde_json::Value = serde_json::from_str(&t.to_json()).unwrap();
        assert_eq!(v["rows"][1][2], serde_json::Value::Null);
        assert_eq!(v["metadata"]["units"], "PHz");
    }

    #[test]
    fn sibling_paths() {
        assert_eq!(sibling(Path::new("out/a.csv"), "_loci", "csv"), Path::new("out/a_loci.csv"));
        assert_eq!(sibling(Path::new("r.csv"), "", "json"), Path::new("r.json"));
    }
}
