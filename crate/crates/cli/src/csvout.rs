//! CSV emission with a metadata header block.
//!
//! Output is deterministic: fixed column order, `.` decimal separator, full
//! double precision (17 significant digits), no timestamps. Undefined values
//! (e.g. the phase of a vanished amplitude) are written as `nan`.

/// One output cell.
#[derive(Clone, Debug)]
pub enum Cell {
    Text(String),
    Num(f64),
    Int(i64),
    /// Undefined / failed entry, written as `nan`.
    Missing,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        match x {
            Some(v) => Cell::Num(v),
            None => Cell::Missing,
        }
    }
}

/// Format with 17 significant digits, enough to round-trip any f64.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else {
        format!("{x:.16e}")
    }
}

pub struct Table {
    /// `key = value` lines echoed into the header block.
    pub meta: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            meta: Vec::new(),
            columns,
            rows: Vec::new(),
        }
    }

    pub fn meta(&mut self, key: impl Into<String>, value: impl ToString) {
        self.meta.push((key.into(), value.to_string()));
    }

    pub fn push_row(&mut self, row: Vec<Cell>) {
        assert_eq!(row.len(), self.columns.len(), "row width mismatch");
        self.rows.push(row);
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (key, value) in &self.meta {
            out.push_str(&format!("# {key} = {value}\n"));
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let line: Vec<String> = row
                .iter()
                .map(|cell| match cell {
                    Cell::Text(s) => s.clone(),
                    Cell::Num(x) => fmt_f64(*x),
                    Cell::Int(k) => k.to_string(),
                    Cell::Missing => "nan".into(),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_then_rows() {
        let mut t = Table::new(vec!["a".into(), "b".into()]);
        t.meta("tool", "test");
        t.push_row(vec![Cell::Num(1.5), Cell::Missing]);
        let csv = t.to_csv();
        assert!(csv.starts_with("# tool = test\na,b\n"));
        assert!(csv.contains("1.5000000000000000e0,nan"));
    }

    #[test]
    fn full_precision_roundtrip() {
        let x = std::f64::consts::PI / 3.0;
        let s = fmt_f64(x);
        let back: f64 = s.parse().unwrap();
        assert_eq!(back, x);
    }
}
