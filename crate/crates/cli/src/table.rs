//! Column tables written as CSV with round-trip float formatting.

use std::path::Path;

use ffo_core::C64;

/// Shortest decimal that parses back to the same `f64`. Plain notation in
/// [1e-5, 1e16), scientific outside it.
pub fn fmt_f64(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-5..1e16).contains(&a) || !x.is_finite() {
        format!("{}", x)
    } else {
        format!("{:e}", x)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

/// One row under construction.
#[derive(Debug, Default)]
pub struct Row(Vec<String>);

impl Row {
    pub fn real(mut self, x: f64) -> Self {
        self.0.push(fmt_f64(x));
        self
    }

    pub fn complex(self, z: C64) -> Self {
        self.real(z.re).real(z.im)
    }

    pub fn opt_complex(mut self, z: Option<C64>) -> Self {
        match z {
            Some(z) => self.complex(z),
            None => {
                self.0.push(String::new());
                self.0.push(String::new());
                self
            }
        }
    }

    pub fn opt_real(mut self, x: Option<f64>) -> Self {
        match x {
            Some(x) => self.real(x),
            None => {
                self.0.push(String::new());
                self
            }
        }
    }
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Table {
            headers: headers.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    /// Header names `<name>_re`, `<name>_im`.
    pub fn complex_headers(names: &[&str]) -> Vec<String> {
        names
            .iter()
            .flat_map(|n| [format!("{n}_re"), format!("{n}_im")])
            .collect()
    }

    pub fn with_headers(headers: Vec<String>) -> Self {
        Table {
            headers,
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Row) {
        debug_assert_eq!(row.0.len(), self.headers.len(), "row width");
        self.rows.push(row.0);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.headers.iter().position(|h| h == name)?;
        Some(
            self.rows
                .iter()
                .map(|r| r[k].parse().unwrap_or(f64::NAN))
                .collect(),
        )
    }

    pub fn write(&self, path: &Path) -> csv::Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(&self.headers)?;
        for r in &self.rows {
            w.write_record(r)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn formatting_round_trips() {
        for x in [0.0, 1.0, -2.5, 0.1, 1e-12, 123456.789, 1e20, -3.3e-7, 0.01] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
        assert_eq!(fmt_f64(0.01), "0.01");
        assert_eq!(fmt_f64(1e-12), "1e-12");
    }

    #[test]
    fn rows_and_columns() {
        let mut headers = vec!["t".to_string()];
        headers.extend(Table::complex_headers(&["z"]));
        let mut t = Table::with_headers(headers);
        t.push(Row::default().real(0.5).complex(C64::new(1.0, -2.0)));
        assert_eq!(t.rows[0], vec!["0.5", "1", "-2"]);
        assert_eq!(t.column("z_im"), Some(vec![-2.0]));
        assert_eq!(t.column("w"), None);
    }
}
