use std::fmt::Write as _;

use jpm_parity::Hygiene;

use crate::CliError;

/// Column-labelled numeric table with `# key: value` metadata.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ScenarioResult {
    pub metadata: Vec<(String, String)>,
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

impl ScenarioResult {
    pub fn new(columns: Vec<String>) -> Self {
        Self {
            columns,
            ..Self::default()
        }
    }

    pub fn meta(&mut self, key: &str, value: impl Into<String>) {
        self.metadata.push((key.into(), value.into()));
    }

    pub fn meta_num(&mut self, key: &str, value: f64) {
        self.meta(key, fmt_num(value));
    }

    pub fn meta_hygiene(&mut self, h: &Hygiene) {
        self.meta(
            "hygiene",
            format!(
                "max_trace_error={} max_hermiticity_error={} min_eigenvalue={} samples={}",
                fmt_num(h.max_trace_error),
                fmt_num(h.max_hermiticity_error),
                fmt_num(h.min_eigenvalue),
                h.samples
            ),
        );
    }

    pub fn push(&mut self, row: Vec<f64>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let i = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[i]).collect())
    }

    pub fn metadata_value(&self, key: &str) -> Option<&str> {
        self.metadata.iter().find(|(k, _)| k == key).map(|(_, v)| v.as_str())
    }

    pub fn check_finite(&self) -> Result<(), CliError> {
        for (r, row) in self.rows.iter().enumerate() {
            if let Some(c) = row.iter().position(|v| !v.is_finite()) {
                return Err(CliError::Physics(format!(
                    "non-finite value in column {} at row {r}",
                    self.columns[c]
                )));
            }
        }
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = String::new();
        for (k, v) in &self.metadata {
            let _ = writeln!(out, "# {k}: {v}");
        }
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|&v| fmt_num(v)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }
}

/// 17 significant digits.
pub fn fmt_num(v: f64) -> String {
    format!("{v:.16e}")
}
