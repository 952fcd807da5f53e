//! CSV emission: a fixed-schema result row and a generic table writer.

use crate::error::{Error, Result};

/// Formats a float in shortest round-trip form.
pub fn fmt_f64(x: f64) -> String {
    format!("{x:?}")
}

fn fmt_opt(x: Option<f64>) -> String {
    x.map(fmt_f64).unwrap_or_default()
}

/// Header and rows of one CSV table, written after a `#` comment block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Table {
    /// Comment lines (without the leading `#`) written before the header.
    pub preamble: Vec<String>,
    /// Column names.
    pub header: Vec<String>,
    /// Data rows, already formatted.
    pub rows: Vec<Vec<String>>,
    /// Comment lines (without the leading `#`) written after the rows.
    pub trailer: Vec<String>,
}

impl Table {
    /// Empty table with the given columns.
    pub fn new(header: &[&str]) -> Self {
        Self {
            preamble: Vec::new(),
            header: header.iter().map(|s| s.to_string()).collect(),
            rows: Vec::new(),
            trailer: Vec::new(),
        }
    }

    /// Appends a row; its width must match the header.
    pub fn push(&mut self, row: Vec<String>) {
        assert_eq!(
            row.len(),
            self.header.len(),
            "row width does not match the header"
        );
        self.rows.push(row);
    }

    /// UTF-8, LF-terminated CSV text.
    pub fn to_csv(&self) -> Result<String> {
        let mut out = String::new();
        for line in &self.preamble {
            out.push_str(&comment(line));
        }
        let mut writer = csv::WriterBuilder::new()
            .terminator(csv::Terminator::Any(b'\n'))
            .from_writer(Vec::new());
        writer.write_record(&self.header).map_err(csv_error)?;
        for row in &self.rows {
            writer.write_record(row).map_err(csv_error)?;
        }
        let body = writer.into_inner().map_err(|e| Error::Io(e.to_string()))?;
        out.push_str(&String::from_utf8(body).map_err(|e| Error::Io(e.to_string()))?);
        for line in &self.trailer {
            out.push_str(&comment(line));
        }
        Ok(out)
    }
}

fn comment(line: &str) -> String {
    if line.is_empty() {
        "#\n".to_string()
    } else {
        format!("# {line}\n")
    }
}

fn csv_error(e: csv::Error) -> Error {
    Error::Io(e.to_string())
}

/// Column names of [`ResultRow`], in order.
pub const RESULT_COLUMNS: [&str; 17] = [
    "model",
    "n",
    "k",
    "l",
    "p",
    "t",
    "r",
    "kappa",
    "seed",
    "N_disorder",
    "N_bernoulli",
    "observed",
    "observed_stderr",
    "bound",
    "ratio",
    "wall_time_s",
    "error",
];

/// One measured grid point.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultRow {
    /// `dense` or `sparse`.
    pub model: String,
    /// Number of Majoranas.
    pub n: usize,
    /// Locality.
    pub k: usize,
    /// Product-formula order.
    pub l: usize,
    /// Schatten order.
    pub p: f64,
    /// Evolution time.
    pub t: f64,
    /// Trotter number.
    pub r: u64,
    /// Sparsity parameter (absent for the dense model).
    pub kappa: Option<f64>,
    /// Seed of the grid point.
    pub seed: u64,
    /// Disorder samples (per mask for the sparse model).
    pub n_disorder: usize,
    /// Bernoulli masks (0 for the dense model).
    pub n_bernoulli: usize,
    /// Normalized observed error.
    pub observed: Option<f64>,
    /// Standard error of `observed`.
    pub observed_stderr: Option<f64>,
    /// Analytical bound.
    pub bound: Option<f64>,
    /// `observed/bound`.
    pub ratio: Option<f64>,
    /// Wall-clock seconds spent on the grid point (only when requested).
    pub wall_time_s: Option<f64>,
    /// Failure message; empty on success.
    pub error: Option<String>,
}

impl ResultRow {
    /// True when the row carries no error.
    pub fn is_ok(&self) -> bool {
        self.error.is_none()
    }

    /// Formatted CSV fields.
    pub fn fields(&self) -> Vec<String> {
        vec![
            self.model.clone(),
            self.n.to_string(),
            self.k.to_string(),
            self.l.to_string(),
            fmt_f64(self.p),
            fmt_f64(self.t),
            self.r.to_string(),
            fmt_opt(self.kappa),
            self.seed.to_string(),
            self.n_disorder.to_string(),
            self.n_bernoulli.to_string(),
            fmt_opt(self.observed),
            fmt_opt(self.observed_stderr),
            fmt_opt(self.bound),
            fmt_opt(self.ratio),
            fmt_opt(self.wall_time_s),
            self.error.clone().unwrap_or_default(),
        ]
    }

    /// Records `message` as the row failure (the first failure wins).
    pub fn fail(&mut self, message: String) {
        if self.error.is_none() {
            self.error = Some(message);
        }
    }
}

/// A table of result rows.
pub fn result_table(rows: &[ResultRow]) -> Table {
    let mut table = Table::new(&RESULT_COLUMNS);
    for row in rows {
        table.push(row.fields());
    }
    table
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row() -> ResultRow {
        ResultRow {
            model: "dense".into(),
            n: 6,
            k: 4,
            l: 1,
            p: 2.0,
            t: 0.1,
            r: 100,
            kappa: None,
            seed: 7,
            n_disorder: 32,
            n_bernoulli: 0,
            observed: Some(1.0 / 3.0),
            observed_stderr: Some(1e-20),
            bound: Some(2.5),
            ratio: Some(1.0 / 7.5),
            wall_time_s: None,
            error: None,
        }
    }

    #[test]
    fn floats_round_trip_and_lines_end_in_lf() {
        let mut table = result_table(&[row()]);
        table.preamble.push("n = [6]".into());
        table.trailer.push("fit".into());
        let text = table.to_csv().unwrap();
        assert!(!text.contains('\r'));
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines[0], "# n = [6]");
        assert_eq!(lines[1], RESULT_COLUMNS.join(","));
        assert_eq!(lines[3], "# fit");
        let fields: Vec<&str> = lines[2].split(',').collect();
        assert_eq!(fields[11].parse::<f64>().unwrap(), 1.0 / 3.0);
        assert_eq!(fields[12], "1e-20");
        assert_eq!(fields[7], "");
        assert_eq!(fields[16], "");
    }

    #[test]
    fn error_messages_are_quoted() {
        let mut r = row();
        r.fail("bad, really".into());
        r.fail("second".into());
        let text = result_table(&[r]).to_csv().unwrap();
        assert!(text.contains("\"bad, really\""));
        assert!(!text.contains("second"));
    }
}
