//! CSV ingestion and inline value parsing.

use std::path::Path;

use nalgebra::DMatrix;

use crate::error::{DepthError, Result};
use crate::model::Dataset;

#[derive(Debug, Clone, Copy, Default)]
pub struct CsvOptions {
    pub no_header: bool,
    /// Treat every column as a response.
    pub all_y: bool,
    /// Append a column of ones to the predictors.
    pub intercept: bool,
}

fn parse_cell(s: &str, row: usize, col: usize) -> Result<f64> {
    let t = s.trim();
    let v: f64 = t
        .parse()
        .map_err(|_| DepthError::Validation(format!("row {row}, column {col}: '{t}' is not a number")))?;
    if !v.is_finite() {
        return Err(DepthError::Validation(format!("row {row}, column {col}: non-finite value '{t}'")));
    }
    Ok(v)
}

/// Reads a numeric table as rows of cells plus the column names, if any.
pub fn read_table(path: &Path, no_header: bool) -> Result<(Option<Vec<String>>, Vec<Vec<f64>>)> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(!no_header)
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| DepthError::Validation(format!("cannot read {}: {e}", path.display())))?;
    let names = if no_header {
        None
    } else {
        let h = rdr
            .headers()
            .map_err(|e| DepthError::Validation(format!("{}: {e}", path.display())))?;
        Some(h.iter().map(str::to_string).collect())
    };
    let mut rows = Vec::new();
    for (k, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| DepthError::Validation(format!("{}: {e}", path.display())))?;
        // Row numbers are 1-based data rows.
        let row = k + 1;
        let vals = rec
            .iter()
            .enumerate()
            .map(|(c, s)| parse_cell(s, row, c + 1))
            .collect::<Result<Vec<f64>>>()?;
        rows.push(vals);
    }
    if rows.is_empty() {
        return Err(DepthError::Validation(format!("{} has no data rows", path.display())));
    }
    Ok((names, rows))
}

/// Loads a dataset. Columns whose header starts with `y` are responses and
/// the rest predictors; a headerless file without `all_y` takes its first
/// column as the response.
pub fn load_csv(path: &Path, opts: CsvOptions) -> Result<Dataset> {
    let (names, rows) = read_table(path, opts.no_header)?;
    let width = rows[0].len();
    let is_y: Vec<bool> = match (&names, opts.all_y) {
        (_, true) => vec![true; width],
        (Some(ns), false) => ns.iter().map(|n| n.starts_with('y') || n.starts_with('Y')).collect(),
        (None, false) => (0..width).map(|c| c == 0).collect(),
    };
    let y_cols: Vec<usize> = (0..width).filter(|&c| is_y[c]).collect();
    let x_cols: Vec<usize> = (0..width).filter(|&c| !is_y[c]).collect();
    let n = rows.len();
    let px = x_cols.len() + usize::from(opts.intercept);
    let x = DMatrix::from_fn(n, px, |i, j| if j < x_cols.len() { rows[i][x_cols[j]] } else { 1.0 });
    let y = DMatrix::from_fn(n, y_cols.len(), |i, k| rows[i][y_cols[k]]);
    Dataset::new(x, y)
}

/// Parses `"a,b,c"` or, when `s` names an existing file, all numbers in it.
pub fn parse_values(s: &str) -> Result<Vec<f64>> {
    let p = Path::new(s);
    let text = if p.is_file() {
        std::fs::read_to_string(p).map_err(|e| DepthError::Validation(format!("cannot read {s}: {e}")))?
    } else {
        s.to_string()
    };
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .enumerate()
        .map(|(k, t)| parse_cell(t, 1, k + 1))
        .collect()
}

/// Parses a grid `a:b:step`.
pub fn parse_grid(s: &str) -> Result<(f64, f64, f64)> {
    let parts: Vec<&str> = s.split(':').collect();
    if parts.len() != 3 {
        return Err(DepthError::Validation(format!("grid must be start:end:step, got '{s}'")));
    }
    let v = parts
        .iter()
        .enumerate()
        .map(|(k, t)| parse_cell(t, 1, k + 1))
        .collect::<Result<Vec<f64>>>()?;
    Ok((v[0], v[1], v[2]))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn file(text: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(text.as_bytes()).unwrap();
        f
    }

    #[test]
    fn headerless_all_y() {
        let f = file("1,2\n3,4\n5,6\n");
        let d = load_csv(f.path(), CsvOptions { no_header: true, all_y: true, intercept: false }).unwrap();
        assert_eq!(d.y().shape(), (3, 2));
        assert_eq!(d.x().ncols(), 0);
    }

    #[test]
    fn header_splits_columns() {
        let f = file("y,x1,x2\n1,2,3\n4,5,6\n");
        let d = load_csv(f.path(), CsvOptions::default()).unwrap();
        assert_eq!(d.y().ncols(), 1);
        assert_eq!(d.x().ncols(), 2);
        let d = load_csv(f.path(), CsvOptions { intercept: true, ..Default::default() }).unwrap();
        assert_eq!(d.x().ncols(), 3);
        assert_eq!(d.x()[(1, 2)], 1.0);
    }

    #[test]
    fn nan_names_cell() {
        let f = file("y,x\n1,2\n3,NaN\n");
        let e = load_csv(f.path(), CsvOptions::default()).unwrap_err();
        assert!(e.to_string().contains("row 2, column 2"), "{e}");
        let f = file("y,x\n1,abc\n");
        let e = load_csv(f.path(), CsvOptions::default()).unwrap_err();
        assert!(e.to_string().contains("row 1, column 2"), "{e}");
    }

    #[test]
    fn empty_file_is_error() {
        let f = file("");
        assert!(load_csv(f.path(), CsvOptions { no_header: true, ..Default::default() }).is_err());
        let f = file("a,b\n");
        assert!(load_csv(f.path(), CsvOptions::default()).is_err());
    }

    #[test]
    fn quoted_cells() {
        let f = file("\"y\",\"x\"\n\"1.5\",\" 2\"\n");
        let d = load_csv(f.path(), CsvOptions::default()).unwrap();
        assert_eq!(d.y()[(0, 0)], 1.5);
    }

    #[test]
    fn values_and_grid() {
        assert_eq!(parse_values("0.1, 0.2,0.3").unwrap(), vec![0.1, 0.2, 0.3]);
        assert!(parse_values("1,x").is_err());
        assert_eq!(parse_grid("-6:6:0.01").unwrap(), (-6.0, 6.0, 0.01));
        assert!(parse_grid("1:2").is_err());
    }
}
