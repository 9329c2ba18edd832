use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};

/// Write one CSV artifact and return its file name.
///
/// Floats go through `Display`, the shortest round-tripping form, so the
/// bytes depend only on the values; rows are written in the order given.
pub fn write_csv(dir: &Path, name: &str, header: &str, rows: &[String]) -> Result<String> {
    let mut text = String::with_capacity(rows.len() * 32 + header.len() + 1);
    text.push_str(header);
    text.push('\n');
    for row in rows {
        text.push_str(row);
        text.push('\n');
    }
    std::fs::write(dir.join(name), text).map_err(|e| Error::Run(format!("writing {name}: {e}")))?;
    Ok(name.to_string())
}

/// Write a gnuplot script rendering one of the CSV artifacts.
pub fn write_plot_script(dir: &Path, name: &str, body: &str) -> Result<String> {
    let mut text = String::new();
    writeln!(text, "set datafile separator ','").expect("string write");
    writeln!(text, "set key autotitle columnhead").expect("string write");
    text.push_str(body);
    if !text.ends_with('\n') {
        text.push('\n');
    }
    std::fs::write(dir.join(name), text).map_err(|e| Error::Run(format!("writing {name}: {e}")))?;
    Ok(name.to_string())
}

/// Join cell values into one CSV row.
pub fn row(cells: &[String]) -> String {
    cells.join(",")
}

/// Deterministic cell for an optional value; absent values print as `nan`.
pub fn opt_cell(value: Option<f64>) -> String {
    match value {
        Some(v) => v.to_string(),
        None => "nan".to_string(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_bytes_are_exactly_header_plus_rows() {
        let dir = std::env::temp_dir().join(format!("perfmap-output-test-{}", std::process::id()));
        std::fs::create_dir_all(&dir).unwrap();
        let name =
            write_csv(&dir, "t.csv", "a,b", &[row(&["1".into(), "0.5".into()])]).unwrap();
        let bytes = std::fs::read(dir.join(&name)).unwrap();
        assert_eq!(bytes, b"a,b\n1,0.5\n");
        std::fs::remove_dir_all(&dir).unwrap();
    }

    #[test]
    fn optional_cells_fall_back_to_nan() {
        assert_eq!(opt_cell(Some(0.25)), "0.25");
        assert_eq!(opt_cell(None), "nan");
    }
}
