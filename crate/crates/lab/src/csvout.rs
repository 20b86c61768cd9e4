//! CSV output: header row, comma separation, 12-digit scientific floats.

use std::io::Write;
use std::path::Path;

pub fn format_float(x: f64) -> String {
    format!("{x:.12e}")
}

pub fn write_csv(path: &Path, header: &[&str], rows: &[Vec<f64>]) -> std::io::Result<()> {
    let mut out = String::new();
    out.push_str(&header.join(","));
    out.push('\n');
    for row in rows {
        let cells: Vec<String> = row.iter().map(|x| format_float(*x)).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    if let Some(parent) = path.parent() {
        if !parent.as_os_str().is_empty() {
            std::fs::create_dir_all(parent)?;
        }
    }
    let mut f = std::fs::File::create(path)?;
    f.write_all(out.as_bytes())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn header_and_formatting() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("t.csv");
        write_csv(&path, &["m", "sup"], &[vec![10.0, 1.25e-9]]).unwrap();
        let text = std::fs::read_to_string(&path).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next().unwrap(), "m,sup");
        let row = lines.next().unwrap();
        assert!(row.starts_with("1.0000000000"), "row {row}");
        assert!(row.contains(",1.2500000000"));
    }

    #[test]
    fn determinism() {
        let dir = tempfile::tempdir().unwrap();
        let (p1, p2) = (dir.path().join("a.csv"), dir.path().join("b.csv"));
        let rows = vec![vec![0.1, 0.2], vec![-3.0, 4.0e10]];
        write_csv(&p1, &["x", "y"], &rows).unwrap();
        write_csv(&p2, &["x", "y"], &rows).unwrap();
        assert_eq!(
            std::fs::read(&p1).unwrap(),
            std::fs::read(&p2).unwrap()
        );
    }
}
