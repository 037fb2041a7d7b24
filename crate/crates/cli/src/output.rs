use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::Path;

use fractal_chains::io::format_f64;
use serde::Serialize;

/// Stdout unless a path is given.
pub fn sink(path: Option<&Path>) -> io::Result<Box<dyn Write>> {
    Ok(match path {
        Some(p) => Box::new(BufWriter::new(File::create(p)?)),
        None => Box::new(BufWriter::new(io::stdout().lock())),
    })
}

pub fn write_json<T: Serialize + ?Sized>(value: &T, out: &mut dyn Write) -> io::Result<()> {
    serde_json::to_writer_pretty(&mut *out, value)?;
    out.write_all(b"\n")?;
    out.flush()
}

/// Header row, then one line per row. Numbers use the shortest round-trip
/// form with a `.` decimal point.
pub fn write_csv(header: &[&str], rows: &[Vec<f64>], out: &mut dyn Write) -> io::Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        assert_eq!(row.len(), header.len(), "row width must match the header");
        let cells: Vec<String> = row.iter().map(|&x| format_f64(x)).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    out.flush()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_rows_give_header_only() {
        let mut buf = Vec::new();
        write_csv(&["a", "b"], &[], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n");
    }

    #[test]
    fn rows_round_trip() {
        let rows = vec![vec![0.1, 2.0], vec![-1e-300, 1.0 / 3.0]];
        let mut buf = Vec::new();
        write_csv(&["x", "y"], &rows, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back: Vec<Vec<f64>> = text
            .lines()
            .skip(1)
            .map(|l| l.split(',').map(|c| c.parse().unwrap()).collect())
            .collect();
        assert_eq!(back, rows);
        assert!(text.lines().all(|l| l.split(',').count() == 2));
    }
}
