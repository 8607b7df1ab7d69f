//! CSV writing with a fixed, locale-independent float format.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::Result;

/// Formats a float with 17 significant digits.
pub fn fmt_f64(x: f64) -> String {
    if x.is_nan() {
        "nan".to_string()
    } else if x.is_infinite() {
        if x > 0.0 { "inf" } else { "-inf" }.to_string()
    } else {
        format!("{x:.16e}")
    }
}

/// A CSV field: a number, or an empty field.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Cell {
    Num(f64),
    Empty,
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Empty, Cell::Num)
    }
}

pub fn write_csv<W: Write>(out: &mut W, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    for row in rows {
        let line: Vec<String> = row
            .iter()
            .map(|c| match c {
                Cell::Num(x) => fmt_f64(*x),
                Cell::Empty => String::new(),
            })
            .collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

pub fn write_csv_file(path: &Path, header: &[&str], rows: &[Vec<Cell>]) -> Result<()> {
    let mut out = BufWriter::new(File::create(path)?);
    write_csv(&mut out, header, rows)?;
    out.flush()?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seventeen_digits_round_trip() {
        for &x in &[0.1, 1.0 / 3.0, 6.02214076e23, -2.5e-300, 1.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap(), x);
            let mantissa = s.split('e').next().unwrap().replace(['-', '.'], "");
            assert_eq!(mantissa.len(), 17);
        }
    }

    #[test]
    fn header_and_empty_cells() {
        let mut buf = Vec::new();
        write_csv(&mut buf, &["a", "b"], &[vec![Cell::Num(1.0), Cell::Empty]]).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "a,b\n1.0000000000000000e0,\n");
    }
}
