//! Fixed-dialect CSV export (comma, '.', LF, header row, 17 significant digits).

use std::fmt::Write as _;
use std::fs;
use std::io;
use std::path::Path;

use crate::wave::{MadelungFields, WaveFunction};

/// Scientific notation with 17 significant digits; parses back to the same bits.
pub fn fmt_f64(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Assemble CSV text from a header and rows of already formatted cells.
pub fn csv_text<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[String]>,
{
    let mut out = header.join(",");
    out.push('\n');
    for row in rows {
        out.push_str(&row.as_ref().join(","));
        out.push('\n');
    }
    out
}

pub fn wavefunction_csv(psi: &WaveFunction) -> String {
    let mut out = String::from("x,re_psi,im_psi\n");
    for (i, z) in psi.amplitudes().iter().enumerate() {
        let _ = writeln!(
            out,
            "{},{},{}",
            fmt_f64(psi.grid().x(i)),
            fmt_f64(z.re),
            fmt_f64(z.im)
        );
    }
    out
}

pub fn madelung_csv(fields: &MadelungFields) -> String {
    let mut out = String::from("x,rho,S,v\n");
    for i in 0..fields.rho.len() {
        let _ = writeln!(
            out,
            "{},{},{},{}",
            fmt_f64(fields.grid.x(i)),
            fmt_f64(fields.rho[i]),
            fmt_f64(fields.s[i]),
            fmt_f64(fields.v[i])
        );
    }
    out
}

pub fn write_text(path: &Path, text: &str) -> io::Result<()> {
    fs::write(path, text)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for &x in &[0.1, -1.0 / 3.0, 6.02214076e23, 5e-324, 0.0] {
            let s = fmt_f64(x);
            assert_eq!(s.parse::<f64>().unwrap().to_bits(), x.to_bits());
        }
    }

    #[test]
    fn csv_layout() {
        let text = csv_text(&["a", "b"], vec![vec!["1".to_string(), "2".to_string()]]);
        assert_eq!(text, "a,b\n1,2\n");
    }
}
