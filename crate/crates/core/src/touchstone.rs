//! Two-port Touchstone v1 files, real/imaginary format.

use std::io::{BufRead, Write};

use num_complex::Complex64 as C64;

use crate::error::{invalid, Error, Result};
use crate::netcore::SParams;

/// Writes `# HZ S RI R <zref>` followed by one ascending-frequency row per point
/// in the `S11 S21 S12 S22` column order.
pub fn write_s2p<W: Write>(mut w: W, points: &[(f64, SParams)]) -> Result<()> {
    let zref = points.first().map_or(50.0, |p| p.1.zref);
    if points.iter().any(|p| p.1.zref != zref) {
        return Err(invalid("zref", "all points must share one reference impedance"));
    }
    let mut sorted: Vec<&(f64, SParams)> = points.iter().collect();
    sorted.sort_by(|a, b| a.0.total_cmp(&b.0));
    writeln!(w, "# HZ S RI R {zref}")?;
    for (f, s) in sorted {
        write!(w, "{f}")?;
        for z in [s.s11, s.s21, s.s12, s.s22] {
            write!(w, " {} {}", z.re, z.im)?;
        }
        writeln!(w)?;
    }
    Ok(())
}

pub fn read_s2p<R: BufRead>(r: R) -> Result<Vec<(f64, SParams)>> {
    let mut zref = None;
    let mut out = Vec::new();
    for line in r.lines() {
        let line = line?;
        let body = line.split('!').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        if let Some(opts) = body.strip_prefix('#') {
            let tok: Vec<String> = opts.split_whitespace().map(|t| t.to_ascii_uppercase()).collect();
            if tok.len() != 5 || tok[0] != "HZ" || tok[1] != "S" || tok[2] != "RI" || tok[3] != "R" {
                return Err(invalid("touchstone", format!("unsupported option line `{body}`")));
            }
            zref = Some(tok[4].parse::<f64>().map_err(|e| invalid("touchstone", e.to_string()))?);
            continue;
        }
        let z = zref.ok_or_else(|| invalid("touchstone", "data before the option line"))?;
        let v = body
            .split_whitespace()
            .map(|t| t.parse::<f64>().map_err(|e| invalid("touchstone", e.to_string())))
            .collect::<Result<Vec<f64>>>()?;
        if v.len() != 9 {
            return Err(Error::Dimension(format!("expected 9 columns, found {}", v.len())));
        }
        let c = |i: usize| C64::new(v[i], v[i + 1]);
        out.push((v[0], SParams { s11: c(1), s21: c(3), s12: c(5), s22: c(7), zref: z }));
    }
    Ok(out)
}
