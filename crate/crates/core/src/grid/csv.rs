//! Text exchange format for grid functions.
//!
//! ```text
//! # domain=plane2d L=8 n=64 dirichlet=true dtype=real
//! 0,-7.875,-7.875,0.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//! One `index,coords...,re,im` row per node; cylinder headers carry
//! `n=<axial>,<angular>`. Floats are written with 17 significant digits.

use std::io::{BufRead, Write};

use num_complex::Complex64;

use super::{DType, Domain, DomainKind, GridFunction};
use crate::error::{Error, Result};

pub fn write_csv<W: Write>(f: &GridFunction, mut out: W) -> Result<()> {
    let d = f.domain();
    let n = match d.kind() {
        DomainKind::Cylinder => format!("{},{}", d.shape()[0], d.shape()[1]),
        _ => d.shape()[0].to_string(),
    };
    writeln!(
        out,
        "# domain={} L={:?} n={} dirichlet={} dtype={}",
        d.kind().name(),
        d.half_width(),
        n,
        d.dirichlet(),
        if f.is_real() { "real" } else { "complex" }
    )?;
    let mut line = String::new();
    for (i, v) in f.values().iter().enumerate() {
        line.clear();
        line.push_str(&i.to_string());
        let c = d.coord(i);
        for x in &c[..d.dim()] {
            line.push(',');
            line.push_str(&format!("{x:.16e}"));
        }
        line.push_str(&format!(",{:.16e},{:.16e}", v.re, v.im));
        writeln!(out, "{line}")?;
    }
    Ok(())
}

pub fn read_csv<R: BufRead>(input: R) -> Result<GridFunction> {
    let mut lines = input.lines();
    let header = lines.next().ok_or_else(|| Error::Parse("empty grid function file".into()))??;
    let header = header
        .strip_prefix('#')
        .ok_or_else(|| Error::Parse("missing '# domain=...' header".into()))?;
    let mut kind = None;
    let mut half_width = None;
    let mut shape: Option<Vec<usize>> = None;
    let mut dirichlet = true;
    let mut dtype = DType::Complex;
    for tok in header.split_whitespace() {
        let (key, val) = tok.split_once('=').ok_or_else(|| Error::Parse(format!("bad header token '{tok}'")))?;
        match key {
            "domain" => {
                kind = Some(match val {
                    "line1d" => DomainKind::Line1d,
                    "plane2d" => DomainKind::Plane2d,
                    "cylinder" => DomainKind::Cylinder,
                    other => return Err(Error::Parse(format!("unknown domain kind '{other}'"))),
                })
            }
            "L" => half_width = Some(parse_f64(val)?),
            "n" => {
                shape = Some(
                    val.split(',')
                        .map(|s| s.parse().map_err(|_| Error::Parse(format!("bad node count '{s}'"))))
                        .collect::<Result<_>>()?,
                )
            }
            "dirichlet" => dirichlet = val == "true",
            "dtype" => dtype = if val == "real" { DType::Real } else { DType::Complex },
            other => return Err(Error::Parse(format!("unknown header key '{other}'"))),
        }
    }
    let (kind, l, shape) = match (kind, half_width, shape) {
        (Some(k), Some(l), Some(s)) => (k, l, s),
        _ => return Err(Error::Parse("header needs domain=, L= and n=".into())),
    };
    let domain = match (kind, shape.as_slice()) {
        (DomainKind::Line1d, [n]) => Domain::line1d(l, *n)?,
        (DomainKind::Plane2d, [n]) => Domain::plane2d(l, *n)?,
        (DomainKind::Cylinder, [n, m]) => Domain::cylinder(l, *n, *m)?,
        _ => return Err(Error::Parse("node counts do not match the domain kind".into())),
    }
    .with_dirichlet(dirichlet);
    let ncols = domain.dim() + 3;
    let mut values = vec![Complex64::new(0.0, 0.0); domain.len()];
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let cols: Vec<&str> = line.split(',').collect();
        if cols.len() != ncols {
            return Err(Error::Parse(format!("expected {ncols} columns, got {}", cols.len())));
        }
        let idx: usize = cols[0].parse().map_err(|_| Error::Parse(format!("bad index '{}'", cols[0])))?;
        if idx >= domain.len() {
            return Err(Error::Parse(format!("index {idx} out of range")));
        }
        values[idx] = Complex64::new(parse_f64(cols[ncols - 2])?, parse_f64(cols[ncols - 1])?);
        seen += 1;
    }
    if seen != domain.len() {
        return Err(Error::Parse(format!("expected {} rows, got {seen}", domain.len())));
    }
    match dtype {
        DType::Real => GridFunction::from_real(&domain, values.into_iter().map(|v| v.re).collect()),
        DType::Complex => GridFunction::from_complex(&domain, values),
    }
}

fn parse_f64(s: &str) -> Result<f64> {
    s.trim().parse().map_err(|_| Error::Parse(format!("bad number '{s}'")))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #[test]
        fn round_trip_is_exact(vals in prop::collection::vec(-1e6f64..1e6, 24 * 16)) {
            let d = Domain::cylinder(3.0, 24, 16).unwrap().with_dirichlet(false);
            let f = GridFunction::from_complex(&d, vals.chunks(2).flat_map(|c| [Complex64::new(c[0], c[1]), Complex64::new(c[1], -c[0])]).collect()).unwrap();
            let mut buf = Vec::new();
            write_csv(&f, &mut buf).unwrap();
            let g = read_csv(buf.as_slice()).unwrap();
            prop_assert_eq!(f, g);
        }
    }

    #[test]
    fn rejects_missing_header() {
        assert!(read_csv("0,1,2,3\n".as_bytes()).is_err());
        assert!(read_csv("# domain=line1d L=1 n=8\n0,0.1,1,0\n".as_bytes()).is_err());
    }
}
