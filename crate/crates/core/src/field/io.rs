//! Plain-text field files.
//!
//! ```text
//! # grid d=2 origin=0,0 spacing=0.5,0.5 shape=3,3 kind=complex
//! 1.0000000000000000e0,0.0000000000000000e0
//! ...
//! ```
//!
//! One header line, then one line per point in row-major order holding the
//! real part and, for complex fields, the imaginary part. Numbers carry 17
//! significant digits so that reading back reproduces every bit.

use std::fmt::Write as _;

use num_complex::Complex64;

use super::{ComplexField, Grid, ScalarField};
use crate::error::{Error, Result};

/// Either kind of field, as stored in a file.
#[derive(Debug, Clone, PartialEq)]
pub enum AnyField {
    Real(ScalarField),
    Complex(ComplexField),
}

impl AnyField {
    pub fn grid(&self) -> &Grid {
        match self {
            AnyField::Real(f) => f.grid(),
            AnyField::Complex(f) => f.grid(),
        }
    }

    pub fn into_real(self) -> Result<ScalarField> {
        match self {
            AnyField::Real(f) => Ok(f),
            AnyField::Complex(_) => Err(Error::Format("expected a real field".into())),
        }
    }

    pub fn into_complex(self) -> ComplexField {
        match self {
            AnyField::Real(f) => f.to_complex(),
            AnyField::Complex(f) => f,
        }
    }
}

fn num(x: f64) -> String {
    format!("{x:.16e}")
}

fn join(xs: impl IntoIterator<Item = String>) -> String {
    xs.into_iter().collect::<Vec<_>>().join(",")
}

fn header(grid: &Grid, kind: &str) -> String {
    format!(
        "# grid d={} origin={} spacing={} shape={} kind={kind}\n",
        grid.dim(),
        join(grid.origin().iter().map(|&x| num(x))),
        join(grid.spacing().iter().map(|&x| num(x))),
        join(grid.shape().iter().map(|n| n.to_string())),
    )
}

pub fn write_real(field: &ScalarField) -> String {
    let mut out = header(field.grid(), "real");
    for &v in field.values() {
        let _ = writeln!(out, "{}", num(v));
    }
    out
}

pub fn write_complex(field: &ComplexField) -> String {
    let mut out = header(field.grid(), "complex");
    for v in field.values() {
        let _ = writeln!(out, "{},{}", num(v.re), num(v.im));
    }
    out
}

pub fn write_any(field: &AnyField) -> String {
    match field {
        AnyField::Real(f) => write_real(f),
        AnyField::Complex(f) => write_complex(f),
    }
}

fn parse_list<T: std::str::FromStr>(s: &str, what: &str) -> Result<Vec<T>> {
    s.split(',')
        .map(|t| t.trim().parse().map_err(|_| Error::Format(format!("bad {what} entry {t:?}"))))
        .collect()
}

pub fn read(text: &str) -> Result<AnyField> {
    let mut lines = text.lines();
    let head = lines.next().ok_or_else(|| Error::Format("empty file".into()))?;
    let rest = head
        .strip_prefix("# grid")
        .ok_or_else(|| Error::Format("missing '# grid' header".into()))?;
    let (mut d, mut origin, mut spacing, mut shape, mut kind) = (None, None, None, None, None);
    for tok in rest.split_whitespace() {
        let (k, v) = tok
            .split_once('=')
            .ok_or_else(|| Error::Format(format!("bad header token {tok:?}")))?;
        match k {
            "d" => d = Some(v.parse::<usize>().map_err(|_| Error::Format("bad d".into()))?),
            "origin" => origin = Some(parse_list::<f64>(v, "origin")?),
            "spacing" => spacing = Some(parse_list::<f64>(v, "spacing")?),
            "shape" => shape = Some(parse_list::<usize>(v, "shape")?),
            "kind" => kind = Some(v.to_string()),
            _ => return Err(Error::Format(format!("unknown header key {k:?}"))),
        }
    }
    let missing = |k: &str| Error::Format(format!("header lacks {k}"));
    let grid = Grid::new(
        origin.ok_or_else(|| missing("origin"))?,
        spacing.ok_or_else(|| missing("spacing"))?,
        shape.ok_or_else(|| missing("shape"))?,
    )?;
    if d.ok_or_else(|| missing("d"))? != grid.dim() {
        return Err(Error::Format("d disagrees with shape".into()));
    }
    let complex = match kind.as_deref() {
        Some("real") => false,
        Some("complex") => true,
        _ => return Err(Error::Format("kind must be real or complex".into())),
    };
    let rows: Vec<&str> = lines.filter(|l| !l.trim().is_empty()).collect();
    if rows.len() != grid.len() {
        return Err(Error::Format(format!("{} data lines for {} points", rows.len(), grid.len())));
    }
    let parse = |t: &str| -> Result<f64> {
        t.trim().parse().map_err(|_| Error::Format(format!("bad number {t:?}")))
    };
    if complex {
        let values = rows
            .iter()
            .map(|l| {
                let (a, b) = l
                    .split_once(',')
                    .ok_or_else(|| Error::Format(format!("expected re,im in {l:?}")))?;
                Ok(Complex64::new(parse(a)?, parse(b)?))
            })
            .collect::<Result<Vec<_>>>()?;
        Ok(AnyField::Complex(ComplexField::from_values(grid, values)?))
    } else {
        let values = rows.iter().map(|l| parse(l)).collect::<Result<Vec<_>>>()?;
        Ok(AnyField::Real(ScalarField::from_values(grid, values)?))
    }
}
