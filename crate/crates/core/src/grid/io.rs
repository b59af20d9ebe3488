//! Field dump format shared repo-wide.
//!
//! Layout: one text header line `FIELD v1 n=<N> name=<id>\n` followed by
//! N² little-endian 64-bit floats, row-major. Masks use the same format
//! with values in {0.0, 1.0}.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::grid::{MaskSet, ScalarField, TorusGrid};

fn valid_name(name: &str) -> bool {
    !name.is_empty()
        && name
            .chars()
            .all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '.' | '-'))
}

pub fn write_field(w: &mut impl Write, name: &str, field: &ScalarField) -> Result<()> {
    if !valid_name(name) {
        return Err(Error::FieldFormat(format!("invalid field name `{name}`")));
    }
    writeln!(w, "FIELD v1 n={} name={}", field.grid().n(), name)?;
    for &v in field.values() {
        w.write_all(&v.to_le_bytes())?;
    }
    Ok(())
}

pub fn read_field(r: &mut impl BufRead) -> Result<(String, ScalarField)> {
    let mut header = String::new();
    r.read_line(&mut header)?;
    let header = header.trim_end_matches('\n');
    let parts: Vec<&str> = header.split(' ').collect();
    if parts.len() != 4 || parts[0] != "FIELD" || parts[1] != "v1" {
        return Err(Error::FieldFormat(format!("bad header `{header}`")));
    }
    let n: usize = parts[2]
        .strip_prefix("n=")
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| Error::FieldFormat(format!("bad size field `{}`", parts[2])))?;
    let name = parts[3]
        .strip_prefix("name=")
        .filter(|s| valid_name(s))
        .ok_or_else(|| Error::FieldFormat(format!("bad name field `{}`", parts[3])))?
        .to_string();

    let grid = TorusGrid::new(n)?;
    let mut buf = vec![0u8; 8 * grid.len()];
    r.read_exact(&mut buf)?;
    let values: Vec<f64> = buf
        .chunks_exact(8)
        .map(|c| f64::from_le_bytes(c.try_into().unwrap()))
        .collect();
    Ok((name, ScalarField::new(grid, values)?))
}

pub fn write_mask(w: &mut impl Write, name: &str, mask: &MaskSet) -> Result<()> {
    write_field(w, name, &mask.indicator())
}

pub fn read_mask(r: &mut impl BufRead) -> Result<(String, MaskSet)> {
    let (name, field) = read_field(r)?;
    for &v in field.values() {
        if v != 0.0 && v != 1.0 {
            return Err(Error::FieldFormat(format!(
                "mask `{name}` carries non-indicator value {v}"
            )));
        }
    }
    Ok((name, field.superlevel(0.5)))
}
