//! Binary field files: a short `key=value` text header ended by `END`,
//! then little-endian `f64` node values in lexicographic `(i, j, k)` order.

use std::fs;
use std::io::{BufRead, BufReader, Read, Write};
use std::path::Path;

use crate::discretization::{GridDomain, ScalarField, Shape};
use crate::{Error, Result};

const MAGIC: &str = "MASSLAB-FIELD v1";

pub fn write_field(path: &Path, field: &ScalarField) -> Result<()> {
    let d = &field.domain;
    let mut out = Vec::with_capacity(256 + 8 * field.values.len());
    writeln!(out, "{MAGIC}")?;
    let shape = match d.shape {
        Shape::Box => "box",
        Shape::Cylinder => "cylinder",
    };
    writeln!(out, "shape={shape}")?;
    writeln!(out, "half_extent={:e}", d.half_extent)?;
    writeln!(out, "spacing={:e}", d.spacing)?;
    writeln!(out, "axis={:e},{:e},{:e}", d.axis[0], d.axis[1], d.axis[2])?;
    writeln!(out, "excision_radius={:e}", d.excision_radius)?;
    writeln!(out, "excised_valid={}", field.excised_valid)?;
    writeln!(out, "count={}", field.values.len())?;
    writeln!(out, "END")?;
    for v in &field.values {
        out.extend_from_slice(&v.to_le_bytes());
    }
    fs::write(path, out)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<ScalarField> {
    let bad = |reason: String| Error::invalid("field file", reason);
    let mut reader = BufReader::new(fs::File::open(path)?);
    let mut line = String::new();
    reader.read_line(&mut line)?;
    if line.trim_end() != MAGIC {
        return Err(bad(format!("missing header `{MAGIC}`")));
    }
    let mut keys = std::collections::HashMap::new();
    loop {
        line.clear();
        if reader.read_line(&mut line)? == 0 {
            return Err(bad("header not terminated by END".into()));
        }
        let l = line.trim_end();
        if l == "END" {
            break;
        }
        let (k, v) = l.split_once('=').ok_or_else(|| bad(format!("malformed header line `{l}`")))?;
        keys.insert(k.to_string(), v.to_string());
    }
    let get = |k: &str| keys.get(k).cloned().ok_or_else(|| bad(format!("missing key `{k}`")));
    let num = |k: &str| -> Result<f64> { get(k)?.parse().map_err(|_| bad(format!("bad number for `{k}`"))) };
    let half = num("half_extent")?;
    let h = num("spacing")?;
    let axis: Vec<f64> = get("axis")?
        .split(',')
        .map(|c| c.parse::<f64>())
        .collect::<std::result::Result<_, _>>()
        .map_err(|_| bad("bad axis".into()))?;
    let axis: [f64; 3] = axis.try_into().map_err(|_| bad("axis needs three components".into()))?;
    let mut domain = match get("shape")?.as_str() {
        "box" => GridDomain::cube(half, h)?,
        "cylinder" => GridDomain::cylinder(half, h, axis)?,
        s => return Err(bad(format!("unknown shape `{s}`"))),
    };
    let r = num("excision_radius")?;
    if r > 0.0 {
        domain = domain.with_excision(r)?;
    }
    let count: usize = get("count")?.parse().map_err(|_| bad("bad count".into()))?;
    if count != domain.len() {
        return Err(bad(format!("count {count} does not match grid size {}", domain.len())));
    }
    let mut bytes = Vec::new();
    reader.read_to_end(&mut bytes)?;
    if bytes.len() != 8 * count {
        return Err(bad(format!("expected {} data bytes, found {}", 8 * count, bytes.len())));
    }
    let values = bytes.chunks_exact(8).map(|c| f64::from_le_bytes(c.try_into().unwrap())).collect();
    Ok(ScalarField { domain, values, excised_valid: get("excised_valid")? == "true" })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_is_bit_exact() {
        let d = GridDomain::cube(1.0, 0.5).unwrap().with_excision(0.5).unwrap();
        let mut f = ScalarField::zeros(d);
        for (n, v) in f.values.iter_mut().enumerate() {
            *v = (n as f64).sin() * 1e-7 + 1.0 / 3.0;
        }
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("u.field");
        write_field(&p, &f).unwrap();
        let g = read_field(&p).unwrap();
        assert_eq!(f.values, g.values);
        assert_eq!(g.domain, f.domain);
    }
}
