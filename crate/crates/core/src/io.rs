//! Plain-text formats for discrete fields and density grids.
//!
//! Discrete field CSV: header `x_index,y_index,direction,value`, one row per
//! undirected edge in canonical orientation; `direction` is `right` for
//! `(x, x + e1)` and `up` for `(x, x + e2)`.
//!
//! Density CSV: a `m,t` header with one value row, then `i,j,rho` rows in
//! row-major order (`j` outer). Grid point `(i, j)` sits at `(i/m, j/m)`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::fields::DiscreteVectorField;
use crate::hydro::DensityField;
use crate::lattice::Torus;

pub const FIELD_HEADER: &str = "x_index,y_index,direction,value";

pub fn write_field_csv<W: Write>(mut w: W, torus: &Torus, field: &DiscreteVectorField) -> Result<()> {
    writeln!(w, "{FIELD_HEADER}")?;
    for (c, v) in field.canonical_values().iter().enumerate() {
        let x = torus.vertex_at(c / 2);
        let dir = if c % 2 == 0 { "right" } else { "up" };
        writeln!(w, "{},{},{},{:e}", x.i, x.j, dir, v)?;
    }
    Ok(())
}

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

fn field<'a>(parts: &[&'a str], k: usize, line: usize) -> Result<&'a str> {
    parts
        .get(k)
        .map(|s| s.trim())
        .ok_or_else(|| parse_err(line, "missing column"))
}

pub fn read_field_csv<R: BufRead>(r: R, torus: &Torus) -> Result<DiscreteVectorField> {
    let n = torus.side();
    let mut values = vec![0.0; torus.num_edges()];
    let mut seen = vec![false; torus.num_edges()];
    for (k, line) in r.lines().enumerate() {
        let line = line?;
        let lineno = k + 1;
        if k == 0 {
            if line.trim() != FIELD_HEADER {
                return Err(parse_err(lineno, format!("expected header {FIELD_HEADER:?}")));
            }
            continue;
        }
        if line.trim().is_empty() {
            continue;
        }
        let parts: Vec<&str> = line.split(',').collect();
        if parts.len() != 4 {
            return Err(parse_err(lineno, "expected 4 columns"));
        }
        let idx = |k: usize| -> Result<usize> {
            let v: usize = field(&parts, k, lineno)?
                .parse()
                .map_err(|_| parse_err(lineno, "bad index"))?;
            if v >= n {
                return Err(parse_err(lineno, format!("index {v} outside torus of side {n}")));
            }
            Ok(v)
        };
        let (i, j) = (idx(0)?, idx(1)?);
        let axis = match field(&parts, 2, lineno)? {
            "right" => 0,
            "up" => 1,
            other => return Err(parse_err(lineno, format!("unknown direction {other:?}"))),
        };
        let v: f64 = field(&parts, 3, lineno)?
            .parse()
            .map_err(|_| parse_err(lineno, "bad value"))?;
        let c = 2 * (j * n + i) + axis;
        if seen[c] {
            return Err(parse_err(lineno, "duplicate edge"));
        }
        seen[c] = true;
        values[c] = v;
    }
    if seen.iter().any(|s| !s) {
        return Err(parse_err(0, "field file does not cover every edge"));
    }
    DiscreteVectorField::from_canonical(torus, values)
}

pub fn write_density_csv<W: Write>(mut w: W, d: &DensityField) -> Result<()> {
    writeln!(w, "m,t")?;
    writeln!(w, "{},{:e}", d.m, d.t)?;
    writeln!(w, "i,j,rho")?;
    for j in 0..d.m {
        for i in 0..d.m {
            writeln!(w, "{},{},{:e}", i, j, d.values[j * d.m + i])?;
        }
    }
    Ok(())
}

pub fn read_density_csv<R: BufRead>(r: R) -> Result<DensityField> {
    let mut lines = r.lines().enumerate();
    let mut next = |expect: Option<&str>| -> Result<(usize, String)> {
        let (k, line) = lines.next().ok_or_else(|| parse_err(0, "unexpected end of file"))?;
        let line = line?;
        if let Some(e) = expect {
            if line.trim() != e {
                return Err(parse_err(k + 1, format!("expected {e:?}")));
            }
        }
        Ok((k + 1, line))
    };
    next(Some("m,t"))?;
    let (ln, head) = next(None)?;
    let parts: Vec<&str> = head.split(',').collect();
    let m: usize = field(&parts, 0, ln)?.parse().map_err(|_| parse_err(ln, "bad m"))?;
    let t: f64 = field(&parts, 1, ln)?.parse().map_err(|_| parse_err(ln, "bad t"))?;
    next(Some("i,j,rho"))?;
    let mut values = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let (ln, line) = next(None)?;
            let parts: Vec<&str> = line.split(',').collect();
            let pi: usize = field(&parts, 0, ln)?.parse().map_err(|_| parse_err(ln, "bad i"))?;
            let pj: usize = field(&parts, 1, ln)?.parse().map_err(|_| parse_err(ln, "bad j"))?;
            if (pi, pj) != (i, j) {
                return Err(parse_err(ln, format!("expected grid point ({i}, {j})")));
            }
            values.push(field(&parts, 2, ln)?.parse().map_err(|_| parse_err(ln, "bad rho"))?);
        }
    }
    Ok(DensityField { m, t, values })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::continuum::{ScalarSeries, Trig};

    #[test]
    fn field_round_trip() {
        let t = Torus::new(4).unwrap();
        let f = DiscreteVectorField::from_fn(&t, |e| (t.directed_index(e) as f64).sin());
        let mut buf = Vec::new();
        write_field_csv(&mut buf, &t, &f).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("x_index,y_index,direction,value\n0,0,right,"));
        assert_eq!(read_field_csv(&buf[..], &t).unwrap(), f);
    }

    #[test]
    fn field_errors() {
        let t = Torus::new(3).unwrap();
        assert!(matches!(
            read_field_csv(&b"a,b\n"[..], &t),
            Err(Error::Parse { line: 1, .. })
        ));
        let bad = format!("{FIELD_HEADER}\n0,0,left,1\n");
        assert!(matches!(
            read_field_csv(bad.as_bytes(), &t),
            Err(Error::Parse { line: 2, .. })
        ));
        let short = format!("{FIELD_HEADER}\n0,0,right,1\n");
        assert!(read_field_csv(short.as_bytes(), &t).is_err());
    }

    #[test]
    fn density_round_trip() {
        let d = DensityField::from_fn(5, 0.25, &ScalarSeries::constant(0.5).with_wave(0.2, [1, 1], Trig::Cos));
        let mut buf = Vec::new();
        write_density_csv(&mut buf, &d).unwrap();
        assert_eq!(read_density_csv(&buf[..]).unwrap(), d);
        assert!(read_density_csv(&b"m,t\n2,0\ni,j,rho\n0,0,1\n"[..]).is_err());
    }
}
