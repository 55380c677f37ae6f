//! Flat snapshot layouts for fields.
//!
//! Binary (little endian): `u32 n`, then `n + 1` `u64` extents, `n + 1` `f64`
//! lows, `n + 1` `f64` highs, then every coefficient as `f64`, node-major and
//! blade-minor.
//!
//! CSV: `#`-prefixed header lines `n=`, `extents=`, `lows=`, `highs=`, a
//! column line `node,x0,..,xn,c0,..`, then one row per node.

use std::io::{BufRead, Read, Write};

use super::{CliffordField, FieldError, Grid};

pub fn write_binary<W: Write>(field: &CliffordField, mut w: W) -> Result<(), FieldError> {
    let g = field.grid();
    w.write_all(&(g.n() as u32).to_le_bytes())?;
    for &e in g.extents() {
        w.write_all(&(e as u64).to_le_bytes())?;
    }
    for v in g.lows().iter().chain(g.highs()).chain(field.values()) {
        w.write_all(&v.to_le_bytes())?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_binary<R: Read>(mut r: R) -> Result<CliffordField, FieldError> {
    let mut b4 = [0u8; 4];
    r.read_exact(&mut b4)?;
    let n = u32::from_le_bytes(b4) as usize;
    if n == 0 || n > crate::algebra::MAX_N {
        return Err(FieldError::Format(format!("n = {n} in snapshot header")));
    }
    let mut b8 = [0u8; 8];
    let mut extents = Vec::with_capacity(n + 1);
    for _ in 0..=n {
        r.read_exact(&mut b8)?;
        extents.push(u64::from_le_bytes(b8) as usize);
    }
    let mut read_f64s = |count: usize| -> Result<Vec<f64>, FieldError> {
        let mut out = Vec::with_capacity(count);
        for _ in 0..count {
            r.read_exact(&mut b8)?;
            out.push(f64::from_le_bytes(b8));
        }
        Ok(out)
    };
    let lows = read_f64s(n + 1)?;
    let highs = read_f64s(n + 1)?;
    let grid = Grid::new(n, extents, lows, highs)?;
    let values = read_f64s(grid.len() * grid.width())?;
    CliffordField::from_values(&grid, values)
}

pub fn write_csv<W: Write>(field: &CliffordField, mut w: W) -> Result<(), FieldError> {
    let g = field.grid();
    let join = |v: &mut dyn Iterator<Item = String>| v.collect::<Vec<_>>().join(",");
    writeln!(w, "# n={}", g.n())?;
    writeln!(w, "# extents={}", join(&mut g.extents().iter().map(|e| e.to_string())))?;
    writeln!(w, "# lows={}", join(&mut g.lows().iter().map(|e| format!("{e:?}"))))?;
    writeln!(w, "# highs={}", join(&mut g.highs().iter().map(|e| format!("{e:?}"))))?;
    let mut header = vec!["node".to_string()];
    header.extend((0..g.axes()).map(|i| format!("x{i}")));
    header.extend((0..g.width()).map(|a| format!("c{a}")));
    writeln!(w, "{}", header.join(","))?;
    let mut x = vec![0.0; g.axes()];
    for k in 0..g.len() {
        g.coords_into(k, &mut x);
        write!(w, "{k}")?;
        for v in x.iter().chain(field.at(k)) {
            write!(w, ",{v:?}")?;
        }
        writeln!(w)?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_csv<R: BufRead>(r: R) -> Result<CliffordField, FieldError> {
    let mut n = None;
    let mut extents = None;
    let mut lows = None;
    let mut highs = None;
    let mut values = Vec::new();
    let mut seen_columns = false;
    for line in r.lines() {
        let line = line?;
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(meta) = line.strip_prefix('#') {
            let (key, val) = meta
                .trim()
                .split_once('=')
                .ok_or_else(|| FieldError::Format(format!("bad header line {line:?}")))?;
            match key.trim() {
                "n" => n = Some(parse_one::<usize>(val)?),
                "extents" => extents = Some(parse_list::<usize>(val)?),
                "lows" => lows = Some(parse_list::<f64>(val)?),
                "highs" => highs = Some(parse_list::<f64>(val)?),
                other => return Err(FieldError::Format(format!("unknown header key {other:?}"))),
            }
            continue;
        }
        if !seen_columns {
            seen_columns = true;
            continue;
        }
        let row = parse_list::<f64>(line)?;
        let n = n.ok_or_else(|| FieldError::Format("missing n header".into()))?;
        let expected = 1 + (n + 1) + (1 << n);
        if row.len() != expected {
            return Err(FieldError::Format(format!(
                "row has {} columns, expected {expected}",
                row.len()
            )));
        }
        values.extend_from_slice(&row[n + 2..]);
    }
    let missing = |k: &str| FieldError::Format(format!("missing {k} header"));
    let grid = Grid::new(
        n.ok_or_else(|| missing("n"))?,
        extents.ok_or_else(|| missing("extents"))?,
        lows.ok_or_else(|| missing("lows"))?,
        highs.ok_or_else(|| missing("highs"))?,
    )?;
    CliffordField::from_values(&grid, values)
}

fn parse_one<T: std::str::FromStr>(s: &str) -> Result<T, FieldError> {
    s.trim()
        .parse()
        .map_err(|_| FieldError::Format(format!("cannot parse {s:?}")))
}

fn parse_list<T: std::str::FromStr>(s: &str) -> Result<Vec<T>, FieldError> {
    s.split(',').map(parse_one).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> CliffordField {
        let g = Grid::new(2, vec![3, 4, 3], vec![-1.0, 0.0, 0.5], vec![1.0, 1.0, 2.0]).unwrap();
        CliffordField::from_fn(&g, |x, out| {
            for (a, o) in out.iter_mut().enumerate() {
                *o = x[0] * (a as f64 + 1.0) - x[2] / 3.0 + x[1].sin();
            }
        })
    }

    #[test]
    fn binary_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        assert_eq!(buf.len(), 4 + 3 * 8 * 3 + 36 * 4 * 8);
        assert_eq!(read_binary(&buf[..]).unwrap(), f);
    }

    #[test]
    fn csv_round_trip() {
        let f = sample();
        let mut buf = Vec::new();
        write_csv(&f, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("# n=2\n# extents=3,4,3\n"));
        assert_eq!(read_csv(&buf[..]).unwrap(), f);
    }

    #[test]
    fn truncated_binary_is_an_error() {
        let f = sample();
        let mut buf = Vec::new();
        write_binary(&f, &mut buf).unwrap();
        buf.truncate(buf.len() - 3);
        assert!(read_binary(&buf[..]).is_err());
    }
}
