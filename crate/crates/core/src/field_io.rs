//! Field serialization: the binary `FRLF` container and index-tuple CSV.
//!
//! `FRLF` layout (little endian): magic `b"FRLF"`, version `u32`, `N: u32`,
//! `N × n: u32`, `N × L: f64`, then `n^N` samples `f64` in row-major order.

use std::io::{Read, Write};
use std::path::Path;

use byteorder::{LittleEndian, ReadBytesExt, WriteBytesExt};

use crate::error::{FracError, Result};
use crate::spectral_core::{Field, Grid};

pub const FRLF_MAGIC: &[u8; 4] = b"FRLF";
pub const FRLF_VERSION: u32 = 1;

pub fn write_frlf<W: Write>(field: &Field, mut w: W) -> Result<()> {
    let grid = field.grid();
    w.write_all(FRLF_MAGIC)?;
    w.write_u32::<LittleEndian>(FRLF_VERSION)?;
    w.write_u32::<LittleEndian>(grid.dim() as u32)?;
    for _ in 0..grid.dim() {
        w.write_u32::<LittleEndian>(grid.n() as u32)?;
    }
    for _ in 0..grid.dim() {
        w.write_f64::<LittleEndian>(grid.length())?;
    }
    for &v in field.values() {
        w.write_f64::<LittleEndian>(v)?;
    }
    Ok(())
}

pub fn read_frlf<R: Read>(mut r: R) -> Result<Field> {
    let mut magic = [0u8; 4];
    r.read_exact(&mut magic)?;
    if &magic != FRLF_MAGIC {
        return Err(FracError::Format("missing FRLF magic".into()));
    }
    let version = r.read_u32::<LittleEndian>()?;
    if version != FRLF_VERSION {
        return Err(FracError::Format(format!("unsupported FRLF version {version}")));
    }
    let dim = r.read_u32::<LittleEndian>()? as usize;
    if !(1..=3).contains(&dim) {
        return Err(FracError::Format(format!("FRLF dimension {dim} out of range")));
    }
    let mut ns = Vec::with_capacity(dim);
    for _ in 0..dim {
        ns.push(r.read_u32::<LittleEndian>()? as usize);
    }
    let mut ls = Vec::with_capacity(dim);
    for _ in 0..dim {
        ls.push(r.read_f64::<LittleEndian>()?);
    }
    if ns.iter().any(|&n| n != ns[0]) || ls.iter().any(|&l| l != ls[0]) {
        return Err(FracError::Format("only isotropic grids are supported".into()));
    }
    let grid = Grid::new(dim, ns[0], ls[0])?;
    let mut values = vec![0.0; grid.len()];
    r.read_f64_into::<LittleEndian>(&mut values)?;
    Field::new(grid, values)
}

/// CSV with header `i0[,i1[,i2]],value`.
pub fn write_csv<W: Write>(field: &Field, w: W) -> Result<()> {
    let grid = field.grid();
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..grid.dim()).map(|a| format!("i{a}")).collect();
    header.push("value".into());
    wr.write_record(&header).map_err(csv_err)?;
    for (j, v) in field.values().iter().enumerate() {
        let idx = grid.unravel(j);
        let mut rec: Vec<String> = idx.iter().take(grid.dim()).map(|i| i.to_string()).collect();
        rec.push(format!("{v:e}"));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Reads an index-tuple CSV; the box length is not stored in CSV and must be
/// supplied.
pub fn read_csv<R: Read>(r: R, length: f64) -> Result<Field> {
    let mut rd = csv::Reader::from_reader(r);
    let headers = rd.headers().map_err(csv_err)?.clone();
    let dim = headers
        .len()
        .checked_sub(1)
        .filter(|d| (1..=3).contains(d))
        .ok_or_else(|| FracError::Format(format!("CSV needs 2 to 4 columns, got {}", headers.len())))?;
    let mut rows = Vec::new();
    for rec in rd.records() {
        let rec = rec.map_err(csv_err)?;
        let mut idx = [0usize; 3];
        for (a, slot) in idx.iter_mut().enumerate().take(dim) {
            *slot = rec[a].trim().parse().map_err(|e| FracError::Format(format!("bad index {:?}: {e}", &rec[a])))?;
        }
        let v: f64 =
            rec[dim].trim().parse().map_err(|e| FracError::Format(format!("bad value {:?}: {e}", &rec[dim])))?;
        rows.push((idx, v));
    }
    let n = (rows.len() as f64).powf(1.0 / dim as f64).round() as usize;
    let grid = Grid::new(dim, n, length)?;
    if rows.len() != grid.len() {
        return Err(FracError::Format(format!("{} CSV rows do not form an isotropic {dim}-D grid", rows.len())));
    }
    let mut values = vec![f64::NAN; grid.len()];
    for (idx, v) in rows {
        if idx.iter().take(dim).any(|&i| i >= n) {
            return Err(FracError::Format(format!("index {idx:?} outside grid")));
        }
        values[grid.ravel(&idx[..dim])] = v;
    }
    Field::new(grid, values)
}

/// Serializable flat records as CSV with a header from the field names.
pub fn write_rows_csv<W: Write, R: serde::Serialize>(rows: &[R], w: W) -> Result<()> {
    let mut wr = csv::Writer::from_writer(w);
    for r in rows {
        wr.serialize(r).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

/// Tidy CSV `x0[,x1[,x2]],value` with physical coordinates, for plotting.
pub fn write_tidy_csv<W: Write>(field: &Field, w: W) -> Result<()> {
    let grid = field.grid();
    let mut wr = csv::Writer::from_writer(w);
    let mut header: Vec<String> = (0..grid.dim()).map(|a| format!("x{a}")).collect();
    header.push("value".into());
    wr.write_record(&header).map_err(csv_err)?;
    for (j, v) in field.values().iter().enumerate() {
        let p = grid.point(j);
        let mut rec: Vec<String> = p.iter().take(grid.dim()).map(|x| format!("{x:e}")).collect();
        rec.push(format!("{v:e}"));
        wr.write_record(&rec).map_err(csv_err)?;
    }
    wr.flush()?;
    Ok(())
}

fn csv_err(e: csv::Error) -> FracError {
    FracError::Format(e.to_string())
}

pub fn save_frlf(field: &Field, path: &Path) -> Result<()> {
    let f = std::fs::File::create(path)?;
    write_frlf(field, std::io::BufWriter::new(f))
}

pub fn load_frlf(path: &Path) -> Result<Field> {
    let f = std::fs::File::open(path)?;
    read_frlf(std::io::BufReader::new(f))
}

/// Loads by extension: `.csv` needs `length`, anything else is `FRLF`.
pub fn load_field(path: &Path, length: Option<f64>) -> Result<Field> {
    if path.extension().is_some_and(|e| e == "csv") {
        let length = length.ok_or_else(|| FracError::config("CSV fields need a box length"))?;
        read_csv(std::fs::File::open(path)?, length)
    } else {
        load_frlf(path)
    }
}

pub fn save_field(field: &Field, path: &Path) -> Result<()> {
    if path.extension().is_some_and(|e| e == "csv") {
        write_csv(field, std::fs::File::create(path)?)
    } else {
        save_frlf(field, path)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> Field {
        let grid = Grid::new(2, 4, 2.5).unwrap();
        Field::from_fn(grid, |x| x[0] * 3.0 - x[1] + 0.125).unwrap()
    }

    #[test]
    fn frlf_round_trip_is_bit_exact() {
        let u = sample();
        let mut buf = Vec::new();
        write_frlf(&u, &mut buf).unwrap();
        assert_eq!(&buf[..4], b"FRLF");
        assert_eq!(buf.len(), 4 + 4 + 4 + 2 * 4 + 2 * 8 + 16 * 8);
        let v = read_frlf(&buf[..]).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn frlf_rejects_bad_magic() {
        let mut buf = Vec::new();
        write_frlf(&sample(), &mut buf).unwrap();
        buf[0] = b'X';
        assert!(read_frlf(&buf[..]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let u = sample();
        let mut buf = Vec::new();
        write_csv(&u, &mut buf).unwrap();
        let text = String::from_utf8(buf.clone()).unwrap();
        assert!(text.starts_with("i0,i1,value"));
        let v = read_csv(&buf[..], 2.5).unwrap();
        assert_eq!(u, v);
    }

    #[test]
    fn tidy_csv_carries_coordinates() {
        let mut buf = Vec::new();
        write_tidy_csv(&sample(), &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some("x0,x1,value"));
        assert_eq!(text.lines().count(), 17);
    }

    #[test]
    fn rows_csv_uses_field_names() {
        #[derive(serde::Serialize)]
        struct Row {
            t: f64,
            excess: f64,
        }
        let mut buf = Vec::new();
        write_rows_csv(&[Row { t: 1.0, excess: 0.5 }], &mut buf).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "t,excess\n1.0,0.5\n");
    }
}
