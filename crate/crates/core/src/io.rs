//! CSV and JSON exchange for pairs and reports.

use std::fs::File;
use std::io::{Read, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Grid1D, ScalarField};
use crate::subsuper::PairField;

#[derive(Debug, Serialize, Deserialize)]
struct PairRow {
    x: f64,
    u: f64,
    v: f64,
}

/// Writes `x,u,v` rows, one per node.
pub fn write_pair_csv<W: Write>(pair: &PairField, writer: W) -> Result<()> {
    let grid = pair.grid();
    let mut out = csv::Writer::from_writer(writer);
    for i in 0..grid.len() {
        out.serialize(PairRow {
            x: grid.x(i),
            u: pair.u.get(i),
            v: pair.v.get(i),
        })?;
    }
    out.flush()?;
    Ok(())
}

/// Reads `x,u,v` rows onto `grid`; the `x` column must match the nodes.
pub fn read_pair_csv<R: Read>(grid: Grid1D, reader: R) -> Result<PairField> {
    let mut rdr = csv::Reader::from_reader(reader);
    let mut u = Vec::with_capacity(grid.len());
    let mut v = Vec::with_capacity(grid.len());
    for (i, row) in rdr.deserialize::<PairRow>().enumerate() {
        let row = row?;
        if i >= grid.len() {
            return Err(Error::InvalidInput(format!(
                "pair file has more than {} rows",
                grid.len()
            )));
        }
        if (row.x - grid.x(i)).abs() > 1e-9 {
            return Err(Error::InvalidInput(format!(
                "row {i}: x = {} does not match grid node {}",
                row.x,
                grid.x(i)
            )));
        }
        u.push(row.u);
        v.push(row.v);
    }
    PairField::new(
        ScalarField::from_values(grid, u)?,
        ScalarField::from_values(grid, v)?,
    )
}

pub fn save_pair_csv(pair: &PairField, path: impl AsRef<Path>) -> Result<()> {
    write_pair_csv(pair, File::create(path)?)
}

pub fn load_pair_csv(grid: Grid1D, path: impl AsRef<Path>) -> Result<PairField> {
    read_pair_csv(grid, File::open(path)?)
}

/// Pretty-printed JSON with a trailing newline.
pub fn save_json<T: Serialize>(value: &T, path: impl AsRef<Path>) -> Result<()> {
    let mut file = File::create(path)?;
    serde_json::to_writer_pretty(&mut file, value)?;
    file.write_all(b"\n")?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn pair_round_trip() {
        let grid = Grid1D::new(16).unwrap();
        let pair = PairField::new(
            ScalarField::from_fn(grid, |x| x.sin()),
            ScalarField::from_fn(grid, |x| 1.0 / (1.0 + x)),
        )
        .unwrap();
        let mut buf = Vec::new();
        write_pair_csv(&pair, &mut buf).unwrap();
        assert!(buf.starts_with(b"x,u,v\n"));
        let back = read_pair_csv(grid, buf.as_slice()).unwrap();
        assert_eq!(back, pair);
    }

    #[test]
    fn wrong_grid_is_rejected() {
        let pair = PairField::zeros(Grid1D::new(16).unwrap());
        let mut buf = Vec::new();
        write_pair_csv(&pair, &mut buf).unwrap();
        assert!(read_pair_csv(Grid1D::new(32).unwrap(), buf.as_slice()).is_err());
    }
}
