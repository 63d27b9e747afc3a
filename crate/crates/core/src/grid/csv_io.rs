//! Field files: three header lines (`dims`, `extents`, `label`) followed by
//! rows of values. Each row runs along axis 0; rows advance along axis 1,
//! then axis 2.

use super::{Grid, SpatialField};
use crate::error::{Error, Result};
use std::io::{BufRead, Write};

pub fn write_field_csv(field: &SpatialField, mut out: impl Write) -> Result<()> {
    let g = field.grid();
    let dims: Vec<String> = (0..g.dim()).map(|k| g.cells_along(k).to_string()).collect();
    writeln!(out, "dims,{}", dims.join(","))?;
    let ext: Vec<String> = (0..g.dim())
        .flat_map(|k| {
            let (lo, hi) = g.extent(k);
            [format!("{lo:.16e}"), format!("{hi:.16e}")]
        })
        .collect();
    writeln!(out, "extents,{}", ext.join(","))?;
    writeln!(out, "label,{}", field.label())?;
    for row in field.values().chunks(g.cells_along(0)) {
        let cells: Vec<String> = row.iter().map(|v| format!("{v:.16e}")).collect();
        writeln!(out, "{}", cells.join(","))?;
    }
    Ok(())
}

fn header<'a>(line: Option<&'a str>, key: &str) -> Result<Vec<&'a str>> {
    let line = line.ok_or_else(|| Error::InvalidInput(format!("missing `{key}` header line")))?;
    let mut parts = line.split(',').map(str::trim);
    if parts.next() != Some(key) {
        return Err(Error::InvalidInput(format!("expected `{key}` header, got `{line}`")));
    }
    Ok(parts.collect())
}

fn num<T: std::str::FromStr>(s: &str, what: &str) -> Result<T> {
    s.parse().map_err(|_| Error::InvalidInput(format!("cannot parse {what} `{s}`")))
}

/// Reads a field file. When `expected` is given the file must match it.
pub fn read_field_csv(input: impl BufRead, expected: Option<&Grid>) -> Result<SpatialField> {
    let lines: Vec<String> = input.lines().collect::<std::io::Result<_>>()?;
    let mut it = lines.iter().map(String::as_str).filter(|l| !l.trim().is_empty());
    let dims: Vec<usize> = header(it.next(), "dims")?
        .into_iter()
        .map(|s| num(s, "cell count"))
        .collect::<Result<_>>()?;
    let ext: Vec<f64> = header(it.next(), "extents")?
        .into_iter()
        .map(|s| num(s, "extent"))
        .collect::<Result<_>>()?;
    let label = header(it.next(), "label")?.join(",");
    if ext.len() != 2 * dims.len() {
        return Err(Error::InvalidInput("extents must list lo,hi per axis".into()));
    }
    let extents: Vec<(f64, f64)> = ext.chunks(2).map(|c| (c[0], c[1])).collect();
    let grid = Grid::new(&dims, &extents)?;
    if let Some(e) = expected {
        if e.cells() != grid.cells() || e.dim() != grid.dim() {
            return Err(Error::FieldMismatch(format!(
                "field file has cells {:?}, grid expects {:?}",
                &grid.cells()[..grid.dim()],
                &e.cells()[..e.dim()]
            )));
        }
    }
    let mut values = Vec::with_capacity(grid.cell_count());
    for line in it {
        let row: Vec<f64> = line.split(',').map(|s| num(s.trim(), "value")).collect::<Result<_>>()?;
        if row.len() != grid.cells_along(0) {
            return Err(Error::FieldMismatch(format!(
                "row has {} values, expected {}",
                row.len(),
                grid.cells_along(0)
            )));
        }
        values.extend(row);
    }
    SpatialField::new(*expected.unwrap_or(&grid), values, label)
}
