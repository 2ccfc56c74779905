//! Text export of objective grids.
//!
//! Layout: two header lines `rows,<param>,<start>,<end>,<count>` and
//! `cols,<param>,<start>,<end>,<count>`, then one comma-separated line per
//! row value, ascending. Numbers use the shortest round-trip formatting, so
//! identical grids give identical bytes.

use std::io::Write;
use std::path::Path;

use crate::error::{Error, Result};
use crate::estimator::{GridAxis, ObjectiveGrid};

fn header(tag: &str, axis: &GridAxis) -> String {
    format!("{tag},{},{},{},{}", axis.param.name(), axis.start, axis.end, axis.count)
}

pub fn write_contour<W: Write>(grid: &ObjectiveGrid, mut w: W) -> Result<()> {
    let (rows, cols) = (grid.axis1.count, grid.axis2.count);
    if rows == 0 || cols == 0 || grid.values.is_empty() {
        return Err(Error::InvalidGrid("grid is empty".into()));
    }
    if grid.values.len() != rows * cols {
        return Err(Error::InvalidGrid(format!(
            "{} values for a {rows}x{cols} grid",
            grid.values.len()
        )));
    }
    writeln!(w, "{}", header("rows", &grid.axis1))?;
    writeln!(w, "{}", header("cols", &grid.axis2))?;
    for row in grid.values.chunks(cols) {
        let line: Vec<String> = row.iter().map(|v| v.to_string()).collect();
        writeln!(w, "{}", line.join(","))?;
    }
    w.flush()?;
    Ok(())
}

pub fn emit_contour(grid: &ObjectiveGrid, path: impl AsRef<Path>) -> Result<()> {
    // Validate before touching the file system.
    let mut buf = Vec::new();
    write_contour(grid, &mut buf)?;
    std::fs::write(path, buf)?;
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::scene::{Axis, ParamId};

    fn axis(order: usize, count: usize) -> GridAxis {
        GridAxis {
            param: ParamId { axis: Axis::X, order },
            start: -1.0,
            end: 1.0,
            count,
        }
    }

    #[test]
    fn layout() {
        let grid = ObjectiveGrid {
            axis1: axis(1, 2),
            axis2: axis(2, 3),
            values: vec![1.0, 2.0, 3.0, 4.5, 5.0, 6.0],
        };
        let mut buf = Vec::new();
        write_contour(&grid, &mut buf).unwrap();
        assert_eq!(
            String::from_utf8(buf).unwrap(),
            "rows,x_velocity,-1,1,2\ncols,x_acceleration,-1,1,3\n1,2,3\n4.5,5,6\n"
        );
    }

    #[test]
    fn empty_grid_rejected() {
        let grid = ObjectiveGrid {
            axis1: axis(1, 0),
            axis2: axis(2, 3),
            values: vec![],
        };
        assert!(matches!(write_contour(&grid, Vec::new()), Err(Error::InvalidGrid(_))));
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("c.txt");
        assert!(emit_contour(&grid, &path).is_err());
        assert!(!path.exists());
    }
}
