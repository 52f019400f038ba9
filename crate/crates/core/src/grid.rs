//! Lattice types shared by every stage.
//!
//! All grids are row-major with row 0 at the bottom of the image, so `(x, y)`
//! follows the usual mathematical orientation and the simulation scan starts
//! at index 0.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Cell coordinate `(x, y)`, `y = 0` is the bottom row.
pub type Cell = (usize, usize);

/// Binary facies lattice. `1` = sand (reservoir), `0` = background.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct BinaryGrid {
    width: usize,
    height: usize,
    cells: Vec<u8>,
}

impl BinaryGrid {
    pub fn new(width: usize, height: usize) -> Self {
        BinaryGrid {
            width,
            height,
            cells: vec![0; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<u8>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::validation(
                "cells",
                format!(
                    "expected {} cells for {width}x{height}, got {}",
                    width * height,
                    cells.len()
                ),
            ));
        }
        if let Some(pos) = cells.iter().position(|&v| v > 1) {
            return Err(Error::validation(
                "cells",
                format!("cell {pos} has value {} (must be 0 or 1)", cells[pos]),
            ));
        }
        Ok(BinaryGrid {
            width,
            height,
            cells,
        })
    }

    /// Builds a grid from a predicate evaluated at every `(x, y)`.
    pub fn from_fn(width: usize, height: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut cells = Vec::with_capacity(width * height);
        for y in 0..height {
            for x in 0..width {
                cells.push(u8::from(f(x, y)));
            }
        }
        BinaryGrid {
            width,
            height,
            cells,
        }
    }

    /// Parses rows of `#` (sand) and `.` (background), written top row first.
    /// Handy for fixtures.
    pub fn from_ascii(art: &str) -> Result<Self> {
        let rows: Vec<&str> = art
            .lines()
            .map(str::trim)
            .filter(|l| !l.is_empty())
            .collect();
        let height = rows.len();
        let width = rows.first().map_or(0, |r| r.chars().count());
        let mut cells = vec![0u8; width * height];
        for (i, row) in rows.iter().enumerate() {
            if row.chars().count() != width {
                return Err(Error::validation("ascii", format!("row {i} has ragged width")));
            }
            let y = height - 1 - i;
            for (x, c) in row.chars().enumerate() {
                cells[y * width + x] = match c {
                    '#' | '1' => 1,
                    '.' | '0' => 0,
                    other => {
                        return Err(Error::validation("ascii", format!("unexpected char {other:?}")))
                    }
                };
            }
        }
        Ok(BinaryGrid {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[u8] {
        &self.cells
    }

    #[inline]
    pub fn index(&self, x: usize, y: usize) -> usize {
        y * self.width + x
    }

    #[inline]
    pub fn is_sand(&self, x: usize, y: usize) -> bool {
        self.cells[y * self.width + x] == 1
    }

    /// Sand test with signed coordinates; out-of-bounds reads as background.
    #[inline]
    pub fn is_sand_at(&self, x: i64, y: i64) -> bool {
        x >= 0
            && y >= 0
            && (x as usize) < self.width
            && (y as usize) < self.height
            && self.cells[y as usize * self.width + x as usize] == 1
    }

    #[inline]
    pub fn set(&mut self, x: usize, y: usize, sand: bool) {
        let i = self.index(x, y);
        self.cells[i] = u8::from(sand);
    }

    pub fn sand_count(&self) -> usize {
        self.cells.iter().filter(|&&v| v == 1).count()
    }

    pub fn is_empty(&self) -> bool {
        self.cells.iter().all(|&v| v == 0)
    }

    /// Sand cells in scan order (bottom-up, left to right).
    pub fn sand_cells(&self) -> impl Iterator<Item = Cell> + '_ {
        let w = self.width;
        self.cells
            .iter()
            .enumerate()
            .filter(|(_, &v)| v == 1)
            .map(move |(i, _)| (i % w, i / w))
    }

    /// Cells that are sand here but not in `other`.
    pub fn difference(&self, other: &BinaryGrid) -> BinaryGrid {
        debug_assert_eq!(self.dims(), other.dims());
        let cells = self
            .cells
            .iter()
            .zip(&other.cells)
            .map(|(&a, &b)| a & !b & 1)
            .collect();
        BinaryGrid {
            width: self.width,
            height: self.height,
            cells,
        }
    }
}

/// Per-cell direction lattice. `None` is ND (no direction, background).
///
/// Defined entries are angles in radians measured from the x axis, with an
/// implied unit norm.
#[derive(Clone, Debug, PartialEq)]
pub struct VectorField {
    width: usize,
    height: usize,
    cells: Vec<Option<f64>>,
}

impl VectorField {
    /// All-ND field.
    pub fn new(width: usize, height: usize) -> Self {
        VectorField {
            width,
            height,
            cells: vec![None; width * height],
        }
    }

    pub fn from_cells(width: usize, height: usize, cells: Vec<Option<f64>>) -> Result<Self> {
        if cells.len() != width * height {
            return Err(Error::validation(
                "cells",
                format!(
                    "expected {} cells for {width}x{height}, got {}",
                    width * height,
                    cells.len()
                ),
            ));
        }
        for (i, c) in cells.iter().enumerate() {
            if let Some(a) = c {
                if !a.is_finite() || a.abs() > PI {
                    return Err(Error::validation(
                        "cells",
                        format!("cell {i} angle {a} outside [-pi, pi]"),
                    ));
                }
            }
        }
        Ok(VectorField {
            width,
            height,
            cells,
        })
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn height(&self) -> usize {
        self.height
    }

    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn cells(&self) -> &[Option<f64>] {
        &self.cells
    }

    #[inline]
    pub fn get(&self, x: usize, y: usize) -> Option<f64> {
        self.cells[y * self.width + x]
    }

    /// Stores `angle`, wrapped into `(-pi, pi]`.
    #[inline]
    pub fn set(&mut self, x: usize, y: usize, angle: Option<f64>) {
        self.cells[y * self.width + x] = angle.map(wrap_angle);
    }

    pub fn defined_count(&self) -> usize {
        self.cells.iter().filter(|c| c.is_some()).count()
    }

    pub fn nd_fraction(&self) -> f64 {
        if self.cells.is_empty() {
            return 0.0;
        }
        1.0 - self.defined_count() as f64 / self.cells.len() as f64
    }

    /// Support of the field: sand where a direction is defined.
    pub fn support(&self) -> BinaryGrid {
        BinaryGrid {
            width: self.width,
            height: self.height,
            cells: self.cells.iter().map(|c| u8::from(c.is_some())).collect(),
        }
    }
}

/// Wraps an angle into `(-pi, pi]`.
pub fn wrap_angle(a: f64) -> f64 {
    if a > -PI && a <= PI {
        return a;
    }
    let w = (a + PI).rem_euclid(2.0 * PI) - PI;
    if w <= -PI {
        w + 2.0 * PI
    } else {
        w
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ascii_rows_are_flipped() {
        let g = BinaryGrid::from_ascii(
            "#.
             .#",
        )
        .unwrap();
        assert!(g.is_sand(0, 1));
        assert!(g.is_sand(1, 0));
        assert!(!g.is_sand(0, 0));
    }

    #[test]
    fn rejects_non_binary_cells() {
        assert!(BinaryGrid::from_cells(2, 1, vec![0, 2]).is_err());
        assert!(BinaryGrid::from_cells(2, 2, vec![0, 1]).is_err());
    }

    #[test]
    fn field_rejects_out_of_range_angles() {
        assert!(VectorField::from_cells(1, 1, vec![Some(4.0)]).is_err());
        assert!(VectorField::from_cells(1, 1, vec![Some(f64::NAN)]).is_err());
        assert!(VectorField::from_cells(1, 1, vec![Some(-PI)]).is_ok());
    }

    #[test]
    fn wrap_angle_range() {
        assert_eq!(wrap_angle(0.5), 0.5);
        assert_eq!(wrap_angle(PI), PI);
        assert!((wrap_angle(-PI) - PI).abs() < 1e-15);
        assert!((wrap_angle(3.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
        assert!((wrap_angle(-5.0 * PI / 2.0) + PI / 2.0).abs() < 1e-12);
    }

    #[test]
    fn difference_and_support() {
        let a = BinaryGrid::from_ascii("##").unwrap();
        let b = BinaryGrid::from_ascii("#.").unwrap();
        assert_eq!(a.difference(&b), BinaryGrid::from_ascii(".#").unwrap());
        let mut f = VectorField::new(2, 1);
        f.set(1, 0, Some(0.3));
        assert_eq!(f.support(), BinaryGrid::from_ascii(".#").unwrap());
        assert!((f.nd_fraction() - 0.5).abs() < 1e-15);
    }
}
