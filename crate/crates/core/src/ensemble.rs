//! Statistics across an ensemble of realizations.

use crate::error::{Error, Result};
use crate::grid::BinaryGrid;
use crate::morphology::{connected_components, Connectivity};

/// Per-cell sand frequency over an ensemble.
#[derive(Clone, Debug, PartialEq)]
pub struct EtypeMap {
    pub width: usize,
    pub height: usize,
    pub values: Vec<f64>,
    pub count: usize,
}

impl EtypeMap {
    pub fn get(&self, x: usize, y: usize) -> f64 {
        self.values[y * self.width + x]
    }

    /// Grayscale rendering, bottom row first: frequency `v` becomes
    /// `255 * (1 - v)`, so sand-always cells are black.
    pub fn to_gray(&self) -> Vec<u8> {
        self.values
            .iter()
            .map(|v| (255.0 * (1.0 - v)).round() as u8)
            .collect()
    }
}

fn check_dims(grids: &[&BinaryGrid]) -> Result<(usize, usize)> {
    let dims = grids
        .first()
        .ok_or_else(|| Error::validation("realizations", "at least one realization is required"))?
        .dims();
    for g in grids {
        if g.dims() != dims {
            return Err(Error::DimensionMismatch {
                expected: dims,
                found: g.dims(),
            });
        }
    }
    Ok(dims)
}

pub fn etype(realizations: &[BinaryGrid]) -> Result<EtypeMap> {
    let refs: Vec<&BinaryGrid> = realizations.iter().collect();
    let (width, height) = check_dims(&refs)?;
    let mut sums = vec![0usize; width * height];
    for g in realizations {
        for (s, &c) in sums.iter_mut().zip(g.cells()) {
            *s += c as usize;
        }
    }
    let count = realizations.len();
    Ok(EtypeMap {
        width,
        height,
        values: sums.iter().map(|&s| s as f64 / count as f64).collect(),
        count,
    })
}

/// Connectivity figures of one grid.
#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityRow {
    /// 8-connected sand components.
    pub components: usize,
    /// Share of the sand held by the largest component (0 without sand).
    pub largest_fraction: f64,
    pub sand_fraction: f64,
}

impl ConnectivityRow {
    pub fn of(grid: &BinaryGrid) -> Self {
        let comps = connected_components(grid, Connectivity::Eight);
        let sand = grid.sand_count();
        let largest = comps.sizes().into_iter().max().unwrap_or(0);
        let cells = grid.cells().len();
        ConnectivityRow {
            components: comps.count,
            largest_fraction: if sand == 0 {
                0.0
            } else {
                largest as f64 / sand as f64
            },
            sand_fraction: if cells == 0 {
                0.0
            } else {
                sand as f64 / cells as f64
            },
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConnectivityReport {
    pub training: ConnectivityRow,
    pub realizations: Vec<ConnectivityRow>,
    /// Median of realization component count over the training count.
    pub median_ratio: f64,
}

impl ConnectivityReport {
    /// CSV with columns `realization,components,largest_fraction,sand_fraction`;
    /// the training image is the row labelled `training`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("realization,components,largest_fraction,sand_fraction\n");
        let mut row = |label: &str, r: &ConnectivityRow| {
            out.push_str(&format!(
                "{label},{},{:.6},{:.6}\n",
                r.components, r.largest_fraction, r.sand_fraction
            ));
        };
        row("training", &self.training);
        for (i, r) in self.realizations.iter().enumerate() {
            row(&i.to_string(), r);
        }
        out
    }
}

fn median(mut xs: Vec<f64>) -> f64 {
    if xs.is_empty() {
        return f64::NAN;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    }
}

/// Component counts and largest-component shares of every realization next to
/// the training image. A training image without sand has count 0; ratios
/// against it are taken relative to 1.
pub fn connectivity_report(
    realizations: &[BinaryGrid],
    training: &BinaryGrid,
) -> Result<ConnectivityReport> {
    let refs: Vec<&BinaryGrid> = std::iter::once(training).chain(realizations).collect();
    check_dims(&refs)?;
    let training = ConnectivityRow::of(training);
    let rows: Vec<ConnectivityRow> = realizations.iter().map(ConnectivityRow::of).collect();
    let base = training.components.max(1) as f64;
    let median_ratio = median(rows.iter().map(|r| r.components as f64 / base).collect());
    Ok(ConnectivityReport {
        training,
        realizations: rows,
        median_ratio,
    })
}

/// Mean pairwise Hamming fraction between facies grids over the cells outside
/// the seed (bottom `seed_rows` rows and left `seed_cols` columns).
pub fn variability(realizations: &[BinaryGrid], seed_rows: usize, seed_cols: usize) -> Result<f64> {
    if realizations.len() < 2 {
        return Err(Error::validation(
            "realizations",
            format!("variability needs at least 2, got {}", realizations.len()),
        ));
    }
    let refs: Vec<&BinaryGrid> = realizations.iter().collect();
    let (w, h) = check_dims(&refs)?;
    let free: Vec<usize> = (0..w * h)
        .filter(|&i| i / w >= seed_rows && i % w >= seed_cols)
        .collect();
    if free.is_empty() {
        return Err(Error::validation("seed", "the seed covers the whole grid"));
    }
    let mut total = 0.0;
    let mut pairs = 0usize;
    for (i, a) in realizations.iter().enumerate() {
        for b in &realizations[i + 1..] {
            let diff = free
                .iter()
                .filter(|&&c| a.cells()[c] != b.cells()[c])
                .count();
            total += diff as f64 / free.len() as f64;
            pairs += 1;
        }
    }
    Ok(total / pairs as f64)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn checker(w: usize, h: usize, phase: usize) -> BinaryGrid {
        BinaryGrid::from_fn(w, h, |x, y| (x + y + phase).is_multiple_of(2))
    }

    #[test]
    fn etype_of_copies_is_the_grid() {
        let g = checker(5, 4, 0);
        let e = etype(&[g.clone(), g.clone(), g.clone()]).unwrap();
        assert_eq!(e.count, 3);
        for (v, &c) in e.values.iter().zip(g.cells()) {
            assert_eq!(*v, c as f64);
        }
    }

    #[test]
    fn complementary_pair_gives_half() {
        let e = etype(&[checker(4, 4, 0), checker(4, 4, 1)]).unwrap();
        assert!(e.values.iter().all(|&v| v == 0.5));
        assert!(e.to_gray().iter().all(|&p| p == 128));
    }

    #[test]
    fn etype_guards() {
        assert!(etype(&[]).is_err());
        assert!(matches!(
            etype(&[checker(4, 4, 0), checker(4, 5, 0)]),
            Err(Error::DimensionMismatch { .. })
        ));
    }

    #[test]
    fn connectivity_ratios() {
        let training = BinaryGrid::from_ascii(
            "#####
             .....
             .....",
        )
        .unwrap();
        let three = BinaryGrid::from_ascii(
            "#.#.#
             .....
             .....",
        )
        .unwrap();
        let r = connectivity_report(&[training.clone(), training.clone()], &training).unwrap();
        assert_eq!(r.median_ratio, 1.0);
        assert_eq!(r.training.components, 1);
        assert_eq!(r.training.largest_fraction, 1.0);
        assert!((r.training.sand_fraction - 5.0 / 15.0).abs() < 1e-15);
        let r = connectivity_report(&[three], &training).unwrap();
        assert_eq!(r.median_ratio, 3.0);
        assert!((r.realizations[0].largest_fraction - 1.0 / 3.0).abs() < 1e-15);
        let csv = r.to_csv();
        assert!(csv.starts_with("realization,components,largest_fraction,sand_fraction\ntraining,1,"));
        assert_eq!(csv.lines().count(), 3);
    }

    #[test]
    fn variability_cases() {
        let a = checker(6, 6, 0);
        assert_eq!(variability(&[a.clone(), a.clone()], 2, 2).unwrap(), 0.0);
        assert_eq!(variability(&[a.clone(), checker(6, 6, 1)], 2, 2).unwrap(), 1.0);
        assert!(variability(std::slice::from_ref(&a), 2, 2).is_err());
        // differences inside the seed are ignored
        let mut b = a.clone();
        b.set(0, 5, !a.is_sand(0, 5));
        b.set(5, 1, !a.is_sand(5, 1));
        assert_eq!(variability(&[a.clone(), b.clone()], 2, 2).unwrap(), 0.0);
        let c = checker(6, 6, 1);
        assert_eq!(
            variability(&[a.clone(), b, c.clone()], 2, 2).unwrap(),
            variability(&[c, a.clone(), a], 2, 2).unwrap()
        );
    }
}
