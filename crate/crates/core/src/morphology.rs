//! Binary erosion, contours and the contour-shell decomposition of a
//! training image.
//!
//! Out-of-bounds cells count as background, so sand touching the image border
//! always lies on the contour.

use std::collections::VecDeque;

use crate::config::ErosionStop;
use crate::error::{Error, Result};
use crate::grid::BinaryGrid;

/// Set of `(dx, dy)` offsets containing the origin.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct StructuringElement {
    offsets: Vec<(i64, i64)>,
}

impl StructuringElement {
    pub fn new(mut offsets: Vec<(i64, i64)>) -> Result<Self> {
        offsets.sort_unstable();
        offsets.dedup();
        if !offsets.contains(&(0, 0)) {
            return Err(Error::validation(
                "structuring_element",
                "must contain the origin",
            ));
        }
        Ok(StructuringElement { offsets })
    }

    /// 3x3 cross: origin plus the four axis neighbours.
    pub fn cross() -> Self {
        StructuringElement {
            offsets: vec![(-1, 0), (0, -1), (0, 0), (0, 1), (1, 0)],
        }
    }

    /// Full 3x3 square.
    pub fn square() -> Self {
        let offsets = (-1..=1)
            .flat_map(|dx| (-1..=1).map(move |dy| (dx, dy)))
            .collect();
        StructuringElement { offsets }
    }

    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }
}

impl Default for StructuringElement {
    fn default() -> Self {
        Self::cross()
    }
}

/// Cell `p` survives iff every `p + o` is in bounds and sand.
pub fn erode(grid: &BinaryGrid, selem: &StructuringElement) -> BinaryGrid {
    let (w, h) = grid.dims();
    let offsets = selem.offsets();
    BinaryGrid::from_fn(w, h, |x, y| {
        grid.is_sand(x, y)
            && offsets
                .iter()
                .all(|&(dx, dy)| grid.is_sand_at(x as i64 + dx, y as i64 + dy))
    })
}

/// Sand cells removed by one erosion.
pub fn contour(grid: &BinaryGrid, selem: &StructuringElement) -> BinaryGrid {
    grid.difference(&erode(grid, selem))
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Connectivity {
    Four,
    Eight,
}

impl Connectivity {
    pub fn neighbors(&self) -> &'static [(i64, i64)] {
        const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
        const EIGHT: [(i64, i64); 8] = [
            (1, 0),
            (1, 1),
            (0, 1),
            (-1, 1),
            (-1, 0),
            (-1, -1),
            (0, -1),
            (1, -1),
        ];
        match self {
            Connectivity::Four => &FOUR,
            Connectivity::Eight => &EIGHT,
        }
    }
}

/// Connected sand components.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Components {
    pub count: usize,
    /// Per-cell label, `0` for background, components numbered from 1 in
    /// scan order of their first cell.
    pub labels: Vec<u32>,
}

impl Components {
    /// Cell count of each component, indexed by `label - 1`.
    pub fn sizes(&self) -> Vec<usize> {
        let mut sizes = vec![0; self.count];
        for &l in &self.labels {
            if l > 0 {
                sizes[l as usize - 1] += 1;
            }
        }
        sizes
    }
}

/// Breadth-first flood labelling.
pub fn connected_components(grid: &BinaryGrid, connectivity: Connectivity) -> Components {
    let (w, h) = grid.dims();
    let mut labels = vec![0u32; w * h];
    let mut count = 0u32;
    let mut queue = VecDeque::new();
    for start in 0..w * h {
        if grid.cells()[start] == 0 || labels[start] != 0 {
            continue;
        }
        count += 1;
        labels[start] = count;
        queue.push_back(start);
        while let Some(i) = queue.pop_front() {
            let (x, y) = ((i % w) as i64, (i / w) as i64);
            for &(dx, dy) in connectivity.neighbors() {
                let (nx, ny) = (x + dx, y + dy);
                if grid.is_sand_at(nx, ny) {
                    let j = ny as usize * w + nx as usize;
                    if labels[j] == 0 {
                        labels[j] = count;
                        queue.push_back(j);
                    }
                }
            }
        }
    }
    Components {
        count: count as usize,
        labels,
    }
}

/// Successive erosions `T_0 .. T_k` of a training image together with the
/// contours `C_i = T_i - T_{i+1}`.
#[derive(Clone, Debug, PartialEq)]
pub struct DecompositionSequence {
    erosions: Vec<BinaryGrid>,
    contours: Vec<BinaryGrid>,
}

impl DecompositionSequence {
    /// `T_0 .. T_k`.
    pub fn erosions(&self) -> &[BinaryGrid] {
        &self.erosions
    }

    /// `C_0 .. C_{k-1}`.
    pub fn contours(&self) -> &[BinaryGrid] {
        &self.contours
    }

    /// Residual `T_k`.
    pub fn residual(&self) -> &BinaryGrid {
        self.erosions.last().expect("sequence holds T_0")
    }

    pub fn input(&self) -> &BinaryGrid {
        &self.erosions[0]
    }

    /// Number of erosions applied.
    pub fn depth(&self) -> usize {
        self.contours.len()
    }

    /// Union of all contours and the residual, with a flag that is false if
    /// any cell was claimed twice.
    pub fn reconstruct(&self) -> (BinaryGrid, bool) {
        let (w, h) = self.input().dims();
        let mut hits = vec![0u32; w * h];
        for part in self.contours.iter().chain(std::iter::once(self.residual())) {
            for (i, &c) in part.cells().iter().enumerate() {
                hits[i] += u32::from(c);
            }
        }
        let disjoint = hits.iter().all(|&n| n <= 1);
        let cells = hits.iter().map(|&n| u8::from(n > 0)).collect();
        (
            BinaryGrid::from_cells(w, h, cells).expect("binary by construction"),
            disjoint,
        )
    }
}

/// Erodes repeatedly until `stop` fires, recording each contour shell.
///
/// Stops early once the residual becomes empty or an erosion removes nothing
/// (possible with elements that do not reach past the origin), since further
/// erosions would only append empty contours.
pub fn decompose(
    grid: &BinaryGrid,
    selem: &StructuringElement,
    stop: ErosionStop,
) -> Result<DecompositionSequence> {
    let total = grid.sand_count();
    if total == 0 {
        return Err(Error::EmptyInput("image has no sand cells".into()));
    }
    let mut erosions = vec![grid.clone()];
    let mut contours = Vec::new();
    loop {
        let current = erosions.last().expect("non-empty");
        if current.is_empty() {
            break;
        }
        if let ErosionStop::FixedK(k) = stop {
            if contours.len() >= k {
                break;
            }
        }
        let next = erode(current, selem);
        if next.sand_count() == current.sand_count() {
            break;
        }
        let proceed = match stop {
            ErosionStop::FixedK(_) => true,
            ErosionStop::ResidualFraction(rho) => next.sand_count() as f64 >= rho * total as f64,
            ErosionStop::MaxComponents(c) => {
                connected_components(&next, Connectivity::Eight).count <= c
            }
        };
        if !proceed {
            break;
        }
        contours.push(current.difference(&next));
        erosions.push(next);
    }
    Ok(DecompositionSequence { erosions, contours })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn full(w: usize, h: usize) -> BinaryGrid {
        BinaryGrid::from_fn(w, h, |_, _| true)
    }

    #[test]
    fn selem_requires_origin() {
        assert!(StructuringElement::new(vec![(1, 0)]).is_err());
        assert_eq!(StructuringElement::new(vec![(0, 0), (0, 0)]).unwrap().offsets().len(), 1);
        assert_eq!(StructuringElement::square().offsets().len(), 9);
    }

    #[test]
    fn erode_empty_is_empty() {
        let g = BinaryGrid::new(5, 4);
        assert!(erode(&g, &StructuringElement::cross()).is_empty());
        assert!(erode(&g, &StructuringElement::square()).is_empty());
        assert!(contour(&g, &StructuringElement::cross()).is_empty());
    }

    #[test]
    fn cross_erosion_of_3x3_keeps_center() {
        let e = erode(&full(3, 3), &StructuringElement::cross());
        assert_eq!(e.sand_count(), 1);
        assert!(e.is_sand(1, 1));
        let c = contour(&full(3, 3), &StructuringElement::cross());
        assert_eq!(c.sand_count(), 8);
        assert!(!c.is_sand(1, 1));
    }

    #[test]
    fn singleton_is_its_own_contour() {
        let mut g = BinaryGrid::new(5, 5);
        g.set(2, 2, true);
        assert_eq!(contour(&g, &StructuringElement::cross()), g);
        assert_eq!(contour(&g, &StructuringElement::square()), g);
    }

    #[test]
    fn diagonal_pair_components() {
        let g = BinaryGrid::from_ascii(
            ".#
             #.",
        )
        .unwrap();
        assert_eq!(connected_components(&g, Connectivity::Four).count, 2);
        let eight = connected_components(&g, Connectivity::Eight);
        assert_eq!(eight.count, 1);
        assert_eq!(eight.sizes(), vec![2]);
        assert_eq!(connected_components(&BinaryGrid::new(4, 4), Connectivity::Eight).count, 0);
    }

    #[test]
    fn labels_are_dense_in_scan_order() {
        let g = BinaryGrid::from_ascii(
            "#.#
             ...
             #.#",
        )
        .unwrap();
        let c = connected_components(&g, Connectivity::Eight);
        assert_eq!(c.count, 4);
        // bottom-left first
        assert_eq!(c.labels[0], 1);
        assert_eq!(c.labels[2], 2);
        assert_eq!(c.labels[6], 3);
        assert_eq!(c.labels[8], 4);
    }

    #[test]
    fn fixed_zero_is_identity() {
        let g = full(4, 4);
        let seq = decompose(&g, &StructuringElement::cross(), ErosionStop::FixedK(0)).unwrap();
        assert_eq!(seq.depth(), 0);
        assert_eq!(seq.residual(), &g);
    }

    #[test]
    fn fixed_k_on_block() {
        let g = full(9, 9);
        let seq = decompose(&g, &StructuringElement::square(), ErosionStop::FixedK(3)).unwrap();
        assert_eq!(seq.depth(), 3);
        assert_eq!(seq.contours()[0].sand_count(), 32);
        assert_eq!(seq.contours()[1].sand_count(), 24);
        assert_eq!(seq.contours()[2].sand_count(), 16);
        assert_eq!(seq.residual().sand_count(), 9);
        let (union, disjoint) = seq.reconstruct();
        assert!(disjoint);
        assert_eq!(union, g);
    }

    #[test]
    fn fixed_k_stops_when_eroded_away() {
        let g = full(3, 3);
        let seq = decompose(&g, &StructuringElement::square(), ErosionStop::FixedK(5)).unwrap();
        assert_eq!(seq.depth(), 2);
        assert!(seq.residual().is_empty());
    }

    #[test]
    fn residual_fraction_stops_before_threshold() {
        // 9x9 square selem: sand 81 -> 49 -> 25 -> 9 -> 1
        let g = full(9, 9);
        let seq = decompose(
            &g,
            &StructuringElement::square(),
            ErosionStop::ResidualFraction(0.2),
        )
        .unwrap();
        // 25/81 = 0.31 >= 0.2, 9/81 = 0.11 < 0.2
        assert_eq!(seq.residual().sand_count(), 25);
    }

    #[test]
    fn max_components_stops_before_split() {
        // dumbbell: two 5x5 blocks joined by a 1-wide bridge
        let g = BinaryGrid::from_ascii(
            "#####...#####
             #####...#####
             #############
             #####...#####
             #####...#####",
        )
        .unwrap();
        let seq = decompose(&g, &StructuringElement::cross(), ErosionStop::MaxComponents(1))
            .unwrap();
        assert_eq!(seq.depth(), 0);
        let seq = decompose(&g, &StructuringElement::cross(), ErosionStop::MaxComponents(2))
            .unwrap();
        assert!(seq.depth() >= 1);
        assert_eq!(connected_components(&seq.erosions()[1], Connectivity::Eight).count, 2);
        for t in seq.erosions() {
            assert!(connected_components(t, Connectivity::Eight).count <= 2);
        }
    }

    #[test]
    fn origin_only_element_terminates() {
        let g = full(4, 4);
        let origin = StructuringElement::new(vec![(0, 0)]).unwrap();
        let seq = decompose(&g, &origin, ErosionStop::ResidualFraction(0.1)).unwrap();
        assert_eq!(seq.depth(), 0);
        assert_eq!(seq.residual(), &g);
    }

    #[test]
    fn empty_input_is_an_error() {
        assert!(matches!(
            decompose(&BinaryGrid::new(3, 3), &StructuringElement::cross(), ErosionStop::FixedK(1)),
            Err(Error::EmptyInput(_))
        ));
    }
}
