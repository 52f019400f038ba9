//! Training vector field construction.
//!
//! The training image is decomposed into contour shells. On each shell, a cell
//! takes two random walks of `step_n` and `step_m` unit steps, every step
//! moving to an unvisited 8-neighbour on the same shell whose direction lies in
//! the directional interval. The cell's vector is the mean of the two secant
//! angles. Cells whose walks cannot complete, and the residual core, are then
//! filled by repeated neighbourhood averaging.

use std::collections::HashSet;

use rand::Rng;

use crate::config::SimulationConfig;
use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, Cell, VectorField};
use crate::interval::DirectionalInterval;
use crate::morphology::{decompose, DecompositionSequence};
use crate::rng::{stream_rng, Domain};

/// Neighbour order used when enumerating walk candidates.
const NEIGHBORS: [(i64, i64); 8] = [
    (1, 0),
    (1, 1),
    (0, 1),
    (-1, 1),
    (-1, 0),
    (-1, -1),
    (0, -1),
    (1, -1),
];

/// Position and visited set of one walk along a contour.
#[derive(Clone, Debug)]
pub struct WalkState {
    current: Cell,
    visited: HashSet<Cell>,
}

impl WalkState {
    pub fn new(start: Cell) -> Self {
        WalkState {
            current: start,
            visited: HashSet::from([start]),
        }
    }

    pub fn current(&self) -> Cell {
        self.current
    }

    pub fn visited(&self) -> &HashSet<Cell> {
        &self.visited
    }

    /// Moves to `next` and marks it visited.
    pub fn advance(&mut self, next: Cell) {
        self.visited.insert(next);
        self.current = next;
    }
}

/// One unit step: a uniformly random unvisited 8-neighbour on `contour` whose
/// direction from the current cell lies in `di`, or `None` if there is none.
pub fn walk_step<R: Rng + ?Sized>(
    contour: &BinaryGrid,
    state: &WalkState,
    di: &DirectionalInterval,
    rng: &mut R,
) -> Option<Cell> {
    let (px, py) = (state.current.0 as i64, state.current.1 as i64);
    let mut candidates = [(0usize, 0usize); 8];
    let mut n = 0;
    for &(dx, dy) in &NEIGHBORS {
        let (qx, qy) = (px + dx, py + dy);
        if !contour.is_sand_at(qx, qy) {
            continue;
        }
        let q = (qx as usize, qy as usize);
        if state.visited.contains(&q) {
            continue;
        }
        if di.contains((dy as f64).atan2(dx as f64)) {
            candidates[n] = q;
            n += 1;
        }
    }
    match n {
        0 => None,
        1 => Some(candidates[0]),
        _ => Some(candidates[rng.gen_range(0..n)]),
    }
}

/// Direction of the segment `p -> q`, in `(-pi, pi]`.
pub fn secant_angle(p: Cell, q: Cell) -> Result<f64> {
    if p == q {
        return Err(Error::DegenerateSegment(p.0 as i64, p.1 as i64));
    }
    let dx = q.0 as f64 - p.0 as f64;
    let dy = q.1 as f64 - p.1 as f64;
    Ok(dy.atan2(dx))
}

/// Walks `steps` unit steps from `start`, returning the end cell if every
/// step succeeds.
pub fn walk<R: Rng + ?Sized>(
    contour: &BinaryGrid,
    start: Cell,
    steps: usize,
    di: &DirectionalInterval,
    rng: &mut R,
) -> Option<Cell> {
    let mut state = WalkState::new(start);
    for _ in 0..steps {
        let next = walk_step(contour, &state, di, rng)?;
        state.advance(next);
    }
    Some(state.current)
}

/// Vector at `p`: mean of the secant directions to the ends of two
/// independent walks of `step_n` and `step_m` steps, or `None` if either walk
/// gets stuck.
pub fn vector_at<R: Rng + ?Sized>(
    contour: &BinaryGrid,
    p: Cell,
    step_n: usize,
    step_m: usize,
    di: &DirectionalInterval,
    rng: &mut R,
) -> Option<f64> {
    let q_n = walk(contour, p, step_n, di, rng)?;
    let q_m = walk(contour, p, step_m, di, rng)?;
    let a_n = di.representative(secant_angle(p, q_n).ok()?);
    let a_m = di.representative(secant_angle(p, q_m).ok()?);
    Some(0.5 * (a_n + a_m))
}

/// Assigns vectors on every contour shell. Residual cells, failed contour
/// cells and background stay ND.
///
/// Each cell draws from its own random stream keyed by `(rng_seed, cell)`,
/// so the result does not depend on the visiting order.
pub fn build_contour_field(seq: &DecompositionSequence, cfg: &SimulationConfig) -> VectorField {
    let (w, h) = seq.input().dims();
    let mut field = VectorField::new(w, h);
    for shell in seq.contours() {
        for p in shell.sand_cells() {
            let mut rng = stream_rng(cfg.rng_seed, Domain::Tvf, 0, (p.1 * w + p.0) as u64);
            let v = vector_at(shell, p, cfg.step_n, cfg.step_m, &cfg.di, &mut rng);
            field.set(p.0, p.1, v);
        }
    }
    field
}

/// Outcome of [`interpolate`].
#[derive(Clone, Debug, PartialEq)]
pub struct Interpolation {
    pub field: VectorField,
    /// Passes that assigned at least one cell.
    pub passes: usize,
    /// Radius in effect when the last cell was filled.
    pub final_radius: usize,
    /// Cells that received the interval midpoint because no defined vector
    /// was reachable.
    pub fallback_cells: usize,
}

/// Fills every ND reservoir cell with the mean of the defined vectors within
/// Chebyshev distance `radius`.
///
/// Each pass reads the field as it stood at the start of the pass. A pass
/// that fills nothing widens the radius by one; once the radius exceeds the
/// grid size, any cells still ND receive the interval midpoint.
pub fn interpolate(
    field: &VectorField,
    reservoir: &BinaryGrid,
    radius: usize,
    di: &DirectionalInterval,
) -> Result<Interpolation> {
    if field.dims() != reservoir.dims() {
        return Err(Error::DimensionMismatch {
            expected: reservoir.dims(),
            found: field.dims(),
        });
    }
    let (w, h) = field.dims();
    let mut current = field.clone();
    let mut pending: Vec<Cell> = reservoir
        .sand_cells()
        .filter(|&(x, y)| current.get(x, y).is_none())
        .collect();
    let mut radius = radius.max(1);
    let mut passes = 0;
    let limit = w.max(h);

    while !pending.is_empty() {
        if radius > limit {
            let mid = di.midpoint();
            let fallback_cells = pending.len();
            for &(x, y) in &pending {
                current.set(x, y, Some(mid));
            }
            return Ok(Interpolation {
                field: current,
                passes,
                final_radius: radius,
                fallback_cells,
            });
        }
        let r = radius as i64;
        let mut updates = Vec::new();
        let mut still = Vec::new();
        for &(x, y) in &pending {
            let (mut sum, mut n) = (0.0, 0usize);
            let y0 = (y as i64 - r).max(0) as usize;
            let y1 = (y as i64 + r).min(h as i64 - 1) as usize;
            let x0 = (x as i64 - r).max(0) as usize;
            let x1 = (x as i64 + r).min(w as i64 - 1) as usize;
            for ny in y0..=y1 {
                for nx in x0..=x1 {
                    if let Some(a) = current.get(nx, ny) {
                        sum += di.representative(a);
                        n += 1;
                    }
                }
            }
            if n > 0 {
                updates.push(((x, y), sum / n as f64));
            } else {
                still.push((x, y));
            }
        }
        if updates.is_empty() {
            radius += 1;
            continue;
        }
        for ((x, y), a) in updates {
            current.set(x, y, Some(a));
        }
        passes += 1;
        pending = still;
    }
    Ok(Interpolation {
        field: current,
        passes,
        final_radius: radius,
        fallback_cells: 0,
    })
}

/// Diagnostics of a full TVF build.
#[derive(Clone, Debug)]
pub struct TvfBuild {
    pub field: VectorField,
    pub decomposition: DecompositionSequence,
    /// Sand cells with a vector before interpolation.
    pub assigned_before_interpolation: usize,
    pub sand_cells: usize,
    pub interpolation_passes: usize,
    pub fallback_cells: usize,
}

impl TvfBuild {
    /// Fraction of sand cells assigned directly from contour walks.
    pub fn coverage(&self) -> f64 {
        self.assigned_before_interpolation as f64 / self.sand_cells as f64
    }
}

/// Decomposition, contour vectors and interpolation, with diagnostics.
pub fn build_tvf_with_stats(grid: &BinaryGrid, cfg: &SimulationConfig) -> Result<TvfBuild> {
    cfg.validate()?;
    let seq = decompose(grid, &cfg.structuring_element.element(), cfg.erosion_stop)?;
    let partial = build_contour_field(&seq, cfg);
    let assigned = partial.defined_count();
    let interp = interpolate(&partial, grid, cfg.interp_radius, &cfg.di)?;
    Ok(TvfBuild {
        field: interp.field,
        decomposition: seq,
        assigned_before_interpolation: assigned,
        sand_cells: grid.sand_count(),
        interpolation_passes: interp.passes,
        fallback_cells: interp.fallback_cells,
    })
}

/// Training vector field of `grid`: defined exactly on the sand cells, every
/// angle inside `cfg.di`.
pub fn build_tvf(grid: &BinaryGrid, cfg: &SimulationConfig) -> Result<VectorField> {
    build_tvf_with_stats(grid, cfg).map(|b| b.field)
}
