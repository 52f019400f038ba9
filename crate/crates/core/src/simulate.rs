//! Realization engine.
//!
//! The bottom `r` rows and left `t` columns of the training vector field are
//! copied into an empty grid as a seed. The remaining cells are visited
//! bottom-up, left to right. At each cell the already-simulated template
//! values form a data event; the pattern base is traversed in a fresh random
//! order until a pattern within distance `accept_a` turns up, falling back to
//! the closest pattern, and that pattern's center value is pasted.
//!
//! Near the right border some template offsets fall outside the grid. Those
//! offsets are dropped from the comparison, and the candidate set is extended
//! with the partially out-of-bounds patterns anchored in the rightmost `w`
//! columns. A candidate is only compared with data events whose surviving
//! offsets it fully covers.

use rand::Rng;
use rayon::prelude::*;

use crate::config::{Normalization, SimulationConfig};
use crate::error::{Error, Result};
use crate::grid::{BinaryGrid, Cell, VectorField};
use crate::pattern::{
    combine, dist_loc, extract_patterns, make_template, normalize_tvf, pattern_at, tvf_raw_sum,
    Pattern, PatternBase, Template,
};
use crate::rng::{stream_rng, Domain, GENERATOR};

/// State of one cell of the simulation grid.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum SimCell {
    Unsimulated,
    /// Simulated value; `None` is ND (background).
    Value(Option<f64>),
}

/// Partially simulated grid with a scan cursor.
#[derive(Clone, Debug)]
pub struct SimGrid {
    width: usize,
    height: usize,
    cells: Vec<SimCell>,
    cursor: usize,
}

impl SimGrid {
    pub fn dims(&self) -> (usize, usize) {
        (self.width, self.height)
    }

    pub fn get(&self, x: usize, y: usize) -> SimCell {
        self.cells[y * self.width + x]
    }

    pub fn cells(&self) -> &[SimCell] {
        &self.cells
    }

    /// Scan index of the next unsimulated cell, or `width * height` when
    /// complete.
    pub fn cursor(&self) -> usize {
        self.cursor
    }

    pub fn simulated_count(&self) -> usize {
        self.cells
            .iter()
            .filter(|c| matches!(c, SimCell::Value(_)))
            .count()
    }

    fn advance_cursor(&mut self) {
        while self.cursor < self.cells.len() && self.cells[self.cursor] != SimCell::Unsimulated {
            self.cursor += 1;
        }
    }

    /// Converts a fully simulated grid into a vector field.
    fn into_field(self) -> Result<VectorField> {
        let cells = self
            .cells
            .iter()
            .enumerate()
            .map(|(i, c)| match c {
                SimCell::Value(v) => Ok(*v),
                SimCell::Unsimulated => Err(Error::validation(
                    "simulation",
                    format!("cell {i} left unsimulated"),
                )),
            })
            .collect::<Result<Vec<_>>>()?;
        VectorField::from_cells(self.width, self.height, cells)
    }
}

/// Copies the bottom `r` rows and left `t` columns of `tvf` (ND included)
/// into an otherwise unsimulated grid.
pub fn init_grid(tvf: &VectorField, r: usize, t: usize, template: &Template) -> Result<SimGrid> {
    let (w, h) = tvf.dims();
    if r < template.rows() {
        return Err(Error::validation(
            "seed_rows_r",
            format!("{r} rows cannot inform a template {} rows deep", template.rows()),
        ));
    }
    if t < template.half_width() {
        return Err(Error::validation(
            "seed_cols_t",
            format!(
                "{t} columns cannot inform a template reaching {} cells left",
                template.half_width()
            ),
        ));
    }
    if r >= h {
        return Err(Error::validation(
            "seed_rows_r",
            format!("{r} must be less than the grid height {h}"),
        ));
    }
    if t >= w {
        return Err(Error::validation(
            "seed_cols_t",
            format!("{t} must be less than the grid width {w}"),
        ));
    }
    let mut cells = vec![SimCell::Unsimulated; w * h];
    for y in 0..h {
        for x in 0..w {
            if y < r || x < t {
                cells[y * w + x] = SimCell::Value(tvf.get(x, y));
            }
        }
    }
    let mut grid = SimGrid {
        width: w,
        height: h,
        cells,
        cursor: 0,
    };
    grid.advance_cursor();
    Ok(grid)
}

/// Parameters of the pattern distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DistanceParams {
    pub beta: f64,
    pub accept_a: f64,
    pub b_param: f64,
    pub normalization: Normalization,
    pub field_dims: (usize, usize),
}

impl DistanceParams {
    pub fn from_config(cfg: &SimulationConfig, field_dims: (usize, usize)) -> Self {
        DistanceParams {
            beta: cfg.beta,
            accept_a: cfg.accept_a,
            b_param: cfg.b_param,
            normalization: cfg.normalization,
            field_dims,
        }
    }
}

/// Template values around the cell being simulated.
#[derive(Clone, Debug, PartialEq)]
pub struct DataEvent {
    pub location: Cell,
    /// One entry per template offset; entries outside `active` are ignored.
    pub values: Vec<Option<f64>>,
    /// Indices of offsets inside the grid, or `None` when all are.
    pub active: Option<Vec<usize>>,
    /// Largest in-bounds rightward offset.
    reach: usize,
}

impl DataEvent {
    /// Event with every offset active, e.g. a stored pattern used as a query.
    pub fn from_pattern(p: &Pattern, template: &Template) -> Self {
        DataEvent {
            location: p.anchor,
            values: p.values.clone(),
            active: None,
            reach: template.half_width(),
        }
    }

    fn active_count(&self) -> usize {
        self.active.as_ref().map_or(self.values.len(), Vec::len)
    }

    /// Combined distance to a stored pattern over the active offsets.
    pub fn distance_to(&self, p: &Pattern, params: &DistanceParams) -> f64 {
        let raw = tvf_raw_sum(&self.values, &p.values, params.b_param, self.active.as_deref());
        let d_tvf = normalize_tvf(raw, self.active_count(), params.b_param, params.normalization);
        let d_loc = dist_loc(self.location, p.anchor, params.normalization, params.field_dims);
        combine(params.beta, d_tvf, d_loc)
    }
}

/// Flattened candidate patterns plus the scratch permutation used by the
/// randomized search.
struct Candidates {
    template_len: usize,
    values: Vec<Option<f64>>,
    anchors: Vec<Cell>,
    centers: Vec<Option<f64>>,
    /// Largest in-bounds rightward offset of each candidate.
    reach: Vec<usize>,
}

impl Candidates {
    fn new(patterns: &[Pattern], template: &Template, field_width: usize) -> Self {
        let template_len = template.len();
        let mut values = Vec::with_capacity(patterns.len() * template_len);
        let mut anchors = Vec::with_capacity(patterns.len());
        let mut centers = Vec::with_capacity(patterns.len());
        let mut reach = Vec::with_capacity(patterns.len());
        for p in patterns {
            values.extend_from_slice(&p.values);
            anchors.push(p.anchor);
            centers.push(p.center_value);
            reach.push(template.half_width().min(field_width - 1 - p.anchor.0));
        }
        Candidates {
            template_len,
            values,
            anchors,
            centers,
            reach,
        }
    }

    fn len(&self) -> usize {
        self.anchors.len()
    }

    fn values(&self, k: usize) -> &[Option<f64>] {
        &self.values[k * self.template_len..(k + 1) * self.template_len]
    }

    /// Randomized interval-accept search. `perm` is any arrangement of
    /// `0..len()`; a Fisher-Yates shuffle is drawn lazily on top of it, so the
    /// visiting order is a fresh uniform permutation. Returns the first
    /// candidate with `d <= accept_a`, else the closest, ties going to the
    /// earliest in the permutation.
    fn select<R: Rng + ?Sized>(
        &self,
        event: &DataEvent,
        params: &DistanceParams,
        perm: &mut [u32],
        rng: &mut R,
    ) -> Option<usize> {
        let n = self.len();
        let count = event.active_count();
        let mut best = f64::INFINITY;
        let mut best_k = None;
        for i in 0..n {
            let j = rng.gen_range(i..n);
            perm.swap(i, j);
            let k = perm[i] as usize;
            if self.reach[k] < event.reach {
                continue;
            }
            let d_loc = dist_loc(
                event.location,
                self.anchors[k],
                params.normalization,
                params.field_dims,
            );
            // d >= lower for any d_tvf >= 0
            let lower = combine(params.beta, 0.0, d_loc);
            if lower > params.accept_a && lower >= best {
                continue;
            }
            let d = if params.beta == 0.0 {
                lower
            } else {
                match self.bounded_distance(event, k, count, d_loc, params, best) {
                    Some(d) => d,
                    None => continue,
                }
            };
            if d <= params.accept_a {
                return Some(k);
            }
            if d < best {
                best = d;
                best_k = Some(k);
            }
        }
        best_k
    }

    /// Full distance to candidate `k`, or `None` once a partial sum proves it
    /// can neither be accepted nor beat `best`. Partial sums only grow and
    /// every later operation is monotone, so the cut-off is exact.
    fn bounded_distance(
        &self,
        event: &DataEvent,
        k: usize,
        count: usize,
        d_loc: f64,
        params: &DistanceParams,
        best: f64,
    ) -> Option<f64> {
        const CHECK_EVERY: usize = 8;
        let cand = self.values(k);
        let finish = |raw: f64| {
            combine(
                params.beta,
                normalize_tvf(raw, count, params.b_param, params.normalization),
                d_loc,
            )
        };
        let hopeless = |d: f64| d > params.accept_a && d >= best;
        let mut raw = 0.0;
        let term = |i: usize| {
            let diff = crate::pattern::angle_diff(event.values[i], cand[i], params.b_param);
            diff * diff
        };
        match &event.active {
            None => {
                for (i, _) in cand.iter().enumerate() {
                    raw += term(i);
                    if (i + 1) % CHECK_EVERY == 0 && hopeless(finish(raw)) {
                        return None;
                    }
                }
            }
            Some(idx) => {
                for (n, &i) in idx.iter().enumerate() {
                    raw += term(i);
                    if (n + 1) % CHECK_EVERY == 0 && hopeless(finish(raw)) {
                        return None;
                    }
                }
            }
        }
        Some(finish(raw))
    }
}

/// Selects a pattern of `base` for `event` by randomized interval-accept
/// search with argmin fallback.
pub fn select_pattern<'a, R: Rng + ?Sized>(
    event: &DataEvent,
    base: &'a PatternBase,
    params: &DistanceParams,
    rng: &mut R,
) -> Result<&'a Pattern> {
    if base.is_empty() {
        return Err(Error::validation("pattern_base", "no patterns to select from"));
    }
    let candidates = Candidates::new(&base.patterns, &base.template, base.field_dims.0);
    let mut perm: Vec<u32> = (0..base.len() as u32).collect();
    let k = candidates
        .select(event, params, &mut perm, rng)
        .ok_or_else(|| Error::validation("pattern_base", "no pattern covers the data event"))?;
    Ok(&base.patterns[k])
}

/// Provenance of a realization.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Provenance {
    pub rng_seed: u64,
    pub realization_index: u64,
    pub config_digest: String,
    pub generator: &'static str,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Realization {
    pub field: VectorField,
    /// Sand where the field is defined.
    pub facies: BinaryGrid,
    pub provenance: Provenance,
}

/// Facies of a realization: sand exactly where a direction is defined.
pub fn to_binary(re: &Realization) -> BinaryGrid {
    re.field.support()
}

/// A training vector field prepared for simulation: the pattern base is built
/// once and shared read-only by every realization.
pub struct Simulator {
    tvf: VectorField,
    cfg: SimulationConfig,
    template: Template,
    base: PatternBase,
    candidates: Candidates,
    digest: String,
}

impl Simulator {
    pub fn new(tvf: &VectorField, cfg: &SimulationConfig) -> Result<Self> {
        cfg.validate()?;
        let template = make_template(cfg.template_w, cfg.template_h)?;
        let base = extract_patterns(tvf, &template)?;
        let (w, h) = tvf.dims();
        // anchors in the rightmost w columns, offsets past the edge read ND
        let mut all = base.patterns.clone();
        for y in template.rows()..h {
            for x in (w - template.half_width())..w {
                all.push(pattern_at(tvf, &template, (x, y)));
            }
        }
        let candidates = Candidates::new(&all, &template, w);
        Ok(Simulator {
            tvf: tvf.clone(),
            cfg: cfg.clone(),
            template,
            base,
            candidates,
            digest: cfg.digest(),
        })
    }

    pub fn base(&self) -> &PatternBase {
        &self.base
    }

    pub fn template(&self) -> &Template {
        &self.template
    }

    /// Number of candidates searched per cell (base plus right-border
    /// patterns).
    pub fn candidate_count(&self) -> usize {
        self.candidates.len()
    }

    fn data_event(&self, grid: &SimGrid, u: Cell) -> DataEvent {
        let (w, _) = grid.dims();
        let reach = self.template.half_width().min(w - 1 - u.0);
        let mut values = Vec::with_capacity(self.template.len());
        let mut active = Vec::new();
        let clipped = reach < self.template.half_width();
        for (i, &(dx, dy)) in self.template.offsets().iter().enumerate() {
            let x = u.0 as i64 + dx;
            let y = u.1 as i64 + dy;
            if x >= w as i64 {
                values.push(None);
                continue;
            }
            let v = match grid.get(x as usize, y as usize) {
                SimCell::Value(v) => v,
                SimCell::Unsimulated => unreachable!("template offsets are causal"),
            };
            values.push(v);
            if clipped {
                active.push(i);
            }
        }
        DataEvent {
            location: u,
            values,
            active: clipped.then_some(active),
            reach,
        }
    }

    /// Runs realization `index`.
    pub fn run(&self, index: u64) -> Result<Realization> {
        let mut grid = init_grid(
            &self.tvf,
            self.cfg.seed_rows_r,
            self.cfg.seed_cols_t,
            &self.template,
        )?;
        let (w, _) = grid.dims();
        let params = DistanceParams::from_config(&self.cfg, grid.dims());
        let mut perm: Vec<u32> = (0..self.candidates.len() as u32).collect();
        while grid.cursor < grid.cells.len() {
            let cell = grid.cursor;
            let u = (cell % w, cell / w);
            let event = self.data_event(&grid, u);
            let mut rng = stream_rng(self.cfg.rng_seed, Domain::Simulation, index, cell as u64);
            let k = self
                .candidates
                .select(&event, &params, &mut perm, &mut rng)
                .ok_or_else(|| {
                    Error::validation("pattern_base", format!("no candidate covers cell {u:?}"))
                })?;
            grid.cells[cell] = SimCell::Value(self.candidates.centers[k]);
            grid.advance_cursor();
        }
        let field = grid.into_field()?;
        let facies = field.support();
        Ok(Realization {
            field,
            facies,
            provenance: Provenance {
                rng_seed: self.cfg.rng_seed,
                realization_index: index,
                config_digest: self.digest.clone(),
                generator: GENERATOR,
            },
        })
    }

    /// Runs every index in `indices` on up to `jobs` threads. Output order
    /// follows `indices` and each realization is identical to a sequential
    /// [`run`](Self::run).
    pub fn run_many(&self, indices: &[u64], jobs: usize) -> Result<Vec<Realization>> {
        if jobs <= 1 {
            return indices.iter().map(|&i| self.run(i)).collect();
        }
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(jobs)
            .build()
            .map_err(|e| Error::validation("jobs", e.to_string()))?;
        pool.install(|| indices.par_iter().map(|&i| self.run(i)).collect())
    }
}

/// One realization of `tvf` under `cfg`.
pub fn simulate(tvf: &VectorField, cfg: &SimulationConfig, realization_index: u64) -> Result<Realization> {
    Simulator::new(tvf, cfg)?.run(realization_index)
}
