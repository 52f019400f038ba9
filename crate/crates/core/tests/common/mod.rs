#![allow(dead_code)]

use std::path::PathBuf;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vecsim::config::parse_config;
use vecsim::io::read_pgm;
use vecsim::{BinaryGrid, SimulationConfig};

pub fn data_dir() -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../data")
}

pub fn demo_image() -> BinaryGrid {
    read_pgm(data_dir().join("demo_tree.pgm")).expect("demo image")
}

pub fn demo_config() -> SimulationConfig {
    parse_config(data_dir().join("demo.cfg")).expect("demo config")
}

/// Random 16x16 grids with sand density varying from grid to grid.
pub fn random_grids(count: usize, seed: u64) -> Vec<BinaryGrid> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let density: f64 = rng.gen_range(0.2..0.9);
            BinaryGrid::from_fn(16, 16, |_, _| rng.gen_bool(density))
        })
        .collect()
}

/// Erosion straight from the definition: keep a sand cell iff every offset
/// lands on an in-bounds sand cell.
pub fn brute_erode(grid: &BinaryGrid, offsets: &[(i64, i64)]) -> Vec<bool> {
    let (w, h) = grid.dims();
    let sand: Vec<Vec<bool>> = (0..h)
        .map(|y| (0..w).map(|x| grid.cells()[y * w + x] == 1).collect())
        .collect();
    let mut out = Vec::with_capacity(w * h);
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            let mut keep = true;
            for &(dx, dy) in offsets {
                let (nx, ny) = (x + dx, y + dy);
                let inside = nx >= 0 && ny >= 0 && nx < w as i64 && ny < h as i64;
                if !inside || !sand[ny as usize][nx as usize] {
                    keep = false;
                }
            }
            out.push(keep);
        }
    }
    out
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn find(&mut self, mut i: usize) -> usize {
        while self.parent[i] != i {
            self.parent[i] = self.parent[self.parent[i]];
            i = self.parent[i];
        }
        i
    }

    fn union(&mut self, a: usize, b: usize) {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra != rb {
            self.parent[ra.max(rb)] = ra.min(rb);
        }
    }
}

/// Component root of every cell (`None` for background) by union-find over
/// the given neighbour offsets.
pub fn union_find_roots(grid: &BinaryGrid, neighbours: &[(i64, i64)]) -> Vec<Option<usize>> {
    let (w, h) = grid.dims();
    let sand = |x: i64, y: i64| {
        x >= 0 && y >= 0 && x < w as i64 && y < h as i64 && grid.cells()[y as usize * w + x as usize] == 1
    };
    let mut uf = UnionFind {
        parent: (0..w * h).collect(),
    };
    for y in 0..h as i64 {
        for x in 0..w as i64 {
            if !sand(x, y) {
                continue;
            }
            for &(dx, dy) in neighbours {
                if sand(x + dx, y + dy) {
                    uf.union(y as usize * w + x as usize, (y + dy) as usize * w + (x + dx) as usize);
                }
            }
        }
    }
    (0..w * h)
        .map(|i| (grid.cells()[i] == 1).then(|| uf.find(i)))
        .collect()
}

pub const FOUR: [(i64, i64); 4] = [(1, 0), (-1, 0), (0, 1), (0, -1)];
pub const EIGHT: [(i64, i64); 8] = [
    (1, 0),
    (-1, 0),
    (0, 1),
    (0, -1),
    (1, 1),
    (1, -1),
    (-1, 1),
    (-1, -1),
];

/// True iff two labellings induce the same partition of the sand cells.
pub fn same_partition(labels: &[u32], roots: &[Option<usize>]) -> bool {
    use std::collections::HashMap;
    let mut forward: HashMap<u32, usize> = HashMap::new();
    let mut backward: HashMap<usize, u32> = HashMap::new();
    for (&l, r) in labels.iter().zip(roots) {
        match (l, r) {
            (0, None) => {}
            (l, Some(r)) if l > 0 => {
                if *forward.entry(l).or_insert(*r) != *r || *backward.entry(*r).or_insert(l) != l {
                    return false;
                }
            }
            _ => return false,
        }
    }
    true
}

/// Cells outside the seed that differ between two grids.
pub fn differing_outside_seed(a: &BinaryGrid, b: &BinaryGrid, rows: usize, cols: usize) -> (usize, usize) {
    let (w, h) = a.dims();
    let mut diff = 0;
    let mut total = 0;
    for y in rows..h {
        for x in cols..w {
            total += 1;
            if a.is_sand(x, y) != b.is_sand(x, y) {
                diff += 1;
            }
        }
    }
    (diff, total)
}
