//! Draws the bundled 183x183 channel tree and writes it as a binary PGM.
//!
//! Usage: `cargo run -p vecsim-core --example demo_image -- data/demo_tree.pgm`

use vecsim::io::write_pgm;
use vecsim::BinaryGrid;

const SIZE: usize = 183;

/// `(radius, control points)`; each branch is a Catmull-Rom curve through its
/// points, coordinates bottom-up.
const BRANCHES: &[(f64, &[(f64, f64)])] = &[
    // trunk entering at the bottom-left corner
    (5.4, &[(-20.0, -5.0), (-4.0, 10.0), (22.0, 32.0), (46.0, 56.0), (64.0, 80.0), (74.0, 104.0)]),
    // northern limb
    (4.6, &[(46.0, 56.0), (64.0, 80.0), (74.0, 108.0), (84.0, 148.0), (92.0, 200.0), (94.0, 220.0)]),
    // eastern limb
    (4.6, &[(22.0, 32.0), (46.0, 56.0), (80.0, 72.0), (118.0, 88.0), (158.0, 106.0), (200.0, 118.0), (220.0, 124.0)]),
    // splits of the northern limb
    (4.2, &[(64.0, 80.0), (74.0, 108.0), (104.0, 136.0), (140.0, 156.0), (196.0, 176.0), (220.0, 182.0)]),
    // split of the eastern limb
    (4.2, &[(80.0, 72.0), (118.0, 88.0), (136.0, 122.0), (148.0, 160.0), (156.0, 200.0), (158.0, 220.0)]),
];

fn catmull_rom(p0: (f64, f64), p1: (f64, f64), p2: (f64, f64), p3: (f64, f64), t: f64) -> (f64, f64) {
    let f = |a: f64, b: f64, c: f64, d: f64| {
        0.5 * (2.0 * b
            + (c - a) * t
            + (2.0 * a - 5.0 * b + 4.0 * c - d) * t * t
            + (3.0 * b - a - 3.0 * c + d) * t * t * t)
    };
    (f(p0.0, p1.0, p2.0, p3.0), f(p0.1, p1.1, p2.1, p3.1))
}

fn stamp(grid: &mut BinaryGrid, (cx, cy): (f64, f64), r: f64) {
    let reach = r.ceil() as i64 + 1;
    let (ix, iy) = (cx.round() as i64, cy.round() as i64);
    for y in iy - reach..=iy + reach {
        for x in ix - reach..=ix + reach {
            let (dx, dy) = (x as f64 - cx, y as f64 - cy);
            if dx * dx + dy * dy <= r * r
                && x >= 0
                && y >= 0
                && (x as usize) < SIZE
                && (y as usize) < SIZE
            {
                grid.set(x as usize, y as usize, true);
            }
        }
    }
}

fn main() {
    let out = std::env::args()
        .nth(1)
        .unwrap_or_else(|| "data/demo_tree.pgm".to_string());
    let mut grid = BinaryGrid::new(SIZE, SIZE);
    for &(radius, pts) in BRANCHES {
        // curves pass through pts[1..len-1]; the end points only set tangents
        for seg in pts.windows(4) {
            for i in 0..=400 {
                let p = catmull_rom(seg[0], seg[1], seg[2], seg[3], i as f64 / 400.0);
                stamp(&mut grid, p, radius);
            }
        }
    }
    write_pgm(&grid, &out).expect("write demo image");
    println!(
        "{out}: {SIZE}x{SIZE}, {} sand cells ({:.1}%)",
        grid.sand_count(),
        100.0 * grid.sand_count() as f64 / (SIZE * SIZE) as f64
    );
}
