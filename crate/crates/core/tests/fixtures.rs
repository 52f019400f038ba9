mod common;

use std::collections::HashSet;
use std::sync::OnceLock;

use common::*;
use vecsim::ensemble::{connectivity_report, etype, variability};
use vecsim::interval::DI_TOLERANCE;
use vecsim::io::{decode_field, encode_binary_pgm, encode_field};
use vecsim::simulate::Provenance;
use vecsim::tvf::build_tvf_with_stats;
use vecsim::{
    build_tvf, decompose, to_binary, ErosionStop, Realization, SimulationConfig, Simulator,
    VectorField,
};

struct Demo {
    cfg: SimulationConfig,
    tvf: VectorField,
    realizations: Vec<Realization>,
}

fn demo() -> &'static Demo {
    static DEMO: OnceLock<Demo> = OnceLock::new();
    DEMO.get_or_init(|| {
        let cfg = demo_config();
        let tvf = build_tvf(&demo_image(), &cfg).unwrap();
        let sim = Simulator::new(&tvf, &cfg).unwrap();
        let realizations = sim.run_many(&[0, 1, 2], 3).unwrap();
        Demo {
            cfg,
            tvf,
            realizations,
        }
    })
}

#[test]
fn demo_image_rewrites_byte_identically() {
    let bytes = std::fs::read(data_dir().join("demo_tree.pgm")).unwrap();
    assert_eq!(encode_binary_pgm(&demo_image()), bytes);
}

#[test]
fn demo_field_round_trips() {
    let tvf = &demo().tvf;
    let text = encode_field(tvf);
    let back = decode_field(&text).unwrap();
    assert_eq!(back.dims(), tvf.dims());
    for (a, b) in tvf.cells().iter().zip(back.cells()) {
        match (a, b) {
            (Some(a), Some(b)) => assert!((a - b).abs() <= 1e-8),
            (None, None) => {}
            _ => panic!("ND mask changed"),
        }
    }
    assert_eq!(encode_field(&back), text);
}

#[test]
fn demo_three_step_decomposition() {
    let g = demo_image();
    let seq = decompose(&g, &demo().cfg.structuring_element.element(), ErosionStop::FixedK(3))
        .unwrap();
    assert_eq!(seq.depth(), 3);
    assert_eq!(seq.erosions().len(), 4);
    let (union, disjoint) = seq.reconstruct();
    assert!(disjoint);
    assert_eq!(union, g);
}

#[test]
fn demo_tvf_is_total_and_closed() {
    let g = demo_image();
    let cfg = &demo().cfg;
    let build = build_tvf_with_stats(&g, cfg).unwrap();
    assert_eq!(build.field.support(), g);
    for a in build.field.cells().iter().flatten() {
        assert!(cfg.di.contains(*a));
        assert!(*a >= cfg.di.theta_min() - DI_TOLERANCE && *a <= cfg.di.theta_max() + DI_TOLERANCE);
    }
    assert!(build.coverage() >= 0.8, "coverage {}", build.coverage());
    assert!(build.interpolation_passes <= 10);
    assert_eq!(build.fallback_cells, 0);
    assert_eq!(build.field, demo().tvf);
}

#[test]
fn training_field_as_realization_gives_training_facies() {
    let d = demo();
    let re = Realization {
        field: d.tvf.clone(),
        facies: d.tvf.support(),
        provenance: Provenance {
            rng_seed: 0,
            realization_index: 0,
            config_digest: String::new(),
            generator: vecsim::rng::GENERATOR,
        },
    };
    assert_eq!(to_binary(&re), demo_image());
}

#[test]
fn realizations_keep_seed_and_values() {
    let d = demo();
    let (w, h) = d.tvf.dims();
    let pool: HashSet<u64> = d.tvf.cells().iter().flatten().map(|a| a.to_bits()).collect();
    for re in &d.realizations {
        for y in 0..h {
            for x in 0..w {
                if y < d.cfg.seed_rows_r || x < d.cfg.seed_cols_t {
                    assert_eq!(re.field.get(x, y), d.tvf.get(x, y));
                }
            }
        }
        for a in re.field.cells().iter().flatten() {
            assert!(pool.contains(&a.to_bits()));
            assert!(d.cfg.di.contains(*a));
        }
        assert_eq!(re.facies, re.field.support());
        assert_eq!(re.provenance.config_digest, d.cfg.digest());
    }
}

#[test]
fn realizations_differ_from_training_with_similar_sand() {
    let d = demo();
    let g = demo_image();
    let train = g.sand_count() as f64;
    for re in &d.realizations[..2] {
        let (diff, total) = differing_outside_seed(&re.facies, &g, d.cfg.seed_rows_r, d.cfg.seed_cols_t);
        assert!(diff as f64 >= 0.01 * total as f64, "{diff} of {total}");
        let ratio = re.facies.sand_count() as f64 / train;
        assert!((0.5..=2.0).contains(&ratio), "sand ratio {ratio}");
    }
}

#[test]
fn realization_is_reproducible() {
    let d = demo();
    let again = vecsim::simulate(&d.tvf, &d.cfg, 1).unwrap();
    assert_eq!(again, d.realizations[1]);
    assert_eq!(encode_field(&again.field), encode_field(&d.realizations[1].field));
}

#[test]
fn ensemble_statistics_on_demo() {
    let d = demo();
    let facies: Vec<_> = d.realizations.iter().map(|r| r.facies.clone()).collect();
    let e = etype(&facies).unwrap();
    assert!(e.values.iter().all(|v| (0.0..=1.0).contains(v)));
    let report = connectivity_report(&facies, &demo_image()).unwrap();
    assert!(report.median_ratio.is_finite());
    for row in report.realizations.iter().chain([&report.training]) {
        assert!(row.largest_fraction.is_finite() && row.sand_fraction.is_finite());
    }
    assert!(variability(&facies, d.cfg.seed_rows_r, d.cfg.seed_cols_t).unwrap() > 0.0);
}
