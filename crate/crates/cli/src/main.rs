use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::LazyLock;

use clap::{CommandFactory, FromArgMatches, Parser, Subcommand};
use serde::Serialize;
use vecsim::config::parse_config;
use vecsim::ensemble::{connectivity_report, etype, variability};
use vecsim::io::{encode_binary_pgm, encode_field, encode_gray_pgm, read_field, read_pgm, write_atomic};
use vecsim::pattern::{extract_patterns, make_template};
use vecsim::rng::GENERATOR;
use vecsim::tvf::build_tvf_with_stats;
use vecsim::{decompose, BinaryGrid, Error, Result, SimulationConfig, Simulator};

const SEED_ENV: &str = "VECSIM_SEED";
const MANIFEST: &str = "manifest.json";

static VERSION: LazyLock<String> =
    LazyLock::new(|| format!("{} (generator {GENERATOR})", env!("CARGO_PKG_VERSION")));

/// Vector-field guided multiple-point simulation.
#[derive(Debug, Parser)]
#[command(name = "vecsim")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Write every erosion and contour shell of a training image as PGM.
    Decompose {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Build the training vector field of an image.
    BuildTvf {
        #[arg(long)]
        image: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        out: PathBuf,
        /// Overrides `rng_seed` from the config.
        #[arg(long)]
        rng_seed: Option<u64>,
    },
    /// Simulate realizations of a training vector field.
    Simulate {
        #[arg(long)]
        tvf: PathBuf,
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value_t = 1)]
        count: u64,
        #[arg(long)]
        out_dir: PathBuf,
        /// Worker threads; output does not depend on it.
        #[arg(long, default_value_t = 1)]
        jobs: usize,
        /// Overrides `rng_seed` from the config.
        #[arg(long)]
        rng_seed: Option<u64>,
    },
    /// Per-cell sand frequency over the realizations in a directory.
    Etype {
        #[arg(long)]
        in_dir: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Pattern-base figures of a field, or connectivity of realizations.
    Stats {
        #[arg(long, conflicts_with_all = ["in_dir", "training", "out"])]
        tvf: Option<PathBuf>,
        #[arg(long, requires_all = ["training", "out"])]
        in_dir: Option<PathBuf>,
        #[arg(long)]
        training: Option<PathBuf>,
        /// CSV report path.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Template extents (field mode) or seed extents (ensemble mode).
        #[arg(long)]
        config: Option<PathBuf>,
    },
}

#[derive(Serialize)]
struct Manifest {
    version: &'static str,
    generator: &'static str,
    config_digest: String,
    rng_seed: u64,
    tvf: String,
    realizations: Vec<ManifestEntry>,
}

#[derive(Serialize)]
struct ManifestEntry {
    index: u64,
    image: String,
    field: String,
}

fn load_config(path: &Path, rng_seed: Option<u64>) -> Result<SimulationConfig> {
    let mut cfg = parse_config(path)?;
    if let Some(seed) = rng_seed {
        cfg.rng_seed = seed;
    }
    if let Ok(env) = std::env::var(SEED_ENV) {
        cfg.rng_seed = env.trim().parse().map_err(|_| Error::Validation {
            key: SEED_ENV.into(),
            message: format!("{env:?} is not an unsigned 64-bit integer"),
        })?;
    }
    cfg.validate()?;
    println!("config digest: {}", cfg.digest());
    Ok(cfg)
}

fn create_dir(dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })
}

fn decompose_cmd(image: &Path, config: &Path, out_dir: &Path) -> Result<()> {
    let cfg = load_config(config, None)?;
    let grid = read_pgm(image)?;
    let seq = decompose(&grid, &cfg.structuring_element.element(), cfg.erosion_stop)?;
    create_dir(out_dir)?;
    for (i, t) in seq.erosions().iter().enumerate() {
        write_atomic(out_dir.join(format!("erosion_{i:02}.pgm")), &encode_binary_pgm(t))?;
    }
    for (i, c) in seq.contours().iter().enumerate() {
        write_atomic(out_dir.join(format!("contour_{i:02}.pgm")), &encode_binary_pgm(c))?;
        println!("contour {i}: {} cells", c.sand_count());
    }
    println!(
        "erosions: {}, residual: {} cells",
        seq.depth(),
        seq.residual().sand_count()
    );
    Ok(())
}

fn build_tvf_cmd(image: &Path, config: &Path, out: &Path, rng_seed: Option<u64>) -> Result<()> {
    let cfg = load_config(config, rng_seed)?;
    let grid = read_pgm(image)?;
    let build = build_tvf_with_stats(&grid, &cfg)?;
    write_atomic(out, encode_field(&build.field).as_bytes())?;
    println!("erosions: {}", build.decomposition.depth());
    println!("coverage: {:.2}%", 100.0 * build.coverage());
    println!("interpolation passes: {}", build.interpolation_passes);
    if build.fallback_cells > 0 {
        println!("midpoint fallback cells: {}", build.fallback_cells);
    }
    Ok(())
}

fn simulate_cmd(
    tvf_path: &Path,
    config: &Path,
    count: u64,
    out_dir: &Path,
    jobs: usize,
    rng_seed: Option<u64>,
) -> Result<()> {
    let cfg = load_config(config, rng_seed)?;
    let tvf = read_field(tvf_path)?;
    let sim = Simulator::new(&tvf, &cfg)?;
    let indices: Vec<u64> = (0..count).collect();
    let realizations = sim.run_many(&indices, jobs.max(1))?;
    create_dir(out_dir)?;
    let mut entries = Vec::with_capacity(realizations.len());
    for re in &realizations {
        let index = re.provenance.realization_index;
        let image = format!("real_{index:04}.pgm");
        let field = format!("real_{index:04}.vecf");
        write_atomic(out_dir.join(&image), &encode_binary_pgm(&re.facies))?;
        write_atomic(out_dir.join(&field), encode_field(&re.field).as_bytes())?;
        entries.push(ManifestEntry { index, image, field });
    }
    let manifest = Manifest {
        version: env!("CARGO_PKG_VERSION"),
        generator: GENERATOR,
        config_digest: cfg.digest(),
        rng_seed: cfg.rng_seed,
        tvf: tvf_path.display().to_string(),
        realizations: entries,
    };
    let mut json = serde_json::to_string_pretty(&manifest).expect("manifest serializes");
    json.push('\n');
    write_atomic(out_dir.join(MANIFEST), json.as_bytes())?;
    println!("realizations: {count}");
    Ok(())
}

/// Realization images of a directory in name order.
fn read_realizations(dir: &Path) -> Result<Vec<BinaryGrid>> {
    let io_err = |source| Error::Io {
        path: dir.to_path_buf(),
        source,
    };
    let mut paths = Vec::new();
    for entry in std::fs::read_dir(dir).map_err(io_err)? {
        let path = entry.map_err(io_err)?.path();
        let name = path.file_name().and_then(|n| n.to_str()).unwrap_or("");
        if name.starts_with("real_") && name.ends_with(".pgm") {
            paths.push(path);
        }
    }
    if paths.is_empty() {
        return Err(Error::EmptyInput(format!(
            "no real_*.pgm files in {}",
            dir.display()
        )));
    }
    paths.sort();
    paths.iter().map(read_pgm).collect()
}

/// Prints the digest recorded by `simulate` in `dir`, if any.
fn print_manifest_digest(dir: &Path) {
    let digest = std::fs::read_to_string(dir.join(MANIFEST))
        .ok()
        .and_then(|text| serde_json::from_str::<serde_json::Value>(&text).ok())
        .and_then(|v| v["config_digest"].as_str().map(str::to_string));
    println!("config digest: {}", digest.as_deref().unwrap_or("none"));
}

fn etype_cmd(in_dir: &Path, out: &Path) -> Result<()> {
    print_manifest_digest(in_dir);
    let grids = read_realizations(in_dir)?;
    let map = etype(&grids)?;
    write_atomic(out, &encode_gray_pgm(map.width, map.height, &map.to_gray()))?;
    println!("realizations: {}", map.count);
    Ok(())
}

fn stats_cmd(
    tvf: Option<&Path>,
    in_dir: Option<&Path>,
    training: Option<&Path>,
    out: Option<&Path>,
    config: Option<&Path>,
) -> Result<()> {
    let cfg = config.map(|c| load_config(c, None)).transpose()?;
    match (tvf, in_dir, training, out) {
        (Some(tvf), None, None, None) => {
            if cfg.is_none() {
                println!("config digest: none");
            }
            let field = read_field(tvf)?;
            let (w, h) = cfg.as_ref().map_or(
                (vecsim::config::DEFAULT_TEMPLATE_W, vecsim::config::DEFAULT_TEMPLATE_H),
                |c| (c.template_w, c.template_h),
            );
            let base = extract_patterns(&field, &make_template(w, h)?)?;
            println!("template: w={w} h={h} ({} offsets)", base.template.len());
            println!("patterns: {}", base.len());
            println!("nd fraction: {:.6}", base.nd_fraction());
            Ok(())
        }
        (None, Some(dir), Some(training), Some(out)) => {
            if cfg.is_none() {
                print_manifest_digest(dir);
            }
            let grids = read_realizations(dir)?;
            let training = read_pgm(training)?;
            let report = connectivity_report(&grids, &training)?;
            write_atomic(out, report.to_csv().as_bytes())?;
            println!("realizations: {}", grids.len());
            println!("median component ratio: {}", report.median_ratio);
            if grids.len() >= 2 {
                let (r, t) = cfg.as_ref().map_or(
                    (vecsim::config::DEFAULT_SEED_ROWS, vecsim::config::DEFAULT_SEED_COLS),
                    |c| (c.seed_rows_r, c.seed_cols_t),
                );
                println!("variability: {:.6}", variability(&grids, r, t)?);
            }
            Ok(())
        }
        _ => Err(Error::Validation {
            key: "stats".into(),
            message: "use either --tvf, or --in-dir with --training and --out".into(),
        }),
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Decompose {
            image,
            config,
            out_dir,
        } => decompose_cmd(&image, &config, &out_dir),
        Command::BuildTvf {
            image,
            config,
            out,
            rng_seed,
        } => build_tvf_cmd(&image, &config, &out, rng_seed),
        Command::Simulate {
            tvf,
            config,
            count,
            out_dir,
            jobs,
            rng_seed,
        } => simulate_cmd(&tvf, &config, count, &out_dir, jobs, rng_seed),
        Command::Etype { in_dir, out } => etype_cmd(&in_dir, &out),
        Command::Stats {
            tvf,
            in_dir,
            training,
            out,
            config,
        } => stats_cmd(
            tvf.as_deref(),
            in_dir.as_deref(),
            training.as_deref(),
            out.as_deref(),
            config.as_deref(),
        ),
    }
}

fn main() -> ExitCode {
    let command = Cli::command().version(VERSION.as_str());
    let cli = match command
        .try_get_matches()
        .and_then(|m| Cli::from_arg_matches(&m))
    {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(if e.is_io() { 2 } else { 1 })
        }
    }
}
