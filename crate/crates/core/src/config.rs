//! Simulation parameters and the `key = value` config format.
//!
//! ```text
//! # comments start with '#'
//! di = [0, 1.5707963267948966]
//! step_n = 1
//! step_m = 3
//! erosion_stop = residual_fraction:0.1
//! beta = 0.5
//! ```
//!
//! Only `di` is required. Unknown keys are rejected.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::Path;

use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::interval::{DirectionalInterval, DI_TOLERANCE};
use crate::morphology::StructuringElement;

/// When the iterative erosion stops.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ErosionStop {
    /// Exactly `k` erosions (fewer only if the image erodes away first).
    FixedK(usize),
    /// Stop before the erosion that would leave fewer than this fraction of
    /// the original sand cells.
    ResidualFraction(f64),
    /// Stop before the erosion that would split the residual into more than
    /// this many 8-connected components.
    MaxComponents(usize),
}

impl ErosionStop {
    fn parse(value: &str) -> Result<Self> {
        let bad = || {
            Error::validation(
                "erosion_stop",
                format!("expected fixed_k:<n>, residual_fraction:<r> or max_components:<n>, got {value:?}"),
            )
        };
        let (kind, arg) = value.split_once(':').ok_or_else(bad)?;
        let arg = arg.trim();
        match kind.trim() {
            "fixed_k" => Ok(ErosionStop::FixedK(arg.parse().map_err(|_| bad())?)),
            "residual_fraction" => Ok(ErosionStop::ResidualFraction(
                arg.parse().map_err(|_| bad())?,
            )),
            "max_components" => Ok(ErosionStop::MaxComponents(arg.parse().map_err(|_| bad())?)),
            _ => Err(bad()),
        }
    }

    fn validate(&self) -> Result<()> {
        match *self {
            ErosionStop::FixedK(_) => Ok(()),
            ErosionStop::ResidualFraction(r) if r > 0.0 && r < 1.0 => Ok(()),
            ErosionStop::ResidualFraction(r) => Err(Error::validation(
                "erosion_stop",
                format!("residual_fraction {r} must lie in (0, 1)"),
            )),
            ErosionStop::MaxComponents(0) => Err(Error::validation(
                "erosion_stop",
                "max_components must be at least 1",
            )),
            ErosionStop::MaxComponents(_) => Ok(()),
        }
    }
}

impl std::fmt::Display for ErosionStop {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            ErosionStop::FixedK(k) => write!(f, "fixed_k:{k}"),
            ErosionStop::ResidualFraction(r) => write!(f, "residual_fraction:{r:?}"),
            ErosionStop::MaxComponents(c) => write!(f, "max_components:{c}"),
        }
    }
}

/// Scaling applied to the pattern distances.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Normalization {
    /// Raw squared sums, as written in the method's definition.
    PaperRaw,
    /// Both distances rescaled to `[0, 1]` so `beta` weighs comparable terms.
    UnitScaled,
}

impl Normalization {
    fn parse(value: &str) -> Result<Self> {
        match value {
            "paper_raw" => Ok(Normalization::PaperRaw),
            "unit_scaled" => Ok(Normalization::UnitScaled),
            other => Err(Error::validation(
                "normalization",
                format!("expected paper_raw or unit_scaled, got {other:?}"),
            )),
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Normalization::PaperRaw => "paper_raw",
            Normalization::UnitScaled => "unit_scaled",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ElementShape {
    Cross,
    Square,
}

impl ElementShape {
    pub fn element(&self) -> StructuringElement {
        match self {
            ElementShape::Cross => StructuringElement::cross(),
            ElementShape::Square => StructuringElement::square(),
        }
    }

    fn as_str(&self) -> &'static str {
        match self {
            ElementShape::Cross => "cross",
            ElementShape::Square => "square",
        }
    }
}

pub const DEFAULT_STEP_N: usize = 1;
pub const DEFAULT_STEP_M: usize = 3;
pub const DEFAULT_BETA: f64 = 0.5;
pub const DEFAULT_INTERP_RADIUS: usize = 1;
pub const DEFAULT_RESIDUAL_FRACTION: f64 = 0.1;
pub const DEFAULT_ACCEPT_A: f64 = 0.01;
pub const DEFAULT_TEMPLATE_W: usize = 2;
pub const DEFAULT_TEMPLATE_H: usize = 2;
pub const DEFAULT_SEED_ROWS: usize = 8;
pub const DEFAULT_SEED_COLS: usize = 8;

/// Every tunable of the TVF build and the simulation.
#[derive(Clone, Debug, PartialEq)]
pub struct SimulationConfig {
    pub di: DirectionalInterval,
    pub step_n: usize,
    pub step_m: usize,
    pub erosion_stop: ErosionStop,
    pub structuring_element: ElementShape,
    /// Chebyshev radius of the interpolation neighbourhood.
    pub interp_radius: usize,
    pub beta: f64,
    /// Acceptance threshold `a` of the randomized pattern search.
    pub accept_a: f64,
    /// ND-mismatch penalty is `pi / b_param`.
    pub b_param: f64,
    pub seed_rows_r: usize,
    pub seed_cols_t: usize,
    pub template_w: usize,
    pub template_h: usize,
    pub rng_seed: u64,
    pub normalization: Normalization,
}

impl SimulationConfig {
    /// Defaults for everything except the directional interval.
    pub fn new(di: DirectionalInterval) -> Self {
        SimulationConfig {
            di,
            step_n: DEFAULT_STEP_N,
            step_m: DEFAULT_STEP_M,
            erosion_stop: ErosionStop::ResidualFraction(DEFAULT_RESIDUAL_FRACTION),
            structuring_element: ElementShape::Cross,
            interp_radius: DEFAULT_INTERP_RADIUS,
            beta: DEFAULT_BETA,
            accept_a: DEFAULT_ACCEPT_A,
            b_param: PI / di.diameter(),
            seed_rows_r: DEFAULT_SEED_ROWS,
            seed_cols_t: DEFAULT_SEED_COLS,
            template_w: DEFAULT_TEMPLATE_W,
            template_h: DEFAULT_TEMPLATE_H,
            rng_seed: 0,
            normalization: Normalization::UnitScaled,
        }
    }

    /// ND-mismatch penalty `pi / b`.
    pub fn nd_penalty(&self) -> f64 {
        PI / self.b_param
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.beta) {
            return Err(Error::validation(
                "beta",
                format!("{} is outside [0, 1]", self.beta),
            ));
        }
        if self.step_n == 0 {
            return Err(Error::validation("step_n", "must be at least 1"));
        }
        if self.step_m == 0 {
            return Err(Error::validation("step_m", "must be at least 1"));
        }
        if self.step_n == self.step_m {
            return Err(Error::validation("step_m", "must differ from step_n"));
        }
        self.erosion_stop.validate()?;
        if self.interp_radius == 0 {
            return Err(Error::validation("interp_radius", "must be at least 1"));
        }
        if !(self.accept_a.is_finite() && self.accept_a >= 0.0) {
            return Err(Error::validation("accept_a", "must be finite and non-negative"));
        }
        if !(self.b_param.is_finite() && self.b_param > 0.0) {
            return Err(Error::validation("b_param", "must be finite and positive"));
        }
        if self.normalization == Normalization::UnitScaled
            && self.nd_penalty() < self.di.diameter() - DI_TOLERANCE
        {
            return Err(Error::validation(
                "b_param",
                "unit_scaled requires pi / b_param >= diameter(di) so distances stay in [0, 1]",
            ));
        }
        if self.template_w == 0 {
            return Err(Error::validation("template_w", "must be at least 1"));
        }
        if self.template_h == 0 {
            return Err(Error::validation("template_h", "must be at least 1"));
        }
        if self.seed_rows_r < self.template_h {
            return Err(Error::validation(
                "seed_rows_r",
                format!("must be at least template_h = {}", self.template_h),
            ));
        }
        if self.seed_cols_t < self.template_w {
            return Err(Error::validation(
                "seed_cols_t",
                format!("must be at least template_w = {}", self.template_w),
            ));
        }
        Ok(())
    }

    /// Parses the `key = value` format and validates the result.
    pub fn parse(text: &str) -> Result<Self> {
        let mut di = None;
        let mut entries = Vec::new();
        for (lineno, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::validation(
                    format!("line {}", lineno + 1),
                    format!("expected `key = value`, got {line:?}"),
                )
            })?;
            let (key, value) = (key.trim(), value.trim());
            if key == "di" {
                di = Some(parse_interval(value)?);
            } else {
                entries.push((key.to_string(), value.to_string()));
            }
        }
        let di = di.ok_or_else(|| Error::validation("di", "required key is missing"))?;
        let mut cfg = SimulationConfig::new(di);
        for (key, value) in &entries {
            cfg.set(key, value)?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    fn set(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "step_n" => self.step_n = parse_num(key, value)?,
            "step_m" => self.step_m = parse_num(key, value)?,
            "erosion_stop" => self.erosion_stop = ErosionStop::parse(value)?,
            "structuring_element" => {
                self.structuring_element = match value {
                    "cross" => ElementShape::Cross,
                    "square" => ElementShape::Square,
                    other => {
                        return Err(Error::validation(
                            key,
                            format!("expected cross or square, got {other:?}"),
                        ))
                    }
                }
            }
            "interp_radius" => self.interp_radius = parse_num(key, value)?,
            "beta" => self.beta = parse_num(key, value)?,
            "accept_a" => self.accept_a = parse_num(key, value)?,
            "b_param" => self.b_param = parse_num(key, value)?,
            "seed_rows_r" => self.seed_rows_r = parse_num(key, value)?,
            "seed_cols_t" => self.seed_cols_t = parse_num(key, value)?,
            "template_w" => self.template_w = parse_num(key, value)?,
            "template_h" => self.template_h = parse_num(key, value)?,
            "rng_seed" => self.rng_seed = parse_num(key, value)?,
            "normalization" => self.normalization = Normalization::parse(value)?,
            other => return Err(Error::validation(other, "unknown key")),
        }
        Ok(())
    }

    /// Fully-resolved config in a fixed key order. Floats use the shortest
    /// representation that round-trips, so `parse(canonical())` reproduces the
    /// config exactly.
    pub fn canonical(&self) -> String {
        let mut s = String::new();
        let _ = writeln!(s, "di = [{:?}, {:?}]", self.di.theta_min(), self.di.theta_max());
        let _ = writeln!(s, "step_n = {}", self.step_n);
        let _ = writeln!(s, "step_m = {}", self.step_m);
        let _ = writeln!(s, "erosion_stop = {}", self.erosion_stop);
        let _ = writeln!(s, "structuring_element = {}", self.structuring_element.as_str());
        let _ = writeln!(s, "interp_radius = {}", self.interp_radius);
        let _ = writeln!(s, "beta = {:?}", self.beta);
        let _ = writeln!(s, "accept_a = {:?}", self.accept_a);
        let _ = writeln!(s, "b_param = {:?}", self.b_param);
        let _ = writeln!(s, "seed_rows_r = {}", self.seed_rows_r);
        let _ = writeln!(s, "seed_cols_t = {}", self.seed_cols_t);
        let _ = writeln!(s, "template_w = {}", self.template_w);
        let _ = writeln!(s, "template_h = {}", self.template_h);
        let _ = writeln!(s, "rng_seed = {}", self.rng_seed);
        let _ = writeln!(s, "normalization = {}", self.normalization.as_str());
        s
    }

    /// SHA-256 of [`canonical`](Self::canonical), lowercase hex.
    pub fn digest(&self) -> String {
        format!("{:x}", Sha256::digest(self.canonical().as_bytes()))
    }
}

/// Reads and parses a config file.
pub fn parse_config(path: impl AsRef<Path>) -> Result<SimulationConfig> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    SimulationConfig::parse(&text)
}

fn parse_num<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::validation(key, format!("cannot parse {value:?}")))
}

fn parse_interval(value: &str) -> Result<DirectionalInterval> {
    let inner = value.trim().trim_start_matches('[').trim_end_matches(']');
    let bounds: Vec<&str> = inner
        .split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .collect();
    if bounds.len() != 2 {
        return Err(Error::validation(
            "di",
            format!("expected two radian bounds, got {value:?}"),
        ));
    }
    let lo: f64 = parse_num("di", bounds[0])?;
    let hi: f64 = parse_num("di", bounds[1])?;
    DirectionalInterval::new(lo, hi)
}
