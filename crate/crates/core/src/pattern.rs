//! L-shaped templates, the pattern base of a vector field, and the pattern
//! distances.
//!
//! The combined distance between a data event at `p` and a pattern stored at
//! `q` is `beta * d_tvf + (1 - beta) * d_loc`, where `d_tvf` sums squared
//! angle differences over the template (ND against ND costs 0, ND against a
//! direction costs `pi / b`) and `d_loc` is the squared distance `|p - q|^2`.

use crate::config::Normalization;
use crate::error::{Error, Result};
use crate::grid::{wrap_angle, Cell, VectorField};

/// Causal L-shaped template for a bottom-up, left-to-right scan: `h` full rows
/// of width `2w + 1` below the center plus `w` cells to its left. The center
/// itself is not an offset.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Template {
    w: usize,
    h: usize,
    offsets: Vec<(i64, i64)>,
}

impl Template {
    pub fn half_width(&self) -> usize {
        self.w
    }

    pub fn rows(&self) -> usize {
        self.h
    }

    /// Offsets in scan order (lowest row first, left to right).
    pub fn offsets(&self) -> &[(i64, i64)] {
        &self.offsets
    }

    pub fn len(&self) -> usize {
        self.offsets.len()
    }

    pub fn is_empty(&self) -> bool {
        self.offsets.is_empty()
    }
}

pub fn make_template(w: usize, h: usize) -> Result<Template> {
    if w == 0 {
        return Err(Error::validation("template_w", "must be at least 1"));
    }
    if h == 0 {
        return Err(Error::validation("template_h", "must be at least 1"));
    }
    let (wi, hi) = (w as i64, h as i64);
    let mut offsets = Vec::with_capacity(h * (2 * w + 1) + w);
    for dy in (1..=hi).rev() {
        for dx in -wi..=wi {
            offsets.push((dx, -dy));
        }
    }
    for dx in (1..=wi).rev() {
        offsets.push((-dx, 0));
    }
    Ok(Template { w, h, offsets })
}

/// Template values around an anchor.
#[derive(Clone, Debug, PartialEq)]
pub struct Pattern {
    /// One entry per template offset; `None` is ND.
    pub values: Vec<Option<f64>>,
    pub center_value: Option<f64>,
    pub anchor: Cell,
}

/// Every pattern of a field whose template lies fully inside the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PatternBase {
    pub patterns: Vec<Pattern>,
    pub template: Template,
    pub field_dims: (usize, usize),
}

impl PatternBase {
    pub fn len(&self) -> usize {
        self.patterns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.patterns.is_empty()
    }

    /// Fraction of ND entries across all offsets and centers.
    pub fn nd_fraction(&self) -> f64 {
        let total = self.patterns.len() * (self.template.len() + 1);
        if total == 0 {
            return 0.0;
        }
        let nd: usize = self
            .patterns
            .iter()
            .map(|p| {
                p.values.iter().filter(|v| v.is_none()).count() + usize::from(p.center_value.is_none())
            })
            .sum();
        nd as f64 / total as f64
    }
}

/// Reads the template around `anchor`. Out-of-bounds cells read as ND.
pub fn pattern_at(field: &VectorField, template: &Template, anchor: Cell) -> Pattern {
    let (w, h) = field.dims();
    let (ax, ay) = (anchor.0 as i64, anchor.1 as i64);
    let values = template
        .offsets()
        .iter()
        .map(|&(dx, dy)| {
            let (x, y) = (ax + dx, ay + dy);
            if x >= 0 && y >= 0 && (x as usize) < w && (y as usize) < h {
                field.get(x as usize, y as usize)
            } else {
                None
            }
        })
        .collect();
    Pattern {
        values,
        center_value: field.get(anchor.0, anchor.1),
        anchor,
    }
}

/// Scans `field` bottom-up, left to right, keeping every anchor whose full
/// template is in bounds. A `W x H` field yields `(W - 2w) * (H - h)`
/// patterns.
pub fn extract_patterns(field: &VectorField, template: &Template) -> Result<PatternBase> {
    let (fw, fh) = field.dims();
    let (w, h) = (template.half_width(), template.rows());
    if fw < 2 * w + 1 || fh < h + 1 {
        return Err(Error::validation(
            "template",
            format!(
                "{}x{} template does not fit a {fw}x{fh} field",
                2 * w + 1,
                h + 1
            ),
        ));
    }
    let mut patterns = Vec::with_capacity((fw - 2 * w) * (fh - h));
    for y in h..fh {
        for x in w..fw - w {
            patterns.push(pattern_at(field, template, (x, y)));
        }
    }
    Ok(PatternBase {
        patterns,
        template: template.clone(),
        field_dims: (fw, fh),
    })
}

/// Per-offset difference. Two directions differ by their angle difference
/// (wrapped into `(-pi, pi]`, which equals the difference of interval
/// representatives for any interval narrower than pi); two NDs agree; ND
/// against a direction costs `pi / b`.
#[inline]
pub fn angle_diff(u: Option<f64>, v: Option<f64>, b: f64) -> f64 {
    match (u, v) {
        (Some(u), Some(v)) => wrap_angle(u - v),
        (None, None) => 0.0,
        _ => std::f64::consts::PI / b,
    }
}

/// Raw `sum (diff)^2` over offsets, optionally restricted to `active`
/// offset indices.
#[inline]
pub(crate) fn tvf_raw_sum(
    a: &[Option<f64>],
    b: &[Option<f64>],
    b_param: f64,
    active: Option<&[usize]>,
) -> f64 {
    match active {
        None => a
            .iter()
            .zip(b)
            .map(|(&u, &v)| {
                let d = angle_diff(u, v, b_param);
                d * d
            })
            .sum(),
        Some(idx) => idx
            .iter()
            .map(|&i| {
                let d = angle_diff(a[i], b[i], b_param);
                d * d
            })
            .sum(),
    }
}

/// Scales a raw `d_tvf` sum over `count` offsets.
#[inline]
pub(crate) fn normalize_tvf(raw: f64, count: usize, b_param: f64, normalization: Normalization) -> f64 {
    match normalization {
        Normalization::PaperRaw => raw,
        Normalization::UnitScaled => {
            if count == 0 {
                return 0.0;
            }
            let penalty = std::f64::consts::PI / b_param;
            (raw / (count as f64 * penalty * penalty)).min(1.0)
        }
    }
}

pub fn dist_tvf(a: &Pattern, b: &Pattern, b_param: f64, normalization: Normalization) -> Result<f64> {
    if a.values.len() != b.values.len() {
        return Err(Error::validation(
            "template",
            format!(
                "patterns have {} and {} offsets",
                a.values.len(),
                b.values.len()
            ),
        ));
    }
    let raw = tvf_raw_sum(&a.values, &b.values, b_param, None);
    Ok(normalize_tvf(raw, a.values.len(), b_param, normalization))
}

pub fn dist_loc(p: Cell, q: Cell, normalization: Normalization, field_dims: (usize, usize)) -> f64 {
    let dx = p.0 as f64 - q.0 as f64;
    let dy = p.1 as f64 - q.1 as f64;
    let raw = dx * dx + dy * dy;
    match normalization {
        Normalization::PaperRaw => raw,
        Normalization::UnitScaled => {
            let (w, h) = field_dims;
            let span = ((w.max(1) - 1).pow(2) + (h.max(1) - 1).pow(2)) as f64;
            if span == 0.0 {
                0.0
            } else {
                raw / span
            }
        }
    }
}

/// `beta * d_tvf + (1 - beta) * d_loc`.
#[inline]
pub fn combine(beta: f64, d_tvf: f64, d_loc: f64) -> f64 {
    beta * d_tvf + (1.0 - beta) * d_loc
}

/// Combined distance between `a` (located at its anchor) and `b`.
pub fn dist(
    a: &Pattern,
    b: &Pattern,
    beta: f64,
    b_param: f64,
    normalization: Normalization,
    field_dims: (usize, usize),
) -> Result<f64> {
    if !(0.0..=1.0).contains(&beta) {
        return Err(Error::validation("beta", format!("{beta} is outside [0, 1]")));
    }
    let d_tvf = dist_tvf(a, b, b_param, normalization)?;
    let d_loc = dist_loc(a.anchor, b.anchor, normalization, field_dims);
    Ok(combine(beta, d_tvf, d_loc))
}
