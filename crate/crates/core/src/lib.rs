//! Vector-field guided multiple-point simulation of channelized facies.
//!
//! A binary training image is decomposed into erosion contours, each contour
//! cell gets a flow direction from random walks along its contour, and the
//! resulting training vector field is resampled pattern by pattern into new
//! realizations.

pub mod config;
pub mod ensemble;
pub mod error;
pub mod grid;
pub mod interval;
pub mod io;
pub mod morphology;
pub mod pattern;
pub mod rng;
pub mod simulate;
pub mod tvf;

pub use config::{ElementShape, ErosionStop, Normalization, SimulationConfig};
pub use ensemble::{connectivity_report, etype, variability, ConnectivityReport, EtypeMap};
pub use error::{Error, Result};
pub use grid::{BinaryGrid, Cell, VectorField};
pub use interval::DirectionalInterval;
pub use morphology::{decompose, DecompositionSequence, StructuringElement};
pub use pattern::{extract_patterns, make_template, Pattern, PatternBase, Template};
pub use simulate::{simulate, to_binary, Realization, Simulator};
pub use tvf::build_tvf;
