//! JSON experiment configuration for the `run` subcommand.

use serde::{Deserialize, Serialize};

use quiltframe_core::constructions::{build_replacement, painless_tight_frame};
use quiltframe_core::gabor::{GaborFrame, Lattice};
use quiltframe_core::quilt::{
    assemble_quilt, build_partition_stripes, build_partition_tiles, FrameAssignment,
    QuiltedSystem, Region,
};
use quiltframe_core::reconstruct::{FrameAlgoConfig, TolMode};
use quiltframe_core::signal::{
    periodized_gaussian_scaled, raised_cosine_window, truncated_gaussian,
};
use quiltframe_core::{QuiltError, Result};

/// Window generator specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum WindowSpec {
    /// Periodized Gaussian; `width` scales the squared spread (default 1).
    PeriodizedGaussian {
        #[serde(default = "default_width")]
        width: f64,
    },
    /// Hard-truncated Gaussian with the given support radius.
    TruncatedGaussian { radius: usize },
    /// Raised-cosine window with the given support radius.
    RaisedCosine { radius: usize },
}

fn default_width() -> f64 {
    1.0
}

/// One Gabor frame of the experiment.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct FrameSpec {
    pub window: WindowSpec,
    pub a: usize,
    pub b: usize,
    /// Replace the seed window by its canonical tight counterpart.
    #[serde(default)]
    pub tighten: bool,
    /// Use the diagonal tightening that preserves compact supports.
    #[serde(default)]
    pub tighten_painless: bool,
}

/// Time-frequency partition specification.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum PartitionSpec {
    /// Square tiles of the given side; assignment defaults to a
    /// two-frame checkerboard.
    Tiles { tile: usize },
    /// Full-frequency time stripes delimited by the boundaries.
    Stripes { boundaries: Vec<usize> },
    /// Replace the base frame's atoms inside the rectangle by atoms of
    /// the replacing frame inside the rectangle enlarged by `delta`.
    ReplacementRegion {
        x0: usize,
        x_len: usize,
        w0: usize,
        w_len: usize,
        #[serde(default)]
        base: usize,
        #[serde(default = "default_replacement")]
        replacement: usize,
    },
}

fn default_replacement() -> usize {
    1
}

/// Solver settings mirrored onto [`FrameAlgoConfig`].
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct SolverSpec {
    #[serde(default)]
    pub relaxation: Option<f64>,
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default = "default_max_iter")]
    pub max_iter: usize,
    #[serde(default = "default_tol_mode")]
    pub tol_mode: String,
}

fn default_tol() -> f64 {
    1e-8
}

fn default_max_iter() -> usize {
    10_000
}

fn default_tol_mode() -> String {
    "update-norm".into()
}

impl Default for SolverSpec {
    fn default() -> Self {
        Self {
            relaxation: None,
            tol: default_tol(),
            max_iter: default_max_iter(),
            tol_mode: default_tol_mode(),
        }
    }
}

impl SolverSpec {
    pub fn to_config(&self) -> Result<FrameAlgoConfig> {
        let tol_mode = match self.tol_mode.as_str() {
            "update-norm" => TolMode::UpdateNorm,
            "residual-norm" => TolMode::ResidualNorm,
            "truth-error" => TolMode::TruthError,
            other => {
                return Err(QuiltError::Config(format!(
                    "unknown tol_mode '{other}' (expected update-norm, residual-norm or truth-error)"
                )))
            }
        };
        Ok(FrameAlgoConfig {
            relaxation: self.relaxation,
            tol: self.tol,
            max_iter: self.max_iter,
            tol_mode,
        })
    }
}

/// A complete experiment: frames, partition, assignment, overlap and
/// solver settings.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub l: usize,
    pub frames: Vec<FrameSpec>,
    pub partition: PartitionSpec,
    /// `(region, frame)` pairs; optional for tiles (checkerboard default)
    /// and stripes (round-robin default).
    #[serde(default)]
    pub assignment: Option<Vec<(usize, usize)>>,
    #[serde(default)]
    pub delta: usize,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default = "default_seed")]
    pub seed: u64,
}

fn default_seed() -> u64 {
    7
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text)
            .map_err(|e| QuiltError::Config(format!("invalid experiment config: {e}")))
    }

    pub fn build_frames(&self) -> Result<Vec<GaborFrame>> {
        if self.frames.is_empty() {
            return Err(QuiltError::Config("at least one frame is required".into()));
        }
        self.frames
            .iter()
            .enumerate()
            .map(|(id, spec)| {
                let window = match spec.window {
                    WindowSpec::PeriodizedGaussian { width } => {
                        periodized_gaussian_scaled(self.l, width)?
                    }
                    WindowSpec::TruncatedGaussian { radius } => {
                        truncated_gaussian(self.l, radius)?
                    }
                    WindowSpec::RaisedCosine { radius } => raised_cosine_window(self.l, radius)?,
                };
                let frame =
                    GaborFrame::new(window, Lattice::new(spec.a, spec.b, self.l)?, id)?;
                if spec.tighten_painless {
                    painless_tight_frame(&frame)
                } else if spec.tighten {
                    frame.tightened()
                } else {
                    Ok(frame)
                }
            })
            .collect()
    }

    /// Assembles the configured quilted system.
    pub fn build_quilt(&self) -> Result<QuiltedSystem> {
        let frames = self.build_frames()?;
        match &self.partition {
            PartitionSpec::Tiles { tile } => {
                let partition = build_partition_tiles(self.l, *tile)?;
                let assignment = match &self.assignment {
                    Some(pairs) => FrameAssignment::new(pairs.clone()),
                    None => {
                        let per = self.l / tile;
                        FrameAssignment::one_to_one(&checkerboard(per, frames.len()))
                    }
                };
                assemble_quilt(&frames, &partition, &assignment, self.delta)
            }
            PartitionSpec::Stripes { boundaries } => {
                let partition = build_partition_stripes(self.l, boundaries)?;
                let assignment = match &self.assignment {
                    Some(pairs) => FrameAssignment::new(pairs.clone()),
                    None => FrameAssignment::one_to_one(
                        &(0..boundaries.len())
                            .map(|r| r % frames.len())
                            .collect::<Vec<_>>(),
                    ),
                };
                assemble_quilt(&frames, &partition, &assignment, self.delta)
            }
            PartitionSpec::ReplacementRegion {
                x0,
                x_len,
                w0,
                w_len,
                base,
                replacement,
            } => {
                let fg = frames.get(*base).ok_or_else(|| {
                    QuiltError::Config(format!("replacement base frame {base} out of range"))
                })?;
                let fh = frames.get(*replacement).ok_or_else(|| {
                    QuiltError::Config(format!(
                        "replacement frame {replacement} out of range"
                    ))
                })?;
                let omega = Region::from_spans(0, self.l, *x0, *x_len, *w0, *w_len)?;
                let omega_star = omega.enlarge(self.delta).with_id(1);
                let (quilt, _plan) = build_replacement(fg, fh, &omega, &omega_star)?;
                Ok(quilt)
            }
        }
    }
}

/// Two-frame checkerboard over a `per x per` tile grid.
pub fn checkerboard(per: usize, frames: usize) -> Vec<usize> {
    (0..per * per)
        .map(|k| ((k / per) + (k % per)) % frames.max(1))
        .collect()
}
