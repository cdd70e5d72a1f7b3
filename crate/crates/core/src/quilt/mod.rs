//! Quilted Gabor systems: time-frequency partitions, frame-to-region
//! assignment, assembly of the stitched atom set, and the numerical
//! diagnostics (separation, covering height, decay envelope, Bessel
//! estimate) attached to such systems.

pub mod region;

pub use region::{Rect, Region};

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;

use crate::error::{QuiltError, Result};
use crate::gabor::{analysis_matrix_for_atoms, FrameBounds, GaborFrame};
use crate::signal::{stft, Signal, TFPoint};

/// A covering of the `L x L` grid by regions, with its measured height
/// (maximum number of regions covering one grid point).
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    l: usize,
    regions: Vec<Region>,
    height: usize,
}

impl Partition {
    /// Validates that the regions cover every grid point and measures the
    /// covering height.
    pub fn new(l: usize, regions: Vec<Region>) -> Result<Self> {
        if regions.is_empty() {
            return Err(QuiltError::Config("a partition needs at least one region".into()));
        }
        for r in &regions {
            if r.torus_len() != l {
                return Err(QuiltError::DimensionMismatch {
                    expected: l,
                    found: r.torus_len(),
                });
            }
        }
        let height = covering_height(l, &regions, 0)?;
        Ok(Self { l, regions, height })
    }

    pub fn signal_len(&self) -> usize {
        self.l
    }

    pub fn regions(&self) -> &[Region] {
        &self.regions
    }

    /// Maximum overlap count over the grid.
    pub fn height(&self) -> usize {
        self.height
    }

    /// Covering height after enlarging every region by `delta`.
    pub fn height_enlarged(&self, delta: usize) -> usize {
        covering_height(self.l, &self.regions, delta).expect("covering cannot lose points when enlarged")
    }
}

fn covering_height(l: usize, regions: &[Region], delta: usize) -> Result<usize> {
    let enlarged: Vec<Region> = regions.iter().map(|r| r.enlarge(delta)).collect();
    let mut max_cover = 0usize;
    for x in 0..l {
        for w in 0..l {
            let p = TFPoint::new(x, w, l);
            let cover = enlarged.iter().filter(|r| r.contains(&p)).count();
            if cover == 0 {
                return Err(QuiltError::Config(format!(
                    "covering gap at grid point ({x}, {w})"
                )));
            }
            max_cover = max_cover.max(cover);
        }
    }
    Ok(max_cover)
}

/// Disjoint square tiles of side `tile`; height 1.
pub fn build_partition_tiles(l: usize, tile: usize) -> Result<Partition> {
    if tile == 0 || l % tile != 0 {
        return Err(QuiltError::Config(format!(
            "tile size {tile} must divide the signal length {l}"
        )));
    }
    let per_axis = l / tile;
    let mut regions = Vec::with_capacity(per_axis * per_axis);
    for i in 0..per_axis {
        for j in 0..per_axis {
            regions.push(Region::from_spans(
                i * per_axis + j,
                l,
                i * tile,
                tile,
                j * tile,
                tile,
            )?);
        }
    }
    Partition::new(l, regions)
}

/// Full-frequency time stripes delimited by sorted boundary indices.
/// The last stripe wraps back to the first boundary.
pub fn build_partition_stripes(l: usize, boundaries: &[usize]) -> Result<Partition> {
    if boundaries.is_empty() {
        return Err(QuiltError::Config("at least one stripe boundary is required".into()));
    }
    for &t in boundaries {
        if t >= l {
            return Err(QuiltError::Config(format!(
                "stripe boundary {t} outside [0, {l})"
            )));
        }
    }
    if boundaries.windows(2).any(|w| w[0] >= w[1]) {
        return Err(QuiltError::Config(
            "stripe boundaries must be strictly increasing".into(),
        ));
    }
    let n = boundaries.len();
    let mut regions = Vec::with_capacity(n);
    for (i, &start) in boundaries.iter().enumerate() {
        let end = if i + 1 < n { boundaries[i + 1] } else { boundaries[0] + l };
        let width = end - start;
        regions.push(Region::from_spans(i, l, start, width, 0, l)?);
    }
    Partition::new(l, regions)
}

/// `(region id, frame id)` pairs; a region may carry several frames.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FrameAssignment {
    pairs: Vec<(usize, usize)>,
}

impl FrameAssignment {
    pub fn new(pairs: Vec<(usize, usize)>) -> Self {
        Self { pairs }
    }

    /// One frame per region, in region order.
    pub fn one_to_one(frame_per_region: &[usize]) -> Self {
        Self {
            pairs: frame_per_region
                .iter()
                .copied()
                .enumerate()
                .collect(),
        }
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    fn validate(&self, regions: usize, frames: usize) -> Result<()> {
        let mut covered = vec![false; regions];
        for &(r, j) in &self.pairs {
            if r >= regions {
                return Err(QuiltError::Config(format!("assignment names unknown region {r}")));
            }
            if j >= frames {
                return Err(QuiltError::Config(format!("assignment names unknown frame {j}")));
            }
            covered[r] = true;
        }
        if let Some(r) = covered.iter().position(|&c| !c) {
            return Err(QuiltError::Config(format!("region {r} has no assigned frame")));
        }
        Ok(())
    }
}

/// One atom of a quilted system: frame table index plus lattice point.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct QuiltAtom {
    pub frame: usize,
    pub point: TFPoint,
}

/// How a quilted system was assembled; kept for diagnostics.
#[derive(Debug, Clone)]
pub struct Provenance {
    pub partition: Partition,
    pub assignment: FrameAssignment,
    pub delta: usize,
}

/// A quilted Gabor system: deduplicated atoms drawn from several frames,
/// together with the frame table and assembly provenance. Immutable after
/// construction.
#[derive(Debug, Clone)]
pub struct QuiltedSystem {
    frames: Vec<GaborFrame>,
    atoms: Vec<QuiltAtom>,
    provenance: Provenance,
}

/// Assembles the union of per-region lattice restrictions: for every
/// `(region, frame)` pair, the atoms are the frame's lattice points inside
/// the region enlarged by `delta`. Duplicates collapse (set union) and the
/// result is ordered by frame id, then time, then frequency.
pub fn assemble_quilt(
    frames: &[GaborFrame],
    partition: &Partition,
    assignment: &FrameAssignment,
    delta: usize,
) -> Result<QuiltedSystem> {
    let l = partition.signal_len();
    for f in frames {
        if f.signal_len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: f.signal_len(),
            });
        }
    }
    assignment.validate(partition.regions().len(), frames.len())?;

    let mut atoms = BTreeSet::new();
    for &(r, j) in assignment.pairs() {
        let zone = partition.regions()[r].enlarge(delta);
        for p in frames[j].lattice().points() {
            if zone.contains(&p) {
                atoms.insert(QuiltAtom { frame: j, point: p });
            }
        }
    }
    QuiltedSystem::from_parts(
        frames.to_vec(),
        atoms.into_iter().collect(),
        Provenance {
            partition: partition.clone(),
            assignment: assignment.clone(),
            delta,
        },
    )
}

impl QuiltedSystem {
    /// Internal constructor shared by every assembly path. Expects atoms
    /// sorted and unique; validates lattice membership and non-emptiness.
    pub(crate) fn from_parts(
        frames: Vec<GaborFrame>,
        atoms: Vec<QuiltAtom>,
        provenance: Provenance,
    ) -> Result<Self> {
        if atoms.is_empty() {
            return Err(QuiltError::DegenerateQuilt(
                "assembly produced no atoms".into(),
            ));
        }
        for pair in atoms.windows(2) {
            if pair[0] >= pair[1] {
                return Err(QuiltError::Config(
                    "quilt atoms must be strictly ordered".into(),
                ));
            }
        }
        for atom in &atoms {
            let frame = frames.get(atom.frame).ok_or_else(|| {
                QuiltError::Config(format!("atom names unknown frame {}", atom.frame))
            })?;
            if !frame.lattice().contains(&atom.point) {
                return Err(QuiltError::Config(format!(
                    "atom ({}, {}) is not on the lattice of frame {}",
                    atom.point.x, atom.point.omega, atom.frame
                )));
            }
        }
        Ok(Self {
            frames,
            atoms,
            provenance,
        })
    }

    pub fn signal_len(&self) -> usize {
        self.frames[0].signal_len()
    }

    pub fn frames(&self) -> &[GaborFrame] {
        &self.frames
    }

    pub fn atoms(&self) -> &[QuiltAtom] {
        &self.atoms
    }

    pub fn provenance(&self) -> &Provenance {
        &self.provenance
    }

    /// Index of each atom in coefficient order.
    pub fn atom_index(&self) -> BTreeMap<QuiltAtom, usize> {
        self.atoms
            .iter()
            .copied()
            .enumerate()
            .map(|(i, a)| (a, i))
            .collect()
    }

    /// Analysis coefficients `<f, pi(lambda) g^j>` in atom order.
    pub fn analysis(&self, f: &Signal) -> Result<Vec<Complex64>> {
        let l = self.signal_len();
        if f.len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: f.len(),
            });
        }
        Ok(self
            .atoms
            .iter()
            .map(|a| f.inner(&self.frames[a.frame].atom(a.point)))
            .collect())
    }

    /// Synthesis `sum c_i pi(lambda_i) g^{j_i}`.
    pub fn synthesis(&self, coeffs: &[Complex64]) -> Result<Signal> {
        if coeffs.len() != self.atoms.len() {
            return Err(QuiltError::DimensionMismatch {
                expected: self.atoms.len(),
                found: coeffs.len(),
            });
        }
        let l = self.signal_len();
        let mut acc = vec![Complex64::new(0.0, 0.0); l];
        for (c, a) in coeffs.iter().zip(&self.atoms) {
            if c.norm_sqr() == 0.0 {
                continue;
            }
            let atom = self.frames[a.frame].atom(a.point);
            for (slot, v) in acc.iter_mut().zip(atom.samples()) {
                *slot += c * v;
            }
        }
        Signal::new(acc)
    }

    /// Stacked analysis matrix (one conjugated atom per row).
    pub fn analysis_matrix(&self) -> DMatrix<Complex64> {
        analysis_matrix_for_atoms(
            self.signal_len(),
            self.atoms.iter().map(|a| (&self.frames[a.frame], a.point)),
        )
    }

    /// Frame operator of the quilted system as a dense Hermitian matrix.
    pub fn frame_operator(&self) -> DMatrix<Complex64> {
        let m = self.analysis_matrix();
        m.adjoint() * m
    }

    /// Optimal frame bounds of the quilted system.
    pub fn frame_bounds(&self) -> FrameBounds {
        FrameBounds::from_operator(&self.frame_operator())
    }

    /// Sampling-geometry diagnostics backing the Bessel estimate.
    pub fn separation_report(&self) -> SeparationReport {
        let used: BTreeSet<usize> = self.atoms.iter().map(|a| a.frame).collect();
        let gamma = used
            .iter()
            .map(|&j| {
                let lat = self.frames[j].lattice();
                lat.time_step().min(lat.frequency_step())
            })
            .min()
            .expect("quilts are nonempty");
        let mut multiplicity: BTreeMap<TFPoint, usize> = BTreeMap::new();
        for a in &self.atoms {
            *multiplicity.entry(a.point).or_insert(0) += 1;
        }
        let point_density = multiplicity.values().copied().max().unwrap_or(0);
        SeparationReport {
            gamma,
            separated_subsets: used.len(),
            height_delta: self
                .provenance
                .partition
                .height_enlarged(self.provenance.delta),
            point_density,
        }
    }

    /// CSV export of the quilted lattice: `frame_id,x,omega`, one atom per
    /// row in the deterministic atom order.
    pub fn lattice_csv(&self) -> String {
        let mut out = String::from("frame_id,x,omega\n");
        for a in &self.atoms {
            let _ = writeln!(
                out,
                "{},{},{}",
                self.frames[a.frame].id(),
                a.point.x,
                a.point.omega
            );
        }
        out
    }
}

/// Separation diagnostics of a quilted system: the union of the per-frame
/// atom sets is a finite union of separated sets.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeparationReport {
    /// Minimal guaranteed pairwise max-norm distance within one frame's
    /// atoms: `min(a_j, b_j)`, minimized over used frames.
    pub gamma: usize,
    /// Number of separated subsets, i.e. of frames contributing atoms.
    pub separated_subsets: usize,
    /// Covering height of the provenance partition after enlargement by
    /// the assembly `delta`.
    pub height_delta: usize,
    /// Maximum number of atoms sharing one grid point.
    pub point_density: usize,
}

/// Decay envelope of a window family against the periodized Gaussian:
/// the smallest `C` with `|V_{g0} g|(z) <= C (1 + |z|^2)^{-s/2}` on the
/// wrapped grid, for the chosen exponent `s`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DecayProfile {
    pub constant: f64,
    pub exponent: f64,
}

/// Measures the decay envelope over all windows and grid points.
/// Requires `s > 2`.
pub fn decay_profile(windows: &[Signal], s: f64) -> Result<DecayProfile> {
    if s <= 2.0 {
        return Err(QuiltError::Domain(format!(
            "decay exponent must exceed 2, got {s}"
        )));
    }
    if windows.is_empty() {
        return Err(QuiltError::Config("decay profile needs at least one window".into()));
    }
    let l = windows[0].len();
    let gaussian = crate::signal::periodized_gaussian(l)?;
    let mut constant = 0.0f64;
    for w in windows {
        if w.len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: w.len(),
            });
        }
        let grid = stft(w, &gaussian)?;
        for x in 0..l {
            for omega in 0..l {
                let z = TFPoint::new(x, omega, l);
                let weight = (1.0 + z.wrapped_norm_sqr(l)).powf(s / 2.0);
                constant = constant.max(grid[(x, omega)].norm() * weight);
            }
        }
    }
    Ok(DecayProfile {
        constant,
        exponent: s,
    })
}

/// Closed-form upper frame bound `C^2 n(delta) (1 + 1/gamma)^2` from the
/// decay constant and the separation report of the quilt.
pub fn bessel_estimate(quilt: &QuiltedSystem, decay: &DecayProfile) -> f64 {
    let report = quilt.separation_report();
    let gamma = report.gamma as f64;
    decay.constant.powi(2) * report.height_delta as f64 * (1.0 + 1.0 / gamma).powi(2)
}
