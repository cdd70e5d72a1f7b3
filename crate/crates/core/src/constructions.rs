//! Certified quilt constructions.
//!
//! Two routes to a guaranteed lower frame bound are implemented. The
//! stripe route partitions the time axis with a compactly supported
//! partition of unity and keeps, per stripe, exactly the lattice time
//! shifts whose windows meet the stripe; with tight unit-bound frames the
//! weighted expansion reconstructs perfectly. The replacement route swaps
//! the atoms of one frame inside a region for atoms of a second frame
//! inside an enlarged region and certifies the swap through the defect
//! norm of the synthesis mismatch.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::fmt::Write as _;

use crate::error::{QuiltError, Result};
use crate::gabor::GaborFrame;
use crate::linalg::{operator_norm_power, operator_norm_svd};
use crate::quilt::region::CircInterval;
use crate::quilt::{FrameAssignment, Partition, Provenance, QuiltAtom, QuiltedSystem, Region};
use crate::signal::{stft, support_interval, Signal, TFPoint};

/// Tolerance for "tight with unit bound" checks on certified paths.
const TIGHTNESS_TOL: f64 = 1e-8;

/// Bump shape used when building a partition of unity.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BumpShape {
    /// Characteristic functions, normalized on overlaps.
    Indicator,
    /// Strictly positive raised-cosine bumps, normalized to sum to one.
    RaisedCosine,
}

/// A partition of unity on the time axis: nonnegative vectors summing to
/// one pointwise, each vanishing outside its (circular) support.
#[derive(Debug, Clone, PartialEq)]
pub struct PartitionOfUnity {
    l: usize,
    psi: Vec<Vec<f64>>,
    supports: Vec<(usize, usize)>,
    height: usize,
}

impl PartitionOfUnity {
    pub fn signal_len(&self) -> usize {
        self.l
    }

    pub fn len(&self) -> usize {
        self.psi.len()
    }

    pub fn is_empty(&self) -> bool {
        self.psi.is_empty()
    }

    /// Weight vector of member `r`.
    pub fn weights(&self, r: usize) -> &[f64] {
        &self.psi[r]
    }

    /// Circular support `(start, len)` of member `r`.
    pub fn support(&self, r: usize) -> (usize, usize) {
        self.supports[r]
    }

    /// Maximum number of supports covering one time index.
    pub fn height(&self) -> usize {
        self.height
    }
}

/// Builds a partition of unity from circular supports `(start, len)`.
/// The supports must cover the time axis; bumps are normalized pointwise
/// so the members sum to one exactly.
pub fn build_bapu(l: usize, supports: &[(usize, usize)], shape: BumpShape) -> Result<PartitionOfUnity> {
    if supports.is_empty() {
        return Err(QuiltError::Config("a partition of unity needs at least one member".into()));
    }
    for &(start, len) in supports {
        if len == 0 || len > l {
            return Err(QuiltError::Config(format!(
                "support ({start}, {len}) does not fit the time axis of length {l}"
            )));
        }
        if start >= l {
            return Err(QuiltError::Config(format!(
                "support start {start} outside [0, {l})"
            )));
        }
    }
    let mut bumps: Vec<Vec<f64>> = Vec::with_capacity(supports.len());
    for &(start, len) in supports {
        let mut b = vec![0.0f64; l];
        for j in 0..len {
            let t = (start + j) % l;
            b[t] = match shape {
                BumpShape::Indicator => 1.0,
                BumpShape::RaisedCosine => {
                    let phase = std::f64::consts::PI * (j + 1) as f64 / (len + 1) as f64;
                    phase.sin().powi(2)
                }
            };
        }
        bumps.push(b);
    }
    let mut psi = vec![vec![0.0f64; l]; supports.len()];
    let mut height = 0usize;
    for t in 0..l {
        let total: f64 = bumps.iter().map(|b| b[t]).sum();
        if total <= 0.0 {
            return Err(QuiltError::Config(format!("coverage gap at time index {t}")));
        }
        let cover = bumps.iter().filter(|b| b[t] > 0.0).count();
        height = height.max(cover);
        for (r, b) in bumps.iter().enumerate() {
            psi[r][t] = b[t] / total;
        }
    }
    Ok(PartitionOfUnity {
        l,
        psi,
        supports: supports.to_vec(),
        height,
    })
}

/// Diagonal (painless) tight normalization for a frame whose window
/// support width is at most `L/b`: the frame operator is then exactly
/// diagonal and the rescaled window generates a tight frame with unit
/// bound while keeping its support samplewise.
pub fn painless_tight_frame(frame: &GaborFrame) -> Result<GaborFrame> {
    let l = frame.signal_len();
    let b = frame.lattice().frequency_step();
    let a = frame.lattice().time_step();
    let (_, width) = support_interval(frame.window())
        .ok_or_else(|| QuiltError::Domain("cannot tighten the zero window".into()))?;
    if width > l / b {
        return Err(QuiltError::Precondition(format!(
            "window support width {width} exceeds L/b = {}; the frame operator is not diagonal",
            l / b
        )));
    }
    let g = frame.window();
    let mods = (l / b) as f64;
    let mut diagonal = vec![0.0f64; l];
    for (t, slot) in diagonal.iter_mut().enumerate() {
        let sum: f64 = (0..l / a)
            .map(|n| g.at(t as i64 - (n * a) as i64).norm_sqr())
            .sum();
        *slot = mods * sum;
    }
    let positive = diagonal.iter().all(|&d| d > 0.0);
    if !positive {
        return Err(QuiltError::NotAFrame {
            lower: 0.0,
            upper: diagonal.iter().cloned().fold(0.0, f64::max),
        });
    }
    let samples: Vec<Complex64> = g
        .samples()
        .iter()
        .zip(&diagonal)
        .map(|(&v, &d)| {
            if v.norm_sqr() == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                v / d.sqrt()
            }
        })
        .collect();
    frame.with_window(Signal::new(samples)?)
}

/// A reduced multi-window (stripe) system: one Gabor frame per stripe of
/// a time partition of unity, restricted to the lattice time shifts whose
/// window supports meet the stripe.
#[derive(Debug, Clone)]
pub struct StripeSystem {
    pou: PartitionOfUnity,
    frames: Vec<GaborFrame>,
    frame_per_stripe: Vec<usize>,
    time_indices: Vec<Vec<usize>>,
    full_axis_stripes: Vec<usize>,
}

/// Computes the per-stripe index sets: stripe `r` keeps lattice time
/// index `n` exactly when the support of the shifted window intersects
/// the support of `psi_r`; every excluded shift then vanishes against
/// `psi_r` samplewise. A window with no zero sample degenerates to the
/// full time axis and is reported in `full_axis_stripes`.
pub fn stripe_index_sets(
    pou: &PartitionOfUnity,
    frames: &[GaborFrame],
    frame_per_stripe: &[usize],
) -> Result<StripeSystem> {
    let l = pou.signal_len();
    if frame_per_stripe.len() != pou.len() {
        return Err(QuiltError::Config(format!(
            "{} stripes but {} frame assignments",
            pou.len(),
            frame_per_stripe.len()
        )));
    }
    for f in frames {
        if f.signal_len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: f.signal_len(),
            });
        }
    }
    let mut time_indices = Vec::with_capacity(pou.len());
    let mut full_axis_stripes = Vec::new();
    for (r, &j) in frame_per_stripe.iter().enumerate() {
        let frame = frames
            .get(j)
            .ok_or_else(|| QuiltError::Config(format!("stripe {r} names unknown frame {j}")))?;
        let a = frame.lattice().time_step();
        let support = support_interval(frame.window());
        let (start, width) = match support {
            Some(s) => s,
            None => {
                return Err(QuiltError::Domain(format!(
                    "stripe {r}: the zero window supports no reconstruction"
                )))
            }
        };
        let (psi_start, psi_len) = pou.support(r);
        let stripe_iv = CircInterval {
            start: psi_start,
            len: psi_len,
        };
        if width >= l {
            // Window covers the whole axis; nothing can be excluded.
            full_axis_stripes.push(r);
            time_indices.push((0..l / a).collect());
            continue;
        }
        let mut ns = Vec::new();
        for n in 0..l / a {
            let shifted = CircInterval {
                start: (start + n * a) % l,
                len: width,
            };
            if shifted.intersects(&stripe_iv, l) {
                ns.push(n);
            }
        }
        time_indices.push(ns);
    }
    Ok(StripeSystem {
        pou: pou.clone(),
        frames: frames.to_vec(),
        frame_per_stripe: frame_per_stripe.to_vec(),
        time_indices,
        full_axis_stripes,
    })
}

impl StripeSystem {
    pub fn signal_len(&self) -> usize {
        self.pou.signal_len()
    }

    pub fn stripes(&self) -> usize {
        self.pou.len()
    }

    pub fn partition_of_unity(&self) -> &PartitionOfUnity {
        &self.pou
    }

    pub fn frames(&self) -> &[GaborFrame] {
        &self.frames
    }

    pub fn frame_of_stripe(&self, r: usize) -> &GaborFrame {
        &self.frames[self.frame_per_stripe[r]]
    }

    /// Kept lattice time indices of stripe `r`.
    pub fn time_indices(&self, r: usize) -> &[usize] {
        &self.time_indices[r]
    }

    /// Stripes whose window had no zero sample (full-axis fallback).
    pub fn full_axis_stripes(&self) -> &[usize] {
        &self.full_axis_stripes
    }

    /// Atoms in coefficient order: stripe major, then kept time index,
    /// then frequency index. Shared lattice points of adjacent stripes
    /// appear once per stripe, mirroring the weighted expansion.
    pub fn atom_points(&self) -> Vec<(usize, TFPoint)> {
        let l = self.signal_len();
        let mut out = Vec::new();
        for r in 0..self.stripes() {
            let frame = self.frame_of_stripe(r);
            let a = frame.lattice().time_step();
            let b = frame.lattice().frequency_step();
            for &n in &self.time_indices[r] {
                for m in 0..l / b {
                    out.push((r, TFPoint::new(n * a, m * b, l)));
                }
            }
        }
        out
    }

    /// Analysis coefficients `<f, pi(lambda) g^{m(r)}>` in atom order.
    pub fn analysis(&self, f: &Signal) -> Result<Vec<Complex64>> {
        let l = self.signal_len();
        if f.len() != l {
            return Err(QuiltError::DimensionMismatch {
                expected: l,
                found: f.len(),
            });
        }
        Ok(self
            .atom_points()
            .into_iter()
            .map(|(r, p)| f.inner(&self.frame_of_stripe(r).atom(p)))
            .collect())
    }

    /// Weighted reconstruction
    /// `f = sum_r sum_{lambda} c_{r,lambda} psi_r pi(lambda) g^{m(r)}`.
    /// Requires every underlying frame to be tight with unit bound.
    pub fn reconstruct(&self, coeffs: &[Complex64]) -> Result<Signal> {
        let l = self.signal_len();
        let expected: usize = self
            .atom_points()
            .len();
        if coeffs.len() != expected {
            return Err(QuiltError::DimensionMismatch {
                expected,
                found: coeffs.len(),
            });
        }
        for (j, frame) in self.frames.iter().enumerate() {
            if !self.frame_per_stripe.contains(&j) {
                continue;
            }
            let bounds = frame.frame_bounds();
            if !bounds.is_tight(TIGHTNESS_TOL) || (bounds.lower - 1.0).abs() > 1e-6 {
                return Err(QuiltError::Precondition(format!(
                    "frame {j} is not tight with unit bound (A = {}, B = {})",
                    bounds.lower, bounds.upper
                )));
            }
        }
        let mut acc = vec![Complex64::new(0.0, 0.0); l];
        let mut idx = 0usize;
        for r in 0..self.stripes() {
            let frame = self.frame_of_stripe(r);
            let a = frame.lattice().time_step();
            let b = frame.lattice().frequency_step();
            let mut partial = vec![Complex64::new(0.0, 0.0); l];
            for &n in &self.time_indices[r] {
                for m in 0..l / b {
                    let c = coeffs[idx];
                    idx += 1;
                    if c.norm_sqr() == 0.0 {
                        continue;
                    }
                    let atom = frame.atom(TFPoint::new(n * a, m * b, l));
                    for (slot, v) in partial.iter_mut().zip(atom.samples()) {
                        *slot += c * v;
                    }
                }
            }
            let weights = self.pou.weights(r);
            for (slot, (p, &w)) in acc.iter_mut().zip(partial.iter().zip(weights)) {
                *slot += p * w;
            }
        }
        Signal::new(acc)
    }

    /// The underlying quilted system (atom set union, deduplicated), with
    /// the stripe supports as provenance partition.
    pub fn to_quilt(&self) -> Result<QuiltedSystem> {
        let l = self.signal_len();
        let mut regions = Vec::with_capacity(self.stripes());
        for r in 0..self.stripes() {
            let (start, len) = self.pou.support(r);
            regions.push(Region::from_spans(r, l, start, len, 0, l)?);
        }
        let partition = Partition::new(l, regions)?;
        let assignment = FrameAssignment::one_to_one(&self.frame_per_stripe);
        let mut atoms: Vec<QuiltAtom> = self
            .atom_points()
            .into_iter()
            .map(|(r, p)| QuiltAtom {
                frame: self.frame_per_stripe[r],
                point: p,
            })
            .collect();
        atoms.sort();
        atoms.dedup();
        QuiltedSystem::from_parts(
            self.frames.clone(),
            atoms,
            Provenance {
                partition,
                assignment,
                delta: 0,
            },
        )
    }
}

/// Cross-Gramian of two atom families: entry `(mu, lambda)` is
/// `<pi(lambda) g, pi(mu) h>`, mapping coefficients on the removed atoms
/// to coefficients on the replacing atoms.
pub fn cross_gramian(
    frame_g: &GaborFrame,
    removed: &[TFPoint],
    frame_h: &GaborFrame,
    inserted: &[TFPoint],
) -> Result<DMatrix<Complex64>> {
    if frame_g.signal_len() != frame_h.signal_len() {
        return Err(QuiltError::DimensionMismatch {
            expected: frame_g.signal_len(),
            found: frame_h.signal_len(),
        });
    }
    let g_atoms: Vec<Signal> = removed.iter().map(|&p| frame_g.atom(p)).collect();
    let h_atoms: Vec<Signal> = inserted.iter().map(|&p| frame_h.atom(p)).collect();
    Ok(DMatrix::from_fn(inserted.len(), removed.len(), |mu, la| {
        g_atoms[la].inner(&h_atoms[mu])
    }))
}

/// Synthesis matrix of a finite atom family: column `i` is the atom
/// `pi(points[i]) g` as a length-`L` vector.
fn synthesis_matrix(frame: &GaborFrame, points: &[TFPoint]) -> DMatrix<Complex64> {
    let l = frame.signal_len();
    let mut m = DMatrix::zeros(l, points.len());
    for (i, &p) in points.iter().enumerate() {
        let atom = frame.atom(p);
        for (t, &v) in atom.samples().iter().enumerate() {
            m[(t, i)] = v;
        }
    }
    m
}

/// Squared operator norm of the synthesis mismatch
/// `T*_{g,F1} - T*_{h,F2} L`, certified against `A1/2`. The norm is
/// computed by dense SVD and cross-checked by power iteration; the two
/// routes must agree to 1e-8.
pub fn replacement_defect(
    frame_g: &GaborFrame,
    removed: &[TFPoint],
    frame_h: &GaborFrame,
    inserted: &[TFPoint],
    cross_map: &DMatrix<Complex64>,
    base_lower: f64,
) -> Result<(f64, bool)> {
    if cross_map.nrows() != inserted.len() || cross_map.ncols() != removed.len() {
        return Err(QuiltError::DimensionMismatch {
            expected: inserted.len() * removed.len(),
            found: cross_map.nrows() * cross_map.ncols(),
        });
    }
    let mismatch = if removed.is_empty() {
        DMatrix::zeros(frame_g.signal_len(), 0)
    } else {
        let g_syn = synthesis_matrix(frame_g, removed);
        if inserted.is_empty() {
            g_syn
        } else {
            let h_syn = synthesis_matrix(frame_h, inserted);
            g_syn - h_syn * cross_map
        }
    };
    let by_svd = operator_norm_svd(&mismatch);
    let by_power = operator_norm_power(&mismatch, 0x5eed, 1e-13, 200_000)?;
    if (by_svd - by_power).abs() > 1e-8 * by_svd.max(1.0) {
        return Err(QuiltError::Domain(format!(
            "operator norm routes disagree: SVD {by_svd:e}, power iteration {by_power:e}"
        )));
    }
    let defect = by_svd * by_svd;
    Ok((defect, defect < base_lower / 2.0))
}

/// Smallest isotropic enlargement of `omega` whose replacing atom set
/// certifies the swap through the cross-ambiguity tail bound
/// `|h| sqrt(|F1|) tail < sqrt(A1/2)`. Requires the replacing frame to be
/// tight with unit bound. Returns the enlarged region and the enlargement.
pub fn choose_omega_star(
    omega: &Region,
    frame_g: &GaborFrame,
    frame_h: &GaborFrame,
    base_lower: f64,
) -> Result<(Region, usize)> {
    let l = frame_g.signal_len();
    if frame_h.window().norm() == 0.0 {
        return Err(QuiltError::Domain("replacing frame has a zero window".into()));
    }
    if base_lower <= 0.0 {
        return Err(QuiltError::CertificationImpossible(
            "the base frame has no positive lower bound".into(),
        ));
    }
    let h_bounds = frame_h.frame_bounds();
    if !h_bounds.is_tight(TIGHTNESS_TOL) || (h_bounds.lower - 1.0).abs() > 1e-6 {
        return Err(QuiltError::Precondition(format!(
            "replacing frame must be tight with unit bound (A = {}, B = {})",
            h_bounds.lower, h_bounds.upper
        )));
    }
    let removed: Vec<TFPoint> = frame_g
        .lattice()
        .points()
        .into_iter()
        .filter(|p| omega.contains(p))
        .collect();
    let threshold = (base_lower / 2.0).sqrt();
    if removed.is_empty() {
        return Ok((omega.clone(), 0));
    }
    // |<pi(lambda) g, pi(mu) h>| = |ambiguity(mu - lambda)| with
    // ambiguity(z) = <g, pi(z) h>.
    let ambiguity = stft(frame_g.window(), frame_h.window())?;
    let h_norm = frame_h.window().norm();
    let scale = h_norm * (removed.len() as f64).sqrt();
    let mut last_tail = f64::INFINITY;
    for delta in 0..=l {
        let enlarged = omega.enlarge(delta);
        let mut tail = 0.0f64;
        for mu in frame_h.lattice().points() {
            if enlarged.contains(&mu) {
                continue;
            }
            let worst = removed
                .iter()
                .map(|&la| {
                    let z = mu.sub_mod(&la, l);
                    ambiguity[(z.x, z.omega)].norm()
                })
                .fold(0.0, f64::max);
            tail += worst;
        }
        debug_assert!(tail <= last_tail + 1e-12, "tail grew with enlargement");
        last_tail = tail;
        if scale * tail < threshold {
            return Ok((enlarged, delta));
        }
    }
    Err(QuiltError::CertificationImpossible(format!(
        "no enlargement up to the whole plane reaches the tail bound {threshold:e}"
    )))
}

/// A certified (or attempted) replacement of finitely many atoms.
#[derive(Debug, Clone)]
pub struct ReplacementPlan {
    pub omega: Region,
    pub omega_star: Region,
    /// Atoms of the base frame inside `omega` (removed).
    pub removed: Vec<TFPoint>,
    /// Atoms of the replacing frame inside `omega_star` (inserted).
    pub inserted: Vec<TFPoint>,
    /// Coefficient-domain map from removed to inserted atoms.
    pub cross_map: DMatrix<Complex64>,
    /// Squared operator norm of the synthesis mismatch.
    pub defect: f64,
    /// Squared operator norm of the cross map.
    pub cross_norm: f64,
    /// Measured lower bound of the base frame.
    pub base_lower: f64,
    /// Whether `defect < base_lower / 2`.
    pub certified: bool,
    /// Guaranteed lower bound of the stitched system when certified.
    pub guaranteed_lower: Option<f64>,
}

impl ReplacementPlan {
    /// Plain-text report used by the command line tools.
    pub fn report(&self) -> String {
        let mut out = String::new();
        let _ = writeln!(out, "replacement plan");
        let _ = writeln!(out, "  removed atoms:  {}", self.removed.len());
        let _ = writeln!(out, "  inserted atoms: {}", self.inserted.len());
        let _ = writeln!(out, "  base lower bound A1 = {:e}", self.base_lower);
        let _ = writeln!(out, "  defect C = {:e}", self.defect);
        let _ = writeln!(out, "  cross map norm^2 = {:e}", self.cross_norm);
        let _ = writeln!(out, "  certified (C < A1/2): {}", self.certified);
        match self.guaranteed_lower {
            Some(a) => {
                let _ = writeln!(out, "  guaranteed lower bound = {a:e}");
            }
            None => {
                let _ = writeln!(out, "  guaranteed lower bound = n/a");
            }
        }
        out
    }
}

/// Builds the stitched system that keeps the base frame outside `omega`
/// and uses the replacing frame inside `omega_star`, together with its
/// certification plan.
pub fn build_replacement(
    frame_g: &GaborFrame,
    frame_h: &GaborFrame,
    omega: &Region,
    omega_star: &Region,
) -> Result<(QuiltedSystem, ReplacementPlan)> {
    let l = frame_g.signal_len();
    if frame_h.signal_len() != l {
        return Err(QuiltError::DimensionMismatch {
            expected: l,
            found: frame_h.signal_len(),
        });
    }
    let base_lower = frame_g.frame_bounds().lower;
    let removed: Vec<TFPoint> = frame_g
        .lattice()
        .points()
        .into_iter()
        .filter(|p| omega.contains(p))
        .collect();
    let inserted: Vec<TFPoint> = frame_h
        .lattice()
        .points()
        .into_iter()
        .filter(|p| omega_star.contains(p))
        .collect();
    let cross_map = cross_gramian(frame_g, &removed, frame_h, &inserted)?;
    let (defect, certified) =
        replacement_defect(frame_g, &removed, frame_h, &inserted, &cross_map, base_lower)?;
    let cross_norm = operator_norm_svd(&cross_map).powi(2);
    let guaranteed_lower = if certified {
        Some((base_lower - 2.0 * defect) / 1.0f64.max(2.0 * cross_norm))
    } else {
        None
    };

    let mut atoms: Vec<QuiltAtom> = Vec::new();
    for p in frame_g.lattice().points() {
        if !omega.contains(&p) {
            atoms.push(QuiltAtom { frame: 0, point: p });
        }
    }
    for &p in &inserted {
        atoms.push(QuiltAtom { frame: 1, point: p });
    }
    atoms.sort();
    atoms.dedup();
    let provenance = Provenance {
        partition: Partition::new(l, vec![Region::full_plane(0, l), omega_star.with_id(1)])?,
        assignment: FrameAssignment::new(vec![(0, 0), (1, 1)]),
        delta: 0,
    };
    let quilt = QuiltedSystem::from_parts(
        vec![frame_g.clone(), frame_h.clone()],
        atoms,
        provenance,
    )?;
    let plan = ReplacementPlan {
        omega: omega.clone(),
        omega_star: omega_star.clone(),
        removed,
        inserted,
        cross_map,
        defect,
        cross_norm,
        base_lower,
        certified,
        guaranteed_lower,
    };
    Ok((quilt, plan))
}

/// Same-lattice window perturbation test: returns the admissible squared
/// window distance `A1 / (2 |F1|)` and whether `|h - g|^2` stays below it.
pub fn window_perturbation_bound(
    g: &Signal,
    h: &Signal,
    removed_count: usize,
    base_lower: f64,
) -> Result<(f64, bool)> {
    if g.len() != h.len() {
        return Err(QuiltError::DimensionMismatch {
            expected: g.len(),
            found: h.len(),
        });
    }
    let threshold = if removed_count == 0 {
        f64::INFINITY
    } else {
        base_lower / (2.0 * removed_count as f64)
    };
    let distance = h.sub(g).norm().powi(2);
    Ok((threshold, distance < threshold))
}
