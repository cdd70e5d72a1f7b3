//! Built-in experiment presets: the quilted-lattice export, the two
//! condition-number/iteration tables, the diagonal-preconditioning
//! comparison and the atom-replacement study.
//!
//! Geometry, windows and reference values are pinned here so every
//! command is reproducible from a seed alone.

use std::fmt::Write as _;

use quiltframe_core::constructions::{build_replacement, ReplacementPlan};
use quiltframe_core::gabor::{FrameBounds, GaborFrame, Lattice};
use quiltframe_core::quilt::{
    assemble_quilt, build_partition_stripes, build_partition_tiles, FrameAssignment,
    QuiltedSystem, Region,
};
use quiltframe_core::reconstruct::{
    diag_precondition_reconstruct, frame_algorithm, FrameAlgoConfig, PreconditionReport,
    ReconstructionReport, TolMode,
};
use quiltframe_core::signal::{periodized_gaussian_scaled, random_signal, Signal};
use quiltframe_core::Result;

/// Header line stating the window assumption all presets share.
pub const WINDOW_ASSUMPTION: &str = "# windows: periodized Gaussians with lattice-adapted width \
(a/b), canonically tightened per frame (assumption; the reference experiments do not state \
their seed windows)";

/// Periodized Gaussian with spread matched to the `(a, b)` lattice,
/// canonically tightened.
pub fn adapted_tight_frame(l: usize, a: usize, b: usize, id: usize) -> Result<GaborFrame> {
    let window = periodized_gaussian_scaled(l, a as f64 / b as f64)?;
    GaborFrame::new(window, Lattice::new(a, b, l)?, id)?.tightened()
}

/// Checkerboard quilt of two frames over square tiles.
fn checkerboard_quilt(
    frames: &[GaborFrame],
    l: usize,
    tile: usize,
    delta: usize,
) -> Result<QuiltedSystem> {
    let partition = build_partition_tiles(l, tile)?;
    let per = l / tile;
    let assignment: Vec<usize> = (0..per * per).map(|k| ((k / per) + (k % per)) % 2).collect();
    assemble_quilt(frames, &partition, &FrameAssignment::one_to_one(&assignment), delta)
}

/// One row of the condition-number / iteration tables.
pub struct TableRow {
    pub redundancy: f64,
    pub overlap: bool,
    pub delta: usize,
    pub bounds: FrameBounds,
    pub iterations: usize,
    pub converged: bool,
    pub reference_condition: f64,
    pub reference_iterations: usize,
    pub history_csv: String,
}

/// The four quilted systems behind both tables: redundancy 4.5 on a
/// 72-tile checkerboard (overlap enlargement 2) and redundancy 1.125 on
/// a 36-tile checkerboard (overlap enlargement 8).
pub fn table_systems(l: usize) -> Result<Vec<(f64, bool, usize, QuiltedSystem)>> {
    let high = [
        adapted_tight_frame(l, 4, 8, 0)?,
        adapted_tight_frame(l, 8, 4, 1)?,
    ];
    let low = [
        adapted_tight_frame(l, 8, 16, 0)?,
        adapted_tight_frame(l, 16, 8, 1)?,
    ];
    Ok(vec![
        (4.5, false, 0, checkerboard_quilt(&high, l, l / 2, 0)?),
        (4.5, true, 2, checkerboard_quilt(&high, l, l / 2, 2)?),
        (1.125, false, 0, checkerboard_quilt(&low, l, l / 4, 0)?),
        (1.125, true, 8, checkerboard_quilt(&low, l, l / 4, 8)?),
    ])
}

/// Reference values the tables are compared against.
pub const TABLE_REFERENCE: [(f64, bool, f64, usize); 4] = [
    (4.5, false, 1.6, 21),
    (4.5, true, 1.4, 17),
    (1.125, false, 6.4, 322),
    (1.125, true, 1.5, 18),
];

/// Runs the four table configurations: condition numbers plus frame
/// algorithm iteration counts at the given tolerance.
pub fn run_tables(l: usize, seed: u64, tol: f64) -> Result<Vec<TableRow>> {
    let truth = random_signal(l, seed)?;
    let mut rows = Vec::new();
    for ((redundancy, overlap, delta, quilt), (_, _, ref_cond, ref_iter)) in
        table_systems(l)?.into_iter().zip(TABLE_REFERENCE)
    {
        let coeffs = quilt.analysis(&truth)?;
        let config = FrameAlgoConfig {
            relaxation: None,
            tol,
            max_iter: 20_000,
            tol_mode: TolMode::TruthError,
        };
        let report = frame_algorithm(&quilt, &coeffs, &config, Some(&truth))?;
        rows.push(TableRow {
            redundancy,
            overlap,
            delta,
            bounds: report.bounds,
            iterations: report.iterations,
            converged: report.converged,
            reference_condition: ref_cond,
            reference_iterations: ref_iter,
            history_csv: report.history_csv(),
        });
    }
    Ok(rows)
}

/// CSV for the table rows (held by both table commands).
pub fn tables_csv(rows: &[TableRow]) -> String {
    let mut out = String::from(
        "redundancy,overlap,delta,lower,upper,cond_operator,cond_analysis,iterations,\
reference_cond,reference_iterations\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{:e},{},{},{:e},{:e},{:e},{:e},{},{:e},{}",
            r.redundancy,
            r.overlap,
            r.delta,
            r.bounds.lower,
            r.bounds.upper,
            r.bounds.condition,
            r.bounds.analysis_condition(),
            r.iterations,
            r.reference_condition,
            r.reference_iterations
        );
    }
    out
}

/// The quilted lattice of the partition illustration: length 256,
/// sixteen 64x64 tiles, two lattices alternating in a checkerboard.
pub fn figure1_quilt() -> Result<QuiltedSystem> {
    let l = 256;
    let frames = [
        GaborFrame::new(periodized_gaussian_scaled(l, 0.5)?, Lattice::new(8, 16, l)?, 0)?,
        GaborFrame::new(periodized_gaussian_scaled(l, 2.0)?, Lattice::new(16, 8, l)?, 1)?,
    ];
    checkerboard_quilt(&frames, l, 64, 0)
}

/// Outcome of the diagonal preconditioning experiment.
pub struct PreconditionOutcome {
    pub quilt: QuiltedSystem,
    pub reference: Signal,
    pub report: PreconditionReport,
    pub seed: u64,
    /// Relative errors the experiment is compared against.
    pub reference_plain: f64,
    pub reference_corrected: f64,
}

/// Low-redundancy overlap quilt reconstructed through the quilt operator
/// with and without inverse-diagonal correction: two stripes with
/// enlargement 16 on the redundancy-1.125 frames.
pub fn run_precondition(seed: u64) -> Result<PreconditionOutcome> {
    let l = 144;
    let frames = [
        adapted_tight_frame(l, 8, 16, 0)?,
        adapted_tight_frame(l, 16, 8, 1)?,
    ];
    let partition = build_partition_stripes(l, &[0, l / 2])?;
    let quilt = assemble_quilt(
        &frames,
        &partition,
        &FrameAssignment::one_to_one(&[0, 1]),
        16,
    )?;
    let reference = random_signal(l, seed)?;
    let report = diag_precondition_reconstruct(&quilt, &reference)?;
    Ok(PreconditionOutcome {
        quilt,
        reference,
        report,
        seed,
        reference_plain: 0.2239,
        reference_corrected: 0.032,
    })
}

/// Sample CSV of the preconditioning experiment: reference signal and
/// both reconstructions.
pub fn precondition_csv(outcome: &PreconditionOutcome) -> String {
    let mut out = String::from(
        "t,ref_re,ref_im,plain_re,plain_im,corrected_re,corrected_im\n",
    );
    let r = outcome.reference.samples();
    let p = outcome.report.rec_plain.samples();
    let c = outcome.report.rec_corrected.samples();
    for t in 0..r.len() {
        let _ = writeln!(
            out,
            "{t},{:e},{:e},{:e},{:e},{:e},{:e}",
            r[t].re, r[t].im, p[t].re, p[t].im, c[t].re, c[t].im
        );
    }
    out
}

/// One replacement configuration with its certification plan and
/// frame-algorithm behavior.
pub struct ReplacementRow {
    pub label: String,
    pub delta: usize,
    pub bounds: FrameBounds,
    pub plan: ReplacementPlan,
    pub report: ReconstructionReport,
    pub reference_condition: Option<f64>,
    pub reference_iterations: Option<usize>,
}

/// Builds one replacement system: base frame kept outside the centered
/// square, replacing frame inside the square enlarged by `delta`.
pub fn replacement_system(
    l: usize,
    base: &GaborFrame,
    replacement: &GaborFrame,
    side: usize,
    delta: usize,
) -> Result<(QuiltedSystem, ReplacementPlan)> {
    let x0 = (l - side) / 2;
    let omega = Region::from_spans(0, l, x0, side, x0, side)?;
    let omega_star = omega.enlarge(delta).with_id(1);
    build_replacement(base, replacement, &omega, &omega_star)
}

/// The atom-replacement study: high-redundancy systems without and with
/// overlap, plus a three-way overlap sweep at low redundancy.
pub fn run_replacement_experiment(
    l: usize,
    seed: u64,
    tol: f64,
) -> Result<(Vec<ReplacementRow>, Vec<ReplacementRow>)> {
    let truth = random_signal(l, seed)?;
    let config = FrameAlgoConfig {
        relaxation: None,
        tol,
        max_iter: 20_000,
        tol_mode: TolMode::TruthError,
    };
    let side = l / 3;

    let mut high = Vec::new();
    let base_high = adapted_tight_frame(l, 4, 8, 0)?;
    let repl_high = adapted_tight_frame(l, 8, 4, 1)?;
    for (label, delta, ref_cond, ref_iter) in [
        ("high-redundancy, no overlap", 0usize, 1.5, 18usize),
        ("high-redundancy, overlap", 4, 1.4, 17),
    ] {
        let (quilt, plan) = replacement_system(l, &base_high, &repl_high, side, delta)?;
        let coeffs = quilt.analysis(&truth)?;
        let report = frame_algorithm(&quilt, &coeffs, &config, Some(&truth))?;
        high.push(ReplacementRow {
            label: label.into(),
            delta,
            bounds: report.bounds,
            plan,
            report,
            reference_condition: Some(ref_cond),
            reference_iterations: Some(ref_iter),
        });
    }

    let mut sweep = Vec::new();
    let base_low = adapted_tight_frame(l, 8, 16, 0)?;
    let repl_low = adapted_tight_frame(l, 16, 8, 1)?;
    for delta in [0usize, 8, 16] {
        let (quilt, plan) = replacement_system(l, &base_low, &repl_low, side, delta)?;
        let coeffs = quilt.analysis(&truth)?;
        let report = frame_algorithm(&quilt, &coeffs, &config, Some(&truth))?;
        sweep.push(ReplacementRow {
            label: format!("low-redundancy, overlap {delta}"),
            delta,
            bounds: report.bounds,
            plan,
            report,
            reference_condition: None,
            reference_iterations: None,
        });
    }
    Ok((high, sweep))
}

/// CSV summary of replacement rows.
pub fn replacement_csv(rows: &[ReplacementRow]) -> String {
    let mut out = String::from(
        "label,delta,removed,inserted,defect,certified,guaranteed_lower,measured_lower,\
measured_upper,cond_analysis,iterations\n",
    );
    for r in rows {
        let guaranteed = r
            .plan
            .guaranteed_lower
            .map(|g| format!("{g:e}"))
            .unwrap_or_else(|| "n/a".into());
        let _ = writeln!(
            out,
            "{},{},{},{},{:e},{},{},{:e},{:e},{:e},{}",
            r.label,
            r.delta,
            r.plan.removed.len(),
            r.plan.inserted.len(),
            r.plan.defect,
            r.plan.certified,
            guaranteed,
            r.bounds.lower,
            r.bounds.upper,
            r.bounds.analysis_condition(),
            r.report.iterations
        );
    }
    out
}
