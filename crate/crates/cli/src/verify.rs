//! Self-contained invariant and oracle suite behind `quiltframe verify`.
//!
//! Each check runs the library against an independent route (direct inner
//! products, dense SVD, exhaustive counts) or a structural invariant and
//! reports one pass/fail line with the measured value.

use num_complex::Complex64;

use quiltframe_core::constructions::{
    build_bapu, build_replacement, choose_omega_star, cross_gramian, painless_tight_frame,
    replacement_defect, stripe_index_sets, window_perturbation_bound, BumpShape,
};
use quiltframe_core::gabor::{apply_operator, GaborFrame, Lattice};
use quiltframe_core::linalg::max_abs_diff;
use quiltframe_core::quilt::{
    assemble_quilt, bessel_estimate, decay_profile, Partition, QuiltedSystem, Region,
};
use quiltframe_core::quilt::FrameAssignment;
use quiltframe_core::reconstruct::{
    conjugate_gradient_solve, diag_precondition_reconstruct, dual_frame_reconstruct,
    frame_algorithm, FrameAlgoConfig, TolMode,
};
use quiltframe_core::signal::{
    periodized_gaussian, random_signal, relative_error, stft, tf_shift, truncated_gaussian,
    Signal, TFPoint,
};
use quiltframe_core::Result;

/// One executed check.
pub struct CheckResult {
    pub module: &'static str,
    pub name: String,
    pub passed: bool,
    pub detail: String,
}

struct Suite {
    seed: u64,
    results: Vec<CheckResult>,
}

impl Suite {
    fn record(&mut self, module: &'static str, name: &str, outcome: Result<(bool, String)>) {
        let (passed, detail) = match outcome {
            Ok((p, d)) => (p, d),
            Err(e) => (false, format!("error: {e}")),
        };
        self.results.push(CheckResult {
            module,
            name: name.to_string(),
            passed,
            detail,
        });
    }
}

/// Signal lengths the generic invariants run at.
pub const LENGTHS: [usize; 3] = [12, 48, 144];

fn lattice_pair(l: usize) -> ((usize, usize), (usize, usize)) {
    match l {
        12 => ((3, 4), (4, 3)),
        _ => ((4, 8), (8, 4)),
    }
}

fn gaussian_frame(l: usize, a: usize, b: usize, id: usize) -> Result<GaborFrame> {
    GaborFrame::new(periodized_gaussian(l)?, Lattice::new(a, b, l)?, id)
}

fn half_split_quilt(l: usize, delta: usize) -> Result<QuiltedSystem> {
    let ((a1, b1), (a2, b2)) = lattice_pair(l);
    let frames = [
        gaussian_frame(l, a1, b1, 0)?.tightened()?,
        gaussian_frame(l, a2, b2, 1)?.tightened()?,
    ];
    let partition = Partition::new(
        l,
        vec![
            Region::from_spans(0, l, 0, l / 2, 0, l)?,
            Region::from_spans(1, l, l / 2, l - l / 2, 0, l)?,
        ],
    )?;
    assemble_quilt(&frames, &partition, &FrameAssignment::one_to_one(&[0, 1]), delta)
}

/// Runs every module invariant at the standard lengths; returns the
/// individual check results.
pub fn run_all(seed: u64) -> Vec<CheckResult> {
    let mut suite = Suite {
        seed,
        results: Vec::new(),
    };
    signal_checks(&mut suite);
    gabor_checks(&mut suite);
    quilt_checks(&mut suite);
    construction_checks(&mut suite);
    reconstruct_checks(&mut suite);
    suite.results
}

fn signal_checks(suite: &mut Suite) {
    let seed = suite.seed;
    for l in [4usize, 8, 12, 16] {
        suite.record("signal", &format!("stft-vs-direct L={l}"), (|| {
            let f = random_signal(l, seed.wrapping_add(l as u64))?;
            let g = random_signal(l, seed.wrapping_add(100 + l as u64))?;
            let grid = stft(&f, &g)?;
            let mut max_diff = 0.0f64;
            for x in 0..l {
                for w in 0..l {
                    let direct = f.inner(&tf_shift(&g, TFPoint::new(x, w, l)));
                    max_diff = max_diff.max((grid[(x, w)] - direct).norm());
                }
            }
            Ok((max_diff < 1e-12, format!("max abs deviation {max_diff:e}")))
        })());
    }
    for &l in &LENGTHS {
        suite.record("signal", &format!("shift-unitarity L={l}"), (|| {
            let f = random_signal(l, seed)?;
            let mut worst = 0.0f64;
            for k in 0..8u64 {
                let p = TFPoint::new(
                    (k.wrapping_mul(31) % l as u64) as usize,
                    (k.wrapping_mul(17) % l as u64) as usize,
                    l,
                );
                worst = worst.max((tf_shift(&f, p).norm() - f.norm()).abs());
            }
            Ok((worst < 1e-13, format!("max norm drift {worst:e}")))
        })());
        suite.record("signal", &format!("full-grid-energy L={l}"), (|| {
            let mut worst = 0.0f64;
            for trial in 0..20u64 {
                let f = random_signal(l, seed.wrapping_add(trial))?;
                let g = random_signal(l, seed.wrapping_add(1000 + trial))?.normalized()?;
                let energy: f64 = stft(&f, &g)?.iter().map(|z| z.norm_sqr()).sum();
                let expected = l as f64 * f.norm().powi(2);
                worst = worst.max((energy - expected).abs() / expected);
            }
            Ok((worst < 1e-10, format!("max relative deviation {worst:e}")))
        })());
    }
}

fn gabor_checks(suite: &mut Suite) {
    let seed = suite.seed;
    for &l in &LENGTHS {
        let ((a, b), _) = lattice_pair(l);
        suite.record("gabor", &format!("frame-inequality L={l}"), (|| {
            let frame = gaussian_frame(l, a, b, 0)?;
            let bounds = frame.frame_bounds();
            let mut slack = f64::INFINITY;
            for trial in 0..50u64 {
                let f = random_signal(l, seed.wrapping_add(trial))?;
                let energy: f64 = frame.analysis(&f)?.iter().map(|c| c.norm_sqr()).sum();
                let nf = f.norm().powi(2);
                slack = slack
                    .min(energy - bounds.lower * nf + 1e-9 * nf)
                    .min(bounds.upper * nf - energy + 1e-9 * nf);
            }
            Ok((slack >= 0.0, format!("worst slack {slack:e}")))
        })());
        suite.record("gabor", &format!("operator-composition L={l}"), (|| {
            let frame = gaussian_frame(l, a, b, 0)?;
            let s = frame.frame_operator();
            let f = random_signal(l, seed)?;
            let via_matrix = apply_operator(&s, &f);
            let via_ops = frame.synthesis(&frame.analysis(&f)?)?;
            let diff = via_matrix.sub(&via_ops).norm();
            Ok((diff < 1e-12 * f.norm(), format!("difference {diff:e}")))
        })());
    }
    suite.record("gabor", "svd-oracle L=12", (|| {
        let frame = gaussian_frame(12, 3, 4, 0)?;
        let bounds = frame.frame_bounds();
        let svd = frame.analysis_matrix().svd(false, false);
        let smax = svd.singular_values.iter().fold(0.0f64, |x, &s| x.max(s));
        let smin = svd.singular_values.iter().fold(f64::INFINITY, |x, &s| x.min(s));
        let dev = ((bounds.upper - smax * smax).abs() / bounds.upper)
            .max((bounds.lower - smin * smin).abs() / bounds.upper);
        Ok((dev < 1e-9, format!("relative deviation {dev:e}")))
    })());
    suite.record("gabor", "undersampled-not-a-frame", (|| {
        let frame = gaussian_frame(12, 4, 4, 0)?;
        let bounds = frame.frame_bounds();
        Ok((
            bounds.lower == 0.0 && bounds.condition.is_infinite(),
            format!("A = {}, cond = {}", bounds.lower, bounds.condition),
        ))
    })());
    suite.record("gabor", "tight-windows L=144", (|| {
        let mut worst = 0.0f64;
        for (a, b) in [(4usize, 8usize), (8, 4), (8, 16), (16, 8)] {
            let tight = gaussian_frame(144, a, b, 0)?.tightened()?;
            worst = worst.max(tight.frame_bounds().condition - 1.0);
        }
        Ok((worst <= 1e-8, format!("worst condition excess {worst:e}")))
    })());
    suite.record("gabor", "dual-reconstruction L=144", (|| {
        let frame = gaussian_frame(144, 4, 8, 0)?;
        let dual = frame.with_window(frame.canonical_dual_window()?)?;
        let mut worst = 0.0f64;
        for trial in 0..5u64 {
            let f = random_signal(144, seed.wrapping_add(trial))?;
            let rec = frame.synthesis(&dual.analysis(&f)?)?;
            worst = worst.max(relative_error(&rec, &f)?);
        }
        Ok((worst < 1e-10, format!("worst relative error {worst:e}")))
    })());
}

fn quilt_checks(suite: &mut Suite) {
    let seed = suite.seed;
    for &l in &LENGTHS {
        suite.record("quilt", &format!("single-frame-equivalence L={l}"), (|| {
            let ((a, b), _) = lattice_pair(l);
            let frame = gaussian_frame(l, a, b, 0)?;
            let partition = Partition::new(l, vec![Region::full_plane(0, l)])?;
            let quilt = assemble_quilt(
                &[frame.clone()],
                &partition,
                &FrameAssignment::one_to_one(&[0]),
                0,
            )?;
            let diff = max_abs_diff(&quilt.frame_operator(), &frame.frame_operator());
            Ok((diff < 1e-12, format!("operator difference {diff:e}")))
        })());
        suite.record("quilt", &format!("energy-sandwich L={l}"), (|| {
            let quilt = half_split_quilt(l, 2)?;
            let bounds = quilt.frame_bounds();
            if !bounds.is_frame() {
                return Ok((false, "quilt is not a frame".into()));
            }
            let mut slack = f64::INFINITY;
            for trial in 0..50u64 {
                let f = random_signal(l, seed.wrapping_add(trial))?;
                let energy: f64 = quilt.analysis(&f)?.iter().map(|c| c.norm_sqr()).sum();
                let nf = f.norm().powi(2);
                slack = slack
                    .min(energy - bounds.lower * nf + 1e-9 * nf)
                    .min(bounds.upper * nf - energy + 1e-9 * nf);
            }
            Ok((slack >= 0.0, format!("worst slack {slack:e}")))
        })());
    }
    suite.record("quilt", "atom-monotonicity L=48", (|| {
        let small = half_split_quilt(48, 0)?;
        let large = half_split_quilt(48, 4)?;
        let sb = small.frame_bounds();
        let lb = large.frame_bounds();
        let ok = lb.lower >= sb.lower - 1e-10 && lb.upper >= sb.upper - 1e-10;
        Ok((
            ok,
            format!(
                "A {} -> {}, B {} -> {}",
                sb.lower, lb.lower, sb.upper, lb.upper
            ),
        ))
    })());
    suite.record("quilt", "dedup-idempotence L=48", (|| {
        let a = half_split_quilt(48, 4)?;
        let b = half_split_quilt(48, 4)?;
        Ok((a.atoms() == b.atoms(), format!("{} atoms", a.atoms().len())))
    })());
    suite.record("quilt", "oversampling-lower-bound L=48", (|| {
        let l = 48;
        let coarse = gaussian_frame(l, 8, 4, 0)?;
        let fine = gaussian_frame(l, 4, 4, 1)?;
        let partition = Partition::new(
            l,
            vec![
                Region::from_spans(0, l, 0, 24, 0, l)?,
                Region::from_spans(1, l, 24, 24, 0, l)?,
            ],
        )?;
        let quilt = assemble_quilt(
            &[coarse.clone(), fine],
            &partition,
            &FrameAssignment::new(vec![(0, 0), (0, 1), (1, 0), (1, 1)]),
            0,
        )?;
        let a0 = coarse.frame_bounds().lower;
        let aq = quilt.frame_bounds().lower;
        Ok((
            a0 > 0.1 && aq >= a0 - 1e-10,
            format!("A0 {a0:e}, quilt A {aq:e}"),
        ))
    })());
    suite.record("quilt", "bessel-estimate-dominates L=48", (|| {
        let quilt = half_split_quilt(48, 2)?;
        let windows: Vec<Signal> = quilt.frames().iter().map(|f| f.window().clone()).collect();
        let decay = decay_profile(&windows, 3.0)?;
        let estimate = bessel_estimate(&quilt, &decay);
        let measured = quilt.frame_bounds().upper;
        Ok((
            estimate >= measured,
            format!("estimate {estimate:e} vs measured B {measured:e}"),
        ))
    })());
}

fn construction_checks(suite: &mut Suite) {
    let seed = suite.seed;
    suite.record("constructions", "stripe-support-exactness L=144", (|| {
        let l = 144;
        let frames = vec![
            painless_tight_frame(&GaborFrame::new(
                truncated_gaussian(l, 8)?,
                Lattice::new(4, 8, l)?,
                0,
            )?)?,
            painless_tight_frame(&GaborFrame::new(
                truncated_gaussian(l, 8)?,
                Lattice::new(6, 8, l)?,
                1,
            )?)?,
        ];
        let pou = build_bapu(l, &[(0, 80), (72, 80)], BumpShape::RaisedCosine)?;
        let sys = stripe_index_sets(&pou, &frames, &[0, 1])?;
        let mut worst = 0.0f64;
        for r in 0..sys.stripes() {
            let frame = sys.frame_of_stripe(r);
            let a = frame.lattice().time_step();
            let weights = sys.partition_of_unity().weights(r);
            for n in 0..l / a {
                if sys.time_indices(r).contains(&n) {
                    continue;
                }
                let atom = frame.atom(TFPoint::new(n * a, 0, l));
                for t in 0..l {
                    worst = worst.max(weights[t] * atom[t].norm());
                }
            }
        }
        Ok((worst == 0.0, format!("max excluded overlap {worst:e}")))
    })());
    suite.record("constructions", "stripe-identity L=144", (|| {
        let l = 144;
        let frames = vec![
            painless_tight_frame(&GaborFrame::new(
                truncated_gaussian(l, 8)?,
                Lattice::new(4, 8, l)?,
                0,
            )?)?,
            painless_tight_frame(&GaborFrame::new(
                truncated_gaussian(l, 8)?,
                Lattice::new(6, 8, l)?,
                1,
            )?)?,
        ];
        let pou = build_bapu(l, &[(0, 80), (72, 80)], BumpShape::RaisedCosine)?;
        let sys = stripe_index_sets(&pou, &frames, &[0, 1])?;
        let mut worst = 0.0f64;
        for trial in 0..20u64 {
            let f = random_signal(l, seed.wrapping_add(trial))?;
            let rec = sys.reconstruct(&sys.analysis(&f)?)?;
            worst = worst.max(relative_error(&rec, &f)?);
        }
        Ok((worst < 1e-10, format!("worst relative error {worst:e}")))
    })());
    suite.record("constructions", "replacement-soundness L=48", (|| {
        let l = 48;
        let fg = gaussian_frame(l, 4, 8, 0)?.tightened()?;
        let fh = gaussian_frame(l, 8, 4, 1)?.tightened()?;
        let omega = Region::from_spans(0, l, 16, 16, 16, 16)?;
        let a1 = fg.frame_bounds().lower;
        let (star, _) = choose_omega_star(&omega, &fg, &fh, a1)?;
        let (quilt, plan) = build_replacement(&fg, &fh, &omega, &star)?;
        if !plan.certified {
            return Ok((false, "plan failed to certify".into()));
        }
        let guaranteed = plan.guaranteed_lower.unwrap();
        let measured = quilt.frame_bounds().lower;
        Ok((
            measured >= guaranteed - 1e-9,
            format!("measured A {measured:e} vs guaranteed {guaranteed:e}"),
        ))
    })());
    suite.record("constructions", "defect-two-norm-routes L=48", (|| {
        let l = 48;
        let fg = gaussian_frame(l, 4, 8, 0)?.tightened()?;
        let fh = gaussian_frame(l, 8, 4, 1)?.tightened()?;
        let omega = Region::from_spans(0, l, 16, 16, 16, 16)?;
        let removed: Vec<TFPoint> = fg
            .lattice()
            .points()
            .into_iter()
            .filter(|p| omega.contains(p))
            .collect();
        let inserted: Vec<TFPoint> = fh
            .lattice()
            .points()
            .into_iter()
            .filter(|p| omega.contains(p))
            .collect();
        let map = cross_gramian(&fg, &removed, &fh, &inserted)?;
        // replacement_defect itself enforces SVD/power agreement at 1e-8.
        let (defect, _) =
            replacement_defect(&fg, &removed, &fh, &inserted, &map, fg.frame_bounds().lower)?;
        Ok((defect.is_finite(), format!("defect {defect:e}")))
    })());
    suite.record("constructions", "perturbation-threshold-probe L=48", (|| {
        let l = 48;
        let fg = gaussian_frame(l, 4, 8, 0)?.tightened()?;
        let a1 = fg.frame_bounds().lower;
        let omega = Region::from_spans(0, l, 16, 16, 16, 16)?;
        let removed: Vec<TFPoint> = fg
            .lattice()
            .points()
            .into_iter()
            .filter(|p| omega.contains(p))
            .collect();
        // Below threshold: frame property must survive.
        let threshold = a1 / (2.0 * removed.len() as f64);
        let eps = 0.9 * threshold.sqrt() / fg.window().norm();
        let h_close = fg.window().scale(Complex64::new(1.0 + eps, 0.0));
        let (_, ok_close) = window_perturbation_bound(fg.window(), &h_close, removed.len(), a1)?;
        let fh_close = fg.with_window(h_close)?.with_id(1);
        let (quilt_close, _) = build_replacement(&fg, &fh_close, &omega, &omega)?;
        let survives = quilt_close.frame_bounds().lower > 0.0;
        // Far above threshold: certification must refuse.
        let h_far = random_signal(l, seed.wrapping_add(999))?.normalized()?;
        let fh_far = fg.with_window(h_far.clone())?.with_id(1);
        let (_, plan_far) = build_replacement(&fg, &fh_far, &omega, &omega)?;
        let (_, ok_far) = window_perturbation_bound(fg.window(), &h_far, removed.len(), a1)?;
        let passed = ok_close && survives && !ok_far && !plan_far.certified;
        Ok((
            passed,
            format!(
                "below-threshold satisfied={ok_close} A>0={survives}; \
far-above satisfied={ok_far} certified={}",
                plan_far.certified
            ),
        ))
    })());
    suite.record("constructions", "omega-star-tail-monotonicity L=48", (|| {
        let l = 48;
        let fg = gaussian_frame(l, 4, 8, 0)?.tightened()?;
        let fh = gaussian_frame(l, 8, 4, 1)?.tightened()?;
        let omega = Region::from_spans(0, l, 16, 16, 16, 16)?;
        let removed: Vec<TFPoint> = fg
            .lattice()
            .points()
            .into_iter()
            .filter(|p| omega.contains(p))
            .collect();
        let ambiguity = stft(fg.window(), fh.window())?;
        let mut last = f64::INFINITY;
        let mut monotone = true;
        for delta in 0..l / 2 {
            let star = omega.enlarge(delta);
            let mut tail = 0.0f64;
            for mu in fh.lattice().points() {
                if star.contains(&mu) {
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
            if tail > last + 1e-12 {
                monotone = false;
            }
            last = tail;
        }
        Ok((monotone, "tail nonincreasing over the sweep".into()))
    })());
}

fn reconstruct_checks(suite: &mut Suite) {
    let seed = suite.seed;
    for &l in &LENGTHS {
        suite.record("reconstruct", &format!("dual-round-trip L={l}"), (|| {
            let quilt = half_split_quilt(l, 2)?;
            let mut worst = 0.0f64;
            for trial in 0..5u64 {
                let f = random_signal(l, seed.wrapping_add(trial))?;
                let rec = dual_frame_reconstruct(&quilt, &quilt.analysis(&f)?)?;
                worst = worst.max(relative_error(&rec, &f)?);
            }
            Ok((worst < 1e-10, format!("worst relative error {worst:e}")))
        })());
    }
    suite.record("reconstruct", "contraction-factor L=48", (|| {
        let quilt = half_split_quilt(48, 0)?;
        let bounds = quilt.frame_bounds();
        let factor = (bounds.upper - bounds.lower) / (bounds.upper + bounds.lower);
        let config = FrameAlgoConfig {
            tol: 1e-10,
            tol_mode: TolMode::TruthError,
            ..FrameAlgoConfig::default()
        };
        let mut worst: f64 = 0.0;
        for trial in 0..5u64 {
            let f = random_signal(48, seed.wrapping_add(trial))?;
            let report = frame_algorithm(&quilt, &quilt.analysis(&f)?, &config, Some(&f))?;
            for pair in report.history.windows(2) {
                if pair[0] < 1e-9 {
                    break;
                }
                worst = worst.max(pair[1] / pair[0]);
            }
        }
        Ok((
            worst <= factor + 1e-6,
            format!("worst ratio {worst} vs bound {factor}"),
        ))
    })());
    suite.record("reconstruct", "cg-vs-dense L=144", (|| {
        let quilt = half_split_quilt(144, 2)?;
        let operator = quilt.frame_operator();
        let f = random_signal(144, seed)?;
        let coeffs = quilt.analysis(&f)?;
        let rhs = quilt.synthesis(&coeffs)?;
        let dense = dual_frame_reconstruct(&quilt, &coeffs)?;
        let cg = conjugate_gradient_solve(|v| apply_operator(&operator, v), &rhs, 1e-8, 2000)?;
        let diff = cg.sub(&dense).norm() / dense.norm();
        Ok((diff < 1e-7, format!("solver difference {diff:e}")))
    })());
    suite.record("reconstruct", "preconditioning-improves L=144", (|| {
        let quilt = half_split_quilt(144, 4)?;
        let r = random_signal(144, seed)?;
        let report = diag_precondition_reconstruct(&quilt, &r)?;
        Ok((
            report.eps_corrected < report.eps_plain,
            format!(
                "eps {:.4} -> {:.4}",
                report.eps_plain, report.eps_corrected
            ),
        ))
    })());
}
