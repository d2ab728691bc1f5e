//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits with a
//! nonzero status if any criterion fails.

use std::time::Instant;

use measmap::geometry::{
    check_pure_preservation, check_segment_containment, check_segment_equality, frame_preservation_report,
    pure_preservation_report, qubit_ball_report, sample_pair,
};
use measmap::maps::{
    apply_fractional_linear, builtin, choi_matrix, invert_map, is_completely_positive, linearize, maps_equal_up_to_scale,
    segment_reparametrization, MeasurementMap,
};
use measmap::reconstruct::{
    branch_cross_check, fit_pales, min_pales_samples, nested_subspace_report, normalize_at_maximally_mixed,
    pipeline_queries, reconstruct_measurement_map, sample_oracle,
};
use measmap::state::random::{random_invertible, random_unitary};
use measmap::state::{hermitian_trace_distance, segment_point};
use measmap::{ComplexMatrix, DensityOperator, Error};

type Outcome = Result<String, String>;

fn generator(n: usize, seed: u64, transposed: bool) -> MeasurementMap {
    MeasurementMap::new(random_invertible(n, seed, 100.0).expect("resampling"), transposed).expect("invertible")
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn err(e: Error) -> String {
    e.to_string()
}

/// Reconstruction round trip.
fn criterion_1() -> Outcome {
    let verify = 20;
    let mut worst = 0.0f64;
    let mut count = 0;
    for n in [2usize, 3, 4, 6, 8] {
        for k in 0..50u64 {
            for transposed in [false, true] {
                let seed = 10_000 * n as u64 + k;
                let target = generator(n, seed, transposed);
                let r = reconstruct_measurement_map(&target, verify, seed).map_err(err)?;
                ensure(r.residual <= 1e-8, || format!("n={n} seed={seed} residual {:e}", r.residual))?;
                ensure(maps_equal_up_to_scale(&r.map, &target, 20, 1e-8).map_err(err)?, || {
                    format!("n={n} seed={seed} transposed={transposed}: not equal up to scale")
                })?;
                ensure(r.queries == pipeline_queries(n) + verify, || format!("n={n}: {} queries", r.queries))?;
                worst = worst.max(r.residual);
                count += 1;
            }
        }
    }
    Ok(format!("{count}/{count} instances, worst residual {worst:.2e}"))
}

struct SegmentStats {
    s_law: f64,
    triples: usize,
}

/// Segment containment and equality for measurement maps. Also collects the
/// recovered parameters for the s(t) law.
fn criterion_2(stats: &mut SegmentStats) -> Outcome {
    let mut worst_c = 0.0f64;
    let mut worst_e = 0.0f64;
    let mut maps = 0;
    for n in 2..=8usize {
        for k in 0..50u64 {
            let seed = 20_000 * n as u64 + k;
            let map = generator(n, seed, k % 2 == 1);
            let c = check_segment_containment(&map, 32, 17, 1e-8, seed).map_err(err)?;
            let e = check_segment_equality(&map, 32, 17, 1e-8, seed).map_err(err)?;
            ensure(c.satisfied, || format!("containment n={n} seed={seed}: {:e}", c.worst_deviation))?;
            ensure(e.satisfied, || format!("equality n={n} seed={seed}: {:e}", e.worst_deviation))?;
            worst_c = worst_c.max(c.worst_deviation);
            worst_e = worst_e.max(e.worst_deviation);
            let mut last = (usize::MAX, f64::NEG_INFINITY);
            for p in &c.points {
                if p.pair_index == last.0 {
                    ensure(p.s >= last.1, || format!("s(t) decreases: n={n} seed={seed} pair {}", p.pair_index))?;
                }
                last = (p.pair_index, p.s);
            }
            for p in c.points.iter().chain(&e.points) {
                let (r1, r2) = sample_pair(n, seed, p.pair_index);
                let closed = segment_reparametrization(&map, &r1, &r2, p.t).map_err(err)?;
                stats.s_law = stats.s_law.max((closed - p.s).abs());
                stats.triples += 1;
            }
            maps += 1;
        }
    }
    Ok(format!("{maps} maps x 32 pairs x 17 points, worst containment {worst_c:.2e}, worst equality {worst_e:.2e}"))
}

/// s(t) law.
fn criterion_3(stats: &SegmentStats) -> Outcome {
    ensure(stats.triples > 0, || "no triples collected".into())?;
    ensure(stats.s_law <= 1e-9, || format!("worst |s - closed form| {:e}", stats.s_law))?;
    let map = MeasurementMap::new(ComplexMatrix::from_real_diagonal(&[2.0, 1.0]), false).map_err(err)?;
    let (r1, r2) = (DensityOperator::basis_projection(2, 0), DensityOperator::basis_projection(2, 1));
    let closed = segment_reparametrization(&map, &r1, &r2, 0.5).map_err(err)?;
    let image = measmap::maps::apply_measurement(&map, &segment_point(&r1, &r2, 0.5).map_err(err)?).map_err(err)?;
    let (s, _) = measmap::geometry::project_to_segment(&image, &r1, &r2).map_err(err)?;
    ensure((closed - 0.8).abs() < 1e-15 && (s - 0.8).abs() < 1e-12, || format!("hand value {closed} / {s}"))?;
    Ok(format!("{} triples, worst deviation {:.2e}; diag(2,1) hand value s = {s}", stats.triples, stats.s_law))
}

/// Pure states in both directions.
fn criterion_4() -> Outcome {
    let mut min_purity = f64::INFINITY;
    for n in [2usize, 3, 4, 6, 8] {
        for transposed in [false, true] {
            let seed = 40_000 + n as u64;
            let map = generator(n, seed, transposed);
            let inv = invert_map(&map).map_err(err)?;
            let r = pure_preservation_report(&map, Some(&inv), 1000, 1e-10, seed).map_err(err)?;
            ensure(r.satisfied, || format!("n={n} transposed={transposed}: {r:?}"))?;
            min_purity = min_purity.min(r.min_purity).min(r.inverse_min_purity.unwrap_or(1.0));
        }
    }
    Ok(format!("10 maps and inverses x 1000 pure states, min purity 1 - {:.2e}", 1.0 - min_purity))
}

/// Frames after normalization.
fn criterion_5() -> Outcome {
    let (mut gram, mut sum) = (0.0f64, 0.0f64);
    let mut maps = 0;
    for n in 2..=8usize {
        for k in 0..6u64 {
            let seed = 50_000 + 100 * n as u64 + k;
            let map = generator(n, seed, k % 2 == 1);
            let norm = normalize_at_maximally_mixed(&map).map_err(err)?;
            let r = frame_preservation_report(&norm, 20, 1e-8, seed).map_err(err)?;
            ensure(r.satisfied, || format!("n={n} seed={seed}: {r:?}"))?;
            ensure(r.sum_frobenius <= n as f64 * 1e-9, || format!("n={n} seed={seed}: sum {:e}", r.sum_frobenius))?;
            gram = gram.max(r.gram_deviation);
            sum = sum.max(r.sum_deviation);
            maps += 1;
        }
    }
    Ok(format!("{maps} maps x 20 frames, worst Gram {gram:.2e}, worst sum {sum:.2e}"))
}

/// Phase decision against the Choi test.
fn criterion_6() -> Outcome {
    let mut agree = 0;
    let mut total = 0;
    let mut worst_transposed = f64::NEG_INFINITY;
    let mut worst_linear = f64::INFINITY;
    let mut min_margin = f64::INFINITY;
    for n in [2usize, 3, 4] {
        for transposed in [false, true] {
            for k in 0..100u64 {
                let seed = 60_000 + 1000 * n as u64 + k;
                let target = generator(n, seed, transposed);
                let r = reconstruct_measurement_map(&target, 5, seed).map_err(err)?;
                let norm = normalize_at_maximally_mixed(&target).map_err(err)?;
                let fitted = branch_cross_check(&norm).map_err(err)?;
                let generated = choi_matrix(&linearize(&target)).normalized().map_err(err)?;
                let generated_cp = is_completely_positive(&generated, 1e-8).map_err(err)?;
                let phase_linear = !r.map.transposed();
                total += 1;
                if phase_linear == fitted.completely_positive && phase_linear == generated_cp && phase_linear == !transposed {
                    agree += 1;
                }
                for min_eig in [fitted.normalized_min_eigenvalue, generated.normalized_min_eigenvalue().map_err(err)?] {
                    if transposed {
                        worst_transposed = worst_transposed.max(min_eig);
                    } else {
                        worst_linear = worst_linear.min(min_eig);
                    }
                }
                min_margin = min_margin.min(r.branch_margin.abs());
            }
        }
    }
    ensure(agree == total, || format!("{agree}/{total} agree"))?;
    ensure(worst_transposed <= -1e-6, || format!("transposed-branch Choi min eigenvalue {worst_transposed:e}"))?;
    ensure(worst_linear >= -1e-10, || format!("congruence-branch Choi min eigenvalue {worst_linear:e}"))?;
    ensure(min_margin >= 1e-6, || format!("branch margin {min_margin:e}"))?;
    Ok(format!(
        "{agree}/{total} agree; transposed min eig <= {worst_transposed:.3e}, congruence min eig >= {worst_linear:.2e}, margin >= {min_margin:.3}"
    ))
}

/// Fractional-linear fit.
fn criterion_7() -> Outcome {
    let (mut residual, mut held_out, mut affine) = (0.0f64, 0.0f64, 0.0f64);
    let mut fits = 0;
    for n in [2usize, 3] {
        for transposed in [false, true] {
            for k in 0..5u64 {
                let seed = 70_000 + 100 * n as u64 + k;
                let map = generator(n, seed, transposed);
                let fit = fit_pales(&sample_oracle(&map, 2 * min_pales_samples(n), seed).map_err(err)?).map_err(err)?;
                ensure(fit.residual <= 1e-8, || format!("n={n} seed={seed}: residual {:e}", fit.residual))?;
                for (rho, image) in sample_oracle(&map, 50, seed + 1).map_err(err)? {
                    let out = apply_fractional_linear(&fit.map, &rho).map_err(err)?;
                    held_out = held_out.max(hermitian_trace_distance(&out, image.hermitian()).map_err(err)?);
                }
                residual = residual.max(fit.residual);
                fits += 1;

                let unitary = MeasurementMap::new(random_unitary(n, seed), transposed).map_err(err)?;
                let fit = fit_pales(&sample_oracle(&unitary, 2 * min_pales_samples(n), seed).map_err(err)?).map_err(err)?;
                affine = affine.max(fit.map.relative_functional_norm());
            }
        }
    }
    ensure(held_out <= 1e-7, || format!("held-out trace distance {held_out:e}"))?;
    ensure(affine <= 1e-8, || format!("unitary f relative norm {affine:e}"))?;
    Ok(format!("{fits} fits, residual <= {residual:.2e}, held-out <= {held_out:.2e}, unitary |f|/c <= {affine:.2e}"))
}

/// Qubit ball.
fn criterion_8() -> Outcome {
    let (mut origin, mut sphere, mut fit) = (0.0f64, 0.0f64, 0.0f64);
    for k in 0..20u64 {
        let seed = 80_000 + k;
        let map = generator(2, seed, k % 2 == 1);
        let norm = normalize_at_maximally_mixed(&map).map_err(err)?;
        let r = qubit_ball_report(&norm, 1e-9, seed).map_err(err)?;
        ensure(r.satisfied && r.fit_residual <= 1e-9, || format!("seed={seed}: {r:?}"))?;
        origin = origin.max(r.origin_deviation);
        sphere = sphere.max(r.sphere_deviation);
        fit = fit.max(r.fit_residual);
    }
    Ok(format!("20 qubit maps, origin {origin:.2e}, sphere {sphere:.2e}, 3x3 fit residual {fit:.2e}"))
}

/// Nested subspaces.
fn criterion_9() -> Outcome {
    let mut worst = 0.0f64;
    for (k1, k2) in [(2usize, 4usize), (3, 5)] {
        for transposed in [false, true] {
            let seed = 90_000 + 10 * k1 as u64 + transposed as u64;
            let map = generator(6, seed, transposed);
            let r = nested_subspace_report(&map, k1, k2, 20, seed).map_err(err)?;
            ensure(r.consistent, || format!("({k1},{k2}) transposed={transposed}: {r:?}"))?;
            worst = worst.max(r.worst_deviation);
        }
    }
    let pinch = builtin::block_pinching(6, 3, 90_001);
    let rejected = match nested_subspace_report(&*pinch, 2, 4, 20, 90_001) {
        Err(Error::RestrictionNotInvariant(_)) => true,
        Ok(r) => !r.consistent,
        Err(e) => return Err(format!("block counterexample: unexpected {e}")),
    };
    ensure(rejected, || "block counterexample accepted".into())?;
    Ok(format!("n=6, (2,4) and (3,5), 20 trials per branch, worst deviation {worst:.2e}; block map rejected"))
}

/// Negative controls.
fn criterion_10() -> Outcome {
    let mixer = builtin::mixer(3);
    ensure(!check_pure_preservation(&*mixer, None, 100, 1e-10, 0).map_err(err)?, || "mixer passed".into())?;
    let square = builtin::normalized_square(2);
    let c = check_segment_containment(&*square, 1, 17, 1e-8, 0).map_err(err)?;
    ensure(!c.satisfied, || "normalize(rho^2) contained".into())?;
    let singular = builtin::constant(DensityOperator::basis_projection(3, 0));
    let singular_err = normalize_at_maximally_mixed(&*singular).err();
    ensure(matches!(singular_err, Some(Error::ImageSingular(_))), || format!("{singular_err:?}"))?;
    Ok(format!("mixer rejected; normalize(rho^2) witness deviation {:.3e}; ImageSingular raised", c.worst_deviation))
}

fn main() {
    let mut failures = 0;
    let mut report = |index: usize, name: &str, run: &mut dyn FnMut() -> Outcome| {
        let start = Instant::now();
        let outcome = run();
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("criterion {index:>2} PASS [{name}] {detail} ({secs:.1}s)"),
            Err(detail) => {
                failures += 1;
                println!("criterion {index:>2} FAIL [{name}] {detail} ({secs:.1}s)");
            }
        }
    };
    let mut stats = SegmentStats { s_law: 0.0, triples: 0 };
    report(1, "reconstruction round trip", &mut criterion_1);
    report(2, "segment containment and equality", &mut || criterion_2(&mut stats));
    report(3, "s(t) reparametrization law", &mut || criterion_3(&stats));
    report(4, "pure states preserved both ways", &mut criterion_4);
    report(5, "frames preserved after normalization", &mut criterion_5);
    report(6, "branch detection vs Choi test", &mut criterion_6);
    report(7, "fractional-linear fit", &mut criterion_7);
    report(8, "qubit ball", &mut criterion_8);
    report(9, "nested subspace consistency", &mut criterion_9);
    report(10, "negative controls", &mut criterion_10);
    if failures > 0 {
        println!("acceptance: {failures} criteria failed");
        std::process::exit(1);
    }
    println!("acceptance: all 10 criteria passed");
}
