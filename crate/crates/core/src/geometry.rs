//! Sampled certificates for the geometric properties of state maps.
//!
//! Every check draws its sample points from `(seed, index)` streams, so the
//! result does not depend on evaluation order and parallel runs are
//! bit-identical to sequential ones.

use nalgebra::{DMatrix, Matrix3};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::json::MatrixJson;
use crate::maps::StateMapOracle;
use crate::state::random::{ball_point, density_from_rng, pure_from_rng, sphere_point, stream_rng, unitary_from_rng};
use crate::state::{
    bloch_to_state, state_to_bloch, trace_distance, BlochVector, ComplexMatrix, DensityOperator, HermitianMatrix,
    ProjectionFrame,
};

/// Below this trace distance the endpoints of a segment are considered equal.
pub const DEGENERATE_SEGMENT: f64 = 1e-12;
/// Iteration cap for the surjectivity bisection.
pub const BISECTION_ITERATIONS: usize = 80;
pub const DEFAULT_PAIRS: usize = 32;
pub const DEFAULT_GRID: usize = 17;

/// Streams at or above this offset are used for inverse-direction samples.
const INVERSE_STREAM: u64 = 1 << 32;

/// Closest point of `[ρ1, ρ2]` to `σ` in Frobenius norm.
///
/// Returns `(s, distance)` with `s ∈ [0, 1]` the parameter of the point
/// `s ρ1 + (1 − s) ρ2`.
pub fn project_to_segment(sigma: &DensityOperator, rho1: &DensityOperator, rho2: &DensityOperator) -> Result<(f64, f64)> {
    for d in [rho1.dim(), rho2.dim()] {
        if d != sigma.dim() {
            return Err(Error::DimensionMismatch { expected: sigma.dim(), found: d });
        }
    }
    if trace_distance(rho1, rho2)? <= DEGENERATE_SEGMENT {
        return Err(Error::DegenerateSegment);
    }
    Ok(Segment::new(rho1.matrix(), rho2.matrix(), false).project(sigma.matrix()))
}

/// Image segment `[φ(ρ1), φ(ρ2)]` prepared for repeated projections.
struct Segment {
    end1: ComplexMatrix,
    end2: ComplexMatrix,
    chord: ComplexMatrix,
    chord_sq: f64,
    degenerate: bool,
}

impl Segment {
    fn new(end1: &ComplexMatrix, end2: &ComplexMatrix, degenerate: bool) -> Self {
        let chord = end1 - end2;
        let chord_sq = chord.inner_re(&chord);
        Self { end1: end1.clone(), end2: end2.clone(), chord, chord_sq, degenerate }
    }

    fn point(&self, s: f64) -> ComplexMatrix {
        &self.end2 + &self.chord.scale_real(s)
    }

    fn project(&self, sigma: &ComplexMatrix) -> (f64, f64) {
        if self.degenerate {
            return (0.5, (sigma - &self.end1).frobenius_norm());
        }
        let offset = sigma - &self.end2;
        let s = (offset.inner_re(&self.chord) / self.chord_sq).clamp(0.0, 1.0);
        let residual = &offset - &self.chord.scale_real(s);
        (s, residual.frobenius_norm())
    }
}

/// One tested point of a segment certificate.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentPoint {
    pub pair_index: usize,
    pub t: f64,
    /// Recovered segment parameter of `φ(t ρ1 + (1 − t) ρ2)`.
    pub s: f64,
    /// Frobenius distance from the image to the target segment (containment)
    /// or target point (equality).
    pub deviation: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct WorstPair {
    pub pair_index: usize,
    pub rho1: MatrixJson,
    pub rho2: MatrixJson,
    pub t: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SegmentCertificate {
    pub satisfied: bool,
    pub worst_deviation: f64,
    /// Trace distance counterpart of `worst_deviation`.
    pub worst_trace_deviation: f64,
    pub worst_pair: Option<WorstPair>,
    pub tolerance: f64,
    pub seed: u64,
    /// Number of sampled pairs.
    pub samples: usize,
    pub points: Vec<SegmentPoint>,
}

impl SegmentCertificate {
    pub fn s_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.s).collect()
    }

    pub fn t_values(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.t).collect()
    }
}

/// The `index`-th random pair of states drawn for `seed`.
pub fn sample_pair(n: usize, seed: u64, index: usize) -> (DensityOperator, DensityOperator) {
    let mut rng = stream_rng(seed, index as u64);
    let rho1 = density_from_rng(&mut rng, n);
    let rho2 = density_from_rng(&mut rng, n);
    (rho1, rho2)
}

/// Evaluates the oracle and checks the output dimension.
pub(crate) fn evaluate_checked<O: StateMapOracle + ?Sized>(oracle: &O, rho: &DensityOperator) -> Result<DensityOperator> {
    let out = oracle.evaluate(rho)?;
    if out.dim() != oracle.dim() {
        return Err(Error::OracleDimensionMismatch { expected: oracle.dim(), found: out.dim() });
    }
    Ok(out)
}

/// Runs `work` for indices `0..count`, in parallel when the oracle allows it.
/// Results come back in index order either way.
pub(crate) fn for_each_index<O, T, F>(oracle: &O, count: usize, work: F) -> Result<Vec<T>>
where
    O: StateMapOracle + ?Sized,
    T: Send,
    F: Fn(usize) -> Result<T> + Sync + Send,
{
    if oracle.is_reentrant() {
        (0..count).into_par_iter().map(work).collect()
    } else {
        (0..count).map(work).collect()
    }
}

/// Per-pair result before aggregation.
struct PairOutcome {
    points: Vec<SegmentPoint>,
    worst: Option<(f64, f64, ComplexMatrix, ComplexMatrix)>,
}

impl PairOutcome {
    fn record(&mut self, point: SegmentPoint, image: &ComplexMatrix, target: ComplexMatrix) {
        if self.worst.as_ref().is_none_or(|w| point.deviation > w.0) {
            self.worst = Some((point.deviation, point.t, image.clone(), target));
        }
        self.points.push(point);
    }
}

fn image_segment<O: StateMapOracle + ?Sized>(
    oracle: &O,
    rho1: &DensityOperator,
    rho2: &DensityOperator,
) -> Result<Segment> {
    let img1 = evaluate_checked(oracle, rho1)?;
    let img2 = evaluate_checked(oracle, rho2)?;
    let degenerate = trace_distance(&img1, &img2)? <= DEGENERATE_SEGMENT;
    Ok(Segment::new(img1.matrix(), img2.matrix(), degenerate))
}

fn interior_grid(count: usize) -> impl Iterator<Item = f64> {
    (1..=count).map(move |k| k as f64 / (count + 1) as f64)
}

fn check_counts(pairs: usize, grid: usize) -> Result<()> {
    if pairs == 0 || grid == 0 {
        return Err(Error::InvalidInput("pair and grid counts must be positive".into()));
    }
    Ok(())
}

fn assemble(n: usize, outcomes: Vec<PairOutcome>, tol: f64, seed: u64) -> Result<SegmentCertificate> {
    let samples = outcomes.len();
    let mut worst: Option<(usize, f64, f64, ComplexMatrix, ComplexMatrix)> = None;
    let mut points = Vec::new();
    for (index, outcome) in outcomes.into_iter().enumerate() {
        if let Some((dev, t, image, target)) = outcome.worst {
            if worst.as_ref().is_none_or(|w| dev > w.1) {
                worst = Some((index, dev, t, image, target));
            }
        }
        points.extend(outcome.points);
    }
    let (worst_deviation, worst_trace_deviation, worst_pair) = match worst {
        Some((pair_index, dev, t, image, target)) => {
            let gap = HermitianMatrix::hermitize(&(&image - &target));
            let (rho1, rho2) = sample_pair(n, seed, pair_index);
            let pair = WorstPair {
                pair_index,
                rho1: MatrixJson::from_density(&rho1),
                rho2: MatrixJson::from_density(&rho2),
                t,
            };
            (dev, 0.5 * gap.trace_norm()?, Some(pair))
        }
        None => (0.0, 0.0, None),
    };
    Ok(SegmentCertificate {
        satisfied: worst_deviation <= tol,
        worst_deviation,
        worst_trace_deviation,
        worst_pair,
        tolerance: tol,
        seed,
        samples,
        points,
    })
}

/// Samples `pairs` random segments and `t_grid` interior points on each and
/// measures how far `φ(t ρ1 + (1 − t) ρ2)` lies from `[φ(ρ1), φ(ρ2)]`.
pub fn check_segment_containment<O: StateMapOracle + ?Sized>(
    oracle: &O,
    pairs: usize,
    t_grid: usize,
    tol: f64,
    seed: u64,
) -> Result<SegmentCertificate> {
    check_counts(pairs, t_grid)?;
    let n = oracle.dim();
    let outcomes = for_each_index(oracle, pairs, |p| {
        let (rho1, rho2) = sample_pair(n, seed, p);
        let segment = image_segment(oracle, &rho1, &rho2)?;
        let mut outcome = PairOutcome { points: Vec::with_capacity(t_grid), worst: None };
        for t in interior_grid(t_grid) {
            let image = evaluate_checked(oracle, &crate::state::segment_point(&rho1, &rho2, t)?)?;
            let (s, deviation) = segment.project(image.matrix());
            let target = segment.point(s);
            outcome.record(SegmentPoint { pair_index: p, t, s, deviation }, image.matrix(), target);
        }
        Ok(outcome)
    })?;
    assemble(n, outcomes, tol, seed)
}

/// For `s_grid` equispaced interior targets `s` on each sampled image segment,
/// searches `t` by bisection so that `φ(t ρ1 + (1 − t) ρ2)` sits at parameter
/// `s`. A target that is not reached shows up as a large deviation.
pub fn check_segment_equality<O: StateMapOracle + ?Sized>(
    oracle: &O,
    pairs: usize,
    s_grid: usize,
    tol: f64,
    seed: u64,
) -> Result<SegmentCertificate> {
    check_counts(pairs, s_grid)?;
    let n = oracle.dim();
    let outcomes = for_each_index(oracle, pairs, |p| {
        let (rho1, rho2) = sample_pair(n, seed, p);
        let segment = image_segment(oracle, &rho1, &rho2)?;
        let mut outcome = PairOutcome { points: Vec::with_capacity(s_grid), worst: None };
        for target_s in interior_grid(s_grid) {
            let target = segment.point(target_s);
            let probe = |t: f64| -> Result<(f64, DensityOperator)> {
                let image = evaluate_checked(oracle, &crate::state::segment_point(&rho1, &rho2, t)?)?;
                let (s, _) = segment.project(image.matrix());
                if s.is_nan() {
                    return Err(Error::BisectionFailure { pair: p, target: target_s });
                }
                Ok((s, image))
            };
            let (t, s, image) = if segment.degenerate {
                let (s, image) = probe(target_s)?;
                (target_s, s, image)
            } else {
                bisect(&probe, target_s)?
            };
            let deviation = (image.matrix() - &target).frobenius_norm();
            outcome.record(SegmentPoint { pair_index: p, t, s, deviation }, image.matrix(), target);
        }
        Ok(outcome)
    })?;
    assemble(n, outcomes, tol, seed)
}

/// Bisection on a nondecreasing `s(t)` with `s(0) = 0`, `s(1) = 1`, run to
/// machine precision. Returns the probe closest to `target`.
fn bisect<F>(probe: &F, target: f64) -> Result<(f64, f64, DensityOperator)>
where
    F: Fn(f64) -> Result<(f64, DensityOperator)>,
{
    let (mut lo, mut hi) = (0.0f64, 1.0f64);
    let mut best: Option<(f64, f64, DensityOperator)> = None;
    for _ in 0..BISECTION_ITERATIONS {
        let mid = 0.5 * (lo + hi);
        let (s, image) = probe(mid)?;
        let gap = (s - target).abs();
        if best.as_ref().is_none_or(|b| gap < (b.1 - target).abs()) {
            best = Some((mid, s, image));
        }
        if gap <= f64::EPSILON || hi - lo <= f64::EPSILON {
            break;
        }
        if s < target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(best.expect("at least one iteration"))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PurityReport {
    pub satisfied: bool,
    pub min_purity: f64,
    /// Present when an inverse oracle was checked.
    pub inverse_min_purity: Option<f64>,
    pub tolerance: f64,
    pub seed: u64,
    pub samples: usize,
}

fn min_pure_image_purity<O: StateMapOracle + ?Sized>(oracle: &O, samples: usize, seed: u64, offset: u64) -> Result<f64> {
    let n = oracle.dim();
    let purities = for_each_index(oracle, samples, |k| {
        let psi = pure_from_rng(&mut stream_rng(seed, offset + k as u64), n);
        Ok(evaluate_checked(oracle, &psi.to_density())?.purity())
    })?;
    Ok(purities.into_iter().fold(f64::INFINITY, f64::min))
}

/// Purity of the images of `samples` random pure states, in both directions
/// when an inverse is supplied.
pub fn pure_preservation_report(
    oracle: &dyn StateMapOracle,
    inverse: Option<&dyn StateMapOracle>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<PurityReport> {
    let min_purity = min_pure_image_purity(oracle, samples, seed, 0)?;
    let inverse_min_purity = match inverse {
        Some(inv) => {
            if inv.dim() != oracle.dim() {
                return Err(Error::DimensionMismatch { expected: oracle.dim(), found: inv.dim() });
            }
            Some(min_pure_image_purity(inv, samples, seed, INVERSE_STREAM)?)
        }
        None => None,
    };
    let satisfied = min_purity >= 1.0 - tol && inverse_min_purity.is_none_or(|p| p >= 1.0 - tol);
    Ok(PurityReport { satisfied, min_purity, inverse_min_purity, tolerance: tol, seed, samples })
}

pub fn check_pure_preservation(
    oracle: &dyn StateMapOracle,
    inverse: Option<&dyn StateMapOracle>,
    samples: usize,
    tol: f64,
    seed: u64,
) -> Result<bool> {
    Ok(pure_preservation_report(oracle, inverse, samples, tol, seed)?.satisfied)
}

/// Entrywise distance of `φ(I/n)` from `I/n`.
pub fn normalization_deviation<O: StateMapOracle + ?Sized>(oracle: &O) -> Result<f64> {
    let mixed = DensityOperator::maximally_mixed(oracle.dim());
    Ok(evaluate_checked(oracle, &mixed)?.matrix().max_abs_diff(mixed.matrix()))
}

fn require_normalized<O: StateMapOracle + ?Sized>(oracle: &O, tol: f64) -> Result<f64> {
    let dev = normalization_deviation(oracle)?;
    if dev > tol {
        return Err(Error::MapNotNormalized(dev));
    }
    Ok(dev)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FrameReport {
    pub satisfied: bool,
    pub normalization_deviation: f64,
    /// Largest entrywise deviation from `P_i P_j = δ_ij P_i` over all frames.
    pub gram_deviation: f64,
    /// Largest entrywise deviation from `Σ P_i = I`.
    pub sum_deviation: f64,
    /// Largest Frobenius norm of `Σ φ(P_i) − I`.
    pub sum_frobenius: f64,
    pub tolerance: f64,
    pub seed: u64,
    pub frames: usize,
}

/// Maps `frames` random orthonormal frames of rank-one projections and
/// measures how far the images are from being a frame.
///
/// The oracle must fix `I/n` within `tol`.
pub fn frame_preservation_report<O: StateMapOracle + ?Sized>(
    oracle: &O,
    frames: usize,
    tol: f64,
    seed: u64,
) -> Result<FrameReport> {
    let normalization_deviation = require_normalized(oracle, tol)?;
    let n = oracle.dim();
    let devs = for_each_index(oracle, frames, |k| {
        let u = unitary_from_rng(&mut stream_rng(seed, k as u64), n);
        let frame = ProjectionFrame::from_unitary(&u);
        let images = frame
            .projections
            .iter()
            .map(|p| evaluate_checked(oracle, p))
            .collect::<Result<Vec<_>>>()?;
        let total = images.iter().fold(ComplexMatrix::zeros(n), |acc, p| &acc + p.matrix());
        let sum_frobenius = (&total - &ComplexMatrix::identity(n)).frobenius_norm();
        let (gram, sum) = ProjectionFrame { projections: images }.deviations();
        Ok((gram, sum, sum_frobenius))
    })?;
    let (gram_deviation, sum_deviation, sum_frobenius) =
        devs.into_iter().fold((0.0f64, 0.0f64, 0.0f64), |a, d| (a.0.max(d.0), a.1.max(d.1), a.2.max(d.2)));
    Ok(FrameReport {
        satisfied: gram_deviation <= tol && sum_deviation <= tol,
        normalization_deviation,
        gram_deviation,
        sum_deviation,
        sum_frobenius,
        tolerance: tol,
        seed,
        frames,
    })
}

pub fn check_frame_preservation<O: StateMapOracle + ?Sized>(oracle: &O, frames: usize, tol: f64, seed: u64) -> Result<bool> {
    Ok(frame_preservation_report(oracle, frames, tol, seed)?.satisfied)
}

pub const BALL_SPHERE_SAMPLES: usize = 200;
pub const BALL_MIDPOINT_SAMPLES: usize = 50;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BallReport {
    pub satisfied: bool,
    /// `|φ̂(0)|`.
    pub origin_deviation: f64,
    /// Largest `| |φ̂(u)| − 1 |` over sphere samples.
    pub sphere_deviation: f64,
    /// Largest `|φ̂((u+v)/2) − (φ̂(u)+φ̂(v))/2|` over ball samples.
    pub affinity_deviation: f64,
    /// Least-squares `L` with `φ̂(u) ≈ L u` on the sphere samples, row-major.
    pub linear_fit: [[f64; 3]; 3],
    /// Largest `|φ̂(u) − L u|` over the sphere samples.
    pub fit_residual: f64,
    /// Largest entry of `|L^T L − I|`.
    pub orthogonality_deviation: f64,
    /// Images of the sphere samples, for plotting.
    pub sphere_images: Vec<[f64; 3]>,
    pub tolerance: f64,
    pub seed: u64,
}

fn ball_image<O: StateMapOracle + ?Sized>(oracle: &O, v: [f64; 3]) -> Result<[f64; 3]> {
    let rho = bloch_to_state(&BlochVector::from_array(v)?)?;
    Ok(state_to_bloch(&evaluate_checked(oracle, &rho)?)?.to_array())
}

fn dist3(a: [f64; 3], b: [f64; 3]) -> f64 {
    ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2) + (a[2] - b[2]).powi(2)).sqrt()
}

fn norm3(a: [f64; 3]) -> f64 {
    dist3(a, [0.0; 3])
}

/// The qubit map seen on the Bloch ball: `φ̂ = state_to_bloch ∘ φ ∘ bloch_to_state`.
pub fn qubit_ball_report<O: StateMapOracle + ?Sized>(oracle: &O, tol: f64, seed: u64) -> Result<BallReport> {
    if oracle.dim() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, found: oracle.dim() });
    }
    require_normalized(oracle, tol)?;
    let origin_deviation = norm3(ball_image(oracle, [0.0; 3])?);

    let sphere = for_each_index(oracle, BALL_SPHERE_SAMPLES, |k| {
        let u = sphere_point(&mut stream_rng(seed, k as u64));
        Ok((u, ball_image(oracle, u)?))
    })?;
    let sphere_deviation = sphere.iter().map(|(_, v)| (norm3(*v) - 1.0).abs()).fold(0.0, f64::max);

    let affinity_deviation = for_each_index(oracle, BALL_MIDPOINT_SAMPLES, |k| {
        let mut rng = stream_rng(seed, INVERSE_STREAM + k as u64);
        let u = ball_point(&mut rng);
        let v = ball_point(&mut rng);
        let mid = [(u[0] + v[0]) / 2.0, (u[1] + v[1]) / 2.0, (u[2] + v[2]) / 2.0];
        let (fu, fv, fm) = (ball_image(oracle, u)?, ball_image(oracle, v)?, ball_image(oracle, mid)?);
        Ok(dist3(fm, [(fu[0] + fv[0]) / 2.0, (fu[1] + fv[1]) / 2.0, (fu[2] + fv[2]) / 2.0]))
    })?
    .into_iter()
    .fold(0.0, f64::max);

    let inputs = DMatrix::from_fn(sphere.len(), 3, |i, j| sphere[i].0[j]);
    let outputs = DMatrix::from_fn(sphere.len(), 3, |i, j| sphere[i].1[j]);
    // inputs · L^T ≈ outputs
    let lt = inputs
        .svd(true, true)
        .solve(&outputs, 1e-14)
        .map_err(|e| Error::InvalidInput(e.to_string()))?;
    let l = Matrix3::from_fn(|i, j| lt[(j, i)]);
    let fit_residual = sphere
        .iter()
        .map(|(u, v)| {
            let lu = l * nalgebra::Vector3::from(*u);
            dist3([lu[0], lu[1], lu[2]], *v)
        })
        .fold(0.0, f64::max);
    let orthogonality_deviation = (l.transpose() * l - Matrix3::identity()).abs().max();

    Ok(BallReport {
        satisfied: origin_deviation <= tol && sphere_deviation <= tol && affinity_deviation <= tol,
        origin_deviation,
        sphere_deviation,
        affinity_deviation,
        linear_fit: [[l[(0, 0)], l[(0, 1)], l[(0, 2)]], [l[(1, 0)], l[(1, 1)], l[(1, 2)]], [l[(2, 0)], l[(2, 1)], l[(2, 2)]]],
        fit_residual,
        orthogonality_deviation,
        sphere_images: sphere.into_iter().map(|(_, v)| v).collect(),
        tolerance: tol,
        seed,
    })
}

pub fn qubit_ball_check<O: StateMapOracle + ?Sized>(oracle: &O, tol: f64, seed: u64) -> Result<bool> {
    Ok(qubit_ball_report(oracle, tol, seed)?.satisfied)
}
