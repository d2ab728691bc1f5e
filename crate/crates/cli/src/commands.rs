use measmap::geometry::{
    check_segment_containment, check_segment_equality, frame_preservation_report, pure_preservation_report,
    qubit_ball_report, BallReport, FrameReport, PurityReport, SegmentCertificate,
};
use measmap::json::MatrixJson;
use measmap::maps::{
    choi_matrix, invert_map, is_completely_positive, linearize, MapJson, MeasurementMap, StateMapOracle,
    Superoperator,
};
use measmap::reconstruct::{
    branch_cross_check, fit_pales, min_pales_samples, nested_subspace_report, normalize_at_maximally_mixed,
    reconstruct_candidate, sample_oracle, NestedReport, SamplePairJson,
};
use measmap::state::random::{random_density, random_invertible, random_pure};
use measmap::state::hermitian_trace_distance;
use serde::Serialize;

use crate::args::*;
use crate::io::{read_json, resolve_map, write_json, MapSource};
use crate::{CliError, Verdict};

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Serialize)]
struct Report<'a, T: Serialize> {
    command: &'static str,
    version: &'static str,
    seed: Option<u64>,
    tolerance: Option<f64>,
    oracle: Option<&'a str>,
    n: usize,
    #[serde(flatten)]
    body: T,
    errors: Vec<String>,
}

impl<'a, T: Serialize> Report<'a, T> {
    fn verdict(&self, ok: bool) -> Verdict {
        if ok && self.errors.is_empty() {
            Verdict::Ok
        } else {
            Verdict::Finding
        }
    }
}

/// Records a library error as a finding.
fn note<T>(result: measmap::Result<T>, errors: &mut Vec<String>) -> Option<T> {
    result.map_err(|e| errors.push(e.to_string())).ok()
}

fn input<T>(result: measmap::Result<T>) -> Result<T, CliError> {
    result.map_err(|e| CliError::Input(e.to_string()))
}

fn require_n(n: Option<usize>, what: &str) -> Result<usize, CliError> {
    match n {
        Some(n) if n >= 1 => Ok(n),
        Some(n) => Err(CliError::Usage(format!("--n {n}: dimension must be positive"))),
        None => Err(CliError::Usage(format!("{what} needs --n"))),
    }
}

pub fn run(command: Command) -> Result<Verdict, CliError> {
    match command {
        Command::Gen(a) => gen(a),
        Command::Apply(a) => apply(a),
        Command::CheckSegment(a) => check_segment(a),
        Command::CheckPure(a) => check_pure(a),
        Command::CheckFrame(a) => check_frame(a),
        Command::QubitBall(a) => qubit_ball(a),
        Command::Reconstruct(a) => reconstruct(a),
        Command::FitPales(a) => fit(a),
        Command::Choi(a) => choi(a),
        Command::NestedCheck(a) => nested(a),
    }
}

fn gen(a: GenArgs) -> Result<Verdict, CliError> {
    let out = a.output.out.as_ref();
    match a.kind {
        GenKind::Map => {
            let n = require_n(a.n, "gen --kind map")?;
            if !(a.max_condition > 1.0) {
                return Err(CliError::Usage(format!("--max-condition {} must exceed 1", a.max_condition)));
            }
            let m = input(random_invertible(n, a.seed, a.max_condition))?;
            let map = input(MeasurementMap::new(m, a.transpose))?;
            write_json(&MapJson::from_measurement(&map), out)?;
        }
        GenKind::State => write_json(&MatrixJson::from_density(&random_density(require_n(a.n, "gen --kind state")?, a.seed)), out)?,
        GenKind::Pure => {
            let psi = random_pure(require_n(a.n, "gen --kind pure")?, a.seed);
            write_json(&MatrixJson::from_density(&psi.to_density()), out)?
        }
        GenKind::Samples => {
            let spec = a.oracle.as_deref().ok_or_else(|| CliError::Usage("gen --kind samples needs --oracle".into()))?;
            let source = resolve_map(spec, a.n, "--oracle")?;
            let pairs = input(sample_oracle(&*source.oracle(), a.samples, a.seed))?;
            let doc: Vec<SamplePairJson> = pairs.iter().map(|(r, i)| SamplePairJson::new(r, i)).collect();
            write_json(&doc, out)?;
        }
    }
    Ok(Verdict::Ok)
}

fn apply(a: ApplyArgs) -> Result<Verdict, CliError> {
    let state: MatrixJson = read_json(a.input.as_deref())?;
    let rho = input(state.to_density())?;
    let source = resolve_map(&a.map, Some(rho.dim()), "--map")?;
    let image = input(source.oracle().evaluate(&rho))?;
    write_json(&MatrixJson::from_density(&image), a.output.out.as_ref())?;
    Ok(Verdict::Ok)
}

#[derive(Serialize)]
struct SegmentBody {
    satisfied: bool,
    worst_deviation: f64,
    containment: Option<SegmentCertificate>,
    equality: Option<SegmentCertificate>,
}

fn check_segment(a: CheckSegmentArgs) -> Result<Verdict, CliError> {
    if a.pairs == 0 || a.grid == 0 {
        return Err(CliError::Usage("--pairs and --grid must be positive".into()));
    }
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    let oracle = source.oracle();
    let mut errors = Vec::new();
    let containment = if a.mode != SegmentMode::Equality {
        note(check_segment_containment(&*oracle, a.pairs, a.grid, a.tol, a.seed), &mut errors)
    } else {
        None
    };
    let equality = if a.mode != SegmentMode::Containment {
        note(check_segment_equality(&*oracle, a.pairs, a.grid, a.tol, a.seed), &mut errors)
    } else {
        None
    };
    let certs = || containment.iter().chain(equality.iter());
    let satisfied = certs().all(|c| c.satisfied);
    let worst_deviation = certs().map(|c| c.worst_deviation).fold(0.0, f64::max);
    let report = Report {
        command: "check-segment",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(a.tol),
        oracle: Some(&a.oracle.oracle),
        n: source.dim(),
        body: SegmentBody { satisfied, worst_deviation, containment, equality },
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(report.body.satisfied))
}

fn check_pure(a: CheckPureArgs) -> Result<Verdict, CliError> {
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    let inverse: Option<Box<dyn StateMapOracle>> = if a.inverse {
        match &source {
            MapSource::Measurement(m) => Some(Box::new(input(invert_map(m))?)),
            MapSource::Builtin(name, _) if name == "identity" || name == "transpose" => {
                Some(measmap::maps::builtin::by_name(name, source.dim()).expect("known name"))
            }
            _ => return Err(CliError::Usage("--inverse needs a measurement-map oracle".into())),
        }
    } else {
        None
    };
    let mut errors = Vec::new();
    let body: Option<PurityReport> =
        note(pure_preservation_report(&*source.oracle(), inverse.as_deref(), a.samples, a.tol, a.seed), &mut errors);
    let ok = body.as_ref().is_some_and(|b| b.satisfied);
    let report = Report {
        command: "check-pure",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(a.tol),
        oracle: Some(&a.oracle.oracle),
        n: source.dim(),
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(ok))
}

/// Runs `check` on the oracle, whitened first when asked.
fn with_normalization<T>(
    oracle: &dyn StateMapOracle,
    normalize: bool,
    errors: &mut Vec<String>,
    check: impl FnOnce(&dyn StateMapOracle) -> measmap::Result<T>,
) -> Option<T> {
    if normalize {
        let norm = note(normalize_at_maximally_mixed(oracle), errors)?;
        note(check(&norm), errors)
    } else {
        note(check(oracle), errors)
    }
}

fn check_frame(a: CheckFrameArgs) -> Result<Verdict, CliError> {
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    let mut errors = Vec::new();
    let body: Option<FrameReport> = with_normalization(&*source.oracle(), a.normalize, &mut errors, |o| {
        frame_preservation_report(o, a.frames, a.tol, a.seed)
    });
    let ok = body.as_ref().is_some_and(|b| b.satisfied);
    let report = Report {
        command: "check-frame",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(a.tol),
        oracle: Some(&a.oracle.oracle),
        n: source.dim(),
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(ok))
}

fn qubit_ball(a: QubitBallArgs) -> Result<Verdict, CliError> {
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    if source.dim() != 2 {
        return Err(CliError::Usage(format!("qubit-ball needs a qubit oracle, got n = {}", source.dim())));
    }
    let mut errors = Vec::new();
    let body: Option<BallReport> =
        with_normalization(&*source.oracle(), a.normalize, &mut errors, |o| qubit_ball_report(o, a.tol, a.seed));
    let ok = body.as_ref().is_some_and(|b| b.satisfied);
    let report = Report {
        command: "qubit-ball",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(a.tol),
        oracle: Some(&a.oracle.oracle),
        n: 2,
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(ok))
}

#[derive(Serialize)]
struct CrossCheckBody {
    completely_positive: bool,
    normalized_min_eigenvalue: f64,
    queries: usize,
    agrees: Option<bool>,
}

#[derive(Serialize)]
struct ReconstructBody {
    #[serde(rename = "M")]
    m: Option<MatrixJson>,
    transpose: Option<bool>,
    residual: Option<f64>,
    branch_margin: Option<f64>,
    queries: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    cross_check: Option<CrossCheckBody>,
}

fn reconstruct(a: ReconstructArgs) -> Result<Verdict, CliError> {
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    let oracle = source.oracle();
    let mut errors = Vec::new();
    let result = note(reconstruct_candidate(&*oracle, a.samples, a.seed), &mut errors);
    if let Some(r) = &result {
        if !(r.residual <= a.tol) {
            errors.push(measmap::Error::VerificationFailed(r.residual).to_string());
        }
    }
    let cross_check = if a.cross_check {
        normalize_at_maximally_mixed(&*oracle).and_then(|norm| branch_cross_check(&norm)).map_or_else(
            |e| {
                errors.push(e.to_string());
                None
            },
            |c| {
                Some(CrossCheckBody {
                    agrees: result.as_ref().map(|r| r.map.transposed() != c.completely_positive),
                    completely_positive: c.completely_positive,
                    normalized_min_eigenvalue: c.normalized_min_eigenvalue,
                    queries: c.queries,
                })
            },
        )
    } else {
        None
    };
    if cross_check.as_ref().is_some_and(|c| c.agrees == Some(false)) {
        errors.push("branch decisions disagree".into());
    }
    let body = ReconstructBody {
        m: result.as_ref().map(|r| MatrixJson::from_matrix(r.map.matrix(), measmap::json::MatrixKind::Matrix)),
        transpose: result.as_ref().map(|r| r.map.transposed()),
        residual: result.as_ref().map(|r| r.residual),
        branch_margin: result.as_ref().map(|r| r.branch_margin),
        queries: result.as_ref().map(|r| r.queries),
        cross_check,
    };
    let report = Report {
        command: "reconstruct",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(a.tol),
        oracle: Some(&a.oracle.oracle),
        n: source.dim(),
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(true))
}

#[derive(Serialize)]
struct FitBody {
    map: Option<MapJson>,
    residual: Option<f64>,
    rank_gap: Option<f64>,
    scale_convention: &'static str,
    samples: usize,
    /// Largest trace distance to the oracle on fresh states (live oracles only).
    held_out_trace_distance: Option<f64>,
}

fn fit(a: FitPalesArgs) -> Result<Verdict, CliError> {
    let mut errors = Vec::new();
    let (pairs, source) = match (&a.input, &a.oracle) {
        (Some(path), None) => {
            let doc: Vec<SamplePairJson> = read_json(Some(path))?;
            (input(doc.iter().map(SamplePairJson::to_pair).collect::<measmap::Result<Vec<_>>>())?, None)
        }
        (None, Some(spec)) => {
            let seed = a.seed.ok_or_else(|| CliError::Usage("fit-pales --oracle needs --seed".into()))?;
            let source = resolve_map(spec, a.n, "--oracle")?;
            let count = a.samples.unwrap_or(2 * min_pales_samples(source.dim()));
            let pairs = input(sample_oracle(&*source.oracle(), count, seed))?;
            (pairs, Some(source))
        }
        _ => return Err(CliError::Usage("fit-pales needs exactly one of --in and --oracle".into())),
    };
    let n = pairs.first().map_or(0, |p| p.0.dim());
    let fitted = note(fit_pales(&pairs), &mut errors);
    let held_out = match (&fitted, &source) {
        (Some(f), Some(src)) => {
            let fresh = input(sample_oracle(&*src.oracle(), 20, a.seed.expect("checked").wrapping_add(1)))?;
            let mut worst = 0.0f64;
            for (rho, image) in &fresh {
                let d = measmap::maps::apply_fractional_linear(&f.map, rho)
                    .and_then(|out| hermitian_trace_distance(&out, image.hermitian()));
                match note(d, &mut errors) {
                    Some(d) => worst = worst.max(d),
                    None => break,
                }
            }
            Some(worst)
        }
        _ => None,
    };
    if let Some(f) = &fitted {
        if !(f.residual <= a.tol) {
            errors.push(format!("fit residual {:e} exceeds tolerance", f.residual));
        }
    }
    let body = FitBody {
        map: fitted.as_ref().map(|f| MapJson::from_fractional(&f.map)),
        residual: fitted.as_ref().map(|f| f.residual),
        rank_gap: fitted.as_ref().map(|f| f.rank_gap),
        scale_convention: measmap::reconstruct::SCALE_CONVENTION,
        samples: pairs.len(),
        held_out_trace_distance: held_out,
    };
    let report = Report {
        command: "fit-pales",
        version: VERSION,
        seed: a.seed,
        tolerance: Some(a.tol),
        oracle: a.oracle.as_deref(),
        n,
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(true))
}

#[derive(Serialize)]
struct ChoiBody {
    eigenvalues: Vec<f64>,
    normalized_min_eigenvalue: f64,
    cp: bool,
}

fn choi(a: ChoiArgs) -> Result<Verdict, CliError> {
    let superop = match a.map.as_str() {
        "identity" => Superoperator::identity(require_n(a.n, "choi --map identity")?),
        "transpose" => Superoperator::transpose(require_n(a.n, "choi --map transpose")?),
        spec => match resolve_map(spec, a.n, "--map")? {
            MapSource::Measurement(m) => linearize(&m),
            MapSource::Fractional(g) => g.numerator_superoperator(),
            MapSource::Builtin(name, _) => {
                return Err(CliError::Usage(format!("--map {name}: not a linear map; use identity, transpose or a file")))
            }
        },
    };
    let c = choi_matrix(&superop);
    let normalized = input(c.normalized())?;
    let body = ChoiBody {
        eigenvalues: input(c.eigenvalues())?,
        normalized_min_eigenvalue: input(c.normalized_min_eigenvalue())?,
        cp: input(is_completely_positive(&normalized, a.tol))?,
    };
    let report = Report {
        command: "choi",
        version: VERSION,
        seed: None,
        tolerance: Some(a.tol),
        oracle: Some(&a.map),
        n: superop.dim(),
        body,
        errors: Vec::new(),
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(Verdict::Ok)
}

fn nested(a: NestedArgs) -> Result<Verdict, CliError> {
    let source = resolve_map(&a.oracle.oracle, a.oracle.n, "--oracle")?;
    let n = source.dim();
    if !(2 <= a.k1 && a.k1 < a.k2 && a.k2 <= n) {
        return Err(CliError::Usage(format!("need 2 <= --k1 < --k2 <= n, got {} and {} with n = {n}", a.k1, a.k2)));
    }
    let mut errors = Vec::new();
    let body: Option<NestedReport> = note(nested_subspace_report(&*source.oracle(), a.k1, a.k2, a.trials, a.seed), &mut errors);
    let ok = body.as_ref().is_some_and(|b| b.consistent);
    let report = Report {
        command: "nested-check",
        version: VERSION,
        seed: Some(a.seed),
        tolerance: Some(measmap::reconstruct::NESTED_TOL),
        oracle: Some(&a.oracle.oracle),
        n,
        body,
        errors,
    };
    write_json(&report, a.output.out.as_ref())?;
    Ok(report.verdict(ok))
}
