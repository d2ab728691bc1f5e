use nalgebra::{DMatrix, DVector};

use super::normalize::NormalizedOracle;
use crate::error::{Error, Result};
use crate::maps::{choi_matrix, is_completely_positive, CountingOracle, FractionalLinearMap, StateMapOracle};
use crate::state::coords::hermitian_to_coords;
use crate::state::matrix::ZERO;
use crate::state::{ComplexMatrix, DensityOperator, HermitianMatrix, ProjectionFrame, PureState, C64};

/// Minimum purity of `φ̃(e_i e_i*)`.
pub const PURITY_TOL: f64 = 1e-8;
/// Allowed frame deviation of the recovered eigenvectors.
pub const FRAME_TOL: f64 = 1e-8;
/// Smallest usable magnitude of an off-diagonal phase reading.
pub const PHASE_TOL: f64 = 1e-8;
/// Smallest accepted branch decision margin.
pub const BRANCH_MARGIN: f64 = 1e-6;
/// Tolerance of the Choi positivity test after unit spectral norm scaling.
pub const CHOI_TOL: f64 = 1e-8;

/// `φ̃(ρ) = U ρ U*` or `U ρ^T U*`.
#[derive(Clone, Debug)]
pub struct KadisonForm {
    pub unitary: ComplexMatrix,
    pub transposed: bool,
    /// Signed branch reading with the smallest magnitude over `j`: near `+1`
    /// on the linear branch and near `−1` on the transposed one.
    pub branch_margin: f64,
}

fn unit(n: usize, k: usize) -> Vec<C64> {
    (0..n).map(|i| if i == k { C64::new(1.0, 0.0) } else { ZERO }).collect()
}

fn superposition(n: usize, j: usize, weight: C64) -> DensityOperator {
    let mut v = unit(n, 0);
    v[j] = weight;
    PureState::normalize(v).expect("nonzero").to_density()
}

/// `⟨a| X |b⟩`.
fn sandwich(a: &[C64], x: &ComplexMatrix, b: &[C64]) -> C64 {
    let n = a.len();
    let mut acc = ZERO;
    for i in 0..n {
        for k in 0..n {
            acc += a[i].conj() * x.get(i, k) * b[k];
        }
    }
    acc
}

/// Dominant eigenvectors of `φ̃(e_i e_i*)`, checked to form an orthonormal basis.
pub(crate) fn frame_vectors(norm: &NormalizedOracle<'_>) -> Result<Vec<Vec<C64>>> {
    let n = norm.dim();
    let mut vectors = Vec::with_capacity(n);
    for i in 0..n {
        let image = norm.evaluate(&DensityOperator::basis_projection(n, i))?;
        let purity = image.purity();
        if purity < 1.0 - PURITY_TOL {
            return Err(Error::ImageNotPure { index: i, purity });
        }
        vectors.push(image.hermitian().decompose()?.eigenvector(0));
    }
    let frame = ProjectionFrame { projections: vectors.iter().map(|v| DensityOperator::normalized_psd(&ComplexMatrix::outer(v))).collect::<Result<_>>()? };
    let deviation = frame.deviation();
    if !(deviation <= FRAME_TOL) {
        return Err(Error::FrameNotOrthogonal(deviation));
    }
    Ok(vectors)
}

/// The frame `{u_i u_i*}` of images of the standard basis projections.
pub fn recover_frame_images(norm: &NormalizedOracle<'_>) -> Result<ProjectionFrame> {
    let vectors = frame_vectors(norm)?;
    Ok(ProjectionFrame {
        projections: vectors.iter().map(|v| DensityOperator::normalized_psd(&ComplexMatrix::outer(v))).collect::<Result<_>>()?,
    })
}

/// Aligns the phases of the frame vectors and reads off the branch.
pub(crate) fn kadison_from_frame(norm: &NormalizedOracle<'_>, mut vectors: Vec<Vec<C64>>) -> Result<KadisonForm> {
    let n = vectors.len();
    // Column 1: largest-magnitude entry real positive.
    let pivot = vectors[0].iter().copied().fold(ZERO, |best, z| if z.norm() > best.norm() { z } else { best });
    let phase = pivot.conj() / pivot.norm();
    vectors[0].iter_mut().for_each(|z| *z *= phase);

    for j in 1..n {
        let image = norm.evaluate(&superposition(n, j, C64::new(1.0, 0.0)))?;
        let reading = sandwich(&vectors[0], image.matrix(), &vectors[j]) * 2.0;
        let magnitude = reading.norm();
        if magnitude < PHASE_TOL {
            return Err(Error::PhaseAmbiguous { index: j, magnitude });
        }
        let alpha = reading.conj() / magnitude;
        vectors[j].iter_mut().for_each(|z| *z *= alpha);
    }

    let mut margin: Option<f64> = None;
    for j in 1..n {
        let image = norm.evaluate(&superposition(n, j, C64::new(0.0, 1.0)))?;
        // −i on the linear branch, +i on the transposed one.
        let z = sandwich(&vectors[0], image.matrix(), &vectors[j]) * 2.0;
        let d = -z.im;
        if d.abs() < BRANCH_MARGIN {
            return Err(Error::BranchInconsistent { index: j, margin: d });
        }
        if let Some(m) = margin {
            if m.signum() != d.signum() {
                return Err(Error::BranchInconsistent { index: j, margin: d });
            }
        }
        if margin.is_none_or(|m| d.abs() < m.abs()) {
            margin = Some(d);
        }
    }
    let branch_margin = margin.expect("n ≥ 2");
    Ok(KadisonForm { unitary: ComplexMatrix::from_columns(&vectors)?, transposed: branch_margin < 0.0, branch_margin })
}

/// Recovers `U` and the branch of the normalized map using `n + 2(n − 1)` queries.
pub fn recover_unitary_and_branch(norm: &NormalizedOracle<'_>) -> Result<KadisonForm> {
    let vectors = frame_vectors(norm)?;
    kadison_from_frame(norm, vectors)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BranchCrossCheck {
    pub completely_positive: bool,
    /// Smallest eigenvalue of the Choi matrix divided by its spectral norm.
    pub normalized_min_eigenvalue: f64,
    pub choi_eigenvalues: Vec<f64>,
    pub queries: usize,
}

/// Probe states `E_ii`, `(e_i + e_j)/√2` and `(e_i + i e_j)/√2` for `i < j`,
/// which span the Hermitian matrices.
fn probe_states(n: usize) -> Vec<DensityOperator> {
    let mut probes: Vec<DensityOperator> = (0..n).map(|i| DensityOperator::basis_projection(n, i)).collect();
    for weight in [C64::new(1.0, 0.0), C64::new(0.0, 1.0)] {
        for i in 0..n {
            for j in i + 1..n {
                let mut v = vec![ZERO; n];
                v[i] = C64::new(1.0, 0.0);
                v[j] = weight;
                probes.push(PureState::normalize(v).expect("nonzero").to_density());
            }
        }
    }
    probes
}

/// Independent branch decision: interpolates the affine map `φ̃` on `n²`
/// probe states, extends it linearly and tests its Choi matrix for positivity.
pub fn branch_cross_check(norm: &NormalizedOracle<'_>) -> Result<BranchCrossCheck> {
    let n = norm.dim();
    let nn = n * n;
    let counted = CountingOracle::new(norm);
    let probes = probe_states(n);
    let mut inputs = DMatrix::<f64>::zeros(nn, nn);
    let mut outputs = DMatrix::<f64>::zeros(nn, nn);
    for (k, p) in probes.iter().enumerate() {
        inputs.set_column(k, &DVector::from_vec(hermitian_to_coords(p.hermitian())));
        let image = counted.evaluate(p)?;
        outputs.set_column(k, &DVector::from_vec(hermitian_to_coords(image.hermitian())));
    }
    let inv = inputs.try_inverse().ok_or(Error::NumericallySingular(0.0))?;
    let psi = outputs * inv;
    let zero = HermitianMatrix::from_real_diagonal(&vec![0.0; n]);
    let linear = FractionalLinearMap::new(n, psi, zero, vec![0.0; nn], 1.0)?;
    let choi = choi_matrix(&linear.numerator_superoperator()).normalized()?;
    let choi_eigenvalues = choi.eigenvalues()?;
    Ok(BranchCrossCheck {
        completely_positive: is_completely_positive(&choi, CHOI_TOL)?,
        normalized_min_eigenvalue: choi_eigenvalues[nn - 1],
        choi_eigenvalues,
        queries: counted.calls(),
    })
}

/// `max |U*U − I|`.
pub fn unitarity_deviation(u: &ComplexMatrix) -> f64 {
    (&(&u.adjoint() * u) - &ComplexMatrix::identity(u.dim())).as_dmatrix().iter().fold(0.0, |a, z| a.max(z.norm()))
}
