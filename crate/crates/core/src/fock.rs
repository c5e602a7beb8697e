//! Truncated Fock-space operators and multipartite composition.
//!
//! Composite spaces order their factors left to right with the leftmost
//! factor as the slowest-varying index, i.e. the basis of `A ⊗ B` is
//! `|a⟩|b⟩ ↦ a * dim(B) + b`. Every module in this crate relies on that
//! ordering (`qubits ⊗ cavity`, `cavity ⊗ detector`).

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::expm::expm;

/// Tolerance for claimed Hermiticity of operators.
pub const HERMITIAN_TOL: f64 = 1e-12;

#[inline]
pub(crate) fn c64(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// A (possibly composite) Hilbert space described by its factor dimensions.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct HilbertSpace {
    factors: Vec<usize>,
}

impl HilbertSpace {
    /// Single factor of dimension `dim` (Fock truncation or qudit level count).
    pub fn new(dim: usize) -> Result<Self> {
        if dim < 2 {
            return Err(Error::InvalidSpace { dim });
        }
        Ok(Self { factors: vec![dim] })
    }

    /// Tensor product of the given spaces, flattening nested composites.
    pub fn composite(parts: &[&HilbertSpace]) -> Result<Self> {
        if parts.is_empty() {
            return Err(Error::InvalidSpace { dim: 0 });
        }
        let factors = parts.iter().flat_map(|p| p.factors.iter().copied()).collect();
        Ok(Self { factors })
    }

    pub fn dim(&self) -> usize {
        self.factors.iter().product()
    }

    pub fn factors(&self) -> &[usize] {
        &self.factors
    }

    pub fn is_single(&self) -> bool {
        self.factors.len() == 1
    }
}

/// Dense operator on a Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct OperatorMatrix {
    space: HilbertSpace,
    matrix: DMatrix<Complex64>,
}

impl OperatorMatrix {
    pub fn new(space: HilbertSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        let dim = space.dim();
        if matrix.nrows() != dim || matrix.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn identity(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: DMatrix::identity(d, d),
        }
    }

    pub fn zeros(space: &HilbertSpace) -> Self {
        let d = space.dim();
        Self {
            space: space.clone(),
            matrix: DMatrix::zeros(d, d),
        }
    }

    /// `|i⟩⟨j|` on `space`.
    pub fn transition(space: &HilbertSpace, i: usize, j: usize) -> Result<Self> {
        let d = space.dim();
        if i >= d || j >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: i.max(j) + 1,
            });
        }
        let mut m = DMatrix::zeros(d, d);
        m[(i, j)] = c64(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            matrix: m,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            space: self.space.clone(),
            matrix: self.matrix.adjoint(),
        }
    }

    /// Max-entry distance between the operator and its adjoint.
    pub fn hermiticity_error(&self) -> f64 {
        hermiticity_error(&self.matrix)
    }

    pub fn is_hermitian(&self, tol: f64) -> bool {
        self.hermiticity_error() <= tol
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self {
            space: self.space.clone(),
            matrix: &self.matrix * factor,
        }
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix + &other.matrix,
        })
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix - &other.matrix,
        })
    }

    pub fn mul(&self, other: &Self) -> Result<Self> {
        self.check_same(other)?;
        Ok(Self {
            space: self.space.clone(),
            matrix: &self.matrix * &other.matrix,
        })
    }

    pub fn apply(&self, state: &StateVector) -> Result<StateVector> {
        if state.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: state.dim(),
            });
        }
        Ok(StateVector {
            space: self.space.clone(),
            amplitudes: &self.matrix * &state.amplitudes,
        })
    }

    fn check_same(&self, other: &Self) -> Result<()> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(())
    }
}

pub(crate) fn hermiticity_error(m: &DMatrix<Complex64>) -> f64 {
    let n = m.nrows();
    let mut worst = 0.0f64;
    for j in 0..n {
        for i in 0..=j {
            worst = worst.max((m[(i, j)] - m[(j, i)].conj()).norm());
        }
    }
    worst
}

/// Pure state in a (truncated) Hilbert space.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    space: HilbertSpace,
    amplitudes: DVector<Complex64>,
}

impl StateVector {
    /// Wraps raw amplitudes without normalizing.
    pub fn from_amplitudes(space: HilbertSpace, amplitudes: DVector<Complex64>) -> Result<Self> {
        if amplitudes.len() != space.dim() {
            return Err(Error::DimensionMismatch {
                expected: space.dim(),
                found: amplitudes.len(),
            });
        }
        Ok(Self { space, amplitudes })
    }

    /// Basis state `|index⟩`.
    pub fn basis(space: &HilbertSpace, index: usize) -> Result<Self> {
        let d = space.dim();
        if index >= d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: index + 1,
            });
        }
        let mut v = DVector::zeros(d);
        v[index] = c64(1.0, 0.0);
        Ok(Self {
            space: space.clone(),
            amplitudes: v,
        })
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn amplitudes(&self) -> &DVector<Complex64> {
        &self.amplitudes
    }

    pub fn dim(&self) -> usize {
        self.amplitudes.len()
    }

    pub fn norm(&self) -> f64 {
        self.amplitudes.norm()
    }

    /// Returns the normalized state, or an error for a zero vector.
    pub fn normalized(&self) -> Result<Self> {
        let n = self.norm();
        if n < 1e-300 || !n.is_finite() {
            return Err(Error::EmptyState("cannot normalize a zero vector".into()));
        }
        Ok(Self {
            space: self.space.clone(),
            amplitudes: &self.amplitudes / c64(n, 0.0),
        })
    }

    /// `⟨self|other⟩`.
    pub fn inner(&self, other: &Self) -> Result<Complex64> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: other.dim(),
            });
        }
        Ok(self.amplitudes.dotc(&other.amplitudes))
    }

    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        let applied = op.apply(self)?;
        self.inner(&applied)
    }

    pub fn to_density(&self) -> DensityMatrix {
        DensityMatrix {
            space: self.space.clone(),
            matrix: &self.amplitudes * self.amplitudes.adjoint(),
        }
    }

    /// Occupation probabilities `|⟨n|ψ⟩|²`.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|z| z.norm_sqr()).collect()
    }
}

/// Density matrix. Constructors do not enforce positivity; use
/// [`DensityMatrix::diagnostics`] to check the physical invariants.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: HilbertSpace,
    matrix: DMatrix<Complex64>,
}

/// Deviations of a density matrix from the physical invariants.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StateDiagnostics {
    pub trace_error: f64,
    pub hermiticity_error: f64,
    pub min_eigenvalue: f64,
}

impl StateDiagnostics {
    pub const TRACE_TOL: f64 = 1e-8;
    pub const HERMITIAN_TOL: f64 = 1e-10;
    pub const POSITIVITY_TOL: f64 = 1e-9;

    pub fn is_physical(&self) -> bool {
        self.trace_error <= Self::TRACE_TOL
            && self.hermiticity_error <= Self::HERMITIAN_TOL
            && self.min_eigenvalue >= -Self::POSITIVITY_TOL
    }
}

impl DensityMatrix {
    pub fn new(space: HilbertSpace, matrix: DMatrix<Complex64>) -> Result<Self> {
        let d = space.dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch {
                expected: d,
                found: matrix.nrows().max(matrix.ncols()),
            });
        }
        Ok(Self { space, matrix })
    }

    pub fn from_pure(state: &StateVector) -> Self {
        state.to_density()
    }

    pub fn space(&self) -> &HilbertSpace {
        &self.space
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> Complex64 {
        self.matrix.trace()
    }

    /// `Tr(O ρ)`.
    pub fn expectation(&self, op: &OperatorMatrix) -> Result<Complex64> {
        if op.dim() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: op.dim(),
            });
        }
        let a = op.matrix();
        let r = &self.matrix;
        let n = self.dim();
        let mut acc = Complex64::new(0.0, 0.0);
        for i in 0..n {
            for k in 0..n {
                acc += a[(i, k)] * r[(k, i)];
            }
        }
        Ok(acc)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        let mut herm = (&self.matrix + self.matrix.adjoint()) * c64(0.5, 0.0);
        // entries far below the scale of the matrix drive the symmetric QR
        // iteration into underflow, after which it reports -inf
        let floor = 1e-30 * herm.iter().map(|z| z.norm()).fold(0.0, f64::max);
        herm.iter_mut().filter(|z| z.norm() < floor).for_each(|z| *z = c64(0.0, 0.0));
        let min = herm.clone().symmetric_eigenvalues().min();
        if min.is_finite() {
            return min;
        }
        // [[A, −B], [B, A]] has the spectrum of A + iB, each value twice
        let n = herm.nrows();
        DMatrix::<f64>::from_fn(2 * n, 2 * n, |i, j| {
            let z = herm[(i % n, j % n)];
            match (i < n, j < n) {
                (true, false) => -z.im,
                (false, true) => z.im,
                _ => z.re,
            }
        })
        .symmetric_eigenvalues()
        .min()
    }

    pub fn diagnostics(&self) -> StateDiagnostics {
        StateDiagnostics {
            trace_error: (self.trace() - c64(1.0, 0.0)).norm(),
            hermiticity_error: hermiticity_error(&self.matrix),
            min_eigenvalue: self.min_eigenvalue(),
        }
    }

    /// Reduced state on the factors listed in `keep` (in increasing order).
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityMatrix> {
        partial_trace(self, keep)
    }
}

/// Annihilation, creation and number operators on a single truncated mode.
#[derive(Clone, Debug)]
pub struct LadderOperators {
    pub annihilation: OperatorMatrix,
    pub creation: OperatorMatrix,
    pub number: OperatorMatrix,
}

pub fn ladder_operators(space: &HilbertSpace) -> Result<LadderOperators> {
    if !space.is_single() {
        return Err(Error::InvalidParameter(
            "ladder operators need a single-mode space".into(),
        ));
    }
    let d = space.dim();
    if d < 2 {
        return Err(Error::InvalidSpace { dim: d });
    }
    let mut a = DMatrix::zeros(d, d);
    for n in 1..d {
        a[(n - 1, n)] = c64((n as f64).sqrt(), 0.0);
    }
    let adag = a.adjoint();
    let num = DMatrix::from_diagonal(&DVector::from_fn(d, |n, _| c64(n as f64, 0.0)));
    Ok(LadderOperators {
        annihilation: OperatorMatrix::new(space.clone(), a)?,
        creation: OperatorMatrix::new(space.clone(), adag)?,
        number: OperatorMatrix::new(space.clone(), num)?,
    })
}

/// Fock truncation that keeps the Poisson tail of `|α⟩` negligible:
/// `ceil(|α|² + 6|α| + 10)`.
pub fn recommended_dim(abs_alpha: f64) -> usize {
    let a = abs_alpha.abs();
    (a * a + 6.0 * a + 10.0).ceil() as usize
}

pub fn truncation_adequate(alpha: Complex64, dim: usize) -> bool {
    recommended_dim(alpha.norm()) <= dim
}

fn warn_truncation(alpha: Complex64, dim: usize) {
    if !truncation_adequate(alpha, dim) {
        log::warn!(
            "Fock truncation {dim} below recommended {} for |alpha| = {:.4}",
            recommended_dim(alpha.norm()),
            alpha.norm()
        );
    }
}

/// `D(α) = exp(α a† − ᾱ a)` on a single truncated mode. The truncated
/// generator is anti-Hermitian, so the result is exactly unitary and
/// `D(−α) = D(α)†`.
pub fn displacement_operator(alpha: Complex64, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let l = ladder_operators(space)?;
    warn_truncation(alpha, space.dim());
    let gen = l.creation.matrix() * alpha - l.annihilation.matrix() * alpha.conj();
    OperatorMatrix::new(space.clone(), expm(&gen))
}

/// Coherent state with analytic amplitudes `e^{−|α|²/2} αⁿ/√n!`,
/// renormalized after truncation.
pub fn coherent_state(alpha: Complex64, space: &HilbertSpace) -> Result<StateVector> {
    if !space.is_single() {
        return Err(Error::InvalidParameter(
            "coherent states need a single-mode space".into(),
        ));
    }
    warn_truncation(alpha, space.dim());
    let d = space.dim();
    let mut amps = DVector::zeros(d);
    // build by recurrence c_{n} = c_{n-1} α / √n to avoid factorial overflow
    let mut c = c64((-0.5 * alpha.norm_sqr()).exp(), 0.0);
    amps[0] = c;
    for n in 1..d {
        c = c * alpha / (n as f64).sqrt();
        amps[n] = c;
    }
    StateVector::from_amplitudes(space.clone(), amps)?.normalized()
}

/// Untruncated overlap `⟨α|β⟩ = exp(−|α|²/2 − |β|²/2 + ᾱβ)`.
pub fn coherent_overlap(alpha: Complex64, beta: Complex64) -> Complex64 {
    (-0.5 * alpha.norm_sqr() - 0.5 * beta.norm_sqr() + alpha.conj() * beta).exp()
}

/// Kronecker product of operators, leftmost slowest.
pub fn tensor_embed(ops: &[&OperatorMatrix]) -> Result<OperatorMatrix> {
    let (first, rest) = ops
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("tensor_embed needs at least one operator".into()))?;
    let mut matrix = first.matrix().clone();
    let mut spaces = vec![first.space()];
    for op in rest {
        matrix = matrix.kronecker(op.matrix());
        spaces.push(op.space());
    }
    let space = HilbertSpace::composite(&spaces)?;
    OperatorMatrix::new(space, matrix)
}

/// Places `op` on factor `position` of `space` with identities elsewhere.
pub fn embed_at(op: &OperatorMatrix, position: usize, space: &HilbertSpace) -> Result<OperatorMatrix> {
    let factors = space.factors();
    if position >= factors.len() {
        return Err(Error::InvalidParameter(format!(
            "factor {position} out of range for {} factors",
            factors.len()
        )));
    }
    if factors[position] != op.dim() {
        return Err(Error::DimensionMismatch {
            expected: factors[position],
            found: op.dim(),
        });
    }
    let before: usize = factors[..position].iter().product();
    let after: usize = factors[position + 1..].iter().product();
    let mut m = DMatrix::<Complex64>::identity(before, before).kronecker(op.matrix());
    m = m.kronecker(&DMatrix::<Complex64>::identity(after, after));
    OperatorMatrix::new(space.clone(), m)
}

/// Kronecker product of density matrices.
pub fn tensor_density(parts: &[&DensityMatrix]) -> Result<DensityMatrix> {
    let (first, rest) = parts
        .split_first()
        .ok_or_else(|| Error::InvalidParameter("tensor_density needs at least one state".into()))?;
    let mut matrix = first.matrix().clone();
    let mut spaces = vec![first.space()];
    for p in rest {
        matrix = matrix.kronecker(p.matrix());
        spaces.push(p.space());
    }
    DensityMatrix::new(HilbertSpace::composite(&spaces)?, matrix)
}

/// Traces out every factor not listed in `keep`.
pub fn partial_trace(rho: &DensityMatrix, keep: &[usize]) -> Result<DensityMatrix> {
    let factors = rho.space().factors().to_vec();
    let nf = factors.len();
    let mut keep_sorted = keep.to_vec();
    keep_sorted.sort_unstable();
    keep_sorted.dedup();
    if keep_sorted.is_empty() || keep_sorted.iter().any(|&k| k >= nf) {
        return Err(Error::InvalidParameter(format!(
            "keep set {keep:?} invalid for {nf} factors"
        )));
    }
    let traced: Vec<usize> = (0..nf).filter(|i| !keep_sorted.contains(i)).collect();
    let keep_dims: Vec<usize> = keep_sorted.iter().map(|&i| factors[i]).collect();
    let tr_dims: Vec<usize> = traced.iter().map(|&i| factors[i]).collect();
    let dk: usize = keep_dims.iter().product();
    let dt: usize = tr_dims.iter().product();

    // strides of each factor in the full index
    let mut strides = vec![1usize; nf];
    for i in (0..nf.saturating_sub(1)).rev() {
        strides[i] = strides[i + 1] * factors[i + 1];
    }
    let full_index = |k_idx: usize, t_idx: usize| -> usize {
        let mut idx = 0;
        let mut rem = k_idx;
        for (pos, &f) in keep_sorted.iter().enumerate().rev() {
            let d = keep_dims[pos];
            idx += (rem % d) * strides[f];
            rem /= d;
        }
        let mut rem = t_idx;
        for (pos, &f) in traced.iter().enumerate().rev() {
            let d = tr_dims[pos];
            idx += (rem % d) * strides[f];
            rem /= d;
        }
        idx
    };

    let full = rho.matrix();
    let mut out = DMatrix::<Complex64>::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            let mut acc = Complex64::new(0.0, 0.0);
            for t in 0..dt {
                acc += full[(full_index(i, t), full_index(j, t))];
            }
            out[(i, j)] = acc;
        }
    }
    let kept_spaces: Vec<HilbertSpace> = keep_dims
        .iter()
        .map(|&d| HilbertSpace { factors: vec![d] })
        .collect();
    let refs: Vec<&HilbertSpace> = kept_spaces.iter().collect();
    DensityMatrix::new(HilbertSpace::composite(&refs)?, out)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn space(d: usize) -> HilbertSpace {
        HilbertSpace::new(d).unwrap()
    }

    fn max_diff(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> f64 {
        (a - b).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    #[test]
    fn min_eigenvalue_survives_subnormal_entries() {
        let space = HilbertSpace::new(30).unwrap();
        let rho = coherent_state(c64(0.0, 3e-13), &space).unwrap().to_density();
        assert!(rho.matrix().iter().any(|z| z.norm() > 0.0 && z.norm() < f64::MIN_POSITIVE));
        let m = rho.min_eigenvalue();
        assert!(m.is_finite() && m > -1e-15, "{m}");
    }

    #[test]
    fn rejects_tiny_space() {
        assert_eq!(HilbertSpace::new(1), Err(Error::InvalidSpace { dim: 1 }));
        assert_eq!(HilbertSpace::new(0), Err(Error::InvalidSpace { dim: 0 }));
    }

    #[test]
    fn two_level_annihilation() {
        let l = ladder_operators(&space(2)).unwrap();
        let a = l.annihilation.matrix();
        assert_eq!(a[(0, 1)], c64(1.0, 0.0));
        assert_eq!(a[(0, 0)], c64(0.0, 0.0));
        assert_eq!(a[(1, 0)], c64(0.0, 0.0));
        assert_eq!(a[(1, 1)], c64(0.0, 0.0));
    }

    #[test]
    fn commutator_truncation_artifact_on_top_level_only() {
        let d = 7;
        let l = ladder_operators(&space(d)).unwrap();
        let a = l.annihilation.matrix();
        let ad = l.creation.matrix();
        let comm = a * ad - ad * a;
        let mut want = DMatrix::<Complex64>::identity(d, d);
        want[(d - 1, d - 1)] -= c64(d as f64, 0.0);
        assert!(max_diff(&comm, &want) < 1e-12);
    }

    #[test]
    fn number_operator_diagonal() {
        let l = ladder_operators(&space(9)).unwrap();
        let n_from_ladder = l.creation.matrix() * l.annihilation.matrix();
        assert!(max_diff(&n_from_ladder, l.number.matrix()) < 1e-12);
        for n in 0..9 {
            let s = StateVector::basis(&space(9), n).unwrap();
            let e = s.expectation(&l.number).unwrap();
            assert!((e.re - n as f64).abs() < 1e-12);
        }
    }

    #[test]
    fn composite_ladder_rejected() {
        let s = HilbertSpace::composite(&[&space(2), &space(3)]).unwrap();
        assert!(ladder_operators(&s).is_err());
    }

    #[test]
    fn displacement_of_zero_is_identity() {
        let d = displacement_operator(c64(0.0, 0.0), &space(12)).unwrap();
        assert!(max_diff(d.matrix(), &DMatrix::identity(12, 12)) < 1e-15);
    }

    // Oracle: analytic coherent amplitudes e^{-|α|²/2} αⁿ/√n! evaluated via ln-gamma.
    fn analytic_coherent(alpha: Complex64, dim: usize) -> Vec<Complex64> {
        (0..dim)
            .map(|n| {
                let mut log_fact = 0.0;
                for k in 1..=n {
                    log_fact += (k as f64).ln();
                }
                let mag = (-0.5 * alpha.norm_sqr() + n as f64 * alpha.norm().ln() - 0.5 * log_fact).exp();
                let phase = c64(0.0, n as f64 * alpha.arg()).exp();
                if alpha.norm() == 0.0 {
                    if n == 0 { c64(1.0, 0.0) } else { c64(0.0, 0.0) }
                } else {
                    phase * mag
                }
            })
            .collect()
    }

    #[test]
    fn displaced_vacuum_matches_analytic_coherent_amplitudes() {
        for alpha in [c64(0.5, 0.0), c64(1.2, -0.7), c64(0.0, 3.0), c64(-2.5, 2.0)] {
            let dim = recommended_dim(alpha.norm());
            let s = space(dim);
            let d = displacement_operator(alpha, &s).unwrap();
            let displaced = d.apply(&StateVector::basis(&s, 0).unwrap()).unwrap();
            let analytic = analytic_coherent(alpha, dim);
            let err = displaced
                .amplitudes()
                .iter()
                .zip(&analytic)
                .map(|(a, b)| (a - b).norm())
                .fold(0.0, f64::max);
            assert!(err < 1e-8, "alpha={alpha} err={err}");
            let cs = coherent_state(alpha, &s).unwrap();
            assert!((cs.inner(&displaced).unwrap().norm() - 1.0).abs() < 1e-8);
        }
    }

    #[test]
    fn displacement_inverse_on_populated_subspace() {
        let alpha = c64(2.0, 1.0);
        let s = space(recommended_dim(alpha.norm()));
        let dp = displacement_operator(alpha, &s).unwrap();
        let dm = displacement_operator(-alpha, &s).unwrap();
        let prod = dm.matrix() * dp.matrix();
        let limit = (alpha.norm_sqr() + 3.0 * alpha.norm()).floor() as usize;
        for i in 0..=limit {
            for j in 0..=limit {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((prod[(i, j)] - c64(want, 0.0)).norm() < 1e-8, "({i},{j})");
            }
        }
    }

    #[test]
    fn displacement_unitary_away_from_truncation_edge() {
        let alpha = c64(-1.5, 0.8);
        let s = space(recommended_dim(alpha.norm()));
        let d = displacement_operator(alpha, &s).unwrap();
        let u = d.matrix();
        let gram = u.adjoint() * u;
        let keep = s.dim() - (3.0 * alpha.norm()).ceil() as usize;
        for i in 0..keep {
            for j in 0..keep {
                let want = if i == j { 1.0 } else { 0.0 };
                assert!((gram[(i, j)] - c64(want, 0.0)).norm() < 1e-8);
            }
        }
    }

    #[test]
    fn coherent_vacuum_and_mean_occupation() {
        let vac = coherent_state(c64(0.0, 0.0), &space(5)).unwrap();
        assert_eq!(vac, StateVector::basis(&space(5), 0).unwrap());

        let s = space(40);
        let cs = coherent_state(c64(3.0, 0.0), &s).unwrap();
        let n = cs.expectation(&ladder_operators(&s).unwrap().number).unwrap();
        assert!((n.re - 9.0).abs() < 1e-6, "{n}");
        assert!((cs.inner(&cs).unwrap() - c64(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn coherent_overlap_closed_forms() {
        let a = c64(1.3, -0.4);
        assert!((coherent_overlap(a, a) - c64(1.0, 0.0)).norm() < 1e-15);
        let r = 1.7;
        let o = coherent_overlap(c64(r, 0.0), c64(-r, 0.0));
        assert!((o.re - (-2.0 * r * r).exp()).abs() < 1e-15 && o.im.abs() < 1e-15);
        // β = −ᾱ gives exp{−(|α|² + ᾱ²)}
        let b = -a.conj();
        let want = (-(a.norm_sqr() + a.conj() * a.conj())).exp();
        assert!((coherent_overlap(a, b) - want).norm() < 1e-14);
    }

    #[test]
    fn embedding_identities_is_identity() {
        let i2 = OperatorMatrix::identity(&space(2));
        let i3 = OperatorMatrix::identity(&space(3));
        let e = tensor_embed(&[&i2, &i3]).unwrap();
        assert_eq!(e.space().factors(), &[2, 3]);
        assert!(max_diff(e.matrix(), &DMatrix::identity(6, 6)) == 0.0);
    }

    #[test]
    fn embed_at_matches_kronecker() {
        let comp = HilbertSpace::composite(&[&space(2), &space(3), &space(2)]).unwrap();
        let a = ladder_operators(&space(3)).unwrap().annihilation;
        let placed = embed_at(&a, 1, &comp).unwrap();
        let i2 = OperatorMatrix::identity(&space(2));
        let direct = tensor_embed(&[&i2, &a, &i2]).unwrap();
        assert_eq!(placed.matrix(), direct.matrix());
        assert!(embed_at(&a, 0, &comp).is_err());
    }

    #[test]
    fn partial_trace_of_product_recovers_factors() {
        let a = coherent_state(c64(0.6, 0.2), &space(4)).unwrap().to_density();
        let b = coherent_state(c64(-0.3, 0.9), &space(3)).unwrap().to_density();
        let q = StateVector::from_amplitudes(
            space(2),
            DVector::from_vec(vec![c64(0.6, 0.0), c64(0.0, 0.8)]),
        )
        .unwrap()
        .to_density();
        let prod = tensor_density(&[&a, &q, &b]).unwrap();
        let ra = prod.partial_trace(&[0]).unwrap();
        let rq = prod.partial_trace(&[1]).unwrap();
        let rb = prod.partial_trace(&[2]).unwrap();
        let rab = prod.partial_trace(&[0, 2]).unwrap();
        let ab = tensor_density(&[&a, &b]).unwrap();
        assert!(max_diff(ra.matrix(), a.matrix()) < 1e-12);
        assert!(max_diff(rq.matrix(), q.matrix()) < 1e-12);
        assert!(max_diff(rb.matrix(), b.matrix()) < 1e-12);
        assert!(max_diff(rab.matrix(), ab.matrix()) < 1e-12);
    }

    #[test]
    fn diagnostics_of_pure_state() {
        let rho = coherent_state(c64(1.0, 1.0), &space(20)).unwrap().to_density();
        let d = rho.diagnostics();
        assert!(d.is_physical(), "{d:?}");
    }
}
