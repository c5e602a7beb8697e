//! Dense Lindblad master-equation and Schrödinger propagation.
//!
//! The density matrix is integrated directly with the adaptive
//! Dormand–Prince scheme from [`crate::ode`]. After every accepted step the
//! state is replaced by its Hermitian part; trace, Hermiticity and the
//! smallest eigenvalue are measured (not enforced) at every stored time.
//!
//! An `evolve` call is single threaded and deterministic: identical inputs
//! give bit-identical output regardless of how many evolutions run in
//! parallel elsewhere.

use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{c64, DensityMatrix, HilbertSpace, OperatorMatrix, StateDiagnostics, StateVector};
use crate::ode::{integrate, OdeOptions, OdeStats};
use crate::sparse::{add_adjoint, adjoint_into, Csr};

pub type Coefficient = Arc<dyn Fn(f64) -> Complex64 + Send + Sync>;
pub type HamiltonianFn = Arc<dyn Fn(f64) -> OperatorMatrix + Send + Sync>;

/// Time-dependent term `c(t) · O` of a Hamiltonian.
#[derive(Clone)]
pub struct DriveTerm {
    pub operator: OperatorMatrix,
    pub coefficient: Coefficient,
}

impl DriveTerm {
    /// `c(t) O + c̄(t) O†`, which is Hermitian for any `c`.
    pub fn hermitian_pair(operator: OperatorMatrix, coefficient: Coefficient) -> [DriveTerm; 2] {
        let conj = {
            let c = coefficient.clone();
            Arc::new(move |t: f64| c(t).conj()) as Coefficient
        };
        [
            DriveTerm {
                operator: operator.adjoint(),
                coefficient: conj,
            },
            DriveTerm {
                operator,
                coefficient,
            },
        ]
    }
}

#[derive(Clone)]
pub enum Hamiltonian {
    Static(OperatorMatrix),
    /// `base + Σ cₖ(t) Oₖ`.
    Driven {
        base: OperatorMatrix,
        terms: Vec<DriveTerm>,
    },
    /// Arbitrary `H(t)`, re-evaluated at every integrator stage.
    Callback { space: HilbertSpace, eval: HamiltonianFn },
}

impl Hamiltonian {
    pub fn space(&self) -> &HilbertSpace {
        match self {
            Hamiltonian::Static(h) => h.space(),
            Hamiltonian::Driven { base, .. } => base.space(),
            Hamiltonian::Callback { space, .. } => space,
        }
    }

    pub fn dim(&self) -> usize {
        self.space().dim()
    }

    pub fn at(&self, t: f64) -> OperatorMatrix {
        match self {
            Hamiltonian::Static(h) => h.clone(),
            Hamiltonian::Driven { base, terms } => {
                let mut m = base.matrix().clone();
                for term in terms {
                    m += term.operator.matrix() * (term.coefficient)(t);
                }
                OperatorMatrix::new(base.space().clone(), m).expect("terms share the base space")
            }
            Hamiltonian::Callback { eval, .. } => eval(t),
        }
    }

    fn check(&self, sample_times: &[f64]) -> Result<()> {
        let dim = self.dim();
        if let Hamiltonian::Driven { terms, .. } = self {
            for term in terms {
                if term.operator.dim() != dim {
                    return Err(Error::DimensionMismatch {
                        expected: dim,
                        found: term.operator.dim(),
                    });
                }
            }
        }
        for &t in sample_times {
            let h = self.at(t);
            if h.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: h.dim(),
                });
            }
            let scale = h.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max);
            let err = h.hermiticity_error();
            if err > 1e-10 * scale {
                return Err(Error::InvariantBreach {
                    kind: "Hamiltonian Hermiticity",
                    time: t,
                    value: err / scale,
                });
            }
        }
        Ok(())
    }
}

/// Hamiltonian plus collapse operators on a common space.
#[derive(Clone)]
pub struct LindbladModel {
    hamiltonian: Hamiltonian,
    collapse_ops: Vec<OperatorMatrix>,
}

impl LindbladModel {
    pub fn new(hamiltonian: Hamiltonian, collapse_ops: Vec<OperatorMatrix>) -> Result<Self> {
        let dim = hamiltonian.dim();
        for l in &collapse_ops {
            if l.dim() != dim {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    found: l.dim(),
                });
            }
        }
        hamiltonian.check(&[0.0])?;
        Ok(Self {
            hamiltonian,
            collapse_ops,
        })
    }

    pub fn hamiltonian(&self) -> &Hamiltonian {
        &self.hamiltonian
    }

    pub fn collapse_ops(&self) -> &[OperatorMatrix] {
        &self.collapse_ops
    }

    pub fn space(&self) -> &HilbertSpace {
        self.hamiltonian.space()
    }

    pub fn dim(&self) -> usize {
        self.hamiltonian.dim()
    }
}

/// Worst invariant violations seen over a set of stored states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Hygiene {
    pub max_trace_error: f64,
    pub max_hermiticity_error: f64,
    pub min_eigenvalue: f64,
    /// Time of the worst eigenvalue (or trace error, when that is the breach).
    pub worst_time: f64,
    pub samples: usize,
}

impl Default for Hygiene {
    fn default() -> Self {
        Self {
            max_trace_error: 0.0,
            max_hermiticity_error: 0.0,
            min_eigenvalue: f64::INFINITY,
            worst_time: 0.0,
            samples: 0,
        }
    }
}

impl Hygiene {
    fn record(&mut self, t: f64, d: &StateDiagnostics) {
        self.samples += 1;
        self.max_trace_error = self.max_trace_error.max(d.trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(d.hermiticity_error);
        if d.min_eigenvalue < self.min_eigenvalue {
            self.min_eigenvalue = d.min_eigenvalue;
            self.worst_time = t;
        }
    }

    pub fn merge(&mut self, other: &Hygiene) {
        self.samples += other.samples;
        self.max_trace_error = self.max_trace_error.max(other.max_trace_error);
        self.max_hermiticity_error = self.max_hermiticity_error.max(other.max_hermiticity_error);
        if other.min_eigenvalue < self.min_eigenvalue {
            self.min_eigenvalue = other.min_eigenvalue;
            self.worst_time = other.worst_time;
        }
    }

    pub fn is_clean(&self) -> bool {
        self.max_trace_error <= StateDiagnostics::TRACE_TOL
            && self.max_hermiticity_error <= StateDiagnostics::HERMITIAN_TOL
            && self.min_eigenvalue >= -StateDiagnostics::POSITIVITY_TOL
    }
}

#[derive(Clone, Copy, Debug)]
pub struct EvolveOptions {
    /// Local error tolerance (absolute and relative) on matrix entries.
    pub tol: f64,
    /// Fail with [`Error::InvariantBreach`] when a stored state is unphysical.
    pub check_invariants: bool,
    pub max_steps: usize,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            tol: 1e-10,
            check_invariants: true,
            max_steps: 20_000_000,
        }
    }
}

impl EvolveOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            tol,
            ..Self::default()
        }
    }
}

#[derive(Clone, Debug)]
pub struct EvolutionResult {
    pub times: Vec<f64>,
    pub states: Vec<DensityMatrix>,
    pub hygiene: Hygiene,
    pub stats: OdeStats,
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    if times[0] < 0.0 || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::InvalidParameter("times must be finite and start at or after 0".into()));
    }
    if times.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::InvalidParameter("times must be strictly increasing".into()));
    }
    Ok(())
}

enum CompiledTerms {
    Fixed(Vec<(Csr, Coefficient)>),
    Callback(HamiltonianFn),
}

/// Sparse form of `−i H_eff ρ + i ρ H_eff† + Σ L ρ L†`.
struct Liouvillian {
    n: usize,
    /// `H_base − (i/2) Σ L†L`
    h_eff: Csr,
    terms: CompiledTerms,
    jumps: Vec<Csr>,
    scratch_adj: Vec<Complex64>,
    scratch_a: Vec<Complex64>,
    scratch_b: Vec<Complex64>,
}

impl Liouvillian {
    fn compile(model: &LindbladModel) -> Self {
        let n = model.dim();
        let mut decay = DMatrix::<Complex64>::zeros(n, n);
        for l in &model.collapse_ops {
            decay += l.matrix().adjoint() * l.matrix();
        }
        let (base, terms) = match &model.hamiltonian {
            Hamiltonian::Static(h) => (h.matrix().clone(), CompiledTerms::Fixed(Vec::new())),
            Hamiltonian::Driven { base, terms } => (
                base.matrix().clone(),
                CompiledTerms::Fixed(
                    terms
                        .iter()
                        .map(|t| (Csr::from_dense(t.operator.matrix()), t.coefficient.clone()))
                        .collect(),
                ),
            ),
            Hamiltonian::Callback { eval, .. } => (DMatrix::zeros(n, n), CompiledTerms::Callback(eval.clone())),
        };
        let h_eff = base - decay * c64(0.0, 0.5);
        let zero = c64(0.0, 0.0);
        Self {
            n,
            h_eff: Csr::from_dense(&h_eff),
            terms,
            jumps: model.collapse_ops.iter().map(|l| Csr::from_dense(l.matrix())).collect(),
            scratch_adj: vec![zero; n * n],
            scratch_a: vec![zero; n * n],
            scratch_b: vec![zero; n * n],
        }
    }

    fn apply_hamiltonian_like(
        op: &Csr,
        coeff: Complex64,
        rho: &[Complex64],
        rho_adj: &[Complex64],
        tmp: &mut [Complex64],
        out: &mut [Complex64],
    ) {
        let n = op.dim();
        // −i c O ρ
        op.mul_add(rho, n, c64(0.0, -1.0) * coeff, out);
        // + i ρ (c O)† = + i c̄ (O ρ†)†
        op.mul_into(rho_adj, n, tmp);
        add_adjoint(tmp, n, c64(0.0, 1.0) * coeff.conj(), out);
    }

    fn rhs(&mut self, t: f64, rho: &[Complex64], out: &mut [Complex64]) {
        let n = self.n;
        let one = c64(1.0, 0.0);
        out.iter_mut().for_each(|z| *z = c64(0.0, 0.0));
        adjoint_into(rho, n, &mut self.scratch_adj);
        Self::apply_hamiltonian_like(&self.h_eff, one, rho, &self.scratch_adj, &mut self.scratch_a, out);
        match &self.terms {
            CompiledTerms::Fixed(terms) => {
                for (op, coeff) in terms {
                    let c = coeff(t);
                    if c.re != 0.0 || c.im != 0.0 {
                        Self::apply_hamiltonian_like(op, c, rho, &self.scratch_adj, &mut self.scratch_a, out);
                    }
                }
            }
            CompiledTerms::Callback(eval) => {
                let h = Csr::from_dense(eval(t).matrix());
                Self::apply_hamiltonian_like(&h, one, rho, &self.scratch_adj, &mut self.scratch_a, out);
            }
        }
        for l in &self.jumps {
            // L ρ L† = L (L ρ†)†
            l.mul_into(&self.scratch_adj, n, &mut self.scratch_a);
            adjoint_into(&self.scratch_a, n, &mut self.scratch_b);
            l.mul_add(&self.scratch_b, n, one, out);
        }
    }
}

fn symmetrize(buf: &mut [Complex64], n: usize) {
    for j in 0..n {
        for i in 0..j {
            let a = buf[i + j * n];
            let b = buf[j + i * n];
            let avg = (a + b.conj()) * 0.5;
            buf[i + j * n] = avg;
            buf[j + i * n] = avg.conj();
        }
        let d = &mut buf[j + j * n];
        d.im = 0.0;
    }
}

/// Integrates the master equation from `t = 0` and stores `ρ` at `times`.
pub fn evolve(
    model: &LindbladModel,
    rho0: &DensityMatrix,
    times: &[f64],
    opts: &EvolveOptions,
) -> Result<EvolutionResult> {
    let n = model.dim();
    if rho0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: rho0.dim(),
        });
    }
    check_times(times)?;
    model.hamiltonian.check(&[times[0], *times.last().unwrap()])?;

    let mut liouvillian = Liouvillian::compile(model);
    let ode_opts = OdeOptions {
        max_steps: opts.max_steps,
        ..OdeOptions::with_tol(opts.tol)
    };
    let (raw, stats) = integrate(
        |t, y, dy| liouvillian.rhs(t, y, dy),
        0.0,
        rho0.matrix().as_slice(),
        times,
        &ode_opts,
        |buf| symmetrize(buf, n),
    )?;

    let mut hygiene = Hygiene::default();
    let mut states = Vec::with_capacity(raw.len());
    for (&t, buf) in times.iter().zip(raw) {
        let rho = DensityMatrix::new(rho0.space().clone(), DMatrix::from_vec(n, n, buf))?;
        let d = rho.diagnostics();
        hygiene.record(t, &d);
        if opts.check_invariants {
            if d.trace_error > StateDiagnostics::TRACE_TOL {
                return Err(Error::InvariantBreach {
                    kind: "trace",
                    time: t,
                    value: d.trace_error,
                });
            }
            if d.hermiticity_error > StateDiagnostics::HERMITIAN_TOL {
                return Err(Error::InvariantBreach {
                    kind: "Hermiticity",
                    time: t,
                    value: d.hermiticity_error,
                });
            }
            if d.min_eigenvalue < -StateDiagnostics::POSITIVITY_TOL {
                return Err(Error::InvariantBreach {
                    kind: "positivity",
                    time: t,
                    value: d.min_eigenvalue,
                });
            }
        }
        states.push(rho);
    }
    Ok(EvolutionResult {
        times: times.to_vec(),
        states,
        hygiene,
        stats,
    })
}

/// `Tr(O ρ(t))` at every stored time.
pub fn expectation_series_complex(result: &EvolutionResult, observable: &OperatorMatrix) -> Result<Vec<Complex64>> {
    result.states.iter().map(|rho| rho.expectation(observable)).collect()
}

/// Real expectation values of a Hermitian observable; fails if an imaginary
/// residue above `1e-8` shows up.
pub fn expectation_series(result: &EvolutionResult, observable: &OperatorMatrix) -> Result<Vec<f64>> {
    if !observable.is_hermitian(1e-12 * observable.matrix().iter().map(|z| z.norm()).fold(1.0, f64::max)) {
        return Err(Error::InvalidParameter(
            "observable is not Hermitian; use expectation_series_complex".into(),
        ));
    }
    let values = expectation_series_complex(result, observable)?;
    let mut out = Vec::with_capacity(values.len());
    for (t, v) in result.times.iter().zip(values) {
        if v.im.abs() > 1e-8 {
            return Err(Error::InvariantBreach {
                kind: "imaginary expectation residue",
                time: *t,
                value: v.im,
            });
        }
        out.push(v.re);
    }
    Ok(out)
}

#[derive(Clone, Debug)]
pub struct PureEvolution {
    pub times: Vec<f64>,
    pub states: Vec<StateVector>,
    /// `max |‖ψ(t)‖ − 1|` over stored times.
    pub max_norm_error: f64,
    pub stats: OdeStats,
}

/// Schrödinger propagation `iψ' = H(t)ψ` from `t = 0`.
pub fn evolve_pure(hamiltonian: &Hamiltonian, psi0: &StateVector, times: &[f64], tol: f64) -> Result<PureEvolution> {
    let n = hamiltonian.dim();
    if psi0.dim() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: psi0.dim(),
        });
    }
    check_times(times)?;
    hamiltonian.check(&[times[0], *times.last().unwrap()])?;

    let minus_i = c64(0.0, -1.0);
    let (base, terms, callback): (Csr, Vec<(Csr, Coefficient)>, Option<HamiltonianFn>) = match hamiltonian {
        Hamiltonian::Static(h) => (Csr::from_dense(h.matrix()), Vec::new(), None),
        Hamiltonian::Driven { base, terms } => (
            Csr::from_dense(base.matrix()),
            terms
                .iter()
                .map(|t| (Csr::from_dense(t.operator.matrix()), t.coefficient.clone()))
                .collect(),
            None,
        ),
        Hamiltonian::Callback { eval, .. } => (Csr::from_dense(&DMatrix::zeros(n, n)), Vec::new(), Some(eval.clone())),
    };
    let rhs = |t: f64, y: &[Complex64], dy: &mut [Complex64]| {
        dy.iter_mut().for_each(|z| *z = c64(0.0, 0.0));
        base.mul_add(y, 1, minus_i, dy);
        for (op, coeff) in &terms {
            let c = coeff(t);
            if c.re != 0.0 || c.im != 0.0 {
                op.mul_add(y, 1, minus_i * c, dy);
            }
        }
        if let Some(eval) = &callback {
            Csr::from_dense(eval(t).matrix()).mul_add(y, 1, minus_i, dy);
        }
    };
    let (raw, stats) = integrate(
        rhs,
        0.0,
        psi0.amplitudes().as_slice(),
        times,
        &OdeOptions::with_tol(tol),
        |_| {},
    )?;
    let mut max_norm_error = 0.0f64;
    let mut states = Vec::with_capacity(raw.len());
    for buf in raw {
        let s = StateVector::from_amplitudes(psi0.space().clone(), DVector::from_vec(buf))?;
        max_norm_error = max_norm_error.max((s.norm() - 1.0).abs());
        states.push(s);
    }
    Ok(PureEvolution {
        times: times.to_vec(),
        states,
        max_norm_error,
        stats,
    })
}

/// Largest space accepted by [`liouvillian_matrix`] / [`steady_state`].
pub const MAX_SUPEROPERATOR_DIM: usize = 40;

/// Column-stacked superoperator of the model at time `t`:
/// `vec(𝓛ρ) = S vec(ρ)` with `vec(AXB) = (Bᵀ ⊗ A) vec(X)`.
pub fn liouvillian_matrix(model: &LindbladModel, t: f64) -> Result<DMatrix<Complex64>> {
    let n = model.dim();
    if n > MAX_SUPEROPERATOR_DIM {
        return Err(Error::TooLarge {
            dim: n,
            max: MAX_SUPEROPERATOR_DIM,
        });
    }
    let id = DMatrix::<Complex64>::identity(n, n);
    let h = model.hamiltonian.at(t).into_matrix();
    let mut s = (id.kronecker(&h) - h.transpose().kronecker(&id)) * c64(0.0, -1.0);
    for l in &model.collapse_ops {
        let lm = l.matrix();
        let ldl = lm.adjoint() * lm;
        s += lm.conjugate().kronecker(lm);
        s -= id.kronecker(&ldl) * c64(0.5, 0.0);
        s -= ldl.transpose().kronecker(&id) * c64(0.5, 0.0);
    }
    Ok(s)
}

/// Stationary state of a time-independent model, by a dense null-space
/// solve with the trace condition replacing one equation.
pub fn steady_state(model: &LindbladModel) -> Result<DensityMatrix> {
    if !matches!(model.hamiltonian, Hamiltonian::Static(_)) {
        return Err(Error::InvalidParameter("steady state needs a static Hamiltonian".into()));
    }
    let n = model.dim();
    let mut s = liouvillian_matrix(model, 0.0)?;
    let mut rhs = DVector::<Complex64>::zeros(n * n);
    for j in 0..n * n {
        s[(0, j)] = c64(0.0, 0.0);
    }
    for i in 0..n {
        s[(0, i + i * n)] = c64(1.0, 0.0);
    }
    rhs[0] = c64(1.0, 0.0);
    let x = s
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Undefined("Liouvillian has no unique steady state".into()))?;
    let mut m = DMatrix::from_vec(n, n, x.as_slice().to_vec());
    let buf = m.as_mut_slice();
    symmetrize(buf, n);
    DensityMatrix::new(model.space().clone(), m)
}
