//! Full Jaynes–Cummings drive stage: qubits exchange excitations with the
//! cavity instead of only pulling its frequency.
//!
//! Each qubit sits below the cavity at `ω_Qₖ = ω_C − Δₖ` with `Δₖ > 0`. In
//! the dispersive limit a qubit in its ground state pulls the cavity by
//! `+gₖ²/Δₖ`, so bit `1` of a register label is the qubit ground state and
//! bit `0` the excited state. The Hamiltonian is written in the frame
//! rotating at `ω_C` for every excitation:
//! `H = Σ (ω_Qₖ − ω_C) |e⟩⟨e|ₖ + Σ gₖ (σ⁺ₖ a + σ⁻ₖ a†) + c(t) a + c̄(t) a†`.
//!
//! A bare product state `|q⟩ ⊗ |0⟩` is not stationary: an excited qubit
//! starts to leak into the cavity as soon as the evolution begins. In the
//! default [`Frame::Dressed`] the run starts from `e^{−S}|q, 0⟩` and photons
//! are counted after undoing the same rotation, where
//! `S = Σ λₖ (a σ⁺ₖ − a† σ⁻ₖ)` with `λₖ = −gₖ/Δₖ` removes the exchange term
//! to first order.

use std::f64::consts::PI;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::fock::{
    c64, embed_at, ladder_operators, partial_trace, recommended_dim, DensityMatrix, HilbertSpace, OperatorMatrix,
    StateVector,
};
use crate::jpm::{contrast_curve, detection_probability_from_state, JpmParams, MeasurementCurve};
use crate::lindblad::{evolve_pure, DriveTerm, EvolveOptions, Hamiltonian};
use crate::protocol::{drive_amplitude_at, drive_coefficient, DrivePulse, Parity, QubitRegister};

/// Cavity–qubit detuning used when none is given: `2π · 1 GHz`.
pub const DEFAULT_DETUNING: f64 = 2.0 * PI * 1e9;

/// Largest cavity truncation accepted for the joint space.
pub const MAX_CAVITY_DIM: usize = 40;

/// Integrator tolerance for the joint Schrödinger runs.
pub const JC_TOL: f64 = 1e-11;

const BIT_EXCITED: usize = 0;
const BIT_GROUND: usize = 1;

#[derive(Clone, Debug, PartialEq)]
pub struct JcModel {
    omega_c: f64,
    omega_q: Vec<f64>,
    g: Vec<f64>,
    cavity_dim: usize,
}

impl JcModel {
    pub fn new(omega_c: f64, omega_q: Vec<f64>, g: Vec<f64>, cavity_dim: usize) -> Result<Self> {
        if omega_q.is_empty() || omega_q.len() > 4 {
            return Err(Error::InvalidParameter(format!(
                "1 to 4 qubits supported, got {}",
                omega_q.len()
            )));
        }
        if g.len() != omega_q.len() {
            return Err(Error::DimensionMismatch {
                expected: omega_q.len(),
                found: g.len(),
            });
        }
        if !omega_c.is_finite() || omega_q.iter().chain(&g).any(|x| !x.is_finite()) {
            return Err(Error::InvalidParameter("non-finite JC parameter".into()));
        }
        if cavity_dim < 2 {
            return Err(Error::InvalidSpace { dim: cavity_dim });
        }
        if cavity_dim > MAX_CAVITY_DIM {
            return Err(Error::TooLarge {
                dim: cavity_dim,
                max: MAX_CAVITY_DIM,
            });
        }
        Ok(Self {
            omega_c,
            omega_q,
            g,
            cavity_dim,
        })
    }

    pub fn n_qubits(&self) -> usize {
        self.omega_q.len()
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    pub fn omega_q(&self) -> &[f64] {
        &self.omega_q
    }

    pub fn g(&self) -> &[f64] {
        &self.g
    }

    pub fn cavity_dim(&self) -> usize {
        self.cavity_dim
    }

    pub fn n_states(&self) -> usize {
        1 << self.n_qubits()
    }

    /// `ω_C − ω_Qₖ`
    pub fn detuning(&self, k: usize) -> f64 {
        self.omega_c - self.omega_q[k]
    }

    /// `gₖ²/(ω_C − ω_Qₖ)`; infinite on resonance.
    pub fn dispersive_chi(&self, k: usize) -> f64 {
        self.g[k] * self.g[k] / self.detuning(k)
    }

    /// Dispersive cavity pull of a basis state, `Σ sₖ gₖ²/Δₖ`.
    pub fn dispersive_shift(&self, index: usize) -> f64 {
        (0..self.n_qubits())
            .map(|k| self.spin(index, k) * self.dispersive_chi(k))
            .sum()
    }

    pub fn label(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.n_qubits())
    }

    fn spin(&self, index: usize, k: usize) -> f64 {
        if self.bit(index, k) == BIT_GROUND {
            1.0
        } else {
            -1.0
        }
    }

    fn bit(&self, index: usize, k: usize) -> usize {
        (index >> (self.n_qubits() - 1 - k)) & 1
    }

    /// Bare energy of basis state `index` in the rotating frame.
    fn bare_energy(&self, index: usize) -> f64 {
        (0..self.n_qubits())
            .filter(|&k| self.bit(index, k) == BIT_EXCITED)
            .map(|k| -self.detuning(k))
            .sum()
    }

    /// `qubit₁ ⊗ … ⊗ qubit_N ⊗ cavity`.
    pub fn space(&self) -> Result<HilbertSpace> {
        let q = HilbertSpace::new(2)?;
        let c = HilbertSpace::new(self.cavity_dim)?;
        let mut parts: Vec<&HilbertSpace> = vec![&q; self.n_qubits()];
        parts.push(&c);
        HilbertSpace::composite(&parts)
    }

    /// Drive-free Hamiltonian in the frame rotating at `ω_C`.
    pub fn static_hamiltonian(&self) -> Result<OperatorMatrix> {
        let ops = JointOps::new(self)?;
        let mut h = OperatorMatrix::zeros(&ops.space);
        for k in 0..self.n_qubits() {
            let excited = embed_at(&ops.qubit(BIT_EXCITED, BIT_EXCITED)?, k, &ops.space)?;
            let sigma_plus = embed_at(&ops.qubit(BIT_EXCITED, BIT_GROUND)?, k, &ops.space)?;
            let exchange = sigma_plus.mul(&ops.a)?;
            h = h
                .add(&excited.scaled(c64(-self.detuning(k), 0.0)))?
                .add(&exchange.add(&exchange.adjoint())?.scaled(c64(self.g[k], 0.0)))?;
        }
        Ok(h)
    }

    /// `a†a + Σ |e⟩⟨e|ₖ`, conserved by the drive-free Hamiltonian.
    pub fn excitation_number(&self) -> Result<OperatorMatrix> {
        let ops = JointOps::new(self)?;
        let mut n = ops.n.clone();
        for k in 0..self.n_qubits() {
            n = n.add(&embed_at(&ops.qubit(BIT_EXCITED, BIT_EXCITED)?, k, &ops.space)?)?;
        }
        Ok(n)
    }

    /// `S = Σ λₖ (a σ⁺ₖ − a† σ⁻ₖ)`, `λₖ = −gₖ/Δₖ`; `e^{−S}` maps bare product
    /// states onto the dressed eigenstates to first order in `λ`.
    pub fn dressing_generator(&self) -> Result<OperatorMatrix> {
        let ops = JointOps::new(self)?;
        let mut s = OperatorMatrix::zeros(&ops.space);
        for k in 0..self.n_qubits() {
            let lambda = -self.g[k] / self.detuning(k);
            let sigma_plus = embed_at(&ops.qubit(BIT_EXCITED, BIT_GROUND)?, k, &ops.space)?;
            let term = ops.a.mul(&sigma_plus)?;
            s = s.add(&term.sub(&term.adjoint())?.scaled(c64(lambda, 0.0)))?;
        }
        Ok(s)
    }

    /// `e^{S}`; bare-frame states are mapped to the dressed frame by this unitary.
    pub fn dressing_unitary(&self) -> Result<OperatorMatrix> {
        let s = self.dressing_generator()?;
        OperatorMatrix::new(s.space().clone(), expm(s.matrix()))
    }

    /// Basis states whose cavity dynamics are identical because a qubit
    /// permutation maps one onto the other and leaves the model unchanged.
    /// Returns `(representative, members)` in ascending order.
    pub fn equivalence_classes(&self) -> Vec<(usize, Vec<usize>)> {
        let key = |index: usize| {
            let mut k: Vec<(usize, u64, u64)> = (0..self.n_qubits())
                .map(|q| (self.bit(index, q), self.omega_q[q].to_bits(), self.g[q].to_bits()))
                .collect();
            k.sort_unstable();
            k
        };
        let mut classes: Vec<(Vec<(usize, u64, u64)>, Vec<usize>)> = Vec::new();
        for i in 0..self.n_states() {
            let k = key(i);
            match classes.iter_mut().find(|(ck, _)| *ck == k) {
                Some((_, members)) => members.push(i),
                None => classes.push((k, vec![i])),
            }
        }
        classes.into_iter().map(|(_, m)| (m[0], m)).collect()
    }

    /// Qubit-basis state `index` with the cavity in vacuum.
    pub fn initial_state(&self, index: usize) -> Result<StateVector> {
        if index >= self.n_states() {
            return Err(Error::InvalidParameter(format!(
                "basis index {index} out of range for {} qubits",
                self.n_qubits()
            )));
        }
        StateVector::basis(&self.space()?, index * self.cavity_dim)
    }
}

struct JointOps {
    space: HilbertSpace,
    qubit_space: HilbertSpace,
    a: OperatorMatrix,
    n: OperatorMatrix,
}

impl JointOps {
    fn new(model: &JcModel) -> Result<Self> {
        let space = model.space()?;
        let cavity = HilbertSpace::new(model.cavity_dim)?;
        let l = ladder_operators(&cavity)?;
        let pos = model.n_qubits();
        Ok(Self {
            a: embed_at(&l.annihilation, pos, &space)?,
            n: embed_at(&l.number, pos, &space)?,
            qubit_space: HilbertSpace::new(2)?,
            space,
        })
    }

    fn qubit(&self, i: usize, j: usize) -> Result<OperatorMatrix> {
        OperatorMatrix::transition(&self.qubit_space, i, j)
    }
}

/// Places every qubit `Δ` below the cavity with `gₖ = √(χₖ Δ)`, so that
/// `gₖ²/Δ` reproduces the register's `χₖ = χ + εₖ`.
pub fn build_jc_model(register: &QubitRegister, detuning: f64, cavity_dim: usize) -> Result<JcModel> {
    if detuning == 0.0 || !detuning.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "cavity-qubit detuning must be finite and nonzero, got {detuning}"
        )));
    }
    let n = register.n_qubits();
    let mut g = Vec::with_capacity(n);
    for k in 0..n {
        let chi_k = register.chi_k(k);
        if chi_k * detuning <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "χ_{} = {chi_k:e} and detuning {detuning:e} must share a sign",
                k + 1
            )));
        }
        g.push((chi_k * detuning).sqrt());
    }
    let omega_q = vec![register.omega_c() - detuning; n];
    JcModel::new(register.omega_c(), omega_q, g, cavity_dim)
}

/// Whether initial states and photon counts refer to bare or dressed
/// excitations.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Frame {
    #[default]
    Dressed,
    Bare,
}

impl Frame {
    pub fn as_str(self) -> &'static str {
        match self {
            Frame::Dressed => "dressed",
            Frame::Bare => "bare",
        }
    }
}

#[derive(Clone, Debug)]
pub struct JcTrajectory {
    pub index: usize,
    pub label: String,
    pub parity: Parity,
    pub times: Vec<f64>,
    /// `⟨a†a⟩` at each time.
    pub occupations: Vec<f64>,
    /// Reduced cavity state at the last time.
    pub final_cavity: DensityMatrix,
    pub max_norm_error: f64,
}

#[derive(Clone, Debug)]
pub struct JcDriveResult {
    pub trajectories: Vec<JcTrajectory>,
}

impl JcDriveResult {
    pub fn get(&self, label: &str) -> Option<&JcTrajectory> {
        self.trajectories.iter().find(|t| t.label == label)
    }

    pub fn max_norm_error(&self) -> f64 {
        self.trajectories.iter().map(|t| t.max_norm_error).fold(0.0, f64::max)
    }
}

/// Drives each listed basis state from cavity vacuum and records the cavity
/// occupation on `t_grid`. The states evolve independently in parallel.
pub fn jc_drive_evolution(
    model: &JcModel,
    pulse: &DrivePulse,
    indices: &[usize],
    t_grid: &[f64],
    frame: Frame,
) -> Result<JcDriveResult> {
    if t_grid.is_empty() {
        return Err(Error::InvalidParameter("empty time grid".into()));
    }
    warn_cavity_truncation(model, pulse);
    let ops = JointOps::new(model)?;
    let base = model.static_hamiltonian()?;
    let coeff = drive_coefficient(pulse, model.omega_c);
    let drive = DriveTerm::hermitian_pair(ops.a.clone(), coeff).to_vec();
    let dressing = match frame {
        Frame::Dressed => Some(model.dressing_unitary()?),
        Frame::Bare => None,
    };
    let to_frame = |psi: &StateVector| -> Result<StateVector> {
        match &dressing {
            Some(u) => u.apply(psi),
            None => Ok(psi.clone()),
        }
    };
    let trajectories = indices
        .par_iter()
        .map(|&index| {
            let bare = model.initial_state(index)?;
            let psi0 = match &dressing {
                Some(u) => u.adjoint().apply(&bare)?,
                None => bare,
            };
            // removing the bare energy of the initial qubit configuration
            // keeps the dominant amplitudes slow
            let offset = OperatorMatrix::identity(&ops.space).scaled(c64(-model.bare_energy(index), 0.0));
            let h = Hamiltonian::Driven {
                base: base.add(&offset)?,
                terms: drive.clone(),
            };
            let run = evolve_pure(&h, &psi0, t_grid, JC_TOL)?;
            let framed = run.states.iter().map(&to_frame).collect::<Result<Vec<_>>>()?;
            let occupations = framed
                .iter()
                .map(|s| s.expectation(&ops.n).map(|z| z.re))
                .collect::<Result<Vec<_>>>()?;
            let last = framed.last().expect("non-empty grid").to_density();
            Ok(JcTrajectory {
                index,
                label: model.label(index),
                parity: Parity::of(index),
                times: t_grid.to_vec(),
                occupations,
                final_cavity: partial_trace(&last, &[model.n_qubits()])?,
                max_norm_error: run.max_norm_error,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(JcDriveResult { trajectories })
}

/// Like [`jc_drive_evolution`] over every basis state, but integrates one
/// member per [`JcModel::equivalence_classes`] class and copies the result.
pub fn jc_drive_all(model: &JcModel, pulse: &DrivePulse, t_grid: &[f64], frame: Frame) -> Result<JcDriveResult> {
    let classes = model.equivalence_classes();
    let reps: Vec<usize> = classes.iter().map(|(r, _)| *r).collect();
    let runs = jc_drive_evolution(model, pulse, &reps, t_grid, frame)?;
    let mut trajectories = Vec::with_capacity(model.n_states());
    for ((_, members), run) in classes.iter().zip(&runs.trajectories) {
        for &m in members {
            let mut t = run.clone();
            t.index = m;
            t.label = model.label(m);
            t.parity = Parity::of(m);
            trajectories.push(t);
        }
    }
    trajectories.sort_by_key(|t| t.index);
    Ok(JcDriveResult { trajectories })
}

fn warn_cavity_truncation(model: &JcModel, pulse: &DrivePulse) {
    let peak = (0..model.n_states())
        .map(|i| drive_amplitude_at(model.omega_c + model.dispersive_shift(i), pulse, pulse.t_d).norm())
        .fold(0.0, f64::max);
    let need = recommended_dim(peak);
    if need > model.cavity_dim {
        log::warn!(
            "JC cavity truncation {} below recommended {need} for |alpha| = {peak:.4}",
            model.cavity_dim
        );
    }
}

/// Which even basis state supplies the dark curve.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DarkChoice {
    /// The even state with the largest residual occupation.
    WorstCase,
    State(usize),
}

#[derive(Clone, Debug)]
pub struct JcContrast {
    pub bright_label: String,
    pub bright_detuning: f64,
    pub dark_label: String,
    pub dark_detuning: f64,
    /// Residual cavity occupation of the dark input.
    pub dark_occupation: f64,
    pub bright: MeasurementCurve,
    pub dark: MeasurementCurve,
    pub contrast: MeasurementCurve,
}

impl JcContrast {
    /// Largest contrast at measurement times `≤ t_max`.
    pub fn max_until(&self, t_max: f64) -> Option<(f64, f64)> {
        self.contrast.max_until(t_max)
    }
}

/// Contrast between the weakest odd state and a residual even state after
/// the JC drive stage. The reduced cavity states are handed to the detector
/// model, each at its dispersive detuning from `ω_J`.
pub fn jc_contrast(
    model: &JcModel,
    pulse: &DrivePulse,
    params: &JpmParams,
    dark: DarkChoice,
    frame: Frame,
    measurement_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<JcContrast> {
    if let DarkChoice::State(i) = dark {
        if i >= model.n_states() || Parity::of(i) != Parity::Even {
            return Err(Error::InvalidParameter(format!("dark state {i} is not an even basis state")));
        }
    }
    let drive = jc_drive_all(model, pulse, &[0.0, pulse.t_d], frame)?;
    let final_occ = |t: &JcTrajectory| *t.occupations.last().expect("two-point grid");
    let pick = |parity: Parity, better: fn(f64, f64) -> bool| {
        drive
            .trajectories
            .iter()
            .filter(|t| t.parity == parity)
            .fold(None::<&JcTrajectory>, |best, t| match best {
                Some(b) if !better(final_occ(t), final_occ(b)) => Some(b),
                _ => Some(t),
            })
    };
    let bright_run = pick(Parity::Odd, |a, b| a < b)
        .ok_or_else(|| Error::InvalidParameter("register has no odd states".into()))?;
    let dark_run = match dark {
        DarkChoice::WorstCase => pick(Parity::Even, |a, b| a > b).expect("vacuum-parity state exists"),
        DarkChoice::State(i) => &drive.trajectories[i],
    };
    let detuning_of = |t: &JcTrajectory| model.omega_c + model.dispersive_shift(t.index) - params.omega_j;
    let bright_detuning = detuning_of(bright_run);
    let dark_detuning = detuning_of(dark_run);
    let bright = detection_probability_from_state(
        &bright_run.final_cavity,
        bright_detuning,
        params,
        measurement_grid,
        opts,
    )?;
    let mut dark_curve =
        detection_probability_from_state(&dark_run.final_cavity, dark_detuning, params, measurement_grid, opts)?;
    dark_curve.label = crate::jpm::CurveLabel::Dark;
    let contrast = contrast_curve(&bright, &dark_curve)?;
    Ok(JcContrast {
        bright_label: bright_run.label.clone(),
        bright_detuning,
        dark_label: dark_run.label.clone(),
        dark_detuning,
        dark_occupation: final_occ(dark_run),
        bright,
        dark: dark_curve,
        contrast,
    })
}
