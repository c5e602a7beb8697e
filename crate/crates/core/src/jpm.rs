//! Josephson photomultiplier readout: a three-level absorber coupled to the
//! cavity, counted by the population of its "measured" level.
//!
//! The joint space is `cavity ⊗ JPM` with JPM levels `0` (ground),
//! `1` (excited) and `2` (measured). The model runs in the frame rotating at
//! the detector frequency, so the cavity enters only through its detuning
//! `ω̃_C − ω_J`. Rates `γ` are plain inverse seconds; `g_j` is angular.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    c64, coherent_state, displacement_operator, embed_at, ladder_operators, recommended_dim, tensor_density,
    DensityMatrix, HilbertSpace, OperatorMatrix, StateVector,
};
use crate::lindblad::{evolve, expectation_series, EvolveOptions, Hamiltonian, Hygiene, LindbladModel};

pub const JPM_GROUND: usize = 0;
pub const JPM_EXCITED: usize = 1;
pub const JPM_MEASURED: usize = 2;

/// Largest joint dimension accepted by [`build_measurement_model`].
pub const MAX_MODEL_DIM: usize = 5000;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct JpmParams {
    pub omega_j: f64,
    pub g_j: f64,
    pub gamma_j: f64,
    pub gamma_r: f64,
    pub gamma_d: f64,
    /// Energy of the measured level; it does not affect any population.
    pub measured_level_energy: f64,
}

impl JpmParams {
    /// `γ_J = γ_R = 2·10⁸ s⁻¹`, `γ_D = 10⁶ s⁻¹`, `g_J = 2π · 50 MHz`.
    pub fn baseline(omega_j: f64) -> Self {
        Self {
            omega_j,
            g_j: 2.0 * PI * 50e6,
            gamma_j: 2e8,
            gamma_r: 2e8,
            gamma_d: 1e6,
            measured_level_energy: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        let rates = [self.g_j, self.gamma_j, self.gamma_r, self.gamma_d];
        if rates.iter().any(|r| !(*r >= 0.0) || !r.is_finite()) {
            return Err(Error::InvalidParameter(
                "JPM coupling and rates must be finite and non-negative".into(),
            ));
        }
        if !self.omega_j.is_finite() || !self.measured_level_energy.is_finite() {
            return Err(Error::InvalidParameter("non-finite JPM frequency".into()));
        }
        Ok(())
    }

    /// `γ_J / (γ_J + γ_R)`, the chance an excitation is counted rather than lost.
    pub fn branching_ratio(&self) -> f64 {
        let total = self.gamma_j + self.gamma_r;
        if total == 0.0 {
            0.0
        } else {
            self.gamma_j / total
        }
    }
}

pub fn jpm_space() -> HilbertSpace {
    HilbertSpace::new(3).expect("three levels")
}

/// `H = Δ a†a + g (a σ⁺ + a† σ⁻) + E_m |m⟩⟨m|` with `Δ = ω̃_C − ω_J`,
/// `σ⁺ = |1⟩⟨0|`, and collapse operators `√γ_J |m⟩⟨1|`, `√γ_R |0⟩⟨1|`,
/// `√γ_D |m⟩⟨0|`.
pub fn build_measurement_model(detuning: f64, params: &JpmParams, cavity_space: &HilbertSpace) -> Result<LindbladModel> {
    params.validate()?;
    if !detuning.is_finite() {
        return Err(Error::InvalidParameter("non-finite detuning".into()));
    }
    let j = jpm_space();
    let joint = HilbertSpace::composite(&[cavity_space, &j])?;
    if joint.dim() > MAX_MODEL_DIM {
        return Err(Error::TooLarge {
            dim: joint.dim(),
            max: MAX_MODEL_DIM,
        });
    }
    let l = ladder_operators(cavity_space)?;
    let a = embed_at(&l.annihilation, 0, &joint)?;
    let n = embed_at(&l.number, 0, &joint)?;
    let jpm_op = |i: usize, k: usize| -> Result<OperatorMatrix> { embed_at(&OperatorMatrix::transition(&j, i, k)?, 1, &joint) };
    let sigma_plus = jpm_op(JPM_EXCITED, JPM_GROUND)?;
    let coupling = a.mul(&sigma_plus)?;
    let h = n
        .scaled(c64(detuning, 0.0))
        .add(&coupling.add(&coupling.adjoint())?.scaled(c64(params.g_j, 0.0)))?
        .add(&jpm_op(JPM_MEASURED, JPM_MEASURED)?.scaled(c64(params.measured_level_energy, 0.0)))?;
    let collapse = vec![
        jpm_op(JPM_MEASURED, JPM_EXCITED)?.scaled(c64(params.gamma_j.sqrt(), 0.0)),
        jpm_op(JPM_GROUND, JPM_EXCITED)?.scaled(c64(params.gamma_r.sqrt(), 0.0)),
        jpm_op(JPM_MEASURED, JPM_GROUND)?.scaled(c64(params.gamma_d.sqrt(), 0.0)),
    ];
    LindbladModel::new(Hamiltonian::Static(h), collapse)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum CurveLabel {
    Bright,
    Dark,
    Contrast,
}

#[derive(Clone, Debug, PartialEq)]
pub struct MeasurementCurve {
    pub label: CurveLabel,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    /// Integrator invariants over the run that produced the curve.
    pub hygiene: Hygiene,
}

impl MeasurementCurve {
    pub fn max(&self) -> f64 {
        self.values.iter().copied().fold(f64::NEG_INFINITY, f64::max)
    }

    /// Largest value among times `≤ t_max`, with the time it occurs.
    pub fn max_until(&self, t_max: f64) -> Option<(f64, f64)> {
        self.times
            .iter()
            .zip(&self.values)
            .filter(|(t, _)| **t <= t_max)
            .fold(None, |best: Option<(f64, f64)>, (&t, &v)| match best {
                Some((_, bv)) if bv >= v => best,
                _ => Some((t, v)),
            })
    }

    pub fn is_non_decreasing(&self, tol: f64) -> bool {
        self.values.windows(2).all(|w| w[1] >= w[0] - tol)
    }
}

/// Click probability versus time for the cavity starting in `rho_cavity`
/// and the JPM in its ground state.
pub fn detection_probability_from_state(
    rho_cavity: &DensityMatrix,
    detuning: f64,
    params: &JpmParams,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<MeasurementCurve> {
    let model = build_measurement_model(detuning, params, rho_cavity.space())?;
    let ground = StateVector::basis(&jpm_space(), JPM_GROUND)?.to_density();
    let rho0 = tensor_density(&[rho_cavity, &ground])?;
    let result = evolve(&model, &rho0, t_grid, opts)?;
    let measured = embed_at(
        &OperatorMatrix::transition(&jpm_space(), JPM_MEASURED, JPM_MEASURED)?,
        1,
        model.space(),
    )?;
    let values = expectation_series(&result, &measured)?;
    Ok(MeasurementCurve {
        label: CurveLabel::Bright,
        times: t_grid.to_vec(),
        values,
        hygiene: result.hygiene,
    })
}

/// Click probability for a coherent input `|α_in⟩`; labelled dark when
/// `α_in = 0`.
pub fn detection_probability(
    alpha_in: Complex64,
    detuning: f64,
    params: &JpmParams,
    cavity_space: &HilbertSpace,
    t_grid: &[f64],
    opts: &EvolveOptions,
) -> Result<MeasurementCurve> {
    let rho = coherent_state(alpha_in, cavity_space)?.to_density();
    let mut curve = detection_probability_from_state(&rho, detuning, params, t_grid, opts)?;
    if alpha_in.norm() == 0.0 {
        curve.label = CurveLabel::Dark;
    }
    Ok(curve)
}

/// `C(t) = P_bright(t) − P_dark(t)`.
pub fn contrast_curve(bright: &MeasurementCurve, dark: &MeasurementCurve) -> Result<MeasurementCurve> {
    if bright.times != dark.times {
        return Err(Error::GridMismatch);
    }
    let mut hygiene = bright.hygiene;
    hygiene.merge(&dark.hygiene);
    Ok(MeasurementCurve {
        label: CurveLabel::Contrast,
        times: bright.times.clone(),
        values: bright.values.iter().zip(&dark.values).map(|(b, d)| b - d).collect(),
        hygiene,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct AnalyticDetection {
    /// `1 − e^{−|α|²}`
    pub ideal: f64,
    /// `1 − exp(−|α|² γ_J/(γ_J + γ_R))`
    pub relaxed: f64,
}

pub fn analytic_detection_probability(alpha: Complex64, params: &JpmParams) -> AnalyticDetection {
    let n = alpha.norm_sqr();
    AnalyticDetection {
        ideal: -(-n).exp_m1(),
        relaxed: -(-n * params.branching_ratio()).exp_m1(),
    }
}

/// `Ŝᵏ|α⟩` normalized, with `Ŝ|n⟩ = |n − 1⟩` and `Ŝ|0⟩ = 0`.
pub fn post_click_state(alpha_in: Complex64, photons_removed: usize, space: &HilbertSpace) -> Result<StateVector> {
    if photons_removed == 0 {
        return Err(Error::InvalidParameter("at least one photon must be removed".into()));
    }
    let psi = coherent_state(alpha_in, space)?;
    subtract_photons(&psi, photons_removed)
}

/// Applies `Ŝᵏ` to any single-mode state and normalizes.
pub fn subtract_photons(state: &StateVector, k: usize) -> Result<StateVector> {
    let d = state.dim();
    let amps = state.amplitudes();
    let shifted = nalgebra::DVector::from_fn(d, |n, _| if n + k < d { amps[n + k] } else { c64(0.0, 0.0) });
    StateVector::from_amplitudes(state.space().clone(), shifted)?
        .normalized()
        .map_err(|_| Error::EmptyState(format!("no population above {} photons to remove", k - 1)))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ResetSpec {
    pub alpha_m: Complex64,
}

impl ResetSpec {
    pub fn new(alpha_m: Complex64) -> Result<Self> {
        if !alpha_m.re.is_finite() || !alpha_m.im.is_finite() {
            return Err(Error::InvalidParameter("non-finite reset amplitude".into()));
        }
        Ok(Self { alpha_m })
    }

    /// Reset to the mean field `⟨a⟩` of `state`.
    pub fn mean_field(state: &StateVector) -> Result<Self> {
        let a = ladder_operators(state.space())?.annihilation;
        Self::new(state.expectation(&a)?)
    }
}

/// `D(−α_M)|ψ⟩`.
pub fn apply_reset(state: &StateVector, reset: &ResetSpec) -> Result<StateVector> {
    displacement_operator(-reset.alpha_m, state.space())?.apply(state)
}

/// Fock dimension leaving room for a reset displacement after photon
/// subtraction from `|α|`.
pub fn reset_space_dim(abs_alpha: f64) -> usize {
    recommended_dim(abs_alpha) + (4.0 * abs_alpha).ceil() as usize + 10
}
