//! Dispersive-shift mismatch: how unequal `χₖ` leak parity-subspace
//! information into the cavity, and what that costs in coherence and in
//! measurement basis.
//!
//! Two-qubit results use the pairs `{00, 11}` (even) and `{01, 10}` (odd)
//! with qubit 2 mismatched by `ε`, driven by a single tone at `ω_C` for
//! `t = π/χ`. With `θ = πε/χ` the amplitudes are
//! `α₀₁ = −(a0/2ε)(e^{iθ} − 1)`, `α₁₀ = −ᾱ₀₁`,
//! `α₀₀ = (a0/(2(2χ+ε)))(e^{−iθ} − 1)`, `α₁₁ = −ᾱ₀₀`.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{c64, coherent_overlap};
use crate::jpm::{analytic_detection_probability, JpmParams};
use crate::protocol::{drive_outcome, DriveOutcome, DrivePulse, Parity, QubitRegister};

#[derive(Clone, Debug, PartialEq)]
pub struct MismatchScenario {
    pub register: QubitRegister,
    pub pulse: DrivePulse,
    pub outcome: DriveOutcome,
}

impl MismatchScenario {
    pub fn amplitude(&self, label: &str) -> Result<Complex64> {
        self.outcome
            .amplitude(label)
            .ok_or_else(|| Error::InvalidParameter(format!("no basis state {label:?}")))
    }

    pub fn epsilon_over_chi(&self) -> f64 {
        self.register.epsilons().iter().fold(0.0f64, |m, e| m.max(e.abs())) / self.register.chi()
    }
}

/// Closed-form amplitudes of every basis state under `pulse`. A two-qubit
/// register driven by one phase-0 tone at `ω_C` for `π/χ` uses the explicit
/// expressions of [`two_qubit_amplitudes`], which vanish exactly for `ε = 0`.
pub fn mismatch_amplitudes(register: &QubitRegister, pulse: &DrivePulse) -> MismatchScenario {
    let mut outcome = drive_outcome(register, pulse);
    let canonical = register.n_qubits() == 2
        && pulse.tones.len() == 1
        && pulse.tones[0].omega == register.omega_c()
        && pulse.tones[0].phase == 0.0
        && pulse.t_d == PI / register.chi();
    if canonical {
        outcome.amplitudes = two_qubit_amplitudes(pulse.a0, register.chi(), register.epsilons()[1]).to_vec();
    }
    MismatchScenario {
        register: register.clone(),
        pulse: pulse.clone(),
        outcome,
    }
}

/// Two-qubit register with qubit 2 mismatched by `ε`.
pub fn two_qubit_register(chi: f64, epsilon: f64, omega_c: f64) -> Result<QubitRegister> {
    QubitRegister::new(2, chi, vec![0.0, epsilon], omega_c)
}

/// Four-qubit register with the proportional mismatch pattern
/// `(0, ε, ε/2, −ε/2)`.
pub fn four_qubit_register(chi: f64, epsilon: f64, omega_c: f64) -> Result<QubitRegister> {
    QubitRegister::new(4, chi, vec![0.0, epsilon, 0.5 * epsilon, -0.5 * epsilon], omega_c)
}

pub const FOUR_QUBIT_PATTERN: &str = "(0, eps, eps/2, -eps/2)";

/// `[α₀₀, α₀₁, α₁₀, α₁₁]` from the explicit two-qubit expressions.
pub fn two_qubit_amplitudes(a0: f64, chi: f64, epsilon: f64) -> [Complex64; 4] {
    let theta = PI * epsilon / chi;
    let a01 = if epsilon == 0.0 {
        c64(0.0, -0.5 * a0 * PI / chi)
    } else {
        -(c64(0.0, theta).exp() - 1.0) * (a0 / (2.0 * epsilon))
    };
    let a00 = (c64(0.0, -theta).exp() - 1.0) * (a0 / (2.0 * (2.0 * chi + epsilon)));
    [a00, a01, -a01.conj(), -a00.conj()]
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OccupationReport {
    pub odd_exact: f64,
    /// `(a0/2)²(π/χ)²(1 − θ²/12)`
    pub odd_series: f64,
    pub odd_rel_error: f64,
    pub even_exact: f64,
    /// Leading term `(a0/(4χ))² θ²`; its relative error is `O(ε/χ)`.
    pub even_series: f64,
    pub even_rel_error: f64,
}

fn rel_error(series: f64, exact: f64) -> f64 {
    (series - exact).abs() / exact.abs().max(1e-15)
}

/// Exact and series occupations of the two-qubit odd (`01`) and even
/// (`00`) states.
pub fn occupation_expansions(scenario: &MismatchScenario) -> Result<OccupationReport> {
    let r = &scenario.register;
    if r.n_qubits() != 2 {
        return Err(Error::InvalidParameter("occupation series are two-qubit results".into()));
    }
    let chi = r.chi();
    let a0 = scenario.pulse.a0;
    let theta = PI * r.epsilons()[1] / chi;
    let odd_exact = scenario.amplitude("01")?.norm_sqr();
    let even_exact = scenario.amplitude("00")?.norm_sqr();
    let odd_series = (0.5 * a0 * PI / chi).powi(2) * (1.0 - theta * theta / 12.0);
    let even_series = (a0 / (4.0 * chi)).powi(2) * theta * theta;
    Ok(OccupationReport {
        odd_exact,
        odd_series,
        odd_rel_error: rel_error(odd_series, odd_exact),
        even_exact,
        even_series,
        even_rel_error: rel_error(even_series, even_exact),
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceReport {
    /// `D = ⟨α_b|α_a⟩`
    pub d: Complex64,
    pub magnitude: f64,
    pub phase: f64,
    /// Exact `−ln D = |α|² + ᾱ²` for the pair.
    pub neg_log_exact: Complex64,
    /// Leading-order `−ln D`: `B²(θ²/2 + iθ)` (odd) or `A²(θ⁴/2 − iθ³)` (even).
    pub neg_log_series: Complex64,
}

/// Decoherence factor between two basis states after the drive.
pub fn pair_decoherence(scenario: &MismatchScenario, label_a: &str, label_b: &str) -> Result<Complex64> {
    Ok(coherent_overlap(scenario.amplitude(label_b)?, scenario.amplitude(label_a)?))
}

/// Two-qubit intra-subspace decoherence: `D = ⟨α₀₁|α₁₀⟩` (odd) or
/// `⟨α₀₀|α₁₁⟩` (even).
pub fn intra_subspace_decoherence(scenario: &MismatchScenario, parity: Parity) -> Result<CoherenceReport> {
    let r = &scenario.register;
    if r.n_qubits() != 2 {
        return Err(Error::InvalidParameter("intra-subspace pairs are two-qubit results".into()));
    }
    let chi = r.chi();
    let eps = r.epsilons()[1];
    let theta = PI * eps / chi;
    let a0 = scenario.pulse.a0;
    let (a, b, lead, series) = match parity {
        Parity::Odd => {
            let b2 = (0.5 * a0 * PI / chi).powi(2);
            ("10", "01", "01", c64(0.5 * theta * theta, theta) * b2)
        }
        Parity::Even => {
            let amp2 = (a0 / (2.0 * (2.0 * chi + eps))).powi(2);
            ("11", "00", "00", c64(0.5 * theta.powi(4), -theta.powi(3)) * amp2)
        }
    };
    let d = pair_decoherence(scenario, a, b)?;
    let alpha = scenario.amplitude(lead)?;
    Ok(CoherenceReport {
        d,
        magnitude: d.norm(),
        phase: d.arg(),
        neg_log_exact: alpha.norm_sqr() + alpha.conj() * alpha.conj(),
        neg_log_series: series,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OverlapReport {
    pub p_a: f64,
    pub p_b: f64,
    pub o_exact: f64,
    /// `1 − O_exact`, computed without cancellation.
    pub deficit_exact: f64,
    /// `1 − δ² x² e^{−2x} / (4(1 − e^{−x}))`, `x = r|α_a|²`.
    pub o_approx: f64,
    pub deficit_approx: f64,
    /// `1 − δ² x² e^{−2x} / (4(1 − e^{−x})²)`, the exact `δ²` Taylor term.
    pub o_second_order: f64,
    pub deficit_second_order: f64,
    /// `|α_b| = |α_a|(1 + δ)`
    pub delta: f64,
}

/// Which detection law feeds the overlap.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DetectionLaw {
    /// `1 − e^{−|α|²}`
    Ideal,
    /// `1 − exp(−|α|² γ_J/(γ_J+γ_R))`
    Relaxed,
}

/// `x² e^{−2x}/4` with `x = |α|²`, the factor suppressing basis-change
/// errors.
pub fn damping_factor(abs_alpha: f64) -> f64 {
    let x = abs_alpha * abs_alpha;
    0.25 * x * x * (-2.0 * x).exp()
}

/// Overlap `|⟨Ψ_T|Ψ⟩|²` between `(|a⟩ + |b⟩)/√2` and the post-measurement
/// state `(√P_a|a⟩ + √P_b|b⟩)/√N`.
pub fn measurement_basis_overlap(
    alpha_a: Complex64,
    alpha_b: Complex64,
    params: &JpmParams,
    law: DetectionLaw,
) -> Result<OverlapReport> {
    let ratio = match law {
        DetectionLaw::Ideal => 1.0,
        DetectionLaw::Relaxed => params.branching_ratio(),
    };
    let pick = |a: Complex64| {
        let d = analytic_detection_probability(a, params);
        match law {
            DetectionLaw::Ideal => d.ideal,
            DetectionLaw::Relaxed => d.relaxed,
        }
    };
    let (p_a, p_b) = (pick(alpha_a), pick(alpha_b));
    if p_a + p_b == 0.0 {
        return Err(Error::Undefined("overlap needs a nonzero detection probability".into()));
    }
    let (xa, xb) = (ratio * alpha_a.norm_sqr(), ratio * alpha_b.norm_sqr());
    // P_b − P_a = e^{−x_a} − e^{−x_b} = e^{−x_a}(1 − e^{x_a − x_b})
    let dp = -(-xa).exp() * (xa - xb).exp_m1();
    let root_gap = dp / (p_a.sqrt() + p_b.sqrt());
    let deficit_exact = 0.5 * root_gap * root_gap / (p_a + p_b);

    let abs_a = alpha_a.norm();
    let delta = if abs_a > 0.0 { alpha_b.norm() / abs_a - 1.0 } else { f64::INFINITY };
    let x = xa;
    let core = delta * delta * x * x * (-2.0 * x).exp() / 4.0;
    let one_minus = -(-x).exp_m1();
    let (deficit_approx, deficit_second_order) = if abs_a > 0.0 {
        (core / one_minus, core / (one_minus * one_minus))
    } else {
        (f64::NAN, f64::NAN)
    };
    Ok(OverlapReport {
        p_a,
        p_b,
        o_exact: 1.0 - deficit_exact,
        deficit_exact,
        o_approx: 1.0 - deficit_approx,
        deficit_approx,
        o_second_order: 1.0 - deficit_second_order,
        deficit_second_order,
        delta,
    })
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> Result<f64> {
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::InvalidParameter("need at least two paired points".into()));
    }
    if xs.iter().chain(ys).any(|v| !(*v > 0.0)) {
        return Err(Error::InvalidParameter("log-log fit needs positive data".into()));
    }
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|v| v.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|v| v.ln()).collect();
    let mx = lx.iter().sum::<f64>() / n;
    let my = ly.iter().sum::<f64>() / n;
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx) * (x - mx)).sum();
    Ok(sxy / sxx)
}
