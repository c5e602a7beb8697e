//! Cavity loss after the parity measurement: characteristic-function
//! solution, steady-state damping of qubit coherences, and the coherence
//! left over after photon counting and an imperfect reset.
//!
//! `κ` is the amplitude decay rate (`⟨a⟩ ∝ e^{−κt}`), so the matching
//! master equation uses `√(2κ(n̄+1)) a` and `√(2κn̄) a†`. Characteristic
//! functions are `χ(ξ) = Tr[ρ D(ξ)]`, so `χ(0) = Tr ρ`.

use rayon::prelude::*;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{
    c64, coherent_overlap, coherent_state, embed_at, ladder_operators, recommended_dim, HilbertSpace, OperatorMatrix,
    StateVector,
};
use crate::jpm::{apply_reset, post_click_state, reset_space_dim, ResetSpec};
use crate::lindblad::{evolve, EvolveOptions, Hamiltonian, Hygiene, LindbladModel};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayParams {
    pub kappa: f64,
    pub omega: f64,
    pub nbar: f64,
}

impl DecayParams {
    pub fn new(kappa: f64, omega: f64, nbar: f64) -> Result<Self> {
        if !(kappa >= 0.0) || !(nbar >= 0.0) || !omega.is_finite() || !kappa.is_finite() || !nbar.is_finite() {
            return Err(Error::InvalidParameter("need κ ≥ 0, n̄ ≥ 0 and finite ω".into()));
        }
        Ok(Self { kappa, omega, nbar })
    }

    /// `η = 1 + 2n̄`
    pub fn eta(&self) -> f64 {
        1.0 + 2.0 * self.nbar
    }

    /// Collapse operators on a single mode.
    pub fn collapse_ops(&self, mode: &HilbertSpace) -> Result<Vec<OperatorMatrix>> {
        let l = ladder_operators(mode)?;
        let mut ops = vec![l.annihilation.scaled(c64((2.0 * self.kappa * (self.nbar + 1.0)).sqrt(), 0.0))];
        if self.nbar > 0.0 {
            ops.push(l.creation.scaled(c64((2.0 * self.kappa * self.nbar).sqrt(), 0.0)));
        }
        Ok(ops)
    }
}

/// `Tr[|a⟩⟨b| D(ξ)] = e^{(ξā − ξ̄a)/2} ⟨b|a + ξ⟩`.
pub fn coherent_pair_characteristic(a: Complex64, b: Complex64, xi: Complex64) -> Complex64 {
    (0.5 * (xi * a.conj() - xi.conj() * a)).exp() * coherent_overlap(b, a + xi)
}

/// `χ(ξ, t) = χ(ξ e^{−t(κ − iω)}, 0) · exp{(η/2)|ξ|²(e^{−2κt} − 1)}`.
pub fn characteristic_evolution<F: Fn(Complex64) -> Complex64>(
    chi0: F,
    params: &DecayParams,
    xi: Complex64,
    t: f64,
) -> Complex64 {
    let rotated = xi * c64(-params.kappa * t, params.omega * t).exp();
    let envelope = (0.5 * params.eta() * xi.norm_sqr() * (-2.0 * params.kappa * t).exp_m1()).exp();
    chi0(rotated) * envelope
}

/// Long-time limit `Tr ρ(0) · e^{−η|ξ|²/2}`.
pub fn characteristic_steady_state(trace0: Complex64, params: &DecayParams, xi: Complex64) -> Complex64 {
    trace0 * (-0.5 * params.eta() * xi.norm_sqr()).exp()
}

/// `F_{01} = Tr ρ₀₁ = ⟨α₁|α₀⟩`, the conserved weight of the coherence
/// between qubit states whose cavity branches are `|α₀⟩` and `|α₁⟩`.
pub fn damping_envelope(alpha0: Complex64, alpha1: Complex64) -> Complex64 {
    coherent_overlap(alpha1, alpha0)
}

/// `exp(−N(1 − cos(πε/χ)))`.
pub fn steady_state_coherence(occupation: f64, epsilon_over_chi: f64) -> Result<f64> {
    if !(occupation >= 0.0) {
        return Err(Error::InvalidParameter("occupation must be non-negative".into()));
    }
    Ok((-occupation * (1.0 - (std::f64::consts::PI * epsilon_over_chi).cos())).exp())
}

/// How the cavity is displaced back toward vacuum after a click.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum ResetPolicy {
    /// Each branch is displaced by minus its own mean field.
    MeanFieldPhaseMatched,
    /// Both branches are displaced by minus the mean field of the first.
    SharedMeanField,
    /// Both branches are returned to vacuum.
    Perfect,
}

impl ResetPolicy {
    pub fn as_str(self) -> &'static str {
        match self {
            ResetPolicy::MeanFieldPhaseMatched => "mean-field-phase-matched",
            ResetPolicy::SharedMeanField => "shared-mean-field",
            ResetPolicy::Perfect => "perfect",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "mean-field-phase-matched" => Ok(ResetPolicy::MeanFieldPhaseMatched),
            "shared-mean-field" => Ok(ResetPolicy::SharedMeanField),
            "perfect" => Ok(ResetPolicy::Perfect),
            other => Err(Error::InvalidParameter(format!(
                "unknown reset policy {other:?}; expected mean-field-phase-matched, shared-mean-field or perfect"
            ))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnvelopePoint {
    pub occupation: f64,
    pub photons_removed: usize,
    pub f01: Complex64,
    /// `1 − |F₀₁|`
    pub coherence_loss: f64,
}

/// Coherence between the worst-case branches `|√N⟩` and `|−√N⟩` after
/// removing `k` photons from each and resetting, at one grid point.
pub fn post_reset_overlap(occupation: f64, photons_removed: usize, policy: ResetPolicy) -> Result<EnvelopePoint> {
    if !(occupation > 0.0) {
        return Err(Error::InvalidParameter("occupation must be positive".into()));
    }
    let amp = occupation.sqrt();
    let space = HilbertSpace::new(reset_space_dim(amp))?;
    let psi0 = post_click_state(c64(amp, 0.0), photons_removed, &space)?;
    let psi1 = post_click_state(c64(-amp, 0.0), photons_removed, &space)?;
    let f01 = match policy {
        ResetPolicy::Perfect => c64(1.0, 0.0),
        ResetPolicy::SharedMeanField => {
            let reset = ResetSpec::mean_field(&psi0)?;
            let r0 = apply_reset(&psi0, &reset)?;
            let r1 = apply_reset(&psi1, &reset)?;
            r1.inner(&r0)?
        }
        ResetPolicy::MeanFieldPhaseMatched => {
            let r0 = apply_reset(&psi0, &ResetSpec::mean_field(&psi0)?)?;
            let r1 = apply_reset(&psi1, &ResetSpec::mean_field(&psi1)?)?;
            r1.inner(&r0)?
        }
    };
    Ok(EnvelopePoint {
        occupation,
        photons_removed,
        f01,
        coherence_loss: 1.0 - f01.norm(),
    })
}

/// [`post_reset_overlap`] over a grid, ordered occupation-major.
pub fn post_reset_decay_envelope(
    occupations: &[f64],
    photons_removed: &[usize],
    policy: ResetPolicy,
) -> Result<Vec<EnvelopePoint>> {
    let grid: Vec<(f64, usize)> = occupations
        .iter()
        .flat_map(|&n| photons_removed.iter().map(move |&k| (n, k)))
        .collect();
    grid.par_iter()
        .map(|&(n, k)| post_reset_overlap(n, k, policy))
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CoherenceCrossCheck {
    /// `Tr ρ₀₁` read from the final joint state.
    pub f01: Complex64,
    pub analytic: f64,
    /// `⟨n⟩` left in the cavity at the final time.
    pub residual_occupation: f64,
    pub hygiene: Hygiene,
}

/// Evolves `(|0⟩|α₀⟩ + |1⟩|α₁⟩)/√2` under cavity loss until `κt = kappa_t`
/// and reads the qubit coherence `2ρ₀₁` of the reduced two-level state.
pub fn lindblad_coherence(
    alpha0: Complex64,
    alpha1: Complex64,
    nbar: f64,
    kappa_t: f64,
    cavity_dim: usize,
    opts: &EvolveOptions,
) -> Result<(Complex64, f64, Hygiene)> {
    let which = HilbertSpace::new(2)?;
    let cavity = HilbertSpace::new(cavity_dim)?;
    let joint = HilbertSpace::composite(&[&which, &cavity])?;
    let c0 = coherent_state(alpha0, &cavity)?;
    let c1 = coherent_state(alpha1, &cavity)?;
    let amps = nalgebra::DVector::from_fn(joint.dim(), |i, _| {
        let (q, n) = (i / cavity_dim, i % cavity_dim);
        let c = if q == 0 { c0.amplitudes()[n] } else { c1.amplitudes()[n] };
        c * std::f64::consts::FRAC_1_SQRT_2
    });
    let psi = StateVector::from_amplitudes(joint.clone(), amps)?;
    // κ = 1 sets the time unit
    let params = DecayParams::new(1.0, 0.0, nbar)?;
    let collapse = params
        .collapse_ops(&cavity)?
        .iter()
        .map(|l| embed_at(l, 1, &joint))
        .collect::<Result<Vec<_>>>()?;
    let model = LindbladModel::new(Hamiltonian::Static(OperatorMatrix::zeros(&joint)), collapse)?;
    let res = evolve(&model, &psi.to_density(), &[0.0, kappa_t], opts)?;
    let last = &res.states[1];
    let reduced = last.partial_trace(&[0])?;
    let number = embed_at(&ladder_operators(&cavity)?.number, 1, &joint)?;
    let residual = last.expectation(&number)?.re;
    Ok((reduced.matrix()[(0, 1)] * 2.0, residual, res.hygiene))
}

/// Lindblad check of [`steady_state_coherence`] for the two-qubit odd pair
/// at mismatch `ε/χ`, scaled to `|α₀₁|² = N`.
pub fn steady_state_cross_check(
    occupation: f64,
    epsilon_over_chi: f64,
    nbar: f64,
    opts: &EvolveOptions,
) -> Result<CoherenceCrossCheck> {
    let chi = 1.0;
    let [_, a01, a10, _] = crate::mismatch::two_qubit_amplitudes(1.0, chi, epsilon_over_chi * chi);
    let scale = (occupation / a01.norm_sqr()).sqrt();
    let (alpha0, alpha1) = (a01 * scale, a10 * scale);
    let dim = recommended_dim(occupation.sqrt()) + 4;
    let (f01, residual, hygiene) = lindblad_coherence(alpha0, alpha1, nbar, 20.0, dim, opts)?;
    Ok(CoherenceCrossCheck {
        f01,
        analytic: steady_state_coherence(occupation, epsilon_over_chi)?,
        residual_occupation: residual,
        hygiene,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fock::displacement_operator;

    #[test]
    fn characteristic_function_at_origin_is_trace() {
        let a = c64(1.0, -0.5);
        let b = c64(-0.3, 0.8);
        let chi = coherent_pair_characteristic(a, b, c64(0.0, 0.0));
        assert!((chi - coherent_overlap(b, a)).norm() < 1e-15);
        assert!((coherent_pair_characteristic(a, a, c64(0.0, 0.0)) - 1.0).norm() < 1e-15);
    }

    #[test]
    fn characteristic_matches_numeric_trace() {
        let (a, b) = (c64(0.7, 0.2), c64(-0.4, 0.5));
        let s = HilbertSpace::new(30).unwrap();
        let rho = coherent_state(a, &s).unwrap().to_density().into_matrix();
        let ket_b = coherent_state(b, &s).unwrap();
        let pair = coherent_state(a, &s).unwrap().amplitudes() * ket_b.amplitudes().adjoint();
        for xi in [c64(0.3, 0.0), c64(-0.2, 0.4)] {
            let d = displacement_operator(xi, &s).unwrap();
            let tr = (&pair * d.matrix()).trace();
            assert!((tr - coherent_pair_characteristic(a, b, xi)).norm() < 1e-9);
            let tr_rho = (&rho * d.matrix()).trace();
            assert!((tr_rho - coherent_pair_characteristic(a, a, xi)).norm() < 1e-9);
        }
    }

    #[test]
    fn evolution_limits() {
        let (a, b) = (c64(1.5, 0.0), c64(-1.5, 0.0));
        let p = DecayParams::new(2.0, 0.7, 0.2).unwrap();
        let chi0 = |x: Complex64| coherent_pair_characteristic(a, b, x);
        let xi = c64(0.4, -0.3);
        assert!((characteristic_evolution(chi0, &p, xi, 0.0) - chi0(xi)).norm() < 1e-15);
        let late = characteristic_evolution(chi0, &p, xi, 50.0);
        let want = characteristic_steady_state(coherent_overlap(b, a), &p, xi);
        assert!((late - want).norm() < 1e-15);
        let envelopes: Vec<f64> = (0..20)
            .map(|i| (0.5 * p.eta() * xi.norm_sqr() * (-2.0 * p.kappa * i as f64 * 0.1).exp_m1()).exp())
            .collect();
        assert!(envelopes.windows(2).all(|w| w[1] <= w[0]));
    }

    #[test]
    fn characteristic_evolution_matches_master_equation() {
        let p = DecayParams::new(1.0, 0.0, 0.1).unwrap();
        let a = c64(1.2, 0.4);
        let s = HilbertSpace::new(28).unwrap();
        let model = LindbladModel::new(Hamiltonian::Static(OperatorMatrix::zeros(&s)), p.collapse_ops(&s).unwrap())
            .unwrap();
        let rho0 = coherent_state(a, &s).unwrap().to_density();
        let res = evolve(&model, &rho0, &[0.0, 0.4, 1.5], &EvolveOptions::default()).unwrap();
        for (t, rho) in res.times.iter().zip(&res.states) {
            for xi in [c64(0.3, 0.1), c64(-0.5, 0.2)] {
                let d = displacement_operator(xi, &s).unwrap();
                let numeric = (rho.matrix() * d.matrix()).trace();
                let analytic = characteristic_evolution(|x| coherent_pair_characteristic(a, a, x), &p, xi, *t);
                assert!((numeric - analytic).norm() < 1e-7, "t={t} ξ={xi}");
            }
        }
    }

    #[test]
    fn steady_state_damping_of_opposite_phases() {
        let amp = 2.0;
        for (p0, p1) in [(0.3, 1.1), (0.0, std::f64::consts::PI), (-0.5, 0.5)] {
            let f = damping_envelope(c64(0.0, p0).exp() * amp, c64(0.0, p1).exp() * amp);
            let want = (c64(0.0, p0 - p1).exp() - 1.0).scale(amp * amp).exp();
            assert!((f - want).norm() < 1e-13);
        }
        assert_eq!(damping_envelope(c64(1.0, 1.0), c64(1.0, 1.0)), c64(1.0, 0.0));
    }

    #[test]
    fn steady_state_coherence_values() {
        let v = steady_state_coherence(9.0, 0.1).unwrap();
        assert!((v - (-9.0 * (1.0 - (0.1 * std::f64::consts::PI).cos())).exp()).abs() < 1e-15);
        assert!((v - 0.644).abs() < 5e-4);
        assert_eq!(steady_state_coherence(9.0, 0.0).unwrap(), 1.0);
        assert!((steady_state_coherence(4.0, 1.0).unwrap() - (-8.0f64).exp()).abs() < 1e-15);
        assert_eq!(steady_state_coherence(5.0, 0.2).unwrap(), steady_state_coherence(5.0, -0.2).unwrap());
        assert!(steady_state_coherence(5.0, 0.2).unwrap() > steady_state_coherence(6.0, 0.2).unwrap());
    }

    #[test]
    fn odd_pair_overlap_is_steady_state_coherence() {
        let [_, a01, a10, _] = crate::mismatch::two_qubit_amplitudes(1.0, 1.0, 0.1);
        let scale = (9.0 / a01.norm_sqr()).sqrt();
        let f = damping_envelope(a01 * scale, a10 * scale);
        assert!((f.norm() - steady_state_coherence(9.0, 0.1).unwrap()).abs() < 1e-12);
    }

    #[test]
    fn master_equation_reproduces_steady_state_coherence() {
        for nbar in [0.0, 0.1] {
            let c = steady_state_cross_check(9.0, 0.1, nbar, &EvolveOptions::default()).unwrap();
            assert!((c.f01.norm() - c.analytic).abs() < 1e-3, "n̄={nbar}: {} vs {}", c.f01.norm(), c.analytic);
            assert!(c.hygiene.is_clean());
        }
        let c = steady_state_cross_check(9.0, 0.1, 0.0, &EvolveOptions::default()).unwrap();
        assert!(c.residual_occupation < 1e-9);
    }

    #[test]
    fn perfect_reset_restores_coherence() {
        let p = post_reset_overlap(4.0, 2, ResetPolicy::Perfect).unwrap();
        assert_eq!(p.coherence_loss, 0.0);
    }

    #[test]
    fn post_reset_envelope_is_small_with_phase_matched_reset() {
        let pts = post_reset_decay_envelope(&[1.0, 4.0, 9.0], &[1, 2, 3], ResetPolicy::MeanFieldPhaseMatched).unwrap();
        assert_eq!(pts.len(), 9);
        assert_eq!((pts[0].occupation, pts[0].photons_removed), (1.0, 1));
        for p in &pts {
            assert!(p.coherence_loss >= -1e-12 && p.coherence_loss < 0.01, "{p:?}");
        }
    }

    #[test]
    fn shared_reset_cannot_undo_branch_distinguishability() {
        let p = post_reset_overlap(9.0, 1, ResetPolicy::SharedMeanField).unwrap();
        assert!(p.coherence_loss > 0.99);
    }

    #[test]
    fn reset_policy_names_round_trip() {
        for p in [ResetPolicy::MeanFieldPhaseMatched, ResetPolicy::SharedMeanField, ResetPolicy::Perfect] {
            assert_eq!(ResetPolicy::parse(p.as_str()).unwrap(), p);
        }
        assert!(ResetPolicy::parse("none").is_err());
    }
}
