//! Dispersive register model: parity bands, closed-form multi-tone drive
//! amplitudes and a Schrödinger-integration oracle for them.
//!
//! Basis states are labelled by bit strings whose leftmost character is
//! qubit 1, which is also the slowest index of `qubits ⊗ cavity`. Bit `1`
//! carries `s = +1` and pulls the cavity by `+χₖ`; bit `0` pulls it by `−χₖ`.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::fock::{c64, ladder_operators, recommended_dim, HilbertSpace, OperatorMatrix, StateVector};
use crate::lindblad::{evolve_pure, Coefficient, DriveTerm, Hamiltonian};

/// Below this `|Δ t|` a tone is treated as exactly resonant.
pub const RESONANT_THRESHOLD: f64 = 1e-8;

#[derive(Clone, Debug, PartialEq)]
pub struct QubitRegister {
    n_qubits: usize,
    chi: f64,
    epsilons: Vec<f64>,
    omega_c: f64,
}

impl QubitRegister {
    /// `epsilons[k]` is the mismatch of qubit `k + 1`; the first entry must be 0.
    pub fn new(n_qubits: usize, chi: f64, epsilons: Vec<f64>, omega_c: f64) -> Result<Self> {
        if ![1, 2, 4].contains(&n_qubits) {
            return Err(Error::InvalidParameter(format!(
                "{n_qubits} qubits; supported registers have 1, 2 or 4"
            )));
        }
        if !(chi > 0.0) || !chi.is_finite() {
            return Err(Error::InvalidParameter(format!("dispersive shift must be positive, got {chi}")));
        }
        if epsilons.len() != n_qubits {
            return Err(Error::DimensionMismatch {
                expected: n_qubits,
                found: epsilons.len(),
            });
        }
        if epsilons[0] != 0.0 {
            return Err(Error::InvalidParameter("mismatch of qubit 1 must be 0".into()));
        }
        if let Some(e) = epsilons.iter().find(|e| !(e.abs() < chi)) {
            return Err(Error::InvalidParameter(format!("|ε| = {} must stay below χ = {chi}", e.abs())));
        }
        if !omega_c.is_finite() {
            return Err(Error::InvalidParameter("cavity frequency must be finite".into()));
        }
        Ok(Self {
            n_qubits,
            chi,
            epsilons,
            omega_c,
        })
    }

    pub fn uniform(n_qubits: usize, chi: f64, omega_c: f64) -> Result<Self> {
        Self::new(n_qubits, chi, vec![0.0; n_qubits], omega_c)
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn chi(&self) -> f64 {
        self.chi
    }

    pub fn epsilons(&self) -> &[f64] {
        &self.epsilons
    }

    pub fn omega_c(&self) -> f64 {
        self.omega_c
    }

    /// Dispersive shift `χ + εₖ` of qubit `k` (0-based).
    pub fn chi_k(&self, k: usize) -> f64 {
        self.chi + self.epsilons[k]
    }

    pub fn n_states(&self) -> usize {
        1 << self.n_qubits
    }

    pub fn label(&self, index: usize) -> String {
        format!("{:0width$b}", index, width = self.n_qubits)
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        if label.len() != self.n_qubits || !label.chars().all(|c| c == '0' || c == '1') {
            return Err(Error::InvalidParameter(format!("bad basis label {label:?}")));
        }
        Ok(usize::from_str_radix(label, 2).expect("validated binary"))
    }

    /// `sₖ` for qubit `k` (0-based, qubit 1 first) in basis state `index`.
    pub fn spin(&self, index: usize, k: usize) -> f64 {
        if (index >> (self.n_qubits - 1 - k)) & 1 == 1 {
            1.0
        } else {
            -1.0
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Parity {
    Even,
    Odd,
}

impl Parity {
    pub fn of(index: usize) -> Self {
        if index.count_ones() % 2 == 0 {
            Parity::Even
        } else {
            Parity::Odd
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Parity::Even => "even",
            Parity::Odd => "odd",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BasisStateShift {
    pub index: usize,
    pub label: String,
    pub parity: Parity,
    /// `χ̃ = Σ sₖ χₖ`
    pub total_shift: f64,
}

// Integer multiple of χ plus the mismatch sum, so mismatch-free shifts are
// exact multiples of χ.
fn total_shift(register: &QubitRegister, index: usize) -> f64 {
    let spins: Vec<f64> = (0..register.n_qubits()).map(|k| register.spin(index, k)).collect();
    let net: f64 = spins.iter().sum();
    net * register.chi() + spins.iter().zip(register.epsilons()).map(|(s, e)| s * e).sum::<f64>()
}

pub fn band_shifts(register: &QubitRegister) -> Vec<BasisStateShift> {
    (0..register.n_states())
        .map(|index| BasisStateShift {
            index,
            label: register.label(index),
            parity: Parity::of(index),
            total_shift: total_shift(register, index),
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Tone {
    pub omega: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DrivePulse {
    pub a0: f64,
    pub tones: Vec<Tone>,
    pub t_d: f64,
}

impl DrivePulse {
    pub fn new(a0: f64, tones: Vec<Tone>, t_d: f64) -> Result<Self> {
        if tones.is_empty() {
            return Err(Error::InvalidParameter("pulse needs at least one tone".into()));
        }
        if !(t_d > 0.0) || !t_d.is_finite() {
            return Err(Error::InvalidParameter(format!("drive time must be positive, got {t_d}")));
        }
        if !a0.is_finite() || tones.iter().any(|t| !t.omega.is_finite() || !t.phase.is_finite()) {
            return Err(Error::InvalidParameter("non-finite pulse parameter".into()));
        }
        Ok(Self { a0, tones, t_d })
    }

    pub fn with_duration(&self, t_d: f64) -> Result<Self> {
        Self::new(self.a0, self.tones.clone(), t_d)
    }

    pub fn with_amplitude(&self, a0: f64) -> Result<Self> {
        Self::new(a0, self.tones.clone(), self.t_d)
    }
}

/// One tone at each odd-band frequency of the mismatch-free register, all
/// phases 0, lasting `π/χ`.
pub fn parity_pulse(register: &QubitRegister, a0: f64) -> Result<DrivePulse> {
    let ideal = QubitRegister::uniform(register.n_qubits(), register.chi(), register.omega_c())?;
    let mut shifts: Vec<f64> = band_shifts(&ideal)
        .into_iter()
        .filter(|s| s.parity == Parity::Odd)
        .map(|s| s.total_shift)
        .collect();
    shifts.sort_by(f64::total_cmp);
    shifts.dedup();
    let tones = shifts
        .into_iter()
        .map(|s| Tone {
            omega: register.omega_c() + s,
            phase: 0.0,
        })
        .collect();
    DrivePulse::new(a0, tones, optimal_drive_time(register)?)
}

/// Drive amplitude giving `|α_O|² = occupation` for a resonant odd state of
/// a [`parity_pulse`] at `t = π/χ`.
pub fn amplitude_for_occupation(register: &QubitRegister, occupation: f64) -> Result<f64> {
    if !(occupation >= 0.0) {
        return Err(Error::InvalidParameter("occupation must be non-negative".into()));
    }
    Ok(2.0 * occupation.sqrt() / optimal_drive_time(register)?)
}

pub fn optimal_drive_time(register: &QubitRegister) -> Result<f64> {
    if !(register.chi() > 0.0) {
        return Err(Error::InvalidParameter("χ must be positive".into()));
    }
    Ok(PI / register.chi())
}

/// `∫₀ᵗ e^{iΔs} ds = (e^{iΔt} − 1)/(iΔ)`.
fn phase_integral(delta: f64, t: f64) -> Complex64 {
    let x = delta * t;
    if x.abs() < RESONANT_THRESHOLD {
        c64(t, 0.0)
    } else {
        // e^{ix} − 1 = 2i sin(x/2) e^{ix/2} avoids cancellation at small x
        c64(2.0 * (0.5 * x).sin() / delta, 0.0) * c64(0.0, 0.5 * x).exp()
    }
}

/// Coherent amplitude after driving for time `t` a cavity whose
/// (qubit-shifted) frequency is `shifted_cavity`, starting from vacuum:
/// `α(t) = −i (a0/2) Σᵢ e^{−iφᵢ} ∫₀ᵗ e^{iΔᵢs} ds`, `Δᵢ = ω̃_C − ω_Dᵢ`.
pub fn drive_amplitude_at(shifted_cavity: f64, pulse: &DrivePulse, t: f64) -> Complex64 {
    pulse
        .tones
        .iter()
        .map(|tone| tone_amplitude(shifted_cavity - tone.omega, tone.phase, pulse.a0, t))
        .sum()
}

fn tone_amplitude(delta: f64, phase: f64, a0: f64, t: f64) -> Complex64 {
    c64(0.0, -0.5 * a0) * c64(0.0, -phase).exp() * phase_integral(delta, t)
}

/// [`drive_amplitude_at`] at the end of the pulse for one basis state.
pub fn drive_amplitude_closed_form(register: &QubitRegister, shift: &BasisStateShift, pulse: &DrivePulse) -> Complex64 {
    drive_amplitude_at(register.omega_c() + shift.total_shift, pulse, pulse.t_d)
}

/// Split of an amplitude into the contribution `β` of its most nearly
/// resonant tone and the remainder `η`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ToneSplit {
    pub resonant_tone: usize,
    pub beta: Complex64,
    pub eta: Complex64,
}

pub fn resonant_split(shifted_cavity: f64, pulse: &DrivePulse, t: f64) -> ToneSplit {
    let (resonant_tone, _) = pulse
        .tones
        .iter()
        .enumerate()
        .map(|(i, tone)| (i, (shifted_cavity - tone.omega).abs()))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .expect("pulse has tones");
    let mut beta = c64(0.0, 0.0);
    let mut eta = c64(0.0, 0.0);
    for (i, tone) in pulse.tones.iter().enumerate() {
        let a = tone_amplitude(shifted_cavity - tone.omega, tone.phase, pulse.a0, t);
        if i == resonant_tone {
            beta += a;
        } else {
            eta += a;
        }
    }
    ToneSplit {
        resonant_tone,
        beta,
        eta,
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DriveOutcome {
    pub shifts: Vec<BasisStateShift>,
    pub amplitudes: Vec<Complex64>,
}

impl DriveOutcome {
    pub fn amplitude(&self, label: &str) -> Option<Complex64> {
        self.shifts
            .iter()
            .position(|s| s.label == label)
            .map(|i| self.amplitudes[i])
    }
}

pub fn drive_outcome(register: &QubitRegister, pulse: &DrivePulse) -> DriveOutcome {
    let shifts = band_shifts(register);
    let amplitudes = shifts
        .iter()
        .map(|s| drive_amplitude_closed_form(register, s, pulse))
        .collect();
    DriveOutcome { shifts, amplitudes }
}

/// Basis states sharing one cavity pull.
#[derive(Clone, Debug, PartialEq)]
pub struct Band {
    pub total_shift: f64,
    pub parity: Parity,
    pub labels: Vec<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct OccupationCurves {
    pub times: Vec<f64>,
    pub bands: Vec<Band>,
    /// `occupations[b][i]` is `|α|²` of band `b` at `times[i]`.
    pub occupations: Vec<Vec<f64>>,
}

/// Relative (to χ) spread of shifts still counted as one band.
pub const BAND_TOL: f64 = 1e-9;

/// Groups basis states by total shift, ascending.
pub fn bands(register: &QubitRegister) -> Vec<Band> {
    let mut shifts = band_shifts(register);
    shifts.sort_by(|a, b| a.total_shift.total_cmp(&b.total_shift).then(a.index.cmp(&b.index)));
    let mut out: Vec<Band> = Vec::new();
    for s in shifts {
        match out.last_mut() {
            Some(b) if (b.total_shift - s.total_shift).abs() <= BAND_TOL * register.chi() => b.labels.push(s.label),
            _ => out.push(Band {
                total_shift: s.total_shift,
                parity: s.parity,
                labels: vec![s.label],
            }),
        }
    }
    out
}

/// `|α(t)|²` per band as the pulse length is swept over `t_grid`.
pub fn occupation_curves(register: &QubitRegister, pulse: &DrivePulse, t_grid: &[f64]) -> OccupationCurves {
    let bands = bands(register);
    let occupations = bands
        .iter()
        .map(|b| {
            let w = register.omega_c() + b.total_shift;
            t_grid
                .iter()
                .map(|&t| drive_amplitude_at(w, pulse, t).norm_sqr())
                .collect()
        })
        .collect();
    OccupationCurves {
        times: t_grid.to_vec(),
        bands,
        occupations,
    }
}

/// `c(t)` multiplying `a` in the drive Hamiltonian `c a + c̄ a†`, in a frame
/// rotating at `frame_omega`: `(a0/2) Σᵢ e^{i((ω_Dᵢ − ω_frame)t + φᵢ)}`.
pub fn drive_coefficient(pulse: &DrivePulse, frame_omega: f64) -> Coefficient {
    let half = 0.5 * pulse.a0;
    let tones: Vec<(f64, f64)> = pulse.tones.iter().map(|t| (t.omega - frame_omega, t.phase)).collect();
    Arc::new(move |t: f64| {
        tones
            .iter()
            .map(|&(d, phi)| c64(0.0, d * t + phi).exp())
            .sum::<Complex64>()
            * half
    })
}

/// Fock dimension that holds the largest amplitude any tone sum can reach.
pub fn oracle_dim(pulse: &DrivePulse) -> usize {
    recommended_dim(0.5 * pulse.a0.abs() * pulse.t_d * pulse.tones.len() as f64)
}

/// Integrates `iψ' = H'(t)ψ` from vacuum in the frame rotating at
/// `shifted_cavity` and returns `⟨a⟩` at the end of the pulse.
pub fn drive_unitary_numeric(shifted_cavity: f64, pulse: &DrivePulse, space: &HilbertSpace) -> Result<Complex64> {
    let l = ladder_operators(space)?;
    let coeff = drive_coefficient(pulse, shifted_cavity);
    let h = Hamiltonian::Driven {
        base: OperatorMatrix::zeros(space),
        terms: DriveTerm::hermitian_pair(l.annihilation.clone(), coeff).to_vec(),
    };
    let psi0 = StateVector::basis(space, 0)?;
    let run = evolve_pure(&h, &psi0, &[0.0, pulse.t_d], 1e-10)?;
    run.states[1].expectation(&l.annihilation)
}

#[cfg(test)]
mod tests {
    use super::*;

    const CHI: f64 = 2.0 * PI * 5e6;
    const OMEGA_C: f64 = 2.0 * PI * 6e9;

    fn four() -> QubitRegister {
        QubitRegister::uniform(4, CHI, OMEGA_C).unwrap()
    }

    fn shift_of(r: &QubitRegister, label: &str) -> f64 {
        band_shifts(r)
            .into_iter()
            .find(|s| s.label == label)
            .unwrap()
            .total_shift
    }

    #[test]
    fn two_qubit_shifts_without_mismatch() {
        let r = QubitRegister::uniform(2, CHI, OMEGA_C).unwrap();
        assert_eq!(shift_of(&r, "00"), -2.0 * CHI);
        assert_eq!(shift_of(&r, "11"), 2.0 * CHI);
        assert_eq!(shift_of(&r, "01"), 0.0);
        assert_eq!(shift_of(&r, "10"), 0.0);
    }

    #[test]
    fn two_qubit_shifts_with_mismatch() {
        let eps = 0.07 * CHI;
        let r = QubitRegister::new(2, CHI, vec![0.0, eps], OMEGA_C).unwrap();
        let close = |a: f64, b: f64| (a - b).abs() <= 1e-12 * CHI;
        assert!(close(shift_of(&r, "00"), -2.0 * CHI - eps));
        assert!(close(shift_of(&r, "11"), 2.0 * CHI + eps));
        assert!(close(shift_of(&r, "01"), eps));
        assert!(close(shift_of(&r, "10"), -eps));
    }

    #[test]
    fn four_qubit_band_structure() {
        let r = four();
        for s in band_shifts(&r) {
            let k = (s.total_shift / CHI).round() as i64;
            assert_eq!((s.total_shift - k as f64 * CHI).abs(), 0.0);
            match s.parity {
                Parity::Even => assert!([-4, 0, 4].contains(&k), "{}", s.label),
                Parity::Odd => assert!([-2, 2].contains(&k), "{}", s.label),
            }
            assert_eq!(s.parity == Parity::Odd, s.label.matches('1').count() % 2 == 1);
        }
        let b = bands(&r);
        assert_eq!(b.len(), 5);
        assert_eq!(b.iter().map(|b| b.labels.len()).collect::<Vec<_>>(), vec![1, 4, 6, 4, 1]);
    }

    #[test]
    fn register_validation() {
        assert!(QubitRegister::uniform(3, CHI, OMEGA_C).is_err());
        assert!(QubitRegister::uniform(2, 0.0, OMEGA_C).is_err());
        assert!(QubitRegister::new(2, CHI, vec![0.0, CHI], OMEGA_C).is_err());
        assert!(QubitRegister::new(2, CHI, vec![0.1, 0.0], OMEGA_C).is_err());
        assert!(QubitRegister::new(2, CHI, vec![0.0], OMEGA_C).is_err());
    }

    fn single(delta: f64, a0: f64, t: f64) -> Complex64 {
        let p = DrivePulse::new(
            a0,
            vec![Tone {
                omega: OMEGA_C - delta,
                phase: 0.0,
            }],
            t,
        )
        .unwrap();
        drive_amplitude_at(OMEGA_C, &p, t)
    }

    #[test]
    fn single_tone_closed_forms() {
        let a0 = 6.0 * CHI / PI;
        let t = PI / CHI;
        let res = single(0.0, a0, t);
        assert!((res - c64(0.0, -0.5 * a0 * t)).norm() < 1e-12);
        assert!((res.norm_sqr() - (0.5 * a0 * t).powi(2)).abs() < 1e-12);

        assert!(single(2.0 * CHI, a0, t).norm() < 1e-12);

        let delta = 1.37 * CHI;
        let want = (a0 / delta).powi(2) * (1.0 - (delta * t).cos()) / 2.0;
        assert!((single(delta, a0, t).norm_sqr() - want).abs() < 1e-12 * want.max(1.0));
    }

    #[test]
    fn two_tones_cancel_on_even_band() {
        let t = PI / CHI;
        let p = DrivePulse::new(
            1e8,
            vec![
                Tone {
                    omega: OMEGA_C - 2.0 * CHI,
                    phase: 0.0,
                },
                Tone {
                    omega: OMEGA_C - 6.0 * CHI,
                    phase: 0.0,
                },
            ],
            t,
        )
        .unwrap();
        assert!(drive_amplitude_at(OMEGA_C, &p, t).norm() < 1e-12);
    }

    #[test]
    fn resonant_limit_is_continuous() {
        let a0 = 1e7;
        let t = 1e-7;
        let exact = single(0.0, a0, t);
        let near = single(0.9 * RESONANT_THRESHOLD / t, a0, t);
        let above = single(1.1 * RESONANT_THRESHOLD / t, a0, t);
        assert!((exact - near).norm() < 1e-8 * exact.norm());
        assert!((exact - above).norm() < 1e-8 * exact.norm());
    }

    #[test]
    fn optimal_time_values() {
        let r = QubitRegister::uniform(4, 2.0 * PI * 5e6, OMEGA_C).unwrap();
        assert!((optimal_drive_time(&r).unwrap() - 100e-9).abs() < 1e-20);
        // χ/π = 10 MHz is the same χ
        let r = QubitRegister::uniform(4, PI * 10e6, OMEGA_C).unwrap();
        assert!((optimal_drive_time(&r).unwrap() - 100e-9).abs() < 1e-20);
        let r2 = QubitRegister::uniform(4, 2.0 * PI * 10e6, OMEGA_C).unwrap();
        assert!((optimal_drive_time(&r2).unwrap() - 50e-9).abs() < 1e-20);
    }

    #[test]
    fn mismatch_free_outcome_realizes_parity_displacement() {
        let r = four();
        let a0 = amplitude_for_occupation(&r, 9.0).unwrap();
        let p = parity_pulse(&r, a0).unwrap();
        let out = drive_outcome(&r, &p);
        let odd: Vec<Complex64> = out
            .shifts
            .iter()
            .zip(&out.amplitudes)
            .filter(|(s, _)| s.parity == Parity::Odd)
            .map(|(_, a)| *a)
            .collect();
        for (s, a) in out.shifts.iter().zip(&out.amplitudes) {
            if s.parity == Parity::Even {
                assert!(a.norm_sqr() < 1e-18, "{} {}", s.label, a.norm_sqr());
            }
        }
        for a in &odd {
            assert!((a - odd[0]).norm() < 1e-12);
            assert!((a.norm_sqr() - 9.0).abs() < 1e-9);
        }
    }

    #[test]
    fn resonant_assignment_is_symmetric() {
        let r = four();
        let a0 = amplitude_for_occupation(&r, 9.0).unwrap();
        let p = parity_pulse(&r, a0).unwrap();
        let mut swapped = p.clone();
        swapped.tones.reverse();
        let t = p.t_d;
        for band in [2.0 * CHI, -2.0 * CHI] {
            let w = OMEGA_C + band;
            let a = resonant_split(w, &p, t);
            let b = resonant_split(w, &swapped, t);
            assert!((a.beta - b.beta).norm() < 1e-12 && (a.eta - b.eta).norm() < 1e-12);
            assert!((drive_amplitude_at(w, &p, t) - a.beta - a.eta).norm() < 1e-12);
        }
        let up = resonant_split(OMEGA_C + 2.0 * CHI, &p, t);
        let down = resonant_split(OMEGA_C - 2.0 * CHI, &p, t);
        assert!((up.beta - down.beta).norm() < 1e-12);
        assert!((up.eta.norm() - down.eta.norm()).abs() < 1e-12);
        assert!((up.beta - c64(0.0, -0.5 * a0 * t)).norm() < 1e-12);
        // η vanishes at the optimal time but not in between
        assert!(up.eta.norm() < 1e-12);
        let mid = resonant_split(OMEGA_C + 2.0 * CHI, &p, 0.3 * t);
        assert!(mid.eta.norm() > 0.1);
        let mid_down = resonant_split(OMEGA_C - 2.0 * CHI, &p, 0.3 * t);
        assert!((mid.eta.norm() - mid_down.eta.norm()).abs() < 1e-12);
    }

    #[test]
    fn curves_start_empty_and_odd_bands_coincide() {
        let r = four();
        let p = parity_pulse(&r, amplitude_for_occupation(&r, 9.0).unwrap()).unwrap();
        let grid: Vec<f64> = (0..=50).map(|i| i as f64 * 2e-9).collect();
        let c = occupation_curves(&r, &p, &grid);
        for series in &c.occupations {
            assert_eq!(series[0], 0.0);
        }
        let odd: Vec<&Vec<f64>> = c
            .bands
            .iter()
            .zip(&c.occupations)
            .filter(|(b, _)| b.parity == Parity::Odd)
            .map(|(_, s)| s)
            .collect();
        assert_eq!(odd.len(), 2);
        for (x, y) in odd[0].iter().zip(odd[1]) {
            assert!((x - y).abs() < 1e-12);
        }
        for (b, s) in c.bands.iter().zip(&c.occupations) {
            if b.parity == Parity::Even {
                assert!(s[50] < 1e-18);
            }
        }
    }

    #[test]
    fn numeric_oracle_matches_closed_form() {
        let t = PI / CHI;
        for (delta, a0) in [(0.0, 3e7), (1.3 * CHI, 4e7), (-3.1 * CHI, 2e7)] {
            let p = DrivePulse::new(
                a0,
                vec![Tone {
                    omega: OMEGA_C - delta,
                    phase: 0.4,
                }],
                t,
            )
            .unwrap();
            let s = HilbertSpace::new(oracle_dim(&p)).unwrap();
            let num = drive_unitary_numeric(OMEGA_C, &p, &s).unwrap();
            let closed = drive_amplitude_at(OMEGA_C, &p, t);
            assert!((num - closed).norm() < 1e-6, "Δ={delta}: {num} vs {closed}");
        }
        let p = DrivePulse::new(
            0.0,
            vec![Tone {
                omega: OMEGA_C,
                phase: 0.0,
            }],
            t,
        )
        .unwrap();
        let s = HilbertSpace::new(5).unwrap();
        assert_eq!(drive_unitary_numeric(OMEGA_C, &p, &s).unwrap().norm(), 0.0);
    }
}
