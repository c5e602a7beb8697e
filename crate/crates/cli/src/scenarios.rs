use jpm_parity::decay::{post_reset_decay_envelope, steady_state_cross_check, ResetPolicy};
use jpm_parity::jc::DEFAULT_DETUNING;
use jpm_parity::jpm::{analytic_detection_probability, contrast_curve};
use jpm_parity::mismatch::{intra_subspace_decoherence, mismatch_amplitudes, FOUR_QUBIT_PATTERN};
use jpm_parity::protocol::{band_shifts, drive_amplitude_at, occupation_curves};
use jpm_parity::{
    build_jc_model, detection_probability, jc_contrast, jc_drive_all, Complex64, DarkChoice, EvolveOptions,
    HilbertSpace, Hygiene, JcModel, MeasurementCurve, Parity, QubitRegister,
};
use serde::Serialize;

use crate::config::*;
use crate::table::{fmt_num, ScenarioResult};
use crate::CliError;

pub struct CatalogEntry {
    pub name: &'static str,
    pub figure: &'static str,
    pub description: &'static str,
    pub default_config: fn() -> ScenarioConfig,
}

const CHI_HZ: f64 = 5e6;
const OMEGA_C_HZ: f64 = 6e9;

pub fn catalog() -> Vec<CatalogEntry> {
    vec![
        CatalogEntry {
            name: "fig2-drive-occupation",
            figure: "Fig. 2",
            description: "closed-form band occupations versus drive time, four qubits, tones at ω_C ± 2χ",
            default_config: || {
                cfg(
                    "fig2-drive-occupation",
                    &Fig2Params {
                        register: RegisterConfig::uniform(4, CHI_HZ),
                        target_occupation: 9.0,
                        grid: GridConfig {
                            t_end_s: 100e-9,
                            points: 201,
                        },
                    },
                )
            },
        },
        CatalogEntry {
            name: "fig3-contrast",
            figure: "Fig. 3",
            description: "detector click probabilities for both bright bands and the dark band, and their contrast",
            default_config: || {
                cfg(
                    "fig3-contrast",
                    &Fig3Params {
                        chi_hz: CHI_HZ,
                        omega_c_hz: OMEGA_C_HZ,
                        target_occupation: 9.0,
                        cavity_dim: 30,
                        jpm: JpmConfig::baseline(OMEGA_C_HZ),
                        grid: GridConfig {
                            t_end_s: 40e-9,
                            points: 81,
                        },
                        contrast_window_s: 40e-9,
                    },
                )
            },
        },
        CatalogEntry {
            name: "fig4-mismatch",
            figure: "Fig. 4",
            description: "two-qubit mismatch sweep: even-state detection and intra-subspace coherence",
            default_config: || {
                cfg(
                    "fig4-mismatch",
                    &Fig4Params {
                        chi_hz: CHI_HZ,
                        omega_c_hz: OMEGA_C_HZ,
                        target_occupation: 9.0,
                        eps_over_chi_min: 0.01,
                        eps_over_chi_max: 0.2,
                        points: 40,
                        spacing: "log".into(),
                        jpm: JpmConfig::baseline(OMEGA_C_HZ),
                    },
                )
            },
        },
        CatalogEntry {
            name: "decay-envelope",
            figure: "post-reset decay envelope",
            description: "coherence of the worst-case odd pair after photon subtraction and reset",
            default_config: || {
                cfg(
                    "decay-envelope",
                    &DecayEnvelopeParams {
                        occupations: (1..=9).map(f64::from).collect(),
                        photons_removed: vec![1, 2, 3],
                        reset_policy: ResetPolicy::MeanFieldPhaseMatched.as_str().into(),
                    },
                )
            },
        },
        CatalogEntry {
            name: "jc-occupation",
            figure: "JC occupation",
            description: "cavity occupation per basis-state class under the full Jaynes-Cummings drive",
            default_config: || {
                cfg(
                    "jc-occupation",
                    &JcOccupationParams {
                        register: RegisterConfig::uniform(4, CHI_HZ),
                        target_occupation: 9.0,
                        detuning_hz: DEFAULT_DETUNING / (2.0 * std::f64::consts::PI),
                        cavity_dim: 30,
                        frame: "dressed".into(),
                        grid: GridConfig {
                            t_end_s: 100e-9,
                            points: 51,
                        },
                    },
                )
            },
        },
        CatalogEntry {
            name: "jc-contrast",
            figure: "JC contrast",
            description: "measurement contrast with Jaynes-Cummings residual occupation, worst-case even state",
            default_config: || {
                cfg(
                    "jc-contrast",
                    &JcContrastParams {
                        register: RegisterConfig::uniform(4, CHI_HZ),
                        target_occupation: 9.0,
                        detuning_hz: DEFAULT_DETUNING / (2.0 * std::f64::consts::PI),
                        cavity_dim: 30,
                        frame: "dressed".into(),
                        jpm: JpmConfig::baseline(OMEGA_C_HZ),
                        grid: GridConfig {
                            t_end_s: 40e-9,
                            points: 81,
                        },
                        contrast_window_s: 40e-9,
                    },
                )
            },
        },
        CatalogEntry {
            name: "steady-state-coherence",
            figure: "steady-state coherence",
            description: "odd-pair coherence after full cavity decay: closed form against the master equation",
            default_config: || {
                cfg(
                    "steady-state-coherence",
                    &SteadyStateParams {
                        occupation: 9.0,
                        eps_over_chi: vec![0.1],
                        nbar: vec![0.0, 0.1],
                    },
                )
            },
        },
    ]
}

fn cfg<P: Serialize>(name: &str, params: &P) -> ScenarioConfig {
    ScenarioConfig::new(name, params)
}

pub fn scenario_names() -> Vec<&'static str> {
    catalog().iter().map(|e| e.name).collect()
}

fn unknown(name: &str) -> CliError {
    CliError::Config(format!(
        "unknown scenario {name:?}; valid scenarios: {}",
        scenario_names().join(", ")
    ))
}

/// Schema and parameter checks without running any physics.
pub fn validate(cfg: &ScenarioConfig) -> Result<(), CliError> {
    match cfg.scenario.as_str() {
        "fig2-drive-occupation" => {
            let p: Fig2Params = cfg.params()?;
            p.register.pulse(p.target_occupation)?;
            p.grid.build()?;
        }
        "fig3-contrast" => {
            let p: Fig3Params = cfg.params()?;
            fig3_register(&p)?.pulse(p.target_occupation)?;
            p.jpm.build()?;
            p.grid.build()?;
            check_dim(p.cavity_dim)?;
        }
        "fig4-mismatch" => {
            let p: Fig4Params = cfg.params()?;
            p.sweep()?;
            p.jpm.build()?;
            check_positive("target_occupation", p.target_occupation)?;
        }
        "decay-envelope" => {
            let p: DecayEnvelopeParams = cfg.params()?;
            p.policy()?;
            if p.occupations.iter().any(|&n| !(n > 0.0)) || p.photons_removed.contains(&0) {
                return Err(CliError::Config("occupations must be > 0 and photons_removed ≥ 1".into()));
            }
        }
        "jc-occupation" => {
            let p: JcOccupationParams = cfg.params()?;
            jc_model(&p.register, p.detuning_hz, p.cavity_dim)?;
            p.register.pulse(p.target_occupation)?;
            parse_frame(&p.frame)?;
            p.grid.build()?;
        }
        "jc-contrast" => {
            let p: JcContrastParams = cfg.params()?;
            jc_model(&p.register, p.detuning_hz, p.cavity_dim)?;
            p.register.pulse(p.target_occupation)?;
            parse_frame(&p.frame)?;
            p.jpm.build()?;
            p.grid.build()?;
        }
        "steady-state-coherence" => {
            let p: SteadyStateParams = cfg.params()?;
            check_positive("occupation", p.occupation)?;
            if p.eps_over_chi.iter().any(|e| !(e.abs() < 1.0)) || p.nbar.iter().any(|n| !(*n >= 0.0)) {
                return Err(CliError::Config("need |eps_over_chi| < 1 and nbar ≥ 0".into()));
            }
        }
        other => return Err(unknown(other)),
    }
    Ok(())
}

fn check_positive(name: &str, v: f64) -> Result<(), CliError> {
    if v > 0.0 && v.is_finite() {
        Ok(())
    } else {
        Err(CliError::Config(format!("{name} must be positive, got {v}")))
    }
}

fn check_dim(d: usize) -> Result<(), CliError> {
    HilbertSpace::new(d).map(|_| ()).map_err(|e| CliError::Config(format!("cavity_dim: {e}")))
}

fn fig3_register(p: &Fig3Params) -> Result<RegisterConfig, CliError> {
    check_positive("chi_hz", p.chi_hz)?;
    Ok(RegisterConfig {
        n_qubits: 4,
        chi_hz: p.chi_hz,
        omega_c_hz: p.omega_c_hz,
        epsilons_hz: vec![0.0; 4],
    })
}

fn jc_model(register: &RegisterConfig, detuning_hz: f64, cavity_dim: usize) -> Result<JcModel, CliError> {
    build_jc_model(&register.build()?, angular(detuning_hz), cavity_dim)
        .map_err(|e| CliError::Config(format!("jc model: {e}")))
}

pub fn run_scenario(cfg: &ScenarioConfig) -> Result<ScenarioResult, CliError> {
    validate(cfg)?;
    let mut out = match cfg.scenario.as_str() {
        "fig2-drive-occupation" => run_fig2(&cfg.params()?)?,
        "fig3-contrast" => run_fig3(&cfg.params()?)?,
        "fig4-mismatch" => run_fig4(&cfg.params()?)?,
        "decay-envelope" => run_decay(&cfg.params()?)?,
        "jc-occupation" => run_jc_occupation(&cfg.params()?)?,
        "jc-contrast" => run_jc_contrast(&cfg.params()?)?,
        "steady-state-coherence" => run_steady_state(&cfg.params()?)?,
        other => return Err(unknown(other)),
    };
    let mut head = ScenarioResult::default();
    head.meta("tool", format!("jpm-parity {}", env!("CARGO_PKG_VERSION")));
    head.meta("scenario", cfg.scenario.clone());
    head.meta("schema_version", SCHEMA_VERSION.to_string());
    head.meta(
        "units",
        "config frequencies are f in Hz with omega = 2*pi*f; gamma rates are 1/s; times are s",
    );
    head.meta(
        "basis",
        "label bit k is qubit k+1 (leftmost slowest); bit 1 pulls the cavity by +chi_k; spaces are qubits x cavity x detector",
    );
    if out.metadata_value("reset_policy").is_none() {
        head.meta("reset_policy", ResetPolicy::MeanFieldPhaseMatched.as_str());
    }
    if out.metadata_value("epsilon_pattern").is_none() {
        head.meta(
            "epsilon_pattern",
            format!("two qubits (0, eps); four qubits {FOUR_QUBIT_PATTERN}"),
        );
    }
    if out.metadata_value("jc_split").is_none() {
        head.meta(
            "jc_split",
            format!("g_k = sqrt(chi_k * Delta), Delta = {} Hz", fmt_num(DEFAULT_DETUNING / (2.0 * std::f64::consts::PI))),
        );
    }
    head.meta("config", serde_json::to_string(&cfg.params).expect("json value serializes"));
    head.metadata.append(&mut out.metadata);
    out.metadata = head.metadata;
    out.check_finite()?;
    Ok(out)
}

fn physics(e: jpm_parity::Error) -> CliError {
    CliError::Physics(e.to_string())
}

fn epsilon_meta(out: &mut ScenarioResult, r: &RegisterConfig) {
    let eps: Vec<String> = r.epsilons_hz.iter().map(|&e| fmt_num(e)).collect();
    out.meta("epsilon_pattern", format!("explicit epsilons_hz [{}]", eps.join(" ")));
}

fn run_fig2(p: &Fig2Params) -> Result<ScenarioResult, CliError> {
    let (r, pulse) = p.register.pulse(p.target_occupation)?;
    let grid = p.grid.build()?;
    let curves = occupation_curves(&r, &pulse, &grid);
    let names: Vec<String> = curves
        .bands
        .iter()
        .map(|b| format!("occ_{:+.4}chi", b.total_shift / r.chi()))
        .collect();
    let mut out = ScenarioResult::new(std::iter::once("t_s".to_string()).chain(names.clone()).collect());
    epsilon_meta(&mut out, &p.register);
    out.meta_num("a0", pulse.a0);
    out.meta_num("t_d_s", pulse.t_d);
    for (name, b) in names.iter().zip(&curves.bands) {
        out.meta(
            &format!("band {name}"),
            format!("parity={} states={}", b.parity.as_str(), b.labels.join(" ")),
        );
    }
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        row.extend(curves.occupations.iter().map(|c| c[i]));
        out.push(row);
    }
    Ok(out)
}

fn run_fig3(p: &Fig3Params) -> Result<ScenarioResult, CliError> {
    let (r, pulse) = fig3_register(p)?.pulse(p.target_occupation)?;
    let jpm = p.jpm.build()?;
    let grid = p.grid.build()?;
    let space = HilbertSpace::new(p.cavity_dim).map_err(physics)?;
    let opts = EvolveOptions::default();
    let chi = r.chi();
    let curve = |shift: f64| -> Result<MeasurementCurve, CliError> {
        let w = r.omega_c() + shift;
        let alpha = drive_amplitude_at(w, &pulse, pulse.t_d);
        detection_probability(alpha, w - jpm.omega_j, &jpm, &space, &grid, &opts).map_err(physics)
    };
    let plus = curve(2.0 * chi)?;
    let minus = curve(-2.0 * chi)?;
    let dark = curve(0.0)?;
    let worst = MeasurementCurve {
        values: plus.values.iter().zip(&minus.values).map(|(a, b)| a.min(*b)).collect(),
        ..plus.clone()
    };
    let contrast = contrast_curve(&worst, &dark).map_err(physics)?;
    let mut out = ScenarioResult::new(
        ["t_s", "bright_p2chi", "bright_m2chi", "dark", "contrast"]
            .map(String::from)
            .to_vec(),
    );
    let mut h = Hygiene::default();
    for c in [&plus, &minus, &dark] {
        h.merge(&c.hygiene);
    }
    out.meta_hygiene(&h);
    out.meta("dark_band", "0 chi (even)");
    out.meta("contrast_definition", "min(bright_p2chi, bright_m2chi) - dark");
    if let Some((t, v)) = contrast.max_until(p.contrast_window_s) {
        out.meta_num("max_contrast", v);
        out.meta_num("t_at_max_contrast_s", t);
    }
    for i in 0..grid.len() {
        out.push(vec![grid[i], plus.values[i], minus.values[i], dark.values[i], contrast.values[i]]);
    }
    Ok(out)
}

fn run_fig4(p: &Fig4Params) -> Result<ScenarioResult, CliError> {
    let jpm = p.jpm.build()?;
    let mut out = ScenarioResult::new(
        [
            "eps_over_chi",
            "even_occupation",
            "even_detection_ideal",
            "even_detection_relaxed",
            "odd_coherence_abs",
            "odd_coherence_arg",
            "even_coherence_abs",
            "even_coherence_arg",
        ]
        .map(String::from)
        .to_vec(),
    );
    out.meta("epsilon_pattern", "two qubits (0, eps)");
    out.meta("even_state", "larger of |alpha_00|^2 and |alpha_11|^2");
    for x in p.sweep()? {
        let reg = RegisterConfig {
            n_qubits: 2,
            chi_hz: p.chi_hz,
            omega_c_hz: p.omega_c_hz,
            epsilons_hz: vec![0.0, x * p.chi_hz],
        };
        let (r, pulse) = reg.pulse(p.target_occupation)?;
        let s = mismatch_amplitudes(&r, &pulse);
        let even = ["00", "11"]
            .iter()
            .map(|l| s.amplitude(l))
            .collect::<Result<Vec<Complex64>, _>>()
            .map_err(physics)?
            .into_iter()
            .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
            .expect("two even states");
        let det = analytic_detection_probability(even, &jpm);
        let odd_c = intra_subspace_decoherence(&s, Parity::Odd).map_err(physics)?;
        let even_c = intra_subspace_decoherence(&s, Parity::Even).map_err(physics)?;
        out.push(vec![
            x,
            even.norm_sqr(),
            det.ideal,
            det.relaxed,
            odd_c.magnitude,
            odd_c.phase,
            even_c.magnitude,
            even_c.phase,
        ]);
    }
    Ok(out)
}

fn run_decay(p: &DecayEnvelopeParams) -> Result<ScenarioResult, CliError> {
    let policy = p.policy()?;
    let points = post_reset_decay_envelope(&p.occupations, &p.photons_removed, policy).map_err(physics)?;
    let mut out = ScenarioResult::new(
        ["occupation", "photons_removed", "f01_re", "f01_im", "f01_abs", "coherence_loss"]
            .map(String::from)
            .to_vec(),
    );
    out.meta("reset_policy", policy.as_str());
    out.meta("branches", "|+sqrt(N)> and |-sqrt(N)>, k photons subtracted from each");
    let worst = points.iter().map(|e| e.coherence_loss).fold(0.0, f64::max);
    out.meta_num("max_coherence_loss", worst);
    for e in points {
        out.push(vec![
            e.occupation,
            e.photons_removed as f64,
            e.f01.re,
            e.f01.im,
            e.f01.norm(),
            e.coherence_loss,
        ]);
    }
    Ok(out)
}

fn jc_meta(out: &mut ScenarioResult, m: &JcModel, detuning_hz: f64, frame: &str) {
    let g: Vec<String> = m.g().iter().map(|g| fmt_num(g / (2.0 * std::f64::consts::PI))).collect();
    out.meta(
        "jc_split",
        format!(
            "g_k = sqrt(chi_k * Delta), Delta = {} Hz, g_hz = [{}]",
            fmt_num(detuning_hz),
            g.join(" ")
        ),
    );
    out.meta("jc_frame", frame);
}

fn run_jc_occupation(p: &JcOccupationParams) -> Result<ScenarioResult, CliError> {
    let (r, pulse) = p.register.pulse(p.target_occupation)?;
    let m = jc_model(&p.register, p.detuning_hz, p.cavity_dim)?;
    let frame = parse_frame(&p.frame)?;
    let grid = p.grid.build()?;
    let run = jc_drive_all(&m, &pulse, &grid, frame).map_err(physics)?;
    let classes = m.equivalence_classes();
    let shifts = band_shifts(&r);
    let mut columns = vec!["t_s".to_string()];
    for (rep, _) in &classes {
        columns.push(format!("jc_{}", m.label(*rep)));
        columns.push(format!("disp_{}", m.label(*rep)));
    }
    let mut out = ScenarioResult::new(columns);
    epsilon_meta(&mut out, &p.register);
    jc_meta(&mut out, &m, p.detuning_hz, frame.as_str());
    out.meta_num("max_norm_error", run.max_norm_error());
    for (rep, members) in &classes {
        let labels: Vec<String> = members.iter().map(|&i| m.label(i)).collect();
        out.meta(&format!("class {}", m.label(*rep)), labels.join(" "));
    }
    for (i, &t) in grid.iter().enumerate() {
        let mut row = vec![t];
        for (rep, _) in &classes {
            row.push(run.trajectories[*rep].occupations[i]);
            let w = r.omega_c() + shifts[*rep].total_shift;
            row.push(drive_amplitude_at(w, &pulse, t).norm_sqr());
        }
        out.push(row);
    }
    Ok(out)
}

fn run_jc_contrast(p: &JcContrastParams) -> Result<ScenarioResult, CliError> {
    let (r, pulse) = p.register.pulse(p.target_occupation)?;
    let m = jc_model(&p.register, p.detuning_hz, p.cavity_dim)?;
    let frame = parse_frame(&p.frame)?;
    let jpm = p.jpm.build()?;
    let grid = p.grid.build()?;
    let opts = EvolveOptions::default();
    let jc = jc_contrast(&m, &pulse, &jpm, DarkChoice::WorstCase, frame, &grid, &opts).map_err(physics)?;
    let disp = dispersive_reference(&r, &pulse, &jpm, &jc.bright_label, &jc.dark_label, p.cavity_dim, &grid)?;
    let mut out = ScenarioResult::new(
        ["t_s", "jc_bright", "jc_dark", "jc_contrast", "disp_bright", "disp_dark", "disp_contrast"]
            .map(String::from)
            .to_vec(),
    );
    epsilon_meta(&mut out, &p.register);
    jc_meta(&mut out, &m, p.detuning_hz, frame.as_str());
    out.meta("bright_state", jc.bright_label.clone());
    out.meta("dark_state", format!("{} (worst-case even)", jc.dark_label));
    out.meta_num("dark_residual_occupation", jc.dark_occupation);
    let mut h = Hygiene::default();
    for c in [&jc.bright, &jc.dark, &disp.0, &disp.1] {
        h.merge(&c.hygiene);
    }
    out.meta_hygiene(&h);
    let disp_contrast = contrast_curve(&disp.0, &disp.1).map_err(physics)?;
    if let Some((t, v)) = jc.max_until(p.contrast_window_s) {
        out.meta_num("max_contrast", v);
        out.meta_num("t_at_max_contrast_s", t);
    }
    if let Some((_, v)) = disp_contrast.max_until(p.contrast_window_s) {
        out.meta_num("max_dispersive_contrast", v);
    }
    for i in 0..grid.len() {
        out.push(vec![
            grid[i],
            jc.bright.values[i],
            jc.dark.values[i],
            jc.contrast.values[i],
            disp.0.values[i],
            disp.1.values[i],
            disp_contrast.values[i],
        ]);
    }
    Ok(out)
}

/// Bright and dark curves for the same labels with coherent inputs from the
/// dispersive closed form.
pub fn dispersive_reference(
    r: &QubitRegister,
    pulse: &jpm_parity::DrivePulse,
    jpm: &jpm_parity::JpmParams,
    bright: &str,
    dark: &str,
    cavity_dim: usize,
    grid: &[f64],
) -> Result<(MeasurementCurve, MeasurementCurve), CliError> {
    let space = HilbertSpace::new(cavity_dim).map_err(physics)?;
    let shifts = band_shifts(r);
    let curve = |label: &str| -> Result<MeasurementCurve, CliError> {
        let s = shifts
            .iter()
            .find(|s| s.label == label)
            .ok_or_else(|| CliError::Physics(format!("no basis state {label}")))?;
        let w = r.omega_c() + s.total_shift;
        let alpha = drive_amplitude_at(w, pulse, pulse.t_d);
        detection_probability(alpha, w - jpm.omega_j, jpm, &space, grid, &EvolveOptions::default()).map_err(physics)
    };
    Ok((curve(bright)?, curve(dark)?))
}

fn run_steady_state(p: &SteadyStateParams) -> Result<ScenarioResult, CliError> {
    let mut out = ScenarioResult::new(
        ["eps_over_chi", "nbar", "analytic", "lindblad_abs", "abs_difference", "residual_occupation"]
            .map(String::from)
            .to_vec(),
    );
    out.meta("epsilon_pattern", "two qubits (0, eps)");
    out.meta("pair", "odd states 01 and 10 after full cavity decay (kappa t = 20)");
    let mut h = Hygiene::default();
    for &x in &p.eps_over_chi {
        for &nbar in &p.nbar {
            let c = steady_state_cross_check(p.occupation, x, nbar, &EvolveOptions::default()).map_err(physics)?;
            h.merge(&c.hygiene);
            let f = c.f01.norm();
            out.push(vec![x, nbar, c.analytic, f, (f - c.analytic).abs(), c.residual_occupation]);
        }
    }
    out.meta_hygiene(&h);
    Ok(out)
}
