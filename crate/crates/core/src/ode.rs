//! Adaptive Dormand–Prince 5(4) integrator for complex linear-algebra
//! states stored as flat buffers.
//!
//! Steps are clipped to land exactly on every requested output time, so no
//! dense-output interpolation is involved and results are bit-reproducible.

use num_complex::Complex64;

use crate::error::{Error, Result};

const C2: f64 = 1.0 / 5.0;
const C3: f64 = 3.0 / 10.0;
const C4: f64 = 4.0 / 5.0;
const C5: f64 = 8.0 / 9.0;

const A21: f64 = 1.0 / 5.0;
const A31: f64 = 3.0 / 40.0;
const A32: f64 = 9.0 / 40.0;
const A41: f64 = 44.0 / 45.0;
const A42: f64 = -56.0 / 15.0;
const A43: f64 = 32.0 / 9.0;
const A51: f64 = 19372.0 / 6561.0;
const A52: f64 = -25360.0 / 2187.0;
const A53: f64 = 64448.0 / 6561.0;
const A54: f64 = -212.0 / 729.0;
const A61: f64 = 9017.0 / 3168.0;
const A62: f64 = -355.0 / 33.0;
const A63: f64 = 46732.0 / 5247.0;
const A64: f64 = 49.0 / 176.0;
const A65: f64 = -5103.0 / 18656.0;
const A71: f64 = 35.0 / 384.0;
const A73: f64 = 500.0 / 1113.0;
const A74: f64 = 125.0 / 192.0;
const A75: f64 = -2187.0 / 6784.0;
const A76: f64 = 11.0 / 84.0;

const E1: f64 = 71.0 / 57600.0;
const E3: f64 = -71.0 / 16695.0;
const E4: f64 = 71.0 / 1920.0;
const E5: f64 = -17253.0 / 339200.0;
const E6: f64 = 22.0 / 525.0;
const E7: f64 = -1.0 / 40.0;

#[derive(Clone, Copy, Debug)]
pub struct OdeOptions {
    pub rtol: f64,
    pub atol: f64,
    /// Hard cap on attempted steps.
    pub max_steps: usize,
    /// Optional upper bound on the step size.
    pub max_step: Option<f64>,
}

impl OdeOptions {
    pub fn with_tol(tol: f64) -> Self {
        Self {
            rtol: tol,
            atol: tol,
            ..Self::default()
        }
    }
}

impl Default for OdeOptions {
    fn default() -> Self {
        Self {
            rtol: 1e-9,
            atol: 1e-9,
            max_steps: 20_000_000,
            max_step: None,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub struct OdeStats {
    pub accepted: usize,
    pub rejected: usize,
    pub rhs_evals: usize,
}

fn scaled_max_norm(err: &[Complex64], y0: &[Complex64], y1: &[Complex64], opts: &OdeOptions) -> f64 {
    let mut worst = 0.0f64;
    for ((e, a), b) in err.iter().zip(y0).zip(y1) {
        let sc = opts.atol + opts.rtol * a.norm().max(b.norm());
        worst = worst.max(e.norm() / sc);
    }
    worst
}

fn combine(out: &mut [Complex64], y: &[Complex64], h: f64, terms: &[(f64, &[Complex64])]) {
    for (i, o) in out.iter_mut().enumerate() {
        let mut acc = Complex64::new(0.0, 0.0);
        for &(c, k) in terms {
            if c != 0.0 {
                acc += k[i] * c;
            }
        }
        *o = y[i] + acc * h;
    }
}

/// Integrates `y' = rhs(t, y)` from `t0` and returns the state at every time
/// in `t_out` (non-decreasing, all `≥ t0`).
///
/// `project` is applied after every accepted step to both the state and the
/// first-same-as-last derivative; it must be a linear projection that
/// commutes with `rhs` (e.g. Hermitian symmetrization for a Lindbladian).
pub fn integrate<F, P>(
    mut rhs: F,
    t0: f64,
    y0: &[Complex64],
    t_out: &[f64],
    opts: &OdeOptions,
    mut project: P,
) -> Result<(Vec<Vec<Complex64>>, OdeStats)>
where
    F: FnMut(f64, &[Complex64], &mut [Complex64]),
    P: FnMut(&mut [Complex64]),
{
    let n = y0.len();
    let mut stats = OdeStats::default();
    let mut outputs = Vec::with_capacity(t_out.len());
    if t_out.windows(2).any(|w| w[1] < w[0]) || t_out.first().is_some_and(|&t| t < t0) {
        return Err(Error::InvalidParameter(
            "output times must be non-decreasing and not before t0".into(),
        ));
    }
    let t_end = t_out.last().copied().unwrap_or(t0);
    let span = (t_end - t0).abs();

    let mut y = y0.to_vec();
    let mut t = t0;
    let zero = Complex64::new(0.0, 0.0);
    let mut k1 = vec![zero; n];
    let mut k2 = vec![zero; n];
    let mut k3 = vec![zero; n];
    let mut k4 = vec![zero; n];
    let mut k5 = vec![zero; n];
    let mut k6 = vec![zero; n];
    let mut k7 = vec![zero; n];
    let mut ytmp = vec![zero; n];
    let mut ynew = vec![zero; n];
    let mut err = vec![zero; n];

    let mut out_iter = t_out.iter().peekable();
    while let Some(&&to) = out_iter.peek() {
        if to == t0 {
            outputs.push(y.clone());
            out_iter.next();
        } else {
            break;
        }
    }
    if out_iter.peek().is_none() {
        return Ok((outputs, stats));
    }

    rhs(t, &y, &mut k1);
    stats.rhs_evals += 1;

    // initial step (Hairer, Nørsett & Wanner II.4)
    let mut h = {
        let sc: Vec<f64> = y.iter().map(|v| opts.atol + opts.rtol * v.norm()).collect();
        let d0 = y.iter().zip(&sc).map(|(v, s)| v.norm() / s).fold(0.0, f64::max);
        let d1 = k1.iter().zip(&sc).map(|(v, s)| v.norm() / s).fold(0.0, f64::max);
        let h0 = if d0 < 1e-5 || d1 < 1e-5 {
            1e-6 * span
        } else {
            0.01 * d0 / d1
        };
        let h0 = h0.min(span);
        combine(&mut ytmp, &y, h0, &[(1.0, &k1)]);
        rhs(t + h0, &ytmp, &mut k2);
        stats.rhs_evals += 1;
        let d2 = k2
            .iter()
            .zip(&k1)
            .zip(&sc)
            .map(|((a, b), s)| (a - b).norm() / s)
            .fold(0.0, f64::max)
            / h0;
        let h1 = if d1.max(d2) <= 1e-15 {
            (h0 * 1e-3).max(1e-6 * span)
        } else {
            (0.01 / d1.max(d2)).powf(0.2)
        };
        (100.0 * h0).min(h1).min(span)
    };
    if let Some(hmax) = opts.max_step {
        h = h.min(hmax);
    }

    let mut attempts = 0usize;
    while let Some(&&target) = out_iter.peek() {
        if t >= target {
            outputs.push(y.clone());
            out_iter.next();
            continue;
        }
        attempts += 1;
        if attempts > opts.max_steps {
            return Err(Error::TooManySteps {
                t,
                max_steps: opts.max_steps,
            });
        }
        let remaining = target - t;
        let clipped = h >= remaining;
        let step = if clipped { remaining } else { h };
        if step <= 16.0 * f64::EPSILON * t.abs().max(span) {
            return Err(Error::StepSizeUnderflow { t, h: step });
        }

        combine(&mut ytmp, &y, step, &[(A21, &k1)]);
        rhs(t + C2 * step, &ytmp, &mut k2);
        combine(&mut ytmp, &y, step, &[(A31, &k1), (A32, &k2)]);
        rhs(t + C3 * step, &ytmp, &mut k3);
        combine(&mut ytmp, &y, step, &[(A41, &k1), (A42, &k2), (A43, &k3)]);
        rhs(t + C4 * step, &ytmp, &mut k4);
        combine(&mut ytmp, &y, step, &[(A51, &k1), (A52, &k2), (A53, &k3), (A54, &k4)]);
        rhs(t + C5 * step, &ytmp, &mut k5);
        combine(
            &mut ytmp,
            &y,
            step,
            &[(A61, &k1), (A62, &k2), (A63, &k3), (A64, &k4), (A65, &k5)],
        );
        rhs(t + step, &ytmp, &mut k6);
        combine(
            &mut ynew,
            &y,
            step,
            &[(A71, &k1), (A73, &k3), (A74, &k4), (A75, &k5), (A76, &k6)],
        );
        rhs(t + step, &ynew, &mut k7);
        stats.rhs_evals += 6;

        for i in 0..n {
            err[i] = (k1[i] * E1 + k3[i] * E3 + k4[i] * E4 + k5[i] * E5 + k6[i] * E6 + k7[i] * E7) * step;
        }
        let enorm = scaled_max_norm(&err, &y, &ynew, opts);
        if !enorm.is_finite() {
            stats.rejected += 1;
            h = step * 0.2;
            continue;
        }
        if enorm <= 1.0 {
            stats.accepted += 1;
            t = if clipped { target } else { t + step };
            std::mem::swap(&mut y, &mut ynew);
            std::mem::swap(&mut k1, &mut k7);
            project(&mut y);
            project(&mut k1);
            let fac = if enorm == 0.0 {
                5.0
            } else {
                (0.9 * enorm.powf(-0.2)).clamp(0.2, 5.0)
            };
            // a clipped step says nothing about the natural step size
            let proposal = step * fac;
            h = if clipped { h.max(proposal) } else { proposal };
        } else {
            stats.rejected += 1;
            h = step * (0.9 * enorm.powf(-0.2)).clamp(0.2, 1.0);
        }
        if let Some(hmax) = opts.max_step {
            h = h.min(hmax);
        }
    }
    Ok((outputs, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn exponential_growth_and_rotation() {
        // y' = (a + iω) y
        let lam = c(-0.7, 3.0);
        let times: Vec<f64> = (0..=10).map(|i| i as f64 * 0.3).collect();
        let (ys, stats) = integrate(
            |_, y, dy| dy[0] = lam * y[0],
            0.0,
            &[c(1.0, 0.0)],
            &times,
            &OdeOptions::with_tol(1e-11),
            |_| {},
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            let exact = (lam * *t).exp();
            assert!((y[0] - exact).norm() < 1e-9, "t={t}");
        }
        assert!(stats.accepted > 0);
    }

    #[test]
    fn time_dependent_forcing() {
        // y' = cos t, y(0) = 0 → sin t
        let times = [0.0, 1.0, 2.5, 7.0];
        let (ys, _) = integrate(
            |t, _, dy| dy[0] = c(t.cos(), 0.0),
            0.0,
            &[c(0.0, 0.0)],
            &times,
            &OdeOptions::with_tol(1e-12),
            |_| {},
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0].re - t.sin()).abs() < 1e-10);
        }
    }

    #[test]
    fn works_in_nanosecond_units() {
        // rates ~1e9 1/s over 1e-7 s
        let k = 2e9;
        let times: Vec<f64> = (0..=5).map(|i| i as f64 * 2e-8).collect();
        let (ys, _) = integrate(
            |_, y, dy| dy[0] = c(0.0, -k) * y[0],
            0.0,
            &[c(1.0, 0.0)],
            &times,
            &OdeOptions::with_tol(1e-10),
            |_| {},
        )
        .unwrap();
        for (t, y) in times.iter().zip(&ys) {
            assert!((y[0] - c(0.0, -k * t).exp()).norm() < 1e-7);
        }
    }

    #[test]
    fn rejects_decreasing_times() {
        let r = integrate(|_, _, _| {}, 0.0, &[c(1.0, 0.0)], &[1.0, 0.5], &OdeOptions::default(), |_| {});
        assert!(matches!(r, Err(Error::InvalidParameter(_))));
    }

    #[test]
    fn step_budget_is_enforced() {
        let opts = OdeOptions {
            max_steps: 3,
            ..OdeOptions::with_tol(1e-12)
        };
        let r = integrate(
            |_, y, dy| dy[0] = c(0.0, 50.0) * y[0],
            0.0,
            &[c(1.0, 0.0)],
            &[100.0],
            &opts,
            |_| {},
        );
        assert!(matches!(r, Err(Error::TooManySteps { .. })));
    }

    #[test]
    fn deterministic() {
        let run = || {
            integrate(
                |t, y, dy| dy[0] = c(-0.1, t.sin()) * y[0],
                0.0,
                &[c(1.0, 0.5)],
                &[0.5, 3.0, 9.0],
                &OdeOptions::default(),
                |_| {},
            )
            .unwrap()
            .0
        };
        assert_eq!(run(), run());
    }
}
