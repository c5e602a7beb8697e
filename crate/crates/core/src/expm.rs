//! Dense complex matrix exponential by scaling and squaring with diagonal
//! Padé approximants of degree 3, 5, 7, 9 or 13, selected from the 1-norm
//! of the input (Higham 2005).

use nalgebra::DMatrix;
use num_complex::Complex64;

const THETA: [(usize, f64); 4] = [
    (3, 1.495_585_217_958_292e-2),
    (5, 2.539_398_330_063_23e-1),
    (7, 9.504_178_996_162_932e-1),
    (9, 2.097_847_961_257_068),
];
const THETA_13: f64 = 5.371_920_351_148_152;

const B3: [f64; 4] = [120.0, 60.0, 12.0, 1.0];
const B5: [f64; 6] = [30240.0, 15120.0, 3360.0, 420.0, 30.0, 1.0];
const B7: [f64; 8] = [
    17_297_280.0,
    8_648_640.0,
    1_995_840.0,
    277_200.0,
    25_200.0,
    1_512.0,
    56.0,
    1.0,
];
const B9: [f64; 10] = [
    17_643_225_600.0,
    8_821_612_800.0,
    2_075_673_600.0,
    302_702_400.0,
    30_270_240.0,
    2_162_160.0,
    110_880.0,
    3_960.0,
    90.0,
    1.0,
];
const B13: [f64; 14] = [
    64_764_752_532_480_000.0,
    32_382_376_266_240_000.0,
    7_771_770_303_897_600.0,
    1_187_353_796_428_800.0,
    129_060_195_264_000.0,
    10_559_470_521_600.0,
    670_442_572_800.0,
    33_522_128_640.0,
    1_323_241_920.0,
    40_840_800.0,
    960_960.0,
    16_380.0,
    182.0,
    1.0,
];

pub(crate) fn one_norm(a: &DMatrix<Complex64>) -> f64 {
    a.column_iter()
        .map(|c| c.iter().map(|z| z.norm()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// `exp(a)` for a square complex matrix.
///
/// # Panics
/// If `a` is not square.
pub fn expm(a: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let n = a.nrows();
    assert_eq!(n, a.ncols(), "expm requires a square matrix");
    if n == 0 {
        return DMatrix::zeros(0, 0);
    }
    let norm = one_norm(a);
    for &(m, theta) in &THETA {
        if norm <= theta {
            let (u, v) = pade_low(a, m);
            return solve_pade(&u, &v);
        }
    }

    let s = if norm > THETA_13 {
        (norm / THETA_13).log2().ceil().max(0.0) as i32
    } else {
        0
    };
    let scaled = a * Complex64::new(2f64.powi(-s), 0.0);
    let (u, v) = pade13(&scaled);
    let mut r = solve_pade(&u, &v);
    for _ in 0..s {
        r = &r * &r;
    }
    r
}

fn scale(m: &DMatrix<Complex64>, c: f64) -> DMatrix<Complex64> {
    m * Complex64::new(c, 0.0)
}

fn pade_low(a: &DMatrix<Complex64>, m: usize) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let b: &[f64] = match m {
        3 => &B3,
        5 => &B5,
        7 => &B7,
        9 => &B9,
        _ => unreachable!("unsupported Padé degree {m}"),
    };
    let n = a.nrows();
    let ident = DMatrix::<Complex64>::identity(n, n);
    let a2 = a * a;
    // even powers A^0, A^2, A^4, ...
    let mut powers = vec![ident.clone(), a2.clone()];
    while powers.len() <= m / 2 {
        let next = powers.last().unwrap() * &a2;
        powers.push(next);
    }
    let mut u_inner = DMatrix::<Complex64>::zeros(n, n);
    let mut v = DMatrix::<Complex64>::zeros(n, n);
    for (k, p) in powers.iter().enumerate() {
        let odd = 2 * k + 1;
        let even = 2 * k;
        if odd <= m {
            u_inner += scale(p, b[odd]);
        }
        if even <= m {
            v += scale(p, b[even]);
        }
    }
    (a * u_inner, v)
}

fn pade13(a: &DMatrix<Complex64>) -> (DMatrix<Complex64>, DMatrix<Complex64>) {
    let b = &B13;
    let n = a.nrows();
    let ident = DMatrix::<Complex64>::identity(n, n);
    let a2 = a * a;
    let a4 = &a2 * &a2;
    let a6 = &a4 * &a2;

    let u_high = scale(&a6, b[13]) + scale(&a4, b[11]) + scale(&a2, b[9]);
    let u_inner =
        &a6 * u_high + scale(&a6, b[7]) + scale(&a4, b[5]) + scale(&a2, b[3]) + scale(&ident, b[1]);
    let u = a * u_inner;

    let v_high = scale(&a6, b[12]) + scale(&a4, b[10]) + scale(&a2, b[8]);
    let v = &a6 * v_high + scale(&a6, b[6]) + scale(&a4, b[4]) + scale(&a2, b[2]) + scale(&ident, b[0]);
    (u, v)
}

fn solve_pade(u: &DMatrix<Complex64>, v: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    let p = v + u;
    let q = v - u;
    q.lu()
        .solve(&p)
        .expect("Padé denominator is singular; input norm out of range")
}
