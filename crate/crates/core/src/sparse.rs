//! Compressed-row view of an operator, used only to apply operators inside
//! ODE right-hand sides. Buffers are column-major `n × m` slices, matching
//! nalgebra's storage.

use nalgebra::DMatrix;
use num_complex::Complex64;

#[derive(Clone, Debug)]
pub(crate) struct Csr {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<usize>,
    vals: Vec<Complex64>,
}

impl Csr {
    pub fn from_dense(m: &DMatrix<Complex64>) -> Self {
        let n = m.nrows();
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        row_ptr.push(0);
        for i in 0..n {
            for j in 0..m.ncols() {
                let v = m[(i, j)];
                if v.re != 0.0 || v.im != 0.0 {
                    cols.push(j);
                    vals.push(v);
                }
            }
            row_ptr.push(cols.len());
        }
        Self {
            n,
            row_ptr,
            cols,
            vals,
        }
    }

    #[cfg(test)]
    pub fn nnz(&self) -> usize {
        self.vals.len()
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    /// `out += scale · (self · x)` where `x` has `ncols` columns.
    pub fn mul_add(&self, x: &[Complex64], ncols: usize, scale: Complex64, out: &mut [Complex64]) {
        let n = self.n;
        debug_assert_eq!(x.len(), n * ncols);
        debug_assert_eq!(out.len(), n * ncols);
        for j in 0..ncols {
            let xc = &x[j * n..(j + 1) * n];
            let oc = &mut out[j * n..(j + 1) * n];
            for i in 0..n {
                let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
                if lo == hi {
                    continue;
                }
                let mut acc = Complex64::new(0.0, 0.0);
                for p in lo..hi {
                    acc += self.vals[p] * xc[self.cols[p]];
                }
                oc[i] += scale * acc;
            }
        }
    }

    /// `out = self · x` (overwrites).
    pub fn mul_into(&self, x: &[Complex64], ncols: usize, out: &mut [Complex64]) {
        out.iter_mut().for_each(|z| *z = Complex64::new(0.0, 0.0));
        self.mul_add(x, ncols, Complex64::new(1.0, 0.0), out);
    }
}

/// Writes the conjugate transpose of the square column-major `src` into `dst`.
pub(crate) fn adjoint_into(src: &[Complex64], n: usize, dst: &mut [Complex64]) {
    for j in 0..n {
        for i in 0..n {
            dst[j + i * n] = src[i + j * n].conj();
        }
    }
}

/// `dst += scale · src†` for square column-major buffers.
pub(crate) fn add_adjoint(src: &[Complex64], n: usize, scale: Complex64, dst: &mut [Complex64]) {
    for j in 0..n {
        for i in 0..n {
            dst[i + j * n] += scale * src[j + i * n].conj();
        }
    }
}
