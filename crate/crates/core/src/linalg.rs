//! Small dense complex linear algebra helpers on top of `nalgebra`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub type CMat = DMatrix<Complex64>;
pub type CVec = DVector<Complex64>;

/// Eigenvalues below this are treated as exact zeros inside entropy sums.
pub const EIGEN_CUTOFF: f64 = 1e-12;

/// Residual norms below this never grow a [`MatrixSpan`].
const SPAN_FLOOR: f64 = 1e-12;

const JACOBI_SWEEPS: usize = 100;

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

pub fn identity(n: usize) -> CMat {
    CMat::identity(n, n)
}

pub fn hermitize(m: &CMat) -> CMat {
    (m + m.adjoint()).scale(0.5)
}

pub fn trace(m: &CMat) -> Complex64 {
    m.diagonal().iter().sum()
}

pub fn max_abs(m: &CMat) -> f64 {
    m.iter().fold(0.0_f64, |acc, z| acc.max(z.norm()))
}

/// Row-major Kronecker product: index `(i_a * rows_b + i_b, j_a * cols_b + j_b)`.
pub fn kron(a: &CMat, b: &CMat) -> CMat {
    a.kronecker(b)
}

pub fn kron_vec(a: &CVec, b: &CVec) -> CVec {
    let mut out = CVec::zeros(a.len() * b.len());
    for (i, x) in a.iter().enumerate() {
        for (j, y) in b.iter().enumerate() {
            out[i * b.len() + j] = x * y;
        }
    }
    out
}

/// Eigenvalues of a Hermitian matrix in ascending order. The input is
/// hermitized first.
pub fn eigvalsh(m: &CMat) -> Vec<f64> {
    let n = m.nrows();
    match n {
        0 => Vec::new(),
        1 => vec![m[(0, 0)].re],
        2 => {
            let a = m[(0, 0)].re;
            let d = m[(1, 1)].re;
            let b = (m[(0, 1)] + m[(1, 0)].conj()) * 0.5;
            let mean = 0.5 * (a + d);
            let half = 0.5 * (a - d);
            let r = (half * half + b.norm_sqr()).sqrt();
            vec![mean - r, mean + r]
        }
        _ => {
            let mut v: Vec<f64> = hermitize(m).symmetric_eigenvalues().iter().copied().collect();
            v.sort_by(|x, y| x.total_cmp(y));
            v
        }
    }
}

/// Eigen-decomposition of a Hermitian matrix: ascending eigenvalues and the
/// matching unit eigenvectors as columns.
///
/// Cyclic Jacobi rotations. nalgebra's `symmetric_eigen` returns wrong
/// eigenvectors on some inputs with repeated eigenvalues (block-diagonal and
/// Kronecker-structured matrices are typical), which this code meets
/// constantly.
pub fn eigh(m: &CMat) -> (Vec<f64>, CMat) {
    let n = m.nrows();
    let mut a = hermitize(m);
    let mut v = identity(n);
    let total = hs_norm(&a);
    let target = (f64::EPSILON * total).powi(2);
    for _ in 0..JACOBI_SWEEPS {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[(p, q)].norm_sqr();
            }
        }
        if off <= target {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[(p, q)];
                let mag = apq.norm();
                if mag <= f64::MIN_POSITIVE {
                    continue;
                }
                let phase = apq / mag;
                let theta = (a[(q, q)].re - a[(p, p)].re) / (2.0 * mag);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let cs = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * cs;
                let back = phase.conj();
                // Columns: p ← c·p − s e^{−iφ}·q, q ← s·p + c e^{−iφ}·q.
                for k in 0..n {
                    let (x, y) = (a[(k, p)], a[(k, q)]);
                    a[(k, p)] = x * cs - y * back * sn;
                    a[(k, q)] = x * sn + y * back * cs;
                    let (x, y) = (v[(k, p)], v[(k, q)]);
                    v[(k, p)] = x * cs - y * back * sn;
                    v[(k, q)] = x * sn + y * back * cs;
                }
                // Rows with the conjugate coefficients.
                for k in 0..n {
                    let (x, y) = (a[(p, k)], a[(q, k)]);
                    a[(p, k)] = x * cs - y * phase * sn;
                    a[(q, k)] = x * sn + y * phase * cs;
                }
                a[(p, q)] = c(0.0, 0.0);
                a[(q, p)] = c(0.0, 0.0);
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[(i, i)].re.total_cmp(&a[(j, j)].re));
    let values = order.iter().map(|&i| a[(i, i)].re).collect();
    let mut vectors = CMat::zeros(n, n);
    for (dst, &src) in order.iter().enumerate() {
        vectors.set_column(dst, &v.column(src));
    }
    (values, vectors)
}

/// Shannon entropy in bits of a spectrum; entries at or below the cutoff
/// contribute nothing.
pub fn spectrum_entropy(values: &[f64]) -> f64 {
    values
        .iter()
        .filter(|&&l| l > EIGEN_CUTOFF)
        .map(|&l| -l * l.log2())
        .fold(0.0, |acc, v| acc + v)
}

/// Von Neumann entropy (bits) of a Hermitian PSD matrix given as raw data.
pub fn matrix_entropy(m: &CMat) -> f64 {
    spectrum_entropy(&eigvalsh(m))
}

/// Binary entropy h(p) in bits.
pub fn binary_entropy(p: f64) -> f64 {
    spectrum_entropy(&[p, 1.0 - p])
}

/// Shannon entropy in bits of a probability vector.
pub fn shannon_entropy(p: &[f64]) -> f64 {
    spectrum_entropy(p)
}

/// Principal square root of a PSD matrix; negative round-off is clamped.
pub fn psd_sqrt(m: &CMat) -> CMat {
    psd_function(m, |x| x.max(0.0).sqrt())
}

/// Applies `f` to the spectrum of a Hermitian matrix.
pub fn psd_function(m: &CMat, f: impl Fn(f64) -> f64) -> CMat {
    let (vals, vecs) = eigh(m);
    let n = vals.len();
    let mut scaled = vecs.clone();
    for j in 0..n {
        let s = f(vals[j]);
        for i in 0..n {
            scaled[(i, j)] *= s;
        }
    }
    scaled * vecs.adjoint()
}

/// Sum of singular values.
pub fn trace_norm(m: &CMat) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    m.clone().singular_values().iter().sum()
}

/// Hilbert-Schmidt inner product `Tr(a† b)`.
pub fn hs_inner(a: &CMat, b: &CMat) -> Complex64 {
    a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum()
}

pub fn hs_norm(a: &CMat) -> f64 {
    a.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Orthonormal basis (Hilbert-Schmidt) of a growing span of equally sized
/// matrices. Gram-Schmidt with one re-orthogonalisation pass.
#[derive(Clone, Debug)]
pub struct MatrixSpan {
    rows: usize,
    cols: usize,
    tol: f64,
    basis: Vec<CMat>,
}

impl MatrixSpan {
    pub fn new(rows: usize, cols: usize, tol: f64) -> Self {
        Self { rows, cols, tol, basis: Vec::new() }
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn basis(&self) -> &[CMat] {
        &self.basis
    }

    pub fn into_basis(self) -> Vec<CMat> {
        self.basis
    }

    /// Component of `m` orthogonal to the current span.
    pub fn residual(&self, m: &CMat) -> CMat {
        let mut r = m.clone();
        for _ in 0..2 {
            for b in &self.basis {
                let coeff = hs_inner(b, &r);
                r -= b * coeff;
            }
        }
        r
    }

    /// Adds `m` if it is not already in the span (relative tolerance).
    /// Returns whether the span grew.
    pub fn push(&mut self, m: &CMat) -> bool {
        debug_assert_eq!((m.nrows(), m.ncols()), (self.rows, self.cols));
        let scale = hs_norm(m);
        if scale == 0.0 {
            return false;
        }
        let r = self.residual(m);
        let rn = hs_norm(&r);
        if rn <= self.tol * scale || rn <= SPAN_FLOOR {
            return false;
        }
        self.basis.push(r.unscale(rn));
        true
    }
}

/// Orthonormal basis of the null space of `m` (columns), using the
/// eigen-decomposition of `m† m` with an absolute threshold on singular values.
pub fn null_space(m: &CMat, tol: f64) -> CMat {
    let gram = m.adjoint() * m;
    let (vals, vecs) = eigh(&gram);
    let keep: Vec<usize> = (0..vals.len()).filter(|&i| vals[i].max(0.0).sqrt() <= tol).collect();
    let mut out = CMat::zeros(m.ncols(), keep.len());
    for (k, &i) in keep.iter().enumerate() {
        out.set_column(k, &vecs.column(i));
    }
    out
}

/// Orthonormal columns spanning the column space of `m` (QR based).
pub fn orthonormal_columns(m: &CMat) -> CMat {
    let qr = m.clone().qr();
    let q = qr.q();
    let r = qr.r();
    // Fix the phase so the diagonal of R is real positive; this makes the map
    // from raw parameters to isometries smooth and deterministic.
    let mut q = q;
    for j in 0..q.ncols().min(r.nrows()) {
        let d = r[(j, j)];
        let n = d.norm();
        if n > 0.0 {
            let phase = d / n;
            for i in 0..q.nrows() {
                q[(i, j)] *= phase;
            }
        }
    }
    q
}

pub fn is_unitary_columns(m: &CMat, tol: f64) -> bool {
    let g = m.adjoint() * m;
    max_abs(&(g - identity(m.ncols()))) <= tol
}

/// Generalised Gell-Mann basis of Hermitian `d x d` matrices, identity first.
/// All elements are orthogonal with Hilbert-Schmidt norm sqrt(2), except the
/// identity (norm sqrt(d)).
pub fn gell_mann_basis(d: usize) -> Vec<CMat> {
    let mut out = vec![identity(d)];
    for j in 0..d {
        for k in (j + 1)..d {
            let mut sym = CMat::zeros(d, d);
            sym[(j, k)] = c(1.0, 0.0);
            sym[(k, j)] = c(1.0, 0.0);
            out.push(sym);
            let mut anti = CMat::zeros(d, d);
            anti[(j, k)] = c(0.0, -1.0);
            anti[(k, j)] = c(0.0, 1.0);
            out.push(anti);
        }
    }
    for l in 1..d {
        let norm = (2.0 / (l * (l + 1)) as f64).sqrt();
        let mut diag = CMat::zeros(d, d);
        for j in 0..l {
            diag[(j, j)] = c(norm, 0.0);
        }
        diag[(l, l)] = c(-(l as f64) * norm, 0.0);
        out.push(diag);
    }
    out
}
