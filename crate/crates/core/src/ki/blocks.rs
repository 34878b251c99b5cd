//! Block structure of a finite-dimensional *-algebra: center projectors and
//! the tensor factorization of every block as `M(d) ⊗ I_m`.

use rand::Rng;

use super::algebra::StarAlgebra;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, MatrixSpan};
use crate::random::gaussian_complex;

/// Eigenvalue gaps at or below this belong to one cluster.
const SAME_GAP: f64 = 1e-9;
/// Gaps strictly between `SAME_GAP` and this are ambiguous; the draw is redone.
const AMBIGUOUS_GAP: f64 = 1e-7;
/// Largest allowed deviation from the `q ⊗ I_m` form.
pub const BLOCK_TOL: f64 = 1e-8;
const MAX_ATTEMPTS: usize = 16;

#[derive(Clone, Debug)]
pub struct AlgebraBlock {
    /// Orthonormal columns in support coordinates; column `i * dim_n + k`
    /// is `|i⟩_Q ⊗ |k⟩_N`.
    pub basis: CMat,
    pub dim_q: usize,
    pub dim_n: usize,
}

#[derive(Clone, Debug)]
pub struct BlockStructure {
    pub blocks: Vec<AlgebraBlock>,
}

impl BlockStructure {
    pub fn projector(&self, c: usize) -> CMat {
        let b = &self.blocks[c].basis;
        b * b.adjoint()
    }
}

/// Groups ascending eigenvalues into clusters of numerically equal values.
/// `None` when a gap is too close to call.
fn clusters(vals: &[f64]) -> Option<Vec<std::ops::Range<usize>>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..vals.len() {
        let gap = vals[i] - vals[i - 1];
        if gap <= SAME_GAP {
            continue;
        }
        if gap < AMBIGUOUS_GAP {
            return None;
        }
        out.push(start..i);
        start = i;
    }
    if !vals.is_empty() {
        out.push(start..vals.len());
    }
    Some(out)
}

fn random_hermitian<R: Rng + ?Sized>(elements: &[CMat], rng: &mut R) -> CMat {
    let n = elements[0].nrows();
    let mut h = CMat::zeros(n, n);
    for e in elements {
        h += e * gaussian_complex(rng);
    }
    let h = linalg::hermitize(&h);
    let norm = linalg::hs_norm(&h);
    if norm > 0.0 {
        h.unscale(norm)
    } else {
        h
    }
}

fn columns(m: &CMat, range: std::ops::Range<usize>) -> CMat {
    m.columns(range.start, range.len()).into_owned()
}

/// Orthonormal basis of the center `{Z : [Z, B] = 0 for all B}`.
fn center(alg: &StarAlgebra) -> Vec<CMat> {
    let n = alg.dim();
    let s = alg.support_dim();
    let mut m = CMat::zeros(n * s * s, n);
    for j in 0..n {
        for i in 0..n {
            let comm = &alg.basis[j] * &alg.basis[i] - &alg.basis[i] * &alg.basis[j];
            for (k, z) in comm.iter().enumerate() {
                m[(i * s * s + k, j)] = *z;
            }
        }
    }
    let coeffs = linalg::null_space(&m, 1e-6);
    (0..coeffs.ncols())
        .map(|l| {
            let mut z = CMat::zeros(s, s);
            for j in 0..n {
                z += &alg.basis[j] * coeffs[(j, l)];
            }
            z
        })
        .collect()
}

/// Splits the support into minimal central projections.
fn central_blocks<R: Rng + ?Sized>(alg: &StarAlgebra, rng: &mut R) -> Result<Vec<CMat>> {
    let s = alg.support_dim();
    let z = center(alg);
    if z.len() <= 1 {
        return Ok(vec![linalg::identity(s)]);
    }
    for _ in 0..MAX_ATTEMPTS {
        let h = random_hermitian(&z, rng);
        let (vals, vecs) = linalg::eigh(&h);
        match clusters(&vals) {
            Some(groups) if groups.len() == z.len() => {
                return Ok(groups.into_iter().map(|g| columns(&vecs, g)).collect());
            }
            _ => continue,
        }
    }
    Err(Error::Numerical(format!(
        "could not separate {} central blocks in {MAX_ATTEMPTS} attempts",
        z.len()
    )))
}

/// Max deviation of `basis† B basis` from the `q ⊗ I_m` form over all `B`.
fn factor_residual(elements: &[CMat], basis: &CMat, dim_q: usize, dim_n: usize) -> f64 {
    let mut worst = 0.0_f64;
    for b in elements {
        let m = basis.adjoint() * b * basis;
        let mut q = CMat::zeros(dim_q, dim_q);
        for i in 0..dim_q {
            for j in 0..dim_q {
                let mut acc = linalg::c(0.0, 0.0);
                for k in 0..dim_n {
                    acc += m[(i * dim_n + k, j * dim_n + k)];
                }
                q[(i, j)] = acc / dim_n as f64;
            }
        }
        let expected = linalg::kron(&q, &linalg::identity(dim_n));
        worst = worst.max(linalg::max_abs(&(m - expected)));
    }
    worst
}

/// Factorizes one block (given by its restricted algebra elements in block
/// coordinates) as `M(d) ⊗ I_m`; returns the change of basis.
fn factor_block<R: Rng + ?Sized>(elements: &[CMat], dim_q: usize, dim_n: usize, rng: &mut R) -> Result<CMat> {
    let n = dim_q * dim_n;
    if dim_q == 1 {
        return Ok(linalg::identity(n));
    }
    let mut last = f64::INFINITY;
    for _ in 0..MAX_ATTEMPTS {
        let h = random_hermitian(elements, rng);
        let (vals, vecs) = linalg::eigh(&h);
        let groups = match clusters(&vals) {
            Some(g) if g.len() == dim_q && g.iter().all(|r| r.len() == dim_n) => g,
            _ => continue,
        };
        let w: Vec<CMat> = groups.into_iter().map(|g| columns(&vecs, g)).collect();
        let g = random_hermitian(elements, rng);
        let mut basis = CMat::zeros(n, n);
        basis.columns_mut(0, dim_n).copy_from(&w[0]);
        let mut ok = true;
        for i in 1..dim_q {
            let x = w[i].adjoint() * &g * &w[0];
            let scale = (linalg::hs_norm(&x).powi(2) / dim_n as f64).sqrt();
            if scale < 1e-4 {
                ok = false;
                break;
            }
            let f = &w[i] * x.unscale(scale);
            basis.columns_mut(i * dim_n, dim_n).copy_from(&f);
        }
        if !ok || !linalg::is_unitary_columns(&basis, 1e-8) {
            continue;
        }
        let res = factor_residual(elements, &basis, dim_q, dim_n);
        if res <= BLOCK_TOL {
            return Ok(basis);
        }
        last = last.min(res);
    }
    Err(Error::Numerical(format!(
        "block factorization residual {last:.3e} above {BLOCK_TOL:e} after {MAX_ATTEMPTS} attempts"
    )))
}

/// Decomposes a *-algebra given by an orthonormal basis closed under products
/// and adjoints into blocks `M(d_c) ⊗ I_{m_c}`.
pub fn decompose_algebra<R: Rng + ?Sized>(alg: &StarAlgebra, rng: &mut R) -> Result<BlockStructure> {
    let mut blocks = Vec::new();
    for v in central_blocks(alg, rng)? {
        let n = v.ncols();
        let mut span = MatrixSpan::new(n, n, 1e-8);
        let restricted: Vec<CMat> = alg.basis.iter().map(|b| v.adjoint() * b * &v).collect();
        for r in &restricted {
            span.push(r);
        }
        let a = span.dim();
        let d = (a as f64).sqrt().round() as usize;
        if d * d != a || d == 0 || n % d != 0 {
            return Err(Error::Numerical(format!(
                "block of size {n} carries a {a}-dimensional algebra, not a full matrix algebra factor"
            )));
        }
        let m = n / d;
        let change = factor_block(span.basis(), d, m, rng)?;
        blocks.push(AlgebraBlock { basis: v * change, dim_q: d, dim_n: m });
    }
    Ok(BlockStructure { blocks })
}
