//! Steered operators and the *-algebra they generate on the support of the
//! marginal.

use crate::error::{Error, Result};
use crate::linalg::{self, CMat, MatrixSpan};

/// Eigenvalues of the marginal at or below this are treated as kernel.
pub const SUPPORT_TOL: f64 = 1e-10;

/// Log-eigenvalue gaps below this are treated as the same modular frequency.
const FREQ_TOL: f64 = 1e-7;

/// `Tr_R[(I ⊗ X_k) ρ]` for the Gell-Mann basis `{X_k}` of `R`; `rho` is a raw
/// matrix on `A ⊗ R` with `A` first.
pub fn steered_operators_raw(rho: &CMat, dim_a: usize, dim_r: usize) -> Vec<CMat> {
    linalg::gell_mann_basis(dim_r)
        .iter()
        .map(|x| {
            let mut out = CMat::zeros(dim_a, dim_a);
            for a in 0..dim_a {
                for b in 0..dim_a {
                    let mut acc = linalg::c(0.0, 0.0);
                    for r in 0..dim_r {
                        for s in 0..dim_r {
                            let xv = x[(s, r)];
                            if xv.re != 0.0 || xv.im != 0.0 {
                                acc += rho[(a * dim_r + r, b * dim_r + s)] * xv;
                            }
                        }
                    }
                    out[(a, b)] = acc;
                }
            }
            out
        })
        .collect()
}

/// A *-algebra of operators on the support of a state, stored as an
/// orthonormal (Hilbert-Schmidt) basis in support coordinates.
#[derive(Clone, Debug)]
pub struct StarAlgebra {
    /// Columns: orthonormal eigenvectors of the marginal spanning its support.
    pub support: CMat,
    /// Eigenvalues of the marginal matching the `support` columns.
    pub weights: Vec<f64>,
    pub basis: Vec<CMat>,
}

impl StarAlgebra {
    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn support_dim(&self) -> usize {
        self.support.ncols()
    }
}

/// Splits `x` (in the eigenbasis of the marginal) into components of fixed
/// `ln λ_a − ln λ_b`. The span generated by these components is the smallest
/// subspace containing `x` that is invariant under `X ↦ ρ^{it} X ρ^{-it}`.
fn modular_components(x: &CMat, groups: &[Vec<(usize, usize)>]) -> Vec<CMat> {
    if groups.len() == 1 {
        return vec![x.clone()];
    }
    groups
        .iter()
        .map(|g| {
            let mut part = CMat::zeros(x.nrows(), x.ncols());
            for &(a, b) in g {
                part[(a, b)] = x[(a, b)];
            }
            part
        })
        .collect()
}

fn frequency_groups(weights: &[f64]) -> Vec<Vec<(usize, usize)>> {
    let logs: Vec<f64> = weights.iter().map(|w| w.ln()).collect();
    let n = weights.len();
    let mut pairs: Vec<(f64, usize, usize)> = Vec::with_capacity(n * n);
    for a in 0..n {
        for b in 0..n {
            pairs.push((logs[a] - logs[b], a, b));
        }
    }
    pairs.sort_by(|x, y| x.0.total_cmp(&y.0));
    let mut groups: Vec<Vec<(usize, usize)>> = Vec::new();
    let mut last = f64::NEG_INFINITY;
    for (f, a, b) in pairs {
        if f - last > FREQ_TOL || groups.is_empty() {
            groups.push(Vec::new());
        }
        last = f;
        groups.last_mut().unwrap().push((a, b));
    }
    groups
}

/// Smallest *-algebra on `support(ρ_A)` containing the identity and the
/// normalized operators `ρ_A^{-1/2} E_k ρ_A^{-1/2}`.
///
/// The generating set is first closed under the modular flow of `ρ_A`, which
/// the algebra of the decomposition must respect; without that step two
/// non-orthogonal pure states flagged by a classical reference would produce
/// a commutative algebra instead of one 2x2 block. Products of a flow-invariant
/// generating set stay invariant, so only the generators need splitting.
pub fn generate_algebra(ops: &[CMat], rho_a: &CMat, tol: f64) -> Result<StarAlgebra> {
    let d = rho_a.nrows();
    for op in ops {
        if op.nrows() != d || op.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: op.nrows() });
        }
    }
    let (vals, vecs) = linalg::eigh(rho_a);
    // Descending weight so the support ordering is deterministic.
    let keep: Vec<usize> = (0..d).rev().filter(|&i| vals[i] > SUPPORT_TOL).collect();
    if keep.is_empty() {
        return Err(Error::InvalidState("marginal has no support".into()));
    }
    let s = keep.len();
    let mut support = CMat::zeros(d, s);
    let mut weights = Vec::with_capacity(s);
    for (j, &i) in keep.iter().enumerate() {
        support.set_column(j, &vecs.column(i));
        weights.push(vals[i]);
    }
    let inv_sqrt: Vec<f64> = weights.iter().map(|w| 1.0 / w.sqrt()).collect();
    let groups = frequency_groups(&weights);

    let mut span = MatrixSpan::new(s, s, tol);
    span.push(&linalg::identity(s));
    for op in ops {
        let mut t = support.adjoint() * op * &support;
        for a in 0..s {
            for b in 0..s {
                t[(a, b)] *= inv_sqrt[a] * inv_sqrt[b];
            }
        }
        let t = linalg::hermitize(&t);
        let scale = linalg::hs_norm(&t);
        for part in modular_components(&t, &groups) {
            // Components at round-off level relative to the whole operator are
            // noise, not new directions.
            if linalg::hs_norm(&part) > tol * scale {
                span.push(&part);
            }
        }
    }

    let full = s * s;
    let mut done = 0;
    let mut rounds = 0;
    while done < span.dim() && span.dim() < full {
        rounds += 1;
        if rounds > full {
            return Err(Error::Numerical(format!("algebra closure did not converge in {full} rounds")));
        }
        let n = span.dim();
        for i in 0..n {
            for j in 0..n {
                if i < done && j < done {
                    continue;
                }
                let prod = &span.basis()[i] * &span.basis()[j];
                span.push(&prod);
                if span.dim() == full {
                    break;
                }
            }
            if span.dim() == full {
                break;
            }
        }
        done = n;
    }
    Ok(StarAlgebra { support, weights, basis: span.into_basis() })
}
