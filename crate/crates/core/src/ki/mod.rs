//! Koashi-Imoto decomposition of a bipartite state `ρ^{A'R}`: an isometry on
//! `A'` after which the state reads `Σ_c p_c |c⟩⟨c| ⊗ μ_c^N ⊗ ω_c^{QR}`.
//!
//! The route is algebraic: the normalized operators steered onto `A'` by
//! measurements on `R` generate a *-algebra whose block structure
//! `⊕_c M(d_c) ⊗ I_{m_c}` is the decomposition.

mod algebra;
mod blocks;

pub use algebra::{generate_algebra, steered_operators_raw, StarAlgebra, SUPPORT_TOL};
pub use blocks::{decompose_algebra, AlgebraBlock, BlockStructure, BLOCK_TOL};

use rand::Rng;

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat};
use crate::measures::trace_distance_raw;
use crate::random::{ginibre, random_isometry};
use crate::space::TensorSpace;
use crate::state::DensityMatrix;

/// Tolerance used when closing the algebra under products.
pub const ALGEBRA_TOL: f64 = 1e-9;
/// Largest accepted trace distance between the input and its block form.
pub const RECONSTRUCTION_TOL: f64 = 1e-8;
const TIE_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub struct KIBlock {
    pub p: f64,
    pub dim_q: usize,
    pub dim_n: usize,
    /// State of the redundant part, on `("N", dim_n)`.
    pub mu: DensityMatrix,
    /// State of the quantum part with the reference, on `("Q", dim_q), ("R", dim_r)`.
    pub omega: DensityMatrix,
}

#[derive(Clone, Debug)]
pub struct KIDecomposition {
    u_ki: CMat,
    a_label: String,
    dim_a: usize,
    dim_r: usize,
    blocks: Vec<KIBlock>,
    support_dim: usize,
    s_c: f64,
    s_q_given_c: f64,
    reconstruction_error: f64,
}

/// `Tr_R[(I ⊗ X_k) ρ]` over the Gell-Mann basis of everything except `a_label`.
pub fn steered_operators(rho: &DensityMatrix, a_label: &str) -> Result<Vec<CMat>> {
    let (m, dim_a, dim_r) = split_a_first(rho, a_label)?;
    Ok(steered_operators_raw(&m, dim_a, dim_r))
}

/// Reorders `rho` so `a_label` comes first and returns the raw matrix with
/// the dimensions of `A'` and of the merged remainder.
fn split_a_first(rho: &DensityMatrix, a_label: &str) -> Result<(CMat, usize, usize)> {
    let space = rho.space();
    let dim_a = space.dim_of(a_label)?;
    let mut order = vec![a_label.to_string()];
    order.extend(space.labels().filter(|l| *l != a_label).map(str::to_string));
    let permuted = rho.permute(&order)?;
    let dim_r = rho.dim() / dim_a;
    Ok((permuted.into_matrix(), dim_a, dim_r))
}

fn embed_block(target: &mut CMat, offset: usize, dim_r: usize, block: &CMat) {
    let start = offset * dim_r;
    target.view_mut((start, start), (block.nrows(), block.ncols())).copy_from(block);
}

/// Block `c` in `(Q, N, R)` ordering: `p_c · ω_c ⊗ μ_c` with `N` moved between.
fn block_form(b: &KIBlock, dim_r: usize) -> CMat {
    let qrn = linalg::kron(b.omega.matrix(), b.mu.matrix());
    let space = TensorSpace::new([("Q", b.dim_q), ("R", dim_r), ("N", b.dim_n)]).expect("distinct labels");
    let qnr = DensityMatrix::from_raw(space, qrn).permute(&["Q", "N", "R"]).expect("labels present");
    qnr.into_matrix().scale(b.p)
}

/// Orthonormal complement of the columns of `s` inside dimension `s.nrows()`.
fn complement(s: &CMat) -> CMat {
    let d = s.nrows();
    let proj = linalg::identity(d) - s * s.adjoint();
    let (vals, vecs) = linalg::eigh(&proj);
    let keep: Vec<usize> = (0..d).filter(|&i| vals[i] > 0.5).collect();
    let mut out = CMat::zeros(d, keep.len());
    for (j, &i) in keep.iter().enumerate() {
        out.set_column(j, &vecs.column(i));
    }
    out
}

/// Computes the decomposition of `rho` with `a_label` as `A'` and all other
/// subsystems merged into the reference `R`.
///
/// `rng` drives the generic elements used to split the algebra; results are
/// identical up to round-off for any draw.
pub fn ki_decompose<R: Rng + ?Sized>(rho: &DensityMatrix, a_label: &str, rng: &mut R) -> Result<KIDecomposition> {
    let (m, dim_a, dim_r) = split_a_first(rho, a_label)?;
    let rho_a = DensityMatrix::from_raw(
        TensorSpace::new([("A", dim_a), ("R", dim_r)])?,
        m.clone(),
    )
    .partial_trace(&["A"])?
    .into_matrix();
    let ops = steered_operators_raw(&m, dim_a, dim_r);
    let alg = generate_algebra(&ops, &rho_a, ALGEBRA_TOL)?;
    let structure = decompose_algebra(&alg, rng)?;

    // Block bases in A' coordinates, canonically ordered.
    struct Raw {
        basis: CMat,
        dim_q: usize,
        dim_n: usize,
        p: f64,
        first: usize,
    }
    let mut raw: Vec<Raw> = structure
        .blocks
        .into_iter()
        .map(|b| {
            let basis = &alg.support * &b.basis;
            let proj = &basis * basis.adjoint();
            let p = linalg::trace(&(&proj * &rho_a)).re;
            let first = (0..dim_a).find(|&a| proj[(a, a)].re > 1e-6).unwrap_or(dim_a);
            Raw { basis, dim_q: b.dim_q, dim_n: b.dim_n, p, first }
        })
        .collect();
    raw.sort_by(|x, y| {
        if (x.p - y.p).abs() > TIE_TOL {
            y.p.total_cmp(&x.p)
        } else if x.dim_q != y.dim_q {
            y.dim_q.cmp(&x.dim_q)
        } else {
            x.first.cmp(&y.first)
        }
    });

    let mut u_ki = CMat::zeros(dim_a, dim_a);
    let mut row = 0;
    for b in &raw {
        let rows = b.basis.adjoint();
        u_ki.view_mut((row, 0), (rows.nrows(), dim_a)).copy_from(&rows);
        row += rows.nrows();
    }
    let support_dim = row;
    let dead = complement(&alg.support);
    if dead.ncols() > 0 {
        u_ki.view_mut((row, 0), (dead.ncols(), dim_a)).copy_from(&dead.adjoint());
    }

    let full_u = linalg::kron(&u_ki, &linalg::identity(dim_r));
    let transformed = &full_u * &m * full_u.adjoint();
    let mut blocks = Vec::with_capacity(raw.len());
    let mut offset = 0;
    for b in &raw {
        let n = b.dim_q * b.dim_n * dim_r;
        let start = offset * dim_r;
        let sub = linalg::hermitize(&transformed.view((start, start), (n, n)).into_owned());
        let p = linalg::trace(&sub).re;
        if p <= 0.0 {
            return Err(Error::Numerical("block with no weight".into()));
        }
        let space = TensorSpace::new([("Q", b.dim_q), ("N", b.dim_n), ("R", dim_r)])?;
        let state = DensityMatrix::from_raw(space, sub.unscale(p));
        let omega = state.partial_trace(&["Q", "R"])?;
        let mu = state.partial_trace(&["N"])?;
        blocks.push(KIBlock { p, dim_q: b.dim_q, dim_n: b.dim_n, mu, omega });
        offset += b.dim_q * b.dim_n;
    }

    let mut kid = KIDecomposition {
        u_ki,
        a_label: a_label.to_string(),
        dim_a,
        dim_r,
        blocks,
        support_dim,
        s_c: 0.0,
        s_q_given_c: 0.0,
        reconstruction_error: 0.0,
    };
    let probs: Vec<f64> = kid.blocks.iter().map(|b| b.p).collect();
    kid.s_c = linalg::shannon_entropy(&probs).max(0.0);
    kid.s_q_given_c = kid
        .blocks
        .iter()
        .map(|b| b.p * b.omega.partial_trace(&["Q"]).expect("Q present").entropy())
        .sum::<f64>()
        .max(0.0);
    kid.reconstruction_error = trace_distance_raw(&transformed, &kid.block_form_matrix());
    if kid.reconstruction_error > RECONSTRUCTION_TOL {
        return Err(Error::Numerical(format!(
            "decomposition reproduces the state only to trace distance {:.3e}",
            kid.reconstruction_error
        )));
    }
    Ok(kid)
}

impl KIDecomposition {
    /// Unitary on `A'`: rows are the block bases (`|i⟩_Q ⊗ |k⟩_N` at offset
    /// `block_offset(c) + i * dim_n + k`) followed by the kernel of `ρ_A'`.
    pub fn u_ki(&self) -> &CMat {
        &self.u_ki
    }

    pub fn a_label(&self) -> &str {
        &self.a_label
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn blocks(&self) -> &[KIBlock] {
        &self.blocks
    }

    pub fn support_dim(&self) -> usize {
        self.support_dim
    }

    pub fn block_offset(&self, c: usize) -> usize {
        self.blocks[..c].iter().map(|b| b.dim_q * b.dim_n).sum()
    }

    pub fn probs(&self) -> Vec<f64> {
        self.blocks.iter().map(|b| b.p).collect()
    }

    pub fn s_c(&self) -> f64 {
        self.s_c
    }

    pub fn s_q_given_c(&self) -> f64 {
        self.s_q_given_c
    }

    pub fn s_cq(&self) -> f64 {
        self.s_c + self.s_q_given_c
    }

    pub fn reconstruction_error(&self) -> f64 {
        self.reconstruction_error
    }

    pub fn max_dim_q(&self) -> usize {
        self.blocks.iter().map(|b| b.dim_q).max().unwrap_or(1)
    }

    /// `Σ_c p_c |c⟩⟨c| ⊗ μ_c ⊗ ω_c` laid out on the transformed `A' ⊗ R`
    /// space, i.e. the image of the input under `u_ki ⊗ I`.
    pub fn block_form_matrix(&self) -> CMat {
        let n = self.dim_a * self.dim_r;
        let mut out = CMat::zeros(n, n);
        for (c, b) in self.blocks.iter().enumerate() {
            embed_block(&mut out, self.block_offset(c), self.dim_r, &block_form(b, self.dim_r));
        }
        out
    }

    /// `u_ki` as a channel `A' → CNQ`.
    pub fn ki_channel(&self) -> QuantumChannel {
        QuantumChannel::from_kraus_unchecked(vec![self.u_ki.clone()])
    }

    /// Channel `CNQ → A'` that discards each `N_c`, prepares a fresh `μ_c`
    /// and undoes `u_ki`. Kernel directions are mapped back unchanged.
    pub fn reverse_ki_channel(&self) -> QuantumChannel {
        let d = self.dim_a;
        let u_dag = self.u_ki.adjoint();
        let mut kraus = Vec::new();
        for (c, b) in self.blocks.iter().enumerate() {
            let offset = self.block_offset(c);
            let (vals, vecs) = linalg::eigh(b.mu.matrix());
            for (j, &lam) in vals.iter().enumerate() {
                if lam <= linalg::EIGEN_CUTOFF {
                    continue;
                }
                let amp = lam.sqrt();
                for k in 0..b.dim_n {
                    let mut op = CMat::zeros(d, d);
                    for i in 0..b.dim_q {
                        for n in 0..b.dim_n {
                            op[(offset + i * b.dim_n + n, offset + i * b.dim_n + k)] = vecs[(n, j)] * amp;
                        }
                    }
                    kraus.push(&u_dag * op);
                }
            }
        }
        if self.support_dim < d {
            let mut dead = CMat::zeros(d, d);
            for i in self.support_dim..d {
                dead[(i, i)] = linalg::c(1.0, 0.0);
            }
            kraus.push(&u_dag * dead);
        }
        QuantumChannel::from_kraus_unchecked(kraus)
    }

    /// `ω^{CQR} = Σ_c p_c |c⟩⟨c| ⊗ ω_c^{QR}`, with every `Q_c` padded into a
    /// common register of dimension `max_c d_c`.
    pub fn cqr_state(&self) -> DensityMatrix {
        let nc = self.blocks.len();
        let dq = self.max_dim_q();
        let dr = self.dim_r;
        let n = nc * dq * dr;
        let mut out = CMat::zeros(n, n);
        for (c, b) in self.blocks.iter().enumerate() {
            let w = b.omega.matrix().scale(b.p);
            let start = c * dq * dr;
            out.view_mut((start, start), (w.nrows(), w.ncols())).copy_from(&w);
        }
        let space = TensorSpace::new([("C", nc), ("Q", dq), ("R", dr)]).expect("distinct labels");
        DensityMatrix::from_raw(space, out)
    }
}

/// A state with a known decomposition, for tests and benchmarks.
#[derive(Clone, Debug)]
pub struct PlantedState {
    /// State on `("A", dim_a), ("R", dim_r)`.
    pub state: DensityMatrix,
    /// `(p_c, d_c, m_c)` as planted.
    pub structure: Vec<(f64, usize, usize)>,
    pub s_c: f64,
    pub s_q_given_c: f64,
}

/// Builds `Σ_c p_c |c⟩⟨c| ⊗ μ_c ⊗ ω_c^{QR}` from random full-rank `μ_c` and
/// `ω_c`, then scrambles it with a random isometry into `A'` of dimension
/// `Σ d_c m_c + extra_dims`.
///
/// For the planted structure to be the true one, `dim_r` should be at least 2
/// whenever there is more than one block or any `d_c > 1`.
pub fn planted_state<R: Rng + ?Sized>(
    structure: &[(f64, usize, usize)],
    dim_r: usize,
    extra_dims: usize,
    rng: &mut R,
) -> Result<PlantedState> {
    if structure.is_empty() || dim_r == 0 {
        return Err(Error::InvalidArgument("empty planted structure".into()));
    }
    let total: f64 = structure.iter().map(|s| s.0).sum();
    if (total - 1.0).abs() > 1e-9 || structure.iter().any(|s| s.0 <= 0.0 || s.1 == 0 || s.2 == 0) {
        return Err(Error::InvalidArgument("planted weights must be positive and sum to 1".into()));
    }
    let inner: usize = structure.iter().map(|s| s.1 * s.2).sum();
    let dim_a = inner + extra_dims;
    let mut form = CMat::zeros(inner * dim_r, inner * dim_r);
    let mut offset = 0;
    let mut s_q_given_c = 0.0;
    for &(p, d, m) in structure {
        let wq = ginibre(d * dim_r, d * dim_r, rng);
        let omega_raw = &wq * wq.adjoint();
        let omega_raw = omega_raw.unscale(linalg::trace(&omega_raw).re);
        let wn = ginibre(m, m, rng);
        let mu_raw = &wn * wn.adjoint();
        let mu_raw = mu_raw.unscale(linalg::trace(&mu_raw).re);
        let omega = DensityMatrix::from_raw(TensorSpace::new([("Q", d), ("R", dim_r)])?, omega_raw);
        let mu = DensityMatrix::from_raw(TensorSpace::single("N", m)?, mu_raw);
        s_q_given_c += p * omega.partial_trace(&["Q"])?.entropy();
        let block = KIBlock { p, dim_q: d, dim_n: m, mu, omega };
        embed_block(&mut form, offset, dim_r, &block_form(&block, dim_r));
        offset += d * m;
    }
    let v = random_isometry(dim_a, inner, rng)?;
    let full = linalg::kron(&v, &linalg::identity(dim_r));
    let rho = &full * form * full.adjoint();
    let state = DensityMatrix::new(TensorSpace::new([("A", dim_a), ("R", dim_r)])?, linalg::hermitize(&rho))?;
    let probs: Vec<f64> = structure.iter().map(|s| s.0).collect();
    Ok(PlantedState { state, structure: structure.to_vec(), s_c: linalg::shannon_entropy(&probs), s_q_given_c })
}
