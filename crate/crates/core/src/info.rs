//! Coherent, Holevo and generalized information of a channel.
//!
//! For an ensemble `{p_x, |φ_x⟩^{AR}}` sent through `N: A → B` the flag
//! register is classical, so every quantity splits into per-branch terms:
//!
//! * `I(B:X) = S(N(Σ p_x φ_x^A)) − Σ p_x S(N(φ_x^A))`
//! * `I(R⟩BX) = Σ p_x [S(N(φ_x^A)) − S(N^c(φ_x^A))]`
//!
//! where `N^c` is the complementary channel: `BRE` is pure on each branch so
//! `S(BR) = S(E)`. Only the `A` marginals of the branches enter.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::linalg::{self, CMat, CVec};
use crate::space::TensorSpace;
use crate::state::{DensityMatrix, PureState, PURE_TOL};

const PROB_TOL: f64 = 1e-10;

/// Classical-quantum ensemble `Σ_x p_x |φ_x⟩⟨φ_x|^{AR} ⊗ |x⟩⟨x|^X`. Branch
/// vectors are ordered `A ⊗ R`.
#[derive(Clone, Debug, PartialEq)]
pub struct CQEnsemble {
    dim_a: usize,
    dim_r: usize,
    probs: Vec<f64>,
    vectors: Vec<CVec>,
}

impl CQEnsemble {
    pub fn new(dim_a: usize, dim_r: usize, entries: Vec<(f64, CVec)>) -> Result<Self> {
        if dim_a == 0 || dim_r == 0 {
            return Err(Error::InvalidEnsemble("dimensions must be positive".into()));
        }
        if entries.is_empty() {
            return Err(Error::InvalidEnsemble("no entries".into()));
        }
        let mut total = 0.0;
        for (i, (p, v)) in entries.iter().enumerate() {
            if !(*p >= 0.0) || !p.is_finite() {
                return Err(Error::InvalidEnsemble(format!("entry {i} has probability {p}")));
            }
            if v.len() != dim_a * dim_r {
                return Err(Error::DimensionMismatch { expected: dim_a * dim_r, found: v.len() });
            }
            let n2 = v.norm_squared();
            if (n2 - 1.0).abs() > PURE_TOL {
                return Err(Error::InvalidEnsemble(format!("entry {i} has squared norm {n2}")));
            }
            total += p;
        }
        if (total - 1.0).abs() > PROB_TOL {
            return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
        }
        let (probs, vectors) = entries.into_iter().unzip();
        Ok(Self { dim_a, dim_r, probs, vectors })
    }

    pub(crate) fn from_parts_unchecked(dim_a: usize, dim_r: usize, probs: Vec<f64>, vectors: Vec<CVec>) -> Self {
        Self { dim_a, dim_r, probs, vectors }
    }

    /// Ensemble of pure `A` states with a trivial reference.
    pub fn classical(dim_a: usize, entries: Vec<(f64, CVec)>) -> Result<Self> {
        Self::new(dim_a, 1, entries)
    }

    /// Single-entry ensemble holding a pure state on `A ⊗ R`.
    pub fn single(state: &PureState) -> Result<Self> {
        let dims = state.space().dims();
        let dim_a = *dims.first().ok_or_else(|| Error::InvalidEnsemble("empty space".into()))?;
        let dim_r = dims[1..].iter().product();
        Self::new(dim_a, dim_r, vec![(1.0, state.vector().clone())])
    }

    pub fn dim_a(&self) -> usize {
        self.dim_a
    }

    pub fn dim_r(&self) -> usize {
        self.dim_r
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn vectors(&self) -> &[CVec] {
        &self.vectors
    }

    pub fn entries(&self) -> impl Iterator<Item = (f64, &CVec)> {
        self.probs.iter().copied().zip(self.vectors.iter())
    }

    /// Branch `x` as a pure state on `("A", dim_a) ⊗ ("R", dim_r)`.
    pub fn branch_state(&self, x: usize) -> PureState {
        let space = TensorSpace::new([("A", self.dim_a), ("R", self.dim_r)]).expect("distinct labels");
        PureState::new(space, self.vectors[x].clone()).expect("validated on construction")
    }

    /// `A` marginals `φ_x^A`.
    pub fn marginals(&self) -> Vec<CMat> {
        self.vectors.iter().map(|v| marginal_a(v, self.dim_a, self.dim_r)).collect()
    }

    /// Checks `|X| ≤ dim_A² + 2`.
    pub fn check_cardinality(&self) -> Result<()> {
        let bound = self.dim_a * self.dim_a + 2;
        if self.len() > bound {
            return Err(Error::InvalidEnsemble(format!("{} entries exceed the bound {bound}", self.len())));
        }
        Ok(())
    }

    /// Product ensemble over `(A₁A₂) ⊗ (R₁R₂)` with flags `(x₁, x₂)`.
    pub fn tensor(&self, other: &CQEnsemble) -> CQEnsemble {
        let (a1, r1, a2, r2) = (self.dim_a, self.dim_r, other.dim_a, other.dim_r);
        let mut probs = Vec::with_capacity(self.len() * other.len());
        let mut vectors = Vec::with_capacity(self.len() * other.len());
        for (p, u) in self.entries() {
            for (q, w) in other.entries() {
                let mut v = CVec::zeros(a1 * a2 * r1 * r2);
                for i1 in 0..a1 {
                    for j1 in 0..r1 {
                        let x = u[i1 * r1 + j1];
                        for i2 in 0..a2 {
                            for j2 in 0..r2 {
                                let a = i1 * a2 + i2;
                                let r = j1 * r2 + j2;
                                v[a * (r1 * r2) + r] = x * w[i2 * r2 + j2];
                            }
                        }
                    }
                }
                probs.push(p * q);
                vectors.push(v);
            }
        }
        CQEnsemble { dim_a: a1 * a2, dim_r: r1 * r2, probs, vectors }
    }

    /// Entries reordered by `order` (a permutation of `0..len`).
    pub fn reordered(&self, order: &[usize]) -> CQEnsemble {
        CQEnsemble {
            dim_a: self.dim_a,
            dim_r: self.dim_r,
            probs: order.iter().map(|&i| self.probs[i]).collect(),
            vectors: order.iter().map(|&i| self.vectors[i].clone()).collect(),
        }
    }

    /// Time-sharing mixture `λ·self ⊕ (1−λ)·other` with disjoint flags.
    pub fn mix(&self, other: &CQEnsemble, lambda: f64) -> Result<CQEnsemble> {
        if self.dim_a != other.dim_a || self.dim_r != other.dim_r {
            return Err(Error::DimensionMismatch { expected: self.dim_a * self.dim_r, found: other.dim_a * other.dim_r });
        }
        if !(0.0..=1.0).contains(&lambda) {
            return Err(Error::InvalidArgument(format!("mixing weight {lambda}")));
        }
        let probs = self
            .probs
            .iter()
            .map(|p| p * lambda)
            .chain(other.probs.iter().map(|p| p * (1.0 - lambda)))
            .collect();
        let vectors = self.vectors.iter().chain(other.vectors.iter()).cloned().collect();
        Ok(CQEnsemble { dim_a: self.dim_a, dim_r: self.dim_r, probs, vectors })
    }
}

/// `Tr_R |v⟩⟨v|` for `v` ordered `A ⊗ R`.
pub(crate) fn marginal_a(v: &CVec, dim_a: usize, dim_r: usize) -> CMat {
    let psi = CMat::from_row_slice(dim_a, dim_r, v.as_slice());
    &psi * psi.adjoint()
}

/// Per-branch quantities for one `A` marginal.
#[derive(Clone, Debug)]
pub(crate) struct BranchTerms {
    pub output: CMat,
    pub s_out: f64,
    pub s_env: f64,
}

impl BranchTerms {
    pub fn new(ch: &QuantumChannel, rho_a: &CMat) -> Self {
        let output = ch.apply_matrix(rho_a);
        let s_out = linalg::matrix_entropy(&output);
        let s_env = linalg::matrix_entropy(&ch.complementary_matrix(rho_a));
        Self { output, s_out, s_env }
    }

    pub fn coherent(&self) -> f64 {
        self.s_out - self.s_env
    }
}

/// `(r_c, r_q)` from cached branch terms.
pub(crate) fn rates_from_terms(probs: &[f64], terms: &[BranchTerms], dim_out: usize) -> (f64, f64) {
    let mut avg = CMat::zeros(dim_out, dim_out);
    let mut cond = 0.0;
    let mut r_q = 0.0;
    for (p, t) in probs.iter().zip(terms) {
        if *p == 0.0 {
            continue;
        }
        avg += t.output.scale(*p);
        cond += p * t.s_out;
        r_q += p * t.coherent();
    }
    (linalg::matrix_entropy(&avg) - cond, r_q)
}

/// Input accepted by [`coherent_information`].
pub enum CoherentSource<'a> {
    /// A state `ρ^A` on the channel input, purified internally.
    Mixed(&'a DensityMatrix),
    /// A pure state on `A ⊗ R` with `A` its first subsystem.
    Pure(&'a PureState),
}

impl<'a> From<&'a DensityMatrix> for CoherentSource<'a> {
    fn from(rho: &'a DensityMatrix) -> Self {
        CoherentSource::Mixed(rho)
    }
}

impl<'a> From<&'a PureState> for CoherentSource<'a> {
    fn from(psi: &'a PureState) -> Self {
        CoherentSource::Pure(psi)
    }
}

/// `I(R⟩B)_σ = S(B) − S(BR)` for `σ = (N ⊗ id)` applied to a purification.
pub fn coherent_information<'a>(source: impl Into<CoherentSource<'a>>, ch: &QuantumChannel) -> Result<f64> {
    let rho_a = match source.into() {
        CoherentSource::Mixed(rho) => {
            if rho.dim() != ch.dim_in() {
                return Err(Error::DimensionMismatch { expected: ch.dim_in(), found: rho.dim() });
            }
            rho.matrix().clone()
        }
        CoherentSource::Pure(psi) => {
            let dims = psi.space().dims();
            let dim_a = dims[0];
            if dim_a != ch.dim_in() {
                return Err(Error::DimensionMismatch { expected: ch.dim_in(), found: dim_a });
            }
            marginal_a(psi.vector(), dim_a, dims[1..].iter().product())
        }
    };
    Ok(BranchTerms::new(ch, &rho_a).coherent())
}

/// Holevo information `I(B:X)` of the ensemble's `A` marginals.
pub fn holevo_information(ens: &CQEnsemble, ch: &QuantumChannel) -> Result<f64> {
    check_input(ens, ch)?;
    let marginals = ens.marginals();
    let terms: Vec<BranchTerms> = marginals.iter().map(|m| BranchTerms::new(ch, m)).collect();
    Ok(rates_from_terms(ens.probs(), &terms, ch.dim_out()).0)
}

/// Holevo information of an ensemble of (possibly mixed) input states.
pub fn holevo_information_states(entries: &[(f64, DensityMatrix)], ch: &QuantumChannel) -> Result<f64> {
    let total: f64 = entries.iter().map(|(p, _)| p).sum();
    if (total - 1.0).abs() > PROB_TOL || entries.iter().any(|(p, _)| *p < 0.0) {
        return Err(Error::InvalidEnsemble(format!("probabilities sum to {total}")));
    }
    let mut avg = CMat::zeros(ch.dim_out(), ch.dim_out());
    let mut cond = 0.0;
    for (p, rho) in entries {
        if rho.dim() != ch.dim_in() {
            return Err(Error::DimensionMismatch { expected: ch.dim_in(), found: rho.dim() });
        }
        let out = ch.apply_matrix(rho.matrix());
        cond += p * linalg::matrix_entropy(&out);
        avg += out.scale(*p);
    }
    Ok(linalg::matrix_entropy(&avg) - cond)
}

/// `I_G = I(B:X) + I(R⟩BX)` together with its two terms.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GeneralizedInfo {
    pub i_g: f64,
    pub r_c: f64,
    pub r_q: f64,
}

/// Generalized information of `ens` through `ch`. The coherent term is
/// returned signed; callers that need a rate clamp it themselves.
pub fn generalized_information(ens: &CQEnsemble, ch: &QuantumChannel) -> Result<GeneralizedInfo> {
    check_input(ens, ch)?;
    let terms: Vec<BranchTerms> = ens.marginals().iter().map(|m| BranchTerms::new(ch, m)).collect();
    let (r_c, r_q) = rates_from_terms(ens.probs(), &terms, ch.dim_out());
    Ok(GeneralizedInfo { i_g: r_c + r_q, r_c, r_q })
}

fn check_input(ens: &CQEnsemble, ch: &QuantumChannel) -> Result<()> {
    if ens.dim_a() != ch.dim_in() {
        return Err(Error::DimensionMismatch { expected: ch.dim_in(), found: ens.dim_a() });
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::c;
    use crate::measures;
    use approx::assert_abs_diff_eq;

    fn ket(v: &[(f64, f64)]) -> CVec {
        let v = CVec::from_iterator(v.len(), v.iter().map(|&(r, i)| c(r, i)));
        let n = v.norm();
        v.unscale(n)
    }

    fn qubit(label: &str) -> TensorSpace {
        TensorSpace::single(label, 2).unwrap()
    }

    /// Direct route: build σ^{BR} explicitly and take entropies of marginals.
    fn coherent_oracle(psi: &PureState, ch: &QuantumChannel) -> f64 {
        let sigma = ch.apply(&psi.density(), "A").unwrap();
        let sb = sigma.partial_trace(&["A"]).unwrap().entropy();
        sb - sigma.entropy()
    }

    #[test]
    fn coherent_information_examples() {
        let mm = DensityMatrix::maximally_mixed(qubit("A"));
        let id = QuantumChannel::identity(2).unwrap();
        assert_abs_diff_eq!(coherent_information(&mm, &id).unwrap(), 1.0, epsilon = 1e-12);

        let full = QuantumChannel::dephasing(0.5).unwrap();
        let bell = PureState::maximally_entangled("A", "R", 2).unwrap();
        assert_abs_diff_eq!(coherent_oracle(&bell, &full), 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(coherent_information(&mm, &full).unwrap(), 0.0, epsilon = 1e-12);

        let deph = QuantumChannel::dephasing(0.1).unwrap();
        let analytic = 1.0 - linalg::binary_entropy(0.1);
        assert_abs_diff_eq!(coherent_oracle(&bell, &deph), analytic, epsilon = 1e-12);
        assert_abs_diff_eq!(coherent_information(&mm, &deph).unwrap(), 0.531004, epsilon = 1e-6);
        assert_abs_diff_eq!(coherent_information(&bell, &deph).unwrap(), analytic, epsilon = 1e-12);

        let qutrit = DensityMatrix::maximally_mixed(TensorSpace::single("A", 3).unwrap());
        assert!(coherent_information(&qutrit, &deph).is_err());
    }

    #[test]
    fn holevo_examples() {
        let id = QuantumChannel::identity(2).unwrap();
        let single = CQEnsemble::classical(2, vec![(1.0, ket(&[(1.0, 0.0), (0.0, 0.0)]))]).unwrap();
        assert_abs_diff_eq!(holevo_information(&single, &id).unwrap(), 0.0, epsilon = 1e-12);

        let bits = CQEnsemble::classical(
            2,
            vec![(0.5, ket(&[(1.0, 0.0), (0.0, 0.0)])), (0.5, ket(&[(0.0, 0.0), (1.0, 0.0)]))],
        )
        .unwrap();
        assert_abs_diff_eq!(holevo_information(&bits, &id).unwrap(), 1.0, epsilon = 1e-12);

        let zero_plus = CQEnsemble::classical(
            2,
            vec![(0.5, ket(&[(1.0, 0.0), (0.0, 0.0)])), (0.5, ket(&[(1.0, 0.0), (1.0, 0.0)]))],
        )
        .unwrap();
        let cos2 = (std::f64::consts::PI / 8.0).cos().powi(2);
        let expected = linalg::binary_entropy(cos2);
        assert_abs_diff_eq!(expected, 0.600876, epsilon = 1e-6);
        assert_abs_diff_eq!(holevo_information(&zero_plus, &id).unwrap(), expected, epsilon = 1e-12);
    }

    #[test]
    fn generalized_information_examples() {
        let id = QuantumChannel::identity(2).unwrap();
        let bell = PureState::maximally_entangled("A", "R", 2).unwrap();
        let g = generalized_information(&CQEnsemble::single(&bell).unwrap(), &id).unwrap();
        assert_abs_diff_eq!(g.i_g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.r_c, 0.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.r_q, 1.0, epsilon = 1e-12);

        let bits = CQEnsemble::classical(
            2,
            vec![(0.5, ket(&[(1.0, 0.0), (0.0, 0.0)])), (0.5, ket(&[(0.0, 0.0), (1.0, 0.0)]))],
        )
        .unwrap();
        let g = generalized_information(&bits, &id).unwrap();
        assert_abs_diff_eq!(g.i_g, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.r_c, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(g.r_q, 0.0, epsilon = 1e-12);
    }

    /// σ^{BRX} as an explicit block-diagonal state; the terms come from the
    /// generic entropy routines only.
    fn gi_oracle(ens: &CQEnsemble, ch: &QuantumChannel) -> (f64, f64) {
        let nx = ens.len();
        let x_space = TensorSpace::single("X", nx).unwrap();
        let mut joint: Option<DensityMatrix> = None;
        for x in 0..nx {
            let branch = ch.apply(&ens.branch_state(x).density(), "A").unwrap();
            let flag = DensityMatrix::basis_state(x_space.clone(), x).unwrap();
            let term = branch.tensor(&flag).unwrap();
            let scaled = DensityMatrix::from_raw(term.space().clone(), term.matrix().scale(ens.probs()[x]));
            joint = Some(match joint {
                None => scaled,
                Some(acc) => DensityMatrix::from_raw(acc.space().clone(), acc.matrix() + scaled.matrix()),
            });
        }
        let sigma = joint.unwrap();
        let r_c = measures::mutual_information(&sigma, &["A"], &["X"]).unwrap();
        let r_q = -measures::conditional_entropy(&sigma, &["R"], &["A", "X"]).unwrap();
        (r_c, r_q)
    }

    #[test]
    fn two_bell_branches_over_half_dephasing_match_term_by_term_oracle() {
        let deph = QuantumChannel::dephasing(0.5).unwrap();
        let bell = PureState::maximally_entangled("A", "R", 2).unwrap();
        let x = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(1.0, 0.0), c(1.0, 0.0), c(0.0, 0.0)]);
        let rotated = linalg::kron(&x, &linalg::identity(2)) * bell.vector();
        let ens = CQEnsemble::new(2, 2, vec![(0.5, bell.vector().clone()), (0.5, rotated.clone())]).unwrap();
        let g = generalized_information(&ens, &deph).unwrap();
        let (oc, oq) = gi_oracle(&ens, &deph);
        assert_abs_diff_eq!(g.r_c, oc, epsilon = 1e-10);
        assert_abs_diff_eq!(g.r_q, oq, epsilon = 1e-10);
        let space = TensorSpace::new([("A", 2), ("R", 2)]).unwrap();
        let avg_branch = 0.5 * coherent_oracle(&bell, &deph)
            + 0.5 * coherent_oracle(&PureState::new(space, rotated).unwrap(), &deph);
        assert_abs_diff_eq!(g.r_q, avg_branch, epsilon = 1e-10);
    }

    #[test]
    fn random_ensembles_match_oracle() {
        use crate::random;
        for seed in 0..10 {
            let mut rng = random::rng_from_seed(seed);
            let space = TensorSpace::new([("A", 2), ("R", 3)]).unwrap();
            let entries = (0..3).map(|_| (1.0 / 3.0, random::random_pure_with(&space, &mut rng).vector().clone())).collect();
            let ens = CQEnsemble::new(2, 3, entries).unwrap();
            let ch = random::random_channel_with(2, 3, 2, &mut rng).unwrap();
            let g = generalized_information(&ens, &ch).unwrap();
            let (oc, oq) = gi_oracle(&ens, &ch);
            assert_abs_diff_eq!(g.r_c, oc, epsilon = 1e-9);
            assert_abs_diff_eq!(g.r_q, oq, epsilon = 1e-9);
        }
    }

    #[test]
    fn rejects_bad_ensembles() {
        let v = ket(&[(1.0, 0.0), (0.0, 0.0)]);
        assert!(CQEnsemble::classical(2, vec![(0.7, v.clone())]).is_err());
        assert!(CQEnsemble::classical(2, vec![(1.0, v.scale(2.0))]).is_err());
        assert!(CQEnsemble::classical(3, vec![(1.0, v)]).is_err());
    }
}
