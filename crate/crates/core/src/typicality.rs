//! Strongly typical sequences, typical and conditionally typical projectors,
//! and the typical projection of a block-form source.
//!
//! A sequence `xⁿ` is typical when `|N(x|xⁿ) − n p(x)| ≤ nδ` for every `x`
//! and symbols of probability zero do not occur at all. Conditional
//! typicality of `yⁿ` given `xⁿ` asks `|N(x,y) − p(y|x) N(x)| ≤ nδ`, again
//! with impossible pairs excluded.

use rand::Rng;

use crate::converse::ExtendedSource;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::space::TensorSpace;
use crate::state::DensityMatrix;

const PROB_TOL: f64 = 1e-12;
/// Absorbs round-off in `n p(x) ± nδ` when comparing with integer counts.
const COUNT_TOL: f64 = 1e-9;
/// Longest block accepted by [`enumerate_typical`].
pub const MAX_ENUM_LEN: usize = 20;
/// Largest `n·log₂ d` for dense projectors.
pub const MAX_LOG2_DIM: f64 = 12.0;

#[derive(Clone, Debug, PartialEq)]
pub struct TypicalSpec {
    p: Vec<f64>,
    n: usize,
    delta: f64,
}

impl TypicalSpec {
    pub fn new(p: Vec<f64>, n: usize, delta: f64) -> Result<Self> {
        check_distribution(&p)?;
        if n == 0 {
            return Err(Error::InvalidArgument("block length must be at least 1".into()));
        }
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("slack must be positive, got {delta}")));
        }
        Ok(Self { p, n, delta })
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }

    /// Inclusive range of allowed counts for symbol `x`.
    fn count_range(&self, x: usize) -> (usize, usize) {
        count_range(self.p[x], self.n, self.n as f64 * self.delta)
    }

    pub fn entropy(&self) -> f64 {
        linalg::shannon_entropy(&self.p)
    }

    /// `c = Σ_x |log₂ p(x)|` over the support.
    pub fn constant(&self) -> f64 {
        log_sum(&self.p)
    }

    /// `2^{n[H(p) + cδ]}`.
    pub fn dimension_bound(&self) -> f64 {
        (self.n as f64 * (self.entropy() + self.constant() * self.delta)).exp2()
    }
}

fn check_distribution(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidArgument("empty distribution".into()));
    }
    if p.iter().any(|v| !(*v >= 0.0) || !v.is_finite()) {
        return Err(Error::InvalidArgument("probabilities must be non-negative".into()));
    }
    let total: f64 = p.iter().sum();
    if (total - 1.0).abs() > PROB_TOL {
        return Err(Error::InvalidArgument(format!("probabilities sum to {total}")));
    }
    Ok(())
}

fn log_sum(p: &[f64]) -> f64 {
    p.iter().filter(|&&v| v > 0.0).map(|v| v.log2().abs()).sum()
}

/// Allowed counts `N` with `|N − len·p| ≤ slack` out of `len` draws.
fn count_range(p: f64, len: usize, slack: f64) -> (usize, usize) {
    if p == 0.0 {
        return (0, 0);
    }
    let mean = len as f64 * p;
    let lo = (mean - slack - COUNT_TOL).ceil().max(0.0) as usize;
    let hi = ((mean + slack + COUNT_TOL).floor().max(0.0) as usize).min(len);
    (lo, hi)
}

fn counts(seq: &[usize], alphabet: usize) -> Result<Vec<usize>> {
    let mut out = vec![0; alphabet];
    for &s in seq {
        if s >= alphabet {
            return Err(Error::InvalidArgument(format!("symbol {s} outside an alphabet of size {alphabet}")));
        }
        out[s] += 1;
    }
    Ok(out)
}

pub fn is_typical(seq: &[usize], spec: &TypicalSpec) -> Result<bool> {
    if seq.len() != spec.n {
        return Err(Error::DimensionMismatch { expected: spec.n, found: seq.len() });
    }
    let cnt = counts(seq, spec.p.len())?;
    Ok((0..spec.p.len()).all(|x| {
        let (lo, hi) = spec.count_range(x);
        cnt[x] >= lo && cnt[x] <= hi
    }))
}

/// All typical sequences in lexicographic order (`n ≤ 20`).
pub fn enumerate_typical(spec: &TypicalSpec) -> Result<impl Iterator<Item = Vec<usize>>> {
    if spec.n > MAX_ENUM_LEN {
        return Err(Error::Resource(format!("enumeration limited to n ≤ {MAX_ENUM_LEN}")));
    }
    let ranges: Vec<(usize, usize)> = (0..spec.p.len()).map(|x| spec.count_range(x)).collect();
    let mut out = Vec::new();
    let mut seq = Vec::with_capacity(spec.n);
    let mut cnt = vec![0; spec.p.len()];
    enumerate_rec(&ranges, spec.n, &mut seq, &mut cnt, &mut out);
    Ok(out.into_iter())
}

fn enumerate_rec(
    ranges: &[(usize, usize)],
    n: usize,
    seq: &mut Vec<usize>,
    cnt: &mut [usize],
    out: &mut Vec<Vec<usize>>,
) {
    let left = n - seq.len();
    // Remaining positions must cover every unmet lower bound.
    let deficit: usize = ranges.iter().zip(cnt.iter()).map(|(r, &k)| r.0.saturating_sub(k)).sum();
    if deficit > left {
        return;
    }
    if left == 0 {
        out.push(seq.clone());
        return;
    }
    for x in 0..ranges.len() {
        if cnt[x] < ranges[x].1 {
            cnt[x] += 1;
            seq.push(x);
            enumerate_rec(ranges, n, seq, cnt, out);
            seq.pop();
            cnt[x] -= 1;
        }
    }
}

fn ln_factorials(n: usize) -> Vec<f64> {
    let mut out = vec![0.0; n + 1];
    for k in 1..=n {
        out[k] = out[k - 1] + (k as f64).ln();
    }
    out
}

/// Visits every count vector with entries in `ranges` summing to `len`.
fn for_each_type(ranges: &[(usize, usize)], len: usize, f: &mut impl FnMut(&[usize])) {
    fn rec(ranges: &[(usize, usize)], left: usize, cur: &mut Vec<usize>, f: &mut impl FnMut(&[usize])) {
        let i = cur.len();
        if i == ranges.len() {
            if left == 0 {
                f(cur);
            }
            return;
        }
        let rest_max: usize = ranges[i + 1..].iter().map(|r| r.1).sum();
        let (lo, hi) = ranges[i];
        for k in lo..=hi.min(left) {
            if left - k > rest_max {
                continue;
            }
            cur.push(k);
            rec(ranges, left - k, cur, f);
            cur.pop();
        }
    }
    rec(ranges, len, &mut Vec::with_capacity(ranges.len()), f);
}

/// Number of typical sequences and their total probability, summed over
/// type classes.
fn type_sums(p: &[f64], len: usize, slack: f64, lnf: &[f64]) -> (f64, f64) {
    let ranges: Vec<(usize, usize)> = p.iter().map(|&q| count_range(q, len, slack)).collect();
    let mut count = 0.0;
    let mut mass = 0.0;
    for_each_type(&ranges, len, &mut |k| {
        let ln_multi = lnf[len] - k.iter().map(|&v| lnf[v]).sum::<f64>();
        let ln_prob: f64 = k.iter().zip(p).filter(|(&v, _)| v > 0).map(|(&v, &q)| v as f64 * q.ln()).sum();
        count += ln_multi.exp();
        mass += (ln_multi + ln_prob).exp();
    });
    (count, mass)
}

/// `|T^n_δ|`, exact for moderate `n` (computed in floating point from
/// log-factorials, so exact up to 2^53).
pub fn typical_count(spec: &TypicalSpec) -> f64 {
    let lnf = ln_factorials(spec.n);
    type_sums(&spec.p, spec.n, spec.n as f64 * spec.delta, &lnf).0.round()
}

/// `log₂ |T^n_δ|`, finite where [`typical_count`] overflows; `-inf` for an
/// empty set.
pub fn typical_log2_count(spec: &TypicalSpec) -> f64 {
    let lnf = ln_factorials(spec.n);
    let ranges: Vec<(usize, usize)> = (0..spec.p.len()).map(|x| spec.count_range(x)).collect();
    let mut terms = Vec::new();
    for_each_type(&ranges, spec.n, &mut |k| terms.push(lnf[spec.n] - k.iter().map(|&v| lnf[v]).sum::<f64>()));
    let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if top == f64::NEG_INFINITY {
        return top;
    }
    (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()) / std::f64::consts::LN_2
}

/// `Pr(xⁿ ∈ T^n_δ)` under the i.i.d. distribution.
pub fn typical_mass(spec: &TypicalSpec) -> f64 {
    let lnf = ln_factorials(spec.n);
    type_sums(&spec.p, spec.n, spec.n as f64 * spec.delta, &lnf).1
}

/// Fraction of `samples` i.i.d. draws of length `n` that are typical.
pub fn sample_typical_fraction<R: Rng + ?Sized>(spec: &TypicalSpec, samples: usize, rng: &mut R) -> f64 {
    let cdf: Vec<f64> = spec
        .p
        .iter()
        .scan(0.0, |acc, &v| {
            *acc += v;
            Some(*acc)
        })
        .collect();
    let alphabet = spec.p.len();
    let ranges: Vec<(usize, usize)> = (0..alphabet).map(|x| spec.count_range(x)).collect();
    let mut hits = 0;
    let mut cnt = vec![0usize; alphabet];
    for _ in 0..samples {
        cnt.iter_mut().for_each(|v| *v = 0);
        for _ in 0..spec.n {
            let u: f64 = rng.gen();
            let x = cdf.iter().position(|&c| u < c).unwrap_or(alphabet - 1);
            cnt[x] += 1;
        }
        if (0..alphabet).all(|x| cnt[x] >= ranges[x].0 && cnt[x] <= ranges[x].1) {
            hits += 1;
        }
    }
    hits as f64 / samples.max(1) as f64
}

/// Conditional distribution `p(y|x)` as rows, with its conditioning sequence.
#[derive(Clone, Debug, PartialEq)]
pub struct ConditionalSpec {
    rows: Vec<Vec<f64>>,
    xs: Vec<usize>,
    delta: f64,
}

impl ConditionalSpec {
    pub fn new(rows: Vec<Vec<f64>>, xs: Vec<usize>, delta: f64) -> Result<Self> {
        if rows.is_empty() || xs.is_empty() {
            return Err(Error::InvalidArgument("empty conditional specification".into()));
        }
        let width = rows[0].len();
        for r in &rows {
            check_distribution(r)?;
            if r.len() != width {
                return Err(Error::InvalidArgument("conditional rows differ in length".into()));
            }
        }
        counts(&xs, rows.len())?;
        if !(delta > 0.0) || !delta.is_finite() {
            return Err(Error::InvalidArgument(format!("slack must be positive, got {delta}")));
        }
        Ok(Self { rows, xs, delta })
    }

    pub fn n(&self) -> usize {
        self.xs.len()
    }

    fn slack(&self) -> f64 {
        self.n() as f64 * self.delta
    }

    /// `S(Y|X)` of the empirical `x` distribution of the conditioning sequence.
    pub fn conditional_entropy(&self) -> f64 {
        let cnt = counts(&self.xs, self.rows.len()).expect("validated");
        let n = self.n() as f64;
        cnt.iter().zip(&self.rows).map(|(&k, r)| k as f64 / n * linalg::shannon_entropy(r)).sum()
    }

    /// `c = Σ_{x,y} |log₂ p(y|x)| + Σ_x H(Y|x)`: covers both the conditional
    /// slack and the deviation of `N(x)` from `n p(x)`.
    pub fn constant(&self) -> f64 {
        self.rows.iter().map(|r| log_sum(r) + linalg::shannon_entropy(r)).sum()
    }

    /// `Σ_x N(x|xⁿ) H(Y|x)`, the exact exponent of the dimension bound.
    fn exponent(&self) -> f64 {
        self.conditional_entropy() * self.n() as f64
    }

    pub fn is_typical(&self, ys: &[usize]) -> Result<bool> {
        if ys.len() != self.n() {
            return Err(Error::DimensionMismatch { expected: self.n(), found: ys.len() });
        }
        let width = self.rows[0].len();
        let nx = counts(&self.xs, self.rows.len())?;
        let mut nxy = vec![vec![0usize; width]; self.rows.len()];
        for (&x, &y) in self.xs.iter().zip(ys) {
            if y >= width {
                return Err(Error::InvalidArgument(format!("symbol {y} outside an alphabet of size {width}")));
            }
            nxy[x][y] += 1;
        }
        Ok((0..self.rows.len()).all(|x| {
            (0..width).all(|y| {
                let (lo, hi) = count_range(self.rows[x][y], nx[x], self.slack());
                nxy[x][y] >= lo && nxy[x][y] <= hi
            })
        }))
    }

    /// Count and mass of the conditionally typical set: a product over the
    /// positions sharing each `x`.
    fn sums(&self) -> (f64, f64) {
        let nx = counts(&self.xs, self.rows.len()).expect("validated");
        let lnf = ln_factorials(self.n());
        let mut count = 1.0;
        let mut mass = 1.0;
        for (x, &len) in nx.iter().enumerate() {
            if len == 0 {
                continue;
            }
            let (cnt, m) = type_sums(&self.rows[x], len, self.slack(), &lnf);
            count *= cnt;
            mass *= m;
        }
        (count.round(), mass)
    }

    pub fn typical_count(&self) -> f64 {
        self.sums().0
    }

    pub fn typical_mass(&self) -> f64 {
        self.sums().1
    }

    /// `2^{Σ_x N(x) H(Y|x) + nδ Σ_{x,y} |log₂ p(y|x)|}`: the bound in terms
    /// of the conditioning sequence's own counts.
    pub fn empirical_dimension_bound(&self) -> f64 {
        (self.exponent() + self.n() as f64 * self.delta * log_sum_rows(&self.rows)).exp2()
    }

    /// `2^{n[S(Y|X) + cδ]}` with `S(Y|X)` under `px`. When the conditioning
    /// sequence is `δ`-typical for `px`, its empirical entropy exceeds
    /// `S(Y|X)` by at most `nδ Σ_x H(Y|x)`, which [`Self::constant`] covers,
    /// so this dominates [`Self::empirical_dimension_bound`].
    pub fn dimension_bound(&self, px: &[f64]) -> Result<f64> {
        if px.len() != self.rows.len() {
            return Err(Error::DimensionMismatch { expected: self.rows.len(), found: px.len() });
        }
        check_distribution(px)?;
        let s: f64 = px.iter().zip(&self.rows).map(|(p, r)| p * linalg::shannon_entropy(r)).sum();
        Ok((self.n() as f64 * (s + self.constant() * self.delta)).exp2())
    }

    fn members(&self) -> Vec<Vec<usize>> {
        let width = self.rows[0].len();
        let mut out = Vec::new();
        let mut seq = Vec::with_capacity(self.n());
        self.members_rec(width, &mut seq, &mut out);
        out
    }

    fn members_rec(&self, width: usize, seq: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if seq.len() == self.n() {
            if self.is_typical(seq).unwrap_or(false) {
                out.push(seq.clone());
            }
            return;
        }
        let x = self.xs[seq.len()];
        for y in 0..width {
            if self.rows[x][y] > 0.0 {
                seq.push(y);
                self.members_rec(width, seq, out);
                seq.pop();
            }
        }
    }
}

fn log_sum_rows(rows: &[Vec<f64>]) -> f64 {
    rows.iter().map(|r| log_sum(r)).sum()
}

/// Projector `Σ_{sequences in the set} ⊗_i |e^{(i)}_{s_i}⟩⟨e^{(i)}_{s_i}|` kept
/// in factored form: one eigenbasis per site and the member sequences.
#[derive(Clone, Debug)]
pub struct TypicalProjector {
    site_bases: Vec<CMat>,
    site_weights: Vec<Vec<f64>>,
    members: Vec<Vec<usize>>,
}

impl TypicalProjector {
    pub fn n(&self) -> usize {
        self.site_bases.len()
    }

    pub fn rank(&self) -> usize {
        self.members.len()
    }

    pub fn members(&self) -> &[Vec<usize>] {
        &self.members
    }

    /// `Tr(ρ_1 ⊗ … ⊗ ρ_n Π)` for the states whose eigenbases define `Π`.
    pub fn mass(&self) -> f64 {
        self.members
            .iter()
            .map(|s| s.iter().enumerate().map(|(i, &y)| self.site_weights[i][y]).product::<f64>())
            .sum()
    }

    fn member_vector(&self, seq: &[usize]) -> CVec {
        let mut v = CVec::from_element(1, c(1.0, 0.0));
        for (i, &y) in seq.iter().enumerate() {
            v = linalg::kron_vec(&v, &self.site_bases[i].column(y).into_owned());
        }
        v
    }

    /// Dense matrix on the `n`-fold space.
    pub fn matrix(&self) -> CMat {
        let dim: usize = self.site_bases.iter().map(|b| b.nrows()).product();
        let mut out = CMat::zeros(dim, dim);
        for s in &self.members {
            let v = self.member_vector(s);
            out += &v * v.adjoint();
        }
        out
    }
}

fn check_dense(dim: usize, n: usize) -> Result<()> {
    if n as f64 * (dim as f64).log2() > MAX_LOG2_DIM {
        return Err(Error::Resource(format!("{n} copies of dimension {dim} exceed 2^{MAX_LOG2_DIM}")));
    }
    Ok(())
}

/// Descending spectrum and matching eigenvectors.
fn spectral(rho: &CMat) -> (Vec<f64>, CMat) {
    let (vals, vecs) = linalg::eigh(rho);
    let d = vals.len();
    let mut basis = CMat::zeros(d, d);
    let mut weights = Vec::with_capacity(d);
    for (j, i) in (0..d).rev().enumerate() {
        basis.set_column(j, &vecs.column(i));
        weights.push(vals[i].max(0.0));
    }
    // Eigenvalues at round-off level are exact zeros for typicality.
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w = if *w <= linalg::EIGEN_CUTOFF { 0.0 } else { *w / total };
    }
    let total: f64 = weights.iter().sum();
    weights.iter_mut().for_each(|w| *w /= total);
    (weights, basis)
}

/// Typical projector of `ρ^{⊗n}` built from the eigenbasis of `ρ`.
pub fn typical_projector(rho: &DensityMatrix, n: usize, delta: f64) -> Result<TypicalProjector> {
    check_dense(rho.dim(), n)?;
    let (weights, basis) = spectral(rho.matrix());
    let spec = TypicalSpec::new(weights.clone(), n, delta)?;
    let members = enumerate_typical(&spec)?.collect();
    Ok(TypicalProjector { site_bases: vec![basis; n], site_weights: vec![weights; n], members })
}

/// Conditional typical projector of `σ_{x_1} ⊗ … ⊗ σ_{x_n}`.
pub fn conditional_typical_projector(branches: &[DensityMatrix], xs: &[usize], delta: f64) -> Result<TypicalProjector> {
    let dim = branches.first().map(|b| b.dim()).ok_or_else(|| Error::InvalidArgument("no branch states".into()))?;
    if branches.iter().any(|b| b.dim() != dim) {
        return Err(Error::InvalidArgument("branch states differ in dimension".into()));
    }
    check_dense(dim, xs.len())?;
    let spectra: Vec<(Vec<f64>, CMat)> = branches.iter().map(|b| spectral(b.matrix())).collect();
    let spec = ConditionalSpec::new(spectra.iter().map(|s| s.0.clone()).collect(), xs.to_vec(), delta)?;
    let members = spec.members();
    Ok(TypicalProjector {
        site_bases: xs.iter().map(|&x| spectra[x].1.clone()).collect(),
        site_weights: xs.iter().map(|&x| spectra[x].0.clone()).collect(),
        members,
    })
}

/// One retained classical string with its projected, renormalized branch.
#[derive(Clone, Debug)]
pub struct ProjectedBranch {
    pub sequence: Vec<usize>,
    /// `p_{c^m} / (retained classical mass)`.
    pub weight: f64,
    /// `|ω'_{c^m}⟩`, sites interleaved as `(Q R R')_1 … (Q R R')_m`.
    pub vector: CVec,
    /// Norm² of the branch after projection, before renormalization.
    pub quantum_mass: f64,
}

#[derive(Clone, Debug)]
pub struct ProjectedSource {
    pub branches: Vec<ProjectedBranch>,
    /// Probability of the typical classical strings.
    pub retained_mass: f64,
    site_dims: (usize, usize),
    m: usize,
}

impl ProjectedSource {
    /// `Σ weight |c^m⟩⟨c^m| ⊗ |ω'⟩⟨ω'| ⊗ |c^m⟩⟨c^m|` on `C^m, (QRR')^m, C'^m`.
    pub fn state(&self) -> Result<DensityMatrix> {
        let (nc, site) = self.site_dims;
        let cdim = nc.pow(self.m as u32);
        let qdim = site.pow(self.m as u32);
        let total = cdim * qdim * cdim;
        if (total as f64).log2() > MAX_LOG2_DIM {
            return Err(Error::Resource(format!("projected state of dimension {total} is too large")));
        }
        let mut out = CMat::zeros(total, total);
        for b in &self.branches {
            let idx = b.sequence.iter().fold(0, |acc, &s| acc * nc + s);
            for i in 0..qdim {
                for j in 0..qdim {
                    let row = (idx * qdim + i) * cdim + idx;
                    let col = (idx * qdim + j) * cdim + idx;
                    out[(row, col)] = b.vector[i] * b.vector[j].conj() * b.weight;
                }
            }
        }
        let space = TensorSpace::new([("C", cdim), ("QRR'", qdim), ("C'", cdim)])?;
        DensityMatrix::new(space, out)
    }
}

/// Restricts the classical register of `src^{⊗m}` to typical strings and
/// projects each branch with its conditional typical projector on `Q^m`,
/// renormalizing both.
pub fn project_and_renormalize(src: &ExtendedSource, m: usize, delta: f64) -> Result<ProjectedSource> {
    let nc = src.dim_c();
    let dq = src.dim_q();
    let s = src.dim_r() * src.dim_rp();
    if m == 0 {
        return Err(Error::InvalidArgument("block length must be at least 1".into()));
    }
    check_dense(nc * dq, m)?;
    let spec = TypicalSpec::new(src.probs().to_vec(), m, delta)?;
    // Schmidt form of every branch: weights λ_{c,y} and site vectors √λ |w⟩|f⟩.
    let mut rows = Vec::with_capacity(nc);
    let mut site_vectors: Vec<Vec<CVec>> = Vec::with_capacity(nc);
    for v in src.branches() {
        let psi = CMat::from_row_slice(dq, s, v.as_slice());
        // Schmidt vectors from the Q marginal: (ψ† w_k)* = √λ_k f_k.
        let (lam, basis) = spectral(&(&psi * psi.adjoint()));
        let mut row = vec![0.0; dq];
        let mut vecs = vec![CVec::zeros(dq * s); dq];
        for k in 0..dq {
            if lam[k] == 0.0 {
                continue;
            }
            row[k] = lam[k];
            let w = basis.column(k).into_owned();
            let f = psi.adjoint() * &w;
            let f = f.map(|z| z.conj());
            vecs[k] = linalg::kron_vec(&w, &f);
        }
        rows.push(row);
        site_vectors.push(vecs);
    }
    let mut branches = Vec::new();
    let mut retained = 0.0;
    for seq in enumerate_typical(&spec)? {
        let p: f64 = seq.iter().map(|&x| src.probs()[x]).product();
        if p == 0.0 {
            continue;
        }
        let cond = ConditionalSpec::new(rows.clone(), seq.clone(), delta)?;
        let mut vector = CVec::zeros((dq * s).pow(m as u32));
        for ys in cond.members() {
            let mut v = CVec::from_element(1, c(1.0, 0.0));
            for (&x, &y) in seq.iter().zip(&ys) {
                v = linalg::kron_vec(&v, &site_vectors[x][y]);
            }
            vector += v;
        }
        let quantum_mass = vector.norm_squared();
        if quantum_mass <= 0.0 {
            continue;
        }
        retained += p;
        let norm = quantum_mass.sqrt();
        branches.push(ProjectedBranch { sequence: seq, weight: p, vector: vector.unscale(norm), quantum_mass });
    }
    if retained <= 0.0 {
        return Err(Error::Numerical("typical projection retained no mass".into()));
    }
    for b in &mut branches {
        b.weight /= retained;
    }
    Ok(ProjectedSource { branches, retained_mass: retained, site_dims: (nc, dq * s), m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    fn binom(n: u64, k: u64) -> f64 {
        (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
    }

    #[test]
    fn typical_set_examples() {
        let all = TypicalSpec::new(vec![0.5, 0.5], 2, 0.5).unwrap();
        assert_eq!(enumerate_typical(&all).unwrap().count(), 4);
        let det = TypicalSpec::new(vec![1.0, 0.0], 5, 0.1).unwrap();
        let seqs: Vec<Vec<usize>> = enumerate_typical(&det).unwrap().collect();
        assert_eq!(seqs, vec![vec![0; 5]]);
        let bal = TypicalSpec::new(vec![0.5, 0.5], 4, 0.1).unwrap();
        let seqs: Vec<Vec<usize>> = enumerate_typical(&bal).unwrap().collect();
        assert_eq!(seqs.len(), 6);
        assert!(seqs.iter().all(|s| s.iter().sum::<usize>() == 2));
        assert!(seqs.windows(2).all(|w| w[0] < w[1]));
        assert_eq!(typical_count(&bal), 6.0);
        assert!(enumerate_typical(&TypicalSpec::new(vec![0.5, 0.5], 21, 0.1).unwrap()).is_err());
    }

    #[test]
    fn log_count_matches_count() {
        for (p, n) in [(vec![0.5, 0.5], 10), (vec![0.2, 0.3, 0.5], 9), (vec![0.3, 0.7], 40)] {
            let spec = TypicalSpec::new(p, n, 0.1).unwrap();
            assert_abs_diff_eq!(typical_log2_count(&spec), typical_count(&spec).log2(), epsilon = 1e-9);
        }
        // Far past f64 range: log of a binomial band summed term by term.
        let spec = TypicalSpec::new(vec![0.3, 0.7], 4000, 0.05).unwrap();
        let ln_binom = |k: u64| (0..k).map(|i| ((4000 - i) as f64 / (i + 1) as f64).ln()).sum::<f64>();
        let terms: Vec<f64> = (1000..=1400).map(ln_binom).collect();
        let top = terms.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let oracle = (top + terms.iter().map(|t| (t - top).exp()).sum::<f64>().ln()) / std::f64::consts::LN_2;
        assert!(typical_count(&spec).is_infinite());
        assert_abs_diff_eq!(typical_log2_count(&spec), oracle, epsilon = 1e-6);
    }

    #[test]
    fn membership_matches_enumeration() {
        let spec = TypicalSpec::new(vec![0.2, 0.5, 0.3], 6, 0.12).unwrap();
        let listed: Vec<Vec<usize>> = enumerate_typical(&spec).unwrap().collect();
        let mut brute = 0;
        for code in 0..3usize.pow(6) {
            let seq: Vec<usize> = (0..6).map(|i| (code / 3usize.pow(5 - i)) % 3).collect();
            if is_typical(&seq, &spec).unwrap() {
                brute += 1;
                assert!(listed.contains(&seq));
            }
        }
        assert_eq!(brute, listed.len());
        assert_eq!(typical_count(&spec), listed.len() as f64);
    }

    #[test]
    fn projector_examples() {
        let s = TensorSpace::single("A", 2).unwrap();
        let pure = DensityMatrix::basis_state(s.clone(), 1).unwrap();
        let proj = typical_projector(&pure, 3, 0.1).unwrap();
        assert_eq!(proj.rank(), 1);
        let m = proj.matrix();
        assert_abs_diff_eq!(m[(7, 7)].re, 1.0, epsilon = 1e-12);

        let mixed = DensityMatrix::maximally_mixed(s.clone());
        assert_eq!(typical_projector(&mixed, 4, 0.1).unwrap().rank(), 6);

        let rho = DensityMatrix::diagonal(s, &[0.9, 0.1]).unwrap();
        let proj = typical_projector(&rho, 8, 0.05).unwrap();
        // Counts of the minority symbol within 0.4 of 0.8: exactly one.
        let oracle = binom(8, 1) * 0.9f64.powi(7) * 0.1;
        assert_abs_diff_eq!(proj.mass(), oracle, epsilon = 1e-12);
        let rho8 = (0..7).fold(rho.matrix().clone(), |acc, _| linalg::kron(&acc, rho.matrix()));
        let dense = linalg::trace(&(rho8 * proj.matrix())).re;
        assert_abs_diff_eq!(dense, oracle, epsilon = 1e-12);
        assert!(typical_projector(&rho, 13, 0.1).is_err());
    }

    #[test]
    fn conditional_projector_mass_matches_dense_trace() {
        let s = TensorSpace::single("B", 2).unwrap();
        let a = DensityMatrix::diagonal(s.clone(), &[0.8, 0.2]).unwrap();
        let b = crate::random::random_state(&s, 4);
        let xs = vec![0, 1, 1, 0, 1];
        let proj = conditional_typical_projector(&[a.clone(), b.clone()], &xs, 0.15).unwrap();
        let sigma = xs[1..].iter().fold(if xs[0] == 0 { a.matrix().clone() } else { b.matrix().clone() }, |acc, &x| {
            linalg::kron(&acc, if x == 0 { a.matrix() } else { b.matrix() })
        });
        let dense = linalg::trace(&(sigma * proj.matrix())).re;
        assert_abs_diff_eq!(proj.mass(), dense, epsilon = 1e-10);
        let p = proj.matrix();
        assert!(linalg::max_abs(&(&p * &p - &p)) < 1e-10);
    }

    #[test]
    fn classical_bit_projection_keeps_balanced_strings() {
        let space = TensorSpace::new([("C", 2), ("Q", 1), ("R", 1)]).unwrap();
        let src = ExtendedSource::from_cqr(&DensityMatrix::diagonal(space, &[0.5, 0.5]).unwrap()).unwrap();
        let out = project_and_renormalize(&src, 4, 0.1).unwrap();
        assert_eq!(out.branches.len(), 6);
        assert_abs_diff_eq!(out.retained_mass, 6.0 / 16.0, epsilon = 1e-12);
        let st = out.state().unwrap();
        assert_abs_diff_eq!(st.trace(), 1.0, epsilon = 1e-12);

        let wide = project_and_renormalize(&src, 4, 1.0).unwrap();
        assert_eq!(wide.branches.len(), 16);
        assert_abs_diff_eq!(wide.retained_mass, 1.0, epsilon = 1e-12);
    }

    #[test]
    fn single_block_projection() {
        let space = TensorSpace::new([("C", 1), ("Q", 2), ("R", 2)]).unwrap();
        let pure_q = DensityMatrix::basis_state(space.clone(), 0).unwrap();
        let src = ExtendedSource::from_cqr(&pure_q).unwrap();
        let out = project_and_renormalize(&src, 3, 0.1).unwrap();
        assert_eq!(out.branches.len(), 1);
        assert_abs_diff_eq!(out.retained_mass, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(out.branches[0].quantum_mass, 1.0, epsilon = 1e-12);

        // Q half of a Bell pair: only balanced eigen-strings survive.
        let mut bell = CMat::zeros(4, 4);
        for (i, j) in [(0, 0), (0, 3), (3, 0), (3, 3)] {
            bell[(i, j)] = c(0.5, 0.0);
        }
        let src = ExtendedSource::from_cqr(&DensityMatrix::new(space, bell).unwrap()).unwrap();
        let out = project_and_renormalize(&src, 4, 0.1).unwrap();
        assert_abs_diff_eq!(out.branches[0].quantum_mass, 6.0 / 16.0, epsilon = 1e-10);
        assert_abs_diff_eq!(out.branches[0].vector.norm(), 1.0, epsilon = 1e-12);
        let st = out.state().unwrap();
        assert_abs_diff_eq!(st.trace(), 1.0, epsilon = 1e-12);
    }
}
