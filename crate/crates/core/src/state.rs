//! Density matrices and pure states on labelled tensor spaces.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::space::{offsets, TensorSpace};

/// Tolerance for the Hermiticity, trace and positivity checks of a state.
pub const STATE_TOL: f64 = 1e-10;
/// Tolerance on the squared norm of a pure state.
pub const PURE_TOL: f64 = 1e-12;

#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    space: TensorSpace,
    matrix: CMat,
}

impl DensityMatrix {
    /// Validating constructor. Negative eigenvalues down to `-STATE_TOL` are
    /// clamped to zero and the state renormalised.
    pub fn new(space: TensorSpace, matrix: CMat) -> Result<Self> {
        let d = space.total_dim();
        if matrix.nrows() != d || matrix.ncols() != d {
            return Err(Error::DimensionMismatch { expected: d, found: matrix.nrows() });
        }
        let asym = linalg::max_abs(&(&matrix - matrix.adjoint()));
        if asym > STATE_TOL {
            return Err(Error::InvalidState(format!("not Hermitian (deviation {asym:.3e})")));
        }
        let tr = linalg::trace(&matrix);
        if (tr.re - 1.0).abs() > STATE_TOL || tr.im.abs() > STATE_TOL {
            return Err(Error::InvalidState(format!("trace {:.12} is not 1", tr.re)));
        }
        let (vals, vecs) = linalg::eigh(&matrix);
        let min = vals.first().copied().unwrap_or(0.0);
        if min < -STATE_TOL {
            return Err(Error::InvalidState(format!("negative eigenvalue {min:.3e}")));
        }
        let matrix = if min < 0.0 {
            let clamped: Vec<f64> = vals.iter().map(|v| v.max(0.0)).collect();
            let total: f64 = clamped.iter().sum();
            let mut scaled = vecs.clone();
            for (j, v) in clamped.iter().enumerate() {
                let s = v / total;
                scaled.column_mut(j).scale_mut(s);
            }
            scaled * vecs.adjoint()
        } else {
            linalg::hermitize(&matrix)
        };
        Ok(Self { space, matrix })
    }

    /// Wraps a matrix produced internally by trace-preserving operations.
    pub(crate) fn from_raw(space: TensorSpace, matrix: CMat) -> Self {
        debug_assert_eq!(space.total_dim(), matrix.nrows());
        Self { space, matrix }
    }

    pub fn maximally_mixed(space: TensorSpace) -> Self {
        let d = space.total_dim();
        Self::from_raw(space, linalg::identity(d).unscale(d as f64))
    }

    /// Diagonal state with the given probabilities.
    pub fn diagonal(space: TensorSpace, probs: &[f64]) -> Result<Self> {
        let d = space.total_dim();
        if probs.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: probs.len() });
        }
        let m = CMat::from_diagonal(&CVec::from_iterator(d, probs.iter().map(|&p| c(p, 0.0))));
        Self::new(space, m)
    }

    pub fn basis_state(space: TensorSpace, index: usize) -> Result<Self> {
        let d = space.total_dim();
        if index >= d {
            return Err(Error::DimensionMismatch { expected: d, found: index });
        }
        let mut m = CMat::zeros(d, d);
        m[(index, index)] = c(1.0, 0.0);
        Ok(Self::from_raw(space, m))
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn matrix(&self) -> &CMat {
        &self.matrix
    }

    pub fn into_matrix(self) -> CMat {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        linalg::trace(&self.matrix).re
    }

    /// Ascending eigenvalues, negative round-off clamped to zero.
    pub fn eigenvalues(&self) -> Vec<f64> {
        linalg::eigvalsh(&self.matrix).into_iter().map(|v| v.max(0.0)).collect()
    }

    /// Same matrix with the subsystems relabelled in order.
    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        let space = relabel_space(&self.space, labels)?;
        Ok(Self::from_raw(space, self.matrix.clone()))
    }

    /// `self ⊗ other` on the concatenated space.
    pub fn tensor(&self, other: &DensityMatrix) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        Ok(Self::from_raw(space, linalg::kron(&self.matrix, &other.matrix)))
    }

    /// Fuses subsystems: each `(label, members)` group becomes one subsystem
    /// of the product dimension, in the order the groups are given. Every
    /// subsystem must belong to exactly one group.
    pub fn merge(&self, groups: &[(&str, &[&str])]) -> Result<Self> {
        let order: Vec<&str> = groups.iter().flat_map(|(_, m)| m.iter().copied()).collect();
        if order.len() != self.space.len() {
            return Err(Error::InvalidArgument("merge groups must cover every subsystem once".into()));
        }
        let permuted = self.permute(&order)?;
        let dims = groups
            .iter()
            .map(|(l, m)| Ok((l.to_string(), m.iter().map(|x| self.space.dim_of(x)).product::<Result<usize>>()?)))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self::from_raw(TensorSpace::new(dims)?, permuted.matrix))
    }

    /// Reduced state on `keep`; the kept subsystems stay in space order.
    pub fn partial_trace<S: AsRef<str>>(&self, keep: &[S]) -> Result<Self> {
        let keep_pos = self.space.positions_of(keep)?;
        Ok(self.partial_trace_positions(&keep_pos))
    }

    pub(crate) fn partial_trace_positions(&self, keep_pos: &[usize]) -> Self {
        let dims = self.space.dims();
        let strides = self.space.strides();
        let kept: Vec<(usize, usize)> = keep_pos.iter().map(|&p| (dims[p], strides[p])).collect();
        let traced: Vec<(usize, usize)> = (0..dims.len())
            .filter(|p| !keep_pos.contains(p))
            .map(|p| (dims[p], strides[p]))
            .collect();
        let ko = offsets(&kept);
        let to = offsets(&traced);
        let n = ko.len();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let mut acc = Complex64::new(0.0, 0.0);
                for &t in &to {
                    acc += self.matrix[(ko[i] + t, ko[j] + t)];
                }
                out[(i, j)] = acc;
            }
        }
        Self::from_raw(self.space.select(keep_pos), out)
    }

    /// Reorders subsystems so that they appear in the order of `order`
    /// (which must list every label exactly once).
    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (space, map) = permutation_map(&self.space, order)?;
        let n = map.len();
        let mut out = CMat::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                out[(i, j)] = self.matrix[(map[i], map[j])];
            }
        }
        Ok(Self::from_raw(space, out))
    }

    /// Von Neumann entropy in bits.
    pub fn entropy(&self) -> f64 {
        linalg::spectrum_entropy(&self.eigenvalues())
    }

    /// Purification on `space ⊗ (ref_label, rank)`: `Σ_i sqrt(λ_i) |e_i⟩|i⟩`.
    pub fn purify(&self, ref_label: &str) -> Result<PureState> {
        if self.space.contains(ref_label) {
            return Err(Error::LabelCollision(ref_label.to_string()));
        }
        let (vals, vecs) = linalg::eigh(&self.matrix);
        let support: Vec<usize> = (0..vals.len()).rev().filter(|&i| vals[i] > linalg::EIGEN_CUTOFF).collect();
        let rank = support.len().max(1);
        let d = self.dim();
        let mut v = CVec::zeros(d * rank);
        let total: f64 = support.iter().map(|&i| vals[i]).sum();
        for (k, &i) in support.iter().enumerate() {
            let amp = (vals[i] / total).sqrt();
            for a in 0..d {
                v[a * rank + k] = vecs[(a, i)] * amp;
            }
        }
        let space = self.space.tensor(&TensorSpace::single(ref_label, rank)?)?;
        PureState::new(space, v)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct PureState {
    space: TensorSpace,
    vector: CVec,
}

impl PureState {
    pub fn new(space: TensorSpace, vector: CVec) -> Result<Self> {
        let d = space.total_dim();
        if vector.len() != d {
            return Err(Error::DimensionMismatch { expected: d, found: vector.len() });
        }
        let n2 = vector.norm_squared();
        if (n2 - 1.0).abs() > PURE_TOL {
            return Err(Error::InvalidState(format!("squared norm {n2:.15} is not 1")));
        }
        Ok(Self { space, vector })
    }

    /// Normalises `vector`; fails on the zero vector.
    pub fn normalized(space: TensorSpace, vector: CVec) -> Result<Self> {
        let n = vector.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::InvalidState("zero vector".into()));
        }
        Self::new(space, vector.unscale(n))
    }

    pub fn basis(space: TensorSpace, index: usize) -> Result<Self> {
        let d = space.total_dim();
        let mut v = CVec::zeros(d);
        if index >= d {
            return Err(Error::DimensionMismatch { expected: d, found: index });
        }
        v[index] = c(1.0, 0.0);
        Self::new(space, v)
    }

    /// `Σ_i |i⟩|i⟩ / sqrt(d)` on two subsystems of dimension `d`.
    pub fn maximally_entangled(a: &str, r: &str, d: usize) -> Result<Self> {
        let space = TensorSpace::new([(a, d), (r, d)])?;
        let mut v = CVec::zeros(d * d);
        for i in 0..d {
            v[i * d + i] = c(1.0 / (d as f64).sqrt(), 0.0);
        }
        Self::new(space, v)
    }

    pub fn space(&self) -> &TensorSpace {
        &self.space
    }

    pub fn vector(&self) -> &CVec {
        &self.vector
    }

    pub fn density(&self) -> DensityMatrix {
        DensityMatrix::from_raw(self.space.clone(), &self.vector * self.vector.adjoint())
    }

    pub fn tensor(&self, other: &PureState) -> Result<Self> {
        let space = self.space.tensor(&other.space)?;
        Ok(Self { space, vector: linalg::kron_vec(&self.vector, &other.vector) })
    }

    pub fn permute<S: AsRef<str>>(&self, order: &[S]) -> Result<Self> {
        let (space, map) = permutation_map(&self.space, order)?;
        let vector = CVec::from_iterator(map.len(), map.iter().map(|&i| self.vector[i]));
        Ok(Self { space, vector })
    }

    pub fn relabel<S: AsRef<str>>(&self, labels: &[S]) -> Result<Self> {
        Ok(Self { space: relabel_space(&self.space, labels)?, vector: self.vector.clone() })
    }
}

fn relabel_space<S: AsRef<str>>(space: &TensorSpace, labels: &[S]) -> Result<TensorSpace> {
    if labels.len() != space.len() {
        return Err(Error::DimensionMismatch { expected: space.len(), found: labels.len() });
    }
    TensorSpace::new(labels.iter().zip(space.dims()).map(|(l, d)| (l.as_ref().to_string(), d)))
}

/// New space in `order` plus, for each new flat index, the old flat index.
fn permutation_map<S: AsRef<str>>(space: &TensorSpace, order: &[S]) -> Result<(TensorSpace, Vec<usize>)> {
    if order.len() != space.len() {
        return Err(Error::InvalidArgument(format!(
            "permutation lists {} labels, space has {}",
            order.len(),
            space.len()
        )));
    }
    let dims = space.dims();
    let strides = space.strides();
    let mut perm = Vec::with_capacity(order.len());
    for l in order {
        let p = space.position(l.as_ref())?;
        if perm.contains(&p) {
            return Err(Error::LabelCollision(l.as_ref().to_string()));
        }
        perm.push(p);
    }
    let new_space = TensorSpace::new(perm.iter().map(|&p| space.subsystems()[p].clone()))?;
    let map = offsets(&perm.iter().map(|&p| (dims[p], strides[p])).collect::<Vec<_>>());
    Ok((new_space, map))
}
