use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Ordered list of labelled subsystems. Matrices over the space use the
/// row-major Kronecker convention: the first subsystem is the most
/// significant digit of a basis index.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TensorSpace {
    subsystems: Vec<(String, usize)>,
}

impl TensorSpace {
    pub fn new<S: Into<String>>(subsystems: impl IntoIterator<Item = (S, usize)>) -> Result<Self> {
        let subsystems: Vec<(String, usize)> =
            subsystems.into_iter().map(|(l, d)| (l.into(), d)).collect();
        for (i, (label, dim)) in subsystems.iter().enumerate() {
            if *dim == 0 {
                return Err(Error::InvalidArgument(format!("subsystem `{label}` has dimension 0")));
            }
            if subsystems[..i].iter().any(|(l, _)| l == label) {
                return Err(Error::LabelCollision(label.clone()));
            }
        }
        Ok(Self { subsystems })
    }

    pub fn single(label: &str, dim: usize) -> Result<Self> {
        Self::new([(label, dim)])
    }

    /// The empty product, of dimension 1.
    pub fn trivial() -> Self {
        Self { subsystems: Vec::new() }
    }

    pub fn subsystems(&self) -> &[(String, usize)] {
        &self.subsystems
    }

    pub fn len(&self) -> usize {
        self.subsystems.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subsystems.is_empty()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.subsystems.iter().map(|(l, _)| l.as_str())
    }

    pub fn dims(&self) -> Vec<usize> {
        self.subsystems.iter().map(|(_, d)| *d).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.subsystems.iter().map(|(_, d)| d).product()
    }

    pub fn position(&self, label: &str) -> Result<usize> {
        self.subsystems
            .iter()
            .position(|(l, _)| l == label)
            .ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn dim_of(&self, label: &str) -> Result<usize> {
        Ok(self.subsystems[self.position(label)?].1)
    }

    pub fn contains(&self, label: &str) -> bool {
        self.subsystems.iter().any(|(l, _)| l == label)
    }

    /// Concatenation `self ⊗ other`.
    pub fn tensor(&self, other: &TensorSpace) -> Result<TensorSpace> {
        Self::new(self.subsystems.iter().chain(other.subsystems.iter()).cloned())
    }

    /// Sub-space made of the given positions, kept in space order.
    pub fn select(&self, positions: &[usize]) -> TensorSpace {
        let mut pos = positions.to_vec();
        pos.sort_unstable();
        pos.dedup();
        Self { subsystems: pos.iter().map(|&p| self.subsystems[p].clone()).collect() }
    }

    /// Positions of the given labels, sorted in space order.
    pub fn positions_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        let mut pos = Vec::with_capacity(labels.len());
        for l in labels {
            let p = self.position(l.as_ref())?;
            if pos.contains(&p) {
                return Err(Error::LabelCollision(l.as_ref().to_string()));
            }
            pos.push(p);
        }
        pos.sort_unstable();
        Ok(pos)
    }

    /// Same space with subsystem `position` replaced by (`label`, `dim`).
    pub fn replace(&self, position: usize, label: &str, dim: usize) -> Result<TensorSpace> {
        let mut subs = self.subsystems.clone();
        subs[position] = (label.to_string(), dim);
        Self::new(subs)
    }

    /// Row-major strides of each subsystem.
    pub fn strides(&self) -> Vec<usize> {
        let dims = self.dims();
        let mut strides = vec![1; dims.len()];
        for i in (0..dims.len().saturating_sub(1)).rev() {
            strides[i] = strides[i + 1] * dims[i + 1];
        }
        strides
    }
}

/// Flat offsets of every multi-index over the given (dim, stride) pairs, in
/// row-major order of the multi-index.
pub(crate) fn offsets(dims_strides: &[(usize, usize)]) -> Vec<usize> {
    let mut out = vec![0usize];
    for &(d, s) in dims_strides {
        let mut next = Vec::with_capacity(out.len() * d);
        for &base in &out {
            for k in 0..d {
                next.push(base + k * s);
            }
        }
        out = next;
    }
    out
}
