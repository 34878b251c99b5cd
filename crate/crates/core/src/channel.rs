//! CPTP maps in Kraus form.

use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat};
use crate::state::DensityMatrix;

/// Completeness tolerance `‖Σ K†K − I‖_max`.
pub const CHANNEL_TOL: f64 = 1e-10;

/// Largest `log2` input dimension allowed for tensor powers.
pub const MAX_LOG2_DIM: f64 = 12.0;

#[derive(Clone, Debug, PartialEq)]
pub struct QuantumChannel {
    dim_in: usize,
    dim_out: usize,
    kraus: Vec<CMat>,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMat>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| Error::InvalidChannel("no Kraus operators".into()))?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        if dim_in == 0 || dim_out == 0 {
            return Err(Error::InvalidChannel("empty Kraus operator".into()));
        }
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::InvalidChannel(format!(
                    "Kraus operator of shape {}x{} in a {}x{} channel",
                    k.nrows(),
                    k.ncols(),
                    dim_out,
                    dim_in
                )));
            }
        }
        let ch = Self { dim_in, dim_out, kraus };
        let res = ch.completeness_residual();
        if res > CHANNEL_TOL {
            return Err(Error::InvalidChannel(format!("not trace preserving (residual {res:.3e})")));
        }
        Ok(ch)
    }

    pub(crate) fn from_kraus_unchecked(kraus: Vec<CMat>) -> Self {
        let (dim_out, dim_in) = (kraus[0].nrows(), kraus[0].ncols());
        Self { dim_in, dim_out, kraus }
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn kraus(&self) -> &[CMat] {
        &self.kraus
    }

    pub fn completeness_residual(&self) -> f64 {
        let mut sum = CMat::zeros(self.dim_in, self.dim_in);
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        linalg::max_abs(&(sum - linalg::identity(self.dim_in)))
    }

    pub fn identity(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("identity(0)".into()));
        }
        Self::new(vec![linalg::identity(d)])
    }

    /// Qubit phase flip with probability `p`: `K0 = √(1−p) I`, `K1 = √p Z`.
    pub fn dephasing(p: f64) -> Result<Self> {
        check_prob("dephasing", p)?;
        let z = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c(-1.0, 0.0)]);
        Self::new(vec![linalg::identity(2).scale((1.0 - p).sqrt()), z.scale(p.sqrt())])
    }

    /// Qubit depolarising channel `ρ ↦ (1−p)ρ + p I/2`.
    pub fn depolarizing(p: f64) -> Result<Self> {
        check_prob("depolarizing", p)?;
        let [i, x, y, z] = paulis();
        let w = (p / 4.0).sqrt();
        Self::new(vec![i.scale((1.0 - 3.0 * p / 4.0).sqrt()), x.scale(w), y.scale(w), z.scale(w)])
    }

    /// Qubit erasure into a 3-level output; the flag is level 2.
    pub fn erasure(p: f64) -> Result<Self> {
        check_prob("erasure", p)?;
        let mut keep = CMat::zeros(3, 2);
        keep[(0, 0)] = c((1.0 - p).sqrt(), 0.0);
        keep[(1, 1)] = c((1.0 - p).sqrt(), 0.0);
        let mut e0 = CMat::zeros(3, 2);
        e0[(2, 0)] = c(p.sqrt(), 0.0);
        let mut e1 = CMat::zeros(3, 2);
        e1[(2, 1)] = c(p.sqrt(), 0.0);
        Self::new(vec![keep, e0, e1])
    }

    pub fn amplitude_damping(g: f64) -> Result<Self> {
        check_prob("amplitude_damping", g)?;
        let k0 = CMat::from_row_slice(2, 2, &[c(1.0, 0.0), c(0.0, 0.0), c(0.0, 0.0), c((1.0 - g).sqrt(), 0.0)]);
        let k1 = CMat::from_row_slice(2, 2, &[c(0.0, 0.0), c(g.sqrt(), 0.0), c(0.0, 0.0), c(0.0, 0.0)]);
        Self::new(vec![k0, k1])
    }

    /// Discards a `d`-level input, leaving a one-dimensional output.
    pub fn trace_out(d: usize) -> Result<Self> {
        if d == 0 {
            return Err(Error::InvalidArgument("trace_out(0)".into()));
        }
        let kraus = (0..d)
            .map(|i| {
                let mut k = CMat::zeros(1, d);
                k[(0, i)] = c(1.0, 0.0);
                k
            })
            .collect();
        Self::new(kraus)
    }

    /// Unitary (or isometric) channel with a single Kraus operator.
    pub fn isometry(v: CMat) -> Result<Self> {
        Self::new(vec![v])
    }

    /// `Σ_k K ρ K†` on a bare matrix of dimension `dim_in`.
    pub fn apply_matrix(&self, rho: &CMat) -> CMat {
        let mut out = CMat::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Complementary output `[Tr(K_j ρ K_k†)]_{jk}` on the environment of the
    /// Stinespring dilation.
    pub fn complementary_matrix(&self, rho: &CMat) -> CMat {
        let n = self.kraus.len();
        let mapped: Vec<CMat> = self.kraus.iter().map(|k| k * rho).collect();
        let mut out = CMat::zeros(n, n);
        for j in 0..n {
            for k in j..n {
                let v = linalg::hs_inner(&self.kraus[k], &mapped[j]);
                out[(j, k)] = v;
                out[(k, j)] = v.conj();
            }
        }
        out
    }

    /// `(id ⊗ N ⊗ id) ρ` with the channel acting on subsystem `target`; the
    /// label is kept and its dimension becomes `dim_out`.
    pub fn apply(&self, rho: &DensityMatrix, target: &str) -> Result<DensityMatrix> {
        let space = rho.space();
        let pos = space.position(target)?;
        let dims = space.dims();
        if dims[pos] != self.dim_in {
            return Err(Error::DimensionMismatch { expected: self.dim_in, found: dims[pos] });
        }
        let left: usize = dims[..pos].iter().product();
        let right: usize = dims[pos + 1..].iter().product();
        let mut out = CMat::zeros(left * self.dim_out * right, left * self.dim_out * right);
        for k in &self.kraus {
            let full = linalg::kron(&linalg::kron(&linalg::identity(left), k), &linalg::identity(right));
            out += &full * rho.matrix() * full.adjoint();
        }
        let new_space = space.replace(pos, target, self.dim_out)?;
        Ok(DensityMatrix::from_raw(new_space, out))
    }

    /// Stinespring isometry `V = Σ_k K_k ⊗ |k⟩`, output ordered (out, env).
    pub fn stinespring(&self) -> Stinespring {
        let env = self.kraus.len();
        let mut v = CMat::zeros(self.dim_out * env, self.dim_in);
        for (k, op) in self.kraus.iter().enumerate() {
            for b in 0..self.dim_out {
                for a in 0..self.dim_in {
                    v[(b * env + k, a)] = op[(b, a)];
                }
            }
        }
        Stinespring { isometry: v, dim_out: self.dim_out, dim_env: env }
    }

    /// `self ⊗ other`.
    pub fn tensor(&self, other: &QuantumChannel) -> QuantumChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * other.kraus.len());
        for a in &self.kraus {
            for b in &other.kraus {
                kraus.push(linalg::kron(a, b));
            }
        }
        Self::from_kraus_unchecked(kraus)
    }

    /// `N^{⊗l}`, guarded by `l·log2(dim_in) ≤ 12`.
    pub fn power(&self, l: usize) -> Result<QuantumChannel> {
        if l == 0 {
            return Err(Error::InvalidArgument("tensor power 0".into()));
        }
        let log_dim = l as f64 * (self.dim_in as f64).log2();
        if log_dim > MAX_LOG2_DIM + 1e-12 {
            return Err(Error::Resource(format!("channel power {l} gives log2 input dimension {log_dim:.1} > 12")));
        }
        let mut out = self.clone();
        for _ in 1..l {
            out = out.tensor(self);
        }
        Ok(out)
    }

    /// `then ∘ self`: Kraus set of all pairwise products.
    pub fn compose(&self, then: &QuantumChannel) -> Result<QuantumChannel> {
        if then.dim_in != self.dim_out {
            return Err(Error::DimensionMismatch { expected: self.dim_out, found: then.dim_in });
        }
        let mut kraus = Vec::with_capacity(self.kraus.len() * then.kraus.len());
        for b in &then.kraus {
            for a in &self.kraus {
                kraus.push(b * a);
            }
        }
        Ok(Self::from_kraus_unchecked(kraus))
    }
}

/// Isometric extension of a channel.
#[derive(Clone, Debug)]
pub struct Stinespring {
    pub isometry: CMat,
    pub dim_out: usize,
    pub dim_env: usize,
}

fn check_prob(name: &str, p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) || !p.is_finite() {
        return Err(Error::InvalidArgument(format!("{name} parameter {p} outside [0, 1]")));
    }
    Ok(())
}

fn paulis() -> [CMat; 4] {
    let o = c(0.0, 0.0);
    let one = c(1.0, 0.0);
    let i = c(0.0, 1.0);
    [
        linalg::identity(2),
        CMat::from_row_slice(2, 2, &[o, one, one, o]),
        CMat::from_row_slice(2, 2, &[o, -i, i, o]),
        CMat::from_row_slice(2, 2, &[one, o, o, -one]),
    ]
}
