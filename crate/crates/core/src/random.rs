//! Seeded generators for states, channels and isometries.
//!
//! Every generator comes in two flavours: a `seed` entry point and an
//! `*_with` variant drawing from a caller-supplied RNG. Independent streams
//! are derived from one seed with [`stream_rng`], so parallel work never
//! depends on scheduling order.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

use crate::channel::QuantumChannel;
use crate::info::CQEnsemble;
use crate::error::{Error, Result};
use crate::linalg::{self, c, CMat, CVec};
use crate::space::TensorSpace;
use crate::state::{DensityMatrix, PureState};

pub type QRng = ChaCha8Rng;

pub fn rng_from_seed(seed: u64) -> QRng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Counter-based split: stream `index` of `seed`.
pub fn stream_rng(seed: u64, index: u64) -> QRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> num_complex::Complex64 {
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    c(re, im)
}

pub fn ginibre<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> CMat {
    CMat::from_fn(rows, cols, |_, _| gaussian_complex(rng))
}

/// Haar-like isometry `cols → rows` from the QR factor of a Ginibre matrix.
pub fn random_isometry<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> Result<CMat> {
    if rows < cols {
        return Err(Error::InvalidArgument(format!("no isometry from dimension {cols} into {rows}")));
    }
    Ok(linalg::orthonormal_columns(&ginibre(rows, cols, rng)))
}

pub fn random_unitary<R: Rng + ?Sized>(d: usize, rng: &mut R) -> CMat {
    linalg::orthonormal_columns(&ginibre(d, d, rng))
}

pub fn random_pure_with<R: Rng + ?Sized>(space: &TensorSpace, rng: &mut R) -> PureState {
    let d = space.total_dim();
    let v = CVec::from_fn(d, |_, _| gaussian_complex(rng));
    PureState::normalized(space.clone(), v).expect("Gaussian vector is nonzero")
}

/// Full-rank Ginibre state `G G† / Tr`.
pub fn random_state_with<R: Rng + ?Sized>(space: &TensorSpace, rng: &mut R) -> DensityMatrix {
    let d = space.total_dim();
    random_state_rank_with(space, d, rng)
}

/// Ginibre state of rank at most `rank`.
pub fn random_state_rank_with<R: Rng + ?Sized>(space: &TensorSpace, rank: usize, rng: &mut R) -> DensityMatrix {
    let d = space.total_dim();
    let g = ginibre(d, rank.max(1), rng);
    let m = &g * g.adjoint();
    let tr = linalg::trace(&m).re;
    DensityMatrix::from_raw(space.clone(), m.unscale(tr))
}

pub fn random_channel_with<R: Rng + ?Sized>(
    dim_in: usize,
    dim_out: usize,
    kraus_count: usize,
    rng: &mut R,
) -> Result<QuantumChannel> {
    if dim_in == 0 || dim_out == 0 || kraus_count == 0 {
        return Err(Error::InvalidArgument("channel dimensions must be positive".into()));
    }
    let v = random_isometry(dim_out * kraus_count, dim_in, rng)?;
    let kraus = (0..kraus_count).map(|k| v.rows(k * dim_out, dim_out).into_owned()).collect();
    QuantumChannel::new(kraus)
}

/// Ensemble of `entries` Haar-like pure states on `A ⊗ R` with
/// probabilities drawn uniformly from the simplex.
pub fn random_ensemble_with<R: Rng + ?Sized>(dim_a: usize, dim_r: usize, entries: usize, rng: &mut R) -> Result<CQEnsemble> {
    if entries == 0 {
        return Err(Error::InvalidEnsemble("no entries".into()));
    }
    let space = TensorSpace::new([("A", dim_a), ("R", dim_r)])?;
    let weights: Vec<f64> = (0..entries).map(|_| -(1.0 - rng.gen::<f64>()).ln()).collect();
    let total: f64 = weights.iter().sum();
    let list = weights.iter().map(|w| (w / total, random_pure_with(&space, rng).vector().clone())).collect();
    CQEnsemble::new(dim_a, dim_r, list)
}

pub fn random_state(space: &TensorSpace, seed: u64) -> DensityMatrix {
    random_state_with(space, &mut rng_from_seed(seed))
}

pub fn random_pure(space: &TensorSpace, seed: u64) -> PureState {
    random_pure_with(space, &mut rng_from_seed(seed))
}

pub fn random_channel(dim_in: usize, dim_out: usize, kraus_count: usize, seed: u64) -> Result<QuantumChannel> {
    random_channel_with(dim_in, dim_out, kraus_count, &mut rng_from_seed(seed))
}
