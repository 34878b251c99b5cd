//! Entropic quantities and distances between states. All entropies in bits.

use crate::error::{Error, Result};
use crate::linalg;
use crate::state::DensityMatrix;

pub fn entropy(rho: &DensityMatrix) -> f64 {
    rho.entropy()
}

fn check_disjoint<S: AsRef<str>>(a: &[S], b: &[S]) -> Result<()> {
    for x in a {
        if b.iter().any(|y| y.as_ref() == x.as_ref()) {
            return Err(Error::OverlappingLabels(x.as_ref().to_string()));
        }
    }
    Ok(())
}

fn joined<S: AsRef<str>>(parts: &[&[S]]) -> Vec<String> {
    parts.iter().flat_map(|p| p.iter().map(|s| s.as_ref().to_string())).collect()
}

fn marginal_entropy(rho: &DensityMatrix, labels: &[String]) -> Result<f64> {
    if labels.is_empty() {
        return Ok(0.0);
    }
    Ok(rho.partial_trace(labels)?.entropy())
}

/// `S(a|b) = S(ab) - S(b)`.
pub fn conditional_entropy<S: AsRef<str>>(rho: &DensityMatrix, a: &[S], b: &[S]) -> Result<f64> {
    check_disjoint(a, b)?;
    let ab = joined(&[a, b]);
    let bb = joined(&[b]);
    Ok(marginal_entropy(rho, &ab)? - marginal_entropy(rho, &bb)?)
}

/// `I(a:b) = S(a) + S(b) - S(ab)`.
pub fn mutual_information<S: AsRef<str>>(rho: &DensityMatrix, a: &[S], b: &[S]) -> Result<f64> {
    check_disjoint(a, b)?;
    let sa = marginal_entropy(rho, &joined(&[a]))?;
    let sb = marginal_entropy(rho, &joined(&[b]))?;
    let sab = marginal_entropy(rho, &joined(&[a, b]))?;
    Ok(sa + sb - sab)
}

/// `I(a:b|c) = S(ac) + S(bc) - S(abc) - S(c)`.
pub fn conditional_mutual_information<S: AsRef<str>>(
    rho: &DensityMatrix,
    a: &[S],
    b: &[S],
    cond: &[S],
) -> Result<f64> {
    check_disjoint(a, b)?;
    check_disjoint(a, cond)?;
    check_disjoint(b, cond)?;
    let sac = marginal_entropy(rho, &joined(&[a, cond]))?;
    let sbc = marginal_entropy(rho, &joined(&[b, cond]))?;
    let sabc = marginal_entropy(rho, &joined(&[a, b, cond]))?;
    let sc = marginal_entropy(rho, &joined(&[cond]))?;
    Ok(sac + sbc - sabc - sc)
}

fn check_same_dim(rho: &DensityMatrix, xi: &DensityMatrix) -> Result<()> {
    if rho.dim() != xi.dim() {
        return Err(Error::DimensionMismatch { expected: rho.dim(), found: xi.dim() });
    }
    Ok(())
}

/// Uhlmann fidelity `F = ‖√ρ √ξ‖₁`, evaluated from singular values.
pub fn fidelity(rho: &DensityMatrix, xi: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, xi)?;
    Ok(fidelity_raw(rho.matrix(), xi.matrix()))
}

pub(crate) fn fidelity_raw(rho: &linalg::CMat, xi: &linalg::CMat) -> f64 {
    let prod = linalg::psd_sqrt(rho) * linalg::psd_sqrt(xi);
    linalg::trace_norm(&prod).clamp(0.0, 1.0)
}

/// Trace distance `½‖ρ − ξ‖₁`.
pub fn trace_distance(rho: &DensityMatrix, xi: &DensityMatrix) -> Result<f64> {
    check_same_dim(rho, xi)?;
    Ok(trace_distance_raw(rho.matrix(), xi.matrix()))
}

pub(crate) fn trace_distance_raw(rho: &linalg::CMat, xi: &linalg::CMat) -> f64 {
    let diff = rho - xi;
    0.5 * linalg::eigvalsh(&diff).iter().map(|v| v.abs()).sum::<f64>()
}
