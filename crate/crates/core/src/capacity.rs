//! Generalized capacity: the trade-off envelope intersected with the line
//! `r_c = (S(C)/S(Q|C))·r_q` fixed by the source's block decomposition.

use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::info::CQEnsemble;
use crate::ki::{ki_decompose, KIDecomposition};
use crate::random::rng_from_seed;
use crate::state::DensityMatrix;
use crate::tradeoff::{chebyshev_grid, compute_curve, evaluate_point, CurveOptions, TradeoffCurve};

/// Entropies at or below this count as zero when forming the slope.
pub const ENTROPY_TOL: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum Slope {
    Finite(f64),
    /// Purely classical source.
    Infinite,
    /// Source without classical or quantum content.
    Degenerate,
}

pub fn slope_from_entropies(s_c: f64, s_q_given_c: f64) -> Slope {
    match (s_c > ENTROPY_TOL, s_q_given_c > ENTROPY_TOL) {
        (false, false) => Slope::Degenerate,
        (true, false) => Slope::Infinite,
        (false, true) => Slope::Finite(0.0),
        (true, true) => Slope::Finite(s_c / s_q_given_c),
    }
}

/// `S(C) / S(Q|C)` of the decomposition.
pub fn slope_of(kid: &KIDecomposition) -> Slope {
    slope_from_entropies(kid.s_c(), kid.s_q_given_c())
}

/// Point where the envelope meets `r_c = slope · r_q`.
pub fn intersect(curve: &TradeoffCurve, slope: Slope) -> Result<(f64, f64)> {
    if curve.points.is_empty() {
        return Err(Error::InvalidArgument("empty trade-off curve".into()));
    }
    let s = match slope {
        Slope::Degenerate => return Ok((0.0, 0.0)),
        Slope::Infinite => return Ok((0.0, curve.c_c)),
        Slope::Finite(s) if s <= 0.0 => return Ok((curve.c_q, 0.0)),
        Slope::Finite(s) => s,
    };
    let g = |r: f64| curve.value_at(r) - s * r;
    if curve.c_q <= 0.0 {
        return Ok((0.0, 0.0));
    }
    if g(curve.c_q) >= 0.0 {
        return Ok((curve.c_q, s * curve.c_q));
    }
    let (mut lo, mut hi) = (0.0, curve.c_q);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if g(mid) >= 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo < 1e-15 {
            break;
        }
    }
    let r_q = 0.5 * (lo + hi);
    Ok((r_q, s * r_q))
}

/// Time-sharing witness for the intersection: two envelope witnesses and
/// the fraction of uses spent on the first.
#[derive(Clone, Debug)]
pub struct IntersectionWitness {
    pub lambda: f64,
    pub first: CQEnsemble,
    pub second: CQEnsemble,
    /// Rates obtained by re-evaluating both witnesses and time-sharing; they
    /// dominate the intersection point.
    pub r_q: f64,
    pub r_c: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CapacityReport {
    pub slope: Slope,
    pub r_q_star: f64,
    pub r_c_star: f64,
    pub c_g: f64,
    /// `c_g / S(CQ)`; `None` for a degenerate source.
    pub copies_per_use: Option<f64>,
    pub level: usize,
    pub s_c: f64,
    pub s_q_given_c: f64,
    pub s_cq: f64,
    pub curve_c_q: f64,
    pub curve_c_c: f64,
    #[serde(skip)]
    pub witness: Option<IntersectionWitness>,
}

fn witness_at(curve: &TradeoffCurve, channel: &QuantumChannel, r_q: f64) -> Result<Option<IntersectionWitness>> {
    let pts = &curve.points;
    let channel_l = channel.power(curve.level)?;
    for w in pts.windows(2).chain(std::iter::once(&pts[pts.len().saturating_sub(1)..])) {
        let (a, b) = if w.len() == 2 { (&w[0], &w[1]) } else { (&w[0], &w[0]) };
        if r_q < a.r_q - 1e-12 || r_q > b.r_q + 1e-12 {
            continue;
        }
        let (Some(wa), Some(wb)) = (&a.witness, &b.witness) else {
            return Ok(None);
        };
        let lambda = if b.r_q > a.r_q { ((b.r_q - r_q) / (b.r_q - a.r_q)).clamp(0.0, 1.0) } else { 1.0 };
        let (qa, ca) = evaluate_point(wa, &channel_l, curve.level)?;
        let (qb, cb) = evaluate_point(wb, &channel_l, curve.level)?;
        return Ok(Some(IntersectionWitness {
            lambda,
            first: wa.clone(),
            second: wb.clone(),
            r_q: lambda * qa + (1.0 - lambda) * qb,
            r_c: lambda * ca + (1.0 - lambda) * cb,
        }));
    }
    Ok(None)
}

/// Report for a source decomposition and an already computed curve of `channel`.
pub fn capacity_from_curve(kid: &KIDecomposition, curve: &TradeoffCurve, channel: &QuantumChannel) -> Result<CapacityReport> {
    let slope = slope_of(kid);
    let (r_q_star, r_c_star) = intersect(curve, slope)?;
    let c_g = r_q_star + r_c_star;
    let s_cq = kid.s_cq();
    let copies_per_use = (s_cq > ENTROPY_TOL).then(|| c_g / s_cq);
    let witness = match slope {
        Slope::Degenerate => None,
        _ => witness_at(curve, channel, r_q_star)?,
    };
    Ok(CapacityReport {
        slope,
        r_q_star,
        r_c_star,
        c_g,
        copies_per_use,
        level: curve.level,
        s_c: kid.s_c(),
        s_q_given_c: kid.s_q_given_c(),
        s_cq,
        curve_c_q: curve.c_q,
        curve_c_c: curve.c_c,
        witness,
    })
}

#[derive(Clone, Debug)]
pub struct CapacityOptions {
    pub curve: CurveOptions,
    pub grid: Vec<f64>,
    /// Seed of the generic elements used by the decomposition.
    pub ki_seed: u64,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self { curve: CurveOptions::default(), grid: chebyshev_grid(21), ki_seed: 0 }
    }
}

/// Full pipeline: decomposition of `rho` (with `a_label` as the source
/// system), trade-off curve of `channel` at level `l`, and the intersection.
pub fn generalized_capacity(
    rho: &DensityMatrix,
    a_label: &str,
    channel: &QuantumChannel,
    l: usize,
    opts: &CapacityOptions,
) -> Result<(CapacityReport, KIDecomposition, TradeoffCurve)> {
    let kid = ki_decompose(rho, a_label, &mut rng_from_seed(opts.ki_seed))?;
    let curve = compute_curve(channel, l, &opts.grid, &opts.curve)?;
    let report = capacity_from_curve(&kid, &curve, channel)?;
    Ok((report, kid, curve))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    /// Source copies per block of `n` channel uses; `None` when the source
    /// is degenerate.
    pub m: Option<u64>,
    /// `m · S(CQ) / n`.
    pub rate_check: f64,
}

/// Number of source copies `m` sent with `n` channel uses at slack `delta`:
/// `floor(min(n r_q*/(S(Q|C)+δ), n r_c*/(S(C)+δ)))`, keeping only the
/// constraint that is active when one of the entropies vanishes.
pub fn plan_block(report: &CapacityReport, kid: &KIDecomposition, n: u64, delta: f64) -> Result<BlockPlan> {
    if n == 0 {
        return Err(Error::InvalidArgument("block length must be positive".into()));
    }
    if !(delta > 0.0) {
        return Err(Error::InvalidArgument(format!("slack must be positive, got {delta}")));
    }
    let nf = n as f64;
    let quantum = nf * report.r_q_star / (kid.s_q_given_c() + delta);
    let classical = nf * report.r_c_star / (kid.s_c() + delta);
    let bound = match slope_of(kid) {
        Slope::Degenerate => return Ok(BlockPlan { m: None, rate_check: 0.0 }),
        Slope::Infinite => classical,
        Slope::Finite(s) if s == 0.0 => quantum,
        Slope::Finite(_) => quantum.min(classical),
    };
    // Guard against round-off pushing an exact integer just below itself.
    let m = (bound + 1e-9).floor().max(0.0) as u64;
    Ok(BlockPlan { m: Some(m), rate_check: m as f64 * kid.s_cq() / nf })
}
