//! Classical/quantum rate trade-off of a channel at a fixed blocking level,
//! found by scalarized optimization over cq ensembles followed by an upper
//! concave envelope.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::channel::QuantumChannel;
use crate::error::{Error, Result};
use crate::info::{marginal_a, rates_from_terms, BranchTerms, CQEnsemble};
use crate::linalg::{c, CVec};
use crate::optimize::{maximize, Objective, OptimizerOptions};
use crate::random::QRng;
use crate::state::PureState;

/// Tolerance of the envelope validation (monotonicity and concavity).
pub const ENVELOPE_TOL: f64 = 1e-7;

/// `(r_q, r_c) = (I(R⟩B^lX)/l, I(B^l:X)/l)` for `ens` sent through
/// `channel_l = N^{⊗l}`. The coherent term is clamped at 0.
pub fn evaluate_point(ens: &CQEnsemble, channel_l: &QuantumChannel, l: usize) -> Result<(f64, f64)> {
    let (r_q, r_c) = evaluate_raw(ens, channel_l, l)?;
    Ok((r_q.max(0.0), r_c))
}

fn evaluate_raw(ens: &CQEnsemble, channel_l: &QuantumChannel, l: usize) -> Result<(f64, f64)> {
    if l == 0 {
        return Err(Error::InvalidArgument("level must be at least 1".into()));
    }
    let gi = crate::info::generalized_information(ens, channel_l)?;
    Ok((gi.r_q / l as f64, gi.r_c / l as f64))
}

/// Chebyshev-spaced weights `t_i = (1 − cos(π i/(n−1)))/2` in `[0, 1]`.
pub fn chebyshev_grid(n: usize) -> Vec<f64> {
    match n {
        0 => Vec::new(),
        1 => vec![0.5],
        _ => (0..n)
            .map(|i| {
                let t = 0.5 * (1.0 - (std::f64::consts::PI * i as f64 / (n - 1) as f64).cos());
                // Pin the ends exactly.
                if i == 0 {
                    0.0
                } else if i == n - 1 {
                    1.0
                } else {
                    t
                }
            })
            .collect(),
    }
}

/// Ensemble parameterization: `k` square-root weights followed by `k` complex
/// vectors on `A ⊗ R` stored as interleaved `(re, im)` pairs.
struct Scalarized<'a> {
    channel: &'a QuantumChannel,
    dim_a: usize,
    dim_r: usize,
    k: usize,
    t: f64,
    warm: Option<Vec<f64>>,
}

impl<'a> Scalarized<'a> {
    fn n(&self) -> usize {
        self.dim_a * self.dim_r
    }

    fn probs(&self, x: &[f64]) -> Vec<f64> {
        let a = &x[..self.k];
        let total: f64 = a.iter().map(|v| v * v).sum();
        a.iter().map(|v| v * v / total).collect()
    }

    fn vector(&self, x: &[f64], e: usize) -> CVec {
        let n = self.n();
        let base = self.k + 2 * n * e;
        let v = CVec::from_fn(n, |i, _| c(x[base + 2 * i], x[base + 2 * i + 1]));
        let norm = v.norm();
        v.unscale(norm)
    }

    fn terms(&self, x: &[f64], e: usize) -> BranchTerms {
        BranchTerms::new(self.channel, &marginal_a(&self.vector(x, e), self.dim_a, self.dim_r))
    }

    fn combine(&self, probs: &[f64], terms: &[BranchTerms]) -> f64 {
        let (r_c, r_q) = rates_from_terms(probs, terms, self.channel.dim_out());
        self.t * r_q + (1.0 - self.t) * r_c
    }

    fn ensemble(&self, x: &[f64]) -> CQEnsemble {
        let vectors = (0..self.k).map(|e| self.vector(x, e)).collect();
        CQEnsemble::from_parts_unchecked(self.dim_a, self.dim_r, self.probs(x), vectors)
    }

    fn encode(&self, ens: &CQEnsemble, rng: &mut QRng) -> Vec<f64> {
        let n = self.n();
        let mut x = vec![0.0; self.dim()];
        for e in 0..self.k {
            let base = self.k + 2 * n * e;
            if e < ens.len() {
                x[e] = ens.probs()[e].sqrt();
                for (i, z) in ens.vectors()[e].iter().enumerate() {
                    x[base + 2 * i] = z.re;
                    x[base + 2 * i + 1] = z.im;
                }
            } else {
                // Unused slots get a tiny weight so they can still grow.
                x[e] = 1e-4;
                for v in &mut x[base..base + 2 * n] {
                    *v = rng.sample(rand_distr::StandardNormal);
                }
            }
        }
        x
    }
}

impl<'a> Objective for Scalarized<'a> {
    fn dim(&self) -> usize {
        self.k * (1 + 2 * self.n())
    }

    fn value(&self, x: &[f64]) -> f64 {
        let terms: Vec<BranchTerms> = (0..self.k).map(|e| self.terms(x, e)).collect();
        self.combine(&self.probs(x), &terms)
    }

    fn project(&self, x: &mut [f64]) {
        let k = self.k;
        let n = self.n();
        let total: f64 = x[..k].iter().map(|v| v * v).sum::<f64>().sqrt();
        x[..k].iter_mut().for_each(|v| *v /= total);
        for e in 0..k {
            let block = &mut x[k + 2 * n * e..k + 2 * n * (e + 1)];
            let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
            block.iter_mut().for_each(|v| *v /= norm);
        }
    }

    fn start(&self, index: usize, rng: &mut QRng) -> Vec<f64> {
        if index == 0 {
            if let Some(w) = &self.warm {
                return w.clone();
            }
        }
        (0..self.dim()).map(|_| rng.sample(rand_distr::StandardNormal)).collect()
    }

    /// Only one branch changes per vector coordinate and no branch changes per
    /// weight coordinate, so cached branch terms are reused.
    fn gradient(&self, x: &[f64], h: f64) -> Vec<f64> {
        let k = self.k;
        let n = self.n();
        let mut terms: Vec<BranchTerms> = (0..k).map(|e| self.terms(x, e)).collect();
        let probs = self.probs(x);
        let mut y = x.to_vec();
        let mut grad = vec![0.0; x.len()];
        for i in 0..k {
            let orig = y[i];
            y[i] = orig + h;
            let up = self.combine(&self.probs(&y), &terms);
            y[i] = orig - h;
            let down = self.combine(&self.probs(&y), &terms);
            y[i] = orig;
            grad[i] = (up - down) / (2.0 * h);
        }
        for e in 0..k {
            if probs[e] == 0.0 {
                continue;
            }
            let saved = terms[e].clone();
            for j in 0..2 * n {
                let idx = k + 2 * n * e + j;
                let orig = y[idx];
                y[idx] = orig + h;
                terms[e] = self.terms(&y, e);
                let up = self.combine(&probs, &terms);
                y[idx] = orig - h;
                terms[e] = self.terms(&y, e);
                let down = self.combine(&probs, &terms);
                y[idx] = orig;
                grad[idx] = (up - down) / (2.0 * h);
            }
            terms[e] = saved;
        }
        grad
    }
}

/// Outcome of one scalarized run.
#[derive(Clone, Debug)]
pub struct ScalarizedResult {
    pub t: f64,
    pub ensemble: CQEnsemble,
    /// Clamped coherent rate per channel use.
    pub r_q: f64,
    pub r_c: f64,
    /// `t·r_q + (1−t)·r_c` with the signed coherent term.
    pub objective: f64,
    /// Set when no restart beat the maximally mixed baseline; the baseline
    /// ensemble is returned instead.
    pub baseline_warning: bool,
}

/// Single maximally entangled entry: maximally mixed input, no flag.
pub fn baseline_ensemble(dim_a: usize) -> CQEnsemble {
    let psi = PureState::maximally_entangled("A", "R", dim_a).expect("positive dimension");
    CQEnsemble::single(&psi).expect("valid state")
}

/// Local maximizer of `(1−t)·r_c + t·r_q` at level `l` over ensembles with
/// `dim(A^l)² + 2` entries and `dim R = dim(A^l)`. `warm` seeds restart 0.
pub fn optimize_scalarized(
    channel: &QuantumChannel,
    l: usize,
    t: f64,
    opts: &OptimizerOptions,
    warm: Option<&CQEnsemble>,
) -> Result<ScalarizedResult> {
    if !(0.0..=1.0).contains(&t) {
        return Err(Error::InvalidArgument(format!("weight t = {t} outside [0, 1]")));
    }
    let channel_l = channel.power(l)?;
    optimize_level_channel(&channel_l, l, t, opts, warm)
}

fn optimize_level_channel(
    channel_l: &QuantumChannel,
    l: usize,
    t: f64,
    opts: &OptimizerOptions,
    warm: Option<&CQEnsemble>,
) -> Result<ScalarizedResult> {
    let dim_a = channel_l.dim_in();
    let mut problem = Scalarized { channel: channel_l, dim_a, dim_r: dim_a, k: dim_a * dim_a + 2, t, warm: None };
    if let Some(w) = warm {
        if w.dim_a() != dim_a || w.dim_r() != dim_a || w.len() > problem.k {
            return Err(Error::InvalidEnsemble("warm start does not fit the parameterization".into()));
        }
        let mut rng = crate::random::stream_rng(opts.seed, u64::MAX);
        problem.warm = Some(problem.encode(w, &mut rng));
    }
    let best = maximize(&problem, opts);
    let baseline = baseline_ensemble(dim_a);
    let (bq, bc) = evaluate_raw(&baseline, channel_l, 1)?;
    // Region membership only credits non-negative coherent rates.
    let base_value = t * bq.max(0.0) + (1.0 - t) * bc;
    let lf = l as f64;
    if best.value <= base_value + 1e-12 {
        return Ok(ScalarizedResult {
            t,
            r_q: (bq / lf).max(0.0),
            r_c: bc / lf,
            objective: (t * bq + (1.0 - t) * bc) / lf,
            ensemble: baseline,
            baseline_warning: true,
        });
    }
    let ensemble = problem.ensemble(&best.x);
    let (r_q, r_c) = evaluate_point(&ensemble, channel_l, l)?;
    Ok(ScalarizedResult { t, ensemble, r_q, r_c, objective: best.value / lf, baseline_warning: false })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CurvePoint {
    pub r_q: f64,
    pub r_c: f64,
    /// Weight of the scalarized run that produced the point; `None` for
    /// synthetic points.
    pub t: Option<f64>,
    /// Axis projection or the origin. A projection keeps the witness of the
    /// sample it projects, whose rates dominate the point.
    pub synthetic: bool,
    /// Ensemble achieving at least the point's rates.
    #[serde(skip)]
    pub witness: Option<CQEnsemble>,
}

#[derive(Clone, Debug)]
pub struct TradeoffCurve {
    pub level: usize,
    /// Vertices of the upper concave envelope, ascending in `r_q`.
    pub points: Vec<CurvePoint>,
    /// Raw scalarized results in grid order.
    pub samples: Vec<ScalarizedResult>,
    pub c_q: f64,
    pub c_c: f64,
}

impl TradeoffCurve {
    /// Builds the envelope from raw samples.
    pub fn from_samples(level: usize, samples: Vec<ScalarizedResult>) -> Result<Self> {
        if samples.is_empty() {
            return Err(Error::InvalidArgument("no samples".into()));
        }
        let mut cands: Vec<CurvePoint> = vec![CurvePoint { r_q: 0.0, r_c: 0.0, t: None, synthetic: true, witness: None }];
        for s in &samples {
            cands.push(CurvePoint {
                r_q: s.r_q,
                r_c: s.r_c.max(0.0),
                t: Some(s.t),
                synthetic: false,
                witness: Some(s.ensemble.clone()),
            });
            let witness = Some(s.ensemble.clone());
            cands.push(CurvePoint { r_q: 0.0, r_c: s.r_c.max(0.0), t: None, synthetic: true, witness: witness.clone() });
            cands.push(CurvePoint { r_q: s.r_q, r_c: 0.0, t: None, synthetic: true, witness });
        }
        // Ascending r_q, then descending r_c; witnessed points first on exact ties.
        cands.sort_by(|a, b| {
            a.r_q
                .total_cmp(&b.r_q)
                .then(b.r_c.total_cmp(&a.r_c))
                .then(a.synthetic.cmp(&b.synthetic))
        });
        let mut hull: Vec<CurvePoint> = Vec::new();
        for p in cands {
            if let Some(last) = hull.last() {
                if last.r_q == p.r_q {
                    continue;
                }
            }
            while hull.len() >= 2 {
                let a = &hull[hull.len() - 2];
                let b = &hull[hull.len() - 1];
                let cross = (b.r_q - a.r_q) * (p.r_c - a.r_c) - (b.r_c - a.r_c) * (p.r_q - a.r_q);
                if cross >= 0.0 {
                    hull.pop();
                } else {
                    break;
                }
            }
            hull.push(p);
        }
        let c_c = hull.first().map(|p| p.r_c).unwrap_or(0.0);
        let c_q = hull.last().map(|p| p.r_q).unwrap_or(0.0);
        let curve = Self { level, points: hull, samples, c_q, c_c };
        curve.validate()?;
        Ok(curve)
    }

    /// Checks ascending `r_q`, non-negative rates, non-increasing `r_c`, and
    /// non-increasing chord slopes.
    pub fn validate(&self) -> Result<()> {
        let pts = &self.points;
        for p in pts {
            if p.r_q < -1e-9 || p.r_c < -1e-9 {
                return Err(Error::Numerical(format!("negative rate pair ({}, {})", p.r_q, p.r_c)));
            }
        }
        for w in pts.windows(2) {
            if w[1].r_q <= w[0].r_q || w[1].r_c > w[0].r_c + ENVELOPE_TOL {
                return Err(Error::Numerical("envelope is not monotone".into()));
            }
        }
        for w in pts.windows(3) {
            let s1 = (w[1].r_c - w[0].r_c) / (w[1].r_q - w[0].r_q);
            let s2 = (w[2].r_c - w[1].r_c) / (w[2].r_q - w[1].r_q);
            if s2 > s1 + ENVELOPE_TOL {
                return Err(Error::Numerical("envelope is not concave".into()));
            }
        }
        Ok(())
    }

    /// Envelope value `f(r_q)`; zero beyond `c_q`.
    pub fn value_at(&self, r_q: f64) -> f64 {
        let pts = &self.points;
        if r_q <= 0.0 {
            return self.c_c;
        }
        if r_q >= self.c_q {
            return if r_q == self.c_q { pts.last().map(|p| p.r_c).unwrap_or(0.0) } else { 0.0 };
        }
        for w in pts.windows(2) {
            if r_q <= w[1].r_q {
                let lam = (r_q - w[0].r_q) / (w[1].r_q - w[0].r_q);
                return w[0].r_c + lam * (w[1].r_c - w[0].r_c);
            }
        }
        0.0
    }

    /// Ensemble achieving a point on the envelope segment at `r_q` by mixing
    /// the witnesses of its two endpoints, when both have witnesses.
    pub fn time_sharing_witness(&self, r_q: f64) -> Option<(CQEnsemble, f64)> {
        let pts = &self.points;
        for w in pts.windows(2) {
            if r_q >= w[0].r_q && r_q <= w[1].r_q {
                let (a, b) = (w[0].witness.as_ref()?, w[1].witness.as_ref()?);
                let lam = (w[1].r_q - r_q) / (w[1].r_q - w[0].r_q);
                return a.mix(b, lam).ok().map(|e| (e, lam));
            }
        }
        None
    }
}

/// Options for [`compute_curve`].
#[derive(Clone, Debug, Default)]
pub struct CurveOptions {
    pub optimizer: OptimizerOptions,
    /// Curve at a level dividing this one; its witnesses, raised to the
    /// matching tensor power and pruned, seed restart 0 at each weight.
    pub warm_start: Option<TradeoffCurve>,
}

/// Tensor power of `ens` keeping the `max_entries` heaviest entries.
pub fn tensor_power_pruned(ens: &CQEnsemble, power: usize, max_entries: usize) -> CQEnsemble {
    let mut out = ens.clone();
    for _ in 1..power {
        out = out.tensor(ens);
    }
    if out.len() <= max_entries {
        return out;
    }
    let mut order: Vec<usize> = (0..out.len()).collect();
    order.sort_by(|&a, &b| out.probs()[b].total_cmp(&out.probs()[a]).then(a.cmp(&b)));
    order.truncate(max_entries);
    let kept = out.reordered(&order);
    let total: f64 = kept.probs().iter().sum();
    let probs = kept.probs().iter().map(|p| p / total).collect();
    CQEnsemble::from_parts_unchecked(kept.dim_a(), kept.dim_r(), probs, kept.vectors().to_vec())
}

/// Scalarized optimization over `t_grid` followed by the concave envelope.
pub fn compute_curve(channel: &QuantumChannel, l: usize, t_grid: &[f64], opts: &CurveOptions) -> Result<TradeoffCurve> {
    if t_grid.iter().any(|t| !(0.0..=1.0).contains(t)) {
        return Err(Error::InvalidArgument("weights must lie in [0, 1]".into()));
    }
    if !t_grid.contains(&0.0) || !t_grid.contains(&1.0) {
        return Err(Error::InvalidArgument("weight grid must include 0 and 1".into()));
    }
    let channel_l = channel.power(l)?;
    let k = channel_l.dim_in() * channel_l.dim_in() + 2;
    let mut samples = Vec::with_capacity(t_grid.len());
    for &t in t_grid {
        let warm = match &opts.warm_start {
            Some(prev) if prev.level > 0 && l % prev.level == 0 && l > prev.level => prev
                .samples
                .iter()
                .min_by(|a, b| (a.t - t).abs().total_cmp(&(b.t - t).abs()))
                .map(|s| tensor_power_pruned(&s.ensemble, l / prev.level, k))
                .map(|e| pad_reference(&e, channel_l.dim_in())),
            _ => None,
        };
        samples.push(optimize_level_channel(&channel_l, l, t, &opts.optimizer, warm.as_ref())?);
    }
    TradeoffCurve::from_samples(l, samples)
}

/// Embeds the reference of every branch into dimension `dim_r` (zero padding).
fn pad_reference(ens: &CQEnsemble, dim_r: usize) -> CQEnsemble {
    if ens.dim_r() == dim_r {
        return ens.clone();
    }
    let (da, dr) = (ens.dim_a(), ens.dim_r());
    let vectors = ens
        .vectors()
        .iter()
        .map(|v| {
            let mut w = CVec::zeros(da * dim_r);
            for a in 0..da {
                for r in 0..dr.min(dim_r) {
                    w[a * dim_r + r] = v[a * dr + r];
                }
            }
            w
        })
        .collect();
    CQEnsemble::from_parts_unchecked(da, dim_r, ens.probs().to_vec(), vectors)
}
