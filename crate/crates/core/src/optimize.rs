//! Multi-start projected gradient ascent with central-difference gradients.
//!
//! Restarts draw from independent counter-based streams of one seed and run
//! in parallel; the best result (ties to the lowest restart index) is
//! returned, so the outcome does not depend on thread scheduling.

use rayon::prelude::*;

use crate::random::{stream_rng, QRng};

#[derive(Clone, Debug, PartialEq)]
pub struct OptimizerOptions {
    pub restarts: usize,
    pub max_iters: usize,
    pub seed: u64,
    /// Central-difference step.
    pub fd_step: f64,
    pub initial_step: f64,
    /// Ascent stops once the adaptive step falls below this.
    pub min_step: f64,
}

impl Default for OptimizerOptions {
    fn default() -> Self {
        Self { restarts: 24, max_iters: 300, seed: 0, fd_step: 1e-5, initial_step: 0.2, min_step: 1e-9 }
    }
}

/// A smooth function of real parameters to maximize. `value` is expected to
/// be defined off the feasible set too (for example by normalizing
/// internally) so that finite differences never leave its domain.
pub trait Objective: Sync {
    fn dim(&self) -> usize;

    fn value(&self, x: &[f64]) -> f64;

    /// Maps a point back onto the feasible set after a step.
    fn project(&self, _x: &mut [f64]) {}

    /// Starting point for restart `index`.
    fn start(&self, index: usize, rng: &mut QRng) -> Vec<f64>;

    fn gradient(&self, x: &[f64], h: f64) -> Vec<f64> {
        let mut y = x.to_vec();
        (0..x.len())
            .map(|i| {
                let orig = y[i];
                y[i] = orig + h;
                let up = self.value(&y);
                y[i] = orig - h;
                let down = self.value(&y);
                y[i] = orig;
                (up - down) / (2.0 * h)
            })
            .collect()
    }
}

#[derive(Clone, Debug)]
pub struct OptimResult {
    pub x: Vec<f64>,
    pub value: f64,
    pub restart: usize,
    pub iterations: usize,
}

/// Adaptive-step ascent from `x`: a step is kept only if it improves the
/// objective; the step grows after success and halves after failure.
pub fn ascend<O: Objective + ?Sized>(obj: &O, mut x: Vec<f64>, opts: &OptimizerOptions) -> (Vec<f64>, f64, usize) {
    obj.project(&mut x);
    let mut value = obj.value(&x);
    let mut step = opts.initial_step;
    let mut grad = obj.gradient(&x, opts.fd_step);
    let mut iters = 0;
    while iters < opts.max_iters && step >= opts.min_step {
        iters += 1;
        let norm = grad.iter().map(|g| g * g).sum::<f64>().sqrt();
        if norm < 1e-12 {
            break;
        }
        let mut y: Vec<f64> = x.iter().zip(&grad).map(|(a, g)| a + step * g / norm).collect();
        obj.project(&mut y);
        let v = obj.value(&y);
        if v > value {
            x = y;
            value = v;
            step *= 1.5;
            grad = obj.gradient(&x, opts.fd_step);
        } else {
            step *= 0.5;
        }
    }
    (x, value, iters)
}

pub fn maximize<O: Objective + ?Sized>(obj: &O, opts: &OptimizerOptions) -> OptimResult {
    let runs: Vec<OptimResult> = (0..opts.restarts.max(1))
        .into_par_iter()
        .map(|i| {
            let mut rng = stream_rng(opts.seed, i as u64);
            let x0 = obj.start(i, &mut rng);
            let (x, value, iterations) = ascend(obj, x0, opts);
            OptimResult { x, value, restart: i, iterations }
        })
        .collect();
    runs.into_iter()
        .reduce(|best, r| if r.value > best.value { r } else { best })
        .expect("at least one restart")
}
