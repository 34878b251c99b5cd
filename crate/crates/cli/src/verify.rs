//! Property suites behind `qcap verify`. Each check runs over seeded
//! instances and reports its worst case.

use qcap_core::channel::QuantumChannel;
use qcap_core::converse::{estimate_grid, evaluate_gadget, extend_source, ExtendedSource, Gadget, GadgetOptions};
use qcap_core::error::Result as CoreResult;
use qcap_core::info::{generalized_information, CQEnsemble};
use qcap_core::io::report_json;
use qcap_core::ki::ki_decompose;
use qcap_core::linalg::{self, CMat};
use qcap_core::measures::{conditional_mutual_information, fidelity, trace_distance};
use qcap_core::optimize::OptimizerOptions;
use qcap_core::random::{
    random_channel_with, random_ensemble_with, random_pure_with, random_state_rank_with, random_state_with, stream_rng, QRng,
};
use qcap_core::sources;
use qcap_core::space::TensorSpace;
use qcap_core::state::{DensityMatrix, PureState};
use qcap_core::typicality::{sample_typical_fraction, typical_count, typical_log2_count, typical_mass, TypicalSpec};
use rand::Rng;
use rayon::prelude::*;

use crate::args::{AllArgs, ConverseArgs, CoreArgs, TypicalityArgs};
use crate::commands::load_state;
use crate::reports::{Check, ConverseSource, GadgetGrid, GridPoint, TypicalityData, VerifyReport};
use crate::{emit, CliError, CliResult};

const TOL: f64 = 1e-9;

fn check(name: &str, passed: bool, detail: String) -> Check {
    Check { name: name.into(), passed, detail }
}

fn finish(report: &VerifyReport, out: Option<&std::path::Path>) -> CliResult<()> {
    emit(&report_json(report), out)?;
    if report.passed {
        Ok(())
    } else {
        let failed: Vec<&str> = report.checks.iter().filter(|c| !c.passed).map(|c| c.name.as_str()).collect();
        Err(CliError::Failed(format!("{} suite failed: {}", report.suite, failed.join(", "))))
    }
}

/// Largest value of `f` over `instances` independent streams. Streams are
/// indexed by instance, so the result does not depend on the worker count.
fn worst<F>(seed: u64, stream: u64, instances: usize, f: F) -> CliResult<f64>
where
    F: Fn(&mut QRng) -> CoreResult<f64> + Sync,
{
    let base = stream << 32;
    let vals: Vec<CoreResult<f64>> =
        (0..instances as u64).into_par_iter().map(|i| f(&mut stream_rng(seed, base + i))).collect();
    let mut out = f64::NEG_INFINITY;
    for v in vals {
        out = out.max(v?);
    }
    Ok(out)
}

/// Random channel with enough Kraus operators to exist.
fn channel(din: usize, dout: usize, rng: &mut QRng) -> CoreResult<QuantumChannel> {
    let min = din.div_ceil(dout);
    let k = rng.gen_range(min..=min + 2);
    random_channel_with(din, dout, k, rng)
}

fn mix(a: &DensityMatrix, b: &DensityMatrix, w: f64) -> CoreResult<DensityMatrix> {
    DensityMatrix::new(a.space().clone(), a.matrix().scale(1.0 - w) + b.matrix().scale(w))
}

fn qudit(label: &str, d: usize) -> TensorSpace {
    TensorSpace::single(label, d).expect("positive dimension")
}

fn fvdg(rng: &mut QRng) -> CoreResult<f64> {
    let d = rng.gen_range(2..=4);
    let s = qudit("A", d);
    let rho = random_state_rank_with(&s, rng.gen_range(1..=d), rng);
    let xi = mix(&rho, &random_state_with(&s, rng), rng.gen::<f64>())?;
    let f = fidelity(&rho, &xi)?;
    let t = trace_distance(&rho, &xi)?;
    Ok(((1.0 - f) - t).max(t - (1.0 - f * f).max(0.0).sqrt()))
}

fn fannes(rng: &mut QRng) -> CoreResult<f64> {
    let d = rng.gen_range(2..=5);
    let s = qudit("A", d);
    let rho = random_state_rank_with(&s, rng.gen_range(1..=d), rng);
    let other = random_state_rank_with(&s, rng.gen_range(1..=d), rng);
    let xi = mix(&rho, &other, rng.gen::<f64>())?;
    let t = trace_distance(&rho, &xi)?;
    let bound = t * (d as f64).log2() + linalg::binary_entropy(t.min(1.0));
    Ok((rho.entropy() - xi.entropy()).abs() - bound)
}

fn data_processing(rng: &mut QRng) -> CoreResult<f64> {
    let (da, dr, db, dc) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(2..=3), rng.gen_range(1..=3));
    let entries = rng.gen_range(1..=4);
    let ens = random_ensemble_with(da, dr, entries, rng)?;
    let n1 = channel(da, db, rng)?;
    let n2 = channel(db, dc, rng)?;
    Ok(generalized_information(&ens, &n1.compose(&n2)?)?.i_g - generalized_information(&ens, &n1)?.i_g)
}

/// `S(B) − S(BR)` from the explicit output state.
fn coherent_direct(psi: &PureState, ch: &QuantumChannel) -> CoreResult<f64> {
    let out = ch.apply(&psi.density(), "A")?;
    Ok(out.partial_trace(&["A"])?.entropy() - out.entropy())
}

/// Holevo information from explicit output states.
fn holevo_direct(ens: &CQEnsemble, ch: &QuantumChannel) -> CoreResult<f64> {
    let space = qudit("A", ens.dim_a());
    let mut avg = CMat::zeros(ch.dim_out(), ch.dim_out());
    let mut cond = 0.0;
    for (p, v) in ens.entries() {
        let out = ch.apply(&PureState::new(space.clone(), v.clone())?.density(), "A")?;
        cond += p * out.entropy();
        avg += out.matrix().scale(p);
    }
    Ok(linalg::matrix_entropy(&avg) - cond)
}

fn coherent_reduction(rng: &mut QRng) -> CoreResult<f64> {
    let (da, dr, db) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(2..=3));
    let ch = channel(da, db, rng)?;
    let single = random_ensemble_with(da, dr, 1, rng)?;
    let psi = PureState::new(TensorSpace::new([("A", da), ("R", dr)])?, single.vectors()[0].clone())?;
    Ok((generalized_information(&single, &ch)?.i_g - coherent_direct(&psi, &ch)?).abs())
}

fn holevo_reduction(rng: &mut QRng) -> CoreResult<f64> {
    let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
    let ch = channel(da, db, rng)?;
    let entries = rng.gen_range(1..=5);
    let ens = random_ensemble_with(da, 1, entries, rng)?;
    Ok((generalized_information(&ens, &ch)?.i_g - holevo_direct(&ens, &ch)?).abs())
}

fn strong_subadditivity(rng: &mut QRng) -> CoreResult<f64> {
    let space = TensorSpace::new([("A", 2), ("B", rng.gen_range(1..=3)), ("C", 2)])?;
    let rho = random_state_with(&space, rng);
    Ok(-conditional_mutual_information(&rho, &["A"], &["C"], &["B"])?)
}

/// `(1 − 4ε) − F(ξ^{AB}, ψ ⊗ ξ^B)` for `ξ` close to a product with pure `ψ`.
fn almost_product(rng: &mut QRng) -> CoreResult<f64> {
    let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
    let psi = random_pure_with(&qudit("A", da), rng).density();
    let beta = random_state_with(&qudit("B", db), rng);
    let noise = random_state_with(&TensorSpace::new([("A", da), ("B", db)])?, rng);
    let eta = 0.05 * rng.gen::<f64>();
    let xi = mix(&psi.tensor(&beta)?, &noise, eta)?;
    let eps = 1.0 - fidelity(&xi.partial_trace(&["A"])?, &psi)?;
    let product = psi.tensor(&xi.partial_trace(&["B"])?)?;
    Ok((1.0 - 4.0 * eps) - fidelity(&xi, &product)?)
}

fn core_checks(instances: usize, seed: u64) -> CliResult<Vec<Check>> {
    if instances == 0 {
        return Err(CliError::Invalid("--instances must be positive".into()));
    }
    type Probe = fn(&mut QRng) -> CoreResult<f64>;
    let suite: [(&str, Probe, f64); 7] = [
        ("fuchs_van_de_graaf", fvdg, TOL),
        ("fannes_audenaert", fannes, TOL),
        ("data_processing", data_processing, TOL),
        ("coherent_reduction", coherent_reduction, 1e-10),
        ("holevo_reduction", holevo_reduction, 1e-10),
        ("strong_subadditivity", strong_subadditivity, TOL),
        ("almost_product", almost_product, 0.0),
    ];
    let mut checks = Vec::new();
    for (i, (name, probe, tol)) in suite.into_iter().enumerate() {
        let w = worst(seed, i as u64, instances, probe)?;
        let detail = format!("{instances} instances, worst excess {w:.3e} (tolerance {tol:e})");
        checks.push(check(name, w <= tol, detail));
    }
    Ok(checks)
}

pub fn core(args: &CoreArgs) -> CliResult<()> {
    finish(&VerifyReport::new("core", args.seed, core_checks(args.instances, args.seed)?), args.out.as_deref())
}

fn builtin_sources(seed: u64) -> CliResult<Vec<(String, ExtendedSource)>> {
    let decompose = |rho: &DensityMatrix| -> CliResult<ExtendedSource> {
        Ok(extend_source(&ki_decompose(rho, "A", &mut stream_rng(seed, 0))?)?)
    };
    let two_block = TensorSpace::new([("C", 2), ("Q", 1), ("R", 2)])?;
    Ok(vec![
        ("classical_bit".into(), decompose(&sources::classical_bit_pair())?),
        ("bell_pair".into(), decompose(&sources::bell_pair())?),
        ("mixed_two_block".into(), ExtendedSource::from_cqr(&DensityMatrix::diagonal(two_block, &[0.3, 0.2, 0.1, 0.4])?)?),
    ])
}

fn file_source(path: &std::path::Path, a: &str, seed: u64) -> CliResult<ExtendedSource> {
    let rho = load_state(path)?;
    let labels: Vec<&str> = rho.space().labels().collect();
    if labels == ["C", "Q", "R"] {
        Ok(ExtendedSource::from_cqr(&rho)?)
    } else {
        Ok(extend_source(&ki_decompose(&rho, a, &mut stream_rng(seed, 0))?)?)
    }
}

fn converse_suite(
    srcs: &[(String, ExtendedSource)],
    grid: &[f64],
    restarts: usize,
    iters: usize,
    seed: u64,
) -> CliResult<(Vec<Check>, Vec<ConverseSource>)> {
    if grid.is_empty() {
        return Err(CliError::Invalid("--eps-grid must not be empty".into()));
    }
    if restarts == 0 {
        return Err(CliError::Invalid("--restarts must be positive".into()));
    }
    let mut data = Vec::new();
    let (mut anchor, mut shortfall, mut drift): (f64, f64, f64) = (0.0, f64::NEG_INFINITY, 0.0);
    let mut monotone = true;
    for (i, (name, src)) in srcs.iter().enumerate() {
        let opts = GadgetOptions {
            optimizer: OptimizerOptions { restarts, max_iters: iters, seed: seed.wrapping_add(i as u64), ..Default::default() },
            ..Default::default()
        };
        let mut grids = Vec::new();
        for g in [Gadget::Y, Gadget::W] {
            let ests = estimate_grid(src, g, grid, &opts)?;
            monotone &= ests.windows(2).all(|w| w[1].value >= w[0].value);
            if grid[0] == 0.0 {
                anchor = anchor.max(ests[0].value);
            }
            for e in &ests {
                let (v, f) = evaluate_gadget(src, g, &e.witness)?;
                drift = drift.max((v - e.value).abs()).max((f - e.achieved_fidelity).abs());
                shortfall = shortfall.max((1.0 - e.epsilon) - f);
            }
            let points = ests
                .iter()
                .map(|e| GridPoint { epsilon: e.epsilon, value: e.value, achieved_fidelity: e.achieved_fidelity })
                .collect();
            grids.push(GadgetGrid { gadget: g, points });
        }
        data.push(ConverseSource { name: name.clone(), dim_C: src.dim_c(), dim_Q: src.dim_q(), dim_R: src.dim_r(), grids });
    }
    let mut checks = vec![
        check("monotone", monotone, "estimates non-decreasing along the grid".into()),
        check("feasible", shortfall <= 1e-6, format!("worst fidelity shortfall {shortfall:.3e} (tolerance 1e-6)")),
        check("witnesses", drift <= TOL, format!("re-evaluated witnesses differ by at most {drift:.3e}")),
    ];
    if grid[0] == 0.0 {
        checks.insert(0, check("anchored", anchor <= 1e-3, format!("largest estimate at ε = 0 is {anchor:.3e} (tolerance 1e-3)")));
    }
    Ok((checks, data))
}

pub fn converse(args: &ConverseArgs) -> CliResult<()> {
    let srcs = match &args.source {
        Some(p) => vec![(p.display().to_string(), file_source(p, &args.a_label, args.seed)?)],
        None => builtin_sources(args.seed)?,
    };
    let (checks, data) = converse_suite(&srcs, &args.eps_grid, args.restarts, args.iters, args.seed)?;
    let mut report = VerifyReport::new("converse", args.seed, checks);
    report.converse = Some(data);
    finish(&report, args.out.as_deref())
}

fn typicality_suite(p: &[f64], n: usize, delta: f64, samples: usize, seed: u64) -> CliResult<(Vec<Check>, TypicalityData)> {
    if samples == 0 {
        return Err(CliError::Invalid("--samples must be positive".into()));
    }
    let spec = TypicalSpec::new(p.to_vec(), n, delta)?;
    let (h, c) = (spec.entropy(), spec.constant());
    let log2_bound = n as f64 * (h + c * delta);
    let log2_count = typical_log2_count(&spec);
    let mass = typical_mass(&spec);
    let frac = sample_typical_fraction(&spec, samples, &mut stream_rng(seed, 0));

    let mut small = 0;
    let mut small_ok = true;
    for m in 1..=n.min(12) {
        for d in [0.02, 0.05, 0.1, 0.2, delta] {
            let s = TypicalSpec::new(p.to_vec(), m, d)?;
            small_ok &= typical_count(&s) <= s.dimension_bound();
            small += 1;
        }
    }
    let sigma = (mass * (1.0 - mass) / samples as f64).sqrt();
    let slack = 5.0 * sigma + 1.0 / samples as f64;
    let checks = vec![
        check(
            "dimension_bound",
            log2_count <= log2_bound + TOL,
            format!("log2 |T| = {log2_count:.4} against the bound {log2_bound:.4}"),
        ),
        check("small_block_bounds", small_ok, format!("{small} exact counts within their bounds")),
        check(
            "sampled_fraction",
            (frac - mass).abs() <= slack,
            format!("sampled {frac:.4} against the exact mass {mass:.4} (allowed deviation {slack:.4})"),
        ),
    ];
    let data = TypicalityData {
        p: p.to_vec(),
        n,
        delta,
        entropy: h,
        constant: c,
        log2_dimension_bound: log2_bound,
        log2_typical_count: log2_count,
        typical_mass: mass,
        samples,
        sampled_fraction: frac,
    };
    Ok((checks, data))
}

pub fn typicality(args: &TypicalityArgs) -> CliResult<()> {
    let (checks, data) = typicality_suite(&args.dist, args.n, args.delta, args.samples, args.seed)?;
    let mut report = VerifyReport::new("typicality", args.seed, checks);
    report.typicality = Some(data);
    finish(&report, args.out.as_deref())
}

pub fn all(args: &AllArgs) -> CliResult<()> {
    let prefixed = |suite: &str, checks: Vec<Check>| {
        checks.into_iter().map(move |c| Check { name: format!("{suite}/{}", c.name), ..c }).collect::<Vec<_>>()
    };
    let mut checks = prefixed("core", core_checks(200, args.seed)?);
    let (conv, conv_data) = converse_suite(&builtin_sources(args.seed)?, &[0.0, 0.01, 0.02, 0.05, 0.1], 4, 40, args.seed)?;
    checks.extend(prefixed("converse", conv));
    let (typ, typ_data) = typicality_suite(&[0.3, 0.7], 2000, 0.05, 10_000, args.seed)?;
    checks.extend(prefixed("typicality", typ));
    let mut report = VerifyReport::new("all", args.seed, checks);
    report.converse = Some(conv_data);
    report.typicality = Some(typ_data);
    finish(&report, args.out.as_deref())
}
