//! End-to-end acceptance checks. Prints one PASS/FAIL line per criterion and
//! exits non-zero if any fails.

use std::process::ExitCode;
use std::time::Instant;

use qcap_core::capacity::{capacity_from_curve, Slope};
use qcap_core::channel::QuantumChannel;
use qcap_core::converse::{estimate_grid, evaluate_gadget, extend_source, ExtendedSource, Gadget, GadgetOptions};
use qcap_core::info::{generalized_information, CQEnsemble};
use qcap_core::ki::{ki_decompose, planted_state};
use qcap_core::linalg::{self, CMat};
use qcap_core::measures::{fidelity, trace_distance};
use qcap_core::optimize::OptimizerOptions;
use qcap_core::random::{
    random_channel_with, random_ensemble_with, random_pure_with, random_state_rank_with, random_state_with, rng_from_seed,
};
use qcap_core::sources;
use qcap_core::space::TensorSpace;
use qcap_core::state::{DensityMatrix, PureState};
use qcap_core::tradeoff::{chebyshev_grid, compute_curve, CurveOptions, TradeoffCurve};
use qcap_core::typicality::{sample_typical_fraction, typical_count, TypicalSpec};
use rand::Rng;

type Outcome = Result<String, String>;

fn ensure(ok: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

/// Random channel with enough Kraus operators to exist.
fn channel(din: usize, dout: usize, rng: &mut qcap_core::random::QRng) -> QuantumChannel {
    let min = din.div_ceil(dout);
    let k = rng.gen_range(min..=min + 2);
    random_channel_with(din, dout, k, rng).unwrap()
}

fn h2(p: f64) -> f64 {
    -p * p.log2() - (1.0 - p) * (1.0 - p).log2()
}

fn curve(ch: &QuantumChannel) -> TradeoffCurve {
    compute_curve(ch, 1, &chebyshev_grid(21), &CurveOptions::default()).expect("curve")
}

struct Curves {
    identity: TradeoffCurve,
    dephasing: TradeoffCurve,
    full: TradeoffCurve,
}

fn ac1(c: &Curves) -> Outcome {
    let cv = &c.identity;
    let sup = (0..=20)
        .map(|i| i as f64 / 20.0)
        .map(|r| (cv.value_at(r) - (1.0 - r)).abs())
        .fold(0.0, f64::max);
    ensure(sup <= 0.02, || format!("sup-norm {sup:.4}"))?;
    ensure((cv.c_q - 1.0).abs() <= 1e-3 && (cv.c_c - 1.0).abs() <= 1e-3, || {
        format!("endpoints c_q = {:.5}, c_c = {:.5}", cv.c_q, cv.c_c)
    })?;
    Ok(format!("sup-norm {sup:.2e}, c_q = {:.5}, c_c = {:.5}", cv.c_q, cv.c_c))
}

fn ac2(c: &Curves) -> Outcome {
    let cv = &c.dephasing;
    let want = 1.0 - h2(0.1);
    ensure((cv.c_q - want).abs() <= 0.01, || format!("c_q = {:.5}, expected {want:.5}", cv.c_q))?;
    ensure((cv.c_c - 1.0).abs() <= 0.01, || format!("c_c = {:.5}", cv.c_c))?;
    Ok(format!("c_q = {:.5} (oracle {want:.5}), c_c = {:.5}", cv.c_q, cv.c_c))
}

fn ac3(c: &Curves) -> Outcome {
    let cv = &c.full;
    ensure(cv.c_q <= 1e-3, || format!("c_q = {:.2e}", cv.c_q))?;
    ensure((cv.c_c - 1.0).abs() <= 1e-3, || format!("c_c = {:.5}", cv.c_c))?;
    Ok(format!("c_q = {:.2e}, c_c = {:.5}", cv.c_q, cv.c_c))
}

fn kid_of(rho: &DensityMatrix) -> qcap_core::ki::KIDecomposition {
    ki_decompose(rho, "A", &mut rng_from_seed(0)).expect("decomposition")
}

fn ac4(c: &Curves) -> Outcome {
    let id = QuantumChannel::identity(2).unwrap();
    let mut notes = Vec::new();
    for (name, cv, ch) in [
        ("identity", &c.identity, &id),
        ("dephasing(0.1)", &c.dephasing, &QuantumChannel::dephasing(0.1).unwrap()),
        ("dephasing(0.5)", &c.full, &QuantumChannel::dephasing(0.5).unwrap()),
    ] {
        let cl = capacity_from_curve(&kid_of(&sources::classical_bit_pair()), cv, ch).map_err(|e| e.to_string())?;
        let bell = capacity_from_curve(&kid_of(&sources::bell_pair()), cv, ch).map_err(|e| e.to_string())?;
        ensure(cl.slope == Slope::Infinite && cl.c_g == cv.c_c, || format!("{name}: classical c_g {} vs c_c {}", cl.c_g, cv.c_c))?;
        ensure(bell.slope == Slope::Finite(0.0) && bell.c_g == cv.c_q, || format!("{name}: Bell c_g {} vs c_q {}", bell.c_g, cv.c_q))?;
        if name == "identity" {
            ensure((cl.c_g - 1.0).abs() <= 0.02 && (bell.c_g - 1.0).abs() <= 0.02, || {
                format!("identity: classical {:.4}, Bell {:.4}", cl.c_g, bell.c_g)
            })?;
            notes.push(format!("identity classical {:.4}, Bell {:.4}", cl.c_g, bell.c_g));
        }
    }
    Ok(notes.join("; "))
}

fn ac5(c: &Curves) -> Outcome {
    let id = QuantumChannel::identity(2).unwrap();
    let r = capacity_from_curve(&kid_of(&sources::bit_and_ebit()), &c.identity, &id).map_err(|e| e.to_string())?;
    let copies = r.copies_per_use.unwrap_or(f64::NAN);
    ensure(r.slope == Slope::Finite(1.0) || matches!(r.slope, Slope::Finite(s) if (s - 1.0).abs() < 1e-9), || {
        format!("slope {:?}", r.slope)
    })?;
    ensure((r.c_g - 1.0).abs() <= 0.02, || format!("c_g = {:.4}", r.c_g))?;
    ensure((r.r_q_star - 0.5).abs() <= 0.01 && (r.r_c_star - 0.5).abs() <= 0.01, || {
        format!("intersection ({:.4}, {:.4})", r.r_q_star, r.r_c_star)
    })?;
    ensure((copies - 0.5).abs() <= 0.01, || format!("copies per use {copies:.4}"))?;
    Ok(format!("c_g = {:.4}, intersection ({:.4}, {:.4}), copies {copies:.4}", r.c_g, r.r_q_star, r.r_c_star))
}

fn ac6() -> Outcome {
    let mut worst_rec: f64 = 0.0;
    let mut worst_ent: f64 = 0.0;
    for seed in 0..50u64 {
        let mut rng = rng_from_seed(1000 + seed);
        let mut plan = Vec::new();
        let mut used = 0;
        for _ in 0..rng.gen_range(1..=3) {
            let (d, m) = (rng.gen_range(1..=2), rng.gen_range(1..=2));
            if used + d * m > 8 {
                break;
            }
            used += d * m;
            plan.push((rng.gen_range(0.2..1.0), d, m));
        }
        let total: f64 = plan.iter().map(|b: &(f64, usize, usize)| b.0).sum();
        plan.iter_mut().for_each(|b| b.0 /= total);
        let extra = if used < 8 { (seed % 2) as usize } else { 0 };
        let planted = planted_state(&plan, 2 + (seed % 2) as usize, extra, &mut rng).map_err(|e| e.to_string())?;
        let kid = ki_decompose(&planted.state, "A", &mut rng_from_seed(seed)).map_err(|e| format!("seed {seed}: {e}"))?;
        let mut want: Vec<(usize, usize)> = plan.iter().map(|b| (b.1, b.2)).collect();
        let mut got: Vec<(usize, usize)> = kid.blocks().iter().map(|b| (b.dim_q, b.dim_n)).collect();
        want.sort();
        got.sort();
        ensure(want == got, || format!("seed {seed}: blocks {got:?}, planted {want:?}"))?;
        let mut wp: Vec<f64> = plan.iter().map(|b| b.0).collect();
        let mut gp = kid.probs();
        wp.sort_by(f64::total_cmp);
        gp.sort_by(f64::total_cmp);
        for (a, b) in wp.iter().zip(&gp) {
            ensure((a - b).abs() <= 1e-8, || format!("seed {seed}: weights {gp:?} vs {wp:?}"))?;
        }
        worst_rec = worst_rec.max(kid.reconstruction_error());
        worst_ent = worst_ent
            .max((kid.s_c() - planted.s_c).abs())
            .max((kid.s_q_given_c() - planted.s_q_given_c).abs());
    }
    ensure(worst_rec <= 1e-8, || format!("reconstruction {worst_rec:.2e}"))?;
    ensure(worst_ent <= 1e-8, || format!("entropy error {worst_ent:.2e}"))?;
    Ok(format!("50 states, worst reconstruction {worst_rec:.2e}, worst entropy error {worst_ent:.2e}"))
}

fn ac7() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    for seed in 0..200u64 {
        let mut rng = rng_from_seed(2000 + seed);
        let da = rng.gen_range(2..=3);
        let dr = rng.gen_range(1..=3);
        let db = rng.gen_range(2..=3);
        let dc = rng.gen_range(1..=3);
        let ens = random_ensemble_with(da, dr, rng.gen_range(1..=4), &mut rng).unwrap();
        let n1 = channel(da, db, &mut rng);
        let n2 = channel(db, dc, &mut rng);
        let first = generalized_information(&ens, &n1).unwrap().i_g;
        let both = generalized_information(&ens, &n1.compose(&n2).unwrap()).unwrap().i_g;
        worst = worst.max(both - first);
    }
    ensure(worst <= 1e-9, || format!("violation {worst:.2e}"))?;
    Ok(format!("200 instances, max I_G(N2∘N1) − I_G(N1) = {worst:.2e}"))
}

/// `S(B) − S(BR)` from the explicit output state.
fn coherent_oracle(psi: &PureState, ch: &QuantumChannel) -> f64 {
    let out = ch.apply(&psi.density(), "A").unwrap();
    out.partial_trace(&["A"]).unwrap().entropy() - out.entropy()
}

/// `S(Σ p N(ρ_x)) − Σ p S(N(ρ_x))` from explicit output states.
fn holevo_oracle(ens: &CQEnsemble, ch: &QuantumChannel) -> f64 {
    let space = TensorSpace::single("A", ens.dim_a()).unwrap();
    let mut avg = CMat::zeros(ch.dim_out(), ch.dim_out());
    let mut cond = 0.0;
    for (p, v) in ens.entries() {
        let rho = PureState::new(space.clone(), v.clone()).unwrap().density();
        let out = ch.apply(&rho, "A").unwrap();
        cond += p * out.entropy();
        avg += out.matrix().scale(p);
    }
    linalg::matrix_entropy(&avg) - cond
}

fn ac8() -> Outcome {
    let mut worst: f64 = 0.0;
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(3000 + seed);
        let (da, dr, db) = (rng.gen_range(2..=3), rng.gen_range(1..=3), rng.gen_range(2..=3));
        let ch = channel(da, db, &mut rng);
        let single = random_ensemble_with(da, dr, 1, &mut rng).unwrap();
        let space = TensorSpace::new([("A", da), ("R", dr)]).unwrap();
        let psi = PureState::new(space, single.vectors()[0].clone()).unwrap();
        let g = generalized_information(&single, &ch).unwrap();
        worst = worst.max((g.i_g - coherent_oracle(&psi, &ch)).abs());
    }
    let coherent = worst;
    worst = 0.0;
    for seed in 0..100u64 {
        let mut rng = rng_from_seed(4000 + seed);
        let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let ch = channel(da, db, &mut rng);
        let classical = random_ensemble_with(da, 1, rng.gen_range(1..=5), &mut rng).unwrap();
        let g = generalized_information(&classical, &ch).unwrap();
        worst = worst.max((g.i_g - holevo_oracle(&classical, &ch)).abs());
    }
    ensure(coherent <= 1e-10 && worst <= 1e-10, || format!("coherent {coherent:.2e}, Holevo {worst:.2e}"))?;
    Ok(format!("max deviation: coherent {coherent:.2e}, Holevo {worst:.2e}"))
}

fn cqr(dims: [usize; 3], blocks: &[(f64, DensityMatrix)]) -> ExtendedSource {
    let [nc, dq, dr] = dims;
    let bs = dq * dr;
    let mut m = CMat::zeros(nc * bs, nc * bs);
    for (c, (p, w)) in blocks.iter().enumerate() {
        m.view_mut((c * bs, c * bs), (bs, bs)).copy_from(&w.matrix().scale(*p));
    }
    let space = TensorSpace::new([("C", nc), ("Q", dq), ("R", dr)]).unwrap();
    ExtendedSource::from_cqr(&DensityMatrix::new(space, m).unwrap()).unwrap()
}

fn ac9() -> Outcome {
    let qr = TensorSpace::new([("Q", 2), ("R", 2)]).unwrap();
    let q1 = TensorSpace::new([("Q", 1), ("R", 2)]).unwrap();
    let one = TensorSpace::new([("Q", 1), ("R", 1)]).unwrap();
    let mut rng = rng_from_seed(21);
    let mut srcs = vec![
        extend_source(&kid_of(&sources::classical_bit_pair())).unwrap(),
        extend_source(&kid_of(&sources::bell_pair())).unwrap(),
        cqr([2, 1, 2], &[(0.3, DensityMatrix::diagonal(q1.clone(), &[0.6, 0.4]).unwrap()), (0.7, DensityMatrix::diagonal(q1, &[0.1, 0.9]).unwrap())]),
        cqr([4, 1, 1], &[0.1, 0.2, 0.3, 0.4].map(|p| (p, DensityMatrix::maximally_mixed(one.clone())))),
    ];
    for rank in [1, 2, 4] {
        srcs.push(cqr([1, 2, 2], &[(1.0, random_state_rank_with(&qr, rank, &mut rng))]));
    }
    for rank in [1, 2, 3] {
        let a = random_state_rank_with(&qr, rank, &mut rng);
        let b = random_state_rank_with(&qr, rank, &mut rng);
        srcs.push(cqr([2, 2, 2], &[(0.4, a), (0.6, b)]));
    }
    let grid = [0.0, 0.01, 0.02, 0.05, 0.1];
    let mut worst_anchor: f64 = 0.0;
    let mut worst_feas: f64 = 0.0;
    for (i, src) in srcs.iter().enumerate() {
        let (restarts, max_iters) = if src.dim_c() * src.dim_q() <= 2 { (4, 40) } else { (1, 4) };
        let opts = GadgetOptions {
            optimizer: OptimizerOptions { restarts, max_iters, seed: i as u64, ..Default::default() },
            ..Default::default()
        };
        for g in [Gadget::Y, Gadget::W] {
            let ests = estimate_grid(src, g, &grid, &opts).map_err(|e| e.to_string())?;
            worst_anchor = worst_anchor.max(ests[0].value);
            for w in ests.windows(2) {
                ensure(w[1].value >= w[0].value, || format!("source {i} {g:?}: grid not monotone"))?;
            }
            for e in &ests {
                let (v, f) = evaluate_gadget(src, g, &e.witness).map_err(|e| e.to_string())?;
                ensure((v - e.value).abs() <= 1e-9, || format!("source {i} {g:?}: witness value"))?;
                worst_feas = worst_feas.max((1.0 - e.epsilon) - f);
            }
        }
    }
    ensure(worst_anchor <= 1e-3, || format!("ε = 0 estimate {worst_anchor:.2e}"))?;
    ensure(worst_feas <= 1e-6, || format!("fidelity shortfall {worst_feas:.2e}"))?;
    Ok(format!("10 sources, max ε=0 value {worst_anchor:.2e}, max fidelity shortfall {worst_feas:.2e}"))
}

fn mix(a: &DensityMatrix, b: &DensityMatrix, w: f64) -> DensityMatrix {
    DensityMatrix::new(a.space().clone(), a.matrix().scale(1.0 - w) + b.matrix().scale(w)).unwrap()
}

fn ac10() -> Outcome {
    let mut worst_fvdg = f64::NEG_INFINITY;
    let mut worst_fannes = f64::NEG_INFINITY;
    for seed in 0..1000u64 {
        let mut rng = rng_from_seed(5000 + seed);
        let d = rng.gen_range(2..=4);
        let s = TensorSpace::single("A", d).unwrap();
        let rho = random_state_rank_with(&s, rng.gen_range(1..=d), &mut rng);
        let xi = mix(&rho, &random_state_with(&s, &mut rng), rng.gen::<f64>());
        let f = fidelity(&rho, &xi).unwrap();
        let t = trace_distance(&rho, &xi).unwrap();
        worst_fvdg = worst_fvdg.max((1.0 - f) - t).max(t - (1.0 - f * f).max(0.0).sqrt());
    }
    for seed in 0..1000u64 {
        let mut rng = rng_from_seed(6000 + seed);
        let d = rng.gen_range(2..=5);
        let s = TensorSpace::single("A", d).unwrap();
        let rho = random_state_rank_with(&s, rng.gen_range(1..=d), &mut rng);
        let xi = mix(&rho, &random_state_rank_with(&s, rng.gen_range(1..=d), &mut rng), rng.gen::<f64>());
        let t = trace_distance(&rho, &xi).unwrap();
        let bound = t * (d as f64).log2() + linalg::binary_entropy(t.min(1.0));
        worst_fannes = worst_fannes.max((rho.entropy() - xi.entropy()).abs() - bound);
    }
    ensure(worst_fvdg <= 1e-9 && worst_fannes <= 1e-9, || format!("FvdG {worst_fvdg:.2e}, Fannes {worst_fannes:.2e}"))?;
    Ok(format!("max excess: FvdG {worst_fvdg:.2e}, Fannes-Audenaert {worst_fannes:.2e}"))
}

fn ac11() -> Outcome {
    let mut worst = f64::NEG_INFINITY;
    let mut max_eps: f64 = 0.0;
    for seed in 0..200u64 {
        let mut rng = rng_from_seed(7000 + seed);
        let (da, db) = (rng.gen_range(2..=3), rng.gen_range(2..=3));
        let sa = TensorSpace::single("A", da).unwrap();
        let sab = TensorSpace::new([("A", da), ("B", db)]).unwrap();
        let psi = random_pure_with(&sa, &mut rng).density();
        let beta = random_state_with(&TensorSpace::single("B", db).unwrap(), &mut rng);
        let noise = random_state_with(&sab, &mut rng);
        let eta = 0.05 * rng.gen::<f64>();
        let xi = mix(&psi.tensor(&beta).unwrap(), &noise, eta);
        let eps = 1.0 - fidelity(&xi.partial_trace(&["A"]).unwrap(), &psi).unwrap();
        ensure((-1e-12..=0.05).contains(&eps), || format!("seed {seed}: ε = {eps}"))?;
        max_eps = max_eps.max(eps);
        let product = psi.tensor(&xi.partial_trace(&["B"]).unwrap()).unwrap();
        worst = worst.max((1.0 - 4.0 * eps) - fidelity(&xi, &product).unwrap());
    }
    ensure(worst <= 0.0, || format!("violation {worst:.2e}"))?;
    Ok(format!("200 constructions, ε up to {max_eps:.3}, max (1 − 4ε) − F = {worst:.2e}"))
}

fn ac12() -> Outcome {
    let dists = [vec![0.5, 0.5], vec![0.3, 0.7], vec![0.1, 0.9], vec![0.2, 0.3, 0.5], vec![0.6, 0.4, 0.0]];
    let mut checked = 0;
    for p in &dists {
        let h = linalg::shannon_entropy(p);
        let c: f64 = p.iter().filter(|&&v| v > 0.0).map(|v| v.log2().abs()).sum();
        for n in 1..=12 {
            for delta in [0.02, 0.05, 0.1, 0.2] {
                let spec = TypicalSpec::new(p.clone(), n, delta).map_err(|e| e.to_string())?;
                let count = typical_count(&spec);
                let bound = (n as f64 * (h + c * delta)).exp2();
                ensure(count <= bound, || format!("p = {p:?}, n = {n}, δ = {delta}: {count} > {bound}"))?;
                checked += 1;
            }
        }
    }
    let spec = TypicalSpec::new(vec![0.3, 0.7], 2000, 0.05).unwrap();
    let frac = sample_typical_fraction(&spec, 10_000, &mut rng_from_seed(12));
    ensure(frac >= 0.95, || format!("typical fraction {frac}"))?;
    Ok(format!("{checked} dimension bounds hold; sampled typical fraction {frac:.4}"))
}

fn ac13(c: &Curves) -> Outcome {
    let extra = [
        ("depolarizing(0.1)", QuantumChannel::depolarizing(0.1).unwrap()),
        ("amplitude_damping(0.3)", QuantumChannel::amplitude_damping(0.3).unwrap()),
        ("erasure(0.2)", QuantumChannel::erasure(0.2).unwrap()),
    ];
    let extra_curves: Vec<(&str, TradeoffCurve)> = extra.iter().map(|(n, ch)| (*n, curve(ch))).collect();
    let all = [("identity", &c.identity), ("dephasing(0.1)", &c.dephasing), ("dephasing(0.5)", &c.full)]
        .into_iter()
        .chain(extra_curves.iter().map(|(n, cv)| (*n, cv)));
    let mut worst = f64::NEG_INFINITY;
    let mut count = 0;
    for (name, cv) in all {
        cv.validate().map_err(|e| format!("{name}: {e}"))?;
        for i in 0..=100 {
            let r = cv.c_q * i as f64 / 100.0;
            let chord = if cv.c_q > 0.0 { cv.c_c * (1.0 - r / cv.c_q) } else { cv.c_c };
            worst = worst.max(chord - cv.value_at(r));
        }
        count += 1;
    }
    ensure(worst <= 1e-6, || format!("time-sharing shortfall {worst:.2e}"))?;
    Ok(format!("{count} curves validated, max time-sharing shortfall {worst:.2e}"))
}

fn main() -> ExitCode {
    let start = Instant::now();
    let curves = Curves {
        identity: curve(&QuantumChannel::identity(2).unwrap()),
        dephasing: curve(&QuantumChannel::dephasing(0.1).unwrap()),
        full: curve(&QuantumChannel::dephasing(0.5).unwrap()),
    };
    let checks: Vec<(&str, Box<dyn Fn() -> Outcome + '_>)> = vec![
        ("AC1 identity trade-off curve", Box::new(|| ac1(&curves))),
        ("AC2 dephasing(0.1) endpoints", Box::new(|| ac2(&curves))),
        ("AC3 fully dephasing endpoints", Box::new(|| ac3(&curves))),
        ("AC4 capacity collapse", Box::new(|| ac4(&curves))),
        ("AC5 slope-1 intersection", Box::new(|| ac5(&curves))),
        ("AC6 KI planted structures", Box::new(ac6)),
        ("AC7 I_G data processing", Box::new(ac7)),
        ("AC8 coherent/Holevo reductions", Box::new(ac8)),
        ("AC9 converse gadgets", Box::new(ac9)),
        ("AC10 Fuchs-van de Graaf and Fannes-Audenaert", Box::new(ac10)),
        ("AC11 almost-product states", Box::new(ac11)),
        ("AC12 typicality", Box::new(ac12)),
        ("AC13 curve convexity", Box::new(|| ac13(&curves))),
    ];
    let mut failed = 0;
    for (name, check) in &checks {
        let t = Instant::now();
        match check() {
            Ok(detail) => println!("PASS {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64()),
            Err(detail) => {
                failed += 1;
                println!("FAIL {name}: {detail} [{:.1}s]", t.elapsed().as_secs_f64());
            }
        }
    }
    println!("{} of {} criteria passed in {:.1}s", checks.len() - failed, checks.len(), start.elapsed().as_secs_f64());
    if failed == 0 {
        ExitCode::SUCCESS
    } else {
        ExitCode::FAILURE
    }
}
