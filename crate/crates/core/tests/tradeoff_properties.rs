use qcap_core::channel::QuantumChannel;
use qcap_core::optimize::OptimizerOptions;
use qcap_core::tradeoff::{chebyshev_grid, compute_curve, evaluate_point, CurveOptions, TradeoffCurve};

fn opts(seed: u64) -> CurveOptions {
    CurveOptions {
        optimizer: OptimizerOptions { restarts: 4, max_iters: 150, seed, ..Default::default() },
        warm_start: None,
    }
}

fn builtin() -> Vec<(&'static str, QuantumChannel)> {
    vec![
        ("identity", QuantumChannel::identity(2).unwrap()),
        ("dephasing", QuantumChannel::dephasing(0.1).unwrap()),
        ("depolarizing", QuantumChannel::depolarizing(0.1).unwrap()),
        ("erasure", QuantumChannel::erasure(0.2).unwrap()),
        ("amplitude_damping", QuantumChannel::amplitude_damping(0.3).unwrap()),
    ]
}

fn check_witnesses(curve: &TradeoffCurve, channel: &QuantumChannel) {
    let ch = channel.power(curve.level).unwrap();
    for s in &curve.samples {
        let (q, c) = evaluate_point(&s.ensemble, &ch, curve.level).unwrap();
        assert!((q - s.r_q).abs() <= 1e-9 && (c - s.r_c).abs() <= 1e-9, "sample at t = {}", s.t);
    }
    for p in &curve.points {
        match &p.witness {
            Some(w) => {
                let (q, c) = evaluate_point(w, &ch, curve.level).unwrap();
                if p.synthetic {
                    assert!(q >= p.r_q - 1e-9 && c >= p.r_c - 1e-9);
                } else {
                    assert!((q - p.r_q).abs() <= 1e-9 && (c - p.r_c).abs() <= 1e-9);
                }
            }
            None => assert!(p.synthetic && p.r_q == 0.0 && p.r_c == 0.0),
        }
    }
}

#[test]
fn builtin_curves_respect_bounds() {
    for (name, ch) in builtin() {
        let curve = compute_curve(&ch, 1, &chebyshev_grid(9), &opts(3)).unwrap();
        curve.validate().unwrap();
        check_witnesses(&curve, &ch);
        for p in &curve.points {
            assert!(p.r_c <= curve.c_c - p.r_q + 0.02, "{name}: outer bound at ({}, {})", p.r_q, p.r_c);
        }
        for s in &curve.samples {
            assert!(s.r_c <= curve.c_c - s.r_q + 0.02, "{name}: sample outer bound");
        }
        // Time sharing between the endpoints is always available.
        for i in 0..=50 {
            let r = curve.c_q * i as f64 / 50.0;
            let chord = if curve.c_q > 0.0 { curve.c_c * (1.0 - r / curve.c_q) } else { curve.c_c };
            assert!(curve.value_at(r) >= chord - 1e-6, "{name}: below chord at {r}");
        }
        // A flagged mixture of segment witnesses keeps at least the interpolated classical rate.
        let chl = ch.power(1).unwrap();
        for i in 1..10 {
            let r = curve.c_q * i as f64 / 10.0;
            if let Some((mix, _)) = curve.time_sharing_witness(r) {
                let (_, c) = evaluate_point(&mix, &chl, 1).unwrap();
                assert!(c >= curve.value_at(r) - 1e-6, "{name}: mixture at {r}");
            }
        }
    }
}

#[test]
fn known_endpoints() {
    let id = compute_curve(&QuantumChannel::identity(2).unwrap(), 1, &chebyshev_grid(5), &opts(1)).unwrap();
    assert!((id.c_q - 1.0).abs() < 1e-3 && (id.c_c - 1.0).abs() < 1e-3);
    let full = compute_curve(&QuantumChannel::dephasing(0.5).unwrap(), 1, &chebyshev_grid(5), &opts(1)).unwrap();
    assert!(full.c_q <= 1e-3);
    assert!((full.c_c - 1.0).abs() < 1e-3);
    let h = |p: f64| -p * p.log2() - (1.0 - p) * (1.0 - p).log2();
    let deph = compute_curve(&QuantumChannel::dephasing(0.1).unwrap(), 1, &chebyshev_grid(5), &opts(1)).unwrap();
    assert!((deph.c_q - (1.0 - h(0.1))).abs() < 5e-3);
}

#[test]
fn level_two_dominates_level_one() {
    let ch = QuantumChannel::dephasing(0.1).unwrap();
    let grid = chebyshev_grid(5);
    let one = compute_curve(&ch, 1, &grid, &opts(2)).unwrap();
    let two_opts = CurveOptions {
        optimizer: OptimizerOptions { restarts: 1, max_iters: 10, seed: 2, ..Default::default() },
        warm_start: Some(one.clone()),
    };
    let two = compute_curve(&ch, 2, &grid, &two_opts).unwrap();
    two.validate().unwrap();
    check_witnesses(&two, &ch);
    for i in 0..=20 {
        let r = one.c_q * i as f64 / 20.0;
        assert!(two.value_at(r) >= one.value_at(r) - 2e-2, "level 2 below level 1 at {r}");
    }
}
