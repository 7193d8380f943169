use dsvnlms::filters::{self, FilterState};
use dsvnlms::robustness::{self, IterationRecord, Ledger};
use dsvnlms::special;
use dsvnlms::volterra::{KernelVector, VolterraConfig};
use proptest::prelude::*;
use statrs::function::erf as statrs_erf;

fn rel_eq(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-12 * a.abs().max(b.abs()).max(1e-300)
}

/// Runs DS-VNLMS over `(x, d, n)` from zero weights, recording each step.
fn trace(cfg: VolterraConfig, w_star: &[f64], steps: &[(f64, f64, f64)], gamma: f64) -> Ledger {
    let w_star = KernelVector::from_vec(&cfg, w_star.to_vec()).unwrap();
    let mut s = FilterState::new(cfg);
    let mut ledger = Ledger::new(w_star, s.weights()).unwrap();
    for &(x, d, n) in steps {
        filters::push_sample(&mut s, x).unwrap();
        let before = s.weights().clone();
        let out = filters::ds_vnlms_step(&mut s, d, gamma).unwrap();
        ledger
            .observe(&before, s.weights(), &s.regressor(), &out, n, false)
            .unwrap();
    }
    ledger
}

#[test]
fn one_step_hand_trace() {
    let cfg = VolterraConfig::unregularized(1, 2).unwrap();
    let ledger = trace(cfg, &[1.0, 0.0, 0.0], &[(1.0, 1.0, 0.0)], 0.5);
    let r = ledger.records()[0];
    assert!(r.updated);
    assert_eq!((r.e, r.e_tilde, r.mu_bar, r.alpha), (1.0, 1.0, 0.5, 1.0));
    assert_eq!((r.wtilde_sq_before, r.wtilde_sq_after), (1.0, 0.25));
    assert!(rel_eq(r.lhs, 0.75) && rel_eq(r.rhs, 1.0));
    assert!(robustness::check_local(&r));
    assert!(rel_eq(
        robustness::global_ratio(ledger.records(), 1.0).unwrap(),
        0.75
    ));
}

// w* = [1, 0.5] on taps x(k), x(k−1); inputs 1, 1, 0; noise 0, 0, 0.25;
// γ̄ = 0.5, δ = 0.
//
// k  e    ẽ    μ̄    α  w(k+1)       ‖w̃‖² before/after  lhs    rhs
// 0  1    1    0.5  1  [0.5, 0]     1.25 / 0.5          1.0    1.25
// 1  1    1    0.5  2  [0.75, 0.25] 0.5 / 0.125         0.375  0.5
// 2  0.5  0.25 -    1  unchanged    0.125 / 0.125       0.125  0.125
#[test]
fn three_step_hand_trace() {
    let cfg = VolterraConfig::unregularized(1, 1).unwrap();
    let ledger = trace(
        cfg,
        &[1.0, 0.5],
        &[(1.0, 1.0, 0.0), (1.0, 1.5, 0.0), (0.0, 0.75, 0.25)],
        0.5,
    );
    // (updated, e, ẽ, μ̄, α, ‖w̃‖² before, after, lhs)
    type Row = (bool, f64, f64, f64, f64, f64, f64, f64);
    let want: [Row; 3] = [
        (true, 1.0, 1.0, 0.5, 1.0, 1.25, 0.5, 1.0),
        (true, 1.0, 1.0, 0.5, 2.0, 0.5, 0.125, 0.375),
        (false, 0.5, 0.25, 0.0, 1.0, 0.125, 0.125, 0.125),
    ];
    let rhs = [1.25, 0.5, 0.125];
    for (i, (r, w)) in ledger.records().iter().zip(want).enumerate() {
        assert_eq!(r.k, i as u64);
        assert_eq!(r.updated, w.0, "k={i}");
        for (got, exp) in [
            (r.e, w.1),
            (r.e_tilde, w.2),
            (r.mu_bar, w.3),
            (r.alpha, w.4),
            (r.wtilde_sq_before, w.5),
            (r.wtilde_sq_after, w.6),
            (r.lhs, w.7),
            (r.rhs, rhs[i]),
        ] {
            assert!(rel_eq(got, exp), "k={i}: {got} vs {exp}");
        }
        assert!(robustness::check_local(r));
        assert!(robustness::check_consistency(r));
    }
    let ratio = robustness::global_ratio(ledger.records(), 1.25).unwrap();
    assert!(rel_eq(ratio, 0.7), "{ratio}");
    assert!(robustness::global_prefix_violations(ledger.records(), 1.25).is_empty());
    let v = ledger.verdict(None);
    assert_eq!((v.update_count, v.increase_count), (2, 0));
}

#[test]
fn corrupted_record_is_caught() {
    let cfg = VolterraConfig::unregularized(1, 2).unwrap();
    let ledger = trace(cfg, &[1.0, 0.0, 0.0], &[(1.0, 1.0, 0.0)], 0.5);
    let mut r: IterationRecord = ledger.records()[0];
    r.lhs = 1.5;
    assert!(!robustness::check_local(&r));
    let check = robustness::check_trace(&[r]);
    assert!(!check.passed());
}

fn sequence() -> impl Strategy<Value = Vec<(f64, f64)>> {
    prop::collection::vec((-2.0f64..2.0, -0.3f64..0.3), 3..40)
}

proptest! {
    #[test]
    fn local_inequality_holds_on_random_runs(
        w_star in prop::collection::vec(-1.0f64..1.0, 9),
        seq in sequence(),
        gamma in 0.0f64..0.5,
    ) {
        let cfg = VolterraConfig::new(2, 2, 1e-9).unwrap();
        let steps: Vec<(f64, f64, f64)> = {
            let w = KernelVector::from_vec(&cfg, w_star.clone()).unwrap();
            let mut line = FilterState::with_weights(cfg, w).unwrap();
            seq.iter()
                .map(|&(x, n)| {
                    filters::push_sample(&mut line, x).unwrap();
                    let y = dsvnlms::volterra::predict(line.weights(), &line.regressor()).unwrap();
                    (x, y + n, n)
                })
                .collect()
        };
        let ledger = trace(cfg, &w_star, &steps, gamma);
        let check = robustness::check_trace(ledger.records());
        prop_assert!(check.passed(), "{:?}", check);
    }

    #[test]
    fn zero_noise_updates_strictly_shrink(
        w_star in prop::collection::vec(-1.0f64..1.0, 3),
        xs in prop::collection::vec(-2.0f64..2.0, 3),
        gamma in 0.01f64..0.5,
    ) {
        let cfg = VolterraConfig::unregularized(1, 2).unwrap();
        let w = KernelVector::from_vec(&cfg, w_star.clone()).unwrap();
        let mut line = FilterState::with_weights(cfg, w).unwrap();
        let steps: Vec<(f64, f64, f64)> = xs
            .iter()
            .map(|&x| {
                filters::push_sample(&mut line, x).unwrap();
                (x, dsvnlms::volterra::predict(line.weights(), &line.regressor()).unwrap(), 0.0)
            })
            .collect();
        let ledger = trace(cfg, &w_star, &steps, gamma);
        for r in ledger.records() {
            if r.updated {
                let gap = r.rhs - r.lhs;
                let direct = r.wtilde_sq_before - r.wtilde_sq_after - r.gain() * r.e_tilde * r.e_tilde;
                prop_assert!(gap > 0.0);
                prop_assert!((gap - direct).abs() <= 1e-12 * r.rhs.max(1.0));
                prop_assert!(r.wtilde_sq_after < r.wtilde_sq_before);
            }
        }
    }

    #[test]
    fn trace_csv_round_trips(seq in sequence(), gamma in 0.0f64..0.5) {
        let cfg = VolterraConfig::new(1, 1, 1e-9).unwrap();
        let steps: Vec<(f64, f64, f64)> = seq.iter().map(|&(x, n)| (x, 0.3 * x + n, n)).collect();
        let ledger = trace(cfg, &[0.3, 0.0], &steps, gamma);
        let mut buf = Vec::new();
        robustness::write_trace(ledger.records(), &mut buf).unwrap();
        let back = robustness::read_trace(buf.as_slice()).unwrap();
        prop_assert_eq!(back.as_slice(), ledger.records());
    }

    // statrs drifts to a few 1e-11 relative between 2 and 3, so this is a
    // coarse cross-check; the quadrature test below is the tight one.
    #[test]
    fn erfc_matches_statrs(x in -6.0f64..25.0) {
        let want = statrs_erf::erfc(x);
        let got = special::erfc(x);
        prop_assert!((got - want).abs() <= 1e-9 * want, "{} vs {}", got, want);
    }
}

/// Composite Simpson on `2/√π ∫ₓ^{x+12} e^{−t²} dt`.
fn erfc_quadrature(x: f64) -> f64 {
    let (a, b, n) = (x, x + 12.0, 20_000);
    let h = (b - a) / n as f64;
    let f = |t: f64| (-t * t).exp();
    let mut s = f(a) + f(b);
    for i in 1..n {
        s += f(a + i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0 * 2.0 / std::f64::consts::PI.sqrt()
}

#[test]
fn erfc_matches_quadrature() {
    for tau in [1.0, 2.0, 3.0, 4.0, 5.0, 9.0] {
        let x = (tau / 2.0f64).sqrt();
        let q = erfc_quadrature(x);
        assert!((special::erfc(x) - q).abs() <= 1e-12 * q, "tau={tau}");
        assert!(rel_eq(
            robustness::erfc_bound(tau).unwrap(),
            special::erfc(x)
        ));
    }
    assert!(robustness::erfc_bound(0.0).is_err());
}
