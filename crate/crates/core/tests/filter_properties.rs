use dsvnlms::filters::{self, AdaptiveFilter, DsVnlms, FilterState, ThresholdPolicy, Vnlms};
use dsvnlms::signals::{self, NoiseSpec, SignalSpec};
use dsvnlms::volterra::{self, KernelVector, VolterraConfig};
use proptest::prelude::*;

fn config() -> VolterraConfig {
    VolterraConfig::new(2, 2, 1e-9).unwrap()
}

fn state(w: Vec<f64>, line: &[f64]) -> FilterState {
    let c = config();
    let mut s = FilterState::with_weights(c, KernelVector::from_vec(&c, w).unwrap()).unwrap();
    for &x in line.iter().rev() {
        filters::push_sample(&mut s, x).unwrap();
    }
    s
}

fn weights() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-1.0f64..1.0, 9)
}

fn line() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-2.0f64..2.0, 3)
        .prop_filter("nonzero regressor", |l| l.iter().any(|v| v.abs() > 0.1))
}

proptest! {
    #[test]
    fn gating_and_step_factor(w in weights(), l in line(), d in -5.0f64..5.0, gamma in 0.0f64..2.0) {
        let mut s = state(w, &l);
        let before = s.weights().clone();
        let out = filters::ds_vnlms_step(&mut s, d, gamma).unwrap();
        prop_assert_eq!(out.updated, out.e.abs() > gamma);
        if out.updated {
            prop_assert!(out.mu_bar > 0.0 && out.mu_bar <= 1.0);
            if gamma > 0.0 {
                prop_assert!(out.mu_bar < 1.0);
            }
        } else {
            prop_assert_eq!(&before, s.weights());
            prop_assert_eq!(out.mu_bar, 0.0);
        }
    }

    #[test]
    fn a_posteriori_error_lands_on_threshold(w in weights(), l in line(), d in -5.0f64..5.0, gamma in 0.0f64..2.0) {
        let mut s = state(w, &l);
        let out = filters::ds_vnlms_step(&mut s, d, gamma).unwrap();
        let post = d - volterra::predict(s.weights(), &s.regressor()).unwrap();
        if out.updated {
            prop_assert!(post.abs() <= gamma + 1e-6, "post {} gamma {}", post, gamma);
            prop_assert!((post.abs() - gamma).abs() <= 1e-6);
        }
    }

    #[test]
    fn repeating_a_step_is_nearly_idempotent(w in weights(), l in line(), d in -5.0f64..5.0, gamma in 0.01f64..2.0) {
        let mut s = state(w, &l);
        filters::ds_vnlms_step(&mut s, d, gamma).unwrap();
        let once = s.weights().clone();
        filters::ds_vnlms_step(&mut s, d, gamma).unwrap();
        prop_assert!(once.distance_sq(s.weights()).unwrap() <= 1e-12 * (1.0 + once.norm_sq()));
    }

    #[test]
    fn zero_threshold_is_unit_step_nlms(w in weights(), l in line(), d in -5.0f64..5.0) {
        let mut a = state(w.clone(), &l);
        let mut b = state(w, &l);
        let oa = filters::ds_vnlms_step(&mut a, d, 0.0).unwrap();
        let ob = filters::vnlms_step(&mut b, d, 1.0).unwrap();
        prop_assert_eq!(oa.e, ob.e);
        for (x, y) in a.weights().as_slice().iter().zip(b.weights().as_slice()) {
            prop_assert!((x - y).abs() <= 1e-12 * (1.0 + x.abs()));
        }
    }
}

fn misadjustment(mu: f64) -> f64 {
    let cfg = VolterraConfig::new(3, 3, 1e-9).unwrap();
    let channel = signals::reference_channel();
    let w_star = channel.embed(&cfg).unwrap();
    let mut total = 0.0;
    for seed in 1..=4 {
        let x = signals::generate_input(&SignalSpec::white_gaussian(1.0, seed), 6000).unwrap();
        let n = signals::generate_noise(&NoiseSpec::gaussian(0.01, seed ^ 0xABCD), 6000).unwrap();
        let d = signals::desired_signal(&channel, &x, &n).unwrap();
        let mut f = Vnlms::new(cfg, mu).unwrap();
        let mut tail = 0.0;
        for k in 0..x.len() {
            f.process(x[k], d[k]).unwrap();
            if k >= 4000 {
                tail += w_star.distance_sq(f.state().weights()).unwrap();
            }
        }
        total += tail / 2000.0;
    }
    total / 4.0
}

#[test]
fn smaller_step_size_lowers_misadjustment() {
    let fast = misadjustment(0.8);
    let slow = misadjustment(0.3);
    assert!(slow < fast, "mu=0.3 gives {slow}, mu=0.8 gives {fast}");
}

#[test]
fn time_varying_threshold_uses_both_levels() {
    let cfg = VolterraConfig::new(3, 3, 1e-9).unwrap();
    let channel = signals::reference_channel();
    let x = signals::generate_input(&SignalSpec::white_gaussian(1.0, 3), 2500).unwrap();
    let n = signals::generate_noise(&NoiseSpec::gaussian(0.01, 4), 2500).unwrap();
    let d = signals::desired_signal(&channel, &x, &n).unwrap();
    let mut f = DsVnlms::new(cfg, ThresholdPolicy::time_varying(5.0, 9.0, 0.01)).unwrap();
    let mut seen = std::collections::BTreeSet::new();
    for k in 0..x.len() {
        let out = f.process(x[k], d[k]).unwrap();
        seen.insert((out.gamma_used * 1e6).round() as i64);
    }
    assert_eq!(
        seen.into_iter().collect::<Vec<_>>(),
        vec![
            (0.05f64.sqrt() * 1e6).round() as i64,
            (0.09f64.sqrt() * 1e6).round() as i64
        ]
    );
}
