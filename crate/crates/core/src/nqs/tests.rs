use super::*;
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::LN_2;

fn net(n: usize, mode: Mode, seed: u64, scale: f64) -> Nqs {
    let arch = Architecture::standard(n).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut net = Nqs::init(arch, mode, &mut rng, scale).unwrap();
    // Give the heads nonzero weights so every path is exercised.
    let layout = net.layout().clone();
    let body = layout.body_len;
    for p in net.params_mut()[body..].iter_mut() {
        *p = rng.gen_range(-scale..=scale);
    }
    net
}

#[test]
fn counts_and_layout() {
    let arch = Architecture::standard(6).unwrap();
    assert_eq!(param_count(&arch, Mode::Both), 858);
    assert_eq!(param_count(&arch, Mode::AmplitudeOnly), 801);
    assert_eq!(param_count(&arch, Mode::PhaseOnly), 849);
    let l = Layout::new(&arch, Mode::Both);
    let first = l.layers[0];
    assert_eq!(first.key - first.query, 64);
    // Attention weights per layer: three projections plus the output map.
    assert_eq!(first.linear - first.query, 256);
    assert_eq!(Layout::new(&arch, Mode::Both), l);
    assert!(Architecture::new(6, 2, 3, 8).is_err());
}

#[test]
fn zero_heads_give_uniform_state() {
    let arch = Architecture::standard(5).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(0);
    for scale in [0.0, 0.3] {
        let net = Nqs::init(arch, Mode::Both, &mut rng, scale).unwrap();
        for s in 0..32 {
            let w = net.forward(s);
            assert!((w.log_sqrt_p + 2.5 * LN_2).abs() < 1e-14);
            assert_eq!(w.phase_raw, 0.0);
        }
    }
}

#[test]
fn init_is_deterministic() {
    let arch = Architecture::standard(4).unwrap();
    let a = Nqs::init(arch, Mode::Both, &mut ChaCha8Rng::seed_from_u64(5), 0.1).unwrap();
    let b = Nqs::init(arch, Mode::Both, &mut ChaCha8Rng::seed_from_u64(5), 0.1).unwrap();
    assert_eq!(a, b);
    assert!(Nqs::init(arch, Mode::Both, &mut ChaCha8Rng::seed_from_u64(5), -1.0).is_err());
}

#[test]
fn normalized_for_random_parameters() {
    for n in 1..=8 {
        for seed in 0..3 {
            let net = net(n, Mode::Both, seed, 0.5);
            let total: f64 = net.probabilities().iter().sum();
            assert!((total - 1.0).abs() < 1e-8, "n={n}: {total}");
        }
    }
}

#[test]
fn conditionals_are_causal() {
    let n = 6;
    let net = net(n, Mode::Both, 3, 0.8);
    for s in 0..64u64 {
        let base = net.conditionals(s);
        for k in 0..n {
            let flipped = net.conditionals(s ^ (1 << (n - 1 - k)));
            for j in 0..n {
                // p(s_{j+1} | s_1..s_j) depends on qubit k only when k < j.
                if j <= k {
                    assert_eq!(base[j], flipped[j], "s={s} k={k} j={j}");
                }
            }
        }
        // The product of conditionals reproduces the forward probability.
        let mut p = 1.0;
        for (j, c) in base.iter().enumerate() {
            p *= if (s >> (n - 1 - j)) & 1 == 1 { *c } else { 1.0 - c };
        }
        assert!((p.sqrt().ln() - net.forward(s).log_sqrt_p).abs() < 1e-12);
    }
}

#[test]
fn sampling_matches_distribution() {
    let n = 4;
    let net = net(n, Mode::Both, 8, 0.8);
    let probs = net.probabilities();
    let count = 100_000;
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let counts = net.sample_counts(count, &mut rng).unwrap();
    let chi2: f64 = (0..16u64)
        .map(|s| {
            let e = probs[s as usize] * count as f64;
            let o = *counts.get(&s).unwrap_or(&0) as f64;
            (o - e).powi(2) / e
        })
        .sum();
    // 15 degrees of freedom, 1% tail at 30.6.
    assert!(chi2 < 30.6, "chi2 = {chi2}");
    let again = net.sample_counts(count, &mut ChaCha8Rng::seed_from_u64(1)).unwrap();
    assert_eq!(counts, again);
    assert_eq!(net.sample(10, &mut rng).unwrap().len(), 10);
    assert!(net.sample_counts(0, &mut rng).is_err());
}

#[test]
fn single_qubit_bias() {
    let arch = Architecture::new(1, 1, 1, 2).unwrap();
    let mut net = Nqs::init(arch, Mode::AmplitudeOnly, &mut ChaCha8Rng::seed_from_u64(0), 0.0).unwrap();
    let at = net.layout().logit.unwrap();
    let bias = 1.3;
    net.params_mut()[at + 2] = bias;
    let p1 = 1.0 / (1.0 + (-bias).exp());
    let count = 50_000;
    let counts = net.sample_counts(count, &mut ChaCha8Rng::seed_from_u64(2)).unwrap();
    let freq = *counts.get(&1).unwrap() as f64 / count as f64;
    let se = (p1 * (1.0 - p1) / count as f64).sqrt();
    assert!((freq - p1).abs() < 5.0 * se);
}

fn finite_difference(net: &Nqs, s: u64, i: usize, h: f64) -> (f64, f64) {
    let mut plus = net.clone();
    plus.params_mut()[i] += h;
    let mut minus = net.clone();
    minus.params_mut()[i] -= h;
    let (a, b) = (plus.forward(s), minus.forward(s));
    (
        (a.log_sqrt_p - b.log_sqrt_p) / (2.0 * h),
        (a.phase_raw - b.phase_raw) / (2.0 * h),
    )
}

#[test]
fn gradient_matches_finite_differences() {
    let mut rng = ChaCha8Rng::seed_from_u64(77);
    for trial in 0..20 {
        let n = 4;
        let net = net(n, Mode::Both, 100 + trial, 0.6);
        let s = rng.gen_range(0..16u64);
        let g = net.grad_log_psi(s);
        for i in 0..net.params().len() {
            let (re, im) = finite_difference(&net, s, i, 1e-5);
            for (analytic, numeric) in [(g[i].re, re), (g[i].im, im)] {
                let err = (analytic - numeric).abs();
                assert!(
                    err < 1e-7 || err < 1e-5 * numeric.abs().max(analytic.abs()),
                    "trial {trial} param {i}: {analytic} vs {numeric}"
                );
            }
        }
    }
}

#[test]
fn phase_bias_gradient_is_i() {
    let arch = Architecture::standard(3).unwrap();
    let net = Nqs::init(arch, Mode::Both, &mut ChaCha8Rng::seed_from_u64(1), 0.2).unwrap();
    let g = net.grad_log_psi(5);
    let last = g.len() - 1;
    assert_eq!(g[last], Complex64::new(0.0, 1.0));
}

#[test]
fn expected_score_vanishes() {
    let n = 4;
    let net = net(n, Mode::Both, 4, 0.7);
    let probs = net.probabilities();
    let mut total = vec![0.0; net.params().len()];
    for s in 0..16u64 {
        let g = net.grad_log_psi(s);
        for (t, v) in total.iter_mut().zip(g) {
            *t += probs[s as usize] * v.re;
        }
    }
    assert!(total.iter().all(|v| v.abs() < 1e-8));
}

#[test]
fn split_modes() {
    let amp = net(4, Mode::AmplitudeOnly, 1, 0.5);
    let ph = net(4, Mode::PhaseOnly, 2, 0.5);
    for s in 0..16 {
        assert_eq!(amp.forward(s).phase_raw, 0.0);
        assert_eq!(ph.forward(s).log_sqrt_p, 0.0);
        assert!(amp.grad_log_psi(s).iter().all(|g| g.im == 0.0));
        assert!(ph.grad_log_psi(s).iter().all(|g| g.re == 0.0));
    }
    assert_eq!(ph.conditionals(3), vec![0.5; 4]);
}

#[test]
fn weighted_gradient_sums_backward_passes() {
    let net = net(3, Mode::Both, 6, 0.5);
    let seeds: BTreeMap<u64, (f64, f64)> = [(1, (0.5, -1.0)), (6, (2.0, 0.25)), (7, (0.0, 1.0))].into();
    let combined = net.weighted_gradient(&seeds);
    let mut manual = vec![0.0; net.params().len()];
    for (&s, &(a, b)) in &seeds {
        net.backward(s, a, b, &mut manual);
    }
    for (x, y) in combined.iter().zip(&manual) {
        assert!((x - y).abs() < 1e-12);
    }
}

#[test]
fn checkpoint_round_trip() {
    let a = net(5, Mode::AmplitudeOnly, 1, 0.5);
    let b = net(5, Mode::PhaseOnly, 2, 0.5);
    let mut buf = Vec::new();
    write_checkpoint(&[&a, &b], &mut buf).unwrap();
    let back = read_checkpoint(buf.as_slice()).unwrap();
    assert_eq!(back, vec![a, b]);
    let mut bad = buf.clone();
    bad[4] = 2;
    assert!(read_checkpoint(bad.as_slice()).is_err());
    assert!(read_checkpoint(&buf[..buf.len() - 3]).is_err());
}

#[test]
fn wrapped_phase() {
    let w = WaveAmplitude {
        log_sqrt_p: 0.0,
        phase_raw: -0.5,
    };
    assert!((w.phase() - (TAU - 0.5)).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn normalization_holds_for_any_seed(seed in any::<u64>(), n in 1usize..7, scale in 0.0f64..1.5) {
        let net = net(n, Mode::Both, seed, scale);
        let total: f64 = net.probabilities().iter().sum();
        prop_assert!((total - 1.0).abs() < 1e-8);
    }
}
