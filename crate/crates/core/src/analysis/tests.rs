use super::*;
use crate::numeric::quad::integrate;
use crate::Duplex;
use approx::assert_relative_eq;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn defaults() -> SystemParams {
    SystemParams::defaults()
}

#[test]
fn threshold_quantization_multiplier() {
    let a = Analyzer::new(&defaults()).unwrap();
    let g = a.threshold_factor(Link::IabLosAccess, 1.0).unwrap();
    assert_relative_eq!(g.multiplier, 1.000_020_3, epsilon = 1e-7);
    assert_relative_eq!(g.factor, g.base * g.multiplier);
    assert_eq!(g.per_node.len(), 5);

    let p = defaults().with(|r| r.q_adc = f64::INFINITY).unwrap();
    let g = Analyzer::new(&p).unwrap().threshold_factor(Link::Backhaul, 3.0).unwrap();
    assert_eq!(g.multiplier, 1.0);

    let p = defaults().with(|r| r.q_adc = 1.0).unwrap();
    let err = Analyzer::new(&p).unwrap().threshold_factor(Link::GnbAccess, 6.0).unwrap_err();
    assert!(matches!(err, EvalError::ThresholdUnreachable { .. }));
}

#[test]
fn trivial_laplace_values() {
    let p = defaults();
    assert_eq!(laplace_iab_interference(0.0, 10.0, true, RxRole::Ue, &p).unwrap(), 1.0);
    assert_eq!(laplace_iab_interference(1e9, p.radius, false, RxRole::Ue, &p).unwrap(), 1.0);
    assert_eq!(laplace_gnb_interference_access(0.0, 0.0, RxRole::Iab, &p).unwrap(), 1.0);
    assert_eq!(laplace_gnb_interference_backhaul(0.0, 80.0, &p).unwrap(), 1.0);
    let v = laplace_iab_interference(1e9, 20.0, true, RxRole::Ue, &p).unwrap();
    assert!(v > 0.0 && v < 1.0);
}

#[test]
fn palm_form_without_hard_core_is_poisson_around_receiver() {
    // serving gNB at the receiver: both forms integrate the same disk
    let p = defaults().with(|r| r.hard_core = 0.0).unwrap();
    for s in [1e8, 1e10, 1e12] {
        let palm = laplace_gnb_interference_backhaul(s, 0.0, &p).unwrap();
        let ppp = laplace_gnb_interference_access(s, 0.0, RxRole::Iab, &p).unwrap();
        assert_relative_eq!(palm, ppp, max_relative = 1e-8);
    }
}

#[test]
fn half_duplex_drops_cross_tier_and_self_interference() {
    let a = Analyzer::new(&defaults().with_duplex(Duplex::Hd)).unwrap();
    for link in Link::ALL {
        let m = a.link(link);
        assert_eq!(m.rsi, 0.0);
        let names: Vec<&str> = m.sources.iter().map(|s| s.name).collect();
        match link {
            Link::GnbAccess | Link::Backhaul => assert_eq!(names, ["gnb"]),
            _ => assert!(names.iter().all(|n| *n != "gnb")),
        }
    }
    let f = Analyzer::new(&defaults()).unwrap();
    assert!(f.link(Link::Backhaul).rsi > 0.0);
    assert_eq!(f.link(Link::Backhaul).sources.len(), 3);
}

#[test]
fn vanishing_threshold_leaves_zero_forcing_cap() {
    let a = Analyzer::new(&defaults()).unwrap();
    for link in [Link::IabLosAccess, Link::IabNlosAccess] {
        let m = a.link(link);
        let c = a.link_coverage(link, 1e-12).unwrap();
        assert!((c - m.zf_prob).abs() < 1e-4, "{link}: {c} vs {}", m.zf_prob);
    }
}

#[test]
fn coverage_nonincreasing_in_threshold() {
    let a = Analyzer::new(&defaults()).unwrap();
    let mut prev = 1.0;
    for k in 0..20 {
        let tau = 10f64.powf((-10.0 + 2.0 * k as f64) / 10.0);
        let c = a.link_coverage(Link::IabLosAccess, tau).unwrap();
        assert!(c <= prev + 1e-9, "tau {tau}: {c} > {prev}");
        prev = c;
    }
}

fn noiseless_interference_options() -> AnalysisOptions {
    AnalysisOptions { interference_gain_scale: 0.0, outer: QuadOptions::new(1e-13, 1e-12), ..AnalysisOptions::default() }
}

#[test]
fn zero_gains_reduce_to_noise_only_coverage() {
    let p = defaults();
    let a = Analyzer::with_options(&p, noiseless_interference_options()).unwrap();
    let tau = 10f64.powf(0.5);
    for link in Link::ALL {
        let m = a.link(link);
        let g = a.threshold_factor(link, tau).unwrap().factor;
        let nc = a.additive_constant(link);
        let oracle = integrate_pieces(
            |r| a.serving_pdf(m, r) * (1.0 - m.desired.cdf(g * r.powf(m.alpha) * nc)),
            &a.serving_points(m),
            QuadOptions::new(1e-14, 1e-13),
        );
        let c = a.link_coverage(link, tau).unwrap();
        assert!((c - m.zf_prob * oracle.values[0]).abs() < 1e-9, "{link}: {c} vs {}", m.zf_prob * oracle.values[0]);
    }
}

#[test]
fn zero_gains_reduce_to_noise_only_ergodic_rate() {
    let p = defaults();
    let a = Analyzer::with_options(&p, noiseless_interference_options()).unwrap();
    let q_inv = 1.0 / p.quantization_factor();
    let link = Link::IabLosAccess;
    let m = a.link(link);
    let mm = m.desired.shape as i32;
    let fact: f64 = (1..mm).map(|k| k as f64).product();
    // E ln(1 + SINR) at distance r, averaging the Gamma mixture over ln h directly
    let conditional = |r: f64| {
        let g0 = m.desired_coupling / r.powf(m.alpha);
        let mut total = 0.0;
        for (rate, w) in m.desired.rates.iter().zip(&m.desired.weights) {
            let res = integrate(
                |v| {
                    let h = v.exp();
                    let x = rate * h;
                    let pdf_ln = x.powi(mm) * (-x).exp() / fact;
                    let sig = g0 * h;
                    let sinr = sig / (m.noise + (sig + m.noise) * q_inv);
                    pdf_ln * sinr.ln_1p()
                },
                (1e-12 / rate).ln(),
                (60.0 / rate).ln(),
                QuadOptions::new(1e-13, 1e-12),
            );
            total += w * res.values[0];
        }
        total
    };
    let oracle = integrate_pieces(|r| a.serving_pdf(m, r) * conditional(r), &a.serving_points(m), QuadOptions::new(1e-9, 1e-9));
    let expect = m.zf_prob * p.effective_bandwidth() / LN_2 * oracle.values[0];
    let got = a.link_ergodic_rate(link).unwrap();
    assert_relative_eq!(got, expect, max_relative = 2e-5);
}

#[test]
fn tables_agree_with_exact_kernels() {
    let p = defaults();
    let t = Analyzer::new(&p).unwrap();
    let e = Analyzer::with_options(&p, AnalysisOptions { kernel: KernelMode::Exact, ..AnalysisOptions::default() }).unwrap();
    for link in [Link::IabLosAccess, Link::IabNlosAccess] {
        let a = t.link_coverage(link, 2.0).unwrap();
        let b = e.link_coverage(link, 2.0).unwrap();
        assert!((a - b).abs() < 1e-6, "{link}: {a} vs {b}");
    }
}

/// Laplace transform of interference plus the additive constant at serving distance `r`,
/// as a truncated series in the relative increment of `s`.
fn laplace_series(m: &LinkModel, nc: f64, r: f64, s: f64, order: usize, radius: f64, opts: QuadOptions) -> Jet {
    let mut e = vec![0.0; order + 1];
    for src in &m.sources {
        src.accumulate(r, &[s], order + 1, radius, opts, &mut e).unwrap();
    }
    e[0] -= s * nc;
    if order >= 1 {
        e[1] -= s * nc;
    }
    Jet::from_coeffs(e).exp()
}

#[test]
fn jets_match_richardson_differences() {
    // tolerances so loose the initial panels are accepted: the rule is fixed and smooth in s
    let fixed = QuadOptions { abs_tol: 1e300, rel_tol: 1.0, max_intervals: 10_000 };
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10 {
        let bias: f64 = rng.random_range(-10.0..20.0);
        let xi: f64 = rng.random_range(0.0..150.0);
        let p = defaults()
            .with(|raw| {
                raw.bias_ratio_db = bias;
                raw.hard_core = xi;
            })
            .unwrap();
        let opts = AnalysisOptions { kernel: KernelMode::Exact, ..AnalysisOptions::default() };
        let a = Analyzer::with_options(&p, opts).unwrap();
        let link = Link::ALL[trial % 4];
        let m = a.link(link);
        let nc = a.additive_constant(link);
        let r: f64 = rng.random_range(20.0..300.0);
        let g = a.threshold_factor(link, 10f64.powf(rng.random_range(-0.5..1.5))).unwrap();
        let s0 = g.per_node[rng.random_range(0..g.per_node.len())] * r.powf(m.alpha);
        let jet = laplace_series(m, nc, r, s0, 3, p.radius, fixed);
        let f = |u: f64| laplace_series(m, nc, r, s0 * (1.0 + u), 0, p.radius, fixed).value();
        let d1 = |h: f64| (f(h) - f(-h)) / (2.0 * h);
        let d2 = |h: f64| (f(h) - 2.0 * f(0.0) + f(-h)) / (h * h) / 2.0;
        let d3 = |h: f64| (f(2.0 * h) - 2.0 * f(h) + 2.0 * f(-h) - f(-2.0 * h)) / (2.0 * h * h * h) / 6.0;
        // step on the scale over which ln L changes by O(1)
        let h = 0.02 / (jet.coeffs()[1] / jet.value()).abs().max(1.0);
        let rich = |d: &dyn Fn(f64) -> f64| (4.0 * d(h / 2.0) - d(h)) / 3.0;
        let fd = [rich(&d1), rich(&d2), rich(&d3)];
        for n in 1..=3 {
            let c = jet.coeffs()[n];
            let scale = c.abs().max(1e-6 * jet.value());
            assert!((c - fd[n - 1]).abs() <= 1e-6 * scale, "trial {trial} {link} n={n}: jet {c:e} fd {:e}", fd[n - 1]);
        }
    }
}

#[test]
fn ergodic_min_rule_uses_backhaul_mean() {
    let a = Analyzer::new(&defaults().with(|r| r.eta_db = Some(-30.0)).unwrap()).unwrap();
    let e = a.ergodic_capacity().unwrap();
    let w = e.association;
    let expect = w.gnb * e.links.gnb_access
        + w.iab_los * e.links.iab_los_access.min(e.links.backhaul)
        + w.iab_nlos * e.links.iab_nlos_access.min(e.links.backhaul);
    assert_relative_eq!(e.value, expect);
    assert!(e.links.backhaul < e.links.iab_los_access);
}
