//! Simulator self-consistency and agreement with the closed-form association law.

use fdiab::analysis::Analyzer;
use fdiab::montecarlo::{realize, sampling_radius, simulate, Fidelity, McConfig};
use fdiab::SystemParams;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

#[test]
fn realized_gnb_density_matches_target() {
    let p = SystemParams::defaults();
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let n = 4000;
    let mut count = 0usize;
    for _ in 0..n {
        let real = realize(&p, &mut rng);
        count += real.gnbs.points.iter().filter(|q| q[0].hypot(q[1]) <= p.radius).count();
    }
    let mean = count as f64 / n as f64;
    let expected = p.lambda_m * std::f64::consts::PI * p.radius * p.radius;
    assert!((mean / expected - 1.0).abs() < 0.03, "mean {mean} expected {expected}");
    assert!(sampling_radius(&p) >= p.radius);
}

#[test]
fn association_agrees_with_closed_form() {
    for bias in [-10.0, 0.0, 10.0] {
        let p = SystemParams::defaults().with(|r| r.bias_ratio_db = bias).unwrap();
        let analytic = Analyzer::new(&p).unwrap().association();
        let rep = simulate(&p, &McConfig::new(20_000, 11, vec![])).unwrap();
        let got = [rep.association[0].mean, rep.association[1].mean, rep.association[2].mean];
        let want = [analytic.gnb, analytic.iab_los, analytic.iab_nlos];
        for (g, w) in got.iter().zip(want) {
            assert!((g - w).abs() < 0.02, "bias {bias}: mc {got:?} analytic {want:?}");
        }
    }
}

#[test]
fn angle_and_atom_gains_give_same_coverage() {
    let p = SystemParams::defaults();
    let mut cfg = McConfig::new(30_000, 5, vec![1.0]);
    let atom = simulate(&p, &cfg).unwrap().coverage[0];
    cfg.fidelity = Fidelity::Angle;
    let angle = simulate(&p, &cfg).unwrap().coverage[0];
    assert!((atom.mean - angle.mean).abs() < 0.01, "atom {atom:?} angle {angle:?}");
}

#[test]
fn confidence_interval_shrinks_as_root_n() {
    let p = SystemParams::defaults();
    let hw = |n| simulate(&p, &McConfig::new(n, 9, vec![1.0])).unwrap().coverage[0].half_width_95;
    let (a, b, c) = (hw(1000), hw(4000), hw(16_000));
    for ratio in [a / b, b / c] {
        assert!((ratio - 2.0).abs() < 0.3, "half widths {a} {b} {c}");
    }
}

#[test]
fn joint_coverage_close_to_factorized() {
    let p = SystemParams::defaults();
    let rep = simulate(&p, &McConfig::new(20_000, 13, vec![1.0, 10.0])).unwrap();
    for i in 0..2 {
        let joint = rep.coverage[i].mean;
        let fact = rep.factorized_coverage(i);
        assert!((joint - fact).abs() < 0.02, "joint {joint} factorized {fact}");
    }
}

#[test]
fn same_seed_same_report() {
    let p = SystemParams::defaults();
    let mut cfg = McConfig::new(3000, 42, vec![1.0]);
    let a = simulate(&p, &cfg).unwrap();
    cfg.workers = 3;
    let b = simulate(&p, &cfg).unwrap();
    assert_eq!(a.coverage, b.coverage);
    assert_eq!(a.ergodic, b.ergodic);
    cfg.seed = 43;
    let c = simulate(&p, &cfg).unwrap();
    assert_ne!(a.coverage, c.coverage);
}
