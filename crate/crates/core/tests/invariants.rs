//! Property checks on the building blocks shared by both engines.

use fdiab::analysis::kernel::{KernelTable, MixtureKernel};
use fdiab::analysis::{Analyzer, Link};
use fdiab::beamforming::gain_distribution;
use fdiab::point_process::{palm_thinning_probability, retention_probability, sample_mhcpp2, MhcppSpec};
use fdiab::stochastics::{hermite_rule, CompositeGLParams, GlMixture};
use fdiab::{NodeClass, SystemParams};
use proptest::prelude::*;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn class_strategy() -> impl Strategy<Value = NodeClass> {
    prop_oneof![Just(NodeClass::Gnb), Just(NodeClass::IabLos), Just(NodeClass::IabNlos)]
}

proptest! {
    #[test]
    fn tabulated_kernel_tracks_exact(class in class_strategy(), log_y in -12.0f64..12.0) {
        let p = SystemParams::defaults();
        let mix = GlMixture::new(&CompositeGLParams::for_class(&p, class), &hermite_rule(5).unwrap());
        let gains = gain_distribution(&p.gnb_tx, &p.ue_rx, p.gnb_tx.subarrays);
        let k = MixtureKernel::new(&mix, &gains);
        let t = KernelTable::build(&k, 3);
        let y = 10f64.powf(log_y);
        let (mut a, mut b) = ([0.0f64; 4], [0.0f64; 4]);
        k.eval(y, &mut a);
        t.eval(y, &mut b);
        for n in 0..4 {
            prop_assert!((a[n] - b[n]).abs() < 2e-8, "order {} at {}: {} vs {}", n, y, a[n], b[n]);
        }
        prop_assert!(a[0] >= 0.0 && a[0] <= k.limit() + 1e-15);
    }

    #[test]
    fn mixture_laplace_is_a_decreasing_probability(class in class_strategy(), s in 0.0f64..1e12, ds in 0.0f64..1e12) {
        let p = SystemParams::defaults();
        let mix = GlMixture::new(&CompositeGLParams::for_class(&p, class), &hermite_rule(7).unwrap());
        let a = mix.laplace(s);
        let b = mix.laplace(s + ds);
        prop_assert!((0.0..=1.0).contains(&a));
        prop_assert!(b <= a + 1e-15);
    }

    #[test]
    fn palm_retention_is_bounded(r0 in 0.0f64..500.0, xi in 1.0f64..150.0, dens in 1e-6f64..1e-4) {
        let v = palm_thinning_probability(r0, xi, dens);
        prop_assert!((0.0..=1.0).contains(&v));
        if r0 >= 2.0 * xi {
            prop_assert_eq!(v, retention_probability(xi, dens));
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn hard_core_never_violated(xi in 10.0f64..150.0, dens in 1e-6f64..5e-5, seed in any::<u64>()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let pat = sample_mhcpp2(&MhcppSpec::new(dens, xi), 800.0, &mut rng);
        prop_assert!(pat.min_pair_distance() >= xi);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(4))]

    #[test]
    fn link_coverage_falls_with_threshold(t_db in -10.0f64..15.0, step in 0.5f64..10.0) {
        let a = Analyzer::new(&SystemParams::defaults()).unwrap();
        let lo = a.link_coverage(Link::IabLosAccess, 10f64.powf(t_db / 10.0)).unwrap();
        let hi = a.link_coverage(Link::IabLosAccess, 10f64.powf((t_db + step) / 10.0)).unwrap();
        prop_assert!(hi <= lo + 1e-7, "{} then {}", lo, hi);
        prop_assert!((0.0..=1.0).contains(&lo));
    }
}
