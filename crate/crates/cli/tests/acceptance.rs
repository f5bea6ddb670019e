//! Acceptance suite: one pass/fail line per criterion on the reference deployment.
//!
//! Monte Carlo runs use 1e5 snapshots. Run in release mode; the whole suite takes several
//! minutes on one core.

use std::f64::consts::PI;
use std::process::Command;

use fdiab::analysis::Analyzer;
use fdiab::beamforming::{angle_sampled_gain, gain_distribution, sidelobe_gains, ArrayGeometry};
use fdiab::geometry::contact_cdf_mhcpp;
use fdiab::montecarlo::{simulate, McConfig, McReport};
use fdiab::numeric::Jet;
use fdiab::point_process::{palm_thinning_probability, sample_mhcpp2, sample_ppp, thin_type_ii, MhcppSpec};
use fdiab::stochastics::{gl_laplace, hermite_rule, sample_gl, CompositeGLParams, GlMixture};
use fdiab::{Duplex, SystemParams};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

const MC_ITERATIONS: usize = 100_000;
const SEED: u64 = 1;
const BIAS_GRID: [f64; 7] = [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0];
const TAU_DB: [f64; 3] = [0.0, 5.0, 10.0];

fn db(x: f64) -> f64 {
    10f64.powf(x / 10.0)
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: String) -> Outcome {
    Outcome { pass, detail }
}

/// Analytic coverage, association and one simulation per bias value.
struct BiasSweep {
    coverage: Vec<[f64; 3]>,
    association: Vec<[f64; 3]>,
    mc: Vec<McReport>,
}

fn bias_sweep() -> BiasSweep {
    let mut out = BiasSweep { coverage: Vec::new(), association: Vec::new(), mc: Vec::new() };
    for bias in BIAS_GRID {
        let p = SystemParams::defaults().with(|r| r.bias_ratio_db = bias).unwrap();
        let a = Analyzer::new(&p).unwrap();
        let cov = TAU_DB.map(|t| a.sinr_coverage(db(t)).unwrap().value);
        let asc = a.association();
        out.coverage.push(cov);
        out.association.push([asc.gnb, asc.iab_los, asc.iab_nlos]);
        let mut cfg = McConfig::new(MC_ITERATIONS, SEED, TAU_DB.map(db).to_vec());
        cfg.workers = workers();
        out.mc.push(simulate(&p, &cfg).unwrap());
    }
    out
}

fn coverage_matches_simulation(s: &BiasSweep) -> Outcome {
    let mut worst = (0.0, 0.0, 0.0);
    for (b, (cov, rep)) in s.coverage.iter().zip(&s.mc).enumerate() {
        for (i, t) in TAU_DB.iter().enumerate() {
            let gap = (cov[i] - rep.coverage[i].mean).abs();
            if gap > worst.0 {
                worst = (gap, BIAS_GRID[b], *t);
            }
        }
    }
    outcome(worst.0 <= 0.03, format!("max |analytic - mc| = {:.4} at bias {} dB, tau {} dB (limit 0.03)", worst.0, worst.1, worst.2))
}

fn coverage_peaks_at_zero_bias(s: &BiasSweep) -> Outcome {
    let cov: Vec<f64> = s.coverage.iter().map(|c| c[0]).collect();
    let best = (0..cov.len()).max_by(|&i, &j| cov[i].total_cmp(&cov[j])).unwrap();
    let shown: Vec<String> = cov.iter().map(|c| format!("{c:.4}")).collect();
    outcome(BIAS_GRID[best] == 0.0, format!("argmax at {} dB; coverage {}", BIAS_GRID[best], shown.join(" ")))
}

fn association_consistent(s: &BiasSweep) -> Outcome {
    let sums_ok = s.association.iter().all(|a| (0.99..=1.01).contains(&(a[0] + a[1] + a[2])));
    let iab: Vec<f64> = s.association.iter().map(|a| a[1] + a[2]).collect();
    let monotone = iab.windows(2).all(|w| w[1] > w[0]);
    let mut gap: f64 = 0.0;
    for (a, rep) in s.association.iter().zip(&s.mc) {
        for k in 0..3 {
            gap = gap.max((a[k] - rep.association[k].mean).abs());
        }
    }
    outcome(
        sums_ok && monotone && gap <= 0.02,
        format!("sums in [0.99, 1.01]: {sums_ok}; IAB share increasing: {monotone}; max |analytic - mc| = {gap:.4} (limit 0.02)"),
    )
}

fn capacity_duplex_ratio() -> Outcome {
    let p = SystemParams::defaults().with(|r| r.eta_db = Some(-90.0)).unwrap();
    let fd = Analyzer::new(&p).unwrap().capacity_with_outage(1.0).unwrap().value;
    let hd = Analyzer::new(&p.with_duplex(Duplex::Hd)).unwrap().capacity_with_outage(1.0).unwrap().value;
    let ratio = fd / hd;
    outcome((1.8..=2.0).contains(&ratio), format!("IBFD/HD = {ratio:.4} ({fd:.4e} / {hd:.4e} bit/s), target [1.8, 2.0]"))
}

fn adc_saturation() -> Outcome {
    let cap = |q: f64| {
        let p = SystemParams::defaults().with(|r| r.q_adc = q).unwrap();
        Analyzer::new(&p).unwrap().capacity_with_outage(1.0).unwrap().value
    };
    let (c5, c12) = (cap(5.0), cap(12.0));
    let rel = (c5 - c12).abs() / c12;
    outcome(rel < 0.02, format!("q=5 {c5:.5e}, q=12 {c12:.5e}, relative gap {rel:.2e} (limit 0.02)"))
}

fn ergodic(p: &SystemParams) -> f64 {
    Analyzer::new(p).unwrap().ergodic_capacity().unwrap().value
}

fn ergodic_duplex_ratio() -> Outcome {
    let mut ratios = Vec::new();
    for eta in [-90.0, -70.0, -50.0] {
        let p = SystemParams::defaults().with(|r| r.eta_db = Some(eta)).unwrap();
        ratios.push(ergodic(&p) / ergodic(&p.with_duplex(Duplex::Hd)));
    }
    let pass = ratios.iter().all(|r| (1.4..=1.8).contains(r));
    outcome(pass, format!("IBFD/HD at eta -90/-70/-50 dB = {:.3} / {:.3} / {:.3}, target [1.4, 1.8]", ratios[0], ratios[1], ratios[2]))
}

fn hard_core_helps() -> Outcome {
    let caps: Vec<f64> =
        [0.0, 25.0, 50.0, 100.0].iter().map(|&xi| ergodic(&SystemParams::defaults().with(|r| r.hard_core = xi).unwrap())).collect();
    let pass = caps.windows(2).all(|w| w[1] > w[0]);
    let shown: Vec<String> = caps.iter().map(|c| format!("{c:.5e}")).collect();
    outcome(pass, format!("ergodic at xi 0/25/50/100 m: {}", shown.join(" ")))
}

fn distribution_layer() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    // judged at the converged rule; the default five-node rule is reported alongside
    let converged = hermite_rule(15).unwrap();
    let default_rule = hermite_rule(SystemParams::defaults().gh_nodes).unwrap();
    let n = 10_000_000;
    let (mut worst_gl, mut worst_default): (f64, f64) = (0.0, 0.0);
    for _ in 0..10 {
        let shape = rng.random_range(1..=5u32);
        let mu: f64 = rng.random_range(-16.0..-13.0);
        // shadowing spreads of 3 to 11 dB
        let sigma: f64 = rng.random_range(0.7..2.5);
        let glp = CompositeGLParams::new(shape, mu, sigma);
        let s = rng.random_range(0.1..5.0) / glp.mean();
        let mc = (0..n).map(|_| (-s * sample_gl(&glp, &mut rng)).exp()).sum::<f64>() / n as f64;
        worst_gl = worst_gl.max((gl_laplace(s, &glp, &converged) - mc).abs() / mc);
        worst_default = worst_default.max((gl_laplace(s, &glp, &default_rule) - mc).abs() / mc);
    }

    let p = SystemParams::defaults();
    let pairs = [(p.gnb_tx, p.iab_rx), (p.iab_tx, p.iab_rx), (p.gnb_tx, p.ue_rx), (p.iab_tx, p.ue_rx)];
    // rare mainlobe hits make the oracle noisy: relative s.d. is about 19 per draw
    let draws = 40_000_000;
    let mut worst_gain: f64 = 0.0;
    for (tx, rx) in pairs {
        let mean = gain_distribution(&tx, &rx, tx.subarrays).mean();
        let mc = (0..draws).map(|_| angle_sampled_gain(&tx, &rx, tx.subarrays, &mut rng)).sum::<f64>() / draws as f64;
        worst_gain = worst_gain.max((mean - mc).abs() / mc);
    }

    // tabulated (g_hat, g) in dB for gNB-tx, IAB-tx, IAB-rx, UE-rx
    let table = [(p.gnb_tx, -8.9, -17.8), (p.iab_tx, -5.9, -11.7), (p.iab_rx, -5.9, -11.7), (p.ue_rx, -2.9, -5.7)];
    let mut worst_db: f64 = 0.0;
    for (geom, g_hat_db, g_db) in table {
        let (g, g_hat) = sidelobe_gains(&ArrayGeometry { subarrays: 1, ..geom });
        worst_db = worst_db.max((10.0 * g.log10() - g_db).abs()).max((10.0 * g_hat.log10() - g_hat_db).abs());
    }
    outcome(
        worst_gl < 0.01 && worst_gain < 0.01 && worst_db <= 0.1,
        format!(
            "GL Laplace max rel err {worst_gl:.2e} at T=15 ({worst_default:.2e} at T=5; 10 points, 1e7 draws); gain mean max rel err {worst_gain:.2e}; sidelobe max dB err {worst_db:.3}"
        ),
    )
}

fn hard_core_layer() -> Outcome {
    let p = SystemParams::defaults();
    let spec = MhcppSpec::new(p.parent_density(), p.hard_core);
    let mut rng = ChaCha8Rng::seed_from_u64(SEED);
    let snapshots = 20_000;
    let grid: Vec<f64> = (1..=60).map(|i| 5.0 * i as f64).collect();
    let mut count = 0usize;
    let mut violations = 0usize;
    let mut below = vec![0usize; grid.len()];
    for _ in 0..snapshots {
        let pat = sample_mhcpp2(&spec, p.radius, &mut rng);
        count += pat.len();
        if pat.min_pair_distance() < p.hard_core {
            violations += 1;
        }
        let nearest = pat.points.iter().map(|q| q[0].hypot(q[1])).fold(f64::INFINITY, f64::min);
        for (b, &r) in below.iter_mut().zip(&grid) {
            *b += usize::from(nearest <= r);
        }
    }
    let density = count as f64 / (snapshots as f64 * PI * p.radius * p.radius);
    let density_err = (density / spec.density() - 1.0).abs();
    let sup = grid
        .iter()
        .zip(&below)
        .map(|(&r, &b)| (contact_cdf_mhcpp(r, p.lambda_m, p.hard_core).0 - b as f64 / snapshots as f64).abs())
        .fold(0.0, f64::max);

    // Palm experiment: a retained parent at the origin and a parent at r0 on the overlap branch
    let lam = spec.parent_density;
    let xi = spec.xi;
    let trials = 400_000;
    let mut worst_palm: f64 = 0.0;
    for r0 in [1.1 * xi, 1.5 * xi, 1.9 * xi] {
        let (mut kept, mut both) = (0usize, 0usize);
        for _ in 0..trials {
            let others = sample_ppp(lam, r0 + xi, &mut rng);
            let mut parents = vec![[0.0, 0.0], [r0, 0.0]];
            parents.extend(others.points.iter().copied().filter(|q| q[0].hypot(q[1]) < xi || (q[0] - r0).hypot(q[1]) < xi));
            let marks: Vec<f64> = (0..parents.len()).map(|_| rng.random()).collect();
            let keep = thin_type_ii(&parents, &marks, xi);
            if keep[0] {
                kept += 1;
                both += usize::from(keep[1]);
            }
        }
        let mc = both as f64 / kept as f64;
        worst_palm = worst_palm.max((palm_thinning_probability(r0, xi, lam) - mc).abs() / mc);
    }
    outcome(
        density_err < 0.03 && violations == 0 && sup <= 0.02 && worst_palm < 0.02,
        format!(
            "density rel err {density_err:.4}; pairs under xi {violations}; contact CDF sup-norm {sup:.4}; Palm retention max rel err {worst_palm:.4}"
        ),
    )
}

/// Central difference estimate of the `k`-th derivative with one Richardson step.
fn richardson(f: &dyn Fn(f64) -> f64, x: f64, h: f64, k: usize) -> f64 {
    let d = |h: f64| match k {
        1 => (f(x + h) - f(x - h)) / (2.0 * h),
        2 => (f(x + h) - 2.0 * f(x) + f(x - h)) / (h * h),
        3 => (f(x + 2.0 * h) - 2.0 * f(x + h) + 2.0 * f(x - h) - f(x - 2.0 * h)) / (2.0 * h * h * h),
        _ => unreachable!(),
    };
    (4.0 * d(h / 2.0) - d(h)) / 3.0
}

fn numerical_kernels(s: &BiasSweep) -> Outcome {
    // jets of the mixture Laplace transform and of exp(-c (1 - L)), the coverage building block
    let p = SystemParams::defaults();
    let gh = hermite_rule(p.gh_nodes).unwrap();
    let mut worst_jet: f64 = 0.0;
    for class in fdiab::NodeClass::ALL {
        let mix = GlMixture::new(&CompositeGLParams::for_class(&p, class), &gh);
        let a_min = mix.rates.iter().copied().fold(f64::INFINITY, f64::min);
        for s0 in [0.2 * a_min, a_min, 5.0 * a_min] {
            let h = 0.01 * (s0 + a_min);
            let lap = mix.laplace_jet(s0, 3);
            let c = 2.0;
            let mut e = lap.coeffs().iter().map(|x| c * x).collect::<Vec<_>>();
            e[0] -= c;
            let composed = Jet::from_coeffs(e).exp();
            let f_lap = |x: f64| mix.laplace(x);
            let f_exp = |x: f64| (-c * (1.0 - mix.laplace(x))).exp();
            for k in 1..=3 {
                for (jet, f) in [(&lap, &f_lap as &dyn Fn(f64) -> f64), (&composed, &f_exp)] {
                    let fd = richardson(f, s0, h, k);
                    worst_jet = worst_jet.max((jet.derivative(k) - fd).abs() / fd.abs());
                }
            }
        }
    }

    let hi = p.with(|r| r.gh_nodes = 15.0).unwrap();
    let (lo_a, hi_a) = (Analyzer::new(&p).unwrap(), Analyzer::new(&hi).unwrap());
    let mut worst_t: f64 = 0.0;
    for t in TAU_DB {
        worst_t = worst_t.max((lo_a.sinr_coverage(db(t)).unwrap().value - hi_a.sinr_coverage(db(t)).unwrap().value).abs());
    }

    let mut monotone = s.coverage.iter().all(|c| c.windows(2).all(|w| w[1] <= w[0]));
    let mut prev = f64::INFINITY;
    for t in [-10.0, -5.0, 0.0, 5.0, 10.0, 15.0, 20.0] {
        let c = lo_a.sinr_coverage(db(t)).unwrap().value;
        monotone &= c <= prev;
        prev = c;
    }

    let identical = csv_reproducible();
    outcome(
        worst_jet <= 1e-6 && worst_t <= 0.01 && monotone && identical,
        format!(
            "jet vs Richardson max rel err {worst_jet:.2e}; T 5->15 max coverage change {worst_t:.2e}; monotone in tau: {monotone}; CSV byte-identical: {identical}"
        ),
    )
}

/// Runs the binary twice on a sweep covering every metric and both engines.
fn csv_reproducible() -> bool {
    let dir = tempfile::tempdir().unwrap();
    let d = dir.path();
    std::fs::write(
        d.join("all.sweep"),
        "axis = xi\nvalues = 100\nmetrics = association, coverage, cap_outage, ergodic\nengines = both\nmc_iterations = 5000\nseed = 3\n",
    )
    .unwrap();
    let run = |out: &str, workers: &str| {
        let o = Command::new(env!("CARGO_BIN_EXE_fdiab"))
            .args(["--sweep", "all.sweep", "--out", out])
            .current_dir(d)
            .env("FDIAB_WORKERS", workers)
            .output()
            .unwrap();
        assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
        std::fs::read(d.join(out)).unwrap()
    };
    run("a.csv", "1") == run("b.csv", "3")
}

#[test]
fn acceptance() {
    let sweep = bias_sweep();
    let criteria: Vec<(&str, Outcome)> = vec![
        ("analytic vs Monte Carlo coverage", coverage_matches_simulation(&sweep)),
        ("coverage maximal at 0 dB bias", coverage_peaks_at_zero_bias(&sweep)),
        ("IBFD/HD capacity with outage", capacity_duplex_ratio()),
        ("ADC resolution saturation", adc_saturation()),
        ("IBFD/HD ergodic capacity", ergodic_duplex_ratio()),
        ("ergodic capacity increases with hard-core distance", hard_core_helps()),
        ("association normalization, monotonicity, simulation", association_consistent(&sweep)),
        ("distribution-layer oracles", distribution_layer()),
        ("hard-core process layer", hard_core_layer()),
        ("numerical kernels and reproducibility", numerical_kernels(&sweep)),
    ];
    let mut failed = Vec::new();
    for (i, (name, o)) in criteria.iter().enumerate() {
        println!("criterion {:>2} {}: {name}: {}", i + 1, if o.pass { "PASS" } else { "FAIL" }, o.detail);
        if !o.pass {
            failed.push(i + 1);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
