//! Network simulator over the scalar SINR model: realizes gNBs and IAB-nodes, associates
//! the typical UE, and samples access and backhaul SINRs with composite fading,
//! beamforming gains, blockage, self-interference and ADC quantization.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::analysis::{Link, RxRole};
use crate::beamforming::{angle_sampled_gain, gain_distribution, zf_penalty_prob, ArrayGeometry};
use crate::config::{NodeClass, SystemParams};
use crate::geometry::p_los;
use crate::point_process::{sample_mhcpp2, sample_ppp, MhcppSpec, PointPattern};
use crate::stochastics::{sample_gl, CompositeGLParams};
use crate::EvalError;

/// Iterations per RNG stream; streams are merged in order so results do not depend on the worker count.
pub const CHUNK: usize = 1024;

/// How interference beamforming gains are drawn.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Fidelity {
    /// From the discrete gain law.
    Atom,
    /// From uniformly drawn quantized beam angles.
    Angle,
}

/// One network snapshot around the typical UE at the origin.
#[derive(Debug, Clone)]
pub struct Realization {
    pub gnbs: PointPattern,
    pub iab_nodes: PointPattern,
    /// Line-of-sight labels of the IAB-nodes with respect to the origin.
    pub iab_los: Vec<bool>,
}

/// Radius of the simulated disk: every receiver within the analysis radius sees its full neighbourhood.
pub fn sampling_radius(params: &SystemParams) -> f64 {
    2.0 * params.radius
}

pub fn realize<R: Rng + ?Sized>(params: &SystemParams, rng: &mut R) -> Realization {
    let region = sampling_radius(params);
    let spec = MhcppSpec::new(params.parent_density(), params.hard_core);
    let gnbs = sample_mhcpp2(&spec, region, rng);
    let iab_nodes = sample_ppp(params.lambda_s, region, rng);
    let iab_los = iab_nodes.points.iter().map(|p| rng.random::<f64>() < p_los(norm(*p), params.blockage_eps)).collect();
    Realization { gnbs, iab_nodes, iab_los }
}

fn norm(p: [f64; 2]) -> f64 {
    p[0].hypot(p[1])
}

fn dist(a: [f64; 2], b: [f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Serving node of the typical UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Serving {
    pub class: NodeClass,
    /// Index into the gNB or IAB-node pattern.
    pub index: usize,
    pub distance: f64,
}

/// Long-term biased received power used for association (gNB bias is the reference).
pub fn biased_power(class: NodeClass, r: f64, params: &SystemParams) -> f64 {
    let (arr, power, bias) = match class {
        NodeClass::Gnb => (params.gnb_tx, params.power_m, 1.0),
        _ => (params.iab_tx, params.power_s, params.bias_ratio),
    };
    let s = arr.subarrays as f64;
    let fading = (params.mu_hat() + 0.5 * params.sigma_hat(class).powi(2)).exp();
    bias * power * arr.n_total() as f64 / (s * s) * fading * r.powf(-params.alpha(class))
}

/// Max biased-power association among the nearest gNB and nearest LoS / NLoS IAB-node.
pub fn associate(real: &Realization, params: &SystemParams) -> Option<Serving> {
    let mut best: Option<(f64, Serving)> = None;
    let mut consider = |class, index, distance: f64| {
        let p = biased_power(class, distance, params);
        if best.is_none_or(|(bp, _)| p > bp) {
            best = Some((p, Serving { class, index, distance }));
        }
    };
    if let Some((i, d)) = nearest(&real.gnbs.points, [0.0, 0.0], |_| true) {
        consider(NodeClass::Gnb, i, d);
    } else {
        return None;
    }
    for (class, los) in [(NodeClass::IabLos, true), (NodeClass::IabNlos, false)] {
        if let Some((i, d)) = nearest(&real.iab_nodes.points, [0.0, 0.0], |j| real.iab_los[j] == los) {
            consider(class, i, d);
        }
    }
    best.map(|b| b.1)
}

fn nearest(points: &[[f64; 2]], at: [f64; 2], keep: impl Fn(usize) -> bool) -> Option<(usize, f64)> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &p) in points.iter().enumerate() {
        if !keep(i) {
            continue;
        }
        let d = dist(p, at);
        if best.is_none_or(|(_, bd)| d < bd) {
            best = Some((i, d));
        }
    }
    best
}

/// Interfering tiers of a link: the serving tier always, the other tier only in full duplex.
pub fn interferer_tiers(link: Link, params: &SystemParams) -> Vec<NodeClass> {
    let gnb = vec![NodeClass::Gnb];
    let iab = vec![NodeClass::IabLos, NodeClass::IabNlos];
    let (own, other) = match link {
        Link::GnbAccess | Link::Backhaul => (gnb, iab),
        _ => (iab, gnb),
    };
    if params.cross_tier() {
        own.into_iter().chain(other).collect()
    } else {
        own
    }
}

/// Inverse-CDF sampler over a discrete gain law.
#[derive(Debug, Clone)]
struct GainSampler {
    tx: ArrayGeometry,
    rx: ArrayGeometry,
    cdf: Vec<f64>,
    gains: Vec<f64>,
}

impl GainSampler {
    fn new(tx: ArrayGeometry, rx: ArrayGeometry) -> Self {
        let d = gain_distribution(&tx, &rx, tx.subarrays);
        let mut acc = 0.0;
        let mut cdf = Vec::new();
        let mut gains = Vec::new();
        for &(b, c) in d.atoms() {
            acc += c;
            cdf.push(acc);
            gains.push(b);
        }
        Self { tx, rx, cdf, gains }
    }

    fn sample<R: Rng + ?Sized>(&self, fidelity: Fidelity, rng: &mut R) -> f64 {
        match fidelity {
            Fidelity::Atom => {
                let u = rng.random::<f64>() * self.cdf[self.cdf.len() - 1];
                let i = self.cdf.partition_point(|&c| c <= u).min(self.gains.len() - 1);
                self.gains[i]
            }
            Fidelity::Angle => angle_sampled_gain(&self.tx, &self.rx, self.tx.subarrays, rng),
        }
    }
}

/// Per-receiver-role constants.
#[derive(Debug, Clone)]
struct RxConstants {
    noise: f64,
    /// Indexed by transmitting tier: 0 gNB, 1 IAB.
    desired: [f64; 2],
    interference: [f64; 2],
    gains: [GainSampler; 2],
}

/// Scalar SINR sampler bound to one parameter set.
#[derive(Debug, Clone)]
pub struct Simulator {
    params: SystemParams,
    fidelity: Fidelity,
    gl: [CompositeGLParams; 3],
    alpha: [f64; 3],
    zf: [f64; 2],
    ue: RxConstants,
    iab: RxConstants,
    q_inv: f64,
}

fn class_index(c: NodeClass) -> usize {
    match c {
        NodeClass::Gnb => 0,
        NodeClass::IabLos => 1,
        NodeClass::IabNlos => 2,
    }
}

fn tier(c: NodeClass) -> usize {
    if c == NodeClass::Gnb {
        0
    } else {
        1
    }
}

impl Simulator {
    pub fn new(params: &SystemParams, fidelity: Fidelity) -> Self {
        let k = params.subcarriers;
        let txs = [(params.gnb_tx, params.power_m), (params.iab_tx, params.power_s)];
        let rx_consts = |rx: ArrayGeometry| {
            let nr = rx.n_total() as f64;
            let c = |t: usize, pow: i32| {
                let (a, p) = txs[t];
                p * a.n_total() as f64 * nr * nr / (k * (a.subarrays as f64).powi(pow))
            };
            RxConstants {
                noise: params.noise_power() * nr,
                desired: [c(0, 2), c(1, 2)],
                interference: [c(0, 1), c(1, 1)],
                gains: [GainSampler::new(params.gnb_tx, rx), GainSampler::new(params.iab_tx, rx)],
            }
        };
        let q = params.quantization_factor();
        Self {
            params: params.clone(),
            fidelity,
            gl: NodeClass::ALL.map(|c| CompositeGLParams::for_class(params, c)),
            alpha: NodeClass::ALL.map(|c| params.alpha(c)),
            zf: [
                zf_penalty_prob(params.gnb_tx.n_total(), params.gnb_tx.subarrays),
                zf_penalty_prob(params.iab_tx.n_total(), params.iab_tx.subarrays),
            ],
            ue: rx_consts(params.ue_rx),
            iab: rx_consts(params.iab_rx),
            q_inv: if q.is_finite() { 1.0 / q } else { 0.0 },
        }
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    fn rx(&self, role: RxRole) -> &RxConstants {
        match role {
            RxRole::Ue => &self.ue,
            RxRole::Iab => &self.iab,
        }
    }

    fn desired<R: Rng + ?Sized>(&self, class: NodeClass, role: RxRole, r: f64, rng: &mut R) -> f64 {
        let t = tier(class);
        if rng.random::<f64>() >= self.zf[t] {
            return 0.0;
        }
        let i = class_index(class);
        self.rx(role).desired[t] * sample_gl(&self.gl[i], rng) * r.powf(-self.alpha[i])
    }

    fn interferer<R: Rng + ?Sized>(&self, class: NodeClass, role: RxRole, d: f64, rng: &mut R) -> f64 {
        let t = tier(class);
        let i = class_index(class);
        let rx = self.rx(role);
        rx.interference[t] * rx.gains[t].sample(self.fidelity, rng) * sample_gl(&self.gl[i], rng) * d.powf(-self.alpha[i])
    }

    fn sinr(&self, signal: f64, interference: f64, rsi: f64, noise: f64) -> f64 {
        let quant = (signal + self.params.eta_dig * rsi + interference + noise) * self.q_inv;
        signal / (interference + rsi + noise + quant)
    }

    /// Access-link SINR of the typical UE. IAB labels come from the realization.
    pub fn access_sinr<R: Rng + ?Sized>(&self, real: &Realization, serving: &Serving, rng: &mut R) -> f64 {
        let link = match serving.class {
            NodeClass::Gnb => Link::GnbAccess,
            NodeClass::IabLos => Link::IabLosAccess,
            NodeClass::IabNlos => Link::IabNlosAccess,
        };
        let tiers = interferer_tiers(link, &self.params);
        let radius = self.params.radius;
        let signal = self.desired(serving.class, RxRole::Ue, serving.distance, rng);
        let mut interference = 0.0;
        if tiers.contains(&NodeClass::Gnb) {
            for (j, &p) in real.gnbs.points.iter().enumerate() {
                let d = norm(p);
                if d <= radius && !(serving.class == NodeClass::Gnb && j == serving.index) {
                    interference += self.interferer(NodeClass::Gnb, RxRole::Ue, d, rng);
                }
            }
        }
        if tiers.contains(&NodeClass::IabLos) {
            for (j, &p) in real.iab_nodes.points.iter().enumerate() {
                let d = norm(p);
                if d <= radius && !(serving.class != NodeClass::Gnb && j == serving.index) {
                    let class = if real.iab_los[j] { NodeClass::IabLos } else { NodeClass::IabNlos };
                    interference += self.interferer(class, RxRole::Ue, d, rng);
                }
            }
        }
        self.sinr(signal, interference, 0.0, self.ue.noise)
    }

    /// Backhaul SINR of an IAB-node at `at` served by its nearest gNB. `own` excludes the
    /// receiving node from the IAB interferers; blockage labels are drawn afresh for this receiver.
    pub fn backhaul_sinr<R: Rng + ?Sized>(&self, real: &Realization, at: [f64; 2], own: Option<usize>, rng: &mut R) -> f64 {
        let Some((serving, r)) = nearest(&real.gnbs.points, at, |_| true) else {
            return 0.0;
        };
        let tiers = interferer_tiers(Link::Backhaul, &self.params);
        let radius = self.params.radius;
        let signal = self.desired(NodeClass::Gnb, RxRole::Iab, r, rng);
        let mut interference = 0.0;
        for (j, &p) in real.gnbs.points.iter().enumerate() {
            let d = dist(p, at);
            if j != serving && d <= radius {
                interference += self.interferer(NodeClass::Gnb, RxRole::Iab, d, rng);
            }
        }
        if tiers.contains(&NodeClass::IabLos) {
            for (j, &p) in real.iab_nodes.points.iter().enumerate() {
                let d = dist(p, at);
                if Some(j) != own && d <= radius && d > 0.0 {
                    let los = rng.random::<f64>() < p_los(d, self.params.blockage_eps);
                    let class = if los { NodeClass::IabLos } else { NodeClass::IabNlos };
                    interference += self.interferer(class, RxRole::Iab, d, rng);
                }
            }
        }
        self.sinr(signal, interference, self.params.rsi_power(), self.iab.noise)
    }
}

/// Mean with a 95% normal-approximation half width.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McEstimate {
    pub mean: f64,
    pub half_width_95: f64,
    pub n_samples: usize,
}

impl McEstimate {
    pub fn scaled(&self, k: f64) -> Self {
        Self { mean: self.mean * k, half_width_95: self.half_width_95 * k.abs(), ..*self }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct Tally {
    n: usize,
    sum: f64,
    sumsq: f64,
}

impl Tally {
    fn push(&mut self, x: f64) {
        self.n += 1;
        self.sum += x;
        self.sumsq += x * x;
    }

    fn merge(&mut self, o: &Tally) {
        self.n += o.n;
        self.sum += o.sum;
        self.sumsq += o.sumsq;
    }

    fn estimate(&self) -> McEstimate {
        if self.n == 0 {
            return McEstimate { mean: f64::NAN, half_width_95: f64::NAN, n_samples: 0 };
        }
        let n = self.n as f64;
        let mean = self.sum / n;
        let var = if self.n > 1 { ((self.sumsq - n * mean * mean) / (n - 1.0)).max(0.0) } else { 0.0 };
        McEstimate { mean, half_width_95: 1.96 * (var / n).sqrt(), n_samples: self.n }
    }
}

/// Accumulators of one chunk.
#[derive(Debug, Clone)]
struct Tallies {
    association: [Tally; 3],
    coverage: Vec<Tally>,
    link_coverage: Vec<[Tally; 4]>,
    rate: [Tally; 4],
}

impl Tallies {
    fn new(n_tau: usize) -> Self {
        Self {
            association: Default::default(),
            coverage: vec![Tally::default(); n_tau],
            link_coverage: vec![Default::default(); n_tau],
            rate: Default::default(),
        }
    }

    fn merge(&mut self, o: &Tallies) {
        for (a, b) in self.association.iter_mut().zip(&o.association) {
            a.merge(b);
        }
        for (a, b) in self.coverage.iter_mut().zip(&o.coverage) {
            a.merge(b);
        }
        for (a, b) in self.link_coverage.iter_mut().zip(&o.link_coverage) {
            for (x, y) in a.iter_mut().zip(b) {
                x.merge(y);
            }
        }
        for (a, b) in self.rate.iter_mut().zip(&o.rate) {
            a.merge(b);
        }
    }
}

/// Simulation request.
#[derive(Debug, Clone)]
pub struct McConfig {
    pub iterations: usize,
    pub seed: u64,
    pub fidelity: Fidelity,
    /// Linear SINR thresholds evaluated on every realization.
    pub taus: Vec<f64>,
    pub workers: usize,
}

impl McConfig {
    pub fn new(iterations: usize, seed: u64, taus: Vec<f64>) -> Self {
        Self { iterations, seed, fidelity: Fidelity::Atom, taus, workers: 1 }
    }
}

/// Everything one simulation run estimates.
#[derive(Debug, Clone)]
pub struct McReport {
    pub iterations: usize,
    pub taus: Vec<f64>,
    /// Association frequencies in [`NodeClass::ALL`] order.
    pub association: [McEstimate; 3],
    /// Network coverage per threshold: access and (for IAB-served UEs) the serving node's
    /// backhaul both above the threshold on the same snapshot.
    pub coverage: Vec<McEstimate>,
    /// Per-threshold link coverage in [`Link::ALL`] order, conditioned on the association
    /// class; the backhaul entry is a typical IAB-node at the origin.
    pub link_coverage: Vec<[McEstimate; 4]>,
    /// Mean `W log2(1 + SINR)` per link, same conditioning.
    pub link_rate: [McEstimate; 4],
    /// Association-weighted rates with IAB paths limited by the mean backhaul rate.
    pub ergodic: McEstimate,
    bandwidth: f64,
}

impl McReport {
    /// Capacity with outage at the `i`-th threshold.
    pub fn capacity_with_outage(&self, i: usize) -> McEstimate {
        self.coverage[i].scaled(self.bandwidth * (1.0 + self.taus[i]).log2())
    }

    /// Coverage combined from per-link estimates as independent factors.
    pub fn factorized_coverage(&self, i: usize) -> f64 {
        let a = &self.association;
        let l = &self.link_coverage[i];
        let m = |e: &McEstimate| if e.mean.is_nan() { 0.0 } else { e.mean };
        a[0].mean * m(&l[0]) + (a[1].mean * m(&l[1]) + a[2].mean * m(&l[2])) * m(&l[3])
    }
}

fn run_chunk(sim: &Simulator, cfg: &McConfig, chunk: usize) -> Tallies {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    rng.set_stream(chunk as u64);
    let start = chunk * CHUNK;
    let count = CHUNK.min(cfg.iterations - start);
    let bw = sim.params.effective_bandwidth();
    let mut t = Tallies::new(cfg.taus.len());
    for _ in 0..count {
        let (real, serving) = loop {
            let real = realize(&sim.params, &mut rng);
            if let Some(s) = associate(&real, &sim.params) {
                break (real, s);
            }
        };
        let ci = class_index(serving.class);
        for (k, a) in t.association.iter_mut().enumerate() {
            a.push(if k == ci { 1.0 } else { 0.0 });
        }
        let access = sim.access_sinr(&real, &serving, &mut rng);
        let serving_backhaul = if serving.class == NodeClass::Gnb {
            f64::INFINITY
        } else {
            sim.backhaul_sinr(&real, real.iab_nodes.points[serving.index], Some(serving.index), &mut rng)
        };
        let typical_backhaul = sim.backhaul_sinr(&real, [0.0, 0.0], None, &mut rng);
        for (k, &tau) in cfg.taus.iter().enumerate() {
            t.coverage[k].push(if access > tau && serving_backhaul > tau { 1.0 } else { 0.0 });
            t.link_coverage[k][ci].push(if access > tau { 1.0 } else { 0.0 });
            t.link_coverage[k][3].push(if typical_backhaul > tau { 1.0 } else { 0.0 });
        }
        t.rate[ci].push(bw * access.log2_1p());
        t.rate[3].push(bw * typical_backhaul.log2_1p());
    }
    t
}

trait Log2OnePlus {
    fn log2_1p(self) -> f64;
}

impl Log2OnePlus for f64 {
    fn log2_1p(self) -> f64 {
        self.ln_1p() / std::f64::consts::LN_2
    }
}

/// Runs the simulation; bit-identical for a fixed seed whatever the worker count.
pub fn simulate(params: &SystemParams, cfg: &McConfig) -> Result<McReport, EvalError> {
    if cfg.iterations == 0 {
        return Err(EvalError::Invalid("Monte Carlo needs at least one iteration".into()));
    }
    if cfg.taus.iter().any(|t| !(*t >= 0.0)) {
        return Err(EvalError::Invalid("thresholds must be nonnegative".into()));
    }
    let sim = Simulator::new(params, cfg.fidelity);
    let chunks = cfg.iterations.div_ceil(CHUNK);
    let workers = cfg.workers.clamp(1, chunks);
    let mut parts: Vec<Option<Tallies>> = vec![None; chunks];
    if workers == 1 {
        for (c, slot) in parts.iter_mut().enumerate() {
            *slot = Some(run_chunk(&sim, cfg, c));
        }
    } else {
        let results: Vec<Vec<(usize, Tallies)>> = std::thread::scope(|s| {
            let handles: Vec<_> = (0..workers)
                .map(|w| {
                    let sim = &sim;
                    s.spawn(move || (w..chunks).step_by(workers).map(|c| (c, run_chunk(sim, cfg, c))).collect::<Vec<_>>())
                })
                .collect();
            handles.into_iter().map(|h| h.join().expect("worker panicked")).collect()
        });
        for (c, t) in results.into_iter().flatten() {
            parts[c] = Some(t);
        }
    }
    let mut total = Tallies::new(cfg.taus.len());
    for p in parts.iter().flatten() {
        total.merge(p);
    }
    let association = total.association.map(|t| t.estimate());
    let link_rate = total.rate.map(|t| t.estimate());
    let ergodic = combine_ergodic(&association, &link_rate);
    log::debug!("simulated {} snapshots in {chunks} chunks", cfg.iterations);
    Ok(McReport {
        iterations: cfg.iterations,
        taus: cfg.taus.clone(),
        association,
        coverage: total.coverage.iter().map(Tally::estimate).collect(),
        link_coverage: total.link_coverage.iter().map(|l| l.map(|t| t.estimate())).collect(),
        link_rate,
        ergodic,
        bandwidth: params.effective_bandwidth(),
    })
}

/// Min-of-means combination; the half width treats the component means as independent.
fn combine_ergodic(a: &[McEstimate; 3], r: &[McEstimate; 4]) -> McEstimate {
    let val = |e: &McEstimate| if e.n_samples == 0 { (0.0, 0.0) } else { (e.mean, e.half_width_95) };
    let b = val(&r[3]);
    let mut mean = 0.0;
    let mut var = 0.0;
    for k in 0..3 {
        let mut x = val(&r[k]);
        if k > 0 && b.0 < x.0 {
            x = b;
        }
        mean += a[k].mean * x.0;
        var += (a[k].mean * x.1).powi(2) + (x.0 * a[k].half_width_95).powi(2);
    }
    McEstimate { mean, half_width_95: var.sqrt(), n_samples: a[0].n_samples }
}

/// Scalar metrics for [`estimate`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Metric {
    Association(NodeClass),
    Coverage(f64),
    CapacityOutage(f64),
    Ergodic,
}

pub fn estimate(metric: Metric, params: &SystemParams, n_iter: usize, seed: u64) -> Result<McEstimate, EvalError> {
    let taus = match metric {
        Metric::Coverage(t) | Metric::CapacityOutage(t) => vec![t],
        _ => Vec::new(),
    };
    let rep = simulate(params, &McConfig::new(n_iter, seed, taus))?;
    Ok(match metric {
        Metric::Association(c) => rep.association[class_index(c)],
        Metric::Coverage(_) => rep.coverage[0],
        Metric::CapacityOutage(_) => rep.capacity_with_outage(0),
        Metric::Ergodic => rep.ergodic,
    })
}
