//! Closed-form evaluators: interference Laplace functionals, per-link coverage,
//! network coverage, capacity with outage and ergodic capacity, in full and half duplex.
//!
//! Coverage of a link at threshold `tau` is
//! `p_zf * ∫ f(r) Σ_t w_t Σ_{n<M} (-s_t)^n/n! d^n/ds^n L(s_t) dr` with `s_t = G a_t r^alpha`,
//! where `L` is the Laplace transform of interference plus the additive constant. The
//! derivatives are carried as truncated Taylor series through every integral.

mod interference;
pub mod kernel;

use std::cell::RefCell;
use std::collections::HashMap;
use std::f64::consts::LN_2;
use std::fmt;
use std::sync::Arc;

pub use interference::{Density, Region, Source, PALM_ANGLES};
pub use kernel::{Kernel, KernelTable, MixtureKernel};

use crate::beamforming::{gain_distribution, zf_penalty_prob, ArrayGeometry};
use crate::config::{NodeClass, SystemParams};
use crate::geometry::{AssociationModel, AssociationResult, ContactLaw};
use crate::numeric::quad::{breakpoints, integrate_pieces};
use crate::numeric::{GaussLaguerre, GaussLegendre, Jet, QuadOptions};
use crate::stochastics::{hermite_rule, CompositeGLParams, GlMixture};
use crate::EvalError;

/// The four link types of the single-hop network.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Link {
    GnbAccess,
    IabLosAccess,
    IabNlosAccess,
    Backhaul,
}

impl Link {
    pub const ALL: [Link; 4] = [Link::GnbAccess, Link::IabLosAccess, Link::IabNlosAccess, Link::Backhaul];

    pub fn name(&self) -> &'static str {
        match self {
            Link::GnbAccess => "gnb_access",
            Link::IabLosAccess => "iab_los_access",
            Link::IabNlosAccess => "iab_nlos_access",
            Link::Backhaul => "backhaul",
        }
    }

    /// Class of the serving transmitter.
    pub fn transmitter(&self) -> NodeClass {
        match self {
            Link::GnbAccess | Link::Backhaul => NodeClass::Gnb,
            Link::IabLosAccess => NodeClass::IabLos,
            Link::IabNlosAccess => NodeClass::IabNlos,
        }
    }

    pub fn receiver(&self) -> RxRole {
        match self {
            Link::Backhaul => RxRole::Iab,
            _ => RxRole::Ue,
        }
    }
}

impl fmt::Display for Link {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Which receiver array hears the interference.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum RxRole {
    Ue,
    Iab,
}

impl RxRole {
    pub fn array(&self, params: &SystemParams) -> ArrayGeometry {
        match self {
            RxRole::Ue => params.ue_rx,
            RxRole::Iab => params.iab_rx,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KernelMode {
    /// Interpolated kernels (fast; about 1e-8 absolute).
    Tabulated,
    /// Direct summation over gain atoms and mixture nodes.
    Exact,
}

#[derive(Debug, Clone, Copy)]
pub struct AnalysisOptions {
    pub kernel: KernelMode,
    /// Tolerances of the interference integrals.
    pub inner: QuadOptions,
    /// Tolerances of the serving-distance integral.
    pub outer: QuadOptions,
    /// Multiplies every interference beamforming gain; zero removes interference.
    pub interference_gain_scale: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        Self {
            kernel: KernelMode::Tabulated,
            inner: QuadOptions { abs_tol: 1e-10, rel_tol: 1e-8, max_intervals: 2000 },
            outer: QuadOptions::new(1e-8, 1e-7),
            interference_gain_scale: 1.0,
        }
    }
}

/// Quantization-adjusted threshold prefactor of a link.
#[derive(Debug, Clone, PartialEq)]
pub struct SinrThresholdFactor {
    pub tau: f64,
    /// `tau / desired_coupling`, the quantization-free factor.
    pub base: f64,
    /// `(1 + 1/Q) / (1 - tau/Q)`.
    pub multiplier: f64,
    /// `base * multiplier`.
    pub factor: f64,
    /// `factor * a_t` for every Gauss-Hermite node of the desired-signal mixture.
    pub per_node: Vec<f64>,
}

/// A per-link quantity.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct LinkBreakdown {
    pub gnb_access: f64,
    pub iab_los_access: f64,
    pub iab_nlos_access: f64,
    pub backhaul: f64,
}

impl LinkBreakdown {
    pub fn get(&self, link: Link) -> f64 {
        match link {
            Link::GnbAccess => self.gnb_access,
            Link::IabLosAccess => self.iab_los_access,
            Link::IabNlosAccess => self.iab_nlos_access,
            Link::Backhaul => self.backhaul,
        }
    }

    fn set(&mut self, link: Link, v: f64) {
        match link {
            Link::GnbAccess => self.gnb_access = v,
            Link::IabLosAccess => self.iab_los_access = v,
            Link::IabNlosAccess => self.iab_nlos_access = v,
            Link::Backhaul => self.backhaul = v,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CoverageResult {
    pub value: f64,
    pub links: LinkBreakdown,
    pub association: AssociationResult,
    /// Sum of the quadrature error estimates of the link integrals.
    pub error: f64,
}

/// Capacity in bit/s with the per-link rates (coverage for capacity with outage).
#[derive(Debug, Clone, PartialEq)]
pub struct CapacityResult {
    pub value: f64,
    pub links: LinkBreakdown,
    pub association: AssociationResult,
    pub error: f64,
}

#[derive(Debug, Clone)]
enum Serving {
    Associated(NodeClass),
    Contact(ContactLaw),
}

/// Everything needed to evaluate one link: desired signal, serving law, interferers, constants.
#[derive(Debug, Clone)]
pub struct LinkModel {
    pub link: Link,
    pub desired: GlMixture,
    /// Desired power per unit fading and path loss: `P N_T N_R^2 / (K N^2)`.
    pub desired_coupling: f64,
    pub zf_prob: f64,
    pub alpha: f64,
    pub sources: Vec<Source>,
    /// `sigma^2 N_R`.
    pub noise: f64,
    /// Residual self-interference power (backhaul in full duplex only).
    pub rsi: f64,
    serving: Serving,
}

type KernelKey = (NodeClass, RxRole);

/// Analytic evaluator bound to one parameter set. Construction tabulates the kernels;
/// every query afterwards is read-only.
#[derive(Debug, Clone)]
pub struct Analyzer {
    params: SystemParams,
    assoc: AssociationModel,
    opts: AnalysisOptions,
    links: Vec<LinkModel>,
    q_inv: f64,
}

fn desired_mixture(params: &SystemParams, class: NodeClass) -> Result<GlMixture, EvalError> {
    let gh = hermite_rule(params.gh_nodes).map_err(EvalError::Invalid)?;
    Ok(GlMixture::new(&CompositeGLParams::for_class(params, class), &gh))
}

fn tx_array(params: &SystemParams, class: NodeClass) -> (ArrayGeometry, f64) {
    match class {
        NodeClass::Gnb => (params.gnb_tx, params.power_m),
        _ => (params.iab_tx, params.power_s),
    }
}

/// `P N_T N_R^2 / (K N^power)`.
fn coupling(params: &SystemParams, tx: NodeClass, rx: RxRole, stream_power: i32) -> f64 {
    let (arr, p) = tx_array(params, tx);
    let nr = rx.array(params).n_total() as f64;
    p * arr.n_total() as f64 * nr * nr / (params.subcarriers * (arr.subarrays as f64).powi(stream_power))
}

fn build_kernel(params: &SystemParams, opts: &AnalysisOptions, tx: NodeClass, rx: RxRole) -> Result<Kernel, EvalError> {
    let mix = desired_mixture(params, tx)?;
    let (arr, _) = tx_array(params, tx);
    let mut gains = gain_distribution(&arr, &rx.array(params), arr.subarrays);
    if opts.interference_gain_scale != 1.0 {
        gains = gains.scaled(opts.interference_gain_scale);
    }
    let exact = MixtureKernel::new(&mix, &gains);
    Ok(match opts.kernel {
        KernelMode::Exact => Kernel::Exact(exact),
        KernelMode::Tabulated => Kernel::Table(KernelTable::build(&exact, params.max_nakagami() as usize - 1)),
    })
}

fn iab_density(params: &SystemParams, class: NodeClass) -> Density {
    match class {
        NodeClass::IabLos => Density::Los { lambda: params.lambda_s, eps: params.blockage_eps },
        _ => Density::Nlos { lambda: params.lambda_s, eps: params.blockage_eps },
    }
}

impl Analyzer {
    pub fn new(params: &SystemParams) -> Result<Self, EvalError> {
        Self::with_options(params, AnalysisOptions::default())
    }

    pub fn with_options(params: &SystemParams, opts: AnalysisOptions) -> Result<Self, EvalError> {
        let assoc = AssociationModel::new(params)?;
        let mut cache: HashMap<KernelKey, Arc<Kernel>> = HashMap::new();
        let mut kernel = |tx: NodeClass, rx: RxRole| -> Result<Arc<Kernel>, EvalError> {
            if let Some(k) = cache.get(&(tx, rx)) {
                return Ok(k.clone());
            }
            let k = Arc::new(build_kernel(params, &opts, tx, rx)?);
            cache.insert((tx, rx), k.clone());
            Ok(k)
        };
        let d = *assoc.deltas();
        let alpha = |c| params.alpha(c);
        let mut links = Vec::with_capacity(4);
        for link in Link::ALL {
            let tx = link.transmitter();
            let rx = link.receiver();
            let a_serv = alpha(tx);
            let cross = params.cross_tier();
            let mut sources = Vec::new();
            let palm = Region::Palm { parent_density: params.parent_density(), xi: params.hard_core };
            let iab_source = |c: NodeClass, scale: f64, exponent: f64, k: Arc<Kernel>| Source {
                name: if c == NodeClass::IabLos { "los_iab" } else { "nlos_iab" },
                kernel: k,
                coupling: coupling(params, c, rx, 1),
                alpha: alpha(c),
                region: Region::Radial { density: iab_density(params, c), scale, exponent },
            };
            let gnb_source = |region: Region, k: Arc<Kernel>| Source {
                name: "gnb",
                kernel: k,
                coupling: coupling(params, NodeClass::Gnb, rx, 1),
                alpha: alpha(NodeClass::Gnb),
                region,
            };
            match link {
                Link::GnbAccess => {
                    sources.push(gnb_source(palm, kernel(NodeClass::Gnb, rx)?));
                    if cross {
                        for (k, c) in [NodeClass::IabLos, NodeClass::IabNlos].into_iter().enumerate() {
                            sources.push(iab_source(c, d.from_gnb[k], a_serv / alpha(c), kernel(c, rx)?));
                        }
                    }
                }
                Link::IabLosAccess | Link::IabNlosAccess => {
                    let (k, other) = if link == Link::IabLosAccess { (0, NodeClass::IabNlos) } else { (1, NodeClass::IabLos) };
                    sources.push(iab_source(tx, 1.0, 1.0, kernel(tx, rx)?));
                    sources.push(iab_source(other, d.cross[k], a_serv / alpha(other), kernel(other, rx)?));
                    if cross {
                        let region = Region::Radial {
                            density: Density::Constant(params.lambda_m),
                            scale: d.to_gnb[k],
                            exponent: a_serv / alpha(NodeClass::Gnb),
                        };
                        sources.push(gnb_source(region, kernel(NodeClass::Gnb, rx)?));
                    }
                }
                Link::Backhaul => {
                    sources.push(gnb_source(palm, kernel(NodeClass::Gnb, rx)?));
                    if cross {
                        for c in [NodeClass::IabLos, NodeClass::IabNlos] {
                            sources.push(iab_source(c, 0.0, 1.0, kernel(c, rx)?));
                        }
                    }
                }
            }
            let (arr, _) = tx_array(params, tx);
            let serving = match link {
                Link::Backhaul => Serving::Contact(ContactLaw::for_class(params, NodeClass::Gnb)),
                _ => Serving::Associated(tx),
            };
            links.push(LinkModel {
                link,
                desired: desired_mixture(params, tx)?,
                desired_coupling: coupling(params, tx, rx, 2),
                zf_prob: zf_penalty_prob(arr.n_total(), arr.subarrays),
                alpha: a_serv,
                sources,
                noise: params.noise_power() * rx.array(params).n_total() as f64,
                rsi: if link == Link::Backhaul { params.rsi_power() } else { 0.0 },
                serving,
            });
        }
        let q = params.quantization_factor();
        let q_inv = if q.is_finite() { 1.0 / q } else { 0.0 };
        Ok(Self { params: params.clone(), assoc, opts, links, q_inv })
    }

    pub fn params(&self) -> &SystemParams {
        &self.params
    }

    pub fn association(&self) -> AssociationResult {
        self.assoc.probabilities()
    }

    pub fn link(&self, link: Link) -> &LinkModel {
        &self.links[Link::ALL.iter().position(|&l| l == link).unwrap()]
    }

    pub fn threshold_factor(&self, link: Link, tau: f64) -> Result<SinrThresholdFactor, EvalError> {
        if !(tau >= 0.0) {
            return Err(EvalError::Invalid(format!("threshold must be nonnegative, got {tau}")));
        }
        if tau * self.q_inv >= 1.0 {
            return Err(EvalError::ThresholdUnreachable { tau, limit: 1.0 / self.q_inv });
        }
        let m = self.link(link);
        let base = tau / m.desired_coupling;
        let multiplier = (1.0 + self.q_inv) / (1.0 - tau * self.q_inv);
        let factor = base * multiplier;
        let per_node = m.desired.rates.iter().map(|a| factor * a).collect();
        Ok(SinrThresholdFactor { tau, base, multiplier, factor, per_node })
    }

    /// Noise plus residual self-interference, rescaled so that quantization of the
    /// self-interference is absorbed into the threshold factor.
    pub fn additive_constant(&self, link: Link) -> f64 {
        let m = self.link(link);
        m.noise + m.rsi * (1.0 + self.params.eta_dig * self.q_inv) / (1.0 + self.q_inv)
    }

    fn serving_pdf(&self, m: &LinkModel, r: f64) -> f64 {
        match &m.serving {
            Serving::Associated(c) => self.assoc.serving_distance_pdf(*c, r),
            Serving::Contact(law) => law.pdf(r),
        }
    }

    fn serving_points(&self, m: &LinkModel) -> Vec<f64> {
        let radius = self.params.radius;
        let mut interior = match &m.serving {
            Serving::Associated(c) => self.assoc.serving_breakpoints(*c),
            Serving::Contact(law) => law.breakpoints(),
        };
        let mut x = radius / 2.0;
        for _ in 0..10 {
            interior.push(x);
            x /= 2.0;
        }
        breakpoints(0.0, radius, &interior)
    }

    /// Probability mass of the serving distance inside the radius.
    fn serving_mass(&self, m: &LinkModel) -> Result<f64, EvalError> {
        let res = integrate_pieces(|r| self.serving_pdf(m, r), &self.serving_points(m), self.opts.outer);
        Ok(res.values[0])
    }

    fn associated_share(&self, link: Link) -> f64 {
        match link {
            Link::Backhaul => 1.0,
            _ => self.association().get(link.transmitter()),
        }
    }

    /// Conditional coverage integrand at serving distance `r`, before the ZF factor and pdf.
    fn coverage_kernel(&self, m: &LinkModel, g: &SinrThresholdFactor, nc: f64, r: f64) -> Result<f64, EvalError> {
        let width = m.desired.shape as usize;
        let ra = r.powf(m.alpha);
        let s: Vec<f64> = g.per_node.iter().map(|gt| gt * ra).collect();
        let mut e = vec![0.0; s.len() * width];
        for src in &m.sources {
            src.accumulate(r, &s, width, self.params.radius, self.opts.inner, &mut e)?;
        }
        let mut total = 0.0;
        for (t, (&st, w)) in s.iter().zip(&m.desired.weights).enumerate() {
            let coeffs = &mut e[t * width..(t + 1) * width];
            coeffs[0] -= st * nc;
            if width > 1 {
                coeffs[1] -= st * nc;
            }
            let d = Jet::from_coeffs(coeffs.to_vec()).exp();
            let sum: f64 = d.coeffs().iter().enumerate().map(|(n, c)| if n % 2 == 0 { *c } else { -c }).sum();
            total += w * sum;
        }
        Ok(total)
    }

    /// Probability that the link SINR exceeds `tau`, averaged over its serving distance.
    pub fn link_coverage(&self, link: Link, tau: f64) -> Result<f64, EvalError> {
        Ok(self.link_coverage_with_error(link, tau)?.0)
    }

    fn link_coverage_with_error(&self, link: Link, tau: f64) -> Result<(f64, f64), EvalError> {
        let g = self.threshold_factor(link, tau)?;
        let m = self.link(link);
        if self.associated_share(link) <= 0.0 {
            return Ok((0.0, 0.0));
        }
        if tau == 0.0 {
            return Ok((m.zf_prob * self.serving_mass(m)?, 0.0));
        }
        let nc = self.additive_constant(link);
        let failure = RefCell::new(None);
        let res = integrate_pieces(
            |r| {
                if failure.borrow().is_some() {
                    return 0.0;
                }
                let f = self.serving_pdf(m, r);
                if f == 0.0 {
                    return 0.0;
                }
                match self.coverage_kernel(m, &g, nc, r) {
                    Ok(v) => f * v,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            &self.serving_points(m),
            self.opts.outer,
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !res.converged {
            return Err(EvalError::Quadrature { what: format!("{link} coverage"), achieved: res.max_error() });
        }
        Ok((m.zf_prob * res.values[0], m.zf_prob * res.errors[0]))
    }

    pub fn sinr_coverage(&self, tau: f64) -> Result<CoverageResult, EvalError> {
        let mut links = LinkBreakdown::default();
        let mut error = 0.0;
        for link in Link::ALL {
            let (v, e) = self.link_coverage_with_error(link, tau)?;
            links.set(link, v);
            error += e;
        }
        let a = self.association();
        let value = a.gnb * links.gnb_access + (a.iab_los * links.iab_los_access + a.iab_nlos * links.iab_nlos_access) * links.backhaul;
        Ok(CoverageResult { value, links, association: a, error })
    }

    /// Fixed-rate throughput `W log2(1 + tau) P(tau)`.
    pub fn capacity_with_outage(&self, tau: f64) -> Result<CapacityResult, EvalError> {
        let cov = self.sinr_coverage(tau)?;
        let rate = self.params.effective_bandwidth() * (1.0 + tau).log2();
        Ok(CapacityResult { value: rate * cov.value, links: cov.links, association: cov.association, error: rate * cov.error })
    }

    /// Ergodic rate `E[W log2(1 + SINR)]` of one link (bit/s).
    pub fn link_ergodic_rate(&self, link: Link) -> Result<f64, EvalError> {
        Ok(self.link_ergodic_with_error(link)?.0)
    }

    /// `E[ln(1 + SINR) | r]` by the identity
    /// `E ln(1 + X/(1+Y)) = ∫ e^{-z}/z (E e^{-zY} - E e^{-z(X+Y)}) dz`, with
    /// `X = G/D`, `Y = (I(1+1/Q) + G/Q)/D` and `D` the quantization-scaled additive constant.
    fn ergodic_kernel(&self, m: &LinkModel, grids: &ErgodicGrids, r: f64) -> Result<f64, EvalError> {
        let q1 = 1.0 + self.q_inv;
        let dd = m.noise * q1 + m.rsi * (1.0 + self.params.eta_dig * self.q_inv);
        let path = m.desired_coupling / r.powf(m.alpha);
        let mean_fading: f64 = m.desired.rates.iter().zip(&m.desired.weights).map(|(a, w)| w * m.desired.shape as f64 / a).sum();
        let mean_x = path * mean_fading / dd;
        let ln_lo = (1e-12 / mean_x.max(1e-300)).ln().min(-8.0);
        let panels = (-ln_lo / ERGODIC_PANEL).ceil() as usize;
        let h = -ln_lo / panels as f64;
        let mut z = Vec::with_capacity(panels * grids.legendre.nodes.len() + grids.laguerre.nodes.len());
        let mut wz = Vec::with_capacity(z.capacity());
        for p in 0..panels {
            let a = ln_lo + p as f64 * h;
            for (v, w) in grids.legendre.mapped(a, a + h) {
                let zv = v.exp();
                // dz/z = dv
                z.push(zv);
                wz.push(w * (-zv).exp());
            }
        }
        let e1 = (-1.0f64).exp();
        for (&u, &w) in grids.laguerre.nodes.iter().zip(&grids.laguerre.weights) {
            // the bracketed integrand is bounded by one
            if w < 1e-30 {
                continue;
            }
            z.push(1.0 + u);
            wz.push(e1 * w / (1.0 + u));
        }
        let s_i: Vec<f64> = z.iter().map(|zv| zv * q1 / dd).collect();
        let mut e = vec![0.0; z.len()];
        let inner =
            QuadOptions { abs_tol: self.opts.inner.abs_tol.max(1e-7), rel_tol: self.opts.inner.rel_tol.max(1e-6), ..self.opts.inner };
        for src in &m.sources {
            src.accumulate(r, &s_i, 1, self.params.radius, inner, &mut e)?;
        }
        let mut total = 0.0;
        for k in 0..z.len() {
            let lo = laplace_complement(&m.desired, z[k] * self.q_inv / dd * path);
            let hi = laplace_complement(&m.desired, z[k] * q1 / dd * path);
            total += wz[k] * e[k].exp() * (hi - lo);
        }
        Ok(total)
    }

    fn link_ergodic_with_error(&self, link: Link) -> Result<(f64, f64), EvalError> {
        let m = self.link(link);
        if self.associated_share(link) <= 0.0 {
            return Ok((0.0, 0.0));
        }
        let grids = ErgodicGrids::new();
        let failure = RefCell::new(None);
        let res = integrate_pieces(
            |r| {
                if failure.borrow().is_some() {
                    return 0.0;
                }
                let f = self.serving_pdf(m, r);
                if f == 0.0 {
                    return 0.0;
                }
                match self.ergodic_kernel(m, &grids, r) {
                    Ok(v) => f * v,
                    Err(e) => {
                        *failure.borrow_mut() = Some(e);
                        0.0
                    }
                }
            },
            &self.serving_points(m),
            QuadOptions { abs_tol: 1e-5, rel_tol: 1e-5, ..self.opts.outer },
        );
        if let Some(e) = failure.into_inner() {
            return Err(e);
        }
        if !res.converged {
            return Err(EvalError::Quadrature { what: format!("{link} ergodic rate"), achieved: res.max_error() });
        }
        let scale = m.zf_prob * self.params.effective_bandwidth() / LN_2;
        Ok((scale * res.values[0], scale * res.errors[0]))
    }

    /// Association-weighted ergodic capacity; IAB paths are limited by the backhaul mean rate.
    pub fn ergodic_capacity(&self) -> Result<CapacityResult, EvalError> {
        let mut links = LinkBreakdown::default();
        let mut error = 0.0;
        for link in Link::ALL {
            let (v, e) = self.link_ergodic_with_error(link)?;
            links.set(link, v);
            error += e;
        }
        let a = self.association();
        let value = a.gnb * links.gnb_access
            + a.iab_los * links.iab_los_access.min(links.backhaul)
            + a.iab_nlos * links.iab_nlos_access.min(links.backhaul);
        Ok(CapacityResult { value, links, association: a, error })
    }
}

/// Width in `ln z` of one Gauss-Legendre panel of the ergodic inner integral.
const ERGODIC_PANEL: f64 = 2.0;

struct ErgodicGrids {
    legendre: GaussLegendre,
    laguerre: GaussLaguerre,
}

impl ErgodicGrids {
    fn new() -> Self {
        Self { legendre: GaussLegendre::new(6), laguerre: GaussLaguerre::new(64) }
    }
}

/// `1 - L(s)` without cancellation for small `s`.
fn laplace_complement(mix: &GlMixture, s: f64) -> f64 {
    if s <= 0.0 {
        return 0.0;
    }
    let m = mix.shape as f64;
    mix.rates.iter().zip(&mix.weights).map(|(a, w)| -w * (-m * (s / a).ln_1p()).exp_m1()).sum()
}

/// Laplace transform of a single interference source at one argument, exact kernel.
fn single_source_laplace(params: &SystemParams, src: Source, r: f64, s: f64) -> Result<f64, EvalError> {
    if s == 0.0 {
        return Ok(1.0);
    }
    let mut e = [0.0];
    src.accumulate(r, &[s], 1, params.radius, QuadOptions::new(1e-12, 1e-10), &mut e)?;
    Ok(e[0].exp())
}

fn exact_kernel(params: &SystemParams, tx: NodeClass, rx: RxRole) -> Result<Arc<Kernel>, EvalError> {
    let opts = AnalysisOptions { kernel: KernelMode::Exact, ..AnalysisOptions::default() };
    Ok(Arc::new(build_kernel(params, &opts, tx, rx)?))
}

/// `E[exp(-s I)]` for LoS or NLoS IAB interferers between `lower_bound` and the radius.
pub fn laplace_iab_interference(s: f64, lower_bound: f64, los: bool, rx: RxRole, params: &SystemParams) -> Result<f64, EvalError> {
    let c = if los { NodeClass::IabLos } else { NodeClass::IabNlos };
    let src = Source {
        name: "iab",
        kernel: exact_kernel(params, c, rx)?,
        coupling: coupling(params, c, rx, 1),
        alpha: params.alpha(c),
        region: Region::Radial { density: iab_density(params, c), scale: lower_bound, exponent: 0.0 },
    };
    single_source_laplace(params, src, 1.0, s)
}

/// `E[exp(-s I)]` for gNB interferers modelled as a Poisson field beyond `lower_bound`.
pub fn laplace_gnb_interference_access(s: f64, lower_bound: f64, rx: RxRole, params: &SystemParams) -> Result<f64, EvalError> {
    let src = Source {
        name: "gnb",
        kernel: exact_kernel(params, NodeClass::Gnb, rx)?,
        coupling: coupling(params, NodeClass::Gnb, rx, 1),
        alpha: params.alpha(NodeClass::Gnb),
        region: Region::Radial { density: Density::Constant(params.lambda_m), scale: lower_bound, exponent: 0.0 },
    };
    single_source_laplace(params, src, 1.0, s)
}

/// `E[exp(-s I)]` at an IAB receiver for gNB interferers seen from the serving gNB at
/// `serving_distance`, with the hard-core pair-retention weight.
pub fn laplace_gnb_interference_backhaul(s: f64, serving_distance: f64, params: &SystemParams) -> Result<f64, EvalError> {
    let src = Source {
        name: "gnb",
        kernel: exact_kernel(params, NodeClass::Gnb, RxRole::Iab)?,
        coupling: coupling(params, NodeClass::Gnb, RxRole::Iab, 1),
        alpha: params.alpha(NodeClass::Gnb),
        region: Region::Palm { parent_density: params.parent_density(), xi: params.hard_core },
    };
    single_source_laplace(params, src, serving_distance, s)
}

pub fn threshold_factor(tau: f64, link: Link, params: &SystemParams) -> Result<SinrThresholdFactor, EvalError> {
    Analyzer::new(params)?.threshold_factor(link, tau)
}

pub fn link_coverage(link: Link, tau: f64, params: &SystemParams) -> Result<f64, EvalError> {
    Analyzer::new(params)?.link_coverage(link, tau)
}

pub fn sinr_coverage(tau: f64, params: &SystemParams) -> Result<CoverageResult, EvalError> {
    Analyzer::new(params)?.sinr_coverage(tau)
}

pub fn capacity_with_outage(tau_min: f64, params: &SystemParams) -> Result<CapacityResult, EvalError> {
    Analyzer::new(params)?.capacity_with_outage(tau_min)
}

pub fn ergodic_capacity(params: &SystemParams) -> Result<CapacityResult, EvalError> {
    Analyzer::new(params)?.ergodic_capacity()
}

#[cfg(test)]
mod tests;
