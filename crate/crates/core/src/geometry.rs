//! Blockage, contact-distance laws, association probabilities and serving-distance densities.

use std::f64::consts::PI;

use crate::config::{NodeClass, SystemParams};
use crate::numeric::quad::{breakpoints, integrate_pieces, QuadOptions};
use crate::EvalError;

/// Probability that a link of length `r` is line of sight.
pub fn p_los(r: f64, eps: f64) -> f64 {
    (-eps * r).exp()
}

/// `∫_0^r 2 pi x lambda_s p_los(x) dx`, the mean number of LoS IAB-nodes within `r`.
pub fn los_measure(r: f64, lambda_s: f64, eps: f64) -> f64 {
    let x = eps * r;
    if x < 1e-4 {
        // series of 1 - e^{-x}(1+x) = x^2/2 - x^3/3 + x^4/8
        return 2.0 * PI * lambda_s * r * r * (0.5 - x / 3.0 + x * x / 8.0);
    }
    // 1 - e^{-x}(1+x) computed without cancellation for moderate x
    let tail = -(-x).exp_m1() - x * (-x).exp();
    2.0 * PI * lambda_s * tail / (eps * eps)
}

/// Mean number of NLoS IAB-nodes within `r`.
pub fn nlos_measure(r: f64, lambda_s: f64, eps: f64) -> f64 {
    (PI * lambda_s * r * r - los_measure(r, lambda_s, eps)).max(0.0)
}

/// Shape exponent of the hard-core contact law beyond `xi / 2`.
pub fn mhcpp_shape_exponent(lambda_m: f64, xi: f64) -> f64 {
    let c = lambda_m * PI * xi * xi;
    0.3686 * c * c + 0.0985 * c + 2.0
}

/// Contact-distance law from a typical point to the nearest point of a process.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum ContactLaw {
    /// LoS-thinned PPP; defective (mass `1 - e^{-2 pi lambda_s / eps^2}`).
    PppLos { lambda_s: f64, eps: f64 },
    /// NLoS-thinned PPP.
    PppNlos { lambda_s: f64, eps: f64 },
    /// Hard-core process, piecewise approximation split at `xi / 2`.
    Mhcpp { lambda_m: f64, xi: f64 },
}

impl ContactLaw {
    /// Law of the nearest transmitter of `class` seen from a UE.
    pub fn for_class(params: &SystemParams, class: NodeClass) -> Self {
        match class {
            NodeClass::Gnb => ContactLaw::Mhcpp { lambda_m: params.lambda_m, xi: params.hard_core },
            NodeClass::IabLos => ContactLaw::PppLos { lambda_s: params.lambda_s, eps: params.blockage_eps },
            NodeClass::IabNlos => ContactLaw::PppNlos { lambda_s: params.lambda_s, eps: params.blockage_eps },
        }
    }

    /// `-ln(1 - F(r))`.
    fn hazard(&self, r: f64) -> f64 {
        match *self {
            ContactLaw::PppLos { lambda_s, eps } => los_measure(r, lambda_s, eps),
            ContactLaw::PppNlos { lambda_s, eps } => nlos_measure(r, lambda_s, eps),
            ContactLaw::Mhcpp { lambda_m, xi } => {
                if xi == 0.0 {
                    return PI * lambda_m * r * r;
                }
                let c = PI * lambda_m * xi * xi;
                if r <= xi / 2.0 {
                    return -(-PI * lambda_m * r * r).ln_1p();
                }
                let rho = mhcpp_shape_exponent(lambda_m, xi);
                let expo = 2.0 * c * (1.0 - (2.0 * r / xi).powf(rho)) / (rho * (4.0 - c));
                -((4.0 - c) / 4.0).ln() - expo
            }
        }
    }

    pub fn survival(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 1.0;
        }
        (-self.hazard(r)).exp()
    }

    pub fn cdf(&self, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        -(-self.hazard(r)).exp_m1()
    }

    pub fn pdf(&self, r: f64) -> f64 {
        if r < 0.0 {
            return 0.0;
        }
        match *self {
            ContactLaw::PppLos { lambda_s, eps } => 2.0 * PI * lambda_s * r * p_los(r, eps) * self.survival(r),
            ContactLaw::PppNlos { lambda_s, eps } => 2.0 * PI * lambda_s * r * (-(-eps * r).exp_m1()) * self.survival(r),
            ContactLaw::Mhcpp { lambda_m, xi } => {
                if xi == 0.0 {
                    return 2.0 * PI * lambda_m * r * self.survival(r);
                }
                if r <= xi / 2.0 {
                    return 2.0 * PI * lambda_m * r;
                }
                let c = PI * lambda_m * xi * xi;
                let rho = mhcpp_shape_exponent(lambda_m, xi);
                let expo = 2.0 * c * (1.0 - (2.0 * r / xi).powf(rho)) / (rho * (4.0 - c));
                2.0 * PI * lambda_m * r * (2.0 * r / xi).powf(rho - 2.0) * expo.exp()
            }
        }
    }

    /// Points where the law changes analytic form.
    pub fn breakpoints(&self) -> Vec<f64> {
        match *self {
            ContactLaw::Mhcpp { xi, .. } if xi > 0.0 => vec![xi / 2.0],
            _ => Vec::new(),
        }
    }
}

/// `(cdf, pdf)` of the LoS or NLoS IAB contact distance.
pub fn contact_cdf_ppp(r: f64, lambda_s: f64, eps: f64, los: bool) -> (f64, f64) {
    let law = if los { ContactLaw::PppLos { lambda_s, eps } } else { ContactLaw::PppNlos { lambda_s, eps } };
    (law.cdf(r), law.pdf(r))
}

/// `(cdf, pdf)` of the hard-core gNB contact distance.
pub fn contact_cdf_mhcpp(r: f64, lambda_m: f64, xi: f64) -> (f64, f64) {
    let law = ContactLaw::Mhcpp { lambda_m, xi };
    (law.cdf(r), law.pdf(r))
}

/// Distance-scaling constants of the association boundaries.
///
/// A UE at distance `r` from its nearest `i`-class IAB-node prefers it over the nearest gNB
/// iff the gNB is farther than `r^{alpha_i / alpha_m} * to_gnb[i]`, and over the nearest
/// `j`-class IAB-node iff that one is farther than `r^{alpha_i / alpha_j} * cross[i]`.
/// A UE at distance `r` from its nearest gNB prefers it iff the nearest `i` IAB-node is
/// farther than `r^{alpha_m / alpha_i} * from_gnb[i]`. Index 0 is LoS, 1 NLoS.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DeltaConstants {
    pub to_gnb: [f64; 2],
    pub cross: [f64; 2],
    pub from_gnb: [f64; 2],
}

/// Transmit-side constant of the mean desired power: `P N_T / N^2`.
fn desired_scale(power: f64, n_total: usize, subarrays: usize) -> f64 {
    power * n_total as f64 / (subarrays * subarrays) as f64
}

pub fn delta_constants(params: &SystemParams) -> DeltaConstants {
    let gnb = desired_scale(params.power_m, params.gnb_tx.n_total(), params.gnb_tx.subarrays);
    // the gNB bias is the reference (T_m = 1)
    let iab = desired_scale(params.power_s, params.iab_tx.n_total(), params.iab_tx.subarrays) * params.bias_ratio;
    let var = |c: NodeClass| params.sigma_hat(c).powi(2);
    let a_m = params.alpha(NodeClass::Gnb);
    let iabs = [NodeClass::IabLos, NodeClass::IabNlos];
    let mut d = DeltaConstants { to_gnb: [0.0; 2], cross: [0.0; 2], from_gnb: [0.0; 2] };
    for (k, &ci) in iabs.iter().enumerate() {
        let cj = iabs[1 - k];
        let a_i = params.alpha(ci);
        let a_j = params.alpha(cj);
        d.to_gnb[k] = (gnb / iab).powf(1.0 / a_m) * ((var(NodeClass::Gnb) - var(ci)) / (2.0 * a_m)).exp();
        d.cross[k] = ((var(cj) - var(ci)) / (2.0 * a_j)).exp();
        d.from_gnb[k] = (iab / gnb).powf(1.0 / a_i) * ((var(ci) - var(NodeClass::Gnb)) / (2.0 * a_i)).exp();
    }
    d
}

/// Association probabilities of the typical UE.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AssociationResult {
    pub gnb: f64,
    pub iab_los: f64,
    pub iab_nlos: f64,
}

impl AssociationResult {
    pub fn total(&self) -> f64 {
        self.gnb + self.iab_los + self.iab_nlos
    }

    pub fn get(&self, class: NodeClass) -> f64 {
        match class {
            NodeClass::Gnb => self.gnb,
            NodeClass::IabLos => self.iab_los,
            NodeClass::IabNlos => self.iab_nlos,
        }
    }

    pub fn iab(&self) -> f64 {
        self.iab_los + self.iab_nlos
    }
}

/// Association model: contact laws, boundary constants and the resulting
/// association probabilities and serving-distance densities.
#[derive(Debug, Clone)]
pub struct AssociationModel {
    laws: [ContactLaw; 3],
    alpha: [f64; 3],
    deltas: DeltaConstants,
    probabilities: AssociationResult,
}

fn class_index(c: NodeClass) -> usize {
    match c {
        NodeClass::Gnb => 0,
        NodeClass::IabLos => 1,
        NodeClass::IabNlos => 2,
    }
}

const TAIL_LEVEL: f64 = 1e-12;

impl AssociationModel {
    pub fn new(params: &SystemParams) -> Result<Self, EvalError> {
        let laws = NodeClass::ALL.map(|c| ContactLaw::for_class(params, c));
        let alpha = NodeClass::ALL.map(|c| params.alpha(c));
        let deltas = delta_constants(params);
        let mut model = Self { laws, alpha, deltas, probabilities: AssociationResult { gnb: 0.0, iab_los: 0.0, iab_nlos: 0.0 } };
        let mut probs = [0.0; 3];
        for c in NodeClass::ALL {
            probs[class_index(c)] = model.integrate_unnormalized(c)?;
        }
        model.probabilities = AssociationResult { gnb: probs[0], iab_los: probs[1], iab_nlos: probs[2] };
        Ok(model)
    }

    pub fn deltas(&self) -> &DeltaConstants {
        &self.deltas
    }

    pub fn probabilities(&self) -> AssociationResult {
        self.probabilities
    }

    pub fn contact_law(&self, class: NodeClass) -> &ContactLaw {
        &self.laws[class_index(class)]
    }

    /// Probability that no competitor beats a `class` transmitter at distance `r`.
    pub fn win_probability(&self, class: NodeClass, r: f64) -> f64 {
        let [law_m, law_l, law_n] = &self.laws;
        let [a_m, a_l, a_n] = self.alpha;
        let d = &self.deltas;
        match class {
            NodeClass::Gnb => law_l.survival(r.powf(a_m / a_l) * d.from_gnb[0]) * law_n.survival(r.powf(a_m / a_n) * d.from_gnb[1]),
            NodeClass::IabLos => law_m.survival(r.powf(a_l / a_m) * d.to_gnb[0]) * law_n.survival(r.powf(a_l / a_n) * d.cross[0]),
            NodeClass::IabNlos => law_m.survival(r.powf(a_n / a_m) * d.to_gnb[1]) * law_l.survival(r.powf(a_n / a_l) * d.cross[1]),
        }
    }

    /// Joint density of "nearest `class` transmitter at `r`" and "it is the serving one".
    pub fn unnormalized_pdf(&self, class: NodeClass, r: f64) -> f64 {
        if r <= 0.0 {
            return 0.0;
        }
        self.laws[class_index(class)].pdf(r) * self.win_probability(class, r)
    }

    /// Serving-distance density conditioned on association with `class`.
    pub fn serving_distance_pdf(&self, class: NodeClass, r: f64) -> f64 {
        let a = self.probabilities.get(class);
        if a <= 0.0 {
            return 0.0;
        }
        self.unnormalized_pdf(class, r) / a
    }

    /// Distances at which the serving density changes analytic form.
    pub fn serving_breakpoints(&self, class: NodeClass) -> Vec<f64> {
        let a_m = self.alpha[0];
        match self.laws[0] {
            ContactLaw::Mhcpp { xi, .. } if xi > 0.0 => match class {
                NodeClass::Gnb => vec![xi / 2.0],
                NodeClass::IabLos => vec![(xi / (2.0 * self.deltas.to_gnb[0])).powf(a_m / self.alpha[1])],
                NodeClass::IabNlos => vec![(xi / (2.0 * self.deltas.to_gnb[1])).powf(a_m / self.alpha[2])],
            },
            _ => Vec::new(),
        }
    }

    /// Distance beyond which the unnormalized density's envelope is below `1e-12`.
    fn tail_cutoff(&self, class: NodeClass) -> f64 {
        let own = &self.laws[class_index(class)];
        let envelope = |r: f64| {
            let mut e = own.survival(r) * self.win_probability(class, r);
            if let ContactLaw::PppLos { eps, .. } = own {
                e *= p_los(r, *eps);
            }
            e
        };
        let mut r = 1.0;
        while envelope(r) > TAIL_LEVEL && r < 1e9 {
            r *= 1.5;
        }
        r
    }

    fn integrate_unnormalized(&self, class: NodeClass) -> Result<f64, EvalError> {
        if let ContactLaw::PppLos { lambda_s, .. } | ContactLaw::PppNlos { lambda_s, .. } = self.laws[class_index(class)] {
            if lambda_s == 0.0 {
                return Ok(0.0);
            }
        }
        let upper = self.tail_cutoff(class);
        let mut interior = self.serving_breakpoints(class);
        // geometric panel edges help the adaptive rule across the wide range
        let mut x = 1.0;
        while x < upper {
            interior.push(x);
            x *= 4.0;
        }
        let pts = breakpoints(0.0, upper, &interior);
        let res = integrate_pieces(|r| self.unnormalized_pdf(class, r), &pts, QuadOptions::new(1e-13, 1e-10));
        if !res.converged {
            return Err(EvalError::Quadrature { what: format!("association probability of {class:?}"), achieved: res.max_error() });
        }
        Ok(res.values[0])
    }
}

pub fn association_probabilities(params: &SystemParams) -> Result<AssociationResult, EvalError> {
    Ok(AssociationModel::new(params)?.probabilities())
}

/// Density of the serving distance for a UE associated with `class`.
pub fn serving_distance_pdf(class: NodeClass, r: f64, params: &SystemParams) -> Result<f64, EvalError> {
    Ok(AssociationModel::new(params)?.serving_distance_pdf(class, r))
}
