//! Composite Gamma-Lognormal fading: Gauss-Hermite mixture approximations of the
//! CDF and Laplace transform, their derivatives, and an exact sampler.

use rand::Rng;
use rand_distr::{Distribution, Gamma, StandardNormal};

use crate::config::{NodeClass, SystemParams};
use crate::numeric::special::{binomial, gamma_p};
use crate::numeric::Jet;

/// Gauss-Hermite rule for the weight `e^{-x^2}`, nodes ascending.
#[derive(Debug, Clone, PartialEq)]
pub struct GaussHermite {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

/// Largest supported rule size.
pub const MAX_HERMITE_NODES: usize = 64;

/// Builds the `t`-point Gauss-Hermite rule by Newton iteration on orthonormal Hermite polynomials.
pub fn hermite_rule(t: usize) -> Result<GaussHermite, String> {
    if t == 0 || t > MAX_HERMITE_NODES {
        return Err(format!("Gauss-Hermite rule size {t} outside 1..={MAX_HERMITE_NODES}"));
    }
    let n = t;
    let nf = n as f64;
    let pim4 = std::f64::consts::PI.powf(-0.25);
    let m = n.div_ceil(2);
    let mut x = vec![0.0; n];
    let mut w = vec![0.0; n];
    let mut z = 0.0f64;
    for i in 0..m {
        z = match i {
            0 => (2.0 * nf + 1.0).sqrt() - 1.85575 * (2.0 * nf + 1.0).powf(-1.0 / 6.0),
            1 => z - 1.14 * nf.powf(0.426) / z,
            2 => 1.86 * z - 0.86 * x[0],
            3 => 1.91 * z - 0.91 * x[1],
            _ => 2.0 * z - x[i - 2],
        };
        let mut pp = 0.0;
        for _ in 0..200 {
            let mut p1 = pim4;
            let mut p2 = 0.0;
            for j in 0..n {
                let p3 = p2;
                p2 = p1;
                let jf = j as f64;
                p1 = z * (2.0 / (jf + 1.0)).sqrt() * p2 - (jf / (jf + 1.0)).sqrt() * p3;
            }
            pp = (2.0 * nf).sqrt() * p2;
            let z1 = z;
            z = z1 - p1 / pp;
            if (z - z1).abs() <= 1e-15 * z.abs().max(1.0) {
                break;
            }
        }
        x[i] = z;
        x[n - 1 - i] = -z;
        w[i] = 2.0 / (pp * pp);
        w[n - 1 - i] = w[i];
    }
    if n % 2 == 1 {
        x[m - 1] = 0.0;
    }
    x.reverse();
    w.reverse();
    Ok(GaussHermite { nodes: x, weights: w })
}

/// Gamma(M, 1/M) times lognormal `e^{mu_hat + sigma_hat N}`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CompositeGLParams {
    pub shape: u32,
    pub mu_hat: f64,
    pub sigma_hat: f64,
}

impl CompositeGLParams {
    pub fn new(shape: u32, mu_hat: f64, sigma_hat: f64) -> Self {
        assert!(shape >= 1);
        Self { shape, mu_hat, sigma_hat }
    }

    /// Composite parameters of a transmitter class.
    pub fn for_class(params: &SystemParams, class: NodeClass) -> Self {
        Self::new(params.nakagami(class), params.mu_hat(), params.sigma_hat(class))
    }

    pub fn mean(&self) -> f64 {
        (self.mu_hat + 0.5 * self.sigma_hat * self.sigma_hat).exp()
    }
}

/// The Gauss-Hermite mixture form of a composite law: a weighted sum of Gamma(M) laws
/// with rates `M e^{-(sqrt(2) sigma nu_t + mu)}`. Weights are normalized by their sum.
#[derive(Debug, Clone, PartialEq)]
pub struct GlMixture {
    pub shape: u32,
    pub rates: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GlMixture {
    pub fn new(glp: &CompositeGLParams, gh: &GaussHermite) -> Self {
        let total: f64 = gh.weights.iter().sum();
        let m = glp.shape as f64;
        let rates = gh.nodes.iter().map(|&nu| m * (-(std::f64::consts::SQRT_2 * glp.sigma_hat * nu + glp.mu_hat)).exp()).collect();
        let weights = gh.weights.iter().map(|w| w / total).collect();
        Self { shape: glp.shape, rates, weights }
    }

    pub fn cdf(&self, z: f64) -> f64 {
        if z <= 0.0 {
            return 0.0;
        }
        let m = self.shape as f64;
        self.rates.iter().zip(&self.weights).map(|(a, w)| w * gamma_p(m, z * a)).sum()
    }

    pub fn laplace(&self, s: f64) -> f64 {
        if s == 0.0 {
            return 1.0;
        }
        let m = self.shape as i32;
        self.rates.iter().zip(&self.weights).map(|(a, w)| w * (a / (s + a)).powi(m)).sum()
    }

    /// Normalized Taylor coefficients `L^(k)(s0) / k!` for `k = 0..=order`.
    pub fn laplace_jet(&self, s0: f64, order: usize) -> Jet {
        let m = self.shape as usize;
        let mut c = vec![0.0; order + 1];
        for (a, w) in self.rates.iter().zip(&self.weights) {
            let v = a / (s0 + a);
            let base = w * v.powi(m as i32);
            let inv = 1.0 / (s0 + a);
            let mut pow = 1.0;
            for (k, ck) in c.iter_mut().enumerate() {
                let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
                *ck += sign * binomial(m + k - 1, k) * base * pow;
                pow *= inv;
            }
        }
        Jet::from_coeffs(c)
    }
}

pub fn gl_cdf(z: f64, glp: &CompositeGLParams, gh: &GaussHermite) -> f64 {
    GlMixture::new(glp, gh).cdf(z)
}

pub fn gl_laplace(s: f64, glp: &CompositeGLParams, gh: &GaussHermite) -> f64 {
    GlMixture::new(glp, gh).laplace(s)
}

pub fn gl_laplace_jet(s0: f64, order: usize, glp: &CompositeGLParams, gh: &GaussHermite) -> Jet {
    GlMixture::new(glp, gh).laplace_jet(s0, order)
}

/// Exact draw from the composite law.
pub fn sample_gl<R: Rng + ?Sized>(glp: &CompositeGLParams, rng: &mut R) -> f64 {
    let m = glp.shape as f64;
    let g = Gamma::new(m, 1.0 / m).expect("positive shape").sample(rng);
    let n: f64 = StandardNormal.sample(rng);
    g * (glp.mu_hat + glp.sigma_hat * n).exp()
}
