//! Interference sources and the Taylor coefficients of their Laplace exponents.

use std::f64::consts::PI;
use std::sync::Arc;

use super::kernel::Kernel;
use crate::numeric::quad::{breakpoints, integrate_vec_pieces};
use crate::numeric::QuadOptions;
use crate::point_process::palm_thinning_probability;
use crate::EvalError;

/// Intensity of a radial interferer field around the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Density {
    Constant(f64),
    /// `lambda e^{-eps x}`
    Los {
        lambda: f64,
        eps: f64,
    },
    /// `lambda (1 - e^{-eps x})`
    Nlos {
        lambda: f64,
        eps: f64,
    },
}

impl Density {
    pub fn at(&self, x: f64) -> f64 {
        match *self {
            Density::Constant(l) => l,
            Density::Los { lambda, eps } => lambda * (-eps * x).exp(),
            Density::Nlos { lambda, eps } => -lambda * (-eps * x).exp_m1(),
        }
    }

    pub fn is_zero(&self) -> bool {
        match *self {
            Density::Constant(l) => l == 0.0,
            Density::Los { lambda, .. } | Density::Nlos { lambda, .. } => lambda == 0.0,
        }
    }
}

/// Where interferers live relative to the receiver.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Region {
    /// Field around the receiver from `scale * r^exponent` (zero when `scale == 0`) out to the radius.
    Radial { density: Density, scale: f64, exponent: f64 },
    /// Other gNBs seen from the serving gNB at distance `r`, with second-order hard-core thinning.
    Palm { parent_density: f64, xi: f64 },
}

/// Angular nodes of the periodic trapezoid rule in the Palm integral.
pub const PALM_ANGLES: usize = 128;

/// One interfering tier as seen by a receiver.
#[derive(Debug, Clone)]
pub struct Source {
    pub name: &'static str,
    pub kernel: Arc<Kernel>,
    /// Interference power per unit gain, fading and path loss: `P N_T N_R^2 / (K N)`.
    pub coupling: f64,
    pub alpha: f64,
    pub region: Region,
}

impl Source {
    /// Lower integration limit for a serving distance `r`, clamped to `radius`.
    pub fn lower_bound(&self, r: f64, radius: f64) -> f64 {
        match self.region {
            Region::Radial { scale, exponent, .. } => {
                if scale == 0.0 {
                    0.0
                } else {
                    (scale * r.powf(exponent)).min(radius)
                }
            }
            Region::Palm { xi, .. } => xi.min(radius),
        }
    }

    /// Adds `e_n(s_k)` to `out[k * width + n]` for `n < width`, where `e_n` is the
    /// normalized `n`-th Taylor coefficient of `ln E[exp(-s I)]` in the scaled
    /// increment `s_k u` of the Laplace argument.
    pub fn accumulate(&self, r: f64, s: &[f64], width: usize, radius: f64, opts: QuadOptions, out: &mut [f64]) -> Result<(), EvalError> {
        let dim = s.len() * width;
        debug_assert!(out.len() >= dim);
        if s.iter().all(|&v| v == 0.0) {
            return Ok(());
        }
        let lb = self.lower_bound(r, radius);
        if lb >= radius {
            return Ok(());
        }
        let mut k_buf = vec![0.0; width];
        let ln_s: Vec<f64> = s.iter().map(|v| v.ln()).collect();
        let res = match self.region {
            Region::Radial { density, .. } => {
                if density.is_zero() {
                    return Ok(());
                }
                let pts = breakpoints(lb, radius, &geometric_edges(lb, radius));
                integrate_vec_pieces(
                    |x, v| {
                        let base = -2.0 * PI * density.at(x) * x;
                        let ln_path = self.coupling.ln() - self.alpha * x.ln();
                        let path = ln_path.exp();
                        for (k, &sk) in s.iter().enumerate() {
                            self.kernel.eval_with_log(sk * path, ln_s[k] + ln_path, &mut k_buf);
                            for n in 0..width {
                                v[k * width + n] = base * k_buf[n];
                            }
                        }
                    },
                    &pts,
                    dim,
                    opts,
                )
            }
            Region::Palm { parent_density, xi } => {
                let mut interior = geometric_edges(lb, radius);
                interior.extend([2.0 * xi, r]);
                let pts = breakpoints(lb, radius, &interior);
                let cos: Vec<f64> = (0..=PALM_ANGLES / 2).map(|j| (2.0 * PI * j as f64 / PALM_ANGLES as f64).cos()).collect();
                let dtheta = 2.0 * PI / PALM_ANGLES as f64;
                integrate_vec_pieces(
                    |r0, v| {
                        v[..dim].fill(0.0);
                        let base = -parent_density * palm_thinning_probability(r0, xi, parent_density) * r0 * dtheta;
                        if base == 0.0 {
                            return;
                        }
                        for (j, &c) in cos.iter().enumerate() {
                            // the integrand is even in the angle
                            let mult = if j == 0 || j == PALM_ANGLES / 2 { 1.0 } else { 2.0 };
                            let d2 = (r * r + r0 * r0 - 2.0 * r * r0 * c).max(0.0);
                            let ln_path = if d2 == 0.0 { f64::INFINITY } else { self.coupling.ln() - 0.5 * self.alpha * d2.ln() };
                            let path = ln_path.exp();
                            for (k, &sk) in s.iter().enumerate() {
                                let y = if sk == 0.0 { 0.0 } else { sk * path };
                                self.kernel.eval_with_log(y, ln_s[k] + ln_path, &mut k_buf);
                                for n in 0..width {
                                    v[k * width + n] += mult * base * k_buf[n];
                                }
                            }
                        }
                    },
                    &pts,
                    dim,
                    opts,
                )
            }
        };
        if !res.converged {
            return Err(EvalError::Quadrature { what: format!("{} interference exponent", self.name), achieved: res.max_error() });
        }
        for (o, v) in out.iter_mut().zip(&res.values) {
            *o += v;
        }
        Ok(())
    }
}

/// Panel edges at powers of four between `lo` and `hi` (from `hi / 4^12` when `lo` is zero).
fn geometric_edges(lo: f64, hi: f64) -> Vec<f64> {
    let mut edges = Vec::new();
    if lo > 0.0 {
        let mut x = lo * 4.0;
        while x < hi {
            edges.push(x);
            x *= 4.0;
        }
    } else {
        let mut x = hi / 4.0;
        for _ in 0..12 {
            edges.push(x);
            x /= 4.0;
        }
    }
    edges
}
