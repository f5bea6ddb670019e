//! Interference kernels: for a transmitter class with composite fading and a discrete
//! beamforming-gain law, `J_n(y)` is the `n`-th normalized Taylor coefficient of
//! `1 - E[exp(-y b h)]` in the scaled argument, summed over the gain atoms.

use crate::beamforming::GainDistribution;
use crate::numeric::special::binomial;
use crate::stochastics::GlMixture;

/// Exact evaluation by summation over gain atoms and mixture components.
#[derive(Debug, Clone)]
pub struct MixtureKernel {
    shape: u32,
    rates: Vec<f64>,
    weights: Vec<f64>,
    gains: Vec<(f64, f64)>,
    limit: f64,
}

impl MixtureKernel {
    pub fn new(mix: &GlMixture, gains: &GainDistribution) -> Self {
        let gains: Vec<(f64, f64)> = gains.atoms().iter().copied().filter(|&(b, c)| b > 0.0 && c > 0.0).collect();
        let limit = gains.iter().map(|g| g.1).sum();
        Self { shape: mix.shape, rates: mix.rates.clone(), weights: mix.weights.clone(), gains, limit }
    }

    /// `J_0(inf)`: probability that the interferer has nonzero gain.
    pub fn limit(&self) -> f64 {
        self.limit
    }

    pub fn is_zero(&self) -> bool {
        self.gains.is_empty()
    }

    /// Writes `J_0(y), ..., J_{out.len()-1}(y)`.
    pub fn eval(&self, y: f64, out: &mut [f64]) {
        out.fill(0.0);
        if y <= 0.0 || self.gains.is_empty() {
            return;
        }
        if y.is_infinite() {
            out[0] = self.limit;
            return;
        }
        let m = self.shape as f64;
        let mi = self.shape as usize;
        for &(b, c) in &self.gains {
            let yb = y * b;
            for (a, w) in self.rates.iter().zip(&self.weights) {
                let x = yb / a;
                let ln_v = -x.ln_1p();
                let cw = c * w;
                out[0] += -cw * (m * ln_v).exp_m1();
                if out.len() > 1 {
                    let vm = (m * ln_v).exp();
                    let one_minus_v = x / (1.0 + x);
                    let mut pow = 1.0;
                    for (n, o) in out.iter_mut().enumerate().skip(1) {
                        pow *= one_minus_v;
                        let sign = if n % 2 == 0 { -1.0 } else { 1.0 };
                        *o += sign * binomial(mi + n - 1, n) * cw * vm * pow;
                    }
                }
            }
        }
    }

    fn rate_range(&self) -> (f64, f64) {
        let lo = self.rates.iter().cloned().fold(f64::INFINITY, f64::min);
        let hi = self.rates.iter().cloned().fold(0.0, f64::max);
        (lo, hi)
    }

    fn gain_range(&self) -> (f64, f64) {
        let lo = self.gains.iter().map(|g| g.0).fold(f64::INFINITY, f64::min);
        let hi = self.gains.iter().map(|g| g.0).fold(0.0, f64::max);
        (lo, hi)
    }
}

/// Node spacing in `ln y`.
const TABLE_STEP: f64 = 1.0 / 32.0;
/// Margin, as a factor on the argument scale, beyond which the asymptotic forms are used.
const TABLE_MARGIN: f64 = 1e10;

/// Cubic Hermite interpolation of the kernel in `ln y`, exact slopes from
/// `y J_n' = n J_n + (n+1) J_{n+1}`, and power-law asymptotics outside the grid.
#[derive(Debug, Clone)]
pub struct KernelTable {
    width: usize,
    shape: i32,
    ln_lo: f64,
    y_lo: f64,
    y_hi: f64,
    nodes: usize,
    values: Vec<f64>,
    slopes: Vec<f64>,
    limit: f64,
    zero: bool,
}

impl KernelTable {
    /// Tabulates orders `0..=order`.
    pub fn build(kernel: &MixtureKernel, order: usize) -> Self {
        let width = order + 1;
        if kernel.is_zero() {
            return Self {
                width,
                shape: kernel.shape as i32,
                ln_lo: 0.0,
                y_lo: 1.0,
                y_hi: 1.0,
                nodes: 0,
                values: Vec::new(),
                slopes: Vec::new(),
                limit: 0.0,
                zero: true,
            };
        }
        let (a_lo, a_hi) = kernel.rate_range();
        let (b_lo, b_hi) = kernel.gain_range();
        let ln_lo = (a_lo / b_hi / TABLE_MARGIN).ln();
        let ln_hi = (a_hi / b_lo * TABLE_MARGIN).ln();
        let nodes = ((ln_hi - ln_lo) / TABLE_STEP).ceil() as usize + 1;
        let mut values = vec![0.0; nodes * width];
        let mut slopes = vec![0.0; nodes * width];
        let mut buf = vec![0.0; width + 1];
        for i in 0..nodes {
            let y = (ln_lo + i as f64 * TABLE_STEP).exp();
            kernel.eval(y, &mut buf);
            for n in 0..width {
                values[i * width + n] = buf[n];
                slopes[i * width + n] = n as f64 * buf[n] + (n + 1) as f64 * buf[n + 1];
            }
        }
        let y_lo = ln_lo.exp();
        let y_hi = (ln_lo + (nodes - 1) as f64 * TABLE_STEP).exp();
        Self { width, shape: kernel.shape as i32, ln_lo, y_lo, y_hi, nodes, values, slopes, limit: kernel.limit(), zero: false }
    }

    pub fn order(&self) -> usize {
        self.width - 1
    }

    /// Writes `J_0..J_{k}` for `k = out.len() - 1 <= order`.
    pub fn eval(&self, y: f64, out: &mut [f64]) {
        self.eval_with_log(y, y.ln(), out)
    }

    /// As [`eval`](Self::eval) with `ln y` supplied by the caller.
    pub fn eval_with_log(&self, y: f64, ln_y: f64, out: &mut [f64]) {
        let k = out.len();
        debug_assert!(k <= self.width);
        if self.zero || y <= 0.0 {
            out.fill(0.0);
            return;
        }
        let w = self.width;
        if y <= self.y_lo {
            let t = y / self.y_lo;
            let mut p = t;
            for n in 0..k {
                out[n] = self.values[n] * p;
                if n >= 1 {
                    p *= t;
                }
            }
            return;
        }
        if y >= self.y_hi {
            let last = (self.nodes - 1) * w;
            if y.is_infinite() {
                out.fill(0.0);
                out[0] = self.limit;
                return;
            }
            let decay = (self.y_hi / y).powi(self.shape);
            out[0] = self.limit - (self.limit - self.values[last]) * decay;
            for n in 1..k {
                out[n] = self.values[last + n] * decay;
            }
            return;
        }
        let u = (ln_y - self.ln_lo) / TABLE_STEP;
        let i = (u.floor() as usize).min(self.nodes - 2);
        let t = u - i as f64;
        let t2 = t * t;
        let s = 1.0 - t;
        let h00 = (1.0 + 2.0 * t) * s * s;
        let h10 = t * s * s * TABLE_STEP;
        let h01 = t2 * (3.0 - 2.0 * t);
        let h11 = -t2 * s * TABLE_STEP;
        let (p, q) = (i * w, (i + 1) * w);
        for n in 0..k {
            out[n] = h00 * self.values[p + n] + h10 * self.slopes[p + n] + h01 * self.values[q + n] + h11 * self.slopes[q + n];
        }
    }
}

/// Either evaluation strategy behind one interface.
#[derive(Debug, Clone)]
pub enum Kernel {
    Exact(MixtureKernel),
    Table(KernelTable),
}

impl Kernel {
    pub fn eval(&self, y: f64, out: &mut [f64]) {
        match self {
            Kernel::Exact(k) => k.eval(y, out),
            Kernel::Table(t) => t.eval(y, out),
        }
    }

    /// `ln_y` must equal `y.ln()`; tables use it to skip the logarithm.
    pub fn eval_with_log(&self, y: f64, ln_y: f64, out: &mut [f64]) {
        match self {
            Kernel::Exact(k) => k.eval(y, out),
            Kernel::Table(t) => t.eval_with_log(y, ln_y, out),
        }
    }
}
