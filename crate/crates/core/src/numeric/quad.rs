//! Adaptive Gauss-Kronrod integration (vector-valued) and fixed Gauss-Laguerre rules.

// 7-point Gauss / 15-point Kronrod abscissae and weights on [-1, 1].
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_2,
    0.140_653_259_715_525_9,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_8,
];
const WG: [f64; 4] = [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

/// Tolerances for [`integrate`] and friends.
#[derive(Debug, Clone, Copy)]
pub struct QuadOptions {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for QuadOptions {
    fn default() -> Self {
        Self { abs_tol: 1e-12, rel_tol: 1e-9, max_intervals: 400 }
    }
}

impl QuadOptions {
    pub fn new(abs_tol: f64, rel_tol: f64) -> Self {
        Self { abs_tol, rel_tol, ..Self::default() }
    }
}

/// Outcome of a vector-valued adaptive integration.
#[derive(Debug, Clone)]
pub struct QuadResult {
    pub values: Vec<f64>,
    pub errors: Vec<f64>,
    pub evaluations: usize,
    pub converged: bool,
}

impl QuadResult {
    /// Largest error estimate across components.
    pub fn max_error(&self) -> f64 {
        self.errors.iter().cloned().fold(0.0, f64::max)
    }
}

struct Segment {
    a: f64,
    b: f64,
    value: Vec<f64>,
    error: Vec<f64>,
}

fn kronrod<F: FnMut(f64, &mut [f64])>(f: &mut F, a: f64, b: f64, dim: usize, buf: &mut [f64]) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let mut kron = vec![0.0; dim];
    let mut gauss = vec![0.0; dim];
    f(center, buf);
    for k in 0..dim {
        kron[k] = WGK[7] * buf[k];
        gauss[k] = WG[3] * buf[k];
    }
    for j in 0..7 {
        let dx = half * XGK[j];
        f(center - dx, buf);
        let lo: Vec<f64> = buf[..dim].to_vec();
        f(center + dx, buf);
        for k in 0..dim {
            let s = lo[k] + buf[k];
            kron[k] += WGK[j] * s;
            if j % 2 == 1 {
                gauss[k] += WG[j / 2] * s;
            }
        }
    }
    let mut value = vec![0.0; dim];
    let mut error = vec![0.0; dim];
    for k in 0..dim {
        value[k] = kron[k] * half;
        let e = ((kron[k] - gauss[k]) * half).abs();
        error[k] = e.max(f64::EPSILON * 50.0 * value[k].abs());
    }
    Segment { a, b, value, error }
}

/// Integrates a vector-valued function over `[points[0], points[last]]`, never letting a
/// panel straddle an interior breakpoint of `points`.
pub fn integrate_vec_pieces<F>(mut f: F, points: &[f64], dim: usize, opts: QuadOptions) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    assert!(points.len() >= 2, "need at least one interval");
    let mut buf = vec![0.0; dim];
    let mut segments: Vec<Segment> = Vec::new();
    for w in points.windows(2) {
        if w[1] > w[0] {
            segments.push(kronrod(&mut f, w[0], w[1], dim, &mut buf));
        }
    }
    let mut evaluations = 15 * segments.len();
    let totals = |segs: &[Segment]| {
        let mut v = vec![0.0; dim];
        let mut e = vec![0.0; dim];
        for s in segs {
            for k in 0..dim {
                v[k] += s.value[k];
                e[k] += s.error[k];
            }
        }
        (v, e)
    };
    loop {
        let (v, e) = totals(&segments);
        let tol: Vec<f64> = v.iter().map(|x| opts.abs_tol.max(opts.rel_tol * x.abs())).collect();
        let done = (0..dim).all(|k| e[k] <= tol[k]);
        if done || segments.is_empty() || segments.len() >= opts.max_intervals {
            return QuadResult { values: v, errors: e, evaluations, converged: done || segments.is_empty() };
        }
        let score = |s: &Segment| (0..dim).map(|k| s.error[k] / tol[k]).fold(0.0, f64::max);
        let (worst, _) =
            segments
                .iter()
                .enumerate()
                .map(|(i, s)| (i, score(s)))
                .fold((0, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
        let seg = segments.swap_remove(worst);
        let mid = 0.5 * (seg.a + seg.b);
        if mid <= seg.a || mid >= seg.b {
            // interval can no longer be split in floating point
            let (v, e) = totals(&segments);
            let mut values = v;
            let mut errors = e;
            for k in 0..dim {
                values[k] += seg.value[k];
                errors[k] += seg.error[k];
            }
            return QuadResult { values, errors, evaluations, converged: false };
        }
        segments.push(kronrod(&mut f, seg.a, mid, dim, &mut buf));
        segments.push(kronrod(&mut f, mid, seg.b, dim, &mut buf));
        evaluations += 30;
    }
}

/// Vector-valued integral over `[a, b]`.
pub fn integrate_vec<F>(f: F, a: f64, b: f64, dim: usize, opts: QuadOptions) -> QuadResult
where
    F: FnMut(f64, &mut [f64]),
{
    integrate_vec_pieces(f, &[a, b], dim, opts)
}

/// Scalar integral over `[a, b]`; returns the full result for error inspection.
pub fn integrate<F: FnMut(f64) -> f64>(mut f: F, a: f64, b: f64, opts: QuadOptions) -> QuadResult {
    integrate_vec_pieces(|x, out| out[0] = f(x), &[a, b], 1, opts)
}

/// Scalar integral with interior breakpoints.
pub fn integrate_pieces<F: FnMut(f64) -> f64>(mut f: F, points: &[f64], opts: QuadOptions) -> QuadResult {
    integrate_vec_pieces(|x, out| out[0] = f(x), points, 1, opts)
}

/// Builds a sorted, deduplicated breakpoint list clipped to `[a, b]`.
pub fn breakpoints(a: f64, b: f64, interior: &[f64]) -> Vec<f64> {
    let mut pts = vec![a, b];
    pts.extend(interior.iter().copied().filter(|x| x.is_finite() && *x > a && *x < b));
    pts.sort_by(|x, y| x.partial_cmp(y).unwrap());
    pts.dedup_by(|x, y| (*x - *y).abs() <= 1e-12 * y.abs().max(1.0));
    pts
}

/// Gauss-Laguerre rule for `∫_0^∞ f(x) e^{-x} dx`.
#[derive(Debug, Clone)]
pub struct GaussLaguerre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLaguerre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        let mut z: f64 = 0.0;
        for i in 0..n {
            z = match i {
                0 => 3.0 / (1.0 + 2.4 * nf),
                1 => z + 15.0 / (1.0 + 2.5 * nf),
                _ => {
                    let ai = (i - 1) as f64;
                    z + (1.0 + 2.55 * ai) / (1.9 * ai) * (z - nodes[i - 2])
                }
            };
            let mut p2 = 0.0;
            let mut pp = 1.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                p2 = 0.0;
                for j in 1..=n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf - 1.0 - z) * p2 - (jf - 1.0) * p3) / jf;
                }
                pp = (nf * p1 - nf * p2) / z;
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 * z.abs() {
                    break;
                }
            }
            nodes[i] = z;
            weights[i] = -1.0 / (pp * nf * p2);
        }
        Self { nodes, weights }
    }

    pub fn integrate<F: FnMut(f64) -> f64>(&self, mut f: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&x, &w)| w * f(x)).sum()
    }
}

/// Gauss-Legendre rule on `[-1, 1]`.
#[derive(Debug, Clone)]
pub struct GaussLegendre {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

impl GaussLegendre {
    pub fn new(n: usize) -> Self {
        assert!(n >= 1);
        let nf = n as f64;
        let mut nodes = vec![0.0; n];
        let mut weights = vec![0.0; n];
        for i in 0..n.div_ceil(2) {
            let mut z = (std::f64::consts::PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
            let mut pp = 1.0;
            for _ in 0..100 {
                let mut p1 = 1.0;
                let mut p2 = 0.0;
                for j in 0..n {
                    let p3 = p2;
                    p2 = p1;
                    let jf = j as f64;
                    p1 = ((2.0 * jf + 1.0) * z * p2 - jf * p3) / (jf + 1.0);
                }
                pp = nf * (z * p1 - p2) / (z * z - 1.0);
                let z1 = z;
                z = z1 - p1 / pp;
                if (z - z1).abs() <= 1e-15 {
                    break;
                }
            }
            nodes[i] = -z;
            nodes[n - 1 - i] = z;
            weights[i] = 2.0 / ((1.0 - z * z) * pp * pp);
            weights[n - 1 - i] = weights[i];
        }
        Self { nodes, weights }
    }

    /// Nodes and weights mapped to `[a, b]`.
    pub fn mapped(&self, a: f64, b: f64) -> impl Iterator<Item = (f64, f64)> + '_ {
        let (c, h) = (0.5 * (a + b), 0.5 * (b - a));
        self.nodes.iter().zip(&self.weights).map(move |(&x, &w)| (c + h * x, h * w))
    }
}
