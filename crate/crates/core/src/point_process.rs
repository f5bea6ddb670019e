//! Poisson and Matérn type-II hard-core point processes on a disk.

use std::collections::HashMap;
use std::f64::consts::PI;

use rand::Rng;
use rand_distr::{Distribution, Poisson};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PatternKind {
    Ppp,
    Mhcpp2,
}

/// Finite point set inside a disk centered at the origin.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    pub points: Vec<[f64; 2]>,
    /// Per-point marks; empty when the process carries none.
    pub marks: Vec<f64>,
    pub kind: PatternKind,
    pub region_radius: f64,
}

impl PointPattern {
    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    /// Smallest pairwise distance (infinite for fewer than two points).
    pub fn min_pair_distance(&self) -> f64 {
        let mut best = f64::INFINITY;
        for (i, p) in self.points.iter().enumerate() {
            for q in &self.points[i + 1..] {
                best = best.min(((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt());
            }
        }
        best
    }
}

/// Matérn type-II specification by its parent density and hard-core distance.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MhcppSpec {
    pub parent_density: f64,
    pub xi: f64,
}

impl MhcppSpec {
    pub fn new(parent_density: f64, xi: f64) -> Self {
        assert!(parent_density > 0.0 && xi >= 0.0);
        Self { parent_density, xi }
    }

    /// Spec whose retained density equals `lambda_m`.
    pub fn for_target(lambda_m: f64, xi: f64) -> Result<Self, String> {
        Ok(Self::new(parent_density_for_target(lambda_m, xi)?, xi))
    }

    pub fn retention(&self) -> f64 {
        retention_probability(self.xi, self.parent_density)
    }

    pub fn density(&self) -> f64 {
        self.retention() * self.parent_density
    }
}

fn uniform_in_disk<R: Rng + ?Sized>(radius: f64, rng: &mut R) -> [f64; 2] {
    let r = radius * rng.random::<f64>().sqrt();
    let th = 2.0 * PI * rng.random::<f64>();
    [r * th.cos(), r * th.sin()]
}

fn poisson_count<R: Rng + ?Sized>(mean: f64, rng: &mut R) -> usize {
    if mean <= 0.0 {
        return 0;
    }
    Poisson::new(mean).expect("finite positive mean").sample(rng) as usize
}

/// Homogeneous Poisson process on the disk of radius `region_radius`.
pub fn sample_ppp<R: Rng + ?Sized>(density: f64, region_radius: f64, rng: &mut R) -> PointPattern {
    let n = poisson_count(density * PI * region_radius * region_radius, rng);
    let points = (0..n).map(|_| uniform_in_disk(region_radius, rng)).collect();
    PointPattern { points, marks: Vec::new(), kind: PatternKind::Ppp, region_radius }
}

/// Probability that a parent survives type-II thinning.
pub fn retention_probability(xi: f64, parent_density: f64) -> f64 {
    let x = PI * xi * xi * parent_density;
    if x < 1e-8 {
        // series of (1 - e^{-x}) / x
        1.0 - x / 2.0 + x * x / 6.0
    } else {
        -(-x).exp_m1() / x
    }
}

/// Parent density whose retained density is exactly `lambda_m`.
pub fn parent_density_for_target(lambda_m: f64, xi: f64) -> Result<f64, String> {
    if !(lambda_m > 0.0) {
        return Err(format!("target density {lambda_m} must be positive"));
    }
    if xi == 0.0 {
        return Ok(lambda_m);
    }
    let area = PI * xi * xi;
    let bound = 1.0 / area;
    if lambda_m >= bound {
        return Err(format!("hard-core density infeasible: {lambda_m:e} >= 1/(pi xi^2) = {bound:e}"));
    }
    // retained density rho(x) x / area is increasing in x = area * parent density
    let f = |x: f64| -(-x).exp_m1() - area * lambda_m;
    let mut lo = 0.0;
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if hi > 1e3 {
            return Err("parent density search diverged".into());
        }
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-13 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) / area)
}

/// Type-II thinning of a marked parent set: a parent survives unless a neighbor
/// within `xi` has a smaller mark (ties broken by index).
pub fn thin_type_ii(parents: &[[f64; 2]], marks: &[f64], xi: f64) -> Vec<bool> {
    let n = parents.len();
    if xi <= 0.0 {
        return vec![true; n];
    }
    let cell = |p: &[f64; 2]| ((p[0] / xi).floor() as i64, (p[1] / xi).floor() as i64);
    let mut grid: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
    for (i, p) in parents.iter().enumerate() {
        grid.entry(cell(p)).or_default().push(i);
    }
    let xi2 = xi * xi;
    let mut keep = vec![true; n];
    for (i, p) in parents.iter().enumerate() {
        let (cx, cy) = cell(p);
        'search: for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(list) = grid.get(&(cx + dx, cy + dy)) {
                    for &j in list {
                        if j == i {
                            continue;
                        }
                        let q = &parents[j];
                        let d2 = (p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2);
                        if d2 < xi2 && (marks[j], j) < (marks[i], i) {
                            keep[i] = false;
                            break 'search;
                        }
                    }
                }
            }
        }
    }
    keep
}

/// Matérn type-II sample on the disk. Parents are drawn on a disk enlarged by `xi`
/// so points near the boundary see their full neighborhoods.
pub fn sample_mhcpp2<R: Rng + ?Sized>(spec: &MhcppSpec, region_radius: f64, rng: &mut R) -> PointPattern {
    let outer = region_radius + spec.xi;
    let n = poisson_count(spec.parent_density * PI * outer * outer, rng);
    let parents: Vec<[f64; 2]> = (0..n).map(|_| uniform_in_disk(outer, rng)).collect();
    let marks: Vec<f64> = (0..n).map(|_| rng.random::<f64>()).collect();
    let keep = thin_type_ii(&parents, &marks, spec.xi);
    let r2 = region_radius * region_radius;
    let mut points = Vec::new();
    let mut kept_marks = Vec::new();
    for i in 0..n {
        let p = parents[i];
        if keep[i] && p[0] * p[0] + p[1] * p[1] <= r2 {
            points.push(p);
            kept_marks.push(marks[i]);
        }
    }
    PointPattern { points, marks: kept_marks, kind: PatternKind::Mhcpp2, region_radius }
}

/// Retention probability of a parent at distance `r0` given a retained point at the origin.
pub fn palm_thinning_probability(r0: f64, xi: f64, parent_density: f64) -> f64 {
    if xi == 0.0 {
        return 1.0;
    }
    if r0 < xi {
        return 0.0;
    }
    let rho = retention_probability(xi, parent_density);
    if r0 >= 2.0 * xi {
        return rho;
    }
    let lam = parent_density;
    let a = PI * xi * xi;
    // area of the union of two hard-core disks at separation r0
    let kappa = 2.0 * a - 2.0 * xi * xi * (r0 / (2.0 * xi)).acos() + r0 * (xi * xi - r0 * r0 / 4.0).sqrt();
    let union_excess = kappa - a;
    let inner = a * lam * (-(-lam * kappa).exp_m1()) / (lam * kappa * (-(-a * lam).exp_m1()));
    2.0 / (lam * union_excess) * (1.0 - inner)
}
