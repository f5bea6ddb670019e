//! Scalar beamforming laws: sidelobe gains, the zero-forcing penalty and the
//! discrete interference-gain distribution over quantized virtual angles.

use rand::Rng;

/// Half-power constant used by the sidelobe model.
const SIDELOBE_ANGLE: f64 = 0.244;

/// Uniform planar array, optionally split into subarrays (transmit side only).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ArrayGeometry {
    pub nx: usize,
    pub ny: usize,
    pub subarrays: usize,
}

impl ArrayGeometry {
    pub fn new(nx: usize, ny: usize, subarrays: usize) -> Result<Self, String> {
        if nx == 0 || ny == 0 {
            return Err(format!("array {nx}x{ny} must have at least one element per axis"));
        }
        if subarrays == 0 || (nx * ny) % subarrays != 0 {
            return Err(format!("{subarrays} subarrays do not divide {} antennas", nx * ny));
        }
        Ok(Self { nx, ny, subarrays })
    }

    /// Receive-only array (a single RF chain).
    pub fn receiver(nx: usize, ny: usize) -> Self {
        Self::new(nx, ny, 1).expect("valid receive array")
    }

    pub fn n_total(&self) -> usize {
        self.nx * self.ny
    }

    /// Probabilities that an independent beam hits (mainlobe, both angles off, one angle off).
    fn case_probabilities(&self) -> [f64; 3] {
        let n = self.n_total() as f64;
        let (nx, ny) = (self.nx as f64, self.ny as f64);
        let main = 1.0 / n;
        let both = 1.0 - 1.0 / nx - 1.0 / ny + 1.0 / n;
        let one = 1.0 / nx + 1.0 / ny - 2.0 / n;
        [main, both, one]
    }

    /// Power gains for the three cases, in the same order as `case_probabilities`.
    fn case_gains(&self) -> [f64; 3] {
        let (g, g_hat) = sidelobe_gains(self);
        [1.0, g * g, g_hat * g_hat]
    }
}

/// Amplitude sidelobe levels `(g, g_hat)` for misalignment in both / one virtual angle.
pub fn sidelobe_gains(geom: &ArrayGeometry) -> (f64, f64) {
    let s = SIDELOBE_ANGLE.sin();
    let g = 1.0 / (s * s * (geom.nx * geom.ny) as f64);
    let g_hat = 1.0 / (s * geom.nx as f64);
    (g, g_hat)
}

/// Probability that zero-forcing leaves the desired stream at full gain.
pub fn zf_penalty_prob(n_total: usize, subarrays: usize) -> f64 {
    assert!(subarrays >= 1);
    (1.0 - 1.0 / n_total as f64).powi(subarrays as i32 - 1)
}

/// Discrete law of the interference beamforming gain, atoms sorted by gain.
#[derive(Debug, Clone, PartialEq)]
pub struct GainDistribution {
    atoms: Vec<(f64, f64)>,
}

impl GainDistribution {
    /// Builds a law from `(gain, probability)` pairs, merging equal gains.
    pub fn from_atoms(mut raw: Vec<(f64, f64)>) -> Self {
        raw.retain(|&(_, c)| c > 0.0);
        raw.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
        let mut atoms: Vec<(f64, f64)> = Vec::with_capacity(raw.len());
        for (b, c) in raw {
            match atoms.last_mut() {
                Some(last) if (last.0 - b).abs() <= 1e-12 * b.abs().max(last.0.abs()) => last.1 += c,
                _ => atoms.push((b, c)),
            }
        }
        Self { atoms }
    }

    /// Point mass at `gain`.
    pub fn degenerate(gain: f64) -> Self {
        Self { atoms: vec![(gain, 1.0)] }
    }

    pub fn atoms(&self) -> &[(f64, f64)] {
        &self.atoms
    }

    pub fn mean(&self) -> f64 {
        self.atoms.iter().map(|(b, c)| b * c).sum()
    }

    pub fn total_probability(&self) -> f64 {
        self.atoms.iter().map(|(_, c)| c).sum()
    }

    /// Same probabilities, every gain multiplied by `k`.
    pub fn scaled(&self, k: f64) -> Self {
        Self { atoms: self.atoms.iter().map(|&(b, c)| (b * k, c)).collect() }
    }
}

/// Interference gain law: each of the `n_streams` transmit beams independently lands in
/// one of three alignment cases, and the receive beam does the same once.
pub fn gain_distribution(tx: &ArrayGeometry, rx: &ArrayGeometry, n_streams: usize) -> GainDistribution {
    let tx_p = tx.case_probabilities();
    let tx_g = tx.case_gains();
    // distribution of the summed transmit factor over the streams
    let mut tx_atoms: Vec<(f64, f64)> = vec![(0.0, 1.0)];
    for _ in 0..n_streams {
        let mut next = Vec::with_capacity(tx_atoms.len() * 3);
        for &(b, c) in &tx_atoms {
            for k in 0..3 {
                next.push((b + tx_g[k], c * tx_p[k]));
            }
        }
        tx_atoms = GainDistribution::from_atoms(next).atoms;
    }
    let rx_p = rx.case_probabilities();
    let rx_g = rx.case_gains();
    let mut raw = Vec::with_capacity(tx_atoms.len() * 3);
    for k in 0..3 {
        for &(b, c) in &tx_atoms {
            raw.push((rx_g[k] * b, rx_p[k] * c));
        }
    }
    GainDistribution::from_atoms(raw)
}

/// Draws from the discrete law.
pub fn sample_gain<R: Rng + ?Sized>(dist: &GainDistribution, rng: &mut R) -> f64 {
    let u: f64 = rng.random();
    let mut acc = 0.0;
    for &(b, c) in &dist.atoms {
        acc += c;
        if u < acc {
            return b;
        }
    }
    dist.atoms.last().map(|a| a.0).unwrap_or(0.0)
}

/// Alignment case of two uniformly drawn quantized beams: 0 mainlobe, 1 both angles differ, 2 one differs.
fn angle_case<R: Rng + ?Sized>(geom: &ArrayGeometry, rng: &mut R) -> usize {
    let az = (rng.random_range(0..geom.nx), rng.random_range(0..geom.nx));
    let el = (rng.random_range(0..geom.ny), rng.random_range(0..geom.ny));
    match (az.0 == az.1, el.0 == el.1) {
        (true, true) => 0,
        (false, false) => 1,
        _ => 2,
    }
}

/// Ground-truth gain sampler: draws interferer and victim virtual angles per stream and at the receiver.
pub fn angle_sampled_gain<R: Rng + ?Sized>(tx: &ArrayGeometry, rx: &ArrayGeometry, n_streams: usize, rng: &mut R) -> f64 {
    let tx_g = tx.case_gains();
    let rx_g = rx.case_gains();
    let tx_sum: f64 = (0..n_streams).map(|_| tx_g[angle_case(tx, rng)]).sum();
    rx_g[angle_case(rx, rng)] * tx_sum
}
