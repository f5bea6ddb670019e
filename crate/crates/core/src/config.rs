//! System parameters: parsing, unit conversion, validation and derived constants.
//!
//! Everything downstream of [`SystemParams`] works in watts, meters and linear gains.
//! Decibel quantities only exist in [`RawParams`] and in reports.

use std::fmt;
use std::path::Path;

use thiserror::Error;

use crate::beamforming::ArrayGeometry;
use crate::numeric::{db_to_linear, dbm_to_watts};

/// Speed of light (m/s).
pub const SPEED_OF_LIGHT: f64 = 299_792_458.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("hard-core density infeasible: lambda_m = {lambda_m:e} must be below 1/(pi xi^2) = {bound:e}")]
    HardCoreInfeasible { lambda_m: f64, bound: f64 },
    #[error("Nakagami shape {key} = {value} must be an integer >= 1")]
    NonIntegerNakagami { key: String, value: f64 },
    #[error("RSI factor eta = {0:e} must lie in (0, 1)")]
    EtaOutOfRange(f64),
    #[error("invalid parameter {key}: {reason}")]
    Invalid { key: String, reason: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("line {line}: {reason}")]
    Syntax { line: usize, reason: String },
    #[error("cannot read {path}: {reason}")]
    Io { path: String, reason: String },
}

fn invalid(key: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid { key: key.to_string(), reason: reason.into() }
}

/// Duplexing mode of the IAB tier.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Duplex {
    /// In-band full duplex: full bandwidth, RSI at the backhaul receiver, both tiers interfere.
    Ibfd,
    /// Frequency-division half duplex: each tier on W/2, no cross-tier interference, no RSI.
    Hd,
}

impl fmt::Display for Duplex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Duplex::Ibfd => "ibfd",
            Duplex::Hd => "hd",
        })
    }
}

/// Transmitter class: which (alpha, zeta, M) bundle a link reads.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum NodeClass {
    Gnb,
    IabLos,
    IabNlos,
}

impl NodeClass {
    pub const ALL: [NodeClass; 3] = [NodeClass::Gnb, NodeClass::IabLos, NodeClass::IabNlos];

    fn index(self) -> usize {
        match self {
            NodeClass::Gnb => 0,
            NodeClass::IabLos => 1,
            NodeClass::IabNlos => 2,
        }
    }
}

/// Per-class propagation bundle.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkClass {
    pub class: NodeClass,
    /// Path-loss exponent.
    pub alpha: f64,
    /// Shadowing standard deviation in dB.
    pub zeta_db: f64,
    /// Nakagami shape.
    pub nakagami: u32,
}

/// Parameters as written in a config file (dB / dBm where the table uses them).
///
/// `Default` yields the reference deployment.
#[derive(Debug, Clone, PartialEq)]
pub struct RawParams {
    pub subcarriers: f64,
    pub bandwidth_hz: f64,
    pub carrier_hz: f64,
    pub nakagami: [f64; 3],
    pub noise_figure_db: f64,
    pub blockage_eps: f64,
    pub radius: f64,
    pub hard_core: f64,
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub eta_db: Option<f64>,
    pub eta: Option<f64>,
    pub eta_dig_db: f64,
    pub gh_nodes: f64,
    pub p_m_dbm: f64,
    pub p_s_dbm: f64,
    pub bias_ratio_db: f64,
    pub subarrays_m: f64,
    pub subarrays_s: f64,
    pub gnb_tx: (usize, usize),
    pub iab_tx: (usize, usize),
    pub iab_rx: (usize, usize),
    pub ue_rx: (usize, usize),
    pub alpha: [f64; 3],
    pub zeta_db: [f64; 3],
    pub q_adc: f64,
    pub duplex: Duplex,
}

impl Default for RawParams {
    fn default() -> Self {
        Self {
            subcarriers: 512.0,
            bandwidth_hz: 800e6,
            carrier_hz: 38e9,
            nakagami: [4.0, 3.0, 2.0],
            noise_figure_db: 10.0,
            blockage_eps: 0.0071,
            radius: 1000.0,
            hard_core: 100.0,
            lambda_m: 1e-5,
            lambda_s: 4e-5,
            lambda_u: 2e-4,
            eta_db: Some(-80.0),
            eta: None,
            eta_dig_db: 25.0,
            gh_nodes: 5.0,
            p_m_dbm: 40.0,
            p_s_dbm: 33.0,
            bias_ratio_db: 0.0,
            subarrays_m: 8.0,
            subarrays_s: 4.0,
            gnb_tx: (32, 32),
            iab_tx: (16, 16),
            iab_rx: (16, 16),
            ue_rx: (8, 8),
            alpha: [1.9, 2.0, 3.3],
            zeta_db: [3.7, 4.3, 10.7],
            q_adc: 8.0,
            duplex: Duplex::Ibfd,
        }
    }
}

fn parse_f64(key: &str, value: &str) -> Result<f64, ConfigError> {
    let v = value.trim();
    match v.to_ascii_lowercase().as_str() {
        "inf" | "infinity" => return Ok(f64::INFINITY),
        _ => {}
    }
    v.parse::<f64>().map_err(|_| invalid(key, format!("`{v}` is not a number")))
}

fn parse_array(key: &str, value: &str) -> Result<(usize, usize), ConfigError> {
    let v = value.trim().to_ascii_lowercase();
    let parts: Vec<&str> = v.split(['x', '*']).map(str::trim).collect();
    let parse = |s: &str| s.parse::<usize>().map_err(|_| invalid(key, format!("`{value}` is not an NxM array size")));
    match parts.as_slice() {
        [n] => {
            let n = parse(n)?;
            Ok((n, 1))
        }
        [a, b] => Ok((parse(a)?, parse(b)?)),
        _ => Err(invalid(key, format!("`{value}` is not an NxM array size"))),
    }
}

impl RawParams {
    /// Sets one key from its textual value. Keys follow the parameter table notation.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        let f = || parse_f64(key, value);
        match key {
            "K" => self.subcarriers = f()?,
            "W" => self.bandwidth_hz = f()?,
            "f_c" => self.carrier_hz = f()?,
            "M_m" => self.nakagami[0] = f()?,
            "M_sL" => self.nakagami[1] = f()?,
            "M_sN" => self.nakagami[2] = f()?,
            "noise_figure_db" => self.noise_figure_db = f()?,
            "eps_block" | "epsilon" => self.blockage_eps = f()?,
            "R0" => self.radius = f()?,
            "xi" => self.hard_core = f()?,
            "lambda_m" => self.lambda_m = f()?,
            "lambda_s" => self.lambda_s = f()?,
            "lambda_u" => self.lambda_u = f()?,
            "density_ratio" => self.lambda_s = f()? * self.lambda_m,
            "eta_db" => {
                self.eta_db = Some(f()?);
                self.eta = None;
            }
            "eta" => {
                self.eta = Some(f()?);
                self.eta_db = None;
            }
            "eta_dig_db" => self.eta_dig_db = f()?,
            "eta_dig" => self.eta_dig_db = 10.0 * f()?.log10(),
            "T_gh" | "T" => self.gh_nodes = f()?,
            "P_m_dbm" => self.p_m_dbm = f()?,
            "P_s_dbm" => self.p_s_dbm = f()?,
            "P_m" => self.p_m_dbm = 10.0 * f()?.log10() + 30.0,
            "P_s" => self.p_s_dbm = 10.0 * f()?.log10() + 30.0,
            "bias_ratio_db" => self.bias_ratio_db = f()?,
            "bias_ratio" => self.bias_ratio_db = 10.0 * f()?.log10(),
            "N_m" => self.subarrays_m = f()?,
            "N_s" => self.subarrays_s = f()?,
            "gnb_tx" => self.gnb_tx = parse_array(key, value)?,
            "iab_tx" => self.iab_tx = parse_array(key, value)?,
            "iab_rx" => self.iab_rx = parse_array(key, value)?,
            "ue_rx" => self.ue_rx = parse_array(key, value)?,
            "alpha_m" => self.alpha[0] = f()?,
            "alpha_sL" => self.alpha[1] = f()?,
            "alpha_sN" => self.alpha[2] = f()?,
            "zeta_m" => self.zeta_db[0] = f()?,
            "zeta_sL" => self.zeta_db[1] = f()?,
            "zeta_sN" => self.zeta_db[2] = f()?,
            "q_adc" => self.q_adc = f()?,
            "duplex" => {
                self.duplex = match value.trim().to_ascii_lowercase().as_str() {
                    "ibfd" | "fd" => Duplex::Ibfd,
                    "hd" => Duplex::Hd,
                    other => return Err(invalid(key, format!("`{other}` is not ibfd or hd"))),
                }
            }
            other => return Err(ConfigError::UnknownKey(other.to_string())),
        }
        Ok(())
    }

    /// Parses flat `key = value` lines on top of the defaults. `#` starts a comment.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut raw = Self::default();
        for (key, value, line) in key_values(text)? {
            raw.set(&key, &value).map_err(|e| match e {
                ConfigError::Syntax { .. } => e,
                other => ConfigError::Syntax { line, reason: other.to_string() },
            })?;
        }
        Ok(raw)
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text =
            std::fs::read_to_string(path).map_err(|e| ConfigError::Io { path: path.display().to_string(), reason: e.to_string() })?;
        Self::parse(&text)
    }

    /// Linear RSI factor implied by this raw config (positive dB readings are flipped).
    fn eta_linear(&self) -> f64 {
        match (self.eta, self.eta_db) {
            (Some(lin), _) => lin,
            (None, Some(db)) => {
                let db = if db > 0.0 {
                    log::warn!("eta_db = {db} dB is positive; interpreting it as -{db} dB of residual self-interference");
                    -db
                } else {
                    db
                };
                db_to_linear(db)
            }
            (None, None) => db_to_linear(-80.0),
        }
    }
}

/// Splits config text into `(key, value, line_number)` triples.
pub fn key_values(text: &str) -> Result<Vec<(String, String, usize)>, ConfigError> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line_no = i + 1;
        let body = line.split('#').next().unwrap_or("").trim();
        if body.is_empty() {
            continue;
        }
        let (k, v) = body
            .split_once('=')
            .ok_or_else(|| ConfigError::Syntax { line: line_no, reason: format!("expected `key = value`, got `{body}`") })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() || v.is_empty() {
            return Err(ConfigError::Syntax { line: line_no, reason: format!("empty key or value in `{body}`") });
        }
        out.push((k.to_string(), v.to_string(), line_no));
    }
    Ok(out)
}

/// Validated, linear-unit system parameters with cached derived constants.
///
/// Immutable after validation; modifications go through [`RawParams`].
#[derive(Debug, Clone, PartialEq)]
pub struct SystemParams {
    pub subcarriers: f64,
    pub bandwidth: f64,
    pub carrier_freq: f64,
    pub noise_figure_db: f64,
    pub blockage_eps: f64,
    pub radius: f64,
    pub hard_core: f64,
    pub lambda_m: f64,
    pub lambda_s: f64,
    pub lambda_u: f64,
    pub eta: f64,
    pub eta_dig: f64,
    pub gh_nodes: usize,
    pub power_m: f64,
    pub power_s: f64,
    pub bias_ratio: f64,
    pub gnb_tx: ArrayGeometry,
    pub iab_tx: ArrayGeometry,
    pub iab_rx: ArrayGeometry,
    pub ue_rx: ArrayGeometry,
    pub adc_bits: f64,
    pub duplex: Duplex,
    nakagami: [u32; 3],
    alpha: [f64; 3],
    zeta_db: [f64; 3],
    beta_db: f64,
    noise_power: f64,
    mu_hat: f64,
    sigma_hat: [f64; 3],
    raw: RawParams,
}

/// Validates raw parameters and converts them to linear units.
pub fn validate(raw: &RawParams) -> Result<SystemParams, ConfigError> {
    let positive = |key: &str, v: f64| {
        if v > 0.0 && !v.is_nan() {
            Ok(v)
        } else {
            Err(invalid(key, format!("must be strictly positive, got {v}")))
        }
    };
    let integer = |key: &str, v: f64, min: f64| {
        if v.fract() == 0.0 && v >= min && v.is_finite() {
            Ok(v)
        } else {
            Err(invalid(key, format!("must be an integer >= {min}, got {v}")))
        }
    };

    let subcarriers = integer("K", raw.subcarriers, 1.0)?;
    let bandwidth = positive("W", raw.bandwidth_hz)?;
    let carrier_freq = positive("f_c", raw.carrier_hz)?;
    let mut nakagami = [0u32; 3];
    for (i, key) in ["M_m", "M_sL", "M_sN"].iter().enumerate() {
        let m = raw.nakagami[i];
        if m.fract() != 0.0 || m < 1.0 || !m.is_finite() || m > 64.0 {
            return Err(ConfigError::NonIntegerNakagami { key: key.to_string(), value: m });
        }
        nakagami[i] = m as u32;
    }
    if !(raw.blockage_eps >= 0.0) {
        return Err(invalid("eps_block", "must be non-negative"));
    }
    let radius = positive("R0", raw.radius)?;
    if !(raw.hard_core >= 0.0) {
        return Err(invalid("xi", "must be non-negative"));
    }
    let lambda_m = positive("lambda_m", raw.lambda_m)?;
    if !(raw.lambda_s >= 0.0) || !(raw.lambda_u >= 0.0) {
        return Err(invalid("lambda_s", "densities must be non-negative"));
    }
    if raw.hard_core > 0.0 {
        let bound = 1.0 / (std::f64::consts::PI * raw.hard_core * raw.hard_core);
        if lambda_m >= bound {
            return Err(ConfigError::HardCoreInfeasible { lambda_m, bound });
        }
    }
    let eta = raw.eta_linear();
    if !(eta > 0.0 && eta < 1.0) {
        return Err(ConfigError::EtaOutOfRange(eta));
    }
    let eta_dig = db_to_linear(raw.eta_dig_db);
    if !(eta_dig > 1.0) {
        return Err(invalid("eta_dig_db", format!("digital cancellation must exceed 0 dB, got {} dB", raw.eta_dig_db)));
    }
    let gh_nodes = integer("T_gh", raw.gh_nodes, 1.0)? as usize;
    if gh_nodes > 64 {
        return Err(invalid("T_gh", "at most 64 Gauss-Hermite nodes are supported"));
    }
    let power_m = dbm_to_watts(raw.p_m_dbm);
    let power_s = dbm_to_watts(raw.p_s_dbm);
    let bias_ratio = db_to_linear(raw.bias_ratio_db);
    if !(bias_ratio > 0.0) || !power_m.is_finite() || !power_s.is_finite() {
        return Err(invalid("P_m_dbm", "powers and bias must be finite"));
    }
    let n_m = integer("N_m", raw.subarrays_m, 1.0)? as usize;
    let n_s = integer("N_s", raw.subarrays_s, 1.0)? as usize;
    let gnb_tx = ArrayGeometry::new(raw.gnb_tx.0, raw.gnb_tx.1, n_m).map_err(|e| invalid("gnb_tx", e))?;
    let iab_tx = ArrayGeometry::new(raw.iab_tx.0, raw.iab_tx.1, n_s).map_err(|e| invalid("iab_tx", e))?;
    let iab_rx = ArrayGeometry::new(raw.iab_rx.0, raw.iab_rx.1, 1).map_err(|e| invalid("iab_rx", e))?;
    let ue_rx = ArrayGeometry::new(raw.ue_rx.0, raw.ue_rx.1, 1).map_err(|e| invalid("ue_rx", e))?;
    for (i, key) in ["alpha_m", "alpha_sL", "alpha_sN"].iter().enumerate() {
        positive(key, raw.alpha[i])?;
    }
    for (i, key) in ["zeta_m", "zeta_sL", "zeta_sN"].iter().enumerate() {
        if !(raw.zeta_db[i] >= 0.0) {
            return Err(invalid(key, "shadowing deviation must be non-negative"));
        }
    }
    let adc_bits = positive("q_adc", raw.q_adc)?;

    let beta_db = pathloss_intercept(carrier_freq);
    let ln10 = std::f64::consts::LN_10;
    let mu_hat = -0.1 * beta_db * ln10;
    let sigma_hat = raw.zeta_db.map(|z| 0.1 * z * ln10);
    let mut params = SystemParams {
        subcarriers,
        bandwidth,
        carrier_freq,
        noise_figure_db: raw.noise_figure_db,
        blockage_eps: raw.blockage_eps,
        radius,
        hard_core: raw.hard_core,
        lambda_m,
        lambda_s: raw.lambda_s,
        lambda_u: raw.lambda_u,
        eta,
        eta_dig,
        gh_nodes,
        power_m,
        power_s,
        bias_ratio,
        gnb_tx,
        iab_tx,
        iab_rx,
        ue_rx,
        adc_bits,
        duplex: raw.duplex,
        nakagami,
        alpha: raw.alpha,
        zeta_db: raw.zeta_db,
        beta_db,
        noise_power: 0.0,
        mu_hat,
        sigma_hat,
        raw: raw.clone(),
    };
    params.noise_power = noise_power(&params);
    Ok(params)
}

/// Thermal noise per receive antenna: -174 dBm/Hz over the effective bandwidth plus noise figure.
pub fn noise_power(params: &SystemParams) -> f64 {
    dbm_to_watts(-174.0 + 10.0 * params.effective_bandwidth().log10() + params.noise_figure_db)
}

/// Free-space intercept `20 log10(4 pi f_c / c)` in dB.
pub fn pathloss_intercept(carrier_freq: f64) -> f64 {
    20.0 * (4.0 * std::f64::consts::PI * carrier_freq / SPEED_OF_LIGHT).log10()
}

impl SystemParams {
    /// Reference deployment, validated.
    pub fn defaults() -> Self {
        validate(&RawParams::default()).expect("reference parameters are valid")
    }

    /// The raw parameters these were validated from.
    pub fn raw(&self) -> &RawParams {
        &self.raw
    }

    /// Re-validates after a change to the raw parameters.
    pub fn with(&self, edit: impl FnOnce(&mut RawParams)) -> Result<SystemParams, ConfigError> {
        let mut raw = self.raw.clone();
        edit(&mut raw);
        validate(&raw)
    }

    pub fn with_duplex(&self, duplex: Duplex) -> SystemParams {
        self.with(|r| r.duplex = duplex).expect("duplex change keeps parameters valid")
    }

    pub fn link_class(&self, class: NodeClass) -> LinkClass {
        let i = class.index();
        LinkClass { class, alpha: self.alpha[i], zeta_db: self.zeta_db[i], nakagami: self.nakagami[i] }
    }

    pub fn alpha(&self, class: NodeClass) -> f64 {
        self.alpha[class.index()]
    }

    pub fn nakagami(&self, class: NodeClass) -> u32 {
        self.nakagami[class.index()]
    }

    pub fn max_nakagami(&self) -> u32 {
        *self.nakagami.iter().max().unwrap()
    }

    /// Path-loss intercept in dB.
    pub fn beta_db(&self) -> f64 {
        self.beta_db
    }

    /// Lognormal location `-0.1 beta ln 10`, shared by all classes.
    pub fn mu_hat(&self) -> f64 {
        self.mu_hat
    }

    /// Lognormal scale `0.1 zeta ln 10` of a class.
    pub fn sigma_hat(&self, class: NodeClass) -> f64 {
        self.sigma_hat[class.index()]
    }

    /// Per-antenna noise power (W) for the configured duplex mode.
    pub fn noise_power(&self) -> f64 {
        self.noise_power
    }

    pub fn effective_bandwidth(&self) -> f64 {
        match self.duplex {
            Duplex::Ibfd => self.bandwidth,
            Duplex::Hd => self.bandwidth / 2.0,
        }
    }

    /// Quantization SQNR factor `1.5 * 2^(2q)`.
    pub fn quantization_factor(&self) -> f64 {
        1.5 * 2f64.powf(2.0 * self.adc_bits)
    }

    /// Residual self-interference power per subcarrier at the backhaul receiver
    /// (zero in half duplex).
    pub fn rsi_power(&self) -> f64 {
        match self.duplex {
            Duplex::Ibfd => self.eta * self.power_s / self.subcarriers,
            Duplex::Hd => 0.0,
        }
    }

    /// Whether the other tier interferes (full duplex only).
    pub fn cross_tier(&self) -> bool {
        self.duplex == Duplex::Ibfd
    }

    /// MHCPP parent density that realizes `lambda_m` at hard-core distance `xi`.
    pub fn parent_density(&self) -> f64 {
        crate::point_process::parent_density_for_target(self.lambda_m, self.hard_core)
            .expect("validated parameters satisfy the hard-core bound")
    }
}
