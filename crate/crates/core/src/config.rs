//! System parameters and the small value types shared across modules.

use serde::Serialize;

use crate::error::{Error, Result};

/// Static parameters of the two-user NOMA-ISAC downlink.
///
/// All powers are dimensionless ratios; the transmit power `p` is passed
/// separately to every performance function so that one config can drive a
/// whole SNR sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SystemConfig {
    /// Variance of the first unordered Rayleigh channel.
    pub rho1: f64,
    /// Variance of the second unordered Rayleigh channel.
    pub rho2: f64,
    /// Power fraction of the near user.
    pub alpha_n: f64,
    /// Power fraction of the far user.
    pub alpha_f: f64,
    /// Communication noise power.
    pub sigma2_c: f64,
    /// Sensing noise power.
    pub sigma2_s: f64,
    pub num_rx_antennas: usize,
    /// Symbols per radar pulse / communication frame.
    pub frame_length: usize,
    /// Near-user target rate in bits/s/Hz.
    pub target_rate_n: f64,
    /// Far-user target rate in bits/s/Hz.
    pub target_rate_f: f64,
    /// Eigen-spectrum of the target response correlation matrix.
    pub sensing_eigenvalues: Vec<f64>,
}

impl Default for SystemConfig {
    /// The reference operating point: M = r = 8, L = 30, unit noise powers
    /// and 0.8 bits/s/Hz targets for both users.
    fn default() -> Self {
        Self {
            rho1: 0.9,
            rho2: 0.2,
            alpha_n: 0.2,
            alpha_f: 0.8,
            sigma2_c: 1.0,
            sigma2_s: 1.0,
            num_rx_antennas: 8,
            frame_length: 30,
            target_rate_n: 0.8,
            target_rate_f: 0.8,
            sensing_eigenvalues: vec![5.0, 3.0, 3.5, 2.5, 1.5, 2.0, 1.0, 0.5],
        }
    }
}

impl SystemConfig {
    /// Harmonic combination `rho1 * rho2 / (rho1 + rho2)`: the mean of the
    /// far user's (minimum) channel gain.
    pub fn rho3(&self) -> f64 {
        self.rho1 * self.rho2 / (self.rho1 + self.rho2)
    }

    /// Number of strictly positive sensing eigenvalues (the rank of R).
    pub fn sensing_rank(&self) -> usize {
        self.sensing_eigenvalues.iter().filter(|&&l| l > 0.0).count()
    }

    pub fn validate(self) -> Result<Self> {
        validate_config(self)
    }
}

/// Returns `cfg` unchanged if every invariant holds, otherwise an error
/// naming the first violated invariant.
pub fn validate_config(cfg: SystemConfig) -> Result<SystemConfig> {
    let fail = |msg: &str| Err(Error::InvalidConfig(msg.to_string()));

    if !(cfg.rho1 > 0.0 && cfg.rho1.is_finite()) {
        return fail("rho1 must be positive");
    }
    if !(cfg.rho2 > 0.0 && cfg.rho2.is_finite()) {
        return fail("rho2 must be positive");
    }
    if !(cfg.alpha_n > 0.0 && cfg.alpha_n < 1.0) {
        return fail("alpha_n must lie in (0, 1)");
    }
    if !(cfg.alpha_f > 0.0 && cfg.alpha_f < 1.0) {
        return fail("alpha_f must lie in (0, 1)");
    }
    if ((cfg.alpha_n + cfg.alpha_f) - 1.0).abs() > f64::EPSILON {
        return fail("alpha_n + alpha_f must equal 1");
    }
    if cfg.alpha_n >= cfg.alpha_f {
        return fail("alpha_n >= alpha_f");
    }
    if !(cfg.sigma2_c > 0.0 && cfg.sigma2_c.is_finite()) {
        return fail("sigma2_c must be positive");
    }
    if !(cfg.sigma2_s > 0.0 && cfg.sigma2_s.is_finite()) {
        return fail("sigma2_s must be positive");
    }
    if cfg.num_rx_antennas == 0 {
        return fail("num_rx_antennas must be positive");
    }
    if cfg.frame_length == 0 {
        return fail("frame_length must be positive");
    }
    if !(cfg.target_rate_n >= 0.0 && cfg.target_rate_n.is_finite()) {
        return fail("target_rate_n must be nonnegative");
    }
    if !(cfg.target_rate_f >= 0.0 && cfg.target_rate_f.is_finite()) {
        return fail("target_rate_f must be nonnegative");
    }
    if cfg.sensing_eigenvalues.len() > cfg.num_rx_antennas {
        return fail("sensing_eigenvalues longer than num_rx_antennas");
    }
    if cfg
        .sensing_eigenvalues
        .iter()
        .any(|l| !(*l >= 0.0 && l.is_finite()))
    {
        return fail("sensing_eigenvalues must be nonnegative");
    }
    Ok(cfg)
}

/// FDSAC split of bandwidth (`kappa`) and power (`mu`) given to
/// communications; the remainder goes to sensing.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ResourceSplit {
    kappa: f64,
    mu: f64,
}

impl ResourceSplit {
    pub fn new(kappa: f64, mu: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&kappa) {
            return Err(Error::Domain(format!("kappa must lie in [0, 1], got {kappa}")));
        }
        if !(0.0..=1.0).contains(&mu) {
            return Err(Error::Domain(format!("mu must lie in [0, 1], got {mu}")));
        }
        Ok(Self { kappa, mu })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }
}

/// Which system is being evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub enum Mode {
    Isac,
    Fdsac(ResourceSplit),
}

impl Mode {
    /// Communication bandwidth fraction; 1 for ISAC.
    pub fn kappa(&self) -> f64 {
        match self {
            Mode::Isac => 1.0,
            Mode::Fdsac(s) => s.kappa,
        }
    }

    /// Communication power fraction; 1 for ISAC.
    pub fn mu(&self) -> f64 {
        match self {
            Mode::Isac => 1.0,
            Mode::Fdsac(s) => s.mu,
        }
    }

    /// True when communications has no bandwidth or no power.
    pub(crate) fn comm_starved(&self) -> bool {
        self.kappa() == 0.0 || self.mu() == 0.0
    }
}

/// Near-user, far-user and sensing rates at one operating point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RateTriple {
    pub rate_n: f64,
    pub rate_f: f64,
    pub rate_s: f64,
}

impl RateTriple {
    pub fn sum_comm(&self) -> f64 {
        self.rate_n + self.rate_f
    }
}

pub fn db_to_linear(x_db: f64) -> f64 {
    10f64.powf(x_db / 10.0)
}
