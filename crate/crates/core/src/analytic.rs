//! Closed-form performance of NOMA-ISAC and NOMA-FDSAC.
//!
//! Every function takes the transmit power `p` as a linear ratio. The
//! communication side of mode `t` uses bandwidth fraction `κ_t` and power
//! fraction `μ_t` (both 1 for ISAC); sensing under FDSAC gets `1-κ` and
//! `1-μ`.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::config::{Mode, RateTriple, SystemConfig};
use crate::error::{check_power, Error, Result};
use crate::specfun::{log2_det_i_plus_scaled, psi_term, EULER_GAMMA};

/// SINR thresholds implied by the target rates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Thresholds {
    pub gamma_bar_n: f64,
    pub gamma_bar_f: f64,
    /// `max(γ̄_N/α_N, ϑ)`; `None` when infeasible.
    pub theta: Option<f64>,
    /// `γ̄_F / (α_F - α_N γ̄_F)`; `None` when infeasible.
    pub vartheta: Option<f64>,
    /// `α_F > γ̄_F α_N`: the far user's message can be decoded at all.
    pub feasible: bool,
}

/// `χ_b = κ σ_c² / (μ ϱ_b)` for `ϱ_1`, `ϱ_2` and `ϱ_3 = ϱ_1ϱ_2/(ϱ_1+ϱ_2)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChiSet {
    pub chi1: f64,
    pub chi2: f64,
    pub chi3: f64,
}

impl ChiSet {
    pub fn new(cfg: &SystemConfig, mode: Mode) -> Result<Self> {
        if mode.comm_starved() {
            return Err(Error::Domain(
                "chi undefined without communication bandwidth and power".into(),
            ));
        }
        let base = mode.kappa() * cfg.sigma2_c / mode.mu();
        Ok(Self {
            chi1: base / cfg.rho1,
            chi2: base / cfg.rho2,
            chi3: base / cfg.rho3(),
        })
    }
}

fn rate_threshold(rate: f64, kappa: f64) -> Result<f64> {
    if rate == 0.0 {
        Ok(0.0)
    } else if kappa == 0.0 {
        Err(Error::ZeroBandwidth)
    } else {
        Ok((rate / kappa).exp2() - 1.0)
    }
}

pub fn thresholds(cfg: &SystemConfig, mode: Mode) -> Result<Thresholds> {
    let kappa = mode.kappa();
    let gamma_bar_n = rate_threshold(cfg.target_rate_n, kappa)?;
    let gamma_bar_f = rate_threshold(cfg.target_rate_f, kappa)?;
    let feasible = cfg.alpha_f > gamma_bar_f * cfg.alpha_n;
    let (theta, vartheta) = if feasible {
        let vt = gamma_bar_f / (cfg.alpha_f - cfg.alpha_n * gamma_bar_f);
        (Some((gamma_bar_n / cfg.alpha_n).max(vt)), Some(vt))
    } else {
        (None, None)
    };
    Ok(Thresholds {
        gamma_bar_n,
        gamma_bar_f,
        theta,
        vartheta,
        feasible,
    })
}

/// Exact outage probabilities `(P_N, P_F)`.
///
/// Returns `(1, 1)` when the allocation cannot support the far user's rate
/// (`α_F <= γ̄_F α_N`) or when FDSAC gives communications no bandwidth or no
/// power.
pub fn outage_probability(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<(f64, f64)> {
    check_power(p)?;
    if mode.comm_starved() {
        return Ok((1.0, 1.0));
    }
    let th = thresholds(cfg, mode)?;
    let (Some(theta), Some(vartheta)) = (th.theta, th.vartheta) else {
        return Ok((1.0, 1.0));
    };
    let chi = ChiSet::new(cfg, mode)?;
    let one_minus_exp = |x: f64| -(-x).exp_m1();
    let p_n = one_minus_exp(chi.chi1 * theta / p) * one_minus_exp(chi.chi2 * theta / p);
    let p_f = one_minus_exp(chi.chi3 * vartheta / p);
    Ok((p_n, p_f))
}

/// High-SNR outage asymptotes `(χ_1χ_2θ²/p², χ_3ϑ/p)`.
pub fn outage_asymptotic(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<(f64, f64)> {
    check_power(p)?;
    if mode.comm_starved() {
        return Err(Error::AsymptoteUndefined(
            "no communication bandwidth or power".into(),
        ));
    }
    let th = thresholds(cfg, mode)?;
    let (Some(theta), Some(vartheta)) = (th.theta, th.vartheta) else {
        return Err(Error::AsymptoteUndefined("infeasible power allocation".into()));
    };
    let chi = ChiSet::new(cfg, mode)?;
    Ok((
        chi.chi1 * chi.chi2 * theta * theta / (p * p),
        chi.chi3 * vartheta / p,
    ))
}

/// Exact ergodic rates `(R_N, R_F)` in bits/s/Hz.
pub fn ergodic_rates(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<(f64, f64)> {
    check_power(p)?;
    if mode.comm_starved() {
        return Ok((0.0, 0.0));
    }
    let chi = ChiSet::new(cfg, mode)?;
    let kappa = mode.kappa();
    let scale = cfg.alpha_n * p;
    let psi1 = psi_term(chi.chi1, scale)?;
    let psi2 = psi_term(chi.chi2, scale)?;
    let psi3 = psi_term(chi.chi3, scale)?;
    let near = kappa / LN_2 * (psi3 - psi2 - psi1);
    let far = kappa / LN_2 * (psi3 - psi_term(chi.chi3, p)?);
    Ok((near.max(0.0), far.max(0.0)))
}

/// High-SNR ergodic-rate asymptotes: slope `κ` in `log2 p` for the near
/// user, the constant `-κ log2 α_N` for the far user.
pub fn ergodic_rates_asymptotic(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<(f64, f64)> {
    check_power(p)?;
    if mode.comm_starved() {
        return Ok((0.0, 0.0));
    }
    let (kappa, mu) = (mode.kappa(), mode.mu());
    let offset = (kappa * cfg.sigma2_c / (mu * cfg.alpha_n * (cfg.rho1 + cfg.rho2))).log2();
    let near = kappa * p.log2() - kappa * EULER_GAMMA / LN_2 - kappa * offset;
    let far = -kappa * cfg.alpha_n.log2();
    Ok((near, far))
}

/// Sensing rate in bits/s/Hz: `(1/L) log2 det(I + pL/σ_s² R)` for ISAC;
/// the FDSAC version uses bandwidth `1-κ` and power `(1-μ)p`.
pub fn sensing_rate(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<f64> {
    check_power(p)?;
    let l = cfg.frame_length as f64;
    let (bw, pw) = sensing_share(mode);
    if bw == 0.0 {
        return Ok(0.0);
    }
    let c = pw * p * l / (bw * cfg.sigma2_s);
    Ok(bw / l * log2_det_i_plus_scaled(c, &cfg.sensing_eigenvalues)?)
}

/// High-SNR sensing-rate asymptote, slope `(1-κ)r/L` in `log2 p`.
pub fn sensing_rate_asymptotic(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<f64> {
    check_power(p)?;
    let l = cfg.frame_length as f64;
    let (bw, pw) = sensing_share(mode);
    if bw == 0.0 {
        return Ok(0.0);
    }
    if pw == 0.0 {
        return Err(Error::AsymptoteUndefined("no sensing power".into()));
    }
    let r = cfg.sensing_rank() as f64;
    let offset: f64 = cfg
        .sensing_eigenvalues
        .iter()
        .filter(|&&lam| lam > 0.0)
        .map(|&lam| (pw * lam * l / (bw * cfg.sigma2_s)).log2())
        .sum();
    Ok(bw * r / l * p.log2() + bw / l * offset)
}

/// Bandwidth and power fractions left for sensing.
fn sensing_share(mode: Mode) -> (f64, f64) {
    match mode {
        Mode::Isac => (1.0, 1.0),
        Mode::Fdsac(s) => (1.0 - s.kappa(), 1.0 - s.mu()),
    }
}

/// Ergodic and sensing rates at one operating point.
pub fn rates(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<RateTriple> {
    let (rate_n, rate_f) = ergodic_rates(cfg, mode, p)?;
    let rate_s = sensing_rate(cfg, mode, p)?;
    Ok(RateTriple {
        rate_n,
        rate_f,
        rate_s,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum System {
    NomaIsac,
    NomaFdsac,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum Stream {
    NearUser,
    FarUser,
    /// Sum rate of the two communication users.
    CuPair,
    Sensing,
}

/// One cell group of the diversity-order / high-SNR-slope summary.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SlopeEntry {
    pub system: System,
    pub stream: Stream,
    /// Outage diversity order, where one is defined.
    pub diversity: Option<u32>,
    pub slope: f64,
}

/// Diversity orders and high-SNR slopes for both systems, with FDSAC
/// bandwidth fraction `kappa`, sensing rank `rank` and frame length
/// `frame_length`.
pub fn reference_table(kappa: f64, rank: usize, frame_length: usize) -> Vec<SlopeEntry> {
    let rl = rank as f64 / frame_length as f64;
    let entry = |system, stream, diversity, slope| SlopeEntry {
        system,
        stream,
        diversity,
        slope,
    };
    use Stream::*;
    use System::*;
    vec![
        entry(NomaFdsac, NearUser, Some(2), kappa),
        entry(NomaFdsac, FarUser, Some(1), 0.0),
        entry(NomaFdsac, CuPair, None, kappa),
        entry(NomaFdsac, Sensing, None, (1.0 - kappa) * rl),
        entry(NomaIsac, NearUser, Some(2), 1.0),
        entry(NomaIsac, FarUser, Some(1), 0.0),
        entry(NomaIsac, CuPair, None, 1.0),
        entry(NomaIsac, Sensing, None, rl),
    ]
}
