//! Simulation oracles for the closed forms.
//!
//! Trials are grouped into fixed-size chunks. Each chunk reads its own
//! region of the keystream (see [`TrialStream`]) and chunk partials are
//! merged in chunk order, so every estimate is bit-identical for any number
//! of worker threads.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::Serialize;

use crate::analytic::thresholds;
use crate::channel::{sample_draw, ChannelDraw, CorrelationMatrix, TrialStream};
use crate::config::{Mode, SystemConfig};
use crate::error::{check_power, Error, Result};
use crate::specfun::{log2_det_hermitian_pd, log2_det_i_plus_scaled};

/// Trials per deterministic work unit.
const CHUNK: u64 = 1 << 14;

/// Largest `L·M` accepted by the dense sensing-MI evaluation.
pub const BRUTEFORCE_MAX_DIM: usize = 256;

/// Per-trial SINRs (linear).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TrialSinrs {
    /// Near user decoding the far user's message before SIC.
    pub sinr_sic: f64,
    /// Near user decoding its own message after SIC.
    pub snr_n: f64,
    /// Far user, treating the near user's message as interference.
    pub sinr_f: f64,
}

pub fn trial_sinrs(cfg: &SystemConfig, mode: Mode, p: f64, draw: ChannelDraw) -> Result<TrialSinrs> {
    check_power(p)?;
    if mode.comm_starved() {
        return Ok(TrialSinrs {
            sinr_sic: 0.0,
            snr_n: 0.0,
            sinr_f: 0.0,
        });
    }
    let noise = mode.kappa() * cfg.sigma2_c;
    let rx_n = mode.mu() * p * draw.gain_n;
    let rx_f = mode.mu() * p * draw.gain_f;
    Ok(TrialSinrs {
        sinr_sic: rx_n * cfg.alpha_f / (noise + rx_n * cfg.alpha_n),
        snr_n: rx_n * cfg.alpha_n / noise,
        sinr_f: rx_f * cfg.alpha_f / (noise + rx_f * cfg.alpha_n),
    })
}

/// A Monte Carlo estimate with its standard error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EstimateWithError {
    pub value: f64,
    pub std_error: f64,
    pub trials: u64,
}

impl EstimateWithError {
    fn binomial(hits: u64, trials: u64) -> Self {
        let p = hits as f64 / trials as f64;
        Self {
            value: p,
            std_error: (p * (1.0 - p) / trials as f64).sqrt(),
            trials,
        }
    }

    fn from_moments(m: Moments) -> Self {
        let var = if m.n > 1 { m.m2 / (m.n - 1) as f64 } else { 0.0 };
        Self {
            value: m.mean,
            std_error: (var / m.n as f64).sqrt(),
            trials: m.n,
        }
    }

    /// Whether `reference` lies within `k` standard errors of the estimate.
    pub fn within(&self, reference: f64, k: f64) -> bool {
        (self.value - reference).abs() <= k * self.std_error
    }
}

/// Running mean and sum of squared deviations (Welford / Chan).
#[derive(Debug, Clone, Copy, Default)]
struct Moments {
    n: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    fn merge(self, other: Self) -> Self {
        if self.n == 0 {
            return other;
        }
        if other.n == 0 {
            return self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64 / n as f64);
        Self { n, mean, m2 }
    }
}

#[derive(Debug, Clone, Copy, Default)]
struct ChunkTally {
    outage_n: u64,
    outage_f: u64,
    rate_n: Moments,
    rate_f: Moments,
}

impl ChunkTally {
    fn merge(self, other: Self) -> Self {
        Self {
            outage_n: self.outage_n + other.outage_n,
            outage_f: self.outage_f + other.outage_f,
            rate_n: self.rate_n.merge(other.rate_n),
            rate_f: self.rate_f.merge(other.rate_f),
        }
    }
}

/// All four Monte Carlo estimates from one shared set of channel draws.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimulationSummary {
    pub outage_n: EstimateWithError,
    pub outage_f: EstimateWithError,
    pub ecr_n: EstimateWithError,
    pub ecr_f: EstimateWithError,
}

/// Runs `trials` independent channel draws keyed by `seed` and tallies
/// outage events and per-trial rates.
///
/// A near-user trial is in outage unless both the SIC SINR exceeds `γ̄_F`
/// and its own SNR exceeds `γ̄_N`; a far-user trial is in outage when its
/// SINR falls below `γ̄_F`.
pub fn simulate(
    cfg: &SystemConfig,
    mode: Mode,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<SimulationSummary> {
    check_power(p)?;
    if trials == 0 {
        return Err(Error::Domain("Monte Carlo needs at least one trial".into()));
    }
    let starved = mode.comm_starved();
    let (gbar_n, gbar_f) = if starved {
        (f64::INFINITY, f64::INFINITY)
    } else {
        let th = thresholds(cfg, mode)?;
        (th.gamma_bar_n, th.gamma_bar_f)
    };
    let kappa = mode.kappa();

    let chunks = trials.div_ceil(CHUNK);
    let tallies: Vec<ChunkTally> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let start = c * CHUNK;
            let end = (start + CHUNK).min(trials);
            let mut stream = TrialStream::at(seed, start);
            let mut t = ChunkTally::default();
            for _ in start..end {
                let draw = sample_draw(cfg, &mut stream);
                let s = trial_sinrs(cfg, mode, p, draw).expect("power checked");
                if starved || !(s.sinr_sic > gbar_f && s.snr_n > gbar_n) {
                    t.outage_n += 1;
                }
                if starved || s.sinr_f < gbar_f {
                    t.outage_f += 1;
                }
                t.rate_n.push(kappa * s.snr_n.ln_1p() / std::f64::consts::LN_2);
                t.rate_f.push(kappa * s.sinr_f.ln_1p() / std::f64::consts::LN_2);
            }
            t
        })
        .collect();
    let total = tallies
        .into_iter()
        .fold(ChunkTally::default(), ChunkTally::merge);

    Ok(SimulationSummary {
        outage_n: EstimateWithError::binomial(total.outage_n, trials),
        outage_f: EstimateWithError::binomial(total.outage_f, trials),
        ecr_n: EstimateWithError::from_moments(total.rate_n),
        ecr_f: EstimateWithError::from_moments(total.rate_f),
    })
}

/// Empirical outage probabilities `(near, far)`.
pub fn estimate_outage(
    cfg: &SystemConfig,
    mode: Mode,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let s = simulate(cfg, mode, p, trials, seed)?;
    Ok((s.outage_n, s.outage_f))
}

/// Empirical ergodic rates `(near, far)`.
pub fn estimate_ecr(
    cfg: &SystemConfig,
    mode: Mode,
    p: f64,
    trials: u64,
    seed: u64,
) -> Result<(EstimateWithError, EstimateWithError)> {
    let s = simulate(cfg, mode, p, trials, seed)?;
    Ok((s.ecr_n, s.ecr_f))
}

/// Sensing mutual information in bits, `log2 det(I_LM + X R X^H / σ_s²)`
/// with `X = I_M ⊗ x`, evaluated densely on the full `LM × LM` matrix.
pub fn sensing_mi_bruteforce(x: &[Complex64], corr: &CorrelationMatrix, sigma2_s: f64) -> Result<f64> {
    let (l, m) = (x.len(), corr.dim());
    if l == 0 {
        return Err(Error::Domain("signal vector must be nonempty".into()));
    }
    if l * m > BRUTEFORCE_MAX_DIM {
        return Err(Error::DimensionBound(format!(
            "L*M = {} exceeds {BRUTEFORCE_MAX_DIM}",
            l * m
        )));
    }
    if !(sigma2_s > 0.0) {
        return Err(Error::Domain("sensing noise power must be positive".into()));
    }
    let big_x = DMatrix::from_fn(l * m, m, |row, col| {
        if row / l == col {
            x[row % l]
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let inner = &big_x * corr.entries() * big_x.adjoint() / Complex64::new(sigma2_s, 0.0);
    let a = DMatrix::<Complex64>::identity(l * m, l * m) + inner;
    // Restore exact Hermitian symmetry lost in the triple product.
    let a = (&a + a.adjoint()) * Complex64::new(0.5, 0.0);
    log2_det_hermitian_pd(&a)
}

/// The same mutual information after Sylvester's identity:
/// `log2 det(I_M + (x^H x / σ_s²) R)`, evaluated from the spectrum of `R`.
pub fn sensing_mi_reduced(x: &[Complex64], corr: &CorrelationMatrix, sigma2_s: f64) -> Result<f64> {
    if !(sigma2_s > 0.0) {
        return Err(Error::Domain("sensing noise power must be positive".into()));
    }
    let energy: f64 = x.iter().map(|z| z.norm_sqr()).sum();
    let spectrum: Vec<f64> = corr.eigenvalues().into_iter().map(|l| l.max(0.0)).collect();
    log2_det_i_plus_scaled(energy / sigma2_s, &spectrum)
}

/// Two length-`l` unit-power streams whose rows are exactly orthogonal up
/// to rounding, i.e. `S S^H = l·I`.
pub fn orthogonal_streams(l: usize, stream: &mut TrialStream) -> Result<[Vec<Complex64>; 2]> {
    if l < 2 {
        return Err(Error::Domain("orthogonal streams need L >= 2".into()));
    }
    let norm = |v: &[Complex64]| v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let mut a: Vec<Complex64> = (0..l).map(|_| stream.next_complex_normal()).collect();
    let mut b: Vec<Complex64> = (0..l).map(|_| stream.next_complex_normal()).collect();
    let na = norm(&a);
    a.iter_mut().for_each(|z| *z /= na);
    let proj: Complex64 = a.iter().zip(&b).map(|(u, v)| u.conj() * v).sum();
    b.iter_mut().zip(&a).for_each(|(v, u)| *v -= proj * u);
    let nb = norm(&b);
    let root_l = (l as f64).sqrt();
    a.iter_mut().for_each(|z| *z *= root_l);
    b.iter_mut().for_each(|z| *z *= root_l / nb);
    Ok([a, b])
}

/// Independent unit-variance Gaussian streams; `S S^H ≈ l·I` only in
/// expectation.
pub fn random_streams(l: usize, stream: &mut TrialStream) -> [Vec<Complex64>; 2] {
    let mut row = || (0..l).map(|_| stream.next_complex_normal()).collect::<Vec<_>>();
    [row(), row()]
}

/// Superposition-coded dual-function signal `x^T = √p [√α_N, √α_F] S`.
pub fn dual_function_signal(cfg: &SystemConfig, p: f64, streams: &[Vec<Complex64>; 2]) -> Vec<Complex64> {
    let (wn, wf) = ((p * cfg.alpha_n).sqrt(), (p * cfg.alpha_f).sqrt());
    streams[0]
        .iter()
        .zip(&streams[1])
        .map(|(sn, sf)| sn * wn + sf * wf)
        .collect()
}

/// Least-squares slope through `(x, y)` points.
pub fn estimate_slope(points: &[(f64, f64)]) -> Result<f64> {
    if points.len() < 2 {
        return Err(Error::Domain("slope needs at least two points".into()));
    }
    let n = points.len() as f64;
    let mx = points.iter().map(|p| p.0).sum::<f64>() / n;
    let my = points.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = points.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = points.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    if !(sxx > 0.0) {
        return Err(Error::Domain("slope abscissae are degenerate".into()));
    }
    Ok(sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::{ergodic_rates, outage_probability};
    use crate::config::{db_to_linear, ResourceSplit};

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn zero_draw_gives_zero_sinrs() {
        let s = trial_sinrs(&cfg(), Mode::Isac, 10.0, ChannelDraw::from_unordered(0.0, 0.0)).unwrap();
        assert_eq!((s.sinr_sic, s.snr_n, s.sinr_f), (0.0, 0.0, 0.0));
    }

    #[test]
    fn sic_sinr_ceiling() {
        let s = trial_sinrs(&cfg(), Mode::Isac, 10.0, ChannelDraw::from_unordered(1e12, 1e12)).unwrap();
        assert!((s.sinr_sic - 4.0).abs() < 1e-9 && s.sinr_sic < 4.0);
        assert!(s.sinr_f < 4.0);
    }

    #[test]
    fn own_message_snr() {
        let s = trial_sinrs(&cfg(), Mode::Isac, 10.0, ChannelDraw { gain_n: 1.0, gain_f: 0.1 }).unwrap();
        assert!((s.snr_n - 2.0).abs() < 1e-15);
        assert!((s.sinr_f - 0.8 / 1.2).abs() < 1e-15);
    }

    #[test]
    fn zero_trials_rejected() {
        assert!(estimate_outage(&cfg(), Mode::Isac, 1.0, 0, 1).is_err());
        assert!(estimate_ecr(&cfg(), Mode::Isac, 1.0, 0, 1).is_err());
    }

    #[test]
    fn infeasible_allocation_always_outage() {
        let c = SystemConfig {
            alpha_n: 0.45,
            alpha_f: 0.55,
            target_rate_f: 2.0,
            ..cfg()
        };
        for seed in [1, 2, 3] {
            let (n, f) = estimate_outage(&c, Mode::Isac, 1e4, 20_000, seed).unwrap();
            assert_eq!((n.value, f.value), (1.0, 1.0));
            assert_eq!((n.std_error, f.std_error), (0.0, 0.0));
        }
    }

    #[test]
    fn outage_matches_closed_form() {
        let c = cfg();
        for db in [0.0, 10.0, 20.0] {
            let p = db_to_linear(db);
            let (n, f) = estimate_outage(&c, Mode::Isac, p, 200_000, 11).unwrap();
            let (an, af) = outage_probability(&c, Mode::Isac, p).unwrap();
            assert!(n.within(an, 3.0) && f.within(af, 3.0), "{db} dB");
        }
    }

    #[test]
    fn ecr_matches_closed_form() {
        let c = cfg();
        let p = db_to_linear(20.0);
        let mode = Mode::Fdsac(ResourceSplit::new(0.5, 0.5).unwrap());
        let (n, f) = estimate_ecr(&c, mode, p, 200_000, 5).unwrap();
        let (an, af) = ergodic_rates(&c, mode, p).unwrap();
        assert!(n.within(an, 3.0) && f.within(af, 3.0));
    }

    #[test]
    fn ecr_vanishes_at_low_power() {
        let (n, f) = estimate_ecr(&cfg(), Mode::Isac, 1e-9, 1000, 2).unwrap();
        assert!(n.value < 1e-8 && f.value < 1e-8);
    }

    #[test]
    fn far_rate_never_exceeds_ceiling() {
        let c = cfg();
        let mut stream = TrialStream::at(9, 0);
        for _ in 0..10_000 {
            let d = sample_draw(&c, &mut stream);
            let s = trial_sinrs(&c, Mode::Isac, 1e6, d).unwrap();
            assert!(s.sinr_f.ln_1p() / std::f64::consts::LN_2 <= 5f64.log2());
        }
        let (_, f) = estimate_ecr(&c, Mode::Isac, 1e9, 5000, 3).unwrap();
        assert!(f.value <= 5f64.log2());
    }

    #[test]
    fn near_outage_reduces_to_single_threshold() {
        let c = cfg();
        for mode in [Mode::Isac, Mode::Fdsac(ResourceSplit::new(0.5, 0.7).unwrap())] {
            let th = thresholds(&c, mode).unwrap();
            let p = 30.0;
            let cut = th.theta.unwrap() * mode.kappa() * c.sigma2_c / (mode.mu() * p);
            let mut stream = TrialStream::at(4, 0);
            for _ in 0..50_000 {
                let d = sample_draw(&c, &mut stream);
                let s = trial_sinrs(&c, mode, p, d).unwrap();
                let two_condition = !(s.sinr_sic > th.gamma_bar_f && s.snr_n > th.gamma_bar_n);
                assert_eq!(two_condition, d.gain_n <= cut);
            }
        }
    }

    #[test]
    fn chunk_boundaries_do_not_matter() {
        let c = cfg();
        let n = CHUNK * 2 + 17;
        let a = simulate(&c, Mode::Isac, 50.0, n, 42).unwrap();
        let b = simulate(&c, Mode::Isac, 50.0, n, 42).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn bruteforce_zero_signal() {
        let corr = CorrelationMatrix::new(DMatrix::identity(3, 3)).unwrap();
        let x = vec![Complex64::new(0.0, 0.0); 4];
        assert!(sensing_mi_bruteforce(&x, &corr, 1.0).unwrap().abs() < 1e-15);
    }

    #[test]
    fn bruteforce_dimension_bound() {
        let corr = CorrelationMatrix::new(DMatrix::identity(8, 8)).unwrap();
        let x = vec![Complex64::new(1.0, 0.0); 33];
        assert!(matches!(
            sensing_mi_bruteforce(&x, &corr, 1.0),
            Err(Error::DimensionBound(_))
        ));
    }

    #[test]
    fn orthogonal_streams_are_orthogonal() {
        let mut s = TrialStream::at(1, 0);
        let [a, b] = orthogonal_streams(6, &mut s).unwrap();
        let dot: Complex64 = a.iter().zip(&b).map(|(u, v)| u * v.conj()).sum();
        assert!(dot.norm() < 1e-12);
        for row in [&a, &b] {
            let e: f64 = row.iter().map(|z| z.norm_sqr()).sum();
            assert!((e - 6.0).abs() < 1e-12);
        }
        let x = dual_function_signal(&cfg(), 3.0, &[a, b]);
        let e: f64 = x.iter().map(|z| z.norm_sqr()).sum();
        assert!((e - 18.0).abs() < 1e-11);
    }

    #[test]
    fn slope_estimator() {
        let pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64, 3.0 - 2.0 * i as f64)).collect();
        assert!((estimate_slope(&pts).unwrap() + 2.0).abs() < 1e-14);
        assert!(estimate_slope(&[(1.0, 2.0)]).is_err());
        assert!(estimate_slope(&[(1.0, 2.0), (1.0, 3.0)]).is_err());
    }
}
