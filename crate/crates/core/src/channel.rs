//! Ordered Rayleigh channel gains and the sensing correlation matrix.
//!
//! `|h|²` for `h ~ CN(0, ϱ)` is exponential with mean `ϱ`. The near user
//! sees the larger of two independent gains, the far user the smaller.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use rand_chacha::ChaCha8Rng;
use rand_core::{RngCore, SeedableRng};

use crate::config::SystemConfig;
use crate::error::{Error, Result};

/// One realization of the ordered channel power gains.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelDraw {
    pub gain_n: f64,
    pub gain_f: f64,
}

impl ChannelDraw {
    /// Orders two unordered gains.
    pub fn from_unordered(g1: f64, g2: f64) -> Self {
        Self {
            gain_n: g1.max(g2),
            gain_f: g1.min(g2),
        }
    }
}

/// Deterministic random substream for Monte Carlo trials.
///
/// Trial `i` under `seed` always reads the same four 32-bit words of one
/// ChaCha8 keystream, so a trial's draw is a pure function of
/// `(seed, i)` no matter which worker runs it or in which order.
#[derive(Debug, Clone)]
pub struct TrialStream {
    rng: ChaCha8Rng,
}

impl TrialStream {
    /// 32-bit keystream words consumed by one [`sample_draw`] call.
    pub const WORDS_PER_TRIAL: u128 = 4;

    /// Positions the stream at the start of `trial`.
    pub fn at(seed: u64, trial: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_word_pos(trial as u128 * Self::WORDS_PER_TRIAL);
        Self { rng }
    }

    /// Uniform variate on `(0, 1]` with 53 random bits.
    pub fn next_unit(&mut self) -> f64 {
        ((self.rng.next_u64() >> 11) + 1) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Circularly-symmetric complex Gaussian with unit variance
    /// (Box–Muller).
    pub fn next_complex_normal(&mut self) -> Complex64 {
        let radius = (-self.next_unit().ln()).sqrt();
        let angle = 2.0 * PI * self.next_unit();
        Complex64::from_polar(radius, angle)
    }

    /// Exponential variate with the given mean, by inverse CDF.
    pub fn next_exponential(&mut self, mean: f64) -> f64 {
        -mean * self.next_unit().ln()
    }
}

/// Draws one ordered pair of gains and advances `stream` by one trial.
pub fn sample_draw(cfg: &SystemConfig, stream: &mut TrialStream) -> ChannelDraw {
    let g1 = stream.next_exponential(cfg.rho1);
    let g2 = stream.next_exponential(cfg.rho2);
    ChannelDraw::from_unordered(g1, g2)
}

fn check_support(x: f64) -> Result<()> {
    if x >= 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("distribution evaluated at x = {x} < 0")))
    }
}

/// CDF of the near user's gain `|h_N|² = max(|h_1|², |h_2|²)`.
pub fn cdf_near(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_support(x)?;
    Ok((-(-x / cfg.rho1).exp_m1()) * (-(-x / cfg.rho2).exp_m1()))
}

/// CDF of the far user's gain `|h_F|² = min(|h_1|², |h_2|²)`, exponential
/// with mean `rho3`.
pub fn cdf_far(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_support(x)?;
    Ok(-(-x / cfg.rho3()).exp_m1())
}

pub fn pdf_near(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_support(x)?;
    let (r1, r2, r3) = (cfg.rho1, cfg.rho2, cfg.rho3());
    let f = (-x / r1).exp() / r1 + (-x / r2).exp() / r2 - (-x / r3).exp() / r3;
    // Exact value is nonnegative; clamp rounding at x = 0.
    Ok(f.max(0.0))
}

pub fn pdf_far(x: f64, cfg: &SystemConfig) -> Result<f64> {
    check_support(x)?;
    let r3 = cfg.rho3();
    Ok((-x / r3).exp() / r3)
}

/// One point scatterer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Target {
    /// Average reflection strength `σ_k²`.
    pub strength: f64,
    /// Angle of arrival in radians.
    pub aoa: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TargetScene {
    targets: Vec<Target>,
}

impl TargetScene {
    pub fn new(targets: Vec<Target>) -> Result<Self> {
        if targets.is_empty() {
            return Err(Error::Domain("target scene must contain at least one target".into()));
        }
        for t in &targets {
            if !(t.strength > 0.0 && t.strength.is_finite()) {
                return Err(Error::Domain(format!("target strength must be positive, got {}", t.strength)));
            }
            if !(-PI / 2.0..=PI / 2.0).contains(&t.aoa) {
                return Err(Error::Domain(format!("target aoa {} outside [-pi/2, pi/2]", t.aoa)));
            }
        }
        Ok(Self { targets })
    }

    pub fn targets(&self) -> &[Target] {
        &self.targets
    }
}

/// Half-wavelength uniform linear array response, entry `i` equal to
/// `exp(j π i sin θ)`.
pub fn steering_vector(theta: f64, m: usize) -> Result<DVector<Complex64>> {
    if m == 0 {
        return Err(Error::Domain("steering vector needs at least one antenna".into()));
    }
    let phase = PI * theta.sin();
    Ok(DVector::from_fn(m, |i, _| Complex64::from_polar(1.0, phase * i as f64)))
}

/// Hermitian PSD correlation matrix of the target response vector.
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationMatrix {
    entries: DMatrix<Complex64>,
}

impl CorrelationMatrix {
    /// Wraps `entries` after checking it is square, Hermitian to 1e-12 and
    /// numerically PSD.
    pub fn new(entries: DMatrix<Complex64>) -> Result<Self> {
        if !entries.is_square() || entries.nrows() == 0 {
            return Err(Error::Domain("correlation matrix must be square and nonempty".into()));
        }
        let scale = entries.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let n = entries.nrows();
        for i in 0..n {
            for j in 0..=i {
                if (entries[(i, j)] - entries[(j, i)].conj()).norm() > 1e-12 * scale {
                    return Err(Error::Domain("correlation matrix is not Hermitian".into()));
                }
            }
        }
        let out = Self { entries };
        if out.eigenvalues().iter().any(|&l| l < -1e-10 * scale) {
            return Err(Error::Domain("correlation matrix is not positive semidefinite".into()));
        }
        Ok(out)
    }

    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    pub fn entries(&self) -> &DMatrix<Complex64> {
        &self.entries
    }

    pub fn trace(&self) -> f64 {
        self.entries.diagonal().iter().map(|z| z.re).sum()
    }

    /// Real eigenvalues in descending order.
    pub fn eigenvalues(&self) -> Vec<f64> {
        let eig = nalgebra::SymmetricEigen::new(self.entries.clone());
        let mut v: Vec<f64> = eig.eigenvalues.iter().copied().collect();
        v.sort_by(|a, b| b.total_cmp(a));
        v
    }

    /// Eigenvalues clamped at zero, with those below `rel_tol` times the
    /// largest treated as exactly zero.
    pub fn spectrum(&self, rel_tol: f64) -> Vec<f64> {
        let ev = self.eigenvalues();
        let top = ev.first().copied().unwrap_or(0.0).max(0.0);
        ev.into_iter()
            .map(|l| if l > rel_tol * top { l } else { 0.0 })
            .collect()
    }

    pub fn rank(&self, rel_tol: f64) -> usize {
        self.spectrum(rel_tol).iter().filter(|&&l| l > 0.0).count()
    }
}

/// `R = Σ_k σ_k² a(θ_k) a(θ_k)^H` for an `m`-element array.
pub fn build_correlation(scene: &TargetScene, m: usize) -> Result<CorrelationMatrix> {
    let mut r = DMatrix::<Complex64>::zeros(m, m);
    for t in scene.targets() {
        let a = steering_vector(t.aoa, m)?;
        r += (&a * a.adjoint()) * Complex64::new(t.strength, 0.0);
    }
    // Exact Hermitian symmetry regardless of rounding in the outer products.
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    CorrelationMatrix::new(r)
}
