//! Special functions and small numerical kernels used by the closed forms.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Euler–Mascheroni constant.
pub const EULER_GAMMA: f64 = 0.577_215_664_901_532_9;

/// Arguments `x` of `E1(x)` up to this bound use the power series; beyond it
/// the continued fraction. Both agree to ~1e-12 relative at the crossover.
const SERIES_LIMIT: f64 = 5.0;

/// Neumaier-compensated running sum.
#[derive(Debug, Clone, Copy, Default)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `E1(x)` for `0 < x <= SERIES_LIMIT` from
/// `E1(x) = -γ - ln x - Σ_{k≥1} (-x)^k / (k·k!)`.
fn e1_series(x: f64) -> f64 {
    let mut term = 1.0; // (-x)^k / k!
    let mut acc = CompensatedSum::new();
    for k in 1..200 {
        term *= -x / k as f64;
        let contrib = term / k as f64;
        acc.add(contrib);
        if contrib.abs() < 1e-18 * acc.value().abs().max(1e-300) {
            break;
        }
    }
    -EULER_GAMMA - x.ln() - acc.value()
}

/// `e^x E1(x)` for `x > SERIES_LIMIT` via modified Lentz evaluation of the
/// continued fraction `1/(x+1- 1/(x+3- 4/(x+5- ...)))`.
fn e1_scaled_cf(x: f64) -> f64 {
    const TINY: f64 = 1e-300;
    let mut b = x + 1.0;
    let mut c = 1.0 / TINY;
    let mut d = 1.0 / b;
    let mut h = d;
    for i in 1..10_000 {
        let an = -((i * i) as f64);
        b += 2.0;
        d = 1.0 / (an * d + b);
        c = b + an / c;
        let del = c * d;
        h *= del;
        if (del - 1.0).abs() < 1e-16 {
            break;
        }
    }
    h
}

/// `e^x E1(x)` for `x > 0`. Stays finite for arbitrarily large `x`.
fn e1_scaled(x: f64) -> f64 {
    if x <= SERIES_LIMIT {
        e1_series(x) * x.exp()
    } else {
        e1_scaled_cf(x)
    }
}

/// Exponential integral `Ei(x)` on the negative real axis.
///
/// Returns an error for `x >= 0` (including `-0.0`) and NaN.
pub fn exp_int_ei(x: f64) -> Result<f64> {
    if !(x < 0.0) {
        return Err(Error::Domain(format!("Ei is evaluated only for x < 0, got {x}")));
    }
    let y = -x;
    if y == f64::INFINITY {
        return Ok(-0.0);
    }
    let e1 = if y <= SERIES_LIMIT {
        e1_series(y)
    } else {
        e1_scaled_cf(y) * (-y).exp()
    };
    Ok(-e1)
}

/// `Ei(-chi/scale) · exp(chi/scale)`, computed without overflow for large
/// ratios. This is the building block of the ergodic-rate closed forms.
pub fn psi_term(chi: f64, scale: f64) -> Result<f64> {
    if !(chi > 0.0 && scale > 0.0) {
        return Err(Error::Domain(format!(
            "psi_term needs chi > 0 and scale > 0, got chi={chi}, scale={scale}"
        )));
    }
    let x = chi / scale;
    if x == f64::INFINITY {
        return Ok(-0.0);
    }
    Ok(-e1_scaled(x))
}

/// `Σ_a log2(1 + c·λ_a)`, i.e. `log2 det(I + cR)` for any Hermitian PSD `R`
/// with spectrum `eigenvalues`.
///
/// Terms are summed in ascending eigenvalue order with compensation so the
/// result does not depend on the order of the input list.
pub fn log2_det_i_plus_scaled(c: f64, eigenvalues: &[f64]) -> Result<f64> {
    if !(c >= 0.0) {
        return Err(Error::Domain(format!("scale must be nonnegative, got {c}")));
    }
    if eigenvalues.iter().any(|l| !(*l >= 0.0)) {
        return Err(Error::Domain("eigenvalues must be nonnegative".into()));
    }
    let mut sorted = eigenvalues.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nats: CompensatedSum = sorted.iter().map(|l| (c * l).ln_1p()).collect();
    Ok(nats.value() / std::f64::consts::LN_2)
}

/// `log2 det(A)` for a Hermitian positive-definite matrix, via Cholesky.
pub fn log2_det_hermitian_pd(a: &DMatrix<Complex64>) -> Result<f64> {
    if !a.is_square() {
        return Err(Error::Domain("matrix must be square".into()));
    }
    let n = a.nrows();
    let not_pd = || Error::Domain("matrix is not Hermitian positive definite".into());
    let scale = a.iter().map(|z| z.norm()).fold(0.0, f64::max);
    for i in 0..n {
        for j in 0..i {
            if (a[(i, j)] - a[(j, i)].conj()).norm() > 1e-12 * scale {
                return Err(not_pd());
            }
        }
    }
    // Complex square roots never fail, so positivity of the pivots has to be
    // checked on the factor itself.
    let chol = nalgebra::Cholesky::new(a.clone()).ok_or_else(not_pd)?;
    let l = chol.l_dirty();
    if (0..n).any(|i| !(l[(i, i)].re > 0.0 && l[(i, i)].im.abs() <= 1e-12 * l[(i, i)].re)) {
        return Err(not_pd());
    }
    let nats: CompensatedSum = (0..n).map(|i| 2.0 * l[(i, i)].re.ln()).collect();
    Ok(nats.value() / std::f64::consts::LN_2)
}

#[cfg(test)]
mod tests {
    use super::*;

    // mpmath, 30 digits.
    const EI_M1: f64 = -0.219_383_934_395_520_27;
    const EI_M5: f64 = -0.001_148_295_591_275_325_8;
    const EI_M20: f64 = -9.835_525_290_649_882e-11;
    const EI_M100: f64 = -3.683_597_761_682_032e-46;

    /// Composite Gauss–Legendre quadrature of `∫_a^∞ e^{-t}/t dt` after the
    /// change of variable `t = a + s/(1-s)`.
    fn e1_quadrature(a: f64) -> f64 {
        const NODES: [f64; 5] = [
            0.0,
            -0.538_469_310_105_683_1,
            0.538_469_310_105_683_1,
            -0.906_179_845_938_664,
            0.906_179_845_938_664,
        ];
        const WEIGHTS: [f64; 5] = [
            0.568_888_888_888_888_9,
            0.478_628_670_499_366_47,
            0.478_628_670_499_366_47,
            0.236_926_885_056_189_08,
            0.236_926_885_056_189_08,
        ];
        let panels = 20_000;
        let h = 1.0 / panels as f64;
        let mut total = 0.0;
        for k in 0..panels {
            let mid = (k as f64 + 0.5) * h;
            for (x, w) in NODES.iter().zip(WEIGHTS) {
                let s = mid + 0.5 * h * x;
                let t = a + s / (1.0 - s);
                let jac = 1.0 / ((1.0 - s) * (1.0 - s));
                total += w * 0.5 * h * (-t).exp() / t * jac;
            }
        }
        total
    }

    fn rel(a: f64, b: f64) -> f64 {
        ((a - b) / b).abs()
    }

    #[test]
    fn quadrature_oracle_matches_reference() {
        assert!(rel(-e1_quadrature(1.0), EI_M1) < 1e-12);
    }

    #[test]
    fn ei_reference_values() {
        assert!(rel(exp_int_ei(-1.0).unwrap(), -e1_quadrature(1.0)) < 1e-12);
        assert!(rel(exp_int_ei(-1.0).unwrap(), EI_M1) < 1e-14);
        assert!(rel(exp_int_ei(-5.0).unwrap(), EI_M5) < 1e-11);
        assert!(rel(exp_int_ei(-20.0).unwrap(), EI_M20) < 1e-13);
        assert!(rel(exp_int_ei(-100.0).unwrap(), EI_M100) < 1e-13);
    }

    #[test]
    fn branches_agree_at_crossover() {
        for x in [3.0, 4.5, 5.0] {
            let series = e1_series(x) * x.exp();
            let cf = e1_scaled_cf(x);
            assert!(rel(series, cf) < 1e-12, "x={x}: {series} vs {cf}");
        }
    }

    #[test]
    fn ei_domain_errors() {
        assert!(exp_int_ei(0.0).is_err());
        assert!(exp_int_ei(-0.0).is_err());
        assert!(exp_int_ei(1.0).is_err());
        assert!(exp_int_ei(f64::NAN).is_err());
    }

    #[test]
    fn ei_tail_vanishes() {
        let v = exp_int_ei(-800.0).unwrap();
        assert!(v <= 0.0 && v > -1e-300);
        assert_eq!(exp_int_ei(f64::NEG_INFINITY).unwrap(), 0.0);
    }

    #[test]
    fn ei_small_argument_limit() {
        for x in [1e-4, 1e-6, 1e-9] {
            let v = exp_int_ei(-x).unwrap();
            assert!((v - (EULER_GAMMA + x.ln())).abs() < 2.0 * x);
        }
    }

    #[test]
    fn psi_term_values() {
        let v = psi_term(1.0, 1.0).unwrap();
        assert!(rel(v, -e1_quadrature(1.0) * std::f64::consts::E) < 1e-12);
        assert!(rel(v, -0.596_347_362_323_194_1) < 1e-14);
        let big = psi_term(1e6, 1.0).unwrap();
        assert!(big < 0.0 && big > -1.1e-6);
        let small = psi_term(1e-8, 1.0).unwrap();
        assert!((small - (EULER_GAMMA + 1e-8f64.ln())).abs() < 1e-6);
        assert!(psi_term(0.0, 1.0).is_err());
        assert!(psi_term(1.0, -1.0).is_err());
    }

    #[test]
    fn log_det_simple_cases() {
        assert_eq!(log2_det_i_plus_scaled(0.0, &[5.0, 3.0]).unwrap(), 0.0);
        assert!((log2_det_i_plus_scaled(1.0, &[1.0, 1.0]).unwrap() - 2.0).abs() < 1e-15);
        assert!(log2_det_i_plus_scaled(-1.0, &[1.0]).is_err());
        assert!(log2_det_i_plus_scaled(1.0, &[1.0, -1.0]).is_err());
    }

    #[test]
    fn dense_log_det_of_diagonal() {
        let lambdas = [5.0, 3.0, 3.5, 2.5, 1.5, 2.0, 1.0, 0.5];
        let a = DMatrix::from_fn(8, 8, |i, j| {
            if i == j {
                Complex64::new(1.0 + 30.0 * lambdas[i], 0.0)
            } else {
                Complex64::new(0.0, 0.0)
            }
        });
        let dense = log2_det_hermitian_pd(&a).unwrap();
        let direct: f64 = lambdas.iter().map(|l| (1.0 + 30.0 * l).log2()).sum();
        assert!(rel(dense, direct) < 1e-14);
        let nonpd = DMatrix::from_element(2, 2, Complex64::new(1.0, 0.0));
        assert!(log2_det_hermitian_pd(&(-nonpd)).is_err());
    }

    #[test]
    fn compensated_sum_recovers_small_terms() {
        let s: CompensatedSum = [1.0, 1e-16, 1e-16, -1.0].into_iter().collect();
        assert!((s.value() - 2e-16).abs() < 1e-30);
    }
}
