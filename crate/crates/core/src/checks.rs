//! End-to-end validation battery.
//!
//! Each check pins its tolerance here and reports one [`CheckOutcome`].
//! The CLI `selftest` command runs the battery at reduced trial counts; the
//! acceptance test suite runs it at full scale.

use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::analytic::{
    ergodic_rates, outage_probability, sensing_rate, sensing_rate_asymptotic,
};
use crate::channel::{CorrelationMatrix, TrialStream};
use crate::config::{db_to_linear, Mode, ResourceSplit, SystemConfig};
use crate::error::Result;
use crate::montecarlo::{
    dual_function_signal, estimate_slope, orthogonal_streams, random_streams,
    sensing_mi_bruteforce, sensing_mi_reduced, simulate,
};
use crate::region::{containment_check, fdsac_frontier, isac_corner, split_rate_bound};
use crate::specfun::{exp_int_ei, log2_det_hermitian_pd, log2_det_i_plus_scaled, EULER_GAMMA};

/// Monte Carlo acceptance band in standard errors.
pub const MC_SIGMAS: f64 = 3.0;
/// Absolute floor on the ergodic-rate agreement band, bits/s/Hz.
pub const ECR_ABS_FLOOR: f64 = 1e-2;
pub const NU_DIVERSITY_BAND: (f64, f64) = (-2.15, -1.85);
pub const FU_DIVERSITY_BAND: (f64, f64) = (-1.1, -0.9);
pub const RATE_SLOPE_TOL: f64 = 0.05;
pub const DENSE_LOGDET_REL_TOL: f64 = 1e-9;
pub const BRUTEFORCE_REL_TOL: f64 = 1e-8;
pub const SENSING_SLOPE_TOL: f64 = 1e-12;
pub const SENSING_GAP_TOL: f64 = 1e-3;
pub const REGION_EQUALITY_TOL: f64 = 1e-9;
pub const SCALAR_INEQ_TOL: f64 = 1e-12;
pub const EI_DERIVATIVE_REL_TOL: f64 = 1e-6;
pub const EI_SMALL_ARG_TOL: f64 = 1e-5;

/// FDSAC split used by the comparison sweeps.
pub const REFERENCE_SPLIT: (f64, f64) = (0.5, 0.5);
/// SNR grid of the closed-form vs simulation sweeps, dB.
pub const SWEEP_DB: [f64; 9] = [0.0, 5.0, 10.0, 15.0, 20.0, 25.0, 30.0, 35.0, 40.0];
pub const REGION_P_DB: f64 = 5.0;
pub const REGION_GRID_N: usize = 101;

#[derive(Debug, Clone, Copy)]
pub struct CheckSettings {
    pub trials: u64,
    pub seed: u64,
}

impl CheckSettings {
    pub fn full() -> Self {
        Self {
            trials: 1_000_000,
            seed: 2023,
        }
    }

    pub fn reduced() -> Self {
        Self {
            trials: 100_000,
            seed: 2023,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CheckOutcome {
    pub id: u8,
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

impl fmt::Display for CheckOutcome {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let tag = if self.passed { "PASS" } else { "FAIL" };
        write!(f, "[{tag}] {:>2} {}: {}", self.id, self.name, self.detail)
    }
}

fn outcome(id: u8, name: &'static str, result: Result<(bool, String)>) -> CheckOutcome {
    match result {
        Ok((passed, detail)) => CheckOutcome {
            id,
            name,
            passed,
            detail,
        },
        Err(e) => CheckOutcome {
            id,
            name,
            passed: false,
            detail: format!("error: {e}"),
        },
    }
}

fn comparison_modes() -> [(&'static str, Mode); 2] {
    let (k, m) = REFERENCE_SPLIT;
    [
        ("isac", Mode::Isac),
        ("fdsac", Mode::Fdsac(ResourceSplit::new(k, m).expect("valid split"))),
    ]
}

/// Runs the whole battery in criterion order.
pub fn run_all(cfg: &SystemConfig, settings: CheckSettings) -> Vec<CheckOutcome> {
    vec![
        check_outage_vs_simulation(cfg, settings),
        check_ecr_vs_simulation(cfg, settings),
        check_diversity_orders(cfg),
        check_rate_slopes(cfg),
        check_sensing_identity(settings.seed),
        check_sensing_slopes(cfg),
        check_region_containment(cfg),
        check_scalar_inequality(settings.seed),
        check_special_functions(settings.seed),
        check_determinism(cfg, settings),
    ]
}

/// Closed-form outage within `MC_SIGMAS` binomial standard errors of the
/// simulated frequency, where the standard error is that of a binomial
/// proportion with the closed-form probability.
pub fn check_outage_vs_simulation(cfg: &SystemConfig, s: CheckSettings) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst: f64 = 0.0;
        let mut failures = Vec::new();
        for (label, mode) in comparison_modes() {
            for db in SWEEP_DB {
                let p = db_to_linear(db);
                let sim = simulate(cfg, mode, p, s.trials, s.seed)?;
                let (an, af) = outage_probability(cfg, mode, p)?;
                for (user, exact, est) in [("NU", an, sim.outage_n), ("FU", af, sim.outage_f)] {
                    let se = (exact * (1.0 - exact) / s.trials as f64).sqrt();
                    let dev = (est.value - exact).abs();
                    let z = if se > 0.0 { dev / se } else if dev == 0.0 { 0.0 } else { f64::INFINITY };
                    worst = worst.max(z);
                    if z > MC_SIGMAS {
                        failures.push(format!("{label} {user} {db} dB: z={z:.2}"));
                    }
                }
            }
        }
        let detail = format!(
            "{} points, {} trials, worst |z| = {worst:.2}{}",
            2 * SWEEP_DB.len() * 2,
            s.trials,
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        );
        Ok((failures.is_empty(), detail))
    };
    outcome(1, "closed-form vs Monte Carlo outage", run())
}

/// Closed-form ergodic rates within `max(3 SE, 1e-2)` of the sample mean.
pub fn check_ecr_vs_simulation(cfg: &SystemConfig, s: CheckSettings) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut worst_ratio: f64 = 0.0;
        let mut failures = Vec::new();
        for (label, mode) in comparison_modes() {
            for db in SWEEP_DB {
                let p = db_to_linear(db);
                let sim = simulate(cfg, mode, p, s.trials, s.seed)?;
                let (an, af) = ergodic_rates(cfg, mode, p)?;
                for (user, exact, est) in [("NU", an, sim.ecr_n), ("FU", af, sim.ecr_f)] {
                    let band = (MC_SIGMAS * est.std_error).max(ECR_ABS_FLOOR);
                    let ratio = (est.value - exact).abs() / band;
                    worst_ratio = worst_ratio.max(ratio);
                    if ratio > 1.0 {
                        failures.push(format!("{label} {user} {db} dB: |d|={:.3e}", (est.value - exact).abs()));
                    }
                }
            }
        }
        let detail = format!(
            "worst deviation / band = {worst_ratio:.3}{}",
            if failures.is_empty() { String::new() } else { format!("; {}", failures.join(", ")) }
        );
        Ok((failures.is_empty(), detail))
    };
    outcome(2, "closed-form vs Monte Carlo ergodic rate", run())
}

/// Least-squares slope of log10 outage against log10 p over `[lo_db, hi_db]`
/// at 1 dB spacing.
pub fn outage_slopes(cfg: &SystemConfig, mode: Mode, lo_db: f64, hi_db: f64) -> Result<(f64, f64)> {
    let mut near = Vec::new();
    let mut far = Vec::new();
    let steps = (hi_db - lo_db).round() as usize;
    for i in 0..=steps {
        let db = lo_db + i as f64;
        let (pn, pf) = outage_probability(cfg, mode, db_to_linear(db))?;
        near.push((db / 10.0, pn.log10()));
        far.push((db / 10.0, pf.log10()));
    }
    Ok((estimate_slope(&near)?, estimate_slope(&far)?))
}

pub fn check_diversity_orders(cfg: &SystemConfig) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, mode) in comparison_modes() {
            let (sn, sf) = outage_slopes(cfg, mode, 30.0, 40.0)?;
            let in_band = |v: f64, b: (f64, f64)| v >= b.0 && v <= b.1;
            ok &= in_band(sn, NU_DIVERSITY_BAND) && in_band(sf, FU_DIVERSITY_BAND);
            parts.push(format!("{label}: NU {sn:.4}, FU {sf:.4}"));
        }
        Ok((ok, parts.join("; ")))
    };
    outcome(3, "outage diversity orders", run())
}

/// Ergodic-rate slopes in `log2 p` from a 4x power step starting at
/// `start_db`: `(near, far, sum)`.
pub fn rate_slopes(cfg: &SystemConfig, mode: Mode, start_db: f64) -> Result<(f64, f64, f64)> {
    let p = db_to_linear(start_db);
    let (n1, f1) = ergodic_rates(cfg, mode, p)?;
    let (n2, f2) = ergodic_rates(cfg, mode, 4.0 * p)?;
    let (dn, df) = ((n2 - n1) / 2.0, (f2 - f1) / 2.0);
    Ok((dn, df, dn + df))
}

pub fn check_rate_slopes(cfg: &SystemConfig) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, mode) in comparison_modes() {
            let expected = mode.kappa();
            let (sn, sf, sc) = rate_slopes(cfg, mode, 34.0)?;
            ok &= (sn - expected).abs() <= RATE_SLOPE_TOL
                && sf.abs() < RATE_SLOPE_TOL
                && (sc - expected).abs() <= RATE_SLOPE_TOL;
            parts.push(format!("{label}: NU {sn:.4}, FU {sf:.4}, sum {sc:.4} (expect {expected})"));
        }
        Ok((ok, parts.join("; ")))
    };
    outcome(4, "ergodic-rate high-SNR slopes", run())
}

fn random_unitary(n: usize, stream: &mut TrialStream) -> DMatrix<Complex64> {
    let g = DMatrix::from_fn(n, n, |_, _| stream.next_complex_normal());
    g.qr().q()
}

/// Random Hermitian PSD matrix `U diag(λ) U^H` with roughly a quarter of
/// its eigenvalues zero.
pub fn random_psd(n: usize, stream: &mut TrialStream) -> (DMatrix<Complex64>, Vec<f64>) {
    let lambdas: Vec<f64> = (0..n)
        .map(|_| {
            if stream.next_unit() < 0.25 {
                0.0
            } else {
                5.0 * stream.next_unit()
            }
        })
        .collect();
    let u = random_unitary(n, stream);
    let d = DMatrix::from_fn(n, n, |i, j| {
        if i == j {
            Complex64::new(lambdas[i], 0.0)
        } else {
            Complex64::new(0.0, 0.0)
        }
    });
    let r = &u * d * u.adjoint();
    let r = (&r + r.adjoint()) * Complex64::new(0.5, 0.0);
    (r, lambdas)
}

/// Random PSD matrix `B B^H / n` built without any eigendecomposition.
fn random_gram(n: usize, stream: &mut TrialStream) -> DMatrix<Complex64> {
    let b = DMatrix::from_fn(n, n, |_, _| stream.next_complex_normal());
    let r = &b * b.adjoint() / Complex64::new(n as f64, 0.0);
    (&r + r.adjoint()) * Complex64::new(0.5, 0.0)
}

fn rel_err(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

pub fn check_sensing_identity(seed: u64) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut stream = TrialStream::at(seed ^ 0x5e45, 0);
        let l_frame = 30.0;
        let mut worst_dense: f64 = 0.0;
        for i in 0..20 {
            let m = 1 + i % 8;
            let (r, lambdas) = random_psd(m, &mut stream);
            let p = 10f64.powf(4.0 * stream.next_unit() - 1.0);
            let c = p * l_frame / 1.0;
            let dense_arg = DMatrix::<Complex64>::identity(m, m) + &r * Complex64::new(c, 0.0);
            let dense = log2_det_hermitian_pd(&dense_arg)?;
            let spectral = log2_det_i_plus_scaled(c, &lambdas)?;
            worst_dense = worst_dense.max(rel_err(spectral, dense));
        }

        let mut worst_brute: f64 = 0.0;
        let mut worst_random: f64 = 0.0;
        let cfg = SystemConfig::default();
        for i in 0..50 {
            let m = 1 + i % 4;
            let l = 2 + (i / 4) % 7;
            let corr = CorrelationMatrix::new(random_gram(m, &mut stream))?;
            let p = 10f64.powf(3.0 * stream.next_unit() - 1.0);
            let sigma2 = 0.5 + stream.next_unit();
            let streams = orthogonal_streams(l, &mut stream)?;
            let x = dual_function_signal(&cfg, p, &streams);
            let brute = sensing_mi_bruteforce(&x, &corr, sigma2)?;
            let reduced = sensing_mi_reduced(&x, &corr, sigma2)?;
            worst_brute = worst_brute.max(rel_err(reduced, brute));

            // Nominal p·L energy against the realized energy of i.i.d. streams.
            let rnd = dual_function_signal(&cfg, p, &random_streams(l, &mut stream));
            let nominal = log2_det_i_plus_scaled(
                p * l as f64 / sigma2,
                &corr.eigenvalues().into_iter().map(|v| v.max(0.0)).collect::<Vec<_>>(),
            )?;
            worst_random = worst_random.max(rel_err(sensing_mi_bruteforce(&rnd, &corr, sigma2)?, nominal));
        }
        let ok = worst_dense <= DENSE_LOGDET_REL_TOL && worst_brute <= BRUTEFORCE_REL_TOL;
        Ok((
            ok,
            format!(
                "spectral vs dense max rel {worst_dense:.2e}; brute vs reduced max rel {worst_brute:.2e}; \
                 i.i.d. streams vs nominal pL (reported only) max rel {worst_random:.2e}"
            ),
        ))
    };
    outcome(5, "sensing-rate log-det identities", run())
}

pub fn check_sensing_slopes(cfg: &SystemConfig) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let r = cfg.sensing_rank() as f64;
        let l = cfg.frame_length as f64;
        let mut ok = true;
        let mut parts = Vec::new();
        for (label, mode) in comparison_modes() {
            let bw = match mode {
                Mode::Isac => 1.0,
                Mode::Fdsac(s) => 1.0 - s.kappa(),
            };
            let p = db_to_linear(34.0);
            let slope = (sensing_rate_asymptotic(cfg, mode, 4.0 * p)?
                - sensing_rate_asymptotic(cfg, mode, p)?)
                / 2.0;
            let expected = bw * r / l;
            let p40 = db_to_linear(40.0);
            let gap = (sensing_rate(cfg, mode, p40)? - sensing_rate_asymptotic(cfg, mode, p40)?).abs();
            ok &= (slope - expected).abs() <= SENSING_SLOPE_TOL && gap < SENSING_GAP_TOL;
            parts.push(format!("{label}: slope {slope:.12} (expect {expected:.12}), gap@40dB {gap:.2e}"));
        }
        Ok((ok, parts.join("; ")))
    };
    outcome(6, "sensing-rate high-SNR slopes", run())
}

pub fn check_region_containment(cfg: &SystemConfig) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let p = db_to_linear(REGION_P_DB);
        let report = containment_check(cfg, p, REGION_GRID_N)?;
        let corner = isac_corner(cfg, p)?;
        let frontier = fdsac_frontier(cfg, p, 2)?;
        let at = |k: f64, m: f64| {
            frontier
                .points
                .iter()
                .find(|g| g.kappa == k && g.mu == m)
                .expect("endpoint present")
                .rate
        };
        let sum_gap = (at(1.0, 1.0).rate_c - corner.rate_c).abs();
        let sr_gap = (at(0.0, 0.0).rate_s - corner.rate_s).abs();
        let ok = report.holds && sum_gap <= REGION_EQUALITY_TOL && sr_gap <= REGION_EQUALITY_TOL;
        Ok((
            ok,
            format!(
                "{0}x{0} grid, max violation {1:.3e}; sum-rate gap at (1,1) {sum_gap:.1e}; \
                 sensing gap at (0,0) {sr_gap:.1e}",
                REGION_GRID_N, report.max_violation
            ),
        ))
    };
    outcome(7, "rate-region containment", run())
}

pub fn check_scalar_inequality(seed: u64) -> CheckOutcome {
    let mut stream = TrialStream::at(seed ^ 0xd1, 0);
    let mut violations = 0;
    let mut worst = f64::NEG_INFINITY;
    for _ in 0..10_000 {
        let y1 = 10f64.powf(6.0 * stream.next_unit() - 3.0);
        let y2 = if stream.next_unit() < 0.1 {
            0.0
        } else {
            10f64.powf(6.0 * stream.next_unit() - 3.0)
        };
        let kappa = stream.next_unit();
        let mu = stream.next_unit();
        let (lhs, rhs) = split_rate_bound(kappa, mu, y1, y2);
        worst = worst.max(lhs - rhs);
        if lhs - rhs > SCALAR_INEQ_TOL {
            violations += 1;
        }
    }
    CheckOutcome {
        id: 8,
        name: "split-rate scalar inequality",
        passed: violations == 0,
        detail: format!("10000 tuples, {violations} violations, max lhs-rhs {worst:.3e}"),
    }
}

pub fn check_special_functions(seed: u64) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mut stream = TrialStream::at(seed ^ 0xe1, 0);
        let mut worst: f64 = 0.0;
        for _ in 0..20 {
            let x = -0.1 - 9.9 * stream.next_unit();
            let h = 1e-5 * x.abs();
            let fd = (exp_int_ei(x + h)? - exp_int_ei(x - h)?) / (2.0 * h);
            worst = worst.max(rel_err(fd, x.exp() / x));
        }
        let small = 1e-6f64;
        let limit_gap = (exp_int_ei(-small)? - (EULER_GAMMA + small.ln())).abs();
        let ok = worst <= EI_DERIVATIVE_REL_TOL && limit_gap <= EI_SMALL_ARG_TOL;
        Ok((
            ok,
            format!("derivative max rel {worst:.2e}; |Ei(-1e-6) - (γ + ln 1e-6)| = {limit_gap:.2e}"),
        ))
    };
    outcome(9, "exponential integral identities", run())
}

/// Simulation results must not depend on the worker count.
pub fn check_determinism(cfg: &SystemConfig, s: CheckSettings) -> CheckOutcome {
    let run = || -> Result<(bool, String)> {
        let mode = comparison_modes()[1].1;
        let p = db_to_linear(20.0);
        let trials = s.trials.min(200_000);
        let mut runs = Vec::new();
        for threads in [1, 3, 8] {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(threads)
                .build()
                .map_err(|e| crate::Error::Domain(e.to_string()))?;
            runs.push(pool.install(|| simulate(cfg, mode, p, trials, s.seed))?);
        }
        runs.push(simulate(cfg, mode, p, trials, s.seed)?);
        let same = runs.windows(2).all(|w| {
            let (a, b) = (&w[0], &w[1]);
            a.ecr_n.value.to_bits() == b.ecr_n.value.to_bits()
                && a.ecr_f.value.to_bits() == b.ecr_f.value.to_bits()
                && a.ecr_n.std_error.to_bits() == b.ecr_n.std_error.to_bits()
                && a.outage_n == b.outage_n
                && a.outage_f == b.outage_f
        });
        Ok((same, format!("{trials} trials under 1, 3, 8 and default workers: bit-identical = {same}")))
    };
    outcome(10, "Monte Carlo determinism", run())
}
