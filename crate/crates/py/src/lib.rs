//! Python bindings. Powers are linear (not dB) throughout, as in the Rust
//! API; modes are selected with optional `kappa`/`mu` keyword arguments
//! (both absent means ISAC).

use pyo3::exceptions::PyValueError;
use pyo3::prelude::*;
use pyo3::types::PyDict;

use noma_isac::{analytic, montecarlo, region, specfun, Mode, ResourceSplit};

fn value_err(e: noma_isac::Error) -> PyErr {
    PyValueError::new_err(e.to_string())
}

fn mode_of(kappa: Option<f64>, mu: Option<f64>) -> PyResult<Mode> {
    match (kappa, mu) {
        (None, None) => Ok(Mode::Isac),
        (Some(k), Some(m)) => Ok(Mode::Fdsac(ResourceSplit::new(k, m).map_err(value_err)?)),
        _ => Err(PyValueError::new_err("kappa and mu must be given together")),
    }
}

/// System parameters; the constructor yields the reference defaults.
#[pyclass(name = "SystemConfig", get_all, set_all)]
#[derive(Clone)]
pub struct PySystemConfig {
    pub rho1: f64,
    pub rho2: f64,
    pub alpha_n: f64,
    pub alpha_f: f64,
    pub sigma2_c: f64,
    pub sigma2_s: f64,
    pub num_rx_antennas: usize,
    pub frame_length: usize,
    pub target_rate_n: f64,
    pub target_rate_f: f64,
    pub sensing_eigenvalues: Vec<f64>,
}

impl From<noma_isac::SystemConfig> for PySystemConfig {
    fn from(c: noma_isac::SystemConfig) -> Self {
        Self {
            rho1: c.rho1,
            rho2: c.rho2,
            alpha_n: c.alpha_n,
            alpha_f: c.alpha_f,
            sigma2_c: c.sigma2_c,
            sigma2_s: c.sigma2_s,
            num_rx_antennas: c.num_rx_antennas,
            frame_length: c.frame_length,
            target_rate_n: c.target_rate_n,
            target_rate_f: c.target_rate_f,
            sensing_eigenvalues: c.sensing_eigenvalues,
        }
    }
}

impl PySystemConfig {
    /// Converts and validates.
    fn core(&self) -> PyResult<noma_isac::SystemConfig> {
        noma_isac::SystemConfig {
            rho1: self.rho1,
            rho2: self.rho2,
            alpha_n: self.alpha_n,
            alpha_f: self.alpha_f,
            sigma2_c: self.sigma2_c,
            sigma2_s: self.sigma2_s,
            num_rx_antennas: self.num_rx_antennas,
            frame_length: self.frame_length,
            target_rate_n: self.target_rate_n,
            target_rate_f: self.target_rate_f,
            sensing_eigenvalues: self.sensing_eigenvalues.clone(),
        }
        .validate()
        .map_err(value_err)
    }
}

#[pymethods]
impl PySystemConfig {
    #[new]
    fn new() -> Self {
        noma_isac::SystemConfig::default().into()
    }

    fn validate(&self) -> PyResult<()> {
        self.core().map(|_| ())
    }

    fn rho3(&self) -> f64 {
        self.rho1 * self.rho2 / (self.rho1 + self.rho2)
    }

    fn __repr__(&self) -> String {
        format!(
            "SystemConfig(rho1={}, rho2={}, alpha_n={}, alpha_f={}, M={}, L={}, rates=({}, {}))",
            self.rho1,
            self.rho2,
            self.alpha_n,
            self.alpha_f,
            self.num_rx_antennas,
            self.frame_length,
            self.target_rate_n,
            self.target_rate_f
        )
    }
}

#[pyfunction]
fn exp_int_ei(x: f64) -> PyResult<f64> {
    specfun::exp_int_ei(x).map_err(value_err)
}

#[pyfunction]
fn db_to_linear(db: f64) -> f64 {
    noma_isac::db_to_linear(db)
}

/// `dict` with `gamma_bar_n`, `gamma_bar_f`, `theta`, `vartheta`, `feasible`.
#[pyfunction]
#[pyo3(signature = (cfg, kappa=None, mu=None))]
fn thresholds<'py>(
    py: Python<'py>,
    cfg: &PySystemConfig,
    kappa: Option<f64>,
    mu: Option<f64>,
) -> PyResult<Bound<'py, PyDict>> {
    let t = analytic::thresholds(&cfg.core()?, mode_of(kappa, mu)?).map_err(value_err)?;
    let d = PyDict::new(py);
    d.set_item("gamma_bar_n", t.gamma_bar_n)?;
    d.set_item("gamma_bar_f", t.gamma_bar_f)?;
    d.set_item("theta", t.theta)?;
    d.set_item("vartheta", t.vartheta)?;
    d.set_item("feasible", t.feasible)?;
    Ok(d)
}

macro_rules! pair_fn {
    ($name:ident, $core:path) => {
        #[pyfunction]
        #[pyo3(signature = (cfg, p, kappa=None, mu=None))]
        fn $name(cfg: &PySystemConfig, p: f64, kappa: Option<f64>, mu: Option<f64>) -> PyResult<(f64, f64)> {
            $core(&cfg.core()?, mode_of(kappa, mu)?, p).map_err(value_err)
        }
    };
}

macro_rules! scalar_fn {
    ($name:ident, $core:path) => {
        #[pyfunction]
        #[pyo3(signature = (cfg, p, kappa=None, mu=None))]
        fn $name(cfg: &PySystemConfig, p: f64, kappa: Option<f64>, mu: Option<f64>) -> PyResult<f64> {
            $core(&cfg.core()?, mode_of(kappa, mu)?, p).map_err(value_err)
        }
    };
}

pair_fn!(outage_probability, analytic::outage_probability);
pair_fn!(outage_asymptotic, analytic::outage_asymptotic);
pair_fn!(ergodic_rates, analytic::ergodic_rates);
pair_fn!(ergodic_rates_asymptotic, analytic::ergodic_rates_asymptotic);
scalar_fn!(sensing_rate, analytic::sensing_rate);
scalar_fn!(sensing_rate_asymptotic, analytic::sensing_rate_asymptotic);

/// `((near, near_stderr), (far, far_stderr))`
type EstimatePair = ((f64, f64), (f64, f64));

fn estimates(
    pair: (montecarlo::EstimateWithError, montecarlo::EstimateWithError),
) -> EstimatePair {
    (
        (pair.0.value, pair.0.std_error),
        (pair.1.value, pair.1.std_error),
    )
}

#[pyfunction]
#[pyo3(signature = (cfg, p, trials, seed=2023, kappa=None, mu=None))]
fn estimate_outage(
    py: Python<'_>,
    cfg: &PySystemConfig,
    p: f64,
    trials: u64,
    seed: u64,
    kappa: Option<f64>,
    mu: Option<f64>,
) -> PyResult<EstimatePair> {
    let (c, m) = (cfg.core()?, mode_of(kappa, mu)?);
    py.allow_threads(|| montecarlo::estimate_outage(&c, m, p, trials, seed))
        .map(estimates)
        .map_err(value_err)
}

#[pyfunction]
#[pyo3(signature = (cfg, p, trials, seed=2023, kappa=None, mu=None))]
fn estimate_ecr(
    py: Python<'_>,
    cfg: &PySystemConfig,
    p: f64,
    trials: u64,
    seed: u64,
    kappa: Option<f64>,
    mu: Option<f64>,
) -> PyResult<EstimatePair> {
    let (c, m) = (cfg.core()?, mode_of(kappa, mu)?);
    py.allow_threads(|| montecarlo::estimate_ecr(&c, m, p, trials, seed))
        .map(estimates)
        .map_err(value_err)
}

type GridRow = (f64, f64, f64, f64);

/// `(grid, pareto)` as lists of `(kappa, mu, rate_s, rate_c)`.
#[pyfunction]
#[pyo3(signature = (cfg, p, grid_n=101))]
fn fdsac_frontier(cfg: &PySystemConfig, p: f64, grid_n: usize) -> PyResult<(Vec<GridRow>, Vec<GridRow>)> {
    let f = region::fdsac_frontier(&cfg.core()?, p, grid_n).map_err(value_err)?;
    let rows = |v: &[region::GridPoint]| {
        v.iter()
            .map(|g| (g.kappa, g.mu, g.rate.rate_s, g.rate.rate_c))
            .collect()
    };
    Ok((rows(&f.points), rows(&f.pareto)))
}

/// `(holds, max_violation, (corner_rate_s, corner_rate_c))`
#[pyfunction]
#[pyo3(signature = (cfg, p, grid_n=101))]
fn containment_check(cfg: &PySystemConfig, p: f64, grid_n: usize) -> PyResult<(bool, f64, (f64, f64))> {
    let r = region::containment_check(&cfg.core()?, p, grid_n).map_err(value_err)?;
    Ok((r.holds, r.max_violation, (r.corner.rate_s, r.corner.rate_c)))
}

/// Diversity orders and high-SNR slopes as `(system, stream, diversity, slope)`.
#[pyfunction]
fn reference_table(kappa: f64, rank: usize, frame_length: usize) -> Vec<(String, String, Option<u32>, f64)> {
    analytic::reference_table(kappa, rank, frame_length)
        .into_iter()
        .map(|e| {
            (
                format!("{:?}", e.system),
                format!("{:?}", e.stream),
                e.diversity,
                e.slope,
            )
        })
        .collect()
}

#[pymodule]
#[pyo3(name = "noma_isac")]
fn init_module(m: &Bound<'_, PyModule>) -> PyResult<()> {
    m.add_class::<PySystemConfig>()?;
    m.add_function(wrap_pyfunction!(exp_int_ei, m)?)?;
    m.add_function(wrap_pyfunction!(db_to_linear, m)?)?;
    m.add_function(wrap_pyfunction!(thresholds, m)?)?;
    m.add_function(wrap_pyfunction!(outage_probability, m)?)?;
    m.add_function(wrap_pyfunction!(outage_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_rates, m)?)?;
    m.add_function(wrap_pyfunction!(ergodic_rates_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(sensing_rate, m)?)?;
    m.add_function(wrap_pyfunction!(sensing_rate_asymptotic, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_outage, m)?)?;
    m.add_function(wrap_pyfunction!(estimate_ecr, m)?)?;
    m.add_function(wrap_pyfunction!(fdsac_frontier, m)?)?;
    m.add_function(wrap_pyfunction!(containment_check, m)?)?;
    m.add_function(wrap_pyfunction!(reference_table, m)?)?;
    Ok(())
}
