//! Subcommand implementations. Each returns the rendered table plus any
//! warnings; the binary decides where they go.

use serde_json::{json, Value};

use noma_isac::analytic::{
    ergodic_rates, ergodic_rates_asymptotic, outage_asymptotic, outage_probability,
    sensing_rate, sensing_rate_asymptotic, thresholds,
};
use noma_isac::checks::{run_all, CheckOutcome, CheckSettings};
use noma_isac::montecarlo::simulate;
use noma_isac::region::{containment_of, fdsac_frontier, isac_corner, GridPoint};
use noma_isac::{db_to_linear, Mode, ResourceSplit, SystemConfig};

use crate::table::{Cell, Table};
use crate::CliError;

/// SNR axis and Monte Carlo settings shared by the sweep commands.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SweepSpec {
    pub snr_db_min: f64,
    pub snr_db_max: f64,
    pub snr_db_step: f64,
    /// Monte Carlo trials per point; 0 means closed forms only.
    pub trials: u64,
    pub seed: u64,
    pub mode: Mode,
}

impl Default for SweepSpec {
    fn default() -> Self {
        Self {
            snr_db_min: 0.0,
            snr_db_max: 40.0,
            snr_db_step: 5.0,
            trials: 0,
            seed: 2023,
            mode: Mode::Isac,
        }
    }
}

impl SweepSpec {
    pub fn validate(&self) -> Result<(), CliError> {
        if !(self.snr_db_min.is_finite() && self.snr_db_max.is_finite()) {
            return Err(CliError::Usage("SNR bounds must be finite".into()));
        }
        if self.snr_db_min > self.snr_db_max {
            return Err(CliError::Usage("snr-db-min must not exceed snr-db-max".into()));
        }
        if !(self.snr_db_step > 0.0) {
            return Err(CliError::Usage("snr-db-step must be positive".into()));
        }
        Ok(())
    }

    /// Grid points `min + i·step` up to `max` (inclusive, with a small
    /// tolerance for the last point).
    pub fn points_db(&self) -> Vec<f64> {
        let n = ((self.snr_db_max - self.snr_db_min) / self.snr_db_step + 1e-9).floor() as usize;
        (0..=n)
            .map(|i| self.snr_db_min + i as f64 * self.snr_db_step)
            .collect()
    }
}

#[derive(Debug, Clone)]
pub struct CommandOutput {
    pub table: Table,
    pub warnings: Vec<String>,
}

fn mode_meta(mode: Mode) -> Value {
    match mode {
        Mode::Isac => json!({"mode": "isac"}),
        Mode::Fdsac(s) => json!({"mode": "fdsac", "kappa": s.kappa(), "mu": s.mu()}),
    }
}

fn sweep_meta(command: &str, cfg: &SystemConfig, spec: &SweepSpec) -> Value {
    json!({
        "command": command,
        "config": cfg,
        "mode": mode_meta(spec.mode),
        "snr_db_min": spec.snr_db_min,
        "snr_db_max": spec.snr_db_max,
        "snr_db_step": spec.snr_db_step,
        "trials": spec.trials,
        "seed": spec.seed,
    })
}

fn feasibility_warning(cfg: &SystemConfig, mode: Mode) -> Option<String> {
    if mode.kappa() == 0.0 || mode.mu() == 0.0 {
        return Some("communications has no bandwidth or power: outage is certain".into());
    }
    match thresholds(cfg, mode) {
        Ok(th) if !th.feasible => Some(format!(
            "infeasible power allocation (alpha_f = {} <= gamma_bar_f * alpha_n = {}): outage is certain",
            cfg.alpha_f,
            th.gamma_bar_f * cfg.alpha_n
        )),
        _ => None,
    }
}

/// Outage probability sweep: closed form, high-SNR asymptote and (with
/// `trials > 0`) Monte Carlo estimate per SNR point.
pub fn cmd_outage(cfg: &SystemConfig, spec: &SweepSpec) -> Result<CommandOutput, CliError> {
    spec.validate()?;
    let with_mc = spec.trials > 0;
    let mut cols = vec![
        "snr_db",
        "pout_n_analytic",
        "pout_f_analytic",
        "pout_n_asym",
        "pout_f_asym",
    ];
    if with_mc {
        cols.extend(["pout_n_mc", "pout_f_mc", "mc_stderr_n", "mc_stderr_f"]);
    }
    let mut table = Table::new(&cols, sweep_meta("outage", cfg, spec));
    let warnings: Vec<String> = feasibility_warning(cfg, spec.mode).into_iter().collect();

    for db in spec.points_db() {
        let p = db_to_linear(db);
        let (pn, pf) = outage_probability(cfg, spec.mode, p)?;
        let (an, af) = match outage_asymptotic(cfg, spec.mode, p) {
            Ok((a, b)) => (Some(a), Some(b)),
            Err(_) => (None, None),
        };
        let mut row = vec![db.into(), pn.into(), pf.into(), an.into(), af.into()];
        if with_mc {
            let s = simulate(cfg, spec.mode, p, spec.trials, spec.seed)?;
            row.extend([
                s.outage_n.value.into(),
                s.outage_f.value.into(),
                s.outage_n.std_error.into(),
                s.outage_f.std_error.into(),
            ]);
        }
        table.push(row);
    }
    Ok(CommandOutput { table, warnings })
}

/// Ergodic-rate sweep with per-user and sum columns.
pub fn cmd_ecr(cfg: &SystemConfig, spec: &SweepSpec) -> Result<CommandOutput, CliError> {
    spec.validate()?;
    let with_mc = spec.trials > 0;
    let mut cols = vec![
        "snr_db",
        "ecr_n_analytic",
        "ecr_f_analytic",
        "ecr_sum_analytic",
        "ecr_n_asym",
        "ecr_f_asym",
        "ecr_sum_asym",
    ];
    if with_mc {
        cols.extend(["ecr_n_mc", "ecr_f_mc", "ecr_sum_mc", "mc_stderr_n", "mc_stderr_f"]);
    }
    let mut table = Table::new(&cols, sweep_meta("ecr", cfg, spec));
    for db in spec.points_db() {
        let p = db_to_linear(db);
        let (n, f) = ergodic_rates(cfg, spec.mode, p)?;
        let (an, af) = ergodic_rates_asymptotic(cfg, spec.mode, p)?;
        let mut row = vec![
            db.into(),
            n.into(),
            f.into(),
            (n + f).into(),
            an.into(),
            af.into(),
            (an + af).into(),
        ];
        if with_mc {
            let s = simulate(cfg, spec.mode, p, spec.trials, spec.seed)?;
            row.extend([
                s.ecr_n.value.into(),
                s.ecr_f.value.into(),
                (s.ecr_n.value + s.ecr_f.value).into(),
                s.ecr_n.std_error.into(),
                s.ecr_f.std_error.into(),
            ]);
        }
        table.push(row);
    }
    Ok(CommandOutput {
        table,
        warnings: Vec::new(),
    })
}

/// Sensing-rate sweep for ISAC and for FDSAC with `split`.
pub fn cmd_sensing(
    cfg: &SystemConfig,
    spec: &SweepSpec,
    split: ResourceSplit,
) -> Result<CommandOutput, CliError> {
    spec.validate()?;
    let fd = Mode::Fdsac(split);
    let meta = json!({
        "command": "sensing",
        "config": cfg,
        "fdsac": mode_meta(fd),
        "snr_db_min": spec.snr_db_min,
        "snr_db_max": spec.snr_db_max,
        "snr_db_step": spec.snr_db_step,
    });
    let mut table = Table::new(
        &["snr_db", "sr_isac", "sr_isac_asym", "sr_fdsac", "sr_fdsac_asym"],
        meta,
    );
    let mut warnings = Vec::new();
    for db in spec.points_db() {
        let p = db_to_linear(db);
        let fd_asym = match sensing_rate_asymptotic(cfg, fd, p) {
            Ok(v) => Some(v),
            Err(e) => {
                if warnings.is_empty() {
                    warnings.push(format!("FDSAC sensing asymptote omitted: {e}"));
                }
                None
            }
        };
        table.push(vec![
            db.into(),
            sensing_rate(cfg, Mode::Isac, p)?.into(),
            sensing_rate_asymptotic(cfg, Mode::Isac, p)?.into(),
            sensing_rate(cfg, fd, p)?.into(),
            fd_asym.into(),
        ]);
    }
    Ok(CommandOutput { table, warnings })
}

fn grid_row(section: &str, g: &GridPoint) -> Vec<Cell> {
    vec![
        section.into(),
        g.kappa.into(),
        g.mu.into(),
        g.rate.rate_s.into(),
        g.rate.rate_c.into(),
    ]
}

/// ISAC corner, full FDSAC grid, its Pareto subset and the containment
/// verdict.
pub fn cmd_region(cfg: &SystemConfig, p_db: f64, grid_n: usize) -> Result<CommandOutput, CliError> {
    if !p_db.is_finite() {
        return Err(CliError::Usage("p-db must be finite".into()));
    }
    let p = db_to_linear(p_db);
    let corner = isac_corner(cfg, p)?;
    let frontier = fdsac_frontier(cfg, p, grid_n)?;
    let report = containment_of(&frontier, corner);

    let meta = json!({"command": "region", "config": cfg, "p_db": p_db, "grid_n": grid_n});
    let mut table = Table::new(&["section", "kappa", "mu", "rate_s", "rate_c"], meta);
    table.push(vec![
        "isac_corner".into(),
        Cell::Empty,
        Cell::Empty,
        corner.rate_s.into(),
        corner.rate_c.into(),
    ]);
    for g in &frontier.points {
        table.push(grid_row("grid", g));
    }
    for g in &frontier.pareto {
        table.push(grid_row("pareto", g));
    }
    let verdict = if report.holds { "contained" } else { "not contained" };
    table.trailer = Some((
        format!(
            "containment: {verdict} max_violation={}",
            crate::table::fmt_sig(report.max_violation)
        ),
        json!({"containment": verdict, "max_violation": report.max_violation}),
    ));
    let warnings = if report.holds {
        Vec::new()
    } else {
        vec![format!("FDSAC point exceeds the ISAC corner by {}", report.max_violation)]
    };
    Ok(CommandOutput { table, warnings })
}

#[derive(Debug, Clone)]
pub struct SelftestReport {
    pub outcomes: Vec<CheckOutcome>,
}

impl SelftestReport {
    pub fn all_passed(&self) -> bool {
        self.outcomes.iter().all(|o| o.passed)
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for o in &self.outcomes {
            out.push_str(&o.to_string());
            out.push('\n');
        }
        let passed = self.outcomes.iter().filter(|o| o.passed).count();
        out.push_str(&format!("{passed}/{} checks passed\n", self.outcomes.len()));
        out
    }
}

pub fn cmd_selftest(cfg: &SystemConfig, settings: CheckSettings) -> SelftestReport {
    SelftestReport {
        outcomes: run_all(cfg, settings),
    }
}
