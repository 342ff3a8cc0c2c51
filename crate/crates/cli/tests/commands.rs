use std::process::Command;

use noma_isac::{Mode, ResourceSplit, SystemConfig};
use noma_isac_cli::{
    cmd_ecr, cmd_outage, cmd_region, cmd_selftest, cmd_sensing, parse_config, Format, SweepSpec,
};

fn fdsac(k: f64, m: f64) -> Mode {
    Mode::Fdsac(ResourceSplit::new(k, m).unwrap())
}

fn spec(mode: Mode) -> SweepSpec {
    SweepSpec {
        mode,
        ..SweepSpec::default()
    }
}

#[test]
fn isac_outage_never_exceeds_fdsac() {
    let cfg = SystemConfig::default();
    let a = cmd_outage(&cfg, &spec(Mode::Isac)).unwrap().table;
    let b = cmd_outage(&cfg, &spec(fdsac(0.5, 0.5))).unwrap().table;
    for col in ["pout_n_analytic", "pout_f_analytic"] {
        for (x, y) in a.numbers(col).unwrap().iter().zip(b.numbers(col).unwrap()) {
            assert!(*x <= y, "{col}: {x} > {y}");
        }
    }
}

#[test]
fn ecr_shapes() {
    let cfg = SystemConfig::default();
    let isac = cmd_ecr(&cfg, &spec(Mode::Isac)).unwrap().table;
    let fd = cmd_ecr(&cfg, &spec(fdsac(0.5, 0.5))).unwrap().table;
    let n_isac = isac.numbers("ecr_n_analytic").unwrap();
    let n_fd = fd.numbers("ecr_n_analytic").unwrap();
    assert!(n_isac.iter().zip(&n_fd).all(|(a, b)| a > b));

    // far user saturates: last 5 dB step adds almost nothing
    let f = isac.numbers("ecr_f_analytic").unwrap();
    assert!(f[f.len() - 1] - f[f.len() - 2] < 0.1);

    // sum rate grows by ~log2(10^0.5) per 5 dB at high SNR
    let s = isac.numbers("ecr_sum_analytic").unwrap();
    let slope = (s[s.len() - 1] - s[s.len() - 2]) / (0.5 * 10f64.log2());
    assert!((0.95..=1.05).contains(&slope), "{slope}");
}

#[test]
fn far_user_asymptote_close_at_high_snr() {
    let cfg = SystemConfig::default();
    let t = cmd_ecr(&cfg, &spec(Mode::Isac)).unwrap().table;
    let exact = *t.numbers("ecr_f_analytic").unwrap().last().unwrap();
    let asym = *t.numbers("ecr_f_asym").unwrap().last().unwrap();
    assert!((asym / exact - 1.0).abs() < 0.02, "{asym} vs {exact}");
}

#[test]
fn sensing_columns() {
    let cfg = SystemConfig::default();
    let t = cmd_sensing(&cfg, &SweepSpec::default(), ResourceSplit::new(0.5, 0.5).unwrap())
        .unwrap()
        .table;
    let i = t.numbers("sr_isac").unwrap();
    let f = t.numbers("sr_fdsac").unwrap();
    assert!(i.iter().zip(&f).all(|(a, b)| a >= b));

    let all_sensing = ResourceSplit::new(0.0, 0.0).unwrap();
    let t = cmd_sensing(&cfg, &SweepSpec::default(), all_sensing).unwrap().table;
    assert_eq!(t.numbers("sr_isac"), t.numbers("sr_fdsac"));
}

#[test]
fn monte_carlo_columns_only_when_requested() {
    let cfg = SystemConfig::default();
    let t = cmd_outage(&cfg, &SweepSpec::default()).unwrap().table;
    assert!(t.column("pout_n_mc").is_none());
    let with = SweepSpec {
        trials: 2000,
        snr_db_max: 10.0,
        ..SweepSpec::default()
    };
    let t = cmd_outage(&cfg, &with).unwrap().table;
    assert_eq!(t.numbers("pout_n_mc").unwrap().len(), 3);
    let t = cmd_ecr(&cfg, &with).unwrap().table;
    assert!(t.column("mc_stderr_f").is_some());
}

#[test]
fn region_output() {
    let cfg = SystemConfig::default();
    let out = cmd_region(&cfg, 5.0, 21).unwrap();
    assert!(out.warnings.is_empty());
    let csv = out.table.render(Format::Csv);
    assert!(csv.contains("grid,0,0,"));
    assert!(csv.contains("grid,1,1,"));
    assert!(csv.lines().last().unwrap().starts_with("# containment: contained"));
    let grid = csv.lines().filter(|l| l.starts_with("grid,")).count();
    let pareto = csv.lines().filter(|l| l.starts_with("pareto,")).count();
    assert_eq!(grid, 21 * 21);
    assert!(pareto >= 1 && pareto <= grid);

    let json = out.table.render(Format::Json);
    let last: serde_json::Value = serde_json::from_str(json.lines().last().unwrap()).unwrap();
    assert_eq!(last["containment"], "contained");
}

#[test]
fn json_lines_parse() {
    let cfg = SystemConfig::default();
    let json = cmd_outage(&cfg, &SweepSpec::default()).unwrap().table.render(Format::Json);
    let lines: Vec<serde_json::Value> =
        json.lines().map(|l| serde_json::from_str(l).unwrap()).collect();
    assert_eq!(lines[0]["meta"]["command"], "outage");
    assert_eq!(lines.len(), 1 + 9);
    assert_eq!(lines[1]["snr_db"], 0.0);
}

#[test]
fn corrupted_config_is_rejected() {
    assert!(parse_config("alpha_n = 0.9\nalpha_f = 0.1\n").is_err());
    assert!(parse_config("rho1 = -1\n").is_err());
    assert!(parse_config("bogus = 1\n").is_err());
}

#[test]
fn selftest_fails_for_degenerate_config() {
    // infeasible far-user target: closed forms and simulation both give
    // certain outage, but the asymptotic checks cannot be evaluated
    let cfg = SystemConfig {
        target_rate_f: 3.0,
        ..SystemConfig::default()
    };
    let report = cmd_selftest(
        &cfg,
        noma_isac::checks::CheckSettings {
            trials: 2000,
            seed: 1,
        },
    );
    assert!(!report.all_passed());
    assert!(report.render().contains("[FAIL]"));
}

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_noma-isac"))
}

#[test]
fn binary_exit_codes() {
    assert_eq!(bin().arg("--help").output().unwrap().status.code(), Some(0));
    assert_eq!(bin().arg("nonsense").output().unwrap().status.code(), Some(1));
    let out = bin()
        .args(["outage", "--snr-db-min", "10", "--snr-db-max", "0"])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&out.stderr).contains("error"));

    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.cfg");
    std::fs::write(&cfg, "alpha_n = 0.7\nalpha_f = 0.3\n").unwrap();
    let out = bin()
        .args(["ecr", "--config", cfg.to_str().unwrap()])
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(1));
}

#[test]
fn binary_writes_output_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("sr.json");
    let st = bin()
        .args(["sensing", "--format", "json", "--output", path.to_str().unwrap()])
        .status()
        .unwrap();
    assert!(st.success());
    let text = std::fs::read_to_string(&path).unwrap();
    assert_eq!(text.lines().count(), 10);
}
