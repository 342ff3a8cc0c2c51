//! `key = value` configuration files.
//!
//! Keys are the [`SystemConfig`] field names. `sensing_eigenvalues` takes a
//! comma- or space-separated list. A target scene can be given instead with
//! repeated `target.strength` / `target.aoa` lines (paired in order); its
//! correlation matrix spectrum then becomes the sensing eigenvalues. Keys
//! not present keep their default values.

use std::collections::HashSet;
use std::path::Path;

use noma_isac::channel::{build_correlation, Target, TargetScene};
use noma_isac::{validate_config, SystemConfig};

use crate::CliError;

/// Relative eigenvalue cutoff when deriving a spectrum from a scene.
const SCENE_RANK_TOL: f64 = 1e-9;

pub fn load_config(path: &Path) -> Result<SystemConfig, CliError> {
    let text = std::fs::read_to_string(path).map_err(|source| CliError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_config(&text)
}

pub fn parse_config(text: &str) -> Result<SystemConfig, CliError> {
    let mut cfg = SystemConfig::default();
    let mut seen = HashSet::new();
    let mut strengths = Vec::new();
    let mut aoas = Vec::new();

    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let err = |msg: String| CliError::Parse { line: line_no, msg };
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (key, value) = line
            .split_once('=')
            .ok_or_else(|| err(format!("expected key = value, got {line:?}")))?;
        let (key, value) = (key.trim(), value.trim());

        let float = |v: &str| {
            v.parse::<f64>()
                .map_err(|_| err(format!("{key}: cannot parse {v:?} as a number")))
        };
        let count = |v: &str| {
            v.parse::<usize>()
                .map_err(|_| err(format!("{key}: cannot parse {v:?} as a positive integer")))
        };

        match key {
            "target.strength" => {
                strengths.push(float(value)?);
                continue;
            }
            "target.aoa" => {
                aoas.push(float(value)?);
                continue;
            }
            _ => {}
        }
        if !seen.insert(key.to_string()) {
            return Err(err(format!("duplicate key {key}")));
        }
        match key {
            "rho1" => cfg.rho1 = float(value)?,
            "rho2" => cfg.rho2 = float(value)?,
            "alpha_n" => cfg.alpha_n = float(value)?,
            "alpha_f" => cfg.alpha_f = float(value)?,
            "sigma2_c" => cfg.sigma2_c = float(value)?,
            "sigma2_s" => cfg.sigma2_s = float(value)?,
            "num_rx_antennas" => cfg.num_rx_antennas = count(value)?,
            "frame_length" => cfg.frame_length = count(value)?,
            "target_rate_n" => cfg.target_rate_n = float(value)?,
            "target_rate_f" => cfg.target_rate_f = float(value)?,
            "sensing_eigenvalues" => {
                cfg.sensing_eigenvalues = value
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|s| !s.is_empty())
                    .map(float)
                    .collect::<Result<_, _>>()?;
            }
            other => return Err(err(format!("unknown key {other}"))),
        }
    }

    if !strengths.is_empty() || !aoas.is_empty() {
        if strengths.len() != aoas.len() {
            return Err(CliError::Parse {
                line: 0,
                msg: format!(
                    "{} target.strength entries but {} target.aoa entries",
                    strengths.len(),
                    aoas.len()
                ),
            });
        }
        if seen.contains("sensing_eigenvalues") {
            return Err(CliError::Parse {
                line: 0,
                msg: "give either sensing_eigenvalues or target entries, not both".into(),
            });
        }
        let targets = strengths
            .into_iter()
            .zip(aoas)
            .map(|(strength, aoa)| Target { strength, aoa })
            .collect();
        let scene = TargetScene::new(targets)?;
        let corr = build_correlation(&scene, cfg.num_rx_antennas)?;
        cfg.sensing_eigenvalues = corr.spectrum(SCENE_RANK_TOL);
    }

    Ok(validate_config(cfg)?)
}
