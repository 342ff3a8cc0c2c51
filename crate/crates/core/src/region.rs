//! Sensing/communication rate regions.
//!
//! The ISAC region is the rectangle spanned by its sensing rate and sum
//! ergodic rate. The FDSAC region is the union of such rectangles over all
//! bandwidth/power splits `(κ, μ) ∈ [0,1]²`, sampled on a grid.

use std::f64::consts::LN_2;

use serde::Serialize;

use crate::analytic::{ergodic_rates, sensing_rate};
use crate::config::{Mode, ResourceSplit, SystemConfig};
use crate::error::{check_power, Error, Result};

/// Absolute slack allowed when checking that the ISAC corner dominates.
pub const CONTAINMENT_EPS: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RatePoint {
    pub rate_s: f64,
    /// Sum ergodic rate of both users.
    pub rate_c: f64,
}

impl RatePoint {
    /// True if `self` is at least as good as `other` in both coordinates and
    /// strictly better in one.
    pub fn dominates(&self, other: &RatePoint) -> bool {
        self.rate_s >= other.rate_s
            && self.rate_c >= other.rate_c
            && (self.rate_s > other.rate_s || self.rate_c > other.rate_c)
    }
}

/// One FDSAC operating point of the sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct GridPoint {
    pub kappa: f64,
    pub mu: f64,
    pub rate: RatePoint,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegionFrontier {
    /// Every grid point, `kappa` major, in ascending order of both factors.
    pub points: Vec<GridPoint>,
    /// Non-dominated subset, sorted by descending sensing rate.
    pub pareto: Vec<GridPoint>,
}

fn mode_point(cfg: &SystemConfig, mode: Mode, p: f64) -> Result<RatePoint> {
    let (n, f) = ergodic_rates(cfg, mode, p)?;
    Ok(RatePoint {
        rate_s: sensing_rate(cfg, mode, p)?,
        rate_c: n + f,
    })
}

/// Upper-right corner of the ISAC rectangle.
pub fn isac_corner(cfg: &SystemConfig, p: f64) -> Result<RatePoint> {
    check_power(p)?;
    mode_point(cfg, Mode::Isac, p)
}

/// `grid_n` evenly spaced values on `[0, 1]` with exact endpoints.
fn unit_grid(grid_n: usize) -> Vec<f64> {
    let last = (grid_n - 1) as f64;
    (0..grid_n).map(|i| i as f64 / last).collect()
}

pub fn fdsac_frontier(cfg: &SystemConfig, p: f64, grid_n: usize) -> Result<RegionFrontier> {
    check_power(p)?;
    if grid_n < 2 {
        return Err(Error::Domain(format!("grid_n must be at least 2, got {grid_n}")));
    }
    let axis = unit_grid(grid_n);
    let mut points = Vec::with_capacity(grid_n * grid_n);
    for &kappa in &axis {
        for &mu in &axis {
            let mode = Mode::Fdsac(ResourceSplit::new(kappa, mu)?);
            points.push(GridPoint {
                kappa,
                mu,
                rate: mode_point(cfg, mode, p)?,
            });
        }
    }
    let pareto = pareto_subset(&points);
    Ok(RegionFrontier { points, pareto })
}

/// Non-dominated points; exact duplicates are kept once.
pub fn pareto_subset(points: &[GridPoint]) -> Vec<GridPoint> {
    let mut sorted = points.to_vec();
    sorted.sort_by(|a, b| {
        b.rate
            .rate_s
            .total_cmp(&a.rate.rate_s)
            .then(b.rate.rate_c.total_cmp(&a.rate.rate_c))
    });
    let mut best_c = f64::NEG_INFINITY;
    let mut out = Vec::new();
    for g in sorted {
        if g.rate.rate_c > best_c {
            best_c = g.rate.rate_c;
            out.push(g);
        }
    }
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ContainmentReport {
    pub holds: bool,
    /// Largest coordinate excess of any grid point over the ISAC corner;
    /// negative when every point sits strictly inside.
    pub max_violation: f64,
    pub corner: RatePoint,
}

/// Checks that every sampled FDSAC point lies in the ISAC rectangle.
pub fn containment_check(cfg: &SystemConfig, p: f64, grid_n: usize) -> Result<ContainmentReport> {
    let corner = isac_corner(cfg, p)?;
    let frontier = fdsac_frontier(cfg, p, grid_n)?;
    Ok(containment_of(&frontier, corner))
}

pub fn containment_of(frontier: &RegionFrontier, corner: RatePoint) -> ContainmentReport {
    let max_violation = frontier
        .points
        .iter()
        .map(|g| (g.rate.rate_s - corner.rate_s).max(g.rate.rate_c - corner.rate_c))
        .fold(f64::NEG_INFINITY, f64::max);
    ContainmentReport {
        holds: max_violation <= CONTAINMENT_EPS,
        max_violation,
        corner,
    }
}

/// `f(x) = x ln(1 + a/(x+b))`, increasing on `[0, 1]` for `a > 0, b >= 0`.
pub fn bandwidth_scaled_log(x: f64, a: f64, b: f64) -> Result<f64> {
    if !(a > 0.0) || !(b >= 0.0) {
        return Err(Error::Domain(format!("need a > 0 and b >= 0, got a={a}, b={b}")));
    }
    if !(0.0..=1.0).contains(&x) {
        return Err(Error::Domain(format!("x must lie in [0, 1], got {x}")));
    }
    if x == 0.0 {
        return Ok(0.0);
    }
    Ok(x * (a / (x + b)).ln_1p())
}

/// `g_c(x) = ln(x + c) + c/(x + c)`, nondecreasing on `[0, ∞)` for `c >= 0`.
pub fn helper_g(c: f64, x: f64) -> f64 {
    (x + c).ln() + c / (x + c)
}

/// Both sides of the per-realization rate inequality behind the sum-rate
/// comparison: `κ log2(1 + y1/(κ+y2))` and `log2(1 + (y1/μ)/(1 + y2/μ))`.
pub fn split_rate_bound(kappa: f64, mu: f64, y1: f64, y2: f64) -> (f64, f64) {
    let lhs = kappa * (y1 / (kappa + y2)).ln_1p() / LN_2;
    let rhs = ((y1 / mu) / (1.0 + y2 / mu)).ln_1p() / LN_2;
    (lhs, rhs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::db_to_linear;

    fn cfg() -> SystemConfig {
        SystemConfig::default()
    }

    #[test]
    fn corner_without_targets() {
        let c = SystemConfig {
            sensing_eigenvalues: vec![0.0; 8],
            ..cfg()
        };
        let p = db_to_linear(5.0);
        let blind = isac_corner(&c, p).unwrap();
        let normal = isac_corner(&cfg(), p).unwrap();
        assert_eq!(blind.rate_s, 0.0);
        assert_eq!(blind.rate_c, normal.rate_c);
        assert!(isac_corner(&c, 0.0).is_err());
        let rep = containment_check(&c, p, 11).unwrap();
        assert!(rep.holds);
    }

    #[test]
    fn grid_endpoint_equalities() {
        let c = cfg();
        let p = db_to_linear(5.0);
        let corner = isac_corner(&c, p).unwrap();
        let fr = fdsac_frontier(&c, p, 5).unwrap();
        assert_eq!(fr.points.len(), 25);
        let at = |k: f64, m: f64| fr.points.iter().find(|g| g.kappa == k && g.mu == m).unwrap().rate;
        let full_comm = at(1.0, 1.0);
        assert!((full_comm.rate_c - corner.rate_c).abs() < 1e-9);
        assert_eq!(full_comm.rate_s, 0.0);
        let full_sense = at(0.0, 0.0);
        assert!((full_sense.rate_s - corner.rate_s).abs() < 1e-9);
        assert_eq!(full_sense.rate_c, 0.0);
    }

    #[test]
    fn pareto_set_has_no_dominated_points() {
        let fr = fdsac_frontier(&cfg(), db_to_linear(5.0), 21).unwrap();
        assert!(!fr.pareto.is_empty() && fr.pareto.len() <= fr.points.len());
        for a in &fr.pareto {
            for b in &fr.points {
                assert!(!b.rate.dominates(&a.rate));
            }
        }
    }

    #[test]
    fn pareto_dedupes_and_drops_ties() {
        let g = |s, c| GridPoint {
            kappa: 0.0,
            mu: 0.0,
            rate: RatePoint { rate_s: s, rate_c: c },
        };
        let pts = [g(1.0, 1.0), g(1.0, 1.0), g(1.0, 0.5), g(0.5, 2.0), g(0.2, 2.0)];
        let p = pareto_subset(&pts);
        assert_eq!(p.len(), 2);
        assert_eq!(p[0].rate, RatePoint { rate_s: 1.0, rate_c: 1.0 });
        assert_eq!(p[1].rate, RatePoint { rate_s: 0.5, rate_c: 2.0 });
    }

    #[test]
    fn grid_size_checked() {
        assert!(fdsac_frontier(&cfg(), 1.0, 1).is_err());
        assert!(fdsac_frontier(&cfg(), 0.0, 3).is_err());
    }

    #[test]
    fn containment_at_reference_point() {
        let rep = containment_check(&cfg(), db_to_linear(5.0), 101).unwrap();
        assert!(rep.holds, "max violation {}", rep.max_violation);
    }

    #[test]
    fn bandwidth_scaled_log_basics() {
        assert_eq!(bandwidth_scaled_log(0.0, 1.0, 0.0).unwrap(), 0.0);
        assert!((bandwidth_scaled_log(1.0, 1.0, 0.0).unwrap() - 2f64.ln()).abs() < 1e-15);
        assert!(bandwidth_scaled_log(0.5, 0.0, 0.0).is_err());
        assert!(bandwidth_scaled_log(0.5, 1.0, -1.0).is_err());
        assert!(bandwidth_scaled_log(1.5, 1.0, 0.0).is_err());
    }

    #[test]
    fn split_bound_equality_at_full_allocation() {
        let (l, r) = split_rate_bound(1.0, 1.0, 3.0, 0.5);
        assert!((l - r).abs() < 1e-15);
    }
}
