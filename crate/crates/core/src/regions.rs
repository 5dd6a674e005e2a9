//! Locking-region boundaries in the `(m, c)` plane.
//!
//! For fixed `(r, m)` the speed-`p/q` front exists for `c_min < c < c_max`,
//! both bounds being affine in the sums `Γ_n` of the front solution.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::front::{FrontSolution, FrontTolerances};
use crate::linear::{m_star, MStar};
use crate::model::{LinearParams, RationalSpeed};

/// Grid endpoints stay this far (relative to `m*`) from `0` and `m*`.
pub const SWEEP_MARGIN: f64 = 1e-4;

/// Slack allowed when checking that `p̃ = p` and `p̃ = p + 1` are extremal.
const MONOTONICITY_SLACK: f64 = 1e-12;

/// Relative width below which two band edges cannot be told apart.
const RESOLUTION: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CBounds {
    pub c_min: f64,
    pub c_max: f64,
}

impl CBounds {
    pub fn width(&self) -> f64 {
        self.c_max - self.c_min
    }

    pub fn contains(&self, c: f64) -> bool {
        self.c_min < c && c < self.c_max
    }
}

/// Value of `u_{p̃}` one step before it must cross the threshold.
fn threshold_expression(sol: &FrontSolution, m: f64, p_tilde: u32) -> Result<f64> {
    let q = sol.speed.q();
    Ok(m / 2.0 + (1.0 - m) * sol.gamma_sum(p_tilde)? + m / 2.0 * sol.gamma_sum(p_tilde + q)?)
}

/// Band edges from an already solved front.
pub fn c_bounds_from(sol: &FrontSolution) -> Result<CBounds> {
    let m = sol.params.m();
    let (p, q) = (sol.speed.p(), sol.speed.q());
    let values: Vec<f64> = (1..=q)
        .map(|pt| threshold_expression(sol, m, pt))
        .collect::<Result<_>>()?;
    let c_max = values[p as usize - 1];
    let c_min = values[p as usize];
    let slack = |v: f64| MONOTONICITY_SLACK * v.abs();
    if let Some(pt) = (1..p).find(|&pt| values[pt as usize - 1] < c_max - slack(c_max)) {
        return Err(Error::Monotonicity(format!(
            "threshold expression at p̃ = {pt} falls below its value at p = {p}"
        )));
    }
    if let Some(pt) = (p + 2..=q).find(|&pt| values[pt as usize - 1] > c_min + slack(c_min)) {
        return Err(Error::Monotonicity(format!(
            "threshold expression at p̃ = {pt} exceeds its value at p + 1 = {}",
            p + 1
        )));
    }
    if !(c_min < c_max) {
        // c_min < c_max is the same statement as Γ_{p+1} < Γ_p.
        if c_min - c_max <= RESOLUTION * c_max.abs() {
            return Err(Error::Degenerate(format!(
                "band narrower than floating-point resolution at c = {c_max:.6e}"
            )));
        }
        return Err(Error::Monotonicity(format!(
            "c_min = {c_min} exceeds c_max = {c_max}"
        )));
    }
    Ok(CBounds { c_min, c_max })
}

pub fn c_bounds(lp: &LinearParams, speed: RationalSpeed) -> Result<CBounds> {
    c_bounds_with(lp, speed, &FrontTolerances::default())
}

pub fn c_bounds_with(
    lp: &LinearParams,
    speed: RationalSpeed,
    tol: &FrontTolerances,
) -> Result<CBounds> {
    c_bounds_from(&FrontSolution::solve_with(lp, speed, tol)?)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BandPoint {
    pub m: f64,
    /// `None` when the point failed; see `failure`.
    pub bounds: Option<CBounds>,
    /// `c_max > 1/r`: the upper part of the band violates `rc ≤ 1`.
    pub rc_incompatible: bool,
    pub failure: Option<String>,
}

impl BandPoint {
    /// Band intersected with the admissible thresholds `(0, 1/r]`.
    pub fn admissible(&self, r: f64) -> Option<CBounds> {
        self.bounds.map(|b| CBounds {
            c_min: b.c_min,
            c_max: b.c_max.min(1.0 / r),
        })
    }

    pub fn flags(&self) -> String {
        match (&self.failure, self.rc_incompatible) {
            (Some(e), _) => format!("error: {e}"),
            (None, true) => "rc_incompatible".to_string(),
            (None, false) => String::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LockingBand {
    pub speed: RationalSpeed,
    pub r: f64,
    pub m_star: MStar,
    pub points: Vec<BandPoint>,
}

impl LockingBand {
    pub fn m_grid(&self) -> Vec<f64> {
        self.points.iter().map(|p| p.m).collect()
    }

    pub fn failures(&self) -> usize {
        self.points.iter().filter(|p| p.failure.is_some()).count()
    }
}

/// `n` points on `[lo, hi]`, log-spaced on the lower half and linear on the upper.
pub fn sweep_grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    if n == 1 {
        return vec![lo];
    }
    let mid = 0.5 * (lo + hi);
    let n_log = n / 2;
    let n_lin = n - n_log;
    let (llo, lmid) = (lo.ln(), mid.ln());
    let mut grid: Vec<f64> = (0..n_log)
        .map(|i| {
            if i == 0 {
                lo
            } else {
                (llo + (lmid - llo) * i as f64 / n_log as f64).exp()
            }
        })
        .collect();
    let lin_start = if n_log == 0 { lo } else { mid };
    grid.extend((0..n_lin).map(|i| {
        if n_lin == 1 {
            hi
        } else {
            lin_start + (hi - lin_start) * i as f64 / (n_lin - 1) as f64
        }
    }));
    grid
}

fn band_point(r: f64, m: f64, speed: RationalSpeed, tol: &FrontTolerances) -> BandPoint {
    let result = LinearParams::new(r, m).and_then(|lp| c_bounds_with(&lp, speed, tol));
    match result {
        Ok(b) => BandPoint {
            m,
            bounds: Some(b),
            rc_incompatible: b.c_max * r > 1.0,
            failure: None,
        },
        Err(e) => BandPoint {
            m,
            bounds: None,
            rc_incompatible: false,
            failure: Some(e.to_string()),
        },
    }
}

pub fn region_sweep(r: f64, speed: RationalSpeed, m_count: usize) -> Result<LockingBand> {
    region_sweep_with(r, speed, m_count, &FrontTolerances::default())
}

/// Evaluate the band on a grid strictly inside `(0, m*)`. Point failures are
/// recorded, never propagated.
pub fn region_sweep_with(
    r: f64,
    speed: RationalSpeed,
    m_count: usize,
    tol: &FrontTolerances,
) -> Result<LockingBand> {
    if m_count < 2 {
        return Err(Error::InvalidParameter(format!(
            "m_count must be at least 2, got {m_count}"
        )));
    }
    let ms = m_star(r, speed)?;
    let grid = sweep_grid(SWEEP_MARGIN * ms.m, (1.0 - SWEEP_MARGIN) * ms.m, m_count);
    let points = grid
        .par_iter()
        .map(|&m| band_point(r, m, speed, tol))
        .collect();
    Ok(LockingBand {
        speed,
        r,
        m_star: ms,
        points,
    })
}

/// Small-`m` slopes `(c_min/m, c_max/m)` of the speed-`1/q` band.
pub fn asymptotic_c_bounds_1q(r: f64, q: u32) -> (f64, f64) {
    let partial = |n: u32| (0..n).map(|j| r.powi(j as i32)).sum::<f64>() / 2.0;
    (partial(q - 1), partial(q))
}

/// Band edges on a log-spaced grid over `m_range`; fails if any point fails.
pub fn width_samples(
    r: f64,
    speed: RationalSpeed,
    m_range: (f64, f64),
    points: usize,
    tol: &FrontTolerances,
) -> Result<Vec<(f64, CBounds)>> {
    let (lo, hi) = m_range;
    if points < 4 {
        return Err(Error::InvalidParameter(format!(
            "need at least 4 points, got {points}"
        )));
    }
    if !(lo > 0.0 && lo < hi) {
        return Err(Error::InvalidParameter(format!("bad m range [{lo}, {hi}]")));
    }
    (0..points)
        .into_par_iter()
        .map(|i| {
            let m = (lo.ln() + (hi.ln() - lo.ln()) * i as f64 / (points - 1) as f64).exp();
            Ok((m, c_bounds_with(&LinearParams::new(r, m)?, speed, tol)?))
        })
        .collect()
}

/// Least-squares slope of `ln y` against `ln x`.
pub fn log_log_slope(samples: &[(f64, f64)]) -> f64 {
    let logs: Vec<(f64, f64)> = samples.iter().map(|(x, y)| (x.ln(), y.ln())).collect();
    let n = logs.len() as f64;
    let mx = logs.iter().map(|s| s.0).sum::<f64>() / n;
    let my = logs.iter().map(|s| s.1).sum::<f64>() / n;
    let sxy: f64 = logs.iter().map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = logs.iter().map(|(x, _)| (x - mx).powi(2)).sum();
    sxy / sxx
}

/// Exponent of `c_max - c_min ~ m^k` fitted on a log grid.
pub fn width_scaling_exponent(
    r: f64,
    speed: RationalSpeed,
    m_range: (f64, f64),
    points: usize,
) -> Result<f64> {
    let samples = width_samples(r, speed, m_range, points, &FrontTolerances::default())?;
    let widths: Vec<(f64, f64)> = samples.iter().map(|(m, b)| (*m, b.width())).collect();
    Ok(log_log_slope(&widths))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn speed(p: u32, q: u32) -> RationalSpeed {
        RationalSpeed::new(p, q).unwrap()
    }

    #[test]
    fn asymptotic_slopes() {
        let (lo, hi) = asymptotic_c_bounds_1q(1.2, 3);
        assert!((lo - 1.1).abs() < 1e-15 && (hi - 1.82).abs() < 1e-14);
        let (lo, hi) = asymptotic_c_bounds_1q(1.7, 2);
        assert_eq!(lo, 0.5);
        assert!((hi - 1.35).abs() < 1e-15);
        for q in 2..8 {
            let (lo, hi) = asymptotic_c_bounds_1q(1.3, q);
            assert!((hi - lo - 1.3f64.powi(q as i32 - 1) / 2.0).abs() < 1e-13);
        }
    }

    #[test]
    fn speed_half_bounds_in_closed_form() {
        // One root: Γ_n = γ^(n/2), so c_max = m/2 + (1-m)√γ + (m/2)γ√γ and
        // c_min = m/2 + (1-m)γ + (m/2)γ².
        let lp = LinearParams::new(1.2, 0.3).unwrap();
        let sol = FrontSolution::solve(&lp, speed(1, 2)).unwrap();
        let g = sol.roots.gammas[0].re;
        let b = c_bounds_from(&sol).unwrap();
        let m = 0.3;
        assert!(
            (b.c_max - (m / 2.0 + (1.0 - m) * g.sqrt() + m / 2.0 * g * g.sqrt())).abs() < 1e-14
        );
        assert!((b.c_min - (m / 2.0 + (1.0 - m) * g + m / 2.0 * g * g)).abs() < 1e-14);
    }

    #[test]
    fn speed_third_small_m_slopes() {
        let m = 1e-3;
        let b = c_bounds(&LinearParams::new(1.2, m).unwrap(), speed(1, 3)).unwrap();
        assert!((b.c_max / m / 1.82 - 1.0).abs() < 0.01);
        assert!((b.c_min / m / 1.1 - 1.0).abs() < 0.01);
    }

    #[test]
    fn grid_is_increasing_and_spans_the_range() {
        for n in 2..12 {
            let g = sweep_grid(1e-4, 0.5, n);
            assert_eq!(g.len(), n);
            assert!(g.windows(2).all(|w| w[0] < w[1]), "{g:?}");
            assert_eq!(g[0], 1e-4);
            assert_eq!(*g.last().unwrap(), 0.5);
        }
    }

    #[test]
    fn sweep_bands_are_ordered() {
        let band = region_sweep(1.2, speed(1, 3), 16).unwrap();
        assert_eq!(band.failures(), 0);
        for p in &band.points {
            let b = p.bounds.unwrap();
            assert!(b.c_min < b.c_max && b.c_min > 0.0);
            assert!(p.m > 0.0 && p.m < band.m_star.m);
        }
        assert!(region_sweep(1.2, speed(1, 3), 1).is_err());
    }

    #[test]
    fn above_tip_is_rejected() {
        let ms = m_star(1.3, speed(1, 3)).unwrap().m;
        let lp = LinearParams::new(1.3, ms * 1.01).unwrap();
        assert!(matches!(
            c_bounds(&lp, speed(1, 3)),
            Err(Error::BelowSpreadingSpeed { .. })
        ));
    }

    #[test]
    fn log_log_slope_of_power_law() {
        let pts: Vec<(f64, f64)> = (1..6)
            .map(|i| (i as f64, 3.0 * (i as f64).powf(2.5)))
            .collect();
        assert!((log_log_slope(&pts) - 2.5).abs() < 1e-12);
    }

    #[test]
    fn width_exponent_speed_third() {
        let slope = width_scaling_exponent(1.2, speed(1, 3), (1e-4, 1e-2), 8).unwrap();
        assert!((slope - 1.0).abs() < 0.05, "{slope}");
    }
}
