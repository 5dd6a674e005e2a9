//! Parameter sweeps that pair simulation with band theory.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::front::FrontTolerances;
use crate::model::{LinearParams, Params, RationalSpeed};
use crate::regions::{c_bounds_with, CBounds};
use crate::sim::{classify_speed, simulate_speed, SimConfig, SpeedMeasurement};

/// `n ≥ 2` evenly spaced points on `[lo, hi]`, endpoints exact.
pub fn linspace(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| {
            if i + 1 == n {
                hi
            } else {
                lo + (hi - lo) * i as f64 / (n - 1) as f64
            }
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StaircasePoint {
    pub m: f64,
    pub measurement: Option<SpeedMeasurement>,
    pub error: Option<String>,
}

impl StaircasePoint {
    pub fn speed(&self) -> Option<f64> {
        self.measurement.map(|x| x.measured_speed)
    }
}

/// Measured speed along an `m` grid at fixed `(r, c)`.
pub fn staircase(r: f64, c: f64, m_grid: &[f64], sim: &SimConfig) -> Vec<StaircasePoint> {
    m_grid
        .par_iter()
        .map(
            |&m| match Params::new(r, m, c).and_then(|p| simulate_speed(&p, sim)) {
                Ok(meas) => StaircasePoint {
                    m,
                    measurement: Some(meas),
                    error: None,
                },
                Err(e) => StaircasePoint {
                    m,
                    measurement: None,
                    error: Some(e.to_string()),
                },
            },
        )
        .collect()
}

/// Maximal runs of consecutive grid points locked at `speed`, as `(m_first, m_last)`.
/// Runs shorter than `min_len` points are dropped.
pub fn plateaus(
    points: &[StaircasePoint],
    speed: RationalSpeed,
    tol: f64,
    min_len: usize,
) -> Vec<(f64, f64)> {
    let mut out = Vec::new();
    let mut run: Option<(f64, f64, usize)> = None;
    for p in points {
        let hit = p.speed().is_some_and(|s| (s - speed.value()).abs() <= tol);
        run = match (run, hit) {
            (Some((a, _, n)), true) => Some((a, p.m, n + 1)),
            (None, true) => Some((p.m, p.m, 1)),
            (Some((a, b, n)), false) => {
                if n >= min_len {
                    out.push((a, b));
                }
                None
            }
            (None, false) => None,
        };
    }
    if let Some((a, b, n)) = run {
        if n >= min_len {
            out.push((a, b));
        }
    }
    out
}

/// Grid points where `c` lies inside the speed's band, as maximal `(m_first, m_last)` runs.
pub fn theory_intervals(
    r: f64,
    c: f64,
    speed: RationalSpeed,
    m_grid: &[f64],
    tol: &FrontTolerances,
) -> Vec<(f64, f64)> {
    let inside: Vec<bool> = m_grid
        .par_iter()
        .map(|&m| {
            LinearParams::new(r, m)
                .and_then(|lp| c_bounds_with(&lp, speed, tol))
                .is_ok_and(|b| b.contains(c))
        })
        .collect();
    let mut out = Vec::new();
    let mut start = None;
    for (i, &hit) in inside.iter().enumerate() {
        match (start, hit) {
            (None, true) => start = Some(i),
            (Some(s), false) => {
                out.push((m_grid[s], m_grid[i - 1]));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        out.push((m_grid[s], m_grid[m_grid.len() - 1]));
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CompareCell {
    pub m: f64,
    pub c: f64,
    pub measured_speed: Option<f64>,
    pub locked: bool,
    pub theory_inside: bool,
    /// A neighbouring cell (including diagonals) sits on the other side of a band edge.
    pub boundary_adjacent: bool,
    pub error: Option<String>,
}

impl CompareCell {
    pub fn agrees(&self) -> bool {
        self.locked == self.theory_inside
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Comparison {
    pub speed: RationalSpeed,
    pub m_grid: Vec<f64>,
    pub c_grid: Vec<f64>,
    /// Row-major in `m`, then `c`.
    pub cells: Vec<CompareCell>,
    pub bands: Vec<Option<CBounds>>,
}

impl Comparison {
    pub fn agreement(&self) -> f64 {
        self.cells.iter().filter(|c| c.agrees()).count() as f64 / self.cells.len() as f64
    }

    pub fn disagreements(&self) -> impl Iterator<Item = &CompareCell> {
        self.cells.iter().filter(|c| !c.agrees())
    }

    /// Every disagreement sits next to a band edge.
    pub fn disagreements_on_boundary(&self) -> bool {
        self.disagreements().all(|c| c.boundary_adjacent)
    }
}

/// Simulate every `(m, c)` cell and compare with band membership.
pub fn compare_grid(
    r: f64,
    speed: RationalSpeed,
    m_grid: &[f64],
    c_grid: &[f64],
    sim: &SimConfig,
    classify_tol: f64,
    tol: &FrontTolerances,
) -> Result<Comparison> {
    let bands: Vec<Option<CBounds>> = m_grid
        .par_iter()
        .map(|&m| {
            LinearParams::new(r, m)
                .and_then(|lp| c_bounds_with(&lp, speed, tol))
                .ok()
        })
        .collect();
    let (nm, nc) = (m_grid.len(), c_grid.len());
    let inside = |i: usize, j: usize| bands[i].is_some_and(|b| b.contains(c_grid[j]));

    let cells = (0..nm * nc)
        .into_par_iter()
        .map(|idx| {
            let (i, j) = (idx / nc, idx % nc);
            let (m, c) = (m_grid[i], c_grid[j]);
            let theory_inside = inside(i, j);
            let mut boundary_adjacent = false;
            for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (ni, nj) = (i as i64 + di, j as i64 + dj);
                    if ni >= 0 && nj >= 0 && (ni as usize) < nm && (nj as usize) < nc {
                        boundary_adjacent |= inside(ni as usize, nj as usize) != theory_inside;
                    }
                }
            }
            let sim_result = Params::new(r, m, c)
                .and_then(|p| simulate_speed(&p, sim))
                .and_then(|meas| {
                    let locked = classify_speed(&meas, speed, classify_tol)?;
                    Ok((meas.measured_speed, locked))
                });
            match sim_result {
                Ok((s, locked)) => CompareCell {
                    m,
                    c,
                    measured_speed: Some(s),
                    locked,
                    theory_inside,
                    boundary_adjacent,
                    error: None,
                },
                Err(e) => CompareCell {
                    m,
                    c,
                    measured_speed: None,
                    locked: false,
                    theory_inside,
                    boundary_adjacent,
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    Ok(Comparison {
        speed,
        m_grid: m_grid.to_vec(),
        c_grid: c_grid.to_vec(),
        cells,
        bands,
    })
}
