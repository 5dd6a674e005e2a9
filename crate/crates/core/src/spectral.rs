//! Spectral stability of locked fronts in exponentially weighted spaces.
//!
//! Ahead of the interface the linearized locked map acts as a convolution,
//! so its essential spectrum is the closed curve `λ(k)` traced by the
//! symbol at `z = γ̄ e^{ik}`. Behind the interface `g' = 0` and the state one
//! contributes only the point `0`, which needs no computation.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{decay_rates_for_speed, DecayPair};
use crate::model::{LinearParams, RationalSpeed};
use crate::roots::{char_roots_with, RootTolerances};

/// Sup norm weighted by `γ̄^{-i}` ahead of the interface.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightedSpace {
    weight_rate: f64,
}

impl WeightedSpace {
    /// `γ̄ = 1` is the unweighted space.
    pub fn new(weight_rate: f64) -> Result<Self> {
        if !(weight_rate > 0.0 && weight_rate <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "weight rate {weight_rate} outside (0, 1]"
            )));
        }
        Ok(Self { weight_rate })
    }

    pub fn weight_rate(&self) -> f64 {
        self.weight_rate
    }

    /// Geometric mean of the two decay rates.
    pub fn between(pair: &DecayPair) -> Result<Self> {
        Self::new((pair.gamma_s * pair.gamma_w).sqrt())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SpectrumCurve {
    pub k_samples: Vec<f64>,
    pub lambda_values: Vec<Complex64>,
    pub lambda_max_modulus: f64,
}

pub const MIN_K_SAMPLES: usize = 16;

fn symbol(lp: &LinearParams, speed: RationalSpeed, z: Complex64) -> Complex64 {
    z.powi(speed.p() as i32) * (lp.a() / z + lp.b() + lp.a() * z).powi(speed.q() as i32)
}

/// Boundary of the essential spectrum in the weighted space.
pub fn essential_spectrum_curve(
    lp: &LinearParams,
    speed: RationalSpeed,
    space: WeightedSpace,
    k_count: usize,
) -> Result<SpectrumCurve> {
    if k_count < MIN_K_SAMPLES {
        return Err(Error::InvalidParameter(format!(
            "need at least {MIN_K_SAMPLES} k samples"
        )));
    }
    let k_samples: Vec<f64> = (0..k_count)
        .map(|i| 2.0 * PI * i as f64 / k_count as f64)
        .collect();
    let lambda_values: Vec<Complex64> = k_samples
        .iter()
        .map(|&k| symbol(lp, speed, Complex64::from_polar(space.weight_rate, k)))
        .collect();
    let lambda_max_modulus = lambda_values.iter().map(|l| l.norm()).fold(0.0, f64::max);
    Ok(SpectrumCurve {
        k_samples,
        lambda_values,
        lambda_max_modulus,
    })
}

/// `λ_max(γ̄) = P(γ̄)^q / γ̄^(q-p)`, the curve's value at `k = 0`.
pub fn lambda_max(lp: &LinearParams, speed: RationalSpeed, weight_rate: f64) -> f64 {
    let q = speed.q() as f64;
    let n = speed.n() as f64;
    (q * lp.trinomial_real(weight_rate).ln() - n * weight_rate.ln()).exp()
}

/// `1 - λ_max` at the geometric-mean weight; positive means the essential
/// spectrum lies inside the unit disk.
pub fn stability_margin(lp: &LinearParams, speed: RationalSpeed) -> Result<f64> {
    let pair = decay_rates_for_speed(lp, speed)?;
    stability_margin_from(lp, speed, &pair)
}

pub fn stability_margin_from(
    lp: &LinearParams,
    speed: RationalSpeed,
    pair: &DecayPair,
) -> Result<f64> {
    if pair.degenerate {
        return Err(Error::Degenerate(
            "decay rates coincide at the tongue tip".into(),
        ));
    }
    let space = WeightedSpace::between(pair)?;
    Ok(1.0 - lambda_max(lp, speed, space.weight_rate))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SampleVerdict {
    pub lambda: Complex64,
    /// Roots with `|γ| ≤ γ_s (1 + slack)`.
    pub inside: usize,
    /// Smallest pairwise distance between inside roots, relative to their largest modulus.
    pub min_separation: f64,
    pub excluded: bool,
    pub note: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScanTolerances {
    pub roots: RootTolerances,
    /// Relative slack on the `γ_s` radius.
    pub radius_slack: f64,
    /// Minimum relative separation of the inside roots.
    pub separation: f64,
}

impl Default for ScanTolerances {
    fn default() -> Self {
        Self {
            roots: RootTolerances::default(),
            radius_slack: 1e-9,
            separation: 1e-8,
        }
    }
}

/// Sixteen equispaced angles on each of the rings `|λ| = 1` and `|λ| = 1.5`.
pub fn default_ring() -> Vec<Complex64> {
    [1.0, 1.5]
        .iter()
        .flat_map(|&rho| {
            (0..16).map(move |i| Complex64::from_polar(rho, 2.0 * PI * i as f64 / 16.0))
        })
        .collect()
}

pub fn point_spectrum_scan(
    lp: &LinearParams,
    speed: RationalSpeed,
    samples: &[Complex64],
) -> Result<Vec<SampleVerdict>> {
    point_spectrum_scan_with(lp, speed, samples, &ScanTolerances::default())
}

/// For each `λ` with `|λ| ≥ 1`, check that exactly `N` characteristic roots lie
/// in the disk of radius `γ_s` and that they are distinct, so the decaying
/// part of any eigenfunction would have to solve a nonsingular Vandermonde
/// system with zero data.
pub fn point_spectrum_scan_with(
    lp: &LinearParams,
    speed: RationalSpeed,
    samples: &[Complex64],
    tol: &ScanTolerances,
) -> Result<Vec<SampleVerdict>> {
    if let Some(l) = samples.iter().find(|l| !(l.norm() >= 1.0)) {
        return Err(Error::InvalidParameter(format!(
            "sample λ = {l} lies inside the unit disk"
        )));
    }
    let pair = decay_rates_for_speed(lp, speed)?;
    let radius = pair.gamma_s * (1.0 + tol.radius_slack);
    let n = speed.n() as usize;
    Ok(samples
        .par_iter()
        .map(|&lambda| {
            let roots = match char_roots_with(lp, speed, lambda, &tol.roots) {
                Ok(r) => r,
                Err(e) => {
                    return SampleVerdict {
                        lambda,
                        inside: 0,
                        min_separation: 0.0,
                        excluded: false,
                        note: Some(e.to_string()),
                    }
                }
            };
            let inner: Vec<Complex64> = roots.into_iter().filter(|g| g.norm() <= radius).collect();
            let scale = inner.iter().map(|g| g.norm()).fold(0.0, f64::max);
            let mut min_separation = f64::INFINITY;
            for i in 0..inner.len() {
                for j in (i + 1)..inner.len() {
                    min_separation = min_separation.min((inner[i] - inner[j]).norm() / scale);
                }
            }
            let note = if inner.len() != n {
                Some(format!("{} roots inside radius, expected {n}", inner.len()))
            } else if min_separation <= tol.separation {
                Some(format!(
                    "inside roots nearly coincide ({min_separation:.3e})"
                ))
            } else {
                None
            };
            SampleVerdict {
                lambda,
                inside: inner.len(),
                min_separation,
                excluded: note.is_none(),
                note,
            }
        })
        .collect())
}
