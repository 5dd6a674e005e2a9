//! Construction and certification of locked fronts.
//!
//! A speed-`p/q` front equals one behind the interface and
//! `φ_i = Σ_j k_j γ_j^i` ahead of it. The weights `k_j` solve an `N × N`
//! Vandermonde system in the inverse roots `ζ_j`, and every intermediate
//! generation is described by the sums `Γ_n = Σ_j k_j ζ_j^(-n)`.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{locked_map, Boundary, LinearParams, Params, RationalSpeed};
use crate::roots::{front_roots_with, FrontRoots, RootTolerances};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FrontTolerances {
    pub roots: RootTolerances,
    /// Minimum pairwise `|ζ_i - ζ_j|`, relative to `max |ζ|`.
    pub zeta_separation: f64,
    /// Product formula versus direct Vandermonde solve, relative to `max |k|`.
    pub coefficient_agreement: f64,
    /// Largest imaginary residue tolerated before discarding it.
    pub imag_residue: f64,
    /// `|Σ k_j - 1|`.
    pub normalization: f64,
}

impl Default for FrontTolerances {
    fn default() -> Self {
        Self {
            roots: RootTolerances::default(),
            zeta_separation: 1e-8,
            coefficient_agreement: 1e-10,
            imag_residue: 1e-10,
            normalization: 1e-12,
        }
    }
}

/// Vandermonde conditioning is reported above this many modes.
pub const CONDITION_REPORT_THRESHOLD: usize = 8;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Coefficients {
    /// Product-formula weights.
    pub ks: Vec<Complex64>,
    /// Weights from an LU solve of the Vandermonde system.
    pub direct_ks: Vec<Complex64>,
    /// `max_j |k_j - k_j^direct| / max_j |k_j|`.
    pub agreement: f64,
    pub min_zeta_separation: f64,
    /// 2-norm condition number, computed when `N > 8`.
    pub condition: Option<f64>,
}

fn vandermonde(zetas: &[Complex64]) -> DMatrix<Complex64> {
    let n = zetas.len();
    DMatrix::from_fn(n, n, |i, j| zetas[j].powi(i as i32))
}

/// `k_j = Π_{n≠j} (ζ_n - 1)/(ζ_n - ζ_j)`, cross-checked against a direct solve.
pub fn solve_coefficients(roots: &FrontRoots) -> Result<Coefficients> {
    solve_coefficients_with(roots, &FrontTolerances::default())
}

pub fn solve_coefficients_with(roots: &FrontRoots, tol: &FrontTolerances) -> Result<Coefficients> {
    let zetas = &roots.zetas;
    let n = zetas.len();
    if n == 0 {
        return Err(Error::InvalidParameter("no front roots".into()));
    }
    let scale = zetas.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let mut min_sep = f64::INFINITY;
    for i in 0..n {
        for j in (i + 1)..n {
            min_sep = min_sep.min((zetas[i] - zetas[j]).norm() / scale);
        }
    }
    if min_sep < tol.zeta_separation {
        return Err(Error::Degenerate(format!(
            "ζ values nearly coincide (separation {min_sep:.3e})"
        )));
    }

    let one = Complex64::new(1.0, 0.0);
    let ks: Vec<Complex64> = (0..n)
        .map(|j| {
            (0..n)
                .filter(|&l| l != j)
                .map(|l| (zetas[l] - one) / (zetas[l] - zetas[j]))
                .product()
        })
        .collect();

    let matrix = vandermonde(zetas);
    let condition = (n > CONDITION_REPORT_THRESHOLD).then(|| {
        let sv = matrix.clone().svd(false, false).singular_values;
        sv.max() / sv.min()
    });
    let rhs = DVector::from_element(n, one);
    let direct = matrix
        .lu()
        .solve(&rhs)
        .ok_or_else(|| Error::Numerical("Vandermonde matrix is singular".into()))?;
    let direct_ks: Vec<Complex64> = direct.iter().copied().collect();
    let k_scale = ks.iter().map(|k| k.norm()).fold(0.0, f64::max);
    let agreement = ks
        .iter()
        .zip(&direct_ks)
        .map(|(x, y)| (x - y).norm())
        .fold(0.0, f64::max)
        / k_scale;
    if !(agreement <= tol.coefficient_agreement) {
        return Err(Error::Numerical(format!(
            "product formula and Vandermonde solve disagree by {agreement:.3e}{}",
            condition
                .map(|c| format!(" (condition {c:.3e})"))
                .unwrap_or_default()
        )));
    }
    Ok(Coefficients {
        ks,
        direct_ks,
        agreement,
        min_zeta_separation: min_sep,
        condition,
    })
}

/// Roots and weights of a locked front; enough to evaluate any `Γ_n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontSolution {
    pub params: LinearParams,
    pub speed: RationalSpeed,
    pub roots: FrontRoots,
    pub coefficients: Coefficients,
    pub tolerances: FrontTolerances,
}

impl FrontSolution {
    pub fn solve(lp: &LinearParams, speed: RationalSpeed) -> Result<Self> {
        Self::solve_with(lp, speed, &FrontTolerances::default())
    }

    pub fn solve_with(
        lp: &LinearParams,
        speed: RationalSpeed,
        tol: &FrontTolerances,
    ) -> Result<Self> {
        let roots = front_roots_with(lp, speed, &tol.roots)?;
        let coefficients = solve_coefficients_with(&roots, tol)?;
        let solution = Self {
            params: *lp,
            speed,
            roots,
            coefficients,
            tolerances: *tol,
        };
        solution.check_weights()?;
        Ok(solution)
    }

    fn check_weights(&self) -> Result<()> {
        let ks = &self.coefficients.ks;
        let sum: Complex64 = ks.iter().sum();
        if (sum - 1.0).norm() > self.tolerances.normalization {
            return Err(Error::Numerical(format!("Σ k_j = {sum} differs from 1")));
        }
        let gammas = &self.roots.gammas;
        let k_scale = ks.iter().map(|k| k.norm()).fold(0.0, f64::max);
        for (j, g) in gammas.iter().enumerate() {
            let partner = (0..gammas.len())
                .min_by(|&x, &y| {
                    (gammas[x] - g.conj())
                        .norm()
                        .total_cmp(&(gammas[y] - g.conj()).norm())
                })
                .unwrap_or(j);
            if (ks[partner] - ks[j].conj()).norm() > self.tolerances.coefficient_agreement * k_scale
            {
                return Err(Error::Numerical(format!(
                    "weights k_{j} and k_{partner} are not conjugate"
                )));
            }
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.roots.len()
    }

    /// `Σ_j k_j ζ_j^(-n)` before discarding the imaginary part.
    pub fn gamma_sum_complex(&self, n: u32) -> Complex64 {
        self.coefficients
            .ks
            .iter()
            .zip(&self.roots.zetas)
            .map(|(k, z)| k * z.powi(-(n as i32)))
            .sum()
    }

    /// `Γ_n = Σ_j k_j γ_j^(n/q)`, with the fractional powers taken as `ζ_j^(-n)`.
    pub fn gamma_sum(&self, n: u32) -> Result<f64> {
        let v = self.gamma_sum_complex(n);
        if v.im.abs() > self.tolerances.imag_residue {
            return Err(Error::Numerical(format!(
                "Γ_{n} has imaginary residue {:.3e}",
                v.im
            )));
        }
        Ok(v.re)
    }

    /// Front value at lattice site `i` (generation zero).
    pub fn profile_value(&self, i: i64) -> Result<f64> {
        if i <= 0 {
            Ok(1.0)
        } else {
            self.gamma_sum(self.speed.q() * i as u32)
        }
    }
}

/// Window of lattice sites `-left ..= right` kept in a [`FrontProfile`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct WindowSpec {
    pub left: Option<usize>,
    pub right: Option<usize>,
}

impl WindowSpec {
    pub fn resolve(&self, speed: RationalSpeed) -> (usize, usize) {
        let q = speed.q() as usize;
        (
            self.left.unwrap_or(q + 2),
            self.right.unwrap_or((4 * q).max(40)),
        )
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontProfile {
    pub solution: FrontSolution,
    pub left: usize,
    pub right: usize,
    /// `φ_i` for `i = -left ..= right`.
    pub phi: Vec<f64>,
    /// `Γ_n` for `n = 0 ..= 2q + q·right`.
    pub gamma_sums: Vec<f64>,
    /// Largest imaginary residue discarded from `φ` and `Γ`.
    pub max_imag_residue: f64,
}

impl FrontProfile {
    pub fn speed(&self) -> RationalSpeed {
        self.solution.speed
    }

    pub fn params(&self) -> &LinearParams {
        &self.solution.params
    }

    pub fn sites(&self) -> impl Iterator<Item = (i64, f64)> + '_ {
        let left = self.left as i64;
        self.phi
            .iter()
            .enumerate()
            .map(move |(idx, &v)| (idx as i64 - left, v))
    }

    /// `φ_i`, falling back to the analytic tail outside the window.
    pub fn phi_at(&self, i: i64) -> Result<f64> {
        let idx = i + self.left as i64;
        match usize::try_from(idx).ok().and_then(|idx| self.phi.get(idx)) {
            Some(&v) => Ok(v),
            None => self.solution.profile_value(i),
        }
    }

    pub fn gamma(&self, n: usize) -> Option<f64> {
        self.gamma_sums.get(n).copied()
    }
}

pub fn build_front(lp: &LinearParams, speed: RationalSpeed) -> Result<FrontProfile> {
    build_front_with(
        lp,
        speed,
        WindowSpec::default(),
        &FrontTolerances::default(),
    )
}

/// Full pipeline: decay rates, roots, weights, profile window and `Γ_n` table.
pub fn build_front_with(
    lp: &LinearParams,
    speed: RationalSpeed,
    window: WindowSpec,
    tol: &FrontTolerances,
) -> Result<FrontProfile> {
    let solution = FrontSolution::solve_with(lp, speed, tol)?;
    let (left, right) = window.resolve(speed);
    let q = speed.q() as usize;
    let n_max = 2 * q + q * right;

    let mut max_imag: f64 = 0.0;
    let mut gamma_sums = Vec::with_capacity(n_max + 1);
    for n in 0..=n_max as u32 {
        let v = solution.gamma_sum_complex(n);
        max_imag = max_imag.max(v.im.abs());
        gamma_sums.push(v.re);
    }
    if max_imag > tol.imag_residue {
        return Err(Error::Numerical(format!(
            "imaginary residue {max_imag:.3e} in Γ_n"
        )));
    }

    let mut phi = vec![1.0; left + 1];
    for i in 1..=right {
        let v = gamma_sums[q * i];
        if !(v > 0.0) {
            return Err(Error::NotPositive {
                site: i as i64,
                value: v,
            });
        }
        phi.push(v);
    }
    Ok(FrontProfile {
        solution,
        left,
        right,
        phi,
        gamma_sums,
        max_imag_residue: max_imag,
    })
}

/// Sup-norm distance between `φ` and `S^p G^q φ` over the boundary-free part
/// of the window.
pub fn fixed_point_residual(
    profile: &FrontProfile,
    params: &Params,
    speed: RationalSpeed,
) -> Result<f64> {
    if params.linear() != profile.params() {
        return Err(Error::InvalidParameter(
            "profile was built for different (r, m)".into(),
        ));
    }
    if speed != profile.speed() {
        return Err(Error::InvalidParameter(format!(
            "profile has speed {}, asked for {speed}",
            profile.speed()
        )));
    }
    let tail = profile.solution.profile_value(profile.right as i64 + 1)?;
    let mapped = locked_map(&profile.phi, Boundary::new(1.0, tail), params, speed)?;
    let first_front_site = profile.left + 1;
    if mapped.exact.start > profile.left || mapped.exact.end <= first_front_site {
        return Err(Error::WindowTooSmall(format!(
            "boundary-free range {:?} misses the interface at index {}",
            mapped.exact, profile.left
        )));
    }
    Ok(mapped
        .exact
        .map(|j| (mapped.values[j] - profile.phi[j]).abs())
        .fold(0.0, f64::max))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PositivityCertificate {
    pub positive: bool,
    /// First site where the leading mode dominates all others.
    pub i_star: Option<u64>,
    /// False when the tail could not be certified and only the window was checked.
    pub tail_certified: bool,
}

const MAX_CERTIFICATE_SITES: u64 = 10_000_000;

/// Check `φ_i > 0` up to the site where `Re(k_1) γ_1^i` dominates the rest.
pub fn positivity_certificate(profile: &FrontProfile) -> PositivityCertificate {
    let window_positive = profile.sites().all(|(i, v)| i <= 0 || v > 0.0);
    let fallback = PositivityCertificate {
        positive: window_positive,
        i_star: None,
        tail_certified: false,
    };

    let sol = &profile.solution;
    let gammas = &sol.roots.gammas;
    let ks = &sol.coefficients.ks;
    let g1 = gammas[0].re;
    let k1 = ks[0].re;
    let ratio = sol.roots.subdominant_ratio();
    if k1 <= 0.0 || ratio >= 1.0 - 1e-12 {
        return fallback;
    }

    // Everything is scaled by γ_1^i so nothing underflows.
    let steps: Vec<Complex64> = gammas[1..].iter().map(|g| g / g1).collect();
    let mut powers = vec![Complex64::new(1.0, 0.0); steps.len()];
    let mut positive = window_positive;
    for i in 1..=MAX_CERTIFICATE_SITES {
        let mut bound = 0.0;
        let mut scaled_phi = k1;
        for ((w, s), k) in powers.iter_mut().zip(&steps).zip(&ks[1..]) {
            *w *= s;
            bound += k.norm() * w.norm();
            scaled_phi += (k * *w).re;
        }
        positive &= scaled_phi > 0.0;
        if bound < k1 {
            return PositivityCertificate {
                positive,
                i_star: Some(i),
                tail_certified: true,
            };
        }
    }
    fallback
}
