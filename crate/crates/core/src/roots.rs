//! Roots of the characteristic polynomial `(a + bγ + aγ²)^q - λ γ^(q-p)` and
//! selection of the decay modes that build a locked front.

use std::cmp::Ordering;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linear::{decay_rates_for_speed, DecayPair};
use crate::model::{gcd, LinearParams, RationalSpeed};
use crate::poly::{aberth_polish, companion_roots, trinomial_power};

/// Tolerances for root finding and selection.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct RootTolerances {
    /// Residual on the unexpanded form, relative to `|P|^q + |λ||γ|^N`.
    pub residual: f64,
    /// Relative slack on the disk radius `γ_s` when counting roots.
    pub count_slack: f64,
    /// Minimum relative modulus gap between the `N`-th and `(N+1)`-th root.
    pub modulus_gap: f64,
    /// Relative tolerance for matching conjugate pairs.
    pub pairing: f64,
    /// Relative tolerance on `ζ^q γ = 1` and `ζ^(-N) = P(γ)`.
    pub zeta_identity: f64,
}

impl Default for RootTolerances {
    fn default() -> Self {
        Self {
            residual: 1e-9,
            count_slack: 1e-9,
            modulus_gap: 1e-8,
            pairing: 1e-9,
            zeta_identity: 1e-10,
        }
    }
}

/// The `N = q - p` decay modes of a locked front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FrontRoots {
    /// `γ_1` (real, equal to `γ_s`) first, then by modulus and argument.
    pub gammas: Vec<Complex64>,
    /// `ζ_j`, the inverse `q`-th roots on the branch fixed by `ζ^(-N) = P(γ)`.
    pub zetas: Vec<Complex64>,
    pub ell1: u32,
    pub ell2: u32,
    pub gamma_s: f64,
    pub gamma_w: f64,
    /// `(|γ_(N+1)| - |γ_N|) / |γ_N|` over the sorted full root list.
    pub modulus_gap: f64,
}

impl FrontRoots {
    pub fn len(&self) -> usize {
        self.gammas.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gammas.is_empty()
    }

    /// `max_{j>=2} |γ_j| / γ_1`; zero for a single mode.
    pub fn subdominant_ratio(&self) -> f64 {
        self.gammas
            .iter()
            .skip(1)
            .map(|g| g.norm())
            .fold(0.0, f64::max)
            / self.gammas[0].norm()
    }
}

fn unexpanded_value(
    lp: &LinearParams,
    speed: RationalSpeed,
    lambda: Complex64,
    z: Complex64,
) -> (Complex64, f64) {
    let pz = lp.trinomial(z);
    let t1 = pz.powi(speed.q() as i32);
    let t2 = lambda * z.powi(speed.n() as i32);
    (t1 - t2, t1.norm() + t2.norm())
}

fn newton_ratio(
    lp: &LinearParams,
    speed: RationalSpeed,
    lambda: Complex64,
    z: Complex64,
) -> Complex64 {
    let (q, n) = (speed.q() as f64, speed.n() as f64);
    let pz = lp.trinomial(z);
    let dp = lp.b() + 2.0 * lp.a() * z;
    let t1 = pz.powi(speed.q() as i32);
    let t2 = lambda * z.powi(speed.n() as i32);
    let f = t1 - t2;
    let df = q * t1 * dp / pz - n * t2 / z;
    f / df
}

pub(crate) fn modulus_then_arg(x: &Complex64, y: &Complex64) -> Ordering {
    x.norm()
        .total_cmp(&y.norm())
        .then(x.arg().total_cmp(&y.arg()))
}

/// Newton on the real line for a root known to be real.
fn polish_real(lp: &LinearParams, speed: RationalSpeed, lambda: f64, mut x: f64) -> f64 {
    let lam = Complex64::new(lambda, 0.0);
    for _ in 0..8 {
        let step = newton_ratio(lp, speed, lam, Complex64::new(x, 0.0)).re;
        if !step.is_finite() {
            break;
        }
        let next = x - step;
        if next == x {
            break;
        }
        x = next;
        if step.abs() <= f64::EPSILON * x.abs() {
            break;
        }
    }
    x
}

/// Snap near-real roots onto the real line and make conjugate pairs exact.
fn enforce_conjugate_symmetry(
    roots: &mut [Complex64],
    lp: &LinearParams,
    speed: RationalSpeed,
    lambda: f64,
    tol: f64,
) -> Result<()> {
    for z in roots.iter_mut() {
        if z.im.abs() <= tol * z.norm() {
            *z = Complex64::new(polish_real(lp, speed, lambda, z.re), 0.0);
        }
    }
    let mut paired = vec![false; roots.len()];
    for i in 0..roots.len() {
        if paired[i] || roots[i].im <= 0.0 {
            continue;
        }
        let target = roots[i].conj();
        let partner = (0..roots.len())
            .filter(|&j| !paired[j] && j != i && roots[j].im < 0.0)
            .min_by(|&x, &y| {
                (roots[x] - target)
                    .norm()
                    .total_cmp(&(roots[y] - target).norm())
            });
        let j = match partner {
            Some(j) if (roots[j] - target).norm() <= tol * target.norm() => j,
            _ => {
                return Err(Error::RootSolve(format!(
                    "root {} has no conjugate partner",
                    roots[i]
                )));
            }
        };
        let mean = 0.5 * (roots[i] + roots[j].conj());
        roots[i] = mean;
        roots[j] = mean.conj();
        paired[i] = true;
        paired[j] = true;
    }
    if let Some(i) = (0..roots.len()).find(|&i| roots[i].im < 0.0 && !paired[i]) {
        return Err(Error::RootSolve(format!(
            "root {} has no conjugate partner",
            roots[i]
        )));
    }
    Ok(())
}

/// All `2q` roots of `(a + bγ + aγ²)^q - λ γ^(q-p)`, sorted by modulus then argument.
pub fn char_roots(
    lp: &LinearParams,
    speed: RationalSpeed,
    lambda: Complex64,
) -> Result<Vec<Complex64>> {
    char_roots_with(lp, speed, lambda, &RootTolerances::default())
}

pub fn char_roots_with(
    lp: &LinearParams,
    speed: RationalSpeed,
    lambda: Complex64,
    tol: &RootTolerances,
) -> Result<Vec<Complex64>> {
    lp.require_front_regime()?;
    if lambda == Complex64::new(0.0, 0.0) || !lambda.re.is_finite() || !lambda.im.is_finite() {
        return Err(Error::InvalidParameter(format!(
            "λ = {lambda} must be finite and non-zero"
        )));
    }
    let mut coeffs: Vec<Complex64> = trinomial_power(lp.a(), lp.b(), speed.q())
        .into_iter()
        .map(|c| Complex64::new(c, 0.0))
        .collect();
    coeffs[speed.n() as usize] -= lambda;

    let mut roots = companion_roots(&coeffs)?;
    if roots.len() != 2 * speed.q() as usize {
        return Err(Error::RootSolve(format!(
            "expected {} roots, found {}",
            2 * speed.q(),
            roots.len()
        )));
    }
    aberth_polish(
        &mut roots,
        |z| newton_ratio(lp, speed, lambda, z),
        4.0 * f64::EPSILON,
        500,
    );
    if lambda.im == 0.0 {
        enforce_conjugate_symmetry(&mut roots, lp, speed, lambda.re, tol.pairing)?;
    }
    for z in &roots {
        let (value, scale) = unexpanded_value(lp, speed, lambda, *z);
        if !(value.norm() <= tol.residual * scale) {
            return Err(Error::RootSolve(format!(
                "residual {:.3e} at root {z} exceeds {:.1e} x {scale:.3e}",
                value.norm(),
                tol.residual
            )));
        }
    }
    roots.sort_by(modulus_then_arg);
    Ok(roots)
}

/// Exponents `(ℓ1, ℓ2)` with `q ℓ1 - N ℓ2 = -1` and `1 <= ℓ1 <= N`.
pub fn diophantine(q: u32, n: u32) -> Result<(u32, u32)> {
    if n == 0 || n >= q {
        return Err(Error::InvalidParameter(format!(
            "need 1 <= N < q, got N = {n}, q = {q}"
        )));
    }
    if gcd(q as u64, n as u64) != 1 {
        return Err(Error::InvalidParameter(format!("gcd({q}, {n}) != 1")));
    }
    if n == 1 {
        return Ok((1, q + 1));
    }
    let inv = mod_inverse(q as i64 % n as i64, n as i64);
    let ell1 = ((n as i64 - inv) % n as i64) as u32;
    let ell1 = if ell1 == 0 { n } else { ell1 };
    let ell2 = (q as u64 * ell1 as u64 + 1) / n as u64;
    Ok((ell1, ell2 as u32))
}

fn mod_inverse(x: i64, modulus: i64) -> i64 {
    let (mut old_r, mut r) = (x, modulus);
    let (mut old_s, mut s) = (1i64, 0i64);
    while r != 0 {
        let quot = old_r / r;
        (old_r, r) = (r, old_r - quot * r);
        (old_s, s) = (s, old_s - quot * s);
    }
    old_s.rem_euclid(modulus)
}

/// `ζ = γ^ℓ1 / (a + bγ + aγ²)^ℓ2`, an inverse `q`-th root of `γ` built from
/// integer powers only.
pub fn fractional_root(
    gamma: Complex64,
    lp: &LinearParams,
    ell1: u32,
    ell2: u32,
) -> Result<Complex64> {
    let pz = lp.trinomial(gamma);
    if pz == Complex64::new(0.0, 0.0) {
        return Err(Error::Numerical(format!(
            "a + bγ + aγ² vanishes at γ = {gamma}"
        )));
    }
    Ok(gamma.powi(ell1 as i32) / pz.powi(ell2 as i32))
}

/// Pick the `N` smallest roots and attach their `ζ` companions.
pub fn select_front_roots(
    all_roots: &[Complex64],
    lp: &LinearParams,
    speed: RationalSpeed,
    pair: &DecayPair,
) -> Result<FrontRoots> {
    select_front_roots_with(all_roots, lp, speed, pair, &RootTolerances::default())
}

pub fn select_front_roots_with(
    all_roots: &[Complex64],
    lp: &LinearParams,
    speed: RationalSpeed,
    pair: &DecayPair,
    tol: &RootTolerances,
) -> Result<FrontRoots> {
    if pair.degenerate {
        return Err(Error::Degenerate(format!(
            "{speed} sits at the tongue tip (double decay rate)"
        )));
    }
    let n = speed.n() as usize;
    let gamma_s = pair.gamma_s;
    let mut sorted = all_roots.to_vec();
    sorted.sort_by(modulus_then_arg);
    if sorted.len() < n {
        return Err(Error::RootSolve(format!(
            "only {} roots supplied",
            sorted.len()
        )));
    }

    let radius = gamma_s * (1.0 + tol.count_slack);
    let inside = sorted.iter().filter(|z| z.norm() <= radius).count();
    if inside != n {
        return Err(Error::Degenerate(format!(
            "{inside} roots inside |γ| <= γ_s, expected {n}"
        )));
    }
    let modulus_gap = match sorted.get(n) {
        Some(next) => (next.norm() - sorted[n - 1].norm()) / sorted[n - 1].norm(),
        None => f64::INFINITY,
    };
    if modulus_gap < tol.modulus_gap {
        return Err(Error::Degenerate(format!(
            "modulus gap {modulus_gap:.3e} after the {n} front roots"
        )));
    }

    let mut selected: Vec<Complex64> = sorted[..n].to_vec();
    let largest = selected[n - 1];
    if largest.im != 0.0 || largest.re <= 0.0 || (largest.re - gamma_s).abs() > 1e-9 * gamma_s {
        return Err(Error::Degenerate(format!(
            "largest front root {largest} is not γ_s = {gamma_s}"
        )));
    }
    if n >= 2 && selected[n - 2].norm() >= largest.norm() * (1.0 - tol.modulus_gap) {
        return Err(Error::Degenerate(format!(
            "root {} shares the modulus of γ_s",
            selected[n - 2]
        )));
    }
    for z in &selected {
        if z.im != 0.0
            && !selected
                .iter()
                .any(|w| (*w - z.conj()).norm() <= tol.pairing * z.norm())
        {
            return Err(Error::Degenerate(format!(
                "front roots are not closed under conjugation at {z}"
            )));
        }
    }
    selected.pop();
    selected.insert(0, largest);

    let (ell1, ell2) = diophantine(speed.q(), speed.n())?;
    let zetas = selected
        .iter()
        .map(|&g| fractional_root(g, lp, ell1, ell2))
        .collect::<Result<Vec<_>>>()?;
    for (g, z) in selected.iter().zip(&zetas) {
        let inv_root = (z.powi(speed.q() as i32) * g - 1.0).norm();
        let branch =
            (z.powi(-(speed.n() as i32)) - lp.trinomial(*g)).norm() / lp.trinomial(*g).norm();
        if inv_root > tol.zeta_identity || branch > tol.zeta_identity {
            return Err(Error::Numerical(format!(
                "ζ identities fail at γ = {g}: |ζ^q γ - 1| = {inv_root:.2e}, branch error {branch:.2e}"
            )));
        }
    }
    Ok(FrontRoots {
        gammas: selected,
        zetas,
        ell1,
        ell2,
        gamma_s,
        gamma_w: pair.gamma_w,
        modulus_gap,
    })
}

/// Decay rates, characteristic roots and selection in one call.
pub fn front_roots(lp: &LinearParams, speed: RationalSpeed) -> Result<FrontRoots> {
    front_roots_with(lp, speed, &RootTolerances::default())
}

pub fn front_roots_with(
    lp: &LinearParams,
    speed: RationalSpeed,
    tol: &RootTolerances,
) -> Result<FrontRoots> {
    let pair = decay_rates_for_speed(lp, speed)?;
    if pair.degenerate {
        return Err(Error::Degenerate(format!(
            "{speed} sits at the tongue tip (double decay rate)"
        )));
    }
    let roots = char_roots_with(lp, speed, Complex64::new(1.0, 0.0), tol)?;
    select_front_roots_with(&roots, lp, speed, &pair, tol)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn brute_diophantine(q: u32, n: u32) -> (u32, u32) {
        for l1 in 1..=n {
            for l2 in 1..=(q + 1) {
                if (q * l1) as i64 - (n * l2) as i64 == -1 {
                    return (l1, l2);
                }
            }
        }
        unreachable!()
    }

    #[test]
    fn diophantine_examples() {
        assert_eq!(diophantine(3, 2).unwrap(), (1, 2));
        assert_eq!(diophantine(5, 3).unwrap(), (1, 2));
        assert_eq!(diophantine(8, 5).unwrap(), (3, 5));
        assert_eq!(diophantine(2, 1).unwrap(), (1, 3));
        assert!(diophantine(6, 4).is_err());
        for q in 2..=30 {
            for n in 1..q {
                if gcd(q as u64, n as u64) == 1 {
                    assert_eq!(
                        diophantine(q, n).unwrap(),
                        brute_diophantine(q, n),
                        "q={q} n={n}"
                    );
                }
            }
        }
    }

    #[test]
    fn speed_half_has_single_real_front_root() {
        let lp = LinearParams::new(1.2, 0.1).unwrap();
        let s = RationalSpeed::new(1, 2).unwrap();
        let fr = front_roots(&lp, s).unwrap();
        assert_eq!(fr.len(), 1);
        assert_eq!(fr.gammas[0].im, 0.0);
        // ζ is the positive real inverse square root.
        assert!((fr.zetas[0].re - fr.gammas[0].re.powf(-0.5)).abs() < 1e-12 * fr.zetas[0].re);
        assert_eq!(fr.zetas[0].im, 0.0);
    }

    #[test]
    fn speed_third_roots_have_opposite_signs() {
        let lp = LinearParams::new(1.2, 0.05).unwrap();
        let s = RationalSpeed::new(1, 3).unwrap();
        let fr = front_roots(&lp, s).unwrap();
        let (g1, g2) = (fr.gammas[0], fr.gammas[1]);
        assert!(g1.im == 0.0 && g2.im == 0.0);
        assert!(g1.re > 0.0 && g2.re < 0.0 && -g2.re < g1.re);
    }

    #[test]
    fn speed_third_zeta_small_m_expansion() {
        let lp = LinearParams::new(1.2, 1e-4).unwrap();
        let s = RationalSpeed::new(1, 3).unwrap();
        let fr = front_roots(&lp, s).unwrap();
        let (a, b) = (lp.a(), lp.b());
        let z1 = 1.0 / a.sqrt() - b / 2.0;
        let z2 = -1.0 / a.sqrt() - b / 2.0;
        // Next term is O(sqrt(a)).
        assert!((fr.zetas[0].re - z1).abs() < 10.0 * a.sqrt());
        assert!((fr.zetas[1].re - z2).abs() < 10.0 * a.sqrt());
    }

    #[test]
    fn fractional_root_conjugation() {
        let lp = LinearParams::new(1.3, 0.2).unwrap();
        let g = Complex64::new(-0.01, 0.02);
        let z = fractional_root(g, &lp, 3, 5).unwrap();
        let zc = fractional_root(g.conj(), &lp, 3, 5).unwrap();
        assert!((z.conj() - zc).norm() < 1e-15 * z.norm());
    }

    #[test]
    fn coefficients_sum_to_r_power_minus_one() {
        let lp = LinearParams::new(1.25, 0.3).unwrap();
        let s = RationalSpeed::new(2, 5).unwrap();
        let c = trinomial_power(lp.a(), lp.b(), s.q());
        let sum: f64 = c.iter().sum::<f64>() - 1.0;
        assert!((sum - (1.25f64.powi(5) - 1.0)).abs() < 1e-13);
    }

    #[test]
    fn zero_lambda_rejected() {
        let lp = LinearParams::new(1.25, 0.3).unwrap();
        let s = RationalSpeed::new(2, 5).unwrap();
        assert!(char_roots(&lp, s, Complex64::new(0.0, 0.0)).is_err());
    }
}
