//! Dense polynomial machinery: exact trinomial expansion, companion-matrix
//! eigenvalues, and simultaneous (Aberth) polishing against an arbitrary
//! analytic form of the polynomial.

use nalgebra::DMatrix;
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Integer multinomial coefficients of `(x + y t + x t²)^q` grouped by the
/// power of `t`: entry `k` lists `(count, i + l, j)` meaning `count · x^(i+l) y^j`.
fn trinomial_terms(q: u32) -> Vec<Vec<(u128, u32, u32)>> {
    let q = q as usize;
    // Pascal rows up to q.
    let mut binom = vec![vec![0u128; q + 1]; q + 1];
    for n in 0..=q {
        binom[n][0] = 1;
        for k in 1..=n {
            binom[n][k] = binom[n - 1][k - 1] + if k < n { binom[n - 1][k] } else { 0 };
        }
    }
    let mut terms = vec![Vec::new(); 2 * q + 1];
    // i copies of x (t^0), j copies of y t, l copies of x t^2.
    for l in 0..=q {
        for j in 0..=(q - l) {
            let i = q - l - j;
            let count = binom[q][l] * binom[q - l][j];
            terms[j + 2 * l].push((count, (i + l) as u32, j as u32));
        }
    }
    terms
}

/// Coefficients (ascending powers) of `(a + b t + a t²)^q`.
pub fn trinomial_power(a: f64, b: f64, q: u32) -> Vec<f64> {
    trinomial_terms(q)
        .into_iter()
        .map(|group| {
            group
                .into_iter()
                .map(|(count, pa, pb)| count as f64 * a.powi(pa as i32) * b.powi(pb as i32))
                .sum()
        })
        .collect()
}

/// Evaluate a polynomial given by ascending coefficients.
pub fn horner(coeffs: &[Complex64], z: Complex64) -> Complex64 {
    coeffs
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * z + c)
}

/// Parlett–Reinsch balancing with power-of-two scale factors.
fn balance(m: &mut DMatrix<Complex64>) {
    let n = m.nrows();
    let radix = 2.0f64;
    let sqrdx = radix * radix;
    let mut done = false;
    while !done {
        done = true;
        for i in 0..n {
            let mut c = 0.0;
            let mut r = 0.0;
            for j in 0..n {
                if j != i {
                    c += m[(j, i)].l1_norm();
                    r += m[(i, j)].l1_norm();
                }
            }
            if c == 0.0 || r == 0.0 {
                continue;
            }
            let s = c + r;
            let mut f = 1.0;
            let mut g = r / radix;
            while c < g {
                f *= radix;
                c *= sqrdx;
            }
            g = r * radix;
            while c > g {
                f /= radix;
                c /= sqrdx;
            }
            if (c + r) / f < 0.95 * s {
                done = false;
                let inv = 1.0 / f;
                for j in 0..n {
                    m[(i, j)] *= inv;
                }
                for j in 0..n {
                    m[(j, i)] *= f;
                }
            }
        }
    }
}

/// All roots of the polynomial with ascending coefficients `coeffs`, via the
/// eigenvalues of its balanced companion matrix.
pub fn companion_roots(coeffs: &[Complex64]) -> Result<Vec<Complex64>> {
    let degree = coeffs
        .iter()
        .rposition(|c| *c != Complex64::new(0.0, 0.0))
        .ok_or_else(|| Error::RootSolve("zero polynomial".into()))?;
    if degree == 0 {
        return Ok(Vec::new());
    }
    let lead = coeffs[degree];
    let n = degree;
    let mut comp = DMatrix::<Complex64>::zeros(n, n);
    for i in 1..n {
        comp[(i, i - 1)] = Complex64::new(1.0, 0.0);
    }
    for i in 0..n {
        comp[(i, n - 1)] = -coeffs[i] / lead;
    }
    balance(&mut comp);
    let schur = comp.try_schur(f64::EPSILON, 100_000).ok_or_else(|| {
        Error::RootSolve(format!("Schur iteration did not converge (degree {n})"))
    })?;
    let eig = schur
        .eigenvalues()
        .ok_or_else(|| Error::RootSolve("eigenvalue extraction failed".into()))?;
    let roots: Vec<Complex64> = eig.iter().copied().collect();
    if roots.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::RootSolve("non-finite eigenvalue".into()));
    }
    Ok(roots)
}

/// Aberth–Ehrlich refinement of a full set of root estimates.
///
/// `newton_ratio(z)` must return `f(z) / f'(z)` for the polynomial whose
/// roots are sought. Iteration stops once every correction is below
/// `rel_tol · |z|`.
pub fn aberth_polish(
    roots: &mut [Complex64],
    newton_ratio: impl Fn(Complex64) -> Complex64,
    rel_tol: f64,
    max_iter: usize,
) {
    let n = roots.len();
    let mut converged = vec![false; n];
    for _ in 0..max_iter {
        let mut all = true;
        for i in 0..n {
            if converged[i] {
                continue;
            }
            let z = roots[i];
            let ratio = newton_ratio(z);
            if !ratio.re.is_finite() || !ratio.im.is_finite() {
                converged[i] = true;
                continue;
            }
            let repulsion: Complex64 = (0..n)
                .filter(|&j| j != i)
                .map(|j| {
                    let d = z - roots[j];
                    if d == Complex64::new(0.0, 0.0) {
                        Complex64::new(0.0, 0.0)
                    } else {
                        d.inv()
                    }
                })
                .sum();
            let denom = Complex64::new(1.0, 0.0) - ratio * repulsion;
            let step = if denom.norm() > 0.0 {
                ratio / denom
            } else {
                ratio
            };
            if !step.re.is_finite() || !step.im.is_finite() {
                converged[i] = true;
                continue;
            }
            roots[i] = z - step;
            if step.norm() <= rel_tol * z.norm().max(f64::MIN_POSITIVE) {
                converged[i] = true;
            } else {
                all = false;
            }
        }
        if all {
            break;
        }
    }
}
