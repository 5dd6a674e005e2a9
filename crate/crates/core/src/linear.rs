//! Linearization at the unstable zero state.
//!
//! Pure exponentials `λ^t γ^i` solve the linearized lattice map when
//! `λ(γ) = (a + bγ + aγ²)/γ`. Each decay rate `γ ∈ (0, 1)` then travels with
//! the envelope velocity `s_env(γ) = -ln λ(γ) / ln γ`, whose minimum is the
//! linear spreading speed.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{LinearParams, RationalSpeed};

/// Pairs closer to the spreading speed than this are reported as degenerate.
pub const TIP_TOLERANCE: f64 = 1e-10;

const LOG_GAMMA_FLOOR: f64 = -690.0; // ln(1e-300)

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearSpreading {
    pub s_lin: f64,
    pub gamma_lin: f64,
}

/// The two real decay rates travelling at a given speed.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayPair {
    pub gamma_s: f64,
    pub gamma_w: f64,
    pub gamma_lin: f64,
    /// Set when the speed sits within [`TIP_TOLERANCE`] of `s_lin`; both
    /// rates are then reported as `gamma_lin`.
    pub degenerate: bool,
}

/// Result of inverting `s_lin(r, m) = p/q` in `m`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MStar {
    pub m: f64,
    /// No crossing below `min(1, 2/r)`; `m` is that cap.
    pub saturated: bool,
}

pub fn dispersion(gamma: Complex64, lp: &LinearParams) -> Result<Complex64> {
    if gamma == Complex64::new(0.0, 0.0) {
        return Err(Error::InvalidParameter(
            "dispersion relation is singular at γ = 0".into(),
        ));
    }
    Ok(lp.trinomial(gamma) / gamma)
}

pub fn dispersion_real(gamma: f64, lp: &LinearParams) -> Result<f64> {
    if gamma == 0.0 {
        return Err(Error::InvalidParameter(
            "dispersion relation is singular at γ = 0".into(),
        ));
    }
    Ok(lp.trinomial_real(gamma) / gamma)
}

pub fn envelope_speed(gamma: f64, lp: &LinearParams) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "decay rate {gamma} outside (0, 1)"
        )));
    }
    Ok(envelope_speed_unchecked(gamma, lp))
}

fn envelope_speed_unchecked(gamma: f64, lp: &LinearParams) -> f64 {
    1.0 - lp.trinomial_real(gamma).ln() / gamma.ln()
}

/// Proportional (with a positive factor) to `s_env'(γ)`.
fn envelope_slope_sign(gamma: f64, lp: &LinearParams) -> f64 {
    let (a, b) = (lp.a(), lp.b());
    let poly = lp.trinomial_real(gamma);
    let f1 = (b * gamma + 2.0 * a * gamma * gamma) * (-gamma.ln());
    let f2 = poly * (-poly.ln());
    f1 - f2
}

/// Bisection to full precision; `f(lo)` and `f(hi)` must differ in sign.
pub(crate) fn bisect(mut lo: f64, mut hi: f64, f: impl Fn(f64) -> f64) -> f64 {
    let lo_negative = f(lo) < 0.0;
    for _ in 0..2000 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo.min(hi) || mid >= lo.max(hi) {
            break;
        }
        let v = f(mid);
        if v == 0.0 {
            return mid;
        }
        if (v < 0.0) == lo_negative {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

fn check_spreading_domain(lp: &LinearParams) -> Result<()> {
    lp.require_front_regime()
}

/// Minimize `s_env` over `(0, 1)`.
///
/// Golden-section search on `ln γ` brackets the minimizer, then bisection on
/// the sign of the derivative pins it to full precision.
pub fn linear_spreading_speed(lp: &LinearParams) -> Result<LinearSpreading> {
    check_spreading_domain(lp)?;
    let s_of_t = |t: f64| envelope_speed_unchecked(t.exp(), lp);

    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let (mut lo, mut hi) = (LOG_GAMMA_FLOOR, (-1e-12f64).ln_1p());
    let mut x1 = hi - inv_phi * (hi - lo);
    let mut x2 = lo + inv_phi * (hi - lo);
    let (mut f1, mut f2) = (s_of_t(x1), s_of_t(x2));
    for _ in 0..80 {
        if f1 < f2 {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - inv_phi * (hi - lo);
            f1 = s_of_t(x1);
        } else {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + inv_phi * (hi - lo);
            f2 = s_of_t(x2);
        }
    }

    let (g_lo, g_hi) = (lo.exp(), hi.exp());
    let slope = |g: f64| envelope_slope_sign(g, lp);
    let gamma_lin = if slope(g_lo) < 0.0 && slope(g_hi) > 0.0 {
        bisect(g_lo, g_hi, slope)
    } else {
        // Rounding flattened the derivative inside the bracket.
        (0.5 * (lo + hi)).exp()
    };
    Ok(LinearSpreading {
        s_lin: envelope_speed_unchecked(gamma_lin, lp),
        gamma_lin,
    })
}

/// `q ln P(γ) - N ln γ`; zero exactly where `s_env(γ) = p/q`, positive below `γ_s`.
fn speed_balance(gamma: f64, lp: &LinearParams, speed: RationalSpeed) -> f64 {
    speed.q() as f64 * lp.trinomial_real(gamma).ln() - speed.n() as f64 * gamma.ln()
}

/// Strong and weak decay rates with `s_env(γ) = p/q`.
pub fn decay_rates_for_speed(lp: &LinearParams, speed: RationalSpeed) -> Result<DecayPair> {
    let lin = linear_spreading_speed(lp)?;
    decay_rates_from(lp, speed, lin)
}

pub(crate) fn decay_rates_from(
    lp: &LinearParams,
    speed: RationalSpeed,
    lin: LinearSpreading,
) -> Result<DecayPair> {
    let gap = speed.value() - lin.s_lin;
    if gap <= -TIP_TOLERANCE {
        return Err(Error::BelowSpreadingSpeed {
            p: speed.p(),
            q: speed.q(),
            s_lin: lin.s_lin,
        });
    }
    if gap < TIP_TOLERANCE {
        return Ok(DecayPair {
            gamma_s: lin.gamma_lin,
            gamma_w: lin.gamma_lin,
            gamma_lin: lin.gamma_lin,
            degenerate: true,
        });
    }

    let h = |g: f64| speed_balance(g, lp, speed);
    let t_lin = lin.gamma_lin.ln();
    let mut t_lo = t_lin - 1.0;
    while h(t_lo.exp()) <= 0.0 {
        t_lo *= 2.0;
        if t_lo < LOG_GAMMA_FLOOR {
            return Err(Error::Numerical(format!(
                "no strong decay rate above e^{LOG_GAMMA_FLOOR}"
            )));
        }
    }
    let t_s = bisect(t_lo, t_lin, |t| h(t.exp()));
    let gamma_s = t_s.exp();
    let gamma_w = bisect(lin.gamma_lin, 1.0, h);
    Ok(DecayPair {
        gamma_s,
        gamma_w,
        gamma_lin: lin.gamma_lin,
        degenerate: false,
    })
}

/// Largest admissible migration rate, `min(1, 2/r)`.
pub fn migration_cap(r: f64) -> f64 {
    (2.0 / r).min(1.0)
}

/// Migration rate at which the spreading speed reaches `p/q`.
pub fn m_star(r: f64, speed: RationalSpeed) -> Result<MStar> {
    let cap = migration_cap(r);
    let target = speed.value();
    let s_lin_at =
        |m: f64| -> Result<f64> { Ok(linear_spreading_speed(&LinearParams::new(r, m)?)?.s_lin) };
    let hi = cap * (1.0 - 1e-12);
    if s_lin_at(hi)? < target {
        return Ok(MStar {
            m: cap,
            saturated: true,
        });
    }
    // s_lin is increasing in m and tends to 0 with m; bisect in ln m.
    let mut t_lo = hi.ln() - 1.0;
    while s_lin_at(t_lo.exp())? >= target {
        t_lo *= 2.0;
        if t_lo < LOG_GAMMA_FLOOR {
            return Err(Error::Numerical(format!("m* for {speed} is below 1e-300")));
        }
    }
    let f = |t: f64| s_lin_at(t.exp()).map(|s| s - target).unwrap_or(f64::NAN);
    let t = bisect(t_lo, hi.ln(), f);
    Ok(MStar {
        m: t.exp(),
        saturated: false,
    })
}
