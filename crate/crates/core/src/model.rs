//! Parameters and exact generational dynamics of the lattice model.
//!
//! One generation is migration with weights `(m/2, 1-m, m/2)` followed by
//! the piecewise-linear reproduction rule `g(u) = r u` for `u < c` and
//! `g(u) = 1` for `u >= c`.

use std::fmt;
use std::ops::Range;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Slack allowed on `r * c <= 1` so that `c = 1/r` computed in floating
/// point is accepted.
const RC_SLACK: f64 = 4.0 * f64::EPSILON;

/// Growth factor and migration rate; everything the linearization at zero
/// depends on.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearParams {
    r: f64,
    m: f64,
}

impl LinearParams {
    pub fn new(r: f64, m: f64) -> Result<Self> {
        if !(r.is_finite() && r > 1.0) {
            return Err(Error::InvalidParameter(format!(
                "r = {r} must satisfy r > 1"
            )));
        }
        if !(m.is_finite() && (0.0..1.0).contains(&m)) {
            return Err(Error::InvalidParameter(format!(
                "m = {m} must lie in [0, 1)"
            )));
        }
        Ok(Self { r, m })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn m(&self) -> f64 {
        self.m
    }

    /// `a = r m / 2`, the weight of each neighbour after reproduction.
    pub fn a(&self) -> f64 {
        self.r * self.m / 2.0
    }

    /// `b = r (1 - m)`, the weight of the site itself after reproduction.
    pub fn b(&self) -> f64 {
        self.r * (1.0 - self.m)
    }

    /// `a + b z + a z^2`.
    pub fn trinomial(&self, z: Complex64) -> Complex64 {
        let (a, b) = (self.a(), self.b());
        a + z * (b + z * a)
    }

    pub fn trinomial_real(&self, x: f64) -> f64 {
        let (a, b) = (self.a(), self.b());
        a + x * (b + x * a)
    }

    /// Front construction needs migration (`m > 0`) and `a < 1`.
    pub fn require_front_regime(&self) -> Result<()> {
        if self.m <= 0.0 {
            return Err(Error::InvalidParameter(
                "front construction needs m > 0".into(),
            ));
        }
        if self.a() >= 1.0 {
            return Err(Error::InvalidParameter(format!(
                "front construction needs r m < 2 (r = {}, m = {})",
                self.r, self.m
            )));
        }
        Ok(())
    }

    pub fn with_threshold(self, c: f64) -> Result<Params> {
        Params::from_linear(self, c)
    }
}

/// Full model parameters `(r, m, c)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Params {
    linear: LinearParams,
    c: f64,
}

impl Params {
    pub fn new(r: f64, m: f64, c: f64) -> Result<Self> {
        Self::from_linear(LinearParams::new(r, m)?, c)
    }

    pub fn from_linear(linear: LinearParams, c: f64) -> Result<Self> {
        if !(c.is_finite() && c > 0.0 && c <= 1.0) {
            return Err(Error::InvalidParameter(format!(
                "c = {c} must lie in (0, 1]"
            )));
        }
        if linear.r * c > 1.0 + RC_SLACK {
            return Err(Error::InvalidParameter(format!(
                "r c = {} exceeds 1 (r = {}, c = {c})",
                linear.r * c,
                linear.r
            )));
        }
        Ok(Self { linear, c })
    }

    pub fn linear(&self) -> &LinearParams {
        &self.linear
    }

    pub fn r(&self) -> f64 {
        self.linear.r
    }

    pub fn m(&self) -> f64 {
        self.linear.m
    }

    pub fn c(&self) -> f64 {
        self.c
    }

    pub fn a(&self) -> f64 {
        self.linear.a()
    }

    pub fn b(&self) -> f64 {
        self.linear.b()
    }

    #[inline]
    pub(crate) fn g(&self, u: f64) -> f64 {
        if u >= self.c {
            1.0
        } else {
            self.linear.r * u
        }
    }
}

/// Target speed `p/q` with `gcd(p, q) = 1` and `1 <= p < q`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct RationalSpeed {
    p: u32,
    q: u32,
}

/// Largest denominator accepted; the characteristic polynomial has degree `2q`.
pub const MAX_DENOMINATOR: u32 = 64;

impl RationalSpeed {
    pub fn new(p: u32, q: u32) -> Result<Self> {
        if p == 0 || p >= q {
            return Err(Error::InvalidParameter(format!(
                "speed {p}/{q} must satisfy 1 <= p < q"
            )));
        }
        if q > MAX_DENOMINATOR {
            return Err(Error::InvalidParameter(format!(
                "denominator {q} exceeds the supported maximum {MAX_DENOMINATOR}"
            )));
        }
        if gcd(p as u64, q as u64) != 1 {
            return Err(Error::InvalidParameter(format!(
                "speed {p}/{q} is not in lowest terms"
            )));
        }
        Ok(Self { p, q })
    }

    pub fn p(&self) -> u32 {
        self.p
    }

    pub fn q(&self) -> u32 {
        self.q
    }

    /// `N = q - p`, the number of decay modes in the front.
    pub fn n(&self) -> u32 {
        self.q - self.p
    }

    pub fn value(&self) -> f64 {
        self.p as f64 / self.q as f64
    }
}

impl fmt::Display for RationalSpeed {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}/{}", self.p, self.q)
    }
}

pub(crate) fn gcd(mut x: u64, mut y: u64) -> u64 {
    while y != 0 {
        (x, y) = (y, x % y);
    }
    x
}

/// Values assumed just outside a finite lattice window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Boundary {
    pub left: f64,
    pub right: f64,
}

impl Boundary {
    pub fn new(left: f64, right: f64) -> Self {
        Self { left, right }
    }

    /// Invasion-front clamps: capacity on the left, empty on the right.
    pub fn front() -> Self {
        Self {
            left: 1.0,
            right: 0.0,
        }
    }
}

/// The reproduction rule `g`.
pub fn reproduction(u: f64, params: &Params) -> Result<f64> {
    if u.is_nan() || u < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "population {u} must be non-negative"
        )));
    }
    Ok(params.g(u))
}

fn check_state(state: &[f64], boundary: Boundary) -> Result<()> {
    let ok = |v: f64| (0.0..=1.0).contains(&v);
    if let Some((i, v)) = state.iter().copied().enumerate().find(|&(_, v)| !ok(v)) {
        return Err(Error::InvalidParameter(format!(
            "state value {v} at index {i} outside [0, 1]"
        )));
    }
    if !ok(boundary.left) || !ok(boundary.right) {
        return Err(Error::InvalidParameter(format!(
            "boundary values ({}, {}) outside [0, 1]",
            boundary.left, boundary.right
        )));
    }
    Ok(())
}

/// One generation without validation; `dst` must have the length of `src`.
pub(crate) fn step_into(src: &[f64], dst: &mut [f64], boundary: Boundary, params: &Params) {
    debug_assert_eq!(src.len(), dst.len());
    let n = src.len();
    if n == 0 {
        return;
    }
    let half = params.m() / 2.0;
    let keep = 1.0 - params.m();
    for i in 0..n {
        let left = if i == 0 { boundary.left } else { src[i - 1] };
        let right = if i + 1 == n {
            boundary.right
        } else {
            src[i + 1]
        };
        dst[i] = params.g(half * left + keep * src[i] + half * right);
    }
}

/// Apply one generation (migration then reproduction) to a finite window.
pub fn generation(state: &[f64], boundary: Boundary, params: &Params) -> Result<Vec<f64>> {
    check_state(state, boundary)?;
    let mut out = vec![0.0; state.len()];
    step_into(state, &mut out, boundary, params);
    Ok(out)
}

/// Result of the locked map on a finite window.
#[derive(Debug, Clone, PartialEq)]
pub struct MappedWindow {
    pub values: Vec<f64>,
    /// Indices whose value does not depend on the boundary clamps.
    pub exact: Range<usize>,
}

/// `S^p(G^q(u))`: `q` generations followed by a shift of `p` sites to the left.
///
/// The last `p` entries are filled with the right clamp. Only indices in
/// `exact` are free of boundary influence.
pub fn locked_map(
    state: &[f64],
    boundary: Boundary,
    params: &Params,
    speed: RationalSpeed,
) -> Result<MappedWindow> {
    check_state(state, boundary)?;
    let (p, q) = (speed.p() as usize, speed.q() as usize);
    let n = state.len();
    // A site j of the output reads G^q at j + p, which depends on j + p - q ..= j + p + q.
    let lo = q.saturating_sub(p);
    let hi = n.saturating_sub(q + p);
    if lo >= hi {
        return Err(Error::WindowTooSmall(format!(
            "{n} sites cannot hold {q} generations plus a shift of {p}"
        )));
    }
    let mut cur = state.to_vec();
    let mut next = vec![0.0; n];
    for _ in 0..q {
        step_into(&cur, &mut next, boundary, params);
        std::mem::swap(&mut cur, &mut next);
    }
    let mut values = Vec::with_capacity(n);
    values.extend_from_slice(&cur[p..]);
    values.resize(n, boundary.right);
    Ok(MappedWindow {
        values,
        exact: lo..hi,
    })
}
