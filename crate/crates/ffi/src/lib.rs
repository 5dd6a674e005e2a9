//! C ABI over `vlock-core`.
//!
//! Every fallible function returns a [`VlockStatus`] and writes results
//! through out-pointers. On failure a message is kept per thread and can be
//! read with [`vlock_last_error_message`]. Fronts are opaque handles created
//! by [`vlock_front_build`] and released with [`vlock_front_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use vlock_core::front::{build_front, fixed_point_residual, positivity_certificate, FrontProfile};
use vlock_core::linear::{decay_rates_for_speed, linear_spreading_speed, m_star};
use vlock_core::model::{LinearParams, Params, RationalSpeed};
use vlock_core::regions::c_bounds;
use vlock_core::sim::{simulate_speed, SimConfig};
use vlock_core::spectral::stability_margin;
use vlock_core::Error;

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum VlockStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParameter = 2,
    WindowTooSmall = 3,
    BelowSpreadingSpeed = 4,
    Degenerate = 5,
    RootSolve = 6,
    Numerical = 7,
    Monotonicity = 8,
    NotPositive = 9,
    Simulation = 10,
    Config = 11,
    Io = 12,
    OutOfRange = 13,
    Panic = 14,
}

impl From<&Error> for VlockStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidParameter(_) => Self::InvalidParameter,
            Error::WindowTooSmall(_) => Self::WindowTooSmall,
            Error::BelowSpreadingSpeed { .. } => Self::BelowSpreadingSpeed,
            Error::Degenerate(_) => Self::Degenerate,
            Error::RootSolve(_) => Self::RootSolve,
            Error::Numerical(_) => Self::Numerical,
            Error::Monotonicity(_) => Self::Monotonicity,
            Error::NotPositive { .. } => Self::NotPositive,
            Error::Simulation(_) => Self::Simulation,
            Error::Config(_) => Self::Config,
            Error::Io(_) | Error::Csv(_) => Self::Io,
        }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let msg = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(msg));
}

/// Failure inside a call: a status plus its message.
struct Fail(VlockStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(VlockStatus::from(&e), e.to_string())
    }
}

fn null(what: &str) -> Fail {
    Fail(VlockStatus::NullPointer, format!("{what} is null"))
}

fn guard(f: impl FnOnce() -> Result<(), Fail>) -> VlockStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => VlockStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_last_error(msg);
            status
        }
        Err(_) => {
            set_last_error("internal panic".into());
            VlockStatus::Panic
        }
    }
}

/// Write through an out-pointer, failing on null.
///
/// # Safety
/// `out` must be null or valid for writes.
unsafe fn put<T>(out: *mut T, value: T, what: &str) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null(what));
    }
    out.write(value);
    Ok(())
}

fn speed(p: u32, q: u32) -> Result<RationalSpeed, Fail> {
    Ok(RationalSpeed::new(p, q)?)
}

/// Message for the last failed call on this thread, or null.
///
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn vlock_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn vlock_version() -> *const c_char {
    static VERSION: &CStr =
        match CStr::from_bytes_with_nul(concat!(env!("CARGO_PKG_VERSION"), "\0").as_bytes()) {
            Ok(v) => v,
            Err(_) => panic!("version string"),
        };
    VERSION.as_ptr()
}

/// Linear spreading speed and its decay rate.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_linear_spreading_speed(
    r: f64,
    m: f64,
    out_s_lin: *mut f64,
    out_gamma_lin: *mut f64,
) -> VlockStatus {
    guard(|| {
        let lin = linear_spreading_speed(&LinearParams::new(r, m)?)?;
        put(out_s_lin, lin.s_lin, "out_s_lin")?;
        if !out_gamma_lin.is_null() {
            out_gamma_lin.write(lin.gamma_lin);
        }
        Ok(())
    })
}

/// Strong and weak decay rates travelling at `p/q`.
///
/// # Safety
/// Out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_decay_rates(
    r: f64,
    m: f64,
    p: u32,
    q: u32,
    out_gamma_s: *mut f64,
    out_gamma_w: *mut f64,
) -> VlockStatus {
    guard(|| {
        let pair = decay_rates_for_speed(&LinearParams::new(r, m)?, speed(p, q)?)?;
        put(out_gamma_s, pair.gamma_s, "out_gamma_s")?;
        put(out_gamma_w, pair.gamma_w, "out_gamma_w")
    })
}

/// Migration rate at which the spreading speed reaches `p/q`.
///
/// `out_saturated` may be null; it is set when no crossing exists below the cap.
///
/// # Safety
/// Out-pointers must be null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_m_star(
    r: f64,
    p: u32,
    q: u32,
    out_m: *mut f64,
    out_saturated: *mut bool,
) -> VlockStatus {
    guard(|| {
        let ms = m_star(r, speed(p, q)?)?;
        put(out_m, ms.m, "out_m")?;
        if !out_saturated.is_null() {
            out_saturated.write(ms.saturated);
        }
        Ok(())
    })
}

/// Threshold band `(c_min, c_max)` of the `p/q` locked front.
///
/// # Safety
/// Out-pointers must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_c_bounds(
    r: f64,
    m: f64,
    p: u32,
    q: u32,
    out_c_min: *mut f64,
    out_c_max: *mut f64,
) -> VlockStatus {
    guard(|| {
        let b = c_bounds(&LinearParams::new(r, m)?, speed(p, q)?)?;
        put(out_c_min, b.c_min, "out_c_min")?;
        put(out_c_max, b.c_max, "out_c_max")
    })
}

/// `1 - λ_max` in the space weighted by the geometric mean of the decay rates.
///
/// # Safety
/// `out_margin` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_stability_margin(
    r: f64,
    m: f64,
    p: u32,
    q: u32,
    out_margin: *mut f64,
) -> VlockStatus {
    guard(|| {
        let margin = stability_margin(&LinearParams::new(r, m)?, speed(p, q)?)?;
        put(out_margin, margin, "out_margin")
    })
}

/// Opaque locked-front handle.
pub struct VlockFront {
    profile: FrontProfile,
}

/// Build the `p/q` front at `(r, m)`; free it with [`vlock_front_free`].
///
/// # Safety
/// `out_front` must be valid for writes. It is set to null on failure.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_build(
    r: f64,
    m: f64,
    p: u32,
    q: u32,
    out_front: *mut *mut VlockFront,
) -> VlockStatus {
    if !out_front.is_null() {
        out_front.write(ptr::null_mut());
    }
    guard(|| {
        if out_front.is_null() {
            return Err(null("out_front"));
        }
        let profile = build_front(&LinearParams::new(r, m)?, speed(p, q)?)?;
        out_front.write(Box::into_raw(Box::new(VlockFront { profile })));
        Ok(())
    })
}

/// Release a front. Null is ignored.
///
/// # Safety
/// `front` must be null or a handle from [`vlock_front_build`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_free(front: *mut VlockFront) {
    if !front.is_null() {
        drop(Box::from_raw(front));
    }
}

unsafe fn front_ref<'a>(front: *const VlockFront) -> Result<&'a VlockFront, Fail> {
    front.as_ref().ok_or_else(|| null("front"))
}

/// Number of modes `q - p`.
///
/// # Safety
/// `front` must be a live handle; `out_count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_mode_count(
    front: *const VlockFront,
    out_count: *mut u32,
) -> VlockStatus {
    guard(|| {
        let f = front_ref(front)?;
        put(out_count, f.profile.solution.n_modes() as u32, "out_count")
    })
}

/// Root `γ_j` and weight `k_j` of mode `j` (0-based; mode 0 is the strong real root).
///
/// # Safety
/// `front` must be a live handle; out-pointers null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_mode(
    front: *const VlockFront,
    j: u32,
    out_gamma_re: *mut f64,
    out_gamma_im: *mut f64,
    out_k_re: *mut f64,
    out_k_im: *mut f64,
) -> VlockStatus {
    guard(|| {
        let sol = &front_ref(front)?.profile.solution;
        let j = j as usize;
        let (Some(g), Some(k)) = (sol.roots.gammas.get(j), sol.coefficients.ks.get(j)) else {
            return Err(Fail(
                VlockStatus::OutOfRange,
                format!("mode {j} of {}", sol.n_modes()),
            ));
        };
        for (out, v) in [
            (out_gamma_re, g.re),
            (out_gamma_im, g.im),
            (out_k_re, k.re),
            (out_k_im, k.im),
        ] {
            if !out.is_null() {
                out.write(v);
            }
        }
        Ok(())
    })
}

/// Profile value `φ_i` at any site.
///
/// # Safety
/// `front` must be a live handle; `out_phi` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_phi(
    front: *const VlockFront,
    i: i64,
    out_phi: *mut f64,
) -> VlockStatus {
    guard(|| {
        let sol = &front_ref(front)?.profile.solution;
        if i > 0 && (i as u64).saturating_mul(sol.speed.q() as u64) > u32::MAX as u64 {
            return Err(Fail(
                VlockStatus::OutOfRange,
                format!("site {i} too far out"),
            ));
        }
        put(out_phi, sol.profile_value(i)?, "out_phi")
    })
}

/// `Γ_n`, the intermediate-generation value `n/q` sites into the front.
///
/// # Safety
/// `front` must be a live handle; `out_value` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_gamma_sum(
    front: *const VlockFront,
    n: u32,
    out_value: *mut f64,
) -> VlockStatus {
    guard(|| {
        let sol = &front_ref(front)?.profile.solution;
        put(out_value, sol.gamma_sum(n)?, "out_value")
    })
}

/// Sup-norm distance between the stored window and its image under the locked map at threshold `c`.
///
/// # Safety
/// `front` must be a live handle; `out_residual` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_residual(
    front: *const VlockFront,
    c: f64,
    out_residual: *mut f64,
) -> VlockStatus {
    guard(|| {
        let prof = &front_ref(front)?.profile;
        let params = Params::from_linear(*prof.params(), c)?;
        put(
            out_residual,
            fixed_point_residual(prof, &params, prof.speed())?,
            "out_residual",
        )
    })
}

/// Positivity check of the whole profile.
///
/// `out_i_star` receives the site from which the leading mode dominates, or 0
/// when the tail could not be certified.
///
/// # Safety
/// `front` must be a live handle; out-pointers null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_front_positivity(
    front: *const VlockFront,
    out_positive: *mut bool,
    out_i_star: *mut u64,
) -> VlockStatus {
    guard(|| {
        let cert = positivity_certificate(&front_ref(front)?.profile);
        put(
            out_positive,
            cert.positive && cert.tail_certified,
            "out_positive",
        )?;
        if !out_i_star.is_null() {
            out_i_star.write(if cert.tail_certified {
                cert.i_star.unwrap_or(0)
            } else {
                0
            });
        }
        Ok(())
    })
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct VlockSimConfig {
    pub lattice_size: usize,
    pub transient_generations: u64,
    pub measure_generations: u64,
    pub capacity_seed_width: usize,
    pub shift_trigger_site: usize,
}

impl From<VlockSimConfig> for SimConfig {
    fn from(c: VlockSimConfig) -> Self {
        SimConfig {
            lattice_size: c.lattice_size,
            transient_generations: c.transient_generations,
            measure_generations: c.measure_generations,
            capacity_seed_width: c.capacity_seed_width,
            shift_trigger_site: c.shift_trigger_site,
        }
    }
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct VlockSpeedMeasurement {
    pub measured_speed: f64,
    pub shift_count: u64,
    pub generations: u64,
}

#[no_mangle]
pub extern "C" fn vlock_sim_config_default() -> VlockSimConfig {
    let d = SimConfig::default();
    VlockSimConfig {
        lattice_size: d.lattice_size,
        transient_generations: d.transient_generations,
        measure_generations: d.measure_generations,
        capacity_seed_width: d.capacity_seed_width,
        shift_trigger_site: d.shift_trigger_site,
    }
}

/// Shifting-window simulation. A null `config` uses the defaults.
///
/// # Safety
/// `config` must be null or valid for reads; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn vlock_simulate_speed(
    r: f64,
    m: f64,
    c: f64,
    config: *const VlockSimConfig,
    out: *mut VlockSpeedMeasurement,
) -> VlockStatus {
    guard(|| {
        let cfg = config
            .as_ref()
            .map_or_else(SimConfig::default, |c| SimConfig::from(*c));
        let meas = simulate_speed(&Params::new(r, m, c)?, &cfg)?;
        let value = VlockSpeedMeasurement {
            measured_speed: meas.measured_speed,
            shift_count: meas.shift_count,
            generations: meas.generations,
        };
        put(out, value, "out")
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn errors_map_to_codes() {
        assert_eq!(
            VlockStatus::from(&Error::Degenerate("x".into())),
            VlockStatus::Degenerate
        );
        assert_eq!(
            VlockStatus::from(&Error::NotPositive {
                site: 1,
                value: -1.0
            }),
            VlockStatus::NotPositive
        );
        let io = Error::Io(std::io::Error::other("x"));
        assert_eq!(VlockStatus::from(&io), VlockStatus::Io);
    }

    #[test]
    fn panics_become_status() {
        assert_eq!(guard(|| panic!("boom")), VlockStatus::Panic);
        let msg = unsafe { CStr::from_ptr(vlock_last_error_message()) };
        assert_eq!(msg.to_str().unwrap(), "internal panic");
    }
}
