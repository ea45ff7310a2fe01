//! C interface to `ratings_market`.
//!
//! Parameters and equilibrium lists are opaque handles created and freed
//! through this interface. Every fallible function returns an [`RmStatus`];
//! on failure [`rm_last_error`] describes the problem. Results are written
//! through out-pointers only on success. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};

use ratings_market::equilibrium::discriminatory_q_interval;
use ratings_market::mechanics::{k_threshold, steady_state, ug_increasing_interval};
use ratings_market::stability::solve_with_stability;
use ratings_market::{
    validate_params, Equilibrium, EquilibriumKind, Error, MarketParams, QueuePair, RawParams, StabilityLabel,
};

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStatus {
    Ok = 0,
    NullPointer = 1,
    ViolatedBound = 2,
    DegenerateQueue = 3,
    Indeterminate = 4,
    InvalidRegime = 5,
    BracketFailure = 6,
    OutOfBand = 7,
    MultipleEquilibria = 8,
    NoEquilibrium = 9,
    StepTooLarge = 10,
    InvalidArgument = 11,
    IndexOutOfRange = 12,
    Panic = 13,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmKind {
    NoTrade = 0,
    NonDiscriminatory = 1,
    Discriminatory = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RmStability {
    Stable = 0,
    Unstable = 1,
    NotAssessed = 2,
}

/// Seller masses by (type, rating).
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct RmSteadyState {
    pub p_hg: f64,
    pub p_lg: f64,
    pub p_hb: f64,
    pub p_lb: f64,
}

/// One equilibrium. Group 1 is the group with the longer `G` queue.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RmEquilibrium {
    pub kind: RmKind,
    pub stability: RmStability,
    pub lambda_g1: f64,
    pub lambda_b1: f64,
    pub lambda_g2: f64,
    pub lambda_b2: f64,
    pub buyers1: f64,
    pub buyers2: f64,
    pub buyer_payoff: f64,
}

/// Validated market parameters.
pub struct RmParams(MarketParams);

/// Equilibria with stability verdicts.
pub struct RmEquilibria(Vec<RmEquilibrium>);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RmStatus {
    match e {
        Error::ViolatedBound { .. } => RmStatus::ViolatedBound,
        Error::DegenerateQueue => RmStatus::DegenerateQueue,
        Error::Indeterminate { .. } => RmStatus::Indeterminate,
        Error::InvalidRegime(_) => RmStatus::InvalidRegime,
        Error::BracketFailure { .. } => RmStatus::BracketFailure,
        Error::OutOfBand { .. } => RmStatus::OutOfBand,
        Error::MultipleEquilibria { .. } => RmStatus::MultipleEquilibria,
        Error::NoEquilibrium { .. } => RmStatus::NoEquilibrium,
        Error::StepTooLarge { .. } => RmStatus::StepTooLarge,
        Error::InvalidArgument(_) => RmStatus::InvalidArgument,
    }
}

fn fail(status: RmStatus, msg: impl Into<String>) -> RmStatus {
    set_error(msg.into());
    status
}

/// Runs `body`, mapping library errors and panics to status codes.
fn guard<F: FnOnce() -> Result<(), RmStatus>>(body: F) -> RmStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => RmStatus::Ok,
        Ok(Err(s)) => s,
        Err(_) => fail(RmStatus::Panic, "internal panic"),
    }
}

fn lib<T>(r: ratings_market::Result<T>) -> Result<T, RmStatus> {
    r.map_err(|e| fail(status_of(&e), e.to_string()))
}

fn non_null<T>(p: *const T, what: &str) -> Result<(), RmStatus> {
    if p.is_null() {
        Err(fail(RmStatus::NullPointer, format!("`{what}` is NULL")))
    } else {
        Ok(())
    }
}

unsafe fn params_ref<'a>(p: *const RmParams) -> Result<&'a MarketParams, RmStatus> {
    non_null(p, "params")?;
    Ok(&(*p).0)
}

/// Message for the last failure on this thread, or NULL. Valid until the
/// next failing call on the same thread.
#[no_mangle]
pub extern "C" fn rm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Validates parameters and creates a handle in `*out`.
///
/// # Safety
/// `out` must be NULL or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rm_params_new(
    delta: f64,
    alpha: f64,
    u_high: f64,
    u_low: f64,
    price: f64,
    k: f64,
    buyer_mass: f64,
    out: *mut *mut RmParams,
) -> RmStatus {
    guard(|| {
        non_null(out, "out")?;
        let p = lib(validate_params(&RawParams {
            delta,
            alpha,
            u_high,
            u_low,
            price,
            k,
            buyer_mass,
        }))?;
        *out = Box::into_raw(Box::new(RmParams(p)));
        Ok(())
    })
}

/// # Safety
/// `p` must be NULL or a handle from [`rm_params_new`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_params_free(p: *mut RmParams) {
    if !p.is_null() {
        drop(Box::from_raw(p));
    }
}

/// Elasticity threshold above which the `G` payoff is non-monotone.
///
/// # Safety
/// Pointers must be valid; `params` from [`rm_params_new`].
#[no_mangle]
pub unsafe extern "C" fn rm_k_threshold(params: *const RmParams, out: *mut f64) -> RmStatus {
    guard(|| {
        let p = params_ref(params)?;
        non_null(out, "out")?;
        *out = lib(k_threshold(p))?;
        Ok(())
    })
}

/// Steady-state masses for a unit seller population at the given queues.
///
/// # Safety
/// Pointers must be valid; `params` from [`rm_params_new`].
#[no_mangle]
pub unsafe extern "C" fn rm_steady_state(
    params: *const RmParams,
    lambda_g: f64,
    lambda_b: f64,
    out: *mut RmSteadyState,
) -> RmStatus {
    guard(|| {
        let p = params_ref(params)?;
        non_null(out, "out")?;
        let q = lib(QueuePair::new(lambda_g, lambda_b))?;
        let s = lib(steady_state(q, p, 1.0))?;
        *out = RmSteadyState {
            p_hg: s.p_hg,
            p_lg: s.p_lg,
            p_hb: s.p_hb,
            p_lb: s.p_lb,
        };
        Ok(())
    })
}

/// Interval of `G` queues on which the `G` payoff increases. `*exists` is
/// false when the payoff is monotone; the bounds are then untouched.
///
/// # Safety
/// Pointers must be valid; `params` from [`rm_params_new`].
#[no_mangle]
pub unsafe extern "C" fn rm_increasing_interval(
    params: *const RmParams,
    exists: *mut bool,
    lower: *mut f64,
    upper: *mut f64,
) -> RmStatus {
    guard(|| {
        let p = params_ref(params)?;
        non_null(exists, "exists")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        let iv = lib(ug_increasing_interval(p))?;
        *exists = iv.is_some();
        if let Some((a, b)) = iv {
            *lower = a;
            *upper = b;
        }
        Ok(())
    })
}

/// Buyer masses that support a discriminatory equilibrium.
///
/// # Safety
/// Pointers must be valid; `params` from [`rm_params_new`].
#[no_mangle]
pub unsafe extern "C" fn rm_q_interval(
    params: *const RmParams,
    exists: *mut bool,
    lower: *mut f64,
    upper: *mut f64,
) -> RmStatus {
    guard(|| {
        let p = params_ref(params)?;
        non_null(exists, "exists")?;
        non_null(lower, "lower")?;
        non_null(upper, "upper")?;
        let iv = lib(discriminatory_q_interval(p))?;
        *exists = iv.is_some();
        if let Some(iv) = iv {
            *lower = iv.lower;
            *upper = iv.upper;
        }
        Ok(())
    })
}

fn to_c(e: &Equilibrium) -> RmEquilibrium {
    RmEquilibrium {
        kind: match e.kind {
            EquilibriumKind::NoTrade => RmKind::NoTrade,
            EquilibriumKind::NonDiscriminatory => RmKind::NonDiscriminatory,
            EquilibriumKind::Discriminatory => RmKind::Discriminatory,
        },
        stability: match e.stability {
            StabilityLabel::Stable => RmStability::Stable,
            StabilityLabel::Unstable => RmStability::Unstable,
            StabilityLabel::NotAssessed => RmStability::NotAssessed,
        },
        lambda_g1: e.queues.group1.lambda_g,
        lambda_b1: e.queues.group1.lambda_b,
        lambda_g2: e.queues.group2.lambda_g,
        lambda_b2: e.queues.group2.lambda_b,
        buyers1: e.buyer_split.0,
        buyers2: e.buyer_split.1,
        buyer_payoff: e.buyer_payoff,
    }
}

/// Every equilibrium at the configured buyer mass, with stability.
///
/// # Safety
/// Pointers must be valid; `params` from [`rm_params_new`].
#[no_mangle]
pub unsafe extern "C" fn rm_solve(params: *const RmParams, out: *mut *mut RmEquilibria) -> RmStatus {
    guard(|| {
        let p = params_ref(params)?;
        non_null(out, "out")?;
        let eqs = lib(solve_with_stability(p))?;
        *out = Box::into_raw(Box::new(RmEquilibria(eqs.iter().map(to_c).collect())));
        Ok(())
    })
}

/// Number of equilibria in the list; 0 for NULL.
///
/// # Safety
/// `list` must be NULL or a handle from [`rm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_equilibria_len(list: *const RmEquilibria) -> usize {
    if list.is_null() {
        0
    } else {
        (*list).0.len()
    }
}

/// # Safety
/// `list` from [`rm_solve`]; `out` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn rm_equilibria_get(
    list: *const RmEquilibria,
    index: usize,
    out: *mut RmEquilibrium,
) -> RmStatus {
    guard(|| {
        non_null(list, "list")?;
        non_null(out, "out")?;
        let items = &(*list).0;
        let e = items.get(index).ok_or_else(|| {
            fail(
                RmStatus::IndexOutOfRange,
                format!("index {index} out of range for {} equilibria", items.len()),
            )
        })?;
        *out = *e;
        Ok(())
    })
}

/// # Safety
/// `list` must be NULL or a handle from [`rm_solve`] not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rm_equilibria_free(list: *mut RmEquilibria) {
    if !list.is_null() {
        drop(Box::from_raw(list));
    }
}
