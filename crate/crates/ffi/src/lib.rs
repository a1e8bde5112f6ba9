//! C ABI over the stieltjes toolkit.
//!
//! Objects are opaque handles created by `stj_*` constructors and released
//! with the matching `stj_*_free`. Every entry point returns an
//! [`StjStatus`]; on failure `stj_last_error` describes the cause. The
//! message is thread-local and valid until the next call on that thread.
//! Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, c_void, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;
use std::ptr;

use stieltjes::cli::CliError;
use stieltjes::g_exponential::g_exp;
use stieltjes::ls_measure::{integrate, measure_interval, Integrand};
use stieltjes::pv::{simulate, Scenario};
use stieltjes::solver::{euler_solve, StieltjesIvp, Trajectory};
use stieltjes::Derivator;

/// Result code of every entry point.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StjStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Numerical = 3,
    BufferTooSmall = 4,
    Panic = 5,
}

/// A left-continuous derivator of bounded variation.
pub struct StjDerivator {
    inner: Derivator,
}

/// A solver trajectory: grid times and one state vector per time.
pub struct StjTrajectory {
    inner: Trajectory,
}

/// A PV/battery scenario.
pub struct StjScenario {
    inner: Scenario,
}

/// Scalar function of time. `user` is passed through unchanged.
pub type StjScalarFn = Option<unsafe extern "C" fn(t: f64, user: *mut c_void) -> f64>;

/// Right-hand side: writes `n` rates for time `t` and state `x` to `out`.
pub type StjRhsFn = Option<unsafe extern "C" fn(t: f64, x: *const f64, out: *mut f64, n: usize, user: *mut c_void)>;

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(StjStatus, String);

impl From<CliError> for Failure {
    fn from(e: CliError) -> Self {
        let status = match e {
            CliError::Input(_) => StjStatus::InvalidArgument,
            CliError::Numerical(_) => StjStatus::Numerical,
        };
        Failure(status, e.message().to_string())
    }
}

fn classify<E: Into<CliError>>(e: E) -> Failure {
    e.into().into()
}

fn null(what: &str) -> Failure {
    Failure(StjStatus::NullPointer, format!("{what} is null"))
}

fn invalid(msg: impl Into<String>) -> Failure {
    Failure(StjStatus::InvalidArgument, msg.into())
}

/// Runs `body`, converting failures and panics into a status.
fn guard(body: impl FnOnce() -> Result<(), Failure>) -> StjStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            StjStatus::Ok
        }
        Ok(Err(Failure(status, msg))) => {
            set_error(&msg);
            status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(&format!("internal panic: {msg}"));
            StjStatus::Panic
        }
    }
}

unsafe fn as_ref<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn out_ptr<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn slice<'a>(p: *const f64, n: usize, what: &str) -> Result<&'a [f64], Failure> {
    if n == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, n))
    }
}

unsafe fn text<'a>(p: *const c_char, what: &str) -> Result<&'a str, Failure> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p).to_str().map_err(|_| invalid(format!("{what} is not UTF-8")))
}

fn boxed<T>(value: T) -> *mut T {
    Box::into_raw(Box::new(value))
}

/// Message for the last failed call on this thread, or null after a success.
#[no_mangle]
pub extern "C" fn stj_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Frees a string returned by this library. Null is ignored.
///
/// # Safety
/// `s` must come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn stj_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}

/// Parses a derivator from its JSON description.
///
/// # Safety
/// `json` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_from_json(json: *const c_char, out: *mut *mut StjDerivator) -> StjStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = Derivator::from_json(text(json, "json")?).map_err(classify)?;
        *out = boxed(StjDerivator { inner: g });
        Ok(())
    })
}

/// `g(t) = t - a` on `[a, b]`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_identity(a: f64, b: f64, out: *mut *mut StjDerivator) -> StjStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let g = Derivator::identity(a, b).map_err(classify)?;
        *out = boxed(StjDerivator { inner: g });
        Ok(())
    })
}

/// Piecewise-linear derivator: `n_breakpoints` breakpoints, one slope per
/// segment, and `n_jumps` jumps given as parallel arrays of times and sizes.
///
/// # Safety
/// Arrays must hold the stated number of elements; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_piecewise_linear(
    anchor: f64,
    breakpoints: *const f64,
    n_breakpoints: usize,
    slopes: *const f64,
    jump_times: *const f64,
    jump_sizes: *const f64,
    n_jumps: usize,
    out: *mut *mut StjDerivator,
) -> StjStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let bps = slice(breakpoints, n_breakpoints, "breakpoints")?;
        let slopes = slice(slopes, n_breakpoints.saturating_sub(1), "slopes")?;
        let times = slice(jump_times, n_jumps, "jump_times")?;
        let sizes = slice(jump_sizes, n_jumps, "jump_sizes")?;
        let jumps: Vec<(f64, f64)> = times.iter().copied().zip(sizes.iter().copied()).collect();
        let g = Derivator::piecewise_linear(anchor, bps.to_vec(), slopes, &jumps).map_err(classify)?;
        *out = boxed(StjDerivator { inner: g });
        Ok(())
    })
}

/// # Safety
/// `g` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_free(g: *mut StjDerivator) {
    if !g.is_null() {
        drop(Box::from_raw(g));
    }
}

/// Writes the domain `[a, b]`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_domain(g: *const StjDerivator, a: *mut f64, b: *mut f64) -> StjStatus {
    guard(|| {
        let (lo, hi) = as_ref(g, "g")?.inner.domain();
        *out_ptr(a, "a")? = lo;
        *out_ptr(b, "b")? = hi;
        Ok(())
    })
}

/// `g(t)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_eval(g: *const StjDerivator, t: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let v = as_ref(g, "g")?.inner.eval(t).map_err(classify)?;
        *out_ptr(out, "out")? = v;
        Ok(())
    })
}

/// `g(t⁺)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_eval_right(g: *const StjDerivator, t: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let v = as_ref(g, "g")?.inner.eval_right(t).map_err(classify)?;
        *out_ptr(out, "out")? = v;
        Ok(())
    })
}

/// Total variation over the whole domain.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_total_variation(g: *const StjDerivator, out: *mut f64) -> StjStatus {
    guard(|| {
        let v = as_ref(g, "g")?.inner.total_variation();
        *out_ptr(out, "out")? = v;
        Ok(())
    })
}

/// Variation function `t ↦ var_g[a, t]` as a new derivator.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_variation(g: *const StjDerivator, out: *mut *mut StjDerivator) -> StjStatus {
    guard(|| {
        let v = as_ref(g, "g")?.inner.variation();
        *out_ptr(out, "out")? = boxed(StjDerivator { inner: v });
        Ok(())
    })
}

/// Positive and negative variations with `g = g(a) + positive - negative`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_jordan(
    g: *const StjDerivator,
    positive: *mut *mut StjDerivator,
    negative: *mut *mut StjDerivator,
) -> StjStatus {
    guard(|| {
        let g = as_ref(g, "g")?;
        let (p_out, n_out) = (out_ptr(positive, "positive")?, out_ptr(negative, "negative")?);
        let (p, n) = g.inner.jordan();
        *p_out = boxed(StjDerivator { inner: p });
        *n_out = boxed(StjDerivator { inner: n });
        Ok(())
    })
}

/// JSON description; release with `stj_string_free`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_derivator_to_json(g: *const StjDerivator, out: *mut *mut c_char) -> StjStatus {
    guard(|| {
        let json = as_ref(g, "g")?.inner.to_json();
        let c = CString::new(json).map_err(|_| invalid("JSON contains NUL"))?;
        *out_ptr(out, "out")? = c.into_raw();
        Ok(())
    })
}

/// `μ_g([u, v))`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_measure(g: *const StjDerivator, u: f64, v: f64, out: *mut f64) -> StjStatus {
    guard(|| {
        let m = measure_interval(&as_ref(g, "g")?.inner, u, v).map_err(classify)?;
        *out_ptr(out, "out")? = m;
        Ok(())
    })
}

/// `∫_{[u, v)} f dμ_g` for a callback `f`.
///
/// # Safety
/// Pointers must be valid; `f` must be callable with `user`.
#[no_mangle]
pub unsafe extern "C" fn stj_integrate(
    g: *const StjDerivator,
    f: StjScalarFn,
    user: *mut c_void,
    u: f64,
    v: f64,
    out: *mut f64,
) -> StjStatus {
    guard(|| {
        let g = as_ref(g, "g")?;
        let f = f.ok_or_else(|| null("f"))?;
        let out = out_ptr(out, "out")?;
        let integrand = Integrand::new(move |t| f(t, user));
        *out = integrate(&integrand, &g.inner, u, v).map_err(classify)?;
        Ok(())
    })
}

/// g-exponential `e_h(t; a)` for a callback `h`.
///
/// # Safety
/// Pointers must be valid; `h` must be callable with `user`.
#[no_mangle]
pub unsafe extern "C" fn stj_gexp(
    g: *const StjDerivator,
    h: StjScalarFn,
    user: *mut c_void,
    t: f64,
    out: *mut f64,
) -> StjStatus {
    guard(|| {
        let g = as_ref(g, "g")?;
        let h = h.ok_or_else(|| null("h"))?;
        let out = out_ptr(out, "out")?;
        let integrand = Integrand::new(move |s| h(s, user));
        *out = g_exp(&integrand, &g.inner, t).map_err(classify)?;
        Ok(())
    })
}

struct CallbackRhs {
    f: unsafe extern "C" fn(f64, *const f64, *mut f64, usize, *mut c_void),
    user: *mut c_void,
}

// The solver runs on the calling thread; the caller owns `user` for the
// duration of the call.
unsafe impl Send for CallbackRhs {}
unsafe impl Sync for CallbackRhs {}

/// Stieltjes–Euler solve of `x'_{g_i} = f_i(t, x)` with one derivator per
/// component.
///
/// # Safety
/// `derivators` and `x0` must hold `n` elements; `rhs` must be callable with
/// `user`; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_euler_solve(
    derivators: *const *const StjDerivator,
    n: usize,
    x0: *const f64,
    rhs: StjRhsFn,
    user: *mut c_void,
    step: f64,
    out: *mut *mut StjTrajectory,
) -> StjStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        if n == 0 {
            return Err(invalid("need at least one component"));
        }
        if derivators.is_null() {
            return Err(null("derivators"));
        }
        let gs = std::slice::from_raw_parts(derivators, n)
            .iter()
            .map(|&p| as_ref(p, "derivator").map(|g| g.inner.clone()))
            .collect::<Result<Vec<_>, _>>()?;
        let x0 = slice(x0, n, "x0")?.to_vec();
        let cb = CallbackRhs { f: rhs.ok_or_else(|| null("rhs"))?, user };
        let ivp = StieltjesIvp::new(gs, x0, move |t, x, rates| {
            let cb = &cb;
            (cb.f)(t, x.as_ptr(), rates.as_mut_ptr(), x.len(), cb.user)
        })
        .map_err(classify)?;
        let traj = euler_solve(&ivp, step).map_err(classify)?;
        *out = boxed(StjTrajectory { inner: traj });
        Ok(())
    })
}

/// # Safety
/// `tr` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn stj_trajectory_free(tr: *mut StjTrajectory) {
    if !tr.is_null() {
        drop(Box::from_raw(tr));
    }
}

/// Number of grid points and state dimension.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_trajectory_shape(tr: *const StjTrajectory, len: *mut usize, dim: *mut usize) -> StjStatus {
    guard(|| {
        let tr = &as_ref(tr, "trajectory")?.inner;
        *out_ptr(len, "len")? = tr.grid.len();
        *out_ptr(dim, "dim")? = tr.dim();
        Ok(())
    })
}

/// Copies the grid times into `buf` (capacity `cap`).
///
/// # Safety
/// `buf` must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn stj_trajectory_times(tr: *const StjTrajectory, buf: *mut f64, cap: usize) -> StjStatus {
    guard(|| {
        let tr = &as_ref(tr, "trajectory")?.inner;
        copy_out(&tr.grid, buf, cap)
    })
}

/// Copies the states row by row (`len × dim` values) into `buf`.
///
/// # Safety
/// `buf` must hold `cap` elements.
#[no_mangle]
pub unsafe extern "C" fn stj_trajectory_states(tr: *const StjTrajectory, buf: *mut f64, cap: usize) -> StjStatus {
    guard(|| {
        let tr = &as_ref(tr, "trajectory")?.inner;
        let flat: Vec<f64> = tr.states.iter().flatten().copied().collect();
        copy_out(&flat, buf, cap)
    })
}

unsafe fn copy_out(src: &[f64], buf: *mut f64, cap: usize) -> Result<(), Failure> {
    if cap < src.len() {
        return Err(Failure(StjStatus::BufferTooSmall, format!("need {} values, buffer holds {cap}", src.len())));
    }
    if src.is_empty() {
        return Ok(());
    }
    if buf.is_null() {
        return Err(null("buf"));
    }
    ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    Ok(())
}

/// The built-in seven-day scenario with the reference parameters.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_scenario_default(out: *mut *mut StjScenario) -> StjStatus {
    guard(|| {
        *out_ptr(out, "out")? = boxed(StjScenario { inner: Scenario::reference() });
        Ok(())
    })
}

/// Scenario from TOML text. Relative weather paths resolve against
/// `base_dir`, or the working directory when it is null.
///
/// # Safety
/// Strings must be NUL-terminated; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn stj_scenario_from_toml(
    toml: *const c_char,
    base_dir: *const c_char,
    out: *mut *mut StjScenario,
) -> StjStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let base = if base_dir.is_null() { "." } else { text(base_dir, "base_dir")? };
        let sc = Scenario::from_toml_str(text(toml, "toml")?, Path::new(base)).map_err(classify)?;
        *out = boxed(StjScenario { inner: sc });
        Ok(())
    })
}

/// # Safety
/// `sc` must come from this library and not be freed twice. Null is ignored.
#[no_mangle]
pub unsafe extern "C" fn stj_scenario_free(sc: *mut StjScenario) {
    if !sc.is_null() {
        drop(Box::from_raw(sc));
    }
}

/// Runs the scenario; the trajectory holds `(E [Wh], H, S)`.
///
/// # Safety
/// Pointers must be valid.
#[no_mangle]
pub unsafe extern "C" fn stj_scenario_simulate(sc: *const StjScenario, out: *mut *mut StjTrajectory) -> StjStatus {
    guard(|| {
        let sc = as_ref(sc, "scenario")?;
        let out = out_ptr(out, "out")?;
        let run = simulate(&sc.inner).map_err(classify)?;
        *out = boxed(StjTrajectory { inner: run.trajectory });
        Ok(())
    })
}
