//! C ABI for `prodtail`.
//!
//! Every fallible function returns a [`PtStatus`] and writes results through
//! out-pointers. On failure the message is kept per thread and can be read
//! with [`pt_last_error_message`]. Streams and trees are opaque handles owned
//! by the caller and released with their `_free` function.
//!
//! The header `include/prodtail.h` is generated from this file at build time.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use prodtail::dist::{self, Method, SimParams};
use prodtail::tail::{self, PoissonPair, PoissonTailQuery, TailQuery};
use prodtail::tree::{self, CentralityTable, GrowingTree};
use prodtail::{Error, Stream};

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtStatus {
    Ok = 0,
    InvalidParameter = 1,
    InvalidVertex = 2,
    Inconsistency = 3,
    NullPointer = 4,
    Io = 5,
    Internal = 6,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PtMethod {
    Direct = 0,
    Compound = 1,
    Beta = 2,
}

impl From<PtMethod> for Method {
    fn from(m: PtMethod) -> Self {
        match m {
            PtMethod::Direct => Method::Direct,
            PtMethod::Compound => Method::Compound,
            PtMethod::Beta => Method::Beta,
        }
    }
}

/// A nonnegative value and its natural log.
#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtLogProb {
    pub p: f64,
    pub ln_p: f64,
}

impl From<tail::LogProb> for PtLogProb {
    fn from(x: tail::LogProb) -> Self {
        Self { p: x.p, ln_p: x.ln_p }
    }
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtXSample {
    pub value: f64,
    pub log_value: f64,
    pub factor_count: u64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtPoissonTailBounds {
    pub lower: f64,
    pub ln_lower: f64,
    /// Meaningful only when `has_upper` is true.
    pub upper: f64,
    pub ln_upper: f64,
    pub has_upper: bool,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtStirlingBounds {
    pub lower: f64,
    pub upper: f64,
    pub exact: f64,
    pub ln_lower: f64,
    pub ln_upper: f64,
    pub ln_exact: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtBoundReport {
    pub t: f64,
    pub lambda: f64,
    pub exact: f64,
    pub log_exact: f64,
    pub bound_optimal: f64,
    pub log_bound_optimal: f64,
    pub bound_moment_best_alpha: f64,
    pub legacy_bound: f64,
    pub log_legacy_bound: f64,
    pub asymptotic_lower: f64,
    pub log_asymptotic_lower: f64,
    pub asymptotic_upper: f64,
    pub log_asymptotic_upper: f64,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct PtTrialRecord {
    pub n: usize,
    pub k: usize,
    pub trials: usize,
    pub successes: usize,
    pub success_rate: f64,
    /// Meaningful only when `has_std_error` is true (more than one trial).
    pub std_error: f64,
    pub has_std_error: bool,
}

/// Opaque random stream.
pub struct PtStream {
    inner: Stream,
}

/// Opaque uniform-attachment tree with its cached centrality table.
pub struct PtTree {
    tree: GrowingTree,
    table: CentralityTable,
}

impl PtTree {
    fn new(tree: GrowingTree) -> Self {
        let table = tree::log_phi_all(&tree);
        Self { tree, table }
    }
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_last_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("nul bytes removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(err: &Error) -> PtStatus {
    match err {
        Error::InvalidParameter(_) | Error::Config(_) => PtStatus::InvalidParameter,
        Error::InvalidVertex { .. } => PtStatus::InvalidVertex,
        Error::Inconsistency(_) => PtStatus::Inconsistency,
        Error::Io(_) | Error::Json(_) => PtStatus::Io,
    }
}

enum Failure {
    Lib(Error),
    Null(&'static str),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Failure::Lib(e)
    }
}

fn guard(body: impl FnOnce() -> Result<(), Failure>) -> PtStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            PtStatus::Ok
        }
        Ok(Err(Failure::Lib(e))) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
        Ok(Err(Failure::Null(what))) => {
            set_last_error(format!("null pointer: {what}"));
            PtStatus::NullPointer
        }
        Err(_) => {
            set_last_error("internal panic".to_string());
            PtStatus::Internal
        }
    }
}

unsafe fn out_ref<'a, T>(p: *mut T, what: &'static str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or(Failure::Null(what))
}

unsafe fn in_ref<'a, T>(p: *const T, what: &'static str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or(Failure::Null(what))
}

/// Message for the most recent failure on this thread, or NULL after a
/// success. Valid until the next call into this library on the same thread.
#[no_mangle]
pub extern "C" fn pt_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn pt_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

// ---- streams ----------------------------------------------------------------

#[no_mangle]
pub extern "C" fn pt_stream_new(seed: u64) -> *mut PtStream {
    Box::into_raw(Box::new(PtStream {
        inner: Stream::new(seed),
    }))
}

/// Child stream named by `(label, index)`; NULL if `stream` or `label` is NULL.
///
/// # Safety
/// `stream` must come from this library and `label` must be NUL-terminated.
#[no_mangle]
pub unsafe extern "C" fn pt_stream_derive(
    stream: *const PtStream,
    label: *const c_char,
    index: u64,
) -> *mut PtStream {
    if stream.is_null() || label.is_null() {
        return ptr::null_mut();
    }
    let label = CStr::from_ptr(label).to_string_lossy();
    Box::into_raw(Box::new(PtStream {
        inner: (*stream).inner.derive(&label, index),
    }))
}

/// # Safety
/// `stream` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_stream_free(stream: *mut PtStream) {
    if !stream.is_null() {
        drop(Box::from_raw(stream));
    }
}

// ---- sampling ---------------------------------------------------------------

fn sim_params(method: PtMethod, lambda: f64, beta_shape: f64) -> Result<SimParams, Error> {
    match method {
        // The beta construction is the direct one with rate beta_shape.
        PtMethod::Beta => SimParams::new(beta_shape.max(f64::MIN_POSITIVE), 0)?
            .with_beta_shape(beta_shape),
        _ => SimParams::new(lambda, 0),
    }
}

/// One draw of X. `beta_shape` is used only by `PT_METHOD_BETA`.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_sample_x(
    stream: *mut PtStream,
    method: PtMethod,
    lambda: f64,
    beta_shape: f64,
    out: *mut PtXSample,
) -> PtStatus {
    guard(|| {
        let s = out_ref(stream, "stream")?;
        let out = out_ref(out, "out")?;
        let params = sim_params(method, lambda, beta_shape)?;
        let x = dist::sample_x(method.into(), &params, &mut s.inner)?;
        *out = PtXSample {
            value: x.value,
            log_value: x.log_value,
            factor_count: x.factor_count,
        };
        Ok(())
    })
}

/// `count` draws of X into `out[0..count]`.
///
/// # Safety
/// `stream` must be a live handle and `out` must hold `count` elements.
#[no_mangle]
pub unsafe extern "C" fn pt_sample_many(
    stream: *mut PtStream,
    method: PtMethod,
    lambda: f64,
    beta_shape: f64,
    count: usize,
    out: *mut PtXSample,
) -> PtStatus {
    guard(|| {
        let s = out_ref(stream, "stream")?;
        if out.is_null() && count > 0 {
            return Err(Failure::Null("out"));
        }
        let params = sim_params(method, lambda, beta_shape)?;
        let xs = dist::sample_many(method.into(), &params, count, &mut s.inner)?;
        for (i, x) in xs.iter().enumerate() {
            *out.add(i) = PtXSample {
                value: x.value,
                log_value: x.log_value,
                factor_count: x.factor_count,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_moment_exact(order: f64, lambda: f64, out: *mut f64) -> PtStatus {
    guard(|| {
        *out_ref(out, "out")? = dist::moment_exact(order, lambda)?;
        Ok(())
    })
}

// ---- tail -------------------------------------------------------------------

unsafe fn write_log_prob(
    out: *mut PtLogProb,
    f: impl FnOnce() -> prodtail::Result<tail::LogProb>,
) -> PtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        *out = f()?.into();
        Ok(())
    })
}

/// Exact `P(X <= t)`; 0 for `t <= 0` and 1 for `t >= 1`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tail_exact(t: f64, lambda: f64, out: *mut PtLogProb) -> PtStatus {
    write_log_prob(out, || tail::tail_exact(&TailQuery::new(t, lambda)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tail_bound_moment(
    t: f64,
    lambda: f64,
    alpha: f64,
    out: *mut PtLogProb,
) -> PtStatus {
    write_log_prob(out, || {
        tail::tail_bound_moment(&TailQuery::new(t, lambda).with_alpha(alpha))
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_optimal_alpha(t: f64, lambda: f64, out: *mut f64) -> PtStatus {
    guard(|| {
        *out_ref(out, "out")? = tail::optimal_alpha(&TailQuery::new(t, lambda))?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tail_bound_optimal(
    t: f64,
    lambda: f64,
    out: *mut PtLogProb,
) -> PtStatus {
    write_log_prob(out, || tail::tail_bound_optimal(&TailQuery::new(t, lambda)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tail_bound_legacy(t: f64, out: *mut f64) -> PtStatus {
    guard(|| {
        *out_ref(out, "out")? = tail::tail_bound_legacy(t)?;
        Ok(())
    })
}

/// `P(M_mu >= M_nu)`, or `P(M_mu > M_nu)` when `strict`.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_poisson_ge_exact(
    mu: f64,
    nu: f64,
    strict: bool,
    out: *mut PtLogProb,
) -> PtStatus {
    write_log_prob(out, || tail::poisson_ge_exact(&PoissonPair::new(mu, nu), strict))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_poisson_ge_bound(mu: f64, nu: f64, out: *mut PtLogProb) -> PtStatus {
    write_log_prob(out, || tail::poisson_ge_bound(&PoissonPair::new(mu, nu)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_asymptotic_lower(t: f64, lambda: f64, out: *mut PtLogProb) -> PtStatus {
    write_log_prob(out, || tail::asymptotic_lower(&TailQuery::new(t, lambda)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_asymptotic_upper(t: f64, lambda: f64, out: *mut PtLogProb) -> PtStatus {
    write_log_prob(out, || tail::asymptotic_upper(&TailQuery::new(t, lambda)))
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_poisson_tail_bounds(
    n: u64,
    mu: f64,
    out: *mut PtPoissonTailBounds,
) -> PtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = tail::poisson_tail_bounds(&PoissonTailQuery { n, mu })?;
        *out = PtPoissonTailBounds {
            lower: b.lower,
            ln_lower: b.ln_lower,
            upper: b.upper.unwrap_or(f64::NAN),
            ln_upper: b.ln_upper.unwrap_or(f64::NAN),
            has_upper: b.upper.is_some(),
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_stirling_ratio_bounds(n: u64, out: *mut PtStirlingBounds) -> PtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let b = tail::stirling_ratio_bounds(n)?;
        *out = PtStirlingBounds {
            lower: b.lower,
            upper: b.upper,
            exact: b.exact,
            ln_lower: b.ln_lower,
            ln_upper: b.ln_upper,
            ln_exact: b.ln_exact,
        };
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn pt_bound_report(t: f64, lambda: f64, out: *mut PtBoundReport) -> PtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let r = tail::build_bound_report(&TailQuery::new(t, lambda))?;
        *out = PtBoundReport {
            t: r.t,
            lambda: r.lambda,
            exact: r.exact,
            log_exact: r.log_exact,
            bound_optimal: r.bound_optimal,
            log_bound_optimal: r.log_bound_optimal,
            bound_moment_best_alpha: r.bound_moment_best_alpha,
            legacy_bound: r.legacy_bound,
            log_legacy_bound: r.log_legacy_bound,
            asymptotic_lower: r.asymptotic_lower,
            log_asymptotic_lower: r.log_asymptotic_lower,
            asymptotic_upper: r.asymptotic_upper,
            log_asymptotic_upper: r.log_asymptotic_upper,
        };
        Ok(())
    })
}

// ---- trees ------------------------------------------------------------------

/// Grows a uniform attachment tree with `n` vertices.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_grow(
    n: usize,
    stream: *mut PtStream,
    out: *mut *mut PtTree,
) -> PtStatus {
    guard(|| {
        let s = out_ref(stream, "stream")?;
        let out = out_ref(out, "out")?;
        let t = tree::grow_uniform_attachment(n, &mut s.inner)?;
        *out = Box::into_raw(Box::new(PtTree::new(t)));
        Ok(())
    })
}

/// Builds a tree from the parent labels of vertices `2..=len+1`.
///
/// # Safety
/// `parents` must hold `len` elements (may be NULL when `len` is 0).
#[no_mangle]
pub unsafe extern "C" fn pt_tree_from_parents(
    parents: *const usize,
    len: usize,
    out: *mut *mut PtTree,
) -> PtStatus {
    guard(|| {
        let out = out_ref(out, "out")?;
        let parents = if len == 0 {
            Vec::new()
        } else {
            if parents.is_null() {
                return Err(Failure::Null("parents"));
            }
            std::slice::from_raw_parts(parents, len).to_vec()
        };
        let t = GrowingTree::from_parents(parents)?;
        *out = Box::into_raw(Box::new(PtTree::new(t)));
        Ok(())
    })
}

/// Vertex count, or 0 for a NULL handle.
///
/// # Safety
/// `tree` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_vertex_count(tree: *const PtTree) -> usize {
    tree.as_ref().map_or(0, |t| t.tree.len())
}

/// # Safety
/// `tree` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_log_phi_direct(
    tree: *const PtTree,
    vertex: usize,
    out: *mut f64,
) -> PtStatus {
    guard(|| {
        let t = in_ref(tree, "tree")?;
        *out_ref(out, "out")? = tree::log_phi_direct(&t.tree, vertex)?;
        Ok(())
    })
}

/// Writes `ln phi` of vertices `1..=n` into `out[0..n]`; `len` must be at least `n`.
///
/// # Safety
/// `tree` must be a live handle and `out` must hold `len` elements.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_log_phi_all(
    tree: *const PtTree,
    out: *mut f64,
    len: usize,
) -> PtStatus {
    guard(|| {
        let t = in_ref(tree, "tree")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let n = t.tree.len();
        if len < n {
            return Err(Error::InvalidParameter(format!("buffer holds {len}, need {n}")).into());
        }
        std::slice::from_raw_parts_mut(out, n).copy_from_slice(&t.table.log_phi[1..]);
        Ok(())
    })
}

/// Writes the `k` most central vertex labels into `out[0..k]`.
///
/// # Safety
/// `tree` must be a live handle and `out` must hold `k` elements.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_top_k(tree: *const PtTree, k: usize, out: *mut usize) -> PtStatus {
    guard(|| {
        let t = in_ref(tree, "tree")?;
        if out.is_null() {
            return Err(Failure::Null("out"));
        }
        let top = tree::top_k_central(&t.table, k)?;
        std::slice::from_raw_parts_mut(out, top.len()).copy_from_slice(&top);
        Ok(())
    })
}

/// # Safety
/// `tree` must be NULL or a handle from this library not yet freed.
#[no_mangle]
pub unsafe extern "C" fn pt_tree_free(tree: *mut PtTree) {
    if !tree.is_null() {
        drop(Box::from_raw(tree));
    }
}

/// Root-finding success rate over `trials` trees of size `n`. Trials use
/// substreams of `stream`, which is not advanced.
///
/// # Safety
/// `stream` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn pt_root_finding_trial(
    n: usize,
    k: usize,
    trials: usize,
    stream: *const PtStream,
    out: *mut PtTrialRecord,
) -> PtStatus {
    guard(|| {
        let s = in_ref(stream, "stream")?;
        let out = out_ref(out, "out")?;
        let r = tree::root_finding_trial(n, k, trials, &s.inner)?;
        *out = PtTrialRecord {
            n: r.n,
            k: r.k,
            trials: r.trials,
            successes: r.successes,
            success_rate: r.success_rate,
            std_error: r.std_error.unwrap_or(f64::NAN),
            has_std_error: r.std_error.is_some(),
        };
        Ok(())
    })
}
