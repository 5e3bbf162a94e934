//! C ABI over `relshap`.
//!
//! Handles are opaque pointers created by `*_new`/`*_load` and released with
//! the matching `*_free`. Every fallible call returns an [`RsStatus`]; on
//! failure a message is available from [`rs_last_error`] until the next call
//! on the same thread. Strings returned to the caller must be released with
//! [`rs_string_free`].

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::sync::Arc;

use relshap::game::{
    exact_banzhaf, exact_shapley, exact_shapley_perm, EvaluatorKind, GameContext,
};
use relshap::relcore::{load_from_schema_file, DatabaseInstance, QuerySpec, TupleId};
use relshap::samplers::{run_estimate, EstimatorConfig};
use relshap::Error;

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsStatus {
    Ok = 0,
    NullArgument = 1,
    InvalidUtf8 = 2,
    Io = 3,
    Parse = 4,
    Invalid = 5,
    CapExceeded = 6,
    Panic = 7,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsEvaluator {
    Naive = 0,
    Compiled = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RsExactMethod {
    Subset = 0,
    Permutation = 1,
    Banzhaf = 2,
}

/// A loaded database instance.
pub struct RsInstance {
    db: Arc<DatabaseInstance>,
}

/// A query bound to an instance, with its player set and evaluator.
pub struct RsContext {
    ctx: GameContext,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("interior nul removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RsStatus {
    match e {
        Error::Io { .. } => RsStatus::Io,
        Error::Json(_) | Error::Csv(_) | Error::Schema(_) | Error::TypeMismatch { .. } => {
            RsStatus::Parse
        }
        Error::Cap(_) => RsStatus::CapExceeded,
        _ => RsStatus::Invalid,
    }
}

struct Fail(RsStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

/// Runs `f`, translating errors and panics into a status code.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RsStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RsStatus::Ok,
        Ok(Err(Fail(code, msg))) => {
            set_error(msg);
            code
        }
        Err(_) => {
            set_error("internal panic".into());
            RsStatus::Panic
        }
    }
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, Fail> {
    if p.is_null() {
        return Err(Fail(RsStatus::NullArgument, format!("{what} is null")));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| Fail(RsStatus::InvalidUtf8, format!("{what} is not UTF-8")))
}

unsafe fn ref_arg<'a, T>(p: *const T, what: &str) -> Result<&'a T, Fail> {
    p.as_ref()
        .ok_or_else(|| Fail(RsStatus::NullArgument, format!("{what} is null")))
}

fn out_arg<T>(p: *mut T, what: &str) -> Result<(), Fail> {
    if p.is_null() {
        return Err(Fail(RsStatus::NullArgument, format!("{what} is null")));
    }
    Ok(())
}

/// Message of the last failed call on this thread, or NULL. Owned by the
/// library; valid until the next call on this thread.
#[no_mangle]
pub extern "C" fn rs_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Loads a schema JSON file and the table files next to it.
///
/// # Safety
/// `schema_path` must be a valid NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_load(
    schema_path: *const c_char,
    out: *mut *mut RsInstance,
) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let path = str_arg(schema_path, "schema_path")?;
        let db = load_from_schema_file(path)?;
        *out = Box::into_raw(Box::new(RsInstance { db: Arc::new(db) }));
        Ok(())
    })
}

/// Number of tuples in the instance.
///
/// # Safety
/// `inst` must be a live handle from [`rs_instance_load`].
#[no_mangle]
pub unsafe extern "C" fn rs_instance_tuple_count(inst: *const RsInstance, out: *mut usize) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ref_arg(inst, "instance")?.db.tuple_count();
        Ok(())
    })
}

/// Resolves `relation#row` or a numeric id to a tuple id.
///
/// # Safety
/// `inst` must be a live handle; `tuple_ref` a valid string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_resolve(
    inst: *const RsInstance,
    tuple_ref: *const c_char,
    out: *mut u32,
) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let inst = ref_arg(inst, "instance")?;
        *out = inst.db.resolve_ref(str_arg(tuple_ref, "tuple_ref")?)?.0;
        Ok(())
    })
}

/// # Safety
/// `inst` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_instance_free(inst: *mut RsInstance) {
    if !inst.is_null() {
        drop(Box::from_raw(inst));
    }
}

/// Binds a query (JSON text) to an instance. The context keeps its own
/// reference to the instance, which may be freed independently.
///
/// # Safety
/// `inst` must be a live handle; `query_json` a valid string; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_context_new(
    inst: *const RsInstance,
    query_json: *const c_char,
    evaluator: RsEvaluator,
    out: *mut *mut RsContext,
) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let inst = ref_arg(inst, "instance")?;
        let q = QuerySpec::from_json(str_arg(query_json, "query_json")?)?;
        let kind = match evaluator {
            RsEvaluator::Naive => EvaluatorKind::Naive,
            RsEvaluator::Compiled => EvaluatorKind::Compiled,
        };
        let ctx = GameContext::new(inst.db.clone(), &q, kind)?;
        *out = Box::into_raw(Box::new(RsContext { ctx }));
        Ok(())
    })
}

/// Number of players (endogenous lineage tuples).
///
/// # Safety
/// `ctx` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_context_player_count(ctx: *const RsContext, out: *mut usize) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ref_arg(ctx, "context")?.ctx.n();
        Ok(())
    })
}

/// Query value with every player present.
///
/// # Safety
/// `ctx` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_context_full_value(ctx: *const RsContext, out: *mut f64) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        *out = ref_arg(ctx, "context")?.ctx.full_value()?;
        Ok(())
    })
}

/// Exact value of `target` by enumeration. Fails with
/// `RS_STATUS_CAP_EXCEEDED` when the game is too large.
///
/// # Safety
/// `ctx` must be a live handle; `out` writable.
#[no_mangle]
pub unsafe extern "C" fn rs_exact(
    ctx: *const RsContext,
    target: u32,
    method: RsExactMethod,
    out: *mut f64,
) -> RsStatus {
    guard(|| {
        out_arg(out, "out")?;
        let ctx = &ref_arg(ctx, "context")?.ctx;
        let t = TupleId(target);
        *out = match method {
            RsExactMethod::Subset => exact_shapley(ctx, t)?,
            RsExactMethod::Permutation => exact_shapley_perm(ctx, t)?,
            RsExactMethod::Banzhaf => exact_banzhaf(ctx, t)?,
        };
        Ok(())
    })
}

/// Sampled estimate. `config_json` holds at least `method` and `budget`
/// (e.g. `{"method":"arss","budget":1000,"seed":7}`). The full report is
/// written to `report_json` as a new string when that pointer is non-NULL.
///
/// # Safety
/// `ctx` must be a live handle; `config_json` a valid string; `value` writable;
/// `report_json` NULL or writable.
#[no_mangle]
pub unsafe extern "C" fn rs_estimate(
    ctx: *const RsContext,
    target: u32,
    config_json: *const c_char,
    value: *mut f64,
    report_json: *mut *mut c_char,
) -> RsStatus {
    guard(|| {
        out_arg(value, "value")?;
        let ctx = &ref_arg(ctx, "context")?.ctx;
        let cfg: EstimatorConfig = serde_json::from_str(str_arg(config_json, "config_json")?)
            .map_err(|e| Fail(RsStatus::Parse, format!("estimator config: {e}")))?;
        let rep = run_estimate(ctx, TupleId(target), &cfg)?;
        *value = rep.value;
        if !report_json.is_null() {
            *report_json = CString::new(rep.to_json())
                .expect("JSON has no interior nul")
                .into_raw();
        }
        Ok(())
    })
}

/// # Safety
/// `ctx` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_context_free(ctx: *mut RsContext) {
    if !ctx.is_null() {
        drop(Box::from_raw(ctx));
    }
}

/// # Safety
/// `s` must be NULL or a string returned by this library and not yet freed.
#[no_mangle]
pub unsafe extern "C" fn rs_string_free(s: *mut c_char) {
    if !s.is_null() {
        drop(CString::from_raw(s));
    }
}
