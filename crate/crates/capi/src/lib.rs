//! C ABI over the classifier: load a built model directory, classify text,
//! and read entity attachments through opaque handles.
//!
//! Every function is safe to call with null pointers and reports failures
//! through TaxentStatus; the message behind the most recent error on the
//! current thread is available from taxent_last_error().

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::Path;

use taxent::store::load_model;
use taxent::ClassifierModel;

/// Result of every fallible call in this library.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TaxentStatus {
    /// The call succeeded.
    TaxentOk = 0,
    /// A required pointer argument was null.
    TaxentErrNullArgument = 1,
    /// A string argument was not valid UTF-8.
    TaxentErrInvalidUtf8 = 2,
    /// The model directory could not be loaded or failed verification.
    TaxentErrModel = 3,
    /// A numeric argument was out of range.
    TaxentErrInvalidParameter = 4,
    /// The requested entity has no attachment in the model.
    TaxentErrNotFound = 5,
    /// The library caught an internal panic.
    TaxentErrInternal = 6,
}

use TaxentStatus::*;

/// Opaque handle to a loaded classifier model.
pub struct TaxentModel {
    inner: ClassifierModel,
}

/// Opaque ranked list of (category path, score) rows.
pub struct TaxentRanking {
    items: Vec<(CString, f64)>,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(message: impl Into<String>) {
    let message = message.into();
    let stored = CString::new(message)
        .unwrap_or_else(|_| CString::new("error message contained a nul byte").unwrap());
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(stored));
}

fn fail(status: TaxentStatus, message: impl Into<String>) -> TaxentStatus {
    set_error(message);
    status
}

/// Message for the most recent error on this thread, or null if none has
/// occurred. The pointer stays valid until the next failing call on the
/// same thread.
#[no_mangle]
pub extern "C" fn taxent_last_error() -> *const c_char {
    LAST_ERROR.with(|slot| {
        slot.borrow()
            .as_ref()
            .map_or(std::ptr::null(), |msg| msg.as_ptr())
    })
}

unsafe fn str_arg<'a>(ptr: *const c_char, name: &str) -> Result<&'a str, TaxentStatus> {
    if ptr.is_null() {
        return Err(fail(TaxentErrNullArgument, format!("{name} is null")));
    }
    CStr::from_ptr(ptr)
        .to_str()
        .map_err(|_| fail(TaxentErrInvalidUtf8, format!("{name} is not valid UTF-8")))
}

fn guarded(body: impl FnOnce() -> TaxentStatus) -> TaxentStatus {
    match catch_unwind(AssertUnwindSafe(body)) {
        Ok(status) => status,
        Err(panic) => {
            let message = panic
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| panic.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".to_string());
            fail(TaxentErrInternal, message)
        }
    }
}

/// Loads and verifies a model directory. On success stores a handle in
/// `out_model`; free it with taxent_model_free().
///
/// # Safety
/// `dir` must be a nul-terminated string and `out_model` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn taxent_model_load(
    dir: *const c_char,
    out_model: *mut *mut TaxentModel,
) -> TaxentStatus {
    if out_model.is_null() {
        return fail(TaxentErrNullArgument, "out_model is null");
    }
    *out_model = std::ptr::null_mut();
    let dir = match str_arg(dir, "dir") {
        Ok(d) => d,
        Err(status) => return status,
    };
    guarded(|| match load_model(Path::new(dir)) {
        Ok(model) => {
            *out_model = Box::into_raw(Box::new(TaxentModel { inner: model }));
            TaxentOk
        }
        Err(e) => fail(TaxentErrModel, e.to_string()),
    })
}

/// Frees a model handle. Null is ignored.
///
/// # Safety
/// `model` must have come from taxent_model_load() and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn taxent_model_free(model: *mut TaxentModel) {
    if !model.is_null() {
        drop(Box::from_raw(model));
    }
}

/// Number of categories in the model's taxonomy; 0 for a null handle.
///
/// # Safety
/// `model` must be a live handle from taxent_model_load() or null.
#[no_mangle]
pub unsafe extern "C" fn taxent_model_category_count(model: *const TaxentModel) -> usize {
    if model.is_null() {
        return 0;
    }
    let model = &*model;
    model.inner.tax.len()
}

fn ranking_from(rows: Vec<(String, f64)>) -> *mut TaxentRanking {
    let items = rows
        .into_iter()
        .map(|(path, score)| {
            let path = CString::new(path).expect("category paths contain no nul bytes");
            (path, score)
        })
        .collect();
    Box::into_raw(Box::new(TaxentRanking { items }))
}

/// Classifies `text` and stores the top-`k` ranking in `out_ranking`;
/// free it with taxent_ranking_free().
///
/// # Safety
/// `model` must be a live handle, `text` a nul-terminated string, and
/// `out_ranking` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn taxent_model_classify(
    model: *const TaxentModel,
    text: *const c_char,
    k: usize,
    out_ranking: *mut *mut TaxentRanking,
) -> TaxentStatus {
    if out_ranking.is_null() {
        return fail(TaxentErrNullArgument, "out_ranking is null");
    }
    *out_ranking = std::ptr::null_mut();
    if model.is_null() {
        return fail(TaxentErrNullArgument, "model is null");
    }
    if k == 0 {
        return fail(TaxentErrInvalidParameter, "k must be at least 1");
    }
    let text = match str_arg(text, "text") {
        Ok(t) => t,
        Err(status) => return status,
    };
    guarded(|| {
        let inner = &(*model).inner;
        let result = inner.score_top(text, k);
        let rows = result
            .ranked
            .into_iter()
            .map(|(id, score)| (inner.tax.category(id).path.clone(), score))
            .collect();
        *out_ranking = ranking_from(rows);
        TaxentOk
    })
}

/// Looks up the stored attachment ranking of `entity`; stores it in
/// `out_ranking` on success. Entities absent from the model yield
/// TAXENT_ERR_NOT_FOUND.
///
/// # Safety
/// `model` must be a live handle, `entity` a nul-terminated string, and
/// `out_ranking` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn taxent_model_attachment(
    model: *const TaxentModel,
    entity: *const c_char,
    out_ranking: *mut *mut TaxentRanking,
) -> TaxentStatus {
    if out_ranking.is_null() {
        return fail(TaxentErrNullArgument, "out_ranking is null");
    }
    *out_ranking = std::ptr::null_mut();
    if model.is_null() {
        return fail(TaxentErrNullArgument, "model is null");
    }
    let entity = match str_arg(entity, "entity") {
        Ok(e) => e,
        Err(status) => return status,
    };
    guarded(|| {
        let inner = &(*model).inner;
        match inner.entity_index.get(entity) {
            Some(ranked) => {
                let rows = ranked
                    .iter()
                    .map(|&(id, prob)| (inner.tax.category(id).path.clone(), prob))
                    .collect();
                *out_ranking = ranking_from(rows);
                TaxentOk
            }
            None => fail(
                TaxentErrNotFound,
                format!("entity {entity:?} has no attachment"),
            ),
        }
    })
}

/// Frees a ranking handle. Null is ignored.
///
/// # Safety
/// `ranking` must have come from this library and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn taxent_ranking_free(ranking: *mut TaxentRanking) {
    if !ranking.is_null() {
        drop(Box::from_raw(ranking));
    }
}

/// Number of rows in a ranking; 0 for a null handle.
///
/// # Safety
/// `ranking` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn taxent_ranking_len(ranking: *const TaxentRanking) -> usize {
    if ranking.is_null() {
        return 0;
    }
    let ranking = &*ranking;
    ranking.items.len()
}

/// Category path of row `index`, or null when the handle is null or the
/// index is out of range. The pointer stays valid until the ranking is
/// freed.
///
/// # Safety
/// `ranking` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn taxent_ranking_path(
    ranking: *const TaxentRanking,
    index: usize,
) -> *const c_char {
    if ranking.is_null() {
        return std::ptr::null();
    }
    let ranking = &*ranking;
    ranking
        .items
        .get(index)
        .map_or(std::ptr::null(), |(path, _)| path.as_ptr())
}

/// Score of row `index`; NaN when the handle is null or the index is out
/// of range.
///
/// # Safety
/// `ranking` must be a live handle or null.
#[no_mangle]
pub unsafe extern "C" fn taxent_ranking_score(
    ranking: *const TaxentRanking,
    index: usize,
) -> f64 {
    if ranking.is_null() {
        return f64::NAN;
    }
    let ranking = &*ranking;
    ranking
        .items
        .get(index)
        .map_or(f64::NAN, |&(_, score)| score)
}
