//! C interface to `rankdepth`.
//!
//! Samples and pairwise matrices cross the boundary as opaque handles that
//! the caller releases with the matching `*_free` function. Every fallible
//! call returns an [`RdStatus`]; on failure `rd_last_error_message` describes
//! the problem. Rankings are passed as arrays of 0-based ranks, `ranks[i]`
//! being the position of item `i`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use rankdepth::aggregation::kemeny_sst;
use rankdepth::depth::{depth_empirical, sample_depths};
use rankdepth::error::Error;
use rankdepth::inference::wilcoxon_rank_sum;
use rankdepth::io::{parse_rankings, CsvOptions, RankingFormat};
use rankdepth::models::{sample_mallows, MallowsParams};
use rankdepth::pairwise::{empirical_pairwise, PairwiseMatrix, TransitivityStatus};
use rankdepth::perm::{Metric, Permutation};
use rankdepth::sample::RankingSample;
use rankdepth::trimming::{trim_to_sst, TrimConfig, TrimTarget};

/// Result code of every fallible call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    SizeMismatch = 3,
    InvalidPermutation = 4,
    EmptySample = 5,
    NotTransitive = 6,
    NotStrict = 7,
    TooLarge = 8,
    Parse = 9,
    Io = 10,
    Panic = 11,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdMetric {
    Kendall = 0,
    Rho = 1,
    Footrule = 2,
    Hamming = 3,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RdTransitivity {
    Sst = 0,
    StWithTies = 1,
    NotSt = 2,
}

/// Opaque ranking sample.
pub struct RdSample(RankingSample);

/// Opaque pairwise preference matrix.
pub struct RdPairwise(PairwiseMatrix);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> RdStatus {
    match e {
        Error::SizeMismatch { .. } => RdStatus::SizeMismatch,
        Error::InvalidPermutation(_) => RdStatus::InvalidPermutation,
        Error::EmptySample => RdStatus::EmptySample,
        Error::NotTransitive(..) => RdStatus::NotTransitive,
        Error::NotStrict(..) => RdStatus::NotStrict,
        Error::TooLarge { .. } => RdStatus::TooLarge,
        Error::Parse { .. } => RdStatus::Parse,
        Error::Io(_) => RdStatus::Io,
        Error::Domain(_) => RdStatus::InvalidArgument,
    }
}

struct Fail(RdStatus, String);

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail(status_of(&e), e.to_string())
    }
}

fn null() -> Fail {
    Fail(RdStatus::NullPointer, "null pointer argument".into())
}

/// Runs `f`, recording any error or panic for `rd_last_error_message`.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RdStatus {
    LAST_ERROR.with(|e| *e.borrow_mut() = None);
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RdStatus::Ok,
        Ok(Err(Fail(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            RdStatus::Panic
        }
    }
}

fn metric(m: RdMetric) -> Metric {
    match m {
        RdMetric::Kendall => Metric::KendallTau,
        RdMetric::Rho => Metric::SpearmanRho,
        RdMetric::Footrule => Metric::SpearmanFootrule,
        RdMetric::Hamming => Metric::Hamming,
    }
}

unsafe fn slice<'a, T>(p: *const T, len: usize) -> Result<&'a [T], Fail> {
    if len == 0 {
        return Ok(&[]);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts(p, len))
}

unsafe fn slice_mut<'a, T>(p: *mut T, len: usize) -> Result<&'a mut [T], Fail> {
    if len == 0 {
        return Ok(&mut []);
    }
    if p.is_null() {
        return Err(null());
    }
    Ok(std::slice::from_raw_parts_mut(p, len))
}

unsafe fn get<'a, T>(p: *const T) -> Result<&'a T, Fail> {
    p.as_ref().ok_or_else(null)
}

unsafe fn put<T>(out: *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(value);
    Ok(())
}

/// Checks `out` before allocating so a NULL destination leaks nothing.
unsafe fn put_handle<T>(out: *mut *mut T, value: T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(null());
    }
    out.write(Box::into_raw(Box::new(value)));
    Ok(())
}

unsafe fn perm(ranks: *const usize, n: usize) -> Result<Permutation, Fail> {
    Ok(Permutation::new(slice(ranks, n)?.to_vec())?)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn rd_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message for the last failed call on this thread, or NULL. Valid until the
/// next call into the library from the same thread.
#[no_mangle]
pub extern "C" fn rd_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Builds a sample from `count` rankings of `n_items` items stored row by row.
///
/// # Safety
/// `ranks` must point to `count * n_items` values and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_new(
    ranks: *const usize,
    n_items: usize,
    count: usize,
    out: *mut *mut RdSample,
) -> RdStatus {
    guard(|| {
        let len = n_items.checked_mul(count).ok_or_else(|| Fail(RdStatus::InvalidArgument, "size overflow".into()))?;
        let data = slice(ranks, len)?;
        if n_items == 0 {
            return Err(Fail(RdStatus::InvalidArgument, "rankings need at least one item".into()));
        }
        let rankings = data.chunks(n_items).map(|r| Permutation::new(r.to_vec())).collect::<Result<Vec<_>, _>>()?;
        let s = RankingSample::new(rankings)?;
        put_handle(out, RdSample(s))
    })
}

/// Parses CSV text with one ranking per line.
///
/// # Safety
/// `text` must be a NUL-terminated string and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_from_csv(
    text: *const c_char,
    ordering: bool,
    one_based: bool,
    out: *mut *mut RdSample,
) -> RdStatus {
    guard(|| {
        if text.is_null() {
            return Err(null());
        }
        let text = CStr::from_ptr(text)
            .to_str()
            .map_err(|e| Fail(RdStatus::Parse, format!("input is not UTF-8: {e}")))?;
        let format = if ordering { RankingFormat::Ordering } else { RankingFormat::Ranks };
        let s = parse_rankings(text, CsvOptions { format, one_based })?;
        put_handle(out, RdSample(s))
    })
}

/// Draws `count` rankings from a Mallows model. A NULL `center` means the
/// identity.
///
/// # Safety
/// `center` must be NULL or point to `n_items` values; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_mallows(
    center: *const usize,
    n_items: usize,
    phi: f64,
    count: usize,
    seed: u64,
    out: *mut *mut RdSample,
) -> RdStatus {
    guard(|| {
        let c = if center.is_null() { Permutation::identity(n_items) } else { perm(center, n_items)? };
        let s = sample_mallows(&MallowsParams::new(c, phi)?, count, seed)?;
        put_handle(out, RdSample(s))
    })
}

/// # Safety
/// `sample` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_free(sample: *mut RdSample) {
    if !sample.is_null() {
        drop(Box::from_raw(sample));
    }
}

/// Number of rankings, 0 for NULL.
///
/// # Safety
/// `sample` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_len(sample: *const RdSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.len())
}

/// Number of items per ranking, 0 for NULL.
///
/// # Safety
/// `sample` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_n_items(sample: *const RdSample) -> usize {
    sample.as_ref().map_or(0, |s| s.0.rankings()[0].len())
}

/// Copies ranking `index` into `out_ranks`, which holds `n_items` values.
///
/// # Safety
/// `sample` must be a live handle and `out_ranks` must hold `n_items` values.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_get(
    sample: *const RdSample,
    index: usize,
    out_ranks: *mut usize,
    n_items: usize,
) -> RdStatus {
    guard(|| {
        let s = &get(sample)?.0;
        let r = s
            .rankings()
            .get(index)
            .ok_or_else(|| Fail(RdStatus::InvalidArgument, format!("index {index} out of range")))?;
        if r.len() != n_items {
            return Err(Error::SizeMismatch { expected: r.len(), found: n_items }.into());
        }
        slice_mut(out_ranks, n_items)?.copy_from_slice(r.ranks());
        Ok(())
    })
}

/// Empirical depth of one ranking relative to the sample.
///
/// # Safety
/// `sample` must be a live handle, `ranks` must hold `n_items` values and
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_depth(
    sample: *const RdSample,
    ranks: *const usize,
    n_items: usize,
    m: RdMetric,
    out: *mut f64,
) -> RdStatus {
    guard(|| {
        let s = &get(sample)?.0;
        let sigma = perm(ranks, n_items)?;
        put(out, depth_empirical(s, &sigma, metric(m))?)
    })
}

/// Depth of every ranking in the sample, written to `out` (length `len`).
///
/// # Safety
/// `sample` must be a live handle and `out` must hold `len` values.
#[no_mangle]
pub unsafe extern "C" fn rd_sample_depths(sample: *const RdSample, m: RdMetric, out: *mut f64, len: usize) -> RdStatus {
    guard(|| {
        let s = &get(sample)?.0;
        if len != s.len() {
            return Err(Error::SizeMismatch { expected: s.len(), found: len }.into());
        }
        slice_mut(out, len)?.copy_from_slice(&sample_depths(s, metric(m))?);
        Ok(())
    })
}

/// Empirical pairwise matrix of a sample.
///
/// # Safety
/// `sample` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pairwise_new(sample: *const RdSample, out: *mut *mut RdPairwise) -> RdStatus {
    guard(|| {
        let pw = empirical_pairwise(&get(sample)?.0)?;
        put_handle(out, RdPairwise(pw))
    })
}

/// # Safety
/// `pw` must come from this library and not have been freed already.
#[no_mangle]
pub unsafe extern "C" fn rd_pairwise_free(pw: *mut RdPairwise) {
    if !pw.is_null() {
        drop(Box::from_raw(pw));
    }
}

/// Probability that item `i` is ranked before item `j`.
///
/// # Safety
/// `pw` must be a live handle and `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pairwise_get(pw: *const RdPairwise, i: usize, j: usize, out: *mut f64) -> RdStatus {
    guard(|| {
        let m = &get(pw)?.0;
        if i >= m.n() || j >= m.n() {
            return Err(Fail(RdStatus::InvalidArgument, format!("item index out of range for {} items", m.n())));
        }
        put(out, m.get(i, j))
    })
}

/// Transitivity status and number of majority 3-cycles, with tolerance `eps`.
///
/// # Safety
/// `pw` must be a live handle; `status` and `cycles` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_pairwise_transitivity(
    pw: *const RdPairwise,
    eps: f64,
    status: *mut RdTransitivity,
    cycles: *mut usize,
) -> RdStatus {
    guard(|| {
        if eps.is_nan() || eps < 0.0 {
            return Err(Fail(RdStatus::InvalidArgument, "tolerance must be non-negative".into()));
        }
        let m = &get(pw)?.0;
        let s = match m.transitivity_status_eps(eps) {
            TransitivityStatus::Sst => RdTransitivity::Sst,
            TransitivityStatus::StWithTies => RdTransitivity::StWithTies,
            TransitivityStatus::NotSt => RdTransitivity::NotSt,
        };
        put(status, s)?;
        put(cycles, m.count_cycles_eps(eps))
    })
}

/// Kemeny median of a strictly transitive matrix, as 0-based ranks.
///
/// # Safety
/// `pw` must be a live handle and `out_ranks` must hold `n_items` values.
#[no_mangle]
pub unsafe extern "C" fn rd_kemeny_sst(pw: *const RdPairwise, out_ranks: *mut usize, n_items: usize) -> RdStatus {
    guard(|| {
        let m = &get(pw)?.0;
        if n_items != m.n() {
            return Err(Error::SizeMismatch { expected: m.n(), found: n_items }.into());
        }
        let median = kemeny_sst(m)?;
        slice_mut(out_ranks, n_items)?.copy_from_slice(median.ranks());
        Ok(())
    })
}

/// Trims least deep rankings until the sample is stochastically transitive
/// (`strict` selects strict transitivity). Writes a new sample handle and
/// the number of trimming iterations.
///
/// # Safety
/// `sample` must be a live handle; `out` and `iterations` must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_trim(
    sample: *const RdSample,
    m: RdMetric,
    strict: bool,
    out: *mut *mut RdSample,
    iterations: *mut usize,
) -> RdStatus {
    guard(|| {
        let s = &get(sample)?.0;
        if iterations.is_null() {
            return Err(null());
        }
        let cfg = TrimConfig {
            target: if strict { TrimTarget::Sst } else { TrimTarget::St },
            metric: metric(m),
            ..TrimConfig::default()
        };
        let res = trim_to_sst(s, &cfg)?;
        put(iterations, res.trace.iterations())?;
        put_handle(out, RdSample(res.trimmed))
    })
}

/// Two-sided Wilcoxon rank-sum test of `x` against `y`.
///
/// # Safety
/// `x` and `y` must hold `nx` and `ny` values; outputs must be writable.
#[no_mangle]
pub unsafe extern "C" fn rd_wilcoxon(
    x: *const f64,
    nx: usize,
    y: *const f64,
    ny: usize,
    statistic: *mut f64,
    p_value: *mut f64,
) -> RdStatus {
    guard(|| {
        let r = wilcoxon_rank_sum(slice(x, nx)?, slice(y, ny)?)?;
        put(statistic, r.statistic)?;
        put(p_value, r.p_value)
    })
}
