//! C ABI over `ableak`.
//!
//! Channels live behind an opaque `AbleakChannel` handle created by
//! `ableak_channel_new` or `ableak_channel_from_csv` and released with
//! `ableak_channel_free`. Every fallible call returns an `AbleakStatus`; on
//! failure the message is kept per thread and can be read back with
//! `ableak_last_error_message`.
//!
//! Orders are plain doubles, with `INFINITY` standing for an infinite order.
//! A tolerance of `0` selects the library default.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use ableak::{Channel, LeakageError, MeasureResult, OptimizerConfig, Order, OrderPair, TauParameter};

/// Opaque channel handle.
pub struct AbleakChannel {
    inner: Channel,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AbleakStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidEntry = 2,
    NotStochastic = 3,
    ShapeError = 4,
    InvalidOrder = 5,
    InvalidParameter = 6,
    NumericalFailure = 7,
    DegenerateInput = 8,
    BudgetExceeded = 9,
    ParseError = 10,
    IoError = 11,
    /// The value was computed but an optimizer run stopped short of its
    /// tolerance; the report is filled in and the value is a lower bound.
    NotConverged = 12,
    Panic = 13,
}

/// Result of a leakage computation.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AbleakReport {
    /// Leakage in nats; `INFINITY` when unbounded.
    pub value_nats: f64,
    /// Maximizing input of the outer maximum over x'.
    pub maximizing_x_prime: usize,
    /// Optimizer iterations for the maximizing x' (0 for closed forms).
    pub iterations: usize,
    /// Frank-Wolfe gap at termination (0 for closed forms).
    pub certified_gap: f64,
    pub converged: bool,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_last_error(message: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = message);
}

fn status_of(error: &LeakageError) -> AbleakStatus {
    match error {
        LeakageError::InvalidEntry { .. } => AbleakStatus::InvalidEntry,
        LeakageError::NotStochastic { .. } => AbleakStatus::NotStochastic,
        LeakageError::ShapeError(_) => AbleakStatus::ShapeError,
        LeakageError::InvalidOrder(_) => AbleakStatus::InvalidOrder,
        LeakageError::InvalidParameter(_) => AbleakStatus::InvalidParameter,
        LeakageError::NumericalFailure(_) => AbleakStatus::NumericalFailure,
        LeakageError::DegenerateInput(_) => AbleakStatus::DegenerateInput,
        LeakageError::BudgetExceeded(_) => AbleakStatus::BudgetExceeded,
        LeakageError::Parse { .. } => AbleakStatus::ParseError,
        LeakageError::Io(_) => AbleakStatus::IoError,
    }
}

enum Failure {
    Status(AbleakStatus, String),
    Leakage(LeakageError),
}

impl From<LeakageError> for Failure {
    fn from(e: LeakageError) -> Self {
        Failure::Leakage(e)
    }
}

/// Runs `body`, converting errors and panics into a status and recording the
/// message.
fn guarded(body: impl FnOnce() -> Result<AbleakStatus, Failure>) -> AbleakStatus {
    let outcome = catch_unwind(AssertUnwindSafe(body)).unwrap_or_else(|_| {
        Err(Failure::Status(AbleakStatus::Panic, "internal panic".to_string()))
    });
    match outcome {
        Ok(status) => {
            if status == AbleakStatus::Ok {
                set_last_error(String::new());
            }
            status
        }
        Err(Failure::Status(status, message)) => {
            set_last_error(message);
            status
        }
        Err(Failure::Leakage(e)) => {
            set_last_error(e.to_string());
            status_of(&e)
        }
    }
}

fn null(what: &str) -> Failure {
    Failure::Status(AbleakStatus::NullPointer, format!("{what} is null"))
}

/// # Safety
/// `handle` must be null or come from this library and not yet be freed.
unsafe fn channel_ref<'a>(handle: *const AbleakChannel) -> Result<&'a Channel, Failure> {
    unsafe { handle.as_ref() }.map(|h| &h.inner).ok_or_else(|| null("channel"))
}

fn config(tolerance: f64) -> Result<OptimizerConfig, Failure> {
    let mut config = OptimizerConfig::default();
    if tolerance != 0.0 {
        config.tolerance = tolerance;
    }
    config.validate()?;
    Ok(config)
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write_report(result: &MeasureResult, out: *mut AbleakReport) -> Result<AbleakStatus, Failure> {
    let out = unsafe { out.as_mut() }.ok_or_else(|| null("report"))?;
    *out = AbleakReport {
        value_nats: result.value.nats(),
        maximizing_x_prime: result.maximizing_x_prime,
        iterations: result.report.as_ref().map_or(0, |r| r.iterations),
        certified_gap: result.report.as_ref().map_or(0.0, |r| r.certified_gap),
        converged: result.converged,
    };
    if result.converged {
        Ok(AbleakStatus::Ok)
    } else {
        Err(Failure::Status(AbleakStatus::NotConverged, "optimizer stopped before reaching the gap tolerance".into()))
    }
}

/// # Safety
/// `out` must be null or valid for one write.
unsafe fn write_value(value: f64, out: *mut f64) -> Result<AbleakStatus, Failure> {
    let out = unsafe { out.as_mut() }.ok_or_else(|| null("output"))?;
    *out = value;
    Ok(AbleakStatus::Ok)
}

fn order(value: f64, name: &str) -> Result<Order, Failure> {
    if value.is_nan() {
        return Err(LeakageError::InvalidOrder(format!("{name} is NaN")).into());
    }
    Ok(Order::from_f64(value))
}

/// Static description of a status code. Never null.
#[no_mangle]
pub extern "C" fn ableak_status_message(status: AbleakStatus) -> *const c_char {
    let text: &'static CStr = match status {
        AbleakStatus::Ok => c"ok",
        AbleakStatus::NullPointer => c"null pointer argument",
        AbleakStatus::InvalidEntry => c"channel entry is negative or not finite",
        AbleakStatus::NotStochastic => c"channel row does not sum to one",
        AbleakStatus::ShapeError => c"dimension mismatch",
        AbleakStatus::InvalidOrder => c"order out of range",
        AbleakStatus::InvalidParameter => c"invalid parameter",
        AbleakStatus::NumericalFailure => c"numerical failure",
        AbleakStatus::DegenerateInput => c"degenerate input",
        AbleakStatus::BudgetExceeded => c"computation budget exceeded",
        AbleakStatus::ParseError => c"channel file could not be parsed",
        AbleakStatus::IoError => c"i/o error",
        AbleakStatus::NotConverged => c"optimizer did not converge",
        AbleakStatus::Panic => c"internal panic",
    };
    text.as_ptr()
}

/// Copies the calling thread's last error message into `buffer` as a
/// NUL-terminated string, truncating to `len - 1` bytes. Returns the buffer
/// size needed for the full message, including the terminator. `buffer` may be
/// null when `len` is 0.
///
/// # Safety
/// `buffer` must be valid for `len` bytes of writes.
#[no_mangle]
pub unsafe extern "C" fn ableak_last_error_message(buffer: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let message = e.borrow();
        let bytes = message.as_bytes();
        if !buffer.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            unsafe {
                ptr::copy_nonoverlapping(bytes.as_ptr().cast::<c_char>(), buffer, n);
                *buffer.add(n) = 0;
            }
        }
        bytes.len() + 1
    })
}

/// Builds a channel from a row-major `rows x cols` matrix. Rows within
/// `tolerance` of summing to one are renormalized.
///
/// # Safety
/// `probs` must point to `rows * cols` doubles and `out` must be valid for one
/// write. On success `*out` owns a handle to release with
/// `ableak_channel_free`.
#[no_mangle]
pub unsafe extern "C" fn ableak_channel_new(
    probs: *const f64,
    rows: usize,
    cols: usize,
    tolerance: f64,
    out: *mut *mut AbleakChannel,
) -> AbleakStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if probs.is_null() {
            return Err(null("probs"));
        }
        let len = rows
            .checked_mul(cols)
            .ok_or_else(|| LeakageError::ShapeError(format!("{rows} x {cols} overflows")))?;
        let data = unsafe { std::slice::from_raw_parts(probs, len) };
        let channel = Channel::from_flat(data, rows, cols, tolerance)?;
        unsafe { *out = Box::into_raw(Box::new(AbleakChannel { inner: channel })) };
        Ok(AbleakStatus::Ok)
    })
}

/// Reads a channel CSV file.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_channel_from_csv(
    path: *const c_char,
    tolerance: f64,
    out: *mut *mut AbleakChannel,
) -> AbleakStatus {
    guarded(|| {
        if out.is_null() {
            return Err(null("out"));
        }
        if path.is_null() {
            return Err(null("path"));
        }
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| LeakageError::InvalidParameter("path is not UTF-8".into()))?;
        let channel = Channel::read_csv(path, tolerance)?;
        unsafe { *out = Box::into_raw(Box::new(AbleakChannel { inner: channel })) };
        Ok(AbleakStatus::Ok)
    })
}

/// Releases a channel. Null is ignored.
///
/// # Safety
/// `channel` must be null or a live handle from this library; it must not be
/// used afterwards.
#[no_mangle]
pub unsafe extern "C" fn ableak_channel_free(channel: *mut AbleakChannel) {
    if !channel.is_null() {
        drop(unsafe { Box::from_raw(channel) });
    }
}

/// Number of inputs, or 0 for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ableak_channel_rows(channel: *const AbleakChannel) -> usize {
    unsafe { channel.as_ref() }.map_or(0, |c| c.inner.inputs())
}

/// Number of outputs, or 0 for a null handle.
///
/// # Safety
/// `channel` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ableak_channel_cols(channel: *const AbleakChannel) -> usize {
    unsafe { channel.as_ref() }.map_or(0, |c| c.inner.outputs())
}

/// Maximal alpha,beta-leakage. When `p_tilde` is non-null and a maximizing
/// distribution exists, it is written there (`rows` doubles); otherwise the
/// buffer is left untouched.
///
/// # Safety
/// `channel` must be a live handle, `report` valid for one write, and
/// `p_tilde` null or valid for `rows` writes.
#[no_mangle]
pub unsafe extern "C" fn ableak_maximal_alpha_beta_leakage(
    channel: *const AbleakChannel,
    alpha: f64,
    beta: f64,
    tolerance: f64,
    report: *mut AbleakReport,
    p_tilde: *mut f64,
) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        let pair = OrderPair::new(order(alpha, "alpha")?, order(beta, "beta")?)?;
        let result = ableak::maximal_alpha_beta_leakage(channel, pair, &config(tolerance)?)?;
        if let (false, Some(p)) = (p_tilde.is_null(), &result.maximizing_distribution) {
            unsafe { ptr::copy_nonoverlapping(p.weights().as_ptr(), p_tilde, p.dim()) };
        }
        unsafe { write_report(&result, report) }
    })
}

/// Maximal alpha-leakage (`beta = 1`); `alpha = INFINITY` gives maximal
/// leakage.
///
/// # Safety
/// `channel` must be a live handle and `report` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_maximal_alpha_leakage(
    channel: *const AbleakChannel,
    alpha: f64,
    tolerance: f64,
    report: *mut AbleakReport,
) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        let result = ableak::maximal_alpha_leakage(channel, order(alpha, "alpha")?, &config(tolerance)?)?;
        unsafe { write_report(&result, report) }
    })
}

/// Leakage at `beta = alpha / (1 - tau (1 - alpha))` for `tau` in `[0, 1]`.
///
/// # Safety
/// `channel` must be a live handle and `report` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_alpha_tau_leakage(
    channel: *const AbleakChannel,
    alpha: f64,
    tau: f64,
    tolerance: f64,
    report: *mut AbleakReport,
) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        let result = ableak::alpha_tau_leakage(channel, alpha, TauParameter::new(tau)?, &config(tolerance)?)?;
        unsafe { write_report(&result, report) }
    })
}

/// Maximal leakage in nats.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_maximal_leakage(channel: *const AbleakChannel, out: *mut f64) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        unsafe { write_value(ableak::maximal_leakage(channel).nats(), out) }
    })
}

/// Local differential privacy in nats; `INFINITY` when unbounded.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_ldp(channel: *const AbleakChannel, out: *mut f64) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        unsafe { write_value(ableak::ldp(channel).nats(), out) }
    })
}

/// Local Renyi differential privacy of finite order `alpha > 1`.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_lrdp(channel: *const AbleakChannel, alpha: f64, out: *mut f64) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        unsafe { write_value(ableak::lrdp(channel, alpha)?.nats(), out) }
    })
}

/// The `alpha = INFINITY` member for finite `beta >= 1`.
///
/// # Safety
/// `channel` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_lrdp_variant(channel: *const AbleakChannel, beta: f64, out: *mut f64) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        unsafe { write_value(ableak::lrdp_variant(channel, beta)?.nats(), out) }
    })
}

/// Shannon capacity in nats; `tolerance` bounds the width of the
/// Blahut-Arimoto bracket (0 selects 1e-12).
///
/// # Safety
/// `channel` must be a live handle and `out` valid for one write.
#[no_mangle]
pub unsafe extern "C" fn ableak_shannon_capacity(channel: *const AbleakChannel, tolerance: f64, out: *mut f64) -> AbleakStatus {
    guarded(|| {
        let channel = unsafe { channel_ref(channel)? };
        let tolerance = if tolerance == 0.0 { 1e-12 } else { tolerance };
        unsafe { write_value(ableak::shannon_capacity(channel, tolerance)?.nats(), out) }
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn last_error() -> String {
        LAST_ERROR.with(|e| e.borrow().clone())
    }

    #[test]
    fn panics_become_a_status() {
        let status = guarded(|| panic!("boom"));
        assert_eq!(status, AbleakStatus::Panic);
        assert_eq!(last_error(), "internal panic");
    }

    #[test]
    fn success_clears_the_last_error() {
        set_last_error("stale".into());
        assert_eq!(guarded(|| Ok(AbleakStatus::Ok)), AbleakStatus::Ok);
        assert!(last_error().is_empty());
    }

    #[test]
    fn leakage_errors_keep_their_message() {
        let status = guarded(|| Err(LeakageError::InvalidParameter("tau".into()).into()));
        assert_eq!(status, AbleakStatus::InvalidParameter);
        assert!(last_error().contains("tau"));
    }

    #[test]
    fn zero_tolerance_means_default() {
        let default = OptimizerConfig::default().tolerance;
        assert_eq!(config(0.0).ok().unwrap().tolerance, default);
        assert_eq!(config(1e-6).ok().unwrap().tolerance, 1e-6);
        assert!(config(-1.0).is_err());
    }
}
