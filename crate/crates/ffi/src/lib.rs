//! C interface to the `qlz` compressor and index.
//!
//! All objects cross the boundary as opaque pointers created by
//! `qlz_compress`, `qlz_index_build` or `qlz_index_load` and released with
//! the matching `_free`.
//! Every fallible function returns a `QlzStatus`; on failure a message is
//! kept per thread and read back with `qlz_last_error`.
//!
//! Symbols are `uint32_t` with `0` reserved as the end-of-text sentinel.
//! Positions are 1-based, as in the Rust API.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use qlz::compressed_index::CompressedIndex;
use qlz::encodings::{to_lz77, to_rl_bwt};
use qlz::lz_end_tau::{factorize, factorize_adaptive, FactorizeConfig, Strategy};
use qlz::quantum_sim::{Symbol, TextOracle, SENTINEL};
use qlz::reference_kit::{decompress, Factorization};
use qlz::Error;

/// Return code of every fallible call. Zero is success.
#[repr(i32)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum QlzStatus {
    Ok = 0,
    NullPointer = -1,
    OutOfRange = -2,
    InvalidArgument = -3,
    Format = -4,
    Version = -5,
    /// The caller's buffer was too small; the required size was still written.
    BufferTooSmall = -6,
    Panic = -7,
}

/// Result of compressing one text.
pub struct QlzCompression {
    factorization: Factorization,
    z: usize,
    r: usize,
    tau: usize,
    queries: u64,
}

/// A compressed suffix-array index over a sentinel-terminated text.
pub struct QlzIndex {
    inner: CompressedIndex,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

fn status_of(e: &Error) -> QlzStatus {
    match e {
        Error::OutOfRange { .. } | Error::EmptyRange { .. } => QlzStatus::OutOfRange,
        Error::Format(_) | Error::Io(_) => QlzStatus::Format,
        Error::Version { .. } => QlzStatus::Version,
        _ => QlzStatus::InvalidArgument,
    }
}

/// Runs `f`, turning library errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), QlzStatus>) -> QlzStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => QlzStatus::Ok,
        Ok(Err(s)) => s,
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal error: {msg}"));
            QlzStatus::Panic
        }
    }
}

fn lib(e: Error) -> QlzStatus {
    set_error(e.to_string());
    status_of(&e)
}

fn null(what: &str) -> QlzStatus {
    set_error(format!("{what} is null"));
    QlzStatus::NullPointer
}

unsafe fn slice<'a, T>(p: *const T, len: usize, what: &str) -> Result<&'a [T], QlzStatus> {
    if len == 0 {
        Ok(&[])
    } else if p.is_null() {
        Err(null(what))
    } else {
        Ok(std::slice::from_raw_parts(p, len))
    }
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, QlzStatus> {
    p.as_mut().ok_or_else(|| null(what))
}

unsafe fn handle<'a, T>(p: *const T) -> Result<&'a T, QlzStatus> {
    p.as_ref().ok_or_else(|| null("handle"))
}

/// Copies `src` into `buf` if it fits; `*len` always receives `src.len()`.
unsafe fn fill<T: Copy>(src: &[T], buf: *mut T, cap: usize, len: *mut usize) -> Result<(), QlzStatus> {
    *out(len, "len")? = src.len();
    if src.len() > cap {
        set_error(format!("buffer holds {cap} items, {} needed", src.len()));
        return Err(QlzStatus::BufferTooSmall);
    }
    if !src.is_empty() {
        if buf.is_null() {
            return Err(null("buf"));
        }
        ptr::copy_nonoverlapping(src.as_ptr(), buf, src.len());
    }
    Ok(())
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn qlz_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn qlz_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Factorizes `text[0..n]` through the counting oracle.
///
/// `tau == 0` picks the block size adaptively. A text whose only `0` is its
/// last symbol is treated as sentinel-terminated, which also yields the
/// RLBWT run count.
///
/// # Safety
/// `text` must point to `n` readable symbols and `out_handle` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn qlz_compress(
    text: *const u32,
    n: usize,
    tau: usize,
    out_handle: *mut *mut QlzCompression,
) -> QlzStatus {
    guard(|| {
        let dst = out(out_handle, "out")?;
        let t: Vec<Symbol> = slice(text, n, "text")?.to_vec();
        let terminated = t.last() == Some(&SENTINEL) && t.iter().filter(|&&c| c == SENTINEL).count() == 1;
        let mut o = if terminated { TextOracle::terminated(t) } else { TextOracle::new(t) }.map_err(lib)?;
        let (f, tau) = if tau == 0 {
            let rep = factorize_adaptive(&mut o, Strategy::default()).map_err(lib)?;
            let tau = rep.rounds.last().map_or(1, |r| r.tau);
            (rep.factorization, tau)
        } else {
            let cfg = FactorizeConfig::new(tau);
            (factorize(&mut o, &cfg).map_err(lib)?.into_factorization(), tau)
        };
        let z = to_lz77(&f).map_err(lib)?.len();
        let r = if terminated { to_rl_bwt(&f).map_err(lib)?.r() } else { 0 };
        let queries = o.ledger().total();
        *dst = Box::into_raw(Box::new(QlzCompression { factorization: f, z, r, tau, queries }));
        Ok(())
    })
}

/// Number of LZ77 phrases of the compressed text.
///
/// # Safety
/// `h` must be null or a live handle from `qlz_compress`.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_z(h: *const QlzCompression) -> usize {
    h.as_ref().map_or(0, |c| c.z)
}

/// Number of LZ-End+tau factors found by the factorizer.
///
/// # Safety
/// As for `qlz_compression_z`.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_factors(h: *const QlzCompression) -> usize {
    h.as_ref().map_or(0, |c| c.factorization.len())
}

/// BWT run count, or 0 when the text was not sentinel-terminated.
///
/// # Safety
/// As for `qlz_compression_z`.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_r(h: *const QlzCompression) -> usize {
    h.as_ref().map_or(0, |c| c.r)
}

/// Block size of the (final) factorization round.
///
/// # Safety
/// As for `qlz_compression_z`.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_tau(h: *const QlzCompression) -> usize {
    h.as_ref().map_or(0, |c| c.tau)
}

/// Oracle queries charged while compressing.
///
/// # Safety
/// As for `qlz_compression_z`.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_queries(h: *const QlzCompression) -> u64 {
    h.as_ref().map_or(0, |c| c.queries)
}

/// Expands the factorization into `buf`. `*len` receives the text length
/// even when `cap` is too small.
///
/// # Safety
/// `buf` must have room for `cap` symbols; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_decompress(
    h: *const QlzCompression,
    buf: *mut u32,
    cap: usize,
    len: *mut usize,
) -> QlzStatus {
    guard(|| {
        let text = decompress(&handle(h)?.factorization).map_err(lib)?;
        fill(&text, buf, cap, len)
    })
}

/// # Safety
/// `h` must be null or a handle from `qlz_compress` not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlz_compression_free(h: *mut QlzCompression) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}

/// Builds an index over `text[0..n]`, appending the sentinel if absent.
///
/// # Safety
/// `text` must point to `n` readable symbols and `out_handle` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_build(text: *const u32, n: usize, out_handle: *mut *mut QlzIndex) -> QlzStatus {
    guard(|| {
        let dst = out(out_handle, "out")?;
        let mut t: Vec<Symbol> = slice(text, n, "text")?.to_vec();
        if t.last() != Some(&SENTINEL) {
            t.push(SENTINEL);
        }
        let mut o = TextOracle::terminated(t).map_err(lib)?;
        let rep = factorize_adaptive(&mut o, Strategy::default()).map_err(lib)?;
        let rl = to_rl_bwt(&rep.factorization).map_err(lib)?;
        let inner = CompressedIndex::build(rl).map_err(lib)?;
        *dst = Box::into_raw(Box::new(QlzIndex { inner }));
        Ok(())
    })
}

/// Loads an index serialized by `qlz_index_serialize` or the `qlz` CLI.
///
/// # Safety
/// `bytes` must point to `len` readable bytes and `out_handle` to writable storage.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_load(bytes: *const u8, len: usize, out_handle: *mut *mut QlzIndex) -> QlzStatus {
    guard(|| {
        let dst = out(out_handle, "out")?;
        let inner = CompressedIndex::from_bytes(slice(bytes, len, "bytes")?).map_err(lib)?;
        *dst = Box::into_raw(Box::new(QlzIndex { inner }));
        Ok(())
    })
}

/// Serializes the index. Call with `cap == 0` to learn the size.
///
/// # Safety
/// `buf` must have room for `cap` bytes; `len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_serialize(h: *const QlzIndex, buf: *mut u8, cap: usize, len: *mut usize) -> QlzStatus {
    guard(|| fill(&handle(h)?.inner.to_bytes(), buf, cap, len))
}

/// Length of the indexed text including the sentinel.
///
/// # Safety
/// `h` must be null or a live index handle.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_len(h: *const QlzIndex) -> usize {
    h.as_ref().map_or(0, |i| i.inner.shortcut.n())
}

/// Number of BWT runs.
///
/// # Safety
/// As for `qlz_index_len`.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_runs(h: *const QlzIndex) -> usize {
    h.as_ref().map_or(0, |i| i.inner.shortcut.r())
}

/// `SA[i]`.
///
/// # Safety
/// `h` must be a live index handle and `res` writable.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_sa(h: *const QlzIndex, i: usize, res: *mut usize) -> QlzStatus {
    guard(|| {
        let v = handle(h)?.inner.gagie.sa(i).map_err(lib)?;
        *out(res, "res")? = v;
        Ok(())
    })
}

/// `ISA[p]`.
///
/// # Safety
/// As for `qlz_index_sa`.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_isa(h: *const QlzIndex, p: usize, res: *mut usize) -> QlzStatus {
    guard(|| {
        let v = handle(h)?.inner.shortcut.isa_query(p).map_err(lib)?;
        *out(res, "res")? = v;
        Ok(())
    })
}

/// Longest common extension of the suffixes at text positions `a` and `b`.
///
/// # Safety
/// As for `qlz_index_sa`.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_lce(h: *const QlzIndex, a: usize, b: usize, res: *mut usize) -> QlzStatus {
    guard(|| {
        let idx = &handle(h)?.inner;
        let n = idx.shortcut.n();
        for p in [a, b] {
            if p == 0 || p > n {
                return Err(lib(Error::OutOfRange { pos: p, len: n }));
            }
        }
        *out(res, "res")? = idx.shortcut.lce(a, b);
        Ok(())
    })
}

/// Occurrences of `pattern[0..m]`. Their 1-based starts go to `buf` in
/// ascending order when `cap` suffices; `*count` always gets the total.
/// `buf` may be null with `cap == 0` to count only.
///
/// # Safety
/// `pattern` must point to `m` symbols, `buf` to `cap` slots, `count` writable.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_locate(
    h: *const QlzIndex,
    pattern: *const u32,
    m: usize,
    buf: *mut usize,
    cap: usize,
    count: *mut usize,
) -> QlzStatus {
    guard(|| {
        let idx = &handle(h)?.inner;
        let pat = slice(pattern, m, "pattern")?;
        let (occ, mut pos) = idx.count_and_locate(pat);
        pos.sort_unstable();
        if cap == 0 && buf.is_null() {
            *out(count, "count")? = occ;
            return Ok(());
        }
        fill(&pos, buf, cap, count)
    })
}

/// # Safety
/// `h` must be null or an index handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn qlz_index_free(h: *mut QlzIndex) {
    if !h.is_null() {
        drop(Box::from_raw(h));
    }
}
