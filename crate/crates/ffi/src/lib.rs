//! C ABI for `restore-core`.
//!
//! Images cross the boundary as opaque [`RestoreRaster`] handles owned by
//! the caller and released with [`restore_raster_free`]. Every fallible
//! function returns a [`RestoreStatus`]; on failure the output pointer is
//! left untouched and [`restore_last_error`] describes the cause. Panics
//! never unwind into the caller.

use std::cell::RefCell;
use std::ffi::{c_char, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use restore_core::codec::decode_auto;
use restore_core::compose::{self, BasRelief, BlendMode, EnhanceParams, Threshold};
use restore_core::raster::{histogram, otsu_threshold, threshold_binary};
use restore_core::spectral::{fourier_filter, make_axis_notch_mask, make_highpass_mask, NotchAxis};
use restore_core::{dipole_edge_map, encode_image, EdgeMap, Error, ImageFormat, Raster};

/// Outcome of a call. Zero is success.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestoreStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    DimensionMismatch = 3,
    Decode = 4,
    Unsupported = 5,
    Encode = 6,
    Io = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestoreFormat {
    Png = 0,
    Pgm = 1,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestoreBlendMode {
    Alpha = 0,
    MultiplyDarken = 1,
    Min = 2,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RestoreNotchAxis {
    Horizontal = 0,
    Vertical = 1,
}

/// Text-enhancement settings. `auto_threshold` selects Otsu and ignores
/// `threshold`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestoreEnhanceParams {
    pub auto_threshold: bool,
    pub threshold: f64,
    pub radius: usize,
    pub edge_gain: f64,
    pub mix: f64,
}

/// Grayscale image with values in `[0, 1]`, row-major.
pub struct RestoreRaster(Raster);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<Vec<u8>>) {
    let mut bytes = msg.into();
    bytes.retain(|&b| b != 0);
    let text = CString::new(bytes).expect("interior NULs removed");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(text));
}

fn status_of(e: &Error) -> RestoreStatus {
    match e {
        Error::Decode(_) => RestoreStatus::Decode,
        Error::Unsupported(_) => RestoreStatus::Unsupported,
        Error::InvalidRaster(_) | Error::InvalidParameter { .. } => RestoreStatus::InvalidArgument,
        Error::DimensionMismatch { .. } => RestoreStatus::DimensionMismatch,
        Error::Encode(_) => RestoreStatus::Encode,
        Error::Io(_) => RestoreStatus::Io,
    }
}

enum Fail {
    Null(&'static str),
    Core(Error),
}

impl From<Error> for Fail {
    fn from(e: Error) -> Self {
        Fail::Core(e)
    }
}

/// Runs `f`, translating errors and panics into a status.
fn guard(f: impl FnOnce() -> Result<(), Fail>) -> RestoreStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => RestoreStatus::Ok,
        Ok(Err(Fail::Null(what))) => {
            set_error(format!("`{what}` is null"));
            RestoreStatus::NullPointer
        }
        Ok(Err(Fail::Core(e))) => {
            set_error(e.to_string());
            status_of(&e)
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_error(format!("internal panic: {msg}"));
            RestoreStatus::Panic
        }
    }
}

unsafe fn deref<'a>(p: *const RestoreRaster, what: &'static str) -> Result<&'a Raster, Fail> {
    p.as_ref().map(|r| &r.0).ok_or(Fail::Null(what))
}

unsafe fn emit(out: *mut *mut RestoreRaster, r: Raster) -> Result<(), Fail> {
    *out = Box::into_raw(Box::new(RestoreRaster(r)));
    Ok(())
}

fn check_out<T>(out: *mut T) -> Result<(), Fail> {
    if out.is_null() {
        return Err(Fail::Null("out"));
    }
    Ok(())
}

/// Message for the most recent failure on this thread, or NULL. Valid until
/// the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn restore_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |s| s.as_ptr()))
}

/// Copies `width * height` samples from `data`. Values must lie in `[0, 1]`.
///
/// # Safety
/// `data` must point to `width * height` readable doubles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_new(
    width: usize,
    height: usize,
    data: *const f64,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        check_out(out)?;
        if data.is_null() {
            return Err(Fail::Null("data"));
        }
        let len = width
            .checked_mul(height)
            .ok_or(Error::InvalidRaster(format!("{width}x{height} overflows")))?;
        let samples = std::slice::from_raw_parts(data, len).to_vec();
        emit(out, Raster::new(width, height, samples)?)
    })
}

/// Decodes PNG or binary PGM bytes; the format is sniffed.
///
/// # Safety
/// `bytes` must point to `len` readable bytes; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_decode(
    bytes: *const u8,
    len: usize,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        check_out(out)?;
        if bytes.is_null() {
            return Err(Fail::Null("bytes"));
        }
        emit(out, decode_auto(std::slice::from_raw_parts(bytes, len))?)
    })
}

/// Encodes as 8-bit grayscale. Release the buffer with [`restore_bytes_free`].
///
/// # Safety
/// `r` must be a live handle; `out_bytes` and `out_len` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_encode(
    r: *const RestoreRaster,
    format: RestoreFormat,
    out_bytes: *mut *mut u8,
    out_len: *mut usize,
) -> RestoreStatus {
    guard(|| {
        let r = deref(r, "raster")?;
        check_out(out_bytes)?;
        check_out(out_len)?;
        let format = match format {
            RestoreFormat::Png => ImageFormat::Png,
            RestoreFormat::Pgm => ImageFormat::Pgm,
        };
        let boxed = encode_image(r, format)?.into_boxed_slice();
        *out_len = boxed.len();
        *out_bytes = Box::into_raw(boxed) as *mut u8;
        Ok(())
    })
}

/// # Safety
/// `bytes` and `len` must come from one [`restore_raster_encode`] call, or `bytes` is NULL.
#[no_mangle]
pub unsafe extern "C" fn restore_bytes_free(bytes: *mut u8, len: usize) {
    if !bytes.is_null() {
        drop(Box::from_raw(ptr::slice_from_raw_parts_mut(bytes, len)));
    }
}

/// # Safety
/// `r` must be a handle from this library or NULL, and not used afterwards.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_free(r: *mut RestoreRaster) {
    if !r.is_null() {
        drop(Box::from_raw(r));
    }
}

/// Zero for NULL.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_width(r: *const RestoreRaster) -> usize {
    r.as_ref().map_or(0, |r| r.0.width())
}

/// Zero for NULL.
///
/// # Safety
/// `r` must be a live handle or NULL.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_height(r: *const RestoreRaster) -> usize {
    r.as_ref().map_or(0, |r| r.0.height())
}

/// Copies the samples into `out`, which must hold exactly `width * height`.
///
/// # Safety
/// `r` must be a live handle; `out` must point to `len` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn restore_raster_copy_data(r: *const RestoreRaster, out: *mut f64, len: usize) -> RestoreStatus {
    guard(|| {
        let r = deref(r, "raster")?;
        check_out(out)?;
        if len != r.data().len() {
            return Err(Error::InvalidParameter {
                name: "len",
                reason: format!("buffer holds {len} samples, raster has {}", r.data().len()),
            }
            .into());
        }
        std::slice::from_raw_parts_mut(out, len).copy_from_slice(r.data());
        Ok(())
    })
}

/// 1 where the sample exceeds `t`, else 0.
///
/// # Safety
/// `src` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_threshold_binary(
    src: *const RestoreRaster,
    t: f64,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        emit(out, threshold_binary(src, t)?)
    })
}

/// Otsu's threshold over a `bins`-bin histogram of `src`.
///
/// # Safety
/// `src` must be a live handle; `out_t` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_otsu_threshold(src: *const RestoreRaster, bins: usize, out_t: *mut f64) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out_t)?;
        *out_t = otsu_threshold(&histogram(src, bins)?)?;
        Ok(())
    })
}

/// Dipole-moment edge strength in `[0, 1]`.
///
/// # Safety
/// `src` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_dipole_edge_map(
    src: *const RestoreRaster,
    radius: usize,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        emit(out, dipole_edge_map(src, radius)?.to_raster())
    })
}

/// `img * (1 - gain * edges)`; `edges` is typically an edge map.
///
/// # Safety
/// `img` and `edges` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_overlay_edges(
    img: *const RestoreRaster,
    edges: *const RestoreRaster,
    gain: f64,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let img = deref(img, "img")?;
        let edges = EdgeMap::from_raster(deref(edges, "edges")?);
        check_out(out)?;
        emit(out, compose::overlay_edges(img, &edges, gain)?)
    })
}

/// # Safety
/// `a` and `b` must be live handles; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_blend(
    a: *const RestoreRaster,
    b: *const RestoreRaster,
    mode: RestoreBlendMode,
    alpha: f64,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let (a, b) = (deref(a, "a")?, deref(b, "b")?);
        check_out(out)?;
        let mode = match mode {
            RestoreBlendMode::Alpha => BlendMode::Alpha,
            RestoreBlendMode::MultiplyDarken => BlendMode::MultiplyDarken,
            RestoreBlendMode::Min => BlendMode::Min,
        };
        emit(out, compose::blend(a, b, mode, alpha)?)
    })
}

/// `clamp(bias + depth * (img(p) - img(p + (dx, dy))))`.
///
/// # Safety
/// `src` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_bas_relief(
    src: *const RestoreRaster,
    dx: i32,
    dy: i32,
    depth: f64,
    bias: f64,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        emit(out, compose::bas_relief(src, &BasRelief { dx, dy, depth, bias })?)
    })
}

/// The library's default enhancement preset.
#[no_mangle]
pub extern "C" fn restore_enhance_params_default() -> RestoreEnhanceParams {
    let d = EnhanceParams::default();
    RestoreEnhanceParams {
        auto_threshold: d.threshold == Threshold::Auto,
        threshold: match d.threshold {
            Threshold::Manual(t) => t,
            Threshold::Auto => 0.5,
        },
        radius: d.radius,
        edge_gain: d.edge_gain,
        mix: d.mix,
    }
}

/// Threshold-plus-edges text enhancement. NULL `params` means defaults.
///
/// # Safety
/// `src` must be a live handle; `params` must be readable or NULL; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_enhance_text(
    src: *const RestoreRaster,
    params: *const RestoreEnhanceParams,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        let p = params.as_ref().copied().unwrap_or_else(|| restore_enhance_params_default());
        let params = EnhanceParams {
            threshold: if p.auto_threshold {
                Threshold::Auto
            } else {
                Threshold::Manual(p.threshold)
            },
            radius: p.radius,
            edge_gain: p.edge_gain,
            mix: p.mix,
        };
        emit(out, compose::enhance_text(src, &params)?)
    })
}

/// Fourier high-pass. The result has the even-padded size of `src`.
///
/// # Safety
/// `src` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_highpass(
    src: *const RestoreRaster,
    cutoff: f64,
    softness: f64,
    renormalize: bool,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        emit(out, fourier_filter(src, renormalize, |w, h| make_highpass_mask(w, h, cutoff, softness))?)
    })
}

/// Removes periodic lines by zeroing a band along one frequency axis.
///
/// # Safety
/// `src` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn restore_notch(
    src: *const RestoreRaster,
    axis: RestoreNotchAxis,
    half_width: f64,
    guard_radius: f64,
    renormalize: bool,
    out: *mut *mut RestoreRaster,
) -> RestoreStatus {
    guard(|| {
        let src = deref(src, "src")?;
        check_out(out)?;
        let axis = match axis {
            RestoreNotchAxis::Horizontal => NotchAxis::Horizontal,
            RestoreNotchAxis::Vertical => NotchAxis::Vertical,
        };
        emit(
            out,
            fourier_filter(src, renormalize, |w, h| make_axis_notch_mask(w, h, axis, half_width, guard_radius))?,
        )
    })
}
