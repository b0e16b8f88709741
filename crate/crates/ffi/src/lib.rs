//! C ABI over the featfront detectors and metrics.
//!
//! Images and corner lists are opaque handles owned by the caller and released
//! with their `_free` function. Every fallible call returns an [`FfStatus`];
//! on failure a message is available from [`ff_last_error_message`] on the
//! same thread until the next failing call. Panics never cross the boundary.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;
use std::slice;

use featfront::bench::{agreement, energy_per_frame, speedup, MetricError};
use featfront::detector::{DetectError, DetectorKind, DetectorSettings};
use featfront::fast::FastConfig;
use featfront::harris::{FixedPointFormat, HarrisConfig};
use featfront::{Corner, Image, ImageError};

pub const FF_DETECTOR_FAST: u32 = 0;
pub const FF_DETECTOR_FAST_BATCH: u32 = 1;
pub const FF_DETECTOR_HARRIS: u32 = 2;
pub const FF_DETECTOR_HARRIS_FIXED: u32 = 3;

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FfStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Io = 3,
    Decode = 4,
    Detector = 5,
    Metric = 6,
    OutOfRange = 7,
    Panic = 8,
}

/// Opaque 8-bit grayscale image.
pub struct FfImage {
    inner: Image,
}

/// Opaque list of detected corners, sorted as the detector returns them.
pub struct FfCornerList {
    corners: Vec<FfCorner>,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FfCorner {
    pub x: u32,
    pub y: u32,
    pub score: f64,
    /// Pyramid level; coordinates are level-local.
    pub level: u32,
}

#[repr(C)]
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct FfAgreement {
    pub matched: usize,
    pub reference_count: usize,
    pub candidate_count: usize,
    pub precision: f64,
    pub recall: f64,
    pub mean_offset: f64,
}

/// Detector choice (one of the `FF_DETECTOR_*` values) and the parameters of
/// every tier. Start from [`ff_detector_config_default`].
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FfDetectorConfig {
    pub detector: u32,
    pub fast_arc_length: u8,
    pub fast_threshold: u8,
    pub fast_nms_window: u32,
    pub lanes: u32,
    pub harris_k: f64,
    pub harris_response_threshold: f64,
    pub harris_sobel_size: u32,
    pub harris_block_size: u32,
    pub harris_nms_window: u32,
    pub fixed_integer_bits: u32,
    pub fixed_fraction_bits: u32,
    pub fixed_accumulator_bits: u32,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: String) {
    let c = CString::new(msg.replace('\0', " ")).expect("no interior NUL");
    LAST_ERROR.with(|e| *e.borrow_mut() = Some(c));
}

struct Failure(FfStatus, String);

impl From<ImageError> for Failure {
    fn from(e: ImageError) -> Self {
        let status = match e {
            ImageError::Io(_) => FfStatus::Io,
            ImageError::MalformedHeader(_) | ImageError::TruncatedData { .. } | ImageError::UnsupportedMaxval(_) => {
                FfStatus::Decode
            }
            _ => FfStatus::InvalidArgument,
        };
        Failure(status, e.to_string())
    }
}

impl From<DetectError> for Failure {
    fn from(e: DetectError) -> Self {
        Failure(FfStatus::Detector, e.to_string())
    }
}

impl From<MetricError> for Failure {
    fn from(e: MetricError) -> Self {
        Failure(FfStatus::Metric, e.to_string())
    }
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> FfStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => FfStatus::Ok,
        Ok(Err(Failure(status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic".into());
            FfStatus::Panic
        }
    }
}

fn non_null<'a, T>(p: *const T, what: &str) -> Result<&'a T, Failure> {
    // SAFETY: callers pass either NULL or a pointer obtained from this library
    // (or a valid object of type T), per the documented contract.
    unsafe { p.as_ref() }.ok_or_else(|| Failure(FfStatus::NullPointer, format!("{what} is NULL")))
}

fn out_ptr<T>(p: *mut T, what: &str) -> Result<*mut T, Failure> {
    if p.is_null() {
        Err(Failure(FfStatus::NullPointer, format!("{what} is NULL")))
    } else {
        Ok(p)
    }
}

fn kind_of(code: u32) -> Result<DetectorKind, Failure> {
    Ok(match code {
        FF_DETECTOR_FAST => DetectorKind::Fast,
        FF_DETECTOR_FAST_BATCH => DetectorKind::FastBatch,
        FF_DETECTOR_HARRIS => DetectorKind::Harris,
        FF_DETECTOR_HARRIS_FIXED => DetectorKind::HarrisFixed,
        other => return Err(Failure(FfStatus::InvalidArgument, format!("unknown detector code {other}"))),
    })
}

fn code_of(kind: DetectorKind) -> u32 {
    match kind {
        DetectorKind::Fast => FF_DETECTOR_FAST,
        DetectorKind::FastBatch => FF_DETECTOR_FAST_BATCH,
        DetectorKind::Harris => FF_DETECTOR_HARRIS,
        DetectorKind::HarrisFixed => FF_DETECTOR_HARRIS_FIXED,
    }
}

impl From<&DetectorSettings> for FfDetectorConfig {
    fn from(s: &DetectorSettings) -> Self {
        Self {
            detector: code_of(s.detector),
            fast_arc_length: s.fast.arc_length,
            fast_threshold: s.fast.threshold,
            fast_nms_window: s.fast.nms_window as u32,
            lanes: s.lanes as u32,
            harris_k: s.harris.k,
            harris_response_threshold: s.harris.response_threshold,
            harris_sobel_size: s.harris.sobel_size as u32,
            harris_block_size: s.harris.block_size as u32,
            harris_nms_window: s.harris.nms_window as u32,
            fixed_integer_bits: s.fixed_format.integer_bits,
            fixed_fraction_bits: s.fixed_format.fraction_bits,
            fixed_accumulator_bits: s.fixed_format.accumulator_bits,
        }
    }
}

impl FfDetectorConfig {
    fn settings(&self) -> Result<DetectorSettings, Failure> {
        Ok(DetectorSettings {
            detector: kind_of(self.detector)?,
            fast: FastConfig {
                arc_length: self.fast_arc_length,
                threshold: self.fast_threshold,
                nms_window: self.fast_nms_window as usize,
            },
            harris: HarrisConfig {
                k: self.harris_k,
                response_threshold: self.harris_response_threshold,
                sobel_size: self.harris_sobel_size as usize,
                block_size: self.harris_block_size as usize,
                nms_window: self.harris_nms_window as usize,
            },
            fixed_format: FixedPointFormat {
                integer_bits: self.fixed_integer_bits,
                fraction_bits: self.fixed_fraction_bits,
                accumulator_bits: self.fixed_accumulator_bits,
            },
            lanes: self.lanes as usize,
        })
    }
}

fn to_corner(c: &FfCorner) -> Corner {
    Corner::new(c.x, c.y, c.score, c.level)
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn ff_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Static name of a status code, e.g. `"invalid_argument"`.
#[no_mangle]
pub extern "C" fn ff_status_name(status: FfStatus) -> *const c_char {
    let s: &'static str = match status {
        FfStatus::Ok => "ok\0",
        FfStatus::NullPointer => "null_pointer\0",
        FfStatus::InvalidArgument => "invalid_argument\0",
        FfStatus::Io => "io\0",
        FfStatus::Decode => "decode\0",
        FfStatus::Detector => "detector\0",
        FfStatus::Metric => "metric\0",
        FfStatus::OutOfRange => "out_of_range\0",
        FfStatus::Panic => "panic\0",
    };
    s.as_ptr().cast()
}

/// Message of the last failing call on this thread, or NULL if none. The
/// pointer stays valid until the next failing call on the same thread.
#[no_mangle]
pub extern "C" fn ff_last_error_message() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ref().map_or(ptr::null(), |c| c.as_ptr()))
}

/// Copies a `width` x `height` image whose rows start `stride` bytes apart.
///
/// # Safety
/// `data` must point to at least `stride * (height - 1) + width` readable bytes.
#[no_mangle]
pub unsafe extern "C" fn ff_image_from_buffer(
    data: *const u8,
    width: usize,
    height: usize,
    stride: usize,
    out: *mut *mut FfImage,
) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        non_null(data, "data")?;
        if width == 0 || height == 0 {
            return Err(ImageError::EmptyImage { width, height }.into());
        }
        if stride < width {
            return Err(Failure(FfStatus::InvalidArgument, format!("stride {stride} is less than width {width}")));
        }
        let len = stride * (height - 1) + width;
        // SAFETY: the caller guarantees `len` readable bytes at `data`.
        let src = unsafe { slice::from_raw_parts(data, len) };
        let pixels: Vec<u8> = (0..height).flat_map(|y| &src[y * stride..y * stride + width]).copied().collect();
        let img = Image::new(width, height, pixels)?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(FfImage { inner: img })) };
        Ok(())
    })
}

/// Loads a binary (P5) 8-bit PGM file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_image_load_pgm(path: *const c_char, out: *mut *mut FfImage) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        non_null(path, "path")?;
        // SAFETY: non-null and NUL-terminated per the contract.
        let path = unsafe { CStr::from_ptr(path) }
            .to_str()
            .map_err(|_| Failure(FfStatus::InvalidArgument, "path is not valid UTF-8".into()))?;
        let img = featfront::image::load_pgm(path)?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(FfImage { inner: img })) };
        Ok(())
    })
}

/// Width in pixels, 0 for NULL.
///
/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_image_width(img: *const FfImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.inner.width())
}

/// Height in pixels, 0 for NULL.
///
/// # Safety
/// `img` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_image_height(img: *const FfImage) -> usize {
    unsafe { img.as_ref() }.map_or(0, |i| i.inner.height())
}

/// Releases an image; NULL is ignored.
///
/// # Safety
/// `img` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_image_free(img: *mut FfImage) {
    if !img.is_null() {
        drop(unsafe { Box::from_raw(img) });
    }
}

/// Default parameters for one of the `FF_DETECTOR_*` detectors. An unknown
/// code yields the FAST defaults with `detector` left as given, which
/// `ff_detect` then rejects.
#[no_mangle]
pub extern "C" fn ff_detector_config_default(detector: u32) -> FfDetectorConfig {
    let kind = kind_of(detector).unwrap_or_default();
    FfDetectorConfig { detector, ..FfDetectorConfig::from(&DetectorSettings::with_kind(kind)) }
}

/// Runs a detector at full resolution. `config` may be NULL for FAST-9 defaults.
///
/// # Safety
/// `img` must be a live handle, `config` NULL or valid, `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_detect(
    img: *const FfImage,
    config: *const FfDetectorConfig,
    out: *mut *mut FfCornerList,
) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let img = non_null(img, "image")?;
        let settings = match unsafe { config.as_ref() } {
            Some(c) => c.settings()?,
            None => DetectorSettings::default(),
        };
        let corners = settings
            .detect(&img.inner)?
            .into_iter()
            .map(|c| FfCorner { x: c.x, y: c.y, score: c.score, level: c.level })
            .collect();
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = Box::into_raw(Box::new(FfCornerList { corners })) };
        Ok(())
    })
}

/// Number of corners, 0 for NULL.
///
/// # Safety
/// `list` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_corner_list_len(list: *const FfCornerList) -> usize {
    unsafe { list.as_ref() }.map_or(0, |l| l.corners.len())
}

/// Pointer to the contiguous corner array (valid while the list lives), or
/// NULL for an empty or NULL list.
///
/// # Safety
/// `list` must be NULL or a live handle.
#[no_mangle]
pub unsafe extern "C" fn ff_corner_list_data(list: *const FfCornerList) -> *const FfCorner {
    match unsafe { list.as_ref() } {
        Some(l) if !l.corners.is_empty() => l.corners.as_ptr(),
        _ => ptr::null(),
    }
}

/// Copies corner `index` into `out`.
///
/// # Safety
/// `list` must be a live handle and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_corner_list_get(list: *const FfCornerList, index: usize, out: *mut FfCorner) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let list = non_null(list, "list")?;
        let c = list.corners.get(index).ok_or_else(|| {
            Failure(FfStatus::OutOfRange, format!("index {index} out of range for {} corners", list.corners.len()))
        })?;
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = *c };
        Ok(())
    })
}

/// Releases a corner list; NULL is ignored.
///
/// # Safety
/// `list` must be NULL or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ff_corner_list_free(list: *mut FfCornerList) {
    if !list.is_null() {
        drop(unsafe { Box::from_raw(list) });
    }
}

/// Matches `candidate` against `reference` within `radius` pixels on the same level.
///
/// # Safety
/// Both lists must be live handles and `out` writable.
#[no_mangle]
pub unsafe extern "C" fn ff_agreement(
    reference: *const FfCornerList,
    candidate: *const FfCornerList,
    radius: f64,
    out: *mut FfAgreement,
) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let a: Vec<Corner> = non_null(reference, "reference")?.corners.iter().map(to_corner).collect();
        let b: Vec<Corner> = non_null(candidate, "candidate")?.corners.iter().map(to_corner).collect();
        let s = agreement(&a, &b, radius)?;
        let result = FfAgreement {
            matched: s.matched,
            reference_count: s.reference_count,
            candidate_count: s.candidate_count,
            precision: s.precision,
            recall: s.recall,
            mean_offset: s.mean_offset,
        };
        // SAFETY: `out` is non-null and writable per the contract.
        unsafe { *out = result };
        Ok(())
    })
}

/// `baseline_ms / candidate_ms`; both must be positive.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_speedup(baseline_ms: f64, candidate_ms: f64, out: *mut f64) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let v = speedup(baseline_ms, candidate_ms)?;
        unsafe { *out = v };
        Ok(())
    })
}

/// Modeled energy in millijoules: watts times milliseconds.
///
/// # Safety
/// `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn ff_energy_per_frame(power_w: f64, frame_time_ms: f64, out: *mut f64) -> FfStatus {
    guard(|| {
        let out = out_ptr(out, "out")?;
        let v = energy_per_frame(power_w, frame_time_ms)?;
        unsafe { *out = v };
        Ok(())
    })
}
