//! C ABI for the oamlens toolkit.
//!
//! Conventions: every fallible call returns an [`OamStatus`]; results
//! come back through out-pointers. Handles are opaque and must be
//! released with their matching `_free` function. The last failure
//! message is kept per thread and read with `oam_last_error_message`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::ptr;

use oamlens::beam::{
    fit_divergence_models, pattern_gain, DivergenceTable, ModeFit, OamMode, UcaGeometry,
};
use oamlens::bifocal;
use oamlens::lens;
use oamlens::Error;

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: &str) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg.to_string());
}

/// Result of every fallible call in this ABI.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OamStatus {
    Ok = 0,
    /// A required pointer argument was null.
    NullArgument = 1,
    /// Input rejected by domain or configuration validation.
    InvalidArgument = 2,
    /// Geometrically impossible request (angle past asymptote, ray off
    /// aperture, undefined beamwidth).
    Geometry = 3,
    /// Curve fitting failed or the samples were unusable.
    Fit = 4,
    Internal = 5,
}

fn status_of(e: &Error) -> OamStatus {
    match e {
        Error::Domain(_) | Error::Config(_) | Error::Parse(_) | Error::Bracket { .. } => {
            OamStatus::InvalidArgument
        }
        Error::Geometry(_) | Error::BeamwidthUndefined(_) => OamStatus::Geometry,
        Error::Fit(_) => OamStatus::Fit,
        Error::Io(_) => OamStatus::Internal,
    }
}

fn fail(e: Error) -> OamStatus {
    set_error(&e.to_string());
    status_of(&e)
}

/// Copies the last error message of this thread into `buf` (truncated,
/// always NUL terminated). Returns the full message length in bytes.
///
/// # Safety
/// `buf` must point to `len` writable bytes, or be null with `len` 0.
#[no_mangle]
pub unsafe extern "C" fn oam_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let msg = e.borrow();
        let bytes = msg.as_bytes();
        if !buf.is_null() && len > 0 {
            let n = bytes.len().min(len - 1);
            ptr::copy_nonoverlapping(bytes.as_ptr(), buf.cast(), n);
            *buf.add(n) = 0;
        }
        bytes.len()
    })
}

// --------------------------------------------------------------- divergence

/// Opaque divergence table handle.
pub struct OamTable(DivergenceTable);

/// Opaque fitted-models handle (both model forms for every mode).
pub struct OamFits(Vec<ModeFit>);

/// Returns the embedded simulation table. Never fails.
#[no_mangle]
pub extern "C" fn oam_table_builtin() -> *mut OamTable {
    Box::into_raw(Box::new(OamTable(oamlens::beam::builtin_divergence_table())))
}

/// Parses a divergence table from CSV text
/// (`R_mm,theta1_deg,theta2_deg,theta3_deg,theta4_deg`).
///
/// # Safety
/// `csv` must be a NUL-terminated string; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_table_from_csv(csv: *const c_char, out: *mut *mut OamTable) -> OamStatus {
    if csv.is_null() || out.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    let text = match CStr::from_ptr(csv).to_str() {
        Ok(t) => t,
        Err(_) => {
            set_error("csv text is not valid UTF-8");
            return OamStatus::InvalidArgument;
        }
    };
    match DivergenceTable::from_csv(text) {
        Ok(t) => {
            *out = Box::into_raw(Box::new(OamTable(t)));
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `table` must come from this ABI and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oam_table_free(table: *mut OamTable) {
    if !table.is_null() {
        drop(Box::from_raw(table));
    }
}

/// Fits both divergence models to every mode of the table.
///
/// # Safety
/// `table` must be a live handle; `out` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_fit_models(table: *const OamTable, out: *mut *mut OamFits) -> OamStatus {
    if table.is_null() || out.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match fit_divergence_models(&(*table).0) {
        Ok(f) => {
            *out = Box::into_raw(Box::new(OamFits(f)));
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// # Safety
/// `fits` must come from this ABI and not be freed twice.
#[no_mangle]
pub unsafe extern "C" fn oam_fits_free(fits: *mut OamFits) {
    if !fits.is_null() {
        drop(Box::from_raw(fits));
    }
}

/// Model form selector for `oam_fits_coefficients`.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OamModelForm {
    /// theta = a * R^b
    PowerLaw = 0,
    /// theta = p / (R + q)
    Rational = 1,
}

/// Reads the fitted coefficient pair and RMS residual (degrees) of one
/// mode. `params` receives 2 values.
///
/// # Safety
/// `fits` must be a live handle; `params` must point to 2 writable
/// doubles; `rms_deg` must be writable or null.
#[no_mangle]
pub unsafe extern "C" fn oam_fits_coefficients(
    fits: *const OamFits,
    mode_l: i32,
    form: OamModelForm,
    params: *mut f64,
    rms_deg: *mut f64,
) -> OamStatus {
    if fits.is_null() || params.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    let Some(fit) = (*fits).0.iter().find(|f| f.mode_l == mode_l) else {
        set_error("no fitted model for this mode");
        return OamStatus::InvalidArgument;
    };
    let (model, rms) = match form {
        OamModelForm::PowerLaw => (&fit.power, fit.power_rms_deg),
        OamModelForm::Rational => (&fit.rational, fit.rational_rms_deg),
    };
    *params = model.params.0;
    *params.add(1) = model.params.1;
    if !rms_deg.is_null() {
        *rms_deg = rms;
    }
    OamStatus::Ok
}

/// Divergence angle (degrees) predicted by the fitted power model.
///
/// # Safety
/// `fits` must be a live handle; `theta_deg` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_divergence_angle(
    fits: *const OamFits,
    mode_l: i32,
    r_mm: f64,
    theta_deg: *mut f64,
) -> OamStatus {
    if fits.is_null() || theta_deg.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    let Some(fit) = (*fits).0.iter().find(|f| f.mode_l == mode_l) else {
        set_error("no fitted model for this mode");
        return OamStatus::InvalidArgument;
    };
    *theta_deg = oamlens::beam::divergence_from_model(&fit.power, r_mm).theta_deg;
    OamStatus::Ok
}

// --------------------------------------------------------------------- beam

/// Normalized far-field gain pattern of the mode at polar angle
/// `theta_rad`, in [0, 1].
///
/// # Safety
/// `gain` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_pattern_gain(
    n_elements: u32,
    radius_m: f64,
    frequency_hz: f64,
    mode_l: i32,
    theta_rad: f64,
    gain: *mut f64,
) -> OamStatus {
    if gain.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    let geom = match UcaGeometry::new(n_elements, radius_m, frequency_hz) {
        Ok(g) => g,
        Err(e) => return fail(e),
    };
    match pattern_gain(&geom, OamMode(mode_l), theta_rad) {
        Ok(g) => {
            *gain = g;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// --------------------------------------------------------------------- lens

/// Asymptotic feed angle arccos(1/n), radians.
///
/// # Safety
/// `mu_max_rad` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_max_feed_angle(n: f64, mu_max_rad: *mut f64) -> OamStatus {
    if mu_max_rad.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match lens::max_feed_angle(n) {
        Ok(v) => {
            *mu_max_rad = v;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Lens thickness (m) seen by a ray at feed angle `theta_rad`.
///
/// # Safety
/// `thickness_m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_lens_thickness(
    n: f64,
    focal_m: f64,
    diameter_m: f64,
    theta_rad: f64,
    thickness_m: *mut f64,
) -> OamStatus {
    if thickness_m.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match lens::thickness(n, focal_m, diameter_m, theta_rad) {
        Ok(t) => {
            *thickness_m = t;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Samples the single-focal refracting surface at `count` equally spaced
/// radial stations; writes axial sag into `x_m` and radius into `y_m`.
///
/// # Safety
/// `x_m` and `y_m` must each point to `count` writable doubles.
#[no_mangle]
pub unsafe extern "C" fn oam_lens_profile(
    n: f64,
    focal_m: f64,
    diameter_m: f64,
    count: usize,
    x_m: *mut f64,
    y_m: *mut f64,
) -> OamStatus {
    if x_m.is_null() || y_m.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match lens::sample_profile(n, focal_m, diameter_m, count) {
        Ok(profile) => {
            for (i, &(x, y)) in profile.samples.iter().enumerate() {
                *x_m.add(i) = x;
                *y_m.add(i) = y;
            }
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

// ------------------------------------------------------------------ bifocal

/// Internal focal distance (m) of the bifocal lens preserving the
/// `theta_1_rad` wavefront with wavelength multiple `m_int`.
///
/// # Safety
/// `f_i_m` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_internal_focal(
    f_e_m: f64,
    theta_1_rad: f64,
    lambda_m: f64,
    m_int: u32,
    f_i_m: *mut f64,
) -> OamStatus {
    if f_i_m.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match bifocal::internal_focal(f_e_m, theta_1_rad, lambda_m, m_int) {
        Ok(f) => {
            *f_i_m = f;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

/// Residual divergence tau (rad) of a ray from the external focus
/// crossing the internal region.
///
/// # Safety
/// `tau_rad` must be writable.
#[no_mangle]
pub unsafe extern "C" fn oam_residual_divergence(
    theta_l_rad: f64,
    theta_l_fi_rad: f64,
    n: f64,
    tau_rad: *mut f64,
) -> OamStatus {
    if tau_rad.is_null() {
        set_error("null argument");
        return OamStatus::NullArgument;
    }
    match bifocal::residual_divergence(theta_l_rad, theta_l_fi_rad, n) {
        Ok(t) => {
            *tau_rad = t;
            OamStatus::Ok
        }
        Err(e) => fail(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::ffi::CString;

    #[test]
    fn table_fit_roundtrip_through_the_abi() {
        unsafe {
            let table = oam_table_builtin();
            assert!(!table.is_null());
            let mut fits: *mut OamFits = ptr::null_mut();
            assert_eq!(oam_fit_models(table, &mut fits), OamStatus::Ok);
            let mut params = [0.0f64; 2];
            let mut rms = 0.0f64;
            assert_eq!(
                oam_fits_coefficients(fits, 1, OamModelForm::PowerLaw, params.as_mut_ptr(), &mut rms),
                OamStatus::Ok
            );
            assert!((params[0] - 147.0).abs() / 147.0 < 0.10);
            assert!((params[1] + 1.011).abs() / 1.011 < 0.10);
            assert!(rms > 0.0 && rms < 1.5);
            let mut theta = 0.0f64;
            assert_eq!(oam_divergence_angle(fits, 1, 14.3, &mut theta), OamStatus::Ok);
            assert!((theta - 9.6).abs() < 1.0);
            oam_fits_free(fits);
            oam_table_free(table);
        }
    }

    #[test]
    fn csv_parse_and_error_reporting() {
        unsafe {
            let bad = CString::new("not,a,table\n1,2\n").unwrap();
            let mut table: *mut OamTable = ptr::null_mut();
            let st = oam_table_from_csv(bad.as_ptr(), &mut table);
            assert_ne!(st, OamStatus::Ok);
            let mut buf = [0 as c_char; 256];
            let len = oam_last_error_message(buf.as_mut_ptr(), buf.len());
            assert!(len > 0);
            let msg = CStr::from_ptr(buf.as_ptr()).to_str().unwrap();
            assert!(!msg.is_empty());
        }
    }

    #[test]
    fn null_arguments_are_rejected() {
        unsafe {
            assert_eq!(
                oam_table_from_csv(ptr::null(), ptr::null_mut()),
                OamStatus::NullArgument
            );
            assert_eq!(oam_fit_models(ptr::null(), ptr::null_mut()), OamStatus::NullArgument);
            assert_eq!(oam_max_feed_angle(1.5, ptr::null_mut()), OamStatus::NullArgument);
        }
    }

    #[test]
    fn scalar_operations_match_core() {
        unsafe {
            let mut mu = 0.0f64;
            assert_eq!(oam_max_feed_angle(1.48324, &mut mu), OamStatus::Ok);
            assert!((mu - lens::max_feed_angle(1.48324).unwrap()).abs() < 1e-15);
            assert_eq!(oam_max_feed_angle(0.9, &mut mu), OamStatus::InvalidArgument);

            let mut t = 0.0f64;
            assert_eq!(oam_lens_thickness(1.48324, 0.03, 0.05, 0.1, &mut t), OamStatus::Ok);
            assert!(t > 0.0);
            assert_eq!(
                oam_lens_thickness(1.48324, 0.03, 0.05, 1.0, &mut t),
                OamStatus::Geometry
            );

            let mut f_i = 0.0f64;
            assert_eq!(oam_internal_focal(0.03, 0.49, 0.00857, 27, &mut f_i), OamStatus::Ok);
            assert!(f_i > 0.03);
            assert_eq!(
                oam_internal_focal(0.03, 0.49, 0.00857, 0, &mut f_i),
                OamStatus::InvalidArgument
            );

            let mut g = 0.0f64;
            assert_eq!(oam_pattern_gain(8, 0.0143, 35e9, 1, 0.1, &mut g), OamStatus::Ok);
            assert!((0.0..=1.0).contains(&g));
        }
    }

    #[test]
    fn profile_fills_caller_buffers() {
        unsafe {
            let mut x = [0.0f64; 32];
            let mut y = [0.0f64; 32];
            assert_eq!(
                oam_lens_profile(1.48324, 0.03, 0.05, 32, x.as_mut_ptr(), y.as_mut_ptr()),
                OamStatus::Ok
            );
            assert_eq!(x[0], 0.0);
            assert!((y[31] - 0.025).abs() < 1e-15);
            assert!(x[31] > 0.0);
        }
    }

    #[test]
    fn generated_header_exports_the_abi() {
        let header = std::fs::read_to_string(concat!(env!("CARGO_MANIFEST_DIR"), "/include/oamlens.h"))
            .expect("header generated at build time");
        for symbol in [
            "oam_table_builtin",
            "oam_fit_models",
            "oam_fits_coefficients",
            "oam_lens_profile",
            "oam_internal_focal",
            "OamStatus",
        ] {
            assert!(header.contains(symbol), "missing {symbol}");
        }
    }
}
