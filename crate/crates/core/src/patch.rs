//! Microstrip patch element sizing: width, effective permittivity,
//! fringing edge extension, and resonant length.

use serde::Serialize;

use crate::beam::C;
use crate::error::{Error, Result};
use crate::numerics::solve_scalar;

/// Patch element design with its inputs, SI units.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PatchDesign {
    /// Patch width, m.
    pub w_p: f64,
    /// Patch resonant length, m.
    pub l_p: f64,
    /// Fringing edge extension, m.
    pub delta_l: f64,
    /// Effective relative permittivity.
    pub eps_re: f64,
    /// Resonant frequency, Hz.
    pub f_r: f64,
    /// Substrate relative permittivity.
    pub eps_r: f64,
    /// Substrate thickness, m.
    pub h: f64,
}

/// W_P = (c / 2 f_r) sqrt(2 / (eps_r + 1)).
pub fn patch_width(f_r: f64, eps_r: f64) -> Result<f64> {
    if !(f_r > 0.0) {
        return Err(Error::Domain(format!("resonant frequency must be positive, got {f_r}")));
    }
    if !(eps_r >= 1.0) {
        return Err(Error::Domain(format!("relative permittivity must be >= 1, got {eps_r}")));
    }
    Ok(C / (2.0 * f_r) * (2.0 / (eps_r + 1.0)).sqrt())
}

/// eps_re = (eps_r+1)/2 + (eps_r-1)/2 * (1 + 10 h / W_P)^(-1/2).
pub fn effective_permittivity(eps_r: f64, h: f64, w_p: f64) -> Result<f64> {
    if !(eps_r >= 1.0) {
        return Err(Error::Domain(format!("relative permittivity must be >= 1, got {eps_r}")));
    }
    if !(h > 0.0) || !(w_p > 0.0) {
        return Err(Error::Domain(format!(
            "substrate thickness and patch width must be positive (h={h}, W_P={w_p})"
        )));
    }
    Ok((eps_r + 1.0) / 2.0 + (eps_r - 1.0) / 2.0 / (1.0 + 10.0 * h / w_p).sqrt())
}

/// Substrate thickness reproducing a target effective permittivity,
/// by inverting the width formula's companion relation.
pub fn solve_substrate_height(eps_r: f64, w_p: f64, target_eps_re: f64) -> Result<f64> {
    if !(target_eps_re > (eps_r + 1.0) / 2.0 && target_eps_re < eps_r) {
        return Err(Error::Domain(format!(
            "target eps_re {target_eps_re} outside the reachable range ({}, {eps_r})",
            (eps_r + 1.0) / 2.0
        )));
    }
    // closed form: (1 + 10h/W)^(-1/2) = t, h = W (1/t^2 - 1) / 10
    let t = (target_eps_re - (eps_r + 1.0) / 2.0) / ((eps_r - 1.0) / 2.0);
    let h = w_p * (1.0 / (t * t) - 1.0) / 10.0;
    // cross-check with the forward formula via bisection
    let f = |x: f64| effective_permittivity(eps_r, x, w_p).unwrap() - target_eps_re;
    let oracle = solve_scalar(f, h * 0.5, h * 2.0, h * 1e-12)?;
    debug_assert!((oracle - h).abs() <= 1e-9 * h);
    Ok(h)
}

/// Delta L = 0.412 h (eps_re + 0.3)(W_P/h + 0.264) /
///           [(eps_re - 0.258)(W_P/h + 0.8)].
pub fn edge_extension(h: f64, eps_re: f64, w_p: f64) -> Result<f64> {
    if !(h > 0.0) || !(w_p > 0.0) {
        return Err(Error::Domain(format!(
            "substrate thickness and patch width must be positive (h={h}, W_P={w_p})"
        )));
    }
    if !(eps_re > 0.258) {
        return Err(Error::Domain(format!("eps_re must exceed 0.258, got {eps_re}")));
    }
    let ratio = w_p / h;
    Ok(0.412 * h * (eps_re + 0.3) * (ratio + 0.264) / ((eps_re - 0.258) * (ratio + 0.8)))
}

/// L_P = c / (2 f_r sqrt(eps_re)) - 2 Delta L.
pub fn patch_length(f_r: f64, eps_re: f64, delta_l: f64) -> Result<f64> {
    if !(f_r > 0.0) || !(eps_re >= 1.0) || !(delta_l >= 0.0) {
        return Err(Error::Domain(format!(
            "need f_r > 0, eps_re >= 1, delta_l >= 0 (f_r={f_r}, eps_re={eps_re}, dL={delta_l})"
        )));
    }
    let l = C / (2.0 * f_r * eps_re.sqrt()) - 2.0 * delta_l;
    if !(l > 0.0) {
        return Err(Error::Geometry(format!(
            "edge extension {delta_l} m leaves a non-positive patch length {l} m"
        )));
    }
    Ok(l)
}

/// Full sizing pipeline from (f_r, eps_r, h).
pub fn design_patch(f_r: f64, eps_r: f64, h: f64) -> Result<PatchDesign> {
    let w_p = patch_width(f_r, eps_r)?;
    let eps_re = effective_permittivity(eps_r, h, w_p)?;
    let delta_l = edge_extension(h, eps_re, w_p)?;
    let l_p = patch_length(f_r, eps_re, delta_l)?;
    if !(w_p > l_p) {
        return Err(Error::Geometry(format!(
            "patch width {w_p} m not larger than length {l_p} m"
        )));
    }
    Ok(PatchDesign {
        w_p,
        l_p,
        delta_l,
        eps_re,
        f_r,
        eps_r,
        h,
    })
}
