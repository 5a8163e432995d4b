//! Bifocal lens synthesis: a long-focal internal region (thin center)
//! joined to a short-focal external region at a boundary angle, with the
//! axial offset of the internal surface chosen so both surfaces meet on
//! the boundary ray.
//!
//! The axial coordinate `z` is measured from the external vertex toward
//! the aperture; the external focus sits at z = -f_e.

use crate::error::{Error, Result};
use crate::lens::{
    attenuated_amplitude, max_feed_angle, profile_cartesian, profile_polar, sample_profile,
    thickness, LensProfile, LensSpec,
};

const REGION_SAMPLES: usize = 256;

/// Bifocal lens parameters.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifocalSpec {
    /// External (short) focal distance, m.
    pub f_e: f64,
    /// Internal (long) focal distance, m.
    pub f_i: f64,
    /// Focal ratio f_i / f_e, > 1.
    pub rho: f64,
    /// Boundary angle separating the regions, rad.
    pub nu: f64,
    /// Index of refraction.
    pub n: f64,
    /// Wavelength multiple in the wave-path matching condition.
    pub m_int: u32,
    /// Operating wavelength, m.
    pub lambda: f64,
}

impl BifocalSpec {
    pub fn new(f_e: f64, f_i: f64, nu: f64, n: f64, m_int: u32, lambda: f64) -> Result<Self> {
        if !(f_e > 0.0) || !(lambda > 0.0) {
            return Err(Error::Domain(format!(
                "focal distance and wavelength must be positive (f_e={f_e}, lambda={lambda})"
            )));
        }
        if !(f_i > f_e) {
            return Err(Error::Domain(format!(
                "internal focal distance must exceed the external one (f_i={f_i}, f_e={f_e})"
            )));
        }
        if m_int < 1 {
            return Err(Error::Domain("wavelength multiple m_int must be >= 1".into()));
        }
        let mu_max = max_feed_angle(n)?;
        if !(nu > 0.0 && nu < mu_max) {
            return Err(Error::Domain(format!(
                "boundary angle {nu} rad outside (0, {mu_max})"
            )));
        }
        Ok(Self {
            f_e,
            f_i,
            rho: f_i / f_e,
            nu,
            n,
            m_int,
            lambda,
        })
    }
}

/// Solved bifocal surfaces.
#[derive(Debug, Clone, PartialEq)]
pub struct BifocalGeometry {
    /// Internal surface sampled relative to its own vertex.
    pub internal_profile: LensProfile,
    /// Axial offset of the internal vertex from the external vertex, m.
    pub internal_offset: f64,
    /// External surface sampled relative to the external vertex.
    pub external_profile: LensProfile,
    /// Boundary point (x radial, z axial from the external vertex), m.
    pub boundary_point: (f64, f64),
}

impl BifocalGeometry {
    /// CSV export `region,y_mm,x_mm`; axial coordinates are absolute
    /// (external-vertex datum) so the two regions line up.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("region,y_mm,x_mm\n");
        for &(x, y) in &self.internal_profile.samples {
            out.push_str(&format!(
                "internal,{},{}\n",
                y * 1e3,
                (self.internal_offset + x) * 1e3
            ));
        }
        for &(x, y) in &self.external_profile.samples {
            out.push_str(&format!("external,{},{}\n", y * 1e3, x * 1e3));
        }
        out
    }
}

/// Boundary angle between two adjacent divergence angles: the midpoint.
pub fn boundary_angle(theta_lo: f64, theta_hi: f64) -> Result<f64> {
    if !(theta_lo > 0.0 && theta_lo < theta_hi && theta_hi < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!(
            "need 0 < theta_lo < theta_hi < pi/2 (got {theta_lo}, {theta_hi})"
        )));
    }
    Ok(0.5 * (theta_lo + theta_hi))
}

/// Internal focal distance preserving the mode-1 wavefront:
/// f_i = sqrt((m lambda + f_e / cos(theta_1)) * f_e * tan(theta_1)).
pub fn internal_focal(f_e: f64, theta_1: f64, lambda: f64, m_int: u32) -> Result<f64> {
    if !(f_e > 0.0 && lambda > 0.0) {
        return Err(Error::Domain(format!(
            "focal distance and wavelength must be positive (f_e={f_e}, lambda={lambda})"
        )));
    }
    if m_int < 1 {
        return Err(Error::Domain("wavelength multiple m_int must be >= 1".into()));
    }
    if !(theta_1 > 0.0 && theta_1 < std::f64::consts::FRAC_PI_2) {
        return Err(Error::Domain(format!("theta_1={theta_1} outside (0, pi/2)")));
    }
    let s = m_int as f64 * lambda + f_e / theta_1.cos();
    Ok((s * f_e * theta_1.tan()).sqrt())
}

/// Focal ratio rho = f_i / f_e; `convergent` is false when the inputs
/// yield rho <= 1 (the internal region would not be the long-focal one).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FocalRatio {
    pub rho: f64,
    pub convergent: bool,
}

pub fn focal_ratio(f_e: f64, theta_1: f64, lambda: f64, m_int: u32) -> Result<FocalRatio> {
    let rho = internal_focal(f_e, theta_1, lambda, m_int)? / f_e;
    Ok(FocalRatio {
        rho,
        convergent: rho > 1.0,
    })
}

/// Smallest wavelength multiple with rho > 1 at the given geometry.
pub fn smallest_convergent_m_int(f_e: f64, theta_1: f64, lambda: f64) -> Result<u32> {
    for m in 1..=10_000 {
        if focal_ratio(f_e, theta_1, lambda, m)?.convergent {
            return Ok(m);
        }
    }
    Err(Error::Geometry(
        "no wavelength multiple up to 10000 yields rho > 1".into(),
    ))
}

/// Wavelength multiple whose focal ratio is closest to `target_rho`,
/// together with the achieved ratio (smallest multiple wins ties).
pub fn m_int_matching_rho(
    f_e: f64,
    theta_1: f64,
    lambda: f64,
    target_rho: f64,
) -> Result<(u32, f64)> {
    let mut best: Option<(u32, f64)> = None;
    for m in 1..=10_000 {
        let rho = focal_ratio(f_e, theta_1, lambda, m)?.rho;
        match best {
            Some((_, r)) if (rho - target_rho).abs() >= (r - target_rho).abs() => {}
            _ => best = Some((m, rho)),
        }
        // rho grows with m; once past the target the best cannot improve
        if rho > target_rho {
            break;
        }
    }
    best.ok_or_else(|| Error::Geometry("focal-ratio search failed".into()))
}

/// Divergence angle referred to the internal focus, from the geometric
/// relation f_i tan(theta_l_fi) = f_e tan(theta_l).
pub fn theta_at_internal_focus(f_e: f64, theta_l: f64, f_i: f64) -> f64 {
    (f_e * theta_l.tan() / f_i).atan()
}

/// Divergence angle referred to the internal focus under the wave-path
/// matching condition m lambda + f_e/cos(theta_l) = f_i/cos(theta_l_fi).
pub fn theta_at_internal_focus_matched(
    f_e: f64,
    theta_l: f64,
    lambda: f64,
    m_int: u32,
    f_i: f64,
) -> Result<f64> {
    let s = m_int as f64 * lambda + f_e / theta_l.cos();
    let c = f_i / s;
    if !(0.0..=1.0).contains(&c) {
        return Err(Error::Domain(format!(
            "matching condition has no angle: f_i/(m lambda + f_e/cos) = {c}"
        )));
    }
    Ok(c.acos())
}

/// Solves the bifocal surface system: the boundary point lies on the
/// external surface along the ray at angle `nu` from the external focus,
/// and the internal surface is shifted axially to pass through it.
pub fn solve_bifocal(f_e: f64, rho: f64, nu: f64, n: f64) -> Result<BifocalGeometry> {
    if !(rho > 1.0) {
        return Err(Error::Domain(format!("focal ratio must exceed 1, got {rho}")));
    }
    let mu_max = max_feed_angle(n)?;
    if !(nu > 0.0 && nu < mu_max) {
        return Err(Error::Geometry(format!(
            "boundary angle {nu} rad outside (0, {mu_max}); no real boundary point (f_e={f_e}, rho={rho})"
        )));
    }
    let f_i = rho * f_e;
    // Boundary point from the external polar profile at nu.
    let r_b = profile_polar(n, f_e, nu)?;
    let x_b = r_b * nu.sin(); // radial
    let z_b = r_b * nu.cos() - f_e; // axial, external-vertex datum
    // Internal sag at the boundary radius fixes the axial offset C.
    let sag_i = profile_cartesian(n, f_i, x_b)?;
    let offset = z_b - sag_i;

    let internal_profile = {
        let mut p = sample_profile(n, f_i, 2.0 * x_b, REGION_SAMPLES)?;
        p.t_max = sag_i;
        p
    };
    // External region sampled from the boundary out to midway between nu
    // and the asymptote.
    let theta_out = 0.5 * (nu + mu_max);
    let y_out = profile_polar(n, f_e, theta_out)? * theta_out.sin();
    let mut samples = Vec::with_capacity(REGION_SAMPLES);
    for i in 0..REGION_SAMPLES {
        let y = x_b + (y_out - x_b) * i as f64 / (REGION_SAMPLES - 1) as f64;
        samples.push((profile_cartesian(n, f_e, y)?, y));
    }
    let t_max = samples[REGION_SAMPLES - 1].0;
    let external_profile = LensProfile { samples, t_max };

    Ok(BifocalGeometry {
        internal_profile,
        internal_offset: offset,
        external_profile,
        boundary_point: (x_b, z_b),
    })
}

/// Residual divergence of a beam from the external focus crossing the
/// long-focal internal region:
/// theta_t = arctan(sin(theta_l_fi) / (n - cos(theta_l_fi))),
/// tau = arcsin(sin(theta_l + theta_t)/n) - theta_t.
pub fn residual_divergence(theta_l: f64, theta_l_fi: f64, n: f64) -> Result<f64> {
    if !(theta_l > 0.0 && theta_l < std::f64::consts::FRAC_PI_2)
        || !(theta_l_fi > 0.0 && theta_l_fi < std::f64::consts::FRAC_PI_2)
    {
        return Err(Error::Domain(format!(
            "angles must lie in (0, pi/2) (theta_l={theta_l}, theta_l_fi={theta_l_fi})"
        )));
    }
    if !(n > 1.0) {
        return Err(Error::Domain(format!("refraction index must exceed 1, got {n}")));
    }
    let theta_t = (theta_l_fi.sin() / (n - theta_l_fi.cos())).atan();
    let s = (theta_l + theta_t).sin() / n;
    if !(-1.0..=1.0).contains(&s) {
        return Err(Error::Domain(format!("arcsin argument {s} outside [-1, 1]")));
    }
    Ok(s.asin() - theta_t)
}

/// Wave path of a beam from the external focus through the internal
/// region: f_e/cos(theta_l) + n T_max / cos(tau).
pub fn wave_path_external_focus(f_e: f64, theta_l: f64, t_max: f64, tau: f64, n: f64) -> f64 {
    f_e / theta_l.cos() + n * t_max / tau.cos()
}

/// Wave path of a beam from the internal focus (exits collimated):
/// f_i/cos(theta_l_fi) + n T_max.
pub fn wave_path_internal_focus(f_i: f64, theta_l_fi: f64, t_max: f64, n: f64) -> f64 {
    f_i / theta_l_fi.cos() + n * t_max
}

/// Error bound of the thin-lens approximation n T_max / cos(tau) ~ n T_max.
pub fn wave_path_approximation_bound(n: f64, t_max: f64, tau: f64) -> f64 {
    n * t_max * (1.0 / tau.cos() - 1.0)
}

/// Which lens region a ray crosses.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Branch {
    Internal,
    External,
}

/// Amplitude after the bifocal lens.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BifocalAmplitude {
    pub amplitude: f64,
    pub branch: Branch,
    pub fully_absorbed: bool,
}

/// Piecewise amplitude: rays below the boundary angle cross the internal
/// (long-focal, thinner) region, the rest the external region; a ray
/// exactly on the seam takes the external branch.
///
/// The energy-redistribution factor is evaluated at the external focal
/// distance for both regions (it is a property of the shared feed and
/// aperture); the regions differ through the thickness seen by the ray.
pub fn bifocal_amplitude(
    a_in: f64,
    theta: f64,
    spec: &BifocalSpec,
    lens: &LensSpec,
) -> Result<BifocalAmplitude> {
    if (lens.focal - spec.f_e).abs() > 1e-12 * spec.f_e.max(1.0) {
        return Err(Error::Config(format!(
            "lens focal {} does not match the bifocal external focal {}",
            lens.focal, spec.f_e
        )));
    }
    let branch = if theta < spec.nu {
        Branch::Internal
    } else {
        Branch::External
    };
    let focal = match branch {
        Branch::Internal => spec.f_i,
        Branch::External => spec.f_e,
    };
    let redistributed = crate::lens::aperture_amplitude(a_in, spec.n, spec.f_e, theta, lens.energy_ratio)?;
    let t = thickness(spec.n, focal, lens.diameter, theta)?;
    let att = attenuated_amplitude(redistributed, lens.attenuation_per_m, t)?;
    Ok(BifocalAmplitude {
        amplitude: att.amplitude,
        branch,
        fully_absorbed: att.fully_absorbed,
    })
}
