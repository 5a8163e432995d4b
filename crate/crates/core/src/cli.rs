//! Command-line front end: `uca-design`, `fit-divergence`,
//! `lens-design`, and `capacity`.
//!
//! Parameters come either from flags or from a JSON config file
//! (`--config`); mixing the two is a validation error so every run is
//! reproducible from a single artifact. Exit codes: 0 success, 2
//! usage/validation, 1 internal error.

use std::fs;
use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand, ValueEnum};
use serde::Deserialize;
use serde_json::json;

use crate::beam::{
    builtin_divergence_table, divergence_from_model, fit_divergence_models, DivergenceTable,
    ModeFit, OamMode, UcaGeometry, C,
};
use crate::bifocal::{
    boundary_angle, internal_focal, m_int_matching_rho, residual_divergence, solve_bifocal,
    theta_at_internal_focus, BifocalSpec,
};
use crate::error::{Error, Result};
use crate::lens::{diameter_for, max_feed_angle, sample_profile, LensSpec};
use crate::link::{sweep, LinkConfig, ModeChannel, Scenario, SweepSetup, SweepVariable};
use crate::numerics::solve_scalar;
use crate::patch;

const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Parser)]
#[command(name = "oamlens", version, about = "OAM radio link design and analysis toolkit")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Size a microstrip patch element
    UcaDesign(UcaArgs),
    /// Fit divergence-angle models to a simulation table
    FitDivergence(FitArgs),
    /// Synthesize a single-focal or bifocal lens profile
    LensDesign(LensArgs),
    /// Sweep link capacity over distance, focal length, or UCA radius
    Capacity(CapacityArgs),
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
enum Format {
    Json,
    Csv,
}

pub fn run() -> i32 {
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            let code = match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 2,
            };
            let _ = e.print();
            return code;
        }
    };
    let result = match cli.command {
        Command::UcaDesign(a) => cmd_uca_design(a),
        Command::FitDivergence(a) => cmd_fit_divergence(a),
        Command::LensDesign(a) => cmd_lens_design(a),
        Command::Capacity(a) => cmd_capacity(a),
    };
    match result {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Io(_) => 1,
                _ => 2,
            }
        }
    }
}

fn read_config<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T> {
    let text = fs::read_to_string(path)?;
    serde_json::from_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
}

fn reject_mixed(config: &Option<PathBuf>, any_flag: bool) -> Result<()> {
    if config.is_some() && any_flag {
        return Err(Error::Config(
            "--config cannot be combined with parameter flags".into(),
        ));
    }
    Ok(())
}

fn require<T>(v: Option<T>, field: &str) -> Result<T> {
    v.ok_or_else(|| Error::Config(format!("missing required parameter {field}")))
}

fn write_output(out: &Option<PathBuf>, text: &str) -> Result<()> {
    match out {
        Some(path) => fs::write(path, text).map_err(Error::from),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

// ---------------------------------------------------------------- uca-design

#[derive(Parser)]
struct UcaArgs {
    /// JSON config file (exclusive with parameter flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Resonant frequency, GHz
    #[arg(long)]
    freq_ghz: Option<f64>,
    /// Substrate relative permittivity
    #[arg(long)]
    eps_r: Option<f64>,
    /// Substrate thickness, mm
    #[arg(long)]
    h_mm: Option<f64>,
    /// Solve the substrate thickness from a target effective permittivity
    #[arg(long)]
    solve_h: bool,
    /// Target effective permittivity for --solve-h
    #[arg(long)]
    target_eps_re: Option<f64>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct UcaConfig {
    freq_ghz: Option<f64>,
    eps_r: Option<f64>,
    h_mm: Option<f64>,
    solve_h: bool,
    target_eps_re: Option<f64>,
}

fn cmd_uca_design(args: UcaArgs) -> Result<()> {
    let flags_used = args.freq_ghz.is_some()
        || args.eps_r.is_some()
        || args.h_mm.is_some()
        || args.solve_h
        || args.target_eps_re.is_some();
    reject_mixed(&args.config, flags_used)?;
    let cfg = match &args.config {
        Some(p) => read_config::<UcaConfig>(p)?,
        None => UcaConfig {
            freq_ghz: args.freq_ghz,
            eps_r: args.eps_r,
            h_mm: args.h_mm,
            solve_h: args.solve_h,
            target_eps_re: args.target_eps_re,
        },
    };
    let f_r = require(cfg.freq_ghz, "freq_ghz")? * 1e9;
    let eps_r = require(cfg.eps_r, "eps_r")?;
    let (h, solved) = if cfg.solve_h {
        let target = require(cfg.target_eps_re, "target_eps_re")?;
        let w_p = patch::patch_width(f_r, eps_r)?;
        (patch::solve_substrate_height(eps_r, w_p, target)?, true)
    } else {
        (require(cfg.h_mm, "h_mm")? * 1e-3, false)
    };
    let d = patch::design_patch(f_r, eps_r, h)?;
    let text = match args.format {
        Format::Json => {
            let report = json!({
                "tool_version": VERSION,
                "W_P_mm": d.w_p * 1e3,
                "L_P_mm": d.l_p * 1e3,
                "dL_mm": d.delta_l * 1e3,
                "eps_re": d.eps_re,
                "inputs": {
                    "freq_ghz": f_r / 1e9,
                    "eps_r": eps_r,
                    "h_mm": h * 1e3,
                    "h_solved": solved,
                },
            });
            format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Format::Csv => format!(
            "key,value\nW_P_mm,{}\nL_P_mm,{}\ndL_mm,{}\neps_re,{}\nh_mm,{}\n",
            d.w_p * 1e3,
            d.l_p * 1e3,
            d.delta_l * 1e3,
            d.eps_re,
            h * 1e3
        ),
    };
    write_output(&args.out, &text)
}

// ------------------------------------------------------------ fit-divergence

#[derive(Parser)]
struct FitArgs {
    /// JSON config file (exclusive with parameter flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Divergence table CSV (R_mm,theta1_deg..theta4_deg); built-in when absent
    #[arg(long)]
    table: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct FitConfig {
    table: Option<PathBuf>,
}

fn load_table(path: &Option<PathBuf>) -> Result<DivergenceTable> {
    match path {
        Some(p) => DivergenceTable::from_csv(&fs::read_to_string(p)?),
        None => Ok(builtin_divergence_table()),
    }
}

fn cmd_fit_divergence(args: FitArgs) -> Result<()> {
    reject_mixed(&args.config, args.table.is_some())?;
    let table_path = match &args.config {
        Some(p) => read_config::<FitConfig>(p)?.table,
        None => args.table.clone(),
    };
    let fits = fit_divergence_models(&load_table(&table_path)?)?;
    let text = match args.format {
        Format::Json => {
            let modes: Vec<_> = fits
                .iter()
                .map(|f| {
                    json!({
                        "mode": f.mode_l,
                        "power": {"a": f.power.params.0, "b": f.power.params.1, "rms_deg": f.power_rms_deg},
                        "rational": {"p": f.rational.params.0, "q": f.rational.params.1, "rms_deg": f.rational_rms_deg},
                    })
                })
                .collect();
            let report = json!({"tool_version": VERSION, "modes": modes});
            format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes"))
        }
        Format::Csv => {
            let mut out = String::from(
                "mode,power_a,power_b,power_rms_deg,rational_p,rational_q,rational_rms_deg\n",
            );
            for f in &fits {
                out.push_str(&format!(
                    "{},{},{},{},{},{},{}\n",
                    f.mode_l,
                    f.power.params.0,
                    f.power.params.1,
                    f.power_rms_deg,
                    f.rational.params.0,
                    f.rational.params.1,
                    f.rational_rms_deg
                ));
            }
            out
        }
    };
    write_output(&args.out, &text)
}

// --------------------------------------------------------------- lens-design

#[derive(Parser)]
struct LensArgs {
    /// JSON config file (exclusive with parameter flags)
    #[arg(long)]
    config: Option<PathBuf>,
    /// Operating frequency, GHz
    #[arg(long)]
    freq_ghz: Option<f64>,
    /// Lens material relative permittivity
    #[arg(long)]
    eps_r: Option<f64>,
    /// Focal distance (external focal for --bifocal), mm
    #[arg(long)]
    focal_mm: Option<f64>,
    /// Maximum feed angle the aperture must cover, deg
    #[arg(long)]
    theta_max_deg: Option<f64>,
    /// Aperture diameter, mm (alternative to --theta-max-deg)
    #[arg(long)]
    diameter_mm: Option<f64>,
    /// Balance coefficient m with D = m f (alternative sizing input)
    #[arg(long)]
    balance_m: Option<f64>,
    /// Amplitude attenuation per millimeter of thickness
    #[arg(long)]
    attenuation_per_mm: Option<f64>,
    /// Ratio of energy entering the lens to total energy
    #[arg(long)]
    energy_ratio: Option<f64>,
    /// Profile sample count
    #[arg(long)]
    samples: Option<usize>,
    /// Design a bifocal lens
    #[arg(long)]
    bifocal: bool,
    /// UCA radius the divergence angles are evaluated at, mm
    #[arg(long)]
    uca_radius_mm: Option<f64>,
    /// Wavelength multiple of the wave-path matching condition
    #[arg(long)]
    m_int: Option<u32>,
    /// Focal ratio target used to pick m_int when --m-int is absent
    #[arg(long)]
    target_rho: Option<f64>,
    /// Lower boundary mode (its wavefront is preserved by the internal region)
    #[arg(long)]
    boundary_lo: Option<u32>,
    /// Upper boundary mode
    #[arg(long)]
    boundary_hi: Option<u32>,
    #[arg(long, value_enum, default_value = "json")]
    format: Format,
    /// Output base path; writes <out>.json and <out>.csv
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct LensConfig {
    freq_ghz: Option<f64>,
    eps_r: Option<f64>,
    focal_mm: Option<f64>,
    theta_max_deg: Option<f64>,
    diameter_mm: Option<f64>,
    balance_m: Option<f64>,
    attenuation_per_mm: Option<f64>,
    energy_ratio: Option<f64>,
    samples: Option<usize>,
    bifocal: bool,
    uca_radius_mm: Option<f64>,
    m_int: Option<u32>,
    target_rho: Option<f64>,
    boundary_lo: Option<u32>,
    boundary_hi: Option<u32>,
}

impl LensConfig {
    fn from_args(a: &LensArgs) -> Self {
        Self {
            freq_ghz: a.freq_ghz,
            eps_r: a.eps_r,
            focal_mm: a.focal_mm,
            theta_max_deg: a.theta_max_deg,
            diameter_mm: a.diameter_mm,
            balance_m: a.balance_m,
            attenuation_per_mm: a.attenuation_per_mm,
            energy_ratio: a.energy_ratio,
            samples: a.samples,
            bifocal: a.bifocal,
            uca_radius_mm: a.uca_radius_mm,
            m_int: a.m_int,
            target_rho: a.target_rho,
            boundary_lo: a.boundary_lo,
            boundary_hi: a.boundary_hi,
        }
    }

    fn any_flag(a: &LensArgs) -> bool {
        a.freq_ghz.is_some()
            || a.eps_r.is_some()
            || a.focal_mm.is_some()
            || a.theta_max_deg.is_some()
            || a.diameter_mm.is_some()
            || a.balance_m.is_some()
            || a.attenuation_per_mm.is_some()
            || a.energy_ratio.is_some()
            || a.samples.is_some()
            || a.bifocal
            || a.uca_radius_mm.is_some()
            || a.m_int.is_some()
            || a.target_rho.is_some()
            || a.boundary_lo.is_some()
            || a.boundary_hi.is_some()
    }
}

/// Aperture sizing: exactly one of theta_max, diameter, or balance m.
fn sizing_theta(cfg: &LensConfig, n: f64, f: f64) -> Result<f64> {
    let given = [
        cfg.theta_max_deg.is_some(),
        cfg.diameter_mm.is_some(),
        cfg.balance_m.is_some(),
    ]
    .iter()
    .filter(|&&b| b)
    .count();
    if given != 1 {
        return Err(Error::Config(
            "exactly one of theta_max_deg, diameter_mm, balance_m must be given".into(),
        ));
    }
    let mu_max = max_feed_angle(n)?;
    if let Some(deg) = cfg.theta_max_deg {
        let theta = deg.to_radians();
        if !(theta > 0.0) || theta >= mu_max {
            return Err(Error::Config(format!(
                "theta_max_deg {deg} exceeds lens angular coverage (limit {:.3} deg)",
                mu_max.to_degrees()
            )));
        }
        return Ok(theta);
    }
    let target_m = match (cfg.balance_m, cfg.diameter_mm) {
        (Some(m), _) => m,
        (None, Some(d_mm)) => d_mm * 1e-3 / f,
        _ => unreachable!(),
    };
    let limit = crate::lens::balance_coefficient(n, mu_max * (1.0 - 1e-9))?;
    if !(target_m > 0.0) || target_m >= limit {
        return Err(Error::Config(format!(
            "requested aperture (m = {target_m:.4}) exceeds lens angular coverage"
        )));
    }
    solve_scalar(
        |t| crate::lens::balance_coefficient(n, t).unwrap_or(f64::INFINITY) - target_m,
        1e-12,
        mu_max * (1.0 - 1e-9),
        1e-14,
    )
}

fn cmd_lens_design(args: LensArgs) -> Result<()> {
    reject_mixed(&args.config, LensConfig::any_flag(&args))?;
    let cfg = match &args.config {
        Some(p) => read_config::<LensConfig>(p)?,
        None => LensConfig::from_args(&args),
    };
    let freq_ghz = require(cfg.freq_ghz, "freq_ghz")?;
    let eps_r = require(cfg.eps_r, "eps_r")?;
    let f = require(cfg.focal_mm, "focal_mm")? * 1e-3;
    let lambda = C / (freq_ghz * 1e9);
    let n = crate::lens::refraction_index(eps_r, 1.0)?;
    let theta_max = sizing_theta(&cfg, n, f)?;
    let d = diameter_for(n, f, theta_max)?;
    let samples = cfg.samples.unwrap_or(256);
    let spec = LensSpec::new(
        n,
        f,
        d,
        cfg.attenuation_per_mm.unwrap_or(5.0),
        cfg.energy_ratio.unwrap_or(1e-3),
    )?;
    let profile = sample_profile(n, f, d, samples)?;

    let mut report = json!({
        "tool_version": VERSION,
        "n": n,
        "mu_max_deg": max_feed_angle(n)?.to_degrees(),
        "focal_mm": f * 1e3,
        "diameter_mm": d * 1e3,
        "theta_max_deg": theta_max.to_degrees(),
        "balance_m": d / f,
        "t_max_mm": profile.t_max * 1e3,
        "samples": samples,
        "attenuation_per_mm": spec.attenuation_per_m / 1e3,
        "energy_ratio": spec.energy_ratio,
    });
    let csv;
    if cfg.bifocal {
        let r_mm = require(cfg.uca_radius_mm, "uca_radius_mm")?;
        let lo = cfg.boundary_lo.unwrap_or(1);
        let hi = cfg.boundary_hi.unwrap_or(lo + 1);
        if lo == 0 || hi != lo + 1 {
            return Err(Error::Config(format!(
                "boundary modes must be adjacent with boundary_lo >= 1, got ({lo}, {hi})"
            )));
        }
        let fits = fit_divergence_models(&builtin_divergence_table())?;
        let theta_of = |l: u32| -> Result<f64> {
            let fit = fits
                .iter()
                .find(|m| m.mode_l == l as i32)
                .ok_or_else(|| Error::Config(format!("no divergence model for mode {l}")))?;
            Ok(divergence_from_model(&fit.power, r_mm).theta_deg.to_radians())
        };
        let theta_lo = theta_of(lo)?;
        let nu = boundary_angle(theta_lo, theta_of(hi)?)?;
        let m_int = match cfg.m_int {
            Some(m) => m,
            None => m_int_matching_rho(f, theta_lo, lambda, cfg.target_rho.unwrap_or(2.17))?.0,
        };
        let f_i = internal_focal(f, theta_lo, lambda, m_int)?;
        let bif = BifocalSpec::new(f, f_i, nu, n, m_int, lambda)?;
        let geom = solve_bifocal(f, bif.rho, nu, n)?;
        let tau = residual_divergence(theta_lo, theta_at_internal_focus(f, theta_lo, f_i), n)?;
        report["bifocal"] = json!({
            "f_i_mm": f_i * 1e3,
            "rho": bif.rho,
            "m_int": m_int,
            "nu_deg": nu.to_degrees(),
            "boundary_modes": [lo, hi],
            "boundary_point_mm": {"x": geom.boundary_point.0 * 1e3, "z": geom.boundary_point.1 * 1e3},
            "internal_offset_mm": geom.internal_offset * 1e3,
            "tau_deg": tau.to_degrees(),
            "uca_radius_mm": r_mm,
        });
        csv = geom.to_csv();
    } else {
        csv = profile.to_csv();
    }
    let json_text = format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes"));
    match &args.out {
        Some(base) => {
            fs::write(base.with_extension("json"), &json_text)?;
            fs::write(base.with_extension("csv"), &csv)?;
            Ok(())
        }
        None => match args.format {
            Format::Json => write_output(&None, &json_text),
            Format::Csv => write_output(&None, &csv),
        },
    }
}

// ------------------------------------------------------------------ capacity

#[derive(Parser)]
struct CapacityArgs {
    /// JSON config file (exclusive with parameter flags)
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,
    #[arg(long, value_enum)]
    variable: Option<VariableArg>,
    /// Sweep range lower bound (m for distance/focal sweeps in SI, mm for radius)
    #[arg(long)]
    min: Option<f64>,
    /// Sweep range upper bound
    #[arg(long)]
    max: Option<f64>,
    #[arg(long)]
    steps: Option<usize>,
    #[arg(long)]
    tx_power_w: Option<f64>,
    #[arg(long)]
    bandwidth_hz: Option<f64>,
    #[arg(long)]
    noise_w: Option<f64>,
    #[arg(long)]
    rx_gain: Option<f64>,
    #[arg(long)]
    rx_radius_m: Option<f64>,
    #[arg(long)]
    distance_m: Option<f64>,
    #[arg(long)]
    freq_ghz: Option<f64>,
    /// OAM mode indices, comma separated
    #[arg(long, value_delimiter = ',')]
    modes: Option<Vec<u32>>,
    /// Residual divergence of converged beams, deg
    #[arg(long)]
    sigma_deg: Option<f64>,
    #[arg(long)]
    n_elements: Option<u32>,
    #[arg(long)]
    uca_radius_mm: Option<f64>,
    #[arg(long)]
    eps_r: Option<f64>,
    #[arg(long)]
    focal_mm: Option<f64>,
    #[arg(long)]
    diameter_mm: Option<f64>,
    #[arg(long)]
    attenuation_per_mm: Option<f64>,
    #[arg(long)]
    energy_ratio: Option<f64>,
    #[arg(long)]
    m_int: Option<u32>,
    #[arg(long)]
    boundary_lo: Option<u32>,
    #[arg(long)]
    boundary_hi: Option<u32>,
    /// Transmit peak gain applied to every mode; pattern directivity when absent
    #[arg(long)]
    peak_gain: Option<f64>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum ScenarioArg {
    Divergent,
    Converged,
    Bifocal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum, Deserialize)]
#[serde(rename_all = "snake_case")]
enum VariableArg {
    Distance,
    Focal,
    UcaRadius,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
struct CapacityConfig {
    scenario: Option<ScenarioArg>,
    variable: Option<VariableArg>,
    min: Option<f64>,
    max: Option<f64>,
    steps: Option<usize>,
    tx_power_w: Option<f64>,
    bandwidth_hz: Option<f64>,
    noise_w: Option<f64>,
    rx_gain: Option<f64>,
    rx_radius_m: Option<f64>,
    distance_m: Option<f64>,
    freq_ghz: Option<f64>,
    modes: Option<Vec<u32>>,
    sigma_deg: Option<f64>,
    n_elements: Option<u32>,
    uca_radius_mm: Option<f64>,
    eps_r: Option<f64>,
    focal_mm: Option<f64>,
    diameter_mm: Option<f64>,
    attenuation_per_mm: Option<f64>,
    energy_ratio: Option<f64>,
    m_int: Option<u32>,
    boundary_lo: Option<u32>,
    boundary_hi: Option<u32>,
    peak_gain: Option<f64>,
}

impl CapacityConfig {
    fn from_args(a: &CapacityArgs) -> Self {
        Self {
            scenario: a.scenario,
            variable: a.variable,
            min: a.min,
            max: a.max,
            steps: a.steps,
            tx_power_w: a.tx_power_w,
            bandwidth_hz: a.bandwidth_hz,
            noise_w: a.noise_w,
            rx_gain: a.rx_gain,
            rx_radius_m: a.rx_radius_m,
            distance_m: a.distance_m,
            freq_ghz: a.freq_ghz,
            modes: a.modes.clone(),
            sigma_deg: a.sigma_deg,
            n_elements: a.n_elements,
            uca_radius_mm: a.uca_radius_mm,
            eps_r: a.eps_r,
            focal_mm: a.focal_mm,
            diameter_mm: a.diameter_mm,
            attenuation_per_mm: a.attenuation_per_mm,
            energy_ratio: a.energy_ratio,
            m_int: a.m_int,
            boundary_lo: a.boundary_lo,
            boundary_hi: a.boundary_hi,
            peak_gain: a.peak_gain,
        }
    }

    fn any_flag(a: &CapacityArgs) -> bool {
        a.scenario.is_some()
            || a.variable.is_some()
            || a.min.is_some()
            || a.max.is_some()
            || a.steps.is_some()
            || a.tx_power_w.is_some()
            || a.bandwidth_hz.is_some()
            || a.noise_w.is_some()
            || a.rx_gain.is_some()
            || a.rx_radius_m.is_some()
            || a.distance_m.is_some()
            || a.freq_ghz.is_some()
            || a.modes.is_some()
            || a.sigma_deg.is_some()
            || a.n_elements.is_some()
            || a.uca_radius_mm.is_some()
            || a.eps_r.is_some()
            || a.focal_mm.is_some()
            || a.diameter_mm.is_some()
            || a.attenuation_per_mm.is_some()
            || a.energy_ratio.is_some()
            || a.m_int.is_some()
            || a.boundary_lo.is_some()
            || a.boundary_hi.is_some()
            || a.peak_gain.is_some()
    }
}

fn mode_theta(fits: &[ModeFit], mode_l: u32, r_mm: f64) -> Result<f64> {
    if mode_l == 0 {
        return Ok(0.0);
    }
    let fit = fits
        .iter()
        .find(|m| m.mode_l == mode_l as i32)
        .ok_or_else(|| Error::Config(format!("no divergence model for mode {mode_l}")))?;
    Ok(divergence_from_model(&fit.power, r_mm).theta_deg.to_radians())
}

fn cmd_capacity(args: CapacityArgs) -> Result<()> {
    reject_mixed(&args.config, CapacityConfig::any_flag(&args))?;
    let cfg = match &args.config {
        Some(p) => read_config::<CapacityConfig>(p)?,
        None => CapacityConfig::from_args(&args),
    };
    let scenario = match require(cfg.scenario, "scenario")? {
        ScenarioArg::Divergent => Scenario::Divergent,
        ScenarioArg::Converged => Scenario::Converged,
        ScenarioArg::Bifocal => Scenario::Bifocal,
    };
    let variable = match require(cfg.variable, "variable")? {
        VariableArg::Distance => SweepVariable::Distance,
        VariableArg::Focal => SweepVariable::Focal,
        VariableArg::UcaRadius => SweepVariable::UcaRadius,
    };
    let range = (require(cfg.min, "min")?, require(cfg.max, "max")?);
    let steps = cfg.steps.unwrap_or(200);
    let freq_ghz = require(cfg.freq_ghz, "freq_ghz")?;
    let lambda = C / (freq_ghz * 1e9);
    let modes = cfg.modes.unwrap_or_else(|| vec![0, 1, 2]);
    let r_mm = cfg.uca_radius_mm.unwrap_or(14.3);
    let geom = UcaGeometry::new(cfg.n_elements.unwrap_or(8), r_mm * 1e-3, freq_ghz * 1e9)?;
    let n = crate::lens::refraction_index(cfg.eps_r.unwrap_or(2.2), 1.0)?;
    let lens = LensSpec::new(
        n,
        cfg.focal_mm.unwrap_or(30.0) * 1e-3,
        cfg.diameter_mm.unwrap_or(50.0) * 1e-3,
        cfg.attenuation_per_mm.unwrap_or(5.0),
        cfg.energy_ratio.unwrap_or(1e-3),
    )?;
    let fits = fit_divergence_models(&builtin_divergence_table())?;
    let boundary = (cfg.boundary_lo.unwrap_or(1), cfg.boundary_hi.unwrap_or(2));
    let m_int = cfg.m_int.unwrap_or(27);

    let mut channels = Vec::with_capacity(modes.len());
    for &l in &modes {
        channels.push(ModeChannel::from_geometry(&geom, OamMode(l as i32), cfg.peak_gain)?);
    }
    let peak_gains: Vec<f64> = channels.iter().map(|c| c.peak_gain).collect();

    // Default residual divergence: the internal-region tau for the
    // bifocal scenario, 0.5 deg for the single-lens one.
    let sigma = match cfg.sigma_deg {
        Some(deg) => deg.to_radians(),
        None => {
            if scenario == Scenario::Bifocal {
                let theta_lo = mode_theta(&fits, boundary.0, r_mm)?;
                let f_i = internal_focal(lens.focal, theta_lo, lambda, m_int)?;
                residual_divergence(theta_lo, theta_at_internal_focus(lens.focal, theta_lo, f_i), n)?
            } else {
                0.5f64.to_radians()
            }
        }
    };

    let link = LinkConfig {
        tx_power: cfg.tx_power_w.unwrap_or(1.0),
        bandwidth: cfg.bandwidth_hz.unwrap_or(1e6),
        noise: cfg.noise_w.unwrap_or(1e-12),
        rx_gain: cfg.rx_gain.unwrap_or(10.0),
        rx_radius: cfg.rx_radius_m.unwrap_or(0.1),
        distance: cfg.distance_m.unwrap_or(5.0),
        wavelength: lambda,
        modes,
        sigma,
    };
    let setup = SweepSetup {
        cfg: link,
        channels,
        lens,
        fits,
        uca_radius_mm: r_mm,
        m_int,
        boundary_modes: boundary,
        peak_gains,
    };
    let curve = sweep(&setup, scenario, variable, range, steps)?;
    let text = match args.format {
        Format::Csv => curve.to_csv(),
        Format::Json => {
            let report = json!({
                "tool_version": VERSION,
                "sweep_variable": curve.sweep_variable,
                "points": curve.points,
            });
            format!("{}\n", serde_json::to_string_pretty(&report).expect("report serializes"))
        }
    };
    write_output(&args.out, &text)
}
