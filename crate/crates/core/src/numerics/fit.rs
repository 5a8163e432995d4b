use crate::error::{Error, Result};

/// Outcome of a two-parameter nonlinear least-squares fit.
#[derive(Debug, Clone, PartialEq)]
pub struct FitResult {
    /// Fitted coefficients: (a, b) for the power law, (p, q) for the
    /// rational model.
    pub params: Vec<f64>,
    /// Root-mean-square residual, in the units of the dependent variable.
    pub residual_rms: f64,
    /// Refinement iterations performed (at least 1).
    pub iterations: usize,
}

const MAX_ITERS: usize = 200;
const STEP_TOL: f64 = 1e-10;

/// Fits theta = a * R^b by damped Gauss-Newton, seeded from a coarse
/// grid over the exponent with the linear coefficient solved in closed
/// form at each grid point (first grid minimum wins).
pub fn fit_power_model(samples: &[(f64, f64)]) -> Result<FitResult> {
    validate(samples)?;
    // Grid over b; a is linear given b: a = sum(theta R^b) / sum(R^2b).
    let mut best = (f64::INFINITY, 0.0, 0.0);
    let mut b = -3.0;
    while b <= 3.0 + 1e-12 {
        let (mut num, mut den) = (0.0, 0.0);
        for &(r, th) in samples {
            let rb = r.powf(b);
            num += th * rb;
            den += rb * rb;
        }
        if den > 0.0 {
            let a = num / den;
            let sse = sse_power(samples, a, b);
            if sse < best.0 {
                best = (sse, a, b);
            }
        }
        b += 0.05;
    }
    let (params, sse, iterations) = levenberg_refine(
        samples,
        [best.1, best.2],
        |p, r| p[0] * r.powf(p[1]),
        |p, r| [r.powf(p[1]), p[0] * r.powf(p[1]) * r.ln()],
        |_p| true,
    );
    Ok(FitResult {
        params: params.to_vec(),
        residual_rms: (sse / samples.len() as f64).sqrt(),
        iterations,
    })
}

/// Fits theta = p / (R + q), seeded from a coarse grid over the shift q
/// with p solved in closed form at each grid point.
pub fn fit_rational_model(samples: &[(f64, f64)]) -> Result<FitResult> {
    validate(samples)?;
    let r_min = samples.iter().map(|s| s.0).fold(f64::INFINITY, f64::min);
    let r_max = samples.iter().map(|s| s.0).fold(0.0_f64, f64::max);
    // q must keep R + q > 0 on every sample.
    let q_lo = -r_min;
    let span = 2.0 * r_max + r_min;
    let mut best = (f64::INFINITY, 0.0, 0.0);
    for k in 1..=400 {
        let q = q_lo + span * k as f64 / 401.0;
        let (mut num, mut den) = (0.0, 0.0);
        for &(r, th) in samples {
            let inv = 1.0 / (r + q);
            num += th * inv;
            den += inv * inv;
        }
        let p = num / den;
        let sse = sse_rational(samples, p, q);
        if sse < best.0 {
            best = (sse, p, q);
        }
    }
    let (params, sse, iterations) = levenberg_refine(
        samples,
        [best.1, best.2],
        |p, r| p[0] / (r + p[1]),
        |p, r| {
            let inv = 1.0 / (r + p[1]);
            [inv, -p[0] * inv * inv]
        },
        |p| samples.iter().all(|s| s.0 + p[1] > 0.0),
    );
    Ok(FitResult {
        params: params.to_vec(),
        residual_rms: (sse / samples.len() as f64).sqrt(),
        iterations,
    })
}

fn validate(samples: &[(f64, f64)]) -> Result<()> {
    if samples.len() < 3 {
        return Err(Error::Fit(format!(
            "need at least 3 samples, got {}",
            samples.len()
        )));
    }
    for &(r, th) in samples {
        if !(r > 0.0 && th > 0.0) || !r.is_finite() || !th.is_finite() {
            return Err(Error::Fit(format!("invalid sample (R={r}, theta={th})")));
        }
    }
    let first = samples[0].0;
    if samples.iter().all(|s| s.0 == first) {
        return Err(Error::Fit("degenerate data: all R equal".into()));
    }
    Ok(())
}

fn sse_power(samples: &[(f64, f64)], a: f64, b: f64) -> f64 {
    samples
        .iter()
        .map(|&(r, th)| {
            let e = th - a * r.powf(b);
            e * e
        })
        .sum()
}

fn sse_rational(samples: &[(f64, f64)], p: f64, q: f64) -> f64 {
    samples
        .iter()
        .map(|&(r, th)| {
            let e = th - p / (r + q);
            e * e
        })
        .sum()
}

/// Damped Gauss-Newton (Levenberg-Marquardt) refinement for a
/// two-parameter model with analytic Jacobian. `feasible` rejects
/// parameter vectors outside the model domain.
fn levenberg_refine(
    samples: &[(f64, f64)],
    seed: [f64; 2],
    model: impl Fn(&[f64; 2], f64) -> f64,
    jacobian: impl Fn(&[f64; 2], f64) -> [f64; 2],
    feasible: impl Fn(&[f64; 2]) -> bool,
) -> ([f64; 2], f64, usize) {
    let sse = |p: &[f64; 2]| -> f64 {
        samples
            .iter()
            .map(|&(r, th)| {
                let e = th - model(p, r);
                e * e
            })
            .sum()
    };
    let mut params = seed;
    let mut current = sse(&params);
    let mut lambda = 1e-3;
    let mut iterations = 0;
    for _ in 0..MAX_ITERS {
        iterations += 1;
        // Accumulate J^T J and J^T r.
        let (mut h00, mut h01, mut h11) = (0.0, 0.0, 0.0);
        let (mut g0, mut g1) = (0.0, 0.0);
        for &(r, th) in samples {
            let e = th - model(&params, r);
            let j = jacobian(&params, r);
            h00 += j[0] * j[0];
            h01 += j[0] * j[1];
            h11 += j[1] * j[1];
            g0 += j[0] * e;
            g1 += j[1] * e;
        }
        let mut stepped = false;
        for _ in 0..30 {
            let a00 = h00 * (1.0 + lambda);
            let a11 = h11 * (1.0 + lambda);
            let det = a00 * a11 - h01 * h01;
            if det.abs() < 1e-300 {
                lambda *= 10.0;
                continue;
            }
            let d0 = (g0 * a11 - g1 * h01) / det;
            let d1 = (g1 * a00 - g0 * h01) / det;
            let trial = [params[0] + d0, params[1] + d1];
            if !feasible(&trial) || !trial[0].is_finite() || !trial[1].is_finite() {
                lambda *= 10.0;
                continue;
            }
            let trial_sse = sse(&trial);
            if trial_sse <= current {
                let rel = (d0.abs() / params[0].abs().max(1e-12))
                    .max(d1.abs() / params[1].abs().max(1e-12));
                params = trial;
                current = trial_sse;
                lambda = (lambda * 0.1).max(1e-14);
                stepped = true;
                if rel < STEP_TOL {
                    return (params, current, iterations);
                }
                break;
            }
            lambda *= 10.0;
        }
        if !stepped {
            break;
        }
    }
    (params, current, iterations.max(1))
}
