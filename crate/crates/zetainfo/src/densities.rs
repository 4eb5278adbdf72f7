//! The tent-shaped probability densities, their characteristic functions,
//! and the even spectral weights used by the thermal and time-evolved
//! closed forms. Numeric Fourier machinery here exists purely as a
//! validation oracle for the closed forms.

use std::sync::Arc;

use crate::divergences::RenyiParams;
use crate::kernels::ZetaKernel;
use crate::quad;
use crate::{Error, Result};

/// Below this |omega| the characteristic functions and weights use their
/// removable-singularity value.
pub const WEIGHT_OMEGA_TOL: f64 = 1e-6;

/// Quadrature window half-width: the tails decay at least like e^{-2πz|t|}.
pub fn default_window(z: f64) -> f64 {
    10.0f64.max(10.0 / z)
}

fn check_tent_params(p: RenyiParams) -> Result<()> {
    if !(0.0 < p.alpha && p.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "tent density needs alpha in (0,1), got {}",
            p.alpha
        )));
    }
    Ok(())
}

/// ln coth(x) for x > 0 without cancellation at large x and without
/// underflow at tiny x (ln coth x = -ln x + O(x^2)).
fn ln_coth(x: f64) -> f64 {
    if x < 1e-8 {
        return -x.ln();
    }
    let e = (-2.0 * x).exp();
    e.ln_1p() - (-e).ln_1p()
}

/// p(t) = (2/π) ln|coth(πt/2)|.
pub fn high_peak_tent(t: f64) -> f64 {
    if t == 0.0 {
        return f64::INFINITY;
    }
    std::f64::consts::FRAC_2_PI * ln_coth(std::f64::consts::FRAC_PI_2 * t.abs())
}

/// p_{α,z}(t) = (z/(2πα(1−α))) ln(1 + (sin(πα)/sinh(πzt))²).
pub fn alpha_z_tent(t: f64, p: RenyiParams) -> Result<f64> {
    check_tent_params(p)?;
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let pi = std::f64::consts::PI;
    let ratio = (pi * p.alpha).sin() / (pi * p.z * t).sinh();
    Ok(p.z / (2.0 * pi * p.alpha * (1.0 - p.alpha)) * (ratio * ratio).ln_1p())
}

/// Equivalent coth-based form of p_{α,z}.
pub fn alpha_z_tent_coth_form(t: f64, p: RenyiParams) -> Result<f64> {
    check_tent_params(p)?;
    if t == 0.0 {
        return Ok(f64::INFINITY);
    }
    let pi = std::f64::consts::PI;
    let x = pi * p.z * t;
    let coth = x.cosh() / x.sinh();
    let c = (pi * p.alpha).cos() / x.sinh();
    Ok(p.z / (2.0 * pi * p.alpha * (1.0 - p.alpha)) * (coth * coth - c * c).ln())
}

/// Characteristic function f_{α,z}(ω) of p_{α,z}, with the removable
/// singularity at ω = 0 filled in by its limit value 1.
pub fn char_fn_alpha_z(omega: f64, p: RenyiParams) -> Result<f64> {
    if omega.abs() < WEIGHT_OMEGA_TOL {
        return Ok(1.0);
    }
    // the α→1 and z→∞ pointwise limits are both identically one
    if (p.alpha - 1.0).abs() < 1e-7 || p.z > 1e7 {
        return Ok(1.0);
    }
    let a = (1.0 - p.alpha) / p.z;
    let b = p.alpha / p.z;
    let num = p.z * (-a * omega).exp_m1() * (-b * omega).exp_m1();
    let den = p.alpha * (1.0 - p.alpha) * omega * (-(-omega / p.z).exp_m1());
    Ok(num / den)
}

/// Spectral weight for the thermal closed form:
/// ĝ(ω) = 2 ζ(e^{−ω},1) (e^{−ω}−1)² / (ω²(e^{−ω}+1)); even, ĝ(0) = κ.
pub fn thermal_weight(omega: f64, kernel: &ZetaKernel) -> f64 {
    if omega.abs() < WEIGHT_OMEGA_TOL {
        return kernel.kappa();
    }
    let em = (-omega).exp_m1(); // e^{-ω} − 1
    2.0 * kernel.eval(em + 1.0, 1.0) * em * em / (omega * omega * (em + 2.0))
}

/// Spectral weight for the time-evolved closed form:
/// ĝ(ω) = ζ(e^{−ω},1)(1−e^{−ω})/ω; even, ĝ(0) = κ.
pub fn time_evolved_weight(omega: f64, kernel: &ZetaKernel) -> f64 {
    if omega.abs() < WEIGHT_OMEGA_TOL {
        return kernel.kappa();
    }
    let em = (-omega).exp_m1();
    kernel.eval(em + 1.0, 1.0) * (-em) / omega
}

/// Adaptive integration over [a, b] of a function with integrable
/// logarithmic singularities at the listed interior points; each
/// singular-sided piece is mapped by u = −ln(distance).
pub fn integrate_with_singularities(
    f: &dyn Fn(f64) -> f64,
    a: f64,
    b: f64,
    singularities: &[f64],
    abs_tol: f64,
) -> Result<f64> {
    let mut sings: Vec<f64> = singularities
        .iter()
        .cloned()
        .filter(|s| a < *s && *s < b)
        .collect();
    sings.sort_by(f64::total_cmp);
    sings.dedup();
    let mut points = vec![a];
    for (i, &s) in sings.iter().enumerate() {
        if i > 0 {
            let prev = sings[i - 1];
            if s - prev > 0.0 {
                points.push(0.5 * (prev + s));
            }
        }
        points.push(s);
    }
    points.push(b);
    let n = points.len() - 1;
    let tol = abs_tol / n as f64;
    let mut total = 0.0;
    for w in points.windows(2) {
        let (lo, hi) = (w[0], w[1]);
        let h = hi - lo;
        let lo_sing = sings.binary_search_by(|s| s.total_cmp(&lo)).is_ok();
        let hi_sing = sings.binary_search_by(|s| s.total_cmp(&hi)).is_ok();
        // stop the substitution before s ± d rounds back onto the
        // singular point itself; the neglected sliver is O(d ln(1/d))
        let u_max = |s: f64| (1.0 / (s.abs() * 1e-13).max(4e-18)).ln();
        total += if lo_sing {
            quad::integrate(|u: f64| {
                let d = (-u).exp();
                f(lo + d) * d
            }, (1.0 / h).ln(), u_max(lo), tol)?
        } else if hi_sing {
            quad::integrate(|u: f64| {
                let d = (-u).exp();
                f(hi - d) * d
            }, (1.0 / h).ln(), u_max(hi), tol)?
        } else {
            quad::integrate(&f, lo, hi, tol)?
        };
    }
    Ok(total)
}

/// Real part of ∫_{-window}^{window} density(t) e^{iωt} dt, assuming the
/// only singularity sits at t = 0. Errors out if the imaginary part does
/// not cancel (the densities of interest are even).
pub fn numeric_fourier(density: &dyn Fn(f64) -> f64, omega: f64, window: f64) -> Result<f64> {
    let re = integrate_with_singularities(
        &|t| density(t) * (omega * t).cos(),
        -window,
        window,
        &[0.0],
        1e-8,
    )?;
    let im = integrate_with_singularities(
        &|t| density(t) * (omega * t).sin(),
        -window,
        window,
        &[0.0],
        1e-8,
    )?;
    if im.abs() > 1e-6 * re.abs().max(1.0) {
        return Err(Error::Numerical(format!(
            "non-vanishing imaginary part {im:.3e} in Fourier transform"
        )));
    }
    Ok(re)
}

/// Samples of q_{α,z} = p * p_{α,z} on a grid, each point via
/// singularity-split quadrature (singularities of the integrand at τ = 0
/// and τ = t).
pub fn convolve_densities(alpha: f64, z: f64, t_grid: &[f64]) -> Result<Vec<f64>> {
    let p = RenyiParams::new(alpha, z)?;
    check_tent_params(p)?;
    let wz = default_window(z);
    t_grid
        .iter()
        .map(|&t| {
            let lo = (-12.0f64).min(t - wz);
            let hi = 12.0f64.max(t + wz);
            integrate_with_singularities(
                &|tau| high_peak_tent(tau) * alpha_z_tent(t - tau, p).unwrap_or(0.0),
                lo,
                hi,
                &[0.0, t],
                1e-8,
            )
        })
        .collect()
}

type RealFn = Arc<dyn Fn(f64) -> f64 + Send + Sync>;

/// A named even density together with the closed form of its
/// characteristic function.
#[derive(Clone)]
pub struct DensitySpec {
    label: String,
    window: f64,
    eval: RealFn,
    char_fn: RealFn,
}

impl DensitySpec {
    pub fn high_peak_tent() -> Self {
        Self {
            label: "high_peak_tent".to_string(),
            window: default_window(1.0),
            eval: Arc::new(high_peak_tent),
            char_fn: Arc::new(|w: f64| {
                if w.abs() < WEIGHT_OMEGA_TOL {
                    1.0
                } else {
                    (0.5 * w).tanh() / (0.5 * w)
                }
            }),
        }
    }

    pub fn alpha_z(p: RenyiParams) -> Result<Self> {
        check_tent_params(p)?;
        Ok(Self {
            label: format!("alpha_z_tent(alpha={},z={})", p.alpha, p.z),
            window: default_window(p.z),
            eval: Arc::new(move |t| alpha_z_tent(t, p).unwrap_or(f64::NAN)),
            char_fn: Arc::new(move |w| char_fn_alpha_z(w, p).unwrap_or(f64::NAN)),
        })
    }

    pub fn convolved(p: RenyiParams) -> Result<Self> {
        check_tent_params(p)?;
        let kernel = ZetaKernel::alpha_z(p);
        Ok(Self {
            label: format!("convolved(alpha={},z={})", p.alpha, p.z),
            window: default_window(p.z) + default_window(1.0),
            eval: Arc::new(move |t| {
                convolve_densities(p.alpha, p.z, &[t])
                    .map(|v| v[0])
                    .unwrap_or(f64::NAN)
            }),
            char_fn: Arc::new(move |w| thermal_weight(w, &kernel)),
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn window(&self) -> f64 {
        self.window
    }

    pub fn eval(&self, t: f64) -> f64 {
        (self.eval)(t)
    }

    pub fn char_fn(&self, omega: f64) -> f64 {
        (self.char_fn)(omega)
    }

    /// ∫ density over its effective support (quadrature check of the
    /// normalization to one).
    pub fn normalization(&self) -> Result<f64> {
        let f = self.eval.clone();
        integrate_with_singularities(&move |t| f(t), -self.window, self.window, &[0.0], 1e-8)
    }
}
