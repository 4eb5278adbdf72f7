//! The ζ(x,y) kernel family behind every spectral information-matrix
//! formula: Kubo-Mori, RLD, α-z, Petz, sandwiched, plus the monotonicity
//! scaffolding (MC functions and the operator-monotone candidate).

use std::sync::Arc;

use crate::divergences::RenyiParams;
use crate::matcore::{log_ratio, pow_diff};
use crate::{Error, Result};

/// Shared relative threshold for the degenerate (x ~ y) kernel branch.
pub const DEGENERATE_TOL: f64 = 1e-8;

/// |alpha - 1| below this, or z above 1e7, switches alpha-z evaluation to
/// the Kubo-Mori limit kernel.
pub const ALPHA_ONE_TOL: f64 = 1e-7;
pub const Z_LIMIT: f64 = 1e7;

fn near_diagonal(x: f64, y: f64) -> bool {
    (x - y).abs() <= DEGENERATE_TOL * x.max(y)
}

/// Diagonal branch; equals 1/x at x = y and keeps exact symmetry nearby.
fn diag_value(x: f64, y: f64) -> f64 {
    2.0 / (x + y)
}

fn km_raw(x: f64, y: f64) -> f64 {
    if near_diagonal(x, y) {
        diag_value(x, y)
    } else {
        log_ratio(x, y) / (x - y)
    }
}

fn rld_raw(x: f64, y: f64) -> f64 {
    0.5 * (1.0 / x + 1.0 / y)
}

fn alpha_z_raw(x: f64, y: f64, alpha: f64, z: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_TOL || z > Z_LIMIT {
        return km_raw(x, y);
    }
    if near_diagonal(x, y) {
        return diag_value(x, y);
    }
    let c = z / (alpha * (1.0 - alpha));
    let t1 = pow_diff(x, y, (1.0 - alpha) / z) / (x - y);
    let t2 = pow_diff(x, y, alpha / z) / pow_diff(x, y, 1.0 / z);
    c * t1 * t2
}

fn petz_raw(x: f64, y: f64, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_TOL {
        return km_raw(x, y);
    }
    if near_diagonal(x, y) {
        return diag_value(x, y);
    }
    let d = x - y;
    pow_diff(x, y, alpha) * pow_diff(x, y, 1.0 - alpha) / (alpha * (1.0 - alpha) * d * d)
}

fn sandwiched_raw(x: f64, y: f64, alpha: f64) -> f64 {
    if (alpha - 1.0).abs() < ALPHA_ONE_TOL {
        return km_raw(x, y);
    }
    if near_diagonal(x, y) {
        return diag_value(x, y);
    }
    pow_diff(x, y, (1.0 - alpha) / alpha) / ((1.0 - alpha) * pow_diff(x, y, 1.0 / alpha))
}

fn check_positive(x: f64, y: f64) -> Result<()> {
    if x <= 0.0 || y <= 0.0 || !x.is_finite() || !y.is_finite() {
        return Err(Error::Domain(format!(
            "kernel arguments must be positive, got ({x}, {y})"
        )));
    }
    Ok(())
}

/// ζ_{α,z}(x,y) with the Kubo-Mori limit branches for α near 1 and large z.
pub fn zeta_alpha_z(x: f64, y: f64, p: RenyiParams) -> Result<f64> {
    check_positive(x, y)?;
    Ok(alpha_z_raw(x, y, p.alpha, p.z))
}

/// (ln x - ln y)/(x - y), the Kubo-Mori kernel.
pub fn zeta_kubo_mori(x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    Ok(km_raw(x, y))
}

/// (1/x + 1/y)/2, the RLD kernel.
pub fn zeta_rld(x: f64, y: f64) -> Result<f64> {
    check_positive(x, y)?;
    Ok(rld_raw(x, y))
}

/// Petz kernel, the z = 1 specialization of ζ_{α,z}.
pub fn zeta_petz(x: f64, y: f64, alpha: f64) -> Result<f64> {
    check_positive(x, y)?;
    Ok(petz_raw(x, y, alpha))
}

/// Sandwiched kernel, the z = α specialization of ζ_{α,z}.
pub fn zeta_sandwiched(x: f64, y: f64, alpha: f64) -> Result<f64> {
    check_positive(x, y)?;
    Ok(sandwiched_raw(x, y, alpha))
}

/// Matrix-convexity comparison function for the Petz family:
/// α(1-α)(x-1)^2 / ((x^α - 1)(x^{1-α} - 1)); symmetric about α = 1/2.
pub fn mc_function_petz(x: f64, alpha: f64) -> Result<f64> {
    if x <= 0.0 || alpha <= 0.0 {
        return Err(Error::Domain(format!("need x, alpha > 0, got ({x}, {alpha})")));
    }
    if (x - 1.0).abs() < 1e-9 {
        return Ok(1.0);
    }
    let lx = x.ln();
    let num = alpha * (1.0 - alpha) * (x - 1.0) * (x - 1.0);
    let den = (alpha * lx).exp_m1() * ((1.0 - alpha) * lx).exp_m1();
    Ok(num / den)
}

/// Comparison function for the sandwiched family:
/// (1-α)(x^{1/α} - 1) / (x^{(1-α)/α} - 1); monotone decreasing in α.
pub fn mc_function_sandwiched(x: f64, alpha: f64) -> Result<f64> {
    if x <= 0.0 || alpha <= 0.0 {
        return Err(Error::Domain(format!("need x, alpha > 0, got ({x}, {alpha})")));
    }
    if (x - 1.0).abs() < 1e-9 {
        return Ok(1.0);
    }
    let lx = x.ln();
    if (alpha - 1.0).abs() < 1e-9 {
        return Ok((x - 1.0) / lx);
    }
    let num = (1.0 - alpha) * (lx / alpha).exp_m1();
    let den = ((1.0 - alpha) / alpha * lx).exp_m1();
    Ok(num / den)
}

/// f_{α,z}(x) = 1/ζ_{α,z}(x,1); operator monotone exactly when the α-z
/// information matrix obeys data processing.
pub fn operator_monotone_candidate(x: f64, p: RenyiParams) -> Result<f64> {
    if x <= 0.0 {
        return Err(Error::Domain(format!("need x > 0, got {x}")));
    }
    if (x - 1.0).abs() < 1e-9 {
        return Ok(1.0);
    }
    let (alpha, z) = (p.alpha, p.z);
    if (alpha - 1.0).abs() < ALPHA_ONE_TOL || z > Z_LIMIT {
        return Ok((x - 1.0) / x.ln());
    }
    let lx = x.ln();
    let num = alpha * (1.0 - alpha) / z * (x - 1.0) * (lx / z).exp_m1();
    let den = ((1.0 - alpha) / z * lx).exp_m1() * (alpha / z * lx).exp_m1();
    Ok(num / den)
}

/// Kernel label; selects the evaluation rule and tags outputs.
#[derive(Debug, Clone, PartialEq)]
pub enum KernelLabel {
    KuboMori,
    Rld,
    AlphaZ(RenyiParams),
    Petz { alpha: f64 },
    Sandwiched { alpha: f64 },
    Custom(String),
}

impl std::fmt::Display for KernelLabel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            KernelLabel::KuboMori => write!(f, "kubo_mori"),
            KernelLabel::Rld => write!(f, "rld"),
            KernelLabel::AlphaZ(p) => write!(f, "alpha_z(alpha={},z={})", p.alpha, p.z),
            KernelLabel::Petz { alpha } => write!(f, "petz(alpha={alpha})"),
            KernelLabel::Sandwiched { alpha } => write!(f, "sandwiched(alpha={alpha})"),
            KernelLabel::Custom(s) => write!(f, "custom({s})"),
        }
    }
}

/// Two-argument positive kernel ζ with its diagonal constant κ and the
/// associated f(t) = 1/ζ(t,1).
#[derive(Clone)]
pub struct ZetaKernel {
    label: KernelLabel,
    kappa: f64,
    eval: Arc<dyn Fn(f64, f64) -> f64 + Send + Sync>,
}

impl std::fmt::Debug for ZetaKernel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ZetaKernel({})", self.label)
    }
}

impl ZetaKernel {
    pub fn kubo_mori() -> Self {
        Self {
            label: KernelLabel::KuboMori,
            kappa: 1.0,
            eval: Arc::new(km_raw),
        }
    }

    pub fn rld() -> Self {
        Self {
            label: KernelLabel::Rld,
            kappa: 1.0,
            eval: Arc::new(rld_raw),
        }
    }

    pub fn alpha_z(p: RenyiParams) -> Self {
        Self {
            label: KernelLabel::AlphaZ(p),
            kappa: 1.0,
            eval: Arc::new(move |x, y| alpha_z_raw(x, y, p.alpha, p.z)),
        }
    }

    pub fn petz(alpha: f64) -> Self {
        Self {
            label: KernelLabel::Petz { alpha },
            kappa: 1.0,
            eval: Arc::new(move |x, y| petz_raw(x, y, alpha)),
        }
    }

    pub fn sandwiched(alpha: f64) -> Self {
        Self {
            label: KernelLabel::Sandwiched { alpha },
            kappa: 1.0,
            eval: Arc::new(move |x, y| sandwiched_raw(x, y, alpha)),
        }
    }

    pub fn custom(
        label: &str,
        kappa: f64,
        eval: impl Fn(f64, f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: KernelLabel::Custom(label.to_string()),
            kappa,
            eval: Arc::new(eval),
        }
    }

    /// Pointwise rescaled kernel c·ζ (diagonal constant becomes c·κ).
    pub fn scaled(&self, c: f64) -> Self {
        let inner = self.eval.clone();
        Self {
            label: KernelLabel::Custom(format!("{}*{c}", self.label)),
            kappa: self.kappa * c,
            eval: Arc::new(move |x, y| c * inner(x, y)),
        }
    }

    pub fn label(&self) -> &KernelLabel {
        &self.label
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Kernel value; arguments must be positive (states are validated
    /// upstream against their eigenvalue floor).
    pub fn eval(&self, x: f64, y: f64) -> f64 {
        debug_assert!(x > 0.0 && y > 0.0);
        (self.eval)(x, y)
    }

    /// f(t) = 1/ζ(t, 1).
    pub fn f_of_t(&self, t: f64) -> f64 {
        1.0 / self.eval(t, 1.0)
    }
}
