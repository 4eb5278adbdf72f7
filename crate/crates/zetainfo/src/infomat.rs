//! Information-matrix computation: the generic spectral ζ-engine, the
//! finite-difference Hessian oracle, classical Fisher, pure-state formula,
//! integral representations, and the classical-quantum decomposition.

use nalgebra::DMatrix;
use std::sync::Arc;

use crate::divergences::{self, RenyiParams};
use crate::families::{ClassicalQuantumFamily, ProbabilityFamily, PureStateFamily, StateFamily};
use crate::kernels::ZetaKernel;
use crate::matcore::{
    eig_hermitian, matrix_derivative, re_trace, HermitianOperator, ScalarFunction,
    DEFAULT_CLUSTER_TOL,
};
use crate::quad;
use crate::{Error, Result};

/// How an information matrix was obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize, serde::Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    Spectral,
    HessianFd,
    IntegralRep,
    ClosedFormThermal,
    ClosedFormTimeEvolved,
    PureState,
    Classical,
}

/// L x L real symmetric PSD matrix with provenance metadata.
#[derive(Debug, Clone)]
pub struct InfoMatrix {
    values: DMatrix<f64>,
    kernel_label: String,
    family_label: String,
    theta: Vec<f64>,
    method: Method,
}

impl InfoMatrix {
    /// Symmetrizes the input, then enforces the symmetry and PSD gates.
    /// Finite-difference products get a looser PSD tolerance to absorb
    /// second-difference roundoff.
    pub fn new(
        values: DMatrix<f64>,
        kernel_label: &str,
        family_label: &str,
        theta: &[f64],
        method: Method,
    ) -> Result<Self> {
        if values.nrows() != values.ncols() {
            return Err(Error::NotSquare {
                rows: values.nrows(),
                cols: values.ncols(),
            });
        }
        let asym = (&values - values.transpose()).amax();
        if asym > 1e-8 * values.amax().max(1.0) {
            return Err(Error::Numerical(format!(
                "information matrix asymmetry {asym:.3e}"
            )));
        }
        let sym = (&values + values.transpose()) * 0.5;
        let psd_tol = match method {
            Method::HessianFd => 1e-6,
            _ => 1e-8,
        } * sym.trace().abs().max(1.0);
        let min_eig = sym
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min);
        if min_eig < -psd_tol {
            return Err(Error::Numerical(format!(
                "information matrix not PSD (min eigenvalue {min_eig:.3e})"
            )));
        }
        Ok(Self {
            values: sym,
            kernel_label: kernel_label.to_string(),
            family_label: family_label.to_string(),
            theta: theta.to_vec(),
            method,
        })
    }

    pub fn values(&self) -> &DMatrix<f64> {
        &self.values
    }

    pub fn dim(&self) -> usize {
        self.values.nrows()
    }

    pub fn kernel_label(&self) -> &str {
        &self.kernel_label
    }

    pub fn family_label(&self) -> &str {
        &self.family_label
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn method(&self) -> Method {
        self.method
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.values
            .clone()
            .symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }

    /// Minimum eigenvalue of other - self (Loewner comparison).
    pub fn loewner_gap(&self, other: &InfoMatrix) -> f64 {
        let diff = other.values() - self.values();
        let sym = (&diff + diff.transpose()) * 0.5;
        sym.symmetric_eigen()
            .eigenvalues
            .iter()
            .cloned()
            .fold(f64::INFINITY, f64::min)
    }
}

/// Worst entrywise deviation of a from b in excess of the mixed
/// relative/absolute budget; nonpositive means every entry is within
/// max(rel*|b|, abs).
pub fn max_excess(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64, abs: f64) -> f64 {
    let mut worst = f64::NEG_INFINITY;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let dev = (a[(i, j)] - b[(i, j)]).abs();
            let budget = (rel * b[(i, j)].abs()).max(abs);
            worst = worst.max(dev - budget);
        }
    }
    worst
}

/// Worst entrywise relative deviation, with the absolute floor folded into
/// the denominator.
pub fn max_rel_deviation(a: &DMatrix<f64>, b: &DMatrix<f64>, rel: f64, abs: f64) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            let dev = (a[(i, j)] - b[(i, j)]).abs();
            worst = worst.max(dev / b[(i, j)].abs().max(abs / rel));
        }
    }
    worst
}

fn family_derivatives(family: &dyn StateFamily, theta: &[f64]) -> Result<Vec<HermitianOperator>> {
    (0..family.param_dim())
        .map(|i| family.derivative(theta, i))
        .collect()
}

fn info_from_pair_weight(
    family: &dyn StateFamily,
    theta: &[f64],
    weight: &dyn Fn(f64, f64) -> Result<f64>,
    kernel_label: &str,
    method: Method,
) -> Result<InfoMatrix> {
    let rho = family.state(theta)?;
    let s = eig_hermitian(&rho, DEFAULT_CLUSTER_TOL)?;
    let derivs = family_derivatives(family, theta)?;
    let l = derivs.len();
    let mut values = DMatrix::<f64>::zeros(l, l);
    for (lk, pk) in s.eigenvalues().iter().zip(s.projectors()) {
        for (ll, pl) in s.eigenvalues().iter().zip(s.projectors()) {
            let w = weight(*lk, *ll)?;
            for (i, di) in derivs.iter().enumerate() {
                let a = pk * di.matrix() * pl;
                for (j, dj) in derivs.iter().enumerate() {
                    values[(i, j)] += w * re_trace(&(&a * dj.matrix()));
                }
            }
        }
    }
    InfoMatrix::new(values, kernel_label, family.label(), theta, method)
}

/// The generic spectral engine:
/// [I]_{ij} = Σ_{k,ℓ} ζ(λ_k, λ_ℓ) Tr[Π_k (∂_iρ) Π_ℓ (∂_jρ)].
pub fn info_spectral(
    family: &dyn StateFamily,
    theta: &[f64],
    kernel: &ZetaKernel,
) -> Result<InfoMatrix> {
    info_from_pair_weight(
        family,
        theta,
        &|x, y| Ok(kernel.eval(x, y)),
        &kernel.label().to_string(),
        Method::Spectral,
    )
}

type DivEval = Arc<dyn Fn(&HermitianOperator, &HermitianOperator) -> Result<f64> + Send + Sync>;

/// A divergence tagged with the Hessian prefactor its information matrix
/// definition carries (1/α for the Rényi families, 1 for KM and BS).
#[derive(Clone)]
pub struct DivergenceSpec {
    label: String,
    prefactor: f64,
    eval: DivEval,
}

impl DivergenceSpec {
    pub fn new(
        label: &str,
        prefactor: f64,
        eval: impl Fn(&HermitianOperator, &HermitianOperator) -> Result<f64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.to_string(),
            prefactor,
            eval: Arc::new(eval),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn eval(&self, rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
        (self.eval)(rho, sigma)
    }

    pub fn prefactor(&self) -> f64 {
        self.prefactor
    }

    pub fn umegaki() -> Self {
        Self::new("umegaki", 1.0, divergences::umegaki)
    }

    pub fn alpha_z(p: RenyiParams) -> Self {
        Self::new(
            &format!("alpha_z(alpha={},z={})", p.alpha, p.z),
            1.0 / p.alpha,
            move |r, s| divergences::alpha_z_renyi(r, s, p),
        )
    }

    pub fn log_euclidean(alpha: f64) -> Self {
        Self::new(
            &format!("log_euclidean(alpha={alpha})"),
            1.0 / alpha,
            move |r, s| divergences::log_euclidean_renyi(r, s, alpha),
        )
    }

    pub fn geometric(alpha: f64) -> Self {
        Self::new(
            &format!("geometric(alpha={alpha})"),
            1.0 / alpha,
            move |r, s| divergences::geometric_renyi(r, s, alpha),
        )
    }

    pub fn belavkin_staszewski() -> Self {
        Self::new("belavkin_staszewski", 1.0, divergences::belavkin_staszewski)
    }

    pub fn petz(alpha: f64) -> Self {
        Self::new(&format!("petz(alpha={alpha})"), 1.0 / alpha, move |r, s| {
            divergences::petz_renyi(r, s, alpha)
        })
    }

    pub fn sandwiched(alpha: f64) -> Self {
        Self::new(
            &format!("sandwiched(alpha={alpha})"),
            1.0 / alpha,
            move |r, s| divergences::sandwiched_renyi(r, s, alpha),
        )
    }
}

/// Hessian step: 3e-4 * max(1, |theta|_inf).
pub fn hessian_step(theta: &[f64]) -> f64 {
    3e-4 * theta.iter().fold(1.0f64, |a, &t| a.max(t.abs()))
}

/// Finite-difference Hessian of ε ↦ prefactor · D(ρ(θ) ‖ ρ(θ+ε)) at ε = 0,
/// with the 4-point cross stencil for mixed partials.
pub fn info_hessian_oracle(
    family: &dyn StateFamily,
    theta: &[f64],
    div: &DivergenceSpec,
    step: Option<f64>,
) -> Result<InfoMatrix> {
    let h = step.unwrap_or_else(|| hessian_step(theta));
    let rho = family.state(theta)?;
    let l = family.param_dim();
    let at = |eps: &[f64]| -> Result<f64> {
        let shifted: Vec<f64> = theta.iter().zip(eps).map(|(t, e)| t + e).collect();
        div.eval(&rho, &family.state(&shifted)?)
    };
    let zero = vec![0.0; l];
    let g0 = at(&zero)?;
    let mut values = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        let mut e = zero.clone();
        e[i] = h;
        let gp = at(&e)?;
        e[i] = -h;
        let gm = at(&e)?;
        values[(i, i)] = div.prefactor() * (gp + gm - 2.0 * g0) / (h * h);
        for j in (i + 1)..l {
            let mut e = zero.clone();
            e[i] = h;
            e[j] = h;
            let gpp = at(&e)?;
            e[j] = -h;
            let gpm = at(&e)?;
            e[i] = -h;
            e[j] = h;
            let gmp = at(&e)?;
            e[j] = -h;
            let gmm = at(&e)?;
            let v = div.prefactor() * (gpp - gpm - gmp + gmm) / (4.0 * h * h);
            values[(i, j)] = v;
            values[(j, i)] = v;
        }
    }
    InfoMatrix::new(values, div.label(), family.label(), theta, Method::HessianFd)
}

/// Finite-difference gradient norm of ε ↦ D(ρ(θ)‖ρ(θ+ε)) at ε = 0; the
/// first-derivative-zero property makes this vanish for every (α, z).
pub fn divergence_gradient_norm(
    family: &dyn StateFamily,
    theta: &[f64],
    div: &DivergenceSpec,
    step: Option<f64>,
) -> Result<f64> {
    let h = step.unwrap_or_else(|| hessian_step(theta));
    let rho = family.state(theta)?;
    let l = family.param_dim();
    let mut sq = 0.0;
    for i in 0..l {
        let mut plus = theta.to_vec();
        plus[i] += h;
        let mut minus = theta.to_vec();
        minus[i] -= h;
        let g = (div.eval(&rho, &family.state(&plus)?)? - div.eval(&rho, &family.state(&minus)?)?)
            / (2.0 * h);
        sq += g * g;
    }
    Ok(sq.sqrt())
}

/// Kubo-Mori information matrix (spectral path).
pub fn info_kubo_mori(family: &dyn StateFamily, theta: &[f64]) -> Result<InfoMatrix> {
    info_spectral(family, theta, &ZetaKernel::kubo_mori())
}

/// The three equivalent Kubo-Mori expressions: Tr[(∂_iρ)(∂_j ln ρ)], the
/// resolvent double integral, and the divided-difference spectral sum.
pub fn info_kubo_mori_paths(
    family: &dyn StateFamily,
    theta: &[f64],
) -> Result<(InfoMatrix, InfoMatrix, InfoMatrix)> {
    let rho = family.state(theta)?;
    let s = eig_hermitian(&rho, DEFAULT_CLUSTER_TOL)?;
    let derivs = family_derivatives(family, theta)?;
    let l = derivs.len();

    let mut trace_form = DMatrix::<f64>::zeros(l, l);
    let dlog: Vec<HermitianOperator> = derivs
        .iter()
        .map(|d| matrix_derivative(&s, d, &ScalarFunction::ln()))
        .collect::<Result<_>>()?;
    for i in 0..l {
        for j in 0..l {
            trace_form[(i, j)] = re_trace(&(derivs[i].matrix() * dlog[j].matrix()));
        }
    }
    let trace_form = InfoMatrix::new(trace_form, "kubo_mori", family.label(), theta, Method::Spectral)?;

    let resolvent = info_from_pair_weight(
        family,
        theta,
        &|x, y| quad::integrate_half_line(|t| 1.0 / ((x + t) * (y + t)), 1e-10),
        "kubo_mori",
        Method::IntegralRep,
    )?;

    let spectral = info_kubo_mori(family, theta)?;
    Ok((trace_form, resolvent, spectral))
}

/// RLD information matrix ½Tr[{∂_iρ, ∂_jρ} ρ^{-1}].
pub fn info_rld(family: &dyn StateFamily, theta: &[f64]) -> Result<InfoMatrix> {
    let rho = family.state(theta)?;
    let s = eig_hermitian(&rho, DEFAULT_CLUSTER_TOL)?;
    let rho_inv = s.map_eigenvalues(|lam| 1.0 / lam);
    let derivs = family_derivatives(family, theta)?;
    let l = derivs.len();
    let mut values = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            values[(i, j)] = re_trace(&(derivs[i].matrix() * derivs[j].matrix() * &rho_inv));
        }
    }
    InfoMatrix::new(values, "rld", family.label(), theta, Method::Spectral)
}

/// Petz information matrix through its double-integral representation,
/// reduced per spectral pair to products of one-dimensional resolvent
/// integrals.
pub fn info_petz_integral(
    family: &dyn StateFamily,
    theta: &[f64],
    alpha: f64,
) -> Result<InfoMatrix> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "integral representation needs alpha in (0,1), got {alpha}"
        )));
    }
    let pi = std::f64::consts::PI;
    let pref = (alpha * pi).sin().powi(2) / (alpha * (1.0 - alpha) * pi * pi);
    let pair_integral = |x: f64, y: f64, r: f64| -> Result<f64> {
        quad::integrate_half_line(|t| t.powf(r) / ((x + t) * (y + t)), 1e-10)
    };
    info_from_pair_weight(
        family,
        theta,
        &|x, y| Ok(pref * pair_integral(x, y, alpha)? * pair_integral(x, y, 1.0 - alpha)?),
        &format!("petz(alpha={alpha})"),
        Method::IntegralRep,
    )
}

/// Sandwiched information matrix through its single-integral
/// representation with resolvents of ρ^{1/α}.
pub fn info_sandwiched_integral(
    family: &dyn StateFamily,
    theta: &[f64],
    alpha: f64,
) -> Result<InfoMatrix> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "integral representation needs alpha in (0,1), got {alpha}"
        )));
    }
    let pi = std::f64::consts::PI;
    let pref = ((1.0 - alpha) * pi).sin() / ((1.0 - alpha) * pi);
    info_from_pair_weight(
        family,
        theta,
        &|x, y| {
            let xp = x.powf(1.0 / alpha);
            let yp = y.powf(1.0 / alpha);
            Ok(pref
                * quad::integrate_half_line(
                    |t| t.powf(1.0 - alpha) / ((xp + t) * (yp + t)),
                    1e-10,
                )?)
        },
        &format!("sandwiched(alpha={alpha})"),
        Method::IntegralRep,
    )
}

/// Pure-state α-z information matrix
/// (2z/(α(1−α))) Re⟨∂_iψ|(I − |ψ⟩⟨ψ|)|∂_jψ⟩.
pub fn info_pure_state(
    family: &PureStateFamily,
    theta: &[f64],
    p: RenyiParams,
) -> Result<InfoMatrix> {
    if !(0.0 < p.alpha && p.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "pure-state formula needs alpha in (0,1), got {}",
            p.alpha
        )));
    }
    let pref = 2.0 * p.z / (p.alpha * (1.0 - p.alpha));
    let psi = family.psi(theta)?;
    let l = family.param_dim();
    let mut values = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        let di = family.dpsi(theta, i);
        for j in 0..l {
            let dj = family.dpsi(theta, j);
            let direct = (di.adjoint() * &dj)[(0, 0)];
            let oi = (psi.adjoint() * &di)[(0, 0)];
            let oj = (psi.adjoint() * &dj)[(0, 0)];
            values[(i, j)] = pref * (direct - oi.conj() * oj).re;
        }
    }
    InfoMatrix::new(
        values,
        &format!("pure_alpha_z(alpha={},z={})", p.alpha, p.z),
        family.label(),
        theta,
        Method::PureState,
    )
}

/// Classical Fisher information matrix of a probability family.
pub fn info_classical(family: &ProbabilityFamily, theta: &[f64]) -> Result<InfoMatrix> {
    let p = family.probs(theta)?;
    let l = family.param_dim();
    let grads: Vec<Vec<f64>> = (0..l)
        .map(|i| family.derivative(theta, i))
        .collect::<Result<_>>()?;
    let mut values = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            values[(i, j)] = p
                .iter()
                .enumerate()
                .map(|(x, &px)| grads[i][x] * grads[j][x] / px)
                .sum();
        }
    }
    InfoMatrix::new(values, "classical_fisher", family.label(), theta, Method::Classical)
}

/// Classical-quantum decomposition
/// I = I_F(p_θ) + Σ_x p_θ(x) I(ρ_x(θ)).
pub fn info_cq_decomposed(
    family: &ClassicalQuantumFamily,
    theta: &[f64],
    kernel: &ZetaKernel,
) -> Result<InfoMatrix> {
    let classical = info_classical(family.weights(), theta)?;
    let p = family.weights().probs(theta)?;
    let mut values = classical.values().clone();
    for (px, branch) in p.iter().zip(family.branches()) {
        let ib = info_spectral(branch.as_ref(), theta, kernel)?;
        values += ib.values() * *px;
    }
    InfoMatrix::new(
        values,
        &kernel.label().to_string(),
        family.label(),
        theta,
        Method::Spectral,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::families::{
        pauli_x, pauli_z, random_theta, random_thermal_family, ExplicitFamily, ProductFamily,
    };
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;
    use std::sync::Arc;

    fn bloch_z() -> ExplicitFamily {
        ExplicitFamily::new("bloch_z", 2, 1, |t| {
            Ok(HermitianOperator::from_diag(&[
                0.5 * (1.0 + t[0]),
                0.5 * (1.0 - t[0]),
            ]))
        })
    }

    fn bloch_x() -> ExplicitFamily {
        ExplicitFamily::new("bloch_x", 2, 1, |t| {
            let m = HermitianOperator::identity(2)
                .scale(0.5)
                .add(&pauli_x().scale(0.5 * t[0]));
            Ok(m)
        })
    }

    fn classical_diag() -> ExplicitFamily {
        ExplicitFamily::new("diag", 2, 1, |t| {
            Ok(HermitianOperator::from_diag(&[t[0], 1.0 - t[0]]))
        })
    }

    #[test]
    fn spectral_classical_reduction() {
        for kernel in [
            ZetaKernel::kubo_mori(),
            ZetaKernel::rld(),
            ZetaKernel::alpha_z(RenyiParams::new(0.3, 0.6).unwrap()),
            ZetaKernel::petz(0.7),
            ZetaKernel::sandwiched(2.0),
        ] {
            let i = info_spectral(&classical_diag(), &[0.5], &kernel).unwrap();
            assert!(
                (i.values()[(0, 0)] - 4.0).abs() < 1e-8,
                "{:?}: {}",
                kernel.label(),
                i.values()[(0, 0)]
            );
        }
    }

    #[test]
    fn bloch_reference_points() {
        let km = info_spectral(&bloch_z(), &[0.0], &ZetaKernel::kubo_mori()).unwrap();
        assert!((km.values()[(0, 0)] - 1.0).abs() < 1e-8);
        let rld = info_rld(&bloch_x(), &[0.0]).unwrap();
        assert!((rld.values()[(0, 0)] - 1.0).abs() < 1e-8);
        // commuting closed form 1/(1 - theta^2)
        let km2 = info_spectral(&bloch_z(), &[0.6], &ZetaKernel::kubo_mori()).unwrap();
        assert!((km2.values()[(0, 0)] - 1.0 / (1.0 - 0.36)).abs() < 1e-8);
    }

    #[test]
    fn hessian_oracle_matches_spectral_alpha_z() {
        let mut rng = ChaCha8Rng::seed_from_u64(71);
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        for (alpha, z) in [(0.5, 1.0), (2.0, 2.0)] {
            let p = RenyiParams::new(alpha, z).unwrap();
            let spec = info_spectral(&fam, &theta, &ZetaKernel::alpha_z(p)).unwrap();
            let hess = info_hessian_oracle(&fam, &theta, &DivergenceSpec::alpha_z(p), None).unwrap();
            let excess = max_excess(hess.values(), spec.values(), 1e-3, 1e-6);
            assert!(excess <= 0.0, "alpha={alpha}, z={z}: excess {excess}");
        }
    }

    #[test]
    fn first_derivative_vanishes() {
        let mut rng = ChaCha8Rng::seed_from_u64(72);
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        for (alpha, z) in [(0.5, 0.5), (2.0, 1.0)] {
            let p = RenyiParams::new(alpha, z).unwrap();
            let g = divergence_gradient_norm(&fam, &theta, &DivergenceSpec::alpha_z(p), None).unwrap();
            assert!(g < 1e-6, "gradient {g} at alpha={alpha}, z={z}");
        }
    }

    #[test]
    fn kubo_mori_three_paths() {
        let mut rng = ChaCha8Rng::seed_from_u64(73);
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        let (tf, res, spec) = info_kubo_mori_paths(&fam, &theta).unwrap();
        assert!(max_excess(tf.values(), spec.values(), 0.0, 1e-8) <= 0.0);
        assert!(max_excess(res.values(), spec.values(), 0.0, 1e-8) <= 0.0);
    }

    #[test]
    fn rld_matches_kernel_and_dominates_km() {
        let mut rng = ChaCha8Rng::seed_from_u64(74);
        for _ in 0..5 {
            let fam = random_thermal_family(3, 2, &mut rng);
            let theta = random_theta(2, &mut rng);
            let direct = info_rld(&fam, &theta).unwrap();
            let spectral = info_spectral(&fam, &theta, &ZetaKernel::rld()).unwrap();
            assert!(max_excess(direct.values(), spectral.values(), 0.0, 1e-10) <= 0.0);
            let km = info_kubo_mori(&fam, &theta).unwrap();
            assert!(km.loewner_gap(&direct) >= -1e-9, "KM not below RLD");
        }
    }

    #[test]
    fn integral_representations_match_spectral() {
        let mut rng = ChaCha8Rng::seed_from_u64(75);
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        for alpha in [0.3, 0.7] {
            let petz_int = info_petz_integral(&fam, &theta, alpha).unwrap();
            let petz_spec = info_spectral(&fam, &theta, &ZetaKernel::petz(alpha)).unwrap();
            assert!(
                max_excess(petz_int.values(), petz_spec.values(), 0.0, 1e-6) <= 0.0,
                "petz alpha={alpha}"
            );
            let sand_int = info_sandwiched_integral(&fam, &theta, alpha).unwrap();
            let sand_spec = info_spectral(&fam, &theta, &ZetaKernel::sandwiched(alpha)).unwrap();
            assert!(
                max_excess(sand_int.values(), sand_spec.values(), 0.0, 1e-6) <= 0.0,
                "sandwiched alpha={alpha}"
            );
        }
    }

    #[test]
    fn pure_state_circle() {
        use nalgebra::DVector;
        use num_complex::Complex64;
        let fam = PureStateFamily::new(
            "circle",
            2,
            1,
            |t| {
                DVector::from_vec(vec![
                    Complex64::new(t[0].cos(), 0.0),
                    Complex64::new(t[0].sin(), 0.0),
                ])
            },
            |t, _| {
                DVector::from_vec(vec![
                    Complex64::new(-t[0].sin(), 0.0),
                    Complex64::new(t[0].cos(), 0.0),
                ])
            },
        );
        let p = RenyiParams::new(0.5, 0.5).unwrap();
        let i = info_pure_state(&fam, &[0.3], p).unwrap();
        assert!((i.values()[(0, 0)] - 4.0).abs() < 1e-12);
        let p2 = RenyiParams::new(0.5, 1.0).unwrap();
        let i2 = info_pure_state(&fam, &[0.3], p2).unwrap();
        assert!((i2.values()[(0, 0)] - 8.0).abs() < 1e-12);
        // global phase family has zero information
        let phase = PureStateFamily::new(
            "phase",
            2,
            1,
            |t| {
                DVector::from_vec(vec![
                    Complex64::new(0.0, t[0]).exp() * Complex64::new(1.0, 0.0),
                    Complex64::new(0.0, 0.0),
                ])
            },
            |t, _| {
                DVector::from_vec(vec![
                    Complex64::new(0.0, t[0]).exp() * Complex64::new(0.0, 1.0),
                    Complex64::new(0.0, 0.0),
                ])
            },
        );
        let ip = info_pure_state(&phase, &[0.2], p).unwrap();
        assert!(ip.values()[(0, 0)].abs() < 1e-12);
    }

    #[test]
    fn classical_fisher_values() {
        let b = ProbabilityFamily::bernoulli();
        let i = info_classical(&b, &[0.5]).unwrap();
        assert!((i.values()[(0, 0)] - 4.0).abs() < 1e-10);
    }

    #[test]
    fn additivity_on_products() {
        let mut rng = ChaCha8Rng::seed_from_u64(76);
        let a = Arc::new(random_thermal_family(2, 2, &mut rng));
        let b = Arc::new(random_thermal_family(2, 2, &mut rng));
        let prod = ProductFamily::new("prod", a.clone(), b.clone()).unwrap();
        let theta = random_theta(2, &mut rng);
        let kernel = ZetaKernel::alpha_z(RenyiParams::new(0.5, 1.0).unwrap());
        let ia = info_spectral(a.as_ref(), &theta, &kernel).unwrap();
        let ib = info_spectral(b.as_ref(), &theta, &kernel).unwrap();
        let ip = info_spectral(&prod, &theta, &kernel).unwrap();
        let sum = ia.values() + ib.values();
        assert!(max_excess(ip.values(), &sum, 0.0, 1e-8) <= 0.0);
    }

    #[test]
    fn sigma_z_thermal_curve() {
        let fam = crate::families::ThermalFamily::new("qbm_z", vec![pauli_z()]).unwrap();
        for t in [0.0, 0.4, -0.8] {
            let i = info_kubo_mori(&fam, &[t]).unwrap();
            let expect = 1.0 - t.tanh().powi(2);
            assert!((i.values()[(0, 0)] - expect).abs() < 1e-10, "theta={t}");
        }
    }
}
