//! Parameterized state families θ ↦ ρ(θ) with analytic or finite-difference
//! derivatives: explicit, thermal, time-evolved, pure, classical-quantum,
//! plus product and channel-pushforward combinators.

use nalgebra::DVector;
use num_complex::Complex64;
use rand::Rng;
use std::sync::Arc;

use crate::divergences::QuantumChannel;
use crate::matcore::{
    eig_hermitian, re_trace, spectral_pair_map, CMatrix, HermitianOperator, DEFAULT_CLUSTER_TOL,
};
use crate::{Error, Result};

pub const DEFAULT_MIN_EIG_FLOOR: f64 = 1e-10;

/// First-derivative step: 1e-5 * max(1, |theta|_inf).
pub fn fd_step(theta: &[f64]) -> f64 {
    1e-5 * theta.iter().fold(1.0f64, |a, &t| a.max(t.abs()))
}

/// A parameterized family of positive definite, trace-one states.
pub trait StateFamily: Send + Sync {
    fn label(&self) -> &str;
    fn kind(&self) -> &'static str;
    fn param_dim(&self) -> usize;
    fn dim(&self) -> usize;

    fn min_eig_floor(&self) -> f64 {
        DEFAULT_MIN_EIG_FLOOR
    }

    /// Raw evaluation, before the positivity/trace gate.
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator>;

    /// Validated state: trace 1 within 1e-10 and min eigenvalue at or above
    /// the family floor. Families below the floor are rejected, never
    /// regularized.
    fn state(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let rho = self.state_unchecked(theta)?;
        validate_state(&rho, self.min_eig_floor())?;
        Ok(rho)
    }

    /// Parameter derivative; default path is the centered finite difference.
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        let h = fd_step(theta);
        derivative_fd_impl(
            &|t| {
                let rho = self.state_unchecked(t)?;
                validate_state(&rho, self.min_eig_floor())?;
                Ok(rho)
            },
            theta,
            i,
            h,
        )
    }
}

pub fn validate_state(rho: &HermitianOperator, floor: f64) -> Result<()> {
    let tr = rho.trace();
    if (tr - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidState(format!("trace {tr} is not 1")));
    }
    let s = eig_hermitian(rho, DEFAULT_CLUSTER_TOL)?;
    let min = s.min_eigenvalue();
    if min < floor {
        return Err(Error::InvalidState(format!(
            "minimum eigenvalue {min:.3e} below floor {floor:.3e}"
        )));
    }
    Ok(())
}

fn derivative_fd_impl(
    eval: &dyn Fn(&[f64]) -> Result<HermitianOperator>,
    theta: &[f64],
    i: usize,
    h: f64,
) -> Result<HermitianOperator> {
    if i >= theta.len() {
        return Err(Error::InvalidParameter(format!(
            "derivative index {i} out of range for {} parameters",
            theta.len()
        )));
    }
    let mut plus = theta.to_vec();
    plus[i] += h;
    let mut minus = theta.to_vec();
    minus[i] -= h;
    let diff = (eval(&plus)?.into_matrix() - eval(&minus)?.into_matrix())
        / Complex64::new(2.0 * h, 0.0);
    HermitianOperator::symmetrized(diff)
}

/// Centered finite-difference derivative of any family.
pub fn family_derivative_fd(
    family: &dyn StateFamily,
    theta: &[f64],
    i: usize,
    h: f64,
) -> Result<HermitianOperator> {
    derivative_fd_impl(&|t| family.state(t), theta, i, h)
}

type StateEval = Arc<dyn Fn(&[f64]) -> Result<HermitianOperator> + Send + Sync>;
type StateDeriv = Arc<dyn Fn(&[f64], usize) -> Result<HermitianOperator> + Send + Sync>;

/// Family given by closures, with an optional analytic derivative.
#[derive(Clone)]
pub struct ExplicitFamily {
    label: String,
    dim: usize,
    param_dim: usize,
    min_eig_floor: f64,
    eval: StateEval,
    deriv: Option<StateDeriv>,
}

impl ExplicitFamily {
    pub fn new(
        label: &str,
        dim: usize,
        param_dim: usize,
        eval: impl Fn(&[f64]) -> Result<HermitianOperator> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.to_string(),
            dim,
            param_dim,
            min_eig_floor: DEFAULT_MIN_EIG_FLOOR,
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&[f64], usize) -> Result<HermitianOperator> + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    pub fn with_min_eig_floor(mut self, floor: f64) -> Self {
        self.min_eig_floor = floor;
        self
    }
}

impl StateFamily for ExplicitFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "explicit"
    }
    fn param_dim(&self) -> usize {
        self.param_dim
    }
    fn dim(&self) -> usize {
        self.dim
    }
    fn min_eig_floor(&self) -> f64 {
        self.min_eig_floor
    }
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator> {
        if theta.len() != self.param_dim {
            return Err(Error::DimensionMismatch {
                expected: self.param_dim,
                got: theta.len(),
            });
        }
        (self.eval)(theta)
    }
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        match &self.deriv {
            Some(d) => d(theta, i),
            None => family_derivative_fd(self, theta, i, fd_step(theta)),
        }
    }
}

/// Thermal (Gibbs) family ρ(θ) = e^{−H(θ)}/Z(θ) with
/// H(θ) = H_0 + Σ θ_j H_j.
#[derive(Clone)]
pub struct ThermalFamily {
    label: String,
    base: HermitianOperator,
    generators: Vec<HermitianOperator>,
}

impl ThermalFamily {
    pub fn new(label: &str, generators: Vec<HermitianOperator>) -> Result<Self> {
        let d = generators
            .first()
            .ok_or_else(|| Error::InvalidParameter("thermal family needs generators".into()))?
            .dim();
        Self::with_base(label, HermitianOperator::zeros(d), generators)
    }

    pub fn with_base(
        label: &str,
        base: HermitianOperator,
        generators: Vec<HermitianOperator>,
    ) -> Result<Self> {
        let d = base.dim();
        for g in &generators {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: g.dim(),
                });
            }
        }
        Ok(Self {
            label: label.to_string(),
            base,
            generators,
        })
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn hamiltonian(&self, theta: &[f64]) -> Result<HermitianOperator> {
        if theta.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                got: theta.len(),
            });
        }
        let mut h = self.base.clone();
        for (t, g) in theta.iter().zip(&self.generators) {
            h = h.add(&g.scale(*t));
        }
        Ok(h)
    }

    /// Analytic derivative: −∫₀¹ ρ^t H_i ρ^{1−t} dt + ρ⟨H_i⟩, with the
    /// integral evaluated spectrally through the exp divided difference.
    pub fn state_derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        let rho = self.state(theta)?;
        let s = eig_hermitian(&rho, DEFAULT_CLUSTER_TOL)?;
        let hi = &self.generators[i];
        let term1 = spectral_pair_map(&s, hi.matrix(), |x, y| {
            // (x - y)/(ln x - ln y), the geometric-mean-like weight
            let c = if (x - y).abs() <= DEFAULT_CLUSTER_TOL * x.max(y) {
                0.5 * (x + y)
            } else {
                (x - y) / crate::matcore::log_ratio(x, y)
            };
            Complex64::new(c, 0.0)
        });
        let mean = re_trace(&(rho.matrix() * hi.matrix()));
        HermitianOperator::symmetrized(rho.matrix() * Complex64::new(mean, 0.0) - term1)
    }
}

impl StateFamily for ThermalFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "thermal"
    }
    fn param_dim(&self) -> usize {
        self.generators.len()
    }
    fn dim(&self) -> usize {
        self.base.dim()
    }
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let h = self.hamiltonian(theta)?;
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL)?;
        // shift by the minimum eigenvalue before exponentiating
        let mu0 = s.min_eigenvalue();
        let unnorm = s.map_eigenvalues(|mu| (-(mu - mu0)).exp());
        let z = re_trace(&unnorm);
        if !(z.is_finite() && z > 0.0) {
            return Err(Error::Numerical(format!("partition function {z}")));
        }
        HermitianOperator::symmetrized(unnorm / Complex64::new(z, 0.0))
    }
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        self.state_derivative(theta, i)
    }
}

/// Unitary-orbit family σ(φ) = e^{−iH(φ)} ρ e^{iH(φ)} with base state
/// ρ = e^{−G}/Tr e^{−G}.
#[derive(Clone)]
pub struct TimeEvolvedFamily {
    label: String,
    base_generator: HermitianOperator,
    generators: Vec<HermitianOperator>,
}

impl TimeEvolvedFamily {
    pub fn new(
        label: &str,
        base_generator: HermitianOperator,
        generators: Vec<HermitianOperator>,
    ) -> Result<Self> {
        let d = base_generator.dim();
        for g in &generators {
            if g.dim() != d {
                return Err(Error::DimensionMismatch {
                    expected: d,
                    got: g.dim(),
                });
            }
        }
        Ok(Self {
            label: label.to_string(),
            base_generator,
            generators,
        })
    }

    pub fn base_generator(&self) -> &HermitianOperator {
        &self.base_generator
    }

    pub fn generators(&self) -> &[HermitianOperator] {
        &self.generators
    }

    pub fn base_state(&self) -> Result<HermitianOperator> {
        let s = eig_hermitian(&self.base_generator, DEFAULT_CLUSTER_TOL)?;
        let mu0 = s.min_eigenvalue();
        let unnorm = s.map_eigenvalues(|mu| (-(mu - mu0)).exp());
        let z = re_trace(&unnorm);
        HermitianOperator::symmetrized(unnorm / Complex64::new(z, 0.0))
    }

    pub fn hamiltonian(&self, phi: &[f64]) -> Result<HermitianOperator> {
        if phi.len() != self.generators.len() {
            return Err(Error::DimensionMismatch {
                expected: self.generators.len(),
                got: phi.len(),
            });
        }
        let mut h = HermitianOperator::zeros(self.dim());
        for (t, g) in phi.iter().zip(&self.generators) {
            h = h.add(&g.scale(*t));
        }
        Ok(h)
    }

    /// Adjoint averaged-evolution map Ψ_φ†(X), spectral coefficient
    /// (1 − e^{−iν})/(iν) at H(φ)-gap ν.
    pub fn psi_dagger(&self, phi: &[f64], x: &HermitianOperator) -> Result<HermitianOperator> {
        let h = self.hamiltonian(phi)?;
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL)?;
        let m = spectral_pair_map(&s, x.matrix(), |mk, ml| psi_coefficient(mk - ml).conj());
        HermitianOperator::symmetrized(m)
    }

    /// Analytic derivative ∂_i σ(φ) = i[σ(φ), Ψ_φ†(H_i)].
    pub fn state_derivative(&self, phi: &[f64], i: usize) -> Result<HermitianOperator> {
        let sigma = self.state(phi)?;
        let psi = self.psi_dagger(phi, &self.generators[i])?;
        let comm = sigma.matrix() * psi.matrix() - psi.matrix() * sigma.matrix();
        HermitianOperator::symmetrized(comm * Complex64::new(0.0, 1.0))
    }
}

/// Coefficient of Ψ_φ at gap ν: (e^{iν} − 1)/(iν), limit 1 at ν = 0.
pub fn psi_coefficient(nu: f64) -> Complex64 {
    if nu.abs() < 1e-8 {
        Complex64::new(1.0, 0.5 * nu)
    } else {
        (Complex64::new(0.0, nu).exp() - Complex64::new(1.0, 0.0)) / Complex64::new(0.0, nu)
    }
}

impl StateFamily for TimeEvolvedFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "time_evolved"
    }
    fn param_dim(&self) -> usize {
        self.generators.len()
    }
    fn dim(&self) -> usize {
        self.base_generator.dim()
    }
    fn state_unchecked(&self, phi: &[f64]) -> Result<HermitianOperator> {
        let rho = self.base_state()?;
        let h = self.hamiltonian(phi)?;
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL)?;
        let mut u = CMatrix::zeros(self.dim(), self.dim());
        for (mu, p) in s.eigenvalues().iter().zip(s.projectors()) {
            u += p * Complex64::new(0.0, -mu).exp();
        }
        HermitianOperator::symmetrized(&u * rho.matrix() * u.adjoint())
    }
    fn derivative(&self, phi: &[f64], i: usize) -> Result<HermitianOperator> {
        self.state_derivative(phi, i)
    }
}

type AmplitudeEval = Arc<dyn Fn(&[f64]) -> DVector<Complex64> + Send + Sync>;
type TangentEval = Arc<dyn Fn(&[f64], usize) -> DVector<Complex64> + Send + Sync>;

/// Family of unit vectors |ψ(θ)⟩ with analytic tangents |∂_iψ⟩.
#[derive(Clone)]
pub struct PureStateFamily {
    label: String,
    dim: usize,
    param_dim: usize,
    amplitude: AmplitudeEval,
    tangent: TangentEval,
}

impl PureStateFamily {
    pub fn new(
        label: &str,
        dim: usize,
        param_dim: usize,
        amplitude: impl Fn(&[f64]) -> DVector<Complex64> + Send + Sync + 'static,
        tangent: impl Fn(&[f64], usize) -> DVector<Complex64> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.to_string(),
            dim,
            param_dim,
            amplitude: Arc::new(amplitude),
            tangent: Arc::new(tangent),
        }
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    /// Validated amplitude: unit norm and Re⟨ψ|∂_iψ⟩ = 0.
    pub fn psi(&self, theta: &[f64]) -> Result<DVector<Complex64>> {
        let v = (self.amplitude)(theta);
        let n = v.norm();
        if (n - 1.0).abs() > 1e-10 {
            return Err(Error::InvalidState(format!("amplitude norm {n} is not 1")));
        }
        for i in 0..self.param_dim {
            let t = (self.tangent)(theta, i);
            let overlap = (v.adjoint() * &t)[(0, 0)];
            if overlap.re.abs() > 1e-8 {
                return Err(Error::InvalidState(format!(
                    "Re<psi|d_{i} psi> = {} is not 0",
                    overlap.re
                )));
            }
        }
        Ok(v)
    }

    pub fn dpsi(&self, theta: &[f64], i: usize) -> DVector<Complex64> {
        (self.tangent)(theta, i)
    }

    /// Mixed-state lift (1−ε)|ψ⟩⟨ψ| + ε I/d with analytic derivatives.
    pub fn lift(&self, epsilon: f64) -> ExplicitFamily {
        let this = self.clone();
        let d = self.dim;
        let eval = {
            let this = this.clone();
            move |theta: &[f64]| {
                let v = this.psi(theta)?;
                let proj = &v * v.adjoint();
                let m = proj * Complex64::new(1.0 - epsilon, 0.0)
                    + CMatrix::identity(d, d) * Complex64::new(epsilon / d as f64, 0.0);
                HermitianOperator::symmetrized(m)
            }
        };
        let deriv = move |theta: &[f64], i: usize| {
            let v = this.psi(theta)?;
            let dv = this.dpsi(theta, i);
            let m = (&dv * v.adjoint() + &v * dv.adjoint()) * Complex64::new(1.0 - epsilon, 0.0);
            HermitianOperator::symmetrized(m)
        };
        ExplicitFamily::new(
            &format!("{}_lifted", self.label),
            d,
            self.param_dim,
            eval,
        )
        .with_derivative(deriv)
        .with_min_eig_floor(0.99 * epsilon / d as f64)
    }
}

type ProbEval = Arc<dyn Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync>;
type ProbDeriv = Arc<dyn Fn(&[f64], usize) -> Result<Vec<f64>> + Send + Sync>;

/// Parameterized probability vector on a finite alphabet, interior of the
/// simplex.
#[derive(Clone)]
pub struct ProbabilityFamily {
    label: String,
    alphabet: usize,
    param_dim: usize,
    eval: ProbEval,
    deriv: Option<ProbDeriv>,
}

impl ProbabilityFamily {
    pub fn new(
        label: &str,
        alphabet: usize,
        param_dim: usize,
        eval: impl Fn(&[f64]) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.to_string(),
            alphabet,
            param_dim,
            eval: Arc::new(eval),
            deriv: None,
        }
    }

    pub fn with_derivative(
        mut self,
        deriv: impl Fn(&[f64], usize) -> Result<Vec<f64>> + Send + Sync + 'static,
    ) -> Self {
        self.deriv = Some(Arc::new(deriv));
        self
    }

    /// Bernoulli family p(θ) = (θ, 1−θ) on θ ∈ (0,1).
    pub fn bernoulli() -> Self {
        Self::new("bernoulli", 2, 1, |theta| {
            let t = theta[0];
            if !(0.0..=1.0).contains(&t) || t == 0.0 || t == 1.0 {
                return Err(Error::InvalidParameter(format!(
                    "bernoulli parameter {t} outside (0,1)"
                )));
            }
            Ok(vec![t, 1.0 - t])
        })
        .with_derivative(|_, _| Ok(vec![1.0, -1.0]))
    }

    /// Softmax family on an alphabet of the given size, with L = size − 1
    /// logits (last logit pinned to zero).
    pub fn softmax(alphabet: usize) -> Self {
        let l = alphabet - 1;
        Self::new("softmax", alphabet, l, move |theta| {
            let mut w: Vec<f64> = theta.iter().map(|&t| t.exp()).collect();
            w.push(1.0);
            let z: f64 = w.iter().sum();
            Ok(w.into_iter().map(|x| x / z).collect())
        })
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn alphabet(&self) -> usize {
        self.alphabet
    }

    pub fn param_dim(&self) -> usize {
        self.param_dim
    }

    pub fn probs(&self, theta: &[f64]) -> Result<Vec<f64>> {
        let p = (self.eval)(theta)?;
        if p.len() != self.alphabet {
            return Err(Error::DimensionMismatch {
                expected: self.alphabet,
                got: p.len(),
            });
        }
        let sum: f64 = p.iter().sum();
        if (sum - 1.0).abs() > 1e-12 || p.iter().any(|&x| x <= 0.0) {
            return Err(Error::InvalidState(format!(
                "probability vector outside the simplex interior (sum {sum})"
            )));
        }
        Ok(p)
    }

    pub fn derivative(&self, theta: &[f64], i: usize) -> Result<Vec<f64>> {
        if let Some(d) = &self.deriv {
            return d(theta, i);
        }
        let h = fd_step(theta);
        let mut plus = theta.to_vec();
        plus[i] += h;
        let mut minus = theta.to_vec();
        minus[i] -= h;
        let pp = self.probs(&plus)?;
        let pm = self.probs(&minus)?;
        Ok(pp
            .iter()
            .zip(&pm)
            .map(|(a, b)| (a - b) / (2.0 * h))
            .collect())
    }
}

/// Classical-quantum family ρ_XA(θ) = Σ_x p_θ(x) |x⟩⟨x| ⊗ ρ_x(θ),
/// represented block-diagonally.
pub struct ClassicalQuantumFamily {
    label: String,
    weights: ProbabilityFamily,
    branches: Vec<Arc<dyn StateFamily>>,
}

impl ClassicalQuantumFamily {
    pub fn new(
        label: &str,
        weights: ProbabilityFamily,
        branches: Vec<Arc<dyn StateFamily>>,
    ) -> Result<Self> {
        if weights.alphabet() != branches.len() {
            return Err(Error::DimensionMismatch {
                expected: weights.alphabet(),
                got: branches.len(),
            });
        }
        let l = weights.param_dim();
        for b in &branches {
            if b.param_dim() != l {
                return Err(Error::InvalidParameter(
                    "all cq branches must share the parameter dimension of the weights".into(),
                ));
            }
        }
        Ok(Self {
            label: label.to_string(),
            weights,
            branches,
        })
    }

    pub fn weights(&self) -> &ProbabilityFamily {
        &self.weights
    }

    pub fn branches(&self) -> &[Arc<dyn StateFamily>] {
        &self.branches
    }
}

impl StateFamily for ClassicalQuantumFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "classical_quantum"
    }
    fn param_dim(&self) -> usize {
        self.weights.param_dim()
    }
    fn dim(&self) -> usize {
        self.branches.iter().map(|b| b.dim()).sum()
    }
    fn min_eig_floor(&self) -> f64 {
        // block eigenvalues are p(x) * branch eigenvalues
        1e-14
    }
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let p = self.weights.probs(theta)?;
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut off = 0;
        for (px, b) in p.iter().zip(&self.branches) {
            let rho = b.state(theta)?;
            let bd = b.dim();
            m.view_mut((off, off), (bd, bd))
                .copy_from(&(rho.matrix() * Complex64::new(*px, 0.0)));
            off += bd;
        }
        HermitianOperator::symmetrized(m)
    }
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        let p = self.weights.probs(theta)?;
        let dp = self.weights.derivative(theta, i)?;
        let d = self.dim();
        let mut m = CMatrix::zeros(d, d);
        let mut off = 0;
        for ((px, dpx), b) in p.iter().zip(&dp).zip(&self.branches) {
            let rho = b.state(theta)?;
            let drho = b.derivative(theta, i)?;
            let bd = b.dim();
            let block = rho.matrix() * Complex64::new(*dpx, 0.0)
                + drho.matrix() * Complex64::new(*px, 0.0);
            m.view_mut((off, off), (bd, bd)).copy_from(&block);
            off += bd;
        }
        HermitianOperator::symmetrized(m)
    }
}

/// Tensor-product family ρ_a(θ) ⊗ ρ_b(θ) on shared parameters.
pub struct ProductFamily {
    label: String,
    a: Arc<dyn StateFamily>,
    b: Arc<dyn StateFamily>,
}

impl ProductFamily {
    pub fn new(label: &str, a: Arc<dyn StateFamily>, b: Arc<dyn StateFamily>) -> Result<Self> {
        if a.param_dim() != b.param_dim() {
            return Err(Error::DimensionMismatch {
                expected: a.param_dim(),
                got: b.param_dim(),
            });
        }
        Ok(Self {
            label: label.to_string(),
            a,
            b,
        })
    }
}

impl StateFamily for ProductFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "explicit"
    }
    fn param_dim(&self) -> usize {
        self.a.param_dim()
    }
    fn dim(&self) -> usize {
        self.a.dim() * self.b.dim()
    }
    fn min_eig_floor(&self) -> f64 {
        1e-14
    }
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator> {
        let ra = self.a.state(theta)?;
        let rb = self.b.state(theta)?;
        HermitianOperator::symmetrized(ra.matrix().kronecker(rb.matrix()))
    }
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        let ra = self.a.state(theta)?;
        let rb = self.b.state(theta)?;
        let da = self.a.derivative(theta, i)?;
        let db = self.b.derivative(theta, i)?;
        HermitianOperator::symmetrized(
            da.matrix().kronecker(rb.matrix()) + ra.matrix().kronecker(db.matrix()),
        )
    }
}

/// Image of a family under a CPTP map; derivatives push forward linearly.
pub struct PushforwardFamily {
    label: String,
    base: Arc<dyn StateFamily>,
    channel: QuantumChannel,
}

impl PushforwardFamily {
    pub fn new(base: Arc<dyn StateFamily>, channel: QuantumChannel) -> Result<Self> {
        if channel.dim_in() != base.dim() {
            return Err(Error::DimensionMismatch {
                expected: base.dim(),
                got: channel.dim_in(),
            });
        }
        Ok(Self {
            label: format!("{}_pushforward", base.label()),
            base,
            channel,
        })
    }
}

impl StateFamily for PushforwardFamily {
    fn label(&self) -> &str {
        &self.label
    }
    fn kind(&self) -> &'static str {
        "explicit"
    }
    fn param_dim(&self) -> usize {
        self.base.param_dim()
    }
    fn dim(&self) -> usize {
        self.channel.dim_out()
    }
    fn min_eig_floor(&self) -> f64 {
        1e-14
    }
    fn state_unchecked(&self, theta: &[f64]) -> Result<HermitianOperator> {
        self.channel.apply(&self.base.state(theta)?)
    }
    fn derivative(&self, theta: &[f64], i: usize) -> Result<HermitianOperator> {
        self.channel.apply(&self.base.derivative(theta, i)?)
    }
}

/// Seeded random thermal-type family ρ(θ) = e^{−(A_0 + Σ θ_j A_j)}/Z with
/// GUE generators of unit spectral norm.
pub fn random_thermal_family<R: Rng>(d: usize, l: usize, rng: &mut R) -> ThermalFamily {
    let base = crate::matcore::random_hermitian(d, rng);
    let generators = (0..l)
        .map(|_| crate::matcore::random_hermitian(d, rng))
        .collect();
    ThermalFamily::with_base("random_thermal", base, generators).unwrap()
}

/// Random interior parameter point with entries in (-0.5, 0.5).
pub fn random_theta<R: Rng>(l: usize, rng: &mut R) -> Vec<f64> {
    (0..l).map(|_| rng.gen_range(-0.5..0.5)).collect()
}

pub fn pauli_x() -> HermitianOperator {
    HermitianOperator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
}

pub fn pauli_y() -> HermitianOperator {
    let mut m = CMatrix::zeros(2, 2);
    m[(0, 1)] = Complex64::new(0.0, -1.0);
    m[(1, 0)] = Complex64::new(0.0, 1.0);
    HermitianOperator::new(m).unwrap()
}

pub fn pauli_z() -> HermitianOperator {
    HermitianOperator::from_diag(&[1.0, -1.0])
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn thermal_state_values() {
        let f = ThermalFamily::new("z", vec![pauli_z()]).unwrap();
        let rho0 = f.state(&[0.0]).unwrap();
        assert!((rho0.matrix() - CMatrix::identity(2, 2) * Complex64::new(0.5, 0.0)).norm() < 1e-14);
        let t = 0.7;
        let rho = f.state(&[t]).unwrap();
        let z = (-t).exp() + t.exp();
        assert!((rho.matrix()[(0, 0)].re - (-t).exp() / z).abs() < 1e-13);
        assert!((rho.matrix()[(1, 1)].re - t.exp() / z).abs() < 1e-13);
        // eigenvalues sum to 1
        assert!((rho.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn thermal_derivative() {
        let f = ThermalFamily::new("z", vec![pauli_z()]).unwrap();
        let d = f.state_derivative(&[0.0], 0).unwrap();
        // commuting case at theta = 0: -sigma_z/2
        assert!((d.matrix() - pauli_z().scale(-0.5).matrix()).norm() < 1e-12);

        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let fam = random_thermal_family(3, 2, &mut rng);
            let theta = random_theta(2, &mut rng);
            for i in 0..2 {
                let an = fam.state_derivative(&theta, i).unwrap();
                assert!(an.trace().abs() < 1e-10, "derivative not traceless");
                let fd = family_derivative_fd(&fam, &theta, i, 1e-5).unwrap();
                let rel =
                    (an.matrix() - fd.matrix()).norm() / fd.matrix().norm().max(1e-12);
                assert!(rel < 1e-6, "fd mismatch {rel}");
            }
        }
    }

    #[test]
    fn time_evolved_family() {
        let f = TimeEvolvedFamily::new("xz", pauli_z(), vec![pauli_x()]).unwrap();
        // spectrum is phi-invariant
        let rho = f.base_state().unwrap();
        let s0 = eig_hermitian(&rho, DEFAULT_CLUSTER_TOL).unwrap();
        let sigma = f.state(&[0.4]).unwrap();
        let s1 = eig_hermitian(&sigma, DEFAULT_CLUSTER_TOL).unwrap();
        for (a, b) in s0.eigenvalues().iter().zip(s1.eigenvalues()) {
            assert!((a - b).abs() < 1e-10);
        }
        // phi = 0 derivative is i[rho, H]
        let d0 = f.state_derivative(&[0.0], 0).unwrap();
        let expect = (rho.matrix() * pauli_x().matrix() - pauli_x().matrix() * rho.matrix())
            * Complex64::new(0.0, 1.0);
        assert!((d0.matrix() - expect).norm() < 1e-12);
        // commuting generators fix the state
        let fz = TimeEvolvedFamily::new("zz", pauli_z(), vec![pauli_z()]).unwrap();
        let dz = fz.state_derivative(&[0.3], 0).unwrap();
        assert!(dz.matrix().norm() < 1e-12);
        // FD oracle
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        for _ in 0..5 {
            let g = crate::matcore::random_hermitian(3, &mut rng);
            let h1 = crate::matcore::random_hermitian(3, &mut rng);
            let h2 = crate::matcore::random_hermitian(3, &mut rng);
            let fam = TimeEvolvedFamily::new("rand", g, vec![h1, h2]).unwrap();
            let phi = random_theta(2, &mut rng);
            for i in 0..2 {
                let an = fam.state_derivative(&phi, i).unwrap();
                assert!(an.trace().abs() < 1e-10);
                let fd = family_derivative_fd(&fam, &phi, i, 1e-5).unwrap();
                let rel = (an.matrix() - fd.matrix()).norm() / fd.matrix().norm().max(1e-12);
                assert!(rel < 1e-6, "fd mismatch {rel}");
            }
        }
    }

    #[test]
    fn fd_default_paths() {
        // constant family
        let c = ExplicitFamily::new("const", 2, 1, |_| {
            Ok(HermitianOperator::from_diag(&[0.5, 0.5]))
        });
        let d = c.derivative(&[0.3], 0).unwrap();
        assert!(d.matrix().norm() < 1e-12);
        // linear Bloch-z family
        let f = ExplicitFamily::new("bloch_z", 2, 1, |t| {
            Ok(HermitianOperator::from_diag(&[
                0.5 * (1.0 + t[0]),
                0.5 * (1.0 - t[0]),
            ]))
        });
        let d = f.derivative(&[0.2], 0).unwrap();
        assert!((d.matrix() - pauli_z().scale(0.5).matrix()).norm() < 1e-10);
    }

    #[test]
    fn pure_family_and_lift() {
        let f = PureStateFamily::new(
            "great_circle",
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
        let v = f.psi(&[0.3]).unwrap();
        assert!((v.norm() - 1.0).abs() < 1e-12);
        let lifted = f.lift(2e-8);
        let rho = lifted.state(&[0.3]).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let an = lifted.derivative(&[0.3], 0).unwrap();
        let fd = family_derivative_fd(&lifted, &[0.3], 0, 1e-5).unwrap();
        assert!((an.matrix() - fd.matrix()).norm() < 1e-6);
    }

    #[test]
    fn cq_partial_trace_consistency() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        let b1: Arc<dyn StateFamily> = Arc::new(random_thermal_family(2, 1, &mut rng));
        let b2: Arc<dyn StateFamily> = Arc::new(random_thermal_family(2, 1, &mut rng));
        let cq = ClassicalQuantumFamily::new(
            "cq",
            ProbabilityFamily::new("tilt", 2, 1, |t| {
                Ok(vec![0.5 + 0.3 * t[0], 0.5 - 0.3 * t[0]])
            }),
            vec![b1.clone(), b2.clone()],
        )
        .unwrap();
        let theta = [0.2];
        let rho = cq.state(&theta).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        // block traces recover the weights
        let p = cq.weights().probs(&theta).unwrap();
        let m = rho.matrix();
        let t1 = m[(0, 0)].re + m[(1, 1)].re;
        let t2 = m[(2, 2)].re + m[(3, 3)].re;
        assert!((t1 - p[0]).abs() < 1e-12 && (t2 - p[1]).abs() < 1e-12);
        // derivative is traceless and matches FD
        let an = cq.derivative(&theta, 0).unwrap();
        assert!(an.trace().abs() < 1e-8);
        let fd = family_derivative_fd(&cq, &theta, 0, 1e-5).unwrap();
        assert!((an.matrix() - fd.matrix()).norm() < 1e-6);
    }

    #[test]
    fn product_and_pushforward() {
        let mut rng = ChaCha8Rng::seed_from_u64(10);
        let a: Arc<dyn StateFamily> = Arc::new(random_thermal_family(2, 1, &mut rng));
        let b: Arc<dyn StateFamily> = Arc::new(random_thermal_family(2, 1, &mut rng));
        let prod = ProductFamily::new("prod", a.clone(), b.clone()).unwrap();
        let theta = [0.1];
        let rho = prod.state(&theta).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-12);
        let an = prod.derivative(&theta, 0).unwrap();
        let fd = family_derivative_fd(&prod, &theta, 0, 1e-5).unwrap();
        assert!((an.matrix() - fd.matrix()).norm() < 1e-6);

        let push = PushforwardFamily::new(
            Arc::new(ProductFamily::new("prod2", a.clone(), b.clone()).unwrap()),
            QuantumChannel::partial_trace_second(2, 2),
        )
        .unwrap();
        let back = push.state(&theta).unwrap();
        assert!((back.matrix() - a.state(&theta).unwrap().matrix()).norm() < 1e-12);
    }

    #[test]
    fn floor_rejection() {
        let f = ExplicitFamily::new("singular", 2, 1, |_| {
            Ok(HermitianOperator::from_diag(&[1.0, 0.0]))
        });
        assert!(matches!(f.state(&[0.0]), Err(Error::InvalidState(_))));
    }
}
