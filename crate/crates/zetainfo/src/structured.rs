//! Closed-form information matrices for thermal and time-evolved families,
//! realized through spectral channel application in the eigenbasis of the
//! conditioning Hamiltonian.

use nalgebra::DMatrix;
use num_complex::Complex64;
use std::sync::Arc;

use crate::densities::{thermal_weight, time_evolved_weight};
use crate::divergences::RenyiParams;
use crate::families::{psi_coefficient, StateFamily, ThermalFamily, TimeEvolvedFamily};
use crate::infomat::{InfoMatrix, Method};
use crate::kernels::ZetaKernel;
use crate::matcore::{
    eig_hermitian, re_trace, spectral_pair_map, CMatrix, HermitianOperator,
    SpectralDecomposition, DEFAULT_CLUSTER_TOL,
};
use crate::{Error, Result};

/// A map X ↦ Σ_{k,ℓ} weight(μ_k − μ_ℓ) Π_k X Π_ℓ in the eigenbasis of a
/// fixed Hermitian operator; an even weight with weight(0) = κ makes this
/// Hermiticity-preserving and (for κ = 1) unital.
#[derive(Clone)]
pub struct SpectralChannel {
    basis: Arc<SpectralDecomposition>,
    weight: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
}

impl SpectralChannel {
    pub fn new(
        basis: SpectralDecomposition,
        weight: impl Fn(f64) -> f64 + Send + Sync + 'static,
    ) -> Self {
        Self {
            basis: Arc::new(basis),
            weight: Arc::new(weight),
        }
    }

    /// Channel with the thermal closed-form weight of the given kernel,
    /// conditioned on the Hamiltonian h.
    pub fn thermal(h: &HermitianOperator, kernel: &ZetaKernel) -> Result<Self> {
        let basis = eig_hermitian(h, DEFAULT_CLUSTER_TOL)?;
        let k = kernel.clone();
        Ok(Self::new(basis, move |w| thermal_weight(w, &k)))
    }

    /// Channel with the time-evolved closed-form weight of the given
    /// kernel, conditioned on the generator g.
    pub fn time_evolved(g: &HermitianOperator, kernel: &ZetaKernel) -> Result<Self> {
        let basis = eig_hermitian(g, DEFAULT_CLUSTER_TOL)?;
        let k = kernel.clone();
        Ok(Self::new(basis, move |w| time_evolved_weight(w, &k)))
    }

    pub fn apply_matrix(&self, x: &CMatrix) -> CMatrix {
        let w = self.weight.clone();
        spectral_pair_map(&self.basis, x, |a, b| Complex64::new(w(a - b), 0.0))
    }

    pub fn apply(&self, x: &HermitianOperator) -> Result<HermitianOperator> {
        if x.dim() != self.basis.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.basis.dim(),
                got: x.dim(),
            });
        }
        HermitianOperator::new(self.apply_matrix(x.matrix()))
    }
}

/// Ψ_φ(X) = ∫₀¹ e^{iH(φ)t} X e^{-iH(φ)t} dt, applied spectrally: the
/// coefficient at eigenvalue gap ν is (e^{iν} − 1)/(iν).
pub fn psi_phi_apply(h_decomp: &SpectralDecomposition, x: &CMatrix) -> CMatrix {
    spectral_pair_map(h_decomp, x, |a, b| psi_coefficient(a - b))
}

/// Thermal closed form for a general kernel:
/// [I]_{ij} = ½⟨{Φ(H_i), H_j}⟩_ρ − κ⟨H_i⟩⟨H_j⟩ with the thermal weight
/// evaluated at the eigenvalue gaps of H(θ).
pub fn thermal_info_general_kernel(
    family: &ThermalFamily,
    theta: &[f64],
    kernel: &ZetaKernel,
) -> Result<InfoMatrix> {
    let rho = family.state(theta)?;
    let h = family.hamiltonian(theta)?;
    let channel = SpectralChannel::thermal(&h, kernel)?;
    let kappa = kernel.kappa();
    let gens = family.generators();
    let l = gens.len();
    let means: Vec<f64> = gens
        .iter()
        .map(|g| re_trace(&(rho.matrix() * g.matrix())))
        .collect();
    let mapped: Vec<CMatrix> = gens.iter().map(|g| channel.apply_matrix(g.matrix())).collect();
    let mut values = DMatrix::<f64>::zeros(l, l);
    for i in 0..l {
        for j in 0..l {
            let corr = re_trace(&(rho.matrix() * &mapped[i] * gens[j].matrix()));
            values[(i, j)] = corr - kappa * means[i] * means[j];
        }
    }
    let values = (&values + values.transpose()) * 0.5;
    InfoMatrix::new(
        values,
        &kernel.label().to_string(),
        family.label(),
        theta,
        Method::ClosedFormThermal,
    )
}

/// α-z thermal closed form; the underlying Fourier identity holds for
/// α ∈ (0,1) only.
pub fn thermal_info_closed(
    family: &ThermalFamily,
    theta: &[f64],
    p: RenyiParams,
) -> Result<InfoMatrix> {
    if !(0.0 < p.alpha && p.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "thermal closed form needs alpha in (0,1), got {}",
            p.alpha
        )));
    }
    thermal_info_general_kernel(family, theta, &ZetaKernel::alpha_z(p))
}

fn time_evolved_info_with_weight(
    family: &TimeEvolvedFamily,
    phi: &[f64],
    weight: &SpectralChannel,
    label: &str,
) -> Result<InfoMatrix> {
    let rho = family.base_state()?;
    let g = family.base_generator();
    let h = family.hamiltonian(phi)?;
    let s_h = eig_hermitian(&h, DEFAULT_CLUSTER_TOL)?;
    let gens = family.generators();
    let l = gens.len();
    let psi: Vec<CMatrix> = gens.iter().map(|x| psi_phi_apply(&s_h, x.matrix())).collect();
    let mapped: Vec<CMatrix> = psi.iter().map(|a| weight.apply_matrix(a)).collect();
    let comm: Vec<CMatrix> = psi
        .iter()
        .map(|a| g.matrix() * a - a * g.matrix())
        .collect();
    let mut values = DMatrix::<f64>::zeros(l, l);
    let mut scale = 0.0f64;
    let mut worst_im = 0.0f64;
    for i in 0..l {
        for j in 0..l {
            let inner = &mapped[i] * &comm[j] - &comm[j] * &mapped[i];
            let v = (rho.matrix() * inner).trace();
            values[(i, j)] = v.re;
            scale = scale.max(v.re.abs());
            worst_im = worst_im.max(v.im.abs());
        }
    }
    if worst_im > 1e-10 * scale.max(1.0) {
        return Err(Error::Numerical(format!(
            "imaginary residue {worst_im:.3e} in time-evolved closed form"
        )));
    }
    let values = (&values + values.transpose()) * 0.5;
    InfoMatrix::new(
        values,
        label,
        family.label(),
        phi,
        Method::ClosedFormTimeEvolved,
    )
}

/// Time-evolved closed form for a general kernel:
/// [I]_{ij} = ⟨[Φ_g(Ψ_φ(H_i)), [G, Ψ_φ(H_j)]]⟩_ρ.
pub fn time_evolved_info_general_kernel(
    family: &TimeEvolvedFamily,
    phi: &[f64],
    kernel: &ZetaKernel,
) -> Result<InfoMatrix> {
    let channel = SpectralChannel::time_evolved(family.base_generator(), kernel)?;
    time_evolved_info_with_weight(family, phi, &channel, &kernel.label().to_string())
}

/// α-z time-evolved closed form; restricted to α ∈ (0,1) where the
/// Fourier identity holds.
pub fn time_evolved_info_closed(
    family: &TimeEvolvedFamily,
    phi: &[f64],
    p: RenyiParams,
) -> Result<InfoMatrix> {
    if !(0.0 < p.alpha && p.alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "time-evolved closed form needs alpha in (0,1), got {}",
            p.alpha
        )));
    }
    time_evolved_info_general_kernel(family, phi, &ZetaKernel::alpha_z(p))
}

/// Kubo-Mori limit of the time-evolved closed form, where the spectral
/// weight degenerates to one and Φ_g is the identity.
pub fn time_evolved_info_km(family: &TimeEvolvedFamily, phi: &[f64]) -> Result<InfoMatrix> {
    let basis = eig_hermitian(family.base_generator(), DEFAULT_CLUSTER_TOL)?;
    let identity = SpectralChannel::new(basis, |_| 1.0);
    time_evolved_info_with_weight(family, phi, &identity, "kubo_mori")
}
