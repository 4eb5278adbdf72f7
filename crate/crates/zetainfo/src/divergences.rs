//! Classical and quantum divergences evaluated exactly through spectral
//! decompositions, plus CPTP channels for data-processing tests.

use num_complex::Complex64;
use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::matcore::{
    eig_hermitian, herm_part, re_trace, CMatrix, HermitianOperator, SpectralDecomposition,
    DEFAULT_CLUSTER_TOL,
};
use crate::{Error, Result};

/// Eigenvalues below this are treated as a positivity violation.
const PD_FLOOR: f64 = 1e-12;

/// The (α, z) parameter pair of the two-parameter Rényi family.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RenyiParams {
    pub alpha: f64,
    pub z: f64,
}

impl RenyiParams {
    pub fn new(alpha: f64, z: f64) -> Result<Self> {
        if !(alpha.is_finite() && z.is_finite()) || alpha <= 0.0 || z <= 0.0 {
            return Err(Error::InvalidParameter(format!(
                "need finite alpha, z > 0, got alpha={alpha}, z={z}"
            )));
        }
        Ok(Self { alpha, z })
    }

    /// True iff the α-z divergence (and information matrix) obeys data
    /// processing: 0<α<1 with z ≥ max(α, 1−α), or α>1 with
    /// α−1 ≤ z ≤ α ≤ 2z.
    pub fn dp_valid(&self) -> bool {
        let (a, z) = (self.alpha, self.z);
        if a < 1.0 {
            z >= a.max(1.0 - a)
        } else if a > 1.0 {
            a - 1.0 <= z && z <= a && a <= 2.0 * z
        } else {
            true
        }
    }
}

/// Spectral decomposition of a strictly positive definite operator.
pub fn pd_decomp(rho: &HermitianOperator) -> Result<SpectralDecomposition> {
    let s = eig_hermitian(rho, DEFAULT_CLUSTER_TOL)?;
    let min = s.min_eigenvalue();
    if min <= PD_FLOOR {
        return Err(Error::InvalidState(format!(
            "operator not positive definite (min eigenvalue {min:.3e})"
        )));
    }
    Ok(s)
}

fn mat_map(s: &SpectralDecomposition, g: impl Fn(f64) -> f64) -> CMatrix {
    s.map_eigenvalues(g)
}

/// Umegaki relative entropy Tr[ρ(ln ρ − ln σ)].
pub fn umegaki(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let sr = pd_decomp(rho)?;
    let ss = pd_decomp(sigma)?;
    let log_r = mat_map(&sr, f64::ln);
    let log_s = mat_map(&ss, f64::ln);
    Ok(re_trace(&(rho.matrix() * (log_r - log_s))))
}

/// Both orderings of the α-z Rényi trace functional:
/// (1/(α−1)) ln Tr[(σ^{(1−α)/2z} ρ^{α/z} σ^{(1−α)/2z})^z] and the
/// ρ-anchored variant.
pub fn alpha_z_renyi_forms(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<(f64, f64)> {
    if (p.alpha - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter("alpha = 1 is the KM limit; use umegaki".into()));
    }
    let sr = pd_decomp(rho)?;
    let ss = pd_decomp(sigma)?;
    let (a, z) = (p.alpha, p.z);

    let tr_pow_z = |core: CMatrix| -> Result<f64> {
        let h = HermitianOperator::symmetrized(core)?;
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL)?;
        // for near-pure inputs the core legitimately has eigenvalues far
        // below any absolute floor; only materially negative ones (relative
        // to the top of the spectrum) signal a loss of positivity
        let scale = s
            .eigenvalues()
            .iter()
            .fold(0.0f64, |acc, &l| acc.max(l.abs()));
        let mut t = 0.0;
        for (lam, pr) in s.eigenvalues().iter().zip(s.projectors()) {
            if *lam <= -PD_FLOOR * scale.max(1.0) {
                return Err(Error::InvalidState(format!(
                    "sandwiching core lost positivity (eigenvalue {lam:.3e})"
                )));
            }
            t += lam.max(0.0).powf(z) * re_trace(pr);
        }
        Ok(t)
    };

    let sig_half = mat_map(&ss, |l| l.powf((1.0 - a) / (2.0 * z)));
    let rho_pow = mat_map(&sr, |l| l.powf(a / z));
    let form1 = tr_pow_z(&sig_half * &rho_pow * &sig_half)?;

    let rho_half = mat_map(&sr, |l| l.powf(a / (2.0 * z)));
    let sig_pow = mat_map(&ss, |l| l.powf((1.0 - a) / z));
    let form2 = tr_pow_z(&rho_half * &sig_pow * &rho_half)?;

    Ok((form1.ln() / (a - 1.0), form2.ln() / (a - 1.0)))
}

/// α-z Rényi relative entropy D_{α,z}(ρ‖σ).
pub fn alpha_z_renyi(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    p: RenyiParams,
) -> Result<f64> {
    Ok(alpha_z_renyi_forms(rho, sigma, p)?.0)
}

/// α-z Rényi value for pure states with fidelity F: (z/(1−α))(−ln F).
pub fn alpha_z_pure_value(fidelity: f64, p: RenyiParams) -> Result<f64> {
    if !(0.0..=1.0).contains(&fidelity) || fidelity == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "fidelity must be in (0, 1], got {fidelity}"
        )));
    }
    Ok(p.z / (1.0 - p.alpha) * (-fidelity.ln()))
}

/// Log-Euclidean Rényi: (1/(α−1)) ln Tr exp(α ln ρ + (1−α) ln σ).
pub fn log_euclidean_renyi(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    if (alpha - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter("alpha = 1 is the KM limit; use umegaki".into()));
    }
    let sr = pd_decomp(rho)?;
    let ss = pd_decomp(sigma)?;
    let combo = mat_map(&sr, f64::ln) * Complex64::new(alpha, 0.0)
        + mat_map(&ss, f64::ln) * Complex64::new(1.0 - alpha, 0.0);
    let sc = eig_hermitian(&HermitianOperator::symmetrized(combo)?, DEFAULT_CLUSTER_TOL)?;
    let t: f64 = sc
        .eigenvalues()
        .iter()
        .zip(sc.projectors())
        .map(|(l, p)| l.exp() * re_trace(p))
        .sum();
    Ok(t.ln() / (alpha - 1.0))
}

fn geometric_core(
    anchor: &HermitianOperator,
    other: &HermitianOperator,
    power: f64,
) -> Result<f64> {
    // Tr[anchor (anchor^{-1/2} other anchor^{-1/2})^power]
    let sa = pd_decomp(anchor)?;
    let inv_half = mat_map(&sa, |l| l.powf(-0.5));
    let core = HermitianOperator::symmetrized(&inv_half * other.matrix() * &inv_half)?;
    let sc = pd_decomp(&core)?;
    let pw = mat_map(&sc, |l| l.powf(power));
    Ok(re_trace(&(anchor.matrix() * pw)))
}

/// Geometric Rényi: (1/(α−1)) ln Tr[σ(σ^{−1/2}ρσ^{−1/2})^α]; the
/// ρ-anchored form Tr[ρ(ρ^{−1/2}σρ^{−1/2})^{1−α}] agrees.
pub fn geometric_renyi_forms(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<(f64, f64)> {
    if (alpha - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter(
            "alpha = 1 is the BS limit; use belavkin_staszewski".into(),
        ));
    }
    let t1 = geometric_core(sigma, rho, alpha)?;
    let t2 = geometric_core(rho, sigma, 1.0 - alpha)?;
    Ok((t1.ln() / (alpha - 1.0), t2.ln() / (alpha - 1.0)))
}

pub fn geometric_renyi(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    Ok(geometric_renyi_forms(rho, sigma, alpha)?.0)
}

/// Belavkin-Staszewski relative entropy Tr[ρ ln(ρ^{1/2} σ^{−1} ρ^{1/2})].
pub fn belavkin_staszewski(rho: &HermitianOperator, sigma: &HermitianOperator) -> Result<f64> {
    let sr = pd_decomp(rho)?;
    let ss = pd_decomp(sigma)?;
    let rho_half = mat_map(&sr, |l| l.sqrt());
    let sig_inv = mat_map(&ss, |l| 1.0 / l);
    let core = HermitianOperator::symmetrized(&rho_half * sig_inv * &rho_half)?;
    let sc = pd_decomp(&core)?;
    let logm = mat_map(&sc, f64::ln);
    Ok(re_trace(&(rho.matrix() * logm)))
}

/// Petz Rényi (1/(α−1)) ln Tr[ρ^α σ^{1−α}]; the z = 1 slice.
pub fn petz_renyi(rho: &HermitianOperator, sigma: &HermitianOperator, alpha: f64) -> Result<f64> {
    if (alpha - 1.0).abs() < 1e-12 {
        return Err(Error::InvalidParameter("alpha = 1 is the KM limit; use umegaki".into()));
    }
    let sr = pd_decomp(rho)?;
    let ss = pd_decomp(sigma)?;
    let t = re_trace(&(mat_map(&sr, |l| l.powf(alpha)) * mat_map(&ss, |l| l.powf(1.0 - alpha))));
    Ok(t.ln() / (alpha - 1.0))
}

/// Sandwiched Rényi; the z = α slice of the α-z family.
pub fn sandwiched_renyi(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
) -> Result<f64> {
    alpha_z_renyi(rho, sigma, RenyiParams::new(alpha, alpha)?)
}

fn check_simplex(p: &[f64]) -> Result<()> {
    if p.is_empty() {
        return Err(Error::InvalidParameter("empty probability vector".into()));
    }
    let sum: f64 = p.iter().sum();
    if (sum - 1.0).abs() > 1e-10 || p.iter().any(|&x| x <= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "not an interior probability vector (sum {sum})"
        )));
    }
    Ok(())
}

/// Classical Rényi divergence (1/(α−1)) ln Σ p(x)^α q(x)^{1−α}.
pub fn classical_renyi(p: &[f64], q: &[f64], alpha: f64) -> Result<f64> {
    check_simplex(p)?;
    check_simplex(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    if (alpha - 1.0).abs() < 1e-12 {
        return classical_kl(p, q);
    }
    let s: f64 = p
        .iter()
        .zip(q)
        .map(|(&pi, &qi)| pi.powf(alpha) * qi.powf(1.0 - alpha))
        .sum();
    Ok(s.ln() / (alpha - 1.0))
}

/// Classical relative entropy Σ p(x) ln(p(x)/q(x)).
pub fn classical_kl(p: &[f64], q: &[f64]) -> Result<f64> {
    check_simplex(p)?;
    check_simplex(q)?;
    if p.len() != q.len() {
        return Err(Error::DimensionMismatch {
            expected: p.len(),
            got: q.len(),
        });
    }
    Ok(p.iter().zip(q).map(|(&pi, &qi)| pi * (pi / qi).ln()).sum())
}

/// CPTP map in Kraus form.
#[derive(Debug, Clone)]
pub struct QuantumChannel {
    kraus: Vec<CMatrix>,
    dim_in: usize,
    dim_out: usize,
}

impl QuantumChannel {
    pub fn new(kraus: Vec<CMatrix>) -> Result<Self> {
        let first = kraus.first().ok_or_else(|| {
            Error::InvalidParameter("channel needs at least one Kraus operator".into())
        })?;
        let (dim_out, dim_in) = (first.nrows(), first.ncols());
        let mut completeness = CMatrix::zeros(dim_in, dim_in);
        for k in &kraus {
            if k.nrows() != dim_out || k.ncols() != dim_in {
                return Err(Error::InvalidParameter(
                    "inconsistent Kraus operator shapes".into(),
                ));
            }
            completeness += k.adjoint() * k;
        }
        let dev = (completeness - CMatrix::identity(dim_in, dim_in)).norm();
        if dev > 1e-10 {
            return Err(Error::InvalidParameter(format!(
                "Kraus completeness violated by {dev:.3e}"
            )));
        }
        Ok(Self {
            kraus,
            dim_in,
            dim_out,
        })
    }

    pub fn dim_in(&self) -> usize {
        self.dim_in
    }

    pub fn dim_out(&self) -> usize {
        self.dim_out
    }

    pub fn identity(d: usize) -> Self {
        Self {
            kraus: vec![CMatrix::identity(d, d)],
            dim_in: d,
            dim_out: d,
        }
    }

    /// Fully depolarizing channel rho -> I/d, via d^2 rescaled shift
    /// operators |i><j|/sqrt(d).
    pub fn depolarizing(d: usize) -> Self {
        let mut kraus = Vec::with_capacity(d * d);
        let w = Complex64::new(1.0 / (d as f64).sqrt(), 0.0);
        for i in 0..d {
            for j in 0..d {
                let mut k = CMatrix::zeros(d, d);
                k[(i, j)] = w;
                kraus.push(k);
            }
        }
        Self {
            kraus,
            dim_in: d,
            dim_out: d,
        }
    }

    /// Partial trace over the second factor of a d1 x d2 bipartite space.
    pub fn partial_trace_second(d1: usize, d2: usize) -> Self {
        let mut kraus = Vec::with_capacity(d2);
        for m in 0..d2 {
            let mut k = CMatrix::zeros(d1, d1 * d2);
            for i in 0..d1 {
                k[(i, i * d2 + m)] = Complex64::new(1.0, 0.0);
            }
            kraus.push(k);
        }
        Self {
            kraus,
            dim_in: d1 * d2,
            dim_out: d1,
        }
    }

    /// Random CPTP map from a Haar-like isometry split into n_kraus blocks.
    pub fn random<R: Rng>(d: usize, n_kraus: usize, rng: &mut R) -> Result<Self> {
        let rows = d * n_kraus;
        let mut g = CMatrix::zeros(rows, d);
        for i in 0..rows {
            for j in 0..d {
                g[(i, j)] = Complex64::new(sample_normal(rng), sample_normal(rng));
            }
        }
        // Gram-Schmidt on columns gives an isometry
        for j in 0..d {
            for prev in 0..j {
                let col_prev = g.column(prev).clone_owned();
                let overlap = col_prev.adjoint() * g.column(j);
                let col_j = g.column(j) - &col_prev * overlap[(0, 0)];
                g.set_column(j, &col_j);
            }
            let norm = g.column(j).norm();
            let col = g.column(j) / Complex64::new(norm, 0.0);
            g.set_column(j, &col);
        }
        let kraus = (0..n_kraus)
            .map(|m| g.rows(m * d, d).clone_owned())
            .collect();
        Self::new(kraus)
    }

    pub fn apply(&self, rho: &HermitianOperator) -> Result<HermitianOperator> {
        if rho.dim() != self.dim_in {
            return Err(Error::DimensionMismatch {
                expected: self.dim_in,
                got: rho.dim(),
            });
        }
        let mut out = CMatrix::zeros(self.dim_out, self.dim_out);
        for k in &self.kraus {
            out += k * rho.matrix() * k.adjoint();
        }
        HermitianOperator::symmetrized(herm_part(&out))
    }
}

pub(crate) fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

/// Kronecker product of two operators.
pub fn tensor(a: &HermitianOperator, b: &HermitianOperator) -> HermitianOperator {
    HermitianOperator::symmetrized(a.matrix().kronecker(b.matrix())).unwrap()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::matcore::random_hermitian;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn random_density<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
        let h = random_hermitian(d, rng);
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let e = s.map_eigenvalues(|l| (-2.0 * l).exp());
        let z = re_trace(&e);
        HermitianOperator::symmetrized(e / Complex64::new(z, 0.0)).unwrap()
    }

    fn diag_density(p: &[f64]) -> HermitianOperator {
        HermitianOperator::from_diag(p)
    }

    #[test]
    fn umegaki_values() {
        let rho = diag_density(&[0.5, 0.5]);
        let sigma = diag_density(&[0.75, 0.25]);
        let d = umegaki(&rho, &sigma).unwrap();
        let expect = 0.5 * (2.0f64 / 3.0).ln() + 0.5 * 2.0f64.ln();
        assert!((d - expect).abs() < 1e-12);
        assert!(umegaki(&rho, &rho).unwrap().abs() < 1e-12);
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        for _ in 0..10 {
            let r = random_density(3, &mut rng);
            let s = random_density(3, &mut rng);
            assert!(umegaki(&r, &s).unwrap() >= -1e-12);
        }
    }

    #[test]
    fn alpha_z_basics() {
        let mut rng = ChaCha8Rng::seed_from_u64(2);
        let rho = random_density(3, &mut rng);
        let p = RenyiParams::new(0.6, 1.4).unwrap();
        assert!(alpha_z_renyi(&rho, &rho, p).unwrap().abs() < 1e-10);
        let sigma = random_density(3, &mut rng);
        let (f1, f2) = alpha_z_renyi_forms(&rho, &sigma, p).unwrap();
        assert!((f1 - f2).abs() < 1e-10, "{f1} vs {f2}");
        // commuting reduction to the classical Renyi divergence
        let pvec = [0.2, 0.3, 0.5];
        let qvec = [0.5, 0.25, 0.25];
        let dq = alpha_z_renyi(&diag_density(&pvec), &diag_density(&qvec), p).unwrap();
        let dc = classical_renyi(&pvec, &qvec, 0.6).unwrap();
        assert!((dq - dc).abs() < 1e-10);
    }

    #[test]
    fn alpha_z_pure_states() {
        let p = RenyiParams::new(0.5, 0.5).unwrap();
        let v = alpha_z_pure_value(0.5, p).unwrap();
        assert!((v - 2.0f64.ln()).abs() < 1e-12);
    }

    #[test]
    fn log_euclidean_limits() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let rho = random_density(3, &mut rng);
        let sigma = random_density(3, &mut rng);
        assert!(log_euclidean_renyi(&rho, &rho, 0.7).unwrap().abs() < 1e-10);
        // commuting pair: agrees with alpha-z at very large z
        let pvec = [0.4, 0.35, 0.25];
        let qvec = [0.3, 0.3, 0.4];
        let le = log_euclidean_renyi(&diag_density(&pvec), &diag_density(&qvec), 0.6).unwrap();
        let az = alpha_z_renyi(
            &diag_density(&pvec),
            &diag_density(&qvec),
            RenyiParams::new(0.6, 1e6).unwrap(),
        )
        .unwrap();
        assert!((le - az).abs() < 1e-5);
        // alpha -> 1 recovers Umegaki
        let u = umegaki(&rho, &sigma).unwrap();
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            let le = log_euclidean_renyi(&rho, &sigma, a).unwrap();
            assert!((le - u).abs() < 1e-4, "alpha={a}: {le} vs {u}");
        }
    }

    #[test]
    fn geometric_and_bs() {
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let rho = random_density(3, &mut rng);
        let sigma = random_density(3, &mut rng);
        assert!(geometric_renyi(&rho, &rho, 0.5).unwrap().abs() < 1e-10);
        let (g1, g2) = geometric_renyi_forms(&rho, &sigma, 0.5).unwrap();
        assert!((g1 - g2).abs() < 1e-10);
        // commuting reduction
        let pvec = [0.2, 0.8];
        let qvec = [0.6, 0.4];
        let gq = geometric_renyi(&diag_density(&pvec), &diag_density(&qvec), 2.0).unwrap();
        let gc = classical_renyi(&pvec, &qvec, 2.0).unwrap();
        assert!((gq - gc).abs() < 1e-10);
        // alpha = 2 coincidence with Petz at alpha = 2
        let p2 = petz_renyi(&rho, &sigma, 2.0).unwrap();
        let ge2 = geometric_renyi(&rho, &sigma, 2.0).unwrap();
        assert!((p2 - ge2).abs() < 1e-10);
        // BS basics
        assert!(belavkin_staszewski(&rho, &rho).unwrap().abs() < 1e-10);
        let bq = belavkin_staszewski(&diag_density(&pvec), &diag_density(&qvec)).unwrap();
        let bc = classical_kl(&pvec, &qvec).unwrap();
        assert!((bq - bc).abs() < 1e-10);
        let bs = belavkin_staszewski(&rho, &sigma).unwrap();
        assert!(bs >= umegaki(&rho, &sigma).unwrap() - 1e-10);
        for a in [1.0 - 1e-6, 1.0 + 1e-6] {
            let g = geometric_renyi(&rho, &sigma, a).unwrap();
            assert!((g - bs).abs() < 1e-4, "alpha={a}");
        }
    }

    #[test]
    fn petz_sandwiched_slices_and_order() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..5 {
            let rho = random_density(3, &mut rng);
            let sigma = random_density(3, &mut rng);
            for alpha in [0.4, 0.8, 1.7] {
                let pe = petz_renyi(&rho, &sigma, alpha).unwrap();
                let pe_slice =
                    alpha_z_renyi(&rho, &sigma, RenyiParams::new(alpha, 1.0).unwrap()).unwrap();
                assert!((pe - pe_slice).abs() < 1e-12 * pe.abs().max(1.0));
                let sa = sandwiched_renyi(&rho, &sigma, alpha).unwrap();
                let sa_slice =
                    alpha_z_renyi(&rho, &sigma, RenyiParams::new(alpha, alpha).unwrap()).unwrap();
                assert!((sa - sa_slice).abs() < 1e-12 * sa.abs().max(1.0));
                assert!(sa <= pe + 1e-12, "sandwiched > Petz at alpha={alpha}");
            }
        }
    }

    #[test]
    fn classical_limits() {
        let p = [0.5, 0.5];
        let q = [0.75, 0.25];
        assert!(classical_renyi(&p, &p, 2.0).unwrap().abs() < 1e-14);
        // brute-force alpha = 2 value
        let expect = (0.25f64 / 0.75 + 0.25 / 0.25).ln();
        assert!((classical_renyi(&p, &q, 2.0).unwrap() - expect).abs() < 1e-13);
        let kl = classical_kl(&p, &q).unwrap();
        assert!((classical_renyi(&p, &q, 1.0 + 1e-6).unwrap() - kl).abs() < 1e-5);
        assert!((classical_renyi(&p, &q, 1.0 - 1e-6).unwrap() - kl).abs() < 1e-5);
    }

    #[test]
    fn channels() {
        let mut rng = ChaCha8Rng::seed_from_u64(6);
        let rho = random_density(3, &mut rng);
        let id = QuantumChannel::identity(3);
        assert!((id.apply(&rho).unwrap().matrix() - rho.matrix()).norm() < 1e-14);
        let dep = QuantumChannel::depolarizing(3);
        let out = dep.apply(&rho).unwrap();
        assert!(
            (out.matrix() - CMatrix::identity(3, 3) / Complex64::new(3.0, 0.0)).norm() < 1e-12
        );
        // partial trace of a product state
        let a = random_density(2, &mut rng);
        let b = random_density(3, &mut rng);
        let ab = tensor(&a, &b);
        let pt = QuantumChannel::partial_trace_second(2, 3);
        let back = pt.apply(&ab).unwrap();
        assert!((back.matrix() - a.matrix()).norm() < 1e-12);
        // random channel is trace preserving
        let n = QuantumChannel::random(3, 3, &mut rng).unwrap();
        let nr = n.apply(&rho).unwrap();
        assert!((nr.trace() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn data_processing_in_valid_region() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let settings = [
            RenyiParams::new(0.5, 0.5).unwrap(),
            RenyiParams::new(0.3, 0.8).unwrap(),
            RenyiParams::new(1.5, 1.2).unwrap(),
            RenyiParams::new(2.0, 1.5).unwrap(),
        ];
        for p in settings {
            assert!(p.dp_valid());
            for _ in 0..12 {
                let rho = random_density(3, &mut rng);
                let sigma = random_density(3, &mut rng);
                let n = QuantumChannel::random(3, 2, &mut rng).unwrap();
                let before = alpha_z_renyi(&rho, &sigma, p).unwrap();
                let after =
                    alpha_z_renyi(&n.apply(&rho).unwrap(), &n.apply(&sigma).unwrap(), p).unwrap();
                assert!(
                    after <= before + 1e-9,
                    "DP violated at alpha={}, z={}: {after} > {before}",
                    p.alpha,
                    p.z
                );
            }
        }
        assert!(!RenyiParams::new(0.3, 0.2).unwrap().dp_valid());
        assert!(!RenyiParams::new(3.0, 1.2).unwrap().dp_valid());
    }
}
