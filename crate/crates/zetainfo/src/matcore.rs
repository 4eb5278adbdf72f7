//! Dense complex Hermitian linear algebra: eigendecomposition with
//! degeneracy clustering, spectral matrix functions, and the
//! divided-difference matrix-derivative calculus.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use std::sync::Arc;

use crate::{Error, Result};

/// Relative tolerance for eigenvalue clustering and for the degenerate
/// branch of divided differences.
pub const DEFAULT_CLUSTER_TOL: f64 = 1e-8;

const HERMITICITY_TOL: f64 = 1e-12;

pub type CMatrix = DMatrix<Complex64>;

/// Max-norm of M - M^dagger.
pub fn asymmetry(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            let d = (m[(i, j)] - m[(j, i)].conj()).norm();
            if d > worst {
                worst = d;
            }
        }
    }
    worst
}

/// Hermitian part (M + M^dagger)/2.
pub fn herm_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * Complex64::new(0.5, 0.0)
}

pub fn trace(m: &CMatrix) -> Complex64 {
    let mut t = Complex64::new(0.0, 0.0);
    for i in 0..m.nrows() {
        t += m[(i, i)];
    }
    t
}

pub fn re_trace(m: &CMatrix) -> f64 {
    trace(m).re
}

/// Dense d x d complex Hermitian matrix: states, Hamiltonians, observables.
#[derive(Debug, Clone)]
pub struct HermitianOperator {
    mat: CMatrix,
}

impl HermitianOperator {
    /// Validating constructor; rejects non-square or non-Hermitian input.
    pub fn new(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        let scale = mat.camax().max(1.0);
        let asym = asymmetry(&mat);
        if asym > HERMITICITY_TOL * scale {
            return Err(Error::NotHermitian(asym));
        }
        Ok(Self {
            mat: herm_part(&mat),
        })
    }

    /// Constructor that symmetrizes instead of rejecting (caller's choice).
    pub fn symmetrized(mat: CMatrix) -> Result<Self> {
        if mat.nrows() != mat.ncols() {
            return Err(Error::NotSquare {
                rows: mat.nrows(),
                cols: mat.ncols(),
            });
        }
        Ok(Self {
            mat: herm_part(&mat),
        })
    }

    pub fn from_real(rows: &[&[f64]]) -> Result<Self> {
        let d = rows.len();
        let mat = CMatrix::from_fn(d, d, |i, j| Complex64::new(rows[i][j], 0.0));
        Self::new(mat)
    }

    pub fn from_diag(diag: &[f64]) -> Self {
        let d = diag.len();
        Self {
            mat: CMatrix::from_fn(d, d, |i, j| {
                if i == j {
                    Complex64::new(diag[i], 0.0)
                } else {
                    Complex64::new(0.0, 0.0)
                }
            }),
        }
    }

    pub fn identity(d: usize) -> Self {
        Self {
            mat: CMatrix::identity(d, d),
        }
    }

    pub fn zeros(d: usize) -> Self {
        Self {
            mat: CMatrix::zeros(d, d),
        }
    }

    pub fn dim(&self) -> usize {
        self.mat.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.mat
    }

    pub fn into_matrix(self) -> CMatrix {
        self.mat
    }

    pub fn trace(&self) -> f64 {
        re_trace(&self.mat)
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            mat: &self.mat * Complex64::new(s, 0.0),
        }
    }

    pub fn add(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat + &other.mat,
        }
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self {
            mat: &self.mat - &other.mat,
        }
    }

    /// Tr[self * other], real for Hermitian pairs.
    pub fn trace_product(&self, other: &Self) -> f64 {
        re_trace(&(&self.mat * &other.mat))
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.mat.norm()
    }
}

/// Eigenvalues with orthogonal projectors; degenerate eigenvalues merged.
#[derive(Debug, Clone)]
pub struct SpectralDecomposition {
    eigenvalues: Vec<f64>,
    projectors: Vec<CMatrix>,
    cluster_tolerance: f64,
    dim: usize,
}

impl SpectralDecomposition {
    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    pub fn projectors(&self) -> &[CMatrix] {
        &self.projectors
    }

    pub fn cluster_tolerance(&self) -> f64 {
        self.cluster_tolerance
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues.iter().cloned().fold(f64::INFINITY, f64::min)
    }

    /// Sum of lambda_k Pi_k.
    pub fn reconstruct(&self) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p * Complex64::new(*lam, 0.0);
        }
        m
    }

    /// Sum of g(lambda_k) Pi_k for a plain closure (no domain checking).
    pub fn map_eigenvalues(&self, g: impl Fn(f64) -> f64) -> CMatrix {
        let mut m = CMatrix::zeros(self.dim, self.dim);
        for (lam, p) in self.eigenvalues.iter().zip(&self.projectors) {
            m += p * Complex64::new(g(*lam), 0.0);
        }
        m
    }
}

/// Scalar function with analytic derivative and domain predicate.
#[derive(Clone)]
pub struct ScalarFunction {
    label: String,
    eval: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    deriv: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    domain: Arc<dyn Fn(f64) -> bool + Send + Sync>,
}

impl std::fmt::Debug for ScalarFunction {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "ScalarFunction({})", self.label)
    }
}

impl ScalarFunction {
    pub fn new(
        label: &str,
        eval: impl Fn(f64) -> f64 + Send + Sync + 'static,
        deriv: impl Fn(f64) -> f64 + Send + Sync + 'static,
        domain: impl Fn(f64) -> bool + Send + Sync + 'static,
    ) -> Self {
        Self {
            label: label.to_string(),
            eval: Arc::new(eval),
            deriv: Arc::new(deriv),
            domain: Arc::new(domain),
        }
    }

    pub fn exp() -> Self {
        Self::new("exp", f64::exp, f64::exp, |_| true)
    }

    pub fn ln() -> Self {
        Self::new("ln", f64::ln, |x| 1.0 / x, |x| x > 0.0)
    }

    pub fn power(r: f64) -> Self {
        let label = format!("x^{r}");
        Self::new(
            &label,
            move |x| x.powf(r),
            move |x| r * x.powf(r - 1.0),
            move |x| x > 0.0 || (r >= 0.0 && r.fract() == 0.0),
        )
    }

    pub fn identity_fn() -> Self {
        Self::new("x", |x| x, |_| 1.0, |_| true)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn in_domain(&self, x: f64) -> bool {
        (self.domain)(x)
    }

    pub fn eval(&self, x: f64) -> Result<f64> {
        if !(self.domain)(x) {
            return Err(Error::Domain(format!("{}({x}) undefined", self.label)));
        }
        Ok((self.eval)(x))
    }

    pub fn deriv(&self, x: f64) -> Result<f64> {
        if !(self.domain)(x) {
            return Err(Error::Domain(format!("{}'({x}) undefined", self.label)));
        }
        Ok((self.deriv)(x))
    }
}

/// Stable x^r - y^r for x, y > 0: y^r * expm1(r * (ln x - ln y)).
pub fn pow_diff(x: f64, y: f64, r: f64) -> f64 {
    y.powf(r) * (r * log_ratio(x, y)).exp_m1()
}

/// Stable ln(x) - ln(y) for x, y > 0 via log1p.
pub fn log_ratio(x: f64, y: f64) -> f64 {
    ((x - y) / y).ln_1p()
}

/// Hermitian eigendecomposition with relative clustering of degenerate
/// eigenvalues.
pub fn eig_hermitian(a: &HermitianOperator, cluster_tol: f64) -> Result<SpectralDecomposition> {
    if cluster_tol < 0.0 {
        return Err(Error::InvalidParameter(format!(
            "cluster_tol must be nonnegative, got {cluster_tol}"
        )));
    }
    let d = a.dim();
    let eig = a.matrix().clone().symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].partial_cmp(&eig.eigenvalues[j]).unwrap());

    let mut eigenvalues: Vec<f64> = Vec::new();
    let mut projectors: Vec<CMatrix> = Vec::new();
    let mut members: Vec<Vec<usize>> = Vec::new();
    for &idx in &order {
        let lam = eig.eigenvalues[idx];
        let merge = match eigenvalues.last() {
            Some(&prev) => (lam - prev).abs() <= cluster_tol * lam.abs().max(1.0),
            None => false,
        };
        if merge {
            members.last_mut().unwrap().push(idx);
        } else {
            eigenvalues.push(lam);
            members.push(vec![idx]);
        }
    }
    for (c, cluster) in members.iter().enumerate() {
        let mut p = CMatrix::zeros(d, d);
        let mut lam_sum = 0.0;
        for &idx in cluster {
            let v = eig.eigenvectors.column(idx);
            p += &v * v.adjoint();
            lam_sum += eig.eigenvalues[idx];
        }
        eigenvalues[c] = lam_sum / cluster.len() as f64;
        projectors.push(p);
    }
    Ok(SpectralDecomposition {
        eigenvalues,
        projectors,
        cluster_tolerance: cluster_tol,
        dim: d,
    })
}

/// f(A) = sum of f(lambda_k) Pi_k.
pub fn apply_function(s: &SpectralDecomposition, f: &ScalarFunction) -> Result<HermitianOperator> {
    let mut m = CMatrix::zeros(s.dim, s.dim);
    for (lam, p) in s.eigenvalues.iter().zip(&s.projectors) {
        m += p * Complex64::new(f.eval(*lam)?, 0.0);
    }
    HermitianOperator::symmetrized(m)
}

/// First divided difference with a derivative branch at near-coincident
/// arguments, evaluated at the midpoint.
pub fn divided_difference(f: &ScalarFunction, x: f64, y: f64, tol: f64) -> Result<f64> {
    if (x - y).abs() > tol * x.abs().max(y.abs()).max(1.0) {
        Ok((f.eval(x)? - f.eval(y)?) / (x - y))
    } else {
        f.deriv(0.5 * (x + y))
    }
}

fn divided_difference_sum(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
    coeff: impl Fn(f64, f64) -> Result<f64>,
) -> Result<HermitianOperator> {
    let d = s.dim;
    if da.dim() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: da.dim(),
        });
    }
    let mut m = CMatrix::zeros(d, d);
    for (lk, pk) in s.eigenvalues.iter().zip(&s.projectors) {
        for (ll, pl) in s.eigenvalues.iter().zip(&s.projectors) {
            let c = coeff(*lk, *ll)?;
            m += pk * da.matrix() * pl * Complex64::new(c, 0.0);
        }
    }
    HermitianOperator::symmetrized(m)
}

/// Divided-difference matrix derivative:
/// df(A) = sum over (l, m) of f^[1](lambda_l, lambda_m) Pi_l dA Pi_m.
pub fn matrix_derivative(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
    f: &ScalarFunction,
) -> Result<HermitianOperator> {
    let tol = s.cluster_tolerance.max(DEFAULT_CLUSTER_TOL);
    divided_difference_sum(s, da, |x, y| divided_difference(f, x, y, tol))
}

/// Duhamel path for the exponential: coefficient is the integral
/// of e^{t x} e^{(1-t) y} over t in [0,1], evaluated in closed form.
pub fn duhamel_exp_derivative(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
) -> Result<HermitianOperator> {
    let tol = s.cluster_tolerance.max(DEFAULT_CLUSTER_TOL);
    divided_difference_sum(s, da, |x, y| {
        let delta = x - y;
        if delta.abs() > tol * x.abs().max(y.abs()).max(1.0) {
            Ok(y.exp() * delta.exp_m1() / delta)
        } else {
            Ok((0.5 * (x + y)).exp())
        }
    })
}

/// Resolvent-integral path for the logarithm: coefficient
/// (ln x - ln y)/(x - y), computed stably.
pub fn log_derivative_integral(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
) -> Result<HermitianOperator> {
    let tol = s.cluster_tolerance.max(DEFAULT_CLUSTER_TOL);
    divided_difference_sum(s, da, |x, y| {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::Domain(format!(
                "logarithm derivative needs positive spectrum, got ({x}, {y})"
            )));
        }
        if (x - y).abs() > tol * x.max(y) {
            Ok(log_ratio(x, y) / (x - y))
        } else {
            Ok(2.0 / (x + y))
        }
    })
}

/// Power-function derivative via the stable divided difference of x^r.
pub fn power_derivative(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
    r: f64,
) -> Result<HermitianOperator> {
    let tol = s.cluster_tolerance.max(DEFAULT_CLUSTER_TOL);
    divided_difference_sum(s, da, |x, y| {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::Domain(format!(
                "power derivative needs positive spectrum, got ({x}, {y})"
            )));
        }
        if (x - y).abs() > tol * x.max(y) {
            Ok(pow_diff(x, y, r) / (x - y))
        } else {
            let mid = 0.5 * (x + y);
            Ok(r * mid.powf(r - 1.0))
        }
    })
}

/// Quadrature path for x^r with r in (-1,0) or (0,1):
/// (sin(r pi)/pi) * integral over t in [0, infinity) of
/// t^r (A + t)^{-1} dA (A + t)^{-1} dt, evaluated per spectral pair.
pub fn power_derivative_quadrature(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
    r: f64,
) -> Result<HermitianOperator> {
    if r <= -1.0 || r >= 1.0 || r == 0.0 {
        return Err(Error::InvalidParameter(format!(
            "quadrature power path needs r in (-1,0) or (0,1), got {r}"
        )));
    }
    let prefactor = (r * std::f64::consts::PI).sin() / std::f64::consts::PI;
    divided_difference_sum(s, da, |x, y| {
        if x <= 0.0 || y <= 0.0 {
            return Err(Error::Domain(format!(
                "power derivative needs positive spectrum, got ({x}, {y})"
            )));
        }
        let integral = crate::quad::integrate_half_line(
            |t| t.powf(r) / ((x + t) * (y + t)),
            1e-10,
        )?;
        Ok(prefactor * integral)
    })
}

/// Sum over (k, l) of coeff(lambda_k, lambda_l) Pi_k X Pi_l for a complex
/// coefficient function; the building block of spectral channels.
pub fn spectral_pair_map(
    s: &SpectralDecomposition,
    x: &CMatrix,
    coeff: impl Fn(f64, f64) -> Complex64,
) -> CMatrix {
    let mut m = CMatrix::zeros(s.dim, s.dim);
    for (lk, pk) in s.eigenvalues.iter().zip(&s.projectors) {
        for (ll, pl) in s.eigenvalues.iter().zip(&s.projectors) {
            m += pk * x * pl * coeff(*lk, *ll);
        }
    }
    m
}

/// Tr[f'(A) dA].
pub fn trace_function_derivative(
    s: &SpectralDecomposition,
    da: &HermitianOperator,
    f: &ScalarFunction,
) -> Result<f64> {
    let mut acc = 0.0;
    for (lam, p) in s.eigenvalues.iter().zip(&s.projectors) {
        acc += f.deriv(*lam)? * re_trace(&(p * da.matrix()));
    }
    Ok(acc)
}

/// Random Hermitian matrix with GUE-like entries, rescaled to spectral
/// norm at most 1. Deterministic given the RNG state.
pub fn random_hermitian<R: Rng>(d: usize, rng: &mut R) -> HermitianOperator {
    let mut m = CMatrix::zeros(d, d);
    for i in 0..d {
        for j in 0..d {
            m[(i, j)] = Complex64::new(sample_normal(rng), sample_normal(rng));
        }
    }
    let h = herm_part(&m);
    let eig = h.clone().symmetric_eigen();
    let spec_norm = eig
        .eigenvalues
        .iter()
        .fold(0.0f64, |acc, &l| acc.max(l.abs()))
        .max(1e-12);
    HermitianOperator::symmetrized(h / Complex64::new(spec_norm, 0.0)).unwrap()
}

fn sample_normal<R: Rng + ?Sized>(rng: &mut R) -> f64 {
    let u1: f64 = rng.gen_range(f64::MIN_POSITIVE..1.0);
    let u2: f64 = rng.gen_range(0.0..1.0);
    (-2.0 * u1.ln()).sqrt() * (2.0 * std::f64::consts::PI * u2).cos()
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pauli_x() -> HermitianOperator {
        HermitianOperator::from_real(&[&[0.0, 1.0], &[1.0, 0.0]]).unwrap()
    }

    #[test]
    fn eig_diagonal() {
        let a = HermitianOperator::from_diag(&[1.0, 2.0]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(s.eigenvalues(), &[1.0, 2.0]);
        assert!((s.projectors()[0][(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((s.projectors()[1][(1, 1)].re - 1.0).abs() < 1e-14);
    }

    #[test]
    fn eig_pauli_x() {
        let s = eig_hermitian(&pauli_x(), DEFAULT_CLUSTER_TOL).unwrap();
        assert!((s.eigenvalues()[0] + 1.0).abs() < 1e-12);
        assert!((s.eigenvalues()[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn eig_reconstruction_random() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let a = random_hermitian(4, &mut rng);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let diff = (s.reconstruct() - a.matrix()).norm();
        assert!(diff < 1e-10, "reconstruction error {diff}");
        // completeness and orthogonality
        let mut sum = CMatrix::zeros(4, 4);
        for p in s.projectors() {
            sum += p;
        }
        assert!((sum - CMatrix::identity(4, 4)).norm() < 1e-10);
        for (k, pk) in s.projectors().iter().enumerate() {
            for (l, pl) in s.projectors().iter().enumerate() {
                let prod = pk * pl;
                let target = if k == l { pk.clone() } else { CMatrix::zeros(4, 4) };
                assert!((prod - target).norm() < 1e-10);
            }
        }
    }

    #[test]
    fn eig_clusters_degenerate() {
        let a = HermitianOperator::from_diag(&[1.0, 1.0 + 1e-12, 2.0]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert_eq!(s.eigenvalues().len(), 2);
        assert!((re_trace(&s.projectors()[0]) - 2.0).abs() < 1e-12);
    }

    #[test]
    fn non_hermitian_rejected() {
        let m = CMatrix::from_fn(2, 2, |i, j| Complex64::new((i + 2 * j) as f64, 0.0));
        assert!(HermitianOperator::new(m.clone()).is_err());
        assert!(HermitianOperator::symmetrized(m).is_ok());
    }

    #[test]
    fn apply_exp_diag() {
        let a = HermitianOperator::from_diag(&[0.0, 2.0f64.ln()]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let e = apply_function(&s, &ScalarFunction::exp()).unwrap();
        assert!((e.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((e.matrix()[(1, 1)].re - 2.0).abs() < 1e-14);
    }

    #[test]
    fn apply_sqrt_squares_back() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let h = random_hermitian(3, &mut rng);
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let shifted = s.map_eigenvalues(|l| l + 2.0);
        let m = HermitianOperator::symmetrized(shifted).unwrap();
        let sm = eig_hermitian(&m, DEFAULT_CLUSTER_TOL).unwrap();
        let root = apply_function(&sm, &ScalarFunction::power(0.5)).unwrap();
        let sq = root.matrix() * root.matrix();
        assert!((sq - m.matrix()).norm() < 1e-10);
    }

    #[test]
    fn ln_exp_round_trip() {
        let mut rng = ChaCha8Rng::seed_from_u64(13);
        let h = random_hermitian(3, &mut rng);
        let s = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let pd = HermitianOperator::symmetrized(s.map_eigenvalues(|l| l + 1.5)).unwrap();
        let spd = eig_hermitian(&pd, DEFAULT_CLUSTER_TOL).unwrap();
        let logm = apply_function(&spd, &ScalarFunction::ln()).unwrap();
        let slog = eig_hermitian(&logm, DEFAULT_CLUSTER_TOL).unwrap();
        let back = apply_function(&slog, &ScalarFunction::exp()).unwrap();
        assert!((back.matrix() - pd.matrix()).norm() < 1e-10);
    }

    #[test]
    fn ln_of_nonpositive_is_domain_error() {
        let a = HermitianOperator::from_diag(&[-1.0, 2.0]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        assert!(matches!(
            apply_function(&s, &ScalarFunction::ln()),
            Err(Error::Domain(_))
        ));
    }

    #[test]
    fn divided_difference_values() {
        let ln = ScalarFunction::ln();
        assert!((divided_difference(&ln, 1.0, 1.0, 1e-8).unwrap() - 1.0).abs() < 1e-14);
        let sq = ScalarFunction::power(2.0);
        assert!((divided_difference(&sq, 3.0, 1.0, 1e-8).unwrap() - 4.0).abs() < 1e-14);
        let e = std::f64::consts::E;
        let v = divided_difference(&ln, e, 1.0, 1e-8).unwrap();
        assert!((v - 1.0 / (e - 1.0)).abs() < 1e-12);
        // symmetry is exact
        assert_eq!(
            divided_difference(&ln, 2.0, 3.0, 1e-8).unwrap(),
            divided_difference(&ln, 3.0, 2.0, 1e-8).unwrap()
        );
    }

    #[test]
    fn matrix_derivative_scalar_family() {
        // A(x) = x I, f = x^2: derivative is 2x I at x = 1.5.
        let x = 1.5;
        let a = HermitianOperator::from_diag(&[x, x]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let d = matrix_derivative(&s, &HermitianOperator::identity(2), &ScalarFunction::power(2.0))
            .unwrap();
        assert!((d.matrix() - CMatrix::identity(2, 2) * Complex64::new(2.0 * x, 0.0)).norm() < 1e-12);
    }

    fn fd_matrix_derivative(
        a0: &HermitianOperator,
        b: &HermitianOperator,
        f: &ScalarFunction,
        x: f64,
        h: f64,
    ) -> CMatrix {
        let eval = |xx: f64| {
            let a = a0.add(&b.scale(xx));
            let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
            apply_function(&s, f).unwrap().into_matrix()
        };
        (eval(x + h) - eval(x - h)) / Complex64::new(2.0 * h, 0.0)
    }

    #[test]
    fn matrix_derivative_fd_oracle() {
        let mut rng = ChaCha8Rng::seed_from_u64(21);
        let base = random_hermitian(3, &mut rng);
        let a0 = HermitianOperator::symmetrized(
            eig_hermitian(&base, DEFAULT_CLUSTER_TOL)
                .unwrap()
                .map_eigenvalues(|l| l + 2.0),
        )
        .unwrap();
        let b = random_hermitian(3, &mut rng);
        let x = 0.3;
        for f in [ScalarFunction::exp(), ScalarFunction::ln(), ScalarFunction::power(0.5)] {
            let a = a0.add(&b.scale(x));
            let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
            let analytic = matrix_derivative(&s, &b, &f).unwrap();
            let fd = fd_matrix_derivative(&a0, &b, &f, x, 1e-5);
            let rel = (analytic.matrix() - &fd).norm() / fd.norm().max(1e-12);
            assert!(rel < 1e-6, "{}: fd mismatch {rel}", f.label());
        }
    }

    #[test]
    fn duhamel_matches_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for _ in 0..10 {
            let a = random_hermitian(3, &mut rng);
            let b = random_hermitian(3, &mut rng);
            let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
            let duh = duhamel_exp_derivative(&s, &b).unwrap();
            let gen = matrix_derivative(&s, &b, &ScalarFunction::exp()).unwrap();
            assert!((duh.matrix() - gen.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn duhamel_at_zero_is_identity_map() {
        let b = pauli_x();
        let s = eig_hermitian(&HermitianOperator::zeros(2), DEFAULT_CLUSTER_TOL).unwrap();
        let d = duhamel_exp_derivative(&s, &b).unwrap();
        assert!((d.matrix() - b.matrix()).norm() < 1e-14);
    }

    #[test]
    fn log_integral_matches_generic() {
        let mut rng = ChaCha8Rng::seed_from_u64(41);
        for _ in 0..10 {
            let h = random_hermitian(3, &mut rng);
            let s0 = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
            let a = HermitianOperator::symmetrized(s0.map_eigenvalues(|l| l + 1.5)).unwrap();
            let b = random_hermitian(3, &mut rng);
            let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
            let li = log_derivative_integral(&s, &b).unwrap();
            let gen = matrix_derivative(&s, &b, &ScalarFunction::ln()).unwrap();
            assert!((li.matrix() - gen.matrix()).norm() < 1e-12);
        }
    }

    #[test]
    fn log_integral_componentwise() {
        let a = HermitianOperator::from_diag(&[1.0, 2.0]);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        let d = log_derivative_integral(&s, &HermitianOperator::identity(2)).unwrap();
        assert!((d.matrix()[(0, 0)].re - 1.0).abs() < 1e-14);
        assert!((d.matrix()[(1, 1)].re - 0.5).abs() < 1e-14);
    }

    #[test]
    fn power_derivative_identity_and_quadrature() {
        let mut rng = ChaCha8Rng::seed_from_u64(51);
        let h = random_hermitian(3, &mut rng);
        let s0 = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let a = HermitianOperator::symmetrized(s0.map_eigenvalues(|l| l + 1.2)).unwrap();
        let b = random_hermitian(3, &mut rng);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();

        let r1 = power_derivative(&s, &b, 1.0).unwrap();
        assert!((r1.matrix() - b.matrix()).norm() < 1e-12);

        for r in [0.5, -0.5, 0.3] {
            let spectral = power_derivative(&s, &b, r).unwrap();
            let quad = power_derivative_quadrature(&s, &b, r).unwrap();
            assert!(
                (spectral.matrix() - quad.matrix()).norm() < 1e-8,
                "quadrature path r={r}"
            );
        }
    }

    #[test]
    fn trace_derivative_matches() {
        let mut rng = ChaCha8Rng::seed_from_u64(61);
        let h = random_hermitian(3, &mut rng);
        let s0 = eig_hermitian(&h, DEFAULT_CLUSTER_TOL).unwrap();
        let a = HermitianOperator::symmetrized(s0.map_eigenvalues(|l| l + 1.5)).unwrap();
        let b = random_hermitian(3, &mut rng);
        let s = eig_hermitian(&a, DEFAULT_CLUSTER_TOL).unwrap();
        for f in [ScalarFunction::exp(), ScalarFunction::ln(), ScalarFunction::power(2.0)] {
            let t = trace_function_derivative(&s, &b, &f).unwrap();
            let full = matrix_derivative(&s, &b, &f).unwrap();
            assert!((t - full.trace()).abs() < 1e-12, "{}", f.label());
        }
        // f = x reduces to Tr[dA]
        let t = trace_function_derivative(&s, &b, &ScalarFunction::identity_fn()).unwrap();
        assert!((t - b.trace()).abs() < 1e-12);
    }
}
