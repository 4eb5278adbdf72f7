//! Property suites: Loewner orderings, data processing, convexity, and
//! divergence value orderings, packaged as seeded deterministic checks
//! with JSON-serializable reports.

use serde::{Deserialize, Serialize};
use std::sync::Arc;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::divergences::{self, QuantumChannel, RenyiParams};
use crate::families::{
    random_theta, random_thermal_family, ExplicitFamily, PushforwardFamily,
    StateFamily,
};
use crate::infomat::{
    info_hessian_oracle, info_spectral, max_rel_deviation, DivergenceSpec, InfoMatrix,
};
use crate::kernels::ZetaKernel;
use crate::matcore::HermitianOperator;
use crate::{Error, Result};

pub const LOEWNER_TOL: f64 = 1e-9;
pub const PSD_GAP_TOL: f64 = 1e-8;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct PropertyReport {
    pub name: String,
    pub instances_run: usize,
    pub worst_violation: f64,
    pub tolerance: f64,
    pub pass: bool,
    pub seed: u64,
}

impl PropertyReport {
    pub fn new(name: &str, instances_run: usize, worst_violation: f64, tolerance: f64, seed: u64) -> Self {
        Self {
            name: name.to_string(),
            instances_run,
            worst_violation,
            tolerance,
            pass: worst_violation <= tolerance,
            seed,
        }
    }
}

/// Loewner comparison A ≤ B: the violation is the amount by which the
/// smallest eigenvalue of B − A dips below zero.
pub fn check_loewner(a: &InfoMatrix, b: &InfoMatrix, tol: f64) -> Result<PropertyReport> {
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            got: b.dim(),
        });
    }
    let violation = (-a.loewner_gap(b)).max(0.0);
    Ok(PropertyReport::new("loewner", 1, violation, tol, 0))
}

fn loewner_violation(lower: &InfoMatrix, upper: &InfoMatrix) -> f64 {
    (-lower.loewner_gap(upper)).max(0.0)
}

/// Petz information matrices are Loewner-decreasing in α on (0, ½] and
/// increasing on [½, ∞); the grid is augmented with ½ so every adjacent
/// pair lies on one side.
pub fn check_petz_ordering(
    family: &dyn StateFamily,
    theta: &[f64],
    alpha_grid: &[f64],
    tol: f64,
) -> Result<PropertyReport> {
    let mut grid: Vec<f64> = alpha_grid.to_vec();
    grid.push(0.5);
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mats: Vec<InfoMatrix> = grid
        .iter()
        .map(|&a| info_spectral(family, theta, &ZetaKernel::petz(a)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    let mut n = 0;
    for (pair, ms) in grid.windows(2).zip(mats.windows(2)) {
        let v = if pair[1] <= 0.5 {
            loewner_violation(&ms[1], &ms[0]) // decreasing: I(a1) ≥ I(a2)
        } else {
            loewner_violation(&ms[0], &ms[1]) // increasing
        };
        worst = worst.max(v);
        n += 1;
    }
    Ok(PropertyReport::new("petz_ordering", n, worst, tol, 0))
}

/// Sandwiched information matrices are Loewner-increasing in α on (0, ∞).
pub fn check_sandwiched_ordering(
    family: &dyn StateFamily,
    theta: &[f64],
    alpha_grid: &[f64],
    tol: f64,
) -> Result<PropertyReport> {
    let mut grid: Vec<f64> = alpha_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mats: Vec<InfoMatrix> = grid
        .iter()
        .map(|&a| info_spectral(family, theta, &ZetaKernel::sandwiched(a)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for ms in mats.windows(2) {
        worst = worst.max(loewner_violation(&ms[0], &ms[1]));
    }
    Ok(PropertyReport::new(
        "sandwiched_ordering",
        grid.len() - 1,
        worst,
        tol,
        0,
    ))
}

/// Data processing: the information matrix of the pushed-forward family
/// never exceeds the original in Loewner order.
pub fn check_dp_info(
    family: Arc<dyn StateFamily>,
    theta: &[f64],
    channel: &QuantumChannel,
    kernel: &ZetaKernel,
    tol: f64,
) -> Result<PropertyReport> {
    let before = info_spectral(family.as_ref(), theta, kernel)?;
    let pushed = PushforwardFamily::new(family, channel.clone())?;
    let after = info_spectral(&pushed, theta, kernel)?;
    let violation = loewner_violation(&after, &before);
    Ok(PropertyReport::new("data_processing", 1, violation, tol, 0))
}

/// Mixture family Σ_x p(x) ρ_x(θ) with a fixed distribution p.
fn mixture_family(weights: &[f64], branches: &[Arc<dyn StateFamily>]) -> Result<ExplicitFamily> {
    if weights.len() != branches.len() {
        return Err(Error::DimensionMismatch {
            expected: weights.len(),
            got: branches.len(),
        });
    }
    if weights.iter().any(|&p| p < 0.0) || (weights.iter().sum::<f64>() - 1.0).abs() > 1e-10 {
        return Err(Error::InvalidParameter(
            "mixture weights must form a probability distribution".into(),
        ));
    }
    let dim = branches[0].dim();
    let l = branches[0].param_dim();
    let w: Vec<f64> = weights.to_vec();
    let bs: Vec<Arc<dyn StateFamily>> = branches.to_vec();
    let w2 = w.clone();
    let bs2 = bs.clone();
    Ok(ExplicitFamily::new("mixture", dim, l, move |theta| {
        let mut acc = HermitianOperator::zeros(dim);
        for (px, b) in w.iter().zip(&bs) {
            acc = acc.add(&b.state(theta)?.scale(*px));
        }
        Ok(acc)
    })
    .with_derivative(move |theta, i| {
        let mut acc = HermitianOperator::zeros(dim);
        for (px, b) in w2.iter().zip(&bs2) {
            acc = acc.add(&b.derivative(theta, i)?.scale(*px));
        }
        Ok(acc)
    })
    .with_min_eig_floor(1e-14))
}

/// Convexity: Σ_x p(x) I(ρ_x) − I(Σ_x p(x) ρ_x) is PSD for a fixed
/// distribution p.
pub fn check_convexity(
    branches: &[Arc<dyn StateFamily>],
    weights: &[f64],
    theta: &[f64],
    kernel: &ZetaKernel,
    tol: f64,
) -> Result<PropertyReport> {
    let p = weights.to_vec();
    let mixed = mixture_family(weights, branches)?;
    let i_mixed = info_spectral(&mixed, theta, kernel)?;
    let mut upper = nalgebra::DMatrix::<f64>::zeros(i_mixed.dim(), i_mixed.dim());
    for (px, b) in p.iter().zip(branches) {
        upper += info_spectral(b.as_ref(), theta, kernel)?.values() * *px;
    }
    let diff = &upper - i_mixed.values();
    let sym = (&diff + diff.transpose()) * 0.5;
    let min_eig = sym
        .symmetric_eigen()
        .eigenvalues
        .iter()
        .cloned()
        .fold(f64::INFINITY, f64::min);
    Ok(PropertyReport::new(
        "convexity",
        1,
        (-min_eig).max(0.0),
        tol,
        0,
    ))
}

/// Divergence value orderings at fixed α ∈ (0,1):
/// α·D_petz ≤ D_sandwiched ≤ D_petz.
pub fn check_renyi_value_orderings(
    rho: &HermitianOperator,
    sigma: &HermitianOperator,
    alpha: f64,
    tol: f64,
) -> Result<PropertyReport> {
    if !(0.0 < alpha && alpha < 1.0) {
        return Err(Error::InvalidParameter(format!(
            "value orderings checked for alpha in (0,1), got {alpha}"
        )));
    }
    let petz = divergences::petz_renyi(rho, sigma, alpha)?;
    let sandwiched = divergences::sandwiched_renyi(rho, sigma, alpha)?;
    let worst = (alpha * petz - sandwiched).max(sandwiched - petz).max(0.0);
    Ok(PropertyReport::new("renyi_value_orderings", 1, worst, tol, 0))
}

/// α-z information matrices are Loewner-increasing in z for α ∈ (0,1).
pub fn check_z_monotonicity(
    family: &dyn StateFamily,
    theta: &[f64],
    alpha: f64,
    z_grid: &[f64],
    tol: f64,
) -> Result<PropertyReport> {
    let mut grid: Vec<f64> = z_grid.to_vec();
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    let mats: Vec<InfoMatrix> = grid
        .iter()
        .map(|&z| info_spectral(family, theta, &ZetaKernel::alpha_z(RenyiParams::new(alpha, z)?)))
        .collect::<Result<_>>()?;
    let mut worst = 0.0f64;
    for ms in mats.windows(2) {
        worst = worst.max(loewner_violation(&ms[0], &ms[1]));
    }
    Ok(PropertyReport::new(
        "z_monotonicity",
        grid.len() - 1,
        worst,
        tol,
        0,
    ))
}

pub const SUITE_NAMES: &[&str] = &[
    "loewner",
    "petz_ordering",
    "sandwiched_ordering",
    "data_processing",
    "convexity",
    "renyi_values",
    "oracle_equivalence",
];

fn aggregate(name: &str, seed: u64, tol: f64, violations: &[f64], instances: usize) -> PropertyReport {
    let worst = violations.iter().cloned().fold(0.0f64, f64::max);
    PropertyReport::new(name, instances, worst, tol, seed)
}

fn suite_loewner(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..10 {
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        let km = info_spectral(&fam, &theta, &ZetaKernel::kubo_mori())?;
        let rld = info_spectral(&fam, &theta, &ZetaKernel::rld())?;
        violations.push(check_loewner(&km, &rld, LOEWNER_TOL)?.worst_violation);
    }
    Ok(aggregate("loewner", seed, LOEWNER_TOL, &violations, violations.len()))
}

fn suite_petz_ordering(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = [0.1, 0.25, 0.5, 1.5, 3.0];
    let mut violations = Vec::new();
    let mut n = 0;
    for _ in 0..10 {
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        let r = check_petz_ordering(&fam, &theta, &grid, LOEWNER_TOL)?;
        violations.push(r.worst_violation);
        n += r.instances_run;
    }
    Ok(aggregate("petz_ordering", seed, LOEWNER_TOL, &violations, n))
}

fn suite_sandwiched_ordering(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let grid = [0.2, 0.5, 1.5, 3.0];
    let mut violations = Vec::new();
    let mut n = 0;
    for _ in 0..10 {
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        let r = check_sandwiched_ordering(&fam, &theta, &grid, LOEWNER_TOL)?;
        violations.push(r.worst_violation);
        n += r.instances_run;
    }
    Ok(aggregate("sandwiched_ordering", seed, LOEWNER_TOL, &violations, n))
}

fn suite_data_processing(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let kernels = [
        ZetaKernel::kubo_mori(),
        ZetaKernel::rld(),
        ZetaKernel::alpha_z(RenyiParams::new(0.5, 1.0)?),
        ZetaKernel::alpha_z(RenyiParams::new(1.5, 1.2)?),
    ];
    for _ in 0..5 {
        let fam: Arc<dyn StateFamily> = Arc::new(random_thermal_family(3, 2, &mut rng));
        let theta = random_theta(2, &mut rng);
        let channels = [
            QuantumChannel::depolarizing(3),
            QuantumChannel::random(3, 2, &mut rng)?,
        ];
        for channel in &channels {
            for kernel in &kernels {
                let r = check_dp_info(fam.clone(), &theta, channel, kernel, PSD_GAP_TOL)?;
                violations.push(r.worst_violation);
            }
        }
    }
    Ok(aggregate("data_processing", seed, PSD_GAP_TOL, &violations, violations.len()))
}

fn suite_convexity(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..10 {
        let branches: Vec<Arc<dyn StateFamily>> = vec![
            Arc::new(random_thermal_family(3, 2, &mut rng)),
            Arc::new(random_thermal_family(3, 2, &mut rng)),
        ];
        let weights = [0.3, 0.7];
        let theta = random_theta(2, &mut rng);
        let r = check_convexity(
            &branches,
            &weights,
            &theta,
            &ZetaKernel::kubo_mori(),
            PSD_GAP_TOL,
        )?;
        violations.push(r.worst_violation);
    }
    Ok(aggregate("convexity", seed, PSD_GAP_TOL, &violations, violations.len()))
}

fn suite_renyi_values(seed: u64) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    let mut n = 0;
    for _ in 0..10 {
        let fam = random_thermal_family(3, 1, &mut rng);
        let rho = fam.state(&random_theta(1, &mut rng))?;
        let sigma = fam.state(&random_theta(1, &mut rng))?;
        for alpha in [0.3, 0.6] {
            let r = check_renyi_value_orderings(&rho, &sigma, alpha, 1e-12)?;
            violations.push(r.worst_violation);
            n += 1;
        }
        let theta = random_theta(1, &mut rng);
        let r = check_z_monotonicity(&fam, &theta, 0.3, &[0.5, 1.0, 2.0, 4.0], LOEWNER_TOL)?;
        violations.push(r.worst_violation);
        n += r.instances_run;
    }
    Ok(aggregate("renyi_values", seed, 1e-9, &violations, n))
}

pub(crate) fn oracle_equivalence_with_kernel(
    seed: u64,
    kernel_for: &dyn Fn(RenyiParams) -> ZetaKernel,
) -> Result<PropertyReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut violations = Vec::new();
    for _ in 0..4 {
        let fam = random_thermal_family(3, 2, &mut rng);
        let theta = random_theta(2, &mut rng);
        for (alpha, z) in [(0.5, 1.0), (2.0, 2.0)] {
            let p = RenyiParams::new(alpha, z)?;
            let spectral = info_spectral(&fam, &theta, &kernel_for(p))?;
            let hessian = info_hessian_oracle(&fam, &theta, &DivergenceSpec::alpha_z(p), None)?;
            violations.push(max_rel_deviation(
                spectral.values(),
                hessian.values(),
                1e-3,
                1e-6,
            ));
        }
    }
    Ok(aggregate("oracle_equivalence", seed, 1e-3, &violations, violations.len()))
}

fn suite_oracle_equivalence(seed: u64) -> Result<PropertyReport> {
    oracle_equivalence_with_kernel(seed, &ZetaKernel::alpha_z)
}

/// Run one named suite with the given seed.
pub fn run_suite(name: &str, seed: u64) -> Result<PropertyReport> {
    match name {
        "loewner" => suite_loewner(seed),
        "petz_ordering" => suite_petz_ordering(seed),
        "sandwiched_ordering" => suite_sandwiched_ordering(seed),
        "data_processing" => suite_data_processing(seed),
        "convexity" => suite_convexity(seed),
        "renyi_values" => suite_renyi_values(seed),
        "oracle_equivalence" => suite_oracle_equivalence(seed),
        other => Err(Error::Config(format!("unknown suite '{other}'"))),
    }
}
