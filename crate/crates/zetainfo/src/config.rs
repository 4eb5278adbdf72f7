//! Config file schema (JSON), construction of families/kernels from
//! configs, and provenance hashing.

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::divergences::RenyiParams;
use crate::families::{StateFamily, ThermalFamily, TimeEvolvedFamily};
use crate::infomat::DivergenceSpec;
use crate::kernels::ZetaKernel;
use crate::matcore::{CMatrix, HermitianOperator};
use crate::{Error, Result};

/// Complex matrix as {"re": [[..]], "im": [[..]]}, row-major; "im" may be
/// omitted for real matrices.
#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ComplexMatrixSpec {
    pub re: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub im: Option<Vec<Vec<f64>>>,
}

impl ComplexMatrixSpec {
    pub fn to_operator(&self) -> Result<HermitianOperator> {
        let n = self.re.len();
        if self.re.iter().any(|row| row.len() != n) {
            return Err(Error::Config("matrix 're' block is not square".into()));
        }
        if let Some(im) = &self.im {
            if im.len() != n || im.iter().any(|row| row.len() != n) {
                return Err(Error::Config("matrix 'im' block shape mismatch".into()));
            }
        }
        let mut m = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let re = self.re[i][j];
                let im = self.im.as_ref().map_or(0.0, |b| b[i][j]);
                m[(i, j)] = num_complex::Complex64::new(re, im);
            }
        }
        HermitianOperator::new(m)
    }

    pub fn from_operator(op: &HermitianOperator) -> Self {
        let n = op.dim();
        let m = op.matrix();
        let re = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].re).collect())
            .collect();
        let im_block: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| m[(i, j)].im).collect())
            .collect();
        let all_real = im_block.iter().flatten().all(|&x| x == 0.0);
        Self {
            re,
            im: if all_real { None } else { Some(im_block) },
        }
    }
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum FamilySpec {
    Thermal {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<ComplexMatrixSpec>,
        generators: Vec<ComplexMatrixSpec>,
    },
    TimeEvolved {
        base_generator: ComplexMatrixSpec,
        generators: Vec<ComplexMatrixSpec>,
    },
}

impl FamilySpec {
    pub fn build(&self) -> Result<Box<dyn StateFamily>> {
        match self {
            FamilySpec::Thermal { .. } => Ok(Box::new(self.build_thermal()?)),
            FamilySpec::TimeEvolved { .. } => Ok(Box::new(self.build_time_evolved()?)),
        }
    }

    pub fn build_thermal(&self) -> Result<ThermalFamily> {
        match self {
            FamilySpec::Thermal { base, generators } => {
                let gens: Vec<HermitianOperator> = generators
                    .iter()
                    .map(|g| g.to_operator())
                    .collect::<Result<_>>()?;
                match base {
                    Some(b) => ThermalFamily::with_base("thermal", b.to_operator()?, gens),
                    None => ThermalFamily::new("thermal", gens),
                }
            }
            _ => Err(Error::Config("family is not thermal".into())),
        }
    }

    pub fn build_time_evolved(&self) -> Result<TimeEvolvedFamily> {
        match self {
            FamilySpec::TimeEvolved {
                base_generator,
                generators,
            } => {
                let gens: Vec<HermitianOperator> = generators
                    .iter()
                    .map(|g| g.to_operator())
                    .collect::<Result<_>>()?;
                TimeEvolvedFamily::new("time_evolved", base_generator.to_operator()?, gens)
            }
            _ => Err(Error::Config("family is not time-evolved".into())),
        }
    }
}

#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
#[serde(tag = "label", rename_all = "snake_case")]
pub enum KernelSpec {
    KuboMori,
    Rld,
    AlphaZ { alpha: f64, z: f64 },
    Petz { alpha: f64 },
    Sandwiched { alpha: f64 },
}

impl KernelSpec {
    pub fn build(&self) -> Result<ZetaKernel> {
        Ok(match *self {
            KernelSpec::KuboMori => ZetaKernel::kubo_mori(),
            KernelSpec::Rld => ZetaKernel::rld(),
            KernelSpec::AlphaZ { alpha, z } => ZetaKernel::alpha_z(RenyiParams::new(alpha, z)?),
            KernelSpec::Petz { alpha } => ZetaKernel::petz(alpha),
            KernelSpec::Sandwiched { alpha } => ZetaKernel::sandwiched(alpha),
        })
    }

    /// (α, z) parameters if this is one of the Rényi kernels.
    pub fn renyi_params(&self) -> Option<RenyiParams> {
        match *self {
            KernelSpec::AlphaZ { alpha, z } => RenyiParams::new(alpha, z).ok(),
            KernelSpec::Petz { alpha } => RenyiParams::new(alpha, 1.0).ok(),
            KernelSpec::Sandwiched { alpha } => RenyiParams::new(alpha, alpha).ok(),
            _ => None,
        }
    }

    /// The divergence whose Hessian reproduces this kernel's information
    /// matrix, including the 1/α prefactor where the definition carries it.
    pub fn divergence(&self) -> Result<DivergenceSpec> {
        Ok(match *self {
            KernelSpec::KuboMori => DivergenceSpec::umegaki(),
            KernelSpec::Rld => DivergenceSpec::belavkin_staszewski(),
            KernelSpec::AlphaZ { alpha, z } => {
                DivergenceSpec::alpha_z(RenyiParams::new(alpha, z)?)
            }
            KernelSpec::Petz { alpha } => DivergenceSpec::petz(alpha),
            KernelSpec::Sandwiched { alpha } => DivergenceSpec::sandwiched(alpha),
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default, clap::ValueEnum)]
#[serde(rename_all = "snake_case")]
#[clap(rename_all = "snake_case")]
pub enum MethodChoice {
    #[default]
    Spectral,
    Hessian,
    Both,
    Closed,
}

fn default_seed() -> u64 {
    42
}

fn default_grid_points() -> usize {
    201
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct RunConfig {
    pub family: FamilySpec,
    pub kernel: KernelSpec,
    pub theta: Vec<f64>,
    #[serde(default)]
    pub method: MethodChoice,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub suites: Option<Vec<String>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_grid: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub z_grid: Option<Vec<f64>>,
    #[serde(default = "default_grid_points")]
    pub grid_points: usize,
}

impl RunConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: RunConfig = serde_json::from_str(text)?;
        // fail fast on malformed matrices / parameters
        cfg.family.build()?;
        cfg.kernel.build()?;
        Ok(cfg)
    }
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct NgdConfig {
    pub family: FamilySpec,
    pub target: ComplexMatrixSpec,
    pub kernel: KernelSpec,
    pub theta0: Vec<f64>,
    pub learning_rate: f64,
    pub iterations: usize,
    #[serde(default)]
    pub damping: f64,
}

impl NgdConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: NgdConfig = serde_json::from_str(text)?;
        if !(cfg.learning_rate > 0.0) {
            return Err(Error::Config(format!(
                "learning_rate must be positive, got {}",
                cfg.learning_rate
            )));
        }
        if cfg.damping < 0.0 {
            return Err(Error::Config(format!(
                "damping must be nonnegative, got {}",
                cfg.damping
            )));
        }
        cfg.family.build()?;
        cfg.kernel.build()?;
        cfg.target.to_operator()?;
        Ok(cfg)
    }
}

/// Hex SHA-256 of the raw config text, embedded in outputs for provenance.
pub fn config_hash(text: &str) -> String {
    let mut h = Sha256::new();
    h.update(text.as_bytes());
    format!("{:x}", h.finalize())
}
