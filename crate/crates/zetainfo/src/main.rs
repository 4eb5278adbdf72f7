//! Command-line front end: compute information matrices, run property
//! suites, sweep (α, z) grids, sample densities, and run a natural
//! gradient descent demo on parameterized thermal states.

use clap::{Parser, Subcommand};
use nalgebra::DMatrix;
use serde::Serialize;
use std::path::{Path, PathBuf};
use std::time::Instant;

use zetainfo::config::{
    config_hash, KernelSpec, MethodChoice, NgdConfig, RunConfig,
};
use zetainfo::densities::{
    alpha_z_tent, char_fn_alpha_z, convolve_densities, default_window, high_peak_tent,
    thermal_weight,
};
use zetainfo::divergences::{umegaki, RenyiParams};
use zetainfo::families::fd_step;
use zetainfo::infomat::{
    info_hessian_oracle, info_spectral, max_rel_deviation, InfoMatrix,
};
use zetainfo::kernels::ZetaKernel;
use zetainfo::structured::{thermal_info_general_kernel, time_evolved_info_general_kernel};
use zetainfo::verify::{run_suite, PropertyReport, SUITE_NAMES};
use zetainfo::{Error, Result};

#[derive(Parser)]
#[command(name = "zetainfo", about = "Quantum information matrices from spectral zeta-kernels")]
struct Cli {
    /// Path to a JSON config file
    #[arg(long, global = true)]
    config: Option<PathBuf>,
    /// Seed override for randomized suites
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Output directory
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Computation method override
    #[arg(long, global = true, value_enum)]
    method: Option<MethodChoice>,
    /// Rényi α override
    #[arg(long, global = true)]
    alpha: Option<f64>,
    /// Rényi z override
    #[arg(long, global = true)]
    z: Option<f64>,
    /// Property suites to run (defaults to all)
    #[arg(long, global = true, value_delimiter = ',')]
    suite: Option<Vec<String>>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute an information matrix for the configured family and kernel
    Compute,
    /// Run property verification suites
    Verify,
    /// Sweep an (α, z) grid of information matrices into a CSV
    Sweep,
    /// Natural gradient descent demo on a thermal family
    Ngd,
    /// Sample the tent densities and spectral weights into CSVs
    Densities,
}

fn main() {
    let cli = Cli::parse();
    std::process::exit(match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            exit_code_for(&e)
        }
    });
}

fn exit_code_for(e: &Error) -> i32 {
    match e {
        Error::QuadratureFailure { .. } | Error::Numerical(_) => 3,
        _ => 2,
    }
}

fn run(cli: &Cli) -> Result<i32> {
    std::fs::create_dir_all(&cli.out)?;
    match cli.command {
        Command::Compute => cmd_compute(cli),
        Command::Verify => cmd_verify(cli),
        Command::Sweep => cmd_sweep(cli),
        Command::Ngd => cmd_ngd(cli),
        Command::Densities => cmd_densities(cli),
    }
}

fn load_config_text(cli: &Cli) -> Result<String> {
    let path = cli
        .config
        .as_ref()
        .ok_or_else(|| Error::Config("--config <path> is required for this command".into()))?;
    Ok(std::fs::read_to_string(path)?)
}

fn effective_kernel_spec(cli: &Cli, cfg: &RunConfig) -> Result<KernelSpec> {
    Ok(match (cli.alpha, cli.z) {
        (None, None) => cfg.kernel,
        (a, z) => {
            let base = cfg.kernel.renyi_params().unwrap_or(RenyiParams::new(0.5, 1.0)?);
            KernelSpec::AlphaZ {
                alpha: a.unwrap_or(base.alpha),
                z: z.unwrap_or(base.z),
            }
        }
    })
}

#[derive(Serialize)]
struct InfoMatrixOutput {
    config_hash: String,
    family: String,
    kernel: String,
    method: String,
    theta: Vec<f64>,
    values: Vec<Vec<f64>>,
    min_eigenvalue: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    max_rel_deviation_vs_spectral: Option<f64>,
    elapsed_ms: u128,
}

fn matrix_rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows())
        .map(|i| (0..m.ncols()).map(|j| m[(i, j)]).collect())
        .collect()
}

fn write_info_output(
    path: &Path,
    hash: &str,
    im: &InfoMatrix,
    method: &str,
    deviation: Option<f64>,
    elapsed_ms: u128,
) -> Result<()> {
    let out = InfoMatrixOutput {
        config_hash: hash.to_string(),
        family: im.family_label().to_string(),
        kernel: im.kernel_label().to_string(),
        method: method.to_string(),
        theta: im.theta().to_vec(),
        values: matrix_rows(im.values()),
        min_eigenvalue: im.min_eigenvalue(),
        max_rel_deviation_vs_spectral: deviation,
        elapsed_ms,
    };
    std::fs::write(path, serde_json::to_string_pretty(&out)?)?;
    Ok(())
}

fn cmd_compute(cli: &Cli) -> Result<i32> {
    let text = load_config_text(cli)?;
    let cfg = RunConfig::from_json(&text)?;
    let hash = config_hash(&text);
    let kernel_spec = effective_kernel_spec(cli, &cfg)?;
    let kernel = kernel_spec.build()?;
    let family = cfg.family.build()?;
    let method = cli.method.unwrap_or(cfg.method);
    let start = Instant::now();
    match method {
        MethodChoice::Spectral => {
            let im = info_spectral(family.as_ref(), &cfg.theta, &kernel)?;
            write_info_output(
                &cli.out.join("info_spectral.json"),
                &hash,
                &im,
                "spectral",
                None,
                start.elapsed().as_millis(),
            )?;
        }
        MethodChoice::Hessian => {
            let im = info_hessian_oracle(
                family.as_ref(),
                &cfg.theta,
                &kernel_spec.divergence()?,
                None,
            )?;
            write_info_output(
                &cli.out.join("info_hessian.json"),
                &hash,
                &im,
                "hessian_fd",
                None,
                start.elapsed().as_millis(),
            )?;
        }
        MethodChoice::Both => {
            let spectral = info_spectral(family.as_ref(), &cfg.theta, &kernel)?;
            let hessian = info_hessian_oracle(
                family.as_ref(),
                &cfg.theta,
                &kernel_spec.divergence()?,
                None,
            )?;
            let dev = max_rel_deviation(hessian.values(), spectral.values(), 1e-3, 1e-6);
            write_info_output(
                &cli.out.join("info_spectral.json"),
                &hash,
                &spectral,
                "spectral",
                None,
                start.elapsed().as_millis(),
            )?;
            write_info_output(
                &cli.out.join("info_hessian.json"),
                &hash,
                &hessian,
                "hessian_fd",
                Some(dev),
                start.elapsed().as_millis(),
            )?;
        }
        MethodChoice::Closed => {
            let im = match &cfg.family {
                f @ zetainfo::config::FamilySpec::Thermal { .. } => {
                    thermal_info_general_kernel(&f.build_thermal()?, &cfg.theta, &kernel)?
                }
                f @ zetainfo::config::FamilySpec::TimeEvolved { .. } => {
                    time_evolved_info_general_kernel(&f.build_time_evolved()?, &cfg.theta, &kernel)?
                }
            };
            write_info_output(
                &cli.out.join("info_closed.json"),
                &hash,
                &im,
                "closed_form",
                None,
                start.elapsed().as_millis(),
            )?;
        }
    }
    Ok(0)
}

#[derive(Serialize)]
struct VerifyOutput {
    config_hash: String,
    seed: u64,
    reports: Vec<PropertyReport>,
    all_pass: bool,
}

fn cmd_verify(cli: &Cli) -> Result<i32> {
    let (text, suites, seed) = match &cli.config {
        Some(_) => {
            let text = load_config_text(cli)?;
            let cfg = RunConfig::from_json(&text)?;
            let suites = cli
                .suite
                .clone()
                .or_else(|| cfg.suites.clone())
                .unwrap_or_else(|| SUITE_NAMES.iter().map(|s| s.to_string()).collect());
            (text, suites, cli.seed.unwrap_or(cfg.seed))
        }
        None => (
            String::new(),
            cli.suite
                .clone()
                .unwrap_or_else(|| SUITE_NAMES.iter().map(|s| s.to_string()).collect()),
            cli.seed.unwrap_or(42),
        ),
    };
    let reports: Vec<PropertyReport> = suites
        .iter()
        .map(|name| run_suite(name, seed))
        .collect::<Result<_>>()?;
    let all_pass = reports.iter().all(|r| r.pass);
    let out = VerifyOutput {
        config_hash: config_hash(&text),
        seed,
        reports,
        all_pass,
    };
    std::fs::write(
        cli.out.join("verify_report.json"),
        serde_json::to_string_pretty(&out)?,
    )?;
    for r in &out.reports {
        println!(
            "{}: {} (worst violation {:.3e}, tolerance {:.3e}, {} instances)",
            r.name,
            if r.pass { "pass" } else { "FAIL" },
            r.worst_violation,
            r.tolerance,
            r.instances_run
        );
    }
    Ok(if all_pass { 0 } else { 1 })
}

fn cmd_sweep(cli: &Cli) -> Result<i32> {
    let text = load_config_text(cli)?;
    let cfg = RunConfig::from_json(&text)?;
    let hash = config_hash(&text);
    let family = cfg.family.build()?;
    let alphas = cfg
        .alpha_grid
        .clone()
        .unwrap_or_else(|| vec![0.3, 0.5, 0.7, 0.9, 1.5, 2.0]);
    let zs = cfg.z_grid.clone().unwrap_or_else(|| vec![0.5, 1.0, 2.0]);
    let km = info_spectral(family.as_ref(), &cfg.theta, &ZetaKernel::kubo_mori())?;
    let mut csv = String::from("alpha,z,i,j,value,km_value,method\n");
    for &alpha in &alphas {
        for &z in &zs {
            let p = RenyiParams::new(alpha, z)?;
            let im = info_spectral(family.as_ref(), &cfg.theta, &ZetaKernel::alpha_z(p))?;
            for i in 0..im.dim() {
                for j in 0..im.dim() {
                    csv.push_str(&format!(
                        "{alpha},{z},{i},{j},{:.17e},{:.17e},spectral\n",
                        im.values()[(i, j)],
                        km.values()[(i, j)]
                    ));
                }
            }
        }
    }
    let path = cli.out.join("sweep.csv");
    std::fs::write(&path, csv)?;
    std::fs::write(cli.out.join("sweep_config_hash.txt"), hash)?;
    println!("wrote {}", path.display());
    Ok(0)
}

fn cmd_ngd(cli: &Cli) -> Result<i32> {
    let text = load_config_text(cli)?;
    let cfg = NgdConfig::from_json(&text)?;
    let hash = config_hash(&text);
    let family = cfg.family.build()?;
    let kernel = cfg.kernel.build()?;
    let target = cfg.target.to_operator()?;
    let loss = |theta: &[f64]| -> Result<f64> { umegaki(&target, &family.state(theta)?) };

    let l = family.param_dim();
    let mut theta = cfg.theta0.clone();
    if theta.len() != l {
        return Err(Error::Config(format!(
            "theta0 has {} entries, family has {} parameters",
            theta.len(),
            l
        )));
    }
    let mut csv = String::from("iter,loss,grad_norm,min_eig\n");
    let mut final_loss = f64::NAN;
    for iter in 0..cfg.iterations {
        let h = fd_step(&theta);
        let mut grad = nalgebra::DVector::<f64>::zeros(l);
        for i in 0..l {
            let mut plus = theta.clone();
            plus[i] += h;
            let mut minus = theta.clone();
            minus[i] -= h;
            grad[i] = (loss(&plus)? - loss(&minus)?) / (2.0 * h);
        }
        let metric = info_spectral(family.as_ref(), &theta, &kernel)?;
        let min_eig = metric.min_eigenvalue();
        let damped = metric.values() + DMatrix::<f64>::identity(l, l) * cfg.damping;
        let current = loss(&theta)?;
        final_loss = current;
        csv.push_str(&format!(
            "{iter},{:.17e},{:.17e},{:.17e}\n",
            current,
            grad.norm(),
            min_eig
        ));
        let step = damped.clone().lu().solve(&grad).ok_or_else(|| {
            Error::Numerical(
                "singular information matrix in NGD update; set a positive damping".into(),
            )
        })?;
        if cfg.damping == 0.0 && min_eig < 1e-12 {
            return Err(Error::Numerical(
                "near-singular information matrix in NGD update; set a positive damping".into(),
            ));
        }
        for i in 0..l {
            theta[i] -= cfg.learning_rate * step[i];
        }
    }
    let mut out = String::new();
    out.push_str(&format!("# config_hash: {hash}\n"));
    out.push_str(&csv);
    let path = cli.out.join("ngd_log.csv");
    std::fs::write(&path, out)?;
    println!(
        "final theta: {:?}, final loss: {final_loss:.3e}, log: {}",
        theta,
        path.display()
    );
    Ok(0)
}

fn cmd_densities(cli: &Cli) -> Result<i32> {
    let (alpha, z, n, hash) = match &cli.config {
        Some(_) => {
            let text = load_config_text(cli)?;
            let cfg = RunConfig::from_json(&text)?;
            let p = cfg
                .kernel
                .renyi_params()
                .ok_or_else(|| Error::Config("densities need a Rényi kernel (α, z)".into()))?;
            (
                cli.alpha.unwrap_or(p.alpha),
                cli.z.unwrap_or(p.z),
                cfg.grid_points,
                config_hash(&text),
            )
        }
        None => (
            cli.alpha.unwrap_or(0.5),
            cli.z.unwrap_or(1.0),
            201,
            config_hash(""),
        ),
    };
    let p = RenyiParams::new(alpha, z)?;
    let w = default_window(z);
    let grid: Vec<f64> = (0..n)
        .map(|i| -w + 2.0 * w * i as f64 / (n - 1) as f64)
        .collect();
    let q = convolve_densities(alpha, z, &grid)?;
    let mut csv = format!("# config_hash: {hash}\nt,p,p_alpha_z,q_alpha_z\n");
    for (t, qv) in grid.iter().zip(&q) {
        csv.push_str(&format!(
            "{t},{:.17e},{:.17e},{qv:.17e}\n",
            high_peak_tent(*t),
            alpha_z_tent(*t, p)?
        ));
    }
    std::fs::write(cli.out.join("densities.csv"), csv)?;

    let kernel = ZetaKernel::alpha_z(p);
    let mut wcsv = format!("# config_hash: {hash}\nomega,f_alpha_z,g_hat\n");
    for i in 0..n {
        let omega = -10.0 + 20.0 * i as f64 / (n - 1) as f64;
        wcsv.push_str(&format!(
            "{omega},{:.17e},{:.17e}\n",
            char_fn_alpha_z(omega, p)?,
            thermal_weight(omega, &kernel)
        ));
    }
    std::fs::write(cli.out.join("weights.csv"), wcsv)?;
    println!("wrote densities.csv and weights.csv in {}", cli.out.display());
    Ok(0)
}
