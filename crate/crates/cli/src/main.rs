use anyhow::{bail, Context, Result};
use clap::{Parser, Subcommand};
use smoothcg::bounds::{theorem1_bound, BoundPart};
use smoothcg::ensembles::mp_quantiles;
use smoothcg::experiments::{
    fit_growth, read_curves, run_plan, sample_mean_curve, tail_check, write_curves, write_failures, write_fit,
    write_records, ExperimentPlan, Field, TailQuantity,
};
use std::fs::File;
use std::io::BufWriter;
use std::path::PathBuf;

#[derive(Parser)]
#[command(name = "smoothcg", version, about = "CG halting times under random perturbations")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Run a Monte Carlo plan; writes records.csv, curves.csv and plan.txt.
    Run {
        #[arg(long)]
        plan: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long)]
        workers: Option<usize>,
        /// Overrides master_seed from the plan file.
        #[arg(long)]
        seed: Option<u64>,
    },
    /// Fit `a N^p log N + b N^p` (a, b >= 0) to a curves file.
    Fit {
        #[arg(long)]
        curve: PathBuf,
        #[arg(long)]
        p: f64,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value = "tau_l2")]
        field: String,
        /// Plan file whose digest is stored with the fit.
        #[arg(long)]
        plan: Option<PathBuf>,
    },
    /// Evaluate the leading-order moment bound.
    Bounds {
        #[arg(long)]
        part: String,
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        c: f64,
        /// Positive number or `inf`.
        #[arg(long)]
        sigma: f64,
        #[arg(long)]
        eps: f64,
        #[arg(long, default_value_t = 1)]
        j: u32,
    },
    /// Compare empirical LUE tails with the tail estimates.
    TailCheck {
        #[arg(long = "N")]
        n: usize,
        #[arg(long)]
        gamma: f64,
        #[arg(long)]
        c: f64,
        #[arg(long)]
        d: f64,
        #[arg(long)]
        samples: usize,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Marchenko-Pastur quantiles zeta_1..zeta_k.
    MpQuantiles {
        #[arg(long)]
        k: usize,
        #[arg(long, default_value_t = 1e-12)]
        tol: f64,
    },
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Run { plan, out, workers, seed } => run(plan, out, workers, seed),
        Cmd::Fit { curve, p, out, field, plan } => fit(curve, p, out, &field, plan),
        Cmd::Bounds { part, n, gamma, c, sigma, eps, j } => {
            let part: BoundPart = part.parse()?;
            println!("{:.16e}", theorem1_bound(part, j, n, gamma, c, sigma, eps)?);
            Ok(())
        }
        Cmd::TailCheck { n, gamma, c, d, samples, seed } => {
            if samples == 0 {
                bail!("--samples must be positive");
            }
            let tc = tail_check(n, gamma, c, d, samples, seed)?;
            println!("# N={} alpha={} d={} samples={}", tc.n, tc.alpha, tc.d, tc.samples);
            println!("quantity,t,empirical,stderr,unit_bound,valid");
            for p in &tc.points {
                println!(
                    "{},{:.6e},{:.6e},{:.3e},{:.6e},{}",
                    p.quantity, p.t, p.empirical, p.stderr, p.unit_bound, p.valid
                );
            }
            for q in [TailQuantity::LambdaMax, TailQuantity::InvLambdaMin, TailQuantity::Kappa] {
                println!("# calibrated C[{q}] = {:.4}", tc.calibrated_c(q));
            }
            Ok(())
        }
        Cmd::MpQuantiles { k, tol } => {
            for z in mp_quantiles(k, tol)? {
                println!("{z:.16e}");
            }
            Ok(())
        }
    }
}

fn run(plan_path: PathBuf, out: PathBuf, workers: Option<usize>, seed: Option<u64>) -> Result<()> {
    let mut plan = ExperimentPlan::from_path(&plan_path).with_context(|| format!("reading {}", plan_path.display()))?;
    if let Some(s) = seed {
        plan.master_seed = s;
    }
    std::fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
    let result = run_plan(&plan, workers)?;
    write_records(BufWriter::new(File::create(out.join("records.csv"))?), &result.records)?;
    let mut curve = sample_mean_curve(&result.records, Field::TauL2);
    curve.extend(sample_mean_curve(&result.records, Field::TauW));
    write_curves(BufWriter::new(File::create(out.join("curves.csv"))?), &curve)?;
    std::fs::write(out.join("plan.txt"), plan.canonical())?;
    if !result.failures.is_empty() {
        write_failures(BufWriter::new(File::create(out.join("failures.csv"))?), &result.failures)?;
        eprintln!("warning: {} samples failed; see failures.csv", result.failures.len());
    }
    println!(
        "{} records, {} failures, plan digest {}",
        result.records.len(),
        result.failures.len(),
        plan.digest()
    );
    Ok(())
}

fn fit(curve_path: PathBuf, p: f64, out: PathBuf, field: &str, plan: Option<PathBuf>) -> Result<()> {
    let field: Field = field.parse()?;
    let curve = read_curves(File::open(&curve_path).with_context(|| format!("opening {}", curve_path.display()))?)?;
    let curve: Vec<_> = curve.into_iter().filter(|c| c.field == field).collect();
    let mut result = fit_growth(&curve, p)?;
    if let Some(path) = plan {
        result.plan_digest = Some(ExperimentPlan::from_path(&path)?.digest());
    }
    write_fit(&out, &result)?;
    println!("a = {:.6}, b = {:.6}, residual_norm = {:.6e}", result.a, result.b, result.residual_norm);
    Ok(())
}
