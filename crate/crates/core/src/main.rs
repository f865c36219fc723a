use std::fs;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use log::info;

use ballproj::experiments::{run_config, ExperimentConfig};
use ballproj::moments::{MomentTable, WeightParam};
use ballproj::orthospace::{build_basis, BasisOptions, OrthoBasis};
use ballproj::polyalg::monomials_up_to;
use ballproj::quadrature::BallRule;
use ballproj::verify::{
    jacobi_basis_crosscheck, jacobi_identity_checks, markov_sweep, ops_checks, precision_scaling, radial_markov_sweep,
    run_identity_suite, SuiteConfig,
};
use ballproj::{Error, Result};

const THREADS_VAR: &str = "BALLPROJ_THREADS";
const OUT_DIR_VAR: &str = "BALLPROJ_OUT_DIR";

#[derive(Parser)]
#[command(
    name = "ballproj",
    version,
    about = "Weighted orthogonal polynomial projections on the unit ball"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run the identity suite and print one JSON object per check.
    Verify(VerifyArgs),
    /// Run the projection-error rate experiments of a JSON config.
    Rates(RatesArgs),
    /// Build and export a basis, or load and recertify an exported one.
    Basis(BasisArgs),
    /// Sweep the Markov-type constants over n = 0..=n_max.
    Markov(MarkovArgs),
    /// Dump closed-form monomial moments.
    Moments(MomentsArgs),
    /// Dump a quadrature rule for audit.
    Rule(RuleArgs),
}

#[derive(Args)]
struct WeightArgs {
    #[arg(short, long)]
    dim: usize,
    #[arg(short, long, allow_negative_numbers = true)]
    alpha: f64,
}

impl WeightArgs {
    fn weight(&self) -> Result<WeightParam> {
        WeightParam::new(self.dim, self.alpha)
    }
}

#[derive(Args)]
struct VerifyArgs {
    /// Dimensions to check.
    #[arg(long, value_delimiter = ',', default_values_t = vec![1usize, 2, 3])]
    dims: Vec<usize>,
    /// Weight parameters to check.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true, default_values_t = vec![-0.5, 0.0, 1.0, 2.5])]
    alphas: Vec<f64>,
    /// Highest degree for d = 1, 2, 3.
    #[arg(long, value_delimiter = ',', default_values_t = vec![10usize, 10, 8])]
    k_max: Vec<usize>,
    /// Also rebuild every basis at doubled precision and compare residuals.
    #[arg(long)]
    scaling: bool,
    /// Also run the one-dimensional Jacobi cross-checks.
    #[arg(long)]
    jacobi: bool,
    /// Only recertify exported bases (orthogonality checks on the loaded file).
    #[arg(long = "basis", value_name = "FILE")]
    bases: Vec<PathBuf>,
}

#[derive(Args)]
struct RatesArgs {
    #[arg(short, long)]
    config: PathBuf,
    /// Output directory; overrides BALLPROJ_OUT_DIR.
    #[arg(short, long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BasisArgs {
    /// Load an exported basis, recertify it and print its header.
    #[arg(long, value_name = "FILE", conflicts_with_all = ["dim", "alpha", "degree"])]
    load: Option<PathBuf>,
    #[arg(short, long, required_unless_present = "load")]
    dim: Option<usize>,
    #[arg(short, long, allow_negative_numbers = true, required_unless_present = "load")]
    alpha: Option<f64>,
    #[arg(short = 'n', long, required_unless_present = "load")]
    degree: Option<usize>,
    #[arg(long, default_value_t = BasisOptions::default().tolerance)]
    tolerance: f64,
    /// Write here instead of stdout.
    #[arg(short, long)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct MarkovArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(short = 'n', long, default_value_t = 20)]
    n_max: usize,
    /// Derivative order.
    #[arg(short, long, default_value_t = 1)]
    order: usize,
    #[arg(long, default_value_t = 4)]
    fit_start: usize,
    /// Build the orthonormal basis instead of using the radial splitting
    /// (always used for order > 1).
    #[arg(long)]
    basis_route: bool,
}

#[derive(Args)]
struct MomentsArgs {
    #[command(flatten)]
    weight: WeightArgs,
    /// Largest total degree.
    #[arg(short = 'n', long)]
    degree: u32,
    #[arg(long, default_value_t = 128)]
    bits: u32,
}

#[derive(Args)]
struct RuleArgs {
    #[command(flatten)]
    weight: WeightArgs,
    #[arg(short, long)]
    exactness: usize,
}

fn configure_threads() {
    let Ok(v) = std::env::var(THREADS_VAR) else { return };
    match v.parse::<usize>() {
        Ok(n) if n > 0 => {
            if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(n).build_global() {
                log::warn!("{THREADS_VAR}: {e}");
            }
        }
        _ => log::warn!("{THREADS_VAR}={v} ignored; expected a positive integer"),
    }
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("warn")).init();
    configure_threads();
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Verify(a) => verify(a),
        Command::Rates(a) => rates(a),
        Command::Basis(a) => basis(a),
        Command::Markov(a) => markov(a),
        Command::Moments(a) => moments(a),
        Command::Rule(a) => rule(a),
    };
    match result {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}

fn verify(a: VerifyArgs) -> Result<bool> {
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    if !a.bases.is_empty() {
        let mut ok = true;
        for path in &a.bases {
            let b = OrthoBasis::parse_text(&fs::read_to_string(path)?)?;
            for r in ops_checks(&b, b.max_degree())? {
                ok &= r.pass;
                writeln!(out, "{}", r.to_json_line())?;
            }
        }
        out.flush()?;
        return Ok(ok);
    }
    let [k1, k2, k3] = a.k_max[..] else {
        return Err(Error::InvalidArgument(
            "--k-max takes three comma-separated degrees".into(),
        ));
    };
    let cfg = SuiteConfig {
        dims: a.dims,
        alphas: a.alphas,
        k_max: [k1, k2, k3],
        ..SuiteConfig::default()
    };
    let suite = run_identity_suite(&cfg);
    let mut ok = suite.all_pass();
    for r in &suite.reports {
        writeln!(out, "{}", r.to_json_line())?;
    }
    if a.jacobi && cfg.dims.contains(&1) {
        for &alpha in &cfg.alphas {
            let mut reports = jacobi_identity_checks(alpha, 20)?;
            reports.extend(jacobi_basis_crosscheck(alpha, 20, &cfg.basis)?);
            for r in reports {
                ok &= r.pass;
                writeln!(out, "{}", r.to_json_line())?;
            }
        }
    }
    if a.scaling {
        for s in precision_scaling(&cfg, &suite) {
            ok &= s.pass;
            writeln!(out, "{}", serde_json::to_string(&s)?)?;
        }
    }
    out.flush()?;
    info!("{} suite reports, all pass: {ok}", suite.reports.len());
    Ok(ok)
}

fn out_dir(flag: Option<PathBuf>) -> PathBuf {
    flag.or_else(|| std::env::var_os(OUT_DIR_VAR).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("ballproj-out"))
}

fn rates(a: RatesArgs) -> Result<bool> {
    let cfg = ExperimentConfig::load(&a.config)?;
    let dir = out_dir(a.out);
    fs::create_dir_all(&dir)?;
    let summary = run_config(&cfg);
    for r in &summary.reports {
        write_file(&dir.join(format!("{}.csv", r.id())), &r.to_csv()?)?;
    }
    write_file(&dir.join("summary.json"), &serde_json::to_string_pretty(&summary)?)?;
    for f in &summary.failures {
        eprintln!("failure: {f}");
    }
    let mut text = String::new();
    for r in &summary.reports {
        let slope = r.fitted_slope.map_or("n/a".to_string(), |s| format!("{s:.3}"));
        text += &format!(
            "{} slope={slope} bound_exponent={} compliant={}\n",
            r.id(),
            r.bound_exponent,
            r.compliance
        );
    }
    text += &format!("wrote {} reports to {}\n", summary.reports.len(), dir.display());
    emit(&text)?;
    Ok(summary.all_compliant)
}

fn emit(text: &str) -> Result<()> {
    io::stdout().lock().write_all(text.as_bytes())?;
    Ok(())
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text)?;
    Ok(())
}

fn basis(a: BasisArgs) -> Result<bool> {
    if let Some(path) = a.load {
        let b = OrthoBasis::parse_text(&fs::read_to_string(&path)?)?;
        let ok = b.certificate() <= a.tolerance;
        emit(&format!(
            "d {} alpha {} max_degree {} precision_bits {} certificate {:e}\n",
            b.dim(),
            b.weight().alpha(),
            b.max_degree(),
            b.precision(),
            b.certificate()
        ))?;
        return Ok(ok);
    }
    let (Some(d), Some(alpha), Some(n)) = (a.dim, a.alpha, a.degree) else {
        unreachable!("clap enforces the build arguments")
    };
    let opts = BasisOptions {
        tolerance: a.tolerance,
        ..BasisOptions::default()
    };
    let b = build_basis(WeightParam::new(d, alpha)?, n, &opts)?;
    let text = b.to_text();
    match a.output {
        Some(p) => write_file(&p, &text)?,
        None => emit(&text)?,
    }
    Ok(true)
}

fn markov(a: MarkovArgs) -> Result<bool> {
    let w = a.weight.weight()?;
    let s = if a.order == 1 && !a.basis_route {
        radial_markov_sweep(w, a.n_max, a.fit_start)?
    } else {
        markov_sweep(w, a.n_max, a.order, a.fit_start, &BasisOptions::default())?
    };
    emit(&(serde_json::to_string_pretty(&s)? + "\n"))?;
    Ok(true)
}

fn moments(a: MomentsArgs) -> Result<bool> {
    let w = a.weight.weight()?;
    let table = MomentTable::new(w, a.bits);
    let stdout = io::stdout();
    let mut out = BufWriter::new(stdout.lock());
    writeln!(out, "# d {} alpha {} bits {}", w.dim(), w.alpha(), a.bits)?;
    for g in monomials_up_to(w.dim(), a.degree) {
        let exps: Vec<String> = g.exponents().map(|e| e.to_string()).collect();
        writeln!(out, "{} {}", exps.join(" "), table.moment(&g)?)?;
    }
    out.flush()?;
    Ok(true)
}

fn rule(a: RuleArgs) -> Result<bool> {
    let r = BallRule::build(a.weight.weight()?, a.exactness)?;
    emit(&r.to_text())?;
    Ok(true)
}
