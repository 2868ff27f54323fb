//! `kleinwave`: solve Cauchy problems for `u_xx - u_tt - q(x) u = 0`,
//! reproduce the built-in examples, tabulate bases and validate the
//! transmutation kernel.

mod config;
mod error;
mod output;
mod validate;

use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::sync::Arc;

use clap::{Parser, Subcommand, ValueEnum};
use kleinwave::basis::{build_basis_capped, f_derivative, DEFAULT_ORDER_CAP};
use kleinwave::basis::{build_basis_with_slope, SampledFunction, DEFAULT_INTERP_ORDER};
use kleinwave::cauchy::{
    evaluate_on_triangle, mesh_residual, select_order, solve, solve_with_basis, CauchyProblem,
    GeneralizedWaveSolution, SolveOptions, Strategy, DEFAULT_MESH_DIVISIONS,
};
use kleinwave::problems::{self, ExampleId};
use kleinwave::spps::particular_solution;
use kleinwave::transmute::{apply_t, build_kernel, DEFAULT_KERNEL_TOL};
use serde_json::json;

use crate::config::{env_grid_n, Config, Orders, DEFAULT_PRECISION};
use crate::error::CliError;
use crate::output::{num, write_data_errors, write_json, write_solution, CsvWriter};

#[derive(Parser)]
#[command(
    name = "kleinwave",
    version,
    about = "Klein-Gordon Cauchy problems via generalized wave polynomials"
)]
struct Cli {
    /// More log output (-v info, -vv debug).
    #[arg(short, long, action = clap::ArgAction::Count, global = true)]
    verbose: u8,

    /// Significant digits of emitted numbers (1..=17).
    #[arg(long, global = true, value_parser = clap::value_parser!(u8).range(1..=17))]
    precision: Option<u8>,

    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the problem described by a JSON config.
    Solve {
        #[arg(long)]
        config: PathBuf,
        /// Output directory.
        #[arg(long, default_value = ".")]
        out: PathBuf,
        /// Fail on Remez stagnation instead of keeping the best iterate.
        #[arg(long)]
        strict: bool,
    },
    /// Run a built-in example and compare against its exact solution.
    Example {
        #[arg(value_enum)]
        name: ExampleArg,
        #[arg(long, value_enum)]
        strategy: Option<StrategyArg>,
        /// Order for g; h gets n - 1.
        #[arg(long)]
        n: Option<usize>,
        #[arg(long)]
        n_g: Option<usize>,
        #[arg(long)]
        n_h: Option<usize>,
        #[arg(long, default_value = ".")]
        out: PathBuf,
        #[arg(long)]
        strict: bool,
    },
    /// Tabulate f and phi_k and report ladder-identity residuals.
    Basis {
        #[arg(long)]
        config: PathBuf,
        #[arg(long, default_value = ".")]
        out: PathBuf,
    },
    /// Check the transmutation kernel and operator identities.
    Validate {
        /// Coarser kernel and fewer powers.
        #[arg(long)]
        quick: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum ExampleArg {
    Ex1,
    Ex2,
    Ex3,
}

impl From<ExampleArg> for ExampleId {
    fn from(e: ExampleArg) -> Self {
        match e {
            ExampleArg::Ex1 => ExampleId::Ex1,
            ExampleArg::Ex2 => ExampleId::Ex2,
            ExampleArg::Ex3 => ExampleId::Ex3,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum StrategyArg {
    Taylor,
    Remez,
    Lp,
}

impl From<StrategyArg> for Strategy {
    fn from(s: StrategyArg) -> Self {
        match s {
            StrategyArg::Taylor => Strategy::Taylor,
            StrategyArg::Remez => Strategy::Remez,
            StrategyArg::Lp => Strategy::Lp,
        }
    }
}

fn main() -> ExitCode {
    // usage errors share the configuration exit code
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => "warn",
        1 => "info",
        _ => "debug",
    };
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or(level)).init();
    let digits = cli.precision.map(usize::from);
    let result = match cli.command {
        Command::Solve {
            config,
            out,
            strict,
        } => cmd_solve(&config, &out, strict, digits),
        Command::Example {
            name,
            strategy,
            n,
            n_g,
            n_h,
            out,
            strict,
        } => cmd_example(
            name.into(),
            strategy.map(Into::into),
            (n, n_g, n_h),
            &out,
            strict,
            digits,
        ),
        Command::Basis { config, out } => cmd_basis(&config, &out, digits),
        Command::Validate { quick } => cmd_validate(quick),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

struct RunSummary {
    sol: GeneralizedWaveSolution,
    n_g: usize,
    n_h: usize,
    max_error: Option<f64>,
}

/// Solves, evaluates on the triangle and writes the solution, data-error
/// and certificate files under `name`.
fn run_and_write(
    problem: &CauchyProblem,
    opts: &SolveOptions,
    name: &str,
    out: &Path,
    mesh_step: f64,
    digits: usize,
) -> Result<RunSummary, CliError> {
    ensure_dir(out)?;
    let sol = solve(problem, opts)?;
    write_run(problem, sol, opts, name, out, mesh_step, digits)
}

fn write_run(
    problem: &CauchyProblem,
    sol: GeneralizedWaveSolution,
    opts: &SolveOptions,
    name: &str,
    out: &Path,
    mesh_step: f64,
    digits: usize,
) -> Result<RunSummary, CliError> {
    let values = evaluate_on_triangle(&sol, mesh_step)?;
    let exact = problem
        .exact
        .as_deref()
        .map(|f| f as &(dyn Fn(f64, f64) -> _ + Sync));
    let max_error = write_solution(
        out.join(format!("{name}_solution.csv")),
        &values,
        exact,
        digits,
    )?;
    write_data_errors(
        out.join(format!("{name}_data_errors.csv")),
        problem,
        &sol,
        digits,
    )?;
    let residual = mesh_residual(&values, sol.q());
    let cert = &sol.certificate;
    let h = sol.basis.h();
    write_json(
        &out.join(format!("{name}_certificate.json")),
        json!({
            "name": name,
            "strategy": opts.strategy.to_string(),
            "n_g": opts.n_g,
            "n_h": opts.n_h,
            "grid_n": problem.q.grid().intervals(),
            "b": problem.b(),
            "f_slope": [h.re, h.im],
            "complex_shift": sol.complex_shift,
            "eps1": cert.eps1,
            "eps2": cert.eps2,
            "norm_T_bound": cert.norm_t_bound,
            "norm_T_inv_bound": cert.norm_t_inv_bound,
            "total": cert.total,
            "g_converged": sol.g_fit.converged,
            "h_converged": sol.h_fit.converged,
            "mesh_step": values.mesh.step(),
            "mesh_points": values.mesh.len(),
            "max_abs_u": values.max_abs(),
            "pde_residual": residual,
            "observed_max_error": max_error,
        }),
        digits,
    )?;
    Ok(RunSummary {
        n_g: opts.n_g,
        n_h: opts.n_h,
        sol,
        max_error,
    })
}

fn print_summary(name: &str, strategy: Strategy, s: &RunSummary, digits: usize) {
    let d = digits.min(6);
    println!("{name} ({strategy}, n_g = {}, n_h = {})", s.n_g, s.n_h);
    println!("  eps_g        {}", num(s.sol.g_fit.max_error, d));
    println!("  eps_h        {}", num(s.sol.h_fit.max_error, d));
    println!("  certificate  {}", num(s.sol.certificate.total, d));
    if let Some(e) = s.max_error {
        println!("  max |u-u_N|  {}", num(e, d));
    }
}

fn cmd_solve(path: &Path, out: &Path, strict: bool, digits: Option<usize>) -> Result<(), CliError> {
    let cfg = Config::load(path)?;
    let digits = digits.unwrap_or(cfg.precision());
    let problem = cfg.problem()?;
    let strategy = cfg.strategy()?;
    let name = cfg.name().to_string();
    let summary = match cfg.orders()? {
        Orders::Fixed(n_g, n_h) => {
            let mut opts = cfg.solve_options(strategy, n_g, n_h)?;
            opts.strict |= strict;
            run_and_write(&problem, &opts, &name, out, cfg.mesh_step(), digits)?
        }
        Orders::Auto(n_max) => {
            ensure_dir(out)?;
            let ps = particular_solution(&problem.q, problem.slope)?;
            let basis = Arc::new(build_basis_with_slope(&ps.f, ps.h, n_max)?);
            let mut opts = cfg.solve_options(strategy, 0, 0)?;
            opts.strict |= strict;
            opts.n_g = select_order(&problem.g, &basis, &opts, n_max)?;
            opts.n_h = select_order(&problem.h_data, &basis, &opts, n_max)?;
            log::info!("selected orders n_g = {}, n_h = {}", opts.n_g, opts.n_h);
            let mut sol = solve_with_basis(&problem, basis, &opts)?;
            sol.complex_shift = ps.complex_shift;
            write_run(&problem, sol, &opts, &name, out, cfg.mesh_step(), digits)?
        }
    };
    print_summary(&name, strategy, &summary, digits);
    Ok(())
}

fn cmd_example(
    id: ExampleId,
    strategy: Option<Strategy>,
    (n, n_g, n_h): (Option<usize>, Option<usize>, Option<usize>),
    out: &Path,
    strict: bool,
    digits: Option<usize>,
) -> Result<(), CliError> {
    let digits = digits.unwrap_or(DEFAULT_PRECISION);
    let strategy = strategy.unwrap_or(id.default_strategy());
    let (dg, dh) = match n {
        Some(n) => (n, n.saturating_sub(1)),
        None => id.orders(strategy),
    };
    let problem = problems::example(id, env_grid_n()?)?;
    let step = problem.b() / DEFAULT_MESH_DIVISIONS as f64;
    let mut opts = SolveOptions::orders(strategy, n_g.unwrap_or(dg), n_h.unwrap_or(dh));
    opts.strict = strict;
    let name = id.name();
    let main = run_and_write(&problem, &opts, name, out, step, digits)?;
    print_summary(name, strategy, &main, digits);

    let mut runs = vec![(strategy, main)];
    if strategy != Strategy::Taylor {
        let (tg, th) = id.orders(Strategy::Taylor);
        let topts = SolveOptions::orders(Strategy::Taylor, tg, th);
        let sol = solve(&problem, &topts)?;
        let values = evaluate_on_triangle(&sol, step)?;
        let max_error = problem.exact.as_ref().map(|f| values.max_error(f.as_ref()));
        let taylor = RunSummary {
            sol,
            n_g: tg,
            n_h: th,
            max_error,
        };
        print_summary(name, Strategy::Taylor, &taylor, digits);
        runs.push((Strategy::Taylor, taylor));
    }
    let mut w = CsvWriter::create(
        out.join(format!("{name}_comparison.csv")),
        &[
            "strategy",
            "n_g",
            "n_h",
            "eps_g",
            "eps_h",
            "max_abs_err",
            "certificate",
        ],
        digits,
    )?;
    for (s, r) in &runs {
        w.labelled_row(
            &[&s.to_string(), &r.n_g.to_string(), &r.n_h.to_string()],
            &[
                r.sol.g_fit.max_error,
                r.sol.h_fit.max_error,
                r.max_error.unwrap_or(f64::NAN),
                r.sol.certificate.total,
            ],
        )?;
    }
    w.finish()?;
    Ok(())
}

fn cmd_basis(path: &Path, out: &Path, digits: Option<usize>) -> Result<(), CliError> {
    let cfg = Config::load(path)?;
    let digits = digits.unwrap_or(cfg.precision());
    let n = cfg
        .n
        .ok_or_else(|| CliError::config("n", "missing field `n` (basis order)"))?;
    let grid = cfg.grid()?;
    let q = cfg.sample("q", &cfg.q, grid)?;
    let ps = particular_solution(&q, cfg.slope.value())?;
    let basis = build_basis_capped(&ps.f, ps.h, n, DEFAULT_ORDER_CAP)?;
    ensure_dir(out)?;
    let name = cfg.name();

    let mut header = vec!["x".to_string()];
    for k in 0..=n {
        header.push(format!("re_phi_{k}"));
        header.push(format!("im_phi_{k}"));
    }
    let header: Vec<&str> = header.iter().map(String::as_str).collect();
    let mut w = CsvWriter::create(out.join(format!("{name}_basis.csv")), &header, digits)?;
    for (i, x) in grid.nodes().into_iter().enumerate() {
        let mut row = vec![x];
        for p in basis.phis() {
            row.push(p.values()[i].re);
            row.push(p.values()[i].im);
        }
        w.row(&row)?;
    }
    w.finish()?;

    let mut ladder = Vec::new();
    let mut worst = 0.0f64;
    for k in 1..=n {
        let d1 = f_derivative(basis.phi(k), &basis, 1)?;
        let want1 = basis.psi(k - 1).scale((k as f64).into())?;
        let r1 = d1.max_diff(&want1)? / want1.max_abs();
        let r2 = if k >= 2 {
            let d2 = f_derivative(basis.phi(k), &basis, 2)?;
            let want2 = basis.phi(k - 2).scale(((k * (k - 1)) as f64).into())?;
            Some(d2.max_diff(&want2)? / want2.max_abs())
        } else {
            None
        };
        worst = worst.max(r1).max(r2.unwrap_or(0.0));
        ladder.push(json!({"k": k, "d1_rel": r1, "d2_rel": r2}));
    }
    let mut report = json!({
        "name": name,
        "n": n,
        "grid_n": grid.intervals(),
        "f_slope": [basis.h().re, basis.h().im],
        "complex_shift": ps.complex_shift,
        "min_abs_f": basis.f().min_abs(),
        "max_abs_f": basis.f().max_abs(),
        "ladder": ladder,
        "max_ladder_rel": worst,
    });
    if let Some(m) = cfg.kernel_m {
        let kernel = build_kernel(&q, basis.h(), m, DEFAULT_KERNEL_TOL)?;
        let mut mapping = Vec::new();
        for k in 0..=n.min(8) {
            let xk =
                SampledFunction::from_real_fn(grid, DEFAULT_INTERP_ORDER, |x| x.powi(k as i32))?;
            let rel = apply_t(&kernel, &xk)?.max_diff(basis.phi(k))? / basis.phi(k).max_abs();
            mapping.push(json!({"k": k, "t_xk_vs_phi_rel": rel}));
        }
        report["kernel_M"] = json!(m);
        report["mapping"] = json!(mapping);
    }
    write_json(
        &out.join(format!("{name}_basis_report.json")),
        report,
        digits,
    )?;
    println!(
        "basis of order {n}: min |f| = {}, max ladder residual = {}",
        num(basis.f().min_abs(), 6),
        num(worst, 3)
    );
    Ok(())
}

fn cmd_validate(quick: bool) -> Result<(), CliError> {
    let checks = validate::run(env_grid_n()?, quick)?;
    let width = checks.iter().map(|c| c.name.len()).max().unwrap_or(0);
    let mut failed = 0;
    for c in &checks {
        let status = if c.passed() { "PASS" } else { "FAIL" };
        failed += usize::from(!c.passed());
        println!(
            "{status}  {:<width$}  {:>10}  (tol {})",
            c.name,
            num(c.value, 3),
            num(c.tol, 1)
        );
    }
    if failed > 0 {
        return Err(CliError::Validation(failed));
    }
    Ok(())
}
