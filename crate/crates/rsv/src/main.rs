//! Command-line front end: wires problem files to the solver pipelines and
//! writes JSON reports plus CSV dumps.
//!
//! Exit codes: 0 success, 1 condition/validation failure, 2 numerical
//! failure, 3 configuration error.

use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Parser, Subcommand};
use num_complex::Complex64;
use serde::Serialize;
use serde_json::json;

use rsv::error::{Error, Result};
use rsv::grid::NormParams;
use rsv::kernels::{estimate_gamma, verify_diag, verify_reg_p, verify_sing, KernelRef};
use rsv::laplace::{fractional_integral, verify_dictionary};
use rsv::level1::{
    borel_sum, build_kernels, choose_ray, singular_points, solve_at, validate_problem,
    ProblemInput, ResummedSolution, SingularPoint,
};
use rsv::proto::{
    base_point_invariance, compute_prototype, verify_fixed_point,
};
use rsv::solver::{
    extract_series_coefficients, series_oracle, solve_homogeneous, uniqueness_probe,
};
use rsv::volterra::{beta_moment, smoothing_order, OperatorHandle};
use rsv::grid::SingularFunction;
use rsv::poly::Poly;

#[derive(Parser)]
#[command(name = "rsv", about = "Regular singular Volterra solver with ray Laplace resummation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    /// Problem definition (JSON).
    #[arg(long, global = true)]
    problem: Option<PathBuf>,
    /// Output directory for reports and CSV dumps.
    #[arg(long, global = true, default_value = "out")]
    out: PathBuf,
    /// Random seed for contraction trials.
    #[arg(long, global = true)]
    seed: Option<u64>,
    /// Solver tolerance override.
    #[arg(long, global = true)]
    tol: Option<f64>,
    /// Exponent window override (0 = automatic).
    #[arg(long, global = true)]
    rho: Option<f64>,
    /// Weight rate override (0 = automatic search).
    #[arg(long, global = true)]
    lambda: Option<f64>,
    /// Ray direction override, radians.
    #[arg(long, global = true)]
    theta: Option<f64>,
    /// Number of geometric panels (sets the smallest panel boundary).
    #[arg(long = "grid-panels", global = true)]
    grid_panels: Option<u32>,
    /// Chebyshev nodes per panel.
    #[arg(long = "nodes-per-panel", global = true)]
    nodes_per_panel: Option<usize>,
    /// Frequency samples as "re,im;re,im;...".
    #[arg(long, global = true)]
    z: Option<String>,
}

#[derive(Subcommand)]
enum Command {
    /// Structural validation of the problem data.
    Validate,
    /// Prototype solution at each admissible singular point.
    Proto,
    /// Position-domain solve at each admissible singular point.
    Solve,
    /// Solve and Laplace-transform at the configured frequency samples.
    Laplace,
    /// Full pipeline: solve, transform, and check the ODE residual.
    Level1,
    /// Condition reports and property suites, printed as a pass/fail matrix.
    VerifyAll,
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) if matches!(
            e.kind(),
            clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion
        ) =>
        {
            let _ = e.print();
            return ExitCode::SUCCESS;
        }
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(3);
        }
    };
    if let Ok(threads) = std::env::var("RSV_THREADS") {
        if let Ok(n) = threads.parse::<usize>() {
            let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
        }
    }
    match run(&cli) {
        Ok(code) => code,
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn load_input(cli: &Cli) -> Result<ProblemInput> {
    let path = cli
        .problem
        .as_ref()
        .ok_or_else(|| Error::ConfigError("--problem PATH is required".into()))?;
    let text = std::fs::read_to_string(path)
        .map_err(|e| Error::ConfigError(format!("cannot read {}: {e}", path.display())))?;
    let mut input: ProblemInput = serde_json::from_str(&text)
        .map_err(|e| Error::ConfigError(format!("malformed problem file: {e}")))?;
    if let Some(seed) = cli.seed {
        input.solver.seed = seed;
    }
    if let Some(tol) = cli.tol {
        input.solver.tol = tol;
    }
    if let Some(rho) = cli.rho {
        input.solver.rho = rho;
    }
    if let Some(lambda) = cli.lambda {
        input.solver.lambda = lambda;
    }
    if let Some(theta) = cli.theta {
        input.theta = Some(theta);
    }
    if let Some(npp) = cli.nodes_per_panel {
        input.grid.nodes_per_panel = npp;
    }
    if let Some(panels) = cli.grid_panels {
        input.grid.t_min = Some(input.grid.t_max / input.grid.ratio.powi(panels as i32));
    }
    if let Some(zs) = &cli.z {
        input.z_samples = parse_z(zs)?;
    }
    Ok(input)
}

fn parse_z(arg: &str) -> Result<Vec<[f64; 2]>> {
    arg.split(';')
        .filter(|s| !s.trim().is_empty())
        .map(|pair| {
            let parts: Vec<&str> = pair.split(',').collect();
            if parts.len() != 2 {
                return Err(Error::ConfigError(format!("bad z sample '{pair}'")));
            }
            let re = parts[0].trim().parse::<f64>();
            let im = parts[1].trim().parse::<f64>();
            match (re, im) {
                (Ok(re), Ok(im)) => Ok([re, im]),
                _ => Err(Error::ConfigError(format!("bad z sample '{pair}'"))),
            }
        })
        .collect()
}

fn write_out(dir: &Path, name: &str, content: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), content)?;
    Ok(())
}

fn write_report(dir: &Path, report: &serde_json::Value) -> Result<()> {
    write_out(dir, "report.json", &format!("{:#}\n", report))
}

/// Admissible points selected by the input (alpha_index or all).
fn selected_points(input: &ProblemInput) -> Result<Vec<SingularPoint>> {
    let points = singular_points(&input.problem)?;
    let admissible: Vec<SingularPoint> =
        points.iter().copied().filter(|p| p.admissible).collect();
    if admissible.is_empty() {
        return Err(Error::ConditionFailed {
            condition: "admissible-points".into(),
            detail: "no singular point has a real positive exponent".into(),
        });
    }
    match input.alpha_index {
        Some(i) => admissible
            .get(i)
            .copied()
            .map(|p| vec![p])
            .ok_or_else(|| Error::ConfigError(format!("alpha_index {i} out of range"))),
        None => Ok(admissible),
    }
}

fn run(cli: &Cli) -> Result<ExitCode> {
    let input = load_input(cli)?;
    match cli.command {
        Command::Validate => cmd_validate(cli, &input),
        Command::Proto => cmd_proto(cli, &input),
        Command::Solve => cmd_solve(cli, &input, false),
        Command::Laplace => cmd_solve(cli, &input, true),
        Command::Level1 => cmd_level1(cli, &input),
        Command::VerifyAll => cmd_verify_all(cli, &input),
    }
}

fn cmd_validate(cli: &Cli, input: &ProblemInput) -> Result<ExitCode> {
    let validation = validate_problem(&input.problem)?;
    let points = if validation.verified { singular_points(&input.problem)? } else { Vec::new() };
    let report = json!({
        "command": "validate",
        "config": input,
        "validation": validation,
        "singular_points": points,
    });
    write_report(&cli.out, &report)?;
    println!(
        "validate: {}",
        if validation.verified { "PASS".to_string() } else { format!("FAIL {:?}", validation.reasons) }
    );
    Ok(if validation.verified { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

fn require_valid(input: &ProblemInput) -> Result<()> {
    let validation = validate_problem(&input.problem)?;
    if !validation.verified {
        return Err(Error::ConditionFailed {
            condition: "validate".into(),
            detail: validation.reasons.join(", "),
        });
    }
    Ok(())
}

fn cmd_proto(cli: &Cli, input: &ProblemInput) -> Result<ExitCode> {
    require_valid(input)?;
    let points = selected_points(input)?;
    let mut entries = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let theta = choose_ray(&input.problem, point.alpha, input.theta, input.ray_margin)?;
        let kernel = build_kernels(&input.problem, point.alpha)?;
        let grid = input.grid.build(point.alpha, theta)?;
        let sigma = point.tau + 0.05;
        let sing = verify_sing(&kernel.k0, point.tau, sigma, &grid)?;
        let base_t = (sing.constants["delta"] / 2.0).clamp(grid.t_min(), grid.t_max());
        let mut proto = compute_prototype(&kernel.k0, point.tau, grid.clone(), base_t)?;
        let leading = proto.normalize()?;
        let op = OperatorHandle::new(kernel, grid, input.quadrature);
        let residual = verify_fixed_point(&proto, &op)?;
        write_out(&cli.out, &format!("f0_alpha{i}.csv"), &proto.f0.to_csv())?;
        let header = json!({
            "tau": point.tau,
            "M": {"re": leading.re, "im": leading.im},
            "base_t": base_t,
        });
        write_out(&cli.out, &format!("f0_alpha{i}.json"), &format!("{:#}\n", header))?;
        entries.push(json!({
            "alpha": point.alpha,
            "tau": point.tau,
            "theta": theta,
            "base_t": base_t,
            "leading": {"re": leading.re, "im": leading.im},
            "fixed_point_residual": residual,
        }));
        println!("proto alpha={}: residual {residual:.3e}", point.alpha);
    }
    let report = json!({"command": "proto", "config": input, "prototypes": entries});
    write_report(&cli.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

/// Window for expansion-coefficient fits: inside the convergence radius set
/// by the nearest other singular point, and small relative to the ray.
fn extraction_window(problem: &rsv::level1::Level1Problem, alpha: Complex64, t_max: f64) -> f64 {
    let nearest = singular_points(problem)
        .ok()
        .map(|pts| {
            pts.iter()
                .filter(|sp| (sp.alpha - alpha).norm() > 1e-10)
                .map(|sp| (sp.alpha - alpha).norm())
                .fold(f64::INFINITY, f64::min)
        })
        .unwrap_or(f64::INFINITY);
    (0.125 * t_max).min(0.4 * nearest)
}

#[derive(Serialize)]
struct SolveEntry {
    alpha: Complex64,
    tau: f64,
    theta: f64,
    rho: f64,
    lambda: f64,
    kappa: f64,
    contraction: rsv::volterra::ContractionEstimate,
    iterations: usize,
    solver_residual: f64,
    volterra_residual: f64,
    tau_mismatch: f64,
    leading_coefficients: Vec<[f64; 2]>,
    t_max: f64,
}

fn solve_point(
    input: &ProblemInput,
    point: &SingularPoint,
) -> Result<(ResummedSolution, SolveEntry)> {
    let theta = choose_ray(&input.problem, point.alpha, input.theta, input.ray_margin)?;
    let solved = solve_at(
        &input.problem,
        point,
        theta,
        &input.grid,
        input.quadrature,
        &input.solver,
    )?;
    let window = extraction_window(&input.problem, point.alpha, input.grid.t_max);
    let coeffs = extract_series_coefficients(&solved.solution.f, 9, window)
        .map(|cs| cs.iter().take(3).map(|c| [c.re, c.im]).collect())
        .unwrap_or_default();
    let entry = SolveEntry {
        alpha: point.alpha,
        tau: point.tau,
        theta,
        rho: solved.solution.rho,
        lambda: solved.solution.lambda,
        kappa: solved.solution.contraction.overall,
        contraction: solved.solution.contraction,
        iterations: solved.solution.iterations,
        solver_residual: solved.solution.final_residual,
        volterra_residual: solved.volterra_residual,
        tau_mismatch: solved.tau_mismatch,
        leading_coefficients: coeffs,
        t_max: input.grid.t_max,
    };
    Ok((solved, entry))
}

fn cmd_solve(cli: &Cli, input: &ProblemInput, with_laplace: bool) -> Result<ExitCode> {
    require_valid(input)?;
    let points = selected_points(input)?;
    let mut entries = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let (mut solved, entry) = solve_point(input, point)?;
        write_out(&cli.out, &format!("psi_alpha{i}.csv"), &solved.solution.f.to_csv())?;
        let mut value = serde_json::to_value(&entry)?;
        if with_laplace {
            borel_sum(
                &input.problem,
                &mut solved,
                &input.z_complex(),
                input.margin,
                None,
                &input.quadrature,
            )?;
            let laplace = solved.laplace.as_ref().unwrap();
            write_out(&cli.out, &format!("Psi_alpha{i}.csv"), &laplace.to_csv())?;
            value["laplace"] = serde_json::to_value(laplace)?;
            value["ode_residual"] = json!(solved.ode_residual);
        }
        println!(
            "solve alpha={}: {} iterations, residual {:.3e}",
            point.alpha, entry.iterations, entry.volterra_residual
        );
        entries.push(value);
    }
    let command = if with_laplace { "laplace" } else { "solve" };
    let report = json!({"command": command, "config": input, "solutions": entries});
    write_report(&cli.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

fn cmd_level1(cli: &Cli, input: &ProblemInput) -> Result<ExitCode> {
    require_valid(input)?;
    let points = selected_points(input)?;
    let mut entries = Vec::new();
    for (i, point) in points.iter().enumerate() {
        let (mut solved, entry) = solve_point(input, point)?;
        borel_sum(
            &input.problem,
            &mut solved,
            &input.z_complex(),
            input.margin,
            None,
            &input.quadrature,
        )?;
        let laplace = solved.laplace.as_ref().unwrap();
        write_out(&cli.out, &format!("psi_alpha{i}.csv"), &solved.solution.f.to_csv())?;
        write_out(&cli.out, &format!("Psi_alpha{i}.csv"), &laplace.to_csv())?;
        let mut value = serde_json::to_value(&entry)?;
        value["laplace"] = serde_json::to_value(laplace)?;
        value["ode_residual"] = json!(solved.ode_residual);
        println!(
            "level1 alpha={}: Psi({}) = {:?}, ode residual {:.3e}",
            point.alpha,
            laplace.z_samples[0],
            laplace.phi_values[0],
            solved.ode_residual.unwrap()
        );
        entries.push(value);
    }
    let report = json!({"command": "level1", "config": input, "solutions": entries});
    write_report(&cli.out, &report)?;
    Ok(ExitCode::SUCCESS)
}

struct Matrix {
    rows: Vec<(String, Option<bool>, String)>,
    prefix: String,
}

impl Matrix {
    fn new() -> Self {
        Matrix { rows: Vec::new(), prefix: String::new() }
    }

    fn set_prefix(&mut self, prefix: String) {
        self.prefix = prefix;
    }

    fn push(&mut self, name: &str, passed: bool, detail: String) {
        let name = format!("{}{name}", self.prefix);
        println!("{:<30} {}  {detail}", name, if passed { "PASS" } else { "FAIL" });
        self.rows.push((name, Some(passed), detail));
    }

    fn push_na(&mut self, name: &str, detail: &str) {
        let name = format!("{}{name}", self.prefix);
        println!("{:<30} n/a   {detail}", name);
        self.rows.push((name, None, detail.to_string()));
    }

    fn push_result<T>(&mut self, name: &str, r: std::result::Result<T, Error>, detail: impl Fn(&T) -> String) {
        match r {
            Ok(v) => {
                let d = detail(&v);
                self.push(name, true, d);
            }
            Err(e) => self.push(name, false, format!("{e}")),
        }
    }

    fn all_passed(&self) -> bool {
        self.rows.iter().all(|r| r.1 != Some(false))
    }

    fn to_json(&self) -> serde_json::Value {
        let rows: Vec<serde_json::Value> = self
            .rows
            .iter()
            .map(|(name, passed, detail)| {
                json!({"check": name, "passed": passed, "detail": detail})
            })
            .collect();
        json!(rows)
    }
}

/// The per-singular-point section of the verify-all matrix.
fn verify_point(
    m: &mut Matrix,
    raw_conditions: &mut Vec<serde_json::Value>,
    input: &ProblemInput,
    point: &SingularPoint,
) {
    let problem = &input.problem;
    let quad = input.quadrature;
    let theta = match choose_ray(problem, point.alpha, input.theta, input.ray_margin) {
        Ok(t) => t,
        Err(e) => {
            m.push("ray-selection", false, format!("{e}"));
            return;
        }
    };
    let kernel = match build_kernels(problem, point.alpha) {
        Ok(k) => k,
        Err(e) => {
            m.push("kernel-assembly", false, format!("{e}"));
            return;
        }
    };
    let grid = match input.grid.build(point.alpha, theta) {
        Ok(g) => g,
        Err(e) => {
            m.push("grid-build", false, format!("{e}"));
            return;
        }
    };
    let tau = point.tau;

    // Kernel conditions; the raw reports go into the JSON output alongside
    // the matrix rows.
    let mut keep = |r: &std::result::Result<rsv::kernels::ConditionReport, Error>| {
        if let Ok(rep) = r {
            if let Ok(v) = serde_json::to_value(rep) {
                raw_conditions.push(v);
            }
        }
    };
    let sigma = tau + 0.05;
    let sing = verify_sing(&kernel.k0, tau, sigma, &grid);
    keep(&sing);
    let delta = sing
        .as_ref()
        .map(|r| r.constants["delta"])
        .unwrap_or(grid.t_max() / 2.0)
        .min(grid.t_max() / 2.0);
    m.push_result("cond-sing", sing, |r| format!("delta = {:.3e}", r.constants["delta"]));
    let diag0 = verify_diag(KernelRef::Separable(&kernel.k0), kernel.lambda_delta, &grid);
    keep(&diag0);
    m.push_result("cond-diag0", diag0, |r| format!("C = {:.4}", r.constants["C"]));
    match &kernel.k_star {
        Some(ks) => {
            let diag_star = verify_diag(KernelRef::Perturbation(ks), ks.lambda_delta, &grid);
            keep(&diag_star);
            m.push_result("cond-diag-star", diag_star, |r| format!("C = {:.4}", r.constants["C"]));
            m.push_result(
                "gamma-estimate",
                estimate_gamma(ks, &grid.ray, point.alpha).and_then(|g| {
                    if (g - ks.gamma).abs() <= 0.05 {
                        Ok(g)
                    } else {
                        Err(Error::ConditionFailed {
                            condition: "gamma".into(),
                            detail: format!("fitted {g} vs declared {}", ks.gamma),
                        })
                    }
                }),
                |g| format!("gamma = {g:.4}"),
            );
        }
        None => {
            m.push_na("cond-diag-star", "no perturbation kernel");
            m.push_na("gamma-estimate", "no perturbation kernel");
        }
    }
    let reg_p = verify_reg_p(&kernel.k0.p, point.alpha);
    keep(&reg_p);
    m.push_result("cond-reg-p", reg_p, |r| {
        format!("B = {:.4}, eps = {:.3}", r.constants["B_re"], r.constants["eps"])
    });

    // Exponent cross-check.
    let tau_check = rsv::kernels::estimate_tau_along(&kernel.k0, theta, 1.0 / 16.0, 6);
    match tau_check {
        Ok(est) => m.push("tau-crosscheck", (est - tau).abs() <= 1e-8, format!("|diff| = {:.2e}", (est - tau).abs())),
        Err(e) => m.push("tau-crosscheck", false, format!("{e}")),
    }

    // Prototype checks.
    let base_t = (delta / 2.0).clamp(grid.t_min(), grid.t_max());
    let op = OperatorHandle::new(kernel.clone(), grid.clone(), quad);
    match compute_prototype(&kernel.k0, tau, grid.clone(), base_t) {
        Ok(mut proto) => {
            let _ = proto.normalize();
            match verify_fixed_point(&proto, &op) {
                Ok(res) => m.push("proto-fixed-point", res <= 1e-8, format!("residual {res:.2e}")),
                Err(e) => m.push("proto-fixed-point", false, format!("{e}")),
            }
            let b2 = (base_t * 1.7).min(grid.t_max());
            m.push_result(
                "base-point-invariance",
                base_point_invariance(&kernel.k0, tau, grid.clone(), base_t, b2),
                |c| format!("ratio = {:.6}+{:.6}i", c.re, c.im),
            );
            match smoothing_order(&op, &proto.f0) {
                Ok(Some(slope)) => {
                    let expect = tau - 1.0 + kernel.gamma();
                    m.push(
                        "smoothing-order",
                        slope >= expect - 0.05,
                        format!("slope {slope:.3} vs {expect:.3}"),
                    );
                }
                Ok(None) => m.push_na("smoothing-order", "perturbation image is zero"),
                Err(e) => m.push("smoothing-order", false, format!("{e}")),
            }
        }
        Err(e) => m.push("proto-fixed-point", false, format!("{e}")),
    }

    // Contraction suite.
    let cfg = input.solver;
    let rho = if cfg.rho > 0.0 { cfg.rho } else { rsv::solver::default_rho(&op, None) };
    match rsv::volterra::lambda_lower_search(&op, rho, cfg.kappa_target, 0.0, delta, cfg.trials, cfg.seed) {
        Ok(lambda) => {
            m.push(
                "lambda-search",
                lambda > kernel.lambda_delta,
                format!("lambda = {lambda} > lambda_delta = {}", kernel.lambda_delta),
            );
            match rsv::volterra::contraction_estimate(&op, rho, lambda, delta, cfg.trials, cfg.seed) {
                Ok(est) => {
                    let lower = tau / rho - 0.02;
                    let upper = sigma / rho + 0.02;
                    m.push(
                        "contraction-near-bound",
                        est.near_factor >= lower && est.near_factor <= upper,
                        format!("near = {:.4} in [{lower:.4}, {upper:.4}]", est.near_factor),
                    );
                    match rsv::volterra::contraction_estimate(&op, rho, 2.0 * lambda, delta, cfg.trials, cfg.seed) {
                        Ok(est2) => m.push(
                            "contraction-far-monotone",
                            est2.far_factor < est.far_factor || est.far_factor == 0.0,
                            format!("far {:.3e} -> {:.3e}", est.far_factor, est2.far_factor),
                        ),
                        Err(e) => m.push("contraction-far-monotone", false, format!("{e}")),
                    }
                }
                Err(e) => m.push("contraction-near-bound", false, format!("{e}")),
            }
        }
        Err(e) => m.push("lambda-search", false, format!("{e}")),
    }

    // Solve, residuals, uniqueness.
    match solve_homogeneous(kernel.clone(), grid.clone(), quad, &cfg) {
        Ok(sol) => {
            m.push(
                "solve-residual",
                sol.final_residual <= cfg.tol * (1.0 + 1.0 / (1.0 - sol.contraction.overall).max(1e-3)),
                format!("residual {:.2e} in {} iterations", sol.final_residual, sol.iterations),
            );
            match rsv::level1::phat_residual(problem, &kernel, &sol.f, &quad) {
                Ok(res) => m.push("volterra-residual", res <= 1e-8, format!("{res:.2e}")),
                Err(e) => m.push("volterra-residual", false, format!("{e}")),
            }
            // Lambda independence.
            let mut cfg2 = cfg;
            cfg2.lambda = 2.0 * sol.lambda;
            match solve_homogeneous(kernel.clone(), grid.clone(), quad, &cfg2) {
                Ok(sol2) => {
                    let coarse = NormParams::new(sol.rho - 1.0, 2.0 * sol.lambda);
                    let dev = sol.f.sub(&sol2.f).weighted_norm(coarse)
                        / sol.f.weighted_norm(coarse).max(1e-300);
                    m.push("lambda-independence", dev <= 10.0 * cfg.tol, format!("deviation {dev:.2e}"));
                }
                Err(e) => m.push("lambda-independence", false, format!("{e}")),
            }
            // Uniqueness probes.
            let mut probes_ok = true;
            let mut detail = String::new();
            for rho_alt in [tau + 0.1, tau + 0.7 * kernel.gamma().max(1.0)] {
                if (rho_alt - sol.rho).abs() < 1e-6 {
                    continue;
                }
                match uniqueness_probe(kernel.clone(), grid.clone(), quad, &cfg, &sol, rho_alt) {
                    Ok(rep) => {
                        detail.push_str(&format!("rho={rho_alt:.2}: {:.2e}  ", rep.deviation));
                    }
                    Err(e) => {
                        probes_ok = false;
                        detail.push_str(&format!("rho={rho_alt:.2}: {e}  "));
                    }
                }
            }
            m.push("uniqueness-probe", probes_ok, detail);

            // Oracle agreement (the kernels come from polynomial data, so the
            // expansion recursion applies).
            let p_taylor = Poly::from_real(&problem.p).compose_neg().taylor_at(point.alpha);
            let q_taylor = Poly::from_real(&problem.q).compose_neg().taylor_at(point.alpha);
            let r: Vec<Complex64> = problem.r.iter().map(|&x| Complex64::new(x, 0.0)).collect();
            match (
                series_oracle(&p_taylor, &q_taylor, &r, tau, 5),
                extract_series_coefficients(
                    &sol.f,
                    9,
                    extraction_window(problem, point.alpha, grid.t_max()),
                ),
            ) {
                (Ok(want), Ok(got)) => {
                    let worst = (1..=3)
                        .map(|k| (got[k - 1] - want[k]).norm())
                        .fold(0.0, f64::max);
                    m.push("oracle-agreement", worst <= 1e-4, format!("max |diff| = {worst:.2e}"));
                }
                (Err(e), _) | (_, Err(e)) => m.push("oracle-agreement", false, format!("{e}")),
            }

            // Frequency domain: transform, ODE residual, asymptotics.
            let mut solved = ResummedSolution {
                alpha: point.alpha,
                tau,
                theta,
                solution: sol,
                volterra_residual: 0.0,
                tau_mismatch: 0.0,
                laplace: None,
                ode_residual: None,
            };
            match borel_sum(problem, &mut solved, &input.z_complex(), input.margin, None, &quad) {
                Ok(()) => {
                    let laplace = solved.laplace.as_ref().unwrap();
                    let max_tail = laplace.tail_bounds.iter().fold(0.0f64, |a, &b| a.max(b));
                    let res = solved.ode_residual.unwrap();
                    m.push(
                        "ode-residual",
                        res <= 1e-6 + 10.0 * max_tail,
                        format!("{res:.2e} (tails {max_tail:.2e})"),
                    );
                    check_asymptotics(m, &solved, tau);
                }
                Err(e) => m.push("ode-residual", false, format!("{e}")),
            }
        }
        Err(e) => m.push("solve-residual", false, format!("{e}")),
    }

}

fn cmd_verify_all(cli: &Cli, input: &ProblemInput) -> Result<ExitCode> {
    let mut m = Matrix::new();
    let validation = validate_problem(&input.problem)?;
    m.push(
        "validate",
        validation.verified,
        if validation.verified { "structure ok".into() } else { format!("{:?}", validation.reasons) },
    );
    if !validation.verified {
        let report =
            json!({"command": "verify-all", "config": input, "matrix": m.to_json()});
        write_report(&cli.out, &report)?;
        return Ok(ExitCode::from(1));
    }

    let points = selected_points(input)?;
    let mut raw_conditions: Vec<serde_json::Value> = Vec::new();
    for (idx, point) in points.iter().enumerate() {
        if points.len() > 1 {
            m.set_prefix(format!("a{idx}:"));
        }
        verify_point(&mut m, &mut raw_conditions, input, point);
    }
    m.set_prefix(String::new());

    // Operator dictionary and fractional-integral suites on monomials, on
    // the first point's ray.
    let quad = input.quadrature;
    let theta = choose_ray(&input.problem, points[0].alpha, input.theta, input.ray_margin)?;
    let grid = input.grid.build(points[0].alpha, theta)?;
    let one = SingularFunction::monomial(grid.clone(), 0.0);
    let singular = SingularFunction::monomial(grid.clone(), -0.5);
    for (name, phi) in [("dictionary-constant", &one), ("dictionary-singular", &singular)] {
        match verify_dictionary(phi, 0.5, 1, &input.z_complex(), input.margin, &quad) {
            Ok(rep) => {
                let bound = 1e-6 + rep.tail_allowance;
                m.push(
                    name,
                    rep.frac_mismatch <= bound && rep.power_mismatch <= bound,
                    format!("frac {:.2e}, power {:.2e}", rep.frac_mismatch, rep.power_mismatch),
                );
            }
            Err(e) => m.push(name, false, format!("{e}")),
        }
    }
    let semigroup = (|| -> Result<f64> {
        let two_step = fractional_integral(0.5, &fractional_integral(0.5, &one, &quad)?, &quad)?;
        let one_step = fractional_integral(1.0, &one, &quad)?;
        let params = NormParams::new(1.0, 0.0);
        Ok(two_step.sub(&one_step).weighted_norm(params)
            / one_step.weighted_norm(params).max(1e-300))
    })();
    match semigroup {
        Ok(dev) => m.push("frac-semigroup", dev <= 1e-8, format!("deviation {dev:.2e}")),
        Err(e) => m.push("frac-semigroup", false, format!("{e}")),
    }
    match beta_moment(1.0, 0.5) {
        Ok(v) => m.push(
            "beta-moment",
            (v - 4.0 / 15.0).abs() <= 1e-10,
            format!("B(1, 0.5) = {v:.12}"),
        ),
        Err(e) => m.push("beta-moment", false, format!("{e}")),
    }

    let report = json!({
        "command": "verify-all",
        "config": input,
        "matrix": m.to_json(),
        "condition_reports": raw_conditions,
    });
    write_report(&cli.out, &report)?;
    Ok(if m.all_passed() { ExitCode::SUCCESS } else { ExitCode::from(1) })
}

/// Checks the prescribed large-frequency behavior along the real axis:
/// log |Psi(x)| + Re(alpha) x + tau log x approaches log Gamma(tau).
fn check_asymptotics(m: &mut Matrix, solved: &ResummedSolution, tau: f64) {
    let laplace = match &solved.laplace {
        Some(l) => l,
        None => return,
    };
    let mut real_samples: Vec<(f64, Complex64)> = laplace
        .z_samples
        .iter()
        .zip(&laplace.phi_values)
        .filter(|(z, _)| z.im.abs() < 1e-12 && z.re > 0.0)
        .map(|(z, v)| (z.re, *v))
        .collect();
    real_samples.sort_by(|a, b| a.0.partial_cmp(&b.0).unwrap());
    if real_samples.len() < 2 || solved.theta.abs() > 1e-9 {
        m.push_na("asymptotics", "needs two real samples on a real ray");
        return;
    }
    let target = statrs::function::gamma::ln_gamma(tau);
    let deviation = |x: f64, v: Complex64| -> f64 {
        (v.norm().ln() + solved.alpha.re * x + tau * x.ln() - target).abs()
    };
    let n = real_samples.len();
    let d_prev = deviation(real_samples[n - 2].0, real_samples[n - 2].1);
    let d_last = deviation(real_samples[n - 1].0, real_samples[n - 1].1);
    m.push(
        "asymptotics",
        d_last < d_prev || d_last <= 0.02,
        format!("deviation {d_prev:.3e} -> {d_last:.3e}"),
    );
}
