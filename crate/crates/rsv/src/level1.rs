//! Front end for level-1 linear differential operators
//! `P(d/dz) + (1/z) Q(d/dz) + (1/z^2) R(1/z)`: validates the data, locates
//! the singular points with their exponents, builds the position-domain
//! kernels, solves the Volterra equation on a ray, and Laplace-transforms
//! the solution back, checking the ODE residual in the frequency domain.

use std::f64::consts::PI;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{build_ray_grid, NormParams, Ray, RayGrid, SingularFunction};
use crate::kernels::{
    estimate_tau_along, KernelFn, KernelPair, PerturbationKernel, SeparableKernel,
};
use crate::laplace::{cauchy_derivatives, laplace_transform, transform_one, LaplaceResult};
use crate::poly::Poly;
use crate::quad::QuadConfig;
use crate::solver::{solve_homogeneous, SolveConfig, Solution};
use crate::volterra::{apply_kernel_raw, HeadModel};

/// Coefficients of a level-1 problem: monic P of degree d with simple roots,
/// Q of degree d - 1 nonzero at every root of P, and the power-series
/// coefficients of R(1/z), convergent for |z| > radius.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct Level1Problem {
    #[serde(rename = "P")]
    pub p: Vec<f64>,
    #[serde(rename = "Q")]
    pub q: Vec<f64>,
    #[serde(rename = "R", default)]
    pub r: Vec<f64>,
    #[serde(rename = "A", default)]
    pub radius: f64,
}

impl Level1Problem {
    pub fn degree(&self) -> usize {
        self.p.len().saturating_sub(1)
    }

    /// Off-diagonal growth rate used for the kernels: any rate above the
    /// series radius works, one more keeps clear margins.
    pub fn lambda_delta(&self) -> f64 {
        self.radius.max(0.0) + 1.0
    }

    fn p_poly(&self) -> Poly {
        Poly::from_real(&self.p)
    }

    fn q_poly(&self) -> Poly {
        Poly::from_real(&self.q)
    }
}

/// Outcome of the structural validation of a problem.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ValidationReport {
    pub verified: bool,
    /// Reason codes: NotMonic, DoubleRoot, QVanishesAtRoot, DegreeMismatch,
    /// SeriesGrowth.
    pub reasons: Vec<String>,
    pub roots: Vec<Complex64>,
    /// Fitted constant C with |R_j| <= C lambda^j at lambda = radius + 1.
    pub series_constant: f64,
}

/// Checks the three structural requirements plus series growth, collecting
/// every violated code rather than stopping at the first.
pub fn validate_problem(problem: &Level1Problem) -> Result<ValidationReport> {
    let mut reasons = Vec::new();
    let d = problem.degree();
    if d == 0 {
        return Err(Error::ConfigError("P must have degree at least 1".into()));
    }
    if (problem.p.last().copied().unwrap_or(0.0) - 1.0).abs() > 1e-12 {
        reasons.push("NotMonic".to_string());
    }
    let q_len_ok = problem.q.len() == d
        && (d == 1 || problem.q.last().is_some_and(|&c| c.abs() > 1e-12));
    if !q_len_ok {
        reasons.push("DegreeMismatch".to_string());
    }

    let p_poly = problem.p_poly();
    let q_poly = problem.q_poly();
    let dp = p_poly.derivative();
    let roots = p_poly.roots()?;
    let scale = roots.iter().map(|r| r.norm()).fold(1.0, f64::max);
    // A multiple root is only located to about sqrt(eps), so the pairwise
    // separation test is backed by |P'(root)|, which collapses there.
    let mut double_root = false;
    for i in 0..roots.len() {
        for j in (i + 1)..roots.len() {
            if (roots[i] - roots[j]).norm() < 1e-5 * scale {
                double_root = true;
            }
        }
    }
    for &r in &roots {
        let dscale: f64 = dp
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, c)| c.norm() * r.norm().max(1.0).powi(k as i32))
            .sum();
        if dp.eval(r).norm() < 1e-6 * dscale.max(1e-300) {
            double_root = true;
        }
    }
    if double_root {
        reasons.push("DoubleRoot".to_string());
    }
    let q_scale = problem.q.iter().map(|c| c.abs()).fold(0.0, f64::max).max(1e-300);
    if roots.iter().any(|&r| q_poly.eval(r).norm() < 1e-10 * q_scale) {
        reasons.push("QVanishesAtRoot".to_string());
    }

    let lambda = problem.lambda_delta();
    let series_constant = problem
        .r
        .iter()
        .enumerate()
        .map(|(j, &c)| c.abs() / lambda.powi(j as i32))
        .fold(0.0, f64::max);
    if problem.r.len() >= 6 {
        let pts: Vec<(f64, f64)> = problem
            .r
            .iter()
            .enumerate()
            .filter(|(_, &c)| c.abs() > 0.0)
            .map(|(j, &c)| (j as f64, c.abs().ln()))
            .collect();
        if pts.len() >= 4 {
            let growth = crate::grid::least_squares_slope(&pts).exp();
            if growth > 1.5 * lambda {
                reasons.push("SeriesGrowth".to_string());
            }
        }
    }
    Ok(ValidationReport { verified: reasons.is_empty(), reasons, roots, series_constant })
}

/// A candidate singular point of the position-domain equation.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct SingularPoint {
    pub alpha: Complex64,
    /// Real part of Q(-alpha)/P'(-alpha); meaningful when admissible.
    pub tau: f64,
    /// The unprojected exponent, for reporting.
    pub tau_raw: Complex64,
    pub admissible: bool,
}

/// Locates the zeros of P(-zeta) with their exponents, flagging each as
/// admissible when the exponent is real and positive.
pub fn singular_points(problem: &Level1Problem) -> Result<Vec<SingularPoint>> {
    let p_poly = problem.p_poly();
    let dp = p_poly.derivative();
    let q_poly = problem.q_poly();
    let mut out: Vec<SingularPoint> = p_poly
        .roots()?
        .into_iter()
        .map(|root| {
            let alpha = -root;
            let tau_raw = q_poly.eval(root) / dp.eval(root);
            let admissible =
                tau_raw.im.abs() <= 1e-10 * tau_raw.norm().max(1.0) && tau_raw.re > 1e-10;
            SingularPoint { alpha, tau: tau_raw.re, tau_raw, admissible }
        })
        .collect();
    out.sort_by(|a, b| {
        (a.alpha.re, a.alpha.im)
            .partial_cmp(&(b.alpha.re, b.alpha.im))
            .unwrap()
    });
    Ok(out)
}

/// Builds the kernels of the divided equation at the singular point alpha:
/// the separable part -q(a')/p(a) with p = P(-zeta), q = Q(-zeta), and the
/// perturbation -k_R(a, a')/p(a) from the series coefficients, which
/// vanishes linearly on the diagonal.
pub fn build_kernels(problem: &Level1Problem, alpha: Complex64) -> Result<KernelPair> {
    let p_poly = problem.p_poly().compose_neg();
    let q_poly = problem.q_poly().compose_neg();
    let tau = {
        let root = -alpha;
        let v = problem.q_poly().eval(root) / problem.p_poly().derivative().eval(root);
        v.re
    };
    let p_eval = {
        let p = p_poly.clone();
        Arc::new(move |z: Complex64| p.eval(z)) as crate::kernels::HoloFn
    };
    let q_eval = {
        let q = q_poly.clone();
        Arc::new(move |z: Complex64| q.eval(z)) as crate::kernels::HoloFn
    };
    let k0 = SeparableKernel::new(p_eval, q_eval, alpha);
    let lambda_delta = problem.lambda_delta();

    // Effective truncation of the diagonal series: drop coefficients whose
    // worst-case term over plausible separations is below 1e-16 relative.
    let significant = problem.r.iter().rposition(|&c| c != 0.0).map(|j| j + 1).unwrap_or(0);
    if significant == 0 {
        return Ok(KernelPair::separable(k0, tau, lambda_delta));
    }
    let r_coeffs: Vec<f64> = problem.r[..significant].to_vec();
    let p_for_star = p_poly.clone();
    let kernel: KernelFn = Arc::new(move |za: Complex64, zb: Complex64| {
        let delta = za - zb;
        // k_R = sum_j R_j delta^(j+1) / (j+1)!
        let mut term = delta; // delta^(j+1)/(j+1)! at j = 0
        let mut acc = Complex64::new(0.0, 0.0);
        for (j, &rj) in r_coeffs.iter().enumerate() {
            if j > 0 {
                term = term * delta / (j as f64 + 1.0);
            }
            acc += term * rj;
        }
        -acc / p_for_star.eval(za)
    });
    let k_star = PerturbationKernel::new(kernel, 1.0, lambda_delta);
    Ok(KernelPair::with_perturbation(k0, k_star, tau))
}

/// Picks a ray direction from alpha that keeps an angular margin (default
/// 10 degrees) to every other zero of P(-zeta). A requested direction is
/// honored when it clears the margin and rejected otherwise.
pub fn choose_ray(
    problem: &Level1Problem,
    alpha: Complex64,
    requested_theta: Option<f64>,
    margin: f64,
) -> Result<f64> {
    let points = singular_points(problem)?;
    let mut bad: Vec<f64> = points
        .iter()
        .filter(|sp| (sp.alpha - alpha).norm() > 1e-10)
        .map(|sp| (sp.alpha - alpha).arg().rem_euclid(2.0 * PI))
        .collect();
    bad.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let clearance = |theta: f64| -> f64 {
        bad.iter()
            .map(|&b| {
                let d = (theta - b).rem_euclid(2.0 * PI);
                d.min(2.0 * PI - d)
            })
            .fold(f64::INFINITY, f64::min)
    };
    if let Some(theta) = requested_theta {
        let theta = theta.rem_euclid(2.0 * PI);
        if clearance(theta) <= margin {
            return Err(Error::NoAdmissibleRay(format!(
                "requested direction {theta} passes within the margin of another singular point"
            )));
        }
        return Ok(theta);
    }
    if bad.is_empty() {
        return Ok(0.0);
    }
    // Midpoints of the gaps between consecutive blocked directions maximize
    // the clearance; pick the best, preferring small angles on ties.
    let mut best = (f64::NEG_INFINITY, 0.0);
    for i in 0..bad.len() {
        let a = bad[i];
        let b = if i + 1 < bad.len() { bad[i + 1] } else { bad[0] + 2.0 * PI };
        let mid = (0.5 * (a + b)).rem_euclid(2.0 * PI);
        let c = clearance(mid);
        if c > best.0 + 1e-12 || (c > best.0 - 1e-12 && mid < best.1) {
            best = (c, mid);
        }
    }
    if best.0 <= margin {
        return Err(Error::NoAdmissibleRay(format!(
            "no direction clears the {margin} rad margin"
        )));
    }
    Ok(best.1)
}

/// Grid construction parameters for a solve. Every field is optional in the
/// JSON form.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct GridConfig {
    pub t_max: f64,
    /// Smallest panel boundary; defaults to t_max * 2^-20.
    pub t_min: Option<f64>,
    pub ratio: f64,
    pub nodes_per_panel: usize,
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig { t_max: 24.0, t_min: None, ratio: 2.0, nodes_per_panel: 16 }
    }
}

impl GridConfig {
    pub fn build(&self, alpha: Complex64, theta: f64) -> Result<Arc<RayGrid>> {
        let ray = Ray::new(alpha, theta, self.t_max)?;
        let t_min = self.t_min.unwrap_or(self.t_max * 2f64.powi(-20));
        Ok(Arc::new(build_ray_grid(ray, t_min, self.ratio, self.nodes_per_panel)?))
    }
}

/// A solved singular point: the position-domain solution, its residuals, and
/// (after `borel_sum`) the frequency-domain samples with their ODE residual.
#[derive(Debug, Clone)]
pub struct ResummedSolution {
    pub alpha: Complex64,
    pub tau: f64,
    pub theta: f64,
    pub solution: Solution,
    /// Direct residual of the undivided integral equation, relative.
    pub volterra_residual: f64,
    /// Cross-check: diagonal residue of the built kernel vs the exponent
    /// from the polynomial data.
    pub tau_mismatch: f64,
    pub laplace: Option<LaplaceResult>,
    pub ode_residual: Option<f64>,
}

/// Solves the position-domain equation at an admissible singular point.
pub fn solve_at(
    problem: &Level1Problem,
    point: &SingularPoint,
    theta: f64,
    grid_cfg: &GridConfig,
    quad: QuadConfig,
    cfg: &SolveConfig,
) -> Result<ResummedSolution> {
    if !point.admissible {
        return Err(Error::DomainError(format!(
            "singular point {} has exponent {}, not real positive",
            point.alpha, point.tau_raw
        )));
    }
    let kernel = build_kernels(problem, point.alpha)?;
    let grid = grid_cfg.build(point.alpha, theta)?;

    // Diagonal residue of the built kernel must reproduce the exponent.
    let nearest_other = singular_points(problem)?
        .iter()
        .filter(|sp| (sp.alpha - point.alpha).norm() > 1e-10)
        .map(|sp| (sp.alpha - point.alpha).norm())
        .fold(f64::INFINITY, f64::min);
    let h0 = (nearest_other / 4.0).min(1.0 / 16.0);
    let tau_est = estimate_tau_along(&kernel.k0, theta, h0, 6)?;
    let tau_mismatch = (tau_est - point.tau).abs();

    let solution = solve_homogeneous(kernel.clone(), grid.clone(), quad, cfg)?;
    let volterra_residual = phat_residual(problem, &kernel, &solution.f, &quad)?;
    Ok(ResummedSolution {
        alpha: point.alpha,
        tau: point.tau,
        theta,
        solution,
        volterra_residual,
        tau_mismatch,
        laplace: None,
        ode_residual: None,
    })
}

/// Relative residual of the undivided equation
/// `p psi + int q psi + int k_R psi = 0`, measured in the (tau, Lambda) norm
/// against the size of the leading term.
pub fn phat_residual(
    problem: &Level1Problem,
    kernel: &KernelPair,
    psi: &SingularFunction,
    quad: &QuadConfig,
) -> Result<f64> {
    let grid = &psi.grid;
    let ray = grid.ray;
    let tau = kernel.tau;

    // Term 1: p psi, sampled directly.
    let p = kernel.k0.p.clone();
    let mut term1 = psi.clone();
    for (t, v) in grid.nodes.iter().zip(term1.g.iter_mut()) {
        *v *= p(ray.point(*t));
    }

    // Term 2: plain integration of q psi (exponent rises by one).
    let q = kernel.k0.q.clone();
    let k_q: KernelFn = Arc::new(move |_za, zb| q(zb));
    let term2 = apply_kernel_raw(grid, quad, psi, psi.sigma + 1.0, &k_q, None)?;

    let mut residual = term1.add(&term2);
    // Term 3: the diagonal-series integral (vanishes like the separation, so
    // the exponent rises by two).
    if kernel.k_star.is_some() {
        let significant = problem.r.iter().rposition(|&c| c != 0.0).map(|j| j + 1).unwrap_or(0);
        let r_coeffs: Vec<f64> = problem.r[..significant].to_vec();
        let k_r: KernelFn = Arc::new(move |za: Complex64, zb: Complex64| {
            let delta = za - zb;
            let mut term = delta;
            let mut acc = Complex64::new(0.0, 0.0);
            for (j, &rj) in r_coeffs.iter().enumerate() {
                if j > 0 {
                    term = term * delta / (j as f64 + 1.0);
                }
                acc += term * rj;
            }
            acc
        });
        let term3 = apply_kernel_raw(grid, quad, psi, psi.sigma + 2.0, &k_r, None)?;
        residual = residual.add(&term3);
    }
    let params = NormParams::new(tau, psi.lambda_hint);
    let scale = term1.weighted_norm(params).max(1e-300);
    Ok(residual.weighted_norm(params) / scale)
}

/// Laplace-transforms a solved point at the given frequency samples and
/// evaluates the ODE residual `|P Psi| / |Psi|` there, with derivatives by
/// Cauchy circles inside the half-plane.
pub fn borel_sum(
    problem: &Level1Problem,
    solved: &mut ResummedSolution,
    z_samples: &[Complex64],
    margin: f64,
    accuracy: Option<f64>,
    quad: &QuadConfig,
) -> Result<()> {
    let psi = &solved.solution.f;
    let laplace = laplace_transform(psi, z_samples, margin, accuracy, quad)?;
    let ray = psi.grid.ray;
    let degree = problem.degree();
    let head = HeadModel::build(psi);

    let mut worst = 0.0f64;
    for (&z, &psi_z) in z_samples.iter().zip(&laplace.phi_values) {
        let radius =
            crate::laplace::cauchy_radius(z, ray.alpha, ray.theta, psi.lambda_hint, margin);
        let mut sample = |w: Complex64| transform_one(psi, &head, w, quad);
        let derivs = cauchy_derivatives(&mut sample, z, radius, degree, 32)?;
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &c) in problem.p.iter().enumerate() {
            acc += derivs[k] * c;
        }
        let mut q_acc = Complex64::new(0.0, 0.0);
        for (k, &c) in problem.q.iter().enumerate() {
            q_acc += derivs[k] * c;
        }
        acc += q_acc / z;
        let mut r_acc = Complex64::new(0.0, 0.0);
        for (j, &c) in problem.r.iter().enumerate() {
            r_acc += z.powi(-(j as i32)) * c;
        }
        acc += r_acc * derivs[0] / (z * z);
        worst = worst.max(acc.norm() / psi_z.norm().max(1e-300));
    }
    solved.laplace = Some(laplace);
    solved.ode_residual = Some(worst);
    Ok(())
}

/// Full problem input as read from a JSON file: coefficients plus numerical
/// configuration.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct ProblemInput {
    #[serde(flatten)]
    pub problem: Level1Problem,
    /// Index into the admissible singular points (sorted by position);
    /// omitted means all admissible points.
    #[serde(default)]
    pub alpha_index: Option<usize>,
    /// Ray direction override in radians.
    #[serde(default)]
    pub theta: Option<f64>,
    #[serde(default)]
    pub grid: GridConfig,
    #[serde(default)]
    pub solver: SolveConfig,
    #[serde(default)]
    pub quadrature: QuadConfig,
    /// Frequency samples as [re, im] pairs.
    #[serde(default = "default_z_samples")]
    pub z_samples: Vec<[f64; 2]>,
    #[serde(default = "default_margin")]
    pub margin: f64,
    /// Angular margin for ray selection, radians.
    #[serde(default = "default_ray_margin")]
    pub ray_margin: f64,
}

fn default_z_samples() -> Vec<[f64; 2]> {
    vec![[2.0, 0.0], [4.0, 0.0], [8.0, 0.0]]
}

fn default_margin() -> f64 {
    0.5
}

fn default_ray_margin() -> f64 {
    PI / 18.0
}

impl ProblemInput {
    pub fn z_complex(&self) -> Vec<Complex64> {
        self.z_samples.iter().map(|&[re, im]| Complex64::new(re, im)).collect()
    }
}
