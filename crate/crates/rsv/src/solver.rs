//! Fixed-point solution of f = V f + g by Picard iteration in a weighted
//! space where V contracts, and the homogeneous equation f = V f solved
//! through the substitution f = f0 + f_star, where the correction satisfies
//! the inhomogeneous equation f_star = V_star f0 + V f_star in a more
//! regular space.
//!
//! An independent oracle is included for level-1 kernels: the solution's
//! expansion coefficients around the singular point satisfy a triangular
//! recursion that never touches the quadrature or iteration machinery.

use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{NormParams, RayGrid, SingularFunction};
use crate::kernels::{
    verify_diag, verify_reg_p, verify_sing, KernelPair, KernelRef,
};
use crate::proto::{compute_prototype, estimate_leading_constant, PrototypeSolution};
use crate::quad::QuadConfig;
use crate::volterra::{
    contraction_estimate, lambda_lower_search, ContractionEstimate, OperatorHandle, OperatorPart,
};

/// Solver parameters. `rho = 0` and `lambda = 0` select the defaults: the
/// admissible exponent window from the kernel constants, and an automatic
/// rate search.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub rho: f64,
    pub lambda: f64,
    pub kappa_target: f64,
    pub tol: f64,
    pub max_iter: usize,
    /// Random test functions per contraction estimate (the extremal monomial
    /// is always included on top).
    pub trials: usize,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            rho: 0.0,
            lambda: 0.0,
            kappa_target: 0.9,
            tol: 1e-10,
            max_iter: 200,
            trials: 4,
            seed: 0,
        }
    }
}

/// A solved fixed-point problem.
#[derive(Debug, Clone)]
pub struct Solution {
    /// The full solution (f0 + f_star for the homogeneous problem).
    pub f: SingularFunction,
    /// The correction term (equals `f` for a plain inhomogeneous solve).
    pub f_star: SingularFunction,
    pub iterations: usize,
    /// Relative residual of the solved equation in the working norm.
    pub final_residual: f64,
    pub contraction: ContractionEstimate,
    /// Successive-difference norms, one per iteration.
    pub diff_norms: Vec<f64>,
    pub rho: f64,
    pub lambda: f64,
}

/// Near/far split radius for contraction measurements: the verified
/// simple-pole radius, kept away from the truncation end so the far region
/// is never empty.
pub fn delta_split(op: &OperatorHandle) -> f64 {
    let t_max = op.grid.t_max();
    op.reports
        .iter()
        .find(|r| r.condition == "sing")
        .and_then(|r| r.constants.get("delta").copied())
        .unwrap_or(t_max / 2.0)
        .min(t_max / 2.0)
}

/// Solves f = V f + g by Picard iteration started at g.
pub fn solve_inhomogeneous(
    op: &OperatorHandle,
    g: &SingularFunction,
    cfg: &SolveConfig,
) -> Result<Solution> {
    let tau = op.kernel.tau;
    let rho = if cfg.rho > 0.0 { cfg.rho } else { default_rho(op, None) };
    if !(rho > tau) {
        return Err(Error::DomainError(format!("need rho > tau, got rho = {rho}, tau = {tau}")));
    }
    if g.sigma < rho - 1.0 - 1e-9 {
        return Err(Error::DomainError(format!(
            "inhomogeneity exponent {} below rho - 1 = {}",
            g.sigma,
            rho - 1.0
        )));
    }
    let delta = delta_split(op);
    let lambda = if cfg.lambda > 0.0 {
        cfg.lambda
    } else {
        lambda_lower_search(op, rho, cfg.kappa_target, 0.0, delta, cfg.trials, cfg.seed)?
    };
    let contraction = contraction_estimate(op, rho, lambda, delta, cfg.trials, cfg.seed)?;
    let kappa = contraction.overall.min(0.999);
    let params = NormParams::new(rho - 1.0, lambda);

    let mut f = g.clone();
    let mut diff_norms = Vec::new();
    let mut rising = 0usize;
    let g_scale = g.weighted_norm(params);
    let mut iterations = 0;
    loop {
        iterations += 1;
        if iterations > cfg.max_iter {
            return Err(Error::MaxIterExceeded {
                max_iter: cfg.max_iter,
                last_diff: diff_norms.last().copied().unwrap_or(f64::NAN),
            });
        }
        let next = op.apply(&f, OperatorPart::Combined)?.add(g);
        let diff = next.sub(&f).weighted_norm(params);
        if let Some(&prev) = diff_norms.last() {
            // Ratios at the rounding floor carry no contraction signal.
            if diff >= prev && diff > 1e-14 * g_scale.max(1e-300) {
                rising += 1;
                if rising >= 3 {
                    return Err(Error::NotContracting { ratio: diff / prev });
                }
            } else {
                rising = 0;
            }
        }
        diff_norms.push(diff);
        f = next;
        if diff <= cfg.tol * (1.0 - kappa) {
            break;
        }
    }
    let residual_fn = op.apply(&f, OperatorPart::Combined)?.add(g).sub(&f);
    let scale = f.weighted_norm(params).max(g_scale).max(1e-300);
    let final_residual = residual_fn.weighted_norm(params) / scale;
    Ok(Solution {
        f: f.clone(),
        f_star: f,
        iterations,
        final_residual,
        contraction,
        diff_norms,
        rho,
        lambda,
    })
}

/// Default exponent window tau + min(gamma, eps, 1), with gamma standing in
/// as 1 for a purely separable operator and eps read from a root-regularity
/// report when available.
pub fn default_rho(op: &OperatorHandle, eps: Option<f64>) -> f64 {
    let tau = op.kernel.tau;
    let gamma = op.kernel.gamma();
    let gamma_eff = if gamma > 0.0 { gamma } else { 1.0 };
    let eps_eff = eps.unwrap_or(1.0).max(0.0);
    tau + gamma_eff.min(eps_eff).min(1.0)
}

/// Solves the homogeneous equation f = V f in the affine subspace
/// f0 + (more regular functions), returning f normalized to unit leading
/// coefficient. The attached reports record the verified kernel conditions.
pub fn solve_homogeneous(
    kernel: KernelPair,
    grid: Arc<RayGrid>,
    quad: QuadConfig,
    cfg: &SolveConfig,
) -> Result<Solution> {
    let tau = kernel.tau;
    let mut op = OperatorHandle::new(kernel, grid.clone(), quad);

    // Root regularity fixes the admissible exponent window and enables the
    // unit-leading-coefficient normalization.
    let reg_p = verify_reg_p(&op.kernel.k0.p, op.kernel.k0.alpha).ok();
    let eps = reg_p.as_ref().map(|r| r.constants["eps"]);
    let rho = if cfg.rho > 0.0 { cfg.rho } else { default_rho(&op, eps) };
    if !(rho > tau) {
        return Err(Error::DomainError(format!("need rho > tau, got rho = {rho}, tau = {tau}")));
    }
    let sigma = tau + (0.05f64).min((rho - tau) / 2.0);
    let sing = verify_sing(&op.kernel.k0, tau, sigma, &grid)?;
    let delta = sing.constants["delta"];
    op.reports.push(sing);
    op.reports
        .push(verify_diag(KernelRef::Separable(&op.kernel.k0), op.kernel.lambda_delta, &grid)?);
    if let Some(ks) = &op.kernel.k_star {
        op.reports.push(verify_diag(KernelRef::Perturbation(ks), ks.lambda_delta, &grid)?);
    }
    if let Some(r) = reg_p.clone() {
        op.reports.push(r);
    }

    // Base point at half the verified radius keeps the exponential factor of
    // the construction bounded.
    let base_t = (delta / 2.0).clamp(grid.t_min(), grid.t_max());
    let mut proto = compute_prototype(&op.kernel.k0, tau, grid.clone(), base_t)?;
    if reg_p.is_some() {
        proto.normalize()?;
    }

    let g = if op.kernel.k_star.is_some() {
        op.apply(&proto.f0, OperatorPart::Perturbation)?
    } else {
        // Zero inhomogeneity, tagged in the working space.
        SingularFunction::zero(grid.clone(), rho - 1.0)
    };
    let mut inner_cfg = *cfg;
    inner_cfg.rho = rho;
    let sub = solve_inhomogeneous(&op, &g, &inner_cfg)?;
    let f_star = sub.f_star.clone();
    let mut f = proto.f0.add(&f_star);

    // Affine-subspace representative: unit leading coefficient.
    let lead = estimate_leading_constant(&PrototypeSolution {
        f0: f.clone(),
        base_point_t: base_t,
        tau,
        leading: None,
    })?;
    f = f.scale(Complex64::new(1.0, 0.0) / lead);

    let params = NormParams::new(tau - 1.0, sub.lambda);
    let image = op.apply(&f, OperatorPart::Combined)?;
    let final_residual =
        f.sub(&image).weighted_norm(params) / f.weighted_norm(params).max(1e-300);
    Ok(Solution {
        f,
        f_star,
        iterations: sub.iterations,
        final_residual,
        contraction: sub.contraction,
        diff_norms: sub.diff_norms,
        rho,
        lambda: sub.lambda,
    })
}

/// Expansion coefficients c_0..c_n of the normalized solution
/// `sum c_k (zeta - alpha)^(tau - 1 + k)`, c_0 = 1, for kernels built from
/// Taylor data: p and q expanded around alpha (p_taylor[0] must vanish) and
/// the diagonal series coefficients r of the perturbation.
///
/// Substituting the expansion into `p psi + int q psi + int k_r psi = 0`
/// yields a triangular recursion; each order determines the next coefficient
/// through products of (tau + integer) factors only.
pub fn series_oracle(
    p_taylor: &[Complex64],
    q_taylor: &[Complex64],
    r: &[Complex64],
    tau: f64,
    n_max: usize,
) -> Result<Vec<Complex64>> {
    let p1 = p_taylor.get(1).copied().unwrap_or_default();
    let q0 = q_taylor.first().copied().unwrap_or_default();
    if p1.norm() == 0.0 {
        return Err(Error::ResonanceError { order: 0 });
    }
    // The lowest-order equation (p_1 + q_0 / tau) c_0 = 0 must hold
    // identically; otherwise tau does not match the kernel data.
    let lead = p1 + q0 / tau;
    if lead.norm() > 1e-8 * (p1.norm() + q0.norm() / tau) {
        return Err(Error::ResonanceError { order: 0 });
    }

    let p_at = |m: usize| p_taylor.get(m).copied().unwrap_or_default();
    let q_at = |m: usize| q_taylor.get(m).copied().unwrap_or_default();
    let mut c = vec![Complex64::new(0.0, 0.0); n_max + 1];
    c[0] = Complex64::new(1.0, 0.0);
    for n in 1..=n_max {
        let mut rest = Complex64::new(0.0, 0.0);
        for m in 2..=(n + 1) {
            rest += p_at(m) * c[n + 1 - m];
        }
        let mut qsum = Complex64::new(0.0, 0.0);
        for m in 1..=n {
            qsum += q_at(m) * c[n - m];
        }
        rest += qsum / (tau + n as f64);
        for (j, &rj) in r.iter().enumerate().take(n) {
            if rj.norm() == 0.0 {
                continue;
            }
            // Gamma(tau + n - 1 - j) / Gamma(tau + n + 1) as a product.
            let mut denom = 1.0;
            for i in (n - 1 - j)..=n {
                denom *= tau + i as f64;
            }
            rest += rj * c[n - 1 - j] / denom;
        }
        let d = p1 + q0 / (tau + n as f64);
        if d.norm() < 1e-12 * (p1.norm() + q0.norm() / (tau + n as f64)) {
            return Err(Error::ResonanceError { order: n });
        }
        c[n] = -rest / d;
    }
    Ok(c)
}

/// Least-squares extraction of the expansion coefficients c_1..c_m from a
/// normalized solution: fits `g(t) - 1` against powers (t e^(i theta))^k over
/// the nodes below `window`.
pub fn extract_series_coefficients(
    f: &SingularFunction,
    m: usize,
    window: f64,
) -> Result<Vec<Complex64>> {
    let ray = f.grid.ray;
    let pts: Vec<(f64, Complex64)> = f
        .grid
        .nodes
        .iter()
        .zip(&f.g)
        .filter(|(&t, _)| t <= window)
        .map(|(&t, &v)| (t, v - Complex64::new(1.0, 0.0)))
        .collect();
    if pts.len() < m + 2 {
        return Err(Error::DomainError(format!(
            "not enough nodes below {window} to fit {m} coefficients"
        )));
    }
    // Kernel evaluations near the base point carry absolute noise around
    // eps |alpha| / t, so rows are weighted by t to de-emphasize the noisiest
    // equations; the high-order columns live at large t anyway. Least squares
    // goes through a column-equilibrated Gram-Schmidt QR, which tolerates the
    // wide dynamic range of the monomial columns far better than normal
    // equations would.
    let mut cols: Vec<Vec<Complex64>> = (1..=m)
        .map(|k| pts.iter().map(|&(t, _)| ray.power(t, k as f64) * t).collect())
        .collect();
    let rhs: Vec<Complex64> = pts.iter().map(|&(t, y)| y * t).collect();
    let scales: Vec<f64> = cols
        .iter()
        .map(|c| c.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt().max(1e-300))
        .collect();
    for (col, &s) in cols.iter_mut().zip(&scales) {
        for v in col.iter_mut() {
            *v /= s;
        }
    }

    let dot = |a: &[Complex64], b: &[Complex64]| -> Complex64 {
        a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
    };
    // Modified Gram-Schmidt with one reorthogonalization pass.
    let mut r = vec![Complex64::new(0.0, 0.0); m * m];
    for j in 0..m {
        let mut col = std::mem::take(&mut cols[j]);
        for _ in 0..2 {
            for (i, q) in cols.iter().enumerate().take(j) {
                let proj = dot(q, &col);
                r[i * m + j] += proj;
                for (cv, qv) in col.iter_mut().zip(q) {
                    *cv -= proj * qv;
                }
            }
        }
        let norm = col.iter().map(|v| v.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-13 {
            return Err(Error::DomainError("rank-deficient basis in series fit".into()));
        }
        r[j * m + j] = Complex64::new(norm, 0.0);
        for v in col.iter_mut() {
            *v /= norm;
        }
        cols[j] = col;
    }
    // x = R^-1 Q^H rhs, then undo the column scaling.
    let mut x: Vec<Complex64> = (0..m).map(|j| dot(&cols[j], &rhs)).collect();
    for j in (0..m).rev() {
        let mut acc = x[j];
        for k in (j + 1)..m {
            acc -= r[j * m + k] * x[k];
        }
        x[j] = acc / r[j * m + j];
    }
    for (v, &s) in x.iter_mut().zip(&scales) {
        *v /= s;
    }
    Ok(x)
}

/// Outcome of re-solving at a different exponent.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct UniquenessReport {
    pub rho_main: f64,
    pub rho_alt: f64,
    pub lambda_main: f64,
    pub lambda_alt: f64,
    /// Relative sup deviation between the two solutions in the coarser norm.
    pub deviation: f64,
    pub passed: bool,
}

/// Re-solves the homogeneous problem with a different exponent (and its own
/// rate) and checks the two normalized solutions agree to 10x the solver
/// tolerance in the coarser norm.
pub fn uniqueness_probe(
    kernel: KernelPair,
    grid: Arc<RayGrid>,
    quad: QuadConfig,
    cfg: &SolveConfig,
    main: &Solution,
    rho_alt: f64,
) -> Result<UniquenessReport> {
    if !(rho_alt > kernel.tau) {
        return Err(Error::DomainError(format!(
            "rho_alt = {rho_alt} must exceed tau = {}",
            kernel.tau
        )));
    }
    let mut alt_cfg = *cfg;
    alt_cfg.rho = rho_alt;
    alt_cfg.lambda = 0.0;
    let alt = solve_homogeneous(kernel, grid, quad, &alt_cfg)?;
    let coarse = NormParams::new(main.rho.min(rho_alt) - 1.0, main.lambda.max(alt.lambda));
    let scale = main.f.weighted_norm(coarse).max(1e-300);
    let deviation = main.f.sub(&alt.f).weighted_norm(coarse) / scale;
    let passed = deviation <= 10.0 * cfg.tol;
    let report = UniquenessReport {
        rho_main: main.rho,
        rho_alt,
        lambda_main: main.lambda,
        lambda_alt: alt.lambda,
        deviation,
        passed,
    };
    if !passed {
        return Err(Error::MismatchDetected(format!(
            "solutions at rho = {} and rho = {} deviate by {deviation}",
            main.rho, rho_alt
        )));
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::grid::{build_ray_grid, Ray};
    use crate::kernels::{PerturbationKernel, SeparableKernel};
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use statrs::function::gamma::gamma as gamma_fn;

    fn c(re: f64) -> Complex64 {
        Complex64::new(re, 0.0)
    }

    fn toy_pair(tau: f64, r0: f64) -> KernelPair {
        let k0 = SeparableKernel::new(
            Arc::new(|z: Complex64| -(z - 1.0)),
            Arc::new(move |_| Complex64::new(tau, 0.0)),
            c(1.0),
        );
        if r0 == 0.0 {
            KernelPair::separable(k0, tau, 1.0)
        } else {
            let ks = PerturbationKernel::new(
                Arc::new(move |za: Complex64, zb: Complex64| -(za - zb) * r0 / (-(za - 1.0))),
                1.0,
                1.0,
            );
            KernelPair::with_perturbation(k0, ks, tau)
        }
    }

    fn toy_grid(t_max: f64, npp: usize) -> Arc<RayGrid> {
        let ray = Ray::new(c(1.0), 0.0, t_max).unwrap();
        Arc::new(build_ray_grid(ray, t_max * 2f64.powi(-20), 2.0, npp).unwrap())
    }

    /// Closed form for the toy problem: c_n = Gamma(tau) r0^n / (n! Gamma(tau + n)).
    fn toy_coefficient(tau: f64, r0: f64, n: usize) -> f64 {
        let mut fact = 1.0;
        for k in 1..=n {
            fact *= k as f64;
        }
        gamma_fn(tau) * r0.powi(n as i32) / (fact * gamma_fn(tau + n as f64))
    }

    #[test]
    fn oracle_matches_closed_form() {
        // p = -(z - 1) about 1: [0, -1]; q = 0.5: [0.5].
        let p = [c(0.0), c(-1.0)];
        let q = [c(0.5)];
        let r = [c(0.25)];
        let coeffs = series_oracle(&p, &q, &r, 0.5, 4).unwrap();
        assert_relative_eq!(coeffs[1].re, 0.5, max_relative = 1e-12);
        assert_abs_diff_eq!(coeffs[2].re, 1.0 / 24.0, epsilon = 1e-12);
        for n in 1..=4 {
            assert_relative_eq!(
                coeffs[n].re,
                toy_coefficient(0.5, 0.25, n),
                max_relative = 1e-10
            );
            assert_abs_diff_eq!(coeffs[n].im, 0.0, epsilon = 1e-14);
        }

        // Zero perturbation: the prototype is exact and all corrections vanish.
        let coeffs = series_oracle(&p, &q, &[], 0.5, 4).unwrap();
        for n in 1..=4 {
            assert_abs_diff_eq!(coeffs[n].norm(), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn oracle_rejects_mismatched_tau() {
        let p = [c(0.0), c(-1.0)];
        let q = [c(0.5)];
        assert!(matches!(
            series_oracle(&p, &q, &[], 0.7, 3),
            Err(Error::ResonanceError { order: 0 })
        ));
    }

    #[test]
    fn zero_inhomogeneity_yields_zero() {
        let grid = toy_grid(2.0, 12);
        let op = OperatorHandle::new(toy_pair(0.5, 0.25), grid.clone(), QuadConfig::default());
        let g = SingularFunction::zero(grid, 0.5);
        let cfg = SolveConfig { rho: 1.5, lambda: 2.0, ..Default::default() };
        let sol = solve_inhomogeneous(&op, &g, &cfg).unwrap();
        assert!(sol.f.g.iter().all(|v| v.norm() == 0.0));
        assert_eq!(sol.iterations, 1);
        assert_eq!(sol.final_residual, 0.0);
    }

    #[test]
    fn homogeneous_without_perturbation_reduces_to_prototype() {
        let grid = toy_grid(2.0, 16);
        let cfg = SolveConfig::default();
        let sol = solve_homogeneous(toy_pair(0.5, 0.0), grid, QuadConfig::default(), &cfg).unwrap();
        let norm = sol
            .f_star
            .weighted_norm(NormParams::new(sol.rho - 1.0, sol.lambda));
        assert!(norm <= 1e-10, "correction norm {norm}");
        // The residual floor is the zeta - alpha reconstruction noise of
        // kernel evaluations at t_min, well below the 1e-8 contract.
        assert!(sol.final_residual <= 1e-8, "residual {}", sol.final_residual);
        // Normalized solution: smooth part 1 at the base point.
        assert_relative_eq!(sol.f.smooth_at(sol.f.grid.t_min()).re, 1.0, max_relative = 1e-8);
    }

    #[test]
    fn perturbed_solve_converges_geometrically_and_matches_oracle() {
        let grid = toy_grid(4.0, 16);
        let cfg = SolveConfig::default();
        let sol =
            solve_homogeneous(toy_pair(0.5, 0.25), grid, QuadConfig::default(), &cfg).unwrap();
        assert!(sol.final_residual <= 1e-9, "residual {}", sol.final_residual);

        // Successive differences shrink at least at the measured rate.
        let kappa = sol.contraction.overall;
        for w in sol.diff_norms.windows(2) {
            assert!(
                w[1] <= kappa * w[0] + 1e-12,
                "difference sequence not geometric: {} -> {} (kappa {kappa})",
                w[0],
                w[1]
            );
        }
        // The a-posteriori bound holds at exit.
        assert!(sol.final_residual <= cfg.tol * (1.0 + 1.0 / (1.0 - kappa)));

        // Extracted expansion coefficients against the oracle; two guard
        // orders absorb the truncation bias.
        let got = extract_series_coefficients(&sol.f, 5, 1.5).unwrap();
        let p = [c(0.0), c(-1.0)];
        let q = [c(0.5)];
        let r = [c(0.25)];
        let want = series_oracle(&p, &q, &r, 0.5, 5).unwrap();
        for k in 1..=3 {
            assert_abs_diff_eq!(got[k - 1].re, want[k].re, epsilon = 1e-4);
            assert_abs_diff_eq!(got[k - 1].im, 0.0, epsilon = 1e-6);
        }
        // The correction's fitted order sits at tau - 1 + gamma.
        let order = sol.f_star.fitted_order(0.01).unwrap();
        assert!(order >= 0.5 - 0.05, "correction order {order}");
    }

    #[test]
    fn lambda_independence_of_the_fixed_point() {
        let grid = toy_grid(4.0, 16);
        let mk = |lambda: f64| {
            let cfg = SolveConfig { lambda, ..Default::default() };
            solve_homogeneous(toy_pair(0.5, 0.25), grid.clone(), QuadConfig::default(), &cfg)
                .unwrap()
        };
        let a = mk(2.0);
        let b = mk(4.0);
        let coarse = NormParams::new(a.rho - 1.0, 4.0);
        let dev = a.f.sub(&b.f).weighted_norm(coarse) / a.f.weighted_norm(coarse);
        assert!(dev <= 10.0 * 1e-10, "lambda dependence {dev}");
    }

    #[test]
    fn uniqueness_probe_across_exponents() {
        let grid = toy_grid(4.0, 16);
        let cfg = SolveConfig::default();
        let main = solve_homogeneous(toy_pair(0.5, 0.25), grid.clone(), QuadConfig::default(), &cfg)
            .unwrap();
        for rho_alt in [0.6, 1.2] {
            let rep = uniqueness_probe(
                toy_pair(0.5, 0.25),
                grid.clone(),
                QuadConfig::default(),
                &cfg,
                &main,
                rho_alt,
            )
            .unwrap();
            assert!(rep.passed, "probe at rho = {rho_alt} deviates by {}", rep.deviation);
        }
    }

    #[test]
    fn divergent_iteration_is_detected() {
        // A perturbation this large is not a contraction at a small fixed
        // rate; the successive differences grow and the solver notices.
        let grid = toy_grid(4.0, 8);
        let op = OperatorHandle::new(toy_pair(0.5, 50.0), grid.clone(), QuadConfig::default());
        let g = SingularFunction::monomial(grid, 0.5);
        let cfg = SolveConfig { rho: 1.5, lambda: 1.5, max_iter: 60, ..Default::default() };
        assert!(matches!(
            solve_inhomogeneous(&op, &g, &cfg),
            Err(Error::NotContracting { .. })
        ));
    }

    #[test]
    fn iteration_budget_is_enforced() {
        let grid = toy_grid(4.0, 8);
        let op = OperatorHandle::new(toy_pair(0.5, 0.25), grid.clone(), QuadConfig::default());
        let g = SingularFunction::monomial(grid, 0.5);
        let cfg = SolveConfig { rho: 1.5, lambda: 2.0, max_iter: 2, tol: 1e-13, ..Default::default() };
        assert!(matches!(
            solve_inhomogeneous(&op, &g, &cfg),
            Err(Error::MaxIterExceeded { max_iter: 2, .. })
        ));
    }

    #[test]
    fn corrupted_reference_solution_is_flagged() {
        let grid = toy_grid(4.0, 16);
        let cfg = SolveConfig::default();
        let mut main =
            solve_homogeneous(toy_pair(0.5, 0.25), grid.clone(), QuadConfig::default(), &cfg)
                .unwrap();
        main.f = main.f.scale(Complex64::new(1.001, 0.0));
        assert!(matches!(
            uniqueness_probe(
                toy_pair(0.5, 0.25),
                grid,
                QuadConfig::default(),
                &cfg,
                &main,
                1.2
            ),
            Err(Error::MismatchDetected(_))
        ));
    }

    #[test]
    fn solution_self_converges_under_refinement() {
        let cfg = SolveConfig::default();
        let solve_at = |npp: usize| {
            let grid = toy_grid(4.0, npp);
            solve_homogeneous(toy_pair(0.5, 0.25), grid, QuadConfig::default(), &cfg).unwrap()
        };
        let coarse = solve_at(4);
        let mid = solve_at(8);
        let fine = solve_at(16);
        let probes: Vec<f64> = (1..40).map(|k| 4.0 * k as f64 / 41.0).collect();
        let dev = |a: &Solution, b: &Solution| {
            probes
                .iter()
                .map(|&t| (a.f.eval(t).unwrap() - b.f.eval(t).unwrap()).norm())
                .fold(0.0, f64::max)
        };
        let d1 = dev(&coarse, &mid);
        let d2 = dev(&mid, &fine).max(1e-14);
        let order = (d1 / d2).log2();
        assert!(order >= 4.0, "self-convergence order {order} (d1 = {d1}, d2 = {d2})");
    }
}
