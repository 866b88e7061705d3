//! Application of regular singular Volterra operators to functions on a ray,
//! by quadrature that respects the endpoint singularities: the integrand
//! carries an s^sigma factor at the base point and, for a perturbation kernel
//! with non-integer vanishing order, a (t - s)^gamma factor on the diagonal.
//!
//! Also measures the two quantities the contraction argument runs on: the
//! smoothing order of the perturbation part and the operator norm of the
//! whole operator on a weighted space, split into near and far regions.

use std::sync::Arc;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::grid::{NormParams, RayGrid, SingularFunction};
use crate::kernels::{ConditionReport, KernelFn, KernelPair};
use crate::quad::{unit_rule, QuadConfig, QuadRule};

/// Which part of V = V0 + V_star to apply.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OperatorPart {
    /// The separable part V0 alone. Preserves the singularity exponent.
    Separable,
    /// The perturbation V_star alone. Raises the exponent by gamma.
    Perturbation,
    /// The whole operator. Output exponent is the input exponent.
    Combined,
}

/// A Volterra operator bound to a grid and a quadrature configuration.
#[derive(Debug, Clone)]
pub struct OperatorHandle {
    pub kernel: KernelPair,
    pub grid: Arc<RayGrid>,
    pub quad: QuadConfig,
    /// Condition reports attached by the pipeline that built the operator.
    pub reports: Vec<ConditionReport>,
}

impl OperatorHandle {
    pub fn new(kernel: KernelPair, grid: Arc<RayGrid>, quad: QuadConfig) -> Self {
        OperatorHandle { kernel, grid, quad, reports: Vec::new() }
    }

    /// Applies the selected part of the operator to `phi`.
    ///
    /// The integral along the straight path from the base point is computed
    /// per output node with composite Gauss rules: a Gauss-Jacobi rule with
    /// weight s^sigma on the head segment (0, t_min], Gauss-Legendre on the
    /// interior panels, and a (t - s)^gamma Jacobi rule on the diagonal
    /// segment when the perturbation kernel has a non-integer gamma with a
    /// reduced form available.
    pub fn apply(&self, phi: &SingularFunction, part: OperatorPart) -> Result<SingularFunction> {
        let sigma = phi.sigma;
        if sigma <= -1.0 {
            return Err(Error::ExponentTooSingular { sigma });
        }
        let gamma = self.kernel.gamma();
        let out_sigma = match part {
            OperatorPart::Separable | OperatorPart::Combined => sigma,
            OperatorPart::Perturbation => sigma + gamma,
        };
        if part == OperatorPart::Perturbation && self.kernel.k_star.is_none() {
            let mut out = SingularFunction::zero(self.grid.clone(), sigma);
            out.lambda_hint = phi.lambda_hint;
            return Ok(out);
        }
        // A fractional diagonal zero needs its own weighted rule, so the
        // combined operator splits into its parts in that case.
        if part == OperatorPart::Combined {
            if let Some(ks) = &self.kernel.k_star {
                if ks.gamma.fract() != 0.0 && ks.reduced.is_some() {
                    let v0 = self.apply(phi, OperatorPart::Separable)?;
                    let vs = self.apply(phi, OperatorPart::Perturbation)?;
                    return Ok(v0.add(&vs));
                }
            }
        }

        let k0 = self.kernel.k0.clone();
        let k_star = self.kernel.k_star.clone();
        let kernel: KernelFn = match part {
            OperatorPart::Separable => Arc::new(move |za, zb| k0.k0(za, zb)),
            OperatorPart::Perturbation => {
                let ks = k_star.clone().unwrap();
                Arc::new(move |za, zb| ks.eval(za, zb))
            }
            OperatorPart::Combined => {
                Arc::new(move |za, zb| {
                    let mut v = k0.k0(za, zb);
                    if let Some(ks) = &k_star {
                        v += ks.eval(za, zb);
                    }
                    v
                })
            }
        };
        // Diagonal Jacobi treatment only matters for the perturbation applied
        // alone with non-integer gamma; the separable part has no diagonal
        // zero and the combined kernel is dominated by it.
        let diagonal = match part {
            OperatorPart::Perturbation => self
                .kernel
                .k_star
                .as_ref()
                .filter(|ks| ks.gamma.fract() != 0.0)
                .and_then(|ks| ks.reduced.clone().map(|r| (ks.gamma, r))),
            _ => None,
        };
        let mut out =
            apply_kernel_raw(&self.grid, &self.quad, phi, out_sigma, &kernel, diagonal.as_ref())?;
        out.lambda_hint = phi.lambda_hint.max(self.kernel.lambda_delta);
        Ok(out)
    }
}

/// Low-degree Newton interpolant through the smallest grid nodes.
///
/// The quadrature head segment (0, t_min] needs the smooth part below the
/// grid span. Extrapolating the full-degree panel interpolant there amplifies
/// roundoff; a degree-6 model through the lowest nodes is stable at one
/// panel-width of extrapolation and, the smooth part being analytic at the
/// base point, loses nothing.
pub(crate) struct HeadModel {
    ts: Vec<f64>,
    divided: Vec<Complex64>,
}

impl HeadModel {
    pub(crate) fn build(phi: &SingularFunction) -> HeadModel {
        // Six points spread over the first two panels: extrapolating to 0 then
        // stays within a third of the node span, keeping the amplification of
        // sample roundoff around 1e2.
        let avail = (2 * phi.grid.nodes_per_panel).min(phi.g.len());
        let m = 6.min(avail);
        let mut ts = Vec::with_capacity(m);
        let mut divided = Vec::with_capacity(m);
        for i in 0..m {
            let idx = i * (avail - 1) / (m - 1).max(1);
            ts.push(phi.grid.nodes[idx]);
            divided.push(phi.g[idx]);
        }
        for k in 1..m {
            for i in (k..m).rev() {
                divided[i] = (divided[i] - divided[i - 1]) / (ts[i] - ts[i - k]);
            }
        }
        HeadModel { ts, divided }
    }

    pub(crate) fn eval(&self, s: f64) -> Complex64 {
        let m = self.ts.len();
        let mut acc = self.divided[m - 1];
        for i in (0..m - 1).rev() {
            acc = acc * (s - self.ts[i]) + self.divided[i];
        }
        acc
    }
}

/// Applies a raw Volterra kernel `w(zeta(a), zeta(a'))` to `phi`, storing the
/// result with the caller-declared output exponent.
///
/// `diagonal`, when given, supplies `(gamma, reduced)` with
/// `w = reduced * ((zeta(a) - zeta(a'))^gamma)` so the segment touching the
/// diagonal can use a Jacobi rule with weight (t - s)^gamma.
pub fn apply_kernel_raw(
    grid: &Arc<RayGrid>,
    quad: &QuadConfig,
    phi: &SingularFunction,
    out_sigma: f64,
    kernel: &KernelFn,
    diagonal: Option<&(f64, KernelFn)>,
) -> Result<SingularFunction> {
    let sigma = phi.sigma;
    if sigma <= -1.0 {
        return Err(Error::ExponentTooSingular { sigma });
    }
    let order = quad.order.max(4);
    let ray = grid.ray;
    let head = HeadModel::build(phi);

    let values: Result<Vec<Complex64>> = grid
        .nodes
        .par_iter()
        .map(|&t| {
            let j1 = integrate_to(grid, quad, phi, &head, t, kernel, diagonal, order)?;
            let j2 = integrate_to(grid, quad, phi, &head, t, kernel, diagonal, order + 8)?;
            let scale = j1.0.norm().max(j1.1).max(1e-300);
            if (j2.0 - j1.0).norm() > quad.tol * scale {
                return Err(Error::QuadratureFailure(format!(
                    "panel integral at t = {t} not resolved: orders {order} and {} differ by {:.3e} (scale {:.3e})",
                    order + 8,
                    (j2.0 - j1.0).norm(),
                    scale
                )));
            }
            // I(t) = e^(i theta (sigma + 1)) * J; smooth part divides out the
            // (t e^(i theta))^out_sigma factor.
            let phase = Complex64::from_polar(1.0, ray.theta * (sigma + 1.0 - out_sigma));
            Ok(phase * j2.0 * t.powf(-out_sigma))
        })
        .collect();
    Ok(SingularFunction {
        grid: grid.clone(),
        sigma: out_sigma,
        g: values?,
        lambda_hint: phi.lambda_hint,
    })
}

/// Computes `J = int_0^t s^sigma k(z_t, z_s) g(s) ds` by composite quadrature
/// aligned with the grid panels. Returns (J, L1 magnitude) where the L1 value
/// is the sum of absolute quadrature contributions, used as the cancellation-
/// aware scale for error control.
#[allow(clippy::too_many_arguments)]
fn integrate_to(
    grid: &RayGrid,
    quad: &QuadConfig,
    phi: &SingularFunction,
    head_model: &HeadModel,
    t: f64,
    kernel: &KernelFn,
    diagonal: Option<&(f64, KernelFn)>,
    order: usize,
) -> Result<(Complex64, f64)> {
    let ray = grid.ray;
    let sigma = phi.sigma;
    let t_lo = grid.t_min();
    let z_t = ray.point(t);
    let dir = ray.direction();
    let smooth = |s: f64| -> Complex64 {
        if s < t_lo {
            head_model.eval(s)
        } else {
            phi.smooth_at(s)
        }
    };
    let eval_integrand = |s: f64| -> Complex64 {
        let z_s = ray.alpha + dir * s;
        kernel(z_t, z_s) * smooth(s)
    };

    let mut total = Complex64::new(0.0, 0.0);
    let mut l1 = 0.0f64;
    let mut add = |v: Complex64| {
        total += v;
        l1 += v.norm();
    };

    // With a fractional diagonal weight, the segment touching s = t must be
    // long enough that earlier segments stay clear of the (t - s)^gamma
    // singularity; starting it at the last panel boundary at or below t/2
    // keeps t - s >= t/2 everywhere else. When no boundary qualifies the
    // diagonal segment reaches 0 and both endpoint weights go into one rule.
    let diag_start = diagonal.map(|_| {
        let i = grid.boundaries.partition_point(|&b| b <= t / 2.0);
        if i == 0 {
            0.0
        } else {
            grid.boundaries[i - 1]
        }
    });

    if let Some((gw, reduced)) = diagonal {
        if diag_start == Some(0.0) {
            // Single segment [0, t] with weight x^sigma (1 - x)^gamma.
            let rule = unit_rule(order, *gw, sigma)?;
            let mut seg = Complex64::new(0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = t * x;
                let z_s = ray.alpha + dir * s;
                seg += reduced(z_t, z_s) * smooth(s) * w;
            }
            add(seg * Complex64::from_polar(t.powf(sigma + gw + 1.0), ray.theta * *gw));
            return Ok((total, l1));
        }
    }
    let cutoff = diag_start.unwrap_or(t);

    // Head segment (0, t_min]: Jacobi weight s^sigma (plain Legendre when the
    // configuration asks for it, for comparison runs).
    let b0 = grid.t_min().min(cutoff);
    let head_rule = match quad.rule {
        QuadRule::GaussJacobi => unit_rule(order, 0.0, sigma)?,
        QuadRule::LegendreOnly => unit_rule(order, 0.0, 0.0)?,
    };
    let mut head = Complex64::new(0.0, 0.0);
    for (&x, &w) in head_rule.nodes.iter().zip(&head_rule.weights) {
        let s = b0 * x;
        let f = eval_integrand(s);
        let f = match quad.rule {
            QuadRule::GaussJacobi => f,
            QuadRule::LegendreOnly => f * s.powf(sigma) * b0.powf(-sigma),
        };
        head += f * w;
    }
    add(head * b0.powf(sigma + 1.0));

    // Interior panels fully below the cutoff, then the partial segment.
    let gl = unit_rule(order, 0.0, 0.0)?;
    let mut lo = b0;
    let mut segments: Vec<(f64, f64)> = Vec::new();
    for &b in &grid.boundaries[1..] {
        if b >= cutoff {
            break;
        }
        segments.push((lo, b));
        lo = b;
    }
    if cutoff > lo {
        segments.push((lo, cutoff));
    }
    for &(a, b) in &segments {
        let len = b - a;
        let mut seg = Complex64::new(0.0, 0.0);
        for (&x, &w) in gl.nodes.iter().zip(&gl.weights) {
            let s = a + len * x;
            seg += eval_integrand(s) * s.powf(sigma) * w;
        }
        add(seg * len);
    }

    // The diagonal segment [cutoff, t] with weight (1 - x)^gamma.
    if let Some((gw, reduced)) = diagonal {
        let len = t - cutoff;
        if len > 0.0 {
            let rule = unit_rule(order, *gw, 0.0)?;
            let mut seg = Complex64::new(0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                let s = cutoff + len * x;
                let z_s = ray.alpha + dir * s;
                seg += reduced(z_t, z_s) * smooth(s) * s.powf(sigma) * w;
            }
            add(seg * Complex64::from_polar(len.powf(*gw + 1.0), ray.theta * *gw));
        }
    }
    Ok((total, l1))
}

/// Euler beta value `Gamma(gamma + 1) Gamma(sigma + 1) / Gamma(sigma + gamma + 2)`,
/// the constant in the smoothing bound.
pub fn beta_moment(gamma: f64, sigma: f64) -> Result<f64> {
    if !(gamma > -1.0) || !(sigma > -1.0) {
        return Err(Error::DomainError(format!(
            "beta_moment needs both arguments > -1, got ({gamma}, {sigma})"
        )));
    }
    Ok((ln_gamma(gamma + 1.0) + ln_gamma(sigma + 1.0) - ln_gamma(sigma + gamma + 2.0)).exp())
}

/// Fitted growth order of |V_star phi| at the base point, or None when the
/// image is numerically zero (nothing to fit).
pub fn smoothing_order(op: &OperatorHandle, phi: &SingularFunction) -> Result<Option<f64>> {
    let image = op.apply(phi, OperatorPart::Perturbation)?;
    let window = op.grid.t_min() * 64.0;
    Ok(image.fitted_order(window.min(op.grid.t_max())))
}

/// Measured contraction data for V on a weighted space, split at |zeta - alpha| = delta.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct ContractionEstimate {
    pub rho: f64,
    pub lambda: f64,
    pub near_factor: f64,
    pub far_factor: f64,
    pub overall: f64,
    pub delta_split: f64,
}

/// Estimates the operator norm of V on the space with exponent rho - 1 and
/// rate lambda, from below, by applying it to unit-norm test functions: the
/// extremal monomial (zeta - alpha)^(rho - 1) plus `trials` random smooth
/// parts (degree-8 polynomials in t / t_max with coefficients in the unit
/// disk). The sup is split into the near region t < delta and far region
/// t >= delta.
pub fn contraction_estimate(
    op: &OperatorHandle,
    rho: f64,
    lambda: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<ContractionEstimate> {
    if !(rho > op.kernel.tau) {
        return Err(Error::DomainError(format!(
            "contraction estimate needs rho > tau, got rho = {rho}, tau = {}",
            op.kernel.tau
        )));
    }
    let grid = &op.grid;
    let params = NormParams::new(rho - 1.0, lambda);
    let t_max = grid.t_max();

    let results: Result<Vec<(f64, f64)>> = (0..=trials)
        .into_par_iter()
        .map(|trial| {
            let phi = if trial == 0 {
                SingularFunction::monomial(grid.clone(), rho - 1.0)
            } else {
                let mut rng = ChaCha8Rng::seed_from_u64(seed.wrapping_add(trial as u64));
                let coeffs: Vec<Complex64> = (0..9)
                    .map(|_| {
                        let r = rng.gen::<f64>().sqrt();
                        let phase = rng.gen::<f64>() * std::f64::consts::TAU;
                        Complex64::from_polar(r, phase)
                    })
                    .collect();
                SingularFunction::from_fn(grid.clone(), rho - 1.0, lambda, |t| {
                    let x = t / t_max;
                    let mut acc = Complex64::new(0.0, 0.0);
                    for &c in coeffs.iter().rev() {
                        acc = acc * x + c;
                    }
                    acc
                })
            };
            let norm = phi.weighted_norm(params);
            if norm == 0.0 {
                if phi.g.iter().all(|v| v.norm() == 0.0) {
                    return Ok((0.0, 0.0));
                }
                return Err(Error::DomainError(format!(
                    "weighted norm underflows at lambda = {lambda}; rate too large for this grid"
                )));
            }
            let phi = phi.scale(Complex64::new(1.0 / norm, 0.0));
            let image = op.apply(&phi, OperatorPart::Combined)?;
            let mut near = 0.0f64;
            let mut far = 0.0f64;
            let ds = image.sigma - params.sigma;
            for &t in &grid.oversample() {
                let v = t.powf(ds) * (-lambda * t).exp() * image.smooth_at(t).norm();
                if t < delta {
                    near = near.max(v);
                } else {
                    far = far.max(v);
                }
            }
            Ok((near, far))
        })
        .collect();
    let results = results?;
    let near_factor = results.iter().map(|r| r.0).fold(0.0, f64::max);
    let far_factor = results.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(ContractionEstimate {
        rho,
        lambda,
        near_factor,
        far_factor,
        overall: near_factor.max(far_factor),
        delta_split: delta,
    })
}

/// Doubles lambda from `max(lambda_start, lambda_delta + 1)` until the
/// measured contraction factor drops to `kappa_target`, and returns that
/// lambda. The returned value always exceeds lambda_delta.
pub fn lambda_lower_search(
    op: &OperatorHandle,
    rho: f64,
    kappa_target: f64,
    lambda_start: f64,
    delta: f64,
    trials: usize,
    seed: u64,
) -> Result<f64> {
    if !(kappa_target > 0.0 && kappa_target < 1.0) {
        return Err(Error::DomainError(format!(
            "kappa_target must lie in (0, 1), got {kappa_target}"
        )));
    }
    let max_doublings = 40;
    let mut lambda = lambda_start.max(op.kernel.lambda_delta + 1.0);
    let mut best = f64::INFINITY;
    let mut doublings = 0;
    // Beyond this the weight e^(-lambda t) underflows over most of the grid
    // and the measured factors stop meaning anything.
    let lambda_cap = 500.0 / op.grid.t_min();
    for _ in 0..max_doublings {
        if lambda > lambda_cap {
            break;
        }
        let est = contraction_estimate(op, rho, lambda, delta, trials, seed)?;
        if est.overall <= kappa_target {
            return Ok(lambda);
        }
        best = best.min(est.overall);
        lambda *= 2.0;
        doublings += 1;
    }
    Err(Error::SearchExhausted { doublings, best })
}
