//! The explicit solution of the separable equation f = V0 f, built from the
//! kernel data as (1/p) exp(-int q/p), and its verification: fixed-point
//! residual, base-point invariance, and the leading coefficient at the
//! singular point.
//!
//! The only nonsmooth piece of the exponent integral, tau/(zeta - alpha), is
//! integrated in closed form; panel quadrature only ever sees the bounded
//! remainder q/p + tau/(zeta - alpha).

use std::sync::Arc;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::grid::{NormParams, RayGrid, SingularFunction};
use crate::kernels::SeparableKernel;
use crate::quad::unit_rule;
use crate::volterra::{OperatorHandle, OperatorPart};

/// The prototype solution f0, stored with exponent tau - 1.
#[derive(Debug, Clone)]
pub struct PrototypeSolution {
    pub f0: SingularFunction,
    /// Arclength of the base point b on the ray.
    pub base_point_t: f64,
    pub tau: f64,
    /// Leading coefficient M with f0 ~ M (zeta - alpha)^(tau - 1), once
    /// computed. After `normalize` this is 1.
    pub leading: Option<Complex64>,
}

/// Integrates `f` along the ray from `base_t` to every grid node, returning
/// one value per node. Each inter-node segment is checked with an embedded
/// higher-order rule; `noise` gives the absolute rounding floor of a single
/// integrand evaluation near t (the prototype remainder subtracts two large
/// terms, so its floor is far above machine epsilon times the value).
fn cumulative_line_integral(
    grid: &RayGrid,
    f: &dyn Fn(f64) -> Complex64,
    noise: &dyn Fn(f64) -> f64,
    base_t: f64,
    tol: f64,
) -> Result<Vec<Complex64>> {
    let lo_rule = unit_rule(12, 0.0, 0.0)?;
    let hi_rule = unit_rule(20, 0.0, 0.0)?;
    let segment = |a: f64, b: f64| -> Result<Complex64> {
        if a == b {
            return Ok(Complex64::new(0.0, 0.0));
        }
        let len = b - a;
        let eval = |rule: &crate::quad::UnitRule| -> Complex64 {
            let mut acc = Complex64::new(0.0, 0.0);
            for (&x, &w) in rule.nodes.iter().zip(&rule.weights) {
                acc += f(a + len * x) * w;
            }
            acc * len
        };
        let v1 = eval(&lo_rule);
        let v2 = eval(&hi_rule);
        let floor = len.abs() * (noise(a.min(b)) + noise(a.max(b)));
        if (v2 - v1).norm() > tol * v2.norm() + floor + 1e-300 {
            return Err(Error::QuadratureFailure(format!(
                "integrand not resolved on [{a}, {b}]: orders 12 and 20 differ by {:.3e}",
                (v2 - v1).norm()
            )));
        }
        Ok(v2)
    };

    // Prefix sums over node-to-node segments.
    let nodes = &grid.nodes;
    let mut prefix = Vec::with_capacity(nodes.len());
    prefix.push(Complex64::new(0.0, 0.0));
    for w in nodes.windows(2) {
        let last = *prefix.last().unwrap();
        prefix.push(last + segment(w[0], w[1])?);
    }
    // Offset so the integral is measured from base_t.
    let k = nodes.partition_point(|&t| t <= base_t).saturating_sub(1);
    let s_base = prefix[k] + segment(nodes[k], base_t)?;
    Ok(prefix.into_iter().map(|s| s - s_base).collect())
}

/// Builds the prototype solution on the grid with the given base point.
///
/// The exponent integral is split as
/// `-int q/p = tau log(u(a)/u(b)) - int (q/p + tau/(zeta - alpha))`,
/// the logarithmic part exact and the bounded remainder quadratured.
pub fn compute_prototype(
    k0: &SeparableKernel,
    tau: f64,
    grid: Arc<RayGrid>,
    base_t: f64,
) -> Result<PrototypeSolution> {
    let ray = grid.ray;
    if base_t < grid.t_min() || base_t > grid.t_max() {
        return Err(Error::OutOfRange { t: base_t, t_min: grid.t_min(), t_max: grid.t_max() });
    }
    let alpha = k0.alpha;
    let dir = ray.direction();
    let p = k0.p.clone();
    let q = k0.q.clone();
    let remainder = move |t: f64| -> Complex64 {
        let z = alpha + dir * t;
        (q(z) / p(z) + tau / (z - alpha)) * dir
    };
    let p_noise = k0.p.clone();
    let q_noise = k0.q.clone();
    let noise = move |t: f64| -> f64 {
        let z = alpha + dir * t;
        let p_abs = p_noise(z).norm().max(1e-300);
        // Evaluating p near its root cancels to |p| from O(1) intermediates,
        // so the quotient noise carries an extra 1/|p| on top of the
        // cancellation between q/p and tau/(zeta - alpha).
        1e-15 * (q_noise(z).norm() / p_abs + tau / t) * (1.0 + 1.0 / p_abs)
    };
    let e_vals = cumulative_line_integral(&grid, &remainder, &noise, base_t, 1e-11)?;

    // g0(t) = u / (p(zeta) u_b^tau) * exp(-E(t)), with u = t e^(i theta).
    let ub_pow = ray.power(base_t, tau);
    let g: Vec<Complex64> = grid
        .nodes
        .iter()
        .zip(&e_vals)
        .map(|(&t, &e)| {
            let z = ray.point(t);
            let u = dir * t;
            u / ((k0.p)(z) * ub_pow) * (-e).exp()
        })
        .collect();
    let mut f0 = SingularFunction { grid, sigma: tau - 1.0, g, lambda_hint: 0.0 };
    f0.lambda_hint = suggest_lambda_hint(&f0);
    Ok(PrototypeSolution { f0, base_point_t: base_t, tau, leading: None })
}

/// Smallest rate from a fixed ladder whose weighted profile peaks away from
/// the truncation end, recorded as the function's finite-norm witness.
pub fn suggest_lambda_hint(f: &SingularFunction) -> f64 {
    let ladder = [0.0, 0.25, 0.5, 1.0, 2.0, 4.0, 8.0, 16.0];
    let ts = f.grid.oversample();
    let cutoff = 0.9 * f.grid.t_max();
    for &lambda in &ladder {
        let mut best_t = ts[0];
        let mut best_v = f64::NEG_INFINITY;
        for &t in &ts {
            let v = (-lambda * t).exp() * f.smooth_at(t).norm();
            if v > best_v {
                best_v = v;
                best_t = t;
            }
        }
        if best_t < cutoff {
            return lambda;
        }
    }
    *ladder.last().unwrap()
}

impl PrototypeSolution {
    /// Divides out the leading coefficient so f0 is the affine-subspace
    /// representative (zeta - alpha)^(tau - 1) + higher order.
    pub fn normalize(&mut self) -> Result<Complex64> {
        let m = estimate_leading_constant(self)?;
        let inv = Complex64::new(1.0, 0.0) / m;
        for v in &mut self.f0.g {
            *v *= inv;
        }
        self.leading = Some(Complex64::new(1.0, 0.0));
        Ok(m)
    }
}

/// Relative fixed-point residual `|f0 - V0 f0| / |f0|` in the (tau - 1, Lambda)
/// norm, Lambda taken from the stored hint.
pub fn verify_fixed_point(proto: &PrototypeSolution, op: &OperatorHandle) -> Result<f64> {
    let image = op.apply(&proto.f0, OperatorPart::Separable)?;
    let params = NormParams::new(proto.tau - 1.0, proto.f0.lambda_hint);
    let denom = proto.f0.weighted_norm(params);
    if denom == 0.0 {
        return Ok(0.0);
    }
    Ok(proto.f0.sub(&image).weighted_norm(params) / denom)
}

/// Builds the prototype from two base points and returns the constant c with
/// `f0^(b1) = c f0^(b2)`, failing if the pointwise ratio is not constant.
pub fn base_point_invariance(
    k0: &SeparableKernel,
    tau: f64,
    grid: Arc<RayGrid>,
    t_b1: f64,
    t_b2: f64,
) -> Result<Complex64> {
    let p1 = compute_prototype(k0, tau, grid.clone(), t_b1)?;
    let p2 = compute_prototype(k0, tau, grid, t_b2)?;
    proportionality_constant(&p1.f0, &p2.f0)
}

/// The constant c with f = c g, or NotProportional when the pointwise ratio
/// deviates beyond 1e-8 relative standard deviation.
pub fn proportionality_constant(
    f: &SingularFunction,
    g: &SingularFunction,
) -> Result<Complex64> {
    let ratios: Vec<Complex64> = f
        .g
        .iter()
        .zip(&g.g)
        .filter(|(_, b)| b.norm() > 0.0)
        .map(|(a, b)| a / b)
        .collect();
    if ratios.is_empty() {
        return Err(Error::NotProportional { deviation: f64::INFINITY });
    }
    let n = ratios.len() as f64;
    let mean = ratios.iter().sum::<Complex64>() / n;
    let var = ratios.iter().map(|r| (r - mean).norm_sqr()).sum::<f64>() / n;
    let deviation = var.sqrt() / mean.norm().max(1e-300);
    if deviation > 1e-8 {
        return Err(Error::NotProportional { deviation });
    }
    Ok(mean)
}

/// Extrapolates the smooth part to the base point, returning the leading
/// coefficient M with f0 in M (zeta - alpha)^(tau - 1) + higher order.
///
/// Aitken extrapolation on g at t_min, 2 t_min, 4 t_min; exact for profiles
/// M + a t^e, which is the form the regularity estimate guarantees.
pub fn estimate_leading_constant(proto: &PrototypeSolution) -> Result<Complex64> {
    let f = &proto.f0;
    let c = f.grid.t_min();
    let v1 = f.smooth_at(c);
    let v2 = f.smooth_at(2.0 * c);
    let v4 = f.smooth_at(4.0 * c);
    let d1 = v2 - v1;
    let d2 = v4 - v2;
    let scale = v1.norm().max(v2.norm()).max(v4.norm());
    if scale == 0.0 {
        return Err(Error::NoLimit("smooth part vanishes at the base point".into()));
    }
    // Kernel evaluations reconstruct zeta - alpha from the point alpha + t e^(i theta),
    // which near the base point carries relative noise eps |alpha| / t. Differences
    // below that floor mean the smooth part is constant to working precision.
    let floor = 32.0 * 1e-16 * (f.grid.ray.alpha.norm() / c + 1.0);
    if d1.norm() <= floor * scale && d2.norm() <= floor * scale {
        return Ok(v1);
    }
    // For g = M + a t^e the samples at t, 2t, 4t are geometric with ratio
    // q = 2^e; a positive rate e needs |q| > 1, otherwise the smooth part
    // does not settle toward the base point.
    let q = d2 / d1;
    if !q.is_finite() || q.norm() <= 1.02 {
        return Err(Error::NoLimit(format!(
            "difference ratio {q} does not indicate convergence toward the base point"
        )));
    }
    let m = v1 - d1 / (q - Complex64::new(1.0, 0.0));
    if !m.is_finite() {
        return Err(Error::NoLimit("extrapolation diverged".into()));
    }
    Ok(m)
}
