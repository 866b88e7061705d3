//! Riemann-Liouville fractional integrals on rays, the ray Laplace
//! transform into its half-plane of convergence, and numerical checks of the
//! operator dictionary: fractional integration corresponds to multiplication
//! by z^(-nu), multiplication by the coordinate to -d/dz.
//!
//! Frequency-domain derivatives are taken by trapezoidal Cauchy integrals on
//! circles inside the half-plane, spectrally accurate without step tuning.

use std::f64::consts::TAU;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma as gamma_fn;

use crate::error::{Error, Result};
use crate::grid::SingularFunction;
use crate::kernels::KernelFn;
use crate::quad::{unit_rule, QuadConfig};
use crate::volterra::{apply_kernel_raw, HeadModel};

/// Laplace transform samples on a half-plane, with per-sample truncation
/// tail bounds.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct LaplaceResult {
    pub theta: f64,
    pub alpha: Complex64,
    /// Exponential rate of the transformed function; the half-plane is
    /// Re(z e^(i theta)) > lambda + margin.
    pub lambda: f64,
    pub t_max: f64,
    pub z_samples: Vec<Complex64>,
    pub phi_values: Vec<Complex64>,
    pub tail_bounds: Vec<f64>,
}

impl LaplaceResult {
    /// CSV dump: one row per frequency sample.
    pub fn to_csv(&self) -> String {
        use std::fmt::Write as _;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# theta={},alpha_re={},alpha_im={},lambda={},t_max={}",
            self.theta, self.alpha.re, self.alpha.im, self.lambda, self.t_max
        );
        let _ = writeln!(s, "z_re,z_im,phi_re,phi_im,tail_bound");
        for ((z, v), tb) in self.z_samples.iter().zip(&self.phi_values).zip(&self.tail_bounds) {
            let _ = writeln!(s, "{},{},{},{},{}", z.re, z.im, v.re, v.im, tb);
        }
        s
    }
}

/// Riemann-Liouville fractional integral of order nu along the ray,
/// raising the singularity exponent from sigma to sigma + nu.
pub fn fractional_integral(
    nu: f64,
    phi: &SingularFunction,
    quad: &QuadConfig,
) -> Result<SingularFunction> {
    if !(nu > 0.0) {
        return Err(Error::DomainError(format!("fractional order must be positive, got {nu}")));
    }
    if phi.sigma <= -1.0 {
        return Err(Error::ExponentTooSingular { sigma: phi.sigma });
    }
    let theta = phi.grid.ray.theta;
    let inv_gamma = 1.0 / gamma_fn(nu);
    // (zeta(a) - zeta(a'))^(nu - 1) with the ray branch |u|^(nu-1) e^(i theta (nu-1)).
    let kernel: KernelFn = Arc::new(move |za: Complex64, zb: Complex64| {
        Complex64::from_polar((za - zb).norm().powf(nu - 1.0), theta * (nu - 1.0)) * inv_gamma
    });
    let diagonal = if (nu - 1.0).fract() != 0.0 || nu < 1.0 {
        let reduced: KernelFn = Arc::new(move |_, _| Complex64::new(inv_gamma, 0.0));
        Some(((nu - 1.0), reduced))
    } else {
        None
    };
    let mut out =
        apply_kernel_raw(&phi.grid, quad, phi, phi.sigma + nu, &kernel, diagonal.as_ref())?;
    out.lambda_hint = phi.lambda_hint.max(0.0);
    Ok(out)
}

/// The branch of z^(-nu) produced by the ray transform: principal power of
/// z e^(i theta) on the right half-plane, rotated back.
pub fn z_power(z: Complex64, nu: f64, theta: f64) -> Complex64 {
    let rotated = z * Complex64::from_polar(1.0, theta);
    rotated.powf(-nu) * Complex64::from_polar(1.0, theta * nu)
}

/// Truncation tail bound for `int_T^inf t^sigma e^(-mu t) dt` times the
/// function's weighted-norm constant.
fn tail_bound(c_phi: f64, sigma: f64, mu: f64, t_max: f64) -> Result<f64> {
    if mu <= 0.0 {
        return Err(Error::DomainError(format!("nonpositive decay rate {mu} in tail bound")));
    }
    let base = c_phi * t_max.powf(sigma) * (-mu * t_max).exp() / mu;
    if sigma <= 0.0 {
        Ok(base)
    } else {
        let q = sigma / (mu * t_max);
        if q >= 0.5 {
            return Err(Error::TailTooLarge { tail: f64::INFINITY, requested: f64::NAN });
        }
        Ok(base / (1.0 - q))
    }
}

/// Laplace transform of `phi` along its ray at the given frequency samples.
///
/// Every sample must satisfy `Re(z e^(i theta)) >= lambda_hint + margin`.
/// When `accuracy` is given, a tail bound above it aborts with TailTooLarge.
pub fn laplace_transform(
    phi: &SingularFunction,
    z_samples: &[Complex64],
    margin: f64,
    accuracy: Option<f64>,
    quad: &QuadConfig,
) -> Result<LaplaceResult> {
    if phi.sigma <= -1.0 {
        return Err(Error::ExponentTooSingular { sigma: phi.sigma });
    }
    let grid = &phi.grid;
    let ray = grid.ray;
    let lambda = phi.lambda_hint;
    if margin <= 0.0 {
        return Err(Error::DomainError(format!("margin must be positive, got {margin}")));
    }
    let mut phi_values = Vec::with_capacity(z_samples.len());
    let mut tail_bounds = Vec::with_capacity(z_samples.len());
    let c_phi = phi.weighted_norm(crate::grid::NormParams::new(phi.sigma, lambda));
    let head = HeadModel::build(phi);
    for &z in z_samples {
        let rate = (z * ray.direction()).re;
        if rate < lambda + margin - 1e-12 {
            return Err(Error::HalfPlaneViolation { z: format!("{z}"), bound: lambda + margin });
        }
        let value = transform_one(phi, &head, z, quad)?;
        let tail = tail_bound(c_phi, phi.sigma, rate - lambda, grid.t_max())?;
        if let Some(acc) = accuracy {
            if tail > acc {
                return Err(Error::TailTooLarge { tail, requested: acc });
            }
        }
        phi_values.push(value);
        tail_bounds.push(tail);
    }
    Ok(LaplaceResult {
        theta: ray.theta,
        alpha: ray.alpha,
        lambda,
        t_max: grid.t_max(),
        z_samples: z_samples.to_vec(),
        phi_values,
        tail_bounds,
    })
}

/// One transform value by composite quadrature: Jacobi weight on the head
/// segment, Gauss-Legendre on panels subdivided to resolve the oscillation
/// of e^(-z zeta).
pub(crate) fn transform_one(
    phi: &SingularFunction,
    head: &HeadModel,
    z: Complex64,
    quad: &QuadConfig,
) -> Result<Complex64> {
    let compute = |order: usize| -> Result<(Complex64, f64)> {
        let grid = &phi.grid;
        let ray = grid.ray;
        let sigma = phi.sigma;
        let w = z * ray.direction();
        let mut total = Complex64::new(0.0, 0.0);
        let mut l1 = 0.0f64;

        // Head segment (0, t_min].
        let b0 = grid.t_min();
        let rule = unit_rule(order, 0.0, sigma)?;
        let mut seg = Complex64::new(0.0, 0.0);
        for (&x, &wt) in rule.nodes.iter().zip(&rule.weights) {
            let t = b0 * x;
            seg += (-w * t).exp() * head.eval(t) * wt;
        }
        total += seg * b0.powf(sigma + 1.0);
        l1 += (seg * b0.powf(sigma + 1.0)).norm();

        // Panels, each split so a subsegment carries at most a few radians
        // of phase and e-foldings of decay.
        let gl = unit_rule(order, 0.0, 0.0)?;
        for pw in grid.boundaries.windows(2) {
            let (a, b) = (pw[0], pw[1]);
            let n_sub = 1 + ((b - a) * w.norm() / 4.0) as usize;
            let sub_len = (b - a) / n_sub as f64;
            for k in 0..n_sub {
                let lo = a + sub_len * k as f64;
                let mut seg = Complex64::new(0.0, 0.0);
                for (&x, &wt) in gl.nodes.iter().zip(&gl.weights) {
                    let t = lo + sub_len * x;
                    seg += (-w * t).exp() * phi.smooth_at(t) * t.powf(sigma) * wt;
                }
                total += seg * sub_len;
                l1 += (seg * sub_len).norm();
            }
        }
        // Pull out the base-point exponential and the ray phase:
        // Phi(z) = e^(-z alpha) e^(i theta (sigma + 1)) * total.
        let prefactor =
            (-z * ray.alpha).exp() * Complex64::from_polar(1.0, ray.theta * (sigma + 1.0));
        Ok((prefactor * total, l1 * prefactor.norm()))
    };
    let order = quad.order.max(8);
    let (v1, _) = compute(order)?;
    let (v2, l1) = compute(order + 8)?;
    if (v2 - v1).norm() > quad.tol * v2.norm().max(l1 * 1e-3).max(1e-300) {
        return Err(Error::QuadratureFailure(format!(
            "Laplace integral at z = {z} not resolved: orders differ by {:.3e}",
            (v2 - v1).norm()
        )));
    }
    Ok(v2)
}

/// Circle radius for frequency-domain derivatives at z: half the distance to
/// the half-plane boundary, capped so the e^(-alpha w) factor of the
/// transform varies by at most a couple of e-foldings around the circle
/// (a large circle would bury the low-order Fourier coefficients under the
/// dynamic range of the samples).
pub fn cauchy_radius(z: Complex64, alpha: Complex64, theta: f64, lambda: f64, margin: f64) -> f64 {
    let rate = (z * Complex64::from_polar(1.0, theta)).re;
    let boundary = 0.5 * (rate - lambda).max(margin);
    boundary.min(1.0 / alpha.norm().max(0.5))
}

/// Derivatives Phi^(0..=max_n)(z) by a trapezoidal Cauchy integral on a
/// circle of the given radius. `sample` supplies Phi on the circle.
pub fn cauchy_derivatives(
    sample: &mut dyn FnMut(Complex64) -> Result<Complex64>,
    z: Complex64,
    radius: f64,
    max_n: usize,
    points: usize,
) -> Result<Vec<Complex64>> {
    let m = points.max(4 * (max_n + 1));
    let values: Vec<Complex64> = (0..m)
        .map(|k| sample(z + Complex64::from_polar(radius, TAU * k as f64 / m as f64)))
        .collect::<Result<_>>()?;
    let mut out = Vec::with_capacity(max_n + 1);
    let mut factorial = 1.0;
    for n in 0..=max_n {
        if n > 0 {
            factorial *= n as f64;
        }
        let mut acc = Complex64::new(0.0, 0.0);
        for (k, &v) in values.iter().enumerate() {
            let angle = TAU * (k as f64) * (n as f64) / m as f64;
            acc += v * Complex64::from_polar(1.0, -angle);
        }
        out.push(acc * factorial / (m as f64 * radius.powi(n as i32)));
    }
    Ok(out)
}

/// Measured mismatches of the two dictionary identities at the given
/// frequency samples.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct DictionaryReport {
    pub nu: f64,
    pub power: u32,
    /// Max relative mismatch of L(d^(-nu) phi) vs z^(-nu) L(phi).
    pub frac_mismatch: f64,
    /// Max relative mismatch of L(zeta^n phi) vs (-d/dz)^n L(phi).
    pub power_mismatch: f64,
    /// Largest tail bound encountered; mismatches are meaningful above it.
    pub tail_allowance: f64,
}

/// Verifies the operator dictionary on `phi` at the given samples:
/// fractional integration against z^(-nu) multiplication, and coordinate
/// multiplication against -d/dz (by Cauchy-circle differentiation).
pub fn verify_dictionary(
    phi: &SingularFunction,
    nu: f64,
    power: u32,
    z_samples: &[Complex64],
    margin: f64,
    quad: &QuadConfig,
) -> Result<DictionaryReport> {
    let ray = phi.grid.ray;
    let base = laplace_transform(phi, z_samples, margin, None, quad)?;

    // Identity 1: L(d^(-nu) phi) = z^(-nu) L(phi).
    let smoothed = fractional_integral(nu, phi, quad)?;
    let lhs1 = laplace_transform(&smoothed, z_samples, margin, None, quad)?;
    let mut frac_mismatch = 0.0f64;
    for ((&z, &lhs), &rhs_base) in
        z_samples.iter().zip(&lhs1.phi_values).zip(&base.phi_values)
    {
        let rhs = z_power(z, nu, ray.theta) * rhs_base;
        let denom = rhs.norm().max(1e-300);
        frac_mismatch = frac_mismatch.max((lhs - rhs).norm() / denom);
    }

    // Identity 2: L(zeta^n phi) = (-d/dz)^n L(phi).
    let mut zeta_phi = phi.clone();
    for (t, v) in phi.grid.nodes.iter().zip(zeta_phi.g.iter_mut()) {
        let zeta = ray.point(*t);
        *v *= zeta.powu(power);
    }
    let lhs2 = laplace_transform(&zeta_phi, z_samples, margin, None, quad)?;
    let head = HeadModel::build(phi);
    let mut power_mismatch = 0.0f64;
    let mut tail_allowance = base.tail_bounds.iter().fold(0.0f64, |a, &b| a.max(b));
    for ((&z, &lhs), &tb) in z_samples.iter().zip(&lhs2.phi_values).zip(&lhs2.tail_bounds) {
        tail_allowance = tail_allowance.max(tb);
        let radius = cauchy_radius(z, ray.alpha, ray.theta, phi.lambda_hint, margin);
        let mut sample = |w: Complex64| transform_one(phi, &head, w, quad);
        let derivs = cauchy_derivatives(&mut sample, z, radius, power as usize, 32)?;
        let sign = if power % 2 == 0 { 1.0 } else { -1.0 };
        let rhs = derivs[power as usize] * sign;
        let denom = rhs.norm().max(1e-300);
        power_mismatch = power_mismatch.max((lhs - rhs).norm() / denom);
    }
    Ok(DictionaryReport { nu, power, frac_mismatch, power_mismatch, tail_allowance })
}
