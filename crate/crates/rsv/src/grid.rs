//! Rays leaving a singular point, graded collocation grids on them, and
//! functions stored as a singular power factor times smooth-part samples.
//!
//! A function f on the ray is represented as
//!
//! ```text
//! f(alpha + t e^(i theta)) = (t e^(i theta))^sigma * g(t),
//! ```
//!
//! with the branch fixed once and for all by `(t e^(i theta))^sigma :=
//! t^sigma e^(i sigma theta)`. The smooth part g is sampled at Chebyshev
//! nodes on geometrically graded panels and interpolated barycentrically.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::sync::Arc;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A ray `{alpha + t e^(i theta) : 0 < t <= t_max}` in the position domain.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Ray {
    /// Singular base point the ray leaves.
    pub alpha: Complex64,
    /// Direction, in radians, normalized to [0, 2 pi).
    pub theta: f64,
    /// Truncation length of the computational domain.
    pub t_max: f64,
}

impl Ray {
    pub fn new(alpha: Complex64, theta: f64, t_max: f64) -> Result<Self> {
        if !(t_max > 0.0) || !t_max.is_finite() {
            return Err(Error::InvalidGrading(format!("t_max must be positive, got {t_max}")));
        }
        let theta = theta.rem_euclid(2.0 * PI);
        Ok(Ray { alpha, theta, t_max })
    }

    /// Unit direction e^(i theta).
    pub fn direction(&self) -> Complex64 {
        Complex64::from_polar(1.0, self.theta)
    }

    /// Point at arclength t from the base point.
    pub fn point(&self, t: f64) -> Complex64 {
        self.alpha + self.direction() * t
    }

    /// The fixed branch (t e^(i theta))^s = t^s e^(i s theta).
    pub fn power(&self, t: f64, s: f64) -> Complex64 {
        Complex64::from_polar(t.powf(s), s * self.theta)
    }
}

/// Collocation grid on a ray: geometric panels toward t = 0, Chebyshev
/// (first kind) nodes inside each panel.
#[derive(Debug, Clone)]
pub struct RayGrid {
    pub ray: Ray,
    /// Panel boundaries, strictly increasing, `boundaries[0] = t_min`,
    /// `boundaries[last] = t_max`. Panel `i` is `[boundaries[i], boundaries[i+1]]`.
    pub boundaries: Vec<f64>,
    pub nodes_per_panel: usize,
    /// All nodes, strictly increasing, interior to their panels.
    pub nodes: Vec<f64>,
    /// Reference Chebyshev nodes on [-1, 1], ascending.
    ref_nodes: Vec<f64>,
    /// Barycentric weights matching `ref_nodes`. A per-panel affine map only
    /// rescales all weights by a common factor, which cancels in the formula.
    ref_weights: Vec<f64>,
}

impl PartialEq for RayGrid {
    fn eq(&self, other: &Self) -> bool {
        self.ray == other.ray
            && self.boundaries == other.boundaries
            && self.nodes_per_panel == other.nodes_per_panel
    }
}

/// Builds a grid whose panels cover [t_min, t_max] with geometric grading of
/// the given ratio toward t = 0.
pub fn build_ray_grid(ray: Ray, t_min: f64, ratio: f64, nodes_per_panel: usize) -> Result<RayGrid> {
    if !(ratio > 1.0) {
        return Err(Error::InvalidGrading(format!("ratio must exceed 1, got {ratio}")));
    }
    if !(t_min > 0.0) || t_min >= ray.t_max {
        return Err(Error::InvalidGrading(format!(
            "need 0 < t_min < t_max, got t_min = {t_min}, t_max = {}",
            ray.t_max
        )));
    }
    if nodes_per_panel < 2 {
        return Err(Error::InvalidGrading(format!(
            "nodes_per_panel must be at least 2, got {nodes_per_panel}"
        )));
    }
    // Panel count: smallest k with t_min * ratio^k >= t_max. A small slack
    // keeps exact powers (t_min = t_max / ratio^k) from gaining a sliver panel.
    let k = ((ray.t_max / t_min).ln() / ratio.ln() - 1e-9).ceil().max(1.0) as usize;
    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(t_min);
    for i in 1..k {
        boundaries.push(ray.t_max / ratio.powi((k - i) as i32));
    }
    boundaries.push(ray.t_max);

    // Chebyshev points of the first kind, ascending; interior to the panel, so
    // concatenated nodes are strictly increasing with no duplicates.
    let n = nodes_per_panel;
    let mut ref_nodes = Vec::with_capacity(n);
    let mut ref_weights = Vec::with_capacity(n);
    for j in 0..n {
        // j = 0 is the largest angle, i.e. the leftmost node.
        let angle = (2.0 * (n - 1 - j) as f64 + 1.0) * PI / (2.0 * n as f64);
        ref_nodes.push(angle.cos());
        let sign = if (n - 1 - j) % 2 == 0 { 1.0 } else { -1.0 };
        ref_weights.push(sign * angle.sin());
    }

    let mut nodes = Vec::with_capacity(k * n);
    for w in boundaries.windows(2) {
        let (a, b) = (w[0], w[1]);
        for &x in &ref_nodes {
            nodes.push(a + (b - a) * (1.0 + x) / 2.0);
        }
    }
    Ok(RayGrid { ray, boundaries, nodes_per_panel, nodes, ref_nodes, ref_weights })
}

impl RayGrid {
    pub fn panel_count(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn t_min(&self) -> f64 {
        self.boundaries[0]
    }

    pub fn t_max(&self) -> f64 {
        *self.boundaries.last().unwrap()
    }

    /// Index of the panel containing t (clamped to the span).
    pub fn panel_of(&self, t: f64) -> usize {
        let i = self.boundaries.partition_point(|&b| b < t);
        i.saturating_sub(1).min(self.panel_count() - 1)
    }

    /// Node values of panel p within a flat sample vector.
    pub fn panel_slice<'a, T>(&self, samples: &'a [T], p: usize) -> &'a [T] {
        let n = self.nodes_per_panel;
        &samples[p * n..(p + 1) * n]
    }

    /// Barycentric interpolation of per-node samples at arclength t.
    ///
    /// `t` may lie anywhere in (0, t_max]; values below t_min extrapolate the
    /// first panel's polynomial (used by quadrature near the singular point,
    /// where the smooth part is analytic).
    pub fn interp(&self, samples: &[Complex64], t: f64) -> Complex64 {
        debug_assert_eq!(samples.len(), self.nodes.len());
        let p = self.panel_of(t);
        let (a, b) = (self.boundaries[p], self.boundaries[p + 1]);
        let x = 2.0 * (t - a) / (b - a) - 1.0;
        let vals = self.panel_slice(samples, p);
        let mut num = Complex64::new(0.0, 0.0);
        let mut den = 0.0;
        for ((&xj, &wj), &vj) in self.ref_nodes.iter().zip(&self.ref_weights).zip(vals) {
            let dx = x - xj;
            if dx.abs() < 1e-14 {
                return vj;
            }
            let c = wj / dx;
            num += vj * c;
            den += c;
        }
        num / den
    }

    /// Sample points for sup-norm surrogates: nodes, midpoints between
    /// consecutive nodes, and the panel boundaries (so the span endpoints
    /// t_min and t_max are always included).
    pub fn oversample(&self) -> Vec<f64> {
        let mut ts = Vec::with_capacity(2 * self.nodes.len() + self.boundaries.len());
        ts.extend_from_slice(&self.nodes);
        ts.extend(self.nodes.windows(2).map(|w| 0.5 * (w[0] + w[1])));
        ts.extend_from_slice(&self.boundaries);
        ts.sort_by(|a, b| a.partial_cmp(b).unwrap());
        ts.dedup();
        ts
    }
}

/// Weight parameters (sigma, Lambda) of the weighted sup norm
/// `sup |zeta - alpha|^(-sigma) e^(-Lambda |zeta - alpha|) |f|`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormParams {
    pub sigma: f64,
    pub lambda: f64,
}

impl NormParams {
    pub fn new(sigma: f64, lambda: f64) -> Self {
        NormParams { sigma, lambda }
    }
}

/// A function on a ray stored as exponent plus smooth-part samples.
#[derive(Debug, Clone)]
pub struct SingularFunction {
    pub grid: Arc<RayGrid>,
    /// Exponent of the singular factor at the base point.
    pub sigma: f64,
    /// Smooth-part samples at the grid nodes.
    pub g: Vec<Complex64>,
    /// A Lambda for which the weighted norm is known finite; used to pick
    /// Laplace half-planes and truncation tails.
    pub lambda_hint: f64,
}

impl SingularFunction {
    pub fn from_fn(
        grid: Arc<RayGrid>,
        sigma: f64,
        lambda_hint: f64,
        mut smooth: impl FnMut(f64) -> Complex64,
    ) -> Self {
        let g = grid.nodes.iter().map(|&t| smooth(t)).collect();
        SingularFunction { grid, sigma, g, lambda_hint }
    }

    /// The monomial (zeta - alpha)^sigma, i.e. smooth part identically 1.
    pub fn monomial(grid: Arc<RayGrid>, sigma: f64) -> Self {
        let g = vec![Complex64::new(1.0, 0.0); grid.nodes.len()];
        SingularFunction { grid, sigma, g, lambda_hint: 0.0 }
    }

    pub fn zero(grid: Arc<RayGrid>, sigma: f64) -> Self {
        let g = vec![Complex64::new(0.0, 0.0); grid.nodes.len()];
        SingularFunction { grid, sigma, g, lambda_hint: 0.0 }
    }

    /// Smooth part at arclength t, interpolated. Extrapolates below t_min.
    pub(crate) fn smooth_at(&self, t: f64) -> Complex64 {
        self.grid.interp(&self.g, t)
    }

    /// Full value f(alpha + t e^(i theta)), restricted to the grid span.
    pub fn eval(&self, t: f64) -> Result<Complex64> {
        let (lo, hi) = (self.grid.t_min(), self.grid.t_max());
        if t < lo * (1.0 - 1e-12) || t > hi * (1.0 + 1e-12) {
            return Err(Error::OutOfRange { t, t_min: lo, t_max: hi });
        }
        Ok(self.grid.ray.power(t, self.sigma) * self.smooth_at(t))
    }

    /// Full value without the span check; quadrature uses this for the head
    /// segment (0, t_min].
    pub(crate) fn eval_unchecked(&self, t: f64) -> Complex64 {
        self.grid.ray.power(t, self.sigma) * self.smooth_at(t)
    }

    /// Grid surrogate of the weighted sup norm: max over nodes, midpoints and
    /// panel boundaries of t^(-sigma_p) e^(-Lambda t) |f(t)|. Truncation at
    /// t_max means this under-estimates the sup over an unbounded domain, so
    /// reports quote t_max alongside the value.
    pub fn weighted_norm(&self, params: NormParams) -> f64 {
        let ds = self.sigma - params.sigma;
        self.grid
            .oversample()
            .iter()
            .map(|&t| t.powf(ds) * (-params.lambda * t).exp() * self.smooth_at(t).norm())
            .fold(0.0, f64::max)
    }

    /// Re-tags the function in a larger weighted space and reports the
    /// inclusion-operator norm bound C = sup t^(s_old - s_new) e^(-(L_new - L_old) t).
    ///
    /// Legal directions: same sigma with Lambda nondecreasing, or sigma
    /// strictly decreasing with Lambda strictly increasing.
    pub fn include(&self, new: NormParams) -> Result<(SingularFunction, f64)> {
        let old = NormParams::new(self.sigma, self.lambda_hint);
        let legal = (new.sigma == old.sigma && new.lambda >= old.lambda)
            || (new.sigma < old.sigma && new.lambda > old.lambda);
        if !legal {
            return Err(Error::IllegalInclusion {
                from: (old.sigma, old.lambda),
                to: (new.sigma, new.lambda),
            });
        }
        let c = self
            .grid
            .oversample()
            .iter()
            .map(|&t| t.powf(old.sigma - new.sigma) * (-(new.lambda - old.lambda) * t).exp())
            .fold(0.0, f64::max);
        let mut tagged = self.clone();
        tagged.lambda_hint = new.lambda;
        Ok((tagged, c))
    }

    /// Linear combination a*self + b*other, merging exponents to the smaller
    /// (more singular) one. Both functions must live on the same grid.
    pub fn combine(&self, a: Complex64, other: &SingularFunction, b: Complex64) -> SingularFunction {
        assert_eq!(*self.grid, *other.grid, "functions live on different grids");
        let sigma = self.sigma.min(other.sigma);
        let ray = self.grid.ray;
        let g = self
            .grid
            .nodes
            .iter()
            .enumerate()
            .map(|(i, &t)| {
                let lift_s = ray.power(t, self.sigma - sigma);
                let lift_o = ray.power(t, other.sigma - sigma);
                a * lift_s * self.g[i] + b * lift_o * other.g[i]
            })
            .collect();
        SingularFunction {
            grid: self.grid.clone(),
            sigma,
            g,
            lambda_hint: self.lambda_hint.max(other.lambda_hint),
        }
    }

    pub fn add(&self, other: &SingularFunction) -> SingularFunction {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(1.0, 0.0))
    }

    pub fn sub(&self, other: &SingularFunction) -> SingularFunction {
        self.combine(Complex64::new(1.0, 0.0), other, Complex64::new(-1.0, 0.0))
    }

    pub fn scale(&self, c: Complex64) -> SingularFunction {
        let mut out = self.clone();
        for v in &mut out.g {
            *v *= c;
        }
        out
    }

    /// Log-log slope of |f| against t over the nodes with t <= window,
    /// i.e. the fitted singularity order at the base point. Returns None when
    /// the values there are numerically zero.
    pub fn fitted_order(&self, window: f64) -> Option<f64> {
        let floor = self.g.iter().map(|v| v.norm()).fold(0.0, f64::max) * 1e-13;
        let pts: Vec<(f64, f64)> = self
            .grid
            .nodes
            .iter()
            .filter(|&&t| t <= window)
            .filter_map(|&t| {
                let a = self.eval_unchecked(t).norm();
                (a > floor).then(|| (t.ln(), a.ln()))
            })
            .collect();
        if pts.len() < 4 {
            return None;
        }
        Some(least_squares_slope(&pts))
    }

    /// CSV dump: metadata comment, then one row per node.
    pub fn to_csv(&self) -> String {
        let ray = self.grid.ray;
        let mut s = String::new();
        let _ = writeln!(
            s,
            "# alpha_re={},alpha_im={},theta={},t_max={}",
            ray.alpha.re, ray.alpha.im, ray.theta, ray.t_max
        );
        let _ = writeln!(s, "t,g_re,g_im,sigma");
        for (&t, v) in self.grid.nodes.iter().zip(&self.g) {
            let _ = writeln!(s, "{},{},{},{}", t, v.re, v.im, self.sigma);
        }
        s
    }
}

pub(crate) fn least_squares_slope(pts: &[(f64, f64)]) -> f64 {
    let n = pts.len() as f64;
    let sx: f64 = pts.iter().map(|p| p.0).sum();
    let sy: f64 = pts.iter().map(|p| p.1).sum();
    let sxx: f64 = pts.iter().map(|p| p.0 * p.0).sum();
    let sxy: f64 = pts.iter().map(|p| p.0 * p.1).sum();
    (n * sxy - sx * sy) / (n * sxx - sx * sx)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn real_ray(t_max: f64) -> Ray {
        Ray::new(Complex64::new(0.0, 0.0), 0.0, t_max).unwrap()
    }

    #[test]
    fn geometric_partition_matches_parameters() {
        let grid = build_ray_grid(real_ray(1.0), 1.0 / 16.0, 2.0, 4).unwrap();
        assert_eq!(grid.panel_count(), 4);
        assert_eq!(grid.nodes.len(), 16);
        let expected = [1.0 / 16.0, 1.0 / 8.0, 1.0 / 4.0, 1.0 / 2.0, 1.0];
        for (b, e) in grid.boundaries.iter().zip(expected) {
            assert_relative_eq!(*b, e, max_relative = 1e-12);
        }
    }

    #[test]
    fn empty_range_is_rejected() {
        assert!(matches!(
            build_ray_grid(real_ray(1.0), 1.0, 2.0, 4),
            Err(Error::InvalidGrading(_))
        ));
        assert!(matches!(
            build_ray_grid(real_ray(1.0), 0.25, 1.0, 4),
            Err(Error::InvalidGrading(_))
        ));
    }

    #[test]
    fn thirteen_panels_on_long_ray() {
        let ray = Ray::new(Complex64::new(1.0, 0.0), PI / 2.0, 8.0).unwrap();
        let grid = build_ray_grid(ray, 2f64.powi(-10), 2.0, 8).unwrap();
        assert_eq!(grid.panel_count(), 13);
        assert_eq!(grid.nodes.len(), 104);
        assert!(grid.nodes.windows(2).all(|w| w[0] < w[1]));
        assert!(grid.nodes[0] > 0.0);
    }

    #[test]
    fn eval_constant_and_singular_factor() {
        let grid = Arc::new(build_ray_grid(real_ray(1.0), 2f64.powi(-8), 2.0, 8).unwrap());
        let one = SingularFunction::monomial(grid.clone(), 0.0);
        assert_relative_eq!(one.eval(0.7).unwrap().re, 1.0, max_relative = 1e-14);

        let f = SingularFunction::monomial(grid, -0.5);
        let v = f.eval(0.25).unwrap();
        assert_relative_eq!(v.re, 2.0, max_relative = 1e-13);
        assert_abs_diff_eq!(v.im, 0.0, epsilon = 1e-13);
    }

    #[test]
    fn branch_convention_on_reversed_ray() {
        // (t e^(i pi))^(-1/2) = t^(-1/2) e^(-i pi / 2) = -i t^(-1/2).
        let ray = Ray::new(Complex64::new(0.0, 0.0), PI, 2.0).unwrap();
        let grid = Arc::new(build_ray_grid(ray, 2f64.powi(-8), 2.0, 8).unwrap());
        let f = SingularFunction::monomial(grid, -0.5);
        let v = f.eval(1.0).unwrap();
        assert_abs_diff_eq!(v.re, 0.0, epsilon = 1e-13);
        assert_relative_eq!(v.im, -1.0, max_relative = 1e-13);
    }

    #[test]
    fn eval_outside_span_errors() {
        let grid = Arc::new(build_ray_grid(real_ray(1.0), 2f64.powi(-4), 2.0, 4).unwrap());
        let f = SingularFunction::monomial(grid, 0.0);
        assert!(matches!(f.eval(2.0), Err(Error::OutOfRange { .. })));
        assert!(matches!(f.eval(1e-3), Err(Error::OutOfRange { .. })));
    }

    #[test]
    fn eval_reproduces_samples_at_nodes() {
        let grid = Arc::new(build_ray_grid(real_ray(2.0), 2f64.powi(-10), 2.0, 12).unwrap());
        let f = SingularFunction::from_fn(grid.clone(), -0.25, 0.0, |t| {
            Complex64::new((1.3 * t).sin() + 2.0, t.cos())
        });
        for (i, &t) in grid.nodes.iter().enumerate() {
            let expect = grid.ray.power(t, -0.25) * f.g[i];
            let got = f.eval(t).unwrap();
            assert_relative_eq!(got.re, expect.re, max_relative = 1e-14);
            assert_relative_eq!(got.im, expect.im, max_relative = 1e-14);
        }
    }

    #[test]
    fn weighted_norm_examples() {
        let grid = Arc::new(build_ray_grid(real_ray(10.0), 2f64.powi(-16), 2.0, 16).unwrap());
        // f = zeta: exponent 1, smooth part 1.
        let f = SingularFunction::monomial(grid.clone(), 1.0);
        assert_relative_eq!(f.weighted_norm(NormParams::new(1.0, 0.0)), 1.0, max_relative = 1e-12);

        // f = zeta^2 against sigma = 1: sup of t on (0, 10].
        let f2 = SingularFunction::monomial(grid.clone(), 2.0);
        assert_relative_eq!(f2.weighted_norm(NormParams::new(1.0, 0.0)), 10.0, max_relative = 1e-12);

        // f = e^zeta against (0, 1): identically 1.
        let fe = SingularFunction::from_fn(grid, 0.0, 1.0, |t| Complex64::new(t.exp(), 0.0));
        assert_relative_eq!(fe.weighted_norm(NormParams::new(0.0, 1.0)), 1.0, max_relative = 1e-10);
    }

    #[test]
    fn norm_scaling_and_monotonicity() {
        let grid = Arc::new(build_ray_grid(real_ray(5.0), 2f64.powi(-12), 2.0, 12).unwrap());
        let f = SingularFunction::from_fn(grid, -0.5, 0.0, |t| {
            Complex64::new(1.0 / (1.0 + t), 0.5 * (2.0 * t).cos())
        });
        let p = NormParams::new(-0.5, 1.0);
        let c = Complex64::new(-2.0, 1.5);
        assert_relative_eq!(
            f.scale(c).weighted_norm(p),
            c.norm() * f.weighted_norm(p),
            max_relative = 1e-13
        );
        // Larger Lambda can only shrink the norm.
        assert!(f.weighted_norm(NormParams::new(-0.5, 2.0)) <= f.weighted_norm(p));
    }

    #[test]
    fn norm_stable_under_refinement() {
        // Weighted profile e^(-t) |g| decays from t_min, so the sup surrogate
        // sits at the shared span endpoint for both resolutions.
        let mk = |npp: usize| {
            let grid = Arc::new(build_ray_grid(real_ray(3.0), 2f64.powi(-20), 2.0, npp).unwrap());
            SingularFunction::from_fn(grid, -0.5, 1.0, |t| {
                Complex64::new(t.exp() / (1.0 + t), (0.3 * t).sin())
            })
            .weighted_norm(NormParams::new(-0.5, 1.0))
        };
        assert_abs_diff_eq!(mk(16), mk(32), epsilon = 1e-8);
    }

    #[test]
    fn inclusion_examples() {
        let grid = Arc::new(build_ray_grid(real_ray(10.0), 2f64.powi(-16), 2.0, 16).unwrap());
        let mut f = SingularFunction::monomial(grid.clone(), 0.0);
        f.lambda_hint = 1.0;
        let (_, c) = f.include(NormParams::new(0.0, 2.0)).unwrap();
        assert!(c <= 1.0 + 1e-12);

        let mut f = SingularFunction::monomial(grid.clone(), 1.0);
        f.lambda_hint = 0.0;
        let (_, c) = f.include(NormParams::new(0.0, 1.0)).unwrap();
        assert_relative_eq!(c, (-1f64).exp(), max_relative = 1e-3);

        let mut f = SingularFunction::monomial(grid, 0.0);
        f.lambda_hint = 2.0;
        assert!(matches!(
            f.include(NormParams::new(1.0, 1.0)),
            Err(Error::IllegalInclusion { .. })
        ));
    }

    #[test]
    fn combine_merges_exponents() {
        let grid = Arc::new(build_ray_grid(real_ray(2.0), 2f64.powi(-12), 2.0, 8).unwrap());
        let a = SingularFunction::monomial(grid.clone(), -0.5);
        let b = SingularFunction::monomial(grid, 0.5);
        let s = a.add(&b);
        assert_eq!(s.sigma, -0.5);
        // At t: t^(-1/2) (1 + t).
        let t = 0.8;
        assert_relative_eq!(
            s.eval(t).unwrap().re,
            t.powf(-0.5) * (1.0 + t),
            max_relative = 1e-12
        );
    }

    #[test]
    fn fitted_order_recovers_exponent() {
        let grid = Arc::new(build_ray_grid(real_ray(1.0), 2f64.powi(-20), 2.0, 8).unwrap());
        let f = SingularFunction::from_fn(grid, 0.5, 0.0, |t| Complex64::new(2.0 + t, 0.0));
        let slope = f.fitted_order(1e-2).unwrap();
        assert_abs_diff_eq!(slope, 0.5, epsilon = 1e-3);
    }

    #[test]
    fn csv_round_shape() {
        let grid = Arc::new(build_ray_grid(real_ray(1.0), 0.25, 2.0, 2).unwrap());
        let f = SingularFunction::monomial(grid, -0.5);
        let csv = f.to_csv();
        assert!(csv.starts_with("# alpha_re=0"));
        assert!(csv.contains("t,g_re,g_im,sigma"));
        assert_eq!(csv.lines().count(), 2 + f.g.len());
    }
}
