//! Property tests for the representation and operator invariants.

use std::sync::Arc;

use num_complex::Complex64;
use proptest::prelude::*;

use rsv::grid::{build_ray_grid, NormParams, Ray, RayGrid, SingularFunction};
use rsv::kernels::{KernelPair, SeparableKernel};
use rsv::quad::QuadConfig;
use rsv::volterra::{OperatorHandle, OperatorPart};

fn small_grid(theta: f64) -> Arc<RayGrid> {
    let ray = Ray::new(Complex64::new(1.0, 0.0), theta, 2.0).unwrap();
    Arc::new(build_ray_grid(ray, 2.0 * 2f64.powi(-16), 2.0, 8).unwrap())
}

fn poly_function(grid: &Arc<RayGrid>, sigma: f64, coeffs: &[(f64, f64)]) -> SingularFunction {
    let coeffs: Vec<Complex64> = coeffs.iter().map(|&(re, im)| Complex64::new(re, im)).collect();
    SingularFunction::from_fn(grid.clone(), sigma, 0.0, |t| {
        let x = t / 2.0;
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    /// Scaling the function scales the weighted norm by |c|.
    #[test]
    fn norm_is_absolutely_homogeneous(
        sigma in -0.9f64..1.5,
        lambda in 0.0f64..3.0,
        scale_re in -3.0f64..3.0,
        scale_im in -3.0f64..3.0,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let grid = small_grid(0.0);
        let f = poly_function(&grid, sigma, &coeffs);
        let c = Complex64::new(scale_re, scale_im);
        let p = NormParams::new(sigma, lambda);
        let lhs = f.scale(c).weighted_norm(p);
        let rhs = c.norm() * f.weighted_norm(p);
        prop_assert!((lhs - rhs).abs() <= 1e-12 * rhs.max(1e-12));
    }

    /// Raising the rate can only shrink the norm (inclusion with bound 1).
    #[test]
    fn norm_monotone_in_lambda(
        sigma in -0.9f64..1.5,
        lambda in 0.0f64..2.0,
        bump in 0.0f64..2.0,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let grid = small_grid(0.0);
        let f = poly_function(&grid, sigma, &coeffs);
        let lo = f.weighted_norm(NormParams::new(sigma, lambda + bump));
        let hi = f.weighted_norm(NormParams::new(sigma, lambda));
        prop_assert!(lo <= hi * (1.0 + 1e-12));
    }

    /// A legal inclusion bounds the new norm by C times the old one.
    #[test]
    fn inclusion_bound_holds(
        sigma in -0.5f64..1.0,
        drop in 0.01f64..0.8,
        lambda in 0.0f64..1.5,
        bump in 0.1f64..2.0,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let grid = small_grid(0.0);
        let mut f = poly_function(&grid, sigma, &coeffs);
        f.lambda_hint = lambda;
        let old = NormParams::new(sigma, lambda);
        let new = NormParams::new(sigma - drop, lambda + bump);
        let (tagged, c) = f.include(new).unwrap();
        let lhs = tagged.weighted_norm(new);
        let rhs = c * f.weighted_norm(old);
        prop_assert!(lhs <= rhs * (1.0 + 1e-10));
    }

    /// Evaluation at the nodes reproduces the stored samples.
    #[test]
    fn eval_reproduces_samples(
        sigma in -0.9f64..1.5,
        theta in 0.0f64..std::f64::consts::TAU,
        coeffs in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 1..5),
    ) {
        let grid = small_grid(theta);
        let f = poly_function(&grid, sigma, &coeffs);
        for (i, &t) in grid.nodes.iter().enumerate() {
            let expect = grid.ray.power(t, sigma) * f.g[i];
            let got = f.eval(t).unwrap();
            prop_assert!((got - expect).norm() <= 1e-12 * expect.norm().max(1e-12));
        }
    }

    /// The operator is linear over random smooth parts.
    #[test]
    fn operator_is_linear(
        a_re in -2.0f64..2.0,
        b_im in -2.0f64..2.0,
        coeffs_f in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..4),
        coeffs_g in proptest::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 2..4),
    ) {
        let grid = small_grid(0.0);
        let k0 = SeparableKernel::new(
            Arc::new(|z: Complex64| -(z - 1.0)),
            Arc::new(|_| Complex64::new(0.5, 0.0)),
            Complex64::new(1.0, 0.0),
        );
        let op = OperatorHandle::new(
            KernelPair::separable(k0, 0.5, 0.0),
            grid.clone(),
            QuadConfig::default(),
        );
        let f = poly_function(&grid, -0.25, &coeffs_f);
        let g = poly_function(&grid, -0.25, &coeffs_g);
        let a = Complex64::new(a_re, 0.0);
        let b = Complex64::new(0.0, b_im);
        let lhs = op.apply(&f.combine(a, &g, b), OperatorPart::Separable).unwrap();
        let va = op.apply(&f, OperatorPart::Separable).unwrap();
        let vb = op.apply(&g, OperatorPart::Separable).unwrap();
        let rhs = va.combine(a, &vb, b);
        let p = NormParams::new(-0.25, 0.0);
        let scale = rhs.weighted_norm(p).max(f.weighted_norm(p)).max(1e-9);
        prop_assert!(lhs.sub(&rhs).weighted_norm(p) <= 1e-12 * scale);
    }
}
