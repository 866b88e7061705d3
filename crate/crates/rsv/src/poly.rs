//! Complex polynomials: evaluation, derivatives, and simple-root finding.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Polynomial with coefficients in ascending order: `c[0] + c[1] x + ...`.
#[derive(Debug, Clone, PartialEq)]
pub struct Poly {
    pub coeffs: Vec<Complex64>,
}

impl Poly {
    pub fn new(coeffs: Vec<Complex64>) -> Self {
        Poly { coeffs }
    }

    pub fn from_real(coeffs: &[f64]) -> Self {
        Poly { coeffs: coeffs.iter().map(|&c| Complex64::new(c, 0.0)).collect() }
    }

    /// Degree ignoring trailing zero coefficients (0 for the zero polynomial).
    pub fn degree(&self) -> usize {
        self.coeffs
            .iter()
            .rposition(|c| c.norm() > 0.0)
            .unwrap_or(0)
    }

    pub fn eval(&self, x: Complex64) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for &c in self.coeffs.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    /// The composition p(-x), again as a polynomial.
    pub fn compose_neg(&self) -> Poly {
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(k, &c)| if k % 2 == 0 { c } else { -c })
            .collect();
        Poly::new(coeffs)
    }

    pub fn derivative(&self) -> Poly {
        if self.coeffs.len() <= 1 {
            return Poly::new(vec![Complex64::new(0.0, 0.0)]);
        }
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .skip(1)
            .map(|(k, &c)| c * k as f64)
            .collect();
        Poly::new(coeffs)
    }

    /// Taylor coefficients around `center`, lowest order first
    /// (Ruffini-Horner shift).
    pub fn taylor_at(&self, center: Complex64) -> Vec<Complex64> {
        let mut a = self.coeffs.clone();
        let n = a.len();
        for i in 0..n {
            for j in (i..n.saturating_sub(1)).rev() {
                let next = a[j + 1];
                a[j] += center * next;
            }
        }
        a
    }

    /// All roots via Durand-Kerner iteration with Newton polishing.
    /// Intended for the modest degrees and simple roots of this crate.
    pub fn roots(&self) -> Result<Vec<Complex64>> {
        let deg = self.degree();
        if deg == 0 {
            return Ok(Vec::new());
        }
        let lead = self.coeffs[deg];
        let monic: Vec<Complex64> = self.coeffs[..=deg].iter().map(|&c| c / lead).collect();
        let radius = 1.0
            + monic[..deg]
                .iter()
                .map(|c| c.norm())
                .fold(0.0, f64::max);
        let eval_monic = |x: Complex64| {
            let mut acc = Complex64::new(0.0, 0.0);
            for &c in monic.iter().rev() {
                acc = acc * x + c;
            }
            acc
        };
        // Non-real, non-symmetric starting angles avoid stagnation.
        let mut z: Vec<Complex64> = (0..deg)
            .map(|k| {
                Complex64::from_polar(radius * 0.7, 0.4 + 2.0 * std::f64::consts::PI * k as f64 / deg as f64)
            })
            .collect();
        let mut converged = false;
        for _ in 0..500 {
            let mut max_step = 0.0f64;
            for i in 0..deg {
                let mut denom = Complex64::new(1.0, 0.0);
                for j in 0..deg {
                    if i != j {
                        denom *= z[i] - z[j];
                    }
                }
                if denom.norm() == 0.0 {
                    return Err(Error::RootFindingFailure(
                        "coincident iterates in Durand-Kerner".into(),
                    ));
                }
                let step = eval_monic(z[i]) / denom;
                z[i] -= step;
                max_step = max_step.max(step.norm());
            }
            if max_step < 1e-13 * radius.max(1.0) {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::RootFindingFailure(format!(
                "Durand-Kerner did not converge for degree {deg}"
            )));
        }
        // Newton polish.
        let dp = self.derivative();
        for r in &mut z {
            for _ in 0..3 {
                let d = dp.eval(*r);
                if d.norm() > 0.0 {
                    *r -= self.eval(*r) / d;
                }
            }
        }
        z.sort_by(|a, b| (a.re, a.im).partial_cmp(&(b.re, b.im)).unwrap());
        Ok(z)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn evaluates_and_differentiates() {
        // 2 + 3x + x^2
        let p = Poly::from_real(&[2.0, 3.0, 1.0]);
        assert_abs_diff_eq!(p.eval(Complex64::new(-1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        let dp = p.derivative();
        assert_abs_diff_eq!(dp.eval(Complex64::new(-1.0, 0.0)).re, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn composes_negation() {
        let p = Poly::from_real(&[2.0, 3.0, 1.0]);
        let pn = p.compose_neg();
        // P(-z) at z = 1 is P(-1) = 0.
        assert_abs_diff_eq!(pn.eval(Complex64::new(1.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(pn.eval(Complex64::new(2.0, 0.0)).norm(), 0.0, epsilon = 1e-14);
    }

    #[test]
    fn finds_simple_roots() {
        let p = Poly::from_real(&[2.0, 3.0, 1.0]);
        let roots = p.roots().unwrap();
        assert_eq!(roots.len(), 2);
        assert_abs_diff_eq!(roots[0].re, -2.0, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[1].re, -1.0, epsilon = 1e-10);
    }

    #[test]
    fn finds_complex_roots() {
        // x^2 + 1
        let p = Poly::from_real(&[1.0, 0.0, 1.0]);
        let roots = p.roots().unwrap();
        assert_abs_diff_eq!(roots[0].im, -1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[1].im, 1.0, epsilon = 1e-10);
        assert_abs_diff_eq!(roots[0].re, 0.0, epsilon = 1e-10);
    }

    #[test]
    fn taylor_expansion_recentres() {
        // p = (x-1)(x-2) = 2 - 3x + x^2 around 1: -(x-1) + (x-1)^2.
        let p = Poly::from_real(&[2.0, -3.0, 1.0]);
        let c = p.taylor_at(Complex64::new(1.0, 0.0));
        assert_abs_diff_eq!(c[0].norm(), 0.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[1].re, -1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(c[2].re, 1.0, epsilon = 1e-14);
    }
}
