//! Quadrature rules on the unit interval.
//!
//! Everything here wraps Gauss rules rescaled to [0, 1]. Rules with an
//! algebraic endpoint weight x^beta or (1-x)^alpha come from Gauss-Jacobi;
//! smooth segments use Gauss-Legendre. Rules are cached since building one
//! costs an eigendecomposition.

use std::collections::HashMap;
use std::sync::{Mutex, OnceLock};

use gauss_quad::{GaussJacobi, GaussLegendre};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Quadrature rule family used for the singular-endpoint segments.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum QuadRule {
    /// Composite rule: Gauss-Jacobi on segments with an algebraic endpoint
    /// weight, Gauss-Legendre elsewhere.
    #[default]
    GaussJacobi,
    /// Gauss-Legendre everywhere, endpoint weights evaluated pointwise.
    /// Converges slowly for non-integer exponents; kept for comparison runs.
    LegendreOnly,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct QuadConfig {
    pub rule: QuadRule,
    /// Points per segment.
    pub order: usize,
    /// Relative tolerance for the embedded error check in operator application.
    pub tol: f64,
}

impl Default for QuadConfig {
    fn default() -> Self {
        QuadConfig { rule: QuadRule::default(), order: 16, tol: 1e-9 }
    }
}

/// Nodes and weights for `int_0^1 (1-x)^a x^b f(x) dx ~= sum w_i f(x_i)`.
#[derive(Debug, Clone)]
pub struct UnitRule {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
}

type RuleCache = Mutex<HashMap<(usize, u64, u64), UnitRule>>;

fn rule_cache() -> &'static RuleCache {
    static CACHE: OnceLock<RuleCache> = OnceLock::new();
    CACHE.get_or_init(|| Mutex::new(HashMap::new()))
}

/// Gauss-Jacobi rule on [0, 1] with weight (1-x)^a x^b.
///
/// With a = b = 0 this reduces to Gauss-Legendre. A rule of `n` points
/// integrates (1-x)^a x^b p(x) exactly for polynomials p up to degree 2n-1.
pub fn unit_rule(n: usize, a: f64, b: f64) -> Result<UnitRule> {
    if !(a > -1.0) || !(b > -1.0) {
        return Err(Error::DomainError(format!(
            "Jacobi exponents must exceed -1, got a = {a}, b = {b}"
        )));
    }
    let n = n.max(2);
    let key = (n, a.to_bits(), b.to_bits());
    if let Some(rule) = rule_cache().lock().unwrap().get(&key) {
        return Ok(rule.clone());
    }
    let rule = if a == 0.0 && b == 0.0 {
        let gl = GaussLegendre::new(n)
            .map_err(|e| Error::QuadratureFailure(format!("Gauss-Legendre init: {e}")))?;
        let (nodes, weights) = gl
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| ((1.0 + x) / 2.0, w / 2.0))
            .unzip();
        UnitRule { nodes, weights }
    } else {
        // gauss-quad works on [-1, 1] with weight (1-x)^a (1+x)^b; substituting
        // x = 2u - 1 maps it to [0, 1] with weight 2^(a+b+1) (1-u)^a u^b.
        let gj = GaussJacobi::new(n, a, b)
            .map_err(|e| Error::QuadratureFailure(format!("Gauss-Jacobi init: {e}")))?;
        let scale = 0.5f64.powf(a + b + 1.0);
        let (nodes, weights) = gj
            .as_node_weight_pairs()
            .iter()
            .map(|&(x, w)| ((1.0 + x) / 2.0, w * scale))
            .unzip();
        UnitRule { nodes, weights }
    };
    rule_cache().lock().unwrap().insert(key, rule.clone());
    Ok(rule)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn legendre_integrates_polynomials() {
        let r = unit_rule(8, 0.0, 0.0).unwrap();
        let integral: f64 = r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * x.powi(5)).sum();
        assert_relative_eq!(integral, 1.0 / 6.0, max_relative = 1e-14);
    }

    #[test]
    fn jacobi_handles_inverse_sqrt_endpoint() {
        // int_0^1 x^(-1/2) dx = 2, with the weight carrying the singularity.
        let r = unit_rule(8, 0.0, -0.5).unwrap();
        let integral: f64 = r.weights.iter().sum();
        assert_relative_eq!(integral, 2.0, max_relative = 1e-13);

        // int_0^1 x^(-1/2) cos(x) dx
        let integral: f64 = r.nodes.iter().zip(&r.weights).map(|(&x, &w)| w * x.cos()).sum();
        assert_relative_eq!(integral, 1.809048475800544, max_relative = 1e-12);
    }

    #[test]
    fn jacobi_two_sided() {
        // int_0^1 (1-x)^(1/2) x^(-1/2) dx = B(3/2, 1/2) = pi/2.
        let r = unit_rule(10, 0.5, -0.5).unwrap();
        let integral: f64 = r.weights.iter().sum();
        assert_relative_eq!(integral, std::f64::consts::PI / 2.0, max_relative = 1e-13);
    }

    #[test]
    fn rejects_bad_exponents() {
        assert!(unit_rule(8, -1.0, 0.0).is_err());
        assert!(unit_rule(8, 0.0, -1.5).is_err());
    }
}
