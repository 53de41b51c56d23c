//! Gauss-Legendre rules for the velocity variable.
//!
//! The AP scheme integrates over `v ∈ [0, 1]` with an `N`-point rule; the
//! explicit scheme uses a `2N`-point rule on `[-1, 1]` whose nodes are
//! addressed by the signed index `-N..=-1, 1..=N` (there is no index zero).

use std::f64::consts::PI;

use crate::error::{Error, Result};

const NEWTON_TOL: f64 = 1e-15;
const NEWTON_MAX_ITER: usize = 100;

#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    interval: (f64, f64),
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn interval(&self) -> (f64, f64) {
        self.interval
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Signed velocity index of storage position `p` for a rule with an even
    /// number of points: positions `0..N` map to `-N..=-1`, `N..2N` to `1..=N`.
    pub fn signed_index(&self, p: usize) -> i64 {
        let half = (self.len() / 2) as i64;
        let p = p as i64;
        if p < half {
            p - half
        } else {
            p - half + 1
        }
    }

    /// Inverse of [`signed_index`](Self::signed_index).
    pub fn position_of(&self, k: i64) -> Option<usize> {
        let half = (self.len() / 2) as i64;
        match k {
            0 => None,
            k if k < -half || k > half => None,
            k if k < 0 => Some((k + half) as usize),
            k => Some((k + half - 1) as usize),
        }
    }
}

/// Legendre polynomial `P_n(x)` and its derivative by the three-term recurrence.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let kf = k as f64;
        let next = ((2.0 * kf - 1.0) * x * p - (kf - 1.0) * p_prev) / kf;
        p_prev = p;
        p = next;
    }
    let dp = n as f64 * (x * p - p_prev) / (x * x - 1.0);
    (p, dp)
}

/// `n`-point Gauss-Legendre rule mapped to `[a, b]`.
///
/// Roots of `P_n` are found by Newton iteration from the Chebyshev-type
/// asymptotic guess `cos(π(i - 1/4)/(n + 1/2))`. Only the non-negative half is
/// iterated; the other half is its mirror image, so reference nodes are
/// exactly antisymmetric and weights exactly symmetric.
pub fn gauss_rule(n_points: usize, a: f64, b: f64) -> Result<QuadratureRule> {
    if n_points == 0 {
        return Err(Error::invalid("quadrature needs at least one point"));
    }
    if !(a.is_finite() && b.is_finite()) || a >= b {
        return Err(Error::invalid(format!(
            "quadrature interval must satisfy a < b, got ({a}, {b})"
        )));
    }

    let n = n_points;
    let mut ref_nodes = vec![0.0; n];
    let mut ref_weights = vec![0.0; n];
    let nf = n as f64;
    for i in 0..n.div_ceil(2) {
        let mut x = (PI * (i as f64 + 0.75) / (nf + 0.5)).cos();
        let mut converged = false;
        for _ in 0..NEWTON_MAX_ITER {
            let (p, d) = legendre_with_derivative(n, x);
            let dx = p / d;
            x -= dx;
            if dx.abs() <= NEWTON_TOL {
                converged = true;
                break;
            }
        }
        if !converged {
            return Err(Error::NonConvergence {
                what: "Legendre root Newton iteration",
                iterations: NEWTON_MAX_ITER,
            });
        }
        let (_, dp) = legendre_with_derivative(n, x);
        let w = 2.0 / ((1.0 - x * x) * dp * dp);
        // Guess i approaches the i-th largest root.
        ref_nodes[n - 1 - i] = x;
        ref_nodes[i] = -x;
        ref_weights[n - 1 - i] = w;
        ref_weights[i] = w;
    }
    if n % 2 == 1 {
        ref_nodes[n / 2] = 0.0;
    }

    let half = 0.5 * (b - a);
    let mid = 0.5 * (a + b);
    let nodes = ref_nodes.iter().map(|&x| mid + half * x).collect();
    let weights = ref_weights.iter().map(|&w| half * w).collect();
    Ok(QuadratureRule {
        nodes,
        weights,
        interval: (a, b),
    })
}

/// The `N`-point rule on `[0, 1]` used by the AP scheme.
pub fn half_range_rule(n: usize) -> Result<QuadratureRule> {
    gauss_rule(n, 0.0, 1.0)
}

/// The `2N`-point symmetric rule on `[-1, 1]` used by the explicit scheme.
pub fn full_range_rule(n: usize) -> Result<QuadratureRule> {
    if n == 0 {
        return Err(Error::invalid("velocity count N must be positive"));
    }
    gauss_rule(2 * n, -1.0, 1.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn one_point_is_midpoint() {
        let rule = gauss_rule(1, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[0], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn two_point_matches_moment_solution() {
        // Moment equations sum w v^p = 1/(p+1), p = 0..3 on [0,1], solved by
        // hand: symmetric nodes 1/2 ± t with t^2 = 1/12, equal weights 1/2.
        let t = (1.0f64 / 12.0).sqrt();
        let rule = gauss_rule(2, 0.0, 1.0).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], 0.5 - t, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.nodes()[1], 0.5 + t, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.nodes()[0], (3.0 - 3f64.sqrt()) / 6.0, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[1], 0.5, epsilon = 1e-15);
    }

    #[test]
    fn four_point_symmetric() {
        let rule = gauss_rule(4, -1.0, 1.0).unwrap();
        let sum: f64 = rule.weights().iter().sum();
        assert_abs_diff_eq!(sum, 2.0, epsilon = 1e-14);
        for i in 0..4 {
            assert_eq!(rule.nodes()[i], -rule.nodes()[3 - i]);
            assert_eq!(rule.weights()[i], rule.weights()[3 - i]);
        }
    }

    #[test]
    fn rejects_bad_arguments() {
        assert!(matches!(gauss_rule(0, 0.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_rule(3, 1.0, 1.0), Err(Error::InvalidArgument(_))));
        assert!(matches!(gauss_rule(3, 2.0, 1.0), Err(Error::InvalidArgument(_))));
    }

    #[test]
    fn signed_index_round_trip() {
        let rule = full_range_rule(3).unwrap();
        let ks: Vec<i64> = (0..6).map(|p| rule.signed_index(p)).collect();
        assert_eq!(ks, vec![-3, -2, -1, 1, 2, 3]);
        for p in 0..6 {
            assert_eq!(rule.position_of(rule.signed_index(p)), Some(p));
        }
        assert_eq!(rule.position_of(0), None);
        assert_eq!(rule.position_of(4), None);
        // v_{-k} = -v_k
        for k in 1..=3 {
            let pos = rule.position_of(k).unwrap();
            let neg = rule.position_of(-k).unwrap();
            assert_eq!(rule.nodes()[pos], -rule.nodes()[neg]);
            assert_eq!(rule.weights()[pos], rule.weights()[neg]);
        }
    }

    #[test]
    fn invariants_hold_up_to_64_points() {
        for n in 1..=64 {
            for (a, b) in [(0.0, 1.0), (-1.0, 1.0)] {
                let rule = gauss_rule(n, a, b).unwrap();
                let sum: f64 = rule.weights().iter().sum();
                assert!((sum - (b - a)).abs() <= 1e-13, "n={n} sum={sum}");
                assert!(rule.weights().iter().all(|&w| w > 0.0));
                assert!(rule.nodes().windows(2).all(|p| p[0] < p[1]));
                assert!(rule.nodes().iter().all(|&x| x > a && x < b));
            }
        }
    }

    #[test]
    fn deterministic() {
        assert_eq!(gauss_rule(17, 0.0, 1.0).unwrap(), gauss_rule(17, 0.0, 1.0).unwrap());
    }
}
