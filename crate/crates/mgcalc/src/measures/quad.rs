use crate::error::{Error, Result};

use super::CdfEvaluator;

/// Quadrature rule on the distribution coordinate `t` in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum QuadratureRule {
    Midpoint,
    Trapezoid,
}

/// Nodes and weights on `[0, 1]`; weights are nonnegative and sum to 1.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureGrid {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    rule: QuadratureRule,
}

impl QuadratureGrid {
    pub const DEFAULT_SIZE: usize = 100_000;

    /// Midpoint rule with `m` cells. Nodes avoid 0 and 1, which keeps
    /// pullbacks off the endpoint plateaus of singular measures.
    pub fn midpoint(m: usize) -> Result<Self> {
        if m == 0 {
            return Err(Error::validation("midpoint grid needs at least one cell"));
        }
        let w = 1.0 / m as f64;
        let nodes = (0..m).map(|k| (k as f64 + 0.5) * w).collect();
        Self::new(nodes, vec![w; m], QuadratureRule::Midpoint)
    }

    /// Trapezoid rule with `m` nodes including both endpoints.
    pub fn trapezoid(m: usize) -> Result<Self> {
        if m < 2 {
            return Err(Error::validation("trapezoid grid needs at least two nodes"));
        }
        let h = 1.0 / (m - 1) as f64;
        let nodes = (0..m).map(|k| (k as f64 * h).min(1.0)).collect();
        let mut weights = vec![h; m];
        weights[0] = 0.5 * h;
        weights[m - 1] = 0.5 * h;
        Self::new(nodes, weights, QuadratureRule::Trapezoid)
    }

    pub fn default_midpoint() -> Self {
        Self::midpoint(Self::DEFAULT_SIZE).expect("default grid is valid")
    }

    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, rule: QuadratureRule) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::validation(format!(
                "{} nodes but {} weights",
                nodes.len(),
                weights.len()
            )));
        }
        for w in nodes.windows(2) {
            if !(w[0] <= w[1]) {
                return Err(Error::validation("nodes must be sorted"));
            }
        }
        if !(nodes[0] >= 0.0) || !(nodes[nodes.len() - 1] <= 1.0) {
            return Err(Error::validation("nodes must lie in [0, 1]"));
        }
        for w in &weights {
            if !w.is_finite() || *w < 0.0 {
                return Err(Error::validation(format!("weight {w} must be nonnegative")));
            }
        }
        let sum = kahan_sum(weights.iter().copied());
        if (sum - 1.0).abs() > 1e-14 {
            return Err(Error::validation(format!(
                "weights sum to {sum}, expected 1 within 1e-14"
            )));
        }
        Ok(QuadratureGrid {
            nodes,
            weights,
            rule,
        })
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn rule(&self) -> QuadratureRule {
        self.rule
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

/// A quadrature grid bound to a measure: node pullbacks `x_k = F^(-1)(t_k)`
/// and their distribution values `F(x_k)` are computed once and reused by
/// every integral. Integrals of `g` against the measure become weighted sums
/// of `g(x_k)` because the pushforward of the measure under `F` is uniform.
#[derive(Debug, Clone)]
pub struct MuQuadrature {
    evaluator: CdfEvaluator,
    grid: QuadratureGrid,
    x: Vec<f64>,
    t_of_x: Vec<f64>,
}

impl MuQuadrature {
    pub fn new(evaluator: &CdfEvaluator, grid: &QuadratureGrid) -> Result<Self> {
        let x = evaluator.pseudo_inverse_grid(grid.nodes())?;
        let t_of_x = evaluator.cdf_grid(&x)?;
        Ok(MuQuadrature {
            evaluator: evaluator.clone(),
            grid: grid.clone(),
            x,
            t_of_x,
        })
    }

    pub fn evaluator(&self) -> &CdfEvaluator {
        &self.evaluator
    }

    pub fn grid(&self) -> &QuadratureGrid {
        &self.grid
    }

    /// Pullback points `x_k`, nondecreasing.
    pub fn nodes_x(&self) -> &[f64] {
        &self.x
    }

    /// `F(x_k)` for each pullback point.
    pub fn cdf_at_nodes(&self) -> &[f64] {
        &self.t_of_x
    }

    /// Integral of `g` against the measure. Deterministic for a fixed grid:
    /// the compensated sum runs in node order regardless of threading.
    pub fn integrate(&self, g: impl Fn(f64) -> f64) -> f64 {
        kahan_sum(
            self.x
                .iter()
                .zip(self.grid.weights())
                .map(|(&x, &w)| w * g(x)),
        )
    }
}

/// One-shot integral of `g` against the measure over the given grid.
pub fn integrate_mu(
    evaluator: &CdfEvaluator,
    g: impl Fn(f64) -> f64,
    grid: &QuadratureGrid,
) -> Result<f64> {
    Ok(MuQuadrature::new(evaluator, grid)?.integrate(g))
}

pub(crate) fn kahan_sum(values: impl Iterator<Item = f64>) -> f64 {
    let mut sum = 0.0;
    let mut carry = 0.0;
    for v in values {
        let y = v - carry;
        let t = sum + y;
        carry = (t - sum) - y;
        sum = t;
    }
    sum
}
