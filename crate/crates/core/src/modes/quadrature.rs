use std::num::NonZeroUsize;

use gauss_quad::GaussLegendre;

use crate::error::{domain, structural, Result};

/// Points per panel of a composite rule.
pub const PANEL_ORDER: usize = 16;

/// Radial quadrature on `(0, r_max]`, all lengths in µm.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    r_max: f64,
}

/// Gauss–Legendre rule with `n_nodes` points mapped onto `(0, r_max]`.
pub fn make_quadrature(r_max: f64, n_nodes: usize) -> Result<QuadratureRule> {
    if !(r_max.is_finite() && r_max > 0.0) {
        return Err(domain("make_quadrature", format!("r_max must be > 0, got {r_max}")));
    }
    if n_nodes < 2 {
        return Err(domain("make_quadrature", format!("need at least 2 nodes, got {n_nodes}")));
    }
    let mut nodes = Vec::with_capacity(n_nodes);
    let mut weights = Vec::with_capacity(n_nodes);
    push_panel(&gl(n_nodes), 0.0, r_max, &mut nodes, &mut weights);
    QuadratureRule::from_parts(nodes, weights, r_max)
}

fn gl(n: usize) -> Vec<(f64, f64)> {
    let rule = GaussLegendre::new(NonZeroUsize::new(n).expect("n > 0"));
    let mut pairs = rule.as_node_weight_pairs().to_vec();
    pairs.sort_by(|a, b| a.0.total_cmp(&b.0));
    pairs
}

fn push_panel(ref_rule: &[(f64, f64)], a: f64, b: f64, nodes: &mut Vec<f64>, weights: &mut Vec<f64>) {
    let half = 0.5 * (b - a);
    let mid = 0.5 * (b + a);
    for &(x, w) in ref_rule {
        nodes.push(mid + half * x);
        weights.push(half * w);
    }
}

impl QuadratureRule {
    /// Builds a rule from explicit nodes and weights, checking every invariant.
    pub fn from_parts(nodes: Vec<f64>, weights: Vec<f64>, r_max: f64) -> Result<Self> {
        let rule = QuadratureRule {
            nodes,
            weights,
            r_max,
        };
        rule.validate()?;
        Ok(rule)
    }

    /// Composite rule of [`PANEL_ORDER`]-point Gauss–Legendre panels no
    /// longer than `max_panel`, with a panel edge at every radius in `breaks`.
    ///
    /// Integrands that jump at the break radii (binary phase masks) are then
    /// smooth on every panel and the rule keeps its spectral accuracy.
    pub fn composite(r_max: f64, max_panel: f64, breaks: &[f64]) -> Result<Self> {
        Self::composite_refined(r_max, max_panel, breaks, 1)
    }

    /// [`composite`](Self::composite) with every panel split into
    /// `subdivisions` equal pieces, so the node count scales exactly.
    pub fn composite_refined(r_max: f64, max_panel: f64, breaks: &[f64], subdivisions: usize) -> Result<Self> {
        if subdivisions == 0 {
            return Err(domain("QuadratureRule::composite", "subdivisions must be >= 1"));
        }
        if !(r_max.is_finite() && r_max > 0.0) {
            return Err(domain("QuadratureRule::composite", format!("r_max must be > 0, got {r_max}")));
        }
        if !(max_panel.is_finite() && max_panel > 0.0) {
            return Err(domain(
                "QuadratureRule::composite",
                format!("panel length must be > 0, got {max_panel}"),
            ));
        }
        let min_gap = 1e-9 * r_max;
        let mut edges: Vec<f64> = breaks
            .iter()
            .copied()
            .filter(|b| b.is_finite() && *b > min_gap && *b < r_max - min_gap)
            .collect();
        edges.sort_by(f64::total_cmp);
        let mut cuts = vec![0.0];
        for e in edges {
            if e - cuts[cuts.len() - 1] > min_gap {
                cuts.push(e);
            }
        }
        cuts.push(r_max);

        let reference = gl(PANEL_ORDER);
        let mut nodes = Vec::new();
        let mut weights = Vec::new();
        for seg in cuts.windows(2) {
            let (a, b) = (seg[0], seg[1]);
            let pieces = ((b - a) / max_panel).ceil().max(1.0) as usize * subdivisions;
            let h = (b - a) / pieces as f64;
            for k in 0..pieces {
                let lo = a + h * k as f64;
                let hi = if k + 1 == pieces { b } else { lo + h };
                push_panel(&reference, lo, hi, &mut nodes, &mut weights);
            }
        }
        Self::from_parts(nodes, weights, r_max)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn r_max(&self) -> f64 {
        self.r_max
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    /// `∫_0^{r_max} f(r) dr`.
    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&r, &w)| w * f(r)).sum()
    }

    /// Relative error of the rule on `∫ r dr = r_max²/2`.
    pub fn exactness_error(&self) -> f64 {
        let exact = 0.5 * self.r_max * self.r_max;
        (self.integrate(|r| r) - exact).abs() / exact
    }

    fn validate(&self) -> Result<()> {
        const OP: &str = "QuadratureRule";
        if self.nodes.len() != self.weights.len() {
            return Err(structural(
                OP,
                format!("{} nodes but {} weights", self.nodes.len(), self.weights.len()),
            ));
        }
        if self.nodes.len() < 2 {
            return Err(domain(OP, "need at least 2 nodes"));
        }
        if !(self.r_max.is_finite() && self.r_max > 0.0) {
            return Err(domain(OP, format!("r_max must be > 0, got {}", self.r_max)));
        }
        if self.nodes[0] <= 0.0 || self.nodes[self.nodes.len() - 1] > self.r_max {
            return Err(domain(OP, "nodes must lie in (0, r_max]"));
        }
        if self.nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(domain(OP, "nodes must be strictly increasing"));
        }
        if self.weights.iter().any(|w| !(*w > 0.0)) {
            return Err(domain(OP, "weights must be positive"));
        }
        let err = self.exactness_error();
        if !(err < 1e-12) {
            return Err(domain(OP, format!("rule fails ∫r dr exactness check (rel. error {err:.2e})")));
        }
        Ok(())
    }
}
