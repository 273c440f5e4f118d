//! Spatial and temporal meshes: a uniform interior grid on `(0, 1)` for the
//! eigenvalue problem, and graded meshes on `[0, x_max]` clustered at the
//! origin for the fractional time marching.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum GridError {
    #[error("invalid grid: {0}")]
    Invalid(String),
}

/// Uniform interior grid: nodes `i*h`, `i = 1..=p`, `h = 1/(p+1)`.
/// Boundary points are excluded; homogeneous boundary values are exact.
/// Each node carries quadrature weight `h`, so weights sum to `1 - h`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grid {
    h: f64,
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl Grid {
    pub fn new(p: usize) -> Result<Grid, GridError> {
        if p < 1 {
            return Err(GridError::Invalid(
                "interior grid needs at least one node".into(),
            ));
        }
        let h = 1.0 / (p + 1) as f64;
        let nodes: Vec<f64> = (1..=p).map(|i| i as f64 * h).collect();
        let weights = vec![h; p];
        Ok(Grid { h, nodes, weights })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }
}

/// Graded mesh `x_j = x_max (j/M)^r`, `j = 0..=M`, strictly increasing,
/// with `r >= 1`. Grading `r = 2/alpha` compensates the `x^{alpha}` startup
/// singularity of fractional relaxation solutions.
#[derive(Debug, Clone, PartialEq)]
pub struct XGrid {
    nodes: Vec<f64>,
    r: f64,
    x_max: f64,
}

impl XGrid {
    pub fn graded(x_max: f64, steps: usize, r: f64) -> Result<XGrid, GridError> {
        if !(x_max > 0.0) || !x_max.is_finite() {
            return Err(GridError::Invalid(format!(
                "x_max must be positive and finite, got {x_max}"
            )));
        }
        if steps < 1 {
            return Err(GridError::Invalid("mesh needs at least one step".into()));
        }
        if !(r >= 1.0) || !r.is_finite() {
            return Err(GridError::Invalid(format!(
                "grading exponent must satisfy r >= 1, got {r}"
            )));
        }
        let m = steps as f64;
        let nodes: Vec<f64> = (0..=steps)
            .map(|j| x_max * (j as f64 / m).powf(r))
            .collect();
        for w in nodes.windows(2) {
            if !(w[1] > w[0]) {
                return Err(GridError::Invalid(format!(
                    "mesh collapsed: adjacent nodes {} and {} (grading too strong \
                     for this step count)",
                    w[0], w[1]
                )));
            }
        }
        Ok(XGrid { nodes, r, x_max })
    }

    pub fn steps(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn x_max(&self) -> f64 {
        self.x_max
    }

    /// Same family with `factor` times the steps. Because `(factor*j) /
    /// (factor*M)` is the same rational as `j/M`, the original nodes
    /// reappear bit-identically at stride `factor`.
    pub fn refined(&self, factor: usize) -> Result<XGrid, GridError> {
        if factor < 1 {
            return Err(GridError::Invalid("refinement factor must be >= 1".into()));
        }
        XGrid::graded(self.x_max, self.steps() * factor, self.r)
    }
}
