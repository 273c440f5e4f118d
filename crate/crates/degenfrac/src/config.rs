//! Run configuration: a strict JSON schema with coefficient expressions.
//!
//! Unknown keys are rejected so typos fail loudly instead of silently
//! falling back to defaults. Coefficient fields hold expressions in the
//! variable `y`; they are parsed here, once, so a syntax error surfaces
//! before any numerics start.

use crate::expr::{self, ExprAst, ExprError};
use serde::Deserialize;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("invalid JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid configuration: {0}")]
    Invalid(String),
    #[error("in the expression for {field}: {source}")]
    Expr { field: String, source: ExprError },
}

/// Raw deserialized form of a run configuration file.
#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Fractional time order, in (0, 1).
    pub alpha: f64,
    /// Degeneracy exponent of the time coefficient x^beta; beta > -alpha.
    pub beta: f64,
    /// Half the spatial order: the leading term is of order 2s, s in 1..=4.
    pub s: usize,
    /// Spatial weight K(y), positive on (0, 1), as an expression in y.
    #[serde(rename = "K")]
    pub k: String,
    /// Lower-order coefficients p_0 .. p_{s-1}, expressions in y.
    pub p: Vec<String>,
    /// Initial data phi(y), an expression in y.
    pub phi: String,
    pub grid: GridConfig,
    /// Number of eigenmodes to compute (the solver may use fewer if the
    /// truncation bound already meets the tolerance).
    pub modes: usize,
    /// Target uniform bound on the mode-truncation error.
    pub tolerance: f64,
    /// Output path prefix for the generated files.
    pub output: String,
}

#[derive(Debug, Clone, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    /// Interior spatial nodes; at least 4s + 1.
    pub ny: usize,
    /// Time steps; at least 8.
    pub nx: usize,
    /// Mesh grading exponent, >= 1. Defaults to 2/alpha, which restores
    /// full second-order accuracy of the fractional marching scheme.
    #[serde(default)]
    pub r: Option<f64>,
    /// Upper end of the time interval. Defaults to 1.
    #[serde(default)]
    pub x_max: Option<f64>,
}

/// Configuration with expressions parsed and defaults resolved.
#[derive(Debug, Clone)]
pub struct ParsedConfig {
    pub raw: RunConfig,
    pub k_ast: ExprAst,
    pub p_asts: Vec<ExprAst>,
    pub phi_ast: ExprAst,
    pub r: f64,
    pub x_max: f64,
}

fn parse_field(field: &str, source: &str) -> Result<ExprAst, ConfigError> {
    expr::parse(source, "y").map_err(|source| ConfigError::Expr {
        field: field.to_string(),
        source,
    })
}

pub fn parse_str(text: &str) -> Result<ParsedConfig, ConfigError> {
    let raw: RunConfig = serde_json::from_str(text)?;

    if !raw.alpha.is_finite() || raw.alpha <= 0.0 || raw.alpha >= 1.0 {
        return Err(ConfigError::Invalid(format!(
            "alpha must lie strictly between 0 and 1, got {}",
            raw.alpha
        )));
    }
    if !raw.beta.is_finite() || raw.beta <= -raw.alpha {
        return Err(ConfigError::Invalid(format!(
            "beta must be finite and greater than -alpha = {}, got {}",
            -raw.alpha, raw.beta
        )));
    }
    if !(1..=4).contains(&raw.s) {
        return Err(ConfigError::Invalid(format!(
            "s must be in 1..=4, got {}",
            raw.s
        )));
    }
    if raw.p.len() != raw.s {
        return Err(ConfigError::Invalid(format!(
            "p must list exactly s = {} coefficients p_0..p_{}, got {}",
            raw.s,
            raw.s - 1,
            raw.p.len()
        )));
    }
    if raw.grid.ny < 4 * raw.s + 1 {
        return Err(ConfigError::Invalid(format!(
            "grid.ny must be at least 4s + 1 = {}, got {}",
            4 * raw.s + 1,
            raw.grid.ny
        )));
    }
    if raw.grid.nx < 8 {
        return Err(ConfigError::Invalid(format!(
            "grid.nx must be at least 8, got {}",
            raw.grid.nx
        )));
    }
    if raw.modes == 0 {
        return Err(ConfigError::Invalid("modes must be at least 1".into()));
    }
    if !raw.tolerance.is_finite() || raw.tolerance <= 0.0 {
        return Err(ConfigError::Invalid(format!(
            "tolerance must be positive, got {}",
            raw.tolerance
        )));
    }
    if raw.output.is_empty() {
        return Err(ConfigError::Invalid("output prefix must not be empty".into()));
    }
    let r = match raw.grid.r {
        Some(r) if !r.is_finite() || r < 1.0 => {
            return Err(ConfigError::Invalid(format!(
                "grid.r must be at least 1, got {r}"
            )));
        }
        Some(r) => r,
        None => 2.0 / raw.alpha,
    };
    let x_max = match raw.grid.x_max {
        Some(x) if !x.is_finite() || x <= 0.0 => {
            return Err(ConfigError::Invalid(format!(
                "grid.x_max must be positive, got {x}"
            )));
        }
        Some(x) => x,
        None => 1.0,
    };

    let k_ast = parse_field("K", &raw.k)?;
    let p_asts = raw
        .p
        .iter()
        .enumerate()
        .map(|(j, src)| parse_field(&format!("p[{j}]"), src))
        .collect::<Result<Vec<_>, _>>()?;
    let phi_ast = parse_field("phi", &raw.phi)?;

    Ok(ParsedConfig {
        raw,
        k_ast,
        p_asts,
        phi_ast,
        r,
        x_max,
    })
}

pub fn load(path: &Path) -> Result<ParsedConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.display().to_string(),
        source,
    })?;
    parse_str(&text)
}
