//! Discrete eigenstructure of the spatial operator.
//!
//! The spatial eigenvalue problem on (0, 1) is
//!
//! ```text
//! (-1)^s Y^(2s) + sum_{j<s} (-1)^j (p_j(y) Y^(j))^(j) = lambda Y / K(y),
//! Y = Y' = ... = Y^(s-1) = 0 at y = 0 and y = 1,
//! ```
//!
//! with K > 0 on the open interval (it may vanish at the ends like a power
//! of y) and p_j >= 0. Discretization samples Y on the P interior nodes of
//! a uniform grid and approximates the quadratic form
//!
//! ```text
//! a(u, u) = sum_j integral p_j (u^(j))^2 dy
//! ```
//!
//! by staggered j-th differences: each difference row sits at the center of
//! its stencil and carries the length of its cell clipped to [0, 1], so end
//! cells of even-order stencils get half weight. Values outside the open
//! interval fold back by reflection with sign (-1)^s, which encodes the
//! clamped boundary stack to second order; the boundary nodes themselves
//! carry value zero and drop out. The result is a symmetric banded matrix A
//! with half-bandwidth s, positive definite by construction.
//!
//! With the diagonal mass matrix M = diag(h / K(y_i)) the discrete problem
//! is A v = lambda M v. Two independent routes compute its low spectrum:
//!
//! * direct: inertia bisection plus inverse iteration on the symmetrized
//!   matrix B = M^{-1/2} A M^{-1/2};
//! * kernel: invert A by banded Cholesky into the Green matrix G, compress
//!   it to C = M^{1/2} G M^{1/2} (algebraically exactly B^{-1}) and take
//!   the largest eigenpairs by subspace iteration.
//!
//! Agreement of the two routes is a strong end-to-end check and is exposed
//! to the verification command rather than hidden here.
//!
//! Modes are normalized to sum_i (h / K_i) Y(y_i)^2 = 1, the discrete form
//! of integral Y^2 / K dy = 1, and signed so the largest-magnitude sample
//! is positive. Eigenvalues sharing a near-degenerate cluster (relative gap
//! below 1e-8) are flagged: individual vectors inside such a cluster are
//! only determined up to rotation, though the span is reliable.

use crate::grid::Grid;
use crate::linalg::{
    eigenvector_for, lowest_eigenvalues, subspace_largest, BandedSym, DenseSym, LinalgError,
};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum SpectralError {
    #[error("invalid problem: {0}")]
    InvalidParams(String),
    #[error("weight K must be positive inside the interval; K({y}) = {value}")]
    NonpositiveWeight { y: f64, value: f64 },
    #[error("coefficient p_{order} must be nonnegative; p_{order}({y}) = {value}")]
    NegativeCoefficient { order: usize, y: f64, value: f64 },
    #[error("evaluating {what} at y = {y} failed: {message}")]
    EvalFailed { what: String, y: f64, message: String },
    #[error("requested {requested} modes but only {reliable} are reliable on this grid")]
    TooManyModes { requested: usize, reliable: usize },
    #[error(transparent)]
    Linalg(#[from] LinalgError),
}

/// Scalar coefficient function of y, as produced by the expression layer.
pub type CoefFn<'a> = &'a dyn Fn(f64) -> Result<f64, String>;

fn eval_coef(f: CoefFn, what: &str, y: f64) -> Result<f64, SpectralError> {
    let value = f(y).map_err(|message| SpectralError::EvalFailed {
        what: what.to_string(),
        y,
        message,
    })?;
    if !value.is_finite() {
        return Err(SpectralError::EvalFailed {
            what: what.to_string(),
            y,
            message: format!("non-finite value {value}"),
        });
    }
    Ok(value)
}

/// Assembled spatial operator on a uniform interior grid.
#[derive(Debug, Clone)]
pub struct DiscreteOperator {
    s: usize,
    grid: Grid,
    k_vals: Vec<f64>,
    mass: Vec<f64>,
    a: BandedSym,
}

impl DiscreteOperator {
    pub fn s(&self) -> usize {
        self.s
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// K sampled at the interior nodes.
    pub fn k_values(&self) -> &[f64] {
        &self.k_vals
    }

    /// Diagonal of the mass matrix, h / K(y_i).
    pub fn mass(&self) -> &[f64] {
        &self.mass
    }

    /// The stiffness form A.
    pub fn form(&self) -> &BandedSym {
        &self.a
    }

    /// y = A x.
    pub fn apply_form(&self, x: &[f64], y: &mut [f64]) {
        self.a.matvec(x, y);
    }

    /// Number of modes the grid resolves well; higher modes accumulate
    /// discretization error faster than the spectrum grows.
    pub fn max_reliable_modes(&self) -> usize {
        self.grid.len() / 4
    }
}

// Extended node id -> (interior column, fold sign), or None for a boundary
// node whose value is pinned to zero. Ids beyond the ends reflect back with
// sign (-1)^s.
fn fold(n: isize, p: usize, s: usize) -> Option<(usize, f64)> {
    let end = (p + 1) as isize;
    let refl = if s % 2 == 0 { 1.0 } else { -1.0 };
    if n >= 1 && n < end {
        Some(((n - 1) as usize, 1.0))
    } else if n == 0 || n == end {
        None
    } else if n < 0 {
        debug_assert!(-n < end);
        Some(((-n - 1) as usize, refl))
    } else {
        debug_assert!(2 * end - n >= 1);
        Some(((2 * end - n - 1) as usize, refl))
    }
}

fn binomial(j: usize, k: usize) -> f64 {
    let mut c = 1.0;
    for i in 0..k {
        c = c * (j - i) as f64 / (i + 1) as f64;
    }
    c
}

/// Builds the banded stiffness matrix and mass diagonal for the problem
/// with leading order 2s, weight `k`, and lower-order coefficients
/// `lower[j] = p_j` for j < s (entries past the end of the slice are zero;
/// the leading coefficient p_s is identically one).
pub fn build_operator(
    grid: &Grid,
    s: usize,
    k: CoefFn,
    lower: &[Option<CoefFn>],
) -> Result<DiscreteOperator, SpectralError> {
    if !(1..=4).contains(&s) {
        return Err(SpectralError::InvalidParams(format!(
            "order parameter s must be in 1..=4, got {s}"
        )));
    }
    if lower.len() > s {
        return Err(SpectralError::InvalidParams(format!(
            "{} lower-order coefficients for s = {s}; at most p_0..p_{}",
            lower.len(),
            s - 1
        )));
    }
    let p = grid.len();
    if p <= 4 * s {
        return Err(SpectralError::InvalidParams(format!(
            "grid with {p} interior nodes is too coarse for order 2*{s}; need more than {}",
            4 * s
        )));
    }
    let h = grid.h();

    let mut k_vals = Vec::with_capacity(p);
    let mut mass = Vec::with_capacity(p);
    for (&y, &qw) in grid.nodes().iter().zip(grid.weights()) {
        let kv = eval_coef(k, "K", y)?;
        if kv <= 0.0 {
            return Err(SpectralError::NonpositiveWeight { y, value: kv });
        }
        k_vals.push(kv);
        mass.push(qw / kv);
    }

    let mut a = BandedSym::zeros(p, s);
    let mut entries: Vec<(usize, f64)> = Vec::with_capacity(s + 1);
    for j in 0..=s {
        let coef_fn: Option<CoefFn> = if j == s {
            None
        } else {
            match lower.get(j) {
                Some(Some(f)) => Some(*f),
                _ => continue,
            }
        };
        let inv_hj = h.powi(-(j as i32));
        for r in -(j as isize)..=(p + j) as isize {
            let c = (r as f64 - j as f64 / 2.0 + 1.0) * h;
            let cell_lo = (c - 0.5 * h).max(0.0);
            let cell_hi = (c + 0.5 * h).min(1.0);
            let wr = cell_hi - cell_lo;
            if wr <= 0.0 {
                continue;
            }
            entries.clear();
            for kk in 0..=j {
                let n = r - j as isize + kk as isize + 1;
                if let Some((col, fold_sign)) = fold(n, p, s) {
                    let sign = if (j - kk) % 2 == 0 { 1.0 } else { -1.0 };
                    let coef = sign * binomial(j, kk) * inv_hj * fold_sign;
                    match entries.iter_mut().find(|(ec, _)| *ec == col) {
                        Some((_, ev)) => *ev += coef,
                        None => entries.push((col, coef)),
                    }
                }
            }
            if entries.is_empty() {
                continue;
            }
            let pv = match coef_fn {
                None => 1.0,
                Some(f) => {
                    let y = c.clamp(0.0, 1.0);
                    let v = eval_coef(f, &format!("p_{j}"), y)?;
                    if v < 0.0 {
                        return Err(SpectralError::NegativeCoefficient {
                            order: j,
                            y,
                            value: v,
                        });
                    }
                    v
                }
            };
            if pv == 0.0 {
                continue;
            }
            let scale = wr * pv;
            entries.sort_by_key(|&(col, _)| col);
            for i1 in 0..entries.len() {
                let (c1, v1) = entries[i1];
                for &(c2, v2) in &entries[i1..] {
                    a.add(c1, c2, scale * v1 * v2);
                }
            }
        }
    }

    Ok(DiscreteOperator {
        s,
        grid: grid.clone(),
        k_vals,
        mass,
        a,
    })
}

/// Low spectrum of the operator: eigenvalues ascending, weight-normalized
/// modes sampled at the grid nodes, and near-degeneracy flags.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: Vec<f64>,
    pub modes: Vec<Vec<f64>>,
    pub near_degenerate: Vec<bool>,
}

impl EigenSolution {
    pub fn len(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn is_empty(&self) -> bool {
        self.eigenvalues.is_empty()
    }
}

pub(crate) fn near_degenerate_flags(eigenvalues: &[f64]) -> Vec<bool> {
    let mut flags = vec![false; eigenvalues.len()];
    for i in 1..eigenvalues.len() {
        let gap = eigenvalues[i] - eigenvalues[i - 1];
        if gap < 1e-8 * eigenvalues[i].abs().max(1e-300) {
            flags[i - 1] = true;
            flags[i] = true;
        }
    }
    flags
}

fn check_mode_budget(op: &DiscreteOperator, requested: usize) -> Result<(), SpectralError> {
    if requested == 0 {
        return Err(SpectralError::InvalidParams(
            "at least one mode must be requested".into(),
        ));
    }
    let reliable = op.max_reliable_modes();
    if requested > reliable {
        return Err(SpectralError::TooManyModes {
            requested,
            reliable,
        });
    }
    Ok(())
}

// Shared postprocessing: convert a B-orthonormal vector u to the mode
// Y(y_i) = u_i / sqrt(mass_i), check the weight normalization that is
// automatic up to rounding, and fix the overall sign.
fn finish_mode(u: &[f64], mass: &[f64]) -> Vec<f64> {
    let mut v: Vec<f64> = u
        .iter()
        .zip(mass)
        .map(|(ui, mi)| ui / mi.sqrt())
        .collect();
    let norm: f64 = v.iter().zip(mass).map(|(vi, mi)| mi * vi * vi).sum();
    assert!(
        (norm - 1.0).abs() < 1e-10,
        "mode normalization drifted: {norm}"
    );
    let mut best = 0;
    for (i, x) in v.iter().enumerate() {
        if x.abs() > v[best].abs() {
            best = i;
        }
    }
    if v[best] < 0.0 {
        for x in v.iter_mut() {
            *x = -*x;
        }
    }
    v
}

/// Direct route: bisection on the symmetrized pencil plus inverse
/// iteration, orthogonalizing within near-degenerate clusters.
pub fn solve_eigs(op: &DiscreteOperator, n_modes: usize) -> Result<EigenSolution, SpectralError> {
    check_mode_budget(op, n_modes)?;
    let d: Vec<f64> = op.mass.iter().map(|m| 1.0 / m.sqrt()).collect();
    let b = op.a.scaled(&d)?;
    let eigenvalues = lowest_eigenvalues(&b, n_modes)?;
    let mut u_vecs: Vec<Vec<f64>> = Vec::with_capacity(n_modes);
    let mut cluster_start = 0;
    for (n, &lam) in eigenvalues.iter().enumerate() {
        if n > 0 && lam - eigenvalues[n - 1] >= 1e-8 * lam.abs().max(1e-300) {
            cluster_start = n;
        }
        let u = eigenvector_for(&b, lam, &u_vecs[cluster_start..n])?;
        u_vecs.push(u);
    }
    let modes = u_vecs.iter().map(|u| finish_mode(u, &op.mass)).collect();
    let near_degenerate = near_degenerate_flags(&eigenvalues);
    Ok(EigenSolution {
        eigenvalues,
        modes,
        near_degenerate,
    })
}

/// Green matrix G = A^{-1}, symmetrized against the rounding asymmetry of
/// column-by-column solves. For s = 1 and K = 1 this reproduces the
/// triangular kernel min(y, z) - y z exactly.
#[derive(Debug, Clone)]
pub struct GreenKernel {
    n: usize,
    data: Vec<f64>,
}

impl GreenKernel {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn value(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }
}

pub fn green_kernel(op: &DiscreteOperator) -> Result<GreenKernel, SpectralError> {
    let n = op.grid.len();
    let chol = op.a.cholesky()?;
    let mut data = vec![0.0; n * n];
    let mut col = vec![0.0; n];
    for j in 0..n {
        col.fill(0.0);
        col[j] = 1.0;
        chol.solve_into(&mut col);
        for i in 0..n {
            data[i * n + j] = col[i];
        }
    }
    for i in 0..n {
        for j in 0..i {
            let avg = 0.5 * (data[i * n + j] + data[j * n + i]);
            data[i * n + j] = avg;
            data[j * n + i] = avg;
        }
    }
    Ok(GreenKernel { n, data })
}

/// Kernel route: the compressed Green matrix C = M^{1/2} G M^{1/2} equals
/// B^{-1} algebraically, so its largest eigenvalues are the reciprocals of
/// the operator's smallest. Everything downstream of G is computed
/// independently of the bisection route.
pub fn nystrom_eigs(
    op: &DiscreteOperator,
    kernel: &GreenKernel,
    n_modes: usize,
) -> Result<EigenSolution, SpectralError> {
    check_mode_budget(op, n_modes)?;
    let n = op.grid.len();
    if kernel.n != n {
        return Err(SpectralError::InvalidParams(format!(
            "kernel of size {} does not match grid with {n} nodes",
            kernel.n
        )));
    }
    let sqrt_mass: Vec<f64> = op.mass.iter().map(|m| m.sqrt()).collect();
    let mut data = vec![0.0; n * n];
    for i in 0..n {
        for j in 0..n {
            data[i * n + j] = sqrt_mass[i] * kernel.value(i, j) * sqrt_mass[j];
        }
    }
    let c = DenseSym::new(n, data)?;
    let (mu, qs) = subspace_largest(&c, n_modes)?;
    let mut eigenvalues = Vec::with_capacity(n_modes);
    let mut modes = Vec::with_capacity(n_modes);
    for (m, q) in mu.iter().zip(&qs) {
        if *m <= 0.0 {
            return Err(SpectralError::Linalg(LinalgError::Nonconvergence(format!(
                "kernel eigenvalue {m:.3e} is not positive"
            ))));
        }
        eigenvalues.push(1.0 / m);
        modes.push(finish_mode(q, &op.mass));
    }
    let near_degenerate = near_degenerate_flags(&eigenvalues);
    Ok(EigenSolution {
        eigenvalues,
        modes,
        near_degenerate,
    })
}

/// Largest absolute deviation between the Green matrix and its truncated
/// mode expansion sum_n Y_n(y_i) Y_n(y_j) / lambda_n. Decreases as modes
/// are added and vanishes (to rounding) when all P modes participate.
pub fn mercer_check(kernel: &GreenKernel, sol: &EigenSolution) -> f64 {
    let n = kernel.n;
    let mut worst = 0.0f64;
    let mut acc = vec![0.0; n];
    for j in 0..n {
        acc.fill(0.0);
        for (lam, mode) in sol.eigenvalues.iter().zip(&sol.modes) {
            let w = mode[j] / lam;
            for (a, m) in acc.iter_mut().zip(mode) {
                *a += w * m;
            }
        }
        for i in 0..n {
            worst = worst.max((kernel.value(i, j) - acc[i]).abs());
        }
    }
    worst
}
