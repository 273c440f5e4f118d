//! Symmetric banded factorizations and the eigensolvers built on them.
//!
//! Everything here is deterministic: start vectors come from fixed seeds,
//! loops have fixed orders, and no randomness or threading enters, so two
//! runs on the same input produce bit-identical output.
//!
//! Eigenvalues of banded matrices are found by Sylvester inertia bisection
//! (negative-pivot counts of shifted LDL^T factorizations bracket each
//! eigenvalue), eigenvectors by shifted inverse iteration with cluster
//! orthogonalization. Dense symmetric spectra (Rayleigh-Ritz blocks, cross
//! checks) use cyclic Jacobi. Largest eigenpairs of dense PSD kernels come
//! from blocked subspace iteration with Ritz acceleration.

use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum LinalgError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("matrix is not positive definite (pivot {pivot:.6e} at column {column})")]
    NotPositiveDefinite { column: usize, pivot: f64 },
    #[error("iteration did not converge: {0}")]
    Nonconvergence(String),
}

/// Symmetric banded matrix stored by diagonals: `diags[d][i] = A[i, i+d]`
/// for `0 <= d <= hb`, each of length `n - d`.
#[derive(Debug, Clone, PartialEq)]
pub struct BandedSym {
    n: usize,
    hb: usize,
    diags: Vec<Vec<f64>>,
}

impl BandedSym {
    pub fn zeros(n: usize, hb: usize) -> BandedSym {
        assert!(n > 0, "empty matrix");
        let hb = hb.min(n - 1);
        let diags = (0..=hb).map(|d| vec![0.0; n - d]).collect();
        BandedSym { n, hb, diags }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> usize {
        self.hb
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        if d > self.hb {
            0.0
        } else {
            self.diags[d][lo]
        }
    }

    /// Accumulates `v` at the symmetric position `(i, j)`; panics outside
    /// the band (operator assembly never leaves it).
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let (lo, hi) = if i <= j { (i, j) } else { (j, i) };
        let d = hi - lo;
        assert!(d <= self.hb, "entry ({i}, {j}) outside bandwidth {}", self.hb);
        self.diags[d][lo] += v;
    }

    /// `diag(d) * A * diag(d)` with the same band.
    pub fn scaled(&self, d: &[f64]) -> Result<BandedSym, LinalgError> {
        if d.len() != self.n {
            return Err(LinalgError::Dimension(format!(
                "scaling vector of length {} for a matrix of size {}",
                d.len(),
                self.n
            )));
        }
        let mut out = self.clone();
        for (dd, diag) in out.diags.iter_mut().enumerate() {
            for (i, v) in diag.iter_mut().enumerate() {
                *v *= d[i] * d[i + dd];
            }
        }
        Ok(out)
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        assert_eq!(y.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            y[i] += self.diags[0][i] * x[i];
        }
        for d in 1..=self.hb {
            let diag = &self.diags[d];
            for i in 0..self.n - d {
                y[i] += diag[i] * x[i + d];
                y[i + d] += diag[i] * x[i];
            }
        }
    }

    /// Interval certainly containing the whole spectrum.
    pub fn gershgorin(&self) -> (f64, f64) {
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..self.n {
            let mut radius = 0.0;
            for d in 1..=self.hb {
                if i + d < self.n {
                    radius += self.diags[d][i].abs();
                }
                if i >= d {
                    radius += self.diags[d][i - d].abs();
                }
            }
            lo = lo.min(self.diags[0][i] - radius);
            hi = hi.max(self.diags[0][i] + radius);
        }
        (lo, hi)
    }

    // LDL^T of A - shift*I without pivoting; tiny pivots are replaced by
    // +/- tiny to keep the factor usable for solves. Returns the factor and
    // the count of negative pivots (= eigenvalues below the shift).
    fn ldlt(&self, shift: f64, tiny: f64) -> (Ldlt, usize) {
        let n = self.n;
        let hb = self.hb;
        let mut l: Vec<Vec<f64>> = (1..=hb).map(|d| vec![0.0; n - d]).collect();
        let mut dv = vec![0.0; n];
        let mut negatives = 0;
        for i in 0..n {
            let k0 = i.saturating_sub(hb);
            let mut s = self.diags[0][i] - shift;
            for k in k0..i {
                let lik = l[i - k - 1][k];
                s -= lik * lik * dv[k];
            }
            if s < 0.0 {
                negatives += 1;
            }
            if s.abs() < tiny {
                s = if s < 0.0 { -tiny } else { tiny };
            }
            dv[i] = s;
            for dj in 1..=hb {
                let j = i + dj;
                if j >= n {
                    break;
                }
                let mut t = self.diags[dj][i];
                for k in j.saturating_sub(hb)..i {
                    t -= l[j - k - 1][k] * l[i - k - 1][k] * dv[k];
                }
                l[dj - 1][i] = t / dv[i];
            }
        }
        (Ldlt { n, hb, l, d: dv }, negatives)
    }

    /// Number of eigenvalues strictly below `x` (Sylvester's law applied
    /// to the shifted factorization).
    pub fn eigenvalues_below(&self, x: f64) -> usize {
        let (lo, hi) = self.gershgorin();
        let tiny = f64::EPSILON * (hi - lo).max(1e-300);
        self.ldlt(x, tiny).1
    }

    /// Cholesky `A = L L^T`; fails on non-positive-definite input.
    pub fn cholesky(&self) -> Result<BandedChol, LinalgError> {
        let n = self.n;
        let hb = self.hb;
        let mut l: Vec<Vec<f64>> = (0..=hb).map(|d| vec![0.0; n - d]).collect();
        for i in 0..n {
            let k0 = i.saturating_sub(hb);
            let mut s = self.diags[0][i];
            for k in k0..i {
                let v = l[i - k][k];
                s -= v * v;
            }
            if s <= 0.0 {
                return Err(LinalgError::NotPositiveDefinite {
                    column: i,
                    pivot: s,
                });
            }
            let pivot = s.sqrt();
            l[0][i] = pivot;
            for dj in 1..=hb {
                let j = i + dj;
                if j >= n {
                    break;
                }
                let mut t = self.diags[dj][i];
                for k in j.saturating_sub(hb)..i {
                    t -= l[j - k][k] * l[i - k][k];
                }
                l[dj][i] = t / pivot;
            }
        }
        Ok(BandedChol { n, hb, l })
    }
}

/// Banded Cholesky factor.
#[derive(Debug, Clone)]
pub struct BandedChol {
    n: usize,
    hb: usize,
    l: Vec<Vec<f64>>,
}

impl BandedChol {
    /// Solves `A x = rhs` in place.
    pub fn solve_into(&self, rhs: &mut [f64]) {
        assert_eq!(rhs.len(), self.n);
        // L y = rhs
        for i in 0..self.n {
            let mut s = rhs[i];
            for k in i.saturating_sub(self.hb)..i {
                s -= self.l[i - k][k] * rhs[k];
            }
            rhs[i] = s / self.l[0][i];
        }
        // L^T x = y
        for i in (0..self.n).rev() {
            let mut s = rhs[i];
            for d in 1..=self.hb {
                let j = i + d;
                if j < self.n {
                    s -= self.l[d][i] * rhs[j];
                }
            }
            rhs[i] = s / self.l[0][i];
        }
    }
}

struct Ldlt {
    n: usize,
    hb: usize,
    l: Vec<Vec<f64>>,
    d: Vec<f64>,
}

impl Ldlt {
    fn solve_into(&self, v: &mut [f64]) {
        for i in 0..self.n {
            let mut s = v[i];
            for k in i.saturating_sub(self.hb)..i {
                s -= self.l[i - k - 1][k] * v[k];
            }
            v[i] = s;
        }
        for i in 0..self.n {
            v[i] /= self.d[i];
        }
        for i in (0..self.n).rev() {
            let mut s = v[i];
            for dj in 1..=self.hb {
                let j = i + dj;
                if j < self.n {
                    s -= self.l[dj - 1][i] * v[j];
                }
            }
            v[i] = s;
        }
    }
}

/// The `count` smallest eigenvalues, ascending, each located by inertia
/// bisection to relative width ~1e-13.
pub fn lowest_eigenvalues(a: &BandedSym, count: usize) -> Result<Vec<f64>, LinalgError> {
    if count > a.n() {
        return Err(LinalgError::Dimension(format!(
            "requested {count} eigenvalues of a matrix of size {}",
            a.n()
        )));
    }
    let (glo, ghi) = a.gershgorin();
    let span = (ghi - glo).max(1e-300);
    let tiny = f64::EPSILON * span;
    let mut out = Vec::with_capacity(count);
    let mut floor = glo;
    for k in 0..count {
        // smallest x with at least k+1 eigenvalues below it
        let mut lo = floor;
        let mut hi = ghi;
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if a.ldlt(mid, tiny).1 >= k + 1 {
                hi = mid;
            } else {
                lo = mid;
            }
            if hi - lo <= 1e-13 * mid.abs().max(1e-3 * span / a.n() as f64) {
                break;
            }
        }
        let lambda = 0.5 * (lo + hi);
        out.push(lambda);
        floor = lo;
    }
    Ok(out)
}

fn xorshift(state: &mut u64) -> f64 {
    *state ^= *state << 13;
    *state ^= *state >> 7;
    *state ^= *state << 17;
    (*state >> 11) as f64 / (1u64 << 53) as f64
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn normalize(v: &mut [f64]) -> f64 {
    let norm = dot(v, v).sqrt();
    if norm > 0.0 {
        for x in v.iter_mut() {
            *x /= norm;
        }
    }
    norm
}

/// Eigenvector for an eigenvalue located by [`lowest_eigenvalues`], via
/// inverse iteration on a slightly shifted factorization. `cluster` holds
/// already-computed vectors of nearby eigenvalues to orthogonalize against,
/// which keeps close pairs from collapsing onto one direction.
pub fn eigenvector_for(
    a: &BandedSym,
    lambda: f64,
    cluster: &[Vec<f64>],
) -> Result<Vec<f64>, LinalgError> {
    let n = a.n();
    let (glo, ghi) = a.gershgorin();
    let span = (ghi - glo).max(1e-300);
    // detune the shift so the factorization stays comfortably nonsingular
    let shift = lambda + 1e-11 * (lambda.abs() + 1e-6 * span);
    let (factor, _) = a.ldlt(shift, f64::EPSILON * span);
    let mut seed = lambda.to_bits() | 1;
    let mut v: Vec<f64> = (0..n).map(|_| xorshift(&mut seed) - 0.5).collect();
    normalize(&mut v);
    for _ in 0..4 {
        factor.solve_into(&mut v);
        for q in cluster {
            let c = dot(&v, q);
            for (x, y) in v.iter_mut().zip(q) {
                *x -= c * y;
            }
        }
        if normalize(&mut v) == 0.0 {
            return Err(LinalgError::Nonconvergence(format!(
                "inverse iteration collapsed at lambda = {lambda}"
            )));
        }
    }
    // polish orthogonality once more after the last solve
    for q in cluster {
        let c = dot(&v, q);
        for (x, y) in v.iter_mut().zip(q) {
            *x -= c * y;
        }
    }
    normalize(&mut v);
    Ok(v)
}

/// Modified Gram-Schmidt, two passes, in place. Columns must be linearly
/// independent to full precision; the caller guarantees that by seeding.
pub fn mgs_orthonormalize(cols: &mut [Vec<f64>]) {
    for j in 0..cols.len() {
        for _ in 0..2 {
            for i in 0..j {
                let (head, tail) = cols.split_at_mut(j);
                let c = dot(&tail[0], &head[i]);
                for (x, y) in tail[0].iter_mut().zip(&head[i]) {
                    *x -= c * y;
                }
            }
        }
        normalize(&mut cols[j]);
    }
}

/// Eigen decomposition of a small dense symmetric matrix by cyclic Jacobi.
/// Returns eigenvalues ascending with matching orthonormal columns.
pub fn jacobi_eigh(mat: &[Vec<f64>]) -> (Vec<f64>, Vec<Vec<f64>>) {
    let n = mat.len();
    let mut a: Vec<Vec<f64>> = mat.to_vec();
    for row in &a {
        assert_eq!(row.len(), n, "square matrix required");
    }
    let mut v: Vec<Vec<f64>> = (0..n)
        .map(|i| (0..n).map(|j| if i == j { 1.0 } else { 0.0 }).collect())
        .collect();
    let fro: f64 = a
        .iter()
        .flat_map(|r| r.iter())
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt();
    let stop = (1e-15 * fro.max(1e-300)).powi(2);
    for _sweep in 0..60 {
        let mut off = 0.0;
        for p in 0..n {
            for q in (p + 1)..n {
                off += a[p][q] * a[p][q];
            }
        }
        if off <= stop {
            break;
        }
        for p in 0..n {
            for q in (p + 1)..n {
                let apq = a[p][q];
                if apq == 0.0 {
                    continue;
                }
                let tau = (a[q][q] - a[p][p]) / (2.0 * apq);
                let t = if tau >= 0.0 {
                    1.0 / (tau + (1.0 + tau * tau).sqrt())
                } else {
                    -1.0 / (-tau + (1.0 + tau * tau).sqrt())
                };
                let c = 1.0 / (1.0 + t * t).sqrt();
                let s = t * c;
                for k in 0..n {
                    let akp = a[k][p];
                    let akq = a[k][q];
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[p][k];
                    let aqk = a[q][k];
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for k in 0..n {
                    let vkp = v[k][p];
                    let vkq = v[k][q];
                    v[k][p] = c * vkp - s * vkq;
                    v[k][q] = s * vkp + c * vkq;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| a[i][i].partial_cmp(&a[j][j]).unwrap().then(i.cmp(&j)));
    let vals = order.iter().map(|&i| a[i][i]).collect();
    let vecs = order
        .iter()
        .map(|&j| (0..n).map(|i| v[i][j]).collect())
        .collect();
    (vals, vecs)
}

/// Dense symmetric matrix in row-major storage, for kernel matrices.
#[derive(Debug, Clone)]
pub struct DenseSym {
    n: usize,
    data: Vec<f64>,
}

impl DenseSym {
    pub fn new(n: usize, data: Vec<f64>) -> Result<DenseSym, LinalgError> {
        if data.len() != n * n {
            return Err(LinalgError::Dimension(format!(
                "{} entries for an {n} x {n} matrix",
                data.len()
            )));
        }
        Ok(DenseSym { n, data })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[i * self.n + j]
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.n);
        y.fill(0.0);
        for i in 0..self.n {
            let row = &self.data[i * self.n..(i + 1) * self.n];
            y[i] = dot(row, x);
        }
    }
}

/// The `count` largest eigenpairs of a dense symmetric PSD matrix by
/// blocked subspace iteration with periodic Rayleigh-Ritz extraction.
/// Eigenvalues come back descending with orthonormal vectors.
pub fn subspace_largest(
    c: &DenseSym,
    count: usize,
) -> Result<(Vec<f64>, Vec<Vec<f64>>), LinalgError> {
    let n = c.n();
    if count == 0 || count > n {
        return Err(LinalgError::Dimension(format!(
            "requested {count} eigenpairs of a matrix of size {n}"
        )));
    }
    let block = (count + (count / 4).max(4)).min(n);
    // smooth deterministic start: sine columns plus a fixed pseudorandom
    // perturbation so no eigenvector is accidentally orthogonal to the block
    let mut seed = 0x243f_6a88_85a3_08d3u64;
    let mut q: Vec<Vec<f64>> = (0..block)
        .map(|m| {
            (0..n)
                .map(|i| {
                    let y = (i + 1) as f64 / (n + 1) as f64;
                    (std::f64::consts::PI * (m + 1) as f64 * y).sin()
                        + 1e-3 * (xorshift(&mut seed) - 0.5)
                })
                .collect()
        })
        .collect();
    mgs_orthonormalize(&mut q);
    let mut work = vec![0.0; n];
    let mut prev_ritz: Vec<f64> = Vec::new();
    let mut stable = 0u32;
    for iter in 0..400 {
        for col in q.iter_mut() {
            c.matvec(col, &mut work);
            col.copy_from_slice(&work);
        }
        mgs_orthonormalize(&mut q);
        if iter % 3 != 2 {
            continue;
        }
        // Rayleigh-Ritz on the current block
        let cq: Vec<Vec<f64>> = q
            .iter()
            .map(|col| {
                c.matvec(col, &mut work);
                work.clone()
            })
            .collect();
        let t: Vec<Vec<f64>> = (0..block)
            .map(|i| (0..block).map(|j| dot(&q[i], &cq[j])).collect())
            .collect();
        let (tvals, tvecs) = jacobi_eigh(&t);
        // rotate to Ritz vectors, largest first
        let mut rotated: Vec<Vec<f64>> = Vec::with_capacity(block);
        let mut ritz: Vec<f64> = Vec::with_capacity(block);
        for b in 0..block {
            let col = block - 1 - b;
            ritz.push(tvals[col]);
            let mut vec = vec![0.0; n];
            for (qi, qcol) in q.iter().enumerate() {
                let w = tvecs[col][qi];
                for (x, y) in vec.iter_mut().zip(qcol) {
                    *x += w * y;
                }
            }
            rotated.push(vec);
        }
        q = rotated;
        mgs_orthonormalize(&mut q);
        let converged = prev_ritz.len() == block
            && ritz
                .iter()
                .take(count)
                .zip(prev_ritz.iter())
                .all(|(a, b)| (a - b).abs() <= 1e-13 * a.abs().max(1e-300));
        prev_ritz = ritz.clone();
        if converged {
            stable += 1;
            if stable >= 2 {
                return Ok((
                    ritz.into_iter().take(count).collect(),
                    q.into_iter().take(count).collect(),
                ));
            }
        } else {
            stable = 0;
        }
    }
    Err(LinalgError::Nonconvergence(
        "subspace iteration exceeded 400 sweeps".into(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag_laplacian(n: usize) -> (BandedSym, f64) {
        let h = 1.0 / (n + 1) as f64;
        let mut a = BandedSym::zeros(n, 1);
        for i in 0..n {
            a.add(i, i, 2.0 / (h * h));
            if i + 1 < n {
                a.add(i, i + 1, -1.0 / (h * h));
            }
        }
        (a, h)
    }

    #[test]
    fn bisection_matches_toeplitz_eigenvalues() {
        let n = 50;
        let (a, h) = tridiag_laplacian(n);
        let got = lowest_eigenvalues(&a, 10).unwrap();
        for (k, &lam) in got.iter().enumerate() {
            let theta = std::f64::consts::PI * (k + 1) as f64 * h;
            let want = (2.0 - 2.0 * theta.cos()) / (h * h);
            assert!(((lam - want) / want).abs() < 1e-12, "k={k}: {lam} vs {want}");
        }
    }

    #[test]
    fn inertia_counts_bracket_eigenvalues() {
        let (a, h) = tridiag_laplacian(30);
        let eigs = lowest_eigenvalues(&a, 5).unwrap();
        let theta = std::f64::consts::PI * h;
        let first = (2.0 - 2.0 * theta.cos()) / (h * h);
        assert_eq!(a.eigenvalues_below(first * 0.999), 0);
        assert_eq!(a.eigenvalues_below(first * 1.001), 1);
        assert_eq!(a.eigenvalues_below(eigs[4] * 1.000001), 5);
    }

    #[test]
    fn inverse_iteration_gives_residual_and_orthonormal_vectors() {
        let n = 80;
        let (a, _) = tridiag_laplacian(n);
        let eigs = lowest_eigenvalues(&a, 5).unwrap();
        let (_, ghi) = a.gershgorin();
        let mut vectors: Vec<Vec<f64>> = Vec::new();
        for &lam in &eigs {
            let v = eigenvector_for(&a, lam, &[]).unwrap();
            let mut av = vec![0.0; n];
            a.matvec(&v, &mut av);
            let resid: f64 = av
                .iter()
                .zip(&v)
                .map(|(x, y)| (x - lam * y).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(resid <= 1e-10 * ghi, "residual {resid:.3e}");
            vectors.push(v);
        }
        for i in 0..vectors.len() {
            for j in 0..i {
                assert!(dot(&vectors[i], &vectors[j]).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn close_pairs_are_separated_by_cluster_orthogonalization() {
        // diagonal matrix with a near-degenerate pair
        let mut a = BandedSym::zeros(4, 1);
        for (i, &d) in [1.0, 1.0 + 1e-10, 4.0, 9.0].iter().enumerate() {
            a.add(i, i, d);
        }
        let eigs = lowest_eigenvalues(&a, 2).unwrap();
        assert!((eigs[0] - 1.0).abs() < 1e-8);
        assert!((eigs[1] - 1.0).abs() < 1e-8);
        let v0 = eigenvector_for(&a, eigs[0], &[]).unwrap();
        let v1 = eigenvector_for(&a, eigs[1], std::slice::from_ref(&v0)).unwrap();
        assert!(dot(&v0, &v1).abs() < 1e-8, "overlap {}", dot(&v0, &v1));
    }

    #[test]
    fn cholesky_solves_banded_spd_systems() {
        let n = 40;
        let mut a = BandedSym::zeros(n, 2);
        let mut seed = 42u64;
        for i in 0..n {
            a.add(i, i, 4.0 + xorshift(&mut seed));
            if i + 1 < n {
                a.add(i, i + 1, -1.0 + 0.2 * xorshift(&mut seed));
            }
            if i + 2 < n {
                a.add(i, i + 2, 0.3 * xorshift(&mut seed));
            }
        }
        let chol = a.cholesky().unwrap();
        let x_true: Vec<f64> = (0..n).map(|i| (i as f64 * 0.37).sin()).collect();
        let mut rhs = vec![0.0; n];
        a.matvec(&x_true, &mut rhs);
        chol.solve_into(&mut rhs);
        for (g, w) in rhs.iter().zip(&x_true) {
            assert!((g - w).abs() < 1e-11);
        }
    }

    #[test]
    fn cholesky_rejects_indefinite_matrices() {
        let mut a = BandedSym::zeros(3, 1);
        a.add(0, 0, 1.0);
        a.add(1, 1, -2.0);
        a.add(2, 2, 1.0);
        assert!(matches!(
            a.cholesky(),
            Err(LinalgError::NotPositiveDefinite { column: 1, .. })
        ));
    }

    #[test]
    fn jacobi_solves_small_symmetric_problems() {
        let m = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, vecs) = jacobi_eigh(&m);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
        // residual check on a bigger random symmetric matrix
        let n = 12;
        let mut seed = 7u64;
        let mut a = vec![vec![0.0; n]; n];
        for i in 0..n {
            for j in 0..=i {
                let v = xorshift(&mut seed) - 0.5;
                a[i][j] = v;
                a[j][i] = v;
            }
        }
        let (vals, vecs2) = jacobi_eigh(&a);
        assert!(vals.windows(2).all(|w| w[0] <= w[1]));
        for (k, lam) in vals.iter().enumerate() {
            for i in 0..n {
                let av: f64 = (0..n).map(|j| a[i][j] * vecs2[k][j]).sum();
                assert!((av - lam * vecs2[k][i]).abs() < 1e-12);
            }
        }
        let _ = vecs;
    }

    #[test]
    fn mgs_produces_orthonormal_columns() {
        let n = 30;
        let mut seed = 11u64;
        let mut cols: Vec<Vec<f64>> =
            (0..6).map(|_| (0..n).map(|_| xorshift(&mut seed) - 0.5).collect()).collect();
        mgs_orthonormalize(&mut cols);
        for i in 0..cols.len() {
            assert!((dot(&cols[i], &cols[i]) - 1.0).abs() < 1e-13);
            for j in 0..i {
                assert!(dot(&cols[i], &cols[j]).abs() < 1e-13);
            }
        }
    }

    #[test]
    fn subspace_iteration_matches_jacobi_on_dense_psd() {
        // PSD via G^T G with G random
        let n = 40;
        let mut seed = 5u64;
        let g: Vec<Vec<f64>> = (0..n)
            .map(|_| (0..n).map(|_| xorshift(&mut seed) - 0.5).collect())
            .collect();
        let mut data = vec![0.0; n * n];
        for i in 0..n {
            for j in 0..n {
                data[i * n + j] = (0..n).map(|k| g[k][i] * g[k][j]).sum();
            }
        }
        let c = DenseSym::new(n, data.clone()).unwrap();
        let (mu, vecs) = subspace_largest(&c, 5).unwrap();
        let dense: Vec<Vec<f64>> = (0..n)
            .map(|i| (0..n).map(|j| data[i * n + j]).collect())
            .collect();
        let (all_vals, _) = jacobi_eigh(&dense);
        for k in 0..5 {
            let want = all_vals[n - 1 - k];
            assert!(
                ((mu[k] - want) / want).abs() < 1e-10,
                "k={k}: {} vs {want}",
                mu[k]
            );
        }
        // residual of the top pair
        let mut cv = vec![0.0; n];
        c.matvec(&vecs[0], &mut cv);
        for i in 0..n {
            assert!((cv[i] - mu[0] * vecs[0][i]).abs() < 1e-9);
        }
    }
}
