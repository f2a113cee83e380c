//! Sparse matrix kit: CSR storage, Ruiz equilibration, ILU(0), BiCGStab,
//! and the small dense-free utilities (projection, Gram–Schmidt, shifted
//! inverse iteration for near-null vectors) the solvers share.
//!
//! Everything is deterministic: parallel loops are indexed maps with
//! sequential reduction, and the inverse-iteration starting vectors come
//! from a fixed-seed generator.

use crate::error::{Error, Result};
use crate::exec;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Triplet accumulator; duplicate entries are summed when building CSR.
pub struct CooBuilder {
    n_rows: usize,
    n_cols: usize,
    entries: Vec<(usize, usize, f64)>,
}

impl CooBuilder {
    pub fn new(n_rows: usize, n_cols: usize) -> Self {
        Self {
            n_rows,
            n_cols,
            entries: Vec::new(),
        }
    }

    pub fn add(&mut self, row: usize, col: usize, value: f64) {
        debug_assert!(row < self.n_rows && col < self.n_cols);
        if value != 0.0 {
            self.entries.push((row, col, value));
        }
    }

    pub fn build(mut self) -> CsrMatrix {
        self.entries
            .sort_unstable_by(|a, b| (a.0, a.1).cmp(&(b.0, b.1)));
        let mut row_ptr = Vec::with_capacity(self.n_rows + 1);
        let mut col_idx = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        let mut current_row = 0usize;
        for (r, c, v) in self.entries {
            while current_row < r {
                row_ptr.push(col_idx.len());
                current_row += 1;
            }
            if let (Some(&last_c), Some(last_v)) = (col_idx.last(), values.last_mut()) {
                if row_ptr.len() - 1 == r && last_c == c && row_ptr[r] < col_idx.len() {
                    *last_v += v;
                    continue;
                }
            }
            col_idx.push(c);
            values.push(v);
        }
        while current_row < self.n_rows {
            row_ptr.push(col_idx.len());
            current_row += 1;
        }
        CsrMatrix {
            n_rows: self.n_rows,
            n_cols: self.n_cols,
            row_ptr,
            col_idx,
            values,
        }
    }
}

/// Compressed sparse row matrix with sorted column indices per row.
#[derive(Clone, Debug)]
pub struct CsrMatrix {
    pub n_rows: usize,
    pub n_cols: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let (lo, hi) = (self.row_ptr[i], self.row_ptr[i + 1]);
        (&self.col_idx[lo..hi], &self.values[lo..hi])
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        debug_assert_eq!(x.len(), self.n_cols);
        exec::map_collect(self.n_rows, |i| {
            let (cols, vals) = self.row(i);
            cols.iter()
                .zip(vals)
                .map(|(&c, &v)| v * x[c])
                .sum::<f64>()
        })
    }

    pub fn transpose(&self) -> CsrMatrix {
        let mut counts = vec![0usize; self.n_cols];
        for &c in &self.col_idx {
            counts[c] += 1;
        }
        let mut row_ptr = vec![0usize; self.n_cols + 1];
        for i in 0..self.n_cols {
            row_ptr[i + 1] = row_ptr[i] + counts[i];
        }
        let mut col_idx = vec![0usize; self.col_idx.len()];
        let mut values = vec![0.0; self.values.len()];
        let mut cursor = row_ptr.clone();
        for r in 0..self.n_rows {
            for k in self.row_ptr[r]..self.row_ptr[r + 1] {
                let c = self.col_idx[k];
                let dst = cursor[c];
                col_idx[dst] = r;
                values[dst] = self.values[k];
                cursor[c] += 1;
            }
        }
        CsrMatrix {
            n_rows: self.n_cols,
            n_cols: self.n_rows,
            row_ptr,
            col_idx,
            values,
        }
    }

    /// Value at `(i, j)` (zero if outside the pattern).
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(pos) => vals[pos],
            Err(_) => 0.0,
        }
    }

    /// Add `shift` to every diagonal entry, extending the pattern if a
    /// diagonal slot is missing.
    pub fn shifted_diagonal(&self, shift: f64) -> CsrMatrix {
        let n = self.n_rows.min(self.n_cols);
        let mut coo = CooBuilder::new(self.n_rows, self.n_cols);
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                coo.add(i, c, v);
            }
        }
        for i in 0..n {
            coo.add(i, i, shift);
        }
        coo.build()
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    /// Dense copy in row-major order; intended for the small kernel grids.
    pub fn to_dense(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.n_rows * self.n_cols];
        for i in 0..self.n_rows {
            let (cols, vals) = self.row(i);
            for (&c, &v) in cols.iter().zip(vals) {
                out[i * self.n_cols + c] = v;
            }
        }
        out
    }
}

/// A linear operator on ℝⁿ: CSR matrices implement it directly, and
/// [`FnOp`] wraps matrix-free actions such as finite-difference Jacobian
/// products.
pub trait LinOp {
    fn size(&self) -> usize;
    fn apply_op(&self, x: &[f64]) -> Vec<f64>;
}

impl LinOp for CsrMatrix {
    fn size(&self) -> usize {
        self.n_rows
    }

    fn apply_op(&self, x: &[f64]) -> Vec<f64> {
        self.matvec(x)
    }
}

/// Matrix-free linear operator defined by a closure.
pub struct FnOp<'a> {
    pub n: usize,
    pub f: &'a (dyn Fn(&[f64]) -> Vec<f64> + Sync),
}

impl LinOp for FnOp<'_> {
    fn size(&self) -> usize {
        self.n
    }

    fn apply_op(&self, x: &[f64]) -> Vec<f64> {
        (self.f)(x)
    }
}

pub fn dot(x: &[f64], y: &[f64]) -> f64 {
    debug_assert_eq!(x.len(), y.len());
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn norm2(x: &[f64]) -> f64 {
    dot(x, x).sqrt()
}

/// Symmetric Ruiz equilibration `A_eq = D_r A D_c`: iteratively scales rows
/// and columns toward unit max-magnitude. Returns the scaled matrix and
/// the two scale vectors.
pub fn ruiz_equilibrate(a: &CsrMatrix, iterations: usize) -> (CsrMatrix, Vec<f64>, Vec<f64>) {
    let mut m = a.clone();
    let mut row_scale = vec![1.0; a.n_rows];
    let mut col_scale = vec![1.0; a.n_cols];
    for _ in 0..iterations {
        let mut row_max = vec![0.0f64; m.n_rows];
        let mut col_max = vec![0.0f64; m.n_cols];
        for i in 0..m.n_rows {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                let v = m.values[k].abs();
                row_max[i] = row_max[i].max(v);
                col_max[m.col_idx[k]] = col_max[m.col_idx[k]].max(v);
            }
        }
        let dr: Vec<f64> = row_max
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
            .collect();
        let dc: Vec<f64> = col_max
            .iter()
            .map(|&v| if v > 0.0 { 1.0 / v.sqrt() } else { 1.0 })
            .collect();
        for i in 0..m.n_rows {
            for k in m.row_ptr[i]..m.row_ptr[i + 1] {
                m.values[k] *= dr[i] * dc[m.col_idx[k]];
            }
        }
        for i in 0..m.n_rows {
            row_scale[i] *= dr[i];
        }
        for j in 0..m.n_cols {
            col_scale[j] *= dc[j];
        }
    }
    (m, row_scale, col_scale)
}

/// Zero-fill incomplete LU factorization of a square CSR matrix.
pub struct Ilu0 {
    row_ptr: Vec<usize>,
    col_idx: Vec<usize>,
    values: Vec<f64>,
    diag_pos: Vec<usize>,
}

impl Ilu0 {
    pub fn factor(a: &CsrMatrix, pivot_floor: f64) -> Result<Ilu0> {
        if a.n_rows != a.n_cols {
            return Err(Error::Linear("ILU(0) needs a square matrix".into()));
        }
        let n = a.n_rows;
        let row_ptr = a.row_ptr.clone();
        let col_idx = a.col_idx.clone();
        let mut values = a.values.clone();
        let mut diag_pos = vec![usize::MAX; n];
        for i in 0..n {
            for k in row_ptr[i]..row_ptr[i + 1] {
                if col_idx[k] == i {
                    diag_pos[i] = k;
                }
            }
            if diag_pos[i] == usize::MAX {
                return Err(Error::Linear(format!("row {i} has no diagonal entry")));
            }
        }
        let scale = a.max_abs().max(f64::MIN_POSITIVE);
        for i in 0..n {
            let (lo, hi) = (row_ptr[i], row_ptr[i + 1]);
            for kk in lo..hi {
                let k = col_idx[kk];
                if k >= i {
                    break;
                }
                let ukk = values[diag_pos[k]];
                let factor = values[kk] / ukk;
                values[kk] = factor;
                // Subtract factor × (row k, columns > k) inside the pattern.
                let (krange_lo, krange_hi) = (row_ptr[k], row_ptr[k + 1]);
                let mut cursor = kk + 1;
                for kj in krange_lo..krange_hi {
                    let j = col_idx[kj];
                    if j <= k {
                        continue;
                    }
                    while cursor < hi && col_idx[cursor] < j {
                        cursor += 1;
                    }
                    if cursor == hi {
                        break;
                    }
                    if col_idx[cursor] == j {
                        values[cursor] -= factor * values[kj];
                    }
                }
            }
            let d = diag_pos[i];
            if values[d].abs() < pivot_floor * scale + f64::MIN_POSITIVE {
                values[d] = if values[d] >= 0.0 {
                    pivot_floor * scale + f64::MIN_POSITIVE
                } else {
                    -(pivot_floor * scale + f64::MIN_POSITIVE)
                };
            }
        }
        Ok(Ilu0 {
            row_ptr,
            col_idx,
            values,
            diag_pos,
        })
    }

    /// Solve `LU x = r` (forward then backward substitution).
    pub fn apply(&self, r: &[f64]) -> Vec<f64> {
        let n = self.diag_pos.len();
        let mut x = r.to_vec();
        for i in 0..n {
            let mut sum = x[i];
            for k in self.row_ptr[i]..self.diag_pos[i] {
                sum -= self.values[k] * x[self.col_idx[k]];
            }
            x[i] = sum;
        }
        for i in (0..n).rev() {
            let mut sum = x[i];
            for k in self.diag_pos[i] + 1..self.row_ptr[i + 1] {
                sum -= self.values[k] * x[self.col_idx[k]];
            }
            x[i] = sum / self.values[self.diag_pos[i]];
        }
        x
    }
}

/// Convergence record of an iterative solve.
#[derive(Clone, Debug)]
pub struct IterStats {
    pub iterations: usize,
    pub final_residual: f64,
    pub history: Vec<f64>,
}

/// Right-preconditioned BiCGStab; residuals are true relative residuals
/// `‖b − Ax‖/‖b‖`.
pub fn bicgstab<O: LinOp + ?Sized>(
    a: &O,
    precond: Option<&Ilu0>,
    b: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, IterStats)> {
    let n = b.len();
    let apply_m = |v: &[f64]| -> Vec<f64> {
        match precond {
            Some(m) => m.apply(v),
            None => v.to_vec(),
        }
    };
    let b_norm = norm2(b);
    if b_norm == 0.0 {
        return Ok((
            vec![0.0; n],
            IterStats {
                iterations: 0,
                final_residual: 0.0,
                history: vec![0.0],
            },
        ));
    }
    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let r_hat = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0f64, 1.0f64, 1.0f64);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut history = vec![1.0];
    for iter in 1..=max_iter {
        let rho_new = dot(&r_hat, &r);
        if rho_new.abs() < 1e-300 {
            return Err(Error::Linear(format!(
                "BiCGStab breakdown (rho) at iteration {iter}; history tail {:?}",
                tail(&history)
            )));
        }
        let beta = (rho_new / rho) * (alpha / omega);
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        let y = apply_m(&p);
        v = a.apply_op(&y);
        let denom = dot(&r_hat, &v);
        if denom.abs() < 1e-300 {
            return Err(Error::Linear(format!(
                "BiCGStab breakdown (r̂·v) at iteration {iter}; history tail {:?}",
                tail(&history)
            )));
        }
        alpha = rho_new / denom;
        let s: Vec<f64> = (0..n).map(|i| r[i] - alpha * v[i]).collect();
        let s_norm = norm2(&s) / b_norm;
        if s_norm < tol {
            for i in 0..n {
                x[i] += alpha * y[i];
            }
            history.push(s_norm);
            return Ok((
                x,
                IterStats {
                    iterations: iter,
                    final_residual: s_norm,
                    history,
                },
            ));
        }
        let z = apply_m(&s);
        let t = a.apply_op(&z);
        let tt = dot(&t, &t);
        if tt < 1e-300 {
            return Err(Error::Linear(format!(
                "BiCGStab breakdown (t·t) at iteration {iter}; history tail {:?}",
                tail(&history)
            )));
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * y[i] + omega * z[i];
            r[i] = s[i] - omega * t[i];
        }
        let res = norm2(&r) / b_norm;
        history.push(res);
        if res < tol {
            return Ok((
                x,
                IterStats {
                    iterations: iter,
                    final_residual: res,
                    history,
                },
            ));
        }
        rho = rho_new;
    }
    Err(Error::Linear(format!(
        "BiCGStab did not reach {tol:.1e} in {max_iter} iterations; history tail {:?}",
        tail(&history)
    )))
}

fn tail(history: &[f64]) -> Vec<f64> {
    history.iter().rev().take(5).rev().copied().collect()
}

/// Modified Gram–Schmidt; drops vectors that are numerically dependent.
pub fn orthonormalize(vectors: Vec<Vec<f64>>) -> Vec<Vec<f64>> {
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for mut v in vectors {
        for b in &basis {
            let c = dot(&v, b);
            for i in 0..v.len() {
                v[i] -= c * b[i];
            }
        }
        let n = norm2(&v);
        if n > 1e-12 {
            for vi in &mut v {
                *vi /= n;
            }
            basis.push(v);
        }
    }
    basis
}

/// Remove the span of an orthonormal basis from `x`; returns the removed
/// coefficients.
pub fn project_out(x: &mut [f64], basis: &[Vec<f64>]) -> Vec<f64> {
    let mut coeffs = Vec::with_capacity(basis.len());
    for b in basis {
        let c = dot(x, b);
        for i in 0..x.len() {
            x[i] -= c * b[i];
        }
        coeffs.push(c);
    }
    coeffs
}

/// Approximate left near-null vectors of `a` by shifted inverse iteration
/// on `Aᵀ`. Deterministic start vectors; the caller is expected to verify
/// residuals `‖Aᵀw‖`.
pub fn left_kernel(a: &CsrMatrix, count: usize, sweeps: usize) -> Result<Vec<Vec<f64>>> {
    if count == 0 {
        return Ok(Vec::new());
    }
    let at = a.transpose();
    let scale = at.max_abs().max(f64::MIN_POSITIVE);
    let shifted = at.shifted_diagonal(1e-8 * scale);
    let ilu = Ilu0::factor(&shifted, 1e-12)?;
    let n = a.n_rows;
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let mut basis: Vec<Vec<f64>> = Vec::new();
    for _ in 0..count {
        let mut w: Vec<f64> = (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect();
        for _ in 0..sweeps {
            let _ = project_out(&mut w, &basis);
            let nw = norm2(&w);
            if nw < 1e-300 {
                return Err(Error::Linear("inverse iteration collapsed".into()));
            }
            for wi in &mut w {
                *wi /= nw;
            }
            let (z, _) = bicgstab(&shifted, Some(&ilu), &w, 1e-12, 400)?;
            w = z;
        }
        let _ = project_out(&mut w, &basis);
        let nw = norm2(&w);
        if nw < 1e-300 {
            return Err(Error::Linear("inverse iteration collapsed".into()));
        }
        for wi in &mut w {
            *wi /= nw;
        }
        basis.push(w);
    }
    Ok(basis)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn laplace_1d(n: usize) -> CsrMatrix {
        let mut coo = CooBuilder::new(n, n);
        for i in 0..n {
            coo.add(i, i, 2.0);
            if i > 0 {
                coo.add(i, i - 1, -1.0);
            }
            if i + 1 < n {
                coo.add(i, i + 1, -1.0);
            }
        }
        coo.build()
    }

    #[test]
    fn coo_accumulates_and_csr_matvec() {
        let mut coo = CooBuilder::new(3, 3);
        coo.add(0, 0, 1.0);
        coo.add(0, 0, 2.0);
        coo.add(1, 2, 4.0);
        coo.add(2, 1, -1.0);
        let a = coo.build();
        assert_eq!(a.get(0, 0), 3.0);
        assert_eq!(a.get(1, 2), 4.0);
        assert_eq!(a.get(1, 1), 0.0);
        let y = a.matvec(&[1.0, 2.0, 3.0]);
        assert_eq!(y, vec![3.0, 12.0, -2.0]);
    }

    #[test]
    fn transpose_round_trip() {
        let a = laplace_1d(7);
        let att = a.transpose().transpose();
        assert_eq!(a.col_idx, att.col_idx);
        assert_eq!(a.values, att.values);
        // Non-symmetric case.
        let mut coo = CooBuilder::new(2, 3);
        coo.add(0, 2, 5.0);
        coo.add(1, 0, 7.0);
        let b = coo.build();
        let bt = b.transpose();
        assert_eq!(bt.get(2, 0), 5.0);
        assert_eq!(bt.get(0, 1), 7.0);
    }

    #[test]
    fn ilu_is_exact_for_tridiagonal() {
        // ILU(0) on a tridiagonal matrix has no fill, so it is a full LU.
        let a = laplace_1d(40);
        let ilu = Ilu0::factor(&a, 0.0).unwrap();
        let b: Vec<f64> = (0..40).map(|i| (i as f64 * 0.37).sin()).collect();
        let x = ilu.apply(&b);
        let r: Vec<f64> = a
            .matvec(&x)
            .iter()
            .zip(&b)
            .map(|(ax, bi)| ax - bi)
            .collect();
        assert!(norm2(&r) < 1e-12 * norm2(&b));
    }

    #[test]
    fn bicgstab_solves_to_tight_residual() {
        let a = laplace_1d(200);
        let b: Vec<f64> = (0..200).map(|i| ((i * i) as f64).cos()).collect();
        let ilu = Ilu0::factor(&a, 0.0).unwrap();
        let (x, stats) = bicgstab(&a, Some(&ilu), &b, 1e-12, 500).unwrap();
        let r: Vec<f64> = a.matvec(&x).iter().zip(&b).map(|(p, q)| p - q).collect();
        assert!(norm2(&r) / norm2(&b) < 1e-11);
        assert!(stats.final_residual < 1e-12);
        assert!(!stats.history.is_empty());
    }

    #[test]
    fn matrix_free_operator_matches_explicit_matrix() {
        let a = laplace_1d(64);
        let b: Vec<f64> = (0..64).map(|i| (i as f64).sin()).collect();
        let action = |x: &[f64]| a.matvec(x);
        let op = FnOp { n: 64, f: &action };
        let (x1, _) = bicgstab(&op, None, &b, 1e-11, 2000).unwrap();
        let (x2, _) = bicgstab(&a, None, &b, 1e-11, 2000).unwrap();
        let diff = x1
            .iter()
            .zip(&x2)
            .map(|(p, q)| (p - q).abs())
            .fold(0.0f64, f64::max);
        assert!(diff < 1e-8, "matrix-free and explicit solves differ {diff:.3e}");
    }

    #[test]
    fn equilibration_tames_badly_scaled_rows() {
        let mut coo = CooBuilder::new(2, 2);
        coo.add(0, 0, 1e8);
        coo.add(0, 1, 1e8);
        coo.add(1, 0, 1e-6);
        coo.add(1, 1, 2e-6);
        let (eq, dr, dc) = ruiz_equilibrate(&coo.build(), 6);
        let max = eq.max_abs();
        let min = eq.values.iter().fold(f64::INFINITY, |m, v| m.min(v.abs()));
        assert!(max / min < 10.0, "spread {max}/{min}");
        assert!(dr.iter().chain(dc.iter()).all(|&s| s > 0.0));
    }

    #[test]
    fn left_kernel_of_a_singular_matrix() {
        // Rows summing to zero: left kernel contains the constant vector.
        let n = 50;
        let mut coo = CooBuilder::new(n, n);
        for i in 0..n {
            coo.add(i, i, 2.0);
            coo.add(i, (i + 1) % n, -1.0);
            coo.add(i, (i + n - 1) % n, -1.0);
        }
        let a = coo.build(); // symmetric circulant, singular with kernel = constants
        let w = &left_kernel(&a, 1, 4).unwrap()[0];
        let res = norm2(&a.transpose().matvec(w));
        assert!(res < 1e-6, "left-kernel residual {res:.3e}");
        // The sole kernel vector is the constant one.
        let mean = w.iter().sum::<f64>() / n as f64;
        let dev = w.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt();
        assert!(dev < 1e-5, "deviation from constant {dev:.3e}");
    }

    #[test]
    fn projection_removes_components() {
        let basis = orthonormalize(vec![vec![1.0, 1.0, 0.0], vec![1.0, -1.0, 0.0]]);
        assert_eq!(basis.len(), 2);
        let mut x = vec![3.0, 4.0, 5.0];
        let coeffs = project_out(&mut x, &basis);
        assert!(x[0].abs() < 1e-14 && x[1].abs() < 1e-14 && (x[2] - 5.0).abs() < 1e-14);
        assert_eq!(coeffs.len(), 2);
        // Dependent vector gets dropped.
        let deps = orthonormalize(vec![vec![1.0, 0.0], vec![2.0, 0.0]]);
        assert_eq!(deps.len(), 1);
    }
}
