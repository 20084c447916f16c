//! Minimal sparse/dense linear algebra for the Newton and eigen solvers.
//!
//! Everything here is deterministic: fixed summation order, no threading.

/// Compressed-sparse-row matrix with a fixed symmetric sparsity pattern.
#[derive(Debug, Clone)]
pub struct CsrMatrix {
    pub n: usize,
    pub row_ptr: Vec<usize>,
    pub col_idx: Vec<usize>,
    pub values: Vec<f64>,
}

impl CsrMatrix {
    /// Build the pattern from an adjacency list (self-edges added).
    pub fn from_adjacency(n: usize, neighbors: &[Vec<usize>]) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut col_idx = Vec::new();
        row_ptr.push(0);
        for (i, nbrs) in neighbors.iter().enumerate() {
            let mut cols: Vec<usize> = nbrs.clone();
            cols.push(i);
            cols.sort_unstable();
            cols.dedup();
            col_idx.extend_from_slice(&cols);
            row_ptr.push(col_idx.len());
        }
        let values = vec![0.0; col_idx.len()];
        CsrMatrix {
            n,
            row_ptr,
            col_idx,
            values,
        }
    }

    pub fn zero_values(&mut self) {
        self.values.iter_mut().for_each(|v| *v = 0.0);
    }

    /// Add `v` to entry (i, j); the pair must be in the pattern.
    pub fn add(&mut self, i: usize, j: usize, v: f64) {
        let lo = self.row_ptr[i];
        let hi = self.row_ptr[i + 1];
        match self.col_idx[lo..hi].binary_search(&j) {
            Ok(k) => self.values[lo + k] += v,
            Err(_) => panic!("entry ({i},{j}) outside sparsity pattern"),
        }
    }

    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                s += self.values[k] * x[self.col_idx[k]];
            }
            y[i] = s;
        }
    }

    pub fn diagonal(&self) -> Vec<f64> {
        let mut d = vec![0.0; self.n];
        for i in 0..self.n {
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                if self.col_idx[k] == i {
                    d[i] = self.values[k];
                }
            }
        }
        d
    }
}

/// Jacobi-preconditioned conjugate gradient for SPD systems.
///
/// Returns the solution and the iteration count; `None` if the residual
/// target was not reached within the iteration cap.
pub fn cg_solve(a: &CsrMatrix, b: &[f64], rtol: f64, max_iter: usize) -> Option<(Vec<f64>, usize)> {
    let n = a.n;
    if n == 0 {
        return Some((Vec::new(), 0));
    }
    let diag = a.diagonal();
    let precond = |r: &[f64], z: &mut [f64]| {
        for i in 0..n {
            z[i] = if diag[i].abs() > 0.0 {
                r[i] / diag[i]
            } else {
                r[i]
            };
        }
    };
    let b_norm = b.iter().map(|v| v * v).sum::<f64>().sqrt();
    if b_norm == 0.0 {
        return Some((vec![0.0; n], 0));
    }
    let target = rtol * b_norm;

    let mut x = vec![0.0; n];
    let mut r = b.to_vec();
    let mut z = vec![0.0; n];
    precond(&r, &mut z);
    let mut p = z.clone();
    let mut rz: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
    let mut ap = vec![0.0; n];

    for iter in 0..max_iter {
        let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
        if r_norm <= target {
            return Some((x, iter));
        }
        a.matvec(&p, &mut ap);
        let pap: f64 = p.iter().zip(&ap).map(|(a, b)| a * b).sum();
        if pap <= 0.0 {
            // loss of positive definiteness (roundoff near convergence)
            return if r_norm <= target * 10.0 {
                Some((x, iter))
            } else {
                None
            };
        }
        let alpha = rz / pap;
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        precond(&r, &mut z);
        let rz_new: f64 = r.iter().zip(&z).map(|(a, b)| a * b).sum();
        let beta = rz_new / rz;
        rz = rz_new;
        for i in 0..n {
            p[i] = z[i] + beta * p[i];
        }
    }
    let r_norm = r.iter().map(|v| v * v).sum::<f64>().sqrt();
    if r_norm <= target * 10.0 {
        Some((x, max_iter))
    } else {
        None
    }
}

/// Dense LU with partial pivoting; used by the coupled-system Newton search
/// and by test oracles. Solves in place, returns None on singular pivot.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for k in 0..n {
        let mut piv = k;
        let mut best = a[k][k].abs();
        for i in (k + 1)..n {
            if a[i][k].abs() > best {
                best = a[i][k].abs();
                piv = i;
            }
        }
        if best < 1e-300 {
            return None;
        }
        if piv != k {
            a.swap(k, piv);
            b.swap(k, piv);
        }
        let akk = a[k][k];
        for i in (k + 1)..n {
            let f = a[i][k] / akk;
            if f == 0.0 {
                continue;
            }
            for j in k..n {
                a[i][j] -= f * a[k][j];
            }
            b[i] -= f * b[k];
        }
    }
    let mut x = vec![0.0; n];
    for i in (0..n).rev() {
        let mut s = b[i];
        for j in (i + 1)..n {
            s -= a[i][j] * x[j];
        }
        x[i] = s / a[i][i];
    }
    Some(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn tridiag(n: usize, off: f64, diag: f64) -> CsrMatrix {
        let neighbors: Vec<Vec<usize>> = (0..n)
            .map(|i| {
                let mut v = Vec::new();
                if i > 0 {
                    v.push(i - 1);
                }
                if i + 1 < n {
                    v.push(i + 1);
                }
                v
            })
            .collect();
        let mut m = CsrMatrix::from_adjacency(n, &neighbors);
        for i in 0..n {
            m.add(i, i, diag);
            if i > 0 {
                m.add(i, i - 1, off);
            }
            if i + 1 < n {
                m.add(i, i + 1, off);
            }
        }
        m
    }

    #[test]
    fn cg_solves_poisson_tridiagonal() {
        let n = 64;
        let a = tridiag(n, -1.0, 2.0);
        let b = vec![1.0; n];
        let (x, _) = cg_solve(&a, &b, 1e-14, 10 * n).unwrap();
        let mut ax = vec![0.0; n];
        a.matvec(&x, &mut ax);
        for i in 0..n {
            assert!((ax[i] - 1.0).abs() < 1e-10);
        }
    }

    #[test]
    fn dense_solve_matches_known_inverse() {
        let a = vec![vec![4.0, 1.0], vec![1.0, 3.0]];
        let b = vec![1.0, 2.0];
        let x = dense_solve(a, b).unwrap();
        assert!((x[0] - 1.0 / 11.0).abs() < 1e-14);
        assert!((x[1] - 7.0 / 11.0).abs() < 1e-14);
    }

    #[test]
    fn dense_solve_detects_singular() {
        let a = vec![vec![1.0, 2.0], vec![2.0, 4.0]];
        assert!(dense_solve(a, vec![1.0, 1.0]).is_none());
    }
}
