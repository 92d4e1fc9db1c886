//! Sparse linear solves for frozen-policy schemes: CSR storage, ILU(0), BiCGSTAB.

pub(crate) struct Csr {
    pub n: usize,
    pub ptr: Vec<usize>,
    pub col: Vec<usize>,
    pub val: Vec<f64>,
}

impl Csr {
    pub fn matvec(&self, x: &[f64], y: &mut [f64]) {
        for i in 0..self.n {
            let mut s = 0.0;
            for p in self.ptr[i]..self.ptr[i + 1] {
                s += self.val[p] * x[self.col[p]];
            }
            y[i] = s;
        }
    }
}

/// Incomplete LU with the sparsity pattern of the matrix (columns sorted per row).
pub(crate) struct Ilu0 {
    lu: Csr,
    diag: Vec<usize>,
}

impl Ilu0 {
    pub fn new(a: &Csr) -> Option<Self> {
        let mut lu = Csr { n: a.n, ptr: a.ptr.clone(), col: a.col.clone(), val: a.val.clone() };
        let mut diag = vec![usize::MAX; a.n];
        for i in 0..a.n {
            for p in a.ptr[i]..a.ptr[i + 1] {
                if a.col[p] == i {
                    diag[i] = p;
                }
            }
            if diag[i] == usize::MAX {
                return None;
            }
        }
        for i in 0..a.n {
            for p in lu.ptr[i]..lu.ptr[i + 1] {
                let k = lu.col[p];
                if k >= i {
                    break;
                }
                let pivot = lu.val[diag[k]];
                if pivot == 0.0 {
                    return None;
                }
                lu.val[p] /= pivot;
                let lik = lu.val[p];
                for q in p + 1..lu.ptr[i + 1] {
                    let j = lu.col[q];
                    // Entry (k, j) of the factor, if in the pattern.
                    let row_k = lu.ptr[k]..lu.ptr[k + 1];
                    if let Some(r) = row_k.clone().find(|&r| lu.col[r] == j) {
                        lu.val[q] -= lik * lu.val[r];
                    }
                }
            }
        }
        Some(Self { lu, diag })
    }

    pub fn apply(&self, r: &[f64], z: &mut [f64]) {
        let lu = &self.lu;
        for i in 0..lu.n {
            let mut s = r[i];
            for p in lu.ptr[i]..self.diag[i] {
                s -= lu.val[p] * z[lu.col[p]];
            }
            z[i] = s;
        }
        for i in (0..lu.n).rev() {
            let mut s = z[i];
            for p in self.diag[i] + 1..lu.ptr[i + 1] {
                s -= lu.val[p] * z[lu.col[p]];
            }
            z[i] = s / lu.val[self.diag[i]];
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn max_abs(a: &[f64]) -> f64 {
    a.iter().fold(0.0, |m, v| m.max(v.abs()))
}

/// Right-preconditioned BiCGSTAB; stops when `max |b - A x| <= tol`.
/// Returns whether the tolerance was met.
pub(crate) fn bicgstab(a: &Csr, m: &Ilu0, b: &[f64], x: &mut [f64], tol: f64, max_iter: usize) -> bool {
    let n = a.n;
    let mut r = vec![0.0; n];
    a.matvec(x, &mut r);
    for i in 0..n {
        r[i] = b[i] - r[i];
    }
    if max_abs(&r) <= tol {
        return true;
    }
    let r0 = r.clone();
    let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
    let mut v = vec![0.0; n];
    let mut p = vec![0.0; n];
    let mut phat = vec![0.0; n];
    let mut s = vec![0.0; n];
    let mut shat = vec![0.0; n];
    let mut t = vec![0.0; n];
    for _ in 0..max_iter {
        let rho_new = dot(&r0, &r);
        if rho_new == 0.0 || !rho_new.is_finite() {
            return false;
        }
        let beta = (rho_new / rho) * (alpha / omega);
        rho = rho_new;
        for i in 0..n {
            p[i] = r[i] + beta * (p[i] - omega * v[i]);
        }
        m.apply(&p, &mut phat);
        a.matvec(&phat, &mut v);
        let den = dot(&r0, &v);
        if den == 0.0 {
            return false;
        }
        alpha = rho / den;
        for i in 0..n {
            s[i] = r[i] - alpha * v[i];
        }
        if max_abs(&s) <= tol {
            for i in 0..n {
                x[i] += alpha * phat[i];
            }
            return true;
        }
        m.apply(&s, &mut shat);
        a.matvec(&shat, &mut t);
        let tt = dot(&t, &t);
        if tt == 0.0 {
            return false;
        }
        omega = dot(&t, &s) / tt;
        for i in 0..n {
            x[i] += alpha * phat[i] + omega * shat[i];
            r[i] = s[i] - omega * t[i];
        }
        if max_abs(&r) <= tol {
            // Guard against drift of the recursive residual.
            a.matvec(x, &mut t);
            let true_res = (0..n).map(|i| (b[i] - t[i]).abs()).fold(0.0, f64::max);
            if true_res <= tol {
                return true;
            }
            for i in 0..n {
                r[i] = b[i] - t[i];
            }
        }
        if omega == 0.0 {
            return false;
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn tridiagonal_solve() {
        let n = 50;
        let (mut ptr, mut col, mut val) = (vec![0], vec![], vec![]);
        for i in 0..n {
            if i > 0 {
                col.push(i - 1);
                val.push(-1.0);
            }
            col.push(i);
            val.push(2.5);
            if i + 1 < n {
                col.push(i + 1);
                val.push(-1.2);
            }
            ptr.push(col.len());
        }
        let a = Csr { n, ptr, col, val };
        let m = Ilu0::new(&a).unwrap();
        let b: Vec<f64> = (0..n).map(|i| (i as f64).sin()).collect();
        let mut x = vec![0.0; n];
        assert!(bicgstab(&a, &m, &b, &mut x, 1e-13, 100));
        let mut y = vec![0.0; n];
        a.matvec(&x, &mut y);
        for i in 0..n {
            assert!((y[i] - b[i]).abs() < 1e-12);
        }
    }
}
