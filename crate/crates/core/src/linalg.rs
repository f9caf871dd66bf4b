//! Small dense Hermitian solves for Gram systems.

use num_complex::Complex64 as C64;

/// Dense square complex matrix, row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Matrix {
    n: usize,
    data: Vec<C64>,
}

impl Matrix {
    pub fn zeros(n: usize) -> Self {
        Self {
            n,
            data: vec![C64::new(0.0, 0.0); n * n],
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.data[i * self.n + j]
    }

    pub fn set(&mut self, i: usize, j: usize, v: C64) {
        self.data[i * self.n + j] = v;
    }

    pub fn mul_vec(&self, x: &[C64]) -> Vec<C64> {
        (0..self.n)
            .map(|i| (0..self.n).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    /// `xᴴ A x`.
    pub fn quadratic_form(&self, x: &[C64]) -> C64 {
        let ax = self.mul_vec(x);
        x.iter().zip(&ax).map(|(a, b)| a.conj() * b).sum()
    }

    pub fn trace(&self) -> C64 {
        (0..self.n).map(|i| self.get(i, i)).sum()
    }
}

/// `P A Pᵀ = L Lᴴ` with diagonal pivoting.
#[derive(Debug, Clone)]
pub struct PivotedCholesky {
    n: usize,
    l: Vec<C64>,
    perm: Vec<usize>,
}

/// Factorization stopped because the remaining Schur complement was not
/// numerically positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RankDeficient {
    pub rank: usize,
    pub pivot: f64,
}

impl PivotedCholesky {
    /// Factors a Hermitian matrix. Pivots at or below `threshold` times the
    /// largest diagonal entry are treated as a rank deficiency.
    pub fn factor(a: &Matrix, threshold: f64) -> Result<Self, RankDeficient> {
        let n = a.dim();
        let mut work = a.data.clone();
        let mut perm: Vec<usize> = (0..n).collect();
        let mut l = vec![C64::new(0.0, 0.0); n * n];
        let max_diag = (0..n).map(|i| a.get(i, i).re).fold(0.0, f64::max);
        if !(max_diag > 0.0) {
            return Err(RankDeficient { rank: 0, pivot: max_diag });
        }
        for k in 0..n {
            // Choose the largest remaining diagonal.
            let (p, piv) = (k..n)
                .map(|i| (i, work[perm[i] * n + perm[i]].re))
                .fold((k, f64::NEG_INFINITY), |acc, x| if x.1 > acc.1 { x } else { acc });
            if !(piv > threshold * max_diag) {
                return Err(RankDeficient { rank: k, pivot: piv / max_diag });
            }
            perm.swap(k, p);
            l.swap_rows(k, p, n);
            let d = piv.sqrt();
            l[k * n + k] = C64::new(d, 0.0);
            let pk = perm[k];
            for i in k + 1..n {
                let pi = perm[i];
                let v = work[pi * n + pk] / d;
                l[i * n + k] = v;
            }
            for i in k + 1..n {
                let pi = perm[i];
                let lik = l[i * n + k];
                for j in k + 1..=i {
                    let pj = perm[j];
                    let upd = lik * l[j * n + k].conj();
                    work[pi * n + pj] -= upd;
                    if i != j {
                        work[pj * n + pi] = work[pi * n + pj].conj();
                    }
                }
            }
        }
        Ok(Self { n, l, perm })
    }

    pub fn solve(&self, b: &[C64]) -> Vec<C64> {
        let n = self.n;
        let mut y: Vec<C64> = self.perm.iter().map(|&p| b[p]).collect();
        for i in 0..n {
            let mut s = y[i];
            for j in 0..i {
                s -= self.l[i * n + j] * y[j];
            }
            y[i] = s / self.l[i * n + i];
        }
        for i in (0..n).rev() {
            let mut s = y[i];
            for j in i + 1..n {
                s -= self.l[j * n + i].conj() * y[j];
            }
            y[i] = s / self.l[i * n + i];
        }
        let mut x = vec![C64::new(0.0, 0.0); n];
        for (k, &p) in self.perm.iter().enumerate() {
            x[p] = y[k];
        }
        x
    }

    /// Squared ratio of the extreme diagonal entries of the factor.
    pub fn condition_estimate(&self) -> f64 {
        let d: Vec<f64> = (0..self.n).map(|i| self.l[i * self.n + i].re).collect();
        let max = d.iter().cloned().fold(0.0, f64::max);
        let min = d.iter().cloned().fold(f64::INFINITY, f64::min);
        (max / min).powi(2)
    }
}

trait SwapRows {
    fn swap_rows(&mut self, a: usize, b: usize, n: usize);
}

impl SwapRows for Vec<C64> {
    fn swap_rows(&mut self, a: usize, b: usize, n: usize) {
        if a == b {
            return;
        }
        for j in 0..n {
            self.swap(a * n + j, b * n + j);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hilbert_like(n: usize) -> Matrix {
        let mut m = Matrix::zeros(n);
        for i in 0..n {
            for j in 0..n {
                let v = 1.0 / (i + j + 1) as f64;
                let phase = C64::from_polar(1.0, 0.3 * (i as f64 - j as f64));
                m.set(i, j, phase * v);
            }
        }
        m
    }

    #[test]
    fn solves_hermitian_system() {
        let a = hilbert_like(6);
        let x: Vec<C64> = (0..6).map(|k| C64::new(k as f64 - 2.0, 0.5 * k as f64)).collect();
        let b = a.mul_vec(&x);
        let f = PivotedCholesky::factor(&a, 1e-15).unwrap();
        let got = f.solve(&b);
        for (g, e) in got.iter().zip(&x) {
            assert!((g - e).norm() < 1e-6, "{g} vs {e}");
        }
        assert!(f.condition_estimate() > 1e5);
    }

    #[test]
    fn detects_rank_deficiency() {
        let mut a = Matrix::zeros(3);
        let v = [C64::new(1.0, 0.0), C64::new(0.0, 2.0), C64::new(-1.0, 1.0)];
        for i in 0..3 {
            for j in 0..3 {
                a.set(i, j, v[i] * v[j].conj());
            }
        }
        let err = PivotedCholesky::factor(&a, 1e-14).unwrap_err();
        assert_eq!(err.rank, 1);
    }
}
