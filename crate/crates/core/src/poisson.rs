//! Torsional rigidity and the Dirichlet ground eigenvalue on a uniform grid
//! with Shortley–Weller stencils at the boundary.

use std::io::Write;

use num_complex::Complex64 as C64;

use crate::error::{Error, Result};
use crate::geometry::Domain;

/// Relative residual at which the linear solver stops.
pub const SOLVER_TOL: f64 = 1e-10;
/// Arms shorter than this fraction of `h` make the node a boundary node.
const MIN_ARM: f64 = 1e-6;
/// Relative change of the eigenvalue estimate at which inverse iteration stops.
const EIGEN_TOL: f64 = 1e-8;

const NONE: usize = usize::MAX;

/// Discrete `-Δ` on the grid nodes inside a domain.
///
/// Node `(i, j)` sits at `origin + h (i + i j)`. Each unknown stores its
/// four arm lengths as fractions of `h`; an arm shorter than one ends on
/// the boundary, where `u = 0`.
#[derive(Debug, Clone)]
pub struct GridProblem {
    pub h: f64,
    pub origin: C64,
    pub nx: usize,
    pub ny: usize,
    /// Unknown number of each node, or `None` outside or on the boundary.
    index: Vec<usize>,
    /// Grid position of each unknown.
    nodes: Vec<(usize, usize)>,
    /// Arms east, north, west, south.
    arms: Vec<[f64; 4]>,
    /// Nodes inside the domain that are so close to the boundary that they
    /// are held at zero.
    pinned: Vec<bool>,
    diag: Vec<f64>,
    offdiag: Vec<[(usize, f64); 4]>,
}

const DIRS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];

impl GridProblem {
    /// Grid of spacing `h` centered on the bounding box of the domain.
    pub fn new(domain: &Domain, h: f64) -> Result<Self> {
        if !(h > 0.0) || !h.is_finite() {
            return Err(Error::Input(format!("grid spacing {h} must be positive")));
        }
        if h > domain.diameter() / 32.0 {
            return Err(Error::Input(format!(
                "grid spacing {h} exceeds diameter/32 = {}",
                domain.diameter() / 32.0
            )));
        }
        let (lo, hi) = domain.bounding_box();
        let center = 0.5 * (lo + hi);
        let half_x = ((hi.re - lo.re) / (2.0 * h)).ceil() as usize + 1;
        let half_y = ((hi.im - lo.im) / (2.0 * h)).ceil() as usize + 1;
        let (nx, ny) = (2 * half_x + 1, 2 * half_y + 1);
        let origin = center - C64::new(half_x as f64 * h, half_y as f64 * h);
        let x = |i: usize| origin.re + i as f64 * h;
        let y = |j: usize| origin.im + j as f64 * h;

        let rows: Vec<Vec<f64>> = (0..ny).map(|j| domain.row_crossings(y(j))).collect();
        let cols: Vec<Vec<f64>> = (0..nx).map(|i| domain.column_crossings(x(i))).collect();
        let parity_inside = |xs: &[f64], v: f64| xs.iter().filter(|&&c| c < v).count() % 2 == 1;
        let mut inside = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                inside[j * nx + i] = parity_inside(&rows[j], x(i));
            }
        }

        // Arm toward direction d: distance to the first crossing on the
        // grid line, capped at one cell.
        let arm = |i: usize, j: usize, d: usize| -> f64 {
            let (line, pos, sign) = match d {
                0 => (&rows[j], x(i), 1.0),
                1 => (&cols[i], y(j), 1.0),
                2 => (&rows[j], x(i), -1.0),
                _ => (&cols[i], y(j), -1.0),
            };
            let hit = line
                .iter()
                .map(|&c| sign * (c - pos))
                .filter(|&t| t > 0.0)
                .fold(f64::INFINITY, f64::min);
            (hit / h).min(1.0)
        };

        let mut index = vec![NONE; nx * ny];
        let mut nodes = Vec::new();
        let mut arms = Vec::new();
        let mut pinned = vec![false; nx * ny];
        for j in 1..ny - 1 {
            for i in 1..nx - 1 {
                let k = j * nx + i;
                if !inside[k] {
                    continue;
                }
                let mut a = [0.0; 4];
                for (d, slot) in a.iter_mut().enumerate() {
                    *slot = arm(i, j, d);
                }
                if a.iter().any(|&t| t < MIN_ARM) {
                    pinned[k] = true;
                    continue;
                }
                index[k] = nodes.len();
                nodes.push((i, j));
                arms.push(a);
            }
        }
        if nodes.is_empty() {
            return Err(Error::EmptyGrid(format!("no grid nodes inside at spacing {h}")));
        }

        let h2 = h * h;
        let mut diag = Vec::with_capacity(nodes.len());
        let mut offdiag = Vec::with_capacity(nodes.len());
        for (u, &(i, j)) in nodes.iter().enumerate() {
            let a = arms[u];
            let mut off = [(NONE, 0.0); 4];
            let mut dg = 0.0;
            for d in 0..4 {
                let opp = (d + 2) % 4;
                // Second difference along one axis with arms a[d], a[opp]:
                // 2/(h² a_d (a_d + a_opp)) toward d.
                let coef = 2.0 / (h2 * a[d] * (a[d] + a[opp]));
                dg += coef;
                if a[d] >= 1.0 {
                    let (di, dj) = DIRS[d];
                    let ni = (i as isize + di) as usize;
                    let nj = (j as isize + dj) as usize;
                    let nk = index[nj * nx + ni];
                    if nk != NONE {
                        off[d] = (nk, -coef);
                    }
                }
            }
            diag.push(dg);
            offdiag.push(off);
        }
        Ok(Self {
            h,
            origin,
            nx,
            ny,
            index,
            nodes,
            arms,
            pinned,
            diag,
            offdiag,
        })
    }

    pub fn unknowns(&self) -> usize {
        self.nodes.len()
    }

    pub fn node_position(&self, i: usize, j: usize) -> C64 {
        self.origin + C64::new(i as f64 * self.h, j as f64 * self.h)
    }

    fn apply(&self, x: &[f64], out: &mut [f64]) {
        for k in 0..x.len() {
            let mut s = self.diag[k] * x[k];
            for &(n, c) in &self.offdiag[k] {
                if n != NONE {
                    s += c * x[n];
                }
            }
            out[k] = s;
        }
    }

    /// Solves `A x = b` by BiCGSTAB with a Jacobi preconditioner, starting
    /// from `x`. Returns the iteration count.
    pub fn solve(&self, b: &[f64], x: &mut [f64]) -> Result<usize> {
        let n = b.len();
        let cap = (50.0 * (n as f64).sqrt()).ceil() as usize;
        let bnorm = norm(b);
        if bnorm == 0.0 {
            x.iter_mut().for_each(|v| *v = 0.0);
            return Ok(0);
        }
        let mut r = vec![0.0; n];
        self.apply(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        if norm(&r) <= SOLVER_TOL * bnorm {
            return Ok(0);
        }
        let r0 = r.clone();
        let (mut rho, mut alpha, mut omega) = (1.0, 1.0, 1.0);
        let mut v = vec![0.0; n];
        let mut p = vec![0.0; n];
        let mut phat = vec![0.0; n];
        let mut s = vec![0.0; n];
        let mut shat = vec![0.0; n];
        let mut t = vec![0.0; n];
        for it in 1..=cap {
            let rho_new = dot(&r0, &r);
            if rho_new == 0.0 || omega == 0.0 {
                break;
            }
            let beta = (rho_new / rho) * (alpha / omega);
            rho = rho_new;
            for k in 0..n {
                p[k] = r[k] + beta * (p[k] - omega * v[k]);
                phat[k] = p[k] / self.diag[k];
            }
            self.apply(&phat, &mut v);
            alpha = rho / dot(&r0, &v);
            for k in 0..n {
                s[k] = r[k] - alpha * v[k];
            }
            if norm(&s) <= SOLVER_TOL * bnorm {
                for k in 0..n {
                    x[k] += alpha * phat[k];
                }
                return Ok(it);
            }
            for k in 0..n {
                shat[k] = s[k] / self.diag[k];
            }
            self.apply(&shat, &mut t);
            omega = dot(&t, &s) / dot(&t, &t);
            for k in 0..n {
                x[k] += alpha * phat[k] + omega * shat[k];
                r[k] = s[k] - omega * t[k];
            }
            if norm(&r) <= SOLVER_TOL * bnorm {
                return Ok(it);
            }
        }
        // Report the true residual.
        self.apply(x, &mut r);
        for k in 0..n {
            r[k] = b[k] - r[k];
        }
        let residual = norm(&r) / bnorm;
        if residual <= SOLVER_TOL {
            return Ok(cap);
        }
        Err(Error::Solver {
            residual,
            iterations: cap,
        })
    }

    /// Value at node `(i, j)`: the unknown, or zero for boundary and pinned nodes.
    fn value(&self, u: &[f64], i: usize, j: usize) -> Option<f64> {
        let k = j * self.nx + i;
        if self.index[k] != NONE {
            Some(u[self.index[k]])
        } else if self.pinned[k] {
            Some(0.0)
        } else {
            None
        }
    }

    /// Arm of an inside node toward direction `d`, as a fraction of `h`.
    fn arm_of(&self, i: usize, j: usize, d: usize) -> f64 {
        let k = j * self.nx + i;
        if self.index[k] != NONE {
            self.arms[self.index[k]][d]
        } else {
            // Pinned nodes lie on the boundary already.
            0.0
        }
    }

    /// `∫ u dA` and `∫ |∇u|² dA` of the piecewise interpolant: bilinear on
    /// cells with four inside corners, and linear on a fan of triangles over
    /// the inside part of every cut cell, whose boundary crossings carry `u = 0`.
    pub fn integrals(&self, u: &[f64]) -> (f64, f64) {
        let h = self.h;
        let mut integral = 0.0;
        let mut energy = 0.0;
        // Corners counterclockwise, with the direction of the edge leaving each.
        let corners = [(0usize, 0usize), (1, 0), (1, 1), (0, 1)];
        let edge_dir = [0usize, 1, 2, 3];
        for j in 0..self.ny - 1 {
            for i in 0..self.nx - 1 {
                let vals: Vec<Option<f64>> = corners
                    .iter()
                    .map(|&(di, dj)| self.value(u, i + di, j + dj))
                    .collect();
                let count = vals.iter().filter(|v| v.is_some()).count();
                if count == 0 {
                    continue;
                }
                if count == 4 {
                    let (a, b, c, d) = (
                        vals[0].unwrap(),
                        vals[1].unwrap(),
                        vals[2].unwrap(),
                        vals[3].unwrap(),
                    );
                    integral += h * h * 0.25 * (a + b + c + d);
                    let ux = (b - a).powi(2) + (b - a) * (c - d) + (c - d).powi(2);
                    let uy = (d - a).powi(2) + (d - a) * (c - b) + (c - b).powi(2);
                    energy += (ux + uy) / 3.0;
                    continue;
                }
                let mut poly: Vec<(C64, f64)> = Vec::with_capacity(8);
                for k in 0..4 {
                    let (ci, cj) = (i + corners[k].0, j + corners[k].1);
                    let next = (k + 1) % 4;
                    let (ni, nj) = (i + corners[next].0, j + corners[next].1);
                    let p = self.node_position(ci, cj);
                    let q = self.node_position(ni, nj);
                    match (vals[k], vals[next]) {
                        (Some(v), Some(_)) => poly.push((p, v)),
                        (Some(v), None) => {
                            poly.push((p, v));
                            let t = self.arm_of(ci, cj, edge_dir[k]);
                            poly.push((p + (q - p) * t, 0.0));
                        }
                        (None, Some(_)) => {
                            let t = self.arm_of(ni, nj, (edge_dir[k] + 2) % 4);
                            poly.push((q + (p - q) * t, 0.0));
                        }
                        (None, None) => {}
                    }
                }
                for m in 1..poly.len().saturating_sub(1) {
                    let (p0, v0) = poly[0];
                    let (p1, v1) = poly[m];
                    let (p2, v2) = poly[m + 1];
                    let e1 = p1 - p0;
                    let e2 = p2 - p0;
                    let area2 = e1.re * e2.im - e1.im * e2.re;
                    if area2.abs() <= 1e-300 {
                        continue;
                    }
                    integral += 0.5 * area2.abs() * (v0 + v1 + v2) / 3.0;
                    // Gradient of the linear interpolant.
                    let gx = ((v1 - v0) * e2.im - (v2 - v0) * e1.im) / area2;
                    let gy = ((v2 - v0) * e1.re - (v1 - v0) * e2.re) / area2;
                    energy += 0.5 * area2.abs() * (gx * gx + gy * gy);
                }
            }
        }
        (integral, energy)
    }

    /// Field dump with columns `i,j,x,y,u`.
    pub fn write_field_csv<W: Write>(&self, u: &[f64], mut out: W) -> std::io::Result<()> {
        writeln!(out, "i,j,x,y,u")?;
        for (k, &(i, j)) in self.nodes.iter().enumerate() {
            let p = self.node_position(i, j);
            writeln!(out, "{i},{j},{:e},{:e},{:e}", p.re, p.im, u[k])?;
        }
        Ok(())
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Stress function solve `-Δu = 2`, `u = 0` on the boundary, at one spacing.
#[derive(Debug, Clone)]
pub struct StressSolution {
    pub grid: GridProblem,
    pub u: Vec<f64>,
    pub u_integral: f64,
    pub gradient_energy: f64,
    pub iterations: usize,
}

impl StressSolution {
    pub fn solve(domain: &Domain, h: f64) -> Result<Self> {
        let grid = GridProblem::new(domain, h)?;
        let b = vec![2.0; grid.unknowns()];
        let mut u = vec![0.0; grid.unknowns()];
        let iterations = grid.solve(&b, &mut u)?;
        let (u_integral, gradient_energy) = grid.integrals(&u);
        Ok(Self {
            grid,
            u,
            u_integral,
            gradient_energy,
            iterations,
        })
    }

    /// `2 ∫ u dA`.
    pub fn rho(&self) -> f64 {
        2.0 * self.u_integral
    }

    /// `4 (∫ u)² / ‖∇u‖²`, the variational form.
    pub fn rayleigh_rho(&self) -> f64 {
        4.0 * self.u_integral.powi(2) / self.gradient_energy
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RigidityResult {
    /// Richardson extrapolation `ρ_{h/2} + (ρ_{h/2} - ρ_h) / 3`.
    pub rho: f64,
    /// `|ρ_{h/2} - ρ_h| / 3`.
    pub error_estimate: f64,
    pub rho_coarse: f64,
    pub rho_fine: f64,
    /// `∫ u dA` on the fine grid.
    pub u_integral: f64,
    /// `‖∇u‖²` on the fine grid.
    pub gradient_energy: f64,
    /// `4 (∫ u)² / ‖∇u‖²` on the fine grid.
    pub rayleigh_rho: f64,
    /// Coarse spacing; the fine grid uses `h / 2`.
    pub h: f64,
    pub unknowns: usize,
    pub iterations: usize,
    /// Smallest nodal value of the fine-grid stress function.
    pub min_u: f64,
}

/// Torsional rigidity `ρ = 2 ∫ u dA` from solves at `h` and `h / 2`.
pub fn torsional_rigidity(domain: &Domain, h: f64) -> Result<RigidityResult> {
    let coarse = StressSolution::solve(domain, h)?;
    let fine = StressSolution::solve(domain, 0.5 * h)?;
    let (rc, rf) = (coarse.rho(), fine.rho());
    Ok(RigidityResult {
        rho: rf + (rf - rc) / 3.0,
        error_estimate: (rf - rc).abs() / 3.0,
        rho_coarse: rc,
        rho_fine: rf,
        u_integral: fine.u_integral,
        gradient_energy: fine.gradient_energy,
        rayleigh_rho: fine.rayleigh_rho(),
        h,
        unknowns: fine.grid.unknowns(),
        iterations: coarse.iterations + fine.iterations,
        min_u: fine.u.iter().cloned().fold(f64::INFINITY, f64::min),
    })
}

/// Smallest eigenvalue of the discrete operator by inverse iteration.
pub fn discrete_ground_eigenvalue(grid: &GridProblem) -> Result<f64> {
    let n = grid.unknowns();
    let mut x = vec![1.0 / (n as f64).sqrt(); n];
    let mut y = vec![0.0; n];
    let mut lambda = f64::NAN;
    for _ in 0..500 {
        grid.solve(&x, &mut y)?;
        // x ≈ Λ y for the dominant mode of A⁻¹.
        let next = dot(&x, &y) / dot(&y, &y);
        let ny = norm(&y);
        for k in 0..n {
            x[k] = y[k] / ny;
            y[k] = x[k] / next;
        }
        if (next - lambda).abs() <= EIGEN_TOL * next.abs() {
            return Ok(next);
        }
        lambda = next;
    }
    Err(Error::Solver {
        residual: f64::NAN,
        iterations: 500,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenvalueResult {
    /// Richardson extrapolation from `h` and `h / 2`.
    pub value: f64,
    pub error_estimate: f64,
    pub coarse: f64,
    pub fine: f64,
    pub h: f64,
}

/// Smallest Dirichlet eigenvalue of `-Δ`, extrapolated from `h` and `h / 2`.
pub fn dirichlet_ground_eigenvalue(domain: &Domain, h: f64) -> Result<EigenvalueResult> {
    let coarse = discrete_ground_eigenvalue(&GridProblem::new(domain, h)?)?;
    let fine = discrete_ground_eigenvalue(&GridProblem::new(domain, 0.5 * h)?)?;
    Ok(EigenvalueResult {
        value: fine + (fine - coarse) / 3.0,
        error_estimate: (fine - coarse).abs() / 3.0,
        coarse,
        fine,
        h,
    })
}

/// `J₀(x) = Σ (-1)^k (x/2)^{2k} / (k!)²`, summed from the smallest term up
/// with Kahan compensation.
pub fn bessel_j0(x: f64) -> f64 {
    let q = 0.25 * x * x;
    let mut terms = vec![1.0];
    let mut t = 1.0f64;
    let mut k = 1.0;
    loop {
        t *= -q / (k * k);
        terms.push(t);
        if t.abs() < 1e-18 * (1.0 + q) || k > 500.0 {
            break;
        }
        k += 1.0;
    }
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for &term in terms.iter().rev() {
        let y = term - comp;
        let s = sum + y;
        comp = (s - sum) - y;
        sum = s;
    }
    sum
}

/// First positive zero of `J₀`, by bisection on `[2, 3]`.
pub fn bessel_j0_first_zero() -> f64 {
    let (mut lo, mut hi) = (2.0f64, 3.0f64);
    while hi - lo > 1e-15 {
        let mid = 0.5 * (lo + hi);
        if bessel_j0(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    0.5 * (lo + hi)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn j0_values() {
        assert_eq!(bessel_j0(0.0), 1.0);
        let z = bessel_j0_first_zero();
        assert!((z - 2.404825557695773).abs() < 1e-12, "{z}");
        assert!(bessel_j0(z).abs() < 1e-12);
        // J₀(1) from tables.
        assert!((bessel_j0(1.0) - 0.765_197_686_557_966_6).abs() < 1e-15);
    }

    #[test]
    fn stencil_rows_are_consistent() {
        let d = Domain::builtin("disk").unwrap();
        let g = GridProblem::new(&d, 1.0 / 16.0).unwrap();
        // Interior rows of the 5-point Laplacian: diag 4/h², off -1/h².
        let h2 = g.h * g.h;
        // The node at the center; nodes next to a pinned boundary node have no
        // matrix entry on that side.
        let regular = (0..g.unknowns())
            .min_by(|&a, &b| {
                let r = |k: usize| g.node_position(g.nodes[k].0, g.nodes[k].1).norm();
                r(a).total_cmp(&r(b))
            })
            .unwrap();
        assert!(g.arms[regular].iter().all(|&a| a == 1.0));
        assert!((g.diag[regular] * h2 - 4.0).abs() < 1e-12);
        assert!(g.offdiag[regular].iter().all(|&(n, c)| n != NONE && (c * h2 + 1.0).abs() < 1e-12));
        // Row sums are nonnegative (diagonal dominance).
        for k in 0..g.unknowns() {
            let s: f64 = g.diag[k] + g.offdiag[k].iter().filter(|(n, _)| *n != NONE).map(|(_, c)| c).sum::<f64>();
            assert!(s >= -1e-9 * g.diag[k]);
        }
    }

    #[test]
    fn rejects_coarse_spacing() {
        let d = Domain::builtin("disk").unwrap();
        assert!(matches!(GridProblem::new(&d, 0.1), Err(Error::Input(_))));
    }
}
