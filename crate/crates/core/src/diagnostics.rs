//! Independent cross checks of the coefficient-space operator claims.
//!
//! The solver trusts two structural facts: the gradient Gram matrix of the
//! basis is the diagonal 2n + 4k + 1, and the mass matrix is tridiagonal in k
//! with closed-form entries. This module re-derives both by brute force --
//! finite-difference gradients and full quadrature Grams -- and reports the
//! deviations. The same report backs the `basis-check` command.
//!
//! Finite differences use Fornberg-generated central stencils wide enough to
//! be *exact* (up to rounding) on the polynomials being differentiated, so
//! the oracle carries no truncation error of its own.

use crate::ballbasis::{self, BasisIndex, BasisLayout};
use crate::error::Result;
use crate::harmonics::{self, HarmonicIndex, SphericalPoint};
use crate::jacobi::{self, JacobiParams};
use crate::par::map_indexed;
use crate::transform::BallGrid;

/// Finite-difference weights for the m-th derivative at `z` from samples at
/// `xs` (Fornberg's recurrence). Exact for polynomials of degree < xs.len().
pub fn fd_weights(z: f64, xs: &[f64], m: usize) -> Vec<f64> {
    let n = xs.len();
    assert!(m < n, "need more than m+1 sample points");
    // c[i][k]: weight of sample i for derivative order k
    let mut c = vec![vec![0.0; m + 1]; n];
    c[0][0] = 1.0;
    let mut c1 = 1.0;
    let mut c4 = xs[0] - z;
    for i in 1..n {
        let mn = i.min(m);
        let mut c2 = 1.0;
        let c5 = c4;
        c4 = xs[i] - z;
        for j in 0..i {
            let c3 = xs[i] - xs[j];
            c2 *= c3;
            if j == i - 1 {
                for k in (1..=mn).rev() {
                    c[i][k] = c1 * (k as f64 * c[i - 1][k - 1] - c5 * c[i - 1][k]) / c2;
                }
                c[i][0] = -c1 * c5 * c[i - 1][0] / c2;
            }
            for k in (1..=mn).rev() {
                c[j][k] = (c4 * c[j][k] - k as f64 * c[j][k - 1]) / c3;
            }
            c[j][0] = c4 * c[j][0] / c3;
        }
        c1 = c2;
    }
    c.into_iter().map(|row| row[m]).collect()
}

/// Central stencil of `points` nodes with spacing `h`, derivative order `m`.
/// `points` should be odd; exactness holds for degree < points.
pub fn central_stencil(points: usize, h: f64, m: usize) -> (Vec<f64>, Vec<f64>) {
    assert!(points % 2 == 1);
    let half = (points / 2) as isize;
    let xs: Vec<f64> = (-half..=half).map(|j| j as f64 * h).collect();
    let ws = fd_weights(0.0, &xs, m);
    (xs, ws)
}

/// m-th derivative of a scalar function of one variable by a central stencil.
pub fn fd_derivative_1d(f: &dyn Fn(f64) -> f64, x: f64, h: f64, points: usize, m: usize) -> f64 {
    let (xs, ws) = central_stencil(points, h, m);
    xs.iter().zip(&ws).map(|(&dx, &w)| w * f(x + dx)).sum()
}

/// Gradient of a trivariate function by per-axis central stencils.
pub fn fd_gradient(f: &dyn Fn([f64; 3]) -> f64, p: [f64; 3], h: f64, points: usize) -> [f64; 3] {
    let (xs, ws) = central_stencil(points, h, 1);
    let mut g = [0.0; 3];
    for d in 0..3 {
        let mut acc = 0.0;
        for (&dx, &w) in xs.iter().zip(&ws) {
            let mut q = p;
            q[d] += dx;
            acc += w * f(q);
        }
        g[d] = acc;
    }
    g
}

/// Value of a boundary-vanishing basis function as a polynomial on all of
/// R^3 (no ball membership check), so stencils may poke past the sphere.
pub fn eval_extended(idx: BasisIndex, p: [f64; 3]) -> f64 {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let r = r2.sqrt();
    let t = 2.0 * r2 - 1.0;
    let params = JacobiParams::new(0.0, idx.n() as f64 + 0.5).unwrap();
    let radial = jacobi::eval_unchecked(idx.k(), &params, t)
        - jacobi::eval_unchecked(idx.k() - 1, &params, t);
    let angular = if idx.n() == 0 {
        1.0 / (4.0 * std::f64::consts::PI).sqrt()
    } else if r == 0.0 {
        return 0.0;
    } else {
        let sp = SphericalPoint::from_direction(p[0], p[1], p[2]).unwrap();
        r.powi(idx.n() as i32) * harmonics::eval(HarmonicIndex::new(idx.n(), idx.l()).unwrap(), sp)
    };
    radial * angular
}

/// Deviations of the measured operators from their closed forms at one degree.
#[derive(Debug, Clone, Copy)]
pub struct BasisCheckReport {
    pub degree: usize,
    /// max |S_ij| off the diagonal, relative to the largest diagonal entry.
    pub stiffness_offdiag: f64,
    /// max relative deviation of S_ii from 2n + 4k + 1.
    pub stiffness_diag_dev: f64,
    /// largest measured diagonal (context for the off-diagonal figure).
    pub stiffness_diag_max: f64,
    /// max |M_ij(quadrature) - M_ij(closed form)|.
    pub mass_dev: f64,
    /// max |basis value| over random points of the unit sphere.
    pub boundary_max: f64,
}

pub const STIFFNESS_OFFDIAG_TOL: f64 = 1e-10;
pub const STIFFNESS_DIAG_TOL: f64 = 1e-10;
pub const MASS_TOL: f64 = 1e-12;
pub const BOUNDARY_TOL: f64 = 1e-12;

impl BasisCheckReport {
    /// Name of the first failing invariant, if any.
    pub fn failing(&self) -> Option<&'static str> {
        if self.stiffness_diag_dev > STIFFNESS_DIAG_TOL {
            Some("stiffness diagonal mismatch")
        } else if self.stiffness_offdiag > STIFFNESS_OFFDIAG_TOL {
            Some("stiffness off-diagonal leakage")
        } else if self.mass_dev > MASS_TOL {
            Some("mass matrix deviation")
        } else if self.boundary_max > BOUNDARY_TOL {
            Some("boundary values not vanishing")
        } else {
            None
        }
    }

    pub fn passes(&self) -> bool {
        self.failing().is_none()
    }
}

/// Runs the operator cross checks at the given degree against the closed-form
/// stiffness diagonal.
pub fn basis_check(degree: usize) -> Result<BasisCheckReport> {
    basis_check_with(degree, ballbasis::stiffness_lambda)
}

/// As [`basis_check`] with an injectable stiffness diagonal; the harness
/// self-test perturbs it to confirm the check actually fails.
pub fn basis_check_with(
    degree: usize,
    lambda: impl Fn(usize, usize) -> f64,
) -> Result<BasisCheckReport> {
    let layout = BasisLayout::new(degree)?;
    // gradient products have polynomial degree <= 2 degree - 2
    let grid = BallGrid::new(degree + 2, degree + 2, 2 * degree + 4)?;
    let stencil_points = (degree + 3) | 1;
    let h = 0.04;

    let ang = grid.angular();
    let mut points = Vec::with_capacity(grid.len());
    let mut weights = Vec::with_capacity(grid.len());
    for q in 0..grid.radial_count() {
        for i in 0..ang.theta_count() {
            let w = grid.weight(q, i);
            for k in 0..ang.phi_count() {
                points.push(grid.point(q, i, k));
                weights.push(w);
            }
        }
    }

    let indices = layout.indices().to_vec();
    let dim = indices.len();

    // per-index values and finite-difference gradients on the grid
    let values: Vec<Vec<f64>> = map_indexed(dim, |i| {
        points
            .iter()
            .map(|&p| eval_extended(indices[i], p))
            .collect()
    });
    let grads: Vec<Vec<[f64; 3]>> = map_indexed(dim, |i| {
        points
            .iter()
            .map(|&p| fd_gradient(&|q| eval_extended(indices[i], q), p, h, stencil_points))
            .collect()
    });

    // stiffness Gram
    let gram_rows: Vec<Vec<f64>> = map_indexed(dim, |i| {
        (i..dim)
            .map(|j| {
                let mut acc = 0.0;
                for q in 0..points.len() {
                    let a = grads[i][q];
                    let b = grads[j][q];
                    acc += weights[q] * (a[0] * b[0] + a[1] * b[1] + a[2] * b[2]);
                }
                acc
            })
            .collect()
    });

    let mut stiffness_offdiag: f64 = 0.0;
    let mut stiffness_diag_dev: f64 = 0.0;
    let mut stiffness_diag_max: f64 = 0.0;
    for i in 0..dim {
        for j in i..dim {
            let s = gram_rows[i][j - i];
            if i == j {
                let expect = lambda(indices[i].k(), indices[i].n());
                stiffness_diag_dev = stiffness_diag_dev.max((s - expect).abs() / expect.abs());
                stiffness_diag_max = stiffness_diag_max.max(s.abs());
            } else {
                stiffness_offdiag = stiffness_offdiag.max(s.abs());
            }
        }
    }
    if stiffness_diag_max > 0.0 {
        stiffness_offdiag /= stiffness_diag_max;
    }

    // mass Gram against the closed tridiagonal form
    let mass_rows: Vec<Vec<f64>> = map_indexed(dim, |i| {
        (i..dim)
            .map(|j| {
                let mut acc = 0.0;
                for q in 0..points.len() {
                    acc += weights[q] * values[i][q] * values[j][q];
                }
                acc
            })
            .collect()
    });
    let mut mass_dev: f64 = 0.0;
    for i in 0..dim {
        let a = indices[i];
        let op = ballbasis::mass_tridiagonal(a.n(), (degree - a.n()) / 2);
        for j in i..dim {
            let b = indices[j];
            let expect = if a.n() == b.n() && a.l() == b.l() {
                op.mass_entry(a.k(), b.k())
            } else {
                0.0
            };
            mass_dev = mass_dev.max((mass_rows[i][j - i] - expect).abs());
        }
    }

    // boundary values on deterministic pseudo-random sphere points
    let sphere = sphere_points(100, 0x5eed);
    let boundary_max = indices
        .iter()
        .map(|&idx| {
            sphere
                .iter()
                .map(|&p| ballbasis::eval_generalized(idx, p).unwrap().abs())
                .fold(0.0, f64::max)
        })
        .fold(0.0, f64::max);

    Ok(BasisCheckReport {
        degree,
        stiffness_offdiag,
        stiffness_diag_dev,
        stiffness_diag_max,
        mass_dev,
        boundary_max,
    })
}

/// Deterministic quasi-random points on the unit sphere (splitmix64 driven).
pub fn sphere_points(count: usize, seed: u64) -> Vec<[f64; 3]> {
    let mut state = seed;
    let mut next = move || {
        state = state.wrapping_add(0x9e3779b97f4a7c15);
        let mut z = state;
        z = (z ^ (z >> 30)).wrapping_mul(0xbf58476d1ce4e5b9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94d049bb133111eb);
        (z ^ (z >> 31)) as f64 / u64::MAX as f64
    };
    let mut out = Vec::with_capacity(count);
    while out.len() < count {
        let v = [2.0 * next() - 1.0, 2.0 * next() - 1.0, 2.0 * next() - 1.0];
        let r = (v[0] * v[0] + v[1] * v[1] + v[2] * v[2]).sqrt();
        if r > 0.1 && r <= 1.0 {
            out.push([v[0] / r, v[1] / r, v[2] / r]);
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    #[test]
    fn fornberg_reproduces_classic_stencils() {
        let ws = fd_weights(0.0, &[-1.0, 0.0, 1.0], 1);
        assert_abs_diff_eq!(ws[0], -0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(ws[1], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ws[2], 0.5, epsilon = 1e-15);
        let ws = fd_weights(0.0, &[-1.0, 0.0, 1.0], 2);
        assert_abs_diff_eq!(ws[0], 1.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ws[1], -2.0, epsilon = 1e-15);
        assert_abs_diff_eq!(ws[2], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn stencils_are_exact_on_monomials() {
        // a p-point stencil must differentiate x^d exactly for d < p
        for &(points, m) in &[(9usize, 1usize), (9, 2), (13, 3), (13, 4)] {
            let h = 0.05;
            for d in 0..points {
                let f = |x: f64| x.powi(d as i32);
                let x0 = 0.37;
                let got = fd_derivative_1d(&f, x0, h, points, m);
                let expect = if d < m {
                    0.0
                } else {
                    let mut c = 1.0;
                    for i in 0..m {
                        c *= (d - i) as f64;
                    }
                    c * x0.powi((d - m) as i32)
                };
                // residual is pure rounding at the 1/h^m weight scale
                assert_abs_diff_eq!(got, expect, epsilon = 2e-8);
            }
        }
    }

    #[test]
    fn gradient_of_polynomial_is_exact() {
        let f = |p: [f64; 3]| p[0].powi(3) * p[1] - 2.0 * p[2].powi(2) * p[0] + p[1] * p[2];
        let p = [0.3, -0.2, 0.5];
        let g = fd_gradient(&f, p, 0.05, 9);
        assert_abs_diff_eq!(
            g[0],
            3.0 * p[0] * p[0] * p[1] - 2.0 * p[2] * p[2],
            epsilon = 1e-12
        );
        assert_abs_diff_eq!(g[1], p[0].powi(3) + p[2], epsilon = 1e-12);
        assert_abs_diff_eq!(g[2], -4.0 * p[2] * p[0] + p[1], epsilon = 1e-12);
    }

    #[test]
    fn extended_eval_agrees_inside_ball() {
        let idx = BasisIndex::new(2, 1, 2).unwrap();
        for p in [[0.1, 0.2, 0.3], [0.0, -0.7, 0.1]] {
            assert_relative_eq!(
                eval_extended(idx, p),
                ballbasis::eval_generalized(idx, p).unwrap(),
                max_relative = 1e-15
            );
        }
    }

    #[test]
    fn small_degree_check_passes() {
        let report = basis_check(4).unwrap();
        assert!(report.passes(), "{report:?}");
    }

    #[test]
    fn perturbed_lambda_is_caught() {
        let report = basis_check_with(4, |k, n| ballbasis::stiffness_lambda(k, n) * 1.001).unwrap();
        assert_eq!(report.failing(), Some("stiffness diagonal mismatch"));
    }

    #[test]
    fn sphere_points_lie_on_sphere() {
        let pts = sphere_points(50, 1);
        assert_eq!(pts.len(), 50);
        for p in pts {
            let r = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            assert_relative_eq!(r, 1.0, max_relative = 1e-12);
        }
    }
}
