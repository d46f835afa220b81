//! Quadrature grids on the unit ball, forward analysis onto the basis, and
//! point evaluation of coefficient fields.
//!
//! All radial quadrature lives in the variable t = 2r^2 - 1 (the argument of
//! the radial Jacobi factor), where
//!   int_0^1 F(r) r^2 dr = 1/4 int_{-1}^{1} F(r(t)) ((1+t)/2)^{1/2} dt,
//! so the (0, 1/2) Gauss-Jacobi rule integrates radial polynomials in r^2 of
//! degree <= 2 M_r - 1 exactly. Tensorized with the sphere grid, ball
//! polynomials of total degree <= min(4 M_r - 2, 2 L_theta - 1, L_phi - 1)
//! integrate exactly.
//!
//! The forward transform is separable: spherical-harmonic analysis on each
//! radial shell, then a radial contraction per (n, l) mode.

use crate::ballbasis::{BasisIndex, BasisLayout};
use crate::error::{Error, Result};
use crate::harmonics::{self, AngularGrid, HarmonicCoefficients, SphericalPoint};
use crate::jacobi::{self, JacobiParams, QuadratureRule1D};
use crate::par::map_indexed;
use serde::{Deserialize, Serialize};

/// Quadrature orders for a ball grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    /// Radial Gauss-Jacobi points M_r.
    pub radial: usize,
    /// Gauss-Legendre points in cos(theta).
    pub theta: usize,
    /// Uniform azimuthal points.
    pub phi: usize,
}

impl GridSpec {
    /// Default orders for solving at degree N: the padding keeps quadrature
    /// error of analytic (non-polynomial) data below the spectral truncation
    /// error at every degree in the convergence tables.
    pub fn for_degree(degree: usize) -> Self {
        Self {
            radial: degree + 8,
            theta: degree + 8,
            phi: 2 * degree + 16,
        }
    }

    /// Independently finer grid for error norms (radial and polar orders
    /// doubled) so measured errors are not flattered by shared nodes.
    pub fn refined(&self) -> Self {
        Self {
            radial: 2 * self.radial,
            theta: 2 * self.theta,
            phi: self.phi,
        }
    }

    pub fn build(&self) -> Result<BallGrid> {
        BallGrid::new(self.radial, self.theta, self.phi)
    }
}

/// Tensor-product quadrature grid over the unit ball.
#[derive(Debug, Clone)]
pub struct BallGrid {
    /// Radial nodes in t = 2r^2 - 1.
    radial_t: Vec<f64>,
    /// Radial nodes in r.
    radial_r: Vec<f64>,
    /// Radial weights including the r^2 dr measure: sum = 1/3.
    radial_weights: Vec<f64>,
    angular: AngularGrid,
}

impl BallGrid {
    pub fn new(m_r: usize, l_theta: usize, l_phi: usize) -> Result<Self> {
        assert!(m_r >= 1 && l_theta >= 1 && l_phi >= 1);
        let rule = QuadratureRule1D::gauss(m_r, JacobiParams::new(0.0, 0.5)?)?;
        let radial_t = rule.nodes().to_vec();
        let radial_r: Vec<f64> = radial_t.iter().map(|&t| ((1.0 + t) / 2.0).sqrt()).collect();
        let scale = 1.0 / (4.0 * 2.0_f64.sqrt());
        let radial_weights = rule.weights().iter().map(|&w| w * scale).collect();
        Ok(Self {
            radial_t,
            radial_r,
            radial_weights,
            angular: AngularGrid::new(l_theta, l_phi)?,
        })
    }

    pub fn spec(&self) -> GridSpec {
        GridSpec {
            radial: self.radial_t.len(),
            theta: self.angular.theta_count(),
            phi: self.angular.phi_count(),
        }
    }

    pub fn radial_count(&self) -> usize {
        self.radial_t.len()
    }

    pub fn radial_t(&self) -> &[f64] {
        &self.radial_t
    }

    pub fn radial_r(&self) -> &[f64] {
        &self.radial_r
    }

    pub fn radial_weights(&self) -> &[f64] {
        &self.radial_weights
    }

    pub fn angular(&self) -> &AngularGrid {
        &self.angular
    }

    /// Total number of grid points.
    pub fn len(&self) -> usize {
        self.radial_count() * self.angular.len()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Cartesian coordinates of node (q, i, k).
    pub fn point(&self, q: usize, i: usize, k: usize) -> [f64; 3] {
        let r = self.radial_r[q];
        let ct = self.angular.cos_theta()[i];
        let st = self.angular.theta()[i].sin();
        let phi = self.angular.phi(k);
        [r * st * phi.cos(), r * st * phi.sin(), r * ct]
    }

    /// Combined quadrature weight of node (q, i, _).
    pub fn weight(&self, q: usize, i: usize) -> f64 {
        self.radial_weights[q] * self.angular.theta_weights()[i] * self.angular.phi_weight()
    }

    /// Quadrature of a scalar field over the ball. Shells are reduced in
    /// ascending radial order; within a shell theta-major, phi ascending.
    pub fn integrate<F: Fn([f64; 3]) -> f64 + Sync>(&self, f: F) -> f64 {
        let shells = map_indexed(self.radial_count(), |q| {
            let mut acc = 0.0;
            for i in 0..self.angular.theta_count() {
                let mut ring = 0.0;
                for k in 0..self.angular.phi_count() {
                    ring += f(self.point(q, i, k));
                }
                acc += self.angular.theta_weights()[i] * ring;
            }
            acc * self.radial_weights[q] * self.angular.phi_weight()
        });
        shells.iter().sum()
    }

    /// Samples `f` on every node, shell-major then theta-major then phi.
    /// Rejects non-finite values, naming the offending point.
    pub fn sample<F: Fn([f64; 3]) -> f64 + Sync>(&self, f: F) -> Result<Vec<f64>> {
        let per_shell = self.angular.len();
        let shells = map_indexed(self.radial_count(), |q| {
            let mut out = Vec::with_capacity(per_shell);
            for i in 0..self.angular.theta_count() {
                for k in 0..self.angular.phi_count() {
                    out.push(f(self.point(q, i, k)));
                }
            }
            out
        });
        let mut samples = Vec::with_capacity(self.len());
        for (q, shell) in shells.into_iter().enumerate() {
            for (j, v) in shell.iter().enumerate() {
                if !v.is_finite() {
                    let (i, k) = (j / self.angular.phi_count(), j % self.angular.phi_count());
                    let p = self.point(q, i, k);
                    return Err(Error::NonFiniteSample {
                        value: *v,
                        x: p[0],
                        y: p[1],
                        z: p[2],
                    });
                }
            }
            samples.extend_from_slice(&shell);
        }
        Ok(samples)
    }
}

/// Expansion coefficients over the degree-N basis, stored in `index_set`
/// order (ascending n, then l, then k).
#[derive(Debug, Clone, PartialEq)]
pub struct CoefficientField {
    degree: usize,
    values: Vec<f64>,
}

impl CoefficientField {
    pub fn zeros(degree: usize) -> Result<Self> {
        let layout = BasisLayout::new(degree)?;
        Ok(Self {
            degree,
            values: vec![0.0; layout.dim()],
        })
    }

    pub fn from_values(degree: usize, values: Vec<f64>) -> Result<Self> {
        let layout = BasisLayout::new(degree)?;
        if values.len() != layout.dim() {
            return Err(Error::CoefficientCountMismatch {
                degree,
                expected: layout.dim(),
                got: values.len(),
            });
        }
        Ok(Self { degree, values })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Position of an index in the flat ordering, if it belongs to the space.
    pub fn position(&self, idx: BasisIndex) -> Option<usize> {
        if idx.total_degree() > self.degree {
            return None;
        }
        // blocks are ordered by (n, l); there are n^2 + (l-1) blocks before
        // (n, l), and the block of harmonic degree m holds (degree - m)/2
        // radial functions for each of its 2m+1 orders
        let mut offset = 0;
        for m in 0..idx.n() {
            offset += (2 * m + 1) * ((self.degree - m) / 2);
        }
        offset += (idx.l() - 1) * ((self.degree - idx.n()) / 2);
        Some(offset + idx.k() - 1)
    }

    pub fn get(&self, idx: BasisIndex) -> Option<f64> {
        self.position(idx).map(|p| self.values[p])
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Serializes to the documented JSON layout
    /// `{degree, ordering: "n-major", entries: [[k, n, l, value], ...]}`.
    pub fn to_json(&self) -> serde_json::Value {
        let layout = BasisLayout::new(self.degree).unwrap();
        let entries: Vec<(usize, usize, usize, f64)> = layout
            .indices()
            .iter()
            .zip(&self.values)
            .map(|(idx, &v)| (idx.k(), idx.n(), idx.l(), v))
            .collect();
        serde_json::json!({
            "degree": self.degree,
            "ordering": "n-major",
            "entries": entries,
        })
    }

    pub fn from_json(value: &serde_json::Value) -> Result<Self> {
        #[derive(Deserialize)]
        struct Schema {
            degree: usize,
            entries: Vec<(usize, usize, usize, f64)>,
        }
        let schema: Schema =
            serde_json::from_value(value.clone()).map_err(|_| Error::DegreeTooSmall(0))?;
        let layout = BasisLayout::new(schema.degree)?;
        if schema.entries.len() != layout.dim() {
            return Err(Error::CoefficientCountMismatch {
                degree: schema.degree,
                expected: layout.dim(),
                got: schema.entries.len(),
            });
        }
        let mut field = Self::zeros(schema.degree)?;
        for (k, n, l, v) in schema.entries {
            let idx = BasisIndex::new(k, n, l)?;
            let pos = field.position(idx).ok_or(Error::CoefficientCountMismatch {
                degree: schema.degree,
                expected: layout.dim(),
                got: 0,
            })?;
            field.values[pos] = v;
        }
        Ok(field)
    }
}

/// Radial factor tables of the boundary-vanishing basis on a grid: for each
/// harmonic degree n, the values (P_k - P_{k-1})(t_q) r_q^n, k = 1..k_max(n).
struct RadialTables {
    /// tables[n][q * k_max + (k-1)]
    tables: Vec<Vec<f64>>,
    k_max: Vec<usize>,
}

impl RadialTables {
    fn new(layout: &BasisLayout, grid: &BallGrid) -> Self {
        let n_max = layout.n_max();
        let m_r = grid.radial_count();
        let mut tables = Vec::with_capacity(n_max + 1);
        let mut k_maxes = Vec::with_capacity(n_max + 1);
        let mut seq = Vec::new();
        for n in 0..=n_max {
            let k_max = (layout.degree() - n) / 2;
            let params = JacobiParams::new(0.0, n as f64 + 0.5).unwrap();
            let mut table = vec![0.0; m_r * k_max];
            for q in 0..m_r {
                jacobi::eval_sequence(k_max, &params, grid.radial_t()[q], &mut seq);
                let rn = grid.radial_r()[q].powi(n as i32);
                for k in 1..=k_max {
                    table[q * k_max + (k - 1)] = (seq[k] - seq[k - 1]) * rn;
                }
            }
            tables.push(table);
            k_maxes.push(k_max);
        }
        Self {
            tables,
            k_max: k_maxes,
        }
    }

    fn value(&self, n: usize, q: usize, k: usize) -> f64 {
        self.tables[n][q * self.k_max[n] + (k - 1)]
    }
}

/// Inner products of a scalar field against every basis function of the
/// degree-N space: out[i] = (f, G_i)_{L^2(B)}.
///
/// Two-stage transform: harmonic analysis per radial shell, then a radial
/// contraction per (n, l) mode. Cost O(M_r L_theta L_phi n_max + M_r dim).
pub fn analyze<F: Fn([f64; 3]) -> f64 + Sync>(
    f: F,
    degree: usize,
    grid: &BallGrid,
) -> Result<CoefficientField> {
    let samples = grid.sample(f)?;
    analyze_samples(&samples, degree, grid)
}

/// As [`analyze`] for a field already sampled on the grid (shell-major
/// ordering of [`BallGrid::sample`]).
pub fn analyze_samples(
    samples: &[f64],
    degree: usize,
    grid: &BallGrid,
) -> Result<CoefficientField> {
    let layout = BasisLayout::new(degree)?;
    if samples.len() != grid.len() {
        return Err(Error::SampleCountMismatch {
            expected: grid.len(),
            got: samples.len(),
        });
    }
    let n_max = layout.n_max();
    let per_shell = grid.angular().len();

    // stage 1: harmonic analysis of every radial shell
    let shell_coeffs: Vec<HarmonicCoefficients> = {
        let results = map_indexed(grid.radial_count(), |q| {
            grid.angular()
                .analyze(&samples[q * per_shell..(q + 1) * per_shell], n_max)
        });
        let mut out = Vec::with_capacity(results.len());
        for r in results {
            out.push(r?);
        }
        out
    };

    // stage 2: radial contraction per (n, l) block, ascending q per entry
    let radial = RadialTables::new(&layout, grid);
    let blocks = layout.blocks().to_vec();
    let block_values = map_indexed(blocks.len(), |b| {
        let blk = blocks[b];
        let h = HarmonicCoefficients::flat_index(blk.n, blk.l);
        let mut out = vec![0.0; blk.k_max];
        for (q, (wr, sc)) in grid.radial_weights().iter().zip(&shell_coeffs).enumerate() {
            let w = wr * sc.values()[h];
            for k in 1..=blk.k_max {
                out[k - 1] += w * radial.value(blk.n, q, k);
            }
        }
        out
    });

    let mut values = vec![0.0; layout.dim()];
    for (blk, vals) in blocks.iter().zip(block_values) {
        values[blk.offset..blk.offset + blk.k_max].copy_from_slice(&vals);
    }
    Ok(CoefficientField { degree, values })
}

/// Reference path for cross-validation: direct summation
/// out[i] = sum_q w_q f(x_q) G_i(x_q). O(dim x points); debug only.
pub fn analyze_direct<F: Fn([f64; 3]) -> f64 + Sync>(
    f: F,
    degree: usize,
    grid: &BallGrid,
) -> Result<CoefficientField> {
    let layout = BasisLayout::new(degree)?;
    let samples = grid.sample(f)?;
    let indices = layout.indices().to_vec();
    let values = map_indexed(indices.len(), |i| {
        let idx = indices[i];
        let mut acc = 0.0;
        let mut s = 0;
        for q in 0..grid.radial_count() {
            for ti in 0..grid.angular().theta_count() {
                let w = grid.weight(q, ti);
                for k in 0..grid.angular().phi_count() {
                    acc += w
                        * samples[s]
                        * crate::ballbasis::eval_generalized(idx, grid.point(q, ti, k)).unwrap();
                    s += 1;
                }
            }
        }
        acc
    });
    Ok(CoefficientField { degree, values })
}

fn point_radius(p: [f64; 3]) -> Result<(f64, f64)> {
    let r2 = p[0] * p[0] + p[1] * p[1] + p[2] * p[2];
    let r = r2.sqrt();
    if !(r.is_finite() && r <= 1.0 + 1e-14) {
        return Err(Error::PointOutsideBall {
            x: p[0],
            y: p[1],
            z: p[2],
        });
    }
    Ok((r.min(1.0), (2.0 * r2 - 1.0).clamp(-1.0, 1.0)))
}

/// Evaluates the expansion sum_i c_i G_i at each point. Terms are summed in
/// the basis ordering, so results are deterministic.
pub fn synthesize(c: &CoefficientField, points: &[[f64; 3]]) -> Result<Vec<f64>> {
    let layout = BasisLayout::new(c.degree())?;
    for &p in points {
        point_radius(p)?;
    }
    let n_max = layout.n_max();
    let blocks = layout.blocks().to_vec();
    let values = map_indexed(points.len(), |pi| {
        synthesize_point(c, &blocks, n_max, points[pi])
    });
    Ok(values)
}

fn synthesize_point(
    c: &CoefficientField,
    blocks: &[crate::ballbasis::ModeBlock],
    n_max: usize,
    p: [f64; 3],
) -> f64 {
    let (r, t) = point_radius(p).unwrap();
    let mut seq = Vec::new();
    if r == 0.0 {
        // only the constant harmonic survives at the origin
        let blk = &blocks[0];
        let params = JacobiParams::new(0.0, 0.5).unwrap();
        jacobi::eval_sequence(blk.k_max, &params, t, &mut seq);
        let mut radial = 0.0;
        for k in 1..=blk.k_max {
            radial += c.values[blk.offset + k - 1] * (seq[k] - seq[k - 1]);
        }
        return radial / (4.0 * std::f64::consts::PI).sqrt();
    }
    let angles = SphericalPoint::from_direction(p[0], p[1], p[2]).unwrap();
    let (st, ct) = angles.theta().sin_cos();
    let mut y = Vec::new();
    harmonics::eval_all(n_max, st, ct, angles.phi(), &mut y);

    let mut acc = 0.0;
    let mut cur_n = usize::MAX;
    let mut rn = 1.0;
    for blk in blocks {
        if blk.n != cur_n {
            cur_n = blk.n;
            let params = JacobiParams::new(0.0, blk.n as f64 + 0.5).unwrap();
            jacobi::eval_sequence(blk.k_max, &params, t, &mut seq);
            rn = r.powi(blk.n as i32);
        }
        let mut radial = 0.0;
        for k in 1..=blk.k_max {
            radial += c.values[blk.offset + k - 1] * (seq[k] - seq[k - 1]);
        }
        acc += radial * rn * y[blk.n * blk.n + blk.l - 1];
    }
    acc
}

/// Values and Cartesian gradients of the expansion at interior, off-axis
/// points, in one pass.
///
/// Used by the error norms on quadrature grids, whose nodes never touch the
/// origin or the polar axis where the spherical frame degenerates.
pub(crate) fn synthesize_with_gradient(
    c: &CoefficientField,
    points: &[[f64; 3]],
) -> Result<(Vec<f64>, Vec<[f64; 3]>)> {
    let layout = BasisLayout::new(c.degree())?;
    for &p in points {
        point_radius(p)?;
    }
    let n_max = layout.n_max();
    let blocks = layout.blocks().to_vec();
    let both = map_indexed(points.len(), |pi| {
        gradient_point(c, &blocks, n_max, points[pi])
    });
    let mut values = Vec::with_capacity(points.len());
    let mut grads = Vec::with_capacity(points.len());
    for (v, g) in both {
        values.push(v);
        grads.push(g);
    }
    Ok((values, grads))
}

#[cfg(test)]
pub(crate) fn synthesize_gradient(
    c: &CoefficientField,
    points: &[[f64; 3]],
) -> Result<Vec<[f64; 3]>> {
    Ok(synthesize_with_gradient(c, points)?.1)
}

fn gradient_point(
    c: &CoefficientField,
    blocks: &[crate::ballbasis::ModeBlock],
    n_max: usize,
    p: [f64; 3],
) -> (f64, [f64; 3]) {
    let (r, t) = point_radius(p).unwrap();
    debug_assert!(r > 0.0, "gradient undefined at the origin");
    let angles = SphericalPoint::from_direction(p[0], p[1], p[2]).unwrap();
    let phi = angles.phi();
    let (st, ct) = angles.theta().sin_cos();
    debug_assert!(st > 0.0, "gradient frame degenerates on the polar axis");
    let (sp, cp) = phi.sin_cos();
    let r_hat = [st * cp, st * sp, ct];
    let theta_hat = [ct * cp, ct * sp, -st];
    let phi_hat = [-sp, cp, 0.0];

    let mut y = Vec::new();
    let mut dy_dtheta = Vec::new();
    let mut dy_dphi_over_sin = Vec::new();
    harmonics::eval_all_with_derivatives(
        n_max,
        st,
        ct,
        phi,
        &mut y,
        &mut dy_dtheta,
        &mut dy_dphi_over_sin,
    );

    let mut seq = Vec::new();
    let mut dseq = Vec::new();
    let mut cur_n = usize::MAX;
    let mut rn = 1.0;
    let mut rn1 = 1.0;
    let mut value = 0.0;
    let mut grad = [0.0; 3];
    for blk in blocks {
        if blk.n != cur_n {
            cur_n = blk.n;
            let params = JacobiParams::new(0.0, blk.n as f64 + 0.5).unwrap();
            jacobi::eval_sequence(blk.k_max, &params, t, &mut seq);
            jacobi::derivative_sequence(blk.k_max, &params, t, &mut dseq);
            rn = r.powi(blk.n as i32);
            rn1 = if blk.n == 0 {
                0.0
            } else {
                r.powi(blk.n as i32 - 1)
            };
        }
        let mut radial = 0.0;
        let mut dradial = 0.0;
        for k in 1..=blk.k_max {
            let cv = c.values[blk.offset + k - 1];
            radial += cv * (seq[k] - seq[k - 1]);
            dradial += cv * (dseq[k] - dseq[k - 1]);
        }
        let flat = blk.n * blk.n + blk.l - 1;
        value += radial * rn * y[flat];
        // d/dr [ dP(2r^2-1) r^n ] = 4 r dP' r^n + n r^{n-1} dP
        let d_r = 4.0 * r * dradial * rn + blk.n as f64 * rn1 * radial;
        // angular part carries (1/r) r^n = r^{n-1}; absent for n = 0
        let coef_ang = if blk.n == 0 { 0.0 } else { radial * rn1 };
        for d in 0..3 {
            grad[d] += d_r * y[flat] * r_hat[d]
                + coef_ang * (dy_dtheta[flat] * theta_hat[d] + dy_dphi_over_sin[flat] * phi_hat[d]);
        }
    }
    (value, grad)
}
