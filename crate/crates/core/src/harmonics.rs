//! Real orthonormal spherical harmonics and quadrature on the unit sphere.
//!
//! The basis for degree n is indexed l = 1..2n+1 and built directly from
//! Jacobi polynomials:
//!   l = 1:      sqrt((2n+1)/4pi) P_n^{(0,0)}(cos theta)            (zonal)
//!   l = 2j:     C_{n,j} (sin theta)^j cos(j phi) P_{n-j}^{(j,j)}(cos theta)
//!   l = 2j+1:   C_{n,j} (sin theta)^j sin(j phi) P_{n-j}^{(j,j)}(cos theta)
//! with 1 <= j <= n. The Jacobi factor is evaluated literally; this keeps the
//! construction auditable term by term against the normalization oracle in
//! the tests.
//!
//! Sphere quadrature tensorizes a Gauss-Legendre rule in cos theta with the
//! uniform trapezoid rule in phi, which is exact for trigonometric
//! polynomials of azimuthal degree < L_phi.

use crate::error::{Error, Result};
use crate::jacobi::{self, JacobiParams};
use crate::par::map_indexed;
use crate::special::ln_gamma;

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;
const TWO_PI: f64 = 2.0 * std::f64::consts::PI;

/// Point on the unit sphere: polar angle in [0, pi], azimuth in [0, 2pi).
///
/// The azimuth is wrapped modulo 2pi at construction; the polar angle must
/// already be in range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SphericalPoint {
    theta: f64,
    phi: f64,
}

impl SphericalPoint {
    pub fn new(theta: f64, phi: f64) -> Result<Self> {
        if !(theta.is_finite() && (0.0..=std::f64::consts::PI).contains(&theta)) {
            return Err(Error::ThetaOutOfRange { theta });
        }
        let phi = phi.rem_euclid(TWO_PI);
        Ok(Self { theta, phi })
    }

    /// Spherical angles of a non-zero Cartesian direction.
    pub fn from_direction(x: f64, y: f64, z: f64) -> Result<Self> {
        let r = (x * x + y * y + z * z).sqrt();
        if !(r.is_finite() && r > 0.0) {
            return Err(Error::ThetaOutOfRange { theta: f64::NAN });
        }
        Self::new((z / r).clamp(-1.0, 1.0).acos(), y.atan2(x))
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }

    pub fn phi(&self) -> f64 {
        self.phi
    }
}

/// Index (n, l) with degree n >= 0 and order 1 <= l <= 2n+1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct HarmonicIndex {
    n: usize,
    l: usize,
}

/// Azimuthal factor selected by the order l.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum AzimuthalKind {
    /// l = 1: no phi dependence.
    Zonal,
    /// l = 2j: cos(j phi).
    Cosine(usize),
    /// l = 2j+1, j >= 1: sin(j phi).
    Sine(usize),
}

impl HarmonicIndex {
    pub fn new(n: usize, l: usize) -> Result<Self> {
        if l < 1 || l > 2 * n + 1 {
            return Err(Error::HarmonicOrderOutOfRange {
                n,
                l,
                max: 2 * n + 1,
            });
        }
        Ok(Self { n, l })
    }

    pub fn degree(&self) -> usize {
        self.n
    }

    pub fn order(&self) -> usize {
        self.l
    }

    pub fn kind(&self) -> AzimuthalKind {
        if self.l == 1 {
            AzimuthalKind::Zonal
        } else if self.l.is_multiple_of(2) {
            AzimuthalKind::Cosine(self.l / 2)
        } else {
            AzimuthalKind::Sine(self.l / 2)
        }
    }
}

/// Normalization constant C_{n,j}, via log-Gamma.
pub(crate) fn normalization(n: usize, j: usize) -> f64 {
    debug_assert!(j >= 1 && j <= n);
    let n = n as f64;
    let j = j as f64;
    let ln = -j * std::f64::consts::LN_2
        + 0.5
            * ((2.0 * n + 1.0).ln() + ln_gamma(n - j + 1.0) + ln_gamma(n + j + 1.0)
                - 2.0 * ln_gamma(n + 1.0)
                - TWO_PI.ln());
    ln.exp()
}

/// Value of the real spherical harmonic Y_l^n at a sphere point.
pub fn eval(idx: HarmonicIndex, p: SphericalPoint) -> f64 {
    let ct = p.theta.cos();
    match idx.kind() {
        AzimuthalKind::Zonal => {
            let params = JacobiParams::new(0.0, 0.0).unwrap();
            ((2 * idx.n + 1) as f64 / FOUR_PI).sqrt()
                * jacobi::eval_clamped(idx.n, &params, ct, 1e-12).unwrap()
        }
        AzimuthalKind::Cosine(j) => theta_factor(idx.n, j, p.theta, ct) * (j as f64 * p.phi).cos(),
        AzimuthalKind::Sine(j) => theta_factor(idx.n, j, p.theta, ct) * (j as f64 * p.phi).sin(),
    }
}

/// C_{n,j} (sin theta)^j P_{n-j}^{(j,j)}(cos theta).
fn theta_factor(n: usize, j: usize, theta: f64, ct: f64) -> f64 {
    let params = JacobiParams::new(j as f64, j as f64).unwrap();
    normalization(n, j)
        * theta.sin().powi(j as i32)
        * jacobi::eval_clamped(n - j, &params, ct, 1e-12).unwrap()
}

/// Values of every harmonic of degree <= n_max at one point, written into
/// `out` in flat order n^2 + (l - 1).
///
/// One Jacobi sweep per azimuthal order j; the normalization constants come
/// from exact square-root ladders,
///   C_{j,j} = C_{j-1,j-1} sqrt((2j+1)/(2j)),
///   C_{n,j} = C_{n-1,j} sqrt((2n+1)/(2n-1) * (n^2 - j^2)/n^2),
/// so the hot path carries no Gamma evaluations. `st`, `ct` are sin/cos of
/// the polar angle.
pub(crate) fn eval_all(n_max: usize, st: f64, ct: f64, phi: f64, out: &mut Vec<f64>) {
    out.clear();
    out.resize((n_max + 1) * (n_max + 1), 0.0);
    let ct = ct.clamp(-1.0, 1.0);
    let mut seq = Vec::new();
    let p00 = JacobiParams::new(0.0, 0.0).unwrap();
    jacobi::eval_sequence(n_max, &p00, ct, &mut seq);
    for n in 0..=n_max {
        out[n * n] = ((2 * n + 1) as f64 / FOUR_PI).sqrt() * seq[n];
    }
    let mut c_corner = 1.0 / TWO_PI.sqrt();
    let mut s_pow = 1.0; // st^{j-1}
    for j in 1..=n_max {
        c_corner *= ((2 * j + 1) as f64 / (2 * j) as f64).sqrt();
        if j > 1 {
            s_pow *= st;
        }
        let sj = s_pow * st;
        let params = JacobiParams::new(j as f64, j as f64).unwrap();
        jacobi::eval_sequence(n_max - j, &params, ct, &mut seq);
        let (sphi, cphi) = (j as f64 * phi).sin_cos();
        let mut c = c_corner;
        for n in j..=n_max {
            if n > j {
                let nf = n as f64;
                c *= ((2.0 * nf + 1.0) / (2.0 * nf - 1.0) * (nf * nf - (j * j) as f64) / (nf * nf))
                    .sqrt();
            }
            let g = c * sj * seq[n - j];
            out[n * n + 2 * j - 1] = g * cphi;
            out[n * n + 2 * j] = g * sphi;
        }
    }
}

/// As [`eval_all`], also producing d/dtheta of every harmonic and its
/// azimuthal derivative pre-divided by sin(theta) (finite for all orders).
pub(crate) fn eval_all_with_derivatives(
    n_max: usize,
    st: f64,
    ct: f64,
    phi: f64,
    y: &mut Vec<f64>,
    dtheta: &mut Vec<f64>,
    dphi_over_sin: &mut Vec<f64>,
) {
    let size = (n_max + 1) * (n_max + 1);
    for buf in [&mut *y, &mut *dtheta, &mut *dphi_over_sin] {
        buf.clear();
        buf.resize(size, 0.0);
    }
    let ct = ct.clamp(-1.0, 1.0);
    let mut seq = Vec::new();
    let mut dseq = Vec::new();
    let p00 = JacobiParams::new(0.0, 0.0).unwrap();
    jacobi::eval_sequence(n_max, &p00, ct, &mut seq);
    jacobi::derivative_sequence(n_max, &p00, ct, &mut dseq);
    for n in 0..=n_max {
        let s = ((2 * n + 1) as f64 / FOUR_PI).sqrt();
        y[n * n] = s * seq[n];
        dtheta[n * n] = -st * s * dseq[n];
    }
    let mut c_corner = 1.0 / TWO_PI.sqrt();
    let mut s_pow = 1.0; // st^{j-1}
    for j in 1..=n_max {
        c_corner *= ((2 * j + 1) as f64 / (2 * j) as f64).sqrt();
        if j > 1 {
            s_pow *= st;
        }
        let sj = s_pow * st;
        let jf = j as f64;
        let params = JacobiParams::new(jf, jf).unwrap();
        jacobi::eval_sequence(n_max - j, &params, ct, &mut seq);
        jacobi::derivative_sequence(n_max - j, &params, ct, &mut dseq);
        let (sphi, cphi) = (jf * phi).sin_cos();
        let mut c = c_corner;
        for n in j..=n_max {
            if n > j {
                let nf = n as f64;
                c *= ((2.0 * nf + 1.0) / (2.0 * nf - 1.0) * (nf * nf - (j * j) as f64) / (nf * nf))
                    .sqrt();
            }
            let p = seq[n - j];
            let g = c * sj * p;
            // d/dtheta [sin^j P(cos)] = j sin^{j-1} cos P - sin^{j+1} P'
            let dg = c * (jf * s_pow * ct * p - sj * st * dseq[n - j]);
            let over_sin = c * s_pow * p;
            let base = n * n + 2 * j - 1;
            y[base] = g * cphi;
            dtheta[base] = dg * cphi;
            dphi_over_sin[base] = -jf * over_sin * sphi;
            y[base + 1] = g * sphi;
            dtheta[base + 1] = dg * sphi;
            dphi_over_sin[base + 1] = jf * over_sin * cphi;
        }
    }
}

/// Coefficients over all (n, l) with n <= n_max, stored degree-major.
#[derive(Debug, Clone, PartialEq)]
pub struct HarmonicCoefficients {
    n_max: usize,
    values: Vec<f64>,
}

impl HarmonicCoefficients {
    /// Flat position of (n, l): there are n^2 pairs of lower degree.
    pub(crate) fn flat_index(n: usize, l: usize) -> usize {
        n * n + (l - 1)
    }

    pub fn n_max(&self) -> usize {
        self.n_max
    }

    pub fn get(&self, idx: HarmonicIndex) -> f64 {
        self.values[Self::flat_index(idx.n, idx.l)]
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }
}

/// Tensor-product quadrature grid on the unit sphere.
///
/// Nodes are (theta_i, phi_k) with cos(theta_i) the Gauss-Legendre nodes and
/// phi_k = 2 pi k / L_phi; the combined weights sum to 4 pi.
#[derive(Debug, Clone)]
pub struct AngularGrid {
    cos_theta: Vec<f64>,
    theta: Vec<f64>,
    theta_weights: Vec<f64>,
    phi_count: usize,
}

impl AngularGrid {
    pub fn new(l_theta: usize, l_phi: usize) -> Result<Self> {
        assert!(l_theta >= 1 && l_phi >= 1);
        let rule = jacobi::QuadratureRule1D::gauss(l_theta, JacobiParams::new(0.0, 0.0)?)?;
        let cos_theta = rule.nodes().to_vec();
        let theta = cos_theta.iter().map(|&t| t.acos()).collect();
        Ok(Self {
            cos_theta,
            theta,
            theta_weights: rule.weights().to_vec(),
            phi_count: l_phi,
        })
    }

    pub fn theta_count(&self) -> usize {
        self.cos_theta.len()
    }

    pub fn phi_count(&self) -> usize {
        self.phi_count
    }

    pub fn len(&self) -> usize {
        self.theta_count() * self.phi_count
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cos_theta(&self) -> &[f64] {
        &self.cos_theta
    }

    pub fn theta(&self) -> &[f64] {
        &self.theta
    }

    pub fn theta_weights(&self) -> &[f64] {
        &self.theta_weights
    }

    pub fn phi(&self, k: usize) -> f64 {
        TWO_PI * k as f64 / self.phi_count as f64
    }

    pub fn phi_weight(&self) -> f64 {
        TWO_PI / self.phi_count as f64
    }

    /// Largest spherical-polynomial degree integrated exactly.
    pub fn resolved_degree(&self) -> usize {
        (2 * self.theta_count() - 1).min(self.phi_count - 1)
    }

    /// Quadrature of `f(theta, phi)` over the sphere. Samples are summed
    /// theta-major, phi ascending within each ring.
    pub fn integrate<F: Fn(f64, f64) -> f64>(&self, f: F) -> f64 {
        let wp = self.phi_weight();
        let mut total = 0.0;
        for (i, &th) in self.theta.iter().enumerate() {
            let mut ring = 0.0;
            for k in 0..self.phi_count {
                ring += f(th, self.phi(k));
            }
            total += self.theta_weights[i] * wp * ring;
        }
        total
    }

    /// Expands grid samples into harmonic coefficients c_{n,l} = (f, Y_l^n).
    ///
    /// `samples[i * L_phi + k]` is the value at (theta_i, phi_k). The grid
    /// must resolve degree 2 n_max so products of two degree-n_max harmonics
    /// are integrated exactly. Each coefficient is accumulated in a fixed
    /// order (phi within ring, then theta ascending), so results are bitwise
    /// reproducible for any thread count.
    pub fn analyze(&self, samples: &[f64], n_max: usize) -> Result<HarmonicCoefficients> {
        if samples.len() != self.len() {
            return Err(Error::SampleCountMismatch {
                expected: self.len(),
                got: samples.len(),
            });
        }
        if self.resolved_degree() < 2 * n_max {
            return Err(Error::GridTooCoarse {
                resolved: self.resolved_degree(),
                needed: 2 * n_max,
            });
        }
        let fourier = self.azimuthal_sums(samples, n_max);
        let tables = self.theta_tables(n_max);
        let index_list: Vec<(usize, usize)> = (0..=n_max)
            .flat_map(|n| (1..=2 * n + 1).map(move |l| (n, l)))
            .collect();

        let values = map_indexed(index_list.len(), |flat| {
            let (n, l) = index_list[flat];
            let idx = HarmonicIndex::new(n, l).unwrap();
            let nt = self.theta_count();
            let mut acc = 0.0;
            match idx.kind() {
                AzimuthalKind::Zonal => {
                    let scale = ((2 * n + 1) as f64 / FOUR_PI).sqrt();
                    for i in 0..nt {
                        acc += self.theta_weights[i]
                            * scale
                            * tables.legendre[i * (n_max + 1) + n]
                            * fourier.cos[i * (n_max + 1)];
                    }
                }
                AzimuthalKind::Cosine(j) => {
                    for i in 0..nt {
                        acc += self.theta_weights[i]
                            * tables.factor(n_max, j, i, n)
                            * fourier.cos[i * (n_max + 1) + j];
                    }
                }
                AzimuthalKind::Sine(j) => {
                    for i in 0..nt {
                        acc += self.theta_weights[i]
                            * tables.factor(n_max, j, i, n)
                            * fourier.sin[i * (n_max + 1) + j];
                    }
                }
            }
            acc
        });

        Ok(HarmonicCoefficients { n_max, values })
    }

    /// Per-ring azimuthal Fourier sums: cos[i][j] = w_phi sum_k f cos(j phi_k).
    fn azimuthal_sums(&self, samples: &[f64], n_max: usize) -> AzimuthalSums {
        let nt = self.theta_count();
        let np = self.phi_count;
        let wp = self.phi_weight();
        let stride = n_max + 1;
        let rows = map_indexed(nt, |i| {
            let mut cos_row = vec![0.0; stride];
            let mut sin_row = vec![0.0; stride];
            for k in 0..np {
                let v = samples[i * np + k];
                let phi = self.phi(k);
                for j in 0..=n_max {
                    let (s, c) = (j as f64 * phi).sin_cos();
                    cos_row[j] += v * c;
                    sin_row[j] += v * s;
                }
            }
            for j in 0..=n_max {
                cos_row[j] *= wp;
                sin_row[j] *= wp;
            }
            (cos_row, sin_row)
        });
        let mut cos = vec![0.0; nt * stride];
        let mut sin = vec![0.0; nt * stride];
        for (i, (c, s)) in rows.into_iter().enumerate() {
            cos[i * stride..(i + 1) * stride].copy_from_slice(&c);
            sin[i * stride..(i + 1) * stride].copy_from_slice(&s);
        }
        AzimuthalSums { cos, sin }
    }

    /// Tables of the theta-dependent factors for all (n, j) up to n_max.
    fn theta_tables(&self, n_max: usize) -> ThetaTables {
        let nt = self.theta_count();
        let stride = n_max + 1;
        let legendre_params = JacobiParams::new(0.0, 0.0).unwrap();

        let mut legendre = vec![0.0; nt * stride];
        let mut seq = Vec::new();
        for i in 0..nt {
            jacobi::eval_sequence(n_max, &legendre_params, self.cos_theta[i], &mut seq);
            legendre[i * stride..(i + 1) * stride].copy_from_slice(&seq);
        }

        // factors[j-1][i * (n_max - j + 1) + (n - j)] = C_{n,j} sin^j P_{n-j}^{(j,j)}
        let mut factors = Vec::with_capacity(n_max);
        for j in 1..=n_max {
            let params = JacobiParams::new(j as f64, j as f64).unwrap();
            let cols = n_max - j + 1;
            let mut table = vec![0.0; nt * cols];
            for i in 0..nt {
                let st = self.theta[i].sin();
                let sj = st.powi(j as i32);
                jacobi::eval_sequence(n_max - j, &params, self.cos_theta[i], &mut seq);
                for n in j..=n_max {
                    table[i * cols + (n - j)] = normalization(n, j) * sj * seq[n - j];
                }
            }
            factors.push(table);
        }
        ThetaTables { legendre, factors }
    }
}

struct AzimuthalSums {
    cos: Vec<f64>,
    sin: Vec<f64>,
}

struct ThetaTables {
    legendre: Vec<f64>,
    factors: Vec<Vec<f64>>,
}

impl ThetaTables {
    fn factor(&self, n_max: usize, j: usize, i: usize, n: usize) -> f64 {
        let cols = n_max - j + 1;
        self.factors[j - 1][i * cols + (n - j)]
    }
}
