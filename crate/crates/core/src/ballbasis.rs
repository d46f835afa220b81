//! Ball polynomials and the boundary-vanishing approximation basis.
//!
//! The ball polynomial with parameter alpha is
//!   B_{k,l}^{alpha,n}(x) = c_{alpha,k,n} P_k^{(alpha, n+1/2)}(2 ||x||^2 - 1) S_l^n(x),
//! where S_l^n(x) = ||x||^n Y_l^n(x/||x||) is the solid harmonic of degree n
//! and c is a Pochhammer-ratio prefactor (identically 1 for alpha = 0).
//! These are L^2-orthogonal on the ball under (1 - ||x||^2)^alpha with norm
//! h_k^{alpha,n}.
//!
//! The solver basis takes radial differences of the alpha = 0 family,
//!   G_{k,l}^n = B_{k,l}^{0,n} - B_{k-1,l}^{0,n},  k >= 1,
//! which vanish on the unit sphere and make the gradient Gram matrix diagonal
//! with entries lambda_{k,n} = 2n + 4k + 1, while the mass matrix stays
//! tridiagonal in k for each fixed (n, l). The approximation space of degree
//! N collects all (k, n, l) with 2k + n <= N.

use crate::error::{Error, Result};
use crate::harmonics::{self, HarmonicIndex, SphericalPoint};
use crate::jacobi::{self, JacobiParams};
use crate::special::{ln_gamma, ln_pochhammer};

const FOUR_PI: f64 = 4.0 * std::f64::consts::PI;

/// Tolerance for points straddling the unit sphere by rounding.
const BOUNDARY_SLACK: f64 = 1e-14;

/// Index of one basis function of the degree-N space: radial degree k >= 1,
/// harmonic degree n, harmonic order 1 <= l <= 2n+1. Total degree is n + 2k,
/// so k >= 1 already guarantees the lower bound 2 <= 2k + n; membership in
/// the degree-N space additionally requires 2k + n <= N.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct BasisIndex {
    k: usize,
    n: usize,
    l: usize,
}

impl BasisIndex {
    pub fn new(k: usize, n: usize, l: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::RadialIndexZero { k });
        }
        HarmonicIndex::new(n, l)?;
        Ok(Self { k, n, l })
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }

    pub fn total_degree(&self) -> usize {
        self.n + 2 * self.k
    }

    pub fn harmonic(&self) -> HarmonicIndex {
        HarmonicIndex::new(self.n, self.l).unwrap()
    }
}

/// Weight-exponent family of a ball polynomial.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BallAlpha {
    /// The boundary-vanishing difference family (defined for k >= 1 by the
    /// alpha = 0 difference; k = 0 falls back to B^{0,n}_{0,l}).
    NegOne,
    Zero,
    One,
}

/// One concrete ball polynomial.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BallPolySpec {
    alpha: BallAlpha,
    k: usize,
    n: usize,
    l: usize,
}

impl BallPolySpec {
    pub fn new(alpha: BallAlpha, k: usize, n: usize, l: usize) -> Result<Self> {
        HarmonicIndex::new(n, l)?;
        Ok(Self { alpha, k, n, l })
    }

    pub fn alpha(&self) -> BallAlpha {
        self.alpha
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn l(&self) -> usize {
        self.l
    }
}

/// L^2 norm squared h_k^{alpha,n} of the ball polynomial under the weight
/// (1 - ||x||^2)^alpha, from the closed Gamma/Pochhammer formula.
pub fn ball_norm(alpha: f64, k: usize, n: usize) -> Result<f64> {
    if !(alpha.is_finite() && alpha > -1.0) {
        return Err(Error::InvalidBallAlpha { alpha });
    }
    let kf = k as f64;
    let nf = n as f64;
    let a = nf + kf + 1.5;
    let ln = ln_gamma(kf + alpha + 1.0) + ln_gamma(nf + 2.0 * kf + 1.5) + ln_pochhammer(a, k)
        - std::f64::consts::LN_2
        - ln_gamma(kf + 1.0)
        - ln_gamma(nf + 2.0 * kf + alpha + 2.5)
        - ln_pochhammer(a + alpha, k);
    Ok(ln.exp())
}

/// Gradient Gram diagonal of the boundary-vanishing basis:
/// lambda_{k,n} = 2n + 4k + 1.
pub fn stiffness_lambda(k: usize, n: usize) -> f64 {
    debug_assert!(k >= 1);
    (2 * n + 4 * k + 1) as f64
}

/// Solid harmonic ||x||^n Y_l^n(x/||x||); zero at the origin for n >= 1.
fn solid_harmonic(n: usize, l: usize, x: [f64; 3], r: f64) -> f64 {
    if n == 0 {
        return 1.0 / FOUR_PI.sqrt();
    }
    if r == 0.0 {
        return 0.0;
    }
    let p = SphericalPoint::from_direction(x[0], x[1], x[2]).unwrap();
    r.powi(n as i32) * harmonics::eval(HarmonicIndex::new(n, l).unwrap(), p)
}

fn radius_checked(x: [f64; 3]) -> Result<(f64, f64)> {
    let r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
    let r = r2.sqrt();
    if !(r.is_finite() && r <= 1.0 + BOUNDARY_SLACK) {
        return Err(Error::PointOutsideBall {
            x: x[0],
            y: x[1],
            z: x[2],
        });
    }
    Ok((r.min(1.0), (2.0 * r2 - 1.0).clamp(-1.0, 1.0)))
}

/// Value of a ball polynomial at a point of the closed unit ball.
pub fn eval_ball(spec: &BallPolySpec, x: [f64; 3]) -> Result<f64> {
    let (r, t) = radius_checked(x)?;
    let beta = spec.n as f64 + 0.5;
    let radial = match spec.alpha {
        BallAlpha::NegOne => {
            // Defined through the alpha = 0 difference, never by substituting
            // alpha = -1 into the general formula.
            let zero = JacobiParams::new(0.0, beta)?;
            if spec.k == 0 {
                // convention B^{-1,n}_{0,l} = B^{0,n}_{0,l}
                1.0
            } else {
                jacobi::eval_unchecked(spec.k, &zero, t)
                    - jacobi::eval_unchecked(spec.k - 1, &zero, t)
            }
        }
        BallAlpha::Zero => jacobi::eval_unchecked(spec.k, &JacobiParams::new(0.0, beta)?, t),
        BallAlpha::One => {
            // Pochhammer prefactor (n+k+3/2)_k / (n+k+5/2)_k telescopes.
            let a = spec.n as f64 + spec.k as f64 + 1.5;
            let pre = a / (a + spec.k as f64);
            pre * jacobi::eval_unchecked(spec.k, &JacobiParams::new(1.0, beta)?, t)
        }
    };
    Ok(radial * solid_harmonic(spec.n, spec.l, x, r))
}

/// Value of the boundary-vanishing basis function G_{k,l}^n at a point of the
/// closed unit ball; exactly zero on the unit sphere up to rounding.
pub fn eval_generalized(idx: BasisIndex, x: [f64; 3]) -> Result<f64> {
    let (r, t) = radius_checked(x)?;
    let params = JacobiParams::new(0.0, idx.n as f64 + 0.5)?;
    let radial =
        jacobi::eval_unchecked(idx.k, &params, t) - jacobi::eval_unchecked(idx.k - 1, &params, t);
    Ok(radial * solid_harmonic(idx.n, idx.l, x, r))
}

/// Coefficient-space operators of one (n, l) mode: the stiffness diagonal
/// lambda_{k,n} and the symmetric tridiagonal mass block, k = 1..k_max.
#[derive(Debug, Clone, PartialEq)]
pub struct ModeOperator {
    n: usize,
    k_max: usize,
    stiffness: Vec<f64>,
    mass_diag: Vec<f64>,
    mass_off: Vec<f64>,
}

impl ModeOperator {
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k_max(&self) -> usize {
        self.k_max
    }

    /// lambda_{k,n} for k = 1..k_max.
    pub fn stiffness(&self) -> &[f64] {
        &self.stiffness
    }

    pub fn mass_diag(&self) -> &[f64] {
        &self.mass_diag
    }

    pub fn mass_off(&self) -> &[f64] {
        &self.mass_off
    }

    /// Dense mass entry M_{k,k'}, 1-based radial indices.
    pub fn mass_entry(&self, k: usize, kp: usize) -> f64 {
        debug_assert!((1..=self.k_max).contains(&k) && (1..=self.k_max).contains(&kp));
        if k == kp {
            self.mass_diag[k - 1]
        } else if k.abs_diff(kp) == 1 {
            self.mass_off[k.min(kp) - 1]
        } else {
            0.0
        }
    }

    /// out = M x for a radial coefficient block x[k-1] = x_k.
    pub fn apply_mass(&self, x: &[f64], out: &mut [f64]) {
        let m = self.k_max;
        debug_assert_eq!(x.len(), m);
        debug_assert_eq!(out.len(), m);
        for i in 0..m {
            let mut v = self.mass_diag[i] * x[i];
            if i > 0 {
                v += self.mass_off[i - 1] * x[i - 1];
            }
            if i + 1 < m {
                v += self.mass_off[i] * x[i + 1];
            }
            out[i] = v;
        }
    }
}

/// Radial mass block of harmonic degree n for k, k' in 1..=k_max:
/// M_{k,k'} = h_k^{0,n} + h_{k-1}^{0,n} on the diagonal and
/// -h_{min(k,k')}^{0,n} on the first off-diagonals, with h_k^{0,n} = 1/(2n+4k+3).
pub fn mass_tridiagonal(n: usize, k_max: usize) -> ModeOperator {
    assert!(k_max >= 1);
    let h = |k: usize| 1.0 / (2 * n + 4 * k + 3) as f64;
    let mass_diag = (1..=k_max).map(|k| h(k) + h(k - 1)).collect();
    let mass_off = (1..k_max).map(|k| -h(k)).collect();
    let stiffness = (1..=k_max).map(|k| stiffness_lambda(k, n)).collect();
    ModeOperator {
        n,
        k_max,
        stiffness,
        mass_diag,
        mass_off,
    }
}

/// Every basis index of the degree-N space, ordered degree-major:
/// ascending n, then l, then k. Radial runs of fixed (n, l) are contiguous.
pub fn index_set(degree: usize) -> Result<Vec<BasisIndex>> {
    if degree < 2 {
        return Err(Error::DegreeTooSmall(degree));
    }
    let mut out = Vec::new();
    for n in 0..=degree - 2 {
        let k_max = (degree - n) / 2;
        for l in 1..=2 * n + 1 {
            for k in 1..=k_max {
                out.push(BasisIndex { k, n, l });
            }
        }
    }
    Ok(out)
}

/// One contiguous (n, l) radial run inside the basis ordering.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ModeBlock {
    pub n: usize,
    pub l: usize,
    /// Offset of k = 1 in the flat coefficient vector.
    pub offset: usize,
    pub k_max: usize,
}

/// The degree-N space: flat index list plus its block structure.
#[derive(Debug, Clone)]
pub struct BasisLayout {
    degree: usize,
    indices: Vec<BasisIndex>,
    blocks: Vec<ModeBlock>,
}

impl BasisLayout {
    pub fn new(degree: usize) -> Result<Self> {
        let indices = index_set(degree)?;
        let mut blocks = Vec::new();
        let mut offset = 0;
        for n in 0..=degree - 2 {
            let k_max = (degree - n) / 2;
            for l in 1..=2 * n + 1 {
                blocks.push(ModeBlock {
                    n,
                    l,
                    offset,
                    k_max,
                });
                offset += k_max;
            }
        }
        debug_assert_eq!(offset, indices.len());
        Ok(Self {
            degree,
            indices,
            blocks,
        })
    }

    pub fn degree(&self) -> usize {
        self.degree
    }

    pub fn dim(&self) -> usize {
        self.indices.len()
    }

    pub fn indices(&self) -> &[BasisIndex] {
        &self.indices
    }

    pub fn blocks(&self) -> &[ModeBlock] {
        &self.blocks
    }

    /// Largest harmonic degree present (N - 2).
    pub fn n_max(&self) -> usize {
        self.degree - 2
    }

    /// Largest radial index over all modes (floor(N / 2)).
    pub fn k_max(&self) -> usize {
        self.degree / 2
    }
}
