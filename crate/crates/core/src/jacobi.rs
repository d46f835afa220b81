//! Jacobi polynomials P_n^{(alpha,beta)} on [-1, 1] and Gauss-Jacobi quadrature.
//!
//! Everything else in the crate reduces to this scalar kernel: spherical
//! harmonics are built from P_{n-j}^{(j,j)}(cos theta), the radial parts of
//! the ball basis from P_k^{(0, n+1/2)}(2r^2 - 1), and all inner products are
//! evaluated with Gauss-Jacobi rules.
//!
//! Evaluation always ascends the three-term recurrence
//!   a_n P_{n+1} = (b_n + c_n t) P_n - d_n P_{n-1},
//! which is stable on [-1, 1], and never the hypergeometric series.

use crate::error::{Error, Result};
use crate::special::ln_gamma;

/// Exponent pair (alpha, beta) of the weight (1-t)^alpha (1+t)^beta.
///
/// Both exponents must be greater than -1 for the weight to be integrable;
/// construction rejects anything else.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JacobiParams {
    alpha: f64,
    beta: f64,
}

impl JacobiParams {
    pub fn new(alpha: f64, beta: f64) -> Result<Self> {
        if !(alpha.is_finite() && beta.is_finite() && alpha > -1.0 && beta > -1.0) {
            return Err(Error::InvalidJacobiParams { alpha, beta });
        }
        Ok(Self { alpha, beta })
    }

    pub fn alpha(&self) -> f64 {
        self.alpha
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    /// Total mass of the weight, int_{-1}^{1} (1-t)^alpha (1+t)^beta dt.
    pub fn total_mass(&self) -> f64 {
        let (a, b) = (self.alpha, self.beta);
        ((a + b + 1.0) * std::f64::consts::LN_2 + ln_gamma(a + 1.0) + ln_gamma(b + 1.0)
            - ln_gamma(a + b + 2.0))
        .exp()
    }
}

fn check_arg(t: f64, clamp_tol: f64) -> Result<f64> {
    if t.abs() <= 1.0 {
        Ok(t)
    } else if t.abs() <= 1.0 + clamp_tol {
        Ok(t.clamp(-1.0, 1.0))
    } else {
        Err(Error::ArgumentOutOfRange { t })
    }
}

/// P_n^{(alpha,beta)}(t) for t in [-1, 1] (strict).
pub fn eval(n: usize, params: &JacobiParams, t: f64) -> Result<f64> {
    let t = check_arg(t, 0.0)?;
    Ok(eval_unchecked(n, params, t))
}

/// Like [`eval`] but clamps arguments within `clamp_tol` of the endpoints,
/// absorbing rounding like 2r^2 - 1 = 1 + 4e-16 at the boundary.
pub fn eval_clamped(n: usize, params: &JacobiParams, t: f64, clamp_tol: f64) -> Result<f64> {
    let t = check_arg(t, clamp_tol)?;
    Ok(eval_unchecked(n, params, t))
}

pub(crate) fn eval_unchecked(n: usize, params: &JacobiParams, t: f64) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    if n == 0 {
        return 1.0;
    }
    let mut prev = 1.0;
    let mut cur = 0.5 * (a + b + 2.0) * t + 0.5 * (a - b);
    for m in 1..n {
        let m = m as f64;
        let s = 2.0 * m + a + b;
        let an = 2.0 * (m + 1.0) * (m + a + b + 1.0) * s;
        let bn = (s + 1.0) * (a * a - b * b);
        let cn = s * (s + 1.0) * (s + 2.0);
        let dn = 2.0 * (m + a) * (m + b) * (s + 2.0);
        let next = ((bn + cn * t) * cur - dn * prev) / an;
        prev = cur;
        cur = next;
    }
    cur
}

/// Fills `out[0..=n_max]` with P_0(t), ..., P_{n_max}(t) in one recurrence sweep.
pub fn eval_sequence(n_max: usize, params: &JacobiParams, t: f64, out: &mut Vec<f64>) {
    debug_assert!(t.abs() <= 1.0 + 1e-12);
    let (a, b) = (params.alpha, params.beta);
    out.clear();
    out.push(1.0);
    if n_max == 0 {
        return;
    }
    out.push(0.5 * (a + b + 2.0) * t + 0.5 * (a - b));
    for m in 1..n_max {
        let m = m as f64;
        let s = 2.0 * m + a + b;
        let an = 2.0 * (m + 1.0) * (m + a + b + 1.0) * s;
        let bn = (s + 1.0) * (a * a - b * b);
        let cn = s * (s + 1.0) * (s + 2.0);
        let dn = 2.0 * (m + a) * (m + b) * (s + 2.0);
        let next = ((bn + cn * t) * out[out.len() - 1] - dn * out[out.len() - 2]) / an;
        out.push(next);
    }
}

/// L^2_w norm squared: int P_n^2 (1-t)^alpha (1+t)^beta dt.
pub fn norm(n: usize, params: &JacobiParams) -> f64 {
    let (a, b) = (params.alpha, params.beta);
    if n == 0 {
        // Beta-function form; the generic formula is 0/0 at n = 0, a+b = -1.
        return params.total_mass();
    }
    let n = n as f64;
    let ln = (a + b + 1.0) * std::f64::consts::LN_2 - (2.0 * n + a + b + 1.0).ln()
        + ln_gamma(n + a + 1.0)
        + ln_gamma(n + b + 1.0)
        - ln_gamma(n + 1.0)
        - ln_gamma(n + a + b + 1.0);
    ln.exp()
}

/// d/dt P_n^{(alpha,beta)}(t) = (n+alpha+beta+1)/2 * P_{n-1}^{(alpha+1,beta+1)}(t).
pub fn derivative(n: usize, params: &JacobiParams, t: f64) -> Result<f64> {
    let t = check_arg(t, 0.0)?;
    Ok(derivative_unchecked(n, params, t))
}

pub(crate) fn derivative_unchecked(n: usize, params: &JacobiParams, t: f64) -> f64 {
    if n == 0 {
        return 0.0;
    }
    let (a, b) = (params.alpha, params.beta);
    let shifted = JacobiParams {
        alpha: a + 1.0,
        beta: b + 1.0,
    };
    0.5 * (n as f64 + a + b + 1.0) * eval_unchecked(n - 1, &shifted, t)
}

/// Fills `out[0..=n_max]` with d/dt P_0(t), ..., d/dt P_{n_max}(t).
pub fn derivative_sequence(n_max: usize, params: &JacobiParams, t: f64, out: &mut Vec<f64>) {
    let shifted = JacobiParams {
        alpha: params.alpha + 1.0,
        beta: params.beta + 1.0,
    };
    let mut inner = Vec::with_capacity(n_max);
    if n_max >= 1 {
        eval_sequence(n_max - 1, &shifted, t, &mut inner);
    }
    out.clear();
    out.push(0.0);
    for n in 1..=n_max {
        out.push(0.5 * (n as f64 + params.alpha + params.beta + 1.0) * inner[n - 1]);
    }
}

/// An m-point Gauss-Jacobi rule: nodes are the roots of P_m^{(alpha,beta)},
/// exact for polynomials of degree <= 2m - 1 against the Jacobi weight.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule1D {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    params: JacobiParams,
}

impl QuadratureRule1D {
    /// Builds the rule by safeguarded Newton iteration.
    ///
    /// Roots are bracketed by a sign-change scan over a dense Chebyshev-angle
    /// grid (10 samples per root), then polished individually; no deflation.
    /// Weights come from the derivative formula
    ///   w_q = G_m / ((1 - t_q^2) P_m'(t_q)^2),  G_m = (2m+alpha+beta+1) h_m,
    /// and are rescaled so their sum equals the exact total mass, removing
    /// last-bit drift that otherwise pollutes orthogonality checks.
    pub fn gauss(m: usize, params: JacobiParams) -> Result<Self> {
        assert!(m >= 1, "quadrature rule needs at least one point");
        let nodes = find_roots(m, &params)?;

        let g = (2.0 * m as f64 + params.alpha + params.beta + 1.0) * norm(m, &params);
        let mut weights: Vec<f64> = nodes
            .iter()
            .map(|&t| {
                let dp = derivative_unchecked(m, &params, t);
                g / ((1.0 - t * t) * dp * dp)
            })
            .collect();

        let mass = params.total_mass();
        let sum: f64 = weights.iter().sum();
        let scale = mass / sum;
        for w in &mut weights {
            *w *= scale;
        }

        Ok(Self {
            nodes,
            weights,
            params,
        })
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn params(&self) -> &JacobiParams {
        &self.params
    }

    /// Sum of w_q f(t_q), accumulated in node order.
    pub fn integrate<F: Fn(f64) -> f64>(&self, f: F) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&t, &w)| w * f(t))
            .sum()
    }
}

fn find_roots(m: usize, params: &JacobiParams) -> Result<Vec<f64>> {
    // Dense scan in the Chebyshev angle; roots of P_m are close to uniformly
    // spaced in theta, so 10x oversampling cannot skip a bracket at the
    // degrees used here (m < ~500).
    let samples = 10 * m + 1;
    let mut ts = Vec::with_capacity(samples);
    let mut ps = Vec::with_capacity(samples);
    for i in 0..samples {
        let theta = std::f64::consts::PI * i as f64 / (samples - 1) as f64;
        let t = theta.cos();
        ts.push(t);
        ps.push(eval_unchecked(m, params, t));
    }

    let mut roots = Vec::with_capacity(m);
    let mut i = 0;
    while i + 1 < samples {
        if ps[i] == 0.0 {
            roots.push(ts[i]);
            i += 1;
            continue;
        }
        if ps[i].signum() != ps[i + 1].signum() && ps[i + 1] != 0.0 {
            roots.push(polish_root(
                m,
                params,
                ts[i + 1],
                ts[i],
                ps[i + 1],
                ps[i],
                roots.len(),
            )?);
        }
        i += 1;
    }
    if ps[samples - 1] == 0.0 {
        roots.push(ts[samples - 1]);
    }

    if roots.len() != m {
        return Err(Error::RootBracketing {
            degree: m,
            expected: m,
            found: roots.len(),
        });
    }
    roots.sort_by(|a, b| a.partial_cmp(b).unwrap());
    for w in roots.windows(2) {
        if w[0] >= w[1] {
            return Err(Error::RootBracketing {
                degree: m,
                expected: m,
                found: roots.len(),
            });
        }
    }
    Ok(roots)
}

/// Newton iteration confined to the bracket [lo, hi]; falls back to bisection
/// whenever a Newton step would leave the bracket.
fn polish_root(
    m: usize,
    params: &JacobiParams,
    lo: f64,
    hi: f64,
    p_lo: f64,
    p_hi: f64,
    index: usize,
) -> Result<f64> {
    let p_scale = p_lo.abs().max(p_hi.abs());
    let (mut lo, mut hi) = (lo, hi);
    let (mut p_lo, mut p_hi) = (p_lo, p_hi);
    let mut t = 0.5 * (lo + hi);

    for _ in 0..100 {
        let p = eval_unchecked(m, params, t);
        if p == 0.0 || p.abs() <= 1e-15 * p_scale {
            return Ok(t);
        }
        // shrink the bracket
        if p.signum() == p_lo.signum() {
            lo = t;
            p_lo = p;
        } else {
            hi = t;
            p_hi = p;
        }
        let dp = derivative_unchecked(m, params, t);
        let mut next = t - p / dp;
        if !next.is_finite() || next <= lo.min(hi) || next >= lo.max(hi) {
            next = 0.5 * (lo + hi);
        }
        if (next - t).abs() <= 1e-15 * (1.0 + t.abs()) {
            return Ok(next);
        }
        t = next;
    }
    let _ = (p_lo, p_hi);
    Err(Error::RootConvergence { index, degree: m })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};

    fn params(a: f64, b: f64) -> JacobiParams {
        JacobiParams::new(a, b).unwrap()
    }

    #[test]
    fn rejects_bad_params() {
        assert!(JacobiParams::new(-1.0, 0.0).is_err());
        assert!(JacobiParams::new(0.0, -1.5).is_err());
        assert!(JacobiParams::new(f64::NAN, 0.0).is_err());
    }

    #[test]
    fn degree_zero_is_one() {
        assert_eq!(eval(0, &params(0.0, 0.5), 0.3).unwrap(), 1.0);
        assert_eq!(eval(0, &params(1.0, 1.0), -0.9).unwrap(), 1.0);
    }

    #[test]
    fn degree_one_value() {
        // P_1 = (a+b+2)t/2 + (a-b)/2
        assert_abs_diff_eq!(eval(1, &params(0.0, 0.5), 0.0).unwrap(), -0.25);
        assert_abs_diff_eq!(eval(2, &params(0.0, 0.0), 0.0).unwrap(), -0.5);
    }

    #[test]
    fn rejects_out_of_range_argument() {
        assert!(matches!(
            eval(3, &params(0.0, 0.0), 1.0 + 1e-9),
            Err(Error::ArgumentOutOfRange { .. })
        ));
        // clamped variant accepts boundary rounding
        let v = eval_clamped(3, &params(0.0, 0.0), 1.0 + 4e-16, 1e-12).unwrap();
        assert_abs_diff_eq!(v, 1.0, epsilon = 1e-14);
    }

    #[test]
    fn norms() {
        assert_relative_eq!(norm(0, &params(0.0, 0.0)), 2.0, max_relative = 1e-15);
        assert_relative_eq!(norm(1, &params(0.0, 0.0)), 2.0 / 3.0, max_relative = 1e-15);
        // int (1+t)^{1/2} dt = 4 sqrt(2) / 3
        assert_relative_eq!(
            norm(0, &params(0.0, 0.5)),
            4.0 * 2.0f64.sqrt() / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn endpoint_value_matches_gamma_ratio() {
        // P_n(1) = Gamma(n+alpha+1) / (n! Gamma(alpha+1))
        for &(a, b) in &[(0.0, 0.0), (0.0, 0.5), (1.0, 1.0), (0.0, 3.5), (2.0, 0.5)] {
            let p = params(a, b);
            for n in 0..=30usize {
                let expect =
                    (ln_gamma(n as f64 + a + 1.0) - ln_gamma(n as f64 + 1.0) - ln_gamma(a + 1.0))
                        .exp();
                let got = eval(n, &p, 1.0).unwrap();
                assert_relative_eq!(got, expect, max_relative = 1e-13);
            }
        }
    }

    #[test]
    fn derivative_examples() {
        assert_eq!(derivative(0, &params(0.5, 1.0), 0.2).unwrap(), 0.0);
        assert_abs_diff_eq!(derivative(1, &params(0.0, 0.0), 0.7).unwrap(), 1.0);
        assert_abs_diff_eq!(derivative(2, &params(0.0, 0.0), 0.5).unwrap(), 1.5);
    }

    #[test]
    fn derivative_matches_central_differences() {
        let cases = [(0.0, 0.0), (0.0, 0.5), (1.0, 1.0), (0.0, 4.5)];
        for &(a, b) in &cases {
            let p = params(a, b);
            for n in 1..=8usize {
                for i in 0..20 {
                    let t = -0.95 + 0.1 * i as f64 / 2.0;
                    let h = 1e-6;
                    let fd =
                        (eval_unchecked(n, &p, t + h) - eval_unchecked(n, &p, t - h)) / (2.0 * h);
                    let an = derivative(n, &p, t).unwrap();
                    assert_relative_eq!(an, fd, max_relative = 1e-6, epsilon = 1e-8);
                }
            }
        }
    }

    #[test]
    fn sturm_liouville_residual() {
        // (1-t^2) P'' + [(b+1)(1-t) - (a+1)(1+t)] P' + n(n+a+b+1) P = 0,
        // expanded symbolically from the weighted divergence form.
        for &(a, b) in &[(0.0, 0.0), (0.0, 0.5), (1.0, 1.0), (0.0, 2.5)] {
            let p = params(a, b);
            let pp = params(a + 1.0, b + 1.0);
            for n in 0..=10usize {
                let lambda = n as f64 * (n as f64 + a + b + 1.0);
                for i in 0..20 {
                    let t = -0.93 + 0.09 * i as f64;
                    let v = eval_unchecked(n, &p, t);
                    let dv = derivative_unchecked(n, &p, t);
                    let ddv = if n < 2 {
                        0.0
                    } else {
                        0.25 * (n as f64 + a + b + 1.0)
                            * (n as f64 + a + b + 2.0)
                            * eval_unchecked(n - 2, &params(a + 2.0, b + 2.0), t)
                    };
                    let _ = &pp;
                    let res = (1.0 - t * t) * ddv
                        + ((b + 1.0) * (1.0 - t) - (a + 1.0) * (1.0 + t)) * dv
                        + lambda * v;
                    let scale = lambda.abs().max(1.0) * v.abs().max(1.0);
                    assert!(
                        res.abs() <= 1e-10 * scale,
                        "n={n} a={a} b={b} t={t}: residual {res}"
                    );
                }
            }
        }
    }

    #[test]
    fn one_point_rule() {
        // single node at (b-a)/(a+b+2), weight = total mass
        let rule = QuadratureRule1D::gauss(1, params(0.0, 0.5)).unwrap();
        assert_abs_diff_eq!(rule.nodes()[0], 0.2, epsilon = 1e-15);
        assert_relative_eq!(
            rule.weights()[0],
            4.0 * 2.0f64.sqrt() / 3.0,
            max_relative = 1e-14
        );
    }

    #[test]
    fn legendre_exactness() {
        let rule = QuadratureRule1D::gauss(2, params(0.0, 0.0)).unwrap();
        assert_relative_eq!(rule.integrate(|t| t * t), 2.0 / 3.0, max_relative = 1e-14);
        for m in 1..=12 {
            let rule = QuadratureRule1D::gauss(m, params(0.0, 0.0)).unwrap();
            assert_relative_eq!(rule.integrate(|_| 1.0), 2.0, max_relative = 1e-14);
        }
    }

    #[test]
    fn nodes_increasing_weights_positive() {
        for &(m, a, b) in &[
            (7usize, 0.0, 0.5),
            (40, 0.0, 6.5),
            (25, 1.0, 1.0),
            (90, 0.0, 0.5),
        ] {
            let rule = QuadratureRule1D::gauss(m, params(a, b)).unwrap();
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().iter().all(|&t| t.abs() < 1.0));
            let sum: f64 = rule.weights().iter().sum();
            assert_relative_eq!(sum, rule.params().total_mass(), max_relative = 1e-13);
        }
    }

    #[test]
    fn weights_match_christoffel_function() {
        // Independent route: Gauss weights equal 1 / sum_k P_k(t)^2 / h_k.
        for &(m, a, b) in &[
            (5usize, 0.0, 0.0),
            (12, 0.0, 0.5),
            (9, 1.0, 1.0),
            (20, 0.0, 4.5),
        ] {
            let p = params(a, b);
            let rule = QuadratureRule1D::gauss(m, p).unwrap();
            let mut seq = Vec::new();
            for (&t, &w) in rule.nodes().iter().zip(rule.weights()) {
                eval_sequence(m - 1, &p, t, &mut seq);
                let christoffel: f64 = 1.0
                    / seq
                        .iter()
                        .enumerate()
                        .map(|(k, &v)| v * v / norm(k, &p))
                        .sum::<f64>();
                assert_relative_eq!(w, christoffel, max_relative = 1e-12);
            }
        }
    }

    proptest::proptest! {
        #[test]
        fn reflection_symmetry(
            n in 0usize..12,
            a in -0.9f64..3.0,
            b in -0.9f64..3.0,
            t in -1.0f64..1.0,
        ) {
            // P_n^{(a,b)}(-t) = (-1)^n P_n^{(b,a)}(t)
            let pab = params(a, b);
            let pba = params(b, a);
            let lhs = eval(n, &pab, -t).unwrap();
            let rhs = (-1.0f64).powi(n as i32) * eval(n, &pba, t).unwrap();
            let scale = lhs.abs().max(rhs.abs()).max(1.0);
            proptest::prop_assert!((lhs - rhs).abs() <= 1e-12 * scale);
        }
    }

    #[test]
    fn discrete_orthogonality() {
        let mut param_list = vec![(0.0, 0.0), (0.0, 0.5), (1.0, 1.0)];
        for n in 0..=6 {
            param_list.push((0.0, n as f64 + 0.5));
        }
        for &(a, b) in &param_list {
            let p = params(a, b);
            for &m in &[5usize, 17, 40] {
                let rule = QuadratureRule1D::gauss(m, p).unwrap();
                let mut seq = vec![Vec::new(); m];
                for (q, &t) in rule.nodes().iter().enumerate() {
                    eval_sequence(m - 1, &p, t, &mut seq[q]);
                }
                for i in 0..m {
                    for j in i..m {
                        let s: f64 = (0..m)
                            .map(|q| rule.weights()[q] * seq[q][i] * seq[q][j])
                            .sum();
                        let expect = if i == j { norm(i, &p) } else { 0.0 };
                        let tol = 1e-12 * norm(i, &p).max(norm(j, &p));
                        assert!(
                            (s - expect).abs() <= tol,
                            "m={m} a={a} b={b} i={i} j={j}: {s} vs {expect}"
                        );
                    }
                }
            }
        }
    }
}
