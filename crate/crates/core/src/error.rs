//! Error type shared by all modules of the crate.

use thiserror::Error;

/// Errors produced by basis construction, quadrature, transforms and solves.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error(
        "jacobi parameters must satisfy alpha > -1 and beta > -1 (got alpha={alpha}, beta={beta})"
    )]
    InvalidJacobiParams { alpha: f64, beta: f64 },

    #[error("argument t={t} lies outside [-1, 1]")]
    ArgumentOutOfRange { t: f64 },

    #[error("quadrature root bracketing failed for the degree-{degree} rule: expected {expected} sign changes, found {found}")]
    RootBracketing {
        degree: usize,
        expected: usize,
        found: usize,
    },

    #[error("root {index} of the degree-{degree} Jacobi polynomial did not converge")]
    RootConvergence { index: usize, degree: usize },

    #[error("polar angle theta={theta} lies outside [0, pi]")]
    ThetaOutOfRange { theta: f64 },

    #[error("harmonic order l={l} lies outside 1..={max} for degree n={n}")]
    HarmonicOrderOutOfRange { n: usize, l: usize, max: usize },

    #[error("angular grid resolves degree {resolved} but degree {needed} is required")]
    GridTooCoarse { resolved: usize, needed: usize },

    #[error("angular sample count {got} does not match grid size {expected}")]
    SampleCountMismatch { expected: usize, got: usize },

    #[error("radial index k={k} must be at least 1 for the boundary-vanishing basis")]
    RadialIndexZero { k: usize },

    #[error("ball norm requires alpha > -1 (got {alpha})")]
    InvalidBallAlpha { alpha: f64 },

    #[error("point ({x}, {y}, {z}) lies outside the closed unit ball")]
    PointOutsideBall { x: f64, y: f64, z: f64 },

    #[error("non-finite sample {value} at grid point ({x}, {y}, {z})")]
    NonFiniteSample { value: f64, x: f64, y: f64, z: f64 },

    #[error("polynomial degree must be at least 2 (got {0})")]
    DegreeTooSmall(usize),

    #[error(
        "coefficient count {got} does not match the {expected} basis functions of degree {degree}"
    )]
    CoefficientCountMismatch {
        degree: usize,
        expected: usize,
        got: usize,
    },

    #[error("unknown manufactured case `{0}` (expected `case1` or `case2`)")]
    UnknownCase(String),

    #[error("convergence rates require strictly positive errors (got {0})")]
    NonPositiveError(f64),

    #[error("convergence rates require strictly increasing degrees")]
    DegreesNotIncreasing,
}

pub type Result<T> = std::result::Result<T, Error>;
