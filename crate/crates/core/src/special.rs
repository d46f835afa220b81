//! Gamma-function helpers.
//!
//! All normalization constants in this crate are ratios of Gamma functions
//! whose arguments grow with the polynomial degree. Gamma(172) already
//! overflows an f64, so every constant is assembled in log space and
//! exponentiated once.

/// Natural log of the Gamma function for positive arguments.
pub fn ln_gamma(x: f64) -> f64 {
    debug_assert!(x > 0.0, "ln_gamma requires a positive argument, got {x}");
    libm::lgamma(x)
}

/// Log of the Pochhammer symbol (a)_k = Gamma(a + k) / Gamma(a) for a > 0.
pub fn ln_pochhammer(a: f64, k: usize) -> f64 {
    if k == 0 {
        return 0.0;
    }
    ln_gamma(a + k as f64) - ln_gamma(a)
}
