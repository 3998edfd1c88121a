//! The complementary Gaussian distribution function and its inverse.

use statrs::function::erf::erfc_inv;

use crate::error::{Error, Result};

const INV_SQRT_2PI: f64 = 0.398_942_280_401_432_7;

/// `Q(x) = P(N(0,1) > x)`.
pub fn q_func(x: f64) -> f64 {
    0.5 * libm::erfc(x / std::f64::consts::SQRT_2)
}

fn phi(x: f64) -> f64 {
    INV_SQRT_2PI * (-0.5 * x * x).exp()
}

/// `Q⁻¹(p)` for `p ∈ (0, 1)`: the statrs inverse, polished by Newton steps on `Q(x) - p`.
pub fn q_inv(p: f64) -> Result<f64> {
    if !(p > 0.0 && p < 1.0) {
        return Err(Error::Parameter(format!("q_inv needs p in (0, 1), got {p}")));
    }
    let mut x = std::f64::consts::SQRT_2 * erfc_inv(2.0 * p);
    for _ in 0..4 {
        let d = phi(x);
        if d == 0.0 {
            break;
        }
        let step = (q_func(x) - p) / d;
        x += step;
        if step.abs() <= 1e-16 * x.abs().max(1.0) {
            break;
        }
    }
    Ok(x)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn symmetric_point() {
        assert_eq!(q_func(0.0), 0.5);
        assert_eq!(q_inv(0.5).unwrap(), 0.0);
    }

    #[test]
    fn domain() {
        assert!(q_inv(0.0).is_err());
        assert!(q_inv(1.0).is_err());
        assert!(q_inv(f64::NAN).is_err());
    }
}
