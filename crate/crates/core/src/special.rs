//! Complete elliptic integral of the first kind.

use std::f64::consts::FRAC_PI_2;

use crate::error::{Error, Result};

/// `K(m) = int_0^{pi/2} (1 - m sin^2 t)^{-1/2} dt` via the arithmetic-geometric mean.
pub fn complete_elliptic_k(m: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&m) {
        return Err(Error::InvalidInput(format!("elliptic parameter {m} outside [0, 1)")));
    }
    let (mut a, mut b) = (1.0f64, (1.0 - m).sqrt());
    for _ in 0..64 {
        if (a - b).abs() <= 4.0 * f64::EPSILON * a {
            break;
        }
        (a, b) = (0.5 * (a + b), (a * b).sqrt());
    }
    let a = 0.5 * (a + b);
    Ok(FRAC_PI_2 / a)
}
