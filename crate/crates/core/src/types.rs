//! Value types shared by the engine, the samplers and the experiment drivers.
//!
//! Complex scalars are [`C64`]. Everything here is an immutable value type;
//! constructors validate the invariants once so downstream code can rely on
//! them without re-checking.

use std::fmt;
use std::str::FromStr;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

/// Default upper bound on the number of spectral points.
pub const DEFAULT_POINT_CAP: usize = 2000;

/// Poles closer than this are treated as coincident.
pub const MIN_POLE_SEPARATION: f64 = 1e-12;

pub fn is_finite(z: C64) -> bool {
    z.re.is_finite() && z.im.is_finite()
}

/// Parses the `RE+IMi` / `RE-IMi` literal form, e.g. `0.0+1.0i` or `-2.5e-1-3i`.
/// A bare real number is accepted as a value with zero imaginary part.
pub fn parse_complex(s: &str) -> Result<C64> {
    let s = s.trim();
    let bad = || Error::InvalidInput(format!("malformed complex literal `{s}`"));
    let Some(body) = s.strip_suffix('i') else {
        let re: f64 = s.parse().map_err(|_| bad())?;
        return if re.is_finite() { Ok(C64::new(re, 0.0)) } else { Err(bad()) };
    };
    // split at the last sign that is neither leading nor part of an exponent
    let bytes = body.as_bytes();
    let split = (1..bytes.len())
        .rev()
        .find(|&k| (bytes[k] == b'+' || bytes[k] == b'-') && !matches!(bytes[k - 1], b'e' | b'E'))
        .ok_or_else(bad)?;
    let re: f64 = body[..split].parse().map_err(|_| bad())?;
    let im_str = &body[split..];
    let im: f64 = match im_str {
        "+" => 1.0,
        "-" => -1.0,
        _ => im_str.parse().map_err(|_| bad())?,
    };
    let z = C64::new(re, im);
    if is_finite(z) {
        Ok(z)
    } else {
        Err(bad())
    }
}

/// Formats a complex number in the literal form accepted by [`parse_complex`].
pub fn format_complex(z: C64) -> String {
    if z.im.is_sign_negative() {
        format!("{:?}-{:?}i", z.re, -z.im)
    } else {
        format!("{:?}+{:?}i", z.re, z.im)
    }
}

/// A pole in the upper half-plane together with its norming constant.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralPoint {
    pub z: C64,
    pub c: C64,
}

impl SpectralPoint {
    pub fn new(z: C64, c: C64) -> Result<Self> {
        if !is_finite(z) || !is_finite(c) {
            return Err(Error::InvalidInput("non-finite spectral point".into()));
        }
        if z.im <= 0.0 {
            return Err(Error::InvariantViolation(format!(
                "pole {} is not in the upper half-plane",
                format_complex(z)
            )));
        }
        Ok(Self { z, c })
    }
}

/// Discrete scattering data: distinct upper-half-plane poles with constants.
/// The conjugate poles are implicit.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScatteringData {
    points: Vec<SpectralPoint>,
}

impl ScatteringData {
    pub fn new(points: Vec<SpectralPoint>) -> Result<Self> {
        Self::with_cap(points, DEFAULT_POINT_CAP)
    }

    pub fn with_cap(points: Vec<SpectralPoint>, cap: usize) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvariantViolation("scattering data is empty".into()));
        }
        if points.len() > cap {
            return Err(Error::InvariantViolation(format!(
                "{} points exceed the cap of {cap}",
                points.len()
            )));
        }
        for p in &points {
            SpectralPoint::new(p.z, p.c)?;
        }
        for (j, p) in points.iter().enumerate() {
            for q in &points[j + 1..] {
                if (p.z - q.z).norm() <= MIN_POLE_SEPARATION {
                    return Err(Error::InvariantViolation(format!(
                        "coincident poles at {}",
                        format_complex(p.z)
                    )));
                }
            }
        }
        Ok(Self { points })
    }

    /// Convenience constructor from parallel slices of poles and constants.
    pub fn from_pairs(z: &[C64], c: &[C64]) -> Result<Self> {
        if z.len() != c.len() {
            return Err(Error::LengthMismatch(z.len(), c.len()));
        }
        Self::new(
            z.iter()
                .zip(c)
                .map(|(&z, &c)| SpectralPoint { z, c })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.points.len()
    }

    pub fn is_empty(&self) -> bool {
        self.points.is_empty()
    }

    pub fn points(&self) -> &[SpectralPoint] {
        &self.points
    }

    pub fn poles(&self) -> impl Iterator<Item = C64> + '_ {
        self.points.iter().map(|p| p.z)
    }

    pub fn constants(&self) -> impl Iterator<Item = C64> + '_ {
        self.points.iter().map(|p| p.c)
    }

    /// Returns a copy with every constant replaced by `f(z, c)`.
    pub fn map_constants(&self, f: impl Fn(C64, C64) -> C64) -> Self {
        Self {
            points: self
                .points
                .iter()
                .map(|p| SpectralPoint { z: p.z, c: f(p.z, p.c) })
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvaluationPoint {
    pub x: f64,
    pub t: f64,
}

impl EvaluationPoint {
    pub fn new(x: f64, t: f64) -> Self {
        Self { x, t }
    }
}

/// Tensor grid of evaluation points. Both axes strictly increasing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Grid {
    x_values: Vec<f64>,
    t_values: Vec<f64>,
}

impl Grid {
    pub fn new(x_values: Vec<f64>, t_values: Vec<f64>) -> Result<Self> {
        for (name, v) in [("x", &x_values), ("t", &t_values)] {
            if v.is_empty() {
                return Err(Error::InvalidInput(format!("{name} axis is empty")));
            }
            if v.iter().any(|a| !a.is_finite()) {
                return Err(Error::InvalidInput(format!("{name} axis is not finite")));
            }
            if v.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::InvalidInput(format!("{name} axis is not strictly increasing")));
            }
        }
        Ok(Self { x_values, t_values })
    }

    /// `nx` points spanning `[x_min, x_max]` and `nt` points spanning `[t_min, t_max]`.
    pub fn uniform(x_min: f64, x_max: f64, nx: usize, t_min: f64, t_max: f64, nt: usize) -> Result<Self> {
        Self::new(linspace(x_min, x_max, nx)?, linspace(t_min, t_max, nt)?)
    }

    pub fn single(at: EvaluationPoint) -> Self {
        Self { x_values: vec![at.x], t_values: vec![at.t] }
    }

    pub fn x_values(&self) -> &[f64] {
        &self.x_values
    }

    pub fn t_values(&self) -> &[f64] {
        &self.t_values
    }

    pub fn nx(&self) -> usize {
        self.x_values.len()
    }

    pub fn nt(&self) -> usize {
        self.t_values.len()
    }
}

/// `n` equispaced values from `a` to `b` inclusive; `n == 1` yields `[a]`.
pub fn linspace(a: f64, b: f64, n: usize) -> Result<Vec<f64>> {
    match n {
        0 => Err(Error::InvalidInput("linspace needs at least one point".into())),
        1 => Ok(vec![a]),
        _ => {
            if b <= a {
                return Err(Error::InvalidInput(format!("empty interval [{a}, {b}]")));
            }
            let h = (b - a) / (n - 1) as f64;
            Ok((0..n).map(|k| if k == n - 1 { b } else { a + h * k as f64 }).collect())
        }
    }
}

/// Density `beta(z, zbar) = (zbar - conj(center))^p * sum_k coeffs[k] (z - center)^k`.
///
/// With `center = 0` this is `zbar^p r(z)`; a nonzero center gives the shifted
/// forms `(zbar - conj(l0))^p r(z)` used for order-n and quadrature-domain densities.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DensitySpec {
    pub p: u32,
    pub coeffs: Vec<C64>,
    pub expansion_center: C64,
}

impl DensitySpec {
    pub fn new(p: u32, coeffs: Vec<C64>, expansion_center: C64) -> Result<Self> {
        let spec = Self { p, coeffs, expansion_center };
        spec.validate()?;
        Ok(spec)
    }

    pub fn constant(value: C64) -> Self {
        Self { p: 0, coeffs: vec![value], expansion_center: C64::new(0.0, 0.0) }
    }

    pub fn validate(&self) -> Result<()> {
        match self.coeffs.last() {
            None => Err(Error::InvalidInput("density has no coefficients".into())),
            Some(c) if *c == C64::new(0.0, 0.0) => {
                Err(Error::InvalidInput("leading density coefficient is zero".into()))
            }
            _ if !self.coeffs.iter().all(|&c| is_finite(c)) || !is_finite(self.expansion_center) => {
                Err(Error::InvalidInput("density has non-finite data".into()))
            }
            _ => Ok(()),
        }
    }

    /// The analytic factor `r(z)` (Horner evaluation).
    pub fn analytic_part(&self, z: C64) -> C64 {
        let u = z - self.expansion_center;
        self.coeffs
            .iter()
            .rev()
            .fold(C64::new(0.0, 0.0), |acc, &c| acc * u + c)
    }

    pub fn eval(&self, z: C64) -> C64 {
        let r = self.analytic_part(z);
        if self.p == 0 {
            r
        } else {
            (z.conj() - self.expansion_center.conj()).powu(self.p) * r
        }
    }
}

/// Evaluates `spec` at `z`.
pub fn eval_density(spec: &DensitySpec, z: C64) -> C64 {
    spec.eval(z)
}

impl fmt::Display for EvaluationPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "(x={}, t={})", self.x, self.t)
    }
}

/// Newtype wrapper so complex literals can be parsed with `str::parse`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexLiteral(pub C64);

impl FromStr for ComplexLiteral {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_complex(s).map(ComplexLiteral)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn complex_literals() {
        assert_eq!(parse_complex("0.0+1.0i").unwrap(), c(0.0, 1.0));
        assert_eq!(parse_complex("-1.5-2e-3i").unwrap(), c(-1.5, -2e-3));
        assert_eq!(parse_complex("1e-2+3E+1i").unwrap(), c(0.01, 30.0));
        assert_eq!(parse_complex("2").unwrap(), c(2.0, 0.0));
        assert_eq!(parse_complex("0+i").unwrap(), c(0.0, 1.0));
        assert!(parse_complex("1+2j").is_err());
        assert!(parse_complex("i").is_err());
        assert!(parse_complex("nan+1i").is_err());
        let z = c(-0.25, -3.5e-7);
        assert_eq!(parse_complex(&format_complex(z)).unwrap(), z);
    }

    #[test]
    fn density_examples() {
        let z = c(0.0, 1.0);
        assert_eq!(DensitySpec::constant(c(1.0, 0.0)).eval(c(3.0, -2.0)), c(1.0, 0.0));
        let rho: f64 = 0.1;
        let fig1 = DensitySpec::constant(c(PI / (rho * rho), 0.0));
        assert!((fig1.eval(z).re - 100.0 * PI).abs() < 1e-11);
        let zbar = DensitySpec::new(1, vec![c(1.0, 0.0)], c(0.0, 0.0)).unwrap();
        assert_eq!(zbar.eval(z), c(0.0, -1.0));
    }

    #[test]
    fn density_rejects_zero_leading() {
        assert!(DensitySpec::new(0, vec![c(1.0, 0.0), c(0.0, 0.0)], c(0.0, 0.0)).is_err());
        assert!(DensitySpec::new(0, vec![], c(0.0, 0.0)).is_err());
    }

    #[test]
    fn scattering_data_invariants() {
        let ok = ScatteringData::from_pairs(&[c(0.0, 1.0), c(0.1, 1.0)], &[c(1.0, 0.0); 2]);
        assert!(ok.is_ok());
        let dup = ScatteringData::from_pairs(&[c(0.0, 1.0), c(0.0, 1.0)], &[c(1.0, 0.0); 2]);
        assert!(matches!(dup, Err(Error::InvariantViolation(_))));
        let lower = ScatteringData::from_pairs(&[c(0.0, -1.0)], &[c(1.0, 0.0)]);
        assert!(matches!(lower, Err(Error::InvariantViolation(_))));
        assert!(ScatteringData::new(vec![]).is_err());
        let many: Vec<_> = (0..5)
            .map(|k| SpectralPoint { z: c(k as f64, 1.0), c: c(1.0, 0.0) })
            .collect();
        assert!(ScatteringData::with_cap(many, 4).is_err());
    }

    #[test]
    fn grid_invariants() {
        assert!(Grid::new(vec![0.0, 1.0], vec![0.0]).is_ok());
        assert!(Grid::new(vec![1.0, 0.0], vec![0.0]).is_err());
        assert!(Grid::new(vec![], vec![0.0]).is_err());
        let g = Grid::uniform(-1.0, 1.0, 5, 0.0, 0.0, 1).unwrap();
        assert_eq!(g.x_values(), &[-1.0, -0.5, 0.0, 0.5, 1.0]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn horner_matches_power_sum(
                p in 0u32..4,
                coeffs in prop::collection::vec((-3.0f64..3.0, -3.0f64..3.0), 1..7),
                center in (-1.0f64..1.0, -1.0f64..1.0),
                z in (-2.0f64..2.0, -2.0f64..2.0),
            ) {
                let mut coeffs: Vec<C64> = coeffs.into_iter().map(|(a, b)| C64::new(a, b)).collect();
                if coeffs.last().unwrap().norm() < 1e-3 {
                    *coeffs.last_mut().unwrap() = C64::new(1.0, 0.0);
                }
                let center = C64::new(center.0, center.1);
                let z = C64::new(z.0, z.1);
                let spec = DensitySpec::new(p, coeffs.clone(), center).unwrap();
                let u = z - center;
                let naive: C64 = coeffs.iter().enumerate().map(|(k, &a)| a * u.powu(k as u32)).sum::<C64>()
                    * (z.conj() - center.conj()).powu(p);
                let got = spec.eval(z);
                let scale = coeffs.iter().enumerate().map(|(k, a)| a.norm() * u.norm().powi(k as i32)).sum::<f64>()
                    * (z - center).norm().powi(p as i32);
                prop_assert!((got - naive).norm() <= 1e-14 * scale.max(1e-300) * 8.0);
            }
        }
    }
}
