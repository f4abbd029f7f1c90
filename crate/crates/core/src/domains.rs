//! Spectral domains, their Schwarz-function data and the analytic
//! predictions used as targets by the experiments.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::types::{format_complex, is_finite, DensitySpec, ScatteringData, SpectralPoint, C64};

/// Monte-Carlo sample count for areas without a closed form.
pub const AREA_SAMPLES: usize = 1_000_000;

/// Seed used by [`Domain::area`].
pub const DEFAULT_AREA_SEED: u64 = 0x5eed_a4ea;

/// Evaluation points closer than this to a spectral point are rejected by [`jump_field`].
pub const JUMP_POLE_EXCLUSION: f64 = 1e-6;

/// Orientation of the jump of the ellipse Schwarz function across the focal
/// segment, measured as (right limit) - (left limit).
pub const DELTA_S_SIGN: f64 = 1.0;

const BOUNDARY_SAMPLES: usize = 2048;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiskDomain {
    pub center: C64,
    pub radius: f64,
}

impl DiskDomain {
    pub fn new(center: C64, radius: f64) -> Result<Self> {
        if !is_finite(center) || !(radius > 0.0) || !radius.is_finite() {
            return Err(Error::InvalidInput("disk needs a finite center and positive radius".into()));
        }
        if center.im - radius <= 0.0 {
            return Err(Error::InvalidInput(format!(
                "disk around {} with radius {radius} leaves the upper half-plane",
                format_complex(center)
            )));
        }
        Ok(Self { center, radius })
    }
}

/// `{ z : |(z - d0)^m - d1| < rho }`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuadratureDomain {
    pub d0: C64,
    pub d1: C64,
    pub rho: f64,
    pub m: u32,
}

impl QuadratureDomain {
    pub fn new(d0: C64, d1: C64, rho: f64, m: u32) -> Result<Self> {
        if !is_finite(d0) || !is_finite(d1) || !(rho > 0.0) || !rho.is_finite() {
            return Err(Error::InvalidInput("quadrature domain needs finite d0, d1 and rho > 0".into()));
        }
        if m == 0 {
            return Err(Error::InvalidInput("quadrature domain order must be at least 1".into()));
        }
        let dom = Self { d0, d1, rho, m };
        let lowest = dom.boundary_points(BOUNDARY_SAMPLES).map(|z| z.im).fold(f64::INFINITY, f64::min);
        if lowest <= 0.0 {
            return Err(Error::InvalidInput("quadrature domain leaves the upper half-plane".into()));
        }
        Ok(dom)
    }

    /// Points on the boundary: every m-th root of `d1 + rho e^{i phi}`, shifted by `d0`.
    pub fn boundary_points(&self, samples: usize) -> impl Iterator<Item = C64> + '_ {
        let m = self.m;
        (0..samples).flat_map(move |k| {
            let phi = 2.0 * PI * k as f64 / samples as f64;
            let w = self.d1 + C64::from_polar(self.rho, phi);
            let root = w.powf(1.0 / m as f64);
            (0..m).map(move |j| self.d0 + root * C64::from_polar(1.0, 2.0 * PI * j as f64 / m as f64))
        })
    }

    /// `(S(z) - conj d0)^m = conj d1 + rho^2 / ((z - d0)^m - d1)`; equals
    /// `(conj z - conj d0)^m` on the boundary.
    pub fn schwarz_power(&self, z: C64) -> C64 {
        self.d1.conj() + self.rho * self.rho / ((z - self.d0).powu(self.m) - self.d1)
    }
}

/// Ellipse with foci `i alpha1`, `i alpha2` and semi-major axis `rho` (vertical).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EllipseDomain {
    pub alpha1: f64,
    pub alpha2: f64,
    pub rho: f64,
}

impl EllipseDomain {
    pub fn new(alpha1: f64, alpha2: f64, rho: f64) -> Result<Self> {
        if ![alpha1, alpha2, rho].iter().all(|v| v.is_finite()) {
            return Err(Error::InvalidInput("ellipse parameters must be finite".into()));
        }
        if !(0.0 < alpha1 && alpha1 < alpha2) {
            return Err(Error::InvalidInput("ellipse needs 0 < alpha1 < alpha2".into()));
        }
        let dom = Self { alpha1, alpha2, rho };
        if rho <= dom.focal_half_distance() {
            return Err(Error::InvalidInput("ellipse needs rho > (alpha2 - alpha1)/2".into()));
        }
        if dom.center_height() - rho <= 0.0 {
            return Err(Error::InvalidInput("ellipse leaves the upper half-plane".into()));
        }
        Ok(dom)
    }

    /// `c = (alpha2 - alpha1) / 2`.
    pub fn focal_half_distance(&self) -> f64 {
        0.5 * (self.alpha2 - self.alpha1)
    }

    /// `y0 = (alpha1 + alpha2) / 2`.
    pub fn center_height(&self) -> f64 {
        0.5 * (self.alpha1 + self.alpha2)
    }

    /// Horizontal semi-axis `sqrt(rho^2 - c^2)`.
    pub fn minor_semi_axis(&self) -> f64 {
        let c = self.focal_half_distance();
        (self.rho * self.rho - c * c).sqrt()
    }

    /// `sqrt((z - i alpha1)(z - i alpha2))`, branch cut on the focal segment, `~ z` at infinity.
    fn root(&self, z: C64) -> C64 {
        let u = z - C64::new(0.0, self.center_height());
        let c = self.focal_half_distance();
        u * (C64::new(1.0, 0.0) + c * c / (u * u)).sqrt()
    }

    /// Schwarz function; equals `conj z` on the boundary.
    pub fn schwarz(&self, z: C64) -> C64 {
        let c2 = self.focal_half_distance().powi(2);
        let y0 = C64::new(0.0, self.center_height());
        let u = z - y0;
        u * (1.0 - 2.0 * self.rho * self.rho / c2) + self.root(z) * (2.0 * self.rho / c2 * self.minor_semi_axis()) - y0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Domain {
    Disk(DiskDomain),
    Quadrature(QuadratureDomain),
    Ellipse(EllipseDomain),
}

/// Area with its Monte-Carlo standard error (zero for closed forms).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AreaEstimate {
    pub value: f64,
    pub std_error: f64,
}

/// Axis-aligned box `[re_min, re_max] x [im_min, im_max]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BoundingBox {
    pub re_min: f64,
    pub re_max: f64,
    pub im_min: f64,
    pub im_max: f64,
}

impl BoundingBox {
    pub fn area(&self) -> f64 {
        (self.re_max - self.re_min) * (self.im_max - self.im_min)
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> C64 {
        C64::new(
            self.re_min + (self.re_max - self.re_min) * rng.random::<f64>(),
            self.im_min + (self.im_max - self.im_min) * rng.random::<f64>(),
        )
    }
}

impl Domain {
    pub fn contains(&self, z: C64) -> bool {
        match self {
            Domain::Disk(d) => (z - d.center).norm() < d.radius,
            Domain::Quadrature(q) => ((z - q.d0).powu(q.m) - q.d1).norm() < q.rho,
            Domain::Ellipse(e) => {
                let f1 = C64::new(0.0, e.alpha1);
                let f2 = C64::new(0.0, e.alpha2);
                (z - f1).norm() + (z - f2).norm() < 2.0 * e.rho
            }
        }
    }

    pub fn bounding_box(&self) -> BoundingBox {
        match self {
            Domain::Disk(d) => BoundingBox {
                re_min: d.center.re - d.radius,
                re_max: d.center.re + d.radius,
                im_min: d.center.im - d.radius,
                im_max: d.center.im + d.radius,
            },
            Domain::Quadrature(q) => {
                let r = (q.d1.norm() + q.rho).powf(1.0 / q.m as f64);
                BoundingBox {
                    re_min: q.d0.re - r,
                    re_max: q.d0.re + r,
                    im_min: q.d0.im - r,
                    im_max: q.d0.im + r,
                }
            }
            Domain::Ellipse(e) => {
                let a = e.minor_semi_axis();
                let y0 = e.center_height();
                BoundingBox { re_min: -a, re_max: a, im_min: y0 - e.rho, im_max: y0 + e.rho }
            }
        }
    }

    /// Area with the default Monte-Carlo seed.
    pub fn area(&self) -> AreaEstimate {
        self.area_with_seed(DEFAULT_AREA_SEED)
    }

    /// Closed form for disks, ellipses and order-1 quadrature domains;
    /// Monte Carlo over the bounding box otherwise.
    pub fn area_with_seed(&self, seed: u64) -> AreaEstimate {
        let exact = |value| AreaEstimate { value, std_error: 0.0 };
        match self {
            Domain::Disk(d) => exact(PI * d.radius * d.radius),
            Domain::Quadrature(q) if q.m == 1 => exact(PI * q.rho * q.rho),
            Domain::Ellipse(e) => exact(PI * e.rho * e.minor_semi_axis()),
            Domain::Quadrature(_) => {
                let bb = self.bounding_box();
                let mut rng = ChaCha8Rng::seed_from_u64(seed);
                let hits = (0..AREA_SAMPLES).filter(|_| self.contains(bb.sample(&mut rng))).count();
                let p = hits as f64 / AREA_SAMPLES as f64;
                AreaEstimate {
                    value: p * bb.area(),
                    std_error: (p * (1.0 - p) / AREA_SAMPLES as f64).sqrt() * bb.area(),
                }
            }
        }
    }
}

/// Closed-form n-soliton limit for a quadrature domain of order `n = m`
/// with density `(conj z - conj d0)^(n-1) r(z)` times `n`.
///
/// Poles are `lambda_j = d0 + d1^(1/n) e^(2 pi i j/n)` (principal root, in order
/// of increasing phase) with constants `rho^2 r(lambda_j) / prod_{k != j}(lambda_j - lambda_k)`,
/// where `r` is the analytic part of the density divided by `n`.
pub fn quadrature_prediction(domain: &QuadratureDomain, density: &DensitySpec) -> Result<ScatteringData> {
    density.validate()?;
    let n = domain.m;
    if density.p != n - 1 {
        return Err(Error::DensityMismatch(format!(
            "order-{n} domain needs conj-degree {}, got {}",
            n - 1,
            density.p
        )));
    }
    if n >= 2 && (density.expansion_center - domain.d0).norm() > 1e-12 * (1.0 + domain.d0.norm()) {
        return Err(Error::DensityMismatch(format!(
            "density must be centred at d0 = {}",
            format_complex(domain.d0)
        )));
    }
    if n >= 2 && domain.d1.norm() == 0.0 {
        return Err(Error::RootsNotDistinct);
    }
    let root = domain.d1.powf(1.0 / n as f64);
    let lambdas: Vec<C64> = (0..n)
        .map(|j| domain.d0 + root * C64::from_polar(1.0, 2.0 * PI * j as f64 / n as f64))
        .collect();
    if let Some(bad) = lambdas.iter().find(|l| l.im <= 0.0) {
        return Err(Error::RootsOutsideUpperHalfPlane { root: format_complex(*bad) });
    }
    let rho2 = domain.rho * domain.rho;
    let points = lambdas
        .iter()
        .enumerate()
        .map(|(j, &l)| {
            let denom: C64 = lambdas
                .iter()
                .enumerate()
                .filter(|&(k, _)| k != j)
                .map(|(_, &lk)| l - lk)
                .product();
            let r = density.analytic_part(l) / n as f64;
            SpectralPoint::new(l, r * rho2 / denom)
        })
        .collect::<Result<Vec<_>>>()?;
    ScatteringData::new(points)
}

/// `delta S(iy) = sign * (4 rho / c^2) sqrt(rho^2 - c^2) sqrt((y - alpha1)(alpha2 - y))`
/// on the open focal segment.
pub fn ellipse_schwarz_jump(domain: &EllipseDomain, y: f64) -> Result<C64> {
    let (lo, hi) = (domain.alpha1, domain.alpha2);
    if !(lo < y && y < hi) {
        return Err(Error::OutOfSegment { y, lo, hi });
    }
    let c = domain.focal_half_distance();
    let v = DELTA_S_SIGN * 4.0 * domain.rho / (c * c) * domain.minor_semi_axis() * ((y - lo) * (hi - y)).sqrt();
    Ok(C64::new(v, 0.0))
}

/// Midpoint-rule discretisation of the focal segment: `w_j = i(alpha1 + (j + 1/2) h)`
/// with constants `r(w_j) delta S(w_j) h / (2 pi)`.
pub fn segment_discretization(domain: &EllipseDomain, density: &DensitySpec, n: usize) -> Result<ScatteringData> {
    density.validate()?;
    if density.p != 0 {
        return Err(Error::DensityMismatch("segment discretisation needs an analytic density".into()));
    }
    if n < 2 {
        return Err(Error::InvalidInput("segment discretisation needs at least 2 points".into()));
    }
    let h = (domain.alpha2 - domain.alpha1) / n as f64;
    let points = (0..n)
        .map(|j| {
            let y = domain.alpha1 + (j as f64 + 0.5) * h;
            let w = C64::new(0.0, y);
            let c = density.analytic_part(w) * ellipse_schwarz_jump(domain, y)? * (h / (2.0 * PI));
            SpectralPoint::new(w, c)
        })
        .collect::<Result<Vec<_>>>()?;
    ScatteringData::new(points)
}

/// `sum_j c_j / (z - z_j)`.
pub fn jump_field(data: &ScatteringData, z: C64) -> Result<C64> {
    let distance = data.poles().map(|p| (z - p).norm()).fold(f64::INFINITY, f64::min);
    if distance < JUMP_POLE_EXCLUSION {
        return Err(Error::PoleTooClose { distance });
    }
    Ok(data.points().iter().map(|p| p.c / (z - p.z)).sum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn constructors_validate() {
        assert!(DiskDomain::new(c(0.0, 1.0), 0.1).is_ok());
        assert!(DiskDomain::new(c(0.0, 1.0), 1.0).is_err());
        assert!(EllipseDomain::new(0.5, 1.5, 0.5).is_err());
        assert!(EllipseDomain::new(0.5, 1.5, 1.0).is_err());
        assert!(EllipseDomain::new(0.5, 1.5, 0.75).is_ok());
        assert!(QuadratureDomain::new(c(0.0, 1.0), c(4e-4, 0.0), 1e-3, 2).is_ok());
        assert!(QuadratureDomain::new(c(0.0, 0.1), c(1.0, 0.0), 0.5, 2).is_err());
        assert!(QuadratureDomain::new(c(0.0, 1.0), c(0.0, 0.0), 0.1, 0).is_err());
    }

    #[test]
    fn closed_form_areas() {
        let e = Domain::Ellipse(EllipseDomain::new(0.5, 1.5, 0.75).unwrap());
        assert!((e.area().value - PI * 0.75 * 1.25f64.sqrt() / 2.0).abs() < 1e-12);
        let d = Domain::Disk(DiskDomain::new(c(0.0, 1.0), 0.1).unwrap());
        assert_eq!(d.area().std_error, 0.0);
    }

    #[test]
    fn quadrature_m1_is_disk() {
        let q = Domain::Quadrature(QuadratureDomain::new(c(0.0, 1.0), c(0.0, 0.0), 0.1, 1).unwrap());
        assert!((q.area().value - PI * 0.01).abs() < 1e-15);
        assert!(q.contains(c(0.05, 1.0)) && !q.contains(c(0.11, 1.0)));
    }

    #[test]
    fn two_soliton_example() {
        let q = QuadratureDomain::new(c(0.0, 1.0), c(4e-4, 0.0), 1e-3, 2).unwrap();
        let density = DensitySpec::new(1, vec![c(2.0, 0.0)], q.d0).unwrap();
        let data = quadrature_prediction(&q, &density).unwrap();
        let p = data.points();
        assert!((p[0].z - c(0.02, 1.0)).norm() < 1e-14);
        assert!((p[1].z - c(-0.02, 1.0)).norm() < 1e-14);
        assert!((p[0].c - c(2.5e-5, 0.0)).norm() < 1e-18);
        assert!((p[1].c - c(-2.5e-5, 0.0)).norm() < 1e-18);
    }

    #[test]
    fn prediction_errors() {
        let q = QuadratureDomain::new(c(0.0, 1.0), c(0.0, 0.0), 1e-3, 2).unwrap();
        let density = DensitySpec::new(1, vec![c(2.0, 0.0)], q.d0).unwrap();
        assert!(matches!(quadrature_prediction(&q, &density), Err(Error::RootsNotDistinct)));
        let q = QuadratureDomain::new(c(0.0, 1.0), c(4e-4, 0.0), 1e-3, 2).unwrap();
        let wrong_degree = DensitySpec::constant(c(1.0, 0.0));
        assert!(matches!(quadrature_prediction(&q, &wrong_degree), Err(Error::DensityMismatch(_))));
        let wrong_center = DensitySpec::new(1, vec![c(2.0, 0.0)], c(0.0, 0.0)).unwrap();
        assert!(matches!(quadrature_prediction(&q, &wrong_center), Err(Error::DensityMismatch(_))));
    }

    #[test]
    fn one_soliton_prediction() {
        let q = QuadratureDomain::new(c(0.0, 1.0), c(0.0, 0.0), 0.1, 1).unwrap();
        let density = DensitySpec::constant(c(PI / 0.01, 0.0));
        let data = quadrature_prediction(&q, &density).unwrap();
        assert!((data.points()[0].c - c(PI, 0.0)).norm() < 1e-13);
        assert_eq!(data.points()[0].z, c(0.0, 1.0));
    }

    #[test]
    fn schwarz_jump_examples() {
        let e = EllipseDomain::new(0.5, 1.5, 0.75).unwrap();
        assert!(ellipse_schwarz_jump(&e, 1.0).unwrap().re > 0.0);
        assert!(matches!(ellipse_schwarz_jump(&e, 0.5), Err(Error::OutOfSegment { .. })));
        assert!(matches!(ellipse_schwarz_jump(&e, 2.0), Err(Error::OutOfSegment { .. })));
    }

    #[test]
    fn ellipse_schwarz_is_conj_on_boundary() {
        let e = EllipseDomain::new(0.5, 1.5, 0.75).unwrap();
        let (a, y0) = (e.minor_semi_axis(), e.center_height());
        for k in 0..64 {
            let phi = 2.0 * PI * (k as f64 + 0.3) / 64.0;
            let z = c(a * phi.cos(), y0 + e.rho * phi.sin());
            assert!((e.schwarz(z) - z.conj()).norm() < 1e-12, "phi={phi}");
        }
    }

    #[test]
    fn ellipse_jump_matches_schwarz_limits() {
        let e = EllipseDomain::new(0.5, 1.5, 0.75).unwrap();
        for y in [0.6, 0.9, 1.0, 1.3, 1.45] {
            let eps = 1e-9;
            let jump = e.schwarz(c(eps, y)) - e.schwarz(c(-eps, y));
            assert!((jump - ellipse_schwarz_jump(&e, y).unwrap()).norm() < 1e-6, "y={y}");
        }
    }

    #[test]
    fn quadrature_schwarz_power_on_boundary() {
        let q = QuadratureDomain::new(c(0.1, 1.0), c(0.01, 0.02), 0.03, 3).unwrap();
        for z in q.boundary_points(16) {
            let lhs = q.schwarz_power(z);
            let rhs = (z.conj() - q.d0.conj()).powu(3);
            assert!((lhs - rhs).norm() < 1e-12);
        }
    }

    #[test]
    fn segment_constants_sum_to_area_over_pi() {
        let e = EllipseDomain::new(0.5, 1.5, 0.75).unwrap();
        let data = segment_discretization(&e, &DensitySpec::constant(c(1.0, 0.0)), 2000).unwrap();
        let total: C64 = data.constants().sum();
        let area = Domain::Ellipse(e).area().value;
        assert!((total - area / PI).norm() < 1e-4);
    }

    #[test]
    fn jump_field_pole_guard() {
        let data = ScatteringData::from_pairs(&[c(0.0, 1.0)], &[c(2.0, 0.0)]).unwrap();
        assert!((jump_field(&data, c(0.0, 3.0)).unwrap() - c(0.0, -1.0)).norm() < 1e-15);
        assert!(matches!(jump_field(&data, c(0.0, 1.0 + 1e-7)), Err(Error::PoleTooClose { .. })));
    }
}
