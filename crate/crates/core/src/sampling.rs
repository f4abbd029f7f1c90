//! Point configurations used to discretise a spectral density: Fekete
//! points, Ginibre samples, i.i.d. uniform points and a Halton fallback.
//!
//! Fekete and Ginibre points live on the raw scale of the energy
//! `E = -2 sum_{j<k} ln|w_j - w_k| + (N/2) sum_j |w_j|^2`, whose equilibrium
//! measure is uniform on the disk of radius `sqrt 2`. Divide by
//! [`REFERENCE_SCALE`] to land on the unit disk.

use std::f64::consts::{PI, SQRT_2};
use std::io::Write;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::domains::{DiskDomain, Domain, QuadratureDomain};
use crate::engine::num;
use crate::error::{Error, Result};
use crate::types::{format_complex, DensitySpec, ScatteringData, SpectralPoint, C64};

/// Radius of the support of the equilibrium measure on the raw scale.
pub const REFERENCE_SCALE: f64 = SQRT_2;

/// Tolerance on `|w| <= 1` accepted by [`map_to_domain`].
pub const REFERENCE_DISK_SLACK: f64 = 1e-6;

/// Pairs closer than this count as collapsed during Fekete descent.
pub const COLLAPSE_DISTANCE: f64 = 1e-12;

const ARMIJO: f64 = 1e-4;

fn rng_for(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform point in the disk of radius `r` around the origin.
fn uniform_in_disk<R: Rng + ?Sized>(rng: &mut R, r: f64) -> C64 {
    loop {
        let w = C64::new(2.0 * rng.random::<f64>() - 1.0, 2.0 * rng.random::<f64>() - 1.0);
        if w.norm_sqr() < 1.0 {
            return w * r;
        }
    }
}

/// Energy and its Wirtinger gradient `dE/d conj(w_j)`.
pub fn fekete_energy_and_gradient(w: &[C64]) -> (f64, Vec<C64>) {
    let n = w.len();
    let half_n = 0.5 * n as f64;
    let mut energy = 0.0;
    let mut grad: Vec<C64> = w.iter().map(|&p| p * half_n).collect();
    for j in 0..n {
        energy += half_n * w[j].norm_sqr();
        for k in j + 1..n {
            let d = w[j] - w[k];
            let d2 = d.norm_sqr();
            energy -= d2.ln();
            // 1 / conj(d) = d / |d|^2
            let inv = d / d2;
            grad[j] -= inv;
            grad[k] += inv;
        }
    }
    (energy, grad)
}

pub fn fekete_energy(w: &[C64]) -> f64 {
    let n = w.len();
    let mut energy = 0.5 * n as f64 * w.iter().map(|p| p.norm_sqr()).sum::<f64>();
    for j in 0..n {
        for k in j + 1..n {
            energy -= (w[j] - w[k]).norm_sqr().ln();
        }
    }
    energy
}

/// `E(trial) - E(w)` summed pair by pair, accurate when the configurations
/// are close.
pub fn fekete_energy_change(w: &[C64], trial: &[C64]) -> f64 {
    let n = w.len();
    // |a|^2 - |b|^2 = Re((a - b) conj(a + b))
    let sq_diff = |a: C64, b: C64| ((a - b) * (a + b).conj()).re;
    let mut change = 0.5 * n as f64 * w.iter().zip(trial).map(|(&p, &q)| sq_diff(q, p)).sum::<f64>();
    // pair displacements from the per-point moves
    let moves: Vec<C64> = w.iter().zip(trial).map(|(&p, &q)| q - p).collect();
    for j in 0..n {
        for k in j + 1..n {
            let old = w[j] - w[k];
            let d = moves[j] - moves[k];
            let ratio = (d * (old * 2.0 + d).conj()).re / old.norm_sqr();
            change -= ratio.ln_1p();
        }
    }
    change
}

fn min_pair_distance(w: &[C64]) -> f64 {
    let mut best = f64::INFINITY;
    for j in 0..w.len() {
        for k in j + 1..w.len() {
            best = best.min((w[j] - w[k]).norm_sqr());
        }
    }
    best.sqrt()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeketeResult {
    /// Minimiser on the raw scale.
    pub points: Vec<C64>,
    pub energy: f64,
    /// `max_j |dE/d conj(w_j)|` at the returned points.
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub seed: u64,
}

impl FeketeResult {
    pub fn ensure_converged(self) -> Result<Self> {
        if self.converged {
            Ok(self)
        } else {
            Err(Error::MaxIterationsExceeded { iterations: self.iterations, gradient_norm: self.gradient_norm })
        }
    }

    /// Points rescaled so the equilibrium support is the unit disk.
    pub fn reference_points(&self) -> Vec<C64> {
        self.points.iter().map(|p| p / REFERENCE_SCALE).collect()
    }

    /// Writes `re,im` rows of the raw points.
    pub fn write_csv<W: Write>(&self, mut out: W) -> std::io::Result<()> {
        writeln!(out, "re,im")?;
        for p in &self.points {
            writeln!(out, "{},{}", num(p.re), num(p.im))?;
        }
        Ok(())
    }

    /// Convergence metadata for the JSON sidecar.
    pub fn sidecar(&self) -> serde_json::Value {
        serde_json::json!({
            "n": self.points.len(),
            "energy": self.energy,
            "gradient_norm": self.gradient_norm,
            "iterations": self.iterations,
            "converged": self.converged,
            "seed": self.seed,
        })
    }
}

/// Local minimiser of the Fekete energy by gradient descent with Armijo
/// backtracking (halving from an initial step `1/N`), started from i.i.d.
/// uniform points in the unit disk. Converged when `max_j |grad_j| <= tol * N`.
pub fn fekete_points(n: usize, tol: f64, max_iter: usize, seed: u64) -> Result<FeketeResult> {
    if n == 0 {
        return Err(Error::InvalidInput("Fekete problem needs N >= 1".into()));
    }
    if !(tol > 0.0) {
        return Err(Error::InvalidInput("Fekete tolerance must be positive".into()));
    }
    let mut rng = rng_for(seed);
    let mut w: Vec<C64> = (0..n).map(|_| uniform_in_disk(&mut rng, 1.0)).collect();
    let (mut energy, mut grad) = fekete_energy_and_gradient(&w);
    let target = tol * n as f64;
    let initial_step = 1.0 / n as f64;
    let grad_max = |g: &[C64]| g.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let mut gradient_norm = grad_max(&grad);
    let mut iterations = 0;
    let mut trial = vec![C64::new(0.0, 0.0); n];
    while gradient_norm > target && iterations < max_iter {
        iterations += 1;
        let slope: f64 = 2.0 * grad.iter().map(|g| g.norm_sqr()).sum::<f64>();
        let mut step = initial_step;
        let mut accepted = false;
        while step * gradient_norm > 1e-15 * (1.0 + REFERENCE_SCALE) {
            for ((t, p), g) in trial.iter_mut().zip(&w).zip(&grad) {
                *t = p - g * step;
            }
            if n < 2 || min_pair_distance(&trial) > COLLAPSE_DISTANCE {
                if fekete_energy_change(&w, &trial) <= -ARMIJO * step * slope {
                    accepted = true;
                    break;
                }
            }
            step *= 0.5;
        }
        if !accepted {
            break;
        }
        std::mem::swap(&mut w, &mut trial);
        (energy, grad) = fekete_energy_and_gradient(&w);
        gradient_norm = grad_max(&grad);
    }
    Ok(FeketeResult { converged: gradient_norm <= target, points: w, energy, gradient_norm, iterations, seed })
}

/// Lowest-energy converged result of `starts` descents from seeds
/// `seed, seed + 1, ...`. Falls back to the best unconverged run when none converge.
pub fn fekete_points_best_of(n: usize, tol: f64, max_iter: usize, seed: u64, starts: usize) -> Result<FeketeResult> {
    if starts == 0 {
        return Err(Error::InvalidInput("need at least one Fekete start".into()));
    }
    let mut best: Option<FeketeResult> = None;
    for k in 0..starts as u64 {
        let f = fekete_points(n, tol, max_iter, seed.wrapping_add(k))?;
        let better = match &best {
            None => true,
            Some(b) => (f.converged, -f.energy) > (b.converged, -b.energy),
        };
        if better {
            best = Some(f);
        }
    }
    Ok(best.expect("starts >= 1"))
}

/// Affine image of reference-disk points: `lambda0 + rho w` for disks and
/// order-1 quadrature domains, `i y0 + a Re w + i rho Im w` for ellipses.
/// Points must lie in the closed unit disk.
pub fn map_to_domain(points: &[C64], domain: &Domain) -> Result<Vec<C64>> {
    if let Some(p) = points.iter().find(|p| p.norm() > 1.0 + REFERENCE_DISK_SLACK) {
        return Err(Error::PointOutsideReferenceDisk { point: format_complex(*p) });
    }
    affine_image(points, domain)
}

/// [`map_to_domain`] without the unit-disk check, for samples whose edge
/// fluctuations spill slightly past the reference disk.
pub fn affine_image(points: &[C64], domain: &Domain) -> Result<Vec<C64>> {
    let disk = |d: DiskDomain| points.iter().map(|w| d.center + w * d.radius).collect();
    let mapped: Vec<C64> = match *domain {
        Domain::Disk(d) => disk(d),
        Domain::Quadrature(q) if q.m == 1 => disk(DiskDomain { center: q.d0 + q.d1, radius: q.rho }),
        Domain::Ellipse(e) => {
            let (a, y0) = (e.minor_semi_axis(), e.center_height());
            points.iter().map(|w| C64::new(a * w.re, y0 + e.rho * w.im)).collect()
        }
        Domain::Quadrature(_) => {
            return Err(Error::InvalidInput("higher-order quadrature domains are not affine images of a disk".into()))
        }
    };
    if let Some(p) = mapped.iter().find(|p| p.im <= 0.0) {
        return Err(Error::InvariantViolation(format!("mapped point {} left the upper half-plane", format_complex(*p))));
    }
    Ok(mapped)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GinibreConfig {
    /// Sweeps discarded before the first sample.
    pub burn_in_sweeps: usize,
    /// Sweeps between successive samples of one chain.
    pub sweeps_per_sample: usize,
    /// Proposal standard deviation per coordinate, in units of `1/sqrt N`.
    pub proposal_scale: f64,
}

impl Default for GinibreConfig {
    fn default() -> Self {
        Self { burn_in_sweeps: 200, sweeps_per_sample: 20, proposal_scale: 1.0 }
    }
}

/// Metropolis chain targeting `exp(-E)`, one particle moved at a time.
pub struct GinibreChain {
    w: Vec<C64>,
    /// `ln |w_j - w_k|^2`, symmetric with zero diagonal.
    log_dist: Vec<f64>,
    rng: ChaCha8Rng,
    config: GinibreConfig,
    proposals: u64,
    accepted: u64,
}

impl GinibreChain {
    pub fn new(n: usize, config: GinibreConfig, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidInput("Ginibre sample needs N >= 1".into()));
        }
        if !(config.proposal_scale > 0.0) {
            return Err(Error::InvalidInput("proposal scale must be positive".into()));
        }
        let mut rng = rng_for(seed);
        let w: Vec<C64> = (0..n).map(|_| uniform_in_disk(&mut rng, REFERENCE_SCALE)).collect();
        let mut log_dist = vec![0.0; n * n];
        for j in 0..n {
            for k in j + 1..n {
                let v = (w[j] - w[k]).norm_sqr().ln();
                log_dist[j * n + k] = v;
                log_dist[k * n + j] = v;
            }
        }
        let mut chain = Self { w, log_dist, rng, config, proposals: 0, accepted: 0 };
        for _ in 0..config.burn_in_sweeps {
            chain.sweep();
        }
        Ok(chain)
    }

    fn sweep(&mut self) {
        let n = self.w.len();
        let sd = self.config.proposal_scale / (n as f64).sqrt();
        let half_n = 0.5 * n as f64;
        let mut fresh = vec![0.0; n];
        for j in 0..n {
            let dx: f64 = StandardNormal.sample(&mut self.rng);
            let dy: f64 = StandardNormal.sample(&mut self.rng);
            let cand = self.w[j] + C64::new(dx, dy) * sd;
            let row = &self.log_dist[j * n..(j + 1) * n];
            let mut delta = half_n * (cand.norm_sqr() - self.w[j].norm_sqr());
            for k in 0..n {
                if k != j {
                    fresh[k] = (cand - self.w[k]).norm_sqr().ln();
                    delta -= fresh[k] - row[k];
                }
            }
            self.proposals += 1;
            if delta <= 0.0 || self.rng.random::<f64>() < (-delta).exp() {
                self.accepted += 1;
                self.w[j] = cand;
                for k in 0..n {
                    if k != j {
                        self.log_dist[j * n + k] = fresh[k];
                        self.log_dist[k * n + j] = fresh[k];
                    }
                }
            }
        }
    }

    /// Current configuration on the reference (unit-disk) scale.
    pub fn current(&self) -> Vec<C64> {
        self.w.iter().map(|p| p / REFERENCE_SCALE).collect()
    }

    /// Advances by `sweeps_per_sample` sweeps and returns the new configuration.
    pub fn next_sample(&mut self) -> Vec<C64> {
        for _ in 0..self.config.sweeps_per_sample {
            self.sweep();
        }
        self.current()
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposals == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposals as f64
        }
    }
}

/// One approximate Ginibre draw on the reference scale, from a fresh chain.
pub fn ginibre_sample(n: usize, config: GinibreConfig, seed: u64) -> Result<Vec<C64>> {
    Ok(GinibreChain::new(n, config, seed)?.current())
}

/// `n` i.i.d. uniform points in `domain` by rejection from its bounding box.
pub fn uniform_domain_sample(domain: &Domain, n: usize, seed: u64) -> Vec<C64> {
    let bb = domain.bounding_box();
    let mut rng = rng_for(seed);
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let z = bb.sample(&mut rng);
        if domain.contains(z) {
            out.push(z);
        }
    }
    out
}

/// Radical inverse of `index` in `base`.
fn radical_inverse(mut index: u64, base: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut x = 0.0;
    while index > 0 {
        x += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    x
}

/// First `n` points of the base-(2, 3) Halton sequence in the bounding box
/// that fall inside `domain`.
pub fn halton_domain_sample(domain: &Domain, n: usize) -> Vec<C64> {
    let bb = domain.bounding_box();
    let mut out = Vec::with_capacity(n);
    let mut index = 1u64;
    while out.len() < n {
        let z = C64::new(
            bb.re_min + (bb.re_max - bb.re_min) * radical_inverse(index, 2),
            bb.im_min + (bb.im_max - bb.im_min) * radical_inverse(index, 3),
        );
        if domain.contains(z) {
            out.push(z);
        }
        index += 1;
    }
    out
}

/// Halton points of an order-`m` quadrature domain, each repeated under the
/// `m` rotations about `d0` that leave the domain invariant. When `m` does not
/// divide `n` the last orbit is cut short.
pub fn symmetric_halton_sample(domain: &QuadratureDomain, n: usize) -> Vec<C64> {
    let m = domain.m.max(1) as usize;
    let whole = Domain::Quadrature(*domain);
    let turns: Vec<C64> = (0..m).map(|k| C64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)).collect();
    let min_gap = 1e-9 * domain.rho;
    let mut out: Vec<C64> = Vec::with_capacity(n + m);
    let mut batch = n.div_ceil(m);
    while out.len() < n {
        out.clear();
        for z in halton_domain_sample(&whole, batch) {
            let orbit: Vec<C64> = turns.iter().map(|&u| domain.d0 + (z - domain.d0) * u).collect();
            // a Halton point may sit on the orbit of an earlier one
            if orbit.iter().all(|&w| out.iter().all(|&p| (p - w).norm() > min_gap)) {
                out.extend(orbit);
            }
        }
        batch += 1;
    }
    out.truncate(n);
    out
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Sampler {
    Fekete,
    Uniform,
    Ginibre,
}

impl FromStr for Sampler {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim() {
            "fekete" => Ok(Sampler::Fekete),
            "uniform" => Ok(Sampler::Uniform),
            "ginibre" => Ok(Sampler::Ginibre),
            other => Err(Error::Config(format!("unknown sampler `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SamplerConfig {
    pub fekete_tol: f64,
    pub fekete_max_iter: usize,
    /// Independent descents per Fekete sample; the lowest energy wins.
    pub fekete_starts: usize,
    pub ginibre: GinibreConfig,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        Self { fekete_tol: 1e-4, fekete_max_iter: 200_000, fekete_starts: 1, ginibre: GinibreConfig::default() }
    }
}

/// `n` points of `domain` drawn with `sampler`.
///
/// Fekete and Ginibre configurations are carried over by the affine map of
/// [`affine_image`]; higher-order quadrature domains fall back to
/// rotation-symmetrised Halton points for `Fekete` and do not support `Ginibre`.
pub fn sample_domain(domain: &Domain, sampler: Sampler, n: usize, seed: u64, cfg: &SamplerConfig) -> Result<Vec<C64>> {
    let affine = matches!(domain, Domain::Disk(_) | Domain::Ellipse(_))
        || matches!(domain, Domain::Quadrature(q) if q.m == 1);
    match sampler {
        Sampler::Uniform => Ok(uniform_domain_sample(domain, n, seed)),
        Sampler::Fekete if affine => {
            let f = fekete_points_best_of(n, cfg.fekete_tol, cfg.fekete_max_iter, seed, cfg.fekete_starts)?
                .ensure_converged()?;
            map_to_domain(&f.reference_points(), domain)
        }
        Sampler::Fekete => match domain {
            Domain::Quadrature(q) => Ok(symmetric_halton_sample(q, n)),
            _ => Ok(halton_domain_sample(domain, n)),
        },
        Sampler::Ginibre if affine => affine_image(&ginibre_sample(n, cfg.ginibre, seed)?, domain),
        Sampler::Ginibre => Err(Error::InvalidInput("Ginibre sampling needs a disk or an ellipse".into())),
    }
}

/// Constants `c_j = A beta(z_j) / (pi N)` of the area gas.
pub fn norming_constants(points: &[C64], area: f64, density: &DensitySpec) -> Result<ScatteringData> {
    let n = points.len();
    let weight = area / (PI * n as f64);
    ScatteringData::new(
        points
            .iter()
            .map(|&z| SpectralPoint::new(z, density.eval(z) * weight))
            .collect::<Result<Vec<_>>>()?,
    )
}

/// Samples `domain` and attaches area-gas constants.
pub fn area_gas(
    domain: &Domain,
    density: &DensitySpec,
    sampler: Sampler,
    n: usize,
    seed: u64,
    cfg: &SamplerConfig,
) -> Result<ScatteringData> {
    let points = sample_domain(domain, sampler, n, seed, cfg)?;
    norming_constants(&points, domain.area().value, density)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fekete_two_points() {
        let f = fekete_points(2, 1e-10, 100_000, 3).unwrap().ensure_converged().unwrap();
        for p in &f.points {
            assert!((p.norm() - 0.5f64.sqrt()).abs() < 1e-6);
        }
        assert!((f.points[0] + f.points[1]).norm() < 1e-6);
    }

    #[test]
    fn fekete_three_points() {
        let f = fekete_points(3, 1e-10, 100_000, 11).unwrap().ensure_converged().unwrap();
        for p in &f.points {
            assert!((p.norm() - (2.0f64 / 3.0).sqrt()).abs() < 1e-6);
        }
        let d: Vec<f64> = (0..3).map(|k| (f.points[k] - f.points[(k + 1) % 3]).norm()).collect();
        assert!((d[0] - d[1]).abs() < 1e-6 && (d[1] - d[2]).abs() < 1e-6);
    }

    #[test]
    fn fekete_single_point_is_origin() {
        let f = fekete_points(1, 1e-12, 1000, 0).unwrap();
        assert!(f.converged && f.points[0].norm() < 1e-11);
    }

    #[test]
    fn fekete_reports_nonconvergence() {
        let f = fekete_points(50, 1e-12, 3, 1).unwrap();
        assert!(!f.converged);
        assert!(matches!(f.ensure_converged(), Err(Error::MaxIterationsExceeded { iterations: 3, .. })));
    }

    #[test]
    fn gradient_matches_finite_differences() {
        let w = vec![C64::new(0.3, -0.2), C64::new(-0.5, 0.1), C64::new(0.05, 0.7), C64::new(0.9, 0.4)];
        let (_, g) = fekete_energy_and_gradient(&w);
        let h = 1e-6;
        for j in 0..w.len() {
            let mut a = w.clone();
            let mut b = w.clone();
            a[j].re += h;
            b[j].re -= h;
            let dx = (fekete_energy(&a) - fekete_energy(&b)) / (2.0 * h);
            let mut a = w.clone();
            let mut b = w.clone();
            a[j].im += h;
            b[j].im -= h;
            let dy = (fekete_energy(&a) - fekete_energy(&b)) / (2.0 * h);
            // dE/d conj w = (dE/dx + i dE/dy) / 2
            assert!((g[j] - C64::new(dx, dy) * 0.5).norm() < 1e-6);
        }
    }

    #[test]
    fn map_rejects_outside_reference_disk() {
        let d = Domain::Disk(DiskDomain::new(C64::new(0.0, 1.0), 0.1).unwrap());
        assert!(matches!(
            map_to_domain(&[C64::new(1.1, 0.0)], &d),
            Err(Error::PointOutsideReferenceDisk { .. })
        ));
        let z = map_to_domain(&[C64::new(0.5, -0.5)], &d).unwrap();
        assert!((z[0] - C64::new(0.05, 0.95)).norm() < 1e-15);
    }

    #[test]
    fn halton_points_are_inside() {
        let d = Domain::Quadrature(
            crate::domains::QuadratureDomain::new(C64::new(0.0, 1.0), C64::new(0.01, 0.0), 0.02, 2).unwrap(),
        );
        let pts = halton_domain_sample(&d, 200);
        assert_eq!(pts.len(), 200);
        assert!(pts.iter().all(|&z| d.contains(z)));
        assert_eq!(pts, halton_domain_sample(&d, 200));
    }

    #[test]
    fn radical_inverse_examples() {
        assert_eq!(radical_inverse(1, 2), 0.5);
        assert_eq!(radical_inverse(3, 2), 0.75);
        assert!((radical_inverse(5, 3) - (2.0 / 3.0 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn zero_density_gives_zero_constants() {
        let pts = [C64::new(0.0, 1.0), C64::new(0.1, 1.0)];
        let data = norming_constants(&pts, 1.0, &DensitySpec { p: 0, coeffs: vec![C64::new(0.0, 0.0)], expansion_center: C64::new(0.0, 0.0) }).unwrap();
        assert!(data.constants().all(|c| c == C64::new(0.0, 0.0)));
    }
}
