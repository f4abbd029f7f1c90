//! Flat `section.key = value` run configuration.
//!
//! Blank lines and `#` comments are ignored. Complex values use the
//! `RE+IMi` literal form; lists are comma separated. Every key must be one
//! of [`KNOWN_KEYS`].

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use crate::domains::{DiskDomain, Domain, EllipseDomain, QuadratureDomain};
use crate::engine::{EngineOptions, SystemForm};
use crate::error::{Error, Result};
use crate::experiments::{DriftConfig, EllipticConfig, FluctuationConfig, ShieldingConfig};
use crate::sampling::{Sampler, SamplerConfig};
use crate::types::{parse_complex, DensitySpec, EvaluationPoint, C64};

pub const KNOWN_KEYS: &[&str] = &[
    "domain.kind",
    "domain.center",
    "domain.radius",
    "domain.d0",
    "domain.d1",
    "domain.rho",
    "domain.m",
    "domain.alpha1",
    "domain.alpha2",
    "density.p",
    "density.coeffs",
    "density.center",
    "run.ns",
    "run.n",
    "run.trials",
    "run.seed",
    "run.sampler",
    "grid.x_min",
    "grid.x_max",
    "grid.nx",
    "grid.t",
    "grid.step",
    "grid.coarse_step",
    "grid.fine_step",
    "grid.peak_floor",
    "grid.decay_min",
    "grid.decay_max",
    "grid.decay_step",
    "eval.x",
    "eval.t",
    "fekete.tol",
    "fekete.max_iter",
    "fekete.starts",
    "mcmc.burn_in",
    "mcmc.sweeps_per_sample",
    "mcmc.proposal_scale",
    "engine.form",
    "engine.condition_limit",
    "stats.bootstrap_resamples",
    "check.sup_error",
    "check.alpha_min",
    "check.alpha_max",
    "check.normality_p",
    "check.r_squared",
    "check.period_tol",
    "check.envelope_tol",
    "check.decay",
    "output.csv",
    "output.json",
];

#[derive(Debug, Clone, Default, PartialEq)]
pub struct RunConfig {
    entries: BTreeMap<String, String>,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self> {
        let mut cfg = Self::default();
        for (k, line) in text.lines().enumerate() {
            let line = line.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            cfg.insert_assignment(line).map_err(|e| match e {
                Error::Config(msg) => Error::Config(format!("line {}: {msg}", k + 1)),
                other => other,
            })?;
        }
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Applies a `key=value` override.
    pub fn insert_assignment(&mut self, assignment: &str) -> Result<()> {
        let (key, value) = assignment
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("expected `key = value`, got `{assignment}`")))?;
        self.insert(key.trim(), value.trim())
    }

    pub fn insert(&mut self, key: &str, value: &str) -> Result<()> {
        if !KNOWN_KEYS.contains(&key) {
            return Err(Error::UnknownKey(key.to_string()));
        }
        self.entries.insert(key.to_string(), value.to_string());
        Ok(())
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries.get(key).map(String::as_str)
    }

    pub fn contains(&self, key: &str) -> bool {
        self.entries.contains_key(key)
    }

    fn parsed<T: FromStr>(&self, key: &str) -> Result<Option<T>> {
        self.get(key)
            .map(|v| v.parse::<T>().map_err(|_| Error::Config(format!("bad value `{v}` for {key}"))))
            .transpose()
    }

    pub fn f64_or(&self, key: &str, default: f64) -> Result<f64> {
        let v = self.parsed::<f64>(key)?.unwrap_or(default);
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Config(format!("{key} must be finite")))
        }
    }

    pub fn usize_or(&self, key: &str, default: usize) -> Result<usize> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    pub fn u64_or(&self, key: &str, default: u64) -> Result<u64> {
        Ok(self.parsed(key)?.unwrap_or(default))
    }

    fn required_f64(&self, key: &str) -> Result<f64> {
        self.parsed(key)?.ok_or_else(|| Error::Config(format!("missing {key}")))
    }

    pub fn complex(&self, key: &str) -> Result<Option<C64>> {
        self.get(key)
            .map(|v| parse_complex(v).map_err(|_| Error::Config(format!("bad complex value `{v}` for {key}"))))
            .transpose()
    }

    fn required_complex(&self, key: &str) -> Result<C64> {
        self.complex(key)?.ok_or_else(|| Error::Config(format!("missing {key}")))
    }

    pub fn usize_list(&self, key: &str) -> Result<Option<Vec<usize>>> {
        self.get(key)
            .map(|v| {
                v.split(',')
                    .map(|s| s.trim().parse().map_err(|_| Error::Config(format!("bad list `{v}` for {key}"))))
                    .collect()
            })
            .transpose()
    }

    pub fn path(&self, key: &str) -> Option<PathBuf> {
        self.get(key).map(PathBuf::from)
    }

    pub fn domain(&self) -> Result<Domain> {
        let kind = self.get("domain.kind").ok_or_else(|| Error::Config("missing domain.kind".into()))?;
        match kind {
            "disk" => Ok(Domain::Disk(DiskDomain::new(
                self.required_complex("domain.center")?,
                self.required_f64("domain.radius")?,
            )?)),
            "quadrature" => {
                let m: u32 = self.parsed("domain.m")?.unwrap_or(1);
                Ok(Domain::Quadrature(QuadratureDomain::new(
                    self.required_complex("domain.d0")?,
                    self.complex("domain.d1")?.unwrap_or_default(),
                    self.required_f64("domain.rho")?,
                    m,
                )?))
            }
            "ellipse" => Ok(Domain::Ellipse(EllipseDomain::new(
                self.required_f64("domain.alpha1")?,
                self.required_f64("domain.alpha2")?,
                self.required_f64("domain.rho")?,
            )?)),
            other => Err(Error::Config(format!("unknown domain.kind `{other}`"))),
        }
    }

    /// Density from `density.*`, defaulting to `pi / rho^2` on disks,
    /// `m conj(z - d0)^(m-1)` on quadrature domains and `1` on ellipses.
    pub fn density(&self, domain: &Domain) -> Result<DensitySpec> {
        let (p, coeffs, center) = match *domain {
            Domain::Disk(d) => (0, vec![C64::new(std::f64::consts::PI / (d.radius * d.radius), 0.0)], d.center),
            Domain::Quadrature(q) => (q.m - 1, vec![C64::new(q.m as f64, 0.0)], q.d0),
            Domain::Ellipse(_) => (0, vec![C64::new(1.0, 0.0)], C64::new(0.0, 0.0)),
        };
        let p = self.parsed("density.p")?.unwrap_or(p);
        let coeffs = match self.get("density.coeffs") {
            Some(v) => v
                .split(',')
                .map(|s| parse_complex(s).map_err(|_| Error::Config(format!("bad density.coeffs `{v}`"))))
                .collect::<Result<_>>()?,
            None => coeffs,
        };
        let center = self.complex("density.center")?.unwrap_or(center);
        DensitySpec::new(p, coeffs, center)
    }

    pub fn sampler_or(&self, default: Sampler) -> Result<Sampler> {
        self.get("run.sampler").map(Sampler::from_str).transpose().map(|s| s.unwrap_or(default))
    }

    pub fn sampler_config(&self, base: SamplerConfig) -> Result<SamplerConfig> {
        let mut cfg = base;
        cfg.fekete_tol = self.f64_or("fekete.tol", cfg.fekete_tol)?;
        cfg.fekete_max_iter = self.usize_or("fekete.max_iter", cfg.fekete_max_iter)?;
        cfg.fekete_starts = self.usize_or("fekete.starts", cfg.fekete_starts)?;
        cfg.ginibre.burn_in_sweeps = self.usize_or("mcmc.burn_in", cfg.ginibre.burn_in_sweeps)?;
        cfg.ginibre.sweeps_per_sample = self.usize_or("mcmc.sweeps_per_sample", cfg.ginibre.sweeps_per_sample)?;
        cfg.ginibre.proposal_scale = self.f64_or("mcmc.proposal_scale", cfg.ginibre.proposal_scale)?;
        if !(cfg.fekete_tol > 0.0) || cfg.fekete_starts == 0 || !(cfg.ginibre.proposal_scale > 0.0) {
            return Err(Error::Config("sampler settings must be positive".into()));
        }
        Ok(cfg)
    }

    pub fn engine(&self, base: EngineOptions) -> Result<EngineOptions> {
        let form = match self.get("engine.form") {
            None => base.form,
            Some("full") => SystemForm::Full,
            Some("reduced") => SystemForm::Reduced,
            Some("adaptive") => SystemForm::Adaptive,
            Some(other) => return Err(Error::Config(format!("unknown engine.form `{other}`"))),
        };
        let condition_limit = self.f64_or("engine.condition_limit", base.condition_limit)?;
        if !(condition_limit >= 1.0) {
            return Err(Error::Config("engine.condition_limit must be at least 1".into()));
        }
        Ok(EngineOptions { form, condition_limit })
    }

    fn ns(&self, default: &[usize]) -> Result<Vec<usize>> {
        let ns = self.usize_list("run.ns")?.unwrap_or_else(|| default.to_vec());
        if ns.is_empty() || ns.contains(&0) {
            return Err(Error::Config("run.ns needs positive sizes".into()));
        }
        if !ns.windows(2).all(|w| w[0] < w[1]) {
            return Err(Error::Config("run.ns must be strictly increasing".into()));
        }
        Ok(ns)
    }

    pub fn shielding(&self) -> Result<ShieldingConfig> {
        let domain = self.domain()?;
        let density = self.density(&domain)?;
        let base = ShieldingConfig::new(domain, density, self.ns(&[100, 200, 500])?);
        let cfg = ShieldingConfig {
            sampler: self.sampler_or(base.sampler)?,
            seed: self.u64_or("run.seed", base.seed)?,
            x_min: self.f64_or("grid.x_min", base.x_min)?,
            x_max: self.f64_or("grid.x_max", base.x_max)?,
            nx: self.usize_or("grid.nx", base.nx)?,
            t: self.f64_or("grid.t", base.t)?,
            sampler_config: self.sampler_config(base.sampler_config)?,
            engine: self.engine(base.engine)?,
            ..base
        };
        check_window(cfg.x_min, cfg.x_max)?;
        Ok(cfg)
    }

    pub fn drift(&self) -> Result<DriftConfig> {
        let domain = self.domain()?;
        let density = self.density(&domain)?;
        let base = DriftConfig::new(domain, density, self.ns(&[100, 200, 400, 800])?);
        let cfg = DriftConfig {
            sampler: self.sampler_or(base.sampler)?,
            seed: self.u64_or("run.seed", base.seed)?,
            x_min: self.f64_or("grid.x_min", base.x_min)?,
            x_max: self.f64_or("grid.x_max", base.x_max)?,
            coarse_step: self.f64_or("grid.coarse_step", base.coarse_step)?,
            fine_step: self.f64_or("grid.fine_step", base.fine_step)?,
            peak_floor: self.f64_or("grid.peak_floor", base.peak_floor)?,
            sampler_config: self.sampler_config(base.sampler_config)?,
            engine: self.engine(base.engine)?,
            ..base
        };
        check_window(cfg.x_min, cfg.x_max)?;
        if cfg.ns.len() < 3 {
            return Err(Error::Config("drift needs at least three sizes in run.ns".into()));
        }
        if !(cfg.fine_step > 0.0 && cfg.coarse_step >= cfg.fine_step) {
            return Err(Error::Config("need 0 < grid.fine_step <= grid.coarse_step".into()));
        }
        Ok(cfg)
    }

    pub fn fluctuations(&self) -> Result<FluctuationConfig> {
        let domain = self.domain()?;
        let density = self.density(&domain)?;
        let sampler = self.sampler_or(Sampler::Ginibre)?;
        let base = FluctuationConfig::new(domain, density, self.ns(&[50, 100, 200, 400])?, sampler);
        let cfg = FluctuationConfig {
            trials: self.usize_or("run.trials", base.trials)?,
            seed: self.u64_or("run.seed", base.seed)?,
            at: EvaluationPoint::new(self.f64_or("eval.x", base.at.x)?, self.f64_or("eval.t", base.at.t)?),
            bootstrap_resamples: self.usize_or("stats.bootstrap_resamples", base.bootstrap_resamples)?,
            sampler_config: self.sampler_config(base.sampler_config)?,
            engine: self.engine(base.engine)?,
            ..base
        };
        if cfg.trials < 30 {
            return Err(Error::Config("run.trials must be at least 30".into()));
        }
        Ok(cfg)
    }

    pub fn elliptic(&self) -> Result<EllipticConfig> {
        let Domain::Ellipse(domain) = self.domain()? else {
            return Err(Error::Config("elliptic runs need domain.kind = ellipse".into()));
        };
        let density = self.density(&Domain::Ellipse(domain))?;
        let base = EllipticConfig::new(domain, self.usize_or("run.n", 400)?);
        let cfg = EllipticConfig {
            density,
            x_min: self.f64_or("grid.x_min", base.x_min)?,
            x_max: self.f64_or("grid.x_max", base.x_max)?,
            step: self.f64_or("grid.step", base.step)?,
            decay_min: self.f64_or("grid.decay_min", base.decay_min)?,
            decay_max: self.f64_or("grid.decay_max", base.decay_max)?,
            decay_step: self.f64_or("grid.decay_step", base.decay_step)?,
            decay_threshold: self.f64_or("check.decay", base.decay_threshold)?,
            engine: self.engine(base.engine)?,
            ..base
        };
        check_window(cfg.x_min, cfg.x_max)?;
        check_window(cfg.decay_min, cfg.decay_max)?;
        if cfg.n < 200 {
            return Err(Error::Config("run.n must be at least 200".into()));
        }
        Ok(cfg)
    }
}

fn check_window(lo: f64, hi: f64) -> Result<()> {
    if lo < hi {
        Ok(())
    } else {
        Err(Error::Config(format!("empty window [{lo}, {hi}]")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_comments_and_overrides() {
        let mut cfg = RunConfig::parse("# fig 1\ndomain.kind = disk\n\ndomain.center = 0+1i # centre\ndomain.radius=0.1\n").unwrap();
        cfg.insert_assignment("run.ns = 10, 20,30").unwrap();
        let s = cfg.shielding().unwrap();
        assert_eq!(s.ns, vec![10, 20, 30]);
        let Domain::Disk(d) = s.domain else { panic!() };
        assert_eq!(d.center, C64::new(0.0, 1.0));
        assert!((s.density.coeffs[0].re - std::f64::consts::PI / 0.01).abs() < 1e-9);
    }

    #[test]
    fn unknown_key_is_named() {
        match RunConfig::parse("domain.kind = disk\nrun.nss = 3\n") {
            Err(Error::UnknownKey(k)) => assert_eq!(k, "run.nss"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_values() {
        assert!(RunConfig::parse("domain.kind").is_err());
        let cfg = RunConfig::parse("domain.kind = disk\ndomain.center = 0+1i\ndomain.radius = x").unwrap();
        assert!(matches!(cfg.domain(), Err(Error::Config(_))));
        let cfg = RunConfig::parse("domain.kind = disk\ndomain.center = 0+1i\ndomain.radius = 0.1\nrun.ns = 20,10").unwrap();
        assert!(cfg.shielding().is_err());
        let cfg = RunConfig::parse("domain.kind = disk\ndomain.center = 0+1i\ndomain.radius = 0.1\nrun.trials = 5").unwrap();
        assert!(cfg.fluctuations().is_err());
    }

    #[test]
    fn quadrature_default_density() {
        let cfg = RunConfig::parse("domain.kind = quadrature\ndomain.d0 = 0+1i\ndomain.d1 = 4e-4\ndomain.rho = 1e-3\ndomain.m = 2").unwrap();
        let domain = cfg.domain().unwrap();
        let dens = cfg.density(&domain).unwrap();
        assert_eq!(dens.p, 1);
        assert_eq!(dens.coeffs, vec![C64::new(2.0, 0.0)]);
        assert_eq!(dens.expansion_center, C64::new(0.0, 1.0));
    }
}
