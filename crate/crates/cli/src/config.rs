//! Run configuration: a TOML file of `section.key = value` lines.
//!
//! ```toml
//! grid.n = 128
//! velocity.family = "kraichnan"
//! velocity.amplitude = 1.0
//! velocity.cutoff = 32
//! source.kind = "unit-shells"
//! source.kappa_g = 2.0
//! solver.kappa_bar = 3.0
//! ensemble.members = 256
//! ```
//!
//! Every key has a default except `grid.n` and `velocity.family`.

use std::path::{Path, PathBuf};

use bht_core::analysis::{default_window, EnsembleConfig};
use bht_core::solver::{kappa_bar, KappaBar, Method, SolveConfig, SourceSpec};
use bht_core::velocity::{build_velocity, sample_phases, VelocityParams};
use bht_core::verify::SuiteConfig;
use bht_core::{Lattice, SpectralField};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RawConfig {
    pub grid: GridSection,
    pub velocity: VelocitySection,
    pub source: SourceSection,
    pub solver: SolverSection,
    pub ensemble: EnsembleSection,
    pub verify: VerifySection,
    pub output: OutputSection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GridSection {
    pub n: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VelocitySection {
    /// `steep` or `kraichnan`.
    pub family: Option<String>,
    pub amplitude: f64,
    pub beta: Option<f64>,
    pub cutoff: Option<u32>,
    pub seed: u64,
}

impl Default for VelocitySection {
    fn default() -> Self {
        Self {
            family: None,
            amplitude: 1.0,
            beta: None,
            cutoff: None,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SourceSection {
    /// `unit-shells` or `inline`.
    pub kind: String,
    pub kappa_g: f64,
    /// Inline coefficients `[k1, k2, re, im]`; the conjugate partner is implied.
    pub modes: Vec<[f64; 4]>,
}

impl Default for SourceSection {
    fn default() -> Self {
        Self {
            kind: "unit-shells".into(),
            kappa_g: 2.0,
            modes: Vec::new(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SolverSection {
    pub tol: f64,
    pub max_iter: usize,
    pub restart: usize,
    pub method: Method,
    /// Absent: evaluate the split-wavenumber formula.
    pub kappa_bar: Option<f64>,
    pub n_max: usize,
    pub picard_stop: f64,
    pub c_prime: f64,
}

impl Default for SolverSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        Self {
            tol: d.tol,
            max_iter: d.max_iter,
            restart: d.restart,
            method: d.method,
            kappa_bar: None,
            n_max: d.n_max,
            picard_stop: d.picard_stop,
            c_prime: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnsembleSection {
    pub members: usize,
    pub base_seed: u64,
    /// Share phases below `frozen_below` (default `2κ̄`) across members.
    pub freeze_low_modes: bool,
    pub frozen_below: Option<f64>,
    pub window_lo: Option<f64>,
    pub window_hi: Option<f64>,
    pub cross_check: bool,
    pub check_truncation: bool,
    /// Oracle tolerance in standard errors.
    pub sigma: f64,
}

impl Default for EnsembleSection {
    fn default() -> Self {
        Self {
            members: 16,
            base_seed: 0,
            freeze_low_modes: true,
            frozen_below: None,
            window_lo: None,
            window_hi: None,
            cross_check: false,
            check_truncation: false,
            sigma: 5.0,
        }
    }
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    pub n: Option<usize>,
    pub samples: Option<usize>,
    pub realizations: Option<usize>,
    pub seed: Option<u64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputSection {
    pub dir: PathBuf,
}

impl Default for OutputSection {
    fn default() -> Self {
        Self {
            dir: "bht-run".into(),
        }
    }
}

/// Where κ̄ came from.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum KappaBarOrigin {
    Config,
    Formula(KappaBar),
}

fn bad(msg: impl Into<String>) -> CliError {
    CliError::Config(msg.into())
}

impl RawConfig {
    pub fn parse(text: &str) -> CliResult<Self> {
        toml::from_str(text).map_err(|e| bad(e.to_string()))
    }

    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| bad(format!("cannot read {}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| match e {
            CliError::Config(m) => bad(format!("{}: {m}", path.display())),
            other => other,
        })
    }

    pub fn lattice(&self) -> CliResult<Lattice> {
        let n = self.grid.n.ok_or_else(|| bad("grid.n is required"))?;
        Lattice::new(n).map_err(|e| bad(format!("grid.n = {n}: {e}")))
    }

    pub fn velocity(&self, lattice: Lattice) -> CliResult<VelocityParams> {
        let v = &self.velocity;
        let family = v
            .family
            .as_deref()
            .ok_or_else(|| bad("velocity.family is required (steep or kraichnan)"))?;
        let p = match family {
            "steep" => {
                if v.cutoff.is_some() {
                    return Err(bad("velocity.cutoff only applies to the kraichnan family"));
                }
                let beta = v
                    .beta
                    .ok_or_else(|| bad("velocity.beta is required for the steep family"))?;
                VelocityParams::steep(v.amplitude, beta)
            }
            "kraichnan" => {
                if v.beta.is_some() {
                    return Err(bad("velocity.beta only applies to the steep family"));
                }
                let cutoff = v
                    .cutoff
                    .ok_or_else(|| bad("velocity.cutoff is required for the kraichnan family"))?;
                VelocityParams::kraichnan(v.amplitude, cutoff)
            }
            other => {
                return Err(bad(format!(
                    "velocity.family = {other:?}; expected steep or kraichnan"
                )))
            }
        }
        .map_err(|e| bad(format!("velocity: {e}")))?;
        p.validate_for(lattice)
            .map_err(|e| bad(format!("velocity.cutoff: {e}")))?;
        Ok(p)
    }

    pub fn source(&self, lattice: Lattice) -> CliResult<SourceSpec> {
        let s = &self.source;
        let kg = s.kappa_g;
        let spec = match s.kind.as_str() {
            "unit-shells" => {
                if !s.modes.is_empty() {
                    return Err(bad("source.modes requires source.kind = \"inline\""));
                }
                SourceSpec::unit_shells(lattice, kg)
            }
            "inline" => {
                if s.modes.is_empty() {
                    return Err(bad(
                        "source.kind = \"inline\" needs at least one source.modes entry",
                    ));
                }
                let mut f = SpectralField::zeros(lattice);
                for &[k1, k2, re, im] in &s.modes {
                    if k1.fract() != 0.0 || k2.fract() != 0.0 {
                        return Err(bad(format!(
                            "source.modes: wavevector ({k1}, {k2}) must be integer"
                        )));
                    }
                    f.set_mode(k1 as i64, k2 as i64, Complex64::new(re, im))
                        .map_err(|e| bad(format!("source.modes: {e}")))?;
                }
                SourceSpec::new(kg, f)
            }
            other => {
                return Err(bad(format!(
                    "source.kind = {other:?}; expected unit-shells or inline"
                )))
            }
        };
        spec.map_err(|e| bad(format!("source: {e}")))
    }

    /// κ̄ from `solver.kappa_bar`, or the formula on a velocity sample (the
    /// formula only sees seed-independent norms).
    pub fn kappa_bar(
        &self,
        lattice: Lattice,
        params: &VelocityParams,
        source: &SourceSpec,
    ) -> CliResult<(f64, KappaBarOrigin)> {
        if let Some(kb) = self.solver.kappa_bar {
            if !(kb >= 1.0) || !kb.is_finite() {
                return Err(bad(format!("solver.kappa_bar must be >= 1, got {kb}")));
            }
            let limit = lattice.kappa_max() as f64 / 3.0;
            if kb > limit {
                return Err(bad(format!(
                    "solver.kappa_bar = {kb} exceeds kappa_max/3 = {limit:.3} for grid.n = {}",
                    lattice.n()
                )));
            }
            return Ok((kb, KappaBarOrigin::Config));
        }
        let u = build_velocity(params, &sample_phases(0, lattice, None))?;
        let kb =
            kappa_bar(params, &u, source.kappa_g, self.solver.c_prime).map_err(CliError::from)?;
        Ok((kb.value, KappaBarOrigin::Formula(kb)))
    }

    pub fn solve_config(&self, kappa_bar: f64) -> CliResult<SolveConfig> {
        let s = &self.solver;
        let cfg = SolveConfig {
            tol: s.tol,
            max_iter: s.max_iter,
            restart: s.restart,
            method: s.method,
            kappa_bar,
            n_max: s.n_max,
            picard_stop: s.picard_stop,
        };
        cfg.validate().map_err(|e| bad(format!("solver: {e}")))?;
        Ok(cfg)
    }

    /// Resolves every section needed for an ensemble.
    pub fn ensemble(&self) -> CliResult<Resolved> {
        let lattice = self.lattice()?;
        let velocity = self.velocity(lattice)?;
        let source = self.source(lattice)?;
        let (kb, origin) = self.kappa_bar(lattice, &velocity, &source)?;
        let solve = self.solve_config(kb)?;
        let e = &self.ensemble;
        if !(e.sigma > 0.0) {
            return Err(bad(format!(
                "ensemble.sigma must be positive, got {}",
                e.sigma
            )));
        }
        let frozen_below = match (e.freeze_low_modes, e.frozen_below) {
            (false, Some(_)) => {
                return Err(bad(
                    "ensemble.frozen_below is set but ensemble.freeze_low_modes = false",
                ))
            }
            (false, None) => None,
            (true, Some(f)) if !(f > 0.0) => {
                return Err(bad(format!(
                    "ensemble.frozen_below must be positive, got {f}"
                )))
            }
            (true, f) => Some(f.unwrap_or(2.0 * kb)),
        };
        let (lo, hi) = default_window(&velocity, lattice, kb);
        let window = (e.window_lo.unwrap_or(lo), e.window_hi.unwrap_or(hi));
        let cfg = EnsembleConfig {
            lattice,
            members: e.members,
            base_seed: e.base_seed,
            frozen_below,
            velocity,
            source,
            solve,
            window,
            cross_check: e.cross_check,
            check_truncation: e.check_truncation,
        };
        cfg.validate().map_err(|err| {
            let m = err.to_string();
            let key = if m.contains("window") {
                "ensemble.window_lo/window_hi"
            } else if m.contains("member") {
                "ensemble.members"
            } else if m.contains("kappa_g") {
                "solver.kappa_bar / source.kappa_g"
            } else {
                "ensemble"
            };
            bad(format!("{key}: {m}"))
        })?;
        Ok(Resolved {
            ensemble: cfg,
            kappa_bar_origin: origin,
            c_prime: self.solver.c_prime,
            sigma: e.sigma,
        })
    }

    pub fn suite(&self) -> CliResult<SuiteConfig> {
        let mut s = SuiteConfig::default();
        let v = &self.verify;
        if let Some(n) = v.n {
            Lattice::new(n).map_err(|e| bad(format!("verify.n = {n}: {e}")))?;
            s.n = n;
        }
        if let Some(m) = v.samples {
            if m == 0 {
                return Err(bad("verify.samples must be positive"));
            }
            s.samples = m;
        }
        if let Some(r) = v.realizations {
            if r == 0 {
                return Err(bad("verify.realizations must be positive"));
            }
            s.realizations = r;
        }
        if let Some(seed) = v.seed {
            s.seed = seed;
        }
        Ok(s)
    }
}

/// A fully validated ensemble run.
#[derive(Debug, Clone)]
pub struct Resolved {
    pub ensemble: EnsembleConfig,
    pub kappa_bar_origin: KappaBarOrigin,
    pub c_prime: f64,
    pub sigma: f64,
}

#[cfg(test)]
mod tests {
    use super::*;

    const KRAICHNAN: &str = r#"
grid.n = 64
velocity.family = "kraichnan"
velocity.cutoff = 16
solver.kappa_bar = 2.0
ensemble.members = 4
ensemble.window_hi = 8.0
"#;

    #[test]
    fn parses_dotted_keys() {
        let c = RawConfig::parse(KRAICHNAN).unwrap();
        let r = c.ensemble().unwrap();
        assert_eq!(r.ensemble.lattice.n(), 64);
        assert_eq!(r.ensemble.frozen_below, Some(4.0));
        assert_eq!(r.ensemble.window, (6.0, 8.0));
        assert_eq!(r.kappa_bar_origin, KappaBarOrigin::Config);
    }

    fn config_error(text: &str) -> String {
        match RawConfig::parse(text).and_then(|c| c.ensemble()) {
            Err(CliError::Config(m)) => m,
            other => panic!("expected a config error, got {other:?}"),
        }
    }

    #[test]
    fn errors_name_the_offending_key() {
        assert!(config_error("grid.m = 3").contains("grid.m"));
        assert!(config_error("velocity.family = \"steep\"").contains("grid.n"));
        let m = config_error("grid.n = 64\nvelocity.family = \"kraichnan\"\nvelocity.cutoff = 40");
        assert!(m.contains("velocity.cutoff"), "{m}");
        let m = config_error("grid.n = 64\nvelocity.family = \"steep\"");
        assert!(m.contains("velocity.beta"), "{m}");
        let m = config_error(
            "grid.n = 64\nvelocity.family = \"steep\"\nvelocity.beta = -2.5\nsolver.kappa_bar = 9.0",
        );
        assert!(m.contains("solver.kappa_bar"), "{m}");
    }

    #[test]
    fn formula_kappa_bar_is_too_large_for_small_grids() {
        let m = config_error("grid.n = 64\nvelocity.family = \"steep\"\nvelocity.beta = -2.5");
        assert!(m.contains("solver.kappa_bar"), "{m}");
    }

    #[test]
    fn inline_source() {
        let c = RawConfig::parse(
            "grid.n = 32\nsource.kind = \"inline\"\nsource.kappa_g = 3.0\nsource.modes = [[1, 1, 0.5, -0.25], [0, 2, 1.0, 0.0]]",
        )
        .unwrap();
        let s = c.source(c.lattice().unwrap()).unwrap();
        assert_eq!(s.field.coeff(-1, -1), Complex64::new(0.5, 0.25));
        let c = RawConfig::parse(
            "grid.n = 32\nsource.kind = \"inline\"\nsource.modes = [[2, 0, 1.0, 0.0]]",
        )
        .unwrap();
        assert!(c.source(c.lattice().unwrap()).is_err());
    }
}
