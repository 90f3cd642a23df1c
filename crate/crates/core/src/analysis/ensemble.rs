use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::oracle::{bht_oracle, ModePower};
use super::stats::{Moments, ScalarStat};
use crate::error::{param, Error, Result};
use crate::solver::{DecompositionReports, SolveConfig, SourceSpec, TracerSystem};
use crate::spectral::{
    h1_norm, high_pass, l2_norm, shell_counts, shell_spectrum, sobolev_norm, vector_shell_spectrum,
    Lattice, ShellSpectrum,
};
use crate::velocity::{build_velocity, sample_phases, Family, VelocityParams};

/// Fields whose shell spectra are accumulated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum FieldTag {
    Theta,
    Tau,
    Vartheta1,
    Vartheta1L,
    Vartheta1H,
    Vartheta,
    /// `ϑ - ϑ¹`
    VarthetaRem,
    Phi,
    Velocity,
    /// Per-realization expected spectrum of `ϑ¹_H` given that realization's `τ`.
    OracleVartheta1H,
}

impl FieldTag {
    pub const ALL: [FieldTag; 10] = [
        FieldTag::Theta,
        FieldTag::Tau,
        FieldTag::Vartheta1,
        FieldTag::Vartheta1L,
        FieldTag::Vartheta1H,
        FieldTag::Vartheta,
        FieldTag::VarthetaRem,
        FieldTag::Phi,
        FieldTag::Velocity,
        FieldTag::OracleVartheta1H,
    ];

    pub fn as_str(&self) -> &'static str {
        match self {
            FieldTag::Theta => "theta",
            FieldTag::Tau => "tau",
            FieldTag::Vartheta1 => "vartheta1",
            FieldTag::Vartheta1L => "vartheta1_l",
            FieldTag::Vartheta1H => "vartheta1_h",
            FieldTag::Vartheta => "vartheta",
            FieldTag::VarthetaRem => "vartheta_rem",
            FieldTag::Phi => "phi",
            FieldTag::Velocity => "velocity",
            FieldTag::OracleVartheta1H => "oracle_vartheta1_h",
        }
    }
}

impl fmt::Display for FieldTag {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for FieldTag {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        FieldTag::ALL
            .into_iter()
            .find(|t| t.as_str() == s)
            .ok_or_else(|| Error::UnknownField(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EnsembleConfig {
    pub lattice: Lattice,
    pub members: usize,
    pub base_seed: u64,
    /// Phases with `|k|` below this are shared by all members.
    pub frozen_below: Option<f64>,
    pub velocity: VelocityParams,
    pub source: SourceSpec,
    pub solve: SolveConfig,
    /// Fit window `[κ_lo, κ_hi]`.
    pub window: (f64, f64),
    /// Also run the undecomposed solve and record the gap to `τ + ϑ + φ`.
    pub cross_check: bool,
    /// Re-solve the low-mode system with `u^{<2κ̄}` in every member.
    pub check_truncation: bool,
}

/// Default fit window: `[3κ̄, 2κ_max/3]` (steep) or `[3κ̄, κ_η/2]` (Kraichnan).
pub fn default_window(params: &VelocityParams, lattice: Lattice, kappa_bar: f64) -> (f64, f64) {
    let lo = (3.0 * kappa_bar).ceil();
    let hi = match params.family {
        Family::Steep { .. } => (2 * lattice.kappa_max() / 3) as f64,
        Family::Kraichnan { cutoff } => (cutoff / 2) as f64,
    };
    (lo, hi)
}

impl EnsembleConfig {
    pub fn validate(&self) -> Result<()> {
        if self.members == 0 {
            return param("ensemble needs at least one member");
        }
        self.velocity.validate_for(self.lattice)?;
        self.solve.validate()?;
        if self.source.field.lattice() != self.lattice {
            return param("source lattice differs from the ensemble lattice");
        }
        let kb = self.solve.kappa_bar;
        if kb < self.source.kappa_g {
            return param(format!(
                "kappa_bar = {kb} must be >= kappa_g = {}",
                self.source.kappa_g
            ));
        }
        let (lo, hi) = self.window;
        if hi > self.lattice.kappa_max() as f64 {
            return param(format!(
                "fit window upper edge {hi} exceeds kappa_max = {}",
                self.lattice.kappa_max()
            ));
        }
        if lo < 3.0 * kb {
            return param(format!(
                "fit window lower edge {lo} is below 3*kappa_bar = {}",
                3.0 * kb
            ));
        }
        if lo >= hi {
            return param(format!("empty fit window [{lo}, {hi}]"));
        }
        Ok(())
    }

    pub fn seed(&self, index: usize) -> u64 {
        derive_seed(self.base_seed, index as u64)
    }
}

fn splitmix64(x: u64) -> u64 {
    let mut z = x.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Member seed; a bijection in `index` for fixed `base`.
pub fn derive_seed(base: u64, index: u64) -> u64 {
    splitmix64(splitmix64(base) ^ index)
}

/// Everything kept from one ensemble member.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RealizationRecord {
    pub index: usize,
    pub seed: u64,
    /// `(field, weight, spectrum)` for every [`FieldTag`] and `w ∈ {0, 1}`.
    pub spectra: Vec<(FieldTag, u32, ShellSpectrum)>,
    /// Named scalar observables, see [`RealizationRecord::scalar`].
    pub scalars: BTreeMap<String, f64>,
    /// `|τ̂_j|²` on the support of `τ`.
    pub tau_power: ModePower,
    pub reports: DecompositionReports,
    /// `‖∇θ‖₂ <= ‖|∇|^{-1}g‖₂` up to the solver residual.
    pub h1_bound_holds: bool,
}

impl RealizationRecord {
    pub fn spectrum(&self, tag: FieldTag, w: u32) -> Option<&ShellSpectrum> {
        self.spectra
            .iter()
            .find(|(t, ww, _)| *t == tag && *ww == w)
            .map(|s| &s.2)
    }

    pub fn scalar(&self, name: &str) -> Option<f64> {
        self.scalars.get(name).copied()
    }
}

/// Runs one member of the ensemble.
pub fn realize(cfg: &EnsembleConfig, index: usize) -> Result<RealizationRecord> {
    let seed = cfg.seed(index);
    let wrap = |e: Error| Error::Realization {
        index,
        seed,
        source: Box::new(e),
    };
    realize_inner(cfg, index, seed).map_err(wrap)
}

fn realize_inner(cfg: &EnsembleConfig, index: usize, seed: u64) -> Result<RealizationRecord> {
    let lattice = cfg.lattice;
    let kb = cfg.solve.kappa_bar;
    let g = &cfg.source.field;
    let phases = sample_phases(seed, lattice, cfg.frozen_below);
    let u = build_velocity(&cfg.velocity, &phases)?;
    let sys = TracerSystem::new(&u);
    let d = sys.decompose(g, &cfg.solve, cfg.check_truncation)?;
    let theta = d.theta();
    let rem = &d.vartheta - &d.first.vartheta1;

    let tau_power = ModePower::from_table(
        lattice,
        &d.tau
            .coeffs()
            .iter()
            .map(|c| c.norm_sqr())
            .collect::<Vec<_>>(),
    );
    let oracle = bht_oracle(&tau_power, &cfg.velocity, kb, lattice)?;

    let mut spectra = Vec::with_capacity(2 * FieldTag::ALL.len());
    for tag in FieldTag::ALL {
        for w in [0u32, 1] {
            let s = match tag {
                FieldTag::Theta => shell_spectrum(&theta, w)?,
                FieldTag::Tau => shell_spectrum(&d.tau, w)?,
                FieldTag::Vartheta1 => shell_spectrum(&d.first.vartheta1, w)?,
                FieldTag::Vartheta1L => shell_spectrum(&d.first.vartheta1_l, w)?,
                FieldTag::Vartheta1H => shell_spectrum(&d.first.vartheta1_h, w)?,
                FieldTag::Vartheta => shell_spectrum(&d.vartheta, w)?,
                FieldTag::VarthetaRem => shell_spectrum(&rem, w)?,
                FieldTag::Phi => shell_spectrum(&d.phi, w)?,
                FieldTag::Velocity => vector_shell_spectrum(&u, w)?,
                FieldTag::OracleVartheta1H => ShellSpectrum {
                    weight: w,
                    trusted: lattice.kappa_max(),
                    counts: shell_counts(lattice),
                    sums: if w == 0 {
                        oracle.w0.clone()
                    } else {
                        oracle.w1.clone()
                    },
                },
            };
            spectra.push((tag, w, s));
        }
    }

    let gn = l2_norm(g);
    let grad_theta = h1_norm(&theta);
    let h1_rhs = sobolev_norm(g, -1.0);
    // A residual r perturbs θ by (-Δ + u·∇)^{-1} r, whose gradient is at most ‖r‖₂.
    let h1_slack = d.residual * gn;
    let v1 = &d.first.vartheta1;
    let split = &(&d.first.vartheta1_l + &d.first.vartheta1_h) - v1;

    let mut scalars = BTreeMap::new();
    scalars.insert("grad_tau_sq".to_string(), h1_norm(&d.tau).powi(2));
    scalars.insert("grad_theta_sq".to_string(), grad_theta * grad_theta);
    scalars.insert(
        "lh_inner".to_string(),
        d.first.vartheta1_l.inner(&d.first.vartheta1_h)?,
    );
    scalars.insert("residual".to_string(), d.residual);
    scalars.insert("u_l2".to_string(), crate::spectral::vector_norms(&u).l2);
    scalars.insert(
        "split_defect".to_string(),
        l2_norm(&split) / l2_norm(v1).max(f64::MIN_POSITIVE),
    );
    scalars.insert(
        "vartheta1_l_above_3kb".to_string(),
        l2_norm(&high_pass(&d.first.vartheta1_l, 3.0 * kb)),
    );
    scalars.insert(
        "iterations_tau".to_string(),
        d.reports.tau.iterations as f64,
    );
    scalars.insert(
        "iterations_vartheta".to_string(),
        d.reports
            .vartheta
            .as_ref()
            .map_or(d.increments.len(), |r| r.iterations) as f64,
    );
    scalars.insert(
        "iterations_phi".to_string(),
        d.reports.phi.iterations as f64,
    );
    if let Some(td) = d.truncation_defect {
        scalars.insert("truncation_defect".to_string(), td);
    }
    if cfg.cross_check {
        let (direct, _) = sys.solve_direct(g, &cfg.solve)?;
        scalars.insert(
            "direct_gap".to_string(),
            l2_norm(&(&direct - &theta)) / l2_norm(&theta).max(f64::MIN_POSITIVE),
        );
    }

    Ok(RealizationRecord {
        index,
        seed,
        spectra,
        scalars,
        tau_power,
        reports: d.reports,
        h1_bound_holds: grad_theta <= h1_rhs + h1_slack + 1e-12 * h1_rhs,
    })
}

/// Per-shell mean and variance of one accumulated spectrum.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FieldShellStats {
    pub field: FieldTag,
    pub weight: u32,
    pub counts: Vec<usize>,
    pub mean: Vec<f64>,
    pub variance: Vec<f64>,
}

impl FieldShellStats {
    pub fn shells(&self) -> usize {
        self.mean.len()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EnsembleStats {
    pub members: usize,
    pub lattice_n: usize,
    pub kappa_max: usize,
    /// Sorted by `(field name, weight)`.
    pub shells: Vec<FieldShellStats>,
    pub scalars: BTreeMap<String, ScalarStat>,
    /// Ensemble mean of `|τ̂_j|²`.
    pub tau_power: ModePower,
    /// Members violating `‖∇θ‖₂ <= ‖|∇|^{-1}g‖₂`.
    pub h1_violations: usize,
}

impl EnsembleStats {
    /// Reduces records (in index order) with a balanced tree of pairwise merges.
    pub fn from_records(records: &[RealizationRecord], lattice: Lattice) -> Result<Self> {
        if records.is_empty() {
            return param("no realizations to reduce");
        }
        let first = &records[0];
        let keys: Vec<(FieldTag, u32)> = first.spectra.iter().map(|(t, w, _)| (*t, *w)).collect();
        let scalar_names: Vec<String> = first.scalars.keys().cloned().collect();
        let tau_modes: Vec<[i64; 2]> = {
            let mut all: Vec<[i64; 2]> = records
                .iter()
                .flat_map(|r| r.tau_power.modes.iter().map(|m| m.0))
                .collect();
            all.sort_unstable();
            all.dedup();
            all
        };

        let leaves: Vec<Moments> = records
            .iter()
            .map(|r| {
                let mut v = Vec::new();
                for (t, w) in &keys {
                    v.extend_from_slice(
                        &r.spectrum(*t, *w).expect("records share field layout").sums,
                    );
                }
                for name in &scalar_names {
                    v.push(r.scalar(name).unwrap_or(f64::NAN));
                }
                for k in &tau_modes {
                    v.push(
                        r.tau_power
                            .modes
                            .iter()
                            .find(|m| m.0 == *k)
                            .map_or(0.0, |m| m.1),
                    );
                }
                Moments::leaf(&v)
            })
            .collect();
        let total = Moments::tree(leaves).expect("non-empty");
        let var = total.variance();

        let mut offset = 0;
        let mut shells = Vec::new();
        for (i, (t, w)) in keys.iter().enumerate() {
            let len = first.spectra[i].2.sums.len();
            shells.push(FieldShellStats {
                field: *t,
                weight: *w,
                counts: first.spectra[i].2.counts.clone(),
                mean: total.mean[offset..offset + len].to_vec(),
                variance: var[offset..offset + len].to_vec(),
            });
            offset += len;
        }
        shells.sort_by(|a, b| (a.field.as_str(), a.weight).cmp(&(b.field.as_str(), b.weight)));
        let mut scalars = BTreeMap::new();
        for name in &scalar_names {
            scalars.insert(
                name.clone(),
                ScalarStat {
                    mean: total.mean[offset],
                    variance: var[offset],
                },
            );
            offset += 1;
        }
        let tau_power = ModePower {
            modes: tau_modes
                .iter()
                .enumerate()
                .map(|(i, k)| (*k, total.mean[offset + i]))
                .collect(),
        };
        Ok(Self {
            members: records.len(),
            lattice_n: lattice.n(),
            kappa_max: lattice.kappa_max(),
            shells,
            scalars,
            tau_power,
            h1_violations: records.iter().filter(|r| !r.h1_bound_holds).count(),
        })
    }

    pub fn field(&self, tag: FieldTag, w: u32) -> Result<&FieldShellStats> {
        self.shells
            .iter()
            .find(|s| s.field == tag && s.weight == w)
            .ok_or_else(|| Error::UnknownField(format!("{tag} (w={w})")))
    }

    pub fn scalar(&self, name: &str) -> Result<ScalarStat> {
        self.scalars
            .get(name)
            .copied()
            .ok_or_else(|| Error::UnknownField(name.to_string()))
    }
}

/// Records plus their reduction.
#[derive(Debug, Clone)]
pub struct EnsembleRun {
    pub records: Vec<RealizationRecord>,
    pub stats: EnsembleStats,
}

/// Runs all members on the current rayon pool. Members are independent and
/// reduced in index order, so results do not depend on scheduling. The first
/// failing member (by index) is reported.
pub fn run_ensemble(cfg: &EnsembleConfig) -> Result<EnsembleRun> {
    cfg.validate()?;
    let results: Vec<Result<RealizationRecord>> = (0..cfg.members)
        .into_par_iter()
        .map(|m| realize(cfg, m))
        .collect();
    let mut records = Vec::with_capacity(cfg.members);
    for r in results {
        records.push(r?);
    }
    let stats = EnsembleStats::from_records(&records, cfg.lattice)?;
    Ok(EnsembleRun { records, stats })
}

/// `κ ↦ E‖|∇|^w f^{>κ}‖₂²` for every stored shell, `κ = 1, 2, …`.
pub fn tail_spectrum(stats: &EnsembleStats, tag: FieldTag, w: u32) -> Result<Vec<(usize, f64)>> {
    let s = stats.field(tag, w)?;
    let four_pi_sq = 4.0 * std::f64::consts::PI.powi(2);
    let mut out = vec![(0, 0.0); s.mean.len()];
    let mut acc = 0.0;
    for i in (0..s.mean.len()).rev() {
        acc += s.mean[i];
        out[i] = (i + 1, four_pi_sq * acc);
    }
    Ok(out)
}
