//! Numerical witnesses for the inequalities and kernel bounds the analysis
//! relies on. Generic constants are measured and reported, never assumed.

mod fields;
mod kernels;
mod ladder;

pub use fields::{
    agmon, brezis_gallouet, gbiu, kinfty, poincare, riesz_divergence, tracer_bounds, u8_bound,
    verify_field_inequalities, young_convolution_check, Exponent, EXACT_SLACK,
};
pub use kernels::{
    antisymmetry_defect, kernel_l1, kernel_young_witness, KernelKind, KernelL1, KernelSpec,
    YoungWitness,
};
pub use ladder::{
    dirichlet_l1, dirichlet_one_exact, ladder_quadrature, lm_ladder, DirichletVariant,
};

use std::collections::BTreeMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::derive_seed;
use crate::error::{Error, Result};
use crate::solver::{SolveConfig, SourceSpec, TracerSystem};
use crate::spectral::{Lattice, SpectralField, VectorField};
use crate::velocity::{build_velocity, sample_phases, VelocityParams};

/// One inequality evaluated on one case.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BoundReport {
    pub id: String,
    pub case: String,
    pub left: f64,
    /// Right side without the constant.
    pub right: f64,
    /// 1 for inequalities that hold exactly on the lattice; the measured
    /// `left / right` otherwise.
    pub constant: f64,
    pub measured: bool,
    /// `1 - left / (constant * right)`.
    pub margin: f64,
    pub pass: bool,
    pub note: String,
}

impl BoundReport {
    pub fn exact(id: &str, case: impl Into<String>, left: f64, right: f64, slack: f64) -> Self {
        let margin = if right > 0.0 {
            1.0 - left / right
        } else if left == 0.0 {
            0.0
        } else {
            f64::NEG_INFINITY
        };
        Self {
            id: id.to_string(),
            case: case.into(),
            left,
            right,
            constant: 1.0,
            measured: false,
            margin,
            pass: left <= right + slack * right.abs() && left.is_finite(),
            note: String::new(),
        }
    }

    pub fn measured(id: &str, case: impl Into<String>, left: f64, right: f64) -> Self {
        let constant = if right > 0.0 { left / right } else { 0.0 };
        Self {
            id: id.to_string(),
            case: case.into(),
            left,
            right,
            constant,
            measured: true,
            margin: 0.0,
            pass: constant.is_finite() && left.is_finite(),
            note: String::new(),
        }
    }
}

/// Check ids in report order.
pub const CHECK_IDS: [&str; 18] = [
    "poi",
    "gbiu",
    "agmon",
    "bgu",
    "kinfty",
    "u8",
    "tht-h1",
    "tht-h2",
    "tht-l8",
    "tht-w18",
    "young",
    "ladder",
    "dirichlet",
    "kernel-t",
    "kernel-r",
    "kernel-symmetry",
    "kernel-young",
    "riesz-small-s",
];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteConfig {
    pub n: usize,
    pub seed: u64,
    /// Random fields for the exact lattice inequalities.
    pub samples: usize,
    pub kappas: Vec<f64>,
    /// Velocity realizations (per family) used for solves and velocity bounds.
    pub realizations: usize,
    pub steep: VelocityParams,
    pub kraichnan: VelocityParams,
    pub dirichlet_orders: Vec<u32>,
    pub kernel_kappas: Vec<f64>,
    pub kernel_s: Vec<f64>,
    pub small_s: Vec<f64>,
}

impl Default for SuiteConfig {
    fn default() -> Self {
        Self {
            n: 64,
            seed: 1,
            samples: 100,
            kappas: vec![1.0, 2.0, 4.0, 8.0, 16.0],
            realizations: 4,
            steep: VelocityParams::steep(1.0, -2.5).expect("valid"),
            kraichnan: VelocityParams::kraichnan(1.0, 16).expect("valid"),
            dirichlet_orders: vec![16, 64, 256, 1024, 4096, 16384],
            kernel_kappas: vec![8.0, 16.0, 32.0, 64.0],
            kernel_s: vec![0.5, 1.0, 2.0],
            small_s: vec![0.1, 0.05],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    /// Sorted by check id order, then case.
    pub reports: Vec<BoundReport>,
    /// Largest measured constant per check id.
    pub constants: BTreeMap<String, f64>,
}

/// A measured constant that moved away from its baseline.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Drift {
    pub id: String,
    pub baseline: f64,
    pub measured: Option<f64>,
    pub relative: f64,
}

impl SuiteReport {
    pub fn passed(&self) -> bool {
        self.reports.iter().all(|r| r.pass)
    }

    pub fn failures(&self) -> impl Iterator<Item = &BoundReport> {
        self.reports.iter().filter(|r| !r.pass)
    }

    /// Baseline entries whose constant moved by more than `tol` (relative),
    /// or that were not measured at all in this run.
    pub fn drift(&self, baseline: &BTreeMap<String, f64>, tol: f64) -> Vec<Drift> {
        baseline
            .iter()
            .filter_map(|(id, &b)| {
                let m = self.constants.get(id).copied();
                let relative = m.map_or(f64::INFINITY, |m| {
                    if b == 0.0 {
                        m.abs()
                    } else {
                        (m - b).abs() / b.abs()
                    }
                });
                (relative > tol).then(|| Drift {
                    id: id.clone(),
                    baseline: b,
                    measured: m,
                    relative,
                })
            })
            .collect()
    }
}

struct Fixtures {
    lattice: Lattice,
    cfg: SuiteConfig,
}

impl Fixtures {
    fn random_field(&self, i: usize) -> SpectralField {
        let decay = 1.0 + 0.5 * (i % 4) as f64;
        SpectralField::random(self.lattice, derive_seed(self.cfg.seed, i as u64), decay)
    }

    fn velocities(&self) -> Result<Vec<(String, VelocityParams, VectorField)>> {
        let mut out = Vec::new();
        for (name, p) in [
            ("steep", &self.cfg.steep),
            ("kraichnan", &self.cfg.kraichnan),
        ] {
            for r in 0..self.cfg.realizations {
                let seed = derive_seed(self.cfg.seed ^ 0x5eed, r as u64);
                let u = build_velocity(p, &sample_phases(seed, self.lattice, None))?;
                out.push((format!("{name} #{r}"), *p, u));
            }
        }
        Ok(out)
    }

    fn solves(&self) -> Result<Vec<Solved>> {
        let g = SourceSpec::unit_shells(self.lattice, 2.0)?.field;
        let cfg = SolveConfig::default();
        let mut out = Vec::new();
        for (case, _, u) in self.velocities()? {
            let sys = TracerSystem::new(&u);
            let (theta, rep) = sys.solve_direct(&g, &cfg)?;
            out.push((case, u, theta, g.clone(), rep.residual));
        }
        Ok(out)
    }
}

/// Case label, velocity, solution, source and residual.
type Solved = (String, VectorField, SpectralField, SpectralField, f64);

fn run_check(id: &str, fx: &Fixtures) -> Result<Vec<BoundReport>> {
    let cfg = &fx.cfg;
    let mut out = Vec::new();
    match id {
        "poi" | "kinfty" => {
            for i in 0..cfg.samples {
                let f = fx.random_field(i);
                for &k in &cfg.kappas {
                    let mut r = if id == "poi" {
                        poincare(&f, k)
                    } else if k >= 2.0 {
                        kinfty(&f, k)
                    } else {
                        continue;
                    };
                    r.case = format!("field {i} {}", r.case);
                    out.push(r);
                }
            }
        }
        "gbiu" => {
            for i in 0..cfg.samples {
                let u = VectorField::new(fx.random_field(2 * i), fx.random_field(2 * i + 1))?;
                out.push(gbiu(&u, format!("field {i}")));
            }
        }
        "agmon" | "bgu" | "u8" => {
            for (case, p, u) in fx.velocities()? {
                match id {
                    "agmon" => out.push(agmon(&u, case)),
                    "bgu" => out.push(brezis_gallouet(&u, case)),
                    _ => {
                        if let Some(mut r) = u8_bound(&u, &p) {
                            r.case = case;
                            out.push(r);
                        }
                    }
                }
            }
        }
        "tht-h1" | "tht-h2" | "tht-l8" | "tht-w18" => {
            for (case, u, theta, g, res) in fx.solves()? {
                out.extend(
                    tracer_bounds(&u, &theta, &g, res, &case)
                        .into_iter()
                        .filter(|r| r.id == id),
                );
            }
        }
        "young" => {
            let lat = Lattice::new(32)?;
            use Exponent::*;
            let triples = [
                (One, One, One),
                (One, Two, Two),
                (Two, One, Two),
                (One, Infinity, Infinity),
                (Infinity, One, Infinity),
                (Two, Two, Infinity),
            ];
            for i in 0..4u64 {
                let f = SpectralField::random(lat, derive_seed(cfg.seed, 1000 + 2 * i), 1.5);
                let g = SpectralField::random(lat, derive_seed(cfg.seed, 1001 + 2 * i), 1.0);
                for (p, q, r) in triples {
                    for mut rep in young_convolution_check(&f, &g, p, q, r)? {
                        rep.case = format!("pair {i} {}", rep.case);
                        out.push(rep);
                    }
                }
            }
        }
        "ladder" => {
            for m in 0..=2u32 {
                for r in [0.25, 1.0, 3.0] {
                    for kappa in [5.0, 50.0] {
                        let a = lm_ladder(kappa, r, m)?;
                        let b = ladder_quadrature(kappa, r, m)?;
                        let mut rep = BoundReport::exact(
                            "ladder",
                            format!("m={m} r={r} kappa={kappa}"),
                            (a - b).abs() / a,
                            1e-8,
                            0.0,
                        );
                        rep.note = format!("closed form {a:.15e}, quadrature {b:.15e}");
                        out.push(rep);
                    }
                }
            }
        }
        "dirichlet" => {
            let one = dirichlet_l1(1, DirichletVariant::D)?;
            let mut r = BoundReport::exact(
                "dirichlet",
                "N=1 closed form",
                (one - dirichlet_one_exact()).abs(),
                1e-12,
                0.0,
            );
            r.note = format!("quadrature {one:.15e}");
            out.push(r);
            for n in [2u32, 8, 64] {
                let d = dirichlet_l1(n, DirichletVariant::D)?;
                let t = dirichlet_l1(2 * n + 1, DirichletVariant::DTilde)?;
                out.push(BoundReport::exact(
                    "dirichlet",
                    format!("|D_{n}| = |D~_{}|", 2 * n + 1),
                    (d - t).abs() / d,
                    1e-12,
                    0.0,
                ));
            }
            for &n in &cfg.dirichlet_orders {
                let d = dirichlet_l1(n, DirichletVariant::D)?;
                out.push(BoundReport::measured(
                    "dirichlet",
                    format!("N={n}"),
                    d,
                    (n as f64).ln(),
                ));
            }
        }
        "kernel-t" | "kernel-r" => {
            let kind = if id == "kernel-t" {
                KernelKind::T
            } else {
                KernelKind::R
            };
            for &s in &cfg.kernel_s {
                for &k in &cfg.kernel_kappas {
                    let res = kernel_l1(&KernelSpec::new(kind, s, k))?;
                    let mut l2 = lm_ladder(2.0 * k, s, 2)?;
                    if kind == KernelKind::R {
                        l2 /= s;
                    }
                    let mut r = BoundReport::measured(
                        id,
                        format!("s={s} kappa={k}"),
                        res.l1 * k.powf(s),
                        l2,
                    );
                    r.note = format!("kernel L1 {:.6e} on grid {}", res.l1, res.spec.grid);
                    out.push(r);
                }
            }
        }
        "kernel-symmetry" => {
            for &s in &cfg.kernel_s {
                let spec = KernelSpec::new(KernelKind::R, s, 8.0);
                let d = antisymmetry_defect(&spec.samples()?, spec.grid);
                out.push(BoundReport::exact(id, format!("s={s}"), d, 1e-12, 0.0));
            }
        }
        "kernel-young" => {
            for kind in [KernelKind::T, KernelKind::R] {
                for &s in &cfg.kernel_s {
                    let spec = KernelSpec::new(kind, s, 16.0);
                    let w = kernel_young_witness(&spec, cfg.seed)?;
                    out.push(BoundReport::exact(
                        id,
                        format!("{kind:?} s={s}"),
                        w.applied_sup,
                        w.bound,
                        EXACT_SLACK,
                    ));
                }
            }
        }
        "riesz-small-s" => {
            for &s in &cfg.small_s {
                let res = kernel_l1(&KernelSpec::new(KernelKind::R, s, 1.0))?;
                let mut r = BoundReport::measured(id, format!("s={s}"), res.l1, s.powi(-3));
                r.note = format!("band-limited proxy on band {}; trend only", res.spec.band);
                out.push(r);
            }
        }
        other => return Err(Error::UnknownField(format!("verification check {other}"))),
    }
    Ok(out)
}

/// Runs the selected checks (all when `only` is `None`) in parallel and
/// collects them in [`CHECK_IDS`] order.
pub fn run_suite(cfg: &SuiteConfig, only: Option<&[String]>) -> Result<SuiteReport> {
    let ids: Vec<&str> = match only {
        None => CHECK_IDS.to_vec(),
        Some(sel) => {
            for s in sel {
                if !CHECK_IDS.contains(&s.as_str()) {
                    return Err(Error::UnknownField(format!("verification check {s}")));
                }
            }
            CHECK_IDS
                .iter()
                .copied()
                .filter(|id| sel.iter().any(|s| s == id))
                .collect()
        }
    };
    let fx = Fixtures {
        lattice: Lattice::new(cfg.n)?,
        cfg: cfg.clone(),
    };
    let results: Vec<Result<Vec<BoundReport>>> =
        ids.par_iter().map(|id| run_check(id, &fx)).collect();
    let mut reports = Vec::new();
    for r in results {
        reports.extend(r?);
    }
    let mut constants = BTreeMap::new();
    for r in reports.iter().filter(|r| r.measured) {
        let e = constants.entry(r.id.clone()).or_insert(f64::NEG_INFINITY);
        *e = f64::max(*e, r.constant);
    }
    Ok(SuiteReport { reports, constants })
}
