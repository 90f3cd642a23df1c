//! `bht solve`: one realization through the low/high-mode decomposition.

use bht_core::analysis::FieldTag;
use bht_core::solver::{highmode_bound_report, TracerSystem};
use bht_core::spectral::{h1_norm, l2_norm, shell_spectrum, sobolev_norm, vector_norms};
use bht_core::velocity::{build_velocity, sample_phases};
use bht_core::SpectralField;
use serde_json::json;

use super::{manifest, push_spectrum, velocity_derived, Clock, Globals, SPECTRUM_HEADER};
use crate::config::RawConfig;
use crate::csv::Table;
use crate::error::CliResult;
use crate::manifest::{Manifest, RunWriter};

pub fn run(raw: &RawConfig, globals: &Globals) -> CliResult<Manifest> {
    let clock = Clock::start();
    let mut raw = raw.clone();
    if let Some(s) = globals.seed {
        raw.velocity.seed = s;
    }
    let lattice = raw.lattice()?;
    let params = raw.velocity(lattice)?;
    let source = raw.source(lattice)?;
    let (kb, origin) = raw.kappa_bar(lattice, &params, &source)?;
    let cfg = raw.solve_config(kb)?;
    let seed = raw.velocity.seed;
    let g = &source.field;

    let u = build_velocity(&params, &sample_phases(seed, lattice, None))?;
    let sys = TracerSystem::new(&u);
    let d = sys.decompose(g, &cfg, true)?;
    let theta = d.theta();
    let (direct, direct_report) = sys.solve_direct(g, &cfg)?;
    let rem = &d.vartheta - &d.first.vartheta1;

    let grad_theta = h1_norm(&theta);
    let h1_rhs = sobolev_norm(g, -1.0);
    let kappas: Vec<f64> = (1..=lattice.kappa_max()).map(|k| k as f64).collect();
    let highmode = highmode_bound_report(&theta, &u, params.beta(), &kappas);

    let fields: [(FieldTag, &SpectralField); 7] = [
        (FieldTag::Theta, &theta),
        (FieldTag::Tau, &d.tau),
        (FieldTag::Vartheta1, &d.first.vartheta1),
        (FieldTag::Vartheta1H, &d.first.vartheta1_h),
        (FieldTag::Vartheta, &d.vartheta),
        (FieldTag::VarthetaRem, &rem),
        (FieldTag::Phi, &d.phi),
    ];
    let mut spectra = Table::new(&SPECTRUM_HEADER);
    for (tag, f) in fields {
        for w in [0u32, 1] {
            let s = shell_spectrum(f, w)?;
            let zeros = vec![0.0; s.sums.len()];
            push_spectrum(
                &mut spectra,
                tag,
                w,
                &s.counts,
                &s.sums,
                &zeros,
                lattice.kappa_max(),
            );
        }
    }

    let mut derived = velocity_derived(&params, lattice);
    derived["kappa_bar"] = kb.into();
    derived["kappa_bar_origin"] = serde_json::to_value(&origin)?;
    derived["c_prime"] = raw.solver.c_prime.into();
    let m = manifest("solve", &raw, vec![seed], derived, &clock)?;

    let summary = json!({
        "run_id": m.run_id,
        "seed": seed,
        "kappa_bar": kb,
        "residual": d.residual,
        "truncation_defect": d.truncation_defect,
        "reports": d.reports,
        "direct": direct_report,
        "direct_gap": l2_norm(&(&direct - &theta)) / l2_norm(&theta).max(f64::MIN_POSITIVE),
        "norms": {
            "u_l2": vector_norms(&u).l2,
            "g_l2": l2_norm(g),
            "grad_theta": grad_theta,
            "grad_tau": h1_norm(&d.tau),
            "grad_vartheta1": h1_norm(&d.first.vartheta1),
            "grad_vartheta": h1_norm(&d.vartheta),
            "grad_phi": h1_norm(&d.phi),
            "inverse_grad_g": h1_rhs,
        },
        "h1_bound_holds": grad_theta <= h1_rhs * (1.0 + 1e-12) + d.residual * l2_norm(g),
        "highmode": highmode,
    });

    let mut w = RunWriter::create(&globals.out_dir(&raw))?;
    w.write_json("solve.json", &summary)?;
    w.write("spectra.csv", spectra.to_text().as_bytes())?;
    w.finish(m)
}
