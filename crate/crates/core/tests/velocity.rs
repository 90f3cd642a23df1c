use std::f64::consts::PI;

use bht_core::spectral::{physical_grid, vector_norms, Lattice};
use bht_core::velocity::{
    analytic_norms, build_velocity, l2_tail_continuum_sq, sample_phases, VelocityParams,
};
use num_complex::Complex64;

#[test]
fn distinct_phases_are_uncorrelated() {
    let l = Lattice::new(16).unwrap();
    let (j, k) = (l.index_of(1, 2).unwrap(), l.index_of(3, -1).unwrap());
    let m = 10_000;
    let mut acc = Complex64::new(0.0, 0.0);
    for seed in 0..m {
        let p = sample_phases(seed, l, None);
        acc += p.phase_at(j) * p.phase_at(k).conj();
    }
    let mean = acc / m as f64;
    assert!(mean.norm() <= 5.0 / (m as f64).sqrt(), "{mean}");
}

#[test]
fn frozen_keying() {
    let l = Lattice::new(32).unwrap();
    let a = sample_phases(1, l, Some(8.0));
    let b = sample_phases(2, l, Some(8.0));
    for m in l.modes() {
        let same = a.phase_at(m.index) == b.phase_at(m.index);
        assert_eq!(same, m.norm_sq() < 64, "{:?}", m.k);
    }
    assert_eq!(sample_phases(1, l, None), sample_phases(1, l, None));
}

#[test]
fn physical_field_is_real() {
    let l = Lattice::new(32).unwrap();
    let p = VelocityParams::kraichnan(1.0, 8).unwrap();
    let u = build_velocity(&p, &sample_phases(3, l, None)).unwrap();
    let norm = vector_norms(&u).l2;
    for c in [&u.x, &u.y] {
        let grid = physical_grid(c, 64).unwrap();
        let imag = grid.iter().fold(0.0f64, |a, z| a.max(z.im.abs()));
        assert!(imag <= 1e-12 * norm);
    }
}

#[test]
fn l2_is_seed_independent() {
    let l = Lattice::new(32).unwrap();
    let p = VelocityParams::steep(1.0, -2.5).unwrap();
    let exact = analytic_norms(&p, l).l2_exact;
    for seed in 0..4 {
        let u = build_velocity(&p, &sample_phases(seed, l, None)).unwrap();
        assert!((vector_norms(&u).l2 - exact).abs() <= 1e-13 * exact);
        assert!(u.divergence_defect() <= 1e-15 * exact);
    }
}

#[test]
fn steep_tail_fraction_approaches_continuum() {
    // Lattice sums against the continuum tail ∝ κ^{2β+2}; the relative gap
    // shrinks with κ since shell-counting errors are O(1/κ).
    let l = Lattice::new(256).unwrap();
    let p = VelocityParams::steep(1.0, -2.5).unwrap();
    let a = analytic_norms(&p, l);
    let gap = |kappa: usize| {
        let lat = a.l2_tail(kappa).powi(2) - a.l2_tail(l.kappa_max()).powi(2);
        let cont =
            l2_tail_continuum_sq(&p, kappa as f64) - l2_tail_continuum_sq(&p, l.kappa_max() as f64);
        (lat / cont - 1.0).abs()
    };
    let (g8, g16, g32) = (gap(8), gap(16), gap(32));
    assert!(g16 < g8 && g32 < g16, "{g8} {g16} {g32}");
    assert!(g16 < 0.1);
}

#[test]
fn kraichnan_continuum_l2() {
    let p = VelocityParams::kraichnan(1.0, 32).unwrap();
    let a = analytic_norms(&p, Lattice::new(128).unwrap());
    let expect = ((2.0 * PI).powi(3) * (1.0 - 32f64.powi(-2)) / 2.0).sqrt();
    assert!((a.l2_continuum - expect).abs() < 1e-12 * expect);
    assert!(VelocityParams::kraichnan(1.0, 3).is_err());
    let too_big = VelocityParams::kraichnan(1.0, 64).unwrap();
    assert!(too_big.validate_for(Lattice::new(64).unwrap()).is_err());
}
