//! `bht gen-velocity`: one velocity realization as coefficient tables.
//!
//! `velocity.bin` layout, little endian: `b"BHTV"`, u32 version, u32 N,
//! u64 seed, u32 mode count, then per retained mode i32 k1, i32 k2 and
//! f64 `Re ûx, Im ûx, Re ûy, Im ûy`, in storage order.

use bht_core::spectral::vector_norms;
use bht_core::velocity::{build_velocity, sample_phases};
use bht_core::VectorField;

use super::{manifest, velocity_derived, Clock, Globals};
use crate::config::RawConfig;
use crate::csv::{float, Table};
use crate::error::{CliError, CliResult};
use crate::manifest::{Manifest, RunWriter};

pub const BIN_MAGIC: &[u8; 4] = b"BHTV";
pub const BIN_VERSION: u32 = 1;

pub fn run(raw: &RawConfig, globals: &Globals) -> CliResult<Manifest> {
    let clock = Clock::start();
    let mut raw = raw.clone();
    if let Some(s) = globals.seed {
        raw.velocity.seed = s;
    }
    let lattice = raw.lattice()?;
    let params = raw.velocity(lattice)?;
    let seed = raw.velocity.seed;
    let u = build_velocity(&params, &sample_phases(seed, lattice, None))?;

    let mut w = RunWriter::create(&globals.out_dir(&raw))?;
    w.write("velocity.csv", velocity_csv(&u).as_bytes())?;
    w.write("velocity.bin", &velocity_bin(&u, seed))?;
    let mut derived = velocity_derived(&params, lattice);
    let n = vector_norms(&u);
    derived["u_l2_measured"] = n.l2.into();
    derived["divergence_defect"] = u.divergence_defect().into();
    let m = manifest("gen-velocity", &raw, vec![seed], derived, &clock)?;
    w.finish(m)
}

pub fn velocity_csv(u: &VectorField) -> String {
    let mut t = Table::new(&["k1", "k2", "ux_re", "ux_im", "uy_re", "uy_im"]);
    for m in u.lattice().modes() {
        let (x, y) = (u.x.coeffs()[m.index], u.y.coeffs()[m.index]);
        t.push(vec![
            m.k[0].to_string(),
            m.k[1].to_string(),
            float(x.re),
            float(x.im),
            float(y.re),
            float(y.im),
        ]);
    }
    t.to_text()
}

pub fn velocity_bin(u: &VectorField, seed: u64) -> Vec<u8> {
    let l = u.lattice();
    let mut b = Vec::with_capacity(24 + l.mode_count() * 40);
    b.extend_from_slice(BIN_MAGIC);
    b.extend_from_slice(&BIN_VERSION.to_le_bytes());
    b.extend_from_slice(&(l.n() as u32).to_le_bytes());
    b.extend_from_slice(&seed.to_le_bytes());
    b.extend_from_slice(&(l.mode_count() as u32).to_le_bytes());
    for m in l.modes() {
        let (x, y) = (u.x.coeffs()[m.index], u.y.coeffs()[m.index]);
        b.extend_from_slice(&(m.k[0] as i32).to_le_bytes());
        b.extend_from_slice(&(m.k[1] as i32).to_le_bytes());
        for v in [x.re, x.im, y.re, y.im] {
            b.extend_from_slice(&v.to_le_bytes());
        }
    }
    b
}

/// Decoded `velocity.bin`.
#[derive(Debug, Clone, PartialEq)]
pub struct VelocityBin {
    pub n: u32,
    pub seed: u64,
    pub modes: Vec<([i32; 2], [f64; 4])>,
}

pub fn read_velocity_bin(bytes: &[u8]) -> CliResult<VelocityBin> {
    let bad = |m: &str| CliError::Io(format!("velocity.bin: {m}"));
    let mut pos = 0usize;
    let mut take = |k: usize| -> CliResult<&[u8]> {
        let s = bytes.get(pos..pos + k).ok_or_else(|| bad("truncated"))?;
        pos += k;
        Ok(s)
    };
    if take(4)? != BIN_MAGIC {
        return Err(bad("bad magic"));
    }
    let u32_at = |s: &[u8]| u32::from_le_bytes(s.try_into().expect("4 bytes"));
    let version = u32_at(take(4)?);
    if version != BIN_VERSION {
        return Err(bad(&format!("unsupported version {version}")));
    }
    let n = u32_at(take(4)?);
    let seed = u64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
    let count = u32_at(take(4)?) as usize;
    let mut modes = Vec::with_capacity(count);
    for _ in 0..count {
        let k1 = i32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        let k2 = i32::from_le_bytes(take(4)?.try_into().expect("4 bytes"));
        let mut v = [0.0; 4];
        for x in &mut v {
            *x = f64::from_le_bytes(take(8)?.try_into().expect("8 bytes"));
        }
        modes.push(([k1, k2], v));
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes"));
    }
    Ok(VelocityBin { n, seed, modes })
}

#[cfg(test)]
mod tests {
    use super::*;
    use bht_core::velocity::VelocityParams;
    use bht_core::Lattice;

    #[test]
    fn binary_round_trip() {
        let l = Lattice::new(16).unwrap();
        let p = VelocityParams::steep(1.0, -2.5).unwrap();
        let u = build_velocity(&p, &sample_phases(4, l, None)).unwrap();
        let bin = read_velocity_bin(&velocity_bin(&u, 4)).unwrap();
        assert_eq!((bin.n, bin.seed, bin.modes.len()), (16, 4, l.mode_count()));
        let i = l.index_of(1, -2).unwrap();
        let (k, v) = bin.modes.iter().find(|(k, _)| *k == [1, -2]).unwrap();
        assert_eq!(*k, [1, -2]);
        assert_eq!(v[0], u.x.coeffs()[i].re);
        assert!(read_velocity_bin(&velocity_bin(&u, 4)[..30]).is_err());
    }
}
