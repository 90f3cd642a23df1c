//! Lattice bookkeeping, projections, fractional Laplacians, dealiased
//! products, norms and shell sums on the 2π-periodic torus.

pub(crate) mod fft;
mod field;
mod lattice;
mod ops;
mod shells;

pub use fft::{from_physical_grid, physical_grid};
pub use field::{SpectralField, VectorField};
pub use lattice::{isqrt, Lattice, Mode};
pub use ops::{
    advect, dealiased_product, divergence, fractional_laplacian, grad_l1_fourier, gradient,
    h1_norm, h2_norm, high_pass, l1_fourier, l2_norm, low_pass, norms, project, sobolev_norm,
    vector_norms, Advector, Band, FieldNorms,
};
pub use shells::{shell_counts, shell_spectrum, vector_shell_spectrum, ShellSpectrum};

pub(crate) use field::{check_same as check_same_lattice, unit};
