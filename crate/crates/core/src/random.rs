//! Seeded random states and operators for sweeps and tests.

use rand::Rng;
use rand_distr::StandardNormal;

use crate::linalg::{c, eig_hermitian, trace, Complex, ComplexMatrix, HERMITIAN_TOL};
use crate::state::{DensityOperator, Ket};

fn gaussian_complex<R: Rng + ?Sized>(rng: &mut R) -> Complex {
    c(rng.sample(StandardNormal), rng.sample(StandardNormal))
}

/// Matrix with i.i.d. standard complex Gaussian entries.
pub fn random_matrix<R: Rng + ?Sized>(rows: usize, cols: usize, rng: &mut R) -> ComplexMatrix {
    let data = (0..rows * cols).map(|_| gaussian_complex(rng)).collect();
    ComplexMatrix::from_vec(rows, cols, data).expect("finite gaussian entries")
}

/// `(G + G^dagger) / 2` for a Gaussian `G`.
pub fn random_hermitian<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    random_matrix(dim, dim, rng)
        .hermitian_part()
        .expect("square")
}

/// Unitary taken from the eigenvectors of a random Hermitian matrix.
pub fn random_unitary<R: Rng + ?Sized>(dim: usize, rng: &mut R) -> ComplexMatrix {
    let h = random_hermitian(dim, rng);
    eig_hermitian(&h, HERMITIAN_TOL)
        .expect("random Hermitian matrices diagonalize")
        .eigenvectors
}

pub fn random_ket<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> Ket {
    let n: usize = dims.iter().product();
    let amps: Vec<Complex> = (0..n).map(|_| gaussian_complex(rng)).collect();
    Ket::normalized(dims.to_vec(), amps).expect("nonzero gaussian vector")
}

/// Full-rank mixed state `G G^dagger / tr(G G^dagger)`.
pub fn random_density<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityOperator {
    let n: usize = dims.iter().product();
    let g = random_matrix(n, n, rng);
    let gg = &g * &g.adjoint();
    let tr = trace(&gg).expect("square").re;
    let rho = gg.scale_real(1.0 / tr).hermitian_part().expect("square");
    DensityOperator::new(dims.to_vec(), rho).expect("Ginibre states are valid")
}

/// Random mixed state of random rank in `1..=dim`.
pub fn random_density_any_rank<R: Rng + ?Sized>(dims: &[usize], rng: &mut R) -> DensityOperator {
    let n: usize = dims.iter().product();
    let rank = rng.random_range(1..=n);
    let g = random_matrix(n, rank, rng);
    let gg = &g * &g.adjoint();
    let tr = trace(&gg).expect("square").re;
    let rho = gg.scale_real(1.0 / tr).hermitian_part().expect("square");
    DensityOperator::new(dims.to_vec(), rho).expect("Wishart states are valid")
}
