//! Seeded random generators for machines, modes and test matrices.

use nalgebra::{DMatrix, Vector3, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Exp1, StandardNormal};

use crate::channel::{FourVector, IsometryMap};
use crate::optimizer::class_p_check;
use crate::quality::ModeVector;
use crate::C64;

pub type TrialRng = ChaCha8Rng;

/// Independent stream for trial `index` of a run seeded with `seed`; results
/// do not depend on how trials are scheduled.
pub fn trial_rng(seed: u64, index: u64) -> TrialRng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index);
    rng
}

pub fn unit_vector3<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    loop {
        let v = Vector3::from_fn(|_, _| rng.sample::<f64, _>(StandardNormal));
        let n = v.norm();
        if n > 1e-8 {
            return v / n;
        }
    }
}

pub fn mode<R: Rng + ?Sized>(rng: &mut R) -> ModeVector {
    ModeVector::new(unit_vector3(rng)).expect("unit vector")
}

/// Uniform point on the probability simplex in four dimensions.
pub fn simplex4<R: Rng + ?Sized>(rng: &mut R) -> Vector4<f64> {
    let v = Vector4::from_fn(|_, _| rng.sample::<f64, _>(Exp1));
    v / v.sum()
}

/// Uniform point in the tetrahedron of possible centered semi-axes.
pub fn tetrahedron_point<R: Rng + ?Sized>(rng: &mut R) -> Vector3<f64> {
    let lam = crate::pauli::lambda_matrix().0;
    let b = lam * simplex4(rng);
    Vector3::new(b[1], b[2], b[3])
}

/// Normalized `β ≥ 0` with `β²` uniform on the simplex.
pub fn positive_beta<R: Rng + ?Sized>(rng: &mut R) -> FourVector {
    FourVector(simplex4(rng).map(f64::sqrt))
}

/// Normalized `β` in class P (rejection from [`positive_beta`]).
pub fn class_p_beta<R: Rng + ?Sized>(rng: &mut R) -> FourVector {
    loop {
        let beta = positive_beta(rng);
        if class_p_check(&beta) {
            return beta;
        }
    }
}

pub fn gaussian_matrix<R: Rng + ?Sized>(rng: &mut R, rows: usize, cols: usize) -> DMatrix<C64> {
    DMatrix::from_fn(rows, cols, |_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    })
}

/// Modified Gram–Schmidt on the columns.
pub fn orthonormalize_columns(mut m: DMatrix<C64>) -> DMatrix<C64> {
    for j in 0..m.ncols() {
        for k in 0..j {
            let proj = m.column(k).dotc(&m.column(j));
            let col_k = m.column(k).clone_owned();
            m.column_mut(j).axpy(-proj, &col_k, C64::new(1.0, 0.0));
        }
        let n = m.column(j).norm();
        m.column_mut(j).unscale_mut(n);
    }
    m
}

/// Random isometry `A → B ⊗ E` with `dim E = dim_e`, from an orthonormalized
/// complex Gaussian matrix.
pub fn isometry<R: Rng + ?Sized>(rng: &mut R, dim_e: usize) -> IsometryMap {
    let v = orthonormalize_columns(gaussian_matrix(rng, 2 * dim_e, 2));
    IsometryMap::new(v).expect("orthonormal columns")
}

pub fn unitary<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    orthonormalize_columns(gaussian_matrix(rng, n, n))
}

pub fn hermitian<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let a = gaussian_matrix(rng, n, n);
    (&a + a.adjoint()) * C64::new(0.5, 0.0)
}

/// Random positive semidefinite matrix `X X†`, sometimes rank deficient.
pub fn positive<R: Rng + ?Sized>(rng: &mut R, n: usize) -> DMatrix<C64> {
    let rank = rng.random_range(1..=n);
    let x = gaussian_matrix(rng, n, rank);
    &x * x.adjoint()
}
