//! Shared random generators for the integration tests.
#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use vqclone_core::qmath::{c, ComplexMatrix, DensityMatrix, PureState, C64};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_complex(rng: &mut ChaCha8Rng) -> C64 {
    c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
}

pub fn random_matrix(dim: usize, rng: &mut ChaCha8Rng) -> ComplexMatrix {
    ComplexMatrix::from_vec(dim, (0..dim * dim).map(|_| random_complex(rng)).collect()).unwrap()
}

pub fn random_pure(num_qubits: usize, rng: &mut ChaCha8Rng) -> PureState {
    PureState::normalized((0..1usize << num_qubits).map(|_| random_complex(rng)).collect()).unwrap()
}

/// A·A† normalized to unit trace: full-rank with probability one.
pub fn random_density(num_qubits: usize, rng: &mut ChaCha8Rng) -> DensityMatrix {
    let dim = 1usize << num_qubits;
    let a = random_matrix(dim, rng);
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..dim {
                s += a.get(i, k) * a.get(j, k).conj();
            }
            m.set(i, j, s);
        }
    }
    let tr = m.trace().re;
    DensityMatrix::new(m.scale(C64::new(1.0 / tr, 0.0))).unwrap()
}

/// Naive product of two matrices.
pub fn matmul(a: &ComplexMatrix, b: &ComplexMatrix) -> ComplexMatrix {
    let dim = a.dim();
    let mut m = ComplexMatrix::zeros(dim);
    for i in 0..dim {
        for j in 0..dim {
            let mut s = C64::new(0.0, 0.0);
            for k in 0..dim {
                s += a.get(i, k) * b.get(k, j);
            }
            m.set(i, j, s);
        }
    }
    m
}
