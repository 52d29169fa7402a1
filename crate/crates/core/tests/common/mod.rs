//! Helpers shared by the integration tests: brute-force oracles and random
//! matrix generators, written independently of the library code.
#![allow(dead_code)]

use num_complex::Complex64;
use qcloner_core::ComplexMatrix;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Permanent as the plain sum over all n! permutations.
pub fn naive_permanent(m: &ComplexMatrix) -> Complex64 {
    let n = m.rows();
    let mut cols: Vec<usize> = (0..n).collect();
    let mut total = c(0.0, 0.0);
    permute(&mut cols, 0, &mut |perm| {
        let mut prod = c(1.0, 0.0);
        for (i, &j) in perm.iter().enumerate() {
            prod *= m[(i, j)];
        }
        total += prod;
    });
    if n == 0 {
        return c(1.0, 0.0);
    }
    total
}

fn permute(items: &mut Vec<usize>, k: usize, visit: &mut impl FnMut(&[usize])) {
    if k == items.len() {
        if !items.is_empty() {
            visit(items);
        }
        return;
    }
    for i in k..items.len() {
        items.swap(k, i);
        permute(items, k + 1, visit);
        items.swap(k, i);
    }
}

pub fn random_complex_matrix<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    ComplexMatrix::from_fn(n, n, |_, _| {
        c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
    })
}

/// Haar-like random unitary: Gram-Schmidt on a complex Gaussian matrix.
pub fn random_unitary<R: Rng>(rng: &mut R, n: usize) -> ComplexMatrix {
    let mut cols: Vec<Vec<Complex64>> = Vec::with_capacity(n);
    while cols.len() < n {
        let mut v: Vec<Complex64> = (0..n)
            .map(|_| c(rng.sample(StandardNormal), rng.sample(StandardNormal)))
            .collect();
        for u in &cols {
            let proj: Complex64 = u.iter().zip(&v).map(|(a, b)| a.conj() * b).sum();
            for (vi, ui) in v.iter_mut().zip(u) {
                *vi -= proj * ui;
            }
        }
        let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm < 1e-8 {
            continue;
        }
        cols.push(v.into_iter().map(|z| z / norm).collect());
    }
    ComplexMatrix::from_fn(n, n, |i, j| cols[j][i])
}

/// The gate matrix written out entry by entry, modes ordered H1, V1, H2, V2.
pub fn gate_matrix(phi: f64, theta: f64) -> [[f64; 4]; 4] {
    let (cp, sp) = ((2.0 * phi).cos(), (2.0 * phi).sin());
    let (ct, st) = ((2.0 * theta).cos(), (2.0 * theta).sin());
    [
        [cp, 0.0, sp, 0.0],
        [0.0, ct, 0.0, st],
        [-sp, 0.0, cp, 0.0],
        [0.0, -st, 0.0, ct],
    ]
}
