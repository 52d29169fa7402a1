//! Mode labels, Fock configurations and permanent-based transition amplitudes.

use std::fmt;
use std::ops::{Index, IndexMut, Mul};

use num_complex::Complex64;
use thiserror::Error;

/// Largest matrix order [`permanent`] accepts.
pub const MAX_PERMANENT_ORDER: usize = 24;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum FockError {
    #[error("matrix is {rows}x{cols}, expected a square matrix")]
    NotSquare { rows: usize, cols: usize },
    #[error("permanent of order {order} exceeds the limit of {MAX_PERMANENT_ORDER}")]
    TooLarge { order: usize },
    #[error("photon number not conserved: input carries {input}, output carries {output}")]
    PhotonMismatch { input: u32, output: u32 },
    #[error("configuration spans {config} modes but the transformation acts on {matrix}")]
    ModeMismatch { config: usize, matrix: usize },
    #[error("rows have inconsistent lengths")]
    Ragged,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Polarization {
    H,
    V,
}

impl Polarization {
    pub const ALL: [Polarization; 2] = [Polarization::H, Polarization::V];

    fn offset(self) -> usize {
        match self {
            Polarization::H => 0,
            Polarization::V => 1,
        }
    }
}

/// An optical mode: polarization × spatial path (paths numbered from 1).
///
/// The flat index orders modes as (H,1), (V,1), (H,2), (V,2), …
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModeLabel {
    pub polarization: Polarization,
    pub spatial: usize,
}

impl ModeLabel {
    pub const fn new(polarization: Polarization, spatial: usize) -> Self {
        Self {
            polarization,
            spatial,
        }
    }

    /// Flat index of this mode. Panics if `spatial` is zero.
    pub fn index(self) -> usize {
        assert!(self.spatial >= 1, "spatial modes are numbered from 1");
        2 * (self.spatial - 1) + self.polarization.offset()
    }

    pub fn from_index(index: usize) -> Self {
        let polarization = if index % 2 == 0 {
            Polarization::H
        } else {
            Polarization::V
        };
        Self::new(polarization, index / 2 + 1)
    }
}

impl fmt::Display for ModeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:?}{}", self.polarization, self.spatial)
    }
}

/// Photon occupation numbers, one entry per mode in flat-index order.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct FockConfig {
    occupations: Vec<u32>,
}

impl FockConfig {
    pub fn new(occupations: Vec<u32>) -> Self {
        Self { occupations }
    }

    /// Configuration with one photon in each listed mode (repeats add photons).
    pub fn from_modes(num_modes: usize, modes: &[ModeLabel]) -> Self {
        let mut occupations = vec![0; num_modes];
        for mode in modes {
            occupations[mode.index()] += 1;
        }
        Self { occupations }
    }

    pub fn occupations(&self) -> &[u32] {
        &self.occupations
    }

    pub fn num_modes(&self) -> usize {
        self.occupations.len()
    }

    pub fn total_photons(&self) -> u32 {
        self.occupations.iter().sum()
    }

    pub fn occupation(&self, mode: ModeLabel) -> u32 {
        self.occupations[mode.index()]
    }

    /// ∏ nᵢ! over all modes.
    pub fn factorial_product(&self) -> f64 {
        self.occupations
            .iter()
            .map(|&n| (1..=n).map(f64::from).product::<f64>())
            .product()
    }

    /// Mode indices repeated by occupation, e.g. (2,0,1) → [0, 0, 2].
    pub fn mode_list(&self) -> Vec<usize> {
        self.occupations
            .iter()
            .enumerate()
            .flat_map(|(i, &n)| std::iter::repeat_n(i, n as usize))
            .collect()
    }

    /// Every configuration of `photons` photons over `num_modes` modes, in
    /// lexicographically descending occupation order.
    pub fn enumerate(photons: u32, num_modes: usize) -> Vec<FockConfig> {
        fn fill(rest: u32, mode: usize, current: &mut Vec<u32>, out: &mut Vec<FockConfig>) {
            if mode + 1 == current.len() {
                current[mode] = rest;
                out.push(FockConfig::new(current.clone()));
                return;
            }
            for n in (0..=rest).rev() {
                current[mode] = n;
                fill(rest - n, mode + 1, current, out);
            }
        }
        let mut out = Vec::new();
        if num_modes == 0 {
            if photons == 0 {
                out.push(FockConfig::new(Vec::new()));
            }
            return out;
        }
        fill(photons, 0, &mut vec![0; num_modes], &mut out);
        out
    }
}

impl fmt::Display for FockConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "|")?;
        for (i, n) in self.occupations.iter().enumerate() {
            if i > 0 {
                write!(f, ",")?;
            }
            write!(f, "{n}")?;
        }
        write!(f, "⟩")
    }
}

/// Dense row-major complex matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct ComplexMatrix {
    rows: usize,
    cols: usize,
    data: Vec<Complex64>,
}

impl ComplexMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            rows,
            cols,
            data: vec![Complex64::new(0.0, 0.0); rows * cols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = Complex64::new(1.0, 0.0);
        }
        m
    }

    pub fn from_rows(rows: Vec<Vec<Complex64>>) -> Result<Self, FockError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(FockError::Ragged);
        }
        let n_rows = rows.len();
        Ok(Self {
            rows: n_rows,
            cols,
            data: rows.into_iter().flatten().collect(),
        })
    }

    pub fn from_real_rows(rows: &[Vec<f64>]) -> Result<Self, FockError> {
        Self::from_rows(
            rows.iter()
                .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
                .collect(),
        )
    }

    pub fn from_fn(rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> Complex64) -> Self {
        let mut data = Vec::with_capacity(rows * cols);
        for i in 0..rows {
            for j in 0..cols {
                data.push(f(i, j));
            }
        }
        Self { rows, cols, data }
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)])
    }

    pub fn adjoint(&self) -> Self {
        Self::from_fn(self.cols, self.rows, |i, j| self[(j, i)].conj())
    }

    /// max |(U†U − I)ᵢⱼ|; infinite for non-square matrices.
    pub fn unitarity_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let product = &self.adjoint() * self;
        let id = Self::identity(self.rows);
        product
            .data
            .iter()
            .zip(&id.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }

    pub fn is_unitary(&self, tol: f64) -> bool {
        self.unitarity_defect() <= tol
    }

    /// Largest elementwise distance to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        self.data
            .iter()
            .zip(&other.data)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

impl Index<(usize, usize)> for ComplexMatrix {
    type Output = Complex64;

    fn index(&self, (i, j): (usize, usize)) -> &Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for ComplexMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut Complex64 {
        debug_assert!(i < self.rows && j < self.cols);
        &mut self.data[i * self.cols + j]
    }
}

impl Mul for &ComplexMatrix {
    type Output = ComplexMatrix;

    fn mul(self, rhs: &ComplexMatrix) -> ComplexMatrix {
        assert_eq!(self.cols, rhs.rows, "inner dimensions differ");
        ComplexMatrix::from_fn(self.rows, rhs.cols, |i, j| {
            (0..self.cols).map(|k| self[(i, k)] * rhs[(k, j)]).sum()
        })
    }
}

/// Permanent by Ryser's formula, visiting column subsets in Gray-code order so
/// each step adds or removes a single column from the running row sums.
///
/// Perm(A) = (−1)ⁿ Σ_S (−1)^|S| ∏ᵢ Σ_{j∈S} aᵢⱼ
pub fn permanent(m: &ComplexMatrix) -> Result<Complex64, FockError> {
    if !m.is_square() {
        return Err(FockError::NotSquare {
            rows: m.rows(),
            cols: m.cols(),
        });
    }
    let n = m.rows();
    if n > MAX_PERMANENT_ORDER {
        return Err(FockError::TooLarge { order: n });
    }
    match n {
        0 => return Ok(Complex64::new(1.0, 0.0)),
        1 => return Ok(m[(0, 0)]),
        2 => return Ok(m[(0, 0)] * m[(1, 1)] + m[(0, 1)] * m[(1, 0)]),
        _ => {}
    }

    let mut row_sums = vec![Complex64::new(0.0, 0.0); n];
    let mut in_subset = vec![false; n];
    let mut total = Complex64::new(0.0, 0.0);
    let mut subset_size = 0usize;
    for k in 1u64..(1u64 << n) {
        let col = k.trailing_zeros() as usize;
        if in_subset[col] {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s -= m[(i, col)];
            }
            subset_size -= 1;
        } else {
            for (i, s) in row_sums.iter_mut().enumerate() {
                *s += m[(i, col)];
            }
            subset_size += 1;
        }
        in_subset[col] = !in_subset[col];

        let prod: Complex64 = row_sums.iter().product();
        if subset_size % 2 == 0 {
            total += prod;
        } else {
            total -= prod;
        }
    }
    if n % 2 == 1 {
        total = -total;
    }
    Ok(total)
}

fn check_transition(
    u: &ComplexMatrix,
    input: &FockConfig,
    output: &FockConfig,
) -> Result<(), FockError> {
    if !u.is_square() {
        return Err(FockError::NotSquare {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    for config in [input, output] {
        if config.num_modes() != u.rows() {
            return Err(FockError::ModeMismatch {
                config: config.num_modes(),
                matrix: u.rows(),
            });
        }
    }
    if input.total_photons() != output.total_photons() {
        return Err(FockError::PhotonMismatch {
            input: input.total_photons(),
            output: output.total_photons(),
        });
    }
    Ok(())
}

/// N×N matrix whose permanent gives the `input → output` amplitude.
///
/// `u` maps creation operators as a†ᵢ → Σⱼ uⱼᵢ a†ⱼ, so column `i` belongs to
/// input mode `i` and row `j` to output mode `j`. Columns are repeated by input
/// occupation, rows by output occupation; empty modes drop out.
pub fn amplitude_submatrix(
    u: &ComplexMatrix,
    input: &FockConfig,
    output: &FockConfig,
) -> Result<ComplexMatrix, FockError> {
    check_transition(u, input, output)?;
    let rows = output.mode_list();
    let cols = input.mode_list();
    Ok(ComplexMatrix::from_fn(rows.len(), cols.len(), |i, j| {
        u[(rows[i], cols[j])]
    }))
}

/// ⟨output| Û |input⟩ = Perm(U_sub) / √(∏ input! · ∏ output!).
pub fn transition_amplitude(
    u: &ComplexMatrix,
    input: &FockConfig,
    output: &FockConfig,
) -> Result<Complex64, FockError> {
    let sub = amplitude_submatrix(u, input, output)?;
    let norm = (input.factorial_product() * output.factorial_product()).sqrt();
    Ok(permanent(&sub)? / norm)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn naive_permanent(m: &ComplexMatrix) -> Complex64 {
        fn rec(m: &ComplexMatrix, row: usize, used: &mut Vec<bool>) -> Complex64 {
            if row == m.rows() {
                return c(1.0, 0.0);
            }
            let mut acc = c(0.0, 0.0);
            for col in 0..m.cols() {
                if !used[col] {
                    used[col] = true;
                    acc += m[(row, col)] * rec(m, row + 1, used);
                    used[col] = false;
                }
            }
            acc
        }
        rec(m, 0, &mut vec![false; m.cols()])
    }

    fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> ComplexMatrix {
        ComplexMatrix::from_fn(n, n, |_, _| {
            c(rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0))
        })
    }

    #[test]
    fn mode_labels_follow_canonical_order() {
        let expected = [
            ModeLabel::new(Polarization::H, 1),
            ModeLabel::new(Polarization::V, 1),
            ModeLabel::new(Polarization::H, 2),
            ModeLabel::new(Polarization::V, 2),
        ];
        for (i, mode) in expected.iter().enumerate() {
            assert_eq!(mode.index(), i);
            assert_eq!(ModeLabel::from_index(i), *mode);
        }
        assert_eq!(ModeLabel::from_index(5), ModeLabel::new(Polarization::V, 3));
    }

    #[test]
    fn fock_config_counts_and_equality() {
        let a = FockConfig::new(vec![2, 0, 1, 0]);
        assert_eq!(a.total_photons(), 3);
        assert_eq!(a.mode_list(), vec![0, 0, 2]);
        assert_eq!(a.factorial_product(), 2.0);
        assert_eq!(a, FockConfig::new(vec![2, 0, 1, 0]));
        assert_ne!(a, FockConfig::new(vec![2, 0, 0, 1]));
    }

    #[test]
    fn enumeration_counts_match_stars_and_bars() {
        // C(N + M - 1, N)
        assert_eq!(FockConfig::enumerate(2, 4).len(), 10);
        assert_eq!(FockConfig::enumerate(3, 4).len(), 20);
        assert_eq!(FockConfig::enumerate(0, 3).len(), 1);
        assert!(FockConfig::enumerate(2, 4)
            .iter()
            .all(|cfg| cfg.total_photons() == 2));
    }

    #[test]
    fn permanent_small_cases() {
        let z = c(0.3, -1.2);
        let one = ComplexMatrix::from_rows(vec![vec![z]]).unwrap();
        assert_eq!(permanent(&one).unwrap(), z);

        for n in 0..8 {
            assert_relative_eq!(
                permanent(&ComplexMatrix::identity(n)).unwrap().re,
                1.0,
                epsilon = 1e-12
            );
        }

        let ones = ComplexMatrix::from_fn(3, 3, |_, _| c(1.0, 0.0));
        let p = permanent(&ones).unwrap();
        assert_relative_eq!(p.re, 6.0, epsilon = 1e-12);
        assert_relative_eq!(p.im, 0.0, epsilon = 1e-12);
    }

    #[test]
    fn permanent_matches_naive_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for n in 1..=6 {
            for _ in 0..10 {
                let m = random_matrix(&mut rng, n);
                let fast = permanent(&m).unwrap();
                let slow = naive_permanent(&m);
                assert!((fast - slow).norm() <= 1e-10 * slow.norm().max(1.0));
            }
        }
    }

    #[test]
    fn permanent_rejects_bad_shapes() {
        let rect = ComplexMatrix::zeros(2, 3);
        assert_eq!(
            permanent(&rect),
            Err(FockError::NotSquare { rows: 2, cols: 3 })
        );
        let big = ComplexMatrix::identity(MAX_PERMANENT_ORDER + 1);
        assert_eq!(
            permanent(&big),
            Err(FockError::TooLarge {
                order: MAX_PERMANENT_ORDER + 1
            })
        );
    }

    #[test]
    fn submatrix_selects_and_repeats() {
        let id = ComplexMatrix::identity(4);
        let io = FockConfig::new(vec![1, 0, 1, 0]);
        let sub = amplitude_submatrix(&id, &io, &io).unwrap();
        assert_eq!(sub, ComplexMatrix::identity(2));

        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let u = random_matrix(&mut rng, 4);
        let sub = amplitude_submatrix(
            &u,
            &FockConfig::new(vec![2, 0, 0, 0]),
            &FockConfig::new(vec![0, 0, 2, 0]),
        )
        .unwrap();
        assert_eq!((sub.rows(), sub.cols()), (2, 2));
        for i in 0..2 {
            for j in 0..2 {
                assert_eq!(sub[(i, j)], u[(2, 0)]);
            }
        }
    }

    #[test]
    fn conservation_is_enforced() {
        let id = ComplexMatrix::identity(4);
        let err = transition_amplitude(
            &id,
            &FockConfig::new(vec![1, 0, 1, 0]),
            &FockConfig::new(vec![1, 0, 0, 0]),
        )
        .unwrap_err();
        assert_eq!(
            err,
            FockError::PhotonMismatch {
                input: 2,
                output: 1
            }
        );

        let err = transition_amplitude(
            &id,
            &FockConfig::new(vec![1, 0, 1]),
            &FockConfig::new(vec![1, 0, 1]),
        )
        .unwrap_err();
        assert!(matches!(err, FockError::ModeMismatch { .. }));
    }

    #[test]
    fn identity_transitions() {
        let id = ComplexMatrix::identity(4);
        let a = FockConfig::new(vec![1, 0, 1, 0]);
        let b = FockConfig::new(vec![0, 1, 1, 0]);
        assert_relative_eq!(transition_amplitude(&id, &a, &a).unwrap().re, 1.0);
        assert_eq!(transition_amplitude(&id, &a, &b).unwrap().norm(), 0.0);
        let doubled = FockConfig::new(vec![2, 0, 0, 0]);
        assert_relative_eq!(
            transition_amplitude(&id, &doubled, &doubled).unwrap().re,
            1.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn balanced_splitter_suppresses_coincidences() {
        let h = std::f64::consts::FRAC_1_SQRT_2;
        let bs =
            ComplexMatrix::from_rows(vec![vec![c(h, 0.0), c(0.0, h)], vec![c(0.0, h), c(h, 0.0)]])
                .unwrap();
        assert!(bs.is_unitary(1e-12));
        let one_one = FockConfig::new(vec![1, 1]);
        // 2x2 permanent: h·h + (ih)(ih) = 0
        assert!(
            transition_amplitude(&bs, &one_one, &one_one)
                .unwrap()
                .norm()
                < 1e-15
        );
        let two_zero = FockConfig::new(vec![2, 0]);
        let p = transition_amplitude(&bs, &one_one, &two_zero)
            .unwrap()
            .norm_sqr();
        assert_relative_eq!(p, 0.5, epsilon = 1e-12);
    }
}
