//! The gate's polarization-dependent beam splitter and two-photon evolution.
//!
//! Spatial mode 1 carries the ancilla photon, spatial mode 2 the signal.
//! Angles are radians throughout this module.

use std::f64::consts::{FRAC_1_SQRT_2, PI};

use num_complex::Complex64;
use thiserror::Error;

use crate::fock::{self, ComplexMatrix, FockConfig, FockError, ModeLabel, Polarization};

/// Number of optical modes of the gate: {H, V} × {1, 2}.
pub const NUM_MODES: usize = 4;

/// Tolerance for accepting a matrix as unitary in [`evolve`].
pub const UNITARY_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum OpticsError {
    #[error("transformation is not unitary (defect {defect:.3e})")]
    NotUnitary { defect: f64 },
    #[error("expected a {NUM_MODES}-mode transformation, got {rows}x{cols}")]
    WrongSize { rows: usize, cols: usize },
    #[error(transparent)]
    Fock(#[from] FockError),
}

/// Half-wave-plate angles of the gate: `phi` (H splitting), `theta`
/// (V splitting) and `omega` (ancilla preparation). Radians.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct GateParams {
    pub phi: f64,
    pub theta: f64,
    pub omega: f64,
}

impl GateParams {
    pub fn new(phi: f64, theta: f64, omega: f64) -> Self {
        Self { phi, theta, omega }
    }

    pub fn from_degrees(phi: f64, theta: f64, omega: f64) -> Self {
        Self::new(phi.to_radians(), theta.to_radians(), omega.to_radians())
    }

    /// `[phi, theta, omega]` in degrees.
    pub fn to_degrees(&self) -> [f64; 3] {
        [
            self.phi.to_degrees(),
            self.theta.to_degrees(),
            self.omega.to_degrees(),
        ]
    }

    /// Angles reduced into [0, π); a half-wave plate repeats with period π.
    pub fn reduced(&self) -> Self {
        Self::new(
            self.phi.rem_euclid(PI),
            self.theta.rem_euclid(PI),
            self.omega.rem_euclid(PI),
        )
    }

    pub fn ancilla(&self) -> PolarizationQubit {
        PolarizationQubit::linear(self.omega)
    }
}

/// Single-photon polarization state α|H⟩ + β|V⟩.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PolarizationQubit {
    pub h: Complex64,
    pub v: Complex64,
}

impl PolarizationQubit {
    /// Normalizes the given amplitudes. Panics on the zero vector.
    pub fn new(h: Complex64, v: Complex64) -> Self {
        let norm = (h.norm_sqr() + v.norm_sqr()).sqrt();
        assert!(norm > 0.0, "zero polarization vector");
        Self {
            h: h / norm,
            v: v / norm,
        }
    }

    /// Equatorial state (|H⟩ + e^{iη}|V⟩)/√2.
    pub fn equatorial(eta: f64) -> Self {
        Self {
            h: Complex64::new(FRAC_1_SQRT_2, 0.0),
            v: Complex64::from_polar(FRAC_1_SQRT_2, eta),
        }
    }

    /// Linear polarization cos 2ω|H⟩ + sin 2ω|V⟩ prepared by a half-wave
    /// plate at angle ω.
    pub fn linear(omega: f64) -> Self {
        let (s, c) = (2.0 * omega).sin_cos();
        Self {
            h: Complex64::new(c, 0.0),
            v: Complex64::new(s, 0.0),
        }
    }

    /// The orthogonal state −β*|H⟩ + α*|V⟩.
    pub fn orthogonal(&self) -> Self {
        Self {
            h: -self.v.conj(),
            v: self.h.conj(),
        }
    }

    pub fn amplitude(&self, pol: Polarization) -> Complex64 {
        match pol {
            Polarization::H => self.h,
            Polarization::V => self.v,
        }
    }

    pub fn norm_sqr(&self) -> f64 {
        self.h.norm_sqr() + self.v.norm_sqr()
    }

    /// ⟨self|other⟩
    pub fn inner(&self, other: &Self) -> Complex64 {
        self.h.conj() * other.h + self.v.conj() * other.v
    }
}

/// The 4×4 mode transformation of the interferometer. Each polarization sees
/// a real rotation between the two spatial paths, by 2φ for H and 2θ for V.
pub fn build_scattering_matrix(phi: f64, theta: f64) -> ComplexMatrix {
    let (sp, cp) = (2.0 * phi).sin_cos();
    let (st, ct) = (2.0 * theta).sin_cos();
    ComplexMatrix::from_real_rows(&[
        vec![cp, 0.0, sp, 0.0],
        vec![0.0, ct, 0.0, st],
        vec![-sp, 0.0, cp, 0.0],
        vec![0.0, -st, 0.0, ct],
    ])
    .expect("fixed 4x4 layout")
}

/// Intensity transmittances (t_H, t_V) from spatial mode 1 back into mode 1.
pub fn splitting_ratios(phi: f64, theta: f64) -> (f64, f64) {
    ((2.0 * phi).cos().powi(2), (2.0 * theta).cos().powi(2))
}

/// A pure two-photon state over the gate's four modes, stored as amplitudes
/// over the ten normalized Fock basis states.
#[derive(Debug, Clone, PartialEq)]
pub struct TwoPhotonState {
    basis: Vec<FockConfig>,
    amplitudes: Vec<Complex64>,
}

impl TwoPhotonState {
    pub fn basis() -> Vec<FockConfig> {
        FockConfig::enumerate(2, NUM_MODES)
    }

    pub fn zero() -> Self {
        let basis = Self::basis();
        let amplitudes = vec![Complex64::new(0.0, 0.0); basis.len()];
        Self { basis, amplitudes }
    }

    /// Product state of photon `a` in spatial path `path_a` and photon `b`
    /// in `path_b`, i.e. a†(a) b†(b)|0⟩ expanded onto normalized Fock states.
    pub fn product(
        a: &PolarizationQubit,
        path_a: usize,
        b: &PolarizationQubit,
        path_b: usize,
    ) -> Self {
        let mut state = Self::zero();
        for pa in Polarization::ALL {
            for pb in Polarization::ALL {
                let ma = ModeLabel::new(pa, path_a);
                let mb = ModeLabel::new(pb, path_b);
                let config = FockConfig::from_modes(NUM_MODES, &[ma, mb]);
                // (a†)²|0⟩ = √2 |2⟩
                let weight = if ma == mb { 2f64.sqrt() } else { 1.0 };
                *state.amplitude_mut(&config) += a.amplitude(pa) * b.amplitude(pb) * weight;
            }
        }
        state
    }

    pub fn configs(&self) -> &[FockConfig] {
        &self.basis
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FockConfig, Complex64)> {
        self.basis.iter().zip(self.amplitudes.iter().copied())
    }

    fn position(&self, config: &FockConfig) -> usize {
        self.basis
            .iter()
            .position(|c| c == config)
            .unwrap_or_else(|| panic!("{config} is not a two-photon basis state"))
    }

    /// Amplitude on `config`. Panics if `config` is not a two-photon state
    /// over four modes.
    pub fn amplitude(&self, config: &FockConfig) -> Complex64 {
        self.amplitudes[self.position(config)]
    }

    pub fn amplitude_mut(&mut self, config: &FockConfig) -> &mut Complex64 {
        let i = self.position(config);
        &mut self.amplitudes[i]
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(Complex64::norm_sqr).sum()
    }

    /// Largest amplitude difference to `other`.
    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.amplitudes
            .iter()
            .zip(&other.amplitudes)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max)
    }
}

/// Ancilla cos 2ω|H⟩ + sin 2ω|V⟩ in path 1, equatorial signal with phase η in
/// path 2.
pub fn prepare_input(eta: f64, omega: f64) -> TwoPhotonState {
    TwoPhotonState::product(
        &PolarizationQubit::linear(omega),
        1,
        &PolarizationQubit::equatorial(eta),
        2,
    )
}

/// Evolves `state` through the mode transformation `u`, superposing
/// permanent-based transition amplitudes between basis states.
pub fn evolve(state: &TwoPhotonState, u: &ComplexMatrix) -> Result<TwoPhotonState, OpticsError> {
    if u.rows() != NUM_MODES || u.cols() != NUM_MODES {
        return Err(OpticsError::WrongSize {
            rows: u.rows(),
            cols: u.cols(),
        });
    }
    let defect = u.unitarity_defect();
    if defect > UNITARY_TOL {
        return Err(OpticsError::NotUnitary { defect });
    }
    let mut out = TwoPhotonState::zero();
    for (input, amp) in state.iter() {
        if amp == Complex64::new(0.0, 0.0) {
            continue;
        }
        for (k, output) in state.basis.iter().enumerate() {
            out.amplitudes[k] += amp * fock::transition_amplitude(u, input, output)?;
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::FRAC_PI_8;

    fn cfg(modes: &[(Polarization, usize)]) -> FockConfig {
        let labels: Vec<_> = modes.iter().map(|&(p, s)| ModeLabel::new(p, s)).collect();
        FockConfig::from_modes(NUM_MODES, &labels)
    }

    #[test]
    fn zero_angles_give_identity() {
        let u = build_scattering_matrix(0.0, 0.0);
        assert_eq!(u, ComplexMatrix::identity(4));
        assert_eq!(splitting_ratios(0.0, 0.0), (1.0, 1.0));
    }

    #[test]
    fn balanced_setting() {
        let u = build_scattering_matrix(FRAC_PI_8, FRAC_PI_8);
        for i in 0..4 {
            for j in 0..4 {
                let same_pol = i % 2 == j % 2;
                let expected = if same_pol { FRAC_1_SQRT_2 } else { 0.0 };
                assert_relative_eq!(u[(i, j)].norm(), expected, epsilon = 1e-15);
                assert_eq!(u[(i, j)].im, 0.0);
            }
        }
        let (th, tv) = splitting_ratios(FRAC_PI_8, FRAC_PI_8);
        assert_relative_eq!(th, 0.5, epsilon = 1e-15);
        assert_relative_eq!(tv, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn balanced_h_block_shows_hong_ou_mandel_dip() {
        let u = build_scattering_matrix(FRAC_PI_8, 0.0);
        let hh = cfg(&[(Polarization::H, 1), (Polarization::H, 2)]);
        let amp = fock::transition_amplitude(&u, &hh, &hh).unwrap();
        assert!(amp.norm() < 1e-15);
    }

    #[test]
    fn prepared_input_support() {
        let h1h2 = cfg(&[(Polarization::H, 1), (Polarization::H, 2)]);
        let h1v2 = cfg(&[(Polarization::H, 1), (Polarization::V, 2)]);

        let s = prepare_input(0.0, 0.0);
        assert_relative_eq!(s.amplitude(&h1h2).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(s.amplitude(&h1v2).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        let others: f64 = s
            .iter()
            .filter(|(c, _)| **c != h1h2 && **c != h1v2)
            .map(|(_, a)| a.norm())
            .sum();
        assert_eq!(others, 0.0);

        let s = prepare_input(PI, 0.0);
        assert_relative_eq!(s.amplitude(&h1h2).re, FRAC_1_SQRT_2, epsilon = 1e-15);
        assert_relative_eq!(s.amplitude(&h1v2).re, -FRAC_1_SQRT_2, epsilon = 1e-15);
        assert!(s.amplitude(&h1v2).im.abs() < 1e-15);
    }

    #[test]
    fn product_in_same_mode_uses_bosonic_weight() {
        let h = PolarizationQubit::linear(0.0);
        let s = TwoPhotonState::product(&h, 1, &h, 1);
        assert_relative_eq!(
            s.amplitude(&FockConfig::new(vec![2, 0, 0, 0])).re,
            2f64.sqrt()
        );
    }

    #[test]
    fn evolve_rejects_non_unitary() {
        let s = prepare_input(0.3, 0.1);
        let mut u = ComplexMatrix::identity(4);
        u[(0, 0)] = Complex64::new(2.0, 0.0);
        assert!(matches!(
            evolve(&s, &u),
            Err(OpticsError::NotUnitary { .. })
        ));
        assert!(matches!(
            evolve(&s, &ComplexMatrix::identity(3)),
            Err(OpticsError::WrongSize { .. })
        ));
    }

    #[test]
    fn evolve_identity_and_reverse() {
        let s = prepare_input(1.1, 0.4);
        let same = evolve(&s, &ComplexMatrix::identity(4)).unwrap();
        assert!(same.max_abs_diff(&s) < 1e-15);

        let u = build_scattering_matrix(0.7, -0.3);
        let forward = evolve(&s, &u).unwrap();
        assert_relative_eq!(forward.norm_sqr(), 1.0, epsilon = 1e-12);
        let back = evolve(&forward, &u.adjoint()).unwrap();
        assert!(back.max_abs_diff(&s) < 1e-10);
    }

    #[test]
    fn qubit_helpers() {
        let q = PolarizationQubit::equatorial(0.9);
        assert!(q.inner(&q.orthogonal()).norm() < 1e-15);
        assert_relative_eq!(q.norm_sqr(), 1.0, epsilon = 1e-15);
        let n = PolarizationQubit::new(Complex64::new(3.0, 0.0), Complex64::new(0.0, 4.0));
        assert_relative_eq!(n.norm_sqr(), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn reduced_angles_lie_in_half_period() {
        let p = GateParams::new(-0.5, 4.0, PI).reduced();
        for a in [p.phi, p.theta, p.omega] {
            assert!((0.0..PI).contains(&a));
        }
    }
}
