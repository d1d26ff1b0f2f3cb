//! Gaussian states in the interleaved quadrature ordering `(q1, p1, q2, p2, ...)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg::eigenvalue_moduli;

/// Tolerance on symplectic eigenvalues `>= 1/2`.
pub const PHYSICALITY_TOLERANCE: f64 = 1e-9;

const SYMMETRY_TOLERANCE: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq)]
pub struct GaussianState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl GaussianState {
    pub fn new(mean: DVector<f64>, cov: DMatrix<f64>) -> Result<Self> {
        if !mean.len().is_multiple_of(2) || cov.nrows() != mean.len() || cov.ncols() != mean.len() {
            return Err(Error::DimensionMismatch { expected: mean.len(), actual: cov.nrows() });
        }
        let asym = max_asymmetry(&cov);
        if asym > SYMMETRY_TOLERANCE * (1.0 + cov.amax()) {
            return Err(Error::NonSymmetricCovariance(asym));
        }
        Ok(Self { mean, cov })
    }

    /// Vacuum (ground state) of `n` uncoupled modes with the given frequencies.
    pub fn vacuum(frequencies: &[f64]) -> Self {
        Self::thermal(frequencies, 0.0)
    }

    /// Product of thermal states with occupation `n_th`, each mode at its own
    /// frequency.
    pub fn thermal(frequencies: &[f64], n_th: f64) -> Self {
        let dim = 2 * frequencies.len();
        let mut cov = DMatrix::zeros(dim, dim);
        for (i, w) in frequencies.iter().enumerate() {
            cov[(2 * i, 2 * i)] = (n_th + 0.5) / w;
            cov[(2 * i + 1, 2 * i + 1)] = (n_th + 0.5) * w;
        }
        Self { mean: DVector::zeros(dim), cov }
    }

    pub fn modes(&self) -> usize {
        self.mean.len() / 2
    }

    pub fn symplectic_eigenvalues(&self) -> Result<Vec<f64>> {
        symplectic_eigenvalues(self)
    }

    pub fn is_physical(&self) -> bool {
        self.symplectic_eigenvalues()
            .map(|nu| nu.iter().all(|v| *v >= 0.5 - PHYSICALITY_TOLERANCE))
            .unwrap_or(false)
    }
}

/// Covariance and first moments of a single-mode Gaussian state at frequency
/// `omega` with thermal occupation `n_th`, squeezing `r` at phase `phi`, and
/// displacement `amplitude * exp(i phase)`.
pub fn single_mode_state(
    omega: f64,
    n_th: f64,
    r: f64,
    phi: f64,
    amplitude: f64,
    phase: f64,
) -> Result<GaussianState> {
    check_finite("omega", omega)?;
    if omega <= 0.0 {
        return Err(Error::InvalidParameter { name: "omega", reason: format!("{omega} is not positive") });
    }
    for (name, value) in [("n_th", n_th), ("r", r), ("amplitude", amplitude)] {
        check_finite(name, value)?;
        if value < 0.0 {
            return Err(Error::InvalidParameter { name, reason: format!("{value} is negative") });
        }
    }
    check_finite("phi", phi)?;
    check_finite("phase", phase)?;

    let y = (2.0 * r).cosh();
    let z_cos = phi.cos() * (2.0 * r).sinh();
    let z_sin = phi.sin() * (2.0 * r).sinh();
    let pref = n_th + 0.5;
    let cov = DMatrix::from_row_slice(
        2,
        2,
        &[pref * (y + z_cos) / omega, pref * z_sin, pref * z_sin, pref * (y - z_cos) * omega],
    );
    let mean = DVector::from_row_slice(&[
        amplitude * phase.cos() * (2.0 / omega).sqrt(),
        amplitude * phase.sin() * (2.0 * omega).sqrt(),
    ]);
    Ok(GaussianState { mean, cov })
}

fn check_finite(name: &'static str, value: f64) -> Result<()> {
    if value.is_finite() {
        Ok(())
    } else {
        Err(Error::InvalidParameter { name, reason: "not finite".into() })
    }
}

/// Symplectic form for `modes` modes in interleaved ordering.
pub fn symplectic_form(modes: usize) -> DMatrix<f64> {
    let mut j = DMatrix::zeros(2 * modes, 2 * modes);
    for i in 0..modes {
        j[(2 * i, 2 * i + 1)] = 1.0;
        j[(2 * i + 1, 2 * i)] = -1.0;
    }
    j
}

/// Sorted symplectic eigenvalues: the moduli of the eigenvalues of `i J cov`,
/// which come in `+-` pairs, one value per mode.
pub fn symplectic_eigenvalues(state: &GaussianState) -> Result<Vec<f64>> {
    let cov = &state.cov;
    let asym = max_asymmetry(cov);
    if asym > SYMMETRY_TOLERANCE * (1.0 + cov.amax()) {
        return Err(Error::NonSymmetricCovariance(asym));
    }
    let n = state.modes();
    let jc = symplectic_form(n) * cov;
    let mut moduli = eigenvalue_moduli(&jc)?;
    moduli.sort_by(f64::total_cmp);
    Ok(moduli.chunks(2).map(|pair| 0.5 * (pair[0] + pair[1])).collect())
}

pub(crate) fn max_asymmetry(m: &DMatrix<f64>) -> f64 {
    let mut worst = 0.0f64;
    for i in 0..m.nrows() {
        for j in 0..i {
            worst = worst.max((m[(i, j)] - m[(j, i)]).abs());
        }
    }
    worst
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn vacuum_case() {
        let s = single_mode_state(0.25, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_eq!(s.mean, DVector::zeros(2));
        assert_abs_diff_eq!(s.cov, DMatrix::from_diagonal(&DVector::from_row_slice(&[2.0, 0.125])), epsilon = 1e-15);
    }

    #[test]
    fn thermal_is_three_times_vacuum() {
        let vac = single_mode_state(0.7, 0.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        let th = single_mode_state(0.7, 1.0, 0.0, 0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(th.cov, vac.cov * 3.0, epsilon = 1e-14);
    }

    #[test]
    fn squeezed_vacuum_diagonal() {
        let (w, r) = (0.4, 0.8);
        let s = single_mode_state(w, 0.0, r, 0.0, 0.0, 0.0).unwrap();
        assert_abs_diff_eq!(s.cov[(0, 0)], 0.5 * (2.0 * r).exp() / w, epsilon = 1e-13);
        assert_abs_diff_eq!(s.cov[(1, 1)], 0.5 * (-2.0 * r).exp() * w, epsilon = 1e-13);
        assert_abs_diff_eq!(s.cov[(0, 1)], 0.0, epsilon = 1e-15);
    }

    #[test]
    fn coherent_mean() {
        let s = single_mode_state(0.5, 0.0, 0.0, 0.0, 2.0, std::f64::consts::FRAC_PI_2).unwrap();
        assert_abs_diff_eq!(s.mean[0], 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(s.mean[1], 2.0, epsilon = 1e-15);
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(single_mode_state(0.0, 0.0, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(single_mode_state(1.0, -0.1, 0.0, 0.0, 0.0, 0.0).is_err());
        assert!(single_mode_state(1.0, 0.0, -0.1, 0.0, 0.0, 0.0).is_err());
        assert!(single_mode_state(1.0, 0.0, 0.0, 0.0, -1.0, 0.0).is_err());
        assert!(single_mode_state(1.0, 0.0, 0.0, f64::NAN, 0.0, 0.0).is_err());
    }

    #[test]
    fn symplectic_eigenvalues_of_simple_states() {
        let vac = GaussianState::vacuum(&[0.25, 0.5, 1.0]);
        for nu in vac.symplectic_eigenvalues().unwrap() {
            assert_abs_diff_eq!(nu, 0.5, epsilon = 1e-12);
        }
        let th = GaussianState::thermal(&[0.25, 2.0], 1.7);
        for nu in th.symplectic_eigenvalues().unwrap() {
            assert_abs_diff_eq!(nu, 2.2, epsilon = 1e-12);
        }
    }

    #[test]
    fn non_symmetric_covariance_is_rejected() {
        let state = GaussianState {
            mean: DVector::zeros(2),
            cov: DMatrix::from_row_slice(2, 2, &[1.0, 0.3, 0.0, 1.0]),
        };
        assert!(matches!(symplectic_eigenvalues(&state), Err(Error::NonSymmetricCovariance(_))));
    }

    proptest! {
        #[test]
        fn squeezed_states_are_pure(r in 0.0f64..2.5, phi in -7.0f64..7.0, w in 0.05f64..3.0) {
            let s = single_mode_state(w, 0.0, r, phi, 0.0, 0.0).unwrap();
            prop_assert!((s.cov.determinant() - 0.25).abs() < 1e-12 * (1.0 + s.cov.amax().powi(2)));
            let nu = s.symplectic_eigenvalues().unwrap();
            prop_assert!((nu[0] - 0.5).abs() < 1e-9 * (1.0 + s.cov.amax()));
        }

        #[test]
        fn thermal_squeezed_eigenvalue(n in 0.0f64..5.0, r in 0.0f64..1.5, phi in -4.0f64..4.0) {
            let s = single_mode_state(0.25, n, r, phi, 1.0, 0.3).unwrap();
            let nu = s.symplectic_eigenvalues().unwrap();
            prop_assert!((nu[0] - (n + 0.5)).abs() < 1e-9 * (1.0 + s.cov.amax()));
        }
    }
}
