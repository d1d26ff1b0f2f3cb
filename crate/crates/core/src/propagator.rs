//! Exact phase-space propagator of a quadratic oscillator Hamiltonian.

use nalgebra::{DMatrix, SymmetricEigen};

use crate::error::{Error, Result};
use crate::gaussian::{symplectic_form, GaussianState};
use crate::network::OscillatorNetwork;

#[derive(Debug, Clone, PartialEq)]
pub struct SymplecticPropagator {
    /// `2N x 2N`, interleaved ordering.
    pub matrix: DMatrix<f64>,
    pub dt: f64,
    pub source: OscillatorNetwork,
}

impl SymplecticPropagator {
    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    /// `max |S J S^T - J|`.
    pub fn symplectic_defect(&self) -> f64 {
        let j = symplectic_form(self.dim() / 2);
        (&self.matrix * &j * self.matrix.transpose() - j).amax()
    }
}

/// Builds `S(dt)` from the eigendecomposition `M = O D O^T` of the potential
/// matrix. In `(q; p)` block form
///
/// ```text
/// q(dt) =  cos(sqrt(M) dt) q0 + M^{-1/2} sin(sqrt(M) dt) p0
/// p(dt) = -M^{1/2} sin(sqrt(M) dt) q0 + cos(sqrt(M) dt) p0
/// ```
///
/// and the result is returned in interleaved ordering.
pub fn build_propagator(network: &OscillatorNetwork, dt: f64) -> Result<SymplecticPropagator> {
    if !(dt.is_finite() && dt >= 0.0) {
        return Err(Error::InvalidParameter { name: "dt", reason: format!("{dt} is not a non-negative time") });
    }
    let n = network.modes();
    let eig = SymmetricEigen::new(network.potential_matrix());
    let min_eigenvalue = eig.eigenvalues.min();
    if min_eigenvalue <= 0.0 {
        return Err(Error::NonPositiveDefinitePotential { min_eigenvalue });
    }
    let o = &eig.eigenvectors;
    let freqs = eig.eigenvalues.map(f64::sqrt);

    let spectral = |f: &dyn Fn(f64) -> f64| -> DMatrix<f64> {
        let mut scaled = o.clone();
        for (k, mut col) in scaled.column_iter_mut().enumerate() {
            col *= f(freqs[k]);
        }
        scaled * o.transpose()
    };
    let cos_block = spectral(&|w| (w * dt).cos());
    let qp_block = spectral(&|w| (w * dt).sin() / w);
    let pq_block = spectral(&|w| -(w * dt).sin() * w);

    let mut s = DMatrix::zeros(2 * n, 2 * n);
    for i in 0..n {
        for j in 0..n {
            s[(2 * i, 2 * j)] = cos_block[(i, j)];
            s[(2 * i, 2 * j + 1)] = qp_block[(i, j)];
            s[(2 * i + 1, 2 * j)] = pq_block[(i, j)];
            s[(2 * i + 1, 2 * j + 1)] = cos_block[(i, j)];
        }
    }
    Ok(SymplecticPropagator { matrix: s, dt, source: network.clone() })
}

/// `mean' = S mean`, `cov' = S cov S^T`.
pub fn evolve(state: &GaussianState, prop: &SymplecticPropagator) -> Result<GaussianState> {
    if state.mean.len() != prop.dim() {
        return Err(Error::DimensionMismatch { expected: prop.dim(), actual: state.mean.len() });
    }
    let s = &prop.matrix;
    Ok(GaussianState { mean: s * &state.mean, cov: s * &state.cov * s.transpose() })
}
