//! Networks of coupled harmonic oscillators.
//!
//! With unit masses and `hbar = 1` the Hamiltonian is
//! `H = p.p / 2 + q^T (diag(omega)^2 + L) q / 2`, where `L` is the weighted
//! Laplacian of the spring-coupling graph.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::rng::SeededRng;

#[derive(Debug, Clone, PartialEq)]
pub struct OscillatorNetwork {
    frequencies: DVector<f64>,
    couplings: DMatrix<f64>,
    ancilla_index: usize,
}

impl OscillatorNetwork {
    pub fn new(frequencies: Vec<f64>, couplings: DMatrix<f64>, ancilla_index: usize) -> Result<Self> {
        let n = frequencies.len();
        if n < 2 {
            return Err(Error::InvalidNetwork(format!("need at least 2 modes, got {n}")));
        }
        if couplings.nrows() != n || couplings.ncols() != n {
            return Err(Error::InvalidNetwork(format!(
                "coupling matrix is {}x{}, expected {n}x{n}",
                couplings.nrows(),
                couplings.ncols()
            )));
        }
        if let Some(w) = frequencies.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidNetwork(format!("frequency {w} is not positive")));
        }
        for i in 0..n {
            if couplings[(i, i)] != 0.0 {
                return Err(Error::InvalidNetwork(format!("self-coupling at mode {i}")));
            }
            for j in 0..i {
                let (a, b) = (couplings[(i, j)], couplings[(j, i)]);
                if a != b {
                    return Err(Error::InvalidNetwork(format!("couplings ({i},{j}) not symmetric")));
                }
                if !(a.is_finite() && a >= 0.0) {
                    return Err(Error::InvalidNetwork(format!("coupling ({i},{j}) = {a} is negative")));
                }
            }
        }
        if ancilla_index >= n {
            return Err(Error::IndexOutOfRange { index: ancilla_index, len: n });
        }
        Ok(Self { frequencies: DVector::from_vec(frequencies), couplings, ancilla_index })
    }

    /// Open chain `0 - 1 - ... - (n-1)` with uniform frequency and coupling.
    pub fn chain(n: usize, omega: f64, g: f64, ancilla_index: usize) -> Result<Self> {
        let mut couplings = DMatrix::zeros(n, n);
        for i in 1..n {
            couplings[(i - 1, i)] = g;
            couplings[(i, i - 1)] = g;
        }
        Self::new(vec![omega; n], couplings, ancilla_index)
    }

    /// Completely connected network with uniform frequency and coupling.
    pub fn complete(n: usize, omega: f64, g: f64, ancilla_index: usize) -> Result<Self> {
        let couplings = DMatrix::from_fn(n, n, |i, j| if i == j { 0.0 } else { g });
        Self::new(vec![omega; n], couplings, ancilla_index)
    }

    /// Completely connected network with couplings drawn uniformly from
    /// `[g_lo, g_hi)`, one draw per edge in row-major upper-triangle order.
    pub fn random_complete(
        n: usize,
        omega: f64,
        g_lo: f64,
        g_hi: f64,
        ancilla_index: usize,
        rng: &mut SeededRng,
    ) -> Result<Self> {
        let mut couplings = DMatrix::zeros(n, n);
        for i in 0..n {
            for j in i + 1..n {
                let g = rng.uniform(g_lo, g_hi);
                couplings[(i, j)] = g;
                couplings[(j, i)] = g;
            }
        }
        Self::new(vec![omega; n], couplings, ancilla_index)
    }

    pub fn modes(&self) -> usize {
        self.frequencies.len()
    }

    pub fn frequencies(&self) -> &DVector<f64> {
        &self.frequencies
    }

    pub fn couplings(&self) -> &DMatrix<f64> {
        &self.couplings
    }

    pub fn ancilla_index(&self) -> usize {
        self.ancilla_index
    }

    pub fn ancilla_frequency(&self) -> f64 {
        self.frequencies[self.ancilla_index]
    }

    /// Same network with a different ancilla.
    pub fn with_ancilla(&self, ancilla_index: usize) -> Result<Self> {
        if ancilla_index >= self.modes() {
            return Err(Error::IndexOutOfRange { index: ancilla_index, len: self.modes() });
        }
        Ok(Self { ancilla_index, ..self.clone() })
    }

    /// `L_ij = delta_ij sum_k g_ik - (1 - delta_ij) g_ij`.
    pub fn laplacian(&self) -> DMatrix<f64> {
        let n = self.modes();
        DMatrix::from_fn(n, n, |i, j| {
            if i == j {
                self.couplings.row(i).sum()
            } else {
                -self.couplings[(i, j)]
            }
        })
    }

    /// `diag(omega)^2 + L`.
    pub fn potential_matrix(&self) -> DMatrix<f64> {
        let mut m = self.laplacian();
        for (i, w) in self.frequencies.iter().enumerate() {
            m[(i, i)] += w * w;
        }
        m
    }
}

pub fn build_laplacian(network: &OscillatorNetwork) -> DMatrix<f64> {
    network.laplacian()
}
