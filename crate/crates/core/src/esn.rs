//! Echo state network baseline, `x' = tanh(beta W x + iota w s)`.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::reservoir::{ObservableKind, TrajectoryRecord};
use crate::rng::{SeededRng, Stream};

#[derive(Debug, Clone, PartialEq)]
pub struct EsnParams {
    /// Largest singular value one.
    pub w: DMatrix<f64>,
    pub w_in: DVector<f64>,
    pub beta: f64,
    pub iota: f64,
    pub seed: u64,
}

impl EsnParams {
    /// `n` neurons with `W` and `w` drawn uniformly from `[-1, 1)` (row-major
    /// `W` first, then `w`) and `W` divided by its largest singular value.
    pub fn random(n: usize, beta: f64, iota: f64, seed: u64) -> Result<Self> {
        if n == 0 {
            return Err(Error::InvalidParameter { name: "neurons", reason: "must be positive".into() });
        }
        let mut rng = SeededRng::for_stream(seed, Stream::EsnWeights);
        let raw = DMatrix::from_row_slice(n, n, &rng.uniform_vec(n * n, -1.0, 1.0));
        let w_in = DVector::from_vec(rng.uniform_vec(n, -1.0, 1.0));
        let smax = raw.singular_values().max();
        if smax == 0.0 {
            return Err(Error::DegenerateInput("zero recurrent matrix".into()));
        }
        Ok(Self { w: raw / smax, w_in, beta, iota, seed })
    }

    /// The configuration used for comparison: 8 neurons, `beta = 0.95`, `iota = 1`.
    pub fn standard(seed: u64) -> Result<Self> {
        Self::random(8, 0.95, 1.0, seed)
    }

    pub fn neurons(&self) -> usize {
        self.w_in.len()
    }
}

pub fn esn_step(x: &DVector<f64>, s: f64, params: &EsnParams) -> DVector<f64> {
    let mut pre = &params.w * x * params.beta;
    pre.axpy(params.iota * s, &params.w_in, 1.0);
    pre.map(f64::tanh)
}

/// Neuron states after each input from `washout` on, starting at zero.
pub fn esn_trajectory(inputs: &[f64], params: &EsnParams, washout: usize) -> Result<TrajectoryRecord> {
    esn_trajectory_from(&DVector::zeros(params.neurons()), inputs, params, washout)
}

pub fn esn_trajectory_from(
    initial: &DVector<f64>,
    inputs: &[f64],
    params: &EsnParams,
    washout: usize,
) -> Result<TrajectoryRecord> {
    let n = params.neurons();
    if initial.len() != n {
        return Err(Error::DimensionMismatch { expected: n, actual: initial.len() });
    }
    if washout > inputs.len() {
        return Err(Error::InvalidParameter { name: "washout", reason: "exceeds the input length".into() });
    }
    let mut observables = DMatrix::zeros(inputs.len() - washout, n);
    let mut x = initial.clone();
    for (k, &s) in inputs.iter().enumerate() {
        x = esn_step(&x, s, params);
        if k >= washout {
            observables.row_mut(k - washout).tr_copy_from(&x);
        }
    }
    Ok(TrajectoryRecord { observables, kind: ObservableKind::NeuronStates, washout })
}
