//! Input-driven reservoir dynamics.
//!
//! At every step the ancilla is reset to the encoded input state and the
//! whole network evolves for `dt`. Splitting the propagator with the ancilla
//! last,
//!
//! ```text
//! S = | A  B |
//!     | C  D |
//! ```
//!
//! the reservoir moments follow `mean' = A mean + B mean_a` and
//! `cov' = A cov A^T + B cov_a B^T`. The recurrence forgets its initial
//! condition iff the spectral radius of `A` is below one.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::encoding::{encode, EncodingScheme};
use crate::error::{Error, Result};
use crate::linalg::eigenvalue_moduli;
use crate::gaussian::{GaussianState, PHYSICALITY_TOLERANCE};
use crate::network::OscillatorNetwork;
use crate::propagator::{build_propagator, SymplecticPropagator};
use crate::rng::SeededRng;

/// A reservoir counts as stable when `rho(A) < 1 - STABILITY_MARGIN`. Highly
/// symmetric networks have an eigenvalue of modulus exactly one that round-off
/// places a few ulps below it.
pub const STABILITY_MARGIN: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ObservableKind {
    /// Reservoir first moments, `L = 2(N-1)`.
    FirstMoments,
    /// Diagonal and upper triangle of the reservoir covariance, `L = (N-1)(2N-1)`.
    Covariances,
    /// Echo state network neuron activations.
    NeuronStates,
}

impl ObservableKind {
    /// Observable count for a network of `modes` oscillators (ancilla included).
    pub fn observable_count(self, modes: usize) -> usize {
        let r = 2 * (modes - 1);
        match self {
            Self::FirstMoments => r,
            Self::Covariances => r * (r + 1) / 2,
            Self::NeuronStates => modes,
        }
    }
}

/// The propagator split around the ancilla.
#[derive(Debug, Clone, PartialEq)]
pub struct PropagatorBlocks {
    pub a: DMatrix<f64>,
    pub b: DMatrix<f64>,
    pub c: DMatrix<f64>,
    pub d: DMatrix<f64>,
    pub ancilla_index: usize,
}

/// Mode order with the ancilla moved to the end.
fn ancilla_last_order(modes: usize, ancilla_index: usize) -> Vec<usize> {
    (0..modes).filter(|&m| m != ancilla_index).chain(std::iter::once(ancilla_index)).collect()
}

fn quadrature_order(modes: &[usize]) -> Vec<usize> {
    modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect()
}

pub fn split_blocks(prop: &SymplecticPropagator, ancilla_index: usize) -> Result<PropagatorBlocks> {
    let modes = prop.dim() / 2;
    if ancilla_index >= modes {
        return Err(Error::IndexOutOfRange { index: ancilla_index, len: modes });
    }
    let idx = quadrature_order(&ancilla_last_order(modes, ancilla_index));
    let dim = prop.dim();
    let permuted = DMatrix::from_fn(dim, dim, |i, j| prop.matrix[(idx[i], idx[j])]);
    let r = dim - 2;
    Ok(PropagatorBlocks {
        a: permuted.view((0, 0), (r, r)).into_owned(),
        b: permuted.view((0, r), (r, 2)).into_owned(),
        c: permuted.view((r, 0), (2, r)).into_owned(),
        d: permuted.view((r, r), (2, 2)).into_owned(),
        ancilla_index,
    })
}

impl PropagatorBlocks {
    /// Reservoir phase-space dimension `2(N-1)`.
    pub fn reservoir_dim(&self) -> usize {
        self.a.nrows()
    }

    /// The full propagator in the original mode order.
    pub fn reassemble(&self) -> DMatrix<f64> {
        let r = self.reservoir_dim();
        let dim = r + 2;
        let mut permuted = DMatrix::zeros(dim, dim);
        permuted.view_mut((0, 0), (r, r)).copy_from(&self.a);
        permuted.view_mut((0, r), (r, 2)).copy_from(&self.b);
        permuted.view_mut((r, 0), (2, r)).copy_from(&self.c);
        permuted.view_mut((r, r), (2, 2)).copy_from(&self.d);
        let idx = quadrature_order(&ancilla_last_order(dim / 2, self.ancilla_index));
        let mut s = DMatrix::zeros(dim, dim);
        for i in 0..dim {
            for j in 0..dim {
                s[(idx[i], idx[j])] = permuted[(i, j)];
            }
        }
        s
    }
}

/// Largest eigenvalue modulus of a square matrix, NaN if the eigenvalue
/// iteration fails (which [`is_stable`] rejects).
pub fn spectral_radius_of(m: &DMatrix<f64>) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    match eigenvalue_moduli(m) {
        Ok(moduli) => moduli.into_iter().fold(0.0, f64::max),
        Err(e) => {
            log::warn!("{e}");
            f64::NAN
        }
    }
}

pub fn spectral_radius(blocks: &PropagatorBlocks) -> f64 {
    spectral_radius_of(&blocks.a)
}

pub fn is_stable(spectral_radius: f64) -> bool {
    spectral_radius < 1.0 - STABILITY_MARGIN
}

#[derive(Debug, Clone, PartialEq)]
pub struct ReservoirState {
    pub mean: DVector<f64>,
    pub cov: DMatrix<f64>,
}

impl ReservoirState {
    /// Product of thermal states, each reservoir oscillator at its own frequency.
    pub fn thermal(network: &OscillatorNetwork, n_th: f64) -> Self {
        let freqs: Vec<f64> = reservoir_modes(network).map(|m| network.frequencies()[m]).collect();
        let g = GaussianState::thermal(&freqs, n_th);
        Self { mean: g.mean, cov: g.cov }
    }

    /// Product of random single-mode states (thermal occupation up to
    /// `2`, squeezing up to `1`, displacement up to `2`), for convergence
    /// checks.
    pub fn random(network: &OscillatorNetwork, rng: &mut SeededRng) -> Result<Self> {
        let modes: Vec<usize> = reservoir_modes(network).collect();
        let dim = 2 * modes.len();
        let mut mean = DVector::zeros(dim);
        let mut cov = DMatrix::zeros(dim, dim);
        for (k, &m) in modes.iter().enumerate() {
            let st = crate::gaussian::single_mode_state(
                network.frequencies()[m],
                rng.uniform(0.0, 2.0),
                rng.uniform(0.0, 1.0),
                rng.uniform(0.0, std::f64::consts::TAU),
                rng.uniform(0.0, 2.0),
                rng.uniform(0.0, std::f64::consts::TAU),
            )?;
            mean.rows_mut(2 * k, 2).copy_from(&st.mean);
            cov.view_mut((2 * k, 2 * k), (2, 2)).copy_from(&st.cov);
        }
        Ok(Self { mean, cov })
    }

    pub fn as_gaussian(&self) -> GaussianState {
        GaussianState { mean: self.mean.clone(), cov: self.cov.clone() }
    }

    pub fn is_physical(&self) -> bool {
        self.as_gaussian()
            .symplectic_eigenvalues()
            .map(|nu| nu.iter().all(|v| *v >= 0.5 - PHYSICALITY_TOLERANCE))
            .unwrap_or(false)
    }
}

fn reservoir_modes(network: &OscillatorNetwork) -> impl Iterator<Item = usize> + '_ {
    (0..network.modes()).filter(move |&m| m != network.ancilla_index())
}

/// One input step of the reservoir channel.
pub fn step(state: &ReservoirState, ancilla: &GaussianState, blocks: &PropagatorBlocks) -> Result<ReservoirState> {
    let r = blocks.reservoir_dim();
    if state.mean.len() != r || state.cov.nrows() != r || state.cov.ncols() != r {
        return Err(Error::DimensionMismatch { expected: r, actual: state.mean.len() });
    }
    if ancilla.mean.len() != 2 {
        return Err(Error::DimensionMismatch { expected: 2, actual: ancilla.mean.len() });
    }
    let (a, b) = (&blocks.a, &blocks.b);
    Ok(ReservoirState {
        mean: a * &state.mean + b * &ancilla.mean,
        cov: a * &state.cov * a.transpose() + b * &ancilla.cov * b.transpose(),
    })
}

/// Observable vector of a reservoir state.
pub fn extract_observables(state: &ReservoirState, kind: ObservableKind) -> DVector<f64> {
    match kind {
        ObservableKind::FirstMoments | ObservableKind::NeuronStates => state.mean.clone(),
        ObservableKind::Covariances => {
            let r = state.cov.nrows();
            let mut out = DVector::zeros(r * (r + 1) / 2);
            write_upper_triangle(&state.cov, out.as_mut_slice());
            out
        }
    }
}

fn write_upper_triangle(cov: &DMatrix<f64>, out: &mut [f64]) {
    let r = cov.nrows();
    let mut k = 0;
    for i in 0..r {
        for j in i..r {
            out[k] = cov[(i, j)];
            k += 1;
        }
    }
}

/// Recorded observables, one row per step after the washout.
#[derive(Debug, Clone, PartialEq)]
pub struct TrajectoryRecord {
    pub observables: DMatrix<f64>,
    pub kind: ObservableKind,
    /// Row `i` was recorded right after input `washout + i` was processed.
    pub washout: usize,
}

impl TrajectoryRecord {
    pub fn rows(&self) -> usize {
        self.observables.nrows()
    }

    pub fn observable_count(&self) -> usize {
        self.observables.ncols()
    }

    /// Rows `start..start + len` as a new record.
    pub fn slice(&self, start: usize, len: usize) -> TrajectoryRecord {
        TrajectoryRecord {
            observables: self.observables.rows(start, len).into_owned(),
            kind: self.kind,
            washout: self.washout + start,
        }
    }
}

/// A network with a fixed interaction time, checked to have the echo state
/// property.
#[derive(Debug, Clone)]
pub struct Reservoir {
    network: OscillatorNetwork,
    dt: f64,
    blocks: PropagatorBlocks,
    spectral_radius: f64,
}

impl Reservoir {
    pub fn new(network: &OscillatorNetwork, dt: f64) -> Result<Self> {
        let prop = build_propagator(network, dt)?;
        let blocks = split_blocks(&prop, network.ancilla_index())?;
        let spectral_radius = spectral_radius(&blocks);
        if !is_stable(spectral_radius) {
            return Err(Error::UnstableReservoir { spectral_radius });
        }
        Ok(Self { network: network.clone(), dt, blocks, spectral_radius })
    }

    pub fn network(&self) -> &OscillatorNetwork {
        &self.network
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn blocks(&self) -> &PropagatorBlocks {
        &self.blocks
    }

    pub fn spectral_radius(&self) -> f64 {
        self.spectral_radius
    }

    /// Drives the reservoir with `inputs` starting from the product vacuum.
    pub fn run(
        &self,
        inputs: &[f64],
        scheme: &EncodingScheme,
        washout: usize,
        kind: ObservableKind,
    ) -> Result<TrajectoryRecord> {
        self.run_from(&ReservoirState::thermal(&self.network, 0.0), inputs, scheme, washout, kind)
    }

    pub fn run_from(
        &self,
        initial: &ReservoirState,
        inputs: &[f64],
        scheme: &EncodingScheme,
        washout: usize,
        kind: ObservableKind,
    ) -> Result<TrajectoryRecord> {
        if kind == ObservableKind::NeuronStates {
            return Err(Error::InvalidParameter {
                name: "kind",
                reason: "neuron states belong to echo state networks".into(),
            });
        }
        if washout > inputs.len() {
            return Err(Error::InvalidParameter {
                name: "washout",
                reason: format!("{washout} exceeds the input length {}", inputs.len()),
            });
        }
        let r = self.blocks.reservoir_dim();
        if initial.mean.len() != r {
            return Err(Error::DimensionMismatch { expected: r, actual: initial.mean.len() });
        }
        let omega = self.network.ancilla_frequency();
        let (a, b) = (&self.blocks.a, &self.blocks.b);
        let at = a.transpose();
        let bt = b.transpose();
        let track_cov = kind == ObservableKind::Covariances;

        let rows = inputs.len() - washout;
        let cols = kind.observable_count(self.network.modes());
        let mut observables = DMatrix::zeros(rows, cols);
        let mut row = vec![0.0; cols];

        let mut mean = initial.mean.clone();
        let mut next_mean = DVector::zeros(r);
        let mut cov = initial.cov.clone();
        let mut tmp = DMatrix::zeros(r, r);
        let mut next_cov = DMatrix::zeros(r, r);

        for (k, &s) in inputs.iter().enumerate() {
            let anc = encode(s, scheme, omega)?;
            next_mean.gemv(1.0, a, &mean, 0.0);
            next_mean.gemv(1.0, b, &anc.mean, 1.0);
            std::mem::swap(&mut mean, &mut next_mean);
            if track_cov {
                tmp.gemm(1.0, a, &cov, 0.0);
                next_cov.copy_from(&(b * &anc.cov * &bt));
                next_cov.gemm(1.0, &tmp, &at, 1.0);
                std::mem::swap(&mut cov, &mut next_cov);
            }
            if k >= washout {
                let i = k - washout;
                if track_cov {
                    write_upper_triangle(&cov, &mut row);
                    for (j, v) in row.iter().enumerate() {
                        observables[(i, j)] = *v;
                    }
                } else {
                    observables.row_mut(i).tr_copy_from(&mean);
                }
            }
        }
        Ok(TrajectoryRecord { observables, kind, washout })
    }
}

/// Builds the reservoir for `network` at `dt` and drives it with `inputs`.
pub fn run_sequence(
    inputs: &[f64],
    scheme: &EncodingScheme,
    network: &OscillatorNetwork,
    dt: f64,
    washout: usize,
    kind: ObservableKind,
) -> Result<TrajectoryRecord> {
    Reservoir::new(network, dt)?.run(inputs, scheme, washout, kind)
}

/// Interaction times `dt = k * 0.01 / omega0` for `k = 1..=3000`.
pub fn dt_grid(omega0: f64) -> Vec<f64> {
    (1..=3000).map(|k| k as f64 * 0.01 / omega0).collect()
}

/// `(dt, rho(A))` for every `dt`.
pub fn spectral_sweep(network: &OscillatorNetwork, dts: &[f64]) -> Result<Vec<(f64, f64)>> {
    dts.iter()
        .map(|&dt| {
            let prop = build_propagator(network, dt)?;
            let blocks = split_blocks(&prop, network.ancilla_index())?;
            Ok((dt, spectral_radius(&blocks)))
        })
        .collect()
}

/// Picks a random grid value of `dt` with `rho(A) <= max_radius`, or `None`
/// if there is none.
pub fn select_dt(network: &OscillatorNetwork, max_radius: f64, rng: &mut SeededRng) -> Result<Option<f64>> {
    let omega0 = network.frequencies().mean();
    let candidates: Vec<f64> = spectral_sweep(network, &dt_grid(omega0))?
        .into_iter()
        .filter(|&(_, rho)| rho <= max_radius)
        .map(|(dt, _)| dt)
        .collect();
    if candidates.is_empty() {
        return Ok(None);
    }
    Ok(Some(candidates[rng.below(candidates.len() as u64) as usize]))
}
