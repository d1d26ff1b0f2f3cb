//! Benchmark targets and the train/test protocol for task experiments.

use nalgebra::DVector;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};
use crate::legendre::{legendre, normalized_legendre};
use crate::readout::{build_features, nmse, predict, train};
use crate::reservoir::{ObservableKind, Reservoir};
use crate::rng::{SeededRng, Stream};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "task", rename_all = "snake_case")]
pub enum TaskKind {
    ParityCheck { tau: usize },
    Legendre {
        degree: usize,
        #[serde(default)]
        delay: usize,
        #[serde(default)]
        normalized: bool,
    },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum InputDistribution {
    /// Uniform on `[-1, 1)`.
    #[serde(rename = "uniform_pm1")]
    UniformPm1,
    /// Fair coin in `{0, 1}`.
    #[serde(rename = "binary_01")]
    Binary01,
}

impl InputDistribution {
    pub fn sample(self, len: usize, rng: &mut SeededRng) -> Vec<f64> {
        match self {
            Self::UniformPm1 => rng.uniform_vec(len, -1.0, 1.0),
            Self::Binary01 => rng.binary_vec(len),
        }
    }
}

/// Steps discarded, used for training, and held out, in that order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Lengths {
    pub washout: usize,
    pub train: usize,
    pub test: usize,
}

impl Default for Lengths {
    fn default() -> Self {
        Self { washout: 10_000, train: 20_000, test: 2_000 }
    }
}

impl Lengths {
    pub fn total(&self) -> usize {
        self.washout + self.train + self.test
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TaskSpec {
    pub kind: TaskKind,
    pub input: InputDistribution,
    #[serde(default)]
    pub lengths: Lengths,
    pub seed: u64,
    pub observables: ObservableKind,
}

impl TaskSpec {
    pub fn validate(&self) -> Result<()> {
        if matches!(self.kind, TaskKind::ParityCheck { .. }) && self.input != InputDistribution::Binary01 {
            return Err(Error::InvalidConfig("parity check needs binary_01 inputs".into()));
        }
        if self.lengths.train == 0 || self.lengths.test == 0 {
            return Err(Error::InvalidConfig("train and test lengths must be positive".into()));
        }
        Ok(())
    }

    pub fn inputs(&self) -> Vec<f64> {
        self.input.sample(self.lengths.total(), &mut SeededRng::for_stream(self.seed, Stream::Inputs))
    }

    pub fn target(&self, inputs: &[f64]) -> Result<Vec<f64>> {
        match self.kind {
            TaskKind::ParityCheck { tau } => parity_target(inputs, tau),
            TaskKind::Legendre { degree, delay, normalized } => legendre_target(inputs, degree, delay, normalized),
        }
    }
}

/// `PC(tau)_k = (s_k + ... + s_{k - tau}) mod 2`, inputs before the start
/// counting as zero.
pub fn parity_target(inputs: &[f64], tau: usize) -> Result<Vec<f64>> {
    let bits = inputs
        .iter()
        .map(|&s| match s {
            0.0 => Ok(0u8),
            1.0 => Ok(1u8),
            _ => Err(Error::NonBinaryInput(s)),
        })
        .collect::<Result<Vec<_>>>()?;
    // running parity over a sliding window of tau + 1 bits
    let mut parity = 0u8;
    Ok((0..bits.len())
        .map(|k| {
            parity ^= bits[k];
            if k > tau {
                parity ^= bits[k - tau - 1];
            }
            parity as f64
        })
        .collect())
}

/// `P_d(s_{k - tau})`, optionally scaled by `sqrt(2d + 1)`; zero before the
/// sequence start.
pub fn legendre_target(inputs: &[f64], degree: usize, delay: usize, normalized: bool) -> Result<Vec<f64>> {
    if let Some(&s) = inputs.iter().find(|s| !(-1.0..=1.0).contains(*s)) {
        return Err(Error::InputOutOfRange(s));
    }
    let p = |x: f64| if normalized { normalized_legendre(degree, x) } else { legendre(degree, x) };
    Ok((0..inputs.len()).map(|k| if k >= delay { p(inputs[k - delay]) } else { 0.0 }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskResult {
    /// On the held-out window.
    pub nmse: f64,
    pub train_nmse: f64,
    /// Fraction of held-out steps whose output, thresholded at 0.5, matches
    /// the binary target. Parity tasks only.
    pub accuracy: Option<f64>,
    /// Held-out outputs and targets, in time order.
    pub predictions: Vec<f64>,
    pub targets: Vec<f64>,
    /// Input index of the first held-out step.
    pub test_start: usize,
}

/// Runs a task: drives the reservoir from vacuum, trains a readout of the
/// given degree on the training window and evaluates on the held-out window
/// that follows it.
pub fn run_task(spec: &TaskSpec, reservoir: &Reservoir, scheme: &EncodingScheme, degree: usize) -> Result<TaskResult> {
    spec.validate()?;
    let inputs = spec.inputs();
    let target = spec.target(&inputs)?;
    let l = spec.lengths;
    let traj = reservoir.run(&inputs, scheme, l.washout, spec.observables)?;

    let slice = |start: usize, len: usize| DVector::from_column_slice(&target[l.washout + start..l.washout + start + len]);
    let train_target = slice(0, l.train);
    let test_target = slice(l.train, l.test);

    let (weights, train_nmse) = {
        let x = build_features(&traj.slice(0, l.train), degree)?;
        let mut w = train(&x, &train_target)?;
        w.scheme = Some(*scheme);
        let e = nmse(&predict(&x, &w)?, &train_target)?;
        (w, e)
    };
    let x = build_features(&traj.slice(l.train, l.test), degree)?;
    let out = predict(&x, &weights)?;
    let test_nmse = nmse(&out, &test_target)?;

    let test_start = l.washout + l.train;
    let accuracy = match spec.kind {
        TaskKind::ParityCheck { tau } => {
            // targets at k < tau depend on zero padding and are not scored
            let scored: Vec<bool> = (0..l.test)
                .filter(|i| test_start + i >= tau)
                .map(|i| (out[i] > 0.5) == (test_target[i] > 0.5))
                .collect();
            Some(scored.iter().filter(|&&ok| ok).count() as f64 / scored.len().max(1) as f64)
        }
        TaskKind::Legendre { .. } => None,
    };
    Ok(TaskResult {
        nmse: test_nmse,
        train_nmse,
        accuracy,
        predictions: out.iter().copied().collect(),
        targets: test_target.iter().copied().collect(),
        test_start,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::network::OscillatorNetwork;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn parity_examples() {
        assert_eq!(parity_target(&[0.0, 0.0, 0.0], 2).unwrap(), vec![0.0; 3]);
        assert_eq!(parity_target(&[1.0, 1.0], 1).unwrap()[1], 0.0);
        assert_eq!(parity_target(&[1.0, 0.0, 1.0, 1.0], 3).unwrap()[3], 1.0);
        assert_eq!(parity_target(&[1.0, 0.0, 1.0], 0).unwrap(), vec![1.0, 0.0, 1.0]);
        assert!(matches!(parity_target(&[0.0, 0.5], 1), Err(Error::NonBinaryInput(_))));
    }

    #[test]
    fn parity_matches_xor_oracle_on_all_windows() {
        for tau in 0..=6usize {
            for bits in 0u32..(1 << (tau + 1)) {
                let window: Vec<f64> = (0..=tau).map(|i| ((bits >> i) & 1) as f64).collect();
                let xor = (0..=tau).fold(0u32, |acc, i| acc ^ ((bits >> i) & 1));
                let got = parity_target(&window, tau).unwrap();
                assert_eq!(got[tau], xor as f64, "tau {tau} bits {bits:b}");
            }
        }
    }

    #[test]
    fn legendre_examples() {
        assert_eq!(legendre_target(&[0.5], 1, 0, false).unwrap(), vec![0.5]);
        assert_abs_diff_eq!(legendre_target(&[1.0], 5, 0, false).unwrap()[0], 1.0, epsilon = 1e-14);
        assert_eq!(legendre_target(&[0.3, -0.2, 0.9], 0, 0, false).unwrap(), vec![1.0; 3]);
        assert_eq!(legendre_target(&[0.3, -0.2, 0.9], 0, 0, true).unwrap(), vec![1.0; 3]);
        assert_eq!(legendre_target(&[0.3, -0.2, 0.9], 1, 2, false).unwrap(), vec![0.0, 0.0, 0.3]);
        assert!(matches!(legendre_target(&[1.5], 1, 0, false), Err(Error::InputOutOfRange(_))));
    }

    #[test]
    fn normalized_p2_has_unit_mean_square() {
        let mut rng = SeededRng::new(0, 31);
        let s = rng.uniform_vec(1_000_000, -1.0, 1.0);
        let z = legendre_target(&s, 2, 0, true).unwrap();
        let ms = z.iter().map(|v| v * v).sum::<f64>() / z.len() as f64;
        assert!((ms - 1.0).abs() < 0.01, "{ms}");
    }

    #[test]
    fn parity_requires_binary_inputs() {
        let spec = TaskSpec {
            kind: TaskKind::ParityCheck { tau: 1 },
            input: InputDistribution::UniformPm1,
            lengths: Lengths::default(),
            seed: 0,
            observables: ObservableKind::FirstMoments,
        };
        assert!(spec.validate().is_err());
    }

    #[test]
    fn small_task_is_deterministic() {
        let net = OscillatorNetwork::chain(4, 0.25, 0.1, 3).unwrap();
        let reservoir = Reservoir::new(&net, 30.0).unwrap();
        let spec = TaskSpec {
            kind: TaskKind::Legendre { degree: 1, delay: 0, normalized: false },
            input: InputDistribution::UniformPm1,
            lengths: Lengths { washout: 500, train: 1000, test: 100 },
            seed: 0,
            observables: ObservableKind::FirstMoments,
        };
        let a = run_task(&spec, &reservoir, &EncodingScheme::coherent_amplitude(), 1).unwrap();
        let b = run_task(&spec, &reservoir, &EncodingScheme::coherent_amplitude(), 1).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.predictions.len(), 100);
        assert!(a.nmse < 0.05, "{}", a.nmse);
    }

    #[test]
    fn task_spec_json() {
        let spec: TaskSpec = serde_json::from_str(
            r#"{"kind":{"task":"parity_check","tau":3},"input":"binary_01","seed":5,"observables":"first_moments"}"#,
        )
        .unwrap();
        assert_eq!(spec.kind, TaskKind::ParityCheck { tau: 3 });
        assert_eq!(spec.lengths, Lengths::default());
    }

    proptest! {
        #[test]
        fn parity_is_sliding_xor(bits in proptest::collection::vec(0u8..2, 1..64), tau in 0usize..8) {
            let s: Vec<f64> = bits.iter().map(|&b| b as f64).collect();
            let got = parity_target(&s, tau).unwrap();
            for k in 0..s.len() {
                let lo = k.saturating_sub(tau);
                let xor = bits[lo..=k].iter().fold(0u8, |a, b| a ^ b);
                prop_assert_eq!(got[k], xor as f64);
            }
        }
    }
}
