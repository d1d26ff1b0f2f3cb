//! JSON experiment configurations and the runners behind the command line.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use nalgebra::DMatrix;

use crate::capacity::{total_ipc, CapacityOptions, CapacityReport, FunctionFamily, IpcSource};
use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};
use crate::esn::EsnParams;
use crate::network::OscillatorNetwork;
use crate::reservoir::{dt_grid, select_dt, spectral_sweep, ObservableKind, Reservoir};
use crate::rng::{SeededRng, Stream};
use crate::tasks::{run_task, InputDistribution, Lengths, TaskKind, TaskResult, TaskSpec};

/// Largest `rho(A)` accepted when `dt` is chosen automatically.
pub const DEFAULT_MAX_RADIUS: f64 = 0.99;
/// Network redraws before giving up on finding a stable `dt`.
pub const MAX_REDRAWS: u32 = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Topology {
    Chain,
    Complete,
    Explicit,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Coupling {
    Fixed(f64),
    /// Drawn uniformly per edge.
    Range([f64; 2]),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum DtSpec {
    Fixed(f64),
    /// Only `"auto"` is accepted.
    Keyword(String),
}

impl DtSpec {
    pub fn is_auto(&self) -> bool {
        matches!(self, Self::Keyword(k) if k == "auto")
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NetworkSpec {
    pub topology: Topology,
    #[serde(default)]
    pub n: Option<usize>,
    pub omega: f64,
    #[serde(default)]
    pub coupling: Option<Coupling>,
    /// Coupling matrix for the explicit topology.
    #[serde(default)]
    pub couplings: Option<Vec<Vec<f64>>>,
    pub ancilla_index: usize,
    pub dt: DtSpec,
    #[serde(default = "default_max_radius")]
    pub max_radius: f64,
}

fn default_max_radius() -> f64 {
    DEFAULT_MAX_RADIUS
}

impl NetworkSpec {
    /// Chain of 8 at `omega = 0.25`, `g = 0.1`, ancilla at the end, `dt = 59.6`.
    pub fn chain8() -> Self {
        Self {
            topology: Topology::Chain,
            n: Some(8),
            omega: 0.25,
            coupling: Some(Coupling::Fixed(0.1)),
            couplings: None,
            ancilla_index: 7,
            dt: DtSpec::Fixed(59.6),
            max_radius: DEFAULT_MAX_RADIUS,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if let DtSpec::Keyword(k) = &self.dt {
            if k != "auto" {
                return Err(Error::InvalidConfig(format!("dt must be a number or \"auto\", got {k:?}")));
            }
        }
        match self.topology {
            Topology::Explicit if self.couplings.is_none() => {
                Err(Error::InvalidConfig("explicit topology needs `couplings`".into()))
            }
            Topology::Chain | Topology::Complete if self.n.is_none() || self.coupling.is_none() => {
                Err(Error::InvalidConfig("chain and complete topologies need `n` and `coupling`".into()))
            }
            Topology::Chain if matches!(self.coupling, Some(Coupling::Range(_))) => {
                Err(Error::InvalidConfig("chain topology takes a fixed coupling".into()))
            }
            _ => Ok(()),
        }
    }

    /// Whether building the network consumes random numbers.
    pub fn is_random(&self) -> bool {
        matches!(self.coupling, Some(Coupling::Range(_))) && self.topology == Topology::Complete
    }

    pub fn build(&self, rng: &mut SeededRng) -> Result<OscillatorNetwork> {
        self.validate()?;
        match self.topology {
            Topology::Explicit => {
                let rows = self.couplings.as_ref().expect("validated");
                let n = rows.len();
                if rows.iter().any(|r| r.len() != n) {
                    return Err(Error::InvalidConfig("coupling matrix is not square".into()));
                }
                let g = DMatrix::from_fn(n, n, |i, j| rows[i][j]);
                OscillatorNetwork::new(vec![self.omega; n], g, self.ancilla_index)
            }
            Topology::Chain => match self.coupling {
                Some(Coupling::Fixed(g)) => {
                    OscillatorNetwork::chain(self.n.expect("validated"), self.omega, g, self.ancilla_index)
                }
                _ => unreachable!("validated"),
            },
            Topology::Complete => {
                let n = self.n.expect("validated");
                match self.coupling.expect("validated") {
                    Coupling::Fixed(g) => OscillatorNetwork::complete(n, self.omega, g, self.ancilla_index),
                    Coupling::Range([lo, hi]) => {
                        OscillatorNetwork::random_complete(n, self.omega, lo, hi, self.ancilla_index, rng)
                    }
                }
            }
        }
    }

    /// Builds replication `index` of the network and its interaction time.
    /// With `dt: "auto"` a random grid value with `rho(A) <= max_radius` is
    /// chosen; random networks without one are redrawn.
    pub fn realize(&self, seed: u64, index: u32) -> Result<(OscillatorNetwork, f64)> {
        let mut net_rng = SeededRng::for_replication(seed, Stream::Network, index);
        let mut dt_rng = SeededRng::for_replication(seed, Stream::DtSelection, index);
        for attempt in 0..MAX_REDRAWS {
            let net = self.build(&mut net_rng)?;
            match &self.dt {
                DtSpec::Fixed(dt) => return Ok((net, *dt)),
                DtSpec::Keyword(_) => {
                    if let Some(dt) = select_dt(&net, self.max_radius, &mut dt_rng)? {
                        if attempt > 0 {
                            log::info!("replication {index}: stable network after {attempt} redraws");
                        }
                        return Ok((net, dt));
                    }
                    if !self.is_random() {
                        return Err(Error::InvalidConfig(format!(
                            "no grid value of dt gives rho(A) <= {}",
                            self.max_radius
                        )));
                    }
                }
            }
        }
        Err(Error::InvalidConfig(format!("no stable network in {MAX_REDRAWS} draws")))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ReservoirKind {
    #[default]
    Gaussian,
    Esn,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EsnSpec {
    pub neurons: usize,
    pub beta: f64,
    pub iota: f64,
    /// Defaults to the experiment seed.
    pub seed: Option<u64>,
}

impl Default for EsnSpec {
    fn default() -> Self {
        Self { neurons: 8, beta: 0.95, iota: 1.0, seed: None }
    }
}

/// One bar of a capacity comparison.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct IpcRun {
    pub label: String,
    #[serde(default)]
    pub reservoir: ReservoirKind,
    #[serde(default)]
    pub encoding: Option<EncodingScheme>,
    #[serde(default)]
    pub observables: Option<ObservableKind>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    #[serde(default)]
    pub network: Option<NetworkSpec>,
    #[serde(default)]
    pub reservoir: ReservoirKind,
    #[serde(default)]
    pub esn: EsnSpec,
    #[serde(default)]
    pub encoding: Option<EncodingScheme>,
    #[serde(default)]
    pub observables: Option<ObservableKind>,
    #[serde(default = "default_degree")]
    pub readout_degree: usize,
    #[serde(default)]
    pub task: Option<TaskKind>,
    #[serde(default)]
    pub input: Option<InputDistribution>,
    #[serde(default)]
    pub lengths: Lengths,
    #[serde(default = "default_seed")]
    pub seed: u64,
    #[serde(default = "default_replications")]
    pub replications: u32,
    #[serde(default)]
    pub lambdas: Vec<f64>,
    #[serde(default)]
    pub capacity: CapacityOptions,
    #[serde(default)]
    pub family: Option<FunctionFamily>,
    #[serde(default)]
    pub runs: Vec<IpcRun>,
    /// Interaction times for the spectral sweep; defaults to `0` followed by
    /// the grid `k * 0.01 / omega0`, `k = 1..=3000`.
    #[serde(default)]
    pub dt_values: Option<Vec<f64>>,
}

fn default_degree() -> usize {
    1
}

fn default_seed() -> u64 {
    1
}

fn default_replications() -> u32 {
    1
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if let Some(net) = &self.network {
            net.validate()?;
        }
        if let Some(scheme) = &self.encoding {
            scheme.validate()?;
        }
        if self.lambdas.iter().any(|l| !(0.0..=1.0).contains(l)) {
            return Err(Error::InvalidConfig("lambdas must lie in [0, 1]".into()));
        }
        if self.replications == 0 {
            return Err(Error::InvalidConfig("replications must be positive".into()));
        }
        if self.readout_degree == 0 {
            return Err(Error::InvalidConfig("readout_degree must be at least 1".into()));
        }
        Ok(())
    }

    fn network(&self) -> Result<&NetworkSpec> {
        self.network.as_ref().ok_or_else(|| Error::InvalidConfig("missing `network`".into()))
    }

    fn encoding(&self) -> Result<EncodingScheme> {
        self.encoding.ok_or_else(|| Error::InvalidConfig("missing `encoding`".into()))
    }

    fn observables(&self) -> Result<ObservableKind> {
        self.observables.ok_or_else(|| Error::InvalidConfig("missing `observables`".into()))
    }

    fn esn_params(&self) -> Result<EsnParams> {
        EsnParams::random(self.esn.neurons, self.esn.beta, self.esn.iota, self.esn.seed.unwrap_or(self.seed))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpectralRow {
    pub dt: f64,
    pub rho: f64,
}

pub fn run_spectral(cfg: &ExperimentConfig) -> Result<Vec<SpectralRow>> {
    let spec = cfg.network()?;
    let net = spec.build(&mut SeededRng::for_replication(cfg.seed, Stream::Network, 0))?;
    let dts = match &cfg.dt_values {
        Some(v) => v.clone(),
        None => std::iter::once(0.0).chain(dt_grid(net.frequencies().mean())).collect(),
    };
    Ok(spectral_sweep(&net, &dts)?.into_iter().map(|(dt, rho)| SpectralRow { dt, rho }).collect())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskOutcome {
    pub dt: f64,
    pub spectral_radius: f64,
    pub result: TaskResult,
}

pub fn run_task_experiment(cfg: &ExperimentConfig) -> Result<TaskOutcome> {
    let kind = cfg.task.ok_or_else(|| Error::InvalidConfig("missing `task`".into()))?;
    let input = cfg.input.unwrap_or(match kind {
        TaskKind::ParityCheck { .. } => InputDistribution::Binary01,
        TaskKind::Legendre { .. } => InputDistribution::UniformPm1,
    });
    let spec = TaskSpec { kind, input, lengths: cfg.lengths, seed: cfg.seed, observables: cfg.observables()? };
    let (net, dt) = cfg.network()?.realize(cfg.seed, 0)?;
    let reservoir = Reservoir::new(&net, dt)?;
    let result = run_task(&spec, &reservoir, &cfg.encoding()?, cfg.readout_degree)?;
    Ok(TaskOutcome { dt, spectral_radius: reservoir.spectral_radius(), result })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IpcOutcome {
    pub label: String,
    pub report: CapacityReport,
}

fn ipc_once(
    cfg: &ExperimentConfig,
    reservoir_kind: ReservoirKind,
    scheme: Option<EncodingScheme>,
    kind: Option<ObservableKind>,
    replication: u32,
) -> Result<CapacityReport> {
    let seed = cfg.seed.wrapping_add(replication as u64);
    match reservoir_kind {
        ReservoirKind::Esn => {
            let params = cfg.esn_params()?;
            total_ipc(IpcSource::Esn(&params), cfg.lengths.washout, cfg.lengths.train, cfg.family, &cfg.capacity, seed)
        }
        ReservoirKind::Gaussian => {
            let scheme = scheme.or(cfg.encoding).ok_or_else(|| Error::InvalidConfig("missing `encoding`".into()))?;
            let kind = kind.or(cfg.observables).unwrap_or(if scheme.is_displacement() {
                ObservableKind::FirstMoments
            } else {
                ObservableKind::Covariances
            });
            let (net, dt) = cfg.network()?.realize(cfg.seed, replication)?;
            let reservoir = Reservoir::new(&net, dt)?;
            let source = IpcSource::Gaussian { reservoir: &reservoir, scheme, kind };
            total_ipc(source, cfg.lengths.washout, cfg.lengths.train, cfg.family, &cfg.capacity, seed)
        }
    }
}

/// Capacity reports for every entry of `runs`, or for the top-level
/// reservoir when `runs` is empty.
pub fn run_ipc(cfg: &ExperimentConfig) -> Result<Vec<IpcOutcome>> {
    if cfg.runs.is_empty() {
        let label = match cfg.reservoir {
            ReservoirKind::Esn => "ESN".to_string(),
            ReservoirKind::Gaussian => cfg.encoding()?.name().to_string(),
        };
        let report = ipc_once(cfg, cfg.reservoir, None, None, 0)?;
        return Ok(vec![IpcOutcome { label, report }]);
    }
    cfg.runs
        .par_iter()
        .map(|run| {
            let report = ipc_once(cfg, run.reservoir, run.encoding, run.observables, 0)?;
            Ok(IpcOutcome { label: run.label.clone(), report })
        })
        .collect()
}

/// Mean and sample standard deviation, summed in sorted order so the result
/// does not depend on evaluation order.
pub fn mean_std(values: &[f64]) -> (f64, f64) {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len() as f64;
    let mean = v.iter().sum::<f64>() / n;
    if v.len() < 2 {
        return (mean, 0.0);
    }
    let mut dev: Vec<f64> = v.iter().map(|x| (x - mean).powi(2)).collect();
    dev.sort_by(f64::total_cmp);
    (mean, (dev.iter().sum::<f64>() / (n - 1.0)).sqrt())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LambdaPoint {
    pub lambda: f64,
    pub replications: usize,
    pub total: (f64, f64),
    pub linear: (f64, f64),
    pub low_nonlinear: (f64, f64),
    pub high_nonlinear: (f64, f64),
    /// Bucket fractions of each replication's total, averaged.
    pub linear_fraction: (f64, f64),
    pub low_fraction: (f64, f64),
    pub high_fraction: (f64, f64),
}

/// `CoherentConvex` capacity over `lambdas`, averaged over `replications`
/// network draws. Replication `r` uses the same network for every `lambda`.
pub fn run_lambda_sweep(cfg: &ExperimentConfig) -> Result<Vec<LambdaPoint>> {
    let lambdas = if cfg.lambdas.is_empty() { vec![0.0, 0.25, 0.5, 0.75, 1.0] } else { cfg.lambdas.clone() };
    let kind = cfg.observables.unwrap_or(ObservableKind::FirstMoments);
    let jobs: Vec<(usize, u32)> =
        (0..lambdas.len()).flat_map(|i| (0..cfg.replications).map(move |r| (i, r))).collect();
    let reports = jobs
        .par_iter()
        .map(|&(i, r)| {
            let scheme = EncodingScheme::CoherentConvex { lambda: lambdas[i] };
            ipc_once(cfg, ReservoirKind::Gaussian, Some(scheme), Some(kind), r)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| {
            let reps: Vec<&CapacityReport> =
                jobs.iter().zip(&reports).filter(|((j, _), _)| *j == i).map(|(_, rep)| rep).collect();
            let pick = |f: &dyn Fn(&CapacityReport) -> f64| mean_std(&reps.iter().map(|r| f(r)).collect::<Vec<_>>());
            LambdaPoint {
                lambda,
                replications: reps.len(),
                total: pick(&|r| r.total),
                linear: pick(&|r| r.linear),
                low_nonlinear: pick(&|r| r.low_nonlinear),
                high_nonlinear: pick(&|r| r.high_nonlinear),
                linear_fraction: pick(&|r| r.linear / r.total),
                low_fraction: pick(&|r| r.low_nonlinear / r.total),
                high_fraction: pick(&|r| r.high_nonlinear / r.total),
            }
        })
        .collect())
}
