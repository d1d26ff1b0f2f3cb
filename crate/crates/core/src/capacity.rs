//! Information processing capacity.
//!
//! The capacity of a target `z` is `C = 1 - min_W sum (z_k - o_k)^2 / sum z_k^2`
//! over linear readouts `o = X W`, which equals `|U^T z|^2 / |z|^2` for an
//! orthonormal basis `U` of the column space of `X`. Targets are products of
//! normalized Legendre polynomials of delayed inputs, an orthonormal family
//! for i.i.d. uniform inputs, so the capacities add up to at most the number
//! of linearly independent observables (bias included).

use std::fmt;

use nalgebra::{DMatrix, DVector};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};
use crate::esn::{esn_trajectory, EsnParams};
use crate::legendre::LegendreTable;
use crate::linalg::column_space_basis;
use crate::reservoir::{ObservableKind, Reservoir, TrajectoryRecord};
use crate::rng::{SeededRng, Stream};

/// Largest Legendre degree considered.
pub const DEFAULT_MAX_DEGREE: usize = 9;
pub const DEFAULT_SURROGATES: usize = 100;
/// Threshold = factor times the largest surrogate capacity.
pub const DEFAULT_SAFETY_FACTOR: f64 = 1.2;
/// Cap on product functions evaluated per degree.
pub const DEFAULT_PRODUCT_CAP: usize = 20_000;

/// `prod_i Ptilde_{m_i}(s_{k - tau_i})` with distinct delays, stored as
/// `(tau_i, m_i)` sorted by delay. No factors means the constant 1.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TargetFunction {
    pub factors: Vec<(usize, usize)>,
}

impl TargetFunction {
    pub fn constant() -> Self {
        Self { factors: Vec::new() }
    }

    pub fn single(degree: usize, delay: usize) -> Self {
        Self { factors: vec![(delay, degree)] }
    }

    /// From a non-descending delay sequence; a delay repeated `m` times gives
    /// a degree-`m` factor.
    pub fn from_delays(delays: &[usize]) -> Self {
        let mut factors: Vec<(usize, usize)> = Vec::new();
        for &t in delays {
            match factors.last_mut() {
                Some((tau, m)) if *tau == t => *m += 1,
                _ => factors.push((t, 1)),
            }
        }
        factors.sort_unstable();
        Self { factors }
    }

    pub fn total_degree(&self) -> usize {
        self.factors.iter().map(|f| f.1).sum()
    }

    pub fn max_delay(&self) -> usize {
        self.factors.iter().map(|f| f.0).max().unwrap_or(0)
    }

    /// Values at input indices `first..first + rows`; terms reaching before
    /// the start of the input sequence are zero.
    pub fn evaluate(&self, table: &LegendreTable, first: usize, rows: usize) -> DVector<f64> {
        let mut z = DVector::from_element(rows, 1.0);
        for &(tau, m) in &self.factors {
            let p = table.degree(m);
            for (i, v) in z.iter_mut().enumerate() {
                let k = first + i;
                *v *= if k >= tau { p[k - tau] } else { 0.0 };
            }
        }
        z
    }
}

impl fmt::Display for TargetFunction {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.factors.is_empty() {
            return write!(f, "1");
        }
        let parts: Vec<String> = self.factors.iter().map(|(t, m)| format!("P{m}[{t}]")).collect();
        write!(f, "{}", parts.join("*"))
    }
}

/// Precomputed column-space basis of a trajectory's observables plus bias.
///
/// The observables are centred and scaled to unit variance before the basis
/// is taken, which leaves the span unchanged but lets a relative
/// singular-value tolerance of `max(M, F) * eps` separate numerically
/// dependent columns from merely badly scaled ones.
#[derive(Debug, Clone)]
pub struct CapacityEstimator {
    basis: DMatrix<f64>,
}

impl CapacityEstimator {
    pub fn new(traj: &TrajectoryRecord) -> Result<Self> {
        let obs = &traj.observables;
        let m = obs.nrows();
        if m == 0 {
            return Err(Error::DegenerateInput("empty trajectory".into()));
        }
        if obs.iter().any(|v| !v.is_finite()) {
            return Err(Error::DegenerateInput("non-finite observable".into()));
        }
        let mut cols: Vec<DVector<f64>> = Vec::with_capacity(obs.ncols() + 1);
        for c in obs.column_iter() {
            let mean = c.mean();
            let centred = c.add_scalar(-mean);
            let sd = (centred.norm_squared() / m as f64).sqrt();
            // a constant column lies in the span of the bias
            if sd > f64::EPSILON * mean.abs().max(f64::MIN_POSITIVE) * 16.0 {
                cols.push(centred / sd);
            }
        }
        cols.push(DVector::from_element(m, 1.0));
        let x = DMatrix::from_columns(&cols);
        let tol = m.max(x.ncols()) as f64 * f64::EPSILON;
        Ok(Self { basis: column_space_basis(&x, tol)? })
    }

    pub fn rows(&self) -> usize {
        self.basis.nrows()
    }

    /// Number of linearly independent observables, bias included.
    pub fn rank(&self) -> usize {
        self.basis.ncols()
    }

    /// Unthresholded capacity in `[0, 1]`.
    pub fn raw_capacity(&self, z: &DVector<f64>) -> Result<f64> {
        if z.len() != self.rows() {
            return Err(Error::DimensionMismatch { expected: self.rows(), actual: z.len() });
        }
        let energy = z.norm_squared();
        if energy == 0.0 {
            return Err(Error::ZeroTarget);
        }
        let proj = self.basis.tr_mul(z);
        Ok((proj.norm_squared() / energy).clamp(0.0, 1.0))
    }

    /// Capacity with values at or below `threshold` set to zero.
    pub fn capacity(&self, z: &DVector<f64>, threshold: f64) -> Result<f64> {
        let c = self.raw_capacity(z)?;
        Ok(if c > threshold { c } else { 0.0 })
    }

    /// Largest capacity over `n` random permutations of `z`, times `safety`.
    pub fn calibrate_threshold(&self, z: &DVector<f64>, n: usize, safety: f64, seed: u64) -> Result<f64> {
        let caps = (0..n)
            .into_par_iter()
            .map(|i| {
                let mut rng = SeededRng::for_replication(seed, Stream::Surrogates, i as u32);
                let mut perm = z.as_slice().to_vec();
                rng.shuffle(&mut perm);
                self.raw_capacity(&DVector::from_vec(perm))
            })
            .collect::<Result<Vec<f64>>>()?;
        Ok(safety * caps.into_iter().fold(0.0, f64::max))
    }
}

/// Capacity of `z` against the observables of `traj`, zeroed at or below
/// `threshold`.
pub fn capacity(traj: &TrajectoryRecord, z: &DVector<f64>, threshold: f64) -> Result<f64> {
    CapacityEstimator::new(traj)?.capacity(z, threshold)
}

/// Threshold from `n_surrogates` shuffles of the input window aligned with
/// `traj`.
pub fn calibrate_threshold(
    traj: &TrajectoryRecord,
    inputs: &[f64],
    n_surrogates: usize,
    seed: u64,
) -> Result<f64> {
    let est = CapacityEstimator::new(traj)?;
    let z = DVector::from_column_slice(&inputs[traj.washout..traj.washout + traj.rows()]);
    est.calibrate_threshold(&z, n_surrogates, DEFAULT_SAFETY_FACTOR, seed)
}

/// Infinite stream `P_d` at delays `0, 1, 2, ...`.
pub fn enumerate_single_delay(degree: usize) -> impl Iterator<Item = TargetFunction> {
    (0..).map(move |tau| TargetFunction::single(degree, tau))
}

/// Non-descending delay sequences of length `degree`, in shells of
/// increasing largest delay and lexicographic order within a shell:
/// `(0,0), (0,1), (1,1), (0,2), (1,2), (2,2), ...` for degree 2.
#[derive(Debug, Clone)]
pub struct ProductSequences {
    degree: usize,
    shell: usize,
    pending: std::vec::IntoIter<Vec<usize>>,
}

impl ProductSequences {
    pub fn new(degree: usize) -> Self {
        assert!(degree >= 1, "product degree must be at least 1");
        Self { degree, shell: 0, pending: shell_sequences(degree, 0).into_iter() }
    }
}

impl Iterator for ProductSequences {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        loop {
            if let Some(s) = self.pending.next() {
                return Some(s);
            }
            self.shell += 1;
            self.pending = shell_sequences(self.degree, self.shell).into_iter();
        }
    }
}

/// Non-descending sequences of length `degree` whose last entry is `t`.
pub fn shell_sequences(degree: usize, t: usize) -> Vec<Vec<usize>> {
    fn prefixes(len: usize, lo: usize, hi: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>, t: usize) {
        if len == 0 {
            let mut s = cur.clone();
            s.push(t);
            out.push(s);
            return;
        }
        for v in lo..=hi {
            cur.push(v);
            prefixes(len - 1, v, hi, cur, out, t);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    prefixes(degree - 1, 0, t, &mut Vec::new(), &mut out, t);
    out
}

/// Lazy stream of product targets of total degree `degree`.
pub fn enumerate_products(degree: usize) -> impl Iterator<Item = TargetFunction> {
    ProductSequences::new(degree).map(|s| TargetFunction::from_delays(&s))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FunctionFamily {
    /// `P_d` at a single delay, in batches, for Gaussian reservoirs.
    SingleDelay,
    /// Products over non-descending delay sequences, for the echo state network.
    Products,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CapacityOptions {
    pub max_degree: usize,
    pub surrogates: usize,
    pub safety_factor: f64,
    /// Functions per batch in the single-delay family; `None` means
    /// `round(N / 2)` for an `N`-mode network.
    pub batch: Option<usize>,
    pub product_cap: usize,
}

impl Default for CapacityOptions {
    fn default() -> Self {
        Self {
            max_degree: DEFAULT_MAX_DEGREE,
            surrogates: DEFAULT_SURROGATES,
            safety_factor: DEFAULT_SAFETY_FACTOR,
            batch: None,
            product_cap: DEFAULT_PRODUCT_CAP,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityEntry {
    pub function: TargetFunction,
    pub degree: usize,
    pub capacity: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CapacityReport {
    /// Functions with capacity above the threshold, in enumeration order.
    pub entries: Vec<CapacityEntry>,
    pub threshold: f64,
    /// Degrees 0 and 1.
    pub linear: f64,
    /// Degrees 2 and 3.
    pub low_nonlinear: f64,
    /// Degrees 4 and above.
    pub high_nonlinear: f64,
    pub total: f64,
    /// Linearly independent observables plus bias.
    pub bound: usize,
    /// Summed capacity per degree, index = degree.
    pub by_degree: Vec<f64>,
    pub evaluated: usize,
}

impl CapacityReport {
    fn from_entries(entries: Vec<CapacityEntry>, threshold: f64, bound: usize, max_degree: usize, evaluated: usize) -> Self {
        let mut by_degree = vec![0.0; max_degree + 1];
        for e in &entries {
            by_degree[e.degree] += e.capacity;
        }
        let linear = by_degree.iter().take(2).sum();
        let low_nonlinear = by_degree.iter().skip(2).take(2).sum();
        let high_nonlinear = by_degree.iter().skip(4).sum();
        let total = by_degree.iter().sum();
        Self { entries, threshold, linear, low_nonlinear, high_nonlinear, total, bound, by_degree, evaluated }
    }

    pub fn linear_fraction(&self) -> f64 {
        self.linear / self.total
    }
}

/// Capacity budget of a trajectory driven by `inputs` (uniform on
/// `[-1, 1]`, aligned so that row `i` follows input `traj.washout + i`).
///
/// The degree-0 target contributes its unit capacity to the linear bucket.
/// For each degree `d = 1..=max_degree` functions are taken from `family` in
/// enumeration order and scored `batch` at a time; a degree ends when a
/// batch adds nothing above the threshold.
pub fn capacity_budget(
    traj: &TrajectoryRecord,
    inputs: &[f64],
    family: FunctionFamily,
    batch: usize,
    options: &CapacityOptions,
    seed: u64,
) -> Result<CapacityReport> {
    if inputs.len() < traj.washout + traj.rows() {
        return Err(Error::DimensionMismatch { expected: traj.washout + traj.rows(), actual: inputs.len() });
    }
    if batch == 0 {
        return Err(Error::InvalidParameter { name: "batch", reason: "must be positive".into() });
    }
    let est = CapacityEstimator::new(traj)?;
    let (first, rows) = (traj.washout, traj.rows());
    let window = DVector::from_column_slice(&inputs[first..first + rows]);
    let threshold = est.calibrate_threshold(&window, options.surrogates, options.safety_factor, seed)?;
    let table = LegendreTable::new(&inputs[..first + rows], options.max_degree);

    let score = |funcs: &[TargetFunction]| -> Result<Vec<f64>> {
        funcs
            .par_iter()
            .map(|f| match est.capacity(&f.evaluate(&table, first, rows), threshold) {
                Err(Error::ZeroTarget) => Ok(0.0),
                other => other,
            })
            .collect()
    };

    let mut entries = vec![CapacityEntry {
        function: TargetFunction::constant(),
        degree: 0,
        capacity: est.capacity(&DVector::from_element(rows, 1.0), threshold)?,
    }];
    let mut evaluated = 1;
    // delays beyond the washout would reach before the first input
    let max_delay = first;

    for degree in 1..=options.max_degree {
        let mut stream: Box<dyn Iterator<Item = TargetFunction>> = match family {
            FunctionFamily::SingleDelay => Box::new(enumerate_single_delay(degree)),
            FunctionFamily::Products => Box::new(enumerate_products(degree)),
        };
        let mut done_for_degree = 0usize;
        loop {
            let funcs: Vec<TargetFunction> = stream.by_ref().take(batch).collect();
            let funcs: Vec<TargetFunction> = funcs
                .into_iter()
                .filter(|f| f.max_delay() <= max_delay)
                .take(options.product_cap.saturating_sub(done_for_degree))
                .collect();
            if funcs.is_empty() {
                log::warn!("degree {degree}: stopped at the delay or function cap");
                break;
            }
            let caps = score(&funcs)?;
            done_for_degree += funcs.len();
            evaluated += funcs.len();
            let mut contributed = false;
            for (f, c) in funcs.into_iter().zip(caps) {
                if c > 0.0 {
                    contributed = true;
                    entries.push(CapacityEntry { degree: f.total_degree(), function: f, capacity: c });
                }
            }
            if !contributed {
                break;
            }
        }
    }
    Ok(CapacityReport::from_entries(entries, threshold, est.rank(), options.max_degree, evaluated))
}

/// `round(N / 2)`, at least 1.
pub fn default_batch(modes: usize) -> usize {
    ((modes as f64 / 2.0).round() as usize).max(1)
}

/// What drives the capacity measurement.
#[derive(Debug, Clone, Copy)]
pub enum IpcSource<'a> {
    Gaussian { reservoir: &'a Reservoir, scheme: EncodingScheme, kind: ObservableKind },
    Esn(&'a EsnParams),
}

impl IpcSource<'_> {
    pub fn default_family(&self) -> FunctionFamily {
        match self {
            Self::Gaussian { .. } => FunctionFamily::SingleDelay,
            Self::Esn(_) => FunctionFamily::Products,
        }
    }

    /// Network modes or neurons.
    pub fn size(&self) -> usize {
        match self {
            Self::Gaussian { reservoir, .. } => reservoir.network().modes(),
            Self::Esn(p) => p.neurons(),
        }
    }

    pub fn trajectory(&self, inputs: &[f64], washout: usize) -> Result<TrajectoryRecord> {
        match self {
            Self::Gaussian { reservoir, scheme, kind } => reservoir.run(inputs, scheme, washout, *kind),
            Self::Esn(p) => esn_trajectory(inputs, p, washout),
        }
    }
}

/// Drives `source` with `washout + rows` uniform inputs from `seed` and
/// measures its capacity budget over `family` (default by source).
pub fn total_ipc(
    source: IpcSource<'_>,
    washout: usize,
    rows: usize,
    family: Option<FunctionFamily>,
    options: &CapacityOptions,
    seed: u64,
) -> Result<CapacityReport> {
    let inputs = SeededRng::for_stream(seed, Stream::Inputs).uniform_vec(washout + rows, -1.0, 1.0);
    let traj = source.trajectory(&inputs, washout)?;
    let batch = options.batch.unwrap_or_else(|| default_batch(source.size()));
    capacity_budget(&traj, &inputs, family.unwrap_or(source.default_family()), batch, options, seed)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::readout::{build_features, nmse, predict, train};
    use crate::reservoir::ObservableKind;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::collections::HashSet;

    fn uniform_inputs(n: usize, stream: u64) -> Vec<f64> {
        SeededRng::new(0, stream).uniform_vec(n, -1.0, 1.0)
    }

    /// Oracle reservoir whose state is the last `taps` inputs.
    fn delay_line(inputs: &[f64], taps: usize, washout: usize) -> TrajectoryRecord {
        let rows = inputs.len() - washout;
        TrajectoryRecord {
            observables: DMatrix::from_fn(rows, taps, |i, j| inputs[washout + i - j]),
            kind: ObservableKind::FirstMoments,
            washout,
        }
    }

    #[test]
    fn observable_target_has_full_capacity() {
        let inputs = uniform_inputs(3000, 41);
        let traj = delay_line(&inputs, 3, 100);
        let z = traj.observables.column(2).into_owned();
        assert_abs_diff_eq!(capacity(&traj, &z, 0.0).unwrap(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn delay_line_recovers_its_taps() {
        let inputs = uniform_inputs(6000, 42);
        let traj = delay_line(&inputs, 5, 100);
        let est = CapacityEstimator::new(&traj).unwrap();
        let table = LegendreTable::new(&inputs, 3);
        for tau in 0..5 {
            let z = TargetFunction::single(1, tau).evaluate(&table, 100, traj.rows());
            assert_abs_diff_eq!(est.raw_capacity(&z).unwrap(), 1.0, epsilon = 1e-12);
        }
        let z = TargetFunction::single(1, 5).evaluate(&table, 100, traj.rows());
        assert!(est.raw_capacity(&z).unwrap() < 0.01);
        let report = capacity_budget(&traj, &inputs, FunctionFamily::SingleDelay, 4, &CapacityOptions::default(), 0)
            .unwrap();
        assert_eq!(report.bound, 6);
        assert_abs_diff_eq!(report.total - 1.0, 5.0, epsilon = 0.02);
        assert_abs_diff_eq!(report.linear, 6.0, epsilon = 0.02);
    }

    #[test]
    fn independent_target_is_thresholded_away() {
        let inputs = uniform_inputs(5000, 43);
        let traj = delay_line(&inputs, 6, 100);
        let threshold = calibrate_threshold(&traj, &inputs, 100, 0).unwrap();
        let fresh = DVector::from_vec(uniform_inputs(traj.rows(), 44));
        assert_eq!(capacity(&traj, &fresh, threshold).unwrap(), 0.0);
    }

    #[test]
    fn zero_target_is_an_error() {
        let inputs = uniform_inputs(300, 45);
        let traj = delay_line(&inputs, 2, 10);
        assert!(matches!(capacity(&traj, &DVector::zeros(traj.rows()), 0.0), Err(Error::ZeroTarget)));
    }

    #[test]
    fn threshold_shrinks_with_length() {
        let inputs = uniform_inputs(21_000, 46);
        let long = delay_line(&inputs, 14, 1000);
        let short = long.slice(0, 5000);
        let t_long = calibrate_threshold(&long, &inputs, 100, 0).unwrap();
        let t_short = calibrate_threshold(&short, &inputs, 100, 0).unwrap();
        assert!(t_long < t_short, "{t_long} vs {t_short}");
    }

    #[test]
    fn threshold_properties() {
        let inputs = uniform_inputs(4000, 47);
        let traj = delay_line(&inputs, 8, 100);
        let one = calibrate_threshold(&traj, &inputs, 1, 0).unwrap();
        let hundred = calibrate_threshold(&traj, &inputs, 100, 0).unwrap();
        assert!(hundred >= one);
        let flat = TrajectoryRecord { observables: DMatrix::from_element(traj.rows(), 3, 2.5), ..traj.clone() };
        assert!(calibrate_threshold(&flat, &inputs, 100, 0).unwrap() < 5e-3);
    }

    #[test]
    fn matches_one_minus_readout_nmse() {
        let inputs = uniform_inputs(2000, 48);
        let mut traj = delay_line(&inputs, 4, 50);
        traj.observables = traj.observables.map(|v| v.tanh() + 0.3 * v * v);
        let z = DVector::from_fn(traj.rows(), |i, _| (inputs[50 + i] * 2.0).sin() + inputs[49 + i].powi(2));
        let c = CapacityEstimator::new(&traj).unwrap().raw_capacity(&z).unwrap();
        let x = build_features(&traj, 1).unwrap();
        let e = nmse(&predict(&x, &train(&x, &z).unwrap()).unwrap(), &z).unwrap();
        assert_abs_diff_eq!(c, 1.0 - e, epsilon = 1e-10);
    }

    #[test]
    fn product_order_and_multiplicity() {
        let first: Vec<Vec<usize>> = ProductSequences::new(2).take(6).collect();
        assert_eq!(first, vec![vec![0, 0], vec![0, 1], vec![1, 1], vec![0, 2], vec![1, 2], vec![2, 2]]);
        assert_eq!(TargetFunction::from_delays(&[0, 0]), TargetFunction::single(2, 0));
        assert_eq!(TargetFunction::from_delays(&[1, 3, 3]).factors, vec![(1, 1), (3, 2)]);
        assert_eq!(enumerate_single_delay(1).next(), Some(TargetFunction::single(1, 0)));
        assert_eq!(default_batch(8), 4);
        assert_eq!(TargetFunction::from_delays(&[1, 3, 3]).to_string(), "P1[1]*P2[3]");
    }

    #[test]
    fn products_have_no_duplicates() {
        for degree in 1..=4 {
            let expected = {
                // non-descending sequences over 0..=6 correspond to multisets
                let mut n = 1usize;
                for i in 0..degree {
                    n = n * (7 + i) / (i + 1);
                }
                n
            };
            let funcs: Vec<TargetFunction> =
                enumerate_products(degree).take_while(|f| f.max_delay() <= 6).collect();
            assert_eq!(funcs.len(), expected);
            let set: HashSet<_> = funcs.iter().cloned().collect();
            assert_eq!(set.len(), funcs.len());
            assert!(funcs.iter().all(|f| f.total_degree() == degree));
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(16))]

        #[test]
        fn scale_invariant(scale in 1e-3f64..1e3, seed in 0u64..100) {
            let inputs = uniform_inputs(800, 100 + seed);
            let traj = delay_line(&inputs, 3, 20);
            let est = CapacityEstimator::new(&traj).unwrap();
            let z = DVector::from_fn(traj.rows(), |i, _| inputs[20 + i].powi(3) + inputs[18 + i]);
            let a = est.raw_capacity(&z).unwrap();
            let b = est.raw_capacity(&(&z * scale)).unwrap();
            prop_assert!((a - b).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a));
        }
    }
}
