//! Polynomial feature expansion and least-squares readouts.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::encoding::EncodingScheme;
use crate::error::{Error, Result};
use crate::linalg::min_norm_solve;
use crate::reservoir::{ObservableKind, TrajectoryRecord};

/// Relative singular-value cutoff of the readout solve.
pub const READOUT_RCOND: f64 = 1e-10;

/// Default cap on the number of feature columns.
pub const DEFAULT_FEATURE_CAP: usize = 1_000_000;

/// Observables, their products of distinct factors up to `degree`, and a
/// trailing bias column of ones.
#[derive(Debug, Clone, PartialEq)]
pub struct FeatureMatrix {
    pub x: DMatrix<f64>,
    pub degree: usize,
    pub source_l: usize,
    pub kind: ObservableKind,
}

impl FeatureMatrix {
    pub fn rows(&self) -> usize {
        self.x.nrows()
    }

    pub fn columns(&self) -> usize {
        self.x.ncols()
    }
}

fn binomial(n: usize, k: usize) -> Option<usize> {
    if k > n {
        return Some(0);
    }
    let mut acc: usize = 1;
    for i in 0..k {
        acc = acc.checked_mul(n - i)? / (i + 1);
    }
    Some(acc)
}

/// `F = 1 + sum_{j=1..d} C(L, j)`, or `None` on overflow.
pub fn feature_count(source_l: usize, degree: usize) -> Option<usize> {
    (1..=degree).try_fold(1usize, |acc, j| acc.checked_add(binomial(source_l, j)?))
}

/// Index sets of all products of `j` distinct observables, `j = 1..=degree`,
/// grouped by `j` and lexicographic within a group.
pub fn monomials(source_l: usize, degree: usize) -> Vec<Vec<usize>> {
    fn extend(start: usize, left: usize, l: usize, cur: &mut Vec<usize>, out: &mut Vec<Vec<usize>>) {
        if left == 0 {
            out.push(cur.clone());
            return;
        }
        for i in start..l {
            cur.push(i);
            extend(i + 1, left - 1, l, cur, out);
            cur.pop();
        }
    }
    let mut out = Vec::new();
    for j in 1..=degree.min(source_l) {
        extend(0, j, source_l, &mut Vec::new(), &mut out);
    }
    out
}

pub fn build_features(traj: &TrajectoryRecord, degree: usize) -> Result<FeatureMatrix> {
    build_features_capped(traj, degree, DEFAULT_FEATURE_CAP)
}

pub fn build_features_capped(traj: &TrajectoryRecord, degree: usize, cap: usize) -> Result<FeatureMatrix> {
    if degree == 0 {
        return Err(Error::InvalidParameter { name: "degree", reason: "readout degree must be at least 1".into() });
    }
    let l = traj.observable_count();
    let columns = feature_count(l, degree).unwrap_or(usize::MAX);
    if columns > cap {
        return Err(Error::SizeOverflow { columns, cap });
    }
    let obs = &traj.observables;
    let m = obs.nrows();
    let mut x = DMatrix::zeros(m, columns);
    for (c, idx) in monomials(l, degree).iter().enumerate() {
        let mut col = x.column_mut(c);
        col.copy_from(&obs.column(idx[0]));
        for &i in &idx[1..] {
            col.component_mul_assign(&obs.column(i));
        }
    }
    x.column_mut(columns - 1).fill(1.0);
    Ok(FeatureMatrix { x, degree, source_l: l, kind: traj.kind })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutWeights {
    pub weights: Vec<f64>,
    pub degree: usize,
    pub kind: ObservableKind,
    pub scheme: Option<EncodingScheme>,
}

/// Minimum-norm least-squares readout `W = X^+ target`.
pub fn train(features: &FeatureMatrix, target: &DVector<f64>) -> Result<ReadoutWeights> {
    let (m, f) = (features.rows(), features.columns());
    if target.len() != m {
        return Err(Error::DimensionMismatch { expected: m, actual: target.len() });
    }
    if m == 0 {
        return Err(Error::DegenerateInput("no training rows".into()));
    }
    if features.x.iter().chain(target.iter()).any(|v| !v.is_finite()) {
        return Err(Error::DegenerateInput("non-finite feature or target entry".into()));
    }
    if m < f {
        log::warn!("underdetermined readout: {m} rows for {f} features");
    }
    let w = min_norm_solve(&features.x, target, READOUT_RCOND)?;
    Ok(ReadoutWeights { weights: w.iter().copied().collect(), degree: features.degree, kind: features.kind, scheme: None })
}

pub fn predict(features: &FeatureMatrix, weights: &ReadoutWeights) -> Result<DVector<f64>> {
    if weights.weights.len() != features.columns() {
        return Err(Error::DimensionMismatch { expected: features.columns(), actual: weights.weights.len() });
    }
    Ok(&features.x * DVector::from_column_slice(&weights.weights))
}

pub fn squared_error(output: &DVector<f64>, target: &DVector<f64>) -> f64 {
    (output - target).norm_squared()
}

/// `SE / sum target^2`.
pub fn nmse(output: &DVector<f64>, target: &DVector<f64>) -> Result<f64> {
    let energy = target.norm_squared();
    if energy == 0.0 {
        return Err(Error::ZeroTarget);
    }
    Ok(squared_error(output, target) / energy)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::SeededRng;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    fn random_traj(m: usize, l: usize, seed: u64) -> TrajectoryRecord {
        let mut rng = SeededRng::new(0, seed);
        TrajectoryRecord {
            observables: DMatrix::from_fn(m, l, |_, _| rng.uniform(-1.0, 1.0)),
            kind: ObservableKind::FirstMoments,
            washout: 0,
        }
    }

    fn features_of(x: DMatrix<f64>) -> FeatureMatrix {
        let l = x.ncols();
        FeatureMatrix { x, degree: 1, source_l: l, kind: ObservableKind::FirstMoments }
    }

    /// Minimum-norm solution from nalgebra's own SVD.
    fn oracle_min_norm(x: &DMatrix<f64>, y: &DVector<f64>) -> DVector<f64> {
        let svd = x.clone().svd(true, true);
        let smax = svd.singular_values.max();
        let u = svd.u.unwrap();
        let vt = svd.v_t.unwrap();
        let mut w = DVector::zeros(x.ncols());
        for (k, &s) in svd.singular_values.iter().enumerate() {
            if s > 1e-10 * smax {
                w += vt.row(k).transpose() * (u.column(k).dot(y) / s);
            }
        }
        w
    }

    #[test]
    fn feature_counts() {
        assert_eq!(feature_count(14, 1), Some(15));
        assert_eq!(feature_count(3, 2), Some(7));
        assert_eq!(feature_count(14, 2), Some(106));
        assert_eq!(feature_count(14, 4), Some(1 + 14 + 91 + 364 + 1001));
        let traj = random_traj(5, 3, 1);
        assert_eq!(build_features(&traj, 2).unwrap().columns(), 7);
        assert_eq!(build_features(&traj, 9).unwrap().columns(), 8);
    }

    #[test]
    fn products_and_bias() {
        let traj = TrajectoryRecord {
            observables: DMatrix::from_row_slice(2, 3, &[2.0, 3.0, 5.0, -1.0, 4.0, 0.5]),
            kind: ObservableKind::FirstMoments,
            washout: 0,
        };
        let f = build_features(&traj, 3).unwrap();
        let row0: Vec<f64> = f.x.row(0).iter().copied().collect();
        assert_eq!(row0, vec![2.0, 3.0, 5.0, 6.0, 10.0, 15.0, 30.0, 1.0]);
        let row1: Vec<f64> = f.x.row(1).iter().copied().collect();
        assert_eq!(row1, vec![-1.0, 4.0, 0.5, -4.0, -0.5, 2.0, -2.0, 1.0]);
    }

    #[test]
    fn size_cap() {
        let traj = random_traj(3, 14, 2);
        assert!(matches!(build_features_capped(&traj, 2, 100), Err(Error::SizeOverflow { columns: 106, cap: 100 })));
        assert!(build_features(&traj, 0).is_err());
    }

    #[test]
    fn orthonormal_columns_give_transpose() {
        let q = DMatrix::from_fn(50, 4, |i, j| ((i * 7 + j * 13) % 17) as f64 - 8.0).qr().q();
        let y = DVector::from_fn(50, |i, _| (i as f64 * 0.37).sin());
        let w = train(&features_of(q.clone()), &y).unwrap();
        assert_abs_diff_eq!(DVector::from_vec(w.weights), q.transpose() * &y, epsilon = 1e-12);
    }

    #[test]
    fn exact_solvability() {
        let traj = random_traj(200, 6, 3);
        let f = build_features(&traj, 2).unwrap();
        let truth = DVector::from_fn(f.columns(), |i, _| (i as f64 - 9.0) / 7.0);
        let y = &f.x * truth;
        let w = train(&f, &y).unwrap();
        let out = predict(&f, &w).unwrap();
        assert!(squared_error(&out, &y) < 1e-18 * y.norm_squared());
    }

    #[test]
    fn rank_deficient_matches_oracle() {
        let base = random_traj(80, 4, 4).observables;
        let x = DMatrix::from_fn(80, 6, |i, j| match j {
            4 => base[(i, 1)],
            5 => 1.0,
            _ => base[(i, j)],
        });
        let y = DVector::from_fn(80, |i, _| (i as f64).cos());
        let w = train(&features_of(x.clone()), &y).unwrap();
        let oracle = oracle_min_norm(&x, &y);
        assert_abs_diff_eq!(DVector::from_vec(w.weights.clone()), oracle, epsilon = 1e-10);
        // min-norm splits weight evenly across the duplicated pair
        assert_abs_diff_eq!(w.weights[1], w.weights[4], epsilon = 1e-10);
    }

    #[test]
    fn nmse_examples() {
        let t = DVector::from_row_slice(&[1.0, -2.0, 0.5]);
        assert_eq!(nmse(&t, &t).unwrap(), 0.0);
        assert_eq!(nmse(&DVector::zeros(3), &t).unwrap(), 1.0);
        assert_eq!(nmse(&(-&t), &t).unwrap(), 4.0);
        assert!(matches!(nmse(&t, &DVector::zeros(3)), Err(Error::ZeroTarget)));
    }

    #[test]
    fn degenerate_inputs() {
        let f = features_of(DMatrix::zeros(5, 2));
        assert!(matches!(train(&f, &DVector::from_element(5, 1.0)), Err(Error::DegenerateInput(_))));
        let f = features_of(DMatrix::zeros(0, 2));
        assert!(matches!(train(&f, &DVector::zeros(0)), Err(Error::DegenerateInput(_))));
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn higher_degree_never_increases_error(seed in 0u64..1000) {
            let traj = random_traj(120, 4, seed);
            let y = DVector::from_fn(120, |i, _| ((i as f64) * 0.91 + seed as f64).sin().powi(3));
            let mut last = f64::INFINITY;
            for d in 1..=4 {
                let f = build_features(&traj, d).unwrap();
                let se = squared_error(&predict(&f, &train(&f, &y).unwrap()).unwrap(), &y);
                prop_assert!(se <= last * (1.0 + 1e-9) + 1e-12);
                last = se;
            }
        }

        #[test]
        fn duplicated_observable_keeps_predictions(seed in 0u64..1000, dup in 0usize..3) {
            let traj = random_traj(60, 3, seed);
            let y = DVector::from_fn(60, |i, _| ((i as f64) * 0.3 + seed as f64).cos());
            let f = build_features(&traj, 1).unwrap();
            let base = predict(&f, &train(&f, &y).unwrap()).unwrap();
            let mut widened = traj.clone();
            widened.observables = widened.observables.insert_column(3, 0.0);
            let col = traj.observables.column(dup).into_owned();
            widened.observables.set_column(3, &col);
            let g = build_features(&widened, 1).unwrap();
            let wide = predict(&g, &train(&g, &y).unwrap()).unwrap();
            prop_assert!((base - wide).amax() < 1e-9);
        }
    }
}
