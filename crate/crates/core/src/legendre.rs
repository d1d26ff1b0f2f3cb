//! Legendre polynomials on `[-1, 1]`.

/// `P_d(x)` by the three-term recurrence.
pub fn legendre(degree: usize, x: f64) -> f64 {
    match degree {
        0 => 1.0,
        1 => x,
        _ => {
            let (mut prev, mut cur) = (1.0, x);
            for n in 1..degree {
                let n = n as f64;
                let next = ((2.0 * n + 1.0) * x * cur - n * prev) / (n + 1.0);
                prev = cur;
                cur = next;
            }
            cur
        }
    }
}

/// `sqrt(2d + 1) P_d(x)`, which has unit mean square under the uniform
/// density on `[-1, 1]`.
pub fn normalized_legendre(degree: usize, x: f64) -> f64 {
    ((2 * degree + 1) as f64).sqrt() * legendre(degree, x)
}

/// Normalized Legendre values for degrees `0..=max_degree` at every point of
/// a sequence, stored degree-major.
#[derive(Debug, Clone)]
pub struct LegendreTable {
    values: Vec<Vec<f64>>,
}

impl LegendreTable {
    pub fn new(points: &[f64], max_degree: usize) -> Self {
        let values = (0..=max_degree)
            .map(|d| points.iter().map(|&x| normalized_legendre(d, x)).collect())
            .collect();
        Self { values }
    }

    pub fn max_degree(&self) -> usize {
        self.values.len() - 1
    }

    pub fn degree(&self, d: usize) -> &[f64] {
        &self.values[d]
    }
}
