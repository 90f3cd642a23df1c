use serde::{Deserialize, Serialize};

/// Running mean and second central moment of a vector of observables.
#[derive(Debug, Clone, PartialEq)]
pub(crate) struct Moments {
    pub n: f64,
    pub mean: Vec<f64>,
    pub m2: Vec<f64>,
}

impl Moments {
    pub fn leaf(values: &[f64]) -> Self {
        Self {
            n: 1.0,
            mean: values.to_vec(),
            m2: vec![0.0; values.len()],
        }
    }

    /// Pairwise combination of two disjoint samples.
    pub fn merge(a: &Self, b: &Self) -> Self {
        let n = a.n + b.n;
        let wb = b.n / n;
        let cross = a.n * b.n / n;
        let mut mean = Vec::with_capacity(a.mean.len());
        let mut m2 = Vec::with_capacity(a.mean.len());
        for i in 0..a.mean.len() {
            let d = b.mean[i] - a.mean[i];
            mean.push(a.mean[i] + d * wb);
            m2.push(a.m2[i] + b.m2[i] + d * d * cross);
        }
        Self { n, mean, m2 }
    }

    /// Unbiased sample variance; zero for a single sample.
    pub fn variance(&self) -> Vec<f64> {
        if self.n < 2.0 {
            return vec![0.0; self.m2.len()];
        }
        self.m2.iter().map(|v| v / (self.n - 1.0)).collect()
    }

    /// Reduces leaves in index order with a balanced binary tree.
    pub fn tree(leaves: Vec<Self>) -> Option<Self> {
        let mut level = leaves;
        while level.len() > 1 {
            let mut next = Vec::with_capacity(level.len().div_ceil(2));
            let mut it = level.chunks(2);
            for pair in &mut it {
                next.push(if pair.len() == 2 {
                    Self::merge(&pair[0], &pair[1])
                } else {
                    pair[0].clone()
                });
            }
            level = next;
        }
        level.pop()
    }
}

/// Mean and unbiased variance of a scalar over the ensemble.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalarStat {
    pub mean: f64,
    pub variance: f64,
}

impl ScalarStat {
    /// Standard error of the mean for `m` samples.
    pub fn stderr(&self, m: usize) -> f64 {
        (self.variance / m as f64).sqrt()
    }
}
