//! Ridge regression on flattened windows.
//!
//! A window starting at row `s` of a series is the contiguous slice
//! `rows[s·width .. (s+lags)·width]`, so its Gram matrix is made of
//! `width × width` lag blocks `C(i, j) = Σ_s F[s+i]ᵀ F[s+j]`. The first block
//! row comes from dense products; every other block follows along its
//! diagonal by removing one outer product and adding another.

use faer::linalg::matmul::matmul;
use faer::linalg::solvers::Solve;
use faer::{Accum, Mat, MatRef, Par, Side};
use serde::{Deserialize, Serialize};

use super::BenchError;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct RidgeShape {
    pub lags: usize,
    pub width: usize,
}

impl RidgeShape {
    pub fn dim(&self) -> usize {
        self.lags * self.width
    }
}

/// Consecutive windows of one series. Window `k` starts at row `first + k`
/// and has target `targets[k]`.
#[derive(Debug, Clone, Copy)]
pub struct TrainBlock<'a> {
    pub rows: &'a [f64],
    pub first: usize,
    pub targets: &'a [f64],
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearModel {
    pub shape: RidgeShape,
    /// One weight per flattened window entry, then the bias.
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl LinearModel {
    pub fn bias(&self) -> f64 {
        *self.weights.last().expect("weights include the bias")
    }

    /// Prediction for a flattened window of `shape.dim()` values.
    pub fn predict(&self, window: &[f64]) -> f64 {
        let d = self.shape.dim();
        assert_eq!(window.len(), d, "window length");
        self.bias() + window.iter().zip(&self.weights[..d]).map(|(x, w)| x * w).sum::<f64>()
    }

    pub fn predict_at(&self, rows: &[f64], start: usize) -> f64 {
        let w = self.shape.width;
        self.predict(&rows[start * w..(start + self.shape.lags) * w])
    }
}

/// Sufficient statistics of the least-squares problem.
pub struct NormalEquations {
    shape: RidgeShape,
    gram: Mat<f64>,
    sums: Vec<f64>,
    xty: Vec<f64>,
    y_sum: f64,
    y_sq: f64,
    n: usize,
}

impl NormalEquations {
    pub fn new(shape: RidgeShape) -> Self {
        let d = shape.dim();
        Self {
            shape,
            gram: Mat::zeros(d, d),
            sums: vec![0.0; d],
            xty: vec![0.0; d],
            y_sum: 0.0,
            y_sq: 0.0,
            n: 0,
        }
    }

    pub fn samples(&self) -> usize {
        self.n
    }

    pub fn accumulate(&mut self, block: &TrainBlock) -> Result<(), BenchError> {
        let RidgeShape { lags, width } = self.shape;
        let w = block.targets.len();
        if w == 0 {
            return Ok(());
        }
        if !block.rows.len().is_multiple_of(width) || block.rows.len() / width < block.first + w + lags - 1 {
            return Err(BenchError::Shape(format!(
                "{} windows from row {} need {} rows of width {width}",
                w,
                block.first,
                block.first + w + lags - 1
            )));
        }
        let row = |r: usize| &block.rows[r * width..(r + 1) * width];
        let span = |i: usize| MatRef::from_row_major_slice(&block.rows[(block.first + i) * width..(block.first + i + w) * width], w, width);

        let f0 = span(0);
        let mut c = Mat::<f64>::zeros(width, width);
        for d in 0..lags {
            matmul(c.as_mut(), Accum::Replace, f0.transpose(), span(d), 1.0, Par::Seq);
            for i in 0..lags - d {
                let (bi, bj) = (i * width, (i + d) * width);
                for a in 0..width {
                    for b in 0..width {
                        let v = c[(a, b)];
                        self.gram[(bi + a, bj + b)] += v;
                        if d > 0 {
                            self.gram[(bj + b, bi + a)] += v;
                        }
                    }
                }
                if i + 1 < lags - d {
                    let (out_i, out_j) = (row(block.first + i), row(block.first + i + d));
                    let (in_i, in_j) = (row(block.first + w + i), row(block.first + w + i + d));
                    for a in 0..width {
                        for b in 0..width {
                            c[(a, b)] += in_i[a] * in_j[b] - out_i[a] * out_j[b];
                        }
                    }
                }
            }
        }

        for i in 0..lags {
            for k in 0..w {
                let r = row(block.first + k + i);
                let y = block.targets[k];
                let (s, xy) = (&mut self.sums[i * width..(i + 1) * width], &mut self.xty[i * width..(i + 1) * width]);
                for c in 0..width {
                    s[c] += r[c];
                    xy[c] += r[c] * y;
                }
            }
        }
        self.y_sum += block.targets.iter().sum::<f64>();
        self.y_sq += block.targets.iter().map(|y| y * y).sum::<f64>();
        self.n += w;
        Ok(())
    }

    /// Minimizes `(1/n)‖Xw + b − y‖² + λ‖w‖²` with the bias unpenalized.
    pub fn solve(&self, lambda: f64) -> Result<LinearModel, BenchError> {
        if !(lambda >= 0.0) || !lambda.is_finite() {
            return Err(BenchError::Lambda(lambda));
        }
        if self.n == 0 {
            return Err(BenchError::Empty("no training windows".into()));
        }
        // Keep the factorization single-threaded so results do not depend on
        // the machine.
        faer::set_global_parallelism(Par::Seq);
        let d = self.shape.dim();
        let n = self.n as f64;
        let mean: Vec<f64> = self.sums.iter().map(|s| s / n).collect();
        let y_mean = self.y_sum / n;
        let a = Mat::from_fn(d, d, |i, j| self.gram[(i, j)] / n - mean[i] * mean[j] + if i == j { lambda } else { 0.0 });
        let rhs = Mat::from_fn(d, 1, |i, _| self.xty[i] / n - mean[i] * y_mean);

        let rank_deficient = || BenchError::RankDeficient { samples: self.n, dim: d };
        let llt = a.llt(Side::Lower).map_err(|_| rank_deficient())?;
        if lambda == 0.0 {
            let l = llt.L();
            let scale = (0..d).map(|i| a[(i, i)]).fold(0.0, f64::max);
            let smallest = (0..d).map(|i| l[(i, i)] * l[(i, i)]).fold(f64::INFINITY, f64::min);
            if !(smallest > 1e-10 * scale) {
                return Err(rank_deficient());
            }
        }
        let sol = llt.solve(&rhs);
        let mut weights: Vec<f64> = (0..d).map(|i| sol[(i, 0)]).collect();
        let bias = y_mean - weights.iter().zip(&mean).map(|(w, m)| w * m).sum::<f64>();
        weights.push(bias);
        if weights.iter().any(|w| !w.is_finite()) {
            return Err(rank_deficient());
        }
        Ok(LinearModel {
            shape: self.shape,
            weights,
            lambda,
        })
    }

    /// Mean squared training error of `model`, from the accumulated sums.
    pub fn training_mse(&self, model: &LinearModel) -> f64 {
        let d = self.shape.dim();
        let w = &model.weights[..d];
        let b = model.bias();
        let n = self.n as f64;
        let mut quad = 0.0;
        for i in 0..d {
            let mut gw = 0.0;
            for j in 0..d {
                gw += self.gram[(i, j)] * w[j];
            }
            quad += w[i] * gw;
        }
        let ws: f64 = w.iter().zip(&self.sums).map(|(a, s)| a * s).sum();
        let wxy: f64 = w.iter().zip(&self.xty).map(|(a, s)| a * s).sum();
        (quad + 2.0 * b * ws + n * b * b - 2.0 * wxy - 2.0 * b * self.y_sum + self.y_sq) / n
    }

    /// Value of the penalized objective at `model`.
    pub fn objective(&self, model: &LinearModel, lambda: f64) -> f64 {
        let d = self.shape.dim();
        self.training_mse(model) + lambda * model.weights[..d].iter().map(|w| w * w).sum::<f64>()
    }

    /// Raw `Σ z zᵀ` over flattened windows, for inspection in tests.
    pub fn gram(&self) -> &Mat<f64> {
        &self.gram
    }
}

pub fn fit_ridge(shape: RidgeShape, blocks: &[TrainBlock], lambda: f64) -> Result<LinearModel, BenchError> {
    let mut ne = NormalEquations::new(shape);
    for b in blocks {
        ne.accumulate(b)?;
    }
    ne.solve(lambda)
}
