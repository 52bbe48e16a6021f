//! Centered ridge readout and expanding-window selection of its penalty.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{check_len, Error, Result};

/// Fitted `(b̂, Ŵ, λ)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReadoutCoefficients {
    pub intercept: f64,
    pub weights: Vec<f64>,
    pub lambda: f64,
}

impl ReadoutCoefficients {
    pub fn new(intercept: f64, weights: Vec<f64>, lambda: f64) -> Result<Self> {
        if !intercept.is_finite() || weights.iter().any(|w| !w.is_finite()) {
            return Err(Error::NonFinite("readout coefficients"));
        }
        if !(lambda >= 0.0) {
            return Err(Error::invalid("lambda", format!("must be >= 0, got {lambda}")));
        }
        Ok(Self {
            intercept,
            weights,
            lambda,
        })
    }

    pub fn dim(&self) -> usize {
        self.weights.len()
    }

    /// `b̂ + Ŵᵀx`.
    pub fn predict(&self, state: &[f64]) -> Result<f64> {
        check_len("readout input", self.weights.len(), state.len())?;
        Ok(self.intercept + self.weights.iter().zip(state).map(|(w, x)| w * x).sum::<f64>())
    }

    /// Predictions for every row of `states`.
    pub fn predict_rows(&self, states: &DMatrix<f64>) -> Result<DVector<f64>> {
        check_len("readout input", self.weights.len(), states.ncols())?;
        let w = DVector::from_column_slice(&self.weights);
        Ok((states * w).add_scalar(self.intercept))
    }
}

/// Centered sufficient statistics of one regression, reusable across penalties.
struct CenteredProblem {
    gram: DMatrix<f64>,
    cross: DVector<f64>,
    x_mean: DVector<f64>,
    y_mean: f64,
}

impl CenteredProblem {
    fn new(states: &DMatrix<f64>, targets: &DVector<f64>) -> Self {
        let n = states.nrows() as f64;
        let x_mean = states.row_mean().transpose();
        let y_mean = targets.sum() / n;
        let mut xc = states.clone();
        for mut row in xc.row_iter_mut() {
            row -= x_mean.transpose();
        }
        let yc = targets.add_scalar(-y_mean);
        Self {
            gram: xc.tr_mul(&xc),
            cross: xc.tr_mul(&yc),
            x_mean,
            y_mean,
        }
    }

    fn solve(&self, lambda: f64) -> Result<ReadoutCoefficients> {
        let d = self.gram.nrows();
        let mut system = self.gram.clone();
        for i in 0..d {
            system[(i, i)] += lambda;
        }
        let chol = system.cholesky().ok_or(Error::RankDeficient)?;
        if lambda == 0.0 {
            let l = chol.l_dirty();
            let diag_max = (0..d).map(|i| l[(i, i)]).fold(0.0, f64::max);
            let diag_min = (0..d).map(|i| l[(i, i)]).fold(f64::INFINITY, f64::min);
            if diag_min <= diag_max * 1e-7 {
                return Err(Error::RankDeficient);
            }
        }
        let w = chol.solve(&self.cross);
        let intercept = self.y_mean - self.x_mean.dot(&w);
        ReadoutCoefficients::new(intercept, w.as_slice().to_vec(), lambda)
    }
}

fn check_inputs(states: &DMatrix<f64>, targets: &[f64], lambda: f64) -> Result<()> {
    check_len("ridge targets", states.nrows(), targets.len())?;
    if states.nrows() < 2 {
        return Err(Error::InsufficientData(format!(
            "ridge needs at least 2 rows, got {}",
            states.nrows()
        )));
    }
    if states.ncols() == 0 {
        return Err(Error::invalid("states", "no columns"));
    }
    if !(lambda >= 0.0 && lambda.is_finite()) {
        return Err(Error::invalid("lambda", format!("must be finite and >= 0, got {lambda}")));
    }
    if states.iter().chain(targets).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("ridge inputs"));
    }
    Ok(())
}

/// Ridge regression on demeaned states and targets; the intercept is
/// recovered as `mean(Y − XŴ)`.
///
/// `lambda = 0` is ordinary least squares and fails with
/// [`Error::RankDeficient`] if the centered states lack full column rank.
pub fn fit_ridge(states: &DMatrix<f64>, targets: &[f64], lambda: f64) -> Result<ReadoutCoefficients> {
    check_inputs(states, targets, lambda)?;
    let y = DVector::from_column_slice(targets);
    CenteredProblem::new(states, &y).solve(lambda)
}

/// Expanding-window cross-validation geometry.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CvConfig {
    pub folds: usize,
    /// Validation block is `max(min_block, floor(rows · block_fraction))` rows.
    pub min_block: usize,
    pub block_fraction: f64,
    /// Smallest admissible training segment.
    pub min_train: usize,
}

impl Default for CvConfig {
    fn default() -> Self {
        Self {
            folds: 5,
            min_block: 4,
            block_fraction: 0.1,
            min_train: 2,
        }
    }
}

impl CvConfig {
    pub fn block_len(&self, rows: usize) -> usize {
        self.min_block.max((rows as f64 * self.block_fraction).floor() as usize)
    }

    /// `(train_end, valid_end)` per fold: train on `[0, train_end)`, validate
    /// on `[train_end, valid_end)`. The last fold ends at `rows`.
    pub fn folds(&self, rows: usize) -> Result<Vec<(usize, usize)>> {
        if self.folds == 0 || self.min_block == 0 {
            return Err(Error::invalid("cv", "folds and block length must be >= 1"));
        }
        let block = self.block_len(rows);
        let needed = self.folds * block + self.min_train.max(2);
        if rows < needed {
            return Err(Error::InsufficientData(format!(
                "cross-validation with {} folds of {block} rows needs {needed} rows, got {rows}",
                self.folds
            )));
        }
        Ok((0..self.folds)
            .map(|i| {
                let start = rows - (self.folds - i) * block;
                (start, start + block)
            })
            .collect())
    }
}

/// Thirteen log-spaced penalties from `1e-6` to `1e3`.
pub fn default_lambda_grid() -> Vec<f64> {
    (0..13).map(|i| 10f64.powf(-6.0 + 0.75 * i as f64)).collect()
}

/// Mean validation squared error for each grid point, in grid order.
/// Penalties that make a fold singular score `+∞`.
pub fn cv_scores(states: &DMatrix<f64>, targets: &[f64], grid: &[f64], cv: &CvConfig) -> Result<Vec<f64>> {
    check_grid(grid)?;
    check_inputs(states, targets, 0.0)?;
    let folds = cv.folds(states.nrows())?;
    let y = DVector::from_column_slice(targets);
    let mut totals = vec![0.0; grid.len()];
    for &(train_end, valid_end) in &folds {
        let x_train = states.rows(0, train_end).into_owned();
        let y_train = y.rows(0, train_end).into_owned();
        let x_valid = states.rows(train_end, valid_end - train_end).into_owned();
        let y_valid = &targets[train_end..valid_end];
        let problem = CenteredProblem::new(&x_train, &y_train);
        for (total, &lambda) in totals.iter_mut().zip(grid) {
            match problem.solve(lambda) {
                Ok(coef) => {
                    let pred = coef.predict_rows(&x_valid)?;
                    let mse = pred
                        .iter()
                        .zip(y_valid)
                        .map(|(p, y)| (p - y).powi(2))
                        .sum::<f64>()
                        / y_valid.len() as f64;
                    *total += mse;
                }
                Err(Error::RankDeficient) => *total = f64::INFINITY,
                Err(e) => return Err(e),
            }
        }
    }
    Ok(totals.into_iter().map(|t| t / folds.len() as f64).collect())
}

/// Grid penalty with the smallest mean validation error; ties go to the smaller penalty.
pub fn select_lambda(states: &DMatrix<f64>, targets: &[f64], grid: &[f64], cv: &CvConfig) -> Result<f64> {
    check_grid(grid)?;
    if grid.len() == 1 {
        return Ok(grid[0]);
    }
    let scores = cv_scores(states, targets, grid, cv)?;
    let mut best: Option<(f64, f64)> = None;
    for (&lambda, &score) in grid.iter().zip(&scores) {
        if score.is_finite() && best.is_none_or(|(_, s)| score < s) {
            best = Some((lambda, score));
        }
    }
    best.map(|(l, _)| l).ok_or(Error::RankDeficient)
}

fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::invalid("lambda grid", "empty"));
    }
    if grid.iter().any(|l| !(*l >= 0.0 && l.is_finite())) {
        return Err(Error::invalid("lambda grid", "entries must be finite and >= 0"));
    }
    if grid.windows(2).any(|w| w[0] > w[1]) {
        return Err(Error::invalid("lambda grid", "must be ascending"));
    }
    Ok(())
}
