//! Poisson log-link fitting by iteratively reweighted least squares.

use nalgebra::{Cholesky, DMatrix, DVector};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::ln_gamma;

use crate::error::{Error, Result};
use crate::glm::design::{DesignInfo, DesignMatrix};

pub const MAX_ITERATIONS: usize = 50;
pub const DEVIANCE_TOLERANCE: f64 = 1e-8;
pub const MAX_STEP_HALVINGS: usize = 20;
/// Coefficients beyond this magnitude on the log scale indicate
/// separation-like divergence.
pub const COEFFICIENT_GUARD: f64 = 30.0;
/// Condition-number estimate beyond which SEs are flagged.
pub const CONDITION_FLAG: f64 = 1e10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub columns: Vec<String>,
    pub coefficients: Vec<f64>,
    /// Inverse of the final weighted information matrix, row major.
    pub covariance: Vec<Vec<f64>>,
    pub log_likelihood: f64,
    pub aic: f64,
    pub deviance: f64,
    pub iterations: usize,
    pub converged: bool,
    pub n_used: usize,
    pub n_dropped_rows: usize,
    pub aliased: Vec<String>,
    pub deviance_trace: Vec<f64>,
    /// 1-norm condition estimate of the information matrix.
    pub condition_estimate: f64,
    pub info: DesignInfo,
}

impl FitResult {
    pub fn coefficient(&self, name: &str) -> Option<f64> {
        self.columns
            .iter()
            .position(|c| c == name)
            .map(|i| self.coefficients[i])
    }

    pub fn covariance_matrix(&self) -> DMatrix<f64> {
        let p = self.columns.len();
        DMatrix::from_fn(p, p, |i, j| self.covariance[i][j])
    }

    pub fn near_singular(&self) -> bool {
        self.condition_estimate > CONDITION_FLAG
    }
}

fn poisson_deviance(y: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    let mut dev = 0.0;
    for (yi, mui) in y.iter().zip(mu.iter()) {
        let term = if *yi > 0.0 { yi * (yi / mui).ln() } else { 0.0 };
        dev += term - (yi - mui);
    }
    2.0 * dev
}

fn poisson_log_likelihood(y: &DVector<f64>, mu: &DVector<f64>) -> f64 {
    y.iter()
        .zip(mu.iter())
        .map(|(yi, mui)| yi * mui.ln() - mui - ln_gamma(yi + 1.0))
        .sum()
}

fn mean_vector(x: &DMatrix<f64>, beta: &DVector<f64>, offset: &DVector<f64>) -> DVector<f64> {
    let mut eta = x * beta;
    eta += offset;
    eta.map(f64::exp)
}

fn one_norm(m: &DMatrix<f64>) -> f64 {
    (0..m.ncols())
        .map(|j| m.column(j).iter().map(|v| v.abs()).sum::<f64>())
        .fold(0.0, f64::max)
}

/// Maximize the Poisson log-likelihood with log link and unit-coefficient
/// offset. Fisher scoring with step halving; converged when the relative
/// deviance change drops below [`DEVIANCE_TOLERANCE`].
pub fn fit_poisson_irls(design: &DesignMatrix) -> Result<FitResult> {
    let x = &design.x;
    let y = &design.y;
    let offset = &design.offset;
    let n = x.nrows();
    let p = x.ncols();
    if y.iter().any(|&v| v < 0.0 || v.fract() != 0.0) {
        return Err(Error::Data("response must be nonnegative integer counts".into()));
    }

    // Working start: mu = y + 0.5 keeps logs finite for zero counts.
    let mut mu = y.map(|v| v + 0.5);
    let mut beta = DVector::zeros(p);
    let mut deviance = poisson_deviance(y, &mu);
    let mut trace = Vec::new();
    let mut converged = false;
    let mut iterations = 0;

    for iter in 0..MAX_ITERATIONS {
        iterations = iter + 1;
        // eta of the current mean; on the first pass mu is the heuristic start.
        let eta = mu.map(f64::ln);
        let z = DVector::from_fn(n, |i, _| eta[i] - offset[i] + (y[i] - mu[i]) / mu[i]);
        let mut xtwx = DMatrix::zeros(p, p);
        let mut xtwz = DVector::zeros(p);
        for i in 0..n {
            let w = mu[i];
            let row = x.row(i);
            for a in 0..p {
                let xa = row[a] * w;
                xtwz[a] += xa * z[i];
                for b in a..p {
                    xtwx[(a, b)] += xa * row[b];
                }
            }
        }
        for a in 0..p {
            for b in 0..a {
                xtwx[(a, b)] = xtwx[(b, a)];
            }
        }
        let chol = Cholesky::new(xtwx).ok_or_else(|| {
            Error::Numerical("weighted information matrix is not positive definite".into())
        })?;
        let proposal = chol.solve(&xtwz);

        // Step halving toward the proposal when the deviance worsens.
        let mut step = 1.0;
        let mut accepted = false;
        for _ in 0..=MAX_STEP_HALVINGS {
            let candidate = &beta * (1.0 - step) + &proposal * step;
            let cand_mu = mean_vector(x, &candidate, offset);
            if cand_mu.iter().any(|v| !v.is_finite() || *v <= 0.0) {
                step *= 0.5;
                continue;
            }
            let cand_dev = poisson_deviance(y, &cand_mu);
            if cand_dev.is_finite() && (cand_dev <= deviance || iter == 0) {
                let rel_change = (deviance - cand_dev).abs() / (deviance.abs() + 0.1);
                beta = candidate;
                mu = cand_mu;
                deviance = cand_dev;
                trace.push(deviance);
                accepted = true;
                if rel_change < DEVIANCE_TOLERANCE && iter > 0 {
                    converged = true;
                }
                break;
            }
            step *= 0.5;
        }
        if !accepted {
            // No improving step; current point is the optimum within tolerance.
            trace.push(deviance);
            converged = true;
        }
        if beta.amax() > COEFFICIENT_GUARD {
            return Err(Error::Numerical(format!(
                "separation-like divergence: max |coefficient| {} exceeds {COEFFICIENT_GUARD}",
                beta.amax()
            )));
        }
        if converged {
            break;
        }
    }
    if !converged {
        return Err(Error::NonConvergence {
            iterations,
            trace,
        });
    }

    // Covariance from the information matrix at the solution.
    let mut information = DMatrix::zeros(p, p);
    for i in 0..n {
        let w = mu[i];
        let row = x.row(i);
        for a in 0..p {
            let xa = row[a] * w;
            for b in a..p {
                information[(a, b)] += xa * row[b];
            }
        }
    }
    for a in 0..p {
        for b in 0..a {
            information[(a, b)] = information[(b, a)];
        }
    }
    let covariance = Cholesky::new(information.clone())
        .ok_or_else(|| Error::Numerical("information matrix singular at solution".into()))?
        .inverse();
    let condition_estimate = one_norm(&information) * one_norm(&covariance);

    let log_likelihood = poisson_log_likelihood(y, &mu);
    let aic = 2.0 * p as f64 - 2.0 * log_likelihood;

    Ok(FitResult {
        columns: design.info.column_names(),
        coefficients: beta.iter().copied().collect(),
        covariance: (0..p)
            .map(|i| (0..p).map(|j| covariance[(i, j)]).collect())
            .collect(),
        log_likelihood,
        aic,
        deviance,
        iterations,
        converged,
        n_used: n,
        n_dropped_rows: design.n_dropped_rows,
        aliased: design.info.aliased_names(),
        deviance_trace: trace,
        condition_estimate,
        info: design.info.clone(),
    })
}

/// The log-likelihood and AIC of a fit; the identity
/// `aic = 2 k - 2 log_likelihood` holds with k = estimated coefficients.
pub fn log_likelihood_and_aic(fit: &FitResult) -> (f64, f64) {
    (fit.log_likelihood, fit.aic)
}

/// Square roots of the covariance diagonal. Fails on a negative diagonal
/// entry; the boolean flags a near-singular information matrix.
pub fn standard_errors(fit: &FitResult) -> Result<(Vec<f64>, bool)> {
    let mut ses = Vec::with_capacity(fit.columns.len());
    for (i, row) in fit.covariance.iter().enumerate() {
        let var = row[i];
        if var < 0.0 {
            return Err(Error::Numerical(format!(
                "negative variance {var} for coefficient {}",
                fit.columns[i]
            )));
        }
        ses.push(var.sqrt());
    }
    Ok((ses, fit.near_singular()))
}

/// Analytic score at the fitted coefficients, for convergence checks.
pub fn score_vector(design: &DesignMatrix, coefficients: &[f64]) -> DVector<f64> {
    let beta = DVector::from_column_slice(coefficients);
    let mu = mean_vector(&design.x, &beta, &design.offset);
    design.x.transpose() * (&design.y - mu)
}

/// Poisson log-likelihood at arbitrary coefficients, for gradient oracles.
pub fn log_likelihood_at(design: &DesignMatrix, coefficients: &[f64]) -> f64 {
    let beta = DVector::from_column_slice(coefficients);
    let mu = mean_vector(&design.x, &beta, &design.offset);
    poisson_log_likelihood(&design.y, &mu)
}
