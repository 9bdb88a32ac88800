//! Ridge-damped least squares.

use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use super::{check_dataset, stable_mean, FittedModel, LearnError, ModelConfig, ModelParams};
use crate::encoding::PairDataset;

/// Least squares with an undamped intercept: solves
/// `(XcᵀXc + λI) β = Xcᵀyc` on column-centered data by Cholesky and recovers
/// the intercept from the means. `λ = 0` gives ordinary least squares and
/// fails on rank-deficient designs.
pub fn fit_linear(dataset: &PairDataset, config: &ModelConfig) -> Result<FittedModel, LearnError> {
    check_dataset(dataset, config)?;
    let n = dataset.n_rows();
    let p = dataset.n_cols();
    let x = dataset.design();
    let y = dataset.target();
    let lambda = config.ridge_damping;

    let y_mean = stable_mean(y.iter().copied());
    let x_mean: Vec<f64> = (0..p).map(|c| stable_mean((0..n).map(|r| x[r * p + c]))).collect();

    let mut a = vec![0.0; p * p];
    let mut b = vec![0.0; p];
    let mut centered = vec![0.0; p];
    for r in 0..n {
        let row = &x[r * p..(r + 1) * p];
        for c in 0..p {
            centered[c] = row[c] - x_mean[c];
        }
        let yc = y[r] - y_mean;
        for i in 0..p {
            let ci = centered[i];
            if ci == 0.0 {
                continue;
            }
            b[i] += ci * yc;
            let a_row = &mut a[i * p..i * p + i + 1];
            for (j, slot) in a_row.iter_mut().enumerate() {
                *slot += ci * centered[j];
            }
        }
    }
    for i in 0..p {
        a[i * p + i] += lambda;
    }

    let beta = cholesky_solve(&mut a, &b, p)?;
    let intercept = y_mean - beta.iter().zip(&x_mean).map(|(b, m)| b * m).sum::<f64>();
    Ok(FittedModel::new(
        config.clone(),
        dataset,
        ModelParams::Linear {
            intercept,
            coefficients: beta,
        },
    ))
}

/// Solves `A x = b` for symmetric positive definite `A`, of which only the
/// lower triangle is read. `A` is overwritten with its factor.
fn cholesky_solve(a: &mut [f64], b: &[f64], p: usize) -> Result<Vec<f64>, LearnError> {
    let diag: Vec<f64> = (0..p).map(|i| a[i * p + i]).collect();
    for j in 0..p {
        let mut d = a[j * p + j];
        for k in 0..j {
            d -= a[j * p + k] * a[j * p + k];
        }
        if !d.is_finite() || d <= diag[j].abs() * 1e-12 {
            return Err(LearnError::NumericalFailure(format!(
                "normal equations are singular at column {j}; add ridge damping or drop collinear columns"
            )));
        }
        let l_jj = libm::sqrt(d);
        a[j * p + j] = l_jj;
        for i in j + 1..p {
            let mut s = a[i * p + j];
            for k in 0..j {
                s -= a[i * p + k] * a[j * p + k];
            }
            a[i * p + j] = s / l_jj;
        }
    }
    let mut z = b.to_vec();
    for i in 0..p {
        for k in 0..i {
            z[i] -= a[i * p + k] * z[k];
        }
        z[i] /= a[i * p + i];
    }
    for i in (0..p).rev() {
        for k in i + 1..p {
            z[i] -= a[k * p + i] * z[k];
        }
        z[i] /= a[i * p + i];
    }
    Ok(z)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::learn::ModelParams;

    fn coefficients(m: &FittedModel) -> (f64, Vec<f64>) {
        match &m.params {
            ModelParams::Linear {
                intercept,
                coefficients,
            } => (*intercept, coefficients.clone()),
            _ => panic!(),
        }
    }

    #[test]
    fn recovers_exact_plane() {
        let rows: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64, ((i * 5) % 7) as f64]).collect();
        let y: Vec<f64> = rows.iter().map(|r| 0.25 + 2.0 * r[0] - 0.5 * r[1]).collect();
        let d = PairDataset::from_numeric(&["a", "b"], &rows, y).unwrap();
        let mut c = ModelConfig::linear();
        c.ridge_damping = 0.0;
        let m = fit_linear(&d, &c).unwrap();
        let (b0, b) = coefficients(&m);
        assert!((b0 - 0.25).abs() < 1e-10);
        assert!((b[0] - 2.0).abs() < 1e-10 && (b[1] + 0.5).abs() < 1e-10);
        assert!(m.training_rmse < 1e-10);
    }

    #[test]
    fn collinear_needs_damping() {
        let rows: Vec<Vec<f64>> = (0..6).map(|i| vec![i as f64, 2.0 * i as f64]).collect();
        let y: Vec<f64> = (0..6).map(|i| i as f64).collect();
        let d = PairDataset::from_numeric(&["a", "b"], &rows, y).unwrap();
        let mut c = ModelConfig::linear();
        c.ridge_damping = 0.0;
        assert!(matches!(fit_linear(&d, &c), Err(LearnError::NumericalFailure(_))));
        c.ridge_damping = 1e-8;
        assert!(fit_linear(&d, &c).unwrap().training_rmse < 1e-6);
    }

    #[test]
    fn constant_target_gives_flat_model() {
        let rows: Vec<Vec<f64>> = (0..5).map(|i| vec![i as f64]).collect();
        let d = PairDataset::from_numeric(&["a"], &rows, vec![0.7; 5]).unwrap();
        let m = fit_linear(&d, &ModelConfig::linear()).unwrap();
        assert_eq!(m.training_rmse, 0.0);
    }
}
